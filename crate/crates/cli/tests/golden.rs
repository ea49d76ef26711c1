use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

struct Outcome {
    stdout: String,
    stderr: String,
    code: i32,
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

fn cases() -> Vec<PathBuf> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(golden_dir())
        .expect("golden directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.join("args").is_file())
        .collect();
    dirs.sort();
    dirs
}

fn run(case: &Path) -> Outcome {
    let args = fs::read_to_string(case.join("args")).expect("args file");
    let out = Command::new(env!("CARGO_BIN_EXE_inlr"))
        .args(args.lines().filter(|l| !l.is_empty()))
        .current_dir(case)
        .output()
        .expect("spawn inlr");
    Outcome {
        stdout: String::from_utf8(out.stdout).expect("utf8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf8 stderr"),
        code: out.status.code().expect("exit code"),
    }
}

fn read(case: &Path, name: &str) -> String {
    fs::read_to_string(case.join(name))
        .unwrap_or_else(|_| panic!("{} is missing {name}", case.display()))
}

#[test]
fn golden_corpus_is_large_enough() {
    assert!(cases().len() >= 20, "only {} golden cases", cases().len());
}

#[test]
fn golden_outputs_match() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut failures = Vec::new();
    for case in cases() {
        let name = case.file_name().unwrap().to_string_lossy().into_owned();
        let first = run(&case);
        if update {
            fs::write(case.join("stdout"), &first.stdout).unwrap();
            fs::write(case.join("stderr"), &first.stderr).unwrap();
            fs::write(case.join("code"), format!("{}\n", first.code)).unwrap();
            continue;
        }
        let code: i32 = read(&case, "code").trim().parse().expect("numeric code");
        if first.code != code {
            failures.push(format!("{name}: exit {} expected {code}", first.code));
        }
        if first.stdout != read(&case, "stdout") {
            failures.push(format!("{name}: stdout differs\n{}", first.stdout));
        }
        if first.stderr != read(&case, "stderr") {
            failures.push(format!("{name}: stderr differs\n{}", first.stderr));
        }
        let second = run(&case);
        if second.stdout != first.stdout || second.stderr != first.stderr || second.code != first.code {
            failures.push(format!("{name}: second run differs from the first"));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn exit_codes_cover_every_outcome() {
    let codes: std::collections::BTreeSet<i32> = cases()
        .iter()
        .map(|c| read(c, "code").trim().parse().unwrap())
        .collect();
    for code in [0, 1, 2, 3, 4] {
        assert!(codes.contains(&code), "no golden case exits {code}");
    }
}
