//! Property suites over random samples, shared by `selftest` and the tests.

use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::cc::{self, explore};
use crate::gen::{cc_rule_instance, Gen, Sample};
use crate::qencode::{
    check_linear_map, compile_matrix, from_vector, ket0, max_abs_diff, meas_first_of,
    random_scalar, random_vector, random_vector_proof, random_vector_prop, to_vector,
    ComplexMatrix,
};
use crate::quantum::{self, check_lex_decrease, nu, run_measure, ZERO_NORM_BIN};
use crate::rewrite::{
    find_redexes, first_redex, is_normal, join_peak, normalize_det, step_at, Outcome, Ruleset,
    StepError, DEFAULT_FUEL,
};
use crate::syntax::{parse_term, print_term, Calculus, Prop, Side, Term};
use crate::typing::{check, infer};
use crate::iplus;

/// One property checked over a number of samples.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub samples: usize,
    pub failures: Vec<String>,
    /// A measured quantity, such as a maximal error or a frequency.
    pub metric: Option<f64>,
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str) -> Check {
        Check {
            name: name.to_string(),
            samples: 0,
            failures: Vec::new(),
            metric: None,
            note: None,
        }
    }

    fn fail(&mut self, msg: String) {
        if self.failures.len() < 20 {
            self.failures.push(msg);
        } else if self.failures.len() == 20 {
            self.failures.push("...".into());
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn to_json(&self) -> Value {
        json!({
            "check": self.name,
            "samples": self.samples,
            "passed": self.passed(),
            "failures": self.failures,
            "metric": self.metric,
            "note": self.note,
        })
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{status} {} ({} samples", self.name, self.samples)?;
        if let Some(m) = self.metric {
            write!(f, ", metric {m:.3e}")?;
        }
        write!(f, ")")?;
        if let Some(n) = &self.note {
            write!(f, " {n}")?;
        }
        for e in &self.failures {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Iplus,
    Quantum,
    Qencode,
    Cc,
}

impl std::str::FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iplus" => Ok(Suite::Iplus),
            "quantum" => Ok(Suite::Quantum),
            "qencode" => Ok(Suite::Qencode),
            "cc" => Ok(Suite::Cc),
            other => Err(format!("unknown suite `{other}`")),
        }
    }
}

pub fn run_suite(suite: Suite, samples: usize, seed: u64) -> Vec<Check> {
    match suite {
        Suite::Iplus => {
            let (intro, term) = normalization(Calculus::Iplus, samples, seed);
            vec![
                subject_reduction(Calculus::Iplus, samples, seed),
                intro,
                term,
                confluence(Ruleset::Iplus, samples, seed),
            ]
        }
        Suite::Quantum => {
            let (intro, term) = normalization(Calculus::Quantum, samples, seed);
            vec![
                subject_reduction(Calculus::Quantum, samples, seed),
                intro,
                term,
                confluence(Ruleset::QuantumDeterministic, samples, seed),
                lex_decrease(samples, seed),
                measurement_frequency(
                    &parse_term("inlr(1.0 . star, 1.0 . star)", Calculus::Quantum)
                        .expect("literal parses"),
                    samples.max(1) as u64 * 10,
                    seed,
                ),
            ]
        }
        Suite::Qencode => {
            let (apply, linear) = matrices(samples.div_ceil(4).max(1), 5, seed);
            vec![homomorphism(samples, seed), apply, linear]
        }
        Suite::Cc => vec![
            subject_reduction(Calculus::Cc, samples, seed),
            cc_rule_soundness(samples, seed),
            pi_terms(),
            demo(),
            cc_normal_forms(samples, seed),
            cc_joinability(samples, seed),
        ],
    }
}

fn generator(calculus: Calculus, seed: u64, nondeterministic: bool) -> Gen {
    Gen::new(calculus, seed).with_nondeterminism(nondeterministic)
}

const MAX_SIZE: usize = 30;
/// Terms inspected per sample along its normalization path.
const PATH_PREFIX: usize = 40;
/// Fuel for cc samples; diverging cc reducts nest one level deeper per step.
const CC_SAMPLE_FUEL: u64 = 2_000;

/// Every one-step reduct of every term on the normalization path of each
/// sample checks against the sample's proposition and against the
/// proposition inferred for the reduced term.
pub fn subject_reduction(calculus: Calculus, samples: usize, seed: u64) -> Check {
    let mut c = Check::new(&format!("{calculus} subject reduction"));
    let mut g = generator(calculus, seed, calculus == Calculus::Quantum);
    let rules = Ruleset::full(calculus);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0usize;
    for _ in 0..samples {
        let Sample { ctx, term, prop } = g.sample(MAX_SIZE);
        c.samples += 1;
        let mut cur = term;
        for _ in 0..PATH_PREFIX {
            let inferred = match infer(calculus, &ctx, &cur) {
                Ok(p) => p,
                Err(e) => {
                    c.fail(format!("{}: {e}", print_term(&cur)));
                    break;
                }
            };
            for (pos, rule) in find_redexes(&cur, rules) {
                let choices: &[Option<Side>] = if matches!(rule.number, 26 | 27)
                    && calculus == Calculus::Quantum
                {
                    &[Some(Side::First), Some(Side::Second)]
                } else {
                    &[None]
                };
                for choice in choices {
                    let u = match step_at(&cur, &pos, rule, *choice, &mut rng) {
                        Ok(a) => a.term,
                        Err(StepError::ZeroNormStuck) => continue,
                        Err(e) => {
                            c.fail(format!("{rule} on {}: {e}", print_term(&cur)));
                            continue;
                        }
                    };
                    steps += 1;
                    for target in [&prop, &inferred] {
                        if let Err(e) = check(calculus, &ctx, &u, target) {
                            c.fail(format!(
                                "{rule} at {:?}: {} -> {} lost {target}: {e}",
                                pos,
                                print_term(&cur),
                                print_term(&u)
                            ));
                        }
                    }
                }
            }
            let Some((pos, rule)) = first_redex(&cur, rules) else { break };
            match step_at(&cur, &pos, rule, None, &mut rng) {
                Ok(a) => cur = a.term,
                Err(_) => break,
            }
        }
    }
    c.note = Some(format!("{steps} steps checked"));
    c
}

/// Normalizes closed samples with the deterministic rules. Returns the
/// introduction-property check and the termination check.
pub fn normalization(calculus: Calculus, samples: usize, seed: u64) -> (Check, Check) {
    let mut intro = Check::new(&format!("{calculus} closed normal forms are introductions"));
    let mut term = Check::new(&format!("{calculus} normalization within fuel"));
    let rules = match calculus {
        Calculus::Quantum => Ruleset::QuantumDeterministic,
        other => Ruleset::full(other),
    };
    let mut g = generator(calculus, seed ^ 0x5eed, false);
    let mut longest = 0usize;
    for _ in 0..samples {
        let s = g.sample(MAX_SIZE);
        intro.samples += 1;
        term.samples += 1;
        let trace = normalize_det(&s.term, rules, DEFAULT_FUEL);
        longest = longest.max(trace.steps.len());
        match &trace.outcome {
            Outcome::NormalForm(nf) => {
                let ok = match calculus {
                    Calculus::Quantum => quantum::is_introduction(nf),
                    _ => iplus::is_introduction(nf),
                };
                if !ok {
                    intro.fail(format!("{} -> {}", print_term(&s.term), print_term(nf)));
                }
            }
            other => term.fail(format!("{}: {:?}", print_term(&s.term), other)),
        }
    }
    term.metric = Some(longest as f64);
    term.note = Some(format!("longest trace {longest} steps"));
    (intro, term)
}

/// Samples with at least two redexes; all one-step reducts must join.
pub fn confluence(rules: Ruleset, samples: usize, seed: u64) -> Check {
    let calculus = rules.calculus();
    let mut c = Check::new(&format!("{calculus} peaks join"));
    let mut g = generator(calculus, seed ^ 0xc0f1, false);
    let mut tries = 0usize;
    while c.samples < samples && tries < samples * 200 {
        tries += 1;
        let s = g.sample(MAX_SIZE);
        if find_redexes(&s.term, rules).len() < 2 {
            continue;
        }
        c.samples += 1;
        if !join_peak(&s.term, rules, DEFAULT_FUEL) {
            c.fail(print_term(&s.term));
        }
    }
    if c.samples < samples {
        c.fail(format!("only {} peaks found in {tries} samples", c.samples));
    }
    c
}

/// The (μ, ν) order decreases at each contracted redex of deterministic
/// quantum traces.
pub fn lex_decrease(samples: usize, seed: u64) -> Check {
    let mut c = Check::new("quantum (mu, nu) decreases at each redex");
    let mut g = generator(Calculus::Quantum, seed ^ 0x5eed, false);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut steps = 0usize;
    for _ in 0..samples {
        let s = g.sample(MAX_SIZE);
        c.samples += 1;
        let mut cur = s.term;
        while let Some((pos, rule)) = first_redex(&cur, Ruleset::QuantumDeterministic) {
            let Ok(a) = step_at(&cur, &pos, rule, None, &mut rng) else { break };
            let before = cur.subterm(&pos).expect("redex position").clone();
            let after = a.term.subterm(&pos).expect("contractum position").clone();
            steps += 1;
            if !check_lex_decrease(&before, &after) {
                c.fail(format!("{rule}: {} -> {}", print_term(&before), print_term(&after)));
            }
            cur = a.term;
        }
    }
    let worked = parse_term("sum(lam x:One. x, lam x:One. x)", Calculus::Quantum)
        .expect("literal parses");
    let reduct = normalize_det(&worked, Ruleset::Quantum, 1).outcome.term().clone();
    if (nu(&worked), nu(&reduct)) != (3, 2) || !check_lex_decrease(&worked, &reduct) {
        c.fail(format!(
            "worked pair: nu {} -> {}",
            nu(&worked),
            nu(&reduct)
        ));
    }
    c.note = Some(format!("{steps} steps checked"));
    c
}

/// Left frequency of measuring the first qubit of `t : Q_1`.
pub fn measurement_frequency(t: &Term, shots: u64, seed: u64) -> Check {
    let mut c = Check::new("measurement left frequency");
    let h = run_measure(&meas_first_of(1, t.clone()), shots, seed);
    let expected = match to_vector(t, &Prop::qn(1)) {
        Ok(v) => v[0].norm_sqr() / (v[0].norm_sqr() + v[1].norm_sqr()),
        Err(e) => {
            c.fail(e.to_string());
            return c;
        }
    };
    let f = h.left_frequency();
    c.samples = shots as usize;
    c.metric = Some(f);
    c.note = Some(format!("expected {expected:.4}"));
    // Five standard deviations of a binomial proportion.
    let tol = 5.0 * (expected * (1.0 - expected) / shots as f64).sqrt() + 1e-12;
    if (f - expected).abs() > tol {
        c.fail(format!("frequency {f} outside {expected} +/- {tol}"));
    }
    c
}

/// All shots of a zero-norm measurement end in the stuck bin.
pub fn zero_norm_stuck(shots: u64, seed: u64) -> bool {
    let t = meas_first_of(1, Term::inlr(Term::scalar_star(0.0), Term::scalar_star(0.0)));
    run_measure(&t, shots, seed).count_of(ZERO_NORM_BIN) == shots
}

/// Sums and scalar products of random closed vector proofs denote sums and
/// scalar multiples of vectors.
pub fn homomorphism(samples: usize, seed: u64) -> Check {
    let mut c = Check::new("vector homomorphism");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let d = rng.random_range(1..=16);
        let p = random_vector_prop(d, &mut rng);
        let (u, v) = (random_vector_proof(&p, &mut rng), random_vector_proof(&p, &mut rng));
        let a = random_scalar(&mut rng);
        c.samples += 1;
        let result = (|| {
            let (du, dv) = (to_vector(&u, &p)?, to_vector(&v, &p)?);
            let sum = to_vector(&Term::sum(u.clone(), v.clone()), &p)?;
            let prod = to_vector(&Term::prod(a, u.clone()), &p)?;
            let expect_sum: Vec<Complex64> = du.iter().zip(&dv).map(|(x, y)| x + y).collect();
            let expect_prod: Vec<Complex64> = du.iter().map(|x| a * x).collect();
            Ok::<f64, crate::qencode::QencodeError>(
                max_abs_diff(&sum, &expect_sum).max(max_abs_diff(&prod, &expect_prod)),
            )
        })();
        match result {
            Ok(e) => {
                worst = worst.max(e);
                if e >= 1e-9 {
                    c.fail(format!("{p}: error {e}"));
                }
            }
            Err(e) => c.fail(format!("{p}: {e}")),
        }
    }
    c.metric = Some(worst);
    c
}

/// Random matrices compiled to proofs: agreement with the numeric product
/// on random vectors, then the linearity report of each compiled proof.
pub fn matrices(count: usize, vectors: usize, seed: u64) -> (Check, Check) {
    let mut apply = Check::new("compiled matrices agree with the numeric product");
    let mut linear = Check::new("compiled matrices are linear");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_apply, mut worst_linear) = (0.0f64, 0.0f64);
    for i in 0..count {
        let (rows, cols) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let (a, b) = (random_vector_prop(cols, &mut rng), random_vector_prop(rows, &mut rng));
        let m = ComplexMatrix::random(rows, cols, &mut rng);
        apply.samples += 1;
        linear.samples += 1;
        let t = match compile_matrix(&m, &a, &b) {
            Ok(t) => t,
            Err(e) => {
                apply.fail(format!("matrix {i}: {e}"));
                continue;
            }
        };
        let lolli = Prop::lollipop(a.clone(), b.clone());
        if let Err(e) = check(Calculus::Quantum, &crate::typing::TypingContext::new(), &t, &lolli) {
            apply.fail(format!("matrix {i}: compiled proof is not of {lolli}: {e}"));
        }
        for _ in 0..vectors {
            let u = random_vector(cols, &mut rng);
            let expected = m.mul_vec(&u).expect("dimensions agree");
            let got = from_vector(&u, &a).and_then(|x| to_vector(&Term::app(t.clone(), x), &b));
            match got {
                Ok(v) => {
                    let e = max_abs_diff(&v, &expected);
                    worst_apply = worst_apply.max(e);
                    if e >= 1e-9 {
                        apply.fail(format!("matrix {i} ({a} to {b}): error {e}"));
                    }
                }
                Err(e) => apply.fail(format!("matrix {i}: {e}")),
            }
        }
        match check_linear_map(&t, &a, &b, vectors, seed.wrapping_add(i as u64)) {
            Ok(r) => {
                worst_linear = worst_linear.max(r.max_error());
                if !r.passed(1e-9) {
                    linear.fail(format!("matrix {i}: {r:?}"));
                }
            }
            Err(e) => linear.fail(format!("matrix {i}: {e}")),
        }
    }
    apply.metric = Some(worst_apply);
    linear.metric = Some(worst_linear);
    (apply, linear)
}

/// Measuring the first qubit of `H |0>`, with `H` compiled from its matrix.
pub fn hadamard_ket0() -> Term {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let m = ComplexMatrix::from_real(&[&[h, h], &[h, -h]]).expect("2x2");
    let t = compile_matrix(&m, &Prop::qn(1), &Prop::qn(1)).expect("dimensions agree");
    Term::app(t, ket0())
}

/// Every cc rule preserves the proposition of random instances of its
/// left-hand side.
pub fn cc_rule_soundness(instances: usize, seed: u64) -> Check {
    let mut c = Check::new("cc rules preserve propositions");
    let mut g = Gen::new(Calculus::Cc, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for rule in &cc::RULES {
        for _ in 0..instances {
            let Some(s) = cc_rule_instance(&mut g, rule.id.number) else {
                c.fail(format!("{}: no instance", rule.id));
                continue;
            };
            c.samples += 1;
            match step_at(&s.term, &[], rule.id, None, &mut rng) {
                Ok(a) => {
                    if let Err(e) = check(Calculus::Cc, &s.ctx, &a.term, &s.prop) {
                        c.fail(format!(
                            "{}: {} -> {}: {e}",
                            rule.id,
                            print_term(&s.term),
                            print_term(&a.term)
                        ));
                    }
                }
                Err(e) => c.fail(format!("{}: {e}", rule.id)),
            }
        }
    }
    c
}

/// The six π witnesses at their schematic propositions.
pub fn pi_terms() -> Check {
    let mut c = Check::new("pi witnesses typecheck");
    let ctx = crate::typing::TypingContext::parse("t : A1 \\/ A2, t1 : B1 \\/ B2, t2 : B3 \\/ B4")
        .expect("context parses");
    let expect = [
        (36, "(A1 \\/ A2 /\\ B3) \\/ A2 /\\ B4"),
        (37, "A2 \\/ A1"),
        (39, "A2 /\\ B3 \\/ A1 \\/ A2 /\\ B4"),
        (40, "(A1 /\\ B1 \\/ A2) \\/ A1 /\\ B2"),
        (41, "A1 /\\ B1 \\/ A1 /\\ B2 \\/ A2"),
        (42, "(A1 /\\ B1 \\/ A2 /\\ B3) \\/ A1 /\\ B2 \\/ A2 /\\ B4"),
    ];
    for (n, p) in expect {
        c.samples += 1;
        let pi = cc::pi_term(n, &Term::var("t"), None, None).expect("rule has a witness");
        let p = crate::syntax::parse_prop(p).expect("literal parses");
        if let Err(e) = check(Calculus::Cc, &ctx, &pi, &p) {
            c.fail(format!("cc:{n}: {e}"));
        }
    }
    c
}

pub fn demo() -> Check {
    let mut c = Check::new("optimization demo routes converge");
    c.samples = 1;
    let d = cc::demo_optimization();
    if !d.converges() {
        c.fail(format!(
            "{} vs {}",
            print_term(d.applied.end()),
            print_term(d.reapplied.end())
        ));
    }
    c
}

/// Normal forms reached under the cc rules contain no redex.
pub fn cc_normal_forms(samples: usize, seed: u64) -> Check {
    let mut c = Check::new("cc normal forms are redex-free");
    let mut g = Gen::new(Calculus::Cc, seed ^ 0x5eed);
    let mut exhausted = 0usize;
    for _ in 0..samples {
        let s = g.sample(MAX_SIZE);
        c.samples += 1;
        match normalize_det(&s.term, Ruleset::Cc, CC_SAMPLE_FUEL).outcome {
            Outcome::NormalForm(nf) => {
                if !is_normal(&nf, Ruleset::Cc) {
                    c.fail(print_term(&nf));
                }
            }
            _ => exhausted += 1,
        }
    }
    c.note = Some(format!("{exhausted} runs out of fuel"));
    c
}

/// Reduction graphs of the deterministic cc rules; terms with several
/// normal forms are reported in the note, not counted as failures.
pub fn cc_joinability(samples: usize, seed: u64) -> Check {
    let mut c = Check::new("cc deterministic reduction graphs");
    let mut g = Gen::new(Calculus::Cc, seed ^ 0xc0f1);
    let (mut single, mut several, mut truncated) = (0usize, 0usize, 0usize);
    let mut example = None;
    for _ in 0..samples {
        let s = g.sample(25);
        c.samples += 1;
        let graph = explore(&s.term, Ruleset::CcDeterministic, 500);
        if graph.truncated {
            truncated += 1;
        } else if graph.normal_forms.len() == 1 {
            single += 1;
        } else {
            several += 1;
            example.get_or_insert_with(|| print_term(&s.term));
        }
    }
    let mut note = format!("{single} single normal form, {several} several, {truncated} over budget");
    if let Some(e) = example {
        note.push_str(&format!("; e.g. {e}"));
    }
    c.note = Some(note);
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        for suite in [Suite::Iplus, Suite::Quantum, Suite::Qencode, Suite::Cc] {
            for check in run_suite(suite, 20, 1) {
                assert!(check.passed(), "{check}");
            }
        }
    }

    #[test]
    fn zero_norm_measurements_are_stuck() {
        assert!(zero_norm_stuck(50, 3));
    }
}
