use inlr_core::gen::Gen;
use inlr_core::iplus;
use inlr_core::quantum::{self, mu, mu_subst_additivity, nu, shot_rng};
use inlr_core::rewrite::{
    find_redexes, normalize, normalize_det, replay, step_at, steps_from_jsonl, Outcome, RuleId,
    Ruleset, DEFAULT_FUEL,
};
use inlr_core::syntax::{alpha_eq_approx, parse_term, Calculus, Term};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Reduces the rightmost-innermost redex first: a second strategy whose normal
/// forms must agree with the engine's leftmost-outermost ones.
fn innermost_nf(t: &Term, rules: Ruleset) -> Term {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cur = t.clone();
    for _ in 0..100_000 {
        let redexes = find_redexes(&cur, rules);
        let Some((pos, rule)) = redexes.iter().max_by_key(|(p, _)| (p.len(), p.clone())).cloned() else {
            return cur;
        };
        cur = step_at(&cur, &pos, rule, None, &mut rng).unwrap().term;
    }
    panic!("innermost strategy did not terminate");
}

fn ip(s: &str) -> Term {
    parse_term(s, Calculus::Iplus).unwrap()
}

fn q(s: &str) -> Term {
    parse_term(s, Calculus::Quantum).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn strategies_agree_on_iplus(seed in any::<u64>()) {
        let t = Gen::new(Calculus::Iplus, seed).sample(30).term;
        let nf = normalize_det(&t, Ruleset::Iplus, DEFAULT_FUEL).outcome;
        let nf = nf.normal_form().expect("terminates");
        prop_assert_eq!(nf, &innermost_nf(&t, Ruleset::Iplus));
        prop_assert!(iplus::is_introduction(nf));
    }

    #[test]
    fn strategies_agree_on_deterministic_quantum(seed in any::<u64>()) {
        let t = Gen::new(Calculus::Quantum, seed).sample(30).term;
        let nf = normalize_det(&t, Ruleset::QuantumDeterministic, DEFAULT_FUEL).outcome;
        let nf = nf.normal_form().expect("terminates");
        prop_assert!(alpha_eq_approx(nf, &innermost_nf(&t, Ruleset::QuantumDeterministic), 1e-9));
        prop_assert!(quantum::is_introduction(nf));
    }

    #[test]
    fn traces_replay_to_the_same_term(seed in any::<u64>(), shot in 0u64..50) {
        let t = Gen::new(Calculus::Quantum, seed).with_nondeterminism(true).sample(30).term;
        let tr = normalize(&t, Ruleset::Quantum, DEFAULT_FUEL, &mut shot_rng(seed, shot));
        let steps = steps_from_jsonl(&tr.to_jsonl()).unwrap();
        prop_assert_eq!(&steps, &tr.steps);
        prop_assert_eq!(&replay(&t, &steps).unwrap(), tr.outcome.term());
    }

    #[test]
    fn same_seed_same_trace(seed in any::<u64>()) {
        let t = Gen::new(Calculus::Quantum, seed).with_nondeterminism(true).sample(30).term;
        let a = normalize(&t, Ruleset::Quantum, DEFAULT_FUEL, &mut shot_rng(7, 3));
        let b = normalize(&t, Ruleset::Quantum, DEFAULT_FUEL, &mut shot_rng(7, 3));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mu_is_additive_under_linear_substitution(a in any::<u64>(), b in any::<u64>()) {
        let mut g = Gen::new(Calculus::Quantum, a);
        let lam = (0..50).map(|_| g.sample(30).term).find(|t| matches!(t, Term::Lam(..)));
        let Some(Term::Lam(_, body)) = lam else { return Ok(()) };
        let t = body.open("x");
        let u = Gen::new(Calculus::Quantum, b).sample(20).term;
        prop_assert!(mu_subst_additivity(&t, "x", &u));
    }
}

#[test]
fn worked_iplus_reductions() {
    let nf = |s: &str| normalize_det(&ip(s), Ruleset::Iplus, DEFAULT_FUEL).outcome;
    assert_eq!(nf("sum(inl(star), inr(star))"), Outcome::NormalForm(ip("inlr(star, star)")));
    assert_eq!(
        nf("case(inlr(star, star), x. inl(x), y. inr(y))"),
        Outcome::NormalForm(ip("inlr(star, star)"))
    );
    let tr = normalize_det(&ip("sum(inl(star), inr(star))"), Ruleset::Iplus, 10);
    assert_eq!(tr.steps[0].rule, "iplus:12".parse::<RuleId>().unwrap());
}

#[test]
fn worked_measure_pair() {
    let t = q("sum(lam x:One. x, lam x:One. x)");
    let u = normalize_det(&t, Ruleset::Quantum, 1).outcome.term().clone();
    assert_eq!(u, q("lam x:One. sum(x, x)"));
    assert_eq!((nu(&t), nu(&u)), (3, 2));
    assert_eq!(mu(&t), mu(&u));
}

#[test]
fn fuel_exhaustion_is_an_outcome() {
    let t = ip("sum(sum(inl(star), inl(star)), inl(star))");
    let tr = normalize_det(&t, Ruleset::Iplus, 1);
    assert!(matches!(tr.outcome, Outcome::FuelExhausted(_)));
    assert_eq!(tr.steps.len(), 1);
}

#[test]
fn zero_norm_measurement_is_stuck() {
    let t = q("case_nd(inlr(0.0 . star, 0.0 . star), x. x, y. y)");
    let tr = normalize(&t, Ruleset::Quantum, 10, &mut shot_rng(0, 0));
    assert!(matches!(tr.outcome, Outcome::Stuck { .. }));
}
