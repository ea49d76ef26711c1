use inlr_core::cc::{
    demo_context, demo_optimization, explore, normalize_cc, pi_term, CcResult, Policy, RULES,
};
use inlr_core::gen::{cc_rule_instance, Gen};
use inlr_core::rewrite::{is_normal, step_at, Outcome, Ruleset};
use inlr_core::syntax::{alpha_eq, parse_prop, parse_term, Calculus, Term};
use inlr_core::typing::{check, infer_cc, TypingContext};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn cc(s: &str) -> Term {
    parse_term(s, Calculus::Cc).unwrap()
}

fn root_step(t: &Term, rule: u32) -> Term {
    let id = RULES[rule as usize - 1].id;
    step_at(t, &[], id, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap().term
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn every_rule_preserves_propositions(rule in 1u32..=42, seed in any::<u64>()) {
        let mut g = Gen::new(Calculus::Cc, seed);
        let s = cc_rule_instance(&mut g, rule).expect("instance typechecks");
        let u = root_step(&s.term, rule);
        prop_assert!(u.is_locally_closed());
        prop_assert!(check(Calculus::Cc, &s.ctx, &u, &s.prop).is_ok(), "cc:{}", rule);
    }

    #[test]
    fn normal_forms_are_redex_free(seed in any::<u64>()) {
        let s = Gen::new(Calculus::Cc, seed).sample(25);
        let CcResult::Trace(tr) = normalize_cc(&s.term, 10_000, Policy::First) else { unreachable!() };
        if let Outcome::NormalForm(nf) = &tr.outcome {
            prop_assert!(is_normal(nf, Ruleset::Cc));
            prop_assert!(check(Calculus::Cc, &s.ctx, nf, &s.prop).is_ok());
        }
    }
}

#[test]
fn ordinary_cuts_and_commutations() {
    assert_eq!(root_step(&cc("and1(t, x. lam y:C. u)"), 20), cc("lam y:C. and1(t, x. u)"));
    assert_eq!(root_step(&cc("and2(t, x. lam y:C. u)"), 26), cc("lam y:C. and2(t, x. u)"));
    assert_eq!(root_step(&cc("bot_elim[Top](t)"), 8), Term::Star);
    assert_eq!(
        root_step(&cc("case(inlr(t, x1. u1, x2. u2), y1. v1, y2. v2)"), 7),
        cc("case(t, x1. v1, x2. v2)")
    );
    assert_eq!(
        root_step(&cc("case(inlr(t, x1. u1, x2. u2), y1. pair(y1, y1), y2. y2)"), 7),
        cc("case(t, x1. pair(u1, u1), x2. u2)")
    );
    assert_eq!(root_step(&cc("bot_elim[A \\/ B](t)"), 11), cc("inl(bot_elim[A](t))"));
    assert_eq!(root_step(&cc("bot_elim[A \\/ B](t)"), 12), cc("inr(bot_elim[B](t))"));
    assert_eq!(
        root_step(&cc("case(t, x. inl(a), y. inl(b))"), 34),
        cc("inl(case(t, x. a, y. b))")
    );
    assert_eq!(
        root_step(&cc("case(t, x. inl(a), y. inr(b))"), 35),
        cc("inlr(t, x. a, y. b)")
    );
}

#[test]
fn pi_witnesses() {
    assert_eq!(
        pi_term(37, &Term::var("t"), None, None).unwrap(),
        cc("case(t, x1. inr(x1), x2. inl(x2))")
    );
    let ctx = TypingContext::parse("t : A1 \\/ A2, t1 : B1 \\/ B2, t2 : B3 \\/ B4").unwrap();
    let pi42 = pi_term(42, &Term::var("t"), None, None).unwrap();
    let p = parse_prop("((A1 /\\ B1) \\/ (A2 /\\ B3)) \\/ ((A1 /\\ B2) \\/ (A2 /\\ B4))").unwrap();
    assert_eq!(infer_cc(&ctx, &pi42).unwrap(), p);
    for n in [36, 37, 39, 40, 41, 42] {
        let pi = pi_term(n, &Term::var("t"), None, None).unwrap();
        assert!(infer_cc(&ctx, &pi).is_ok(), "cc:{n}");
    }
    for n in [1, 35, 38, 43] {
        assert!(pi_term(n, &Term::var("t"), None, None).is_err());
    }
}

#[test]
fn optimization_demo() {
    let d = demo_optimization();
    assert!(alpha_eq(d.applied.end(), &cc("and1(x, y. pair(u, y))")));
    assert!(alpha_eq(d.unapplied.end(), &cc("lam z:C. and1(x, y. pair(z, y))")));
    assert!(alpha_eq(d.reapplied.end(), d.applied.end()));
    assert!(d.converges());
    let ctx = demo_context();
    let p = infer_cc(&ctx, &d.applied.start).unwrap();
    assert_eq!(p, parse_prop("C /\\ A").unwrap());
    assert!(check(Calculus::Cc, &ctx, &d.applied_nf, &p).is_ok());
}

#[test]
fn enumeration_finds_both_bottom_choices() {
    let CcResult::Graph(g) = normalize_cc(&cc("bot_elim[A \\/ B](t)"), 100, Policy::Enumerate) else {
        unreachable!()
    };
    let nfs: Vec<&Term> = g.normal_forms.iter().map(|&i| &g.nodes[i]).collect();
    assert_eq!(nfs, vec![&cc("inl(bot_elim[A](t))"), &cc("inr(bot_elim[B](t))")]);
    let dot = g.to_dot();
    assert!(dot.contains("cc:11") && dot.contains("cc:12"));

    let det = explore(&cc("bot_elim[A \\/ B](t)"), Ruleset::CcDeterministic, 100);
    assert_eq!(det.normal_forms.len(), 1);
}

#[test]
fn swap_witness_is_its_own_redex() {
    let t = cc("case(t, x. inr(star), y. inl(star))");
    let pi = pi_term(37, &Term::var("t"), None, None).unwrap();
    assert!(RULES[36].id.number == 37 && (RULES[36].matches)(&pi));
    let mut cur = t;
    for depth in 1..=5 {
        cur = match normalize_cc(&cur, 1, Policy::First) {
            CcResult::Trace(tr) => tr.outcome.term().clone(),
            CcResult::Graph(_) => unreachable!(),
        };
        let mut nested = 0;
        let mut probe = &cur;
        while let Term::InlrBind(inner, _, _) = probe {
            nested += 1;
            probe = inner;
        }
        assert_eq!(nested, depth);
    }
}
