use inlr_core::gen::Gen;
use inlr_core::syntax::{
    alpha_eq, canonical_string, parse_term, print_term, Calculus, ParseErrorKind, Term,
};
use proptest::prelude::*;

fn calculus() -> impl Strategy<Value = Calculus> {
    prop_oneof![Just(Calculus::Iplus), Just(Calculus::Quantum), Just(Calculus::Cc)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn printing_then_parsing_is_identity(c in calculus(), seed in any::<u64>()) {
        let s = Gen::new(c, seed).with_nondeterminism(true).sample(30);
        let text = print_term(&s.term);
        let back = parse_term(&text, c).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(back, s.term);
    }

    #[test]
    fn canonical_strings_decide_alpha_equality(c in calculus(), a in any::<u64>(), b in any::<u64>()) {
        let t = Gen::new(c, a).sample(20).term;
        let u = Gen::new(c, b).sample(20).term;
        prop_assert_eq!(canonical_string(&t) == canonical_string(&u), alpha_eq(&t, &u));
        prop_assert_eq!(canonical_string(&t), canonical_string(&t.clone()));
    }

    #[test]
    fn substituting_a_fresh_variable_back_is_identity(seed in any::<u64>()) {
        let s = Gen::new(Calculus::Cc, seed).sample(30);
        let t = s.term.subst("h0", &Term::var("fresh_h0"));
        prop_assert_eq!(t.subst("fresh_h0", &Term::var("h0")), s.term.clone());
        prop_assert!(!t.occurs_free("h0"));
    }
}

#[test]
fn renaming_bound_variables_is_invisible() {
    let t = parse_term("lam x:Top. case(x, y. y, z. inl(z))", Calculus::Iplus).unwrap();
    let u = parse_term("lam a:Top. case(a, b. b, c. inl(c))", Calculus::Iplus).unwrap();
    assert_eq!(t, u);
    assert_eq!(canonical_string(&t), canonical_string(&u));
}

#[test]
fn capture_is_avoided_when_substituting() {
    let t = parse_term("lam y:Top. pair(x, y)", Calculus::Iplus).unwrap();
    let r = t.subst("x", &Term::var("y"));
    assert_eq!(print_term(&r), "lam y':Top. pair(y, y')");
}

#[test]
fn foreign_constructors_are_reported_with_position() {
    let e = parse_term("pair(star, sum(star, star))", Calculus::Cc).unwrap_err();
    assert_eq!((e.line, e.column), (1, 12));
    assert!(matches!(e.kind, ParseErrorKind::NotInCalculus { .. }));
    assert!(parse_term("case_nd(x, y. y, z. z)", Calculus::Iplus).is_err());
    assert!(parse_term("1.0 . star", Calculus::Iplus).is_err());
    assert!(parse_term("inlr(t, x. x, y. y)", Calculus::Quantum).is_err());
}
