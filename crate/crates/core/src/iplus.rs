//! The in-left-right-+ calculus: its rule table and the introduction property.

use crate::rewrite::{
    beta, case_inl, case_inlr_sum, case_inr, is_beta, is_sum_of, sum_disj, sum_lam, sum_parts,
    DisjHead::{Inl, Inlr, Inr},
    Rule, RuleId,
};
use crate::syntax::{Calculus, Side, Term};

const fn id(n: u32) -> RuleId {
    RuleId::new(Calculus::Iplus, n)
}

fn and_on_pair(t: &Term, side: Side) -> bool {
    matches!(t, Term::AndElim(s, p, _) if *s == side && matches!(**p, Term::Pair(..)))
}

fn and_pair(t: &Term) -> Term {
    match t {
        Term::AndElim(side, p, b) => match &**p {
            Term::Pair(l, r) => b.instantiate(if *side == Side::First { l } else { r }),
            _ => unreachable!(),
        },
        _ => unreachable!(),
    }
}

fn case_on(t: &Term, head: fn(&Term) -> bool) -> bool {
    matches!(t, Term::Case(s, ..) if head(s))
}

pub static RULES: [Rule; 19] = [
    Rule {
        id: id(1),
        name: "top_elim(star, t)",
        matches: |t| matches!(t, Term::TopElim(a, _) if **a == Term::Star),
        contract: |t| match t {
            Term::TopElim(_, b) => (**b).clone(),
            _ => unreachable!(),
        },
    },
    Rule {
        id: id(2),
        name: "beta",
        matches: is_beta,
        contract: beta,
    },
    Rule {
        id: id(3),
        name: "and1(pair)",
        matches: |t| and_on_pair(t, Side::First),
        contract: and_pair,
    },
    Rule {
        id: id(4),
        name: "and2(pair)",
        matches: |t| and_on_pair(t, Side::Second),
        contract: and_pair,
    },
    Rule {
        id: id(5),
        name: "case(inl)",
        matches: |t| case_on(t, |s| matches!(s, Term::Inl(_))),
        contract: case_inl,
    },
    Rule {
        id: id(6),
        name: "case(inr)",
        matches: |t| case_on(t, |s| matches!(s, Term::Inr(_))),
        contract: case_inr,
    },
    Rule {
        id: id(7),
        name: "case(inlr)",
        matches: |t| case_on(t, |s| matches!(s, Term::Inlr(..))),
        contract: case_inlr_sum,
    },
    Rule {
        id: id(8),
        name: "sum(star, star)",
        matches: |t| matches!(t, Term::Sum(a, b) if **a == Term::Star && **b == Term::Star),
        contract: |_| Term::Star,
    },
    Rule {
        id: id(9),
        name: "sum(lam, lam)",
        matches: |t| matches!(t, Term::Sum(a, b) if matches!((&**a, &**b), (Term::Lam(..), Term::Lam(..)))),
        contract: sum_lam,
    },
    Rule {
        id: id(10),
        name: "sum(pair, pair)",
        matches: |t| matches!(t, Term::Sum(a, b) if matches!((&**a, &**b), (Term::Pair(..), Term::Pair(..)))),
        contract: |t| match sum_parts(t) {
            (Term::Pair(a, b), Term::Pair(c, d)) => Term::pair(
                Term::sum((**a).clone(), (**c).clone()),
                Term::sum((**b).clone(), (**d).clone()),
            ),
            _ => unreachable!(),
        },
    },
    Rule {
        id: id(11),
        name: "sum(inl, inl)",
        matches: |t| is_sum_of(t, Inl, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(12),
        name: "sum(inl, inr)",
        matches: |t| is_sum_of(t, Inl, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(13),
        name: "sum(inl, inlr)",
        matches: |t| is_sum_of(t, Inl, Inlr),
        contract: sum_disj,
    },
    Rule {
        id: id(14),
        name: "sum(inr, inl)",
        matches: |t| is_sum_of(t, Inr, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(15),
        name: "sum(inr, inr)",
        matches: |t| is_sum_of(t, Inr, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(16),
        name: "sum(inr, inlr)",
        matches: |t| is_sum_of(t, Inr, Inlr),
        contract: sum_disj,
    },
    Rule {
        id: id(17),
        name: "sum(inlr, inl)",
        matches: |t| is_sum_of(t, Inlr, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(18),
        name: "sum(inlr, inr)",
        matches: |t| is_sum_of(t, Inlr, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(19),
        name: "sum(inlr, inlr)",
        matches: |t| is_sum_of(t, Inlr, Inlr),
        contract: sum_disj,
    },
];

/// Whether the head constructor is an introduction: `star`, `lam`, `pair`,
/// `inl`, `inr` or `inlr`.
pub fn is_introduction(t: &Term) -> bool {
    matches!(
        t,
        Term::Star | Term::Lam(..) | Term::Pair(..) | Term::Inl(_) | Term::Inr(_) | Term::Inlr(..)
    )
}
