//! The quantum in-left-right calculus: rule table, norm, the termination
//! measures and measurement runs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use thiserror::Error;

use crate::rewrite::{
    beta, case_inl, case_inlr_left, case_inlr_right, case_inlr_sum, case_inr, first_redex,
    is_beta, is_normal, is_sum_of, normalize, step_at, sum_disj, sum_lam,
    DisjHead::{Inl, Inlr, Inr},
    Outcome, Rule, RuleId, Ruleset, StepError, DEFAULT_FUEL,
};
use crate::syntax::{canonical_string, print_term, Binder, Calculus, Prop, Side, Term};

const fn id(n: u32) -> RuleId {
    RuleId::new(Calculus::Quantum, n)
}

fn case_with(t: &Term, nd: bool, head: fn(&Term) -> bool) -> bool {
    match t {
        Term::Case(s, ..) if !nd => head(s),
        Term::CaseNd(s, ..) if nd => head(s),
        _ => false,
    }
}

// The probabilistic rules fire once both components are irreducible, so that
// their norms are defined.
fn nd_inlr_ready(t: &Term) -> bool {
    match t {
        Term::CaseNd(s, ..) => match &**s {
            Term::Inlr(a, b) => is_irreducible(a) && is_irreducible(b),
            _ => false,
        },
        _ => false,
    }
}

fn prod_of(t: &Term, head: fn(&Term) -> bool) -> bool {
    matches!(t, Term::Prod(_, b) if head(b))
}

fn prod_push(t: &Term) -> Term {
    let Term::Prod(a, inner) = t else { unreachable!() };
    let scale = |u: &Term| Term::prod(*a, u.clone());
    match &**inner {
        Term::ScalarStar(b) => Term::ScalarStar(a * b),
        Term::Lam(p, b) => Term::Lam(p.clone(), Binder::new(b.hint.clone(), scale(&b.body))),
        Term::Inl(u) => Term::inl(scale(u)),
        Term::Inr(u) => Term::inr(scale(u)),
        Term::Inlr(u, v) => Term::inlr(scale(u), scale(v)),
        _ => unreachable!(),
    }
}

pub static RULES: [Rule; 25] = [
    Rule {
        id: id(19),
        name: "one_elim(a.star, t)",
        matches: |t| matches!(t, Term::OneElim(a, _) if matches!(**a, Term::ScalarStar(_))),
        contract: |t| match t {
            Term::OneElim(a, b) => match **a {
                Term::ScalarStar(s) => Term::prod(s, (**b).clone()),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        },
    },
    Rule {
        id: id(20),
        name: "beta",
        matches: is_beta,
        contract: beta,
    },
    Rule {
        id: id(21),
        name: "case(inl)",
        matches: |t| case_with(t, false, |s| matches!(s, Term::Inl(_))),
        contract: case_inl,
    },
    Rule {
        id: id(22),
        name: "case(inr)",
        matches: |t| case_with(t, false, |s| matches!(s, Term::Inr(_))),
        contract: case_inr,
    },
    Rule {
        id: id(23),
        name: "case(inlr)",
        matches: |t| case_with(t, false, |s| matches!(s, Term::Inlr(..))),
        contract: case_inlr_sum,
    },
    Rule {
        id: id(24),
        name: "case_nd(inl)",
        matches: |t| case_with(t, true, |s| matches!(s, Term::Inl(_))),
        contract: case_inl,
    },
    Rule {
        id: id(25),
        name: "case_nd(inr)",
        matches: |t| case_with(t, true, |s| matches!(s, Term::Inr(_))),
        contract: case_inr,
    },
    Rule {
        id: id(26),
        name: "case_nd(inlr) left",
        matches: nd_inlr_ready,
        contract: case_inlr_left,
    },
    Rule {
        id: id(27),
        name: "case_nd(inlr) right",
        matches: nd_inlr_ready,
        contract: case_inlr_right,
    },
    Rule {
        id: id(28),
        name: "sum(a.star, b.star)",
        matches: |t| {
            matches!(t, Term::Sum(a, b) if matches!((&**a, &**b), (Term::ScalarStar(_), Term::ScalarStar(_))))
        },
        contract: |t| match t {
            Term::Sum(a, b) => match (&**a, &**b) {
                (Term::ScalarStar(x), Term::ScalarStar(y)) => Term::ScalarStar(x + y),
                _ => unreachable!(),
            },
            _ => unreachable!(),
        },
    },
    Rule {
        id: id(29),
        name: "sum(lam, lam)",
        matches: |t| matches!(t, Term::Sum(a, b) if matches!((&**a, &**b), (Term::Lam(..), Term::Lam(..)))),
        contract: sum_lam,
    },
    Rule {
        id: id(30),
        name: "sum(inl, inl)",
        matches: |t| is_sum_of(t, Inl, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(31),
        name: "sum(inl, inr)",
        matches: |t| is_sum_of(t, Inl, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(32),
        name: "sum(inl, inlr)",
        matches: |t| is_sum_of(t, Inl, Inlr),
        contract: sum_disj,
    },
    Rule {
        id: id(33),
        name: "sum(inr, inl)",
        matches: |t| is_sum_of(t, Inr, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(34),
        name: "sum(inr, inr)",
        matches: |t| is_sum_of(t, Inr, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(35),
        name: "sum(inr, inlr)",
        matches: |t| is_sum_of(t, Inr, Inlr),
        contract: sum_disj,
    },
    Rule {
        id: id(36),
        name: "sum(inlr, inl)",
        matches: |t| is_sum_of(t, Inlr, Inl),
        contract: sum_disj,
    },
    Rule {
        id: id(37),
        name: "sum(inlr, inr)",
        matches: |t| is_sum_of(t, Inlr, Inr),
        contract: sum_disj,
    },
    Rule {
        id: id(38),
        name: "sum(inlr, inlr)",
        matches: |t| is_sum_of(t, Inlr, Inlr),
        contract: sum_disj,
    },
    Rule {
        id: id(39),
        name: "prod(a, b.star)",
        matches: |t| prod_of(t, |u| matches!(u, Term::ScalarStar(_))),
        contract: prod_push,
    },
    Rule {
        id: id(40),
        name: "prod(a, lam)",
        matches: |t| prod_of(t, |u| matches!(u, Term::Lam(..))),
        contract: prod_push,
    },
    Rule {
        id: id(41),
        name: "prod(a, inl)",
        matches: |t| prod_of(t, |u| matches!(u, Term::Inl(_))),
        contract: prod_push,
    },
    Rule {
        id: id(42),
        name: "prod(a, inr)",
        matches: |t| prod_of(t, |u| matches!(u, Term::Inr(_))),
        contract: prod_push,
    },
    Rule {
        id: id(43),
        name: "prod(a, inlr)",
        matches: |t| prod_of(t, |u| matches!(u, Term::Inlr(..))),
        contract: prod_push,
    },
];

pub fn is_irreducible(t: &Term) -> bool {
    is_normal(t, Ruleset::Quantum)
}

/// Introductions of the quantum calculus: `a.star`, `lam`, `inl`, `inr`, `inlr`.
pub fn is_introduction(t: &Term) -> bool {
    matches!(
        t,
        Term::ScalarStar(_) | Term::Lam(..) | Term::Inl(_) | Term::Inr(_) | Term::Inlr(..)
    )
}

/// `‖t‖²` read off the syntax of an irreducible vector proof, or `None` when
/// `t` is not of that shape.
pub fn norm_sq_of(t: &Term) -> Option<f64> {
    match t {
        Term::ScalarStar(a) => Some(a.norm_sqr()),
        Term::Inl(u) | Term::Inr(u) => norm_sq_of(u),
        Term::Inlr(u, v) => Some(norm_sq_of(u)? + norm_sq_of(v)?),
        _ => None,
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum NormError {
    #[error("the proof is not closed and irreducible")]
    NotIrreducible,
    #[error("{0} is not a vector proposition")]
    NotVectorProp(Prop),
    #[error("the proof does not have the shape of {0}")]
    ShapeMismatch(Prop),
}

pub fn is_vector_prop(p: &Prop) -> bool {
    match p {
        Prop::One => true,
        Prop::OPlus(a, b) => is_vector_prop(a) && is_vector_prop(b),
        _ => false,
    }
}

/// `‖t‖²` for a closed irreducible proof `t` of the vector proposition `prop`.
pub fn norm_sq(t: &Term, prop: &Prop) -> Result<f64, NormError> {
    if !is_vector_prop(prop) {
        return Err(NormError::NotVectorProp(prop.clone()));
    }
    if !t.is_closed() || !t.is_locally_closed() || !is_irreducible(t) {
        return Err(NormError::NotIrreducible);
    }
    fn go(t: &Term, p: &Prop) -> Result<f64, NormError> {
        let mismatch = || NormError::ShapeMismatch(p.clone());
        match (t, p) {
            (Term::ScalarStar(a), Prop::One) => Ok(a.norm_sqr()),
            (Term::Inl(u), Prop::OPlus(a, _)) => go(u, a),
            (Term::Inr(u), Prop::OPlus(_, b)) => go(u, b),
            (Term::Inlr(u, v), Prop::OPlus(a, b)) => Ok(go(u, a)? + go(v, b)?),
            _ => Err(mismatch()),
        }
    }
    go(t, prop)
}

/// Normalized branch weights of a `case_nd(inlr(t, u), ..)` redex.
pub fn branch_weights(redex: &Term) -> Result<(f64, f64), StepError> {
    let Term::CaseNd(s, ..) = redex else {
        return Err(StepError::NormUndefined);
    };
    let Term::Inlr(a, b) = &**s else {
        return Err(StepError::NormUndefined);
    };
    let (na, nb) = match (norm_sq_of(a), norm_sq_of(b)) {
        (Some(x), Some(y)) => (x, y),
        _ => return Err(StepError::NormUndefined),
    };
    let total = na + nb;
    if total == 0.0 {
        return Err(StepError::ZeroNormStuck);
    }
    Ok((na / total, nb / total))
}

/// The measure μ.
pub fn mu(t: &Term) -> u64 {
    match t {
        Term::Bound(_) | Term::Free(_) => 0,
        Term::Sum(a, b) | Term::Inlr(a, b) => 1 + mu(a).max(mu(b)),
        Term::Prod(_, a) | Term::Inl(a) | Term::Inr(a) => 1 + mu(a),
        Term::ScalarStar(_) | Term::Star => 1,
        Term::OneElim(a, b) | Term::App(a, b) => 1 + mu(a) + mu(b),
        Term::Lam(_, b) => 1 + mu(&b.body),
        Term::Case(a, b, c) | Term::CaseNd(a, b, c) => 1 + mu(a) + mu(&b.body).max(mu(&c.body)),
        _ => 1 + t.children().iter().map(|c| mu(c)).sum::<u64>(),
    }
}

/// The measure ν.
pub fn nu(t: &Term) -> u64 {
    match t {
        Term::Bound(_) | Term::Free(_) => 0,
        Term::Sum(a, b) => 1 + 2 * nu(a).max(nu(b)),
        Term::Prod(_, a) => 1 + 2 * nu(a),
        Term::ScalarStar(_) | Term::Star => 1,
        Term::OneElim(..) | Term::App(..) | Term::Case(..) | Term::CaseNd(..) => 1,
        Term::Lam(_, b) => 1 + nu(&b.body),
        Term::Inl(a) | Term::Inr(a) => 1 + nu(a),
        Term::Inlr(a, b) => 1 + nu(a).max(nu(b)),
        _ => 1,
    }
}

/// Strict lexicographic decrease of (μ, ν) from `t` to `u`.
pub fn check_lex_decrease(t: &Term, u: &Term) -> bool {
    (mu(t), nu(t)) > (mu(u), nu(u))
}

/// `μ((u/x)t) = μ(t) + μ(u)`, which holds when `x` occurs linearly in `t`.
pub fn mu_subst_additivity(t: &Term, x: &str, u: &Term) -> bool {
    mu(&t.subst(x, u)) == mu(t) + mu(u)
}

pub const ZERO_NORM_BIN: &str = "ZeroNormStuck";
pub const FUEL_BIN: &str = "FuelExhausted";
pub const UNDEFINED_BIN: &str = "NormUndefined";

#[derive(Clone, Debug, PartialEq)]
pub struct Bin {
    pub key: String,
    /// Printed normal form, or the name of a failure bin.
    pub label: String,
    pub term: Option<Term>,
    pub count: u64,
    pub frequency: f64,
    pub exact_weight: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub shots: u64,
    pub bins: Vec<Bin>,
}

impl Histogram {
    pub fn frequency_where(&self, pred: impl Fn(&Term) -> bool) -> f64 {
        let hits: u64 = self
            .bins
            .iter()
            .filter(|b| b.term.as_ref().is_some_and(&pred))
            .map(|b| b.count)
            .sum();
        hits as f64 / self.shots.max(1) as f64
    }

    /// Fraction of shots whose normal form is an `inl`.
    pub fn left_frequency(&self) -> f64 {
        self.frequency_where(|t| matches!(t, Term::Inl(_)))
    }

    pub fn count_of(&self, label: &str) -> u64 {
        self.bins.iter().filter(|b| b.label == label).map(|b| b.count).sum()
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.bins
                .iter()
                .map(|b| {
                    let mut v = json!({
                        "term": b.label,
                        "count": b.count,
                        "frequency": b.frequency,
                    });
                    if let Some(w) = b.exact_weight {
                        v["exact_weight"] = json!(w);
                    }
                    v
                })
                .collect(),
        )
    }
}

fn bin_of(outcome: &Outcome) -> (String, String, Option<Term>) {
    match outcome {
        Outcome::NormalForm(t) => (canonical_string(t), print_term(t), Some(t.clone())),
        Outcome::FuelExhausted(_) => (FUEL_BIN.into(), FUEL_BIN.into(), None),
        Outcome::Stuck {
            reason: StepError::ZeroNormStuck,
            ..
        } => (ZERO_NORM_BIN.into(), ZERO_NORM_BIN.into(), None),
        Outcome::Stuck { .. } => (UNDEFINED_BIN.into(), UNDEFINED_BIN.into(), None),
    }
}

/// The rng of shot `shot`: one ChaCha stream per shot under the same seed.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

const EXACT_LEAF_LIMIT: usize = 4096;

/// Outcome probabilities by exhaustive exploration of the probabilistic
/// choices, keyed like the histogram bins. `None` if the tree is too large.
pub fn exact_distribution(t: &Term, fuel: u64) -> Option<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![(t.clone(), 1.0f64, 0u64)];
    let mut leaves = 0usize;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    while let Some((mut cur, p, mut used)) = stack.pop() {
        loop {
            let Some((pos, rule)) = first_redex(&cur, Ruleset::Quantum) else {
                *out.entry(canonical_string(&cur)).or_insert(0.0) += p;
                break;
            };
            if used >= fuel {
                *out.entry(FUEL_BIN.to_string()).or_insert(0.0) += p;
                break;
            }
            used += 1;
            if matches!(rule.number, 26 | 27) {
                let redex = cur.subterm(&pos)?;
                match branch_weights(redex) {
                    Ok((wl, wr)) => {
                        for (side, w) in [(Side::First, wl), (Side::Second, wr)] {
                            if w > 0.0 {
                                let next = step_at(&cur, &pos, rule, Some(side), &mut rng).ok()?;
                                stack.push((next.term, p * w, used));
                            }
                        }
                    }
                    Err(StepError::ZeroNormStuck) => {
                        *out.entry(ZERO_NORM_BIN.to_string()).or_insert(0.0) += p;
                    }
                    Err(_) => {
                        *out.entry(UNDEFINED_BIN.to_string()).or_insert(0.0) += p;
                    }
                }
                break;
            }
            cur = step_at(&cur, &pos, rule, None, &mut rng).ok()?.term;
        }
        leaves += 1;
        if leaves > EXACT_LEAF_LIMIT {
            return None;
        }
    }
    Some(out)
}

/// Normalizes `t` once per shot and bins the outcomes up to α-equivalence.
/// Bins are ordered by decreasing count, then by label.
pub fn run_measure(t: &Term, shots: u64, seed: u64) -> Histogram {
    let mut bins: BTreeMap<String, Bin> = BTreeMap::new();
    for shot in 0..shots {
        let mut rng = shot_rng(seed, shot);
        let trace = normalize(t, Ruleset::Quantum, DEFAULT_FUEL, &mut rng);
        let (key, label, term) = bin_of(&trace.outcome);
        bins.entry(key.clone())
            .or_insert(Bin {
                key,
                label,
                term,
                count: 0,
                frequency: 0.0,
                exact_weight: None,
            })
            .count += 1;
    }
    let exact = exact_distribution(t, DEFAULT_FUEL);
    let mut bins: Vec<Bin> = bins
        .into_values()
        .map(|mut b| {
            b.frequency = b.count as f64 / shots as f64;
            b.exact_weight = exact.as_ref().map(|e| e.get(&b.key).copied().unwrap_or(0.0));
            b
        })
        .collect();
    bins.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.label.cmp(&b.label)));
    Histogram { shots, bins }
}

/// `1.0 . star`.
pub fn unit_star() -> Term {
    Term::ScalarStar(Complex64::new(1.0, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{normalize_det, DEFAULT_FUEL};
    use crate::syntax::parse_term;

    fn q(s: &str) -> Term {
        parse_term(s, Calculus::Quantum).unwrap()
    }

    #[test]
    fn table_numbering() {
        for (i, r) in RULES.iter().enumerate() {
            assert_eq!(r.id.number as usize, i + 19);
        }
    }

    #[test]
    fn norms() {
        let b = Prop::qn(1);
        assert_eq!(norm_sq(&q("3.0 . star"), &Prop::One), Ok(9.0));
        assert_eq!(norm_sq(&q("inlr(3.0 . star, 4.0 . star)"), &b), Ok(25.0));
        assert_eq!(norm_sq(&q("inl(1.0 . star)"), &b), Ok(1.0));
        assert_eq!(norm_sq(&q("(0.0, 2.0) . star"), &Prop::One), Ok(4.0));
        assert_eq!(
            norm_sq(&q("sum(1.0 . star, 1.0 . star)"), &Prop::One),
            Err(NormError::NotIrreducible)
        );
        assert!(matches!(norm_sq(&q("1.0 . star"), &Prop::atom("A")), Err(NormError::NotVectorProp(_))));
        assert!(matches!(norm_sq(&q("1.0 . star"), &b), Err(NormError::ShapeMismatch(_))));
    }

    #[test]
    fn measures() {
        assert_eq!(mu(&q("x")), 0);
        assert_eq!(nu(&q("sum(lam x:One. x, lam x:One. x)")), 3);
        assert_eq!(nu(&q("lam x:One. sum(x, x)")), 2);
        assert_eq!(mu(&q("prod(2.0, 5.0 . star)")), 2);
        assert_eq!(mu(&q("one_elim(2.0 . star, t)")), 2);
        assert_eq!(mu(&q("prod(2.0, t)")), 1);
    }

    #[test]
    fn lex_decrease_examples() {
        assert!(check_lex_decrease(&q("one_elim(2.0 . star, t)"), &q("prod(2.0, t)")));
        let t = q("sum(lam x:One. x, lam x:One. x)");
        let u = q("lam x:One. sum(x, x)");
        assert_eq!(mu(&t), mu(&u));
        assert!(check_lex_decrease(&t, &u));
        assert!(!check_lex_decrease(&u, &t));
    }

    #[test]
    fn mu_additivity() {
        assert!(mu_subst_additivity(&q("prod(2.0, x)"), "x", &q("5.0 . star")));
        assert!(mu_subst_additivity(&q("x"), "x", &q("inl(2.0 . star)")));
    }

    #[test]
    fn scalar_rules() {
        let nf = |s| normalize_det(&q(s), Ruleset::Quantum, DEFAULT_FUEL).outcome;
        assert_eq!(nf("prod(2.0, inlr(3.0 . star, inl(1.0 . star)))"), Outcome::NormalForm(q("inlr(6.0 . star, inl(2.0 . star))")));
        assert_eq!(nf("one_elim(2.0 . star, 0.5 . star)"), Outcome::NormalForm(q("1.0 . star")));
    }

    #[test]
    fn weights() {
        let r = q("case_nd(inlr(3.0 . star, 4.0 . star), x. x, y. y)");
        let (l, rr) = branch_weights(&r).unwrap();
        assert!((l - 9.0 / 25.0).abs() < 1e-12 && (rr - 16.0 / 25.0).abs() < 1e-12);
        let z = q("case_nd(inlr(0.0 . star, 0.0 . star), x. x, y. y)");
        assert_eq!(branch_weights(&z), Err(StepError::ZeroNormStuck));
    }

    #[test]
    fn exact_distribution_of_a_fair_coin() {
        let t = q("case_nd(inlr(1.0 . star, 1.0 . star), x. inl(x), y. inr(y))");
        let d = exact_distribution(&t, DEFAULT_FUEL).unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.values().all(|p| (p - 0.5).abs() < 1e-12));
    }

    #[test]
    fn histogram_is_reproducible() {
        let t = q("case_nd(inlr(1.0 . star, 1.0 . star), x. inl(x), y. inr(y))");
        let a = run_measure(&t, 200, 7);
        let b = run_measure(&t, 200, 7);
        assert_eq!(a, b);
        assert_eq!(a.bins.iter().map(|b| b.count).sum::<u64>(), 200);
        assert!(a.bins.iter().all(|b| b.exact_weight == Some(0.5)));
    }
}
