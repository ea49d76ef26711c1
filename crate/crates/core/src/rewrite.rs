//! Rule tables as data, redex search, stepping, normalization and traces.
//!
//! A rule is a pair of plain functions: a matcher looking only at the shape
//! of a subterm, and a contraction building the reduct. Contractions always
//! receive a locally closed term; the engine opens the binders above the
//! redex before calling them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::json;
use thiserror::Error;

use crate::syntax::{alpha_eq_approx, canonical_string, path_to_string, Binder, Calculus, Path, Side, Term};
use crate::{cc, iplus, quantum};

pub const DEFAULT_FUEL: u64 = 1_000_000;
pub const CC_DEFAULT_FUEL: u64 = 100_000;
/// Absolute tolerance when comparing scalars of normal forms.
pub const SCALAR_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId {
    pub calculus: Calculus,
    pub number: u32,
}

impl RuleId {
    pub const fn new(calculus: Calculus, number: u32) -> Self {
        RuleId { calculus, number }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.calculus, self.number)
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (calc, n) = s.split_once(':').ok_or_else(|| format!("bad rule id `{s}`"))?;
        let number = n.parse().map_err(|_| format!("bad rule number in `{s}`"))?;
        Ok(RuleId::new(calc.parse()?, number))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

pub struct Rule {
    pub id: RuleId,
    pub name: &'static str,
    pub matches: fn(&Term) -> bool,
    pub contract: fn(&Term) -> Term,
}

impl fmt::Debug for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Rule({} {})", self.id, self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ruleset {
    Iplus,
    Quantum,
    /// Quantum rules without the nondeterministic `case_nd` family (24 to 27).
    QuantumDeterministic,
    Cc,
    /// Cc rules without the `bot_elim` to `inr` alternative (rule 12).
    CcDeterministic,
}

impl Ruleset {
    pub fn full(calculus: Calculus) -> Ruleset {
        match calculus {
            Calculus::Iplus => Ruleset::Iplus,
            Calculus::Quantum => Ruleset::Quantum,
            Calculus::Cc => Ruleset::Cc,
        }
    }

    pub fn calculus(self) -> Calculus {
        match self {
            Ruleset::Iplus => Calculus::Iplus,
            Ruleset::Quantum | Ruleset::QuantumDeterministic => Calculus::Quantum,
            Ruleset::Cc | Ruleset::CcDeterministic => Calculus::Cc,
        }
    }

    fn table(self) -> &'static [Rule] {
        match self.calculus() {
            Calculus::Iplus => &iplus::RULES,
            Calculus::Quantum => &quantum::RULES,
            Calculus::Cc => &cc::RULES,
        }
    }

    fn excludes(self, number: u32) -> bool {
        match self {
            Ruleset::QuantumDeterministic => (24..=27).contains(&number),
            Ruleset::CcDeterministic => number == 12,
            _ => false,
        }
    }

    pub fn rules(self) -> impl Iterator<Item = &'static Rule> {
        self.table().iter().filter(move |r| !self.excludes(r.id.number))
    }

    pub fn rule(self, id: RuleId) -> Option<&'static Rule> {
        self.rules().find(|r| r.id == id)
    }

    pub fn default_fuel(self) -> u64 {
        match self.calculus() {
            Calculus::Cc => CC_DEFAULT_FUEL,
            _ => DEFAULT_FUEL,
        }
    }
}

/// The two rules of a probabilistic pair, if `id` belongs to one.
fn probabilistic_pair(id: RuleId) -> Option<(RuleId, RuleId)> {
    match (id.calculus, id.number) {
        (Calculus::Quantum, 26 | 27) => Some((
            RuleId::new(Calculus::Quantum, 26),
            RuleId::new(Calculus::Quantum, 27),
        )),
        _ => None,
    }
}

/// All `(position, rule)` pairs with a matching left-hand side, positions in
/// leftmost-outermost order and rules in table order.
pub fn find_redexes(t: &Term, rules: Ruleset) -> Vec<(Path, RuleId)> {
    let mut out = Vec::new();
    for pos in t.positions() {
        let sub = t.subterm(&pos).expect("position from positions()");
        for r in rules.rules() {
            if (r.matches)(sub) {
                out.push((pos.clone(), r.id));
            }
        }
    }
    out
}

/// The leftmost-outermost redex, without listing the others.
pub fn first_redex(t: &Term, rules: Ruleset) -> Option<(Path, RuleId)> {
    fn go(t: &Term, rules: Ruleset, path: &mut Path) -> Option<RuleId> {
        if let Some(r) = rules.rules().find(|r| (r.matches)(t)) {
            return Some(r.id);
        }
        for (i, c) in t.children().into_iter().enumerate() {
            path.push(i);
            if let Some(id) = go(c, rules, path) {
                return Some(id);
            }
            path.pop();
        }
        None
    }
    let mut path = Vec::new();
    go(t, rules, &mut path).map(|id| (path, id))
}

pub fn is_normal(t: &Term, rules: Ruleset) -> bool {
    first_redex(t, rules).is_none()
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum StepError {
    #[error("rule {rule} does not apply at {}", path_to_string(.pos))]
    NoMatch { rule: RuleId, pos: Path },
    #[error("both branches have norm 0, the proof cannot be reduced")]
    ZeroNormStuck,
    #[error("branch weights need closed irreducible vector components")]
    NormUndefined,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Applied {
    pub term: Term,
    pub rule: RuleId,
    pub weight: Option<f64>,
}

/// Contracts the redex at `pos`. For a probabilistic pair, `choice` forces a
/// branch; otherwise the branch is drawn from `rng` with the norm weights and
/// the returned rule is the one drawn.
pub fn step_at(
    t: &Term,
    pos: &[usize],
    rule: RuleId,
    choice: Option<Side>,
    rng: &mut dyn RngCore,
) -> Result<Applied, StepError> {
    let no_match = || StepError::NoMatch {
        rule,
        pos: pos.to_vec(),
    };
    let table = Ruleset::full(rule.calculus);
    let mut applied = rule;
    let mut weight = None;
    let result = t.rewrite_at(pos, &mut |sub: &Term| {
        let r = table.rule(rule).filter(|r| (r.matches)(sub)).ok_or_else(no_match)?;
        if let Some((left, right)) = probabilistic_pair(rule) {
            let weights = quantum::branch_weights(sub);
            if let Err(StepError::ZeroNormStuck) = weights {
                return Err(StepError::ZeroNormStuck);
            }
            let side = match (choice, &weights) {
                (Some(side), _) => side,
                (None, Ok((wl, _))) => {
                    if rng.random::<f64>() < *wl {
                        Side::First
                    } else {
                        Side::Second
                    }
                }
                (None, Err(e)) => return Err(e.clone()),
            };
            applied = if side == Side::First { left } else { right };
            weight = weights.ok().map(|(wl, wr)| if side == Side::First { wl } else { wr });
            let r = table.rule(applied).expect("pair rules are in the table");
            return Ok((r.contract)(sub));
        }
        if rule.calculus == Calculus::Quantum && matches!(rule.number, 24 | 25) {
            weight = Some(1.0);
        }
        Ok((r.contract)(sub))
    });
    let term = result.ok_or_else(no_match)??;
    Ok(Applied {
        term,
        rule: applied,
        weight,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub rule: RuleId,
    pub pos: Path,
    pub weight: Option<f64>,
}

impl Step {
    pub fn to_json_line(&self) -> String {
        json!({ "rule": self.rule, "pos": self.pos, "weight": self.weight }).to_string()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Outcome {
    NormalForm(Term),
    FuelExhausted(Term),
    Stuck { term: Term, reason: StepError },
}

impl Outcome {
    pub fn term(&self) -> &Term {
        match self {
            Outcome::NormalForm(t) | Outcome::FuelExhausted(t) => t,
            Outcome::Stuck { term, .. } => term,
        }
    }

    pub fn normal_form(&self) -> Option<&Term> {
        match self {
            Outcome::NormalForm(t) => Some(t),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub initial: Term,
    pub steps: Vec<Step>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn to_jsonl(&self) -> String {
        self.steps.iter().map(|s| s.to_json_line() + "\n").collect()
    }
}

pub fn steps_from_jsonl(text: &str) -> Result<Vec<Step>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Leftmost-outermost normalization with at most `fuel` steps.
pub fn normalize(t: &Term, rules: Ruleset, fuel: u64, rng: &mut dyn RngCore) -> Trace {
    let mut cur = t.clone();
    let mut steps = Vec::new();
    loop {
        let Some((pos, rule)) = first_redex(&cur, rules) else {
            return Trace {
                initial: t.clone(),
                steps,
                outcome: Outcome::NormalForm(cur),
            };
        };
        if steps.len() as u64 >= fuel {
            return Trace {
                initial: t.clone(),
                steps,
                outcome: Outcome::FuelExhausted(cur),
            };
        }
        match step_at(&cur, &pos, rule, None, rng) {
            Ok(a) => {
                steps.push(Step {
                    rule: a.rule,
                    pos,
                    weight: a.weight,
                });
                cur = a.term;
            }
            Err(reason) => {
                return Trace {
                    initial: t.clone(),
                    steps,
                    outcome: Outcome::Stuck { term: cur, reason },
                }
            }
        }
    }
}

/// Normalization for deterministic rulesets, where no randomness is drawn.
pub fn normalize_det(t: &Term, rules: Ruleset, fuel: u64) -> Trace {
    normalize(t, rules, fuel, &mut ChaCha8Rng::seed_from_u64(0))
}

/// Re-applies recorded steps; probabilistic steps follow the recorded branch.
pub fn replay(initial: &Term, steps: &[Step]) -> Result<Term, StepError> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut cur = initial.clone();
    for s in steps {
        let choice = probabilistic_pair(s.rule).map(|(left, _)| {
            if s.rule == left {
                Side::First
            } else {
                Side::Second
            }
        });
        cur = step_at(&cur, &s.pos, s.rule, choice, &mut rng)?.term;
    }
    Ok(cur)
}

/// Whether all one-step reducts of `t` normalize to the same term.
pub fn join_peak(t: &Term, rules: Ruleset, fuel: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut normal_forms: Vec<Term> = Vec::new();
    for (pos, rule) in find_redexes(t, rules) {
        let Ok(a) = step_at(t, &pos, rule, None, &mut rng) else {
            return false;
        };
        match normalize(&a.term, rules, fuel, &mut rng).outcome {
            Outcome::NormalForm(nf) => normal_forms.push(nf),
            _ => return false,
        }
    }
    normal_forms
        .windows(2)
        .all(|w| alpha_eq_approx(&w[0], &w[1], SCALAR_TOL))
}

/// A stable key for binning terms up to α-equivalence.
pub fn alpha_key(t: &Term) -> String {
    canonical_string(t)
}

// Shared contractions. Each one assumes its matcher accepted the term.

pub(crate) fn beta(t: &Term) -> Term {
    match t {
        Term::App(f, u) => match &**f {
            Term::Lam(_, b) => b.instantiate(u),
            _ => unreachable!("beta on non-redex"),
        },
        _ => unreachable!("beta on non-redex"),
    }
}

pub(crate) fn is_beta(t: &Term) -> bool {
    matches!(t, Term::App(f, _) if matches!(**f, Term::Lam(..)))
}

pub(crate) fn case_parts(t: &Term) -> (&Term, &Binder, &Binder) {
    match t {
        Term::Case(a, b, c) | Term::CaseNd(a, b, c) => (a, b, c),
        _ => unreachable!("case contraction on non-case"),
    }
}

pub(crate) fn case_inl(t: &Term) -> Term {
    let (s, b, _) = case_parts(t);
    match s {
        Term::Inl(a) => b.instantiate(a),
        _ => unreachable!(),
    }
}

pub(crate) fn case_inr(t: &Term) -> Term {
    let (s, _, c) = case_parts(t);
    match s {
        Term::Inr(a) => c.instantiate(a),
        _ => unreachable!(),
    }
}

pub(crate) fn case_inlr_sum(t: &Term) -> Term {
    let (s, b, c) = case_parts(t);
    match s {
        Term::Inlr(u, v) => Term::sum(b.instantiate(u), c.instantiate(v)),
        _ => unreachable!(),
    }
}

pub(crate) fn case_inlr_left(t: &Term) -> Term {
    let (s, b, _) = case_parts(t);
    match s {
        Term::Inlr(u, _) => b.instantiate(u),
        _ => unreachable!(),
    }
}

pub(crate) fn case_inlr_right(t: &Term) -> Term {
    let (s, _, c) = case_parts(t);
    match s {
        Term::Inlr(_, v) => c.instantiate(v),
        _ => unreachable!(),
    }
}

pub(crate) fn sum_parts(t: &Term) -> (&Term, &Term) {
    match t {
        Term::Sum(a, b) => (a, b),
        _ => unreachable!("sum contraction on non-sum"),
    }
}

pub(crate) fn sum_lam(t: &Term) -> Term {
    match sum_parts(t) {
        (Term::Lam(p, b1), Term::Lam(_, b2)) => Term::Lam(
            p.clone(),
            Binder::new(b1.hint.clone(), Term::sum((*b1.body).clone(), (*b2.body).clone())),
        ),
        _ => unreachable!(),
    }
}

/// Rules for `sum` of two disjunction introductions, in the table order
/// inl/inl, inl/inr, inl/inlr, inr/inl, inr/inr, inr/inlr, inlr/inl, inlr/inr, inlr/inlr.
pub(crate) fn sum_disj(t: &Term) -> Term {
    let s = |a: &Term, b: &Term| Term::sum(a.clone(), b.clone());
    match sum_parts(t) {
        (Term::Inl(a), Term::Inl(b)) => Term::inl(s(a, b)),
        (Term::Inl(a), Term::Inr(b)) => Term::inlr((**a).clone(), (**b).clone()),
        (Term::Inl(a), Term::Inlr(v, w)) => Term::inlr(s(a, v), (**w).clone()),
        (Term::Inr(a), Term::Inl(b)) => Term::inlr((**b).clone(), (**a).clone()),
        (Term::Inr(a), Term::Inr(b)) => Term::inr(s(a, b)),
        (Term::Inr(a), Term::Inlr(v, w)) => Term::inlr((**v).clone(), s(a, w)),
        (Term::Inlr(u, v), Term::Inl(b)) => Term::inlr(s(u, b), (**v).clone()),
        (Term::Inlr(u, v), Term::Inr(b)) => Term::inlr((**u).clone(), s(v, b)),
        (Term::Inlr(u, v), Term::Inlr(w, x)) => Term::inlr(s(u, w), s(v, x)),
        _ => unreachable!(),
    }
}

#[derive(Clone, Copy, PartialEq)]
pub(crate) enum DisjHead {
    Inl,
    Inr,
    Inlr,
}

pub(crate) fn disj_head(t: &Term) -> Option<DisjHead> {
    match t {
        Term::Inl(_) => Some(DisjHead::Inl),
        Term::Inr(_) => Some(DisjHead::Inr),
        Term::Inlr(..) => Some(DisjHead::Inlr),
        _ => None,
    }
}

pub(crate) fn is_sum_of(t: &Term, l: DisjHead, r: DisjHead) -> bool {
    match t {
        Term::Sum(a, b) => disj_head(a) == Some(l) && disj_head(b) == Some(r),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_term;

    fn ip(s: &str) -> Term {
        parse_term(s, Calculus::Iplus).unwrap()
    }

    fn q(s: &str) -> Term {
        parse_term(s, Calculus::Quantum).unwrap()
    }

    fn rid(c: Calculus, n: u32) -> RuleId {
        RuleId::new(c, n)
    }

    #[test]
    fn redex_listing() {
        assert_eq!(
            find_redexes(&ip("top_elim(star, star)"), Ruleset::Iplus),
            vec![(vec![], rid(Calculus::Iplus, 1))]
        );
        assert!(find_redexes(&ip("star"), Ruleset::Iplus).is_empty());
        assert_eq!(
            find_redexes(&ip("sum(inl(star), inr(star))"), Ruleset::Iplus),
            vec![(vec![], rid(Calculus::Iplus, 12))]
        );
    }

    #[test]
    fn nondeterministic_alternatives_are_listed() {
        let t = q("case_nd(inlr(1.0 . star, 2.0 . star), x. inl(x), y. inr(y))");
        let found: Vec<u32> = find_redexes(&t, Ruleset::Quantum).iter().map(|(_, r)| r.number).collect();
        assert_eq!(found, vec![26, 27]);
        assert!(find_redexes(&t, Ruleset::QuantumDeterministic).is_empty());
    }

    #[test]
    fn step_rule_7() {
        let t = ip("case(inlr(a, b), x. pair(x, x), y. y)");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = step_at(&t, &[], rid(Calculus::Iplus, 7), None, &mut rng).unwrap();
        assert_eq!(out.term, ip("sum(pair(a, a), b)"));
        assert_eq!(out.weight, None);
    }

    #[test]
    fn step_rule_19() {
        let t = q("one_elim(2.0 . star, t)");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = step_at(&t, &[], rid(Calculus::Quantum, 19), None, &mut rng).unwrap();
        assert_eq!(out.term, q("prod(2.0, t)"));
    }

    #[test]
    fn zero_norm_is_stuck() {
        let t = q("case_nd(inlr(0.0 . star, 0.0 . star), x. inl(x), y. inr(y))");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = step_at(&t, &[], rid(Calculus::Quantum, 26), None, &mut rng).unwrap_err();
        assert_eq!(err, StepError::ZeroNormStuck);
    }

    #[test]
    fn mismatched_rule_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = step_at(&ip("star"), &[], rid(Calculus::Iplus, 1), None, &mut rng).unwrap_err();
        assert!(matches!(err, StepError::NoMatch { .. }));
        let err = step_at(&ip("star"), &[3], rid(Calculus::Iplus, 1), None, &mut rng).unwrap_err();
        assert!(matches!(err, StepError::NoMatch { .. }));
    }

    #[test]
    fn normalize_examples() {
        let tr = normalize_det(&ip("(lam x:Top. x) star"), Ruleset::Iplus, DEFAULT_FUEL);
        assert_eq!(tr.outcome, Outcome::NormalForm(Term::Star));
        assert_eq!(tr.steps.len(), 1);

        let tr = normalize_det(&ip("sum(pair(star,star), pair(star,star))"), Ruleset::Iplus, DEFAULT_FUEL);
        assert_eq!(tr.outcome, Outcome::NormalForm(ip("pair(star, star)")));
        let rules: Vec<u32> = tr.steps.iter().map(|s| s.rule.number).collect();
        assert_eq!(rules, vec![10, 8, 8]);

        let tr = normalize_det(&q("sum(1.0 . star, 2.0 . star)"), Ruleset::Quantum, DEFAULT_FUEL);
        assert_eq!(tr.outcome, Outcome::NormalForm(q("3.0 . star")));
    }

    #[test]
    fn reduction_under_binders() {
        let t = ip("lam x:Top. top_elim(star, x)");
        let tr = normalize_det(&t, Ruleset::Iplus, DEFAULT_FUEL);
        assert_eq!(tr.outcome, Outcome::NormalForm(ip("lam y:Top. y")));
        assert_eq!(tr.steps[0].pos, vec![0]);
    }

    #[test]
    fn fuel_runs_out() {
        let tr = normalize_det(&ip("sum(pair(star,star), pair(star,star))"), Ruleset::Iplus, 2);
        assert!(matches!(tr.outcome, Outcome::FuelExhausted(_)));
        assert_eq!(tr.steps.len(), 2);
    }

    #[test]
    fn traces_replay_and_serialize() {
        let t = q("case_nd(inlr(1.0 . star, 1.0 . star), x. inl(x), y. inr(y))");
        for seed in 0..8 {
            let tr = normalize(&t, Ruleset::Quantum, DEFAULT_FUEL, &mut ChaCha8Rng::seed_from_u64(seed));
            let steps = steps_from_jsonl(&tr.to_jsonl()).unwrap();
            assert_eq!(steps, tr.steps);
            assert_eq!(&replay(&t, &steps).unwrap(), tr.outcome.term());
            assert_eq!(tr.steps[0].weight, Some(0.5));
        }
    }

    #[test]
    fn peaks_join() {
        assert!(join_peak(&ip("sum(top_elim(star,star), star)"), Ruleset::Iplus, DEFAULT_FUEL));
        assert!(join_peak(&ip("star"), Ruleset::Iplus, DEFAULT_FUEL));
    }

    #[test]
    fn rule_id_round_trip() {
        let id = rid(Calculus::Quantum, 26);
        assert_eq!(id.to_string(), "quantum:26");
        assert_eq!("quantum:26".parse::<RuleId>().unwrap(), id);
        assert!("quantum".parse::<RuleId>().is_err());
    }
}
