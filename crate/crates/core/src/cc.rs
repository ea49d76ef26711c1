//! The commuting-cut in-left-right calculus: rule table, π witnesses,
//! graph exploration and the optimization demo.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::rewrite::{
    beta, case_inl, case_inr, find_redexes, is_beta, normalize, step_at, Rule, RuleId, Ruleset,
    Step, Trace,
};
use crate::syntax::{
    alpha_eq, canonical_string, fresh_name, pair_subst, print_term, Binder, Calculus, Prop, Side,
    Term,
};

const fn id(n: u32) -> RuleId {
    RuleId::new(Calculus::Cc, n)
}

/// A binder opened to a fresh name, keeping its printing hint.
struct Open {
    hint: String,
    name: String,
    body: Term,
}

fn open(b: &Binder) -> Open {
    let (name, body) = b.open_fresh();
    Open {
        hint: b.hint.clone(),
        name,
        body,
    }
}

/// A fresh variable with a readable hint.
struct Var {
    hint: &'static str,
    name: String,
}

impl Var {
    fn new(hint: &'static str) -> Var {
        Var {
            hint,
            name: fresh_name(),
        }
    }

    fn t(&self) -> Term {
        Term::Free(self.name.clone())
    }

    fn bind(&self, body: Term) -> Binder {
        Binder::close(self.hint, &self.name, body)
    }
}

fn bind(o: &Open, body: Term) -> Binder {
    Binder::close(o.hint.clone(), &o.name, body)
}

fn case(t: Term, b1: Binder, b2: Binder) -> Term {
    Term::Case(Box::new(t), b1, b2)
}

fn inlr(t: Term, b1: Binder, b2: Binder) -> Term {
    Term::InlrBind(Box::new(t), b1, b2)
}

fn and_elim(side: Side, t: Term, b: Binder) -> Term {
    Term::AndElim(side, Box::new(t), b)
}

fn bot(p: &Prop, t: &Term) -> Term {
    Term::bot_elim(p.clone(), t.clone())
}

fn bot_is(t: &Term, f: fn(&Prop) -> bool) -> bool {
    matches!(t, Term::BotElim(p, _) if f(p))
}

fn is_intro_head(t: &Term, head: u8) -> bool {
    match head {
        0 => *t == Term::Star,
        1 => matches!(t, Term::Lam(..)),
        2 => matches!(t, Term::Pair(..)),
        3 => matches!(t, Term::Inl(_)),
        4 => matches!(t, Term::Inr(_)),
        _ => matches!(t, Term::InlrBind(..)),
    }
}

/// Pushes a one-premise eliminator `wrap` through the introduction `body`.
/// `wrap` rebuilds the eliminator around a new minor premise.
fn push_through(body: &Term, wrap: &dyn Fn(Term) -> Term) -> Term {
    match body {
        Term::Star => Term::Star,
        Term::Lam(p, b) => {
            let o = open(b);
            Term::Lam(p.clone(), bind(&o, wrap(o.body.clone())))
        }
        Term::Pair(a, b) => Term::pair(wrap((**a).clone()), wrap((**b).clone())),
        Term::Inl(a) => Term::inl(wrap((**a).clone())),
        Term::Inr(a) => Term::inr(wrap((**a).clone())),
        Term::InlrBind(u, b1, b2) => {
            let (o1, o2) = (open(b1), open(b2));
            inlr(
                (**u).clone(),
                bind(&o1, wrap(o1.body.clone())),
                bind(&o2, wrap(o2.body.clone())),
            )
        }
        _ => unreachable!("commutation through a non-introduction"),
    }
}

fn top_commute(t: &Term) -> Term {
    let Term::TopElim(a, b) = t else { unreachable!() };
    push_through(b, &|u| Term::top_elim((**a).clone(), u))
}

fn and_commute(t: &Term) -> Term {
    let Term::AndElim(side, a, b) = t else { unreachable!() };
    let o = open(b);
    let wrap = |u: Term| and_elim(*side, (**a).clone(), bind(&o, u));
    match &o.body {
        // The first premise of the binder form sits under x; it only moves
        // outside when x does not occur in it.
        Term::InlrBind(u, b1, b2) => {
            let (o1, o2) = (open(b1), open(b2));
            let u = if u.occurs_free(&o.name) {
                wrap((**u).clone())
            } else {
                (**u).clone()
            };
            inlr(
                u,
                bind(&o1, wrap(o1.body.clone())),
                bind(&o2, wrap(o2.body.clone())),
            )
        }
        body => push_through(body, &wrap),
    }
}

fn and_on(t: &Term, side: Side, f: fn(&Term) -> bool) -> bool {
    matches!(t, Term::AndElim(s, _, b) if *s == side && f(&b.body))
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

fn case_branches(t: &Term, f: fn(&Term, &Term) -> bool) -> bool {
    matches!(t, Term::Case(_, b1, b2) if f(&b1.body, &b2.body))
}

fn case_inlr_bind(t: &Term) -> Term {
    let Term::Case(s, c1, c2) = t else { unreachable!() };
    let Term::InlrBind(u, b1, b2) = &**s else { unreachable!() };
    let (o1, o2) = (open(b1), open(b2));
    case(
        (**u).clone(),
        bind(&o1, c1.instantiate(&o1.body)),
        bind(&o2, c2.instantiate(&o2.body)),
    )
}

/// The parts of a `case` whose branches are both opened.
struct CaseView {
    t: Term,
    x1: Open,
    x2: Open,
}

fn view(t: &Term) -> CaseView {
    let Term::Case(s, b1, b2) = t else { unreachable!() };
    CaseView {
        t: (**s).clone(),
        x1: open(b1),
        x2: open(b2),
    }
}

/// An opened `inlr(t, y1.u1, y2.u2)` branch body.
struct InlrView {
    t: Term,
    y1: Open,
    y2: Open,
}

fn inlr_view(t: &Term) -> InlrView {
    let Term::InlrBind(s, b1, b2) = t else { unreachable!() };
    InlrView {
        t: (**s).clone(),
        y1: open(b1),
        y2: open(b2),
    }
}

fn inner(t: &Term) -> Term {
    match t {
        Term::Inl(a) | Term::Inr(a) => (**a).clone(),
        _ => unreachable!(),
    }
}

fn pair_of(a: &Open, b: &Open) -> Term {
    Term::pair(Term::Free(a.name.clone()), Term::Free(b.name.clone()))
}

/// `z.(z/<x,y>)u`.
fn projected(z: &Var, x: &Open, y: &Open, u: &Term) -> Binder {
    z.bind(pair_subst(&z.t(), &x.name, &y.name, u))
}

fn case_lam(t: &Term) -> Term {
    let c = view(t);
    let (Term::Lam(p, l1), Term::Lam(_, l2)) = (&c.x1.body, &c.x2.body) else { unreachable!() };
    let y = open(l1);
    let u1 = y.body.clone();
    let u2 = l2.open(&y.name);
    Term::Lam(
        p.clone(),
        bind(&y, case(c.t, bind(&c.x1, u1), bind(&c.x2, u2))),
    )
}

fn case_pair(t: &Term) -> Term {
    let c = view(t);
    let (Term::Pair(u1, v1), Term::Pair(u2, v2)) = (&c.x1.body, &c.x2.body) else { unreachable!() };
    Term::pair(
        case(c.t.clone(), bind(&c.x1, (**u1).clone()), bind(&c.x2, (**u2).clone())),
        case(c.t, bind(&c.x1, (**v1).clone()), bind(&c.x2, (**v2).clone())),
    )
}

fn case_same_side(t: &Term) -> Term {
    let c = view(t);
    let body = case(c.t, bind(&c.x1, inner(&c.x1.body)), bind(&c.x2, inner(&c.x2.body)));
    if matches!(c.x1.body, Term::Inl(_)) {
        Term::inl(body)
    } else {
        Term::inr(body)
    }
}

fn case_inl_inr(t: &Term) -> Term {
    let c = view(t);
    inlr(c.t, bind(&c.x1, inner(&c.x1.body)), bind(&c.x2, inner(&c.x2.body)))
}

fn case_inr_inl(t: &Term) -> Term {
    let c = view(t);
    let pi = pi37(&c.t, &c.x1, &c.x2);
    inlr(pi, bind(&c.x2, inner(&c.x2.body)), bind(&c.x1, inner(&c.x1.body)))
}

fn case_inl_inlr(t: &Term) -> Term {
    let c = view(t);
    let u1 = inner(&c.x1.body);
    let r = inlr_view(&c.x2.body);
    let pi = pi36(&c.t, &c.x1, &c.x2, &r);
    let (z1, z2, w2) = (Var::new("z1"), Var::new("z2"), Var::new("w2"));
    inlr(
        pi,
        z1.bind(case(z1.t(), bind(&c.x1, u1), projected(&w2, &c.x2, &r.y1, &r.y1.body))),
        projected(&z2, &c.x2, &r.y2, &r.y2.body),
    )
}

fn case_inr_inlr(t: &Term) -> Term {
    let c = view(t);
    let u2 = inner(&c.x1.body);
    let r = inlr_view(&c.x2.body);
    let pi = pi39(&c.t, &c.x1, &c.x2, &r);
    let (z1, z2, w2) = (Var::new("z1"), Var::new("z2"), Var::new("w2"));
    inlr(
        pi,
        projected(&z1, &c.x2, &r.y1, &r.y1.body),
        z2.bind(case(z2.t(), bind(&c.x1, u2), projected(&w2, &c.x2, &r.y2, &r.y2.body))),
    )
}

fn case_inlr_inl(t: &Term) -> Term {
    let c = view(t);
    let l = inlr_view(&c.x1.body);
    let u3 = inner(&c.x2.body);
    let pi = pi40(&c.t, &c.x1, &l, &c.x2);
    let (z1, z2, w1) = (Var::new("z1"), Var::new("z2"), Var::new("w1"));
    inlr(
        pi,
        z1.bind(case(z1.t(), projected(&w1, &c.x1, &l.y1, &l.y1.body), bind(&c.x2, u3))),
        projected(&z2, &c.x1, &l.y2, &l.y2.body),
    )
}

fn case_inlr_inr(t: &Term) -> Term {
    let c = view(t);
    let l = inlr_view(&c.x1.body);
    let u4 = inner(&c.x2.body);
    let pi = pi41(&c.t, &c.x1, &l, &c.x2);
    let (z1, z2, w1) = (Var::new("z1"), Var::new("z2"), Var::new("w1"));
    inlr(
        pi,
        projected(&z1, &c.x1, &l.y1, &l.y1.body),
        z2.bind(case(z2.t(), projected(&w1, &c.x1, &l.y2, &l.y2.body), bind(&c.x2, u4))),
    )
}

fn case_inlr_inlr(t: &Term) -> Term {
    let c = view(t);
    let l = inlr_view(&c.x1.body);
    let r = inlr_view(&c.x2.body);
    let pi = pi42(&c.t, &c.x1, &l, &c.x2, &r);
    let (z1, z2, w1, w2) = (Var::new("z1"), Var::new("z2"), Var::new("w1"), Var::new("w2"));
    inlr(
        pi,
        z1.bind(case(
            z1.t(),
            projected(&w1, &c.x1, &l.y1, &l.y1.body),
            projected(&w2, &c.x2, &r.y1, &r.y1.body),
        )),
        z2.bind(case(
            z2.t(),
            projected(&w1, &c.x1, &l.y2, &l.y2.body),
            projected(&w2, &c.x2, &r.y2, &r.y2.body),
        )),
    )
}

// The π witnesses. `x1`, `x2`, `y1`…`y4` are the opened binders of the redex;
// their names are reused as the binders of π.

fn v(o: &Open) -> Term {
    Term::Free(o.name.clone())
}

fn pi36(t: &Term, x1: &Open, x2: &Open, r: &InlrView) -> Term {
    case(
        t.clone(),
        bind(x1, Term::inl(Term::inl(v(x1)))),
        bind(
            x2,
            case(
                r.t.clone(),
                bind(&r.y1, Term::inl(Term::inr(pair_of(x2, &r.y1)))),
                bind(&r.y2, Term::inr(pair_of(x2, &r.y2))),
            ),
        ),
    )
}

fn pi37(t: &Term, x1: &Open, x2: &Open) -> Term {
    case(t.clone(), bind(x1, Term::inr(v(x1))), bind(x2, Term::inl(v(x2))))
}

fn pi39(t: &Term, x1: &Open, x2: &Open, r: &InlrView) -> Term {
    case(
        t.clone(),
        bind(x1, Term::inr(Term::inl(v(x1)))),
        bind(
            x2,
            case(
                r.t.clone(),
                bind(&r.y1, Term::inl(pair_of(x2, &r.y1))),
                bind(&r.y2, Term::inr(Term::inr(pair_of(x2, &r.y2)))),
            ),
        ),
    )
}

fn pi40(t: &Term, x1: &Open, l: &InlrView, x2: &Open) -> Term {
    case(
        t.clone(),
        bind(
            x1,
            case(
                l.t.clone(),
                bind(&l.y1, Term::inl(Term::inl(pair_of(x1, &l.y1)))),
                bind(&l.y2, Term::inr(pair_of(x1, &l.y2))),
            ),
        ),
        bind(x2, Term::inl(Term::inr(v(x2)))),
    )
}

fn pi41(t: &Term, x1: &Open, l: &InlrView, x2: &Open) -> Term {
    case(
        t.clone(),
        bind(
            x1,
            case(
                l.t.clone(),
                bind(&l.y1, Term::inl(pair_of(x1, &l.y1))),
                bind(&l.y2, Term::inr(Term::inl(pair_of(x1, &l.y2)))),
            ),
        ),
        bind(x2, Term::inr(Term::inr(v(x2)))),
    )
}

fn pi42(t: &Term, x1: &Open, l: &InlrView, x2: &Open, r: &InlrView) -> Term {
    case(
        t.clone(),
        bind(
            x1,
            case(
                l.t.clone(),
                bind(&l.y1, Term::inl(Term::inl(pair_of(x1, &l.y1)))),
                bind(&l.y2, Term::inr(Term::inl(pair_of(x1, &l.y2)))),
            ),
        ),
        bind(
            x2,
            case(
                r.t.clone(),
                bind(&r.y1, Term::inl(Term::inr(pair_of(x2, &r.y1)))),
                bind(&r.y2, Term::inr(Term::inr(pair_of(x2, &r.y2)))),
            ),
        ),
    )
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("rule cc:{0} has no π witness")]
pub struct NoPiTerm(pub u32);

/// The π witness of rule `rule` (36, 37, 39, 40, 41 or 42) for the
/// scrutinee `t`. `t1` may mention the free variable `x1` and `t2` the
/// variable `x2`; π binds them. Missing inner scrutinees default to the
/// variables `t1` and `t2`.
pub fn pi_term(rule: u32, t: &Term, t1: Option<&Term>, t2: Option<&Term>) -> Result<Term, NoPiTerm> {
    let named = |hint: &str| Open {
        hint: hint.to_string(),
        name: hint.to_string(),
        body: Term::Star,
    };
    let (x1, x2) = (named("x1"), named("x2"));
    let (y1, y2, y3, y4) = (named("y1"), named("y2"), named("y3"), named("y4"));
    let left = InlrView {
        t: t1.cloned().unwrap_or_else(|| Term::var("t1")),
        y1,
        y2,
    };
    let right = InlrView {
        t: t2.cloned().unwrap_or_else(|| Term::var("t2")),
        y1: y3,
        y2: y4,
    };
    Ok(match rule {
        36 => pi36(t, &x1, &x2, &right),
        37 => pi37(t, &x1, &x2),
        39 => pi39(t, &x1, &x2, &right),
        40 => pi40(t, &x1, &left, &x2),
        41 => pi41(t, &x1, &left, &x2),
        42 => pi42(t, &x1, &left, &x2, &right),
        other => return Err(NoPiTerm(other)),
    })
}

fn branch_heads(b1: &Term, b2: &Term, h1: u8, h2: u8) -> bool {
    is_intro_head(b1, h1) && is_intro_head(b2, h2)
}

macro_rules! rule {
    ($n:expr, $name:expr, $m:expr, $c:expr) => {
        Rule {
            id: id($n),
            name: $name,
            matches: $m,
            contract: $c,
        }
    };
}

pub static RULES: [Rule; 42] = [
    rule!(1, "top_elim(star, t)", |t| matches!(t, Term::TopElim(a, _) if **a == Term::Star), |t| match t {
        Term::TopElim(_, b) => (**b).clone(),
        _ => unreachable!(),
    }),
    rule!(2, "beta", is_beta, beta),
    rule!(3, "and1(pair)", |t| matches!(t, Term::AndElim(Side::First, p, _) if matches!(**p, Term::Pair(..))), and_pair),
    rule!(4, "and2(pair)", |t| matches!(t, Term::AndElim(Side::Second, p, _) if matches!(**p, Term::Pair(..))), and_pair),
    rule!(5, "case(inl)", |t| matches!(t, Term::Case(s, ..) if matches!(**s, Term::Inl(_))), case_inl),
    rule!(6, "case(inr)", |t| matches!(t, Term::Case(s, ..) if matches!(**s, Term::Inr(_))), case_inr),
    rule!(7, "case(inlr)", |t| matches!(t, Term::Case(s, ..) if matches!(**s, Term::InlrBind(..))), case_inlr_bind),
    rule!(8, "bot_elim[Top]", |t| bot_is(t, |p| *p == Prop::Top), |_| Term::Star),
    rule!(9, "bot_elim[=>]", |t| bot_is(t, |p| matches!(p, Prop::Impl(..))), |t| match t {
        Term::BotElim(Prop::Impl(a, b), s) => {
            Term::Lam(Some((**a).clone()), Binder::new("x", bot(b, s)))
        }
        _ => unreachable!(),
    }),
    rule!(10, "bot_elim[/\\]", |t| bot_is(t, |p| matches!(p, Prop::Conj(..))), |t| match t {
        Term::BotElim(Prop::Conj(a, b), s) => Term::pair(bot(a, s), bot(b, s)),
        _ => unreachable!(),
    }),
    rule!(11, "bot_elim[\\/] to inl", |t| bot_is(t, |p| matches!(p, Prop::Disj(..))), |t| match t {
        Term::BotElim(Prop::Disj(a, _), s) => Term::inl(bot(a, s)),
        _ => unreachable!(),
    }),
    rule!(12, "bot_elim[\\/] to inr", |t| bot_is(t, |p| matches!(p, Prop::Disj(..))), |t| match t {
        Term::BotElim(Prop::Disj(_, b), s) => Term::inr(bot(b, s)),
        _ => unreachable!(),
    }),
    rule!(13, "top_elim(t, star)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 0)), |_| Term::Star),
    rule!(14, "top_elim(t, lam)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 1)), top_commute),
    rule!(15, "top_elim(t, pair)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 2)), top_commute),
    rule!(16, "top_elim(t, inl)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 3)), top_commute),
    rule!(17, "top_elim(t, inr)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 4)), top_commute),
    rule!(18, "top_elim(t, inlr)", |t| matches!(t, Term::TopElim(_, b) if is_intro_head(b, 5)), top_commute),
    rule!(19, "and1(t, x. star)", |t| and_on(t, Side::First, |b| is_intro_head(b, 0)), |_| Term::Star),
    rule!(20, "and1(t, x. lam)", |t| and_on(t, Side::First, |b| is_intro_head(b, 1)), and_commute),
    rule!(21, "and1(t, x. pair)", |t| and_on(t, Side::First, |b| is_intro_head(b, 2)), and_commute),
    rule!(22, "and1(t, x. inl)", |t| and_on(t, Side::First, |b| is_intro_head(b, 3)), and_commute),
    rule!(23, "and1(t, x. inr)", |t| and_on(t, Side::First, |b| is_intro_head(b, 4)), and_commute),
    rule!(24, "and1(t, x. inlr)", |t| and_on(t, Side::First, |b| is_intro_head(b, 5)), and_commute),
    rule!(25, "and2(t, x. star)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 0)), |_| Term::Star),
    rule!(26, "and2(t, x. lam)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 1)), and_commute),
    rule!(27, "and2(t, x. pair)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 2)), and_commute),
    rule!(28, "and2(t, x. inl)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 3)), and_commute),
    rule!(29, "and2(t, x. inr)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 4)), and_commute),
    rule!(30, "and2(t, x. inlr)", |t| and_on(t, Side::Second, |b| is_intro_head(b, 5)), and_commute),
    rule!(31, "case(t, star, star)", |t| case_branches(t, |a, b| branch_heads(a, b, 0, 0)), |_| Term::Star),
    rule!(32, "case(t, lam, lam)", |t| case_branches(t, |a, b| branch_heads(a, b, 1, 1)), case_lam),
    rule!(33, "case(t, pair, pair)", |t| case_branches(t, |a, b| branch_heads(a, b, 2, 2)), case_pair),
    rule!(34, "case(t, inl, inl)", |t| case_branches(t, |a, b| branch_heads(a, b, 3, 3)), case_same_side),
    rule!(35, "case(t, inl, inr)", |t| case_branches(t, |a, b| branch_heads(a, b, 3, 4)), case_inl_inr),
    rule!(36, "case(t, inl, inlr)", |t| case_branches(t, |a, b| branch_heads(a, b, 3, 5)), case_inl_inlr),
    rule!(37, "case(t, inr, inl)", |t| case_branches(t, |a, b| branch_heads(a, b, 4, 3)), case_inr_inl),
    rule!(38, "case(t, inr, inr)", |t| case_branches(t, |a, b| branch_heads(a, b, 4, 4)), case_same_side),
    rule!(39, "case(t, inr, inlr)", |t| case_branches(t, |a, b| branch_heads(a, b, 4, 5)), case_inr_inlr),
    rule!(40, "case(t, inlr, inl)", |t| case_branches(t, |a, b| branch_heads(a, b, 5, 3)), case_inlr_inl),
    rule!(41, "case(t, inlr, inr)", |t| case_branches(t, |a, b| branch_heads(a, b, 5, 4)), case_inlr_inr),
    rule!(42, "case(t, inlr, inlr)", |t| case_branches(t, |a, b| branch_heads(a, b, 5, 5)), case_inlr_inlr),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Policy {
    First,
    Enumerate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub rule: RuleId,
    pub pos: Vec<usize>,
}

/// The reduction graph explored breadth-first from a start term.
#[derive(Clone, Debug, PartialEq)]
pub struct ReductionGraph {
    pub nodes: Vec<Term>,
    pub edges: Vec<Edge>,
    /// Indices of nodes with no outgoing step.
    pub normal_forms: Vec<usize>,
    /// True when the node budget stopped the search before it was complete.
    pub truncated: bool,
}

impl ReductionGraph {
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph reductions {\n");
        let nf: BTreeSet<usize> = self.normal_forms.iter().copied().collect();
        for (i, t) in self.nodes.iter().enumerate() {
            let label = print_term(t).replace('\\', "\\\\").replace('"', "\\\"");
            let shape = if nf.contains(&i) { ", shape=box" } else { "" };
            let _ = writeln!(out, "  n{i} [label=\"{label}\"{shape}];");
        }
        for e in &self.edges {
            let pos = crate::syntax::path_to_string(&e.pos);
            let _ = writeln!(out, "  n{} -> n{} [label=\"{} @ {}\"];", e.from, e.to, e.rule, pos);
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first exploration of every reduct, deduplicated up to α.
pub fn explore(t: &Term, rules: Ruleset, node_budget: usize) -> ReductionGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut nodes = vec![t.clone()];
    index.insert(canonical_string(t), 0);
    let mut edges = Vec::new();
    let mut normal_forms = Vec::new();
    let mut truncated = false;
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let cur = nodes[i].clone();
        let redexes = find_redexes(&cur, rules);
        if redexes.is_empty() {
            normal_forms.push(i);
            continue;
        }
        for (pos, rule) in redexes {
            let Ok(a) = step_at(&cur, &pos, rule, None, &mut rng) else {
                continue;
            };
            let key = canonical_string(&a.term);
            let to = match index.get(&key) {
                Some(&j) => j,
                None if nodes.len() < node_budget => {
                    nodes.push(a.term);
                    index.insert(key, nodes.len() - 1);
                    queue.push_back(nodes.len() - 1);
                    nodes.len() - 1
                }
                None => {
                    truncated = true;
                    continue;
                }
            };
            edges.push(Edge {
                from: i,
                to,
                rule,
                pos,
            });
        }
    }
    normal_forms.sort_unstable();
    ReductionGraph {
        nodes,
        edges,
        normal_forms,
        truncated,
    }
}

pub enum CcResult {
    Trace(Trace),
    Graph(ReductionGraph),
}

pub const DEFAULT_NODE_BUDGET: usize = 2000;

/// Normalizes under the cc rules. `First` follows the leftmost-outermost
/// redex and the first listed alternative; `Enumerate` explores the graph.
pub fn normalize_cc(t: &Term, fuel: u64, policy: Policy) -> CcResult {
    match policy {
        Policy::First => CcResult::Trace(normalize(
            t,
            Ruleset::Cc,
            fuel,
            &mut ChaCha8Rng::seed_from_u64(0),
        )),
        Policy::Enumerate => {
            let budget = usize::try_from(fuel).unwrap_or(usize::MAX).min(DEFAULT_NODE_BUDGET);
            CcResult::Graph(explore(t, Ruleset::Cc, budget))
        }
    }
}

/// A sequence of explicitly chosen steps.
#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub start: Term,
    pub steps: Vec<(Step, Term)>,
}

impl Route {
    fn run(start: Term, plan: &[(u32, Vec<usize>)]) -> Route {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cur = start.clone();
        let mut steps = Vec::new();
        for (n, pos) in plan {
            let a = step_at(&cur, pos, id(*n), None, &mut rng).expect("demo step applies");
            cur = a.term;
            steps.push((
                Step {
                    rule: a.rule,
                    pos: pos.clone(),
                    weight: a.weight,
                },
                cur.clone(),
            ));
        }
        Route { start, steps }
    }

    pub fn end(&self) -> &Term {
        self.steps.last().map(|(_, t)| t).unwrap_or(&self.start)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Demo {
    /// Commute the ∧-elimination out of the applied function, then β.
    pub applied: Route,
    /// Commute the unapplied function body.
    pub unapplied: Route,
    /// Apply the commuted function, then β.
    pub reapplied: Route,
    /// Full normal forms of the applied and the re-applied terms.
    pub applied_nf: Term,
    pub reapplied_nf: Term,
}

impl Demo {
    pub fn converges(&self) -> bool {
        alpha_eq(self.applied.end(), self.reapplied.end()) && alpha_eq(&self.applied_nf, &self.reapplied_nf)
    }
}

pub fn demo_context() -> crate::typing::TypingContext {
    crate::typing::TypingContext::new()
        .with("x", Prop::conj(Prop::atom("A"), Prop::atom("B")))
        .with("u", Prop::atom("C"))
}

/// `and1(x, y. lam z:C. pair(z, y))`.
pub fn demo_function() -> Term {
    let body = Term::lam("z", Some(Prop::atom("C")), Term::pair(Term::var("z"), Term::var("y")));
    Term::and_elim(Side::First, Term::var("x"), "y", body)
}

pub fn demo_optimization() -> Demo {
    let f = demo_function();
    let applied = Route::run(Term::app(f.clone(), Term::var("u")), &[(20, vec![0]), (2, vec![])]);
    let unapplied = Route::run(f, &[(20, vec![])]);
    let reapplied = Route::run(Term::app(unapplied.end().clone(), Term::var("u")), &[(2, vec![])]);
    let nf = |t: &Term| {
        normalize(t, Ruleset::Cc, crate::rewrite::CC_DEFAULT_FUEL, &mut ChaCha8Rng::seed_from_u64(0))
            .outcome
            .term()
            .clone()
    };
    Demo {
        applied_nf: nf(&applied.start),
        reapplied_nf: nf(&reapplied.start),
        applied,
        unapplied,
        reapplied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::{normalize_det, Outcome};
    use crate::syntax::{parse_prop, parse_term};
    use crate::typing::{check, infer_cc, TypingContext};

    fn cc(s: &str) -> Term {
        parse_term(s, Calculus::Cc).unwrap()
    }

    fn one_step(t: &Term) -> Term {
        let (pos, rule) = crate::rewrite::first_redex(t, Ruleset::Cc).unwrap();
        step_at(t, &pos, rule, None, &mut ChaCha8Rng::seed_from_u64(0)).unwrap().term
    }

    #[test]
    fn numbering() {
        for (i, r) in RULES.iter().enumerate() {
            assert_eq!(r.id.number as usize, i + 1);
        }
    }

    #[test]
    fn commutations() {
        assert_eq!(one_step(&cc("and1(t, x. lam y:C. u)")), cc("lam y:C. and1(t, x. u)"));
        assert_eq!(one_step(&cc("bot_elim[Top](t)")), Term::Star);
        assert_eq!(
            one_step(&cc("case(inlr(t, x1. u1, x2. u2), y1. pair(y1, v1), y2. v2)")),
            cc("case(t, x1. pair(u1, v1), x2. v2)")
        );
        assert_eq!(one_step(&cc("bot_elim[A \\/ B](t)")), cc("inl(bot_elim[A](t))"));
    }

    #[test]
    fn pi_witness_inr_inl() {
        let pi = pi_term(37, &Term::var("t"), None, None).unwrap();
        assert_eq!(pi, cc("case(t, x1. inr(x1), x2. inl(x2))"));
        assert!(pi_term(35, &Term::var("t"), None, None).is_err());
    }

    #[test]
    fn pi_witness_types() {
        let ctx = TypingContext::parse("t : A1 \\/ A2, t1 : B1 \\/ B2, t2 : B3 \\/ B4").unwrap();
        let expect = [
            (36, "(A1 \\/ A2 /\\ B3) \\/ A2 /\\ B4"),
            (37, "A2 \\/ A1"),
            (39, "A2 /\\ B3 \\/ A1 \\/ A2 /\\ B4"),
            (40, "(A1 /\\ B1 \\/ A2) \\/ A1 /\\ B2"),
            (41, "A1 /\\ B1 \\/ A1 /\\ B2 \\/ A2"),
            (42, "(A1 /\\ B1 \\/ A2 /\\ B3) \\/ A1 /\\ B2 \\/ A2 /\\ B4"),
        ];
        for (n, p) in expect {
            let pi = pi_term(n, &Term::var("t"), None, None).unwrap();
            assert_eq!(infer_cc(&ctx, &pi).unwrap(), parse_prop(p).unwrap(), "π{n}");
        }
    }

    #[test]
    fn and_inlr_keeps_scope() {
        let ctx = TypingContext::parse("w : A /\\ B, s : (A => C \\/ D)").unwrap();
        let t = cc("and1(w, x. inlr(s x, y1. y1, y2. y2))");
        let ty = infer_cc(&ctx, &t).unwrap();
        let r = one_step(&t);
        assert!(r.is_locally_closed());
        assert!(check(Calculus::Cc, &ctx, &r, &ty).is_ok());
    }

    #[test]
    fn demo_routes_agree() {
        let d = demo_optimization();
        assert_eq!(d.applied.end(), &cc("and1(x, y. pair(u, y))"));
        assert_eq!(d.unapplied.end(), &cc("lam z:C. and1(x, y. pair(z, y))"));
        assert!(d.converges());
        let ctx = demo_context();
        let ty = infer_cc(&ctx, &d.applied.start).unwrap();
        for (_, t) in d.applied.steps.iter().chain(&d.reapplied.steps) {
            assert_eq!(infer_cc(&ctx, t).unwrap(), ty);
        }
    }

    #[test]
    fn enumerate_bot_choices() {
        let g = explore(&cc("bot_elim[A \\/ B](t)"), Ruleset::Cc, 100);
        assert_eq!(g.normal_forms.len(), 2);
        assert!(!g.truncated);
        assert!(g.to_dot().starts_with("digraph"));
        let first = normalize_det(&cc("bot_elim[A \\/ B](t)"), Ruleset::Cc, 10);
        assert_eq!(first.outcome, Outcome::NormalForm(cc("inl(bot_elim[A](t))")));
    }
}
