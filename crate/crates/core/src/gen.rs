//! Type-directed random generation of well-typed terms.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::syntax::{Binder, Calculus, Prop, Side, Term};
use crate::typing::TypingContext;

type Ctx = Vec<(String, Prop)>;

/// A generated term with the context and proposition it was built for.
#[derive(Clone, Debug)]
pub struct Sample {
    pub ctx: TypingContext,
    pub term: Term,
    pub prop: Prop,
}

pub struct Gen {
    rng: ChaCha8Rng,
    budget: usize,
    names: usize,
    calculus: Calculus,
    nondeterministic: bool,
}

const SCALARS: [(f64, f64); 7] = [
    (1.0, 0.0),
    (0.5, 0.0),
    (2.0, 0.0),
    (-1.0, 0.0),
    (0.0, 1.0),
    (0.0, 0.0),
    (0.25, -0.5),
];

fn to_ctx(ctx: &Ctx) -> TypingContext {
    ctx.iter()
        .fold(TypingContext::new(), |c, (x, p)| c.with(x, p.clone()))
}

impl Gen {
    pub fn new(calculus: Calculus, seed: u64) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            budget: 0,
            names: 0,
            calculus,
            nondeterministic: false,
        }
    }

    /// Allows `case_nd` in quantum terms.
    pub fn with_nondeterminism(mut self, on: bool) -> Gen {
        self.nondeterministic = on;
        self
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn fresh(&mut self, hint: &str) -> String {
        self.names += 1;
        format!("{hint}{}", self.names)
    }

    fn coin(&mut self, p: f64) -> bool {
        self.rng.random_bool(p)
    }

    pub fn scalar(&mut self) -> Complex64 {
        let (re, im) = *SCALARS.choose(&mut self.rng).expect("nonempty");
        Complex64::new(re, im)
    }

    /// A random proposition of the calculus with at most `depth` connectives
    /// on any branch.
    pub fn prop(&mut self, depth: usize) -> Prop {
        if depth == 0 || self.coin(0.3) {
            return match self.calculus {
                Calculus::Quantum => Prop::One,
                Calculus::Iplus => Prop::Top,
                Calculus::Cc => ["Top", "P", "Q"]
                    .choose(&mut self.rng)
                    .map(|s| if *s == "Top" { Prop::Top } else { Prop::atom(*s) })
                    .expect("nonempty"),
            };
        }
        let (a, b) = (self.prop(depth - 1), self.prop(depth - 1));
        let k = self.rng.random_range(0..3);
        match (self.calculus, k) {
            (Calculus::Quantum, 0) => Prop::lollipop(a, b),
            (Calculus::Quantum, _) => Prop::oplus(a, b),
            (_, 0) => Prop::implies(a, b),
            (_, 1) => Prop::conj(a, b),
            _ => Prop::disj(a, b),
        }
    }

    fn binder(&mut self, hint: &str, body: impl FnOnce(&mut Gen, &str) -> Term) -> Binder {
        let x = self.fresh(hint);
        let b = body(self, &x);
        Binder::close(hint, &x, b)
    }

    // Intuitionistic calculi.

    fn var_of(&mut self, ctx: &Ctx, a: &Prop) -> Option<Term> {
        let hits: Vec<&String> = ctx.iter().filter(|(_, p)| p == a).map(|(x, _)| x).collect();
        hits.choose(&mut self.rng).map(|x| Term::var(x))
    }

    fn minimal(&mut self, ctx: &Ctx, a: &Prop) -> Term {
        if let Some(v) = self.var_of(ctx, a) {
            return v;
        }
        match a {
            Prop::Top => Term::Star,
            Prop::Impl(b, c) => {
                let (b, c) = ((**b).clone(), (**c).clone());
                let body = self.binder("x", |g, x| {
                    let mut inner = ctx.clone();
                    inner.push((x.to_string(), b.clone()));
                    g.minimal(&inner, &c)
                });
                Term::Lam(Some(b), body)
            }
            Prop::Conj(b, c) => Term::pair(self.minimal(ctx, b), self.minimal(ctx, c)),
            Prop::Disj(b, _) => Term::inl(self.minimal(ctx, b)),
            _ => {
                let bot = self.var_of(ctx, &Prop::Bot).expect("a Bot hypothesis");
                Term::bot_elim(a.clone(), bot)
            }
        }
    }

    fn term(&mut self, ctx: &Ctx, a: &Prop) -> Term {
        if self.budget == 0 {
            return self.minimal(ctx, a);
        }
        self.budget -= 1;
        let roll = self.rng.random_range(0..10);
        if roll < 2 {
            if let Some(v) = self.var_of(ctx, a) {
                return v;
            }
        }
        match roll {
            0..=4 => self.intro(ctx, a),
            5 if self.calculus == Calculus::Iplus => {
                Term::sum(self.term(ctx, a), self.term(ctx, a))
            }
            _ => self.elim(ctx, a),
        }
    }

    fn extended(ctx: &Ctx, x: &str, p: &Prop) -> Ctx {
        let mut c = ctx.clone();
        c.push((x.to_string(), p.clone()));
        c
    }

    fn intro(&mut self, ctx: &Ctx, a: &Prop) -> Term {
        match a {
            Prop::Top => Term::Star,
            Prop::Impl(b, c) => {
                let (b, c) = ((**b).clone(), (**c).clone());
                let body = self.binder("x", |g, x| g.term(&Self::extended(ctx, x, &b), &c));
                Term::Lam(Some(b), body)
            }
            Prop::Conj(b, c) => Term::pair(self.term(ctx, b), self.term(ctx, c)),
            Prop::Disj(b, c) => match self.rng.random_range(0..3) {
                0 => Term::inl(self.term(ctx, b)),
                1 => Term::inr(self.term(ctx, c)),
                _ if self.calculus == Calculus::Cc => self.inlr_bind(ctx, b, c),
                _ => Term::inlr(self.term(ctx, b), self.term(ctx, c)),
            },
            _ => self.minimal(ctx, a),
        }
    }

    fn inlr_bind(&mut self, ctx: &Ctx, b: &Prop, c: &Prop) -> Term {
        let d1 = self.prop(1);
        let d2 = self.prop(1);
        let s = self.term(ctx, &Prop::disj(d1.clone(), d2.clone()));
        let l = self.binder("y", |g, y| g.term(&Self::extended(ctx, y, &d1), b));
        let r = self.binder("y", |g, y| g.term(&Self::extended(ctx, y, &d2), c));
        Term::InlrBind(Box::new(s), l, r)
    }

    fn elim(&mut self, ctx: &Ctx, a: &Prop) -> Term {
        let cc = self.calculus == Calculus::Cc;
        match self.rng.random_range(0..if cc { 5 } else { 4 }) {
            0 => {
                let c = self.prop(1);
                let f = self.term(ctx, &Prop::implies(c.clone(), a.clone()));
                Term::app(f, self.term(ctx, &c))
            }
            1 => {
                let (b, c) = (self.prop(1), self.prop(1));
                let side = if self.coin(0.5) { Side::First } else { Side::Second };
                let s = self.term(ctx, &Prop::conj(b.clone(), c.clone()));
                let kept = if side == Side::First { b } else { c };
                let body = self.binder("x", |g, x| g.term(&Self::extended(ctx, x, &kept), a));
                Term::AndElim(side, Box::new(s), body)
            }
            2 => {
                let (b, c) = (self.prop(1), self.prop(1));
                let s = self.term(ctx, &Prop::disj(b.clone(), c.clone()));
                let l = self.binder("x", |g, x| g.term(&Self::extended(ctx, x, &b), a));
                let r = self.binder("y", |g, y| g.term(&Self::extended(ctx, y, &c), a));
                Term::Case(Box::new(s), l, r)
            }
            3 => Term::top_elim(self.term(ctx, &Prop::Top), self.term(ctx, a)),
            _ => Term::bot_elim(a.clone(), self.minimal(ctx, &Prop::Bot)),
        }
    }

    /// A well-typed intuitionistic term of `a` in `ctx` using about `budget`
    /// random choices.
    pub fn term_of(&mut self, ctx: &[(String, Prop)], a: &Prop, budget: usize) -> Term {
        self.budget = budget;
        self.term(&ctx.to_vec(), a)
    }

    // The linear calculus. Every hypothesis of `delta` is used exactly once.

    fn lin(&mut self, delta: &Ctx, a: &Prop) -> Term {
        if let [(x, p)] = delta.as_slice() {
            if p == a && (self.budget == 0 || self.coin(0.4)) {
                return Term::var(x);
            }
        }
        if self.budget == 0 {
            return self.lin_minimal(delta, a);
        }
        self.budget -= 1;
        match self.rng.random_range(0..12) {
            0..=3 => self.lin_intro(delta, a),
            4 => Term::sum(self.lin(delta, a), self.lin(delta, a)),
            5 => {
                let s = self.scalar();
                Term::prod(s, self.lin(delta, a))
            }
            6 | 7 => {
                let (d1, d2) = self.split(delta);
                let c = self.prop(1);
                let f = self.lin(&d1, &Prop::lollipop(c.clone(), a.clone()));
                Term::app(f, self.lin(&d2, &c))
            }
            8 | 9 => {
                let (d1, d2) = self.split(delta);
                let (b, c) = (self.prop(1), self.prop(1));
                let s = self.lin(&d1, &Prop::oplus(b.clone(), c.clone()));
                self.lin_case(s, &b, &c, &d2, a)
            }
            10 => {
                let (d1, d2) = self.split(delta);
                Term::one_elim(self.lin(&d1, &Prop::One), self.lin(&d2, a))
            }
            _ if !delta.is_empty() => self.consume_some(delta, a),
            _ => self.lin_intro(delta, a),
        }
    }

    fn lin_case(&mut self, s: Term, b: &Prop, c: &Prop, rest: &Ctx, a: &Prop) -> Term {
        let l = self.binder("x", |g, x| g.lin(&Self::extended(rest, x, b), a));
        let r = self.binder("y", |g, y| g.lin(&Self::extended(rest, y, c), a));
        if self.nondeterministic && self.coin(0.5) {
            Term::CaseNd(Box::new(s), l, r)
        } else {
            Term::Case(Box::new(s), l, r)
        }
    }

    fn split(&mut self, delta: &Ctx) -> (Ctx, Ctx) {
        let mut l = Vec::new();
        let mut r = Vec::new();
        for h in delta {
            if self.coin(0.5) {
                l.push(h.clone());
            } else {
                r.push(h.clone());
            }
        }
        (l, r)
    }

    fn lin_intro(&mut self, delta: &Ctx, a: &Prop) -> Term {
        match a {
            Prop::Lollipop(b, c) => {
                let (b, c) = ((**b).clone(), (**c).clone());
                let body = self.binder("x", |g, x| g.lin(&Self::extended(delta, x, &b), &c));
                Term::Lam(Some(b), body)
            }
            Prop::OPlus(b, c) => match self.rng.random_range(0..3) {
                0 => Term::inl(self.lin(delta, b)),
                1 => Term::inr(self.lin(delta, c)),
                _ => Term::inlr(self.lin(delta, b), self.lin(delta, c)),
            },
            _ if delta.is_empty() => Term::ScalarStar(self.scalar()),
            _ => self.consume_some(delta, a),
        }
    }

    fn lin_minimal(&mut self, delta: &Ctx, a: &Prop) -> Term {
        match (delta.is_empty(), a) {
            (_, Prop::Lollipop(..)) => self.lin_intro(delta, a),
            (true, Prop::OPlus(b, _)) => Term::inl(self.lin_minimal(delta, b)),
            (true, _) => Term::ScalarStar(self.scalar()),
            (false, _) => self.consume_some(delta, a),
        }
    }

    fn consume_some(&mut self, delta: &Ctx, a: &Prop) -> Term {
        let i = self.rng.random_range(0..delta.len());
        let mut rest = delta.clone();
        let (x, p) = rest.remove(i);
        self.consume(Term::var(&x), &p, &rest, a)
    }

    /// Eliminates `s : sty` down to a term of `a` that also uses `rest`.
    fn consume(&mut self, s: Term, sty: &Prop, rest: &Ctx, a: &Prop) -> Term {
        if sty == a && rest.is_empty() {
            return s;
        }
        match sty {
            Prop::Lollipop(b, c) => {
                let arg = self.lin(&Vec::new(), b);
                self.consume(Term::app(s, arg), c, rest, a)
            }
            Prop::OPlus(b, c) => self.lin_case(s, b, c, rest, a),
            _ => Term::one_elim(s, self.lin(rest, a)),
        }
    }

    /// A closed linear term of `a` using about `budget` random choices.
    pub fn linear_of(&mut self, a: &Prop, budget: usize) -> Term {
        self.budget = budget;
        self.lin(&Vec::new(), a)
    }

    /// A context of hypotheses for open cc terms; it always holds a `Bot`
    /// hypothesis so that every proposition is inhabited.
    pub fn cc_context(&mut self) -> Ctx {
        let mut ctx = vec![("b".to_string(), Prop::Bot)];
        for i in 0..self.rng.random_range(1..4) {
            let p = self.prop(2);
            ctx.push((format!("h{i}"), p));
        }
        ctx
    }

    /// A random well-typed term of at most `max_size` nodes for the calculus.
    /// Iplus and quantum terms are closed; cc terms live in a random context.
    pub fn sample(&mut self, max_size: usize) -> Sample {
        loop {
            let prop = self.prop(2);
            let budget = self.rng.random_range(2..14);
            let (ctx, term) = match self.calculus {
                Calculus::Quantum => (Vec::new(), self.linear_of(&prop, budget)),
                Calculus::Iplus => (Vec::new(), self.term_of(&[], &prop, budget)),
                Calculus::Cc => {
                    let ctx = self.cc_context();
                    let t = self.term_of(&ctx, &prop, budget);
                    (ctx, t)
                }
            };
            if term.size() <= max_size {
                return Sample {
                    ctx: to_ctx(&ctx),
                    term,
                    prop,
                };
            }
        }
    }
}

/// An instance of the left-hand side of cc rule `rule` with random
/// subterms, in a random context.
pub fn cc_rule_instance(g: &mut Gen, rule: u32) -> Option<Sample> {
    if !(1..=42).contains(&rule) {
        return None;
    }
    let ctx = g.cc_context();
    let budget = 3;
    let sub = |g: &mut Gen, ctx: &Ctx, p: &Prop| g.term_of(ctx, p, budget);
    let bind = |g: &mut Gen, ctx: &Ctx, hint: &str, p: &Prop, body: &mut dyn FnMut(&mut Gen, &Ctx) -> Term| {
        let x = g.fresh(hint);
        let inner = Gen::extended(ctx, &x, p);
        let b = body(g, &inner);
        Binder::close(hint, &x, b)
    };
    // An introduction with head `h` (0 star, 1 lam, 2 pair, 3 inl, 4 inr,
    // 5 binder inlr) at a proposition `a` whose shape fits `h`.
    let intro = |g: &mut Gen, ctx: &Ctx, h: u8, a: &Prop| -> Term {
        match (h, a) {
            (0, _) => Term::Star,
            (1, Prop::Impl(b, c)) => {
                let c = (**c).clone();
                Term::Lam(Some((**b).clone()), bind(g, ctx, "z", b, &mut |g, inner| g.term_of(inner, &c, budget)))
            }
            (2, Prop::Conj(b, c)) => Term::pair(g.term_of(ctx, b, budget), g.term_of(ctx, c, budget)),
            (3, Prop::Disj(b, _)) => Term::inl(g.term_of(ctx, b, budget)),
            (4, Prop::Disj(_, c)) => Term::inr(g.term_of(ctx, c, budget)),
            (_, Prop::Disj(b, c)) => {
                g.budget = budget;
                g.inlr_bind(ctx, b, c)
            }
            _ => unreachable!("head and proposition agree"),
        }
    };
    let shaped = |g: &mut Gen, h: u8| -> Prop {
        let (b, c) = (g.prop(1), g.prop(1));
        match h {
            0 => Prop::Top,
            1 => Prop::implies(b, c),
            2 => Prop::conj(b, c),
            _ => Prop::disj(b, c),
        }
    };
    let term = match rule {
        1 => {
            let a = g.prop(2);
            Term::top_elim(Term::Star, sub(g, &ctx, &a))
        }
        2 => {
            let (b, a) = (g.prop(2), g.prop(2));
            let lam = Term::Lam(Some(b.clone()), bind(g, &ctx, "x", &b, &mut |g, inner| g.term_of(inner, &a, budget)));
            Term::app(lam, sub(g, &ctx, &b))
        }
        3 | 4 => {
            let (b, c, a) = (g.prop(1), g.prop(1), g.prop(2));
            let side = if rule == 3 { Side::First } else { Side::Second };
            let kept = if rule == 3 { b.clone() } else { c.clone() };
            let p = Term::pair(sub(g, &ctx, &b), sub(g, &ctx, &c));
            Term::AndElim(side, Box::new(p), bind(g, &ctx, "x", &kept, &mut |g, inner| g.term_of(inner, &a, budget)))
        }
        5..=7 => {
            let (b, c, a) = (g.prop(1), g.prop(1), g.prop(2));
            let s = match rule {
                5 => Term::inl(sub(g, &ctx, &b)),
                6 => Term::inr(sub(g, &ctx, &c)),
                _ => {
                    g.budget = budget;
                    g.inlr_bind(&ctx, &b, &c)
                }
            };
            let l = bind(g, &ctx, "x", &b, &mut |g, inner| g.term_of(inner, &a, budget));
            let r = bind(g, &ctx, "y", &c, &mut |g, inner| g.term_of(inner, &a, budget));
            Term::Case(Box::new(s), l, r)
        }
        8..=12 => {
            let h = match rule {
                8 => 0,
                9 => 1,
                10 => 2,
                _ => 3,
            };
            let p = shaped(g, h);
            let bot = sub(g, &ctx, &Prop::Bot);
            Term::bot_elim(p, bot)
        }
        13..=18 => {
            let h = (rule - 13) as u8;
            let a = shaped(g, h);
            let s = sub(g, &ctx, &Prop::Top);
            Term::top_elim(s, intro(g, &ctx, h, &a))
        }
        19..=30 => {
            let side = if rule <= 24 { Side::First } else { Side::Second };
            let h = ((rule - 19) % 6) as u8;
            let (b, c) = (g.prop(1), g.prop(1));
            let a = shaped(g, h);
            let kept = if side == Side::First { b.clone() } else { c.clone() };
            let s = sub(g, &ctx, &Prop::conj(b, c));
            Term::AndElim(side, Box::new(s), bind(g, &ctx, "x", &kept, &mut |g, inner| intro(g, inner, h, &a)))
        }
        _ => {
            let (h1, h2) = match rule {
                31 => (0, 0),
                32 => (1, 1),
                33 => (2, 2),
                n => {
                    let k = (n - 34) as u8;
                    (3 + k / 3, 3 + k % 3)
                }
            };
            let a = shaped(g, h1);
            let (b, c) = (g.prop(1), g.prop(1));
            let s = sub(g, &ctx, &Prop::disj(b.clone(), c.clone()));
            let l = bind(g, &ctx, "x", &b, &mut |g, inner| intro(g, inner, h1, &a));
            let r = bind(g, &ctx, "y", &c, &mut |g, inner| intro(g, inner, h2, &a));
            Term::Case(Box::new(s), l, r)
        }
    };
    let tctx = to_ctx(&ctx);
    let prop = crate::typing::infer_cc(&tctx, &term).ok()?;
    Some(Sample {
        ctx: tctx,
        term,
        prop,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::{check, infer};

    #[test]
    fn samples_are_well_typed() {
        for calculus in [Calculus::Iplus, Calculus::Quantum, Calculus::Cc] {
            let mut g = Gen::new(calculus, 7).with_nondeterminism(true);
            for _ in 0..200 {
                let s = g.sample(30);
                assert!(s.term.size() <= 30);
                assert!(
                    check(calculus, &s.ctx, &s.term, &s.prop).is_ok(),
                    "{calculus}: {} : {}",
                    crate::syntax::print_term(&s.term),
                    s.prop
                );
                assert!(infer(calculus, &s.ctx, &s.term).is_ok());
            }
        }
    }

    #[test]
    fn every_cc_rule_has_instances() {
        let mut g = Gen::new(Calculus::Cc, 3);
        for rule in 1..=42 {
            let s = cc_rule_instance(&mut g, rule).expect("instance typechecks");
            let r = &crate::cc::RULES[rule as usize - 1];
            assert!((r.matches)(&s.term), "rule {rule}");
        }
    }
}
