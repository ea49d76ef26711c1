//! Syntax-directed type checkers for the three calculi.
//!
//! The intuitionistic checkers (`iplus`, `cc`) read the context as a plain
//! map. The linear checker threads the set of still-available hypotheses
//! through the derivation: multiplicative rules pass the remainder of one
//! premise to the next, additive rules run both premises on the same input
//! and require equal remainders.
//!
//! `inl(t)` and `inr(t)` leave the other disjunct open; it is represented by
//! a metavariable and solved by unification. Metavariables still open at the
//! end are reported as atoms `?0`, `?1`, … numbered by first occurrence.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde_json::{json, Value};

use crate::syntax::{path_to_string, parse_prop, Binder, Calculus, Path, Prop, Side, Term};

const META_PREFIX: char = '\u{1}';

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TypingContext {
    entries: Vec<(String, Prop)>,
}

impl TypingContext {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a hypothesis, replacing an earlier one with the same name.
    pub fn with(mut self, name: &str, prop: Prop) -> Self {
        self.entries.retain(|(n, _)| n != name);
        self.entries.push((name.to_string(), prop));
        self
    }

    pub fn insert(&mut self, name: &str, prop: Prop) -> Result<(), String> {
        if self.get(name).is_some() {
            return Err(format!("duplicate hypothesis `{name}`"));
        }
        self.entries.push((name.to_string(), prop));
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Prop> {
        self.entries.iter().find(|(n, _)| n == name).map(|(_, p)| p)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Prop)> {
        self.entries.iter().map(|(n, p)| (n.as_str(), p))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `x : A, y : B`. An empty or blank string is the empty context.
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut ctx = Self::new();
        for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (name, prop) = item
                .split_once(':')
                .ok_or_else(|| format!("expected `name : proposition`, found `{item}`"))?;
            let prop = parse_prop(prop.trim()).map_err(|e| e.to_string())?;
            ctx.insert(name.trim(), prop)?;
        }
        Ok(ctx)
    }
}

impl fmt::Display for TypingContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.entries.iter().map(|(n, p)| format!("{n} : {p}")).collect();
        f.write_str(&items.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ErrorKind {
    UnboundVar(String),
    Mismatch { expected: Prop, found: Prop },
    NotAFunction(Prop),
    LinearUnused(Vec<String>),
    LinearReused(String),
    ConstructorOutsideCalculus { constructor: String, calculus: Calculus },
    AnnotationRequired(String),
}

impl ErrorKind {
    pub fn name(&self) -> &'static str {
        match self {
            ErrorKind::UnboundVar(_) => "UnboundVar",
            ErrorKind::Mismatch { .. } => "Mismatch",
            ErrorKind::NotAFunction(_) => "NotAFunction",
            ErrorKind::LinearUnused(_) => "LinearUnused",
            ErrorKind::LinearReused(_) => "LinearReused",
            ErrorKind::ConstructorOutsideCalculus { .. } => "ConstructorOutsideCalculus",
            ErrorKind::AnnotationRequired(_) => "AnnotationRequired",
        }
    }

    fn detail(&self) -> String {
        match self {
            ErrorKind::UnboundVar(x) => format!("{x} is not in scope"),
            ErrorKind::Mismatch { expected, found } => format!("expected {expected}, found {found}"),
            ErrorKind::NotAFunction(p) => format!("applied a proof of {p}"),
            ErrorKind::LinearUnused(xs) => format!("{} not consumed", xs.join(", ")),
            ErrorKind::LinearReused(x) => format!("{x} consumed more than once"),
            ErrorKind::ConstructorOutsideCalculus { constructor, calculus } => {
                format!("{constructor} is not part of the {calculus} calculus")
            }
            ErrorKind::AnnotationRequired(x) => format!("lam {x} needs a type annotation"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TypingError {
    pub kind: ErrorKind,
    pub path: Path,
}

impl TypingError {
    pub fn to_json(&self) -> Value {
        let (expected, found) = match &self.kind {
            ErrorKind::Mismatch { expected, found } => {
                (Some(expected.to_string()), Some(found.to_string()))
            }
            ErrorKind::NotAFunction(p) => (None, Some(p.to_string())),
            _ => (None, None),
        };
        json!({
            "path": self.path,
            "kind": self.kind.name(),
            "expected": expected,
            "found": found,
            "detail": self.kind.detail(),
        })
    }
}

impl fmt::Display for TypingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {}: {}",
            path_to_string(&self.path),
            self.kind.name(),
            self.kind.detail()
        )
    }
}

impl std::error::Error for TypingError {}

fn meta_id(p: &Prop) -> Option<usize> {
    match p {
        Prop::Atom(name) => name.strip_prefix(META_PREFIX).and_then(|k| k.parse().ok()),
        _ => None,
    }
}

#[derive(Default)]
struct Unifier {
    solved: Vec<Option<Prop>>,
}

impl Unifier {
    fn fresh(&mut self) -> Prop {
        self.solved.push(None);
        Prop::Atom(format!("{META_PREFIX}{}", self.solved.len() - 1))
    }

    fn head(&self, p: &Prop) -> Prop {
        let mut cur = p.clone();
        while let Some(Some(next)) = meta_id(&cur).map(|k| self.solved[k].clone()) {
            cur = next;
        }
        cur
    }

    fn resolve(&self, p: &Prop) -> Prop {
        let p = self.head(p);
        match p {
            Prop::Impl(a, b) => Prop::implies(self.resolve(&a), self.resolve(&b)),
            Prop::Conj(a, b) => Prop::conj(self.resolve(&a), self.resolve(&b)),
            Prop::Disj(a, b) => Prop::disj(self.resolve(&a), self.resolve(&b)),
            Prop::Lollipop(a, b) => Prop::lollipop(self.resolve(&a), self.resolve(&b)),
            Prop::OPlus(a, b) => Prop::oplus(self.resolve(&a), self.resolve(&b)),
            other => other,
        }
    }

    fn occurs(&self, k: usize, p: &Prop) -> bool {
        let p = self.head(p);
        if meta_id(&p) == Some(k) {
            return true;
        }
        match &p {
            Prop::Impl(a, b)
            | Prop::Conj(a, b)
            | Prop::Disj(a, b)
            | Prop::Lollipop(a, b)
            | Prop::OPlus(a, b) => self.occurs(k, a) || self.occurs(k, b),
            _ => false,
        }
    }

    fn unify(&mut self, a: &Prop, b: &Prop) -> bool {
        let (a, b) = (self.head(a), self.head(b));
        match (meta_id(&a), meta_id(&b)) {
            (Some(i), Some(j)) if i == j => return true,
            (Some(i), _) => {
                if self.occurs(i, &b) {
                    return false;
                }
                self.solved[i] = Some(b);
                return true;
            }
            (_, Some(j)) => {
                if self.occurs(j, &a) {
                    return false;
                }
                self.solved[j] = Some(a);
                return true;
            }
            _ => {}
        }
        match (&a, &b) {
            (Prop::Impl(a1, a2), Prop::Impl(b1, b2))
            | (Prop::Conj(a1, a2), Prop::Conj(b1, b2))
            | (Prop::Disj(a1, a2), Prop::Disj(b1, b2))
            | (Prop::Lollipop(a1, a2), Prop::Lollipop(b1, b2))
            | (Prop::OPlus(a1, a2), Prop::OPlus(b1, b2)) => {
                self.unify(a1, b1) && self.unify(a2, b2)
            }
            _ => a == b,
        }
    }
}

/// Renames leftover metavariables to `?0`, `?1`, … in order of appearance.
fn name_metas(p: &Prop, names: &mut HashMap<usize, usize>) -> Prop {
    if let Some(k) = meta_id(p) {
        let next = names.len();
        let n = *names.entry(k).or_insert(next);
        return Prop::Atom(format!("?{n}"));
    }
    match p {
        Prop::Impl(a, b) => Prop::implies(name_metas(a, names), name_metas(b, names)),
        Prop::Conj(a, b) => Prop::conj(name_metas(a, names), name_metas(b, names)),
        Prop::Disj(a, b) => Prop::disj(name_metas(a, names), name_metas(b, names)),
        Prop::Lollipop(a, b) => Prop::lollipop(name_metas(a, names), name_metas(b, names)),
        Prop::OPlus(a, b) => Prop::oplus(name_metas(a, names), name_metas(b, names)),
        other => other.clone(),
    }
}

type Avail = BTreeSet<String>;

struct Checker {
    calculus: Calculus,
    linear: bool,
    ctx: HashMap<String, Prop>,
    hints: HashMap<String, String>,
    uni: Unifier,
    path: Path,
}

type TResult<T> = Result<T, TypingError>;

impl Checker {
    fn fail<T>(&self, kind: ErrorKind) -> TResult<T> {
        Err(TypingError {
            kind,
            path: self.path.clone(),
        })
    }

    fn display(&self, name: &str) -> String {
        self.hints.get(name).cloned().unwrap_or_else(|| name.to_string())
    }

    fn mismatch<T>(&self, expected: &Prop, found: &Prop) -> TResult<T> {
        let mut names = HashMap::new();
        let expected = name_metas(&self.uni.resolve(expected), &mut names);
        let found = name_metas(&self.uni.resolve(found), &mut names);
        self.fail(ErrorKind::Mismatch { expected, found })
    }

    fn unify(&mut self, expected: &Prop, found: &Prop) -> TResult<()> {
        if self.uni.unify(expected, found) {
            Ok(())
        } else {
            self.mismatch(expected, found)
        }
    }

    fn fresh(&mut self) -> Prop {
        self.uni.fresh()
    }

    fn arrow(&self, a: Prop, b: Prop) -> Prop {
        if self.linear {
            Prop::lollipop(a, b)
        } else {
            Prop::implies(a, b)
        }
    }

    fn plus(&self, a: Prop, b: Prop) -> Prop {
        if self.linear {
            Prop::oplus(a, b)
        } else {
            Prop::disj(a, b)
        }
    }

    fn unit(&self) -> Prop {
        if self.linear {
            Prop::One
        } else {
            Prop::Top
        }
    }

    /// Unifies `found` with `shape(fresh, fresh)` and returns the two components.
    fn split(&mut self, found: &Prop, shape: fn(Prop, Prop) -> Prop) -> TResult<(Prop, Prop)> {
        let (a, b) = (self.fresh(), self.fresh());
        let expected = shape(a.clone(), b.clone());
        self.unify(&expected, found)?;
        Ok((a, b))
    }

    fn check_annotation(&self, p: &Prop) -> TResult<()> {
        match p.foreign_connective(self.calculus) {
            Some(c) => self.fail(ErrorKind::ConstructorOutsideCalculus {
                constructor: c.to_string(),
                calculus: self.calculus,
            }),
            None => Ok(()),
        }
    }

    fn child<R>(&mut self, i: usize, f: impl FnOnce(&mut Self) -> R) -> R {
        self.path.push(i);
        let r = f(self);
        self.path.pop();
        r
    }

    fn open(&mut self, b: &Binder, ty: Prop) -> (String, Term) {
        let (name, body) = b.open_fresh();
        self.ctx.insert(name.clone(), ty);
        self.hints.insert(name.clone(), b.hint.clone());
        (name, body)
    }

    /// Checks a binder body, then in linear mode that the bound variable was consumed.
    fn binder(&mut self, i: usize, b: &Binder, ty: Prop, avail: &mut Avail) -> TResult<Prop> {
        let (name, body) = self.open(b, ty);
        if self.linear {
            avail.insert(name.clone());
        }
        let out = self.child(i, |c| c.infer(&body, avail))?;
        if self.linear && avail.remove(&name) {
            return self.child(i, |c| c.fail(ErrorKind::LinearUnused(vec![b.hint.clone()])));
        }
        Ok(out)
    }

    /// Runs two premises on the same resources and requires equal remainders.
    fn additive(
        &mut self,
        avail: &mut Avail,
        left: impl FnOnce(&mut Self, &mut Avail) -> TResult<Prop>,
        right: impl FnOnce(&mut Self, &mut Avail) -> TResult<Prop>,
    ) -> TResult<(Prop, Prop)> {
        let mut a1 = avail.clone();
        let mut a2 = avail.clone();
        let p1 = left(self, &mut a1)?;
        let p2 = right(self, &mut a2)?;
        if a1 != a2 {
            let unused: Vec<String> = a1.symmetric_difference(&a2).map(|n| self.display(n)).collect();
            return self.fail(ErrorKind::LinearUnused(unused));
        }
        *avail = a1;
        Ok((p1, p2))
    }

    fn infer(&mut self, t: &Term, avail: &mut Avail) -> TResult<Prop> {
        if !self.calculus.admits(t) {
            return self.fail(ErrorKind::ConstructorOutsideCalculus {
                constructor: t.constructor_name().to_string(),
                calculus: self.calculus,
            });
        }
        match t {
            Term::Bound(k) => self.fail(ErrorKind::UnboundVar(format!("#{k}"))),
            Term::Free(x) => {
                let Some(p) = self.ctx.get(x).cloned() else {
                    return self.fail(ErrorKind::UnboundVar(self.display(x)));
                };
                if self.linear && !avail.remove(x) {
                    return self.fail(ErrorKind::LinearReused(self.display(x)));
                }
                Ok(p)
            }
            Term::Star => Ok(Prop::Top),
            Term::ScalarStar(_) => Ok(Prop::One),
            Term::Sum(a, b) => {
                let (p, q) = self.additive(
                    avail,
                    |c, av| c.child(0, |c| c.infer(a, av)),
                    |c, av| c.child(1, |c| c.infer(b, av)),
                )?;
                self.child(1, |c| c.unify(&p, &q))?;
                Ok(p)
            }
            Term::Prod(_, a) => self.child(0, |c| c.infer(a, avail)),
            Term::TopElim(a, b) | Term::OneElim(a, b) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let unit = self.unit();
                self.child(0, |c| c.unify(&unit, &p))?;
                self.child(1, |c| c.infer(b, avail))
            }
            Term::BotElim(goal, a) => {
                self.check_annotation(goal)?;
                let p = self.child(0, |c| c.infer(a, avail))?;
                self.child(0, |c| c.unify(&Prop::Bot, &p))?;
                Ok(goal.clone())
            }
            Term::Lam(ann, b) => {
                let Some(dom) = ann else {
                    return self.fail(ErrorKind::AnnotationRequired(b.hint.clone()));
                };
                self.check_annotation(dom)?;
                let cod = self.binder(0, b, dom.clone(), avail)?;
                Ok(self.arrow(dom.clone(), cod))
            }
            Term::App(f, a) => {
                let pf = self.child(0, |c| c.infer(f, avail))?;
                let pa = self.child(1, |c| c.infer(a, avail))?;
                let head = self.uni.head(&pf);
                let (dom, cod) = match head {
                    Prop::Impl(d, c) if !self.linear => (*d, *c),
                    Prop::Lollipop(d, c) if self.linear => (*d, *c),
                    _ if meta_id(&head).is_some() => {
                        let shape = if self.linear { Prop::lollipop } else { Prop::implies };
                        self.child(0, |c| c.split(&head, shape))?
                    }
                    _ => {
                        let found = name_metas(&self.uni.resolve(&head), &mut HashMap::new());
                        return self.child(0, |c| c.fail(ErrorKind::NotAFunction(found)));
                    }
                };
                self.child(1, |c| c.unify(&dom, &pa))?;
                Ok(cod)
            }
            Term::Pair(a, b) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let q = self.child(1, |c| c.infer(b, avail))?;
                Ok(Prop::conj(p, q))
            }
            Term::AndElim(side, a, b) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let (l, r) = self.child(0, |c| c.split(&p, Prop::conj))?;
                let ty = if *side == Side::First { l } else { r };
                self.binder(1, b, ty, avail)
            }
            Term::Inl(a) | Term::Inr(a) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let other = self.fresh();
                Ok(if matches!(t, Term::Inl(_)) {
                    self.plus(p, other)
                } else {
                    self.plus(other, p)
                })
            }
            Term::Inlr(a, b) => {
                let (p, q) = self.additive(
                    avail,
                    |c, av| c.child(0, |c| c.infer(a, av)),
                    |c, av| c.child(1, |c| c.infer(b, av)),
                )?;
                Ok(self.plus(p, q))
            }
            Term::InlrBind(a, b1, b2) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let (l, r) = self.child(0, |c| c.split(&p, Prop::disj))?;
                let q1 = self.binder(1, b1, l, avail)?;
                let q2 = self.binder(2, b2, r, avail)?;
                Ok(Prop::disj(q1, q2))
            }
            Term::Case(a, b1, b2) | Term::CaseNd(a, b1, b2) => {
                let p = self.child(0, |c| c.infer(a, avail))?;
                let shape = if self.linear { Prop::oplus } else { Prop::disj };
                let (l, r) = self.child(0, |c| c.split(&p, shape))?;
                let (q1, q2) = self.additive(
                    avail,
                    |c, av| c.binder(1, b1, l, av),
                    |c, av| c.binder(2, b2, r, av),
                )?;
                self.child(2, |c| c.unify(&q1, &q2))?;
                Ok(q1)
            }
        }
    }
}

fn run(calculus: Calculus, ctx: &TypingContext, t: &Term, expected: Option<&Prop>) -> TResult<Prop> {
    let mut checker = Checker {
        calculus,
        linear: calculus == Calculus::Quantum,
        ctx: ctx.iter().map(|(n, p)| (n.to_string(), p.clone())).collect(),
        hints: HashMap::new(),
        uni: Unifier::default(),
        path: Vec::new(),
    };
    for (_, p) in ctx.iter() {
        checker.check_annotation(p)?;
    }
    let mut avail: Avail = ctx.iter().map(|(n, _)| n.to_string()).collect();
    let p = checker.infer(t, &mut avail)?;
    if checker.linear && !avail.is_empty() {
        return checker.fail(ErrorKind::LinearUnused(avail.into_iter().collect()));
    }
    if let Some(e) = expected {
        checker.unify(e, &p)?;
    }
    Ok(name_metas(&checker.uni.resolve(&p), &mut HashMap::new()))
}

/// Infers the proposition of `t` under the rules of `calculus`.
pub fn infer(calculus: Calculus, ctx: &TypingContext, t: &Term) -> Result<Prop, TypingError> {
    run(calculus, ctx, t, None)
}

/// Checks `t` against `expected`; atoms of `expected` are rigid.
pub fn check(
    calculus: Calculus,
    ctx: &TypingContext,
    t: &Term,
    expected: &Prop,
) -> Result<(), TypingError> {
    run(calculus, ctx, t, Some(expected)).map(|_| ())
}

pub fn infer_iplus(ctx: &TypingContext, t: &Term) -> Result<Prop, TypingError> {
    infer(Calculus::Iplus, ctx, t)
}

pub fn infer_linear(ctx: &TypingContext, t: &Term) -> Result<Prop, TypingError> {
    infer(Calculus::Quantum, ctx, t)
}

pub fn infer_cc(ctx: &TypingContext, t: &Term) -> Result<Prop, TypingError> {
    infer(Calculus::Cc, ctx, t)
}
