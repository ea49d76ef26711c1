use std::collections::BTreeSet;
use std::sync::atomic::{AtomicUsize, Ordering};

use num_complex::Complex64;

use super::Prop;

pub type Scalar = Complex64;

/// Which projection a conjunction elimination takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn index(self) -> u8 {
        match self {
            Side::First => 1,
            Side::Second => 2,
        }
    }
}

/// A bound variable together with its scope.
///
/// The body refers to the bound variable with `Term::Bound(k)` where `k` is
/// the number of binders crossed between the occurrence and this binder. The
/// hint is only used for printing and never takes part in equality.
#[derive(Clone, Debug)]
pub struct Binder {
    pub hint: String,
    pub body: Box<Term>,
}

impl PartialEq for Binder {
    fn eq(&self, other: &Self) -> bool {
        self.body == other.body
    }
}

/// Proof terms of the three calculi, in locally nameless form.
///
/// Derived equality is α-equivalence: bound variables are positional and
/// binder hints are ignored.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Bound(usize),
    Free(String),
    Star,
    ScalarStar(Scalar),
    Sum(Box<Term>, Box<Term>),
    Prod(Scalar, Box<Term>),
    TopElim(Box<Term>, Box<Term>),
    BotElim(Prop, Box<Term>),
    Lam(Option<Prop>, Binder),
    App(Box<Term>, Box<Term>),
    Pair(Box<Term>, Box<Term>),
    AndElim(Side, Box<Term>, Binder),
    Inl(Box<Term>),
    Inr(Box<Term>),
    /// The two-premise introduction `inlr(t, u)`.
    Inlr(Box<Term>, Box<Term>),
    /// The binder introduction `inlr(t, x1.u1, x2.u2)` of the commuting-cut calculus.
    InlrBind(Box<Term>, Binder, Binder),
    Case(Box<Term>, Binder, Binder),
    CaseNd(Box<Term>, Binder, Binder),
    OneElim(Box<Term>, Box<Term>),
}

/// A position in a term: the sequence of child indices from the root.
pub type Path = Vec<usize>;

pub fn path_to_string(path: &[usize]) -> String {
    if path.is_empty() {
        "root".to_string()
    } else {
        path.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(".")
    }
}

static FRESH: AtomicUsize = AtomicUsize::new(0);

/// A name that cannot collide with any parsed identifier.
pub fn fresh_name() -> String {
    format!("#{}", FRESH.fetch_add(1, Ordering::Relaxed))
}

impl Binder {
    pub fn new(hint: impl Into<String>, body: Term) -> Binder {
        Binder {
            hint: hint.into(),
            body: Box::new(body),
        }
    }

    /// Abstracts the free variable `name` of `body`.
    pub fn close(hint: impl Into<String>, name: &str, body: Term) -> Binder {
        Binder::new(hint, body.close_at(0, name))
    }

    /// Replaces the bound variable with `value`, which must be locally closed.
    pub fn instantiate(&self, value: &Term) -> Term {
        self.body.instantiate_at(0, value)
    }

    pub fn open(&self, name: &str) -> Term {
        self.instantiate(&Term::Free(name.to_string()))
    }

    /// Opens with a fresh name and returns it alongside the body.
    pub fn open_fresh(&self) -> (String, Term) {
        let name = fresh_name();
        let body = self.open(&name);
        (name, body)
    }
}

pub fn bx(t: Term) -> Box<Term> {
    Box::new(t)
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Free(name.to_string())
    }

    pub fn scalar_star(re: f64) -> Term {
        Term::ScalarStar(Scalar::new(re, 0.0))
    }

    pub fn sum(a: Term, b: Term) -> Term {
        Term::Sum(bx(a), bx(b))
    }

    pub fn prod(a: Scalar, t: Term) -> Term {
        Term::Prod(a, bx(t))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(bx(f), bx(a))
    }

    pub fn pair(a: Term, b: Term) -> Term {
        Term::Pair(bx(a), bx(b))
    }

    pub fn inl(t: Term) -> Term {
        Term::Inl(bx(t))
    }

    pub fn inr(t: Term) -> Term {
        Term::Inr(bx(t))
    }

    pub fn inlr(a: Term, b: Term) -> Term {
        Term::Inlr(bx(a), bx(b))
    }

    pub fn top_elim(a: Term, b: Term) -> Term {
        Term::TopElim(bx(a), bx(b))
    }

    pub fn one_elim(a: Term, b: Term) -> Term {
        Term::OneElim(bx(a), bx(b))
    }

    pub fn bot_elim(p: Prop, t: Term) -> Term {
        Term::BotElim(p, bx(t))
    }

    /// `lam x:A. body` where `x` is free in `body`.
    pub fn lam(x: &str, ann: Option<Prop>, body: Term) -> Term {
        Term::Lam(ann, Binder::close(x, x, body))
    }

    pub fn and_elim(side: Side, t: Term, x: &str, body: Term) -> Term {
        Term::AndElim(side, bx(t), Binder::close(x, x, body))
    }

    pub fn case(t: Term, x: &str, u: Term, y: &str, v: Term) -> Term {
        Term::Case(bx(t), Binder::close(x, x, u), Binder::close(y, y, v))
    }

    pub fn case_nd(t: Term, x: &str, u: Term, y: &str, v: Term) -> Term {
        Term::CaseNd(bx(t), Binder::close(x, x, u), Binder::close(y, y, v))
    }

    pub fn inlr_bind(t: Term, x: &str, u: Term, y: &str, v: Term) -> Term {
        Term::InlrBind(bx(t), Binder::close(x, x, u), Binder::close(y, y, v))
    }

    /// Name of the constructor as written in the surface syntax.
    pub fn constructor_name(&self) -> &'static str {
        match self {
            Term::Bound(_) | Term::Free(_) => "variable",
            Term::Star => "star",
            Term::ScalarStar(_) => "a . star",
            Term::Sum(..) => "sum",
            Term::Prod(..) => "prod",
            Term::TopElim(..) => "top_elim",
            Term::BotElim(..) => "bot_elim",
            Term::Lam(..) => "lam",
            Term::App(..) => "application",
            Term::Pair(..) => "pair",
            Term::AndElim(Side::First, ..) => "and1",
            Term::AndElim(Side::Second, ..) => "and2",
            Term::Inl(_) => "inl",
            Term::Inr(_) => "inr",
            Term::Inlr(..) => "inlr",
            Term::InlrBind(..) => "inlr (binder form)",
            Term::Case(..) => "case",
            Term::CaseNd(..) => "case_nd",
            Term::OneElim(..) => "one_elim",
        }
    }

    /// Immediate subterms in positional order; binder bodies count as children.
    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Bound(_) | Term::Free(_) | Term::Star | Term::ScalarStar(_) => vec![],
            Term::Prod(_, a) | Term::BotElim(_, a) | Term::Inl(a) | Term::Inr(a) => vec![a],
            Term::Lam(_, b) => vec![&b.body],
            Term::Sum(a, b)
            | Term::TopElim(a, b)
            | Term::App(a, b)
            | Term::Pair(a, b)
            | Term::Inlr(a, b)
            | Term::OneElim(a, b) => vec![a, b],
            Term::AndElim(_, a, b) => vec![a, &b.body],
            Term::InlrBind(a, b, c) | Term::Case(a, b, c) | Term::CaseNd(a, b, c) => {
                vec![a, &b.body, &c.body]
            }
        }
    }

    /// Whether child `index` sits under a binder.
    pub fn child_binder(&self, index: usize) -> Option<&Binder> {
        match (self, index) {
            (Term::Lam(_, b), 0) => Some(b),
            (Term::AndElim(_, _, b), 1) => Some(b),
            (Term::InlrBind(_, b, _) | Term::Case(_, b, _) | Term::CaseNd(_, b, _), 1) => Some(b),
            (Term::InlrBind(_, _, c) | Term::Case(_, _, c) | Term::CaseNd(_, _, c), 2) => Some(c),
            _ => None,
        }
    }

    /// Rebuilds the term with each child mapped; `f` receives the number of
    /// binders the child sits under (0 or 1).
    pub fn map_children(&self, mut f: impl FnMut(usize, &Term) -> Term) -> Term {
        fn bind(b: &Binder, f: &mut impl FnMut(usize, &Term) -> Term) -> Binder {
            Binder {
                hint: b.hint.clone(),
                body: bx(f(1, &b.body)),
            }
        }
        match self {
            Term::Bound(_) | Term::Free(_) | Term::Star | Term::ScalarStar(_) => self.clone(),
            Term::Lam(p, b) => Term::Lam(p.clone(), bind(b, &mut f)),
            Term::AndElim(s, a, b) => {
                let a = bx(f(0, a));
                Term::AndElim(*s, a, bind(b, &mut f))
            }
            Term::InlrBind(a, b, c) | Term::Case(a, b, c) | Term::CaseNd(a, b, c) => {
                let a = bx(f(0, a));
                let b = bind(b, &mut f);
                let c = bind(c, &mut f);
                match self {
                    Term::InlrBind(..) => Term::InlrBind(a, b, c),
                    Term::Case(..) => Term::Case(a, b, c),
                    _ => Term::CaseNd(a, b, c),
                }
            }
            Term::Prod(s, a) => Term::Prod(*s, bx(f(0, a))),
            Term::BotElim(p, a) => Term::BotElim(p.clone(), bx(f(0, a))),
            Term::Inl(a) => Term::Inl(bx(f(0, a))),
            Term::Inr(a) => Term::Inr(bx(f(0, a))),
            Term::Sum(a, b) | Term::TopElim(a, b) | Term::App(a, b) | Term::Pair(a, b)
            | Term::Inlr(a, b) | Term::OneElim(a, b) => {
                let a = bx(f(0, a));
                let b = bx(f(0, b));
                match self {
                    Term::Sum(..) => Term::Sum(a, b),
                    Term::TopElim(..) => Term::TopElim(a, b),
                    Term::App(..) => Term::App(a, b),
                    Term::Pair(..) => Term::Pair(a, b),
                    Term::Inlr(..) => Term::Inlr(a, b),
                    _ => Term::OneElim(a, b),
                }
            }
        }
    }

    /// Replaces the single child at `index` (binder hints are kept).
    pub fn with_child(&self, index: usize, child: Term) -> Term {
        let mut i = 0;
        let mut slot = Some(child);
        self.map_children(|_, c| {
            let out = if i == index {
                slot.take().expect("child replaced once")
            } else {
                c.clone()
            };
            i += 1;
            out
        })
    }

    pub(crate) fn instantiate_at(&self, depth: usize, value: &Term) -> Term {
        match self {
            Term::Bound(k) if *k == depth => value.clone(),
            _ => self.map_children(|under, c| c.instantiate_at(depth + under, value)),
        }
    }

    pub(crate) fn close_at(&self, depth: usize, name: &str) -> Term {
        match self {
            Term::Free(n) if n == name => Term::Bound(depth),
            _ => self.map_children(|under, c| c.close_at(depth + under, name)),
        }
    }

    /// Whether every bound index refers to an enclosing binder.
    pub fn is_locally_closed(&self) -> bool {
        fn go(t: &Term, depth: usize) -> bool {
            match t {
                Term::Bound(k) => *k < depth,
                _ => t
                    .children()
                    .iter()
                    .enumerate()
                    .all(|(i, c)| go(c, depth + usize::from(t.child_binder(i).is_some()))),
            }
        }
        go(self, 0)
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut out);
        out
    }

    fn collect_free(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Free(n) => {
                out.insert(n.clone());
            }
            _ => {
                for c in self.children() {
                    c.collect_free(out);
                }
            }
        }
    }

    pub fn occurs_free(&self, name: &str) -> bool {
        match self {
            Term::Free(n) => n == name,
            _ => self.children().iter().any(|c| c.occurs_free(name)),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Number of constructor nodes.
    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    /// Capture-avoiding substitution `(value/name)self`.
    pub fn subst(&self, name: &str, value: &Term) -> Term {
        match self {
            Term::Free(n) if n == name => value.clone(),
            _ if !self.occurs_free(name) => self.clone(),
            _ => self.map_children(|_, c| c.subst(name, value)),
        }
    }

    /// Simultaneous substitution of several free variables.
    pub fn subst_many(&self, pairs: &[(&str, Term)]) -> Term {
        match self {
            Term::Free(n) => pairs
                .iter()
                .find(|(x, _)| *x == n)
                .map(|(_, v)| v.clone())
                .unwrap_or_else(|| self.clone()),
            _ => self.map_children(|_, c| c.subst_many(pairs)),
        }
    }

    /// The subterm at `path`, without opening binders.
    pub fn subterm(&self, path: &[usize]) -> Option<&Term> {
        match path.split_first() {
            None => Some(self),
            Some((i, rest)) => self.children().get(*i).and_then(|c| c.subterm(rest)),
        }
    }

    /// Applies `f` to the subterm at `path` with every enclosing binder on the
    /// way opened to a fresh free variable, then closes them again. `f` thus
    /// always sees a locally closed term.
    pub fn rewrite_at<E>(
        &self,
        path: &[usize],
        f: &mut impl FnMut(&Term) -> Result<Term, E>,
    ) -> Option<Result<Term, E>> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(f(self));
        };
        let child = *self.children().get(i)?;
        let replaced = match self.child_binder(i) {
            Some(b) => {
                let (name, opened) = b.open_fresh();
                opened
                    .rewrite_at(rest, f)?
                    .map(|new_body| new_body.close_at(0, &name))
            }
            None => child.rewrite_at(rest, f)?,
        };
        Some(replaced.map(|c| self.with_child(i, c)))
    }

    /// All positions in preorder (leftmost-outermost order).
    pub fn positions(&self) -> Vec<Path> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn go(t: &Term, cur: &mut Path, out: &mut Vec<Path>) {
            out.push(cur.clone());
            for (i, c) in t.children().into_iter().enumerate() {
                cur.push(i);
                go(c, cur, out);
                cur.pop();
            }
        }
        go(self, &mut cur, &mut out);
        out
    }

    /// Scalars of `a . star` and `prod` nodes, in preorder.
    pub fn scalars(&self) -> Vec<Scalar> {
        let mut out = Vec::new();
        fn go(t: &Term, out: &mut Vec<Scalar>) {
            match t {
                Term::ScalarStar(a) | Term::Prod(a, _) => out.push(*a),
                _ => {}
            }
            for c in t.children() {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }
}

/// α-equivalence. Terms are stored namelessly, so this is structural equality.
pub fn alpha_eq(t: &Term, u: &Term) -> bool {
    t == u
}

/// α-equivalence with scalars compared up to an absolute tolerance.
pub fn alpha_eq_approx(t: &Term, u: &Term, tol: f64) -> bool {
    let close = |a: &Scalar, b: &Scalar| (a.re - b.re).abs() <= tol && (a.im - b.im).abs() <= tol;
    match (t, u) {
        (Term::ScalarStar(a), Term::ScalarStar(b)) => close(a, b),
        (Term::Prod(a, x), Term::Prod(b, y)) => close(a, b) && alpha_eq_approx(x, y, tol),
        (Term::Lam(p, _), Term::Lam(q, _)) if p != q => false,
        (Term::BotElim(p, _), Term::BotElim(q, _)) if p != q => false,
        (Term::AndElim(s, ..), Term::AndElim(r, ..)) if s != r => false,
        _ => {
            std::mem::discriminant(t) == std::mem::discriminant(u)
                && match (t, u) {
                    (Term::Bound(i), Term::Bound(j)) => i == j,
                    (Term::Free(a), Term::Free(b)) => a == b,
                    _ => {
                        let (tc, uc) = (t.children(), u.children());
                        tc.len() == uc.len()
                            && tc.iter().zip(uc).all(|(a, b)| alpha_eq_approx(a, b, tol))
                    }
                }
        }
    }
}

/// `(value/name)t`.
pub fn subst(value: &Term, name: &str, t: &Term) -> Term {
    t.subst(name, value)
}

/// `(w/<x,y>)t`: simultaneously replaces `x` by `and1(w, z.z)` and `y` by
/// `and2(w, z.z)`.
pub fn pair_subst(w: &Term, x: &str, y: &str, t: &Term) -> Term {
    let proj = |side| Term::AndElim(side, bx(w.clone()), Binder::new("z", Term::Bound(0)));
    t.subst_many(&[(x, proj(Side::First)), (y, proj(Side::Second))])
}
