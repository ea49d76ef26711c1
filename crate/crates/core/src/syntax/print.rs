use std::collections::BTreeSet;
use std::fmt::Write;

use super::{Binder, Scalar, Side, Term};

const RESERVED: &[&str] = &[
    "star", "sum", "prod", "lam", "pair", "and1", "and2", "inl", "inr", "inlr", "case", "case_nd",
    "top_elim", "bot_elim", "one_elim", "Top", "Bot", "One",
];

fn usable_hint(hint: &str) -> bool {
    let mut chars = hint.chars();
    matches!(chars.next(), Some(c) if c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || c == '_' || c == '\'')
        && !RESERVED.contains(&hint)
}

pub(crate) fn format_scalar(a: Scalar) -> String {
    if a.im == 0.0 {
        format!("{:?}", a.re)
    } else {
        format!("({:?}, {:?})", a.re, a.im)
    }
}

struct Printer {
    out: String,
    free: BTreeSet<String>,
    scope: Vec<String>,
    canonical: bool,
}

impl Printer {
    fn pick(&self, hint: &str) -> String {
        let mut name = if self.canonical {
            format!("v{}", self.scope.len())
        } else if usable_hint(hint) {
            hint.to_string()
        } else {
            "x".to_string()
        };
        while self.free.contains(&name) || self.scope.contains(&name) {
            name.push('\'');
        }
        name
    }

    fn binder(&mut self, b: &Binder) {
        let name = self.pick(&b.hint);
        self.out.push_str(&name);
        self.out.push_str(". ");
        self.scope.push(name);
        self.term(&b.body);
        self.scope.pop();
    }

    fn args(&mut self, items: &[&Term]) {
        self.out.push('(');
        for (i, t) in items.iter().enumerate() {
            if i > 0 {
                self.out.push_str(", ");
            }
            self.term(t);
        }
        self.out.push(')');
    }

    fn eliminator(&mut self, head: &str, t: &Term, bs: &[&Binder]) {
        self.out.push_str(head);
        self.out.push('(');
        self.term(t);
        for b in bs {
            self.out.push_str(", ");
            self.binder(b);
        }
        self.out.push(')');
    }

    fn wrapped(&mut self, t: &Term) {
        self.out.push('(');
        self.term(t);
        self.out.push(')');
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Bound(k) => {
                let name = self
                    .scope
                    .len()
                    .checked_sub(k + 1)
                    .and_then(|i| self.scope.get(i))
                    .cloned()
                    .unwrap_or_else(|| format!("#bound{k}"));
                self.out.push_str(&name);
            }
            Term::Free(n) => self.out.push_str(n),
            Term::Star => self.out.push_str("star"),
            Term::ScalarStar(a) => {
                let _ = write!(self.out, "{} . star", format_scalar(*a));
            }
            Term::Sum(a, b) => {
                self.out.push_str("sum");
                self.args(&[a, b]);
            }
            Term::Prod(a, b) => {
                let _ = write!(self.out, "prod({}, ", format_scalar(*a));
                self.term(b);
                self.out.push(')');
            }
            Term::TopElim(a, b) => {
                self.out.push_str("top_elim");
                self.args(&[a, b]);
            }
            Term::OneElim(a, b) => {
                self.out.push_str("one_elim");
                self.args(&[a, b]);
            }
            Term::BotElim(p, a) => {
                let _ = write!(self.out, "bot_elim[{p}]");
                self.args(&[a]);
            }
            Term::Lam(ann, b) => {
                let name = self.pick(&b.hint);
                match ann {
                    Some(p) => {
                        let _ = write!(self.out, "lam {name}:{p}. ");
                    }
                    None => {
                        let _ = write!(self.out, "lam {name}. ");
                    }
                }
                self.scope.push(name);
                self.term(&b.body);
                self.scope.pop();
            }
            Term::App(f, a) => {
                match **f {
                    Term::Lam(..) | Term::ScalarStar(_) => self.wrapped(f),
                    _ => self.term(f),
                }
                self.out.push(' ');
                match **a {
                    Term::Lam(..) | Term::App(..) | Term::ScalarStar(_) => self.wrapped(a),
                    _ => self.term(a),
                }
            }
            Term::Pair(a, b) => {
                self.out.push_str("pair");
                self.args(&[a, b]);
            }
            Term::AndElim(side, a, b) => {
                let head = if *side == Side::First { "and1" } else { "and2" };
                self.eliminator(head, a, &[b]);
            }
            Term::Inl(a) => {
                self.out.push_str("inl");
                self.args(&[a]);
            }
            Term::Inr(a) => {
                self.out.push_str("inr");
                self.args(&[a]);
            }
            Term::Inlr(a, b) => {
                self.out.push_str("inlr");
                self.args(&[a, b]);
            }
            Term::InlrBind(a, b, c) => self.eliminator("inlr", a, &[b, c]),
            Term::Case(a, b, c) => self.eliminator("case", a, &[b, c]),
            Term::CaseNd(a, b, c) => self.eliminator("case_nd", a, &[b, c]),
        }
    }
}

fn render(t: &Term, avoid: BTreeSet<String>, canonical: bool) -> String {
    let mut free = t.free_vars();
    free.extend(avoid);
    let mut p = Printer {
        out: String::new(),
        free,
        scope: Vec::new(),
        canonical,
    };
    p.term(t);
    p.out
}

/// Surface syntax for `t`. Binder names follow their hints, primed where they
/// would clash with a free variable or an enclosing binder.
pub fn print_term(t: &Term) -> String {
    render(t, BTreeSet::new(), false)
}

/// Like [`print_term`] but also keeps binder names away from `avoid`.
pub fn print_with_names(t: &Term, avoid: &[&str]) -> String {
    render(t, avoid.iter().map(|s| s.to_string()).collect(), false)
}

/// A printing that ignores binder hints, so α-equivalent terms print identically.
pub fn canonical_string(t: &Term) -> String {
    render(t, BTreeSet::new(), true)
}

#[cfg(test)]
mod tests {
    use super::super::{parse_term, Calculus, Prop};
    use super::*;

    #[test]
    fn basic_forms() {
        assert_eq!(print_term(&Term::inlr(Term::Star, Term::Star)), "inlr(star, star)");
        let id = Term::lam("x", Some(Prop::atom("A")), Term::var("x"));
        assert_eq!(print_term(&id), "lam x:A. x");
        assert_eq!(print_term(&Term::scalar_star(2.0)), "2.0 . star");
        assert_eq!(
            print_term(&Term::ScalarStar(Scalar::new(0.5, -1.0))),
            "(0.5, -1.0) . star"
        );
    }

    #[test]
    fn capture_is_visible_as_priming() {
        let t = Term::lam("y", Some(Prop::atom("A")), Term::var("x"));
        let s = t.subst("x", &Term::var("y"));
        assert_eq!(print_term(&s), "lam y':A. y");
    }

    #[test]
    fn nested_shadowing_is_primed() {
        let inner = Term::lam("x", Some(Prop::Top), Term::pair(Term::var("x"), Term::var("o")));
        let t = Term::lam("x", Some(Prop::Top), inner.subst("o", &Term::var("x")));
        let text = print_term(&t);
        assert_eq!(text, "lam x:Top. lam x':Top. pair(x', x)");
        assert_eq!(parse_term(&text, Calculus::Iplus).unwrap(), t);
    }

    #[test]
    fn applications_parenthesize() {
        let t = Term::app(
            Term::lam("x", Some(Prop::Top), Term::var("x")),
            Term::app(Term::var("f"), Term::Star),
        );
        assert_eq!(print_term(&t), "(lam x:Top. x) (f star)");
    }

    #[test]
    fn canonical_ignores_hints() {
        let a = parse_term("case(z, x. x, y. y)", Calculus::Iplus).unwrap();
        let b = parse_term("case(z, a. a, b. b)", Calculus::Iplus).unwrap();
        assert_eq!(canonical_string(&a), canonical_string(&b));
        assert_ne!(print_term(&a), print_term(&b));
    }
}
