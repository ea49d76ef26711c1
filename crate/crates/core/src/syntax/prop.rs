use std::fmt;

use super::Calculus;

/// A formula of either logic.
///
/// `Impl`, `Conj` and `Disj` belong to the intuitionistic calculi, `One`,
/// `Lollipop` and `OPlus` to the quantum one. `Top`, `Bot` are intuitionistic
/// only; atoms are shared.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Top,
    Bot,
    Impl(Box<Prop>, Box<Prop>),
    Conj(Box<Prop>, Box<Prop>),
    Disj(Box<Prop>, Box<Prop>),
    One,
    Lollipop(Box<Prop>, Box<Prop>),
    OPlus(Box<Prop>, Box<Prop>),
    Atom(String),
}

impl Prop {
    pub fn atom(name: impl Into<String>) -> Prop {
        Prop::Atom(name.into())
    }

    pub fn implies(a: Prop, b: Prop) -> Prop {
        Prop::Impl(Box::new(a), Box::new(b))
    }

    pub fn conj(a: Prop, b: Prop) -> Prop {
        Prop::Conj(Box::new(a), Box::new(b))
    }

    pub fn disj(a: Prop, b: Prop) -> Prop {
        Prop::Disj(Box::new(a), Box::new(b))
    }

    pub fn lollipop(a: Prop, b: Prop) -> Prop {
        Prop::Lollipop(Box::new(a), Box::new(b))
    }

    pub fn oplus(a: Prop, b: Prop) -> Prop {
        Prop::OPlus(Box::new(a), Box::new(b))
    }

    /// The balanced vector proposition of dimension `2^n`.
    pub fn qn(n: usize) -> Prop {
        (0..n).fold(Prop::One, |acc, _| Prop::oplus(acc.clone(), acc))
    }

    /// Returns the first connective that the calculus does not admit.
    pub fn foreign_connective(&self, calculus: Calculus) -> Option<&'static str> {
        let quantum = calculus == Calculus::Quantum;
        match self {
            Prop::Atom(_) => None,
            Prop::Top if quantum => Some("Top"),
            Prop::Bot if quantum => Some("Bot"),
            Prop::One if !quantum => Some("One"),
            Prop::Top | Prop::Bot | Prop::One => None,
            Prop::Impl(a, b) | Prop::Conj(a, b) | Prop::Disj(a, b) => {
                if quantum {
                    return Some(match self {
                        Prop::Impl(..) => "=>",
                        Prop::Conj(..) => "/\\",
                        _ => "\\/",
                    });
                }
                a.foreign_connective(calculus)
                    .or_else(|| b.foreign_connective(calculus))
            }
            Prop::Lollipop(a, b) | Prop::OPlus(a, b) => {
                if !quantum {
                    return Some(if matches!(self, Prop::Lollipop(..)) {
                        "-o"
                    } else {
                        "(+)"
                    });
                }
                a.foreign_connective(calculus)
                    .or_else(|| b.foreign_connective(calculus))
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Prop::Top | Prop::Bot | Prop::One | Prop::Atom(_) => 0,
            Prop::Impl(a, b)
            | Prop::Conj(a, b)
            | Prop::Disj(a, b)
            | Prop::Lollipop(a, b)
            | Prop::OPlus(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    fn level(&self) -> u8 {
        match self {
            Prop::Impl(..) | Prop::Lollipop(..) => 1,
            Prop::Disj(..) | Prop::OPlus(..) => 2,
            Prop::Conj(..) => 3,
            _ => 4,
        }
    }

    fn binary(&self) -> Option<(&Prop, &'static str, &Prop)> {
        match self {
            Prop::Impl(a, b) => Some((a, "=>", b)),
            Prop::Conj(a, b) => Some((a, "/\\", b)),
            Prop::Disj(a, b) => Some((a, "\\/", b)),
            Prop::Lollipop(a, b) => Some((a, "-o", b)),
            Prop::OPlus(a, b) => Some((a, "(+)", b)),
            _ => None,
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, p: &Prop, min_level: u8) -> fmt::Result {
    if p.level() < min_level {
        write!(f, "({p})")
    } else {
        write!(f, "{p}")
    }
}

// Binary connectives are right-associative; a left operand at the same level
// needs parentheses, a right operand does not.
impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prop::Top => f.write_str("Top"),
            Prop::Bot => f.write_str("Bot"),
            Prop::One => f.write_str("One"),
            Prop::Atom(name) => f.write_str(name),
            _ => {
                let (a, op, b) = self.binary().expect("binary connective");
                let level = self.level();
                write_operand(f, a, level + 1)?;
                write!(f, " {op} ")?;
                write_operand(f, b, level)
            }
        }
    }
}
