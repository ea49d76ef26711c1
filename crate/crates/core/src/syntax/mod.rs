//! Surface syntax: propositions, proof terms, parsing and printing.
//!
//! Terms are locally nameless. Bound variables are de Bruijn indices counted
//! from the innermost binder and free variables carry names, so α-equivalent
//! terms are structurally equal and substitution never captures.

mod parse;
mod print;
mod prop;
mod term;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use parse::{parse_prop, parse_term, ParseError, ParseErrorKind};
pub use print::{canonical_string, print_term, print_with_names};
pub use prop::Prop;
pub use term::{
    alpha_eq, alpha_eq_approx, bx, fresh_name, pair_subst, path_to_string, subst, Binder, Path,
    Scalar, Side, Term,
};

/// The three calculi handled by the workbench.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Calculus {
    /// Intuitionistic calculus with `sum` and the two-premise `inlr`.
    Iplus,
    /// Linear calculus with scalars, `prod` and `case_nd`.
    Quantum,
    /// Intuitionistic calculus with commuting cuts and the binder `inlr`.
    Cc,
}

impl Calculus {
    pub const ALL: [Calculus; 3] = [Calculus::Iplus, Calculus::Quantum, Calculus::Cc];

    pub fn name(self) -> &'static str {
        match self {
            Calculus::Iplus => "iplus",
            Calculus::Quantum => "quantum",
            Calculus::Cc => "cc",
        }
    }

    /// Whether the head constructor of `t` belongs to this calculus.
    pub fn admits(self, t: &Term) -> bool {
        use Calculus::*;
        match t {
            Term::Bound(_)
            | Term::Free(_)
            | Term::Lam(..)
            | Term::App(..)
            | Term::Inl(_)
            | Term::Inr(_)
            | Term::Case(..) => true,
            Term::Star | Term::TopElim(..) | Term::BotElim(..) | Term::Pair(..) | Term::AndElim(..) => {
                self != Quantum
            }
            Term::Sum(..) | Term::Inlr(..) => self != Cc,
            Term::ScalarStar(_) | Term::Prod(..) | Term::CaseNd(..) | Term::OneElim(..) => {
                self == Quantum
            }
            Term::InlrBind(..) => self == Cc,
        }
    }

    /// First constructor (in preorder) that the calculus does not admit.
    pub fn foreign_constructor(self, t: &Term) -> Option<&'static str> {
        if !self.admits(t) {
            return Some(t.constructor_name());
        }
        t.children()
            .into_iter()
            .find_map(|c| self.foreign_constructor(c))
    }
}

impl fmt::Display for Calculus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Calculus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "iplus" => Ok(Calculus::Iplus),
            "quantum" => Ok(Calculus::Quantum),
            "cc" => Ok(Calculus::Cc),
            other => Err(format!("unknown calculus `{other}` (expected iplus, quantum or cc)")),
        }
    }
}
