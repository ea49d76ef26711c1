use thiserror::Error;

use super::{Binder, Calculus, Prop, Scalar, Side, Term};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("{constructor} is not part of the {calculus} calculus")]
    NotInCalculus {
        constructor: String,
        calculus: Calculus,
    },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Arrow,
    Lolli,
    Wedge,
    Vee,
    OPlus,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Number(n) => format!("number {n:?}"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Arrow => "`=>`".into(),
            Tok::Lolli => "`-o`".into(),
            Tok::Wedge => "`/\\`".into(),
            Tok::Vee => "`\\/`".into(),
            Tok::OPlus => "`(+)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let err = |line, column, msg: String| ParseError {
        line,
        column,
        kind: ParseErrorKind::Syntax(msg),
    };
    while i < chars.len() {
        let c = chars[i];
        let (start_line, start_col) = (line, col);
        let peek = |k: usize| chars.get(i + k).copied();
        let mut advance = |n: usize, i: &mut usize| {
            for _ in 0..n {
                if chars[*i] == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
                *i += 1;
            }
        };
        if c.is_whitespace() {
            advance(1, &mut i);
            continue;
        }
        if c == '-' && peek(1) == Some('-') {
            while i < chars.len() && chars[i] != '\n' {
                advance(1, &mut i);
            }
            continue;
        }
        let (tok, len) = match c {
            '(' if peek(1) == Some('+') && peek(2) == Some(')') => (Tok::OPlus, 3),
            '(' => (Tok::LParen, 1),
            ')' => (Tok::RParen, 1),
            '[' => (Tok::LBracket, 1),
            ']' => (Tok::RBracket, 1),
            ',' => (Tok::Comma, 1),
            '.' => (Tok::Dot, 1),
            ':' => (Tok::Colon, 1),
            '=' if peek(1) == Some('>') => (Tok::Arrow, 2),
            '-' if peek(1) == Some('o') && !peek(2).is_some_and(is_ident_char) => (Tok::Lolli, 2),
            '/' if peek(1) == Some('\\') => (Tok::Wedge, 2),
            '\\' if peek(1) == Some('/') => (Tok::Vee, 2),
            c if c.is_ascii_digit() || (c == '-' && peek(1).is_some_and(|d| d.is_ascii_digit())) => {
                let mut j = i + 1;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                if j + 1 < chars.len() && chars[j] == '.' && chars[j + 1].is_ascii_digit() {
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                        k += 1;
                    }
                    if k < chars.len() && chars[k].is_ascii_digit() {
                        while k < chars.len() && chars[k].is_ascii_digit() {
                            k += 1;
                        }
                        j = k;
                    }
                }
                let literal: String = chars[i..j].iter().collect();
                let value = literal
                    .parse::<f64>()
                    .map_err(|e| err(start_line, start_col, format!("bad number `{literal}`: {e}")))?;
                (Tok::Number(value), j - i)
            }
            c if is_ident_start(c) => {
                let mut j = i + 1;
                while j < chars.len() && is_ident_char(chars[j]) {
                    j += 1;
                }
                (Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            other => return Err(err(start_line, start_col, format!("unexpected character `{other}`"))),
        };
        advance(len, &mut i);
        out.push(Spanned {
            tok,
            line: start_line,
            column: start_col,
        });
    }
    out.push(Spanned {
        tok: Tok::Eof,
        line,
        column: col,
    });
    Ok(out)
}

const KEYWORDS: &[&str] = &[
    "star", "sum", "prod", "lam", "pair", "and1", "and2", "inl", "inr", "inlr", "case", "case_nd",
    "top_elim", "bot_elim", "one_elim", "Top", "Bot", "One",
];

// A placeholder with the same head constructor as keyword `kw`, used to
// reject foreign constructors before their arguments are parsed.
fn dummy_head(kw: &str) -> Option<Term> {
    let s = || Term::Star;
    Some(match kw {
        "star" => s(),
        "sum" => Term::sum(s(), s()),
        "pair" => Term::pair(s(), s()),
        "top_elim" => Term::top_elim(s(), s()),
        "one_elim" => Term::one_elim(s(), s()),
        "prod" => Term::prod(Scalar::new(1.0, 0.0), s()),
        "and1" | "and2" => Term::and_elim(Side::First, s(), "x", s()),
        "case_nd" => Term::case_nd(s(), "x", s(), "y", s()),
        "bot_elim" => Term::bot_elim(Prop::Top, s()),
        _ => return None,
    })
}

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
    calculus: Option<Calculus>,
    scope: Vec<String>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError {
            line: s.line,
            column: s.column,
            kind: ParseErrorKind::Syntax(msg.into()),
        }
    }

    fn expect(&mut self, tok: Tok) -> PResult<()> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error_here(format!(
                "expected {}, found {}",
                tok.describe(),
                self.peek().describe()
            )))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<()> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            other => Err(self.error_here(format!("expected `{kw}`, found {}", other.describe()))),
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            other => Err(self.error_here(format!("expected identifier, found {}", other.describe()))),
        }
    }

    fn gate(&self, start: usize, t: Term) -> PResult<Term> {
        match self.calculus {
            Some(calc) if !calc.admits(&t) => {
                let s = &self.toks[start];
                Err(ParseError {
                    line: s.line,
                    column: s.column,
                    kind: ParseErrorKind::NotInCalculus {
                        constructor: t.constructor_name().to_string(),
                        calculus: calc,
                    },
                })
            }
            _ => Ok(t),
        }
    }

    fn precheck(&self, start: usize, head: Term) -> PResult<()> {
        self.gate(start, head).map(|_| ())
    }

    fn gate_prop(&self, start: usize, p: Prop) -> PResult<Prop> {
        if let Some(calc) = self.calculus {
            if let Some(conn) = p.foreign_connective(calc) {
                let s = &self.toks[start];
                return Err(ParseError {
                    line: s.line,
                    column: s.column,
                    kind: ParseErrorKind::NotInCalculus {
                        constructor: conn.to_string(),
                        calculus: calc,
                    },
                });
            }
        }
        Ok(p)
    }

    // prop := disj (('=>' | '-o') prop)?
    fn prop(&mut self) -> PResult<Prop> {
        let lhs = self.prop_disj()?;
        match self.peek() {
            Tok::Arrow => {
                self.next();
                Ok(Prop::implies(lhs, self.prop()?))
            }
            Tok::Lolli => {
                self.next();
                Ok(Prop::lollipop(lhs, self.prop()?))
            }
            _ => Ok(lhs),
        }
    }

    fn prop_disj(&mut self) -> PResult<Prop> {
        let lhs = self.prop_conj()?;
        match self.peek() {
            Tok::Vee => {
                self.next();
                Ok(Prop::disj(lhs, self.prop_disj()?))
            }
            Tok::OPlus => {
                self.next();
                Ok(Prop::oplus(lhs, self.prop_disj()?))
            }
            _ => Ok(lhs),
        }
    }

    fn prop_conj(&mut self) -> PResult<Prop> {
        let lhs = self.prop_atom()?;
        if *self.peek() == Tok::Wedge {
            self.next();
            return Ok(Prop::conj(lhs, self.prop_conj()?));
        }
        Ok(lhs)
    }

    fn prop_atom(&mut self) -> PResult<Prop> {
        match self.next() {
            Tok::LParen => {
                let p = self.prop()?;
                self.expect(Tok::RParen)?;
                Ok(p)
            }
            Tok::Ident(s) => Ok(match s.as_str() {
                "Top" => Prop::Top,
                "Bot" => Prop::Bot,
                "One" => Prop::One,
                _ if KEYWORDS.contains(&s.as_str()) => {
                    self.pos -= 1;
                    return Err(self.error_here(format!("`{s}` is not a proposition")));
                }
                _ => Prop::Atom(s),
            }),
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected proposition, found {}", other.describe())))
            }
        }
    }

    fn annotated_prop(&mut self) -> PResult<Prop> {
        let start = self.pos;
        let p = self.prop()?;
        self.gate_prop(start, p)
    }

    fn number(&mut self) -> PResult<f64> {
        match self.next() {
            Tok::Number(n) => Ok(n),
            other => {
                self.pos -= 1;
                Err(self.error_here(format!("expected number, found {}", other.describe())))
            }
        }
    }

    // scalar := number | '(' number ',' number ')'
    fn scalar(&mut self) -> PResult<Scalar> {
        if *self.peek() == Tok::LParen {
            self.next();
            let re = self.number()?;
            self.expect(Tok::Comma)?;
            let im = self.number()?;
            self.expect(Tok::RParen)?;
            Ok(Scalar::new(re, im))
        } else {
            Ok(Scalar::new(self.number()?, 0.0))
        }
    }

    fn term(&mut self) -> PResult<Term> {
        if matches!(self.peek(), Tok::Ident(s) if s == "lam") {
            let start = self.pos;
            self.next();
            let x = self.ident()?;
            let ann = if *self.peek() == Tok::Colon {
                self.next();
                Some(self.annotated_prop()?)
            } else {
                None
            };
            self.expect(Tok::Dot)?;
            let body = self.scoped(&x)?;
            return self.gate(start, Term::Lam(ann, body));
        }
        let start = self.pos;
        let mut head = self.atom()?;
        while self.starts_atom() {
            let arg = self.atom()?;
            head = self.gate(start, Term::app(head, arg))?;
        }
        Ok(head)
    }

    fn starts_atom(&self) -> bool {
        match self.peek() {
            Tok::LParen | Tok::Number(_) => true,
            Tok::Ident(s) => s != "lam",
            _ => false,
        }
    }

    fn scoped(&mut self, x: &str) -> PResult<Binder> {
        self.scope.push(x.to_string());
        let body = self.term();
        self.scope.pop();
        Ok(Binder::new(x, body?))
    }

    // binder := ident '.' term
    fn binder(&mut self) -> PResult<Binder> {
        let x = self.ident()?;
        self.expect(Tok::Dot)?;
        self.scoped(&x)
    }

    fn scalar_star_tail(&mut self, a: Scalar) -> PResult<Term> {
        self.expect(Tok::Dot)?;
        self.expect_keyword("star")?;
        Ok(Term::ScalarStar(a))
    }

    fn atom(&mut self) -> PResult<Term> {
        let start = self.pos;
        let t = match self.peek().clone() {
            Tok::Number(n) => {
                self.precheck(start, Term::scalar_star(n))?;
                self.next();
                self.scalar_star_tail(Scalar::new(n, 0.0))?
            }
            Tok::LParen => {
                self.next();
                if let Tok::Number(re) = *self.peek() {
                    if matches!(self.peek_at(1), Tok::Comma) {
                        self.next();
                        self.next();
                        let im = self.number()?;
                        self.expect(Tok::RParen)?;
                        self.precheck(start, Term::scalar_star(re))?;
                        self.scalar_star_tail(Scalar::new(re, im))?
                    } else {
                        let t = self.term()?;
                        self.expect(Tok::RParen)?;
                        return Ok(t);
                    }
                } else {
                    let t = self.term()?;
                    self.expect(Tok::RParen)?;
                    return Ok(t);
                }
            }
            Tok::Ident(s) => {
                self.next();
                if let Some(head) = dummy_head(&s) {
                    self.precheck(start, head)?;
                }
                match s.as_str() {
                    "star" => Term::Star,
                    "sum" => {
                        let (a, b) = self.two_args()?;
                        Term::sum(a, b)
                    }
                    "pair" => {
                        let (a, b) = self.two_args()?;
                        Term::pair(a, b)
                    }
                    "top_elim" => {
                        let (a, b) = self.two_args()?;
                        Term::top_elim(a, b)
                    }
                    "one_elim" => {
                        let (a, b) = self.two_args()?;
                        Term::one_elim(a, b)
                    }
                    "prod" => {
                        self.expect(Tok::LParen)?;
                        let a = self.scalar()?;
                        self.expect(Tok::Comma)?;
                        let t = self.term()?;
                        self.expect(Tok::RParen)?;
                        Term::prod(a, t)
                    }
                    "inl" | "inr" => {
                        self.expect(Tok::LParen)?;
                        let t = self.term()?;
                        self.expect(Tok::RParen)?;
                        if s == "inl" {
                            Term::inl(t)
                        } else {
                            Term::inr(t)
                        }
                    }
                    "and1" | "and2" => {
                        self.expect(Tok::LParen)?;
                        let t = self.term()?;
                        self.expect(Tok::Comma)?;
                        let b = self.binder()?;
                        self.expect(Tok::RParen)?;
                        let side = if s == "and1" { Side::First } else { Side::Second };
                        Term::AndElim(side, Box::new(t), b)
                    }
                    "inlr" => {
                        self.expect(Tok::LParen)?;
                        let t = self.term()?;
                        self.expect(Tok::Comma)?;
                        let binder_form = matches!(self.peek(), Tok::Ident(_))
                            && *self.peek_at(1) == Tok::Dot
                            && !matches!(self.peek(), Tok::Ident(k) if KEYWORDS.contains(&k.as_str()));
                        let head = if binder_form {
                            Term::inlr_bind(Term::Star, "x", Term::Star, "y", Term::Star)
                        } else {
                            Term::inlr(Term::Star, Term::Star)
                        };
                        self.precheck(start, head)?;
                        if binder_form {
                            let b1 = self.binder()?;
                            self.expect(Tok::Comma)?;
                            let b2 = self.binder()?;
                            self.expect(Tok::RParen)?;
                            Term::InlrBind(Box::new(t), b1, b2)
                        } else {
                            let u = self.term()?;
                            self.expect(Tok::RParen)?;
                            Term::inlr(t, u)
                        }
                    }
                    "case" | "case_nd" => {
                        self.expect(Tok::LParen)?;
                        let t = self.term()?;
                        self.expect(Tok::Comma)?;
                        let b1 = self.binder()?;
                        self.expect(Tok::Comma)?;
                        let b2 = self.binder()?;
                        self.expect(Tok::RParen)?;
                        if s == "case" {
                            Term::Case(Box::new(t), b1, b2)
                        } else {
                            Term::CaseNd(Box::new(t), b1, b2)
                        }
                    }
                    "bot_elim" => {
                        self.expect(Tok::LBracket)?;
                        let p = self.annotated_prop()?;
                        self.expect(Tok::RBracket)?;
                        self.expect(Tok::LParen)?;
                        let t = self.term()?;
                        self.expect(Tok::RParen)?;
                        Term::bot_elim(p, t)
                    }
                    _ if KEYWORDS.contains(&s.as_str()) => {
                        self.pos = start;
                        return Err(self.error_here(format!("unexpected keyword `{s}`")));
                    }
                    _ => match self.scope.iter().rev().position(|n| *n == s) {
                        Some(k) => Term::Bound(k),
                        None => Term::Free(s),
                    },
                }
            }
            other => {
                return Err(self.error_here(format!("expected term, found {}", other.describe())))
            }
        };
        self.gate(start, t)
    }

    fn two_args(&mut self) -> PResult<(Term, Term)> {
        self.expect(Tok::LParen)?;
        let a = self.term()?;
        self.expect(Tok::Comma)?;
        let b = self.term()?;
        self.expect(Tok::RParen)?;
        Ok((a, b))
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.error_here(format!("unexpected {}", self.peek().describe())))
        }
    }
}

/// Parses a proof term, rejecting constructors outside `calculus`.
pub fn parse_term(text: &str, calculus: Calculus) -> Result<Term, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        calculus: Some(calculus),
        scope: Vec::new(),
    };
    let t = p.term()?;
    p.finish()?;
    Ok(t)
}

/// Parses a proposition (no calculus gating).
pub fn parse_prop(text: &str) -> Result<Prop, ParseError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
        calculus: None,
        scope: Vec::new(),
    };
    let prop = p.prop()?;
    p.finish()?;
    Ok(prop)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iplus(s: &str) -> Term {
        parse_term(s, Calculus::Iplus).unwrap()
    }

    #[test]
    fn inlr_of_stars() {
        assert_eq!(iplus("inlr(star, star)"), Term::inlr(Term::Star, Term::Star));
    }

    #[test]
    fn case_binders_are_positional() {
        let t = iplus("case(inl(star), x. x, y. y)");
        let expected = Term::case(Term::inl(Term::Star), "x", Term::var("x"), "y", Term::var("y"));
        assert_eq!(t, expected);
    }

    #[test]
    fn sum_rejected_in_cc() {
        let err = parse_term("sum(1.0 . star, 2.0 . star)", Calculus::Cc).unwrap_err();
        assert!(matches!(
            err.kind,
            ParseErrorKind::NotInCalculus { ref constructor, calculus: Calculus::Cc } if constructor == "sum"
        ));
        assert_eq!((err.line, err.column), (1, 1));
    }

    #[test]
    fn scalar_forms() {
        let q = |s| parse_term(s, Calculus::Quantum).unwrap();
        assert_eq!(q("2.0 . star"), Term::scalar_star(2.0));
        assert_eq!(q("0.star"), Term::scalar_star(0.0));
        assert_eq!(q("(0.0, 1.0) . star"), Term::ScalarStar(Scalar::new(0.0, 1.0)));
        assert_eq!(q("(-1.5 . star)"), Term::scalar_star(-1.5));
        assert_eq!(
            q("prod((1e-3, -2), 3 . star)"),
            Term::prod(Scalar::new(1e-3, -2.0), Term::scalar_star(3.0))
        );
    }

    #[test]
    fn application_is_left_associative() {
        let t = iplus("f x y");
        assert_eq!(t, Term::app(Term::app(Term::var("f"), Term::var("x")), Term::var("y")));
    }

    #[test]
    fn props_are_right_associative() {
        let p = parse_prop("A => B => C").unwrap();
        assert_eq!(p, Prop::implies(Prop::atom("A"), Prop::implies(Prop::atom("B"), Prop::atom("C"))));
        let q = parse_prop("A \\/ B /\\ C => D").unwrap();
        assert_eq!(
            q,
            Prop::implies(
                Prop::disj(Prop::atom("A"), Prop::conj(Prop::atom("B"), Prop::atom("C"))),
                Prop::atom("D")
            )
        );
        assert_eq!(parse_prop("One (+) One -o One").unwrap(), Prop::lollipop(Prop::qn(1), Prop::One));
    }

    #[test]
    fn comments_are_skipped() {
        let t = iplus("-- identity\nlam x:Top. -- body\n x");
        assert_eq!(t, Term::lam("x", Some(Prop::Top), Term::var("x")));
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_term("pair(star,\n  )", Calculus::Iplus).unwrap_err();
        assert_eq!((err.line, err.column), (2, 3));
        assert!(matches!(err.kind, ParseErrorKind::Syntax(_)));
    }

    #[test]
    fn foreign_connective_in_annotation() {
        let err = parse_term("lam x:One. x", Calculus::Iplus).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NotInCalculus { .. }));
    }

    #[test]
    fn cc_binder_inlr() {
        let t = parse_term("inlr(t, x. x, y. y)", Calculus::Cc).unwrap();
        assert_eq!(t, Term::inlr_bind(Term::var("t"), "x", Term::var("x"), "y", Term::var("y")));
        assert!(parse_term("inlr(star, star)", Calculus::Cc).is_err());
    }
}
