//! Vectors as proofs: vector propositions, the proof/vector correspondence,
//! the matrix compiler and the measurement operators.

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantum::{is_vector_prop, unit_star};
use crate::rewrite::{normalize, Outcome, Ruleset, DEFAULT_FUEL};
use crate::syntax::{Binder, Prop, Term};

pub type ComplexVector = Vec<Complex64>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum QencodeError {
    #[error("{0} is not a vector proposition")]
    NotVectorProp(Prop),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("the proof does not have the shape of {0}")]
    ShapeMismatch(Prop),
    #[error("the proof is not closed")]
    NotClosed,
    #[error("normalization failed: {0}")]
    NoNormalForm(String),
    #[error("invalid matrix: {0}")]
    BadMatrix(String),
}

/// `d(A)`: the number of occurrences of `One` in a vector proposition.
pub fn dim(p: &Prop) -> Result<usize, QencodeError> {
    match p {
        Prop::One => Ok(1),
        Prop::OPlus(a, b) => Ok(dim(a)? + dim(b)?),
        _ => Err(QencodeError::NotVectorProp(p.clone())),
    }
}

fn vector_prop(p: &Prop) -> Result<usize, QencodeError> {
    if is_vector_prop(p) {
        dim(p)
    } else {
        Err(QencodeError::NotVectorProp(p.clone()))
    }
}

fn quantum_nf(t: &Term) -> Result<Term, QencodeError> {
    let trace = normalize(t, Ruleset::Quantum, DEFAULT_FUEL, &mut ChaCha8Rng::seed_from_u64(0));
    match trace.outcome {
        Outcome::NormalForm(u) => Ok(u),
        Outcome::FuelExhausted(_) => Err(QencodeError::NoNormalForm("fuel exhausted".into())),
        Outcome::Stuck { reason, .. } => Err(QencodeError::NoNormalForm(reason.to_string())),
    }
}

/// Reads an irreducible proof as a vector, without normalizing.
pub fn read_vector(t: &Term, p: &Prop) -> Result<ComplexVector, QencodeError> {
    let mismatch = || QencodeError::ShapeMismatch(p.clone());
    match (t, p) {
        (Term::ScalarStar(a), Prop::One) => Ok(vec![*a]),
        (Term::Inl(u), Prop::OPlus(a, b)) => {
            let mut v = read_vector(u, a)?;
            v.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), dim(b)?));
            Ok(v)
        }
        (Term::Inr(u), Prop::OPlus(a, b)) => {
            let mut v = vec![Complex64::new(0.0, 0.0); dim(a)?];
            v.extend(read_vector(u, b)?);
            Ok(v)
        }
        (Term::Inlr(u, w), Prop::OPlus(a, b)) => {
            let mut v = read_vector(u, a)?;
            v.extend(read_vector(w, b)?);
            Ok(v)
        }
        _ => Err(mismatch()),
    }
}

/// The vector denoted by a closed proof of `p`, read off its normal form.
pub fn to_vector(t: &Term, p: &Prop) -> Result<ComplexVector, QencodeError> {
    vector_prop(p)?;
    if !t.is_closed() {
        return Err(QencodeError::NotClosed);
    }
    read_vector(&quantum_nf(t)?, p)
}

/// The `inlr`-only proof of `p` denoting `v`.
pub fn from_vector(v: &[Complex64], p: &Prop) -> Result<Term, QencodeError> {
    let d = vector_prop(p)?;
    if v.len() != d {
        return Err(QencodeError::DimensionMismatch {
            expected: d,
            found: v.len(),
        });
    }
    fn go(v: &[Complex64], p: &Prop) -> Term {
        match p {
            Prop::OPlus(a, b) => {
                let (l, r) = v.split_at(dim(a).expect("vector proposition"));
                Term::inlr(go(l, a), go(r, b))
            }
            _ => Term::ScalarStar(v[0]),
        }
    }
    Ok(go(v, p))
}

/// A dense complex matrix, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    entries: Vec<[f64; 2]>,
}

impl ComplexMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self, QencodeError> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(QencodeError::BadMatrix(format!(
                "{rows}x{cols} with {} entries",
                entries.len()
            )));
        }
        Ok(ComplexMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self, QencodeError> {
        let cols = rows.first().map_or(0, |r| r.len());
        let entries = rows
            .iter()
            .flat_map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)))
            .collect();
        Self::new(rows.len(), cols, entries)
    }

    pub fn random(rows: usize, cols: usize, rng: &mut dyn RngCore) -> Self {
        let entries = (0..rows * cols).map(|_| random_scalar(rng)).collect();
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.entries[r * self.cols + c]
    }

    pub fn column(&self, c: usize) -> ComplexVector {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    /// The columns `range` as a new matrix.
    pub fn columns(&self, range: std::ops::Range<usize>) -> ComplexMatrix {
        let cols = range.len();
        let entries = (0..self.rows)
            .flat_map(|r| range.clone().map(move |c| (r, c)))
            .map(|(r, c)| self.get(r, c))
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols,
            entries,
        }
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<ComplexVector, QencodeError> {
        if v.len() != self.cols {
            return Err(QencodeError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect())
    }

    pub fn from_json(text: &str) -> Result<Self, QencodeError> {
        let m: MatrixJson =
            serde_json::from_str(text).map_err(|e| QencodeError::BadMatrix(e.to_string()))?;
        let entries = m.entries.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
        Self::new(m.rows, m.cols, entries)
    }

    pub fn to_json(&self) -> String {
        let m = MatrixJson {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_string(&m).expect("matrix serializes")
    }
}

pub fn vector_from_json(text: &str) -> Result<ComplexVector, QencodeError> {
    let v: Vec<[f64; 2]> =
        serde_json::from_str(text).map_err(|e| QencodeError::BadMatrix(e.to_string()))?;
    Ok(v.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
}

pub fn vector_to_json(v: &[Complex64]) -> String {
    let pairs: Vec<[f64; 2]> = v.iter().map(|z| [z.re, z.im]).collect();
    serde_json::to_string(&pairs).expect("vector serializes")
}

/// A closed proof of `a -o b` computing `m`.
pub fn compile_matrix(m: &ComplexMatrix, a: &Prop, b: &Prop) -> Result<Term, QencodeError> {
    let (da, db) = (vector_prop(a)?, vector_prop(b)?);
    if m.cols != da {
        return Err(QencodeError::DimensionMismatch {
            expected: da,
            found: m.cols,
        });
    }
    if m.rows != db {
        return Err(QencodeError::DimensionMismatch {
            expected: db,
            found: m.rows,
        });
    }
    fn go(m: &ComplexMatrix, a: &Prop, b: &Prop) -> Term {
        match a {
            Prop::OPlus(a1, a2) => {
                let d1 = dim(a1).expect("vector proposition");
                let t1 = go(&m.columns(0..d1), a1, b);
                let t2 = go(&m.columns(d1..m.cols), a2, b);
                let body = Term::Case(
                    Box::new(Term::Bound(0)),
                    Binder::new("y", Term::app(t1, Term::Bound(0))),
                    Binder::new("z", Term::app(t2, Term::Bound(0))),
                );
                Term::Lam(Some(a.clone()), Binder::new("x", body))
            }
            _ => {
                let col = from_vector(&m.column(0), b).expect("row count checked");
                Term::Lam(
                    Some(Prop::One),
                    Binder::new("x", Term::one_elim(Term::Bound(0), col)),
                )
            }
        }
    }
    Ok(go(m, a, b))
}

/// `0_n`: `0_0 = 0.star`, `0_{n+1} = inlr(0_n, 0_n)`.
pub fn zero_n(n: usize) -> Term {
    (0..n).fold(Term::scalar_star(0.0), |acc, _| Term::inlr(acc.clone(), acc))
}

pub fn boolzero() -> Term {
    Term::inl(unit_star())
}

pub fn boolone() -> Term {
    Term::inr(unit_star())
}

/// `|0>` as `inlr(1.star, 0.star)`.
pub fn ket0() -> Term {
    Term::inlr(unit_star(), Term::scalar_star(0.0))
}

pub fn ket1() -> Term {
    Term::inlr(Term::scalar_star(0.0), unit_star())
}

/// `δ^{Q_n}(x, b)`: erases a proof of `Q_n`, leaving `b` scaled by it.
pub fn delta_qn(n: usize, x: Term, b: &Term) -> Term {
    if n == 0 {
        return Term::one_elim(x, b.clone());
    }
    let branch = |hint: &str| Binder::close(hint, hint, delta_qn(n - 1, Term::var(hint), b));
    Term::CaseNd(Box::new(x), branch("y"), branch("z"))
}

/// `π_n(t)`: measures the first qubit of `t : Q_n`, giving a proof of `B`.
pub fn meas_first_of(n: usize, t: Term) -> Term {
    let branch = |hint: &str, b: Term| {
        Binder::close(hint, hint, delta_qn(n - 1, Term::var(hint), &b))
    };
    Term::CaseNd(Box::new(t), branch("x", boolzero()), branch("y", boolone()))
}

/// `π'_n(t)`: the state of `t : Q_n` after measuring its first qubit.
pub fn meas_state_of(n: usize, t: Term) -> Term {
    let zero = zero_n(n - 1);
    Term::CaseNd(
        Box::new(t),
        Binder::close("x", "x", Term::inlr(Term::var("x"), zero.clone())),
        Binder::close("y", "y", Term::inlr(zero, Term::var("y"))),
    )
}

/// `π_n` as a closed function of `Q_n -o B`.
pub fn meas_first(n: usize) -> Term {
    Term::Lam(
        Some(Prop::qn(n)),
        Binder::close("t", "t", meas_first_of(n, Term::var("t"))),
    )
}

/// `π'_n` as a closed function of `Q_n`. The linear checker rejects it: a
/// branch `inlr(x, 0_{n-1})` uses `x` in one component only.
pub fn meas_state(n: usize) -> Term {
    Term::Lam(
        Some(Prop::qn(n)),
        Binder::close("t", "t", meas_state_of(n, Term::var("t"))),
    )
}

pub fn random_scalar(rng: &mut dyn RngCore) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_vector(d: usize, rng: &mut dyn RngCore) -> ComplexVector {
    (0..d).map(|_| random_scalar(rng)).collect()
}

/// A random vector proposition of dimension exactly `d`, with a random tree shape.
pub fn random_vector_prop(d: usize, rng: &mut dyn RngCore) -> Prop {
    if d <= 1 {
        return Prop::One;
    }
    let left = rng.random_range(1..d);
    Prop::oplus(random_vector_prop(left, rng), random_vector_prop(d - left, rng))
}

/// A random closed irreducible proof of `p`, mixing `inl`, `inr` and `inlr`.
pub fn random_vector_proof(p: &Prop, rng: &mut dyn RngCore) -> Term {
    match p {
        Prop::OPlus(a, b) => match rng.random_range(0..4) {
            0 => Term::inl(random_vector_proof(a, rng)),
            1 => Term::inr(random_vector_proof(b, rng)),
            _ => Term::inlr(random_vector_proof(a, rng), random_vector_proof(b, rng)),
        },
        _ => Term::ScalarStar(random_scalar(rng)),
    }
}

pub fn max_abs_diff(u: &[Complex64], v: &[Complex64]) -> f64 {
    if u.len() != v.len() {
        return f64::INFINITY;
    }
    u.iter().zip(v).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
}

fn add(u: &[Complex64], v: &[Complex64]) -> ComplexVector {
    u.iter().zip(v).map(|(a, b)| a + b).collect()
}

fn scale(a: Complex64, u: &[Complex64]) -> ComplexVector {
    u.iter().map(|x| a * x).collect()
}

/// `u ⊗ v`, used as a map that is not linear.
pub fn tensor(u: &[Complex64], v: &[Complex64]) -> ComplexVector {
    u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearityReport {
    pub trials: usize,
    pub additivity_error: f64,
    pub homogeneity_error: f64,
    pub semimodule_error: f64,
    pub failures: Vec<String>,
}

impl LinearityReport {
    pub fn max_error(&self) -> f64 {
        self.additivity_error
            .max(self.homogeneity_error)
            .max(self.semimodule_error)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.failures.is_empty() && self.max_error() < tol
    }
}

/// Compares `t` applied to sums and scalar multiples against the
/// vector-space identities, and checks the semi-module laws on the
/// denoted vectors of `B`.
pub fn check_linear_map(
    t: &Term,
    a: &Prop,
    b: &Prop,
    trials: usize,
    seed: u64,
) -> Result<LinearityReport, QencodeError> {
    let da = vector_prop(a)?;
    vector_prop(b)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = LinearityReport {
        trials,
        additivity_error: 0.0,
        homogeneity_error: 0.0,
        semimodule_error: 0.0,
        failures: Vec::new(),
    };
    let apply = |arg: Term| to_vector(&Term::app(t.clone(), arg), b);
    for i in 0..trials {
        let (u, v) = (random_vector(da, &mut rng), random_vector(da, &mut rng));
        let (x, y) = (random_scalar(&mut rng), random_scalar(&mut rng));
        let (tu, tv) = (from_vector(&u, a)?, from_vector(&v, a)?);
        let outcome = (|| -> Result<(), QencodeError> {
            let (fu, fv) = (apply(tu.clone())?, apply(tv.clone())?);
            let fsum = apply(Term::sum(tu.clone(), tv.clone()))?;
            report.additivity_error = report.additivity_error.max(max_abs_diff(&fsum, &add(&fu, &fv)));
            let fprod = apply(Term::prod(x, tu.clone()))?;
            report.homogeneity_error = report.homogeneity_error.max(max_abs_diff(&fprod, &scale(x, &fu)));

            let pb = random_vector_proof(b, &mut rng);
            let (p1, p2, p3) = (pb.clone(), from_vector(&fu, b)?, from_vector(&fv, b)?);
            let den = |t: Term| to_vector(&t, b);
            let laws = [
                (
                    Term::sum(Term::sum(p1.clone(), p2.clone()), p3.clone()),
                    Term::sum(p1.clone(), Term::sum(p2.clone(), p3.clone())),
                ),
                (Term::sum(p1.clone(), p2.clone()), Term::sum(p2.clone(), p1.clone())),
                (
                    Term::prod(x, Term::sum(p1.clone(), p2.clone())),
                    Term::sum(Term::prod(x, p1.clone()), Term::prod(x, p2.clone())),
                ),
                (
                    Term::prod(x + y, p1.clone()),
                    Term::sum(Term::prod(x, p1.clone()), Term::prod(y, p1.clone())),
                ),
                (Term::prod(x, Term::prod(y, p1.clone())), Term::prod(x * y, p1.clone())),
            ];
            for (l, r) in laws {
                let e = max_abs_diff(&den(l)?, &den(r)?);
                report.semimodule_error = report.semimodule_error.max(e);
            }
            Ok(())
        })();
        if let Err(e) = outcome {
            report.failures.push(format!("trial {i}: {e}"));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rewrite::normalize_det;
    use crate::syntax::{parse_prop, parse_term, Calculus};
    use crate::typing::{infer_linear, TypingContext};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn q(s: &str) -> Term {
        parse_term(s, Calculus::Quantum).unwrap()
    }

    fn p(s: &str) -> Prop {
        parse_prop(s).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(dim(&Prop::One).unwrap(), 1);
        assert_eq!(dim(&Prop::qn(2)).unwrap(), 4);
        assert_eq!(dim(&p("One (+) (One (+) One)")).unwrap(), 3);
        assert!(dim(&p("One -o One")).is_err());
    }

    #[test]
    fn reading_vectors() {
        assert_eq!(to_vector(&ket0(), &Prop::qn(1)).unwrap(), vec![c(1.0), c(0.0)]);
        assert_eq!(to_vector(&boolzero(), &Prop::qn(1)).unwrap(), vec![c(1.0), c(0.0)]);
        let t = q("inlr(2.0 . star, inlr(3.0 . star, 4.0 . star))");
        assert_eq!(
            to_vector(&t, &p("One (+) (One (+) One)")).unwrap(),
            vec![c(2.0), c(3.0), c(4.0)]
        );
        assert_eq!(from_vector(&[c(1.0), c(0.0)], &Prop::qn(1)).unwrap(), ket0());
        assert_eq!(from_vector(&[c(0.5)], &Prop::One).unwrap(), Term::scalar_star(0.5));
        assert!(from_vector(&[c(0.5)], &Prop::qn(1)).is_err());
    }

    #[test]
    fn compiled_matrices_type_and_apply() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = ComplexMatrix::from_real(&[&[h, h], &[h, -h]]).unwrap();
        let t = compile_matrix(&m, &Prop::qn(1), &Prop::qn(1)).unwrap();
        assert!(t.is_closed());
        assert_eq!(
            infer_linear(&TypingContext::new(), &t).unwrap(),
            Prop::lollipop(Prop::qn(1), Prop::qn(1))
        );
        let out = to_vector(&Term::app(t, ket0()), &Prop::qn(1)).unwrap();
        assert!(max_abs_diff(&out, &[c(h), c(h)]) < 1e-9);

        let m = ComplexMatrix::from_real(&[&[2.0]]).unwrap();
        let t = compile_matrix(&m, &Prop::One, &Prop::One).unwrap();
        let out = to_vector(&Term::app(t, Term::scalar_star(3.0)), &Prop::One).unwrap();
        assert!(max_abs_diff(&out, &[c(6.0)]) < 1e-9);
    }

    #[test]
    fn measurement_operators() {
        assert_eq!(delta_qn(0, Term::var("x"), &Term::var("b")), q("one_elim(x, b)"));
        assert_eq!(
            infer_linear(&TypingContext::new(), &meas_first(2)).unwrap(),
            Prop::lollipop(Prop::qn(2), Prop::qn(1))
        );
        let err = infer_linear(&TypingContext::new(), &meas_state(2)).unwrap_err();
        assert_eq!(err.kind, crate::typing::ErrorKind::LinearUnused(vec!["x".into()]));
        let t = meas_state_of(1, q("inlr(0.5 . star, 0.25 . star)"));
        let left = crate::rewrite::replay(
            &t,
            &[crate::rewrite::Step {
                rule: "quantum:26".parse().unwrap(),
                pos: vec![],
                weight: Some(0.8),
            }],
        )
        .unwrap();
        let nf = normalize_det(&left, Ruleset::QuantumDeterministic, 100).outcome;
        assert_eq!(nf.term(), &q("inlr(0.5 . star, 0.0 . star)"));
    }

    #[test]
    fn cloning_is_not_additive() {
        let u = [c(1.0), c(0.0)];
        let v = [c(0.0), c(1.0)];
        let lhs = tensor(&add(&u, &v), &add(&u, &v));
        let rhs = add(&tensor(&u, &u), &tensor(&v, &v));
        assert!(max_abs_diff(&lhs, &rhs) > 0.5);
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = ComplexMatrix::random(2, 3, &mut ChaCha8Rng::seed_from_u64(1));
        assert_eq!(ComplexMatrix::from_json(&m.to_json()).unwrap(), m);
        assert!(ComplexMatrix::from_json(r#"{"rows":2,"cols":2,"entries":[[1,0]]}"#).is_err());
    }
}
