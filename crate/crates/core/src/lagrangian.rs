//! Quadratic Lagrangians
//! L = ½q̇ᵀAq̇ + q̇ᵀBq + ½qᵀCq + Dᵀq̇ + Eᵀq + ε
//! with power-series coefficients, and their Euler-Lagrange systems.

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rational::{format_rational, parse_rational, Rational};
use crate::series::{Guard, Series};

#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticLagrangian {
    n: usize,
    a: Matrix<Series>,
    b: Matrix<Series>,
    c: Matrix<Series>,
    d: Vec<Series>,
    e: Vec<Series>,
    eps: Series,
}

fn series_matrix_eval(m: &Matrix<Series>, t: &Rational, guard: Option<&Guard>) -> Result<Matrix<Rational>> {
    m.try_map(|s| eval(s, t, guard))
}

pub(crate) fn eval(s: &Series, t: &Rational, guard: Option<&Guard>) -> Result<Rational> {
    match guard {
        Some(g) => s.eval_guarded(t, g),
        None => s.eval(t),
    }
}

pub(crate) fn eval_vec(v: &[Series], t: &Rational, guard: Option<&Guard>) -> Result<Vec<Rational>> {
    v.iter().map(|s| eval(s, t, guard)).collect()
}

impl QuadraticLagrangian {
    pub fn new(
        a: Matrix<Series>,
        b: Matrix<Series>,
        c: Matrix<Series>,
        d: Vec<Series>,
        e: Vec<Series>,
        eps: Series,
    ) -> Result<Self> {
        let n = a.rows();
        let square = |m: &Matrix<Series>| m.rows() == n && m.cols() == n;
        if n == 0 || !square(&a) || !square(&b) || !square(&c) || d.len() != n || e.len() != n {
            return Err(Error::InvalidLagrangian("inconsistent dimensions".into()));
        }
        let symmetric = |m: &Matrix<Series>| (0..n).all(|i| (0..i).all(|j| m[(i, j)] == m[(j, i)]));
        if !symmetric(&a) {
            return Err(Error::InvalidLagrangian("A must be symmetric".into()));
        }
        if !symmetric(&c) {
            return Err(Error::InvalidLagrangian("C must be symmetric".into()));
        }
        let l = QuadraticLagrangian { n, a, b, c, d, e, eps };
        if l.a_at(&Rational::zero())?.det().is_zero() {
            return Err(Error::Singular("A(0)"));
        }
        Ok(l)
    }

    /// Constant coefficients.
    pub fn constant(
        a: &Matrix<Rational>,
        b: &Matrix<Rational>,
        c: &Matrix<Rational>,
        d: &[Rational],
        e: &[Rational],
        eps: &Rational,
    ) -> Result<Self> {
        let lift = |m: &Matrix<Rational>| m.map(|x| Series::constant(x.clone()));
        let liftv = |v: &[Rational]| v.iter().map(|x| Series::constant(x.clone())).collect();
        Self::new(lift(a), lift(b), lift(c), liftv(d), liftv(e), Series::constant(eps.clone()))
    }

    /// L = ½|q̇|².
    pub fn free_particle(n: usize) -> Self {
        let z = Matrix::<Rational>::zeros(n, n);
        let zv = vec![Rational::zero(); n];
        Self::constant(&Matrix::identity(n), &z, &z, &zv, &zv, &Rational::zero()).expect("valid")
    }

    /// L = ½q̇² − ½ω²q².
    pub fn oscillator(omega_sq: &Rational) -> Self {
        let one = |x: Rational| Matrix::from_rows(vec![vec![x]]).unwrap();
        Self::constant(
            &one(Rational::from_integer(1.into())),
            &one(Rational::zero()),
            &one(-omega_sq.clone()),
            &[Rational::zero()],
            &[Rational::zero()],
            &Rational::zero(),
        )
        .expect("valid")
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &Matrix<Series> {
        &self.a
    }

    pub fn b(&self) -> &Matrix<Series> {
        &self.b
    }

    pub fn c(&self) -> &Matrix<Series> {
        &self.c
    }

    pub fn d(&self) -> &[Series] {
        &self.d
    }

    pub fn e(&self) -> &[Series] {
        &self.e
    }

    pub fn eps(&self) -> &Series {
        &self.eps
    }

    pub fn a_at(&self, t: &Rational) -> Result<Matrix<Rational>> {
        series_matrix_eval(&self.a, t, None)
    }

    pub(crate) fn a_at_guarded(&self, t: &Rational, g: Option<&Guard>) -> Result<Matrix<Rational>> {
        series_matrix_eval(&self.a, t, g)
    }

    pub(crate) fn b_at_guarded(&self, t: &Rational, g: Option<&Guard>) -> Result<Matrix<Rational>> {
        series_matrix_eval(&self.b, t, g)
    }

    pub(crate) fn d_at_guarded(&self, t: &Rational, g: Option<&Guard>) -> Result<Vec<Rational>> {
        eval_vec(&self.d, t, g)
    }

    /// L evaluated on a path given by its value and velocity at time t.
    pub fn eval(&self, t: &Rational, q: &[Rational], qdot: &[Rational]) -> Result<Rational> {
        let n = self.n;
        let a = self.a_at(t)?;
        let b = series_matrix_eval(&self.b, t, None)?;
        let c = series_matrix_eval(&self.c, t, None)?;
        let d = eval_vec(&self.d, t, None)?;
        let e = eval_vec(&self.e, t, None)?;
        let mut l = self.eps.eval(t)?;
        let half = Rational::new(1.into(), 2.into());
        for i in 0..n {
            for j in 0..n {
                l += &half * &qdot[i] * &a[(i, j)] * &qdot[j];
                l += &qdot[i] * &b[(i, j)] * &q[j];
                l += &half * &q[i] * &c[(i, j)] * &q[j];
            }
            l += &d[i] * &qdot[i] + &e[i] * &q[i];
        }
        Ok(l)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: LagrangianDoc =
            serde_json::from_str(s).map_err(|e| Error::InvalidLagrangian(e.to_string()))?;
        doc.into_lagrangian()
    }

    pub fn to_json(&self) -> String {
        let ser = |s: &Series| -> Vec<String> {
            let (start, c) = s.coefficients();
            let mut out = vec!["0".to_string(); start.max(0) as usize];
            out.extend(c.iter().map(format_rational));
            if out.is_empty() {
                out.push("0".into());
            }
            out
        };
        let mat = |m: &Matrix<Series>| -> Vec<Vec<Vec<String>>> {
            (0..m.rows()).map(|i| m.row(i).iter().map(ser).collect()).collect()
        };
        let doc = LagrangianDoc {
            n: self.n,
            a: mat(&self.a),
            b: Some(mat(&self.b)),
            c: Some(mat(&self.c)),
            d: Some(self.d.iter().map(ser).collect()),
            e: Some(self.e.iter().map(ser).collect()),
            eps: Some(ser(&self.eps)),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

/// JSON form: each coefficient function is an array of rational strings
/// [c_0, c_1, …] meaning c_0 + c_1 t + …. Only `n` and `A` are required.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LagrangianDoc {
    n: usize,
    #[serde(rename = "A")]
    a: Vec<Vec<Vec<String>>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<Vec<Vec<String>>>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    c: Option<Vec<Vec<Vec<String>>>>,
    #[serde(rename = "D", default, skip_serializing_if = "Option::is_none")]
    d: Option<Vec<Vec<String>>>,
    #[serde(rename = "E", default, skip_serializing_if = "Option::is_none")]
    e: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    eps: Option<Vec<String>>,
}

impl LagrangianDoc {
    fn into_lagrangian(self) -> Result<QuadraticLagrangian> {
        let n = self.n;
        let series = |c: &[String]| -> Result<Series> {
            Ok(Series::polynomial(c.iter().map(|s| parse_rational(s)).collect::<Result<_>>()?))
        };
        let matrix = |m: Option<&Vec<Vec<Vec<String>>>>, name: &str| -> Result<Matrix<Series>> {
            match m {
                None => Ok(Matrix::from_fn(n, n, |_, _| Series::zero())),
                Some(rows) => {
                    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                        return Err(Error::InvalidLagrangian(format!("{name} must be {n}×{n}")));
                    }
                    let rows = rows
                        .iter()
                        .map(|r| r.iter().map(|c| series(c)).collect::<Result<Vec<_>>>())
                        .collect::<Result<Vec<_>>>()?;
                    Matrix::from_rows(rows)
                }
            }
        };
        let vector = |v: Option<&Vec<Vec<String>>>, name: &str| -> Result<Vec<Series>> {
            match v {
                None => Ok(vec![Series::zero(); n]),
                Some(v) if v.len() == n => v.iter().map(|c| series(c)).collect(),
                Some(_) => Err(Error::InvalidLagrangian(format!("{name} must have {n} entries"))),
            }
        };
        QuadraticLagrangian::new(
            matrix(Some(&self.a), "A")?,
            matrix(self.b.as_ref(), "B")?,
            matrix(self.c.as_ref(), "C")?,
            vector(self.d.as_ref(), "D")?,
            vector(self.e.as_ref(), "E")?,
            match &self.eps {
                Some(c) => series(c)?,
                None => Series::zero(),
            },
        )
    }
}

/// A q̈ + damping·q̇ + stiffness·q = source.
#[derive(Clone, Debug, PartialEq)]
pub struct OdeSystem {
    pub a: Matrix<Series>,
    pub damping: Matrix<Series>,
    pub stiffness: Matrix<Series>,
    pub source: Vec<Series>,
}

/// A q̈ + (Ȧ + B − Bᵀ) q̇ + (Ḃ − C) q = E − Ḋ.
pub fn euler_lagrange(l: &QuadraticLagrangian) -> OdeSystem {
    let n = l.n;
    let damping = Matrix::from_fn(n, n, |i, j| {
        l.a[(i, j)]
            .derivative()
            .add(&l.b[(i, j)])
            .sub(&l.b[(j, i)])
    });
    let stiffness = Matrix::from_fn(n, n, |i, j| l.b[(i, j)].derivative().sub(&l.c[(i, j)]));
    let source = (0..n).map(|i| l.e[i].sub(&l.d[i].derivative())).collect();
    OdeSystem {
        a: l.a.clone(),
        damping,
        stiffness,
        source,
    }
}
