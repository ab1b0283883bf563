//! Adeles with finite support, the adelic product formulas, and adelic
//! kernels with their vacuum and group conditions.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use crate::action::Boundary;
use crate::error::{Error, Result};
use crate::integrals::ball_gaussian_1d;
use crate::kernel::{kernel_amplitude, normalization, Propagator};
use crate::linalg::Matrix;
use crate::number_theory::{chi, hilbert, lambda, omega};
use crate::padic::{norm, prime_factors, valuation, Order, Prime, Valuation};
use crate::phase::{Amplitude, Sign, UnitPhase};
use crate::rational::Rational;
use crate::residue::{ball_integral, QuadraticPhase, Strategy};

/// An element of the restricted product of R and the Q_p. Components are
/// listed at finitely many primes; every other component is a p-adic integer,
/// known exactly only for principal adeles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Adele {
    real: Rational,
    finite: BTreeMap<Prime, Rational>,
    diagonal: Option<Rational>,
}

impl Adele {
    /// x embedded diagonally; lists the primes dividing its denominator.
    pub fn principal(x: Rational) -> Self {
        let finite = prime_factors(x.denom())
            .into_iter()
            .map(|p| (p, x.clone()))
            .collect();
        Adele {
            real: x.clone(),
            finite,
            diagonal: Some(x),
        }
    }

    /// A general adele; unlisted components are unspecified p-adic integers.
    pub fn new(real: Rational, finite: BTreeMap<Prime, Rational>) -> Self {
        Adele {
            real,
            finite,
            diagonal: None,
        }
    }

    pub fn real(&self) -> &Rational {
        &self.real
    }

    pub fn finite(&self) -> &BTreeMap<Prime, Rational> {
        &self.finite
    }

    pub fn is_principal(&self) -> bool {
        self.diagonal.is_some()
    }

    /// The component at v when it is determined.
    pub fn component(&self, v: &Valuation) -> Option<Rational> {
        match v {
            Valuation::Infinity => Some(self.real.clone()),
            Valuation::Prime(p) => self.finite.get(p).cloned().or_else(|| self.diagonal.clone()),
        }
    }

    fn combine(&self, o: &Self, f: impl Fn(&Rational, &Rational) -> Rational) -> Result<Self> {
        if let (Some(a), Some(b)) = (&self.diagonal, &o.diagonal) {
            return Ok(Adele::principal(f(a, b)));
        }
        let mut finite = BTreeMap::new();
        for p in self.finite.keys().chain(o.finite.keys()) {
            let v = Valuation::Prime(p.clone());
            let (Some(a), Some(b)) = (self.component(&v), o.component(&v)) else {
                return Err(Error::Invalid(format!("adele component at {p} is unspecified")));
            };
            finite.insert(p.clone(), f(&a, &b));
        }
        Ok(Adele::new(f(&self.real, &o.real), finite))
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a + b)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.combine(o, |a, b| a * b)
    }
}

impl fmt::Display for Adele {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(∞: {}", crate::rational::format_rational(&self.real))?;
        for (p, x) in &self.finite {
            write!(f, ", {p}: {}", crate::rational::format_rational(x))?;
        }
        f.write_str(")")
    }
}

fn support(xs: &[&Rational]) -> Vec<Prime> {
    let mut ps: Vec<Prime> = xs
        .iter()
        .flat_map(|x| prime_factors(x.numer()).into_iter().chain(prime_factors(x.denom())))
        .collect();
    ps.sort();
    ps.dedup();
    ps
}

/// |x|_∞·∏_p |x|_p.
pub fn norm_product(x: &Rational) -> Result<Rational> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("x"));
    }
    Ok(support(&[x])
        .into_iter()
        .fold(x.abs(), |acc, p| acc * norm(x, &Valuation::Prime(p))))
}

/// Phase of λ_∞(x)·∏_p λ_p(x).
pub fn lambda_product(x: &Rational) -> Result<UnitPhase> {
    if x.is_zero() {
        return Err(Error::ZeroArgument("x"));
    }
    let two = Prime::new(2).expect("prime");
    let mut phase = lambda(&Valuation::Infinity, x) + lambda(&Valuation::Prime(two.clone()), x);
    for p in support(&[x]) {
        if p == two {
            continue;
        }
        if let Order::Finite(m) = valuation(x, &p) {
            if m % 2 != 0 {
                phase += lambda(&Valuation::Prime(p), x);
            }
        }
    }
    Ok(phase)
}

/// (x, y)_∞·∏_p (x, y)_p.
pub fn hilbert_product(x: &Rational, y: &Rational) -> Result<Sign> {
    let two = Prime::new(2).expect("prime");
    let mut places = vec![Valuation::Infinity, Valuation::Prime(two.clone())];
    places.extend(support(&[x, y]).into_iter().filter(|p| *p != two).map(Valuation::Prime));
    places
        .iter()
        .try_fold(Sign::Plus, |acc, v| Ok(acc * hilbert(v, x, y)?))
}

/// Phase of χ_∞(x)·∏_p χ_p(x).
pub fn chi_product(x: &Rational) -> UnitPhase {
    prime_factors(x.denom())
        .into_iter()
        .fold(chi(&Valuation::Infinity, x), |acc, p| acc + chi(&Valuation::Prime(p), x))
}

/// Boundary data with adelic times and positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdelicBoundary {
    pub t_prime: Adele,
    pub t_double_prime: Adele,
    pub x_prime: Vec<Adele>,
    pub x_double_prime: Vec<Adele>,
}

impl AdelicBoundary {
    pub fn principal(b: &Boundary) -> Self {
        let embed = |xs: &[Rational]| xs.iter().cloned().map(Adele::principal).collect();
        AdelicBoundary {
            t_prime: Adele::principal(b.t_prime.clone()),
            t_double_prime: Adele::principal(b.t_double_prime.clone()),
            x_prime: embed(&b.x_prime),
            x_double_prime: embed(&b.x_double_prime),
        }
    }

    /// The real or p-adic boundary data at v.
    pub fn at(&self, v: &Valuation) -> Result<Boundary> {
        let get = |a: &Adele| {
            a.component(v)
                .ok_or_else(|| Error::Invalid(format!("boundary component at {v} is unspecified")))
        };
        let all = |xs: &[Adele]| xs.iter().map(get).collect::<Result<Vec<_>>>();
        Boundary::new(
            get(&self.t_prime)?,
            all(&self.x_prime)?,
            get(&self.t_double_prime)?,
            all(&self.x_double_prime)?,
        )
        .map_err(|e| e.at(v))
    }
}

/// Vacuum check at a sampled prime outside the listed set.
#[derive(Clone, Debug, PartialEq)]
pub struct TailSample {
    pub prime: Prime,
    /// `None` when the check does not apply (n ≠ 1).
    pub vacuum: Option<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdelicKernelValue {
    pub per_valuation: BTreeMap<Valuation, Amplitude>,
    pub tail_certificate: Vec<TailSample>,
    pub total: Amplitude,
}

pub const DEFAULT_TAIL_SAMPLES: usize = 3;

/// Kernels at ∞ and at the listed primes and their product; the remaining
/// primes are certified only by vacuum checks at `tail` sampled primes.
pub fn adelic_kernel(
    prop: &Propagator,
    b: &AdelicBoundary,
    primes: &[Prime],
    tail: usize,
    budget: u64,
) -> Result<AdelicKernelValue> {
    let mut per_valuation = BTreeMap::new();
    let places = std::iter::once(Valuation::Infinity).chain(primes.iter().cloned().map(Valuation::Prime));
    for v in places {
        let k = prop.kernel(&v, &b.at(&v)?)?;
        per_valuation.insert(v, k.amplitude);
    }
    let mut tail_certificate = Vec::new();
    let mut candidate = 2u64;
    while tail_certificate.len() < tail {
        candidate += 1;
        let Ok(p) = Prime::new(candidate) else { continue };
        if primes.contains(&p) {
            continue;
        }
        let v = Valuation::Prime(p.clone());
        require_integral_lagrangian(prop, &p).map_err(|e| e.at(&v))?;
        let vacuum = if prop.dim() == 1 {
            let local = b.at(&v)?;
            Some(vacuum_check(prop, &p, &local.t_prime, &local.t_double_prime, budget)?.holds)
        } else {
            None
        };
        tail_certificate.push(TailSample { prime: p, vacuum });
    }
    let total = per_valuation.values().fold(Amplitude::one(), |acc, a| acc * a.clone());
    Ok(AdelicKernelValue {
        per_valuation,
        tail_certificate,
        total,
    })
}

/// Every known Lagrangian coefficient and h must be p-adic integers at a
/// prime outside the listed set.
fn require_integral_lagrangian(prop: &Propagator, p: &Prime) -> Result<()> {
    let l = prop.system().lagrangian();
    let v = Valuation::Prime(p.clone());
    let series = l
        .a()
        .iter()
        .chain(l.b().iter())
        .chain(l.c().iter())
        .chain(l.d())
        .chain(l.e())
        .chain(std::iter::once(l.eps()));
    for s in series {
        if s.coefficients().1.iter().any(|c| norm(c, &v) > Rational::one()) {
            return Err(Error::Invalid(format!("Lagrangian coefficients are not {p}-adic integers")));
        }
    }
    if norm(prop.h(), &v) > Rational::one() {
        return Err(Error::Invalid(format!("h is not a {p}-adic integer")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VacuumRow {
    pub x2: Rational,
    pub exact: Amplitude,
    pub brute: Complex64,
    pub expected: u8,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VacuumReport {
    pub prime: Prime,
    pub rows: Vec<VacuumRow>,
    /// Every exact integral equals Ω(|x″|_p) and agrees with the residue sum.
    pub holds: bool,
}

/// ∫_{Z_p} K_p(x″,t″; x′,t′) dx′ = Ω(|x″|_p) for x″ ∈ {p, 1, 1/p} (n = 1).
pub fn vacuum_check(prop: &Propagator, p: &Prime, t1: &Rational, t2: &Rational, budget: u64) -> Result<VacuumReport> {
    let v = Valuation::Prime(p.clone());
    let mut rows = Vec::new();
    for x2 in [p.as_rational(), Rational::one(), p.as_rational().recip()] {
        let exact = prop.initial_ball_integral(p, t1, t2, &x2)?;
        let brute = prop.initial_ball_integral_brute(p, t1, t2, &x2, budget, Strategy::default())?;
        rows.push(VacuumRow {
            expected: omega(&norm(&x2, &v))?,
            x2,
            exact,
            brute,
        });
    }
    let holds = rows.iter().all(|r| {
        let target = if r.expected == 1 { Amplitude::one() } else { Amplitude::zero() };
        r.exact == target && (r.brute - r.exact.to_complex()).norm() < 1e-9
    });
    Ok(VacuumReport {
        prime: p.clone(),
        rows,
        holds,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupRow {
    pub x2: Rational,
    pub x1: Rational,
    /// ∫_{Z_p} K K dx as a residue sum.
    pub integral: Complex64,
    /// The same integral in closed form.
    pub exact: Amplitude,
    pub kernel: Amplitude,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupReport {
    pub rows: Vec<GroupRow>,
    /// max |∫_{Z_p} K K dx − K| over the sampled end points.
    pub max_deviation: f64,
    pub exact_holds: bool,
}

/// ∫_{Z_p} K_p(x″,t″; x,t) K_p(x,t; x′,t′) dx against K_p(x″,t″; x′,t′) for
/// x″, x′ ∈ {0, 1, p} (n = 1).
pub fn group_condition_check(
    prop: &Propagator,
    p: &Prime,
    t1: &Rational,
    t: &Rational,
    t2: &Rational,
    budget: u64,
    strategy: Strategy,
) -> Result<GroupReport> {
    let v = Valuation::Prime(p.clone());
    if prop.dim() != 1 {
        return Err(Error::UnsupportedDimension(prop.dim(), "group condition").at(&v));
    }
    let h = prop.h();
    let first = prop.action(&v, t1, t)?;
    let second = prop.action(&v, t, t2)?;
    let whole = prop.action(&v, t1, t2)?;
    let factor = normalization(&v, &second.b_bar, h)? * normalization(&v, &first.b_bar, h)?;
    let half = Rational::new(1.into(), 2.into());
    let quad = -(&second.c_bar[(0, 0)] + &first.a_bar[(0, 0)]) * &half / h;
    let samples = [Rational::zero(), Rational::one(), p.as_rational()];
    let mut rows = Vec::new();
    let mut max_deviation = 0f64;
    let mut exact_holds = true;
    for x2 in &samples {
        for x1 in &samples {
            let lin = -(&second.b_bar[(0, 0)] * x2 + &second.e_bar[0] + &first.b_bar[(0, 0)] * x1 + &first.d_bar[0]) / h;
            let constant = -(second.evaluate(&[x2.clone()], &[Rational::zero()]) + first.evaluate(&[Rational::zero()], &[x1.clone()])) / h;
            let exact = factor.clone() * ball_gaussian_1d(p, &quad, &lin, 0).rotate(&chi(&v, &constant));
            let phase = QuadraticPhase::new(Matrix::diagonal(&[quad.clone()]), vec![lin], constant)?;
            let integral = factor.to_complex() * ball_integral(p, &phase, &[0], budget, strategy).map_err(|e| e.at(&v))?;
            let kernel = kernel_amplitude(&v, &whole, h, &[x2.clone()], &[x1.clone()])?;
            max_deviation = max_deviation.max((integral - kernel.to_complex()).norm());
            exact_holds &= exact == kernel;
            rows.push(GroupRow {
                x2: x2.clone(),
                x1: x1.clone(),
                integral,
                exact,
                kernel,
            });
        }
    }
    Ok(GroupReport {
        rows,
        max_deviation,
        exact_holds,
    })
}

/// Time at which the free-particle vacuum condition first fails: |T|_p = p.
pub fn vacuum_failure_time(p: &Prime) -> Rational {
    p.as_rational().recip()
}
