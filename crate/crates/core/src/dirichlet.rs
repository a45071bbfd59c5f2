//! Local (one-prime) Dirichlet algebra.
//!
//! A multiplicative function is determined by its values at prime powers, and
//! Dirichlet convolution of multiplicative functions is ordinary power-series
//! multiplication at each prime. Everything here works on the truncated
//! coefficient sequence `f(p^0), ..., f(p^A)`.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, ToPrimitive};

use crate::error::{domain, Error, Result};
use crate::sieve::{factorize, multiplicative_segment, ExactRational, PrimeTable};
use crate::special::{binomial_general, cexp_m1, cln_1p, real_pow_neg, ComplexScalar, KahanSum};

/// Starting truncation order for local factors.
pub const DEFAULT_ORDER: usize = 40;
/// Hard ceiling on the truncation order of a local factor.
pub const MAX_ORDER: usize = 4096;
/// Target for the geometric tail bound of a truncated local factor.
pub const TAIL_TOLERANCE: f64 = 1e-13;

/// Coefficients `c[0..=A]` of a multiplicative function at one prime.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Clone + Num> LocalSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(domain!("local series needs truncation order A >= 1"));
        }
        Ok(Self { coeffs })
    }

    /// The convolution identity `[1, 0, 0, ...]`.
    pub fn identity(order: usize) -> Self {
        let mut coeffs = vec![T::zero(); order.max(1) + 1];
        coeffs[0] = T::one();
        Self { coeffs }
    }

    pub fn from_fn(order: usize, f: impl Fn(u32) -> T) -> Self {
        Self {
            coeffs: (0..=order.max(1) as u32).map(f).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn get(&self, alpha: usize) -> Option<&T> {
        self.coeffs.get(alpha)
    }

    pub fn map<U>(&self, f: impl Fn(&T) -> U) -> LocalSeries<U> {
        LocalSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }
}

/// `c[g] = sum_{i + j = g} a[i] b[j]` up to the common order.
pub fn local_convolve<T: Clone + Num>(a: &LocalSeries<T>, b: &LocalSeries<T>) -> Result<LocalSeries<T>> {
    if a.order() != b.order() {
        return Err(Error::Precondition(format!(
            "truncation orders differ: {} vs {}",
            a.order(),
            b.order()
        )));
    }
    let n = a.coeffs.len();
    let mut out = vec![T::zero(); n];
    for (i, ai) in a.coeffs.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, bj) in b.coeffs[..n - i].iter().enumerate() {
            out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
        }
    }
    Ok(LocalSeries { coeffs: out })
}

/// Convolution inverse by forward substitution; requires `a[0] = 1`.
pub fn local_invert<T: Clone + Num>(a: &LocalSeries<T>) -> Result<LocalSeries<T>> {
    if !a.coeffs[0].is_one() {
        return Err(Error::Precondition("local_invert requires a[0] = 1".into()));
    }
    let n = a.coeffs.len();
    let mut inv: Vec<T> = Vec::with_capacity(n);
    inv.push(T::one());
    for g in 1..n {
        let mut acc = T::zero();
        for i in 1..=g {
            acc = acc + a.coeffs[i].clone() * inv[g - i].clone();
        }
        inv.push(T::zero() - acc);
    }
    Ok(LocalSeries { coeffs: inv })
}

/// `tau_z(p^alpha) = binom(z + alpha - 1, alpha)`.
pub fn tau_z_pp<T: Clone + Num + FromPrimitive>(z: T, alpha: u32) -> T {
    if alpha == 0 {
        return T::one();
    }
    let shift = T::from_u32(alpha - 1).expect("small integer");
    binomial_general(z + shift, alpha)
}

pub fn tau_z_series<T: Clone + Num + FromPrimitive>(z: T, order: usize) -> LocalSeries<T> {
    LocalSeries::from_fn(order, |a| tau_z_pp(z.clone(), a))
}

/// `tau_z(n)` for real `z`.
pub fn tau_z_value(z: f64, n: u64) -> Result<f64> {
    let f = factorize(n)?;
    Ok(f.exponents().map(|a| tau_z_pp(z, a)).product())
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    Ok(())
}

/// `D_{k,omega}(p^alpha) = (alpha + 1) / k` for `alpha >= 1`, exact.
pub fn dkw_series_exact(k: u32, order: usize) -> Result<LocalSeries<BigRational>> {
    check_k(k)?;
    Ok(LocalSeries::from_fn(order, |a| {
        if a == 0 {
            BigRational::one()
        } else {
            BigRational::new(BigInt::from(a + 1), BigInt::from(k))
        }
    }))
}

pub fn dkw_series(k: u32, order: usize) -> Result<LocalSeries<f64>> {
    check_k(k)?;
    Ok(LocalSeries::from_fn(order, |a| {
        if a == 0 {
            1.0
        } else {
            (a + 1) as f64 / k as f64
        }
    }))
}

/// Local coefficients of `g_k = tau_{-2/k} * D_{k,omega}`, exact.
pub fn gk_series_exact(k: u32, order: usize) -> Result<LocalSeries<BigRational>> {
    let z = BigRational::new(BigInt::from(-2), BigInt::from(k));
    local_convolve(&tau_z_series(z, order), &dkw_series_exact(k, order)?)
}

/// Local coefficients of `g_k`, double precision.
pub fn gk_series(k: u32, order: usize) -> Result<LocalSeries<f64>> {
    let z = -2.0 / k as f64;
    local_convolve(&tau_z_series(z, order), &dkw_series(k, order)?)
}

/// `g_k(p^alpha)`, exact.
pub fn gk_pp(k: u32, alpha: u32) -> Result<ExactRational> {
    let s = gk_series_exact(k, alpha.max(1) as usize)?;
    Ok(ExactRational::from(s.coeffs[alpha as usize].clone()))
}

pub fn gk_pp_f64(k: u32, alpha: u32) -> Result<f64> {
    Ok(gk_series(k, alpha.max(1) as usize)?.coeffs[alpha as usize])
}

type Rule = dyn Fn(u64, u32) -> ComplexScalar + Send + Sync;

/// A multiplicative function given by its values at prime powers.
#[derive(Clone)]
pub struct MultiplicativeSpec {
    name: String,
    rule: Arc<Rule>,
}

impl fmt::Debug for MultiplicativeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MultiplicativeSpec").field("name", &self.name).finish()
    }
}

impl MultiplicativeSpec {
    /// `rule(p, 0)` is forced to 1.
    pub fn new(name: impl Into<String>, rule: impl Fn(u64, u32) -> ComplexScalar + Send + Sync + 'static) -> Self {
        let rule = move |p, a| if a == 0 { Complex64::new(1.0, 0.0) } else { rule(p, a) };
        Self {
            name: name.into(),
            rule: Arc::new(rule),
        }
    }

    pub fn dkw(k: u32) -> Result<Self> {
        check_k(k)?;
        Ok(Self::new(format!("D_{k}"), move |_, a| {
            Complex64::new((a + 1) as f64 / k as f64, 0.0)
        }))
    }

    pub fn tau_z(z: ComplexScalar) -> Self {
        Self::new(format!("tau_{z}"), move |_, a| tau_z_pp(z, a))
    }

    /// Coefficients are tabulated up to [`MAX_ORDER`]; they do not depend on `p`.
    pub fn gk(k: u32) -> Result<Self> {
        let table = gk_series(k, MAX_ORDER)?;
        Ok(Self::new(format!("g_{k}"), move |_, a| {
            Complex64::new(table.coeffs.get(a as usize).copied().unwrap_or(f64::NAN), 0.0)
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, p: u64, alpha: u32) -> ComplexScalar {
        (self.rule)(p, alpha)
    }
}

/// Upper bound on `sum_{a > order} (a + 1)^2 r^a` for `0 < r < 1`, or infinity
/// while the terms are still growing.
fn poly_geometric_tail(r: f64, order: usize) -> f64 {
    let a = (order + 1) as f64;
    let first = (a + 1.0).powi(2) * r.powf(a);
    let ratio = r * ((a + 2.0) / (a + 1.0)).powi(2);
    if ratio >= 1.0 {
        return f64::INFINITY;
    }
    first / (1.0 - ratio)
}

/// `1 + sum_{a=1..A} rule(p, a) p^(-a s)`, with `A` grown from
/// [`DEFAULT_ORDER`] until the tail bound falls below [`TAIL_TOLERANCE`].
/// The tail bound assumes `|rule(p, a)| <= (a + 1)^2`, which holds for
/// `D_{k,omega}`, `g_k` and `tau_z` with `|z| <= 2`.
pub fn local_factor_value(
    spec: &MultiplicativeSpec,
    p: u64,
    s: ComplexScalar,
    max_order: usize,
) -> Result<ComplexScalar> {
    if !(s.re > 0.5) {
        return Err(domain!("local factor needs Re s > 1/2, got {s}"));
    }
    if p < 2 {
        return Err(domain!("p must be prime, got {p}"));
    }
    let r = (p as f64).powf(-s.re);
    let mut order = DEFAULT_ORDER.min(max_order);
    while poly_geometric_tail(r, order) >= TAIL_TOLERANCE {
        if order >= max_order {
            return Err(Error::NonConvergence(format!(
                "local factor of {} at p = {p}, s = {s}: tail bound not below {TAIL_TOLERANCE} by order {max_order}",
                spec.name
            )));
        }
        order = (order * 2).min(max_order);
    }
    let step = real_pow_neg(p as f64, s);
    let mut pw = Complex64::new(1.0, 0.0);
    let mut terms = Vec::with_capacity(order);
    for a in 1..=order as u32 {
        pw *= step;
        terms.push(spec.eval(p, a) * pw);
    }
    let mut re = KahanSum::new();
    let mut im = KahanSum::new();
    for t in terms.iter().rev() {
        re.add(t.re);
        im.add(t.im);
    }
    re.add(1.0);
    Ok(Complex64::new(re.value(), im.value()))
}

/// Closed form `1 + (2 p^s - 1) / (k (p^s - 1)^2)` of the local factor of `D_{k,omega}`.
pub fn dkw_local_factor_closed(k: u32, p: u64, s: ComplexScalar) -> ComplexScalar {
    let ps = (s * (p as f64).ln()).exp();
    let one = Complex64::new(1.0, 0.0);
    one + (2.0 * ps - one) / (k as f64 * (ps - one) * (ps - one))
}

/// `h(s) = (1 - p^-s)^(2/k) (k p^2s - 2(k-1) p^s + k - 1) - k (p^s - 1)^2`.
///
/// Evaluated as `k (p^s - 1)^2 * expm1((2/k) ln(1 - p^-s) + ln(1 + delta))` with
/// `delta = (2 p^s - 1) / (k (p^s - 1)^2)`, which is the same expression with
/// the leading cancellation removed; large `p` would otherwise lose every digit.
pub fn h_value(k: u32, p: u64, s: ComplexScalar) -> Result<ComplexScalar> {
    check_k(k)?;
    if !(s.re > 0.0) {
        return Err(domain!("h(s) needs Re s > 0, got {s}"));
    }
    let one = Complex64::new(1.0, 0.0);
    let kf = k as f64;
    let ps = (s * (p as f64).ln()).exp();
    let pms = real_pow_neg(p as f64, s);
    let sq = (ps - one) * (ps - one);
    let delta = (2.0 * ps - one) / (kf * sq);
    let exponent = (2.0 / kf) * cln_1p(-pms) + cln_1p(delta);
    Ok(kf * sq * cexp_m1(exponent))
}

/// Relative residual of `lhs = (1 - p^-s)^(-2/k) (1 + h / (k (p^s - 1)^2))`.
pub fn h_identity_residual(k: u32, p: u64, s: ComplexScalar) -> Result<f64> {
    let h = h_value(k, p, s)?;
    let one = Complex64::new(1.0, 0.0);
    let kf = k as f64;
    let ps = (s * (p as f64).ln()).exp();
    let pms = real_pow_neg(p as f64, s);
    let lhs = dkw_local_factor_closed(k, p, s);
    let pre = ((-2.0 / kf) * cln_1p(-pms)).exp();
    let rhs = pre * (one + h / (kf * (ps - one) * (ps - one)));
    Ok((lhs - rhs).norm() / lhs.norm())
}

/// `sum_{n <= N} |g_k(n)| n^-sigma`.
pub fn lgk_abs_partial(k: u32, sigma: f64, n_max: u64) -> Result<f64> {
    if !(sigma > 0.5) {
        return Err(domain!("sigma must exceed 1/2, got {sigma}"));
    }
    if n_max == 0 {
        return Ok(0.0);
    }
    // Exponents of n <= 2^64 stay below 64.
    let table: Vec<f64> = gk_series(k, 64)?.coeffs.iter().map(|c| c.abs()).collect();
    let primes = PrimeTable::for_range_end(n_max + 1);
    let vals = multiplicative_segment(1, n_max + 1, &primes, |_, e| table[e as usize])?;
    let mut acc = KahanSum::new();
    for (i, v) in vals.iter().enumerate() {
        if *v != 0.0 {
            acc.add(v * ((i + 1) as f64).powf(-sigma));
        }
    }
    Ok(acc.value())
}

/// Convert an exact local coefficient to f64.
pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
