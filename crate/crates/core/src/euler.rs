//! The mean-value constant
//! `C_k = prod_p (1 - 1/p)^(2/k) (1 + (2p - 1) / (k (p - 1)^2))`
//! and its variant with `k p (p - 1)^2` in the denominator.
//!
//! Two independent evaluators: a direct product over `p <= P`, and an exact
//! product over `p <= p0` times `exp(sum_m c_m P_{>p0}(m))`, where `c_m` are the
//! power-series coefficients of the log of the local factor in `t = 1/p` and
//! `P_{>p0}` is the prime zeta function with small primes removed.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::dirichlet::ratio_to_f64;
use crate::error::{domain, Error, Result};
use crate::sieve::{for_each_prime, primes_up_to};
use crate::special::{zeta_minus_one, KahanSum};

/// Terms of the prime-zeta Moebius series below this are dropped.
const PRIME_ZETA_CUTOFF: f64 = 1e-20;
/// Largest order `c_m` the series evaluator is required to reach.
pub const SERIES_TERM_TOLERANCE: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `1 + (2p - 1) / (k (p - 1)^2)`
    Thm3,
    /// `1 + (2p - 1) / (k p (p - 1)^2)`
    Thm1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Direct,
    Series,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    PrimeBound(u64),
    Series { p0: u64, order: usize },
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Thm3 => "thm3",
            Variant::Thm1 => "thm1",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "thm3" => Ok(Variant::Thm3),
            "thm1" => Ok(Variant::Thm1),
            _ => Err(domain!("unknown variant {s:?}")),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Direct => "direct",
            Method::Series => "series",
        })
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Method::Direct),
            "series" => Ok(Method::Series),
            _ => Err(domain!("unknown method {s:?}")),
        }
    }
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::PrimeBound(p) => write!(f, "P={p}"),
            Truncation::Series { p0, order } => write!(f, "p0={p0};M={order}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EulerConstantResult {
    pub k: u32,
    pub variant: Variant,
    pub value: f64,
    pub method: Method,
    pub truncation: Truncation,
    /// Absolute truncation error estimate for `value`, excluding floating-point
    /// rounding (about 1e-15 relative); infinite when the product diverges.
    pub tail_estimate: f64,
}

/// `mu(1..=n)`.
fn mobius_table(n: usize) -> Vec<i8> {
    let mut mu = vec![1i8; n + 1];
    let mut composite = vec![false; n + 1];
    for p in 2..=n {
        if composite[p] {
            continue;
        }
        for m in (p..=n).step_by(p) {
            if m > p {
                composite[m] = true;
            }
            mu[m] = -mu[m];
        }
        let sq = p * p;
        for m in (sq..=n).step_by(sq) {
            mu[m] = 0;
        }
    }
    if n > 0 {
        mu[0] = 0;
    }
    mu
}

fn next_prime_above(q: u64) -> u64 {
    let mut c = q.max(1) + 1;
    loop {
        if (2..).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            return c;
        }
        c += 1;
    }
}

/// `sum_{p > exclude_below} p^-s`, via `sum_m mu(m)/m log zeta_{>q}(m s)` with
/// `zeta_{>q}(u) = zeta(u) prod_{p <= q} (1 - p^-u)`.
pub fn prime_zeta(s: f64, exclude_below: u64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(domain!("prime_zeta requires finite s > 1, got {s}"));
    }
    let small = primes_up_to(exclude_below);
    let first = next_prime_above(exclude_below) as f64;
    // Moebius terms decay like first^(-m s); size the table to reach the cutoff.
    let m_max = ((-PRIME_ZETA_CUTOFF.ln()) / (s * first.ln())).ceil() as usize + 1;
    let mu = mobius_table(m_max);
    let mut total = KahanSum::new();
    for m in (1..=m_max).rev() {
        if mu[m] == 0 {
            continue;
        }
        let u = m as f64 * s;
        let mut log_zeta = KahanSum::new();
        for &p in small.iter().rev() {
            log_zeta.add((-(p as f64).powf(-u)).ln_1p());
        }
        log_zeta.add(zeta_minus_one(u)?.ln_1p());
        total.add(mu[m] as f64 / m as f64 * log_zeta.value());
    }
    Ok(total.value())
}

/// Numerator polynomial `Q(t)` of the local factor, written as
/// `(1 - t)^(2/k - 2) Q(t)` with `t = 1/p`.
fn local_polynomial(k: u32, variant: Variant) -> Vec<BigRational> {
    let r = |n: i64, d: i64| BigRational::new(BigInt::from(n), BigInt::from(d));
    let k = k as i64;
    match variant {
        // (k - 2(k-1) t + (k-1) t^2) / k
        Variant::Thm3 => vec![r(1, 1), r(-2 * (k - 1), k), r(k - 1, k)],
        // (1 - t)^2 + t^2 (2 - t) / k
        Variant::Thm1 => vec![r(1, 1), r(-2, 1), r(k + 2, k), r(-1, k)],
    }
}

/// Exact `c[0..=M]` with `log F(t) = sum_m c_m t^m` (`c_0 = 0`).
pub fn local_log_coeffs_exact(k: u32, variant: Variant, order: usize) -> Result<Vec<BigRational>> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    if order < 2 {
        return Err(domain!("series order must be at least 2, got {order}"));
    }
    let q = local_polynomial(k, variant);
    let qc = |i: usize| q.get(i).cloned().unwrap_or_else(BigRational::zero);
    // log Q by m l_m = m q_m - sum_{j<m} j l_j q_{m-j}
    let mut l = vec![BigRational::zero(); order + 1];
    for m in 1..=order {
        let mut acc = qc(m) * BigInt::from(m);
        for j in 1..m {
            let qm = qc(m - j);
            if qm.is_zero() {
                continue;
            }
            acc -= &l[j] * BigInt::from(j) * qm;
        }
        l[m] = acc / BigInt::from(m);
    }
    // (2/k - 2) log(1 - t) contributes (2 - 2/k) / m.
    let lead = BigRational::from_integer(BigInt::from(2)) - BigRational::new(BigInt::from(2), BigInt::from(k));
    for (m, lm) in l.iter_mut().enumerate().skip(1) {
        *lm += &lead / BigInt::from(m);
    }
    Ok(l)
}

pub fn local_log_coeffs(k: u32, variant: Variant, order: usize) -> Result<Vec<f64>> {
    Ok(local_log_coeffs_exact(k, variant, order)?
        .iter()
        .map(ratio_to_f64)
        .collect())
}

/// `log` of one local factor at prime `p`.
pub fn log_local_factor(k: u32, variant: Variant, p: u64) -> f64 {
    let pf = p as f64;
    let kf = k as f64;
    let base = (2.0 * pf - 1.0) / (kf * (pf - 1.0) * (pf - 1.0));
    let extra = match variant {
        Variant::Thm3 => base,
        Variant::Thm1 => base / pf,
    };
    (2.0 / kf) * (-1.0 / pf).ln_1p() + extra.ln_1p()
}

pub fn local_factor(k: u32, variant: Variant, p: u64) -> f64 {
    log_local_factor(k, variant, p).exp()
}

fn check_args(k: u32) -> Result<()> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    Ok(())
}

/// `sum_{m >= from} |c_m| P_{>q}(m)`, summed until the terms are negligible.
fn abs_log_tail(k: u32, variant: Variant, q: u64, from: usize) -> Result<f64> {
    let first = next_prime_above(q) as f64;
    let last = from.max(2) + ((-PRIME_ZETA_CUTOFF.ln()) / first.ln()).ceil() as usize + 1;
    let c = local_log_coeffs(k, variant, last)?;
    let mut acc = KahanSum::new();
    for m in (from..=last).rev() {
        if c[m] != 0.0 {
            acc.add(c[m].abs() * prime_zeta(m as f64, q)?);
        }
    }
    Ok(acc.value())
}

/// `prod_{p <= P}` of the local factor.
pub fn euler_constant_direct(k: u32, variant: Variant, prime_limit: u64) -> Result<EulerConstantResult> {
    check_args(k)?;
    if prime_limit < 3 {
        return Err(domain!("prime bound must be at least 3, got {prime_limit}"));
    }
    let mut log_sum = KahanSum::new();
    for_each_prime(prime_limit, |p| log_sum.add(log_local_factor(k, variant, p)));
    let value = log_sum.value().exp();
    let tail_estimate = match variant {
        Variant::Thm3 => value * abs_log_tail(k, variant, prime_limit, 2)?.exp_m1(),
        // c_1 = -2/k, and sum_p 1/p diverges.
        Variant::Thm1 => f64::INFINITY,
    };
    Ok(EulerConstantResult {
        k,
        variant,
        value,
        method: Method::Direct,
        truncation: Truncation::PrimeBound(prime_limit),
        tail_estimate,
    })
}

/// Exact product over `p <= p0`, remaining primes through `exp(sum_{m=2..M} c_m P_{>p0}(m))`.
pub fn euler_constant_series(k: u32, variant: Variant, p0: u64, order: usize) -> Result<EulerConstantResult> {
    check_args(k)?;
    if p0 < 3 {
        return Err(domain!("p0 must be at least 3, got {p0}"));
    }
    if order < 10 {
        return Err(domain!("series order must be at least 10, got {order}"));
    }
    let exact = local_log_coeffs_exact(k, variant, order)?;
    if !exact[1].is_zero() {
        return Err(Error::NonConvergence(format!(
            "variant {variant}: c_1 = {} is nonzero, so sum_p c_1/p diverges and the product has no finite limit",
            exact[1]
        )));
    }
    let c: Vec<f64> = exact.iter().map(ratio_to_f64).collect();
    let last = c[order].abs() * prime_zeta(order as f64, p0)?;
    if last > SERIES_TERM_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "|c_M P(M, p0)| = {last:e} exceeds {SERIES_TERM_TOLERANCE:e} at M = {order}, p0 = {p0}"
        )));
    }
    let mut log_sum = KahanSum::new();
    for m in (2..=order).rev() {
        log_sum.add(c[m] * prime_zeta(m as f64, p0)?);
    }
    for p in primes_up_to(p0).into_iter().rev() {
        log_sum.add(log_local_factor(k, variant, p));
    }
    let value = log_sum.value().exp();
    let omitted = abs_log_tail(k, variant, p0, order + 1)?;
    Ok(EulerConstantResult {
        k,
        variant,
        value,
        method: Method::Series,
        truncation: Truncation::Series { p0, order },
        tail_estimate: value * omitted.exp_m1(),
    })
}

/// `((2/k) sum_{u < p <= v} 1/p, (2/k) log(log v / log u))`.
pub fn mertens_window(k: u32, u: u64, v: u64) -> Result<(f64, f64)> {
    check_args(k)?;
    if u < 2 {
        return Err(domain!("mertens window needs u >= 2, got {u}"));
    }
    if v <= u {
        return Err(domain!("mertens window needs u < v, got ({u}, {v})"));
    }
    let mut terms = Vec::new();
    for_each_prime(v, |p| {
        if p > u {
            terms.push(1.0 / p as f64);
        }
    });
    let sum: KahanSum = terms.into_iter().rev().collect();
    let scale = 2.0 / k as f64;
    let rhs = scale * ((v as f64).ln() / (u as f64).ln()).ln();
    Ok((scale * sum.value(), rhs))
}

/// `true` when the exact `c_1` vanishes.
pub fn first_log_coeff_vanishes(k: u32, variant: Variant) -> Result<bool> {
    Ok(local_log_coeffs_exact(k, variant, 2)?[1].is_zero())
}
