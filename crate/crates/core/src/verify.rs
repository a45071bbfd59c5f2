//! Numeric checks of the prime-sum estimates, the `tau_z` mean value and the
//! `D_{k,omega}` asymptotic.
//!
//! Each check returns a [`LemmaReport`] whose `pass` flag is a pure function of
//! its `measured`, `bound` and `criterion` fields.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dirichlet::tau_z_pp;
use crate::error::{domain, Result};
use crate::euler::{euler_constant_direct, euler_constant_series, EulerConstantResult, Variant};
use crate::sieve::{exact_mean_sum, for_each_prime, multiplicative_segment, ExactRational, OmegaBuckets, PrimeTable};
use crate::special::{gamma_real, KahanSum};

/// Chebyshev-type constant: `theta(x) < 1.000081 x`.
pub const CHEBYSHEV_CONSTANT: f64 = 1.000081;
pub const DEFAULT_ALPHA_MAX: u32 = 60;
/// Prime bound for the direct evaluation of the non-convergent variant.
pub const DEFAULT_PRIME_LIMIT: u64 = 10_000_000;
pub const DEFAULT_P0: u64 = 100;
pub const DEFAULT_SERIES_ORDER: usize = 60;
/// A later normalized error more than this multiple of every earlier one counts as growth.
pub const GROWTH_FACTOR: f64 = 2.0;
/// Shiu-type ratio may not exceed this multiple of its value at the largest checkpoint.
pub const SHIU_FACTOR: f64 = 10.0;
/// Floor added to ceilings so that exactly-zero errors do not fail a strict comparison.
const ZERO_FLOOR: f64 = 1e-12;
const TAUZ_SEGMENT: u64 = 1 << 18;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LemmaId {
    L1,
    L2,
    L3,
    L4,
    L6,
    Shiu,
    Discrepancy,
}

impl fmt::Display for LemmaId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    /// `measured[i] < bound[i]` for every `i`.
    Below,
    /// Either every `measured[i] < bound[i]` or every `measured[i] > bound[i]`.
    Separated,
}

impl Criterion {
    pub fn holds(&self, measured: &[f64], bound: &[f64]) -> bool {
        if measured.is_empty() || measured.len() != bound.len() {
            return false;
        }
        let pairs = || measured.iter().zip(bound);
        match self {
            Criterion::Below => pairs().all(|(m, b)| m < b),
            Criterion::Separated => pairs().all(|(m, b)| m < b) || pairs().all(|(m, b)| m > b),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: LemmaId,
    pub measured: Vec<f64>,
    pub bound: Vec<f64>,
    pub criterion: Criterion,
    pub pass: bool,
    pub detail: String,
}

impl LemmaReport {
    pub fn new(lemma: LemmaId, measured: Vec<f64>, bound: Vec<f64>, criterion: Criterion, detail: String) -> Self {
        let pass = criterion.holds(&measured, &bound);
        Self {
            lemma,
            measured,
            bound,
            criterion,
            pass,
            detail,
        }
    }

    pub fn recompute_pass(&self) -> bool {
        self.criterion.holds(&self.measured, &self.bound)
    }
}

fn check_k(k: u32) -> Result<()> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    Ok(())
}

fn sorted_checkpoints(xs: &[u64], min: u64) -> Result<()> {
    if xs.is_empty() {
        return Err(domain!("at least one checkpoint required"));
    }
    if xs.windows(2).any(|w| w[0] >= w[1]) {
        return Err(domain!("checkpoints must be strictly increasing"));
    }
    if xs[0] < min {
        return Err(domain!("checkpoints must be at least {min}, got {}", xs[0]));
    }
    Ok(())
}

/// `sum_{p <= x} f(p)` at each checkpoint, in one pass over the primes.
pub fn prime_sum_many(xs: &[u64], f: impl Fn(u64) -> f64) -> Vec<f64> {
    let Some(&top) = xs.last() else {
        return Vec::new();
    };
    let mut out = Vec::with_capacity(xs.len());
    let mut acc = KahanSum::new();
    let mut next = 0;
    for_each_prime(top, |p| {
        while next < xs.len() && xs[next] < p {
            out.push(acc.value());
            next += 1;
        }
        acc.add(f(p));
    });
    while out.len() < xs.len() {
        out.push(acc.value());
    }
    out
}

/// Chebyshev's `theta(x) = sum_{p <= x} log p`.
pub fn theta(x: u64) -> Result<f64> {
    if x < 2 {
        return Err(domain!("theta needs x >= 2, got {x}"));
    }
    Ok(prime_sum_many(&[x], |p| (p as f64).ln())[0])
}

pub fn theta_many(xs: &[u64]) -> Result<Vec<f64>> {
    sorted_checkpoints(xs, 2)?;
    Ok(prime_sum_many(xs, |p| (p as f64).ln()))
}

/// `sum_{p <= x} |D(p)| log p = (2/k) theta(x)` against `(2/k) 1.000081 x`.
pub fn lemma1_check(k: u32, xs: &[u64]) -> Result<LemmaReport> {
    check_k(k)?;
    let th = theta_many(xs)?;
    let scale = 2.0 / k as f64;
    let measured: Vec<f64> = th.iter().map(|t| scale * t).collect();
    let bound: Vec<f64> = xs.iter().map(|&x| scale * CHEBYSHEV_CONSTANT * x as f64).collect();
    let detail = format!("k={k}; (2/k) theta(x) < (2/k) {CHEBYSHEV_CONSTANT} x at x in {xs:?}");
    Ok(LemmaReport::new(LemmaId::L1, measured, bound, Criterion::Below, detail))
}

/// `r(x) = |sum_{p <= x} D(p) log p - (2/k) x| / x`, required to decrease
/// through the checkpoints. The last entry of `measured` is the relative
/// residual of the identity `sum D(p) log p = (2/k) theta(x)`.
pub fn lemma2_check(k: u32, xs: &[u64]) -> Result<LemmaReport> {
    check_k(k)?;
    sorted_checkpoints(xs, 1_000)?;
    let scale = 2.0 / k as f64;
    let direct = prime_sum_many(xs, |p| scale * (p as f64).ln());
    let th = theta_many(xs)?;
    let r: Vec<f64> = direct
        .iter()
        .zip(xs)
        .map(|(s, &x)| (s - scale * x as f64).abs() / x as f64)
        .collect();
    let residual = direct
        .iter()
        .zip(&th)
        .map(|(s, t)| (s - scale * t).abs() / (scale * t))
        .fold(0.0, f64::max);
    let mut measured = r.clone();
    let mut bound = vec![f64::INFINITY];
    bound.extend(r.iter().take(r.len() - 1));
    measured.push(residual);
    bound.push(1e-12);
    let detail = format!("k={k}; r(x) strictly decreasing over {xs:?}; identity residual {residual:e}");
    Ok(LemmaReport::new(LemmaId::L2, measured, bound, Criterion::Below, detail))
}

/// Upper bound for `sum_{m > n} log m / (m (m - 1))`: the terms decrease past
/// `m = 3`, so the tail is at most the integral of `log t / (t - 1)^2` from `n`.
fn log_series_tail(n: u64) -> f64 {
    let n = n as f64;
    // integral_n^inf log t / (t-1)^2 dt = log n / (n - 1) - log(1 - 1/n)
    n.ln() / (n - 1.0) - (-1.0 / n).ln_1p()
}

pub const LEMMA3_AUX_LIMIT: u64 = 1_000_000;

/// `(4/k^2) sum_{p <= x} log p / p^2 < 4 log 4 / k^2`, together with
/// `sum_{m >= 2} log m / (m (m - 1)) < log 4` (partial sum plus tail bound).
pub fn lemma3_check(k: u32, x: u64) -> Result<LemmaReport> {
    check_k(k)?;
    sorted_checkpoints(&[x], 2)?;
    let k2 = (k * k) as f64;
    let s = prime_sum_many(&[x], |p| (p as f64).ln() / (p as f64 * p as f64))[0];
    let aux: KahanSum = (2..=LEMMA3_AUX_LIMIT)
        .rev()
        .map(|m| (m as f64).ln() / (m as f64 * (m - 1) as f64))
        .collect();
    let aux_partial = aux.value();
    let aux_total = aux_partial + log_series_tail(LEMMA3_AUX_LIMIT);
    let log4 = 4f64.ln();
    let detail = format!(
        "k={k}, x={x}; sum_p log p/p^2 = {s:.12}; aux partial (m <= {LEMMA3_AUX_LIMIT}) = {aux_partial:.10}, with tail <= {aux_total:.10}"
    );
    Ok(LemmaReport::new(
        LemmaId::L3,
        vec![4.0 / k2 * s, aux_total],
        vec![4.0 * log4 / k2, log4],
        Criterion::Below,
        detail,
    ))
}

/// `(2/k) (3p^2 - 3p + 1) / (p (p-1)^3) log p`: the `alpha >= 2` sum at one prime.
pub fn lemma4_closed_term(k: u32, p: u64) -> f64 {
    let pf = p as f64;
    2.0 / k as f64 * (3.0 * pf * pf - 3.0 * pf + 1.0) / (pf * (pf - 1.0).powi(3)) * pf.ln()
}

/// `sum_{alpha=2..alpha_max} ((alpha+1)/k) alpha log p / p^alpha` and a bound on what
/// the truncation drops.
fn lemma4_direct_term(k: u32, p: u64, alpha_max: u32) -> (f64, f64) {
    let pf = p as f64;
    let lp = pf.ln();
    let kf = k as f64;
    let mut acc = KahanSum::new();
    let mut terms = Vec::with_capacity(alpha_max as usize);
    let mut pw = 1.0 / pf;
    for a in 2..=alpha_max {
        pw /= pf;
        let t = (a + 1) as f64 * a as f64 * lp * pw / kf;
        if t == 0.0 {
            break;
        }
        terms.push(t);
    }
    for t in terms.iter().rev() {
        acc.add(*t);
    }
    let a = (alpha_max + 1) as f64;
    let first = (a + 1.0) * a * lp * pf.powf(-a) / kf;
    let ratio = (a + 2.0) / a / pf;
    (acc.value(), first / (1.0 - ratio))
}

pub fn lemma4_check(k: u32, x: u64, alpha_max: u32) -> Result<LemmaReport> {
    check_k(k)?;
    sorted_checkpoints(&[x], 2)?;
    if alpha_max < 10 {
        return Err(domain!("alpha_max must be at least 10, got {alpha_max}"));
    }
    let mut direct = KahanSum::new();
    let mut closed = KahanSum::new();
    let mut tail = 0.0;
    for_each_prime(x, |p| {
        let (d, t) = lemma4_direct_term(k, p, alpha_max);
        direct.add(d);
        tail += t;
        closed.add(lemma4_closed_term(k, p));
    });
    let (direct, closed) = (direct.value(), closed.value());
    let bound_total = 28.0 / k as f64;
    let p2 = lemma4_closed_term(k, 2);
    let p2_bound = 28.0 / k as f64 * 2f64.ln() / 4.0;
    let detail = format!(
        "k={k}, x={x}, alpha_max={alpha_max}; direct {direct:.14}, closed {closed:.14}, truncation tail <= {tail:e}; p=2 term {p2:.16} vs bound term {p2_bound:.16}"
    );
    Ok(LemmaReport::new(
        LemmaId::L4,
        vec![direct, closed, (direct - closed).abs(), (p2 - p2_bound).abs()],
        vec![bound_total, bound_total, tail + ZERO_FLOOR, 1e-14],
        Criterion::Below,
        detail,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TauzRow {
    pub x: u64,
    pub sum: f64,
    pub main: f64,
    pub e_norm: f64,
}

/// `sum_{n <= x} tau_z(n)` at each checkpoint, by segmented sieve.
pub fn tauz_sums(z: f64, xs: &[u64]) -> Result<Vec<f64>> {
    sorted_checkpoints(xs, 1)?;
    let top = *xs.last().expect("nonempty");
    let primes = PrimeTable::for_range_end(top + 1);
    let table: Vec<f64> = (0..64).map(|a| tau_z_pp(z, a)).collect();
    let mut acc = KahanSum::new();
    let mut out = Vec::with_capacity(xs.len());
    let mut next = 0;
    let mut lo = 1;
    while lo <= top {
        let hi = (lo + TAUZ_SEGMENT).min(top + 1);
        let vals = multiplicative_segment(lo, hi, &primes, |_, e| table[e as usize])?;
        for (i, v) in vals.iter().enumerate() {
            acc.add(*v);
            if lo + i as u64 == xs[next] {
                out.push(acc.value());
                next += 1;
            }
        }
        lo = hi;
    }
    Ok(out)
}

pub fn tauz_rows(z: f64, xs: &[u64]) -> Result<Vec<TauzRow>> {
    if !(z > 0.0 && z <= 2.0) {
        return Err(domain!("z must lie in (0, 2], got {z}"));
    }
    sorted_checkpoints(xs, 2)?;
    let g = gamma_real(z)?;
    let sums = tauz_sums(z, xs)?;
    Ok(xs
        .iter()
        .zip(sums)
        .map(|(&x, sum)| {
            let xf = x as f64;
            let lx = xf.ln();
            let main = xf * lx.powf(z - 1.0) / g;
            let e_norm = (sum - main) / (xf * lx.powf(z - 2.0));
            TauzRow { x, sum, main, e_norm }
        })
        .collect())
}

/// One report per checkpoint: `|e_i|` may not exceed [`GROWTH_FACTOR`] times the
/// largest earlier `|e_j|`.
pub fn tauz_reports(z: f64, rows: &[TauzRow]) -> Vec<LemmaReport> {
    let mut running: f64 = 0.0;
    rows.iter()
        .enumerate()
        .map(|(i, r)| {
            let e = r.e_norm.abs();
            let ceiling = if i == 0 {
                f64::INFINITY
            } else {
                GROWTH_FACTOR * running + ZERO_FLOOR
            };
            running = running.max(e);
            let detail = format!(
                "z={z}, x={}; sum {} vs main {:.6}; |e_norm| {e:.6e}",
                r.x, r.sum, r.main
            );
            LemmaReport::new(LemmaId::L6, vec![e], vec![ceiling], Criterion::Below, detail)
        })
        .collect()
}

pub fn tauz_mean_check(z: f64, xs: &[u64]) -> Result<Vec<LemmaReport>> {
    if xs.first().is_some_and(|&x| x < 1_000) {
        return Err(domain!("tau_z checkpoints must be at least 1000"));
    }
    Ok(tauz_reports(z, &tauz_rows(z, xs)?))
}

/// `C x (log x)^(2/k - 1) / Gamma(2/k)`.
pub fn main_term(k: u32, x: f64, constant: f64) -> Result<f64> {
    check_k(k)?;
    if !(x >= 2.0) {
        return Err(domain!("main term needs x >= 2, got {x}"));
    }
    if !(constant > 0.0) {
        return Err(domain!("constant must be positive, got {constant}"));
    }
    let z = 2.0 / k as f64;
    Ok(constant * x * x.ln().powf(z - 1.0) / gamma_real(z)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonRow {
    pub x: u64,
    pub s_exact: ExactRational,
    pub s: f64,
    pub main: f64,
    pub ratio: f64,
    pub e_norm: f64,
}

fn comparison_row(k: u32, b: &OmegaBuckets, constant: f64) -> Result<ComparisonRow> {
    let (s_exact, s) = exact_mean_sum(b, k)?;
    let xf = b.x as f64;
    let main = main_term(k, xf, constant)?;
    let e_norm = (s - main) / (xf * xf.ln().powf(2.0 / k as f64 - 2.0));
    Ok(ComparisonRow {
        x: b.x,
        s_exact,
        s,
        main,
        ratio: s / main,
        e_norm,
    })
}

/// Rows of exact sums against the main term.
pub fn compare_series(k: u32, buckets: &[OmegaBuckets], constant: &EulerConstantResult) -> Result<Vec<ComparisonRow>> {
    check_k(k)?;
    if buckets.len() < 3 {
        return Err(domain!(
            "comparison needs at least 3 checkpoints, got {}",
            buckets.len()
        ));
    }
    let (lo, hi) = (buckets[0].x, buckets[buckets.len() - 1].x);
    if lo < 2 || hi < lo * 1000 {
        return Err(domain!(
            "checkpoints must start at x >= 2 and span three decades, got [{lo}, {hi}]"
        ));
    }
    buckets.iter().map(|b| comparison_row(k, b, constant.value)).collect()
}

/// `S_k(x) / (x (log x)^(2/k - 1))` may not blow up across checkpoints.
pub fn shiu_check(k: u32, buckets: &[OmegaBuckets]) -> Result<LemmaReport> {
    check_k(k)?;
    let vals: Vec<f64> = buckets
        .iter()
        .filter(|b| b.x >= 2)
        .map(|b| {
            let xf = b.x as f64;
            Ok(exact_mean_sum(b, k)?.1 / (xf * xf.ln().powf(2.0 / k as f64 - 1.0)))
        })
        .collect::<Result<_>>()?;
    let Some(&last) = vals.last() else {
        return Err(domain!("shiu check needs a checkpoint x >= 2"));
    };
    let max = vals.iter().copied().fold(f64::MIN, f64::max);
    let detail = format!("k={k}; S/(x (log x)^(2/k-1)) over checkpoints: {vals:.6?}");
    Ok(LemmaReport::new(
        LemmaId::Shiu,
        vec![max],
        vec![SHIU_FACTOR * last],
        Criterion::Below,
        detail,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Thm3,
    Thm1,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Thm3 => "thm3",
            Verdict::Thm1 => "thm1",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiscrepancyOutcome {
    pub report: LemmaReport,
    pub verdict: Verdict,
    pub thm3: EulerConstantResult,
    pub thm1: EulerConstantResult,
}

/// Which constant makes `S_k / M_k` tend to 1. Over the checkpoints within
/// three decades of the largest, `measured` holds `|ratio - 1|` under the
/// thm3 constant and `bound` the same under thm1; a verdict needs one of
/// them to be smaller at every such checkpoint.
pub fn discrepancy_check(k: u32, buckets: &[OmegaBuckets]) -> Result<DiscrepancyOutcome> {
    check_k(k)?;
    let top = buckets.last().map_or(0, |b| b.x);
    if top < 10_000_000 {
        return Err(domain!("discrepancy check needs checkpoints through 10^7, got {top}"));
    }
    let thm3 = euler_constant_series(k, Variant::Thm3, DEFAULT_P0, DEFAULT_SERIES_ORDER)?;
    let thm1 = euler_constant_direct(k, Variant::Thm1, DEFAULT_PRIME_LIMIT)?;
    let tail: Vec<&OmegaBuckets> = buckets.iter().filter(|b| b.x >= 2 && b.x * 1000 >= top).collect();
    let mut dev3 = Vec::new();
    let mut dev1 = Vec::new();
    for b in &tail {
        dev3.push((comparison_row(k, b, thm3.value)?.ratio - 1.0).abs());
        dev1.push((comparison_row(k, b, thm1.value)?.ratio - 1.0).abs());
    }
    let verdict = if dev3.iter().zip(&dev1).all(|(a, b)| a < b) {
        Verdict::Thm3
    } else if dev3.iter().zip(&dev1).all(|(a, b)| a > b) {
        Verdict::Thm1
    } else {
        Verdict::Inconclusive
    };
    let xs: Vec<u64> = tail.iter().map(|b| b.x).collect();
    let detail = format!(
        "k={k}; C(thm3)={:.12} C(thm1, P={DEFAULT_PRIME_LIMIT})={:.12}; x={xs:?}; |ratio-1| thm3=[{}] thm1=[{}]; constant_variant: {verdict}",
        thm3.value,
        thm1.value,
        sci_list(&dev3),
        sci_list(&dev1)
    );
    let report = LemmaReport::new(LemmaId::Discrepancy, dev3, dev1, Criterion::Separated, detail);
    Ok(DiscrepancyOutcome {
        report,
        verdict,
        thm3,
        thm1,
    })
}

fn sci_list(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::accumulate_buckets;

    #[test]
    fn theta_small() {
        let want = 2f64.ln() + 3f64.ln() + 5f64.ln() + 7f64.ln();
        assert!((theta(10).unwrap() - want).abs() < 1e-14);
        assert_eq!(theta(2).unwrap(), 2f64.ln());
        assert!(theta(1).is_err());
        let many = theta_many(&[2, 10, 11]).unwrap();
        assert_eq!(many[0], 2f64.ln());
        assert!((many[2] - many[1] - 11f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn criterion_semantics() {
        assert!(Criterion::Below.holds(&[1.0, 2.0], &[1.5, 3.0]));
        assert!(!Criterion::Below.holds(&[1.0, 3.0], &[1.5, 3.0]));
        assert!(!Criterion::Below.holds(&[], &[]));
        assert!(!Criterion::Below.holds(&[1.0], &[2.0, 3.0]));
        assert!(Criterion::Separated.holds(&[3.0, 4.0], &[1.0, 2.0]));
        assert!(!Criterion::Separated.holds(&[3.0, 1.0], &[1.0, 2.0]));
    }

    #[test]
    fn lemma1_small() {
        let r = lemma1_check(2, &[2]).unwrap();
        assert_eq!(r.measured, vec![2f64.ln()]);
        assert_eq!(r.bound, vec![CHEBYSHEV_CONSTANT * 2.0]);
        assert!(r.pass && r.recompute_pass());
        let r3 = lemma1_check(3, &[1_000]).unwrap();
        let r2 = lemma1_check(2, &[1_000]).unwrap();
        assert!((r3.measured[0] / r2.measured[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!(lemma1_check(1, &[10]).is_err());
    }

    #[test]
    fn lemma2_requires_large_checkpoints() {
        assert!(lemma2_check(2, &[100]).is_err());
        let r = lemma2_check(4, &[10_000, 1_000_000]).unwrap();
        assert!(r.pass, "{}", r.detail);
        assert_eq!(*r.measured.last().unwrap(), 0.0);
    }

    #[test]
    fn lemma3_small() {
        let r = lemma3_check(2, 10_000).unwrap();
        assert!(r.pass);
        assert!((r.measured[1] - 1.2578).abs() < 1e-3);
        let a = lemma3_check(2, 100).unwrap().measured[0];
        let b = lemma3_check(2, 1000).unwrap().measured[0];
        assert!(a <= b && b <= r.measured[0]);
    }

    #[test]
    fn lemma4_p2_equality() {
        for k in 2..=9 {
            let t = lemma4_closed_term(k, 2);
            assert!((t - 7.0 * 2f64.ln() / k as f64).abs() < 1e-14);
        }
        let r = lemma4_check(2, 1_000, 60).unwrap();
        assert!(r.pass, "{}", r.detail);
        assert!(lemma4_check(2, 1_000, 5).is_err());
    }

    #[test]
    fn lemma4_direct_converges_to_closed_form() {
        for p in [2u64, 3, 13, 1009] {
            let (d, tail) = lemma4_direct_term(3, p, 60);
            assert!((d - lemma4_closed_term(3, p)).abs() <= tail + 1e-15);
        }
    }

    #[test]
    fn tau_one_sums_are_floor() {
        let rows = tauz_rows(1.0, &[1_000, 12_345]).unwrap();
        assert_eq!(rows[0].sum, 1_000.0);
        assert_eq!(rows[1].sum, 12_345.0);
        assert_eq!(rows[1].e_norm, 0.0);
        assert!(tauz_mean_check(1.0, &[1_000, 10_000]).unwrap().iter().all(|r| r.pass));
        assert!(tauz_mean_check(1.0, &[10]).is_err());
        assert!(tauz_rows(2.5, &[1_000]).is_err());
    }

    #[test]
    fn tau_two_is_divisor_sum() {
        let rows = tauz_rows(2.0, &[1_000, 30_000]).unwrap();
        for r in rows {
            assert_eq!(r.sum, crate::sieve::hyperbola_divisor_sum(r.x) as f64);
        }
    }

    #[test]
    fn main_term_examples() {
        assert!((main_term(2, 1234.0, 1.3).unwrap() - 1.3 * 1234.0).abs() < 1e-9);
        let e2 = std::f64::consts::E.powi(2);
        let want = 0.7 * e2 * 2f64.powf(-0.5) / std::f64::consts::PI.sqrt();
        assert!((main_term(4, e2, 0.7).unwrap() - want).abs() < 1e-12);
        let a = main_term(3, 1e6, 1.0).unwrap();
        assert!((main_term(3, 1e6, 2.5).unwrap() - 2.5 * a).abs() < 1e-6);
        assert!(main_term(3, 1.5, 1.0).is_err());
        assert!(main_term(3, 10.0, 0.0).is_err());
    }

    #[test]
    fn compare_small() {
        let b = accumulate_buckets(10_000, &[10, 100, 10_000], 1 << 12).unwrap();
        let c = euler_constant_series(2, Variant::Thm3, 100, 60).unwrap();
        let rows = compare_series(2, &b, &c).unwrap();
        assert_eq!(rows[0].s_exact.to_string(), "12/1");
        assert!(rows.iter().all(|r| r.e_norm.is_finite()));
        for r in &rows {
            assert!((r.main / r.x as f64 - c.value).abs() < 1e-12);
        }
        assert!(compare_series(2, &b[..2], &c).is_err());
        let narrow = accumulate_buckets(1_000, &[10, 100, 1_000], 1 << 12).unwrap();
        assert!(compare_series(2, &narrow, &c).is_err());
    }

    #[test]
    fn discrepancy_needs_ten_million() {
        let b = accumulate_buckets(10_000, &[100, 10_000], 1 << 12).unwrap();
        assert!(discrepancy_check(2, &b).is_err());
    }
}
