//! Segmented sieve for `d(n)` and `omega(n)`, and exact accumulation of
//! `T_w(x) = sum_{n <= x, omega(n) = w} d(n)`.
//!
//! One pass over `[1, x_max]` fills every checkpoint's buckets; every
//! `S_k(x) = sum_w T_w(x) / k^w` then follows exactly, for any `k`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Default number of slots per sieve segment.
pub const DEFAULT_SEGMENT_SIZE: usize = 1 << 20;
/// Largest `x` the bucket accumulator accepts.
pub const MAX_X: u64 = 10_000_000_000;
/// Enough room for omega(n), n < 2^64 (the product of the first 16 primes exceeds 2^64).
pub const MAX_OMEGA: usize = 16;

/// All primes up to `limit`, from a plain sieve of Eratosthenes.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeTable {
    pub fn new(limit: u64) -> Self {
        let n = limit as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if composite[i] {
                continue;
            }
            primes.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        Self { limit, primes }
    }

    /// Table sufficient to sieve every segment below `hi`.
    pub fn for_range_end(hi: u64) -> Self {
        Self::new(hi.saturating_sub(1).isqrt())
    }

    /// Every prime `<= limit()` is present.
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }
}

/// Calls `f` on every prime `p <= limit` in increasing order, sieving
/// in fixed-size windows so memory stays at `O(sqrt(limit) + window)`.
pub fn for_each_prime(limit: u64, mut f: impl FnMut(u64)) {
    if limit < 2 {
        return;
    }
    const WINDOW: u64 = 1 << 18;
    let base = PrimeTable::new(limit.isqrt());
    let mut mark = vec![false; WINDOW as usize];
    let mut lo = 2u64;
    while lo <= limit {
        let hi = (lo + WINDOW).min(limit + 1);
        let len = (hi - lo) as usize;
        mark[..len].iter_mut().for_each(|m| *m = false);
        for &p in base.primes() {
            if p * p >= hi {
                break;
            }
            let mut m = (p * p).max(lo.div_ceil(p) * p);
            while m < hi {
                mark[(m - lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in mark[..len].iter().enumerate() {
            if !c {
                f(lo + i as u64);
            }
        }
        lo = hi;
    }
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for_each_prime(limit, |p| out.push(p));
    out
}

/// Canonical factorization `n = prod p^alpha`, primes strictly increasing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    pub n: u64,
    pub factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn omega(&self) -> usize {
        self.factors.len()
    }

    pub fn divisor_count(&self) -> u64 {
        self.factors.iter().map(|&(_, a)| a as u64 + 1).product()
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.factors.iter().map(|&(_, a)| a)
    }
}

/// Trial division. Slow for large prime inputs; meant for tests and one-off values.
pub fn factorize(n: u64) -> Result<Factorization> {
    if n == 0 || n >= 1 << 63 {
        return Err(domain!("factorize requires 1 <= n < 2^63, got {n}"));
    }
    let mut rest = n;
    let mut factors = Vec::new();
    let mut strip = |p: u64, rest: &mut u64| {
        if *rest % p == 0 {
            let mut e = 0;
            while *rest % p == 0 {
                *rest /= p;
                e += 1;
            }
            factors.push((p, e));
        }
    };
    strip(2, &mut rest);
    strip(3, &mut rest);
    let mut p = 5u64;
    while p * p <= rest {
        strip(p, &mut rest);
        strip(p + 2, &mut rest);
        p += 6;
    }
    if rest > 1 {
        factors.push((rest, 1));
    }
    Ok(Factorization { n, factors })
}

/// A rational number kept in lowest terms with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(num: BigInt, den: BigInt) -> Result<Self> {
        if den.is_zero() {
            return Err(domain!("zero denominator"));
        }
        Ok(Self(BigRational::new(num, den)))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Self(BigRational::from_integer(n.into()))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }

    /// Correctly rounded when numerator and denominator fit in f64's range.
    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl From<BigRational> for ExactRational {
    fn from(r: BigRational) -> Self {
        Self(r)
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

/// `D_{k,omega}(n) = d(n) / k^omega(n)`, in lowest terms.
pub fn dkw_value(k: u32, n: u64) -> Result<ExactRational> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    let fac = factorize(n)?;
    let num = BigInt::from(fac.divisor_count());
    let den = BigInt::from(k).pow(fac.omega() as u32);
    ExactRational::new(num, den)
}

/// `d` and `omega` for every `n` in `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SieveSegment {
    pub lo: u64,
    pub hi: u64,
    pub d: Vec<u32>,
    pub omega: Vec<u8>,
}

impl SieveSegment {
    pub fn len(&self) -> usize {
        self.d.len()
    }

    pub fn is_empty(&self) -> bool {
        self.d.is_empty()
    }
}

fn check_range(lo: u64, hi: u64, primes: &PrimeTable) -> Result<()> {
    if lo < 1 || hi <= lo {
        return Err(domain!("segment needs 1 <= lo < hi, got [{lo}, {hi})"));
    }
    let need = (hi - 1).isqrt();
    if primes.limit() < need {
        return Err(Error::Precondition(format!(
            "prime table covers {} but segment [{lo}, {hi}) needs primes up to {need}",
            primes.limit()
        )));
    }
    Ok(())
}

/// Strips every sieving prime from a residual cofactor per slot and hands
/// `(slot, p, e)` to `visit` for each prime power `p^e || n`. Whatever
/// remains above 1 afterwards is reported as a single prime with `e = 1`.
fn strip_segment(lo: u64, hi: u64, primes: &PrimeTable, mut visit: impl FnMut(usize, u64, u32)) -> Result<()> {
    check_range(lo, hi, primes)?;
    let len = (hi - lo) as usize;
    let mut cof: Vec<u64> = (lo..hi).collect();
    let top = hi - 1;
    for &p in primes.primes() {
        if p * p > top {
            break;
        }
        let mut m = lo.div_ceil(p) * p;
        while m < hi {
            let i = (m - lo) as usize;
            let mut c = cof[i] / p;
            let mut e = 1;
            while c % p == 0 {
                c /= p;
                e += 1;
            }
            cof[i] = c;
            visit(i, p, e);
            m += p;
        }
    }
    for (i, &c) in cof.iter().enumerate().take(len) {
        if c > 1 {
            if c.checked_mul(c).is_some_and(|sq| sq <= top) {
                return Err(Error::Precondition(format!(
                    "residual cofactor {c} of {} below sqrt(hi); prime list too short",
                    lo + i as u64
                )));
            }
            visit(i, c, 1);
        }
    }
    Ok(())
}

/// Exact `d(n)` and `omega(n)` over `[lo, hi)`.
pub fn sieve_segment(lo: u64, hi: u64, primes: &PrimeTable) -> Result<SieveSegment> {
    check_range(lo, hi, primes)?;
    let len = (hi - lo) as usize;
    let mut d = vec![1u32; len];
    let mut omega = vec![0u8; len];
    strip_segment(lo, hi, primes, |i, _, e| {
        d[i] *= e + 1;
        omega[i] += 1;
    })?;
    Ok(SieveSegment { lo, hi, d, omega })
}

/// Values of the multiplicative function `n -> prod_{p^e || n} local(p, e)`
/// over `[lo, hi)`.
pub fn multiplicative_segment(
    lo: u64,
    hi: u64,
    primes: &PrimeTable,
    local: impl Fn(u64, u32) -> f64,
) -> Result<Vec<f64>> {
    check_range(lo, hi, primes)?;
    let mut out = vec![1.0; (hi - lo) as usize];
    strip_segment(lo, hi, primes, |i, p, e| out[i] *= local(p, e))?;
    Ok(out)
}

/// `T_w(x)` for `w = 0..=W` at a single checkpoint `x`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OmegaBuckets {
    pub x: u64,
    pub t: Vec<u64>,
}

impl OmegaBuckets {
    /// Largest omega attained for `n <= x`.
    pub fn max_omega(&self) -> usize {
        self.t.len().saturating_sub(1)
    }

    /// `sum_{n <= x} d(n)`.
    pub fn divisor_sum(&self) -> u64 {
        self.t.iter().sum()
    }
}

type Bucket = [u64; MAX_OMEGA];

fn add_bucket(acc: &mut Bucket, other: &Bucket, x: u64) -> Result<()> {
    for (w, (a, b)) in acc.iter_mut().zip(other).enumerate() {
        *a = a.checked_add(*b).ok_or(Error::Overflow { x, w })?;
    }
    Ok(())
}

fn validate_checkpoints(x_max: u64, checkpoints: &[u64]) -> Result<Vec<u64>> {
    if checkpoints.is_empty() {
        return Err(domain!("at least one checkpoint required"));
    }
    if x_max > MAX_X {
        return Err(domain!("x_max {x_max} exceeds the supported ceiling {MAX_X}"));
    }
    let mut out: Vec<u64> = Vec::with_capacity(checkpoints.len());
    for &c in checkpoints {
        if c < 1 || c > x_max {
            return Err(domain!("checkpoint {c} outside [1, {x_max}]"));
        }
        match out.last() {
            Some(&last) if c < last => {
                return Err(domain!("checkpoints must be sorted ascending"));
            }
            Some(&last) if c == last => {}
            _ => out.push(c),
        }
    }
    Ok(out)
}

/// Sieves `[1, x_max]` once and returns cumulative buckets for every
/// checkpoint. Segments run on the current rayon pool; the result does not
/// depend on the segment size or the number of threads.
pub fn accumulate_buckets(x_max: u64, checkpoints: &[u64], segment_size: usize) -> Result<Vec<OmegaBuckets>> {
    let cps = validate_checkpoints(x_max, checkpoints)?;
    if segment_size == 0 {
        return Err(domain!("segment size must be positive"));
    }
    // Only the range up to the last checkpoint matters.
    let end = *cps.last().expect("nonempty") + 1;
    let primes = PrimeTable::for_range_end(end);
    let seg = segment_size as u64;
    let nseg = (end - 1).div_ceil(seg);

    // Per segment: bucket deltas for each checkpoint interval it touches.
    // Interval j collects n in (cps[j-1], cps[j]].
    let partials: Vec<Vec<(usize, Bucket)>> = (0..nseg)
        .into_par_iter()
        .map(|s| {
            let lo = 1 + s * seg;
            let hi = (lo + seg).min(end);
            let segment = sieve_segment(lo, hi, &primes)?;
            let mut out: Vec<(usize, Bucket)> = Vec::new();
            let mut j = cps.partition_point(|&c| c < lo);
            let mut cur = [0u64; MAX_OMEGA];
            for (i, (&d, &w)) in segment.d.iter().zip(&segment.omega).enumerate() {
                let n = lo + i as u64;
                while cps[j] < n {
                    out.push((j, cur));
                    cur = [0; MAX_OMEGA];
                    j += 1;
                }
                cur[w as usize] += d as u64;
            }
            out.push((j, cur));
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let mut intervals = vec![[0u64; MAX_OMEGA]; cps.len()];
    for part in &partials {
        for (j, b) in part {
            add_bucket(&mut intervals[*j], b, cps[*j])?;
        }
    }
    let mut running = [0u64; MAX_OMEGA];
    let mut result = Vec::with_capacity(cps.len());
    for (j, b) in intervals.iter().enumerate() {
        add_bucket(&mut running, b, cps[j])?;
        let width = running.iter().rposition(|&t| t != 0).map_or(0, |w| w + 1);
        result.push(OmegaBuckets {
            x: cps[j],
            t: running[..width].to_vec(),
        });
    }
    Ok(result)
}

/// Runs [`accumulate_buckets`] on a dedicated pool of `threads` workers.
pub fn accumulate_buckets_with_threads(
    x_max: u64,
    checkpoints: &[u64],
    segment_size: usize,
    threads: usize,
) -> Result<Vec<OmegaBuckets>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
    pool.install(|| accumulate_buckets(x_max, checkpoints, segment_size))
}

/// `S_k(x) = sum_w T_w(x) / k^w` as a reduced rational, plus its float image.
pub fn exact_mean_sum(buckets: &OmegaBuckets, k: u32) -> Result<(ExactRational, f64)> {
    if k < 2 {
        return Err(domain!("k must be at least 2, got {k}"));
    }
    // Common denominator k^W: numerator = sum_w T_w k^(W-w).
    let top = buckets.max_omega() as u32;
    let kb = BigInt::from(k);
    let mut num = BigInt::zero();
    let mut pow = BigInt::one();
    for w in (0..buckets.t.len()).rev() {
        num += BigInt::from(buckets.t[w]) * &pow;
        pow *= &kb;
    }
    let den = kb.pow(top);
    let r = ExactRational::new(num, den)?;
    let f = r.to_f64();
    Ok((r, f))
}

/// `sum_{j <= x} floor(x / j)` by the hyperbola method.
pub fn hyperbola_divisor_sum(x: u64) -> u64 {
    let r = x.isqrt();
    let s: u64 = (1..=r).map(|j| x / j).sum();
    2 * s - r * r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorize_examples() {
        assert!(factorize(1).unwrap().factors.is_empty());
        assert_eq!(factorize(12).unwrap().factors, vec![(2, 2), (3, 1)]);
        let f = factorize(223_092_870).unwrap();
        let primes: Vec<u64> = f.factors.iter().map(|&(p, _)| p).collect();
        assert_eq!(primes, vec![2, 3, 5, 7, 11, 13, 17, 19, 23]);
        assert!(f.factors.iter().all(|&(_, a)| a == 1));
        assert_eq!(primes.iter().product::<u64>(), 223_092_870);
        assert!(factorize(0).is_err());
    }

    #[test]
    fn dkw_examples() {
        let v = dkw_value(2, 1).unwrap();
        assert_eq!(v.to_string(), "1/1");
        assert_eq!(dkw_value(2, 12).unwrap().to_string(), "3/2");
        assert_eq!(dkw_value(3, 8).unwrap().to_string(), "4/3");
        assert!(dkw_value(1, 5).is_err());
        assert!(dkw_value(2, 0).is_err());
    }

    #[test]
    fn small_segments() {
        let t = PrimeTable::new(10);
        let s = sieve_segment(1, 11, &t).unwrap();
        assert_eq!(s.d, vec![1, 2, 2, 3, 2, 4, 2, 4, 3, 4]);
        assert_eq!(s.omega, vec![0, 1, 1, 1, 1, 2, 1, 1, 1, 2]);
        let s = sieve_segment(2, 3, &t).unwrap();
        assert_eq!((s.d, s.omega), (vec![2], vec![1]));
    }

    #[test]
    fn segment_far_from_origin_matches_trial_division() {
        let lo = 1_000_000;
        let hi = lo + 1_000;
        let t = PrimeTable::for_range_end(hi);
        let s = sieve_segment(lo, hi, &t).unwrap();
        for (i, n) in (lo..hi).enumerate() {
            let f = factorize(n).unwrap();
            assert_eq!(s.d[i] as u64, f.divisor_count(), "d({n})");
            assert_eq!(s.omega[i] as usize, f.omega(), "omega({n})");
        }
    }

    #[test]
    fn short_prime_table_is_rejected() {
        let t = PrimeTable::new(5);
        assert!(matches!(sieve_segment(1, 100, &t), Err(Error::Precondition(_))));
        assert!(sieve_segment(5, 5, &t).is_err());
        assert!(sieve_segment(0, 5, &t).is_err());
    }

    #[test]
    fn buckets_at_ten() {
        let b = accumulate_buckets(10, &[1, 10], 4).unwrap();
        assert_eq!(b[0], OmegaBuckets { x: 1, t: vec![1] });
        assert_eq!(b[1].t, vec![1, 18, 8]);
        assert_eq!(b[1].divisor_sum(), 27);
        assert_eq!(hyperbola_divisor_sum(10), 27);
    }

    #[test]
    fn exact_sums_at_ten() {
        let b = &accumulate_buckets(10, &[10], 1 << 10).unwrap()[0];
        let (s2, f2) = exact_mean_sum(b, 2).unwrap();
        assert_eq!(s2.to_string(), "12/1");
        assert_eq!(f2, 12.0);
        let (s3, f3) = exact_mean_sum(b, 3).unwrap();
        assert_eq!(s3.to_string(), "71/9");
        assert_eq!(f3, 71.0 / 9.0);
        let one = &accumulate_buckets(1, &[1], 8).unwrap()[0];
        for k in 2..7 {
            assert_eq!(exact_mean_sum(one, k).unwrap().0.to_string(), "1/1");
        }
        assert!(exact_mean_sum(b, 1).is_err());
    }

    #[test]
    fn checkpoint_validation() {
        assert!(accumulate_buckets(10, &[], 4).is_err());
        assert!(accumulate_buckets(10, &[5, 3], 4).is_err());
        assert!(accumulate_buckets(10, &[11], 4).is_err());
        assert!(accumulate_buckets(10, &[0, 3], 4).is_err());
        assert!(accumulate_buckets(MAX_X + 1, &[1], 4).is_err());
        let b = accumulate_buckets(10, &[3, 3, 10], 4).unwrap();
        assert_eq!(b.len(), 2);
    }

    #[test]
    fn prime_enumeration() {
        assert_eq!(primes_up_to(30), vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29]);
        assert_eq!(primes_up_to(1), Vec::<u64>::new());
        assert_eq!(primes_up_to(1_000_000).len(), 78_498);
        assert_eq!(PrimeTable::new(1_000_000).primes().len(), 78_498);
    }

    #[test]
    fn hyperbola_matches_direct() {
        for x in [1u64, 2, 3, 17, 100, 1001, 99_999] {
            let direct: u64 = (1..=x).map(|j| x / j).sum();
            assert_eq!(hyperbola_divisor_sum(x), direct);
        }
    }
}
