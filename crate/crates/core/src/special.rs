//! Scalar building blocks: real Gamma, real zeta, generalized binomial
//! coefficients and a few numerically careful complex helpers.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{FromPrimitive, Num};

use crate::error::{domain, Result};

pub type ComplexScalar = Complex64;

/// Lanczos coefficients for g = 7, n = 9.
const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = KahanSum::new();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Gamma on (0, 4].
///
/// Arguments below 1/2 are shifted up with `Gamma(z) = Gamma(z + 1) / z` so the
/// Lanczos sum is only evaluated where it is accurate.
pub fn gamma_real(z: f64) -> Result<f64> {
    if !(z > 0.0 && z <= 4.0) {
        return Err(domain!("gamma_real defined on (0, 4], got {z}"));
    }
    if z.fract() == 0.0 {
        // (z - 1)! for z = 1, 2, 3, 4
        return Ok((1..z as u32).product::<u32>() as f64);
    }
    if z < 0.5 {
        return Ok(lanczos_gamma(z + 1.0) / z);
    }
    Ok(lanczos_gamma(z))
}

fn lanczos_gamma(z: f64) -> f64 {
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * acc
}

/// B_2, B_4, ..., B_24.
const BERNOULLI_EVEN: [f64; 12] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

const EM_CUTOFF: u32 = 16;

/// Riemann zeta for real s > 1 by Euler-Maclaurin summation.
pub fn zeta_real(s: f64) -> Result<f64> {
    Ok(1.0 + zeta_minus_one(s)?)
}

/// `zeta(s) - 1`, accurate in relative terms even when s is large.
pub fn zeta_minus_one(s: f64) -> Result<f64> {
    if !(s > 1.0) || !s.is_finite() {
        return Err(domain!("zeta_real requires finite s > 1, got {s}"));
    }
    let n = EM_CUTOFF as f64;
    // Largest terms last.
    let mut acc = KahanSum::new();
    let mut tail = KahanSum::new();
    tail.add(n.powf(1.0 - s) / (s - 1.0));
    tail.add(0.5 * n.powf(-s));
    // Term j carries B_2j / (2j)! * s (s+1) ... (s+2j-2) * n^(-s-2j+1).
    let mut rising = s;
    let mut fact = 2.0;
    let mut npow = n.powf(-s - 1.0);
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        let term = b / fact * rising * npow;
        tail.add(term);
        if term.abs() < 1e-18 * tail.value().abs() {
            break;
        }
        let m = 2.0 * (j as f64 + 1.0);
        rising *= (s + m - 1.0) * (s + m);
        fact *= (m + 1.0) * (m + 2.0);
        npow /= n * n;
    }
    acc.add(tail.value());
    for k in (2..EM_CUTOFF).rev() {
        acc.add((k as f64).powf(-s));
    }
    Ok(acc.value())
}

/// `binom(w, a) = w (w-1) ... (w-a+1) / a!`, for any field-like scalar.
pub fn binomial_general<T>(w: T, a: u32) -> T
where
    T: Clone + Num + FromPrimitive,
{
    let mut acc = T::one();
    for i in 0..a {
        let num = w.clone() - T::from_u32(i).expect("small integer");
        let den = T::from_u32(i + 1).expect("small integer");
        acc = acc * num / den;
    }
    acc
}

/// Principal power `base^exp`.
pub fn cpow(base: ComplexScalar, exp: ComplexScalar) -> ComplexScalar {
    if base == Complex64::new(0.0, 0.0) {
        return Complex64::new(0.0, 0.0);
    }
    (exp * base.ln()).exp()
}

/// `p^(-s)` for a positive real base.
pub fn real_pow_neg(p: f64, s: ComplexScalar) -> ComplexScalar {
    (-s * p.ln()).exp()
}

/// Principal `ln(1 + z)` without cancellation for small |z|.
pub fn cln_1p(z: ComplexScalar) -> ComplexScalar {
    let (x, y) = (z.re, z.im);
    if z.norm() > 0.5 {
        return (Complex64::new(1.0, 0.0) + z).ln();
    }
    let re = 0.5 * (2.0 * x + x * x + y * y).ln_1p();
    let im = y.atan2(1.0 + x);
    Complex64::new(re, im)
}

/// `exp(z) - 1` without cancellation for small |z|.
pub fn cexp_m1(z: ComplexScalar) -> ComplexScalar {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half * half;
    let im = x.exp() * y.sin();
    Complex64::new(re, im)
}
