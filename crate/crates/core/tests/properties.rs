use meanomega_core::dirichlet::{local_convolve, tau_z_series};
use meanomega_core::sieve::{accumulate_buckets, exact_mean_sum, factorize, sieve_segment, PrimeTable};
use meanomega_core::special::{binomial_general, gamma_real, zeta_real};
use proptest::prelude::*;
use std::f64::consts::PI;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn gamma_recurrence(z in 1e-3f64..=3.0) {
        let lhs = gamma_real(z + 1.0).unwrap();
        let rhs = z * gamma_real(z).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs, "z={z}: {lhs} vs {rhs}");
    }

    #[test]
    fn gamma_reflection(z in 0.01f64..0.99) {
        let v = gamma_real(z).unwrap() * gamma_real(1.0 - z).unwrap() * (PI * z).sin() / PI;
        prop_assert!((v - 1.0).abs() <= 1e-11, "z={z}: {v}");
    }

    #[test]
    fn zeta_decreases(a in 1.001f64..30.0, b in 1.001f64..30.0) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(zeta_real(lo).unwrap() > zeta_real(hi).unwrap());
    }

    #[test]
    fn zeta_tail_beyond_two(s in 2.0f64..30.0) {
        // zeta(s) - 1 - 2^-s = sum_{n>=3} n^-s <= 3^-s (1 + 3/(s-1)).
        let rest = zeta_real(s).unwrap() - 1.0 - 2f64.powf(-s);
        prop_assert!(rest <= 3f64.powf(-s) * (1.0 + 3.0 / (s - 1.0)) + 1e-15);
    }

    #[test]
    fn pascal_rule(w in -10.0f64..10.0, a in 1u32..=12) {
        let lhs = binomial_general(w, a);
        let rhs = binomial_general(w - 1.0, a) + binomial_general(w - 1.0, a - 1);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lhs.abs().max(1.0), "w={w} a={a}: {lhs} vs {rhs}");
    }

    #[test]
    fn vandermonde(z in -2.0f64..=2.0, w in -2.0f64..=2.0) {
        let lhs = local_convolve(&tau_z_series(z, 12), &tau_z_series(w, 12)).unwrap();
        let rhs = tau_z_series(z + w, 12);
        for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} vs {b}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn segments_agree_with_factorization(lo in 1u64..5_000_000_000, len in 1u64..2_000) {
        let hi = lo + len;
        let seg = sieve_segment(lo, hi, &PrimeTable::for_range_end(hi)).unwrap();
        for n in lo..hi {
            let f = factorize(n).unwrap();
            let i = (n - lo) as usize;
            prop_assert_eq!(seg.d[i] as u64, f.divisor_count());
            prop_assert_eq!(seg.omega[i] as usize, f.omega());
        }
    }

    #[test]
    fn bucket_sums_are_divisor_sums(x in 1u64..200_000, seg in 1usize..50_000) {
        let b = accumulate_buckets(x, &[x], seg).unwrap();
        let direct: u64 = (1..=x).map(|j| x / j).sum();
        prop_assert_eq!(b[0].divisor_sum(), direct);
    }

    #[test]
    fn mean_sum_increases_with_x(x in 2u64..50_000, k in 2u32..=10) {
        let b = accumulate_buckets(x, &[x - 1, x], 4096).unwrap();
        let (lo, _) = exact_mean_sum(&b[0], k).unwrap();
        let (hi, _) = exact_mean_sum(&b[1], k).unwrap();
        prop_assert!(hi.as_ratio() > lo.as_ratio());
    }
}
