// SPDX-License-Identifier: MIT OR Apache-2.0

//! Property tests for the library invariants.

use heavytail_cpt::advanced::{combined_uses_rsm, stat_weak_plain, test_adaptive, AdaptiveThresholds, RsmSolver};
use heavytail_cpt::experiment::{calibrate, isotonic_fit, TestSpec};
use heavytail_cpt::generators::{gen_noise, NoiseSpec};
use heavytail_cpt::model::{dyadic_grid, pair_differences, upper_median, DataMatrix, PairedMatrix};
use heavytail_cpt::mom::{
    group_sums, stat_mom_dense_with, test_dense_p, test_temporal, MomThresholds, SecondMomentModel,
};
use heavytail_cpt::rates::{rate_lower, rate_upper_minimax, sparsity_boundary, RateFamily, RateQuery, RateRegime};
use heavytail_cpt::robust_mean::{
    geo_mom_mean, robust_1d_with, rsm_estimate, CoverOptions, Robust1dStrategy, RsmMode, RsmProblem,
};
use heavytail_cpt::subweibull::{sparse_g_at, split_cusum, stat_dense_g};
use proptest::prelude::*;

fn matrix(p: usize, n: usize) -> impl Strategy<Value = DataMatrix> {
    prop::collection::vec(-5.0f64..5.0, p * n).prop_map(move |v| DataMatrix::from_columns(p, n, v).unwrap())
}

fn dims() -> impl Strategy<Value = (usize, usize)> {
    (1usize..6, prop::sample::select(vec![8usize, 16, 32, 64]))
}

fn samples(max_t: usize, p: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, p), 24..max_t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dyadic_grid_brackets_every_location(n in 2usize..5000, frac in 0.0f64..1.0) {
        let t0 = ((frac * (n / 2) as f64) as usize).max(1).min(n / 2);
        let grid = dyadic_grid(n).unwrap();
        prop_assert!(grid.scales.iter().any(|&t| t <= t0 && t0 < 2 * t));
    }

    #[test]
    fn upper_median_matches_sort(v in prop::collection::vec(-1e3f64..1e3, 1..64)) {
        let mut sorted = v.clone();
        sorted.sort_by(f64::total_cmp);
        prop_assert_eq!(upper_median(&v).unwrap(), sorted[v.len() / 2]);
    }

    #[test]
    fn pair_differences_are_linear((p, n) in dims(), seed in any::<u64>()) {
        let x = gen_noise(&NoiseSpec::gaussian().with_seed(seed), p, n).unwrap();
        let y = gen_noise(&NoiseSpec::student(3.0, 4.0).with_seed(seed ^ 1), p, n).unwrap();
        let (zx, zy, zs) = (pair_differences(&x), pair_differences(&y), pair_differences(&x.add(&y).unwrap()));
        for i in 0..zs.m() {
            for j in 0..p {
                prop_assert!((zs.get(j, i) - zx.get(j, i) - zy.get(j, i)).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn generators_are_seed_deterministic(seed in any::<u64>(), alpha in 0.5f64..2.0) {
        let spec = NoiseSpec::subweibull(alpha).with_seed(seed);
        prop_assert_eq!(gen_noise(&spec, 3, 16).unwrap(), gen_noise(&spec, 3, 16).unwrap());
    }

    #[test]
    fn dense_g_invariant_to_common_mean(x in matrix(4, 32), shift in prop::collection::vec(-50.0f64..50.0, 4)) {
        let shifted: Vec<f64> = x.values().chunks(4).flat_map(|c| c.iter().zip(&shift).map(|(a, b)| a + b)).collect();
        let y = DataMatrix::from_columns(4, 32, shifted).unwrap();
        for ((t1, a), (t2, b)) in stat_dense_g(&x).unwrap().into_iter().zip(stat_dense_g(&y).unwrap()) {
            prop_assert_eq!(t1, t2);
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn sparse_g_without_threshold_is_half_sample_sum(x in matrix(5, 64), k in 1u32..6) {
        let t = 1usize << k;
        let y1 = split_cusum(&x, t).unwrap().y1;
        let direct: f64 = y1.iter().map(|y| y * y - 1.0).sum();
        let (stat, count) = sparse_g_at(&x, t, 0.0).unwrap();
        prop_assert_eq!(count, 5);
        prop_assert!((stat - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
    }

    #[test]
    fn sparse_g_nonincreasing_in_threshold_on_zero_noise(
        delta in prop::collection::vec(-4.0f64..4.0, 6),
        a1 in 1.0f64..3.0,
        gap in 0.0f64..3.0,
    ) {
        // With a >= 1 every selected coordinate has Y^2 >= 1, so each contributes a nonnegative term.
        let (p, n, t0) = (6usize, 64usize, 32usize);
        let values = (0..n).flat_map(|t| delta.iter().map(move |d| if t < t0 { 0.0 } else { *d })).collect();
        let x = DataMatrix::from_columns(p, n, values).unwrap();
        for t in [2usize, 4, 8, 16, 32] {
            let lo = sparse_g_at(&x, t, a1).unwrap().0;
            let hi = sparse_g_at(&x, t, a1 + gap).unwrap().0;
            prop_assert!(hi <= lo + 1e-12);
        }
    }

    #[test]
    fn single_group_mom_collapses((p, n) in dims(), seed in any::<u64>(), k in 0u32..5) {
        let t = (1usize << k).min(n / 2);
        let x = gen_noise(&NoiseSpec::gaussian().with_seed(seed), p, n).unwrap();
        let z = pair_differences(&x);
        let mean: Vec<f64> = (0..p).map(|j| (0..t).map(|i| z.get(j, i)).sum::<f64>() / t as f64).collect();
        let direct = t as f64 * (mean.iter().map(|m| m * m).sum::<f64>() - p as f64 / t as f64);
        let got = stat_mom_dense_with(&z, t, 1).unwrap();
        prop_assert!((got - direct).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn group_sums_ignore_order_within_groups(seed in any::<u64>(), swap in 0usize..4) {
        let (p, t, groups) = (3usize, 16usize, 4usize);
        let x = gen_noise(&NoiseSpec::gaussian().with_seed(seed), p, 2 * t).unwrap();
        let z = pair_differences(&x);
        let mut cols: Vec<Vec<f64>> = (0..z.m()).map(|i| z.column(i).to_vec()).collect();
        let g = swap % groups;
        cols.swap(g * 4, g * 4 + 3);
        let permuted = PairedMatrix::from_columns(p, z.m(), cols.concat()).unwrap();
        let (a, b) = (group_sums(&z, t, groups).unwrap(), group_sums(&permuted, t, groups).unwrap());
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
    }

    #[test]
    fn mom_exceedance_needs_half_the_groups(seed in any::<u64>(), r in 0.0f64..20.0) {
        let (p, t, groups) = (4usize, 32usize, 8usize);
        let x = gen_noise(&NoiseSpec::student(3.0, 3.5).with_seed(seed), p, 2 * t).unwrap();
        let z = pair_differences(&x);
        if stat_mom_dense_with(&z, t, groups).unwrap() > r {
            let sums = group_sums(&z, t, groups).unwrap();
            let above = sums.iter().filter(|&&g| g > r / t as f64).count();
            prop_assert!(above >= groups / 2);
        }
    }

    #[test]
    fn temporal_with_zero_r1_matches_dense(seed in any::<u64>(), scale in 0.1f64..3.0) {
        let x = gen_noise(&NoiseSpec::student(3.0, 4.0).with_seed(seed), 6, 64).unwrap();
        let thr = MomThresholds::dense_theory(6, 64, 3.0, 1.0).unwrap().scaled(scale);
        let a = test_dense_p(&x, &thr).unwrap();
        let b = test_temporal(&x, &thr, &SecondMomentModel::Ma1Plugin { r1: 0.0 }).unwrap();
        prop_assert_eq!(a.reject, b.reject);
        prop_assert_eq!(a.entries, b.entries);
    }

    #[test]
    fn rsm_estimate_is_sparse(z in samples(48, 4), s in 1usize..3, exact in any::<bool>()) {
        let mode = if exact { RsmMode::ExactSmall } else { RsmMode::Subgradient };
        let mu = rsm_estimate(&z, s, 0.1, mode).unwrap();
        prop_assert!(mu.iter().filter(|&&m| m != 0.0).count() <= s);
    }

    #[test]
    fn rsm_objective_is_lipschitz(
        z in samples(40, 3),
        mu in prop::collection::vec(-3.0f64..3.0, 3),
        nu in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let problem = RsmProblem::new(&z, 2, 0.1, &CoverOptions::default()).unwrap();
        let dist = mu.iter().zip(&nu).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((problem.objective(&mu) - problem.objective(&nu)).abs() <= dist + 1e-10);
    }

    #[test]
    fn robust_1d_translation_equivariant(
        v in prop::collection::vec(-10.0f64..10.0, 1..60),
        c in -1e3f64..1e3,
        delta in 0.01f64..0.9,
        which in 0usize..3,
    ) {
        let strategy = [
            Robust1dStrategy::ShortestInterval { c: 1.0 },
            Robust1dStrategy::MedianOfMeans,
            Robust1dStrategy::TrimmedMean { c: 1.0 },
        ][which];
        let moved: Vec<f64> = v.iter().map(|x| x + c).collect();
        let a = robust_1d_with(&v, delta, strategy).unwrap();
        let b = robust_1d_with(&moved, delta, strategy).unwrap();
        prop_assert!((b - a - c).abs() <= 1e-9 * (1.0 + c.abs()));
    }

    #[test]
    fn geo_mom_translation_equivariant(z in samples(64, 3), shift in prop::collection::vec(-50.0f64..50.0, 3)) {
        let moved: Vec<Vec<f64>> = z.iter().map(|v| v.iter().zip(&shift).map(|(a, b)| a + b).collect()).collect();
        let a = geo_mom_mean(&z, 0.2).unwrap();
        let b = geo_mom_mean(&moved, 0.2).unwrap();
        for ((x, y), c) in a.iter().zip(&b).zip(&shift) {
            prop_assert!((y - x - c).abs() <= 1e-6);
        }
    }

    #[test]
    fn adaptive_rejects_when_dense_rejects(seed in any::<u64>(), size in 0.0f64..2.0, scale in 0.05f64..2.0) {
        let (p, n) = (8usize, 64usize);
        let noise = gen_noise(&NoiseSpec::student(4.0, 4.5).with_seed(seed), p, n).unwrap();
        let values = noise
            .values()
            .chunks(p)
            .enumerate()
            .flat_map(|(t, c)| c.iter().map(move |v| if t >= n / 2 { v + size } else { *v }))
            .collect();
        let x = DataMatrix::from_columns(p, n, values).unwrap();
        let thr = AdaptiveThresholds::theory(p, n, 4.0, 0.1, [1.0; 7]).unwrap().scaled(scale);
        let dense = test_dense_p(&x, &thr.dense).unwrap();
        let adaptive = test_adaptive(&x, &thr, &RsmSolver::default()).unwrap();
        prop_assert!(!dense.reject || adaptive.reject);
        prop_assert_eq!(adaptive.reject, adaptive.entries.iter().any(|e| e.fired));
    }

    #[test]
    fn combined_predicate_depends_on_dimensions_only(p in 1usize..200, n in 2usize..2000, alpha in 2.0f64..12.0) {
        prop_assert_eq!(combined_uses_rsm(p, n, alpha), combined_uses_rsm(p, n, alpha));
    }

    #[test]
    fn weak_plain_statistic_is_mean_norm(seed in any::<u64>(), k in 1u32..5) {
        let t = 1usize << k;
        let x = gen_noise(&NoiseSpec::gaussian().with_seed(seed), 3, 32).unwrap();
        let z = pair_differences(&x);
        let norm = (0..3)
            .map(|j| ((0..t).map(|i| z.get(j, i)).sum::<f64>() / t as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        prop_assert!((stat_weak_plain(&z, t) - norm).abs() <= 1e-12);
    }

    #[test]
    fn sparsity_boundary_identity(p in 4.0f64..1e5, alpha in 4.0f64..30.0) {
        let s = sparsity_boundary(RateFamily::Polytail, p, alpha).unwrap();
        let target = p.powf((2.0 / alpha).max(0.5));
        prop_assert!((s * (p / s).powf(2.0 / alpha) - target).abs() <= 1e-9 * target);
    }

    #[test]
    fn no_sparse_regime_below_four(p in 1usize..400, alpha in 2.0f64..=4.0) {
        let floor = (p as f64).powf(2.0 / alpha) * (1.0 - 1e-9);
        for s in 1..=p {
            prop_assert!(s as f64 * (p as f64 / s as f64).powf(2.0 / alpha) >= floor);
        }
    }

    #[test]
    fn upper_and_lower_rates_within_lllog(
        p in 1usize..5000,
        n in 2usize..100_000,
        sfrac in 0.0f64..1.0,
        poly in any::<bool>(),
        alpha_raw in 0.0f64..1.0,
    ) {
        let s = ((sfrac * p as f64) as usize).clamp(1, p);
        let (family, alpha) =
            if poly { (RateFamily::Polytail, 2.0 + 10.0 * alpha_raw) } else { (RateFamily::Subweibull, 0.2 + 1.8 * alpha_raw) };
        let upper = rate_upper_minimax(family, p, n, s, alpha).unwrap();
        let lower = rate_lower(&RateQuery::new(family, RateRegime::Lower, p, n, s, alpha)).unwrap();
        let l = (8.0 * n as f64).ln().ln();
        prop_assert!(upper <= l * lower * (1.0 + 1e-12), "upper {} lower {} l {}", upper, lower, l);
        prop_assert!(lower <= 2.0 * upper * (1.0 + 1e-12), "upper {} lower {}", upper, lower);
    }

    #[test]
    fn isotonic_fit_is_monotone_and_mean_preserving(v in prop::collection::vec(0.0f64..1.0, 1..30)) {
        let fit = isotonic_fit(&v, &vec![1.0; v.len()]);
        prop_assert!(fit.windows(2).all(|w| w[0] <= w[1] + 1e-15));
        let (a, b): (f64, f64) = (v.iter().sum(), fit.iter().sum());
        prop_assert!((a - b).abs() <= 1e-9);
        prop_assert_eq!(isotonic_fit(&fit, &vec![1.0; fit.len()]), fit);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn calibration_is_reproducible(seed in any::<u64>()) {
        let test = TestSpec::DenseP { alpha: 4.0 };
        let a = calibrate(&test, &NoiseSpec::gaussian(), 5, 32, 0.1, 200, seed).unwrap();
        let b = calibrate(&test, &NoiseSpec::gaussian(), 5, 32, 0.1, 200, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
