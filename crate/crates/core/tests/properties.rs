//! Property tests of the model, estimator, resampling, breakdown and
//! reporting invariants.

use proptest::prelude::*;
use robpred::breakdown::{
    conventional_bootstrap_bounds, conventional_subsampling_bounds, BreakdownQuery,
};
use robpred::calibration::{select_block_size, CalibrationConfig};
use robpred::cli::{build_dividend_yield, build_horizon_returns, Dataset};
use robpred::estimators::{
    choose_c, huber_fit, huber_weights, ols_fit, psi, score_norms, Theta, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use robpred::experiments::{oos_r2, ExperimentReport, ReportRow};
use robpred::model::{
    contaminate_with_mask, simulate_dgp, ContaminationConfig, DgpConfig, TimeSeriesSample,
};
use robpred::resampling::{
    analyze, conventional_distribution, fast_robust_distribution, quantile, Mode, ResamplingConfig,
    ResamplingDistribution,
};

fn sample(n: usize, beta: f64, rho: f64, phi: f64, seed: u64) -> TimeSeriesSample {
    simulate_dgp(&DgpConfig::univariate(n, beta, rho, phi).with_seed(seed)).unwrap()
}

fn dgp_args() -> impl Strategy<Value = (usize, f64, f64, f64, u64)> {
    (
        30usize..120,
        -0.5f64..0.5,
        0.0f64..0.95,
        -2.0f64..0.0,
        any::<u64>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn simulation_is_reproducible((n, beta, rho, phi, seed) in dgp_args()) {
        let a = sample(n, beta, rho, phi, seed);
        let b = sample(n, beta, rho, phi, seed);
        prop_assert_eq!(a.y(), b.y());
        prop_assert_eq!(a.predictor(0), b.predictor(0));
    }

    #[test]
    fn contamination_only_touches_responses((n, beta, rho, phi, seed) in dgp_args(), eta in 0.0f64..0.5, mult in 1.5f64..5.0) {
        let clean = sample(n, beta, rho, phi, seed);
        let out = contaminate_with_mask(&clean, &ContaminationConfig { eta, multiplier: mult, seed }).unwrap();
        prop_assert_eq!(out.sample.n(), n);
        prop_assert_eq!(out.sample.predictor(0), clean.predictor(0));
        let changed: Vec<usize> = (0..n).filter(|&t| out.sample.y()[t] != clean.y()[t]).collect();
        prop_assert!(changed.iter().all(|t| out.replaced.contains(t)));
        prop_assert!(changed.len() <= out.replaced.len());
        // with positive responses every replaced value is the multiple of the maximum
        let shifted: Vec<f64> = clean.y().iter().map(|y| y.abs() + 1.0).collect();
        let positive = clean.with_responses(shifted.clone()).unwrap();
        let out = contaminate_with_mask(&positive, &ContaminationConfig { eta, multiplier: mult, seed }).unwrap();
        let top = shifted.iter().copied().fold(f64::MIN, f64::max);
        for &t in &out.replaced {
            prop_assert_eq!(out.sample.y()[t], mult * top);
        }
        prop_assert_eq!((0..n).filter(|&t| out.sample.y()[t] != shifted[t]).count(), out.replaced.len());
    }

    #[test]
    fn weights_are_bounded((n, beta, rho, phi, seed) in dgp_args(), a in -2.0f64..2.0, b in -2.0f64..2.0, c in 0.05f64..5.0) {
        let s = sample(n, beta, rho, phi, seed);
        let theta = Theta::new(a, vec![b]);
        let w = huber_weights(&s.view(), &theta, c);
        let g = score_norms(&s.view(), &theta);
        for (h, norm) in w.iter().zip(&g) {
            prop_assert!(*h > 0.0 && *h <= 1.0);
            prop_assert_eq!(*h < 1.0, *norm > c);
            prop_assert!(h * norm <= c * (1.0 + 1e-12) || *h == 1.0);
        }
    }

    #[test]
    fn huber_fit_solves_the_estimating_equation((n, beta, rho, phi, seed) in dgp_args(), level in 0.5f64..0.99, eta in 0.0f64..0.1) {
        let clean = sample(n, beta, rho, phi, seed);
        let s = contaminate_with_mask(&clean, &ContaminationConfig::new(eta, seed)).unwrap().sample;
        let c = choose_c(&s.view(), level).unwrap();
        let fit = huber_fit(&s.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(psi(&s.view(), &fit.theta, c).norm() <= DEFAULT_TOL);
    }

    #[test]
    fn huber_reduces_to_ols_for_large_c((n, beta, rho, phi, seed) in dgp_args()) {
        let s = sample(n, beta, rho, phi, seed);
        let ols = ols_fit(&s.view()).unwrap();
        let c = score_norms(&s.view(), &ols.theta).into_iter().fold(0.0, f64::max) * 1.0001;
        let fit = huber_fit(&s.view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!((fit.theta.intercept - ols.theta.intercept).abs() <= 10.0 * DEFAULT_TOL);
        prop_assert!((fit.theta.slopes[0] - ols.theta.slopes[0]).abs() <= 10.0 * DEFAULT_TOL);
    }

    #[test]
    fn quantile_is_monotone(draws in prop::collection::vec(-1e3f64..1e3, 1..60), t1 in 0.01f64..0.99, t2 in 0.01f64..0.99) {
        let d = ResamplingDistribution::new(draws, 10);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        prop_assert!(quantile(&d, lo).unwrap() <= quantile(&d, hi).unwrap());
    }

    #[test]
    fn interval_and_test_agree((n, beta, rho, phi, seed) in dgp_args(), robust in any::<bool>(), conf in 0.8f64..0.99) {
        let s = sample(n, beta, rho, phi, seed);
        let m = (n / 6).max(5);
        let mode = if robust { Mode::FastRobust } else { Mode::Conventional };
        let c = if robust { choose_c(&s.view(), 0.9).unwrap() } else { f64::INFINITY };
        let a = analyze(&s, &ResamplingConfig::subsampling(m, mode, c), 1).unwrap();
        let ci = a.symmetric_ci(conf).unwrap();
        let est = a.estimate();
        prop_assert!(((ci.upper - est) - (est - ci.lower)).abs() <= 1e-12 * (1.0 + ci.upper.abs() + ci.lower.abs()));
        let test = a.test(conf).unwrap();
        prop_assert_eq!(test.reject, !ci.contains(0.0));
        prop_assert_eq!(test.reject, test.statistic > test.critical_value);
    }

    #[test]
    fn seeds_move_bootstrap_but_not_subsampling((n, beta, rho, phi, seed) in dgp_args()) {
        let s = sample(n, beta, rho, phi, seed);
        let m = (n / 6).max(5);
        let sub = |seed| {
            let mut cfg = ResamplingConfig::subsampling(m, Mode::Conventional, f64::INFINITY);
            cfg.seed = seed;
            conventional_distribution(&s, &cfg, 1).unwrap()
        };
        prop_assert_eq!(sub(1).draws().to_vec(), sub(2).draws().to_vec());
        let boot = |seed| conventional_distribution(&s, &ResamplingConfig::bootstrap(m, 50, Mode::Conventional, f64::INFINITY, seed), 1).unwrap();
        prop_assert_ne!(boot(1).draws().to_vec(), boot(2).draws().to_vec());
    }

    #[test]
    fn breakdown_bounds_are_ordered(n in 20usize..300, m in 2usize..40, t in 0.5f64..0.99, b in 0.05f64..0.5) {
        prop_assume!(m <= n);
        let q = BreakdownQuery::new(n, m, t, b);
        let s = conventional_subsampling_bounds(&q).unwrap();
        let bb = conventional_bootstrap_bounds(&q).unwrap();
        prop_assert!(s.lower <= s.upper && bb.lower <= bb.upper);
        prop_assert!(s.upper <= 0.5 && bb.upper <= 0.5);
    }

    #[test]
    fn r2_is_antisymmetric(data in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0, -5.0f64..5.0), 2..30)) {
        let y: Vec<f64> = data.iter().map(|d| d.0).collect();
        let a: Vec<f64> = data.iter().map(|d| d.1).collect();
        let b: Vec<f64> = data.iter().map(|d| d.2).collect();
        if let (Ok(ab), Ok(ba)) = (oos_r2(&y, &a, &b), oos_r2(&y, &b, &a)) {
            if ab != 0.0 && ba != 0.0 {
                prop_assert_eq!(ab.signum(), -ba.signum());
            }
        }
    }

    #[test]
    fn constructed_series_lengths(n in 12usize..60, k in 1usize..6, d in 0.01f64..1.0, r in 0.0f64..0.02) {
        prop_assume!(k < n);
        let ds = Dataset {
            dates: (0..n).map(|t| format!("{t:04}")).collect(),
            price: (0..n).map(|t| 50.0 + t as f64).collect(),
            dividend_monthly: vec![d; n],
            short_rate: vec![r; n],
            extra_predictors: Default::default(),
        };
        prop_assert_eq!(build_dividend_yield(&ds).unwrap().len(), n - 11);
        prop_assert_eq!(build_horizon_returns(&ds, k).unwrap().len(), n - k);
    }

    #[test]
    fn reports_round_trip(values in prop::collection::vec((any::<f64>(), 0.0f64..1.0), 1..10)) {
        let rows = values
            .iter()
            .enumerate()
            .map(|(i, (v, se))| ReportRow::new(format!("k{i}"), "m", "metric", *v, *se, 7))
            .collect();
        let report = ExperimentReport::new("demo", &serde_json::json!({ "seed": 1 }), rows).unwrap();
        let back = ExperimentReport::from_json(&report.to_json().unwrap()).unwrap();
        prop_assert_eq!(back, report);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn selected_block_size_is_on_the_grid(seed in any::<u64>()) {
        let s = sample(120, 0.0, 0.9, -1.0, seed);
        let cfg = CalibrationConfig { m_grid: vec![6, 9, 12, 15, 18], seed, ..Default::default() };
        let choice = select_block_size(&s, &cfg).unwrap();
        prop_assert!(cfg.m_grid.contains(&choice.m));
        prop_assert_eq!(select_block_size(&s, &cfg).unwrap(), choice);
    }
}

#[test]
fn full_length_block_is_degenerate() {
    let s = sample(50, 0.1, 0.9, -1.0, 7);
    let conv = conventional_distribution(
        &s,
        &ResamplingConfig::subsampling(50, Mode::Conventional, f64::INFINITY),
        1,
    )
    .unwrap();
    assert!(conv.draws().iter().all(|&d| d == 0.0));
    let c = choose_c(&s.view(), 0.9).unwrap();
    let fast = fast_robust_distribution(
        &s,
        &ResamplingConfig::subsampling(50, Mode::FastRobust, c),
        1,
    )
    .unwrap();
    assert!(fast.draws().iter().all(|&d| d == 0.0));
}

#[test]
fn huge_c_matches_the_unweighted_draws() {
    let s = sample(120, 0.0, 0.9, -1.0, 8);
    let at = |c| {
        fast_robust_distribution(
            &s,
            &ResamplingConfig::subsampling(20, Mode::FastRobust, c),
            1,
        )
        .unwrap()
    };
    let (big, unweighted) = (at(1e9), at(f64::INFINITY));
    let gap = big
        .draws()
        .iter()
        .zip(unweighted.draws())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(gap < 1e-6, "{gap}");
}

#[test]
fn robust_fit_stays_bounded_as_one_response_explodes() {
    let s = sample(100, 0.1, 0.5, -1.0, 9);
    let c = choose_c(&s.view(), 0.9).unwrap();
    let shifted = |delta: f64| s.with_response(40, s.y()[40] + delta);
    let robust = |delta| {
        huber_fit(&shifted(delta).view(), c, DEFAULT_TOL, DEFAULT_MAX_ITER)
            .unwrap()
            .theta
    };
    let (near, far) = (robust(1e3), robust(1e6));
    assert!((far.slopes[0] - near.slopes[0]).abs() <= 0.1 * near.slopes[0].abs().max(0.05));
    assert!((far.intercept - near.intercept).abs() <= 0.1 * near.intercept.abs().max(0.05));
    let ols = |delta| ols_fit(&shifted(delta).view()).unwrap().theta;
    let ratio =
        (ols(1e6).intercept - ols(0.0).intercept) / (ols(1e3).intercept - ols(0.0).intercept);
    assert!(
        (ratio - 1e3).abs() < 1.0,
        "OLS moves linearly in the shift: {ratio}"
    );
}
