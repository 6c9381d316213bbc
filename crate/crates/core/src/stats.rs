//! Empirical-distribution helpers shared across modules.

/// 1-based order-statistic index `ceil(t * n)` of the left-continuous
/// `t`-quantile `inf { x : F_n(x) >= t }`, robust to `t * n` landing a hair
/// above an integer through rounding.
pub fn order_index(n: usize, t: f64) -> usize {
    let pos = t * n as f64;
    let nearest = pos.round();
    let idx = if (pos - nearest).abs() <= 1e-9 * (1.0 + pos.abs()) {
        nearest
    } else {
        pos.ceil()
    };
    (idx as usize).clamp(1, n)
}

/// `t`-quantile of an ascending slice (may contain `+inf` at the end).
pub fn quantile_sorted(sorted: &[f64], t: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    sorted[order_index(sorted.len(), t) - 1]
}

/// Sorts with `+inf` (and anything non-finite mapped to `+inf`) last.
pub fn sort_extended(values: &mut [f64]) {
    for v in values.iter_mut() {
        if !v.is_finite() {
            *v = f64::INFINITY;
        }
    }
    values.sort_by(f64::total_cmp);
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two values.
pub fn std_dev(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Lag-1 sample autocorrelation.
pub fn autocorrelation_lag1(values: &[f64]) -> f64 {
    let m = mean(values);
    let denom: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    let num: f64 = values.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
    num / denom
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn left_continuous_quantile() {
        let d = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&d, 0.5), 2.0);
        assert_eq!(quantile_sorted(&d, 0.51), 3.0);
        assert_eq!(quantile_sorted(&d, 0.99), 4.0);
        assert_eq!(quantile_sorted(&d, 0.01), 1.0);
    }

    #[test]
    fn rounding_noise_does_not_bump_the_index() {
        // 0.9 * 10 = 9.000000000000002 in floating point
        assert_eq!(order_index(10, 0.9), 9);
        assert_eq!(order_index(100, 0.95), 95);
    }

    #[test]
    fn non_finite_values_sort_last() {
        let mut v = [f64::INFINITY, 1.0, f64::NAN, -2.0];
        sort_extended(&mut v);
        assert_eq!(&v[..2], &[-2.0, 1.0]);
        assert!(v[2..].iter().all(|x| *x == f64::INFINITY));
    }
}
