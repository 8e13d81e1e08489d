//! Small numeric helpers shared by feature extraction and classifiers.

use libm::sqrt;

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation.
pub(crate) fn std_dev(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64;
    sqrt(var)
}

pub(crate) fn min(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

pub(crate) fn max(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Least-squares slope of `xs` against time, with samples spaced `dt` apart.
pub(crate) fn slope(xs: &[f64], dt: f64) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let t_mean = (n - 1) as f64 * dt / 2.0;
    let x_mean = mean(xs);
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, &x) in xs.iter().enumerate() {
        let dt_i = i as f64 * dt - t_mean;
        num += dt_i * (x - x_mean);
        den += dt_i * dt_i;
    }
    num / den
}

/// Index of the largest value; ties resolve to the lowest index.
pub(crate) fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate().skip(1) {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

/// Centered moving average with a symmetric window that shrinks at the
/// edges, so constants and straight lines pass through unchanged.
pub(crate) fn centered_moving_average(xs: &[f64], half_width: usize) -> alloc::vec::Vec<f64> {
    let n = xs.len();
    let mut prefix = alloc::vec::Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for &x in xs {
        acc += x;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| {
            let h = half_width.min(i).min(n - 1 - i);
            let lo = i - h;
            let hi = i + h + 1;
            (prefix[hi] - prefix[lo]) / (hi - lo) as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_exact_line() {
        let xs: alloc::vec::Vec<f64> = (0..100).map(|i| 3.0 + 0.25 * i as f64 * 0.5).collect();
        assert!((slope(&xs, 0.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn moving_average_preserves_lines() {
        let xs: alloc::vec::Vec<f64> = (0..50).map(|i| 1.0 + 2.0 * i as f64).collect();
        let ys = centered_moving_average(&xs, 7);
        for (x, y) in xs.iter().zip(&ys) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax(&[0.2, 0.4, 0.4]), 1);
    }
}
