//! Composite Newton–Cotes quadrature on uniform grids and distances between
//! sampled densities.

use crate::error::{Error, Result};

/// Weights of the composite Simpson rule on `n` uniformly spaced nodes with
/// spacing `h`.
///
/// An odd number of intervals closes with the 3/8 rule on the last three;
/// two nodes fall back to the trapezoid rule.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    assert!(n >= 2, "simpson_weights needs at least two nodes");
    let intervals = n - 1;
    let mut w = vec![0.0; n];
    if intervals == 1 {
        w[0] = h / 2.0;
        w[1] = h / 2.0;
        return w;
    }
    let simpson_end = if intervals % 2 == 0 { intervals } else { intervals - 3 };
    let mut k = 0;
    while k < simpson_end {
        w[k] += h / 3.0;
        w[k + 1] += 4.0 * h / 3.0;
        w[k + 2] += h / 3.0;
        k += 2;
    }
    if simpson_end < intervals {
        let s = simpson_end;
        let c = 3.0 * h / 8.0;
        w[s] += c;
        w[s + 1] += 3.0 * c;
        w[s + 2] += 3.0 * c;
        w[s + 3] += c;
    }
    w
}

/// Uniform nodes on `[a, b]` with their Simpson weights.
pub fn simpson_rule(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|k| a + k as f64 * h).collect();
    (nodes, simpson_weights(n, h))
}

pub fn integrate(values: &[f64], h: f64) -> f64 {
    simpson_weights(values.len(), h)
        .iter()
        .zip(values)
        .map(|(w, v)| w * v)
        .sum()
}

/// Total-variation distance `½∫|a/∫a − b/∫b|` between two densities sampled
/// on the same uniform grid.
pub fn total_variation(a: &[f64], b: &[f64], h: f64) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "grid mismatch: {} vs {} samples",
            a.len(),
            b.len()
        )));
    }
    let na = integrate(a, h);
    let nb = integrate(b, h);
    if na.abs() < f64::MIN_POSITIVE || nb.abs() < f64::MIN_POSITIVE {
        return Err(Error::invalid("cannot normalize a density with zero mass"));
    }
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).abs()).collect();
    Ok(0.5 * integrate(&diff, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_cubics_with_either_parity() {
        for n in [3usize, 4, 5, 8, 11, 64] {
            let (x, w) = simpson_rule(-1.0, 2.0, n);
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * (x * x * x - 2.0 * x + 1.0)).sum();
            // ∫_{-1}^{2} x³ − 2x + 1 dx = 15/4 − 3 + 3
            assert!((s - 3.75).abs() < 1e-12, "n = {n}: {s}");
        }
    }

    #[test]
    fn two_nodes_is_trapezoid() {
        let w = simpson_weights(2, 0.5);
        assert_eq!(w, vec![0.25, 0.25]);
    }

    #[test]
    fn tv_of_identical_and_disjoint() {
        let a = vec![0.0, 1.0, 2.0, 1.0, 0.0];
        assert_eq!(total_variation(&a, &a, 0.1).unwrap(), 0.0);
        let b = vec![1.0, 0.0, 0.0, 0.0, 0.0];
        let c = vec![0.0, 0.0, 0.0, 0.0, 1.0];
        assert!((total_variation(&b, &c, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(total_variation(&a, &b[..4], 1.0).is_err());
    }
}
