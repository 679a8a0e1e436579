//! Small dense-vector helpers. Estimates live in `R^m` with desk-scale `m`,
//! so plain slices are used throughout.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += s * x`
pub fn axpy(s: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += s * xi;
    }
}

/// Weighted combination `sum_i w_i * xs[i]`, accumulated in index order.
pub fn weighted_sum(weights: &[f64], xs: &[Vec<f64>], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (w, x) in weights.iter().zip(xs) {
        if *w != 0.0 {
            axpy(*w, x, &mut out);
        }
    }
    out
}

pub fn all_finite(a: &[f64]) -> bool {
    a.iter().all(|x| x.is_finite())
}
