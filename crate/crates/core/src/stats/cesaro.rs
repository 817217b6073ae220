//! Running Cesàro means and their limit extrapolation.

/// `C(N) = (1/N) Σ_{n≤N} x_n` for every `N`, with a compensated running sum.
pub fn cesaro_means(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0_f64;
    let mut carry = 0.0_f64;
    values
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            // Neumaier summation
            let t = sum + x;
            if sum.abs() >= x.abs() {
                carry += (sum - t) + x;
            } else {
                carry += (x - t) + sum;
            }
            sum = t;
            (sum + carry) / (i + 1) as f64
        })
        .collect()
}

/// `C(N)` computed from scratch.
pub fn cesaro_at(values: &[f64], n: usize) -> f64 {
    let mut v: Vec<f64> = values[..n].to_vec();
    v.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    v.iter().sum::<f64>() / n as f64
}

/// Least-squares fit `C(N) ≈ c0 + c1/N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitFit {
    pub c0: f64,
    pub c1: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub from_n: usize,
    pub to_n: usize,
}

/// Fits over the upper half `N ∈ [⌈N_max/2⌉, N_max]` of the means.
pub fn fit_limit(means: &[f64]) -> LimitFit {
    let n_max = means.len();
    let from_n = n_max.div_ceil(2).max(1);
    let pts: Vec<(f64, f64)> = (from_n..=n_max)
        .map(|n| (1.0 / n as f64, means[n - 1]))
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let (mx, my) = (sx / m, sy / m);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - c0 - c1 * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    LimitFit {
        c0,
        c1,
        residual,
        from_n,
        to_n: n_max,
    }
}
