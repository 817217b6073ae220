//! Mean eigenvalue distances between two realizations.

use std::sync::Arc;

use crate::conditions::{VertexCondition, VertexConditionSet};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::potential::Potential;
use crate::secular::Spectrum;

use super::cesaro::{cesaro_means, fit_limit, LimitFit};
use super::{certified_first, operator};

/// `(2/L) Σ_v deg(v) (1/β_v - 1/β'_v)`, plus `(1/L) ∫ q` when `q` is given.
pub fn theorem1_rhs(
    g: &MetricGraph,
    beta: &[f64],
    beta_prime: &[f64],
    q: Option<&Potential>,
) -> Result<f64> {
    if beta.len() != g.num_vertices() || beta_prime.len() != g.num_vertices() {
        return Err(Error::DimensionMismatch(format!(
            "{} vertices but {} and {} strengths",
            g.num_vertices(),
            beta.len(),
            beta_prime.len()
        )));
    }
    let l = g.total_length();
    let mut sum = 0.0;
    for v in 0..g.num_vertices() {
        let (b, bp) = (beta[v], beta_prime[v]);
        if b == 0.0 || bp == 0.0 {
            return Err(Error::Precondition(format!("zero coupling at vertex {v}")));
        }
        sum += g.degree(v)? as f64 * (1.0 / b - 1.0 / bp);
    }
    let mut rhs = 2.0 / l * sum;
    if let Some(q) = q {
        q.check_graph(g)?;
        rhs += q.integral() / l;
    }
    Ok(rhs)
}

#[derive(Debug, Clone)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    /// `d_n = λ_n^A - λ_n^B` for `n = 1..=N_max`.
    pub differences: Vec<f64>,
    /// `C(N)` for `N = 1..=N_max`.
    pub means: Vec<f64>,
    pub predicted: Option<f64>,
    pub fit: LimitFit,
    /// The two spectra the differences were taken from.
    pub spectra: (Spectrum, Spectrum),
}

impl ComparisonReport {
    pub fn mean_at(&self, n: usize) -> f64 {
        self.means[n - 1]
    }

    pub fn n_max(&self) -> usize {
        self.means.len()
    }
}

/// Index-aligned Cesàro means of `λ_n^A - λ_n^B`.
pub fn mean_difference(
    a: &Spectrum,
    b: &Spectrum,
    n_max: usize,
    predicted: Option<f64>,
) -> Result<ComparisonReport> {
    a.require_prefix(n_max)?;
    b.require_prefix(n_max)?;
    let (va, vb) = (a.values(), b.values());
    let differences: Vec<f64> = va[..n_max]
        .iter()
        .zip(&vb[..n_max])
        .map(|(x, y)| x - y)
        .collect();
    let means = cesaro_means(&differences);
    let fit = fit_limit(&means);
    Ok(ComparisonReport {
        label_a: "A".into(),
        label_b: "B".into(),
        differences,
        means,
        predicted,
        fit,
        spectra: (a.clone(), b.clone()),
    })
}

fn labelled(mut r: ComparisonReport, a: String, b: String) -> ComparisonReport {
    r.label_a = a;
    r.label_b = b;
    r
}

/// Two δ′ realizations: `d_n(β, β')` when `q` is `None`, otherwise
/// `d_n^q(β, β') = λ_n^q(β) - λ_n^{q=0}(β')`.
pub fn mean_distance_experiment(
    g: &Arc<MetricGraph>,
    beta: &[f64],
    beta_prime: &[f64],
    q: Option<&Potential>,
    n_max: usize,
) -> Result<ComparisonReport> {
    let predicted = theorem1_rhs(g, beta, beta_prime, q)?;
    let zero = Potential::zero(g);
    let qa = q.cloned().unwrap_or_else(|| zero.clone());
    let sa = operator(g, VertexConditionSet::delta_prime(beta)?, qa)?;
    let sb = operator(g, VertexConditionSet::delta_prime(beta_prime)?, zero)?;
    let (a, b) = rayon::join(|| certified_first(&sa, n_max), || certified_first(&sb, n_max));
    let r = mean_difference(&a?, &b?, n_max, Some(predicted))?;
    Ok(labelled(
        r,
        format!("delta_prime {beta:?}{}", if q.is_some() { " with q" } else { "" }),
        format!("delta_prime {beta_prime:?}"),
    ))
}

#[derive(Debug, Clone)]
pub struct DivergenceReport {
    pub comparison: ComparisonReport,
    pub grid: Vec<usize>,
    pub grid_means: Vec<f64>,
    /// `(γ, bound)` with the bound `±(4|E|/L)(1/γ - 1/β') (+ ∫q/L)`.
    pub bounds: Vec<(f64, f64)>,
    /// Anti-Kirchhoff on the right: means should decrease below `-bound`.
    pub mirrored: bool,
    pub monotone: bool,
    pub beyond_bounds: bool,
}

impl DivergenceReport {
    pub fn verdict(&self) -> bool {
        self.monotone && self.beyond_bounds
    }
}

/// Anti-Kirchhoff against δ′(β') with constant `β' > 0`.
///
/// Unmirrored: `d_n(0, β')` (or `d_n^q(0, β')` when `q` is given) must
/// increase along `grid` and exceed `(4|E|/L)(1/γ - 1/β') (+ ∫q/L)` for every
/// `γ`. Mirrored: `d_n(β', 0)` must decrease and stay below
/// `(4|E|/L)(1/β' - 1/γ) (+ ∫q/L)`.
pub fn divergence_experiment(
    g: &Arc<MetricGraph>,
    beta_prime: f64,
    q: Option<&Potential>,
    grid: &[usize],
    gammas: &[f64],
    mirrored: bool,
) -> Result<DivergenceReport> {
    if !(beta_prime > 0.0) {
        return Err(Error::Precondition("both sides anti-Kirchhoff".into()));
    }
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("empty N grid".into()))?;
    let nv = g.num_vertices();
    let zero = Potential::zero(g);
    let qa = q.cloned().unwrap_or_else(|| zero.clone());
    let anti = VertexConditionSet::uniform(nv, VertexCondition::anti_kirchhoff())?;
    let dp = VertexConditionSet::uniform(nv, VertexCondition::DeltaPrime { beta: beta_prime })?;
    // the potential sits on the first operator of the pair
    let (first, second) = if mirrored {
        (operator(g, dp, qa)?, operator(g, anti, zero)?)
    } else {
        (operator(g, anti, qa)?, operator(g, dp, zero)?)
    };
    let (a, b) = rayon::join(|| certified_first(&first, n_max), || certified_first(&second, n_max));
    let comparison = mean_difference(&a?, &b?, n_max, None)?;
    let comparison = if mirrored {
        labelled(comparison, format!("delta_prime {beta_prime}"), "anti_kirchhoff".into())
    } else {
        labelled(comparison, "anti_kirchhoff".into(), format!("delta_prime {beta_prime}"))
    };
    let scale = 4.0 * g.num_edges() as f64 / g.total_length();
    let shift = q.map_or(0.0, |q| q.integral() / g.total_length());
    let bounds: Vec<(f64, f64)> = gammas
        .iter()
        .map(|&gamma| {
            let b = if mirrored {
                scale * (1.0 / beta_prime - 1.0 / gamma)
            } else {
                scale * (1.0 / gamma - 1.0 / beta_prime)
            };
            (gamma, b + shift)
        })
        .collect();
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let grid_means: Vec<f64> = sorted.iter().map(|&n| comparison.mean_at(n)).collect();
    let monotone = grid_means.windows(2).all(|w| {
        if mirrored {
            w[1] < w[0]
        } else {
            w[1] > w[0]
        }
    });
    let beyond_bounds = grid_means.iter().all(|&m| {
        bounds
            .iter()
            .all(|&(_, b)| if mirrored { m < b } else { m > b })
    });
    Ok(DivergenceReport {
        comparison,
        grid: sorted,
        grid_means,
        bounds,
        mirrored,
        monotone,
        beyond_bounds,
    })
}

#[derive(Debug, Clone)]
pub struct CorollaryReport {
    pub comparison: ComparisonReport,
    pub grid: Vec<usize>,
    pub grid_means: Vec<f64>,
    /// `(1/N) Σ (λ_n^{q=0}(0) - λ_n^{q=0}(β')) - 2‖q‖_∞` at the grid.
    pub lower_bounds: Vec<f64>,
    /// The lower-bound sequence at every `N = 1..=N_max`.
    pub bound_path: Vec<f64>,
    pub increasing: bool,
    pub above_bounds: bool,
}

impl CorollaryReport {
    pub fn verdict(&self) -> bool {
        self.increasing && self.above_bounds
    }
}

/// δ(σ) against δ′(β) on a bipartite graph with one independent cycle:
/// Cesàro means of `μ_n^q(σ) - λ_n^q(β)`.
pub fn corollary_bipartite(
    g: &Arc<MetricGraph>,
    sigma: &[f64],
    beta: &[f64],
    q: &Potential,
    grid: &[usize],
) -> Result<CorollaryReport> {
    if !g.is_bipartite() || g.betti_number() != 1 {
        return Err(Error::Precondition(
            "graph must be bipartite with exactly one independent cycle".into(),
        ));
    }
    if sigma.iter().any(|&s| s < 0.0) || beta.iter().any(|&b| b <= 0.0) {
        return Err(Error::Precondition("need σ ≥ 0 and β > 0".into()));
    }
    let n_max = *grid
        .iter()
        .max()
        .ok_or_else(|| Error::Precondition("empty N grid".into()))?;
    let nv = g.num_vertices();
    let zero = Potential::zero(g);
    let beta_min = beta.iter().copied().fold(f64::INFINITY, f64::min);
    let systems = [
        operator(g, VertexConditionSet::delta(sigma)?, q.clone())?,
        operator(g, VertexConditionSet::delta_prime(beta)?, q.clone())?,
        operator(
            g,
            VertexConditionSet::uniform(nv, VertexCondition::anti_kirchhoff())?,
            zero.clone(),
        )?,
        operator(
            g,
            VertexConditionSet::uniform(nv, VertexCondition::DeltaPrime { beta: beta_min })?,
            zero,
        )?,
    ];
    let spectra: Vec<Spectrum> = {
        use rayon::prelude::*;
        systems
            .par_iter()
            .map(|s| certified_first(s, n_max))
            .collect::<Result<_>>()?
    };
    let comparison = labelled(
        mean_difference(&spectra[0], &spectra[1], n_max, None)?,
        format!("delta {sigma:?}"),
        format!("delta_prime {beta:?}"),
    );
    let reference = mean_difference(&spectra[2], &spectra[3], n_max, None)?;
    let mut sorted = grid.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let grid_means: Vec<f64> = sorted.iter().map(|&n| comparison.mean_at(n)).collect();
    let bound_path: Vec<f64> = reference
        .means
        .iter()
        .map(|m| m - 2.0 * q.sup_norm())
        .collect();
    let lower_bounds: Vec<f64> = sorted.iter().map(|&n| bound_path[n - 1]).collect();
    let increasing = grid_means.windows(2).all(|w| w[1] > w[0]);
    let above_bounds = grid_means.iter().zip(&lower_bounds).all(|(m, b)| m > b);
    Ok(CorollaryReport {
        comparison,
        grid: sorted,
        grid_means,
        lower_bounds,
        bound_path,
        increasing,
        above_bounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuiltinGraph;

    #[test]
    fn star_rhs() {
        let g = BuiltinGraph::star(3, 1.0).unwrap();
        assert!((theorem1_rhs(&g, &[1.0; 4], &[2.0; 4], None).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(theorem1_rhs(&g, &[1.5; 4], &[1.5; 4], None).unwrap(), 0.0);
        assert!(theorem1_rhs(&g, &[0.0; 4], &[1.0; 4], None).is_err());
    }

    #[test]
    fn handshake_form() {
        let g = BuiltinGraph::figure1([1.0, 2.0, 0.5, 1.0, 1.5, 0.7, 1.1]).unwrap();
        let (b, bp) = (0.7, 1.9);
        let rhs = theorem1_rhs(&g, &[b; 7], &[bp; 7], None).unwrap();
        let alt = 4.0 * 7.0 / g.total_length() * (1.0 / b - 1.0 / bp);
        assert!((rhs - alt).abs() < 1e-13);
    }

    #[test]
    fn potential_adds_mean() {
        let g = BuiltinGraph::star(3, 1.0).unwrap();
        let q = Potential::constant(&g, 0.7).unwrap();
        let rhs = theorem1_rhs(&g, &[1.0; 4], &[2.0; 4], Some(&q)).unwrap();
        assert!((rhs - 2.7).abs() < 1e-14);
    }

    #[test]
    fn identical_operators_have_zero_means() {
        let g = Arc::new(BuiltinGraph::interval(1.0).unwrap());
        let r = mean_distance_experiment(&g, &[1.0; 2], &[1.0; 2], None, 30).unwrap();
        assert!(r.means.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn odd_cycle_fails_gate() {
        let g = Arc::new(BuiltinGraph::cycle(&[1.0; 3]).unwrap());
        let q = Potential::zero(&g);
        assert!(corollary_bipartite(&g, &[0.0; 3], &[1.0; 3], &q, &[10]).is_err());
    }
}
