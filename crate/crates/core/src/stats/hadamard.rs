//! The coupling-path integral for eigenvalue differences.
//!
//! Along `β(τ) = β' + τ(β - β')` the eigenvalue moves with
//! `dλ/dτ = Σ_v (β'_v - β_v)/β_v(τ)² |Σ_e f_e(v)|²`. When the potential is
//! switched on along the same path (`τq`), the term `∫ q |f|²` joins the
//! integrand.

use std::sync::Arc;

use rayon::prelude::*;

use crate::conditions::VertexConditionSet;
use crate::eigenfunction::cluster_eigenfunctions;
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::potential::Potential;
use crate::quadrature::GaussLegendre;
use crate::secular::SecularSystem;

use super::certified_first;

#[derive(Debug, Clone, PartialEq)]
pub struct HadamardReport {
    pub n: usize,
    pub nodes: usize,
    pub potential_path: bool,
    /// `λ_n` difference from the two end spectra.
    pub direct: f64,
    pub quadrature: f64,
    /// `|direct - quadrature| / |direct|`, absolute when `direct = 0`.
    pub residual: f64,
}

/// The `n`-th eigenvalue, checked to be simple.
fn simple_eigenvalue(system: &SecularSystem, n: usize, tau: f64) -> Result<f64> {
    let spec = certified_first(system, n + 1)?;
    let v = spec.values();
    let x = v[n - 1];
    let sep = 1e-8 * (1.0 + x.abs());
    let touches = |y: f64| (y - x).abs() <= sep;
    if (n >= 2 && touches(v[n - 2])) || touches(v[n]) {
        return Err(Error::EigenvalueCrossing { tau });
    }
    Ok(x)
}

/// Compares `d_n(β, β')` (or `d_n^q(β, β')` when `potential_path`) with the
/// Gauss–Legendre quadrature of the path integral.
pub fn hadamard_identity_check(
    g: &Arc<MetricGraph>,
    beta: &[f64],
    beta_prime: &[f64],
    q: &Potential,
    potential_path: bool,
    n: usize,
    nodes: usize,
) -> Result<HadamardReport> {
    if !(1..=5).contains(&n) {
        return Err(Error::Precondition(format!("index {n} outside 1..=5")));
    }
    if beta.iter().chain(beta_prime).any(|&b| !(b > 0.0)) {
        return Err(Error::Precondition("coupling strengths must be positive".into()));
    }
    let zero = Potential::zero(g);
    let system_at = |tau: f64| -> Result<SecularSystem> {
        let b: Vec<f64> = beta
            .iter()
            .zip(beta_prime)
            .map(|(b, bp)| bp + tau * (b - bp))
            .collect();
        let pot = if potential_path { q.scale(tau) } else { q.clone() };
        SecularSystem::new(g.clone(), VertexConditionSet::delta_prime(&b)?, pot)
    };
    let start = if potential_path {
        SecularSystem::new(g.clone(), VertexConditionSet::delta_prime(beta_prime)?, zero)?
    } else {
        system_at(0.0)?
    };
    let end = system_at(1.0)?;
    let direct = simple_eigenvalue(&end, n, 1.0)? - simple_eigenvalue(&start, n, 0.0)?;
    let rule = GaussLegendre::new(nodes);
    let points: Vec<(f64, f64)> = rule.nodes_on(0.0, 1.0).collect();
    let terms: Vec<f64> = points
        .par_iter()
        .map(|&(tau, w)| -> Result<f64> {
            let system = system_at(tau)?;
            let lambda = simple_eigenvalue(&system, n, tau)?;
            let f = &cluster_eigenfunctions(&system, lambda, 1)?[0];
            let mut integrand = 0.0;
            for v in 0..g.num_vertices() {
                let bt = beta_prime[v] + tau * (beta[v] - beta_prime[v]);
                integrand += (beta_prime[v] - beta[v]) / (bt * bt) * f.vertex_sum_sq(v)?;
            }
            if potential_path {
                // the eigenfunction sees τq, so its expectation carries a factor τ
                integrand += f.potential_expectation() / tau;
            }
            Ok(w * integrand)
        })
        .collect::<Result<_>>()?;
    let quadrature: f64 = terms.iter().sum();
    let residual = if direct == 0.0 {
        (direct - quadrature).abs()
    } else {
        (direct - quadrature).abs() / direct.abs()
    };
    Ok(HadamardReport {
        n,
        nodes,
        potential_path,
        direct,
        quadrature,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuiltinGraph;

    #[test]
    fn equal_couplings_give_zero() {
        let g = Arc::new(BuiltinGraph::interval(1.0).unwrap());
        let q = Potential::zero(&g);
        let r = hadamard_identity_check(&g, &[1.0; 2], &[1.0; 2], &q, false, 1, 8).unwrap();
        assert_eq!(r.direct, 0.0);
        assert!(r.quadrature.abs() < 1e-15);
    }

    #[test]
    fn interval_identity() {
        let g = Arc::new(BuiltinGraph::interval(1.0).unwrap());
        let q = Potential::zero(&g);
        let r = hadamard_identity_check(&g, &[1.0; 2], &[2.0; 2], &q, false, 2, 16).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn potential_path_identity() {
        let g = Arc::new(BuiltinGraph::interval(1.0).unwrap());
        let q = Potential::uniform(
            &g,
            crate::potential::EdgePotential::PiecewiseConstant { breaks: vec![0.4], values: vec![1.5, -0.5] },
        )
        .unwrap();
        let r = hadamard_identity_check(&g, &[1.0; 2], &[2.0; 2], &q, true, 1, 24).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
    }

    #[test]
    fn degenerate_index_is_reported() {
        // equilateral star: Robin tips make the second level doubly degenerate
        let g = Arc::new(BuiltinGraph::star(3, 1.0).unwrap());
        let q = Potential::zero(&g);
        let r = hadamard_identity_check(&g, &[1.0; 4], &[2.0; 4], &q, false, 2, 4);
        assert!(matches!(r, Err(Error::EigenvalueCrossing { .. })), "{r:?}");
    }
}
