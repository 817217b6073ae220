//! Isospectral pairs and interlacing between realizations.

use std::sync::Arc;

use crate::conditions::{VertexCondition, VertexConditionSet};
use crate::error::{Error, Result};
use crate::graph::{BuiltinGraph, MetricGraph};
use crate::potential::Potential;
use crate::secular::Spectrum;

use super::{certified_first, operator};

#[derive(Debug, Clone)]
pub enum IsospectralPair {
    /// δ′(β) against δ(1/β) at both ends of an interval.
    IntervalDeltaPrimeDelta { length: f64, beta: f64 },
    /// Anti-Kirchhoff against Kirchhoff on a bipartite graph with one
    /// independent cycle.
    BipartiteKirchhoff(Arc<MetricGraph>),
}

#[derive(Debug, Clone)]
pub struct IsospectralReport {
    pub n: usize,
    /// `max_{n≤N} |λ_n^A - λ_n^B| / (1 + |λ_n^A|)`.
    pub max_deviation: f64,
    pub values_a: Vec<f64>,
    pub values_b: Vec<f64>,
    pub spectra: (Spectrum, Spectrum),
}

pub fn isospectrality_check(pair: &IsospectralPair, n: usize) -> Result<IsospectralReport> {
    let (sa, sb) = match pair {
        IsospectralPair::IntervalDeltaPrimeDelta { length, beta } => {
            if !(*beta > 0.0) {
                return Err(Error::Precondition(format!("β = {beta} must be positive")));
            }
            let g = Arc::new(BuiltinGraph::interval(*length)?);
            let q = Potential::zero(&g);
            (
                operator(&g, VertexConditionSet::delta_prime(&[*beta; 2])?, q.clone())?,
                operator(&g, VertexConditionSet::delta(&[1.0 / beta; 2])?, q)?,
            )
        }
        IsospectralPair::BipartiteKirchhoff(g) => {
            if !g.is_bipartite() || g.betti_number() != 1 {
                return Err(Error::Precondition(
                    "graph must be bipartite with exactly one independent cycle".into(),
                ));
            }
            let nv = g.num_vertices();
            let q = Potential::zero(g);
            (
                operator(
                    g,
                    VertexConditionSet::uniform(nv, VertexCondition::anti_kirchhoff())?,
                    q.clone(),
                )?,
                operator(g, VertexConditionSet::uniform(nv, VertexCondition::kirchhoff())?, q)?,
            )
        }
    };
    let (a, b) = rayon::join(|| certified_first(&sa, n), || certified_first(&sb, n));
    let (a, b) = (a?, b?);
    let values_a = a.values()[..n].to_vec();
    let values_b = b.values()[..n].to_vec();
    let max_deviation = values_a
        .iter()
        .zip(&values_b)
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max);
    Ok(IsospectralReport {
        n,
        max_deviation,
        values_a,
        values_b,
        spectra: (a, b),
    })
}

/// `max_{n≤N} (λ_n^{small} - λ_n^{large})`; non-positive when the first
/// spectrum lies index-wise below the second.
pub fn interlacing_violation(small: &Spectrum, large: &Spectrum, n: usize) -> Result<f64> {
    small.require_prefix(n)?;
    large.require_prefix(n)?;
    Ok(small.values()[..n]
        .iter()
        .zip(&large.values()[..n])
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_cycle_is_rejected() {
        let g = Arc::new(BuiltinGraph::cycle(&[1.0; 3]).unwrap());
        assert!(isospectrality_check(&IsospectralPair::BipartiteKirchhoff(g), 5).is_err());
    }

    #[test]
    fn even_cycle_pair() {
        let g = Arc::new(BuiltinGraph::cycle(&[1.0; 4]).unwrap());
        let r = isospectrality_check(&IsospectralPair::BipartiteKirchhoff(g), 12).unwrap();
        assert!(r.max_deviation < 1e-8, "{}", r.max_deviation);
    }

    #[test]
    fn interval_pair() {
        let pair = IsospectralPair::IntervalDeltaPrimeDelta { length: 1.0, beta: 0.5 };
        assert!(isospectrality_check(&pair, 10).unwrap().max_deviation < 1e-12);
    }
}
