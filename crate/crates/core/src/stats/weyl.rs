//! Local Weyl statistics at vertices and interior points.

use std::sync::Arc;

use crate::conditions::{VertexCondition, VertexConditionSet};
use crate::eigenfunction::{spectrum_eigenfunctions, Eigenfunction};
use crate::error::{Error, Result};
use crate::graph::GraphPoint;
use crate::secular::{SecularSystem, Spectrum};

use super::cesaro::{cesaro_means, fit_limit, LimitFit};
use super::certified_first;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeylTarget {
    Vertex(usize),
    Point(GraphPoint),
}

#[derive(Debug, Clone)]
pub struct WeylReport {
    pub target: WeylTarget,
    /// Per-index statistic; members of a cluster share the cluster sum evenly.
    pub statistic: Vec<f64>,
    pub means: Vec<f64>,
    pub predicted: f64,
    pub fit: LimitFit,
}

impl WeylReport {
    pub fn mean_at(&self, n: usize) -> f64 {
        self.means[n - 1]
    }
}

/// Spreads cluster sums of `stat` evenly over the cluster members, for the
/// first `n_max` indices.
fn split_clusters(
    clusters: &[Vec<Eigenfunction>],
    n_max: usize,
    stat: impl Fn(&Eigenfunction) -> Result<f64>,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(n_max);
    for cluster in clusters {
        let mut sum = 0.0;
        for f in cluster {
            sum += stat(f)?;
        }
        let share = sum / cluster.len() as f64;
        out.extend(std::iter::repeat_n(share, cluster.len()));
    }
    if out.len() < n_max {
        return Err(Error::Precondition(format!(
            "only {} eigenfunctions for N = {n_max}",
            out.len()
        )));
    }
    out.truncate(n_max);
    Ok(out)
}

/// Cesàro means of `|Σ_e f_e(v)|²` at a δ′ vertex with `β_v ≠ 0` (predicted
/// `2 deg(v)/L`) or of `|f(x)|²` at an interior point (predicted `1/L`).
pub fn local_weyl(
    system: &SecularSystem,
    spectrum: &Spectrum,
    target: WeylTarget,
    n_max: usize,
) -> Result<WeylReport> {
    spectrum.require_prefix(n_max)?;
    let g = system.graph();
    let l = g.total_length();
    let predicted = match target {
        WeylTarget::Vertex(v) => match system.conditions().get(v)? {
            VertexCondition::DeltaPrime { beta } if beta != 0.0 => 2.0 * g.degree(v)? as f64 / l,
            other => {
                return Err(Error::Precondition(format!(
                    "vertex {v} carries {other:?}, not δ′ with β ≠ 0"
                )))
            }
        },
        WeylTarget::Point(p) => {
            let e = g.edge(p.edge)?;
            if !(p.x > 0.0 && p.x < e.length) {
                return Err(Error::Precondition(format!(
                    "point x = {} is not interior to edge {}",
                    p.x, p.edge
                )));
            }
            1.0 / l
        }
    };
    let clusters = spectrum_eigenfunctions(system, spectrum, n_max)?;
    let statistic = split_clusters(&clusters, n_max, |f| match target {
        WeylTarget::Vertex(v) => f.vertex_sum_sq(v),
        WeylTarget::Point(p) => f.evaluate(p).map(|x| x * x),
    })?;
    let means = cesaro_means(&statistic);
    let fit = fit_limit(&means);
    Ok(WeylReport {
        target,
        statistic,
        means,
        predicted,
        fit,
    })
}

#[derive(Debug, Clone)]
pub struct DummyWeylReport {
    pub direct: WeylReport,
    pub dummy: WeylReport,
    /// `max_n |λ_n - λ_n'| / (1 + |λ_n|)` between the graph and its split.
    pub spectrum_deviation: f64,
    /// `max_N |C_direct(N) - C_dummy(N)|`.
    pub path_deviation: f64,
}

/// The interior statistic both by direct evaluation and through a degree-2
/// Kirchhoff vertex inserted at the point.
pub fn local_weyl_dummy(
    system: &SecularSystem,
    point: GraphPoint,
    n_max: usize,
) -> Result<DummyWeylReport> {
    let g = system.graph();
    let split = Arc::new(g.split_edge(point)?);
    let q = system.potential().split_edge(&split, point.edge, point.x)?;
    let mut conds = system.conditions().as_slice().to_vec();
    conds.push(VertexCondition::kirchhoff());
    let dummy_system = SecularSystem::new(split.clone(), VertexConditionSet::new(conds)?, q)?;
    let (a, b) = rayon::join(
        || certified_first(system, n_max),
        || certified_first(&dummy_system, n_max),
    );
    let (a, b) = (a?, b?);
    let spectrum_deviation = a.values()[..n_max]
        .iter()
        .zip(&b.values()[..n_max])
        .map(|(x, y)| (x - y).abs() / (1.0 + x.abs()))
        .fold(0.0, f64::max);
    let direct = local_weyl(system, &a, WeylTarget::Point(point), n_max)?;
    let dummy_vertex = g.num_vertices();
    let clusters = spectrum_eigenfunctions(&dummy_system, &b, n_max)?;
    let statistic = split_clusters(&clusters, n_max, |f| {
        let (values, _) = f.vertex_trace(dummy_vertex)?;
        Ok(values[0] * values[0])
    })?;
    let means = cesaro_means(&statistic);
    let dummy = WeylReport {
        target: WeylTarget::Vertex(dummy_vertex),
        fit: fit_limit(&means),
        statistic,
        means,
        predicted: direct.predicted,
    };
    let path_deviation = direct
        .means
        .iter()
        .zip(&dummy.means)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    Ok(DummyWeylReport {
        direct,
        dummy,
        spectrum_deviation,
        path_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuiltinGraph;
    use crate::potential::Potential;

    fn star_system(beta: f64) -> SecularSystem {
        let g = Arc::new(BuiltinGraph::star(3, 1.0).unwrap());
        let c = VertexConditionSet::uniform(4, VertexCondition::DeltaPrime { beta }).unwrap();
        SecularSystem::new(g.clone(), c, Potential::zero(&g)).unwrap()
    }

    #[test]
    fn predicted_values() {
        let s = star_system(1.0);
        let spec = certified_first(&s, 20).unwrap();
        let r = local_weyl(&s, &spec, WeylTarget::Vertex(0), 20).unwrap();
        assert!((r.predicted - 2.0).abs() < 1e-15);
        let r = local_weyl(&s, &spec, WeylTarget::Point(GraphPoint::new(1, 0.3)), 20).unwrap();
        assert!((r.predicted - 1.0 / 3.0).abs() < 1e-15);
        assert!(local_weyl(&s, &spec, WeylTarget::Point(GraphPoint::new(1, 0.0)), 20).is_err());
    }

    #[test]
    fn anti_kirchhoff_target_is_rejected() {
        let s = star_system(0.0);
        let spec = certified_first(&s, 5).unwrap();
        assert!(local_weyl(&s, &spec, WeylTarget::Vertex(0), 5).is_err());
    }

    #[test]
    fn dummy_path_agrees() {
        let s = star_system(1.0);
        let r = local_weyl_dummy(&s, GraphPoint::new(2, 0.4), 60).unwrap();
        assert!(r.spectrum_deviation < 1e-9, "{}", r.spectrum_deviation);
        assert!(r.path_deviation < 1e-8, "{}", r.path_deviation);
    }
}
