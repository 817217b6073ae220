//! Truncated spectral sums for the heat kernel.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::conditions::{projection, ProjectionKind, VertexCondition};
use crate::eigenfunction::{spectrum_eigenfunctions, Eigenfunction};
use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, GraphPoint, MetricGraph};
use crate::potential::Potential;
use crate::secular::{SecularSystem, Spectrum};

use super::certified_below;

/// Smallest admissible `Λ t`.
pub const MIN_TRUNCATION_PRODUCT: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct HeatReport {
    pub t: f64,
    pub truncation: f64,
    /// Number of eigenvalues in the sum.
    pub terms: usize,
    pub value: f64,
    /// `√(4πt) · value`.
    pub scaled: f64,
    /// Small-time limit of `scaled`.
    pub predicted: f64,
    /// Weyl-density estimate of the neglected tail.
    pub tail_bound: f64,
}

/// `Σ_{λ_n ≤ Λ} e^{-λ_n t} f_n(x) f_n(y)`.
pub fn heat_kernel(
    clusters: &[Vec<Eigenfunction>],
    x: GraphPoint,
    y: GraphPoint,
    t: f64,
    truncation: f64,
) -> Result<f64> {
    let mut sum = 0.0;
    for f in clusters.iter().flatten() {
        if f.lambda() > truncation {
            break;
        }
        sum += (-f.lambda() * t).exp() * f.evaluate(x)? * f.evaluate(y)?;
    }
    Ok(sum)
}

/// High-energy vertex scattering matrix `S_v(∞)`.
fn scattering_at_infinity(condition: VertexCondition, degree: usize) -> DMatrix<f64> {
    let id = DMatrix::identity(degree, degree);
    let p = match condition {
        VertexCondition::DeltaPrime { beta } if beta != 0.0 => {
            projection(ProjectionKind::DeltaPrime, degree)
        }
        // β = 0 reverses the roles of the two projections
        VertexCondition::DeltaPrime { .. } => projection(ProjectionKind::Dirichlet, degree),
        VertexCondition::Delta { .. } => projection(ProjectionKind::Delta, degree),
        VertexCondition::Dirichlet => id.clone(),
    };
    id - 2.0 * p
}

fn check_inputs(spectrum: &Spectrum, t: f64, truncation: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(Error::Precondition(format!("time t = {t} must be positive")));
    }
    if truncation * t < MIN_TRUNCATION_PRODUCT {
        return Err(Error::TruncationTooSmall(truncation * t));
    }
    spectrum.require_certified()?;
    if spectrum.first_index() != 1 || spectrum.certificate().top < truncation {
        return Err(Error::Precondition(format!(
            "spectrum is not complete below {truncation}"
        )));
    }
    Ok(())
}

fn eigenfunctions_below(
    system: &SecularSystem,
    spectrum: &Spectrum,
    truncation: f64,
) -> Result<Vec<Vec<Eigenfunction>>> {
    let n = spectrum.values().iter().filter(|&&x| x <= truncation).count();
    spectrum_eigenfunctions(system, spectrum, n)
}

fn tail(g: &MetricGraph, bound: f64, t: f64, truncation: f64) -> f64 {
    g.total_length() / (2.0 * std::f64::consts::PI) * (-truncation * t).exp()
        / (t * truncation.sqrt())
        * bound
}

/// `p(t; x, x)` truncated at `Λ`. At a vertex the point is read on its edge.
pub fn heat_kernel_diag(
    system: &SecularSystem,
    spectrum: &Spectrum,
    p: GraphPoint,
    t: f64,
    truncation: f64,
) -> Result<HeatReport> {
    check_inputs(spectrum, t, truncation)?;
    let g = system.graph();
    let e = g.edge(p.edge)?;
    g.check_point(p)?;
    let predicted = if p.x > 0.0 && p.x < e.length {
        1.0
    } else {
        let (v, end) = if p.x == 0.0 {
            (e.from, EdgeEnd::Start)
        } else {
            (e.to, EdgeEnd::End)
        };
        let incs = g.incidences(v)?;
        let i = incs
            .iter()
            .position(|inc| inc.edge == p.edge && inc.end == end)
            .expect("endpoint is incident");
        let s = scattering_at_infinity(system.conditions().get(v)?, incs.len());
        1.0 + s[(i, i)]
    };
    let fs = eigenfunctions_below(system, spectrum, truncation)?;
    let value = heat_kernel(&fs, p, p, t, truncation)?;
    let c = fs.iter().flatten().map(Eigenfunction::sup_norm).fold(0.0, f64::max);
    Ok(HeatReport {
        t,
        truncation,
        terms: fs.iter().map(Vec::len).sum(),
        value,
        scaled: (4.0 * std::f64::consts::PI * t).sqrt() * value,
        predicted,
        tail_bound: tail(g, c * c, t, truncation),
    })
}

/// `Σ_{e,e'} p_{e,e'}(t; v, v) = Σ_n e^{-λ_n t} |Σ_e f_e(v)|²`, with limit
/// the entry sum of `Id + S_v(∞)`.
pub fn heat_kernel_vertex(
    system: &SecularSystem,
    spectrum: &Spectrum,
    v: usize,
    t: f64,
    truncation: f64,
) -> Result<HeatReport> {
    check_inputs(spectrum, t, truncation)?;
    let g = system.graph();
    let d = g.degree(v)?;
    let s = scattering_at_infinity(system.conditions().get(v)?, d);
    let predicted = (DMatrix::identity(d, d) + s).sum();
    let fs = eigenfunctions_below(system, spectrum, truncation)?;
    let mut value = 0.0;
    for f in fs.iter().flatten() {
        value += (-f.lambda() * t).exp() * f.vertex_sum_sq(v)?;
    }
    let c = fs.iter().flatten().map(Eigenfunction::sup_norm).fold(0.0, f64::max);
    let dc = d as f64 * c;
    Ok(HeatReport {
        t,
        truncation,
        terms: fs.iter().map(Vec::len).sum(),
        value,
        scaled: (4.0 * std::f64::consts::PI * t).sqrt() * value,
        predicted,
        tail_bound: tail(g, dc * dc, t, truncation),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketingSample {
    pub t: f64,
    pub x: GraphPoint,
    pub y: GraphPoint,
    pub upper_potential: f64,
    pub actual: f64,
    pub lower_potential: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketingReport {
    pub samples: Vec<BracketingSample>,
    pub slack: f64,
    /// Largest violation of either inequality (negative when all hold).
    pub worst: f64,
}

impl BracketingReport {
    pub fn holds(&self) -> bool {
        self.worst <= 0.0
    }
}

/// Checks `p^{q₊} ≤ p^q ≤ p^{q₋}` up to `slack` at every `(t, x, y)`, with
/// `q∓ = ∓‖q‖_∞`. Only δ-type (and Dirichlet) vertices are accepted.
pub fn bracketing_check(
    system: &SecularSystem,
    samples: &[(f64, GraphPoint, GraphPoint)],
    slack: f64,
) -> Result<BracketingReport> {
    let g = system.graph();
    for (v, c) in system.conditions().as_slice().iter().enumerate() {
        if matches!(c, VertexCondition::DeltaPrime { .. }) {
            return Err(Error::Precondition(format!(
                "vertex {v} is not of δ type"
            )));
        }
    }
    let t_min = samples
        .iter()
        .map(|s| s.0)
        .fold(f64::INFINITY, f64::min);
    if !(t_min > 0.0) {
        return Err(Error::Precondition("need positive sample times".into()));
    }
    let q: &Potential = system.potential();
    let (q_minus, q_plus) = q.bracket();
    let truncation = MIN_TRUNCATION_PRODUCT / t_min * 1.05 + q.sup_norm();
    let systems = [
        system.with_potential(q_plus)?,
        system.clone(),
        system.with_potential(q_minus)?,
    ];
    let kernels: Vec<Vec<Vec<Eigenfunction>>> = systems
        .par_iter()
        .map(|s| {
            let spec = certified_below(s, truncation * 1.01)?;
            eigenfunctions_below(s, &spec, truncation)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(samples.len());
    let mut worst = f64::NEG_INFINITY;
    for &(t, x, y) in samples {
        g.check_point(x)?;
        g.check_point(y)?;
        let p: Vec<f64> = kernels
            .iter()
            .map(|k| heat_kernel(k, x, y, t, truncation))
            .collect::<Result<_>>()?;
        worst = worst.max(p[0] - p[1] - slack).max(p[1] - p[2] - slack);
        out.push(BracketingSample {
            t,
            x,
            y,
            upper_potential: p[0],
            actual: p[1],
            lower_potential: p[2],
        });
    }
    Ok(BracketingReport {
        samples: out,
        slack,
        worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::VertexConditionSet;
    use crate::graph::BuiltinGraph;
    use std::sync::Arc;

    #[test]
    fn truncation_gate() {
        let g = Arc::new(BuiltinGraph::interval(std::f64::consts::PI).unwrap());
        let c = VertexConditionSet::uniform(2, VertexCondition::Dirichlet).unwrap();
        let s = SecularSystem::new(g.clone(), c, Potential::zero(&g)).unwrap();
        let spec = certified_below(&s, 400.0).unwrap();
        let p = GraphPoint::new(0, 1.0);
        assert!(matches!(
            heat_kernel_diag(&s, &spec, p, 0.01, 400.0),
            Err(Error::TruncationTooSmall(_))
        ));
        assert!(heat_kernel_diag(&s, &spec, p, 0.1, 1000.0).is_err());
    }

    #[test]
    fn large_time_single_mode() {
        let g = Arc::new(BuiltinGraph::interval(std::f64::consts::PI).unwrap());
        let c = VertexConditionSet::uniform(2, VertexCondition::Dirichlet).unwrap();
        let s = SecularSystem::new(g.clone(), c, Potential::zero(&g)).unwrap();
        let spec = certified_below(&s, 10.0).unwrap();
        let x = GraphPoint::new(0, 1.0);
        let r = heat_kernel_diag(&s, &spec, x, 10.0, 9.0).unwrap();
        let ground = (-10.0f64).exp() * 2.0 / std::f64::consts::PI * 1f64.sin().powi(2);
        assert!((r.value - ground).abs() < 1e-12 * ground);
    }

    #[test]
    fn vertex_limits() {
        let d = scattering_at_infinity(VertexCondition::Delta { sigma: 0.0 }, 2);
        assert!((d[(0, 1)] - 1.0).abs() < 1e-15 && d[(0, 0)].abs() < 1e-15);
        for c in [VertexCondition::DeltaPrime { beta: 1.0 }, VertexCondition::Delta { sigma: 2.0 }] {
            let s = scattering_at_infinity(c, 3);
            assert!(((DMatrix::identity(3, 3) + s).sum() - 6.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_potential_brackets_trivially() {
        let g = Arc::new(BuiltinGraph::interval(1.0).unwrap());
        let c = VertexConditionSet::uniform(2, VertexCondition::kirchhoff()).unwrap();
        let s = SecularSystem::new(g.clone(), c, Potential::zero(&g)).unwrap();
        let x = GraphPoint::new(0, 0.3);
        let r = bracketing_check(&s, &[(0.1, x, x)], 1e-8).unwrap();
        let smp = r.samples[0];
        assert_eq!(smp.upper_potential, smp.actual);
        assert_eq!(smp.actual, smp.lower_potential);
        assert!(r.holds());
    }
}
