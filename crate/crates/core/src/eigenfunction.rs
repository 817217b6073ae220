//! Normalized eigenfunctions rebuilt from secular null vectors.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EdgeEnd, GraphPoint, MetricGraph};
use crate::propagator::FundamentalData;
use crate::quadrature::GaussLegendre;
use crate::secular::{SecularSystem, Spectrum};

/// An eigenfunction with `∫_G |f|² = 1`, stored as the initial state
/// `(f_e(0), f_e'(0))` on every edge.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    lambda: f64,
    graph: Arc<MetricGraph>,
    data: Arc<Vec<FundamentalData>>,
    grams: Arc<Vec<(Matrix2<f64>, Matrix2<f64>)>>,
    states: Vec<Vector2<f64>>,
}

impl Eigenfunction {
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    /// `(f_e(0), f_e'(0))`.
    pub fn initial_state(&self, e: usize) -> Result<Vector2<f64>> {
        self.states.get(e).copied().ok_or(Error::UnknownEdge(e))
    }

    /// `(f_e(x), f_e'(x))`.
    pub fn state_at(&self, p: GraphPoint) -> Result<Vector2<f64>> {
        self.graph.check_point(p)?;
        Ok(self.data[p.edge].at(p.x)? * self.states[p.edge])
    }

    pub fn evaluate(&self, p: GraphPoint) -> Result<f64> {
        Ok(self.state_at(p)?[0])
    }

    /// Boundary values and inward derivatives in incidence order.
    pub fn vertex_trace(&self, v: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let incs = self.graph.incidences(v)?;
        let mut f = Vec::with_capacity(incs.len());
        let mut df = Vec::with_capacity(incs.len());
        for inc in incs {
            let s = self.states[inc.edge];
            match inc.end {
                EdgeEnd::Start => {
                    f.push(s[0]);
                    df.push(s[1]);
                }
                EdgeEnd::End => {
                    let end = self.data[inc.edge].at_end() * s;
                    f.push(end[0]);
                    df.push(-end[1]);
                }
            }
        }
        Ok((f, df))
    }

    /// `|Σ_e f_e(v)|²`.
    pub fn vertex_sum_sq(&self, v: usize) -> Result<f64> {
        let (f, _) = self.vertex_trace(v)?;
        let s: f64 = f.iter().sum();
        Ok(s * s)
    }

    /// `max |f|`: samples at least `64 (1 + kℓ/π)` points per edge and
    /// refines every sign change of `f'` between samples.
    pub fn sup_norm(&self) -> f64 {
        let k = self.lambda.max(0.0).sqrt();
        let mut best: f64 = 0.0;
        for e in self.graph.edges() {
            let state = |x: f64| self.data[e.id].at(x).expect("sample on edge") * self.states[e.id];
            let n = (64.0 * (1.0 + k * e.length / std::f64::consts::PI)).ceil() as usize;
            let mut prev = (0.0, state(0.0));
            best = best.max(prev.1[0].abs());
            for i in 1..=n {
                let x = (e.length * i as f64 / n as f64).min(e.length);
                let cur = (x, state(x));
                best = best.max(cur.1[0].abs());
                if prev.1[1] * cur.1[1] < 0.0 {
                    best = best.max(refine_extremum(&state, prev, cur));
                }
                prev = cur;
            }
        }
        best
    }

    /// `∫_G |f|²` from the closed-form edge Gram matrices.
    pub fn norm_sq(&self) -> f64 {
        self.states
            .iter()
            .zip(self.grams.iter())
            .map(|(s, (w, _))| (s.transpose() * w * s)[0])
            .sum()
    }

    /// `∫_G q |f|²`.
    pub fn potential_expectation(&self) -> f64 {
        self.states
            .iter()
            .zip(self.grams.iter())
            .map(|(s, (_, wq))| (s.transpose() * wq * s)[0])
            .sum()
    }

    /// `-f'' + q f - λ f` at an interior point, with `f''` from a central
    /// difference of step `h`.
    pub fn residual_at(&self, p: GraphPoint, q: f64, h: f64) -> Result<f64> {
        let f = |x: f64| self.evaluate(GraphPoint::new(p.edge, x));
        let second = (f(p.x + h)? - 2.0 * f(p.x)? + f(p.x - h)?) / (h * h);
        let value = f(p.x)?;
        Ok(-second + (q - self.lambda) * value)
    }
}

/// `|f|` at the zero of `f'` between two samples, by Illinois regula falsi.
fn refine_extremum(
    state: &impl Fn(f64) -> Vector2<f64>,
    mut a: (f64, Vector2<f64>),
    mut b: (f64, Vector2<f64>),
) -> f64 {
    let (mut fa, mut fb) = (a.1[1], b.1[1]);
    let mut side = 0;
    let mut best = a.1[0].abs().max(b.1[0].abs());
    for _ in 0..12 {
        let x = (a.0 * fb - b.0 * fa) / (fb - fa);
        if !(x > a.0 && x < b.0) {
            break;
        }
        let s = state(x);
        best = best.max(s[0].abs());
        if s[1] * fb < 0.0 {
            a = (x, s);
            fa = s[1];
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = (x, s);
            fb = s[1];
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if s[1] == 0.0 {
            break;
        }
    }
    best
}

/// `∫_G f g` by composite Gauss–Legendre quadrature with panels aligned to
/// potential breakpoints and about one panel per half-wavelength.
pub fn inner_product(f: &Eigenfunction, g: &Eigenfunction, breaks: &[Vec<f64>]) -> Result<f64> {
    let rule = GaussLegendre::shared(16);
    let k = f.lambda.max(g.lambda).max(0.0).sqrt();
    let mut total = 0.0;
    for e in f.graph.edges() {
        let mut knots = vec![0.0];
        if let Some(b) = breaks.get(e.id) {
            knots.extend(b.iter().copied().filter(|&x| x > 0.0 && x < e.length));
        }
        knots.push(e.length);
        for w in knots.windows(2) {
            let len = w[1] - w[0];
            let panels = (2.0 * (1.0 + k * len / std::f64::consts::PI)).ceil() as usize;
            let h = len / panels as f64;
            for j in 0..panels {
                let a = w[0] + j as f64 * h;
                for (x, wt) in rule.nodes_on(a, a + h) {
                    let p = GraphPoint::new(e.id, x);
                    total += wt * f.evaluate(p)? * g.evaluate(p)?;
                }
            }
        }
    }
    Ok(total)
}

/// L²-orthonormal eigenfunctions spanning the eigenspace of an `m`-fold
/// eigenvalue.
pub fn cluster_eigenfunctions(
    system: &SecularSystem,
    lambda: f64,
    m: usize,
) -> Result<Vec<Eigenfunction>> {
    let basis = system.eigenvector_coefficients(lambda, m)?;
    let data = Arc::new(system.fundamental_data(lambda)?);
    let grams: Arc<Vec<_>> = Arc::new(data.iter().map(FundamentalData::gram).collect());
    let raw: Vec<Vec<Vector2<f64>>> = (0..m).map(|i| basis.initial_states(i)).collect();
    let mut gram: DMatrix<f64> = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            gram[(i, j)] = raw[i]
                .iter()
                .zip(&raw[j])
                .zip(grams.iter())
                .map(|((a, b), (w, _))| (a.transpose() * w * b)[0])
                .sum();
        }
    }
    // Löwdin: new_i = Σ_j raw_j (G^{-1/2})_{ji}
    let eig = SymmetricEigen::new(gram);
    if eig.eigenvalues.iter().any(|&x| x <= 0.0) {
        return Err(Error::RankMismatch {
            lambda,
            expected: m,
            found: eig.eigenvalues.iter().filter(|&&x| x > 0.0).count(),
        });
    }
    let inv_sqrt = DVector::from_iterator(m, eig.eigenvalues.iter().map(|x: &f64| 1.0 / x.sqrt()));
    let c = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let graph = system.graph().clone();
    Ok((0..m)
        .map(|i| {
            let states = (0..raw[0].len())
                .map(|e| (0..m).map(|j| raw[j][e] * c[(j, i)]).sum())
                .collect();
            Eigenfunction {
                lambda,
                graph: graph.clone(),
                data: data.clone(),
                grams: grams.clone(),
                states,
            }
        })
        .collect())
}

/// Eigenfunctions for every cluster of `spectrum` that starts at or below
/// position `n` (1-based within the spectrum), so clusters stay whole.
pub fn spectrum_eigenfunctions(
    system: &SecularSystem,
    spectrum: &Spectrum,
    n: usize,
) -> Result<Vec<Vec<Eigenfunction>>> {
    let mut upto = 0;
    let mut chosen = Vec::new();
    for c in spectrum.clusters() {
        if upto >= n {
            break;
        }
        chosen.push(*c);
        upto += c.multiplicity;
    }
    chosen
        .par_iter()
        .map(|c| cluster_eigenfunctions(system, c.value, c.multiplicity))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::{VertexCondition, VertexConditionSet};
    use crate::graph::BuiltinGraph;
    use crate::potential::Potential;
    use crate::secular::SpectrumRequest;
    use std::f64::consts::PI;

    fn system(g: MetricGraph, c: VertexCondition) -> SecularSystem {
        let n = g.num_vertices();
        let q = Potential::zero(&g);
        SecularSystem::new(Arc::new(g), VertexConditionSet::uniform(n, c).unwrap(), q).unwrap()
    }

    #[test]
    fn dirichlet_ground_state() {
        let s = system(BuiltinGraph::interval(PI).unwrap(), VertexCondition::Dirichlet);
        let f = &cluster_eigenfunctions(&s, 1.0, 1).unwrap()[0];
        let mid = f.evaluate(GraphPoint::new(0, PI / 2.0)).unwrap().abs();
        assert!((mid - (2.0 / PI).sqrt()).abs() < 1e-12);
        assert!((f.norm_sq() - 1.0).abs() < 1e-12);
        assert!((f.sup_norm() - (2.0 / PI).sqrt()).abs() < 1e-9);
        let (tr, _) = f.vertex_trace(0).unwrap();
        assert!(tr[0].abs() < 1e-12);
    }

    #[test]
    fn kirchhoff_constant_mode() {
        let s = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::kirchhoff());
        let f = &cluster_eigenfunctions(&s, 0.0, 1).unwrap()[0];
        assert!((f.sup_norm() - 1.0 / 3f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn delta_prime_traces() {
        let s = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::DeltaPrime { beta: 1.0 });
        let spec = s.find_spectrum(SpectrumRequest::FirstN(4)).unwrap();
        let fs = spectrum_eigenfunctions(&s, &spec, 4).unwrap();
        for f in fs.iter().flatten() {
            let (tr, d) = f.vertex_trace(0).unwrap();
            let sum: f64 = tr.iter().sum();
            assert!((d[0] - d[1]).abs() < 1e-8 && (d[1] - d[2]).abs() < 1e-8);
            assert!((sum - d[0]).abs() < 1e-8);
            assert!((f.vertex_sum_sq(0).unwrap() - d[0] * d[0]).abs() < 1e-8);
            // endpoint evaluation agrees with the trace
            let end = f.evaluate(GraphPoint::new(0, 0.0)).unwrap();
            assert_eq!(end, tr[0]);
        }
    }

    #[test]
    fn anti_kirchhoff_sum_vanishes() {
        let s = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::anti_kirchhoff());
        let spec = s.find_spectrum(SpectrumRequest::FirstN(5)).unwrap();
        for f in spectrum_eigenfunctions(&s, &spec, 5).unwrap().iter().flatten() {
            assert!(f.vertex_sum_sq(0).unwrap() < 1e-16);
        }
    }

    #[test]
    fn degenerate_cluster_is_orthonormal() {
        let s = system(BuiltinGraph::cycle(&[1.0; 4]).unwrap(), VertexCondition::kirchhoff());
        let lambda = (PI / 2.0).powi(2);
        let fs = cluster_eigenfunctions(&s, lambda, 2).unwrap();
        let breaks = vec![Vec::new(); 4];
        let g = |i: usize, j: usize| inner_product(&fs[i], &fs[j], &breaks).unwrap();
        assert!((g(0, 0) - 1.0).abs() < 1e-10);
        assert!((g(1, 1) - 1.0).abs() < 1e-10);
        assert!(g(0, 1).abs() < 1e-10);
    }
}
