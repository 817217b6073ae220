//! Fundamental solutions of `-u'' + q u = λ u` along a single edge.
//!
//! The propagator `M(x; λ)` maps `(u(0), u'(0))` to `(u(x), u'(x))`. For
//! piecewise-constant potentials it is an exact product of closed-form piece
//! matrices; linearly sampled potentials are integrated with classical RK4.

use nalgebra::{Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::potential::{EdgePotential, Interpolation, Potential};
use crate::quadrature::GaussLegendre;

/// Below this value of `|λ - c| h²` the closed forms switch to Taylor series.
const SERIES_THRESHOLD: f64 = 1e-8;

/// Propagator over a piece of length `h` with constant potential, where
/// `mu = λ - c`.
pub fn piece_matrix(mu: f64, h: f64) -> Matrix2<f64> {
    let z = mu * h * h;
    if z.abs() < SERIES_THRESHOLD {
        // cos(kh) ≈ 1 - z/2, sin(kh)/k ≈ h(1 - z/6), -k sin(kh) ≈ -μh(1 - z/6)
        let c = 1.0 - 0.5 * z + z * z / 24.0;
        let s = h * (1.0 - z / 6.0 + z * z / 120.0);
        let d = -mu * h * (1.0 - z / 6.0 + z * z / 120.0);
        Matrix2::new(c, s, d, c)
    } else if mu > 0.0 {
        let k = mu.sqrt();
        let (sn, cs) = (k * h).sin_cos();
        Matrix2::new(cs, sn / k, -k * sn, cs)
    } else {
        let k = (-mu).sqrt();
        let (sh, ch) = ((k * h).sinh(), (k * h).cosh());
        Matrix2::new(ch, sh / k, k * sh, ch)
    }
}

/// `∫_0^h φᵀ φ dy` with `φ(y) = (c(y), s(y))` the first row of
/// [`piece_matrix`].
pub fn piece_gram(mu: f64, h: f64) -> Matrix2<f64> {
    let z = mu * h * h;
    if z.abs() < 1.0 {
        let rule = GaussLegendre::shared(16);
        let mut g = Matrix2::zeros();
        for (y, w) in rule.nodes_on(0.0, h) {
            let m = piece_matrix(mu, y);
            let phi = Vector2::new(m[(0, 0)], m[(0, 1)]);
            g += w * phi * phi.transpose();
        }
        g
    } else if mu > 0.0 {
        let k = mu.sqrt();
        let s2 = (2.0 * k * h).sin() / (4.0 * k);
        let sin = (k * h).sin();
        let cc = 0.5 * h + s2;
        let ss = (0.5 * h - s2) / mu;
        let cs = sin * sin / (2.0 * mu);
        Matrix2::new(cc, cs, cs, ss)
    } else {
        let k = (-mu).sqrt();
        let s2 = (2.0 * k * h).sinh() / (4.0 * k);
        let sinh = (k * h).sinh();
        let cc = 0.5 * h + s2;
        let ss = (s2 - 0.5 * h) / (-mu);
        let cs = sinh * sinh / (2.0 * (-mu));
        Matrix2::new(cc, cs, cs, ss)
    }
}

/// Number of zeros in `(0, h]` of the solution with initial state `(u, du)`
/// on a piece with `mu = λ - c`.
pub fn piece_zero_count(u: f64, du: f64, mu: f64, h: f64) -> usize {
    if mu > 0.0 && mu * h * h >= SERIES_THRESHOLD {
        let k = mu.sqrt();
        let phase = (k * u).atan2(du);
        let pi = std::f64::consts::PI;
        let n = ((phase + k * h) / pi).floor() - (phase / pi).floor();
        n.max(0.0) as usize
    } else {
        // At most one zero when the piece is non-oscillatory.
        if u == 0.0 {
            return 0;
        }
        let m = piece_matrix(mu, h);
        let end = m[(0, 0)] * u + m[(0, 1)] * du;
        usize::from(end == 0.0 || end.signum() != u.signum())
    }
}

#[derive(Debug, Clone, Copy)]
enum SegmentKind {
    Constant { value: f64 },
    Linear { q0: f64, q1: f64 },
}

#[derive(Debug, Clone)]
struct Segment {
    start: f64,
    end: f64,
    kind: SegmentKind,
    /// Propagator from `0` to `start`.
    at_start: Matrix2<f64>,
}

/// Propagator data for one edge at one spectral parameter.
#[derive(Debug, Clone)]
pub struct FundamentalData {
    edge: usize,
    lambda: f64,
    length: f64,
    max_step: f64,
    segments: Vec<Segment>,
    at_end: Matrix2<f64>,
}

impl FundamentalData {
    pub fn new(g: &MetricGraph, q: &Potential, e: usize, lambda: f64) -> Result<Self> {
        let length = g.edge(e)?.length;
        let eq = q.edge(e)?;
        if !lambda.is_finite() {
            return Err(Error::Precondition(format!("non-finite lambda {lambda}")));
        }
        let max_step = 0.1 / (1.0 + lambda.abs()).sqrt();
        let mut segments = Vec::new();
        let mut m = Matrix2::identity();
        match eq {
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Linear,
            } => {
                let grid = eq.grid(length);
                for (i, w) in grid.windows(2).enumerate() {
                    let kind = SegmentKind::Linear {
                        q0: values[i],
                        q1: values[i + 1],
                    };
                    let seg = Segment {
                        start: w[0],
                        end: w[1],
                        kind,
                        at_start: m,
                    };
                    m = seg.local(lambda, w[1] - w[0], max_step) * m;
                    segments.push(seg);
                }
            }
            _ => {
                for p in eq.pieces(length).expect("piecewise constant") {
                    let seg = Segment {
                        start: p.start,
                        end: p.end,
                        kind: SegmentKind::Constant { value: p.value },
                        at_start: m,
                    };
                    m = piece_matrix(lambda - p.value, p.end - p.start) * m;
                    segments.push(seg);
                }
            }
        }
        Ok(Self {
            edge: e,
            lambda,
            length,
            max_step,
            segments,
            at_end: m,
        })
    }

    pub fn edge(&self) -> usize {
        self.edge
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `M(ℓ; λ)`.
    pub fn at_end(&self) -> &Matrix2<f64> {
        &self.at_end
    }

    /// `M(x; λ)` for `0 ≤ x ≤ ℓ`.
    pub fn at(&self, x: f64) -> Result<Matrix2<f64>> {
        if !(0.0..=self.length).contains(&x) {
            return Err(Error::PointOutsideEdge {
                edge: self.edge,
                x,
                length: self.length,
            });
        }
        if x == self.length {
            return Ok(self.at_end);
        }
        let i = self
            .segments
            .partition_point(|s| s.end <= x)
            .min(self.segments.len() - 1);
        let seg = &self.segments[i];
        Ok(seg.local(self.lambda, x - seg.start, self.max_step) * seg.at_start)
    }

    pub fn wronskian_defect(&self, x: f64) -> Result<f64> {
        Ok((self.at(x)?.determinant() - 1.0).abs())
    }

    /// `∫_0^ℓ φᵀφ dx` and `∫_0^ℓ q φᵀφ dx` with `φ(x)` the first row of
    /// `M(x)`, so that `∫ u v = a_uᵀ W a_v` for initial states `a_u`, `a_v`.
    pub fn gram(&self) -> (Matrix2<f64>, Matrix2<f64>) {
        let mut w = Matrix2::zeros();
        let mut wq = Matrix2::zeros();
        for seg in &self.segments {
            let h = seg.end - seg.start;
            match seg.kind {
                SegmentKind::Constant { value } => {
                    let g = seg.at_start.transpose() * piece_gram(self.lambda - value, h) * seg.at_start;
                    w += g;
                    wq += value * g;
                }
                SegmentKind::Linear { .. } => {
                    let (g, gq) = seg.linear_gram(self.lambda, h, self.max_step);
                    w += seg.at_start.transpose() * g * seg.at_start;
                    wq += seg.at_start.transpose() * gq * seg.at_start;
                }
            }
        }
        (w, wq)
    }

    /// Number of eigenvalues below `λ` of the edge with Dirichlet conditions
    /// at both ends, by Sturm oscillation: zeros in `(0, ℓ)` of the solution
    /// with `u(0) = 0`, `u'(0) = 1`.
    pub fn dirichlet_count(&self) -> usize {
        let mut total = 0;
        for (i, seg) in self.segments.iter().enumerate() {
            let state = seg.at_start * Vector2::new(0.0, 1.0);
            let h = seg.end - seg.start;
            let mut n = match seg.kind {
                SegmentKind::Constant { value } => {
                    piece_zero_count(state[0], state[1], self.lambda - value, h)
                }
                SegmentKind::Linear { .. } => seg.linear_zero_count(self.lambda, h, self.max_step, state),
            };
            if i + 1 == self.segments.len() && self.at_end[(0, 1)] == 0.0 && n > 0 {
                // a zero exactly at x = ℓ is not interior
                n -= 1;
            }
            total += n;
        }
        total
    }
}

impl Segment {
    fn q_at(&self, y: f64, h: f64) -> f64 {
        match self.kind {
            SegmentKind::Constant { value } => value,
            SegmentKind::Linear { q0, q1 } => q0 + (q1 - q0) * (y / h).clamp(0.0, 1.0),
        }
    }

    /// Propagator across `[start, start + y]` of this segment.
    fn local(&self, lambda: f64, y: f64, max_step: f64) -> Matrix2<f64> {
        match self.kind {
            SegmentKind::Constant { value } => piece_matrix(lambda - value, y),
            SegmentKind::Linear { .. } => {
                let h = self.end - self.start;
                let mut m = Matrix2::identity();
                rk4_walk(y, max_step, |a, b| {
                    m = rk4_step(|s| lambda_rhs(self.q_at(s, h), lambda), a, b, m);
                });
                m
            }
        }
    }

    fn linear_gram(&self, lambda: f64, h: f64, max_step: f64) -> (Matrix2<f64>, Matrix2<f64>) {
        // Augmented RK4: state (M, W, Wq) with W' = φᵀφ, Wq' = q φᵀφ.
        let mut m = Matrix2::identity();
        let mut w = Matrix2::zeros();
        let mut wq = Matrix2::zeros();
        let deriv = |s: f64, m: &Matrix2<f64>| {
            let q = self.q_at(s, h);
            let phi = Vector2::new(m[(0, 0)], m[(0, 1)]);
            let outer = phi * phi.transpose();
            (lambda_rhs(q, lambda) * m, outer, q * outer)
        };
        rk4_walk(h, max_step, |a, b| {
            let dt = b - a;
            let (k1, w1, v1) = deriv(a, &m);
            let m2 = m + 0.5 * dt * k1;
            let (k2, w2, v2) = deriv(a + 0.5 * dt, &m2);
            let m3 = m + 0.5 * dt * k2;
            let (k3, w3, v3) = deriv(a + 0.5 * dt, &m3);
            let m4 = m + dt * k3;
            let (k4, w4, v4) = deriv(b, &m4);
            m += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            w += dt / 6.0 * (w1 + 2.0 * w2 + 2.0 * w3 + w4);
            wq += dt / 6.0 * (v1 + 2.0 * v2 + 2.0 * v3 + v4);
        });
        (w, wq)
    }

    fn linear_zero_count(&self, lambda: f64, h: f64, max_step: f64, start: Vector2<f64>) -> usize {
        let mut m = Matrix2::identity();
        let mut prev = start[0];
        let mut count = 0;
        rk4_walk(h, max_step, |a, b| {
            m = rk4_step(|s| lambda_rhs(self.q_at(s, h), lambda), a, b, m);
            let u = (m * start)[0];
            if u == 0.0 || (prev != 0.0 && u.signum() != prev.signum()) {
                count += 1;
            }
            prev = u;
        });
        count
    }
}

/// Coefficient matrix of `(u, u')' = A (u, u')`.
fn lambda_rhs(q: f64, lambda: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, q - lambda, 0.0)
}

fn rk4_walk(length: f64, max_step: f64, mut f: impl FnMut(f64, f64)) {
    if length <= 0.0 {
        return;
    }
    let n = (length / max_step).ceil().max(1.0) as usize;
    let dt = length / n as f64;
    for i in 0..n {
        let a = i as f64 * dt;
        let b = if i + 1 == n { length } else { a + dt };
        f(a, b);
    }
}

fn rk4_step(rhs: impl Fn(f64) -> Matrix2<f64>, a: f64, b: f64, m: Matrix2<f64>) -> Matrix2<f64> {
    let dt = b - a;
    let mid = rhs(0.5 * (a + b));
    let k1 = rhs(a) * m;
    let k2 = mid * (m + 0.5 * dt * k1);
    let k3 = mid * (m + 0.5 * dt * k2);
    let k4 = rhs(b) * (m + dt * k3);
    m + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// `M(x; λ)` on edge `e`.
pub fn propagator(g: &MetricGraph, q: &Potential, e: usize, lambda: f64, x: f64) -> Result<Matrix2<f64>> {
    FundamentalData::new(g, q, e, lambda)?.at(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuiltinGraph;

    fn interval(l: f64) -> MetricGraph {
        BuiltinGraph::interval(l).unwrap()
    }

    #[test]
    fn free_propagator_closed_form() {
        let g = interval(3.0);
        let q = Potential::zero(&g);
        let k: f64 = 1.7;
        let x = 2.3;
        let m = propagator(&g, &q, 0, k * k, x).unwrap();
        let expect = Matrix2::new((k * x).cos(), (k * x).sin() / k, -k * (k * x).sin(), (k * x).cos());
        assert!((m - expect).amax() < 1e-14);
        let m0 = propagator(&g, &q, 0, 0.0, x).unwrap();
        assert_eq!(m0, Matrix2::new(1.0, x, 0.0, 1.0));
        assert_eq!(propagator(&g, &q, 0, 5.0, 0.0).unwrap(), Matrix2::identity());
        assert!(propagator(&g, &q, 0, 5.0, 3.5).is_err());
    }

    #[test]
    fn wronskian_is_one() {
        let g = interval(1.0);
        let q = Potential::uniform(
            &g,
            EdgePotential::PiecewiseConstant {
                breaks: vec![0.1, 0.35, 0.8],
                values: vec![3.0, -7.0, 0.5, 40.0],
            },
        )
        .unwrap();
        for lambda in [-20.0, 0.0, 0.5, 3.0, 39.999, 1e3, 1e6] {
            let d = FundamentalData::new(&g, &q, 0, lambda).unwrap();
            assert!(d.wronskian_defect(1.0).unwrap() <= 1e-12 * (1.0 + lambda.abs().sqrt()));
        }
        let free = FundamentalData::new(&g, &Potential::zero(&g), 0, 2.0).unwrap();
        assert!(free.wronskian_defect(0.77).unwrap() < 1e-15);
    }

    #[test]
    fn series_branch_is_continuous() {
        let h = 0.9;
        let a = piece_matrix(1e-12, h);
        let b = piece_matrix(2e-8, h);
        let c = piece_matrix(-2e-8, h);
        assert!((a - b).amax() < 1e-7);
        assert!((a - c).amax() < 1e-7);
        // just below the switch, against the trigonometric closed form
        let mu = 0.9e-8 / (h * h);
        let k = mu.sqrt();
        let closed = Matrix2::new((k * h).cos(), (k * h).sin() / k, -k * (k * h).sin(), (k * h).cos());
        assert!((piece_matrix(mu, h) - closed).amax() < 1e-14);
    }

    #[test]
    fn dirichlet_counts_match_free_interval() {
        let g = interval(std::f64::consts::PI);
        let q = Potential::zero(&g);
        for (lambda, n) in [(-1.0, 0), (0.5, 0), (1.5, 1), (3.9, 1), (4.1, 2), (99.0, 9), (101.0, 10)] {
            assert_eq!(FundamentalData::new(&g, &q, 0, lambda).unwrap().dirichlet_count(), n);
        }
    }
}
