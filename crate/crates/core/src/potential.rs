//! Bounded edgewise potentials.

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// `values[i]` is constant on the i-th of `n` equal cells.
    Constant,
    /// `values[i]` sits at node `i ℓ / (n - 1)`; linear in between.
    Linear,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EdgePotential {
    Zero,
    Constant(f64),
    /// `values[i]` on `(breaks[i-1], breaks[i])` with `breaks[-1] = 0` and
    /// `breaks[n] = ℓ`; `values.len() == breaks.len() + 1`.
    PiecewiseConstant { breaks: Vec<f64>, values: Vec<f64> },
    Sampled {
        values: Vec<f64>,
        interpolation: Interpolation,
    },
}

/// A maximal interval of an edge on which the potential is constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub start: f64,
    pub end: f64,
    pub value: f64,
}

impl EdgePotential {
    fn validate(&self, length: f64) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            EdgePotential::Zero => Ok(()),
            EdgePotential::Constant(c) if c.is_finite() => Ok(()),
            EdgePotential::Constant(_) => Err(Error::InvalidPotential("unbounded constant".into())),
            EdgePotential::PiecewiseConstant { breaks, values } => {
                if values.len() != breaks.len() + 1 {
                    return Err(Error::InvalidPotential(format!(
                        "{} breakpoints need {} values, got {}",
                        breaks.len(),
                        breaks.len() + 1,
                        values.len()
                    )));
                }
                if !finite(values) || !finite(breaks) {
                    return Err(Error::InvalidPotential("non-finite entry".into()));
                }
                let mut prev = 0.0;
                for &b in breaks {
                    if !(b > prev && b < length) {
                        return Err(Error::InvalidPotential(format!(
                            "breakpoints must increase strictly inside (0, {length})"
                        )));
                    }
                    prev = b;
                }
                Ok(())
            }
            EdgePotential::Sampled {
                values,
                interpolation,
            } => {
                let min = match interpolation {
                    Interpolation::Constant => 1,
                    Interpolation::Linear => 2,
                };
                if values.len() < min {
                    return Err(Error::InvalidPotential("too few samples".into()));
                }
                if !finite(values) {
                    return Err(Error::InvalidPotential("non-finite sample".into()));
                }
                Ok(())
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let amax = |v: &[f64]| v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        match self {
            EdgePotential::Zero => 0.0,
            EdgePotential::Constant(c) => c.abs(),
            EdgePotential::PiecewiseConstant { values, .. } => amax(values),
            EdgePotential::Sampled { values, .. } => amax(values),
        }
    }

    pub fn evaluate(&self, length: f64, x: f64) -> f64 {
        match self {
            EdgePotential::Zero => 0.0,
            EdgePotential::Constant(c) => *c,
            EdgePotential::PiecewiseConstant { breaks, values } => {
                let i = breaks.partition_point(|&b| b <= x);
                values[i]
            }
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Constant,
            } => {
                let n = values.len();
                let i = ((x / length) * n as f64).floor() as usize;
                values[i.min(n - 1)]
            }
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Linear,
            } => {
                let cells = values.len() - 1;
                let s = (x / length * cells as f64).clamp(0.0, cells as f64);
                let i = (s.floor() as usize).min(cells - 1);
                let w = s - i as f64;
                values[i] * (1.0 - w) + values[i + 1] * w
            }
        }
    }

    /// Piecewise-constant decomposition, or `None` for linearly interpolated
    /// samples.
    pub fn pieces(&self, length: f64) -> Option<Vec<Piece>> {
        match self {
            EdgePotential::Zero => Some(vec![Piece {
                start: 0.0,
                end: length,
                value: 0.0,
            }]),
            EdgePotential::Constant(c) => Some(vec![Piece {
                start: 0.0,
                end: length,
                value: *c,
            }]),
            EdgePotential::PiecewiseConstant { breaks, values } => {
                let mut bounds = Vec::with_capacity(breaks.len() + 2);
                bounds.push(0.0);
                bounds.extend_from_slice(breaks);
                bounds.push(length);
                Some(
                    values
                        .iter()
                        .enumerate()
                        .map(|(i, &value)| Piece {
                            start: bounds[i],
                            end: bounds[i + 1],
                            value,
                        })
                        .collect(),
                )
            }
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Constant,
            } => {
                let h = length / values.len() as f64;
                Some(
                    values
                        .iter()
                        .enumerate()
                        .map(|(i, &value)| Piece {
                            start: i as f64 * h,
                            end: if i + 1 == values.len() {
                                length
                            } else {
                                (i + 1) as f64 * h
                            },
                            value,
                        })
                        .collect(),
                )
            }
            EdgePotential::Sampled {
                interpolation: Interpolation::Linear,
                ..
            } => None,
        }
    }

    /// Points where the potential may be non-smooth, including both ends.
    pub fn grid(&self, length: f64) -> Vec<f64> {
        match self {
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Linear,
            } => {
                let cells = values.len() - 1;
                (0..=cells)
                    .map(|i| {
                        if i == cells {
                            length
                        } else {
                            length * i as f64 / cells as f64
                        }
                    })
                    .collect()
            }
            other => {
                let pieces = other.pieces(length).expect("piecewise constant");
                std::iter::once(0.0)
                    .chain(pieces.iter().map(|p| p.end))
                    .collect()
            }
        }
    }

    pub fn integral(&self, length: f64) -> f64 {
        match self {
            EdgePotential::Sampled {
                values,
                interpolation: Interpolation::Linear,
            } => {
                let h = length / (values.len() - 1) as f64;
                let inner: f64 = values[1..values.len() - 1].iter().sum();
                h * (inner + 0.5 * (values[0] + values[values.len() - 1]))
            }
            other => other
                .pieces(length)
                .expect("piecewise constant")
                .iter()
                .map(|p| p.value * (p.end - p.start))
                .sum(),
        }
    }

    pub fn scale(&self, tau: f64) -> EdgePotential {
        match self {
            EdgePotential::Zero => EdgePotential::Zero,
            EdgePotential::Constant(c) => EdgePotential::Constant(tau * c),
            EdgePotential::PiecewiseConstant { breaks, values } => EdgePotential::PiecewiseConstant {
                breaks: breaks.clone(),
                values: values.iter().map(|v| tau * v).collect(),
            },
            EdgePotential::Sampled {
                values,
                interpolation,
            } => EdgePotential::Sampled {
                values: values.iter().map(|v| tau * v).collect(),
                interpolation: *interpolation,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            EdgePotential::Zero => true,
            EdgePotential::Constant(c) => *c == 0.0,
            EdgePotential::PiecewiseConstant { values, .. } | EdgePotential::Sampled { values, .. } => {
                values.iter().all(|&v| v == 0.0)
            }
        }
    }
}

/// A potential on a specific graph: one [`EdgePotential`] per edge together
/// with the edge lengths it was validated against.
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    edges: Vec<EdgePotential>,
    lengths: Vec<f64>,
}

impl Potential {
    pub fn new(g: &MetricGraph, edges: Vec<EdgePotential>) -> Result<Self> {
        if edges.len() != g.num_edges() {
            return Err(Error::InvalidPotential(format!(
                "{} edge potentials for {} edges",
                edges.len(),
                g.num_edges()
            )));
        }
        let lengths: Vec<f64> = g.edges().iter().map(|e| e.length).collect();
        for (e, (q, &l)) in edges.iter().zip(&lengths).enumerate() {
            q.validate(l)
                .map_err(|err| Error::InvalidPotential(format!("edge {e}: {err}")))?;
        }
        Ok(Self { edges, lengths })
    }

    pub fn uniform(g: &MetricGraph, q: EdgePotential) -> Result<Self> {
        Self::new(g, vec![q; g.num_edges()])
    }

    pub fn zero(g: &MetricGraph) -> Self {
        Self::uniform(g, EdgePotential::Zero).expect("zero potential is valid")
    }

    pub fn constant(g: &MetricGraph, c: f64) -> Result<Self> {
        Self::uniform(g, EdgePotential::Constant(c))
    }

    pub fn edge(&self, e: usize) -> Result<&EdgePotential> {
        self.edges.get(e).ok_or(Error::UnknownEdge(e))
    }

    pub fn edges(&self) -> &[EdgePotential] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Checks that this potential was built for a graph with the same edge
    /// lengths as `g`.
    pub fn check_graph(&self, g: &MetricGraph) -> Result<()> {
        let same = self.lengths.len() == g.num_edges()
            && self
                .lengths
                .iter()
                .zip(g.edges())
                .all(|(&l, e)| l == e.length);
        if same {
            Ok(())
        } else {
            Err(Error::InvalidPotential(
                "potential was built for a different graph".into(),
            ))
        }
    }

    pub fn evaluate(&self, e: usize, x: f64) -> Result<f64> {
        let q = self.edge(e)?;
        Ok(q.evaluate(self.lengths[e], x))
    }

    pub fn pieces(&self, e: usize) -> Result<Option<Vec<Piece>>> {
        Ok(self.edge(e)?.pieces(self.lengths[e]))
    }

    pub fn sup_norm(&self) -> f64 {
        self.edges.iter().map(EdgePotential::sup_norm).fold(0.0, f64::max)
    }

    pub fn integral(&self) -> f64 {
        self.edges
            .iter()
            .zip(&self.lengths)
            .map(|(q, &l)| q.integral(l))
            .sum()
    }

    /// Constant potentials `∓‖q‖_∞` bracketing `q` from below and above.
    pub fn bracket(&self) -> (Potential, Potential) {
        let s = self.sup_norm();
        let make = |c: f64| Potential {
            edges: vec![EdgePotential::Constant(c); self.edges.len()],
            lengths: self.lengths.clone(),
        };
        (make(-s), make(s))
    }

    pub fn scale(&self, tau: f64) -> Potential {
        Potential {
            edges: self.edges.iter().map(|q| q.scale(tau)).collect(),
            lengths: self.lengths.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.edges.iter().all(EdgePotential::is_zero)
    }

    /// Potential on the graph produced by [`MetricGraph::split_edge`] at
    /// `(e, x)`.
    pub fn split_edge(&self, split: &MetricGraph, e: usize, x: f64) -> Result<Potential> {
        let q = self.edge(e)?;
        let l = self.lengths[e];
        let (first, second) = match q {
            EdgePotential::Zero => (EdgePotential::Zero, EdgePotential::Zero),
            EdgePotential::Constant(c) => (EdgePotential::Constant(*c), EdgePotential::Constant(*c)),
            _ => {
                let pieces = q.pieces(l).ok_or_else(|| {
                    Error::InvalidPotential("cannot split a linearly sampled potential".into())
                })?;
                let part = |lo: f64, hi: f64| {
                    let mut breaks = Vec::new();
                    let mut values = Vec::new();
                    for p in pieces.iter().filter(|p| p.end > lo && p.start < hi) {
                        if !values.is_empty() {
                            breaks.push(p.start - lo);
                        }
                        values.push(p.value);
                    }
                    EdgePotential::PiecewiseConstant { breaks, values }
                };
                (part(0.0, x), part(x, l))
            }
        };
        let mut edges = self.edges.clone();
        edges[e] = first;
        edges.push(second);
        Potential::new(split, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BuiltinGraph;
    use proptest::prelude::*;

    fn interval() -> MetricGraph {
        BuiltinGraph::interval(1.0).unwrap()
    }

    fn three_piece() -> EdgePotential {
        EdgePotential::PiecewiseConstant {
            breaks: vec![0.25, 0.5],
            values: vec![1.0, -4.0, 2.0],
        }
    }

    #[test]
    fn sup_norms() {
        let g = interval();
        assert_eq!(Potential::zero(&g).sup_norm(), 0.0);
        assert_eq!(Potential::constant(&g, -3.0).unwrap().sup_norm(), 3.0);
        assert_eq!(Potential::uniform(&g, three_piece()).unwrap().sup_norm(), 4.0);
    }

    #[test]
    fn brackets() {
        let g = interval();
        let (lo, hi) = Potential::zero(&g).bracket();
        assert_eq!((lo.sup_norm(), hi.sup_norm()), (0.0, 0.0));
        let (lo, hi) = Potential::constant(&g, 2.0).unwrap().bracket();
        assert_eq!(lo.evaluate(0, 0.3).unwrap(), -2.0);
        assert_eq!(hi.evaluate(0, 0.3).unwrap(), 2.0);
        let q = Potential::uniform(&g, three_piece()).unwrap();
        let (lo, hi) = q.bracket();
        assert_eq!((lo.evaluate(0, 0.9).unwrap(), hi.evaluate(0, 0.9).unwrap()), (-4.0, 4.0));
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = q.evaluate(0, x).unwrap();
            assert!(lo.evaluate(0, x).unwrap() <= v && v <= hi.evaluate(0, x).unwrap());
        }
    }

    #[test]
    fn integrals() {
        let star = BuiltinGraph::star(3, 1.0).unwrap();
        assert_eq!(Potential::constant(&star, 0.7).unwrap().integral(), 0.7 * 3.0);
        assert_eq!(Potential::zero(&star).integral(), 0.0);
        let half = EdgePotential::PiecewiseConstant {
            breaks: vec![0.5],
            values: vec![1.0, 0.0],
        };
        assert_eq!(Potential::uniform(&interval(), half).unwrap().integral(), 0.5);
        let lin = EdgePotential::Sampled {
            values: vec![0.0, 1.0, 2.0],
            interpolation: Interpolation::Linear,
        };
        assert!((Potential::uniform(&interval(), lin).unwrap().integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaling() {
        let g = interval();
        let q = Potential::constant(&g, 4.0).unwrap();
        assert_eq!(q.scale(0.25).evaluate(0, 0.5).unwrap(), 1.0);
        assert!(q.scale(0.0).is_zero());
        assert_eq!(q.scale(1.0), q);
    }

    #[test]
    fn validation() {
        let g = interval();
        let bad_breaks = EdgePotential::PiecewiseConstant {
            breaks: vec![0.5, 0.4],
            values: vec![1.0, 2.0, 3.0],
        };
        assert!(Potential::uniform(&g, bad_breaks).is_err());
        let outside = EdgePotential::PiecewiseConstant {
            breaks: vec![1.0],
            values: vec![1.0, 2.0],
        };
        assert!(Potential::uniform(&g, outside).is_err());
        assert!(Potential::constant(&g, f64::INFINITY).is_err());
        assert!(Potential::new(&g, vec![]).is_err());
    }

    #[test]
    fn split_keeps_values() {
        let g = interval();
        let q = Potential::uniform(&g, three_piece()).unwrap();
        let split = g.split_edge(crate::graph::GraphPoint::new(0, 0.4)).unwrap();
        let qs = q.split_edge(&split, 0, 0.4).unwrap();
        for i in 0..100 {
            let x = (i as f64 + 0.5) / 100.0;
            let expect = q.evaluate(0, x).unwrap();
            let got = if x < 0.4 {
                qs.evaluate(0, x).unwrap()
            } else {
                qs.evaluate(1, x - 0.4).unwrap()
            };
            assert_eq!(got, expect, "x = {x}");
        }
        assert!((qs.integral() - q.integral()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn integral_is_linear(a in -3.0..3.0f64, b in -3.0..3.0f64,
                              v1 in prop::collection::vec(-5.0..5.0f64, 3),
                              v2 in prop::collection::vec(-5.0..5.0f64, 3)) {
            let g = interval();
            let mk = |v: &[f64]| EdgePotential::PiecewiseConstant { breaks: vec![0.2, 0.7], values: v.to_vec() };
            let combo: Vec<f64> = v1.iter().zip(&v2).map(|(x, y)| a * x + b * y).collect();
            let q1 = Potential::uniform(&g, mk(&v1)).unwrap();
            let q2 = Potential::uniform(&g, mk(&v2)).unwrap();
            let q = Potential::uniform(&g, mk(&combo)).unwrap();
            prop_assert!((q.integral() - a * q1.integral() - b * q2.integral()).abs() < 1e-12);
        }

        #[test]
        fn sup_norm_scales(tau in 0.0..1.0f64, v in prop::collection::vec(-5.0..5.0f64, 3)) {
            let g = interval();
            let q = Potential::uniform(&g, EdgePotential::PiecewiseConstant { breaks: vec![0.2, 0.7], values: v }).unwrap();
            prop_assert!((q.scale(tau).sup_norm() - tau * q.sup_norm()).abs() < 1e-12);
        }
    }
}
