//! Vertex coupling conditions.
//!
//! Traces at a vertex are collected in the incidence order of
//! [`MetricGraph::incidences`]. `F(v)` holds boundary values and `∂F(v)` the
//! inward derivatives: `∂f(0) = f'(0)` and `∂f(ℓ) = -f'(ℓ)`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::MetricGraph;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VertexCondition {
    /// Continuous inward derivative and `Σ_e f_e(v) = β ∂f(v)`. `β = 0` is
    /// the anti-Kirchhoff condition.
    DeltaPrime { beta: f64 },
    /// Continuous value and `Σ_e ∂f_e(v) = σ f(v)`. `σ = 0` is Kirchhoff.
    Delta { sigma: f64 },
    Dirichlet,
}

impl VertexCondition {
    pub fn anti_kirchhoff() -> Self {
        VertexCondition::DeltaPrime { beta: 0.0 }
    }

    pub fn kirchhoff() -> Self {
        VertexCondition::Delta { sigma: 0.0 }
    }

    fn validate(&self, v: usize) -> Result<()> {
        let ok = match *self {
            VertexCondition::DeltaPrime { beta } => beta.is_finite(),
            VertexCondition::Delta { sigma } => sigma.is_finite(),
            VertexCondition::Dirichlet => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConditions(format!(
                "non-finite coupling strength at vertex {v}"
            )))
        }
    }
}

/// Exactly one condition per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexConditionSet {
    conditions: Vec<VertexCondition>,
}

impl VertexConditionSet {
    pub fn new(conditions: Vec<VertexCondition>) -> Result<Self> {
        for (v, c) in conditions.iter().enumerate() {
            c.validate(v)?;
        }
        Ok(Self { conditions })
    }

    pub fn uniform(num_vertices: usize, condition: VertexCondition) -> Result<Self> {
        Self::new(vec![condition; num_vertices])
    }

    pub fn delta_prime(betas: &[f64]) -> Result<Self> {
        Self::new(
            betas
                .iter()
                .map(|&beta| VertexCondition::DeltaPrime { beta })
                .collect(),
        )
    }

    pub fn delta(sigmas: &[f64]) -> Result<Self> {
        Self::new(
            sigmas
                .iter()
                .map(|&sigma| VertexCondition::Delta { sigma })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.conditions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.conditions.is_empty()
    }

    pub fn get(&self, v: usize) -> Result<VertexCondition> {
        self.conditions
            .get(v)
            .copied()
            .ok_or_else(|| Error::InvalidConditions(format!("missing condition for vertex {v}")))
    }

    pub fn as_slice(&self) -> &[VertexCondition] {
        &self.conditions
    }

    /// Replaces the condition at `v`, appending if `v == len()`.
    pub fn with(mut self, v: usize, condition: VertexCondition) -> Result<Self> {
        condition.validate(v)?;
        match v.cmp(&self.conditions.len()) {
            std::cmp::Ordering::Less => self.conditions[v] = condition,
            std::cmp::Ordering::Equal => self.conditions.push(condition),
            std::cmp::Ordering::Greater => {
                return Err(Error::InvalidConditions(format!(
                    "cannot set vertex {v} in a set of {} conditions",
                    self.conditions.len()
                )))
            }
        }
        Ok(self)
    }

    pub fn check_covers(&self, g: &MetricGraph) -> Result<()> {
        if self.conditions.len() != g.num_vertices() {
            return Err(Error::InvalidConditions(format!(
                "{} conditions for {} vertices",
                self.conditions.len(),
                g.num_vertices()
            )));
        }
        Ok(())
    }

    /// `Some(β)` if every vertex carries a δ′ condition, in vertex order.
    pub fn delta_prime_strengths(&self) -> Option<Vec<f64>> {
        self.conditions
            .iter()
            .map(|c| match *c {
                VertexCondition::DeltaPrime { beta } => Some(beta),
                _ => None,
            })
            .collect()
    }

    pub fn delta_strengths(&self) -> Option<Vec<f64>> {
        self.conditions
            .iter()
            .map(|c| match *c {
                VertexCondition::Delta { sigma } => Some(sigma),
                _ => None,
            })
            .collect()
    }
}

/// `A F(v) + B ∂F(v) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AbPair {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl AbPair {
    pub fn degree(&self) -> usize {
        self.a.nrows()
    }

    pub fn for_condition(condition: VertexCondition, degree: usize) -> Self {
        let d = degree;
        let mut a = DMatrix::zeros(d, d);
        let mut b = DMatrix::zeros(d, d);
        match condition {
            VertexCondition::DeltaPrime { beta } => {
                for i in 0..d - 1 {
                    b[(i, i)] = 1.0;
                    b[(i, i + 1)] = -1.0;
                }
                a.row_mut(d - 1).fill(1.0);
                b[(d - 1, 0)] = -beta;
            }
            VertexCondition::Delta { sigma } => {
                for i in 0..d - 1 {
                    a[(i, i)] = 1.0;
                    a[(i, i + 1)] = -1.0;
                }
                b.row_mut(d - 1).fill(1.0);
                a[(d - 1, 0)] = -sigma;
            }
            VertexCondition::Dirichlet => a.fill_with_identity(),
        }
        AbPair { a, b }
    }
}

pub fn to_ab_pairs(g: &MetricGraph, c: &VertexConditionSet) -> Result<Vec<AbPair>> {
    (0..g.num_vertices())
        .map(|v| Ok(AbPair::for_condition(c.get(v)?, g.degree(v)?)))
        .collect()
}

const SELF_ADJOINT_TOL: f64 = 1e-12;

/// Full rank of `[A | B]` and symmetry of `A Bᵀ`.
pub fn check_self_adjoint(p: &AbPair) -> Result<bool> {
    let d = p.a.nrows();
    if p.a.ncols() != d || p.b.nrows() != d || p.b.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "A is {}x{}, B is {}x{}",
            p.a.nrows(),
            p.a.ncols(),
            p.b.nrows(),
            p.b.ncols()
        )));
    }
    let mut stacked = DMatrix::zeros(d, 2 * d);
    stacked.view_mut((0, 0), (d, d)).copy_from(&p.a);
    stacked.view_mut((0, d), (d, d)).copy_from(&p.b);
    let scale = stacked.amax().max(1.0);
    let sv = stacked.singular_values();
    let rank = sv.iter().filter(|&&s| s > SELF_ADJOINT_TOL * scale).count();
    let abt = &p.a * p.b.transpose();
    let asym = (&abt - abt.transpose()).amax();
    Ok(rank == d && asym <= SELF_ADJOINT_TOL * scale * scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionKind {
    /// All entries `1/deg`.
    Dirichlet,
    /// The zero matrix.
    DeltaPrime,
    /// `Id - P_D`.
    Delta,
}

pub fn projection(kind: ProjectionKind, degree: usize) -> DMatrix<f64> {
    let d = degree;
    let pd = DMatrix::from_element(d, d, 1.0 / d as f64);
    match kind {
        ProjectionKind::Dirichlet => pd,
        ProjectionKind::DeltaPrime => DMatrix::zeros(d, d),
        ProjectionKind::Delta => DMatrix::identity(d, d) - pd,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingKind {
    DeltaPrime,
    Delta,
}

/// High-energy limit `Id - 2P` of the vertex scattering matrix.
pub fn scattering_limit(g: &MetricGraph, v: usize, kind: CouplingKind) -> Result<DMatrix<f64>> {
    let d = g.degree(v)?;
    let p = match kind {
        CouplingKind::DeltaPrime => projection(ProjectionKind::DeltaPrime, d),
        CouplingKind::Delta => projection(ProjectionKind::Delta, d),
    };
    Ok(DMatrix::identity(d, d) - 2.0 * p)
}

/// Form-level description of a vertex condition: admissible boundary values
/// are `F(v) = basis · z` and the vertex adds `zᵀ penalty z` to the form.
#[derive(Debug, Clone, PartialEq)]
pub struct FormVertexData {
    pub basis: DMatrix<f64>,
    pub penalty: DMatrix<f64>,
}

impl FormVertexData {
    pub fn for_condition(condition: VertexCondition, degree: usize) -> Self {
        let d = degree;
        match condition {
            VertexCondition::DeltaPrime { beta } if beta != 0.0 => FormVertexData {
                basis: DMatrix::identity(d, d),
                penalty: DMatrix::from_element(d, d, 1.0 / beta),
            },
            VertexCondition::DeltaPrime { .. } => {
                // Σ F = 0: eliminate the last entry.
                let mut basis = DMatrix::zeros(d, d - 1);
                for i in 0..d - 1 {
                    basis[(i, i)] = 1.0;
                    basis[(d - 1, i)] = -1.0;
                }
                FormVertexData {
                    basis,
                    penalty: DMatrix::zeros(d - 1, d - 1),
                }
            }
            VertexCondition::Delta { sigma } => FormVertexData {
                basis: DMatrix::from_element(d, 1, 1.0),
                penalty: DMatrix::from_element(1, 1, sigma),
            },
            VertexCondition::Dirichlet => FormVertexData {
                basis: DMatrix::zeros(d, 0),
                penalty: DMatrix::zeros(0, 0),
            },
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Operator conditions obtained by integrating the form by parts:
    /// `F ∈ range(basis)` and `basisᵀ ∂F = penalty · z` with `F = basis · z`.
    /// Rows may be redundant.
    pub fn integrated_conditions(&self) -> AbPair {
        let d = self.basis.nrows();
        let p = self.dim();
        let t = &self.basis;
        let pinv = if p == 0 {
            DMatrix::zeros(0, d)
        } else {
            (t.transpose() * t)
                .try_inverse()
                .expect("basis has full column rank")
                * t.transpose()
        };
        let complement = DMatrix::identity(d, d) - t * &pinv;
        let mut a = DMatrix::zeros(d + p, d);
        let mut b = DMatrix::zeros(d + p, d);
        a.view_mut((0, 0), (d, d)).copy_from(&complement);
        a.view_mut((d, 0), (p, d)).copy_from(&(&self.penalty * &pinv));
        b.view_mut((d, 0), (p, d)).copy_from(&(-t.transpose()));
        AbPair { a, b }
    }
}

/// Global boundary-value parameterization over the `2|E|` edge endpoints.
#[derive(Debug, Clone)]
pub struct FormBoundary {
    /// `2|E| x p` map from free parameters to endpoint values.
    pub basis: DMatrix<f64>,
    /// `p x p` vertex contribution to the form.
    pub penalty: DMatrix<f64>,
}

pub fn form_boundary(g: &MetricGraph, c: &VertexConditionSet) -> Result<FormBoundary> {
    c.check_covers(g)?;
    let per_vertex: Vec<FormVertexData> = (0..g.num_vertices())
        .map(|v| Ok(FormVertexData::for_condition(c.get(v)?, g.degree(v)?)))
        .collect::<Result<_>>()?;
    let p: usize = per_vertex.iter().map(FormVertexData::dim).sum();
    let mut basis = DMatrix::zeros(2 * g.num_edges(), p);
    let mut penalty = DMatrix::zeros(p, p);
    let mut offset = 0;
    for (v, data) in per_vertex.iter().enumerate() {
        let k = data.dim();
        for (i, inc) in g.incidences(v)?.iter().enumerate() {
            for j in 0..k {
                basis[(inc.slot(), offset + j)] = data.basis[(i, j)];
            }
        }
        penalty
            .view_mut((offset, offset), (k, k))
            .copy_from(&data.penalty);
        offset += k;
    }
    Ok(FormBoundary { basis, penalty })
}
