//! Piecewise-linear finite elements for the quadratic forms, used as an
//! independent oracle for the secular solver.
//!
//! Every edge carries its own mesh. δ′ vertices leave endpoint values free
//! and add `(1/β)|Σ f_e(v)|²`; anti-Kirchhoff vertices restrict endpoint
//! values to `Σ f_e(v) = 0`; δ vertices identify endpoint values and add
//! `σ|f(v)|²`; Dirichlet vertices drop them.
//!
//! Eigenvalues are counted by the inertia of `K - ΛM`. Interior nodes of each
//! edge are condensed with a tridiagonal `LDLᵀ` sweep, so a count costs
//! `O(#nodes)` and the Schur complement on the endpoint values is a small
//! dense matrix.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::conditions::{form_boundary, FormBoundary, VertexConditionSet};
use crate::error::{Error, Result};
use crate::graph::MetricGraph;
use crate::potential::Potential;

/// A run of identical elements.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Run {
    count: usize,
    h: f64,
    q: f64,
}

#[derive(Debug, Clone)]
struct EdgeMesh {
    runs: Vec<Run>,
}

impl EdgeMesh {
    fn elements(&self) -> usize {
        self.runs.iter().map(|r| r.count).sum()
    }

    fn element_iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.runs
            .iter()
            .flat_map(|r| std::iter::repeat_n((r.h, r.q), r.count))
    }
}

/// Shifted element matrix `K_e + (q - Λ) M_e` as (diagonal, off-diagonal).
fn shifted_element(h: f64, q: f64, shift: f64) -> (f64, f64) {
    let s = q - shift;
    (1.0 / h + s * h / 3.0, -1.0 / h + s * h / 6.0)
}

/// Result of condensing the interior nodes of one edge at a shift.
struct Condensed {
    negatives: usize,
    /// 2x2 Schur complement on (start, end) values.
    schur: [[f64; 2]; 2],
}

const TINY_PIVOT: f64 = 1e-280;

/// `Σ sign_i exp(log_i)` without overflow, kept as `value · exp(log_ref)`.
#[derive(Default)]
struct ScaledSum {
    value: f64,
    log_ref: f64,
}

impl ScaledSum {
    fn add(&mut self, sign: f64, log: f64) {
        if self.value == 0.0 || log > self.log_ref + 300.0 {
            self.value *= (self.log_ref - log).exp();
            self.log_ref = log;
        }
        self.value += sign * (log - self.log_ref).exp();
    }

    fn get(&self) -> f64 {
        self.value * self.log_ref.exp()
    }
}

fn condense(mesh: &EdgeMesh, shift: f64) -> Condensed {
    let n = mesh.elements();
    let mut it = mesh.element_iter().map(|(h, q)| shifted_element(h, q, shift));
    let (a_first, b_first) = it.next().expect("edge has at least one element");
    if n == 1 {
        return Condensed {
            negatives: 0,
            schur: [[a_first, b_first], [b_first, a_first]],
        };
    }
    // Forward LDLᵀ over interior nodes 1..n-1. Node i gets a_i + a_{i+1};
    // the coupling between nodes i and i+1 is b_{i+1}. All three entries of
    // A⁻¹ we need come from this one factorization: with p = L⁻¹e₁,
    // (A⁻¹)₁₁ = Σ p_i²/d_i, (A⁻¹)₁ₘ = p_m/d_m and (A⁻¹)ₘₘ = 1/d_m. Near a
    // pole the huge part of the Schur complement is then exactly rank one,
    // so the inertia is that of a nearby matrix.
    let mut negatives = 0;
    let mut prev_a = a_first;
    let mut d_prev = 0.0_f64;
    let mut off_prev = 0.0_f64;
    // ln|p_i| and sign(p_i)
    let mut log_p = 0.0_f64;
    let mut sign_p = 1.0_f64;
    let mut first = true;
    let mut last_b = b_first;
    let mut inv_11 = ScaledSum::default();
    for (a, b) in it {
        let diag = prev_a + a;
        let mut d = if first {
            diag
        } else {
            let l = off_prev / d_prev;
            log_p += l.abs().ln();
            sign_p *= -l.signum();
            diag - off_prev * l
        };
        if d.abs() < TINY_PIVOT {
            d = -TINY_PIVOT;
        }
        if d < 0.0 {
            negatives += 1;
        }
        inv_11.add(d.signum(), 2.0 * log_p - d.abs().ln());
        d_prev = d;
        off_prev = b;
        first = false;
        prev_a = a;
        last_b = b;
    }
    let a_last = prev_a;
    let inv_mm = 1.0 / d_prev;
    let inv_1m = sign_p * (log_p - d_prev.abs().ln()).exp() * d_prev.signum();
    let inv_11 = inv_11.get();
    let (cs, ce) = (b_first, last_b);
    Condensed {
        negatives,
        schur: [
            [a_first - cs * cs * inv_11, -cs * ce * inv_1m],
            [-cs * ce * inv_1m, a_last - ce * ce * inv_mm],
        ],
    }
}

#[derive(Debug, Clone)]
pub struct FormDiscretization {
    edges: Vec<EdgeMesh>,
    boundary: FormBoundary,
    h: f64,
}

impl FormDiscretization {
    pub fn mesh_width(&self) -> f64 {
        self.h
    }

    /// Number of free degrees of freedom.
    pub fn dimension(&self) -> usize {
        self.edges
            .iter()
            .map(|m| m.elements() - 1)
            .sum::<usize>()
            + self.boundary.basis.ncols()
    }

    pub fn num_elements(&self) -> usize {
        self.edges.iter().map(EdgeMesh::elements).sum()
    }

    /// Negative inertia of `K - ΛM`, i.e. the number of discrete eigenvalues
    /// below `Λ`.
    pub fn count_below(&self, shift: f64) -> Result<usize> {
        let (n, ambiguous) = self.inertia(shift);
        if ambiguous {
            return Err(Error::SingularShift(shift));
        }
        Ok(n)
    }

    /// The count and whether some eigenvalue of the condensed matrix is too
    /// small to trust its sign.
    fn inertia(&self, shift: f64) -> (usize, bool) {
        let p = self.boundary.basis.ncols();
        let slots = self.boundary.basis.nrows();
        let mut s = DMatrix::zeros(slots, slots);
        let mut negatives = 0;
        for (e, mesh) in self.edges.iter().enumerate() {
            let c = condense(mesh, shift);
            negatives += c.negatives;
            for i in 0..2 {
                for j in 0..2 {
                    s[(2 * e + i, 2 * e + j)] = c.schur[i][j];
                }
            }
        }
        if p == 0 {
            return (negatives, false);
        }
        let t = &self.boundary.basis;
        let q = t.transpose() * s * t + &self.boundary.penalty;
        let scale = q.amax().max(1.0);
        let eig = SymmetricEigen::new(q).eigenvalues;
        let ambiguous = eig.iter().any(|x| x.abs() < 1e-14 * scale);
        (negatives + eig.iter().filter(|&&x| x < 0.0).count(), ambiguous)
    }

    /// Count at `shift`, moved slightly up if the sign is ambiguous there.
    /// Next to an edge pole the ambiguous band can be wide, so the steps grow
    /// and the last resort is the computed inertia itself.
    fn count_nudged(&self, shift: f64) -> usize {
        let mut x = shift;
        let mut step = 1e-13 * (1.0 + shift.abs());
        for _ in 0..24 {
            match self.inertia(x) {
                (n, false) => return n,
                _ => {
                    x = shift + step;
                    step *= 4.0;
                }
            }
        }
        self.inertia(shift).0
    }

    /// The `m` smallest generalized eigenvalues, by bisection on the
    /// inertia count.
    pub fn lowest_eigenvalues(&self, m: usize) -> Result<Vec<f64>> {
        if m > self.dimension() {
            return Err(Error::Precondition(format!(
                "requested {m} eigenvalues of a {}-dimensional discretization",
                self.dimension()
            )));
        }
        if m == 0 {
            return Ok(Vec::new());
        }
        let mut lo = -1.0;
        while self.count_nudged(lo) > 0 {
            lo = 2.0 * lo - 1.0;
        }
        let mut hi = 1.0;
        while self.count_nudged(hi) < m {
            hi *= 2.0;
        }
        let mut out = Vec::with_capacity(m);
        for j in 1..=m {
            let (mut a, mut b) = (lo, hi);
            while b - a > 1e-14 * (1.0 + a.abs().max(b.abs())) {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                if self.count_nudged(mid) >= j {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            let value = 0.5 * (a + b);
            out.push(value);
            lo = a;
        }
        Ok(out)
    }

    /// Dense `(K, M)` in the free coordinates: interior nodes edge by edge,
    /// then the boundary parameters. Intended for small meshes.
    pub fn dense_pencil(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let interior: Vec<usize> = self.edges.iter().map(|m| m.elements() - 1).collect();
        let n_int: usize = interior.iter().sum();
        let slots = self.boundary.basis.nrows();
        let full = n_int + slots;
        let mut k = DMatrix::zeros(full, full);
        let mut mm = DMatrix::zeros(full, full);
        let mut offset = 0;
        for (e, mesh) in self.edges.iter().enumerate() {
            let n = mesh.elements();
            let index = |node: usize| -> usize {
                if node == 0 {
                    n_int + 2 * e
                } else if node == n {
                    n_int + 2 * e + 1
                } else {
                    offset + node - 1
                }
            };
            for (j, (h, q)) in mesh.element_iter().enumerate() {
                let (i0, i1) = (index(j), index(j + 1));
                let kl = [[1.0 / h, -1.0 / h], [-1.0 / h, 1.0 / h]];
                let ml = [[h / 3.0, h / 6.0], [h / 6.0, h / 3.0]];
                for (a, ia) in [i0, i1].into_iter().enumerate() {
                    for (b, ib) in [i0, i1].into_iter().enumerate() {
                        k[(ia, ib)] += kl[a][b] + q * ml[a][b];
                        mm[(ia, ib)] += ml[a][b];
                    }
                }
            }
            offset += n - 1;
        }
        let p = self.boundary.basis.ncols();
        let mut proj = DMatrix::zeros(full, n_int + p);
        for i in 0..n_int {
            proj[(i, i)] = 1.0;
        }
        proj.view_mut((n_int, n_int), (slots, p))
            .copy_from(&self.boundary.basis);
        let mut kr = proj.transpose() * k * &proj;
        let mr = proj.transpose() * mm * &proj;
        let mut pen = kr.view_mut((n_int, n_int), (p, p));
        pen += &self.boundary.penalty;
        (kr, mr)
    }
}

/// Meshes every edge with elements of width at most `h`, aligned to the
/// potential's breakpoints.
pub fn discretize(
    g: &MetricGraph,
    conditions: &VertexConditionSet,
    q: &Potential,
    h: f64,
) -> Result<FormDiscretization> {
    q.check_graph(g)?;
    let limit = g.min_edge_length() / 4.0;
    if !(h > 0.0 && h <= limit) {
        return Err(Error::MeshTooCoarse { h, limit });
    }
    let boundary = form_boundary(g, conditions)?;
    let mut edges = Vec::with_capacity(g.num_edges());
    for e in g.edges() {
        let eq = q.edge(e.id)?;
        let runs = match eq.pieces(e.length) {
            Some(pieces) => pieces
                .iter()
                .map(|p| {
                    let len = p.end - p.start;
                    let count = (len / h).ceil().max(1.0) as usize;
                    Run {
                        count,
                        h: len / count as f64,
                        q: p.value,
                    }
                })
                .collect(),
            None => {
                let grid = eq.grid(e.length);
                let mut runs = Vec::new();
                for w in grid.windows(2) {
                    let len = w[1] - w[0];
                    let count = (len / h).ceil().max(1.0) as usize;
                    let he = len / count as f64;
                    for j in 0..count {
                        let mid = w[0] + (j as f64 + 0.5) * he;
                        runs.push(Run {
                            count: 1,
                            h: he,
                            q: eq.evaluate(e.length, mid),
                        });
                    }
                }
                runs
            }
        };
        let mesh = EdgeMesh { runs };
        if mesh.elements() < 2 {
            return Err(Error::MeshTooCoarse { h, limit });
        }
        edges.push(mesh);
    }
    Ok(FormDiscretization { edges, boundary, h })
}

/// Eigenvalues on meshes `h` and `h/2` with the order-2 Richardson estimate
/// `(4 λ(h/2) - λ(h)) / 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct Extrapolated {
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
    pub extrapolated: Vec<f64>,
}

pub fn extrapolated_eigenvalues(
    g: &MetricGraph,
    conditions: &VertexConditionSet,
    q: &Potential,
    h: f64,
    m: usize,
) -> Result<Extrapolated> {
    let (coarse, fine) = rayon::join(
        || discretize(g, conditions, q, h)?.lowest_eigenvalues(m),
        || discretize(g, conditions, q, 0.5 * h)?.lowest_eigenvalues(m),
    );
    let (coarse, fine) = (coarse?, fine?);
    let extrapolated = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    Ok(Extrapolated {
        coarse,
        fine,
        extrapolated,
    })
}

/// Discrete count below `shift` on meshes `h` and `h/2`.
pub fn mesh_pair_count(
    g: &MetricGraph,
    conditions: &VertexConditionSet,
    q: &Potential,
    h: f64,
    shift: f64,
) -> Result<(usize, usize)> {
    let (a, b) = rayon::join(
        || discretize(g, conditions, q, h).map(|d| d.count_nudged(shift)),
        || discretize(g, conditions, q, 0.5 * h).map(|d| d.count_nudged(shift)),
    );
    Ok((a?, b?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::VertexCondition;
    use crate::graph::BuiltinGraph;
    use std::f64::consts::PI;

    fn uniform(g: &MetricGraph, c: VertexCondition) -> VertexConditionSet {
        VertexConditionSet::uniform(g.num_vertices(), c).unwrap()
    }

    /// Generalized eigenvalues of a small dense pencil via Cholesky of M.
    fn dense_eigenvalues(k: &DMatrix<f64>, m: &DMatrix<f64>) -> Vec<f64> {
        let l = m.clone().cholesky().unwrap().l();
        let linv = l.clone().try_inverse().unwrap();
        let a = &linv * k * linv.transpose();
        let a = 0.5 * (&a + a.transpose());
        let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    #[test]
    fn dirichlet_interval_dimensions() {
        let g = BuiltinGraph::interval(1.0).unwrap();
        let d = discretize(&g, &uniform(&g, VertexCondition::Dirichlet), &Potential::zero(&g), 0.25).unwrap();
        assert_eq!(d.dimension(), 3);
        let (k, m) = d.dense_pencil();
        assert_eq!(k.shape(), (3, 3));
        assert_eq!(k[(0, 0)], 8.0);
        assert_eq!(k[(0, 1)], -4.0);
        assert_eq!(k[(0, 2)], 0.0);
        assert!((m[(0, 0)] - 2.0 / 12.0).abs() < 1e-15);
        assert!(discretize(&g, &uniform(&g, VertexCondition::Dirichlet), &Potential::zero(&g), 0.3).is_err());
    }

    #[test]
    fn star_dimensions() {
        let g = BuiltinGraph::star(3, 1.0).unwrap();
        let q = Potential::zero(&g);
        let h = 0.125;
        let interior = 3 * 7;
        let dp = discretize(&g, &uniform(&g, VertexCondition::DeltaPrime { beta: 1.0 }), &q, h).unwrap();
        assert_eq!(dp.dimension(), interior + 6);
        let ak = uniform(&g, VertexCondition::DeltaPrime { beta: 1.0 }).with(0, VertexCondition::anti_kirchhoff()).unwrap();
        let d0 = discretize(&g, &ak, &q, h).unwrap();
        assert_eq!(d0.dimension(), interior + 5);
        // the centre coupling is (1/β)|f1 + f2 + f3|² on the three centre values
        let (k, _) = dp.dense_pencil();
        let (kfree, _) = discretize(&g, &uniform(&g, VertexCondition::DeltaPrime { beta: 1e300 }), &q, h)
            .unwrap()
            .dense_pencil();
        let diff = k - kfree;
        let centre: Vec<usize> = vec![interior, interior + 1, interior + 2];
        for &i in &centre {
            for &j in &centre {
                assert!((diff[(i, j)] - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pencil_is_symmetric_and_mass_definite() {
        let g = BuiltinGraph::lasso(1.0, 0.7).unwrap();
        let c = VertexConditionSet::new(vec![VertexCondition::DeltaPrime { beta: 0.5 }, VertexCondition::Delta { sigma: 2.0 }]).unwrap();
        let q = Potential::constant(&g, 1.5).unwrap();
        let d = discretize(&g, &c, &q, 0.1).unwrap();
        let (k, m) = d.dense_pencil();
        assert!((&k - k.transpose()).amax() < 1e-12);
        assert!((&m - m.transpose()).amax() < 1e-15);
        assert!(m.clone().cholesky().is_some());
    }

    #[test]
    fn inertia_count_matches_dense_eigenvalues() {
        let g = BuiltinGraph::figure1([1.0, 0.8, 1.1, 0.9, 1.3, 0.7, 1.0]).unwrap();
        let q = Potential::uniform(
            &g,
            crate::potential::EdgePotential::PiecewiseConstant { breaks: vec![0.35], values: vec![-2.0, 3.0] },
        )
        .unwrap();
        let mixed = VertexConditionSet::new(vec![
            VertexCondition::DeltaPrime { beta: 1.0 },
            VertexCondition::anti_kirchhoff(),
            VertexCondition::Delta { sigma: -1.0 },
            VertexCondition::Dirichlet,
            VertexCondition::kirchhoff(),
            VertexCondition::DeltaPrime { beta: 0.3 },
            VertexCondition::Delta { sigma: 2.0 },
        ])
        .unwrap();
        let d = discretize(&g, &mixed, &q, 0.1).unwrap();
        let (k, m) = d.dense_pencil();
        let ev = dense_eigenvalues(&k, &m);
        for w in ev.windows(2).take(40) {
            let shift = 0.5 * (w[0] + w[1]);
            let expect = ev.iter().filter(|&&x| x < shift).count();
            assert_eq!(d.count_below(shift).unwrap(), expect);
        }
        let lowest = d.lowest_eigenvalues(10).unwrap();
        for (a, b) in lowest.iter().zip(&ev) {
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    // Equal edges with δ′ couplings have modes cos(nπx) on every edge, and
    // their discrete eigenvalues sit exactly on the interior poles.
    #[test]
    fn eigenvalues_on_edge_poles() {
        let g = BuiltinGraph::figure1([1.0; 7]).unwrap();
        let c = uniform(&g, VertexCondition::DeltaPrime { beta: 0.2 });
        let q = Potential::zero(&g);
        let d = discretize(&g, &c, &q, 1.0 / 32.0).unwrap();
        let (k, m) = d.dense_pencil();
        let ev = dense_eigenvalues(&k, &m);
        for (a, b) in d.lowest_eigenvalues(40).unwrap().iter().zip(&ev) {
            assert!((a - b).abs() < 1e-6 * (1.0 + b.abs()), "{a} vs {b}");
        }
        let target = 9.0 * PI * PI;
        let mut prev = f64::INFINITY;
        for n in [256.0, 512.0, 1024.0, 2048.0] {
            let d = discretize(&g, &c, &q, 1.0 / n).unwrap();
            let v = d.lowest_eigenvalues(22).unwrap()[21];
            assert!(v >= target && v < prev, "h = 1/{n}: {v}");
            prev = v;
            assert_eq!(d.count_below(target - 1e-4).unwrap(), 21);
        }
    }

    #[test]
    fn dirichlet_interval_extrapolates_to_exact() {
        let g = BuiltinGraph::interval(PI).unwrap();
        let c = uniform(&g, VertexCondition::Dirichlet);
        let ex = extrapolated_eigenvalues(&g, &c, &Potential::zero(&g), PI / 2000.0, 3).unwrap();
        assert!((ex.extrapolated[0] - 1.0).abs() < 1e-6);
        assert!((ex.extrapolated[2] - 9.0).abs() < 1e-6 * 9.0);
        let d = discretize(&g, &c, &Potential::zero(&g), PI / 512.0).unwrap();
        assert_eq!(d.count_below(20.5).unwrap(), 4);
        assert_eq!(d.count_below(0.5).unwrap(), 0);
        assert!(ex.fine.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn enlarging_the_form_domain_lowers_eigenvalues() {
        let g = BuiltinGraph::star(3, 1.0).unwrap();
        let q = Potential::zero(&g);
        let h = 1.0 / 64.0;
        let dp = discretize(&g, &uniform(&g, VertexCondition::DeltaPrime { beta: 1.0 }), &q, h).unwrap();
        let ak = discretize(&g, &uniform(&g, VertexCondition::anti_kirchhoff()), &q, h).unwrap();
        let a = dp.lowest_eigenvalues(20).unwrap();
        let b = ak.lowest_eigenvalues(20).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x <= y);
        }
    }

    #[test]
    fn second_order_mesh_convergence() {
        let g = BuiltinGraph::interval(1.0).unwrap();
        let c = uniform(&g, VertexCondition::DeltaPrime { beta: 1.0 });
        let q = Potential::zero(&g);
        let e1 = discretize(&g, &c, &q, 1.0 / 64.0).unwrap().lowest_eigenvalues(10).unwrap();
        let e2 = discretize(&g, &c, &q, 1.0 / 128.0).unwrap().lowest_eigenvalues(10).unwrap();
        let e3 = discretize(&g, &c, &q, 1.0 / 256.0).unwrap().lowest_eigenvalues(10).unwrap();
        for n in 1..10 {
            let ratio = (e1[n] - e2[n]) / (e2[n] - e3[n]);
            assert!((ratio - 4.0).abs() < 0.3, "n = {n}: ratio {ratio}");
        }
    }
}
