//! The secular system and the eigenvalue search.
//!
//! An eigenfunction is determined by the initial states `(u_e(0), u_e'(0))`
//! on every edge. The vertex conditions are `2|E|` linear equations in these
//! unknowns; the operator has eigenvalue `λ` exactly when the assembled
//! matrix is singular. To keep entries of comparable size the derivative
//! unknowns are scaled by `κ = √max(|λ|, 1)` and every row is divided by its
//! largest entry. Both scalings are positive and continuous in `λ`, so the
//! determinant keeps its sign structure.
//!
//! Besides the determinant the solver uses an exact eigenvalue count: below
//! `λ` there are `Σ_e N_D,e(λ) + n₋(Q(λ))` eigenvalues, where `N_D,e` counts
//! Dirichlet eigenvalues of edge `e` (Sturm oscillation) and `Q` is the
//! boundary form `-Tᵀ Λ(λ) T + V` built from the edge Dirichlet-to-Neumann
//! maps `Λ`. This resolves clusters that never produce a sign change.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, SymmetricEigen, Vector2};
use rayon::prelude::*;

use crate::conditions::{
    check_self_adjoint, form_boundary, to_ab_pairs, AbPair, FormBoundary, VertexCondition,
    VertexConditionSet,
};
use crate::error::{Error, Result};
use crate::fem;
use crate::graph::{EdgeEnd, Incidence, MetricGraph};
use crate::potential::Potential;
use crate::propagator::FundamentalData;

/// Singular values below this mark a root of the scaled secular matrix.
pub const ROOT_TOLERANCE: f64 = 1e-8;

/// Count-bisection stops at this relative width and reports a cluster.
const CLUSTER_WIDTH: f64 = 1e-12;

/// Fractions of a bracket tried when a probe is numerically singular.
const PROBE_FRACTIONS: [f64; 7] = [0.5, 0.4629, 0.5371, 0.3863, 0.6137, 0.2689, 0.7311];

fn kappa(lambda: f64) -> f64 {
    lambda.abs().max(1.0).sqrt()
}

/// Determinant proxy and smallest singular value of the scaled matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecularValues {
    pub determinant: f64,
    pub sigma_min: f64,
}

#[derive(Debug, Clone)]
pub struct SecularSystem {
    graph: Arc<MetricGraph>,
    conditions: VertexConditionSet,
    potential: Potential,
    ab: Vec<AbPair>,
    boundary: FormBoundary,
}

impl SecularSystem {
    pub fn new(
        graph: Arc<MetricGraph>,
        conditions: VertexConditionSet,
        potential: Potential,
    ) -> Result<Self> {
        conditions.check_covers(&graph)?;
        potential.check_graph(&graph)?;
        let ab = to_ab_pairs(&graph, &conditions)?;
        for (v, p) in ab.iter().enumerate() {
            if !check_self_adjoint(p)? {
                return Err(Error::NotSelfAdjoint(v));
            }
        }
        let boundary = form_boundary(&graph, &conditions)?;
        Ok(Self {
            graph,
            conditions,
            potential,
            ab,
            boundary,
        })
    }

    pub fn graph(&self) -> &Arc<MetricGraph> {
        &self.graph
    }

    pub fn conditions(&self) -> &VertexConditionSet {
        &self.conditions
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn ab_pairs(&self) -> &[AbPair] {
        &self.ab
    }

    pub fn with_potential(&self, potential: Potential) -> Result<Self> {
        Self::new(self.graph.clone(), self.conditions.clone(), potential)
    }

    pub fn with_conditions(&self, conditions: VertexConditionSet) -> Result<Self> {
        Self::new(self.graph.clone(), conditions, self.potential.clone())
    }

    /// Edge propagators at `λ`, indexed by edge id.
    pub fn fundamental_data(&self, lambda: f64) -> Result<Vec<FundamentalData>> {
        (0..self.graph.num_edges())
            .map(|e| FundamentalData::new(&self.graph, &self.potential, e, lambda))
            .collect()
    }

    /// Rows of `(F, ∂F)` at an endpoint in terms of the scaled unknowns
    /// `(u(0), u'(0)/κ)` of its edge.
    fn trace_rows(inc: &Incidence, m: &Matrix2<f64>, kappa: f64) -> ([f64; 2], [f64; 2]) {
        match inc.end {
            EdgeEnd::Start => ([1.0, 0.0], [0.0, kappa]),
            EdgeEnd::End => (
                [m[(0, 0)], m[(0, 1)] * kappa],
                [-m[(1, 0)], -m[(1, 1)] * kappa],
            ),
        }
    }

    /// The row-equilibrated secular matrix at `λ`.
    pub fn matrix(&self, lambda: f64) -> Result<DMatrix<f64>> {
        let props: Vec<Matrix2<f64>> = self
            .fundamental_data(lambda)?
            .iter()
            .map(|d| *d.at_end())
            .collect();
        Ok(self.assemble(lambda, &props))
    }

    fn assemble(&self, lambda: f64, props: &[Matrix2<f64>]) -> DMatrix<f64> {
        let k = kappa(lambda);
        let n = 2 * self.graph.num_edges();
        let mut m = DMatrix::zeros(n, n);
        let mut row = 0;
        let mut size = vec![0.0; n];
        for (v, ab) in self.ab.iter().enumerate() {
            let incs = self.graph.incidences(v).expect("vertex exists");
            for r in 0..ab.degree() {
                size.fill(0.0);
                for (i, inc) in incs.iter().enumerate() {
                    let (f, df) = Self::trace_rows(inc, &props[inc.edge], k);
                    let (a, b) = (ab.a[(r, i)], ab.b[(r, i)]);
                    for j in 0..2 {
                        m[(row, 2 * inc.edge + j)] += a * f[j] + b * df[j];
                        size[2 * inc.edge + j] += (a * f[j]).abs() + (b * df[j]).abs();
                    }
                }
                // scale by the terms before cancellation; a loop edge can make
                // a whole row vanish, and that must stay visible
                let scale = size.iter().copied().fold(0.0, f64::max);
                if scale > 0.0 {
                    m.row_mut(row).scale_mut(1.0 / scale);
                }
                row += 1;
            }
        }
        m
    }

    fn determinant(&self, lambda: f64) -> Result<f64> {
        Ok(self.matrix(lambda)?.lu().determinant())
    }

    fn sorted_singular_values(m: DMatrix<f64>) -> Vec<f64> {
        let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
        s.sort_by(f64::total_cmp);
        s
    }

    pub fn secular_values(&self, lambda: f64) -> Result<SecularValues> {
        let m = self.matrix(lambda)?;
        let determinant = m.clone().lu().determinant();
        let sigma_min = Self::sorted_singular_values(m)[0];
        Ok(SecularValues {
            determinant,
            sigma_min,
        })
    }

    /// Singular values of the secular matrix at `λ`, ascending.
    pub fn singular_values(&self, lambda: f64) -> Result<Vec<f64>> {
        Ok(Self::sorted_singular_values(self.matrix(lambda)?))
    }

    /// Number of eigenvalues strictly below `λ`, with multiplicity.
    ///
    /// Fails with [`Error::SingularShift`] when `λ` is numerically too close
    /// to an eigenvalue or to a Dirichlet eigenvalue of an edge.
    pub fn eigenvalue_count(&self, lambda: f64) -> Result<usize> {
        let k = kappa(lambda);
        let slots = 2 * self.graph.num_edges();
        let mut dtn = DMatrix::zeros(slots, slots);
        let mut dirichlet = 0;
        for e in 0..self.graph.num_edges() {
            let d = FundamentalData::new(&self.graph, &self.potential, e, lambda)?;
            dirichlet += d.dirichlet_count();
            let m = d.at_end();
            let m12 = m[(0, 1)];
            if (m12 * k).abs() < 1e-11 * m[(0, 0)].abs().max(1.0) {
                return Err(Error::SingularShift(lambda));
            }
            dtn[(2 * e, 2 * e)] = -m[(0, 0)] / m12;
            dtn[(2 * e, 2 * e + 1)] = 1.0 / m12;
            dtn[(2 * e + 1, 2 * e)] = 1.0 / m12;
            dtn[(2 * e + 1, 2 * e + 1)] = -m[(1, 1)] / m12;
        }
        let t = &self.boundary.basis;
        if t.ncols() == 0 {
            return Ok(dirichlet);
        }
        let q = &self.boundary.penalty - t.transpose() * dtn * t;
        let scale = q.amax().max(1.0);
        let eig = SymmetricEigen::new(q).eigenvalues;
        if eig.iter().any(|x| x.abs() < 1e-12 * scale) {
            return Err(Error::SingularShift(lambda));
        }
        Ok(dirichlet + eig.iter().filter(|&&x| x < 0.0).count())
    }

    /// Count at some point of `(a, b)`, preferring the midpoint.
    fn probe(&self, a: f64, b: f64) -> Result<Option<(f64, usize)>> {
        for f in PROBE_FRACTIONS {
            let x = a + f * (b - a);
            if x <= a || x >= b {
                continue;
            }
            match self.eigenvalue_count(x) {
                Ok(n) => return Ok(Some((x, n))),
                Err(Error::SingularShift(_)) => continue,
                Err(e) => return Err(e),
            }
        }
        Ok(None)
    }

    /// Count at `x`, nudging it within `±spread` if it is singular.
    fn count_near(&self, x: f64, spread: f64) -> Result<(f64, usize)> {
        match self.eigenvalue_count(x) {
            Ok(n) => return Ok((x, n)),
            Err(Error::SingularShift(_)) => {}
            Err(e) => return Err(e),
        }
        match self.probe(x - spread, x + spread)? {
            Some(r) => Ok(r),
            None => Err(Error::Counting(format!("no regular point near {x}"))),
        }
    }

    /// Crude lower bound with no eigenvalue below it.
    pub fn spectral_floor(&self) -> Result<f64> {
        let mut sigma_sq: f64 = 0.0;
        let mut ratio_sq: f64 = 0.0;
        for v in 0..self.graph.num_vertices() {
            match self.conditions.get(v)? {
                VertexCondition::Delta { sigma } => sigma_sq = sigma_sq.max(sigma * sigma),
                VertexCondition::DeltaPrime { beta } if beta != 0.0 => {
                    let d = self.graph.degree(v)? as f64;
                    ratio_sq = ratio_sq.max((d / beta).powi(2));
                }
                _ => {}
            }
        }
        let mut floor = -(self.potential.sup_norm() + sigma_sq + ratio_sq) - 1.0;
        for _ in 0..60 {
            let (x, n) = self.count_near(floor, 1e-6 * (1.0 + floor.abs()))?;
            if n == 0 {
                return Ok(x.min(floor));
            }
            floor = 2.0 * floor - 1.0;
        }
        Err(Error::Counting("no eigenvalue-free floor found".into()))
    }

    /// Clusters of eigenvalues in `(a, b)` given the counts at both ends.
    fn isolate(&self, a: f64, na: usize, b: f64, nb: usize) -> Result<Vec<Cluster>> {
        if nb <= na {
            return Ok(Vec::new());
        }
        let m = nb - na;
        if m == 1 {
            if let Some(root) = self.sign_bisect(a, b)? {
                return Ok(vec![self.cluster_at(root, 1)?]);
            }
        }
        if b - a <= CLUSTER_WIDTH * (1.0 + a.abs().max(b.abs())) {
            return Ok(vec![self.finish_cluster(a, b, m)?]);
        }
        match self.probe(a, b)? {
            None => Ok(vec![self.finish_cluster(a, b, m)?]),
            Some((c, nc)) => {
                if nc < na || nc > nb {
                    return Err(Error::Counting(format!(
                        "count {nc} at {c} outside [{na}, {nb}]"
                    )));
                }
                let mut left = self.isolate(a, na, c, nc)?;
                left.extend(self.isolate(c, nc, b, nb)?);
                Ok(left)
            }
        }
    }

    /// Bisection on the determinant sign; `None` without a sign change.
    fn sign_bisect(&self, a: f64, b: f64) -> Result<Option<f64>> {
        let (mut a, mut b) = (a, b);
        let mut da = self.determinant(a)?;
        let db = self.determinant(b)?;
        if da == 0.0 {
            return Ok(Some(a));
        }
        if db == 0.0 {
            return Ok(Some(b));
        }
        if da.signum() == db.signum() {
            return Ok(None);
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let dm = self.determinant(mid)?;
            if dm == 0.0 {
                return Ok(Some(mid));
            }
            if dm.signum() == da.signum() {
                a = mid;
                da = dm;
            } else {
                b = mid;
            }
        }
        Ok(Some(0.5 * (a + b)))
    }

    /// Locates an `m`-fold cluster inside `[a, b]` by minimizing the `m`-th
    /// smallest singular value.
    fn finish_cluster(&self, a: f64, b: f64, m: usize) -> Result<Cluster> {
        let sigma = |x: f64| -> Result<f64> { Ok(self.singular_values(x)?[m - 1]) };
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (a, b);
        let mut c = b - ratio * (b - a);
        let mut d = a + ratio * (b - a);
        let (mut fc, mut fd) = (sigma(c)?, sigma(d)?);
        for _ in 0..200 {
            if b - a <= 4.0 * f64::EPSILON * (1.0 + a.abs().max(b.abs())) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - ratio * (b - a);
                fc = sigma(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + ratio * (b - a);
                fd = sigma(d)?;
            }
        }
        self.cluster_at(0.5 * (a + b), m)
    }

    fn cluster_at(&self, value: f64, multiplicity: usize) -> Result<Cluster> {
        let s = self.singular_values(value)?;
        Ok(Cluster {
            value,
            multiplicity,
            sigma: s[multiplicity - 1],
            next_sigma: s.get(multiplicity).copied().unwrap_or(f64::INFINITY),
        })
    }

    /// Grid in signed `k = sign(λ)√|λ|` with step `0.25π/L`, from `lo` to `hi`.
    fn grid(&self, lo: f64, hi: f64) -> Vec<f64> {
        let to_k = |x: f64| x.signum() * x.abs().sqrt();
        let (k0, k1) = (to_k(lo), to_k(hi));
        let step = 0.25 * std::f64::consts::PI / self.graph.total_length();
        let cells = ((k1 - k0) / step).ceil().max(1.0) as usize;
        let dk = (k1 - k0) / cells as f64;
        (0..=cells)
            .map(|i| {
                if i == cells {
                    return hi;
                }
                let k = k0 + i as f64 * dk;
                if i == 0 {
                    lo
                } else {
                    k * k.abs()
                }
            })
            .collect()
    }

    /// Counts on a grid, nudging singular grid points slightly.
    fn grid_counts(&self, grid: &[f64], keep_ends: bool) -> Result<Vec<(f64, usize)>> {
        let last = grid.len() - 1;
        grid.par_iter()
            .enumerate()
            .map(|(i, &x)| {
                let spread = if i == 0 {
                    grid[1] - x
                } else if i == last {
                    x - grid[last - 1]
                } else {
                    (grid[i + 1] - x).min(x - grid[i - 1])
                };
                let (y, n) = self.count_near(x, 1e-3 * spread)?;
                if keep_ends && (i == 0 || i == last) && y != x {
                    // window ends must stay put; an eigenvalue sits on them
                    return Err(Error::SingularShift(x));
                }
                Ok((y, n))
            })
            .collect()
    }

    fn isolate_cells(&self, counts: &[(f64, usize)]) -> Result<Vec<Cluster>> {
        for w in counts.windows(2) {
            if w[1].1 < w[0].1 {
                return Err(Error::Counting(format!(
                    "count decreases between {} and {}",
                    w[0].0, w[1].0
                )));
            }
        }
        let parts: Vec<Vec<Cluster>> = counts
            .par_windows(2)
            .map(|w| self.isolate(w[0].0, w[0].1, w[1].0, w[1].1))
            .collect::<Result<_>>()?;
        Ok(parts.into_iter().flatten().collect())
    }

    /// All eigenvalues in the half-open window `[lo, hi)`, or the first `n`.
    pub fn find_spectrum(&self, request: SpectrumRequest) -> Result<Spectrum> {
        self.find_spectrum_with(request, &SolverOptions::default())
    }

    pub fn find_spectrum_with(
        &self,
        request: SpectrumRequest,
        options: &SolverOptions,
    ) -> Result<Spectrum> {
        let floor = self.spectral_floor()?;
        let (lo, below, mut clusters, mut top_count, mut scanned_to) = match request {
            SpectrumRequest::Window { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(Error::Precondition(format!("bad window [{lo}, {hi})")));
                }
                let lo_eff = lo.max(floor);
                if lo_eff >= hi {
                    let n = self.eigenvalue_count(hi).unwrap_or(0);
                    (lo, n, Vec::new(), n, hi)
                } else {
                    let counts = self.grid_counts(&self.grid(lo_eff, hi), true)?;
                    let below = counts[0].1;
                    let top = counts.last().unwrap().1;
                    (lo, below, self.isolate_cells(&counts)?, top, hi)
                }
            }
            SpectrumRequest::FirstN(n) => {
                if n == 0 {
                    return Err(Error::Precondition("first-N request with N = 0".into()));
                }
                let l = self.graph.total_length();
                let k_est = std::f64::consts::PI
                    * (n + self.graph.num_vertices() + 2) as f64
                    / l;
                let mut hi = (k_est * k_est).max(floor + 1.0);
                let mut counts = self.grid_counts(&self.grid(floor, hi), false)?;
                while counts.last().unwrap().1 < n {
                    hi = 2.0 * hi.max(1.0);
                    counts = self.grid_counts(&self.grid(floor, hi), false)?;
                }
                let top = counts.last().unwrap().1;
                let hi_used = counts.last().unwrap().0;
                (floor, 0, self.isolate_cells(&counts)?, top, hi_used)
            }
        };
        if clusters.iter().map(|c| c.multiplicity).sum::<usize>() != top_count - below {
            return Err(Error::Counting("cluster multiplicities disagree with counts".into()));
        }
        // Extend beyond the scanned range until some gap admits a certificate.
        let mut extra_tries = 0;
        let certificate = loop {
            let (above, b, nb) = self.next_clusters_above(scanned_to, top_count)?;
            let cert = self.certify(below, &clusters, lo, scanned_to, above[0].value, options)?;
            if cert.oracle_counts.is_some() || !options.certify || extra_tries >= 4 {
                break cert;
            }
            // The gap is too narrow for an affordable mesh: take the next cell.
            extra_tries += 1;
            clusters.extend(above);
            top_count = nb;
            scanned_to = b;
        };
        if let SpectrumRequest::FirstN(n) = request {
            if top_count < n {
                return Err(Error::Counting(format!("found {top_count} < {n} eigenvalues")));
            }
        }
        Ok(Spectrum {
            clusters,
            first_index: below + 1,
            window: (lo, scanned_to),
            certificate,
        })
    }

    /// Clusters in the first grid cell above `x` that contains any, given
    /// the count `n_x` below `x`, with the cell's upper end and its count.
    fn next_clusters_above(&self, x: f64, n_x: usize) -> Result<(Vec<Cluster>, f64, usize)> {
        let step = 0.25 * std::f64::consts::PI / self.graph.total_length();
        let to_k = |y: f64| y.signum() * y.abs().sqrt();
        let mut a = x;
        let mut na = n_x;
        for _ in 0..100_000 {
            let kb = to_k(a) + step;
            let b = kb * kb.abs();
            let (b, nb) = self.count_near(b, 1e-3 * (b - a))?;
            if nb > na {
                return Ok((self.isolate(a, na, b, nb)?, b, nb));
            }
            a = b;
            na = nb;
        }
        Err(Error::Counting("no eigenvalue above the window".into()))
    }

    fn certify(
        &self,
        below: usize,
        clusters: &[Cluster],
        lo: f64,
        hi: f64,
        next: f64,
        options: &SolverOptions,
    ) -> Result<Certificate> {
        let found: usize = clusters.iter().map(|c| c.multiplicity).sum();
        let secular_count = below + found;
        let last = clusters.last().map(|c| c.value);
        // the level must not fall short of the scanned range
        let top = match last {
            Some(v) if next > hi => (0.5 * (v + next)).max(0.5 * (hi + next)),
            Some(v) => 0.5 * (v + next),
            None => 0.5 * (hi.max(lo) + next),
        };
        let max_root_sigma = clusters.iter().map(|c| c.sigma).fold(0.0, f64::max);
        let rank_mismatches = clusters
            .iter()
            .filter(|c| c.next_sigma <= options.root_tolerance)
            .count();
        let l = self.graph.total_length();
        let weyl_estimate = (l * top.max(0.0).sqrt() / std::f64::consts::PI).ceil() as usize;
        let weyl_band = self.graph.num_vertices() + 2;
        let weyl_ok = secular_count.abs_diff(weyl_estimate) <= weyl_band;
        let mut cert = Certificate {
            top,
            secular_count,
            oracle_counts: None,
            oracle_mesh: f64::NAN,
            weyl_estimate,
            weyl_band,
            max_root_sigma,
            rank_mismatches,
            passed: false,
            note: String::new(),
        };
        if !options.certify {
            cert.note = "oracle skipped".into();
            cert.passed = false;
            return Ok(cert);
        }
        // P1 eigenvalues overshoot by about λ (kh)²/12; keep that below a
        // quarter of the gap under the certificate level.
        let lower = last.unwrap_or(lo.min(top - 1.0));
        let gap = (top - lower).max(f64::MIN_POSITIVE);
        let s = lower.abs() + self.potential.sup_norm() + 1.0;
        let mut h = (3.0 * gap).sqrt() / s;
        let min_len = self.graph.min_edge_length();
        h = h.min(min_len / options.mesh_divisions as f64);
        let elements = l / h;
        if elements > options.max_oracle_elements as f64 {
            cert.note = format!("gap at {top} needs {elements:.3e} elements");
            return Ok(cert);
        }
        let counts = fem::mesh_pair_count(&self.graph, &self.conditions, &self.potential, h, top)?;
        cert.oracle_counts = Some(counts);
        cert.oracle_mesh = h;
        let oracle_ok = counts.0 == secular_count && counts.1 == secular_count;
        let roots_ok = max_root_sigma <= options.root_tolerance && rank_mismatches == 0;
        cert.passed = oracle_ok && weyl_ok && roots_ok;
        if !oracle_ok {
            cert.note = format!(
                "oracle counts {:?} differ from secular count {secular_count}",
                counts
            );
        } else if !weyl_ok {
            cert.note = format!("Weyl estimate {weyl_estimate} outside band {weyl_band}");
        } else if !roots_ok {
            cert.note = format!(
                "root residual {max_root_sigma:.3e}, {rank_mismatches} rank mismatches"
            );
        }
        Ok(cert)
    }

    /// Orthonormal basis of the near-null space of the scaled matrix at a
    /// certified eigenvalue of multiplicity `m`.
    pub fn eigenvector_coefficients(&self, lambda: f64, m: usize) -> Result<CoefficientBasis> {
        self.eigenvector_coefficients_tol(lambda, m, ROOT_TOLERANCE)
    }

    pub fn eigenvector_coefficients_tol(
        &self,
        lambda: f64,
        m: usize,
        tolerance: f64,
    ) -> Result<CoefficientBasis> {
        let mat = self.matrix(lambda)?;
        let n = mat.ncols();
        let svd = mat.svd(false, true);
        let v_t = svd.v_t.expect("requested right singular vectors");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let found = order
            .iter()
            .filter(|&&i| svd.singular_values[i] <= tolerance)
            .count();
        if found != m {
            return Err(Error::RankMismatch {
                lambda,
                expected: m,
                found,
            });
        }
        let vectors = order[..m]
            .iter()
            .map(|&i| v_t.row(i).transpose())
            .collect();
        Ok(CoefficientBasis {
            lambda,
            kappa: kappa(lambda),
            vectors,
        })
    }
}

/// Null vectors in the scaled unknowns `(u_e(0), u_e'(0)/κ)`.
#[derive(Debug, Clone)]
pub struct CoefficientBasis {
    pub lambda: f64,
    pub kappa: f64,
    pub vectors: Vec<DVector<f64>>,
}

impl CoefficientBasis {
    /// Unscaled initial states `(u_e(0), u_e'(0))` of vector `i`.
    pub fn initial_states(&self, i: usize) -> Vec<Vector2<f64>> {
        let v = &self.vectors[i];
        (0..v.len() / 2)
            .map(|e| Vector2::new(v[2 * e], self.kappa * v[2 * e + 1]))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumRequest {
    /// Eigenvalues in `[lo, hi)`.
    Window { lo: f64, hi: f64 },
    /// The lowest `n` eigenvalues, with a trailing cluster kept whole.
    FirstN(usize),
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub certify: bool,
    pub root_tolerance: f64,
    /// Certificate meshes are at least this fine relative to the shortest edge.
    pub mesh_divisions: usize,
    pub max_oracle_elements: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            certify: true,
            root_tolerance: ROOT_TOLERANCE,
            mesh_divisions: 512,
            max_oracle_elements: 20_000_000,
        }
    }
}

/// An eigenvalue with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
    /// `m`-th smallest singular value at `value`.
    pub sigma: f64,
    /// `(m+1)`-th smallest singular value at `value`.
    pub next_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    /// Level below which all eigenvalues are claimed.
    pub top: f64,
    pub secular_count: usize,
    /// Oracle counts below `top` on meshes `h` and `h/2`.
    pub oracle_counts: Option<(usize, usize)>,
    pub oracle_mesh: f64,
    pub weyl_estimate: usize,
    pub weyl_band: usize,
    pub max_root_sigma: f64,
    pub rank_mismatches: usize,
    pub passed: bool,
    pub note: String,
}

impl std::fmt::Display for Certificate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let oracle = match self.oracle_counts {
            Some((a, b)) => format!("{a}/{b} (h = {:.3e})", self.oracle_mesh),
            None => "none".into(),
        };
        write!(
            f,
            "{} below {:.6e}: secular {}, oracle {}, Weyl {} ± {}, max root sigma {:.2e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.top,
            self.secular_count,
            oracle,
            self.weyl_estimate,
            self.weyl_band,
            self.max_root_sigma
        )?;
        if !self.note.is_empty() {
            write!(f, " ({})", self.note)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    clusters: Vec<Cluster>,
    first_index: usize,
    window: (f64, f64),
    certificate: Certificate,
}

impl Spectrum {
    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    /// Eigenvalues with multiplicity, ascending.
    pub fn values(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    /// 1-based index of the first listed eigenvalue.
    pub fn first_index(&self) -> usize {
        self.first_index
    }

    pub fn window(&self) -> (f64, f64) {
        self.window
    }

    pub fn certificate(&self) -> &Certificate {
        &self.certificate
    }

    pub fn is_certified(&self) -> bool {
        self.certificate.passed
    }

    pub fn require_certified(&self) -> Result<()> {
        if self.certificate.passed {
            Ok(())
        } else {
            Err(Error::Certificate(self.certificate.to_string()))
        }
    }

    /// Fails unless the spectrum starts at index 1 and holds `n` values.
    pub fn require_prefix(&self, n: usize) -> Result<()> {
        self.require_certified()?;
        if self.first_index != 1 || self.len() < n {
            return Err(Error::Precondition(format!(
                "spectrum holds indices {}..{} but {n} are needed",
                self.first_index,
                self.first_index + self.len()
            )));
        }
        Ok(())
    }
}
