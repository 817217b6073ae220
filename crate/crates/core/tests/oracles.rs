//! Cross-checks against closed forms and against the finite-element oracle.

use std::f64::consts::PI;
use std::sync::Arc;

use qgraph_core::conditions::{VertexCondition, VertexConditionSet};
use qgraph_core::eigenfunction::{cluster_eigenfunctions, inner_product, spectrum_eigenfunctions};
use qgraph_core::fem::{discretize, extrapolated_eigenvalues};
use qgraph_core::graph::{BuiltinGraph, GraphPoint, MetricGraph};
use qgraph_core::potential::Potential;
use qgraph_core::secular::{SecularSystem, SpectrumRequest};
use qgraph_core::stats::{certified_below, certified_first, heat_kernel_vertex};

fn system(g: MetricGraph, c: VertexCondition) -> SecularSystem {
    let n = g.num_vertices();
    let g = Arc::new(g);
    SecularSystem::new(g.clone(), VertexConditionSet::uniform(n, c).unwrap(), Potential::zero(&g)).unwrap()
}

fn dirichlet_interval() -> SecularSystem {
    system(BuiltinGraph::interval(PI).unwrap(), VertexCondition::Dirichlet)
}

fn delta_prime_star(beta: f64) -> SecularSystem {
    system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::DeltaPrime { beta })
}

/// Roots of `(k² - 1) sin k - 2k cos k`, the Robin problem `f'(0) = f(0)`,
/// `-f'(1) = f(1)`, by scanning and bisection.
fn robin_roots(count: usize) -> Vec<f64> {
    let f = |k: f64| (k * k - 1.0) * k.sin() - 2.0 * k * k.cos();
    let mut roots = Vec::new();
    let mut a = 1e-6;
    while roots.len() < count {
        let b = a + 0.01;
        if f(a) * f(b) < 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if f(lo) * f(mid) <= 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let k = 0.5 * (lo + hi);
            roots.push(k * k);
        }
        a = b;
    }
    roots
}

#[test]
fn dirichlet_interval_secular_matrix() {
    let s = dirichlet_interval();
    assert!(s.singular_values(1.0).unwrap()[0] < 1e-12);
    assert!(s.singular_values(0.5).unwrap()[0] > 1e-2);
    let w = s.find_spectrum(SpectrumRequest::Window { lo: 0.5, hi: 20.5 }).unwrap();
    assert!(w.is_certified());
    let v = w.values();
    assert_eq!(v.len(), 4);
    for (n, x) in v.iter().enumerate() {
        let exact = ((n + 1) * (n + 1)) as f64;
        assert!((x - exact).abs() <= 1e-10 * exact);
    }
}

#[test]
fn dirichlet_interval_weyl_ratio() {
    let s = dirichlet_interval();
    let v = certified_first(&s, 200).unwrap().values();
    for (i, x) in v.iter().enumerate().take(200) {
        let n = (i + 1) as f64;
        assert!((x * (PI / (PI * n)).powi(2) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn robin_interval_against_scalar_oracle() {
    let s = system(BuiltinGraph::interval(1.0).unwrap(), VertexCondition::DeltaPrime { beta: 1.0 });
    let exact = robin_roots(5);
    let secular = certified_first(&s, 5).unwrap().values();
    for (a, b) in secular.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-10 * b, "{a} vs {b}");
    }
    let g = s.graph();
    let fem = extrapolated_eigenvalues(g, s.conditions(), s.potential(), 1.0 / 512.0, 5).unwrap();
    for (a, b) in fem.extrapolated.iter().zip(&exact) {
        assert!((a - b).abs() < 1e-5 * b, "{a} vs {b}");
    }
    assert!(fem.fine.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn anti_kirchhoff_star_secular_vanishes_at_fem_eigenvalue() {
    let s = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::anti_kirchhoff());
    let fem = extrapolated_eigenvalues(s.graph(), s.conditions(), s.potential(), 1.0 / 1024.0, 1).unwrap();
    let lambda = fem.extrapolated[0];
    assert!(s.singular_values(lambda).unwrap()[0] < 1e-8);
}

#[test]
fn fem_counts() {
    let s = dirichlet_interval();
    let d = discretize(s.graph(), s.conditions(), s.potential(), PI / 512.0).unwrap();
    assert_eq!(d.count_below(20.5).unwrap(), 4);
    assert_eq!(d.count_below(0.5).unwrap(), 0);
    let ex = extrapolated_eigenvalues(s.graph(), s.conditions(), s.potential(), PI / 2000.0, 1).unwrap();
    assert!((ex.extrapolated[0] - 1.0).abs() < 1e-6);

    let star = delta_prime_star(1.0);
    // the equilateral star has double eigenvalues, so cut between clusters
    let spec = certified_first(&star, 12).unwrap();
    let c = spec.clusters();
    let mut below = 0;
    let mut i = 0;
    while below + c[i].multiplicity <= 10 {
        below += c[i].multiplicity;
        i += 1;
    }
    let level = 0.5 * (c[i - 1].value + c[i].value);
    let d = discretize(star.graph(), star.conditions(), star.potential(), 1.0 / 256.0).unwrap();
    assert!(below >= 9);
    assert_eq!(d.count_below(level).unwrap(), below);

    // a larger form domain can only add eigenvalues below any level
    let anti = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::anti_kirchhoff());
    let da = discretize(anti.graph(), anti.conditions(), anti.potential(), 1.0 / 256.0).unwrap();
    for level in [1.0, 10.0, 50.0, 200.0, 800.0] {
        assert!(da.count_below(level).unwrap() <= d.count_below(level).unwrap());
    }
}

#[test]
fn four_cycle_kirchhoff_degeneracy() {
    let s = system(BuiltinGraph::cycle(&[1.0; 4]).unwrap(), VertexCondition::kirchhoff());
    let w = s.find_spectrum(SpectrumRequest::Window { lo: -1.0, hi: 50.0 }).unwrap();
    assert!(w.is_certified());
    let c = w.clusters();
    assert_eq!(c.len(), 5);
    assert!(c[0].value.abs() < 1e-10 && c[0].multiplicity == 1);
    for (n, cl) in c.iter().enumerate().skip(1) {
        let exact = (n as f64 * PI / 2.0).powi(2);
        assert!((cl.value - exact).abs() < 1e-10 * exact);
        assert_eq!(cl.multiplicity, 2);
    }
}

#[test]
fn kirchhoff_star_degenerate_vectors() {
    let s = system(BuiltinGraph::star(3, 1.0).unwrap(), VertexCondition::kirchhoff());
    let lambda = (PI / 2.0).powi(2);
    let spec = certified_first(&s, 3).unwrap();
    let c = spec.clusters().iter().find(|c| (c.value - lambda).abs() < 1e-9).unwrap();
    assert_eq!(c.multiplicity, 2);
    let fs = cluster_eigenfunctions(&s, c.value, 2).unwrap();
    let breaks = vec![Vec::new(); 3];
    assert!(inner_product(&fs[0], &fs[1], &breaks).unwrap().abs() < 1e-10);
    for f in &fs {
        assert!((f.norm_sq() - 1.0).abs() < 1e-10);
        assert!(f.evaluate(GraphPoint::new(0, 0.0)).unwrap().abs() < 1e-8);
    }
    let simple = spec.clusters()[0];
    assert_eq!(s.eigenvector_coefficients(simple.value, 1).unwrap().initial_states(0).len(), 3);
}

#[test]
fn dirichlet_ground_state_and_residual() {
    let s = dirichlet_interval();
    let spec = certified_first(&s, 5).unwrap();
    let fs: Vec<_> = spectrum_eigenfunctions(&s, &spec, 5).unwrap().concat();
    let mid = fs[0].evaluate(GraphPoint::new(0, PI / 2.0)).unwrap().abs();
    assert!((mid - (2.0 / PI).sqrt()).abs() < 1e-10);
    for f in &fs {
        assert!((f.sup_norm() - (2.0 / PI).sqrt()).abs() < 1e-6);
        for x in [0.3, 1.1, 2.5] {
            assert!(f.residual_at(GraphPoint::new(0, x), 0.0, 1e-4).unwrap().abs() < 1e-4);
        }
    }
}

#[test]
fn kirchhoff_constant_mode() {
    let g = BuiltinGraph::figure1([1.0, 0.5, 1.5, 0.8, 1.2, 0.9, 1.1]).unwrap();
    let l = g.total_length();
    let s = system(g, VertexCondition::kirchhoff());
    let spec = certified_first(&s, 1).unwrap();
    let f = &cluster_eigenfunctions(&s, spec.clusters()[0].value, 1).unwrap()[0];
    assert!((f.sup_norm() - 1.0 / l.sqrt()).abs() < 1e-10);
}

#[test]
fn eigenfunctions_are_orthonormal() {
    let g = Arc::new(BuiltinGraph::lasso(1.3, 0.7).unwrap());
    let q = Potential::new(
        &g,
        vec![
            qgraph_core::potential::EdgePotential::PiecewiseConstant { breaks: vec![0.4], values: vec![2.0, -1.0] },
            qgraph_core::potential::EdgePotential::Constant(0.5),
        ],
    )
    .unwrap();
    let s = SecularSystem::new(g.clone(), VertexConditionSet::delta_prime(&[0.7, 1.5]).unwrap(), q).unwrap();
    let spec = certified_first(&s, 20).unwrap();
    let fs: Vec<_> = spectrum_eigenfunctions(&s, &spec, 20).unwrap().concat();
    let breaks = vec![vec![0.4], Vec::new()];
    for i in 0..20 {
        for j in 0..=i {
            let ip = inner_product(&fs[i], &fs[j], &breaks).unwrap();
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((ip - expect).abs() < 1e-6, "<f{i}, f{j}> = {ip}");
        }
    }
}

#[test]
fn delta_prime_traces() {
    // the ground state of the equilateral star is the doubly degenerate
    // Neumann-centre mode
    let s = delta_prime_star(1.0);
    let spec = certified_first(&s, 3).unwrap();
    assert_eq!(spec.clusters()[0].multiplicity, 2);
    for c in &spec.clusters()[..2] {
        for f in cluster_eigenfunctions(&s, c.value, c.multiplicity).unwrap() {
            let (values, derivs) = f.vertex_trace(0).unwrap();
            let sum: f64 = values.iter().sum();
            for d in &derivs {
                assert!((d - derivs[0]).abs() < 1e-10);
            }
            assert!((sum - derivs[0]).abs() < 1e-10);
            assert!((f.vertex_sum_sq(0).unwrap() - derivs[0] * derivs[0]).abs() < 1e-10);
        }
    }

    let interval = system(BuiltinGraph::interval(1.0).unwrap(), VertexCondition::DeltaPrime { beta: 1.0 });
    let spec = certified_first(&interval, 1).unwrap();
    let f = &cluster_eigenfunctions(&interval, spec.clusters()[0].value, 1).unwrap()[0];
    let at0 = f.evaluate(GraphPoint::new(0, 0.0)).unwrap();
    assert!((f.vertex_sum_sq(0).unwrap() - at0 * at0).abs() < 1e-12);
}

#[test]
fn star_eigenfunctions_stay_bounded() {
    let s = delta_prime_star(1.0);
    let spec = certified_first(&s, 500).unwrap();
    let fs: Vec<_> = spectrum_eigenfunctions(&s, &spec, 500).unwrap().concat();
    let early = fs[..50].iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let all = fs[..500].iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    assert!(all < 10.0 * early, "{all} vs {early}");
}

#[test]
fn star_heat_value_matches_half_line_formula() {
    // Σ f_e is a Robin half-line mode with κ = d/β; the rest is Neumann.
    let (d, beta, t) = (3.0, 1.0, 1e-3);
    let kappa = d / beta;
    let exact = 2.0 * d - d * kappa * (4.0 * PI * t).sqrt() * (kappa * kappa * t).exp() * libm::erfc(kappa * t.sqrt());
    let s = delta_prime_star(beta);
    let truncation = 40.0 / t;
    let spec = certified_below(&s, truncation * 1.01).unwrap();
    let r = heat_kernel_vertex(&s, &spec, 0, t, truncation).unwrap();
    assert!((r.scaled - exact).abs() < 1e-6, "{} vs {exact}", r.scaled);
    assert_eq!(r.predicted, 6.0);
}
