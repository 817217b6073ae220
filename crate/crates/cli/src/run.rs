//! Executes a scenario and writes its CSV tables and report.

use std::io;
use std::path::{Path, PathBuf};

use qgraph_core::eigenfunction::spectrum_eigenfunctions;
use qgraph_core::graph::GraphPoint;
use qgraph_core::potential::Potential;
use qgraph_core::secular::{SecularSystem, Spectrum, SpectrumRequest};
use qgraph_core::stats::{
    bracketing_check, certified_below, certified_first, corollary_bipartite,
    divergence_experiment, hadamard_identity_check, heat_kernel_diag, heat_kernel_vertex,
    isospectrality_check, local_weyl, local_weyl_dummy, mean_difference, theorem1_rhs,
    IsospectralPair, WeylTarget,
};
use qgraph_core::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scenario::{Bracketing, Experiment, ParseError, Scenario};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub plot_scripts: bool,
    /// Number of eigenfunctions of operator A to sample into a CSV.
    pub eigenfunctions: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed,
    CertificateFailed,
    VerdictFailed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Passed => 0,
            Status::CertificateFailed => 3,
            Status::VerdictFailed => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Scenario(#[from] ParseError),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("numerical failure: {0}")]
    Numerical(Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) => 2,
            _ => 1,
        }
    }
}

/// 17 significant digits, so values survive a round trip.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

struct Output {
    dir: PathBuf,
    plot_scripts: bool,
    report: String,
    certificates_ok: bool,
    verdicts_ok: bool,
}

impl Output {
    fn line(&mut self, s: impl AsRef<str>) {
        self.report.push_str(s.as_ref());
        self.report.push('\n');
    }

    fn certificate(&mut self, label: &str, spectrum: &Spectrum) {
        let c = spectrum.certificate();
        self.certificates_ok &= c.passed;
        self.line(format!("certificate {label}: {c}"));
    }

    fn verdict(&mut self, label: &str, ok: bool, detail: impl AsRef<str>) {
        self.verdicts_ok &= ok;
        let detail = detail.as_ref();
        let detail = if ok { detail.to_owned() } else { detail.replacen(" <= ", " > ", 1) };
        self.line(format!("verdict {label}: {} ({detail})", if ok { "PASS" } else { "FAIL" }));
    }

    fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut text = header.join(",");
        text.push('\n');
        for r in rows {
            text.push_str(&r.join(","));
            text.push('\n');
        }
        std::fs::write(self.dir.join(format!("{name}.csv")), text)?;
        if self.plot_scripts {
            self.plot_script(name, header)?;
        }
        Ok(())
    }

    /// Gnuplot script drawing every column against the first.
    fn plot_script(&self, name: &str, header: &[&str]) -> io::Result<()> {
        let style = if name.starts_with("spectrum") { "points" } else { "lines" };
        let curves: Vec<String> = (2..=header.len())
            .map(|c| format!("'{name}.csv' using 1:{c} with {style}"))
            .collect();
        let script = format!(
            "set datafile separator ','\nset key autotitle columnhead\nset xlabel '{}'\n\
             set terminal pngcairo size 900,600\nset output '{name}.png'\nplot {}\n",
            header[0],
            curves.join(", \\\n     ")
        );
        std::fs::write(self.dir.join(format!("{name}.gp")), script)
    }

    fn spectrum_csv(&mut self, label: &str, spectrum: &Spectrum, limit: Option<usize>) -> io::Result<()> {
        let mut rows = Vec::new();
        let mut index = spectrum.first_index();
        'outer: for c in spectrum.clusters() {
            for _ in 0..c.multiplicity {
                if limit.is_some_and(|n| index >= spectrum.first_index() + n) {
                    break 'outer;
                }
                rows.push(vec![
                    index.to_string(),
                    fmt_float(c.value),
                    c.multiplicity.to_string(),
                ]);
                index += 1;
            }
        }
        self.csv(&format!("spectrum_{label}"), &["index", "eigenvalue", "multiplicity"], &rows)
    }
}

/// Relative deviation, absolute when the reference vanishes.
fn deviation(value: f64, reference: f64) -> f64 {
    if reference == 0.0 {
        (value - reference).abs()
    } else {
        (value - reference).abs() / reference.abs()
    }
}

fn system(s: &Scenario, b: bool) -> Result<SecularSystem, Error> {
    let (c, q) = if b {
        (&s.conditions_b, &s.potential_b)
    } else {
        (&s.conditions_a, &s.potential)
    };
    let c = c.clone().ok_or_else(|| Error::Precondition("missing conditions".into()))?;
    SecularSystem::new(s.graph.clone(), c, q.clone())
}

pub fn run(scenario: &Scenario, dir: &Path, opts: &RunOptions) -> Result<Status, RunError> {
    std::fs::create_dir_all(dir)?;
    let mut out = Output {
        dir: dir.to_path_buf(),
        plot_scripts: opts.plot_scripts,
        report: String::new(),
        certificates_ok: true,
        verdicts_ok: true,
    };
    header(scenario, &mut out);
    let keep = match execute(scenario, &mut out, opts) {
        Ok(keep) => keep,
        Err(ExecError::Io(e)) => return Err(e.into()),
        Err(ExecError::Core(Error::Certificate(m))) => {
            out.certificates_ok = false;
            out.line(format!("certificate: FAIL ({m})"));
            None
        }
        Err(ExecError::Core(e)) => {
            return Err(match e {
                Error::SingularShift(_)
                | Error::Counting(_)
                | Error::RankMismatch { .. }
                | Error::EigenvalueCrossing { .. } => RunError::Numerical(e),
                other => RunError::Scenario(ParseError {
                    line: scenario.experiment_line,
                    message: other.to_string(),
                }),
            })
        }
    };
    if let (Some((sys, spec)), true) = (keep, opts.eigenfunctions > 0) {
        dump_eigenfunctions(&mut out, &sys, &spec, opts.eigenfunctions)?;
    }
    let status = if !out.certificates_ok {
        Status::CertificateFailed
    } else if !out.verdicts_ok {
        Status::VerdictFailed
    } else {
        Status::Passed
    };
    out.line(format!(
        "status: {}",
        match status {
            Status::Passed => "PASS",
            Status::CertificateFailed => "CERTIFICATE FAILURE",
            Status::VerdictFailed => "VERDICT FAILURE",
        }
    ));
    std::fs::write(dir.join("report.txt"), &out.report)?;
    Ok(status)
}

fn header(s: &Scenario, out: &mut Output) {
    let g = &s.graph;
    out.line(format!("scenario: {}", s.name));
    out.line(format!("experiment: {}", s.experiment.kind()));
    out.line(format!(
        "graph: {} (|V| = {}, |E| = {}, L = {}, betti = {}, bipartite = {})",
        s.graph_label,
        g.num_vertices(),
        g.num_edges(),
        g.total_length(),
        g.betti_number(),
        g.is_bipartite()
    ));
    for (label, c) in [("A", &s.conditions_a), ("B", &s.conditions_b)] {
        if let Some(c) = c {
            out.line(format!("conditions {label}: {:?}", c.as_slice()));
        }
    }
    for (label, q) in [("A", &s.potential), ("B", &s.potential_b)] {
        if !q.is_zero() {
            out.line(format!(
                "potential {label}: {:?} (sup {}, integral {})",
                q.edges(),
                q.sup_norm(),
                q.integral()
            ));
        }
    }
}

enum ExecError {
    Core(Error),
    Io(io::Error),
}

impl From<Error> for ExecError {
    fn from(e: Error) -> Self {
        ExecError::Core(e)
    }
}

impl From<io::Error> for ExecError {
    fn from(e: io::Error) -> Self {
        ExecError::Io(e)
    }
}

type Kept = Option<(SecularSystem, Spectrum)>;

fn execute(s: &Scenario, out: &mut Output, opts: &RunOptions) -> Result<Kept, ExecError> {
    let g = &s.graph;
    match &s.experiment {
        Experiment::Spectrum { request } => {
            let a = system(s, false)?;
            let limit = match request {
                SpectrumRequest::FirstN(n) => Some(*n),
                SpectrumRequest::Window { .. } => None,
            };
            let spec_a = a.find_spectrum(request.clone())?;
            out.certificate("A", &spec_a);
            out.spectrum_csv("A", &spec_a, limit)?;
            if s.conditions_b.is_some() {
                let spec_b = system(s, true)?.find_spectrum(request.clone())?;
                out.certificate("B", &spec_b);
                out.spectrum_csv("B", &spec_b, limit)?;
            }
            Ok(Some((a, spec_a)))
        }
        Experiment::Compare {
            n_max,
            tolerance,
            raw_tolerance,
        } => {
            let (a, b) = (system(s, false)?, system(s, true)?);
            let (sa, sb) = rayon::join(|| certified_first(&a, *n_max), || certified_first(&b, *n_max));
            let (sa, sb) = (sa?, sb?);
            let betas = (
                a.conditions().delta_prime_strengths(),
                b.conditions().delta_prime_strengths(),
            );
            let predicted = match betas {
                (Some(ba), Some(bb))
                    if s.potential_b.is_zero() && ba.iter().chain(&bb).all(|&x| x != 0.0) =>
                {
                    let q = (!s.potential.is_zero()).then_some(&s.potential);
                    Some(theorem1_rhs(g, &ba, &bb, q)?)
                }
                _ => None,
            };
            let r = mean_difference(&sa, &sb, *n_max, predicted)?;
            out.certificate("A", &sa);
            out.certificate("B", &sb);
            out.spectrum_csv("A", &sa, Some(*n_max))?;
            out.spectrum_csv("B", &sb, Some(*n_max))?;
            let pred_col = predicted.map_or(String::new(), fmt_float);
            let rows: Vec<Vec<String>> = r
                .means
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    vec![
                        (i + 1).to_string(),
                        fmt_float(*m),
                        pred_col.clone(),
                        fmt_float(r.fit.c0),
                    ]
                })
                .collect();
            out.csv("compare", &["N", "C(N)", "predicted", "extrapolated"], &rows)?;
            let raw = r.mean_at(*n_max);
            out.line(format!(
                "C({n_max}) = {raw}, extrapolated c0 = {} (c1 = {}, fit residual {:.3e} over N = {}..{})",
                r.fit.c0, r.fit.c1, r.fit.residual, r.fit.from_n, r.fit.to_n
            ));
            match predicted {
                Some(p) => {
                    let (de, dr) = (deviation(r.fit.c0, p), deviation(raw, p));
                    out.verdict(
                        "extrapolated limit",
                        de <= *tolerance,
                        format!("predicted {p}, deviation {de:.4} <= {tolerance}"),
                    );
                    out.verdict(
                        "raw mean",
                        dr <= *raw_tolerance,
                        format!("predicted {p}, deviation {dr:.4} <= {raw_tolerance}"),
                    );
                }
                None => out.line("no closed-form prediction for these conditions; no verdict"),
            }
            Ok(Some((a, sa)))
        }
        Experiment::Weyl {
            n_max,
            target,
            tolerance,
            dummy,
        } => {
            let a = system(s, false)?;
            let spec = certified_first(&a, *n_max)?;
            out.certificate("A", &spec);
            out.spectrum_csv("A", &spec, Some(*n_max))?;
            let r = local_weyl(&a, &spec, *target, *n_max)?;
            let rows: Vec<Vec<String>> = r
                .means
                .iter()
                .enumerate()
                .map(|(i, m)| vec![(i + 1).to_string(), fmt_float(*m), fmt_float(r.predicted)])
                .collect();
            out.csv("weyl", &["N", "cesaro", "predicted"], &rows)?;
            let raw = r.mean_at(*n_max);
            let d = deviation(raw, r.predicted);
            out.line(format!(
                "target {target:?}: C({n_max}) = {raw}, extrapolated {} (fit residual {:.3e})",
                r.fit.c0, r.fit.residual
            ));
            out.verdict(
                "local Weyl mean",
                d <= *tolerance,
                format!("predicted {}, deviation {d:.4} <= {tolerance}", r.predicted),
            );
            if *dummy {
                let WeylTarget::Point(p) = target else {
                    return Err(Error::Precondition("`dummy` needs an interior point target".into()).into());
                };
                let d = local_weyl_dummy(&a, *p, *n_max)?;
                let rows: Vec<Vec<String>> = d
                    .dummy
                    .means
                    .iter()
                    .enumerate()
                    .map(|(i, m)| vec![(i + 1).to_string(), fmt_float(*m), fmt_float(d.dummy.predicted)])
                    .collect();
                out.csv("weyl_dummy", &["N", "cesaro", "predicted"], &rows)?;
                out.verdict(
                    "dummy vertex spectrum",
                    d.spectrum_deviation <= 1e-9,
                    format!("max relative deviation {:.3e} <= 1e-9", d.spectrum_deviation),
                );
                out.verdict(
                    "dummy vertex path",
                    d.path_deviation <= 1e-8,
                    format!("max |C_direct - C_dummy| {:.3e} <= 1e-8", d.path_deviation),
                );
            }
            Ok(Some((a, spec)))
        }
        Experiment::Heat {
            times,
            target,
            truncation_product,
            tolerance,
            bracketing,
        } => {
            let a = system(s, false)?;
            let t_min = times.iter().copied().fold(f64::INFINITY, f64::min);
            let top = truncation_product / t_min;
            let spec = certified_below(&a, top)?;
            out.certificate("A", &spec);
            out.spectrum_csv("A", &spec, None)?;
            let mut rows = Vec::new();
            for &t in times {
                let lambda = truncation_product / t;
                let r = match target {
                    WeylTarget::Vertex(v) => heat_kernel_vertex(&a, &spec, *v, t, lambda)?,
                    WeylTarget::Point(p) => heat_kernel_diag(&a, &spec, *p, t, lambda)?,
                };
                rows.push(vec![fmt_float(t), fmt_float(r.scaled), fmt_float(r.predicted)]);
                let d = deviation(r.scaled, r.predicted);
                out.line(format!(
                    "t = {t}: {} terms below {lambda}, kernel {}, tail bound {:.3e}",
                    r.terms, r.value, r.tail_bound
                ));
                out.verdict(
                    &format!("heat kernel at t = {t}"),
                    d <= *tolerance,
                    format!(
                        "sqrt(4 pi t) p = {}, predicted {}, deviation {d:.4} <= {tolerance}",
                        r.scaled, r.predicted
                    ),
                );
            }
            out.csv("heat", &["t", "value", "predicted"], &rows)?;
            if let Some(b) = bracketing {
                run_bracketing(&a, b, opts.seed, out)?;
            }
            Ok(Some((a, spec)))
        }
        Experiment::Hadamard {
            indices,
            nodes,
            potential_path,
            tolerance,
        } => {
            let a = system(s, false)?;
            let beta = a.conditions().delta_prime_strengths().expect("checked at parse time");
            let beta_prime = s
                .conditions_b
                .as_ref()
                .and_then(|c| c.delta_prime_strengths())
                .expect("checked at parse time");
            let start_q = if *potential_path {
                Potential::zero(g)
            } else {
                s.potential.clone()
            };
            let b = SecularSystem::new(g.clone(), s.conditions_b.clone().expect("checked"), start_q)?;
            let n = indices.iter().max().copied().unwrap_or(1) + 1;
            let (sa, sb) = rayon::join(|| certified_first(&a, n), || certified_first(&b, n));
            let (sa, sb) = (sa?, sb?);
            out.certificate("A", &sa);
            out.certificate("B", &sb);
            out.spectrum_csv("A", &sa, Some(n))?;
            out.spectrum_csv("B", &sb, Some(n))?;
            let mut rows = Vec::new();
            for &idx in indices {
                let mut prev: Option<f64> = None;
                for &k in nodes {
                    match hadamard_identity_check(g, &beta, &beta_prime, &s.potential, *potential_path, idx, k) {
                        Ok(r) => {
                            rows.push(vec![
                                idx.to_string(),
                                k.to_string(),
                                fmt_float(r.direct),
                                fmt_float(r.quadrature),
                                fmt_float(r.residual),
                            ]);
                            let shrink = prev.map_or(String::new(), |p| {
                                format!(", shrink factor {:.3}", p / r.residual)
                            });
                            out.verdict(
                                &format!("path integral n = {idx}, {k} nodes"),
                                r.residual <= *tolerance,
                                format!("residual {:.3e} <= {tolerance}{shrink}", r.residual),
                            );
                            prev = Some(r.residual);
                        }
                        Err(Error::EigenvalueCrossing { tau }) => {
                            out.line(format!(
                                "path integral n = {idx}, {k} nodes: aborted, eigenvalue crossing near tau = {tau}"
                            ));
                            break;
                        }
                        Err(e) => return Err(e.into()),
                    }
                }
            }
            out.csv("hadamard", &["n", "nodes", "direct", "quadrature", "residual"], &rows)?;
            Ok(Some((a, sa)))
        }
        Experiment::Isospectral {
            interval_beta,
            n,
            tolerance,
        } => {
            let pair = match interval_beta {
                Some(beta) => IsospectralPair::IntervalDeltaPrimeDelta {
                    length: g.total_length(),
                    beta: *beta,
                },
                None => IsospectralPair::BipartiteKirchhoff(g.clone()),
            };
            let r = isospectrality_check(&pair, *n)?;
            out.line(match interval_beta {
                Some(beta) => format!("pair: delta_prime beta={beta} against delta sigma={}", 1.0 / beta),
                None => "pair: anti_kirchhoff against kirchhoff".to_string(),
            });
            out.certificate("A", &r.spectra.0);
            out.certificate("B", &r.spectra.1);
            out.spectrum_csv("A", &r.spectra.0, Some(*n))?;
            out.spectrum_csv("B", &r.spectra.1, Some(*n))?;
            let rows: Vec<Vec<String>> = r
                .values_a
                .iter()
                .zip(&r.values_b)
                .enumerate()
                .map(|(i, (x, y))| {
                    vec![
                        (i + 1).to_string(),
                        fmt_float(*x),
                        fmt_float(*y),
                        fmt_float((x - y).abs() / (1.0 + x.abs())),
                    ]
                })
                .collect();
            out.csv("isospectral", &["index", "lambda_a", "lambda_b", "relative_deviation"], &rows)?;
            out.verdict(
                "isospectrality",
                r.max_deviation <= *tolerance,
                format!("max relative deviation {:.3e} <= {tolerance}", r.max_deviation),
            );
            Ok(None)
        }
        Experiment::Divergence {
            beta_prime,
            grid,
            gammas,
            mirrored,
        } => {
            let q = (!s.potential.is_zero()).then_some(&s.potential);
            let r = divergence_experiment(g, *beta_prime, q, grid, gammas, *mirrored)?;
            let c = &r.comparison;
            out.line(format!("comparing {} against {}", c.label_a, c.label_b));
            out.certificate("A", &c.spectra.0);
            out.certificate("B", &c.spectra.1);
            let n_max = c.n_max();
            out.spectrum_csv("A", &c.spectra.0, Some(n_max))?;
            out.spectrum_csv("B", &c.spectra.1, Some(n_max))?;
            let strongest = r
                .bounds
                .iter()
                .map(|b| b.1)
                .fold(if *mirrored { f64::INFINITY } else { f64::NEG_INFINITY }, |acc, b| {
                    if *mirrored { acc.min(b) } else { acc.max(b) }
                });
            let rows: Vec<Vec<String>> = c
                .means
                .iter()
                .enumerate()
                .map(|(i, m)| {
                    vec![(i + 1).to_string(), fmt_float(*m), fmt_float(strongest), fmt_float(c.fit.c0)]
                })
                .collect();
            out.csv("divergence", &["N", "C(N)", "predicted", "extrapolated"], &rows)?;
            for (n, m) in r.grid.iter().zip(&r.grid_means) {
                out.line(format!("C({n}) = {m}"));
            }
            for (gamma, b) in &r.bounds {
                out.line(format!("bound at gamma = {gamma}: {b}"));
            }
            out.verdict(
                if *mirrored { "strictly decreasing" } else { "strictly increasing" },
                r.monotone,
                "over the N grid",
            );
            out.verdict(
                "beyond ladder bounds",
                r.beyond_bounds,
                format!("every grid mean {} every bound", if *mirrored { "below" } else { "above" }),
            );
            Ok(None)
        }
        Experiment::Bipartite { grid } => {
            let sigma = s.conditions_a.as_ref().and_then(|c| c.delta_strengths()).expect("checked");
            let beta = s.conditions_b.as_ref().and_then(|c| c.delta_prime_strengths()).expect("checked");
            let r = corollary_bipartite(g, &sigma, &beta, &s.potential, grid)?;
            let c = &r.comparison;
            out.certificate("A", &c.spectra.0);
            out.certificate("B", &c.spectra.1);
            let n_max = c.n_max();
            out.spectrum_csv("A", &c.spectra.0, Some(n_max))?;
            out.spectrum_csv("B", &c.spectra.1, Some(n_max))?;
            let rows: Vec<Vec<String>> = c
                .means
                .iter()
                .zip(&r.bound_path)
                .enumerate()
                .map(|(i, (m, b))| {
                    vec![(i + 1).to_string(), fmt_float(*m), fmt_float(*b), fmt_float(c.fit.c0)]
                })
                .collect();
            out.csv("bipartite", &["N", "C(N)", "predicted", "extrapolated"], &rows)?;
            for ((n, m), b) in r.grid.iter().zip(&r.grid_means).zip(&r.lower_bounds) {
                out.line(format!("C({n}) = {m}, lower bound {b}"));
            }
            out.verdict("increasing", r.increasing, "over the N grid");
            out.verdict("above lower bounds", r.above_bounds, "at every grid N");
            Ok(None)
        }
    }
}

fn run_bracketing(a: &SecularSystem, b: &Bracketing, seed: u64, out: &mut Output) -> Result<(), ExecError> {
    let g = a.graph();
    let points: Vec<GraphPoint> = if b.random_samples {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..3)
            .map(|_| {
                let e = rng.random_range(0..g.num_edges());
                let l = g.edges()[e].length;
                GraphPoint::new(e, rng.random_range(0.0..l))
            })
            .collect()
    } else {
        (0..3)
            .map(|i| {
                let e = i % g.num_edges();
                GraphPoint::new(e, g.edges()[e].length * (i + 1) as f64 / 4.0)
            })
            .collect()
    };
    let mut samples = Vec::new();
    for &t in &b.times {
        for &x in &points {
            for &y in &points {
                samples.push((t, x, y));
            }
        }
    }
    let r = bracketing_check(a, &samples, b.slack)?;
    let rows: Vec<Vec<String>> = r
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt_float(s.t),
                s.x.edge.to_string(),
                fmt_float(s.x.x),
                s.y.edge.to_string(),
                fmt_float(s.y.x),
                fmt_float(s.upper_potential),
                fmt_float(s.actual),
                fmt_float(s.lower_potential),
            ]
        })
        .collect();
    out.csv(
        "bracketing",
        &["t", "x_edge", "x", "y_edge", "y", "p_plus", "p", "p_minus"],
        &rows,
    )?;
    out.verdict(
        "bracketing",
        r.holds(),
        format!("{} samples, worst excess {:.3e} over slack {}", r.samples.len(), r.worst, r.slack),
    );
    Ok(())
}

fn dump_eigenfunctions(out: &mut Output, sys: &SecularSystem, spec: &Spectrum, k: usize) -> io::Result<()> {
    let k = k.min(spec.len());
    let clusters = match spectrum_eigenfunctions(sys, spec, k) {
        Ok(c) => c,
        Err(e) => {
            out.line(format!("eigenfunction dump skipped: {e}"));
            return Ok(());
        }
    };
    let mut rows = Vec::new();
    for (i, f) in clusters.iter().flatten().take(k).enumerate() {
        for e in sys.graph().edges() {
            for j in 0..=64 {
                let x = e.length * j as f64 / 64.0;
                let v = f.evaluate(GraphPoint::new(e.id, x)).unwrap_or(f64::NAN);
                rows.push(vec![
                    (spec.first_index() + i).to_string(),
                    e.id.to_string(),
                    fmt_float(x),
                    fmt_float(v),
                ]);
            }
        }
    }
    out.csv("eigenfunctions_A", &["index", "edge", "x", "value"], &rows)
}
