//! Scenario files: one TOML document per run.

use std::fmt;
use std::ops::Range;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use qgraph_core::conditions::{VertexCondition, VertexConditionSet};
use qgraph_core::graph::{BuiltinGraph, GraphPoint, MetricGraph};
use qgraph_core::potential::{EdgePotential, Interpolation, Potential};
use qgraph_core::secular::SpectrumRequest;
use qgraph_core::stats::WeylTarget;
use serde::Deserialize;
use toml::{Spanned, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ParseError {}

type Parsed<T> = std::result::Result<T, ParseError>;

struct Source<'a> {
    text: &'a str,
}

impl Source<'_> {
    fn line(&self, offset: usize) -> usize {
        let offset = offset.min(self.text.len());
        self.text[..offset].matches('\n').count() + 1
    }

    fn err(&self, span: Range<usize>, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line(span.start),
            message: message.into(),
        }
    }

    /// Line of `needle` inside `span`, falling back to the span start.
    fn err_at(&self, span: &Range<usize>, needle: &str, message: impl Into<String>) -> ParseError {
        let start = self.text[span.clone()]
            .find(needle)
            .map_or(span.start, |i| span.start + i);
        self.err(start..start, message)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: Option<String>,
    graph: Spanned<RawGraph>,
    conditions: Option<Spanned<RawConditions>>,
    potential: Option<Spanned<Value>>,
    potential_b: Option<Spanned<Value>>,
    experiment: Spanned<RawExperiment>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    builtin: Option<String>,
    file: Option<String>,
    length: Option<f64>,
    lengths: Option<Vec<f64>>,
    arms: Option<usize>,
    #[serde(rename = "loop")]
    loop_length: Option<f64>,
    tail: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConditions {
    a: Option<Spanned<Value>>,
    b: Option<Spanned<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    kind: Spanned<String>,
    n: Option<usize>,
    n_max: Option<usize>,
    window: Option<[f64; 2]>,
    grid: Option<Vec<usize>>,
    tolerance: Option<f64>,
    raw_tolerance: Option<f64>,
    vertex: Option<usize>,
    edge: Option<usize>,
    x: Option<f64>,
    dummy: Option<bool>,
    times: Option<Vec<f64>>,
    truncation_product: Option<f64>,
    bracketing: Option<bool>,
    bracketing_times: Option<Vec<f64>>,
    slack: Option<f64>,
    random_samples: Option<bool>,
    indices: Option<Vec<usize>>,
    nodes: Option<Vec<usize>>,
    potential_path: Option<bool>,
    pair: Option<String>,
    beta: Option<f64>,
    beta_prime: Option<f64>,
    gammas: Option<Vec<f64>>,
    mirrored: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct Bracketing {
    pub times: Vec<f64>,
    pub slack: f64,
    pub random_samples: bool,
}

#[derive(Debug, Clone)]
pub enum Experiment {
    Spectrum {
        request: SpectrumRequest,
    },
    Compare {
        n_max: usize,
        tolerance: f64,
        raw_tolerance: f64,
    },
    Weyl {
        n_max: usize,
        target: WeylTarget,
        tolerance: f64,
        dummy: bool,
    },
    Heat {
        times: Vec<f64>,
        target: WeylTarget,
        truncation_product: f64,
        tolerance: f64,
        bracketing: Option<Bracketing>,
    },
    Hadamard {
        indices: Vec<usize>,
        nodes: Vec<usize>,
        potential_path: bool,
        tolerance: f64,
    },
    Isospectral {
        interval_beta: Option<f64>,
        n: usize,
        tolerance: f64,
    },
    Divergence {
        beta_prime: f64,
        grid: Vec<usize>,
        gammas: Vec<f64>,
        mirrored: bool,
    },
    Bipartite {
        grid: Vec<usize>,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Spectrum { .. } => "spectrum",
            Experiment::Compare { .. } => "compare",
            Experiment::Weyl { .. } => "weyl",
            Experiment::Heat { .. } => "heat",
            Experiment::Hadamard { .. } => "hadamard",
            Experiment::Isospectral { .. } => "isospectral",
            Experiment::Divergence { .. } => "divergence",
            Experiment::Bipartite { .. } => "bipartite",
        }
    }
}

pub const KINDS: [&str; 8] = [
    "spectrum",
    "compare",
    "weyl",
    "heat",
    "hadamard",
    "isospectral",
    "divergence",
    "bipartite",
];

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub graph: Arc<MetricGraph>,
    pub graph_label: String,
    pub conditions_a: Option<VertexConditionSet>,
    pub conditions_b: Option<VertexConditionSet>,
    pub potential: Potential,
    pub potential_b: Potential,
    pub experiment: Experiment,
    /// Line of the `kind` key, used to anchor errors found while running.
    pub experiment_line: usize,
}

impl Scenario {
    pub fn from_file(path: &Path) -> Parsed<Scenario> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Scenario::parse(&text, path.parent())
    }

    /// Graph files are resolved against `base` when given.
    pub fn parse(text: &str, base: Option<&Path>) -> Parsed<Scenario> {
        let src = Source { text };
        let raw: RawScenario = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(1, |s| src.line(s.start));
            ParseError {
                line,
                message: e.message().to_string(),
            }
        })?;
        let graph_span = raw.graph.span();
        let (graph, graph_label) =
            build_graph(raw.graph.get_ref(), base).map_err(|m| src.err(graph_span, m))?;
        let graph = Arc::new(graph);

        let (mut conditions_a, mut conditions_b) = (None, None);
        if let Some(c) = &raw.conditions {
            let c = c.get_ref();
            if let Some(a) = &c.a {
                conditions_a = Some(parse_conditions(&src, a, &graph)?);
            }
            if let Some(b) = &c.b {
                conditions_b = Some(parse_conditions(&src, b, &graph)?);
            }
        }
        let potential = match &raw.potential {
            Some(p) => parse_potential(&src, p, &graph)?,
            None => Potential::zero(&graph),
        };
        let potential_b = match &raw.potential_b {
            Some(p) => parse_potential(&src, p, &graph)?,
            None => Potential::zero(&graph),
        };

        let exp = raw.experiment.get_ref();
        let kind_span = exp.kind.span();
        let experiment_line = src.line(kind_span.start);
        let experiment = build_experiment(exp, &graph)
            .map_err(|m| src.err(kind_span.clone(), m))?;
        let scenario = Scenario {
            name: raw.name.unwrap_or_else(|| experiment.kind().to_string()),
            graph,
            graph_label,
            conditions_a,
            conditions_b,
            potential,
            potential_b,
            experiment,
            experiment_line,
        };
        scenario
            .check_requirements()
            .map_err(|m| src.err(kind_span, m))?;
        Ok(scenario)
    }

    fn check_requirements(&self) -> std::result::Result<(), String> {
        let need_a = !matches!(
            self.experiment,
            Experiment::Isospectral { .. } | Experiment::Divergence { .. }
        );
        let need_b = matches!(
            self.experiment,
            Experiment::Compare { .. } | Experiment::Hadamard { .. } | Experiment::Bipartite { .. }
        );
        if need_a && self.conditions_a.is_none() {
            return Err(format!("experiment `{}` needs conditions.a", self.experiment.kind()));
        }
        if need_b && self.conditions_b.is_none() {
            return Err(format!("experiment `{}` needs conditions.b", self.experiment.kind()));
        }
        let all_dp = |c: &Option<VertexConditionSet>| {
            c.as_ref().and_then(|c| c.delta_prime_strengths()).is_some()
        };
        match &self.experiment {
            Experiment::Hadamard { .. } if !(all_dp(&self.conditions_a) && all_dp(&self.conditions_b)) => {
                Err("hadamard needs delta_prime conditions in both a and b".into())
            }
            Experiment::Bipartite { .. } => {
                let a = self.conditions_a.as_ref().and_then(|c| c.delta_strengths());
                if a.is_none() || !all_dp(&self.conditions_b) {
                    return Err("bipartite needs delta conditions in a and delta_prime in b".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn build_graph(raw: &RawGraph, base: Option<&Path>) -> std::result::Result<(MetricGraph, String), String> {
    let missing = |what: &str, name: &str| format!("builtin `{name}` needs `{what}`");
    match (&raw.builtin, &raw.file) {
        (Some(_), Some(_)) => Err("give either `builtin` or `file`, not both".into()),
        (None, None) => Err("graph needs `builtin` or `file`".into()),
        (None, Some(file)) => {
            let mut path = PathBuf::from(file);
            if let (true, Some(base)) = (path.is_relative(), base) {
                path = base.join(path);
            }
            let text = std::fs::read_to_string(&path)
                .map_err(|e| format!("cannot read graph file {}: {e}", path.display()))?;
            let g = MetricGraph::from_description(&text).map_err(|e| e.to_string())?;
            Ok((g, format!("file {file}")))
        }
        (Some(name), None) => {
            let b = match name.as_str() {
                "interval" => BuiltinGraph::Interval {
                    length: raw.length.ok_or_else(|| missing("length", name))?,
                },
                "star" => BuiltinGraph::Star {
                    arms: raw.arms.ok_or_else(|| missing("arms", name))?,
                    length: raw.length.ok_or_else(|| missing("length", name))?,
                },
                "cycle" => BuiltinGraph::Cycle {
                    lengths: match (&raw.lengths, raw.arms, raw.length) {
                        (Some(l), _, _) => l.clone(),
                        (None, Some(m), Some(l)) => vec![l; m],
                        _ => return Err(missing("lengths` or `arms` and `length", name)),
                    },
                },
                "lasso" => BuiltinGraph::Lasso {
                    loop_length: raw.loop_length.ok_or_else(|| missing("loop", name))?,
                    tail_length: raw.tail.ok_or_else(|| missing("tail", name))?,
                },
                "figure1" => BuiltinGraph::Figure1 {
                    lengths: match (&raw.lengths, raw.length) {
                        (Some(l), _) => l
                            .as_slice()
                            .try_into()
                            .map_err(|_| format!("figure1 needs 7 lengths, got {}", l.len()))?,
                        (None, Some(l)) => [l; 7],
                        (None, None) => return Err(missing("length", name)),
                    },
                },
                other => return Err(format!("unknown builtin graph `{other}`")),
            };
            let g = b.build().map_err(|e| e.to_string())?;
            Ok((g, describe_builtin(&b)))
        }
    }
}

fn describe_builtin(b: &BuiltinGraph) -> String {
    match b {
        BuiltinGraph::Interval { length } => format!("interval length={length}"),
        BuiltinGraph::Star { arms, length } => format!("star arms={arms} length={length}"),
        BuiltinGraph::Cycle { lengths } => format!("cycle lengths={lengths:?}"),
        BuiltinGraph::Lasso {
            loop_length,
            tail_length,
        } => format!("lasso loop={loop_length} tail={tail_length}"),
        BuiltinGraph::Figure1 { lengths } => format!("figure1 lengths={lengths:?}"),
    }
}

/// `delta_prime beta=<x>`, `delta sigma=<x>`, `kirchhoff`, `anti_kirchhoff`,
/// `dirichlet`.
pub fn parse_condition(s: &str) -> std::result::Result<VertexCondition, String> {
    let mut words = s.split_whitespace();
    let head = words.next().ok_or("empty condition")?;
    let mut param = |key: &str| -> std::result::Result<f64, String> {
        let w = words
            .next()
            .ok_or_else(|| format!("`{head}` needs `{key}=<value>`"))?;
        let v = w
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix('='))
            .ok_or_else(|| format!("expected `{key}=<value>`, found `{w}`"))?;
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("bad number `{v}`"))
    };
    let c = match head {
        "delta_prime" => VertexCondition::DeltaPrime { beta: param("beta")? },
        "delta" => VertexCondition::Delta { sigma: param("sigma")? },
        "kirchhoff" => VertexCondition::kirchhoff(),
        "anti_kirchhoff" => VertexCondition::anti_kirchhoff(),
        "dirichlet" => VertexCondition::Dirichlet,
        other => return Err(format!("unknown condition `{other}`")),
    };
    if let Some(extra) = words.next() {
        return Err(format!("unexpected `{extra}` after `{head}`"));
    }
    Ok(c)
}

/// Splits `"<v>: rest"` or `"all: rest"`; a bare entry means `all`.
fn split_target(entry: &str) -> std::result::Result<(Option<usize>, &str), String> {
    match entry.split_once(':') {
        None => Ok((None, entry.trim())),
        Some((t, rest)) => {
            let t = t.trim();
            if t == "all" {
                Ok((None, rest.trim()))
            } else {
                let id = t
                    .parse::<usize>()
                    .map_err(|_| format!("bad target `{t}`; expected an id or `all`"))?;
                Ok((Some(id), rest.trim()))
            }
        }
    }
}

fn entries<'v>(src: &Source, value: &'v Spanned<Value>) -> Parsed<Vec<&'v str>> {
    match value.get_ref() {
        Value::String(s) => Ok(vec![s.as_str()]),
        Value::Array(items) => items
            .iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| src.err(value.span(), "entries must be strings"))
            })
            .collect(),
        _ => Err(src.err(value.span(), "expected a string or an array of strings")),
    }
}

fn parse_conditions(src: &Source, value: &Spanned<Value>, g: &MetricGraph) -> Parsed<VertexConditionSet> {
    let span = value.span();
    let mut slots: Vec<Option<VertexCondition>> = vec![None; g.num_vertices()];
    for entry in entries(src, value)? {
        let fail = |m: String| src.err_at(&span, entry, m);
        let (target, rest) = split_target(entry).map_err(fail)?;
        let c = parse_condition(rest).map_err(fail)?;
        match target {
            None => slots.iter_mut().for_each(|s| *s = Some(c)),
            Some(v) if v < g.num_vertices() => slots[v] = Some(c),
            Some(v) => {
                return Err(fail(format!(
                    "vertex {v} does not exist (graph has {})",
                    g.num_vertices()
                )))
            }
        }
    }
    let conds: Vec<VertexCondition> = slots
        .into_iter()
        .enumerate()
        .map(|(v, c)| c.ok_or_else(|| src.err(span.clone(), format!("no condition for vertex {v}"))))
        .collect::<Parsed<_>>()?;
    VertexConditionSet::new(conds).map_err(|e| src.err(span, e.to_string()))
}

fn numbers(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|w| {
            let w = w.trim();
            w.parse::<f64>().map_err(|_| format!("bad number `{w}`"))
        })
        .collect()
}

/// `zero`, `constant <c>`, `piecewise <b1,b2,...> <v0,v1,...>` or
/// `sampled constant|linear <v0,v1,...>`.
pub fn parse_edge_potential(s: &str) -> std::result::Result<EdgePotential, String> {
    let words: Vec<&str> = s.split_whitespace().collect();
    let arity = |n: usize| {
        if words.len() == n {
            Ok(())
        } else {
            Err(format!("`{}` takes {} argument(s)", words[0], n - 1))
        }
    };
    match words.first().copied() {
        Some("zero") => arity(1).map(|_| EdgePotential::Zero),
        Some("constant") => {
            arity(2)?;
            let c = numbers(words[1])?;
            match c.as_slice() {
                [c] => Ok(EdgePotential::Constant(*c)),
                _ => Err("constant takes one number".into()),
            }
        }
        Some("piecewise") => {
            arity(3)?;
            Ok(EdgePotential::PiecewiseConstant {
                breaks: numbers(words[1])?,
                values: numbers(words[2])?,
            })
        }
        Some("sampled") => {
            arity(3)?;
            let interpolation = match words[1] {
                "constant" => Interpolation::Constant,
                "linear" => Interpolation::Linear,
                other => return Err(format!("unknown interpolation `{other}`")),
            };
            Ok(EdgePotential::Sampled {
                values: numbers(words[2])?,
                interpolation,
            })
        }
        Some(other) => Err(format!("unknown potential `{other}`")),
        None => Err("empty potential".into()),
    }
}

fn parse_potential(src: &Source, value: &Spanned<Value>, g: &MetricGraph) -> Parsed<Potential> {
    let span = value.span();
    let mut edges = vec![EdgePotential::Zero; g.num_edges()];
    for entry in entries(src, value)? {
        let fail = |m: String| src.err_at(&span, entry, m);
        let (target, rest) = split_target(entry).map_err(fail)?;
        let q = parse_edge_potential(rest).map_err(fail)?;
        match target {
            None => edges.iter_mut().for_each(|e| *e = q.clone()),
            Some(e) if e < g.num_edges() => edges[e] = q,
            Some(e) => {
                return Err(fail(format!(
                    "edge {e} does not exist (graph has {})",
                    g.num_edges()
                )))
            }
        }
    }
    Potential::new(g, edges).map_err(|e| src.err(span, e.to_string()))
}

fn target(raw: &RawExperiment, g: &MetricGraph) -> std::result::Result<WeylTarget, String> {
    match (raw.vertex, raw.edge, raw.x) {
        (Some(v), None, None) if v < g.num_vertices() => Ok(WeylTarget::Vertex(v)),
        (Some(v), None, None) => Err(format!("vertex {v} does not exist")),
        (None, Some(e), Some(x)) => {
            let p = GraphPoint::new(e, x);
            g.check_point(p).map_err(|e| e.to_string())?;
            Ok(WeylTarget::Point(p))
        }
        _ => Err("give either `vertex` or both `edge` and `x`".into()),
    }
}

fn positive(name: &str, x: f64) -> std::result::Result<f64, String> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{name}` must be positive, got {x}"))
    }
}

fn build_experiment(raw: &RawExperiment, g: &MetricGraph) -> std::result::Result<Experiment, String> {
    let kind = raw.kind.get_ref().as_str();
    let need = |name: &str| format!("experiment `{kind}` needs `{name}`");
    let grid = || -> std::result::Result<Vec<usize>, String> {
        let grid = raw.grid.clone().ok_or_else(|| need("grid"))?;
        if grid.is_empty() || grid.contains(&0) {
            return Err("`grid` must be a non-empty list of positive N".into());
        }
        Ok(grid)
    };
    let n_max = |default: usize| -> std::result::Result<usize, String> {
        match raw.n_max.unwrap_or(default) {
            0 => Err("`n_max` must be positive".into()),
            n => Ok(n),
        }
    };
    Ok(match kind {
        "spectrum" => {
            let request = match (raw.n, raw.window) {
                (Some(_), Some(_)) => return Err("give either `n` or `window`".into()),
                (Some(0), None) => return Err("`n` must be positive".into()),
                (Some(n), None) => SpectrumRequest::FirstN(n),
                (None, Some([lo, hi])) if lo < hi => SpectrumRequest::Window { lo, hi },
                (None, Some(_)) => return Err("`window` must satisfy lo < hi".into()),
                (None, None) => SpectrumRequest::FirstN(50),
            };
            Experiment::Spectrum { request }
        }
        "compare" => Experiment::Compare {
            n_max: n_max(2000)?,
            tolerance: positive("tolerance", raw.tolerance.unwrap_or(0.10))?,
            raw_tolerance: positive("raw_tolerance", raw.raw_tolerance.unwrap_or(0.15))?,
        },
        "weyl" => Experiment::Weyl {
            n_max: n_max(2000)?,
            target: target(raw, g)?,
            tolerance: positive("tolerance", raw.tolerance.unwrap_or(0.05))?,
            dummy: raw.dummy.unwrap_or(false),
        },
        "heat" => {
            let times = raw.times.clone().unwrap_or_else(|| vec![1e-3]);
            if times.is_empty() {
                return Err("`times` must not be empty".into());
            }
            for &t in &times {
                positive("times", t)?;
            }
            let bracketing = if raw.bracketing.unwrap_or(false) {
                let times = raw
                    .bracketing_times
                    .clone()
                    .unwrap_or_else(|| vec![0.01, 0.05, 0.2]);
                for &t in &times {
                    positive("bracketing_times", t)?;
                }
                Some(Bracketing {
                    times,
                    slack: raw.slack.unwrap_or(1e-8),
                    random_samples: raw.random_samples.unwrap_or(false),
                })
            } else {
                None
            };
            Experiment::Heat {
                times,
                target: target(raw, g)?,
                truncation_product: positive(
                    "truncation_product",
                    raw.truncation_product.unwrap_or(30.0),
                )?,
                tolerance: positive("tolerance", raw.tolerance.unwrap_or(0.05))?,
                bracketing,
            }
        }
        "hadamard" => {
            let indices = raw.indices.clone().unwrap_or_else(|| vec![1, 2, 3]);
            let nodes = raw.nodes.clone().unwrap_or_else(|| vec![64, 128]);
            if indices.is_empty() || nodes.is_empty() || nodes.contains(&0) {
                return Err("`indices` and `nodes` must be non-empty, nodes positive".into());
            }
            Experiment::Hadamard {
                indices,
                nodes,
                potential_path: raw.potential_path.unwrap_or(false),
                tolerance: positive("tolerance", raw.tolerance.unwrap_or(1e-3))?,
            }
        }
        "isospectral" => {
            let interval_beta = match raw.pair.as_deref() {
                Some("interval") => Some(positive("beta", raw.beta.ok_or_else(|| need("beta"))?)?),
                Some("bipartite") => None,
                Some(other) => return Err(format!("unknown pair `{other}`; use interval or bipartite")),
                None => return Err(need("pair")),
            };
            if interval_beta.is_some() && !(g.num_edges() == 1 && g.num_vertices() == 2) {
                return Err("pair `interval` needs an interval graph".into());
            }
            Experiment::Isospectral {
                interval_beta,
                n: raw.n.unwrap_or(50),
                tolerance: positive("tolerance", raw.tolerance.unwrap_or(1e-8))?,
            }
        }
        "divergence" => Experiment::Divergence {
            beta_prime: positive("beta_prime", raw.beta_prime.ok_or_else(|| need("beta_prime"))?)?,
            grid: grid()?,
            gammas: raw.gammas.clone().unwrap_or_else(|| vec![1.0, 0.5, 0.25]),
            mirrored: raw.mirrored.unwrap_or(false),
        },
        "bipartite" => Experiment::Bipartite { grid: grid()? },
        other => {
            return Err(format!(
                "unknown experiment kind `{other}`; expected one of {}",
                KINDS.join(", ")
            ))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const STAR: &str = r#"
name = "star"

[graph]
builtin = "star"
arms = 3
length = 1.0

[conditions]
a = "delta_prime beta=1"
b = ["all: delta_prime beta=2", "0: delta_prime beta=3"]

[experiment]
kind = "compare"
n_max = 100
"#;

    #[test]
    fn parses_full_scenario() {
        let s = Scenario::parse(STAR, None).unwrap();
        assert_eq!(s.graph.num_edges(), 3);
        let b = s.conditions_b.unwrap().delta_prime_strengths().unwrap();
        assert_eq!(b, vec![3.0, 2.0, 2.0, 2.0]);
        assert!(matches!(s.experiment, Experiment::Compare { n_max: 100, .. }));
        assert_eq!(s.experiment_line, 14);
    }

    #[test]
    fn condition_errors_point_at_their_line() {
        let bad = STAR.replace("\"0: delta_prime beta=3\"", "\n  \"0: delta_prime gamma=3\"");
        let e = Scenario::parse(&bad, None).unwrap_err();
        assert_eq!(e.line, 12, "{e}");
        assert!(e.message.contains("beta"));
    }

    #[test]
    fn syntax_errors_carry_lines() {
        let e = Scenario::parse("[graph]\nbuiltin = \"star\"\narms = = 3\n", None).unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn unknown_kind() {
        let bad = STAR.replace("compare", "fourier");
        let e = Scenario::parse(&bad, None).unwrap_err();
        assert_eq!(e.line, 14);
        assert!(e.message.contains("fourier"));
    }

    #[test]
    fn potentials() {
        assert_eq!(parse_edge_potential("constant 0.7").unwrap(), EdgePotential::Constant(0.7));
        assert_eq!(
            parse_edge_potential("piecewise 0.25,0.5 1,2,3").unwrap(),
            EdgePotential::PiecewiseConstant {
                breaks: vec![0.25, 0.5],
                values: vec![1.0, 2.0, 3.0]
            }
        );
        assert!(parse_edge_potential("piecewise 0.5").is_err());
        assert!(parse_edge_potential("cubic 1").is_err());
    }

    #[test]
    fn conditions() {
        assert_eq!(parse_condition("dirichlet").unwrap(), VertexCondition::Dirichlet);
        assert_eq!(
            parse_condition("delta sigma=-1.5").unwrap(),
            VertexCondition::Delta { sigma: -1.5 }
        );
        assert!(parse_condition("kirchhoff sigma=1").is_err());
        assert!(parse_condition("delta_prime beta=nan").is_err());
    }
}
