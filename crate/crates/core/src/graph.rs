//! Compact connected metric graphs.
//!
//! Every edge carries an explicit orientation: the `from` vertex sits at
//! coordinate `0`, the `to` vertex at coordinate `length`. Vertex and edge
//! ids are dense integers assigned at construction.

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub id: usize,
    pub from: usize,
    pub to: usize,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeEnd {
    /// Coordinate `0`.
    Start,
    /// Coordinate `length`.
    End,
}

/// One edge endpoint attached to a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Incidence {
    pub edge: usize,
    pub end: EdgeEnd,
}

impl Incidence {
    /// Index into the `2|E|` vector of edge endpoints.
    pub fn slot(&self) -> usize {
        2 * self.edge
            + match self.end {
                EdgeEnd::Start => 0,
                EdgeEnd::End => 1,
            }
    }
}

/// A point on the graph, given by an edge and a coordinate in `[0, length]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphPoint {
    pub edge: usize,
    pub x: f64,
}

impl GraphPoint {
    pub fn new(edge: usize, x: f64) -> Self {
        Self { edge, x }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    num_vertices: usize,
    edges: Vec<Edge>,
    incidences: Vec<Vec<Incidence>>,
}

impl MetricGraph {
    /// Builds and validates a graph from `(from, to, length)` triples. Edge ids
    /// follow the order of `edges`.
    pub fn new(num_vertices: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        if edges.is_empty() {
            return Err(Error::InvalidGraph("graph has no edges".into()));
        }
        let mut incidences = vec![Vec::new(); num_vertices];
        let mut out = Vec::with_capacity(edges.len());
        for (id, &(from, to, length)) in edges.iter().enumerate() {
            if from >= num_vertices || to >= num_vertices {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} references vertex outside 0..{num_vertices}"
                )));
            }
            if !(length.is_finite() && length > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge {id} has non-positive or non-finite length {length}"
                )));
            }
            incidences[from].push(Incidence {
                edge: id,
                end: EdgeEnd::Start,
            });
            incidences[to].push(Incidence {
                edge: id,
                end: EdgeEnd::End,
            });
            out.push(Edge {
                id,
                from,
                to,
                length,
            });
        }
        let graph = Self {
            num_vertices,
            edges: out,
            incidences,
        };
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.num_vertices];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.incidences[v].iter().map(move |inc| {
            let e = &self.edges[inc.edge];
            match inc.end {
                EdgeEnd::Start => e.to,
                EdgeEnd::End => e.from,
            }
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> Result<&Edge> {
        self.edges.get(e).ok_or(Error::UnknownEdge(e))
    }

    /// Incident edge endpoints of `v`, ordered by edge id with `Start` before
    /// `End` for loops. This ordering indexes `F(v)` and `∂F(v)` everywhere.
    pub fn incidences(&self, v: usize) -> Result<&[Incidence]> {
        self.incidences
            .get(v)
            .map(Vec::as_slice)
            .ok_or(Error::UnknownVertex(v))
    }

    /// Number of edge endpoints at `v`; a loop counts twice.
    pub fn degree(&self, v: usize) -> Result<usize> {
        self.incidences(v).map(<[_]>::len)
    }

    pub fn total_length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn min_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn betti_number(&self) -> usize {
        self.edges.len() + 1 - self.num_vertices
    }

    /// Two-colouring of the vertices if one exists. A loop makes the graph
    /// non-bipartite.
    pub fn bipartition(&self) -> Option<(Vec<usize>, Vec<usize>)> {
        let mut colour: Vec<Option<bool>> = vec![None; self.num_vertices];
        colour[0] = Some(false);
        let mut stack = vec![0];
        while let Some(v) = stack.pop() {
            let c = colour[v].expect("coloured before push");
            for w in self.neighbors(v) {
                match colour[w] {
                    None => {
                        colour[w] = Some(!c);
                        stack.push(w);
                    }
                    Some(cw) if cw == c => return None,
                    Some(_) => {}
                }
            }
        }
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (v, c) in colour.into_iter().enumerate() {
            if c == Some(false) {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        Some((a, b))
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition().is_some()
    }

    pub fn check_point(&self, p: GraphPoint) -> Result<()> {
        let e = self.edge(p.edge)?;
        if !(0.0..=e.length).contains(&p.x) {
            return Err(Error::PointOutsideEdge {
                edge: p.edge,
                x: p.x,
                length: e.length,
            });
        }
        Ok(())
    }

    /// Splits edge `p.edge` at the interior coordinate `p.x`, inserting a new
    /// degree-2 vertex. The first part keeps the edge id; the second part is
    /// appended as the last edge. The new vertex gets id `num_vertices()`.
    pub fn split_edge(&self, p: GraphPoint) -> Result<MetricGraph> {
        let e = *self.edge(p.edge)?;
        if !(p.x > 0.0 && p.x < e.length) {
            return Err(Error::Precondition(format!(
                "split point x = {} is not interior to edge {} of length {}",
                p.x, p.edge, e.length
            )));
        }
        let new_vertex = self.num_vertices;
        let mut triples: Vec<(usize, usize, f64)> =
            self.edges.iter().map(|e| (e.from, e.to, e.length)).collect();
        triples[p.edge] = (e.from, new_vertex, p.x);
        triples.push((new_vertex, e.to, e.length - p.x));
        MetricGraph::new(self.num_vertices + 1, &triples)
    }

    /// Parses the plain-text graph description format:
    ///
    /// ```text
    /// vertices = [0, 1, 2, 3]
    ///
    /// [[edge]]
    /// id = 0
    /// from = 0
    /// to = 1
    /// length = 1.0
    /// ```
    ///
    /// Vertex ids must be `0..n` and edge ids `0..m`, each listed once.
    pub fn from_description(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct EdgeEntry {
            id: usize,
            from: usize,
            to: usize,
            length: f64,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Description {
            vertices: Vec<usize>,
            #[serde(default)]
            edge: Vec<EdgeEntry>,
        }
        let desc: Description = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let n = desc.vertices.len();
        let mut vs = desc.vertices.clone();
        vs.sort_unstable();
        if vs.iter().enumerate().any(|(i, &v)| i != v) {
            return Err(Error::InvalidGraph(format!(
                "vertex ids must be exactly 0..{n}, each once"
            )));
        }
        let m = desc.edge.len();
        let mut triples = vec![None; m];
        for entry in &desc.edge {
            if entry.id >= m || triples[entry.id].is_some() {
                return Err(Error::InvalidGraph(format!(
                    "edge ids must be exactly 0..{m}, each once (offending id {})",
                    entry.id
                )));
            }
            triples[entry.id] = Some((entry.from, entry.to, entry.length));
        }
        let triples: Vec<_> = triples.into_iter().map(|t| t.expect("filled")).collect();
        MetricGraph::new(n, &triples)
    }

    /// Inverse of [`MetricGraph::from_description`].
    pub fn to_description(&self) -> String {
        let ids: Vec<String> = (0..self.num_vertices).map(|v| v.to_string()).collect();
        let mut out = format!("vertices = [{}]\n", ids.join(", "));
        for e in &self.edges {
            out.push_str(&format!(
                "\n[[edge]]\nid = {}\nfrom = {}\nto = {}\nlength = {:?}\n",
                e.id, e.from, e.to, e.length
            ));
        }
        out
    }
}

/// The canonical graphs used by tests, examples and the CLI.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinGraph {
    Interval { length: f64 },
    /// Center vertex `0` at coordinate `0` of every edge; leaves `1..=m`.
    Star { arms: usize, length: f64 },
    /// Edge `i` runs from vertex `i` to vertex `(i + 1) % m`.
    Cycle { lengths: Vec<f64> },
    /// A loop at vertex `0` plus a tail from `0` to `1`.
    Lasso { loop_length: f64, tail_length: f64 },
    /// The 7-vertex, 7-edge bipartite graph with Betti number one: vertices
    /// `0..4` on one side, `4..7` on the other.
    Figure1 { lengths: [f64; 7] },
}

pub const BUILTIN_NAMES: [(&str, &str); 5] = [
    ("interval", "length=<L>"),
    ("star", "arms=<m> length=<l>"),
    ("cycle", "lengths=<l1,...,lm> | arms=<m> length=<l>"),
    ("lasso", "loop=<l> tail=<l>"),
    ("figure1", "length=<l> | lengths=<l1,...,l7>"),
];

const FIGURE1_EDGES: [(usize, usize); 7] = [(0, 4), (0, 5), (1, 4), (1, 6), (2, 4), (2, 5), (3, 5)];

impl BuiltinGraph {
    pub fn build(&self) -> Result<MetricGraph> {
        match self {
            BuiltinGraph::Interval { length } => MetricGraph::new(2, &[(0, 1, *length)]),
            BuiltinGraph::Star { arms, length } => {
                if *arms == 0 {
                    return Err(Error::InvalidGraph("star needs at least one arm".into()));
                }
                let edges: Vec<_> = (1..=*arms).map(|i| (0, i, *length)).collect();
                MetricGraph::new(arms + 1, &edges)
            }
            BuiltinGraph::Cycle { lengths } => {
                let m = lengths.len();
                if m == 0 {
                    return Err(Error::InvalidGraph("cycle needs at least one edge".into()));
                }
                let edges: Vec<_> = lengths
                    .iter()
                    .enumerate()
                    .map(|(i, &l)| (i, (i + 1) % m, l))
                    .collect();
                MetricGraph::new(m, &edges)
            }
            BuiltinGraph::Lasso {
                loop_length,
                tail_length,
            } => MetricGraph::new(2, &[(0, 0, *loop_length), (0, 1, *tail_length)]),
            BuiltinGraph::Figure1 { lengths } => {
                let edges: Vec<_> = FIGURE1_EDGES
                    .iter()
                    .zip(lengths)
                    .map(|(&(a, b), &l)| (a, b, l))
                    .collect();
                MetricGraph::new(7, &edges)
            }
        }
    }

    pub fn interval(length: f64) -> Result<MetricGraph> {
        BuiltinGraph::Interval { length }.build()
    }

    pub fn star(arms: usize, length: f64) -> Result<MetricGraph> {
        BuiltinGraph::Star { arms, length }.build()
    }

    pub fn cycle(lengths: &[f64]) -> Result<MetricGraph> {
        BuiltinGraph::Cycle {
            lengths: lengths.to_vec(),
        }
        .build()
    }

    pub fn lasso(loop_length: f64, tail_length: f64) -> Result<MetricGraph> {
        BuiltinGraph::Lasso {
            loop_length,
            tail_length,
        }
        .build()
    }

    pub fn figure1(lengths: [f64; 7]) -> Result<MetricGraph> {
        BuiltinGraph::Figure1 { lengths }.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degrees_of_builtins() {
        let star = BuiltinGraph::star(3, 1.0).unwrap();
        assert_eq!(star.degree(0).unwrap(), 3);
        assert_eq!(star.degree(2).unwrap(), 1);
        let interval = BuiltinGraph::interval(1.0).unwrap();
        assert_eq!(interval.degree(1).unwrap(), 1);
        let single_loop = BuiltinGraph::cycle(&[2.0]).unwrap();
        assert_eq!(single_loop.num_vertices(), 1);
        assert_eq!(single_loop.degree(0).unwrap(), 2);
        assert_eq!(star.degree(7), Err(Error::UnknownVertex(7)));
    }

    #[test]
    fn total_lengths() {
        assert_eq!(BuiltinGraph::interval(1.0).unwrap().total_length(), 1.0);
        assert_eq!(BuiltinGraph::star(3, 1.0).unwrap().total_length(), 3.0);
        let c = BuiltinGraph::cycle(&[1.0, 0.5, 1.0, 0.5]).unwrap();
        assert_eq!(c.total_length(), 3.0);
        let i = BuiltinGraph::interval(std::f64::consts::PI).unwrap();
        assert_eq!((i.num_edges(), i.num_vertices()), (1, 2));
        assert_eq!(i.total_length(), std::f64::consts::PI);
    }

    #[test]
    fn betti_and_bipartite() {
        assert_eq!(BuiltinGraph::interval(1.0).unwrap().betti_number(), 0);
        let c4 = BuiltinGraph::cycle(&[1.0; 4]).unwrap();
        assert_eq!(c4.betti_number(), 1);
        assert!(c4.is_bipartite());
        assert!(!BuiltinGraph::cycle(&[1.0; 3]).unwrap().is_bipartite());
        assert!(!BuiltinGraph::cycle(&[1.0]).unwrap().is_bipartite());
        assert!(!BuiltinGraph::lasso(1.0, 1.0).unwrap().is_bipartite());

        let f1 = BuiltinGraph::figure1([1.0; 7]).unwrap();
        assert_eq!((f1.num_vertices(), f1.num_edges()), (7, 7));
        assert_eq!(f1.betti_number(), 1);
        let (a, b) = f1.bipartition().unwrap();
        assert_eq!((a.len(), b.len()), (4, 3));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(BuiltinGraph::interval(0.0).is_err());
        assert!(BuiltinGraph::interval(-1.0).is_err());
        assert!(BuiltinGraph::interval(f64::INFINITY).is_err());
        assert!(BuiltinGraph::star(0, 1.0).is_err());
        assert!(BuiltinGraph::cycle(&[]).is_err());
        assert!(MetricGraph::new(3, &[(0, 1, 1.0)]).is_err());
        assert!(MetricGraph::new(2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn split_inserts_degree_two_vertex() {
        let g = BuiltinGraph::interval(1.0).unwrap();
        let s = g.split_edge(GraphPoint::new(0, 0.25)).unwrap();
        assert_eq!(s.num_vertices(), 3);
        assert_eq!(s.degree(2).unwrap(), 2);
        assert_eq!(s.edge(0).unwrap().length, 0.25);
        assert_eq!(s.edge(1).unwrap().length, 0.75);
        assert!(g.split_edge(GraphPoint::new(0, 1.0)).is_err());
    }

    #[test]
    fn description_round_trip() {
        let g = BuiltinGraph::figure1([1.0, 0.5, 2.0, 1.0, 0.25, 1.0, 3.0]).unwrap();
        let back = MetricGraph::from_description(&g.to_description()).unwrap();
        assert_eq!(g, back);
        let bad = "vertices = [0, 2]\n[[edge]]\nid = 0\nfrom = 0\nto = 1\nlength = 1.0\n";
        assert!(MetricGraph::from_description(bad).is_err());
    }
}
