//! Weighted orthogonality graphs and their relaxed (ε-edge) variants.
//!
//! Vertices are dense integer ids `0..n`. Weights are exact rationals so the
//! combinatorial bounds computed downstream are exact-arithmetic claims; float
//! views are provided for the solvers. The pentagon family `G_d` (a central
//! d-clique whose members each sit on their own 5-cycle) uses the row-major id
//! map `(i, j) -> 5*(i-1) + (j-1)` for `i in 1..=d`, `j in 1..=5`.

use num_rational::Ratio;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

pub type Weight = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("dimension must be at least 3, got {0}")]
    InvalidDimension(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// An undirected vertex-weighted graph with strict (orthogonality) edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    weights: Vec<Weight>,
    labels: Option<Vec<String>>,
    adj: Vec<Vec<bool>>,
}

impl WeightedGraph {
    /// Build a graph from an edge list and per-vertex weights.
    ///
    /// Self-loops, out-of-range endpoints and non-positive weights are
    /// rejected; duplicate edges collapse.
    pub fn new(
        n: usize,
        edge_list: &[(usize, usize)],
        weights: Vec<Weight>,
    ) -> Result<Self, GraphError> {
        if weights.len() != n {
            return Err(GraphError::InvalidParameter(format!(
                "expected {n} weights, got {}",
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| **w <= Ratio::from_integer(0)) {
            return Err(GraphError::InvalidParameter(format!(
                "weights must be positive, got {w}"
            )));
        }
        let mut edges = BTreeSet::new();
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in edge_list {
            if u == v {
                return Err(GraphError::InvalidParameter(format!("self-loop at {u}")));
            }
            if u >= n || v >= n {
                return Err(GraphError::InvalidParameter(format!(
                    "edge ({u},{v}) out of range for {n} vertices"
                )));
            }
            edges.insert((u.min(v), u.max(v)));
            adj[u][v] = true;
            adj[v][u] = true;
        }
        Ok(Self { n, edges, weights, labels: None, adj })
    }

    pub fn unit_weights(n: usize, edge_list: &[(usize, usize)]) -> Result<Self, GraphError> {
        Self::new(n, edge_list, vec![Ratio::from_integer(1); n])
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u][v]
    }

    pub fn weight(&self, v: usize) -> Weight {
        self.weights[v]
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(ratio_to_f64).collect()
    }

    pub fn total_weight(&self) -> Weight {
        self.weights.iter().sum()
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.adj[v][u]).collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].iter().filter(|&&b| b).count()
    }

    /// True iff `perm` is a weight-preserving graph automorphism.
    pub fn verify_automorphism(&self, perm: &[usize]) -> Result<bool, GraphError> {
        if perm.len() != self.n {
            return Err(GraphError::InvalidParameter(format!(
                "permutation length {} does not match {} vertices",
                perm.len(),
                self.n
            )));
        }
        let mut seen = vec![false; self.n];
        for &p in perm {
            if p >= self.n || seen[p] {
                return Err(GraphError::InvalidParameter(
                    "not a bijection on vertices".into(),
                ));
            }
            seen[p] = true;
        }
        for v in 0..self.n {
            if self.weights[perm[v]] != self.weights[v] {
                return Ok(false);
            }
        }
        for &(u, v) in &self.edges {
            if !self.adj[perm[u]][perm[v]] {
                return Ok(false);
            }
        }
        // Edge counts match and images of edges are edges, so the map is onto.
        Ok(true)
    }
}

/// A graph with two edge classes: strict orthogonality and ε-orthogonality.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonGraph {
    n: usize,
    strict_edges: BTreeSet<(usize, usize)>,
    eps_edges: BTreeSet<(usize, usize)>,
    weights: Vec<Weight>,
    labels: Option<Vec<String>>,
    epsilon: f64,
}

impl EpsilonGraph {
    pub fn new(
        n: usize,
        strict: &[(usize, usize)],
        eps: &[(usize, usize)],
        weights: Vec<Weight>,
        epsilon: f64,
    ) -> Result<Self, GraphError> {
        if !(0.0..1.0).contains(&epsilon) {
            return Err(GraphError::InvalidParameter(format!(
                "epsilon must lie in [0,1), got {epsilon}"
            )));
        }
        // Validate through the plain-graph constructor, then split classes.
        let strict_g = WeightedGraph::new(n, strict, weights.clone())?;
        let eps_g = WeightedGraph::new(n, eps, weights.clone())?;
        if let Some(e) = strict_g.edges.intersection(&eps_g.edges).next() {
            return Err(GraphError::InvalidParameter(format!(
                "edge {e:?} is both strict and epsilon"
            )));
        }
        Ok(Self {
            n,
            strict_edges: strict_g.edges,
            eps_edges: eps_g.edges,
            weights,
            labels: None,
            epsilon,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n);
        self.labels = Some(labels);
        self
    }

    pub fn n_vertices(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn n_strict_edges(&self) -> usize {
        self.strict_edges.len()
    }

    pub fn n_eps_edges(&self) -> usize {
        self.eps_edges.len()
    }

    pub fn strict_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.strict_edges.iter().copied()
    }

    pub fn eps_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.eps_edges.iter().copied()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weights_f64(&self) -> Vec<f64> {
        self.weights.iter().map(ratio_to_f64).collect()
    }

    pub fn label(&self, v: usize) -> Option<&str> {
        self.labels.as_ref().map(|l| l[v].as_str())
    }

    /// The two simple-graph views: `G'` keeps strict edges only, `G''` treats
    /// ε-edges as standard edges. Both share vertices and weights.
    pub fn strict_and_full_views(&self) -> (WeightedGraph, WeightedGraph) {
        let strict: Vec<_> = self.strict_edges.iter().copied().collect();
        let mut full = strict.clone();
        full.extend(self.eps_edges.iter().copied());
        let g1 = WeightedGraph::new(self.n, &strict, self.weights.clone()).expect("valid view");
        let g2 = WeightedGraph::new(self.n, &full, self.weights.clone()).expect("valid view");
        match &self.labels {
            Some(l) => (g1.with_labels(l.clone()), g2.with_labels(l.clone())),
            None => (g1, g2),
        }
    }
}

/// A clique: vertices pairwise adjacent in the host graph, stored sorted.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clique {
    pub members: Vec<usize>,
}

impl Clique {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Build the pentagon-family graph on `5d` vertices: a central clique
/// `{v_{i,1}}` of size `d`, plus a 5-cycle through each `v_{i,1}`.
/// Central vertices get weight 2, all others weight 1.
pub fn build_gd(d: usize) -> Result<WeightedGraph, GraphError> {
    if d < 3 {
        return Err(GraphError::InvalidDimension(d));
    }
    let n = 5 * d;
    let id = |i: usize, j: usize| 5 * (i - 1) + (j - 1);
    let mut edges = Vec::new();
    for i in 1..=d {
        for k in (i + 1)..=d {
            edges.push((id(i, 1), id(k, 1)));
        }
        for j in 1..=5 {
            let jn = if j == 5 { 1 } else { j + 1 };
            edges.push((id(i, j), id(i, jn)));
        }
    }
    let mut weights = vec![Ratio::from_integer(1); n];
    let mut labels = vec![String::new(); n];
    for i in 1..=d {
        weights[id(i, 1)] = Ratio::from_integer(2);
        for j in 1..=5 {
            labels[id(i, j)] = format!("v_{{{i},{j}}}");
        }
    }
    Ok(WeightedGraph::new(n, &edges, weights)?.with_labels(labels))
}

/// Vertex id of `v_{i,j}` in `build_gd(d)` (1-based `i`, `j`).
pub fn gd_vertex(i: usize, j: usize) -> usize {
    5 * (i - 1) + (j - 1)
}

/// The permutation of `build_gd(d)` that swaps cycle blocks `i1 <-> i2`
/// componentwise (an automorphism).
pub fn gd_block_swap(d: usize, i1: usize, i2: usize) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..5 * d).collect();
    for j in 1..=5 {
        perm[gd_vertex(i1, j)] = gd_vertex(i2, j);
        perm[gd_vertex(i2, j)] = gd_vertex(i1, j);
    }
    perm
}

/// All `d!` block permutations of `build_gd(d)`, lifted to vertex
/// permutations. Intended for small `d`; panics above `d = 8`.
pub fn gd_block_permutations(d: usize) -> Vec<Vec<usize>> {
    assert!(d <= 8, "factorially many permutations; refusing d > 8");
    let mut blocks: Vec<usize> = (1..=d).collect();
    let mut out = Vec::new();
    permutations(&mut blocks, 0, &mut |p| {
        let mut perm = vec![0usize; 5 * d];
        for (i, &pi) in p.iter().enumerate() {
            for j in 1..=5 {
                perm[gd_vertex(i + 1, j)] = gd_vertex(pi, j);
            }
        }
        out.push(perm);
    });
    out.sort();
    out
}

fn permutations(items: &mut Vec<usize>, k: usize, f: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        f(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, f);
        items.swap(k, i);
    }
}

/// The odd cycle `C_n` with unit weights.
pub fn build_odd_cycle(n: usize) -> Result<WeightedGraph, GraphError> {
    if n < 3 || n % 2 == 0 {
        return Err(GraphError::InvalidParameter(format!(
            "cycle length must be odd and at least 3, got {n}"
        )));
    }
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    WeightedGraph::unit_weights(n, &edges)
}

/// All inclusion-maximal cliques, each sorted, list in lexicographic order.
/// Bron–Kerbosch with pivoting; an isolated vertex yields a singleton clique.
pub fn enumerate_maximal_cliques(g: &WeightedGraph) -> Vec<Clique> {
    let n = g.n_vertices();
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut r = Vec::new();
    let p: BTreeSet<usize> = (0..n).collect();
    let x = BTreeSet::new();
    bron_kerbosch(g, &mut r, p, x, &mut out);
    out.sort();
    out.into_iter().map(|members| Clique { members }).collect()
}

fn bron_kerbosch(
    g: &WeightedGraph,
    r: &mut Vec<usize>,
    p: BTreeSet<usize>,
    x: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if p.is_empty() && x.is_empty() {
        let mut clique = r.clone();
        clique.sort_unstable();
        out.push(clique);
        return;
    }
    // Pivot: vertex of P ∪ X with most neighbours in P, lowest id on ties.
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| (p.iter().filter(|&&v| g.has_edge(u, v)).count(), usize::MAX - u))
        .expect("nonempty");
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !g.has_edge(pivot, v)).collect();
    let mut p = p;
    let mut x = x;
    for v in candidates {
        let nv: BTreeSet<usize> = g.neighbors(v).into_iter().collect();
        r.push(v);
        bron_kerbosch(
            g,
            r,
            p.intersection(&nv).copied().collect(),
            x.intersection(&nv).copied().collect(),
            out,
        );
        r.pop();
        p.remove(&v);
        x.insert(v);
    }
}

/// Expand a graph into its ε-orthogonality graph: one copy `v^(C)` per
/// (vertex, containing maximal clique), strict edges between copies in a
/// common clique, ε-edges across cliques, copy weight `w(v)/n_v`.
pub fn epsilon_expand(g: &WeightedGraph, epsilon: f64) -> Result<EpsilonGraph, GraphError> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(GraphError::InvalidParameter(format!(
            "epsilon must lie in [0,1), got {epsilon}"
        )));
    }
    let cliques = enumerate_maximal_cliques(g);
    // Copies ordered by (vertex, clique index): deterministic ids.
    let mut copy_of: Vec<(usize, usize)> = Vec::new();
    for v in 0..g.n_vertices() {
        for (ci, c) in cliques.iter().enumerate() {
            if c.contains(v) {
                copy_of.push((v, ci));
            }
        }
    }
    let n_eps = copy_of.len();
    let mut weights = Vec::with_capacity(n_eps);
    let mut labels = Vec::with_capacity(n_eps);
    for &(v, ci) in &copy_of {
        let nv = copy_of.iter().filter(|&&(u, _)| u == v).count() as i64;
        weights.push(g.weight(v) / Ratio::from_integer(nv));
        labels.push(match g.label(v) {
            Some(l) => format!("{l}^({ci})"),
            None => format!("{v}^({ci})"),
        });
    }
    let mut strict = Vec::new();
    let mut eps = Vec::new();
    for a in 0..n_eps {
        for b in (a + 1)..n_eps {
            let (v, cv) = copy_of[a];
            let (u, cu) = copy_of[b];
            if v == u || !g.has_edge(v, u) {
                continue;
            }
            if cv == cu {
                strict.push((a, b));
            } else {
                eps.push((a, b));
            }
        }
    }
    Ok(EpsilonGraph::new(n_eps, &strict, &eps, weights, epsilon)?.with_labels(labels))
}

// ---------------------------------------------------------------------------
// Text serialization
// ---------------------------------------------------------------------------

fn write_weight(w: Weight) -> String {
    if w.is_integer() {
        format!("{}", w.numer())
    } else {
        format!("{}/{}", w.numer(), w.denom())
    }
}

fn parse_weight(s: &str, line: usize) -> Result<Weight, GraphError> {
    let parse_int = |t: &str| {
        t.parse::<i64>().map_err(|_| GraphError::Parse {
            line,
            msg: format!("bad integer `{t}`"),
        })
    };
    match s.split_once('/') {
        Some((p, q)) => Ok(Ratio::new(parse_int(p)?, parse_int(q)?)),
        None => Ok(Ratio::from_integer(parse_int(s)?)),
    }
}

/// Line-oriented dump: header `graph <n> <m_strict> <m_eps>`, optional
/// `eps <value>` line, then `w <v> <weight>`, `e <u> <v>`, `xe <u> <v>`.
/// Round-trips bit-exactly (weights are rationals, ε uses shortest
/// round-trip float formatting).
pub fn serialize_epsilon_graph(g: &EpsilonGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph {} {} {}", g.n_vertices(), g.n_strict_edges(), g.n_eps_edges());
    let _ = writeln!(s, "eps {}", g.epsilon());
    for v in 0..g.n_vertices() {
        let _ = writeln!(s, "w {} {}", v, write_weight(g.weights()[v]));
    }
    for (u, v) in g.strict_edges() {
        let _ = writeln!(s, "e {u} {v}");
    }
    for (u, v) in g.eps_edges() {
        let _ = writeln!(s, "xe {u} {v}");
    }
    s
}

pub fn serialize_graph(g: &WeightedGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "graph {} {} 0", g.n_vertices(), g.n_edges());
    for v in 0..g.n_vertices() {
        let _ = writeln!(s, "w {} {}", v, write_weight(g.weight(v)));
    }
    for (u, v) in g.edges() {
        let _ = writeln!(s, "e {u} {v}");
    }
    s
}

pub fn parse_epsilon_graph(text: &str) -> Result<EpsilonGraph, GraphError> {
    let mut n = None;
    let mut epsilon = 0.0;
    let mut weights: Vec<Option<Weight>> = Vec::new();
    let mut strict = Vec::new();
    let mut eps_edges = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let parse_v = |t: &str| {
            t.parse::<usize>().map_err(|_| GraphError::Parse {
                line,
                msg: format!("bad vertex `{t}`"),
            })
        };
        match toks[0] {
            "graph" if toks.len() == 4 => {
                let nv = parse_v(toks[1])?;
                n = Some(nv);
                weights = vec![None; nv];
            }
            "eps" if toks.len() == 2 => {
                epsilon = toks[1].parse::<f64>().map_err(|_| GraphError::Parse {
                    line,
                    msg: format!("bad epsilon `{}`", toks[1]),
                })?;
            }
            "w" if toks.len() == 3 => {
                let v = parse_v(toks[1])?;
                if v >= weights.len() {
                    return Err(GraphError::Parse { line, msg: format!("vertex {v} out of range") });
                }
                weights[v] = Some(parse_weight(toks[2], line)?);
            }
            "e" if toks.len() == 3 => strict.push((parse_v(toks[1])?, parse_v(toks[2])?)),
            "xe" if toks.len() == 3 => eps_edges.push((parse_v(toks[1])?, parse_v(toks[2])?)),
            other => {
                return Err(GraphError::Parse { line, msg: format!("unrecognized record `{other}`") })
            }
        }
    }
    let n = n.ok_or(GraphError::Parse { line: 0, msg: "missing graph header".into() })?;
    let weights: Vec<Weight> = weights
        .into_iter()
        .enumerate()
        .map(|(v, w)| w.ok_or(GraphError::Parse { line: 0, msg: format!("missing weight for {v}") }))
        .collect::<Result<_, _>>()?;
    EpsilonGraph::new(n, &strict, &eps_edges, weights, epsilon)
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph, GraphError> {
    let ge = parse_epsilon_graph(text)?;
    if ge.n_eps_edges() != 0 {
        return Err(GraphError::Parse { line: 0, msg: "graph has epsilon edges".into() });
    }
    let (g, _) = ge.strict_and_full_views();
    Ok(g)
}

pub(crate) fn ratio_to_f64(r: &Weight) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}
