//! Constructive attacks on arrangement-based certification tests:
//! signed arrangements and their parity criterion, exact non-disturbing
//! realizations, sign transport along hyperedge paths, lifting a realization
//! through a topological-minor embedding of intersection graphs, the
//! deterministic-context attack on the square and pentagram arrangements,
//! and the maximally-entangled correlation identity.

use crate::graphs::{WeightedGraph, Weight};
use nalgebra::{DMatrix, DVector};
use num_rational::Ratio;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use std::collections::BTreeMap;
use thiserror::Error;

pub type Prob = Ratio<i64>;

#[derive(Debug, Error, PartialEq)]
pub enum AttackError {
    #[error("invalid arrangement: {0}")]
    InvalidArrangement(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid embedding: {0}")]
    InvalidEmbedding(String),
    #[error("projector must be real symmetric (complex projectors with P != P^T are unsupported)")]
    NotRealSymmetric,
    #[error("domain error: {0}")]
    Domain(String),
}

/// First violated non-disturbing condition, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NdViolation {
    Shape { hyperedge: usize, detail: String },
    Normalization { hyperedge: usize },
    Support { hyperedge: usize, outcome: Vec<i8> },
    MarginalMismatch { vertex: usize, e1: usize, e2: usize },
}

impl std::fmt::Display for NdViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NdViolation::Shape { hyperedge, detail } => {
                write!(f, "hyperedge {hyperedge}: {detail}")
            }
            NdViolation::Normalization { hyperedge } => {
                write!(f, "hyperedge {hyperedge}: table does not sum to 1")
            }
            NdViolation::Support { hyperedge, outcome } => {
                write!(f, "hyperedge {hyperedge}: outcome {outcome:?} violates the label parity")
            }
            NdViolation::MarginalMismatch { vertex, e1, e2 } => {
                write!(f, "vertex {vertex}: marginals differ between hyperedges {e1} and {e2}")
            }
        }
    }
}

/// A connected hypergraph in which every vertex lies in exactly two
/// hyperedges, with a ±1 label per hyperedge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedArrangement {
    n_vertices: usize,
    hyperedges: Vec<Vec<usize>>,
    labels: Vec<i8>,
}

impl SignedArrangement {
    pub fn new(
        n_vertices: usize,
        hyperedges: Vec<Vec<usize>>,
        labels: Vec<i8>,
    ) -> Result<Self, AttackError> {
        if labels.len() != hyperedges.len() {
            return Err(AttackError::InvalidArrangement(format!(
                "{} labels for {} hyperedges",
                labels.len(),
                hyperedges.len()
            )));
        }
        if let Some(l) = labels.iter().find(|&&l| l != 1 && l != -1) {
            return Err(AttackError::InvalidArrangement(format!("label {l} is not ±1")));
        }
        let mut hyperedges = hyperedges;
        let mut incidence = vec![0usize; n_vertices];
        for e in hyperedges.iter_mut() {
            e.sort_unstable();
            e.dedup();
            for &v in e.iter() {
                if v >= n_vertices {
                    return Err(AttackError::InvalidArrangement(format!(
                        "vertex {v} out of range"
                    )));
                }
                incidence[v] += 1;
            }
        }
        if let Some(v) = incidence.iter().position(|&c| c != 2) {
            return Err(AttackError::InvalidArrangement(format!(
                "vertex {v} lies in {} hyperedges, expected exactly 2",
                incidence[v]
            )));
        }
        let a = Self { n_vertices, hyperedges, labels };
        if !a.is_connected() {
            return Err(AttackError::InvalidArrangement("hypergraph is disconnected".into()));
        }
        Ok(a)
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_hyperedges(&self) -> usize {
        self.hyperedges.len()
    }

    pub fn hyperedge(&self, e: usize) -> &[usize] {
        &self.hyperedges[e]
    }

    pub fn label(&self, e: usize) -> i8 {
        self.labels[e]
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    /// The two hyperedges containing `v`, in increasing order.
    pub fn hyperedges_of(&self, v: usize) -> (usize, usize) {
        let mut found = [usize::MAX; 2];
        let mut k = 0;
        for (i, e) in self.hyperedges.iter().enumerate() {
            if e.binary_search(&v).is_ok() {
                found[k] = i;
                k += 1;
                if k == 2 {
                    break;
                }
            }
        }
        (found[0], found[1])
    }

    /// Shared vertices of two hyperedges, sorted.
    pub fn shared_vertices(&self, e1: usize, e2: usize) -> Vec<usize> {
        self.hyperedges[e1]
            .iter()
            .copied()
            .filter(|v| self.hyperedges[e2].binary_search(v).is_ok())
            .collect()
    }

    fn is_connected(&self) -> bool {
        let m = self.hyperedges.len();
        if m == 0 {
            return false;
        }
        let mut seen = vec![false; m];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(e) = stack.pop() {
            for f in 0..m {
                if !seen[f] && !self.shared_vertices(e, f).is_empty() {
                    seen[f] = true;
                    stack.push(f);
                }
            }
        }
        seen.into_iter().all(|b| b)
    }
}

/// Whether the arrangement is magic: the product of all labels is -1.
pub fn is_magic(a: &SignedArrangement) -> bool {
    a.labels.iter().map(|&l| l as i32).product::<i32>() == -1
}

/// Intersection graph: one vertex per hyperedge, an edge whenever two
/// hyperedges share an arrangement vertex, unit weights, vertex labels
/// carrying the hyperedge signs.
pub fn intersection_graph(a: &SignedArrangement) -> WeightedGraph {
    let m = a.n_hyperedges();
    let mut edges = Vec::new();
    for e1 in 0..m {
        for e2 in (e1 + 1)..m {
            if !a.shared_vertices(e1, e2).is_empty() {
                edges.push((e1, e2));
            }
        }
    }
    let labels = a.labels.iter().map(|&l| if l == 1 { "+1".into() } else { "-1".into() }).collect();
    WeightedGraph::new(m, &edges, vec![Weight::from_integer(1); m])
        .expect("intersection graph is well-formed")
        .with_labels(labels)
}

/// Per-hyperedge conditional outcome tables, keyed by ±1 strings aligned
/// with the sorted member list of each hyperedge. Probabilities are exact
/// rationals; absent keys are zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NdRealization {
    pub tables: Vec<BTreeMap<Vec<i8>, Prob>>,
}

impl NdRealization {
    /// Marginal probability that vertex `v` takes value `s` under the table
    /// of hyperedge `e` (which must contain `v`).
    pub fn marginal(&self, a: &SignedArrangement, e: usize, v: usize, s: i8) -> Prob {
        let pos = a.hyperedge(e).binary_search(&v).expect("vertex in hyperedge");
        self.tables[e]
            .iter()
            .filter(|(o, _)| o[pos] == s)
            .map(|(_, p)| *p)
            .sum()
    }
}

/// Check all non-disturbing conditions exactly; the outcome reports the
/// first violation found (shape, normalization, label-parity support, then
/// per-vertex marginal agreement).
pub fn verify_nd_realization(
    a: &SignedArrangement,
    r: &NdRealization,
) -> Result<(), NdViolation> {
    if r.tables.len() != a.n_hyperedges() {
        return Err(NdViolation::Shape {
            hyperedge: r.tables.len(),
            detail: format!(
                "{} tables for {} hyperedges",
                r.tables.len(),
                a.n_hyperedges()
            ),
        });
    }
    for (e, table) in r.tables.iter().enumerate() {
        let arity = a.hyperedge(e).len();
        let mut total = Prob::from_integer(0);
        for (o, p) in table {
            if o.len() != arity || o.iter().any(|&s| s != 1 && s != -1) {
                return Err(NdViolation::Shape {
                    hyperedge: e,
                    detail: format!("outcome {o:?} is not a ±1 string of length {arity}"),
                });
            }
            if *p < Prob::from_integer(0) {
                return Err(NdViolation::Shape {
                    hyperedge: e,
                    detail: format!("negative probability at {o:?}"),
                });
            }
            if *p > Prob::from_integer(0)
                && o.iter().map(|&s| s as i32).product::<i32>() != a.label(e) as i32
            {
                return Err(NdViolation::Support { hyperedge: e, outcome: o.clone() });
            }
            total += *p;
        }
        if total != Prob::from_integer(1) {
            return Err(NdViolation::Normalization { hyperedge: e });
        }
    }
    for v in 0..a.n_vertices() {
        let (e1, e2) = a.hyperedges_of(v);
        if r.marginal(a, e1, v, 1) != r.marginal(a, e2, v, 1) {
            return Err(NdViolation::MarginalMismatch { vertex: v, e1, e2 });
        }
    }
    Ok(())
}

fn table_from(entries: &[(&[i8], (i64, i64))]) -> BTreeMap<Vec<i8>, Prob> {
    entries
        .iter()
        .map(|(o, (p, q))| (o.to_vec(), Ratio::new(*p, *q)))
        .collect()
}

/// The four-cycle arrangement on four vertices and its equal/anti-correlated
/// half-half realization (the last hyperedge carries the -1 label).
pub fn base_k22() -> (SignedArrangement, NdRealization) {
    let a = SignedArrangement::new(
        4,
        vec![vec![0, 1], vec![2, 3], vec![0, 2], vec![1, 3]],
        vec![1, 1, 1, -1],
    )
    .expect("valid base");
    let half = |same: bool| {
        if same {
            table_from(&[(&[1, 1], (1, 2)), (&[-1, -1], (1, 2))])
        } else {
            table_from(&[(&[1, -1], (1, 2)), (&[-1, 1], (1, 2))])
        }
    };
    let r = NdRealization { tables: vec![half(true), half(true), half(true), half(false)] };
    (a, r)
}

/// The triangle arrangement on three vertices with its half-half realization
/// (third hyperedge labelled -1).
pub fn base_k3() -> (SignedArrangement, NdRealization) {
    let a = SignedArrangement::new(3, vec![vec![0, 1], vec![0, 2], vec![1, 2]], vec![1, 1, -1])
        .expect("valid base");
    let same = table_from(&[(&[1, 1], (1, 2)), (&[-1, -1], (1, 2))]);
    let anti = table_from(&[(&[1, -1], (1, 2)), (&[-1, 1], (1, 2))]);
    let r = NdRealization { tables: vec![same.clone(), same, anti] };
    (a, r)
}

/// Both base arrangements with their realizations.
pub fn base_realizations() -> ((SignedArrangement, NdRealization), (SignedArrangement, NdRealization))
{
    (base_k22(), base_k3())
}

/// The 3x3 square arrangement: nine vertices (cells, row-major), hyperedges
/// = three rows then three columns, the last column labelled -1.
pub fn magic_square() -> SignedArrangement {
    let rows = (0..3).map(|i| vec![3 * i, 3 * i + 1, 3 * i + 2]);
    let cols = (0..3).map(|j| vec![j, 3 + j, 6 + j]);
    SignedArrangement::new(9, rows.chain(cols).collect(), vec![1, 1, 1, 1, 1, -1])
        .expect("valid arrangement")
}

/// The five-line pentagram arrangement: ten vertices, one per pair of lines,
/// four vertices per line, the last line labelled -1.
pub fn magic_pentagram() -> SignedArrangement {
    let pair_id = |i: usize, j: usize| {
        // pairs (i,j), i<j in lexicographic order over 5 lines
        let (i, j) = (i.min(j), i.max(j));
        (0..i).map(|k| 4 - k).sum::<usize>() + (j - i - 1)
    };
    let lines: Vec<Vec<usize>> = (0..5)
        .map(|i| (0..5).filter(|&j| j != i).map(|j| pair_id(i, j)).collect())
        .collect();
    SignedArrangement::new(10, lines, vec![1, 1, 1, 1, -1]).expect("valid arrangement")
}

/// Flip the labels of the two hyperedges of `pair` and update the
/// realization along a connecting hyperedge path. Each adjacent step negates
/// the shared-vertex coordinate in both adjacent tables; intermediate label
/// flips cancel, so only the endpoints change sign.
pub fn flip_labels_along_path(
    a: &SignedArrangement,
    r: &NdRealization,
    pair: (usize, usize),
) -> Result<(SignedArrangement, NdRealization), AttackError> {
    let (ea, eb) = pair;
    let m = a.n_hyperedges();
    if ea >= m || eb >= m || ea == eb {
        return Err(AttackError::Domain(format!("invalid hyperedge pair ({ea},{eb})")));
    }
    // BFS path in the intersection graph (deterministic neighbor order).
    let mut prev = vec![usize::MAX; m];
    let mut queue = std::collections::VecDeque::from([ea]);
    let mut seen = vec![false; m];
    seen[ea] = true;
    while let Some(e) = queue.pop_front() {
        if e == eb {
            break;
        }
        for f in 0..m {
            if !seen[f] && !a.shared_vertices(e, f).is_empty() {
                seen[f] = true;
                prev[f] = e;
                queue.push_back(f);
            }
        }
    }
    if !seen[eb] {
        return Err(AttackError::InvalidArrangement("no connecting path".into()));
    }
    let mut path = vec![eb];
    while *path.last().unwrap() != ea {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();

    let mut labels = a.labels.clone();
    let mut tables = r.tables.clone();
    for w in path.windows(2) {
        let (x, y) = (w[0], w[1]);
        let v = a.shared_vertices(x, y)[0];
        labels[x] = -labels[x];
        labels[y] = -labels[y];
        for &e in &[x, y] {
            let pos = a.hyperedge(e).binary_search(&v).expect("shared vertex");
            tables[e] = tables[e]
                .iter()
                .map(|(o, p)| {
                    let mut o2 = o.clone();
                    o2[pos] = -o2[pos];
                    (o2, *p)
                })
                .collect();
        }
    }
    let a2 = SignedArrangement::new(a.n_vertices, a.hyperedges.clone(), labels)?;
    Ok((a2, NdRealization { tables }))
}

/// An embedding of one arrangement's intersection graph into another's as a
/// topological minor. `vertex_map[h]` is the image of base hyperedge `h`;
/// `edge_paths[x]` (indexed by base vertex `x`, which is an edge of the base
/// intersection graph) is the hyperedge path joining the images of the two
/// base hyperedges containing `x`, endpoints included.
#[derive(Debug, Clone)]
pub struct MinorEmbedding {
    pub vertex_map: Vec<usize>,
    pub edge_paths: Vec<Vec<usize>>,
}

fn resolve_path_vertices(
    target: &SignedArrangement,
    path: &[usize],
) -> Result<Vec<usize>, AttackError> {
    let mut out = Vec::with_capacity(path.len().saturating_sub(1));
    for w in path.windows(2) {
        let shared = target.shared_vertices(w[0], w[1]);
        match shared.first() {
            Some(&v) => out.push(v),
            None => {
                return Err(AttackError::InvalidEmbedding(format!(
                    "hyperedges {} and {} do not intersect",
                    w[0], w[1]
                )))
            }
        }
    }
    Ok(out)
}

fn validate_embedding(
    base: &SignedArrangement,
    target: &SignedArrangement,
    emb: &MinorEmbedding,
) -> Result<(), AttackError> {
    if emb.vertex_map.len() != base.n_hyperedges() {
        return Err(AttackError::InvalidEmbedding("vertex map has the wrong length".into()));
    }
    let mut used = vec![false; target.n_hyperedges()];
    for &t in &emb.vertex_map {
        if t >= target.n_hyperedges() || used[t] {
            return Err(AttackError::InvalidEmbedding("vertex map is not injective".into()));
        }
        used[t] = true;
    }
    if emb.edge_paths.len() != base.n_vertices() {
        return Err(AttackError::InvalidEmbedding("one path per base vertex required".into()));
    }
    let mut carried_seen = vec![false; target.n_vertices()];
    for (x, path) in emb.edge_paths.iter().enumerate() {
        let (h1, h2) = base.hyperedges_of(x);
        if path.len() < 2
            || path[0] != emb.vertex_map[h1]
            || *path.last().unwrap() != emb.vertex_map[h2]
        {
            return Err(AttackError::InvalidEmbedding(format!(
                "path for base vertex {x} does not join the images of its hyperedges"
            )));
        }
        for &e in &path[1..path.len() - 1] {
            if emb.vertex_map.contains(&e) {
                return Err(AttackError::InvalidEmbedding(format!(
                    "path for base vertex {x} passes through a branch image"
                )));
            }
        }
        for v in resolve_path_vertices(target, path)? {
            if carried_seen[v] {
                return Err(AttackError::InvalidEmbedding(format!(
                    "target vertex {v} carried by two paths"
                )));
            }
            carried_seen[v] = true;
        }
    }
    Ok(())
}

/// Lift a non-disturbing realization through a minor embedding.
///
/// The target labels are put in the normal form matching the construction:
/// each image hyperedge carries its base label, every other hyperedge
/// carries +1. Path-carried vertices copy the base outcome along their path;
/// all other vertices output +1 deterministically. The returned arrangement
/// holds those normal-form labels alongside the lifted realization.
pub fn lift_realization(
    base: &SignedArrangement,
    base_r: &NdRealization,
    target: &SignedArrangement,
    emb: &MinorEmbedding,
) -> Result<(SignedArrangement, NdRealization), AttackError> {
    validate_embedding(base, target, emb)?;

    let mut labels = vec![1i8; target.n_hyperedges()];
    for (h, &t) in emb.vertex_map.iter().enumerate() {
        labels[t] = base.label(h);
    }
    let normal = SignedArrangement::new(target.n_vertices, target.hyperedges.clone(), labels)?;

    // classify target hyperedges: image of a base hyperedge, or path interior
    let mut image_of = vec![usize::MAX; target.n_hyperedges()];
    for (h, &t) in emb.vertex_map.iter().enumerate() {
        image_of[t] = h;
    }
    // target vertices carried by each path, in path order
    let mut path_vertices: Vec<Vec<usize>> = Vec::with_capacity(base.n_vertices());
    for path in &emb.edge_paths {
        path_vertices.push(resolve_path_vertices(target, path)?);
    }

    let mut tables = Vec::with_capacity(target.n_hyperedges());
    for f in 0..target.n_hyperedges() {
        let members = target.hyperedge(f);
        let mut table: BTreeMap<Vec<i8>, Prob> = BTreeMap::new();
        if image_of[f] != usize::MAX {
            let h = image_of[f];
            // slot of each base vertex of h inside f's member list
            let base_members = base.hyperedge(h);
            let slots: Vec<usize> = base_members
                .iter()
                .map(|&x| {
                    // the path of x touches f at its first or last vertex
                    let vs = &path_vertices[x];
                    let v = if emb.edge_paths[x][0] == f { vs[0] } else { *vs.last().unwrap() };
                    members.binary_search(&v).expect("carried vertex in image hyperedge")
                })
                .collect();
            for (o, p) in &base_r.tables[h] {
                let mut lifted = vec![1i8; members.len()];
                for (slot, &val) in slots.iter().zip(o.iter()) {
                    lifted[*slot] = val;
                }
                table.insert(lifted, *p);
            }
        } else {
            // interior hyperedges of a path copy their base vertex's value
            // onto the in/out vertices; everything else is +1. A hyperedge on
            // no path outputs the all-ones string.
            let mut on_path: Option<(usize, usize, usize)> = None; // (x, v_in, v_out)
            for (x, path) in emb.edge_paths.iter().enumerate() {
                if let Some(i) = path[1..path.len() - 1].iter().position(|&e| e == f) {
                    let vs = &path_vertices[x];
                    on_path = Some((x, vs[i], vs[i + 1]));
                    break;
                }
            }
            match on_path {
                Some((x, vin, vout)) => {
                    let si = members.binary_search(&vin).expect("in-vertex");
                    let so = members.binary_search(&vout).expect("out-vertex");
                    let (h1, _) = base.hyperedges_of(x);
                    for s in [1i8, -1] {
                        let p = base_r.marginal(base, h1, x, s);
                        if p > Prob::from_integer(0) {
                            let mut o = vec![1i8; members.len()];
                            o[si] = s;
                            o[so] = s;
                            table.insert(o, p);
                        }
                    }
                }
                None => {
                    table.insert(vec![1i8; members.len()], Prob::from_integer(1));
                }
            }
        }
        tables.push(table);
    }
    Ok((normal, NdRealization { tables }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MagicTarget {
    MagicSquare,
    Pentagram,
}

/// Outcome of the deterministic-context attack: a verified realization for
/// the target arrangement whose table on the chosen context is a point mass.
#[derive(Debug, Clone)]
pub struct ContextAttack {
    pub arrangement: SignedArrangement,
    pub realization: NdRealization,
    pub context: usize,
    /// Deterministic outcome per vertex of the chosen context, aligned with
    /// its sorted member list.
    pub predicted: Vec<i8>,
}

/// Produce a non-disturbing realization of the chosen magic arrangement that
/// fixes the outcomes of context `context_id` deterministically.
///
/// The embedding avoids the chosen context entirely (it hosts the base
/// arrangement on the remaining hyperedges), so the lifted realization gives
/// that context the all-ones table; transporting the normal-form labels to
/// the arrangement's actual labels keeps the table a point mass.
pub fn deterministic_context_attack(
    target_kind: MagicTarget,
    context_id: usize,
) -> Result<ContextAttack, AttackError> {
    let target = match target_kind {
        MagicTarget::MagicSquare => magic_square(),
        MagicTarget::Pentagram => magic_pentagram(),
    };
    if context_id >= target.n_hyperedges() {
        return Err(AttackError::Domain(format!(
            "context {context_id} out of range for {} hyperedges",
            target.n_hyperedges()
        )));
    }
    let (base, base_r) = match target_kind {
        MagicTarget::MagicSquare => base_k22(),
        MagicTarget::Pentagram => base_k3(),
    };
    let emb = match target_kind {
        MagicTarget::MagicSquare => {
            // hyperedges 0..3 are rows, 3..6 columns; pick the two remaining
            // rows and two remaining columns, avoiding the chosen context.
            let rows: Vec<usize> = (0..3).filter(|&r| r != context_id).take(2).collect();
            let cols: Vec<usize> =
                (3..6).filter(|&c| c != context_id).take(2).collect();
            // base cycle: e0={v0,v1}, e1={v2,v3}, e2={v0,v2}, e3={v1,v3};
            // map e0,e1 to rows and e2,e3 to columns, paths are single edges.
            let vertex_map = vec![rows[0], rows[1], cols[0], cols[1]];
            let edge_paths = vec![
                vec![rows[0], cols[0]],
                vec![rows[0], cols[1]],
                vec![rows[1], cols[0]],
                vec![rows[1], cols[1]],
            ];
            MinorEmbedding { vertex_map, edge_paths }
        }
        MagicTarget::Pentagram => {
            let lines: Vec<usize> = (0..5).filter(|&l| l != context_id).take(3).collect();
            let vertex_map = lines.clone();
            let edge_paths = vec![
                vec![lines[0], lines[1]],
                vec![lines[0], lines[2]],
                vec![lines[1], lines[2]],
            ];
            MinorEmbedding { vertex_map, edge_paths }
        }
    };
    let (mut arr, mut real) = lift_realization(&base, &base_r, &target, &emb)?;

    // Transport the normal-form labels to the target's actual labels.
    let mut diff: Vec<usize> =
        (0..target.n_hyperedges()).filter(|&e| arr.label(e) != target.label(e)).collect();
    if diff.len() % 2 != 0 {
        return Err(AttackError::InvalidArrangement(
            "label parities disagree; transport impossible".into(),
        ));
    }
    while let (Some(b), Some(a)) = (diff.pop(), diff.pop()) {
        let (na, nr) = flip_labels_along_path(&arr, &real, (a, b))?;
        arr = na;
        real = nr;
    }
    debug_assert_eq!(arr.labels(), target.labels());

    let table = &real.tables[context_id];
    if table.len() != 1 {
        return Err(AttackError::InvalidArrangement(
            "attack table on the chosen context is not deterministic".into(),
        ));
    }
    let predicted = table.keys().next().expect("point mass").clone();
    Ok(ContextAttack { arrangement: arr, realization: real, context: context_id, predicted })
}

/// `<A ⊗ A>` on the maximally entangled state for `A = I - 2P` with `P` a
/// real rank-one projector in dimension `d`; equals 1 identically. The
/// projector direction is generated deterministically from `index`.
pub fn si_c_entangled_check(d: usize, index: u64) -> Result<f64, AttackError> {
    if d < 2 {
        return Err(AttackError::Domain(format!("dimension must be >= 2, got {d}")));
    }
    let u = deterministic_direction(d, index);
    let p = &u * u.transpose();
    entangled_correlation(&p)
}

/// `<psi| A ⊗ A |psi>` with `A = I - 2P` on `|psi> = d^{-1/2} sum_i |ii>`.
/// `P` must be real symmetric; the transpose pairing of the maximally
/// entangled state makes the identity `<A ⊗ A> = 1` specific to `P = P^T`.
pub fn entangled_correlation(p: &DMatrix<f64>) -> Result<f64, AttackError> {
    let d = p.nrows();
    if p.ncols() != d {
        return Err(AttackError::Shape(format!("projector is {}x{}", d, p.ncols())));
    }
    if (p - p.transpose()).norm() > 1e-12 {
        return Err(AttackError::NotRealSymmetric);
    }
    let a = DMatrix::<f64>::identity(d, d) - 2.0 * p;
    // <psi| X ⊗ Y |psi> with psi = d^{-1/2} sum |ii>
    let mut acc = 0.0;
    for i in 0..d {
        for j in 0..d {
            acc += a[(i, j)] * a[(i, j)];
        }
    }
    Ok(acc / d as f64)
}

/// A deterministic pseudo-random unit vector in `R^d` keyed by `index`.
pub fn deterministic_direction(d: usize, index: u64) -> DVector<f64> {
    let mut rng = ChaCha12Rng::seed_from_u64(index.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(d as u64));
    loop {
        let v = DVector::from_fn(d, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
        let n = v.norm();
        if n > 1e-3 {
            return v / n;
        }
    }
}

// ---------------------------------------------------------------------------
// Text format: `arrangement <n> <m>` then `he <label> <v...>` lines.
// ---------------------------------------------------------------------------

pub fn serialize_arrangement(a: &SignedArrangement) -> String {
    use std::fmt::Write as _;
    let mut s = String::new();
    let _ = writeln!(s, "arrangement {} {}", a.n_vertices(), a.n_hyperedges());
    for e in 0..a.n_hyperedges() {
        let verts: Vec<String> = a.hyperedge(e).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "he {} {}", a.label(e), verts.join(" "));
    }
    s
}

pub fn parse_arrangement(text: &str) -> Result<SignedArrangement, AttackError> {
    let mut n = None;
    let mut hyperedges = Vec::new();
    let mut labels = Vec::new();
    for raw in text.lines() {
        let toks: Vec<&str> = raw.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        match toks[0] {
            "arrangement" if toks.len() == 3 => {
                n = Some(toks[1].parse::<usize>().map_err(|_| {
                    AttackError::InvalidArrangement(format!("bad vertex count `{}`", toks[1]))
                })?);
            }
            "he" if toks.len() >= 3 => {
                let label: i8 = toks[1].parse().map_err(|_| {
                    AttackError::InvalidArrangement(format!("bad label `{}`", toks[1]))
                })?;
                let verts = toks[2..]
                    .iter()
                    .map(|t| {
                        t.parse::<usize>().map_err(|_| {
                            AttackError::InvalidArrangement(format!("bad vertex `{t}`"))
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                labels.push(label);
                hyperedges.push(verts);
            }
            other => {
                return Err(AttackError::InvalidArrangement(format!(
                    "unrecognized record `{other}`"
                )))
            }
        }
    }
    let n = n.ok_or_else(|| AttackError::InvalidArrangement("missing header".into()))?;
    SignedArrangement::new(n, hyperedges, labels)
}
