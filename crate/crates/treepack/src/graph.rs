//! Host-graph representations and exact density/degree primitives.
//!
//! Two host types: [`SimpleGraph`] (no loops, no parallel edges) and
//! [`MultiGraph`] (no loops, positive multiplicities). Both are immutable
//! after construction: every "mutation" ([`remove_edges`], [`induced`])
//! returns a new value, so graphs are safe to share across threads.
//!
//! Densities are exact rationals ([`num::BigRational`]); all threshold
//! comparisons downstream stay free of floating-point drift. The pair
//! count `e(U, V)` uses the overlap convention: edges with both endpoints
//! in `U ∩ V` count twice.

use num::BigRational;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

/// Vertex handle: an index in `[0, n)`, valid only relative to one graph.
pub type VertexId = usize;

/// Errors from graph construction and the exact primitives.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {v} out of range (n = {n})")]
    VertexOutOfRange { v: usize, n: usize },
    #[error("loop {v}-{v} not allowed")]
    Loop { v: usize },
    #[error("duplicate edge {u}-{v}")]
    DuplicateEdge { u: usize, v: usize },
    #[error("edge {u}-{v} not present in the graph")]
    MissingEdge { u: usize, v: usize },
    #[error("{which} must be nonempty")]
    EmptySet { which: &'static str },
    #[error("codegree of a vertex with itself is undefined (v = {v})")]
    CodegreeSelf { v: usize },
    #[error("vertex sets must be disjoint but share {v}")]
    NotDisjoint { v: usize },
}

fn check_vertex(v: usize, n: usize) -> Result<(), GraphError> {
    if v >= n {
        Err(GraphError::VertexOutOfRange { v, n })
    } else {
        Ok(())
    }
}

/// Canonical index of the unordered pair `{u, v}` (`u != v`) among all
/// pairs on `[0, n)`: pairs sorted by larger endpoint, then smaller.
fn pair_index(u: usize, v: usize) -> usize {
    let (lo, hi) = if u < v { (u, v) } else { (v, u) };
    hi * (hi - 1) / 2 + lo
}

/// Undirected simple graph: no loops, no parallel edges.
///
/// Adjacency lists are kept sorted; edge membership is O(1) via a packed
/// bitset indexed by canonical pair order.
#[derive(Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    n: usize,
    m: usize,
    adj: Vec<Vec<VertexId>>,
    bits: Vec<u64>,
}

impl std::fmt::Debug for SimpleGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "SimpleGraph(n={}, m={})", self.n, self.m)
    }
}

impl SimpleGraph {
    /// The empty graph on `n` vertices.
    pub fn new(n: usize) -> Self {
        let nbits = if n < 2 { 0 } else { n * (n - 1) / 2 };
        SimpleGraph {
            n,
            m: 0,
            adj: vec![Vec::new(); n],
            bits: vec![0u64; nbits.div_ceil(64)],
        }
    }

    /// Build from an edge list. Rejects loops, duplicates (in either
    /// orientation), and out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut g = SimpleGraph::new(n);
        for &(u, v) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u == v {
                return Err(GraphError::Loop { v });
            }
            if g.has_edge(u, v) {
                let (lo, hi) = if u < v { (u, v) } else { (v, u) };
                return Err(GraphError::DuplicateEdge { u: lo, v: hi });
            }
            g.insert_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        if u == v || u >= self.n || v >= self.n {
            return false;
        }
        let i = pair_index(u, v);
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v].len()
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbours(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v]
    }

    /// All edges as `(u, v)` with `u < v`, ascending by `u` then `v`.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// Insert without validation; callers guarantee the edge is absent.
    pub(crate) fn insert_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(u != v && u < self.n && v < self.n && !self.has_edge(u, v));
        let i = pair_index(u, v);
        self.bits[i / 64] |= 1 << (i % 64);
        let pu = self.adj[u].partition_point(|&w| w < v);
        self.adj[u].insert(pu, v);
        let pv = self.adj[v].partition_point(|&w| w < u);
        self.adj[v].insert(pv, u);
        self.m += 1;
    }

    /// Delete without validation; callers guarantee the edge is present.
    pub(crate) fn delete_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert!(self.has_edge(u, v));
        let i = pair_index(u, v);
        self.bits[i / 64] &= !(1 << (i % 64));
        let pu = self.adj[u].binary_search(&v).unwrap();
        self.adj[u].remove(pu);
        let pv = self.adj[v].binary_search(&u).unwrap();
        self.adj[v].remove(pv);
        self.m -= 1;
    }
}

/// Undirected multigraph: no loops, per-pair multiplicities ≥ 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiGraph {
    n: usize,
    m: usize,
    mult: BTreeMap<(VertexId, VertexId), usize>,
    deg: Vec<usize>,
}

impl MultiGraph {
    /// Build from an edge list; repeats accumulate multiplicity.
    pub fn from_edges(n: usize, edges: &[(VertexId, VertexId)]) -> Result<Self, GraphError> {
        let mut mult = BTreeMap::new();
        let mut deg = vec![0usize; n];
        for &(u, v) in edges {
            check_vertex(u, n)?;
            check_vertex(v, n)?;
            if u == v {
                return Err(GraphError::Loop { v });
            }
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            *mult.entry((lo, hi)).or_insert(0) += 1;
            deg[u] += 1;
            deg[v] += 1;
        }
        Ok(MultiGraph {
            n,
            m: edges.len(),
            mult,
            deg,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Edge count with multiplicity.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn multiplicity(&self, u: VertexId, v: VertexId) -> usize {
        if u == v {
            return 0;
        }
        let key = if u < v { (u, v) } else { (v, u) };
        self.mult.get(&key).copied().unwrap_or(0)
    }

    /// Degree counting multiplicity.
    pub fn degree(&self, v: VertexId) -> usize {
        self.deg[v]
    }

    /// Distinct underlying pairs with their multiplicities, ascending.
    pub fn edges_with_multiplicity(&self) -> impl Iterator<Item = ((VertexId, VertexId), usize)> + '_ {
        self.mult.iter().map(|(&e, &k)| (e, k))
    }
}

/// A view of the bipartite subgraph of `host` between disjoint sets `A`, `B`.
#[derive(Clone, Debug)]
pub struct BipartitionView<'g> {
    pub host: &'g SimpleGraph,
    pub a: Vec<VertexId>,
    pub b: Vec<VertexId>,
}

impl<'g> BipartitionView<'g> {
    /// Validates range and disjointness; sides are deduplicated and sorted.
    pub fn new(
        host: &'g SimpleGraph,
        a: &[VertexId],
        b: &[VertexId],
    ) -> Result<Self, GraphError> {
        let sa = to_set(a, host.n())?;
        let sb = to_set(b, host.n())?;
        if let Some(&v) = sa.intersection(&sb).next() {
            return Err(GraphError::NotDisjoint { v });
        }
        Ok(BipartitionView {
            host,
            a: sa.into_iter().collect(),
            b: sb.into_iter().collect(),
        })
    }

    /// Edges of the host with one endpoint in each side, as `(a_side, b_side)`.
    pub fn edges_across(&self) -> Vec<(VertexId, VertexId)> {
        let bset: BTreeSet<VertexId> = self.b.iter().copied().collect();
        let mut out = Vec::new();
        for &u in &self.a {
            for &v in self.host.neighbours(u) {
                if bset.contains(&v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn e(&self) -> usize {
        self.edges_across().len()
    }
}

fn to_set(xs: &[VertexId], n: usize) -> Result<BTreeSet<VertexId>, GraphError> {
    let mut s = BTreeSet::new();
    for &x in xs {
        check_vertex(x, n)?;
        s.insert(x);
    }
    Ok(s)
}

/// `e(U, V)` with the overlap convention:
/// `e(U∖V, V) + e(V∖U, U∩V) + 2·e(G[U∩V])`.
/// Edges inside the intersection count twice. Inputs are treated as sets.
pub fn pair_edge_count(
    g: &SimpleGraph,
    us: &[VertexId],
    vs: &[VertexId],
) -> Result<u64, GraphError> {
    pair_edge_count_by(g.n, us, vs, |u, v| u64::from(g.has_edge(u, v)))
}

/// `e(U, V)` on a multigraph: the overlap convention with each edge
/// contributing its multiplicity.
pub fn pair_edge_count_multi(
    g: &MultiGraph,
    us: &[VertexId],
    vs: &[VertexId],
) -> Result<u64, GraphError> {
    pair_edge_count_by(g.n, us, vs, |u, v| g.multiplicity(u, v) as u64)
}

fn pair_edge_count_by(
    n: usize,
    us: &[VertexId],
    vs: &[VertexId],
    weight: impl Fn(VertexId, VertexId) -> u64,
) -> Result<u64, GraphError> {
    if us.is_empty() {
        return Err(GraphError::EmptySet { which: "U" });
    }
    if vs.is_empty() {
        return Err(GraphError::EmptySet { which: "V" });
    }
    let su = to_set(us, n)?;
    let sv = to_set(vs, n)?;
    let inter: Vec<VertexId> = su.intersection(&sv).copied().collect();
    let u_only: Vec<VertexId> = su.difference(&sv).copied().collect();
    let v_only: Vec<VertexId> = sv.difference(&su).copied().collect();

    let mut e = 0u64;
    // e(U∖V, V): the sides are disjoint, so this is a plain bipartite count.
    for &u in &u_only {
        for &v in &sv {
            e += weight(u, v);
        }
    }
    // e(V∖U, U∩V)
    for &u in &v_only {
        for &v in &inter {
            e += weight(u, v);
        }
    }
    // 2·e(G[U∩V])
    for (i, &u) in inter.iter().enumerate() {
        for &v in &inter[i + 1..] {
            e += 2 * weight(u, v);
        }
    }
    Ok(e)
}

/// Pair density `e(U, V) / (|U|·|V|)` as an exact rational.
pub fn pair_density(
    g: &SimpleGraph,
    us: &[VertexId],
    vs: &[VertexId],
) -> Result<BigRational, GraphError> {
    let e = pair_edge_count(g, us, vs)?;
    let su = to_set(us, g.n)?;
    let sv = to_set(vs, g.n)?;
    Ok(ratio(e, (su.len() * sv.len()) as u64))
}

/// Pair density on a multigraph, multiplicities included.
pub fn pair_density_multi(
    g: &MultiGraph,
    us: &[VertexId],
    vs: &[VertexId],
) -> Result<BigRational, GraphError> {
    let e = pair_edge_count_multi(g, us, vs)?;
    let su = to_set(us, g.n)?;
    let sv = to_set(vs, g.n)?;
    Ok(ratio(e, (su.len() * sv.len()) as u64))
}

/// Exact rational `num / den`.
pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(num.into(), den.into())
}

/// Number of neighbours of `v` inside `U`.
pub fn degree_into(g: &SimpleGraph, v: VertexId, us: &[VertexId]) -> Result<usize, GraphError> {
    check_vertex(v, g.n)?;
    let su = to_set(us, g.n)?;
    Ok(g.neighbours(v).iter().filter(|&&w| su.contains(&w)).count())
}

/// Number of common neighbours of `u` and `v` inside `U`; `u` and `v`
/// must be distinct.
pub fn codegree_into(
    g: &SimpleGraph,
    u: VertexId,
    v: VertexId,
    us: &[VertexId],
) -> Result<usize, GraphError> {
    check_vertex(u, g.n)?;
    check_vertex(v, g.n)?;
    if u == v {
        return Err(GraphError::CodegreeSelf { v });
    }
    let su = to_set(us, g.n)?;
    Ok(g.neighbours(v)
        .iter()
        .filter(|&&w| su.contains(&w) && g.has_edge(u, w))
        .count())
}

/// A new graph with the listed edges removed. Every listed edge must be
/// present.
pub fn remove_edges(
    g: &SimpleGraph,
    remove: &[(VertexId, VertexId)],
) -> Result<SimpleGraph, GraphError> {
    let mut out = g.clone();
    for &(u, v) in remove {
        check_vertex(u, g.n)?;
        check_vertex(v, g.n)?;
        if !out.has_edge(u, v) {
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            return Err(GraphError::MissingEdge { u: lo, v: hi });
        }
        out.delete_edge(u, v);
    }
    Ok(out)
}

/// The subgraph induced on `U`, renumbered so that the i-th smallest
/// element of `U` becomes vertex `i`.
pub fn induced(g: &SimpleGraph, us: &[VertexId]) -> Result<SimpleGraph, GraphError> {
    Ok(induced_with_map(g, us)?.0)
}

/// [`induced`] plus the renumbering: `map[i]` is the original id of new
/// vertex `i`.
pub fn induced_with_map(
    g: &SimpleGraph,
    us: &[VertexId],
) -> Result<(SimpleGraph, Vec<VertexId>), GraphError> {
    let su = to_set(us, g.n)?;
    let map: Vec<VertexId> = su.iter().copied().collect();
    let back: BTreeMap<VertexId, usize> =
        map.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut out = SimpleGraph::new(map.len());
    for (i, &v) in map.iter().enumerate() {
        for &w in g.neighbours(v) {
            if let Some(&j) = back.get(&w) {
                if j > i {
                    out.insert_edge(i, j);
                }
            }
        }
    }
    Ok((out, map))
}

/// Maximum degree of the subgraph spanned by an edge list.
pub fn max_degree_of_edges(edges: &[(VertexId, VertexId)]) -> usize {
    let mut deg: BTreeMap<VertexId, usize> = BTreeMap::new();
    for &(u, v) in edges {
        *deg.entry(u).or_insert(0) += 1;
        *deg.entry(v).or_insert(0) += 1;
    }
    deg.values().copied().max().unwrap_or(0)
}

/// Vertex sets of the connected components, each ascending; components
/// ordered by smallest vertex.
pub fn components(g: &SimpleGraph) -> Vec<Vec<VertexId>> {
    let mut seen = vec![false; g.n()];
    let mut out = Vec::new();
    for s in 0..g.n() {
        if seen[s] {
            continue;
        }
        let mut comp = vec![s];
        seen[s] = true;
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in g.neighbours(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// BFS distances from `src`; `None` for unreachable vertices.
pub fn bfs_distances(g: &SimpleGraph, src: VertexId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    dist[src] = Some(0);
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in g.neighbours(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

pub fn is_connected(g: &SimpleGraph) -> bool {
    components(g).len() <= 1
}

/// Errors from the text format parser, tagged with 1-based line numbers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextFormatError {
    #[error("line {line}: expected \"{expected}\", got \"{got}\"")]
    Malformed {
        line: usize,
        expected: &'static str,
        got: String,
    },
    #[error("line {line}: vertex {v} out of range (n = {n})")]
    VertexOutOfRange { line: usize, v: usize, n: usize },
    #[error("line {line}: loop {v}-{v} not allowed")]
    Loop { line: usize, v: usize },
    #[error("line {line}: duplicate edge {u}-{v} (parse as a multigraph to allow repeats)")]
    DuplicateEdge { line: usize, u: usize, v: usize },
    #[error("expected {expected} edge lines, found {found}")]
    WrongEdgeCount { expected: usize, found: usize },
}

/// Parse the graph text format: a header line `n m`, then `m` lines `u v`
/// with 0-based endpoints. Blank lines and lines starting with `#` are
/// ignored. Repeated edges are rejected here; use
/// [`parse_multigraph_text`] to accept them.
pub fn parse_graph_text(text: &str) -> Result<SimpleGraph, TextFormatError> {
    let (n, edges) = parse_edge_lines(text, false)?;
    let mut g = SimpleGraph::new(n);
    for (line, u, v) in edges {
        if g.has_edge(u, v) {
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            return Err(TextFormatError::DuplicateEdge { line, u: lo, v: hi });
        }
        g.insert_edge(u, v);
    }
    Ok(g)
}

/// Parse the same format as [`parse_graph_text`] with repeats allowed.
pub fn parse_multigraph_text(text: &str) -> Result<MultiGraph, TextFormatError> {
    let (n, edges) = parse_edge_lines(text, true)?;
    let pairs: Vec<(VertexId, VertexId)> = edges.iter().map(|&(_, u, v)| (u, v)).collect();
    // Range and loop errors were already reported with line numbers.
    Ok(MultiGraph::from_edges(n, &pairs).expect("validated during parsing"))
}

#[allow(clippy::type_complexity)]
fn parse_edge_lines(
    text: &str,
    _allow_repeats: bool,
) -> Result<(usize, Vec<(usize, VertexId, VertexId)>), TextFormatError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or(TextFormatError::Malformed {
        line: 1,
        expected: "n m",
        got: String::new(),
    })?;
    let mut it = header.split_whitespace();
    let n: usize = parse_int(it.next(), hline, "n m", header)?;
    let m: usize = parse_int(it.next(), hline, "n m", header)?;
    if it.next().is_some() {
        return Err(TextFormatError::Malformed {
            line: hline,
            expected: "n m",
            got: header.to_string(),
        });
    }

    let mut edges = Vec::with_capacity(m);
    for (line, l) in lines {
        if edges.len() == m {
            return Err(TextFormatError::WrongEdgeCount {
                expected: m,
                found: m + 1,
            });
        }
        let mut it = l.split_whitespace();
        let u: usize = parse_int(it.next(), line, "u v", l)?;
        let v: usize = parse_int(it.next(), line, "u v", l)?;
        if it.next().is_some() {
            return Err(TextFormatError::Malformed {
                line,
                expected: "u v",
                got: l.to_string(),
            });
        }
        if u >= n {
            return Err(TextFormatError::VertexOutOfRange { line, v: u, n });
        }
        if v >= n {
            return Err(TextFormatError::VertexOutOfRange { line, v, n });
        }
        if u == v {
            return Err(TextFormatError::Loop { line, v });
        }
        edges.push((line, u, v));
    }
    if edges.len() != m {
        return Err(TextFormatError::WrongEdgeCount {
            expected: m,
            found: edges.len(),
        });
    }
    Ok((n, edges))
}

fn parse_int(
    tok: Option<&str>,
    line: usize,
    expected: &'static str,
    whole: &str,
) -> Result<usize, TextFormatError> {
    tok.and_then(|t| t.parse().ok())
        .ok_or(TextFormatError::Malformed {
            line,
            expected,
            got: whole.to_string(),
        })
}

/// Serialize to the text format; edges canonical ascending.
pub fn graph_to_text(g: &SimpleGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.n(), g.m());
    for (u, v) in g.edges() {
        let _ = writeln!(s, "{u} {v}");
    }
    s
}

/// Serialize a multigraph; each pair repeats per its multiplicity.
pub fn multigraph_to_text(g: &MultiGraph) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{} {}", g.n(), g.m());
    for ((u, v), k) in g.edges_with_multiplicity() {
        for _ in 0..k {
            let _ = writeln!(s, "{u} {v}");
        }
    }
    s
}

/// Stock graphs used across tests, examples, and generators.
pub mod gen {
    use super::{SimpleGraph, VertexId};
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn complete(n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.insert_edge(u, v);
            }
        }
        g
    }

    /// Path `0 – 1 – … – n-1`.
    pub fn path(n: usize) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for u in 1..n {
            g.insert_edge(u - 1, u);
        }
        g
    }

    /// Cycle `0 – 1 – … – n-1 – 0`; requires `n ≥ 3`.
    pub fn cycle(n: usize) -> SimpleGraph {
        assert!(n >= 3, "a cycle needs at least 3 vertices");
        let mut g = path(n);
        g.insert_edge(n - 1, 0);
        g
    }

    /// Complete bipartite graph with sides `{0..s}` and `{s..s+t}`.
    pub fn complete_bipartite(s: usize, t: usize) -> SimpleGraph {
        let mut g = SimpleGraph::new(s + t);
        for u in 0..s {
            for v in s..s + t {
                g.insert_edge(u, v);
            }
        }
        g
    }

    /// Star with center 0 and `leaves` leaves.
    pub fn star(leaves: usize) -> SimpleGraph {
        complete_bipartite(1, leaves)
    }

    /// Disjoint union; the second graph's vertices are shifted by `g.n()`.
    pub fn disjoint_union(g: &SimpleGraph, h: &SimpleGraph) -> SimpleGraph {
        let off = g.n();
        let mut out = SimpleGraph::new(off + h.n());
        for (u, v) in g.edges() {
            out.insert_edge(u, v);
        }
        for (u, v) in h.edges() {
            out.insert_edge(u + off, v + off);
        }
        out
    }

    /// Binomial random graph: each pair is an edge independently with
    /// probability `p`.
    pub fn gnp(n: usize, p: f64, seed: u64) -> SimpleGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = SimpleGraph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p.clamp(0.0, 1.0)) {
                    g.insert_edge(u, v);
                }
            }
        }
        g
    }

    /// Random `d`-regular graph by repeated pairing-model attempts;
    /// requires `n·d` even and `d < n`. Retries until simple (no loops
    /// or repeats survive), which at desk scales succeeds quickly.
    pub fn random_regular(n: usize, d: usize, seed: u64) -> SimpleGraph {
        assert!(d < n, "degree must be below n");
        assert!(n * d % 2 == 0, "n·d must be even");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        'attempt: loop {
            let mut stubs: Vec<VertexId> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
            // Fisher–Yates shuffle, then pair consecutive stubs.
            for i in (1..stubs.len()).rev() {
                let j = rng.gen_range(0..=i);
                stubs.swap(i, j);
            }
            let mut g = SimpleGraph::new(n);
            for c in stubs.chunks(2) {
                let (u, v) = (c[0], c[1]);
                if u == v || g.has_edge(u, v) {
                    continue 'attempt;
                }
                g.insert_edge(u, v);
            }
            return g;
        }
    }
}
