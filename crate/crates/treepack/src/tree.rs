//! Rooted forests and tree surgery: subtree extraction, granular chunk
//! decomposition, balanced subforest selection, and bounded-degree random
//! tree generation.
//!
//! A [`RootedForest`] is a label-level object — vertices are indices, roots
//! are distinguished, and no isomorphism reasoning happens anywhere. The
//! surgery operators return handles pointing into the host forest rather
//! than copies wherever possible, so callers can relate results back to
//! host vertex ids.

use crate::graph::{self, SimpleGraph, VertexId};
use num::{BigInt, BigRational, One, Signed};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error("a forest on {n} vertices with {roots} roots needs {want} edges, got {got}")]
    EdgeCount {
        n: usize,
        roots: usize,
        want: usize,
        got: usize,
    },
    #[error("component of vertex {v} has no designated root")]
    NoRoot { v: usize },
    #[error("roots {a} and {b} lie in the same component")]
    TwoRootsOneComponent { a: usize, b: usize },
    #[error("vertex {v} has degree {degree}, above the bound {bound}")]
    DegreeBound {
        v: usize,
        degree: usize,
        bound: usize,
    },
    #[error("operation needs a single-component forest, got {components} components")]
    NotOneComponent { components: usize },
    #[error("granularity t = {t} exceeds the tree order n = {n}")]
    GranularityTooLarge { t: usize, n: usize },
    #[error("alpha = {alpha} violates the precondition alpha <= delta^-k / 2 = {bound}")]
    AlphaTooLarge { alpha: String, bound: String },
    #[error("alpha*n = {value} < 1: subtree target is below one vertex")]
    AlphaTooSmall { value: String },
    #[error("degree bound {delta} cannot host a tree on {n} vertices")]
    DeltaTooSmall { delta: usize, n: usize },
    #[error("forest {index}: expected exactly two components, found {count}")]
    NotTwoComponents { index: usize, count: usize },
    #[error("forest {index}: component of size {size} is too small to keep distance 5 from its root")]
    ComponentTooSmall { index: usize, size: usize },
    #[error("forest {index}: subforest pick landed at distance {dist} < 5 from a root")]
    TooCloseToRoot { index: usize, dist: usize },
    #[error("forest {index}: no subtree pick fits the size window [{lo}, {hi}]")]
    NoFittingSubtree { index: usize, lo: String, hi: String },
    #[error("balanced selection missed its target: achieved {achieved}, wanted {target} +- {slack}")]
    TelescopeMiss {
        achieved: usize,
        target: String,
        slack: usize,
    },
}

/// A forest with distinguished per-component roots and a declared degree
/// bound (`delta` ≥ the actual maximum degree).
#[derive(Clone, PartialEq, Eq)]
pub struct RootedForest {
    parent: Vec<Option<VertexId>>,
    children: Vec<Vec<VertexId>>,
    roots: Vec<VertexId>,
    delta: usize,
}

impl std::fmt::Debug for RootedForest {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "RootedForest(n={}, components={}, delta={})",
            self.n(),
            self.roots.len(),
            self.delta
        )
    }
}

impl RootedForest {
    /// Build from an undirected edge list plus one root per component.
    /// Rejects anything that is not a forest, a missing or doubled root,
    /// and (when `delta` is given) any vertex above the degree bound.
    pub fn from_edges(
        n: usize,
        edges: &[(VertexId, VertexId)],
        roots: &[VertexId],
        delta: Option<usize>,
    ) -> Result<Self, TreeError> {
        let g = SimpleGraph::from_edges(n, edges)?;
        for &r in roots {
            if r >= n {
                return Err(graph::GraphError::VertexOutOfRange { v: r, n }.into());
            }
        }
        if edges.len() + roots.len() != n {
            return Err(TreeError::EdgeCount {
                n,
                roots: roots.len(),
                want: n.saturating_sub(roots.len()),
                got: edges.len(),
            });
        }
        let mut parent: Vec<Option<VertexId>> = vec![None; n];
        let mut owner: Vec<Option<VertexId>> = vec![None; n];
        let mut sorted_roots = roots.to_vec();
        sorted_roots.sort_unstable();
        for &r in &sorted_roots {
            if let Some(prev) = owner[r] {
                return Err(TreeError::TwoRootsOneComponent { a: prev, b: r });
            }
            owner[r] = Some(r);
            let mut queue = std::collections::VecDeque::from([r]);
            while let Some(u) = queue.pop_front() {
                for &v in g.neighbours(u) {
                    if owner[v].is_none() {
                        owner[v] = Some(r);
                        parent[v] = Some(u);
                        queue.push_back(v);
                    } else if owner[v] == Some(r) && parent[u] != Some(v) && v != r {
                        // A second path reached v inside this component.
                        return Err(TreeError::TwoRootsOneComponent { a: r, b: v });
                    }
                }
            }
        }
        if let Some(v) = (0..n).find(|&v| owner[v].is_none()) {
            return Err(TreeError::NoRoot { v });
        }
        // Edge count + full coverage + one root per component ⇒ forest.
        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n];
        for v in 0..n {
            if let Some(p) = parent[v] {
                children[p].push(v);
            }
        }
        for c in &mut children {
            c.sort_unstable();
        }
        let actual = (0..n)
            .map(|v| children[v].len() + usize::from(parent[v].is_some()))
            .max()
            .unwrap_or(0);
        let bound = match delta {
            Some(d) => {
                if actual > d {
                    let v = (0..n)
                        .find(|&v| children[v].len() + usize::from(parent[v].is_some()) == actual)
                        .unwrap();
                    return Err(TreeError::DegreeBound {
                        v,
                        degree: actual,
                        bound: d,
                    });
                }
                d
            }
            None => actual,
        };
        Ok(RootedForest {
            parent,
            children,
            roots: sorted_roots,
            delta: bound,
        })
    }

    /// Path `0 – 1 – … – n-1` rooted at 0.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        RootedForest::from_edges(n, &edges, &[0], None).expect("path is a tree")
    }

    /// Star rooted at the center 0 with `leaves` leaves.
    pub fn star(leaves: usize) -> Self {
        let edges: Vec<_> = (1..=leaves).map(|v| (0, v)).collect();
        RootedForest::from_edges(leaves + 1, &edges, &[0], None).expect("star is a tree")
    }

    /// Spider rooted at the center 0: `legs` paths of `len` edges each.
    pub fn spider(legs: usize, len: usize) -> Self {
        let mut edges = Vec::new();
        let mut next = 1;
        for _ in 0..legs {
            let mut prev = 0;
            for _ in 0..len {
                edges.push((prev, next));
                prev = next;
                next += 1;
            }
        }
        RootedForest::from_edges(next, &edges, &[0], None).expect("spider is a tree")
    }

    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn num_components(&self) -> usize {
        self.roots.len()
    }

    /// The declared degree bound (≥ the actual maximum degree).
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn roots(&self) -> &[VertexId] {
        &self.roots
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        self.parent[v]
    }

    /// Children in ascending order.
    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.children[v].len() + usize::from(self.parent[v].is_some())
    }

    pub fn is_leaf(&self, v: VertexId) -> bool {
        self.degree(v) == 1
    }

    pub fn num_leaves(&self) -> usize {
        (0..self.n()).filter(|&v| self.is_leaf(v)).count()
    }

    /// Edges as `(min, max)` pairs in canonical ascending order.
    pub fn edges(&self) -> Vec<(VertexId, VertexId)> {
        let mut out: Vec<_> = (0..self.n())
            .filter_map(|v| {
                self.parent[v]
                    .map(|p| if p < v { (p, v) } else { (v, p) })
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// Depth of `v` below its component root.
    pub fn depth(&self, v: VertexId) -> usize {
        let mut d = 0;
        let mut u = v;
        while let Some(p) = self.parent[u] {
            u = p;
            d += 1;
        }
        d
    }

    /// The root of `v`'s component.
    pub fn root_of(&self, v: VertexId) -> VertexId {
        let mut u = v;
        while let Some(p) = self.parent[u] {
            u = p;
        }
        u
    }

    /// Subtree sizes: `size[v]` = number of vertices below `v`, inclusive.
    pub fn sizes_below(&self) -> Vec<usize> {
        let mut size = vec![1usize; self.n()];
        for v in self.topo_order_leaves_up() {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }

    /// Vertices in an order where every child precedes its parent.
    fn topo_order_leaves_up(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.n());
        for &r in &self.roots {
            let start = order.len();
            order.push(r);
            let mut head = start;
            while head < order.len() {
                let u = order[head];
                head += 1;
                order.extend_from_slice(&self.children[u]);
            }
        }
        order.reverse();
        order
    }

    /// Vertices below `v` (inclusive) in BFS order, children ascending.
    pub fn vertices_below(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        let mut head = 0;
        while head < out.len() {
            let u = out[head];
            head += 1;
            out.extend_from_slice(&self.children[u]);
        }
        out
    }

    /// The undirected view of this forest.
    pub fn to_graph(&self) -> SimpleGraph {
        SimpleGraph::from_edges(self.n(), &self.edges()).expect("forest edges are simple")
    }

    /// Tree distance between two vertices (`None` across components).
    pub fn distance(&self, u: VertexId, v: VertexId) -> Option<usize> {
        // Walk both vertices up to their roots recording depths, then
        // match the two root paths.
        let path_u = self.root_path(u);
        let path_v = self.root_path(v);
        if path_u.last() != path_v.last() {
            return None;
        }
        let pos_u: std::collections::BTreeMap<VertexId, usize> =
            path_u.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        for (j, &x) in path_v.iter().enumerate() {
            if let Some(&i) = pos_u.get(&x) {
                return Some(i + j);
            }
        }
        None
    }

    fn root_path(&self, v: VertexId) -> Vec<VertexId> {
        let mut path = vec![v];
        let mut u = v;
        while let Some(p) = self.parent[u] {
            path.push(p);
            u = p;
        }
        path
    }
}

/// A subtree found by one of the surgery operators: the vertex it hangs
/// from, its size, and how far below the relevant root it sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubtreeHandle {
    pub y: VertexId,
    pub size: usize,
    pub distance_from_root: usize,
}

/// The full subtree below `v` (inclusive) as a standalone forest, plus
/// the map from new ids to host ids (`map[i]` = host id of new vertex
/// `i`); new vertex 0 is `v`... see note. Ids are assigned in BFS order.
pub fn subtree_below_with_map(
    t: &RootedForest,
    v: VertexId,
) -> Result<(RootedForest, Vec<VertexId>), TreeError> {
    if v >= t.n() {
        return Err(graph::GraphError::VertexOutOfRange { v, n: t.n() }.into());
    }
    let verts = t.vertices_below(v);
    let back: std::collections::BTreeMap<VertexId, usize> =
        verts.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    let mut edges = Vec::with_capacity(verts.len().saturating_sub(1));
    for (i, &x) in verts.iter().enumerate() {
        if let Some(p) = t.parent(x) {
            if let Some(&pi) = back.get(&p) {
                edges.push((pi, i));
            }
        }
    }
    let sub = RootedForest::from_edges(verts.len(), &edges, &[0], Some(t.delta()))?;
    Ok((sub, verts))
}

/// The subtree below `v` as a standalone rooted tree (BFS renumbering,
/// root becomes vertex 0).
pub fn subtree_below(t: &RootedForest, v: VertexId) -> Result<RootedForest, TreeError> {
    Ok(subtree_below_with_map(t, v)?.0)
}

/// Like [`subtree_below`] but truncated to vertices within distance
/// `depth` of `v`.
pub fn subtree_below_depth(
    t: &RootedForest,
    v: VertexId,
    depth: usize,
) -> Result<RootedForest, TreeError> {
    if v >= t.n() {
        return Err(graph::GraphError::VertexOutOfRange { v, n: t.n() }.into());
    }
    let mut verts = vec![(v, 0usize)];
    let mut head = 0;
    while head < verts.len() {
        let (u, d) = verts[head];
        head += 1;
        if d < depth {
            verts.extend(t.children(u).iter().map(|&c| (c, d + 1)));
        }
    }
    let back: std::collections::BTreeMap<VertexId, usize> = verts
        .iter()
        .enumerate()
        .map(|(i, &(x, _))| (x, i))
        .collect();
    let mut edges = Vec::new();
    for (i, &(x, _)) in verts.iter().enumerate() {
        if let Some(p) = t.parent(x) {
            if let Some(&pi) = back.get(&p) {
                edges.push((pi, i));
            }
        }
    }
    RootedForest::from_edges(verts.len(), &edges, &[0], Some(t.delta()))
}

/// Parameters for [`decompose_rooted`]: chunk granularity `t` and the
/// degree bound `delta` entering the `[t, 2·delta·t]` size window.
#[derive(Debug, Clone, Copy)]
pub struct TreeDecompParams {
    pub t: usize,
    pub delta: usize,
}

/// Decompose a single-component rooted tree into vertex-disjoint rooted
/// chunks, each of size in `[t, 2Δt]`, covering all of `V(T)`.
///
/// While more than `2Δt` vertices remain, the deepest vertex whose
/// remaining subtree still has ≥ `t` vertices (lowest index on ties) is
/// split off with that subtree; the final remainder, containing the root,
/// is the last chunk. Handles are returned in extraction order, sizes and
/// coverage re-verified before returning.
pub fn decompose_rooted(
    t: &RootedForest,
    params: TreeDecompParams,
) -> Result<Vec<SubtreeHandle>, TreeError> {
    Ok(decompose_rooted_sets(t, params)?
        .into_iter()
        .map(|(h, _)| h)
        .collect())
}

/// [`decompose_rooted`] with each chunk's vertex set (in BFS order from
/// the chunk root, children ascending ) alongside its handle.
pub fn decompose_rooted_sets(
    t: &RootedForest,
    params: TreeDecompParams,
) -> Result<Vec<(SubtreeHandle, Vec<VertexId>)>, TreeError> {
    if t.num_components() != 1 {
        return Err(TreeError::NotOneComponent {
            components: t.num_components(),
        });
    }
    let n = t.n();
    let gran = params.t.max(1);
    if gran > n {
        return Err(TreeError::GranularityTooLarge { t: gran, n });
    }
    let actual_delta = (0..n).map(|v| t.degree(v)).max().unwrap_or(0);
    if actual_delta > params.delta {
        let v = (0..n).find(|&v| t.degree(v) == actual_delta).unwrap();
        return Err(TreeError::DegreeBound {
            v,
            degree: actual_delta,
            bound: params.delta,
        });
    }
    let root = t.roots()[0];
    let cap = 2 * params.delta * gran;

    let mut alive = vec![true; n];
    let mut remaining = n;
    let mut out: Vec<(SubtreeHandle, Vec<VertexId>)> = Vec::new();

    // Depths never change: ancestors of surviving vertices are never cut.
    let depth: Vec<usize> = (0..n).map(|v| t.depth(v)).collect();

    while remaining > cap {
        // Subtree sizes within the surviving tree.
        let mut size = vec![0usize; n];
        for v in t.topo_order_leaves_up() {
            if !alive[v] {
                continue;
            }
            size[v] += 1;
            if let Some(p) = t.parent(v) {
                size[p] += size[v];
            }
        }
        // Deepest vertex with a surviving subtree of size ≥ t; lowest
        // index breaks ties.
        let y = (0..n)
            .filter(|&v| alive[v] && size[v] >= gran)
            .max_by(|&a, &b| depth[a].cmp(&depth[b]).then(b.cmp(&a)))
            .expect("the root always qualifies");
        let mut chunk = vec![y];
        let mut head = 0;
        while head < chunk.len() {
            let u = chunk[head];
            head += 1;
            chunk.extend(t.children(u).iter().filter(|&&c| alive[c]));
        }
        for &v in &chunk {
            alive[v] = false;
        }
        remaining -= chunk.len();
        out.push((
            SubtreeHandle {
                y,
                size: chunk.len(),
                distance_from_root: depth[y],
            },
            chunk,
        ));
    }

    let mut base = vec![root];
    let mut head = 0;
    while head < base.len() {
        let u = base[head];
        head += 1;
        base.extend(t.children(u).iter().filter(|&&c| alive[c]));
    }
    out.push((
        SubtreeHandle {
            y: root,
            size: base.len(),
            distance_from_root: 0,
        },
        base,
    ));

    // Disjoint cover within the size window, re-verified.
    let mut seen = vec![false; n];
    for (h, chunk) in &out {
        assert!(h.size == chunk.len());
        assert!(
            h.size >= gran && h.size <= cap,
            "chunk size {} outside [{gran}, {cap}]",
            h.size
        );
        for &v in chunk {
            assert!(!seen[v], "vertex {v} covered twice");
            seen[v] = true;
        }
    }
    assert!(seen.iter().all(|&s| s), "decomposition misses vertices");
    Ok(out)
}

/// Descend from `start` toward larger child subtrees until the subtree
/// size first drops to `upper` or below. Returns `(y, size, steps)`.
fn descend_to_size(
    t: &RootedForest,
    sizes: &[usize],
    start: VertexId,
    upper: &BigRational,
) -> (VertexId, usize, usize) {
    let mut u = start;
    let mut steps = 0;
    loop {
        if BigRational::from_integer(BigInt::from(sizes[u])) <= *upper {
            return (u, sizes[u], steps);
        }
        // Child with the largest subtree, lowest index on ties; children
        // are stored ascending so the first maximum wins.
        let next = t
            .children(u)
            .iter()
            .copied()
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)));
        match next {
            Some(c) => {
                u = c;
                steps += 1;
            }
            None => return (u, sizes[u], steps),
        }
    }
}

/// Find a subtree of prescribed relative size far from the root: descend
/// from `x` along maximal child subtrees, stopping the first time the
/// subtree has ≤ `alpha·Δ·n` vertices. The result satisfies
/// `alpha·n ≤ |T(y)| ≤ alpha·Δ·n` and `dist(x, y) ≥ k`, both re-verified.
/// Requires `alpha ≤ Δ^{−k}/2` and `alpha·n ≥ 1`.
pub fn extract_subtree(
    t: &RootedForest,
    x: VertexId,
    alpha: f64,
    k: usize,
) -> Result<SubtreeHandle, TreeError> {
    if x >= t.n() {
        return Err(graph::GraphError::VertexOutOfRange { v: x, n: t.n() }.into());
    }
    let alpha = crate::diagnostics::rat("alpha", alpha)
        .map_err(|_| TreeError::AlphaTooSmall { value: "NaN".into() })?;
    let delta = t.delta().max(1);
    let delta_pow_k = BigInt::from(delta).pow(k as u32);
    // alpha ≤ Δ^{−k}/2  ⟺  2·alpha·Δ^k ≤ 1
    let doubled = BigRational::from_integer(2 * &delta_pow_k) * &alpha;
    if doubled > BigRational::one() {
        return Err(TreeError::AlphaTooLarge {
            alpha: format!("{alpha}"),
            bound: format!("1/{}", 2 * delta_pow_k),
        });
    }
    let sizes = t.sizes_below();
    let nn = BigRational::from_integer(BigInt::from(sizes[x]));
    let lower = &alpha * &nn;
    if lower < BigRational::one() {
        return Err(TreeError::AlphaTooSmall {
            value: format!("{lower}"),
        });
    }
    let upper = &lower * BigRational::from_integer(BigInt::from(delta));
    let (y, size, steps) = descend_to_size(t, &sizes, x, &upper);

    let size_rat = BigRational::from_integer(BigInt::from(size));
    assert!(
        size_rat >= lower && size_rat <= upper,
        "subtree size {size} escaped its window"
    );
    assert!(steps >= k, "descent stopped after {steps} < k = {k} steps");
    Ok(SubtreeHandle {
        y,
        size,
        distance_from_root: steps,
    })
}

/// One forest's contribution from [`select_balanced_subforests`]: the
/// chosen subtree in each of the first `c` components.
#[derive(Debug, Clone)]
pub struct SubforestPick {
    pub forest_index: usize,
    /// True if this forest contributes the larger of its two candidate
    /// subforests.
    pub large_variant: bool,
    /// `(component index, y, size, distance from that component's root)`.
    pub parts: Vec<(usize, VertexId, usize, usize)>,
    /// Total edge count of the picked subforest.
    pub edges: usize,
}

/// For each two-component forest, pick a subforest (`c` = 1 or 2 subtrees,
/// one per component, each a full below-subtree at distance ≥ 5 from its
/// root, sizes in `[β·n/(c·Δ), Δ·β·n/c]`), switching between a small and a
/// large candidate per forest so that the family's total edge count lands
/// within `± n` of `β·n·|family|`.
pub fn select_balanced_subforests(
    family: &[RootedForest],
    beta: f64,
    c: usize,
    n_scale: Option<usize>,
) -> Result<Vec<SubforestPick>, TreeError> {
    assert!(c == 1 || c == 2, "c must be 1 or 2");
    let beta = crate::diagnostics::rat("beta", beta)
        .map_err(|_| TreeError::AlphaTooSmall { value: "NaN".into() })?;
    let n = n_scale.unwrap_or_else(|| family.iter().map(RootedForest::n).max().unwrap_or(0));
    let delta = family.iter().map(RootedForest::delta).max().unwrap_or(2).max(2);
    let nn = BigRational::from_integer(BigInt::from(n));
    let cc = BigRational::from_integer(BigInt::from(c));
    let dd = BigRational::from_integer(BigInt::from(delta));
    // Small candidate: sizes in [βn/(cΔ), βn/c]; large: [βn/c, Δβn/c].
    let small_upper = &beta * &nn / (&cc * &dd);
    let small_upper = &small_upper * &dd; // = βn/c
    let large_upper = &small_upper * &dd; // = Δβn/c

    let mut smalls: Vec<Vec<(usize, VertexId, usize, usize)>> = Vec::new();
    let mut larges: Vec<Vec<(usize, VertexId, usize, usize)>> = Vec::new();
    for (idx, f) in family.iter().enumerate() {
        if f.num_components() != 2 {
            return Err(TreeError::NotTwoComponents {
                index: idx,
                count: f.num_components(),
            });
        }
        let sizes = f.sizes_below();
        for &r in f.roots() {
            if sizes[r] < 6 {
                return Err(TreeError::ComponentTooSmall {
                    index: idx,
                    size: sizes[r],
                });
            }
        }
        let mut small_parts = Vec::new();
        let mut large_parts = Vec::new();
        for (comp, &r) in f.roots().iter().take(c).enumerate() {
            for (upper, parts) in [
                (&small_upper, &mut small_parts),
                (&large_upper, &mut large_parts),
            ] {
                let (y, size, dist) = descend_to_size(f, &sizes, r, upper);
                // Outcome checks in place of the sufficient-precondition
                // route: the window's lower end and the root distance.
                let lower = upper / &dd;
                if BigRational::from_integer(BigInt::from(size)) < lower {
                    return Err(TreeError::NoFittingSubtree {
                        index: idx,
                        lo: format!("{lower}"),
                        hi: format!("{upper}"),
                    });
                }
                if dist < 5 {
                    return Err(TreeError::TooCloseToRoot { index: idx, dist });
                }
                parts.push((comp, y, size, dist));
            }
        }
        smalls.push(small_parts);
        larges.push(large_parts);
    }

    let edge_sum = |parts: &[(usize, VertexId, usize, usize)]| -> usize {
        parts.iter().map(|&(_, _, s, _)| s - 1).sum()
    };
    let small_e: Vec<usize> = smalls.iter().map(|p| edge_sum(p)).collect();
    let large_e: Vec<usize> = larges.iter().map(|p| edge_sum(p)).collect();

    // S_t = large for the first t forests + small for the rest; choose the
    // t whose total lands nearest the target.
    let target = &beta * &nn * BigRational::from_integer(BigInt::from(family.len()));
    let mut sum: i128 = small_e.iter().map(|&e| e as i128).sum();
    let mut best = (0usize, sum);
    let mut best_err = (BigRational::from_integer(BigInt::from(sum)) - &target).abs();
    for t in 1..=family.len() {
        sum += large_e[t - 1] as i128 - small_e[t - 1] as i128;
        let err = (BigRational::from_integer(BigInt::from(sum)) - &target).abs();
        if err < best_err {
            best_err = err;
            best = (t, sum);
        }
    }
    if best_err > nn {
        return Err(TreeError::TelescopeMiss {
            achieved: best.1 as usize,
            target: format!("{target}"),
            slack: n,
        });
    }

    let cut = best.0;
    Ok((0..family.len())
        .map(|i| {
            let large_variant = i < cut;
            let parts = if large_variant {
                larges[i].clone()
            } else {
                smalls[i].clone()
            };
            let edges = edge_sum(&parts);
            SubforestPick {
                forest_index: i,
                large_variant,
                parts,
                edges,
            }
        })
        .collect())
}

/// Random tree by degree-capped preferential-free attachment: vertex `i`
/// attaches to a uniformly random earlier vertex that still has spare
/// degree. Not uniform over isomorphism classes — instances are inputs,
/// not statistics.
pub fn gen_random_tree(n: usize, delta: usize, seed: u64) -> Result<RootedForest, TreeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gen_random_tree_with(n, delta, &mut rng)
}

fn gen_random_tree_with(
    n: usize,
    delta: usize,
    rng: &mut ChaCha8Rng,
) -> Result<RootedForest, TreeError> {
    if n == 0 || (n >= 2 && delta == 0) || (n >= 3 && delta == 1) {
        return Err(TreeError::DeltaTooSmall { delta, n });
    }
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    let mut degree = vec![0usize; n];
    // Live list of vertices with spare degree capacity.
    let mut candidates: Vec<VertexId> = Vec::with_capacity(n);
    if n > 1 {
        candidates.push(0);
    }
    for v in 1..n {
        if candidates.is_empty() {
            return Err(TreeError::DeltaTooSmall { delta, n });
        }
        let idx = rng.gen_range(0..candidates.len());
        let u = candidates[idx];
        edges.push((u, v));
        degree[u] += 1;
        degree[v] += 1;
        if degree[u] == delta {
            candidates.swap_remove(idx);
        }
        if degree[v] < delta {
            candidates.push(v);
        }
    }
    RootedForest::from_edges(n, &edges, &[0], Some(delta))
}

/// Trees `T_1, …, T_n` with `|T_i| = i` and `Δ(T_i) ≤ delta`, so that
/// their edge counts sum to exactly `n(n−1)/2`.
pub fn gen_gl_sequence(
    n: usize,
    delta: usize,
    seed: u64,
) -> Result<Vec<RootedForest>, TreeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (1..=n).map(|i| gen_random_tree_with(i, delta, &mut rng)).collect()
}

/// Count of degree-2 vertices. When the tree has at most `t` leaves the
/// count is guaranteed ≥ n − 2t, and that floor is re-verified here.
pub fn count_degree2_floor(t: &RootedForest, leaf_bound: usize) -> usize {
    let count = (0..t.n()).filter(|&v| t.degree(v) == 2).count();
    if t.num_leaves() <= leaf_bound {
        assert!(
            count + 2 * leaf_bound >= t.n(),
            "degree-2 count {count} below the n − 2t floor"
        );
    }
    count
}

/// One tree entry of the forest JSON file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestFileTree {
    pub id: u64,
    pub n: usize,
    pub edges: Vec<(VertexId, VertexId)>,
    pub roots: Vec<VertexId>,
}

/// The forest JSON file: `{"trees":[{"id","n","edges","roots"}, …]}` with
/// an optional global `delta` bound that every tree must respect.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ForestFile {
    pub trees: Vec<ForestFileTree>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<usize>,
}

#[derive(Debug, Error)]
pub enum ForestJsonError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("tree {id}: {source}")]
    BadTree { id: u64, source: TreeError },
}

/// Parse and validate the forest JSON format.
pub fn parse_forest_json(text: &str) -> Result<Vec<(u64, RootedForest)>, ForestJsonError> {
    let file: ForestFile = serde_json::from_str(text)?;
    file.trees
        .iter()
        .map(|t| {
            RootedForest::from_edges(t.n, &t.edges, &t.roots, file.delta)
                .map(|f| (t.id, f))
                .map_err(|source| ForestJsonError::BadTree { id: t.id, source })
        })
        .collect()
}

/// Serialize forests to the JSON file format.
pub fn forests_to_json(forests: &[(u64, &RootedForest)], delta: Option<usize>) -> String {
    let file = ForestFile {
        trees: forests
            .iter()
            .map(|&(id, f)| ForestFileTree {
                id,
                n: f.n(),
                edges: f.edges(),
                roots: f.roots().to_vec(),
            })
            .collect(),
        delta,
    };
    serde_json::to_string_pretty(&file).expect("forest file serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subtree_below_cases() {
        let p7 = RootedForest::path(7);
        let (whole, map) = subtree_below_with_map(&p7, 0).unwrap();
        assert_eq!(whole.n(), 7);
        assert_eq!(map, vec![0, 1, 2, 3, 4, 5, 6]);

        let leaf = subtree_below(&p7, 6).unwrap();
        assert_eq!(leaf.n(), 1);

        let (mid, map) = subtree_below_with_map(&p7, 3).unwrap();
        assert_eq!(mid.n(), 4);
        assert_eq!(map, vec![3, 4, 5, 6]);
        assert_eq!(mid.edges(), vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn subtree_below_depth_truncates() {
        let spider = RootedForest::spider(3, 3);
        let t1 = subtree_below_depth(&spider, 0, 1).unwrap();
        assert_eq!(t1.n(), 4); // center + 3 first-leg vertices
        let t0 = subtree_below_depth(&spider, 0, 0).unwrap();
        assert_eq!(t0.n(), 1);
    }

    #[test]
    fn decompose_small_tree_is_single_part() {
        // 7 ≤ 2Δt = 8: the base case keeps the whole tree as one chunk.
        let p7 = RootedForest::path(7);
        let parts = decompose_rooted(&p7, TreeDecompParams { t: 2, delta: 2 }).unwrap();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0], SubtreeHandle { y: 0, size: 7, distance_from_root: 0 });
    }

    #[test]
    fn decompose_path16_trace() {
        let p16 = RootedForest::path(16);
        let parts = decompose_rooted(&p16, TreeDecompParams { t: 2, delta: 2 }).unwrap();
        let expect = [
            SubtreeHandle { y: 14, size: 2, distance_from_root: 14 },
            SubtreeHandle { y: 12, size: 2, distance_from_root: 12 },
            SubtreeHandle { y: 10, size: 2, distance_from_root: 10 },
            SubtreeHandle { y: 8, size: 2, distance_from_root: 8 },
            SubtreeHandle { y: 0, size: 8, distance_from_root: 0 },
        ];
        assert_eq!(parts, expect);
    }

    #[test]
    fn decompose_random_trees_cover() {
        for seed in 0..60 {
            let n = 20 + (seed as usize * 7) % 180;
            let t = gen_random_tree(n, 3, seed).unwrap();
            for gran in [2, 5, 10] {
                if gran > n {
                    continue;
                }
                // Internal hard assertions verify cover, disjointness and
                // the size window.
                let parts =
                    decompose_rooted(&t, TreeDecompParams { t: gran, delta: 3 }).unwrap();
                let total: usize = parts.iter().map(|h| h.size).sum();
                assert_eq!(total, n);
            }
        }
    }

    #[test]
    fn decompose_rejects_bad_inputs() {
        let p5 = RootedForest::path(5);
        assert!(matches!(
            decompose_rooted(&p5, TreeDecompParams { t: 6, delta: 2 }),
            Err(TreeError::GranularityTooLarge { t: 6, n: 5 })
        ));
        let star = RootedForest::star(4);
        assert!(matches!(
            decompose_rooted(&star, TreeDecompParams { t: 1, delta: 2 }),
            Err(TreeError::DegreeBound { .. })
        ));
    }

    #[test]
    fn extract_subtree_path16() {
        let p16 = RootedForest::path(16);
        let h = extract_subtree(&p16, 0, 1.0 / 8.0, 1).unwrap();
        assert_eq!(h, SubtreeHandle { y: 12, size: 4, distance_from_root: 12 });
    }

    #[test]
    fn extract_subtree_immediate_root() {
        // αΔn ≥ n with k = 0 stops at the root right away.
        let t = gen_random_tree(20, 4, 3).unwrap();
        let h = extract_subtree(&t, 0, 0.25, 0).unwrap();
        assert_eq!(h.y, t.roots()[0]);
        assert_eq!(h.size, 20);
    }

    #[test]
    fn extract_subtree_rejects_large_alpha() {
        let p16 = RootedForest::path(16);
        assert!(matches!(
            extract_subtree(&p16, 0, 0.3, 2),
            Err(TreeError::AlphaTooLarge { .. })
        ));
    }

    #[test]
    fn extract_subtree_random_property() {
        for seed in 0..40 {
            let t = gen_random_tree(150, 3, seed).unwrap();
            // Hard post-assertions inside verify the window and distance.
            let _ = extract_subtree(&t, 0, 1.0 / 54.0, 3).unwrap();
        }
    }

    /// Two-path forest: components `0..a` and `a..a+b`, roots 0 and a.
    fn two_paths(a: usize, b: usize) -> RootedForest {
        let mut edges: Vec<_> = (1..a).map(|v| (v - 1, v)).collect();
        edges.extend((a + 1..a + b).map(|v| (v - 1, v)));
        RootedForest::from_edges(a + b, &edges, &[0, a], None).unwrap()
    }

    #[test]
    fn balanced_subforests_two_component_family() {
        let family: Vec<RootedForest> = (0..10).map(|_| two_paths(50, 50)).collect();
        let picks = select_balanced_subforests(&family, 0.1, 1, Some(100)).unwrap();
        assert_eq!(picks.len(), 10);
        let total: usize = picks.iter().map(|p| p.edges).sum();
        // Target β·n·|family| = 100 within ±100.
        assert!((total as i64 - 100).unsigned_abs() <= 100, "total = {total}");
        for p in &picks {
            assert_eq!(p.parts.len(), 1);
            let (_, _, size, dist) = p.parts[0];
            assert!(dist >= 5);
            // Window [βn/Δ, Δβn] = [5, 20].
            assert!((5..=20).contains(&size), "size {size}");
        }
    }

    #[test]
    fn balanced_subforests_c2_removes_per_component() {
        let family: Vec<RootedForest> = (0..6).map(|_| two_paths(60, 40)).collect();
        let picks = select_balanced_subforests(&family, 0.1, 2, Some(100)).unwrap();
        for p in &picks {
            assert_eq!(p.parts.len(), 2);
            let comps: Vec<usize> = p.parts.iter().map(|&(c, _, _, _)| c).collect();
            assert_eq!(comps, vec![0, 1]);
            for &(_, _, size, dist) in &p.parts {
                assert!(dist >= 5);
                // Window [βn/(2Δ), Δβn/2] = [2.5, 10].
                assert!(size >= 3 && size <= 10, "size {size}");
            }
        }
    }

    #[test]
    fn balanced_subforests_rejects_small_components() {
        let family = vec![two_paths(5, 50)];
        assert!(matches!(
            select_balanced_subforests(&family, 0.1, 1, Some(55)),
            Err(TreeError::ComponentTooSmall { index: 0, size: 5 })
        ));
    }

    #[test]
    fn balanced_subforests_rejects_one_component() {
        let family = vec![RootedForest::path(30)];
        assert!(matches!(
            select_balanced_subforests(&family, 0.1, 1, None),
            Err(TreeError::NotTwoComponents { index: 0, count: 1 })
        ));
    }

    #[test]
    fn gen_random_tree_basics() {
        let t1 = gen_random_tree(1, 3, 0).unwrap();
        assert_eq!((t1.n(), t1.num_components()), (1, 1));
        let t2 = gen_random_tree(2, 1, 0).unwrap();
        assert_eq!(t2.edges(), vec![(0, 1)]);

        let t = gen_random_tree(50, 3, 42).unwrap();
        assert_eq!(t.n(), 50);
        assert!((0..50).all(|v| t.degree(v) <= 3));

        assert!(matches!(
            gen_random_tree(3, 1, 0),
            Err(TreeError::DeltaTooSmall { .. })
        ));
    }

    #[test]
    fn gl_sequence_edge_total() {
        for (n, delta, seed) in [(7, 2, 0), (20, 3, 5), (35, 4, 9)] {
            let seq = gen_gl_sequence(n, delta, seed).unwrap();
            assert_eq!(seq.len(), n);
            for (i, t) in seq.iter().enumerate() {
                assert_eq!(t.n(), i + 1);
                assert!((0..t.n()).all(|v| t.degree(v) <= delta));
            }
            let total: usize = seq.iter().map(|t| t.edges().len()).sum();
            assert_eq!(total, n * (n - 1) / 2);
        }
    }

    #[test]
    fn degree2_counts() {
        let p9 = RootedForest::path(9);
        assert_eq!(count_degree2_floor(&p9, 2), 7);

        let star = RootedForest::star(3);
        assert_eq!(count_degree2_floor(&star, 3), 0);

        let spider = RootedForest::spider(3, 3);
        assert_eq!(count_degree2_floor(&spider, 3), 6);
    }

    #[test]
    fn degree2_independent_set_floor() {
        // Greedy independent sets drawn from the degree-2 vertices of a
        // few small-leaf trees stay above (n − 2t)/Δ^k.
        for t in [RootedForest::path(20), RootedForest::spider(3, 6)] {
            let g = t.to_graph();
            let deg2: Vec<VertexId> = (0..t.n()).filter(|&v| t.degree(v) == 2).collect();
            let leaves = t.num_leaves();
            let delta = (0..t.n()).map(|v| t.degree(v)).max().unwrap().max(2);
            let k = 3usize;
            let y = crate::diagnostics::greedy_k_independent_set(&g, k, &[], &deg2).unwrap();
            let floor = (t.n().saturating_sub(2 * leaves)) as f64 / (delta.pow(k as u32) as f64);
            assert!(y.len() as f64 >= floor);
        }
    }

    #[test]
    fn forest_json_round_trip() {
        let t1 = gen_random_tree(12, 3, 1).unwrap();
        let t2 = two_paths(4, 5);
        let json = forests_to_json(&[(1, &t1), (7, &t2)], Some(3));
        let parsed = parse_forest_json(&json).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0, 1);
        assert_eq!(parsed[0].1.edges(), t1.edges());
        assert_eq!(parsed[1].0, 7);
        assert_eq!(parsed[1].1.roots(), t2.roots());
    }

    #[test]
    fn forest_json_validates() {
        // A cycle is not a forest: edge count betrays it.
        let bad = r#"{"trees":[{"id":1,"n":3,"edges":[[0,1],[1,2],[2,0]],"roots":[0]}]}"#;
        assert!(matches!(
            parse_forest_json(bad),
            Err(ForestJsonError::BadTree { id: 1, .. })
        ));
        // Degree bound applies when the file carries one.
        let star = r#"{"trees":[{"id":2,"n":4,"edges":[[0,1],[0,2],[0,3]],"roots":[0]}],"delta":2}"#;
        assert!(matches!(
            parse_forest_json(star),
            Err(ForestJsonError::BadTree { id: 2, .. })
        ));
    }

    #[test]
    fn forest_structure_accessors() {
        let f = two_paths(3, 4);
        assert_eq!(f.num_components(), 2);
        assert_eq!(f.root_of(5), 3);
        assert_eq!(f.depth(6), 3);
        assert_eq!(f.distance(3, 6), Some(3));
        assert_eq!(f.distance(0, 3), None);
        assert_eq!(f.vertices_below(1), vec![1, 2]);
    }
}
