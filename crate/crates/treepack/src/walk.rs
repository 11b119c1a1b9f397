//! Random-walk assignment of tree vertices to the clusters of a cycle
//! blow-up, plus the greedy embedding routines that realize tree and
//! forest copies inside a host graph.
//!
//! The central idea: a tree is cut into chunks of roughly `n^(1-delta)`
//! vertices, chunks are replayed in order of increasing distance from the
//! root, and every vertex is dropped into the cluster one step (plus or
//! minus one, chosen by a fresh coin flip) from its parent's cluster.
//! Around an odd cycle this walk mixes rapidly, so cluster loads
//! concentrate near `n / ell`, and the assignment fits into a blow-up
//! whose clusters have a little slack over that average.

use crate::graph::{GraphError, SimpleGraph, VertexId};
use crate::tree::{decompose_rooted_sets, RootedForest, TreeDecompParams, TreeError};
use num::{BigInt, BigRational, One, Zero};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;
use thiserror::Error;

/// Errors from walk assignment and greedy embedding.
#[derive(Debug, Error, PartialEq)]
pub enum WalkError {
    #[error("cycle length {ell} is not odd")]
    EvenCycle { ell: usize },
    #[error("cycle length {ell} is below 3")]
    CycleTooShort { ell: usize },
    #[error("cluster size must be positive")]
    EmptyCluster,
    #[error("capacity {m} is below the average load ceil({n}/{ell})")]
    CapacityTooSmall { m: usize, n: usize, ell: usize },
    #[error("tree has {roots} roots; walk assignment needs exactly one")]
    NotOneTree { roots: usize },
    #[error("parameter cycle length {params} does not match blow-up cycle length {blowup}")]
    CycleMismatch { params: usize, blowup: usize },
    #[error("graph is not the expected blow-up: {reason}")]
    NotABlowup { reason: String },
    #[error("walk needs at least one trial")]
    NoTrials,
    #[error("anchor set is not 3-independent: vertices {u} and {v} are at distance {dist}")]
    AnchorsTooClose { u: VertexId, v: VertexId, dist: usize },
    #[error("anchor map must assign exactly the anchor set; vertex {v} mismatches")]
    AnchorDomainMismatch { v: VertexId },
    #[error("anchor map is not injective: host vertex {host} is used twice")]
    AnchorNotInjective { host: VertexId },
    #[error("codegree of host pair ({u},{v}) is {codegree}, below forest size {need}")]
    CodegreeTooSmall {
        u: VertexId,
        v: VertexId,
        codegree: usize,
        need: usize,
    },
    #[error("no remaining candidate image for forest vertex {vertex}")]
    NoCandidate { vertex: VertexId },
    #[error("sources, forbidden sets, and conflict graph disagree on the number of edges")]
    SparseShapeMismatch,
    #[error("target multiplicity must be positive")]
    ZeroMultiplicity,
    #[error("source {index}: degree into the target set minus forbidden leaves {have}, need at least {need}")]
    SparseDegreeTooSmall {
        index: usize,
        have: String,
        need: String,
    },
    #[error("source {index}: no admissible target remains")]
    SparseExhausted { index: usize },
    #[error("delta must lie strictly between 0 and 1, got {delta}")]
    BadDelta { delta: f64 },
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A blow-up of a cycle: `ell` clusters of `size` vertices each, with a
/// complete bipartite graph between consecutive clusters (indices mod
/// `ell`) and no other edges.
///
/// The vertex set is `0..ell*size`; cluster `i` owns the contiguous block
/// `i*size..(i+1)*size`. The graph is kept implicit: at realistic scales
/// materializing `ell * size^2` edges is pointless when adjacency is a
/// one-line test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleBlowup {
    ell: usize,
    size: usize,
}

impl CycleBlowup {
    /// A blow-up of the cycle of length `ell` with `size` vertices per
    /// cluster. `ell` must be at least 3 (any parity), `size` positive.
    pub fn new(ell: usize, size: usize) -> Result<Self, WalkError> {
        if ell < 3 {
            return Err(WalkError::CycleTooShort { ell });
        }
        if size == 0 {
            return Err(WalkError::EmptyCluster);
        }
        Ok(CycleBlowup { ell, size })
    }

    /// Number of clusters.
    pub fn ell(&self) -> usize {
        self.ell
    }

    /// Vertices per cluster.
    pub fn cluster_size(&self) -> usize {
        self.size
    }

    /// Total number of vertices.
    pub fn n(&self) -> usize {
        self.ell * self.size
    }

    /// The vertex in `cluster` at position `slot`.
    pub fn vertex(&self, cluster: usize, slot: usize) -> VertexId {
        assert!(cluster < self.ell && slot < self.size);
        cluster * self.size + slot
    }

    /// The cluster owning vertex `v`.
    pub fn cluster_of(&self, v: VertexId) -> usize {
        assert!(v < self.n());
        v / self.size
    }

    /// Whether `u` and `v` are adjacent: distinct clusters exactly one
    /// apart around the cycle.
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let cu = self.cluster_of(u);
        let cv = self.cluster_of(v);
        (cu + 1) % self.ell == cv || (cv + 1) % self.ell == cu
    }

    /// Materialize the blow-up as an explicit graph. Only sensible at
    /// small scales; the edge count is `ell * size^2`.
    pub fn to_graph(&self) -> SimpleGraph {
        let mut edges = Vec::with_capacity(self.ell * self.size * self.size);
        for c in 0..self.ell {
            let d = (c + 1) % self.ell;
            if d < c && self.ell == 2 {
                continue;
            }
            for a in 0..self.size {
                for b in 0..self.size {
                    edges.push((self.vertex(c, a), self.vertex(d, b)));
                }
            }
        }
        SimpleGraph::from_edges(self.n(), &edges).expect("blow-up edges are simple")
    }

    /// Check that an explicit graph equals the blow-up `C(ell, size)`
    /// under the contiguous-block cluster convention, and wrap it.
    pub fn from_graph(g: &SimpleGraph, ell: usize) -> Result<Self, WalkError> {
        if ell < 3 {
            return Err(WalkError::CycleTooShort { ell });
        }
        if g.n() == 0 || g.n() % ell != 0 {
            return Err(WalkError::NotABlowup {
                reason: format!("{} vertices cannot split into {ell} equal clusters", g.n()),
            });
        }
        let b = CycleBlowup {
            ell,
            size: g.n() / ell,
        };
        let want = b.ell * b.size * b.size;
        if g.m() != want {
            return Err(WalkError::NotABlowup {
                reason: format!("expected {want} edges, found {}", g.m()),
            });
        }
        for u in 0..g.n() {
            for &v in g.neighbours(u) {
                if u < v && !b.has_edge(u, v) {
                    return Err(WalkError::NotABlowup {
                        reason: format!("edge ({u},{v}) joins non-consecutive clusters"),
                    });
                }
            }
        }
        Ok(b)
    }
}

/// Parameters for walk assignment and embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct WalkEmbedParams {
    /// Cycle length; must be odd and at least 3.
    pub ell: usize,
    /// Per-cluster capacity the assignment must respect.
    pub m: usize,
    /// Seed for every random choice.
    pub seed: u64,
    /// Chunk-size exponent: chunks hold roughly `n^(1-delta)` vertices.
    pub delta: f64,
    /// Fresh seeds to try before reporting a capacity failure.
    pub retry_limit: usize,
}

impl WalkEmbedParams {
    /// Standard parameters: chunk exponent 0.4, twenty retries.
    pub fn new(ell: usize, m: usize, seed: u64) -> Self {
        WalkEmbedParams {
            ell,
            m,
            seed,
            delta: 0.4,
            retry_limit: 20,
        }
    }

    fn validate(&self, n: usize) -> Result<(), WalkError> {
        if self.ell < 3 {
            return Err(WalkError::CycleTooShort { ell: self.ell });
        }
        if self.ell % 2 == 0 {
            return Err(WalkError::EvenCycle { ell: self.ell });
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(WalkError::BadDelta { delta: self.delta });
        }
        let avg = n.div_ceil(self.ell);
        if self.m < avg {
            return Err(WalkError::CapacityTooSmall {
                m: self.m,
                n,
                ell: self.ell,
            });
        }
        Ok(())
    }
}

/// A cluster assignment for the vertices of one tree: which cluster each
/// vertex lands in, how many vertices each cluster holds, and how many
/// tree edges each consecutive cluster pair carries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    /// Cluster index per tree vertex.
    pub cluster_of: Vec<usize>,
    /// Vertices assigned to each cluster; length `ell`.
    pub loads: Vec<usize>,
    /// Tree edges assigned to each pair of consecutive clusters; entry
    /// `i` counts edges between clusters `i` and `i+1 mod ell`.
    pub pair_loads: Vec<usize>,
}

impl ClusterAssignment {
    /// Largest cluster load.
    pub fn max_load(&self) -> usize {
        self.loads.iter().copied().max().unwrap_or(0)
    }

    /// Largest pair load.
    pub fn max_pair_load(&self) -> usize {
        self.pair_loads.iter().copied().max().unwrap_or(0)
    }
}

/// A partial injective map from the vertices of a tree or forest into a
/// host graph. `images[v]` is the host vertex assigned to `v`, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialEmbedding {
    images: Vec<Option<VertexId>>,
}

impl PartialEmbedding {
    /// An empty embedding for a forest on `n` vertices.
    pub fn new(n: usize) -> Self {
        PartialEmbedding {
            images: vec![None; n],
        }
    }

    /// Number of forest vertices (assigned or not).
    pub fn domain_size(&self) -> usize {
        self.images.len()
    }

    /// The image of `v`, if assigned.
    pub fn image(&self, v: VertexId) -> Option<VertexId> {
        self.images[v]
    }

    /// Assign `v` to `host`. Panics if `v` is already assigned.
    pub fn assign(&mut self, v: VertexId, host: VertexId) {
        assert!(self.images[v].is_none(), "vertex {v} assigned twice");
        self.images[v] = Some(host);
    }

    /// Whether every forest vertex has an image.
    pub fn is_total(&self) -> bool {
        self.images.iter().all(|x| x.is_some())
    }

    /// The assigned vertices, in index order.
    pub fn assigned(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter_map(|(v, x)| x.map(|h| (v, h)))
    }

    /// Check injectivity and that every forest edge with both ends
    /// assigned maps to a host edge. Panics on violation; this is the
    /// final gate every embedding in this module passes through.
    pub fn verify(&self, forest: &RootedForest, host: &SimpleGraph) {
        let mut seen = vec![false; host.n()];
        for (v, h) in self.assigned() {
            assert!(h < host.n(), "image {h} of vertex {v} is out of range");
            assert!(!seen[h], "embedding is not injective at host vertex {h}");
            seen[h] = true;
        }
        for v in 0..forest.n() {
            if let Some(p) = forest.parent(v) {
                if let (Some(hv), Some(hp)) = (self.images[v], self.images[p]) {
                    assert!(
                        host.has_edge(hv, hp),
                        "tree edge ({p},{v}) maps to non-edge ({hp},{hv})"
                    );
                }
            }
        }
    }

    /// As `verify`, but against an implicit blow-up host.
    fn verify_blowup(&self, forest: &RootedForest, host: &CycleBlowup) {
        let mut seen = vec![false; host.n()];
        for (v, h) in self.assigned() {
            assert!(h < host.n(), "image {h} of vertex {v} is out of range");
            assert!(!seen[h], "embedding is not injective at host vertex {h}");
            seen[h] = true;
        }
        for v in 0..forest.n() {
            if let Some(p) = forest.parent(v) {
                if let (Some(hv), Some(hp)) = (self.images[v], self.images[p]) {
                    assert!(
                        host.has_edge(hv, hp),
                        "tree edge ({p},{v}) maps to non-adjacent clusters"
                    );
                }
            }
        }
    }
}

/// Simulate the lazy-free symmetric walk on the cycle of length `ell`:
/// start at 0, move plus or minus one (mod `ell`) with equal probability
/// each step. Returns the empirical distribution of the position after
/// `steps` steps over `trials` independent runs.
pub fn simulate_walk(
    ell: usize,
    steps: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, WalkError> {
    if ell < 3 {
        return Err(WalkError::CycleTooShort { ell });
    }
    if trials == 0 {
        return Err(WalkError::NoTrials);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; ell];
    let ell_i = ell as isize;
    for _ in 0..trials {
        let mut pos: isize = 0;
        let mut remaining = steps;
        while remaining > 0 {
            let batch = remaining.min(64);
            let mut bits = rng.next_u64();
            for _ in 0..batch {
                if bits & 1 == 1 {
                    pos += 1;
                    if pos == ell_i {
                        pos = 0;
                    }
                } else {
                    pos -= 1;
                    if pos < 0 {
                        pos = ell_i - 1;
                    }
                }
                bits >>= 1;
            }
            remaining -= batch;
        }
        counts[pos as usize] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| c as f64 / trials as f64)
        .collect())
}

/// The exact distribution of the same walk after `steps` steps, computed
/// by repeated application of the transition operator. Entries are exact
/// rationals with denominator `2^steps`.
pub fn exact_walk_distribution(ell: usize, steps: usize) -> Result<Vec<BigRational>, WalkError> {
    if ell < 3 {
        return Err(WalkError::CycleTooShort { ell });
    }
    let mut dist = vec![BigRational::zero(); ell];
    dist[0] = BigRational::one();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    for _ in 0..steps {
        let mut next = vec![BigRational::zero(); ell];
        for (i, mass) in dist.iter().enumerate() {
            if mass.is_zero() {
                continue;
            }
            let left = (i + ell - 1) % ell;
            let right = (i + 1) % ell;
            let half_mass = mass * &half;
            next[left] += &half_mass;
            next[right] += &half_mass;
        }
        dist = next;
    }
    Ok(dist)
}

/// Assign the vertices of a single rooted tree to the `ell` clusters of
/// a cycle by a randomized walk.
///
/// The tree is cut into chunks of roughly `n^(1-delta)` vertices. Chunks
/// are processed in order of increasing root depth (ties broken by
/// extraction order), which guarantees every vertex sees its parent
/// assigned first. The tree root gets a uniformly random cluster; every
/// other vertex gets its parent's cluster shifted by a fresh uniform
/// plus-or-minus-one step around the cycle.
///
/// Capacity is not enforced here: the returned `ClusterAssignment`
/// reports the observed loads and the caller decides whether they fit.
pub fn walk_assign_tree(
    tree: &RootedForest,
    params: &WalkEmbedParams,
) -> Result<ClusterAssignment, WalkError> {
    params.validate(tree.n())?;
    if tree.roots().len() != 1 {
        return Err(WalkError::NotOneTree {
            roots: tree.roots().len(),
        });
    }
    let n = tree.n();
    let ell = params.ell;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Chunk granularity n^(1-delta), at least 1.
    let t = (n as f64).powf(1.0 - params.delta).ceil() as usize;
    let t = t.clamp(1, n.max(1));
    let decomp = decompose_rooted_sets(
        tree,
        TreeDecompParams {
            t,
            delta: tree.delta(),
        },
    )?;

    // Order chunks by root depth, stable in extraction order. The base
    // chunk contains the tree root (depth 0) and therefore comes first;
    // every other chunk root is strictly deeper than its parent, so a
    // parent's chunk always precedes its child's.
    let mut order: Vec<usize> = (0..decomp.len()).collect();
    order.sort_by_key(|&i| decomp[i].0.distance_from_root);

    let mut cluster_of = vec![usize::MAX; n];
    let mut loads = vec![0usize; ell];
    let mut pair_loads = vec![0usize; ell];
    for &ci in &order {
        for &v in &decomp[ci].1 {
            let c = match tree.parent(v) {
                None => rng.gen_range(0..ell),
                Some(p) => {
                    let pc = cluster_of[p];
                    assert!(pc != usize::MAX, "parent of {v} not assigned yet");
                    if rng.gen_bool(0.5) {
                        (pc + 1) % ell
                    } else {
                        (pc + ell - 1) % ell
                    }
                }
            };
            cluster_of[v] = c;
            loads[c] += 1;
            if let Some(p) = tree.parent(v) {
                let pc = cluster_of[p];
                let pair = if (pc + 1) % ell == c { pc } else { c };
                pair_loads[pair] += 1;
            }
        }
    }

    // Every tree edge must join consecutive clusters, loads must sum to
    // the vertex count, and pair loads to the edge count.
    for v in 0..n {
        if let Some(p) = tree.parent(v) {
            let (a, b) = (cluster_of[v], cluster_of[p]);
            assert!(
                (a + 1) % ell == b || (b + 1) % ell == a,
                "tree edge ({p},{v}) spans non-consecutive clusters {b},{a}"
            );
        }
    }
    assert_eq!(loads.iter().sum::<usize>(), n);
    assert_eq!(pair_loads.iter().sum::<usize>(), n - 1);

    Ok(ClusterAssignment {
        cluster_of,
        loads,
        pair_loads,
    })
}

/// Why an embedding attempt sequence gave up: every attempt left some
/// cluster or cluster pair above the capacity `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapacityFailure {
    /// Number of assignments tried.
    pub attempts: usize,
    /// Capacity each attempt had to meet.
    pub capacity: usize,
    /// Smallest maximum cluster load seen across attempts.
    pub best_max_load: usize,
    /// Smallest maximum pair load seen across attempts.
    pub best_max_pair_load: usize,
}

/// Outcome of `walk_embed_tree`: either a full embedding or a structured
/// capacity report after exhausting the retry budget.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WalkEmbedOutcome {
    /// Every vertex realized; the embedding has been verified.
    Embedded(PartialEmbedding),
    /// No assignment within the retry budget respected the capacity.
    CapacityFailure(CapacityFailure),
}

/// Embed a tree into a cycle blow-up: draw walk assignments with fresh
/// seeds until one keeps every cluster load and pair load within the
/// capacity `params.m`, then realize it injectively (cluster by cluster,
/// vertices in index order take the lowest free slot).
///
/// Attempt `i` uses seed `params.seed + i`. After `params.retry_limit`
/// failed attempts the outcome is a `CapacityFailure` report rather than
/// an error: an over-capacity draw is an expected event, not a misuse.
pub fn walk_embed_tree(
    tree: &RootedForest,
    blowup: &CycleBlowup,
    params: &WalkEmbedParams,
) -> Result<WalkEmbedOutcome, WalkError> {
    params.validate(tree.n())?;
    if blowup.ell() != params.ell {
        return Err(WalkError::CycleMismatch {
            params: params.ell,
            blowup: blowup.ell(),
        });
    }
    if blowup.cluster_size() < params.m {
        return Err(WalkError::CapacityTooSmall {
            m: blowup.cluster_size(),
            n: tree.n(),
            ell: params.ell,
        });
    }
    let attempts = params.retry_limit.max(1);
    let mut best_load = usize::MAX;
    let mut best_pair = usize::MAX;
    for i in 0..attempts {
        let attempt_params = WalkEmbedParams {
            seed: params.seed.wrapping_add(i as u64),
            ..params.clone()
        };
        let assignment = walk_assign_tree(tree, &attempt_params)?;
        let ml = assignment.max_load();
        let mp = assignment.max_pair_load();
        best_load = best_load.min(ml);
        best_pair = best_pair.min(mp);
        if ml <= params.m && mp <= params.m {
            let mut used = vec![0usize; blowup.ell()];
            let mut emb = PartialEmbedding::new(tree.n());
            for v in 0..tree.n() {
                let c = assignment.cluster_of[v];
                emb.assign(v, blowup.vertex(c, used[c]));
                used[c] += 1;
            }
            emb.verify_blowup(tree, blowup);
            assert!(emb.is_total());
            return Ok(WalkEmbedOutcome::Embedded(emb));
        }
    }
    Ok(WalkEmbedOutcome::CapacityFailure(CapacityFailure {
        attempts,
        capacity: params.m,
        best_max_load: best_load,
        best_max_pair_load: best_pair,
    }))
}

/// Common neighbours of two distinct host vertices, ascending. Both
/// adjacency lists are sorted, so a single merge pass suffices.
fn common_neighbours(host: &SimpleGraph, a: VertexId, b: VertexId) -> Vec<VertexId> {
    let (na, nb) = (host.neighbours(a), host.neighbours(b));
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < na.len() && j < nb.len() {
        match na[i].cmp(&nb[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(na[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// How `embed_forest_greedy` treats its sufficient precondition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodegreeCheck {
    /// Verify that every host vertex pair has at least `|V(F)|` common
    /// neighbours before embedding; guarantees success.
    Enforce,
    /// Skip the quadratic check and embed best-effort; a dead end
    /// surfaces as `WalkError::NoCandidate`.
    Skip,
}

/// Extend a partial embedding of a forest `forest` into `host` to a full
/// one, greedily.
///
/// `anchors` lists the pre-embedded vertices; they must be pairwise at
/// distance at least 3 in the forest, and `phi` must assign exactly them,
/// injectively. Each remaining vertex then has at most one embedded
/// forest-neighbour at the moment it is processed: vertices are handled
/// component by component of `forest` minus the anchors, in breadth-first
/// order from each component's lowest-index vertex. A vertex constrained
/// by one embedded neighbour picks the lowest-index unused host neighbour
/// of that image; constrained by two, the lowest-index unused common
/// neighbour; unconstrained, the lowest-index unused host vertex.
///
/// With `CodegreeCheck::Enforce`, the host must satisfy: every pair of
/// distinct vertices has at least `forest.n()` common neighbours. That
/// makes every greedy step succeed. The check costs a pass over all host
/// pairs and may be skipped for best-effort use.
pub fn embed_forest_greedy(
    forest: &RootedForest,
    host: &SimpleGraph,
    anchors: &[VertexId],
    phi: &PartialEmbedding,
    check: CodegreeCheck,
) -> Result<PartialEmbedding, WalkError> {
    let n = forest.n();
    // Anchor set must be 3-independent: pairwise forest distance >= 3.
    for (i, &u) in anchors.iter().enumerate() {
        for &v in &anchors[i + 1..] {
            if let Some(d) = forest.distance(u, v) {
                if d < 3 {
                    return Err(WalkError::AnchorsTooClose { u, v, dist: d });
                }
            }
        }
    }
    // phi must assign exactly the anchors, injectively.
    if phi.domain_size() != n {
        return Err(WalkError::AnchorDomainMismatch { v: phi.domain_size() });
    }
    let mut is_anchor = vec![false; n];
    for &a in anchors {
        if a >= n || phi.image(a).is_none() {
            return Err(WalkError::AnchorDomainMismatch { v: a });
        }
        is_anchor[a] = true;
    }
    for v in 0..n {
        if phi.image(v).is_some() && !is_anchor[v] {
            return Err(WalkError::AnchorDomainMismatch { v });
        }
    }
    let mut used = vec![false; host.n()];
    for (_, h) in phi.assigned() {
        if used[h] {
            return Err(WalkError::AnchorNotInjective { host: h });
        }
        used[h] = true;
    }
    if check == CodegreeCheck::Enforce {
        for u in 0..host.n() {
            for v in (u + 1)..host.n() {
                let codegree = common_neighbours(host, u, v).len();
                if codegree < n {
                    return Err(WalkError::CodegreeTooSmall {
                        u,
                        v,
                        codegree,
                        need: n,
                    });
                }
            }
        }
    }

    let forest_graph = forest.to_graph();
    let mut emb = phi.clone();
    // Breadth-first orders of the components of forest-minus-anchors,
    // from each component's lowest-index vertex. Every vertex then has at
    // most one earlier non-anchor neighbour (its search parent) and, by
    // 3-independence, at most one anchor neighbour.
    let mut visited = is_anchor.clone();
    let mut queue = VecDeque::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            let mut constraints: Vec<VertexId> = Vec::new();
            for &w in forest_graph.neighbours(v) {
                if let Some(h) = emb.image(w) {
                    constraints.push(h);
                }
            }
            assert!(
                constraints.len() <= 2,
                "vertex {v} has {} embedded neighbours; ordering is broken",
                constraints.len()
            );
            let image = match constraints.as_slice() {
                [] => (0..host.n()).find(|&h| !used[h]),
                [a] => host.neighbours(*a).iter().copied().find(|&h| !used[h]),
                [a, b] => common_neighbours(host, *a, *b)
                    .into_iter()
                    .find(|&h| !used[h]),
                _ => unreachable!(),
            };
            let image = image.ok_or(WalkError::NoCandidate { vertex: v })?;
            emb.assign(v, image);
            used[image] = true;
            for &w in forest_graph.neighbours(v) {
                if !visited[w] {
                    visited[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    assert!(emb.is_total());
    emb.verify(forest, host);
    Ok(emb)
}

/// Pick one extra endpoint in `targets` for each of a list of partially
/// fixed edges, greedily and deterministically.
///
/// Edge `i` has a fixed endpoint `sources[i]` and must get a second
/// endpoint `v_i` with: `v_i` a neighbour of `sources[i]` inside
/// `targets`, outside the per-edge forbidden set `forbidden[i]`, all
/// chosen edges distinct, no target chosen more than `multiplicity`
/// times, and for every edge `ij` of the conflict graph `conflicts` the
/// chosen endpoints avoid each other's fixed endpoints and each other.
///
/// Sufficient precondition, checked before any choice is made: for every
/// `i`, the degree of `sources[i]` into `targets` minus `|forbidden[i]|`
/// is at least `3*D + m/multiplicity + multiplicity`, where `D` bounds
/// both the conflict-graph degree and the number of edges sharing a
/// source, and `m` is the number of edges. The bound is evaluated in
/// exact arithmetic.
pub fn sparse_edge_embedding(
    host: &SimpleGraph,
    targets: &[VertexId],
    sources: &[VertexId],
    forbidden: &[Vec<VertexId>],
    conflicts: &SimpleGraph,
    multiplicity: usize,
) -> Result<Vec<(VertexId, VertexId)>, WalkError> {
    let m = sources.len();
    if forbidden.len() != m || conflicts.n() != m {
        return Err(WalkError::SparseShapeMismatch);
    }
    if multiplicity == 0 {
        return Err(WalkError::ZeroMultiplicity);
    }
    if m == 0 {
        return Ok(Vec::new());
    }
    let mut in_targets = vec![false; host.n()];
    for &t in targets {
        if t >= host.n() {
            return Err(GraphError::VertexOutOfRange { v: t, n: host.n() }.into());
        }
        in_targets[t] = true;
    }

    // D bounds the conflict degree and the source multiplicities.
    let mut source_mult = std::collections::HashMap::new();
    for &u in sources {
        if u >= host.n() {
            return Err(GraphError::VertexOutOfRange { v: u, n: host.n() }.into());
        }
        *source_mult.entry(u).or_insert(0usize) += 1;
    }
    let d_bound = source_mult
        .values()
        .copied()
        .max()
        .unwrap_or(0)
        .max(conflicts.max_degree());

    // Precondition, in exact arithmetic: for each edge, usable degree at
    // the source must cover every exclusion budget below.
    let need = BigRational::from_integer(BigInt::from(3 * d_bound + multiplicity))
        + BigRational::new(BigInt::from(m), BigInt::from(multiplicity));
    for (i, &u) in sources.iter().enumerate() {
        let deg_into = host
            .neighbours(u)
            .iter()
            .filter(|&&w| in_targets[w])
            .count();
        let have =
            BigRational::from_integer(BigInt::from(deg_into)) - BigRational::from_integer(BigInt::from(forbidden[i].len()));
        if have < need {
            return Err(WalkError::SparseDegreeTooSmall {
                index: i,
                have: have.to_string(),
                need: need.to_string(),
            });
        }
    }

    let mut chosen: Vec<VertexId> = Vec::with_capacity(m);
    let mut target_count = vec![0usize; host.n()];
    for i in 0..m {
        let u = sources[i];
        let mut pick = None;
        'cand: for &w in host.neighbours(u) {
            if !in_targets[w] || forbidden[i].contains(&w) {
                continue;
            }
            // Distinct edges: never reuse a target at the same source,
            // and never pick the reverse of an already chosen edge.
            for j in 0..i {
                if sources[j] == u && chosen[j] == w {
                    continue 'cand;
                }
                if sources[j] == w && chosen[j] == u {
                    continue 'cand;
                }
            }
            // Per-target multiplicity cap.
            if target_count[w] >= multiplicity {
                continue;
            }
            // Conflict-graph exclusions: avoid fixed endpoints of all
            // conflicting edges and chosen endpoints of earlier ones.
            for &j in conflicts.neighbours(i) {
                if sources[j] == w {
                    continue 'cand;
                }
                if j < i && chosen[j] == w {
                    continue 'cand;
                }
            }
            pick = Some(w);
            break;
        }
        let w = pick.ok_or(WalkError::SparseExhausted { index: i })?;
        target_count[w] += 1;
        chosen.push(w);
    }

    // Re-verify every requirement on the finished selection.
    let mut seen_edges = std::collections::HashSet::new();
    for i in 0..m {
        let (u, w) = (sources[i], chosen[i]);
        assert!(in_targets[w] && !forbidden[i].contains(&w));
        assert!(host.has_edge(u, w));
        let key = (u.min(w), u.max(w));
        assert!(seen_edges.insert(key), "edge ({u},{w}) chosen twice");
        for &j in conflicts.neighbours(i) {
            assert!(chosen[i] != sources[j], "conflict: endpoint hits a fixed endpoint");
            assert!(chosen[i] != chosen[j], "conflict: endpoints collide");
        }
    }
    for &c in target_count.iter() {
        assert!(c <= multiplicity);
    }
    Ok(sources.iter().copied().zip(chosen).collect())
}
