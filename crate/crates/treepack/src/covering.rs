//! Covering gadgets: embed reserved trees so that designated leftover
//! structures — a matching on the unsafe side, a single parity-fixing
//! edge, a flock of seagulls, or the star at an exceptional vertex — are
//! covered exactly, while every other tree edge lands inside a safe
//! vertex region.
//!
//! All four operations place a few special tree vertices by hand (onto
//! the payload) and hand the rest of the tree to the shared greedy
//! completion backend [`embed_forest_greedy`], restricted to the safe
//! region. The hand-placed vertices are chosen well-separated inside the
//! tree so that, after their removal, the remaining anchors are
//! 3-independent and the greedy backend applies. Every finished
//! embedding passes a hard shape check: the image edges leaving the safe
//! region are exactly the designated ones, and no image vertex is
//! forbidden.

use crate::cycles::Flock;
use crate::diagnostics::{
    greedy_k_independent_matching_among, greedy_k_independent_set, DiagnosticsError,
};
use crate::graph::{induced_with_map, remove_edges, GraphError, SimpleGraph, VertexId};
use crate::tree::{RootedForest, TreeError};
use crate::walk::{embed_forest_greedy, CodegreeCheck, PartialEmbedding, WalkError};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum CoverError {
    #[error("reserved tree must be a single component, found {components}")]
    NotOneComponent { components: usize },
    #[error("forest has {roots} roots but {images} root images")]
    RootCountMismatch { roots: usize, images: usize },
    #[error("root image {v} must lie in the safe region and outside the forbidden set")]
    RootImageUnsafe { v: VertexId },
    #[error("operation needs a {expected} payload, target holds {got}")]
    WrongPayload {
        expected: &'static str,
        got: &'static str,
    },
    #[error("payload edge ({u},{v}) is not an edge of the available graph")]
    PayloadEdgeMissing { u: VertexId, v: VertexId },
    #[error("payload vertex {v} repeats; payload edges must be pairwise vertex-disjoint")]
    PayloadNotDisjoint { v: VertexId },
    #[error("payload vertex {v} lies on the wrong side of the safe region")]
    PayloadSide { v: VertexId },
    #[error("payload vertex {v} is forbidden")]
    PayloadForbidden { v: VertexId },
    #[error("payload or image vertex {v} collides with a designated anchor image")]
    AnchorClash { v: VertexId },
    #[error("tree supplies {have} well-separated deep matching edges, need {need}")]
    MatchingCapacity { have: usize, need: usize },
    #[error("tree supplies {have} well-separated degree-2 vertices, need {need}")]
    SpineCapacity { have: usize, need: usize },
    #[error("tree supplies {have} well-separated leaf attachments, need {need}")]
    LeafCapacity { have: usize, need: usize },
    #[error("no leaf at distance >= 4 from the root; the deepest leaf sits at {best}")]
    NoQualifyingLeaf { best: usize },
    #[error("star at {center} needs {need} fresh leaves, only {have} available")]
    StarExhausted {
        center: VertexId,
        need: usize,
        have: usize,
    },
    #[error("residual degree {residual} at the exceptional vertex exceeds the budget {budget}")]
    CapacityExhausted { residual: usize, budget: usize },
    #[error("anchor image {v} lies outside the safe embedding region")]
    RegionVertexMissing { v: VertexId },
    #[error(transparent)]
    Backend(#[from] WalkError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

/// The leftover structure a covering call must absorb.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverPayload {
    /// A vertex outside the safe region whose incident edges are drained.
    ExceptionalVertex(VertexId),
    /// Vertex-disjoint edges with both endpoints outside the safe region.
    Matching(Vec<(VertexId, VertexId)>),
    /// One edge from the safe region to the outside; covering it flips
    /// the outside endpoint's leftover parity.
    ParityEdge(VertexId, VertexId),
    /// Vertex-disjoint wing–center–wing paths, wings inside the safe
    /// region and centers outside.
    SeagullFlock(Flock),
}

impl CoverPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            CoverPayload::ExceptionalVertex(_) => "exceptional-vertex",
            CoverPayload::Matching(_) => "matching",
            CoverPayload::ParityEdge(_, _) => "parity-edge",
            CoverPayload::SeagullFlock(_) => "seagull-flock",
        }
    }
}

/// A covering task: the payload plus the region discipline every
/// non-designated tree vertex must obey.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverTarget {
    pub payload: CoverPayload,
    /// Vertices the non-designated part of the tree may land on; sorted.
    pub safe_region: Vec<VertexId>,
    /// Vertices no image may touch at all; sorted.
    pub forbidden: Vec<VertexId>,
}

impl CoverTarget {
    pub fn new(
        payload: CoverPayload,
        mut safe_region: Vec<VertexId>,
        mut forbidden: Vec<VertexId>,
    ) -> Self {
        safe_region.sort_unstable();
        safe_region.dedup();
        forbidden.sort_unstable();
        forbidden.dedup();
        CoverTarget {
            payload,
            safe_region,
            forbidden,
        }
    }

    pub fn kind(&self) -> &'static str {
        self.payload.kind()
    }

    pub fn is_safe(&self, v: VertexId) -> bool {
        self.safe_region.binary_search(&v).is_ok()
    }

    pub fn is_forbidden(&self, v: VertexId) -> bool {
        self.forbidden.binary_search(&v).is_ok()
    }

    /// Safe region minus the forbidden set: where greedy completion runs.
    fn region(&self) -> Vec<VertexId> {
        self.safe_region
            .iter()
            .copied()
            .filter(|&v| !self.is_forbidden(v))
            .collect()
    }
}

/// A single tree reserved for covering duty: one component whose root is
/// pinned to a prescribed host vertex inside the safe region.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReservedTree {
    pub tree: RootedForest,
    pub root_image: VertexId,
}

impl ReservedTree {
    pub fn new(tree: RootedForest, root_image: VertexId) -> Result<Self, CoverError> {
        if tree.num_components() != 1 {
            return Err(CoverError::NotOneComponent {
                components: tree.num_components(),
            });
        }
        Ok(ReservedTree { tree, root_image })
    }

    pub fn root(&self) -> VertexId {
        self.tree.roots()[0]
    }
}

/// A reserved forest for exceptional-vertex duty: one prescribed image
/// per component root, plus a private forbidden set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReservedForest {
    pub forest: RootedForest,
    /// One image per root, parallel to `forest.roots()`.
    pub root_images: Vec<VertexId>,
    /// Vertices this forest's image must avoid entirely.
    pub forbidden: Vec<VertexId>,
}

/// Which trees cover a seagull flock.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeagullCoverer {
    /// One tree; well-separated degree-2 vertices land on the centers.
    Single(ReservedTree),
    /// Two trees; a leaf of each lands on every center, so each tree
    /// realizes one wing edge per seagull.
    Pair(ReservedTree, ReservedTree),
}

/// Result of draining an exceptional vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExceptionalCover {
    /// `(index into the forest list, finished embedding)` in order.
    pub embeddings: Vec<(usize, PartialEmbedding)>,
    /// Forests passed over (forbidden vertex, no designated fit, ...).
    pub skipped: Vec<usize>,
    /// Degree left at the exceptional vertex when covering stopped.
    pub residual: usize,
}

/// Embed the reserved tree so that the image covers exactly the payload
/// matching among edges outside the safe region. Each matching edge is
/// realized by a well-separated tree edge far from the root; the matched
/// vertices' remaining tree neighbours are pinned to star leaves around
/// the payload endpoints, and the rest of the tree completes greedily
/// inside the safe region.
pub fn cover_matching_with_tree(
    tree: &ReservedTree,
    avail: &SimpleGraph,
    target: &CoverTarget,
) -> Result<PartialEmbedding, CoverError> {
    let matching = match &target.payload {
        CoverPayload::Matching(m) => m,
        other => {
            return Err(CoverError::WrongPayload {
                expected: "matching",
                got: other.kind(),
            })
        }
    };
    validate_tree_anchor(tree, target)?;

    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    let mut pairs_host: Vec<(VertexId, VertexId)> = Vec::with_capacity(matching.len());
    for &(u, v) in matching {
        if u >= avail.n() || v >= avail.n() || !avail.has_edge(u, v) {
            return Err(CoverError::PayloadEdgeMissing { u, v });
        }
        for w in [u, v] {
            if target.is_safe(w) {
                return Err(CoverError::PayloadSide { v: w });
            }
            if target.is_forbidden(w) {
                return Err(CoverError::PayloadForbidden { v: w });
            }
            if !seen.insert(w) {
                return Err(CoverError::PayloadNotDisjoint { v: w });
            }
        }
        pairs_host.push((u.min(v), u.max(v)));
    }

    let t = &tree.tree;
    let root = tree.root();

    // Designated tree edges: a 5-independent matching among edges whose
    // endpoints both sit at distance >= 4 from the root.
    let deep: Vec<(VertexId, VertexId)> = t
        .edges()
        .into_iter()
        .filter(|&(u, v)| t.depth(u) >= 4 && t.depth(v) >= 4)
        .collect();
    let designated_pairs = if pairs_host.is_empty() {
        Vec::new()
    } else {
        let found = greedy_k_independent_matching_among(&t.to_graph(), 5, &deep)?;
        if found.len() < pairs_host.len() {
            return Err(CoverError::MatchingCapacity {
                have: found.len(),
                need: pairs_host.len(),
            });
        }
        found[..pairs_host.len()].to_vec()
    };

    let region = target.region();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    used.insert(tree.root_image);
    let mut anchors: Vec<(VertexId, VertexId)> = vec![(root, tree.root_image)];
    let mut specials: Vec<(VertexId, VertexId)> = Vec::new();
    let mut removed: Vec<VertexId> = Vec::new();
    let mut designated_edges: Vec<(VertexId, VertexId)> = pairs_host.clone();

    for (&(x, z), &(mu, mv)) in designated_pairs.iter().zip(&pairs_host) {
        removed.push(x);
        removed.push(z);
        specials.push((x, mu));
        specials.push((z, mv));
        // Pin each matched vertex's remaining tree neighbours to fresh
        // star leaves around its payload endpoint.
        for (tv, other, center) in [(x, z, mu), (z, x, mv)] {
            let nbs: Vec<VertexId> = tree_neighbours(t, tv)
                .into_iter()
                .filter(|&w| w != other)
                .collect();
            let pool: Vec<VertexId> = avail
                .neighbours(center)
                .iter()
                .copied()
                .filter(|&w| region.binary_search(&w).is_ok() && !used.contains(&w))
                .collect();
            if pool.len() < nbs.len() {
                return Err(CoverError::StarExhausted {
                    center,
                    need: nbs.len(),
                    have: pool.len(),
                });
            }
            for (&w, &leaf) in nbs.iter().zip(&pool) {
                anchors.push((w, leaf));
                used.insert(leaf);
                designated_edges.push((center.min(leaf), center.max(leaf)));
            }
        }
    }

    let emb = place_and_complete(t, avail, &region, &removed, &anchors, &specials)?;
    assert_cover_shape(target, &[], t, &emb, &designated_edges);
    Ok(emb)
}

/// Embed the reserved tree so that exactly one edge of the image leaves
/// the safe region: the payload edge. A leaf at distance >= 4 from the
/// root lands on the outside endpoint, flipping that vertex's leftover
/// parity, and its neighbour lands on the inside endpoint.
pub fn fix_parity_with_tree(
    tree: &ReservedTree,
    avail: &SimpleGraph,
    target: &CoverTarget,
) -> Result<PartialEmbedding, CoverError> {
    let (u, v) = match target.payload {
        CoverPayload::ParityEdge(u, v) => (u, v),
        ref other => {
            return Err(CoverError::WrongPayload {
                expected: "parity-edge",
                got: other.kind(),
            })
        }
    };
    validate_tree_anchor(tree, target)?;
    if u >= avail.n() || v >= avail.n() || !avail.has_edge(u, v) {
        return Err(CoverError::PayloadEdgeMissing { u, v });
    }
    if !target.is_safe(u) {
        return Err(CoverError::PayloadSide { v: u });
    }
    if target.is_safe(v) {
        return Err(CoverError::PayloadSide { v });
    }
    for w in [u, v] {
        if target.is_forbidden(w) {
            return Err(CoverError::PayloadForbidden { v: w });
        }
    }
    if u == tree.root_image {
        return Err(CoverError::AnchorClash { v: u });
    }

    let t = &tree.tree;
    let root = tree.root();
    let mut best = 0;
    let mut pick = None;
    for w in 0..t.n() {
        if w != root && t.is_leaf(w) {
            let d = t.depth(w);
            best = best.max(d);
            if d >= 4 && pick.is_none() {
                pick = Some(w);
            }
        }
    }
    let leaf = pick.ok_or(CoverError::NoQualifyingLeaf { best })?;
    let x = t.parent(leaf).expect("a deep leaf has a parent");

    let region = target.region();
    let emb = place_and_complete(
        t,
        avail,
        &region,
        &[leaf],
        &[(root, tree.root_image), (x, u)],
        &[(leaf, v)],
    )?;
    assert_cover_shape(target, &[], t, &emb, &[(u.min(v), u.max(v))]);
    Ok(emb)
}

/// Cover a flock of seagulls. In single-tree mode, well-separated
/// degree-2 tree vertices land on the centers with their two neighbours
/// on the wings. In pair mode, each tree pins one well-separated
/// leaf-neighbour per seagull onto a wing and sends the attached leaf to
/// the center, so the two images share the center vertices while staying
/// edge-disjoint. Either way, every vertex outside the safe region ends
/// with even covered degree.
pub fn cover_seagulls_with_tree(
    coverer: &SeagullCoverer,
    avail: &SimpleGraph,
    target: &CoverTarget,
) -> Result<Vec<PartialEmbedding>, CoverError> {
    let flock = match &target.payload {
        CoverPayload::SeagullFlock(f) => f,
        other => {
            return Err(CoverError::WrongPayload {
                expected: "seagull-flock",
                got: other.kind(),
            })
        }
    };
    let mut seen: BTreeSet<VertexId> = BTreeSet::new();
    for sg in flock {
        for (a, b) in [(sg.wing1, sg.center), (sg.center, sg.wing2)] {
            if a >= avail.n() || b >= avail.n() || !avail.has_edge(a, b) {
                return Err(CoverError::PayloadEdgeMissing { u: a, v: b });
            }
        }
        for w in [sg.wing1, sg.wing2] {
            if !target.is_safe(w) {
                return Err(CoverError::PayloadSide { v: w });
            }
        }
        if target.is_safe(sg.center) {
            return Err(CoverError::PayloadSide { v: sg.center });
        }
        for w in [sg.wing1, sg.center, sg.wing2] {
            if target.is_forbidden(w) {
                return Err(CoverError::PayloadForbidden { v: w });
            }
            if !seen.insert(w) {
                return Err(CoverError::PayloadNotDisjoint { v: w });
            }
        }
    }

    match coverer {
        SeagullCoverer::Single(rt) => {
            let emb = seagulls_via_spine(rt, avail, target, flock)?;
            Ok(vec![emb])
        }
        SeagullCoverer::Pair(ta, tb) => {
            let emb_a = seagulls_via_leaves(ta, avail, target, flock, true)?;
            let edges_a = embedded_edges(&ta.tree, &emb_a);
            let avail_b = remove_edges(avail, &edges_a)?;
            let emb_b = seagulls_via_leaves(tb, &avail_b, target, flock, false)?;
            let edges_b = embedded_edges(&tb.tree, &emb_b);
            let first: BTreeSet<(VertexId, VertexId)> = edges_a.iter().copied().collect();
            for e in &edges_b {
                assert!(!first.contains(e), "pair images share edge {e:?}");
            }
            let mut all = edges_a;
            all.extend(edges_b);
            assert_even_unsafe_degrees(target, &all);
            Ok(vec![emb_a, emb_b])
        }
    }
}

/// Drain an exceptional vertex: embed reserved forests one after another,
/// each routing one well-separated vertex of degree >= 2 onto the
/// exceptional vertex (consuming that many of its edges), until its
/// residual degree is at most `budget`.
pub fn cover_exceptional_vertex(
    forests: &[ReservedForest],
    avail: &SimpleGraph,
    target: &CoverTarget,
    budget: usize,
) -> Result<ExceptionalCover, CoverError> {
    let v0 = match target.payload {
        CoverPayload::ExceptionalVertex(v) => v,
        ref other => {
            return Err(CoverError::WrongPayload {
                expected: "exceptional-vertex",
                got: other.kind(),
            })
        }
    };
    if v0 >= avail.n() {
        return Err(CoverError::Graph(GraphError::VertexOutOfRange {
            v: v0,
            n: avail.n(),
        }));
    }
    if target.is_safe(v0) {
        return Err(CoverError::PayloadSide { v: v0 });
    }
    if target.is_forbidden(v0) {
        return Err(CoverError::PayloadForbidden { v: v0 });
    }

    let mut work = avail.clone();
    let mut out = ExceptionalCover {
        embeddings: Vec::new(),
        skipped: Vec::new(),
        residual: work.degree(v0),
    };

    for (idx, rf) in forests.iter().enumerate() {
        if out.residual <= budget {
            break;
        }
        if rf.forbidden.contains(&v0) {
            out.skipped.push(idx);
            continue;
        }
        let f = &rf.forest;
        let roots = f.roots().to_vec();
        if roots.len() != rf.root_images.len() {
            return Err(CoverError::RootCountMismatch {
                roots: roots.len(),
                images: rf.root_images.len(),
            });
        }
        let mut region = target.region();
        region.retain(|w| !rf.forbidden.contains(w));
        let mut image_seen: BTreeSet<VertexId> = BTreeSet::new();
        for &ri in &rf.root_images {
            if region.binary_search(&ri).is_err() {
                return Err(CoverError::RootImageUnsafe { v: ri });
            }
            if !image_seen.insert(ri) {
                return Err(CoverError::AnchorClash { v: ri });
            }
        }

        // Star-leaf pool: remaining neighbours of the exceptional vertex
        // inside the region, best-connected first.
        let mut cands: Vec<VertexId> = work
            .neighbours(v0)
            .iter()
            .copied()
            .filter(|w| region.binary_search(w).is_ok() && !image_seen.contains(w))
            .collect();
        cands.sort_by_key(|&w| {
            let deg_region = work
                .neighbours(w)
                .iter()
                .filter(|x| region.binary_search(x).is_ok())
                .count();
            (usize::MAX - deg_region, w)
        });

        // The designated vertex: well-separated from the roots, degree
        // >= 2, the largest degree that still fits the pool and the
        // residual, lowest index on ties.
        let pool: Vec<VertexId> = (0..f.n())
            .filter(|&w| roots.contains(&w) || f.degree(w) >= 2)
            .collect();
        let ind = greedy_k_independent_set(&f.to_graph(), 5, &roots, &pool)?;
        let pick = ind
            .into_iter()
            .filter(|w| !roots.contains(w))
            .filter(|&w| f.degree(w) <= cands.len() && f.degree(w) <= out.residual)
            .max_by_key(|&w| (f.degree(w), usize::MAX - w));
        let Some(y) = pick else {
            out.skipped.push(idx);
            continue;
        };

        let nbs = tree_neighbours(f, y);
        let mut leaves = cands[..nbs.len()].to_vec();
        leaves.sort_unstable();
        let mut anchors: Vec<(VertexId, VertexId)> = roots
            .iter()
            .copied()
            .zip(rf.root_images.iter().copied())
            .collect();
        let mut designated: Vec<(VertexId, VertexId)> = Vec::with_capacity(nbs.len());
        for (&w, &leaf) in nbs.iter().zip(&leaves) {
            anchors.push((w, leaf));
            designated.push((v0.min(leaf), v0.max(leaf)));
        }

        let emb = place_and_complete(f, &work, &region, &[y], &anchors, &[(y, v0)])?;
        assert_cover_shape(target, &rf.forbidden, f, &emb, &designated);
        let used = embedded_edges(f, &emb);
        let at_v0 = used.iter().filter(|&&(a, b)| a == v0 || b == v0).count();
        assert_eq!(at_v0, nbs.len(), "exceptional vertex edge count is off");
        assert!(at_v0 >= 2, "each drain must consume at least 2 edges");
        work = remove_edges(&work, &used)?;
        out.embeddings.push((idx, emb));
        out.residual = work.degree(v0);
    }

    if out.residual > budget {
        return Err(CoverError::CapacityExhausted {
            residual: out.residual,
            budget,
        });
    }
    Ok(out)
}

/// One JSON line describing a finished covering step, for debug dumps.
pub fn cover_step_json(op: &str, target: &CoverTarget, embeddings: &[&PartialEmbedding]) -> String {
    let maps: Vec<Vec<[usize; 2]>> = embeddings
        .iter()
        .map(|e| e.assigned().map(|(v, h)| [v, h]).collect())
        .collect();
    serde_json::json!({
        "op": op,
        "kind": target.kind(),
        "safe": target.safe_region.len(),
        "forbidden": target.forbidden.len(),
        "maps": maps,
    })
    .to_string()
}

/// Single-tree seagull mode: one degree-2 vertex per center.
fn seagulls_via_spine(
    rt: &ReservedTree,
    avail: &SimpleGraph,
    target: &CoverTarget,
    flock: &Flock,
) -> Result<PartialEmbedding, CoverError> {
    validate_tree_anchor(rt, target)?;
    for sg in flock {
        if sg.wing1 == rt.root_image || sg.wing2 == rt.root_image {
            return Err(CoverError::AnchorClash { v: rt.root_image });
        }
    }
    let t = &rt.tree;
    let root = rt.root();
    let s = flock.len();

    let pool: Vec<VertexId> = (0..t.n())
        .filter(|&w| w == root || t.degree(w) == 2)
        .collect();
    let ind = greedy_k_independent_set(&t.to_graph(), 5, &[root], &pool)?;
    let spine: Vec<VertexId> = ind.into_iter().filter(|&w| w != root).take(s).collect();
    if spine.len() < s {
        return Err(CoverError::SpineCapacity {
            have: spine.len(),
            need: s,
        });
    }

    let mut anchors = vec![(root, rt.root_image)];
    let mut specials = Vec::with_capacity(s);
    let mut designated = Vec::with_capacity(2 * s);
    for (&y, sg) in spine.iter().zip(flock) {
        let nb = tree_neighbours(t, y);
        assert_eq!(nb.len(), 2, "spine vertex must have degree 2");
        anchors.push((nb[0], sg.wing1));
        anchors.push((nb[1], sg.wing2));
        specials.push((y, sg.center));
        designated.push((sg.wing1.min(sg.center), sg.wing1.max(sg.center)));
        designated.push((sg.wing2.min(sg.center), sg.wing2.max(sg.center)));
    }

    let region = target.region();
    let emb = place_and_complete(t, avail, &region, &spine, &anchors, &specials)?;
    assert_cover_shape(target, &[], t, &emb, &designated);
    assert_even_unsafe_degrees(target, &embedded_edges(t, &emb));
    Ok(emb)
}

/// Pair seagull mode, one tree's half: pin a leaf-neighbour per seagull
/// onto this tree's wing and send the attached leaf to the center.
fn seagulls_via_leaves(
    rt: &ReservedTree,
    avail: &SimpleGraph,
    target: &CoverTarget,
    flock: &Flock,
    first_wing: bool,
) -> Result<PartialEmbedding, CoverError> {
    validate_tree_anchor(rt, target)?;
    let wing = |sg: &crate::cycles::Seagull| if first_wing { sg.wing1 } else { sg.wing2 };
    for sg in flock {
        if wing(sg) == rt.root_image {
            return Err(CoverError::AnchorClash { v: rt.root_image });
        }
    }
    let t = &rt.tree;
    let root = rt.root();
    let s = flock.len();

    let leafish: Vec<bool> = (0..t.n()).map(|w| w != root && t.is_leaf(w)).collect();
    let pool: Vec<VertexId> = (0..t.n())
        .filter(|&w| w == root || tree_neighbours(t, w).iter().any(|&u| leafish[u]))
        .collect();
    let ind = greedy_k_independent_set(&t.to_graph(), 3, &[root], &pool)?;
    let ys: Vec<VertexId> = ind.into_iter().filter(|&w| w != root).take(s).collect();
    if ys.len() < s {
        return Err(CoverError::LeafCapacity {
            have: ys.len(),
            need: s,
        });
    }

    let mut anchors = vec![(root, rt.root_image)];
    let mut specials = Vec::with_capacity(s);
    let mut removed = Vec::with_capacity(s);
    let mut designated = Vec::with_capacity(s);
    for (&y, sg) in ys.iter().zip(flock) {
        let leaf = tree_neighbours(t, y)
            .into_iter()
            .find(|&u| leafish[u])
            .expect("pool vertices have a leaf neighbour");
        anchors.push((y, wing(sg)));
        specials.push((leaf, sg.center));
        removed.push(leaf);
        designated.push((wing(sg).min(sg.center), wing(sg).max(sg.center)));
    }

    let region = target.region();
    let emb = place_and_complete(t, avail, &region, &removed, &anchors, &specials)?;
    assert_cover_shape(target, &[], t, &emb, &designated);
    Ok(emb)
}

/// Shared tail of every covering operation: remove the hand-placed
/// vertices, greedily complete the reduced forest inside the region with
/// the given anchors, then compose with the hand placements and verify
/// the full embedding against the host.
fn place_and_complete(
    tree: &RootedForest,
    host: &SimpleGraph,
    region: &[VertexId],
    removed: &[VertexId],
    anchors: &[(VertexId, VertexId)],
    specials: &[(VertexId, VertexId)],
) -> Result<PartialEmbedding, CoverError> {
    let (sub, new_to_old, old_to_new) = forest_without(tree, removed);
    let sub_anchors: Vec<(VertexId, VertexId)> = anchors
        .iter()
        .map(|&(v, img)| {
            let nv = old_to_new[v];
            assert!(nv != usize::MAX, "anchor {v} was removed from the forest");
            (nv, img)
        })
        .collect();
    let images = greedy_region_embed(host, region, &sub, &sub_anchors)?;

    let mut emb = PartialEmbedding::new(tree.n());
    for (sub_v, &img) in images.iter().enumerate() {
        emb.assign(new_to_old[sub_v], img);
    }
    for &(v, img) in specials {
        emb.assign(v, img);
    }
    emb.verify(tree, host);
    Ok(emb)
}

/// Run the shared greedy backend inside `region`, translating anchor
/// images in and the finished embedding back out to host ids.
pub(crate) fn greedy_region_embed(
    host: &SimpleGraph,
    region: &[VertexId],
    forest: &RootedForest,
    anchors: &[(VertexId, VertexId)],
) -> Result<Vec<VertexId>, CoverError> {
    let (sub, map) = induced_with_map(host, region)?;
    let mut host_to_sub = vec![usize::MAX; host.n()];
    for (s, &h) in map.iter().enumerate() {
        host_to_sub[h] = s;
    }
    let mut phi = PartialEmbedding::new(forest.n());
    let mut anchor_vs = Vec::with_capacity(anchors.len());
    for &(v, img) in anchors {
        if img >= host.n() || host_to_sub[img] == usize::MAX {
            return Err(CoverError::RegionVertexMissing { v: img });
        }
        phi.assign(v, host_to_sub[img]);
        anchor_vs.push(v);
    }
    let full = embed_forest_greedy(forest, &sub, &anchor_vs, &phi, CodegreeCheck::Skip)?;
    Ok((0..forest.n())
        .map(|v| map[full.image(v).expect("greedy embedding is total")])
        .collect())
}

/// The forest minus the given vertices, with the translation maps. Each
/// surviving component is re-rooted at its unique shallowest vertex (the
/// tree path between two equally deep vertices passes through a strictly
/// shallower one, which also survives).
pub(crate) fn forest_without(
    t: &RootedForest,
    removed: &[VertexId],
) -> (RootedForest, Vec<VertexId>, Vec<usize>) {
    let n = t.n();
    let mut gone = vec![false; n];
    for &v in removed {
        gone[v] = true;
    }
    let new_to_old: Vec<VertexId> = (0..n).filter(|&v| !gone[v]).collect();
    let mut old_to_new = vec![usize::MAX; n];
    for (nv, &ov) in new_to_old.iter().enumerate() {
        old_to_new[ov] = nv;
    }
    let edges: Vec<(VertexId, VertexId)> = t
        .edges()
        .into_iter()
        .filter(|&(u, v)| !gone[u] && !gone[v])
        .map(|(u, v)| (old_to_new[u], old_to_new[v]))
        .collect();

    let m = new_to_old.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut comp = vec![usize::MAX; m];
    let mut roots: Vec<VertexId> = Vec::new();
    for start in 0..m {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = roots.len();
        let mut stack = vec![start];
        comp[start] = id;
        let mut best = start;
        while let Some(v) = stack.pop() {
            let (dv, db) = (t.depth(new_to_old[v]), t.depth(new_to_old[best]));
            if (dv, v) < (db, best) {
                best = v;
            }
            for &w in &adj[v] {
                if comp[w] == usize::MAX {
                    comp[w] = id;
                    stack.push(w);
                }
            }
        }
        roots.push(best);
    }
    roots.sort_unstable();
    let sub = RootedForest::from_edges(m, &edges, &roots, None)
        .expect("reduced forest is well-formed");
    (sub, new_to_old, old_to_new)
}

/// Sorted tree neighbours (parent and children) of `v`.
pub(crate) fn tree_neighbours(t: &RootedForest, v: VertexId) -> Vec<VertexId> {
    let mut nb: Vec<VertexId> = t.children(v).to_vec();
    if let Some(p) = t.parent(v) {
        nb.push(p);
    }
    nb.sort_unstable();
    nb
}

fn validate_tree_anchor(tree: &ReservedTree, target: &CoverTarget) -> Result<(), CoverError> {
    if tree.tree.num_components() != 1 {
        return Err(CoverError::NotOneComponent {
            components: tree.tree.num_components(),
        });
    }
    let ri = tree.root_image;
    if !target.is_safe(ri) || target.is_forbidden(ri) {
        return Err(CoverError::RootImageUnsafe { v: ri });
    }
    Ok(())
}

/// Image edges of a total embedding, normalized ascending.
fn embedded_edges(t: &RootedForest, emb: &PartialEmbedding) -> Vec<(VertexId, VertexId)> {
    t.edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (
                emb.image(u).expect("embedding is total"),
                emb.image(v).expect("embedding is total"),
            );
            (a.min(b), a.max(b))
        })
        .collect()
}

/// Hard post-check: the image edges leaving the safe region are exactly
/// the designated ones, and no image vertex is forbidden.
fn assert_cover_shape(
    target: &CoverTarget,
    extra_forbidden: &[VertexId],
    tree: &RootedForest,
    emb: &PartialEmbedding,
    designated: &[(VertexId, VertexId)],
) {
    let mut want: Vec<(VertexId, VertexId)> = designated.to_vec();
    want.sort_unstable();
    let mut got: Vec<(VertexId, VertexId)> = embedded_edges(tree, emb)
        .into_iter()
        .filter(|&(a, b)| !target.is_safe(a) || !target.is_safe(b))
        .collect();
    got.sort_unstable();
    assert_eq!(
        got, want,
        "covered edges must be exactly the designated payload"
    );
    for (v, h) in emb.assigned() {
        assert!(
            !target.is_forbidden(h) && !extra_forbidden.contains(&h),
            "vertex {v} landed on forbidden host vertex {h}"
        );
    }
}

/// Every vertex outside the safe region must end with even covered degree.
fn assert_even_unsafe_degrees(target: &CoverTarget, covered: &[(VertexId, VertexId)]) {
    let mut deg: std::collections::BTreeMap<VertexId, usize> = std::collections::BTreeMap::new();
    for &(a, b) in covered {
        for v in [a, b] {
            if !target.is_safe(v) {
                *deg.entry(v).or_default() += 1;
            }
        }
    }
    for (v, d) in deg {
        assert!(d % 2 == 0, "unsafe vertex {v} has odd covered degree {d}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::Seagull;
    use crate::graph::gen;

    /// Safe clique on `0..a`, payload vertices beyond, given extra edges.
    fn host_with(a: usize, n: usize, extra: &[(VertexId, VertexId)]) -> SimpleGraph {
        let mut g = SimpleGraph::new(n);
        for u in 0..a {
            for v in u + 1..a {
                g.insert_edge(u, v);
            }
        }
        for &(u, v) in extra {
            g.insert_edge(u, v);
        }
        g
    }

    fn crossing(t: &RootedForest, emb: &PartialEmbedding, safe: usize) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = embedded_edges(t, emb)
            .into_iter()
            .filter(|&(a, b)| a >= safe || b >= safe)
            .collect();
        out.sort_unstable();
        out
    }

    #[test]
    fn empty_matching_is_a_plain_embedding() {
        let host = gen::complete(6);
        let target = CoverTarget::new(
            CoverPayload::Matching(Vec::new()),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(4), 2).unwrap();
        let emb = cover_matching_with_tree(&rt, &host, &target).unwrap();
        assert!(emb.is_total());
        assert_eq!(emb.image(0), Some(2));
    }

    #[test]
    fn single_matching_edge_lands_on_a_deep_pair() {
        let host = host_with(
            10,
            14,
            &[
                (10, 11),
                (12, 13),
                (10, 0),
                (10, 1),
                (10, 2),
                (11, 3),
                (11, 4),
                (11, 5),
                (12, 6),
                (13, 7),
            ],
        );
        let target = CoverTarget::new(
            CoverPayload::Matching(vec![(10, 11)]),
            (0..10).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(9), 9).unwrap();
        let emb = cover_matching_with_tree(&rt, &host, &target).unwrap();
        // The first deep well-separated path edge is (4,5).
        assert_eq!(emb.image(4), Some(10));
        assert_eq!(emb.image(5), Some(11));
        assert_eq!(emb.image(0), Some(9));
        // Star leaves: lowest fresh neighbours of each endpoint.
        assert_eq!(emb.image(3), Some(0));
        assert_eq!(emb.image(6), Some(3));
        assert_eq!(
            crossing(&rt.tree, &emb, 10),
            vec![(0, 10), (3, 11), (10, 11)]
        );
    }

    #[test]
    fn matching_beyond_tree_capacity_fails() {
        let host = host_with(10, 14, &[(10, 11), (12, 13), (10, 0), (11, 3)]);
        let target = CoverTarget::new(
            CoverPayload::Matching(vec![(10, 11), (12, 13)]),
            (0..10).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(9), 9).unwrap();
        let err = cover_matching_with_tree(&rt, &host, &target).unwrap_err();
        assert_eq!(err, CoverError::MatchingCapacity { have: 1, need: 2 });
    }

    #[test]
    fn matching_inside_safe_region_is_rejected() {
        let host = gen::complete(10);
        let target = CoverTarget::new(
            CoverPayload::Matching(vec![(0, 1)]),
            (0..10).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(9), 9).unwrap();
        let err = cover_matching_with_tree(&rt, &host, &target).unwrap_err();
        assert_eq!(err, CoverError::PayloadSide { v: 0 });
    }

    #[test]
    fn payload_kind_mismatch_is_reported() {
        let host = gen::complete(7);
        let target = CoverTarget::new(
            CoverPayload::ParityEdge(2, 6),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(4), 0).unwrap();
        let err = cover_matching_with_tree(&rt, &host, &target).unwrap_err();
        assert_eq!(
            err,
            CoverError::WrongPayload {
                expected: "matching",
                got: "parity-edge"
            }
        );
    }

    #[test]
    fn parity_edge_covered_by_a_far_leaf() {
        let host = host_with(6, 7, &[(2, 6)]);
        let target = CoverTarget::new(
            CoverPayload::ParityEdge(2, 6),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(6), 0).unwrap();
        let emb = fix_parity_with_tree(&rt, &host, &target).unwrap();
        assert_eq!(emb.image(5), Some(6));
        assert_eq!(emb.image(4), Some(2));
        assert_eq!(emb.image(0), Some(0));
        assert_eq!(crossing(&rt.tree, &emb, 6), vec![(2, 6)]);
    }

    #[test]
    fn star_has_no_deep_leaf_for_parity() {
        let host = host_with(6, 7, &[(2, 6)]);
        let target = CoverTarget::new(
            CoverPayload::ParityEdge(2, 6),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::star(5), 0).unwrap();
        let err = fix_parity_with_tree(&rt, &host, &target).unwrap_err();
        assert_eq!(err, CoverError::NoQualifyingLeaf { best: 1 });
    }

    #[test]
    fn parity_edge_must_cross_the_region_boundary() {
        let host = host_with(6, 7, &[(2, 6)]);
        let target = CoverTarget::new(
            CoverPayload::ParityEdge(2, 3),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(6), 0).unwrap();
        let err = fix_parity_with_tree(&rt, &host, &target).unwrap_err();
        assert_eq!(err, CoverError::PayloadSide { v: 3 });
    }

    #[test]
    fn spine_vertex_covers_a_seagull_center() {
        let host = host_with(12, 13, &[(6, 12), (7, 12)]);
        let flock = vec![Seagull {
            wing1: 6,
            center: 12,
            wing2: 7,
        }];
        let target = CoverTarget::new(
            CoverPayload::SeagullFlock(flock),
            (0..12).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(11), 0).unwrap();
        let out =
            cover_seagulls_with_tree(&SeagullCoverer::Single(rt.clone()), &host, &target).unwrap();
        assert_eq!(out.len(), 1);
        let emb = &out[0];
        assert_eq!(emb.image(5), Some(12));
        assert_eq!(emb.image(4), Some(6));
        assert_eq!(emb.image(6), Some(7));
        assert_eq!(emb.image(0), Some(0));
        assert_eq!(crossing(&rt.tree, emb, 12), vec![(6, 12), (7, 12)]);
    }

    #[test]
    fn empty_flock_is_a_plain_embedding() {
        let host = gen::complete(6);
        let target = CoverTarget::new(
            CoverPayload::SeagullFlock(Vec::new()),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(5), 3).unwrap();
        let out = cover_seagulls_with_tree(&SeagullCoverer::Single(rt), &host, &target).unwrap();
        assert_eq!(out.len(), 1);
        assert!(out[0].is_total());
        assert_eq!(out[0].image(0), Some(3));
    }

    #[test]
    fn short_path_lacks_spine_capacity() {
        let host = host_with(12, 13, &[(6, 12), (7, 12)]);
        let flock = vec![Seagull {
            wing1: 6,
            center: 12,
            wing2: 7,
        }];
        let target = CoverTarget::new(
            CoverPayload::SeagullFlock(flock),
            (0..12).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(6), 0).unwrap();
        let err = cover_seagulls_with_tree(&SeagullCoverer::Single(rt), &host, &target).unwrap_err();
        assert_eq!(err, CoverError::SpineCapacity { have: 0, need: 1 });
    }

    #[test]
    fn tree_pair_shares_each_center() {
        let host = host_with(12, 13, &[(6, 12), (7, 12)]);
        let flock = vec![Seagull {
            wing1: 6,
            center: 12,
            wing2: 7,
        }];
        let target = CoverTarget::new(
            CoverPayload::SeagullFlock(flock),
            (0..12).collect(),
            Vec::new(),
        );
        let ta = ReservedTree::new(RootedForest::spider(2, 4), 0).unwrap();
        let tb = ReservedTree::new(RootedForest::spider(2, 4), 1).unwrap();
        let out = cover_seagulls_with_tree(
            &SeagullCoverer::Pair(ta.clone(), tb.clone()),
            &host,
            &target,
        )
        .unwrap();
        assert_eq!(out.len(), 2);
        // Each tree pins a leaf-neighbour to its wing and the leaf itself
        // to the shared center.
        assert_eq!(out[0].image(3), Some(6));
        assert_eq!(out[1].image(3), Some(7));
        assert_eq!(out[0].image(4), Some(12));
        assert_eq!(out[1].image(4), Some(12));
        assert_eq!(crossing(&ta.tree, &out[0], 12), vec![(6, 12)]);
        assert_eq!(crossing(&tb.tree, &out[1], 12), vec![(7, 12)]);
        let ea: BTreeSet<_> = embedded_edges(&ta.tree, &out[0]).into_iter().collect();
        for e in embedded_edges(&tb.tree, &out[1]) {
            assert!(!ea.contains(&e));
        }
    }

    #[test]
    fn pair_mode_needs_enough_leaf_attachments() {
        let host = host_with(12, 14, &[(6, 12), (7, 12), (8, 13), (9, 13)]);
        let flock = vec![
            Seagull {
                wing1: 6,
                center: 12,
                wing2: 7,
            },
            Seagull {
                wing1: 8,
                center: 13,
                wing2: 9,
            },
        ];
        let target = CoverTarget::new(
            CoverPayload::SeagullFlock(flock),
            (0..12).collect(),
            Vec::new(),
        );
        let ta = ReservedTree::new(RootedForest::path(5), 0).unwrap();
        let tb = ReservedTree::new(RootedForest::spider(2, 4), 1).unwrap();
        let err =
            cover_seagulls_with_tree(&SeagullCoverer::Pair(ta, tb), &host, &target).unwrap_err();
        assert_eq!(err, CoverError::LeafCapacity { have: 1, need: 2 });
    }

    /// Two components: a 7-path and a 3-path.
    fn drain_forest(root_images: [VertexId; 2], forbidden: Vec<VertexId>) -> ReservedForest {
        let edges: Vec<_> = (1..7).map(|v| (v - 1, v)).chain([(7, 8), (8, 9)]).collect();
        ReservedForest {
            forest: RootedForest::from_edges(10, &edges, &[0, 7], None).unwrap(),
            root_images: root_images.to_vec(),
            forbidden,
        }
    }

    #[test]
    fn three_forests_drain_the_exceptional_vertex() {
        let host = host_with(
            12,
            13,
            &[(12, 0), (12, 1), (12, 2), (12, 3), (12, 4), (12, 5)],
        );
        let target = CoverTarget::new(
            CoverPayload::ExceptionalVertex(12),
            (0..12).collect(),
            Vec::new(),
        );
        let forests = vec![
            drain_forest([6, 7], Vec::new()),
            drain_forest([8, 9], Vec::new()),
            drain_forest([10, 11], Vec::new()),
        ];
        let out = cover_exceptional_vertex(&forests, &host, &target, 0).unwrap();
        assert_eq!(out.residual, 0);
        assert_eq!(out.skipped, Vec::<usize>::new());
        assert_eq!(
            out.embeddings.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        let mut all_edges: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (idx, emb) in &out.embeddings {
            let f = &forests[*idx].forest;
            assert_eq!(emb.image(5), Some(12));
            let edges = embedded_edges(f, emb);
            let at_v0 = edges.iter().filter(|&&(a, b)| a == 12 || b == 12).count();
            assert_eq!(at_v0, 2);
            for e in edges {
                assert!(all_edges.insert(e), "embeddings share edge {e:?}");
            }
        }
    }

    #[test]
    fn zero_residual_needs_no_embeddings() {
        let host = host_with(4, 5, &[]);
        let target = CoverTarget::new(
            CoverPayload::ExceptionalVertex(4),
            (0..4).collect(),
            Vec::new(),
        );
        let forests = vec![drain_forest([0, 1], Vec::new())];
        let out = cover_exceptional_vertex(&forests, &host, &target, 0).unwrap();
        assert_eq!(out.residual, 0);
        assert!(out.embeddings.is_empty());
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn forest_forbidding_the_vertex_is_skipped() {
        let host = host_with(
            12,
            13,
            &[(12, 0), (12, 1), (12, 2), (12, 3), (12, 4), (12, 5)],
        );
        let target = CoverTarget::new(
            CoverPayload::ExceptionalVertex(12),
            (0..12).collect(),
            Vec::new(),
        );
        let forests = vec![
            drain_forest([6, 7], Vec::new()),
            drain_forest([8, 9], vec![12]),
            drain_forest([10, 11], Vec::new()),
        ];
        let out = cover_exceptional_vertex(&forests, &host, &target, 2).unwrap();
        assert_eq!(out.skipped, vec![1]);
        assert_eq!(
            out.embeddings.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            vec![0, 2]
        );
        assert_eq!(out.residual, 2);

        let err = cover_exceptional_vertex(&forests, &host, &target, 0).unwrap_err();
        assert_eq!(
            err,
            CoverError::CapacityExhausted {
                residual: 2,
                budget: 0
            }
        );
    }

    #[test]
    fn step_dump_is_one_json_line() {
        let host = host_with(6, 7, &[(2, 6)]);
        let target = CoverTarget::new(
            CoverPayload::ParityEdge(2, 6),
            (0..6).collect(),
            Vec::new(),
        );
        let rt = ReservedTree::new(RootedForest::path(6), 0).unwrap();
        let emb = fix_parity_with_tree(&rt, &host, &target).unwrap();
        let line = cover_step_json("fix-parity", &target, &[&emb]);
        assert!(!line.contains('\n'));
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["op"], "fix-parity");
        assert_eq!(v["kind"], "parity-edge");
        assert_eq!(v["maps"].as_array().unwrap().len(), 1);
    }
}
