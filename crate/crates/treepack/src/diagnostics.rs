//! Decision procedures for the structural hypotheses the solvers rely on:
//! quasi-randomness, two-set density, regular pairs, robust expansion, and
//! greedy distance-independent sets and matchings.
//!
//! Each check returns a [`DiagnosticsReport`]: a verdict, the mode that
//! produced it (exhaustive or sampled), and on failure a concrete witness.
//! Exhaustive mode proves the verdict; sampled mode only reports that no
//! counterexample was found among `samples` draws, and the report says so.
//!
//! Every threshold comparison is performed with exact rationals derived
//! from the (binary-exact) values of the `f64` parameters, so verdicts
//! never depend on floating-point rounding.

use crate::graph::{self, SimpleGraph, VertexId};
use num::{BigInt, BigRational, One, Signed};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagnosticsError {
    #[error("parameter {name} = {value} out of range ({expected})")]
    InvalidParam {
        name: &'static str,
        value: String,
        expected: &'static str,
    },
    #[error("graph too small: n = {n}, need n >= {min}")]
    TooSmall { n: usize, min: usize },
    #[error("seed set is not {k}-independent: vertices {u} and {v} are at distance {dist}")]
    SeedNotIndependent {
        k: usize,
        u: VertexId,
        v: VertexId,
        dist: usize,
    },
    #[error("seed set must be contained in the candidate set (vertex {v} is not)")]
    SeedOutsideCandidates { v: VertexId },
    #[error("matching requested on a graph with no edges")]
    EmptyGraph,
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
}

/// Window parameters for the degree/codegree quasi-randomness check.
#[derive(Debug, Clone, Copy)]
pub struct QuasiRandomParams {
    pub epsilon: f64,
    pub p: f64,
}

/// Parameters for the two-set density check.
#[derive(Debug, Clone)]
pub struct DenseParams {
    pub beta: f64,
    pub alpha: f64,
    /// Largest `n` checked exhaustively.
    pub exhaustive_cap: usize,
    /// Sample count above the cap.
    pub samples: u64,
    pub seed: u64,
}

impl DenseParams {
    pub fn new(beta: f64, alpha: f64) -> Self {
        DenseParams {
            beta,
            alpha,
            exhaustive_cap: 12,
            samples: 2000,
            seed: 0,
        }
    }
}

/// Parameters for the (ε, d)-regular pair check.
#[derive(Debug, Clone)]
pub struct RegularityParams {
    pub epsilon: f64,
    pub d: f64,
    /// Also require every vertex's cross-degree in the (d ± ε) window.
    pub super_regular: bool,
    /// Largest `|A| + |B|` checked exhaustively.
    pub exhaustive_cap: usize,
    pub samples: u64,
    pub seed: u64,
}

impl RegularityParams {
    pub fn new(epsilon: f64, d: f64) -> Self {
        RegularityParams {
            epsilon,
            d,
            super_regular: false,
            exhaustive_cap: 24,
            samples: 2000,
            seed: 0,
        }
    }
}

/// Parameters for the robust expander check.
#[derive(Debug, Clone)]
pub struct ExpanderParams {
    pub nu: f64,
    pub tau: f64,
    /// Largest `n` checked exhaustively.
    pub exhaustive_cap: usize,
    pub samples: u64,
    pub seed: u64,
}

impl ExpanderParams {
    pub fn new(nu: f64, tau: f64) -> Self {
        ExpanderParams {
            nu,
            tau,
            exhaustive_cap: 20,
            samples: 2000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exhaustive,
    Sampled,
}

/// Concrete counterexample attached to a failing report. Rational
/// quantities are rendered as `"num/den"` strings so reports serialize
/// without precision loss.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    DegreeOutOfWindow {
        v: VertexId,
        degree: usize,
        lo: String,
        hi: String,
    },
    CodegreeOutOfWindow {
        u: VertexId,
        v: VertexId,
        codegree: usize,
        lo: String,
        hi: String,
    },
    SparsePair {
        u_set: Vec<VertexId>,
        v_set: Vec<VertexId>,
        density: String,
        floor: String,
    },
    IrregularPair {
        a_sub: Vec<VertexId>,
        b_sub: Vec<VertexId>,
        density: String,
        target: String,
        epsilon: String,
    },
    CrossDegreeOutOfWindow {
        v: VertexId,
        degree: usize,
        lo: String,
        hi: String,
    },
    PoorExpansion {
        s: Vec<VertexId>,
        rn_size: usize,
        required: String,
    },
}

/// Outcome of one structural check.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub check: &'static str,
    pub verdict: Verdict,
    pub mode: Mode,
    /// Number of random draws examined; only present in sampled mode.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl DiagnosticsReport {
    fn pass(check: &'static str, mode: Mode, samples: Option<u64>) -> Self {
        DiagnosticsReport {
            check,
            verdict: Verdict::Pass,
            mode,
            samples,
            witness: None,
        }
    }

    fn fail(check: &'static str, mode: Mode, samples: Option<u64>, witness: Witness) -> Self {
        DiagnosticsReport {
            check,
            verdict: Verdict::Fail,
            mode,
            samples,
            witness: Some(witness),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Rational value of an `f64` parameter: the shortest decimal that
/// round-trips to `x` (what `Display` prints), converted exactly. A
/// parameter written as `0.2` therefore means 1/5, not the binary
/// expansion of the nearest double. Rejects NaN/infinity.
pub(crate) fn rat(name: &'static str, x: f64) -> Result<BigRational, DiagnosticsError> {
    decimal_rat(x).ok_or(DiagnosticsError::InvalidParam {
        name,
        value: format!("{x}"),
        expected: "a finite number",
    })
}

fn decimal_rat(x: f64) -> Option<BigRational> {
    if !x.is_finite() {
        return None;
    }
    // Rust's Display for f64 is the shortest decimal string that parses
    // back to the same bits, and never uses exponent notation.
    let s = format!("{x}");
    let (neg, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.as_str()),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let num = if neg { -digits } else { digits };
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Some(BigRational::new(num, den))
}

fn check_range(
    name: &'static str,
    x: f64,
    lo_open: bool,
    lo: f64,
    hi: f64,
) -> Result<(), DiagnosticsError> {
    let ok = if lo_open { x > lo } else { x >= lo };
    if ok && x <= hi && x.is_finite() {
        Ok(())
    } else {
        Err(DiagnosticsError::InvalidParam {
            name,
            value: format!("{x}"),
            expected: if lo_open { "in (lo, hi]" } else { "in [lo, hi]" },
        })
    }
}

fn int(x: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

fn rat_str(x: &BigRational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Smallest integer `s ≥ x` (x ≥ 0), as usize.
fn ceil_to_usize(x: &BigRational) -> usize {
    use num::ToPrimitive;
    x.ceil().to_integer().to_usize().unwrap_or(usize::MAX)
}

/// Degrees `(1±ε)pn` and codegrees `(1±ε)p²n`: the quasi-randomness
/// window check. Always exhaustive — O(n²·Δ) via adjacency intersection.
pub fn check_quasi_random(
    g: &SimpleGraph,
    params: QuasiRandomParams,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    check_range("epsilon", params.epsilon, true, 0.0, 1.0)?;
    check_range("p", params.p, false, 0.0, 1.0)?;
    let n = g.n();
    if n < 2 {
        return Err(DiagnosticsError::TooSmall { n, min: 2 });
    }
    let eps = rat("epsilon", params.epsilon)?;
    let p = rat("p", params.p)?;
    let nn = int(n);
    let one = BigRational::one();

    let deg_lo = (&one - &eps) * &p * &nn;
    let deg_hi = (&one + &eps) * &p * &nn;
    for v in 0..n {
        let d = int(g.degree(v));
        if d < deg_lo || d > deg_hi {
            return Ok(DiagnosticsReport::fail(
                "quasi_random",
                Mode::Exhaustive,
                None,
                Witness::DegreeOutOfWindow {
                    v,
                    degree: g.degree(v),
                    lo: rat_str(&deg_lo),
                    hi: rat_str(&deg_hi),
                },
            ));
        }
    }

    let p2 = &p * &p;
    let co_lo = (&one - &eps) * &p2 * &nn;
    let co_hi = (&one + &eps) * &p2 * &nn;
    for u in 0..n {
        for v in u + 1..n {
            let c = sorted_intersection_size(g.neighbours(u), g.neighbours(v));
            let cr = int(c);
            if cr < co_lo || cr > co_hi {
                return Ok(DiagnosticsReport::fail(
                    "quasi_random",
                    Mode::Exhaustive,
                    None,
                    Witness::CodegreeOutOfWindow {
                        u,
                        v,
                        codegree: c,
                        lo: rat_str(&co_lo),
                        hi: rat_str(&co_hi),
                    },
                ));
            }
        }
    }
    Ok(DiagnosticsReport::pass("quasi_random", Mode::Exhaustive, None))
}

fn sorted_intersection_size(a: &[VertexId], b: &[VertexId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Two-set density check: every pair of sets `U, V` with
/// `|U|, |V| ≥ βn` must satisfy `den(U, V) ≥ α` (overlap convention).
/// Exhaustive over all subset pairs when `n ≤ exhaustive_cap`, sampled
/// otherwise.
pub fn check_dense(
    g: &SimpleGraph,
    params: &DenseParams,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    check_range("beta", params.beta, true, 0.0, 1.0)?;
    check_range("alpha", params.alpha, false, 0.0, 1.0)?;
    let n = g.n();
    if n < 1 {
        return Err(DiagnosticsError::TooSmall { n, min: 1 });
    }
    let beta = rat("beta", params.beta)?;
    let alpha = rat("alpha", params.alpha)?;
    let smin = ceil_to_usize(&(&beta * int(n))).max(1);
    if smin > n {
        // No qualifying sets at all: vacuous pass.
        return Ok(DiagnosticsReport::pass("dense", Mode::Exhaustive, None));
    }

    if n <= params.exhaustive_cap && n <= 14 {
        // e(U, V) = Σ_{u∈U} d_{G,V}(u) under the overlap convention, so for
        // each V-mask one subset-sum sweep yields every U-mask's count.
        let adj: Vec<u32> = adjacency_masks(g);
        let full = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        let mut counts = vec![0u32; 1 << n];
        for vmask in 1..=full {
            if (vmask.count_ones() as usize) < smin {
                continue;
            }
            counts[0] = 0;
            for umask in 1..=full {
                let low = umask.trailing_zeros() as usize;
                counts[umask as usize] = counts[(umask & (umask - 1)) as usize]
                    + (adj[low] & vmask).count_ones();
            }
            for umask in 1..=full {
                let su = umask.count_ones() as usize;
                if su < smin {
                    continue;
                }
                let sv = vmask.count_ones() as usize;
                let e = counts[umask as usize] as u64;
                // density ≥ α ⟺ e·den(α) ≥ num(α)·|U|·|V|
                if !density_at_least(e, su * sv, &alpha) {
                    return Ok(DiagnosticsReport::fail(
                        "dense",
                        Mode::Exhaustive,
                        None,
                        Witness::SparsePair {
                            u_set: mask_to_vec(umask),
                            v_set: mask_to_vec(vmask),
                            density: format!("{e}/{}", su * sv),
                            floor: rat_str(&alpha),
                        },
                    ));
                }
            }
        }
        return Ok(DiagnosticsReport::pass("dense", Mode::Exhaustive, None));
    }

    // Sampled: uniform subsets from the qualifying size band.
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let verts: Vec<VertexId> = (0..n).collect();
    for _ in 0..params.samples {
        let us = random_subset(&verts, smin, n, &mut rng);
        let vs = random_subset(&verts, smin, n, &mut rng);
        let e = graph::pair_edge_count(g, &us, &vs)?;
        if !density_at_least(e, us.len() * vs.len(), &alpha) {
            return Ok(DiagnosticsReport::fail(
                "dense",
                Mode::Sampled,
                Some(params.samples),
                Witness::SparsePair {
                    u_set: us.clone(),
                    v_set: vs.clone(),
                    density: format!("{e}/{}", us.len() * vs.len()),
                    floor: rat_str(&alpha),
                },
            ));
        }
    }
    Ok(DiagnosticsReport::pass(
        "dense",
        Mode::Sampled,
        Some(params.samples),
    ))
}

fn adjacency_masks(g: &SimpleGraph) -> Vec<u32> {
    (0..g.n())
        .map(|v| {
            g.neighbours(v)
                .iter()
                .fold(0u32, |acc, &w| acc | 1u32 << w)
        })
        .collect()
}

fn mask_to_vec(mask: u32) -> Vec<VertexId> {
    (0..32).filter(|i| mask >> i & 1 == 1).collect()
}

/// `e / size ≥ alpha`, exactly.
fn density_at_least(e: u64, size: usize, alpha: &BigRational) -> bool {
    BigRational::new(BigInt::from(e), BigInt::from(size)) >= *alpha
}

/// Uniform random subset with size drawn uniformly from `[smin, smax]`.
fn random_subset(
    verts: &[VertexId],
    smin: usize,
    smax: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<VertexId> {
    use rand::Rng;
    let s = rng.gen_range(smin..=smax);
    let mut pool = verts.to_vec();
    pool.shuffle(rng);
    pool.truncate(s);
    pool.sort_unstable();
    pool
}

/// (ε, d)-regular pair check on a bipartition view: every `A' ⊆ A`,
/// `B' ⊆ B` with `|A'| ≥ ε|A|`, `|B'| ≥ ε|B|` must have
/// `|den(A', B') − d| < ε`. With `super_regular` set, additionally every
/// vertex's degree into the opposite side must lie in `(d ± ε)·|side|`.
/// Exhaustive when `|A| + |B| ≤ exhaustive_cap`.
pub fn check_regular_pair(
    view: &graph::BipartitionView,
    params: &RegularityParams,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    check_range("epsilon", params.epsilon, true, 0.0, 1.0)?;
    check_range("d", params.d, false, 0.0, 1.0)?;
    let (a, b) = (&view.a, &view.b);
    if a.is_empty() || b.is_empty() {
        return Err(DiagnosticsError::TooSmall { n: 0, min: 1 });
    }
    let eps = rat("epsilon", params.epsilon)?;
    let d = rat("d", params.d)?;

    if params.super_regular {
        for (side, opposite) in [(a, b), (b, a)] {
            let lo = (&d - &eps) * int(opposite.len());
            let hi = (&d + &eps) * int(opposite.len());
            for &v in side {
                let deg = graph::degree_into(view.host, v, opposite)?;
                let dr = int(deg);
                if dr < lo || dr > hi {
                    return Ok(DiagnosticsReport::fail(
                        "regular_pair",
                        Mode::Exhaustive,
                        None,
                        Witness::CrossDegreeOutOfWindow {
                            v,
                            degree: deg,
                            lo: rat_str(&lo),
                            hi: rat_str(&hi),
                        },
                    ));
                }
            }
        }
    }

    let amin = ceil_to_usize(&(&eps * int(a.len()))).max(1);
    let bmin = ceil_to_usize(&(&eps * int(b.len()))).max(1);

    if a.len() + b.len() <= params.exhaustive_cap && a.len() + b.len() <= 26 {
        // Bit positions index into a and b; adjacency of each a-vertex as a
        // mask over b positions.
        let bpos: std::collections::BTreeMap<VertexId, usize> =
            b.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj: Vec<u32> = a
            .iter()
            .map(|&u| {
                view.host
                    .neighbours(u)
                    .iter()
                    .filter_map(|w| bpos.get(w))
                    .fold(0u32, |acc, &i| acc | 1u32 << i)
            })
            .collect();
        let afull = (1u32 << a.len()) - 1;
        let bfull = (1u32 << b.len()) - 1;
        let mut counts = vec![0u32; 1 << a.len()];
        for bmask in 1..=bfull {
            if (bmask.count_ones() as usize) < bmin {
                continue;
            }
            counts[0] = 0;
            for amask in 1..=afull {
                let low = amask.trailing_zeros() as usize;
                counts[amask as usize] = counts[(amask & (amask - 1)) as usize]
                    + (adj[low] & bmask).count_ones();
            }
            for amask in 1..=afull {
                let sa = amask.count_ones() as usize;
                if sa < amin {
                    continue;
                }
                let sb = bmask.count_ones() as usize;
                let e = counts[amask as usize] as u64;
                if !density_within(e, sa * sb, &d, &eps) {
                    let a_sub: Vec<VertexId> =
                        mask_to_vec(amask).into_iter().map(|i| a[i]).collect();
                    let b_sub: Vec<VertexId> =
                        mask_to_vec(bmask).into_iter().map(|i| b[i]).collect();
                    return Ok(DiagnosticsReport::fail(
                        "regular_pair",
                        Mode::Exhaustive,
                        None,
                        Witness::IrregularPair {
                            a_sub,
                            b_sub,
                            density: format!("{e}/{}", sa * sb),
                            target: rat_str(&d),
                            epsilon: rat_str(&eps),
                        },
                    ));
                }
            }
        }
        return Ok(DiagnosticsReport::pass(
            "regular_pair",
            Mode::Exhaustive,
            None,
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    for _ in 0..params.samples {
        let asub = random_subset(a, amin, a.len(), &mut rng);
        let bsub = random_subset(b, bmin, b.len(), &mut rng);
        let e = bipartite_edge_count(view.host, &asub, &bsub);
        if !density_within(e, asub.len() * bsub.len(), &d, &eps) {
            return Ok(DiagnosticsReport::fail(
                "regular_pair",
                Mode::Sampled,
                Some(params.samples),
                Witness::IrregularPair {
                    a_sub: asub.clone(),
                    b_sub: bsub.clone(),
                    density: format!("{e}/{}", asub.len() * bsub.len()),
                    target: rat_str(&d),
                    epsilon: rat_str(&eps),
                },
            ));
        }
    }
    Ok(DiagnosticsReport::pass(
        "regular_pair",
        Mode::Sampled,
        Some(params.samples),
    ))
}

fn bipartite_edge_count(g: &SimpleGraph, a: &[VertexId], b: &[VertexId]) -> u64 {
    let bset: std::collections::BTreeSet<VertexId> = b.iter().copied().collect();
    a.iter()
        .map(|&u| {
            g.neighbours(u)
                .iter()
                .filter(|w| bset.contains(w))
                .count() as u64
        })
        .sum()
}

/// `|e/size − d| < ε`, exactly.
fn density_within(e: u64, size: usize, d: &BigRational, eps: &BigRational) -> bool {
    let den = BigRational::new(BigInt::from(e), BigInt::from(size));
    (den - d).abs() < *eps
}

/// `{ v : d_{G,S}(v) ≥ ν·n }` — the ν-robust neighbourhood of `S`.
pub fn robust_neighbourhood(
    g: &SimpleGraph,
    s: &[VertexId],
    nu: f64,
) -> Result<Vec<VertexId>, DiagnosticsError> {
    check_range("nu", nu, true, 0.0, 1.0)?;
    let threshold = rat("nu", nu)? * int(g.n());
    let sset: std::collections::BTreeSet<VertexId> = s.iter().copied().collect();
    for &v in &sset {
        if v >= g.n() {
            return Err(graph::GraphError::VertexOutOfRange { v, n: g.n() }.into());
        }
    }
    Ok((0..g.n())
        .filter(|&v| {
            let d = g.neighbours(v).iter().filter(|w| sset.contains(w)).count();
            int(d) >= threshold
        })
        .collect())
}

/// Robust (ν, τ)-expander check: every `S` with `τn ≤ |S| ≤ (1−τ)n` must
/// satisfy `|RN_ν(S)| ≥ |S| + νn`. Exhaustive when `n ≤ exhaustive_cap`.
pub fn check_robust_expander(
    g: &SimpleGraph,
    params: &ExpanderParams,
) -> Result<DiagnosticsReport, DiagnosticsError> {
    check_range("nu", params.nu, true, 0.0, 1.0)?;
    check_range("tau", params.tau, true, 0.0, 1.0)?;
    if params.nu > params.tau {
        return Err(DiagnosticsError::InvalidParam {
            name: "nu",
            value: format!("{}", params.nu),
            expected: "nu <= tau",
        });
    }
    let n = g.n();
    if n < 2 {
        return Err(DiagnosticsError::TooSmall { n, min: 2 });
    }
    let nu = rat("nu", params.nu)?;
    let tau = rat("tau", params.tau)?;
    let nn = int(n);
    let nun = &nu * &nn;
    let s_lo = &tau * &nn;
    let s_hi = (BigRational::one() - &tau) * &nn;

    if n <= params.exhaustive_cap && n <= 26 {
        let adj = adjacency_masks(g);
        let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        for smask in 1..=full {
            let size = int(smask.count_ones() as usize);
            if size < s_lo || size > s_hi {
                continue;
            }
            let rn = (0..n)
                .filter(|&v| int((adj[v] & smask).count_ones() as usize) >= nun)
                .count();
            if int(rn) < &size + &nun {
                return Ok(DiagnosticsReport::fail(
                    "robust_expander",
                    Mode::Exhaustive,
                    None,
                    Witness::PoorExpansion {
                        s: mask_to_vec(smask),
                        rn_size: rn,
                        required: rat_str(&(size + &nun)),
                    },
                ));
            }
        }
        return Ok(DiagnosticsReport::pass(
            "robust_expander",
            Mode::Exhaustive,
            None,
        ));
    }

    let smin = ceil_to_usize(&s_lo).max(1);
    let smax_rat = s_hi.floor();
    use num::ToPrimitive;
    let smax = smax_rat.to_integer().to_usize().unwrap_or(0).min(n);
    if smin > smax {
        return Ok(DiagnosticsReport::pass(
            "robust_expander",
            Mode::Exhaustive,
            None,
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let verts: Vec<VertexId> = (0..n).collect();
    for _ in 0..params.samples {
        let s = random_subset(&verts, smin, smax, &mut rng);
        let rn = robust_neighbourhood(g, &s, params.nu)?;
        if int(rn.len()) < int(s.len()) + &nun {
            return Ok(DiagnosticsReport::fail(
                "robust_expander",
                Mode::Sampled,
                Some(params.samples),
                Witness::PoorExpansion {
                    s,
                    rn_size: rn.len(),
                    required: rat_str(&(int(0) + &nun)),
                },
            ));
        }
    }
    Ok(DiagnosticsReport::pass(
        "robust_expander",
        Mode::Sampled,
        Some(params.samples),
    ))
}

/// Vertices within distance `< k` of `src` (i.e. BFS truncated at depth
/// `k−1`), excluding `src` itself.
fn ball_lt(g: &SimpleGraph, src: VertexId, k: usize) -> Vec<(VertexId, usize)> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[src] = 0;
    let mut queue = std::collections::VecDeque::from([src]);
    let mut out = Vec::new();
    while let Some(u) = queue.pop_front() {
        if dist[u] + 1 >= k {
            continue;
        }
        for &v in g.neighbours(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                out.push((v, dist[v]));
                queue.push_back(v);
            }
        }
    }
    out
}

/// Greedily extend the `k`-independent seed set `X` inside candidates `Z`
/// to a maximal one, ascending by vertex index. The result `Y` satisfies
/// `X ⊆ Y ⊆ Z` and `|Y| ≥ |Z| / Δ^k` (with Δ clamped to ≥ 2), which is
/// re-verified before returning.
pub fn greedy_k_independent_set(
    g: &SimpleGraph,
    k: usize,
    x: &[VertexId],
    z: &[VertexId],
) -> Result<Vec<VertexId>, DiagnosticsError> {
    if k < 1 {
        return Err(DiagnosticsError::InvalidParam {
            name: "k",
            value: "0".into(),
            expected: "k >= 1",
        });
    }
    let zset: std::collections::BTreeSet<VertexId> = z.iter().copied().collect();
    for &v in &zset {
        if v >= g.n() {
            return Err(graph::GraphError::VertexOutOfRange { v, n: g.n() }.into());
        }
    }
    let xset: std::collections::BTreeSet<VertexId> = x.iter().copied().collect();
    for &v in &xset {
        if !zset.contains(&v) {
            return Err(DiagnosticsError::SeedOutsideCandidates { v });
        }
    }
    // Verify the seed itself is k-independent.
    for &u in &xset {
        for (w, dist) in ball_lt(g, u, k) {
            if w > u && xset.contains(&w) {
                return Err(DiagnosticsError::SeedNotIndependent { k, u, v: w, dist });
            }
        }
    }

    let mut excluded = vec![false; g.n()];
    for &u in &xset {
        for (w, _) in ball_lt(g, u, k) {
            excluded[w] = true;
        }
    }
    let mut y: Vec<VertexId> = xset.iter().copied().collect();
    for &v in &zset {
        if xset.contains(&v) || excluded[v] {
            continue;
        }
        y.push(v);
        for (w, _) in ball_lt(g, v, k) {
            excluded[w] = true;
        }
    }
    y.sort_unstable();

    assert_k_independent(g, k, &y);
    let delta = g.max_degree().max(2) as u128;
    if let Some(bound) = delta.checked_pow(k as u32) {
        assert!(
            y.len() as u128 * bound >= zset.len() as u128,
            "greedy set below its guaranteed size"
        );
    }
    Ok(y)
}

fn assert_k_independent(g: &SimpleGraph, k: usize, ys: &[VertexId]) {
    let yset: std::collections::BTreeSet<VertexId> = ys.iter().copied().collect();
    for &u in ys {
        for (w, _) in ball_lt(g, u, k) {
            assert!(
                !yset.contains(&w) || w == u,
                "vertices {u} and {w} of the output are within distance {k}"
            );
        }
    }
}

/// Greedy matching whose edges are pairwise at distance ≥ `k`
/// (distance between edges = minimum endpoint distance), scanning edges
/// in canonical order. Size is guaranteed ≥ e(G) / (2Δ^k) (Δ clamped to
/// ≥ 2) and re-verified. Errors on an edgeless graph.
pub fn greedy_k_independent_matching(
    g: &SimpleGraph,
    k: usize,
) -> Result<Vec<(VertexId, VertexId)>, DiagnosticsError> {
    if g.m() == 0 {
        return Err(DiagnosticsError::EmptyGraph);
    }
    let m = greedy_k_independent_matching_among(g, k, &g.edges())?;
    let delta = g.max_degree().max(2) as u128;
    if let Some(pow) = delta.checked_pow(k as u32) {
        assert!(
            m.len() as u128 * 2 * pow >= g.m() as u128,
            "greedy matching below its guaranteed size"
        );
    }
    Ok(m)
}

/// The same greedy scan restricted to a caller-supplied edge pool, with
/// distances still measured in the whole graph. No size floor is
/// guaranteed (the pool may be sparse); the independence property is
/// still re-verified.
pub fn greedy_k_independent_matching_among(
    g: &SimpleGraph,
    k: usize,
    pool: &[(VertexId, VertexId)],
) -> Result<Vec<(VertexId, VertexId)>, DiagnosticsError> {
    if k < 1 {
        return Err(DiagnosticsError::InvalidParam {
            name: "k",
            value: "0".into(),
            expected: "k >= 1",
        });
    }
    let mut edges: Vec<(VertexId, VertexId)> = Vec::with_capacity(pool.len());
    for &(u, v) in pool {
        if u >= g.n() || v >= g.n() {
            let bad = if u >= g.n() { u } else { v };
            return Err(graph::GraphError::VertexOutOfRange { v: bad, n: g.n() }.into());
        }
        if !g.has_edge(u, v) {
            let (lo, hi) = if u < v { (u, v) } else { (v, u) };
            return Err(graph::GraphError::MissingEdge { u: lo, v: hi }.into());
        }
        edges.push(if u < v { (u, v) } else { (v, u) });
    }
    edges.sort_unstable();
    edges.dedup();

    let mut blocked = vec![false; g.n()];
    let mut chosen = Vec::new();
    for &(u, v) in &edges {
        if blocked[u] || blocked[v] {
            continue;
        }
        chosen.push((u, v));
        // Block everything within distance < k of either endpoint.
        for s in [u, v] {
            blocked[s] = true;
            for (w, _) in ball_lt(g, s, k) {
                blocked[w] = true;
            }
        }
    }

    // Re-verify pairwise edge distance ≥ k.
    for (i, &(u1, v1)) in chosen.iter().enumerate() {
        let mut near = vec![false; g.n()];
        near[u1] = true;
        near[v1] = true;
        for s in [u1, v1] {
            for (w, _) in ball_lt(g, s, k) {
                near[w] = true;
            }
        }
        for &(u2, v2) in &chosen[i + 1..] {
            assert!(
                !near[u2] && !near[v2],
                "edges {u1}-{v1} and {u2}-{v2} of the matching are within distance {k}"
            );
        }
    }
    Ok(chosen)
}
