//! The greedy embed-or-sparse-witness dichotomy and the multipartite
//! clique-counting pipeline built on top of it.
//!
//! Given a subgraph of an edge-ordered host (ranks kept in host space), a
//! pattern whose vertex numbering is a degeneracy order, an interval, and one
//! candidate part per pattern vertex, [`greedy_embed`] either places the
//! pattern vertex by vertex so that every pattern edge lands in its own block
//! of an equitable partition of the interval, or halts with a sparse witness:
//! a block and two vertex sets with density below the threshold between them.
//! Witnesses are amplified (2 sets to 2t sets) and iterated (to 2^h sets);
//! the resulting parts feed a multipartite product graph whose spanning
//! cliques pull back to interval-respecting copies of the pattern.
//!
//! Every witness is re-verified from scratch: sets pairwise disjoint and all
//! stated densities recomputed exactly from the host.

use std::collections::BTreeSet;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{
    ratio, Coloring, EdgeOrderedGraph, EmbeddingMap, Graph, Interval, OrderedSubgraph, Vertex,
};
use crate::prng::SeededRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EmbedError {
    #[error("interval of length {got} too small, need at least {need}")]
    IntervalTooSmall { need: usize, got: usize },
    #[error("pattern vertex numbering is not a degeneracy order")]
    PatternNotSorted,
    #[error("density threshold must lie in (0, {bound})")]
    BadThreshold { bound: String },
    #[error("bad parts: {0}")]
    BadParts(String),
    #[error("density precondition failed: d = {actual} exceeds {limit}")]
    DensityPrecondition { actual: String, limit: String },
    #[error("filter ratio must be at least 1")]
    BadFilterRatio,
    #[error("guaranteed set size {gamma} of {size} vertices is below 1; instance too small for the schedule")]
    SizeInfeasible { gamma: String, size: usize },
    #[error("all {attempts} retries rejected by the density caps")]
    RetriesExhausted { attempts: u32 },
    #[error("budget exhausted")]
    BudgetExhausted,
    #[error("bad instance: {0}")]
    BadInstance(String),
    #[error("internal guarantee violated: {0}")]
    Internal(String),
}

/// Equitable partition of an interval into one block per pattern edge, in
/// pattern-rank order: with I = [a+1, a'] and the j-th smallest pattern edge,
/// the j-th block is [a + 1 + floor((a'-a)(j-1)/m), a + floor((a'-a)j/m)].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntervalPartition {
    source: Interval,
    /// blocks[k] = (pattern edge endpoints, block) for pattern rank k+1
    blocks: Vec<((Vertex, Vertex), Interval)>,
}

impl IntervalPartition {
    pub fn source(&self) -> Interval {
        self.source
    }

    pub fn blocks(&self) -> &[((Vertex, Vertex), Interval)] {
        &self.blocks
    }

    pub fn block_for_rank(&self, pattern_rank: usize) -> Interval {
        self.blocks[pattern_rank - 1].1
    }

    pub fn block_for_edge(&self, u: Vertex, v: Vertex) -> Option<Interval> {
        let key = (u.min(v), u.max(v));
        self.blocks
            .iter()
            .find(|&&(e, _)| e == key)
            .map(|&(_, b)| b)
    }
}

/// The m consecutive blocks of the equitable partition of an interval,
/// independent of any pattern.
pub fn equitable_blocks(interval: Interval, m: usize) -> Result<Vec<Interval>, EmbedError> {
    if m == 0 || interval.len() < m {
        return Err(EmbedError::IntervalTooSmall {
            need: m.max(1),
            got: interval.len(),
        });
    }
    let a = interval.lo() - 1;
    let span = interval.hi() - a;
    Ok((1..=m)
        .map(|j| {
            let lo = a + 1 + span * (j - 1) / m;
            let hi = a + span * j / m;
            Interval::new(lo, hi).expect("equitable blocks are nonempty")
        })
        .collect())
}

pub fn equitable_interval_partition(
    interval: Interval,
    pattern: &EdgeOrderedGraph,
) -> Result<IntervalPartition, EmbedError> {
    let blocks = equitable_blocks(interval, pattern.edge_count())?;
    Ok(IntervalPartition {
        source: interval,
        blocks: blocks
            .into_iter()
            .enumerate()
            .map(|(k, b)| (pattern.edge_with_rank(k + 1), b))
            .collect(),
    })
}

/// A sub-interval plus pairwise-sparse vertex sets, re-verified exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseWitness {
    pub interval: Interval,
    pub sets: Vec<Vec<Vertex>>,
    /// All pairwise densities d_{I'}(W_i, W_j), measured in the subgraph
    /// restricted to the witness interval.
    pub densities: Vec<((usize, usize), BigRational)>,
    /// Part indices the two sets came from, when produced by the dichotomy.
    pub origin_parts: Option<(usize, usize)>,
}

impl SparseWitness {
    /// Build and verify: sets nonempty and pairwise disjoint, every pairwise
    /// density over the witness interval strictly below `bound`.
    pub fn verified(
        g1: &OrderedSubgraph,
        interval: Interval,
        sets: Vec<Vec<Vertex>>,
        origin_parts: Option<(usize, usize)>,
        bound: &BigRational,
    ) -> Result<Self, EmbedError> {
        let mut seen = BTreeSet::new();
        for s in &sets {
            if s.is_empty() {
                return Err(EmbedError::Internal("empty witness set".into()));
            }
            for &v in s {
                if !seen.insert(v) {
                    return Err(EmbedError::Internal(format!(
                        "witness sets overlap at vertex {v}"
                    )));
                }
            }
        }
        let restricted = g1
            .restrict(interval)
            .map_err(|e| EmbedError::Internal(e.to_string()))?;
        let mut densities = Vec::new();
        for i in 0..sets.len() {
            for j in i + 1..sets.len() {
                let d = restricted.density(&sets[i], &sets[j]);
                if &d >= bound {
                    return Err(EmbedError::Internal(format!(
                        "witness density d(W_{i}, W_{j}) = {d} not below {bound}"
                    )));
                }
                densities.push(((i, j), d));
            }
        }
        Ok(Self {
            interval,
            sets,
            densities,
            origin_parts,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EmbedOutcome {
    Embedding(EmbeddingMap),
    Witness(SparseWitness),
}

/// Walk state: the placed prefix and the shrinking candidate sets.
struct EmbeddingState {
    placed: Vec<Vertex>,
    candidates: Vec<Vec<Vertex>>,
}

fn rational_of(n: usize) -> BigRational {
    BigRational::from(BigInt::from(n))
}

/// Vertices of `within` joined to `v` by a member edge with rank in the block.
fn block_degree(g1: &OrderedSubgraph, v: Vertex, within: &[Vertex], block: Interval) -> usize {
    within
        .iter()
        .filter(|&&w| g1.rank_of(v, w).is_some_and(|r| block.contains(r)))
        .count()
}

/// Greedy embed-or-witness dichotomy.
///
/// Places pattern vertex t into parts[t] so that every pattern edge (i, i')
/// receives a host rank inside its block of the equitable partition of
/// `interval`. At each step, for each forward pattern neighbor, the
/// candidates of the current part whose block-degree into the neighbor part
/// falls below `threshold` times the neighbor size are collected; as soon as
/// they reach a 1/(n-t) fraction (smallest neighbor index first), the walk
/// stops and returns them with the neighbor part as a sparse witness on that
/// block. Otherwise some candidate is good for every forward neighbor, the
/// smallest host id is placed, and the neighbor candidate sets shrink to its
/// block-neighborhoods.
pub fn greedy_embed(
    g1: &OrderedSubgraph,
    pattern: &EdgeOrderedGraph,
    interval: Interval,
    parts: &[Vec<Vertex>],
    threshold: &BigRational,
) -> Result<EmbedOutcome, EmbedError> {
    let n = pattern.vertex_count();
    if parts.len() != n || n == 0 {
        return Err(EmbedError::BadParts(format!(
            "need one part per pattern vertex ({n}), got {}",
            parts.len()
        )));
    }
    if !pattern.is_degeneracy_sorted() {
        return Err(EmbedError::PatternNotSorted);
    }
    let bound = BigRational::new(BigInt::one(), BigInt::from(n));
    if threshold <= &BigRational::zero() || threshold >= &bound {
        return Err(EmbedError::BadThreshold {
            bound: format!("1/{n}"),
        });
    }
    if interval.len() < n * n {
        return Err(EmbedError::IntervalTooSmall {
            need: n * n,
            got: interval.len(),
        });
    }
    if interval.hi() > g1.rank_range() {
        return Err(EmbedError::BadInstance(format!(
            "interval {interval} exceeds the host rank range 1..={}",
            g1.rank_range()
        )));
    }
    let total: usize = parts.iter().map(Vec::len).sum();
    let mut seen = BTreeSet::new();
    for (i, p) in parts.iter().enumerate() {
        if p.is_empty() {
            return Err(EmbedError::BadParts(format!("part {i} is empty")));
        }
        for &v in p {
            if v >= g1.vertex_count() || !seen.insert(v) {
                return Err(EmbedError::BadParts(format!(
                    "part {i} repeats a vertex or exceeds the host"
                )));
            }
        }
        if rational_of(p.len()) < threshold * rational_of(total) {
            return Err(EmbedError::BadParts(format!(
                "part {i} of size {} below threshold * total = {} * {total}",
                p.len(),
                threshold
            )));
        }
    }

    let partition = if pattern.edge_count() > 0 {
        Some(equitable_interval_partition(interval, pattern)?)
    } else {
        None
    };
    let block_of = |u: Vertex, v: Vertex| -> Option<Interval> {
        partition.as_ref().and_then(|p| p.block_for_edge(u, v))
    };

    let mut state = EmbeddingState {
        placed: Vec::with_capacity(n),
        candidates: parts.to_vec(),
    };

    for t in 0..n {
        if t + 1 == n {
            let v = *state.candidates[t]
                .iter()
                .min()
                .expect("candidate sets stay nonempty");
            state.placed.push(v);
            break;
        }
        let mut low_sets: Vec<(usize, Vec<Vertex>)> = Vec::new();
        for i in t + 1..n {
            let Some(block) = block_of(t, i) else { continue };
            let cut = threshold * rational_of(state.candidates[i].len());
            let low: Vec<Vertex> = state.candidates[t]
                .iter()
                .copied()
                .filter(|&v| rational_of(block_degree(g1, v, &state.candidates[i], block)) < cut)
                .collect();
            low_sets.push((i, low));
        }
        // witness trigger: placing vertex t (0-based) is step t+1, so the
        // fraction divisor is n - (t+1)
        let divisor = n - t - 1;
        for (i, low) in &low_sets {
            if low.len() * divisor >= state.candidates[t].len() {
                let block = block_of(t, *i).expect("low set implies a block");
                let witness = SparseWitness::verified(
                    g1,
                    block,
                    vec![low.clone(), state.candidates[*i].clone()],
                    Some((t, *i)),
                    threshold,
                )?;
                if witness.interval.len() * n * n < interval.len() {
                    return Err(EmbedError::Internal(
                        "witness interval shorter than |I|/n^2".into(),
                    ));
                }
                return Ok(EmbedOutcome::Witness(witness));
            }
        }
        let mut bad = BTreeSet::new();
        for (_, low) in &low_sets {
            bad.extend(low.iter().copied());
        }
        let v = *state.candidates[t]
            .iter()
            .filter(|v| !bad.contains(v))
            .min()
            .expect("union bound leaves a good vertex");
        state.placed.push(v);
        for i in t + 1..n {
            if let Some(block) = block_of(t, i) {
                state.candidates[i] = state.candidates[i]
                    .iter()
                    .copied()
                    .filter(|&x| g1.rank_of(v, x).is_some_and(|r| block.contains(r)))
                    .collect();
            }
        }
    }

    let map = EmbeddingMap::new(state.placed).expect("parts are disjoint");
    if let Some(p) = &partition {
        verify_block_embedding(g1, pattern, p, &map).map_err(EmbedError::Internal)?;
    }
    Ok(EmbedOutcome::Embedding(map))
}

/// Check that an embedding maps every pattern edge to a member edge whose
/// rank lies inside that pattern edge's block.
pub fn verify_block_embedding(
    g1: &OrderedSubgraph,
    pattern: &EdgeOrderedGraph,
    partition: &IntervalPartition,
    map: &EmbeddingMap,
) -> Result<(), String> {
    for (k, &(u, v)) in pattern.edges().iter().enumerate() {
        let block = partition.block_for_rank(k + 1);
        let (hu, hv) = (map.image_of(u), map.image_of(v));
        match g1.rank_of(hu, hv) {
            Some(r) if block.contains(r) => {}
            Some(r) => {
                return Err(format!(
                    "pattern rank {} mapped to host rank {r} outside {block}",
                    k + 1
                ))
            }
            None => return Err(format!("missing edge ({hu}, {hv})")),
        }
    }
    Ok(())
}

/// Keep the vertices of X whose degree into Y stays strictly below
/// ratio * density_bound * |Y|. Requires d(X, Y) <= density_bound; at least a
/// (1 - 1/ratio) fraction of X survives.
pub fn degree_filter(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    ratio_c: &BigRational,
    density_bound: &BigRational,
) -> Result<Vec<Vertex>, EmbedError> {
    if ratio_c < &BigRational::one() {
        return Err(EmbedError::BadFilterRatio);
    }
    let d = f.density(x, y);
    if &d > density_bound {
        return Err(EmbedError::DensityPrecondition {
            actual: d.to_string(),
            limit: density_bound.to_string(),
        });
    }
    let ybits = f.bitset_of(y);
    let cut = ratio_c * density_bound * rational_of(y.len());
    let kept: Vec<Vertex> = x
        .iter()
        .copied()
        .filter(|&v| rational_of(f.deg_in(v, &ybits)) < cut)
        .collect();
    let guarantee = (BigRational::one() - BigRational::one() / ratio_c) * rational_of(x.len());
    if rational_of(kept.len()) < guarantee {
        return Err(EmbedError::Internal(format!(
            "degree filter kept {} of {}, below the (1 - 1/c) guarantee",
            kept.len(),
            x.len()
        )));
    }
    Ok(kept)
}

/// Witness producers consumed by the amplification step: a 2-set producer at
/// a shrunken threshold plus a t-set producer at the full threshold. Either
/// may instead find a copy of the pattern, which short-circuits everything.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleReply {
    Witness(SparseWitness),
    PatternFound(EmbeddingMap),
}

pub trait SparseOracle {
    fn two_set(
        &mut self,
        g1: &OrderedSubgraph,
        interval: Interval,
        vertices: &[Vertex],
        threshold: &BigRational,
    ) -> Result<OracleReply, EmbedError>;

    fn t_set(
        &mut self,
        g1: &OrderedSubgraph,
        interval: Interval,
        vertices: &[Vertex],
        t: usize,
        threshold: &BigRational,
    ) -> Result<OracleReply, EmbedError>;
}

/// Amplify sparseness from t sets to 2t sets.
///
/// Construction: a 2-set witness at threshold δ/(4t) gives sets (W_Y, W_Z) on
/// a sub-interval; W_Y is filtered at ratio 2 so each survivor has small
/// degree into W_Z; a t-set witness is taken inside the filtered W_Y; W_Z is
/// filtered at ratio 2t against each of those t sets (each pass against the
/// full W_Z, then intersected); a final t-set witness is taken inside the
/// filtered W_Z. All C(2t, 2) pairwise densities over the final interval are
/// re-verified against δ.
pub fn amplify_sparse(
    g1: &OrderedSubgraph,
    interval: Interval,
    vertices: &[Vertex],
    oracle: &mut dyn SparseOracle,
    t: usize,
    delta: &BigRational,
) -> Result<OracleReply, EmbedError> {
    assert!(t >= 1);
    let quarter = delta / rational_of(4 * t);

    let w1 = match oracle.two_set(g1, interval, vertices, &quarter)? {
        OracleReply::PatternFound(m) => return Ok(OracleReply::PatternFound(m)),
        OracleReply::Witness(w) => w,
    };
    if w1.sets.len() != 2 {
        return Err(EmbedError::Internal(format!(
            "two-set oracle returned {} sets",
            w1.sets.len()
        )));
    }
    let i1 = w1.interval;
    let (side_y, side_z) = (&w1.sets[0], &w1.sets[1]);

    let g_i1 = g1
        .restrict(i1)
        .map_err(|e| EmbedError::Internal(e.to_string()))?;
    let two = rational_of(2);
    let filtered_y = degree_filter(&g_i1, side_y, side_z, &two, &quarter)?;

    let w2 = match oracle.t_set(g1, i1, &filtered_y, t, delta)? {
        OracleReply::PatternFound(m) => return Ok(OracleReply::PatternFound(m)),
        OracleReply::Witness(w) => w,
    };
    if w2.sets.len() != t {
        return Err(EmbedError::Internal(format!(
            "t-set oracle returned {} sets, wanted {t}",
            w2.sets.len()
        )));
    }
    let i2 = w2.interval;

    // filter W_Z against every Y_i: each pass over the full W_Z removes at
    // most a 1/(2t) fraction, so the intersection keeps at least half
    let g_i2 = g1
        .restrict(i2)
        .map_err(|e| EmbedError::Internal(e.to_string()))?;
    let two_t = rational_of(2 * t);
    let double_quarter = &quarter * &two;
    let mut keep: BTreeSet<Vertex> = side_z.iter().copied().collect();
    for y_set in &w2.sets {
        let kept_i = degree_filter(&g_i2, side_z, y_set, &two_t, &double_quarter)?;
        let kept_set: BTreeSet<Vertex> = kept_i.into_iter().collect();
        keep.retain(|v| kept_set.contains(v));
    }
    let filtered_z: Vec<Vertex> = keep.into_iter().collect();
    if rational_of(filtered_z.len()) < rational_of(side_z.len()) / &two {
        return Err(EmbedError::Internal(
            "filtered second side fell below half".into(),
        ));
    }

    let w3 = match oracle.t_set(g1, i2, &filtered_z, t, delta)? {
        OracleReply::PatternFound(m) => return Ok(OracleReply::PatternFound(m)),
        OracleReply::Witness(w) => w,
    };
    if w3.sets.len() != t {
        return Err(EmbedError::Internal(format!(
            "t-set oracle returned {} sets, wanted {t}",
            w3.sets.len()
        )));
    }

    let mut sets = w2.sets.clone();
    sets.extend(w3.sets.iter().cloned());
    let witness = SparseWitness::verified(g1, w3.interval, sets, None, delta)?;
    Ok(OracleReply::Witness(witness))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuaranteeMode {
    /// Refuse instances whose scheduled set-size guarantee is below one vertex.
    Strict,
    /// Run the construction regardless and verify the actual witness exactly.
    Relaxed,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterateResult {
    pub outcome: OracleReply,
    /// Scheduled interval fraction for this level.
    pub alpha: BigRational,
    /// Scheduled set-size fraction for this level.
    pub gamma: BigRational,
    /// For witnesses: whether the actual interval and set sizes meet the
    /// schedule.
    pub meets_schedule: Option<bool>,
}

/// Split a sorted vertex list into n consecutive chunks with sizes differing
/// by at most one (larger chunks first).
pub fn equitable_chunks(vertices: &[Vertex], n: usize) -> Vec<Vec<Vertex>> {
    let base = vertices.len() / n;
    let extra = vertices.len() % n;
    let mut out = Vec::with_capacity(n);
    let mut at = 0;
    for i in 0..n {
        let size = base + usize::from(i < extra);
        out.push(vertices[at..at + size].to_vec());
        at += size;
    }
    out
}

/// The oracle used by the iteration: 2-set witnesses come from the greedy
/// dichotomy over an equitable partition of the current vertex set, t-set
/// witnesses from the next level down.
struct GreedyOracle<'a> {
    pattern: &'a EdgeOrderedGraph,
    level: u32,
    delta2: BigRational,
}

impl SparseOracle for GreedyOracle<'_> {
    fn two_set(
        &mut self,
        g1: &OrderedSubgraph,
        interval: Interval,
        vertices: &[Vertex],
        threshold: &BigRational,
    ) -> Result<OracleReply, EmbedError> {
        let n = self.pattern.vertex_count();
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        let parts = equitable_chunks(&sorted, n);
        match greedy_embed(g1, self.pattern, interval, &parts, threshold)? {
            EmbedOutcome::Embedding(m) => Ok(OracleReply::PatternFound(m)),
            EmbedOutcome::Witness(w) => Ok(OracleReply::Witness(w)),
        }
    }

    fn t_set(
        &mut self,
        g1: &OrderedSubgraph,
        interval: Interval,
        vertices: &[Vertex],
        t: usize,
        _threshold: &BigRational,
    ) -> Result<OracleReply, EmbedError> {
        debug_assert_eq!(t, 1 << (self.level - 1));
        iterate_level(g1, interval, vertices, self.level - 1, &self.delta2, self.pattern)
    }
}

fn iterate_level(
    g1: &OrderedSubgraph,
    interval: Interval,
    vertices: &[Vertex],
    h: u32,
    delta2: &BigRational,
    pattern: &EdgeOrderedGraph,
) -> Result<OracleReply, EmbedError> {
    if h == 0 {
        let witness =
            SparseWitness::verified(g1, interval, vec![vertices.to_vec()], None, delta2)?;
        return Ok(OracleReply::Witness(witness));
    }
    let t = 1usize << (h - 1);
    let mut oracle = GreedyOracle {
        pattern,
        level: h,
        delta2: delta2.clone(),
    };
    amplify_sparse(g1, interval, vertices, &mut oracle, t, delta2)
}

/// Iterated amplification: a witness with 2^h pairwise-sparse sets, built by
/// h doubling rounds, where the round from level j to j+1 draws its 2-set
/// witnesses at threshold δ₂ / 2^(j+2).
pub fn iterate_sparse(
    g1: &OrderedSubgraph,
    interval: Interval,
    vertices: &[Vertex],
    h: u32,
    delta2: &BigRational,
    pattern: &EdgeOrderedGraph,
    mode: GuaranteeMode,
) -> Result<IterateResult, EmbedError> {
    let n = pattern.vertex_count();
    let bound = BigRational::new(BigInt::one(), BigInt::from(n));
    if delta2 <= &BigRational::zero() || delta2 >= &bound {
        return Err(EmbedError::BadThreshold {
            bound: format!("1/{n}"),
        });
    }
    if !pattern.is_degeneracy_sorted() {
        return Err(EmbedError::PatternNotSorted);
    }
    let (d, _) = pattern.degeneracy_order();
    let (alpha, gamma) = crate::bounds::sparse_schedule(n, d.max(1), delta2, h)
        .map_err(|e| EmbedError::BadInstance(e.to_string()))?;
    if mode == GuaranteeMode::Strict && &gamma * rational_of(vertices.len()) < BigRational::one()
    {
        return Err(EmbedError::SizeInfeasible {
            gamma: gamma.to_string(),
            size: vertices.len(),
        });
    }
    let outcome = iterate_level(g1, interval, vertices, h, delta2, pattern)?;
    let meets_schedule = match &outcome {
        OracleReply::PatternFound(_) => None,
        OracleReply::Witness(w) => {
            let interval_ok =
                rational_of(w.interval.len()) >= &alpha * rational_of(interval.len());
            let sizes_ok = w
                .sets
                .iter()
                .all(|s| rational_of(s.len()) >= &gamma * rational_of(vertices.len()));
            Some(interval_ok && sizes_ok && w.sets.len() == (1 << h))
        }
    };
    if mode == GuaranteeMode::Strict && meets_schedule == Some(false) {
        return Err(EmbedError::Internal(
            "constructed witness misses the scheduled guarantee".into(),
        ));
    }
    Ok(IterateResult {
        outcome,
        alpha,
        gamma,
        meets_schedule,
    })
}

/// Draw equal-size random subsets X_i ⊆ W_i until every capped pair (i, j)
/// satisfies d(X_i, X_j) < n² · cap, retrying with fresh substreams.
pub fn equalize_subsets(
    f: &Graph,
    sets: &[Vec<Vertex>],
    target: usize,
    caps: &[((usize, usize), BigRational)],
    seed: u64,
    retries: u32,
) -> Result<Vec<Vec<Vertex>>, EmbedError> {
    let n = sets.len();
    if target == 0 || sets.iter().any(|s| s.len() < target) {
        return Err(EmbedError::BadParts(format!(
            "target size {target} not available in every set"
        )));
    }
    for &((i, j), _) in caps {
        if i >= n || j >= n || i == j {
            return Err(EmbedError::BadParts(format!("cap on bad pair ({i}, {j})")));
        }
    }
    let n_sq = rational_of(n * n);
    for attempt in 0..retries.max(1) {
        let mut rng = SeededRng::substream(seed, attempt as u64);
        let picks: Vec<Vec<Vertex>> = sets.iter().map(|s| rng.subset_of(s, target)).collect();
        let ok = caps
            .iter()
            .all(|((i, j), cap)| f.density(&picks[*i], &picks[*j]) < &n_sq * cap);
        if ok {
            return Ok(picks);
        }
    }
    Err(EmbedError::RetriesExhausted {
        attempts: retries.max(1),
    })
}

/// Multipartite product graph: parts W_1..W_n, an edge between W_i and W_j
/// exactly when the host edge's rank lies in the block assigned to pattern
/// edge (i, j), and a red marking inherited from a coloring.
#[derive(Debug, Clone)]
pub struct MultipartiteInstance {
    parts: Vec<Vec<Vertex>>,
    /// adjacency[i][j] for i < j: bits over part j per vertex of part i
    adjacency: Vec<Vec<Option<Vec<FixedBitSet>>>>,
    red: Vec<Vec<Option<Vec<FixedBitSet>>>>,
}

impl MultipartiteInstance {
    pub fn part_count(&self) -> usize {
        self.parts.len()
    }

    pub fn parts(&self) -> &[Vec<Vertex>] {
        &self.parts
    }

    pub fn host_vertex(&self, part: usize, local: usize) -> Vertex {
        self.parts[part][local]
    }

    pub fn has_edge(&self, i: usize, a: usize, j: usize, b: usize) -> bool {
        let (i0, j0, a0, b0) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        match &self.adjacency[i0][j0] {
            None => false,
            Some(rows) => rows[a0].contains(b0),
        }
    }

    pub fn is_red(&self, i: usize, a: usize, j: usize, b: usize) -> bool {
        let (i0, j0, a0, b0) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        match &self.red[i0][j0] {
            None => false,
            Some(rows) => rows[a0].contains(b0),
        }
    }

    /// Exact edge density between parts i and j (0 when no block joins them).
    pub fn density(&self, i: usize, j: usize) -> BigRational {
        let (i0, j0) = (i.min(j), i.max(j));
        let total = (self.parts[i0].len() * self.parts[j0].len()) as u64;
        match &self.adjacency[i0][j0] {
            None => ratio(0, total),
            Some(rows) => {
                let e: u64 = rows.iter().map(|r| r.count_ones(..) as u64).sum();
                ratio(e, total)
            }
        }
    }

    pub fn red_density(&self, i: usize, j: usize) -> BigRational {
        let (i0, j0) = (i.min(j), i.max(j));
        let total = (self.parts[i0].len() * self.parts[j0].len()) as u64;
        match &self.red[i0][j0] {
            None => ratio(0, total),
            Some(rows) => {
                let e: u64 = rows.iter().map(|r| r.count_ones(..) as u64).sum();
                ratio(e, total)
            }
        }
    }

    /// Direct constructor from explicit edge lists, for engineered instances
    /// and tests: entries are ((part, local index), (part, local index)).
    pub fn from_edges(
        part_sizes: &[usize],
        edges: &[((usize, usize), (usize, usize))],
        red_edges: &[((usize, usize), (usize, usize))],
    ) -> Result<Self, EmbedError> {
        let mut parts = Vec::new();
        let mut next = 0;
        for &s in part_sizes {
            parts.push((next..next + s).collect::<Vec<_>>());
            next += s;
        }
        let mut inst = Self::empty(parts);
        for &((i, a), (j, b)) in edges {
            inst.insert_edge(i, a, j, b, false)?;
        }
        for &((i, a), (j, b)) in red_edges {
            inst.insert_edge(i, a, j, b, true)?;
        }
        Ok(inst)
    }

    fn empty(parts: Vec<Vec<Vertex>>) -> Self {
        let n = parts.len();
        let mut adjacency: Vec<Vec<Option<Vec<FixedBitSet>>>> = vec![vec![None; n]; n];
        let red = adjacency.clone();
        for i in 0..n {
            for j in i + 1..n {
                adjacency[i][j] = Some(vec![
                    FixedBitSet::with_capacity(parts[j].len());
                    parts[i].len()
                ]);
            }
        }
        Self {
            parts,
            adjacency,
            red,
        }
    }

    fn insert_edge(
        &mut self,
        i: usize,
        a: usize,
        j: usize,
        b: usize,
        red: bool,
    ) -> Result<(), EmbedError> {
        if i == j {
            return Err(EmbedError::BadInstance("edge within a part".into()));
        }
        let (i0, j0, a0, b0) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        if a0 >= self.parts[i0].len() || b0 >= self.parts[j0].len() {
            return Err(EmbedError::BadInstance("edge endpoint out of part".into()));
        }
        self.adjacency[i0][j0].as_mut().expect("initialized")[a0].insert(b0);
        if red {
            if self.red[i0][j0].is_none() {
                self.red[i0][j0] = Some(vec![
                    FixedBitSet::with_capacity(self.parts[j0].len());
                    self.parts[i0].len()
                ]);
            }
            self.red[i0][j0].as_mut().expect("just set")[a0].insert(b0);
        }
        Ok(())
    }
}

/// Build the product graph from a host, an interval partition keyed by
/// pattern edges over part indices, and an optional coloring with a red set.
pub fn build_product_graph(
    host: &EdgeOrderedGraph,
    coloring: Option<&Coloring>,
    parts: &[Vec<Vertex>],
    partition: &IntervalPartition,
    red_colors: &BTreeSet<u32>,
) -> Result<MultipartiteInstance, EmbedError> {
    let n = parts.len();
    let mut seen = BTreeSet::new();
    for p in parts {
        for &v in p {
            if v >= host.vertex_count() || !seen.insert(v) {
                return Err(EmbedError::BadParts(
                    "parts must be disjoint host vertices".into(),
                ));
            }
        }
    }
    if let Some(c) = coloring {
        if c.len() != host.edge_count() {
            return Err(EmbedError::BadInstance(
                "coloring does not cover the host".into(),
            ));
        }
    }
    for &((u, v), _) in partition.blocks() {
        if u >= n || v >= n {
            return Err(EmbedError::BadInstance(format!(
                "pattern edge ({u}, {v}) exceeds the {n} parts"
            )));
        }
    }
    let mut inst = MultipartiteInstance::empty(parts.to_vec());
    for i in 0..n {
        for j in i + 1..n {
            let Some(block) = partition.block_for_edge(i, j) else {
                continue;
            };
            for (a, &hu) in parts[i].iter().enumerate() {
                for (b, &hv) in parts[j].iter().enumerate() {
                    let Some(rank) = host.rank_of(hu, hv) else {
                        continue;
                    };
                    if !block.contains(rank) {
                        continue;
                    }
                    let red = coloring
                        .map(|c| red_colors.contains(&c.color_of(rank)))
                        .unwrap_or(false);
                    inst.insert_edge(i, a, j, b, red)?;
                }
            }
        }
    }
    Ok(inst)
}

struct CliqueWalk<'a> {
    inst: &'a MultipartiteInstance,
    avoid_red: bool,
    budget: Option<u64>,
    nodes: u64,
}

impl CliqueWalk<'_> {
    /// Visit all spanning cliques in lexicographic (per-part ascending)
    /// order; `visit` may stop the walk by returning false.
    fn walk(
        &mut self,
        chosen: &mut Vec<usize>,
        visit: &mut impl FnMut(&[usize]) -> bool,
    ) -> Result<bool, EmbedError> {
        let n = self.inst.part_count();
        let level = chosen.len();
        if level == n {
            return Ok(visit(chosen));
        }
        'cand: for b in 0..self.inst.parts()[level].len() {
            self.nodes += 1;
            if let Some(limit) = self.budget {
                if self.nodes > limit {
                    return Err(EmbedError::BudgetExhausted);
                }
            }
            for (i, &a) in chosen.iter().enumerate() {
                if !self.inst.has_edge(i, a, level, b) {
                    continue 'cand;
                }
                if self.avoid_red && self.inst.is_red(i, a, level, b) {
                    continue 'cand;
                }
            }
            chosen.push(b);
            let keep_going = self.walk(chosen, visit)?;
            chosen.pop();
            if !keep_going {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Exact count of spanning cliques (one vertex per part). Without a budget
/// the first part is split across worker threads and the per-branch counts
/// summed, which cannot change the result.
pub fn count_spanning_cliques(
    inst: &MultipartiteInstance,
    budget: Option<u64>,
) -> Result<u64, EmbedError> {
    if budget.is_none() && inst.part_count() >= 2 && inst.parts()[0].len() >= 2 {
        use rayon::prelude::*;
        let counts: Vec<u64> = (0..inst.parts()[0].len())
            .into_par_iter()
            .map(|first| {
                let mut count = 0u64;
                let mut walk = CliqueWalk {
                    inst,
                    avoid_red: false,
                    budget: None,
                    nodes: 0,
                };
                let mut chosen = vec![first];
                walk.walk(&mut chosen, &mut |_| {
                    count += 1;
                    true
                })
                .expect("unbudgeted walk cannot exhaust");
                count
            })
            .collect();
        return Ok(counts.iter().sum());
    }
    let mut count = 0u64;
    let mut walk = CliqueWalk {
        inst,
        avoid_red: false,
        budget,
        nodes: 0,
    };
    walk.walk(&mut Vec::new(), &mut |_| {
        count += 1;
        true
    })?;
    Ok(count)
}

/// First spanning clique avoiding every red edge, as per-part local indices.
pub fn find_red_free_clique(
    inst: &MultipartiteInstance,
    budget: Option<u64>,
) -> Result<Option<Vec<usize>>, EmbedError> {
    let mut found: Option<Vec<usize>> = None;
    let mut walk = CliqueWalk {
        inst,
        avoid_red: true,
        budget,
        nodes: 0,
    };
    walk.walk(&mut Vec::new(), &mut |clique| {
        found = Some(clique.to_vec());
        false
    })?;
    Ok(found)
}

/// Counting window (1 ± 4εn/pⁿ) · Π|W_i| · Π p_{i,j} as exact rationals.
/// `pair_densities` lists p_{i,j} for i < j in row-major order. A single part
/// has exactly |W_1| spanning cliques, so n = 1 returns (|W_1|, |W_1|).
pub fn counting_bounds(
    p: &BigRational,
    pair_densities: &[BigRational],
    part_sizes: &[usize],
    epsilon: &BigRational,
) -> Result<(BigRational, BigRational), EmbedError> {
    let n = part_sizes.len();
    if n == 0 {
        return Err(EmbedError::BadInstance("no parts".into()));
    }
    if n == 1 {
        let w = rational_of(part_sizes[0]);
        return Ok((w.clone(), w));
    }
    if pair_densities.len() != n * (n - 1) / 2 {
        return Err(EmbedError::BadInstance(format!(
            "need {} pairwise densities, got {}",
            n * (n - 1) / 2,
            pair_densities.len()
        )));
    }
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    if p <= &BigRational::zero() || p >= &half {
        return Err(EmbedError::BadInstance("p must lie in (0, 1/2)".into()));
    }
    for d in pair_densities {
        if d <= p || d >= &BigRational::one() {
            return Err(EmbedError::BadInstance(format!(
                "pair density {d} outside ({p}, 1)"
            )));
        }
    }
    let quarter_p = p / rational_of(4);
    let mut quarter_pow = BigRational::one();
    let mut p_pow = BigRational::one();
    for _ in 0..n {
        quarter_pow *= &quarter_p;
        p_pow *= p;
    }
    if epsilon <= &BigRational::zero() || epsilon > &quarter_pow {
        return Err(EmbedError::BadInstance(format!(
            "epsilon {epsilon} outside (0, (p/4)^{n}]"
        )));
    }
    let mut base = BigRational::one();
    for &s in part_sizes {
        base *= rational_of(s);
    }
    for d in pair_densities {
        base *= d;
    }
    let slack = rational_of(4 * n) * epsilon / p_pow;
    Ok((
        (BigRational::one() - &slack) * &base,
        (BigRational::one() + &slack) * &base,
    ))
}

/// Classification of the spanning cliques: how many pass through a red edge
/// with typical codegrees ("normal"), how many pass through an edge with an
/// atypical codegree, how many avoid red entirely, plus the counting window
/// for the total when its preconditions hold. An edge (a, b) between parts i
/// and j is normal when its codegree into every third part stays inside
/// (α² ± 2ε)|W_k|.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliqueCensus {
    pub total: u64,
    pub with_red_normal_edge: u64,
    pub with_non_normal_edge: u64,
    pub red_free: u64,
    pub window: Option<(BigRational, BigRational)>,
}

pub fn clique_census(
    inst: &MultipartiteInstance,
    alpha: &BigRational,
    epsilon: &BigRational,
    budget: Option<u64>,
) -> Result<CliqueCensus, EmbedError> {
    let n = inst.part_count();
    if n < 2 {
        return Err(EmbedError::BadInstance("need at least two parts".into()));
    }
    let bound = BigRational::new(BigInt::one(), BigInt::from(n));
    if alpha <= &BigRational::zero() || alpha >= &bound {
        return Err(EmbedError::BadInstance(format!(
            "alpha must lie in (0, 1/{n})"
        )));
    }
    if epsilon <= &BigRational::zero() {
        return Err(EmbedError::BadInstance("epsilon must be positive".into()));
    }

    let two_eps = rational_of(2) * epsilon;
    let alpha_sq = alpha * alpha;
    let mut normal: Vec<Vec<Option<Vec<FixedBitSet>>>> = vec![vec![None; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let mut rows =
                vec![FixedBitSet::with_capacity(inst.parts()[j].len()); inst.parts()[i].len()];
            for (a, row) in rows.iter_mut().enumerate() {
                for b in 0..inst.parts()[j].len() {
                    let mut ok = true;
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let size = inst.parts()[k].len();
                        let codeg = (0..size)
                            .filter(|&x| inst.has_edge(i, a, k, x) && inst.has_edge(j, b, k, x))
                            .count();
                        let lo = (&alpha_sq - &two_eps) * rational_of(size);
                        let hi = (&alpha_sq + &two_eps) * rational_of(size);
                        let c = rational_of(codeg);
                        if c < lo || c > hi {
                            ok = false;
                            break;
                        }
                    }
                    if ok {
                        row.insert(b);
                    }
                }
            }
            normal[i][j] = Some(rows);
        }
    }
    let is_normal = |i: usize, a: usize, j: usize, b: usize| -> bool {
        let (i0, j0, a0, b0) = if i < j { (i, j, a, b) } else { (j, i, b, a) };
        normal[i0][j0].as_ref().expect("filled")[a0].contains(b0)
    };

    let mut total = 0u64;
    let mut with_red_normal = 0u64;
    let mut with_non_normal = 0u64;
    let mut red_free = 0u64;
    let mut walk = CliqueWalk {
        inst,
        avoid_red: false,
        budget,
        nodes: 0,
    };
    walk.walk(&mut Vec::new(), &mut |clique| {
        total += 1;
        let mut any_red_normal = false;
        let mut any_non_normal = false;
        let mut any_red = false;
        for i in 0..n {
            for j in i + 1..n {
                let (a, b) = (clique[i], clique[j]);
                let red = inst.is_red(i, a, j, b);
                let norm = is_normal(i, a, j, b);
                any_red |= red;
                any_red_normal |= red && norm;
                any_non_normal |= !norm;
            }
        }
        with_red_normal += u64::from(any_red_normal);
        with_non_normal += u64::from(any_non_normal);
        red_free += u64::from(!any_red);
        true
    })?;

    if red_free < total.saturating_sub(with_red_normal + with_non_normal) {
        return Err(EmbedError::Internal("census accounting broken".into()));
    }

    let pair_densities: Vec<BigRational> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| inst.density(i, j))
        .collect();
    let sizes: Vec<usize> = inst.parts().iter().map(Vec::len).collect();
    let window = counting_bounds(alpha, &pair_densities, &sizes, epsilon).ok();

    Ok(CliqueCensus {
        total,
        with_red_normal_edge: with_red_normal,
        with_non_normal_edge: with_non_normal,
        red_free,
        window,
    })
}

/// Verify that a spanning clique of the product graph pulls back to an
/// interval-respecting, monochromatic, non-red copy of the pattern in the
/// host: every pattern edge exists with rank in its block, the host ranks are
/// order-isomorphic to the pattern ranks, and when a coloring is given all
/// edge colors agree and avoid the red set.
pub fn verify_pullback(
    host: &EdgeOrderedGraph,
    coloring: Option<&Coloring>,
    red_colors: &BTreeSet<u32>,
    pattern: &EdgeOrderedGraph,
    partition: &IntervalPartition,
    inst: &MultipartiteInstance,
    clique: &[usize],
) -> Result<EmbeddingMap, String> {
    if clique.len() != pattern.vertex_count() {
        return Err("clique does not span the pattern".into());
    }
    let map = EmbeddingMap::new(
        clique
            .iter()
            .enumerate()
            .map(|(part, &local)| inst.host_vertex(part, local))
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    let full = OrderedSubgraph::full(host);
    verify_block_embedding(&full, pattern, partition, &map)?;
    crate::containment::verify_ordered_embedding(host, pattern, &map, None)?;
    if let Some(c) = coloring {
        let mut colors = BTreeSet::new();
        for &(u, v) in pattern.edges() {
            let rank = host
                .rank_of(map.image_of(u), map.image_of(v))
                .expect("verified above");
            let color = c.color_of(rank);
            if red_colors.contains(&color) {
                return Err(format!("edge rank {rank} carries forbidden color {color}"));
            }
            colors.insert(color);
        }
        if colors.len() > 1 {
            return Err(format!("copy is not monochromatic: colors {colors:?}"));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeOrderedGraph;

    fn interval(lo: usize, hi: usize) -> Interval {
        Interval::new(lo, hi).unwrap()
    }

    #[test]
    fn equitable_partition_examples() {
        let k3 = EdgeOrderedGraph::lex_complete(3);
        let p = equitable_interval_partition(interval(1, 10), &k3).unwrap();
        let blocks: Vec<Interval> = (1..=3).map(|r| p.block_for_rank(r)).collect();
        assert_eq!(blocks, vec![interval(1, 3), interval(4, 6), interval(7, 10)]);

        let p6 = equitable_interval_partition(interval(1, 6), &k3).unwrap();
        let blocks6: Vec<Interval> = (1..=3).map(|r| p6.block_for_rank(r)).collect();
        assert_eq!(blocks6, vec![interval(1, 2), interval(3, 4), interval(5, 6)]);

        let edge = EdgeOrderedGraph::from_ranked_edges(2, vec![(0, 1)]).unwrap();
        let p1 = equitable_interval_partition(interval(4, 9), &edge).unwrap();
        assert_eq!(p1.block_for_rank(1), interval(4, 9));
    }

    #[test]
    fn equitable_partition_offset_interval() {
        let k3 = EdgeOrderedGraph::lex_complete(3);
        let p = equitable_interval_partition(interval(11, 20), &k3).unwrap();
        let blocks: Vec<Interval> = (1..=3).map(|r| p.block_for_rank(r)).collect();
        assert_eq!(
            blocks,
            vec![interval(11, 13), interval(14, 16), interval(17, 20)]
        );
    }

    #[test]
    fn partition_block_size_floor_guarantee() {
        let k4 = EdgeOrderedGraph::lex_complete(4);
        for len in [6usize, 7, 17, 100, 101] {
            let p = equitable_interval_partition(interval(1, len), &k4).unwrap();
            let total: usize = p.blocks().iter().map(|(_, b)| b.len()).sum();
            assert_eq!(total, len);
            let sizes: Vec<usize> = p.blocks().iter().map(|(_, b)| b.len()).collect();
            let (mn, mx) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            assert!(mx - mn <= 1);
            assert!(*mn >= len / 6);
            for w in p.blocks().windows(2) {
                assert_eq!(w[1].1.lo(), w[0].1.hi() + 1);
            }
        }
    }

    #[test]
    fn greedy_needs_a_big_enough_interval() {
        let host = EdgeOrderedGraph::new(2, vec![(0, 1, 1)]).unwrap();
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::from_ranked_edges(2, vec![(0, 1)]).unwrap();
        let out = greedy_embed(&g1, &pattern, interval(1, 1), &[vec![0], vec![1]], &ratio(1, 3));
        assert!(matches!(out, Err(EmbedError::IntervalTooSmall { .. })));
    }

    #[test]
    fn greedy_embeds_single_edge_mid_interval() {
        // pattern edge must land in the single block = the whole interval
        let host = EdgeOrderedGraph::new(
            6,
            vec![(2, 3, 1), (3, 4, 2), (0, 1, 3), (4, 5, 4), (2, 5, 5)],
        )
        .unwrap();
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::from_ranked_edges(2, vec![(0, 1)]).unwrap();
        let out =
            greedy_embed(&g1, &pattern, interval(1, 5), &[vec![0], vec![1]], &ratio(1, 3))
                .unwrap();
        match out {
            EmbedOutcome::Embedding(m) => assert_eq!(m.as_slice(), &[0, 1]),
            EmbedOutcome::Witness(w) => panic!("expected embedding, got {w:?}"),
        }
    }

    #[test]
    fn greedy_witnesses_when_parts_see_no_edges() {
        // all host edges touch the apex vertex 9; parts avoid the apex
        let host = star_host(10);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let_assert_witness(
            greedy_embed(
                &g1,
                &pattern,
                interval(1, 9),
                &[vec![0, 1], vec![2, 3], vec![4, 5]],
                &ratio(1, 4),
            )
            .unwrap(),
        );
    }

    fn let_assert_witness(out: EmbedOutcome) {
        match out {
            EmbedOutcome::Witness(w) => {
                assert_eq!(w.sets.len(), 2);
                assert_eq!(w.origin_parts, Some((0, 1)));
                for (_, d) in &w.densities {
                    assert_eq!(*d, BigRational::zero());
                }
            }
            EmbedOutcome::Embedding(_) => panic!("no copy exists"),
        }
    }

    #[test]
    fn greedy_rejects_bad_threshold() {
        let host = EdgeOrderedGraph::lex_complete(6);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let parts = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        for bad in [ratio(1, 3), ratio(1, 2), ratio(0, 1)] {
            assert!(matches!(
                greedy_embed(&g1, &pattern, interval(1, 15), &parts, &bad),
                Err(EmbedError::BadThreshold { .. })
            ));
        }
        assert!(greedy_embed(&g1, &pattern, interval(1, 15), &parts, &ratio(1, 4)).is_ok());
    }

    #[test]
    fn degree_filter_examples() {
        let g = Graph::new(4);
        let kept = degree_filter(&g, &[0, 1], &[2, 3], &ratio(2, 1), &ratio(1, 2)).unwrap();
        assert_eq!(kept, vec![0, 1]);

        let mut g = Graph::new(4);
        g.add_edge(0, 2);
        g.add_edge(0, 3);
        let kept = degree_filter(&g, &[0, 1], &[2, 3], &ratio(2, 1), &ratio(1, 2)).unwrap();
        assert_eq!(kept, vec![1]);

        // uniform degree exactly bound * |Y| survives a strict cut when c > 1
        let mut g = Graph::new(4);
        g.add_edge(0, 2);
        g.add_edge(1, 3);
        let kept = degree_filter(&g, &[0, 1], &[2, 3], &ratio(2, 1), &ratio(1, 2)).unwrap();
        assert_eq!(kept, vec![0, 1]);

        let mut g = Graph::new(4);
        g.add_edge(0, 2);
        g.add_edge(0, 3);
        g.add_edge(1, 2);
        assert!(matches!(
            degree_filter(&g, &[0, 1], &[2, 3], &ratio(2, 1), &ratio(1, 2)),
            Err(EmbedError::DensityPrecondition { .. })
        ));
    }

    /// Host whose edges all touch one apex vertex: no K3 copies, and all
    /// densities between apex-free sets are zero.
    fn star_host(n: usize) -> EdgeOrderedGraph {
        let mut edges = Vec::new();
        for v in 0..n - 1 {
            edges.push((n - 1, v, v + 1));
        }
        EdgeOrderedGraph::new(n, edges).unwrap()
    }

    #[test]
    fn iterate_levels_on_sparse_host() {
        let host = star_host(100);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let verts: Vec<usize> = (0..99).collect();
        let full = interval(1, host.edge_count());
        let delta2 = ratio(1, 4);

        let r0 = iterate_sparse(&g1, full, &verts, 0, &delta2, &pattern, GuaranteeMode::Relaxed)
            .unwrap();
        match &r0.outcome {
            OracleReply::Witness(w) => {
                assert_eq!(w.sets.len(), 1);
                assert_eq!(w.interval, full);
                assert_eq!(r0.alpha, ratio(1, 1));
                assert_eq!(r0.gamma, ratio(1, 1));
                assert_eq!(r0.meets_schedule, Some(true));
            }
            _ => panic!("expected witness"),
        }

        let r1 = iterate_sparse(&g1, full, &verts, 1, &delta2, &pattern, GuaranteeMode::Relaxed)
            .unwrap();
        match &r1.outcome {
            OracleReply::Witness(w) => assert_eq!(w.sets.len(), 2),
            _ => panic!("expected witness"),
        }

        let r2 = iterate_sparse(&g1, full, &verts, 2, &delta2, &pattern, GuaranteeMode::Relaxed)
            .unwrap();
        match &r2.outcome {
            OracleReply::Witness(w) => {
                assert_eq!(w.sets.len(), 4);
                for (_, d) in &w.densities {
                    assert_eq!(*d, BigRational::zero());
                }
            }
            _ => panic!("expected witness"),
        }
    }

    #[test]
    fn iterate_strict_gate_reports_infeasible_size() {
        let host = star_host(100);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let verts: Vec<usize> = (0..99).collect();
        let err = iterate_sparse(
            &g1,
            interval(1, host.edge_count()),
            &verts,
            2,
            &ratio(1, 4),
            &pattern,
            GuaranteeMode::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, EmbedError::SizeInfeasible { .. }));
    }

    #[test]
    fn amplify_t1_equals_iterate_h1() {
        let host = star_host(100);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let verts: Vec<usize> = (0..99).collect();
        let full = interval(1, host.edge_count());
        let delta2 = ratio(1, 4);
        let via_iterate =
            iterate_sparse(&g1, full, &verts, 1, &delta2, &pattern, GuaranteeMode::Relaxed)
                .unwrap()
                .outcome;
        let mut oracle = GreedyOracle {
            pattern: &pattern,
            level: 1,
            delta2: delta2.clone(),
        };
        let via_amplify = amplify_sparse(&g1, full, &verts, &mut oracle, 1, &delta2).unwrap();
        assert_eq!(via_iterate, via_amplify);
    }

    #[test]
    fn iterate_reports_pattern_found_on_dense_host() {
        // the full lex complete graph certainly contains lex K3 everywhere
        let host = EdgeOrderedGraph::lex_complete(30);
        let g1 = OrderedSubgraph::full(&host);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let verts: Vec<usize> = (0..30).collect();
        let r = iterate_sparse(
            &g1,
            interval(1, host.edge_count()),
            &verts,
            1,
            &ratio(1, 4),
            &pattern,
            GuaranteeMode::Relaxed,
        )
        .unwrap();
        match r.outcome {
            OracleReply::PatternFound(m) => {
                crate::containment::verify_ordered_embedding(&host, &pattern, &m, None).unwrap();
            }
            OracleReply::Witness(w) => {
                // a witness against the complete graph must still verify
                assert!(w.densities.iter().all(|(_, d)| d < &ratio(1, 4)));
            }
        }
    }

    #[test]
    fn equalize_trivial_and_loose_caps() {
        let g = Graph::new(12);
        let sets = vec![
            (0..4).collect::<Vec<_>>(),
            (4..8).collect(),
            (8..12).collect(),
        ];
        let caps: Vec<((usize, usize), BigRational)> = vec![
            ((0, 1), ratio(1, 10)),
            ((0, 2), ratio(1, 10)),
            ((1, 2), ratio(1, 10)),
        ];
        let picks = equalize_subsets(&g, &sets, 3, &caps, 1, 5).unwrap();
        assert!(picks.iter().all(|p| p.len() == 3));

        let mut dense = Graph::new(4);
        for a in 0..2 {
            for b in 2..4 {
                dense.add_edge(a, b);
            }
        }
        let sets2 = vec![vec![0, 1], vec![2, 3]];
        let caps2 = vec![((0, 1), ratio(1, 2))]; // n² cap = 2 >= 1, vacuous
        assert!(equalize_subsets(&dense, &sets2, 2, &caps2, 0, 1).is_ok());
    }

    #[test]
    fn equalize_retries_exhausted_on_tight_caps() {
        let mut dense = Graph::new(4);
        for a in 0..2 {
            for b in 2..4 {
                dense.add_edge(a, b);
            }
        }
        let sets = vec![vec![0, 1], vec![2, 3]];
        let caps = vec![((0, 1), ratio(1, 100))];
        assert!(matches!(
            equalize_subsets(&dense, &sets, 2, &caps, 0, 3),
            Err(EmbedError::RetriesExhausted { .. })
        ));
    }

    #[test]
    fn product_graph_count_matches_brute_force() {
        let host = EdgeOrderedGraph::lex_complete(6);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let parts = vec![vec![0, 1], vec![2, 3], vec![4, 5]];
        let p = equitable_interval_partition(interval(1, 15), &pattern).unwrap();
        let inst = build_product_graph(&host, None, &parts, &p, &BTreeSet::new()).unwrap();
        let count = count_spanning_cliques(&inst, None).unwrap();
        let mut oracle = 0u64;
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    if inst.has_edge(0, a, 1, b)
                        && inst.has_edge(0, a, 2, c)
                        && inst.has_edge(1, b, 2, c)
                    {
                        oracle += 1;
                    }
                }
            }
        }
        assert_eq!(count, oracle);

        // every spanning clique pulls back to an interval-respecting copy
        let mut walk = CliqueWalk {
            inst: &inst,
            avoid_red: false,
            budget: None,
            nodes: 0,
        };
        walk.walk(&mut Vec::new(), &mut |clique| {
            verify_pullback(&host, None, &BTreeSet::new(), &pattern, &p, &inst, clique)
                .expect("pull-back must verify");
            true
        })
        .unwrap();
    }

    #[test]
    fn complete_multipartite_clique_count_is_product() {
        let sizes = [3usize, 4, 5];
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in i + 1..3 {
                for a in 0..sizes[i] {
                    for b in 0..sizes[j] {
                        edges.push(((i, a), (j, b)));
                    }
                }
            }
        }
        let inst = MultipartiteInstance::from_edges(&sizes, &edges, &[]).unwrap();
        assert_eq!(count_spanning_cliques(&inst, None).unwrap(), 60);
        assert_eq!(inst.density(0, 1), ratio(1, 1));

        let mut edges2 = edges.clone();
        edges2.retain(|&((i, _), (j, _))| !(i == 0 && j == 1));
        let inst2 = MultipartiteInstance::from_edges(&sizes, &edges2, &[]).unwrap();
        assert_eq!(count_spanning_cliques(&inst2, None).unwrap(), 0);
    }

    #[test]
    fn red_free_clique_cases() {
        let sizes = [2usize, 2, 2];
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in i + 1..3 {
                for a in 0..2 {
                    for b in 0..2 {
                        edges.push(((i, a), (j, b)));
                    }
                }
            }
        }
        let none_red = MultipartiteInstance::from_edges(&sizes, &edges, &[]).unwrap();
        assert!(find_red_free_clique(&none_red, None).unwrap().is_some());

        let all_red = MultipartiteInstance::from_edges(&sizes, &edges, &edges).unwrap();
        assert!(find_red_free_clique(&all_red, None).unwrap().is_none());
    }

    #[test]
    fn counting_bounds_basics() {
        let (lo, hi) = counting_bounds(&ratio(1, 4), &[], &[7], &ratio(1, 100)).unwrap();
        assert_eq!(lo, ratio(7, 1));
        assert_eq!(hi, ratio(7, 1));

        // p = 1/4, n = 2, ε = (p/4)² = 1/256: slack = 8ε/p² = 1/2
        let p = ratio(1, 4);
        let eps = ratio(1, 256);
        let dens = vec![ratio(1, 2)];
        let (lo, hi) = counting_bounds(&p, &dens, &[4, 4], &eps).unwrap();
        let base = ratio(8, 1);
        assert_eq!(lo, &base * ratio(1, 2));
        assert_eq!(hi, &base * ratio(3, 2));

        assert!(counting_bounds(&ratio(3, 4), &dens, &[4, 4], &eps).is_err());
        assert!(counting_bounds(&p, &[ratio(1, 8)], &[4, 4], &eps).is_err());
        assert!(counting_bounds(&p, &dens, &[4, 4], &ratio(1, 2)).is_err());
    }

    #[test]
    fn census_on_red_free_instance() {
        let sizes = [3usize, 3, 3];
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in i + 1..3 {
                for a in 0..3 {
                    for b in 0..3 {
                        edges.push(((i, a), (j, b)));
                    }
                }
            }
        }
        let inst = MultipartiteInstance::from_edges(&sizes, &edges, &[]).unwrap();
        let census = clique_census(&inst, &ratio(1, 4), &ratio(1, 100), None).unwrap();
        assert_eq!(census.total, 27);
        assert_eq!(census.with_red_normal_edge, 0);
        assert_eq!(census.red_free, 27);
        assert!(
            census.red_free
                >= census.total - census.with_red_normal_edge - census.with_non_normal_edge
        );

        assert!(clique_census(&inst, &ratio(1, 1), &ratio(1, 100), None).is_err());
    }

    #[test]
    fn budget_exhaustion_in_clique_walks() {
        let sizes = [4usize, 4, 4];
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in i + 1..3 {
                for a in 0..4 {
                    for b in 0..4 {
                        edges.push(((i, a), (j, b)));
                    }
                }
            }
        }
        let inst = MultipartiteInstance::from_edges(&sizes, &edges, &[]).unwrap();
        assert!(matches!(
            count_spanning_cliques(&inst, Some(3)),
            Err(EmbedError::BudgetExhausted)
        ));
    }

    #[test]
    fn parallel_and_serial_counts_agree() {
        let mut rng = crate::prng::SeededRng::new(2024);
        let sizes = [5usize, 5, 5];
        let mut edges = Vec::new();
        for i in 0..3 {
            for j in i + 1..3 {
                for a in 0..5 {
                    for b in 0..5 {
                        if rng.below(3) > 0 {
                            edges.push(((i, a), (j, b)));
                        }
                    }
                }
            }
        }
        let inst = MultipartiteInstance::from_edges(&sizes, &edges, &[]).unwrap();
        let parallel = count_spanning_cliques(&inst, None).unwrap();
        let serial = count_spanning_cliques(&inst, Some(u64::MAX)).unwrap();
        assert_eq!(parallel, serial);
    }
}
