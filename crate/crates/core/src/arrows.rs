//! Arrowing: a host arrows targets (one per color) when every q-coloring of
//! its edges contains, for some color c, a monochromatic copy of the c-th
//! target. Provides full enumeration over colorings, a backtracking
//! certificate search, exact Ramsey search on tiny patterns, and a harness
//! for the composition fact (F arrows G with s colors and G arrows H with r
//! colors imply F arrows H with rs colors).
//!
//! Colorings are ordered lexicographically by the color vector indexed by
//! rank; the certificate tie-break is the first bad coloring in that order,
//! which both strategies and any worker count agree on.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use thiserror::Error;

use crate::containment::{find_monochromatic_copy, SearchOutcome};
use crate::equiv::{are_equivalent, is_canonical_ordering};
use crate::graph::{binom2, Coloring, EdgeOrderedGraph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ArrowsError {
    #[error("need at least one target")]
    NoTargets,
    #[error("certificate failed re-verification: {0}")]
    CertificateInvalid(String),
    #[error("exhaustive host search supports pattern with at most {max} vertices, got {got}")]
    PatternTooLarge { got: usize, max: usize },
    #[error("cannot refute arrowing at {n} vertices: {m}! host orderings is out of reach")]
    HostEnumerationInfeasible { n: usize, m: usize },
    #[error(transparent)]
    Containment(#[from] crate::containment::ContainmentError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ArrowsOutcome {
    /// Every coloring contains a monochromatic copy of its color's target.
    Arrows,
    /// A verified coloring avoiding all targets; the lexicographically least.
    NonArrow(Coloring),
    BudgetExhausted,
}

impl ArrowsOutcome {
    pub fn arrows(&self) -> Option<bool> {
        match self {
            ArrowsOutcome::Arrows => Some(true),
            ArrowsOutcome::NonArrow(_) => Some(false),
            ArrowsOutcome::BudgetExhausted => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArrowsMode {
    /// Enumerate all q^m colorings in lexicographic order.
    Enumerate,
    /// Backtrack over partial colorings, pruning branches that already
    /// contain a monochromatic copy.
    Backtrack,
}

#[derive(Debug, Clone, Copy)]
pub struct ArrowsOptions {
    pub mode: ArrowsMode,
    /// Cap on colorings examined (enumerate) or assignments tried (backtrack).
    pub budget: Option<u64>,
    /// Worker threads for the enumeration mode.
    pub workers: usize,
    /// Fix the color of rank 1 to color 1. Only sound when all targets are
    /// pairwise equivalent; rejected otherwise.
    pub symmetry_reduction: bool,
}

impl Default for ArrowsOptions {
    fn default() -> Self {
        Self {
            mode: ArrowsMode::Enumerate,
            budget: None,
            workers: 1,
            symmetry_reduction: false,
        }
    }
}

/// Does the coloring avoid a monochromatic copy of every color's target?
fn is_bad_coloring(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    coloring: &Coloring,
) -> Result<bool, ArrowsError> {
    for (idx, target) in targets.iter().enumerate() {
        let color = idx as u32 + 1;
        match find_monochromatic_copy(host, coloring, target, color, None)? {
            SearchOutcome::Found(_) => return Ok(false),
            SearchOutcome::NotFound => {}
            SearchOutcome::BudgetExhausted => unreachable!("unbudgeted search"),
        }
    }
    Ok(true)
}

/// Re-verify a certificate with the independent containment verifier path.
pub fn verify_certificate(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    coloring: &Coloring,
) -> Result<(), ArrowsError> {
    for (idx, target) in targets.iter().enumerate() {
        let color = idx as u32 + 1;
        if let SearchOutcome::Found(m) = find_monochromatic_copy(host, coloring, target, color, None)? {
            return Err(ArrowsError::CertificateInvalid(format!(
                "color {color} contains its target via {:?}",
                m.as_slice()
            )));
        }
    }
    Ok(())
}

fn digits_to_coloring(q: u32, digits: &[u32]) -> Coloring {
    Coloring::new(q, digits.iter().map(|d| d + 1).collect()).expect("digits in range")
}

/// Advance a base-q counter (most significant digit first). False on wrap.
fn increment(digits: &mut [u32], q: u32, fixed_prefix: usize) -> bool {
    for i in (fixed_prefix..digits.len()).rev() {
        if digits[i] + 1 < q {
            digits[i] += 1;
            return true;
        }
        digits[i] = 0;
    }
    false
}

fn enumerate_block(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    q: u32,
    prefix: &[u32],
) -> Result<Option<Coloring>, ArrowsError> {
    let m = host.edge_count();
    let mut digits = vec![0u32; m];
    digits[..prefix.len()].copy_from_slice(prefix);
    loop {
        let coloring = digits_to_coloring(q, &digits);
        if is_bad_coloring(host, targets, &coloring)? {
            return Ok(Some(coloring));
        }
        if !increment(&mut digits, q, prefix.len()) {
            return Ok(None);
        }
    }
}

fn targets_all_equivalent(targets: &[EdgeOrderedGraph]) -> bool {
    targets.windows(2).all(|w| are_equivalent(&w[0], &w[1]))
}

/// Decide the arrowing relation for the given host and per-color targets.
pub fn arrows(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    options: &ArrowsOptions,
) -> Result<ArrowsOutcome, ArrowsError> {
    if targets.is_empty() {
        return Err(ArrowsError::NoTargets);
    }
    let q = targets.len() as u32;
    let m = host.edge_count();

    if m == 0 {
        // the empty coloring is bad iff some target is nonempty
        let empty = Coloring::new(q, vec![]).expect("empty");
        return Ok(if is_bad_coloring(host, targets, &empty)? {
            ArrowsOutcome::NonArrow(empty)
        } else {
            ArrowsOutcome::Arrows
        });
    }

    match options.mode {
        ArrowsMode::Backtrack => backtrack_search(host, targets, options.budget),
        ArrowsMode::Enumerate => enumerate_search(host, targets, options),
    }
}

fn total_colorings(q: u32, m: usize, fixed_first: bool) -> Option<u64> {
    let mut total: u128 = 1;
    let free = if fixed_first { m - 1 } else { m };
    for _ in 0..free {
        total = total.checked_mul(q as u128)?;
        if total > u64::MAX as u128 {
            return None;
        }
    }
    Some(total as u64)
}

fn enumerate_search(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    options: &ArrowsOptions,
) -> Result<ArrowsOutcome, ArrowsError> {
    let q = targets.len() as u32;
    let m = host.edge_count();
    let reduce = options.symmetry_reduction && targets_all_equivalent(targets);
    let total = total_colorings(q, m, reduce);

    let within_budget = match (total, options.budget) {
        (Some(t), Some(b)) => t <= b,
        (Some(_), None) => true,
        (None, _) => false,
    };
    if !within_budget {
        // serial enumeration with exact first-bad-or-budget semantics
        return serial_enumerate(host, targets, q, reduce, options.budget);
    }

    let workers = options.workers.max(1);
    if workers == 1 {
        return serial_enumerate(host, targets, q, reduce, None);
    }

    // split by fixed prefix blocks; merge takes the least block with a bad
    // coloring, which reproduces the serial lexicographic tie-break
    let mut prefix_len = if reduce { 1 } else { 0 };
    let mut blocks: u64 = 1;
    while blocks < 4 * workers as u64 && prefix_len < m {
        blocks *= q as u64;
        prefix_len += 1;
    }
    let mut prefixes = Vec::new();
    let mut digits = vec![0u32; prefix_len];
    loop {
        prefixes.push(digits.clone());
        if !increment(&mut digits, q, if reduce { 1 } else { 0 }) {
            break;
        }
    }

    let found: Mutex<Option<(usize, Coloring)>> = Mutex::new(None);
    let next: AtomicU64 = AtomicU64::new(0);
    let error: Mutex<Option<ArrowsError>> = Mutex::new(None);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::Relaxed) as usize;
                if idx >= prefixes.len() {
                    return;
                }
                {
                    let best = found.lock().expect("lock");
                    if best.as_ref().is_some_and(|(b, _)| *b < idx) {
                        continue; // a bad coloring in an earlier block wins
                    }
                }
                match enumerate_block(host, targets, q, &prefixes[idx]) {
                    Ok(Some(coloring)) => {
                        let mut best = found.lock().expect("lock");
                        if best.as_ref().is_none_or(|(b, _)| idx < *b) {
                            *best = Some((idx, coloring));
                        }
                    }
                    Ok(None) => {}
                    Err(e) => {
                        *error.lock().expect("lock") = Some(e);
                        return;
                    }
                }
            });
        }
    });
    if let Some(e) = error.into_inner().expect("lock") {
        return Err(e);
    }
    match found.into_inner().expect("lock") {
        Some((_, coloring)) => {
            verify_certificate(host, targets, &coloring)?;
            Ok(ArrowsOutcome::NonArrow(coloring))
        }
        None => Ok(ArrowsOutcome::Arrows),
    }
}

fn serial_enumerate(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    q: u32,
    reduce: bool,
    budget: Option<u64>,
) -> Result<ArrowsOutcome, ArrowsError> {
    let m = host.edge_count();
    let mut digits = vec![0u32; m];
    let fixed = if reduce { 1 } else { 0 };
    let mut used: u64 = 0;
    loop {
        if let Some(limit) = budget {
            used += 1;
            if used > limit {
                return Ok(ArrowsOutcome::BudgetExhausted);
            }
        }
        let coloring = digits_to_coloring(q, &digits);
        if is_bad_coloring(host, targets, &coloring)? {
            verify_certificate(host, targets, &coloring)?;
            return Ok(ArrowsOutcome::NonArrow(coloring));
        }
        if !increment(&mut digits, q, fixed) {
            return Ok(ArrowsOutcome::Arrows);
        }
    }
}

/// Search a bad coloring directly, assigning colors rank by rank and pruning
/// any branch whose partial coloring already contains a monochromatic copy.
pub fn non_arrow_certificate(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    budget: Option<u64>,
) -> Result<ArrowsOutcome, ArrowsError> {
    if targets.is_empty() {
        return Err(ArrowsError::NoTargets);
    }
    backtrack_search(host, targets, budget)
}

fn backtrack_search(
    host: &EdgeOrderedGraph,
    targets: &[EdgeOrderedGraph],
    budget: Option<u64>,
) -> Result<ArrowsOutcome, ArrowsError> {
    let q = targets.len() as u32;
    let m = host.edge_count();
    let mut colors = vec![0u32; m]; // 0 = unassigned
    let mut used: u64 = 0;

    fn recurse(
        host: &EdgeOrderedGraph,
        targets: &[EdgeOrderedGraph],
        q: u32,
        colors: &mut Vec<u32>,
        rank: usize,
        used: &mut u64,
        budget: Option<u64>,
    ) -> Result<Option<Option<Coloring>>, ArrowsError> {
        // Ok(None) = budget; Ok(Some(None)) = subtree exhausted; Ok(Some(Some)) = found
        let m = colors.len();
        if rank > m {
            let c = Coloring::new(q, colors.clone()).expect("fully assigned");
            return Ok(Some(Some(c)));
        }
        for color in 1..=q {
            if let Some(limit) = budget {
                *used += 1;
                if *used > limit {
                    return Ok(None);
                }
            }
            colors[rank - 1] = color;
            // a new monochromatic copy must use the edge just colored, so only
            // this color class needs re-checking
            let has_copy = contains_in_color_class(host, colors, color, &targets[color as usize - 1]);
            if !has_copy {
                match recurse(host, targets, q, colors, rank + 1, used, budget)? {
                    None => {
                        colors[rank - 1] = 0;
                        return Ok(None);
                    }
                    Some(Some(c)) => {
                        colors[rank - 1] = 0;
                        return Ok(Some(Some(c)));
                    }
                    Some(None) => {}
                }
            }
            colors[rank - 1] = 0;
        }
        Ok(Some(None))
    }

    let out = recurse(host, targets, q, &mut colors, 1, &mut used, budget)?;
    match out {
        None => Ok(ArrowsOutcome::BudgetExhausted),
        Some(None) => Ok(ArrowsOutcome::Arrows),
        Some(Some(coloring)) => {
            verify_certificate(host, targets, &coloring)?;
            Ok(ArrowsOutcome::NonArrow(coloring))
        }
    }
}

/// Does the class of `color` in a (possibly partial) rank->color assignment
/// contain a copy of the target? Unassigned ranks (0) never match.
fn contains_in_color_class(
    host: &EdgeOrderedGraph,
    colors: &[u32],
    color: u32,
    target: &EdgeOrderedGraph,
) -> bool {
    let (sub, _) = host.filter_ranks(|rank| colors[rank - 1] == color);
    crate::containment::find_copy(&sub, target, None)
        .found()
        .is_some()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HostStrategy {
    /// Only lexicographic complete hosts; the result is an upper bound.
    LexOnly,
    /// All canonical edge-orderings of complete hosts; exact minimality.
    ExhaustiveOrderings,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RamseyOutcome {
    Exact(usize),
    UpperBound(usize),
    NotFoundUpTo(usize),
}

/// Largest pattern vertex count supported in exhaustive-orderings mode.
pub const RAMSEY_EXHAUSTIVE_MAX_PATTERN: usize = 3;
/// Largest host edge count whose orderings can be exhausted for refutation.
const RAMSEY_MAX_HOST_EDGES: usize = 10;

/// Smallest N (up to n_max) such that an edge-ordered complete host on N
/// vertices arrows the pattern in all q colors.
pub fn ramsey_search(
    pattern: &EdgeOrderedGraph,
    q: u32,
    n_max: usize,
    strategy: HostStrategy,
) -> Result<RamseyOutcome, ArrowsError> {
    if strategy == HostStrategy::ExhaustiveOrderings
        && pattern.vertex_count() > RAMSEY_EXHAUSTIVE_MAX_PATTERN
    {
        return Err(ArrowsError::PatternTooLarge {
            got: pattern.vertex_count(),
            max: RAMSEY_EXHAUSTIVE_MAX_PATTERN,
        });
    }
    let targets: Vec<EdgeOrderedGraph> = (0..q).map(|_| pattern.clone()).collect();
    for n in 2..=n_max {
        let lex = EdgeOrderedGraph::lex_complete(n);
        let lex_arrows = matches!(
            arrows(&lex, &targets, &ArrowsOptions { mode: ArrowsMode::Backtrack, ..Default::default() })?,
            ArrowsOutcome::Arrows
        );
        if lex_arrows {
            return Ok(match strategy {
                HostStrategy::LexOnly => RamseyOutcome::UpperBound(n),
                HostStrategy::ExhaustiveOrderings => RamseyOutcome::Exact(n),
            });
        }
        match strategy {
            HostStrategy::LexOnly => {}
            HostStrategy::ExhaustiveOrderings => {
                if some_ordering_arrows(n, &targets)? {
                    return Ok(RamseyOutcome::Exact(n));
                }
            }
        }
    }
    Ok(RamseyOutcome::NotFoundUpTo(n_max))
}

/// Try every canonical edge-ordering of K_n. Skips the lexicographic host's
/// class only in the sense that finding any arrowing ordering suffices.
fn some_ordering_arrows(n: usize, targets: &[EdgeOrderedGraph]) -> Result<bool, ArrowsError> {
    let m = binom2(n);
    if m > RAMSEY_MAX_HOST_EDGES {
        return Err(ArrowsError::HostEnumerationInfeasible { n, m });
    }
    let base = EdgeOrderedGraph::lex_complete(n);
    let mut found = false;
    permute_orderings(base.edges(), &mut |edges| {
        if found {
            return Ok(());
        }
        let host = EdgeOrderedGraph::from_ranked_edges(n, edges.to_vec())
            .expect("permutation of complete graph");
        if !is_canonical_ordering(&host) {
            return Ok(());
        }
        if matches!(
            backtrack_search(&host, targets, None)?,
            ArrowsOutcome::Arrows
        ) {
            found = true;
        }
        Ok(())
    })?;
    Ok(found)
}

/// Heap's algorithm over edge sequences, calling `f` on each permutation.
fn permute_orderings(
    edges: &[(usize, usize)],
    f: &mut impl FnMut(&[(usize, usize)]) -> Result<(), ArrowsError>,
) -> Result<(), ArrowsError> {
    let mut work = edges.to_vec();
    let m = work.len();
    let mut c = vec![0usize; m];
    f(&work)?;
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                work.swap(0, i);
            } else {
                work.swap(c[i], i);
            }
            f(&work)?;
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompositionReport {
    /// F arrows G with s colors.
    pub hypothesis_fg: ArrowsOutcome,
    /// G arrows H with r colors.
    pub hypothesis_gh: ArrowsOutcome,
    /// F arrows H with r*s colors.
    pub conclusion_fh: ArrowsOutcome,
    /// All three relations verified to arrow.
    pub all_verified: bool,
    /// Hypotheses holding forces the conclusion; false would contradict the
    /// composition fact and indicates a bug.
    pub implication_consistent: bool,
}

/// Test harness for the composition fact on concrete instances.
pub fn verify_composition(
    f_host: &EdgeOrderedGraph,
    g_host: &EdgeOrderedGraph,
    h_pattern: &EdgeOrderedGraph,
    r: u32,
    s: u32,
    budget: Option<u64>,
) -> Result<CompositionReport, ArrowsError> {
    let opts = ArrowsOptions {
        mode: ArrowsMode::Backtrack,
        budget,
        ..Default::default()
    };
    let g_targets: Vec<_> = (0..s).map(|_| g_host.clone()).collect();
    let h_targets_r: Vec<_> = (0..r).map(|_| h_pattern.clone()).collect();
    let h_targets_rs: Vec<_> = (0..r * s).map(|_| h_pattern.clone()).collect();

    let hypothesis_fg = arrows(f_host, &g_targets, &opts)?;
    let hypothesis_gh = arrows(g_host, &h_targets_r, &opts)?;
    let conclusion_fh = arrows(f_host, &h_targets_rs, &opts)?;

    let all_verified = [&hypothesis_fg, &hypothesis_gh, &conclusion_fh]
        .iter()
        .all(|o| matches!(o, ArrowsOutcome::Arrows));
    let hypotheses_hold = matches!(hypothesis_fg, ArrowsOutcome::Arrows)
        && matches!(hypothesis_gh, ArrowsOutcome::Arrows);
    let implication_consistent =
        !hypotheses_hold || matches!(conclusion_fh, ArrowsOutcome::Arrows);

    Ok(CompositionReport {
        hypothesis_fg,
        hypothesis_gh,
        conclusion_fh,
        all_verified,
        implication_consistent,
    })
}
