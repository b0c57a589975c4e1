//! Random host generation and regularity checking.
//!
//! A pair of disjoint vertex sets (X, Y) is (α, ε)-regular in a graph when
//! every sub-pair (X', Y') with |X'| ≥ ε|X| and |Y'| ≥ ε|Y| has density
//! within ε of α (strictly). An edge-ordered complete graph is ε-regular when
//! for every interval I of length at least ε·C(N,2) and all vertex sets of
//! size at least εN the pair is (α_I, ε)-regular in the restriction to I.
//!
//! Exact certification enumerates the whole subset space and is size-gated;
//! sampled checks only ever report evidence. All verdicts use exact rational
//! arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{binom2, ratio, EdgeLabeledGraph, EdgeOrderedGraph, Graph, Interval, Vertex};
use crate::prng::SeededRng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegularityError {
    #[error("exact mode supports sides of at most {max} vertices, got {got}")]
    ExactSizeLimit { got: usize, max: usize },
    #[error("epsilon must lie in (0, 1)")]
    BadEpsilon,
    #[error("alpha must lie in (0, 1/2)")]
    BadAlpha,
    #[error("epsilon must lie in (0, alpha/5)")]
    EpsilonVsAlpha,
    #[error("vertex sets must be disjoint and nonempty")]
    BadSets,
    #[error("host too small: need 2*ceil(eps*N) <= N to draw disjoint sets")]
    HostTooSmall,
    #[error("not a cylinder partition: {0}")]
    NotAPartition(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityWitness {
    pub interval: Option<Interval>,
    pub x_subset: Vec<Vertex>,
    pub y_subset: Vec<Vertex>,
    pub density: BigRational,
}

/// Outcome of a regularity check. `certified` is only ever `Some` in exact
/// mode; a sampled report is evidence, never certification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityReport {
    pub epsilon: BigRational,
    pub exact: bool,
    pub samples: u64,
    pub violations: u64,
    pub worst_deviation: BigRational,
    pub worst_witness: Option<RegularityWitness>,
    pub certified: Option<bool>,
}

/// Smallest k with k >= value (and k >= 1) for a positive rational value.
fn ceil_at_least_one(value: &BigRational) -> usize {
    let k = value.ceil().to_integer();
    let k: usize = k.try_into().unwrap_or(0);
    k.max(1)
}

pub const EXACT_SIDE_LIMIT: usize = 16;

/// Check (α, ε)-regularity of the pair (X, Y) in `f`.
///
/// Exact mode enumerates every X' ⊆ X of admissible size; for each X' the
/// extreme densities over Y' of each size are attained by the highest- and
/// lowest-degree prefixes, so sorting degrees once per X' covers the whole
/// quantifier. Sampled mode draws boundary-size sub-pairs from per-sample
/// substreams.
pub fn pair_regularity_check(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    alpha: &BigRational,
    epsilon: &BigRational,
    mode: CheckMode,
) -> Result<RegularityReport, RegularityError> {
    check_disjoint_nonempty(x, y)?;
    if epsilon <= &BigRational::zero() || epsilon >= &BigRational::one() {
        return Err(RegularityError::BadEpsilon);
    }
    match mode {
        CheckMode::Exact => exact_pair_check(f, x, y, alpha, epsilon),
        CheckMode::Sampled { samples, seed } => {
            Ok(sampled_pair_check(f, x, y, alpha, epsilon, samples, seed))
        }
    }
}

fn check_disjoint_nonempty(x: &[Vertex], y: &[Vertex]) -> Result<(), RegularityError> {
    if x.is_empty() || y.is_empty() {
        return Err(RegularityError::BadSets);
    }
    let xs: std::collections::BTreeSet<_> = x.iter().collect();
    if x.len() != xs.len() || y.iter().any(|v| xs.contains(v)) {
        return Err(RegularityError::BadSets);
    }
    let ys: std::collections::BTreeSet<_> = y.iter().collect();
    if y.len() != ys.len() {
        return Err(RegularityError::BadSets);
    }
    Ok(())
}

fn exact_pair_check(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    alpha: &BigRational,
    epsilon: &BigRational,
) -> Result<RegularityReport, RegularityError> {
    let (nx, ny) = (x.len(), y.len());
    for side in [nx, ny] {
        if side > EXACT_SIDE_LIMIT {
            return Err(RegularityError::ExactSizeLimit {
                got: side,
                max: EXACT_SIDE_LIMIT,
            });
        }
    }
    let min_x = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(nx))));
    let min_y = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(ny))));

    // bipartite 0/1 rows: rows[i][j] = edge between x[i] and y[j]
    let rows: Vec<Vec<u8>> = x
        .iter()
        .map(|&xv| y.iter().map(|&yv| u8::from(f.has_edge(xv, yv))).collect())
        .collect();

    let mut samples = 0u64;
    let mut violations = 0u64;
    let mut worst_deviation = BigRational::zero();
    let mut worst_witness: Option<RegularityWitness> = None;

    for mask in 1u64..(1u64 << nx) {
        let x_size = mask.count_ones() as usize;
        if x_size < min_x {
            continue;
        }
        let mut degs: Vec<(usize, usize)> = (0..ny)
            .map(|j| {
                let d = (0..nx)
                    .filter(|&i| mask >> i & 1 == 1 && rows[i][j] == 1)
                    .count();
                (j, d)
            })
            .collect();
        degs.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        for k in min_y..=ny {
            for top in [true, false] {
                let picked = if top { &degs[..k] } else { &degs[ny - k..] };
                let e: usize = picked.iter().map(|&(_, d)| d).sum();
                let density = ratio(e as u64, (x_size * k) as u64);
                let deviation = (&density - alpha).abs();
                samples += 1;
                if &deviation >= epsilon {
                    violations += 1;
                }
                if deviation > worst_deviation {
                    worst_deviation = deviation;
                    worst_witness = Some(RegularityWitness {
                        interval: None,
                        x_subset: (0..nx).filter(|i| mask >> i & 1 == 1).map(|i| x[i]).collect(),
                        y_subset: picked.iter().map(|&(j, _)| y[j]).collect(),
                        density,
                    });
                }
            }
        }
    }

    Ok(RegularityReport {
        epsilon: epsilon.clone(),
        exact: true,
        samples,
        violations,
        worst_deviation,
        worst_witness,
        certified: Some(violations == 0),
    })
}

fn sampled_pair_check(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    alpha: &BigRational,
    epsilon: &BigRational,
    samples: u64,
    seed: u64,
) -> RegularityReport {
    let min_x = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(x.len()))));
    let min_y = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(y.len()))));

    let records: Vec<(BigRational, Vec<Vertex>, Vec<Vertex>, BigRational)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::substream(seed, i);
            let xs = rng.subset_of(x, min_x);
            let ys = rng.subset_of(y, min_y);
            let density = f.density(&xs, &ys);
            let deviation = (&density - alpha).abs();
            (deviation, xs, ys, density)
        })
        .collect();

    let mut violations = 0u64;
    let mut worst_deviation = BigRational::zero();
    let mut worst_witness = None;
    for (deviation, xs, ys, density) in records {
        if &deviation >= epsilon {
            violations += 1;
        }
        if deviation > worst_deviation {
            worst_deviation = deviation;
            worst_witness = Some(RegularityWitness {
                interval: None,
                x_subset: xs,
                y_subset: ys,
                density,
            });
        }
    }
    RegularityReport {
        epsilon: epsilon.clone(),
        exact: false,
        samples,
        violations,
        worst_deviation,
        worst_witness,
        certified: None,
    }
}

/// Complete graph on `n` vertices with labels drawn as a uniform permutation
/// of `1..=C(n,2)` under the seed. Identical output for identical seeds.
pub fn generate_random_host(n: usize, seed: u64) -> EdgeOrderedGraph {
    assert!(n >= 2, "need at least two vertices");
    let m = binom2(n);
    let mut rng = SeededRng::new(seed);
    let label_of_lex_edge = rng.permutation(m);
    let mut ranked: Vec<(Vertex, Vertex)> = vec![(0, 0); m];
    let mut idx = 0;
    for u in 0..n {
        for v in u + 1..n {
            ranked[label_of_lex_edge[idx]] = (u, v);
            idx += 1;
        }
    }
    EdgeOrderedGraph::from_ranked_edges(n, ranked).expect("complete host is valid")
}

/// Complete graph with i.i.d. uniform labels in `1..=l` per seed.
pub fn generate_labeled_host(n: usize, l: usize, seed: u64) -> EdgeLabeledGraph {
    assert!(n >= 2 && l >= 1);
    let mut rng = SeededRng::new(seed);
    let mut edges = Vec::with_capacity(binom2(n));
    for u in 0..n {
        for v in u + 1..n {
            edges.push((u, v, rng.below(l as u64) as usize + 1));
        }
    }
    EdgeLabeledGraph::new(n, l, edges).expect("complete host is valid")
}

/// Sample (interval, X, Y) triples from the host's regularity quantifier and
/// test |d_I(X, Y) - α_I| < ε exactly for each. The vertex sets are drawn at
/// the boundary size ceil(εN); intervals are uniform over all admissible
/// (length, position) pairs. Each sample uses its own substream, so the
/// report does not depend on scheduling.
pub fn check_host_regularity(
    g: &EdgeOrderedGraph,
    epsilon: &BigRational,
    samples: u64,
    seed: u64,
) -> Result<RegularityReport, RegularityError> {
    if epsilon <= &BigRational::zero() || epsilon >= &BigRational::one() {
        return Err(RegularityError::BadEpsilon);
    }
    let n = g.vertex_count();
    let m = g.edge_count();
    let s = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(n))));
    if 2 * s > n {
        return Err(RegularityError::HostTooSmall);
    }
    let min_len = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(m))));
    // admissible intervals grouped by length: length m-j+1 has j placements
    let max_j = (m - min_len + 1) as u64;
    let total_intervals = max_j * (max_j + 1) / 2;

    let all: Vec<Vertex> = (0..n).collect();
    let records: Vec<(BigRational, Interval, Vec<Vertex>, Vec<Vertex>, BigRational)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = SeededRng::substream(seed, i);
            let u = rng.below(total_intervals);
            let j = smallest_triangular_geq(u + 1);
            let placement = u - j * (j - 1) / 2;
            let len = m as u64 - j + 1;
            let lo = placement as usize + 1;
            let interval = Interval::new(lo, lo + len as usize - 1).expect("in range");

            let xs = rng.subset_of(&all, s);
            let xbits: std::collections::BTreeSet<Vertex> = xs.iter().copied().collect();
            let rest: Vec<Vertex> = all.iter().copied().filter(|v| !xbits.contains(v)).collect();
            let ys = rng.subset_of(&rest, s);

            let e: u64 = xs
                .iter()
                .map(|&xv| {
                    ys.iter()
                        .filter(|&&yv| g.rank_of(xv, yv).is_some_and(|r| interval.contains(r)))
                        .count() as u64
                })
                .sum();
            let density = ratio(e, (s * s) as u64);
            let alpha_i = ratio(len, binom2(n) as u64);
            let deviation = (&density - &alpha_i).abs();
            (deviation, interval, xs, ys, density)
        })
        .collect();

    let mut violations = 0u64;
    let mut worst_deviation = BigRational::zero();
    let mut worst_witness = None;
    for (deviation, interval, xs, ys, density) in records {
        if &deviation >= epsilon {
            violations += 1;
        }
        if deviation > worst_deviation {
            worst_deviation = deviation;
            worst_witness = Some(RegularityWitness {
                interval: Some(interval),
                x_subset: xs,
                y_subset: ys,
                density,
            });
        }
    }
    Ok(RegularityReport {
        epsilon: epsilon.clone(),
        exact: false,
        samples,
        violations,
        worst_deviation,
        worst_witness,
        certified: None,
    })
}

/// Smallest j with j(j+1)/2 >= target, for target >= 1.
fn smallest_triangular_geq(target: u64) -> u64 {
    let mut j = ((2.0 * target as f64).sqrt() as u64).saturating_sub(2);
    while j * (j + 1) / 2 < target {
        j += 1;
    }
    j
}

/// Exactly the x in X whose degree into Y leaves the closed range (α ± ε)|Y|.
pub fn degree_outliers(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    alpha: &BigRational,
    epsilon: &BigRational,
) -> Vec<Vertex> {
    let ybits = f.bitset_of(y);
    let ylen = BigRational::from(BigInt::from(y.len()));
    let lo = (alpha - epsilon) * &ylen;
    let hi = (alpha + epsilon) * &ylen;
    x.iter()
        .copied()
        .filter(|&v| {
            let d = BigRational::from(BigInt::from(f.deg_in(v, &ybits)));
            d < lo || d > hi
        })
        .collect()
}

/// Exact count of pairs (x, y) in X × Y whose codegree into Z leaves the
/// closed range (α² ± 2ε)|Z|. Requires α in (0, 1/2) and ε in (0, α/5).
pub fn codegree_outliers(
    f: &Graph,
    x: &[Vertex],
    y: &[Vertex],
    z: &[Vertex],
    alpha: &BigRational,
    epsilon: &BigRational,
) -> Result<u64, RegularityError> {
    let half = ratio(1, 2);
    if alpha <= &BigRational::zero() || alpha >= &half {
        return Err(RegularityError::BadAlpha);
    }
    let fifth = alpha / BigRational::from(BigInt::from(5));
    if epsilon <= &BigRational::zero() || epsilon >= &fifth {
        return Err(RegularityError::EpsilonVsAlpha);
    }
    let zbits = f.bitset_of(z);
    let zlen = BigRational::from(BigInt::from(z.len()));
    let two_eps = BigRational::from(BigInt::from(2)) * epsilon;
    let lo = (alpha * alpha - &two_eps) * &zlen;
    let hi = (alpha * alpha + &two_eps) * &zlen;
    let mut count = 0u64;
    for &xv in x {
        for &yv in y {
            let c = BigRational::from(BigInt::from(f.codeg_in(xv, yv, &zbits)));
            if c < lo || c > hi {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Exact label density e_l(U, W) / (|U| |W|) in an edge-labeled graph.
pub fn label_density(
    g: &EdgeLabeledGraph,
    label: usize,
    u: &[Vertex],
    w: &[Vertex],
) -> Result<BigRational, RegularityError> {
    check_disjoint_nonempty(u, w)?;
    let mut e = 0u64;
    for &uv in u {
        for &wv in w {
            if g.label_of(uv, wv) == Some(label) {
                e += 1;
            }
        }
    }
    Ok(ratio(e, (u.len() * w.len()) as u64))
}

/// A partition of the product V_1 × … × V_k into cylinders W_1 × … × W_k.
#[derive(Debug, Clone)]
pub struct CylinderPartition {
    parts: Vec<Vec<Vertex>>,
    cells: Vec<Vec<Vec<Vertex>>>,
}

impl CylinderPartition {
    /// Validates that the cells partition the full product: every side inside
    /// its part, total cardinality matching, and cells pairwise disjoint.
    pub fn new(
        parts: Vec<Vec<Vertex>>,
        cells: Vec<Vec<Vec<Vertex>>>,
    ) -> Result<Self, RegularityError> {
        let k = parts.len();
        if k == 0 {
            return Err(RegularityError::NotAPartition("no parts".into()));
        }
        let mut product: u128 = 1;
        for p in &parts {
            let set: std::collections::BTreeSet<_> = p.iter().collect();
            if set.len() != p.len() {
                return Err(RegularityError::NotAPartition(
                    "repeated vertex in part".into(),
                ));
            }
            product *= p.len() as u128;
        }
        let mut covered: u128 = 0;
        for cell in &cells {
            if cell.len() != k {
                return Err(RegularityError::NotAPartition("cell arity mismatch".into()));
            }
            let mut size: u128 = 1;
            for (side, part) in cell.iter().zip(&parts) {
                let part_set: std::collections::BTreeSet<_> = part.iter().collect();
                let side_set: std::collections::BTreeSet<_> = side.iter().collect();
                if side_set.len() != side.len() || !side.iter().all(|v| part_set.contains(v)) {
                    return Err(RegularityError::NotAPartition(
                        "cell side not a subset of its part".into(),
                    ));
                }
                size *= side.len() as u128;
            }
            covered += size;
        }
        if covered != product {
            return Err(RegularityError::NotAPartition(format!(
                "cells cover {covered} tuples of {product}"
            )));
        }
        for a in 0..cells.len() {
            for b in a + 1..cells.len() {
                if cells[a].iter().any(|s| s.is_empty()) || cells[b].iter().any(|s| s.is_empty()) {
                    continue;
                }
                let disjoint = (0..k).any(|i| {
                    let set: std::collections::BTreeSet<_> = cells[a][i].iter().collect();
                    cells[b][i].iter().all(|v| !set.contains(v))
                });
                if !disjoint {
                    return Err(RegularityError::NotAPartition(format!(
                        "cells {a} and {b} overlap"
                    )));
                }
            }
        }
        Ok(Self { parts, cells })
    }

    pub fn parts(&self) -> &[Vec<Vertex>] {
        &self.parts
    }

    pub fn cells(&self) -> &[Vec<Vec<Vertex>>] {
        &self.cells
    }
}

/// Weighted sum of squared color densities over the cells:
/// Σ_cells (Π|W_i| / Π|V_i|) Σ_{i<j} Σ_colors d_color(W_i, W_j)².
/// Lies in [0, C(k,2)]; refining a cell never decreases it.
pub fn cylinder_potential(
    colored: &[Graph],
    partition: &CylinderPartition,
) -> Result<BigRational, RegularityError> {
    let k = partition.parts.len();
    let mut denom = BigRational::one();
    for p in &partition.parts {
        if p.is_empty() {
            return Err(RegularityError::NotAPartition("empty part".into()));
        }
        denom *= BigRational::from(BigInt::from(p.len()));
    }
    let mut total = BigRational::zero();
    for cell in &partition.cells {
        if cell.iter().any(|s| s.is_empty()) {
            continue; // empty product set carries weight zero
        }
        let mut weight = BigRational::one();
        for side in cell {
            weight *= BigRational::from(BigInt::from(side.len()));
        }
        weight /= &denom;
        let mut inner = BigRational::zero();
        for i in 0..k {
            for j in i + 1..k {
                for f in colored {
                    let d = f.density(&cell[i], &cell[j]);
                    inner += &d * &d;
                }
            }
        }
        total += weight * inner;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn complete_bipartite(nx: usize, ny: usize) -> (Graph, Vec<usize>, Vec<usize>) {
        let n = nx + ny;
        let mut g = Graph::new(n);
        for i in 0..nx {
            for j in 0..ny {
                g.add_edge(i, nx + j);
            }
        }
        (g, (0..nx).collect(), (nx..n).collect())
    }

    #[test]
    fn complete_pair_is_regular_at_one() {
        let (g, x, y) = complete_bipartite(6, 6);
        let report =
            pair_regularity_check(&g, &x, &y, &ratio(1, 1), &ratio(1, 10), CheckMode::Exact)
                .unwrap();
        assert_eq!(report.certified, Some(true));
        assert_eq!(report.worst_deviation, BigRational::zero());
    }

    #[test]
    fn empty_pair_fails_at_half() {
        let g = Graph::new(12);
        let x: Vec<usize> = (0..6).collect();
        let y: Vec<usize> = (6..12).collect();
        let report =
            pair_regularity_check(&g, &x, &y, &ratio(1, 2), &ratio(1, 10), CheckMode::Exact)
                .unwrap();
        assert_eq!(report.certified, Some(false));
        assert_eq!(report.worst_deviation, ratio(1, 2));
        assert!(report.violations > 0);
        // the full pair (X, Y) itself is one of the violating witnesses
        let full = pair_regularity_check(&g, &x, &y, &ratio(1, 2), &ratio(1, 10), CheckMode::Exact)
            .unwrap();
        let w = full.worst_witness.unwrap();
        assert_eq!(w.density, BigRational::zero());
    }

    /// Full double-subset enumeration, the oracle for the prefix-suffix trick.
    fn brute_force_regular(
        g: &Graph,
        x: &[usize],
        y: &[usize],
        alpha: &BigRational,
        epsilon: &BigRational,
    ) -> bool {
        let min_x = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(x.len()))));
        let min_y = ceil_at_least_one(&(epsilon * BigRational::from(BigInt::from(y.len()))));
        for xm in 1u32..(1 << x.len()) {
            if (xm.count_ones() as usize) < min_x {
                continue;
            }
            let xs: Vec<usize> = (0..x.len())
                .filter(|i| xm >> i & 1 == 1)
                .map(|i| x[i])
                .collect();
            for ym in 1u32..(1 << y.len()) {
                if (ym.count_ones() as usize) < min_y {
                    continue;
                }
                let ys: Vec<usize> = (0..y.len())
                    .filter(|j| ym >> j & 1 == 1)
                    .map(|j| y[j])
                    .collect();
                if (&g.density(&xs, &ys) - alpha).abs() >= *epsilon {
                    return false;
                }
            }
        }
        true
    }

    #[test]
    fn exact_checker_matches_full_enumeration() {
        let mut rng = crate::prng::SeededRng::new(1234);
        for trial in 0..10 {
            let (nx, ny) = (7, 7);
            let mut g = Graph::new(nx + ny);
            for i in 0..nx {
                for j in 0..ny {
                    if rng.below(2) == 1 {
                        g.add_edge(i, nx + j);
                    }
                }
            }
            let x: Vec<usize> = (0..nx).collect();
            let y: Vec<usize> = (nx..nx + ny).collect();
            let alpha = ratio(1, 2);
            let eps = ratio(2 + trial % 3, 5);
            let report =
                pair_regularity_check(&g, &x, &y, &alpha, &eps, CheckMode::Exact).unwrap();
            let oracle = brute_force_regular(&g, &x, &y, &alpha, &eps);
            assert_eq!(report.certified, Some(oracle), "trial {trial}");
        }
    }

    #[test]
    fn exact_mode_size_gate() {
        let (g, x, y) = complete_bipartite(17, 4);
        let err = pair_regularity_check(&g, &x, &y, &ratio(1, 1), &ratio(1, 4), CheckMode::Exact)
            .unwrap_err();
        assert!(matches!(err, RegularityError::ExactSizeLimit { .. }));
    }

    #[test]
    fn random_host_deterministic() {
        let a = generate_random_host(12, 99);
        let b = generate_random_host(12, 99);
        assert_eq!(a, b);
        let c = generate_random_host(12, 100);
        assert_ne!(a, c);

        let tiny = generate_random_host(2, 5);
        assert_eq!(tiny.edges(), &[(0, 1)]);
    }

    #[test]
    fn random_host_label_position_uniformish() {
        // P(label of a fixed edge <= m/2) should be about 1/2
        let trials = 2000;
        let mut below = 0;
        for seed in 0..trials {
            let h = generate_random_host(10, seed);
            let m = h.edge_count();
            if h.rank_of(0, 1).unwrap() <= m / 2 {
                below += 1;
            }
        }
        let frac = below as f64 / trials as f64;
        assert!((frac - 0.5).abs() < 0.04, "got {frac}");
    }

    #[test]
    fn host_regularity_rejects_bad_epsilon() {
        let g = generate_random_host(8, 0);
        assert!(check_host_regularity(&g, &ratio(1, 1), 10, 0).is_err());
        assert!(check_host_regularity(&g, &ratio(3, 2), 10, 0).is_err());
    }

    #[test]
    fn host_regularity_flags_adversarial_host() {
        // first half of the labels form a clique on half the vertices
        let n = 16;
        let mut inside = Vec::new();
        let mut outside = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                if u < n / 2 && v < n / 2 {
                    inside.push((u, v));
                } else {
                    outside.push((u, v));
                }
            }
        }
        let ranked: Vec<(usize, usize)> = inside.into_iter().chain(outside).collect();
        let host = EdgeOrderedGraph::from_ranked_edges(n, ranked).unwrap();
        let report = check_host_regularity(&host, &ratio(1, 4), 400, 7).unwrap();
        assert!(report.violations > 0, "report: {report:?}");
    }

    #[test]
    fn host_regularity_deterministic_across_thread_counts() {
        let host = generate_random_host(32, 3);
        let r1 = check_host_regularity(&host, &ratio(1, 4), 100, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let r2 = pool.install(|| check_host_regularity(&host, &ratio(1, 4), 100, 5).unwrap());
        assert_eq!(r1, r2);
    }

    #[test]
    fn degree_outliers_edge_cases() {
        let (g, x, y) = complete_bipartite(5, 5);
        assert!(degree_outliers(&g, &x, &y, &ratio(1, 1), &ratio(1, 10)).is_empty());

        let empty = Graph::new(10);
        let out = degree_outliers(&empty, &x, &y, &ratio(1, 2), &ratio(1, 10));
        assert_eq!(out, x);
    }

    #[test]
    fn codegree_outliers_empty_graph_counts_all() {
        // codegree 0 is an outlier whenever α² - 2ε > 0
        let g = Graph::new(9);
        let x = vec![0, 1, 2];
        let y = vec![3, 4, 5];
        let z = vec![6, 7, 8];
        let alpha = ratio(2, 5);
        let eps = ratio(1, 20);
        assert_eq!(codegree_outliers(&g, &x, &y, &z, &alpha, &eps).unwrap(), 9);
    }

    #[test]
    fn codegree_preconditions() {
        let g = Graph::new(9);
        let x = vec![0, 1, 2];
        let y = vec![3, 4, 5];
        let z = vec![6, 7, 8];
        assert!(matches!(
            codegree_outliers(&g, &x, &y, &z, &ratio(9, 10), &ratio(1, 20)),
            Err(RegularityError::BadAlpha)
        ));
        assert!(matches!(
            codegree_outliers(&g, &x, &y, &z, &ratio(2, 5), &ratio(1, 2)),
            Err(RegularityError::EpsilonVsAlpha)
        ));
    }

    #[test]
    fn labeled_host_and_density() {
        let g = generate_labeled_host(10, 1, 3);
        assert!(g.edges().iter().all(|&(_, _, l)| l == 1));
        let u: Vec<usize> = (0..5).collect();
        let w: Vec<usize> = (5..10).collect();
        assert_eq!(label_density(&g, 1, &u, &w).unwrap(), ratio(1, 1));
        assert_eq!(
            label_density(&g, 1, &u, &u[..1].to_vec()).unwrap_err(),
            RegularityError::BadSets
        );

        assert_eq!(generate_labeled_host(30, 4, 9), generate_labeled_host(30, 4, 9));
        let zero = EdgeLabeledGraph::new(4, 3, vec![(0, 1, 1)]).unwrap();
        assert_eq!(label_density(&zero, 3, &[0, 1], &[2, 3]).unwrap(), ratio(0, 1));
    }

    #[test]
    fn potential_of_trivial_partition_is_squared_density() {
        // one cell, two parts, one color with bipartite density 3/4
        let mut g = Graph::new(4);
        g.add_edge(0, 2);
        g.add_edge(0, 3);
        g.add_edge(1, 2);
        let parts = vec![vec![0, 1], vec![2, 3]];
        let cells = vec![vec![vec![0, 1], vec![2, 3]]];
        let p = CylinderPartition::new(parts, cells).unwrap();
        let val = cylinder_potential(&[g], &p).unwrap();
        assert_eq!(val, ratio(9, 16));
    }

    #[test]
    fn potential_bounds_and_refinement_monotonicity() {
        let mut rng = crate::prng::SeededRng::new(77);
        for trial in 0..20 {
            let sizes = [3usize, 3, 2];
            let n: usize = sizes.iter().sum();
            let offs = [0usize, 3, 6];
            let q = 2;
            let mut graphs = vec![Graph::new(n), Graph::new(n)];
            for i in 0..3 {
                for j in i + 1..3 {
                    for a in 0..sizes[i] {
                        for b in 0..sizes[j] {
                            let color = rng.below(q + 1); // one extra option = no edge
                            if color < q {
                                graphs[color as usize].add_edge(offs[i] + a, offs[j] + b);
                            }
                        }
                    }
                }
            }
            let parts: Vec<Vec<usize>> = (0..3)
                .map(|i| (offs[i]..offs[i] + sizes[i]).collect())
                .collect();
            let trivial = CylinderPartition::new(parts.clone(), vec![parts.clone()]).unwrap();
            let base = cylinder_potential(&graphs, &trivial).unwrap();
            assert!(base >= BigRational::zero());
            assert!(base <= ratio(3, 1)); // C(3,2)

            // split part 0 of the single cell
            let refined = CylinderPartition::new(
                parts.clone(),
                vec![
                    vec![vec![parts[0][0]], parts[1].clone(), parts[2].clone()],
                    vec![parts[0][1..].to_vec(), parts[1].clone(), parts[2].clone()],
                ],
            )
            .unwrap();
            let val = cylinder_potential(&graphs, &refined).unwrap();
            assert!(val >= base, "trial {trial}: {val} < {base}");

            // permuting cells leaves the value unchanged
            let permuted = CylinderPartition::new(
                parts.clone(),
                vec![
                    vec![parts[0][1..].to_vec(), parts[1].clone(), parts[2].clone()],
                    vec![vec![parts[0][0]], parts[1].clone(), parts[2].clone()],
                ],
            )
            .unwrap();
            assert_eq!(cylinder_potential(&graphs, &permuted).unwrap(), val);

            // relabeling colors leaves the value unchanged
            let swapped = vec![graphs[1].clone(), graphs[0].clone()];
            assert_eq!(cylinder_potential(&swapped, &refined).unwrap(), val);
        }
    }

    #[test]
    fn partition_validation() {
        let parts = vec![vec![0, 1], vec![2]];
        let bad = CylinderPartition::new(
            parts.clone(),
            vec![vec![vec![0, 1], vec![2]], vec![vec![1], vec![2]]],
        );
        assert!(bad.is_err());
        let short = CylinderPartition::new(parts, vec![vec![vec![0], vec![2]]]);
        assert!(short.is_err());
    }

    #[test]
    fn density_splits_across_color_classes() {
        // d_I over the full host equals the sum over color-restricted subgraphs
        let host = generate_random_host(10, 4);
        let m = host.edge_count();
        let colors: Vec<u32> = (0..m).map(|k| (k % 3) as u32 + 1).collect();
        let interval = Interval::new(5, 30).unwrap();
        let x: Vec<usize> = (0..5).collect();
        let y: Vec<usize> = (5..10).collect();
        let full = host.restrict(interval).unwrap().density(&x, &y);
        let mut sum = BigRational::zero();
        for c in 1..=3u32 {
            let (sub, back) = host.filter_ranks(|r| colors[r - 1] == c);
            let mut g = Graph::new(10);
            for (idx, &(u, v)) in sub.edges().iter().enumerate() {
                if interval.contains(back[idx]) {
                    g.add_edge(u, v);
                }
            }
            sum += g.density(&x, &y);
        }
        assert_eq!(full, sum);
    }
}
