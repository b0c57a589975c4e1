//! Equivalence of edge-ordered graphs: two graphs are equivalent when some
//! vertex bijection maps the rank-k edge of one to the rank-k edge of the
//! other for every k. Includes a canonical representative per class and class
//! counting for small complete graphs.

use itertools::Itertools;
use thiserror::Error;

use crate::graph::{binom2, EdgeOrderedGraph, Vertex};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ClassCountError {
    #[error("class counting requires 2 <= n <= {max}, got {n}")]
    InfeasibleSize { n: usize, max: usize },
}

/// Largest n for which `count_equivalence_classes` is supported.
pub const CLASS_COUNT_MAX_N: usize = 5;

/// Decide equivalence by backtracking over vertex bijections. The rank-k edge
/// must map to the rank-k edge, so the search unifies endpoints edge by edge
/// in rank order; isolated vertices are unconstrained and only the vertex
/// counts must agree.
pub fn are_equivalent(a: &EdgeOrderedGraph, b: &EdgeOrderedGraph) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let n = a.vertex_count();
    let mut fwd: Vec<Option<Vertex>> = vec![None; n];
    let mut bwd: Vec<Option<Vertex>> = vec![None; n];
    unify(a, b, 0, &mut fwd, &mut bwd)
}

fn unify(
    a: &EdgeOrderedGraph,
    b: &EdgeOrderedGraph,
    k: usize,
    fwd: &mut [Option<Vertex>],
    bwd: &mut [Option<Vertex>],
) -> bool {
    if k == a.edge_count() {
        return true;
    }
    let (a1, a2) = a.edges()[k];
    let (b1, b2) = b.edges()[k];
    for (x, y) in [(b1, b2), (b2, b1)] {
        let mut touched = Vec::with_capacity(2);
        if try_bind(a1, x, fwd, bwd, &mut touched) && try_bind(a2, y, fwd, bwd, &mut touched) {
            if unify(a, b, k + 1, fwd, bwd) {
                return true;
            }
        }
        for v in touched {
            let img = fwd[v].take().expect("bound");
            bwd[img] = None;
        }
    }
    false
}

fn try_bind(
    v: Vertex,
    img: Vertex,
    fwd: &mut [Option<Vertex>],
    bwd: &mut [Option<Vertex>],
    touched: &mut Vec<Vertex>,
) -> bool {
    match (fwd[v], bwd[img]) {
        (Some(cur), _) => cur == img,
        (None, Some(_)) => false,
        (None, None) => {
            fwd[v] = Some(img);
            bwd[img] = Some(v);
            touched.push(v);
            true
        }
    }
}

/// Deterministic class representative: the lexicographically least edge list
/// (in rank order) over all vertex relabelings. Exponential in the vertex
/// count; intended for pattern graphs, not hosts.
pub fn canonical_form(g: &EdgeOrderedGraph) -> EdgeOrderedGraph {
    let n = g.vertex_count();
    if n == 0 || g.edge_count() == 0 {
        return g.clone();
    }
    let mut best: Option<Vec<(Vertex, Vertex)>> = None;
    let mut perm = vec![0usize; n];
    for p in (0..n).permutations(n) {
        perm.copy_from_slice(&p);
        let candidate = relabeled_edge_list(g, &perm, best.as_deref());
        if let Some(c) = candidate {
            best = Some(c);
        }
    }
    EdgeOrderedGraph::from_ranked_edges(n, best.expect("nonempty edge set"))
        .expect("relabeling of valid graph")
}

/// Edge list under `perm`, or None as soon as it compares >= the current best.
fn relabeled_edge_list(
    g: &EdgeOrderedGraph,
    perm: &[Vertex],
    best: Option<&[(Vertex, Vertex)]>,
) -> Option<Vec<(Vertex, Vertex)>> {
    let mut out = Vec::with_capacity(g.edge_count());
    let mut strictly_less = best.is_none();
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        let (a, b) = (perm[u].min(perm[v]), perm[u].max(perm[v]));
        if !strictly_less {
            let cur = best.expect("checked")[k];
            if (a, b) > cur {
                return None;
            }
            if (a, b) < cur {
                strictly_less = true;
            }
        }
        out.push((a, b));
    }
    strictly_less.then_some(out)
}

/// True when the graph equals its own canonical form, i.e. no vertex
/// relabeling yields a lexicographically smaller edge list. Cheaper than
/// computing the canonical form: most relabelings diverge immediately.
pub fn is_canonical_ordering(g: &EdgeOrderedGraph) -> bool {
    let n = g.vertex_count();
    if g.edge_count() == 0 {
        return true;
    }
    let own = g.edges();
    for p in (0..n).permutations(n) {
        if relabeled_edge_list(g, &p, Some(own)).is_some() {
            return false;
        }
    }
    true
}

/// Number of equivalence classes of edge-orderings of the complete graph K_n,
/// by Burnside's lemma over the vertex-permutation action on orderings: a
/// non-trivially-acting permutation fixes no ordering, so the class count is
/// `(#kernel) * C(n,2)! / n!`.
pub fn count_equivalence_classes(n: usize) -> Result<u64, ClassCountError> {
    if !(2..=CLASS_COUNT_MAX_N).contains(&n) {
        return Err(ClassCountError::InfeasibleSize {
            n,
            max: CLASS_COUNT_MAX_N,
        });
    }
    let m = binom2(n);
    // index edges of K_n
    let mut edge_index = std::collections::HashMap::new();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            edge_index.insert((u, v), edges.len());
            edges.push((u, v));
        }
    }
    let mut fixed_sum: u64 = 0;
    let mut group = 0u64;
    for p in (0..n).permutations(n) {
        group += 1;
        let acts_trivially = edges.iter().enumerate().all(|(i, &(u, v))| {
            let (a, b) = (p[u].min(p[v]), p[u].max(p[v]));
            edge_index[&(a, b)] == i
        });
        if acts_trivially {
            fixed_sum += factorial(m);
        }
    }
    assert_eq!(fixed_sum % group, 0, "Burnside sum must divide evenly");
    Ok(fixed_sum / group)
}

fn factorial(k: usize) -> u64 {
    (1..=k as u64).product()
}
