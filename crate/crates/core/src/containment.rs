//! Order-preserving and label-preserving subgraph search: the executable
//! meaning of "the host contains a copy of the pattern".
//!
//! A copy of an edge-ordered pattern is an injective vertex map under which
//! every pattern edge is a host edge and the host ranks of the mapped edges
//! are order-isomorphic to the pattern ranks. The search places pattern
//! vertices in degeneracy order, tries host candidates in ascending id order,
//! and prunes with rank windows: once some pattern edges are mapped, the host
//! rank of each newly mapped edge must fall strictly between the host ranks of
//! its nearest mapped neighbors in pattern-rank order.

use thiserror::Error;

use crate::graph::{Coloring, EdgeLabeledGraph, EdgeOrderedGraph, EmbeddingMap, Vertex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    node_limit: u64,
    time_hint_secs: Option<u64>,
}

impl SearchBudget {
    pub fn new(node_limit: u64) -> Self {
        assert!(node_limit > 0, "budget must be positive");
        Self {
            node_limit,
            time_hint_secs: None,
        }
    }

    pub fn with_time_hint(mut self, secs: u64) -> Self {
        assert!(secs > 0, "time hint must be positive");
        self.time_hint_secs = Some(secs);
        self
    }

    pub fn node_limit(&self) -> u64 {
        self.node_limit
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SearchOutcome {
    Found(EmbeddingMap),
    /// The whole search space was exhausted without finding a copy.
    NotFound,
    /// The budget ran out first; never conflated with `NotFound`.
    BudgetExhausted,
}

impl SearchOutcome {
    pub fn found(&self) -> Option<&EmbeddingMap> {
        match self {
            SearchOutcome::Found(m) => Some(m),
            _ => None,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ContainmentError {
    #[error("coloring covers {0} ranks but host has {1} edges")]
    ColoringMismatch(usize, usize),
    #[error("color {0} outside 1..={1}")]
    ColorOutOfRange(u32, u32),
    #[error("pattern label {0} outside host universe 1..={1}")]
    PatternLabelOutsideUniverse(usize, usize),
}

struct NodeCounter {
    used: u64,
    limit: Option<u64>,
    deadline: Option<std::time::Instant>,
}

impl NodeCounter {
    fn new(budget: Option<&SearchBudget>) -> Self {
        Self {
            used: 0,
            limit: budget.map(|b| b.node_limit),
            deadline: budget
                .and_then(|b| b.time_hint_secs)
                .map(|s| std::time::Instant::now() + std::time::Duration::from_secs(s)),
        }
    }

    /// Returns false when the budget is exhausted.
    fn tick(&mut self) -> bool {
        self.used += 1;
        if let Some(limit) = self.limit {
            if self.used > limit {
                return false;
            }
        }
        if let Some(deadline) = self.deadline {
            if self.used % 8192 == 0 && std::time::Instant::now() > deadline {
                return false;
            }
        }
        true
    }
}

/// Pattern preprocessed for vertex-at-a-time search.
struct PatternPlan {
    /// order[t] = original pattern vertex placed at step t
    order: Vec<Vertex>,
    /// back_edges[t] = (earlier step, pattern rank) pairs for edges from
    /// order[t] to already-placed vertices
    back_edges: Vec<Vec<(usize, usize)>>,
    edge_count: usize,
}

fn plan(pattern_n: usize, pattern_edges: &[(Vertex, Vertex)], order: Vec<Vertex>) -> PatternPlan {
    let mut step_of = vec![0usize; pattern_n];
    for (t, &v) in order.iter().enumerate() {
        step_of[v] = t;
    }
    let mut back_edges = vec![Vec::new(); pattern_n];
    for (k, &(u, v)) in pattern_edges.iter().enumerate() {
        let (su, sv) = (step_of[u], step_of[v]);
        let (early, late) = (su.min(sv), su.max(sv));
        back_edges[late].push((early, k + 1));
    }
    PatternPlan {
        order,
        back_edges,
        edge_count: pattern_edges.len(),
    }
}

/// Strictly-between window check against the nearest assigned pattern ranks.
/// `assign` is indexed by pattern rank - 1 and holds host ranks; the partial
/// assignment is kept order-isomorphic at all times, so the nearest assigned
/// entries bound all others.
fn window_ok(assign: &[Option<usize>], pattern_rank: usize, host_rank: usize) -> bool {
    for below in assign[..pattern_rank - 1].iter().rev().flatten() {
        if *below >= host_rank {
            return false;
        }
        break;
    }
    for above in assign[pattern_rank..].iter().flatten() {
        if *above <= host_rank {
            return false;
        }
        break;
    }
    true
}

struct OrderedSearch<'a> {
    host: &'a EdgeOrderedGraph,
    color_filter: Option<(&'a Coloring, u32)>,
    plan: PatternPlan,
    assigned: Vec<Option<Vertex>>,
    used: Vec<bool>,
    rank_assign: Vec<Option<usize>>,
    counter: NodeCounter,
}

impl<'a> OrderedSearch<'a> {
    fn run(&mut self) -> SearchOutcome {
        match self.place(0) {
            Some(true) => {
                let n = self.plan.order.len();
                let mut map = vec![0; n];
                for t in 0..n {
                    map[self.plan.order[t]] = self.assigned[t].expect("placed");
                }
                SearchOutcome::Found(EmbeddingMap::new(map).expect("search map is injective"))
            }
            Some(false) => SearchOutcome::NotFound,
            None => SearchOutcome::BudgetExhausted,
        }
    }

    /// Some(true) found, Some(false) exhausted subtree, None budget.
    fn place(&mut self, t: usize) -> Option<bool> {
        if t == self.plan.order.len() {
            return Some(true);
        }
        for cand in 0..self.host.vertex_count() {
            if self.used[cand] {
                continue;
            }
            if !self.counter.tick() {
                return None;
            }
            let mut added: Vec<usize> = Vec::new();
            let mut ok = true;
            for &(early, prank) in &self.plan.back_edges[t] {
                let other = self.assigned[early].expect("earlier step placed");
                let host_rank = match self.host.rank_of(cand, other) {
                    Some(r) => r,
                    None => {
                        ok = false;
                        break;
                    }
                };
                if let Some((coloring, color)) = self.color_filter {
                    if coloring.color_of(host_rank) != color {
                        ok = false;
                        break;
                    }
                }
                if !window_ok(&self.rank_assign, prank, host_rank) {
                    ok = false;
                    break;
                }
                self.rank_assign[prank - 1] = Some(host_rank);
                added.push(prank);
            }
            if ok {
                self.assigned[t] = Some(cand);
                self.used[cand] = true;
                match self.place(t + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
                self.assigned[t] = None;
                self.used[cand] = false;
            }
            for prank in added {
                self.rank_assign[prank - 1] = None;
            }
        }
        Some(false)
    }
}

fn ordered_search(
    host: &EdgeOrderedGraph,
    color_filter: Option<(&Coloring, u32)>,
    pattern: &EdgeOrderedGraph,
    budget: Option<&SearchBudget>,
) -> SearchOutcome {
    if pattern.vertex_count() > host.vertex_count() {
        return SearchOutcome::NotFound;
    }
    let (_, order) = pattern.degeneracy_order();
    let plan = plan(pattern.vertex_count(), pattern.edges(), order);
    let mut search = OrderedSearch {
        host,
        color_filter,
        assigned: vec![None; plan.order.len()],
        used: vec![false; host.vertex_count()],
        rank_assign: vec![None; plan.edge_count],
        counter: NodeCounter::new(budget),
        plan,
    };
    search.run()
}

/// Find a copy of the edge-ordered pattern in the edge-ordered host.
pub fn find_copy(
    host: &EdgeOrderedGraph,
    pattern: &EdgeOrderedGraph,
    budget: Option<&SearchBudget>,
) -> SearchOutcome {
    ordered_search(host, None, pattern, budget)
}

/// Find a copy whose image edges all carry `color` under the given coloring.
pub fn find_monochromatic_copy(
    host: &EdgeOrderedGraph,
    coloring: &Coloring,
    pattern: &EdgeOrderedGraph,
    color: u32,
    budget: Option<&SearchBudget>,
) -> Result<SearchOutcome, ContainmentError> {
    if coloring.len() != host.edge_count() {
        return Err(ContainmentError::ColoringMismatch(
            coloring.len(),
            host.edge_count(),
        ));
    }
    if color == 0 || color > coloring.q() {
        return Err(ContainmentError::ColorOutOfRange(color, coloring.q()));
    }
    Ok(ordered_search(host, Some((coloring, color)), pattern, budget))
}

struct LabeledSearch<'a> {
    host: &'a EdgeLabeledGraph,
    pattern: &'a EdgeLabeledGraph,
    plan: PatternPlan,
    assigned: Vec<Option<Vertex>>,
    used: Vec<bool>,
    counter: NodeCounter,
}

impl<'a> LabeledSearch<'a> {
    fn place(&mut self, t: usize) -> Option<bool> {
        if t == self.plan.order.len() {
            return Some(true);
        }
        for cand in 0..self.host.vertex_count() {
            if self.used[cand] {
                continue;
            }
            if !self.counter.tick() {
                return None;
            }
            let ok = self.plan.back_edges[t].iter().all(|&(early, prank)| {
                let other = self.assigned[early].expect("earlier step placed");
                let want = self.pattern.edges()[prank - 1].2;
                self.host.label_of(cand, other) == Some(want)
            });
            if ok {
                self.assigned[t] = Some(cand);
                self.used[cand] = true;
                match self.place(t + 1) {
                    Some(true) => return Some(true),
                    Some(false) => {}
                    None => return None,
                }
                self.assigned[t] = None;
                self.used[cand] = false;
            }
        }
        Some(false)
    }
}

/// Find a copy of the edge-labeled pattern with exactly equal labels.
pub fn find_copy_labeled(
    host: &EdgeLabeledGraph,
    pattern: &EdgeLabeledGraph,
    budget: Option<&SearchBudget>,
) -> Result<SearchOutcome, ContainmentError> {
    for &(_, _, label) in pattern.edges() {
        if label > host.label_universe() {
            return Err(ContainmentError::PatternLabelOutsideUniverse(
                label,
                host.label_universe(),
            ));
        }
    }
    if pattern.vertex_count() > host.vertex_count() {
        return Ok(SearchOutcome::NotFound);
    }
    let underlying = crate::graph::Graph::from_edges(
        pattern.vertex_count(),
        &pattern
            .edges()
            .iter()
            .map(|&(u, v, _)| (u, v))
            .collect::<Vec<_>>(),
    );
    let (_, order) = crate::graph::degeneracy_order(&underlying);
    let pattern_pairs: Vec<(Vertex, Vertex)> =
        pattern.edges().iter().map(|&(u, v, _)| (u, v)).collect();
    let plan = plan(pattern.vertex_count(), &pattern_pairs, order);
    let mut search = LabeledSearch {
        host,
        pattern,
        assigned: vec![None; plan.order.len()],
        used: vec![false; host.vertex_count()],
        counter: NodeCounter::new(budget),
        plan,
    };
    match search.place(0) {
        Some(true) => {
            let n = search.plan.order.len();
            let mut map = vec![0; n];
            for t in 0..n {
                map[search.plan.order[t]] = search.assigned[t].expect("placed");
            }
            Ok(SearchOutcome::Found(
                EmbeddingMap::new(map).expect("search map is injective"),
            ))
        }
        Some(false) => Ok(SearchOutcome::NotFound),
        None => Ok(SearchOutcome::BudgetExhausted),
    }
}

/// Independent verifier for ordered embeddings: edge existence, injectivity,
/// rank order-isomorphism, and the optional color constraint. Used on every
/// search output in tests and on every certificate.
pub fn verify_ordered_embedding(
    host: &EdgeOrderedGraph,
    pattern: &EdgeOrderedGraph,
    map: &EmbeddingMap,
    color_filter: Option<(&Coloring, u32)>,
) -> Result<(), String> {
    if map.len() != pattern.vertex_count() {
        return Err(format!(
            "map covers {} vertices, pattern has {}",
            map.len(),
            pattern.vertex_count()
        ));
    }
    let mut host_ranks = Vec::with_capacity(pattern.edge_count());
    for &(u, v) in pattern.edges() {
        let (hu, hv) = (map.image_of(u), map.image_of(v));
        let rank = host
            .rank_of(hu, hv)
            .ok_or_else(|| format!("missing host edge ({hu}, {hv})"))?;
        if let Some((coloring, color)) = color_filter {
            let got = coloring.color_of(rank);
            if got != color {
                return Err(format!("edge rank {rank} has color {got}, wanted {color}"));
            }
        }
        host_ranks.push(rank);
    }
    if !host_ranks.windows(2).all(|w| w[0] < w[1]) {
        return Err(format!("host ranks {host_ranks:?} not order-isomorphic"));
    }
    Ok(())
}

pub fn verify_labeled_embedding(
    host: &EdgeLabeledGraph,
    pattern: &EdgeLabeledGraph,
    map: &EmbeddingMap,
) -> Result<(), String> {
    if map.len() != pattern.vertex_count() {
        return Err(format!(
            "map covers {} vertices, pattern has {}",
            map.len(),
            pattern.vertex_count()
        ));
    }
    for &(u, v, label) in pattern.edges() {
        let (hu, hv) = (map.image_of(u), map.image_of(v));
        match host.label_of(hu, hv) {
            Some(got) if got == label => {}
            Some(got) => return Err(format!("edge ({hu}, {hv}) labeled {got}, wanted {label}")),
            None => return Err(format!("missing host edge ({hu}, {hv})")),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeOrderedGraph;
    use itertools::Itertools;

    /// Exhaustive oracle over all injective vertex maps.
    fn brute_force_has_copy(host: &EdgeOrderedGraph, pattern: &EdgeOrderedGraph) -> bool {
        let (n, np) = (host.vertex_count(), pattern.vertex_count());
        if np > n {
            return false;
        }
        (0..n).permutations(np).any(|map| {
            let em = EmbeddingMap::new(map).unwrap();
            verify_ordered_embedding(host, pattern, &em, None).is_ok()
        })
    }

    #[test]
    fn lex_k3_in_lex_k4() {
        let host = EdgeOrderedGraph::lex_complete(4);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let out = find_copy(&host, &pattern, None);
        let m = out.found().expect("copy exists");
        verify_ordered_embedding(&host, &pattern, m, None).unwrap();
    }

    #[test]
    fn single_edge_pattern() {
        let pattern =
            EdgeOrderedGraph::from_ranked_edges(2, vec![(0, 1)]).unwrap();
        let host_with = EdgeOrderedGraph::from_ranked_edges(3, vec![(1, 2)]).unwrap();
        let host_without = EdgeOrderedGraph::from_ranked_edges(3, vec![]).unwrap();
        assert!(find_copy(&host_with, &pattern, None).found().is_some());
        assert_eq!(find_copy(&host_without, &pattern, None), SearchOutcome::NotFound);
    }

    #[test]
    fn any_ordered_triangle_found_in_triangle() {
        // all edge-ordered triangles are equivalent, so any ordering embeds
        let host =
            EdgeOrderedGraph::new(3, vec![(0, 1, 2), (1, 2, 3), (0, 2, 1)]).unwrap();
        let pattern = EdgeOrderedGraph::lex_complete(3);
        assert!(find_copy(&host, &pattern, None).found().is_some());
    }

    #[test]
    fn agrees_with_brute_force_on_random_instances() {
        use crate::prng::SeededRng;
        let mut rng = SeededRng::new(42);
        for trial in 0..60 {
            let n = 5 + (trial % 5); // hosts up to 9 vertices
            let m_max = crate::graph::binom2(n);
            let edge_target = (rng.below(m_max as u64) + 1) as usize;
            let mut pairs = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    pairs.push((u, v));
                }
            }
            rng.shuffle(&mut pairs);
            pairs.truncate(edge_target);
            let host = EdgeOrderedGraph::from_ranked_edges(n, pairs).unwrap();

            let pat_n = 3 + (trial % 2);
            let mut pat_pairs = Vec::new();
            for u in 0..pat_n {
                for v in u + 1..pat_n {
                    pat_pairs.push((u, v));
                }
            }
            rng.shuffle(&mut pat_pairs);
            pat_pairs.truncate((rng.below(pat_pairs.len() as u64) + 1) as usize);
            let pattern = EdgeOrderedGraph::from_ranked_edges(pat_n, pat_pairs).unwrap();

            let got = find_copy(&host, &pattern, None);
            let want = brute_force_has_copy(&host, &pattern);
            assert_eq!(got.found().is_some(), want, "trial {trial}");
            if let Some(m) = got.found() {
                verify_ordered_embedding(&host, &pattern, m, None).unwrap();
            }
        }
    }

    #[test]
    fn budget_exhaustion_is_distinct() {
        let host = EdgeOrderedGraph::lex_complete(7);
        // pattern = reversed-lex K4; force a search with more than 1 node
        let k4 = EdgeOrderedGraph::lex_complete(4);
        let reversed = EdgeOrderedGraph::from_ranked_edges(
            4,
            k4.edges().iter().rev().copied().collect(),
        )
        .unwrap();
        let out = find_copy(&host, &reversed, Some(&SearchBudget::new(1)));
        assert_eq!(out, SearchOutcome::BudgetExhausted);
    }

    #[test]
    fn labeled_exact_match_required() {
        let host = EdgeLabeledGraph::new(2, 5, vec![(0, 1, 5)]).unwrap();
        let pat5 = EdgeLabeledGraph::new(2, 5, vec![(0, 1, 5)]).unwrap();
        let pat4 = EdgeLabeledGraph::new(2, 5, vec![(0, 1, 4)]).unwrap();
        assert!(find_copy_labeled(&host, &pat5, None).unwrap().found().is_some());
        assert_eq!(
            find_copy_labeled(&host, &pat4, None).unwrap(),
            SearchOutcome::NotFound
        );
    }

    #[test]
    fn labeled_k3_in_constant_k4() {
        let mut edges = Vec::new();
        for u in 0..4usize {
            for v in u + 1..4 {
                edges.push((u, v, 1));
            }
        }
        let host = EdgeLabeledGraph::new(4, 1, edges).unwrap();
        let pattern =
            EdgeLabeledGraph::new(3, 1, vec![(0, 1, 1), (1, 2, 1), (0, 2, 1)]).unwrap();
        let out = find_copy_labeled(&host, &pattern, None).unwrap();
        verify_labeled_embedding(&host, &pattern, out.found().unwrap()).unwrap();
    }

    #[test]
    fn monochromatic_search_respects_colors() {
        let host = EdgeOrderedGraph::lex_complete(3);
        let pattern = EdgeOrderedGraph::lex_complete(3);
        let all_red = Coloring::constant(2, 1, 3);
        let red = find_monochromatic_copy(&host, &all_red, &pattern, 1, None).unwrap();
        assert!(red.found().is_some());
        let blue = find_monochromatic_copy(&host, &all_red, &pattern, 2, None).unwrap();
        assert_eq!(blue, SearchOutcome::NotFound);
    }

    #[test]
    fn monochromatic_agrees_with_triangle_enumeration() {
        // lex K6 with two overlapping monochromatic triangles: color the edges
        // inside {0,1,2} red, everything else blue
        let host = EdgeOrderedGraph::lex_complete(6);
        let colors: Vec<u32> = (1..=host.edge_count())
            .map(|rank| {
                let (u, v) = host.edge_with_rank(rank);
                if u < 3 && v < 3 {
                    1
                } else {
                    2
                }
            })
            .collect();
        let coloring = Coloring::new(2, colors).unwrap();
        let pattern = EdgeOrderedGraph::lex_complete(3);

        // oracle: enumerate all C(6,3) vertex triples per color
        for color in [1u32, 2] {
            let mut oracle = false;
            for a in 0..6 {
                for b in a + 1..6 {
                    for c in b + 1..6 {
                        let ranks = [
                            host.rank_of(a, b).unwrap(),
                            host.rank_of(a, c).unwrap(),
                            host.rank_of(b, c).unwrap(),
                        ];
                        if ranks.iter().all(|&r| coloring.color_of(r) == color) {
                            oracle = true;
                        }
                    }
                }
            }
            let got = find_monochromatic_copy(&host, &coloring, &pattern, color, None).unwrap();
            assert_eq!(got.found().is_some(), oracle, "color {color}");
        }
    }

    #[test]
    fn monotone_under_host_edge_deletion() {
        // if the full host has no copy, neither does any subgraph
        let host = EdgeOrderedGraph::new(
            5,
            vec![(0, 1, 1), (1, 2, 2), (2, 3, 3), (3, 4, 4), (0, 4, 5)],
        )
        .unwrap();
        let pattern = EdgeOrderedGraph::lex_complete(3);
        assert_eq!(find_copy(&host, &pattern, None), SearchOutcome::NotFound);
        let (sub, _) = host.filter_ranks(|rank| rank % 2 == 1);
        assert_eq!(find_copy(&sub, &pattern, None), SearchOutcome::NotFound);
    }
}
