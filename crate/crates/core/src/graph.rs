//! Graph representations: edge-ordered, edge-labeled, vertex-ordered, and
//! plain unordered graphs, with the density accessors everything else builds on.
//!
//! Vertices are `0..n` internally; the text formats are 1-based. An
//! edge-ordering is stored as a rank labeling: the edge with rank `r`
//! (1-based) is `edges()[r-1]`. Ranks are always a permutation of `1..=m`;
//! constructors that accept arbitrary distinct labels normalize them to ranks,
//! preserving order.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;
use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

pub type Vertex = usize;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum GraphError {
    #[error("vertex id {0} out of range (n = {1})")]
    VertexOutOfRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("labels not a permutation of 1..={0}")]
    LabelsNotPermutation(usize),
    #[error("duplicate label {0}")]
    DuplicateLabel(i64),
    #[error("label {0} outside 1..={1}")]
    LabelOutOfRange(i64, usize),
    #[error("interval [{0}, {1}] invalid for rank range 1..={2}")]
    BadInterval(usize, usize, usize),
    #[error("coloring must assign each rank 1..={0} exactly once")]
    IncompleteColoring(usize),
    #[error("color {0} outside 1..={1}")]
    ColorOutOfRange(u32, u32),
}

pub fn binom2(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

pub fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Inclusive range of edge ranks, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: usize,
    hi: usize,
}

impl Interval {
    pub fn new(lo: usize, hi: usize) -> Result<Self, GraphError> {
        if lo == 0 || lo > hi {
            return Err(GraphError::BadInterval(lo, hi, usize::MAX));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> usize {
        self.lo
    }

    pub fn hi(&self) -> usize {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false // construction forbids lo > hi
    }

    pub fn contains(&self, rank: usize) -> bool {
        self.lo <= rank && rank <= self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    fn check_within(&self, m: usize) -> Result<(), GraphError> {
        if self.hi > m {
            return Err(GraphError::BadInterval(self.lo, self.hi, m));
        }
        Ok(())
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// Plain undirected graph backed by bitset adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    rows: Vec<FixedBitSet>,
    edge_count: usize,
}

fn and_count(a: &FixedBitSet, b: &FixedBitSet) -> usize {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x & y).count_ones() as usize)
        .sum()
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            rows: vec![FixedBitSet::with_capacity(n); n],
            edge_count: 0,
        }
    }

    pub fn from_edges(n: usize, edges: &[(Vertex, Vertex)]) -> Self {
        let mut g = Self::new(n);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn add_edge(&mut self, u: Vertex, v: Vertex) {
        assert!(u != v && u < self.n && v < self.n, "bad edge ({u}, {v})");
        if !self.rows[u].contains(v) {
            self.rows[u].insert(v);
            self.rows[v].insert(u);
            self.edge_count += 1;
        }
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n && v < self.n && self.rows[u].contains(v)
    }

    pub fn neighbors_row(&self, v: Vertex) -> &FixedBitSet {
        &self.rows[v]
    }

    pub fn deg(&self, v: Vertex) -> usize {
        self.rows[v].count_ones(..)
    }

    /// Number of neighbors of `v` inside the vertex set `within`.
    pub fn deg_in(&self, v: Vertex, within: &FixedBitSet) -> usize {
        and_count(&self.rows[v], within)
    }

    /// Number of common neighbors of `u` and `v` inside `within`.
    pub fn codeg_in(&self, u: Vertex, v: Vertex, within: &FixedBitSet) -> usize {
        self.rows[u]
            .as_slice()
            .iter()
            .zip(self.rows[v].as_slice())
            .zip(within.as_slice())
            .map(|((a, b), w)| (a & b & w).count_ones() as usize)
            .sum()
    }

    /// Ordered-pair edge count between disjoint vertex sets.
    pub fn edges_between(&self, a: &[Vertex], b_bits: &FixedBitSet) -> u64 {
        a.iter().map(|&x| self.deg_in(x, b_bits) as u64).sum()
    }

    /// Exact density e(A, B) / (|A| |B|). Panics on empty sides.
    pub fn density(&self, a: &[Vertex], b: &[Vertex]) -> BigRational {
        assert!(!a.is_empty() && !b.is_empty(), "density of empty set");
        let bb = self.bitset_of(b);
        let e = self.edges_between(a, &bb);
        ratio(e, (a.len() * b.len()) as u64)
    }

    pub fn bitset_of(&self, verts: &[Vertex]) -> FixedBitSet {
        let mut bits = FixedBitSet::with_capacity(self.n);
        for &v in verts {
            bits.insert(v);
        }
        bits
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        (0..self.n).flat_map(move |u| self.rows[u].ones().filter(move |&v| v > u).map(move |v| (u, v)))
    }
}

/// Degeneracy of a graph together with a witnessing vertex order: every vertex
/// has at most `d` neighbors earlier in the order. Ties in the repeated
/// minimum-degree removal are broken by smallest vertex id.
pub fn degeneracy_order(g: &Graph) -> (usize, Vec<Vertex>) {
    let n = g.vertex_count();
    let mut alive = vec![true; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.deg(v)).collect();
    let mut removal = Vec::with_capacity(n);
    let mut d = 0;
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (deg[v], v))
            .expect("nonempty");
        d = d.max(deg[v]);
        alive[v] = false;
        removal.push(v);
        for u in g.neighbors_row(v).ones() {
            if alive[u] {
                deg[u] -= 1;
            }
        }
    }
    removal.reverse();
    (d, removal)
}

enum RankTable {
    Dense(Vec<u32>),
    Sparse(HashMap<(u32, u32), u32>),
}

/// Graph with a total order on its edges, stored as ranks `1..=m`.
pub struct EdgeOrderedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>, // edges[k] has rank k+1, endpoints normalized u < v
    ranks: RankTable,
}

impl Clone for EdgeOrderedGraph {
    fn clone(&self) -> Self {
        Self::from_ranked_edges(self.n, self.edges.clone()).expect("clone of valid graph")
    }
}

impl std::fmt::Debug for EdgeOrderedGraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EdgeOrderedGraph")
            .field("n", &self.n)
            .field("edges", &self.edges)
            .finish()
    }
}

impl PartialEq for EdgeOrderedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.edges == other.edges
    }
}
impl Eq for EdgeOrderedGraph {}

const DENSE_LIMIT: usize = 6000;

impl EdgeOrderedGraph {
    /// Build from edges listed in rank order (rank of `edges[k]` is `k+1`).
    pub fn from_ranked_edges(
        n: usize,
        raw: Vec<(Vertex, Vertex)>,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(raw.len());
        for (u, v) in raw {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            edges.push((u.min(v), u.max(v)));
        }
        let ranks = if n <= DENSE_LIMIT {
            let mut table = vec![0u32; n * n];
            for (k, &(u, v)) in edges.iter().enumerate() {
                if table[u * n + v] != 0 {
                    return Err(GraphError::DuplicateEdge(u, v));
                }
                table[u * n + v] = (k + 1) as u32;
                table[v * n + u] = (k + 1) as u32;
            }
            RankTable::Dense(table)
        } else {
            let mut table = HashMap::with_capacity(edges.len());
            for (k, &(u, v)) in edges.iter().enumerate() {
                if table.insert((u as u32, v as u32), (k + 1) as u32).is_some() {
                    return Err(GraphError::DuplicateEdge(u, v));
                }
            }
            RankTable::Sparse(table)
        };
        Ok(Self { n, edges, ranks })
    }

    /// Build from `(u, v, label)` triples where labels are exactly `1..=m`.
    pub fn new(n: usize, labeled: Vec<(Vertex, Vertex, usize)>) -> Result<Self, GraphError> {
        let m = labeled.len();
        let mut slots: Vec<Option<(Vertex, Vertex)>> = vec![None; m];
        for (u, v, label) in labeled {
            if label == 0 || label > m {
                return Err(GraphError::LabelsNotPermutation(m));
            }
            if slots[label - 1].is_some() {
                return Err(GraphError::LabelsNotPermutation(m));
            }
            slots[label - 1] = Some((u, v));
        }
        let edges = slots.into_iter().map(|s| s.expect("all slots filled")).collect();
        Self::from_ranked_edges(n, edges)
    }

    /// Build from triples with arbitrary distinct labels, normalizing the
    /// labels to ranks `1..=m` preserving order.
    pub fn from_labeled_edges(
        n: usize,
        labeled: Vec<(Vertex, Vertex, i64)>,
    ) -> Result<Self, GraphError> {
        let mut order: Vec<usize> = (0..labeled.len()).collect();
        order.sort_by_key(|&i| labeled[i].2);
        for w in order.windows(2) {
            if labeled[w[0]].2 == labeled[w[1]].2 {
                return Err(GraphError::DuplicateLabel(labeled[w[0]].2));
            }
        }
        let edges = order.into_iter().map(|i| (labeled[i].0, labeled[i].1)).collect();
        Self::from_ranked_edges(n, edges)
    }

    /// Complete graph on `n` vertices ordered lexicographically by endpoint pair.
    pub fn lex_complete(n: usize) -> Self {
        let mut edges = Vec::with_capacity(binom2(n));
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        Self::from_ranked_edges(n, edges).expect("complete graph is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges in rank order; `edges()[k]` has rank `k+1`.
    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn edge_with_rank(&self, rank: usize) -> (Vertex, Vertex) {
        self.edges[rank - 1]
    }

    pub fn rank_of(&self, u: Vertex, v: Vertex) -> Option<usize> {
        if u >= self.n || v >= self.n || u == v {
            return None;
        }
        match &self.ranks {
            RankTable::Dense(t) => {
                let r = t[u * self.n + v];
                (r != 0).then_some(r as usize)
            }
            RankTable::Sparse(t) => {
                let key = (u.min(v) as u32, u.max(v) as u32);
                t.get(&key).map(|&r| r as usize)
            }
        }
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        self.rank_of(u, v).is_some()
    }

    pub fn full_interval(&self) -> Interval {
        Interval::new(1, self.edges.len().max(1)).expect("valid")
    }

    /// Unordered graph on the same vertices containing exactly the edges with
    /// rank in the interval.
    pub fn restrict(&self, interval: Interval) -> Result<Graph, GraphError> {
        interval.check_within(self.edges.len())?;
        let mut g = Graph::new(self.n);
        for rank in interval.lo()..=interval.hi() {
            let (u, v) = self.edges[rank - 1];
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn underlying(&self) -> Graph {
        Graph::from_edges(self.n, &self.edges)
    }

    /// Normalized interval length |I| / C(n, 2).
    pub fn interval_fraction(&self, interval: Interval) -> BigRational {
        ratio(interval.len() as u64, binom2(self.n) as u64)
    }

    /// Apply a vertex relabeling; `perm[old] = new`. Ranks are unchanged.
    pub fn relabel(&self, perm: &[Vertex]) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u], perm[v]))
            .collect();
        Self::from_ranked_edges(self.n, edges).expect("relabel of valid graph")
    }

    /// Keep the edges selected by `keep` (indexed by rank, 1-based), compacting
    /// ranks and preserving their order. Returns the subgraph plus the map from
    /// new rank to old rank.
    pub fn filter_ranks(&self, mut keep: impl FnMut(usize) -> bool) -> (Self, Vec<usize>) {
        let mut edges = Vec::new();
        let mut back = Vec::new();
        for rank in 1..=self.edges.len() {
            if keep(rank) {
                edges.push(self.edges[rank - 1]);
                back.push(rank);
            }
        }
        (
            Self::from_ranked_edges(self.n, edges).expect("subgraph of valid graph"),
            back,
        )
    }

    pub fn degeneracy_order(&self) -> (usize, Vec<Vertex>) {
        degeneracy_order(&self.underlying())
    }

    /// Relabel vertices so the identity order `0..n` is a degeneracy order.
    /// Returns the relabeled graph and `perm` with `perm[old] = new`.
    pub fn sorted_by_degeneracy(&self) -> (Self, Vec<Vertex>) {
        let (_, order) = self.degeneracy_order();
        let mut perm = vec![0; self.n];
        for (pos, &v) in order.iter().enumerate() {
            perm[v] = pos;
        }
        (self.relabel(&perm), perm)
    }

    /// True when the identity vertex order witnesses the graph's degeneracy.
    pub fn is_degeneracy_sorted(&self) -> bool {
        let (d, _) = self.degeneracy_order();
        let g = self.underlying();
        (0..self.n).all(|v| {
            let back = (0..v).filter(|&u| g.has_edge(u, v)).count();
            back <= d
        })
    }
}

/// A subgraph of an edge-ordered host that keeps the host's original ranks.
/// Used wherever an interval must keep referring to the host's label space
/// while only some edges (say, one color class) are present.
#[derive(Clone)]
pub struct OrderedSubgraph<'a> {
    host: &'a EdgeOrderedGraph,
    member: FixedBitSet, // indexed by rank - 1
}

impl<'a> OrderedSubgraph<'a> {
    pub fn full(host: &'a EdgeOrderedGraph) -> Self {
        let mut member = FixedBitSet::with_capacity(host.edge_count());
        member.insert_range(..);
        Self { host, member }
    }

    pub fn filtered(host: &'a EdgeOrderedGraph, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut member = FixedBitSet::with_capacity(host.edge_count());
        for rank in 1..=host.edge_count() {
            if keep(rank) {
                member.insert(rank - 1);
            }
        }
        Self { host, member }
    }

    /// Keep the edges whose color lies in the given set.
    pub fn from_colors(
        host: &'a EdgeOrderedGraph,
        coloring: &Coloring,
        colors: &std::collections::BTreeSet<u32>,
    ) -> Self {
        Self::filtered(host, |rank| colors.contains(&coloring.color_of(rank)))
    }

    pub fn host(&self) -> &'a EdgeOrderedGraph {
        self.host
    }

    pub fn vertex_count(&self) -> usize {
        self.host.vertex_count()
    }

    /// Rank range of the underlying host (not the member count).
    pub fn rank_range(&self) -> usize {
        self.host.edge_count()
    }

    pub fn member_count(&self) -> usize {
        self.member.count_ones(..)
    }

    pub fn contains_rank(&self, rank: usize) -> bool {
        rank >= 1 && rank <= self.host.edge_count() && self.member.contains(rank - 1)
    }

    /// Host rank of the edge, if present in the subgraph.
    pub fn rank_of(&self, u: Vertex, v: Vertex) -> Option<usize> {
        self.host
            .rank_of(u, v)
            .filter(|&r| self.member.contains(r - 1))
    }

    /// Plain graph of the member edges with rank in the interval.
    pub fn restrict(&self, interval: Interval) -> Result<Graph, GraphError> {
        interval.check_within(self.host.edge_count())?;
        let mut g = Graph::new(self.host.vertex_count());
        for rank in interval.lo()..=interval.hi() {
            if self.member.contains(rank - 1) {
                let (u, v) = self.host.edge_with_rank(rank);
                g.add_edge(u, v);
            }
        }
        Ok(g)
    }
}

/// Graph whose edges carry labels from a universe `1..=l`; labels may repeat.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeLabeledGraph {
    n: usize,
    l: usize,
    edges: Vec<(Vertex, Vertex, usize)>, // normalized u < v, sorted by (u, v)
}

impl EdgeLabeledGraph {
    pub fn new(
        n: usize,
        l: usize,
        raw: Vec<(Vertex, Vertex, usize)>,
    ) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(raw.len());
        for (u, v, label) in raw {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if label == 0 || label > l {
                return Err(GraphError::LabelOutOfRange(label as i64, l));
            }
            edges.push((u.min(v), u.max(v), label));
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        Ok(Self { n, l, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn label_universe(&self) -> usize {
        self.l
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(Vertex, Vertex, usize)] {
        &self.edges
    }

    pub fn label_of(&self, u: Vertex, v: Vertex) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges
            .binary_search_by_key(&key, |&(a, b, _)| (a, b))
            .ok()
            .map(|i| self.edges[i].2)
    }
}

/// Graph with a vertex order fixed as `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexOrderedGraph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>, // normalized u < v, sorted
}

impl VertexOrderedGraph {
    pub fn new(n: usize, raw: Vec<(Vertex, Vertex)>) -> Result<Self, GraphError> {
        let mut edges = Vec::with_capacity(raw.len());
        for (u, v) in raw {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            edges.push((u.min(v), u.max(v)));
        }
        edges.sort_unstable();
        for w in edges.windows(2) {
            if w[0] == w[1] {
                return Err(GraphError::DuplicateEdge(w[0].0, w[0].1));
            }
        }
        Ok(Self { n, edges })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Rank the edges lexicographically by `(min endpoint, max endpoint)`.
    pub fn lex_order(&self) -> EdgeOrderedGraph {
        EdgeOrderedGraph::from_ranked_edges(self.n, self.edges.clone())
            .expect("lex order of valid graph")
    }
}

/// Assignment of one of `q` colors to each edge rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coloring {
    q: u32,
    colors: Vec<u32>, // colors[k] is the color (1-based) of rank k+1
}

impl Coloring {
    pub fn new(q: u32, colors: Vec<u32>) -> Result<Self, GraphError> {
        for &c in &colors {
            if c == 0 || c > q {
                return Err(GraphError::ColorOutOfRange(c, q));
            }
        }
        Ok(Self { q, colors })
    }

    pub fn from_pairs(q: u32, m: usize, pairs: &[(usize, u32)]) -> Result<Self, GraphError> {
        let mut colors = vec![0u32; m];
        if pairs.len() != m {
            return Err(GraphError::IncompleteColoring(m));
        }
        for &(rank, c) in pairs {
            if rank == 0 || rank > m || colors[rank - 1] != 0 {
                return Err(GraphError::IncompleteColoring(m));
            }
            if c == 0 || c > q {
                return Err(GraphError::ColorOutOfRange(c, q));
            }
            colors[rank - 1] = c;
        }
        Ok(Self { q, colors })
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn len(&self) -> usize {
        self.colors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.colors.is_empty()
    }

    pub fn color_of(&self, rank: usize) -> u32 {
        self.colors[rank - 1]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    pub fn constant(q: u32, color: u32, m: usize) -> Self {
        Self::new(q, vec![color; m]).expect("constant coloring valid")
    }
}

/// Injective map from pattern vertices to host vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddingMap {
    map: Vec<Vertex>, // map[pattern vertex] = host vertex
}

impl EmbeddingMap {
    pub fn new(map: Vec<Vertex>) -> Result<Self, GraphError> {
        let mut seen = std::collections::BTreeSet::new();
        for &v in &map {
            if !seen.insert(v) {
                return Err(GraphError::DuplicateEdge(v, v));
            }
        }
        Ok(Self { map })
    }

    pub fn image_of(&self, pattern_vertex: Vertex) -> Vertex {
        self.map[pattern_vertex]
    }

    pub fn as_slice(&self) -> &[Vertex] {
        &self.map
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}
