//! Executable combinatorics of edge-ordered Ramsey theory.
//!
//! An edge-ordered graph carries a total order on its edges, stored as a rank
//! labeling `1..=m`. Two edge-ordered graphs are equivalent when an
//! isomorphism maps the rank-k edge to the rank-k edge for every k. This
//! crate makes the surrounding machinery executable and checkable at desk
//! scale:
//!
//! - [`graph`]: representations, orderings, interval restrictions, densities
//! - [`equiv`]: equivalence, canonical forms, class counting
//! - [`formats`]: line-based text formats (`eog`, `elg`, `vog`, `col`)
//! - [`containment`]: order- and label-preserving subgraph search
//! - [`arrows`]: exhaustive arrowing with verified counterexample colorings
//! - [`regularity`]: seeded random hosts and regularity checking
//! - [`embedding`]: the greedy embed-or-sparse-witness dichotomy,
//!   amplification, and the multipartite clique-counting pipeline
//! - [`bounds`]: exact evaluation of every closed-form bound and schedule
//!
//! Everything randomized is keyed by an explicit 64-bit seed (ChaCha12, see
//! [`prng`]) and is reproducible across platforms and worker counts. All
//! densities and verdicts use exact rational arithmetic; floating point only
//! appears in report summaries.

pub mod arrows;
pub mod bounds;
pub mod containment;
pub mod embedding;
pub mod equiv;
pub mod formats;
pub mod graph;
pub mod prng;
pub mod regularity;

pub use graph::{
    Coloring, EdgeLabeledGraph, EdgeOrderedGraph, EmbeddingMap, Graph, GraphError, Interval,
    VertexOrderedGraph,
};
