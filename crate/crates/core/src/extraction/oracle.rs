use super::ConstraintSet;
use crate::error::Result;
use crate::graph::{enumerate_maximal_cliques, maximal_cliques_within, AffinityMatrix, VertexSet};

/// Union of all maximal cliques of `G` that contain some maximal clique of
/// the subgraph induced by the constraint set. The graph is read as binary.
pub fn clique_union_oracle(
    a: &AffinityMatrix,
    constraints: &ConstraintSet,
    cap: usize,
) -> Result<VertexSet> {
    let seeds = maximal_cliques_within(a, constraints.members().as_slice(), cap)?;
    let cliques = enumerate_maximal_cliques(a, cap)?;
    Ok(cliques
        .iter()
        .filter(|c| seeds.iter().any(|s| s.is_subset(c)))
        .fold(VertexSet::empty(), |acc, c| acc.union(c)))
}
