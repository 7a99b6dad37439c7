//! Weighted graphs, dominant-set weights and small brute-force oracles.

mod cliques;
mod file;
mod weights;

pub use cliques::{
    enumerate_maximal_cliques, is_clique, maximal_cliques_within, DEFAULT_CLIQUE_CAP,
};
pub use file::{parse_graph, read_graph, write_graph};
pub use weights::{
    check_dominance, is_dominant_set, is_strictly_dominant_set, relative_similarity, total_weight,
    vertex_weight, Dominance, DominantSetCertificate, ExternalCondition, Rejection, WeightOracle,
    DEFAULT_ORACLE_CAP,
};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Symmetric, nonnegative similarity matrix with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    weights: Matrix,
}

impl AffinityMatrix {
    pub fn new(weights: Matrix) -> Result<Self> {
        let n = weights.n();
        for i in 0..n {
            if weights.get(i, i) != 0.0 {
                return Err(Error::InvalidMatrix(format!(
                    "diagonal entry ({i},{i}) is {}",
                    weights.get(i, i)
                )));
            }
            for j in 0..n {
                let w = weights.get(i, j);
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidMatrix(format!("entry ({i},{j}) is {w}")));
                }
                if w != weights.get(j, i) {
                    return Err(Error::InvalidMatrix(format!("asymmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self { weights })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = Matrix::from_rows(rows)
            .ok_or_else(|| Error::InvalidMatrix("rows are ragged".into()))?;
        Self::new(m)
    }

    /// Builds a graph from an undirected edge list `(i, j, w)`.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut m = Matrix::zeros(n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfRange { index: i.max(j), n });
            }
            if i == j {
                return Err(Error::InvalidMatrix(format!("self-loop at {i}")));
            }
            m.set(i, j, w);
            m.set(j, i, w);
        }
        Self::new(m)
    }

    /// Unweighted graph from an edge list.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let e: Vec<_> = edges.iter().map(|&(i, j)| (i, j, 1.0)).collect();
        Self::from_edges(n, &e)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.weights.n()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    /// Edge test used by the clique oracles: any positive weight is an edge.
    #[inline]
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.weights.get(i, j) > 0.0
    }

    pub fn matrix(&self) -> &Matrix {
        &self.weights
    }

    pub fn into_matrix(self) -> Matrix {
        self.weights
    }

    /// Principal subgraph on `idx`; vertex `k` of the result is `idx[k]`.
    pub fn subgraph(&self, idx: &[usize]) -> AffinityMatrix {
        AffinityMatrix {
            weights: self.weights.principal(idx),
        }
    }

    /// Binary version of the graph (`w > 0` becomes 1).
    pub fn to_binary(&self) -> AffinityMatrix {
        let n = self.n();
        AffinityMatrix {
            weights: Matrix::from_fn(n, |i, j| if self.adjacent(i, j) { 1.0 } else { 0.0 }),
        }
    }

    pub fn edge_count(&self) -> usize {
        let n = self.n();
        (0..n)
            .map(|i| (i + 1..n).filter(|&j| self.adjacent(i, j)).count())
            .sum()
    }
}

/// Sorted set of distinct vertex indices.
#[derive(
    Debug,
    Clone,
    Default,
    PartialEq,
    Eq,
    Hash,
    PartialOrd,
    Ord,
    serde::Serialize,
    serde::Deserialize,
)]
#[serde(transparent)]
pub struct VertexSet {
    members: Vec<usize>,
}

impl VertexSet {
    /// Validated constructor: rejects duplicates and indices `>= n`.
    pub fn new(members: impl IntoIterator<Item = usize>, n: usize) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidVertexSet(format!(
                "duplicate vertex {}",
                w[0]
            )));
        }
        if let Some(&last) = members.last() {
            if last >= n {
                return Err(Error::IndexOutOfRange { index: last, n });
            }
        }
        Ok(Self { members })
    }

    /// Sorts and deduplicates without a bound check.
    pub fn from_iter_dedup(members: impl IntoIterator<Item = usize>) -> Self {
        let mut members: Vec<usize> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self { members }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn all(n: usize) -> Self {
        Self {
            members: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.members
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        Self::from_iter_dedup(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        Self {
            members: self.iter().filter(|&v| !other.contains(v)).collect(),
        }
    }

    pub fn intersection(&self, other: &VertexSet) -> VertexSet {
        Self {
            members: self.iter().filter(|&v| other.contains(v)).collect(),
        }
    }

    pub fn intersects(&self, other: &VertexSet) -> bool {
        self.iter().any(|v| other.contains(v))
    }

    pub fn is_subset(&self, other: &VertexSet) -> bool {
        self.iter().all(|v| other.contains(v))
    }

    /// `{0..n} \ self`.
    pub fn complement(&self, n: usize) -> VertexSet {
        Self {
            members: (0..n).filter(|&v| !self.contains(v)).collect(),
        }
    }

    pub fn with(&self, v: usize) -> VertexSet {
        Self::from_iter_dedup(self.iter().chain(std::iter::once(v)))
    }
}

impl From<Vec<usize>> for VertexSet {
    fn from(v: Vec<usize>) -> Self {
        Self::from_iter_dedup(v)
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(v: [usize; N]) -> Self {
        Self::from_iter_dedup(v)
    }
}

/// Eight-vertex unweighted graph whose maximal cliques are
/// `{0,1}`, `{1,2}`, `{3,4}` and `{4,5,6,7}`.
///
/// Vertex 1 bridges two edges, vertex 4 bridges an edge and a 4-clique. It is
/// the standard small instance for checking which supports the constrained
/// program selects for a given seed set.
pub fn example_graph() -> AffinityMatrix {
    const EDGES: [(usize, usize); 9] = [
        (0, 1),
        (1, 2),
        (3, 4),
        (4, 5),
        (4, 6),
        (4, 7),
        (5, 6),
        (5, 7),
        (6, 7),
    ];
    AffinityMatrix::unweighted(8, &EDGES).expect("static edge list is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affinity_invariants_enforced() {
        assert!(AffinityMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, 0.5], vec![0.4, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, -0.5], vec![-0.5, 0.0]]).is_err());
        assert!(AffinityMatrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.0]]).is_ok());
        assert!(AffinityMatrix::from_edges(3, &[(1, 1, 1.0)]).is_err());
    }

    #[test]
    fn vertex_set_validation() {
        assert!(VertexSet::new([0, 0], 3).is_err());
        assert!(VertexSet::new([3], 3).is_err());
        let s = VertexSet::new([2, 0], 3).unwrap();
        assert_eq!(s.as_slice(), &[0, 2]);
        assert_eq!(s.complement(4).as_slice(), &[1, 3]);
    }

    #[test]
    fn example_graph_shape() {
        let g = example_graph();
        assert_eq!(g.n(), 8);
        assert_eq!(g.edge_count(), 9);
        assert!(g.adjacent(1, 2) && !g.adjacent(0, 2));
    }
}
