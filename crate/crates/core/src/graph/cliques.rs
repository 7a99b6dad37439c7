//! Maximal-clique enumeration on the binary version of a graph.

use super::{AffinityMatrix, VertexSet};
use crate::error::{Error, Result};

pub const DEFAULT_CLIQUE_CAP: usize = 64;
const BITSET_WIDTH: usize = 128;

type Bits = u128;

/// All maximal cliques of the graph (edge iff weight > 0), sorted
/// lexicographically by their sorted members.
pub fn enumerate_maximal_cliques(a: &AffinityMatrix, cap: usize) -> Result<Vec<VertexSet>> {
    let all: Vec<usize> = (0..a.n()).collect();
    maximal_cliques_within(a, &all, cap)
}

/// Maximal cliques of the subgraph induced by `vertices`, reported in the
/// original indexing.
pub fn maximal_cliques_within(
    a: &AffinityMatrix,
    vertices: &[usize],
    cap: usize,
) -> Result<Vec<VertexSet>> {
    let n = vertices.len();
    let cap = cap.min(BITSET_WIDTH);
    if n > cap {
        return Err(Error::OracleCap { size: n, cap });
    }
    if let Some(&bad) = vertices.iter().find(|&&v| v >= a.n()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            n: a.n(),
        });
    }
    let neighbours: Vec<Bits> = (0..n)
        .map(|p| {
            (0..n)
                .filter(|&q| q != p && a.adjacent(vertices[p], vertices[q]))
                .fold(0, |acc, q| acc | (1 << q))
        })
        .collect();

    let mut found = Vec::new();
    let candidates: Bits = if n == BITSET_WIDTH {
        Bits::MAX
    } else {
        (1 << n) - 1
    };
    bron_kerbosch(&neighbours, 0, candidates, 0, &mut found);

    let mut cliques: Vec<VertexSet> = found
        .into_iter()
        .map(|bits| VertexSet::from_iter_dedup(members(bits).map(|p| vertices[p])))
        .collect();
    cliques.sort();
    Ok(cliques)
}

fn members(bits: Bits) -> impl Iterator<Item = usize> {
    (0..BITSET_WIDTH).filter(move |&b| bits & (1 << b) != 0)
}

fn bron_kerbosch(nbr: &[Bits], r: Bits, mut p: Bits, mut x: Bits, out: &mut Vec<Bits>) {
    if p == 0 {
        if x == 0 {
            out.push(r);
        }
        return;
    }
    // Tomita pivot: vertex of P u X with the most neighbours in P.
    let pivot = members(p | x)
        .max_by_key(|&u| (nbr[u] & p).count_ones())
        .expect("P is nonempty");
    for v in members(p & !nbr[pivot]) {
        let bit = 1 << v;
        bron_kerbosch(nbr, r | bit, p & nbr[v], x & nbr[v], out);
        p &= !bit;
        x |= bit;
    }
}

/// Whether every pair of `s` is adjacent.
pub fn is_clique(a: &AffinityMatrix, s: &VertexSet) -> bool {
    let m = s.as_slice();
    m.iter()
        .enumerate()
        .all(|(p, &i)| m[p + 1..].iter().all(|&j| a.adjacent(i, j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::example_graph;
    use proptest::prelude::*;

    fn sets(v: &[&[usize]]) -> Vec<VertexSet> {
        v.iter()
            .map(|s| VertexSet::from_iter_dedup(s.iter().copied()))
            .collect()
    }

    #[test]
    fn small_graphs() {
        let tri = AffinityMatrix::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(
            enumerate_maximal_cliques(&tri, 64).unwrap(),
            sets(&[&[0, 1, 2]])
        );
        let path = AffinityMatrix::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(
            enumerate_maximal_cliques(&path, 64).unwrap(),
            sets(&[&[0, 1], &[1, 2]])
        );
        let edgeless = AffinityMatrix::unweighted(2, &[]).unwrap();
        assert_eq!(
            enumerate_maximal_cliques(&edgeless, 64).unwrap(),
            sets(&[&[0], &[1]])
        );
    }

    #[test]
    fn example_graph_cliques() {
        assert_eq!(
            enumerate_maximal_cliques(&example_graph(), 64).unwrap(),
            sets(&[&[0, 1], &[1, 2], &[3, 4], &[4, 5, 6, 7]])
        );
    }

    #[test]
    fn within_subset_uses_original_labels() {
        let g = example_graph();
        assert_eq!(
            maximal_cliques_within(&g, &[1, 4, 7], 64).unwrap(),
            sets(&[&[1], &[4, 7]])
        );
    }

    #[test]
    fn cap_exceeded() {
        let g = AffinityMatrix::unweighted(10, &[]).unwrap();
        assert!(matches!(
            enumerate_maximal_cliques(&g, 9),
            Err(Error::OracleCap { .. })
        ));
    }

    fn brute_force(a: &AffinityMatrix) -> Vec<VertexSet> {
        let n = a.n();
        let cliques: Vec<VertexSet> = (1u32..(1 << n))
            .map(|m| VertexSet::from_iter_dedup((0..n).filter(|b| m & (1 << b) != 0)))
            .filter(|s| is_clique(a, s))
            .collect();
        let mut maximal: Vec<VertexSet> = cliques
            .iter()
            .filter(|s| (0..n).all(|v| s.contains(v) || !is_clique(a, &s.with(v))))
            .cloned()
            .collect();
        maximal.sort();
        maximal
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..10, bits in proptest::collection::vec(any::<bool>(), 45)) {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if bits[k] { edges.push((i, j)); }
                    k += 1;
                }
            }
            let g = AffinityMatrix::unweighted(n, &edges).unwrap();
            prop_assert_eq!(enumerate_maximal_cliques(&g, 64).unwrap(), brute_force(&g));
        }
    }
}
