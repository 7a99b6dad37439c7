//! Recursive vertex weights and the dominant-set test.
//!
//! Evaluation is exponential in the set size, so everything here is an oracle
//! for small instances and refuses sets larger than a configurable cap.

use std::collections::HashMap;

use super::{AffinityMatrix, VertexSet};
use crate::error::{Error, Result};

pub const DEFAULT_ORACLE_CAP: usize = 15;

/// Weights within this fraction of their term magnitude are rounding noise
/// and are stored as exact zeros.
const ROUNDING: f64 = 1e-12;

/// `phi_S(i, j) = a_ij - mean_{k in S} a_ik` for `i` in `S`, `j` outside.
pub fn relative_similarity(a: &AffinityMatrix, s: &VertexSet, i: usize, j: usize) -> Result<f64> {
    let n = a.n();
    for v in [i, j] {
        if v >= n {
            return Err(Error::IndexOutOfRange { index: v, n });
        }
    }
    if s.is_empty() {
        return Err(Error::InvalidVertexSet(
            "relative similarity needs a nonempty set".into(),
        ));
    }
    if let Some(&bad) = s.as_slice().iter().find(|&&k| k >= n) {
        return Err(Error::IndexOutOfRange { index: bad, n });
    }
    if !s.contains(i) {
        return Err(Error::Membership {
            vertex: i,
            reason: "must belong to S",
        });
    }
    if s.contains(j) {
        return Err(Error::Membership {
            vertex: j,
            reason: "must lie outside S",
        });
    }
    Ok(phi(a, s.as_slice(), i, j))
}

#[inline]
fn phi(a: &AffinityMatrix, s: &[usize], i: usize, j: usize) -> f64 {
    let mean = s.iter().map(|&k| a.get(i, k)).sum::<f64>() / s.len() as f64;
    a.get(i, j) - mean
}

/// Memoized evaluator of `w_S(i)` over subsets of one graph.
pub struct WeightOracle<'a> {
    a: &'a AffinityMatrix,
    cap: usize,
    /// Per set: each member's weight and the sum of absolute terms behind it.
    memo: HashMap<Vec<usize>, Vec<(f64, f64)>>,
}

impl<'a> WeightOracle<'a> {
    pub fn new(a: &'a AffinityMatrix, cap: usize) -> Self {
        Self {
            a,
            cap,
            memo: HashMap::new(),
        }
    }

    /// Weights of every member of the sorted set `s`, in the same order.
    pub fn weights(&mut self, s: &[usize]) -> Result<Vec<f64>> {
        if s.len() > self.cap {
            return Err(Error::OracleCap {
                size: s.len(),
                cap: self.cap,
            });
        }
        if s.is_empty() {
            return Err(Error::InvalidVertexSet("weights of the empty set".into()));
        }
        let n = self.a.n();
        if let Some(&bad) = s.iter().find(|&&v| v >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(self.compute(s).into_iter().map(|(w, _)| w).collect())
    }

    /// Weights with magnitudes, for sign tests that must ignore rounding.
    fn entries(&mut self, s: &[usize]) -> Result<Vec<(f64, f64)>> {
        self.weights(s)?;
        Ok(self.compute(s))
    }

    fn compute(&mut self, s: &[usize]) -> Vec<(f64, f64)> {
        if let Some(w) = self.memo.get(s) {
            return w.clone();
        }
        let w = if s.len() == 1 {
            vec![(1.0, 1.0)]
        } else {
            let mut out = Vec::with_capacity(s.len());
            let mut rest = Vec::with_capacity(s.len() - 1);
            for (p, &i) in s.iter().enumerate() {
                rest.clear();
                rest.extend(
                    s.iter()
                        .enumerate()
                        .filter(|&(q, _)| q != p)
                        .map(|(_, &v)| v),
                );
                let w_rest = self.compute(&rest);
                let (mut wi, mut mag) = (0.0, 0.0);
                for (&j, &(wj, mj)) in rest.iter().zip(&w_rest) {
                    let f = phi(self.a, &rest, j, i);
                    wi += f * wj;
                    mag += f.abs() * mj;
                }
                if wi.abs() <= ROUNDING * mag {
                    wi = 0.0;
                }
                out.push((wi, mag));
            }
            out
        };
        self.memo.insert(s.to_vec(), w.clone());
        w
    }

    pub fn total(&mut self, s: &[usize]) -> Result<f64> {
        Ok(self.weights(s)?.iter().sum())
    }
}

/// `w_S(i)` for a member `i` of `S`.
pub fn vertex_weight(a: &AffinityMatrix, s: &VertexSet, i: usize, cap: usize) -> Result<f64> {
    let pos = s
        .as_slice()
        .binary_search(&i)
        .map_err(|_| Error::Membership {
            vertex: i,
            reason: "must belong to S",
        })?;
    Ok(WeightOracle::new(a, cap).weights(s.as_slice())?[pos])
}

/// `W(S)`, the sum of member weights. May be zero or negative.
pub fn total_weight(a: &AffinityMatrix, s: &VertexSet, cap: usize) -> Result<f64> {
    WeightOracle::new(a, cap).total(s.as_slice())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominantSetCertificate {
    pub set: VertexSet,
    pub internal_weights: Vec<f64>,
    pub total_weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Rejection {
    /// Some nonempty `T` inside `S` has `W(T) <= 0`.
    NotTotallyPositive {
        subset: VertexSet,
        total_weight: f64,
    },
    /// A member with `w_S(i) <= 0`.
    InternalWeight { vertex: usize, weight: f64 },
    /// An outside vertex whose joining weight `w_{S+i}(i)` violates the external condition.
    ExternalWeight { vertex: usize, weight: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Dominance {
    Dominant(DominantSetCertificate),
    Rejected(Rejection),
}

impl Dominance {
    pub fn is_dominant(&self) -> bool {
        matches!(self, Dominance::Dominant(_))
    }
}

/// How the joining weight `w_{S+i}(i)` of an outside vertex is compared with zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExternalCondition {
    /// No outside vertex may join with positive weight (`<= 0`). On unweighted
    /// graphs the accepted sets are exactly the maximal cliques.
    NonPositive,
    /// Every outside vertex must have strictly negative weight (`< 0`). On
    /// unweighted graphs this rejects maximal cliques having an outside
    /// vertex adjacent to all members but one.
    Negative,
}

/// Checks the dominant-set definition: total positivity of every subset,
/// positive internal weights, and no outside vertex able to join with
/// positive weight.
pub fn is_dominant_set(a: &AffinityMatrix, s: &VertexSet, cap: usize) -> Result<Dominance> {
    check_dominance(a, s, cap, ExternalCondition::NonPositive)
}

/// Same as [`is_dominant_set`] with the strict external inequality.
pub fn is_strictly_dominant_set(
    a: &AffinityMatrix,
    s: &VertexSet,
    cap: usize,
) -> Result<Dominance> {
    check_dominance(a, s, cap, ExternalCondition::Negative)
}

pub fn check_dominance(
    a: &AffinityMatrix,
    s: &VertexSet,
    cap: usize,
    external: ExternalCondition,
) -> Result<Dominance> {
    if s.is_empty() {
        return Err(Error::InvalidVertexSet("dominant sets are nonempty".into()));
    }
    let members = s.as_slice();
    if members.len() > cap {
        return Err(Error::OracleCap {
            size: members.len(),
            cap,
        });
    }
    // External checks evaluate S plus one vertex.
    let mut oracle = WeightOracle::new(a, cap + 1);
    let internal = oracle.weights(members)?;
    let total_of = |e: &[(f64, f64)]| {
        let (w, m) = e.iter().fold((0.0, 0.0), |(w, m), &(x, y)| (w + x, m + y));
        if w.abs() <= ROUNDING * m {
            0.0
        } else {
            w
        }
    };

    // Every proper subset is now memoized.
    let k = members.len();
    for mask in 1u32..(1u32 << k) {
        let subset: Vec<usize> = (0..k)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| members[b])
            .collect();
        let total = total_of(&oracle.entries(&subset)?);
        if total <= 0.0 {
            return Ok(Dominance::Rejected(Rejection::NotTotallyPositive {
                subset: VertexSet::from_iter_dedup(subset),
                total_weight: total,
            }));
        }
    }

    if let Some((p, &w)) = internal.iter().enumerate().find(|(_, &w)| w <= 0.0) {
        return Ok(Dominance::Rejected(Rejection::InternalWeight {
            vertex: members[p],
            weight: w,
        }));
    }

    for v in s.complement(a.n()).iter() {
        let joined = s.with(v);
        let pos = joined.as_slice().binary_search(&v).expect("just inserted");
        let w = oracle.weights(joined.as_slice())?[pos];
        let violates = match external {
            ExternalCondition::NonPositive => w > 0.0,
            ExternalCondition::Negative => w >= 0.0,
        };
        if violates {
            return Ok(Dominance::Rejected(Rejection::ExternalWeight {
                vertex: v,
                weight: w,
            }));
        }
    }

    Ok(Dominance::Dominant(DominantSetCertificate {
        set: s.clone(),
        total_weight: total_of(&oracle.entries(members)?),
        internal_weights: internal,
    }))
}
