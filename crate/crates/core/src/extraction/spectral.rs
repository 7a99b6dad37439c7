//! Largest eigenvalue of the principal submatrix on the unconstrained vertices.

use serde::{Deserialize, Serialize};

use crate::graph::{AffinityMatrix, VertexSet};
use crate::linalg::{dot, Matrix};

/// Submatrices up to this size are solved with a dense symmetric eigensolver.
pub const DENSE_EIGEN_LIMIT: usize = 32;
pub const POWER_TOLERANCE: f64 = 1e-9;
pub const POWER_MAX_ITERATIONS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Empty,
    Dense,
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBound {
    /// Estimate of `lambda_max(A_{V\S})`.
    pub value: f64,
    /// Largest row sum of the same submatrix; always an upper bound.
    pub gershgorin: f64,
    pub method: EigenMethod,
    pub iterations: usize,
    /// False when power iteration hit its cap; `value` is then only the best estimate.
    pub confident: bool,
}

impl SpectralBound {
    /// A value guaranteed not to underestimate the eigenvalue.
    pub fn safe_value(&self) -> f64 {
        if self.confident {
            self.value
        } else {
            self.gershgorin.max(self.value)
        }
    }
}

/// `lambda_max` of `A` restricted to the vertices outside `constraints`.
/// Zero when every vertex is constrained.
pub fn spectral_bound(a: &AffinityMatrix, constraints: &VertexSet) -> SpectralBound {
    let free: Vec<usize> = constraints.complement(a.n()).iter().collect();
    let sub = a.matrix().principal(&free);
    max_eigenvalue(&sub)
}

/// Largest eigenvalue of a symmetric nonnegative matrix.
pub fn max_eigenvalue(m: &Matrix) -> SpectralBound {
    let gershgorin = m.max_row_sum();
    if m.n() == 0 {
        return SpectralBound {
            value: 0.0,
            gershgorin: 0.0,
            method: EigenMethod::Empty,
            iterations: 0,
            confident: true,
        };
    }
    if m.n() <= DENSE_EIGEN_LIMIT {
        return SpectralBound {
            value: m.dense_max_eigenvalue(),
            gershgorin,
            method: EigenMethod::Dense,
            iterations: 0,
            confident: true,
        };
    }
    power_iteration(m, POWER_TOLERANCE, POWER_MAX_ITERATIONS)
}

/// Power iteration on `M + cI` from the normalized all-ones vector.
///
/// The positive shift `c` separates `lambda_max` from `-lambda_max`, which
/// otherwise has the same magnitude on bipartite components.
pub fn power_iteration(m: &Matrix, tolerance: f64, max_iterations: usize) -> SpectralBound {
    let n = m.n();
    let gershgorin = m.max_row_sum();
    let mut result = SpectralBound {
        value: 0.0,
        gershgorin,
        method: EigenMethod::Power,
        iterations: 0,
        confident: true,
    };
    if gershgorin == 0.0 {
        return result;
    }
    let shift = 0.1 * gershgorin;
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut estimate = f64::NAN;
    result.confident = false;
    for it in 1..=max_iterations {
        let mut w = m.mul_vec(&v);
        let rayleigh = dot(&v, &w);
        w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi += shift * vi);
        let norm = dot(&w, &w).sqrt();
        w.iter_mut().for_each(|wi| *wi /= norm);
        v = w;
        result.iterations = it;
        if (rayleigh - estimate).abs() <= tolerance * rayleigh.abs().max(f64::MIN_POSITIVE) {
            estimate = rayleigh;
            result.confident = true;
            break;
        }
        estimate = rayleigh;
    }
    result.value = estimate;
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clique(k: usize) -> Matrix {
        Matrix::from_fn(k, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    #[test]
    fn bound_examples() {
        // complement has no internal edges
        let star = AffinityMatrix::unweighted(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(spectral_bound(&star, &VertexSet::from([0])).value, 0.0);
        // complement is a 5-clique
        let mut edges = vec![];
        for i in 0..6 {
            for j in i + 1..6 {
                edges.push((i, j));
            }
        }
        let k6 = AffinityMatrix::unweighted(6, &edges).unwrap();
        assert!((spectral_bound(&k6, &VertexSet::from([0])).value - 4.0).abs() < 1e-12);
        let b = spectral_bound(&k6, &VertexSet::all(6));
        assert_eq!((b.value, b.method), (0.0, EigenMethod::Empty));
    }

    #[test]
    fn power_iteration_on_cliques() {
        let b = power_iteration(&clique(40), POWER_TOLERANCE, POWER_MAX_ITERATIONS);
        assert!(b.confident);
        assert!((b.value - 39.0).abs() < 1e-7);
    }

    #[test]
    fn power_iteration_handles_bipartite() {
        // path on 40 vertices: spectrum symmetric about zero
        let path = Matrix::from_fn(40, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let b = power_iteration(&path, POWER_TOLERANCE, 50_000);
        let exact = path.dense_max_eigenvalue();
        assert!(
            (b.value - exact).abs() < 1e-6 * exact,
            "{} vs {exact}",
            b.value
        );
    }

    #[test]
    fn non_convergence_is_flagged() {
        let path = Matrix::from_fn(60, |i, j| if i.abs_diff(j) == 1 { 1.0 } else { 0.0 });
        let b = power_iteration(&path, 1e-15, 3);
        assert!(!b.confident);
        assert!(b.safe_value() >= path.dense_max_eigenvalue());
    }
}
