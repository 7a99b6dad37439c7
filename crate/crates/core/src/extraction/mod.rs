//! Constrained dominant-set extraction.
//!
//! Writing `-alpha` on the diagonal entries of the unconstrained vertices makes
//! every local maximizer of `x'(A - alpha I_{V\S})x` over the simplex touch the
//! constraint set `S`, as long as `alpha` exceeds the largest eigenvalue of
//! `A` restricted to `V\S`. Extraction repeatedly solves that program, removes
//! the support it finds and recomputes `alpha` on what is left, until every
//! vertex of `S` has been captured.

mod oracle;
mod spectral;

pub use oracle::clique_union_oracle;
pub use spectral::{max_eigenvalue, power_iteration, spectral_bound, EigenMethod, SpectralBound};

use serde::{Deserialize, Serialize};

use crate::dynamics::{kkt_residual, Dynamics, DynamicsAudit, SimplexVector, SolverSettings};
use crate::error::{Error, Result};
use crate::graph::{AffinityMatrix, VertexSet};
use crate::linalg::Matrix;

pub const DEFAULT_MARGIN: f64 = 0.1;

/// User-selected vertices that every extracted cluster has to intersect.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConstraintSet(VertexSet);

impl ConstraintSet {
    pub fn new(members: VertexSet, n: usize) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidVertexSet("constraint set is empty".into()));
        }
        if let Some(&bad) = members.as_slice().iter().find(|&&v| v >= n) {
            return Err(Error::IndexOutOfRange { index: bad, n });
        }
        Ok(Self(members))
    }

    pub fn members(&self) -> &VertexSet {
        &self.0
    }
}

/// `alpha = (1 + margin) * lambda_max(A_{V\S})`, never below `margin`.
pub fn choose_alpha(a: &AffinityMatrix, constraints: &ConstraintSet, margin: f64) -> Result<f64> {
    alpha_from_bound(&spectral_bound(a, constraints.members()), margin)
}

fn alpha_from_bound(bound: &SpectralBound, margin: f64) -> Result<f64> {
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "margin must be strictly positive, got {margin}"
        )));
    }
    Ok(((1.0 + margin) * bound.safe_value()).max(margin))
}

/// Copy of `A` with `-alpha` on the diagonal of every vertex outside `S`.
pub fn build_regularized_matrix(
    a: &AffinityMatrix,
    constraints: &ConstraintSet,
    alpha: f64,
) -> Result<Matrix> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let mut m = a.matrix().clone();
    for i in constraints.members().complement(a.n()).iter() {
        m.set(i, i, -alpha);
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionSettings {
    pub dynamics: Dynamics,
    pub margin: f64,
    pub solver: SolverSettings,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self {
            dynamics: Dynamics::Replicator,
            margin: DEFAULT_MARGIN,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub support: VertexSet,
    /// Solution embedded back into the full vertex set.
    pub vector: SimplexVector,
    /// `x'(A - alpha I)x` on the active subgraph.
    pub objective: f64,
    pub kkt_residual: f64,
    pub alpha: f64,
    pub bound: SpectralBound,
    /// Constraint vertices still unassigned when this cluster was extracted.
    pub active_constraints: VertexSet,
    pub active_vertices: usize,
    pub iterations: usize,
    pub converged: bool,
    pub audit: DynamicsAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractionResult {
    pub clusters: Vec<Cluster>,
    pub union_of_supports: VertexSet,
    pub leftover_constraints: VertexSet,
}

impl ExtractionResult {
    pub fn supports(&self) -> Vec<VertexSet> {
        self.clusters.iter().map(|c| c.support.clone()).collect()
    }

    pub fn all_converged(&self) -> bool {
        self.clusters.iter().all(|c| c.converged)
    }
}

/// Peels off constrained dominant sets until the constraint set is exhausted.
pub fn extract_constrained_clusters(
    a: &AffinityMatrix,
    constraints: &ConstraintSet,
    settings: &ExtractionSettings,
) -> Result<ExtractionResult> {
    let n = a.n();
    ConstraintSet::new(constraints.members().clone(), n)?;
    settings.solver.validate()?;
    if !(settings.margin > 0.0) {
        return Err(Error::InvalidArgument(
            "margin must be strictly positive".into(),
        ));
    }

    let mut active: Vec<usize> = (0..n).collect();
    let mut remaining = constraints.members().clone();
    let mut clusters = Vec::new();
    let mut union = VertexSet::empty();

    while !remaining.is_empty() {
        let sub = a.subgraph(&active);
        let local_s = VertexSet::from_iter_dedup(
            active
                .iter()
                .enumerate()
                .filter(|(_, v)| remaining.contains(**v))
                .map(|(p, _)| p),
        );
        let local_constraints = ConstraintSet::new(local_s, sub.n())?;
        let bound = spectral_bound(&sub, local_constraints.members());
        let alpha = alpha_from_bound(&bound, settings.margin)?;
        let m = build_regularized_matrix(&sub, &local_constraints, alpha)?;

        let x0 = SimplexVector::perturbed_barycenter(sub.n());
        let outcome = settings.dynamics.run(&m, &x0, &settings.solver)?;
        let support = VertexSet::from_iter_dedup(outcome.support.iter().map(|p| active[p]));

        if !support.intersects(&remaining) {
            return Err(Error::ConstraintMissed {
                support: support.as_slice().to_vec(),
                constraints: remaining.as_slice().to_vec(),
                alpha,
                iterations: outcome.iterations_used,
            });
        }
        let kkt = kkt_residual(
            &sub,
            &outcome.solution,
            local_constraints.members(),
            alpha,
            settings.solver.support_epsilon,
        )?;
        if !outcome.converged {
            log::warn!(
                "dynamics did not converge in {} iterations (support {:?})",
                outcome.iterations_used,
                support.as_slice()
            );
        }

        let mut full = vec![0.0; n];
        for (p, &v) in active.iter().enumerate() {
            full[v] = outcome.solution[p];
        }

        clusters.push(Cluster {
            vector: SimplexVector::new(full)?,
            objective: outcome.objective,
            kkt_residual: kkt,
            alpha,
            bound,
            active_constraints: remaining.clone(),
            active_vertices: active.len(),
            iterations: outcome.iterations_used,
            converged: outcome.converged,
            audit: outcome.audit,
            support: support.clone(),
        });

        union = union.union(&support);
        remaining = remaining.difference(&support);
        active.retain(|v| !support.contains(*v));
    }

    Ok(ExtractionResult {
        clusters,
        union_of_supports: union,
        leftover_constraints: remaining,
    })
}
