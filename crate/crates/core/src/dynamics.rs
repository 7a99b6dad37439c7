//! Dynamics over the standard simplex for `max x'Mx`.
//!
//! Two solvers share one contract: the multiplicative replicator update and
//! infection-immunization dynamics, which moves along a single vertex (or
//! co-vertex) direction per step and keeps `Mx` cached so each step costs
//! `O(n)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AffinityMatrix, VertexSet};
use crate::linalg::{dot, Matrix};

/// Perturbation added to the barycenter (`eps * i` on component `i`) so that
/// symmetric saddles are broken the same way on every run.
pub const BARYCENTER_PERTURBATION: f64 = 1e-9;

/// Nonnegative vector summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SimplexVector(Vec<f64>);

impl SimplexVector {
    /// Accepts any nonnegative finite vector with positive mass and rescales it.
    pub fn new(components: Vec<f64>) -> Result<Self> {
        if components.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::InvalidArgument(
                "simplex components must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = components.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("simplex vector has no mass".into()));
        }
        let mut v = Self(components);
        v.scale(1.0 / total);
        Ok(v)
    }

    pub fn barycenter(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    /// Barycenter plus [`BARYCENTER_PERTURBATION`]` * i`, renormalized.
    pub fn perturbed_barycenter(n: usize) -> Self {
        let base = 1.0 / n as f64;
        Self::new(
            (0..n)
                .map(|i| base + BARYCENTER_PERTURBATION * i as f64)
                .collect(),
        )
        .expect("positive components")
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn scale(&mut self, s: f64) {
        self.0.iter_mut().for_each(|c| *c *= s);
    }

    fn renormalize(&mut self) {
        let total: f64 = self.0.iter().sum();
        self.scale(1.0 / total);
    }

    pub fn max_component(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    /// Components above `relative_epsilon * max component`.
    pub fn support(&self, relative_epsilon: f64) -> VertexSet {
        let cut = relative_epsilon * self.max_component();
        VertexSet::from_iter_dedup((0..self.0.len()).filter(|&i| self.0[i] > cut))
    }

    /// `|sum - 1|` plus the magnitude of the most negative component.
    pub fn simplex_error(&self) -> f64 {
        let sum: f64 = self.0.iter().sum();
        let neg = self.0.iter().copied().fold(0.0, f64::min);
        (sum - 1.0).abs() + neg.abs()
    }

    pub fn l1_distance(&self, other: &SimplexVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

impl std::ops::Index<usize> for SimplexVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub max_iterations: usize,
    /// Replicator: L1 distance between successive iterates.
    /// Pairwise: largest remaining payoff gap of an admissible direction.
    pub tolerance: f64,
    /// Relative to the largest component.
    pub support_epsilon: f64,
    /// Run [`refine_support`] after the dynamics stop.
    pub refine: bool,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            max_iterations: 10_000,
            tolerance: 1e-10,
            support_epsilon: 1e-6,
            refine: true,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) || !(self.support_epsilon > 0.0) {
            return Err(Error::InvalidArgument(
                "tolerance and support_epsilon must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Per-run bookkeeping used to audit the invariants of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsAudit {
    /// Most negative change of `x'Mx` between successive iterates (0 if none).
    pub worst_objective_drop: f64,
    /// Largest simplex violation seen on any iterate.
    pub max_simplex_error: f64,
    /// Set when a component that was exactly zero became positive.
    pub revived_component: bool,
}

impl Default for DynamicsAudit {
    fn default() -> Self {
        Self {
            worst_objective_drop: 0.0,
            max_simplex_error: 0.0,
            revived_component: false,
        }
    }
}

impl DynamicsAudit {
    fn record(&mut self, prev_obj: f64, obj: f64, x: &SimplexVector) {
        self.worst_objective_drop = self.worst_objective_drop.min(obj - prev_obj);
        self.max_simplex_error = self.max_simplex_error.max(x.simplex_error());
    }

    /// Objective never dropped by more than `slack` and all iterates stayed on the simplex.
    pub fn is_clean(&self, slack: f64) -> bool {
        self.worst_objective_drop >= -slack && self.max_simplex_error <= 1e-12
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOutcome {
    pub solution: SimplexVector,
    /// `x'Mx` at the solution.
    pub objective: f64,
    pub iterations_used: usize,
    pub converged: bool,
    pub support: VertexSet,
    pub audit: DynamicsAudit,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dynamics {
    #[default]
    Replicator,
    Pairwise,
}

impl Dynamics {
    /// Runs the dynamics and, when enabled in `settings`, refines the support.
    pub fn run(
        self,
        m: &Matrix,
        x0: &SimplexVector,
        settings: &SolverSettings,
    ) -> Result<SolverOutcome> {
        let raw = self.run_raw(m, x0, settings)?;
        if settings.refine {
            refine_support(m, raw, self, settings)
        } else {
            Ok(raw)
        }
    }

    pub fn run_raw(
        self,
        m: &Matrix,
        x0: &SimplexVector,
        settings: &SolverSettings,
    ) -> Result<SolverOutcome> {
        match self {
            Dynamics::Replicator => run_replicator(m, x0, settings),
            Dynamics::Pairwise => run_pairwise_dynamics(m, x0, settings),
        }
    }
}

impl FromStr for Dynamics {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicator" => Ok(Dynamics::Replicator),
            "pairwise" | "inimdyn" => Ok(Dynamics::Pairwise),
            other => Err(Error::InvalidArgument(format!(
                "unknown dynamics `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Dynamics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dynamics::Replicator => "replicator",
            Dynamics::Pairwise => "pairwise",
        })
    }
}

fn check_shapes(m: &Matrix, x: &SimplexVector) -> Result<()> {
    if m.n() != x.len() {
        return Err(Error::InvalidArgument(format!(
            "matrix is {n}x{n} but x has {} components",
            x.len(),
            n = m.n()
        )));
    }
    if m.n() == 0 {
        return Err(Error::InvalidArgument("empty problem".into()));
    }
    Ok(())
}

/// One replicator update `x_i <- x_i (Mx)_i / x'Mx`.
///
/// Requires `x'Mx > 0` and nonnegative payoffs on the support of `x`;
/// [`run_replicator`] shifts `M` by a constant to guarantee both.
pub fn replicator_step(m: &Matrix, x: &SimplexVector) -> Result<SimplexVector> {
    check_shapes(m, x)?;
    let mx = m.mul_vec(x.as_slice());
    replicator_update(x, &mx, 0.0)
}

fn replicator_update(x: &SimplexVector, mx: &[f64], shift: f64) -> Result<SimplexVector> {
    let denominator = dot(x.as_slice(), mx) + shift;
    if !(denominator > 0.0) {
        return Err(Error::Degenerate { denominator });
    }
    let mut next = Vec::with_capacity(x.len());
    for (&xi, &p) in x.as_slice().iter().zip(mx) {
        let v = xi * (p + shift) / denominator;
        if v < 0.0 {
            return Err(Error::Degenerate { denominator });
        }
        next.push(v);
    }
    let mut next = SimplexVector(next);
    next.renormalize();
    Ok(next)
}

/// Smallest constant that makes every entry of `M + c ee'` nonnegative.
/// On the simplex `x'(M + c ee')x = x'Mx + c`, so the maximizers are unchanged.
fn payoff_shift(m: &Matrix) -> f64 {
    let shift = (-m.min_entry()).max(0.0);
    if m.as_slice().iter().all(|&v| v + shift == 0.0) {
        1.0
    } else {
        shift
    }
}

/// Replicator dynamics until successive iterates are closer than the
/// tolerance in L1, or the iteration budget runs out.
pub fn run_replicator(
    m: &Matrix,
    x0: &SimplexVector,
    settings: &SolverSettings,
) -> Result<SolverOutcome> {
    check_shapes(m, x0)?;
    settings.validate()?;
    let shift = payoff_shift(m);
    let mut x = x0.clone();
    let mut mx = m.mul_vec(x.as_slice());
    let mut objective = dot(x.as_slice(), &mx);
    let mut audit = DynamicsAudit::default();
    audit.max_simplex_error = x.simplex_error();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        let next = replicator_update(&x, &mx, shift)?;
        iterations += 1;
        if x.0.iter().zip(&next.0).any(|(&a, &b)| a == 0.0 && b > 0.0) {
            audit.revived_component = true;
        }
        let step = next.l1_distance(&x);
        x = next;
        mx = m.mul_vec(x.as_slice());
        let new_objective = dot(x.as_slice(), &mx);
        audit.record(objective, new_objective, &x);
        objective = new_objective;
        if step < settings.tolerance {
            converged = true;
            break;
        }
    }

    Ok(SolverOutcome {
        support: x.support(settings.support_epsilon),
        solution: x,
        objective,
        iterations_used: iterations,
        converged,
        audit,
    })
}

#[derive(Debug, Clone, Copy)]
enum Direction {
    /// Move toward vertex `e_i`.
    Infect(usize),
    /// Move away from `e_i` (toward its co-strategy), shrinking `x_i`.
    Immunize(usize),
}

/// Infection-immunization dynamics.
///
/// Each step picks the coordinate with the largest payoff gap `|(Mx)_i - x'Mx|`
/// among admissible moves (toward `e_i` when the gap is positive, away from
/// `e_i` when it is negative and `x_i > 0`), ties broken by lowest index, and
/// takes the exact line-search step along it.
pub fn run_pairwise_dynamics(
    m: &Matrix,
    x0: &SimplexVector,
    settings: &SolverSettings,
) -> Result<SolverOutcome> {
    check_shapes(m, x0)?;
    settings.validate()?;
    let n = m.n();
    let mut x = x0.clone();
    let mut mx = m.mul_vec(x.as_slice());
    let mut objective = dot(x.as_slice(), &mx);
    let mut audit = DynamicsAudit::default();
    audit.max_simplex_error = x.simplex_error();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_iterations {
        let mut best = 0.0;
        let mut choice = None;
        for i in 0..n {
            let gap = mx[i] - objective;
            if gap > best {
                best = gap;
                choice = Some(Direction::Infect(i));
            } else if -gap > best && x.0[i] > 0.0 && x.0[i] < 1.0 {
                best = -gap;
                choice = Some(Direction::Immunize(i));
            }
        }
        let Some(dir) = choice.filter(|_| best > settings.tolerance) else {
            converged = true;
            break;
        };
        iterations += 1;

        // d = y - x, written as kappa * (e_i - x).
        let (i, kappa) = match dir {
            Direction::Infect(i) => (i, 1.0),
            Direction::Immunize(i) => (i, -x.0[i] / (1.0 - x.0[i])),
        };
        let gap = mx[i] - objective;
        let slope = kappa * gap;
        let curvature = kappa * kappa * (m.get(i, i) - 2.0 * mx[i] + objective);
        let delta = if curvature < 0.0 {
            (-slope / curvature).min(1.0)
        } else {
            1.0
        };
        let t = delta * kappa;

        let row = m.row(i);
        for k in 0..n {
            x.0[k] -= t * x.0[k];
            mx[k] += t * (row[k] - mx[k]);
        }
        x.0[i] += t;
        if matches!(dir, Direction::Immunize(_)) && delta == 1.0 {
            x.0[i] = 0.0;
        }
        for c in x.0.iter_mut() {
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        x.renormalize();
        if iterations % n == 0 {
            mx = m.mul_vec(x.as_slice());
        }
        let new_objective = dot(x.as_slice(), &mx);
        audit.record(objective, new_objective, &x);
        objective = new_objective;
    }

    // Report the objective from a fresh product, not the running cache.
    let objective = m.quadratic_form(x.as_slice());
    Ok(SolverOutcome {
        support: x.support(settings.support_epsilon),
        solution: x,
        objective,
        iterations_used: iterations,
        converged,
        audit,
    })
}

/// Absolute tolerance (scaled by the payoff magnitude) for accepting a
/// refined point as first-order stationary.
pub const REFINE_GAP_TOLERANCE: f64 = 1e-9;

/// Largest first-order violation of `max x'Mx` over the simplex at `x`:
/// `|(Mx)_i - x'Mx|` on `support`, `max(0, (Mx)_i - x'Mx)` elsewhere.
pub fn stationarity_gap(m: &Matrix, x: &[f64], support: &VertexSet) -> f64 {
    let mx = m.mul_vec(x);
    let pi = dot(x, &mx);
    (0..x.len())
        .map(|i| {
            let g = mx[i] - pi;
            if support.contains(i) {
                g.abs()
            } else {
                g.max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Removes components the dynamics are only shrinking slowly.
///
/// Where a vertex outside the limiting support has a payoff gap that vanishes
/// at the limit, multiplicative dynamics shrink it like `1/t` and it stays
/// above any fixed threshold. Refinement tries supports read at thresholds
/// `support_epsilon * 10^k` of the largest component, re-solves on each
/// candidate face, and keeps the largest candidate that is stationary for the
/// full problem and does not lower the objective. If none qualifies, the
/// point is polished with pairwise dynamics. The result is flagged converged
/// exactly when it passes the first-order test.
pub fn refine_support(
    m: &Matrix,
    outcome: SolverOutcome,
    dynamics: Dynamics,
    settings: &SolverSettings,
) -> Result<SolverOutcome> {
    let scale = m.max_row_sum().max(1.0);
    let tol = REFINE_GAP_TOLERANCE * scale;
    if stationarity_gap(m, outcome.solution.as_slice(), &outcome.support) <= tol {
        return Ok(SolverOutcome {
            converged: true,
            ..outcome
        });
    }
    if let Some(found) = best_face(m, &outcome, dynamics, settings, tol)? {
        return Ok(found);
    }

    // No pruned face is stationary: the iterate sits near a saddle with an
    // excluded vertex still gaining. Pairwise moves can re-infect it.
    let polished = run_pairwise_dynamics(m, &outcome.solution, settings)?;
    let merged = merge(&outcome, polished, m);
    if stationarity_gap(m, merged.solution.as_slice(), &merged.support) <= tol {
        return Ok(SolverOutcome {
            converged: true,
            ..merged
        });
    }
    let found = best_face(m, &merged, Dynamics::Pairwise, settings, tol)?;
    Ok(found.unwrap_or(SolverOutcome {
        converged: false,
        ..merged
    }))
}

/// Continues `first` with a later run started from its end point.
fn merge(first: &SolverOutcome, later: SolverOutcome, m: &Matrix) -> SolverOutcome {
    let mut audit = first.audit;
    audit.max_simplex_error = audit.max_simplex_error.max(later.audit.max_simplex_error);
    audit.worst_objective_drop = audit
        .worst_objective_drop
        .min(later.audit.worst_objective_drop);
    audit.revived_component |= later.audit.revived_component;
    SolverOutcome {
        objective: m.quadratic_form(later.solution.as_slice()),
        iterations_used: first.iterations_used + later.iterations_used,
        audit,
        ..later
    }
}

fn best_face(
    m: &Matrix,
    outcome: &SolverOutcome,
    dynamics: Dynamics,
    settings: &SolverSettings,
    tol: f64,
) -> Result<Option<SolverOutcome>> {
    let scale = m.max_row_sum().max(1.0);
    let x = &outcome.solution;
    let mut previous: Option<VertexSet> = None;
    let mut level = settings.support_epsilon;
    while level < 1.0 {
        let candidate = x.support(level);
        level *= 10.0;
        if previous.as_ref() == Some(&candidate) || candidate.is_empty() {
            continue;
        }
        previous = Some(candidate.clone());

        let face = candidate.as_slice();
        let sub = m.principal(face);
        let start = SimplexVector::new(face.iter().map(|&i| x[i]).collect())?;
        let inner = dynamics.run_raw(&sub, &start, settings)?;
        let mut full = vec![0.0; m.n()];
        for (p, &i) in face.iter().enumerate() {
            full[i] = inner.solution[p];
        }
        let full = SimplexVector::new(full)?;
        let support = full.support(settings.support_epsilon);
        let objective = m.quadratic_form(full.as_slice());
        if objective + 1e-12 * scale >= outcome.objective
            && stationarity_gap(m, full.as_slice(), &support) <= tol
        {
            let mut audit = outcome.audit;
            audit.max_simplex_error = audit.max_simplex_error.max(inner.audit.max_simplex_error);
            audit.worst_objective_drop = audit
                .worst_objective_drop
                .min(inner.audit.worst_objective_drop);
            return Ok(Some(SolverOutcome {
                solution: full,
                objective,
                iterations_used: outcome.iterations_used + inner.iterations_used,
                converged: true,
                support,
                audit,
            }));
        }
    }
    Ok(None)
}

/// Largest violation of the first-order conditions of
/// `max x'(A - alpha I_{V\S})x` over the simplex.
///
/// With payoffs `p_i = (Ax)_i - alpha x_i` outside `S`, `p_i = (Ax)_i` in `S`
/// and `lambda = x'p`, supported vertices need `p_i = lambda` and the others
/// `p_i <= lambda`. Support is read with the same relative threshold as the
/// solvers; components below it still enter their own payoff.
pub fn kkt_residual(
    a: &AffinityMatrix,
    x: &SimplexVector,
    constraints: &VertexSet,
    alpha: f64,
    support_epsilon: f64,
) -> Result<f64> {
    if a.n() != x.len() {
        return Err(Error::InvalidArgument("x does not match the graph".into()));
    }
    if let Some(&bad) = constraints.as_slice().iter().find(|&&v| v >= a.n()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            n: a.n(),
        });
    }
    let xs = x.as_slice();
    let ax = a.matrix().mul_vec(xs);
    let outside_sq: f64 = (0..xs.len())
        .filter(|&i| !constraints.contains(i))
        .map(|i| xs[i] * xs[i])
        .sum();
    let lambda = dot(xs, &ax) - alpha * outside_sq;
    let support = x.support(support_epsilon);

    let residual = (0..xs.len())
        .map(|i| {
            let payoff = if constraints.contains(i) {
                ax[i]
            } else {
                ax[i] - alpha * xs[i]
            };
            if support.contains(i) {
                (payoff - lambda).abs()
            } else {
                (payoff - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max);
    Ok(residual)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn off_diag_ones(n: usize) -> Matrix {
        Matrix::from_fn(n, |i, j| if i == j { 0.0 } else { 1.0 })
    }

    fn two_cliques() -> Matrix {
        AffinityMatrix::unweighted(4, &[(0, 1), (2, 3)])
            .unwrap()
            .into_matrix()
    }

    #[test]
    fn replicator_step_examples() {
        let m = off_diag_ones(2);
        let x = SimplexVector::new(vec![0.5, 0.5]).unwrap();
        assert_eq!(replicator_step(&m, &x).unwrap(), x);
        // (0.9*0.1/0.18, 0.1*0.9/0.18)
        let y = replicator_step(&m, &SimplexVector::new(vec![0.9, 0.1]).unwrap()).unwrap();
        assert!((y[0] - 0.5).abs() < 1e-15 && (y[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn replicator_step_degenerate() {
        let m = Matrix::zeros(2);
        let x = SimplexVector::barycenter(2);
        assert!(matches!(
            replicator_step(&m, &x),
            Err(Error::Degenerate { .. })
        ));
    }

    #[test]
    fn strict_maximizer_is_fixed() {
        let m = off_diag_ones(3);
        let x = SimplexVector::barycenter(3);
        let y = replicator_step(&m, &x).unwrap();
        assert!(x.l1_distance(&y) < 1e-15);
    }

    fn both(m: &Matrix) -> [SolverOutcome; 2] {
        let x0 = SimplexVector::perturbed_barycenter(m.n());
        let s = SolverSettings::default();
        [
            run_replicator(m, &x0, &s).unwrap(),
            run_pairwise_dynamics(m, &x0, &s).unwrap(),
        ]
    }

    #[test]
    fn disjoint_cliques_pick_one() {
        for out in both(&two_cliques()) {
            assert!(out.converged);
            let sup = out.support.as_slice().to_vec();
            assert!(sup == vec![0, 1] || sup == vec![2, 3], "{sup:?}");
            assert!((out.objective - 0.5).abs() < 1e-9);
            assert!(out.audit.is_clean(1e-12));
        }
    }

    #[test]
    fn triangle_converges_to_barycenter() {
        for out in both(&off_diag_ones(3)) {
            assert!(out.converged);
            assert_eq!(out.support.as_slice(), &[0, 1, 2]);
            for i in 0..3 {
                assert!((out.solution[i] - 1.0 / 3.0).abs() < 1e-8);
            }
            assert!((out.objective - 2.0 / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_iterations_returns_start() {
        let m = off_diag_ones(3);
        let x0 = SimplexVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let s = SolverSettings {
            max_iterations: 0,
            ..Default::default()
        };
        for out in [
            run_replicator(&m, &x0, &s).unwrap(),
            run_pairwise_dynamics(&m, &x0, &s).unwrap(),
        ] {
            assert_eq!(out.solution, x0);
            assert!(!out.converged);
            assert_eq!(out.iterations_used, 0);
        }
    }

    #[test]
    fn replicator_keeps_zeros() {
        let m = off_diag_ones(4);
        let x0 = SimplexVector::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap();
        let out = run_replicator(&m, &x0, &SolverSettings::default()).unwrap();
        assert_eq!(out.solution[2], 0.0);
        assert_eq!(out.solution[3], 0.0);
        assert!(!out.audit.revived_component);
    }

    #[test]
    fn kkt_examples() {
        // isolated triangle plus a pendant pair
        let a = AffinityMatrix::unweighted(5, &[(0, 1), (1, 2), (0, 2), (3, 4)]).unwrap();
        let x = SimplexVector::new(vec![1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        let s = VertexSet::from([0, 1, 2]);
        for alpha in [0.1, 1.0, 7.5] {
            assert!(kkt_residual(&a, &x, &s, alpha, 1e-6).unwrap() < 1e-15);
        }
        // barycenter of a path: vertex payoffs differ
        let path = AffinityMatrix::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let r = kkt_residual(
            &path,
            &SimplexVector::barycenter(3),
            &VertexSet::from([1]),
            1.0,
            1e-6,
        )
        .unwrap();
        assert!(r > 0.1);
    }

    #[test]
    fn dynamics_parse() {
        assert_eq!("pairwise".parse::<Dynamics>().unwrap(), Dynamics::Pairwise);
        assert!("annealed".parse::<Dynamics>().is_err());
    }

    #[test]
    fn simplex_vector_rejects_bad_input() {
        assert!(SimplexVector::new(vec![0.0, 0.0]).is_err());
        assert!(SimplexVector::new(vec![-0.1, 1.1]).is_err());
        let p = SimplexVector::perturbed_barycenter(5);
        assert!(p.simplex_error() < 1e-15);
        assert!(p[4] > p[0]);
    }
}
