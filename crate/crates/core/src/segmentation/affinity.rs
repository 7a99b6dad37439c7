use serde::{Deserialize, Serialize};

use super::features::FeatureVector;
use crate::error::{Error, Result};
use crate::graph::AffinityMatrix;
use crate::linalg::Matrix;

pub const DEFAULT_KNN: usize = 7;
pub const SIGMA_RANGE: (f64, f64) = (0.05, 0.2);
pub const SIGMA_GRID_SIZE: usize = 16;
const MIN_LOCAL_SCALE: f64 = 1e-6;

/// How the Gaussian kernel width is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SigmaStrategy {
    /// One global `sigma`.
    Single { sigma: f64 },
    /// `sigma^2` replaced by `sigma_i * sigma_j`, with `sigma_i` the mean
    /// distance from `f_i` to its `knn_k` nearest neighbors.
    SelfTuning { knn_k: usize },
    /// Per-image sweep over `grid`, keeping the value that scores best
    /// against ground truth. Needs ground truth, so only evaluation uses it.
    Best { grid: Vec<f64> },
}

impl Default for SigmaStrategy {
    fn default() -> Self {
        SigmaStrategy::SelfTuning { knn_k: DEFAULT_KNN }
    }
}

impl SigmaStrategy {
    pub fn best() -> Self {
        SigmaStrategy::Best { grid: sigma_grid() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SigmaStrategy::Single { sigma } => sigma.is_finite() && *sigma > 0.0,
            SigmaStrategy::SelfTuning { knn_k } => *knn_k >= 1,
            SigmaStrategy::Best { grid } => {
                !grid.is_empty() && grid.iter().all(|s| s.is_finite() && *s > 0.0)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "invalid sigma strategy {self:?}"
            )))
        }
    }
}

/// `SIGMA_GRID_SIZE` log-spaced values spanning `SIGMA_RANGE`.
pub fn sigma_grid() -> Vec<f64> {
    let (lo, hi) = SIGMA_RANGE;
    let ratio = (hi / lo).ln();
    (0..SIGMA_GRID_SIZE)
        .map(|k| lo * (ratio * k as f64 / (SIGMA_GRID_SIZE - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone)]
pub struct Affinity {
    pub matrix: AffinityMatrix,
    pub warnings: Vec<String>,
}

/// Gaussian kernel `exp(-|f_i - f_j|^2 / 2 sigma^2)` off the diagonal.
pub fn build_affinity(features: &[FeatureVector], strategy: &SigmaStrategy) -> Result<Affinity> {
    strategy.validate()?;
    let n = features.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "an affinity needs at least two superpixels".into(),
        ));
    }
    let mut d2 = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let d = features[i].squared_distance(&features[j]);
            d2.set(i, j, d);
            d2.set(j, i, d);
        }
    }
    let mut warnings = Vec::new();
    let scale: Box<dyn Fn(usize, usize) -> f64> = match strategy {
        SigmaStrategy::Single { sigma } => {
            let s2 = sigma * sigma;
            Box::new(move |_, _| s2)
        }
        SigmaStrategy::SelfTuning { knn_k } => {
            let local = local_scales(&d2, *knn_k, &mut warnings);
            Box::new(move |i, j| local[i] * local[j])
        }
        SigmaStrategy::Best { .. } => {
            return Err(Error::InvalidArgument(
                "the best-sigma sweep needs ground truth; build one affinity per grid value".into(),
            ))
        }
    };
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = (-d2.get(i, j) / (2.0 * scale(i, j))).exp();
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok(Affinity {
        matrix: AffinityMatrix::new(a)?,
        warnings,
    })
}

fn local_scales(d2: &Matrix, knn_k: usize, warnings: &mut Vec<String>) -> Vec<f64> {
    let n = d2.n();
    let k = if knn_k > n - 1 {
        warnings.push(format!(
            "knn_k = {knn_k} exceeds n - 1 = {}; using {} neighbors",
            n - 1,
            n - 1
        ));
        n - 1
    } else {
        knn_k
    };
    let mut floored = 0;
    let scales = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n)
                .filter(|&j| j != i)
                .map(|j| d2.get(i, j).sqrt())
                .collect();
            row.select_nth_unstable_by(k - 1, f64::total_cmp);
            let s = row[..k].iter().sum::<f64>() / k as f64;
            if s < MIN_LOCAL_SCALE {
                floored += 1;
                MIN_LOCAL_SCALE
            } else {
                s
            }
        })
        .collect();
    if floored > 0 {
        warnings.push(format!(
            "{floored} local scales below {MIN_LOCAL_SCALE} were floored"
        ));
    }
    scales
}
