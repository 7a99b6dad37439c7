use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fixtures::Fixture;
use super::metrics::{dsc, error_rate, jaccard};
use super::protocol::{generate_synthetic_scribbles, ScribbleProtocol};
use crate::error::{Error, Result};
use crate::extraction::ExtractionSettings;
use crate::segmentation::{
    segment_prepared, Annotation, BoxRect, PreparedImage, SegmentSettings, Segmentation,
    SegmentationMask, SigmaStrategy,
};

pub const LOOSENESS_LEVELS: [f64; 4] = [0.0, 120.0, 240.0, 600.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub image: String,
    pub condition: String,
    /// Looseness percent or error percent, depending on the condition.
    pub level: f64,
    pub error_rate: f64,
    pub jaccard: f64,
    pub dsc: f64,
    pub clusters: usize,
    pub sigma: Option<f64>,
    /// Largest KKT residual over converged clusters.
    pub max_kkt_residual: f64,
    pub unconverged: usize,
    pub worst_objective_drop: f64,
    pub max_simplex_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub condition: String,
    pub level: f64,
    pub images: usize,
    pub mean_error_rate: f64,
    pub mean_jaccard: f64,
    pub mean_dsc: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub rows: Vec<MetricRow>,
    pub summary: Vec<LevelSummary>,
}

impl MetricReport {
    pub fn from_rows(rows: Vec<MetricRow>) -> Self {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &rows {
            if !keys.iter().any(|(c, l)| *c == r.condition && *l == r.level) {
                keys.push((r.condition.clone(), r.level));
            }
        }
        let summary = keys
            .into_iter()
            .map(|(condition, level)| {
                let group: Vec<&MetricRow> = rows
                    .iter()
                    .filter(|r| r.condition == condition && r.level == level)
                    .collect();
                let mean = |f: fn(&MetricRow) -> f64| {
                    group.iter().map(|r| f(r)).sum::<f64>() / group.len() as f64
                };
                LevelSummary {
                    images: group.len(),
                    mean_error_rate: mean(|r| r.error_rate),
                    mean_jaccard: mean(|r| r.jaccard),
                    mean_dsc: mean(|r| r.dsc),
                    condition,
                    level,
                }
            })
            .collect();
        Self { rows, summary }
    }

    pub fn level(&self, level: f64) -> Option<&LevelSummary> {
        self.summary.iter().find(|s| s.level == level)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r)
                .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv is utf-8"))
    }

    /// Writes `<stem>.csv` (one row per image and level) and
    /// `<stem>.json` (rows plus per-level means).
    pub fn write(&self, dir: impl AsRef<Path>, stem: &str) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv()?)?;
        std::fs::write(
            dir.join(format!("{stem}.json")),
            serde_json::to_string_pretty(self)?,
        )?;
        Ok(())
    }
}

fn row(
    fixture: &Fixture,
    condition: &str,
    level: f64,
    seg: &Segmentation,
    rect: BoxRect,
    sigma: Option<f64>,
) -> Result<MetricRow> {
    let clusters = &seg.diagnostics.clusters;
    Ok(MetricRow {
        image: fixture.name.to_string(),
        condition: condition.to_string(),
        level,
        error_rate: error_rate(&seg.mask, &fixture.truth, rect)?,
        jaccard: jaccard(&seg.mask, &fixture.truth)?,
        dsc: dsc(&seg.mask, &fixture.truth)?,
        clusters: seg.diagnostics.cluster_count,
        sigma,
        max_kkt_residual: clusters
            .iter()
            .filter(|c| c.converged)
            .map(|c| c.kkt_residual)
            .fold(0.0, f64::max),
        unconverged: clusters.iter().filter(|c| !c.converged).count(),
        worst_objective_drop: clusters
            .iter()
            .map(|c| c.audit.worst_objective_drop)
            .fold(0.0, f64::min),
        max_simplex_error: clusters
            .iter()
            .map(|c| c.audit.max_simplex_error)
            .fold(0.0, f64::max),
    })
}

/// Tries every `sigma` of the grid and keeps the segmentation with the
/// highest Jaccard against `truth` (lowest sigma on ties).
pub fn segment_best_sigma(
    prepared: &PreparedImage,
    ann: &Annotation,
    truth: &SegmentationMask,
    grid: &[f64],
    extraction: &ExtractionSettings,
) -> Result<(Segmentation, f64)> {
    let mut best: Option<(Segmentation, f64, f64)> = None;
    for &sigma in grid {
        let strategy = SigmaStrategy::Single { sigma };
        let affinity = prepared.affinity(&strategy)?;
        let seg = segment_prepared(prepared, &affinity, &strategy, ann, extraction)?;
        let score = jaccard(&seg.mask, truth)?;
        if best.as_ref().is_none_or(|b| score > b.2) {
            best = Some((seg, sigma, score));
        }
    }
    let (seg, sigma, _) = best.ok_or_else(|| Error::InvalidArgument("empty sigma grid".into()))?;
    Ok((seg, sigma))
}

/// Picks one `sigma` for the whole suite: the grid value with the lowest
/// mean box error at zero looseness (smallest sigma on ties).
///
/// Returns the chosen value and its mean error.
pub fn tune_box_sigma(
    fixtures: &[Fixture],
    grid: &[f64],
    settings: &SegmentSettings,
) -> Result<(f64, f64)> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty sigma grid".into()));
    }
    let per_fixture: Vec<Result<Vec<f64>>> = fixtures
        .par_iter()
        .map(|f| {
            let prepared = PreparedImage::new(f.image.clone(), settings.superpixels)?;
            let ann = Annotation::bounding_box(f.rect);
            grid.iter()
                .map(|&sigma| {
                    let strategy = SigmaStrategy::Single { sigma };
                    let affinity = prepared.affinity(&strategy)?;
                    let seg = segment_prepared(
                        &prepared,
                        &affinity,
                        &strategy,
                        &ann,
                        &settings.extraction,
                    )?;
                    error_rate(&seg.mask, &f.truth, f.rect)
                })
                .collect()
        })
        .collect();
    let mut totals = vec![0.0; grid.len()];
    for errors in per_fixture {
        for (t, e) in totals.iter_mut().zip(errors?) {
            *t += e;
        }
    }
    let n = fixtures.len().max(1) as f64;
    let (k, total) =
        totals.iter().enumerate().fold(
            (0, f64::INFINITY),
            |best, (k, &t)| if t < best.1 { (k, t) } else { best },
        );
    Ok((grid[k], total / n))
}

/// Runs one annotation on a prepared fixture under the configured strategy.
struct Runner<'a> {
    fixture: &'a Fixture,
    prepared: PreparedImage,
    affinity: Option<crate::segmentation::Affinity>,
    settings: &'a SegmentSettings,
}

impl<'a> Runner<'a> {
    fn new(fixture: &'a Fixture, settings: &'a SegmentSettings) -> Result<Self> {
        let prepared = PreparedImage::new(fixture.image.clone(), settings.superpixels)?;
        let affinity = match &settings.sigma {
            SigmaStrategy::Best { .. } => None,
            s => Some(prepared.affinity(s)?),
        };
        Ok(Self {
            fixture,
            prepared,
            affinity,
            settings,
        })
    }

    fn run(&self, ann: &Annotation) -> Result<(Segmentation, Option<f64>)> {
        match (&self.settings.sigma, &self.affinity) {
            (SigmaStrategy::Best { grid }, _) => {
                let (seg, sigma) = segment_best_sigma(
                    &self.prepared,
                    ann,
                    &self.fixture.truth,
                    grid,
                    &self.settings.extraction,
                )?;
                Ok((seg, Some(sigma)))
            }
            (strategy, Some(affinity)) => {
                let sigma = match strategy {
                    SigmaStrategy::Single { sigma } => Some(*sigma),
                    _ => None,
                };
                let seg = segment_prepared(
                    &self.prepared,
                    affinity,
                    strategy,
                    ann,
                    &self.settings.extraction,
                )?;
                Ok((seg, sigma))
            }
            _ => unreachable!("affinity is built for every non-sweep strategy"),
        }
    }
}

fn collect(per_fixture: Vec<Result<Vec<MetricRow>>>) -> Result<MetricReport> {
    let mut rows = Vec::new();
    for r in per_fixture {
        rows.extend(r?);
    }
    Ok(MetricReport::from_rows(rows))
}

/// Foreground-only synthetic scribbles; error rate inside the baseline box.
pub fn run_scribble_suite(
    fixtures: &[Fixture],
    protocol: &ScribbleProtocol,
    settings: &SegmentSettings,
) -> Result<MetricReport> {
    collect(
        fixtures
            .par_iter()
            .map(|f| {
                let runner = Runner::new(f, settings)?;
                let ann = generate_synthetic_scribbles(&f.truth, protocol)?.foreground_only();
                let (seg, sigma) = runner.run(&ann)?;
                Ok(vec![row(f, "scribble", 0.0, &seg, f.rect, sigma)?])
            })
            .collect(),
    )
}

/// Box mode at each looseness level; error rate inside the box given to
/// the algorithm (dilated and cropped).
pub fn run_looseness_sweep(
    fixtures: &[Fixture],
    levels: &[f64],
    settings: &SegmentSettings,
) -> Result<MetricReport> {
    collect(
        fixtures
            .par_iter()
            .map(|f| {
                let runner = Runner::new(f, settings)?;
                levels
                    .iter()
                    .map(|&level| {
                        let ann = if level == 0.0 {
                            Annotation::bounding_box(f.rect)
                        } else {
                            Annotation::loose_box(f.rect, level)
                        };
                        let (seg, sigma) = runner.run(&ann)?;
                        let rect = seg.diagnostics.rect.unwrap_or(f.rect);
                        row(f, "looseness", level, &seg, rect, sigma)
                    })
                    .collect()
            })
            .collect(),
    )
}

/// Error-tolerant scribbles at each error count of the protocol; the level
/// is the error percentage relative to the clean foreground sample.
pub fn run_scribble_error_sweep(
    fixtures: &[Fixture],
    protocol: &ScribbleProtocol,
    settings: &SegmentSettings,
) -> Result<MetricReport> {
    collect(
        fixtures
            .par_iter()
            .map(|f| {
                let runner = Runner::new(f, settings)?;
                let scribbles = generate_synthetic_scribbles(&f.truth, protocol)?;
                protocol
                    .error_counts
                    .iter()
                    .map(|&count| {
                        let (seg, sigma) = runner.run(&scribbles.with_errors(count))?;
                        row(
                            f,
                            "scribble-errors",
                            protocol.error_percent(count),
                            &seg,
                            f.rect,
                            sigma,
                        )
                    })
                    .collect()
            })
            .collect(),
    )
}
