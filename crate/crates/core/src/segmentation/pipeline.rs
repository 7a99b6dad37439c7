use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::affinity::{build_affinity, Affinity, SigmaStrategy};
use super::annotation::{
    annotation_to_constraints, Annotation, AnnotationKind, BoxRect, Constraints, OutputMode,
};
use super::features::{extract_features, FeatureVector};
use super::mask::SegmentationMask;
use super::superpixels::{compute_superpixels, SuperpixelMap};
use crate::dynamics::{Dynamics, DynamicsAudit};
use crate::error::{Error, Result};
use crate::extraction::{extract_constrained_clusters, ConstraintSet, ExtractionSettings};
use crate::graph::VertexSet;

pub const DEFAULT_SUPERPIXELS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSettings {
    pub superpixels: usize,
    pub sigma: SigmaStrategy,
    pub extraction: ExtractionSettings,
}

impl Default for SegmentSettings {
    fn default() -> Self {
        Self {
            superpixels: DEFAULT_SUPERPIXELS,
            sigma: SigmaStrategy::default(),
            extraction: ExtractionSettings::default(),
        }
    }
}

/// Image with its superpixels and features, reusable across annotations.
#[derive(Debug, Clone)]
pub struct PreparedImage {
    image: RgbImage,
    superpixels: SuperpixelMap,
    features: Vec<FeatureVector>,
}

impl PreparedImage {
    pub fn new(image: RgbImage, target_superpixels: usize) -> Result<Self> {
        super::check_image(&image)?;
        let superpixels = compute_superpixels(&image, target_superpixels)?;
        let features = extract_features(&image, &superpixels)?;
        Ok(Self {
            image,
            superpixels,
            features,
        })
    }

    pub fn image(&self) -> &RgbImage {
        &self.image
    }

    pub fn superpixels(&self) -> &SuperpixelMap {
        &self.superpixels
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn affinity(&self, strategy: &SigmaStrategy) -> Result<Affinity> {
        build_affinity(&self.features, strategy)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub superpixels: Vec<usize>,
    /// Constraint superpixels captured by this cluster.
    pub seeds: Vec<usize>,
    pub alpha: f64,
    pub bound: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Dropped by the error-tolerant rule.
    pub discarded: bool,
    pub audit: DynamicsAudit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub width: u32,
    pub height: u32,
    pub superpixel_count: usize,
    pub sigma: SigmaStrategy,
    pub dynamics: Dynamics,
    pub margin: f64,
    pub mode: OutputMode,
    pub constraint_superpixels: Vec<usize>,
    pub background_superpixels: Vec<usize>,
    #[serde(rename = "box", skip_serializing_if = "Option::is_none")]
    pub rect: Option<BoxRect>,
    pub cluster_count: usize,
    pub clusters: Vec<ClusterReport>,
    pub foreground_pixels: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct Segmentation {
    pub mask: SegmentationMask,
    /// Superpixels in the union of kept clusters.
    pub extracted: VertexSet,
    pub diagnostics: Diagnostics,
}

/// Full chain from pixels to mask. Scribbles with errors use the
/// error-tolerant rule.
pub fn segment(
    image: &RgbImage,
    ann: &Annotation,
    settings: &SegmentSettings,
) -> Result<Segmentation> {
    let prepared = PreparedImage::new(image.clone(), settings.superpixels)?;
    let affinity = prepared.affinity(&settings.sigma)?;
    segment_prepared(
        &prepared,
        &affinity,
        &settings.sigma,
        ann,
        &settings.extraction,
    )
}

pub fn segment_prepared(
    prepared: &PreparedImage,
    affinity: &Affinity,
    sigma: &SigmaStrategy,
    ann: &Annotation,
    extraction: &ExtractionSettings,
) -> Result<Segmentation> {
    let constraints = annotation_to_constraints(ann, &prepared.superpixels)?;
    let tolerant = ann.kind == AnnotationKind::ScribbleWithErrors;
    run(
        prepared,
        affinity,
        sigma,
        &constraints,
        extraction,
        tolerant,
    )
}

/// Extraction from the foreground strokes, keeping only clusters that
/// contain no background-stroked superpixel.
pub fn segment_error_tolerant(
    image: &RgbImage,
    ann: &Annotation,
    settings: &SegmentSettings,
) -> Result<Segmentation> {
    if ann.kind != AnnotationKind::ScribbleWithErrors {
        return Err(Error::Annotation(
            "error-tolerant mode needs a scribble-with-errors annotation".into(),
        ));
    }
    segment(image, ann, settings)
}

fn run(
    prepared: &PreparedImage,
    affinity: &Affinity,
    sigma: &SigmaStrategy,
    constraints: &Constraints,
    extraction: &ExtractionSettings,
    tolerant: bool,
) -> Result<Segmentation> {
    let sp = &prepared.superpixels;
    let domain = constraints
        .domain
        .clone()
        .unwrap_or_else(|| VertexSet::all(sp.count()));
    let ids = domain.as_slice();
    let local = |v: usize| {
        ids.binary_search(&v)
            .expect("constraints lie in the domain")
    };
    let graph = affinity.matrix.subgraph(ids);
    let cs = ConstraintSet::new(
        VertexSet::from_iter_dedup(constraints.seeds.iter().map(local)),
        ids.len(),
    )?;
    let mut result = extract_constrained_clusters(&graph, &cs, extraction)?;
    for c in &mut result.clusters {
        c.support = VertexSet::from_iter_dedup(c.support.iter().map(|v| ids[v]));
    }

    let mut warnings = affinity.warnings.clone();
    let mut extracted = VertexSet::empty();
    let mut clusters = Vec::with_capacity(result.clusters.len());
    for c in &result.clusters {
        let discarded = tolerant && c.support.intersects(&constraints.background);
        if !discarded {
            extracted = extracted.union(&c.support);
        }
        if !c.converged {
            warnings.push(format!(
                "cluster {} stopped after {} iterations without converging",
                clusters.len(),
                c.iterations
            ));
        }
        clusters.push(ClusterReport {
            superpixels: c.support.as_slice().to_vec(),
            seeds: c
                .support
                .intersection(&constraints.seeds)
                .as_slice()
                .to_vec(),
            alpha: c.alpha,
            bound: c.bound.value,
            objective: c.objective,
            kkt_residual: c.kkt_residual,
            iterations: c.iterations,
            converged: c.converged,
            discarded,
            audit: c.audit,
        });
    }
    if tolerant && clusters.iter().all(|c| c.discarded) {
        let w =
            "every extracted cluster touches a background stroke; the mask is empty".to_string();
        log::warn!("{w}");
        warnings.push(w);
    }

    let mask = match constraints.mode {
        OutputMode::Foreground => sp.mask_of(&extracted),
        OutputMode::Complement => sp.mask_of(&domain.difference(&extracted)),
    };
    let diagnostics = Diagnostics {
        width: sp.width(),
        height: sp.height(),
        superpixel_count: sp.count(),
        sigma: sigma.clone(),
        dynamics: extraction.dynamics,
        margin: extraction.margin,
        mode: constraints.mode,
        constraint_superpixels: constraints.seeds.as_slice().to_vec(),
        background_superpixels: constraints.background.as_slice().to_vec(),
        rect: constraints.rect,
        cluster_count: clusters.len(),
        clusters,
        foreground_pixels: mask.count(),
        warnings,
    };
    Ok(Segmentation {
        mask,
        extracted,
        diagnostics,
    })
}
