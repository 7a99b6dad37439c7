//! Interactive segmentation: superpixels, features, affinity, annotations
//! and the extraction-driven mask.

pub mod affinity;
pub mod annotation;
pub mod color;
pub mod features;
pub mod filters;
pub mod mask;
pub mod pipeline;
pub mod superpixels;

use std::path::Path;

pub use image::RgbImage;

use crate::error::{Error, Result};

pub use affinity::{build_affinity, sigma_grid, Affinity, SigmaStrategy, DEFAULT_KNN};
pub use annotation::{
    annotation_to_constraints, dilate_box, Annotation, AnnotationKind, BoxRect, Constraints,
    OutputMode, Stroke, StrokeTag,
};
pub use features::{extract_features, FeatureVector, FEATURE_DIM};
pub use mask::{Run, SegmentationMask};
pub use pipeline::{
    segment, segment_error_tolerant, segment_prepared, ClusterReport, Diagnostics, PreparedImage,
    SegmentSettings, Segmentation, DEFAULT_SUPERPIXELS,
};
pub use superpixels::{compute_superpixels, SuperpixelMap};

pub const MIN_IMAGE_SIDE: u32 = 16;

pub fn check_image(img: &RgbImage) -> Result<()> {
    if img.width() < MIN_IMAGE_SIDE || img.height() < MIN_IMAGE_SIDE {
        return Err(Error::InvalidArgument(format!(
            "images must be at least {MIN_IMAGE_SIDE}x{MIN_IMAGE_SIDE}, got {}x{}",
            img.width(),
            img.height()
        )));
    }
    Ok(())
}

/// Reads a PNG or binary PPM as 8-bit RGB.
pub fn load_image(path: impl AsRef<Path>) -> Result<RgbImage> {
    let img = image::open(path)?.to_rgb8();
    check_image(&img)?;
    Ok(img)
}

pub fn decode_image(bytes: &[u8]) -> Result<RgbImage> {
    let img = image::load_from_memory(bytes)?.to_rgb8();
    check_image(&img)?;
    Ok(img)
}
