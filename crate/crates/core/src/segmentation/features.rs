use image::RgbImage;
use serde::{Deserialize, Serialize};

use super::color::{hsv_unit, lab_unit, rgb_to_hsv, rgb_to_lab};
use super::filters::{convolve_bank, lm_filter_bank, LM_FILTERS};
use super::superpixels::SuperpixelMap;
use crate::error::{Error, Result};

pub const COLOR_DIMS: usize = 9;
pub const FEATURE_DIM: usize = COLOR_DIMS + LM_FILTERS;

/// Per-superpixel descriptor: medians of RGB, Lab and HSV (each scaled to
/// `[0, 1]`), then the mean absolute response of each LM filter on the
/// luminance channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() != FEATURE_DIM {
            return Err(Error::InvalidArgument(format!(
                "feature vectors have {FEATURE_DIM} entries, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite feature value".into()));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn squared_distance(&self, other: &Self) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

fn median(values: &mut [f64]) -> f64 {
    let n = values.len();
    let mid = n / 2;
    let (_, &mut upper, _) = values.select_nth_unstable_by(mid, f64::total_cmp);
    if n % 2 == 1 {
        upper
    } else {
        let lower = values[..mid]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    }
}

pub fn extract_features(img: &RgbImage, sp: &SuperpixelMap) -> Result<Vec<FeatureVector>> {
    if img.width() != sp.width() || img.height() != sp.height() {
        return Err(Error::InvalidArgument(
            "superpixel map does not match the image".into(),
        ));
    }
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut color = Vec::with_capacity(w * h);
    let mut luminance = Vec::with_capacity(w * h);
    for p in img.pixels() {
        let lab = lab_unit(rgb_to_lab(p.0));
        let hsv = hsv_unit(rgb_to_hsv(p.0));
        let rgb = p.0.map(|c| c as f64 / 255.0);
        luminance.push(lab[0]);
        color.push([
            rgb[0], rgb[1], rgb[2], lab[0], lab[1], lab[2], hsv[0], hsv[1], hsv[2],
        ]);
    }
    let responses = convolve_bank(&luminance, w, h, &lm_filter_bank());

    let mut scratch = Vec::new();
    sp.members()
        .iter()
        .map(|pixels| {
            let mut values = Vec::with_capacity(FEATURE_DIM);
            for c in 0..COLOR_DIMS {
                scratch.clear();
                scratch.extend(pixels.iter().map(|&p| color[p][c]));
                values.push(median(&mut scratch));
            }
            for plane in &responses.planes {
                let sum: f64 = pixels.iter().map(|&p| plane[p].abs()).sum();
                values.push(sum / pixels.len() as f64);
            }
            FeatureVector::new(values)
        })
        .collect()
}
