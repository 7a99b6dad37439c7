//! Synthetic scribbles sampled from ground truth, with deliberate errors
//! drawn from background pixels near the object.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::segmentation::{Annotation, AnnotationKind, SegmentationMask, Stroke, StrokeTag};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScribbleProtocol {
    pub n_fg: usize,
    pub n_bg: usize,
    /// Error-zone radius as a percentage of the image diagonal.
    pub error_zone_distance_percent: f64,
    pub error_counts: Vec<usize>,
    pub seed: u64,
}

impl Default for ScribbleProtocol {
    fn default() -> Self {
        Self {
            n_fg: 50,
            n_bg: 50,
            error_zone_distance_percent: 5.0,
            error_counts: vec![0, 5, 10, 20, 30, 40, 50],
            seed: 0x5c1b,
        }
    }
}

impl ScribbleProtocol {
    /// Error count as a percentage of the clean foreground sample.
    pub fn error_percent(&self, count: usize) -> f64 {
        100.0 * count as f64 / self.n_fg as f64
    }
}

/// Every annotation of one protocol run: index `k` carries
/// `error_counts[k]` wrong foreground pixels. Smaller error sets are
/// prefixes of larger ones.
#[derive(Debug, Clone)]
pub struct SyntheticScribbles {
    pub fg: Vec<[i64; 2]>,
    pub bg: Vec<[i64; 2]>,
    /// Error-zone pixels in sampling order.
    pub errors: Vec<[i64; 2]>,
    pub warnings: Vec<String>,
}

impl SyntheticScribbles {
    /// Clean foreground pixels plus the first `count` error pixels, all
    /// tagged foreground, and the background sample.
    pub fn with_errors(&self, count: usize) -> Annotation {
        let dot = |tag, p: &[i64; 2]| Stroke {
            tag,
            points: vec![*p],
        };
        let mut strokes: Vec<Stroke> = self.fg.iter().map(|p| dot(StrokeTag::Fg, p)).collect();
        strokes.extend(
            self.errors
                .iter()
                .take(count)
                .map(|p| dot(StrokeTag::Fg, p)),
        );
        strokes.extend(self.bg.iter().map(|p| dot(StrokeTag::Bg, p)));
        Annotation {
            kind: AnnotationKind::ScribbleWithErrors,
            strokes,
            rect: None,
            looseness: 0.0,
        }
    }

    /// The clean foreground sample alone.
    pub fn foreground_only(&self) -> Annotation {
        let mut ann = Annotation::scribble(self.fg[..1].to_vec());
        ann.strokes = self
            .fg
            .iter()
            .map(|p| Stroke {
                tag: StrokeTag::Fg,
                points: vec![*p],
            })
            .collect();
        ann
    }
}

/// Background pixels closer than `radius` to the foreground.
pub fn error_zone(truth: &SegmentationMask, radius: f64) -> Vec<usize> {
    let (w, h) = (truth.width() as i64, truth.height() as i64);
    let fg = |x: i64, y: i64| x >= 0 && y >= 0 && x < w && y < h && truth.get(x as u32, y as u32);
    // nearest foreground pixels always lie on the 8-connected rim
    let mut rim = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if fg(x, y) && (-1..=1).any(|dy| (-1..=1).any(|dx| !fg(x + dx, y + dy))) {
                rim.push((x, y));
            }
        }
    }
    let r2 = radius * radius;
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if !fg(x, y)
                && rim
                    .iter()
                    .any(|&(fx, fy)| (((fx - x).pow(2) + (fy - y).pow(2)) as f64) < r2)
            {
                out.push((y * w + x) as usize);
            }
        }
    }
    out
}

pub fn generate_synthetic_scribbles(
    truth: &SegmentationMask,
    protocol: &ScribbleProtocol,
) -> Result<SyntheticScribbles> {
    let w = truth.width() as usize;
    let (fg_pixels, bg_pixels): (Vec<usize>, Vec<usize>) =
        (0..truth.len()).partition(|&p| truth.get((p % w) as u32, (p / w) as u32));
    if fg_pixels.len() < protocol.n_fg || bg_pixels.len() < protocol.n_bg {
        return Err(Error::InvalidArgument(format!(
            "ground truth has {} foreground and {} background pixels; the protocol samples {} and {}",
            fg_pixels.len(),
            bg_pixels.len(),
            protocol.n_fg,
            protocol.n_bg
        )));
    }
    if protocol.error_counts.windows(2).any(|p| p[1] < p[0]) {
        return Err(Error::InvalidArgument(
            "error counts must be non-decreasing".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(protocol.seed);
    let xy = |p: usize| [(p % w) as i64, (p / w) as i64];
    let mut pick = |pool: &[usize], k: usize| -> Vec<[i64; 2]> {
        sample(&mut rng, pool.len(), k)
            .into_iter()
            .map(|i| xy(pool[i]))
            .collect()
    };
    let fg = pick(&fg_pixels, protocol.n_fg);
    let bg = pick(&bg_pixels, protocol.n_bg);

    let diagonal = ((truth.width() as f64).powi(2) + (truth.height() as f64).powi(2)).sqrt();
    let zone = error_zone(
        truth,
        protocol.error_zone_distance_percent / 100.0 * diagonal,
    );
    let wanted = protocol.error_counts.iter().copied().max().unwrap_or(0);
    let mut warnings = Vec::new();
    let take = if zone.len() < wanted {
        let msg = format!(
            "error zone has {} pixels, fewer than the {wanted} requested",
            zone.len()
        );
        log::warn!("{msg}");
        warnings.push(msg);
        zone.len()
    } else {
        wanted
    };
    let errors = pick(&zone, take);
    Ok(SyntheticScribbles {
        fg,
        bg,
        errors,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> SegmentationMask {
        SegmentationMask::from_fn(64, 64, |x, y| {
            (20..44).contains(&x) && (20..44).contains(&y)
        })
    }

    #[test]
    fn counts_and_tags() {
        let p = ScribbleProtocol::default();
        let s = generate_synthetic_scribbles(&square(), &p).unwrap();
        let truth = square();
        let clean = s.with_errors(0);
        assert_eq!(clean.strokes.len(), 100);
        let worst = s.with_errors(50);
        let fg: Vec<_> = worst
            .strokes
            .iter()
            .filter(|s| s.tag == StrokeTag::Fg)
            .collect();
        assert_eq!(fg.len(), 100);
        let wrong = fg
            .iter()
            .filter(|s| !truth.get(s.points[0][0] as u32, s.points[0][1] as u32))
            .count();
        assert_eq!(wrong, 50);
        assert!(worst.validate().is_ok());
        assert_eq!(s.foreground_only().strokes.len(), 50);
        assert!(s.foreground_only().validate().is_ok());
    }

    #[test]
    fn zone_respects_distance() {
        let truth = square();
        let zone = error_zone(&truth, 3.0);
        for p in zone {
            let (x, y) = ((p % 64) as i64, (p / 64) as i64);
            assert!(!truth.get(x as u32, y as u32));
            let dx = (20 - x).max(x - 43).max(0);
            let dy = (20 - y).max(y - 43).max(0);
            assert!(((dx * dx + dy * dy) as f64) < 9.0);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let p = ScribbleProtocol::default();
        let a = generate_synthetic_scribbles(&square(), &p).unwrap();
        let b = generate_synthetic_scribbles(&square(), &p).unwrap();
        assert_eq!(a.with_errors(20), b.with_errors(20));
        let other = ScribbleProtocol { seed: 9, ..p };
        assert_ne!(
            generate_synthetic_scribbles(&square(), &other).unwrap().fg,
            a.fg
        );
    }

    #[test]
    fn small_zone_warns_and_full_foreground_fails() {
        let p = ScribbleProtocol {
            error_zone_distance_percent: 1.0,
            ..Default::default()
        };
        let tiny = SegmentationMask::from_fn(64, 64, |x, y| {
            (10..20).contains(&x) && (10..20).contains(&y)
        });
        let s = generate_synthetic_scribbles(&tiny, &p).unwrap();
        assert_eq!(s.warnings.len(), 1);
        assert!(s.errors.len() < 50);
        let all = SegmentationMask::from_fn(64, 64, |_, _| true);
        assert!(generate_synthetic_scribbles(&all, &p).is_err());
    }
}
