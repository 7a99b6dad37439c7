//! Procedural 128x128 test scenes with exact ground truth.

use image::{Rgb, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::segmentation::{BoxRect, SegmentationMask};

pub const FIXTURE_SIZE: u32 = 128;
/// Margin between the ground-truth bounding box and the baseline box.
pub const BOX_PADDING: i64 = 5;

#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub image: RgbImage,
    pub truth: SegmentationMask,
    /// Tight box around the object plus `BOX_PADDING` on each side.
    pub rect: BoxRect,
}

impl Fixture {
    fn build(
        name: &'static str,
        inside: impl Fn(f64, f64) -> bool,
        mut paint: impl FnMut(u32, u32, bool) -> [u8; 3],
    ) -> Self {
        let n = FIXTURE_SIZE;
        let truth = SegmentationMask::from_fn(n, n, |x, y| inside(x as f64 + 0.5, y as f64 + 0.5));
        let image = RgbImage::from_fn(n, n, |x, y| Rgb(paint(x, y, truth.get(x, y))));
        let rect = bounding_box(&truth)
            .map(|b| {
                BoxRect::new(
                    b.x - BOX_PADDING,
                    b.y - BOX_PADDING,
                    b.w + 2 * BOX_PADDING,
                    b.h + 2 * BOX_PADDING,
                )
                .clamp(n, n)
            })
            .expect("fixtures have a foreground");
        Self {
            name,
            image,
            truth,
            rect,
        }
    }
}

pub fn bounding_box(mask: &SegmentationMask) -> Option<BoxRect> {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for y in 0..mask.height() {
        for x in 0..mask.width() {
            if mask.get(x, y) {
                x0 = x0.min(x);
                y0 = y0.min(y);
                x1 = x1.max(x);
                y1 = y1.max(y);
            }
        }
    }
    (x0 != u32::MAX).then(|| {
        BoxRect::new(
            x0 as i64,
            y0 as i64,
            (x1 - x0 + 1) as i64,
            (y1 - y0 + 1) as i64,
        )
    })
}

fn disk(cx: f64, cy: f64, r: f64) -> impl Fn(f64, f64) -> bool {
    move |x, y| (x - cx).powi(2) + (y - cy).powi(2) <= r * r
}

fn clamp8(v: f64) -> u8 {
    v.round().clamp(0.0, 255.0) as u8
}

pub fn disk_fixture() -> Fixture {
    Fixture::build("disk", disk(64.0, 64.0, 30.0), |_, _, fg| {
        if fg {
            [220, 30, 30]
        } else {
            [30, 40, 200]
        }
    })
}

pub fn fixtures() -> Vec<Fixture> {
    let mut out = vec![disk_fixture()];

    out.push(Fixture::build(
        "ring",
        |x, y| {
            let d = ((x - 64.0).powi(2) + (y - 64.0).powi(2)).sqrt();
            (22.0..=38.0).contains(&d)
        },
        |_, _, fg| if fg { [240, 150, 20] } else { [20, 90, 40] },
    ));

    let (a, b) = (disk(40.0, 48.0, 18.0), disk(88.0, 80.0, 20.0));
    out.push(Fixture::build(
        "two-blobs",
        move |x, y| a(x, y) || b(x, y),
        |_, _, fg| if fg { [230, 220, 40] } else { [110, 40, 140] },
    ));

    out.push(Fixture::build(
        "texture",
        |x, y| (28.0..100.0).contains(&x) && (32.0..96.0).contains(&y),
        |x, y, fg| {
            if fg {
                if (x / 3 + y / 3) % 2 == 0 {
                    [200, 200, 200]
                } else {
                    [60, 60, 60]
                }
            } else {
                [130, 130, 130]
            }
        },
    ));

    out.push(Fixture::build(
        "shaded-ellipse",
        |x, y| ((x - 64.0) / 42.0).powi(2) + ((y - 60.0) / 26.0).powi(2) <= 1.0,
        |x, _, fg| {
            if fg {
                let t = x as f64 / 127.0;
                [clamp8(60.0 + 150.0 * t), clamp8(160.0 + 60.0 * t), 70]
            } else {
                [200, 190, 170]
            }
        },
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(0xf17e);
    out.push(Fixture::build(
        "noisy-disk",
        disk(60.0, 66.0, 32.0),
        move |_, _, fg| {
            let base = if fg {
                [180.0, 60.0, 150.0]
            } else {
                [70.0, 160.0, 170.0]
            };
            base.map(|c| clamp8(c + rng.gen_range(-25.0..25.0)))
        },
    ));

    out.push(Fixture::build(
        "square-on-gradient",
        |x, y| (40.0..88.0).contains(&x) && (44.0..92.0).contains(&y),
        |x, y, fg| {
            if fg {
                [40, 200, 60]
            } else {
                [
                    clamp8(40.0 + 1.4 * x as f64),
                    clamp8(40.0 + 0.6 * y as f64),
                    150,
                ]
            }
        },
    ));

    out.push(Fixture::build(
        "cross",
        |x, y| {
            let (dx, dy) = ((x - 64.0).abs(), (y - 64.0).abs());
            (dx <= 12.0 && dy <= 40.0) || (dy <= 12.0 && dx <= 40.0)
        },
        |_, _, fg| if fg { [245, 245, 245] } else { [25, 25, 25] },
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_shape() {
        let all = fixtures();
        assert_eq!(all.len(), 8);
        for f in &all {
            assert_eq!(f.image.dimensions(), (FIXTURE_SIZE, FIXTURE_SIZE));
            let fg = f.truth.count();
            assert!(fg > 500 && fg < f.truth.len() - 500, "{}", f.name);
            // the baseline box encloses the object with room to spare
            let tight = bounding_box(&f.truth).unwrap();
            assert!(f.rect.x < tight.x && f.rect.y < tight.y);
            assert!(
                f.rect.x + f.rect.w > tight.x + tight.w && f.rect.y + f.rect.h > tight.y + tight.h
            );
        }
        let names: std::collections::BTreeSet<_> = all.iter().map(|f| f.name).collect();
        assert_eq!(names.len(), 8);
    }

    #[test]
    fn deterministic() {
        let a = fixtures();
        let b = fixtures();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.image, y.image);
            assert_eq!(x.truth, y.truth);
        }
    }
}
