use crate::error::{Error, Result};
use crate::segmentation::{BoxRect, SegmentationMask};

fn check_shapes(mask: &SegmentationMask, truth: &SegmentationMask) -> Result<()> {
    if !mask.same_shape(truth) {
        return Err(Error::InvalidArgument(format!(
            "mask is {}x{}, ground truth {}x{}",
            mask.width(),
            mask.height(),
            truth.width(),
            truth.height()
        )));
    }
    Ok(())
}

fn overlap(mask: &SegmentationMask, truth: &SegmentationMask) -> (usize, usize, usize) {
    let (mut both, mut m, mut t) = (0, 0, 0);
    for (a, b) in mask.bits().zip(truth.bits()) {
        both += (a && b) as usize;
        m += a as usize;
        t += b as usize;
    }
    (both, m, t)
}

/// Fraction of pixels inside `rect` whose label differs from the truth.
pub fn error_rate(mask: &SegmentationMask, truth: &SegmentationMask, rect: BoxRect) -> Result<f64> {
    check_shapes(mask, truth)?;
    let b = rect.clamp(mask.width(), mask.height());
    if b.area() == 0 {
        return Err(Error::InvalidArgument(
            "error rate over an empty box".into(),
        ));
    }
    let mut wrong = 0usize;
    for y in b.y..b.y + b.h {
        for x in b.x..b.x + b.w {
            wrong += (mask.get(x as u32, y as u32) != truth.get(x as u32, y as u32)) as usize;
        }
    }
    Ok(wrong as f64 / b.area() as f64)
}

/// `|GT & O| / |GT | O|`; two empty masks score 1.
pub fn jaccard(mask: &SegmentationMask, truth: &SegmentationMask) -> Result<f64> {
    check_shapes(mask, truth)?;
    let (both, m, t) = overlap(mask, truth);
    let union = m + t - both;
    if union == 0 {
        log::warn!("jaccard of two empty masks taken as 1");
        return Ok(1.0);
    }
    Ok(both as f64 / union as f64)
}

/// `2 |GT & O| / (|GT| + |O|)`; two empty masks score 1.
pub fn dsc(mask: &SegmentationMask, truth: &SegmentationMask) -> Result<f64> {
    check_shapes(mask, truth)?;
    let (both, m, t) = overlap(mask, truth);
    if m + t == 0 {
        log::warn!("dice of two empty masks taken as 1");
        return Ok(1.0);
    }
    Ok(2.0 * both as f64 / (m + t) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn left_half(w: u32, h: u32) -> SegmentationMask {
        SegmentationMask::from_fn(w, h, |x, _| x < w / 2)
    }

    #[test]
    fn trivial_examples() {
        let gt = left_half(8, 8);
        let full = BoxRect::new(0, 0, 8, 8);
        assert_eq!(error_rate(&gt, &gt, full).unwrap(), 0.0);
        assert_eq!(error_rate(&gt.complement(), &gt, full).unwrap(), 1.0);
        let half_wrong = SegmentationMask::empty(8, 8);
        assert_eq!(error_rate(&half_wrong, &gt, full).unwrap(), 0.5);
        assert!(error_rate(&gt, &gt, BoxRect::new(2, 2, 0, 3)).is_err());

        assert_eq!(jaccard(&gt, &gt).unwrap(), 1.0);
        assert_eq!(jaccard(&gt.complement(), &gt).unwrap(), 0.0);
        assert_eq!(dsc(&gt, &gt).unwrap(), 1.0);
        assert_eq!(dsc(&gt.complement(), &gt).unwrap(), 0.0);

        // equal areas overlapping by half
        let shifted = SegmentationMask::from_fn(8, 8, |x, _| (2..6).contains(&x));
        assert_eq!(jaccard(&shifted, &gt).unwrap(), 1.0 / 3.0);
        assert_eq!(dsc(&shifted, &gt).unwrap(), 0.5);

        let empty = SegmentationMask::empty(8, 8);
        assert_eq!(jaccard(&empty, &empty).unwrap(), 1.0);
        assert_eq!(dsc(&empty, &empty).unwrap(), 1.0);
        assert!(jaccard(&empty, &SegmentationMask::empty(4, 8)).is_err());
    }

    proptest! {
        #[test]
        fn dice_jaccard_identity(bits in proptest::collection::vec(any::<(bool, bool)>(), 64)) {
            let a = SegmentationMask::from_bits(8, 8, bits.iter().map(|p| p.0).collect()).unwrap();
            let b = SegmentationMask::from_bits(8, 8, bits.iter().map(|p| p.1).collect()).unwrap();
            let j = jaccard(&a, &b).unwrap();
            let d = dsc(&a, &b).unwrap();
            prop_assert!((d - 2.0 * j / (1.0 + j)).abs() < 1e-12);
            prop_assert!(d >= j && (0.0..=1.0).contains(&j) && (0.0..=1.0).contains(&d));
            prop_assert_eq!(j, jaccard(&b, &a).unwrap());
        }
    }
}
