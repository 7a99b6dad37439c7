//! sRGB to CIE L*a*b* (D65) and HSV, on 8-bit input.

fn linearize(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

fn lab_f(t: f64) -> f64 {
    const DELTA: f64 = 6.0 / 29.0;
    if t > DELTA * DELTA * DELTA {
        t.cbrt()
    } else {
        t / (3.0 * DELTA * DELTA) + 4.0 / 29.0
    }
}

/// Returns `(L, a, b)` with `L` in `[0, 100]`.
pub fn rgb_to_lab(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| linearize(c as f64 / 255.0));
    let x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    let y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    let z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    let (fx, fy, fz) = (lab_f(x / 0.95047), lab_f(y), lab_f(z / 1.08883));
    [116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)]
}

/// Returns `(h, s, v)` with `h` in degrees `[0, 360)` and `s, v` in `[0, 1]`.
pub fn rgb_to_hsv(rgb: [u8; 3]) -> [f64; 3] {
    let [r, g, b] = rgb.map(|c| c as f64 / 255.0);
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let d = max - min;
    let h = if d == 0.0 {
        0.0
    } else if max == r {
        60.0 * ((g - b) / d).rem_euclid(6.0)
    } else if max == g {
        60.0 * ((b - r) / d + 2.0)
    } else {
        60.0 * ((r - g) / d + 4.0)
    };
    let s = if max == 0.0 { 0.0 } else { d / max };
    [h, s, max]
}

/// Lab scaled into `[0, 1]`: `L/100`, `(a + 128)/255`, `(b + 128)/255`.
pub fn lab_unit(lab: [f64; 3]) -> [f64; 3] {
    [
        (lab[0] / 100.0).clamp(0.0, 1.0),
        ((lab[1] + 128.0) / 255.0).clamp(0.0, 1.0),
        ((lab[2] + 128.0) / 255.0).clamp(0.0, 1.0),
    ]
}

pub fn hsv_unit(hsv: [f64; 3]) -> [f64; 3] {
    [hsv[0] / 360.0, hsv[1], hsv[2]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: [f64; 3], b: [f64; 3], tol: f64) -> bool {
        a.iter().zip(&b).all(|(x, y)| (x - y).abs() < tol)
    }

    #[test]
    fn lab_reference_values() {
        assert!(close(rgb_to_lab([255, 255, 255]), [100.0, 0.0, 0.0], 1e-3));
        assert!(close(rgb_to_lab([0, 0, 0]), [0.0, 0.0, 0.0], 1e-9));
        // Published sRGB red: L 53.24, a 80.09, b 67.20
        assert!(close(rgb_to_lab([255, 0, 0]), [53.24, 80.09, 67.20], 0.02));
        assert!(close(
            rgb_to_lab([0, 0, 255]),
            [32.30, 79.19, -107.86],
            0.02
        ));
    }

    #[test]
    fn hsv_reference_values() {
        assert_eq!(rgb_to_hsv([255, 0, 0]), [0.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 255, 0]), [120.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([0, 0, 255]), [240.0, 1.0, 1.0]);
        assert_eq!(rgb_to_hsv([128, 128, 128])[..2], [0.0, 0.0]);
        let magenta = rgb_to_hsv([255, 0, 255]);
        assert!((magenta[0] - 300.0).abs() < 1e-9);
    }

    #[test]
    fn unit_ranges() {
        for rgb in [
            [0, 0, 0],
            [255, 255, 255],
            [255, 0, 0],
            [0, 255, 0],
            [0, 0, 255],
            [17, 200, 90],
        ] {
            for v in lab_unit(rgb_to_lab(rgb))
                .into_iter()
                .chain(hsv_unit(rgb_to_hsv(rgb)))
            {
                assert!((0.0..=1.0).contains(&v));
            }
        }
    }
}
