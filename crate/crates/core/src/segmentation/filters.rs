//! Leung-Malik filter bank and FFT convolution with replicated borders.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub const LM_SUPPORT: usize = 49;
pub const LM_FILTERS: usize = 48;
const ORIENTATIONS: usize = 6;

/// Square kernel of side `LM_SUPPORT`, row-major, zero mean and unit L1 norm.
#[derive(Debug, Clone)]
pub struct Kernel {
    pub name: String,
    pub taps: Vec<f64>,
}

fn gauss1d(sigma: f64, x: f64, order: u32) -> f64 {
    let var = sigma * sigma;
    let g = (-x * x / (2.0 * var)).exp() / (2.0 * PI * var).sqrt();
    match order {
        0 => g,
        1 => -g * x / var,
        _ => g * (x * x - var) / (var * var),
    }
}

fn normalise(mut taps: Vec<f64>) -> Vec<f64> {
    let mean = taps.iter().sum::<f64>() / taps.len() as f64;
    taps.iter_mut().for_each(|t| *t -= mean);
    let l1: f64 = taps.iter().map(|t| t.abs()).sum();
    if l1 > 0.0 {
        taps.iter_mut().for_each(|t| *t /= l1);
    }
    taps
}

fn grid(mut f: impl FnMut(f64, f64) -> f64) -> Vec<f64> {
    let half = (LM_SUPPORT / 2) as f64;
    let mut taps = Vec::with_capacity(LM_SUPPORT * LM_SUPPORT);
    for r in 0..LM_SUPPORT {
        for c in 0..LM_SUPPORT {
            taps.push(f(c as f64 - half, r as f64 - half));
        }
    }
    taps
}

/// Oriented derivative of an anisotropic Gaussian, elongated 3:1 along the
/// filter axis, differentiated `order` times across it.
fn oriented(scale: f64, angle: f64, order: u32) -> Vec<f64> {
    let (s, c) = angle.sin_cos();
    normalise(grid(|x, y| {
        let u = c * x - s * y;
        let v = s * x + c * y;
        gauss1d(3.0 * scale, u, 0) * gauss1d(scale, v, order)
    }))
}

fn laplacian_of_gaussian(sigma: f64) -> Vec<f64> {
    let var = sigma * sigma;
    let g = grid(|x, y| (-(x * x + y * y) / (2.0 * var)).exp());
    let total: f64 = g.iter().sum();
    let half = (LM_SUPPORT / 2) as f64;
    let taps = g
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = (i % LM_SUPPORT) as f64 - half;
            let y = (i / LM_SUPPORT) as f64 - half;
            v / total * (x * x + y * y - 2.0 * var) / (var * var)
        })
        .collect();
    normalise(taps)
}

fn gaussian(sigma: f64) -> Vec<f64> {
    normalise(grid(|x, y| {
        (-(x * x + y * y) / (2.0 * sigma * sigma)).exp()
    }))
}

/// The 48 LM filters: 18 first- and 18 second-derivative filters (6
/// orientations at scales sqrt(2), 2, 2 sqrt(2)), 8 LoG and 4 Gaussians.
pub fn lm_filter_bank() -> Vec<Kernel> {
    let r2 = 2f64.sqrt();
    let scales = [r2, 2.0, 2.0 * r2];
    let mut bank = Vec::with_capacity(LM_FILTERS);
    for order in [1, 2] {
        for (si, &scale) in scales.iter().enumerate() {
            for o in 0..ORIENTATIONS {
                let angle = PI * o as f64 / ORIENTATIONS as f64;
                bank.push(Kernel {
                    name: format!("d{order}_s{si}_o{o}"),
                    taps: oriented(scale, angle, order),
                });
            }
        }
    }
    let base = [r2, 2.0, 2.0 * r2, 4.0];
    for (i, sigma) in base.iter().chain(base.map(|s| 3.0 * s).iter()).enumerate() {
        bank.push(Kernel {
            name: format!("log_{i}"),
            taps: laplacian_of_gaussian(*sigma),
        });
    }
    for (i, &sigma) in base.iter().enumerate() {
        bank.push(Kernel {
            name: format!("gauss_{i}"),
            taps: gaussian(sigma),
        });
    }
    bank
}

struct Plans {
    row: Arc<dyn Fft<f64>>,
    row_inv: Arc<dyn Fft<f64>>,
    col: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
}

fn fft2(
    data: &mut [Complex64],
    w: usize,
    h: usize,
    row: &Arc<dyn Fft<f64>>,
    col: &Arc<dyn Fft<f64>>,
) {
    for r in data.chunks_exact_mut(w) {
        row.process(r);
    }
    let mut column = vec![Complex64::default(); h];
    for x in 0..w {
        for y in 0..h {
            column[y] = data[y * w + x];
        }
        col.process(&mut column);
        for y in 0..h {
            data[y * w + x] = column[y];
        }
    }
}

/// Convolves a single-channel image with every kernel of the bank.
///
/// The image is padded by half the kernel support with replicated edges, so
/// the circular convolution of the padded array equals linear convolution
/// on the original pixels.
pub struct FilterResponses {
    pub width: usize,
    pub height: usize,
    /// One row-major response plane per kernel.
    pub planes: Vec<Vec<f64>>,
}

pub fn convolve_bank(
    gray: &[f64],
    width: usize,
    height: usize,
    bank: &[Kernel],
) -> FilterResponses {
    let pad = LM_SUPPORT / 2;
    let (pw, ph) = (width + 2 * pad, height + 2 * pad);
    let mut planner = FftPlanner::new();
    let plans = Plans {
        row: planner.plan_fft_forward(pw),
        row_inv: planner.plan_fft_inverse(pw),
        col: planner.plan_fft_forward(ph),
        col_inv: planner.plan_fft_inverse(ph),
    };
    let mut padded = vec![Complex64::default(); pw * ph];
    for y in 0..ph {
        let sy = y.saturating_sub(pad).min(height - 1);
        for x in 0..pw {
            let sx = x.saturating_sub(pad).min(width - 1);
            padded[y * pw + x] = Complex64::new(gray[sy * width + sx], 0.0);
        }
    }
    fft2(&mut padded, pw, ph, &plans.row, &plans.col);

    let scale = 1.0 / (pw * ph) as f64;
    let planes = bank
        .iter()
        .map(|k| {
            let mut spectrum = vec![Complex64::default(); pw * ph];
            for r in 0..LM_SUPPORT {
                for c in 0..LM_SUPPORT {
                    let dy = (r as isize - pad as isize).rem_euclid(ph as isize) as usize;
                    let dx = (c as isize - pad as isize).rem_euclid(pw as isize) as usize;
                    spectrum[dy * pw + dx] += k.taps[r * LM_SUPPORT + c];
                }
            }
            fft2(&mut spectrum, pw, ph, &plans.row, &plans.col);
            spectrum.iter_mut().zip(&padded).for_each(|(s, p)| *s *= p);
            fft2(&mut spectrum, pw, ph, &plans.row_inv, &plans.col_inv);
            let mut out = Vec::with_capacity(width * height);
            for y in 0..height {
                for x in 0..width {
                    out.push(spectrum[(y + pad) * pw + x + pad].re * scale);
                }
            }
            out
        })
        .collect();
    FilterResponses {
        width,
        height,
        planes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct spatial convolution with replicated borders.
    fn direct(gray: &[f64], w: usize, h: usize, k: &Kernel) -> Vec<f64> {
        let pad = (LM_SUPPORT / 2) as isize;
        let mut out = vec![0.0; w * h];
        for y in 0..h as isize {
            for x in 0..w as isize {
                let mut acc = 0.0;
                for r in 0..LM_SUPPORT as isize {
                    for c in 0..LM_SUPPORT as isize {
                        let sy = (y - (r - pad)).clamp(0, h as isize - 1) as usize;
                        let sx = (x - (c - pad)).clamp(0, w as isize - 1) as usize;
                        acc += k.taps[(r * LM_SUPPORT as isize + c) as usize] * gray[sy * w + sx];
                    }
                }
                out[(y * w as isize + x) as usize] = acc;
            }
        }
        out
    }

    #[test]
    fn bank_shape_and_normalisation() {
        let bank = lm_filter_bank();
        assert_eq!(bank.len(), LM_FILTERS);
        for k in &bank {
            assert_eq!(k.taps.len(), LM_SUPPORT * LM_SUPPORT);
            assert!(k.taps.iter().sum::<f64>().abs() < 1e-12, "{}", k.name);
            assert!((k.taps.iter().map(|t| t.abs()).sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_matches_direct_convolution() {
        let (w, h) = (21, 17);
        let gray: Vec<f64> = (0..w * h).map(|i| ((i * 37) % 11) as f64 / 10.0).collect();
        let bank = lm_filter_bank();
        let picks = [&bank[0], &bank[20], &bank[40], &bank[47]];
        let owned: Vec<Kernel> = picks.iter().map(|k| (*k).clone()).collect();
        let fast = convolve_bank(&gray, w, h, &owned);
        for (k, plane) in owned.iter().zip(&fast.planes) {
            let slow = direct(&gray, w, h, k);
            for (a, b) in plane.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-10, "{}: {a} vs {b}", k.name);
            }
        }
    }

    #[test]
    fn constant_image_has_zero_response() {
        let gray = vec![0.4; 20 * 20];
        let r = convolve_bank(&gray, 20, 20, &lm_filter_bank());
        assert!(r.planes.iter().flatten().all(|v| v.abs() < 1e-12));
    }
}
