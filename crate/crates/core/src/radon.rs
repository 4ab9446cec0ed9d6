//! Forward Radon transform by nearest-neighbor line integration and inverse
//! Radon transform by ramp-filtered back-projection.

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{Image, Sinogram, DEFAULT_EPSILON_REL};

/// Sampling geometry of the Radon transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RadonConfig {
    /// Number of projection angles over [0°, 180°).
    pub num_angles: usize,
    /// Number of `t` offsets; odd so that `t = 0` is a sample.
    pub t_count: usize,
}

pub const DEFAULT_NUM_ANGLES: usize = 180;

impl RadonConfig {
    pub fn new(num_angles: usize, t_count: usize) -> Result<Self> {
        if num_angles == 0 {
            return Err(Error::Domain("num_angles must be at least 1".into()));
        }
        if t_count < 3 || t_count % 2 == 0 {
            return Err(Error::Domain("t_count must be odd and at least 3".into()));
        }
        Ok(Self { num_angles, t_count })
    }

    /// Default geometry for a W x H image: the `t` range covers the image
    /// diagonal, `t_count = 2 * ceil(sqrt(2) * max(W, H) / 2) + 1`.
    pub fn for_image(width: usize, height: usize, num_angles: usize) -> Result<Self> {
        let half = (std::f64::consts::SQRT_2 * width.max(height) as f64 / 2.0).ceil() as usize;
        Self::new(num_angles, 2 * half + 1)
    }
}

/// Discrete line integrals of a normalized image.
///
/// Each line `t = x cos(theta) + y sin(theta)` is sampled with unit step and
/// nearest-neighbor image lookup. Nearest-neighbor quadrature does not
/// conserve mass exactly, so every projection is rescaled afterwards to the
/// image mass; the equal-mass property across angles is what the per-angle
/// transport construction relies on.
pub fn radon_forward(image: &Image, config: &RadonConfig) -> Result<Sinogram> {
    if !image.is_normalized() && (image.mass() - 1.0).abs() > 1e-9 {
        return Err(Error::Domain("radon_forward requires a unit-mass image".into()));
    }
    let k = config.t_count;
    let half = (k as f64 - 1.0) / 2.0;
    let s_half = half as isize;
    let w = image.width();
    let h = image.height();
    let cx = (w as f64 - 1.0) / 2.0;
    let cy = (h as f64 - 1.0) / 2.0;
    let mass = image.mass();

    let columns: Vec<Vec<f64>> = (0..config.num_angles)
        .into_par_iter()
        .map(|m| {
            let theta = (180.0 * m as f64 / config.num_angles as f64).to_radians();
            let (sin, cos) = theta.sin_cos();
            let mut col = vec![0.0; k];
            for (kk, slot) in col.iter_mut().enumerate() {
                let t = kk as f64 - half;
                let mut acc = 0.0;
                for s in -s_half..=s_half {
                    let s = s as f64;
                    let x = t * cos - s * sin;
                    let y = t * sin + s * cos;
                    let j = (x + cx).round();
                    let i = (cy - y).round();
                    if j >= 0.0 && i >= 0.0 && (j as usize) < w && (i as usize) < h {
                        acc += image.get(i as usize, j as usize);
                    }
                }
                *slot = acc;
            }
            let sum: f64 = col.iter().sum();
            if sum > 0.0 {
                let scale = mass / sum;
                for v in &mut col {
                    *v *= scale;
                }
            }
            col
        })
        .collect();

    let mut values = Vec::with_capacity(k * config.num_angles);
    for col in columns {
        values.extend_from_slice(&col);
    }
    Sinogram::new(k, config.num_angles, values)
}

/// Filtered back-projection.
///
/// Each projection is zero-padded to the next power of two >= 2K, multiplied
/// by the plain ramp `|omega|` in the frequency domain (no apodization), and
/// back-projected with linear interpolation in `t`. Negative values are
/// clamped to zero and the result is renormalized to a strictly positive
/// unit-mass density.
pub fn radon_inverse(sinogram: &Sinogram, out_width: usize, out_height: usize) -> Result<Image> {
    let k = sinogram.t_count();
    let m = sinogram.num_angles();
    let half = (k as f64 - 1.0) / 2.0;
    let diag = (out_width.max(out_height) as f64) * std::f64::consts::SQRT_2 / 2.0;
    if half + 0.5 < diag - 1.0 {
        return Err(Error::Domain(format!(
            "t range (+-{half}) does not cover a {out_width}x{out_height} output"
        )));
    }

    let padded = (2 * k).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(padded);
    let ifft = planner.plan_fft_inverse(padded);

    // Ramp |omega| in cycles per sample, truncated at Nyquist by construction.
    let ramp: Vec<f64> = (0..padded)
        .map(|q| q.min(padded - q) as f64 / padded as f64)
        .collect();

    let filtered: Vec<Vec<f64>> = (0..m)
        .map(|mm| {
            let mut buf: Vec<Complex<f64>> =
                sinogram.column(mm).iter().map(|&v| Complex::new(v, 0.0)).collect();
            buf.resize(padded, Complex::new(0.0, 0.0));
            fft.process(&mut buf);
            for (c, &r) in buf.iter_mut().zip(&ramp) {
                *c *= r;
            }
            ifft.process(&mut buf);
            buf[..k].iter().map(|c| c.re / padded as f64).collect()
        })
        .collect();

    let trig: Vec<(f64, f64)> = (0..m)
        .map(|mm| (180.0 * mm as f64 / m as f64).to_radians().sin_cos())
        .collect();

    let cx = (out_width as f64 - 1.0) / 2.0;
    let cy = (out_height as f64 - 1.0) / 2.0;
    let scale = std::f64::consts::PI / m as f64;
    let pixels: Vec<f64> = (0..out_height * out_width)
        .into_par_iter()
        .map(|idx| {
            let i = idx / out_width;
            let j = idx % out_width;
            let x = j as f64 - cx;
            let y = cy - i as f64;
            let mut acc = 0.0;
            for (proj, &(sin, cos)) in filtered.iter().zip(&trig) {
                let pos = x * cos + y * sin + half;
                if pos >= 0.0 && pos <= (k - 1) as f64 {
                    let k0 = pos.floor() as usize;
                    let frac = pos - k0 as f64;
                    let v = if k0 + 1 < k {
                        proj[k0] * (1.0 - frac) + proj[k0 + 1] * frac
                    } else {
                        proj[k0]
                    };
                    acc += v;
                }
            }
            (acc * scale).max(0.0)
        })
        .collect();

    Image::new(out_width, out_height, pixels)?.normalize_density(DEFAULT_EPSILON_REL)
}
