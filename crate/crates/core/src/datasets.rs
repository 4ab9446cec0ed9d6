//! Synthetic dataset generation: random Gaussian-blob classes and
//! confound-generated classes born from two mother images.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{Image, DEFAULT_EPSILON_REL};
use crate::warp;

/// Configuration for the two-class Gaussian-blob dataset: class 0 draws one
/// isotropic blob at a uniform-random position, class 1 the average of two
/// well-separated blobs.
#[derive(Debug, Clone, Copy)]
pub struct SynthConfig {
    /// Square grid size N.
    pub grid: usize,
    /// Gaussian std as a fraction of the unit square.
    pub sigma: f64,
    pub n_per_class: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { grid: 64, sigma: 0.08, n_per_class: 100, seed: 42 }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.grid < 8 {
            return Err(Error::Domain("grid too small".into()));
        }
        if !(self.sigma > 0.0) || !self.sigma.is_finite() {
            return Err(Error::Domain("sigma must be positive".into()));
        }
        // The blob must fit inside the grid with a 3-sigma margin.
        let n = self.grid as f64;
        if 3.0 * self.sigma * n > n / 2.0 {
            return Err(Error::Domain(format!(
                "sigma {} leaves no room for a 3-sigma margin on a {} grid",
                self.sigma, self.grid
            )));
        }
        if self.n_per_class == 0 {
            return Err(Error::Domain("n_per_class must be positive".into()));
        }
        Ok(())
    }
}

/// Images with class labels (and, for confound datasets, per-sample
/// generative parameters).
#[derive(Debug, Clone)]
pub struct ImageDataset {
    pub images: Vec<Image>,
    pub labels: Vec<usize>,
    /// Logged confound parameters per sample, empty for synthetic classes.
    pub params: Vec<Vec<f64>>,
}

// Counter-based sub-seed so generation order (or parallelism) cannot change
// any individual sample.
fn sample_rng(seed: u64, class: usize, index: usize) -> ChaCha8Rng {
    let mut h: u64 = 0x9e3779b97f4a7c15 ^ seed;
    for v in [class as u64, index as u64] {
        h ^= v.wrapping_add(0x9e3779b97f4a7c15).wrapping_add(h << 6).wrapping_add(h >> 2);
        h = h.wrapping_mul(0xbf58476d1ce4e5b9);
    }
    ChaCha8Rng::seed_from_u64(h)
}

fn gaussian_pixels(n: usize, centers: &[(f64, f64)], sigma_px: f64) -> Result<Image> {
    Image::from_fn(n, n, |i, j| {
        centers
            .iter()
            .map(|&(px, py)| {
                let dx = j as f64 - px;
                let dy = i as f64 - py;
                (-(dx * dx + dy * dy) / (2.0 * sigma_px * sigma_px)).exp()
            })
            .sum()
    })?
    .normalize_density(DEFAULT_EPSILON_REL)
}

/// Generates the two-class blob dataset. Blob centers are drawn uniformly in
/// the unit square and mapped to the grid region that keeps a 3-sigma
/// margin; the two class-1 centers are rejected until at least 4 sigma
/// apart.
pub fn gen_synthetic_classes(config: &SynthConfig) -> Result<ImageDataset> {
    config.validate()?;
    let n = config.grid;
    let sigma_px = config.sigma * n as f64;
    let margin = 3.0 * sigma_px;
    let span = (n as f64 - 1.0) - 2.0 * margin;
    let to_px = |u: f64| margin + u * span;

    let mut images = Vec::with_capacity(2 * config.n_per_class);
    let mut labels = Vec::with_capacity(2 * config.n_per_class);
    for idx in 0..config.n_per_class {
        let mut rng = sample_rng(config.seed, 0, idx);
        let mu = (to_px(rng.gen::<f64>()), to_px(rng.gen::<f64>()));
        images.push(gaussian_pixels(n, &[mu], sigma_px)?);
        labels.push(0);
    }
    for idx in 0..config.n_per_class {
        let mut rng = sample_rng(config.seed, 1, idx);
        let mu1 = (rng.gen::<f64>(), rng.gen::<f64>());
        let mut mu2 = (rng.gen::<f64>(), rng.gen::<f64>());
        // Unit-square separation of at least 4 sigma keeps the two modes
        // visually distinct.
        for _ in 0..10_000 {
            let d = ((mu1.0 - mu2.0).powi(2) + (mu1.1 - mu2.1).powi(2)).sqrt();
            if d >= 4.0 * config.sigma {
                break;
            }
            mu2 = (rng.gen::<f64>(), rng.gen::<f64>());
        }
        let c1 = (to_px(mu1.0), to_px(mu1.1));
        let c2 = (to_px(mu2.0), to_px(mu2.1));
        images.push(gaussian_pixels(n, &[c1, c2], sigma_px)?);
        labels.push(1);
    }
    Ok(ImageDataset { images, labels, params: vec![Vec::new(); 2 * config.n_per_class] })
}

/// The confound family applied to mother images.
#[derive(Debug, Clone, Copy)]
pub enum ConfoundFamily {
    /// Shifts drawn uniformly from `[-max_shift, max_shift]^2` pixels.
    Translation { max_shift: f64 },
    /// Mass-preserving scalings with factor uniform in `[min, max]`.
    Scaling { min: f64, max: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct ConfoundConfig {
    pub family: ConfoundFamily,
    pub n_per_class: usize,
    pub seed: u64,
}

// A confound sample is rejected and redrawn when the warp pushes more than
// this fraction of the mass off the grid.
const MAX_MASS_LEAK: f64 = 0.01;
const MAX_REDRAWS: usize = 1_000;

fn apply_confound(mother: &Image, family: ConfoundFamily, rng: &mut ChaCha8Rng) -> Result<(Image, Vec<f64>)> {
    for _ in 0..MAX_REDRAWS {
        let (warped, params) = match family {
            ConfoundFamily::Translation { max_shift } => {
                let x0 = rng.gen_range(-max_shift..=max_shift);
                let y0 = rng.gen_range(-max_shift..=max_shift);
                (warp::shift(mother, x0, y0), vec![x0, y0])
            }
            ConfoundFamily::Scaling { min, max } => {
                let beta = rng.gen_range(min..=max);
                (warp::scale_mass_preserving(mother, beta), vec![beta])
            }
        };
        if warped.mass() >= (1.0 - MAX_MASS_LEAK) * mother.mass() {
            return Ok((warped.normalize_density(DEFAULT_EPSILON_REL)?, params));
        }
    }
    Err(Error::Domain("confound sampling kept leaking mass off the grid".into()))
}

/// Builds two classes by applying independent random confounds to each
/// mother image. For the separability guarantee the mothers must not be
/// related by a map of the same family.
pub fn gen_confound_classes(
    mother_a: &Image,
    mother_b: &Image,
    config: &ConfoundConfig,
) -> Result<ImageDataset> {
    if !mother_a.is_normalized() || !mother_b.is_normalized() {
        return Err(Error::Domain("mother images must be normalized".into()));
    }
    if let ConfoundFamily::Scaling { min, max } = config.family {
        if !(min > 0.0 && max >= min) {
            return Err(Error::Domain("invalid scaling range".into()));
        }
    }
    let mut images = Vec::with_capacity(2 * config.n_per_class);
    let mut labels = Vec::with_capacity(2 * config.n_per_class);
    let mut params = Vec::with_capacity(2 * config.n_per_class);
    for (class, mother) in [(0usize, mother_a), (1, mother_b)] {
        for idx in 0..config.n_per_class {
            let mut rng = sample_rng(config.seed, class, idx);
            let (img, p) = apply_confound(mother, config.family, &mut rng)?;
            images.push(img);
            labels.push(class);
            params.push(p);
        }
    }
    Ok(ImageDataset { images, labels, params })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(n: usize, x0: f64, y0: f64, sigma: f64) -> Image {
        Image::from_fn(n, n, |i, j| {
            let c = (n as f64 - 1.0) / 2.0;
            let x = j as f64 - c;
            let y = c - i as f64;
            (-((x - x0).powi(2) + (y - y0).powi(2)) / (2.0 * sigma * sigma)).exp()
        })
        .unwrap()
        .normalize_density(DEFAULT_EPSILON_REL)
        .unwrap()
    }

    #[test]
    fn synthetic_images_are_normalized() {
        let ds = gen_synthetic_classes(&SynthConfig {
            n_per_class: 10,
            ..SynthConfig::default()
        })
        .unwrap();
        assert_eq!(ds.images.len(), 20);
        for img in &ds.images {
            assert!((img.mass() - 1.0).abs() <= 1e-9);
            assert!(img.is_normalized());
        }
    }

    #[test]
    fn synthetic_generation_is_deterministic() {
        let cfg = SynthConfig { n_per_class: 5, ..SynthConfig::default() };
        let a = gen_synthetic_classes(&cfg).unwrap();
        let b = gen_synthetic_classes(&cfg).unwrap();
        for (x, y) in a.images.iter().zip(&b.images) {
            assert_eq!(x.pixels(), y.pixels());
        }
    }

    #[test]
    fn class_p_is_unimodal() {
        let ds = gen_synthetic_classes(&SynthConfig {
            n_per_class: 8,
            ..SynthConfig::default()
        })
        .unwrap();
        for (img, &label) in ds.images.iter().zip(&ds.labels) {
            if label != 0 {
                continue;
            }
            // 1-px box smoothing, then count strict local maxima.
            let n = img.width();
            let smooth = |i: usize, j: usize| -> f64 {
                let mut acc = 0.0;
                let mut cnt = 0.0;
                for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        let ii = i as i64 + di;
                        let jj = j as i64 + dj;
                        if ii >= 0 && jj >= 0 && (ii as usize) < n && (jj as usize) < n {
                            acc += img.get(ii as usize, jj as usize);
                            cnt += 1.0;
                        }
                    }
                }
                acc / cnt
            };
            let mut maxima = 0;
            let floor = img.pixels().iter().cloned().fold(0.0, f64::max) * 0.05;
            for i in 1..n - 1 {
                for j in 1..n - 1 {
                    let v = smooth(i, j);
                    if v < floor {
                        continue;
                    }
                    let mut is_max = true;
                    for di in -1i64..=1 {
                        for dj in -1i64..=1 {
                            if di == 0 && dj == 0 {
                                continue;
                            }
                            if smooth((i as i64 + di) as usize, (j as i64 + dj) as usize) >= v {
                                is_max = false;
                            }
                        }
                    }
                    if is_max {
                        maxima += 1;
                    }
                }
            }
            assert_eq!(maxima, 1, "class-0 sample should have exactly one mode");
        }
    }

    #[test]
    fn invalid_sigma_rejected() {
        assert!(gen_synthetic_classes(&SynthConfig { sigma: 0.0, ..SynthConfig::default() }).is_err());
        assert!(gen_synthetic_classes(&SynthConfig { sigma: 0.3, ..SynthConfig::default() }).is_err());
    }

    #[test]
    fn translation_confound_moves_centroid_by_logged_shift() {
        let mother = blob(64, 0.0, 0.0, 5.0);
        let (mcx, mcy) = mother.centroid();
        let ds = gen_confound_classes(
            &mother,
            &blob(64, 0.0, 0.0, 8.0),
            &ConfoundConfig {
                family: ConfoundFamily::Translation { max_shift: 8.0 },
                n_per_class: 15,
                seed: 3,
            },
        )
        .unwrap();
        for ((img, &label), p) in ds.images.iter().zip(&ds.labels).zip(&ds.params) {
            if label != 0 {
                continue;
            }
            let (cx, cy) = img.centroid();
            assert!(
                (cx - mcx - p[0]).abs() <= 0.2 && (cy - mcy - p[1]).abs() <= 0.2,
                "centroid ({cx},{cy}) vs logged shift ({}, {})",
                p[0],
                p[1]
            );
        }
    }

    #[test]
    fn unit_scaling_confound_is_identity() {
        let mother = blob(48, 1.0, -2.0, 4.0);
        let ds = gen_confound_classes(
            &mother,
            &mother,
            &ConfoundConfig {
                family: ConfoundFamily::Scaling { min: 1.0, max: 1.0 },
                n_per_class: 2,
                seed: 9,
            },
        )
        .unwrap();
        for (a, b) in ds.images[0].pixels().iter().zip(mother.pixels()) {
            assert!((a - b).abs() <= 1e-9);
        }
    }

    #[test]
    fn composing_shift_parameters_adds() {
        // Structural check on the family algebra: applying shift (a, b) then
        // (c, d) equals applying (a + c, b + d), inverses negate, and convex
        // combinations stay within the parameter box.
        let mother = blob(64, 0.0, 0.0, 5.0);
        let one = warp::shift(&warp::shift(&mother, 2.0, -3.0), 1.5, 4.0);
        let two = warp::shift(&mother, 3.5, 1.0);
        let num: f64 = one.pixels().iter().zip(two.pixels()).map(|(a, b)| (a - b) * (a - b)).sum();
        let den: f64 = two.pixels().iter().map(|b| b * b).sum();
        assert!((num / den).sqrt() <= 1e-6);
        let inv = warp::shift(&warp::shift(&mother, 2.0, -3.0), -2.0, 3.0);
        let num: f64 = inv.pixels().iter().zip(mother.pixels()).map(|(a, b)| (a - b) * (a - b)).sum();
        assert!((num / den).sqrt() <= 1e-6);
    }
}
