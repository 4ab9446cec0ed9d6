//! Core grid types: images, sinograms, transport fields and transform
//! representations.
//!
//! Coordinate convention: pixel (row `i`, column `j`) has center
//! `(x, y) = (j - (W-1)/2, (H-1)/2 - i)` — origin at the image center,
//! y pointing up. The sinogram `t`-axis uses the same unit (1 pixel) and is
//! centered at `t = 0`.

use crate::error::{Error, Result};

/// Dense 2D nonnegative intensity grid.
///
/// When `normalized` is set the pixels sum to one and are strictly positive,
/// i.e. the image is a valid discrete probability density.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
    normalized: bool,
}

impl Image {
    /// Builds an image from row-major pixel data, checking finiteness and
    /// nonnegativity.
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain("image dimensions must be positive".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::Domain(format!(
                "pixel count {} does not match {}x{}",
                pixels.len(),
                width,
                height
            )));
        }
        if pixels.iter().any(|p| !p.is_finite()) {
            return Err(Error::Domain("image contains non-finite pixels".into()));
        }
        if pixels.iter().any(|&p| p < 0.0) {
            return Err(Error::Domain("image contains negative pixels".into()));
        }
        Ok(Self { width, height, pixels, normalized: false })
    }

    /// Builds an image by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for i in 0..height {
            for j in 0..width {
                pixels.push(f(i, j));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    /// Center coordinates `(x, y)` of pixel (row, col), origin at the image
    /// center, y up.
    #[inline]
    pub fn coords(&self, row: usize, col: usize) -> (f64, f64) {
        let cx = (self.width as f64 - 1.0) / 2.0;
        let cy = (self.height as f64 - 1.0) / 2.0;
        (col as f64 - cx, cy - row as f64)
    }

    pub fn mass(&self) -> f64 {
        self.pixels.iter().sum()
    }

    /// Intensity-weighted centroid in centered (x, y) coordinates.
    pub fn centroid(&self) -> (f64, f64) {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut m = 0.0;
        for i in 0..self.height {
            for j in 0..self.width {
                let v = self.get(i, j);
                let (x, y) = self.coords(i, j);
                sx += v * x;
                sy += v * y;
                m += v;
            }
        }
        (sx / m, sy / m)
    }

    /// Turns the image into a strictly positive unit-mass density.
    ///
    /// A uniform offset `eps = epsilon_rel * mean(positive pixels)` is added
    /// before renormalization so every output pixel is strictly positive,
    /// which the downstream transport-map construction requires.
    pub fn normalize_density(&self, epsilon_rel: f64) -> Result<Image> {
        let positive: Vec<f64> = self.pixels.iter().copied().filter(|&p| p > 0.0).collect();
        if positive.is_empty() {
            return Err(Error::DegenerateInput("all-zero image cannot be normalized".into()));
        }
        let eps = epsilon_rel * positive.iter().sum::<f64>() / positive.len() as f64;
        let total: f64 = self.pixels.iter().map(|p| p + eps).sum();
        let pixels: Vec<f64> = self.pixels.iter().map(|p| (p + eps) / total).collect();
        let normalized = pixels.iter().all(|&p| p > 0.0);
        Ok(Image { width: self.width, height: self.height, pixels, normalized })
    }
}

/// Default relative regularization used when normalizing densities.
pub const DEFAULT_EPSILON_REL: f64 = 1e-8;

/// Radon transform of an image, sampled on a regular `(t, theta)` grid.
///
/// `t` has `t_count` equally spaced offsets (spacing 1 pixel) centered at 0;
/// angles are `num_angles` values equally spaced over `[0°, 180°)`. Values are
/// stored with `t` varying fastest (one contiguous column per angle).
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    t_count: usize,
    num_angles: usize,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn new(t_count: usize, num_angles: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(t_count, num_angles, &values)?;
        if values.iter().any(|&v| !v.is_finite() || v < 0.0) {
            return Err(Error::Domain("sinogram values must be finite and nonnegative".into()));
        }
        Ok(Self { t_count, num_angles, values })
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Offset of the k-th `t` sample in pixels.
    #[inline]
    pub fn t_sample(&self, k: usize) -> f64 {
        k as f64 - (self.t_count as f64 - 1.0) / 2.0
    }

    /// Angle of projection `m` in degrees.
    #[inline]
    pub fn angle_deg(&self, m: usize) -> f64 {
        180.0 * m as f64 / self.num_angles as f64
    }

    /// Projection at angle index `m` as a contiguous slice over `t`.
    pub fn column(&self, m: usize) -> &[f64] {
        &self.values[m * self.t_count..(m + 1) * self.t_count]
    }

    /// Mass of one projection (spacing is 1 pixel, so a plain sum).
    pub fn column_mass(&self, m: usize) -> f64 {
        self.column(m).iter().sum()
    }
}

/// Per-angle monotone transport maps `f(t, theta)` on a sinogram grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportField {
    t_count: usize,
    num_angles: usize,
    values: Vec<f64>,
}

impl TransportField {
    pub fn new(t_count: usize, num_angles: usize, values: Vec<f64>) -> Result<Self> {
        check_grid(t_count, num_angles, &values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("transport field values must be finite".into()));
        }
        for m in 0..num_angles {
            let col = &values[m * t_count..(m + 1) * t_count];
            if col.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Domain(format!(
                    "transport map at angle index {m} is not nondecreasing"
                )));
            }
        }
        Ok(Self { t_count, num_angles, values })
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, m: usize) -> &[f64] {
        &self.values[m * self.t_count..(m + 1) * self.t_count]
    }
}

/// The transform of an image with respect to a fixed template, on the same
/// `(t, theta)` grid as the template's sinogram. Values may be negative.
#[derive(Debug, Clone, PartialEq)]
pub struct RcdtRepresentation {
    t_count: usize,
    num_angles: usize,
    values: Vec<f64>,
    template_hash: u64,
}

impl RcdtRepresentation {
    pub fn new(t_count: usize, num_angles: usize, values: Vec<f64>, template_hash: u64) -> Result<Self> {
        check_grid(t_count, num_angles, &values)?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("representation values must be finite".into()));
        }
        Ok(Self { t_count, num_angles, values, template_hash })
    }

    pub fn t_count(&self) -> usize {
        self.t_count
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn template_hash(&self) -> u64 {
        self.template_hash
    }

    pub fn column(&self, m: usize) -> &[f64] {
        &self.values[m * self.t_count..(m + 1) * self.t_count]
    }

    /// Pointwise linear combination `(1 - alpha) * self + alpha * other`.
    pub fn lerp(&self, other: &RcdtRepresentation, alpha: f64) -> Result<RcdtRepresentation> {
        if self.template_hash != other.template_hash {
            return Err(Error::TemplateMismatch {
                expected: self.template_hash,
                found: other.template_hash,
            });
        }
        if self.t_count != other.t_count || self.num_angles != other.num_angles {
            return Err(Error::Domain("representation grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
            .collect();
        RcdtRepresentation::new(self.t_count, self.num_angles, values, self.template_hash)
    }
}

fn check_grid(t_count: usize, num_angles: usize, values: &[f64]) -> Result<()> {
    if t_count == 0 || num_angles == 0 {
        return Err(Error::Domain("grid dimensions must be positive".into()));
    }
    if values.len() != t_count * num_angles {
        return Err(Error::Domain(format!(
            "value count {} does not match {}x{}",
            values.len(),
            t_count,
            num_angles
        )));
    }
    Ok(())
}

/// 64-bit FNV-1a over the image dimensions and raw pixel bytes; identifies
/// the template an RCDT representation was taken against.
pub fn pixel_hash(image: &Image) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
    };
    eat(&(image.width() as u64).to_le_bytes());
    eat(&(image.height() as u64).to_le_bytes());
    for p in image.pixels() {
        eat(&p.to_le_bytes());
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_uniform_image() {
        let img = Image::new(4, 4, vec![1.0; 16]).unwrap();
        let n = img.normalize_density(DEFAULT_EPSILON_REL).unwrap();
        for &p in n.pixels() {
            assert!((p - 1.0 / 16.0).abs() < 1e-12);
        }
        assert!((n.mass() - 1.0).abs() < 1e-12);
        assert!(n.is_normalized());
    }

    #[test]
    fn normalize_all_zero_is_degenerate() {
        let img = Image::new(3, 3, vec![0.0; 9]).unwrap();
        assert!(matches!(img.normalize_density(1e-8), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn normalize_without_epsilon_is_exact() {
        let img = Image::new(2, 1, vec![1.0, 3.0]).unwrap();
        let n = img.normalize_density(0.0).unwrap();
        assert_eq!(n.pixels(), &[0.25, 0.75]);
    }

    #[test]
    fn negative_pixels_rejected() {
        assert!(Image::new(2, 1, vec![1.0, -0.5]).is_err());
        assert!(Image::new(2, 1, vec![1.0, f64::NAN]).is_err());
    }

    #[test]
    fn normalize_is_idempotent_when_already_unit_mass() {
        let img = Image::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let once = img.normalize_density(0.0).unwrap();
        let twice = once.normalize_density(0.0).unwrap();
        for (a, b) in once.pixels().iter().zip(twice.pixels()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn coordinate_convention_is_centered_y_up() {
        let img = Image::new(5, 5, vec![0.0; 25]).unwrap();
        assert_eq!(img.coords(2, 2), (0.0, 0.0));
        assert_eq!(img.coords(0, 4), (2.0, 2.0));
        assert_eq!(img.coords(4, 0), (-2.0, -2.0));
    }

    #[test]
    fn transport_field_rejects_decreasing_columns() {
        assert!(TransportField::new(3, 1, vec![0.0, 1.0, 0.5]).is_err());
        assert!(TransportField::new(3, 1, vec![0.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn pixel_hash_distinguishes_images() {
        let a = Image::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let b = Image::new(2, 2, vec![0.1, 0.2, 0.3, 0.5]).unwrap();
        assert_ne!(pixel_hash(&a), pixel_hash(&b));
        assert_eq!(pixel_hash(&a), pixel_hash(&a.clone()));
    }
}
