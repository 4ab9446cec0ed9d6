//! Image-space warps: translation, mass-preserving scaling, and rotation.
//!
//! All warps sample the input with bilinear interpolation in the centered
//! (x, y) coordinate frame and fill with zero outside the grid. Outputs are
//! raw intensity grids; callers renormalize as needed.

use crate::grid::Image;

fn bilinear(image: &Image, x: f64, y: f64) -> f64 {
    let cx = (image.width() as f64 - 1.0) / 2.0;
    let cy = (image.height() as f64 - 1.0) / 2.0;
    let col = x + cx;
    let row = cy - y;
    if col < 0.0 || row < 0.0 || col > (image.width() - 1) as f64 || row > (image.height() - 1) as f64 {
        return 0.0;
    }
    let j0 = (col.floor() as usize).min(image.width().saturating_sub(2));
    let i0 = (row.floor() as usize).min(image.height().saturating_sub(2));
    let fx = col - j0 as f64;
    let fy = row - i0 as f64;
    let v00 = image.get(i0, j0);
    let v01 = image.get(i0, j0 + 1);
    let v10 = image.get(i0 + 1, j0);
    let v11 = image.get(i0 + 1, j0 + 1);
    v00 * (1.0 - fx) * (1.0 - fy) + v01 * fx * (1.0 - fy) + v10 * (1.0 - fx) * fy + v11 * fx * fy
}

/// `J(x, y) = I(x - x0, y - y0)`.
pub fn shift(image: &Image, x0: f64, y0: f64) -> Image {
    Image::from_fn(image.width(), image.height(), |i, j| {
        let (x, y) = image.coords(i, j);
        bilinear(image, x - x0, y - y0)
    })
    .expect("bilinear samples of a valid image are valid")
}

/// Mass-preserving scaling `J(x, y) = alpha^2 I(alpha x, alpha y)`.
pub fn scale_mass_preserving(image: &Image, alpha: f64) -> Image {
    Image::from_fn(image.width(), image.height(), |i, j| {
        let (x, y) = image.coords(i, j);
        alpha * alpha * bilinear(image, alpha * x, alpha * y)
    })
    .expect("bilinear samples of a valid image are valid")
}

/// Rotation by `phi` degrees counterclockwise about the image center.
pub fn rotate(image: &Image, phi_deg: f64) -> Image {
    let (sin, cos) = phi_deg.to_radians().sin_cos();
    Image::from_fn(image.width(), image.height(), |i, j| {
        let (x, y) = image.coords(i, j);
        bilinear(image, x * cos + y * sin, -x * sin + y * cos)
    })
    .expect("bilinear samples of a valid image are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::DEFAULT_EPSILON_REL;

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
    fn shift_moves_centroid() {
        let img = blob(64, 0.0, 0.0, 4.0);
        let moved = shift(&img, 3.0, -2.0).normalize_density(0.0).unwrap();
        let (cx, cy) = moved.centroid();
        assert!((cx - 3.0).abs() <= 0.1 && (cy + 2.0).abs() <= 0.1, "centroid ({cx},{cy})");
    }

    #[test]
    fn unit_scaling_is_identity() {
        let img = blob(32, 2.0, -1.0, 3.0);
        let scaled = scale_mass_preserving(&img, 1.0);
        for (a, b) in img.pixels().iter().zip(scaled.pixels()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_shrinks_spread() {
        let img = blob(96, 0.0, 0.0, 8.0);
        let scaled = scale_mass_preserving(&img, 2.0).normalize_density(0.0).unwrap();
        // Second moment oracle: std should halve.
        let spread = |im: &Image| -> f64 {
            let mut acc = 0.0;
            for i in 0..im.height() {
                for j in 0..im.width() {
                    let (x, y) = im.coords(i, j);
                    acc += im.get(i, j) * (x * x + y * y);
                }
            }
            (acc / 2.0).sqrt()
        };
        let s0 = spread(&img.normalize_density(0.0).unwrap());
        let s1 = spread(&scaled);
        assert!((s1 - s0 / 2.0).abs() <= 0.03 * s0, "spread {s1} vs {}", s0 / 2.0);
    }

    #[test]
    fn rotation_preserves_radius() {
        let img = blob(64, 10.0, 0.0, 3.0);
        let rot = rotate(&img, 90.0).normalize_density(0.0).unwrap();
        let (cx, cy) = rot.centroid();
        // J(x,y) = I(x cos + y sin, -x sin + y cos) carries (10, 0) to (0, 10).
        assert!((cx - 0.0).abs() <= 0.2 && (cy - 10.0).abs() <= 0.2, "centroid ({cx},{cy})");
    }
}
