//! Gaussian blurring confined to a face region.
//!
//! The blur is a separable convolution: a horizontal pass over a band of
//! rows feeding a vertical pass that writes only inside the region clipped
//! to the image. Reads clamp to the image edge, so the kernel never invents
//! pixel values; writes never touch pixels outside the clipped region.

use super::{FaceRegion, GeomError, Image};

/// A normalized, symmetric 1D Gaussian kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    weights: Vec<f64>,
}

impl GaussianKernel {
    pub fn radius(&self) -> usize {
        self.weights.len() / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Builds the discrete Gaussian kernel for `sigma`: radius `ceil(3*sigma)`,
/// weights proportional to `exp(-k^2 / (2*sigma^2))`, normalized to sum 1.
pub fn gaussian_kernel(sigma: f64) -> Result<GaussianKernel, GeomError> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(GeomError::BadSigma(sigma));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let denom = 2.0 * sigma * sigma;
    let mut weights: Vec<f64> = (-radius..=radius)
        .map(|k| (-(k * k) as f64 / denom).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }
    Ok(GaussianKernel { weights })
}

/// Gaussian-blurs the part of `image` covered by `region`, leaving every
/// other pixel bit-identical. A region that misses the image entirely
/// returns the input unchanged.
pub fn blur_region(image: &Image, region: &FaceRegion, sigma: f64) -> Result<Image, GeomError> {
    let kernel = gaussian_kernel(sigma)?;
    Ok(blur_region_with_kernel(image, region, &kernel))
}

/// As [`blur_region`] with a prebuilt kernel.
pub fn blur_region_with_kernel(image: &Image, region: &FaceRegion, kernel: &GaussianKernel) -> Image {
    let Some((x0, y0, x1, y1)) = region.clipped_pixel_bounds(image.width(), image.height()) else {
        return image.clone();
    };
    let radius = kernel.radius() as i64;
    let weights = kernel.weights();
    let height = image.height() as i64;

    // Horizontal pass over the band of rows the vertical pass will read:
    // the region rows expanded by the kernel radius, clamped to the image.
    let band_y0 = (y0 as i64 - radius).max(0) as usize;
    let band_y1 = ((y1 as i64 + radius) as usize).min(image.height() - 1);
    let band_rows = band_y1 - band_y0 + 1;
    let region_cols = x1 - x0 + 1;
    let mut horizontal = vec![[0.0f64; 3]; band_rows * region_cols];
    for y in band_y0..=band_y1 {
        for x in x0..=x1 {
            let mut acc = [0.0f64; 3];
            for (i, &w) in weights.iter().enumerate() {
                let sx = x as i64 + i as i64 - radius;
                let px = image.pixel_clamped(sx, y as i64);
                for c in 0..3 {
                    acc[c] += w * px[c] as f64;
                }
            }
            horizontal[(y - band_y0) * region_cols + (x - x0)] = acc;
        }
    }

    // Vertical pass writes only inside the clipped region. Row reads clamp
    // to the image edge, which always lands inside the band.
    let mut out = image.clone();
    for y in y0..=y1 {
        for x in x0..=x1 {
            let mut acc = [0.0f64; 3];
            for (i, &w) in weights.iter().enumerate() {
                let sy = (y as i64 + i as i64 - radius).clamp(0, height - 1) as usize;
                let h = horizontal[(sy - band_y0) * region_cols + (x - x0)];
                for c in 0..3 {
                    acc[c] += w * h[c];
                }
            }
            out.set_pixel(
                x,
                y,
                [
                    acc[0].round().clamp(0.0, 255.0) as u8,
                    acc[1].round().clamp(0.0, 255.0) as u8,
                    acc[2].round().clamp(0.0, 255.0) as u8,
                ],
            );
        }
    }
    out
}
