//! Face geometry and raster operations: blur squares derived from eye
//! positions, Gaussian blurring confined to a region, crop/scale for the
//! classifier input, and the horizontal-trisection position test.

mod blur;
mod crop;
mod image;

pub use blur::{blur_region, blur_region_with_kernel, gaussian_kernel, GaussianKernel};
pub use crop::crop_scale_face;
pub use image::{Image, ImageError};

use thiserror::Error;

/// Side length of the blur square as a multiple of the inter-eye distance.
pub const BLUR_SQUARE_EYE_FACTOR: f64 = 2.4;

/// Classifier input edge length in pixels.
pub const CLASSIFIER_INPUT_SIDE: usize = 128;

/// Default blur strength: sigma is the region side divided by this factor,
/// so masking scales with face size.
pub const DEFAULT_SIGMA_DIVISOR: f64 = 8.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("eyes coincide at ({x}, {y}); face geometry is undefined")]
    CoincidentEyes { x: f64, y: f64 },
    #[error("sigma must be positive and finite, got {0}")]
    BadSigma(f64),
    #[error("face region side must be positive and finite, got {0}")]
    DegenerateRegion(f64),
    #[error("output side must be positive")]
    ZeroOutputSide,
}

/// A point in pixel coordinates. Fractional values are meaningful: eye
/// detections land between pixel centers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn midpoint(self, other: Self) -> Self {
        Self::new((self.x + other.x) / 2.0, (self.y + other.y) / 2.0)
    }
}

/// Detected eye coordinates for one face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EyePair {
    pub left: Point,
    pub right: Point,
}

impl EyePair {
    pub fn new(left: Point, right: Point) -> Self {
        Self { left, right }
    }

    pub fn distance(&self) -> f64 {
        self.left.distance(self.right)
    }

    pub fn midpoint(&self) -> Point {
        self.left.midpoint(self.right)
    }
}

/// An axis-aligned square region, the unit of blurring and cropping. May
/// extend beyond image bounds; users clip at application time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaceRegion {
    pub center: Point,
    pub side: f64,
}

impl FaceRegion {
    pub fn new(center: Point, side: f64) -> Self {
        Self { center, side }
    }

    /// Inclusive pixel-index bounds of the region clipped to a
    /// `width` x `height` image, or `None` when no pixel center falls
    /// inside. A pixel belongs to the region when its center does.
    pub fn clipped_pixel_bounds(
        &self,
        width: usize,
        height: usize,
    ) -> Option<(usize, usize, usize, usize)> {
        if !self.side.is_finite() || self.side <= 0.0 {
            return None;
        }
        let half = self.side / 2.0;
        let x0 = (self.center.x - half - 0.5).ceil().max(0.0);
        let y0 = (self.center.y - half - 0.5).ceil().max(0.0);
        let x1 = (self.center.x + half - 0.5).floor().min(width as f64 - 1.0);
        let y1 = (self.center.y + half - 0.5).floor().min(height as f64 - 1.0);
        if x0 > x1 || y0 > y1 {
            return None;
        }
        Some((x0 as usize, y0 as usize, x1 as usize, y1 as usize))
    }

    /// Default blur strength for this region.
    pub fn default_sigma(&self) -> f64 {
        self.side / DEFAULT_SIGMA_DIVISOR
    }
}

/// Derives the blur square from eye geometry: the side is 2.4 times the
/// inter-eye distance and the center is the eyes' midpoint.
pub fn blur_square_from_eyes(eyes: &EyePair) -> Result<FaceRegion, GeomError> {
    let distance = eyes.distance();
    if distance.is_nan() || distance <= 0.0 {
        return Err(GeomError::CoincidentEyes {
            x: eyes.left.x,
            y: eyes.left.y,
        });
    }
    Ok(FaceRegion::new(
        eyes.midpoint(),
        BLUR_SQUARE_EYE_FACTOR * distance,
    ))
}

/// True when `face_center_x` lies in the middle third of the image width.
/// The middle third is the half-open interval `[w/3, 2w/3)`.
pub fn in_central_region(image_width: usize, face_center_x: f64) -> bool {
    let w = image_width as f64;
    face_center_x >= w / 3.0 && face_center_x < 2.0 * w / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blur_square_horizontal_eyes() {
        let eyes = EyePair::new(Point::new(100.0, 100.0), Point::new(150.0, 100.0));
        let region = blur_square_from_eyes(&eyes).unwrap();
        assert_eq!(region.center, Point::new(125.0, 100.0));
        assert_eq!(region.side, 120.0);
    }

    #[test]
    fn blur_square_vertical_eyes() {
        let eyes = EyePair::new(Point::new(0.0, 0.0), Point::new(0.0, 10.0));
        let region = blur_square_from_eyes(&eyes).unwrap();
        assert_eq!(region.center, Point::new(0.0, 5.0));
        assert_eq!(region.side, 24.0);
    }

    #[test]
    fn coincident_eyes_rejected() {
        let eyes = EyePair::new(Point::new(3.0, 4.0), Point::new(3.0, 4.0));
        assert!(matches!(
            blur_square_from_eyes(&eyes),
            Err(GeomError::CoincidentEyes { .. })
        ));
    }

    #[test]
    fn blur_square_rigid_motion_equivariance() {
        // Side depends only on the eye distance; center is the midpoint.
        let eyes = EyePair::new(Point::new(10.0, 20.0), Point::new(40.0, 60.0));
        let base = blur_square_from_eyes(&eyes).unwrap();
        let shifted = EyePair::new(
            Point::new(10.0 + 7.5, 20.0 - 3.0),
            Point::new(40.0 + 7.5, 60.0 - 3.0),
        );
        let moved = blur_square_from_eyes(&shifted).unwrap();
        assert!((moved.side - base.side).abs() < 1e-12);
        assert!((moved.center.x - (base.center.x + 7.5)).abs() < 1e-12);
        assert!((moved.center.y - (base.center.y - 3.0)).abs() < 1e-12);

        // Rotate the pair 90 degrees about the origin.
        let rotated = EyePair::new(Point::new(-20.0, 10.0), Point::new(-60.0, 40.0));
        let rot = blur_square_from_eyes(&rotated).unwrap();
        assert!((rot.side - base.side).abs() < 1e-12);
    }

    #[test]
    fn central_region_boundaries() {
        assert!(in_central_region(300, 150.0));
        assert!(!in_central_region(300, 99.0));
        assert!(in_central_region(300, 100.0));
        assert!(!in_central_region(300, 200.0));
        assert!(in_central_region(300, 199.999));
    }

    #[test]
    fn clipped_bounds_cover_expected_pixels() {
        let region = FaceRegion::new(Point::new(125.0, 100.0), 120.0);
        let (x0, y0, x1, y1) = region.clipped_pixel_bounds(400, 300).unwrap();
        assert_eq!((x0, y0, x1, y1), (65, 40, 184, 159));
        assert_eq!(x1 - x0 + 1, 120);
        assert_eq!(y1 - y0 + 1, 120);
    }

    #[test]
    fn region_outside_image_clips_to_none() {
        let region = FaceRegion::new(Point::new(-50.0, -50.0), 20.0);
        assert!(region.clipped_pixel_bounds(100, 100).is_none());
        let degenerate = FaceRegion::new(Point::new(10.0, 10.0), 0.0);
        assert!(degenerate.clipped_pixel_bounds(100, 100).is_none());
    }
}
