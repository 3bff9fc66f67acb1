//! Face crop and rescale for the classifier input.

use super::{FaceRegion, GeomError, Image};

/// Samples `region` of `image` into a square `out_side` x `out_side` image
/// by bilinear interpolation. Parts of the region outside the image clamp
/// to the edge pixels. A region exactly covering the image at equal output
/// size reproduces the input.
pub fn crop_scale_face(
    image: &Image,
    region: &FaceRegion,
    out_side: usize,
) -> Result<Image, GeomError> {
    if !region.side.is_finite() || region.side <= 0.0 {
        return Err(GeomError::DegenerateRegion(region.side));
    }
    if out_side == 0 {
        return Err(GeomError::ZeroOutputSide);
    }
    let origin_x = region.center.x - region.side / 2.0;
    let origin_y = region.center.y - region.side / 2.0;
    let scale = region.side / out_side as f64;

    let mut pixels = Vec::with_capacity(out_side * out_side);
    for oy in 0..out_side {
        // Map output pixel centers into source coordinates, offset so that
        // integer source coordinates address pixel centers.
        let sy = origin_y + (oy as f64 + 0.5) * scale - 0.5;
        for ox in 0..out_side {
            let sx = origin_x + (ox as f64 + 0.5) * scale - 0.5;
            pixels.push(sample_bilinear(image, sx, sy));
        }
    }
    Ok(Image::new(out_side, out_side, pixels).expect("output dimensions positive"))
}

fn sample_bilinear(image: &Image, x: f64, y: f64) -> [u8; 3] {
    let fx = x.floor();
    let fy = y.floor();
    let tx = x - fx;
    let ty = y - fy;
    let x0 = fx as i64;
    let y0 = fy as i64;
    let p00 = image.pixel_clamped(x0, y0);
    let p10 = image.pixel_clamped(x0 + 1, y0);
    let p01 = image.pixel_clamped(x0, y0 + 1);
    let p11 = image.pixel_clamped(x0 + 1, y0 + 1);
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = p00[c] as f64 * (1.0 - tx) + p10[c] as f64 * tx;
        let bottom = p01[c] as f64 * (1.0 - tx) + p11[c] as f64 * tx;
        let v = top * (1.0 - ty) + bottom * ty;
        out[c] = v.round().clamp(0.0, 255.0) as u8;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facegeom::Point;

    #[test]
    fn identity_crop_reproduces_input() {
        let pixels = (0..128 * 128)
            .map(|i| {
                let v = (i * 7 % 256) as u8;
                [v, v.wrapping_add(3), v.wrapping_add(9)]
            })
            .collect();
        let img = Image::new(128, 128, pixels).unwrap();
        let region = FaceRegion::new(Point::new(64.0, 64.0), 128.0);
        let out = crop_scale_face(&img, &region, 128).unwrap();
        assert_eq!(out, img);
    }

    #[test]
    fn uniform_source_stays_uniform() {
        let img = Image::filled(50, 40, [12, 200, 77]).unwrap();
        let region = FaceRegion::new(Point::new(10.0, 30.0), 35.0);
        let out = crop_scale_face(&img, &region, 16).unwrap();
        assert!(out.pixels().iter().all(|&p| p == [12, 200, 77]));
    }

    #[test]
    fn two_by_two_upscale_matches_hand_bilinear() {
        // Source pixels: a=(0,0), b=(1,0), c=(0,1), d=(1,1).
        let (a, b, c, d) = (40.0, 120.0, 200.0, 80.0);
        let img = Image::new(
            2,
            2,
            vec![
                [a as u8, 0, 0],
                [b as u8, 0, 0],
                [c as u8, 0, 0],
                [d as u8, 0, 0],
            ],
        )
        .unwrap();
        let region = FaceRegion::new(Point::new(1.0, 1.0), 2.0);
        let out = crop_scale_face(&img, &region, 4).unwrap();

        // Output pixel centers map to source coordinates -0.25, 0.25, 0.75,
        // 1.25 per axis; clamped bilinear weights computed by hand.
        let coords = [-0.25f64, 0.25, 0.75, 1.25];
        let value = |x: f64, y: f64| -> f64 {
            let cx = x.clamp(0.0, 1.0);
            let cy = y.clamp(0.0, 1.0);
            a * (1.0 - cx) * (1.0 - cy) + b * cx * (1.0 - cy) + c * (1.0 - cx) * cy + d * cx * cy
        };
        for (oy, &sy) in coords.iter().enumerate() {
            for (ox, &sx) in coords.iter().enumerate() {
                let expected = value(sx, sy).round() as u8;
                assert_eq!(
                    out.pixel(ox, oy)[0],
                    expected,
                    "output ({ox},{oy}) from source ({sx},{sy})"
                );
            }
        }
    }

    #[test]
    fn degenerate_region_rejected() {
        let img = Image::filled(8, 8, [0, 0, 0]).unwrap();
        let region = FaceRegion::new(Point::new(4.0, 4.0), 0.0);
        assert!(matches!(
            crop_scale_face(&img, &region, 16),
            Err(GeomError::DegenerateRegion(_))
        ));
        let region = FaceRegion::new(Point::new(4.0, 4.0), 4.0);
        assert!(matches!(
            crop_scale_face(&img, &region, 0),
            Err(GeomError::ZeroOutputSide)
        ));
    }
}
