//! The classifier prediction path: crop a face square out of the photo,
//! scale it to the network's input size, and classify its attributes.
//!
//! Scenarios normally supply ground-truth-with-noise predictions to keep
//! protocol behavior independent of classifier quality; this path produces
//! the same [`DetectedFace`] contract from pixels instead.

use std::sync::Arc;

use super::HarnessError;
use crate::abcnn::{classify, MicroNetwork};
use crate::attributes::{AttributeSchema, AttributeVector};
use crate::facegeom::{crop_scale_face, FaceRegion, Image};

/// Predicted matching attributes for the face in `region`, plus the
/// auxiliary smiling prediction when the network outputs one.
///
/// The network input must be a flattened square RGB image; its side is
/// derived from the input dimension (the reference convention is 128, so
/// `D = 128 * 128 * 3`). The network may output either the `N` matching
/// attributes alone or `N` plus the auxiliary attributes in schema order.
pub fn predict_face(
    net: &MicroNetwork,
    photo: &Image,
    region: &FaceRegion,
    schema: &Arc<AttributeSchema>,
) -> Result<(AttributeVector, Option<bool>), HarnessError> {
    let input_dim = net.input_dim();
    if input_dim % 3 != 0 {
        return Err(HarnessError::Invalid(format!(
            "classifier input dimension {input_dim} is not an RGB raster"
        )));
    }
    let side = ((input_dim / 3) as f64).sqrt().round() as usize;
    if side * side * 3 != input_dim {
        return Err(HarnessError::Invalid(format!(
            "classifier input dimension {input_dim} is not a square RGB raster"
        )));
    }
    let crop = crop_scale_face(photo, region, side)?;
    let outputs = net.forward(&crop.to_features())?;
    let predictions = classify(&outputs);

    let n = schema.matching_len();
    let aux = schema.auxiliary_names().len();
    let smiling = if predictions.len() == n {
        None
    } else if predictions.len() == n + aux && aux > 0 {
        Some(predictions[n] > 0)
    } else {
        return Err(HarnessError::Invalid(format!(
            "classifier outputs {} attributes but the schema has {n} matching (+{aux} auxiliary)",
            predictions.len()
        )));
    };
    let vector = AttributeVector::new(Arc::clone(schema), predictions[..n].to_vec())?;
    Ok((vector, smiling))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facegeom::Point;

    fn tiny_photo() -> Image {
        let pixels = (0..24 * 24)
            .map(|i| {
                let v = (i * 11 % 256) as u8;
                [v, 255 - v, 128]
            })
            .collect();
        Image::new(24, 24, pixels).unwrap()
    }

    #[test]
    fn zero_network_predicts_all_absent() {
        let schema = AttributeSchema::default_schema();
        // 8x8 RGB input, 16 matching + 1 auxiliary output.
        let net = MicroNetwork::zeroed(&[8 * 8 * 3, 17]).unwrap();
        let region = FaceRegion::new(Point::new(12.0, 12.0), 10.0);
        let (vector, smiling) = predict_face(&net, &tiny_photo(), &region, &schema).unwrap();
        assert!(vector.values().iter().all(|&v| v == -1));
        assert_eq!(smiling, Some(false));
    }

    #[test]
    fn biased_outputs_flip_predictions() {
        let schema = AttributeSchema::default_schema();
        let mut net = MicroNetwork::zeroed(&[8 * 8 * 3, 17]).unwrap();
        // Positive bias on attribute 3 and on the auxiliary output.
        let weight_count = 8 * 8 * 3 * 17;
        net.set_param(weight_count + 3, 5.0);
        net.set_param(weight_count + 16, 5.0);
        let region = FaceRegion::new(Point::new(12.0, 12.0), 10.0);
        let (vector, smiling) = predict_face(&net, &tiny_photo(), &region, &schema).unwrap();
        assert_eq!(vector.values()[3], 1);
        assert_eq!(vector.values()[2], -1);
        assert_eq!(smiling, Some(true));
    }

    #[test]
    fn matching_only_network_gives_no_smiling() {
        let schema = AttributeSchema::default_schema();
        let net = MicroNetwork::zeroed(&[4 * 4 * 3, 16]).unwrap();
        let region = FaceRegion::new(Point::new(12.0, 12.0), 10.0);
        let (vector, smiling) = predict_face(&net, &tiny_photo(), &region, &schema).unwrap();
        assert_eq!(vector.len(), 16);
        assert_eq!(smiling, None);
    }

    #[test]
    fn non_raster_input_rejected() {
        let schema = AttributeSchema::default_schema();
        let net = MicroNetwork::zeroed(&[10, 16]).unwrap();
        let region = FaceRegion::new(Point::new(12.0, 12.0), 10.0);
        assert!(matches!(
            predict_face(&net, &tiny_photo(), &region, &schema),
            Err(HarnessError::Invalid(_))
        ));
        let wrong_outputs = MicroNetwork::zeroed(&[4 * 4 * 3, 5]).unwrap();
        assert!(matches!(
            predict_face(&wrong_outputs, &tiny_photo(), &region, &schema),
            Err(HarnessError::Invalid(_))
        ));
    }
}
