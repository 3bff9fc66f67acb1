//! The target filter: decides which detected faces are the photo's intended
//! subjects, so blur requests never touch them.
//!
//! Three heuristics vote — the person is smiling, the face is within 10% of
//! the largest face, and the face sits in the central horizontal third — and
//! a face is a target when at least two agree.

use thiserror::Error;

use crate::attributes::AttributeVector;
use crate::facegeom::{blur_square_from_eyes, in_central_region, EyePair, FaceRegion, GeomError};

/// Maximum relative side-length gap to the largest face for the size rule.
pub const SIZE_RULE_TOLERANCE: f64 = 0.10;

/// Rules that must agree before a face counts as a target.
pub const TARGET_RULE_QUORUM: usize = 2;

#[derive(Debug, Error)]
pub enum TargetFilterError {
    #[error("largest face side must be positive, got {0}")]
    BadLargestSide(f64),
    #[error("face {id}: region side {region_side} disagrees with eye-derived side {derived_side}")]
    InconsistentRegion {
        id: String,
        region_side: f64,
        derived_side: f64,
    },
    #[error(transparent)]
    Geometry(#[from] GeomError),
}

/// One face found in a photo: its blur square, eye geometry, predicted
/// matching attributes, and the auxiliary smiling prediction.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectedFace {
    id: String,
    region: FaceRegion,
    eyes: EyePair,
    predicted: AttributeVector,
    smiling: bool,
}

impl DetectedFace {
    /// Builds a face whose region is derived from the eyes, which makes the
    /// region/eyes consistency invariant hold by construction.
    pub fn from_eyes(
        id: impl Into<String>,
        eyes: EyePair,
        predicted: AttributeVector,
        smiling: bool,
    ) -> Result<Self, TargetFilterError> {
        let region = blur_square_from_eyes(&eyes)?;
        Ok(Self {
            id: id.into(),
            region,
            eyes,
            predicted,
            smiling,
        })
    }

    /// Builds a face with an explicit region, rejecting regions that
    /// disagree with the eye geometry by more than 1e-6.
    pub fn new(
        id: impl Into<String>,
        region: FaceRegion,
        eyes: EyePair,
        predicted: AttributeVector,
        smiling: bool,
    ) -> Result<Self, TargetFilterError> {
        let id = id.into();
        let derived = blur_square_from_eyes(&eyes)?;
        let consistent = (derived.side - region.side).abs() <= 1e-6
            && (derived.center.x - region.center.x).abs() <= 1e-6
            && (derived.center.y - region.center.y).abs() <= 1e-6;
        if !consistent {
            return Err(TargetFilterError::InconsistentRegion {
                id,
                region_side: region.side,
                derived_side: derived.side,
            });
        }
        Ok(Self {
            id,
            region,
            eyes,
            predicted,
            smiling,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn region(&self) -> &FaceRegion {
        &self.region
    }

    pub fn eyes(&self) -> &EyePair {
        &self.eyes
    }

    pub fn predicted(&self) -> &AttributeVector {
        &self.predicted
    }

    pub fn smiling(&self) -> bool {
        self.smiling
    }

    /// Face size: the blur-square side length.
    pub fn side(&self) -> f64 {
        self.region.side
    }
}

/// Per-face rule outcomes and the 2-of-3 decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterVerdict {
    pub face_id: String,
    pub rule_smiling: bool,
    pub rule_size: bool,
    pub rule_central: bool,
    pub is_target: bool,
}

impl FilterVerdict {
    pub fn rules_satisfied(&self) -> usize {
        usize::from(self.rule_smiling) + usize::from(self.rule_size) + usize::from(self.rule_central)
    }
}

/// Rule 1: the person is smiling.
pub fn rule_smiling(face: &DetectedFace) -> bool {
    face.smiling
}

/// Rule 2: the face's side is within 10% of the largest face's side.
pub fn rule_size(face: &DetectedFace, largest_side: f64) -> Result<bool, TargetFilterError> {
    if largest_side.is_nan() || largest_side <= 0.0 {
        return Err(TargetFilterError::BadLargestSide(largest_side));
    }
    Ok((largest_side - face.side()) / largest_side <= SIZE_RULE_TOLERANCE)
}

/// Rule 3: the eyes' midpoint sits in the central horizontal third.
pub fn rule_central(face: &DetectedFace, image_width: usize) -> bool {
    in_central_region(image_width, face.eyes.midpoint().x)
}

/// Evaluates all three rules for every face and applies the 2-of-3
/// decision. The largest face in the photo anchors the size rule. Verdicts
/// follow the input order; an empty face list yields no verdicts.
pub fn filter_targets(
    faces: &[DetectedFace],
    image_width: usize,
) -> Result<Vec<FilterVerdict>, TargetFilterError> {
    if faces.is_empty() {
        return Ok(Vec::new());
    }
    let largest_side = faces.iter().map(DetectedFace::side).fold(0.0, f64::max);
    faces
        .iter()
        .map(|face| {
            let smiling = rule_smiling(face);
            let size = rule_size(face, largest_side)?;
            let central = rule_central(face, image_width);
            let satisfied = usize::from(smiling) + usize::from(size) + usize::from(central);
            Ok(FilterVerdict {
                face_id: face.id.clone(),
                rule_smiling: smiling,
                rule_size: size,
                rule_central: central,
                is_target: satisfied >= TARGET_RULE_QUORUM,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{AttributeSchema, AttributeVector};
    use crate::facegeom::Point;

    /// A face whose blur square has side `side`, centered at `center_x`.
    fn face(id: &str, center_x: f64, side: f64, smiling: bool) -> DetectedFace {
        let eye_gap = side / 2.4;
        let eyes = EyePair::new(
            Point::new(center_x - eye_gap / 2.0, 100.0),
            Point::new(center_x + eye_gap / 2.0, 100.0),
        );
        let predicted = AttributeVector::all_positive(AttributeSchema::default_schema());
        DetectedFace::from_eyes(id, eyes, predicted, smiling).unwrap()
    }

    #[test]
    fn smiling_rule_reads_prediction() {
        assert!(rule_smiling(&face("a", 150.0, 50.0, true)));
        assert!(!rule_smiling(&face("a", 150.0, 50.0, false)));
    }

    #[test]
    fn size_rule_thresholds_at_ten_percent() {
        let largest = 100.0;
        assert!(rule_size(&face("a", 0.0, 100.0, false), largest).unwrap());
        assert!(rule_size(&face("a", 0.0, 92.0, false), largest).unwrap());
        assert!(!rule_size(&face("a", 0.0, 85.0, false), largest).unwrap());
        assert!(matches!(
            rule_size(&face("a", 0.0, 50.0, false), 0.0),
            Err(TargetFilterError::BadLargestSide(_))
        ));
    }

    #[test]
    fn central_rule_uses_eye_midpoint() {
        assert!(rule_central(&face("a", 150.0, 40.0, false), 300));
        assert!(!rule_central(&face("a", 30.0, 40.0, false), 300));
    }

    #[test]
    fn single_face_with_all_rules_is_target() {
        let verdicts = filter_targets(&[face("solo", 150.0, 80.0, true)], 300).unwrap();
        assert_eq!(verdicts.len(), 1);
        let v = &verdicts[0];
        assert!(v.rule_smiling && v.rule_size && v.rule_central);
        assert!(v.is_target);
    }

    #[test]
    fn only_size_rule_is_not_enough() {
        // Large face, off-center, not smiling: the observed failure mode
        // where a lone satisfied rule leaves the target undetected.
        let faces = [face("edge", 30.0, 100.0, false)];
        let verdicts = filter_targets(&faces, 300).unwrap();
        let v = &verdicts[0];
        assert!(!v.rule_smiling && v.rule_size && !v.rule_central);
        assert!(!v.is_target);
    }

    #[test]
    fn near_equal_central_faces_are_both_targets() {
        let faces = [
            face("a", 140.0, 100.0, false),
            face("b", 160.0, 95.0, false),
        ];
        let verdicts = filter_targets(&faces, 300).unwrap();
        assert!(verdicts.iter().all(|v| v.is_target));
        assert!(verdicts.iter().all(|v| v.rule_size && v.rule_central));
    }

    #[test]
    fn truth_table_two_of_three() {
        // All 8 rule combinations, built from face geometry: a reference
        // face of side 100 pins the size rule for the probe face.
        for bits in 0..8u8 {
            let smiling = bits & 1 != 0;
            let sized = bits & 2 != 0;
            let central = bits & 4 != 0;
            let probe = face(
                "probe",
                if central { 150.0 } else { 20.0 },
                if sized { 95.0 } else { 80.0 },
                smiling,
            );
            let anchor = face("anchor", 150.0, 100.0, true);
            let verdicts = filter_targets(&[probe, anchor], 300).unwrap();
            let v = &verdicts[0];
            assert_eq!(
                (v.rule_smiling, v.rule_size, v.rule_central),
                (smiling, sized, central)
            );
            let expected = [smiling, sized, central].iter().filter(|&&b| b).count() >= 2;
            assert_eq!(v.is_target, expected, "combination {bits:03b}");
        }
    }

    #[test]
    fn largest_face_always_satisfies_size_rule() {
        let faces = [
            face("small", 10.0, 40.0, false),
            face("big", 20.0, 90.0, false),
            face("mid", 30.0, 60.0, false),
        ];
        let verdicts = filter_targets(&faces, 300).unwrap();
        assert!(verdicts[1].rule_size);
        assert!(!verdicts[0].rule_size);
        assert!(!verdicts[2].rule_size);
    }

    #[test]
    fn verdicts_follow_input_order_and_permute_with_it() {
        let a = face("a", 150.0, 100.0, true);
        let b = face("b", 40.0, 50.0, false);
        let c = face("c", 160.0, 97.0, false);
        let forward = filter_targets(&[a.clone(), b.clone(), c.clone()], 300).unwrap();
        let reversed = filter_targets(&[c, b, a], 300).unwrap();
        assert_eq!(forward.len(), 3);
        assert_eq!(forward[0].face_id, "a");
        assert_eq!(reversed[2].face_id, "a");
        for v in &forward {
            let mirror = reversed.iter().find(|r| r.face_id == v.face_id).unwrap();
            assert_eq!(v, mirror);
        }
    }

    #[test]
    fn empty_input_yields_empty_verdicts() {
        assert!(filter_targets(&[], 300).unwrap().is_empty());
    }

    #[test]
    fn explicit_region_must_match_eyes() {
        let eyes = EyePair::new(Point::new(100.0, 100.0), Point::new(150.0, 100.0));
        let predicted = AttributeVector::all_positive(AttributeSchema::default_schema());
        let good = FaceRegion::new(Point::new(125.0, 100.0), 120.0);
        assert!(DetectedFace::new("x", good, eyes, predicted.clone(), false).is_ok());
        let bad = FaceRegion::new(Point::new(125.0, 100.0), 80.0);
        assert!(matches!(
            DetectedFace::new("x", bad, eyes, predicted, false),
            Err(TargetFilterError::InconsistentRegion { .. })
        ));
    }
}
