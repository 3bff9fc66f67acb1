//! Photographer-side session: request collection, target filtering, match
//! finalization, and blur application.

use std::collections::BTreeMap;

use super::ProtocolError;
use crate::attributes::AttributeVector;
use crate::facegeom::{blur_region_with_kernel, gaussian_kernel, Image};
use crate::target_filter::{filter_targets, DetectedFace, FilterVerdict};

/// Blur strength policy for planned faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaPolicy {
    /// Sigma scales with the face: region side divided by the divisor.
    Scaled { divisor: f64 },
    Fixed(f64),
}

impl Default for SigmaPolicy {
    fn default() -> Self {
        Self::Scaled {
            divisor: crate::facegeom::DEFAULT_SIGMA_DIVISOR,
        }
    }
}

impl SigmaPolicy {
    pub fn sigma_for(&self, region_side: f64) -> f64 {
        match *self {
            Self::Scaled { divisor } => region_side / divisor,
            Self::Fixed(sigma) => sigma,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Fresh,
    Collecting,
    Matching,
    Done,
}

/// Attribute difference between one collected request and one detected
/// face, with the threshold decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchRecord {
    pub requester: String,
    pub face_id: String,
    pub diff: u32,
    pub matched: bool,
}

/// A face to blur and the requesters whose profiles matched it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlurPlanEntry {
    pub face_id: String,
    pub matched_requesters: Vec<String>,
}

/// Faces to blur, in photo face order, each at most once. Target faces
/// never appear.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlurPlan {
    pub entries: Vec<BlurPlanEntry>,
}

impl BlurPlan {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, face_id: &str) -> bool {
        self.entries.iter().any(|e| e.face_id == face_id)
    }
}

/// What happened to an incoming blur request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RequestOutcome {
    Collected,
    /// Arrived after the window closed; ignored but logged.
    Late,
    /// Replaced an earlier request from the same requester.
    Replaced,
}

/// The photographer's per-photo state machine. Requests are accepted only
/// while collecting; matching runs exactly once at window close.
#[derive(Debug, Clone)]
pub struct PhotographerSession {
    id: String,
    photographer: String,
    image_width: usize,
    faces: Vec<DetectedFace>,
    requests: BTreeMap<String, AttributeVector>,
    state: SessionState,
    window_ms: u64,
    window_closes_at: Option<u64>,
    threshold: u32,
}

impl PhotographerSession {
    pub fn new(
        id: impl Into<String>,
        photographer: impl Into<String>,
        image_width: usize,
        faces: Vec<DetectedFace>,
        window_ms: u64,
        threshold: u32,
    ) -> Self {
        Self {
            id: id.into(),
            photographer: photographer.into(),
            image_width,
            faces,
            requests: BTreeMap::new(),
            state: SessionState::Fresh,
            window_ms,
            window_closes_at: None,
            threshold,
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn photographer(&self) -> &str {
        &self.photographer
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn faces(&self) -> &[DetectedFace] {
        &self.faces
    }

    pub fn window_ms(&self) -> u64 {
        self.window_ms
    }

    pub fn window_closes_at(&self) -> Option<u64> {
        self.window_closes_at
    }

    /// Opens the collection window at `now`. With no faces in the photo
    /// there is nothing to protect: the session completes immediately and
    /// reports that no broadcast is needed.
    pub fn begin_collecting(&mut self, now: u64) -> Result<bool, ProtocolError> {
        if self.state != SessionState::Fresh {
            return Err(ProtocolError::SessionReused(self.id.clone()));
        }
        if self.faces.is_empty() {
            self.state = SessionState::Done;
            return Ok(false);
        }
        self.state = SessionState::Collecting;
        self.window_closes_at = Some(now + self.window_ms);
        Ok(true)
    }

    /// Handles a blur request arriving at `arrival`. Accepted while
    /// collecting and no later than the window close; duplicates from the
    /// same requester replace the stored request (last writer wins).
    pub fn on_request(
        &mut self,
        arrival: u64,
        requester: &str,
        attributes: AttributeVector,
    ) -> RequestOutcome {
        let in_window = self.state == SessionState::Collecting
            && self.window_closes_at.is_some_and(|close| arrival <= close);
        if !in_window {
            return RequestOutcome::Late;
        }
        match self.requests.insert(requester.to_string(), attributes) {
            Some(_) => RequestOutcome::Replaced,
            None => RequestOutcome::Collected,
        }
    }

    pub fn collected_requests(&self) -> &BTreeMap<String, AttributeVector> {
        &self.requests
    }

    /// Closes the window: filters targets, compares every collected request
    /// against every detected face, and plans blurring for each matching
    /// non-target face. Runs exactly once.
    pub fn finalize(
        &mut self,
    ) -> Result<(Vec<FilterVerdict>, Vec<MatchRecord>, BlurPlan), ProtocolError> {
        match self.state {
            SessionState::Collecting => {}
            SessionState::Matching | SessionState::Done => {
                return Err(ProtocolError::DoubleFinalize(self.id.clone()))
            }
            SessionState::Fresh => return Err(ProtocolError::NotCollecting(self.id.clone())),
        }
        self.state = SessionState::Matching;

        let verdicts = filter_targets(&self.faces, self.image_width)?;
        let mut matches = Vec::new();
        let mut matched_by: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (requester, attributes) in &self.requests {
            for (face, verdict) in self.faces.iter().zip(&verdicts) {
                let diff = attributes.attribute_diff(face.predicted())?;
                let matched = diff <= self.threshold;
                matches.push(MatchRecord {
                    requester: requester.clone(),
                    face_id: face.id().to_string(),
                    diff,
                    matched,
                });
                if matched && !verdict.is_target {
                    matched_by
                        .entry(face.id().to_string())
                        .or_default()
                        .push(requester.clone());
                }
            }
        }
        // Photo face order; each face at most once however many requests
        // matched it.
        let entries = self
            .faces
            .iter()
            .filter_map(|face| {
                matched_by.remove(face.id()).map(|matched_requesters| BlurPlanEntry {
                    face_id: face.id().to_string(),
                    matched_requesters,
                })
            })
            .collect();
        self.state = SessionState::Done;
        Ok((verdicts, matches, BlurPlan { entries }))
    }
}

/// Blurs every planned face region of `photo`, leaving all other pixels
/// bit-identical. Disjoint regions commute; overlapping planned regions are
/// blurred in plan order.
pub fn apply_blur_plan(
    photo: &Image,
    faces: &[DetectedFace],
    plan: &BlurPlan,
    sigma: SigmaPolicy,
) -> Result<Image, ProtocolError> {
    let mut out = photo.clone();
    for entry in &plan.entries {
        let face = faces
            .iter()
            .find(|f| f.id() == entry.face_id)
            .ok_or_else(|| ProtocolError::UnknownFace(entry.face_id.clone()))?;
        let kernel = gaussian_kernel(sigma.sigma_for(face.region().side))?;
        out = blur_region_with_kernel(&out, face.region(), &kernel);
    }
    Ok(out)
}
