//! Cooperative photo-privacy engine.
//!
//! A photographer's device detects faces, notifies nearby strangers over a
//! simulated peer-to-peer network, collects blur requests carrying facial
//! attribute vectors, decides which detected faces belong to requesters, and
//! blurs those faces while exempting the photo's intended targets.
//!
//! The crate is organized around that pipeline:
//!
//! - [`attributes`] — binary facial-attribute vectors and threshold matching
//! - [`abcnn`] — the adapted balanced multi-task classifier and its training loop
//! - [`facegeom`] — raster images, blur geometry, Gaussian blurring, crop/scale
//! - [`target_filter`] — the 2-of-3 heuristic exempting intended subjects
//! - [`protocol`] — photographer/stranger state machines over a seeded
//!   discrete-event network
//! - [`harness`] — scenario files, batch simulation, protection metrics

pub mod abcnn;
pub mod attributes;
pub mod facegeom;
pub mod harness;
pub mod protocol;
pub mod target_filter;
