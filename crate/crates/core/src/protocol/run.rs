//! One full protocol session: capture, notices, policy decisions, requests,
//! finalization, and blurring, driven by the event queue.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::simnet::SendOutcome;
use super::{
    apply_blur_plan, BlurPlan, Endpoint, Event, MatchRecord, MessageCounters, NetConfig,
    PhotographerSession, ProtoMessage, ProtocolError, RequestOutcome, SigmaPolicy, SimNet,
    StrangerAgent,
};
use crate::facegeom::Image;
use crate::target_filter::{DetectedFace, FilterVerdict};

/// Everything one session needs: the photo, its detected faces, the nearby
/// agents, and the network/window/matching parameters.
#[derive(Debug, Clone)]
pub struct SessionSetup {
    pub session_id: String,
    pub photographer_id: String,
    pub photo: Image,
    pub faces: Vec<DetectedFace>,
    pub agents: Vec<StrangerAgent>,
    pub net: NetConfig,
    pub window_ms: u64,
    pub threshold: u32,
    pub sigma: SigmaPolicy,
    pub network_seed: u64,
    pub policy_seed: u64,
}

/// What happened to a message at a point in simulated time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    Sent,
    Dropped,
    Delivered,
    /// A request that arrived after the window closed.
    IgnoredLate,
}

impl Disposition {
    pub fn label(self) -> &'static str {
        match self {
            Self::Sent => "sent",
            Self::Dropped => "dropped",
            Self::Delivered => "delivered",
            Self::IgnoredLate => "ignored-late",
        }
    }
}

/// One row of the session's message trace.
#[derive(Debug, Clone, PartialEq)]
pub struct LoggedMessage {
    pub time_ms: u64,
    pub disposition: Disposition,
    pub message: ProtoMessage,
}

/// Full artifacts of a finished session.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub session_id: String,
    pub messages: Vec<LoggedMessage>,
    pub verdicts: Vec<FilterVerdict>,
    pub matches: Vec<MatchRecord>,
    pub plan: BlurPlan,
    pub image: Image,
    pub counters: MessageCounters,
    /// Requesters whose requests were collected before the window closed,
    /// sorted by id.
    pub collected_requesters: Vec<String>,
}

/// Runs a session to completion. Fully deterministic for fixed seeds: the
/// network stream drives drops and latencies, the policy stream drives
/// probabilistic request decisions, and all iteration orders are fixed.
pub fn run_session(setup: &SessionSetup) -> Result<ProtocolRun, ProtocolError> {
    let mut agents_by_id: BTreeMap<&str, &StrangerAgent> = BTreeMap::new();
    for agent in &setup.agents {
        agent.policy.validate()?;
        if agents_by_id.insert(agent.id.as_str(), agent).is_some() {
            return Err(ProtocolError::DuplicateAgent(agent.id.clone()));
        }
    }

    let mut net = SimNet::new(setup.net, setup.network_seed)?;
    let mut policy_rng = ChaCha12Rng::seed_from_u64(setup.policy_seed);
    let mut session = PhotographerSession::new(
        &setup.session_id,
        &setup.photographer_id,
        setup.photo.width(),
        setup.faces.clone(),
        setup.window_ms,
        setup.threshold,
    );
    let mut log: Vec<LoggedMessage> = Vec::new();
    let mut finalized = None;
    let mut collected_requesters = Vec::new();

    let broadcast = session.begin_collecting(net.now())?;
    if broadcast {
        for agent in &setup.agents {
            let notice = ProtoMessage::CaptureNotice {
                session: setup.session_id.clone(),
                photographer: setup.photographer_id.clone(),
            };
            send_logged(&mut net, &mut log, Endpoint::Agent(agent.id.clone()), notice);
        }
        let close_at = session.window_closes_at().expect("window opened");
        net.schedule_window_close(setup.session_id.clone(), close_at);
    }

    while let Some((time, event)) = net.pop() {
        match event {
            Event::Deliver { to, message, .. } => {
                let disposition = match (&to, &message) {
                    (Endpoint::Photographer, ProtoMessage::BlurRequest { requester, attributes, .. }) => {
                        match session.on_request(time, requester, attributes.clone()) {
                            RequestOutcome::Collected | RequestOutcome::Replaced => {
                                Disposition::Delivered
                            }
                            RequestOutcome::Late => Disposition::IgnoredLate,
                        }
                    }
                    _ => Disposition::Delivered,
                };
                log.push(LoggedMessage {
                    time_ms: time,
                    disposition,
                    message: message.clone(),
                });
                if disposition == Disposition::Delivered {
                    if let (Endpoint::Agent(agent_id), ProtoMessage::CaptureNotice { .. }) =
                        (&to, &message)
                    {
                        let agent = agents_by_id
                            .get(agent_id.as_str())
                            .expect("notices only go to known agents");
                        if let Some(profile) = agent.on_notice(&mut policy_rng) {
                            let request = ProtoMessage::BlurRequest {
                                session: setup.session_id.clone(),
                                requester: agent.id.clone(),
                                attributes: profile,
                            };
                            send_logged(&mut net, &mut log, Endpoint::Photographer, request);
                        }
                    }
                }
            }
            Event::WindowClose { .. } => {
                collected_requesters = session.collected_requests().keys().cloned().collect();
                finalized = Some(session.finalize()?);
                for agent in &setup.agents {
                    let close = ProtoMessage::SessionClosed {
                        session: setup.session_id.clone(),
                    };
                    send_logged(&mut net, &mut log, Endpoint::Agent(agent.id.clone()), close);
                }
            }
        }
    }

    let (verdicts, matches, plan) = finalized.unwrap_or_default();
    let image = apply_blur_plan(&setup.photo, &setup.faces, &plan, setup.sigma)?;

    Ok(ProtocolRun {
        session_id: setup.session_id.clone(),
        messages: log,
        verdicts,
        matches,
        plan,
        image,
        counters: net.counters(),
        collected_requesters,
    })
}

fn send_logged(
    net: &mut SimNet,
    log: &mut Vec<LoggedMessage>,
    to: Endpoint,
    message: ProtoMessage,
) {
    log.push(LoggedMessage {
        time_ms: net.now(),
        disposition: Disposition::Sent,
        message: message.clone(),
    });
    if net.send(to, message.clone()) == SendOutcome::Dropped {
        log.push(LoggedMessage {
            time_ms: net.now(),
            disposition: Disposition::Dropped,
            message,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attributes::{AttributeSchema, AttributeVector};
    use crate::facegeom::{EyePair, Point};
    use crate::protocol::{LatencyModel, MessageKind, Policy};

    fn face(id: &str, center_x: f64, side: f64, smiling: bool, attrs: &AttributeVector) -> DetectedFace {
        let eye_gap = side / 2.4;
        let eyes = EyePair::new(
            Point::new(center_x - eye_gap / 2.0, 80.0),
            Point::new(center_x + eye_gap / 2.0, 80.0),
        );
        DetectedFace::from_eyes(id, eyes, attrs.clone(), smiling).unwrap()
    }

    fn schema() -> std::sync::Arc<AttributeSchema> {
        AttributeSchema::default_schema()
    }

    fn patterned_photo() -> Image {
        let pixels = (0..320 * 160)
            .map(|i| {
                let v = (i % 251) as u8;
                [v, v.wrapping_add(85), v.wrapping_mul(3)]
            })
            .collect();
        Image::new(320, 160, pixels).unwrap()
    }

    /// One target plus two strangers in the photo; the right stranger's
    /// agent always requests.
    fn setup(network_seed: u64, right_policy: Policy) -> SessionSetup {
        let base = AttributeVector::all_positive(schema());
        let target_attrs = base.clone();
        let left_attrs = base.with_flipped(&[0, 1, 2, 3]);
        let right_attrs = base.with_flipped(&[10, 11, 12, 13]);
        SessionSetup {
            session_id: "s1".into(),
            photographer_id: "photog".into(),
            photo: patterned_photo(),
            faces: vec![
                face("target", 160.0, 90.0, true, &target_attrs),
                face("left", 50.0, 60.0, false, &left_attrs),
                face("right", 270.0, 60.0, false, &right_attrs),
            ],
            agents: vec![
                StrangerAgent::new("left", left_attrs, Policy::Never).unwrap(),
                StrangerAgent::new("right", right_attrs, right_policy).unwrap(),
            ],
            net: NetConfig::fixed(10),
            window_ms: 100,
            threshold: 1,
            sigma: SigmaPolicy::default(),
            network_seed,
            policy_seed: 7,
        }
    }

    #[test]
    fn requesting_stranger_blurred_target_untouched() {
        let run = run_session(&setup(1, Policy::Always)).unwrap();
        assert_eq!(run.collected_requesters, vec!["right".to_string()]);
        assert_eq!(run.plan.entries.len(), 1);
        assert_eq!(run.plan.entries[0].face_id, "right");
        assert!(run.verdicts[0].is_target);
        assert_ne!(run.image, patterned_photo());
        // Exactly one request reached the photographer.
        assert_eq!(run.counters.delivered(MessageKind::Request), 1);
        assert_eq!(run.counters.sent(MessageKind::Notice), 2);
    }

    #[test]
    fn no_requests_means_no_blur() {
        let run = run_session(&setup(1, Policy::Never)).unwrap();
        assert!(run.plan.is_empty());
        assert!(run.collected_requesters.is_empty());
        assert_eq!(run.image, patterned_photo());
    }

    #[test]
    fn identical_seeds_identical_runs() {
        let mut config = setup(42, Policy::WithProbability(0.5));
        config.net = NetConfig {
            latency: LatencyModel::Uniform {
                min_ms: 1,
                max_ms: 60,
            },
            drop_probability: 0.2,
        };
        let a = run_session(&config).unwrap();
        let b = run_session(&config).unwrap();
        assert_eq!(a.messages, b.messages);
        assert_eq!(a.plan, b.plan);
        assert_eq!(a.image, b.image);
        assert_eq!(a.counters, b.counters);
    }

    #[test]
    fn late_request_is_ignored() {
        let mut config = setup(1, Policy::Always);
        config.net = NetConfig::fixed(200);
        config.window_ms = 100;
        let run = run_session(&config).unwrap();
        // Notice arrives at 200, after the close at 100: the agent still
        // answers, but the request lands at 400, far past the window.
        assert!(run.plan.is_empty());
        assert!(run
            .messages
            .iter()
            .any(|m| m.disposition == Disposition::IgnoredLate));
    }

    #[test]
    fn empty_photo_completes_without_messages() {
        let mut config = setup(1, Policy::Always);
        config.faces.clear();
        let run = run_session(&config).unwrap();
        assert!(run.messages.is_empty());
        assert!(run.plan.is_empty());
        assert!(run.verdicts.is_empty());
        assert_eq!(run.counters.sent(MessageKind::Notice), 0);
    }

    #[test]
    fn dropped_notice_prevents_request() {
        let mut config = setup(1, Policy::Always);
        config.agents.truncate(2);
        config.net = NetConfig {
            latency: LatencyModel::Fixed(10),
            drop_probability: 1.0,
        };
        let run = run_session(&config).unwrap();
        assert!(run.plan.is_empty());
        assert_eq!(run.counters.dropped(MessageKind::Notice), 2);
        assert_eq!(run.counters.sent(MessageKind::Request), 0);
    }

    #[test]
    fn broadcast_reaches_every_agent() {
        let mut config = setup(1, Policy::Never);
        let extra = StrangerAgent::new(
            "nearby",
            AttributeVector::all_positive(schema()).with_flipped(&[5, 6, 7]),
            Policy::Never,
        )
        .unwrap();
        config.agents.push(extra);
        let run = run_session(&config).unwrap();
        assert_eq!(run.counters.sent(MessageKind::Notice), 3);
        assert_eq!(run.counters.delivered(MessageKind::Notice), 3);
    }

    #[test]
    fn duplicate_agents_rejected() {
        let mut config = setup(1, Policy::Always);
        let dup = config.agents[0].clone();
        config.agents.push(dup);
        assert!(matches!(
            run_session(&config),
            Err(ProtocolError::DuplicateAgent(_))
        ));
    }

    #[test]
    fn message_conservation_per_kind() {
        let mut config = setup(3, Policy::WithProbability(0.7));
        config.net = NetConfig {
            latency: LatencyModel::Uniform {
                min_ms: 5,
                max_ms: 150,
            },
            drop_probability: 0.4,
        };
        let run = run_session(&config).unwrap();
        for kind in MessageKind::ALL {
            assert_eq!(
                run.counters.sent(kind),
                run.counters.delivered(kind) + run.counters.dropped(kind),
                "kind {}",
                kind.label()
            );
        }
    }
}
