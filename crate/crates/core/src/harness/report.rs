//! Session reports: the per-session record of what the protocol did, the
//! ground-truth outcome flags, and a text persistence format that reloads
//! to an equal in-memory value.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::sync::Arc;

use super::{HarnessError, Scenario};
use crate::attributes::AttributeSchema;
use crate::protocol::{
    BlurPlan, BlurPlanEntry, Disposition, LoggedMessage, MatchRecord, ProtoMessage, ProtocolRun,
};
use crate::target_filter::FilterVerdict;

/// Ground-truth session outcomes, fixed at report-build time when the
/// scenario's role annotations are in hand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OutcomeFlags {
    /// Every in-photo, ground-truth-stranger requester's face landed in the
    /// blur plan (vacuously true when nobody in the photo requested).
    pub all_requesting_strangers_blurred: bool,
    /// Some in-photo face that never requested got blurred.
    pub false_blur: bool,
    /// Every in-photo face's target verdict agrees with ground truth.
    pub filtering_correct: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionReport {
    pub session_index: usize,
    pub session_id: String,
    pub photo_width: usize,
    pub photo_height: usize,
    pub attribute_count: usize,
    pub messages: Vec<LoggedMessage>,
    pub verdicts: Vec<FilterVerdict>,
    pub matches: Vec<MatchRecord>,
    pub plan: BlurPlan,
    /// Agents that emitted a request, sorted, whether or not it arrived.
    pub requesters_sent: Vec<String>,
    /// Requests the photographer collected inside the window, sorted.
    pub collected_requesters: Vec<String>,
    pub output_image: Option<String>,
    pub outcome: OutcomeFlags,
}

/// Assembles the report for one finished run, deriving the outcome flags
/// from the scenario's ground truth.
pub fn build_report(
    scenario: &Scenario,
    index: usize,
    run: &ProtocolRun,
    output_image: Option<String>,
) -> SessionReport {
    let mut requesters_sent: Vec<String> = run
        .messages
        .iter()
        .filter_map(|entry| match (&entry.disposition, &entry.message) {
            (Disposition::Sent, ProtoMessage::BlurRequest { requester, .. }) => {
                Some(requester.clone())
            }
            _ => None,
        })
        .collect();
    requesters_sent.sort();
    requesters_sent.dedup();

    let in_photo: Vec<_> = scenario.faces.iter().filter(|f| f.in_photo).collect();
    let all_requesting_strangers_blurred = requesters_sent
        .iter()
        .filter_map(|r| in_photo.iter().find(|f| &f.person == r))
        .filter(|f| !f.is_target)
        .all(|f| run.plan.contains(&f.person));
    let false_blur = in_photo
        .iter()
        .filter(|f| !requesters_sent.contains(&f.person))
        .any(|f| run.plan.contains(&f.person));
    let filtering_correct = in_photo.iter().all(|f| {
        run.verdicts
            .iter()
            .find(|v| v.face_id == f.person)
            .is_some_and(|v| v.is_target == f.is_target)
    });

    SessionReport {
        session_index: index,
        session_id: run.session_id.clone(),
        photo_width: scenario.photo.width(),
        photo_height: scenario.photo.height(),
        attribute_count: scenario.schema.matching_len(),
        messages: run.messages.clone(),
        verdicts: run.verdicts.clone(),
        matches: run.matches.clone(),
        plan: run.plan.clone(),
        requesters_sent,
        collected_requesters: run.collected_requesters.clone(),
        output_image,
        outcome: OutcomeFlags {
            all_requesting_strangers_blurred,
            false_blur,
            filtering_correct,
        },
    }
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn parse_yn(token: &str) -> Result<bool, HarnessError> {
    match token {
        "yes" => Ok(true),
        "no" => Ok(false),
        other => Err(HarnessError::BadReport(format!(
            "expected yes/no, got `{other}`"
        ))),
    }
}

pub fn write_report<W: Write>(report: &SessionReport, mut w: W) -> Result<(), HarnessError> {
    writeln!(w, "report v1")?;
    writeln!(w, "session {} index {}", report.session_id, report.session_index)?;
    writeln!(w, "photo {} {}", report.photo_width, report.photo_height)?;
    writeln!(w, "attributes {}", report.attribute_count)?;
    writeln!(
        w,
        "outcome protected {} false-blur {} filtering-correct {}",
        yn(report.outcome.all_requesting_strangers_blurred),
        yn(report.outcome.false_blur),
        yn(report.outcome.filtering_correct),
    )?;
    if let Some(image) = &report.output_image {
        writeln!(w, "image {image}")?;
    }
    for requester in &report.requesters_sent {
        writeln!(w, "requested {requester}")?;
    }
    for requester in &report.collected_requesters {
        writeln!(w, "collected {requester}")?;
    }
    for msg in &report.messages {
        writeln!(
            w,
            "msg {} {} {}",
            msg.time_ms,
            msg.disposition.label(),
            msg.message.encode()
        )?;
    }
    for v in &report.verdicts {
        writeln!(
            w,
            "verdict {} smiling {} size {} central {} target {}",
            v.face_id,
            yn(v.rule_smiling),
            yn(v.rule_size),
            yn(v.rule_central),
            yn(v.is_target),
        )?;
    }
    for m in &report.matches {
        writeln!(
            w,
            "match {} {} {} {}",
            m.requester,
            m.face_id,
            m.diff,
            yn(m.matched)
        )?;
    }
    for entry in &report.plan.entries {
        writeln!(
            w,
            "plan {} {}",
            entry.face_id,
            entry.matched_requesters.join(",")
        )?;
    }
    writeln!(w, "end")?;
    Ok(())
}

pub fn save_report<P: AsRef<Path>>(report: &SessionReport, path: P) -> Result<(), HarnessError> {
    let mut file = fs::File::create(path)?;
    write_report(report, &mut file)
}

fn disposition_from(label: &str) -> Result<Disposition, HarnessError> {
    Ok(match label {
        "sent" => Disposition::Sent,
        "dropped" => Disposition::Dropped,
        "delivered" => Disposition::Delivered,
        "ignored-late" => Disposition::IgnoredLate,
        other => {
            return Err(HarnessError::BadReport(format!(
                "unknown disposition `{other}`"
            )))
        }
    })
}

pub fn read_report<R: BufRead>(reader: R) -> Result<SessionReport, HarnessError> {
    let bad = |msg: String| HarnessError::BadReport(msg);
    let mut lines = reader.lines();
    let mut take = || -> Result<String, HarnessError> {
        lines
            .next()
            .transpose()?
            .ok_or_else(|| bad("unexpected end of report".into()))
    };
    if take()?.trim() != "report v1" {
        return Err(bad("missing `report v1` header".into()));
    }

    let session_line = take()?;
    let t: Vec<&str> = session_line.split_whitespace().collect();
    if t.len() != 4 || t[0] != "session" || t[2] != "index" {
        return Err(bad("malformed session line".into()));
    }
    let session_id = t[1].to_string();
    let session_index: usize = t[3].parse().map_err(|_| bad("bad session index".into()))?;

    let photo_line = take()?;
    let t: Vec<&str> = photo_line.split_whitespace().collect();
    if t.len() != 3 || t[0] != "photo" {
        return Err(bad("malformed photo line".into()));
    }
    let photo_width: usize = t[1].parse().map_err(|_| bad("bad width".into()))?;
    let photo_height: usize = t[2].parse().map_err(|_| bad("bad height".into()))?;

    let attr_line = take()?;
    let t: Vec<&str> = attr_line.split_whitespace().collect();
    if t.len() != 2 || t[0] != "attributes" {
        return Err(bad("malformed attributes line".into()));
    }
    let attribute_count: usize = t[1].parse().map_err(|_| bad("bad attribute count".into()))?;
    let schema: Arc<AttributeSchema> = if attribute_count == 16 {
        AttributeSchema::default_schema()
    } else {
        AttributeSchema::synthetic(attribute_count)?
    };

    let outcome_line = take()?;
    let t: Vec<&str> = outcome_line.split_whitespace().collect();
    if t.len() != 7 || t[0] != "outcome" {
        return Err(bad("malformed outcome line".into()));
    }
    let outcome = OutcomeFlags {
        all_requesting_strangers_blurred: parse_yn(t[2])?,
        false_blur: parse_yn(t[4])?,
        filtering_correct: parse_yn(t[6])?,
    };

    let mut output_image = None;
    let mut requesters_sent = Vec::new();
    let mut collected_requesters = Vec::new();
    let mut messages = Vec::new();
    let mut verdicts = Vec::new();
    let mut matches = Vec::new();
    let mut plan = BlurPlan::default();
    let mut saw_end = false;

    for line in lines {
        let line = line?;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        match tokens[0] {
            "image" => {
                output_image = Some(
                    tokens
                        .get(1)
                        .ok_or_else(|| bad("image line missing path".into()))?
                        .to_string(),
                )
            }
            "requested" => requesters_sent.push(
                tokens
                    .get(1)
                    .ok_or_else(|| bad("requested line missing id".into()))?
                    .to_string(),
            ),
            "collected" => collected_requesters.push(
                tokens
                    .get(1)
                    .ok_or_else(|| bad("collected line missing id".into()))?
                    .to_string(),
            ),
            "msg" => {
                if tokens.len() < 4 {
                    return Err(bad("malformed msg line".into()));
                }
                let time_ms: u64 = tokens[1].parse().map_err(|_| bad("bad msg time".into()))?;
                let disposition = disposition_from(tokens[2])?;
                let wire = tokens[3..].join(" ");
                let message = ProtoMessage::decode(&wire, &schema)
                    .map_err(|e| bad(format!("bad wire line: {e}")))?;
                messages.push(LoggedMessage {
                    time_ms,
                    disposition,
                    message,
                });
            }
            "verdict" => {
                if tokens.len() != 10 {
                    return Err(bad("malformed verdict line".into()));
                }
                verdicts.push(FilterVerdict {
                    face_id: tokens[1].to_string(),
                    rule_smiling: parse_yn(tokens[3])?,
                    rule_size: parse_yn(tokens[5])?,
                    rule_central: parse_yn(tokens[7])?,
                    is_target: parse_yn(tokens[9])?,
                });
            }
            "match" => {
                if tokens.len() != 5 {
                    return Err(bad("malformed match line".into()));
                }
                matches.push(MatchRecord {
                    requester: tokens[1].to_string(),
                    face_id: tokens[2].to_string(),
                    diff: tokens[3].parse().map_err(|_| bad("bad diff".into()))?,
                    matched: parse_yn(tokens[4])?,
                });
            }
            "plan" => {
                if tokens.len() != 3 {
                    return Err(bad("malformed plan line".into()));
                }
                plan.entries.push(BlurPlanEntry {
                    face_id: tokens[1].to_string(),
                    matched_requesters: tokens[2].split(',').map(str::to_string).collect(),
                });
            }
            "end" => {
                saw_end = true;
                break;
            }
            other => return Err(bad(format!("unknown report line `{other}`"))),
        }
    }
    if !saw_end {
        return Err(bad("missing `end` line".into()));
    }

    let report = SessionReport {
        session_index,
        session_id,
        photo_width,
        photo_height,
        attribute_count,
        messages,
        verdicts,
        matches,
        plan,
        requesters_sent,
        collected_requesters,
        output_image,
        outcome,
    };
    validate_report(&report)?;
    Ok(report)
}

pub fn load_report<P: AsRef<Path>>(path: P) -> Result<SessionReport, HarnessError> {
    read_report(BufReader::new(fs::File::open(path)?))
}

/// Consistency checks mirroring the protocol invariants: verdict quorums,
/// target immunity, and at-most-once blurring.
fn validate_report(report: &SessionReport) -> Result<(), HarnessError> {
    for v in &report.verdicts {
        let quorum = v.rules_satisfied() >= crate::target_filter::TARGET_RULE_QUORUM;
        if v.is_target != quorum {
            return Err(HarnessError::BadReport(format!(
                "verdict for `{}` breaks the 2-of-3 rule",
                v.face_id
            )));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for entry in &report.plan.entries {
        if !seen.insert(&entry.face_id) {
            return Err(HarnessError::BadReport(format!(
                "face `{}` planned twice",
                entry.face_id
            )));
        }
        let verdict = report
            .verdicts
            .iter()
            .find(|v| v.face_id == entry.face_id)
            .ok_or_else(|| {
                HarnessError::BadReport(format!("planned face `{}` has no verdict", entry.face_id))
            })?;
        if verdict.is_target {
            return Err(HarnessError::BadReport(format!(
                "planned face `{}` is a target",
                entry.face_id
            )));
        }
        if entry.matched_requesters.is_empty() {
            return Err(HarnessError::BadReport(format!(
                "planned face `{}` has no matching requesters",
                entry.face_id
            )));
        }
    }
    Ok(())
}
