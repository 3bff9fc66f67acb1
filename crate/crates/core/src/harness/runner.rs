//! Batch execution of a scenario: per-session seed derivation, prediction
//! noise, nearby-requester materialization, and report persistence.

use std::fs;
use std::io::Write;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::report::{build_report, save_report, SessionReport};
use super::{HarnessError, Scenario};
use crate::protocol::{run_session, SessionSetup, SigmaPolicy, StrangerAgent};
use crate::target_filter::DetectedFace;

/// splitmix64: the standard 64-bit finalizer, used to spread base seeds
/// into independent per-session streams.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed for session `index` from a stream's base seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index.wrapping_add(1)))
}

/// Flips `count` distinct attribute positions, chosen from the noise
/// stream, to emulate classifier inconsistency.
fn apply_flip_noise(
    vector: &crate::attributes::AttributeVector,
    count: usize,
    rng: &mut ChaCha12Rng,
) -> crate::attributes::AttributeVector {
    if count == 0 {
        return vector.clone();
    }
    let indices = rand::seq::index::sample(rng, vector.len(), count).into_vec();
    vector.with_flipped(&indices)
}

/// Builds the concrete setup for session `index` of the scenario.
fn materialize_session(
    scenario: &Scenario,
    index: usize,
) -> Result<(SessionSetup, Vec<String>), HarnessError> {
    let mut noise_rng = ChaCha12Rng::seed_from_u64(derive_seed(scenario.seeds.noise, index as u64));

    // Faces first, in annotation order, so flip draws are stable.
    let mut faces: Vec<DetectedFace> = Vec::new();
    for annotation in scenario.faces.iter().filter(|f| f.in_photo) {
        let predicted = apply_flip_noise(&annotation.true_attributes, annotation.flip_count, &mut noise_rng);
        faces.push(DetectedFace::from_eyes(
            annotation.person.clone(),
            annotation.eyes,
            predicted,
            annotation.smiling,
        )?);
    }

    let mut agents: Vec<StrangerAgent> = scenario
        .agents
        .iter()
        .map(|a| StrangerAgent::new(a.person.clone(), a.profile.clone(), a.policy))
        .collect::<Result<_, _>>()?;

    // Nearby requesters drawn from the pool after the face noise, also on
    // the noise stream.
    let mut nearby_ids = Vec::new();
    if let Some(nearby) = &scenario.nearby {
        for j in 0..nearby.count {
            let pick = rand::seq::index::sample(&mut noise_rng, scenario.pool.len(), 1).index(0);
            let id = format!("nearby-{j}");
            nearby_ids.push(id.clone());
            agents.push(StrangerAgent::new(
                id,
                scenario.pool[pick].clone(),
                nearby.policy,
            )?);
        }
    }

    let setup = SessionSetup {
        session_id: format!("session-{index}"),
        photographer_id: scenario.photographer.clone(),
        photo: scenario.photo.clone(),
        faces,
        agents,
        net: scenario.net,
        window_ms: scenario.window_ms,
        threshold: scenario.threshold,
        sigma: SigmaPolicy::default(),
        network_seed: derive_seed(scenario.seeds.network, index as u64),
        policy_seed: derive_seed(scenario.seeds.policy, index as u64),
    };
    Ok((setup, nearby_ids))
}

/// Runs every session of the scenario in memory.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<SessionReport>, HarnessError> {
    let mut reports = Vec::with_capacity(scenario.sessions);
    for index in 0..scenario.sessions {
        let (setup, _) = materialize_session(scenario, index)?;
        let run = run_session(&setup)?;
        reports.push(build_report(scenario, index, &run, None));
    }
    Ok(reports)
}

/// Runs every session, writing one report file and one output image per
/// session plus a metrics summary under `out_dir`.
pub fn run_scenario_to_dir(
    scenario: &Scenario,
    out_dir: &Path,
) -> Result<Vec<SessionReport>, HarnessError> {
    fs::create_dir_all(out_dir)?;
    let mut reports = Vec::with_capacity(scenario.sessions);
    for index in 0..scenario.sessions {
        let (setup, _) = materialize_session(scenario, index)?;
        let run = run_session(&setup)?;
        let image_name = format!("session-{index}.ppm");
        run.image.write_ppm(out_dir.join(&image_name))?;
        let report = build_report(scenario, index, &run, Some(image_name));
        save_report(&report, out_dir.join(format!("session-{index}.report")))?;
        reports.push(report);
    }
    write_summary(&reports, &mut fs::File::create(out_dir.join("summary.txt"))?)?;
    Ok(reports)
}

/// Writes the aggregate metrics over a batch of reports.
pub fn write_summary<W: Write>(reports: &[SessionReport], mut w: W) -> Result<(), HarnessError> {
    writeln!(w, "summary v1")?;
    writeln!(w, "sessions {}", reports.len())?;
    writeln!(
        w,
        "true-protection-rate {}",
        super::true_protection_rate(reports)?
    )?;
    writeln!(
        w,
        "false-protection-rate {}",
        super::false_protection_rate(reports)?
    )?;
    writeln!(
        w,
        "false-filtering-rate {}",
        super::false_filtering_rate(reports)?
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::parse_scenario_str;

    fn v16(head: &str) -> String {
        let mut s = head.to_string();
        while s.len() < 16 {
            s.push('-');
        }
        s
    }

    fn field_scenario(sessions: usize) -> Scenario {
        // Target center, two strangers at the sides; the right stranger
        // always requests.
        let text = format!(
            "scenario v1\n\
             photo synthetic 320 160 200 180 160\n\
             sessions {sessions}\n\
             latency uniform 5 40\n\
             face target eyes 150 80 170 80 attrs {} smiling yes target yes\n\
             face left eyes 34 60 46 60 attrs {}\n\
             face right eyes 274 60 286 60 attrs {}\n\
             agent right profile {} policy always\n\
             agent left profile {} policy never\n",
            v16("+"),
            v16("-+"),
            v16("--+"),
            v16("--+"),
            v16("-+"),
        );
        parse_scenario_str(&text, None, "field").unwrap()
    }

    #[test]
    fn derive_seed_spreads_indices() {
        let a = derive_seed(1, 0);
        let b = derive_seed(1, 1);
        let c = derive_seed(2, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, derive_seed(1, 0));
    }

    #[test]
    fn batch_runs_and_protects_requester() {
        let scenario = field_scenario(5);
        let reports = run_scenario(&scenario).unwrap();
        assert_eq!(reports.len(), 5);
        for report in &reports {
            assert!(report.outcome.all_requesting_strangers_blurred);
            assert!(!report.outcome.false_blur);
            assert!(report.outcome.filtering_correct);
            assert!(report.plan.contains("right"));
            assert!(!report.plan.contains("target"));
            assert!(!report.plan.contains("left"));
        }
    }

    #[test]
    fn sessions_differ_but_batches_repeat() {
        let scenario = field_scenario(3);
        let a = run_scenario(&scenario).unwrap();
        let b = run_scenario(&scenario).unwrap();
        assert_eq!(a, b);
        // Different network seeds per session: message timings differ.
        let times_0: Vec<u64> = a[0].messages.iter().map(|m| m.time_ms).collect();
        let times_1: Vec<u64> = a[1].messages.iter().map(|m| m.time_ms).collect();
        assert_ne!(times_0, times_1);
    }

    #[test]
    fn flip_noise_respects_count() {
        let text = format!(
            "scenario v1\n\
             photo synthetic 320 160 200 180 160\n\
             face solo eyes 150 80 170 80 attrs {} flips 3\n\
             agent other profile {} policy never\n",
            v16("+"),
            v16("-+"),
        );
        let scenario = parse_scenario_str(&text, None, "noise").unwrap();
        let (setup, _) = materialize_session(&scenario, 0).unwrap();
        let truth = &scenario.faces[0].true_attributes;
        let predicted = setup.faces[0].predicted();
        assert_eq!(truth.attribute_diff(predicted).unwrap(), 3);
        // Same session index reproduces the same flips.
        let (again, _) = materialize_session(&scenario, 0).unwrap();
        assert_eq!(again.faces[0].predicted(), predicted);
    }

    #[test]
    fn nearby_agents_drawn_from_pool() {
        let text = format!(
            "scenario v1\n\
             photo synthetic 320 160 200 180 160\n\
             face solo eyes 150 80 170 80 attrs {}\n\
             pool {}\n\
             pool {}\n\
             nearby 4 policy always\n",
            v16("+"),
            v16("-+"),
            v16("--+"),
        );
        let scenario = parse_scenario_str(&text, None, "pool").unwrap();
        let (setup, nearby_ids) = materialize_session(&scenario, 0).unwrap();
        assert_eq!(nearby_ids.len(), 4);
        assert_eq!(setup.agents.len(), 4);
        for agent in &setup.agents {
            assert!(scenario.pool.contains(&agent.profile));
        }
    }

    #[test]
    fn files_written_deterministically() {
        let scenario = field_scenario(2);
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        run_scenario_to_dir(&scenario, dir_a.path()).unwrap();
        run_scenario_to_dir(&scenario, dir_b.path()).unwrap();
        for name in [
            "session-0.report",
            "session-1.report",
            "session-0.ppm",
            "summary.txt",
        ] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "file {name} differs");
        }
    }
}
