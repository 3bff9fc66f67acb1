//! The scenario file: a line-oriented, human-writable script of one world.
//!
//! ```text
//! scenario v1
//! photo synthetic 320 160 200 180 160      # width height r g b
//! # photo file ./photo.ppm                 # alternative: load a PPM
//! photographer photog
//! sessions 100
//! threshold 1
//! window 500
//! latency uniform 5 50                     # or: latency fixed 10
//! drop 0
//! seed network 1
//! seed policy 2
//! seed noise 3
//! face carol eyes 150 75 170 75 attrs ++-...- smiling yes target yes
//! face dave eyes 40 60 52 60 attrs -+-...+ flips 1
//! agent dave profile -+-...+ policy always
//! pool +-+...-
//! nearby 3 policy always
//! ```
//!
//! `face` flags default to `smiling no`, `target no`, `inphoto yes`,
//! `flips 0`. Vector length is fixed by the first vector in the file; a
//! 16-entry vector binds to the default schema. `nearby` agents are drawn
//! per session from the `pool` lines with the noise stream and never appear
//! in the photo.

use std::fs;
use std::path::Path;
use std::sync::Arc;

use super::HarnessError;
use crate::attributes::{AttributeSchema, AttributeVector};
use crate::facegeom::{EyePair, Image, Point};
use crate::protocol::{LatencyModel, NetConfig, Policy, DEFAULT_WINDOW_MS};

/// Base seeds for the three randomness streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScenarioSeeds {
    pub network: u64,
    pub policy: u64,
    pub noise: u64,
}

impl Default for ScenarioSeeds {
    fn default() -> Self {
        Self {
            network: 1,
            policy: 2,
            noise: 3,
        }
    }
}

/// One annotated face: who it is, where the eyes are, the ground-truth
/// role, the true attribute vector, and how much prediction noise to apply.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceAnnotation {
    pub person: String,
    pub eyes: EyePair,
    pub true_attributes: AttributeVector,
    pub smiling: bool,
    pub is_target: bool,
    pub in_photo: bool,
    pub flip_count: usize,
}

/// A declared nearby agent.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub person: String,
    pub profile: AttributeVector,
    pub policy: Policy,
}

/// Per-session extra requesters drawn from the profile pool.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearbySpec {
    pub count: usize,
    pub policy: Policy,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub photo: Image,
    pub photographer: String,
    pub faces: Vec<FaceAnnotation>,
    pub agents: Vec<AgentSpec>,
    pub pool: Vec<AttributeVector>,
    pub nearby: Option<NearbySpec>,
    pub net: NetConfig,
    pub threshold: u32,
    pub window_ms: u64,
    pub sessions: usize,
    pub seeds: ScenarioSeeds,
    pub schema: Arc<AttributeSchema>,
}

pub fn load_scenario<P: AsRef<Path>>(path: P) -> Result<Scenario, HarnessError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let base = path.parent().map(Path::to_path_buf);
    parse_scenario_str(&text, base.as_deref(), &path.display().to_string())
}

struct Parser<'a> {
    path: &'a str,
    line_no: usize,
}

impl<'a> Parser<'a> {
    fn fail<T>(&self, message: impl Into<String>) -> Result<T, HarnessError> {
        Err(HarnessError::Parse {
            path: self.path.to_string(),
            line: self.line_no,
            message: message.into(),
        })
    }
}

/// Parses scenario text. `base_dir` anchors relative photo paths; `path`
/// labels diagnostics.
pub fn parse_scenario_str(
    text: &str,
    base_dir: Option<&Path>,
    path: &str,
) -> Result<Scenario, HarnessError> {
    let mut ctx = Parser { path, line_no: 0 };
    let mut photo: Option<Image> = None;
    let mut photographer = "photographer".to_string();
    let mut agents: Vec<AgentSpec> = Vec::new();
    let mut pool: Vec<String> = Vec::new();
    let mut nearby: Option<(usize, Policy)> = None;
    let mut latency = LatencyModel::Uniform {
        min_ms: 5,
        max_ms: 50,
    };
    let mut drop_probability = 0.0f64;
    let mut threshold = crate::attributes::DEFAULT_THRESHOLD;
    let mut window_ms = DEFAULT_WINDOW_MS;
    let mut sessions = 1usize;
    let mut seeds = ScenarioSeeds::default();
    let mut saw_header = false;

    // Vectors are collected as strings first; the schema is fixed by the
    // first one seen.
    struct RawFace {
        line: usize,
        person: String,
        eyes: EyePair,
        attrs: String,
        smiling: bool,
        target: bool,
        in_photo: bool,
        flips: usize,
    }
    let mut raw_faces: Vec<RawFace> = Vec::new();
    let mut raw_agents: Vec<(usize, String, String, Policy)> = Vec::new();

    for (idx, raw_line) in text.lines().enumerate() {
        ctx.line_no = idx + 1;
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        match tokens[0] {
            "scenario" => {
                if tokens.get(1) != Some(&"v1") {
                    return ctx.fail("expected `scenario v1`");
                }
                saw_header = true;
            }
            "photo" => {
                photo = Some(parse_photo(&ctx, &tokens, base_dir)?);
            }
            "photographer" => {
                photographer = req(&ctx, &tokens, 1, "photographer id")?.to_string();
            }
            "sessions" => {
                sessions = parse_num(&ctx, req(&ctx, &tokens, 1, "session count")?)?;
                if sessions == 0 {
                    return ctx.fail("sessions must be positive");
                }
            }
            "threshold" => {
                threshold = parse_num(&ctx, req(&ctx, &tokens, 1, "threshold")?)?;
            }
            "window" => {
                window_ms = parse_num(&ctx, req(&ctx, &tokens, 1, "window ms")?)?;
            }
            "latency" => match req(&ctx, &tokens, 1, "latency kind")? {
                "fixed" => {
                    latency =
                        LatencyModel::Fixed(parse_num(&ctx, req(&ctx, &tokens, 2, "latency ms")?)?);
                }
                "uniform" => {
                    latency = LatencyModel::Uniform {
                        min_ms: parse_num(&ctx, req(&ctx, &tokens, 2, "min ms")?)?,
                        max_ms: parse_num(&ctx, req(&ctx, &tokens, 3, "max ms")?)?,
                    };
                }
                other => return ctx.fail(format!("unknown latency kind `{other}`")),
            },
            "drop" => {
                drop_probability = parse_float(&ctx, req(&ctx, &tokens, 1, "drop probability")?)?;
            }
            "seed" => {
                let value = parse_num(&ctx, req(&ctx, &tokens, 2, "seed value")?)?;
                match req(&ctx, &tokens, 1, "seed stream")? {
                    "network" => seeds.network = value,
                    "policy" => seeds.policy = value,
                    "noise" => seeds.noise = value,
                    other => return ctx.fail(format!("unknown seed stream `{other}`")),
                }
            }
            "face" => {
                let person = req(&ctx, &tokens, 1, "person id")?.to_string();
                let mut eyes: Option<EyePair> = None;
                let mut attrs: Option<String> = None;
                let mut smiling = false;
                let mut target = false;
                let mut in_photo = true;
                let mut flips = 0usize;
                let mut i = 2;
                while i < tokens.len() {
                    match tokens[i] {
                        "eyes" => {
                            if i + 4 >= tokens.len() {
                                return ctx.fail("eyes needs four coordinates");
                            }
                            let lx = parse_float(&ctx, tokens[i + 1])?;
                            let ly = parse_float(&ctx, tokens[i + 2])?;
                            let rx = parse_float(&ctx, tokens[i + 3])?;
                            let ry = parse_float(&ctx, tokens[i + 4])?;
                            eyes = Some(EyePair::new(Point::new(lx, ly), Point::new(rx, ry)));
                            i += 5;
                        }
                        "attrs" => {
                            attrs = Some(req(&ctx, &tokens, i + 1, "attribute string")?.to_string());
                            i += 2;
                        }
                        "smiling" => {
                            smiling = parse_bool(&ctx, req(&ctx, &tokens, i + 1, "smiling flag")?)?;
                            i += 2;
                        }
                        "target" => {
                            target = parse_bool(&ctx, req(&ctx, &tokens, i + 1, "target flag")?)?;
                            i += 2;
                        }
                        "inphoto" => {
                            in_photo = parse_bool(&ctx, req(&ctx, &tokens, i + 1, "inphoto flag")?)?;
                            i += 2;
                        }
                        "flips" => {
                            flips = parse_num(&ctx, req(&ctx, &tokens, i + 1, "flip count")?)?;
                            i += 2;
                        }
                        other => return ctx.fail(format!("unknown face field `{other}`")),
                    }
                }
                let Some(eyes) = eyes else {
                    return ctx.fail("face needs `eyes x y x y`");
                };
                let Some(attrs) = attrs else {
                    return ctx.fail("face needs `attrs <vector>`");
                };
                raw_faces.push(RawFace {
                    line: ctx.line_no,
                    person,
                    eyes,
                    attrs,
                    smiling,
                    target,
                    in_photo,
                    flips,
                });
            }
            "agent" => {
                let person = req(&ctx, &tokens, 1, "person id")?.to_string();
                let mut profile: Option<String> = None;
                let mut policy: Option<Policy> = None;
                let mut i = 2;
                while i < tokens.len() {
                    match tokens[i] {
                        "profile" => {
                            profile = Some(req(&ctx, &tokens, i + 1, "profile vector")?.to_string());
                            i += 2;
                        }
                        "policy" => {
                            let (p, consumed) = parse_policy(&ctx, &tokens, i + 1)?;
                            policy = Some(p);
                            i += 1 + consumed;
                        }
                        other => return ctx.fail(format!("unknown agent field `{other}`")),
                    }
                }
                let Some(profile) = profile else {
                    return ctx.fail("agent needs `profile <vector>`");
                };
                let Some(policy) = policy else {
                    return ctx.fail("agent needs `policy always|never|prob <p>`");
                };
                raw_agents.push((ctx.line_no, person, profile, policy));
            }
            "pool" => {
                pool.push(req(&ctx, &tokens, 1, "pool vector")?.to_string());
            }
            "nearby" => {
                let count = parse_num(&ctx, req(&ctx, &tokens, 1, "nearby count")?)?;
                let policy = if tokens.len() > 2 {
                    if tokens[2] != "policy" {
                        return ctx.fail("expected `policy` after nearby count");
                    }
                    let (p, _) = parse_policy(&ctx, &tokens, 3)?;
                    p
                } else {
                    Policy::Always
                };
                nearby = Some((count, policy));
            }
            other => return ctx.fail(format!("unknown directive `{other}`")),
        }
    }

    ctx.line_no = 0;
    if !saw_header {
        return ctx.fail("missing `scenario v1` header");
    }
    let Some(photo) = photo else {
        return ctx.fail("missing `photo` directive");
    };

    // Fix the schema from the first vector in file order.
    let first_len = raw_faces
        .iter()
        .map(|f| f.attrs.chars().count())
        .chain(raw_agents.iter().map(|a| a.2.chars().count()))
        .chain(pool.iter().map(|p| p.chars().count()))
        .next();
    let Some(first_len) = first_len else {
        return ctx.fail("scenario declares no attribute vectors");
    };
    let schema = if first_len == AttributeSchema::default_schema().matching_len() {
        AttributeSchema::default_schema()
    } else {
        AttributeSchema::synthetic(first_len)?
    };

    let decode_at = |line: usize, s: &str| -> Result<AttributeVector, HarnessError> {
        AttributeVector::decode(s, &schema).map_err(|e| HarnessError::Parse {
            path: path.to_string(),
            line,
            message: e.to_string(),
        })
    };

    let mut faces = Vec::with_capacity(raw_faces.len());
    for rf in raw_faces {
        faces.push(FaceAnnotation {
            person: rf.person,
            eyes: rf.eyes,
            true_attributes: decode_at(rf.line, &rf.attrs)?,
            smiling: rf.smiling,
            is_target: rf.target,
            in_photo: rf.in_photo,
            flip_count: rf.flips,
        });
    }
    for (line, person, profile, policy) in raw_agents {
        agents.push(AgentSpec {
            person,
            profile: decode_at(line, &profile)?,
            policy,
        });
    }
    let pool: Vec<AttributeVector> = pool
        .iter()
        .map(|p| decode_at(0, p))
        .collect::<Result<_, _>>()?;

    let scenario = Scenario {
        photo,
        photographer,
        faces,
        agents,
        pool,
        nearby: nearby.map(|(count, policy)| NearbySpec { count, policy }),
        net: NetConfig {
            latency,
            drop_probability,
        },
        threshold,
        window_ms,
        sessions,
        seeds,
        schema,
    };
    validate(&scenario)?;
    Ok(scenario)
}

fn parse_photo(
    ctx: &Parser<'_>,
    tokens: &[&str],
    base_dir: Option<&Path>,
) -> Result<Image, HarnessError> {
    match req(ctx, tokens, 1, "photo kind")? {
        "synthetic" => {
            let width: usize = parse_num(ctx, req(ctx, tokens, 2, "width")?)?;
            let height: usize = parse_num(ctx, req(ctx, tokens, 3, "height")?)?;
            let r: u8 = parse_num(ctx, req(ctx, tokens, 4, "red")?)?;
            let g: u8 = parse_num(ctx, req(ctx, tokens, 5, "green")?)?;
            let b: u8 = parse_num(ctx, req(ctx, tokens, 6, "blue")?)?;
            Ok(Image::filled(width, height, [r, g, b])?)
        }
        "file" => {
            let rel = req(ctx, tokens, 2, "photo path")?;
            let path = match base_dir {
                Some(dir) => dir.join(rel),
                None => Path::new(rel).to_path_buf(),
            };
            Ok(Image::read_ppm(path)?)
        }
        other => ctx.fail(format!("unknown photo kind `{other}`")),
    }
}

fn parse_policy(
    ctx: &Parser<'_>,
    tokens: &[&str],
    at: usize,
) -> Result<(Policy, usize), HarnessError> {
    match req(ctx, tokens, at, "policy")? {
        "always" => Ok((Policy::Always, 1)),
        "never" => Ok((Policy::Never, 1)),
        "prob" => {
            let p = parse_float(ctx, req(ctx, tokens, at + 1, "probability")?)?;
            Ok((Policy::WithProbability(p), 2))
        }
        other => ctx.fail(format!("unknown policy `{other}`")),
    }
}

fn req<'t>(
    ctx: &Parser<'_>,
    tokens: &[&'t str],
    index: usize,
    what: &str,
) -> Result<&'t str, HarnessError> {
    tokens
        .get(index)
        .copied()
        .ok_or_else(|| HarnessError::Parse {
            path: ctx.path.to_string(),
            line: ctx.line_no,
            message: format!("missing {what}"),
        })
}

fn parse_num<T: std::str::FromStr>(ctx: &Parser<'_>, token: &str) -> Result<T, HarnessError> {
    token.parse().map_err(|_| HarnessError::Parse {
        path: ctx.path.to_string(),
        line: ctx.line_no,
        message: format!("invalid number `{token}`"),
    })
}

fn parse_float(ctx: &Parser<'_>, token: &str) -> Result<f64, HarnessError> {
    parse_num(ctx, token)
}

fn parse_bool(ctx: &Parser<'_>, token: &str) -> Result<bool, HarnessError> {
    match token {
        "yes" | "true" => Ok(true),
        "no" | "false" => Ok(false),
        other => ctx.fail(format!("expected yes/no, got `{other}`")),
    }
}

fn validate(s: &Scenario) -> Result<(), HarnessError> {
    let fail = |msg: String| Err(HarnessError::Invalid(msg));
    let n = s.schema.matching_len();

    let mut seen = std::collections::HashSet::new();
    for face in &s.faces {
        if !seen.insert(&face.person) {
            return fail(format!("duplicate face person id `{}`", face.person));
        }
        if face.flip_count > n {
            return fail(format!(
                "face `{}`: flip count {} exceeds attribute count {n}",
                face.person, face.flip_count
            ));
        }
        if face.in_photo {
            let (w, h) = (s.photo.width() as f64, s.photo.height() as f64);
            for p in [face.eyes.left, face.eyes.right] {
                if !(p.x >= 0.0 && p.x < w && p.y >= 0.0 && p.y < h) {
                    return fail(format!(
                        "face `{}`: eye ({}, {}) outside the {}x{} photo",
                        face.person,
                        p.x,
                        p.y,
                        s.photo.width(),
                        s.photo.height()
                    ));
                }
            }
            if face.eyes.distance() == 0.0 {
                return fail(format!("face `{}`: eyes coincide", face.person));
            }
        }
        if face.true_attributes.len() != n {
            return fail(format!("face `{}`: vector length mismatch", face.person));
        }
    }
    let mut seen_agents = std::collections::HashSet::new();
    for agent in &s.agents {
        if !seen_agents.insert(&agent.person) {
            return fail(format!("duplicate agent person id `{}`", agent.person));
        }
        if agent.profile.len() != n {
            return fail(format!("agent `{}`: vector length mismatch", agent.person));
        }
        if agent.policy.validate().is_err() {
            return fail(format!("agent `{}`: invalid policy", agent.person));
        }
    }
    if s.threshold as usize > n {
        return fail(format!("threshold {} exceeds attribute count {n}", s.threshold));
    }
    if s.net.validate().is_err() {
        return fail("invalid network parameters".into());
    }
    if let Some(nearby) = &s.nearby {
        if nearby.count > 0 && s.pool.is_empty() {
            return fail("nearby agents requested but the profile pool is empty".into());
        }
        if nearby.policy.validate().is_err() {
            return fail("invalid nearby policy".into());
        }
    }
    for v in &s.pool {
        if v.len() != n {
            return fail("pool vector length mismatch".into());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v16(head: &str) -> String {
        let mut s = head.to_string();
        while s.len() < 16 {
            s.push('-');
        }
        s
    }

    fn minimal_text() -> String {
        format!(
            "scenario v1\n\
             photo synthetic 320 160 200 180 160\n\
             face carol eyes 150 75 170 75 attrs {} smiling yes target yes\n\
             agent dave profile {} policy always\n",
            v16("+"),
            v16("-+")
        )
    }

    #[test]
    fn minimal_scenario_gets_defaults() {
        let s = parse_scenario_str(&minimal_text(), None, "test").unwrap();
        assert_eq!(s.threshold, 1);
        assert_eq!(s.window_ms, 500);
        assert_eq!(s.sessions, 1);
        assert_eq!(s.seeds, ScenarioSeeds::default());
        assert_eq!(s.faces.len(), 1);
        assert!(s.faces[0].is_target);
        assert!(s.faces[0].in_photo);
        assert_eq!(s.faces[0].flip_count, 0);
        assert_eq!(s.agents.len(), 1);
        assert_eq!(s.schema.matching_len(), 16);
    }

    #[test]
    fn duplicate_person_rejected() {
        let text = format!(
            "{}face carol eyes 10 10 20 10 attrs {}\n",
            minimal_text(),
            v16("+")
        );
        match parse_scenario_str(&text, None, "test") {
            Err(HarnessError::Invalid(msg)) => assert!(msg.contains("duplicate"), "{msg}"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn oversized_flip_count_rejected() {
        let text = minimal_text().replace("smiling yes target yes", "flips 17");
        match parse_scenario_str(&text, None, "test") {
            Err(HarnessError::Invalid(msg)) => assert!(msg.contains("flip count"), "{msg}"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn eyes_outside_photo_rejected() {
        let text = minimal_text().replace("eyes 150 75 170 75", "eyes 150 75 500 75");
        match parse_scenario_str(&text, None, "test") {
            Err(HarnessError::Invalid(msg)) => assert!(msg.contains("outside"), "{msg}"),
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = "scenario v1\nphoto synthetic 10 10 0 0 0\nbogus directive\n";
        match parse_scenario_str(text, None, "test") {
            Err(HarnessError::Parse { line: 3, .. }) => {}
            other => panic!("expected parse error at line 3, got {other:?}"),
        }
    }

    #[test]
    fn short_vectors_get_synthetic_schema() {
        let text = "scenario v1\n\
                    photo synthetic 100 50 0 0 0\n\
                    face a eyes 40 25 60 25 attrs ++--\n\
                    agent b profile ++-- policy never\n";
        let s = parse_scenario_str(text, None, "test").unwrap();
        assert_eq!(s.schema.matching_len(), 4);
    }

    #[test]
    fn comments_and_full_options_parse() {
        let text = format!(
            "scenario v1  # header\n\
             photo synthetic 320 160 10 20 30\n\
             photographer annie\n\
             sessions 7\n\
             threshold 2\n\
             window 250\n\
             latency fixed 10\n\
             drop 0.25\n\
             seed network 11\n\
             seed policy 12\n\
             seed noise 13\n\
             # a face\n\
             face x eyes 150 80 180 80 attrs {} inphoto yes flips 2\n\
             agent y profile {} policy prob 0.5\n\
             pool {}\n\
             nearby 2 policy always\n",
            v16("+-"),
            v16("-+"),
            v16("--+")
        );
        let s = parse_scenario_str(&text, None, "test").unwrap();
        assert_eq!(s.photographer, "annie");
        assert_eq!(s.sessions, 7);
        assert_eq!(s.threshold, 2);
        assert_eq!(s.window_ms, 250);
        assert_eq!(s.net.drop_probability, 0.25);
        assert_eq!(
            s.seeds,
            ScenarioSeeds {
                network: 11,
                policy: 12,
                noise: 13
            }
        );
        assert_eq!(s.pool.len(), 1);
        let nearby = s.nearby.unwrap();
        assert_eq!(nearby.count, 2);
        assert_eq!(nearby.policy, Policy::Always);
    }

    #[test]
    fn file_photos_resolve_relative_to_scenario() {
        let dir = tempfile::tempdir().unwrap();
        let photo = Image::filled(200, 100, [9, 8, 7]).unwrap();
        photo.write_ppm(dir.path().join("shot.ppm")).unwrap();
        let text = format!(
            "scenario v1\n\
             photo file shot.ppm\n\
             face a eyes 90 50 110 50 attrs {}\n",
            {
                let mut s = "+".to_string();
                while s.len() < 16 {
                    s.push('-');
                }
                s
            }
        );
        let path = dir.path().join("file.scenario");
        std::fs::write(&path, text).unwrap();
        let scenario = load_scenario(&path).unwrap();
        assert_eq!(scenario.photo, photo);
    }

    #[test]
    fn nearby_without_pool_rejected() {
        let text = format!("{}nearby 3\n", minimal_text());
        assert!(matches!(
            parse_scenario_str(&text, None, "test"),
            Err(HarnessError::Invalid(_))
        ));
    }
}
