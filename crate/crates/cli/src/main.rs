//! Command-line front end for the photo-privacy engine.

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use bystander::abcnn::{
    average_accuracy, gradient_check, per_attribute_accuracy, train, AdaptedWeights, MicroNetwork,
};
use bystander::attributes::{AttributeSchema, AttributeVector, DEFAULT_THRESHOLD};
use bystander::facegeom::{blur_region, blur_square_from_eyes, EyePair, Image, Point};
use bystander::harness::{
    load_dataset, load_scenario, load_sweep_batch, load_train_config, run_scenario_to_dir,
    threshold_sweep, true_protection_rate, false_filtering_rate, false_protection_rate,
    ScenarioSeeds,
};
use bystander::target_filter::filter_targets;

#[derive(Parser)]
#[command(
    name = "bystander",
    about = "Cooperative photo privacy: attribute matching, target filtering, face blurring, and protocol simulation",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every session of a scenario, writing reports and blurred photos.
    Simulate(SimulateArgs),
    /// Compare two attribute strings and print their difference.
    Match(MatchArgs),
    /// Blur the face square derived from a pair of eye coordinates.
    Blur(BlurArgs),
    /// Print the target-filter verdict table for a scenario's faces.
    Filter(FilterArgs),
    /// Train a classifier on a dataset file and save the checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset file.
    Eval(EvalArgs),
    /// Count matched/mismatched pair acceptances across thresholds.
    Sweep(SweepArgs),
    /// Verify backpropagation against finite differences on random networks.
    Gradcheck(GradcheckArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory for reports, images, and the summary.
    #[arg(long)]
    out: PathBuf,
    /// Override the scenario's base seeds (network=K, policy=K+1, noise=K+2).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct MatchArgs {
    /// First attribute string over +/-.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    /// Second attribute string over +/-.
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    /// Matching threshold.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: u32,
}

#[derive(Args)]
struct BlurArgs {
    /// Input PPM (binary P6).
    #[arg(long)]
    image: PathBuf,
    /// Eye coordinates as x1,y1,x2,y2.
    #[arg(long, allow_hyphen_values = true)]
    eyes: String,
    /// Output PPM path.
    #[arg(long)]
    out: PathBuf,
    /// Gaussian sigma; defaults to an eighth of the blur-square side.
    #[arg(long)]
    sigma: Option<f64>,
}

#[derive(Args)]
struct FilterArgs {
    /// Scenario file whose in-photo faces are filtered.
    #[arg(long)]
    faces: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
    /// Training config file.
    #[arg(long)]
    config: PathBuf,
    /// Checkpoint output path.
    #[arg(long)]
    out: PathBuf,
    /// Also write the per-epoch trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint path.
    #[arg(long)]
    ckpt: PathBuf,
    /// Dataset file.
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep batch file.
    #[arg(long)]
    batch: PathBuf,
    /// Comma-separated thresholds, e.g. 0,1,2.
    #[arg(long, value_delimiter = ',')]
    thresholds: Vec<u32>,
}

#[derive(Args)]
struct GradcheckArgs {
    /// Number of random networks to probe.
    #[arg(long, default_value_t = 5)]
    networks: usize,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
    /// Seed for network shapes and parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<(), String> {
    match command {
        Command::Simulate(args) => simulate(args),
        Command::Match(args) => match_vectors(args),
        Command::Blur(args) => blur(args),
        Command::Filter(args) => filter(args),
        Command::Train(args) => train_cmd(args),
        Command::Eval(args) => eval_cmd(args),
        Command::Sweep(args) => sweep(args),
        Command::Gradcheck(args) => gradcheck(args),
    }
}

fn stringify<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn simulate(args: SimulateArgs) -> Result<(), String> {
    let mut scenario = load_scenario(&args.scenario).map_err(stringify)?;
    if let Some(seed) = args.seed {
        scenario.seeds = ScenarioSeeds {
            network: seed,
            policy: seed.wrapping_add(1),
            noise: seed.wrapping_add(2),
        };
    }
    let reports = run_scenario_to_dir(&scenario, &args.out).map_err(stringify)?;
    println!("sessions {}", reports.len());
    println!(
        "true-protection-rate {}",
        true_protection_rate(&reports).map_err(stringify)?
    );
    println!(
        "false-protection-rate {}",
        false_protection_rate(&reports).map_err(stringify)?
    );
    println!(
        "false-filtering-rate {}",
        false_filtering_rate(&reports).map_err(stringify)?
    );
    Ok(())
}

fn schema_for_len(len: usize) -> Result<Arc<AttributeSchema>, String> {
    if len == 16 {
        Ok(AttributeSchema::default_schema())
    } else {
        AttributeSchema::synthetic(len).map_err(stringify)
    }
}

fn match_vectors(args: MatchArgs) -> Result<(), String> {
    let schema = schema_for_len(args.a.chars().count())?;
    let a = AttributeVector::decode(&args.a, &schema).map_err(stringify)?;
    let b = AttributeVector::decode(&args.b, &schema).map_err(stringify)?;
    let diff = a.attribute_diff(&b).map_err(stringify)?;
    let matched = a.matches(&b, args.threshold).map_err(stringify)?;
    println!("diff {diff}");
    println!("threshold {}", args.threshold);
    println!("match {}", if matched { "yes" } else { "no" });
    Ok(())
}

fn blur(args: BlurArgs) -> Result<(), String> {
    let parts: Vec<&str> = args.eyes.split(',').collect();
    if parts.len() != 4 {
        return Err("--eyes expects x1,y1,x2,y2".into());
    }
    let coords: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| "invalid eye coordinate".to_string())?;
    let eyes = EyePair::new(
        Point::new(coords[0], coords[1]),
        Point::new(coords[2], coords[3]),
    );
    let image = Image::read_ppm(&args.image).map_err(stringify)?;
    let region = blur_square_from_eyes(&eyes).map_err(stringify)?;
    let sigma = args.sigma.unwrap_or_else(|| region.default_sigma());
    let blurred = blur_region(&image, &region, sigma).map_err(stringify)?;
    blurred.write_ppm(&args.out).map_err(stringify)?;
    println!(
        "blurred square side {} centered ({}, {}) sigma {}",
        region.side, region.center.x, region.center.y, sigma
    );
    Ok(())
}

fn filter(args: FilterArgs) -> Result<(), String> {
    let scenario = load_scenario(&args.faces).map_err(stringify)?;
    let faces: Vec<_> = scenario
        .faces
        .iter()
        .filter(|f| f.in_photo)
        .map(|f| {
            bystander::target_filter::DetectedFace::from_eyes(
                f.person.clone(),
                f.eyes,
                f.true_attributes.clone(),
                f.smiling,
            )
        })
        .collect::<Result<_, _>>()
        .map_err(stringify)?;
    let verdicts = filter_targets(&faces, scenario.photo.width()).map_err(stringify)?;
    println!("face smiling size central target");
    for v in &verdicts {
        println!(
            "{} {} {} {} {}",
            v.face_id,
            yn(v.rule_smiling),
            yn(v.rule_size),
            yn(v.rule_central),
            yn(v.is_target)
        );
    }
    Ok(())
}

fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn train_cmd(args: TrainArgs) -> Result<(), String> {
    let data = load_dataset(&args.data).map_err(stringify)?;
    let file_config = load_train_config(&args.config).map_err(stringify)?;
    let target = file_config.target(data.attr_count()).map_err(stringify)?;
    let mut sizes = vec![data.input_dim()];
    sizes.extend(&file_config.hidden);
    sizes.push(data.attr_count());
    let net =
        MicroNetwork::seeded_init(&sizes, file_config.config.rng_seed).map_err(stringify)?;
    let outcome = train(net, &data, &target, &file_config.config).map_err(stringify)?;
    outcome.network.save_checkpoint(&args.out).map_err(stringify)?;
    if let Some(trace_path) = &args.trace {
        let file = std::fs::File::create(trace_path).map_err(stringify)?;
        outcome.write_trace_csv(file).map_err(stringify)?;
    }
    for row in &outcome.trace {
        println!(
            "epoch {} lr {} loss {} accuracy {}",
            row.epoch, row.learning_rate, row.mean_loss, row.average_accuracy
        );
    }
    println!("checkpoint {}", args.out.display());
    Ok(())
}

fn eval_cmd(args: EvalArgs) -> Result<(), String> {
    let net = MicroNetwork::load_checkpoint(&args.ckpt).map_err(stringify)?;
    let data = load_dataset(&args.data).map_err(stringify)?;
    let per_attr = per_attribute_accuracy(&net, &data).map_err(stringify)?;
    println!("attribute accuracy");
    for (i, acc) in per_attr.iter().enumerate() {
        println!("{i} {acc}");
    }
    println!(
        "average {}",
        average_accuracy(&net, &data).map_err(stringify)?
    );
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), String> {
    let batch = load_sweep_batch(&args.batch).map_err(stringify)?;
    let rows = threshold_sweep(&batch, &args.thresholds).map_err(stringify)?;
    println!("threshold true-positives false-positives matched mismatched");
    for row in rows {
        println!(
            "{} {} {} {} {}",
            row.threshold,
            row.true_positives,
            row.false_positives,
            row.matched_trials,
            row.mismatched_trials
        );
    }
    Ok(())
}

fn gradcheck(args: GradcheckArgs) -> Result<(), String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.seed);
    let mut worst = 0.0f64;
    for i in 0..args.networks {
        let depth = rng.random_range(0..=2);
        let mut sizes = vec![rng.random_range(2..=8)];
        for _ in 0..depth {
            sizes.push(rng.random_range(2..=16));
        }
        sizes.push(rng.random_range(1..=6));
        let net = MicroNetwork::seeded_init(&sizes, rng.random()).map_err(stringify)?;
        let input: Vec<f64> = (0..sizes[0]).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let labels: Vec<i8> = (0..*sizes.last().unwrap())
            .map(|_| if rng.random::<bool>() { 1 } else { -1 })
            .collect();
        let weights = AdaptedWeights::unit(labels.len());
        let report =
            gradient_check(&net, &input, &labels, &weights, args.step).map_err(stringify)?;
        println!(
            "net {i} layers {:?} max-rel-error {} checked {} skipped {}",
            sizes, report.max_relative_error, report.params_checked, report.params_skipped
        );
        worst = worst.max(report.max_relative_error);
    }
    println!("worst {worst}");
    Ok(())
}
