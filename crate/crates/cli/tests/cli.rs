//! End-to-end checks of the command-line interface.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bystander(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bystander"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn v16(head: &str) -> String {
    let mut s = head.to_string();
    while s.len() < 16 {
        s.push('-');
    }
    s
}

fn write_field_scenario(path: &Path, sessions: usize) {
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
    fs::write(path, text).unwrap();
}

#[test]
fn match_reports_diff_and_verdict() {
    let a = v16("+");
    let b = v16("-+");
    let equal = bystander(&["match", "--a", &a, "--b", &a]);
    assert!(equal.status.success());
    let out = stdout(&equal);
    assert!(out.contains("diff 0"), "{out}");
    assert!(out.contains("match yes"), "{out}");

    let apart = bystander(&["match", "--a", &a, "--b", &b, "--threshold", "1"]);
    let out = stdout(&apart);
    assert!(out.contains("diff 2"), "{out}");
    assert!(out.contains("match no"), "{out}");
}

#[test]
fn match_rejects_bad_strings() {
    let out = bystander(&["match", "--a", "++x", "--b", "+++"]);
    assert!(!out.status.success());
    assert!(!out.stderr.is_empty());
}

#[test]
fn simulate_writes_reports_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("field.scenario");
    write_field_scenario(&scenario, 3);
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        let result = bystander(&[
            "simulate",
            "--scenario",
            scenario.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--seed",
            "99",
        ]);
        assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
        assert!(stdout(&result).contains("true-protection-rate 1"));
    }
    let mut names: Vec<String> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.contains(&"session-0.report".to_string()));
    assert!(names.contains(&"session-0.ppm".to_string()));
    assert!(names.contains(&"summary.txt".to_string()));
    for name in &names {
        let a = fs::read(out_a.join(name)).unwrap();
        let b = fs::read(out_b.join(name)).unwrap();
        assert_eq!(a, b, "file {name} differs between identical runs");
    }
}

#[test]
fn blur_on_uniform_image_preserves_payload() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.ppm");
    let output = dir.path().join("out.ppm");
    let img = bystander_core_image();
    img.write_ppm(&input).unwrap();
    let result = bystander(&[
        "blur",
        "--image",
        input.to_str().unwrap(),
        "--eyes",
        "100,100,150,100",
        "--out",
        output.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    assert_eq!(fs::read(&input).unwrap(), fs::read(&output).unwrap());
}

fn bystander_core_image() -> bystander::facegeom::Image {
    bystander::facegeom::Image::filled(320, 240, [120, 130, 140]).unwrap()
}

#[test]
fn filter_prints_verdict_table() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("faces.scenario");
    write_field_scenario(&scenario, 1);
    let result = bystander(&["filter", "--faces", scenario.to_str().unwrap()]);
    assert!(result.status.success());
    let out = stdout(&result);
    assert!(out.contains("target yes yes yes yes"), "{out}");
    assert!(out.contains("left no no no no"), "{out}");
}

#[test]
fn train_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("train.dataset");
    // Tiny separable problem: label = sign of each coordinate.
    let mut lines = vec!["dataset v1".to_string(), "dims 2 2".to_string()];
    let values = [-1.5, -0.75, -0.25, 0.25, 0.75, 1.5];
    for &a in &values {
        for &b in &values {
            let labels = format!(
                "{}{}",
                if a > 0.0 { '+' } else { '-' },
                if b > 0.0 { '+' } else { '-' }
            );
            lines.push(format!("sample {a} {b} labels {labels}"));
        }
    }
    fs::write(&data_path, lines.join("\n") + "\n").unwrap();

    let config_path = dir.path().join("train.config");
    fs::write(
        &config_path,
        "trainconfig v1\nbatch-size 8\ninitial-lr 0.3\nlr-decay-factor 0.8\n\
         decay-every-epochs 10\nmin-lr 1e-6\nepochs 30\nseed 7\n",
    )
    .unwrap();

    let ckpt = dir.path().join("model.ckpt");
    let trace = dir.path().join("trace.csv");
    let result = bystander(&[
        "train",
        "--data",
        data_path.to_str().unwrap(),
        "--config",
        config_path.to_str().unwrap(),
        "--out",
        ckpt.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let trace_text = fs::read_to_string(&trace).unwrap();
    assert!(trace_text.starts_with("epoch,lr,loss,average_accuracy"));

    let eval = bystander(&["eval", "--ckpt", ckpt.to_str().unwrap(), "--data", data_path.to_str().unwrap()]);
    assert!(eval.status.success());
    let out = stdout(&eval);
    let average: f64 = out
        .lines()
        .find_map(|l| l.strip_prefix("average "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(average >= 0.95, "average accuracy {average}");
}

#[test]
fn sweep_prints_monotone_counts() {
    let dir = tempfile::tempdir().unwrap();
    let batch = dir.path().join("pairs.batch");
    let mut lines = vec!["sweepbatch v1".to_string(), "seed 11".to_string()];
    for i in 0..10 {
        lines.push(format!("pair matched {} flips {}", v16("+"), i % 3));
        lines.push(format!("pair mismatched {} {}", v16("+"), v16("-+-+")));
    }
    fs::write(&batch, lines.join("\n") + "\n").unwrap();
    let result = bystander(&[
        "sweep",
        "--batch",
        batch.to_str().unwrap(),
        "--thresholds",
        "0,1,2",
    ]);
    assert!(result.status.success());
    let out = stdout(&result);
    let rows: Vec<Vec<u32>> = out
        .lines()
        .skip(1)
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    for pair in rows.windows(2) {
        assert!(pair[1][1] >= pair[0][1], "TP not monotone: {out}");
        assert!(pair[1][2] >= pair[0][2], "FP not monotone: {out}");
    }
}

#[test]
fn missing_files_exit_nonzero() {
    let result = bystander(&["simulate", "--scenario", "/nonexistent", "--out", "/tmp/x"]);
    assert!(!result.status.success());
    let result = bystander(&["eval", "--ckpt", "/nonexistent", "--data", "/nonexistent"]);
    assert!(!result.status.success());
}
