use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn flexedge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flexedge")).args(args).output().expect("binary runs")
}

fn tiny_config(dir: &Path) -> String {
    let path = dir.join("tiny.toml");
    fs::write(
        &path,
        "num_vehicles = 2\nnum_slots = 6\nperiod = 6.0\nepisodes = 4\nepisodes_per_update = 2\nhidden_sizes = [8]\ncheckpoint_every = 2\n",
    )
    .unwrap();
    path.to_str().unwrap().to_string()
}

fn train(config: &str, out: &Path, seed: &str) -> Output {
    flexedge(&["train", "--config", config, "--seed", seed, "--algo", "ppo", "--out", out.to_str().unwrap()])
}

#[test]
fn missing_config_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = train("/nonexistent/flexedge.toml", &dir.path().join("run"), "0");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read config"));
}

#[test]
fn unknown_key_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "num_vehicles = 2\nwarp_speed = 9\n").unwrap();
    let out = train(cfg.to_str().unwrap(), &dir.path().join("run"), "0");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warp_speed"));
}

#[test]
fn train_writes_artifacts_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(train(&config, &a, "5").status.success());
    assert!(train(&config, &b, "5").status.success());
    for f in ["metrics.csv", "checkpoint.final", "config.resolved", "checkpoint.ep2", "checkpoint.ep4"] {
        assert!(a.join(f).is_file(), "{f} missing");
    }
    let metrics = fs::read(a.join("metrics.csv")).unwrap();
    assert_eq!(metrics, fs::read(b.join("metrics.csv")).unwrap());
    assert_eq!(String::from_utf8(metrics).unwrap().lines().count(), 5);

    let resolved = fs::read_to_string(a.join("config.resolved")).unwrap();
    for key in ["seed = 5", "bandwidth", "uav_v_max", "clip_epsilon", "hidden_sizes"] {
        assert!(resolved.contains(key), "config.resolved lacks {key}");
    }
    // The resolved file alone reproduces the run.
    let c = dir.path().join("c");
    let stripped: String = resolved.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("resolved.toml"), stripped).unwrap();
    assert!(train(dir.path().join("resolved.toml").to_str().unwrap(), &c, "5").status.success());
    assert_eq!(fs::read(a.join("metrics.csv")).unwrap(), fs::read(c.join("metrics.csv")).unwrap());
}

#[test]
fn eval_of_fresh_checkpoint_and_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let run = dir.path().join("run");
    assert!(train(&config, &run, "1").status.success());
    let ck = run.join("checkpoint.final");
    let ev = dir.path().join("eval");
    let out = flexedge(&["eval", "--checkpoint", ck.to_str().unwrap(), "--episodes", "2", "--seed", "3", "--out", ev.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let traj = fs::read_to_string(ev.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().count(), 1 + 6);
    assert!(traj.starts_with("slot,uav_x,uav_y,vehicle0_x,vehicle0_y,vehicle1_x,vehicle1_y"));
    assert!(fs::read_to_string(ev.join("eval_summary.csv")).unwrap().lines().nth(1).unwrap().starts_with("trained,2,3,"));

    let bl = dir.path().join("baseline");
    let out = flexedge(&[
        "eval", "--checkpoint", ck.to_str().unwrap(), "--episodes", "2", "--seed", "3", "--out", bl.to_str().unwrap(), "--baseline", "random",
    ]);
    assert!(out.status.success());
    assert!(fs::read_to_string(bl.join("eval_summary.csv")).unwrap().contains("\nrandom,"));
}

#[test]
fn corrupt_checkpoint_exits_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let ck = dir.path().join("checkpoint.final");
    fs::write(&ck, "{\"format\": \"flexedge-checkpoint-v1\", \"episode\": ").unwrap();
    let out = flexedge(&["eval", "--checkpoint", ck.to_str().unwrap(), "--episodes", "1", "--seed", "0", "--out", dir.path().join("e").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_rows_per_value_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out_dir = dir.path().join("sweep");
    let out = flexedge(&[
        "sweep", "--config", &config, "--axis", "vehicles", "--values", "2,3,4", "--seeds", "0,1", "--out",
        out_dir.to_str().unwrap(), "--jobs", "2", "--eval-episodes", "1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    for v in ["2", "3", "4"] {
        assert_eq!(rows.iter().filter(|r| r.starts_with(&format!("vehicles,{v},"))).count(), 2);
    }
}

#[test]
fn empty_sweep_values_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = tiny_config(dir.path());
    let out = flexedge(&["sweep", "--config", &config, "--axis", "bandwidth", "--values", "", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
