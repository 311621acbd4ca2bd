use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use headtraj::commands::{load_scene, EvaluationReport, FitFile, FitReport};
use headtraj::formats::{BodyFile, DecompositionFile, ObservationsFile, SceneFile, FORMAT_VERSION};
use headtraj_core::so3::conventions;
use headtraj_core::{Rotation, Vec3};
use serde_json::Value;
use tempfile::TempDir;

fn headtraj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_headtraj"))
        .args(args)
        .env_remove("HEADTRAJ_EPSILON")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = headtraj(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(args: &[&str]) -> i32 {
    headtraj(args).status.code().expect("exit code")
}

struct Dir(TempDir);

impl Dir {
    fn new() -> Self {
        Dir(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }
}

fn simulate(dir: &Dir, preset: &str, frames: usize, name: &str) -> String {
    let out = dir.arg(name);
    ok(&[
        "simulate",
        "--preset",
        preset,
        "--frames",
        &frames.to_string(),
        "--seed",
        "7",
        "--out",
        &out,
    ]);
    out
}

fn read<T: serde::de::DeserializeOwned>(path: &str) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn simulate_writes_a_loadable_scene() {
    let d = Dir::new();
    let s = simulate(&d, "circle-orbit", 120, "s.json");
    let scene = load_scene(Path::new(&s)).unwrap();
    assert_eq!(scene.len(), 120);
    assert_eq!(scene.human.joint_names, ["root", "left_foot", "right_foot"]);
    let raw: Value = read(&s);
    assert_eq!(raw["convention"], conventions::NAME);
    assert_eq!(raw["version"], FORMAT_VERSION);
}

#[test]
fn simulate_is_byte_deterministic() {
    let d = Dir::new();
    let a = simulate(&d, "figure-eight-handheld", 50, "a.json");
    let b = simulate(&d, "figure-eight-handheld", 50, "b.json");
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
}

#[test]
fn simulate_rejects_bad_configs() {
    let d = Dir::new();
    let out = d.arg("s.json");
    assert_eq!(
        code(&[
            "simulate",
            "--preset",
            "circle-orbit",
            "--frames",
            "1",
            "--out",
            &out
        ]),
        2
    );
    assert_eq!(
        code(&["simulate", "--preset", "spiral-orbit", "--out", &out]),
        2
    );
    assert_eq!(code(&["simulate", "--out", &out]), 2);
    assert!(!d.path("s.json").exists());
}

#[test]
fn simulate_from_config_file() {
    let d = Dir::new();
    let cfg = d.path("cfg.json");
    fs::write(
        &cfg,
        r#"{"frames": 40, "fps": 25, "human_path": {"kind": "line", "speed": 1.0},
            "camera_rig": {"kind": "follow", "distance": 3, "height": 1.7}}"#,
    )
    .unwrap();
    let out = d.arg("s.json");
    ok(&[
        "simulate",
        "--config",
        &cfg.display().to_string(),
        "--out",
        &out,
    ]);
    let scene = load_scene(Path::new(&out)).unwrap();
    assert_eq!((scene.len(), scene.fps()), (40, 25.0));
}

#[test]
fn decompose_static_camera_has_identity_deltas() {
    let d = Dir::new();
    let s = simulate(&d, "line-static", 60, "s.json");
    let out = d.arg("d.json");
    ok(&["decompose", "--in", &s, "--out", &out]);
    let file: DecompositionFile = read(&out);
    assert_eq!(file.delta_yaw.len(), 59);
    for dy in &file.delta_yaw {
        let r = Rotation::try_from_row_major(*dy).unwrap();
        assert!((*r.matrix() - *Rotation::IDENTITY.matrix()).frobenius_norm() < 1e-12);
    }
}

#[test]
fn decompose_orbit_reports_small_residual() {
    let d = Dir::new();
    let s = simulate(&d, "circle-orbit", 120, "s.json");
    let out = d.arg("d.json");
    ok(&["decompose", "--in", &s, "--out", &out]);
    let file: DecompositionFile = read(&out);
    assert_eq!((file.yaw.len(), file.rp.len()), (120, 120));
    assert!(file.meta.max_reconstruction_residual < 1e-6);
    assert_eq!(file.meta.epsilon, 1e-6);
}

#[test]
fn truncated_or_missing_input_exits_2() {
    let d = Dir::new();
    let s = simulate(&d, "circle-orbit", 30, "s.json");
    let text = fs::read_to_string(&s).unwrap();
    let cut = d.path("cut.json");
    fs::write(&cut, &text[..text.len() / 2]).unwrap();
    let out = d.arg("d.json");
    assert_eq!(
        code(&[
            "decompose",
            "--in",
            &cut.display().to_string(),
            "--out",
            &out
        ]),
        2
    );
    assert_eq!(
        code(&["decompose", "--in", &d.arg("absent.json"), "--out", &out]),
        2
    );
    assert_eq!(
        code(&["decompose", "--in", &s, "--out", &d.arg("no/such/dir.json")]),
        2
    );
}

#[test]
fn non_rotation_in_scene_exits_2() {
    let d = Dir::new();
    let s = simulate(&d, "line-static", 10, "s.json");
    let mut raw: Value = read(&s);
    raw["camera"]["rotations"][3][0] = Value::from(1.01);
    let bad = d.path("bad.json");
    fs::write(&bad, raw.to_string()).unwrap();
    let out = headtraj(&[
        "decompose",
        "--in",
        &bad.display().to_string(),
        "--out",
        &d.arg("d.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("rotation"));
}

#[test]
fn noiseless_reconstruction_round_trips_through_evaluate() {
    let d = Dir::new();
    for preset in ["circle-orbit", "figure-eight-follow"] {
        let s = simulate(&d, preset, 120, "s.json");
        let (obs, rec, rep) = (d.arg("o.json"), d.arg("r.json"), d.arg("rep.json"));
        ok(&["perturb", "--in", &s, "--out", &obs]);
        ok(&[
            "reconstruct",
            "--obs",
            &obs,
            "--out",
            &rec,
            "--identity-initial-yaw",
        ]);
        ok(&["evaluate", "--pred", &rec, "--gt", &s, "--out", &rep]);
        let report: EvaluationReport = read(&rep);
        assert!(
            report.metrics["wa_mpjpe_100_mm"] < 1e-3,
            "{preset}: {:?}",
            report.metrics
        );
        assert!(
            report.metrics["rte_percent"] < 1e-6,
            "{preset}: {:?}",
            report.metrics
        );
    }
}

#[test]
fn zero_velocity_observations_give_static_tracks() {
    let d = Dir::new();
    let s = simulate(&d, "stationary-static", 30, "s.json");
    let (obs, rec) = (d.arg("o.json"), d.arg("r.json"));
    ok(&["perturb", "--in", &s, "--out", &obs]);
    ok(&["reconstruct", "--obs", &obs, "--out", &rec]);
    let scene = load_scene(Path::new(&rec)).unwrap();
    for track in [&scene.human.positions, &scene.camera.positions] {
        assert!(track.iter().all(|p| (*p - track[0]).norm() == 0.0));
    }
}

#[test]
fn reconstruct_input_errors() {
    let d = Dir::new();
    let s = simulate(&d, "line-orbit", 20, "s.json");
    let obs = d.arg("o.json");
    ok(&["perturb", "--in", &s, "--out", &obs]);
    let full: ObservationsFile = read(&obs);

    let missing = ObservationsFile {
        rp: None,
        human_local_velocities: None,
        ..full.clone()
    };
    let path = d.path("missing.json");
    fs::write(&path, serde_json::to_string(&missing).unwrap()).unwrap();
    let out = headtraj(&[
        "reconstruct",
        "--obs",
        &path.display().to_string(),
        "--out",
        &d.arg("r.json"),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("rp") && err.contains("human_local_velocities"),
        "{err}"
    );

    let mut short = full;
    short.camera_local_velocities.as_mut().unwrap().pop();
    fs::write(&path, serde_json::to_string(&short).unwrap()).unwrap();
    assert_eq!(
        code(&[
            "reconstruct",
            "--obs",
            &path.display().to_string(),
            "--out",
            &d.arg("r.json")
        ]),
        2
    );
}

fn drift_scene(drift_mps: f64) -> SceneFile {
    let frames = 200;
    let pattern = [
        Vec3::new(0.0, -0.9, 0.0),
        Vec3::new(-0.1, 0.0, 0.05),
        Vec3::new(0.1, 0.0, -0.05),
        Vec3::new(0.0, -1.6, 0.1),
    ];
    let joints: Vec<Vec<Vec3>> = (0..frames)
        .map(|t| {
            pattern
                .iter()
                .map(|p| *p + Vec3::new(drift_mps * t as f64, 0.0, 0.0))
                .collect()
        })
        .collect();
    let identity = vec![Rotation::IDENTITY.to_row_major(); frames];
    SceneFile {
        version: FORMAT_VERSION.into(),
        fps: 30.0,
        convention: conventions::NAME.into(),
        camera: BodyFile {
            rotations: identity.clone(),
            positions: vec![Vec3::new(0.0, -1.5, -4.0); frames],
            local_velocities: None,
            joints: None,
            contacts: None,
            joint_names: vec![],
        },
        human: BodyFile {
            rotations: identity,
            positions: joints.iter().map(|f| f[0]).collect(),
            local_velocities: None,
            joints: Some(joints),
            contacts: None,
            joint_names: ["root", "a", "b", "c"].map(String::from).to_vec(),
        },
    }
}

#[test]
fn evaluate_drift_case_matches_oracle_and_lists_omissions() {
    let d = Dir::new();
    let (pred, gt) = (d.path("p.json"), d.path("g.json"));
    fs::write(&pred, serde_json::to_string(&drift_scene(0.001)).unwrap()).unwrap();
    fs::write(&gt, serde_json::to_string(&drift_scene(0.0)).unwrap()).unwrap();
    let (rep, csv) = (d.arg("rep.json"), d.arg("seg.csv"));
    ok(&[
        "evaluate",
        "--pred",
        &pred.display().to_string(),
        "--gt",
        &gt.display().to_string(),
        "--out",
        &rep,
        "--csv",
        &csv,
    ]);
    let report: EvaluationReport = read(&rep);
    assert!(
        (report.metrics["w_mpjpe_100_mm"] - 49.01).abs() < 1e-9,
        "{:?}",
        report.metrics
    );
    assert!(
        (report.metrics["wa_mpjpe_100_mm"] - 25.0).abs() < 1e-9,
        "{:?}",
        report.metrics
    );
    let omitted: Vec<&str> = report
        .meta
        .omitted
        .iter()
        .map(|o| o.metric.as_str())
        .collect();
    assert!(
        omitted.contains(&"foot_sliding_mm") && omitted.contains(&"rte_percent"),
        "{omitted:?}"
    );
    assert!(!report.metrics.contains_key("foot_sliding_mm"));

    let csv_text = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = csv_text.lines().collect();
    assert_eq!(lines[0], "start,end,wa_mpjpe_mm,w_mpjpe_mm");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("0,100,"));
}

#[test]
fn evaluate_identical_scenes_scores_zero() {
    let d = Dir::new();
    let s = simulate(&d, "circle-handheld", 120, "s.json");
    let rep = d.arg("rep.json");
    ok(&["evaluate", "--pred", &s, "--gt", &s, "--out", &rep]);
    let report: EvaluationReport = read(&rep);
    assert_eq!(report.metrics.len(), 8);
    for (k, v) in &report.metrics {
        if k != "jitter_10m_s3" {
            assert!(v.abs() < 1e-9, "{k} = {v}");
        }
    }
    assert!(report.meta.omitted.is_empty());
}

#[test]
fn evaluate_rejects_frame_mismatch() {
    let d = Dir::new();
    let a = simulate(&d, "circle-orbit", 30, "a.json");
    let b = simulate(&d, "circle-orbit", 31, "b.json");
    assert_eq!(
        code(&[
            "evaluate",
            "--pred",
            &a,
            "--gt",
            &b,
            "--out",
            &d.arg("r.json")
        ]),
        2
    );
}

#[test]
fn fit_noiseless_converges_without_iterations() {
    let d = Dir::new();
    let s = simulate(&d, "circle-orbit", 30, "s.json");
    let (obs, fitted, rep) = (d.arg("o.json"), d.arg("f.json"), d.arg("rep.json"));
    ok(&["perturb", "--in", &s, "--out", &obs]);
    ok(&[
        "fit",
        "--obs",
        &obs,
        "--supervision",
        &s,
        "--out",
        &fitted,
        "--report",
        &rep,
    ]);
    let f: FitFile = read(&fitted);
    assert_eq!(f.meta.iterations, 0);
    assert_eq!(f.state.loss_history.len(), 1);
    let r: FitReport = read(&rep);
    assert_eq!(r.metrics.before, r.metrics.after);
}

#[test]
fn fit_noisy_improves_rte() {
    let d = Dir::new();
    let s = simulate(&d, "circle-orbit", 40, "s.json");
    let (obs, fitted, rep, cfg) = (
        d.arg("o.json"),
        d.arg("f.json"),
        d.arg("rep.json"),
        d.path("cfg.json"),
    );
    ok(&[
        "perturb",
        "--in",
        &s,
        "--out",
        &obs,
        "--rp-noise",
        "0.02",
        "--seed",
        "7",
    ]);
    fs::write(&cfg, r#"{"solver": {"fd_step": 0.01, "max_iters": 300}}"#).unwrap();
    ok(&[
        "fit",
        "--obs",
        &obs,
        "--supervision",
        &s,
        "--config",
        &cfg.display().to_string(),
        "--out",
        &fitted,
        "--report",
        &rep,
    ]);
    let r: FitReport = read(&rep);
    let (before, after) = (
        r.metrics.before["rte_percent"],
        r.metrics.after["rte_percent"],
    );
    assert!(after < before, "rte {before} -> {after}");
    assert!(r.meta.loss_final < r.meta.loss_initial);
    let f: FitFile = read(&fitted);
    assert!(f.state.loss_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn fit_guards_and_config_errors() {
    let d = Dir::new();
    let s = simulate(&d, "line-orbit", 600, "s.json");
    let obs = d.arg("o.json");
    ok(&["perturb", "--in", &s, "--out", &obs]);
    assert_eq!(
        code(&[
            "fit",
            "--obs",
            &obs,
            "--supervision",
            &s,
            "--out",
            &d.arg("f.json")
        ]),
        2
    );
    assert!(!d.path("f.json").exists());

    let s = simulate(&d, "line-orbit", 20, "s20.json");
    ok(&["perturb", "--in", &s, "--out", &obs]);
    let cfg = d.path("cfg.json");
    fs::write(&cfg, r#"{"solver": {"fd_step": -1}}"#).unwrap();
    let cfg = cfg.display().to_string();
    assert_eq!(
        code(&[
            "fit",
            "--obs",
            &obs,
            "--supervision",
            &s,
            "--config",
            &cfg,
            "--out",
            &d.arg("f.json")
        ]),
        2
    );
    fs::write(&cfg, r#"{"solvr": {}}"#).unwrap();
    assert_eq!(
        code(&[
            "fit",
            "--obs",
            &obs,
            "--supervision",
            &s,
            "--config",
            &cfg,
            "--out",
            &d.arg("f.json")
        ]),
        2
    );
}

#[test]
fn selftest_passes_and_is_deterministic() {
    let a = ok(&["selftest"]);
    let b = ok(&["selftest"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS ")).count() >= 10);
    assert!(!text.contains("FAIL"));
}

#[test]
fn selftest_fails_on_negative_epsilon() {
    let out = Command::new(env!("CARGO_BIN_EXE_headtraj"))
        .arg("selftest")
        .env("HEADTRAJ_EPSILON", "-1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL heading.config"));
}

#[test]
fn scene_file_round_trip_through_disk_is_exact() {
    let d = Dir::new();
    let s = simulate(&d, "figure-eight-orbit", 64, "s.json");
    let scene = load_scene(Path::new(&s)).unwrap();
    let again = d.path("again.json");
    headtraj::io::write_json(&again, &SceneFile::from_scene(&scene)).unwrap();
    assert_eq!(fs::read(&s).unwrap(), fs::read(&again).unwrap());
}
