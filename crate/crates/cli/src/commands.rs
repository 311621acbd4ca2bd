use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, Context};
use headtraj_core::heading::{decompose_sequence, yaw_factor};
use headtraj_core::losses::LossWeights;
use headtraj_core::metrics::{evaluate_scene, Evaluation, SEGMENT_LEN};
use headtraj_core::simulator::{
    generate_scene, perturb as make_observations, NoiseModel, SceneConfig,
};
use headtraj_core::so3::conventions;
use headtraj_core::solver::{self, SolverConfig, SolverState, StopReason, Supervision, MAX_FRAMES};
use headtraj_core::trajectory::reconstruct_world_motion;
use headtraj_core::{Error, HeadingConfig, Observations, Rotation, Scene};
use serde::{Deserialize, Serialize};

use crate::formats::{
    rotations_to_rows, DecompositionFile, DecompositionMeta, ObservationsFile, SceneFile,
    FORMAT_VERSION,
};
use crate::io::{read_json, write_atomic, write_json};
use crate::{
    heading_config, DecomposeArgs, EvaluateArgs, Failure, FitArgs, InputContext, PerturbArgs,
    ReconstructArgs, SimulateArgs, VERSION,
};

const DEFAULT_FRAMES: usize = 120;
const DEFAULT_FPS: f64 = 30.0;

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

pub fn load_scene(path: &Path) -> anyhow::Result<Scene> {
    read_json::<SceneFile>(path)?
        .into_scene()
        .with_context(|| format!("in {}", path.display()))
}

pub fn load_observations(path: &Path) -> anyhow::Result<Observations> {
    read_json::<ObservationsFile>(path)?
        .into_observations()
        .with_context(|| format!("in {}", path.display()))
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let mut cfg = match (&a.config, &a.preset) {
        (Some(path), _) => read_json::<SceneConfig>(path).input()?,
        (None, Some(name)) => SceneConfig::preset(name, DEFAULT_FRAMES, DEFAULT_FPS).input()?,
        (None, None) => {
            return Err(Failure::Input(anyhow!(
                "either --config or --preset is required"
            )))
        }
    };
    if let Some(frames) = a.frames {
        cfg.frames = frames;
    }
    if let Some(fps) = a.fps {
        cfg.fps = fps;
    }
    let scene = generate_scene(&cfg, a.seed).input()?;
    write_json(&a.out, &SceneFile::from_scene(&scene)).input()
}

pub fn perturb(a: &PerturbArgs) -> Result<(), Failure> {
    let scene = load_scene(&a.input).input()?;
    let mut noise = match &a.noise {
        Some(path) => read_json::<NoiseModel>(path).input()?,
        None => NoiseModel::default(),
    };
    if let Some(v) = a.rp_noise {
        noise.rp_noise_rad = v;
    }
    if let Some(v) = a.vel_noise {
        noise.vel_noise_mpf = v;
    }
    if let Some(v) = a.ang_vel_noise {
        noise.ang_vel_noise_rad = v;
    }
    if let Some(s) = a.seed {
        noise.seed = s;
    }
    let mut obs = make_observations(&scene, &noise).input()?;
    if a.no_initial_yaw {
        obs.initial_yaw = None;
    }
    write_json(&a.out, &ObservationsFile::from_observations(&obs)).input()
}

pub fn decompose(a: &DecomposeArgs) -> Result<(), Failure> {
    let heading = heading_config().input()?;
    let scene = load_scene(&a.input).input()?;
    let rotations = &scene.camera.rotations;
    let seq = decompose_sequence(rotations, &heading).input()?;
    let file = DecompositionFile {
        version: FORMAT_VERSION.into(),
        convention: conventions::NAME.into(),
        yaw: rotations_to_rows(&seq.yaw),
        rp: rotations_to_rows(&seq.rp),
        delta_yaw: rotations_to_rows(&seq.delta_yaw),
        meta: DecompositionMeta {
            input: path_string(&a.input),
            epsilon: heading.epsilon(),
            max_reconstruction_residual: seq.max_reconstruction_residual(rotations),
        },
    };
    write_json(&a.out, &file).input()
}

pub fn reconstruct(a: &ReconstructArgs) -> Result<(), Failure> {
    let heading = heading_config().input()?;
    let obs = load_observations(&a.obs).input()?;
    let yaw0 = match obs.initial_yaw {
        Some(y) if !a.identity_initial_yaw => y,
        _ => Rotation::IDENTITY,
    };
    let scene = reconstruct_world_motion(&obs, &yaw0, &heading).input()?;
    write_json(&a.out, &SceneFile::from_scene(&scene)).input()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omitted {
    pub metric: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRow {
    pub start: usize,
    pub end: usize,
    pub wa_mpjpe_mm: f64,
    pub w_mpjpe_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMeta {
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub omitted: Vec<Omitted>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metrics: BTreeMap<String, f64>,
    pub segments: Vec<SegmentRow>,
    pub meta: ReportMeta,
}

fn metric_map(e: &Evaluation) -> BTreeMap<String, f64> {
    e.report
        .entries()
        .into_iter()
        .filter_map(|(k, v)| v.map(|v| (k.to_string(), v)))
        .collect()
}

fn omitted_list(e: &Evaluation) -> Vec<Omitted> {
    e.omitted
        .iter()
        .map(|(m, r)| Omitted {
            metric: m.to_string(),
            reason: r.to_string(),
        })
        .collect()
}

fn inputs(pairs: &[(&str, &Path)]) -> BTreeMap<String, String> {
    pairs
        .iter()
        .map(|(k, p)| (k.to_string(), path_string(p)))
        .collect()
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), Failure> {
    let pred = load_scene(&a.pred).input()?;
    let gt = load_scene(&a.gt).input()?;
    let eval = evaluate_scene(&pred, &gt).input()?;
    let segments: Vec<SegmentRow> = eval
        .segments
        .iter()
        .map(|s| SegmentRow {
            start: s.start,
            end: s.end,
            wa_mpjpe_mm: s.wa_mpjpe_mm,
            w_mpjpe_mm: s.w_mpjpe_mm,
        })
        .collect();
    let report = EvaluationReport {
        metrics: metric_map(&eval),
        segments: segments.clone(),
        meta: ReportMeta {
            inputs: inputs(&[("pred", &a.pred), ("gt", &a.gt)]),
            version: VERSION.into(),
            omitted: omitted_list(&eval),
            config: serde_json::json!({ "segment_frames": SEGMENT_LEN }),
        },
    };
    if let Some(csv_path) = &a.csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &segments {
            w.serialize(row).input()?;
        }
        let bytes = w.into_inner().map_err(|e| anyhow!("{e}")).input()?;
        write_atomic(csv_path, &bytes).input()?;
    }
    write_json(&a.out, &report).input()
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub solver: SolverConfig,
    pub weights: LossWeights,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMeta {
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub config: FitConfig,
    pub heading_epsilon: f64,
    pub iterations: usize,
    pub stop_reason: Option<StopReason>,
    pub loss_initial: f64,
    pub loss_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitFile {
    pub version: String,
    pub state: SolverState,
    pub observations: ObservationsFile,
    pub meta: FitMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub before: BTreeMap<String, f64>,
    pub after: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReportMeta {
    pub inputs: BTreeMap<String, String>,
    pub version: String,
    pub omitted: Vec<Omitted>,
    pub config: FitConfig,
    pub iterations: usize,
    pub stop_reason: Option<StopReason>,
    pub loss_initial: f64,
    pub loss_final: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub metrics: FitMetrics,
    pub meta: FitReportMeta,
}

fn score(
    obs: &Observations,
    yaw0: &Rotation,
    gt: &Scene,
    heading: &HeadingConfig,
) -> anyhow::Result<Evaluation> {
    let scene = reconstruct_world_motion(obs, yaw0, heading)?;
    Ok(evaluate_scene(&scene, gt)?)
}

pub fn fit(a: &FitArgs) -> Result<(), Failure> {
    let heading = heading_config().input()?;
    let obs = load_observations(&a.obs).input()?;
    if obs.len() > MAX_FRAMES {
        return Err(Failure::Input(anyhow!(
            "sequence of {} frames exceeds the solver limit of {MAX_FRAMES}",
            obs.len()
        )));
    }
    let gt = load_scene(&a.supervision).input()?;
    if gt.len() != obs.len() {
        return Err(Failure::Input(anyhow!(
            "supervision has {} frames, observations have {}",
            gt.len(),
            obs.len()
        )));
    }
    let sup = Supervision::from_scene(&gt).input()?;
    let cfg = match &a.config {
        Some(path) => read_json::<FitConfig>(path).input()?,
        None => FitConfig::default(),
    };
    cfg.solver.validate().input()?;
    cfg.weights.validate().input()?;

    let state =
        solver::fit(&obs, &sup, &cfg.solver, &cfg.weights, &heading).map_err(|e| match e {
            Error::SequenceTooLong { .. } => Failure::Input(e.into()),
            e => Failure::Solver(e.into()),
        })?;
    let loss_initial = state.loss_history.first().copied().unwrap_or(f64::NAN);
    let loss_final = state.loss_history.last().copied().unwrap_or(f64::NAN);
    let iterations = state.loss_history.len().saturating_sub(1);
    // No accepted step: keep the inputs bit-for-bit rather than re-deriving
    // roll-pitch from its angle parameters.
    let fitted = if iterations == 0 {
        obs.clone()
    } else {
        state
            .apply_to(&obs)
            .map_err(|e| Failure::Solver(e.into()))?
    };
    let input_paths = inputs(&[("obs", &a.obs), ("supervision", &a.supervision)]);

    if let Some(report_path) = &a.report {
        let yaw0 = yaw_factor(&gt.camera.rotations[0], &heading);
        let before = score(&obs, &yaw0, &gt, &heading).map_err(Failure::Solver)?;
        let after = score(&fitted, &yaw0, &gt, &heading).map_err(Failure::Solver)?;
        let report = FitReport {
            metrics: FitMetrics {
                before: metric_map(&before),
                after: metric_map(&after),
            },
            meta: FitReportMeta {
                inputs: input_paths.clone(),
                version: VERSION.into(),
                omitted: omitted_list(&after),
                config: cfg,
                iterations,
                stop_reason: state.stop_reason,
                loss_initial,
                loss_final,
            },
        };
        write_json(report_path, &report).input()?;
    }

    let file = FitFile {
        version: FORMAT_VERSION.into(),
        observations: ObservationsFile::from_observations(&fitted),
        meta: FitMeta {
            inputs: input_paths,
            version: VERSION.into(),
            config: cfg,
            heading_epsilon: heading.epsilon(),
            iterations,
            stop_reason: state.stop_reason,
            loss_initial,
            loss_final,
        },
        state,
    };
    write_json(&a.out, &file).input()
}
