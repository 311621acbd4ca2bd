//! Small inverse problem: recover per-frame camera roll-pitch and human local
//! velocity from noisy observations by descending the trajectory losses, with
//! finite-difference gradients and a backtracking line search.
//!
//! Parameter layout: `[pitch₀, roll₀, …, pitch_{T−1}, roll_{T−1}, v₀ₓ, v₀ᵧ, v₀z, …]`.
//! Roll-pitch is charted as `Rx(pitch) · Rz(roll)`, which has no heading
//! component for `|pitch| < π/2`.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use libm::{atan2, sqrt};

use crate::heading::{
    compose_world_orientation, decompose_heading, heading_deltas, integrate_heading, HeadingConfig,
};
use crate::losses::{simple_loss, teacher_forcing_traj_loss, LossWeights, PredictionVector};
use crate::so3::{Rotation, Vec3};
use crate::trajectory::{integrate_trajectory, Observations, Scene};
use crate::{Error, Result};

/// Longest sequence `fit` accepts.
pub const MAX_FRAMES: usize = 512;

/// Losses at or below this are treated as already converged.
const CONVERGED_LOSS: f64 = 1e-10;
const MAX_HALVINGS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SolverConfig {
    pub max_iters: usize,
    pub step_init: f64,
    pub fd_step: f64,
    /// Stop once an accepted step lowers the loss by less than this fraction.
    pub tol: f64,
    pub data_weight: f64,
    /// Curvature pairs kept for limited-memory BFGS directions; 0 gives plain
    /// gradient descent.
    pub memory: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 300,
            step_init: 1e-3,
            fd_step: 1e-5,
            tol: 1e-8,
            data_weight: 0.1,
            memory: 10,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.step_init) || !positive(self.fd_step) || !positive(self.tol) {
            return Err(Error::InvalidConfig(
                "step_init, fd_step and tol must be positive".into(),
            ));
        }
        if !(self.data_weight >= 0.0) || !self.data_weight.is_finite() {
            return Err(Error::InvalidConfig(
                "data_weight must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum StopReason {
    /// The initial loss was already at the minimum.
    Converged,
    /// Relative decrease fell below `tol`.
    Tolerance,
    MaxIters,
    /// No decrease within the allowed halvings after at least one accepted step.
    LineSearch,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SolverState {
    /// `(pitch, roll)` per frame, radians.
    pub rp_params: Vec<[f64; 2]>,
    /// Human root local velocity per frame transition, meters per frame.
    pub velocities: Vec<Vec3>,
    /// Loss at initialization followed by the loss after each accepted step.
    pub loss_history: Vec<f64>,
    pub stop_reason: Option<StopReason>,
}

/// Ground-truth signals the trajectory losses compare against.
#[derive(Debug, Clone, PartialEq)]
pub struct Supervision {
    pub human_rotations: Vec<Rotation>,
    pub human_positions: Vec<Vec3>,
    pub human_local_velocities: Vec<Vec3>,
    pub camera_rotations: Vec<Rotation>,
    pub camera_positions: Vec<Vec3>,
    pub camera_local_velocities: Vec<Vec3>,
}

impl Supervision {
    pub fn from_scene(scene: &Scene) -> Result<Self> {
        scene.validate()?;
        Ok(Self {
            human_rotations: scene.human.rotations.clone(),
            human_positions: scene.human.positions.clone(),
            human_local_velocities: scene.human.derived_local_velocities()?,
            camera_rotations: scene.camera.rotations.clone(),
            camera_positions: scene.camera.positions.clone(),
            camera_local_velocities: scene.camera.derived_local_velocities()?,
        })
    }

    pub fn len(&self) -> usize {
        self.camera_rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.camera_rotations.is_empty()
    }
}

/// `Rx(pitch) · Rz(roll)`.
pub fn rp_from_params(pitch: f64, roll: f64) -> Rotation {
    Rotation::about_x(pitch) * Rotation::about_z(roll)
}

/// Inverse of [`rp_from_params`] for heading-free rotations.
pub fn params_from_rp(rp: &Rotation) -> [f64; 2] {
    let f = rp.col(2);
    let pitch = atan2(-f.y, f.z);
    let m = *(Rotation::about_x(pitch).transpose() * *rp).matrix();
    [pitch, atan2(m.0[1][0], m.0[0][0])]
}

impl SolverState {
    /// State whose roll-pitch and human velocities equal the observations.
    pub fn from_observations(obs: &Observations) -> Self {
        Self {
            rp_params: obs.rp.iter().map(params_from_rp).collect(),
            velocities: obs.human_local_velocities.clone(),
            loss_history: Vec::new(),
            stop_reason: None,
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = Vec::with_capacity(2 * self.rp_params.len() + 3 * self.velocities.len());
        x.extend(self.rp_params.iter().flatten());
        x.extend(self.velocities.iter().flat_map(|v| v.to_array()));
        x
    }

    pub fn from_vector(x: &[f64], frames: usize) -> Result<Self> {
        let expected = 5 * frames - 3;
        if x.len() != expected {
            return Err(Error::LengthMismatch {
                what: "solver parameters",
                expected,
                found: x.len(),
            });
        }
        let (rp, v) = x.split_at(2 * frames);
        Ok(Self {
            rp_params: rp.chunks_exact(2).map(|c| [c[0], c[1]]).collect(),
            velocities: v
                .chunks_exact(3)
                .map(|c| Vec3::new(c[0], c[1], c[2]))
                .collect(),
            loss_history: Vec::new(),
            stop_reason: None,
        })
    }

    pub fn rp_rotations(&self) -> Vec<Rotation> {
        self.rp_params
            .iter()
            .map(|p| rp_from_params(p[0], p[1]))
            .collect()
    }

    /// Observations with roll-pitch and human velocities replaced by this state.
    pub fn apply_to(&self, obs: &Observations) -> Result<Observations> {
        let mut out = obs.clone();
        out.rp = self.rp_rotations();
        out.human_local_velocities = self.velocities.clone();
        out.validate()?;
        Ok(out)
    }
}

/// Camera and human world orientations implied by a state: heading integrated
/// from the supervision's first camera heading.
pub fn predicted_orientations(
    state: &SolverState,
    obs: &Observations,
    sup: &Supervision,
    heading: &HeadingConfig,
) -> Result<(Vec<Rotation>, Vec<Rotation>)> {
    let rp = state.rp_rotations();
    let deltas = heading_deltas(&obs.body_angular_velocities, &rp, heading)?;
    let yaw0 = decompose_heading(&sup.camera_rotations[0], heading).yaw;
    let yaw = integrate_heading(&yaw0, &deltas, heading)?;
    let camera = yaw.iter().zip(&rp).map(|(y, r)| *y * *r).collect();
    let human = yaw
        .iter()
        .zip(&rp)
        .zip(&obs.human_in_camera)
        .map(|((y, r), hc)| compose_world_orientation(y, r, hc))
        .collect();
    Ok((camera, human))
}

fn check_lengths(state: &SolverState, obs: &Observations, sup: &Supervision) -> Result<()> {
    let t = obs.len();
    let checks = [
        ("state rp_params", t, state.rp_params.len()),
        (
            "state velocities",
            t.saturating_sub(1),
            state.velocities.len(),
        ),
        ("supervision human rotations", t, sup.human_rotations.len()),
        ("supervision human positions", t, sup.human_positions.len()),
        (
            "supervision human velocities",
            t.saturating_sub(1),
            sup.human_local_velocities.len(),
        ),
        (
            "supervision camera rotations",
            t,
            sup.camera_rotations.len(),
        ),
        (
            "supervision camera positions",
            t,
            sup.camera_positions.len(),
        ),
        (
            "supervision camera velocities",
            t.saturating_sub(1),
            sup.camera_local_velocities.len(),
        ),
    ];
    for (what, expected, found) in checks {
        if expected != found {
            return Err(Error::LengthMismatch {
                what,
                expected,
                found,
            });
        }
    }
    if t < 2 {
        return Err(Error::TooFewFrames {
            what: "solver",
            needed: 2,
            found: t,
        });
    }
    Ok(())
}

/// `λ_h · L_traj(human) + λ_cam · L_traj(camera) + data_weight · simple_loss(state, obs)`.
///
/// The human branch predicts velocities from the state and orientations from
/// the state's roll-pitch; the camera branch predicts orientations from the
/// state's roll-pitch and takes velocities from the observations.
pub fn objective(
    state: &SolverState,
    obs: &Observations,
    sup: &Supervision,
    w: &LossWeights,
    data_weight: f64,
    heading: &HeadingConfig,
) -> Result<f64> {
    check_lengths(state, obs, sup)?;
    let (camera, human) = predicted_orientations(state, obs, sup, heading)?;
    let mut total = 0.0;
    if w.lambda_h != 0.0 {
        total += w.lambda_h
            * teacher_forcing_traj_loss(
                &state.velocities,
                &human,
                &sup.human_local_velocities,
                &sup.human_rotations,
                &sup.human_positions,
            )?;
    }
    if w.lambda_cam != 0.0 {
        total += w.lambda_cam
            * teacher_forcing_traj_loss(
                &obs.camera_local_velocities,
                &camera,
                &sup.camera_local_velocities,
                &sup.camera_rotations,
                &sup.camera_positions,
            )?;
    }
    if data_weight != 0.0 {
        let reference = SolverState::from_observations(obs);
        total += data_weight
            * simple_loss(
                &PredictionVector::unmasked(state.to_vector()),
                &PredictionVector::unmasked(reference.to_vector()),
            )?;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite("objective"));
    }
    Ok(total)
}

/// Central differences `(f(x + h eᵢ) − f(x − h eᵢ)) / 2h`.
pub fn finite_difference_gradient<F>(mut f: F, x: &[f64], h: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> f64,
{
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidConfig(
            "finite-difference step must be positive".into(),
        ));
    }
    if !f(x).is_finite() {
        return Err(Error::NonFinite("objective at the base point"));
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let plus = f(&probe);
        probe[i] = x[i] - h;
        let minus = f(&probe);
        probe[i] = x[i];
        let g = (plus - minus) / (2.0 * h);
        if !g.is_finite() {
            return Err(Error::NonFinite("finite-difference gradient"));
        }
        grad.push(g);
    }
    Ok(grad)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Limited-memory curvature pairs `(s, y)`, oldest first.
struct Curvature {
    capacity: usize,
    pairs: VecDeque<(Vec<f64>, Vec<f64>)>,
}

impl Curvature {
    fn push(&mut self, s: Vec<f64>, y: Vec<f64>) {
        if self.capacity == 0 || !(dot(&s, &y) > 1e-12 * sqrt(dot(&s, &s)) * sqrt(dot(&y, &y))) {
            return;
        }
        if self.pairs.len() == self.capacity {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y));
    }

    /// Two-loop recursion: approximate inverse Hessian applied to `g`.
    fn apply(&self, g: &[f64]) -> Vec<f64> {
        let mut q = g.to_vec();
        let mut alpha = Vec::with_capacity(self.pairs.len());
        for (s, y) in self.pairs.iter().rev() {
            let a = dot(s, &q) / dot(y, s);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alpha.push(a);
        }
        if let Some((s, y)) = self.pairs.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|qi| *qi *= gamma);
        }
        for ((s, y), a) in self.pairs.iter().zip(alpha.iter().rev()) {
            let b = dot(y, &q) / dot(y, s);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        q
    }
}

/// Descent from the observations with a backtracking line search.
///
/// Search directions come from the finite-difference gradient, preconditioned
/// by limited-memory BFGS curvature pairs when `cfg.memory > 0`. Each accepted
/// step strictly lowers the loss. A trial step is halved up to 20 times; if a
/// preconditioned direction fails, the memory is cleared and the plain
/// gradient direction is tried before giving up.
pub fn fit(
    obs: &Observations,
    sup: &Supervision,
    cfg: &SolverConfig,
    w: &LossWeights,
    heading: &HeadingConfig,
) -> Result<SolverState> {
    cfg.validate()?;
    w.validate()?;
    obs.validate()?;
    let frames = obs.len();
    if frames > MAX_FRAMES {
        return Err(Error::SequenceTooLong {
            frames,
            limit: MAX_FRAMES,
        });
    }
    let init = SolverState::from_observations(obs);
    check_lengths(&init, obs, sup)?;

    let eval = |x: &[f64]| -> f64 {
        SolverState::from_vector(x, frames)
            .and_then(|s| objective(&s, obs, sup, w, cfg.data_weight, heading))
            .unwrap_or(f64::INFINITY)
    };
    let search = |x: &[f64], dir: &[f64], loss: f64, step: &mut f64| -> Option<(Vec<f64>, f64)> {
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(dir).map(|(xi, di)| xi - *step * di).collect();
            let trial_loss = eval(&trial);
            if trial_loss < loss {
                return Some((trial, trial_loss));
            }
            *step *= 0.5;
        }
        None
    };

    let mut x = init.to_vector();
    let mut loss = eval(&x);
    if !loss.is_finite() {
        return Err(Error::NonFinite("objective at initialization"));
    }
    let mut history = alloc::vec![loss];
    let mut reason = StopReason::MaxIters;
    let mut gradient_step = cfg.step_init;
    let mut memory = Curvature {
        capacity: cfg.memory,
        pairs: VecDeque::new(),
    };

    if loss <= CONVERGED_LOSS {
        reason = StopReason::Converged;
    } else {
        let mut grad = finite_difference_gradient(eval, &x, cfg.fd_step)?;
        for iter in 0..cfg.max_iters {
            if grad.iter().all(|g| *g == 0.0) {
                reason = if iter == 0 {
                    StopReason::Converged
                } else {
                    StopReason::Tolerance
                };
                break;
            }
            let mut accepted = None;
            if !memory.pairs.is_empty() {
                let mut unit = 1.0;
                accepted = search(&x, &memory.apply(&grad), loss, &mut unit);
                if accepted.is_none() {
                    memory.pairs.clear();
                }
            }
            if accepted.is_none() {
                accepted = search(&x, &grad, loss, &mut gradient_step);
                if accepted.is_some() {
                    gradient_step *= 2.0;
                }
            }
            let Some((next, next_loss)) = accepted else {
                if iter == 0 {
                    return Err(Error::NotDecreasable);
                }
                reason = StopReason::LineSearch;
                break;
            };
            let relative = (loss - next_loss) / loss;
            let next_grad = finite_difference_gradient(eval, &next, cfg.fd_step)?;
            memory.push(
                next.iter().zip(&x).map(|(a, b)| a - b).collect(),
                next_grad.iter().zip(&grad).map(|(a, b)| a - b).collect(),
            );
            x = next;
            grad = next_grad;
            loss = next_loss;
            history.push(loss);
            if relative < cfg.tol || loss <= CONVERGED_LOSS {
                reason = StopReason::Tolerance;
                break;
            }
        }
    }

    let mut state = SolverState::from_vector(&x, frames)?;
    state.loss_history = history;
    state.stop_reason = Some(reason);
    Ok(state)
}

/// Camera positions implied by a state: dead reckoning of the observed camera
/// velocities under the state's camera orientations.
pub fn predicted_camera_positions(
    state: &SolverState,
    obs: &Observations,
    sup: &Supervision,
    heading: &HeadingConfig,
) -> Result<Vec<Vec3>> {
    let (camera, _) = predicted_orientations(state, obs, sup, heading)?;
    integrate_trajectory(
        sup.camera_positions[0],
        &camera,
        &obs.camera_local_velocities,
    )
}
