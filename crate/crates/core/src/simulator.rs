//! Deterministic synthetic scenes: a walking three-joint human (root and two
//! feet) filmed by a camera rig, plus noise injection that turns a scene into
//! estimator-like observations.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
//! so scenes and observations are reproducible from `(config, seed)`.
//!
//! World convention: +Y down, ground plane at `y = 0`, so heights above the
//! ground are negative `y`.

use alloc::string::ToString;
use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{atan2, cos, round, sin};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::heading::{decompose_heading, HeadingConfig};
use crate::losses::{generate_contact_labels, CONTACT_SPEED_THRESHOLD};
use crate::so3::{axis_angle_unchecked, body_angular_velocity, Rotation, Vec3};
use crate::trajectory::{
    differentiate_trajectory, MotionSequence, Observations, Scene, FOOT_JOINT_NAMES,
};
use crate::{Error, Result};

/// Root height above the ground, meters.
pub const ROOT_HEIGHT: f64 = 0.9;

/// Slowest walking speed accepted for moving paths, m/s. Swing feet move at
/// roughly twice the root speed and must stay above the contact threshold.
pub const MIN_WALK_SPEED: f64 = 0.25;

pub const JOINT_NAMES: [&str; 3] = ["root", FOOT_JOINT_NAMES[0], FOOT_JOINT_NAMES[1]];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum HumanPath {
    Stationary,
    /// Straight line along +Z.
    Line {
        speed: f64,
    },
    /// Circle of the given radius starting at the origin heading +Z.
    Circle {
        speed: f64,
        radius: f64,
    },
    /// Lemniscate `(r sin 2φ / 2, r sin φ)` with `φ = speed·t / r`.
    FigureEight {
        speed: f64,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum CameraRig {
    /// Fixed pose to the left of the starting position, aimed at the first frame.
    Static { distance: f64, height: f64 },
    /// Circles the human at `rate` rad/s, always aimed at the root.
    Orbit { radius: f64, rate: f64, height: f64 },
    /// Trails the human along its heading, aimed at the root.
    Follow { distance: f64, height: f64 },
    /// Fixed position, pans to track the root, with seeded orientation shake
    /// of the given amplitude (radians).
    Handheld {
        distance: f64,
        height: f64,
        amplitude: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GaitConfig {
    /// Steps per second (both feet combined).
    pub cadence: f64,
    /// Peak swing height, meters.
    pub lift: f64,
    /// Lateral distance between the feet, meters.
    pub stance_width: f64,
}

impl Default for GaitConfig {
    fn default() -> Self {
        Self {
            cadence: 2.0,
            lift: 0.08,
            stance_width: 0.25,
        }
    }
}

impl GaitConfig {
    /// Frames per stance (equivalently per swing) phase at `fps`.
    pub fn half_cycle_frames(&self, fps: f64) -> usize {
        (round(fps / self.cadence) as usize).max(2)
    }

    /// Step length implied by walking at `speed`; the gait is frame-aligned,
    /// so the realized cadence is `fps / half_cycle_frames`.
    pub fn step_length(&self, speed: f64, fps: f64) -> f64 {
        speed * self.half_cycle_frames(fps) as f64 / fps
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SceneConfig {
    pub frames: usize,
    pub fps: f64,
    pub human_path: HumanPath,
    pub camera_rig: CameraRig,
    #[cfg_attr(feature = "serde", serde(default))]
    pub gait: GaitConfig,
}

pub const PATH_PRESETS: [&str; 4] = ["stationary", "line", "circle", "figure-eight"];
pub const RIG_PRESETS: [&str; 4] = ["static", "orbit", "follow", "handheld"];

impl HumanPath {
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "stationary" => HumanPath::Stationary,
            "line" => HumanPath::Line { speed: 1.2 },
            "circle" => HumanPath::Circle {
                speed: 1.2,
                radius: 3.0,
            },
            "figure-eight" => HumanPath::FigureEight {
                speed: 1.2,
                radius: 3.0,
            },
            _ => return None,
        })
    }

    /// Ground point (y = 0) at time `t`.
    fn ground_point(&self, t: f64) -> Vec3 {
        match *self {
            HumanPath::Stationary => Vec3::ZERO,
            HumanPath::Line { speed } => Vec3::new(0.0, 0.0, speed * t),
            HumanPath::Circle { speed, radius } => {
                let a = speed / radius * t;
                Vec3::new(radius * (1.0 - cos(a)), 0.0, radius * sin(a))
            }
            HumanPath::FigureEight { speed, radius } => {
                let phi = speed / radius * t;
                Vec3::new(0.5 * radius * sin(2.0 * phi), 0.0, radius * sin(phi))
            }
        }
    }

    /// Heading angle (about +Y) of the direction of travel at time `t`.
    fn heading(&self, t: f64) -> f64 {
        match *self {
            HumanPath::Stationary | HumanPath::Line { .. } => 0.0,
            HumanPath::Circle { speed, radius } => speed / radius * t,
            HumanPath::FigureEight { speed, radius } => {
                let phi = speed / radius * t;
                atan2(cos(2.0 * phi), cos(phi))
            }
        }
    }

    fn speed(&self) -> Option<f64> {
        match *self {
            HumanPath::Stationary => None,
            HumanPath::Line { speed }
            | HumanPath::Circle { speed, .. }
            | HumanPath::FigureEight { speed, .. } => Some(speed),
        }
    }

    fn radius(&self) -> Option<f64> {
        match *self {
            HumanPath::Circle { radius, .. } | HumanPath::FigureEight { radius, .. } => {
                Some(radius)
            }
            _ => None,
        }
    }
}

impl CameraRig {
    pub fn preset(name: &str) -> Option<Self> {
        Some(match name {
            "static" => CameraRig::Static {
                distance: 4.0,
                height: 1.5,
            },
            "orbit" => CameraRig::Orbit {
                radius: 4.0,
                rate: 0.3,
                height: 1.6,
            },
            "follow" => CameraRig::Follow {
                distance: 3.0,
                height: 1.7,
            },
            "handheld" => CameraRig::Handheld {
                distance: 4.0,
                height: 1.5,
                amplitude: 0.02,
            },
            _ => return None,
        })
    }
}

impl SceneConfig {
    /// `"<path>-<rig>"`, e.g. `circle-orbit` or `figure-eight-follow`.
    pub fn preset(name: &str, frames: usize, fps: f64) -> Result<Self> {
        let unknown = || Error::InvalidConfig(alloc::format!("unknown preset `{name}`"));
        let (path, rig) = name.rsplit_once('-').ok_or_else(unknown)?;
        Ok(Self {
            frames,
            fps,
            human_path: HumanPath::preset(path).ok_or_else(unknown)?,
            camera_rig: CameraRig::preset(rig).ok_or_else(unknown)?,
            gait: GaitConfig::default(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if self.frames < 2 {
            return bad("frames must be at least 2");
        }
        if !positive(self.fps) {
            return bad("fps must be positive");
        }
        if let Some(speed) = self.human_path.speed() {
            if !(speed >= MIN_WALK_SPEED) || !speed.is_finite() {
                return bad("walking speed must be at least 0.25 m/s");
            }
        }
        if let Some(r) = self.human_path.radius() {
            if !positive(r) {
                return bad("path radius must be positive");
            }
        }
        let rig_ok = match self.camera_rig {
            CameraRig::Static { distance, height } | CameraRig::Follow { distance, height } => {
                positive(distance) && positive(height)
            }
            CameraRig::Orbit {
                radius,
                rate,
                height,
            } => positive(radius) && rate.is_finite() && positive(height),
            CameraRig::Handheld {
                distance,
                height,
                amplitude,
            } => positive(distance) && positive(height) && (0.0..0.5).contains(&amplitude),
        };
        if !rig_ok {
            return bad("camera rig parameters must be positive (handheld amplitude in [0, 0.5))");
        }
        let g = &self.gait;
        if !positive(g.cadence)
            || !(g.lift >= 0.0)
            || !g.lift.is_finite()
            || !positive(g.stance_width)
        {
            return bad("gait cadence and stance width must be positive, lift non-negative");
        }
        Ok(())
    }
}

fn heading_dir(angle: f64) -> Vec3 {
    Vec3::new(sin(angle), 0.0, cos(angle))
}

fn root_at(path: &HumanPath, t: f64) -> Vec3 {
    path.ground_point(t) + Vec3::new(0.0, -ROOT_HEIGHT, 0.0)
}

/// Ground-contact schedule of the gait: `true` for every frame whose interval
/// to the next frame lies inside a stance phase. The last frame repeats the
/// previous entry.
pub fn stance_schedule(cfg: &SceneConfig) -> Vec<[bool; 2]> {
    let n = cfg.gait.half_cycle_frames(cfg.fps);
    let mut out: Vec<[bool; 2]> = (0..cfg.frames)
        .map(|i| {
            if cfg.human_path == HumanPath::Stationary {
                return [true, true];
            }
            let phase = |offset: usize| (i + offset) % (2 * n) < n;
            [phase(0), phase(n)]
        })
        .collect();
    if cfg.frames >= 2 {
        out[cfg.frames - 1] = out[cfg.frames - 2];
    }
    out
}

fn foot_position(cfg: &SceneConfig, frame: usize, foot: usize) -> Vec3 {
    let path = &cfg.human_path;
    let half_width = 0.5 * cfg.gait.stance_width;
    let side = if foot == 0 { -1.0 } else { 1.0 };
    let anchor = |tau: f64| {
        path.ground_point(tau)
            + Rotation::about_y(path.heading(tau)) * Vec3::new(side * half_width, 0.0, 0.0)
    };
    if *path == HumanPath::Stationary {
        return anchor(0.0);
    }

    let fps = cfg.fps;
    let n = cfg.gait.half_cycle_frames(fps);
    let offset = if foot == 0 { 0 } else { n };
    let u = frame + offset;
    let (cycle, local) = (u / (2 * n), u % (2 * n));
    // Mid-stance time of this cycle; the foot is planted under the path there.
    let plant = ((cycle * 2 * n) as f64 - offset as f64 + 0.5 * n as f64) / fps;
    if local < n {
        return anchor(plant);
    }
    let s = (local - n) as f64 / n as f64;
    let tau = plant + s * (2 * n) as f64 / fps;
    anchor(tau) + Vec3::new(0.0, -cfg.gait.lift * sin(PI * s), 0.0)
}

fn handheld_shake(rng: &mut ChaCha8Rng, amplitude: f64) -> impl Fn(f64) -> Rotation {
    let mut draw = || (rng.random_range(0.5..2.0), rng.random_range(0.0..2.0 * PI));
    let (fx, px) = draw();
    let (fy, py) = draw();
    let (fz, pz) = draw();
    move |t: f64| {
        let w = |f: f64, p: f64| amplitude * sin(2.0 * PI * f * t + p);
        Rotation::about_x(w(fx, px)) * Rotation::about_y(w(fy, py)) * Rotation::about_z(w(fz, pz))
    }
}

fn camera_pose(
    cfg: &SceneConfig,
    t: f64,
    shake: Option<&dyn Fn(f64) -> Rotation>,
) -> Result<(Rotation, Vec3)> {
    let path = &cfg.human_path;
    let root = root_at(path, t);
    let ground = path.ground_point(t);
    let degenerate = || Error::Degenerate("camera looks along the gravity axis");
    let (eye, target) = match cfg.camera_rig {
        CameraRig::Static { distance, height }
        | CameraRig::Handheld {
            distance, height, ..
        } => {
            let side = heading_dir(path.heading(0.0) - 0.5 * PI);
            let eye = path.ground_point(0.0) + side * distance + Vec3::new(0.0, -height, 0.0);
            let static_target = matches!(cfg.camera_rig, CameraRig::Static { .. });
            (
                eye,
                if static_target {
                    root_at(path, 0.0)
                } else {
                    root
                },
            )
        }
        CameraRig::Orbit {
            radius,
            rate,
            height,
        } => {
            let angle = path.heading(0.0) + rate * t;
            (
                ground + heading_dir(angle) * radius + Vec3::new(0.0, -height, 0.0),
                root,
            )
        }
        CameraRig::Follow { distance, height } => {
            let back = heading_dir(path.heading(t)) * -distance;
            (ground + back + Vec3::new(0.0, -height, 0.0), root)
        }
    };
    let mut r = Rotation::look_at(eye, target).ok_or_else(degenerate)?;
    if let Some(shake) = shake {
        r = r * shake(t);
    }
    Ok((r, eye))
}

/// Builds the ground-truth scene for `cfg`. The seed only drives the
/// handheld shake; every other quantity is closed-form.
pub fn generate_scene(cfg: &SceneConfig, seed: u64) -> Result<Scene> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shake = match cfg.camera_rig {
        CameraRig::Handheld { amplitude, .. } => Some(handheld_shake(&mut rng, amplitude)),
        _ => None,
    };
    let shake_ref: Option<&dyn Fn(f64) -> Rotation> =
        shake.as_ref().map(|f| f as &dyn Fn(f64) -> Rotation);

    let path = &cfg.human_path;
    let times: Vec<f64> = (0..cfg.frames).map(|i| i as f64 / cfg.fps).collect();

    let human_rotations: Vec<Rotation> = times
        .iter()
        .map(|&t| match path {
            HumanPath::Stationary => Rotation::IDENTITY,
            _ => Rotation::about_y(path.heading(t)),
        })
        .collect();
    let human_positions: Vec<Vec3> = times.iter().map(|&t| root_at(path, t)).collect();
    let joints: Vec<Vec<Vec3>> = (0..cfg.frames)
        .map(|i| {
            alloc::vec![
                human_positions[i],
                foot_position(cfg, i, 0),
                foot_position(cfg, i, 1)
            ]
        })
        .collect();
    let feet: Vec<Vec<Vec3>> = joints.iter().map(|j| j[1..].to_vec()).collect();
    let contacts = generate_contact_labels(&feet, cfg.fps, CONTACT_SPEED_THRESHOLD)?;

    let mut camera_rotations = Vec::with_capacity(cfg.frames);
    let mut camera_positions = Vec::with_capacity(cfg.frames);
    for &t in &times {
        let (r, p) = camera_pose(cfg, t, shake_ref)?;
        camera_rotations.push(r);
        camera_positions.push(p);
    }

    let human_v = differentiate_trajectory(&human_positions, &human_rotations)?;
    let camera_v = differentiate_trajectory(&camera_positions, &camera_rotations)?;

    let scene = Scene {
        camera: MotionSequence {
            fps: cfg.fps,
            rotations: camera_rotations,
            positions: camera_positions,
            local_velocities: Some(camera_v),
            joints: None,
            joint_names: Vec::new(),
            contacts: None,
        },
        human: MotionSequence {
            fps: cfg.fps,
            rotations: human_rotations,
            positions: human_positions,
            local_velocities: Some(human_v),
            joints: Some(joints),
            joint_names: JOINT_NAMES.iter().map(|s| s.to_string()).collect(),
            contacts: Some(contacts),
        },
    };
    scene.validate()?;
    Ok(scene)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NoiseModel {
    /// Std of the random rotation angle applied to each roll-pitch factor.
    pub rp_noise_rad: f64,
    /// Per-axis std added to local velocities, meters per frame.
    pub vel_noise_mpf: f64,
    /// Std of the random rotation angle applied to each body angular velocity.
    pub ang_vel_noise_rad: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v >= 0.0 && v.is_finite();
        if !ok(self.rp_noise_rad) || !ok(self.vel_noise_mpf) || !ok(self.ang_vel_noise_rad) {
            return Err(Error::InvalidConfig(
                "noise standard deviations must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Small rotation with axis uniform on the sphere and angle `~ N(0, std²)`.
pub fn random_small_rotation<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Rotation {
    let axis = loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(a) = v.try_normalize(1e-9) {
            break a;
        }
    };
    let angle: f64 = rng.sample::<f64, _>(StandardNormal) * std;
    axis_angle_unchecked(axis, angle)
}

/// Turns a scene into estimator-like observations.
///
/// With every standard deviation at zero the observations are the exact
/// ground-truth factors. Noisy roll-pitch factors are re-projected so they
/// carry no heading component.
pub fn perturb(scene: &Scene, noise: &NoiseModel) -> Result<Observations> {
    scene.validate()?;
    noise.validate()?;
    let cfg = HeadingConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let cam = &scene.camera;
    let human = &scene.human;

    let decomps: Vec<_> = cam
        .rotations
        .iter()
        .map(|r| decompose_heading(r, &cfg))
        .collect();
    let rp = decomps
        .iter()
        .map(|d| {
            if noise.rp_noise_rad > 0.0 {
                let noisy = d.rp * random_small_rotation(&mut rng, noise.rp_noise_rad);
                decompose_heading(&noisy, &cfg).rp
            } else {
                d.rp
            }
        })
        .collect();
    let body_angular_velocities = cam
        .rotations
        .windows(2)
        .map(|w| {
            let d = body_angular_velocity(&w[0], &w[1]);
            if noise.ang_vel_noise_rad > 0.0 {
                d * random_small_rotation(&mut rng, noise.ang_vel_noise_rad)
            } else {
                d
            }
        })
        .collect();
    let mut noisy_velocities = |v: Vec<Vec3>| -> Vec<Vec3> {
        if noise.vel_noise_mpf == 0.0 {
            return v;
        }
        v.into_iter()
            .map(|x| {
                let e = Vec3::new(
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                    rng.sample(StandardNormal),
                );
                x + e * noise.vel_noise_mpf
            })
            .collect()
    };
    let human_local_velocities = noisy_velocities(human.derived_local_velocities()?);
    let camera_local_velocities = noisy_velocities(cam.derived_local_velocities()?);

    let human_in_camera = cam
        .rotations
        .iter()
        .zip(&human.rotations)
        .map(|(c, h)| c.transpose() * *h)
        .collect();
    let local_joints = human.joints.as_ref().map(|joints| {
        joints
            .iter()
            .zip(&human.rotations)
            .zip(&human.positions)
            .map(|((frame, r), root)| frame.iter().map(|p| r.transpose() * (*p - *root)).collect())
            .collect()
    });

    let obs = Observations {
        fps: scene.fps(),
        rp,
        body_angular_velocities,
        human_in_camera,
        human_local_velocities,
        camera_local_velocities,
        local_joints,
        joint_names: human.joint_names.clone(),
        initial_yaw: Some(decomps[0].yaw),
        human_origin: human.positions[0],
        camera_origin: cam.positions[0],
    };
    obs.validate()?;
    Ok(obs)
}

/// Random orientations and smooth orientation sequences for property checks.
pub mod sampling {
    use super::*;
    use core::f64::consts::FRAC_PI_2;

    /// `yaw · pitch · roll` with yaw and roll uniform on `(−π, π)` and pitch
    /// (elevation of the forward axis) uniform within `margin` of ±π/2.
    pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, pitch_margin: f64) -> Rotation {
        let limit = FRAC_PI_2 - pitch_margin;
        Rotation::about_y(rng.random_range(-PI..PI))
            * Rotation::about_x(rng.random_range(-limit..limit))
            * Rotation::about_z(rng.random_range(-PI..PI))
    }

    /// Random walk in yaw/pitch/roll; consecutive frames differ by at most
    /// `max_step` radians of geodesic distance.
    pub fn random_smooth_rotations<R: Rng + ?Sized>(
        rng: &mut R,
        frames: usize,
        max_step: f64,
        pitch_margin: f64,
    ) -> Vec<Rotation> {
        let limit = FRAC_PI_2 - pitch_margin;
        let mut yaw = rng.random_range(-PI..PI);
        let mut pitch = rng.random_range(-limit..limit);
        let mut roll = rng.random_range(-PI..PI);
        let step = max_step / 3.0;
        (0..frames)
            .map(|i| {
                if i > 0 {
                    yaw += rng.random_range(-step..step);
                    roll += rng.random_range(-step..step);
                    pitch += rng.random_range(-step..step);
                    if pitch.abs() > limit {
                        pitch = pitch.signum() * (2.0 * limit - pitch.abs());
                    }
                }
                Rotation::about_y(yaw) * Rotation::about_x(pitch) * Rotation::about_z(roll)
            })
            .collect()
    }

    pub fn random_vec3<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Vec3 {
        Vec3::new(
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
            rng.random_range(-scale..scale),
        )
    }
}
