//! World-frame position reconstruction by dead reckoning.
//!
//! Local velocities are per-frame displacements expressed in the body's own
//! basis: `v[t] = R[t]ᵀ (p[t+1] − p[t])`, in meters per frame. Integration is
//! the exact inverse, `p[t+1] = p[t] + R[t] v[t]`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::heading::{compose_world_orientation, heading_deltas, integrate_heading, HeadingConfig};
use crate::so3::{body_angular_velocity, Rotation, Vec3};
use crate::{Error, Result};

/// Joint names of the feet in the minimal skeleton, in contact order.
pub const FOOT_JOINT_NAMES: [&str; 2] = ["left_foot", "right_foot"];

/// Timestamped trajectory of one body (a human root or a camera).
#[derive(Debug, Clone, PartialEq)]
pub struct MotionSequence {
    pub fps: f64,
    /// World orientation per frame.
    pub rotations: Vec<Rotation>,
    /// World root position per frame, meters.
    pub positions: Vec<Vec3>,
    /// `T − 1` local displacements, meters per frame.
    pub local_velocities: Option<Vec<Vec3>>,
    /// World joint positions per frame, meters.
    pub joints: Option<Vec<Vec<Vec3>>>,
    pub joint_names: Vec<String>,
    /// Per-frame, per-foot ground contact.
    pub contacts: Option<Vec<Vec<bool>>>,
}

impl MotionSequence {
    /// A bare orientation + position track.
    pub fn new(fps: f64, rotations: Vec<Rotation>, positions: Vec<Vec3>) -> Result<Self> {
        let seq = Self {
            fps,
            rotations,
            positions,
            local_velocities: None,
            joints: None,
            joint_names: Vec::new(),
            contacts: None,
        };
        seq.validate()?;
        Ok(seq)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        let t = self.positions.len();
        if t == 0 {
            return Err(Error::TooFewFrames {
                what: "motion sequence",
                needed: 1,
                found: 0,
            });
        }
        check_len("rotations", t, self.rotations.len())?;
        if self.positions.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        if let Some(v) = &self.local_velocities {
            check_len("local_velocities", t - 1, v.len())?;
            if v.iter().any(|p| !p.is_finite()) {
                return Err(Error::NonFinite("local_velocities"));
            }
        }
        if let Some(joints) = &self.joints {
            check_len("joints", t, joints.len())?;
            let j = joints[0].len();
            for frame in joints {
                check_len("joints per frame", j, frame.len())?;
                if frame.iter().any(|p| !p.is_finite()) {
                    return Err(Error::NonFinite("joints"));
                }
            }
            if !self.joint_names.is_empty() {
                check_len("joint_names", j, self.joint_names.len())?;
            }
        }
        if let Some(contacts) = &self.contacts {
            check_len("contacts", t, contacts.len())?;
            for frame in contacts {
                check_len("contacts per frame", FOOT_JOINT_NAMES.len(), frame.len())?;
            }
        }
        Ok(())
    }

    /// Local velocities as stored, or derived from the track.
    pub fn derived_local_velocities(&self) -> Result<Vec<Vec3>> {
        match &self.local_velocities {
            Some(v) => Ok(v.clone()),
            None => differentiate_trajectory(&self.positions, &self.rotations),
        }
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_names.iter().position(|n| n == name)
    }

    /// Per-frame positions of the named feet, if joints and names are present.
    pub fn foot_positions(&self) -> Option<Vec<Vec<Vec3>>> {
        let joints = self.joints.as_ref()?;
        let idx: Vec<usize> = FOOT_JOINT_NAMES
            .iter()
            .map(|n| self.joint_index(n))
            .collect::<Option<_>>()?;
        Some(
            joints
                .iter()
                .map(|frame| idx.iter().map(|&i| frame[i]).collect())
                .collect(),
        )
    }
}

fn check_len(what: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch {
            what,
            expected,
            found,
        });
    }
    Ok(())
}

/// Ground-truth (or reconstructed) camera and human motion over shared frames.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub camera: MotionSequence,
    pub human: MotionSequence,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.camera.validate()?;
        self.human.validate()?;
        check_len(
            "camera frames vs human frames",
            self.human.len(),
            self.camera.len(),
        )?;
        if self.camera.fps != self.human.fps {
            return Err(Error::InvalidConfig(alloc::format!(
                "camera fps {} differs from human fps {}",
                self.camera.fps,
                self.human.fps
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.human.len()
    }

    pub fn is_empty(&self) -> bool {
        self.human.is_empty()
    }

    pub fn fps(&self) -> f64 {
        self.human.fps
    }
}

/// The per-frame quantities a monocular estimator supplies: camera roll-pitch,
/// camera body-frame angular velocity, camera-space human orientation, and
/// local velocities of both bodies.
#[derive(Debug, Clone, PartialEq)]
pub struct Observations {
    pub fps: f64,
    /// Camera roll-pitch factor per frame (`T`).
    pub rp: Vec<Rotation>,
    /// Camera body-frame angular velocity `Rₜᵀ Rₜ₊₁` (`T − 1`).
    pub body_angular_velocities: Vec<Rotation>,
    /// Human orientation in the camera frame, `R^{h,c}` (`T`).
    pub human_in_camera: Vec<Rotation>,
    /// Human root local velocity (`T − 1`), meters per frame.
    pub human_local_velocities: Vec<Vec3>,
    /// Camera local velocity (`T − 1`), meters per frame.
    pub camera_local_velocities: Vec<Vec3>,
    /// Joint offsets from the root, in the human root frame (`T × J`).
    pub local_joints: Option<Vec<Vec<Vec3>>>,
    pub joint_names: Vec<String>,
    /// Ground-truth heading anchor for frame 0, when known.
    pub initial_yaw: Option<Rotation>,
    pub human_origin: Vec3,
    pub camera_origin: Vec3,
}

impl Observations {
    pub fn len(&self) -> usize {
        self.rp.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rp.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0) || !self.fps.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        let t = self.rp.len();
        if t < 2 {
            return Err(Error::TooFewFrames {
                what: "observations",
                needed: 2,
                found: t,
            });
        }
        check_len(
            "body_angular_velocities",
            t - 1,
            self.body_angular_velocities.len(),
        )?;
        check_len("human_in_camera", t, self.human_in_camera.len())?;
        check_len(
            "human_local_velocities",
            t - 1,
            self.human_local_velocities.len(),
        )?;
        check_len(
            "camera_local_velocities",
            t - 1,
            self.camera_local_velocities.len(),
        )?;
        if let Some(j) = &self.local_joints {
            check_len("local_joints", t, j.len())?;
            if !self.joint_names.is_empty() {
                for frame in j {
                    check_len(
                        "local_joints per frame",
                        self.joint_names.len(),
                        frame.len(),
                    )?;
                }
            }
        }
        Ok(())
    }
}

/// `out[0] = t0`, `out[t+1] = out[t] + rotations[t] · local_velocities[t]`.
pub fn integrate_trajectory(
    t0: Vec3,
    rotations: &[Rotation],
    local_velocities: &[Vec3],
) -> Result<Vec<Vec3>> {
    check_len(
        "rotations vs local velocities + 1",
        local_velocities.len() + 1,
        rotations.len(),
    )?;
    let mut out = Vec::with_capacity(rotations.len());
    let mut p = t0;
    out.push(p);
    for (r, v) in rotations.iter().zip(local_velocities) {
        p += *r * *v;
        out.push(p);
    }
    Ok(out)
}

/// `v[t] = rotations[t]ᵀ (positions[t+1] − positions[t])`.
pub fn differentiate_trajectory(positions: &[Vec3], rotations: &[Rotation]) -> Result<Vec<Vec3>> {
    check_len("positions vs rotations", rotations.len(), positions.len())?;
    if positions.len() < 2 {
        return Err(Error::TooFewFrames {
            what: "differentiate_trajectory",
            needed: 2,
            found: positions.len(),
        });
    }
    Ok(positions
        .windows(2)
        .zip(rotations)
        .map(|(p, r)| r.transpose() * (p[1] - p[0]))
        .collect())
}

/// Body-frame angular velocities of an orientation sequence.
pub fn body_angular_velocities(rotations: &[Rotation]) -> Vec<Rotation> {
    rotations
        .windows(2)
        .map(|w| body_angular_velocity(&w[0], &w[1]))
        .collect()
}

/// Rebuilds world-frame camera and human motion from observations.
///
/// Camera heading is integrated from `initial_yaw` using heading deltas
/// derived from the body angular velocities and roll-pitch estimates; camera
/// orientation is `yaw · rp`, human orientation is `yaw · rp · R^{h,c}`, and
/// both tracks are dead-reckoned from their origins. When local joint offsets
/// are present the human joints are placed around the reconstructed root.
pub fn reconstruct_world_motion(
    obs: &Observations,
    initial_yaw: &Rotation,
    cfg: &HeadingConfig,
) -> Result<Scene> {
    obs.validate()?;
    let deltas = heading_deltas(&obs.body_angular_velocities, &obs.rp, cfg)?;
    let yaw = integrate_heading(initial_yaw, &deltas, cfg)?;

    let camera_rotations: Vec<Rotation> = yaw.iter().zip(&obs.rp).map(|(y, rp)| *y * *rp).collect();
    let human_rotations: Vec<Rotation> = yaw
        .iter()
        .zip(&obs.rp)
        .zip(&obs.human_in_camera)
        .map(|((y, rp), hc)| compose_world_orientation(y, rp, hc))
        .collect();

    let camera_positions = integrate_trajectory(
        obs.camera_origin,
        &camera_rotations,
        &obs.camera_local_velocities,
    )?;
    let human_positions = integrate_trajectory(
        obs.human_origin,
        &human_rotations,
        &obs.human_local_velocities,
    )?;

    let joints = obs.local_joints.as_ref().map(|local| {
        local
            .iter()
            .zip(&human_rotations)
            .zip(&human_positions)
            .map(|((offsets, r), root)| offsets.iter().map(|o| *root + *r * *o).collect())
            .collect()
    });

    let camera = MotionSequence {
        fps: obs.fps,
        rotations: camera_rotations,
        positions: camera_positions,
        local_velocities: Some(obs.camera_local_velocities.clone()),
        joints: None,
        joint_names: Vec::new(),
        contacts: None,
    };
    let human = MotionSequence {
        fps: obs.fps,
        rotations: human_rotations,
        positions: human_positions,
        local_velocities: Some(obs.human_local_velocities.clone()),
        joints,
        joint_names: obs.joint_names.clone(),
        contacts: None,
    };
    let scene = Scene { camera, human };
    scene.validate()?;
    Ok(scene)
}
