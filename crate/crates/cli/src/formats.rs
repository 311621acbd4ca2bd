//! JSON file formats. Rotations are row-major 9-arrays, vectors `[x, y, z]`
//! in meters (velocities in meters per frame).

use anyhow::{bail, ensure, Context, Result};
use headtraj_core::so3::conventions;
use headtraj_core::{MotionSequence, Observations, Rotation, Scene, Vec3};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BodyFile {
    pub rotations: Vec<[f64; 9]>,
    pub positions: Vec<Vec3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_velocities: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joints: Option<Vec<Vec<Vec3>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contacts: Option<Vec<Vec<bool>>>,
    #[serde(default)]
    pub joint_names: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneFile {
    pub version: String,
    pub fps: f64,
    pub convention: String,
    pub camera: BodyFile,
    pub human: BodyFile,
}

fn check_header(version: &str, convention: &str) -> Result<()> {
    ensure!(
        version == FORMAT_VERSION,
        "unsupported format version `{version}` (expected `{FORMAT_VERSION}`)"
    );
    ensure!(
        convention == conventions::NAME,
        "unsupported frame convention `{convention}` (expected `{}`)",
        conventions::NAME
    );
    Ok(())
}

pub fn rotations_from_rows(what: &str, rows: &[[f64; 9]]) -> Result<Vec<Rotation>> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| Rotation::try_from_row_major(*r).with_context(|| format!("{what}[{i}]")))
        .collect()
}

pub fn rotations_to_rows(rots: &[Rotation]) -> Vec<[f64; 9]> {
    rots.iter().map(Rotation::to_row_major).collect()
}

impl BodyFile {
    pub fn from_motion(m: &MotionSequence) -> Self {
        Self {
            rotations: rotations_to_rows(&m.rotations),
            positions: m.positions.clone(),
            local_velocities: m.local_velocities.clone(),
            joints: m.joints.clone(),
            contacts: m.contacts.clone(),
            joint_names: m.joint_names.clone(),
        }
    }

    fn into_motion(self, fps: f64, what: &str) -> Result<MotionSequence> {
        let m = MotionSequence {
            fps,
            rotations: rotations_from_rows(&format!("{what}.rotations"), &self.rotations)?,
            positions: self.positions,
            local_velocities: self.local_velocities,
            joints: self.joints,
            joint_names: self.joint_names,
            contacts: self.contacts,
        };
        m.validate()
            .with_context(|| format!("invalid {what} track"))?;
        Ok(m)
    }
}

impl SceneFile {
    pub fn from_scene(scene: &Scene) -> Self {
        Self {
            version: FORMAT_VERSION.into(),
            fps: scene.fps(),
            convention: conventions::NAME.into(),
            camera: BodyFile::from_motion(&scene.camera),
            human: BodyFile::from_motion(&scene.human),
        }
    }

    pub fn into_scene(self) -> Result<Scene> {
        check_header(&self.version, &self.convention)?;
        let scene = Scene {
            camera: self.camera.into_motion(self.fps, "camera")?,
            human: self.human.into_motion(self.fps, "human")?,
        };
        scene.validate().context("invalid scene")?;
        Ok(scene)
    }
}

/// Observation channels. Every channel is optional on input so that missing
/// ones can be reported together.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ObservationsFile {
    pub version: Option<String>,
    pub fps: Option<f64>,
    pub convention: Option<String>,
    pub rp: Option<Vec<[f64; 9]>>,
    pub body_angular_velocities: Option<Vec<[f64; 9]>>,
    pub human_in_camera: Option<Vec<[f64; 9]>>,
    pub human_local_velocities: Option<Vec<Vec3>>,
    pub camera_local_velocities: Option<Vec<Vec3>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub local_joints: Option<Vec<Vec<Vec3>>>,
    #[serde(default)]
    pub joint_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_yaw: Option<[f64; 9]>,
    #[serde(default)]
    pub human_origin: Vec3,
    #[serde(default)]
    pub camera_origin: Vec3,
}

impl ObservationsFile {
    pub fn from_observations(obs: &Observations) -> Self {
        Self {
            version: Some(FORMAT_VERSION.into()),
            fps: Some(obs.fps),
            convention: Some(conventions::NAME.into()),
            rp: Some(rotations_to_rows(&obs.rp)),
            body_angular_velocities: Some(rotations_to_rows(&obs.body_angular_velocities)),
            human_in_camera: Some(rotations_to_rows(&obs.human_in_camera)),
            human_local_velocities: Some(obs.human_local_velocities.clone()),
            camera_local_velocities: Some(obs.camera_local_velocities.clone()),
            local_joints: obs.local_joints.clone(),
            joint_names: obs.joint_names.clone(),
            initial_yaw: obs.initial_yaw.map(|r| r.to_row_major()),
            human_origin: obs.human_origin,
            camera_origin: obs.camera_origin,
        }
    }

    pub fn into_observations(self) -> Result<Observations> {
        let missing: Vec<&str> = [
            ("version", self.version.is_none()),
            ("fps", self.fps.is_none()),
            ("convention", self.convention.is_none()),
            ("rp", self.rp.is_none()),
            (
                "body_angular_velocities",
                self.body_angular_velocities.is_none(),
            ),
            ("human_in_camera", self.human_in_camera.is_none()),
            (
                "human_local_velocities",
                self.human_local_velocities.is_none(),
            ),
            (
                "camera_local_velocities",
                self.camera_local_velocities.is_none(),
            ),
        ]
        .into_iter()
        .filter_map(|(name, absent)| absent.then_some(name))
        .collect();
        if !missing.is_empty() {
            bail!("missing observation channels: {}", missing.join(", "));
        }
        check_header(
            self.version.as_deref().unwrap_or_default(),
            self.convention.as_deref().unwrap_or_default(),
        )?;
        let obs = Observations {
            fps: self.fps.unwrap_or_default(),
            rp: rotations_from_rows("rp", self.rp.as_deref().unwrap_or_default())?,
            body_angular_velocities: rotations_from_rows(
                "body_angular_velocities",
                self.body_angular_velocities.as_deref().unwrap_or_default(),
            )?,
            human_in_camera: rotations_from_rows(
                "human_in_camera",
                self.human_in_camera.as_deref().unwrap_or_default(),
            )?,
            human_local_velocities: self.human_local_velocities.unwrap_or_default(),
            camera_local_velocities: self.camera_local_velocities.unwrap_or_default(),
            local_joints: self.local_joints,
            joint_names: self.joint_names,
            initial_yaw: self
                .initial_yaw
                .map(Rotation::try_from_row_major)
                .transpose()
                .context("initial_yaw")?,
            human_origin: self.human_origin,
            camera_origin: self.camera_origin,
        };
        obs.validate().context("invalid observations")?;
        Ok(obs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionFile {
    pub version: String,
    pub convention: String,
    pub yaw: Vec<[f64; 9]>,
    pub rp: Vec<[f64; 9]>,
    pub delta_yaw: Vec<[f64; 9]>,
    pub meta: DecompositionMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionMeta {
    pub input: String,
    pub epsilon: f64,
    pub max_reconstruction_residual: f64,
}
