//! Training-objective terms that need no body model: direct prediction loss,
//! bidirectional teacher-forcing trajectory loss, contact labels, static
//! contact loss and the weighted total.

use alloc::vec::Vec;

use crate::so3::{Rotation, Vec3};
use crate::trajectory::integrate_trajectory;
use crate::{Error, Result};

/// Feet slower than this (m/s) are labeled as in contact.
pub const CONTACT_SPEED_THRESHOLD: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct LossWeights {
    pub lambda_h: f64,
    pub lambda_cam: f64,
    pub lambda_static: f64,
    // Camera-space reconstruction weights. Recorded for completeness; the
    // losses they scale need keypoints and meshes and are not computed here.
    pub cr_j3d: f64,
    pub cr_verts: f64,
    pub j2d: f64,
    pub verts2d: f64,
    pub transl_c: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self {
            lambda_h: 1.0,
            lambda_cam: 1.0,
            lambda_static: 1.0,
            cr_j3d: 500.0,
            cr_verts: 500.0,
            j2d: 1000.0,
            verts2d: 1000.0,
            transl_c: 1.0,
        }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.lambda_h,
            self.lambda_cam,
            self.lambda_static,
            self.cr_j3d,
            self.cr_verts,
            self.j2d,
            self.verts2d,
            self.transl_c,
        ];
        if all.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidConfig(
                "loss weights must be finite and non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Flat encoded output vector with a supervision mask.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    pub values: Vec<f64>,
    pub mask: Vec<bool>,
}

impl PredictionVector {
    pub fn new(values: Vec<f64>, mask: Vec<bool>) -> Result<Self> {
        if values.len() != mask.len() {
            return Err(Error::LengthMismatch {
                what: "prediction mask",
                expected: values.len(),
                found: mask.len(),
            });
        }
        Ok(Self { values, mask })
    }

    /// Every entry supervised.
    pub fn unmasked(values: Vec<f64>) -> Self {
        let mask = alloc::vec![true; values.len()];
        Self { values, mask }
    }
}

/// Mean squared error over masked-in entries; zero when nothing is masked in.
pub fn simple_loss(pred: &PredictionVector, gt: &PredictionVector) -> Result<f64> {
    if pred.values.len() != gt.values.len() {
        return Err(Error::LengthMismatch {
            what: "simple_loss values",
            expected: gt.values.len(),
            found: pred.values.len(),
        });
    }
    if pred.mask != gt.mask || pred.mask.len() != pred.values.len() {
        return Err(Error::InvalidConfig("simple_loss masks differ".into()));
    }
    let (sum, n) = pred
        .values
        .iter()
        .zip(&gt.values)
        .zip(&pred.mask)
        .filter(|(_, m)| **m)
        .fold((0.0, 0usize), |(s, n), ((p, g), _)| {
            (s + (p - g) * (p - g), n + 1)
        });
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

/// Sum over frames of absolute coordinate differences.
pub fn l1_trajectory_error(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let d = *p - *q;
            d.x.abs() + d.y.abs() + d.z.abs()
        })
        .sum()
}

/// The two teacher-forcing branches, each normalized by frame count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TeacherForcingLoss {
    /// Ground-truth orientations, predicted velocities.
    pub orient_fixed: f64,
    /// Ground-truth velocities, predicted orientations.
    pub vel_fixed: f64,
}

impl TeacherForcingLoss {
    pub fn total(&self) -> f64 {
        self.orient_fixed + self.vel_fixed
    }
}

/// Both branches of the bidirectional teacher-forcing trajectory loss.
///
/// Each branch integrates from the ground-truth origin `t_gt[0]`. The ground
/// truth is expected to be self-consistent (`t_gt` is the integral of
/// `v_gt` under `r_gt`); this is not re-checked.
pub fn teacher_forcing_branches(
    v_pred: &[Vec3],
    r_pred: &[Rotation],
    v_gt: &[Vec3],
    r_gt: &[Rotation],
    t_gt: &[Vec3],
) -> Result<TeacherForcingLoss> {
    let t = t_gt.len();
    if t == 0 {
        return Err(Error::TooFewFrames {
            what: "teacher forcing",
            needed: 1,
            found: 0,
        });
    }
    for (what, n) in [("v_pred", v_pred.len() + 1), ("v_gt", v_gt.len() + 1)] {
        if n != t {
            return Err(Error::LengthMismatch {
                what,
                expected: t - 1,
                found: n - 1,
            });
        }
    }
    for (what, n) in [("r_pred", r_pred.len()), ("r_gt", r_gt.len())] {
        if n != t {
            return Err(Error::LengthMismatch {
                what,
                expected: t,
                found: n,
            });
        }
    }
    let orient = integrate_trajectory(t_gt[0], r_gt, v_pred)?;
    let vel = integrate_trajectory(t_gt[0], r_pred, v_gt)?;
    let frames = t as f64;
    Ok(TeacherForcingLoss {
        orient_fixed: l1_trajectory_error(&orient, t_gt) / frames,
        vel_fixed: l1_trajectory_error(&vel, t_gt) / frames,
    })
}

/// Sum of both teacher-forcing branches.
pub fn teacher_forcing_traj_loss(
    v_pred: &[Vec3],
    r_pred: &[Rotation],
    v_gt: &[Vec3],
    r_gt: &[Rotation],
    t_gt: &[Vec3],
) -> Result<f64> {
    teacher_forcing_branches(v_pred, r_pred, v_gt, r_gt, t_gt).map(|l| l.total())
}

/// Labels a foot as in contact when its speed to the next frame is strictly
/// below `threshold_mps`. The last frame repeats the previous label.
pub fn generate_contact_labels(
    foot_positions: &[Vec<Vec3>],
    fps: f64,
    threshold_mps: f64,
) -> Result<Vec<Vec<bool>>> {
    if foot_positions.len() < 2 {
        return Err(Error::TooFewFrames {
            what: "contact labels",
            needed: 2,
            found: foot_positions.len(),
        });
    }
    if !(fps > 0.0) || !fps.is_finite() {
        return Err(Error::InvalidConfig(alloc::format!(
            "fps must be positive, got {fps}"
        )));
    }
    let feet = foot_positions[0].len();
    let mut labels: Vec<Vec<bool>> = Vec::with_capacity(foot_positions.len());
    for w in foot_positions.windows(2) {
        if w[1].len() != feet {
            return Err(Error::LengthMismatch {
                what: "feet per frame",
                expected: feet,
                found: w[1].len(),
            });
        }
        labels.push(
            w[0].iter()
                .zip(&w[1])
                .map(|(a, b)| (*b - *a).norm() * fps < threshold_mps)
                .collect(),
        );
    }
    let last = labels[labels.len() - 1].clone();
    labels.push(last);
    Ok(labels)
}

/// Mean foot speed (m/s) over contact-labeled (frame, foot) pairs.
pub fn static_contact_loss(
    foot_velocities: &[Vec<Vec3>],
    contacts: &[Vec<bool>],
    fps: f64,
) -> Result<f64> {
    if foot_velocities.len() != contacts.len() {
        return Err(Error::LengthMismatch {
            what: "foot velocities vs contacts",
            expected: contacts.len(),
            found: foot_velocities.len(),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (v, c) in foot_velocities.iter().zip(contacts) {
        if v.len() != c.len() {
            return Err(Error::LengthMismatch {
                what: "feet per frame",
                expected: c.len(),
                found: v.len(),
            });
        }
        for (vel, &in_contact) in v.iter().zip(c) {
            if in_contact {
                sum += vel.norm() * fps;
                n += 1;
            }
        }
    }
    Ok(if n == 0 { 0.0 } else { sum / n as f64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LossComponents {
    pub simple: f64,
    pub traj_h: f64,
    pub traj_cam: f64,
    pub static_contact: f64,
}

/// `simple + λ_h·traj_h + λ_cam·traj_cam + λ_static·static`.
pub fn total_loss(c: &LossComponents, w: &LossWeights) -> Result<f64> {
    for (name, v) in [
        ("simple", c.simple),
        ("traj_h", c.traj_h),
        ("traj_cam", c.traj_cam),
        ("static", c.static_contact),
    ] {
        if !(v >= 0.0) {
            return Err(Error::NegativeLoss(name));
        }
    }
    w.validate()?;
    Ok(c.simple
        + w.lambda_h * c.traj_h
        + w.lambda_cam * c.traj_cam
        + w.lambda_static * c.static_contact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn simple_loss_examples() {
        let a = PredictionVector::unmasked(vec![1.0, 2.0, 3.0]);
        assert_eq!(simple_loss(&a, &a).unwrap(), 0.0);
        let b = PredictionVector::unmasked(vec![2.0, 3.0, 4.0]);
        assert_eq!(simple_loss(&a, &b).unwrap(), 1.0);

        let mask = vec![true, false, true];
        let p = PredictionVector::new(vec![1.0, 9.0, 3.0], mask.clone()).unwrap();
        let g = PredictionVector::new(vec![1.0, 2.0, 3.0], mask).unwrap();
        assert_eq!(simple_loss(&p, &g).unwrap(), 0.0);

        let none = PredictionVector::new(vec![1.0, 2.0], vec![false, false]).unwrap();
        let none2 = PredictionVector::new(vec![5.0, 6.0], vec![false, false]).unwrap();
        assert_eq!(simple_loss(&none, &none2).unwrap(), 0.0);
    }

    #[test]
    fn simple_loss_errors() {
        assert!(PredictionVector::new(vec![1.0], vec![]).is_err());
        let a = PredictionVector::unmasked(vec![1.0, 2.0]);
        let b = PredictionVector::unmasked(vec![1.0]);
        assert!(simple_loss(&a, &b).is_err());
        let c = PredictionVector::new(vec![1.0, 2.0], vec![true, false]).unwrap();
        assert!(simple_loss(&a, &c).is_err());
    }

    #[test]
    fn teacher_forcing_zero_at_ground_truth() {
        let r = vec![
            Rotation::about_y(0.1),
            Rotation::about_x(0.2),
            Rotation::IDENTITY,
        ];
        let v = vec![Vec3::new(0.1, 0.0, 0.5), Vec3::new(0.0, 0.2, 0.3)];
        let t = integrate_trajectory(Vec3::new(1.0, 2.0, 3.0), &r, &v).unwrap();
        assert_eq!(teacher_forcing_traj_loss(&v, &r, &v, &r, &t).unwrap(), 0.0);
    }

    #[test]
    fn teacher_forcing_rejects_bad_lengths() {
        let r = vec![Rotation::IDENTITY; 3];
        let v = vec![Vec3::ZERO; 2];
        let t = vec![Vec3::ZERO; 3];
        assert!(teacher_forcing_traj_loss(&v[..1], &r, &v, &r, &t).is_err());
        assert!(teacher_forcing_traj_loss(&v, &r[..2], &v, &r, &t).is_err());
    }

    #[test]
    fn contact_labels() {
        let fps = 30.0;
        let static_foot: Vec<Vec<Vec3>> = (0..5).map(|_| vec![Vec3::new(0.1, 0.0, 0.2)]).collect();
        let labels = generate_contact_labels(&static_foot, fps, CONTACT_SPEED_THRESHOLD).unwrap();
        assert!(labels.iter().all(|l| l == &[true]));

        let moving = |speed: f64| -> Vec<Vec<Vec3>> {
            (0..5)
                .map(|t| vec![Vec3::new(0.0, 0.0, speed * t as f64 / fps)])
                .collect()
        };
        let labels = generate_contact_labels(&moving(0.2), fps, CONTACT_SPEED_THRESHOLD).unwrap();
        assert!(labels.iter().all(|l| l == &[false]));

        // Exactly at the threshold: the displacement is chosen so that
        // ‖Δp‖·fps reproduces 0.15 exactly in floating point.
        let exact = vec![vec![Vec3::ZERO], vec![Vec3::new(0.0, 0.0, 0.15 / 2.0)]];
        let labels = generate_contact_labels(&exact, 2.0, CONTACT_SPEED_THRESHOLD).unwrap();
        assert_eq!(labels, vec![vec![false], vec![false]]);

        assert!(generate_contact_labels(&static_foot[..1], fps, 0.15).is_err());
        assert!(generate_contact_labels(&static_foot, 0.0, 0.15).is_err());
    }

    #[test]
    fn static_contact_examples() {
        let fps = 30.0;
        let zeros = vec![vec![Vec3::ZERO; 2]; 4];
        assert_eq!(
            static_contact_loss(&zeros, &vec![vec![true; 2]; 4], fps).unwrap(),
            0.0
        );

        let mut vel = vec![vec![Vec3::new(0.5, 0.0, 0.0); 2]; 4];
        vel[2][1] = Vec3::new(0.0, 0.0, 0.1 / fps);
        let mut contacts = vec![vec![false; 2]; 4];
        contacts[2][1] = true;
        let loss = static_contact_loss(&vel, &contacts, fps).unwrap();
        assert!((loss - 0.1).abs() < 1e-15);

        assert_eq!(
            static_contact_loss(&vel, &vec![vec![false; 2]; 4], fps).unwrap(),
            0.0
        );
        assert!(static_contact_loss(&vel, &contacts[..3], fps).is_err());
    }

    #[test]
    fn total_loss_examples() {
        let unit = LossWeights::default();
        assert_eq!(total_loss(&LossComponents::default(), &unit).unwrap(), 0.0);
        let c = LossComponents {
            simple: 1.0,
            traj_h: 2.0,
            traj_cam: 3.0,
            static_contact: 4.0,
        };
        assert_eq!(total_loss(&c, &unit).unwrap(), 10.0);
        let w = LossWeights {
            lambda_h: 2.0,
            lambda_cam: 0.0,
            lambda_static: 1.0,
            ..unit
        };
        assert_eq!(total_loss(&c, &w).unwrap(), 9.0);
        let neg = LossComponents {
            traj_cam: -1.0,
            ..c
        };
        assert_eq!(
            total_loss(&neg, &unit),
            Err(Error::NegativeLoss("traj_cam"))
        );
    }

    #[test]
    fn default_weights() {
        let w = LossWeights::default();
        assert_eq!((w.lambda_h, w.lambda_cam, w.lambda_static), (1.0, 1.0, 1.0));
        assert_eq!(
            (w.cr_j3d, w.cr_verts, w.j2d, w.verts2d, w.transl_c),
            (500.0, 500.0, 1000.0, 1000.0, 1.0)
        );
    }
}
