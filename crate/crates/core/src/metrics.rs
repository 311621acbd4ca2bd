//! World-space and camera-space motion evaluation metrics.
//!
//! Positions are in meters on input; reported errors are in millimeters.

use alloc::vec::Vec;

use crate::linalg::symmetric_eigen;
use crate::so3::{Mat3, Rotation, Vec3};
use crate::trajectory::{MotionSequence, Scene};
use crate::{Error, Result};

/// Frames per evaluation segment for the world-space MPJPE metrics.
pub const SEGMENT_LEN: usize = 100;

const M_TO_MM: f64 = 1000.0;

/// Similarity transform `q ≈ s R p + t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidAlignment {
    pub rotation: Rotation,
    pub translation: Vec3,
    pub scale: f64,
}

impl RigidAlignment {
    pub const IDENTITY: RigidAlignment = RigidAlignment {
        rotation: Rotation::IDENTITY,
        translation: Vec3::ZERO,
        scale: 1.0,
    };

    pub fn apply(&self, p: Vec3) -> Vec3 {
        (self.rotation * p) * self.scale + self.translation
    }
}

fn centroid(points: &[Vec3]) -> Vec3 {
    points.iter().fold(Vec3::ZERO, |acc, p| acc + *p) * (1.0 / points.len() as f64)
}

fn second_moment(points: &[Vec3], c: Vec3) -> Mat3 {
    points
        .iter()
        .fold(Mat3::ZERO, |acc, p| acc + Mat3::outer(*p - c, *p - c))
}

fn rank_deficient(m: &Mat3) -> bool {
    let (vals, _) = symmetric_eigen(m.0);
    !(vals[0] > 0.0) || vals[1] <= 1e-12 * vals[0]
}

/// Least-squares alignment of `p` onto `q` minimizing `Σ‖s R pᵢ + t − qᵢ‖²`
/// over proper rotations (Horn's unit-quaternion method). With
/// `with_scale = false` the scale is fixed at 1.
pub fn procrustes_align(p: &[Vec3], q: &[Vec3], with_scale: bool) -> Result<RigidAlignment> {
    if p.len() != q.len() {
        return Err(Error::LengthMismatch {
            what: "procrustes point sets",
            expected: q.len(),
            found: p.len(),
        });
    }
    if p.len() < 3 {
        return Err(Error::TooFewFrames {
            what: "procrustes points",
            needed: 3,
            found: p.len(),
        });
    }
    let (cp, cq) = (centroid(p), centroid(q));
    if rank_deficient(&second_moment(p, cp)) || rank_deficient(&second_moment(q, cq)) {
        return Err(Error::Degenerate("point set is collinear or coincident"));
    }

    // S_ab = Σ p_a q_b over centered points.
    let s = p.iter().zip(q).fold(Mat3::ZERO, |acc, (a, b)| {
        acc + Mat3::outer(*a - cp, *b - cq)
    });
    let m = &s.0;
    let (sxx, sxy, sxz) = (m[0][0], m[0][1], m[0][2]);
    let (syx, syy, syz) = (m[1][0], m[1][1], m[1][2]);
    let (szx, szy, szz) = (m[2][0], m[2][1], m[2][2]);
    let n = [
        [sxx + syy + szz, syz - szy, szx - sxz, sxy - syx],
        [syz - szy, sxx - syy - szz, sxy + syx, szx + sxz],
        [szx - sxz, sxy + syx, -sxx + syy - szz, syz + szy],
        [sxy - syx, szx + sxz, syz + szy, -sxx - syy + szz],
    ];
    let (_, vecs) = symmetric_eigen(n);
    let (w, x, y, z) = (vecs[0][0], vecs[1][0], vecs[2][0], vecs[3][0]);
    let r = Mat3([
        [
            1.0 - 2.0 * (y * y + z * z),
            2.0 * (x * y - w * z),
            2.0 * (x * z + w * y),
        ],
        [
            2.0 * (x * y + w * z),
            1.0 - 2.0 * (x * x + z * z),
            2.0 * (y * z - w * x),
        ],
        [
            2.0 * (x * z - w * y),
            2.0 * (y * z + w * x),
            1.0 - 2.0 * (x * x + y * y),
        ],
    ]);
    let rotation = Rotation::from_matrix_unchecked(r);

    let scale = if with_scale {
        let num: f64 = p
            .iter()
            .zip(q)
            .map(|(a, b)| (*b - cq).dot(rotation * (*a - cp)))
            .sum();
        let den: f64 = p.iter().map(|a| (*a - cp).norm_squared()).sum();
        num / den
    } else {
        1.0
    };
    if !(scale > 0.0) {
        return Err(Error::Degenerate("non-positive similarity scale"));
    }
    let translation = cq - (rotation * cp) * scale;
    Ok(RigidAlignment {
        rotation,
        translation,
        scale,
    })
}

fn check_joint_shapes(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> Result<()> {
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            what: "joint frames",
            expected: gt.len(),
            found: pred.len(),
        });
    }
    for (a, b) in pred.iter().zip(gt) {
        if a.len() != b.len() {
            return Err(Error::LengthMismatch {
                what: "joints per frame",
                expected: b.len(),
                found: a.len(),
            });
        }
        if b.is_empty() {
            return Err(Error::Degenerate("frame with no joints"));
        }
    }
    if gt.is_empty() {
        return Err(Error::TooFewFrames {
            what: "joint sequence",
            needed: 1,
            found: 0,
        });
    }
    Ok(())
}

fn mean_joint_error(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for (a, b) in pred.iter().zip(gt) {
        for (p, q) in a.iter().zip(b) {
            sum += (*p - *q).norm();
            n += 1;
        }
    }
    sum / n as f64 * M_TO_MM
}

/// Root-aligned mean per-joint position error, mm.
///
/// Joint 0 is the root. Every frame is centered on its root, and the root
/// itself (zero error by construction) is left out of the mean.
pub fn mpjpe(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> Result<f64> {
    check_joint_shapes(pred, gt)?;
    if gt[0].len() < 2 {
        return Ok(0.0);
    }
    let center = |frames: &[Vec<Vec3>]| -> Vec<Vec<Vec3>> {
        frames
            .iter()
            .map(|f| f[1..].iter().map(|p| *p - f[0]).collect())
            .collect()
    };
    Ok(mean_joint_error(&center(pred), &center(gt)))
}

/// Mean per-joint error after per-frame similarity alignment, mm.
pub fn pa_mpjpe(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> Result<f64> {
    check_joint_shapes(pred, gt)?;
    let aligned = pred
        .iter()
        .zip(gt)
        .map(|(a, b)| {
            let al = procrustes_align(a, b, true)?;
            Ok(a.iter().map(|p| al.apply(*p)).collect())
        })
        .collect::<Result<Vec<Vec<Vec3>>>>()?;
    Ok(mean_joint_error(&aligned, gt))
}

/// World-space errors of one evaluation segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentError {
    pub start: usize,
    /// Exclusive.
    pub end: usize,
    /// Error after full-segment rigid alignment, mm.
    pub wa_mpjpe_mm: f64,
    /// Error after alignment on the segment's first two frames, mm.
    pub w_mpjpe_mm: f64,
}

/// Consecutive non-overlapping segments of `SEGMENT_LEN` frames; a trailing
/// segment is kept when it has at least two frames.
pub fn segment_bounds(frames: usize) -> Vec<(usize, usize)> {
    (0..frames)
        .step_by(SEGMENT_LEN)
        .map(|s| (s, (s + SEGMENT_LEN).min(frames)))
        .filter(|(s, e)| e - s >= 2)
        .collect()
}

fn flatten(frames: &[Vec<Vec3>]) -> Vec<Vec3> {
    frames.iter().flatten().copied().collect()
}

fn aligned_error(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>], al: &RigidAlignment) -> f64 {
    let moved: Vec<Vec<Vec3>> = pred
        .iter()
        .map(|f| f.iter().map(|p| al.apply(*p)).collect())
        .collect();
    mean_joint_error(&moved, gt)
}

/// Per-segment WA- and W-MPJPE.
pub fn segment_errors(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> Result<Vec<SegmentError>> {
    check_joint_shapes(pred, gt)?;
    if gt.len() < 2 {
        return Err(Error::TooFewFrames {
            what: "world MPJPE",
            needed: 2,
            found: gt.len(),
        });
    }
    segment_bounds(gt.len())
        .into_iter()
        .map(|(start, end)| {
            let (p, g) = (&pred[start..end], &gt[start..end]);
            let full = procrustes_align(&flatten(p), &flatten(g), false)?;
            let first_two = procrustes_align(&flatten(&p[..2]), &flatten(&g[..2]), false)?;
            Ok(SegmentError {
                start,
                end,
                wa_mpjpe_mm: aligned_error(p, g, &full),
                w_mpjpe_mm: aligned_error(p, g, &first_two),
            })
        })
        .collect()
}

/// `(WA-MPJPE₁₀₀, W-MPJPE₁₀₀)` in mm, averaged over segments.
pub fn wa_w_mpjpe_100(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>]) -> Result<(f64, f64)> {
    let segs = segment_errors(pred, gt)?;
    let n = segs.len() as f64;
    let wa = segs.iter().map(|s| s.wa_mpjpe_mm).sum::<f64>() / n;
    let w = segs.iter().map(|s| s.w_mpjpe_mm).sum::<f64>() / n;
    Ok((wa, w))
}

/// Root translation error at the last frame as a percentage of the
/// ground-truth path length.
///
/// `pred` is first aligned to `gt` by the rotation taking the predicted
/// first-frame orientation onto the ground-truth one, and the translation
/// matching the centroids of the first two root positions.
pub fn rte(pred: &MotionSequence, gt: &MotionSequence) -> Result<f64> {
    let t = gt.positions.len();
    if pred.positions.len() != t || pred.rotations.len() != t || gt.rotations.len() != t {
        return Err(Error::LengthMismatch {
            what: "root tracks",
            expected: t,
            found: pred.positions.len(),
        });
    }
    if t < 2 {
        return Err(Error::TooFewFrames {
            what: "rte",
            needed: 2,
            found: t,
        });
    }
    let path: f64 = gt.positions.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if !(path > 1e-6) {
        return Err(Error::Degenerate(
            "ground-truth path length is below 1e-6 m",
        ));
    }
    let rotation = gt.rotations[0] * pred.rotations[0].transpose();
    let mid = |p: &[Vec3]| (p[0] + p[1]) * 0.5;
    let translation = mid(&gt.positions) - rotation * mid(&pred.positions);
    let al = RigidAlignment {
        rotation,
        translation,
        scale: 1.0,
    };
    let err = (al.apply(pred.positions[t - 1]) - gt.positions[t - 1]).norm();
    Ok(err / path * 100.0)
}

/// Mean jerk magnitude over joints and frames, in units of 10 m/s³.
pub fn jitter(joints: &[Vec<Vec3>], fps: f64) -> Result<f64> {
    if joints.len() < 4 {
        return Err(Error::TooFewFrames {
            what: "jitter",
            needed: 4,
            found: joints.len(),
        });
    }
    let fps3 = fps * fps * fps;
    let mut sum = 0.0;
    let mut n = 0usize;
    for w in joints.windows(4) {
        let (pm, p0, p1, p2) = (&w[0], &w[1], &w[2], &w[3]);
        for j in 0..p0.len() {
            let jerk = (p2[j] - p1[j] * 3.0 + p0[j] * 3.0 - pm[j]) * fps3;
            sum += jerk.norm();
            n += 1;
        }
    }
    Ok(sum / n as f64 / 10.0)
}

/// Mean horizontal (XZ) displacement to the next frame over contact-labeled
/// (frame, foot) pairs, mm.
pub fn foot_sliding(foot_positions: &[Vec<Vec3>], contacts: &[Vec<bool>]) -> Result<f64> {
    if foot_positions.len() != contacts.len() {
        return Err(Error::LengthMismatch {
            what: "foot positions vs contacts",
            expected: contacts.len(),
            found: foot_positions.len(),
        });
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for (t, w) in foot_positions.windows(2).enumerate() {
        if w[0].len() != contacts[t].len() || w[1].len() != contacts[t].len() {
            return Err(Error::LengthMismatch {
                what: "feet per frame",
                expected: contacts[t].len(),
                found: w[0].len(),
            });
        }
        for (f, &c) in contacts[t].iter().enumerate() {
            if c {
                sum += (w[1][f] - w[0][f]).horizontal().norm();
                n += 1;
            }
        }
    }
    Ok(if n == 0 {
        0.0
    } else {
        sum / n as f64 * M_TO_MM
    })
}

/// Mean acceleration difference over joints and interior frames, mm/s².
pub fn accel_error(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>], fps: f64) -> Result<f64> {
    check_joint_shapes(pred, gt)?;
    if gt.len() < 3 {
        return Err(Error::TooFewFrames {
            what: "accel error",
            needed: 3,
            found: gt.len(),
        });
    }
    let fps2 = fps * fps;
    let accel = |w: &[Vec<Vec3>], j: usize| (w[2][j] - w[1][j] * 2.0 + w[0][j]) * fps2;
    let mut sum = 0.0;
    let mut n = 0usize;
    for (a, b) in pred.windows(3).zip(gt.windows(3)) {
        for j in 0..a[0].len() {
            sum += (accel(a, j) - accel(b, j)).norm();
            n += 1;
        }
    }
    Ok(sum / n as f64 * M_TO_MM)
}

/// All metric values. `None` marks metrics whose inputs were unavailable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MetricsReport {
    pub wa_mpjpe_100_mm: Option<f64>,
    pub w_mpjpe_100_mm: Option<f64>,
    pub rte_percent: Option<f64>,
    pub jitter_10m_s3: Option<f64>,
    pub foot_sliding_mm: Option<f64>,
    pub pa_mpjpe_mm: Option<f64>,
    pub mpjpe_mm: Option<f64>,
    pub accel_mm_s2: Option<f64>,
}

impl MetricsReport {
    /// `(key, value)` pairs in a fixed order.
    pub fn entries(&self) -> [(&'static str, Option<f64>); 8] {
        [
            ("wa_mpjpe_100_mm", self.wa_mpjpe_100_mm),
            ("w_mpjpe_100_mm", self.w_mpjpe_100_mm),
            ("rte_percent", self.rte_percent),
            ("jitter_10m_s3", self.jitter_10m_s3),
            ("foot_sliding_mm", self.foot_sliding_mm),
            ("pa_mpjpe_mm", self.pa_mpjpe_mm),
            ("mpjpe_mm", self.mpjpe_mm),
            ("accel_mm_s2", self.accel_mm_s2),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: MetricsReport,
    /// `(metric key, reason)` for every metric left out of the report.
    pub omitted: Vec<(&'static str, &'static str)>,
    pub segments: Vec<SegmentError>,
}

fn camera_space_joints(scene: &Scene) -> Option<Vec<Vec<Vec3>>> {
    let joints = scene.human.joints.as_ref()?;
    Some(
        joints
            .iter()
            .zip(&scene.camera.rotations)
            .zip(&scene.camera.positions)
            .map(|((frame, r), c)| frame.iter().map(|p| r.transpose() * (*p - *c)).collect())
            .collect(),
    )
}

/// Computes every metric whose inputs are present in both scenes.
///
/// World metrics use human joints and root tracks; camera-space metrics use
/// human joints expressed in each scene's own camera frame. Foot sliding is
/// measured on the predicted feet during ground-truth contacts.
pub fn evaluate_scene(pred: &Scene, gt: &Scene) -> Result<Evaluation> {
    pred.validate()?;
    gt.validate()?;
    if pred.len() != gt.len() {
        return Err(Error::LengthMismatch {
            what: "scene frames",
            expected: gt.len(),
            found: pred.len(),
        });
    }
    if pred.fps() != gt.fps() {
        return Err(Error::InvalidConfig(alloc::format!(
            "fps differs: pred {} vs gt {}",
            pred.fps(),
            gt.fps()
        )));
    }
    let both_joints = pred.human.joints.is_some() && gt.human.joints.is_some();
    if both_joints && pred.human.joint_names != gt.human.joint_names {
        return Err(Error::InvalidConfig(
            "joint names differ between scenes".into(),
        ));
    }

    let mut report = MetricsReport::default();
    let mut omitted = Vec::new();
    let mut segments = Vec::new();
    let fps = gt.fps();

    if let (true, Some(pj), Some(gj)) = (both_joints, &pred.human.joints, &gt.human.joints) {
        segments = segment_errors(pj, gj)?;
        let (wa, w) = wa_w_mpjpe_100(pj, gj)?;
        report.wa_mpjpe_100_mm = Some(wa);
        report.w_mpjpe_100_mm = Some(w);
        if pj.len() >= 4 {
            report.jitter_10m_s3 = Some(jitter(pj, fps)?);
        } else {
            omitted.push(("jitter_10m_s3", "fewer than 4 frames"));
        }
        let (pc, gc) = (camera_space_joints(pred), camera_space_joints(gt));
        if let (Some(pc), Some(gc)) = (pc, gc) {
            report.mpjpe_mm = Some(mpjpe(&pc, &gc)?);
            report.pa_mpjpe_mm = Some(pa_mpjpe(&pc, &gc)?);
            if pc.len() >= 3 {
                report.accel_mm_s2 = Some(accel_error(&pc, &gc, fps)?);
            } else {
                omitted.push(("accel_mm_s2", "fewer than 3 frames"));
            }
        }
    } else {
        for key in [
            "wa_mpjpe_100_mm",
            "w_mpjpe_100_mm",
            "jitter_10m_s3",
            "pa_mpjpe_mm",
            "mpjpe_mm",
            "accel_mm_s2",
        ] {
            omitted.push((key, "joints missing"));
        }
    }

    match rte(&pred.human, &gt.human) {
        Ok(v) => report.rte_percent = Some(v),
        Err(Error::Degenerate(_)) => omitted.push(("rte_percent", "ground-truth path too short")),
        Err(e) => return Err(e),
    }

    match (&gt.human.contacts, pred.human.foot_positions()) {
        (Some(contacts), Some(feet)) => {
            report.foot_sliding_mm = Some(foot_sliding(&feet, contacts)?)
        }
        (None, _) => omitted.push(("foot_sliding_mm", "ground-truth contacts missing")),
        (_, None) => omitted.push(("foot_sliding_mm", "predicted foot joints missing")),
    }

    Ok(Evaluation {
        report,
        omitted,
        segments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tri() -> Vec<Vec3> {
        vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.2, 0.0),
            Vec3::new(0.3, -0.5, 0.8),
            Vec3::new(-0.4, 0.1, 0.6),
        ]
    }

    #[test]
    fn procrustes_identity_and_translation() {
        let p = tri();
        let al = procrustes_align(&p, &p, true).unwrap();
        assert!((*al.rotation.matrix() - Mat3::IDENTITY).frobenius_norm() < 1e-12);
        assert!(al.translation.norm() < 1e-12);
        assert!((al.scale - 1.0).abs() < 1e-12);

        let q: Vec<Vec3> = p.iter().map(|x| *x + Vec3::E_X).collect();
        let al = procrustes_align(&p, &q, false).unwrap();
        assert!((al.translation - Vec3::E_X).norm() < 1e-12);
        assert!((*al.rotation.matrix() - Mat3::IDENTITY).frobenius_norm() < 1e-12);
        assert_eq!(al.scale, 1.0);
    }

    #[test]
    fn procrustes_recovers_scaled_yaw() {
        let p = tri();
        let r = Rotation::about_y(30f64.to_radians());
        let q: Vec<Vec3> = p.iter().map(|x| (r * *x) * 2.0).collect();
        let al = procrustes_align(&p, &q, true).unwrap();
        assert!((al.scale - 2.0).abs() < 1e-9);
        assert!((*al.rotation.matrix() - *r.matrix()).frobenius_norm() < 1e-9);
    }

    #[test]
    fn procrustes_errors() {
        let p = tri();
        assert!(procrustes_align(&p[..2], &p[..2], false).is_err());
        let line: Vec<Vec3> = (0..4).map(|i| Vec3::E_X * i as f64).collect();
        assert!(matches!(
            procrustes_align(&line, &line, false),
            Err(Error::Degenerate(_))
        ));
        assert!(procrustes_align(&p, &p[..3], false).is_err());
    }

    #[test]
    fn segments_policy() {
        assert_eq!(segment_bounds(250), [(0, 100), (100, 200), (200, 250)]);
        assert_eq!(segment_bounds(201), [(0, 100), (100, 200)]);
        assert_eq!(segment_bounds(202), [(0, 100), (100, 200), (200, 202)]);
        assert_eq!(segment_bounds(50), [(0, 50)]);
    }

    #[test]
    fn mpjpe_non_root_offset() {
        let gt: Vec<Vec<Vec3>> = (0..5)
            .map(|t| vec![Vec3::E_Z * t as f64, tri()[1], tri()[2]])
            .collect();
        assert_eq!(mpjpe(&gt, &gt).unwrap(), 0.0);
        // Uniform offsets on all joints vanish after root alignment.
        let shifted: Vec<Vec<Vec3>> = gt
            .iter()
            .map(|f| f.iter().map(|p| *p + Vec3::E_X * 0.01).collect())
            .collect();
        assert!(mpjpe(&shifted, &gt).unwrap() < 1e-9);
        let off_non_root: Vec<Vec<Vec3>> = gt
            .iter()
            .map(|f| vec![f[0], f[1] + Vec3::E_X * 0.01, f[2] - Vec3::E_Y * 0.01])
            .collect();
        assert!((mpjpe(&off_non_root, &gt).unwrap() - 10.0).abs() < 1e-9);
        assert!(mpjpe(&gt[..2], &gt).is_err());
    }

    #[test]
    fn pa_mpjpe_removes_similarity() {
        let gt: Vec<Vec<Vec3>> = (0..3)
            .map(|t| tri().iter().map(|p| *p + Vec3::E_Z * t as f64).collect())
            .collect();
        let r = Rotation::about_x(0.4) * Rotation::about_y(-1.2);
        let pred: Vec<Vec<Vec3>> = gt
            .iter()
            .map(|f| f.iter().map(|p| (r * *p) * 1.5 + Vec3::E_Y).collect())
            .collect();
        assert!(pa_mpjpe(&pred, &gt).unwrap() < 1e-9);
        assert!(mpjpe(&pred, &gt).unwrap() > 1.0);
    }

    #[test]
    fn rte_ratio() {
        let fps = 30.0;
        let gt_pos: Vec<Vec3> = (0..11).map(|t| Vec3::E_Z * t as f64).collect();
        let gt = MotionSequence::new(fps, vec![Rotation::IDENTITY; 11], gt_pos.clone()).unwrap();
        assert_eq!(rte(&gt, &gt).unwrap(), 0.0);
        let mut pred_pos = gt_pos;
        pred_pos[10] += Vec3::E_X;
        let pred = MotionSequence::new(fps, vec![Rotation::IDENTITY; 11], pred_pos).unwrap();
        assert!((rte(&pred, &gt).unwrap() - 10.0).abs() < 1e-12);

        let still =
            MotionSequence::new(fps, vec![Rotation::IDENTITY; 3], vec![Vec3::ZERO; 3]).unwrap();
        assert!(matches!(rte(&still, &still), Err(Error::Degenerate(_))));
    }

    #[test]
    fn jitter_and_accel_kill_polynomials() {
        let fps = 30.0;
        let quad: Vec<Vec<Vec3>> = (0..10)
            .map(|t| {
                let s = t as f64 / fps;
                vec![Vec3::new(0.5 * s * s, 2.0 * s, 1.0)]
            })
            .collect();
        assert!(jitter(&quad, fps).unwrap() < 1e-9);
        let ramp: Vec<Vec<Vec3>> = quad
            .iter()
            .enumerate()
            .map(|(t, f)| vec![f[0] + Vec3::new(0.3, 0.1, -0.2) * t as f64 + Vec3::E_Y])
            .collect();
        assert!(accel_error(&ramp, &quad, fps).unwrap() < 1e-6);
        assert!(jitter(&quad[..3], fps).is_err());
        assert!(accel_error(&quad[..2], &quad[..2], fps).is_err());
    }

    #[test]
    fn foot_sliding_cases() {
        let planted = vec![vec![Vec3::new(0.1, 0.0, 0.2), Vec3::new(-0.1, 0.0, 0.2)]; 5];
        let contacts = vec![vec![true, true]; 5];
        assert_eq!(foot_sliding(&planted, &contacts).unwrap(), 0.0);

        let sliding: Vec<Vec<Vec3>> = (0..5)
            .map(|t| vec![Vec3::new(0.005 * t as f64, -0.01 * t as f64, 0.0); 2])
            .collect();
        let fs = foot_sliding(&sliding, &contacts).unwrap();
        assert!((fs - 5.0).abs() < 1e-9, "{fs}");
        assert_eq!(
            foot_sliding(&sliding, &vec![vec![false, false]; 5]).unwrap(),
            0.0
        );
        assert!(foot_sliding(&sliding, &contacts[..4]).is_err());
    }
}
