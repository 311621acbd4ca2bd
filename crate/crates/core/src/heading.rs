//! Heading / roll-pitch factorization of orientations.
//!
//! Any rotation `R` is split as `R = R_yaw · R_rp`, where `R_yaw` rotates
//! only about the world gravity axis (+Y). The heading factor is built from
//! the horizontal projection of the forward axis `f = R e_z`:
//!
//! ```text
//! f_xz   = f − (f·e_y) e_y
//! f_safe = f_xz / ‖f_xz‖   if ‖f_xz‖ > ε,   e_x otherwise
//! r      = normalize(e_y × f_safe)
//! R_yaw  = [r  e_y  f_safe]          (columns)
//! R_rp   = R_yawᵀ R
//! ```
//!
//! With body-frame angular velocity `ΔR = Rₜᵀ Rₜ₊₁`, the heading change
//! between consecutive frames is `ΔR_yaw = R_rp,ₜ ΔR R_rp,ₜ₊₁ᵀ`, and headings
//! are recovered by integrating those changes from an initial heading. The
//! initial heading is arbitrary: changing it yaws every output rigidly.
//!
//! At the exact degeneracy (forward axis parallel to gravity) the fallback
//! `f_safe = e_x` makes the heading discontinuous. This is accepted as is.

use alloc::vec::Vec;

use crate::so3::{body_angular_velocity, geodesic_distance, orthonormalize, Mat3, Rotation, Vec3};
use crate::{Error, Result};

/// Maximum geodesic deviation of a heading delta from its own yaw factor.
pub const PURE_YAW_TOLERANCE: f64 = 1e-5;

/// Re-orthonormalize and re-project integrated headings every this many steps.
pub const REPROJECT_INTERVAL: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "RawHeadingConfig"))]
pub struct HeadingConfig {
    epsilon: f64,
}

#[cfg(feature = "serde")]
#[derive(serde::Deserialize)]
struct RawHeadingConfig {
    epsilon: f64,
}

#[cfg(feature = "serde")]
impl TryFrom<RawHeadingConfig> for HeadingConfig {
    type Error = Error;

    fn try_from(raw: RawHeadingConfig) -> Result<Self> {
        HeadingConfig::new(raw.epsilon)
    }
}

impl Default for HeadingConfig {
    fn default() -> Self {
        Self { epsilon: 1e-6 }
    }
}

impl HeadingConfig {
    pub fn new(epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidConfig(alloc::format!(
                "heading epsilon must be positive and finite, got {epsilon}"
            )));
        }
        Ok(Self { epsilon })
    }

    /// Threshold on `‖f_xz‖` below which the forward axis counts as vertical.
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingDecomp {
    pub yaw: Rotation,
    pub rp: Rotation,
}

/// Splits `r` into heading and roll-pitch factors.
pub fn decompose_heading(r: &Rotation, cfg: &HeadingConfig) -> HeadingDecomp {
    let yaw = yaw_factor(r, cfg);
    HeadingDecomp {
        yaw,
        rp: yaw.transpose() * *r,
    }
}

/// Heading factor alone.
pub fn yaw_factor(r: &Rotation, cfg: &HeadingConfig) -> Rotation {
    let f = *r * Vec3::E_Z;
    let f_xz = f - Vec3::E_Y * f.dot(Vec3::E_Y);
    let f_safe = f_xz.try_normalize(cfg.epsilon).unwrap_or(Vec3::E_X);
    let right = Vec3::E_Y.cross(f_safe);
    let right = right * (1.0 / right.norm());
    Rotation::from_matrix_unchecked(Mat3::from_cols(right, Vec3::E_Y, f_safe))
}

/// Geodesic distance between `r` and its own heading factor; zero for a pure
/// rotation about the gravity axis.
pub fn yaw_deviation(r: &Rotation, cfg: &HeadingConfig) -> f64 {
    geodesic_distance(r, &yaw_factor(r, cfg))
}

/// `ΔR_yaw = rpₜ · ΔR · rpₜ₊₁ᵀ` for a body-frame camera angular velocity `ΔR`.
pub fn heading_angular_velocity(d_cam: &Rotation, rp_t: &Rotation, rp_next: &Rotation) -> Rotation {
    *rp_t * *d_cam * rp_next.transpose()
}

/// Recursively integrates heading deltas from `yaw0`.
///
/// `out[0] = yaw0`, `out[t] = out[t−1] · deltas[t−1]`. Every
/// [`REPROJECT_INTERVAL`] steps the running product is orthonormalized and
/// projected back onto pure yaw.
pub fn integrate_heading(
    yaw0: &Rotation,
    deltas: &[Rotation],
    cfg: &HeadingConfig,
) -> Result<Vec<Rotation>> {
    let dev0 = yaw_deviation(yaw0, cfg);
    if !(dev0 <= PURE_YAW_TOLERANCE) {
        return Err(Error::NotPureYaw {
            index: 0,
            deviation: dev0,
        });
    }
    let mut out = Vec::with_capacity(deltas.len() + 1);
    out.push(*yaw0);
    let mut current = *yaw0;
    for (i, delta) in deltas.iter().enumerate() {
        let deviation = yaw_deviation(delta, cfg);
        if !(deviation <= PURE_YAW_TOLERANCE) {
            return Err(Error::NotPureYaw {
                index: i,
                deviation,
            });
        }
        current = current * *delta;
        if (i + 1) % REPROJECT_INTERVAL == 0 {
            current = yaw_factor(&orthonormalize(current.matrix())?, cfg);
        }
        out.push(current);
    }
    Ok(out)
}

/// `R^{h,w} = R_yaw · R_rp · R^{h,c}`.
pub fn compose_world_orientation(yaw: &Rotation, rp: &Rotation, r_hc: &Rotation) -> Rotation {
    *yaw * *rp * *r_hc
}

/// Output of [`decompose_sequence`].
#[derive(Debug, Clone, PartialEq)]
pub struct HeadingSequence {
    pub rp: Vec<Rotation>,
    pub yaw: Vec<Rotation>,
    /// Heading deltas, one per consecutive frame pair.
    pub delta_yaw: Vec<Rotation>,
}

impl HeadingSequence {
    /// Largest Frobenius error of `yaw[t] · rp[t]` against `rotations[t]`.
    pub fn max_reconstruction_residual(&self, rotations: &[Rotation]) -> f64 {
        self.yaw
            .iter()
            .zip(&self.rp)
            .zip(rotations)
            .map(|((y, rp), r)| (*(*y * *rp).matrix() - *r.matrix()).frobenius_norm())
            .fold(0.0, f64::max)
    }
}

/// Full pipeline over a camera orientation sequence: roll-pitch factors,
/// heading deltas from body-frame angular velocities, and the integrated
/// heading anchored at the first frame's true heading.
pub fn decompose_sequence(rotations: &[Rotation], cfg: &HeadingConfig) -> Result<HeadingSequence> {
    if rotations.len() < 2 {
        return Err(Error::TooFewFrames {
            what: "decompose_sequence",
            needed: 2,
            found: rotations.len(),
        });
    }
    let decomps: Vec<HeadingDecomp> = rotations
        .iter()
        .map(|r| decompose_heading(r, cfg))
        .collect();
    let rp: Vec<Rotation> = decomps.iter().map(|d| d.rp).collect();
    let delta_yaw: Vec<Rotation> = rotations
        .windows(2)
        .zip(rp.windows(2))
        .map(|(r, p)| heading_angular_velocity(&body_angular_velocity(&r[0], &r[1]), &p[0], &p[1]))
        .collect();
    let yaw = integrate_heading(&decomps[0].yaw, &delta_yaw, cfg)?;
    Ok(HeadingSequence { rp, yaw, delta_yaw })
}

/// Heading deltas implied by body-frame angular velocities and (possibly
/// noisy) roll-pitch estimates, each projected onto pure yaw.
///
/// With exact roll-pitch factors the projection is a no-op; with estimated
/// ones the raw conjugation carries a small tilt that would otherwise be
/// integrated into the heading.
pub fn heading_deltas(
    body_angular_velocities: &[Rotation],
    rp: &[Rotation],
    cfg: &HeadingConfig,
) -> Result<Vec<Rotation>> {
    if rp.len() != body_angular_velocities.len() + 1 {
        return Err(Error::LengthMismatch {
            what: "roll-pitch sequence vs angular velocities + 1",
            expected: body_angular_velocities.len() + 1,
            found: rp.len(),
        });
    }
    Ok(body_angular_velocities
        .iter()
        .zip(rp.windows(2))
        .map(|(d, p)| yaw_factor(&heading_angular_velocity(d, &p[0], &p[1]), cfg))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::from_axis_angle;

    fn frob(a: &Rotation, b: &Rotation) -> f64 {
        (*a.matrix() - *b.matrix()).frobenius_norm()
    }

    #[test]
    fn identity_decomposes_to_identity() {
        let d = decompose_heading(&Rotation::IDENTITY, &HeadingConfig::default());
        assert_eq!(d.yaw, Rotation::IDENTITY);
        assert_eq!(d.rp, Rotation::IDENTITY);
    }

    #[test]
    fn pure_yaw_input() {
        let r = from_axis_angle(Vec3::E_Y, 0.7).unwrap();
        let d = decompose_heading(&r, &HeadingConfig::default());
        assert!(frob(&d.yaw, &r) < 1e-15);
        assert!(frob(&d.rp, &Rotation::IDENTITY) < 1e-15);
    }

    #[test]
    fn vertical_forward_falls_back_to_e_x() {
        // Pitch by +π/2 about X maps e_z to (0, −1, 0).
        let r = Rotation::about_x(core::f64::consts::FRAC_PI_2);
        assert!((r * Vec3::E_Z - Vec3::new(0.0, -1.0, 0.0)).norm() < 1e-15);
        let d = decompose_heading(&r, &HeadingConfig::default());
        let expected = Mat3::from_cols(
            Vec3::new(0.0, 0.0, -1.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
        );
        assert!((*d.yaw.matrix() - expected).frobenius_norm() < 1e-15);
        assert!((d.yaw.matrix().det() - 1.0).abs() < 1e-15);
        assert!(frob(&(d.yaw * d.rp), &r) < 1e-15);
    }

    #[test]
    fn heading_angular_velocity_trivial_cases() {
        let i = Rotation::IDENTITY;
        assert_eq!(heading_angular_velocity(&i, &i, &i), i);
        let d = Rotation::about_x(0.3) * Rotation::about_z(0.1);
        assert_eq!(heading_angular_velocity(&d, &i, &i), d);
        let rp = Rotation::about_x(0.4) * Rotation::about_z(-0.2);
        assert!(frob(&heading_angular_velocity(&i, &rp, &rp), &i) < 1e-12);
    }

    #[test]
    fn integrate_heading_adds_angles() {
        let cfg = HeadingConfig::default();
        let out = integrate_heading(&Rotation::IDENTITY, &[], &cfg).unwrap();
        assert_eq!(out, [Rotation::IDENTITY]);

        let ten = 10f64.to_radians();
        let out =
            integrate_heading(&Rotation::IDENTITY, &[Rotation::about_y(ten); 2], &cfg).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], Rotation::IDENTITY);
        assert!(frob(&out[1], &Rotation::about_y(ten)) < 1e-15);
        assert!(frob(&out[2], &Rotation::about_y(2.0 * ten)) < 1e-15);
    }

    #[test]
    fn integrate_heading_rejects_tilted_delta() {
        let cfg = HeadingConfig::default();
        let deltas = [Rotation::about_y(0.1), Rotation::about_x(1e-3)];
        let err = integrate_heading(&Rotation::IDENTITY, &deltas, &cfg).unwrap_err();
        assert!(matches!(err, Error::NotPureYaw { index: 1, .. }));
        // Tilts below the tolerance pass.
        assert!(integrate_heading(&Rotation::IDENTITY, &[Rotation::about_x(1e-6)], &cfg).is_ok());
    }

    #[test]
    fn integrate_heading_long_chain_stays_pure_yaw() {
        let cfg = HeadingConfig::default();
        let step = 0.0123;
        let out =
            integrate_heading(&Rotation::IDENTITY, &[Rotation::about_y(step); 500], &cfg).unwrap();
        for (t, y) in out.iter().enumerate() {
            let expected = Rotation::about_y(step * t as f64);
            assert!(frob(y, &expected) < 1e-12, "frame {t}");
            assert!((*y * Vec3::E_Y - Vec3::E_Y).norm() < 1e-15);
        }
    }

    #[test]
    fn compose_world_orientation_examples() {
        let i = Rotation::IDENTITY;
        let r = Rotation::about_x(0.3) * Rotation::about_y(1.1);
        assert_eq!(compose_world_orientation(&i, &i, &r), r);
        let y = Rotation::about_y(0.8);
        assert_eq!(compose_world_orientation(&y, &i, &i), y);
    }

    #[test]
    fn decompose_sequence_static_and_yaw_only() {
        let cfg = HeadingConfig::default();
        let r = Rotation::about_y(0.4) * Rotation::about_x(0.2) * Rotation::about_z(0.1);
        let seq = decompose_sequence(&[r; 5], &cfg).unwrap();
        for d in &seq.delta_yaw {
            assert!(frob(d, &Rotation::IDENTITY) < 1e-15);
        }

        let yaws: Vec<Rotation> = (0..6).map(|t| Rotation::about_y(0.2 * t as f64)).collect();
        let seq = decompose_sequence(&yaws, &cfg).unwrap();
        for t in 0..6 {
            assert!(frob(&seq.rp[t], &Rotation::IDENTITY) < 1e-14);
            assert!(frob(&seq.yaw[t], &yaws[t]) < 1e-14);
        }

        assert!(matches!(
            decompose_sequence(&[r], &cfg),
            Err(Error::TooFewFrames { .. })
        ));
    }

    #[test]
    fn config_validation() {
        assert!(HeadingConfig::new(0.0).is_err());
        assert!(HeadingConfig::new(-1e-6).is_err());
        assert!(HeadingConfig::new(f64::NAN).is_err());
        assert_eq!(HeadingConfig::new(1e-3).unwrap().epsilon(), 1e-3);
        assert_eq!(HeadingConfig::default().epsilon(), 1e-6);
    }

    #[test]
    fn heading_deltas_length_check() {
        let cfg = HeadingConfig::default();
        let err = heading_deltas(&[Rotation::IDENTITY], &[Rotation::IDENTITY], &cfg).unwrap_err();
        assert!(matches!(err, Error::LengthMismatch { .. }));
    }
}
