//! Fixed-size 3-vector and 3×3 matrix algebra, plus the rotation type used
//! by every other module.
//!
//! Rotations are stored as full row-major 3×3 matrices. Two angular-velocity
//! representations are provided: body frame `ΔRᵇ = Rₜᵀ Rₜ₊₁` and world frame
//! `ΔRʷ = Rₜ₊₁ Rₜᵀ`, related by conjugation `ΔRʷ = Rₜ ΔRᵇ Rₜᵀ`.

use core::ops::{Add, AddAssign, Index, Mul, Neg, Sub, SubAssign};

use libm::{atan2, cos, sin, sqrt};

use crate::{Error, Result};

/// Tolerance for accepting an externally supplied matrix as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-6;

/// Tolerance on `|axis| - 1` for axis-angle construction.
pub const AXIS_TOLERANCE: f64 = 1e-9;

/// Frame conventions. Gravity points along +Y, the forward axis is +Z.
pub mod conventions {
    use super::Vec3;

    pub const GRAVITY_AXIS: Vec3 = Vec3::E_Y;
    pub const FORWARD_AXIS: Vec3 = Vec3::E_Z;
    /// Identifier written into serialized files.
    pub const NAME: &str = "y-down-z-forward";
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(from = "[f64; 3]", into = "[f64; 3]"))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E_X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E_Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E_Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        sqrt(self.dot(self))
    }

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    /// Returns `None` for vectors shorter than `eps`.
    pub fn try_normalize(self, eps: f64) -> Option<Vec3> {
        let n = self.norm();
        (n > eps).then(|| self * (1.0 / n))
    }

    /// Component in the horizontal (XZ) plane.
    pub fn horizontal(self) -> Vec3 {
        Vec3::new(self.x, 0.0, self.z)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Vec3 {
    fn sub_assign(&mut self, o: Vec3) {
        *self = *self - o;
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// General 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn from_rows(r0: Vec3, r1: Vec3, r2: Vec3) -> Self {
        Mat3([r0.to_array(), r1.to_array(), r2.to_array()])
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Mat3([[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]])
    }

    pub fn from_row_major(a: [f64; 9]) -> Self {
        Mat3([[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]])
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        let m = &self.0;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn diag(a: f64, b: f64, c: f64) -> Self {
        Mat3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: Vec3, b: Vec3) -> Self {
        Mat3::from_rows(b * a.x, b * a.y, b * a.z)
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.0[0][j], self.0[1][j], self.0[2][j])
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from(self.0[i])
    }

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    pub fn frobenius_norm(&self) -> f64 {
        sqrt(self.0.iter().flatten().map(|v| v * v).sum())
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// Inverse via the adjugate. `None` when `|det|` is below `eps`.
    pub fn try_inverse(&self, eps: f64) -> Option<Mat3> {
        let det = self.det();
        if !(det.abs() > eps) {
            return None;
        }
        let (r0, r1, r2) = (self.row(0), self.row(1), self.row(2));
        // Columns of the inverse are the cross products of the rows.
        Some(Mat3::from_cols(r1.cross(r2), r2.cross(r0), r0.cross(r1)).scale(1.0 / det))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    /// `‖MᵀM − I‖_F`.
    pub fn orthonormality_error(&self) -> f64 {
        (self.transpose() * *self - Mat3::IDENTITY).frobenius_norm()
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.0[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut out = self;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] += o.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o.scale(-1.0)
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] =
                    self.0[i][0] * o.0[0][j] + self.0[i][1] * o.0[1][j] + self.0[i][2] * o.0[2][j];
            }
        }
        out
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// An element of SO(3).
///
/// Matrices entering from outside are checked against [`ROTATION_TOLERANCE`];
/// products of rotations are trusted and may accumulate rounding drift, which
/// [`orthonormalize`] repairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Default for Rotation {
    fn default() -> Self {
        Rotation::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::IDENTITY);

    /// Validates orthonormality and orientation to [`ROTATION_TOLERANCE`].
    pub fn try_from_matrix(m: Mat3) -> Result<Self> {
        Self::try_from_matrix_with_tolerance(m, ROTATION_TOLERANCE)
    }

    pub fn try_from_matrix_with_tolerance(m: Mat3, tol: f64) -> Result<Self> {
        let orthonormality = m.orthonormality_error();
        let det = m.det();
        if !m.is_finite() || !(orthonormality <= tol) || !((det - 1.0).abs() <= tol) {
            return Err(Error::NotARotation {
                orthonormality,
                det,
            });
        }
        Ok(Rotation(m))
    }

    pub fn try_from_row_major(a: [f64; 9]) -> Result<Self> {
        Self::try_from_matrix(Mat3::from_row_major(a))
    }

    /// Caller guarantees `m` is a rotation up to rounding.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Rotation(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn to_row_major(&self) -> [f64; 9] {
        self.0.to_row_major()
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    pub fn inverse(&self) -> Rotation {
        self.transpose()
    }

    pub fn col(&self, j: usize) -> Vec3 {
        self.0.col(j)
    }

    /// Rotation by `angle` about the +X axis.
    pub fn about_x(angle: f64) -> Rotation {
        let (s, c) = (sin(angle), cos(angle));
        Rotation(Mat3([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]))
    }

    /// Rotation by `angle` about the +Y (gravity) axis: a pure heading.
    pub fn about_y(angle: f64) -> Rotation {
        let (s, c) = (sin(angle), cos(angle));
        Rotation(Mat3([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]))
    }

    /// Rotation by `angle` about the +Z (forward) axis.
    pub fn about_z(angle: f64) -> Rotation {
        let (s, c) = (sin(angle), cos(angle));
        Rotation(Mat3([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]))
    }

    /// Rotation angle in `[0, π]`.
    pub fn angle(&self) -> f64 {
        let m = &self.0;
        let s = Vec3::new(
            m[(2, 1)] - m[(1, 2)],
            m[(0, 2)] - m[(2, 0)],
            m[(1, 0)] - m[(0, 1)],
        );
        let cos_theta = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
        atan2(0.5 * s.norm(), cos_theta)
    }

    /// Orientation whose +Z axis points from `eye` toward `target` with +Y
    /// as close to world down as possible. `None` when looking straight
    /// along the gravity axis.
    pub fn look_at(eye: Vec3, target: Vec3) -> Option<Rotation> {
        let z = (target - eye).try_normalize(1e-12)?;
        let x = Vec3::E_Y.cross(z).try_normalize(1e-9)?;
        let y = z.cross(x);
        Some(Rotation(Mat3::from_cols(x, y, z)))
    }
}

impl Mul for Rotation {
    type Output = Rotation;
    fn mul(self, o: Rotation) -> Rotation {
        Rotation(self.0 * o.0)
    }
}

impl Mul<Vec3> for Rotation {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        self.0 * v
    }
}

/// Rodrigues construction of the right-handed rotation by `angle` about a
/// unit `axis`.
pub fn from_axis_angle(axis: Vec3, angle: f64) -> Result<Rotation> {
    let norm = axis.norm();
    if !((norm - 1.0).abs() <= AXIS_TOLERANCE) {
        return Err(Error::NonUnitAxis { norm });
    }
    Ok(axis_angle_unchecked(axis, angle))
}

pub(crate) fn axis_angle_unchecked(a: Vec3, angle: f64) -> Rotation {
    let (s, c) = (sin(angle), cos(angle));
    let k = Mat3([[0.0, -a.z, a.y], [a.z, 0.0, -a.x], [-a.y, a.x, 0.0]]);
    // R = I + sin θ K + (1 − cos θ) K²
    Rotation(Mat3::IDENTITY + k.scale(s) + (k * k).scale(1.0 - c))
}

/// Nearest special-orthogonal matrix in the Frobenius sense (orthogonal polar
/// factor), computed by Newton iteration `X ← (X + X⁻ᵀ)/2`.
pub fn orthonormalize(m: &Mat3) -> Result<Rotation> {
    let det = m.det();
    if !m.is_finite()
        || !(det
            > 1e-12 * {
                let n = m.frobenius_norm();
                n * n * n
            }
            .max(f64::MIN_POSITIVE))
    {
        return Err(Error::NotOrthonormalizable { det });
    }
    let mut x = *m;
    for _ in 0..100 {
        let inv_t = match x.try_inverse(0.0) {
            Some(inv) => inv.transpose(),
            None => return Err(Error::NotOrthonormalizable { det }),
        };
        let next = (x + inv_t).scale(0.5);
        let change = (next - x).frobenius_norm();
        x = next;
        if change <= 1e-15 {
            break;
        }
    }
    Ok(Rotation(x))
}

/// Angle of `R1ᵀ R2`, in `[0, π]`.
pub fn geodesic_distance(r1: &Rotation, r2: &Rotation) -> f64 {
    (r1.transpose() * *r2).angle()
}

/// `ΔRᵇ = Rₜᵀ Rₜ₊₁`.
pub fn body_angular_velocity(r_t: &Rotation, r_next: &Rotation) -> Rotation {
    r_t.transpose() * *r_next
}

/// `ΔRʷ = Rₜ ΔRᵇ Rₜᵀ`.
pub fn body_to_world_velocity(d_body: &Rotation, r_t: &Rotation) -> Rotation {
    *r_t * *d_body * r_t.transpose()
}
