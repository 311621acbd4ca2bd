#![allow(dead_code)]

use headtraj_core::so3::Mat3;
use headtraj_core::{Rotation, Vec3};
use nalgebra::{Matrix3, Vector3};

pub fn to_na(m: &Mat3) -> Matrix3<f64> {
    Matrix3::from_row_slice(&m.to_row_major())
}

pub fn from_na(m: &Matrix3<f64>) -> Mat3 {
    Mat3::from_rows(
        Vec3::new(m[(0, 0)], m[(0, 1)], m[(0, 2)]),
        Vec3::new(m[(1, 0)], m[(1, 1)], m[(1, 2)]),
        Vec3::new(m[(2, 0)], m[(2, 1)], m[(2, 2)]),
    )
}

pub fn v_na(v: Vec3) -> Vector3<f64> {
    Vector3::new(v.x, v.y, v.z)
}

pub fn frob(a: &Mat3, b: &Mat3) -> f64 {
    (*a - *b).frobenius_norm()
}

pub fn rot_dist(a: &Rotation, b: &Rotation) -> f64 {
    frob(a.matrix(), b.matrix())
}

/// Closest rotation via SVD: `U diag(1, 1, det(U Vᵀ)) Vᵀ`.
pub fn svd_polar(m: &Mat3) -> Mat3 {
    let svd = to_na(m).svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    from_na(&(u * Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d)) * vt))
}

/// Umeyama similarity (or rigid) alignment of `p` onto `q`.
pub fn svd_umeyama(p: &[Vec3], q: &[Vec3], with_scale: bool) -> (Matrix3<f64>, f64, Vector3<f64>) {
    let n = p.len() as f64;
    let cp = p.iter().map(|v| v_na(*v)).sum::<Vector3<f64>>() / n;
    let cq = q.iter().map(|v| v_na(*v)).sum::<Vector3<f64>>() / n;
    let mut h = Matrix3::zeros();
    let mut var_p = 0.0;
    for (a, b) in p.iter().zip(q) {
        let (a, b) = (v_na(*a) - cp, v_na(*b) - cq);
        h += b * a.transpose();
        var_p += a.norm_squared();
    }
    let svd = h.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let d = (u * vt).determinant().signum();
    let s_mat = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, d));
    let r = u * s_mat * vt;
    let scale = if with_scale {
        (Matrix3::from_diagonal(&svd.singular_values) * s_mat).trace() / var_p
    } else {
        1.0
    };
    let t = cq - scale * r * cp;
    (r, scale, t)
}

pub fn apply_na(al: &(Matrix3<f64>, f64, Vector3<f64>), p: Vec3) -> Vector3<f64> {
    al.1 * (al.0 * v_na(p)) + al.2
}

/// Rigid first-two-frame / full-segment alignment error in millimeters,
/// computed with the SVD oracle.
pub fn oracle_segment_error(pred: &[Vec<Vec3>], gt: &[Vec<Vec3>], fit_frames: usize) -> f64 {
    let p: Vec<Vec3> = pred[..fit_frames].iter().flatten().copied().collect();
    let q: Vec<Vec3> = gt[..fit_frames].iter().flatten().copied().collect();
    let al = svd_umeyama(&p, &q, false);
    let mut sum = 0.0;
    let mut n = 0usize;
    for (pf, gf) in pred.iter().zip(gt) {
        for (a, b) in pf.iter().zip(gf) {
            sum += (apply_na(&al, *a) - v_na(*b)).norm();
            n += 1;
        }
    }
    sum / n as f64 * 1000.0
}

/// The 24 proper rotations that permute coordinate axes with sign changes.
pub fn signed_permutations() -> Vec<Rotation> {
    let perms = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut out = Vec::new();
    for p in perms {
        for signs in 0..8u8 {
            let mut rows = [[0.0; 3]; 3];
            for (i, &j) in p.iter().enumerate() {
                rows[i][j] = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            }
            let m = Mat3(rows);
            if m.det() > 0.0 {
                out.push(Rotation::try_from_matrix(m).unwrap());
            }
        }
    }
    out
}
