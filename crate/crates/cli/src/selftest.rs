//! Built-in invariant suite: every module property at reduced sample counts,
//! from a fixed seed, so the output text is identical run to run.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use headtraj_core::heading::{decompose_heading, decompose_sequence, yaw_deviation, yaw_factor};
use headtraj_core::losses::LossWeights;
use headtraj_core::losses::{
    generate_contact_labels, teacher_forcing_traj_loss, CONTACT_SPEED_THRESHOLD,
};
use headtraj_core::metrics::{evaluate_scene, procrustes_align, rte, wa_w_mpjpe_100};
use headtraj_core::simulator::sampling::{random_rotation, random_smooth_rotations, random_vec3};
use headtraj_core::simulator::{generate_scene, perturb, NoiseModel, SceneConfig};
use headtraj_core::so3::{geodesic_distance, orthonormalize, Mat3};
use headtraj_core::solver::{fit, SolverConfig, StopReason, Supervision};
use headtraj_core::trajectory::{
    differentiate_trajectory, integrate_trajectory, reconstruct_world_motion,
};
use headtraj_core::{HeadingConfig, MotionSequence, Rotation, Scene, Vec3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::heading_config;

const SEED: u64 = 0x5e1f_7e57;
const CASES: usize = 16;

type Check = fn(&mut ChaCha8Rng, &HeadingConfig) -> Result<(), String>;

const PROPERTIES: [(&str, Check); 16] = [
    ("so3.orthonormalize", orthonormalize_projects),
    ("heading.decompose_round_trip", decompose_round_trip),
    ("heading.global_yaw_invariance", global_yaw_invariance),
    (
        "heading.vertical_forward_fallback",
        vertical_forward_fallback,
    ),
    (
        "heading.static_camera_identity_delta",
        static_camera_identity_delta,
    ),
    ("heading.sequence_round_trip", sequence_round_trip),
    (
        "trajectory.integrate_differentiate_inverse",
        integrate_differentiate_inverse,
    ),
    (
        "trajectory.noiseless_reconstruction",
        noiseless_reconstruction,
    ),
    (
        "losses.teacher_forcing_zero_iff_exact",
        teacher_forcing_zero_iff_exact,
    ),
    (
        "losses.contact_translation_invariance",
        contact_translation_invariance,
    ),
    (
        "metrics.procrustes_recovers_similarity",
        procrustes_recovers_similarity,
    ),
    ("metrics.self_evaluation_zero", self_evaluation_zero),
    ("metrics.rigid_invariance", rigid_invariance),
    ("simulator.determinism", simulator_determinism),
    ("solver.noiseless_converged", solver_noiseless_converged),
    ("solver.monotone_descent", solver_monotone_descent),
];

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rot_err(a: &Rotation, b: &Rotation) -> f64 {
    (*a.matrix() - *b.matrix()).frobenius_norm()
}

fn max_point_err(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| (*p - *q).norm())
        .fold(0.0, f64::max)
}

/// Writes one line per property and a summary; returns whether all passed.
pub fn run(out: &mut dyn Write) -> bool {
    let heading = heading_config();
    let mut lines = Vec::new();
    let mut failed = 0;
    match &heading {
        Ok(h) => lines.push(format!("PASS heading.config (epsilon {:e})", h.epsilon())),
        Err(e) => {
            failed += 1;
            lines.push(format!("FAIL heading.config: {e:#}"));
        }
    }
    for (name, check) in PROPERTIES {
        let result = match &heading {
            Ok(h) => check(&mut ChaCha8Rng::seed_from_u64(SEED), h),
            Err(_) => Err("heading config unavailable".into()),
        };
        match result {
            Ok(()) => lines.push(format!("PASS {name}")),
            Err(msg) => {
                failed += 1;
                lines.push(format!("FAIL {name}: {msg}"));
            }
        }
    }
    let total = PROPERTIES.len() + 1;
    lines.push(format!("{} of {total} properties passed", total - failed));
    for line in lines {
        let _ = writeln!(out, "{line}");
    }
    failed == 0
}

fn orthonormalize_projects(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let r = random_rotation(rng, 0.0);
        let noise = Mat3::from_rows(
            random_vec3(rng, 1e-3),
            random_vec3(rng, 1e-3),
            random_vec3(rng, 1e-3),
        );
        let q = orthonormalize(&(*r.matrix() + noise)).map_err(|e| e.to_string())?;
        let ortho = q.matrix().orthonormality_error();
        ensure(ortho < 1e-12, || format!("orthonormality error {ortho:e}"))?;
        let d = geodesic_distance(&q, &r);
        ensure(d < 1e-2, || format!("moved {d:e} rad from the source"))?;
    }
    Ok(())
}

fn decompose_round_trip(rng: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let r = random_rotation(rng, 1e-3);
        let d = decompose_heading(&r, h);
        let res = rot_err(&(d.yaw * d.rp), &r);
        ensure(res < 1e-9, || format!("yaw·rp residual {res:e}"))?;
        let dev = yaw_deviation(&d.yaw, h);
        ensure(dev < 1e-9, || {
            format!("yaw factor deviates {dev:e} from pure yaw")
        })?;
        let rest = rot_err(&yaw_factor(&d.rp, h), &Rotation::IDENTITY);
        ensure(rest < 1e-9, || format!("roll-pitch keeps heading {rest:e}"))?;
    }
    Ok(())
}

fn global_yaw_invariance(rng: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let r = random_rotation(rng, 1e-2);
        let g = Rotation::about_y(rng.random_range(-PI..PI));
        let (a, b) = (decompose_heading(&r, h), decompose_heading(&(g * r), h));
        let e_rp = rot_err(&a.rp, &b.rp);
        ensure(e_rp < 1e-9, || format!("roll-pitch changed by {e_rp:e}"))?;
        let e_yaw = rot_err(&(g * a.yaw), &b.yaw);
        ensure(e_yaw < 1e-9, || {
            format!("heading not equivariant ({e_yaw:e})")
        })?;
    }
    Ok(())
}

fn vertical_forward_fallback(rng: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for i in 0..CASES {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let r = Rotation::about_y(rng.random_range(-PI..PI))
            * Rotation::about_x(sign * FRAC_PI_2)
            * Rotation::about_z(rng.random_range(-PI..PI));
        let d = decompose_heading(&r, h);
        ensure(
            d.yaw.matrix().is_finite() && d.rp.matrix().is_finite(),
            || "non-finite factors".into(),
        )?;
        let res = rot_err(&(d.yaw * d.rp), &r);
        ensure(res < 1e-9, || {
            format!("yaw·rp residual {res:e} for vertical forward")
        })?;
    }
    Ok(())
}

fn static_camera_identity_delta(rng: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let r = random_rotation(rng, 1e-2);
        let seq = decompose_sequence(&[r; 8], h).map_err(|e| e.to_string())?;
        let worst = seq
            .delta_yaw
            .iter()
            .map(|d| rot_err(d, &Rotation::IDENTITY))
            .fold(0.0, f64::max);
        ensure(worst < 1e-9, || {
            format!("static heading delta off identity by {worst:e}")
        })?;
    }
    Ok(())
}

fn sequence_round_trip(rng: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for _ in 0..4 {
        let rots = random_smooth_rotations(rng, 150, 0.1, 0.05);
        let seq = decompose_sequence(&rots, h).map_err(|e| e.to_string())?;
        let res = seq.max_reconstruction_residual(&rots);
        ensure(res < 1e-6, || format!("sequence residual {res:e}"))?;
    }
    Ok(())
}

fn integrate_differentiate_inverse(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let rots = random_smooth_rotations(rng, 30, 0.2, 0.0);
        let v: Vec<Vec3> = (0..29).map(|_| random_vec3(rng, 0.1)).collect();
        let p =
            integrate_trajectory(random_vec3(rng, 5.0), &rots, &v).map_err(|e| e.to_string())?;
        let back = differentiate_trajectory(&p, &rots).map_err(|e| e.to_string())?;
        let err = max_point_err(&back, &v);
        ensure(err < 1e-12, || format!("velocity round trip error {err:e}"))?;
    }
    Ok(())
}

fn scene(name: &str, frames: usize, seed: u64) -> Result<Scene, String> {
    let cfg = SceneConfig::preset(name, frames, 30.0).map_err(|e| e.to_string())?;
    generate_scene(&cfg, seed).map_err(|e| e.to_string())
}

fn noiseless_reconstruction(_: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    for name in ["line-static", "circle-orbit", "figure-eight-handheld"] {
        let gt = scene(name, 90, 3)?;
        let obs = perturb(&gt, &NoiseModel::default()).map_err(|e| e.to_string())?;
        let yaw0 = obs.initial_yaw.unwrap_or(Rotation::IDENTITY);
        let rec = reconstruct_world_motion(&obs, &yaw0, h).map_err(|e| e.to_string())?;
        let err = max_point_err(&rec.human.positions, &gt.human.positions)
            .max(max_point_err(&rec.camera.positions, &gt.camera.positions));
        ensure(err < 1e-6, || format!("{name}: position error {err:e}"))?;
    }
    Ok(())
}

fn teacher_forcing_zero_iff_exact(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    let gt = scene("circle-follow", 40, 1)?;
    let m = &gt.human;
    let v = m.derived_local_velocities().map_err(|e| e.to_string())?;
    let zero = teacher_forcing_traj_loss(&v, &m.rotations, &v, &m.rotations, &m.positions)
        .map_err(|e| e.to_string())?;
    ensure(zero < 1e-12, || format!("loss at ground truth {zero:e}"))?;
    for _ in 0..CASES {
        let mut vp = v.clone();
        let i = rng.random_range(0..vp.len());
        vp[i] += random_vec3(rng, 0.05);
        let l = teacher_forcing_traj_loss(&vp, &m.rotations, &v, &m.rotations, &m.positions)
            .map_err(|e| e.to_string())?;
        ensure(l > 0.0, || format!("perturbed velocity {i} scores zero"))?;
    }
    Ok(())
}

fn contact_translation_invariance(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let feet: Vec<Vec<Vec3>> = (0..20)
            .map(|_| vec![random_vec3(rng, 0.01), random_vec3(rng, 0.01)])
            .collect();
        let offset = random_vec3(rng, 100.0);
        let moved: Vec<Vec<Vec3>> = feet
            .iter()
            .map(|f| f.iter().map(|p| *p + offset).collect())
            .collect();
        let a = generate_contact_labels(&feet, 30.0, CONTACT_SPEED_THRESHOLD)
            .map_err(|e| e.to_string())?;
        let b = generate_contact_labels(&moved, 30.0, CONTACT_SPEED_THRESHOLD)
            .map_err(|e| e.to_string())?;
        ensure(a == b, || "labels changed under translation".into())?;
    }
    Ok(())
}

fn procrustes_recovers_similarity(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    for _ in 0..CASES {
        let p: Vec<Vec3> = (0..12).map(|_| random_vec3(rng, 1.0)).collect();
        let r = random_rotation(rng, 0.0);
        let s = rng.random_range(0.5..2.0);
        let t = random_vec3(rng, 3.0);
        let q: Vec<Vec3> = p.iter().map(|x| s * (r * *x) + t).collect();
        let a = procrustes_align(&p, &q, true).map_err(|e| e.to_string())?;
        let aligned: Vec<Vec3> = p.iter().map(|x| a.apply(*x)).collect();
        let err = max_point_err(&aligned, &q);
        ensure(err < 1e-9, || format!("alignment residual {err:e}"))?;
    }
    Ok(())
}

fn self_evaluation_zero(_: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    let gt = scene("figure-eight-orbit", 130, 2)?;
    let eval = evaluate_scene(&gt, &gt).map_err(|e| e.to_string())?;
    for (key, value) in eval.report.entries() {
        if key == "jitter_10m_s3" {
            continue;
        }
        let v = value.ok_or_else(|| format!("{key} missing"))?;
        ensure(v.abs() < 1e-9, || format!("{key} = {v:e}"))?;
    }
    Ok(())
}

fn transform(m: &MotionSequence, r: &Rotation, t: Vec3) -> MotionSequence {
    MotionSequence {
        rotations: m.rotations.iter().map(|x| *r * *x).collect(),
        positions: m.positions.iter().map(|p| *r * *p + t).collect(),
        joints: m.joints.as_ref().map(|j| {
            j.iter()
                .map(|f| f.iter().map(|p| *r * *p + t).collect())
                .collect()
        }),
        ..m.clone()
    }
}

fn rigid_invariance(rng: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    let gt = scene("circle-static", 120, 0)?;
    let mut pred = gt.human.clone();
    for (i, p) in pred.positions.iter_mut().enumerate() {
        *p += Vec3::new(0.002 * i as f64, 0.0, 0.0);
    }
    if let Some(joints) = &mut pred.joints {
        for (i, f) in joints.iter_mut().enumerate() {
            for p in f {
                *p += Vec3::new(0.002 * i as f64, 0.0, 0.0);
            }
        }
    }
    let err = |e: headtraj_core::Error| e.to_string();
    let base_rte = rte(&pred, &gt.human).map_err(err)?;
    let gj = gt.human.joints.as_ref().ok_or("joints missing")?;
    let base_wa = wa_w_mpjpe_100(pred.joints.as_ref().ok_or("joints missing")?, gj)
        .map_err(err)?
        .0;
    for _ in 0..CASES {
        let moved = transform(&pred, &random_rotation(rng, 0.0), random_vec3(rng, 10.0));
        let r = rte(&moved, &gt.human).map_err(err)?;
        ensure((r - base_rte).abs() < 1e-6 * base_rte.max(1.0), || {
            format!("rte {r} vs {base_rte}")
        })?;
        let wa = wa_w_mpjpe_100(moved.joints.as_ref().ok_or("joints missing")?, gj)
            .map_err(err)?
            .0;
        ensure((wa - base_wa).abs() < 1e-6 * base_wa.max(1.0), || {
            format!("wa-mpjpe {wa} vs {base_wa}")
        })?;
    }
    Ok(())
}

fn simulator_determinism(_: &mut ChaCha8Rng, _: &HeadingConfig) -> Result<(), String> {
    let a = scene("figure-eight-handheld", 60, 11)?;
    let b = scene("figure-eight-handheld", 60, 11)?;
    ensure(a == b, || "same seed gave different scenes".into())?;
    let c = scene("figure-eight-handheld", 60, 12)?;
    ensure(a != c, || "handheld shake ignores the seed".into())
}

fn solver_inputs(rp_noise: f64) -> Result<(headtraj_core::Observations, Supervision), String> {
    let gt = scene("circle-orbit", 24, 5)?;
    let noise = NoiseModel {
        rp_noise_rad: rp_noise,
        seed: 5,
        ..NoiseModel::default()
    };
    let obs = perturb(&gt, &noise).map_err(|e| e.to_string())?;
    let sup = Supervision::from_scene(&gt).map_err(|e| e.to_string())?;
    Ok((obs, sup))
}

fn solver_noiseless_converged(_: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    let (obs, sup) = solver_inputs(0.0)?;
    let state = fit(
        &obs,
        &sup,
        &SolverConfig::default(),
        &LossWeights::default(),
        h,
    )
    .map_err(|e| e.to_string())?;
    ensure(
        state.stop_reason == Some(StopReason::Converged) && state.loss_history.len() == 1,
        || {
            format!(
                "stopped with {:?} after {} losses",
                state.stop_reason,
                state.loss_history.len()
            )
        },
    )
}

fn solver_monotone_descent(_: &mut ChaCha8Rng, h: &HeadingConfig) -> Result<(), String> {
    let (obs, sup) = solver_inputs(0.02)?;
    let cfg = SolverConfig {
        max_iters: 8,
        ..SolverConfig::default()
    };
    let state = fit(&obs, &sup, &cfg, &LossWeights::default(), h).map_err(|e| e.to_string())?;
    let hist = &state.loss_history;
    ensure(hist.windows(2).all(|w| w[1] < w[0]), || {
        "loss history is not strictly decreasing".into()
    })?;
    ensure(hist.len() > 1, || "no step accepted".into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_property_passes_with_defaults() {
        let h = HeadingConfig::default();
        for (name, check) in PROPERTIES {
            check(&mut ChaCha8Rng::seed_from_u64(SEED), &h)
                .unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }
}
