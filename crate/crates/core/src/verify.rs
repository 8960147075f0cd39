//! Self-check suites behind the `verify` command. Each suite compares a
//! closed form against an independent evaluation on seeded random samples.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::controller::{self, matrix_path, ControllerConfig, LogicState, MeasurementSet};
use crate::error::Error;
use crate::so3::{
    hat, psi, quat_mul, quat_to_rot, random_quaternion, random_rotation, random_unit_vector,
    rot_axis, Mat3, Rotation, Vec3,
};
use crate::trace_potential::{psi_ar, v_a, SpectrumClass, WeightMatrix};
use crate::warping::{self, GainPolicy, WarpedPotential};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Level {
    Quick,
    Full,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {:<16} {} ({:.2} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed.as_secs_f64()
        )
    }
}

fn timed(name: &'static str, f: impl FnOnce() -> (bool, String)) -> SuiteReport {
    let t0 = Instant::now();
    let (passed, detail) = f();
    SuiteReport {
        name,
        passed,
        detail,
        elapsed: t0.elapsed(),
    }
}

/// Runs every suite. `gain_factor` scales `k̄` for the determinant suite.
pub fn run_all(level: Level, gain_factor: f64, seed: u64) -> Vec<SuiteReport> {
    vec![
        timed("kernel", || kernel(seed, 10_000)),
        timed("dual-path", || dual_path(seed, 1000, 5)),
        timed("gradient-fd", || gradient_fd(seed, 100)),
        timed("critical-points", || critical_points(seed, 20)),
        timed("gap-brute-force", || gap_brute_force(seed, 20)),
        timed("sphere-grid", || {
            sphere_grid(seed, if level == Level::Full { 1_000_000 } else { 20_000 })
        }),
        timed("det-theta", || {
            det_theta(seed, gain_factor, if level == Level::Full { 100_000 } else { 10_000 })
        }),
    ]
}

/// Symmetric matrix with eigenvalues `vals` in a random eigenbasis.
pub fn random_weight(rng: &mut ChaCha8Rng, vals: [f64; 3]) -> Mat3 {
    let q = *random_rotation(rng).matrix();
    let a = q * Mat3::diag(vals) * q.transpose();
    // exact symmetry
    (a + a.transpose()) * 0.5
}

fn random_three_distinct(rng: &mut ChaCha8Rng) -> WeightMatrix {
    loop {
        let mut v = [rng.random_range(0.2..5.0), rng.random_range(0.2..5.0), rng.random_range(0.2..5.0)];
        v.sort_by(f64::total_cmp);
        if v[1] - v[0] > 0.05 && v[2] - v[1] > 0.05 {
            if let Ok(w) = WeightMatrix::new(random_weight(rng, v)) {
                return w;
            }
        }
    }
}

fn random_two_distinct(rng: &mut ChaCha8Rng) -> WeightMatrix {
    loop {
        let lo = rng.random_range(0.2..3.0);
        let hi = lo + rng.random_range(0.1..3.0);
        if let Ok(w) = WeightMatrix::new(random_weight(rng, [lo, lo, hi])) {
            if w.class() == SpectrumClass::TwoDistinct {
                return w;
            }
        }
    }
}

/// Random synergistic `(A, u, k)` with `Q = {1, 2}`, `k₁ = −k₂`.
pub fn random_feasible(rng: &mut ChaCha8Rng) -> WarpedPotential {
    loop {
        let w = if rng.random_bool(0.75) {
            random_three_distinct(rng)
        } else {
            random_two_distinct(rng)
        };
        let u = random_unit_vector(rng);
        if !warping::feasibility(&w, u).feasible {
            continue;
        }
        let k = rng.random_range(0.1..0.99) * warping::k_bound(&w);
        if let Ok(wp) = WarpedPotential::symmetric(w, u, k) {
            if wp.delta_min() > 1e-3 {
                return wp;
            }
        }
    }
}

fn kernel(seed: u64, n: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0f64; 5];
    for _ in 0..n {
        let a = Mat3::from_row_slice(&std::array::from_fn(|_| rng.random_range(-2.0..2.0)));
        let u = Vec3::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        worst[0] = worst[0].max((a.inner(&hat(u)) - 2.0 * psi(&a).dot(u)).abs());

        let theta = rng.random_range(-2.0 * PI..2.0 * PI);
        let axis = random_unit_vector(&mut rng);
        let k = hat(axis) * theta;
        let (mut term, mut series) = (Mat3::IDENTITY, Mat3::IDENTITY);
        for i in 1..60 {
            term = term * k * (1.0 / i as f64);
            series = series + term;
        }
        worst[1] = worst[1].max((series - *rot_axis(theta, axis).matrix()).frobenius_norm());

        let (q1, q2) = (random_quaternion(&mut rng), random_quaternion(&mut rng));
        let lhs = quat_to_rot(&quat_mul(&q1, &q2));
        worst[2] = worst[2].max((*lhs.matrix() - *(quat_to_rot(&q1) * quat_to_rot(&q2)).matrix()).frobenius_norm());

        let r = random_rotation(&mut rng);
        let v = random_unit_vector(&mut rng);
        worst[3] = worst[3].max((*r.matrix() * hat(v) * r.matrix().transpose() - hat(r * v)).frobenius_norm());

        let d = [rng.random_range(0.1..3.0), rng.random_range(0.1..3.0), rng.random_range(0.1..3.0)];
        if let Ok(w) = WeightMatrix::new(random_weight(&mut rng, d)) {
            let wm = w.w();
            worst[4] = worst[4].max((v_a(&w, &quat_to_rot(&q1)) - 2.0 * q1.eps.dot(wm * q1.eps)).abs());
        }
    }
    let ok = worst.iter().all(|&e| e < 1e-10);
    (
        ok,
        format!(
            "{n} samples; id7 {:.1e}, series {:.1e}, quat-hom {:.1e}, conj {:.1e}, quat-V_A {:.1e}",
            worst[0], worst[1], worst[2], worst[3], worst[4]
        ),
    )
}

fn random_measurements(rng: &mut ChaCha8Rng) -> Vec<(Vec3, [f64; 2])> {
    let n = rng.random_range(3..7);
    (0..n)
        .map(|_| {
            (
                random_unit_vector(rng) * rng.random_range(0.5..2.0),
                [rng.random_range(0.3..3.0), rng.random_range(0.3..3.0)],
            )
        })
        .collect()
}

/// Measurement-path vs matrix-path: returns the worst relative discrepancy.
pub fn dual_path_discrepancy(
    refs: &[(Vec3, [f64; 2])],
    cfg: &ControllerConfig,
    r: &Rotation,
    y: [&Rotation; 2],
    logic: LogicState,
) -> f64 {
    let ms = MeasurementSet::from_attitude(refs, r).expect("valid references");
    let mut worst = 0f64;
    let mut note = |a: f64, b: f64| worst = worst.max((a - b).abs() / (1.0 + b.abs()));
    let x = [*r * y[0].transpose(), *r * y[1].transpose()];
    for h in 1..=2 {
        let wp = cfg.potential(h);
        let yy = y[h - 1];
        let xx = &x[h - 1];
        note(controller::va_from_measurements(&ms, h, yy), v_a(wp.weight(), xx));
        let pm = controller::psi_from_measurements(&ms, h, yy);
        let pa = psi_ar(wp.weight(), xx);
        for i in 0..3 {
            note(pm[i], pa[i]);
        }
        for q in wp.indices() {
            let t = controller::warp_terms(&ms, h, yy, wp, q);
            note(t.value, wp.value(xx, q));
            let pg = wp.psi_gamma(xx, q);
            for i in 0..3 {
                note(t.psi_gamma[i], pg[i]);
            }
        }
    }
    let tm = controller::torque(&ms, cfg, logic, y[0], y[1]);
    let ta = matrix_path::torque(cfg, logic, [&x[0], &x[1]], y);
    let bm = controller::beta(&ms, cfg, logic, y[0]);
    let ba = matrix_path::beta(cfg, logic, &x[0], y[0]);
    for i in 0..3 {
        note(tm[i], ta[i]);
        note(bm[i], ba[i]);
    }
    worst
}

fn config_for(refs: &[(Vec3, [f64; 2])], rng: &mut ChaCha8Rng) -> Option<ControllerConfig> {
    let ms = MeasurementSet::from_attitude(refs, &Rotation::IDENTITY).ok()?;
    let mut wps = Vec::new();
    for h in 1..=2 {
        let w = WeightMatrix::new(ms.build_a(h).ok()?).ok()?;
        let u = warping::optimal_u(&w)
            .map(|o| o.u)
            .unwrap_or_else(|_| random_unit_vector(rng));
        let k = 0.9 * warping::k_bound(&w);
        wps.push(WarpedPotential::with_policy(w, u, vec![k, -k], GainPolicy::Strict).ok()?);
    }
    let wp2 = wps.pop()?;
    let wp1 = wps.pop()?;
    ControllerConfig::new_unchecked(wp1, wp2, [0.1, 0.1]).ok()
}

fn dual_path(seed: u64, poses: usize, random_sets: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xD0A1);
    let mut sets = vec![vec![
        (Vec3::E1, [1.0, 0.1]),
        (Vec3::E2, [3.0, 0.3]),
        (Vec3::E3, [5.0, 0.5]),
    ]];
    while sets.len() < 1 + random_sets {
        let s = random_measurements(&mut rng);
        if MeasurementSet::from_attitude(&s, &Rotation::IDENTITY).is_ok_and(|m| m.spans()) {
            sets.push(s);
        }
    }
    let mut worst = 0f64;
    let mut count = 0;
    for refs in &sets {
        let Some(cfg) = config_for(refs, &mut rng) else {
            return (false, "could not build a controller for a random set".into());
        };
        for _ in 0..poses {
            let r = random_rotation(&mut rng);
            let y1 = random_rotation(&mut rng);
            let y2 = random_rotation(&mut rng);
            let logic = LogicState {
                q: [rng.random_range(1..3), rng.random_range(1..3)],
            };
            worst = worst.max(dual_path_discrepancy(refs, &cfg, &r, [&y1, &y2], logic));
            count += 1;
        }
    }
    (worst < 1e-10, format!("{count} poses over {} sets; worst {worst:.2e}", sets.len()))
}

fn gradient_fd(seed: u64, n: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6AD);
    let h = 1e-6;
    let (mut worst_v, mut worst_u) = (0f64, 0f64);
    for _ in 0..n {
        let wp = random_feasible(&mut rng);
        let r = random_rotation(&mut rng);
        let xi = Vec3::basis(rng.random_range(0..3));
        let step = |s: f64| r * Rotation::exp(xi * s);
        let fd = (v_a(wp.weight(), &step(h)) - v_a(wp.weight(), &step(-h))) / (2.0 * h);
        let an = 2.0 * psi_ar(wp.weight(), &r).dot(xi);
        worst_v = worst_v.max((fd - an).abs() / an.abs().max(1e-2));
        let q = rng.random_range(1..3);
        let fd = (wp.value(&step(h), q) - wp.value(&step(-h), q)) / (2.0 * h);
        let an = wp.body_gradient(&r, q).dot(xi);
        worst_u = worst_u.max((fd - an).abs() / an.abs().max(1e-2));
    }
    (
        worst_v < 1e-5 && worst_u < 1e-5,
        format!("{n} samples; V_A {worst_v:.2e}, U {worst_u:.2e}"),
    )
}

fn critical_points(seed: u64, n: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC217);
    let (mut worst_psi, mut worst_v, mut worst_u) = (0f64, 0f64, 0f64);
    for _ in 0..n {
        let wp = random_feasible(&mut rng);
        let Ok(pts) = wp.critical_points() else {
            return (false, "critical_points failed on a feasible design".into());
        };
        for p in pts {
            worst_psi = worst_psi.max(wp.psi_gamma(&p.rotation, p.q).norm());
            worst_v = worst_v.max((v_a(wp.weight(), &p.rotation) - p.v_bar).abs());
            worst_u = worst_u.max((wp.value(&p.rotation, p.q) - p.u_value).abs());
        }
    }
    (
        worst_psi < 1e-9 && worst_v < 1e-9 && worst_u < 1e-9,
        format!("{n} designs; ‖ψ(AΓ)‖ {worst_psi:.1e}, V̄ {worst_v:.1e}, U {worst_u:.1e}"),
    )
}

fn gap_brute_force(seed: u64, n: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6A9);
    let mut worst = 0f64;
    for _ in 0..n {
        let wp = random_feasible(&mut rng);
        let (Ok(gap), Ok(pts)) = (wp.gap(), wp.critical_points()) else {
            return (false, "gap or critical points failed on a feasible design".into());
        };
        let brute = pts
            .iter()
            .map(|p| wp.mu(&p.rotation, p.q))
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((gap - brute).abs());
    }
    (worst < 1e-9, format!("{n} designs; worst |gap − min μ| {worst:.2e}"))
}

/// `N` nearly uniform points on the unit sphere.
pub fn fibonacci_sphere(n: usize) -> impl IndexedParallelIterator<Item = Vec3> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n).into_par_iter().map(move |i| {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * i as f64;
        Vec3::new(r * phi.cos(), r * phi.sin(), z)
    })
}

/// `min_v Δ(v, u)` through `Δ(v,u) = vᵀWv − (v×u)ᵀW(v×u)`, with the
/// worst in-plane direction for a repeated eigenvalue.
pub fn min_delta_direct(w: &WeightMatrix, u: Vec3) -> f64 {
    let wm = w.w();
    let d = |v: Vec3| {
        let c = v.cross(u);
        v.dot(wm * v) - c.dot(wm * c)
    };
    let v = w.eigvecs();
    match (w.class(), w.simple_index()) {
        (SpectrumClass::ThreeDistinct, _) => d(v[0]).min(d(v[1])).min(d(v[2])),
        (SpectrumClass::TwoDistinct, Some(s)) => {
            let vs = v[s];
            let along = u - vs * u.dot(vs);
            let worst = match along.try_normalize().filter(|_| along.norm() > 1e-12) {
                Some(a) => vs.cross(a),
                None => v[(s + 1) % 3],
            };
            d(vs).min(d(worst))
        }
        _ => f64::NEG_INFINITY,
    }
}

fn sphere_grid(seed: u64, points: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5F4);
    let mut weights: Vec<WeightMatrix> = (0..10).map(|_| random_three_distinct(&mut rng)).collect();
    weights.extend((0..5).map(|_| random_two_distinct(&mut rng)));
    let mut worst = f64::NEG_INFINITY;
    for w in &weights {
        let Ok(opt) = warping::optimal_u(w) else {
            return (false, "optimal_u failed on a non-isotropic weight".into());
        };
        let closed = min_delta_direct(w, opt.u);
        let grid = fibonacci_sphere(points)
            .map(|u| min_delta_direct(w, u))
            .reduce(|| f64::NEG_INFINITY, f64::max);
        worst = worst.max(grid - closed);
    }
    (
        worst <= 1e-3,
        format!("{} weights × {points} points; max(grid − closed form) {worst:.2e}", weights.len()),
    )
}

fn det_theta(seed: u64, gain_factor: f64, n: usize) -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDE7);
    let w = WeightMatrix::diag([1.0, 3.0, 5.0]).expect("valid weight");
    let u = warping::optimal_u(&w).expect("feasible").u;
    let k = gain_factor * warping::k_bound(&w);
    let wp = match WarpedPotential::symmetric(w.clone(), u, k) {
        Ok(wp) => wp,
        Err(Error::InvalidGain(msg)) => {
            let probe = WarpedPotential::with_policy(w, u, vec![k, -k], GainPolicy::ArcsinDomain);
            let extra = match probe {
                Ok(p) => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xDE7);
                    let m = (0..n)
                        .map(|_| {
                            let r = random_rotation(&mut rng);
                            p.big_theta(&r, 1).det().abs()
                        })
                        .fold(f64::INFINITY, f64::min);
                    format!("; sampled min |det Θ| = {m:.3e}")
                }
                Err(e) => format!("; {e}"),
            };
            return (false, format!("precondition failed: {msg}{extra}"));
        }
        Err(e) => return (false, e.to_string()),
    };
    let (mut min_det, mut worst_id) = (f64::INFINITY, 0f64);
    for _ in 0..n {
        let r = random_rotation(&mut rng);
        for q in [1, 2] {
            let d = wp.big_theta(&r, q).det();
            min_det = min_det.min(d.abs());
            worst_id = worst_id.max((d - wp.det_theta_identity(&r, q)).abs());
        }
    }
    (
        min_det > 0.0 && worst_id < 1e-10,
        format!("{n} rotations at {gain_factor}·k̄; min |det Θ| {min_det:.3e}, identity {worst_id:.1e}"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quick_suites_pass() {
        for r in run_all(Level::Quick, 0.99, 1) {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn gain_above_bound_is_flagged() {
        let (ok, detail) = det_theta(1, 1.5, 1000);
        assert!(!ok);
        assert!(detail.contains("precondition"), "{detail}");
    }

    #[test]
    fn fibonacci_points_are_unit() {
        let pts: Vec<Vec3> = fibonacci_sphere(100).collect();
        assert!(pts.iter().all(|p| (p.norm() - 1.0).abs() < 1e-12));
    }
}
