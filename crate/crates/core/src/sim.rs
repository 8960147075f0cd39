//! Closed-loop hybrid simulation: rigid-body attitude dynamics, the
//! auxiliary attitude `R̂`, and either the hybrid or the smooth feedback.
//!
//! Flows use a fixed-step classical Runge–Kutta scheme on the embedded
//! coordinates `(R, ω, R̂) ∈ ℝ⁹ × ℝ³ × ℝ⁹`, with both attitudes projected back
//! onto SO(3) after every step. Jump-set membership is tested at every step
//! boundary and takes priority over flowing.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::controller::{
    self, mu_in_jump_set, ControllerConfig, HybridEval, LogicState, MeasurementSet,
};
use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::so3::{hat, project_so3, Mat3, Rotation, Vec3};

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_MAX_JUMPS: u64 = 100;
pub const DEFAULT_MAX_STEPS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlantState {
    pub r: Rotation,
    pub omega: Vec3,
    pub r_hat: Rotation,
}

#[derive(Clone, Debug)]
pub enum ControlMode {
    Hybrid(ControllerConfig),
    Smooth,
    /// Zero torque and zero `β`.
    Free,
}

impl ControlMode {
    pub fn name(&self) -> &'static str {
        match self {
            ControlMode::Hybrid(_) => "hybrid",
            ControlMode::Smooth => "smooth",
            ControlMode::Free => "free",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    /// Inertia `J`, symmetric positive definite.
    pub inertia: Mat3,
    /// References and weights; observations are regenerated every stage.
    pub measurements: MeasurementSet,
    pub mode: ControlMode,
    pub init: PlantState,
    pub q0: LogicState,
    pub r_d: Rotation,
    pub dt: f64,
    pub t_end: f64,
    pub max_jumps: u64,
    pub max_steps: u64,
    pub noise_std: f64,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let j = &self.inertia;
        if !j.is_finite() || (*j - j.transpose()).frobenius_norm() > 1e-12 * (1.0 + j.frobenius_norm()) {
            return Err(Error::Precondition("inertia must be symmetric".into()));
        }
        if eigenvalues(j)[0] <= 0.0 {
            return Err(Error::Precondition("inertia must be positive definite".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Precondition(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_end >= 0.0 && self.t_end.is_finite()) {
            return Err(Error::Precondition(format!("t_end = {} must be non-negative", self.t_end)));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Precondition("noise_std must be non-negative".into()));
        }
        if !self.init.omega.is_finite() {
            return Err(Error::Precondition("initial angular velocity is not finite".into()));
        }
        for h in 1..=2 {
            self.measurements.build_a(h)?;
        }
        if let ControlMode::Hybrid(cfg) = &self.mode {
            cfg.check_consistent(&self.measurements)?;
            for (h, &q) in self.q0.q.iter().enumerate() {
                if !(1..=cfg.potential(h + 1).gains().len()).contains(&q) {
                    return Err(Error::Precondition(format!("q{}(0) = {q} is not a valid index", h + 1)));
                }
            }
        }
        if self.steps() > self.max_steps {
            return Err(Error::ZenoGuard(format!(
                "{} steps requested, the limit is {}",
                self.steps(),
                self.max_steps
            )));
        }
        Ok(())
    }

    /// Number of flow steps to reach `t_end`.
    pub fn steps(&self) -> u64 {
        let n = self.t_end / self.dt;
        // absorb rounding of t_end / dt just above an integer
        let r = n.round();
        if (n - r).abs() < 1e-9 * n.max(1.0) {
            r as u64
        } else {
            n.ceil() as u64
        }
    }
}

/// One logged sample of the hybrid arc.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Record {
    pub t: f64,
    pub j: u64,
    pub q: [usize; 2],
    /// `e(X₁)`, `e(X₂)`.
    pub e: [f64; 2],
    pub omega: Vec3,
    pub tau: Vec3,
    /// Lyapunov value.
    pub v: f64,
    /// `U_h(X_h, q_h)`; for the smooth law, `V_{A_h}(X_h)`.
    pub u: [f64; 2],
    pub mu: [f64; 2],
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryLog {
    pub records: Vec<Record>,
}

impl TrajectoryLog {
    pub fn jumps(&self) -> u64 {
        self.records.last().map_or(0, |r| r.j)
    }

    /// Times at which a jump was logged.
    pub fn jump_times(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .filter(|w| w[1].j > w[0].j)
            .map(|w| w[1].t)
            .collect()
    }

    /// First logged time at which `e(X_h) < threshold`.
    pub fn time_below(&self, h: usize, threshold: f64) -> Option<f64> {
        self.records.iter().find(|r| r.e[h - 1] < threshold).map(|r| r.t)
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    /// Last record at or before `t`.
    pub fn at(&self, t: f64) -> Option<&Record> {
        self.records.iter().take_while(|r| r.t <= t + 1e-12).last()
    }
}

/// `e(X) = ‖I − X‖_F / √8`.
pub fn error_metric(x: &Rotation) -> f64 {
    (Mat3::IDENTITY - *x.matrix()).frobenius_norm() / 8f64.sqrt()
}

/// Controller output plus the diagnostics logged with it.
struct Sample {
    tau: Vec3,
    beta: Vec3,
    u: [f64; 2],
    mu: [f64; 2],
    target: LogicState,
}

fn control(
    cfg: &SimConfig,
    r: &Rotation,
    r_hat: &Rotation,
    logic: LogicState,
    noise: &[Vec3],
) -> Sample {
    let ms = cfg.measurements.observe_perturbed(r, noise);
    match &cfg.mode {
        ControlMode::Hybrid(c) => {
            let HybridEval { channels, tau, beta } = controller::evaluate(&ms, c, logic, r_hat, &cfg.r_d);
            Sample {
                tau,
                beta,
                u: [channels[0].value(logic.q[0]), channels[1].value(logic.q[1])],
                mu: [channels[0].mu, channels[1].mu],
                target: LogicState {
                    q: [channels[0].argmin, channels[1].argmin],
                },
            }
        }
        ControlMode::Smooth => Sample {
            tau: controller::smooth_torque(&ms, r_hat, &cfg.r_d),
            beta: controller::smooth_beta(&ms, r_hat),
            u: [
                controller::va_from_measurements(&ms, 1, r_hat),
                controller::va_from_measurements(&ms, 2, &cfg.r_d),
            ],
            mu: [0.0, 0.0],
            target: logic,
        },
        ControlMode::Free => Sample {
            tau: Vec3::ZERO,
            beta: Vec3::ZERO,
            u: [
                controller::va_from_measurements(&ms, 1, r_hat),
                controller::va_from_measurements(&ms, 2, &cfg.r_d),
            ],
            mu: [0.0, 0.0],
            target: logic,
        },
    }
}

/// `Σ_h U_h(X_h, q_h) + ½ ωᵀJω` (with `V_{A_h}` for the smooth law).
pub fn lyapunov(cfg: &SimConfig, state: &PlantState, logic: LogicState) -> f64 {
    let s = control(cfg, &state.r, &state.r_hat, logic, &[]);
    s.u[0] + s.u[1] + 0.5 * state.omega.dot(cfg.inertia * state.omega)
}

#[derive(Clone, Copy)]
struct Deriv {
    r: Mat3,
    omega: Vec3,
    r_hat: Mat3,
}

fn derivative(
    cfg: &SimConfig,
    j_inv: &Mat3,
    r: &Mat3,
    omega: Vec3,
    r_hat: &Mat3,
    logic: LogicState,
    noise: &[Vec3],
) -> Deriv {
    // stage points leave SO(3) by O(dt⁵); the feedback formulas tolerate that
    let rr = Rotation::from_matrix_unchecked(*r);
    let rh = Rotation::from_matrix_unchecked(*r_hat);
    let s = control(cfg, &rr, &rh, logic, noise);
    let jw = cfg.inertia * omega;
    Deriv {
        r: *r * hat(omega),
        omega: *j_inv * (jw.cross(omega) + s.tau),
        r_hat: *r_hat * hat(s.beta),
    }
}

/// One Runge–Kutta step of the flow with the logic state held fixed.
pub fn flow_step(
    cfg: &SimConfig,
    state: &PlantState,
    logic: LogicState,
    dt: f64,
    noise: &[Vec3],
) -> Result<PlantState> {
    let j_inv = cfg
        .inertia
        .inverse()
        .ok_or_else(|| Error::Precondition("inertia is singular".into()))?;
    let (r0, w0, h0) = (*state.r.matrix(), state.omega, *state.r_hat.matrix());
    let f = |r: &Mat3, w: Vec3, h: &Mat3| derivative(cfg, &j_inv, r, w, h, logic, noise);
    let k1 = f(&r0, w0, &h0);
    let k2 = f(&(r0 + k1.r * (dt / 2.0)), w0 + k1.omega * (dt / 2.0), &(h0 + k1.r_hat * (dt / 2.0)));
    let k3 = f(&(r0 + k2.r * (dt / 2.0)), w0 + k2.omega * (dt / 2.0), &(h0 + k2.r_hat * (dt / 2.0)));
    let k4 = f(&(r0 + k3.r * dt), w0 + k3.omega * dt, &(h0 + k3.r_hat * dt));
    let c = dt / 6.0;
    let r = r0 + (k1.r + k2.r * 2.0 + k3.r * 2.0 + k4.r) * c;
    let omega = w0 + (k1.omega + k2.omega * 2.0 + k3.omega * 2.0 + k4.omega) * c;
    let r_hat = h0 + (k1.r_hat + k2.r_hat * 2.0 + k3.r_hat * 2.0 + k4.r_hat) * c;
    if !(r.is_finite() && omega.is_finite() && r_hat.is_finite()) {
        return Err(Error::Precondition("state diverged to a non-finite value".into()));
    }
    Ok(PlantState {
        r: project_so3(&r)?,
        omega,
        r_hat: project_so3(&r_hat)?,
    })
}

/// Runs the hybrid arc from `cfg.init` until `t_end`.
pub fn run(cfg: &SimConfig) -> Result<TrajectoryLog> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n_steps = cfg.steps();
    let mut state = cfg.init;
    let mut logic = cfg.q0;
    let (mut step, mut j) = (0u64, 0u64);
    let mut log = TrajectoryLog::default();
    let delta = match &cfg.mode {
        ControlMode::Hybrid(c) => Some(c.delta()),
        ControlMode::Smooth | ControlMode::Free => None,
    };
    let ke = |s: &PlantState| 0.5 * s.omega.dot(cfg.inertia * s.omega);
    let mut noise = cfg.measurements.sample_noise(cfg.noise_std, &mut rng);
    loop {
        let t = step as f64 * cfg.dt;
        let s = control(cfg, &state.r, &state.r_hat, logic, &noise);
        let x1 = state.r * state.r_hat.transpose();
        let x2 = state.r * cfg.r_d.transpose();
        log.records.push(Record {
            t,
            j,
            q: logic.q,
            e: [error_metric(&x1), error_metric(&x2)],
            omega: state.omega,
            tau: s.tau,
            v: s.u[0] + s.u[1] + ke(&state),
            u: s.u,
            mu: s.mu,
        });
        if let Some(d) = delta {
            if mu_in_jump_set(s.mu, d) {
                if j >= cfg.max_jumps {
                    return Err(Error::ZenoGuard(format!(
                        "more than {} jumps by t = {t}",
                        cfg.max_jumps
                    )));
                }
                logic = s.target;
                j += 1;
                continue;
            }
        }
        if step >= n_steps {
            break;
        }
        state = flow_step(cfg, &state, logic, cfg.dt, &noise)?;
        step += 1;
        if cfg.noise_std > 0.0 {
            noise = cfg.measurements.sample_noise(cfg.noise_std, &mut rng);
        }
    }
    Ok(log)
}

/// Runs independent configurations in parallel, preserving order.
pub fn run_batch(cfgs: &[SimConfig]) -> Vec<Result<TrajectoryLog>> {
    cfgs.par_iter().map(run).collect()
}

/// `exp((π + ε) cos(ε/2) [e₁]×)`: a start near the half turn about `e₁`
/// that approaches it as `ε → 0` and reaches the identity at `ε = π`.
pub fn near_half_turn(eps: f64) -> Rotation {
    Rotation::exp(Vec3::E1 * ((PI + eps) * (eps / 2.0).cos()))
}

/// One run per `ε` from [`near_half_turn`], each with its own noise stream.
pub fn sweep_epsilon(cfg: &SimConfig, eps: &[f64]) -> Result<Vec<TrajectoryLog>> {
    let cfgs: Vec<SimConfig> = eps
        .iter()
        .enumerate()
        .map(|(i, &e)| {
            let mut c = cfg.clone();
            c.init.r = near_half_turn(e);
            c.seed = derive_seed(cfg.seed, i as u64);
            c
        })
        .collect();
    run_batch(&cfgs).into_iter().collect()
}

/// Per-run seed for batch member `i`.
pub fn derive_seed(master: u64, i: u64) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(i + 1);
    rng.next_u64()
}
