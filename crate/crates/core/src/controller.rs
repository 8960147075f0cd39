//! Velocity-free hybrid attitude feedback computed from body-frame vector
//! measurements, plus the smooth baseline it is compared against.
//!
//! Channel `h = 1` compares the body with the auxiliary attitude `Y₁ = R̂`,
//! channel `h = 2` with the desired attitude `Y₂ = R_d`. Nothing in the
//! measurement path reads the true attitude `R` or the angular velocity.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::eigen::eigenvalues;
use crate::error::{Error, Result};
use crate::so3::{rot_axis, Mat3, Rotation, Vec3};
use crate::warping::WarpedPotential;

/// Weight given to a cross-product measurement added by [`MeasurementSet::augment`]
/// when none is specified.
pub const DEFAULT_AUGMENT_RHO: [f64; 2] = [1.0, 1.0];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    /// Inertial reference direction.
    pub r: Vec3,
    /// The same direction observed in the body frame.
    pub b: Vec3,
    /// `[ρ_i1, ρ_i2]`.
    pub rho: [f64; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Source {
    Sensor,
    Cross(usize, usize),
}

/// Reference/observation pairs with per-channel weights.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementSet {
    entries: Vec<Measurement>,
    sources: Vec<Source>,
}

fn channel_index(h: usize) -> usize {
    assert!(h == 1 || h == 2, "channel index {h} is not 1 or 2");
    h - 1
}

impl MeasurementSet {
    pub fn new(entries: Vec<Measurement>) -> Result<Self> {
        if entries.len() < 2 {
            return Err(Error::Measurement(format!(
                "need at least two vectors, got {}",
                entries.len()
            )));
        }
        for (i, m) in entries.iter().enumerate() {
            if !(m.r.is_finite() && m.b.is_finite()) {
                return Err(Error::Measurement(format!("entry {} is not finite", i + 1)));
            }
            if m.r.norm() == 0.0 {
                return Err(Error::Measurement(format!("reference {} is zero", i + 1)));
            }
            if !m.rho.iter().all(|&p| p > 0.0 && p.is_finite()) {
                return Err(Error::Measurement(format!(
                    "weights of entry {} must be positive",
                    i + 1
                )));
            }
        }
        let sources = vec![Source::Sensor; entries.len()];
        Ok(Self { entries, sources })
    }

    /// References with their weights and body observations `b_i = Rᵀ r_i`.
    pub fn from_attitude(refs: &[(Vec3, [f64; 2])], r: &Rotation) -> Result<Self> {
        let rt = r.transpose();
        Self::new(
            refs.iter()
                .map(|&(rv, rho)| Measurement { r: rv, b: rt * rv, rho })
                .collect(),
        )
    }

    pub fn entries(&self) -> &[Measurement] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether entry `i` was synthesized from a cross product.
    pub fn is_derived(&self, i: usize) -> bool {
        matches!(self.sources[i], Source::Cross(..))
    }

    /// True when the references span ℝ³, so every `A_h` is positive definite.
    pub fn spans(&self) -> bool {
        let s = self
            .entries
            .iter()
            .fold(Mat3::ZERO, |acc, m| acc + m.r.outer(m.r));
        let ev = eigenvalues(&s);
        ev[0] > 1e-10 * ev[2]
    }

    /// Adds `r = r_i × r_j`, `b = b_i × b_j` (normalized) for the first
    /// non-collinear pair when the references do not span ℝ³.
    pub fn augment(&self, rho: [f64; 2]) -> Result<Self> {
        if self.spans() {
            return Ok(self.clone());
        }
        if !rho.iter().all(|&p| p > 0.0 && p.is_finite()) {
            return Err(Error::Measurement("augmentation weights must be positive".into()));
        }
        let n = self.entries.len();
        for i in 0..n {
            for j in i + 1..n {
                let (ri, rj) = (self.entries[i].r, self.entries[j].r);
                let c = ri.cross(rj);
                if c.norm() > 1e-9 * ri.norm() * rj.norm() {
                    let b = self.entries[i].b.cross(self.entries[j].b);
                    let b = b.try_normalize().ok_or_else(|| {
                        Error::Measurement(format!(
                            "observations {} and {} are collinear while their references are not",
                            i + 1,
                            j + 1
                        ))
                    })?;
                    let mut out = self.clone();
                    out.entries.push(Measurement {
                        r: c * (1.0 / c.norm()),
                        b,
                        rho,
                    });
                    out.sources.push(Source::Cross(i, j));
                    return Ok(out);
                }
            }
        }
        Err(Error::Measurement("all reference vectors are collinear".into()))
    }

    /// Same references and weights, observations regenerated from attitude `r`.
    /// Cross-product entries are rebuilt from their parents' observations.
    pub fn observe(&self, r: &Rotation) -> Self {
        let rt = r.transpose();
        self.rebuild(|m| rt * m.r)
    }

    /// One i.i.d. zero-mean Gaussian draw per entry, standard deviation `std`.
    pub fn sample_noise<R: Rng + ?Sized>(&self, std: f64, rng: &mut R) -> Vec<Vec3> {
        match Normal::new(0.0, std) {
            Ok(normal) if std > 0.0 => (0..self.entries.len())
                .map(|_| Vec3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng)))
                .collect(),
            _ => vec![Vec3::ZERO; self.entries.len()],
        }
    }

    /// As [`observe`](Self::observe), with `noise[i]` added to each sensor
    /// observation before renormalizing it to the length of its reference.
    pub fn observe_perturbed(&self, r: &Rotation, noise: &[Vec3]) -> Self {
        let rt = r.transpose();
        let mut i = 0;
        self.rebuild(|m| {
            let clean = rt * m.r;
            let n = noise.get(i).copied().unwrap_or(Vec3::ZERO);
            i += 1;
            if n == Vec3::ZERO {
                return clean;
            }
            (clean + n)
                .try_normalize()
                .map(|v| v * m.r.norm())
                .unwrap_or(clean)
        })
    }

    pub fn observe_noisy<R: Rng + ?Sized>(&self, r: &Rotation, std: f64, rng: &mut R) -> Self {
        let noise = self.sample_noise(std, rng);
        self.observe_perturbed(r, &noise)
    }

    // sensor entries are visited in order, so `sense` may index by call count
    fn rebuild(&self, mut sense: impl FnMut(&Measurement) -> Vec3) -> Self {
        let mut out = self.clone();
        for i in 0..out.entries.len() {
            out.entries[i].b = match out.sources[i] {
                Source::Sensor => sense(&out.entries[i]),
                Source::Cross(a, c) => {
                    let b = out.entries[a].b.cross(out.entries[c].b);
                    b.try_normalize().unwrap_or(b)
                }
            };
        }
        out
    }

    /// `A_h = Σᵢ ρ_ih r_i r_iᵀ`.
    pub fn build_a(&self, h: usize) -> Result<Mat3> {
        let c = channel_index(h);
        let a = self
            .entries
            .iter()
            .fold(Mat3::ZERO, |acc, m| acc + m.r.outer(m.r) * m.rho[c]);
        let ev = eigenvalues(&a);
        if ev[0] <= 1e-10 * ev[2] {
            return Err(Error::Measurement(format!(
                "A_{h} is singular (smallest eigenvalue {}); references must span ℝ³",
                ev[0]
            )));
        }
        Ok(a)
    }
}

/// `V_{A_h}(X_h) = ½ Σ ρ_ih ‖b_i − Y_hᵀ r_i‖²`.
pub fn va_from_measurements(ms: &MeasurementSet, h: usize, y: &Rotation) -> f64 {
    let c = channel_index(h);
    let yt = y.transpose();
    0.5 * ms
        .entries
        .iter()
        .map(|m| m.rho[c] * (m.b - yt * m.r).norm_squared())
        .sum::<f64>()
}

/// `ψ(A_h X_h) = ½ Y_h Σ ρ_ih (b_i × Y_hᵀ r_i)`.
pub fn psi_from_measurements(ms: &MeasurementSet, h: usize, y: &Rotation) -> Vec3 {
    let c = channel_index(h);
    let yt = y.transpose();
    let s = ms
        .entries
        .iter()
        .fold(Vec3::ZERO, |acc, m| acc + m.b.cross(yt * m.r) * m.rho[c]);
    (*y * s) * 0.5
}

/// Warped quantities of one channel and index, from measurements only.
#[derive(Clone, Copy, Debug)]
pub struct WarpTerms {
    pub theta: f64,
    /// `U_h(X_h, q)`.
    pub value: f64,
    /// `ψ(A_h Γ_h(X_h, q))`.
    pub psi_gamma: Vec3,
    /// `Θ_h(X_h, q)`.
    pub big_theta: Mat3,
}

pub fn warp_terms(
    ms: &MeasurementSet,
    h: usize,
    y: &Rotation,
    wp: &WarpedPotential,
    q: usize,
) -> WarpTerms {
    let c = channel_index(h);
    let k = wp.gain(q);
    let u = wp.axis();
    let v = va_from_measurements(ms, h, y);
    let theta = 2.0 * (k * v).asin();
    let ra = rot_axis(theta, u);
    let yt = y.transpose();
    let (mut value, mut cross) = (0.0, Vec3::ZERO);
    for m in &ms.entries {
        let bh = yt * (ra * m.r);
        value += m.rho[c] * (m.b - bh).norm_squared();
        cross += m.b.cross(bh) * m.rho[c];
    }
    let psi_gamma = ra.transpose() * (*y * cross) * 0.5;
    let psi_x = psi_from_measurements(ms, h, y);
    let big_theta = ra.matrix().transpose() + u.outer(psi_x) * (4.0 * k / (1.0 - k * k * v * v).sqrt());
    WarpTerms {
        theta,
        value: 0.5 * value,
        psi_gamma,
        big_theta,
    }
}

pub fn u_h_from_measurements(
    ms: &MeasurementSet,
    h: usize,
    y: &Rotation,
    wp: &WarpedPotential,
    q: usize,
) -> f64 {
    warp_terms(ms, h, y, wp, q).value
}

pub fn psi_gamma_from_measurements(
    ms: &MeasurementSet,
    h: usize,
    y: &Rotation,
    wp: &WarpedPotential,
    q: usize,
) -> Vec3 {
    warp_terms(ms, h, y, wp, q).psi_gamma
}

/// Warped potentials and hysteresis thresholds of both channels.
#[derive(Clone, Debug)]
pub struct ControllerConfig {
    wp: [WarpedPotential; 2],
    delta: [f64; 2],
}

impl ControllerConfig {
    /// Requires `0 < δ_h < δ̄_h` for both channels.
    pub fn new(wp1: WarpedPotential, wp2: WarpedPotential, delta: [f64; 2]) -> Result<Self> {
        for (i, wp) in [&wp1, &wp2].into_iter().enumerate() {
            let gap = wp.gap()?;
            if !(delta[i] > 0.0 && delta[i] < gap) {
                return Err(Error::Precondition(format!(
                    "δ_{} = {} must lie in (0, {gap})",
                    i + 1,
                    delta[i]
                )));
            }
        }
        Ok(Self { wp: [wp1, wp2], delta })
    }

    /// Requires only `δ_h > 0`.
    pub fn new_unchecked(wp1: WarpedPotential, wp2: WarpedPotential, delta: [f64; 2]) -> Result<Self> {
        if !delta.iter().all(|&d| d > 0.0 && d.is_finite()) {
            return Err(Error::Precondition("hysteresis thresholds must be positive".into()));
        }
        Ok(Self { wp: [wp1, wp2], delta })
    }

    pub fn potential(&self, h: usize) -> &WarpedPotential {
        &self.wp[channel_index(h)]
    }

    pub fn delta(&self) -> [f64; 2] {
        self.delta
    }

    /// Checks that each `A_h` built from `ms` matches the weight of `wp_h`.
    pub fn check_consistent(&self, ms: &MeasurementSet) -> Result<()> {
        for h in 1..=2 {
            let a = ms.build_a(h)?;
            let w = self.potential(h).weight().a();
            let err = (a - *w).frobenius_norm();
            if err > 1e-9 * (1.0 + w.frobenius_norm()) {
                return Err(Error::Precondition(format!(
                    "A_{h} from the measurement weights differs from the configured weight by {err:e}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct LogicState {
    pub q: [usize; 2],
}

impl Default for LogicState {
    fn default() -> Self {
        Self { q: [1, 1] }
    }
}

/// Everything the controller knows about one channel at one instant.
#[derive(Clone, Debug)]
pub struct ChannelEval {
    /// `U_h(X_h, p)` for `p = 1, …`.
    pub values: Vec<f64>,
    /// Minimizing index, lowest on ties.
    pub argmin: usize,
    /// `μ_h(X_h, q_h)`.
    pub mu: f64,
    /// `Y_hᵀ Θ_hᵀ ψ(A_h Γ_h)` at the current index.
    pub drive: Vec3,
}

impl ChannelEval {
    pub fn value(&self, q: usize) -> f64 {
        self.values[q - 1]
    }
}

pub fn evaluate_channel(
    ms: &MeasurementSet,
    cfg: &ControllerConfig,
    h: usize,
    y: &Rotation,
    q: usize,
) -> ChannelEval {
    let wp = cfg.potential(h);
    let mut values = Vec::with_capacity(wp.gains().len());
    let mut drive = Vec3::ZERO;
    for p in wp.indices() {
        let t = warp_terms(ms, h, y, wp, p);
        values.push(t.value);
        if p == q {
            drive = y.transpose() * (t.big_theta.transpose() * t.psi_gamma);
        }
    }
    let (argmin, min) = argmin(&values);
    ChannelEval {
        mu: values[q - 1] - min,
        values,
        argmin,
        drive,
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, &v)| if v < best.1 { (i + 1, v) } else { best })
}

/// Full controller output at one instant.
#[derive(Clone, Debug)]
pub struct HybridEval {
    pub channels: [ChannelEval; 2],
    pub tau: Vec3,
    pub beta: Vec3,
}

impl HybridEval {
    pub fn mu(&self) -> [f64; 2] {
        [self.channels[0].mu, self.channels[1].mu]
    }

    /// Logic state the jump map would select.
    pub fn jump_target(&self) -> LogicState {
        LogicState {
            q: [self.channels[0].argmin, self.channels[1].argmin],
        }
    }
}

pub fn evaluate(
    ms: &MeasurementSet,
    cfg: &ControllerConfig,
    logic: LogicState,
    y1: &Rotation,
    y2: &Rotation,
) -> HybridEval {
    let c1 = evaluate_channel(ms, cfg, 1, y1, logic.q[0]);
    let c2 = evaluate_channel(ms, cfg, 2, y2, logic.q[1]);
    let tau = -(c1.drive + c2.drive) * 2.0;
    let beta = c1.drive;
    HybridEval {
        channels: [c1, c2],
        tau,
        beta,
    }
}

/// `τ = −2 Σ_h Y_hᵀ Θ_hᵀ ψ(A_h Γ_h)`.
pub fn torque(
    ms: &MeasurementSet,
    cfg: &ControllerConfig,
    logic: LogicState,
    y1: &Rotation,
    y2: &Rotation,
) -> Vec3 {
    evaluate(ms, cfg, logic, y1, y2).tau
}

/// `β = Y₁ᵀ Θ₁ᵀ ψ(A₁ Γ₁)`.
pub fn beta(ms: &MeasurementSet, cfg: &ControllerConfig, logic: LogicState, y1: &Rotation) -> Vec3 {
    evaluate_channel(ms, cfg, 1, y1, logic.q[0]).drive
}

/// `q⁺ = g(X)`: per channel, the index minimizing `U_h(X_h, ·)`.
pub fn jump_map_g(
    cfg: &ControllerConfig,
    ms: &MeasurementSet,
    y1: &Rotation,
    y2: &Rotation,
) -> LogicState {
    let pick = |h: usize, y: &Rotation| {
        let wp = cfg.potential(h);
        let values: Vec<f64> = wp.indices().map(|p| u_h_from_measurements(ms, h, y, wp, p)).collect();
        argmin(&values).0
    };
    LogicState {
        q: [pick(1, y1), pick(2, y2)],
    }
}

/// `μ₁ ≥ δ₁ or μ₂ ≥ δ₂`.
pub fn mu_in_jump_set(mu: [f64; 2], delta: [f64; 2]) -> bool {
    mu[0] >= delta[0] || mu[1] >= delta[1]
}

/// `μ₁ ≤ δ₁ and μ₂ ≤ δ₂`.
pub fn mu_in_flow_set(mu: [f64; 2], delta: [f64; 2]) -> bool {
    mu[0] <= delta[0] && mu[1] <= delta[1]
}

fn mu_pair(cfg: &ControllerConfig, x1: &Rotation, x2: &Rotation, logic: LogicState) -> [f64; 2] {
    [
        cfg.potential(1).mu(x1, logic.q[0]),
        cfg.potential(2).mu(x2, logic.q[1]),
    ]
}

pub fn in_jump_set(cfg: &ControllerConfig, x1: &Rotation, x2: &Rotation, logic: LogicState) -> bool {
    mu_in_jump_set(mu_pair(cfg, x1, x2, logic), cfg.delta)
}

pub fn in_flow_set(cfg: &ControllerConfig, x1: &Rotation, x2: &Rotation, logic: LogicState) -> bool {
    mu_in_flow_set(mu_pair(cfg, x1, x2, logic), cfg.delta)
}

/// Smooth baseline `τ = −Σ_h Σᵢ ρ_ih (b_i × Y_hᵀ r_i)`.
pub fn smooth_torque(ms: &MeasurementSet, y1: &Rotation, y2: &Rotation) -> Vec3 {
    -(smooth_term(ms, 1, y1) + smooth_term(ms, 2, y2))
}

/// Smooth baseline `β = Σᵢ ρ_i1 (b_i × Y₁ᵀ r_i)`.
pub fn smooth_beta(ms: &MeasurementSet, y1: &Rotation) -> Vec3 {
    smooth_term(ms, 1, y1)
}

fn smooth_term(ms: &MeasurementSet, h: usize, y: &Rotation) -> Vec3 {
    let c = channel_index(h);
    let yt = y.transpose();
    ms.entries
        .iter()
        .fold(Vec3::ZERO, |acc, m| acc + m.b.cross(yt * m.r) * m.rho[c])
}

/// The same feedback evaluated from the attitude errors `X_h` directly,
/// used to cross-check the measurement path.
pub mod matrix_path {
    use super::*;

    pub fn torque(
        cfg: &ControllerConfig,
        logic: LogicState,
        x: [&Rotation; 2],
        y: [&Rotation; 2],
    ) -> Vec3 {
        let d1 = drive(cfg, 1, x[0], y[0], logic.q[0]);
        let d2 = drive(cfg, 2, x[1], y[1], logic.q[1]);
        -(d1 + d2) * 2.0
    }

    pub fn beta(cfg: &ControllerConfig, logic: LogicState, x1: &Rotation, y1: &Rotation) -> Vec3 {
        drive(cfg, 1, x1, y1, logic.q[0])
    }

    /// `Y_hᵀ Θ_h(X_h, q)ᵀ ψ(A_h Γ_h(X_h, q))`.
    pub fn drive(cfg: &ControllerConfig, h: usize, x: &Rotation, y: &Rotation, q: usize) -> Vec3 {
        let wp = cfg.potential(h);
        y.transpose() * (wp.big_theta(x, q).transpose() * wp.psi_gamma(x, q))
    }

    /// `−Σ_h 2 Y_hᵀ ψ(A_h X_h)`.
    pub fn smooth_torque(a: [&Mat3; 2], x: [&Rotation; 2], y: [&Rotation; 2]) -> Vec3 {
        -(y[0].transpose() * psi_ar_m(a[0], x[0]) + y[1].transpose() * psi_ar_m(a[1], x[1])) * 2.0
    }

    fn psi_ar_m(a: &Mat3, x: &Rotation) -> Vec3 {
        crate::so3::psi(&(*a * *x.matrix()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::random_rotation;
    use crate::trace_potential::{psi_ar, v_a, WeightMatrix};
    use crate::warping::{GainPolicy, WarpedPotential};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn refs() -> Vec<(Vec3, [f64; 2])> {
        vec![
            (Vec3::E1, [1.0, 0.1]),
            (Vec3::E2, [3.0, 0.3]),
            (Vec3::E3, [5.0, 0.5]),
        ]
    }

    fn config() -> ControllerConfig {
        let u = Vec3::new(0.0, (3.0f64 / 8.0).sqrt(), (5.0f64 / 8.0).sqrt());
        let w1 = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        let w2 = WeightMatrix::diag([0.1, 0.3, 0.5]).unwrap();
        let wp1 = WarpedPotential::symmetric(w1, u, 0.027).unwrap();
        let wp2 = WarpedPotential::symmetric(w2, u, 0.27).unwrap();
        ControllerConfig::new(wp1, wp2, [0.15, 0.015]).unwrap()
    }

    #[test]
    fn build_a_from_example_references() {
        let ms = MeasurementSet::from_attitude(&refs(), &Rotation::IDENTITY).unwrap();
        assert_eq!(ms.build_a(1).unwrap(), Mat3::diag([1.0, 3.0, 5.0]));
        assert_eq!(ms.build_a(2).unwrap(), Mat3::diag([0.1, 0.3, 0.5]));
    }

    #[test]
    fn augmentation_cases() {
        let two = MeasurementSet::from_attitude(
            &[(Vec3::E1, [1.0, 1.0]), (Vec3::E2, [1.0, 1.0])],
            &Rotation::IDENTITY,
        )
        .unwrap();
        assert!(two.build_a(1).is_err());
        let aug = two.augment(DEFAULT_AUGMENT_RHO).unwrap();
        assert_eq!(aug.len(), 3);
        assert_eq!(aug.entries()[2].r, Vec3::E3);
        assert!(aug.is_derived(2));
        let three = MeasurementSet::from_attitude(&refs(), &Rotation::IDENTITY).unwrap();
        assert_eq!(three.augment(DEFAULT_AUGMENT_RHO).unwrap(), three);
        let col = MeasurementSet::from_attitude(
            &[(Vec3::E1, [1.0, 1.0]), (-Vec3::E1 * 2.0, [1.0, 1.0])],
            &Rotation::IDENTITY,
        )
        .unwrap();
        assert!(col.augment(DEFAULT_AUGMENT_RHO).is_err());
    }

    #[test]
    fn augmented_observation_tracks_attitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let two = MeasurementSet::from_attitude(
            &[(Vec3::new(1.0, 0.2, 0.0), [1.0, 1.0]), (Vec3::new(0.0, 1.0, 0.5), [1.0, 1.0])],
            &Rotation::IDENTITY,
        )
        .unwrap()
        .augment([2.0, 0.5])
        .unwrap();
        let r = random_rotation(&mut rng);
        let obs = two.observe(&r);
        for m in obs.entries() {
            assert!((m.b - r.transpose() * m.r).norm() < 1e-12);
        }
    }

    #[test]
    fn measurement_va_and_psi_match_matrix_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        for _ in 0..200 {
            let r = random_rotation(&mut rng);
            let y = random_rotation(&mut rng);
            let ms = MeasurementSet::from_attitude(&refs(), &r).unwrap();
            let x = r * y.transpose();
            assert!((va_from_measurements(&ms, 1, &y) - v_a(&w, &x)).abs() < 1e-10);
            assert!((psi_from_measurements(&ms, 1, &y) - psi_ar(&w, &x)).norm() < 1e-10);
        }
    }

    #[test]
    fn zero_output_at_target() {
        let cfg = config();
        let ms = MeasurementSet::from_attitude(&refs(), &Rotation::IDENTITY).unwrap();
        let id = Rotation::IDENTITY;
        let out = evaluate(&ms, &cfg, LogicState::default(), &id, &id);
        assert_eq!(out.tau.max_abs(), 0.0);
        assert_eq!(out.beta.max_abs(), 0.0);
        assert!(in_flow_set(&cfg, &id, &id, LogicState::default()));
        assert!(!in_jump_set(&cfg, &id, &id, LogicState::default()));
        assert_eq!(jump_map_g(&cfg, &ms, &id, &id), LogicState { q: [1, 1] });
        assert_eq!(smooth_torque(&ms, &id, &id).max_abs(), 0.0);
    }

    #[test]
    fn critical_start_triggers_jump_to_other_index() {
        let cfg = config();
        let pts = cfg.potential(1).critical_points().unwrap();
        let p = pts.iter().find(|p| p.q == 1).unwrap();
        let id = Rotation::IDENTITY;
        let ms = MeasurementSet::from_attitude(&refs(), &p.rotation).unwrap();
        assert!(psi_gamma_from_measurements(&ms, 1, &id, cfg.potential(1), 1).norm() < 1e-9);
        assert!(in_jump_set(&cfg, &p.rotation, &id, LogicState::default()));
        assert_eq!(jump_map_g(&cfg, &ms, &id, &id).q[0], 2);
    }

    #[test]
    fn boundary_is_in_both_sets() {
        assert!(mu_in_jump_set([0.5, 0.0], [0.5, 0.05]));
        assert!(mu_in_flow_set([0.5, 0.0], [0.5, 0.05]));
    }

    #[test]
    fn smooth_baseline_vanishes_at_half_turn() {
        let ms = MeasurementSet::from_attitude(&refs(), &rot_axis(PI, Vec3::E3)).unwrap();
        let id = Rotation::IDENTITY;
        assert!(smooth_torque(&ms, &id, &id).norm() < 1e-12);
        assert!(smooth_beta(&ms, &id).norm() < 1e-12);
    }

    #[test]
    fn config_rejects_threshold_above_gap() {
        let u = Vec3::new(0.0, (3.0f64 / 8.0).sqrt(), (5.0f64 / 8.0).sqrt());
        let w1 = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        let wp = WarpedPotential::with_policy(w1, u, vec![0.03, -0.03], GainPolicy::ArcsinDomain).unwrap();
        assert!(ControllerConfig::new(wp.clone(), wp.clone(), [0.5, 0.05]).is_err());
        assert!(ControllerConfig::new_unchecked(wp.clone(), wp, [0.5, 0.05]).is_ok());
    }

    #[test]
    fn noise_keeps_reference_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let ms = MeasurementSet::from_attitude(&refs(), &Rotation::IDENTITY).unwrap();
        let noisy = ms.observe_noisy(&Rotation::IDENTITY, 0.05, &mut rng);
        for (m, n) in ms.entries().iter().zip(noisy.entries()) {
            assert!((n.b.norm() - m.r.norm()).abs() < 1e-12);
            assert!(n.b != m.b);
        }
    }
}
