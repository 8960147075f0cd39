//! Angular warping `Γ(R,q) = R · R_a(θ_q(R), u)` with `θ_q(R) = 2 asin(k_q V_A(R))`,
//! and everything that follows from it: the differential `Θ`, the admissible
//! gain bound, explicit undesired critical points of `U = V_A ∘ Γ`, the
//! synergism test, the exact synergistic gap, and the gap-maximizing axis.
//!
//! Logic indices `q` are 1-based throughout (`q ∈ {1, …, gains.len()}`).

use std::f64::consts::PI;

use crate::eigen::any_orthogonal;
use crate::error::{Error, Result};
use crate::so3::{psi, rot_axis, Mat3, Rotation, Vec3};
use crate::trace_potential::{self, delta, v_a, EigenDirection, SpectrumClass, WeightMatrix};

/// Fraction of `k̄` used when no gain is given.
pub const DEFAULT_GAIN_FRACTION: f64 = 0.95;
/// Fraction of `k̄` that out-of-bound gains are clamped to.
pub const CLAMP_GAIN_FRACTION: f64 = 0.99;

/// `k̄ = 1 / (2 λ_max(W) √(6 − max{1, 4ξ²}))`.
pub fn k_bound(w: &WeightMatrix) -> f64 {
    let xi = w.xi();
    1.0 / (2.0 * w.lambda_w_max() * (6.0 - (4.0 * xi * xi).max(1.0)).sqrt())
}

/// `0.95 k̄`.
pub fn default_gain(w: &WeightMatrix) -> f64 {
    DEFAULT_GAIN_FRACTION * k_bound(w)
}

/// Returns `k` unchanged when `|k| < k̄`, otherwise `±0.99 k̄`.
pub fn clamp_gain(w: &WeightMatrix, k: f64) -> f64 {
    let kb = k_bound(w);
    if k.abs() < kb {
        k
    } else {
        CLAMP_GAIN_FRACTION * kb * k.signum()
    }
}

/// Value of `V_A` at an undesired critical point, the positive root of
/// `2k²Δ V² + V − 2λᵂ = 0`.
pub fn v_bar(k: f64, lambda_w: f64, delta: f64) -> f64 {
    let k2d = k * k * delta;
    if k2d.abs() < 1e-12 {
        // series of the root in k²Δ avoids cancellation
        return 2.0 * lambda_w - 8.0 * lambda_w * lambda_w * k2d;
    }
    (-1.0 + (1.0 + 16.0 * lambda_w * k2d).sqrt()) / (4.0 * k2d)
}

/// Gap contributed by one eigendirection: `8k²V̄²(1 − k²V̄²)Δ`.
pub fn sigma(k: f64, lambda_w: f64, delta: f64) -> f64 {
    let kv2 = (k * v_bar(k, lambda_w, delta)).powi(2);
    8.0 * kv2 * (1.0 - kv2) * delta
}

/// How strictly gains are checked at construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GainPolicy {
    /// `|k_q| < k̄`: Γ is a local diffeomorphism and `Γ⁻¹(I) = {I} × Q`.
    Strict,
    /// Only `|k_q| · 2λ_max(W) < 1`, so that `θ_q` is defined everywhere.
    ArcsinDomain,
}

/// The family `U(R, q) = V_A(Γ(R, q))`.
#[derive(Clone, Debug)]
pub struct WarpedPotential {
    weight: WeightMatrix,
    u: Vec3,
    gains: Vec<f64>,
    k_bar: f64,
    delta_min: f64,
}

/// Representative member of `E(A)` with the data the gap needs.
#[derive(Clone, Copy, Debug)]
pub struct DirectionData {
    pub selector: EigenDirection,
    pub v: Vec3,
    pub lambda_w: f64,
    pub delta: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct CriticalPoint {
    pub rotation: Rotation,
    pub q: usize,
    /// Eigendirection `v` with `Γ(rotation, q) = R_a(π, v)`.
    pub v: Vec3,
    pub lambda_w: f64,
    pub delta: f64,
    /// `V_A(rotation)`.
    pub v_bar: f64,
    /// `θ_q(rotation)`.
    pub theta: f64,
    /// `U(rotation, q) = 2λᵂ`.
    pub u_value: f64,
}

impl WarpedPotential {
    pub fn new(weight: WeightMatrix, u: Vec3, gains: Vec<f64>) -> Result<Self> {
        Self::with_policy(weight, u, gains, GainPolicy::Strict)
    }

    /// `Q = {1, 2}` with `k₁ = k`, `k₂ = −k`.
    pub fn symmetric(weight: WeightMatrix, u: Vec3, k: f64) -> Result<Self> {
        Self::new(weight, u, vec![k, -k])
    }

    pub fn with_policy(
        weight: WeightMatrix,
        u: Vec3,
        gains: Vec<f64>,
        policy: GainPolicy,
    ) -> Result<Self> {
        let n = u.norm();
        if !((n - 1.0).abs() < 1e-9) {
            return Err(Error::NonUnitAxis(n));
        }
        let u = u * (1.0 / n);
        if gains.len() < 2 {
            return Err(Error::InvalidGain("index set needs at least two gains".into()));
        }
        let k_bar = k_bound(&weight);
        let limit = match policy {
            GainPolicy::Strict => k_bar,
            GainPolicy::ArcsinDomain => 0.5 / weight.lambda_w_max(),
        };
        for (i, &k) in gains.iter().enumerate() {
            if k == 0.0 || !k.is_finite() {
                return Err(Error::InvalidGain(format!("k_{} must be nonzero", i + 1)));
            }
            if k.abs() >= limit {
                return Err(Error::InvalidGain(format!(
                    "|k_{}| = {} is not below the bound {limit}",
                    i + 1,
                    k.abs()
                )));
            }
            if gains[..i].contains(&k) {
                return Err(Error::InvalidGain(format!(
                    "gains must be distinct across indices (k_{} repeats)",
                    i + 1
                )));
            }
        }
        let mut wp = Self {
            weight,
            u,
            gains,
            k_bar,
            delta_min: 0.0,
        };
        wp.delta_min = wp
            .directions()
            .iter()
            .map(|d| d.delta)
            .fold(f64::INFINITY, f64::min);
        Ok(wp)
    }

    pub fn weight(&self) -> &WeightMatrix {
        &self.weight
    }

    pub fn axis(&self) -> Vec3 {
        self.u
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    /// Gain for the 1-based index `q`.
    ///
    /// # Panics
    /// If `q` is not in the index set.
    pub fn gain(&self, q: usize) -> f64 {
        assert!(
            (1..=self.gains.len()).contains(&q),
            "logic index {q} outside 1..={}",
            self.gains.len()
        );
        self.gains[q - 1]
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> {
        1..=self.gains.len()
    }

    pub fn k_bar(&self) -> f64 {
        self.k_bar
    }

    /// `min_{v ∈ E(A)} Δ(v, u)`.
    pub fn delta_min(&self) -> f64 {
        self.delta_min
    }

    /// Representatives of `E(A)`. For a degenerate eigenplane these are the
    /// in-plane directions orthogonal to and along the projection of `u`,
    /// which minimize and maximize `Δ` over the plane.
    pub fn directions(&self) -> Vec<DirectionData> {
        let w = &self.weight;
        let u = self.u;
        let mk = |sel: EigenDirection| -> DirectionData {
            let v = w.direction(sel).unwrap_or(Vec3::E1);
            DirectionData {
                selector: sel,
                v,
                lambda_w: w.lambda_w_of(v),
                delta: delta(w, sel, u).unwrap_or(f64::NAN),
            }
        };
        match w.class() {
            SpectrumClass::ThreeDistinct => (0..3).map(|i| mk(EigenDirection::Index(i))).collect(),
            SpectrumClass::TwoDistinct => {
                let s = w.simple_index().unwrap_or(2);
                let vs = w.eigvecs()[s];
                let u_perp = u - vs * u.dot(vs);
                let mut out = vec![mk(EigenDirection::Index(s))];
                match u_perp.try_normalize().filter(|_| u_perp.norm() > 1e-12) {
                    Some(along) => {
                        let worst = vs.cross(along);
                        out.push(mk(EigenDirection::Unit(worst)));
                        out.push(mk(EigenDirection::Unit(along)));
                    }
                    None => out.push(mk(EigenDirection::Unit(any_orthogonal(vs)))),
                }
                out
            }
            SpectrumClass::Isotropic => {
                vec![mk(EigenDirection::Unit(any_orthogonal(u))), mk(EigenDirection::Unit(u))]
            }
        }
    }

    /// `θ_q(R) = 2 asin(k_q V_A(R))`.
    pub fn theta(&self, r: &Rotation, q: usize) -> f64 {
        2.0 * (self.gain(q) * v_a(&self.weight, r)).asin()
    }

    /// `Γ(R, q) = R · R_a(θ_q(R), u)`.
    pub fn gamma(&self, r: &Rotation, q: usize) -> Rotation {
        *r * rot_axis(self.theta(r, q), self.u)
    }

    /// `∇θ_q(R) = 2k_q R P_a(AR) / √(1 − k_q² V_A²)`.
    pub fn grad_theta(&self, r: &Rotation, q: usize) -> Mat3 {
        let k = self.gain(q);
        let v = v_a(&self.weight, r);
        trace_potential::grad_v_a(&self.weight, r) * (2.0 * k / (1.0 - k * k * v * v).sqrt())
    }

    /// `Θ(R,q)` with `d/dt Γ = Γ [Θ ω]×` along `Ṙ = R[ω]×`:
    /// `R_a(θ_q, u)ᵀ + 4k_q u ψ(AR)ᵀ / √(1 − k_q² V_A²)`.
    pub fn big_theta(&self, r: &Rotation, q: usize) -> Mat3 {
        let k = self.gain(q);
        let v = v_a(&self.weight, r);
        let th = 2.0 * (k * v).asin();
        let p = trace_potential::psi_ar(&self.weight, r);
        rot_axis(th, self.u).matrix().transpose()
            + self.u.outer(p) * (4.0 * k / (1.0 - k * k * v * v).sqrt())
    }

    /// `1 + 2uᵀψ(Rᵀ∇θ_q(R))`, the determinant of `Θ` by the rank-one update formula.
    pub fn det_theta_identity(&self, r: &Rotation, q: usize) -> f64 {
        let g = r.matrix().transpose() * self.grad_theta(r, q);
        1.0 + 2.0 * self.u.dot(psi(&g))
    }

    /// `U(R, q) = V_A(Γ(R, q))`.
    pub fn value(&self, r: &Rotation, q: usize) -> f64 {
        v_a(&self.weight, &self.gamma(r, q))
    }

    /// `ψ(A Γ(R, q))`.
    pub fn psi_gamma(&self, r: &Rotation, q: usize) -> Vec3 {
        trace_potential::psi_ar(&self.weight, &self.gamma(r, q))
    }

    /// Body-frame gradient `g` with `dU/dt = gᵀω` along `Ṙ = R[ω]×`,
    /// namely `2Θᵀψ(AΓ)`.
    pub fn body_gradient(&self, r: &Rotation, q: usize) -> Vec3 {
        self.big_theta(r, q).transpose() * self.psi_gamma(r, q) * 2.0
    }

    /// Smallest value over the index set, lowest index on ties.
    pub fn min_value(&self, r: &Rotation) -> (usize, f64) {
        self.indices()
            .map(|p| (p, self.value(r, p)))
            .fold((0, f64::INFINITY), |best, (p, val)| if val < best.1 { (p, val) } else { best })
    }

    /// `μ(R, q) = U(R, q) − min_p U(R, p)`.
    pub fn mu(&self, r: &Rotation, q: usize) -> f64 {
        self.value(r, q) - self.min_value(r).1
    }

    /// Synergistic iff `Δ(v, u) > 0` for every `v ∈ E(A)`.
    pub fn is_synergistic(&self) -> bool {
        self.delta_min > 0.0
    }

    /// Undesired critical points, one per (representative direction, index).
    pub fn critical_points(&self) -> Result<Vec<CriticalPoint>> {
        let mut out = Vec::new();
        let tol = 1e-12 * self.weight.lambda_w_max();
        for d in self.directions() {
            if d.delta.abs() <= tol || !d.delta.is_finite() {
                return Err(Error::DegenerateCriticalPoint(d.delta));
            }
            for q in self.indices() {
                let k = self.gain(q);
                if 1.0 + 16.0 * d.lambda_w * k * k * d.delta < 0.0 {
                    return Err(Error::DegenerateCriticalPoint(d.delta));
                }
                let vb = v_bar(k, d.lambda_w, d.delta);
                let theta = 2.0 * (k * vb).asin();
                let rotation = rot_axis(PI, d.v) * rot_axis(theta, self.u).transpose();
                out.push(CriticalPoint {
                    rotation,
                    q,
                    v: d.v,
                    lambda_w: d.lambda_w,
                    delta: d.delta,
                    v_bar: vb,
                    theta,
                    u_value: 2.0 * d.lambda_w,
                });
            }
        }
        Ok(out)
    }

    fn check_gap_preconditions(&self) -> Result<f64> {
        if self.gains.len() != 2 || self.gains[0] != -self.gains[1] {
            return Err(Error::Precondition(
                "the gap formula needs Q = {1,2} with k₁ = −k₂".into(),
            ));
        }
        if !self.is_synergistic() {
            return Err(Error::Infeasible(format!(
                "min Δ(v,u) = {} is not positive, the family is not synergistic",
                self.delta_min
            )));
        }
        Ok(self.gains[0].abs())
    }

    /// Synergistic gap `δ̄ = min_v σ(k, λᵂ(v), Δ(v,u))`.
    pub fn gap(&self) -> Result<f64> {
        let k = self.check_gap_preconditions()?;
        Ok(self
            .directions()
            .iter()
            .map(|d| sigma(k, d.lambda_w, d.delta))
            .fold(f64::INFINITY, f64::min))
    }

    /// `σ(k, min λᵂ, min Δ)`, a lower bound on the gap.
    pub fn gap_lower_bound(&self) -> Result<f64> {
        let k = self.check_gap_preconditions()?;
        let dirs = self.directions();
        let lam = dirs.iter().map(|d| d.lambda_w).fold(f64::INFINITY, f64::min);
        Ok(sigma(k, lam, self.delta_min))
    }
}

/// Verdict of the synergy-feasibility conditions for a warping axis.
#[derive(Clone, Debug)]
pub struct Feasibility {
    pub feasible: bool,
    pub class: SpectrumClass,
    /// `Δ` for each representative eigendirection, with a label.
    pub deltas: Vec<(String, f64)>,
    pub reason: String,
}

/// Evaluates the closed-form feasibility inequalities for `u`.
pub fn feasibility(w: &WeightMatrix, u: Vec3) -> Feasibility {
    let l = w.eigvals_a();
    let a = w.coords(u).map(|x| x * x);
    let deltas = match WarpedPotential::with_policy(
        w.clone(),
        u,
        vec![1e-300, -1e-300],
        GainPolicy::ArcsinDomain,
    ) {
        Ok(wp) => wp
            .directions()
            .iter()
            .map(|d| (direction_label(w, d), d.delta))
            .collect(),
        Err(_) => Vec::new(),
    };
    let (feasible, reason) = match w.class() {
        SpectrumClass::Isotropic => (
            false,
            "isotropic spectrum: some eigendirection is orthogonal to every u".to_string(),
        ),
        SpectrumClass::TwoDistinct => {
            if w.simple_index() == Some(0) {
                (
                    false,
                    "repeated eigenvalue is the largest: the eigenplane always has Δ ≤ 0"
                        .to_string(),
                )
            } else {
                // ϱ₃₃ < (uᵀv₃)² < 1
                let rho33 = (l[2] - l[0]) / (l[2] + l[1]);
                let ok = rho33 < a[2] && a[2] < 1.0;
                (ok, format!("need {rho33:.6} < (uᵀv₃)² = {:.6} < 1", a[2]))
            }
        }
        SpectrumClass::ThreeDistinct => {
            let rho = |i: usize, j: u32| (l[i - 1] + (-1f64).powi(j as i32) * l[0]) / (l[2] + l[1]);
            let lo = -rho(3, 3) * a[0] + rho(2, 3);
            let hi = -rho(3, 2) * a[0] + rho(2, 2);
            let ok = lo < a[1] && a[1] < hi;
            (ok, format!("need {lo:.6} < (uᵀv₂)² = {:.6} < {hi:.6}", a[1]))
        }
    };
    Feasibility {
        feasible,
        class: w.class(),
        deltas,
        reason,
    }
}

fn direction_label(w: &WeightMatrix, d: &DirectionData) -> String {
    match d.selector {
        EigenDirection::Index(i) => format!("v{}", i + 1),
        EigenDirection::Unit(v) => {
            if w.class() == SpectrumClass::Isotropic {
                format!("sphere[{:.4},{:.4},{:.4}]", v.x, v.y, v.z)
            } else {
                format!("plane[{:.4},{:.4},{:.4}]", v.x, v.y, v.z)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OptimalBranch {
    /// Repeated smaller eigenvalue.
    TwoDistinct,
    /// `λ₂ ≥ λ₁λ₃/(λ₃ − λ₁)`: `u ⟂ v₁`.
    ThreeDistinctEdge,
    /// All three coordinates nonzero.
    ThreeDistinctInterior,
}

#[derive(Clone, Copy, Debug)]
pub struct OptimalAxis {
    pub u: Vec3,
    /// `(uᵀvᵢ)²`.
    pub alpha_sq: [f64; 3],
    pub min_delta: f64,
    pub branch: OptimalBranch,
}

/// Warping axis maximizing `min_v Δ(v, u)`; coordinates in the eigenbasis
/// are non-negative.
pub fn optimal_u(w: &WeightMatrix) -> Result<OptimalAxis> {
    let l = w.eigvals_a();
    let (alpha_sq, min_delta, branch) = match w.class() {
        SpectrumClass::Isotropic => {
            return Err(Error::Infeasible(
                "isotropic spectrum admits no synergistic warping axis".into(),
            ))
        }
        SpectrumClass::TwoDistinct => {
            if w.simple_index() != Some(2) {
                return Err(Error::Infeasible(
                    "repeated eigenvalue is the largest; no synergistic warping axis exists"
                        .into(),
                ));
            }
            let (ld, ls) = (l[0], l[2]);
            let a3 = 1.0 - ld / ls;
            ([1.0 - a3, 0.0, a3], ld * (ls - ld) / ls, OptimalBranch::TwoDistinct)
        }
        SpectrumClass::ThreeDistinct => {
            if l[1] >= l[0] * l[2] / (l[2] - l[0]) {
                let s = l[1] + l[2];
                ([0.0, l[1] / s, l[2] / s], l[0], OptimalBranch::ThreeDistinctEdge)
            } else {
                // Σ over ordered pairs j ≠ k is twice the elementary symmetric sum
                let pairs = 2.0 * (l[0] * l[1] + l[0] * l[2] + l[1] * l[2]);
                let prod = l[0] * l[1] * l[2];
                let a = [
                    1.0 - 4.0 * l[1] * l[2] / pairs,
                    1.0 - 4.0 * l[0] * l[2] / pairs,
                    1.0 - 4.0 * l[0] * l[1] / pairs,
                ];
                (a, 4.0 * prod / pairs, OptimalBranch::ThreeDistinctInterior)
            }
        }
    };
    let v = w.eigvecs();
    let u = v[0] * alpha_sq[0].max(0.0).sqrt()
        + v[1] * alpha_sq[1].max(0.0).sqrt()
        + v[2] * alpha_sq[2].max(0.0).sqrt();
    Ok(OptimalAxis {
        u,
        alpha_sq,
        min_delta,
        branch,
    })
}

/// `min_v Δ(v, u)` over `E(A)` for an arbitrary unit `u`.
pub fn min_delta(w: &WeightMatrix, u: Vec3) -> f64 {
    let wp = WarpedPotential::with_policy(w.clone(), u, vec![1e-300, -1e-300], GainPolicy::ArcsinDomain);
    wp.map(|wp| wp.delta_min()).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{random_rotation, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example_weight() -> WeightMatrix {
        WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap()
    }

    fn example_axis() -> Vec3 {
        Vec3::new(0.0, (3.0f64 / 8.0).sqrt(), (5.0f64 / 8.0).sqrt())
    }

    #[test]
    fn k_bound_values() {
        let kb = k_bound(&example_weight());
        assert!((kb - 1.0 / (16.0 * 5f64.sqrt())).abs() < 1e-15);
        assert!((kb - 0.027951).abs() < 1e-6);
        let kb2 = k_bound(&WeightMatrix::diag([0.1, 0.3, 0.5]).unwrap());
        assert!((kb2 - 0.27951).abs() < 1e-5);
        let w3 = WeightMatrix::diag([3.0, 9.0, 15.0]).unwrap();
        assert!((k_bound(&w3) - kb / 3.0).abs() < 1e-15);
    }

    #[test]
    fn theta_and_gamma_at_identity() {
        let wp = WarpedPotential::symmetric(example_weight(), example_axis(), 0.02).unwrap();
        assert_eq!(wp.theta(&Rotation::IDENTITY, 1), 0.0);
        assert_eq!(wp.gamma(&Rotation::IDENTITY, 2), Rotation::IDENTITY);
        assert_eq!(wp.big_theta(&Rotation::IDENTITY, 1), Mat3::IDENTITY);
    }

    #[test]
    fn theta_example_value() {
        let wp = WarpedPotential::with_policy(
            example_weight(),
            example_axis(),
            vec![0.03, -0.03],
            GainPolicy::ArcsinDomain,
        )
        .unwrap();
        let th = wp.theta(&rot_axis(PI, Vec3::E1), 1);
        assert!((th - 2.0 * 0.48f64.asin()).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let r = random_rotation(&mut rng);
            assert!(wp.theta(&r, 1) > 0.0 && wp.theta(&r, 2) < 0.0);
        }
    }

    #[test]
    fn construction_rejects_bad_gains() {
        let w = example_weight();
        let u = example_axis();
        assert!(WarpedPotential::new(w.clone(), u, vec![0.0, 0.01]).is_err());
        assert!(WarpedPotential::new(w.clone(), u, vec![0.01, 0.01]).is_err());
        assert!(WarpedPotential::new(w.clone(), u, vec![0.03, -0.03]).is_err());
        assert!(WarpedPotential::new(w.clone(), u, vec![0.01]).is_err());
        assert!(WarpedPotential::new(w.clone(), Vec3::new(1.0, 1.0, 0.0), vec![0.01, -0.01]).is_err());
        assert!(WarpedPotential::with_policy(w, u, vec![0.03, -0.03], GainPolicy::ArcsinDomain).is_ok());
    }

    #[test]
    fn feasibility_cases() {
        let w = example_weight();
        assert!(feasibility(&w, example_axis()).feasible);
        assert!(!feasibility(&w, Vec3::E1).feasible);
        let iso = WeightMatrix::diag([2.0, 2.0, 2.0]).unwrap();
        assert!(!feasibility(&iso, Vec3::E3).feasible);
        let top_pair = WeightMatrix::diag([1.0, 5.0, 5.0]).unwrap();
        assert!(!feasibility(&top_pair, Vec3::E1).feasible);
    }

    #[test]
    fn feasibility_inequalities_agree_with_delta_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for w in [
            example_weight(),
            WeightMatrix::diag([1.0, 1.1, 5.0]).unwrap(),
            WeightMatrix::diag([1.0, 1.0, 3.0]).unwrap(),
            WeightMatrix::diag([2.0, 2.0, 3.5]).unwrap(),
        ] {
            for _ in 0..2000 {
                let u = random_unit_vector(&mut rng);
                let f = feasibility(&w, u);
                assert_eq!(f.feasible, min_delta(&w, u) > 0.0, "{u:?} {}", f.reason);
            }
        }
    }

    #[test]
    fn optimal_axis_example_weights() {
        for d in [[1.0, 3.0, 5.0], [0.1, 0.3, 0.5]] {
            let opt = optimal_u(&WeightMatrix::diag(d).unwrap()).unwrap();
            assert_eq!(opt.branch, OptimalBranch::ThreeDistinctEdge);
            assert!((opt.u - example_axis()).norm() < 1e-12);
        }
        let opt = optimal_u(&example_weight()).unwrap();
        assert!((opt.min_delta - 1.0).abs() < 1e-12);
    }

    #[test]
    fn optimal_axis_interior_branch_balances_deltas() {
        let w = WeightMatrix::diag([1.0, 1.1, 5.0]).unwrap();
        let opt = optimal_u(&w).unwrap();
        assert_eq!(opt.branch, OptimalBranch::ThreeDistinctInterior);
        assert!((opt.alpha_sq.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let wp = WarpedPotential::symmetric(w, opt.u, 0.01).unwrap();
        for d in wp.directions() {
            assert!((d.delta - opt.min_delta).abs() < 1e-12);
        }
    }

    #[test]
    fn optimal_axis_two_distinct() {
        let w = WeightMatrix::diag([1.0, 1.0, 5.0]).unwrap();
        let opt = optimal_u(&w).unwrap();
        assert!((opt.alpha_sq[2] - 0.8).abs() < 1e-15);
        assert!((min_delta(&w, opt.u) - opt.min_delta).abs() < 1e-12);
        assert!(optimal_u(&WeightMatrix::diag([2.0, 2.0, 2.0]).unwrap()).is_err());
        assert!(optimal_u(&WeightMatrix::diag([1.0, 5.0, 5.0]).unwrap()).is_err());
    }

    #[test]
    fn critical_point_example_values() {
        let wp = WarpedPotential::with_policy(
            example_weight(),
            example_axis(),
            vec![0.03, -0.03],
            GainPolicy::ArcsinDomain,
        )
        .unwrap();
        let pts = wp.critical_points().unwrap();
        assert_eq!(pts.len(), 6);
        let p = pts.iter().find(|p| p.q == 1 && (p.lambda_w - 4.0).abs() < 1e-12).unwrap();
        assert!((p.v_bar - 7.888).abs() < 1e-3);
        assert!((p.theta - 0.4777).abs() < 1e-3);
        for p in &pts {
            assert!(wp.psi_gamma(&p.rotation, p.q).norm() < 1e-9);
            assert!((v_a(wp.weight(), &p.rotation) - p.v_bar).abs() < 1e-9);
            assert!((wp.value(&p.rotation, p.q) - p.u_value).abs() < 1e-9);
        }
    }

    #[test]
    fn critical_points_reject_zero_delta() {
        // α₂² = α₃² = 1/2 gives Δ(v₃,u) = 4 − 8/2 = 0
        let u = Vec3::new(0.0, 0.5f64.sqrt(), 0.5f64.sqrt());
        let wp = WarpedPotential::symmetric(example_weight(), u, 0.02).unwrap();
        assert!(wp.directions()[2].delta.abs() < 1e-12);
        assert!(matches!(wp.critical_points(), Err(Error::DegenerateCriticalPoint(_))));
    }

    #[test]
    fn gap_example_and_lower_bound() {
        let wp = WarpedPotential::with_policy(
            example_weight(),
            example_axis(),
            vec![0.03, -0.03],
            GainPolicy::ArcsinDomain,
        )
        .unwrap();
        let g = wp.gap().unwrap();
        assert!((g - 0.423).abs() < 1e-3, "{g}");
        assert!(g >= wp.gap_lower_bound().unwrap() - 1e-15);
        let bad = WarpedPotential::symmetric(example_weight(), Vec3::E1, 0.02).unwrap();
        assert!(!bad.is_synergistic());
        assert!(bad.gap().is_err());
        let asym = WarpedPotential::new(example_weight(), example_axis(), vec![0.02, -0.01]).unwrap();
        assert!(matches!(asym.gap(), Err(Error::Precondition(_))));
    }

    #[test]
    fn sigma_increases_with_delta() {
        let k = 0.025;
        assert!(sigma(k, 4.0, 1.1) > sigma(k, 4.0, 1.0));
        assert!(sigma(k, 4.5, 1.0) > sigma(k, 4.0, 1.0));
    }

    #[test]
    fn v_bar_small_gain_limit() {
        let exact = v_bar(1e-3, 4.0, 1.0);
        let series = v_bar(1e-9, 4.0, 1.0);
        assert!((series - 8.0).abs() < 1e-9);
        assert!(exact < 8.0);
    }

    #[test]
    fn mu_is_zero_for_minimizer() {
        let wp = WarpedPotential::symmetric(example_weight(), example_axis(), 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let r = random_rotation(&mut rng);
            let (p, _) = wp.min_value(&r);
            assert_eq!(wp.mu(&r, p), 0.0);
            assert!(wp.mu(&r, 3 - p) >= 0.0);
        }
    }
}
