//! The modified trace function `V_A(R) = tr(A(I − R))`, its gradient and
//! critical set, and the `Δ(v, u)` quantities that govern how a rotation
//! about `u` moves `V_A` away from a half-turn critical point.

use std::f64::consts::PI;

use crate::eigen::{self, Multiplicity};
use crate::error::{Error, Result};
use crate::so3::{psi, rot_axis, Mat3, Rotation, Vec3};

/// Default relative tolerance for deciding that two eigenvalues coincide.
pub const DEFAULT_TAU_SPEC: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpectrumClass {
    Isotropic,
    TwoDistinct,
    ThreeDistinct,
}

impl std::fmt::Display for SpectrumClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SpectrumClass::Isotropic => "isotropic",
            SpectrumClass::TwoDistinct => "two-distinct",
            SpectrumClass::ThreeDistinct => "three-distinct",
        })
    }
}

/// Symmetric weight `A` with its eigendecomposition and `W = tr(A)I − A`.
///
/// Eigenvalues are ascending; eigenvectors are orthonormal with their
/// largest-magnitude component positive. Eigenvalues judged equal under the
/// spectrum tolerance are stored as their common mean.
#[derive(Clone, Debug)]
pub struct WeightMatrix {
    a: Mat3,
    eigvals_a: [f64; 3],
    eigvecs: [Vec3; 3],
    w_eigvals: [f64; 3],
    class: SpectrumClass,
    /// For [`SpectrumClass::TwoDistinct`], index of the simple eigenvalue.
    simple: Option<usize>,
}

impl WeightMatrix {
    pub fn new(a: Mat3) -> Result<Self> {
        build_weight(a, DEFAULT_TAU_SPEC)
    }

    pub fn diag(d: [f64; 3]) -> Result<Self> {
        Self::new(Mat3::diag(d))
    }

    pub fn a(&self) -> &Mat3 {
        &self.a
    }

    pub fn w(&self) -> Mat3 {
        Mat3::IDENTITY * self.a.trace() - self.a
    }

    pub fn eigvals_a(&self) -> [f64; 3] {
        self.eigvals_a
    }

    pub fn eigvecs(&self) -> [Vec3; 3] {
        self.eigvecs
    }

    pub fn w_eigvals(&self) -> [f64; 3] {
        self.w_eigvals
    }

    pub fn class(&self) -> SpectrumClass {
        self.class
    }

    /// Index of the simple eigenvalue when exactly two are distinct.
    pub fn simple_index(&self) -> Option<usize> {
        self.simple
    }

    pub fn lambda_w_max(&self) -> f64 {
        self.w_eigvals[0]
    }

    pub fn lambda_w_min(&self) -> f64 {
        self.w_eigvals[2]
    }

    /// `ξ = λ_min(W) / λ_max(W)`.
    pub fn xi(&self) -> f64 {
        self.lambda_w_min() / self.lambda_w_max()
    }

    /// Coordinates of `u` in the eigenbasis.
    pub fn coords(&self, u: Vec3) -> [f64; 3] {
        self.eigvecs.map(|v| v.dot(u))
    }

    /// `vᵀWv` for an eigenvector `v`.
    pub fn lambda_w_of(&self, v: Vec3) -> f64 {
        v.dot(self.w() * v)
    }

    /// Resolves an eigendirection selector to a unit eigenvector.
    pub fn direction(&self, dir: EigenDirection) -> Result<Vec3> {
        match dir {
            EigenDirection::Index(i) if i < 3 => Ok(self.eigvecs[i]),
            EigenDirection::Index(i) => Err(Error::InvalidEigenDirection(format!(
                "index {i} out of range"
            ))),
            EigenDirection::Unit(v) => {
                let n = v.norm();
                if (n - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidEigenDirection(format!(
                        "vector has norm {n}"
                    )));
                }
                let av = self.a * v;
                let resid = (av - v * v.dot(av)).norm();
                let scale = 1.0 + self.eigvals_a[2].abs().max(self.eigvals_a[0].abs());
                if resid > 1e-7 * scale {
                    return Err(Error::InvalidEigenDirection(format!(
                        "not an eigenvector of A (residual {resid:e})"
                    )));
                }
                Ok(v)
            }
        }
    }
}

/// Selects a member of the unit-eigenvector set `E(A)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EigenDirection {
    /// The `i`-th basis eigenvector (ascending eigenvalue order).
    Index(usize),
    /// An arbitrary unit eigenvector, e.g. a member of a degenerate plane.
    Unit(Vec3),
}

pub fn build_weight(a: Mat3, tau_spec: f64) -> Result<WeightMatrix> {
    if !a.is_finite() {
        return Err(Error::Asymmetric(f64::NAN));
    }
    let asym = (a - a.transpose()).frobenius_norm();
    if asym >= 1e-12 * (1.0 + a.frobenius_norm()) {
        return Err(Error::Asymmetric(asym));
    }
    // symmetrize exactly so the closed-form solver sees a symmetric input
    let a = (a + a.transpose()) * 0.5;
    let mut vals = eigen::eigenvalues(&a);
    let w_min = a.trace() - vals[2];
    if !(w_min > 0.0) {
        return Err(Error::WeightNotPositive(w_min));
    }
    let tol = tau_spec * vals[2].abs().max(1.0);
    let eq01 = (vals[1] - vals[0]).abs() <= tol;
    let eq12 = (vals[2] - vals[1]).abs() <= tol;
    let (class, mult, simple) = match (eq01, eq12) {
        (true, true) => (SpectrumClass::Isotropic, Multiplicity::Isotropic, None),
        _ if (vals[2] - vals[0]).abs() <= tol => {
            (SpectrumClass::Isotropic, Multiplicity::Isotropic, None)
        }
        (true, false) => (SpectrumClass::TwoDistinct, Multiplicity::PairAt(0), Some(2)),
        (false, true) => (SpectrumClass::TwoDistinct, Multiplicity::PairAt(1), Some(0)),
        (false, false) => (SpectrumClass::ThreeDistinct, Multiplicity::Distinct, None),
    };
    match mult {
        Multiplicity::Isotropic => {
            let m = (vals[0] + vals[1] + vals[2]) / 3.0;
            vals = [m; 3];
        }
        Multiplicity::PairAt(l) => {
            let m = 0.5 * (vals[l] + vals[l + 1]);
            vals[l] = m;
            vals[l + 1] = m;
        }
        Multiplicity::Distinct => {}
    }
    let dec = eigen::decompose(&a, vals, mult);
    let tr = a.trace();
    Ok(WeightMatrix {
        a,
        eigvals_a: vals,
        eigvecs: dec.vectors,
        w_eigvals: vals.map(|l| tr - l),
        class,
        simple,
    })
}

/// `V_A(R) = tr(A(I − R))`.
pub fn v_a(w: &WeightMatrix, r: &Rotation) -> f64 {
    v_a_matrix(&w.a, r.matrix())
}

pub(crate) fn v_a_matrix(a: &Mat3, r: &Mat3) -> f64 {
    a.trace() - a.inner(&r.transpose())
}

/// Riemannian gradient `∇V_A(R) = R P_a(AR)`.
pub fn grad_v_a(w: &WeightMatrix, r: &Rotation) -> Mat3 {
    let ar = w.a * *r.matrix();
    *r.matrix() * crate::so3::pa(&ar)
}

/// `ψ(AR)`; the body-frame gradient direction, zero exactly at critical points.
pub fn psi_ar(w: &WeightMatrix, r: &Rotation) -> Vec3 {
    psi(&(w.a * *r.matrix()))
}

/// Continuum of critical half-turns that cannot be enumerated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CriticalContinuum {
    /// Half-turns about every unit vector orthogonal to `normal`.
    Plane { normal: Vec3 },
    /// Half-turns about every unit vector.
    Sphere,
}

#[derive(Clone, Debug)]
pub struct CriticalSet {
    /// Isolated undesired critical points `R_a(π, v)` with their axis.
    pub isolated: Vec<(EigenDirection, Rotation)>,
    pub continuum: Option<CriticalContinuum>,
}

impl CriticalSet {
    /// The identity is always critical (the global minimum).
    pub fn identity(&self) -> Rotation {
        Rotation::IDENTITY
    }
}

/// `{I} ∪ R_a(π, E(A))`, with degenerate eigenspaces flagged.
pub fn critical_set(w: &WeightMatrix) -> CriticalSet {
    match w.class {
        SpectrumClass::ThreeDistinct => CriticalSet {
            isolated: (0..3)
                .map(|i| (EigenDirection::Index(i), rot_axis(PI, w.eigvecs[i])))
                .collect(),
            continuum: None,
        },
        SpectrumClass::TwoDistinct => {
            let s = w.simple.unwrap_or(2);
            CriticalSet {
                isolated: vec![(EigenDirection::Index(s), rot_axis(PI, w.eigvecs[s]))],
                continuum: Some(CriticalContinuum::Plane {
                    normal: w.eigvecs[s],
                }),
            }
        }
        SpectrumClass::Isotropic => CriticalSet {
            isolated: Vec::new(),
            continuum: Some(CriticalContinuum::Sphere),
        },
    }
}

/// `Δ(v, u)` such that `V_A(R_a(π,v) R_a(θ,u)) = 2λᵂ(v) − 2 sin²(θ/2) Δ(v,u)`,
/// evaluated with the closed form of the matching spectral case.
pub fn delta(w: &WeightMatrix, dir: EigenDirection, u: Vec3) -> Result<f64> {
    let v = w.direction(dir)?;
    let lw = w.w_eigvals;
    Ok(match w.class {
        SpectrumClass::Isotropic => {
            let c = u.dot(v);
            lw[0] * c * c
        }
        SpectrumClass::TwoDistinct => {
            let s = w.simple.unwrap_or(2);
            let d = if s == 0 { 1 } else { 0 };
            let vs = w.eigvecs[s];
            let alpha_s = u.dot(vs);
            let perp = 1.0 - alpha_s * alpha_s;
            if v.dot(vs).abs() > 0.5 {
                lw[s] - lw[d] * perp
            } else {
                // φ is the angle between v and the in-plane part of u
                let u_perp = u - vs * alpha_s;
                let n2 = u_perp.norm_squared();
                let sin2 = if n2 > 0.0 {
                    1.0 - v.dot(u_perp).powi(2) / n2
                } else {
                    1.0
                };
                perp * (lw[d] - lw[s] * sin2)
            }
        }
        SpectrumClass::ThreeDistinct => {
            let m = match dir {
                EigenDirection::Index(i) => i,
                EigenDirection::Unit(v) => (0..3)
                    .max_by(|&i, &j| {
                        v.dot(w.eigvecs[i]).abs().total_cmp(&v.dot(w.eigvecs[j]).abs())
                    })
                    .unwrap_or(0),
            };
            let a2 = w.coords(u).map(|x| x * x);
            let (n, l) = ((m + 1) % 3, (m + 2) % 3);
            lw[m] - a2[n] * lw[l] - a2[l] * lw[n]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::{quat_to_rot, random_quaternion, random_rotation, random_unit_vector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn example_weights_classify_as_three_distinct() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        assert_eq!(w.class(), SpectrumClass::ThreeDistinct);
        assert_eq!(w.w_eigvals(), [8.0, 6.0, 4.0]);
        let w = WeightMatrix::diag([0.1, 0.3, 0.5]).unwrap();
        assert_eq!(w.class(), SpectrumClass::ThreeDistinct);
        for (a, b) in w.w_eigvals().iter().zip([0.8, 0.6, 0.4]) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(
            WeightMatrix::new(Mat3::IDENTITY * 2.0).unwrap().class(),
            SpectrumClass::Isotropic
        );
    }

    #[test]
    fn two_distinct_records_simple_index() {
        let w = WeightMatrix::diag([1.0, 1.0, 5.0]).unwrap();
        assert_eq!(w.class(), SpectrumClass::TwoDistinct);
        assert_eq!(w.simple_index(), Some(2));
        let w = WeightMatrix::diag([1.0, 5.0, 5.0]).unwrap();
        assert_eq!(w.simple_index(), Some(0));
    }

    #[test]
    fn rejects_bad_weights() {
        let asym = Mat3::from_rows([[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(matches!(WeightMatrix::new(asym), Err(Error::Asymmetric(_))));
        // tr(A) − λ_max = −1 + 0.5 < 0
        assert!(matches!(
            WeightMatrix::diag([-1.0, 0.5, 3.0]),
            Err(Error::WeightNotPositive(_))
        ));
    }

    #[test]
    fn near_degenerate_spectrum_uses_tolerance() {
        let w = build_weight(Mat3::diag([1.0, 1.0 + 1e-12, 5.0]), 1e-9).unwrap();
        assert_eq!(w.class(), SpectrumClass::TwoDistinct);
        let w = build_weight(Mat3::diag([1.0, 1.0 + 1e-6, 5.0]), 1e-9).unwrap();
        assert_eq!(w.class(), SpectrumClass::ThreeDistinct);
    }

    #[test]
    fn v_a_values() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        assert_eq!(v_a(&w, &Rotation::IDENTITY), 0.0);
        assert!((v_a(&w, &rot_axis(PI, Vec3::E1)) - 16.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let u = random_unit_vector(&mut rng);
            let th = rng.random_range(-4.0..4.0);
            let expect = 2.0 * (0.5 * th as f64).sin().powi(2) * u.dot(w.w() * u);
            assert!((v_a(&w, &rot_axis(th, u)) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn quaternion_form_of_v_a() {
        let w = build_weight(
            Mat3::from_rows([[2.0, 0.3, -0.1], [0.3, 1.0, 0.2], [-0.1, 0.2, 1.5]]),
            DEFAULT_TAU_SPEC,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..500 {
            let q = random_quaternion(&mut rng);
            let expect = 2.0 * q.eps.dot(w.w() * q.eps);
            assert!((v_a(&w, &quat_to_rot(&q)) - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_vanishes_on_critical_set() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        assert_eq!(grad_v_a(&w, &Rotation::IDENTITY), Mat3::ZERO);
        let cs = critical_set(&w);
        assert_eq!(cs.isolated.len(), 3);
        assert!(cs.continuum.is_none());
        for (_, r) in &cs.isolated {
            assert!(psi_ar(&w, r).norm() < 1e-10);
            assert!(grad_v_a(&w, r).frobenius_norm() < 1e-10);
        }
        let iso = WeightMatrix::new(Mat3::IDENTITY * 2.0).unwrap();
        assert_eq!(critical_set(&iso).continuum, Some(CriticalContinuum::Sphere));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = random_unit_vector(&mut rng);
        assert!(psi_ar(&iso, &rot_axis(PI, v)).norm() < 1e-12);
    }

    #[test]
    fn gradient_is_tangent() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            let r = random_rotation(&mut rng);
            let g = r.matrix().transpose() * grad_v_a(&w, &r);
            assert!((g + g.transpose()).frobenius_norm() < 1e-12);
        }
    }

    #[test]
    fn delta_three_distinct_example() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        let u = Vec3::new(0.0, (3.0f64 / 8.0).sqrt(), (5.0f64 / 8.0).sqrt());
        let d: Vec<f64> = (0..3)
            .map(|i| delta(&w, EigenDirection::Index(i), u).unwrap())
            .collect();
        assert!((d[0] - 2.75).abs() < 1e-12);
        assert!((d[1] - 1.0).abs() < 1e-12);
        assert!((d[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn delta_isotropic_orthogonal_is_zero() {
        let w = WeightMatrix::new(Mat3::IDENTITY * 2.0).unwrap();
        let d = delta(&w, EigenDirection::Unit(Vec3::E2), Vec3::E1).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn delta_rejects_non_eigenvector() {
        let w = WeightMatrix::diag([1.0, 3.0, 5.0]).unwrap();
        let v = Vec3::new(1.0, 1.0, 0.0).try_normalize().unwrap();
        assert!(delta(&w, EigenDirection::Unit(v), Vec3::E3).is_err());
        assert!(delta(&w, EigenDirection::Index(3), Vec3::E3).is_err());
    }
}
