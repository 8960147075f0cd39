//! Rotation-group kernels: 3-vectors, 3×3 matrices, skew maps, Rodrigues'
//! formula, unit quaternions and the conversions between them.
//!
//! Everything here is a plain value type with pure functions; no allocation.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Index, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance on the orthonormality/determinant invariants of [`Rotation`].
pub const ROTATION_TOL: f64 = 1e-9;
/// Tolerance on the unit-norm invariant of quaternions and axes.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const E1: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const E2: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const E3: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    /// Standard basis vector `e_{i+1}`.
    pub fn basis(i: usize) -> Self {
        [Self::E1, Self::E2, Self::E3][i]
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

    pub fn norm_squared(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_squared().sqrt()
    }

    /// Unit vector along `self`, or `None` for the zero vector.
    pub fn try_normalize(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 0.0 && n.is_finite()).then(|| self * (1.0 / n))
    }

    /// `self · otherᵀ`.
    pub fn outer(self, o: Vec3) -> Mat3 {
        let a = self.to_array();
        let b = o.to_array();
        let mut m = [[0.0; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = a[i] * b[j];
            }
        }
        Mat3 { m }
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }
}

impl Index<usize> for Vec3 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
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

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
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

/// General 3×3 matrix, row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Mat3 {
    pub m: [[f64; 3]; 3],
}

impl Mat3 {
    pub const ZERO: Mat3 = Mat3 { m: [[0.0; 3]; 3] };
    pub const IDENTITY: Mat3 = Mat3 {
        m: [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    };

    pub const fn from_rows(m: [[f64; 3]; 3]) -> Self {
        Self { m }
    }

    /// Builds from 9 entries in row-major order.
    pub fn from_row_slice(a: &[f64; 9]) -> Self {
        Self {
            m: [[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], a[8]]],
        }
    }

    pub fn to_row_array(&self) -> [f64; 9] {
        let m = &self.m;
        [
            m[0][0], m[0][1], m[0][2], m[1][0], m[1][1], m[1][2], m[2][0], m[2][1], m[2][2],
        ]
    }

    pub fn from_cols(c0: Vec3, c1: Vec3, c2: Vec3) -> Self {
        Self {
            m: [[c0.x, c1.x, c2.x], [c0.y, c1.y, c2.y], [c0.z, c1.z, c2.z]],
        }
    }

    pub fn diag(d: [f64; 3]) -> Self {
        Self {
            m: [[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]],
        }
    }

    pub fn row(&self, i: usize) -> Vec3 {
        Vec3::from_array(self.m[i])
    }

    pub fn col(&self, j: usize) -> Vec3 {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    pub fn transpose(&self) -> Mat3 {
        let mut t = [[0.0; 3]; 3];
        for (i, row) in self.m.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                t[j][i] = *e;
            }
        }
        Mat3 { m: t }
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> f64 {
        self.row(0).dot(self.row(1).cross(self.row(2)))
    }

    /// Inverse via the adjugate; `None` when the determinant vanishes.
    pub fn inverse(&self) -> Option<Mat3> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let (r0, r1, r2) = (self.row(0), self.row(1), self.row(2));
        // columns of the inverse are the cross products of row pairs
        let adj = Mat3::from_cols(r1.cross(r2), r2.cross(r0), r0.cross(r1));
        Some(adj * (1.0 / d))
    }

    /// Frobenius inner product `⟨⟨A, B⟩⟩ = tr(AᵀB)`.
    pub fn inner(&self, o: &Mat3) -> f64 {
        let mut s = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                s += self.m[i][j] * o.m[i][j];
            }
        }
        s
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner(self).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|e| e.is_finite())
    }
}

impl Index<(usize, usize)> for Mat3 {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.m[i][j]
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(self, o: Mat3) -> Mat3 {
        let mut r = self;
        for i in 0..3 {
            for j in 0..3 {
                r.m[i][j] += o.m[i][j];
            }
        }
        r
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, o: Mat3) -> Mat3 {
        self + o * -1.0
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self * -1.0
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(self, s: f64) -> Mat3 {
        let mut r = self;
        r.m.iter_mut().flatten().for_each(|e| *e *= s);
        r
    }
}

impl Mul<Mat3> for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut r = [[0.0; 3]; 3];
        for (i, row) in r.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.m[i][k] * o.m[k][j]).sum();
            }
        }
        Mat3 { m: r }
    }
}

impl Mul<Vec3> for Mat3 {
    type Output = Vec3;
    fn mul(self, v: Vec3) -> Vec3 {
        Vec3::new(self.row(0).dot(v), self.row(1).dot(v), self.row(2).dot(v))
    }
}

/// The skew map `[w]×`, so that `hat(w) * v == w.cross(v)`.
pub fn hat(w: Vec3) -> Mat3 {
    Mat3::from_rows([[0.0, -w.z, w.y], [w.z, 0.0, -w.x], [-w.y, w.x, 0.0]])
}

/// Inverse of [`hat`]; rejects matrices that are not skew within `1e-9`.
pub fn vex(s: &Mat3) -> Result<Vec3> {
    let asym = (*s + s.transpose()).frobenius_norm();
    if asym >= ROTATION_TOL {
        return Err(Error::NotSkew(asym));
    }
    Ok(vex_unchecked(s))
}

fn vex_unchecked(s: &Mat3) -> Vec3 {
    Vec3::new(s.m[2][1], s.m[0][2], s.m[1][0])
}

/// Projection onto the skew-symmetric matrices, `(A − Aᵀ)/2`.
pub fn pa(a: &Mat3) -> Mat3 {
    (*a - a.transpose()) * 0.5
}

/// `ψ(A) = vex(P_a(A))`.
pub fn psi(a: &Mat3) -> Vec3 {
    let m = &a.m;
    Vec3::new(
        0.5 * (m[2][1] - m[1][2]),
        0.5 * (m[0][2] - m[2][0]),
        0.5 * (m[1][0] - m[0][1]),
    )
}

/// Angle-axis pair with a unit axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisAngle {
    pub theta: f64,
    pub axis: Vec3,
}

impl AxisAngle {
    pub fn new(theta: f64, axis: Vec3) -> Result<Self> {
        let n = axis.norm();
        if (n - 1.0).abs() >= UNIT_TOL || !theta.is_finite() {
            return Err(Error::NonUnitAxis(n));
        }
        Ok(Self { theta, axis })
    }

    /// Normalizes `axis` first; fails only for a zero or non-finite axis.
    pub fn normalized(theta: f64, axis: Vec3) -> Result<Self> {
        let unit = axis
            .try_normalize()
            .ok_or(Error::NonUnitAxis(axis.norm()))?;
        Self::new(theta, unit)
    }
}

/// Proper rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation(Mat3);

impl Default for Rotation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::IDENTITY);

    /// Validates orthonormality and orientation.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let err = (m.transpose() * m - Mat3::IDENTITY).frobenius_norm();
        if !(err < ROTATION_TOL) || m.det() <= 0.0 {
            return Err(Error::NotARotation(err));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is a rotation by construction.
    pub(crate) fn from_matrix_unchecked(m: Mat3) -> Self {
        Self(m)
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn transpose(&self) -> Rotation {
        Rotation(self.0.transpose())
    }

    /// Exponential map `exp([w]×)`: rotation by `‖w‖` about `w/‖w‖`.
    pub fn exp(w: Vec3) -> Rotation {
        let theta = w.norm();
        if theta == 0.0 {
            return Self::IDENTITY;
        }
        rodrigues_raw(theta, w * (1.0 / theta))
    }

    pub fn orthonormality_error(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat3::IDENTITY).frobenius_norm()
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

fn rodrigues_raw(theta: f64, u: Vec3) -> Rotation {
    let k = hat(u);
    // sin(±π) rounds to ±1.2e-16; keep half turns exactly symmetric
    let (s, c) = if theta.abs() == PI {
        (0.0, -1.0)
    } else {
        theta.sin_cos()
    };
    Rotation(Mat3::IDENTITY + k * s + (k * k) * (1.0 - c))
}

/// `I + sinθ [u]× + (1 − cosθ) [u]×²`.
pub fn rodrigues(aa: AxisAngle) -> Rotation {
    rodrigues_raw(aa.theta, aa.axis)
}

/// Shorthand for `rodrigues` with an axis already known to be unit.
pub fn rot_axis(theta: f64, axis: Vec3) -> Rotation {
    rodrigues_raw(theta, axis)
}

/// Unit quaternion `(η, ε)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitQuaternion {
    pub eta: f64,
    pub eps: Vec3,
}

impl UnitQuaternion {
    pub const IDENTITY: UnitQuaternion = UnitQuaternion {
        eta: 1.0,
        eps: Vec3::ZERO,
    };

    pub fn new(eta: f64, eps: Vec3) -> Result<Self> {
        let n2 = eta * eta + eps.norm_squared();
        if !((n2 - 1.0).abs() < UNIT_TOL) {
            return Err(Error::NonUnitQuaternion(n2.sqrt()));
        }
        Ok(Self { eta, eps })
    }

    /// Normalizes an arbitrary non-zero 4-vector.
    pub fn normalized(eta: f64, eps: Vec3) -> Result<Self> {
        let n = (eta * eta + eps.norm_squared()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::NonUnitQuaternion(n));
        }
        Ok(Self {
            eta: eta / n,
            eps: eps * (1.0 / n),
        })
    }

    pub fn from_axis_angle(aa: AxisAngle) -> Self {
        let (s, c) = (0.5 * aa.theta).sin_cos();
        Self {
            eta: c,
            eps: aa.axis * s,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            eta: self.eta,
            eps: -self.eps,
        }
    }

    pub fn to_rotation(&self) -> Rotation {
        quat_to_rot(self)
    }
}

/// `I + 2[ε]×² + 2η[ε]×`.
pub fn quat_to_rot(q: &UnitQuaternion) -> Rotation {
    let e = hat(q.eps);
    Rotation(Mat3::IDENTITY + (e * e) * 2.0 + e * (2.0 * q.eta))
}

/// Hamilton product, renormalized.
pub fn quat_mul(q1: &UnitQuaternion, q2: &UnitQuaternion) -> UnitQuaternion {
    let eta = q1.eta * q2.eta - q1.eps.dot(q2.eps);
    let eps = q2.eps * q1.eta + q1.eps * q2.eta + q1.eps.cross(q2.eps);
    let n = (eta * eta + eps.norm_squared()).sqrt();
    UnitQuaternion {
        eta: eta / n,
        eps: eps * (1.0 / n),
    }
}

/// Quaternion of a rotation with `η ≥ 0` (Shepperd's method).
pub fn rot_to_quat(r: &Rotation) -> UnitQuaternion {
    let m = &r.0.m;
    let tr = r.0.trace();
    let cands = [tr, m[0][0], m[1][1], m[2][2]];
    let (k, _) = cands
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let (eta, x, y, z) = match k {
        0 => {
            let s = (1.0 + tr).sqrt() * 2.0;
            (
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            )
        }
        1 => {
            let s = (1.0 + m[0][0] - m[1][1] - m[2][2]).sqrt() * 2.0;
            (
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            )
        }
        2 => {
            let s = (1.0 + m[1][1] - m[0][0] - m[2][2]).sqrt() * 2.0;
            (
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            )
        }
        _ => {
            let s = (1.0 + m[2][2] - m[0][0] - m[1][1]).sqrt() * 2.0;
            (
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            )
        }
    };
    let sign = if eta < 0.0 { -1.0 } else { 1.0 };
    let n = (eta * eta + x * x + y * y + z * z).sqrt() * sign;
    UnitQuaternion {
        eta: eta / n,
        eps: Vec3::new(x / n, y / n, z / n),
    }
}

/// Inverse of Rodrigues' formula with `θ ∈ [0, π]`.
///
/// The identity maps to `(0, e₁)`. At `θ = π` the axis is taken from the
/// largest diagonal entry of `(R + I)/2` and its first nonzero component is
/// made positive.
pub fn rot_to_axis_angle(r: &Rotation) -> AxisAngle {
    let m = r.matrix();
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let s_vec = psi(m); // sinθ · u
    let s = s_vec.norm();
    if s == 0.0 && c > 0.0 {
        return AxisAngle {
            theta: 0.0,
            axis: Vec3::E1,
        };
    }
    let theta = s.atan2(c);
    if c > -0.5 {
        return AxisAngle {
            theta,
            axis: s_vec * (1.0 / s),
        };
    }
    // near π: uuᵀ = (sym(R) − cosθ I) / (1 − cosθ)
    let sym = (*m + m.transpose()) * 0.5;
    let uu = (sym - Mat3::IDENTITY * c) * (1.0 / (1.0 - c));
    let k = (0..3)
        .max_by(|&a, &b| uu.m[a][a].total_cmp(&uu.m[b][b]))
        .unwrap_or(0);
    let axis = uu.col(k).try_normalize().unwrap_or(Vec3::E1);
    if s > 1e-12 {
        let axis = if axis.dot(s_vec) < 0.0 { -axis } else { axis };
        return AxisAngle { theta, axis };
    }
    AxisAngle {
        theta: PI,
        axis: canonical_sign(axis),
    }
}

/// Flips `v` so its first component that is not (numerically) zero is positive.
pub fn canonical_sign(v: Vec3) -> Vec3 {
    for i in 0..3 {
        if v[i].abs() > 1e-12 {
            return if v[i] < 0.0 { -v } else { v };
        }
    }
    v
}

/// Haar-distributed rotation from a normalized 4-dim Gaussian.
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R) -> Rotation {
    random_quaternion(rng).to_rotation()
}

pub fn random_quaternion<R: Rng + ?Sized>(rng: &mut R) -> UnitQuaternion {
    loop {
        let g: [f64; 4] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        if let Ok(q) = UnitQuaternion::normalized(g[0], Vec3::new(g[1], g[2], g[3])) {
            return q;
        }
    }
}

/// Uniform point on the unit sphere.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        );
        if let Some(u) = v.try_normalize() {
            return u;
        }
    }
}

/// Nearest rotation to `m`, by the averaging iteration `M ← ½(M + M⁻ᵀ)`.
pub fn project_so3(m: &Mat3) -> Result<Rotation> {
    let d = m.det();
    if !(d > 0.0) || !m.is_finite() {
        return Err(Error::DegenerateProjection(d));
    }
    let mut cur = *m;
    for _ in 0..100 {
        let inv_t = cur
            .inverse()
            .ok_or(Error::DegenerateProjection(cur.det()))?
            .transpose();
        let next = (cur + inv_t) * 0.5;
        let step = (next - cur).frobenius_norm();
        cur = next;
        if step < 1e-14 {
            break;
        }
    }
    Rotation::from_matrix(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn close_m(a: &Mat3, b: &Mat3, tol: f64) -> bool {
        (*a - *b).frobenius_norm() < tol
    }

    #[test]
    fn hat_basics() {
        assert_eq!(hat(Vec3::ZERO), Mat3::ZERO);
        assert_eq!(hat(Vec3::E1) * Vec3::E2, Vec3::E3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let w = random_unit_vector(&mut rng) * rng.random_range(0.0..5.0);
            assert_eq!(hat(w).transpose(), -hat(w));
        }
    }

    #[test]
    fn vex_inverts_hat_and_rejects_symmetric() {
        assert_eq!(vex(&hat(Vec3::new(1.0, 2.0, 3.0))).unwrap(), Vec3::new(1.0, 2.0, 3.0));
        assert_eq!(vex(&Mat3::ZERO).unwrap(), Vec3::ZERO);
        assert!(matches!(vex(&Mat3::IDENTITY), Err(Error::NotSkew(_))));
    }

    #[test]
    fn pa_and_psi_basics() {
        assert_eq!(pa(&Mat3::IDENTITY), Mat3::ZERO);
        let w = Vec3::new(0.3, -1.0, 2.0);
        assert_eq!(pa(&hat(w)), hat(w));
        assert_eq!(psi(&Mat3::IDENTITY), Vec3::ZERO);
        assert_eq!(psi(&hat(w)), w);
    }

    #[test]
    fn rodrigues_special_values() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unit_vector(&mut rng);
        assert!(close_m(rot_axis(0.0, u).matrix(), &Mat3::IDENTITY, 1e-15));
        let r = rot_axis(PI, Vec3::E1);
        assert!(close_m(r.matrix(), &Mat3::diag([1.0, -1.0, -1.0]), 1e-15));
        assert!(AxisAngle::new(1.0, Vec3::new(1.0, 1.0, 0.0)).is_err());
    }

    #[test]
    fn axis_angle_of_identity_and_half_turn() {
        let aa = rot_to_axis_angle(&Rotation::IDENTITY);
        assert_eq!(aa.theta, 0.0);
        assert_eq!(aa.axis, Vec3::E1);
        let r = Rotation::from_matrix(Mat3::diag([1.0, -1.0, -1.0])).unwrap();
        let aa = rot_to_axis_angle(&r);
        assert!((aa.theta - PI).abs() < 1e-12);
        assert!((aa.axis - Vec3::E1).norm() < 1e-12);
        // negative-leading axis gets flipped
        let r = rot_axis(PI, Vec3::new(-0.6, 0.8, 0.0));
        let aa = rot_to_axis_angle(&r);
        assert!((aa.axis - Vec3::new(0.6, -0.8, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn quaternion_identity_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_quaternion(&mut rng);
        let p = quat_mul(&q, &UnitQuaternion::IDENTITY);
        assert!((p.eta - q.eta).abs() < 1e-15 && (p.eps - q.eps).norm() < 1e-15);
        let i = quat_mul(&q, &q.inverse());
        assert!((i.eta - 1.0).abs() < 1e-15 && i.eps.norm() < 1e-15);
        assert_eq!(quat_to_rot(&UnitQuaternion::IDENTITY).matrix(), &Mat3::IDENTITY);
        assert!(UnitQuaternion::new(0.9, Vec3::ZERO).is_err());
    }

    #[test]
    fn random_rotation_is_deterministic_per_seed() {
        let a = random_rotation(&mut ChaCha8Rng::seed_from_u64(9));
        let b = random_rotation(&mut ChaCha8Rng::seed_from_u64(9));
        assert_eq!(a, b);
    }

    #[test]
    fn projection_fixes_rotations_and_rejects_reflections() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let r = random_rotation(&mut rng);
        assert!(close_m(project_so3(r.matrix()).unwrap().matrix(), r.matrix(), 1e-14));
        let scaled = *r.matrix() * 1.001;
        assert!(close_m(project_so3(&scaled).unwrap().matrix(), r.matrix(), 1e-9));
        assert!(project_so3(&Mat3::diag([1.0, 1.0, -1.0])).is_err());
        assert!(project_so3(&Mat3::ZERO).is_err());
    }

    #[test]
    fn inverse_and_det() {
        let a = Mat3::from_rows([[2.0, 1.0, 0.0], [0.5, 3.0, 1.0], [0.0, -1.0, 4.0]]);
        let inv = a.inverse().unwrap();
        assert!(close_m(&(a * inv), &Mat3::IDENTITY, 1e-14));
        assert!(Mat3::ZERO.inverse().is_none());
    }
}
