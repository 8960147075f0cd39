//! Closed-form eigendecomposition of symmetric 3×3 matrices.

use std::f64::consts::PI;

use crate::so3::{Mat3, Vec3};

/// Eigenvalues in ascending order with matching orthonormal eigenvectors.
#[derive(Clone, Copy, Debug)]
pub struct SymmetricEigen {
    pub values: [f64; 3],
    pub vectors: [Vec3; 3],
}

/// Eigenvalues of a symmetric matrix, ascending, from the trigonometric
/// solution of the characteristic cubic plus one Newton step each.
pub fn eigenvalues(a: &Mat3) -> [f64; 3] {
    let m = &a.m;
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    if p1 == 0.0 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(f64::total_cmp);
        return d;
    }
    let q = a.trace() / 3.0;
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let b = (*a - Mat3::IDENTITY * q) * (1.0 / p);
    let r = (0.5 * b.det()).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let hi = q + 2.0 * p * phi.cos();
    let lo = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    let mid = 3.0 * q - hi - lo;
    let mut vals = [lo, mid, hi].map(|l| newton_polish(a, l));
    vals.sort_by(f64::total_cmp);
    refine_close_pair(a, vals)
}

/// Relative separation below which a pair from the cubic is recomputed.
const CLOSE_PAIR: f64 = 1e-4;

/// The cubic loses about √ε near a double root. The well-separated
/// eigenvector is accurate there, so the close pair is recomputed as the
/// spectrum of `A` restricted to its orthogonal complement.
fn refine_close_pair(a: &Mat3, vals: [f64; 3]) -> [f64; 3] {
    let scale = vals[0].abs().max(vals[2].abs()).max(f64::MIN_POSITIVE);
    let (g01, g12) = (vals[1] - vals[0], vals[2] - vals[1]);
    if g01.min(g12) > CLOSE_PAIR * scale || g01.max(g12) <= CLOSE_PAIR * scale {
        return vals;
    }
    let s = if g01 < g12 { 2 } else { 0 };
    let Some(vs) = simple_eigenvector(a, vals[s]) else {
        return vals;
    };
    let p = any_orthogonal(vs);
    let q = vs.cross(p);
    let (b11, b22, b12) = (p.dot(*a * p), q.dot(*a * q), p.dot(*a * q));
    let mean = 0.5 * (b11 + b22);
    let half = (0.5 * (b11 - b22)).hypot(b12);
    let mut out = [vs.dot(*a * vs), mean - half, mean + half];
    out.sort_by(f64::total_cmp);
    out
}

fn newton_polish(a: &Mat3, lambda: f64) -> f64 {
    // det(A − λI) = −λ³ + c2 λ² − c1 λ + c0
    let m = &a.m;
    let c2 = a.trace();
    let c1 = m[0][0] * m[1][1] + m[0][0] * m[2][2] + m[1][1] * m[2][2]
        - m[0][1] * m[1][0]
        - m[0][2] * m[2][0]
        - m[1][2] * m[2][1];
    let c0 = a.det();
    let f = -lambda.powi(3) + c2 * lambda * lambda - c1 * lambda + c0;
    let df = -3.0 * lambda * lambda + 2.0 * c2 * lambda - c1;
    if df.abs() < 1e-8 * (1.0 + c2.abs()).powi(2) {
        return lambda;
    }
    let next = lambda - f / df;
    if next.is_finite() {
        next
    } else {
        lambda
    }
}

/// Null vector of `A − λI` for a simple eigenvalue: the largest cross
/// product among row pairs of the shifted matrix.
pub fn simple_eigenvector(a: &Mat3, lambda: f64) -> Option<Vec3> {
    let s = *a - Mat3::IDENTITY * lambda;
    let (r0, r1, r2) = (s.row(0), s.row(1), s.row(2));
    [r0.cross(r1), r0.cross(r2), r1.cross(r2)]
        .into_iter()
        .max_by(|x, y| x.norm_squared().total_cmp(&y.norm_squared()))
        .and_then(Vec3::try_normalize)
}

/// Any unit vector orthogonal to `n`.
pub fn any_orthogonal(n: Vec3) -> Vec3 {
    let pick = if n.x.abs() <= n.y.abs() && n.x.abs() <= n.z.abs() {
        Vec3::E1
    } else if n.y.abs() <= n.z.abs() {
        Vec3::E2
    } else {
        Vec3::E3
    };
    n.cross(pick).try_normalize().unwrap_or(Vec3::E1)
}

/// Sign convention: the largest-magnitude component is positive.
pub fn canonicalize(v: Vec3) -> Vec3 {
    let a = v.to_array();
    let k = (0..3)
        .max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
        .unwrap_or(0);
    if a[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Decomposes a symmetric matrix given its ascending eigenvalues and the
/// multiplicity pattern already decided for them.
pub(crate) fn decompose(a: &Mat3, values: [f64; 3], multiplicity: Multiplicity) -> SymmetricEigen {
    let vectors = if a.m[0][1] == 0.0 && a.m[0][2] == 0.0 && a.m[1][2] == 0.0 {
        diagonal_vectors(a, multiplicity)
    } else {
        match multiplicity {
            Multiplicity::Isotropic => [Vec3::E1, Vec3::E2, Vec3::E3],
            Multiplicity::Distinct => {
                let v0 = simple_eigenvector(a, values[0]).unwrap_or(Vec3::E1);
                let v2 = simple_eigenvector(a, values[2]).unwrap_or(Vec3::E3);
                // re-orthogonalize against numerical drift
                let v2 = (v2 - v0 * v0.dot(v2)).try_normalize().unwrap_or(any_orthogonal(v0));
                let v1 = v2.cross(v0);
                [v0, v1, v2].map(canonicalize)
            }
            Multiplicity::PairAt(lower) => {
                let simple = if lower == 0 { 2 } else { 0 };
                let vs = canonicalize(simple_eigenvector(a, values[simple]).unwrap_or(Vec3::E3));
                let p = canonicalize(any_orthogonal(vs));
                let q = canonicalize(vs.cross(p));
                if simple == 2 {
                    [p, q, vs]
                } else {
                    [vs, p, q]
                }
            }
        }
    };
    SymmetricEigen { values, vectors }
}

fn diagonal_vectors(a: &Mat3, multiplicity: Multiplicity) -> [Vec3; 3] {
    let d = [a.m[0][0], a.m[1][1], a.m[2][2]];
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    if matches!(multiplicity, Multiplicity::Isotropic) {
        return [Vec3::E1, Vec3::E2, Vec3::E3];
    }
    idx.map(Vec3::basis)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Multiplicity {
    Distinct,
    /// Indices `lower` and `lower + 1` carry the repeated eigenvalue.
    PairAt(usize),
    Isotropic,
}

/// Full decomposition assuming distinct eigenvalues unless they are exactly
/// equal; used where no spectrum tolerance applies.
pub fn symmetric_eigen(a: &Mat3) -> SymmetricEigen {
    let vals = eigenvalues(a);
    let mult = if vals[0] == vals[2] {
        Multiplicity::Isotropic
    } else if vals[0] == vals[1] {
        Multiplicity::PairAt(0)
    } else if vals[1] == vals[2] {
        Multiplicity::PairAt(1)
    } else {
        Multiplicity::Distinct
    };
    decompose(a, vals, mult)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::so3::random_rotation;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rotated_double_root_stays_double() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..2000 {
            let l = rng.random_range(0.1..5.0);
            let m = l + rng.random_range(0.1..5.0);
            let d = if rng.random_bool(0.5) { [l, l, m] } else { [l, m, m] };
            let q = *random_rotation(&mut rng).matrix();
            let a = q * Mat3::diag(d) * q.transpose();
            let v = eigenvalues(&((a + a.transpose()) * 0.5));
            let pair = if d[0] == d[1] { v[1] - v[0] } else { v[2] - v[1] };
            assert!(pair.abs() < 1e-13 * m, "{v:?} from {d:?}");
        }
    }

    #[test]
    fn diagonal_input_is_exact() {
        let e = symmetric_eigen(&Mat3::diag([5.0, 1.0, 3.0]));
        assert_eq!(e.values, [1.0, 3.0, 5.0]);
        assert_eq!(e.vectors, [Vec3::E2, Vec3::E3, Vec3::E1]);
    }

    #[test]
    fn random_rotated_spectra() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..500 {
            let mut d = [
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
                rng.random_range(-3.0..3.0),
            ];
            d.sort_by(f64::total_cmp);
            if d[1] - d[0] < 1e-3 || d[2] - d[1] < 1e-3 {
                continue;
            }
            let r = *random_rotation(&mut rng).matrix();
            let a = r * Mat3::diag(d) * r.transpose();
            let e = symmetric_eigen(&a);
            for i in 0..3 {
                assert!((e.values[i] - d[i]).abs() < 1e-12 * (1.0 + d[2].abs()) * 10.0);
                let v = e.vectors[i];
                assert!((a * v - v * e.values[i]).norm() < 1e-9);
                for j in 0..3 {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((v.dot(e.vectors[j]) - expect).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn repeated_eigenvalue_gets_a_plane_basis() {
        let r = *random_rotation(&mut ChaCha8Rng::seed_from_u64(5)).matrix();
        let a = r * Mat3::diag([1.0, 1.0, 5.0]) * r.transpose();
        let vals = eigenvalues(&a);
        let e = decompose(&a, vals, Multiplicity::PairAt(0));
        for i in 0..3 {
            let v = e.vectors[i];
            assert!((a * v - v * vals[i]).norm() < 1e-9, "{i}");
        }
    }
}
