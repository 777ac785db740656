//! Coefficient <-> matrix-vector correspondence, quadratic observables, cone
//! membership, and the GL2 change-of-variables calculus.

use nalgebra::{Matrix2, Matrix3, Vector3};
use num_complex::Complex64;
use thiserror::Error;

pub type C64 = Complex64;

/// Default relative tolerance for sign decisions on derived quadratic
/// quantities. Discriminants are homogeneous in the inputs, so every test
/// normalizes its inputs and compares against this band.
pub const SIGN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("subspace basis is empty")]
    EmptyBasis,
    #[error("change-of-variables matrix is singular")]
    SingularTransform,
}

/// The twelve real coupling constants, ordered by the monomial basis
/// (|u1|^2 u1, |u1|^2 u2, u1^2 conj(u2), u1 |u2|^2, conj(u1) u2^2, |u2|^2 u2)
/// for the first equation followed by the same six monomials for the second.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientVector {
    pub c: [f64; 12],
}

impl CoefficientVector {
    pub fn new(c: [f64; 12]) -> Self {
        CoefficientVector { c }
    }

    pub fn zero() -> Self {
        CoefficientVector { c: [0.0; 12] }
    }
}

/// Matrix-vector representation of a system: `a` acts on the quadratic
/// observable vector (rho1, R, rho2), `v` collects the common-phase potential
/// (its contribution to both equations is V(u) * u_j with real V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemRep {
    pub a: Matrix3<f64>,
    pub v: Vector3<f64>,
}

impl SystemRep {
    pub fn new(a: Matrix3<f64>, v: Vector3<f64>) -> Self {
        SystemRep { a, v }
    }

    pub fn zero() -> Self {
        SystemRep {
            a: Matrix3::zeros(),
            v: Vector3::zeros(),
        }
    }

    /// Scale used to make tolerance bands relative.
    pub fn scale(&self) -> f64 {
        let a = self.a.amax();
        let v = self.v.amax();
        a.max(v).max(1.0)
    }
}

pub fn coefficients_to_system(cv: &CoefficientVector) -> SystemRep {
    let [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12] = cv.c;
    let a = Matrix3::new(
        c2 - c3,
        -c1 + c8 - c9,
        -c7,
        c5,
        -c3 + c11,
        -c9,
        c6,
        -c4 + c5 + c12,
        -c10 + c11,
    );
    let v = Vector3::new(
        c8 - 2.0 * c9,
        0.5 * (-c2 + 2.0 * c3 - c10 + 2.0 * c11),
        c4 - 2.0 * c5,
    );
    SystemRep { a, v }
}

pub fn system_to_coefficients(s: &SystemRep) -> CoefficientVector {
    let a = &s.a;
    let q = &s.v;
    let tr = a.trace();
    let c1 = -(a[(0, 1)] + a[(1, 2)]) + q[0];
    let c2 = 2.0 * a[(0, 0)] - 0.5 * tr + q[1];
    let c3 = a[(0, 0)] - 0.5 * tr + q[1];
    let c4 = 2.0 * a[(1, 0)] + q[2];
    let c5 = a[(1, 0)];
    let c6 = a[(2, 0)];
    let c7 = -a[(0, 2)];
    let c8 = -2.0 * a[(1, 2)] + q[0];
    let c9 = -a[(1, 2)];
    let c10 = -2.0 * a[(2, 2)] + 0.5 * tr + q[1];
    let c11 = -a[(2, 2)] + 0.5 * tr + q[1];
    let c12 = a[(1, 0)] + a[(2, 1)] + q[2];
    CoefficientVector {
        c: [c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12],
    }
}

/// A pointwise state (phi1, phi2) of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPair {
    pub phi1: C64,
    pub phi2: C64,
}

impl FieldPair {
    pub fn new(phi1: C64, phi2: C64) -> Self {
        FieldPair { phi1, phi2 }
    }

    pub fn from_re(x1: f64, x2: f64) -> Self {
        FieldPair {
            phi1: C64::new(x1, 0.0),
            phi2: C64::new(x2, 0.0),
        }
    }

    pub fn norm_sq(&self) -> f64 {
        self.phi1.norm_sqr() + self.phi2.norm_sqr()
    }
}

/// The four quadratic observables rho1 = |phi1|^2, rho2 = |phi2|^2,
/// r = 2 Re(conj(phi1) phi2), i = 2 Im(conj(phi1) phi2).
/// They satisfy r^2 + i^2 = 4 rho1 rho2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadraticObservables {
    pub rho1: f64,
    pub rho2: f64,
    pub r: f64,
    pub i: f64,
}

impl QuadraticObservables {
    pub fn of(p: &FieldPair) -> Self {
        let cross = p.phi1.conj() * p.phi2;
        QuadraticObservables {
            rho1: p.phi1.norm_sqr(),
            rho2: p.phi2.norm_sqr(),
            r: 2.0 * cross.re,
            i: 2.0 * cross.im,
        }
    }

    pub fn dot(&self, a: &Vector3<f64>) -> f64 {
        self.rho1 * a[0] + self.r * a[1] + self.rho2 * a[2]
    }
}

/// Q(a)(p) = rho1 a1 + r a2 + rho2 a3.
pub fn quadratic_form(p: &FieldPair, a: &Vector3<f64>) -> f64 {
    QuadraticObservables::of(p).dot(a)
}

/// Symmetric 2x2 matrix S(a) with Q(a)(p) = conj(phi)^T S(a) phi.
pub fn symmetric_gram(a: &Vector3<f64>) -> Matrix2<f64> {
    Matrix2::new(a[0], a[1], a[1], a[2])
}

/// Eigenvalue bounds (kappa_minus, kappa_plus) of S(a):
/// kappa_minus * |phi|^2 <= Q(a)(phi) <= kappa_plus * |phi|^2.
pub fn gram_bounds(a: &Vector3<f64>) -> (f64, f64) {
    let half_sum = 0.5 * (a[0] + a[2]);
    let rad = (0.25 * (a[0] - a[2]).powi(2) + a[1] * a[1]).sqrt();
    (half_sum - rad, half_sum + rad)
}

/// Discriminant a1 a3 - a2^2 of an observable direction; positive inside the
/// open convex cone where Q(a) is sign-definite.
pub fn cone_disc(a: &Vector3<f64>) -> f64 {
    a[0] * a[2] - a[1] * a[1]
}

/// Polarization of the discriminant: disc(s p + t q) =
/// s^2 disc(p) + s t mixed(p, q) + t^2 disc(q).
pub fn mixed_disc(p: &Vector3<f64>, q: &Vector3<f64>) -> f64 {
    p[0] * q[2] + p[2] * q[0] - 2.0 * p[1] * q[1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeClass {
    /// a1 a3 > a2^2: Q(a) is definite, equivalent to |phi1|^2 + |phi2|^2.
    Plus,
    /// a1 a3 = a2^2: boundary of the cone.
    Zero,
    /// a1 a3 < a2^2: Q(a) is indefinite.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeVector {
    pub a: Vector3<f64>,
    pub cone_class: ConeClass,
    pub tol: f64,
}

/// Classify a single observable direction. `tol` is relative: the decision
/// band is `tol * |a|^2` around zero discriminant.
pub fn cone_classify(a: Vector3<f64>, tol: f64) -> ConeVector {
    assert!(tol >= 0.0, "tolerance must be non-negative");
    let scale = a.norm_squared().max(f64::MIN_POSITIVE);
    let disc = cone_disc(&a);
    let cone_class = if disc > tol * scale {
        ConeClass::Plus
    } else if disc < -tol * scale {
        ConeClass::Minus
    } else {
        ConeClass::Zero
    };
    ConeVector { a, cone_class, tol }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeTarget {
    /// Does the span contain a direction with positive discriminant?
    Plus,
    /// Does the span contain a nonzero direction with zero discriminant?
    ZeroNontrivially,
}

/// Gram-type 2x2 matrix of the discriminant restricted to span{p, q} with
/// unit-normalized basis; its largest eigenvalue is positive exactly when the
/// span meets the open cone.
fn span2_disc_matrix(p: &Vector3<f64>, q: &Vector3<f64>) -> Matrix2<f64> {
    let alpha = cone_disc(p);
    let gamma = cone_disc(q);
    let beta = mixed_disc(p, q);
    Matrix2::new(alpha, 0.5 * beta, 0.5 * beta, gamma)
}

fn sym2_eigen(m: &Matrix2<f64>) -> (f64, f64) {
    let half_sum = 0.5 * (m[(0, 0)] + m[(1, 1)]);
    let rad = (0.25 * (m[(0, 0)] - m[(1, 1)]).powi(2) + m[(0, 1)] * m[(0, 1)]).sqrt();
    (half_sum - rad, half_sum + rad)
}

/// Eigenvector of the larger eigenvalue of a symmetric 2x2 matrix.
fn sym2_top_eigenvector(m: &Matrix2<f64>, lambda_max: f64) -> (f64, f64) {
    // (m - lambda I) annihilates the eigenvector; pick the larger residual row.
    let r1 = (m[(0, 0)] - lambda_max, m[(0, 1)]);
    let r2 = (m[(1, 0)], m[(1, 1)] - lambda_max);
    let (a, b) = if r1.0.hypot(r1.1) >= r2.0.hypot(r2.1) {
        r1
    } else {
        r2
    };
    let n = a.hypot(b);
    if n < f64::MIN_POSITIVE {
        (1.0, 0.0)
    } else {
        (-b / n, a / n)
    }
}

/// Whether span(basis) meets the open cone (`Plus`) or touches its boundary
/// away from the origin (`ZeroNontrivially`). Basis vectors must be linearly
/// independent; `tol` is the relative sign band.
pub fn subspace_meets_cone(
    basis: &[Vector3<f64>],
    which: ConeTarget,
    tol: f64,
) -> Result<bool, AlgebraError> {
    match basis.len() {
        0 => Err(AlgebraError::EmptyBasis),
        1 => {
            let disc = cone_disc(&basis[0].normalize());
            Ok(match which {
                ConeTarget::Plus => disc > tol,
                ConeTarget::ZeroNontrivially => disc.abs() <= tol,
            })
        }
        2 => {
            let p = basis[0].normalize();
            let q = basis[1].normalize();
            let g = span2_disc_matrix(&p, &q);
            let (lo, hi) = sym2_eigen(&g);
            Ok(match which {
                ConeTarget::Plus => hi > tol,
                // A nonzero root of the restricted discriminant exists exactly
                // when the quadratic form on the span is not definite.
                ConeTarget::ZeroNontrivially => lo * hi <= tol || lo.abs() <= tol,
            })
        }
        _ => Ok(true),
    }
}

/// An explicit direction in span(basis) with positive discriminant, if one
/// exists. The witness has unit norm and positive first component.
pub fn subspace_cone_witness(basis: &[Vector3<f64>], tol: f64) -> Option<Vector3<f64>> {
    let v = match basis.len() {
        0 => return None,
        1 => {
            let p = basis[0].normalize();
            if cone_disc(&p) <= tol {
                return None;
            }
            p
        }
        2 => {
            let p = basis[0].normalize();
            let q = basis[1].normalize();
            let g = span2_disc_matrix(&p, &q);
            let (_, hi) = sym2_eigen(&g);
            if hi <= tol {
                return None;
            }
            let (s, t) = sym2_top_eigenvector(&g, hi);
            (s * p + t * q).normalize()
        }
        _ => Vector3::new(1.0, 0.0, 1.0).normalize(),
    };
    // Positive discriminant forces v[0] != 0.
    Some(if v[0] < 0.0 { -v } else { v })
}

/// An invertible real 2x2 change of variables (v1, v2) = M (u1, u2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gl2Transform {
    pub m: Matrix2<f64>,
    pub det: f64,
}

impl Gl2Transform {
    pub fn new(m: Matrix2<f64>) -> Result<Self, AlgebraError> {
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        if det == 0.0 || !det.is_finite() {
            return Err(AlgebraError::SingularTransform);
        }
        Ok(Gl2Transform { m, det })
    }

    pub fn identity() -> Self {
        Gl2Transform {
            m: Matrix2::identity(),
            det: 1.0,
        }
    }

    pub fn diagonal(d1: f64, d2: f64) -> Result<Self, AlgebraError> {
        Gl2Transform::new(Matrix2::new(d1, 0.0, 0.0, d2))
    }

    /// Composition: applying `self` first, then `next`.
    pub fn then(&self, next: &Gl2Transform) -> Gl2Transform {
        Gl2Transform {
            m: next.m * self.m,
            det: next.det * self.det,
        }
    }

    pub fn inverse(&self) -> Gl2Transform {
        let m = Matrix2::new(
            self.m[(1, 1)] / self.det,
            -self.m[(0, 1)] / self.det,
            -self.m[(1, 0)] / self.det,
            self.m[(0, 0)] / self.det,
        );
        Gl2Transform {
            m,
            det: 1.0 / self.det,
        }
    }

    pub fn apply(&self, p: &FieldPair) -> FieldPair {
        let m = &self.m;
        FieldPair {
            phi1: p.phi1 * m[(0, 0)] + p.phi2 * m[(0, 1)],
            phi2: p.phi1 * m[(1, 0)] + p.phi2 * m[(1, 1)],
        }
    }
}

/// Unit-determinant 3x3 matrix induced by M on observable directions: under
/// (v1, v2) = M (u1, u2), Q_v(dmatrix(M) a) = det(M) * Q_u(a), eigenvector
/// directions transport by a |-> dmatrix(M) a, and the cone is preserved.
pub fn dmatrix(m: &Gl2Transform) -> Matrix3<f64> {
    let (a, b, c, d) = (m.m[(0, 0)], m.m[(0, 1)], m.m[(1, 0)], m.m[(1, 1)]);
    Matrix3::new(
        d * d,
        -2.0 * c * d,
        c * c,
        -b * d,
        a * d + b * c,
        -a * c,
        b * b,
        -2.0 * a * b,
        a * a,
    ) / m.det
}

/// Closed-form inverse of [`dmatrix`]; equals dmatrix(M.inverse()) and
/// multiplies with it to the identity.
pub fn dmatrix_inverse(m: &Gl2Transform) -> Matrix3<f64> {
    let (a, b, c, d) = (m.m[(0, 0)], m.m[(0, 1)], m.m[(1, 0)], m.m[(1, 1)]);
    Matrix3::new(
        a * a,
        2.0 * a * c,
        c * c,
        a * b,
        a * d + b * c,
        c * d,
        b * b,
        2.0 * b * d,
        d * d,
    ) / m.det
}

/// Representation of the system satisfied by (v1, v2) = M (u1, u2) when
/// (u1, u2) satisfies `s`. Eigenvalues of the matrix part scale by 1/det(M);
/// trajectories map pointwise in time with no time change.
pub fn transform_system(s: &SystemRep, m: &Gl2Transform) -> SystemRep {
    let d = dmatrix(m);
    let dinv = dmatrix_inverse(m);
    SystemRep {
        a: d * s.a * dinv / m.det,
        v: d * s.v / m.det,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn approx_eq(x: f64, y: f64, tol: f64) -> bool {
        (x - y).abs() <= tol * (1.0 + x.abs().max(y.abs()))
    }

    #[test]
    fn forward_map_matches_worked_example_family() {
        // c2 = zeta + 1, c6 = zeta, c7 = 2 zeta, c10 = 2 zeta, c11 = 1.
        for &zeta in &[0.5, 2.0, -1.0, std::f64::consts::SQRT_2] {
            let mut c = [0.0; 12];
            c[1] = zeta + 1.0;
            c[5] = zeta;
            c[6] = 2.0 * zeta;
            c[9] = 2.0 * zeta;
            c[10] = 1.0;
            let s = coefficients_to_system(&CoefficientVector::new(c));
            let expect = Matrix3::new(
                zeta + 1.0,
                0.0,
                -2.0 * zeta,
                0.0,
                1.0,
                0.0,
                zeta,
                0.0,
                1.0 - 2.0 * zeta,
            );
            assert_eq!(s.a, expect);
            assert_eq!(s.v, Vector3::new(0.0, (1.0 - 3.0 * zeta) / 2.0, 0.0));
        }
    }

    #[test]
    fn forward_map_matches_second_worked_example() {
        // c1 = 6, c2 = 3, c3 = 1, c10 = -1, c12 = -4.
        let mut c = [0.0; 12];
        c[0] = 6.0;
        c[1] = 3.0;
        c[2] = 1.0;
        c[9] = -1.0;
        c[11] = -4.0;
        let s = coefficients_to_system(&CoefficientVector::new(c));
        let expect = Matrix3::new(2.0, -6.0, 0.0, 0.0, -1.0, 0.0, 0.0, -4.0, 1.0);
        assert_eq!(s.a, expect);
        assert_eq!(s.v, Vector3::zeros());
    }

    #[test]
    fn zero_coefficients_give_zero_rep() {
        let s = coefficients_to_system(&CoefficientVector::zero());
        assert_eq!(s, SystemRep::zero());
    }

    #[test]
    fn round_trip_is_exact_for_random_inputs() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        for _ in 0..1000 {
            let c: [f64; 12] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let cv = CoefficientVector::new(c);
            let back = system_to_coefficients(&coefficients_to_system(&cv));
            for k in 0..12 {
                assert!(approx_eq(c[k], back.c[k], 1e-14), "k={k}");
            }
            let a: [f64; 9] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let q: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
            let s = SystemRep::new(Matrix3::from_row_slice(&a), Vector3::from_row_slice(&q));
            let s2 = coefficients_to_system(&system_to_coefficients(&s));
            assert!((s.a - s2.a).amax() < 1e-13);
            assert!((s.v - s2.v).amax() < 1e-13);
        }
    }

    #[test]
    fn quadratic_form_examples() {
        let p = FieldPair::from_re(1.0, 0.0);
        assert_eq!(quadratic_form(&p, &Vector3::new(1.0, 0.0, 1.0)), 1.0);
        let p = FieldPair::from_re(1.0, 1.0);
        assert_eq!(quadratic_form(&p, &Vector3::new(2.0, 1.0, 2.0)), 6.0);
        let p = FieldPair::new(C64::new(1.0, 0.0), C64::new(0.0, 1.0));
        // cross term 2 Re(conj(1) * i) = 0.
        assert_eq!(quadratic_form(&p, &Vector3::new(0.0, 1.0, 0.0)), 0.0);
    }

    #[test]
    fn cone_classification_examples() {
        assert_eq!(
            cone_classify(Vector3::new(1.0, 0.0, 1.0), SIGN_TOL).cone_class,
            ConeClass::Plus
        );
        assert_eq!(
            cone_classify(Vector3::new(1.0, 1.0, 1.0), SIGN_TOL).cone_class,
            ConeClass::Zero
        );
        assert_eq!(
            cone_classify(Vector3::new(2.0, 1.0, 1.0), SIGN_TOL).cone_class,
            ConeClass::Plus
        );
        assert_eq!(
            cone_classify(Vector3::new(1.0, 2.0, 1.0), SIGN_TOL).cone_class,
            ConeClass::Minus
        );
        assert_eq!(
            cone_classify(Vector3::new(0.0, 0.0, 1.0), SIGN_TOL).cone_class,
            ConeClass::Zero
        );
    }

    #[test]
    fn coordinate_plane_meets_cone() {
        let basis = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 0.0, 1.0)];
        assert!(subspace_meets_cone(&basis, ConeTarget::Plus, SIGN_TOL).unwrap());
        let w = subspace_cone_witness(&basis, SIGN_TOL).unwrap();
        assert!(cone_disc(&w) > 0.0);
        assert!(w[0] > 0.0);
    }

    #[test]
    fn single_boundary_direction_does_not_meet_open_cone() {
        let basis = [Vector3::new(1.0, 0.0, 0.0)];
        assert!(!subspace_meets_cone(&basis, ConeTarget::Plus, SIGN_TOL).unwrap());
        assert!(subspace_meets_cone(&basis, ConeTarget::ZeroNontrivially, SIGN_TOL).unwrap());
        assert!(subspace_cone_witness(&basis, SIGN_TOL).is_none());
    }

    #[test]
    fn empty_basis_is_rejected() {
        assert_eq!(
            subspace_meets_cone(&[], ConeTarget::Plus, SIGN_TOL),
            Err(AlgebraError::EmptyBasis)
        );
    }

    #[test]
    fn full_space_always_meets_cone() {
        let basis = [
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, 0.0, 1.0),
        ];
        assert!(subspace_meets_cone(&basis, ConeTarget::Plus, SIGN_TOL).unwrap());
        let w = subspace_cone_witness(&basis, SIGN_TOL).unwrap();
        assert!(cone_disc(&w) > 0.0);
    }

    /// Dense angular sampling oracle for the two-dimensional span test.
    fn sampled_meets_cone(p: &Vector3<f64>, q: &Vector3<f64>, which: ConeTarget) -> bool {
        let n = 10_000;
        let mut best = f64::NEG_INFINITY;
        for k in 0..n {
            let th = std::f64::consts::PI * (k as f64) / (n as f64);
            let v = p * th.cos() + q * th.sin();
            let d = cone_disc(&v.normalize());
            best = best.max(d);
            if matches!(which, ConeTarget::Plus) && d > 1e-7 {
                return true;
            }
        }
        match which {
            ConeTarget::Plus => false,
            // max of the restricted discriminant >= 0 means a zero crossing
            // or a tangency exists somewhere on the circle.
            ConeTarget::ZeroNontrivially => best >= -1e-7,
        }
    }

    #[test]
    fn span2_test_agrees_with_angular_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(5150);
        let mut plus_seen = 0;
        let mut minus_seen = 0;
        for _ in 0..300 {
            let p = Vector3::new(
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
            )
            .normalize();
            let q0 = Vector3::new(
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
                rng.gen_range(-1.0..1.0f64),
            );
            if (q0 - p * q0.dot(&p)).norm() < 1e-3 {
                continue;
            }
            let q = q0.normalize();
            let basis = [p, q];
            let fast = subspace_meets_cone(&basis, ConeTarget::Plus, SIGN_TOL).unwrap();
            let slow = sampled_meets_cone(&p, &q, ConeTarget::Plus);
            assert_eq!(fast, slow, "p={p:?} q={q:?}");
            if fast {
                plus_seen += 1;
                let w = subspace_cone_witness(&basis, SIGN_TOL).unwrap();
                assert!(cone_disc(&w) > 0.0);
                // Witness must lie in the span.
                let n = p.cross(&q);
                assert!(n.dot(&w).abs() < 1e-9 * n.norm());
            } else {
                minus_seen += 1;
            }
        }
        assert!(plus_seen > 20 && minus_seen > 20);
    }

    #[test]
    fn dmatrix_of_identity_is_identity() {
        let m = Gl2Transform::identity();
        assert_eq!(dmatrix(&m), Matrix3::identity());
        assert_eq!(dmatrix_inverse(&m), Matrix3::identity());
    }

    #[test]
    fn dmatrix_of_quarter_turn() {
        let m = Gl2Transform::new(Matrix2::new(0.0, 1.0, -1.0, 0.0)).unwrap();
        let expect = Matrix3::new(0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0);
        assert_eq!(dmatrix(&m), expect);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        assert_eq!(
            Gl2Transform::new(Matrix2::new(1.0, 2.0, 2.0, 4.0)),
            Err(AlgebraError::SingularTransform)
        );
    }

    #[test]
    fn transform_by_identity_fixes_system() {
        let s = crate::templates::example_b();
        let t = transform_system(&s, &Gl2Transform::identity());
        assert!((s.a - t.a).amax() < 1e-15);
        assert!((s.v - t.v).amax() < 1e-15);
    }

    fn random_gl2(rng: &mut ChaCha8Rng) -> Gl2Transform {
        loop {
            let m = Matrix2::new(
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
                rng.gen_range(-2.0..2.0),
            );
            if let Ok(t) = Gl2Transform::new(m) {
                if t.det.abs() > 0.2 && t.det.abs() < 5.0 {
                    return t;
                }
            }
        }
    }

    #[test]
    fn dmatrix_calculus_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..1000 {
            let m = random_gl2(&mut rng);
            let d = dmatrix(&m);
            let dinv = dmatrix_inverse(&m);
            assert!(approx_eq(d.determinant(), 1.0, 1e-10));
            assert!(((d * dinv) - Matrix3::identity()).amax() < 1e-10);
            // Cone preservation with quantitative transport of the form.
            let p = FieldPair::new(
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
            let a = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let lhs = quadratic_form(&m.apply(&p), &(d * a));
            let rhs = m.det * quadratic_form(&p, &a);
            assert!(approx_eq(lhs, rhs, 1e-10));
        }
    }

    #[test]
    fn transform_scales_eigenvalues_by_inverse_det() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..200 {
            let a: [f64; 9] = core::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let q: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-2.0..2.0));
            let s = SystemRep::new(Matrix3::from_row_slice(&a), Vector3::from_row_slice(&q));
            let m = random_gl2(&mut rng);
            let t = transform_system(&s, &m);
            // Similar matrices scaled by 1/det: compare characteristic data.
            assert!(approx_eq(t.a.trace(), s.a.trace() / m.det, 1e-8));
            assert!(approx_eq(
                t.a.determinant(),
                s.a.determinant() / m.det.powi(3),
                1e-8
            ));
        }
    }

    proptest! {
        #[test]
        fn observable_identity_holds(
            re1 in -3.0..3.0f64, im1 in -3.0..3.0f64,
            re2 in -3.0..3.0f64, im2 in -3.0..3.0f64,
        ) {
            let p = FieldPair::new(C64::new(re1, im1), C64::new(re2, im2));
            let o = QuadraticObservables::of(&p);
            let lhs = o.r * o.r + o.i * o.i;
            let rhs = 4.0 * o.rho1 * o.rho2;
            prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs));
        }

        #[test]
        fn gram_bounds_enclose_form(
            a1 in -2.0..2.0f64, a2 in -2.0..2.0f64, a3 in -2.0..2.0f64,
            re1 in -2.0..2.0f64, im1 in -2.0..2.0f64,
            re2 in -2.0..2.0f64, im2 in -2.0..2.0f64,
        ) {
            let a = Vector3::new(a1, a2, a3);
            let p = FieldPair::new(C64::new(re1, im1), C64::new(re2, im2));
            let (lo, hi) = gram_bounds(&a);
            let q = quadratic_form(&p, &a);
            let n = p.norm_sq();
            prop_assert!(q >= lo * n - 1e-9 * (1.0 + n));
            prop_assert!(q <= hi * n + 1e-9 * (1.0 + n));
        }

        #[test]
        fn round_trip_identity(cs in proptest::array::uniform12(-4.0..4.0f64)) {
            let cv = CoefficientVector::new(cs);
            let back = system_to_coefficients(&coefficients_to_system(&cv));
            for k in 0..12 {
                prop_assert!((cs[k] - back.c[k]).abs() < 1e-12);
            }
        }
    }
}
