//! Constructive reduction of a system to one of the five standard forms by a
//! composition of elementary changes of variables: an orientation flip, a
//! triangular move anchoring a cone witness, a global scale fixing one
//! eigenvalue, and a rotation or hyperbolic boost aligning a second eigenline.

use crate::algebra::{
    cone_classify, subspace_cone_witness, transform_system, ConeClass, Gl2Transform, SystemRep,
    SIGN_TOL,
};
use crate::classify::classify;
use crate::eigen::{eigen_decompose, RealEigenpair, CLUSTER_TOL};
use crate::templates::{FormTag, StandardForm};
use nalgebra::{Matrix2, Matrix3, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalizeError {
    #[error("neither solvability assumption holds for this system")]
    AssumptionNotSatisfied,
    #[error("degenerate witness: {0}")]
    DegenerateWitness(String),
    #[error("numerically degenerate reduction: {0}")]
    NumericallyDegenerate(String),
}

fn degenerate(msg: &str) -> NormalizeError {
    NormalizeError::NumericallyDegenerate(msg.to_string())
}

/// One elementary change of variables in the reduction chain.
#[derive(Debug, Clone)]
pub struct NormalizationStep {
    pub name: &'static str,
    pub transform: Gl2Transform,
}

#[derive(Debug, Clone)]
pub struct NormalizationResult {
    /// Composition of all steps, first step applied first.
    pub m_total: Gl2Transform,
    pub steps: Vec<NormalizationStep>,
    pub form: StandardForm,
    /// The fully transformed system; its matrix part equals the built
    /// standard form, its potential part is whatever the change of variables
    /// produced.
    pub a_standard: SystemRep,
}

impl NormalizationResult {
    pub fn form_tag(&self) -> FormTag {
        self.form.tag()
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        self.form.params()
    }
}

fn gl2(a: f64, b: f64, c: f64, d: f64) -> Gl2Transform {
    Gl2Transform::new(Matrix2::new(a, b, c, d)).expect("construction keeps the determinant nonzero")
}

fn flip() -> Gl2Transform {
    gl2(1.0, 0.0, 0.0, -1.0)
}

/// Running state of a reduction: current system, accumulated transform, and
/// the analytically tracked role eigenvalues (each divided by the running
/// determinant, per the eigenvalue transport law).
struct Pipeline {
    cur: SystemRep,
    m_total: Gl2Transform,
    steps: Vec<NormalizationStep>,
    tracked: Vec<f64>,
}

impl Pipeline {
    fn new(s: &SystemRep, tracked: Vec<f64>) -> Self {
        Pipeline {
            cur: *s,
            m_total: Gl2Transform::identity(),
            steps: Vec::new(),
            tracked,
        }
    }

    fn apply(&mut self, name: &'static str, m: Gl2Transform) {
        self.cur = transform_system(&self.cur, &m);
        self.m_total = self.m_total.then(&m);
        for t in &mut self.tracked {
            *t /= m.det;
        }
        self.steps.push(NormalizationStep { name, transform: m });
    }

    fn pair_near(&self, target: f64) -> Result<RealEigenpair, NormalizeError> {
        let eigen = eigen_decompose(&self.cur, CLUSTER_TOL);
        let tol = 1e-6 * (1.0 + target.abs());
        eigen
            .eigenvalue_near(target, tol)
            .cloned()
            .ok_or_else(|| degenerate(&format!("lost track of the eigenvalue near {target:.9}")))
    }

    /// Eigenpair of the tracked role `i`, refreshing the tracked value with
    /// the numerically observed one.
    fn role(&mut self, i: usize) -> Result<RealEigenpair, NormalizeError> {
        let pair = self.pair_near(self.tracked[i])?;
        self.tracked[i] = pair.value;
        Ok(pair)
    }

    fn finish(self, form: StandardForm) -> Result<NormalizationResult, NormalizeError> {
        let built = form
            .build()
            .map_err(|e| degenerate(&format!("extracted parameters were rejected: {e}")))?;
        let scale = self.cur.a.amax().max(built.a.amax()).max(1.0);
        if (self.cur.a - built.a).amax() > 1e-7 * scale {
            return Err(degenerate(
                "reduced matrix does not reproduce its standard form",
            ));
        }
        Ok(NormalizationResult {
            m_total: self.m_total,
            steps: self.steps,
            form,
            a_standard: self.cur,
        })
    }
}

fn unit_witness(pair: &RealEigenpair) -> Result<Vector3<f64>, NormalizeError> {
    subspace_cone_witness(&pair.eigenbasis, SIGN_TOL).ok_or_else(|| {
        NormalizeError::DegenerateWitness(format!(
            "eigenvalue {:.9} lost its cone witness",
            pair.value
        ))
    })
}

/// Triangular move sending an open-cone direction `p` (unit, first component
/// positive) onto the ray through (1, 0, 1). Determinant sqrt(p1 p3 - p2^2).
fn anchor_plus(p: &Vector3<f64>) -> Result<Gl2Transform, NormalizeError> {
    let disc = p[0] * p[2] - p[1] * p[1];
    if p[0] <= SIGN_TOL || disc <= SIGN_TOL {
        return Err(NormalizeError::DegenerateWitness(
            "cone witness sits too close to the boundary".to_string(),
        ));
    }
    let root = p[0].sqrt();
    Ok(gl2(root, p[1] / root, 0.0, (disc / p[0]).sqrt()))
}

/// Factor a boundary direction v (v1 v3 = v2^2) as the squares vector of a
/// real 2-vector x: v is proportional to (x1^2, x1 x2, x2^2).
fn boundary_factor(v: &Vector3<f64>) -> Result<(f64, f64), NormalizeError> {
    let v = if v[0] + v[2] < 0.0 { -v } else { *v };
    let sum = v[0] + v[2];
    if sum <= 1e-12 * v.norm() {
        return Err(degenerate("direction is not on the cone boundary"));
    }
    let w1 = 2.0 * v[0] / sum;
    let w2 = 2.0 * v[1] / sum;
    if w1 <= 1e-14 {
        // The line through (0, 0, 1).
        return Ok((0.0, std::f64::consts::SQRT_2));
    }
    Ok((w1.sqrt(), w2 / w1.sqrt()))
}

/// Rotate so the cone witness of the tracked role lands on the horizontal
/// plane, making its eigenline of the form (1, 0, k).
fn rotate_role_to_axis(pipe: &mut Pipeline, i: usize) -> Result<(), NormalizeError> {
    let pair = pipe.role(i)?;
    let q = unit_witness(&pair)?;
    if q[1].abs() > 1e-14 {
        let theta = 0.5 * (2.0 * q[1]).atan2(q[2] - q[0]);
        let (s, c) = theta.sin_cos();
        pipe.apply("rotate_second_witness", gl2(c, -s, s, c));
    }
    Ok(())
}

/// Read the eigenline of role `i`, expected of the form (1, 0, sign * k)
/// after alignment; returns k.
fn read_axis_ratio(pipe: &mut Pipeline, i: usize, sign: f64) -> Result<f64, NormalizeError> {
    let pair = pipe.role(i)?;
    let v = pair.eigenbasis[0];
    if v[1].abs() > 1e-7 * v.norm() {
        return Err(degenerate(
            "eigenline failed to align with the anchor plane",
        ));
    }
    if v[0].abs() <= 1e-9 * v.norm() {
        return Err(degenerate(
            "aligned eigenline degenerated to the vertical axis",
        ));
    }
    Ok(sign * v[2] / v[0])
}

/// Swap the two field components when k > 1, bringing the second eigenline
/// ratio into (0, 1).
fn swap_into_unit(pipe: &mut Pipeline, k: f64, i: usize, sign: f64) -> Result<f64, NormalizeError> {
    if !(k > SIGN_TOL) {
        return Err(degenerate("second eigenline ratio lost its sign"));
    }
    if (k - 1.0).abs() <= 1e-9 {
        return Err(degenerate("second eigenline collides with the anchor line"));
    }
    if k < 1.0 {
        return Ok(k);
    }
    pipe.apply("swap_to_unit_interval", gl2(0.0, 1.0, -1.0, 0.0));
    read_axis_ratio(pipe, i, sign)
}

/// Representative (eta2, 1, eta3) of an eigenspace: the basis vector with the
/// largest second component, scaled to second component one.
fn eta23_from(pair: &RealEigenpair) -> Result<(f64, f64), NormalizeError> {
    let v = pair
        .eigenbasis
        .iter()
        .max_by(|u, w| u[1].abs().total_cmp(&w[1].abs()))
        .ok_or_else(|| degenerate("empty eigenbasis"))?;
    if v[1].abs() <= 1e-9 * v.norm() {
        return Err(degenerate(
            "transversal eigenvector has no second component",
        ));
    }
    Ok((v[0] / v[1], v[2] / v[1]))
}

/// Reduction under the first assumption: the pair eigenvalues stay as the
/// free parameters while the remaining eigenvalue is scaled onto its slot.
pub fn normalize_assumption1(s: &SystemRep) -> Result<NormalizationResult, NormalizeError> {
    let class = classify(s);
    let Some(as1) = class.assumption1 else {
        return Err(NormalizeError::AssumptionNotSatisfied);
    };
    let eigen = &class.eigen;
    match eigen.real.len() {
        3 => {
            let l0 = eigen
                .real
                .iter()
                .map(|p| p.value)
                .find(|&v| v != as1.lambda1 && v != as1.lambda2)
                .expect("three distinct real eigenvalues");
            if l0 == 0.0 {
                reduce_a13(s, as1.lambda1, as1.lambda2)
            } else {
                reduce_a11(s, as1.lambda1, as1.lambda2, l0)
            }
        }
        2 => reduce_a12(s, eigen),
        _ => Err(NormalizeError::AssumptionNotSatisfied),
    }
}

/// Three distinct eigenvalues, the non-pair eigenvalue nonzero.
fn reduce_a11(
    s: &SystemRep,
    l1: f64,
    l2: f64,
    l0: f64,
) -> Result<NormalizationResult, NormalizeError> {
    // Roles: 0 and 1 hold the pair (descending), 2 holds the spare
    // eigenvalue headed for the unit slot.
    let mut pipe = Pipeline::new(s, vec![l1, l2, l0]);
    if l0 < 0.0 {
        pipe.apply("orient_flip", flip());
        pipe.tracked.swap(0, 1);
    }
    let p = unit_witness(&pipe.role(0)?)?;
    pipe.apply("anchor_cone_witness", anchor_plus(&p)?);
    let l0_cur = pipe.role(2)?.value;
    if l0_cur <= 0.0 {
        return Err(degenerate("unit-slot eigenvalue lost positivity"));
    }
    let root = l0_cur.sqrt();
    pipe.apply(
        "scale_unit_eigenvalue",
        Gl2Transform::diagonal(root, root).expect("nonzero scale"),
    );
    rotate_role_to_axis(&mut pipe, 1)?;
    let k = read_axis_ratio(&mut pipe, 1, 1.0)?;
    let k = swap_into_unit(&mut pipe, k, 1, 1.0)?;
    let eta1 = k / (1.0 - k);
    let lambda1 = pipe.role(0)?.value;
    let lambda2 = pipe.role(1)?.value;
    let (eta2, eta3) = eta23_from(&pipe.role(2)?)?;
    pipe.finish(StandardForm::A11 {
        lambda1,
        lambda2,
        eta1,
        eta2,
        eta3,
    })
}

/// Three distinct eigenvalues with a kernel: the more negative pair member is
/// scaled to -1 and the kernel carries the transversal parameters.
fn reduce_a13(s: &SystemRep, l1: f64, l2: f64) -> Result<NormalizationResult, NormalizeError> {
    // Roles: 0 keeps the surviving free eigenvalue, 1 the member scaled to
    // -1; the kernel needs no tracking.
    let mut pipe = Pipeline::new(s, vec![l1, l2]);
    if l1 + l2 > 0.0 {
        pipe.apply("orient_flip", flip());
        pipe.tracked.swap(0, 1);
    }
    let p = unit_witness(&pipe.role(0)?)?;
    pipe.apply("anchor_cone_witness", anchor_plus(&p)?);
    let l2_cur = pipe.role(1)?.value;
    if l2_cur >= 0.0 {
        return Err(degenerate("minus-slot eigenvalue lost negativity"));
    }
    let root = (-l2_cur).sqrt();
    pipe.apply(
        "scale_unit_eigenvalue",
        Gl2Transform::diagonal(root, root).expect("nonzero scale"),
    );
    rotate_role_to_axis(&mut pipe, 1)?;
    let k = read_axis_ratio(&mut pipe, 1, 1.0)?;
    let k = swap_into_unit(&mut pipe, k, 1, 1.0)?;
    let eta1 = k / (1.0 - k);
    let mut lambda1 = pipe.role(0)?.value;
    if (lambda1 - 1.0).abs() <= 1e-9 {
        lambda1 = 1.0;
    }
    let kernel = pipe.pair_near(0.0)?;
    let (eta2, eta3) = eta23_from(&kernel)?;
    pipe.finish(StandardForm::A13 {
        lambda1,
        eta1,
        eta2,
        eta3,
    })
}

/// Repeated eigenvalue of multiplicity two: the repeated value is scaled to
/// one and its generalized structure supplies the shear parameter.
fn reduce_a12(
    s: &SystemRep,
    eigen: &crate::eigen::EigenStructure,
) -> Result<NormalizationResult, NormalizeError> {
    let repeated = eigen
        .real
        .iter()
        .find(|p| p.algebraic_multiplicity == 2)
        .ok_or(NormalizeError::AssumptionNotSatisfied)?;
    let simple = eigen
        .real
        .iter()
        .find(|p| p.algebraic_multiplicity == 1)
        .ok_or(NormalizeError::AssumptionNotSatisfied)?;
    if repeated.value == 0.0 || simple.value == 0.0 {
        return Err(NormalizeError::AssumptionNotSatisfied);
    }
    // Roles: 0 is the repeated eigenvalue headed for the unit slot, 1 the
    // simple one that stays free.
    let mut pipe = Pipeline::new(s, vec![repeated.value, simple.value]);
    if repeated.value < 0.0 {
        pipe.apply("orient_flip", flip());
    }
    let p = unit_witness(&pipe.role(0)?)?;
    pipe.apply("anchor_cone_witness", anchor_plus(&p)?);
    let l0_cur = pipe.role(0)?.value;
    if l0_cur <= 0.0 {
        return Err(degenerate("unit-slot eigenvalue lost positivity"));
    }
    let root = l0_cur.sqrt();
    pipe.apply(
        "scale_unit_eigenvalue",
        Gl2Transform::diagonal(root, root).expect("nonzero scale"),
    );
    rotate_role_to_axis(&mut pipe, 1)?;
    let k = read_axis_ratio(&mut pipe, 1, 1.0)?;
    let k = swap_into_unit(&mut pipe, k, 1, 1.0)?;
    let eta1 = k / (1.0 - k);
    let lambda = pipe.role(1)?.value;

    let unit_pair = pipe.role(0)?;
    let form = if unit_pair.geometric_multiplicity() >= 2 {
        let (eta2, eta3) = eta23_from(&unit_pair)?;
        StandardForm::A12 {
            lambda,
            eta1,
            eta2,
            eta3,
            eta4: 0.0,
        }
    } else {
        // Jordan block at the unit eigenvalue: extract the shear from a
        // generalized vector with nonzero second component.
        let w = unit_pair
            .generalized_basis
            .iter()
            .max_by(|u, v| u[1].abs().total_cmp(&v[1].abs()))
            .ok_or_else(|| degenerate("empty generalized eigenbasis"))?;
        if w[1].abs() <= 1e-9 * w.norm() {
            return Err(degenerate("generalized vector has no second component"));
        }
        let w = w / w[1];
        let x = (pipe.cur.a - Matrix3::identity()) * w;
        let scale = pipe.cur.a.amax().max(1.0);
        if x[1].abs() > 1e-6 * scale || (x[0] - x[2]).abs() > 1e-6 * scale {
            return Err(degenerate("generalized image is not along the anchor"));
        }
        StandardForm::A12 {
            lambda,
            eta1,
            eta2: w[0],
            eta3: w[2],
            eta4: 0.5 * (x[0] + x[2]),
        }
    };
    pipe.finish(form)
}

/// Reduction under the second assumption, dispatching on the cone position
/// of the two non-definite eigenlines.
pub fn normalize_assumption2(s: &SystemRep) -> Result<NormalizationResult, NormalizeError> {
    let class = classify(s);
    let Some(as2) = class.assumption2 else {
        return Err(NormalizeError::AssumptionNotSatisfied);
    };
    // Roles: 0 and 1 hold the pair (descending), 2 the definite eigenvalue
    // headed for -1.
    let mut pipe = Pipeline::new(s, vec![as2.lambda1, as2.lambda2, as2.lambda3]);
    if as2.lambda3 > 0.0 {
        pipe.apply("orient_flip", flip());
        pipe.tracked.swap(0, 1);
    }
    let v1 = pipe.role(0)?.eigenbasis[0];
    let v2 = pipe.role(1)?.eigenbasis[0];
    let c1 = cone_classify(v1, SIGN_TOL).cone_class;
    let c2 = cone_classify(v2, SIGN_TOL).cone_class;
    match (c1, c2) {
        (ConeClass::Zero, ConeClass::Zero) => reduce_a21(pipe, &v1, &v2),
        (ConeClass::Minus, ConeClass::Minus) => reduce_a22_boost(pipe),
        (ConeClass::Zero, ConeClass::Minus) => reduce_a22_axis(pipe, 1, 0),
        (ConeClass::Minus, ConeClass::Zero) => reduce_a22_axis(pipe, 0, 1),
        _ => Err(degenerate("pair eigenline entered the open cone")),
    }
}

/// Both pair eigenlines on the cone boundary: frame them onto the axes and
/// balance the definite eigenvector symmetrically.
fn reduce_a21(
    mut pipe: Pipeline,
    v1: &Vector3<f64>,
    v2: &Vector3<f64>,
) -> Result<NormalizationResult, NormalizeError> {
    let x1 = boundary_factor(v1)?;
    let x2 = boundary_factor(v2)?;
    let bracket = x1.0 * x2.1 - x1.1 * x2.0;
    if bracket.abs() <= 1e-9 {
        return Err(degenerate("boundary eigenlines coincide"));
    }
    let s0 = bracket.signum();
    pipe.apply("boundary_frame", gl2(s0 * x1.0, s0 * x1.1, x2.0, x2.1));
    let p3 = pipe.role(2)?;
    let (e2p, e3p) = eta23_from(&p3)?;
    if e2p * e3p <= 1.0 + SIGN_TOL {
        return Err(degenerate("definite eigenvector left the open cone"));
    }
    let l3_cur = p3.value;
    if l3_cur >= 0.0 {
        return Err(degenerate("definite eigenvalue lost negativity"));
    }
    let r = (e2p / e3p).powf(0.25);
    let sc = (-l3_cur).sqrt();
    pipe.apply(
        "balance_axes",
        Gl2Transform::diagonal(r * sc, sc / r).expect("nonzero scale"),
    );
    let eta = e2p.signum() * (e2p * e3p).sqrt();
    let lambda1 = pipe.role(0)?.value;
    let lambda2 = pipe.role(1)?.value;
    pipe.finish(StandardForm::A21 {
        lambda1,
        lambda2,
        eta,
    })
}

/// Exactly one pair eigenline on the boundary: send it to the horizontal
/// axis, then complete the indefinite one onto the mixed anchor.
fn reduce_a22_axis(
    mut pipe: Pipeline,
    minus_role: usize,
    zero_role: usize,
) -> Result<NormalizationResult, NormalizeError> {
    let vz = pipe.role(zero_role)?.eigenbasis[0];
    let x = boundary_factor(&vz)?;
    let m1 = if x.0.abs() > 1e-9 {
        gl2(x.0, x.1, 0.0, 1.0 / x.0)
    } else {
        let r = std::f64::consts::SQRT_2;
        gl2(0.0, r, -1.0 / r, 0.0)
    };
    pipe.apply("boundary_to_axis", m1);
    let vm = pipe.role(minus_role)?.eigenbasis[0];
    if vm[2].abs() <= 1e-9 * vm.norm() {
        return Err(degenerate("indefinite eigenline lost its third component"));
    }
    let (a, b) = (vm[0] / vm[2], vm[1] / vm[2]);
    let h2 = b * b - a;
    if h2 <= 1e-12 {
        return Err(degenerate(
            "indefinite eigenline collapsed onto the boundary",
        ));
    }
    let l3_cur = pipe.role(2)?.value;
    if l3_cur >= 0.0 {
        return Err(degenerate("definite eigenvalue lost negativity"));
    }
    let c = (-l3_cur).sqrt() * h2.powf(-0.25);
    let h = h2.sqrt();
    pipe.apply("complete_to_anchor", gl2(c * h, 0.0, c * b, c));
    let lambda1 = pipe.role(minus_role)?.value;
    let lambda2 = pipe.role(zero_role)?.value;
    let (eta2, eta3) = eta23_from(&pipe.role(2)?)?;
    pipe.finish(StandardForm::A22 {
        lambda1,
        lambda2,
        eta1: 0.0,
        eta2,
        eta3,
    })
}

/// Both pair eigenlines indefinite: anchor the larger one on the mixed ray,
/// boost the other symmetric about it, and scale the definite eigenvalue.
fn reduce_a22_boost(mut pipe: Pipeline) -> Result<NormalizationResult, NormalizeError> {
    let p = pipe.role(0)?.eigenbasis[0];
    let m1 = if p[0].abs() > 1e-9 {
        let h = (p[1] * p[1] - p[0] * p[2]).sqrt();
        let s0 = p[0].signum();
        gl2(s0 * p[0], s0 * p[1], 0.0, h)
    } else if p[2].abs() > 1e-9 {
        let s0 = (p[1] * p[2]).signum();
        gl2(s0 * p[1], 0.0, p[1], p[2])
    } else {
        gl2(1.0, 1.0, -1.0, 1.0)
    };
    pipe.apply("anchor_minus_witness", m1);

    let q = pipe.role(1)?.eigenbasis[0];
    let denom = q[0] + q[2];
    if denom.abs() - 2.0 * q[1].abs() <= SIGN_TOL * q.norm() {
        return Err(degenerate(
            "pair eigenlines are not hyperbolically separated",
        ));
    }
    let tau = 0.5 * (2.0 * q[1] / denom).atanh();
    if tau.abs() > 1e-14 {
        pipe.apply(
            "boost_align",
            gl2(tau.cosh(), tau.sinh(), tau.sinh(), tau.cosh()),
        );
    }
    let k = read_axis_ratio(&mut pipe, 1, -1.0)?;
    let k = swap_into_unit(&mut pipe, k, 1, -1.0)?;
    let eta1 = k / (1.0 - k);

    let l3_cur = pipe.role(2)?.value;
    if l3_cur >= 0.0 {
        return Err(degenerate("definite eigenvalue lost negativity"));
    }
    let root = (-l3_cur).sqrt();
    pipe.apply(
        "scale_third_eigenvalue",
        Gl2Transform::diagonal(root, root).expect("nonzero scale"),
    );
    let lambda1 = pipe.role(0)?.value;
    let lambda2 = pipe.role(1)?.value;
    let (eta2, eta3) = eta23_from(&pipe.role(2)?)?;
    pipe.finish(StandardForm::A22 {
        lambda1,
        lambda2,
        eta1,
        eta2,
        eta3,
    })
}

/// Reduce a system to its standard form under whichever solvability
/// assumption it satisfies.
pub fn normalize(s: &SystemRep) -> Result<NormalizationResult, NormalizeError> {
    let class = classify(s);
    if class.assumption1.is_some() {
        normalize_assumption1(s)
    } else if class.assumption2.is_some() {
        normalize_assumption2(s)
    } else {
        Err(NormalizeError::AssumptionNotSatisfied)
    }
}
