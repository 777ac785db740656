//! Builders for the five standard forms, the two worked example families,
//! and randomized inputs (parameters and GL2 disguises) used by tests,
//! benches, and parameter sweeps.

use crate::algebra::{
    coefficients_to_system, transform_system, CoefficientVector, Gl2Transform, SystemRep,
};
use nalgebra::{Matrix2, Matrix3, Vector3};
use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TemplateError {
    #[error("invalid standard-form parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FormTag {
    A11,
    A12,
    A13,
    A21,
    A22,
}

impl FormTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FormTag::A11 => "A11",
            FormTag::A12 => "A12",
            FormTag::A13 => "A13",
            FormTag::A21 => "A21",
            FormTag::A22 => "A22",
        }
    }

    pub fn parse(s: &str) -> Option<FormTag> {
        match s {
            "A11" => Some(FormTag::A11),
            "A12" => Some(FormTag::A12),
            "A13" => Some(FormTag::A13),
            "A21" => Some(FormTag::A21),
            "A22" => Some(FormTag::A22),
            _ => None,
        }
    }
}

/// Parameters of a standard form. The matrix part is reconstructed from the
/// associated eigenvector frame; the potential part of a standard form is
/// whatever the change of variables produced and is not part of the form.
///
/// Eigenvector frames (columns are eigenvectors, values in parentheses):
///
/// * `A11`: (1,0,1) (lambda1), (1+eta1,0,eta1) (lambda2), (eta2,1,eta3) (1);
/// * `A12`: as `A11` with lambda1 = 1, lambda2 = lambda, and (eta2,1,eta3) a
///   generalized eigenvector: (A - I)(eta2,1,eta3) = eta4 (1,0,1);
/// * `A13`: (1,0,1) (lambda1), (1+eta1,0,eta1) (-1), (eta2,1,eta3) (0);
/// * `A21`: (1,0,0) (lambda1), (0,0,1) (lambda2), (eta,1,eta) (-1);
/// * `A22`: (1,0,-1) (lambda1), (1+eta1,0,-eta1) (lambda2), (eta2,1,eta3) (-1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StandardForm {
    A11 {
        lambda1: f64,
        lambda2: f64,
        eta1: f64,
        eta2: f64,
        eta3: f64,
    },
    A12 {
        lambda: f64,
        eta1: f64,
        eta2: f64,
        eta3: f64,
        eta4: f64,
    },
    A13 {
        lambda1: f64,
        eta1: f64,
        eta2: f64,
        eta3: f64,
    },
    A21 {
        lambda1: f64,
        lambda2: f64,
        eta: f64,
    },
    A22 {
        lambda1: f64,
        lambda2: f64,
        eta1: f64,
        eta2: f64,
        eta3: f64,
    },
}

impl StandardForm {
    pub fn tag(&self) -> FormTag {
        match self {
            StandardForm::A11 { .. } => FormTag::A11,
            StandardForm::A12 { .. } => FormTag::A12,
            StandardForm::A13 { .. } => FormTag::A13,
            StandardForm::A21 { .. } => FormTag::A21,
            StandardForm::A22 { .. } => FormTag::A22,
        }
    }

    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            StandardForm::A11 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            } => vec![
                ("lambda1", lambda1),
                ("lambda2", lambda2),
                ("eta1", eta1),
                ("eta2", eta2),
                ("eta3", eta3),
            ],
            StandardForm::A12 {
                lambda,
                eta1,
                eta2,
                eta3,
                eta4,
            } => vec![
                ("lambda", lambda),
                ("eta1", eta1),
                ("eta2", eta2),
                ("eta3", eta3),
                ("eta4", eta4),
            ],
            StandardForm::A13 {
                lambda1,
                eta1,
                eta2,
                eta3,
            } => vec![
                ("lambda1", lambda1),
                ("eta1", eta1),
                ("eta2", eta2),
                ("eta3", eta3),
            ],
            StandardForm::A21 {
                lambda1,
                lambda2,
                eta,
            } => vec![("lambda1", lambda1), ("lambda2", lambda2), ("eta", eta)],
            StandardForm::A22 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            } => vec![
                ("lambda1", lambda1),
                ("lambda2", lambda2),
                ("eta1", eta1),
                ("eta2", eta2),
                ("eta3", eta3),
            ],
        }
    }

    fn validate(&self) -> Result<(), TemplateError> {
        let bad = |msg: &str| Err(TemplateError::InvalidParams(msg.to_string()));
        match *self {
            StandardForm::A11 {
                lambda1,
                lambda2,
                eta1,
                ..
            } => {
                if !(lambda1 > lambda2) {
                    return bad("requires lambda1 > lambda2");
                }
                if lambda1 == 0.0 || lambda1 == 1.0 || lambda2 == 0.0 || lambda2 == 1.0 {
                    return bad("lambda1, lambda2 must avoid 0 and 1");
                }
                if !(eta1 > 0.0) {
                    return bad("requires eta1 > 0");
                }
            }
            StandardForm::A12 { lambda, eta1, .. } => {
                if lambda == 0.0 || lambda == 1.0 {
                    return bad("lambda must avoid 0 and 1");
                }
                if !(eta1 > 0.0) {
                    return bad("requires eta1 > 0");
                }
            }
            StandardForm::A13 { lambda1, eta1, .. } => {
                if !(lambda1 > -1.0 && lambda1 <= 1.0) || lambda1 == 0.0 {
                    return bad("lambda1 must lie in (-1, 1] and avoid 0");
                }
                if !(eta1 > 0.0) {
                    return bad("requires eta1 > 0");
                }
            }
            StandardForm::A21 {
                lambda1,
                lambda2,
                eta,
            } => {
                if !(lambda1 > lambda2 && lambda2 > -1.0) {
                    return bad("requires lambda1 > lambda2 > -1");
                }
                if !(eta.abs() > 1.0) {
                    return bad("requires |eta| > 1");
                }
            }
            StandardForm::A22 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            } => {
                if !(lambda1 > -1.0 && lambda2 > -1.0) || lambda1 == lambda2 {
                    return bad("requires distinct lambda1, lambda2 > -1");
                }
                if eta1 < 0.0 {
                    return bad("requires eta1 >= 0");
                }
                if eta1 > 0.0 && !(lambda1 > lambda2) {
                    return bad("eta1 > 0 requires lambda1 > lambda2");
                }
                if !(eta2 * eta3 > 1.0) {
                    return bad("requires eta2 * eta3 > 1");
                }
            }
        }
        Ok(())
    }

    /// Matrix part of the standard form (potential part zero), built from
    /// the eigenvector frame.
    pub fn build(&self) -> Result<SystemRep, TemplateError> {
        self.validate()?;
        let a = match *self {
            StandardForm::A11 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            } => {
                let p = frame_p(eta1, eta2, eta3, 1.0);
                let d = Matrix3::from_diagonal(&Vector3::new(lambda1, lambda2, 1.0));
                p * d * p.try_inverse().expect("frame is unimodular")
            }
            StandardForm::A12 {
                lambda,
                eta1,
                eta2,
                eta3,
                eta4,
            } => {
                let p = frame_p(eta1, eta2, eta3, 1.0);
                let mid = Matrix3::new(1.0, 0.0, eta4, 0.0, lambda, 0.0, 0.0, 0.0, 1.0);
                p * mid * p.try_inverse().expect("frame is unimodular")
            }
            StandardForm::A13 {
                lambda1,
                eta1,
                eta2,
                eta3,
            } => {
                let p = frame_p(eta1, eta2, eta3, 1.0);
                let d = Matrix3::from_diagonal(&Vector3::new(lambda1, -1.0, 0.0));
                p * d * p.try_inverse().expect("frame is unimodular")
            }
            StandardForm::A21 {
                lambda1,
                lambda2,
                eta,
            } => Matrix3::new(
                lambda1,
                -eta * (lambda1 + 1.0),
                0.0,
                0.0,
                -1.0,
                0.0,
                0.0,
                -eta * (lambda2 + 1.0),
                lambda2,
            ),
            StandardForm::A22 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            } => {
                let p = frame_p(eta1, eta2, eta3, -1.0);
                let d = Matrix3::from_diagonal(&Vector3::new(lambda1, lambda2, -1.0));
                p * d * p.try_inverse().expect("frame is unimodular")
            }
        };
        Ok(SystemRep::new(a, Vector3::zeros()))
    }
}

/// Frame matrix with columns (1,0,s), (1+eta1,0,s*eta1), (eta2,1,eta3);
/// s = 1 for the forms anchored at (1,0,1), s = -1 for (1,0,-1).
fn frame_p(eta1: f64, eta2: f64, eta3: f64, s: f64) -> Matrix3<f64> {
    Matrix3::new(1.0, 1.0 + eta1, eta2, 0.0, 0.0, 1.0, s, s * eta1, eta3)
}

/// First worked example family: c2 = zeta + 1, c6 = zeta, c7 = 2 zeta,
/// c10 = 2 zeta, c11 = 1. Eigenvalues 1 (double) and 1 - zeta; both
/// eigenspaces meet the open cone for any zeta not in {0, 1}.
pub fn example_a_coefficients(zeta: f64) -> CoefficientVector {
    let mut c = [0.0; 12];
    c[1] = zeta + 1.0;
    c[5] = zeta;
    c[6] = 2.0 * zeta;
    c[9] = 2.0 * zeta;
    c[10] = 1.0;
    CoefficientVector::new(c)
}

pub fn example_a(zeta: f64) -> SystemRep {
    coefficients_to_system(&example_a_coefficients(zeta))
}

/// Second worked example: c1 = 6, c2 = 3, c3 = 1, c10 = -1, c12 = -4.
/// Eigenvalues {2, 1, -1}; the -1 eigenvector lies in the open cone while
/// the other two eigenvectors sit on its boundary.
pub fn example_b_coefficients() -> CoefficientVector {
    let mut c = [0.0; 12];
    c[0] = 6.0;
    c[1] = 3.0;
    c[2] = 1.0;
    c[9] = -1.0;
    c[11] = -4.0;
    CoefficientVector::new(c)
}

pub fn example_b() -> SystemRep {
    coefficients_to_system(&example_b_coefficients())
}

/// Random invertible change of variables with |det| in [0.2, 5].
pub fn random_gl2<R: Rng + ?Sized>(rng: &mut R) -> Gl2Transform {
    loop {
        let m = Matrix2::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        if let Ok(t) = Gl2Transform::new(m) {
            if t.det.abs() >= 0.2 && t.det.abs() <= 5.0 {
                return t;
            }
        }
    }
}

/// Disguise a system by a random change of variables; returns the disguised
/// system together with the transform that produced it.
pub fn random_disguise<R: Rng + ?Sized>(rng: &mut R, s: &SystemRep) -> (SystemRep, Gl2Transform) {
    let m = random_gl2(rng);
    (transform_system(s, &m), m)
}

fn away_from(rng: &mut (impl Rng + ?Sized), lo: f64, hi: f64, avoid: &[f64], margin: f64) -> f64 {
    loop {
        let x = rng.gen_range(lo..hi);
        if avoid.iter().all(|&a| (x - a).abs() >= margin) {
            return x;
        }
    }
}

/// Random valid parameters for a standard form, with margins that keep the
/// eigenvalue layout well separated from every degeneracy.
pub fn random_form<R: Rng + ?Sized>(rng: &mut R, tag: FormTag) -> StandardForm {
    match tag {
        FormTag::A11 => {
            let la = away_from(rng, -2.5, 2.5, &[0.0, 1.0], 0.15);
            let lb = loop {
                let x = away_from(rng, -2.5, 2.5, &[0.0, 1.0], 0.15);
                if (la - x).abs() >= 0.2 {
                    break x;
                }
            };
            StandardForm::A11 {
                lambda1: la.max(lb),
                lambda2: la.min(lb),
                eta1: rng.gen_range(0.2..3.0),
                eta2: rng.gen_range(-2.0..2.0),
                eta3: rng.gen_range(-2.0..2.0),
            }
        }
        FormTag::A12 => StandardForm::A12 {
            lambda: away_from(rng, -2.5, 2.5, &[0.0, 1.0], 0.15),
            eta1: rng.gen_range(0.2..3.0),
            eta2: rng.gen_range(-2.0..2.0),
            eta3: rng.gen_range(-2.0..2.0),
            eta4: if rng.gen_bool(0.3) {
                0.0
            } else {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                sign * rng.gen_range(0.3..2.0)
            },
        },
        FormTag::A13 => {
            let mag = rng.gen_range(0.1..1.0);
            let lambda1 = if rng.gen_bool(0.5) { mag } else { -0.9 * mag };
            StandardForm::A13 {
                lambda1,
                eta1: rng.gen_range(0.2..3.0),
                eta2: rng.gen_range(-2.0..2.0),
                eta3: rng.gen_range(-2.0..2.0),
            }
        }
        FormTag::A21 => {
            let l2 = rng.gen_range(-0.85..1.5);
            let l1 = l2 + rng.gen_range(0.2..1.5);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            StandardForm::A21 {
                lambda1: l1,
                lambda2: l2,
                eta: sign * rng.gen_range(1.1..3.0),
            }
        }
        FormTag::A22 => {
            let eta1 = if rng.gen_bool(0.35) {
                0.0
            } else {
                rng.gen_range(0.2..2.5)
            };
            let la = rng.gen_range(-0.85..2.0);
            let lb = loop {
                let x = rng.gen_range(-0.85..2.0f64);
                if (x - la).abs() >= 0.2 {
                    break x;
                }
            };
            let (lambda1, lambda2) = if eta1 > 0.0 || la > lb {
                (la.max(lb), la.min(lb))
            } else {
                (la, lb)
            };
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let eta2: f64 = sign * rng.gen_range(0.5..2.5);
            let eta3 = sign * (1.0 / eta2.abs() + rng.gen_range(0.1..2.0));
            StandardForm::A22 {
                lambda1,
                lambda2,
                eta1,
                eta2,
                eta3,
            }
        }
    }
}

pub const ALL_FORM_TAGS: [FormTag; 5] = [
    FormTag::A11,
    FormTag::A12,
    FormTag::A13,
    FormTag::A21,
    FormTag::A22,
];
