//! Rank/cone case analysis of the observable matrix, the weak null gauge
//! condition, the two solvability assumptions, and synthesis of conserved
//! quantities (generally non-polynomial) from eigenpairs.

use crate::algebra::{
    cone_disc, quadratic_form, subspace_cone_witness, subspace_meets_cone, ConeTarget, FieldPair,
    SystemRep, C64, SIGN_TOL,
};
use crate::eigen::{eigen_decompose, EigenStructure, RealEigenpair, CLUSTER_TOL};
use nalgebra::{Matrix2, Vector2, Vector3};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("fewer than two real eigenpairs available")]
    NoRealEigenpair,
    #[error("conserved quantity undefined: zero base raised to a negative exponent")]
    Undefined,
    #[error("no coercive combination: neither solvability assumption holds")]
    NotCoercive,
}

/// The seven low-rank classes, by rank and the cone position of the kernel;
/// full-rank systems have no conserved quadratic observable and fall outside
/// the seven classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseLabel {
    /// rank 0.
    Case1,
    /// rank 1, kernel meets the open cone.
    Case2,
    /// rank 1, kernel touches the cone boundary but misses the interior.
    Case3,
    /// rank 1, kernel avoids the closed cone entirely.
    Case4,
    /// rank 2, kernel line inside the open cone.
    Case5,
    /// rank 2, kernel line on the cone boundary.
    Case6,
    /// rank 2, kernel line outside the closed cone.
    Case7,
    Rank3,
}

impl CaseLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            CaseLabel::Case1 => "case1",
            CaseLabel::Case2 => "case2",
            CaseLabel::Case3 => "case3",
            CaseLabel::Case4 => "case4",
            CaseLabel::Case5 => "case5",
            CaseLabel::Case6 => "case6",
            CaseLabel::Case7 => "case7",
            CaseLabel::Rank3 => "rank3",
        }
    }
}

/// Two distinct nonzero real eigenvalues whose eigenspaces both meet the
/// open cone. `lambda1 > lambda2`; the witnesses are unit vectors.
#[derive(Debug, Clone)]
pub struct Assumption1 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub p1: Vector3<f64>,
    pub p2: Vector3<f64>,
}

/// Three distinct real eigenvalues with `lambda3 != 0`, both ratios
/// `lambda_j / lambda3 < 1`, the eigenspaces of `lambda1`, `lambda2` missing
/// the open cone individually but meeting it jointly, and the eigenspace of
/// `lambda3` meeting it.
#[derive(Debug, Clone)]
pub struct Assumption2 {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    /// Split of an open-cone direction across the two eigenspaces:
    /// `p1 + p2` has positive discriminant while neither summand's
    /// eigenspace meets the cone.
    pub p1: Vector3<f64>,
    pub p2: Vector3<f64>,
    /// Unit cone witness in the eigenspace of `lambda3`.
    pub p3: Vector3<f64>,
}

#[derive(Debug, Clone)]
pub struct Classification {
    pub rank: usize,
    pub case_label: CaseLabel,
    /// Weak null gauge condition: the kernel meets the open cone.
    pub wngc: bool,
    pub assumption1: Option<Assumption1>,
    pub assumption2: Option<Assumption2>,
    /// Named vectors backing each true flag.
    pub witnesses: Vec<(&'static str, Vector3<f64>)>,
    pub borderline: bool,
    pub eigen: EigenStructure,
}

fn find_assumption1(eigen: &EigenStructure) -> Option<Assumption1> {
    let reals = &eigen.real;
    for i in 0..reals.len() {
        for j in (i + 1)..reals.len() {
            let (a, b) = (&reals[i], &reals[j]);
            if a.value == 0.0 || b.value == 0.0 {
                continue;
            }
            let Some(p1) = subspace_cone_witness(&a.eigenbasis, SIGN_TOL) else {
                continue;
            };
            let Some(p2) = subspace_cone_witness(&b.eigenbasis, SIGN_TOL) else {
                continue;
            };
            return Some(Assumption1 {
                lambda1: a.value,
                lambda2: b.value,
                p1,
                p2,
            });
        }
    }
    None
}

/// Least-squares split of `w` over two unit directions.
fn split_over(v1: &Vector3<f64>, v2: &Vector3<f64>, w: &Vector3<f64>) -> Option<(f64, f64)> {
    let g12 = v1.dot(v2);
    let det = 1.0 - g12 * g12;
    if det <= 1e-12 {
        return None;
    }
    let rhs = Vector2::new(v1.dot(w), v2.dot(w));
    let ginv = Matrix2::new(1.0, -g12, -g12, 1.0) / det;
    let c = ginv * rhs;
    Some((c[0], c[1]))
}

fn find_assumption2(eigen: &EigenStructure) -> Option<Assumption2> {
    let reals = &eigen.real;
    if reals.len() != 3 {
        return None;
    }
    for k in 0..3 {
        let l3 = reals[k].value;
        if l3 == 0.0 {
            continue;
        }
        // Remaining two roles in descending eigenvalue order.
        let rest: Vec<&RealEigenpair> = (0..3).filter(|&i| i != k).map(|i| &reals[i]).collect();
        let (e1, e2) = (rest[0], rest[1]);
        if e1.value / l3 >= 1.0 || e2.value / l3 >= 1.0 {
            continue;
        }
        let meets1 = subspace_meets_cone(&e1.eigenbasis, ConeTarget::Plus, SIGN_TOL)
            .expect("eigenbasis is non-empty");
        let meets2 = subspace_meets_cone(&e2.eigenbasis, ConeTarget::Plus, SIGN_TOL)
            .expect("eigenbasis is non-empty");
        if meets1 || meets2 {
            continue;
        }
        let Some(p3) = subspace_cone_witness(&reals[k].eigenbasis, SIGN_TOL) else {
            continue;
        };
        let v1 = e1.eigenbasis[0];
        let v2 = e2.eigenbasis[0];
        let joint = [v1, v2];
        let Some(w) = subspace_cone_witness(&joint, SIGN_TOL) else {
            continue;
        };
        let Some((c1, c2)) = split_over(&v1, &v2, &w) else {
            continue;
        };
        if c1.abs() <= SIGN_TOL || c2.abs() <= SIGN_TOL {
            continue;
        }
        return Some(Assumption2 {
            lambda1: e1.value,
            lambda2: e2.value,
            lambda3: l3,
            p1: c1 * v1,
            p2: c2 * v2,
            p3,
        });
    }
    None
}

/// Full discrete classification of a system: rank/cone case, weak null gauge
/// condition, and both solvability assumptions with explicit witnesses.
pub fn classify(s: &SystemRep) -> Classification {
    let eigen = eigen_decompose(s, CLUSTER_TOL);
    let rank = eigen.rank;
    let mut borderline = eigen.borderline;

    let kernel_witness = eigen
        .kernel()
        .and_then(|k| subspace_cone_witness(&k.eigenbasis, SIGN_TOL));
    let wngc = kernel_witness.is_some();

    let case_label = match (rank, eigen.kernel()) {
        (0, _) => CaseLabel::Case1,
        (1, Some(k)) => {
            if wngc {
                CaseLabel::Case2
            } else if subspace_meets_cone(&k.eigenbasis, ConeTarget::ZeroNontrivially, SIGN_TOL)
                .expect("kernel basis is non-empty")
            {
                CaseLabel::Case3
            } else {
                CaseLabel::Case4
            }
        }
        (2, Some(k)) => {
            let disc = cone_disc(&k.eigenbasis[0].normalize());
            if disc.abs() <= SIGN_TOL {
                borderline = true;
                CaseLabel::Case6
            } else if disc > 0.0 {
                CaseLabel::Case5
            } else {
                CaseLabel::Case7
            }
        }
        (3, _) => CaseLabel::Rank3,
        // rank and clustered kernel disagree; eigen already flagged it.
        _ => {
            borderline = true;
            CaseLabel::Rank3
        }
    };

    let assumption1 = find_assumption1(&eigen);
    let assumption2 = find_assumption2(&eigen);

    let mut witnesses = Vec::new();
    if let Some(w) = kernel_witness {
        witnesses.push(("wngc", w));
    }
    if let Some(a1) = &assumption1 {
        witnesses.push(("as1_p1", a1.p1));
        witnesses.push(("as1_p2", a1.p2));
    }
    if let Some(a2) = &assumption2 {
        witnesses.push(("as2_p1", a2.p1));
        witnesses.push(("as2_p2", a2.p2));
        witnesses.push(("as2_p3", a2.p3));
    }

    Classification {
        rank,
        case_label,
        wngc,
        assumption1,
        assumption2,
        witnesses,
        borderline,
        eigen,
    }
}

/// Recipe for a conserved quantity |Q(a1)|^e1 |Q(a2)|^e2 built from two
/// eigenvectors. Exponents are sign-normalized to (-lambda2, lambda1) with
/// lambda1 > lambda2, so a coercive pair has positive total degree
/// lambda1 - lambda2; the degenerate same-eigenvalue form is the ratio
/// (1, -1).
#[derive(Debug, Clone)]
pub struct ConservedQuantitySpec {
    pub a1: Vector3<f64>,
    pub a2: Vector3<f64>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub exponents: (f64, f64),
    /// Both witnesses lie in the open cone and both eigenvalues are nonzero,
    /// so the quantity to the power 1/(lambda1 - lambda2) is equivalent to
    /// |phi1|^2 + |phi2|^2.
    pub coercive: bool,
    /// Same-eigenvalue ratio form Q(a1)/Q(a2).
    pub ratio: bool,
}

fn representative(pair: &RealEigenpair) -> Vector3<f64> {
    subspace_cone_witness(&pair.eigenbasis, SIGN_TOL).unwrap_or(pair.eigenbasis[0])
}

/// One spec per unordered pair of distinct real eigenvalues, plus a ratio
/// spec inside every eigenspace of dimension two or more.
pub fn conserved_quantities(s: &SystemRep) -> Result<Vec<ConservedQuantitySpec>, ClassifyError> {
    let eigen = eigen_decompose(s, CLUSTER_TOL);
    let reals = &eigen.real;
    let mut specs = Vec::new();
    for i in 0..reals.len() {
        for j in (i + 1)..reals.len() {
            let (ei, ej) = (&reals[i], &reals[j]);
            let a1 = representative(ei);
            let a2 = representative(ej);
            let coercive = ei.value != 0.0
                && ej.value != 0.0
                && cone_disc(&a1) > SIGN_TOL
                && cone_disc(&a2) > SIGN_TOL;
            specs.push(ConservedQuantitySpec {
                a1,
                a2,
                lambda1: ei.value,
                lambda2: ej.value,
                exponents: (-ej.value, ei.value),
                coercive,
                ratio: false,
            });
        }
    }
    for pair in reals.iter().filter(|p| p.geometric_multiplicity() >= 2) {
        let a1 = representative(pair);
        // The companion direction inside the same eigenspace: the basis
        // vector least aligned with the representative.
        let a2 = *pair
            .eigenbasis
            .iter()
            .min_by(|u, v| u.dot(&a1).abs().total_cmp(&v.dot(&a1).abs()))
            .expect("eigenbasis is non-empty");
        specs.push(ConservedQuantitySpec {
            a1,
            a2,
            lambda1: pair.value,
            lambda2: pair.value,
            exponents: (1.0, -1.0),
            coercive: false,
            ratio: true,
        });
    }
    if specs.is_empty() {
        return Err(ClassifyError::NoRealEigenpair);
    }
    Ok(specs)
}

/// Evaluate |Q(a1)|^e1 |Q(a2)|^e2 at a field pair. A zero base is legal
/// exactly when its exponent is non-negative.
pub fn evaluate_conserved(
    spec: &ConservedQuantitySpec,
    p: &FieldPair,
) -> Result<f64, ClassifyError> {
    let factor = |a: &Vector3<f64>, e: f64| -> Result<f64, ClassifyError> {
        let base = quadratic_form(p, a).abs();
        if base == 0.0 {
            if e < 0.0 {
                Err(ClassifyError::Undefined)
            } else if e == 0.0 {
                Ok(1.0)
            } else {
                Ok(0.0)
            }
        } else {
            Ok(base.powf(e))
        }
    };
    Ok(factor(&spec.a1, spec.exponents.0)? * factor(&spec.a2, spec.exponents.1)?)
}

/// Extrema of a gauge-invariant observable functional over the unit sphere
/// |phi1|^2 + |phi2|^2 = 1, by dense grid search in the chart
/// phi1 = cos(chi), phi2 = sin(chi) e^{i delta} followed by three rounds of
/// local refinement. Returns (min, max).
pub fn observable_sphere_extrema<F: Fn(&FieldPair) -> f64>(f: F) -> (f64, f64) {
    let eval = |chi: f64, delta: f64| {
        let p = FieldPair::new(C64::new(chi.cos(), 0.0), C64::from_polar(chi.sin(), delta));
        f(&p)
    };
    let half_pi = std::f64::consts::FRAC_PI_2;
    let pi = std::f64::consts::PI;

    let mut lo = (f64::INFINITY, 0.0, 0.0);
    let mut hi = (f64::NEG_INFINITY, 0.0, 0.0);
    let n = 601;
    for i in 0..n {
        let chi = half_pi * i as f64 / (n - 1) as f64;
        for j in 0..n {
            let delta = pi * j as f64 / (n - 1) as f64;
            let v = eval(chi, delta);
            if v < lo.0 {
                lo = (v, chi, delta);
            }
            if v > hi.0 {
                hi = (v, chi, delta);
            }
        }
    }

    // Shrink a window around each extremum; 41 points per axis, three rounds.
    let refine = |mut best: (f64, f64, f64), minimize: bool| {
        let mut span_chi = half_pi / (n - 1) as f64 * 2.0;
        let mut span_delta = pi / (n - 1) as f64 * 2.0;
        for _ in 0..3 {
            let (_, c0, d0) = best;
            for i in 0..41 {
                let chi = (c0 - span_chi + 2.0 * span_chi * i as f64 / 40.0).clamp(0.0, half_pi);
                for j in 0..41 {
                    let delta =
                        (d0 - span_delta + 2.0 * span_delta * j as f64 / 40.0).clamp(0.0, pi);
                    let v = eval(chi, delta);
                    if (minimize && v < best.0) || (!minimize && v > best.0) {
                        best = (v, chi, delta);
                    }
                }
            }
            span_chi /= 20.0;
            span_delta /= 20.0;
        }
        best.0
    };
    (refine(lo, true), refine(hi, false))
}

/// Two-sided bound on a coercive conserved combination over the unit sphere,
/// and the resulting a-priori bound on the mass ratio of any trajectory.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityBound {
    pub c_minus: f64,
    pub c_plus: f64,
    /// Homogeneity degree of the combination in |phi1|^2 + |phi2|^2.
    pub degree: f64,
    /// sup_t (|phi1|^2+|phi2|^2) <= ratio_bound * inf_t (|phi1|^2+|phi2|^2)
    /// along every trajectory of the reduced system.
    pub ratio_bound: f64,
}

/// Sum of products |Q(a)|^ea * |Q(b)|^eb; the conserved coercive
/// combination in evaluable form.
#[derive(Debug, Clone)]
pub struct CoerciveFunctional {
    pub terms: Vec<(Vector3<f64>, f64, Vector3<f64>, f64)>,
    /// G(c phi) = (c^2)^degree G(phi).
    pub degree: f64,
}

impl CoerciveFunctional {
    pub fn eval(&self, p: &FieldPair) -> f64 {
        self.terms
            .iter()
            .map(|(a, ea, b, eb)| {
                quadratic_form(p, a).abs().powf(*ea) * quadratic_form(p, b).abs().powf(*eb)
            })
            .sum()
    }
}

/// Coercive conserved combination for a system satisfying either assumption:
/// the pair quantity itself under the first, or the theta-weighted sum of
/// the two pair quantities under the second.
pub fn coercive_functional(s: &SystemRep) -> Result<CoerciveFunctional, ClassifyError> {
    let class = classify(s);
    if let Some(a1) = &class.assumption1 {
        return Ok(CoerciveFunctional {
            terms: vec![(a1.p1, -a1.lambda2, a1.p2, a1.lambda1)],
            degree: a1.lambda1 - a1.lambda2,
        });
    }
    if let Some(a2) = &class.assumption2 {
        let theta = |l: f64| 1.0 / (1.0 - l / a2.lambda3);
        let (t1, t2) = (theta(a2.lambda1), theta(a2.lambda2));
        let m = 2.0 * (1.0 / t1.min(t2)).max(1.0);
        return Ok(CoerciveFunctional {
            terms: vec![
                (a2.p1, m * t1, a2.p3, m * (1.0 - t1)),
                (a2.p2, m * t2, a2.p3, m * (1.0 - t2)),
            ],
            degree: m,
        });
    }
    Err(ClassifyError::NotCoercive)
}

pub fn coercivity_bound(s: &SystemRep) -> Result<CoercivityBound, ClassifyError> {
    let g = coercive_functional(s)?;
    let (c_minus, c_plus) = observable_sphere_extrema(|p| g.eval(p));
    if !(c_minus > 0.0) {
        return Err(ClassifyError::NotCoercive);
    }
    Ok(CoercivityBound {
        c_minus,
        c_plus,
        degree: g.degree,
        ratio_bound: (c_plus / c_minus).powf(1.0 / g.degree),
    })
}
