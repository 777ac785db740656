//! Eigen-structure of the 3x3 observable matrix: clustered real eigenvalues,
//! orthonormal eigenbases, generalized eigenspaces, and numerical rank.

use crate::algebra::SystemRep;
use nalgebra::{Matrix3, Vector3};

/// Default relative clustering and rank tolerance. A double eigenvalue of a
/// defective matrix splits under a relative perturbation delta by the
/// square-root law sqrt(delta) * |A|, and change-of-variables arithmetic
/// accumulates delta ~ 1e-13, so the band has to sit above 1e-6 * |A| or
/// repeated eigenvalues shatter into spurious simple (or complex) pairs.
pub const CLUSTER_TOL: f64 = 1e-5;

/// One real eigenvalue together with its clustered multiplicity and
/// orthonormal (generalized) eigenbases. Basis vectors are unit length with
/// the first component of magnitude above the sign band made positive.
#[derive(Debug, Clone)]
pub struct RealEigenpair {
    pub value: f64,
    pub algebraic_multiplicity: usize,
    pub eigenbasis: Vec<Vector3<f64>>,
    pub generalized_basis: Vec<Vector3<f64>>,
}

impl RealEigenpair {
    pub fn geometric_multiplicity(&self) -> usize {
        self.eigenbasis.len()
    }
}

#[derive(Debug, Clone)]
pub struct EigenStructure {
    /// Distinct real eigenvalues after clustering, sorted descending.
    pub real: Vec<RealEigenpair>,
    /// (re, |im|) of a complex-conjugate pair when one exists.
    pub complex_pair: Option<(f64, f64)>,
    /// Numerical rank of the matrix at the clustering tolerance.
    pub rank: usize,
    pub cluster_tol: f64,
    /// Set when an eigenvalue gap or a rank decision sits inside ten times
    /// the tolerance band, i.e. the discrete invariants are not trustworthy.
    pub borderline: bool,
    /// Scale |A| used to make the tolerances relative.
    pub scale: f64,
}

impl EigenStructure {
    /// The eigenpair whose value was clustered to exactly zero, if any.
    pub fn kernel(&self) -> Option<&RealEigenpair> {
        self.real.iter().find(|p| p.value == 0.0)
    }

    pub fn eigenvalue_near(&self, value: f64, tol: f64) -> Option<&RealEigenpair> {
        self.real
            .iter()
            .min_by(|a, b| (a.value - value).abs().total_cmp(&(b.value - value).abs()))
            .filter(|p| (p.value - value).abs() <= tol)
    }

    /// Distinct real eigenvalues in descending order.
    pub fn real_values(&self) -> Vec<f64> {
        self.real.iter().map(|p| p.value).collect()
    }
}

fn matrix_scale(a: &Matrix3<f64>) -> f64 {
    a.amax().max(f64::MIN_POSITIVE)
}

/// Orthonormal null space of `m` at relative tolerance `tol`, via singular
/// vectors with singular value below `tol * sigma_max`. Returns vectors with
/// the first significant component positive.
fn null_space(m: &Matrix3<f64>, tol: f64) -> Vec<Vector3<f64>> {
    let scale = matrix_scale(m);
    if scale <= f64::MIN_POSITIVE {
        return vec![Vector3::x(), Vector3::y(), Vector3::z()];
    }
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let smax = svd.singular_values.max().max(f64::MIN_POSITIVE);
    let mut basis = Vec::new();
    for i in 0..3 {
        if svd.singular_values[i] <= tol * smax {
            basis.push(orient(v_t.row(i).transpose()));
        }
    }
    basis
}

/// Smallest-singular-direction fallback for an eigenvalue whose null space is
/// empty at the working tolerance.
fn least_singular_direction(m: &Matrix3<f64>) -> Vector3<f64> {
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested right singular vectors");
    let mut idx = 0;
    for i in 1..3 {
        if svd.singular_values[i] < svd.singular_values[idx] {
            idx = i;
        }
    }
    orient(v_t.row(idx).transpose())
}

fn orient(v: Vector3<f64>) -> Vector3<f64> {
    for k in 0..3 {
        if v[k].abs() > 1e-9 {
            return if v[k] < 0.0 { -v } else { v };
        }
    }
    v
}

/// Numerical rank of the matrix part at relative tolerance `tol`.
pub fn rank_of(s: &SystemRep, tol: f64) -> usize {
    let scale = matrix_scale(&s.a);
    if scale <= f64::MIN_POSITIVE {
        return 0;
    }
    let sv = s.a.singular_values();
    let smax = sv.max().max(f64::MIN_POSITIVE);
    (0..3).filter(|&i| sv[i] > tol * smax).count()
}

/// Eigen-decomposition of the matrix part with eigenvalues clustered at
/// relative tolerance `cluster_tol`. Eigenvalues within the band around zero
/// are snapped to exactly zero, so downstream kernel logic is exact.
pub fn eigen_decompose(s: &SystemRep, cluster_tol: f64) -> EigenStructure {
    let a = s.a;
    let scale = matrix_scale(&a);
    let band = cluster_tol * scale;

    if a.amax() <= f64::MIN_POSITIVE {
        return EigenStructure {
            real: vec![RealEigenpair {
                value: 0.0,
                algebraic_multiplicity: 3,
                eigenbasis: vec![Vector3::x(), Vector3::y(), Vector3::z()],
                generalized_basis: vec![Vector3::x(), Vector3::y(), Vector3::z()],
            }],
            complex_pair: None,
            rank: 0,
            cluster_tol,
            borderline: false,
            scale,
        };
    }

    let eig = a.complex_eigenvalues();
    let mut reals: Vec<f64> = Vec::new();
    let mut complex_pair = None;
    for i in 0..3 {
        if eig[i].im.abs() <= band {
            reals.push(eig[i].re);
        } else if eig[i].im > 0.0 {
            complex_pair = Some((eig[i].re, eig[i].im));
        }
    }
    reals.sort_by(|x, y| y.total_cmp(x));

    // Cluster nearby values, then snap near-zero clusters to zero.
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for &v in &reals {
        match clusters.last_mut() {
            Some((c, n)) if (*c / (*n as f64) - v).abs() <= band => {
                *c += v;
                *n += 1;
            }
            _ => clusters.push((v, 1)),
        }
    }
    let mut borderline = false;
    let values: Vec<(f64, usize)> = clusters
        .into_iter()
        .map(|(sum, n)| {
            let mean = sum / n as f64;
            let v = if mean.abs() <= band { 0.0 } else { mean };
            (v, n)
        })
        .collect();
    for w in values.windows(2) {
        if (w[0].0 - w[1].0).abs() <= 10.0 * band {
            borderline = true;
        }
    }

    let mut real = Vec::new();
    for &(value, mult) in &values {
        let shifted = a - Matrix3::identity() * value;
        let mut eigenbasis = null_space(&shifted, cluster_tol);
        if eigenbasis.is_empty() {
            borderline = true;
            eigenbasis = vec![least_singular_direction(&shifted)];
        }
        eigenbasis.truncate(mult);
        let generalized_basis = if mult > eigenbasis.len() {
            let mut power = shifted;
            for _ in 1..mult {
                power *= shifted;
            }
            let mut g = null_space(&power, cluster_tol);
            if g.len() < mult {
                borderline = true;
            }
            g.truncate(mult);
            g
        } else {
            eigenbasis.clone()
        };
        real.push(RealEigenpair {
            value,
            algebraic_multiplicity: mult,
            eigenbasis,
            generalized_basis,
        });
    }

    // Rank from the kernel dimension when zero is an eigenvalue; cross-check
    // against the singular-value rank and flag disagreement as borderline.
    let kernel_dim = real
        .iter()
        .find(|p| p.value == 0.0)
        .map(|p| p.eigenbasis.len())
        .unwrap_or(0);
    let rank = 3 - kernel_dim;
    if rank != rank_of(s, cluster_tol) {
        borderline = true;
    }

    EigenStructure {
        real,
        complex_pair,
        rank,
        cluster_tol,
        borderline,
        scale,
    }
}
