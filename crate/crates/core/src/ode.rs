//! Time integration of the reduced profile flow phi' = -i F(phi): the cubic
//! right-hand side in both coefficient and representation form, an adaptive
//! Dormand-Prince 5(4) scheme with dense output, and drift diagnostics used
//! by the conservation and boundedness checks.

use crate::algebra::{
    quadratic_form, CoefficientVector, FieldPair, QuadraticObservables, SystemRep, C64,
};
use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at t = {time}")]
    StepSizeUnderflow { time: f64 },
    #[error("step budget exhausted at t = {time}")]
    StepLimitExceeded { time: f64 },
}

/// Cubic nonlinearity evaluated monomial by monomial from the twelve
/// coupling constants. Reference route; the solver uses [`nonlinearity`].
pub fn nonlinearity_from_coefficients(cv: &CoefficientVector, p: &FieldPair) -> FieldPair {
    let (u1, u2) = (p.phi1, p.phi2);
    let r1 = u1.norm_sqr();
    let r2 = u2.norm_sqr();
    let m = [
        r1 * u1,
        r1 * u2,
        u1 * u1 * u2.conj(),
        r2 * u1,
        u1.conj() * u2 * u2,
        r2 * u2,
    ];
    let mut f1 = C64::new(0.0, 0.0);
    let mut f2 = C64::new(0.0, 0.0);
    for j in 0..6 {
        f1 += cv.c[j] * m[j];
        f2 += cv.c[j + 6] * m[j];
    }
    FieldPair::new(f1, f2)
}

/// Cubic nonlinearity in representation form: the matrix part drives the
/// quadratic observables, the potential part contributes a common real phase
/// speed V = v . (rho1, r, rho2).
pub fn nonlinearity(s: &SystemRep, p: &FieldPair) -> FieldPair {
    let (u1, u2) = (p.phi1, p.phi2);
    let obs = QuadraticObservables::of(p);
    let a = &s.a;
    let tr = a.trace();
    // Paired monomials invariant under the observable calculus.
    let g1 = 2.0 * obs.rho1 * u2 + u1 * u1 * u2.conj();
    let g2 = 2.0 * obs.rho2 * u1 + u1.conj() * u2 * u2;
    let vpot = s.v[0] * obs.rho1 + s.v[1] * obs.r + s.v[2] * obs.rho2;
    let f1 = -(a[(0, 1)] + a[(1, 2)]) * obs.rho1 * u1
        + a[(0, 0)] * g1
        + a[(1, 0)] * g2
        + a[(2, 0)] * obs.rho2 * u2
        - 0.5 * tr * obs.r * u1
        + vpot * u1;
    let f2 = -a[(0, 2)] * obs.rho1 * u1 - a[(1, 2)] * g1 - a[(2, 2)] * g2
        + (a[(1, 0)] + a[(2, 1)]) * obs.rho2 * u2
        + 0.5 * tr * obs.r * u2
        + vpot * u2;
    FieldPair::new(f1, f2)
}

/// Right-hand side of the profile flow phi' = -i F(phi).
pub fn velocity(s: &SystemRep, p: &FieldPair) -> FieldPair {
    let f = nonlinearity(s, p);
    FieldPair::new(C64::new(0.0, -1.0) * f.phi1, C64::new(0.0, -1.0) * f.phi2)
}

/// Exact rate of Q(a) along the flow: d/dt Q(a) = I(phi) * Q(A a), where
/// I = 2 Im(conj(phi1) phi2). The potential drops out entirely.
pub fn quadratic_form_rate(s: &SystemRep, p: &FieldPair, a: &Vector3<f64>) -> f64 {
    let obs = QuadraticObservables::of(p);
    obs.i * quadratic_form(p, &(s.a * a))
}

/// Central finite-difference probe of the rate identity. Returns the
/// (difference-quotient, predicted-rate) pair at the given state.
pub fn check_derivative_identity(
    s: &SystemRep,
    p: &FieldPair,
    a: &Vector3<f64>,
    h: f64,
) -> (f64, f64) {
    let plus = rk4_step(s, p, h);
    let minus = rk4_step(s, p, -h);
    let fd = (quadratic_form(&plus, a) - quadratic_form(&minus, a)) / (2.0 * h);
    (fd, quadratic_form_rate(s, p, a))
}

fn lc(y: &FieldPair, h: f64, terms: &[(f64, FieldPair)]) -> FieldPair {
    let mut p1 = y.phi1;
    let mut p2 = y.phi2;
    for (c, k) in terms {
        p1 += h * c * k.phi1;
        p2 += h * c * k.phi2;
    }
    FieldPair::new(p1, p2)
}

pub(crate) fn rk4_step(s: &SystemRep, y: &FieldPair, h: f64) -> FieldPair {
    let k1 = velocity(s, y);
    let k2 = velocity(s, &lc(y, 0.5 * h, &[(1.0, k1)]));
    let k3 = velocity(s, &lc(y, 0.5 * h, &[(1.0, k2)]));
    let k4 = velocity(s, &lc(y, h, &[(1.0, k3)]));
    lc(y, h / 6.0, &[(1.0, k1), (2.0, k2), (2.0, k3), (1.0, k4)])
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Step size to start with; estimated from the data when absent.
    pub initial_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FieldPair>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    /// (inf, sup) of the mass |phi1|^2 + |phi2|^2 over the sample times.
    pub fn mass_extremes(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for p in &self.states {
            let m = p.norm_sq();
            lo = lo.min(m);
            hi = hi.max(m);
        }
        (lo, hi)
    }
}

/// Largest relative excursion of a sampled scalar from its initial value.
pub fn max_drift(values: &[f64]) -> f64 {
    let Some(&v0) = values.first() else {
        return 0.0;
    };
    let denom = v0.abs().max(1.0);
    values
        .iter()
        .map(|v| (v - v0).abs() / denom)
        .fold(0.0, f64::max)
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// Dense-output weights.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct StepResult {
    y_new: FieldPair,
    k7: FieldPair,
    err: f64,
    stages: [FieldPair; 7],
}

fn dopri5_step(
    s: &SystemRep,
    y: &FieldPair,
    k1: &FieldPair,
    h: f64,
    opts: &OdeOptions,
) -> StepResult {
    let k2 = velocity(s, &lc(y, h, &[(A21, *k1)]));
    let k3 = velocity(s, &lc(y, h, &[(A31, *k1), (A32, k2)]));
    let k4 = velocity(s, &lc(y, h, &[(A41, *k1), (A42, k2), (A43, k3)]));
    let k5 = velocity(s, &lc(y, h, &[(A51, *k1), (A52, k2), (A53, k3), (A54, k4)]));
    let k6 = velocity(
        s,
        &lc(
            y,
            h,
            &[(A61, *k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        ),
    );
    let y_new = lc(y, h, &[(B1, *k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = velocity(s, &y_new);
    let err_vec = lc(
        &FieldPair::new(C64::new(0.0, 0.0), C64::new(0.0, 0.0)),
        h,
        &[(E1, *k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)],
    );
    let sc1 = opts.atol + opts.rtol * y.phi1.norm().max(y_new.phi1.norm());
    let sc2 = opts.atol + opts.rtol * y.phi2.norm().max(y_new.phi2.norm());
    let err =
        (0.5 * ((err_vec.phi1.norm() / sc1).powi(2) + (err_vec.phi2.norm() / sc2).powi(2))).sqrt();
    StepResult {
        y_new,
        k7,
        err,
        stages: [*k1, k2, k3, k4, k5, k6, k7],
    }
}

/// Fifth-order interpolant over an accepted step, theta in [0, 1].
fn dense_eval(
    y: &FieldPair,
    y_new: &FieldPair,
    stages: &[FieldPair; 7],
    h: f64,
    theta: f64,
) -> FieldPair {
    let eval = |yc: C64, ync: C64, ks: [C64; 7]| -> C64 {
        let ydiff = ync - yc;
        let bspl = h * ks[0] - ydiff;
        let r4 = ydiff - h * ks[6] - bspl;
        let r5 = h * (D1 * ks[0] + D3 * ks[2] + D4 * ks[3] + D5 * ks[4] + D6 * ks[5] + D7 * ks[6]);
        yc + theta * (ydiff + (1.0 - theta) * (bspl + theta * (r4 + (1.0 - theta) * r5)))
    };
    FieldPair::new(
        eval(
            y.phi1,
            y_new.phi1,
            [
                stages[0].phi1,
                stages[1].phi1,
                stages[2].phi1,
                stages[3].phi1,
                stages[4].phi1,
                stages[5].phi1,
                stages[6].phi1,
            ],
        ),
        eval(
            y.phi2,
            y_new.phi2,
            [
                stages[0].phi2,
                stages[1].phi2,
                stages[2].phi2,
                stages[3].phi2,
                stages[4].phi2,
                stages[5].phi2,
                stages[6].phi2,
            ],
        ),
    )
}

fn initial_step(
    s: &SystemRep,
    y0: &FieldPair,
    f0: &FieldPair,
    span: f64,
    opts: &OdeOptions,
) -> f64 {
    let sc1 = opts.atol + opts.rtol * y0.phi1.norm();
    let sc2 = opts.atol + opts.rtol * y0.phi2.norm();
    let d0 = (0.5 * ((y0.phi1.norm() / sc1).powi(2) + (y0.phi2.norm() / sc2).powi(2))).sqrt();
    let d1 = (0.5 * ((f0.phi1.norm() / sc1).powi(2) + (f0.phi2.norm() / sc2).powi(2))).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(span);
    let y1 = lc(y0, h0, &[(1.0, *f0)]);
    let f1 = velocity(s, &y1);
    let d2 = (0.5
        * (((f1.phi1 - f0.phi1).norm() / sc1).powi(2)
            + ((f1.phi2 - f0.phi2).norm() / sc2).powi(2)))
    .sqrt()
        / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

/// Integrate from t0 to t1 and return the endpoint state.
pub fn integrate(
    s: &SystemRep,
    y0: &FieldPair,
    t0: f64,
    t1: f64,
    opts: &OdeOptions,
) -> Result<FieldPair, OdeError> {
    let traj = drive(s, y0, t0, t1, &[t1], opts)?;
    Ok(*traj.states.last().expect("one sample requested"))
}

/// Integrate from t0 to t1, sampling the dense output at n uniformly spaced
/// times (endpoints included).
pub fn integrate_sampled(
    s: &SystemRep,
    y0: &FieldPair,
    t0: f64,
    t1: f64,
    n: usize,
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError> {
    assert!(n >= 2, "need at least the two endpoint samples");
    let times: Vec<f64> = (0..n)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
        .collect();
    drive(s, y0, t0, t1, &times, opts)
}

/// Integrate and sample the dense output at the given ascending times in
/// [t0, t1].
pub fn integrate_at(
    s: &SystemRep,
    y0: &FieldPair,
    t0: f64,
    t1: f64,
    times: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError> {
    drive(s, y0, t0, t1, times, opts)
}

fn drive(
    s: &SystemRep,
    y0: &FieldPair,
    t0: f64,
    t1: f64,
    sample_times: &[f64],
    opts: &OdeOptions,
) -> Result<Trajectory, OdeError> {
    assert!(t1 > t0, "integration interval must be forward and nonempty");
    let span = t1 - t0;
    let eps_t = 1e-12 * span.max(t1.abs());

    let mut times = Vec::with_capacity(sample_times.len());
    let mut states = Vec::with_capacity(sample_times.len());
    let mut sample_idx = 0;
    // Samples at or before t0 take the initial state.
    while sample_idx < sample_times.len() && sample_times[sample_idx] <= t0 + eps_t {
        times.push(sample_times[sample_idx]);
        states.push(*y0);
        sample_idx += 1;
    }

    let mut t = t0;
    let mut y = *y0;
    let mut k1 = velocity(s, &y);
    let mut h = opts
        .initial_step
        .unwrap_or_else(|| initial_step(s, &y, &k1, span, opts));
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    let mut just_rejected = false;

    while t < t1 - eps_t {
        if accepted + rejected >= opts.max_steps {
            return Err(OdeError::StepLimitExceeded { time: t });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(OdeError::StepSizeUnderflow { time: t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let step = dopri5_step(s, &y, &k1, h, opts);
        if step.err <= 1.0 {
            // Emit every sample inside (t, t+h].
            while sample_idx < sample_times.len() && sample_times[sample_idx] <= t + h + eps_t {
                let theta = ((sample_times[sample_idx] - t) / h).clamp(0.0, 1.0);
                times.push(sample_times[sample_idx]);
                states.push(dense_eval(&y, &step.y_new, &step.stages, h, theta));
                sample_idx += 1;
            }
            t += h;
            y = step.y_new;
            k1 = step.k7;
            accepted += 1;
            let facmax = if just_rejected { 1.0 } else { 5.0 };
            let fac = (0.9 * step.err.powf(-0.2)).clamp(0.2, facmax);
            h *= fac;
            just_rejected = false;
        } else {
            rejected += 1;
            just_rejected = true;
            h *= (0.9 * step.err.powf(-0.2)).clamp(0.2, 1.0).min(0.5);
        }
    }

    // Anything left over is the endpoint (within round-off).
    while sample_idx < sample_times.len() {
        times.push(sample_times[sample_idx]);
        states.push(y);
        sample_idx += 1;
    }

    Ok(Trajectory {
        times,
        states,
        accepted_steps: accepted,
        rejected_steps: rejected,
    })
}
