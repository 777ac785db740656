//! Analysis toolkit for systems of two cubic Schrodinger equations coupled
//! through gauge-invariant cubic nonlinearities.
//!
//! The twelve real coupling constants of such a system are equivalent to a
//! 3x3 real matrix acting on the quadratic observables (|u1|^2, 2Re(u1*u2),
//! |u2|^2) together with a real 3-vector describing a common-phase potential.
//! Everything in this crate is built on that correspondence:
//!
//! * [`algebra`] - the coefficient <-> matrix-vector maps, cone membership
//!   of observable directions, and the GL2 change-of-variables calculus;
//! * [`eigen`] - eigenvalue clustering and eigenspace extraction for the
//!   observable matrix;
//! * [`classify`] - rank/cone case analysis, the weak null gauge condition,
//!   the two solvability assumptions, and synthesis of (generally
//!   non-polynomial) conserved quantities;
//! * [`normalize`] - constructive reduction to one of five standard forms
//!   by an explicit GL2 change of variables;
//! * [`templates`] - builders for the standard forms and the worked example
//!   families, plus random disguises for testing;
//! * [`ode`] - adaptive integration of the spatially reduced system with
//!   conservation and global-bound diagnostics;
//! * [`pde`] - a periodic split-step solver and the long-time profile
//!   comparison that exhibits modified scattering.

pub mod algebra;
pub mod classify;
pub mod eigen;
pub mod normalize;
pub mod ode;
pub mod pde;
pub mod templates;

pub use algebra::{
    coefficients_to_system, cone_classify, dmatrix, dmatrix_inverse, quadratic_form,
    subspace_cone_witness, subspace_meets_cone, system_to_coefficients, transform_system,
    AlgebraError, CoefficientVector, ConeClass, ConeTarget, ConeVector, FieldPair, Gl2Transform,
    QuadraticObservables, SystemRep, C64,
};
pub use classify::{
    classify, coercive_functional, coercivity_bound, conserved_quantities, evaluate_conserved,
    observable_sphere_extrema, Assumption1, Assumption2, CaseLabel, Classification, ClassifyError,
    CoerciveFunctional, CoercivityBound, ConservedQuantitySpec,
};
pub use eigen::{eigen_decompose, rank_of, EigenStructure, RealEigenpair, CLUSTER_TOL};
pub use normalize::{
    normalize, normalize_assumption1, normalize_assumption2, NormalizationResult,
    NormalizationStep, NormalizeError,
};
pub use ode::{
    check_derivative_identity, integrate, integrate_at, integrate_sampled, max_drift, nonlinearity,
    nonlinearity_from_coefficients, quadratic_form_rate, velocity, OdeError, OdeOptions,
    Trajectory,
};
pub use pde::{
    fit_loglog_slope, gaussian_pair, run_asymptotics, AsymptoticsConfig, AsymptoticsReport, Grid,
    PdeError, PdeState, SplitStep, WProfile,
};
pub use templates::{
    example_a, example_a_coefficients, example_b, example_b_coefficients, random_disguise,
    random_form, random_gl2, FormTag, StandardForm, TemplateError, ALL_FORM_TAGS,
};
