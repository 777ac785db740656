//! Cross-module invariants: transport laws of the change-of-variables
//! calculus, potential neutrality, flow equivariance, and conservation
//! along integrated trajectories.

use nlslab_core::{
    classify, coefficients_to_system, conserved_quantities, dmatrix, eigen_decompose,
    evaluate_conserved, example_a, example_b, integrate, integrate_sampled, max_drift,
    quadratic_form, random_form, random_gl2, system_to_coefficients, transform_system,
    CoefficientVector, FieldPair, OdeOptions, SystemRep, ALL_FORM_TAGS, C64,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(rng: &mut ChaCha8Rng) -> FieldPair {
    FieldPair::new(
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    )
}

fn random_system(rng: &mut ChaCha8Rng) -> SystemRep {
    let mut c = [0.0; 12];
    for x in &mut c {
        *x = rng.gen_range(-2.0..2.0);
    }
    coefficients_to_system(&CoefficientVector::new(c))
}

#[test]
fn flow_commutes_with_changes_of_variables_at_equal_times() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let opts = OdeOptions::default();
    for _ in 0..6 {
        let s = random_system(&mut rng);
        let m = random_gl2(&mut rng);
        let sm = transform_system(&s, &m);
        let y0 = random_state(&mut rng);
        let y0m = m.apply(&y0);
        let traj = integrate_sampled(&s, &y0, 0.0, 20.0, 21, &opts).unwrap();
        let traj_m = integrate_sampled(&sm, &y0m, 0.0, 20.0, 21, &opts).unwrap();
        for (a, b) in traj.states.iter().zip(&traj_m.states) {
            let mapped = m.apply(a);
            let err = (mapped.phi1 - b.phi1).norm() + (mapped.phi2 - b.phi2).norm();
            assert!(
                err < 1e-6,
                "equivariance violated by {err}; no time rescaling is involved"
            );
        }
    }
}

#[test]
fn potential_part_is_neutral_for_observables_and_classification() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let with_v = random_system(&mut rng);
        let without_v = SystemRep::new(with_v.a, nalgebra::Vector3::zeros());
        let y0 = random_state(&mut rng);
        let opts = OdeOptions::default();
        let t1 = integrate_sampled(&with_v, &y0, 0.0, 10.0, 41, &opts).unwrap();
        let t2 = integrate_sampled(&without_v, &y0, 0.0, 10.0, 41, &opts).unwrap();
        for (a, b) in t1.states.iter().zip(&t2.states) {
            let oa = nlslab_core::QuadraticObservables::of(a);
            let ob = nlslab_core::QuadraticObservables::of(b);
            assert!((oa.rho1 - ob.rho1).abs() < 1e-7);
            assert!((oa.rho2 - ob.rho2).abs() < 1e-7);
            assert!((oa.r - ob.r).abs() < 1e-7);
            assert!((oa.i - ob.i).abs() < 1e-7);
        }
        let ca = classify(&with_v);
        let cb = classify(&without_v);
        assert_eq!(ca.case_label, cb.case_label);
        assert_eq!(ca.wngc, cb.wngc);
    }
}

#[test]
fn synthesized_quantities_hold_for_all_worked_examples() {
    let systems = [
        example_a(0.5),
        example_a(2.0),
        example_a(std::f64::consts::SQRT_2),
        example_b(),
    ];
    let y0 = FieldPair::new(C64::new(0.55, 0.2), C64::new(-0.25, 0.45));
    let opts = OdeOptions::default();
    for s in &systems {
        let specs = conserved_quantities(s).unwrap();
        assert!(!specs.is_empty());
        let traj = integrate_sampled(s, &y0, 0.0, 100.0, 101, &opts).unwrap();
        for spec in &specs {
            let series: Vec<f64> = traj
                .states
                .iter()
                .map(|p| evaluate_conserved(spec, p).unwrap())
                .collect();
            assert!(
                max_drift(&series) < 1e-6,
                "conserved quantity drifted by {}",
                max_drift(&series)
            );
        }
    }
}

#[test]
fn classification_is_invariant_under_changes_of_variables() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let mut systems = vec![example_a(2.0), example_b()];
    for tag in ALL_FORM_TAGS {
        systems.push(random_form(&mut rng, tag).build().unwrap());
    }
    for s in &systems {
        let base = classify(s);
        for _ in 0..100 {
            let m = random_gl2(&mut rng);
            let t = transform_system(s, &m);
            let c = classify(&t);
            assert_eq!(
                c.case_label, base.case_label,
                "case label moved under det {}",
                m.det
            );
            assert_eq!(c.rank, base.rank);
            assert_eq!(c.wngc, base.wngc);
            assert_eq!(c.assumption1.is_some(), base.assumption1.is_some());
            assert_eq!(c.assumption2.is_some(), base.assumption2.is_some());
        }
    }
}

#[test]
fn printed_combination_is_conserved_and_coercive_for_second_example() {
    let s = example_b();
    // h1 = rho1 * Q-^2 and h2 = rho2 * Q- with Q- = Q((2,1,2)); the bound
    // controls G = h1^2 + h2^3, homogeneous of degree 6.
    let q_dir = nalgebra::Vector3::new(2.0, 1.0, 2.0);
    let g = |p: &FieldPair| {
        let o = nlslab_core::QuadraticObservables::of(p);
        let q = quadratic_form(p, &q_dir);
        let h1 = o.rho1 * q * q;
        let h2 = o.rho2 * q;
        h1 * h1 + h2 * h2 * h2
    };
    let y0 = FieldPair::new(C64::new(0.6, 0.1), C64::new(0.2, -0.5));
    let traj = integrate_sampled(&s, &y0, 0.0, 100.0, 101, &OdeOptions::default()).unwrap();
    let series: Vec<f64> = traj.states.iter().map(|p| g(p)).collect();
    assert!(max_drift(&series) < 1e-6);

    let bound = nlslab_core::coercivity_bound(&s).unwrap();
    let functional = nlslab_core::coercive_functional(&s).unwrap();
    assert_eq!(bound.degree, 6.0);
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..200 {
        let p = random_state(&mut rng);
        let mass = p.norm_sq();
        if mass < 1e-3 {
            continue;
        }
        let val = functional.eval(&p);
        let scale = mass.powf(bound.degree);
        assert!(
            bound.c_minus * scale <= val * (1.0 + 1e-6),
            "lower sandwich failed: {} vs {val}",
            bound.c_minus * scale
        );
        assert!(
            val <= bound.c_plus * scale * (1.0 + 1e-6),
            "upper sandwich failed: {val} vs {}",
            bound.c_plus * scale
        );
    }
}

#[test]
fn eigen_data_transports_with_the_inverse_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    for _ in 0..50 {
        let s = random_system(&mut rng);
        let m = random_gl2(&mut rng);
        let t = transform_system(&s, &m);
        let es = eigen_decompose(&s, 1e-8);
        let et = eigen_decompose(&t, 1e-8);
        if es.borderline || et.borderline {
            continue;
        }
        let mut want: Vec<f64> = es.real_values().iter().map(|v| v / m.det).collect();
        let mut got: Vec<f64> = et.real_values().to_vec();
        want.sort_by(f64::total_cmp);
        got.sort_by(f64::total_cmp);
        assert_eq!(want.len(), got.len());
        for (w, g) in want.iter().zip(&got) {
            assert!(
                (w - g).abs() < 1e-6 * (1.0 + w.abs()),
                "eigenvalue transport failed: {w} vs {g}"
            );
        }
        // The potential transports by D(M) / det, built into transform_system.
        let d = dmatrix(&m);
        let v_want = d * s.v / m.det;
        assert!((v_want - t.v).amax() < 1e-9 * (1.0 + v_want.amax()));
    }
}

#[test]
fn integrator_is_self_consistent_across_tolerances() {
    let s = example_b();
    let y0 = FieldPair::new(C64::new(0.7, -0.1), C64::new(0.15, 0.6));
    let tight = OdeOptions {
        rtol: 1e-12,
        atol: 1e-14,
        ..OdeOptions::default()
    };
    let coarse = OdeOptions::default();
    let a = integrate(&s, &y0, 0.0, 20.0, &tight).unwrap();
    let b = integrate(&s, &y0, 0.0, 20.0, &coarse).unwrap();
    let err = (a.phi1 - b.phi1).norm() + (a.phi2 - b.phi2).norm();
    assert!(err < 1e-6, "tolerance sweep disagreement {err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn coefficients_round_trip_through_the_representation(
        c in prop::array::uniform12(-5.0f64..5.0),
    ) {
        let cv = CoefficientVector::new(c);
        let s = coefficients_to_system(&cv);
        let back = system_to_coefficients(&s);
        for (x, y) in cv.c.iter().zip(&back.c) {
            prop_assert!((x - y).abs() < 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn quadratic_forms_transport_with_determinant_weight(
        entries in prop::array::uniform4(-3.0f64..3.0),
        a in prop::array::uniform3(-2.0f64..2.0),
        re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
        re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
    ) {
        let m = nalgebra::Matrix2::new(entries[0], entries[1], entries[2], entries[3]);
        prop_assume!(m.determinant().abs() > 0.05);
        let g = nlslab_core::Gl2Transform::new(m).unwrap();
        let p = FieldPair::new(C64::new(re1, im1), C64::new(re2, im2));
        let av = nalgebra::Vector3::new(a[0], a[1], a[2]);
        let lhs = quadratic_form(&g.apply(&p), &(dmatrix(&g) * av));
        let rhs = g.det * quadratic_form(&p, &av);
        prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + rhs.abs()));
    }

    #[test]
    fn representation_rhs_agrees_with_monomial_rhs(
        c in prop::array::uniform12(-3.0f64..3.0),
        re1 in -1.0f64..1.0, im1 in -1.0f64..1.0,
        re2 in -1.0f64..1.0, im2 in -1.0f64..1.0,
    ) {
        let cv = CoefficientVector::new(c);
        let s = coefficients_to_system(&cv);
        let p = FieldPair::new(C64::new(re1, im1), C64::new(re2, im2));
        let lhs = nlslab_core::nonlinearity(&s, &p);
        let rhs = nlslab_core::nonlinearity_from_coefficients(&cv, &p);
        prop_assert!((lhs.phi1 - rhs.phi1).norm() < 1e-11);
        prop_assert!((lhs.phi2 - rhs.phi2).norm() < 1e-11);
    }
}
