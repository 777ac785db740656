//! Acceptance gate for the whole library: one test per numbered criterion,
//! each asserting its stated tolerance and printing a summary line. These
//! run the full-scale configurations; scaled-down smoke versions of the same
//! checks live next to the modules they exercise.

use nalgebra::{Matrix3, Vector3};
use nlslab_core::algebra::cone_disc;
use nlslab_core::{
    check_derivative_identity, coefficients_to_system, coercivity_bound, conserved_quantities,
    dmatrix, dmatrix_inverse, eigen_decompose, evaluate_conserved, example_a,
    example_a_coefficients, example_b, example_b_coefficients, integrate_sampled, normalize,
    quadratic_form, random_disguise, random_form, random_gl2, system_to_coefficients,
    transform_system, CoefficientVector, FieldPair, FormTag, Grid, OdeOptions, PdeState, SplitStep,
    StandardForm, SystemRep, ALL_FORM_TAGS, C64,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn angle(u: &Vector3<f64>, v: &Vector3<f64>) -> f64 {
    (u.normalize().dot(&v.normalize()).abs().min(1.0)).acos()
}

/// sup_t |q(t) - q(0)| / |q(0)|; the initial value must be bounded away from
/// zero for the ratio to mean anything.
fn relative_drift(values: &[f64]) -> f64 {
    let v0 = values[0];
    assert!(
        v0.abs() > 1e-6,
        "conserved quantity starts near zero ({v0:.3e}); pick other data"
    );
    values
        .iter()
        .map(|v| (v - v0).abs() / v0.abs())
        .fold(0.0, f64::max)
}

fn random_state(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> FieldPair {
    loop {
        let p = FieldPair::new(
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        );
        let m = p.norm_sq();
        if m >= lo && m <= hi {
            return p;
        }
    }
}

#[test]
fn c1_representation_round_trip() {
    // Printed matrix-vector pair of the one-parameter family, exactly.
    for &zeta in &[0.5, 2.0, std::f64::consts::SQRT_2, -1.0, 3.0] {
        let s = coefficients_to_system(&example_a_coefficients(zeta));
        let a = Matrix3::new(
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
        assert_eq!(s.a, a, "matrix mismatch at zeta = {zeta}");
        assert_eq!(s.v, Vector3::new(0.0, (1.0 - 3.0 * zeta) / 2.0, 0.0));
    }
    // And of the fixed coupled example, with a vanishing potential part.
    let s = coefficients_to_system(&example_b_coefficients());
    assert_eq!(
        s.a,
        Matrix3::new(2.0, -6.0, 0.0, 0.0, -1.0, 0.0, 0.0, -4.0, 1.0)
    );
    assert_eq!(s.v, Vector3::zeros());

    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let c: [f64; 12] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let cv = CoefficientVector::new(c);
        let back = system_to_coefficients(&coefficients_to_system(&cv));
        for k in 0..12 {
            worst = worst.max((c[k] - back.c[k]).abs());
        }
        let a: [f64; 9] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let v: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-5.0..5.0));
        let s = SystemRep::new(Matrix3::from_row_slice(&a), Vector3::from_row_slice(&v));
        let s2 = coefficients_to_system(&system_to_coefficients(&s));
        worst = worst.max((s.a - s2.a).amax()).max((s.v - s2.v).amax());
    }
    assert!(worst < 1e-12, "round-trip error {worst:.3e} >= 1e-12");
    println!("PASS representation round trip: max error {worst:.3e} over 1000 draws each way");
}

#[test]
fn c2_eigen_structure_of_the_coupled_example() {
    let e = eigen_decompose(&example_b(), 1e-8);
    assert!(!e.borderline);
    assert_eq!(e.real.len(), 3, "expected three simple real eigenvalues");
    let expected = [
        (2.0, Vector3::new(1.0, 0.0, 0.0)),
        (1.0, Vector3::new(0.0, 0.0, 1.0)),
        (-1.0, Vector3::new(2.0, 1.0, 2.0)),
    ];
    let mut worst = 0.0f64;
    for (value, direction) in expected {
        let pair = e
            .eigenvalue_near(value, 1e-8)
            .unwrap_or_else(|| panic!("eigenvalue {value} not found"));
        assert!((pair.value - value).abs() < 1e-8);
        assert_eq!(pair.eigenbasis.len(), 1);
        let a = angle(&pair.eigenbasis[0], &direction);
        assert!(a < 1e-8, "eigenvector angle {a:.3e} rad at value {value}");
        worst = worst.max(a);
    }
    println!("PASS eigen structure: values (2, 1, -1), worst angle {worst:.3e} rad");
}

#[test]
fn c3_observable_rate_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(301);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let a: [f64; 9] = core::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let v: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-2.0..2.0));
        let s = SystemRep::new(Matrix3::from_row_slice(&a), Vector3::from_row_slice(&v));
        let p = random_state(&mut rng, 0.05, 4.0);
        let dir = Vector3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let (fd, rate) = check_derivative_identity(&s, &p, &dir, 1e-5);
        let scaled = (fd - rate).abs() / (1.0 + rate.abs());
        assert!(
            scaled <= 1e-7,
            "rate identity residual {scaled:.3e} (fd {fd:.6e} vs rate {rate:.6e})"
        );
        worst = worst.max(scaled);
    }
    println!("PASS rate identity: worst scaled residual {worst:.3e} over 1000 draws");
}

#[test]
fn c4_conserved_quantity_drift() {
    let opts = OdeOptions::default();
    let y0 = FieldPair::new(C64::new(0.9, 0.2), C64::new(-0.3, 0.7));
    let systems = [
        ("family zeta=0.5", example_a(0.5)),
        ("family zeta=2", example_a(2.0)),
        ("family zeta=sqrt(2)", example_a(std::f64::consts::SQRT_2)),
        ("coupled example", example_b()),
    ];
    let mut worst = 0.0f64;
    for (name, s) in &systems {
        let traj = integrate_sampled(s, &y0, 0.0, 100.0, 201, &opts).unwrap();
        let specs = conserved_quantities(s).unwrap();
        assert!(!specs.is_empty());
        for (k, spec) in specs.iter().enumerate() {
            let vals: Vec<f64> = traj
                .states
                .iter()
                .map(|p| evaluate_conserved(spec, p).unwrap())
                .collect();
            let d = relative_drift(&vals);
            assert!(d < 1e-6, "{name} quantity {k} drifted {d:.3e}");
            worst = worst.max(d);
        }
    }
    // The printed combination family of the coupled example: the signed
    // products h1 = Q(p1) Q(p3)^2 and h2 = Q(p2) Q(p3), and h1^2 + h2^3.
    let s = example_b();
    let p1 = Vector3::new(1.0, 0.0, 0.0);
    let p2 = Vector3::new(0.0, 0.0, 1.0);
    let p3 = Vector3::new(2.0, 1.0, 2.0);
    let traj = integrate_sampled(&s, &y0, 0.0, 100.0, 201, &opts).unwrap();
    let h1 = |p: &FieldPair| quadratic_form(p, &p1) * quadratic_form(p, &p3).powi(2);
    let h2 = |p: &FieldPair| quadratic_form(p, &p2) * quadratic_form(p, &p3);
    let evals: [(&str, Box<dyn Fn(&FieldPair) -> f64>); 3] = [
        ("h1", Box::new(h1)),
        ("h2", Box::new(h2)),
        ("h1^2 + h2^3", Box::new(|p| h1(p).powi(2) + h2(p).powi(3))),
    ];
    for (name, f) in &evals {
        let vals: Vec<f64> = traj.states.iter().map(|p| f(p)).collect();
        let d = relative_drift(&vals);
        assert!(d < 1e-6, "{name} drifted {d:.3e}");
        worst = worst.max(d);
    }
    println!("PASS conservation: worst relative drift {worst:.3e} over [0, 100]");
}

#[test]
fn c5_global_mass_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(501);
    let opts = OdeOptions::default();
    let families = [FormTag::A11, FormTag::A13, FormTag::A21, FormTag::A22];
    let mut checked = 0usize;
    let mut tightest = 0.0f64;
    for tag in families {
        for i in 0..13 {
            let form = random_form(&mut rng, tag);
            let (s, _) = random_disguise(&mut rng, &form.build().unwrap());
            let bound = coercivity_bound(&s)
                .unwrap_or_else(|e| panic!("{tag:?} #{i}: no coercive bound: {e}"));
            let y0 = random_state(&mut rng, 0.5, 2.0);
            let traj = integrate_sampled(&s, &y0, 0.0, 1000.0, 2001, &opts).unwrap();
            let (lo, hi) = traj.mass_extremes();
            let cap = bound.ratio_bound * lo;
            assert!(
                hi <= cap * (1.0 + 1e-9),
                "{tag:?} #{i}: mass ratio {:.6} exceeds computed constant {:.6}",
                hi / lo,
                bound.ratio_bound
            );
            tightest = tightest.max(hi / cap);
            checked += 1;
        }
    }
    assert!(checked >= 50);
    println!(
        "PASS global bound: {checked} disguised systems over [0, 1000], tightest margin {:.3} of the constant",
        tightest
    );
}

/// Parameter agreement between two recovered forms of the same family. The
/// shear family's eta2/eta3 are identifiable only through their difference
/// (the generalized eigenvector is free up to the eigen direction), so that
/// family compares the difference instead.
fn assert_params_match(tag: FormTag, first: &StandardForm, second: &StandardForm, tol: f64) {
    let collect = |f: &StandardForm| -> std::collections::BTreeMap<&'static str, f64> {
        f.params().into_iter().collect()
    };
    let (a, b) = (collect(first), collect(second));
    assert_eq!(a.len(), b.len());
    if tag == FormTag::A12 {
        for key in ["lambda", "eta1", "eta4"] {
            let (x, y) = (a[key], b[key]);
            assert!(
                (x - y).abs() <= tol * (1.0 + x.abs()),
                "{tag:?} param {key}: {x} vs {y}"
            );
        }
        let (dx, dy) = (a["eta2"] - a["eta3"], b["eta2"] - b["eta3"]);
        assert!(
            (dx - dy).abs() <= tol * (1.0 + dx.abs()),
            "{tag:?} param eta2 - eta3: {dx} vs {dy}"
        );
    } else {
        for (key, x) in &a {
            let y = b[key];
            assert!(
                (x - y).abs() <= tol * (1.0 + x.abs()),
                "{tag:?} param {key}: {x} vs {y}"
            );
        }
    }
}

#[test]
fn c6_normalization_across_disguised_families() {
    let mut rng = ChaCha8Rng::seed_from_u64(601);
    const PER_FAMILY: usize = 500;
    for tag in ALL_FORM_TAGS {
        for i in 0..PER_FAMILY {
            let form = random_form(&mut rng, tag);
            let s0 = form.build().unwrap();
            let (s, _) = random_disguise(&mut rng, &s0);
            let r = normalize(&s).unwrap_or_else(|e| panic!("{tag:?} #{i}: {e}"));
            assert_eq!(r.form.tag(), tag, "{tag:?} #{i}: wrong family recovered");

            // Template structure, structural zeros included: the matrix
            // rebuilt from the recovered parameters has them exactly.
            let norm_a = r.a_standard.a.amax();
            let rebuilt = r.form.build().unwrap();
            let structural = (r.a_standard.a - rebuilt.a).amax();
            assert!(
                structural < 1e-8 * norm_a,
                "{tag:?} #{i}: structure residual {structural:.3e} vs norm {norm_a:.3e}"
            );

            // Soundness: the accumulated transform really produces the
            // returned standard representation.
            let t = transform_system(&s, &r.m_total);
            let sound = (t.a - r.a_standard.a).amax();
            assert!(
                sound < 1e-8 * norm_a.max(1.0),
                "{tag:?} #{i}: transform soundness residual {sound:.3e}"
            );

            // Eigenvalue scaling law under the accumulated determinant,
            // checked through the symmetric functions of the spectrum: they
            // transport exactly by det, det^2, det^3 and stay well posed on
            // repeated (defective) spectra where individual numerical
            // eigenvalues split by the square root of the rounding error.
            let det_m = r.m_total.det;
            let sym = |a: &Matrix3<f64>| {
                let tr = a.trace();
                let e2 = 0.5 * (tr * tr - (a * a).trace());
                (tr, e2, a.determinant())
            };
            let (tr_s, e2_s, d3_s) = sym(&s.a);
            let (tr_t, e2_t, d3_t) = sym(&r.a_standard.a);
            let checks = [
                ("trace", tr_s / det_m, tr_t),
                ("e2", e2_s / (det_m * det_m), e2_t),
                ("det", d3_s / (det_m * det_m * det_m), d3_t),
            ];
            for (name, w, g) in checks {
                assert!(
                    (w - g).abs() < 1e-8 * (1.0 + w.abs()),
                    "{tag:?} #{i}: eigenvalue scaling ({name}) {w} vs {g}"
                );
            }

            // Idempotence: normalizing the standard form recovers the same
            // parameters.
            let r2 = normalize(&r.a_standard)
                .unwrap_or_else(|e| panic!("{tag:?} #{i}: second pass failed: {e}"));
            assert_eq!(r2.form.tag(), tag);
            assert_params_match(tag, &r.form, &r2.form, 1e-6);
        }
    }
    println!(
        "PASS normalization: {PER_FAMILY} disguises per family across {} families",
        ALL_FORM_TAGS.len()
    );
}

#[test]
fn c7_transport_calculus() {
    let mut rng = ChaCha8Rng::seed_from_u64(701);
    for i in 0..1000 {
        let m = random_gl2(&mut rng);
        let d = dmatrix(&m);
        let dinv = dmatrix_inverse(&m);
        assert!(
            (d.determinant() - 1.0).abs() < 1e-10,
            "det {:.3e}",
            d.determinant()
        );
        assert!(((d * dinv) - Matrix3::identity()).amax() < 1e-10);
        assert!((dinv - dmatrix(&m.inverse())).amax() < 1e-10 * (1.0 + dinv.amax()));

        // The discriminant (hence the cone) is carried over unchanged.
        let a = Vector3::new(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
        );
        let disc_err = (cone_disc(&(d * a)) - cone_disc(&a)).abs();
        assert!(disc_err < 1e-10 * (1.0 + cone_disc(&a).abs()) * (1.0 + d.amax().powi(2)));

        // Quadratic forms transport with determinant weight.
        let p = random_state(&mut rng, 0.05, 4.0);
        let lhs = quadratic_form(&m.apply(&p), &(d * a));
        let rhs = m.det * quadratic_form(&p, &a);
        assert!((lhs - rhs).abs() < 1e-10 * (1.0 + rhs.abs()) * (1.0 + d.amax()));

        // Eigenvectors of a transformed system are the transported ones,
        // with eigenvalues scaled by the inverse determinant.
        let form = random_form(&mut rng, ALL_FORM_TAGS[i % ALL_FORM_TAGS.len()]);
        let s = form.build().unwrap();
        let t = transform_system(&s, &m);
        for pair in &eigen_decompose(&s, 1e-8).real {
            for w in &pair.eigenbasis {
                let w2 = d * w;
                let resid = (t.a * w2 - w2 * (pair.value / m.det)).amax();
                let scale = (1.0 + t.a.amax()) * w2.amax();
                assert!(
                    resid < 1e-10 * scale,
                    "eigenvector transport residual {resid:.3e} at value {}",
                    pair.value
                );
            }
        }
    }
    println!("PASS transport calculus: 1000 random changes of variables");
}

#[test]
fn c8_modified_scattering_decay() {
    use nlslab_core::AsymptoticsConfig;
    let cfg = AsymptoticsConfig::default();
    assert_eq!(cfg.n, 4096);
    assert_eq!(cfg.eps, 0.1);
    // Every sub-check is evaluated and printed before the verdict so a band
    // miss still leaves the full measurement on record.
    let mut failures: Vec<String> = Vec::new();
    for (name, s) in [
        ("coupled example", example_b()),
        ("family zeta=0.5", example_a(0.5)),
    ] {
        let rep = nlslab_core::run_asymptotics(&s, &cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
        let mut check = |label: &str, value: f64, lo: f64, hi: f64| {
            let ok = (lo..=hi).contains(&value);
            println!(
                "{} scattering decay ({name}): {label} {value:.4} vs [{lo}, {hi}]",
                if ok { "PASS" } else { "FAIL" }
            );
            if !ok {
                failures.push(format!("{name}: {label} {value:.4} outside [{lo}, {hi}]"));
            }
        };
        check("sup-norm error slope", rep.linf_slope, -0.9, -0.55);
        check("L2 error slope", rep.l2_slope, -0.65, -0.35);
        check("amplitude proxy", rep.y_proxy, 0.0, 10.0 * cfg.eps);
    }
    assert!(failures.is_empty(), "{}", failures.join("; "));
}

#[test]
fn c9_solver_oracles() {
    // Closed-form free evolution of e^{-x^2/2}.
    let gaussian_exact = |t: f64, x: f64| -> C64 {
        let denom = C64::new(1.0, t);
        (C64::new(-x * x, 0.0) / (2.0 * denom)).exp() / denom.sqrt()
    };
    let ell = 10.0 * std::f64::consts::PI;
    let free = SystemRep::zero();
    let split = SplitStep::new(&free, Grid::new(512, ell).unwrap(), 0.01);
    let mut st = PdeState {
        t: 0.0,
        u1: split
            .grid
            .xs
            .iter()
            .map(|&x| gaussian_exact(0.0, x))
            .collect(),
        u2: vec![C64::new(0.0, 0.0); split.grid.n],
    };
    split.advance(&mut st, 100);
    let free_err = split
        .grid
        .xs
        .iter()
        .enumerate()
        .map(|(j, &x)| (st.u1[j] - gaussian_exact(1.0, x)).norm())
        .fold(0.0, f64::max);
    assert!(free_err < 1e-8, "free propagation error {free_err:.3e}");

    // Second-order self-convergence on time-step halving.
    let s = example_b();
    let run = |dt: f64| {
        let split = SplitStep::new(&s, Grid::new(256, ell).unwrap(), dt);
        let mut st = nlslab_core::gaussian_pair(&split.grid, 0.3, 1.0);
        split.advance(&mut st, (0.4 / dt).round() as usize);
        st
    };
    let reference = run(0.4 / 512.0);
    let err = |st: &PdeState| {
        st.u1
            .iter()
            .zip(&reference.u1)
            .chain(st.u2.iter().zip(&reference.u2))
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    };
    let ratio = err(&run(0.4 / 32.0)) / err(&run(0.4 / 64.0));
    assert!(ratio >= 3.5, "self-convergence ratio {ratio:.3} below 3.5");

    // The profile transform is unitary.
    let split = SplitStep::new(&free, Grid::new(512, ell).unwrap(), 0.02);
    let st = PdeState {
        t: 0.0,
        u1: split
            .grid
            .xs
            .iter()
            .map(|&x| gaussian_exact(0.0, x))
            .collect(),
        u2: split
            .grid
            .xs
            .iter()
            .map(|&x| 0.5 * gaussian_exact(0.0, x) * C64::new(0.0, 0.4 * x).exp())
            .collect(),
    };
    let w = split.extract_w(&st);
    let l2_state = st.l2_norm(&split.grid);
    let l2_w = w.l2_norm(split.grid.dxi);
    let iso_err = (l2_state - l2_w).abs() / l2_state;
    assert!(iso_err < 1e-12, "transform isometry defect {iso_err:.3e}");

    println!(
        "PASS solver oracles: free-flow error {free_err:.3e}, convergence ratio {ratio:.2}, isometry defect {iso_err:.3e}"
    );
}
