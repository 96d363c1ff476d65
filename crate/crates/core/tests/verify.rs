use robinplate::verify::{
    cubic, evaluate_point, quartic, quartic_product_form, run_all, run_suite, spectral_parameter_upper_skips, GridPoint, GridSpec, LEMMA_IDS,
};
use robinplate::Error;

fn small_grid() -> GridSpec {
    GridSpec { dims: vec![2, 5], tau_count: 4, alpha_fractions: vec![0.1, 0.5, 0.9], r_count: 60, sample_count: 60, ..GridSpec::default() }
}

fn at(d: u32, tau: f64, alpha: f64) -> GridPoint {
    GridPoint { d, tau: Some(tau), alpha: Some(alpha) }
}

fn margin(id: &str, p: GridPoint) -> Option<f64> {
    evaluate_point(id, &GridSpec::default(), &p).unwrap()
}

#[test]
fn witnesses_reproduce_their_margins() {
    let g = small_grid();
    let reports = run_all(&g).unwrap();
    assert_eq!(reports.len(), LEMMA_IDS.len());
    for r in &reports {
        assert!(r.pass, "{} failed: {:?}", r.lemma, r.min_margin);
        let (Some(m), Some(w)) = (r.min_margin, &r.witness) else { continue };
        let again = evaluate_point(&r.lemma, &g, &w.point).unwrap().unwrap();
        assert!((again - m).abs() <= 1e-14 * (1.0 + m.abs()), "{}: {again} vs {m}", r.lemma);
    }
}

#[test]
fn reports_are_byte_identical_across_runs() {
    let g = small_grid();
    let a: Vec<String> = run_all(&g).unwrap().iter().map(|r| r.to_json_line().unwrap()).collect();
    let b: Vec<String> = run_all(&g).unwrap().iter().map(|r| r.to_json_line().unwrap()).collect();
    assert_eq!(a, b);
    // timing stays out of the data stream
    assert!(!a[0].contains("elapsed"));
    let v: serde_json::Value = serde_json::from_str(&a[3]).unwrap();
    for key in ["lemma", "grid_points", "filtered", "min_margin", "witness", "pass"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["witness"].get("d").is_some() && v["witness"].get("tau").is_some() && v["witness"].get("alpha").is_some());
}

#[test]
fn grid_configuration() {
    assert!(matches!(run_all(&GridSpec { dims: vec![], ..GridSpec::default() }), Err(Error::Config(_))));
    let single = GridSpec::single(3, 2.0, 0.5);
    let r = run_suite("ball_lambda2_bounds", &single).unwrap();
    assert_eq!((r.grid_points, r.filtered), (1, 0));
    assert!(run_suite("not_a_check", &single).is_err());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("grid.toml");
    std::fs::write(&path, "dims = [3]\ntau_min = 0.5\ntau_max = 5.0\ntau_count = 3\nalpha_fractions = [0.2, 0.8]\n").unwrap();
    let g = GridSpec::load(&path).unwrap();
    assert_eq!(g.points().len(), 6);
    assert_eq!(run_suite("ball_lambda2_bounds", &g).unwrap().grid_points, 6);
    std::fs::write(&path, "dims = [3]\nunknown_key = 1\n").unwrap();
    assert!(GridSpec::load(&path).is_err());
    // the grid never touches α = 0
    assert!(GridSpec::default().points().iter().all(|p| p.alpha.unwrap() < 0.0));
}

#[test]
fn lambda2_bound_examples() {
    assert!(margin("ball_lambda2_bounds", at(2, 1.0, -0.5)).unwrap() >= 0.0);
    assert!(margin("ball_lambda2_bounds", at(2, 1.0, -(1.0 - 1e-6))).unwrap() >= -1e-6);
}

#[test]
fn spectral_parameter_examples() {
    assert!(margin("spectral_parameter_bounds", at(3, 2.0, -1.0)).unwrap() >= 0.0);
    assert!(margin("spectral_parameter_bounds", at(2, 0.5, -0.1)).unwrap() >= 0.0);
    // large τ pushes a² past d, so the upper bounds are skipped there
    assert!(spectral_parameter_upper_skips(&GridSpec::default()).unwrap() > 0);
}

#[test]
fn tension_regime_examples() {
    assert!(margin("large_tension_margin", at(2, 5.0, -0.5)).unwrap() > 0.0);
    // just across the small/large boundary
    let (d, alpha) = (2.0, -0.5);
    let tau = 3.0 * (3.0 + alpha) / (d + 5.0) + 1e-6 - alpha;
    assert!(margin("large_tension_margin", at(2, tau, alpha)).unwrap() > -1e-9);
    assert!(margin("large_tension_margin", at(5, 0.8, -0.4)).is_none());
    for id in [
        "small_tension_positivity",
        "small_tension_gamma_lower_bound",
        "small_tension_gamma_separation",
        "small_tension_parameter_range",
        "quartic_positivity",
    ] {
        assert!(margin(id, at(5, 0.8, -0.4)).unwrap() > 0.0, "{id}");
        assert!(margin(id, at(2, 5.0, -0.5)).is_none(), "{id}");
    }
}

#[test]
fn polynomial_examples() {
    assert_eq!(cubic(2, 2.0), 48.0);
    let (e, f) = (quartic(3, -0.7, 1.1), quartic_product_form(3, -0.7, 1.1));
    assert!((e - f).abs() <= 1e-9 * e.abs());
    assert!(margin("quartic_expansion_residual", at(3, 1.0, -0.7)).unwrap() >= 0.0);
    assert!(margin("quartic_alpha_derivative", at(3, 1.0, -0.7)).unwrap() > 0.0);
}

#[test]
fn membrane_examples() {
    let p = |alpha| GridPoint { d: 2, tau: None, alpha: Some(alpha) };
    assert!(margin("membrane_lower_bound", p(0.0)).unwrap() > 0.0);
    assert!(margin("membrane_lower_bound", p(-1.0)).unwrap().abs() < 1e-12);
    assert!(margin("membrane_lower_bound", p(-0.5)).unwrap() >= 0.0);
}

#[test]
fn profile_examples() {
    for p in [at(2, 1.0, -0.5), at(4, 20.0, -10.0)] {
        assert!(margin("partial_monotonicity", p).unwrap() >= -1e-10);
        assert!(margin("trial_profile_shape", p).unwrap() >= -1e-12);
    }
}
