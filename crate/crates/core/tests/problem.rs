use qflow_core::problem::*;
use qflow_core::s3harmonics::make_grid;
use qflow_core::Error;
use std::f64::consts::PI;

#[test]
fn parse_inline_and_file_forms() {
    let inline = PolynomialR3::parse("2 0 0 1; 0 2 0 1; 0 0 2 1").unwrap();
    let file = PolynomialR3::parse("# |x|^2\n2 0 0 1\n0 2 0 1\n\n0 0 2 1  # z^2\n").unwrap();
    assert_eq!(inline, file);
    assert_eq!(inline, PolynomialR3::squared_norm());
    assert_eq!(PolynomialR3::parse(&inline.to_text()).unwrap(), inline);
    assert_eq!(inline.eval([1.0, 2.0, 3.0]), 14.0);
    assert!(inline.is_radial());
    assert!(PolynomialR3::parse("2 0 0").is_err());
    assert!(PolynomialR3::parse("2 0 x 1").is_err());
    assert!(PolynomialR3::parse("2 0 0 inf").is_err());
}

#[test]
fn radial_detection() {
    let p = PolynomialR3::parse("0 0 0 3; 2 0 0 0.5; 0 2 0 0.5; 0 0 2 0.5").unwrap();
    assert_eq!(p.radial_coefficient(), Some(0.5));
    let q = PolynomialR3::parse("2 0 0 1; 0 2 0 1; 0 0 2 2").unwrap();
    assert!(!q.is_radial());
    let r = PolynomialR3::parse("2 0 0 1; 0 2 0 1; 0 0 2 1; 1 0 0 1").unwrap();
    assert!(!r.is_radial());
}

#[test]
fn coercivity_certificate() {
    let ok = validate_p(&PolynomialR3::parse("2 0 0 1; 0 2 0 2; 0 0 2 3; 1 1 0 0.5; 1 0 0 -4").unwrap(), 3).unwrap();
    assert!(ok.leading_eigenvalues[0] > 0.0);
    assert!(ok.min_sampled_value > 0.0);
    assert_eq!(ok.degree, 2);
    // saddle x² − y² + z²
    let saddle = PolynomialR3::parse("2 0 0 1; 0 2 0 -1; 0 0 2 1").unwrap();
    match validate_p(&saddle, 3) {
        Err(Error::Hypothesis(msg)) => assert!(msg.contains("direction")),
        other => panic!("expected a hypothesis error, got {other:?}"),
    }
    // x² + y² misses the z axis
    assert!(validate_p(&PolynomialR3::parse("2 0 0 1; 0 2 0 1").unwrap(), 3).is_err());
    assert!(validate_p(&PolynomialR3::parse("1 0 0 1").unwrap(), 3).is_err());
    assert!(validate_p(&PolynomialR3::parse("4 0 0 1").unwrap(), 3).is_err());
}

#[test]
fn volume_ranges() {
    let s3 = 2.0 * PI * PI;
    assert!((alpha_of(PI * PI, CurvatureSign::Positive, 3).unwrap() - 1.0).abs() < 1e-15);
    assert!(alpha_of(s3, CurvatureSign::Positive, 3).is_err());
    assert!(alpha_of(0.0, CurvatureSign::Positive, 3).is_err());
    assert!((alpha_of(5.0 * s3, CurvatureSign::Negative, 3).unwrap() + 10.0).abs() < 1e-13);
    assert!(alpha_of(f64::INFINITY, CurvatureSign::Negative, 3).is_err());
}

#[test]
fn zonal_mode_selection() {
    let p = PolynomialR3::squared_norm();
    let auto = ProblemSpec::new(3, CurvatureSign::Positive, PI * PI, p.clone(), U0Provider::HalfW0, 8, None).unwrap();
    assert!(auto.zonal);
    let forced = ProblemSpec::new(3, CurvatureSign::Positive, PI * PI, p, U0Provider::HalfW0, 8, Some(false)).unwrap();
    assert!(!forced.zonal);
    let q = PolynomialR3::parse("2 0 0 1; 0 2 0 1; 0 0 2 2").unwrap();
    assert!(ProblemSpec::new(3, CurvatureSign::Positive, PI * PI, q, U0Provider::HalfW0, 8, Some(true)).is_err());
}

#[test]
fn sphere_fields_for_the_model_problem() {
    let spec = ProblemSpec::new(3, CurvatureSign::Positive, PI * PI, PolynomialR3::squared_norm(), U0Provider::HalfW0, 32, None).unwrap();
    let grid = make_grid(32, true).unwrap();
    let f = assemble_sphere_fields(&spec, &grid).unwrap();
    // ∫φ̃₁ = γ₃ = 2π²
    assert!((f.phi1_integral / (2.0 * PI * PI) - 1.0).abs() < 1e-12);
    assert!(f.diagnostics.alpha_k_positive);
    assert!(f.diagnostics.lower_bound_delta.is_none());
    assert!(f.weight.iter().all(|w| w.is_finite() && *w >= 0.0));
    // e^{−3|x|²} kills the weight near N
    assert!(f.diagnostics.max_weight_near_north < 1e-100);
}

#[test]
fn negative_curvature_diagnostics() {
    let spec = ProblemSpec::new(3, CurvatureSign::Negative, 4.0 * PI * PI, PolynomialR3::squared_norm(), U0Provider::HalfW0, 16, None).unwrap();
    let f = assemble_sphere_fields(&spec, &make_grid(16, true).unwrap()).unwrap();
    assert!(f.diagnostics.lower_bound_delta.is_some());
    assert!(f.diagnostics.jensen_log_mass_bound.is_finite());
}

#[test]
fn lemma_profile_cannot_be_assembled() {
    let spec = ProblemSpec::new(3, CurvatureSign::Positive, PI * PI, PolynomialR3::squared_norm(), U0Provider::lemma22_default(), 8, None).unwrap();
    assert!(assemble_sphere_fields(&spec, &make_grid(8, true).unwrap()).is_err());
    assert!((u0_eval(&spec.u0, [2.0, 0.0, 0.0]).unwrap() + 2f64.ln()).abs() < 1e-12);
}

#[test]
fn serde_forms() {
    let p: PolynomialR3 = serde_json::from_str("\"2 0 0 1; 0 2 0 1; 0 0 2 1\"").unwrap();
    assert_eq!(p, PolynomialR3::squared_norm());
    let u: U0Provider = serde_json::from_str(r#"{"kind":"lemma22","k":9,"quad_tol":1e-8}"#).unwrap();
    assert_eq!(u, U0Provider::lemma22_default());
    let s: CurvatureSign = serde_json::from_str("-1").unwrap();
    assert_eq!(s, CurvatureSign::Negative);
    assert!(serde_json::from_str::<CurvatureSign>("0").is_err());
}
