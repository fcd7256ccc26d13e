use super::*;
use crate::hamiltonian::catalog::build;

fn ts() -> Vec<f64> {
    log_grid(1e-4, 1.0, 8)
}

#[test]
fn offdiag_on_constants() {
    let singular = HamiltonianModel::constant(0.5, 0.5, 0.5).unwrap();
    let rep = suite_offdiag_bound(&singular, &[0.5], &[1.0]).unwrap();
    assert!(rep.pass);
    assert!(rep.cases[0].lhs == 0.0 && rep.cases[0].rhs.abs() < 1e-15);

    let half = build("identity-half", "").unwrap();
    let rep = suite_offdiag_bound(&half, &[0.5], &[1.0]).unwrap();
    assert!((rep.cases[0].lhs - 1.0).abs() < 1e-12);
    assert!((rep.cases[0].rhs - 20.0).abs() < 1e-12);
    assert!((rep.min_slack - 19.0).abs() < 1e-12);
}

#[test]
fn offdiag_rejects_unnormalized() {
    let h = HamiltonianModel::constant(1.0, 0.0, 1.0).unwrap();
    assert!(matches!(
        suite_offdiag_bound(&h, &[0.5], &[1.0]),
        Err(Error::NotTraceNormalized { .. })
    ));
}

#[test]
fn arc_geometry_validation() {
    assert!(ArcCase::Opposite { phi0: 1.0, psi0: 0.5 }.arcs().is_err());
    assert!(ArcCase::Wedge { alpha: 2.0, beta: 2.0, mirrored: false }.arcs().is_err());
    assert!(ArcCase::Halves { alpha: 0.0, beta: 1.0, mirrored: true }.arcs().is_err());
    let (_, _, k) = ArcCase::Halves { alpha: PI, beta: PI, mirrored: false }.arcs().unwrap();
    assert!((k - 1.0).abs() < 1e-15);
    for c in default_arc_cases() {
        c.arcs().unwrap();
    }
}

#[test]
fn arc_bounds_two_phase_and_constant() {
    let tp = build("two-phase", "").unwrap();
    let tp = trace_reparameterize(&tp).unwrap();
    let rep = suite_arc_bounds(&tp, &default_arc_cases(), &ts()).unwrap();
    assert!(rep.pass, "{:?}", rep.failures().next());
    assert!(rep.cases.iter().any(|c| c.lhs > 0.0));

    let c = HamiltonianModel::constant(0.5, 0.3, 0.5).unwrap();
    let rep = suite_arc_bounds(&c, &default_arc_cases(), &[0.5]).unwrap();
    assert!(rep.pass);
    assert!(rep.cases.iter().all(|c| c.lhs == 0.0));
}

#[test]
fn subinterval_cases() {
    let tp = trace_reparameterize(&build("two-phase", "").unwrap()).unwrap();
    let rep = suite_subinterval_bound(&tp, &[(0.0, 1.0), (0.25, 0.75), (1.0, 1.0)], &ts()).unwrap();
    assert!(rep.pass);
    for c in rep.cases.chunks(3) {
        assert_eq!(c[2].lhs, 0.0);
    }
}

#[test]
fn weyl_estimates_constants() {
    let singular = HamiltonianModel::constant(0.5, 0.5, 0.5).unwrap();
    let rep = suite_weyl_estimates(&singular, &[1.0], 1e-8, &WeylConstants::default()).unwrap();
    assert!(rep.pass);
    assert_eq!(rep.cases.len(), 5);
    assert!((rep.cases[1].lhs - 1.0).abs() < 1e-6);

    let half = build("identity-half", "").unwrap();
    let rep = suite_weyl_estimates(&half, &[1.0, 100.0], 1e-8, &WeylConstants::default()).unwrap();
    assert!(rep.pass);
    let im = &rep.cases[3];
    assert!((im.lhs - 1.0).abs() < 1e-6 && (im.rhs - 39.5).abs() < 1e-9);
}

#[test]
fn weakened_constant_fails() {
    let h = build("constant-singular", "").unwrap();
    let k = WeylConstants {
        abs_band: 0.5,
        ..WeylConstants::default()
    };
    let rep = suite_weyl_estimates(&h, &[1.0], 1e-8, &k).unwrap();
    assert!(!rep.pass);
}

#[test]
fn regular_variation_cases() {
    assert!((regular_variation_bound(1.0, 3.0) - 0.25).abs() < 1e-15);
    assert_eq!(regular_variation_bound(2.0, 2.0), 0.0);
    let rep = suite_regular_variation(&[(1.0, 3.0), (2.0, 2.0)]).unwrap();
    assert!(rep.pass, "{:?}", rep.failures().collect::<Vec<_>>());
    assert!(rep.min_slack > -1e-8);
}

#[test]
fn suite_names_round_trip() {
    for n in SuiteName::ALL {
        assert_eq!(n.as_str().parse::<SuiteName>().unwrap(), n);
        assert_eq!(serde_json::to_string(&n).unwrap(), format!("\"{}\"", n.as_str()));
    }
    assert!("nope".parse::<SuiteName>().is_err());
}

#[test]
fn small_check_run_is_reproducible() {
    let cfg = CheckConfig {
        n_random: 3,
        catalog_r: vec![1.0, 100.0],
        random_r: vec![1.0, 100.0],
        ..CheckConfig::default()
    };
    let a = run_check(&cfg).unwrap();
    assert_eq!(a.len(), 5);
    for r in &a {
        assert!(r.pass, "{} {:?}", r.suite, r.failures().next());
    }
    let b = run_check(&cfg).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}
