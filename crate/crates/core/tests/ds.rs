use std::sync::atomic::{AtomicUsize, Ordering};

use proptest::prelude::*;
use rds_core::ds::*;
use rds_core::expr::{parse, Format};
use rds_core::polyfit::BasisSpec;
use rds_core::reactor::ReactorBox;
use rds_core::{Error, SignClass};

fn synthetic_box() -> ParamBox<f64> {
    ParamBox::reactor(&ReactorBox::default())
}

fn sum_and_product() -> FnModel<impl Fn(&[f64]) -> Vec<f64> + Sync> {
    FnModel { dim: 2, outputs: 2, f: |u: &[f64]| vec![u[0] + u[1], u[0] * u[1]] }
}

fn synthetic_constraints() -> Vec<ConstraintSpec<f64>> {
    vec![ConstraintSpec::new("sum", 0, 550.0), ConstraintSpec::new("product", 1, 75625.0)]
}

fn synthetic_report() -> DsReport<f64> {
    identify(
        &sum_and_product(),
        &synthetic_constraints(),
        &synthetic_box(),
        &BasisSpec::reactor(),
        &IdentifyOptions::default(),
    )
    .unwrap()
}

fn grid(n: usize) -> Vec<[f64; 2]> {
    let step = 50.0 / (n - 1) as f64;
    (0..n).flat_map(|j| (0..n).map(move |i| [250.0 + i as f64 * step, 250.0 + j as f64 * step])).collect()
}

#[test]
fn polynomial_constraints_are_recovered() {
    let report = synthetic_report();
    // basis order: 1, T, T², t, T·t
    let want = [[0.0, 1.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 0.0, 1.0]];
    for (c, w) in report.constraints.iter().zip(want) {
        for (got, exp) in c.fit.coefficients.iter().zip(w) {
            assert!((got - exp).abs() <= 1e-8, "{}: {:?}", c.name, c.fit.coefficients);
        }
        assert!(c.fit.r_squared > 1.0 - 1e-12);
        assert!(c.validation_r_squared.unwrap() > 1.0 - 1e-12);
    }
    assert_eq!(report.validation.unwrap().agreement, 1.0);
    // brute-force thresholding on a 101 x 101 grid; nodes within the
    // membership band count as inside, matching the closed inequality
    for u in grid(101) {
        let direct = u[0] + u[1] >= 550.0 && u[0] * u[1] >= 75625.0;
        let class = membership(&report, &u).unwrap();
        assert_eq!(class != SignClass::Outside, direct, "{u:?}");
    }
}

#[test]
fn membership_examples() {
    let report = synthetic_report();
    assert_eq!(membership(&report, &[300.0, 300.0]).unwrap(), SignClass::Inside);
    assert_eq!(membership(&report, &[250.0, 250.0]).unwrap(), SignClass::Outside);
    assert!(matches!(membership(&report, &[310.0, 280.0]), Err(Error::OutOfBox)));
    assert!(matches!(membership(&report, &[280.0]), Err(Error::DimensionMismatch { .. })));

    let model = FnModel { dim: 2, outputs: 2, f: |u: &[f64]| vec![u[0] + u[1], u[0]] };
    let cons = vec![ConstraintSpec::new("sum", 0, 550.0), ConstraintSpec::new("hot", 1, 260.0)];
    let r = identify(&model, &cons, &synthetic_box(), &BasisSpec::reactor(), &IdentifyOptions::default()).unwrap();
    // on the first boundary, 10 units inside the second
    assert_eq!(membership(&r, &[270.0, 280.0]).unwrap(), SignClass::Boundary);
}

#[test]
fn membership_never_runs_the_model() {
    let calls = AtomicUsize::new(0);
    let model = FnModel {
        dim: 2,
        outputs: 2,
        f: |u: &[f64]| {
            calls.fetch_add(1, Ordering::SeqCst);
            vec![u[0] + u[1], u[0] * u[1]]
        },
    };
    let opts = IdentifyOptions { validation_points: Some(64), ..IdentifyOptions::default() };
    let report = identify(&model, &synthetic_constraints(), &synthetic_box(), &BasisSpec::reactor(), &opts).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 64 + 64);
    for u in grid(21) {
        membership(&report, &u).unwrap();
    }
    assert_eq!(calls.load(Ordering::SeqCst), 128);
}

#[test]
fn single_constraint_is_identity() {
    let model = FnModel { dim: 2, outputs: 1, f: |u: &[f64]| vec![u[0] + u[1]] };
    let r = identify(
        &model,
        &[ConstraintSpec::new("sum", 0, 550.0)],
        &synthetic_box(),
        &BasisSpec::reactor(),
        &IdentifyOptions::default(),
    )
    .unwrap();
    for u in grid(11) {
        assert_eq!(r.joint.eval_at(&u).unwrap(), r.constraints[0].region.eval_at(&u).unwrap());
    }
    assert_eq!(
        joint_expression(&r, JointFormat::Infix),
        rds_core::expr::serialize(r.constraints[0].region.expr(), Format::Infix)
    );
}

#[test]
fn joint_text_round_trip() {
    let report = synthetic_report();
    for (format, grammar) in [
        (JointFormat::Tree, Format::Tree),
        (JointFormat::Infix, Format::Infix),
        (JointFormat::InfixAbs, Format::Infix),
        (JointFormat::InfixSqrt, Format::Infix),
    ] {
        let back = parse::<f64>(&joint_expression(&report, format), grammar).unwrap();
        for u in grid(11) {
            let want = report.joint.eval_at(&u).unwrap();
            let got = back.eval_pairs(&[("T", u[0]), ("t", u[1])]).unwrap();
            assert!((got - want).abs() <= 1e-12 * want.abs().max(1.0), "{format:?} {u:?}: {got} vs {want}");
        }
    }
}

#[test]
fn report_text_round_trip() {
    let mut report = synthetic_report();
    report.contour_files = vec!["a.csv".into(), "b.csv".into()];
    let text = report.to_text(&["made in a test".into()]);
    assert!(text.starts_with("# made in a test\n[metadata]\n"));
    let back = DsReport::<f64>::from_text(&text).unwrap();
    assert_eq!(back.constraints, report.constraints);
    assert_eq!(back.joint, report.joint);
    assert_eq!(back.validation, report.validation);
    assert_eq!(back.contour_files, report.contour_files);
    assert_eq!(back.to_text(&["made in a test".into()]), text);
    for u in grid(11) {
        assert_eq!(membership(&back, &u).unwrap(), membership(&report, &u).unwrap());
    }
}

#[test]
fn malformed_reports_are_rejected() {
    let text = synthetic_report().to_text(&[]);
    assert!(DsReport::<f64>::from_text("").is_err());
    assert!(DsReport::<f64>::from_text(&text.replace("alpha = 1.0", "alpha = 2.0")).is_err());
    assert!(DsReport::<f64>::from_text(&text.replace("threshold = 550.0", "threshold = 551.0")).is_err());
    assert!(DsReport::<f64>::from_text(&text.replace("[joint]", "[nothing]")).is_err());
    assert!(DsReport::<f64>::from_text(&format!("{text}\nno equals sign\n")).is_err());
}

#[test]
fn identify_preconditions() {
    let model = sum_and_product();
    let bx = synthetic_box();
    let basis = BasisSpec::reactor();
    let opts = IdentifyOptions::default();
    assert!(matches!(identify(&model, &[], &bx, &basis, &opts), Err(Error::EmptyConstraintList)));
    let few = IdentifyOptions { n_samples: 4, ..opts };
    assert!(matches!(
        identify(&model, &synthetic_constraints(), &bx, &basis, &few),
        Err(Error::InsufficientPoints { points: 4, terms: 5 })
    ));
    let bad_alpha = IdentifyOptions { alpha: -1.0, ..opts };
    assert!(identify(&model, &synthetic_constraints(), &bx, &basis, &bad_alpha).is_err());
    let bad_out = [ConstraintSpec::new("x", 5, 1.0)];
    assert!(identify(&model, &bad_out, &bx, &basis, &opts).is_err());
}

#[test]
fn reactor_fit_quality() {
    let model = ReactorModel::<f64>::default();
    let report = identify(
        &model,
        &reactor_constraints(),
        &ParamBox::reactor(&ReactorBox::default()),
        &BasisSpec::reactor(),
        &IdentifyOptions::default(),
    )
    .unwrap();
    for c in &report.constraints {
        assert!(c.fit.r_squared >= 0.99, "{} {:?}", c.name, c.fit.r_squared);
        assert!(c.validation_r_squared.unwrap() >= 0.99, "{} {:?}", c.name, c.validation_r_squared);
    }
    let abs = joint_expression(&report, JointFormat::InfixAbs);
    let sqrt = joint_expression(&report, JointFormat::InfixSqrt);
    assert_eq!(abs.matches("abs(").count(), 1);
    assert_eq!(sqrt.matches("sqrt(").count(), 1);
    assert_eq!(report.contours.len(), 3);
}

#[test]
fn plot_count_examples() {
    assert_eq!(plot_count(2).unwrap(), 1);
    assert_eq!(plot_count(3).unwrap(), 9);
    assert_eq!(plot_count(4).unwrap(), 54);
    assert!(matches!(plot_count(0), Err(Error::DTooSmall(0))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn joint_sign_is_min_of_constraint_signs(a in -2.0f64..2.0, b in -2.0f64..2.0, c in 200.0f64..700.0) {
        let model = FnModel { dim: 2, outputs: 2, f: move |u: &[f64]| vec![a * u[0] + u[1], u[0] * u[1] / 100.0 + b * u[1]] };
        let cons = vec![ConstraintSpec::new("g1", 0, c), ConstraintSpec::new("g2", 1, c + 500.0)];
        let r = identify(&model, &cons, &synthetic_box(), &BasisSpec::reactor(), &IdentifyOptions::default()).unwrap();
        for u in grid(15) {
            let joint = membership(&r, &u).unwrap();
            let worst = r
                .constraints
                .iter()
                .map(|k| k.region.sign_class(&u, MEMBERSHIP_TOL).unwrap())
                .min_by_key(|s| match s { SignClass::Outside => 0, SignClass::Boundary => 1, SignClass::Inside => 2 })
                .unwrap();
            prop_assert_eq!(joint, worst);
        }
    }

    #[test]
    fn constraint_order_does_not_change_signs(c1 in 500.0f64..600.0, c2 in 62500.0f64..90000.0) {
        let model = sum_and_product();
        let fwd = vec![ConstraintSpec::new("sum", 0, c1), ConstraintSpec::new("product", 1, c2)];
        let rev: Vec<_> = fwd.iter().rev().cloned().collect();
        let opts = IdentifyOptions { validation_points: None, contour_grid: None, ..IdentifyOptions::default() };
        let a = identify(&model, &fwd, &synthetic_box(), &BasisSpec::reactor(), &opts).unwrap();
        let b = identify(&model, &rev, &synthetic_box(), &BasisSpec::reactor(), &opts).unwrap();
        prop_assert_ne!(a.joint.expr(), b.joint.expr());
        for u in grid(21) {
            prop_assert_eq!(membership(&a, &u).unwrap(), membership(&b, &u).unwrap());
        }
    }
}
