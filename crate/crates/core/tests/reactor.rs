use proptest::prelude::*;
use rds_core::ode::StepControl;
use rds_core::qmc::{scale, sobol};
use rds_core::reactor::*;

fn box_points(n: usize) -> Vec<OperatingPoint<f64>> {
    let unit = sobol::<f64>(2, n, 1).unwrap();
    let pts = scale(&unit, &ReactorBox::default().bounds()).unwrap();
    pts.points.iter().map(|p| OperatingPoint::new(p[0], p[1])).collect()
}

fn riccati(u: &OperatingPoint<f64>, p: &KineticParams<f64>, tau: f64) -> f64 {
    let (k1, _) = rate_constants(u.temperature, p).unwrap();
    p.ca0 / (1.0 + 2.0 * u.time * k1 * p.ca0 * tau)
}

#[test]
fn consumption_matches_closed_form() {
    let p = KineticParams::default();
    let taus: Vec<f64> = (1..=10).map(|i| i as f64 / 10.0).collect();
    for u in box_points(16) {
        let (states, _) = trajectory(&u, &p, &default_control(), &taus, |_, _| {}).unwrap();
        for (tau, y) in taus.iter().zip(&states) {
            let exact = riccati(&u, &p, *tau);
            assert!(((y[0] - exact) / exact).abs() <= 1e-6, "{u:?} τ={tau}: {} vs {exact}", y[0]);
        }
    }
}

#[test]
fn conservation_at_every_step() {
    let p = KineticParams::default();
    for u in box_points(16) {
        let mut worst: f64 = 0.0;
        let mut steps = 0;
        trajectory(&u, &p, &default_control(), &[1.0], |_, y| {
            worst = worst.max(((y[0] + 2.0 * (y[1] + y[2]) - p.ca0) / p.ca0).abs());
            steps += 1;
        })
        .unwrap();
        assert!(steps > 0);
        assert!(worst <= 1e-6, "{u:?}: drift {worst}");
    }
}

#[test]
fn pinned_centre_point() {
    // rtol 1e-11 / atol 1e-16 run of the same integrator
    let (ca, cb, purity, profit) =
        (0.08148185207048009, 1.2770556150495466e-7, 1.277003588739847e-10, -0.0053430303962408235);
    let o = simulate(&OperatingPoint::new(275.0, 275.0), &KineticParams::default()).unwrap();
    let rel = |a: f64, b: f64| ((a - b) / b).abs();
    assert!(rel(o.ca, ca) < 1e-6);
    assert!(rel(o.cb, cb) < 1e-6);
    assert!(rel(o.purity, purity) < 1e-6);
    assert!(rel(o.profit, profit) < 1e-6);
    let tight = StepControl { rtol: 1e-11, atol: 1e-16, ..default_control() };
    let t = simulate_with(&OperatingPoint::new(275.0, 275.0), &KineticParams::default(), &tight).unwrap();
    assert!(rel(t.purity, purity) < 1e-9 && rel(t.profit, profit) < 1e-9);
}

#[test]
fn halving_tolerances_barely_moves_outputs() {
    let p = KineticParams::default();
    let base = default_control();
    let half = StepControl { rtol: base.rtol / 2.0, atol: base.atol / 2.0, ..base };
    for u in box_points(16) {
        let a = simulate_with(&u, &p, &base).unwrap();
        let b = simulate_with(&u, &p, &half).unwrap();
        assert!(((a.purity - b.purity) / b.purity).abs() < 1e-7, "{u:?}");
        assert!(((a.profit - b.profit) / b.profit).abs() < 1e-7, "{u:?}");
    }
}

#[test]
fn zero_reaction_cqas() {
    let p = KineticParams { k1_ref: 0.0, ..KineticParams::default() };
    for u in box_points(4) {
        let (purity, profit) = cqa_vector(&u, &p).unwrap();
        assert_eq!(purity, 0.0);
        assert_eq!(profit, -20.0 * p.ca0 * p.volume / (u.time + 30.0));
    }
}

#[test]
fn f32_path_runs() {
    let p = KineticParams::<f32>::default();
    let c = StepControl { rtol: 1e-5f32, atol: 1e-6, ..StepControl::default() };
    let o = simulate_with(&OperatingPoint::new(275.0f32, 275.0), &p, &c).unwrap();
    assert!((o.ca - 0.081481852).abs() / 0.081481852 < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trajectories_are_physical(temp in 250.0f64..=300.0, time in 250.0f64..=300.0) {
        let p = KineticParams::default();
        let u = OperatingPoint::new(temp, time);
        let mut prev_ca = p.ca0;
        let mut ok = true;
        trajectory(&u, &p, &default_control(), &[1.0], |_, y| {
            ok &= y.iter().all(|&c| c >= -1e-9);
            ok &= y[0] < prev_ca;
            prev_ca = y[0];
        }).unwrap();
        prop_assert!(ok);
        let o = simulate(&u, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&o.purity));
    }
}
