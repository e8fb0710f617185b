use proptest::prelude::*;
use rds_core::qmc::{scale, sobol, unscale, MAX_DIM};

#[test]
fn dyadic_squares_hold_one_point_each() {
    for k in [2u32, 4, 6] {
        let n = 1usize << k;
        let side = 1usize << (k / 2);
        // sequence indices 0..n form a (0, k, 2)-net block
        let pts = sobol::<f64>(2, n, 0).unwrap();
        let mut counts = vec![0; n];
        for p in &pts.points {
            let i = (p[0] * side as f64) as usize;
            let j = (p[1] * side as f64) as usize;
            counts[j * side + i] += 1;
        }
        assert!(counts.iter().all(|&c| c == 1), "k = {k}: {counts:?}");
    }
}

#[test]
fn one_dimensional_prefix_is_a_permuted_grid() {
    // the first 2^k points of dimension 1 (index 0 included) are {i / 2^k}
    let pts = sobol::<f64>(1, 64, 0).unwrap();
    let mut v: Vec<f64> = pts.points.iter().map(|p| p[0] * 64.0).collect();
    v.sort_by(f64::total_cmp);
    assert_eq!(v, (0..64).map(|i| i as f64).collect::<Vec<_>>());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn deterministic_and_in_unit_cube(d in 1usize..=MAX_DIM, n in 1usize..200, skip in 0u64..5000) {
        let a = sobol::<f64>(d, n, skip).unwrap();
        let b = sobol::<f64>(d, n, skip).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.len(), n);
        for p in &a.points {
            prop_assert_eq!(p.len(), d);
            prop_assert!(p.iter().all(|&x| (0.0..1.0).contains(&x)));
        }
    }

    #[test]
    fn skip_is_a_window_into_one_sequence(d in 1usize..=MAX_DIM, n in 1usize..64, skip in 0u64..500) {
        let whole = sobol::<f64>(d, skip as usize + n, 0).unwrap();
        let tail = sobol::<f64>(d, n, skip).unwrap();
        prop_assert_eq!(&whole.points[skip as usize..], &tail.points[..]);
    }

    #[test]
    fn scaling_round_trips(lo in -100.0f64..100.0, width in 0.1f64..50.0, n in 1usize..64) {
        let unit = sobol::<f64>(2, n, 1).unwrap();
        let b = vec![(lo, lo + width), (-lo, -lo + 2.0 * width)];
        let scaled = scale(&unit, &b).unwrap();
        for p in &scaled.points {
            prop_assert!(p[0] >= lo && p[0] <= lo + width);
        }
        let back = unscale(&scaled).unwrap();
        for (u, v) in back.points.iter().flatten().zip(unit.points.iter().flatten()) {
            prop_assert!((u - v).abs() <= 1e-12);
        }
    }
}
