use moscolab::classlab::Modulus;
use moscolab::crackmesh::build_cracked_mesh;
use moscolab::experiments::{fit_rate, ExperimentReport, Step};
use moscolab::geomkit::{hausdorff_distance, length_measure, CompactScene, SceneSpec};
use moscolab::pdecore::{solve_neumann, NeumannOptions, SourceData};
use moscolab::Point;
use proptest::prelude::*;
use std::sync::Arc;

const TOL: f64 = 1e-4;

fn pt() -> impl Strategy<Value = Point> {
    (-0.9f64..0.9, -0.9f64..0.9).prop_map(|(x, y)| Point::new(x, y))
}

/// One to three non-degenerate segments in the box of radius 1.
fn scene() -> impl Strategy<Value = CompactScene> {
    prop::collection::vec((pt(), pt()), 1..=3).prop_filter_map("degenerate", |segs| {
        let cracks = segs.into_iter().filter(|(a, b)| a.dist(*b) > 0.05).map(|(a, b)| vec![a, b]).collect::<Vec<_>>();
        if cracks.is_empty() {
            return None;
        }
        let spec = SceneSpec { box_radius: 1.0, box_center: Point::default(), cracks, solids: vec![], label: String::new() };
        CompactScene::try_from(spec).ok()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hausdorff_is_a_metric(a in scene(), b in scene(), c in scene()) {
        let ab = hausdorff_distance(&a, &b, TOL).unwrap();
        let ba = hausdorff_distance(&b, &a, TOL).unwrap();
        let aa = hausdorff_distance(&a, &a, TOL).unwrap();
        let bc = hausdorff_distance(&b, &c, TOL).unwrap();
        let ac = hausdorff_distance(&a, &c, TOL).unwrap();
        prop_assert!(ab.lo() <= ba.hi() + 3.0 * TOL && ba.lo() <= ab.hi() + 3.0 * TOL);
        prop_assert!(aa.value <= 3.0 * TOL);
        prop_assert!(ac.value <= ab.value + bc.value + 3.0 * TOL);
        prop_assert!(ab.error_bound <= TOL);
    }

    #[test]
    fn scene_round_trips(a in scene()) {
        let text = serde_json::to_string(&a).unwrap();
        let back: CompactScene = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn length_measure_bounded_by_total_length(a in scene()) {
        let total: f64 = a.cracks().iter().map(|c| c[0].dist(c[1])).sum();
        let l = length_measure(&a);
        prop_assert!(l <= total + 1e-9 && l > 0.0);
    }

    #[test]
    fn modulus_is_nondecreasing(a in 0.01f64..5.0, d0 in 0.01f64..2.0, s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        for m in [Modulus::linear(a, d0), Modulus::Quadratic { a }] {
            prop_assert!(m.eval(lo) <= m.eval(hi));
        }
    }

    #[test]
    fn rate_fit_recovers_power_laws(alpha in 0.2f64..4.0, c in 0.01f64..100.0) {
        let pairs: Vec<(f64, f64)> = [0.5, 0.25, 0.125, 0.0625].iter().map(|&h| (h, c * f64::powf(h, alpha))).collect();
        let fit = fit_rate(&pairs).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-9);
        prop_assert!(fit.residual < 1e-9);
    }

    #[test]
    fn csv_has_one_row_per_step(n in 0usize..12) {
        let mut r = ExperimentReport::new("prop");
        for i in 0..n {
            r.steps.push(Step::new("s", i + 1, 0.1));
        }
        let rows = r.to_csv().lines().filter(|l| !l.starts_with('#')).count();
        prop_assert_eq!(rows, n + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn unit_source_gives_unit_solution(a in scene(), p in prop::sample::select(vec![1.5, 2.0])) {
        let mesh = build_cracked_mesh(&a, 0.125);
        prop_assume!(mesh.is_ok());
        let mesh = Arc::new(mesh.unwrap());
        let sol = solve_neumann(&mesh, p, &SourceData::constant(1.0), &NeumannOptions::default()).unwrap();
        let dev = sol.field.as_real().unwrap().iter().fold(0.0f64, |m, v| m.max((v - 1.0).abs()));
        prop_assert!(dev <= 1e-10, "deviation {}", dev);
    }
}
