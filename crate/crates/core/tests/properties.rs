use proptest::prelude::*;

use objnav_core::fusion::{dar_score, weights_from_sci, SciReading};
use objnav_core::layered_map::{extract_frontiers, update_multi_maps, update_target_confidence};
use objnav_core::metrics::{spl, success_rate, Outcome};
use objnav_core::planner::{astar, octile, PlanOutcome};
use objnav_core::value_map::{smooth_and_normalize, update_value_cell};
use objnav_core::{BitLayer, CellCoord, ClassId, GridLayer};

fn bits(w: usize, h: usize) -> impl Strategy<Value = BitLayer> {
    prop::collection::vec(any::<bool>(), w * h).prop_map(move |v| GridLayer::from_vec(w, h, 0.25, v).unwrap())
}

proptest! {
    #[test]
    fn value_update_stays_between_mean_and_max(v in 0.0..=1.0f64, s in 0.0..=1.0f64) {
        let out = update_value_cell(v, s).unwrap();
        prop_assert!(out <= v.max(s) + 1e-12);
        prop_assert!(out >= 0.5 * (v + s) - 1e-12);
        prop_assert_eq!(out, update_value_cell(s, v).unwrap());
    }

    #[test]
    fn confidence_never_drops_below_the_average(stored in 0.0..=1.0f64, c in 0.0..=1.0f64) {
        let out = update_target_confidence(stored, c).unwrap();
        prop_assert!(out >= 0.5 * (stored + c) && out <= stored.max(c));
        let (label, conf) = update_multi_maps(ClassId(1), stored, ClassId(2), c, 2).unwrap();
        prop_assert!(conf >= stored);
        prop_assert_eq!(label == ClassId(2), c > stored);
    }

    #[test]
    fn weights_lie_on_the_simplex(sci in 0.0..=1.0f64) {
        let w = weights_from_sci(SciReading::new(sci).unwrap());
        prop_assert_eq!(w.w_pred + w.w_vlm, 1.0);
        prop_assert!(w.w_pred >= 0.0 && w.w_vlm >= 0.0);
    }

    #[test]
    fn dar_prefers_closer_and_higher(sci in 0.0..1.0f64, d in 0.0..1.0f64, dd in 1e-3..1.0f64, v in 0.0..1.0f64) {
        let w = weights_from_sci(SciReading::new(sci).unwrap());
        prop_assert!(dar_score(d, v, w, 1e-6) > dar_score(d + dd, v, w, 1e-6));
        prop_assert!(dar_score(d, v, w, 1e-6) <= dar_score(d, v + 1e-3, w, 1e-6));
    }

    #[test]
    fn spl_is_a_percentage_below_success_rate(
        runs in prop::collection::vec((any::<bool>(), 0.0..50.0f64, 0.1..50.0f64), 0..40)
    ) {
        let outcomes: Vec<Outcome> = runs
            .iter()
            .map(|&(success, p, l)| Outcome { success, path_length_m: p, optimal_length_m: l })
            .collect();
        let s = spl(&outcomes).unwrap();
        prop_assert!((0.0..=100.0).contains(&s));
        prop_assert!(s <= success_rate(&outcomes) + 1e-9);
    }

    #[test]
    fn frontiers_are_explored_free_cells(explored in bits(12, 9), obstacle in bits(12, 9)) {
        let f = extract_frontiers(&obstacle, &explored);
        for c in f.ones() {
            prop_assert!(explored.is_set(c) && !obstacle.is_set(c));
        }
    }

    #[test]
    fn astar_paths_are_valid(obstacle in bits(14, 14), sx in 0..14i32, sy in 0..14i32, gx in 0..14i32, gy in 0..14i32) {
        let mut obstacle = obstacle;
        let (start, goal) = (CellCoord::new(sx, sy), CellCoord::new(gx, gy));
        obstacle.set(start, false);
        obstacle.set(goal, false);
        if let PlanOutcome::Found(p) = astar(&obstacle, start, goal).unwrap() {
            prop_assert_eq!(p.cells[0], start);
            prop_assert_eq!(p.goal(), goal);
            prop_assert!(p.cells.iter().all(|&c| !obstacle.is_set(c)));
            prop_assert!(p.cells.windows(2).all(|s| (s[0].x - s[1].x).abs() <= 1 && (s[0].y - s[1].y).abs() <= 1));
            prop_assert!(p.length_m / 0.25 >= octile(start, goal) - 1e-9);
        }
    }

    #[test]
    fn smoothed_values_are_normalized(cells in prop::collection::vec(0.0..=1.0f64, 20)) {
        let grid = GridLayer::from_vec(5, 4, 0.25, cells).unwrap();
        let out = smooth_and_normalize(&grid, 0.85);
        prop_assert!(out.cells().iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
