mod support;

use approx::assert_relative_eq;
use proptest::prelude::*;
use skipstop_core::bound::{dropped_backtracking_cost, lb_solve, BoundSettings};
use skipstop_core::cost::{
    cost_with_backtracking, generalized_cost, integrated_pointwise, pointwise_integrand, scalar_cost, transfer_penalty,
    wait_cost, DesignProfiles, DesignScalars,
};
use skipstop_core::demand::{backtrack_densities, OriginPdf};
use skipstop_core::exact::{aggregate_od_demand, exact_costs, BacktrackRoute, RouteIndex, TripType};
use skipstop_core::heuristic::{headway_candidate, spacing_candidate};
use skipstop_core::params::{Mode, ParamSet};
use skipstop_core::plan::{fit_profiles, generate_plan, place_stops};
use skipstop_core::Direction;
use support::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn mode() -> impl Strategy<Value = ParamSet> {
    (prop_oneof![Just(Mode::Bus), Just(Mode::Rail)], prop_oneof![Just(5.0), Just(10.0), Just(20.0)])
        .prop_map(|(m, mu)| ParamSet::preset(m, mu))
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn wait_cost_equals_trip_type_double_sum(seed in any::<u8>(), m_cw in 1u32..=4, m_ccw in 1u32..=4,
                                             h_cw in 0.03f64..0.2, h_ccw in 0.03f64..0.2) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let p = ParamSet::rail(20.0);
        let prof = random_profiles(&mut rng, f.corridor(), 10);
        let sc = DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: h_cw, headway_ccw: h_ccw };
        let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, m_cw, m_ccw).unwrap();
        let closed = wait_cost(&f, &sc, &prof.bay, &b_cw, &b_ccw, &p).unwrap();
        let summed = wait_by_trip_types(&f, &sc, &prof.bay, &b_cw, &b_ccw, &p);
        prop_assert!((closed - summed).abs() <= 0.01 * summed.abs(), "{closed} vs {summed}");
    }

    #[test]
    fn transfer_penalty_is_conservative(seed in any::<u8>(), m_cw in 1u32..=4, m_ccw in 1u32..=4) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let p = ParamSet::bus(10.0);
        let prof = random_profiles(&mut rng, f.corridor(), 10);
        let sc = DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: 0.1, headway_ccw: 0.1 };
        let approx = transfer_penalty(&f, &sc, &prof.bay, &p).unwrap();
        let pairs = p.transfer_penalty * transfers_by_pairs(&f, &sc, &prof.bay);
        prop_assert!(approx >= pairs * (1.0 - 1e-9), "{approx} < {pairs}");
    }

    #[test]
    fn spacing_rule_is_lattice_argmin(seed in any::<u8>(), j in 0usize..40, bay in 1u32..=12,
                                      m_cw in 1u32..=4, m_ccw in 1u32..=4, p in mode()) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let pd = f.point(j);
        let sc = DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: 0.08, headway_ccw: 0.06 };
        let (b_cw, b_ccw) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let t = bay as f64;
        let g = |s: f64| pointwise_integrand(&sc, s, t, &pd, b_cw, b_ccw, &p);
        let step = 1e-4;
        let grid = lattice_argmin(g, step, 3.0, step);
        match spacing_candidate(&sc, t, &pd, b_cw, b_ccw, &p) {
            Some(s) if s <= 3.0 - step => prop_assert!((s - grid).abs() <= step, "{s} vs {grid}"),
            Some(_) => prop_assert!(grid >= 3.0 - 2.0 * step),
            None => prop_assert!(grid >= 3.0 - 2.0 * step),
        }
    }

    #[test]
    fn headway_rule_is_lattice_argmin(seed in any::<u8>(), m in 1u32..=4, other in 1u32..=4) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let p = ParamSet::rail(20.0);
        let prof = random_profiles(&mut rng, f.corridor(), 8);
        let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, m, other).unwrap();
        let h = headway_candidate(&f, Direction::Cw, m, &prof, &b_cw, &b_ccw, &p).unwrap();
        let gc = |x: f64| {
            let sc = DesignScalars { lines_cw: m, lines_ccw: other, headway_cw: x, headway_ccw: 0.05 };
            scalar_cost(&f, &sc, &p) + integrated_pointwise(&f, &sc, &prof, &b_cw, &b_ccw, &p).unwrap()
        };
        let step = 1e-5;
        let grid = lattice_argmin(gc, step, 1.0, step);
        prop_assert!((h - grid).abs() <= step, "{h} vs {grid}");
    }

    #[test]
    fn uniform_origins_flow_is_demand_times_mean_length(mean in 2.0f64..12.0, frac in 0.05f64..0.5, demand in 100.0f64..5000.0) {
        let f = field(40.0, 80, demand, OriginPdf::Uniform, mean, frac * mean / 1.8);
        for dir in [Direction::Cw, Direction::Ccw] {
            for c in f.flows(dir) {
                prop_assert!((c - demand * mean / 40.0).abs() <= 0.01 * demand * mean / 40.0);
            }
        }
    }

    #[test]
    fn pointwise_cost_is_convex_in_spacing(seed in any::<u8>(), j in 0usize..40, bay in 1u32..=20, p in mode()) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let sc = DesignScalars { lines_cw: 2, lines_ccw: 3, headway_cw: 0.05, headway_ccw: 0.07 };
        let g = |s: f64| pointwise_integrand(&sc, s, bay as f64, &f.point(j), 0.4, 0.1, &p);
        let h = 0.01;
        for k in 1..300 {
            let s = k as f64 * h;
            prop_assert!(g(s) + g(s + 2.0 * h) - 2.0 * g(s + h) >= -1e-9 * g(s).abs());
        }
    }

    #[test]
    fn cost_is_convex_in_headways(seed in any::<u8>(), m_cw in 1u32..=4, m_ccw in 1u32..=4) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let p = ParamSet::bus(20.0);
        let prof = random_profiles(&mut rng, f.corridor(), 8);
        let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, m_cw, m_ccw).unwrap();
        let gc = |a: f64, b: f64| {
            let sc = DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: a, headway_ccw: b };
            cost_with_backtracking(&f, &sc, &prof, &b_cw, &b_ccw, &p).unwrap().gc
        };
        let (a0, b0, a1, b1) = (rng.random_range(0.02..0.3), rng.random_range(0.02..0.3), rng.random_range(0.02..0.3), rng.random_range(0.02..0.3));
        let mid = gc((a0 + a1) / 2.0, (b0 + b1) / 2.0);
        prop_assert!(mid <= (gc(a0, b0) + gc(a1, b1)) / 2.0 * (1.0 + 1e-12));
    }

    #[test]
    fn transfer_stops_respect_line_periodicity(seed in any::<u8>(), m_cw in 1u32..=4, m_ccw in 1u32..=4) {
        let mut rng = rng(seed);
        let corridor = skipstop_core::demand::Corridor::new(40.0, 80).unwrap();
        let prof = random_profiles(&mut rng, &corridor, 20);
        let (plan, _) = generate_plan(&prof.spacing, &prof.bay, m_cw, m_ccw, &corridor).unwrap();
        let last = plan.transfers.len() - 1;
        prop_assert!(plan.divisibility_violations().iter().all(|k| *k == last));
        prop_assert_eq!(plan.transfers[0], 0);
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn lower_bound_dominates_random_designs(mode_rail in any::<bool>(), so in prop_oneof![Just(None), Just(Some(4.0)), Just(Some(8.0))],
                                             mean in prop_oneof![Just(8.0), Just(12.0)], seed in any::<u8>()) {
        let p = if mode_rail { ParamSet::rail(10.0) } else { ParamSet::bus(10.0) };
        let demand = if mode_rail { 500.0 * 40.0 } else { 75.0 * 40.0 };
        let origin = so.map_or(OriginPdf::Uniform, |s| OriginPdf::TruncatedNormal { std_km: s });
        let f = field(40.0, 80, demand, origin, mean, 2.0);
        prop_assume!(f.is_directionally_symmetric());
        let lb = lb_solve(&f, &p, &BoundSettings::default()).unwrap();
        let mut rng = rng(seed);
        let mut checked = 0;
        while checked < 50 {
            let Some((sc, prof)) = random_feasible_design(&mut rng, &f, &p) else { continue };
            let gc = generalized_cost(&f, &sc, &prof, &p).unwrap().gc;
            prop_assert!(lb.value <= gc, "bound {} above design {gc} ({sc:?})", lb.value);
            checked += 1;
        }
    }
}

proptest! {
    #![proptest_config(config(16))]

    #[test]
    fn exact_accounting_invariants(seed in any::<u8>(), m_cw in 1u32..=3, m_ccw in 1u32..=3) {
        let mut rng = rng(seed);
        let f = random_field(&mut rng);
        let p = ParamSet::rail(20.0);
        let prof = random_profiles(&mut rng, f.corridor(), 8);
        let (plan, _) = generate_plan(&prof.spacing, &prof.bay, m_cw, m_ccw, f.corridor()).unwrap();
        let od = aggregate_od_demand(&f, &plan).unwrap();
        prop_assert!((od.iter().sum::<f64>() - f.total_mass()).abs() <= 1e-3 * f.total_mass());
        let sc = DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: 0.06, headway_ccw: 0.04 };
        let ev = exact_costs(&f, &plan, &sc, &p, BacktrackRoute::CheaperOfTwo, true).unwrap();
        let index = RouteIndex::new(&plan);
        let longest_bay = (0..plan.transfers.len())
            .map(|k| {
                let start = plan.stops[plan.transfers[k]];
                let end = plan.transfers.get(k + 1).map_or(plan.length + plan.stops[0], |&u| plan.stops[u]);
                end - start
            })
            .fold(0.0, f64::max);
        let h_min = sc.headway_cw.min(sc.headway_ccw) / 2.0;
        let h_max = (m_cw as f64 * sc.headway_cw).max(m_ccw as f64 * sc.headway_ccw);
        for a in &ev.accounts {
            let direct = index.distance(a.route.direction, a.origin, a.destination);
            if a.route.kind == TripType::Backtrack {
                prop_assert!(a.route.distance >= direct - 1e-9);
                prop_assert!(a.route.distance <= direct + 2.0 * longest_bay + 1e-9);
            } else {
                prop_assert!((a.route.distance - direct).abs() < 1e-9);
            }
            let per_trip = a.wait / a.demand;
            prop_assert!(per_trip >= h_min - 1e-12 && per_trip <= h_max + 1e-12);
        }
    }
}

#[test]
fn uniform_profiles_place_length_over_spacing_stops() {
    let corridor = skipstop_core::demand::Corridor::new(40.0, 80).unwrap();
    for s in [0.4, 0.5, 0.8, 1.0, 1.25, 2.0, 2.5, 4.0, 5.0] {
        let fit = fit_profiles(&vec![s; 80], &vec![1.0; 80], &corridor).unwrap();
        let stops = place_stops(&fit);
        assert_eq!(stops.len(), (40.0 / s).round() as usize, "s = {s}");
        for (k, x) in stops.iter().enumerate() {
            assert!((x - k as f64 * s).abs() < 1e-9);
        }
    }
}

#[test]
fn all_stop_design_has_no_skip_stop_terms() {
    let f = field(40.0, 80, 3000.0, OriginPdf::TruncatedNormal { std_km: 6.0 }, 8.0, 2.0);
    let p = ParamSet::bus(20.0);
    let prof = DesignProfiles::uniform(80, 0.6, 1);
    let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, 1, 1).unwrap();
    assert!(b_cw.iter().chain(&b_ccw).all(|b| *b == 0.0));
    let sc = DesignScalars { lines_cw: 1, lines_ccw: 1, headway_cw: 0.1, headway_ccw: 0.08 };
    let cost = generalized_cost(&f, &sc, &prof, &p).unwrap();
    assert_eq!(cost.transfer, 0.0);
    assert_relative_eq!(cost.wait, 0.1 * f.total(Direction::Cw) / 2.0 + 0.08 * f.total(Direction::Ccw) / 2.0, max_relative = 1e-12);
}

#[test]
fn dropped_terms_nonnegative_at_symmetric_designs() {
    let f = field(40.0, 80, 20000.0, OriginPdf::TruncatedNormal { std_km: 8.0 }, 12.0, 4.0);
    let p = ParamSet::rail(20.0);
    let mut rng = rng(7);
    for _ in 0..20 {
        let prof = random_profiles(&mut rng, f.corridor(), 12);
        let m = rng.random_range(1..=4u32);
        let h = rng.random_range(0.03..0.1);
        let sc = DesignScalars { lines_cw: m, lines_ccw: m, headway_cw: h, headway_ccw: h };
        let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, m, m).unwrap();
        assert!(dropped_backtracking_cost(&f, &sc, &prof, &b_cw, &b_ccw, &p) >= -1e-9);
    }
}
