//! Independent oracles and random instance builders shared by the property
//! tests and the acceptance run.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestRng};
use skipstop_core::cost::{capacity_headway_ceiling, trip_type_wait_table, DesignProfiles, DesignScalars};
use skipstop_core::demand::{
    backtrack_densities, build_demand_field, Corridor, DemandField, DemandSpec, OriginPdf, TripLengthPdf,
};
use skipstop_core::params::ParamSet;
use skipstop_core::Direction;

pub fn rng(seed: u8) -> TestRng {
    TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32])
}

pub fn field(length: f64, cells: usize, demand: f64, origin: OriginPdf, mean: f64, std: f64) -> DemandField {
    let spec = DemandSpec { directional_demand: demand, origin, trip_length: TripLengthPdf { mean_km: mean, std_km: std } };
    build_demand_field(&spec, &Corridor::new(length, cells).unwrap()).unwrap()
}

/// Random demand on a 20 km, 40-cell loop.
pub fn random_field(rng: &mut TestRng) -> DemandField {
    let origin = if rng.random_bool(0.3) {
        OriginPdf::Uniform
    } else {
        OriginPdf::TruncatedNormal { std_km: rng.random_range(2.0..8.0) }
    };
    let mean: f64 = rng.random_range(3.0..7.0);
    let std = rng.random_range(0.5..(mean / 2.0).min((9.9 - mean) / 1.8));
    field(20.0, 40, rng.random_range(500.0..3000.0), origin, mean, std)
}

/// Random profiles whose backtracking windows fit in half the loop. Bay sizes
/// are piecewise constant over a few stretches.
pub fn random_profiles(rng: &mut TestRng, corridor: &Corridor, max_bay: u32) -> DesignProfiles {
    let n = corridor.cells();
    let pieces = rng.random_range(1..5usize);
    let mut bay = vec![1u32; n];
    let mut spacing = vec![0.0; n];
    for p in 0..pieces {
        let t = rng.random_range(1..=max_bay);
        for b in &mut bay[p * n / pieces..(p + 1) * n / pieces] {
            *b = t;
        }
    }
    let base = rng.random_range(0.3..1.5);
    let wobble = rng.random_range(0.0..0.5);
    for (j, s) in spacing.iter_mut().enumerate() {
        let phase = j as f64 / n as f64 * std::f64::consts::TAU;
        *s = base * (1.0 + wobble * phase.sin());
        let limit = 0.45 * corridor.length() / bay[j] as f64;
        *s = s.min(limit);
    }
    DesignProfiles { spacing, bay }
}

/// Waiting cost by summing, over cell pairs, demand times the per-trip-type wait
/// of each trip type weighted by its probability, plus the backtracking
/// trips' correction from type 5 to type 4.
pub fn wait_by_trip_types(
    field: &DemandField,
    scalars: &DesignScalars,
    bay: &[u32],
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> f64 {
    let n = field.cells();
    let dx = field.corridor().step();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            let lam = field.lambda(j, k) * dx * dx;
            if lam == 0.0 {
                continue;
            }
            let cw = field.cw_share((k + n - j) % n);
            let (t1, t2) = (1.0 / bay[j] as f64, 1.0 / bay[k] as f64);
            for (dir, share) in [(Direction::Cw, cw), (Direction::Ccw, 1.0 - cw)] {
                let m = scalars.lines(dir) as f64;
                let w = trip_type_wait_table(scalars, dir);
                let both = t1 * t2;
                let one = t1 * (1.0 - t2) + (1.0 - t1) * t2;
                let none = (1.0 - t1) * (1.0 - t2);
                let per_trip = w[0] * both + w[1] * one + w[2] * none / m + w[4] * none * (m - 1.0) / m;
                total += lam * share * per_trip;
            }
        }
    }
    let w_cw = trip_type_wait_table(scalars, Direction::Cw);
    let w_ccw = trip_type_wait_table(scalars, Direction::Ccw);
    for j in 0..n {
        total += params.backtrack_weight * ((w_cw[3] - w_cw[4]) * b_cw[j] + (w_ccw[3] - w_ccw[4]) * b_ccw[j]) * dx;
    }
    total
}

/// Transfers counted pair by pair: a trip transfers when neither end is a
/// transfer stop and the ends sit on different lines.
pub fn transfers_by_pairs(field: &DemandField, scalars: &DesignScalars, bay: &[u32]) -> f64 {
    let n = field.cells();
    let dx = field.corridor().step();
    let mut total = 0.0;
    for j in 0..n {
        for k in 0..n {
            let lam = field.lambda(j, k) * dx * dx;
            let cw = field.cw_share((k + n - j) % n);
            let none = (1.0 - 1.0 / bay[j] as f64) * (1.0 - 1.0 / bay[k] as f64);
            for (dir, share) in [(Direction::Cw, cw), (Direction::Ccw, 1.0 - cw)] {
                let m = scalars.lines(dir) as f64;
                total += lam * share * none * (m - 1.0) / m;
            }
        }
    }
    total
}

/// Argmin of `f` on the lattice `lo, lo + step, ..` up to `hi`.
pub fn lattice_argmin(f: impl Fn(f64) -> f64, lo: f64, hi: f64, step: f64) -> f64 {
    let count = ((hi - lo) / step).floor() as usize;
    let mut best = (lo, f(lo));
    for i in 1..=count {
        let x = lo + i as f64 * step;
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best.0
}

/// Random design that satisfies the headway floors and capacity, or `None`
/// when the drawn profiles leave no room.
pub fn random_feasible_design(
    rng: &mut TestRng,
    field: &DemandField,
    params: &ParamSet,
) -> Option<(DesignScalars, DesignProfiles)> {
    let lines_cw = rng.random_range(1..=4u32);
    let lines_ccw = rng.random_range(1..=4u32);
    let profiles = random_profiles(rng, field.corridor(), 12);
    let (b_cw, b_ccw) = backtrack_densities(field, &profiles.spacing, &profiles.bay, lines_cw, lines_ccw).ok()?;
    let mut pick = |dir: Direction, m: u32| {
        let lo = params.headway_floor(m);
        let hi = capacity_headway_ceiling(field, dir, &profiles, &b_cw, &b_ccw, params).min(lo * 8.0);
        (lo <= hi).then(|| rng.random_range(lo..=hi))
    };
    let headway_cw = pick(Direction::Cw, lines_cw)?;
    let headway_ccw = pick(Direction::Ccw, lines_ccw)?;
    Some((DesignScalars { lines_cw, lines_ccw, headway_cw, headway_ccw }, profiles))
}
