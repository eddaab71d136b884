//! Exact cost accounting on a discrete stop plan.
//!
//! Demand is lumped onto stop pairs by nearest-stop catchments. Each stop
//! pair is then classified by the stop types and line memberships of its
//! ends and charged the wait, ride, dwell and transfer costs of the route it
//! takes. Access is integrated exactly against the distance to the nearest
//! stop.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::cost::{CostBreakdown, DesignScalars};
use crate::demand::DemandField;
use crate::params::ParamSet;
use crate::plan::StopPlan;
use crate::{Direction, Error, Result};

/// How a backtracking trip picks its transfer stop.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BacktrackRoute {
    /// The cheaper of transferring downstream and backtracking first.
    #[default]
    CheaperOfTwo,
    /// The bay end closer to both stops.
    NearestTransfer,
}

/// Trip categories by stop types and line memberships.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TripType {
    /// Both ends are transfer stops.
    BothTransfer = 1,
    /// Exactly one end is a transfer stop.
    OneTransfer = 2,
    /// Both ends on a common line.
    SameLine = 3,
    /// Different lines inside one bay: the trip backtracks.
    Backtrack = 4,
    /// Different lines in different bays: one transfer on the way.
    Transfer = 5,
}

/// Route of the trips between one stop pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripRoute {
    pub direction: Direction,
    pub kind: TripType,
    /// Distance ridden (km), including any backtracking.
    pub distance: f64,
    /// Stops visited after boarding, counting the alighting stop.
    pub stops_visited: f64,
    /// Stop index where the patron changes vehicles.
    pub transfer_at: Option<usize>,
    /// Direction of the first leg; differs from `direction` when the trip
    /// backtracks first.
    pub first_leg: Direction,
}

/// Demand between stop pairs (row = origin stop), trips/h.
pub fn aggregate_od_demand(field: &DemandField, plan: &StopPlan) -> Result<Vec<f64>> {
    let corridor = field.corridor();
    if (plan.length - corridor.length()).abs() > 1e-9 * corridor.length() {
        return Err(Error::InvalidDesign("plan and corridor lengths differ".into()));
    }
    if plan.is_empty() {
        return Err(Error::InvalidDesign("plan has no stops".into()));
    }
    let n = field.cells();
    let stops = plan.len();
    let dx = corridor.step();
    let weights = catchment_weights(plan, n, dx);
    // λ_ij = Σ_c Σ_e w_ic λ_ce w_je Δx².
    let mut partial = vec![0.0; stops * n];
    for (i, row) in weights.iter().enumerate() {
        for &(c, w) in row {
            for e in 0..n {
                partial[i * n + e] += w * field.lambda(c, e);
            }
        }
    }
    let mut od = vec![0.0; stops * stops];
    for i in 0..stops {
        for (j, row) in weights.iter().enumerate() {
            od[i * stops + j] = row.iter().map(|&(e, w)| partial[i * n + e] * w).sum::<f64>() * dx * dx;
        }
    }
    Ok(od)
}

/// Catchment of stop `i` as `(lo, hi)` on the unwrapped line, from the
/// preceding mid-gap to the following one.
fn catchment(plan: &StopPlan, i: usize) -> (f64, f64) {
    let x = plan.stops[i];
    let prev = if i == 0 { plan.gap_after(plan.len() - 1) } else { plan.gap_after(i - 1) };
    (x - prev / 2.0, x + plan.gap_after(i) / 2.0)
}

/// Share of each cell inside each stop's catchment, as `(cell, share)`.
fn catchment_weights(plan: &StopPlan, cells: usize, dx: f64) -> Vec<Vec<(usize, f64)>> {
    (0..plan.len())
        .map(|i| {
            let (lo, hi) = catchment(plan, i);
            let first = libm::floor(lo / dx) as i64;
            let last = libm::floor(hi / dx) as i64;
            let mut out: Vec<(usize, f64)> = Vec::new();
            for k in first..=last {
                let a = (k as f64 * dx).max(lo);
                let b = ((k + 1) as f64 * dx).min(hi);
                if b > a {
                    let cell = k.rem_euclid(cells as i64) as usize;
                    match out.iter_mut().find(|(c, _)| *c == cell) {
                        Some(entry) => entry.1 += (b - a) / dx,
                        None => out.push((cell, (b - a) / dx)),
                    }
                }
            }
            out
        })
        .collect()
}

/// Precomputed stop structure for constant-time route queries.
pub struct RouteIndex<'a> {
    plan: &'a StopPlan,
    /// Per direction and line, served-stop counts over the doubled index:
    /// `served[d][l][k]` counts served stops among `0..k` (indices mod N).
    served: [Vec<Vec<u32>>; 2],
    /// Bay of each stop.
    bay: Vec<usize>,
    /// First transfer stop strictly after each stop (clockwise).
    next_transfer: Vec<usize>,
    /// First transfer stop strictly before each stop.
    prev_transfer: Vec<usize>,
}

fn dir_index(dir: Direction) -> usize {
    match dir {
        Direction::Cw => 0,
        Direction::Ccw => 1,
    }
}

impl<'a> RouteIndex<'a> {
    pub fn new(plan: &'a StopPlan) -> Self {
        let n = plan.len();
        let served = [Direction::Cw, Direction::Ccw].map(|dir| {
            (0..plan.lines(dir))
                .map(|line| {
                    let mut acc = vec![0u32; 2 * n + 1];
                    for k in 0..2 * n {
                        acc[k + 1] = acc[k] + plan.serves(dir, line as u8, k % n) as u32;
                    }
                    acc
                })
                .collect()
        });
        // Stops ahead of the first transfer stop close the wrap-around bay.
        let mut bay = vec![plan.transfers.len().saturating_sub(1); n];
        for (k, &start) in plan.transfers.iter().enumerate() {
            let end = plan.transfers.get(k + 1).copied().unwrap_or(n);
            for b in &mut bay[start..end] {
                *b = k;
            }
        }
        let mut next_transfer = vec![0; n];
        let mut prev_transfer = vec![0; n];
        for i in 0..n {
            next_transfer[i] = (1..=n).map(|d| (i + d) % n).find(|&k| plan.is_transfer(k)).unwrap_or(i);
            prev_transfer[i] = (1..=n).map(|d| (i + n - d) % n).find(|&k| plan.is_transfer(k)).unwrap_or(i);
        }
        Self { plan, served, bay, next_transfer, prev_transfer }
    }

    fn n(&self) -> usize {
        self.plan.len()
    }

    /// Distance travelled from stop `i` to stop `j` moving in `dir`.
    pub fn distance(&self, dir: Direction, i: usize, j: usize) -> f64 {
        let l = self.plan.length;
        let d = self.plan.stops[j] - self.plan.stops[i];
        let forward = if d >= 0.0 { d } else { d + l };
        match dir {
            Direction::Cw => forward,
            Direction::Ccw => {
                if forward == 0.0 {
                    0.0
                } else {
                    l - forward
                }
            }
        }
    }

    /// Stops served by `line` after leaving `i` up to and including `j`,
    /// moving in `dir`.
    pub fn visits(&self, dir: Direction, line: u8, i: usize, j: usize) -> u32 {
        let n = self.n();
        let acc = &self.served[dir_index(dir)][line as usize];
        if i == j {
            return 0;
        }
        match dir {
            Direction::Cw => {
                let end = if j > i { j } else { j + n };
                acc[end + 1] - acc[i + 1]
            }
            Direction::Ccw => {
                let start = if j < i { i } else { i + n };
                acc[start] - acc[j]
            }
        }
    }

    /// Line of `dir` through non-transfer stop `i`.
    fn line(&self, dir: Direction, i: usize) -> u8 {
        self.plan.line_of(dir, i).expect("non-transfer stop")
    }

    /// Travel direction: the shorter way round, clockwise on ties.
    pub fn direction(&self, i: usize, j: usize) -> Direction {
        if self.distance(Direction::Cw, i, j) <= self.plan.length / 2.0 {
            Direction::Cw
        } else {
            Direction::Ccw
        }
    }

    pub fn classify(&self, i: usize, j: usize, dwell_over_speed: f64, route: BacktrackRoute) -> TripRoute {
        let plan = self.plan;
        let dir = self.direction(i, j);
        let back = dir.opposite();
        let direct = self.distance(dir, i, j);
        let (ti, tj) = (plan.is_transfer(i), plan.is_transfer(j));
        let m = plan.lines(dir);
        if ti && tj {
            let avg = (0..m).map(|l| self.visits(dir, l as u8, i, j) as f64).sum::<f64>() / m as f64;
            return TripRoute { direction: dir, kind: TripType::BothTransfer, distance: direct, stops_visited: avg, transfer_at: None, first_leg: dir };
        }
        if ti || tj {
            let line = if ti { self.line(dir, j) } else { self.line(dir, i) };
            return TripRoute {
                direction: dir,
                kind: TripType::OneTransfer,
                distance: direct,
                stops_visited: self.visits(dir, line, i, j) as f64,
                transfer_at: None,
                first_leg: dir,
            };
        }
        let (li, lj) = (self.line(dir, i), self.line(dir, j));
        if li == lj {
            return TripRoute {
                direction: dir,
                kind: TripType::SameLine,
                distance: direct,
                stops_visited: self.visits(dir, li, i, j) as f64,
                transfer_at: None,
                first_leg: dir,
            };
        }
        if self.bay[i] == self.bay[j] {
            // Ahead of both stops in the travel direction, and behind both.
            let (ahead, behind) = match dir {
                Direction::Cw => (self.next_transfer[i], self.prev_transfer[i]),
                Direction::Ccw => (self.prev_transfer[i], self.next_transfer[i]),
            };
            let via = |t: usize, first: Direction| {
                let second = first.opposite();
                let d = self.distance(first, i, t) + self.distance(second, t, j);
                let n = self.visits(first, self.line(first, i), i, t) + self.visits(second, self.line(second, j), t, j);
                (d, n as f64, t, first)
            };
            let downstream = via(ahead, dir);
            let backtrack_first = via(behind, back);
            let pick_first = match route {
                BacktrackRoute::CheaperOfTwo => {
                    downstream.1 * dwell_over_speed + downstream.0 <= backtrack_first.1 * dwell_over_speed + backtrack_first.0
                }
                BacktrackRoute::NearestTransfer => downstream.0 <= backtrack_first.0,
            };
            let (d, n, t, first) = if pick_first { downstream } else { backtrack_first };
            return TripRoute {
                direction: dir,
                kind: TripType::Backtrack,
                distance: d,
                stops_visited: n,
                transfer_at: Some(t),
                first_leg: first,
            };
        }
        let x = match dir {
            Direction::Cw => self.next_transfer[i],
            Direction::Ccw => self.prev_transfer[i],
        };
        let n = self.visits(dir, li, i, x) + self.visits(dir, lj, x, j);
        TripRoute { direction: dir, kind: TripType::Transfer, distance: direct, stops_visited: n as f64, transfer_at: Some(x), first_leg: dir }
    }

    /// Stops visited per loop by each line of `dir`.
    pub fn stops_per_loop(&self, dir: Direction, line: u8) -> u32 {
        let n = self.n();
        self.served[dir_index(dir)][line as usize][n]
    }
}

/// Convenience wrapper around [`RouteIndex::classify`].
pub fn classify_trip(plan: &StopPlan, i: usize, j: usize, params: &ParamSet, route: BacktrackRoute) -> TripRoute {
    RouteIndex::new(plan).classify(i, j, params.dwell * params.cruise_speed, route)
}

/// Expected wait of a trip type.
fn wait_for(kind: TripType, dir: Direction, scalars: &DesignScalars) -> f64 {
    let m = scalars.lines(dir) as f64;
    let h = scalars.headway(dir);
    match kind {
        TripType::BothTransfer => h / 2.0,
        TripType::OneTransfer | TripType::SameLine => m * h / 2.0,
        TripType::Backtrack => {
            (scalars.lines_cw as f64 * scalars.headway_cw + scalars.lines_ccw as f64 * scalars.headway_ccw) / 2.0
        }
        TripType::Transfer => m * h,
    }
}

/// One stop pair's account.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OdAccount {
    pub origin: usize,
    pub destination: usize,
    pub demand: f64,
    pub route: TripRoute,
    pub wait: f64,
    pub ride: f64,
    pub transfer: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactEvaluation {
    pub cost: CostBreakdown,
    /// Trips per hour by `[direction][type - 1]`.
    pub trips_by_type: [[f64; 5]; 2],
    /// Trips per hour with origin and destination at the same stop.
    pub intra_stop_trips: f64,
    /// Trips per hour on the gap after each stop, per direction.
    pub segment_loads: [Vec<f64>; 2],
    /// Largest segment load times headway over capacity, per direction.
    pub peak_load_ratio: [f64; 2],
    pub capacity_exceeded: bool,
    /// Per stop-pair accounts, when requested.
    pub accounts: Vec<OdAccount>,
}

/// Access and egress time: trip ends weighted by the walk to the nearest stop.
fn exact_access(field: &DemandField, plan: &StopPlan, params: &ParamSet) -> f64 {
    let corridor = field.corridor();
    let dx = corridor.step();
    let n = field.cells();
    let mut total = 0.0;
    // Walk distance is piecewise linear between stops and mid-gaps; integrate
    // each piece exactly against the piecewise-constant end density.
    for i in 0..plan.len() {
        let x = plan.stops[i];
        let gap = plan.gap_after(i);
        for (a, b, rising) in [(x, x + gap / 2.0, true), (x + gap / 2.0, x + gap, false)] {
            let first = libm::floor(a / dx) as i64;
            let last = libm::floor(b / dx) as i64;
            for k in first..=last {
                let lo = (k as f64 * dx).max(a);
                let hi = ((k + 1) as f64 * dx).min(b);
                if hi <= lo {
                    continue;
                }
                let cell = k.rem_euclid(n as i64) as usize;
                let walk = |z: f64| if rising { z - a } else { b - z };
                let ends = field.point(cell).total_ends();
                total += ends * (walk(lo) + walk(hi)) / 2.0 * (hi - lo);
            }
        }
    }
    total / params.walk_speed
}

pub fn exact_costs(
    field: &DemandField,
    plan: &StopPlan,
    scalars: &DesignScalars,
    params: &ParamSet,
    route: BacktrackRoute,
    keep_accounts: bool,
) -> Result<ExactEvaluation> {
    scalars.check_shape()?;
    if plan.lines_cw != scalars.lines_cw || plan.lines_ccw != scalars.lines_ccw {
        return Err(Error::InvalidDesign("plan line counts differ from the design".into()));
    }
    let od = aggregate_od_demand(field, plan)?;
    let index = RouteIndex::new(plan);
    let n = plan.len();
    let l = plan.length;
    let dwell_over_speed = params.dwell * params.cruise_speed;

    let mut wait = 0.0;
    let mut ride = 0.0;
    let mut transfer = 0.0;
    let mut trips_by_type = [[0.0; 5]; 2];
    let mut intra = 0.0;
    let mut accounts = Vec::new();
    // Segment loads by direction over gaps 0..n (gap k follows stop k), kept
    // as difference arrays on the doubled index.
    let mut load = [vec![0.0; 2 * n + 1], vec![0.0; 2 * n + 1]];
    let mut add_leg = |dir: Direction, from: usize, to: usize, flow: f64| {
        if from == to {
            return;
        }
        let d = &mut load[dir_index(dir)];
        // Gaps crossed: clockwise from..to-1; counterclockwise to..from-1.
        let (a, b) = match dir {
            Direction::Cw => (from, if to > from { to } else { to + n }),
            Direction::Ccw => (to, if from > to { from } else { from + n }),
        };
        d[a] += flow;
        d[b] -= flow;
    };

    for i in 0..n {
        for j in 0..n {
            let demand = od[i * n + j];
            if demand == 0.0 {
                continue;
            }
            if i == j {
                intra += demand;
                continue;
            }
            let r = index.classify(i, j, dwell_over_speed, route);
            let w = wait_for(r.kind, r.direction, scalars) * demand;
            let v = (params.dwell * r.stops_visited + r.distance / params.cruise_speed) * demand;
            let t = if matches!(r.kind, TripType::Backtrack | TripType::Transfer) {
                params.transfer_penalty * demand
            } else {
                0.0
            };
            wait += w;
            ride += v;
            transfer += t;
            trips_by_type[dir_index(r.direction)][r.kind as usize - 1] += demand;
            match r.transfer_at {
                Some(x) => {
                    add_leg(r.first_leg, i, x, demand);
                    let second = if r.kind == TripType::Backtrack { r.first_leg.opposite() } else { r.first_leg };
                    add_leg(second, x, j, demand);
                }
                None => add_leg(r.direction, i, j, demand),
            }
            if keep_accounts {
                accounts.push(OdAccount { origin: i, destination: j, demand, route: r, wait: w, ride: v, transfer: t });
            }
        }
    }

    let mut peak_load_ratio = [0.0; 2];
    let mut segment_loads = [Vec::new(), Vec::new()];
    for dir in [Direction::Cw, Direction::Ccw] {
        let d = &load[dir_index(dir)];
        let mut running = 0.0;
        let mut per_gap = vec![0.0; n];
        for (k, delta) in d.iter().take(2 * n).enumerate() {
            running += delta;
            per_gap[k % n] += running;
        }
        let peak = per_gap.iter().copied().fold(0.0, f64::max);
        peak_load_ratio[dir_index(dir)] = peak * scalars.headway(dir) / params.capacity;
        segment_loads[dir_index(dir)] = per_gap;
    }
    let capacity_exceeded = peak_load_ratio.iter().any(|r| *r > 1.0 + 1e-9);

    let access = exact_access(field, plan, params);
    let vehicle_km = params.vehicle_km_cost * l / params.value_of_time * (1.0 / scalars.headway_cw + 1.0 / scalars.headway_ccw);
    let mut vehicle_hour = 0.0;
    for dir in [Direction::Cw, Direction::Ccw] {
        let m = plan.lines(dir);
        let visited = (0..m).map(|line| index.stops_per_loop(dir, line as u8) as f64).sum::<f64>() / m as f64;
        vehicle_hour += params.vehicle_hour_cost / (params.value_of_time * scalars.headway(dir))
            * (params.dwell * (visited + 1.0) + l / params.cruise_speed);
    }
    let infrastructure = 2.0 * params.infrastructure_cost * l / params.value_of_time;
    let stops = params.stop_cost * n as f64 / params.value_of_time;
    let cost = CostBreakdown::from_components([access, wait, ride, transfer, vehicle_km, vehicle_hour, infrastructure, stops]);
    Ok(ExactEvaluation {
        cost,
        trips_by_type,
        intra_stop_trips: intra,
        segment_loads,
        peak_load_ratio,
        capacity_exceeded,
        accounts,
    })
}

/// One comparison row.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub item: String,
    pub approximate: f64,
    pub exact: f64,
    /// `|exact - approximate| / approximate`, or the absolute difference when
    /// the approximate value is zero.
    pub error: f64,
    pub absolute: bool,
}

/// Rows for GC, user cost, agency cost and the eight components.
pub fn error_report(exact: &CostBreakdown, approximate: &CostBreakdown) -> Vec<ErrorRow> {
    let items: [(&str, f64, f64); 11] = [
        ("GC", approximate.gc, exact.gc),
        ("user", approximate.user(), exact.user()),
        ("agency", approximate.agency(), exact.agency()),
        ("UT_a", approximate.access, exact.access),
        ("UT_w", approximate.wait, exact.wait),
        ("UT_v", approximate.in_vehicle, exact.in_vehicle),
        ("UT_t", approximate.transfer, exact.transfer),
        ("AC_K", approximate.vehicle_km, exact.vehicle_km),
        ("AC_H", approximate.vehicle_hour, exact.vehicle_hour),
        ("AC_I", approximate.infrastructure, exact.infrastructure),
        ("AC_S", approximate.stops, exact.stops),
    ];
    items
        .iter()
        .map(|&(item, ca, ex)| {
            let diff = (ex - ca).abs();
            let absolute = ca == 0.0 && ex != 0.0;
            let error = if ca == 0.0 { diff } else { diff / ca.abs() };
            ErrorRow { item: item.into(), approximate: ca, exact: ex, error, absolute }
        })
        .collect()
}
