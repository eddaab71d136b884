//! Relaxation lower bound on the optimal generalized cost.
//!
//! The relaxation drops every backtracking term, loosens the capacity limits
//! to the through flow, and replaces the transfer relief by its upper bound.
//! What remains is a scalar part plus, at each point, `f(s) + β(s)/T`. For
//! fixed `s` this is minimized by `T = 1` or `T → ∞`, so the pointwise
//! minimum is `min{min_s f, min_s (f + β)}`. Line counts and headways are
//! searched over a regular headway grid.

use alloc::vec::Vec;

use crate::cost::{DesignProfiles, DesignScalars, MAX_LINES};
use crate::demand::{DemandField, PointDemand};
use crate::math::floor;
use crate::params::ParamSet;
use crate::search::golden_section_minimize;
use crate::{Direction, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundSettings {
    /// Headway grid step (h).
    pub headway_step: f64,
    /// Spacing search bracket (km).
    pub spacing_bracket: (f64, f64),
    /// Spacing search tolerance (km).
    pub spacing_tol: f64,
    pub max_lines: u32,
    /// Refine the best grid point of each line-count pair by a local
    /// continuous search within one grid step.
    pub polish: bool,
}

impl Default for BoundSettings {
    fn default() -> Self {
        Self {
            headway_step: 0.1 / 60.0,
            spacing_bracket: (1e-3, 5.0),
            spacing_tol: 1e-6,
            max_lines: MAX_LINES,
            polish: true,
        }
    }
}

/// Scalar part of the relaxed cost.
pub fn theta(field: &DemandField, scalars: &DesignScalars, params: &ParamSet) -> f64 {
    let l = field.corridor().length();
    let mut total = 2.0 * params.infrastructure_cost * l / params.value_of_time;
    for dir in [Direction::Cw, Direction::Ccw] {
        let m = scalars.lines(dir) as f64;
        let h = scalars.headway(dir);
        let demand = field.total(dir);
        total += (2.0 * m - 1.0) * demand / 2.0 * h
            + params.transfer_penalty * (m - 1.0) / m * demand
            + params.vehicle_km_cost * l / (params.value_of_time * h);
    }
    total
}

/// On-board flow plus the fleet-hour cost rate of one direction.
fn loaded_flow(pd: &PointDemand, scalars: &DesignScalars, dir: Direction, params: &ParamSet) -> f64 {
    pd.flow(dir) + params.vehicle_hour_cost / (params.value_of_time * scalars.headway(dir))
}

/// Pointwise relaxed cost without any bay-size structure (`T → ∞`).
pub fn f(pd: &PointDemand, scalars: &DesignScalars, spacing: f64, params: &ParamSet) -> f64 {
    let mut total = spacing / (4.0 * params.walk_speed) * pd.total_ends() + params.stop_cost / (params.value_of_time * spacing);
    for dir in [Direction::Cw, Direction::Ccw] {
        let m = scalars.lines(dir) as f64;
        total += loaded_flow(pd, scalars, dir, params) * (1.0 / params.cruise_speed + params.dwell / (m * spacing));
    }
    total
}

/// Coefficient of `1/T` in the relaxed pointwise cost.
pub fn beta(pd: &PointDemand, scalars: &DesignScalars, spacing: f64, params: &ParamSet) -> f64 {
    let mut total = 0.0;
    for dir in [Direction::Cw, Direction::Ccw] {
        let m = scalars.lines(dir) as f64;
        let share = (m - 1.0) / m;
        total += loaded_flow(pd, scalars, dir, params) * params.dwell / spacing * share
            - (share * params.transfer_penalty + (m - 1.0) * scalars.headway(dir) / 2.0) * pd.ends(dir);
    }
    total
}

/// Which bay-size limit attains the pointwise minimum.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BayBranch {
    /// Every stop a transfer stop.
    Unit,
    /// Arbitrarily long bays.
    Unbounded,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerMinimum {
    pub value: f64,
    pub branch: BayBranch,
    /// Minimizing spacing of `f`.
    pub spacing_unbounded: f64,
    /// Minimizing spacing of `f + β`.
    pub spacing_unit: f64,
}

/// Pointwise minimum over spacing and bay size.
pub fn lb_inner_minimize(
    pd: &PointDemand,
    scalars: &DesignScalars,
    params: &ParamSet,
    settings: &BoundSettings,
) -> InnerMinimum {
    let (lo, hi) = settings.spacing_bracket;
    let unbounded = golden_section_minimize(|s| f(pd, scalars, s, params), lo, hi, settings.spacing_tol);
    let multi_line = scalars.lines_cw > 1 || scalars.lines_ccw > 1;
    let unit = if multi_line {
        golden_section_minimize(|s| f(pd, scalars, s, params) + beta(pd, scalars, s, params), lo, hi, settings.spacing_tol)
    } else {
        unbounded
    };
    assert!(unit.value.is_finite() && unbounded.value.is_finite(), "relaxed pointwise cost unbounded");
    let branch = if unit.value < unbounded.value { BayBranch::Unit } else { BayBranch::Unbounded };
    InnerMinimum {
        value: unit.value.min(unbounded.value),
        branch,
        spacing_unbounded: unbounded.x,
        spacing_unit: unit.x,
    }
}

/// Relaxed cost of fixed line counts and headways, minimized over profiles.
pub fn relaxed_cost(field: &DemandField, scalars: &DesignScalars, params: &ParamSet, settings: &BoundSettings) -> f64 {
    let dx = field.corridor().step();
    theta(field, scalars, params)
        + (0..field.cells())
            .map(|j| lb_inner_minimize(&field.point(j), scalars, params, settings).value * dx)
            .sum::<f64>()
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowerBoundResult {
    pub value: f64,
    pub scalars: DesignScalars,
    /// Pointwise minimizers at the bound's scalars.
    pub inner: Vec<InnerMinimum>,
    /// Demand is reversal or mirror symmetric, where the bound is rigorous.
    pub symmetric_demand: bool,
    /// Relaxed-cost evaluations spent.
    pub evaluations: usize,
}

/// Headways `lo, lo + step, ..` with the top of the range appended when it
/// falls off the lattice.
#[derive(Clone, Copy, Debug)]
struct HeadwayGrid {
    lo: f64,
    hi: f64,
    step: f64,
    count: usize,
}

impl HeadwayGrid {
    fn at(&self, i: usize) -> f64 {
        (self.lo + i as f64 * self.step).min(self.hi)
    }
}

/// Headway grid for one direction, or `None` when the range is empty.
fn headway_grid(field: &DemandField, dir: Direction, lines: u32, params: &ParamSet, step: f64) -> Option<HeadwayGrid> {
    let lo = params.headway_floor(lines);
    let peak = field.max_flow(dir);
    let hi = if peak > 0.0 { params.capacity / peak } else { 60.0 * lo };
    if lo > hi {
        return None;
    }
    let mut count = floor((hi - lo) / step * (1.0 + 1e-12)) as usize + 1;
    if lo + (count - 1) as f64 * step < hi * (1.0 - 1e-12) {
        count += 1;
    }
    Some(HeadwayGrid { lo, hi, step, count })
}

/// Minimum of `a h + c / h` over `[lo, hi]`.
fn min_affine_inverse(a: f64, c: f64, lo: f64, hi: f64) -> f64 {
    let g = |h: f64| a * h + c / h;
    if a <= 0.0 {
        return g(hi);
    }
    let h = crate::math::sqrt(c / a).clamp(lo, hi);
    g(h)
}

struct PairSearch<'a> {
    field: &'a DemandField,
    params: &'a ParamSet,
    settings: &'a BoundSettings,
    lines: (u32, u32),
    grid_cw: HeadwayGrid,
    grid_ccw: HeadwayGrid,
    best: f64,
    best_at: (usize, usize),
    evaluations: usize,
}

impl PairSearch<'_> {
    fn scalars(&self, i: usize, k: usize) -> DesignScalars {
        DesignScalars {
            lines_cw: self.lines.0,
            lines_ccw: self.lines.1,
            headway_cw: self.grid_cw.at(i),
            headway_ccw: self.grid_ccw.at(k),
        }
    }

    /// Integrated pointwise minimum at grid point `(i, k)`.
    fn inner_sum(&mut self, i: usize, k: usize) -> f64 {
        self.evaluations += 1;
        let sc = self.scalars(i, k);
        let dx = self.field.corridor().step();
        (0..self.field.cells())
            .map(|j| lb_inner_minimize(&self.field.point(j), &sc, self.params, self.settings).value * dx)
            .sum()
    }

    fn consider(&mut self, i: usize, k: usize, inner: f64) {
        let value = theta(self.field, &self.scalars(i, k), self.params) + inner;
        if value < self.best {
            self.best = value;
            self.best_at = (i, k);
        }
    }

    /// Lower bound of θ over the box: θ is separable and convex in each
    /// headway.
    fn theta_floor(&self, i0: usize, i1: usize, k0: usize, k1: usize) -> f64 {
        let p = self.params;
        let l = self.field.corridor().length();
        let mut total = 2.0 * p.infrastructure_cost * l / p.value_of_time;
        for (dir, m, grid, a, b) in [
            (Direction::Cw, self.lines.0, self.grid_cw, i0, i1),
            (Direction::Ccw, self.lines.1, self.grid_ccw, k0, k1),
        ] {
            let m = m as f64;
            let demand = self.field.total(dir);
            total += p.transfer_penalty * (m - 1.0) / m * demand
                + min_affine_inverse(
                    (2.0 * m - 1.0) * demand / 2.0,
                    p.vehicle_km_cost * l / p.value_of_time,
                    grid.at(a),
                    grid.at(b),
                );
        }
        total
    }

    /// Depth-first search over the index box. The pointwise minimum is
    /// non-increasing in both headways, so its value at the upper corner
    /// bounds it over the whole box.
    fn explore(&mut self, i0: usize, i1: usize, k0: usize, k1: usize) {
        let corner = self.inner_sum(i1, k1);
        self.consider(i1, k1, corner);
        if i0 == i1 && k0 == k1 {
            return;
        }
        let bound = self.theta_floor(i0, i1, k0, k1) + corner;
        if bound > self.best + 1e-9 * self.best.abs() {
            return;
        }
        let (first, second) = if i1 - i0 >= k1 - k0 {
            let mid = (i0 + i1) / 2;
            ((i0, mid, k0, k1), (mid + 1, i1, k0, k1))
        } else {
            let mid = (k0 + k1) / 2;
            ((i0, i1, k0, mid), (i0, i1, mid + 1, k1))
        };
        let pruned = |s: &Self, b: (usize, usize, usize, usize)| s.theta_floor(b.0, b.1, b.2, b.3);
        // Visit the half with the smaller scalar floor first.
        let (first, second) = if pruned(self, second) < pruned(self, first) { (second, first) } else { (first, second) };
        self.explore(first.0, first.1, first.2, first.3);
        self.explore(second.0, second.1, second.2, second.3);
    }

    fn exhaustive(&mut self) {
        for i in 0..self.grid_cw.count {
            for k in 0..self.grid_ccw.count {
                let inner = self.inner_sum(i, k);
                self.consider(i, k, inner);
            }
        }
    }

    /// Coordinate golden-section refinement around the best grid point.
    fn polish(&mut self) -> (f64, DesignScalars) {
        let mut sc = self.scalars(self.best_at.0, self.best_at.1);
        let mut value = self.best;
        let step = self.settings.headway_step;
        let bounds = |grid: HeadwayGrid, h: f64| ((h - step).max(grid.lo), (h + step).min(grid.hi));
        for _ in 0..3 {
            for dir in [Direction::Cw, Direction::Ccw] {
                let (grid, h) = match dir {
                    Direction::Cw => (self.grid_cw, sc.headway_cw),
                    Direction::Ccw => (self.grid_ccw, sc.headway_ccw),
                };
                let (lo, hi) = bounds(grid, h);
                if hi <= lo {
                    continue;
                }
                let eval = |x: f64| {
                    let mut trial = sc;
                    match dir {
                        Direction::Cw => trial.headway_cw = x,
                        Direction::Ccw => trial.headway_ccw = x,
                    }
                    relaxed_cost(self.field, &trial, self.params, self.settings)
                };
                let m = golden_section_minimize(eval, lo, hi, 1e-4 * step);
                if m.value < value {
                    value = m.value;
                    match dir {
                        Direction::Cw => sc.headway_cw = m.x,
                        Direction::Ccw => sc.headway_ccw = m.x,
                    }
                }
            }
        }
        (value, sc)
    }
}

fn solve(field: &DemandField, params: &ParamSet, settings: &BoundSettings, exhaustive: bool) -> Result<LowerBoundResult> {
    params.validate()?;
    if !(settings.headway_step > 0.0) || !(1..=MAX_LINES).contains(&settings.max_lines) {
        return Err(Error::InvalidParams(alloc::format!("invalid bound settings {settings:?}")));
    }
    let mut best: Option<(f64, DesignScalars)> = None;
    let mut evaluations = 0;
    for m_cw in 1..=settings.max_lines {
        for m_ccw in 1..=settings.max_lines {
            let (Some(grid_cw), Some(grid_ccw)) = (
                headway_grid(field, Direction::Cw, m_cw, params, settings.headway_step),
                headway_grid(field, Direction::Ccw, m_ccw, params, settings.headway_step),
            ) else {
                continue;
            };
            let mut search = PairSearch {
                field,
                params,
                settings,
                lines: (m_cw, m_ccw),
                grid_cw,
                grid_ccw,
                best: best.map_or(f64::INFINITY, |b| b.0),
                best_at: (usize::MAX, usize::MAX),
                evaluations: 0,
            };
            if exhaustive {
                search.exhaustive();
            } else {
                search.explore(0, grid_cw.count - 1, 0, grid_ccw.count - 1);
            }
            evaluations += search.evaluations;
            if search.best_at.0 == usize::MAX {
                continue;
            }
            let found = if settings.polish {
                search.polish()
            } else {
                (search.best, search.scalars(search.best_at.0, search.best_at.1))
            };
            if best.is_none_or(|b| found.0 < b.0) {
                best = Some(found);
            }
        }
    }
    let (value, scalars) = best.ok_or(Error::Infeasible)?;
    let inner = (0..field.cells())
        .map(|j| lb_inner_minimize(&field.point(j), &scalars, params, settings))
        .collect();
    Ok(LowerBoundResult {
        value,
        scalars,
        inner,
        symmetric_demand: field.is_directionally_symmetric(),
        evaluations,
    })
}

/// Lower bound by branch-and-bound over the headway grid. Returns the same
/// minimum as [`lb_solve_exhaustive`].
pub fn lb_solve(field: &DemandField, params: &ParamSet, settings: &BoundSettings) -> Result<LowerBoundResult> {
    solve(field, params, settings, false)
}

/// Lower bound by evaluating every headway grid point.
pub fn lb_solve_exhaustive(field: &DemandField, params: &ParamSet, settings: &BoundSettings) -> Result<LowerBoundResult> {
    solve(field, params, settings, true)
}

/// Backtracking cost terms the relaxation drops, evaluated for a design.
/// The bound is rigorous when this is non-negative.
pub fn dropped_backtracking_cost(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> f64 {
    let dx = field.corridor().step();
    let (m_cw, m_ccw) = (scalars.lines_cw as f64, scalars.lines_ccw as f64);
    let imbalance = (m_ccw * scalars.headway_ccw - m_cw * scalars.headway_cw) / 2.0;
    let mut total = 0.0;
    for j in 0..field.cells() {
        let (s, t) = (profiles.spacing[j], profiles.bay[j] as f64);
        let ride = s * t / (3.0 * params.cruise_speed)
            + params.dwell / 6.0 * ((t - 1.0) / m_cw + (t - 1.0) / m_ccw + 2.0);
        total += (imbalance * (b_cw[j] - b_ccw[j]) + ride * (b_cw[j] + b_ccw[j])) * dx;
    }
    params.backtrack_weight * total
}

/// Relative gap of a heuristic cost above the bound.
pub fn optimality_gap(heuristic_gc: f64, bound: f64) -> f64 {
    (heuristic_gc - bound) / bound
}
