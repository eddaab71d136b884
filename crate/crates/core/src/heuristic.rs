//! Two-stage design heuristic.
//!
//! Stage 1 fixes line counts and headways and picks stop spacing and bay size
//! point by point. The backtracking densities depend on the local design, so
//! each point runs a successive-averages fixed point on them. Stage 2 updates
//! the headways from their first-order conditions and alternates with stage 1
//! until the headways settle, for every pair of line counts.

use alloc::vec;
use alloc::vec::Vec;

use crate::cost::{
    capacity_headway_ceiling, generalized_cost, pace, pointwise_integrand, CostBreakdown, DesignProfiles,
    DesignScalars, MAX_BAY, MAX_LINES,
};
use crate::demand::{backtrack_at, backtrack_densities, DemandField, PointDemand};
use crate::math::sqrt;
use crate::params::ParamSet;
use crate::{Direction, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    /// Weight of the newest estimate in the successive-averages update.
    pub smoothing: f64,
    /// Convergence tolerance on backtracking densities (trips/km²/h).
    pub backtrack_tol: f64,
    /// Convergence tolerance on headways (h).
    pub headway_tol: f64,
    pub max_bay: u32,
    pub max_lines: u32,
    /// Safety cap for every loop.
    pub max_iterations: usize,
    /// Spacing used where nothing limits it (km).
    pub spacing_cap: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            smoothing: 0.5,
            backtrack_tol: 1e-4,
            headway_tol: 1e-4,
            max_bay: MAX_BAY,
            max_lines: MAX_LINES,
            max_iterations: 200,
            spacing_cap: 5.0,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.smoothing > 0.0
            && self.smoothing < 1.0
            && self.backtrack_tol > 0.0
            && self.headway_tol > 0.0
            && (1..=MAX_BAY).contains(&self.max_bay)
            && (1..=MAX_LINES).contains(&self.max_lines)
            && self.max_iterations > 0
            && self.spacing_cap > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(alloc::format!("invalid solver settings {self:?}")))
        }
    }
}

/// Unclamped spacing minimizing the pointwise cost for a fixed bay size, or
/// `None` when nothing penalizes wide spacing (no trip ends, no
/// backtracking).
pub fn spacing_candidate(
    scalars: &DesignScalars,
    bay: f64,
    pd: &PointDemand,
    b_cw: f64,
    b_ccw: f64,
    params: &ParamSet,
) -> Option<f64> {
    let dwell_weight = |dir: Direction| {
        let m = scalars.lines(dir) as f64;
        (1.0 / m + (m - 1.0) / (m * bay))
            * (pd.flow(dir) + params.vehicle_hour_cost / (params.value_of_time * scalars.headway(dir)))
            * params.dwell
    };
    let inverse = dwell_weight(Direction::Cw)
        + dwell_weight(Direction::Ccw)
        + params.stop_cost / params.value_of_time;
    let linear = pd.total_ends() / (4.0 * params.walk_speed)
        + params.backtrack_weight * bay * (b_cw + b_ccw) / (3.0 * params.cruise_speed);
    if linear > 0.0 {
        Some(sqrt(inverse / linear))
    } else {
        None
    }
}

/// Caps a spacing candidate by vehicle capacity: backtracking patrons inside
/// a bay add to the on-board load. Fails when the through flow alone does not
/// fit at these headways.
pub fn clamp_spacing(
    candidate: f64,
    point: usize,
    scalars: &DesignScalars,
    bay: f64,
    pd: &PointDemand,
    b_cw: f64,
    b_ccw: f64,
    params: &ParamSet,
) -> Result<f64> {
    let slack = [Direction::Cw, Direction::Ccw]
        .map(|dir| 2.0 * params.capacity / scalars.headway(dir) - 2.0 * pd.flow(dir))
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    let backtrack = b_cw + b_ccw;
    if slack < 0.0 || (backtrack > 0.0 && slack <= 0.0) {
        return Err(Error::CapacityInfeasible { point });
    }
    if backtrack > 0.0 {
        Ok(candidate.min(slack / (backtrack * bay)))
    } else {
        Ok(candidate)
    }
}

/// Stage-1 outcome at one grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointDesign {
    pub spacing: f64,
    pub bay: u32,
    pub b_cw: f64,
    pub b_ccw: f64,
    pub iterations: usize,
    /// Last change in the backtracking densities.
    pub residual: f64,
    pub converged: bool,
}

/// Best `(spacing, bay, cost density)` for fixed backtracking densities,
/// with bay sizes drawn from `bays`.
fn best_bay(
    field: &DemandField,
    j: usize,
    scalars: &DesignScalars,
    b_cw: f64,
    b_ccw: f64,
    params: &ParamSet,
    settings: &SolverSettings,
    bays: core::ops::RangeInclusive<u32>,
) -> Result<(f64, u32, f64)> {
    let pd = field.point(j);
    let half_loop = field.corridor().length() / 2.0;
    let mut best: Option<(f64, u32, f64)> = None;
    for t in bays {
        let bay = t as f64;
        let candidate = spacing_candidate(scalars, bay, &pd, b_cw, b_ccw, params).unwrap_or(settings.spacing_cap);
        let Ok(s) = clamp_spacing(candidate, j, scalars, bay, &pd, b_cw, b_ccw, params) else {
            continue;
        };
        if t > 1 && bay * s > half_loop {
            continue;
        }
        let g = pointwise_integrand(scalars, s, bay, &pd, b_cw, b_ccw, params);
        match best {
            Some((_, _, g_best)) if g >= g_best - 1e-12 * g_best.abs() => {}
            _ => best = Some((s, t, g)),
        }
    }
    best.ok_or(Error::CapacityInfeasible { point: j })
}

/// Iterations without a settled bay size after which the bay choice counts
/// as cycling.
const CYCLE_WINDOW: usize = 10;

/// Successive averages on the backtracking densities with bay sizes from
/// `bays`, starting at `start`. Stops early when the chosen bay size keeps
/// changing; the returned flag reports that.
fn averaging_loop(
    field: &DemandField,
    j: usize,
    scalars: &DesignScalars,
    params: &ParamSet,
    settings: &SolverSettings,
    bays: core::ops::RangeInclusive<u32>,
    start: (f64, f64),
    history: &mut Vec<u32>,
) -> Result<(PointDesign, bool)> {
    let (m_cw, m_ccw) = (scalars.lines_cw, scalars.lines_ccw);
    let alpha = settings.smoothing;
    let (mut b_cw, mut b_ccw) = start;
    let mut best: Option<PointDesign> = None;
    history.clear();
    for iteration in 1..=settings.max_iterations {
        let (s, t, _) = best_bay(field, j, scalars, b_cw, b_ccw, params, settings, bays.clone())?;
        history.push(t);
        let (hat_cw, hat_ccw) = backtrack_at(field, j, s, t as f64, m_cw, m_ccw)?;
        let residual = (b_cw - hat_cw).abs() + (b_ccw - hat_ccw).abs();
        b_cw = (1.0 - alpha) * b_cw + alpha * hat_cw;
        b_ccw = (1.0 - alpha) * b_ccw + alpha * hat_ccw;
        let design = PointDesign {
            spacing: s,
            bay: t,
            b_cw,
            b_ccw,
            iterations: iteration,
            residual,
            converged: residual <= settings.backtrack_tol,
        };
        if design.converged {
            return Ok((design, false));
        }
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(design);
        }
        let recent = &history[history.len().saturating_sub(CYCLE_WINDOW)..];
        if iteration >= 2 * CYCLE_WINDOW && recent.iter().any(|&r| r != t) {
            return Ok((best.expect("at least one iteration"), true));
        }
    }
    Ok((best.expect("at least one iteration"), false))
}

/// Successive-averages fixed point on the backtracking densities at grid
/// point `j`.
///
/// The bay size is discrete, so the averaging can cycle between neighboring
/// bay sizes without settling. The point is then resolved by running the
/// fixed point with the bay size held at each value of the cycle and keeping
/// the cheapest self-consistent result.
pub fn stage1_point(
    field: &DemandField,
    j: usize,
    scalars: &DesignScalars,
    params: &ParamSet,
    settings: &SolverSettings,
) -> Result<PointDesign> {
    let mut history = Vec::new();
    let (design, cycling) =
        averaging_loop(field, j, scalars, params, settings, 1..=settings.max_bay, (0.0, 0.0), &mut history)?;
    let design = if cycling {
        let mut cycle: Vec<u32> = history[history.len() - CYCLE_WINDOW..].to_vec();
        cycle.sort_unstable();
        cycle.dedup();
        let pd = field.point(j);
        let mut best: Option<(PointDesign, f64)> = None;
        let mut scratch = Vec::new();
        for t in cycle {
            let (mut d, _) =
                averaging_loop(field, j, scalars, params, settings, t..=t, (design.b_cw, design.b_ccw), &mut scratch)?;
            d.iterations += design.iterations;
            let g = pointwise_integrand(scalars, d.spacing, t as f64, &pd, d.b_cw, d.b_ccw, params);
            if best.is_none_or(|(_, g_best)| g < g_best - 1e-12 * g_best.abs()) {
                best = Some((d, g));
            }
        }
        best.expect("cycle is non-empty").0
    } else {
        design
    };
    if !design.converged {
        log::warn!(
            "grid point {j}: backtracking densities did not settle within {} iterations (residual {})",
            settings.max_iterations,
            design.residual
        );
    }
    Ok(design)
}

/// Stage-1 profiles for the whole corridor.
#[derive(Clone, Debug, PartialEq)]
pub struct Stage1Result {
    pub profiles: DesignProfiles,
    pub b_cw: Vec<f64>,
    pub b_ccw: Vec<f64>,
    pub max_residual: f64,
    pub max_iterations: usize,
    pub converged: bool,
}

pub fn stage1(
    field: &DemandField,
    scalars: &DesignScalars,
    params: &ParamSet,
    settings: &SolverSettings,
) -> Result<Stage1Result> {
    let n = field.cells();
    let mut out = Stage1Result {
        profiles: DesignProfiles { spacing: vec![0.0; n], bay: vec![1; n] },
        b_cw: vec![0.0; n],
        b_ccw: vec![0.0; n],
        max_residual: 0.0,
        max_iterations: 0,
        converged: true,
    };
    for j in 0..n {
        let d = stage1_point(field, j, scalars, params, settings)?;
        out.profiles.spacing[j] = d.spacing;
        out.profiles.bay[j] = d.bay;
        out.b_cw[j] = d.b_cw;
        out.b_ccw[j] = d.b_ccw;
        out.max_residual = out.max_residual.max(d.residual);
        out.max_iterations = out.max_iterations.max(d.iterations);
        out.converged &= d.converged;
    }
    Ok(out)
}

/// Unclamped headway in direction `dir` from its first-order condition.
pub fn headway_candidate(
    field: &DemandField,
    dir: Direction,
    lines: u32,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> Result<f64> {
    let corridor = field.corridor();
    let dx = corridor.step();
    let m = lines as f64;
    let (own, other) = match dir {
        Direction::Cw => (b_cw, b_ccw),
        Direction::Ccw => (b_ccw, b_cw),
    };
    let mut fleet_time = 0.0;
    let mut demand = (2.0 * m - 1.0) / 2.0 * field.total(dir);
    for j in 0..field.cells() {
        let (s, t) = (profiles.spacing[j], profiles.bay[j] as f64);
        fleet_time += pace(s, t, lines, params) * dx;
        demand += (-(m - 1.0) / 2.0 * field.point(j).ends(dir) / t
            + params.backtrack_weight * m / 2.0 * (other[j] - own[j]))
            * dx;
    }
    let numerator = params.vehicle_km_cost * corridor.length() / params.value_of_time
        + params.vehicle_hour_cost / params.value_of_time * fleet_time;
    if demand <= 0.0 {
        return Err(Error::DegenerateHeadway);
    }
    Ok(sqrt(numerator / demand))
}

/// Middle value of `floor`, `candidate` and `ceiling`.
pub fn clamp_headway(candidate: f64, floor: f64, ceiling: f64) -> Result<f64> {
    if floor > ceiling {
        return Err(Error::HeadwayRangeEmpty { floor_h: floor, ceiling_h: ceiling });
    }
    Ok(candidate.max(floor).min(ceiling))
}

/// One outer iteration of the stage alternation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub headway_cw: f64,
    pub headway_ccw: f64,
    pub headway_residual: f64,
    pub backtrack_residual: f64,
    pub gc: f64,
}

/// Design for one pair of line counts.
#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    pub scalars: DesignScalars,
    pub profiles: DesignProfiles,
    pub b_cw: Vec<f64>,
    pub b_ccw: Vec<f64>,
    pub cost: CostBreakdown,
    pub trace: Vec<TraceRow>,
    /// Both the headway and the backtracking loops met their tolerances.
    pub converged: bool,
    /// Headway floors and capacity hold at the reported design.
    pub feasible: bool,
}

fn ceiling_without_backtracking(field: &DemandField, dir: Direction, params: &ParamSet) -> f64 {
    let peak = field.max_flow(dir);
    if peak > 0.0 {
        params.capacity / peak
    } else {
        f64::INFINITY
    }
}

fn initial_headway(floor: f64, ceiling: f64) -> f64 {
    if ceiling.is_finite() {
        (floor + ceiling) / 2.0
    } else {
        2.0 * floor
    }
}

/// Alternates stage 1 with headway updates for fixed line counts.
pub fn solve_lines(
    field: &DemandField,
    params: &ParamSet,
    settings: &SolverSettings,
    lines_cw: u32,
    lines_ccw: u32,
) -> Result<Solution> {
    params.validate()?;
    settings.validate()?;
    let floor = |m: u32| params.headway_floor(m);
    let mut headways = [(Direction::Cw, lines_cw), (Direction::Ccw, lines_ccw)].map(|(dir, m)| {
        let ceiling = ceiling_without_backtracking(field, dir, params);
        clamp_headway(initial_headway(floor(m), ceiling), floor(m), ceiling)
    });
    let mut scalars = DesignScalars {
        lines_cw,
        lines_ccw,
        headway_cw: headways[0].clone()?,
        headway_ccw: headways[1].clone()?,
    };
    scalars.check_shape()?;

    let mut trace = Vec::new();
    let mut converged = false;
    let mut stage = stage1(field, &scalars, params, settings)?;
    for iteration in 1..=settings.max_iterations {
        headways = [(Direction::Cw, lines_cw), (Direction::Ccw, lines_ccw)].map(|(dir, m)| {
            let candidate = headway_candidate(field, dir, m, &stage.profiles, &stage.b_cw, &stage.b_ccw, params)?;
            let ceiling = capacity_headway_ceiling(field, dir, &stage.profiles, &stage.b_cw, &stage.b_ccw, params);
            clamp_headway(candidate, floor(m), ceiling)
        });
        let (h_cw, h_ccw) = (headways[0].clone()?, headways[1].clone()?);
        let residual = (h_cw - scalars.headway_cw).abs() + (h_ccw - scalars.headway_ccw).abs();
        scalars.headway_cw = h_cw;
        scalars.headway_ccw = h_ccw;
        let gc = generalized_cost(field, &scalars, &stage.profiles, params)?.gc;
        trace.push(TraceRow {
            iteration,
            headway_cw: h_cw,
            headway_ccw: h_ccw,
            headway_residual: residual,
            backtrack_residual: stage.max_residual,
            gc,
        });
        if residual <= settings.headway_tol {
            converged = stage.converged;
            break;
        }
        stage = stage1(field, &scalars, params, settings)?;
    }
    if !converged {
        log::warn!("line counts ({lines_cw}, {lines_ccw}): design loop did not converge");
    }

    let profiles = stage.profiles;
    let (b_cw, b_ccw) = backtrack_densities(field, &profiles.spacing, &profiles.bay, lines_cw, lines_ccw)?;
    let cost = generalized_cost(field, &scalars, &profiles, params)?;
    let feasible = scalars.validate(params).is_ok()
        && [Direction::Cw, Direction::Ccw].into_iter().all(|dir| {
            let ceiling = capacity_headway_ceiling(field, dir, &profiles, &b_cw, &b_ccw, params);
            scalars.headway(dir) <= ceiling * (1.0 + 1e-6)
        });
    Ok(Solution { scalars, profiles, b_cw, b_ccw, cost, trace, converged, feasible })
}

/// Outcome for one pair of line counts.
#[derive(Clone, Debug, PartialEq)]
pub struct LineCell {
    pub lines_cw: u32,
    pub lines_ccw: u32,
    pub result: Result<Solution>,
}

/// Every line-count pair plus the cheapest feasible one.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignSearch {
    pub cells: Vec<LineCell>,
    best: usize,
}

impl DesignSearch {
    pub fn best(&self) -> &Solution {
        self.cells[self.best].result.as_ref().expect("best cell is solved")
    }

    pub fn cell(&self, lines_cw: u32, lines_ccw: u32) -> Option<&LineCell> {
        self.cells.iter().find(|c| c.lines_cw == lines_cw && c.lines_ccw == lines_ccw)
    }

    /// Conventional service: one line each way, every stop served.
    pub fn all_stop(&self) -> Option<&Solution> {
        self.cell(1, 1).and_then(|c| c.result.as_ref().ok())
    }
}

/// Solves every pair of line counts up to the settings' limit.
pub fn enumerate_lines(field: &DemandField, params: &ParamSet, settings: &SolverSettings) -> Result<Vec<LineCell>> {
    params.validate()?;
    settings.validate()?;
    let mut cells = Vec::new();
    for lines_cw in 1..=settings.max_lines {
        for lines_ccw in 1..=settings.max_lines {
            let result = solve_lines(field, params, settings, lines_cw, lines_ccw);
            cells.push(LineCell { lines_cw, lines_ccw, result });
        }
    }
    Ok(cells)
}

impl DesignSearch {
    /// Picks the cheapest feasible cell. Near ties (relative 1e-9) keep the
    /// earlier cell, i.e. fewer lines.
    pub fn from_cells(cells: Vec<LineCell>) -> Result<Self> {
        let mut best: Option<(usize, f64)> = None;
        for (k, cell) in cells.iter().enumerate() {
            if let Ok(sol) = &cell.result {
                if sol.feasible && best.is_none_or(|(_, gc)| sol.cost.gc < gc - 1e-9 * gc.abs()) {
                    best = Some((k, sol.cost.gc));
                }
            }
        }
        match best {
            Some((best, _)) => Ok(Self { cells, best }),
            None => Err(Error::Infeasible),
        }
    }
}

/// Full heuristic: enumerates line counts and keeps the cheapest feasible
/// design.
pub fn stage2_solve(field: &DemandField, params: &ParamSet, settings: &SolverSettings) -> Result<DesignSearch> {
    DesignSearch::from_cells(enumerate_lines(field, params, settings)?)
}
