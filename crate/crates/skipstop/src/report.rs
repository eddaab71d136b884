//! CSV outputs. Column order is fixed by the row structs below and
//! documented in the README.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use skipstop_core::Direction;

use crate::case::CaseResult;
use crate::error::ExperimentError;
use crate::sweep::SweepSummary;

fn to_min(h: f64) -> f64 {
    h * 60.0
}

fn spread_label(x: Option<f64>) -> String {
    x.map_or_else(|| "inf".into(), |v| format!("{v}"))
}

/// One row of `cases.csv`.
#[derive(Serialize)]
pub struct CaseRow {
    pub id: String,
    pub mode: String,
    pub density: f64,
    pub origin_std: String,
    pub trip_mean: f64,
    pub trip_std: f64,
    pub value_of_time: f64,
    pub transfer_penalty_min: f64,
    pub walk_speed: f64,
    pub backtrack_weight: f64,
    pub status: &'static str,
    pub binding: Option<&'static str>,
    pub skip_stop_feasible: bool,
    pub lines_cw: Option<u32>,
    pub lines_ccw: Option<u32>,
    pub headway_cw_min: Option<f64>,
    pub headway_ccw_min: Option<f64>,
    pub converged: Option<bool>,
    pub gc: Option<f64>,
    pub user_cost: Option<f64>,
    pub agency_cost: Option<f64>,
    pub ut_a: Option<f64>,
    pub ut_w: Option<f64>,
    pub ut_v: Option<f64>,
    pub ut_t: Option<f64>,
    pub ac_k: Option<f64>,
    pub ac_h: Option<f64>,
    pub ac_i: Option<f64>,
    pub ac_s: Option<f64>,
    pub all_stop_gc: Option<f64>,
    pub all_stop_headway_cw_min: Option<f64>,
    pub all_stop_headway_ccw_min: Option<f64>,
    pub savings_pct: Option<f64>,
    pub lower_bound: Option<f64>,
    pub bound_lines_cw: Option<u32>,
    pub bound_lines_ccw: Option<u32>,
    pub gap_pct: Option<f64>,
    pub symmetric_demand: Option<bool>,
    pub stops: Option<usize>,
    pub transfer_stops: Option<usize>,
    pub exact_gc: Option<f64>,
    pub gc_error_pct: Option<f64>,
    pub ut_t_error_pct: Option<f64>,
    pub capacity_exceeded: Option<bool>,
}

impl CaseRow {
    pub fn new(c: &CaseResult) -> Self {
        let p = c.config.params().ok();
        let d = c.design();
        let all = c.all_stop();
        let cost = d.map(|d| d.cost);
        Self {
            id: c.id.clone(),
            mode: c.config.mode.to_string(),
            density: c.config.density,
            origin_std: spread_label(c.config.origin_spread()),
            trip_mean: c.config.trip_mean,
            trip_std: c.config.trip_std,
            value_of_time: c.config.value_of_time,
            transfer_penalty_min: p.map_or(f64::NAN, |p| to_min(p.transfer_penalty)),
            walk_speed: p.map_or(f64::NAN, |p| p.walk_speed),
            backtrack_weight: p.map_or(f64::NAN, |p| p.backtrack_weight),
            status: c.status.as_str(),
            binding: c.binding.map(|b| b.as_str()),
            skip_stop_feasible: c.skip_stop_feasible(),
            lines_cw: d.map(|d| d.scalars.lines_cw),
            lines_ccw: d.map(|d| d.scalars.lines_ccw),
            headway_cw_min: d.map(|d| to_min(d.scalars.headway_cw)),
            headway_ccw_min: d.map(|d| to_min(d.scalars.headway_ccw)),
            converged: d.map(|d| d.converged),
            gc: cost.map(|c| c.gc),
            user_cost: cost.map(|c| c.user()),
            agency_cost: cost.map(|c| c.agency()),
            ut_a: cost.map(|c| c.access),
            ut_w: cost.map(|c| c.wait),
            ut_v: cost.map(|c| c.in_vehicle),
            ut_t: cost.map(|c| c.transfer),
            ac_k: cost.map(|c| c.vehicle_km),
            ac_h: cost.map(|c| c.vehicle_hour),
            ac_i: cost.map(|c| c.infrastructure),
            ac_s: cost.map(|c| c.stops),
            all_stop_gc: all.map(|a| a.cost.gc),
            all_stop_headway_cw_min: all.map(|a| to_min(a.scalars.headway_cw)),
            all_stop_headway_ccw_min: all.map(|a| to_min(a.scalars.headway_ccw)),
            savings_pct: c.savings().map(|s| 100.0 * s),
            lower_bound: c.bound.as_ref().map(|b| b.value),
            bound_lines_cw: c.bound.as_ref().map(|b| b.scalars.lines_cw),
            bound_lines_ccw: c.bound.as_ref().map(|b| b.scalars.lines_ccw),
            gap_pct: c.gap().map(|g| 100.0 * g),
            symmetric_demand: c.bound.as_ref().map(|b| b.symmetric_demand),
            stops: c.plan.as_ref().map(|(p, _)| p.len()),
            transfer_stops: c.plan.as_ref().map(|(p, _)| p.transfers.len()),
            exact_gc: c.exact.as_ref().map(|e| e.cost.gc),
            gc_error_pct: c.error("GC").map(|e| 100.0 * e),
            ut_t_error_pct: c.error("UT_t").map(|e| 100.0 * e),
            capacity_exceeded: c.exact.as_ref().map(|e| e.capacity_exceeded),
        }
    }
}

#[derive(Serialize)]
struct SavingsRow<'a> {
    mode: &'a str,
    value_of_time: f64,
    origin_std: &'a str,
    trip_mean: f64,
    trip_std: f64,
    density: f64,
    transfer_penalty_min: f64,
    walk_speed: f64,
    backtrack_weight: f64,
    skip_stop_feasible: bool,
    savings_pct: Option<f64>,
}

#[derive(Serialize)]
struct ProfileRow {
    x: f64,
    spacing: f64,
    bay: u32,
    b_cw: f64,
    b_ccw: f64,
    fitted_spacing: f64,
    fitted_bay: f64,
    realized_spacing: f64,
    realized_bay: u32,
    origins_cw: f64,
    destinations_cw: f64,
    flow_cw: f64,
    origins_ccw: f64,
    destinations_ccw: f64,
    flow_ccw: f64,
}

#[derive(Serialize)]
struct ErrorCsvRow<'a> {
    item: &'a str,
    approximate: f64,
    exact: f64,
    error_pct: f64,
    absolute: bool,
}

#[derive(Serialize)]
struct TraceCsvRow {
    iteration: usize,
    headway_cw_min: f64,
    headway_ccw_min: f64,
    headway_residual_min: f64,
    backtrack_residual: f64,
    gc: f64,
}

#[derive(Serialize)]
struct PlanRow {
    index: usize,
    position: f64,
    transfer: bool,
    line_cw: Option<u8>,
    line_ccw: Option<u8>,
}

#[derive(Serialize)]
struct CellRow {
    lines_cw: u32,
    lines_ccw: u32,
    outcome: String,
    feasible: bool,
    converged: Option<bool>,
    headway_cw_min: Option<f64>,
    headway_ccw_min: Option<f64>,
    gc: Option<f64>,
}

#[derive(Serialize)]
struct OdRow {
    origin: usize,
    destination: usize,
    direction: &'static str,
    trip_type: u8,
    demand: f64,
    distance: f64,
    stops_visited: f64,
    transfer_at: Option<usize>,
    wait: f64,
    ride: f64,
    transfer: f64,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    metric: &'a str,
    value: f64,
}

fn dir_label(d: Direction) -> &'static str {
    match d {
        Direction::Cw => "cw",
        Direction::Ccw => "ccw",
    }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), ExperimentError> {
    let csv_err = |source| ExperimentError::Csv { path: path.into(), source };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush().map_err(|source| ExperimentError::Io { path: path.into(), source })
}

/// Which per-case files to write besides the sweep tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReportOptions {
    pub per_case: bool,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { per_case: true }
    }
}

/// Writes the sweep tables (`cases.csv`, `savings.csv`, `summary.csv`) and,
/// if asked, the per-case files. Returns the paths written.
pub fn emit_reports(
    out: &Path,
    results: &[Result<CaseResult, crate::error::ExperimentError>],
    options: &ReportOptions,
) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(out).map_err(|source| ExperimentError::Io { path: out.into(), source })?;
    let mut written = Vec::new();
    let ok: Vec<&CaseResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();

    let path = out.join("cases.csv");
    write_rows(&path, ok.iter().map(|c| CaseRow::new(c)))?;
    written.push(path);

    let rows: Vec<CaseRow> = ok.iter().map(|c| CaseRow::new(c)).collect();
    let path = out.join("savings.csv");
    write_rows(
        &path,
        rows.iter().map(|r| SavingsRow {
            mode: &r.mode,
            value_of_time: r.value_of_time,
            origin_std: &r.origin_std,
            trip_mean: r.trip_mean,
            trip_std: r.trip_std,
            density: r.density,
            transfer_penalty_min: r.transfer_penalty_min,
            walk_speed: r.walk_speed,
            backtrack_weight: r.backtrack_weight,
            skip_stop_feasible: r.skip_stop_feasible,
            savings_pct: r.savings_pct,
        }),
    )?;
    written.push(path);

    let path = out.join("summary.csv");
    write_rows(&path, summary_rows(&SweepSummary::from_results(results)).iter().map(|(m, v)| SummaryRow { metric: m, value: *v }))?;
    written.push(path);

    if options.per_case {
        for c in &ok {
            written.extend(emit_case_files(out, c)?);
        }
    }
    Ok(written)
}

fn summary_rows(s: &SweepSummary) -> Vec<(String, f64)> {
    let mut rows = vec![
        ("cases".to_string(), s.cases as f64),
        ("failed".into(), s.failed as f64),
        ("infeasible".into(), s.infeasible as f64),
        ("skip_stop_infeasible".into(), s.skip_stop_infeasible as f64),
        ("not_converged".into(), s.not_converged as f64),
        ("capacity_exceeded".into(), s.capacity_exceeded as f64),
        ("gap_cases".into(), s.gap.count as f64),
        ("gap_mean_pct".into(), 100.0 * s.gap.mean),
        ("gap_max_pct".into(), 100.0 * s.gap.max),
        ("savings_mean_pct".into(), 100.0 * s.savings.mean),
        ("savings_max_pct".into(), 100.0 * s.savings.max),
    ];
    for (item, spread) in &s.errors {
        rows.push((format!("error_{item}_mean_pct"), 100.0 * spread.mean));
        rows.push((format!("error_{item}_max_pct"), 100.0 * spread.max));
    }
    rows
}

/// Per-case files: profiles, cells, trace, errors, plan and, when kept,
/// stop-pair accounts.
pub fn emit_case_files(out: &Path, c: &CaseResult) -> Result<Vec<PathBuf>, ExperimentError> {
    let mut written = Vec::new();
    let id = &c.id;

    let path = out.join(format!("cells_{id}.csv"));
    write_rows(
        &path,
        c.cells.iter().map(|cell| {
            let sol = cell.result.as_ref().ok();
            CellRow {
                lines_cw: cell.lines_cw,
                lines_ccw: cell.lines_ccw,
                outcome: match &cell.result {
                    Ok(_) => "solved".into(),
                    Err(e) => e.to_string(),
                },
                feasible: sol.is_some_and(|s| s.feasible),
                converged: sol.map(|s| s.converged),
                headway_cw_min: sol.map(|s| to_min(s.scalars.headway_cw)),
                headway_ccw_min: sol.map(|s| to_min(s.scalars.headway_ccw)),
                gc: sol.map(|s| s.cost.gc),
            }
        }),
    )?;
    written.push(path);

    let Some(design) = c.design() else {
        return Ok(written);
    };

    let path = out.join(format!("trace_{id}.csv"));
    write_rows(
        &path,
        design.trace.iter().map(|t| TraceCsvRow {
            iteration: t.iteration,
            headway_cw_min: to_min(t.headway_cw),
            headway_ccw_min: to_min(t.headway_ccw),
            headway_residual_min: to_min(t.headway_residual),
            backtrack_residual: t.backtrack_residual,
            gc: t.gc,
        }),
    )?;
    written.push(path);

    if let Some((plan, fit)) = &c.plan {
        let corridor = c.field.corridor();
        let (realized_spacing, realized_bay) = plan.realized_profiles(corridor);
        let path = out.join(format!("profiles_{id}.csv"));
        write_rows(
            &path,
            (0..corridor.cells()).map(|j| {
                let x = corridor.point(j);
                let pd = c.field.point(j);
                ProfileRow {
                    x,
                    spacing: design.profiles.spacing[j],
                    bay: design.profiles.bay[j],
                    b_cw: design.b_cw[j],
                    b_ccw: design.b_ccw[j],
                    fitted_spacing: fit.spacing_at(x),
                    fitted_bay: fit.bay_at(x),
                    realized_spacing: realized_spacing[j],
                    realized_bay: realized_bay[j],
                    origins_cw: pd.p_cw,
                    destinations_cw: pd.q_cw,
                    flow_cw: pd.c_cw,
                    origins_ccw: pd.p_ccw,
                    destinations_ccw: pd.q_ccw,
                    flow_ccw: pd.c_ccw,
                }
            }),
        )?;
        written.push(path);

        let path = out.join(format!("plan_{id}.csv"));
        write_rows(
            &path,
            plan.stops.iter().enumerate().map(|(i, &x)| PlanRow {
                index: i,
                position: x,
                transfer: plan.is_transfer(i),
                line_cw: plan.line_cw[i],
                line_ccw: plan.line_ccw[i],
            }),
        )?;
        written.push(path);
    }

    if !c.errors.is_empty() {
        let path = out.join(format!("errors_{id}.csv"));
        write_rows(
            &path,
            c.errors.iter().map(|r| ErrorCsvRow {
                item: &r.item,
                approximate: r.approximate,
                exact: r.exact,
                error_pct: if r.absolute { r.error } else { 100.0 * r.error },
                absolute: r.absolute,
            }),
        )?;
        written.push(path);
    }

    if let Some(exact) = c.exact.as_ref().filter(|e| !e.accounts.is_empty()) {
        let path = out.join(format!("od_{id}.csv"));
        write_rows(
            &path,
            exact.accounts.iter().map(|a| OdRow {
                origin: a.origin,
                destination: a.destination,
                direction: dir_label(a.route.direction),
                trip_type: a.route.kind as u8,
                demand: a.demand,
                distance: a.route.distance,
                stops_visited: a.route.stops_visited,
                transfer_at: a.route.transfer_at,
                wait: a.wait,
                ride: a.ride,
                transfer: a.transfer,
            }),
        )?;
        written.push(path);
    }
    Ok(written)
}
