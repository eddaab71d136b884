//! One case end to end: demand, heuristic, bound, stop plan, exact check.

use std::time::{Duration, Instant};

use skipstop_core::bound::{lb_solve, optimality_gap, LowerBoundResult};
use skipstop_core::demand::{build_demand_field, DemandField};
use skipstop_core::exact::{error_report, exact_costs, ErrorRow, ExactEvaluation};
use skipstop_core::heuristic::{enumerate_lines, DesignSearch, LineCell, Solution};
use skipstop_core::plan::{generate_plan, ProfileFit, StopPlan};
use skipstop_core::Error;

use crate::config::ScenarioConfig;
use crate::error::ExperimentError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    pub bound: bool,
    pub verify: bool,
    /// Keep per stop-pair accounts from the exact evaluation.
    pub keep_accounts: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { bound: true, verify: true, keep_accounts: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseStatus {
    Ok,
    Infeasible,
}

impl CaseStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseStatus::Ok => "ok",
            CaseStatus::Infeasible => "infeasible",
        }
    }
}

/// Why a design is infeasible.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Binding {
    /// Flow exceeds what the headways can carry somewhere.
    Capacity,
    /// Carrying the flow needs headways below the floor.
    HeadwayFloor,
    /// The solver failed for another reason.
    Solver,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::Capacity => "capacity",
            Binding::HeadwayFloor => "headway_floor",
            Binding::Solver => "solver",
        }
    }

    fn of(cell: &LineCell) -> Option<Self> {
        match &cell.result {
            Ok(sol) if sol.feasible => None,
            Ok(_) | Err(Error::CapacityInfeasible { .. }) => Some(Binding::Capacity),
            Err(Error::HeadwayRangeEmpty { .. }) => Some(Binding::HeadwayFloor),
            Err(_) => Some(Binding::Solver),
        }
    }
}

/// Wall-clock split of a case.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Timing {
    pub preprocess: Duration,
    pub solve: Duration,
    pub bound: Duration,
    pub verify: Duration,
}

pub struct CaseResult {
    pub id: String,
    pub config: ScenarioConfig,
    pub field: DemandField,
    pub status: CaseStatus,
    /// Constraint that rules out the all-stop design, or failing that every
    /// design with more than one line.
    pub binding: Option<Binding>,
    /// Every line-count cell.
    pub cells: Vec<LineCell>,
    pub search: Option<DesignSearch>,
    pub bound: Option<LowerBoundResult>,
    pub plan: Option<(StopPlan, ProfileFit)>,
    pub exact: Option<ExactEvaluation>,
    pub errors: Vec<ErrorRow>,
    pub timing: Timing,
}

impl CaseResult {
    /// Cheapest design over all line counts.
    pub fn design(&self) -> Option<&Solution> {
        self.search.as_ref().map(|s| s.best())
    }

    pub fn all_stop(&self) -> Option<&Solution> {
        self.search.as_ref().and_then(|s| s.all_stop()).filter(|s| s.feasible)
    }

    /// Some design with more than one line in a direction is feasible.
    pub fn skip_stop_feasible(&self) -> bool {
        self.cells
            .iter()
            .any(|c| (c.lines_cw, c.lines_ccw) != (1, 1) && c.result.as_ref().is_ok_and(|s| s.feasible))
    }

    /// Cost saved by the best design relative to all-stop service.
    pub fn savings(&self) -> Option<f64> {
        let all = self.all_stop()?.cost.gc;
        Some((all - self.design()?.cost.gc) / all)
    }

    pub fn gap(&self) -> Option<f64> {
        Some(optimality_gap(self.design()?.cost.gc, self.bound.as_ref()?.value))
    }

    /// Relative error of an exact-versus-approximate row, by item name.
    pub fn error(&self, item: &str) -> Option<f64> {
        self.errors.iter().find(|r| r.item == item).map(|r| r.error)
    }
}

pub fn run_case(config: &ScenarioConfig, options: &RunOptions) -> Result<CaseResult, ExperimentError> {
    config.validate()?;
    let id = config.id();
    let params = config.params()?;
    let corridor = config.corridor()?;
    let mut timing = Timing::default();

    let clock = Instant::now();
    let field = build_demand_field(&config.demand(), &corridor)?;
    timing.preprocess = clock.elapsed();

    let clock = Instant::now();
    let cells = enumerate_lines(&field, &params, &config.solver.heuristic())?;
    let search = DesignSearch::from_cells(cells.clone()).ok();
    timing.solve = clock.elapsed();

    let all_stop_binding = cells.iter().find(|c| (c.lines_cw, c.lines_ccw) == (1, 1)).and_then(Binding::of);
    let skip_binding = cells.iter().filter(|c| (c.lines_cw, c.lines_ccw) != (1, 1)).map(Binding::of).collect::<Vec<_>>();
    let binding = all_stop_binding.or_else(|| {
        if skip_binding.iter().all(Option::is_some) {
            skip_binding.iter().flatten().copied().min_by_key(|b| *b as u8)
        } else {
            None
        }
    });

    let mut result = CaseResult {
        id,
        config: config.clone(),
        field,
        status: if search.is_some() { CaseStatus::Ok } else { CaseStatus::Infeasible },
        binding,
        cells,
        search,
        bound: None,
        plan: None,
        exact: None,
        errors: Vec::new(),
        timing,
    };
    let Some(design) = result.design().cloned() else {
        log::warn!("{}: no feasible design ({})", result.id, binding.map_or("unknown", Binding::as_str));
        return Ok(result);
    };

    if options.bound {
        let clock = Instant::now();
        match lb_solve(&result.field, &params, &config.solver.bound()) {
            Ok(lb) => result.bound = Some(lb),
            Err(e) => log::warn!("{}: no lower bound: {e}", result.id),
        }
        result.timing.bound = clock.elapsed();
    }

    let clock = Instant::now();
    let s = &design.scalars;
    let (plan, fit) = generate_plan(&design.profiles.spacing, &design.profiles.bay, s.lines_cw, s.lines_ccw, &corridor)?;
    if options.verify {
        let exact = exact_costs(&result.field, &plan, s, &params, config.solver.route(), options.keep_accounts)?;
        if exact.capacity_exceeded {
            log::warn!("{}: stop plan overloads a segment (peak ratio {:?})", result.id, exact.peak_load_ratio);
        }
        result.errors = error_report(&exact.cost, &design.cost);
        result.exact = Some(exact);
    }
    result.plan = Some((plan, fit));
    result.timing.verify = clock.elapsed();
    log::info!(
        "{}: preprocess {:?}, solve {:?}, bound {:?}, verify {:?}",
        result.id,
        result.timing.preprocess,
        result.timing.solve,
        result.timing.bound,
        result.timing.verify
    );
    Ok(result)
}
