//! Case grids run on a bounded worker pool.

use rayon::prelude::*;

use crate::case::{run_case, CaseResult, CaseStatus, RunOptions};
use crate::config::ScenarioConfig;
use crate::error::ExperimentError;

/// Runs every case; failures stay attached to their case. Output order
/// follows input order whatever the worker count.
pub fn run_sweep(
    cases: &[ScenarioConfig],
    options: &RunOptions,
    workers: usize,
) -> Vec<Result<CaseResult, ExperimentError>> {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build();
    let run = || cases.par_iter().map(|c| run_case(c, options)).collect::<Vec<_>>();
    match pool {
        Ok(pool) => pool.install(run),
        Err(e) => {
            log::warn!("worker pool unavailable ({e}); running serially");
            cases.iter().map(|c| run_case(c, options)).collect()
        }
    }
}

/// Mean and maximum of a set of values.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Spread {
    pub count: usize,
    pub mean: f64,
    pub max: f64,
}

impl Spread {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let mut count = 0;
        let mut sum = 0.0;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            count += 1;
            sum += v;
            max = max.max(v);
        }
        if count == 0 {
            return Self::default();
        }
        Self { count, mean: sum / count as f64, max }
    }
}

pub const ERROR_ITEMS: [&str; 11] = ["GC", "user", "agency", "UT_a", "UT_w", "UT_v", "UT_t", "AC_K", "AC_H", "AC_I", "AC_S"];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSummary {
    pub cases: usize,
    pub failed: usize,
    pub infeasible: usize,
    /// Cases where only all-stop service is feasible.
    pub skip_stop_infeasible: usize,
    pub not_converged: usize,
    pub capacity_exceeded: usize,
    pub gap: Spread,
    /// Per error item, over cases with an exact evaluation.
    pub errors: Vec<(&'static str, Spread)>,
    pub savings: Spread,
}

impl SweepSummary {
    pub fn from_results(results: &[Result<CaseResult, ExperimentError>]) -> Self {
        let ok: Vec<&CaseResult> = results.iter().filter_map(|r| r.as_ref().ok()).collect();
        Self {
            cases: results.len(),
            failed: results.len() - ok.len(),
            infeasible: ok.iter().filter(|c| c.status == CaseStatus::Infeasible).count(),
            skip_stop_infeasible: ok.iter().filter(|c| c.status == CaseStatus::Ok && !c.skip_stop_feasible()).count(),
            not_converged: ok.iter().filter(|c| c.design().is_some_and(|d| !d.converged)).count(),
            capacity_exceeded: ok.iter().filter(|c| c.exact.as_ref().is_some_and(|e| e.capacity_exceeded)).count(),
            gap: Spread::of(ok.iter().filter_map(|c| c.gap())),
            errors: ERROR_ITEMS.iter().map(|&item| (item, Spread::of(ok.iter().filter_map(|c| c.error(item))))).collect(),
            savings: Spread::of(ok.iter().filter_map(|c| c.savings())),
        }
    }
}
