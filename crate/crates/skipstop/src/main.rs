use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use skipstop::case::{run_case, RunOptions};
use skipstop::config::{Preset, RouteRule, ScenarioConfig, SweepSpec, TransitMode};
use skipstop::report::{emit_case_files, emit_reports, ReportOptions};
use skipstop::sweep::{run_sweep, SweepSummary};
use skipstop_core::bound::lb_solve;
use skipstop_core::demand::build_demand_field;

/// Skip-stop transit corridor design.
#[derive(Parser)]
#[command(name = "skipstop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Design one case and compare with all-stop service.
    Solve(CaseArgs),
    /// Design one case and write its stop plan.
    Plan(CaseArgs),
    /// Design one case and check it against the exact stop-level costs.
    Verify {
        #[command(flatten)]
        case: CaseArgs,
        /// Also write per stop-pair accounts.
        #[arg(long)]
        dump_od: bool,
    },
    /// Lower bound only.
    Bound(CaseArgs),
    /// Run a case grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct CaseArgs {
    /// TOML scenario file; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<TransitMode>,
    /// Demand per km and direction (trips/km/h).
    #[arg(long)]
    density: Option<f64>,
    /// Origin spread in km; `inf` for uniform origins.
    #[arg(long)]
    origin_std: Option<f64>,
    /// Mean trip length (km).
    #[arg(long)]
    trip_mean: Option<f64>,
    /// Trip length standard deviation (km).
    #[arg(long)]
    trip_std: Option<f64>,
    /// Value of time ($/h).
    #[arg(long)]
    mu: Option<f64>,
    /// Transfer penalty (min).
    #[arg(long)]
    transfer_penalty: Option<f64>,
    /// Walking speed (km/h).
    #[arg(long)]
    walk_speed: Option<f64>,
    #[arg(long)]
    backtrack_weight: Option<f64>,
    /// Loop length (km).
    #[arg(long)]
    length: Option<f64>,
    /// Grid cells.
    #[arg(long)]
    cells: Option<usize>,
    /// Route rule for backtracking trips in the exact evaluation.
    #[arg(long, value_enum)]
    route: Option<RouteRule>,
    /// Report directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl CaseArgs {
    fn scenario(&self) -> Result<ScenarioConfig> {
        let mut c = match &self.config {
            Some(path) => ScenarioConfig::from_toml_file(path)?,
            None => {
                let need = |name: &str, v: Option<f64>| v.with_context(|| format!("--{name} is required without --config"));
                ScenarioConfig::new(
                    self.mode.context("--mode is required without --config")?,
                    need("density", self.density)?,
                    None,
                    need("trip-mean", self.trip_mean)?,
                    need("trip-std", self.trip_std)?,
                    need("mu", self.mu)?,
                )
            }
        };
        if let Some(m) = self.mode {
            c.mode = m;
        }
        for (field, v) in [
            (&mut c.density, self.density),
            (&mut c.trip_mean, self.trip_mean),
            (&mut c.trip_std, self.trip_std),
            (&mut c.value_of_time, self.mu),
            (&mut c.length, self.length),
        ] {
            if let Some(v) = v {
                *field = v;
            }
        }
        if self.origin_std.is_some() {
            c.origin_std = self.origin_std;
        }
        if let Some(n) = self.cells {
            c.cells = n;
        }
        let o = &mut c.overrides;
        o.transfer_penalty_min = self.transfer_penalty.or(o.transfer_penalty_min);
        o.walk_speed = self.walk_speed.or(o.walk_speed);
        o.backtrack_weight = self.backtrack_weight.or(o.backtrack_weight);
        if self.route.is_some() {
            c.solver.backtrack_route = self.route;
        }
        c.validate()?;
        Ok(c)
    }
}

#[derive(Args)]
struct SweepArgs {
    /// Named grid; ignored when --config is given.
    #[arg(long, value_enum, default_value = "default")]
    preset: Preset,
    /// TOML sweep file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to the available cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Skip the lower bound.
    #[arg(long)]
    no_bound: bool,
    /// Only write the sweep tables.
    #[arg(long)]
    no_case_files: bool,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn pct(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{:.3}%", 100.0 * v))
}

fn single(args: &CaseArgs, options: RunOptions) -> Result<()> {
    let config = args.scenario()?;
    let case = run_case(&config, &options)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let files = emit_case_files(&args.out, &case)?;
    println!("case {} ({})", case.id, case.status.as_str());
    if let Some(b) = case.binding {
        println!("binding constraint: {}", b.as_str());
    }
    if let Some(d) = case.design() {
        let s = &d.scalars;
        println!(
            "lines {}/{}, headways {:.3}/{:.3} min, GC {:.3} (converged: {})",
            s.lines_cw,
            s.lines_ccw,
            60.0 * s.headway_cw,
            60.0 * s.headway_ccw,
            d.cost.gc,
            d.converged
        );
    }
    if let Some(a) = case.all_stop() {
        println!("all-stop GC {:.3}, savings {}", a.cost.gc, pct(case.savings()));
    }
    if let Some(lb) = &case.bound {
        println!("lower bound {:.3}, gap {}", lb.value, pct(case.gap()));
    }
    if let Some((plan, _)) = &case.plan {
        println!("{} stops, {} transfer stops", plan.len(), plan.transfers.len());
    }
    for row in &case.errors {
        let err = if row.absolute { format!("{:.4} (abs)", row.error) } else { pct(Some(row.error)) };
        println!("  {:<7}{:>14.3}{:>14.3}  {err}", row.item, row.approximate, row.exact);
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn bound_only(args: &CaseArgs) -> Result<()> {
    let config = args.scenario()?;
    let field = build_demand_field(&config.demand(), &config.corridor()?)?;
    let lb = lb_solve(&field, &config.params()?, &config.solver.bound())?;
    let s = &lb.scalars;
    println!(
        "case {}: lower bound {:.3} at lines {}/{}, headways {:.3}/{:.3} min ({} evaluations, symmetric demand: {})",
        config.id(),
        lb.value,
        s.lines_cw,
        s.lines_ccw,
        60.0 * s.headway_cw,
        60.0 * s.headway_ccw,
        lb.evaluations,
        lb.symmetric_demand
    );
    Ok(())
}

fn sweep(args: &SweepArgs) -> Result<()> {
    let spec = match &args.config {
        Some(path) => SweepSpec::from_toml_file(path)?,
        None => SweepSpec::preset(args.preset),
    };
    let cases = spec.cases();
    if cases.is_empty() {
        bail!("the sweep has no cases");
    }
    for c in &cases {
        c.validate().with_context(|| format!("case {}", c.id()))?;
    }
    let workers = args.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let options = RunOptions { bound: !args.no_bound, ..RunOptions::default() };
    let results = run_sweep(&cases, &options, workers);
    for r in &results {
        if let Err(e) = r {
            log::error!("{e}");
        }
    }
    let written = emit_reports(&args.out, &results, &ReportOptions { per_case: !args.no_case_files })?;
    let s = SweepSummary::from_results(&results);
    println!(
        "{} cases ({} failed, {} infeasible, {} without a feasible skip-stop design)",
        s.cases, s.failed, s.infeasible, s.skip_stop_infeasible
    );
    println!("gap mean {} max {} over {} cases", pct(Some(s.gap.mean)), pct(Some(s.gap.max)), s.gap.count);
    if let Some((_, gc)) = s.errors.iter().find(|(item, _)| *item == "GC") {
        println!("GC error mean {} max {}", pct(Some(gc.mean)), pct(Some(gc.max)));
    }
    println!("savings max {}", pct(Some(s.savings.max)));
    println!("wrote {} files to {}", written.len(), args.out.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Solve(a) => single(&a, RunOptions::default()),
        Command::Plan(a) => single(&a, RunOptions { bound: false, verify: false, keep_accounts: false }),
        Command::Verify { case, dump_od } => single(&case, RunOptions { bound: false, verify: true, keep_accounts: dump_od }),
        Command::Bound(a) => bound_only(&a),
        Command::Sweep(a) => sweep(&a),
    }
}
