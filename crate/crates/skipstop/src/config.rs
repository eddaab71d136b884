//! Scenario and sweep definitions, loadable from TOML.

use std::fmt::{self, Write as _};
use std::path::Path;

use serde::{Deserialize, Serialize};
use skipstop_core::bound::BoundSettings;
use skipstop_core::demand::{Corridor, DemandSpec, OriginPdf, TripLengthPdf};
use skipstop_core::exact::BacktrackRoute;
use skipstop_core::heuristic::SolverSettings;
use skipstop_core::params::{Mode, ParamSet};

use crate::error::ExperimentError;

pub const DEFAULT_LENGTH_KM: f64 = 40.0;
pub const DEFAULT_CELLS: usize = 80;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TransitMode {
    Bus,
    Rail,
}

impl From<TransitMode> for Mode {
    fn from(m: TransitMode) -> Self {
        match m {
            TransitMode::Bus => Mode::Bus,
            TransitMode::Rail => Mode::Rail,
        }
    }
}

impl fmt::Display for TransitMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TransitMode::Bus => "bus",
            TransitMode::Rail => "rail",
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RouteRule {
    /// Cheaper of the two backtracking routes.
    #[default]
    Cheaper,
    /// Transfer at the bay end nearest both stops.
    Nearest,
}

impl From<RouteRule> for BacktrackRoute {
    fn from(r: RouteRule) -> Self {
        match r {
            RouteRule::Cheaper => BacktrackRoute::CheaperOfTwo,
            RouteRule::Nearest => BacktrackRoute::NearestTransfer,
        }
    }
}

/// Parameter overrides on top of the mode preset.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Transfer penalty (min).
    pub transfer_penalty_min: Option<f64>,
    /// Walking speed (km/h).
    pub walk_speed: Option<f64>,
    pub backtrack_weight: Option<f64>,
}

/// Solver knobs; unset fields keep the library defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub smoothing: Option<f64>,
    pub backtrack_tol: Option<f64>,
    pub headway_tol: Option<f64>,
    pub max_bay: Option<u32>,
    pub max_lines: Option<u32>,
    pub max_iterations: Option<usize>,
    pub spacing_cap_km: Option<f64>,
    /// Lower-bound headway grid step (min).
    pub bound_step_min: Option<f64>,
    pub backtrack_route: Option<RouteRule>,
}

impl SolverConfig {
    pub fn heuristic(&self) -> SolverSettings {
        let d = SolverSettings::default();
        SolverSettings {
            smoothing: self.smoothing.unwrap_or(d.smoothing),
            backtrack_tol: self.backtrack_tol.unwrap_or(d.backtrack_tol),
            headway_tol: self.headway_tol.unwrap_or(d.headway_tol),
            max_bay: self.max_bay.unwrap_or(d.max_bay),
            max_lines: self.max_lines.unwrap_or(d.max_lines),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            spacing_cap: self.spacing_cap_km.unwrap_or(d.spacing_cap),
        }
    }

    pub fn bound(&self) -> BoundSettings {
        let d = BoundSettings::default();
        BoundSettings {
            headway_step: self.bound_step_min.map_or(d.headway_step, |m| m / 60.0),
            max_lines: self.max_lines.unwrap_or(d.max_lines),
            ..d
        }
    }

    pub fn route(&self) -> BacktrackRoute {
        self.backtrack_route.unwrap_or_default().into()
    }
}

fn default_length() -> f64 {
    DEFAULT_LENGTH_KM
}

fn default_cells() -> usize {
    DEFAULT_CELLS
}

/// One experiment case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: TransitMode,
    /// Demand per km of loop and direction, Λ/L (trips/km/h).
    pub density: f64,
    /// Origin spread (km); absent or `inf` means uniform origins.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_std: Option<f64>,
    /// Mean trip length (km).
    pub trip_mean: f64,
    /// Trip length standard deviation (km).
    pub trip_std: f64,
    /// Value of time ($/h).
    pub value_of_time: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default)]
    pub overrides: Overrides,
    #[serde(default)]
    pub solver: SolverConfig,
}

/// Compact decimal rendering for ids: `8`, `37.5`, `inf`.
fn num(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

impl ScenarioConfig {
    pub fn new(mode: TransitMode, density: f64, origin_std: Option<f64>, trip_mean: f64, trip_std: f64, value_of_time: f64) -> Self {
        Self {
            mode,
            density,
            origin_std,
            trip_mean,
            trip_std,
            value_of_time,
            length: DEFAULT_LENGTH_KM,
            cells: DEFAULT_CELLS,
            overrides: Overrides::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ExperimentError::Config { path: path.into(), source })
    }

    /// Finite origin spread, or `None` for uniform origins.
    pub fn origin_spread(&self) -> Option<f64> {
        self.origin_std.filter(|s| s.is_finite())
    }

    /// Deterministic case id, e.g. `bus_so8_el8_sl2_mu20_d37.5`.
    pub fn id(&self) -> String {
        let mut id = format!(
            "{}_so{}_el{}_sl{}_mu{}_d{}",
            self.mode,
            num(self.origin_spread().unwrap_or(f64::INFINITY)),
            num(self.trip_mean),
            num(self.trip_std),
            num(self.value_of_time),
            num(self.density)
        );
        let o = &self.overrides;
        for (tag, v) in [("ct", o.transfer_penalty_min), ("vw", o.walk_speed), ("wb", o.backtrack_weight)] {
            if let Some(v) = v {
                let _ = write!(id, "_{tag}{}", num(v));
            }
        }
        if self.length != DEFAULT_LENGTH_KM {
            let _ = write!(id, "_L{}", num(self.length));
        }
        if self.cells != DEFAULT_CELLS {
            let _ = write!(id, "_n{}", self.cells);
        }
        id
    }

    pub fn params(&self) -> Result<ParamSet, ExperimentError> {
        let mut p = ParamSet::preset(self.mode.into(), self.value_of_time);
        if let Some(ct) = self.overrides.transfer_penalty_min {
            p.transfer_penalty = ct / 60.0;
        }
        if let Some(vw) = self.overrides.walk_speed {
            p.walk_speed = vw;
        }
        if let Some(wb) = self.overrides.backtrack_weight {
            p.backtrack_weight = wb;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn corridor(&self) -> Result<Corridor, ExperimentError> {
        Ok(Corridor::new(self.length, self.cells)?)
    }

    pub fn demand(&self) -> DemandSpec {
        DemandSpec {
            directional_demand: self.density * self.length,
            origin: self.origin_spread().map_or(OriginPdf::Uniform, |s| OriginPdf::TruncatedNormal { std_km: s }),
            trip_length: TripLengthPdf { mean_km: self.trip_mean, std_km: self.trip_std },
        }
    }

    /// Checks everything that can be checked without solving.
    pub fn validate(&self) -> Result<(), ExperimentError> {
        self.params()?;
        self.demand().validate(&self.corridor()?)?;
        self.solver.heuristic().validate()?;
        let b = self.solver.bound();
        if !(b.headway_step > 0.0) {
            return Err(ExperimentError::Invalid("bound_step_min must be positive".into()));
        }
        Ok(())
    }
}

/// Named case grids.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// The 144-case grid with values of time 5 and 10.
    Base,
    /// The 144-case grid plus value of time 20 (216 cases).
    Default,
    /// Rail slice with transfer penalties 1 to 2 min.
    TransferPenalty,
    /// Rail slice with walking speeds 2 to 8 km/h.
    WalkSpeed,
    /// Bus slice with backtracking weights 1 to 3.
    BacktrackWeight,
}

pub const BUS_DENSITIES: [f64; 3] = [37.5, 75.0, 150.0];
pub const RAIL_DENSITIES: [f64; 3] = [250.0, 500.0, 1000.0];

/// A full-factorial case grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub modes: Vec<TransitMode>,
    /// Origin spreads; `inf` means uniform.
    pub origin_stds: Vec<f64>,
    pub trip_means: Vec<f64>,
    pub trip_stds: Vec<f64>,
    pub values_of_time: Vec<f64>,
    pub bus_densities: Vec<f64>,
    pub rail_densities: Vec<f64>,
    #[serde(default)]
    pub transfer_penalties_min: Vec<f64>,
    #[serde(default)]
    pub walk_speeds: Vec<f64>,
    #[serde(default)]
    pub backtrack_weights: Vec<f64>,
    #[serde(default = "default_length")]
    pub length: f64,
    #[serde(default = "default_cells")]
    pub cells: usize,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl SweepSpec {
    pub fn preset(preset: Preset) -> Self {
        let base = Self {
            modes: vec![TransitMode::Bus, TransitMode::Rail],
            origin_stds: vec![f64::INFINITY, 8.0, 4.0],
            trip_means: vec![8.0, 12.0],
            trip_stds: vec![2.0, 4.0],
            values_of_time: vec![5.0, 10.0],
            bus_densities: BUS_DENSITIES.to_vec(),
            rail_densities: RAIL_DENSITIES.to_vec(),
            transfer_penalties_min: Vec::new(),
            walk_speeds: Vec::new(),
            backtrack_weights: Vec::new(),
            length: DEFAULT_LENGTH_KM,
            cells: DEFAULT_CELLS,
            solver: SolverConfig::default(),
        };
        let rail_slice = Self {
            modes: vec![TransitMode::Rail],
            origin_stds: vec![8.0],
            trip_means: vec![12.0],
            trip_stds: vec![4.0],
            values_of_time: vec![20.0],
            ..base.clone()
        };
        match preset {
            Preset::Base => base,
            Preset::Default => Self { values_of_time: vec![5.0, 10.0, 20.0], ..base },
            Preset::TransferPenalty => Self { transfer_penalties_min: vec![1.0, 1.25, 1.5, 1.75, 2.0], ..rail_slice },
            Preset::WalkSpeed => Self { walk_speeds: vec![2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0], ..rail_slice },
            Preset::BacktrackWeight => Self {
                modes: vec![TransitMode::Bus],
                origin_stds: vec![4.0],
                trip_means: vec![8.0],
                trip_stds: vec![2.0],
                values_of_time: vec![20.0],
                bus_densities: vec![75.0],
                backtrack_weights: vec![1.0, 1.5, 2.0, 2.5, 3.0],
                ..base
            },
        }
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.into(), source })?;
        toml::from_str(&text).map_err(|source| ExperimentError::Config { path: path.into(), source })
    }

    /// Cases in a fixed order: mode, origin spread, trip mean, trip spread,
    /// value of time, density, then the override lists.
    pub fn cases(&self) -> Vec<ScenarioConfig> {
        fn or_none(v: &[f64]) -> Vec<Option<f64>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &mode in &self.modes {
            let densities = match mode {
                TransitMode::Bus => &self.bus_densities,
                TransitMode::Rail => &self.rail_densities,
            };
            for &so in &self.origin_stds {
                for &el in &self.trip_means {
                    for &sl in &self.trip_stds {
                        for &mu in &self.values_of_time {
                            for &d in densities {
                                for ct in or_none(&self.transfer_penalties_min) {
                                    for vw in or_none(&self.walk_speeds) {
                                        for wb in or_none(&self.backtrack_weights) {
                                            let origin = if so.is_finite() { Some(so) } else { None };
                                            let mut c = ScenarioConfig::new(mode, d, origin, el, sl, mu);
                                            c.length = self.length;
                                            c.cells = self.cells;
                                            c.solver = self.solver;
                                            c.overrides = Overrides {
                                                transfer_penalty_min: ct,
                                                walk_speed: vw,
                                                backtrack_weight: wb,
                                            };
                                            out.push(c);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_sizes() {
        assert_eq!(SweepSpec::preset(Preset::Base).cases().len(), 144);
        assert_eq!(SweepSpec::preset(Preset::Default).cases().len(), 216);
        assert_eq!(SweepSpec::preset(Preset::TransferPenalty).cases().len(), 15);
        assert_eq!(SweepSpec::preset(Preset::BacktrackWeight).cases().len(), 5);
    }

    #[test]
    fn ids_are_unique_and_readable() {
        let cases = SweepSpec::preset(Preset::Default).cases();
        let mut ids: Vec<String> = cases.iter().map(|c| c.id()).collect();
        assert!(ids.contains(&"bus_so8_el8_sl2_mu20_d37.5".to_string()));
        assert!(ids.contains(&"rail_soinf_el12_sl4_mu5_d1000".to_string()));
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), 216);
        let c = &SweepSpec::preset(Preset::WalkSpeed).cases()[1];
        assert_eq!(c.id(), "rail_so8_el12_sl4_mu20_d250_vw3");
    }

    #[test]
    fn toml_round_trip_and_infinite_spread() {
        let text = r#"
            mode = "rail"
            density = 500
            origin_std = inf
            trip_mean = 12
            trip_std = 4
            value_of_time = 20
            [overrides]
            walk_speed = 4
            [solver]
            backtrack_route = "nearest"
        "#;
        let c: ScenarioConfig = toml::from_str(text).unwrap();
        assert_eq!(c.origin_spread(), None);
        assert_eq!(c.cells, DEFAULT_CELLS);
        assert_eq!(c.solver.route(), BacktrackRoute::NearestTransfer);
        assert_eq!(c.params().unwrap().walk_speed, 4.0);
        let back: ScenarioConfig = toml::from_str(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(back.id(), c.id());
        assert!(toml::from_str::<ScenarioConfig>("mode = \"tram\"").is_err());
    }

    #[test]
    fn invalid_overrides_rejected() {
        let mut c = ScenarioConfig::new(TransitMode::Bus, 75.0, Some(8.0), 8.0, 2.0, 20.0);
        assert!(c.validate().is_ok());
        c.overrides.backtrack_weight = Some(0.5);
        assert!(c.validate().is_err());
        c.overrides.backtrack_weight = None;
        c.trip_mean = -1.0;
        assert!(c.validate().is_err());
    }
}
