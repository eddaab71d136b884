//! Continuous-approximation costs of a skip-stop design.
//!
//! Every component is in passenger-hours per hour. The generalized cost splits
//! into a part that depends only on the line counts and headways and an
//! integral of a pointwise cost density that also depends on the local stop
//! spacing and bay size; [`scalar_cost`] and [`pointwise_integrand`] expose the
//! two parts.

use alloc::format;
use alloc::vec::Vec;

use crate::demand::{backtrack_densities, DemandField, PointDemand};
use crate::params::ParamSet;
use crate::{Direction, Error, Result};

/// Largest admissible number of stops in a skip-stop bay.
pub const MAX_BAY: u32 = 30;
/// Largest admissible number of skip-stop lines per direction.
pub const MAX_LINES: u32 = 4;

/// Line counts and headways per direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignScalars {
    pub lines_cw: u32,
    pub lines_ccw: u32,
    /// Headway of each line (h).
    pub headway_cw: f64,
    pub headway_ccw: f64,
}

impl DesignScalars {
    pub fn lines(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Cw => self.lines_cw,
            Direction::Ccw => self.lines_ccw,
        }
    }

    pub fn headway(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Cw => self.headway_cw,
            Direction::Ccw => self.headway_ccw,
        }
    }

    /// Line count and headway ranges, without the headway floor.
    pub fn check_shape(&self) -> Result<()> {
        for dir in [Direction::Cw, Direction::Ccw] {
            let m = self.lines(dir);
            if !(1..=MAX_LINES).contains(&m) {
                return Err(Error::InvalidDesign(format!("line count {m} outside 1..={MAX_LINES}")));
            }
            let h = self.headway(dir);
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::InvalidDesign(format!("headway {h} must be positive")));
            }
        }
        Ok(())
    }

    /// Shape checks plus the headway floors.
    pub fn validate(&self, params: &ParamSet) -> Result<()> {
        self.check_shape()?;
        for dir in [Direction::Cw, Direction::Ccw] {
            let floor = params.headway_floor(self.lines(dir));
            if self.headway(dir) < floor * (1.0 - 1e-9) {
                return Err(Error::InvalidDesign(format!(
                    "headway {} h below floor {floor} h",
                    self.headway(dir)
                )));
            }
        }
        Ok(())
    }
}

/// Stop spacing and bay size at each grid point.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignProfiles {
    /// km.
    pub spacing: Vec<f64>,
    /// Stops per skip-stop bay.
    pub bay: Vec<u32>,
}

impl DesignProfiles {
    pub fn uniform(cells: usize, spacing: f64, bay: u32) -> Self {
        Self { spacing: alloc::vec![spacing; cells], bay: alloc::vec![bay; cells] }
    }

    pub fn validate(&self, cells: usize) -> Result<()> {
        for len in [self.spacing.len(), self.bay.len()] {
            if len != cells {
                return Err(Error::GridMismatch { expected: cells, actual: len });
            }
        }
        for (j, (&s, &t)) in self.spacing.iter().zip(&self.bay).enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidDesign(format!("spacing {s} at grid point {j}")));
            }
            if !(1..=MAX_BAY).contains(&t) {
                return Err(Error::InvalidDesign(format!("bay size {t} at grid point {j}")));
            }
        }
        Ok(())
    }
}

/// Cost components in passenger-hours per hour.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CostBreakdown {
    pub access: f64,
    pub wait: f64,
    pub in_vehicle: f64,
    pub transfer: f64,
    pub vehicle_km: f64,
    pub vehicle_hour: f64,
    pub infrastructure: f64,
    pub stops: f64,
    pub gc: f64,
}

impl CostBreakdown {
    pub const NAMES: [&'static str; 9] = [
        "UT_a", "UT_w", "UT_v", "UT_t", "AC_K", "AC_H", "AC_I", "AC_S", "GC",
    ];

    pub fn from_components(c: [f64; 8]) -> Self {
        Self {
            access: c[0],
            wait: c[1],
            in_vehicle: c[2],
            transfer: c[3],
            vehicle_km: c[4],
            vehicle_hour: c[5],
            infrastructure: c[6],
            stops: c[7],
            gc: c.iter().sum(),
        }
    }

    pub fn components(&self) -> [f64; 8] {
        [
            self.access,
            self.wait,
            self.in_vehicle,
            self.transfer,
            self.vehicle_km,
            self.vehicle_hour,
            self.infrastructure,
            self.stops,
        ]
    }

    /// Components followed by GC, in [`Self::NAMES`] order.
    pub fn values(&self) -> [f64; 9] {
        let c = self.components();
        [c[0], c[1], c[2], c[3], c[4], c[5], c[6], c[7], self.gc]
    }

    pub fn user(&self) -> f64 {
        self.access + self.wait + self.in_vehicle + self.transfer
    }

    pub fn agency(&self) -> f64 {
        self.vehicle_km + self.vehicle_hour + self.infrastructure + self.stops
    }
}

/// Travel time per km of a vehicle (h/km): cruising plus dwells at the stops
/// it serves.
pub fn pace(spacing: f64, bay: f64, lines: u32, params: &ParamSet) -> f64 {
    let stops_per_km = ((bay - 1.0) / lines as f64 + 1.0) / (bay * spacing);
    1.0 / params.cruise_speed + params.dwell * stops_per_km
}

/// Average vehicle speed including dwells (km/h).
pub fn commercial_speed(spacing: f64, bay: f64, lines: u32, params: &ParamSet) -> f64 {
    1.0 / pace(spacing, bay, lines, params)
}

/// Clamps tiny negative values produced by cancellation.
fn clamp_component(name: &str, value: f64, scale: f64) -> f64 {
    if value < 0.0 {
        if value < -1e-9 * scale.abs().max(1.0) {
            log::warn!("{name} evaluated to {value}; clamped to 0");
        }
        0.0
    } else {
        value
    }
}

fn check_grid(field: &DemandField, len: usize) -> Result<()> {
    if len != field.cells() {
        return Err(Error::GridMismatch { expected: field.cells(), actual: len });
    }
    Ok(())
}

pub fn access_cost(field: &DemandField, spacing: &[f64], params: &ParamSet) -> Result<f64> {
    check_grid(field, spacing.len())?;
    let dx = field.corridor().step();
    Ok((0..field.cells())
        .map(|j| spacing[j] / (4.0 * params.walk_speed) * field.point(j).total_ends() * dx)
        .sum())
}

pub fn wait_cost(
    field: &DemandField,
    scalars: &DesignScalars,
    bay: &[u32],
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> Result<f64> {
    for len in [bay.len(), b_cw.len(), b_ccw.len()] {
        check_grid(field, len)?;
    }
    let dx = field.corridor().step();
    let (m_cw, m_ccw) = (scalars.lines_cw as f64, scalars.lines_ccw as f64);
    let (h_cw, h_ccw) = (scalars.headway_cw, scalars.headway_ccw);
    let imbalance = (m_ccw * h_ccw - m_cw * h_cw) / 2.0;
    let mut total = (2.0 * m_cw - 1.0) * h_cw * field.total(Direction::Cw) / 2.0
        + (2.0 * m_ccw - 1.0) * h_ccw * field.total(Direction::Ccw) / 2.0;
    for j in 0..field.cells() {
        let pd = field.point(j);
        let t = bay[j] as f64;
        total += (-(m_cw - 1.0) * h_cw * pd.ends(Direction::Cw) / (2.0 * t)
            - (m_ccw - 1.0) * h_ccw * pd.ends(Direction::Ccw) / (2.0 * t)
            + params.backtrack_weight * imbalance * (b_cw[j] - b_ccw[j]))
            * dx;
    }
    Ok(total)
}

/// Expected wait of the five trip types in one direction:
/// `[both ends at transfer stops, origin only, destination only, backtracking,
/// neither]`.
pub fn trip_type_wait_table(scalars: &DesignScalars, dir: Direction) -> [f64; 5] {
    let m = scalars.lines(dir) as f64;
    let h = scalars.headway(dir);
    let both = (scalars.lines_cw as f64 * scalars.headway_cw
        + scalars.lines_ccw as f64 * scalars.headway_ccw)
        / 2.0;
    [h / 2.0, m * h / 2.0, m * h / 2.0, both, m * h]
}

/// Extra in-vehicle time per backtracking trip (h), excluding the weight.
fn backtrack_ride(spacing: f64, bay: f64, m_cw: u32, m_ccw: u32, params: &ParamSet) -> f64 {
    bay * spacing / (3.0 * params.cruise_speed)
        + params.dwell / 6.0 * ((bay - 1.0) / m_cw as f64 + (bay - 1.0) / m_ccw as f64 + 2.0)
}

pub fn invehicle_cost(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> Result<f64> {
    profiles.validate(field.cells())?;
    for len in [b_cw.len(), b_ccw.len()] {
        check_grid(field, len)?;
    }
    let dx = field.corridor().step();
    let mut total = 0.0;
    for j in 0..field.cells() {
        let pd = field.point(j);
        let (s, t) = (profiles.spacing[j], profiles.bay[j] as f64);
        total += (pd.c_cw * pace(s, t, scalars.lines_cw, params)
            + pd.c_ccw * pace(s, t, scalars.lines_ccw, params)
            + params.backtrack_weight
                * (b_cw[j] + b_ccw[j])
                * backtrack_ride(s, t, scalars.lines_cw, scalars.lines_ccw, params))
            * dx;
    }
    Ok(total)
}

fn transfer_share(lines: u32) -> f64 {
    let m = lines as f64;
    (m - 1.0) / m
}

pub fn transfer_penalty(
    field: &DemandField,
    scalars: &DesignScalars,
    bay: &[u32],
    params: &ParamSet,
) -> Result<f64> {
    check_grid(field, bay.len())?;
    let dx = field.corridor().step();
    let (r_cw, r_ccw) = (transfer_share(scalars.lines_cw), transfer_share(scalars.lines_ccw));
    let gross = r_cw * field.total(Direction::Cw) + r_ccw * field.total(Direction::Ccw);
    let mut relief = 0.0;
    for j in 0..field.cells() {
        let pd = field.point(j);
        let t = bay[j] as f64;
        relief += (r_cw * pd.ends(Direction::Cw) + r_ccw * pd.ends(Direction::Ccw))
            * (2.0 * t - 1.0)
            / (2.0 * t * t)
            * dx;
    }
    let value = params.transfer_penalty * (gross - relief);
    Ok(clamp_component("UT_t", value, params.transfer_penalty * gross))
}

/// `(AC_K, AC_H, AC_I, AC_S)`.
pub fn agency_costs(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    params: &ParamSet,
) -> Result<(f64, f64, f64, f64)> {
    profiles.validate(field.cells())?;
    let corridor = field.corridor();
    let (l, dx) = (corridor.length(), corridor.step());
    let km = params.km_cost_h() * l * (1.0 / scalars.headway_cw + 1.0 / scalars.headway_ccw);
    let mut hours = 0.0;
    let mut stops = 0.0;
    for j in 0..field.cells() {
        let (s, t) = (profiles.spacing[j], profiles.bay[j] as f64);
        hours += (pace(s, t, scalars.lines_cw, params) / scalars.headway_cw
            + pace(s, t, scalars.lines_ccw, params) / scalars.headway_ccw)
            * dx;
        stops += dx / s;
    }
    let infra = 2.0 * params.infra_cost_h() * l;
    Ok((km, params.hour_cost_h() * hours, infra, params.stop_cost_h() * stops))
}

/// Part of the generalized cost that depends only on line counts and
/// headways.
pub fn scalar_cost(field: &DemandField, scalars: &DesignScalars, params: &ParamSet) -> f64 {
    let l = field.corridor().length();
    let mut total = 0.0;
    for dir in [Direction::Cw, Direction::Ccw] {
        let m = scalars.lines(dir);
        let h = scalars.headway(dir);
        let demand = field.total(dir);
        total += (2.0 * m as f64 - 1.0) * h * demand / 2.0
            + params.transfer_penalty * transfer_share(m) * demand
            + params.km_cost_h() * l / h;
    }
    total + 2.0 * params.infra_cost_h() * l
}

/// Pointwise cost density (h/h per km) at one grid point: every term of the
/// generalized cost that depends on the local spacing and bay size.
pub fn pointwise_integrand(
    scalars: &DesignScalars,
    spacing: f64,
    bay: f64,
    pd: &PointDemand,
    b_cw: f64,
    b_ccw: f64,
    params: &ParamSet,
) -> f64 {
    let (m_cw, m_ccw) = (scalars.lines_cw, scalars.lines_ccw);
    let (h_cw, h_ccw) = (scalars.headway_cw, scalars.headway_ccw);
    let pace_cw = pace(spacing, bay, m_cw, params);
    let pace_ccw = pace(spacing, bay, m_ccw, params);
    let wb = params.backtrack_weight;

    let access = spacing / (4.0 * params.walk_speed) * pd.total_ends();
    let wait = -((m_cw - 1) as f64) * h_cw * pd.ends(Direction::Cw) / (2.0 * bay)
        - ((m_ccw - 1) as f64) * h_ccw * pd.ends(Direction::Ccw) / (2.0 * bay)
        + wb * (m_ccw as f64 * h_ccw - m_cw as f64 * h_cw) / 2.0 * (b_cw - b_ccw);
    let ride = pd.c_cw * pace_cw
        + pd.c_ccw * pace_ccw
        + wb * (b_cw + b_ccw) * backtrack_ride(spacing, bay, m_cw, m_ccw, params);
    let transfer = -params.transfer_penalty
        * (transfer_share(m_cw) * pd.ends(Direction::Cw) + transfer_share(m_ccw) * pd.ends(Direction::Ccw))
        * (2.0 * bay - 1.0)
        / (2.0 * bay * bay);
    let fleet = params.hour_cost_h() * (pace_cw / h_cw + pace_ccw / h_ccw);
    let stops = params.stop_cost_h() / spacing;
    access + wait + ride + transfer + fleet + stops
}

/// Sum of the pointwise integrand over the grid.
pub fn integrated_pointwise(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> Result<f64> {
    profiles.validate(field.cells())?;
    for len in [b_cw.len(), b_ccw.len()] {
        check_grid(field, len)?;
    }
    let dx = field.corridor().step();
    Ok((0..field.cells())
        .map(|j| {
            pointwise_integrand(
                scalars,
                profiles.spacing[j],
                profiles.bay[j] as f64,
                &field.point(j),
                b_cw[j],
                b_ccw[j],
                params,
            ) * dx
        })
        .sum())
}

/// Cost components for given backtracking densities.
pub fn cost_with_backtracking(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> Result<CostBreakdown> {
    scalars.check_shape()?;
    profiles.validate(field.cells())?;
    let access = access_cost(field, &profiles.spacing, params)?;
    let wait = wait_cost(field, scalars, &profiles.bay, b_cw, b_ccw, params)?;
    let ride = invehicle_cost(field, scalars, profiles, b_cw, b_ccw, params)?;
    let transfer = transfer_penalty(field, scalars, &profiles.bay, params)?;
    let (km, hours, infra, stops) = agency_costs(field, scalars, profiles, params)?;
    let scale = access + wait.abs() + ride + transfer + km + hours + infra + stops;
    let wait = clamp_component("UT_w", wait, scale);
    Ok(CostBreakdown::from_components([access, wait, ride, transfer, km, hours, infra, stops]))
}

/// Generalized cost of a design; backtracking densities are derived from the
/// design.
pub fn generalized_cost(
    field: &DemandField,
    scalars: &DesignScalars,
    profiles: &DesignProfiles,
    params: &ParamSet,
) -> Result<CostBreakdown> {
    scalars.check_shape()?;
    profiles.validate(field.cells())?;
    let (b_cw, b_ccw) =
        backtrack_densities(field, &profiles.spacing, &profiles.bay, scalars.lines_cw, scalars.lines_ccw)?;
    cost_with_backtracking(field, scalars, profiles, &b_cw, &b_ccw, params)
}

/// Largest headway in direction `dir` that keeps peak vehicle loads within
/// capacity. Backtracking patrons ride in both directions inside a bay, so
/// half the bay's backtracking trips are added to the through flow.
pub fn capacity_headway_ceiling(
    field: &DemandField,
    dir: Direction,
    profiles: &DesignProfiles,
    b_cw: &[f64],
    b_ccw: &[f64],
    params: &ParamSet,
) -> f64 {
    let flows = field.flows(dir);
    let peak = (0..field.cells())
        .map(|j| {
            flows[j] + profiles.bay[j] as f64 * profiles.spacing[j] * (b_cw[j] + b_ccw[j]) / 2.0
        })
        .fold(0.0, f64::max);
    if peak > 0.0 {
        params.capacity / peak
    } else {
        f64::INFINITY
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::demand::{build_demand_field, Corridor, DemandSpec, OriginPdf, TripLengthPdf};
    use approx::assert_relative_eq;

    fn uniform_field() -> DemandField {
        let spec = DemandSpec {
            directional_demand: 1500.0,
            origin: OriginPdf::Uniform,
            trip_length: TripLengthPdf { mean_km: 8.0, std_km: 2.0 },
        };
        build_demand_field(&spec, &Corridor::new(40.0, 80).unwrap()).unwrap()
    }

    fn field_normal() -> DemandField {
        let spec = DemandSpec {
            directional_demand: 3000.0,
            origin: OriginPdf::TruncatedNormal { std_km: 4.0 },
            trip_length: TripLengthPdf { mean_km: 12.0, std_km: 4.0 },
        };
        build_demand_field(&spec, &Corridor::new(40.0, 80).unwrap()).unwrap()
    }

    fn scalars(m_cw: u32, m_ccw: u32, h_cw: f64, h_ccw: f64) -> DesignScalars {
        DesignScalars { lines_cw: m_cw, lines_ccw: m_ccw, headway_cw: h_cw, headway_ccw: h_ccw }
    }

    #[test]
    fn commercial_speed_examples() {
        let p = ParamSet::bus(10.0);
        assert_relative_eq!(pace(0.5, 1.0, 1, &p), 0.04 + 2.0 / 120.0, max_relative = 1e-12);
        assert_relative_eq!(commercial_speed(0.5, 1.0, 1, &p), 17.647, max_relative = 1e-4);
        assert_relative_eq!(commercial_speed(0.4, 3.0, 2, &p), 18.557, max_relative = 1e-4);
        let mut q = p;
        q.dwell = 0.0;
        assert_relative_eq!(commercial_speed(0.3, 5.0, 3, &q), 25.0);
    }

    #[test]
    fn access_closed_form() {
        let f = uniform_field();
        let p = ParamSet::bus(10.0);
        let ut_a = access_cost(&f, &vec![0.5; 80], &p).unwrap();
        assert_relative_eq!(ut_a, 375.0, max_relative = 1e-12);
        assert_relative_eq!(access_cost(&f, &vec![1.0; 80], &p).unwrap(), 750.0, max_relative = 1e-12);
    }

    #[test]
    fn wait_all_stop_is_half_headway() {
        let f = field_normal();
        let p = ParamSet::bus(10.0);
        let zeros = vec![0.0; 80];
        let sc = scalars(1, 1, 0.1, 0.2);
        let w = wait_cost(&f, &sc, &vec![1; 80], &zeros, &zeros, &p).unwrap();
        assert_relative_eq!(w, 0.1 * 3000.0 / 2.0 + 0.2 * 3000.0 / 2.0, max_relative = 1e-12);
        // Every stop a transfer stop: skip-stop lines behave as one line.
        let sc = scalars(2, 3, 0.1, 0.2);
        let w = wait_cost(&f, &sc, &vec![1; 80], &zeros, &zeros, &p).unwrap();
        assert_relative_eq!(w, 0.1 * 3000.0 / 2.0 + 0.2 * 3000.0 / 2.0, max_relative = 1e-9);
    }

    #[test]
    fn wait_table_values() {
        let sc = scalars(2, 1, 4.0, 6.0);
        let cw = trip_type_wait_table(&sc, Direction::Cw);
        assert_eq!(cw, [2.0, 4.0, 4.0, (8.0 + 6.0) / 2.0, 8.0]);
        let ccw = trip_type_wait_table(&sc, Direction::Ccw);
        assert_eq!(ccw, [3.0, 3.0, 3.0, 7.0, 6.0]);
    }

    #[test]
    fn transfer_penalty_limits() {
        let f = uniform_field();
        let p = ParamSet::bus(10.0);
        assert_eq!(transfer_penalty(&f, &scalars(1, 1, 0.1, 0.1), &vec![7; 80], &p).unwrap(), 0.0);
        let t1 = transfer_penalty(&f, &scalars(2, 3, 0.1, 0.1), &vec![1; 80], &p).unwrap();
        assert!(t1.abs() < 1e-9);
        // Large bays approach C_t (m-1)/m Λ per direction.
        let big = transfer_penalty(&f, &scalars(2, 2, 0.1, 0.1), &vec![30; 80], &p).unwrap();
        let limit = (1.0 / 60.0) * 0.5 * 3000.0;
        assert!(big < limit && big > 0.9 * limit);
    }

    #[test]
    fn invehicle_closed_form() {
        let f = uniform_field();
        let p = ParamSet::bus(10.0);
        let zeros = vec![0.0; 80];
        let prof = DesignProfiles::uniform(80, 0.5, 1);
        let c = f.point(10).c_cw;
        assert_relative_eq!(c, 1500.0 * 8.0 / 40.0, max_relative = 1e-9);
        let ut_v = invehicle_cost(&f, &scalars(1, 1, 0.1, 0.1), &prof, &zeros, &zeros, &p).unwrap();
        let expected = 2.0 * 300.0 * 40.0 * (0.04 + 2.0 / 120.0);
        assert_relative_eq!(ut_v, expected, max_relative = 1e-9);
    }

    #[test]
    fn agency_examples() {
        let f = uniform_field();
        let p = ParamSet::bus(20.0);
        let prof = DesignProfiles::uniform(80, 0.5, 1);
        let (km, hours, infra, stops) = agency_costs(&f, &scalars(1, 1, 0.1, 0.1), &prof, &p).unwrap();
        assert_relative_eq!(km, 23.6, max_relative = 1e-12);
        assert_relative_eq!(stops, 2.8, max_relative = 1e-12);
        assert_relative_eq!(infra, 2.0 * (6.0 + 4.0) * 40.0 / 20.0, max_relative = 1e-12);
        let expected_hours = 62.66 / 20.0 * 2.0 * 40.0 * (0.04 + 2.0 / 120.0) / 0.1;
        assert_relative_eq!(hours, expected_hours, max_relative = 1e-12);
    }

    #[test]
    fn split_matches_component_sum() {
        let f = field_normal();
        let p = ParamSet::rail(20.0);
        let sc = scalars(2, 3, 0.08, 0.11);
        let spacing: Vec<f64> = (0..80).map(|j| 0.6 + 0.01 * j as f64).collect();
        let bay: Vec<u32> = (0..80).map(|j| 1 + (j % 5) as u32).collect();
        let prof = DesignProfiles { spacing, bay };
        let direct = generalized_cost(&f, &sc, &prof, &p).unwrap();
        let (b_cw, b_ccw) = backtrack_densities(&f, &prof.spacing, &prof.bay, 2, 3).unwrap();
        let split = scalar_cost(&f, &sc, &p) + integrated_pointwise(&f, &sc, &prof, &b_cw, &b_ccw, &p).unwrap();
        assert_relative_eq!(direct.gc, split, max_relative = 1e-9);
        assert_relative_eq!(direct.gc, direct.user() + direct.agency(), max_relative = 1e-12);
    }

    #[test]
    fn backtrack_weight_raises_cost() {
        let f = field_normal();
        let mut p = ParamSet::rail(20.0);
        let sc = scalars(2, 2, 0.1, 0.1);
        let prof = DesignProfiles::uniform(80, 1.5, 6);
        let base = generalized_cost(&f, &sc, &prof, &p).unwrap();
        p.backtrack_weight = 3.0;
        let heavy = generalized_cost(&f, &sc, &prof, &p).unwrap();
        assert!(heavy.gc > base.gc);
        let all_stop = DesignProfiles::uniform(80, 0.8, 1);
        let a = generalized_cost(&f, &sc, &all_stop, &p).unwrap();
        p.backtrack_weight = 1.0;
        let b = generalized_cost(&f, &sc, &all_stop, &p).unwrap();
        assert_eq!(a.gc, b.gc);
    }

    #[test]
    fn integrand_is_affine_in_spacing_and_inverse() {
        let f = field_normal();
        let p = ParamSet::bus(10.0);
        let sc = scalars(2, 2, 0.1, 0.12);
        let pd = f.point(30);
        let g = |s: f64| pointwise_integrand(&sc, s, 3.0, &pd, 0.4, 0.3, &p);
        // Recover a, c from two points and predict a third.
        let (s1, s2, s3) = (0.3, 0.9, 1.7);
        let det = s1 / s2 - s2 / s1;
        let (d1, d2) = (g(s1) - g(1.0), g(s2) - g(1.0));
        let (u1, v1, u2, v2) = (s1 - 1.0, 1.0 / s1 - 1.0, s2 - 1.0, 1.0 / s2 - 1.0);
        let det2 = u1 * v2 - u2 * v1;
        let a = (d1 * v2 - d2 * v1) / det2;
        let c = (u1 * d2 - u2 * d1) / det2;
        assert!(det != 0.0 && a > 0.0 && c > 0.0);
        let pred = g(1.0) + a * (s3 - 1.0) + c * (1.0 / s3 - 1.0);
        assert_relative_eq!(pred, g(s3), max_relative = 1e-10);
    }

    #[test]
    fn rejects_mismatched_profiles() {
        let f = uniform_field();
        let p = ParamSet::bus(10.0);
        let prof = DesignProfiles::uniform(79, 0.5, 1);
        assert!(matches!(
            generalized_cost(&f, &scalars(1, 1, 0.1, 0.1), &prof, &p),
            Err(Error::GridMismatch { .. })
        ));
        let prof = DesignProfiles::uniform(80, 0.5, 31);
        assert!(generalized_cost(&f, &scalars(1, 1, 0.1, 0.1), &prof, &p).is_err());
        assert!(generalized_cost(&f, &scalars(5, 1, 0.1, 0.1), &DesignProfiles::uniform(80, 0.5, 1), &p).is_err());
    }
}
