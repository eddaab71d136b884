//! Operating and cost parameters.
//!
//! All values are stored in base units: hours, km, km/h, $ per hour. Agency
//! costs are converted to passenger-hours by dividing by the value of time.

use alloc::format;

use crate::{Error, Result};

/// Transit technology preset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Bus,
    Rail,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamSet {
    /// Dwell time per stop visited (h).
    pub dwell: f64,
    /// Cruise speed (km/h).
    pub cruise_speed: f64,
    /// Walking speed (km/h).
    pub walk_speed: f64,
    /// Vehicle capacity (patrons/veh).
    pub capacity: f64,
    /// Minimum headway (h).
    pub min_headway: f64,
    /// Distance-based vehicle cost ($/veh-km).
    pub vehicle_km_cost: f64,
    /// Time-based vehicle cost ($/veh-h).
    pub vehicle_hour_cost: f64,
    /// Infrastructure cost ($/km-h) per direction.
    pub infrastructure_cost: f64,
    /// Stop cost ($/stop-h).
    pub stop_cost: f64,
    /// Value of time ($/h).
    pub value_of_time: f64,
    /// Transfer penalty (h).
    pub transfer_penalty: f64,
    /// Extra weight on backtracking costs (1 = none).
    pub backtrack_weight: f64,
}

impl ParamSet {
    pub const DEFAULT_WALK_SPEED: f64 = 2.0;
    pub const DEFAULT_TRANSFER_PENALTY: f64 = 1.0 / 60.0;

    pub fn preset(mode: Mode, value_of_time: f64) -> Self {
        match mode {
            Mode::Bus => Self::bus(value_of_time),
            Mode::Rail => Self::rail(value_of_time),
        }
    }

    pub fn bus(mu: f64) -> Self {
        Self {
            dwell: 30.0 / 3600.0,
            cruise_speed: 25.0,
            walk_speed: Self::DEFAULT_WALK_SPEED,
            capacity: 80.0,
            min_headway: 1.0 / 60.0,
            vehicle_km_cost: 0.59,
            vehicle_hour_cost: 2.66 + 3.0 * mu,
            infrastructure_cost: 6.0 + 0.2 * mu,
            stop_cost: 0.42 + 0.014 * mu,
            value_of_time: mu,
            transfer_penalty: Self::DEFAULT_TRANSFER_PENALTY,
            backtrack_weight: 1.0,
        }
    }

    pub fn rail(mu: f64) -> Self {
        Self {
            dwell: 45.0 / 3600.0,
            cruise_speed: 60.0,
            walk_speed: Self::DEFAULT_WALK_SPEED,
            capacity: 3000.0,
            min_headway: 1.5 / 60.0,
            vehicle_km_cost: 2.20,
            vehicle_hour_cost: 101.0 + 5.0 * mu,
            infrastructure_cost: 594.0 + 19.8 * mu,
            stop_cost: 294.0 + 9.8 * mu,
            value_of_time: mu,
            transfer_penalty: Self::DEFAULT_TRANSFER_PENALTY,
            backtrack_weight: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dwell time", self.dwell),
            ("cruise speed", self.cruise_speed),
            ("walk speed", self.walk_speed),
            ("capacity", self.capacity),
            ("minimum headway", self.min_headway),
            ("vehicle-km cost", self.vehicle_km_cost),
            ("vehicle-hour cost", self.vehicle_hour_cost),
            ("infrastructure cost", self.infrastructure_cost),
            ("stop cost", self.stop_cost),
            ("value of time", self.value_of_time),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.transfer_penalty.is_finite() && self.transfer_penalty >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "transfer penalty must be non-negative, got {}",
                self.transfer_penalty
            )));
        }
        if !(self.backtrack_weight.is_finite() && self.backtrack_weight >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "backtracking weight must be at least 1, got {}",
                self.backtrack_weight
            )));
        }
        Ok(())
    }

    /// Smallest allowed headway for a direction served by `lines` lines.
    /// Skip-stop operation needs an extra dwell of separation.
    pub fn headway_floor(&self, lines: u32) -> f64 {
        if lines > 1 {
            self.min_headway + self.dwell
        } else {
            self.min_headway
        }
    }

    /// Vehicle-km cost in passenger-hours.
    pub(crate) fn km_cost_h(&self) -> f64 {
        self.vehicle_km_cost / self.value_of_time
    }

    pub(crate) fn hour_cost_h(&self) -> f64 {
        self.vehicle_hour_cost / self.value_of_time
    }

    pub(crate) fn infra_cost_h(&self) -> f64 {
        self.infrastructure_cost / self.value_of_time
    }

    pub(crate) fn stop_cost_h(&self) -> f64 {
        self.stop_cost / self.value_of_time
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn presets_are_valid() {
        for mu in [5.0, 10.0, 20.0] {
            ParamSet::bus(mu).validate().unwrap();
            ParamSet::rail(mu).validate().unwrap();
        }
        let bus = ParamSet::bus(20.0);
        assert_relative_eq!(bus.stop_cost, 0.70, max_relative = 1e-12);
        assert_relative_eq!(bus.vehicle_hour_cost, 62.66, max_relative = 1e-12);
        let rail = ParamSet::rail(10.0);
        assert_relative_eq!(rail.infrastructure_cost, 792.0, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_values() {
        let mut p = ParamSet::bus(10.0);
        p.backtrack_weight = 0.5;
        assert!(p.validate().is_err());
        let mut p = ParamSet::bus(10.0);
        p.transfer_penalty = -1.0;
        assert!(p.validate().is_err());
        let mut p = ParamSet::rail(10.0);
        p.capacity = 0.0;
        assert!(p.validate().is_err());
        let mut p = ParamSet::rail(10.0);
        p.transfer_penalty = 0.0;
        assert!(p.validate().is_ok());
    }

    #[test]
    fn headway_floor_adds_dwell_for_skip_stop() {
        let p = ParamSet::bus(10.0);
        assert_relative_eq!(p.headway_floor(1), 1.0 / 60.0);
        assert_relative_eq!(p.headway_floor(3), 1.0 / 60.0 + 30.0 / 3600.0);
    }
}
