//! Discrete stop plans from continuous spacing and bay-size profiles.
//!
//! Stops go where the running integral of `1/s` crosses an integer. Transfer
//! stops are then picked bay by bay so that each bay's stop count tracks the
//! average bay size over it, while keeping the non-transfer stops of every
//! bay divisible among the lines of both directions. Non-transfer stops are
//! dealt to lines in a fixed rotation.

use alloc::vec;
use alloc::vec::Vec;

use crate::demand::Corridor;
use crate::spline::PeriodicSpline;
use crate::{Direction, Error, Result};

/// Sub-steps per grid cell for the running integrals.
const SUBSTEPS: usize = 50;

/// Continuous spacing and bay-size profiles with their running integrals.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileFit {
    corridor: Corridor,
    spacing: PeriodicSpline,
    bay: PeriodicSpline,
    /// `∫_0^x dz / s(z)` at multiples of the sub-step.
    stop_count: Vec<f64>,
    /// `∫_0^x T(z) dz` at multiples of the sub-step.
    bay_mass: Vec<f64>,
}

fn cumulative<F: Fn(f64) -> f64>(corridor: &Corridor, g: F) -> Vec<f64> {
    let steps = corridor.cells() * SUBSTEPS;
    let h = corridor.length() / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 0..steps {
        acc += g((k as f64 + 0.5) * h) * h;
        out.push(acc);
    }
    out
}

/// Linear interpolation in a running-integral table.
fn table_at(table: &[f64], corridor: &Corridor, x: f64) -> f64 {
    let steps = table.len() - 1;
    let pos = (x / corridor.length() * steps as f64).clamp(0.0, steps as f64);
    let k = (pos as usize).min(steps - 1);
    let t = pos - k as f64;
    table[k] + t * (table[k + 1] - table[k])
}

pub fn fit_profiles(spacing: &[f64], bay: &[f64], corridor: &Corridor) -> Result<ProfileFit> {
    let n = corridor.cells();
    for len in [spacing.len(), bay.len()] {
        if len != n {
            return Err(Error::GridMismatch { expected: n, actual: len });
        }
    }
    if spacing.iter().any(|s| !(s.is_finite() && *s > 0.0)) || bay.iter().any(|t| !(*t >= 1.0)) {
        return Err(Error::InvalidDesign("profiles need s > 0 and T >= 1".into()));
    }
    let (spacing_fit, replaced) = PeriodicSpline::with_floor(corridor.length(), spacing, 0.0);
    if replaced > 0 {
        log::info!("spacing fit: {replaced} spans fell back to linear interpolation");
    }
    let bay_fit = PeriodicSpline::new(corridor.length(), bay);
    let stop_count = cumulative(corridor, |x| 1.0 / spacing_fit.eval(x));
    let bay_mass = cumulative(corridor, |x| bay_fit.eval(x).max(1.0));
    Ok(ProfileFit { corridor: *corridor, spacing: spacing_fit, bay: bay_fit, stop_count, bay_mass })
}

impl ProfileFit {
    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    pub fn spacing_at(&self, x: f64) -> f64 {
        self.spacing.eval(x)
    }

    /// Fitted bay size, never below one stop.
    pub fn bay_at(&self, x: f64) -> f64 {
        self.bay.eval(x).max(1.0)
    }

    /// `∫_a^b dz / s(z)` for `0 <= a <= b <= L`.
    pub fn stops_between(&self, a: f64, b: f64) -> f64 {
        table_at(&self.stop_count, &self.corridor, b) - table_at(&self.stop_count, &self.corridor, a)
    }

    /// `∫_a^b T(z) dz` for `0 <= a <= b <= L`.
    pub fn bay_integral(&self, a: f64, b: f64) -> f64 {
        table_at(&self.bay_mass, &self.corridor, b) - table_at(&self.bay_mass, &self.corridor, a)
    }

    /// Average bay size over `[a, b]`.
    pub fn mean_bay(&self, a: f64, b: f64) -> f64 {
        if b > a {
            self.bay_integral(a, b) / (b - a)
        } else {
            self.bay_at(a)
        }
    }

    /// Position where `∫_0^x dz / s` reaches `count`.
    fn inverse_stop_count(&self, count: f64) -> f64 {
        let table = &self.stop_count;
        let k = table.partition_point(|v| *v < count).clamp(1, table.len() - 1);
        let (lo, hi) = (table[k - 1], table[k]);
        let t = if hi > lo { (count - lo) / (hi - lo) } else { 0.0 };
        let h = self.corridor.length() / (table.len() - 1) as f64;
        ((k - 1) as f64 + t) * h
    }
}

/// Stop locations: one at `x = 0` and one at each integer crossing of the
/// running integral of `1/s`. The last stop is dropped when it sits within
/// half a spacing of the first one across the origin.
pub fn place_stops(fit: &ProfileFit) -> Vec<f64> {
    let l = fit.corridor.length();
    let total = *fit.stop_count.last().expect("non-empty table");
    let mut stops = vec![0.0];
    let mut k = 1.0;
    while k < total {
        let x = fit.inverse_stop_count(k);
        if x >= l {
            break;
        }
        if x > *stops.last().expect("non-empty") {
            stops.push(x);
        }
        k += 1.0;
    }
    if stops.len() > 1 && l - stops[stops.len() - 1] < fit.spacing_at(l) / 2.0 {
        stops.pop();
    }
    stops
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a / gcd(a, b) * b
}

/// Indices of transfer stops (the first is always stop 0).
///
/// Bays are chosen one after another. The recursion runs against a copy of
/// stop 0 placed at `L`, which closes the loop; that copy is dropped at the
/// end. A final transfer stop leaving a tail shorter than half the average
/// bay size is then merged into the wrap-around bay.
pub fn select_transfer_stops(stops: &[f64], fit: &ProfileFit, lines_cw: u32, lines_ccw: u32) -> Vec<usize> {
    let n = stops.len();
    if n == 0 {
        return Vec::new();
    }
    let l = fit.corridor.length();
    let period = lcm(lines_cw.max(1), lines_ccw.max(1)) as usize;
    let location = |i: usize| if i == n { l } else { stops[i] };
    let mut transfers = vec![0usize];
    let mut current = 0usize;
    while current < n {
        let x0 = location(current);
        let mut best: Option<(usize, f64)> = None;
        let mut candidate = current + 1;
        while candidate <= n {
            let x1 = location(candidate);
            let misfit = ((candidate - current) as f64 - fit.mean_bay(x0, x1)).abs();
            if best.is_none_or(|(_, m)| misfit < m) {
                best = Some((candidate, misfit));
            }
            candidate += period;
        }
        current = best.expect("the next stop is always admissible").0;
        transfers.push(current);
    }
    // Drop the copy of stop 0 at `L`.
    transfers.pop();
    if transfers.len() > 1 {
        let last = stops[*transfers.last().expect("non-empty")];
        if fit.stops_between(last, l) < fit.bay_integral(last, l) / (2.0 * (l - last)) {
            transfers.pop();
        }
    }
    transfers
}

/// Stop locations with transfer stops and line assignments. A line index of
/// `None` marks a transfer stop, served by every line.
#[derive(Clone, Debug, PartialEq)]
pub struct StopPlan {
    pub length: f64,
    pub stops: Vec<f64>,
    pub transfers: Vec<usize>,
    pub lines_cw: u32,
    pub lines_ccw: u32,
    pub line_cw: Vec<Option<u8>>,
    pub line_ccw: Vec<Option<u8>>,
}

/// Deals non-transfer stops of every bay to lines `0, 1, .., m-1, 0, ..`
/// in position order.
pub fn assign_lines(length: f64, stops: Vec<f64>, transfers: Vec<usize>, lines_cw: u32, lines_ccw: u32) -> StopPlan {
    let n = stops.len();
    let mut line_cw = vec![None; n];
    let mut line_ccw = vec![None; n];
    for (k, &start) in transfers.iter().enumerate() {
        let end = transfers.get(k + 1).copied().unwrap_or(n);
        for (pos, i) in (start + 1..end).enumerate() {
            line_cw[i] = Some((pos % lines_cw as usize) as u8);
            line_ccw[i] = Some((pos % lines_ccw as usize) as u8);
        }
    }
    StopPlan { length, stops, transfers, lines_cw, lines_ccw, line_cw, line_ccw }
}

/// Full plan from grid profiles.
pub fn generate_plan(
    spacing: &[f64],
    bay: &[u32],
    lines_cw: u32,
    lines_ccw: u32,
    corridor: &Corridor,
) -> Result<(StopPlan, ProfileFit)> {
    if lines_cw == 0 || lines_ccw == 0 {
        return Err(Error::InvalidDesign("line counts must be positive".into()));
    }
    let bay: Vec<f64> = bay.iter().map(|t| *t as f64).collect();
    let fit = fit_profiles(spacing, &bay, corridor)?;
    let stops = place_stops(&fit);
    let transfers = select_transfer_stops(&stops, &fit, lines_cw, lines_ccw);
    Ok((assign_lines(corridor.length(), stops, transfers, lines_cw, lines_ccw), fit))
}

impl StopPlan {
    pub fn len(&self) -> usize {
        self.stops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stops.is_empty()
    }

    pub fn is_transfer(&self, i: usize) -> bool {
        self.line_cw[i].is_none()
    }

    pub fn lines(&self, dir: Direction) -> u32 {
        match dir {
            Direction::Cw => self.lines_cw,
            Direction::Ccw => self.lines_ccw,
        }
    }

    pub fn line_of(&self, dir: Direction, i: usize) -> Option<u8> {
        match dir {
            Direction::Cw => self.line_cw[i],
            Direction::Ccw => self.line_ccw[i],
        }
    }

    /// Whether `line` in direction `dir` stops at stop `i`.
    pub fn serves(&self, dir: Direction, line: u8, i: usize) -> bool {
        self.line_of(dir, i).is_none_or(|l| l == line)
    }

    /// Stops per bay, the wrap-around bay last.
    pub fn bay_sizes(&self) -> Vec<usize> {
        let n = self.len();
        self.transfers
            .iter()
            .enumerate()
            .map(|(k, &start)| self.transfers.get(k + 1).copied().unwrap_or(n) - start)
            .collect()
    }

    /// Length of the gap after stop `i` (wrapping to stop 0).
    pub fn gap_after(&self, i: usize) -> f64 {
        let next = if i + 1 < self.len() { self.stops[i + 1] } else { self.length + self.stops[0] };
        next - self.stops[i]
    }

    /// Index of the stop starting the gap containing `x`.
    fn gap_index(&self, x: f64) -> usize {
        self.stops.partition_point(|s| *s <= x).saturating_sub(1)
    }

    /// Spacing and bay size realized by the plan at each grid point.
    pub fn realized_profiles(&self, corridor: &Corridor) -> (Vec<f64>, Vec<u32>) {
        let sizes = self.bay_sizes();
        let mut spacing = Vec::with_capacity(corridor.cells());
        let mut bay = Vec::with_capacity(corridor.cells());
        for x in corridor.points() {
            let i = self.gap_index(x);
            spacing.push(self.gap_after(i));
            let k = self.transfers.partition_point(|u| *u <= i).saturating_sub(1);
            bay.push(sizes.get(k).copied().unwrap_or(1) as u32);
        }
        (spacing, bay)
    }

    /// Bays (except possibly the wrap-around one) whose non-transfer stop
    /// count is not a multiple of both line counts.
    pub fn divisibility_violations(&self) -> Vec<usize> {
        let period = lcm(self.lines_cw, self.lines_ccw) as usize;
        self.bay_sizes()
            .iter()
            .enumerate()
            .filter(|(_, size)| (**size - 1) % period != 0)
            .map(|(k, _)| k)
            .collect()
    }
}
