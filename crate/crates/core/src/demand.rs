//! Gridded demand on a loop corridor.
//!
//! The corridor `[0, L)` is split into `n` equal cells with centers
//! `x_j = (j + 0.5) Δx`. The OD density is stored as one value per cell pair
//! (row = origin cell, column = destination cell); every derived quantity is
//! a sum over cells, so the piecewise-constant density is integrated exactly.
//!
//! Travel direction follows the shorter way round: a trip is clockwise when
//! `0 < y - x <= L/2` modulo `L`. Cell pairs straddling a direction boundary
//! (the diagonal, and the half-loop offset) are split between directions by
//! the fraction of their mass on each side.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::{erf, floor};
use crate::{Direction, Error, Result};

const SQRT_3: f64 = 1.732_050_807_568_877_2;

/// Loop corridor of length `L` discretized into `n` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corridor {
    length: f64,
    cells: usize,
}

impl Corridor {
    pub fn new(length_km: f64, cells: usize) -> Result<Self> {
        if !(length_km.is_finite() && length_km > 0.0) {
            return Err(Error::InvalidCorridor(format!("length {length_km} must be positive")));
        }
        if cells < 4 {
            return Err(Error::InvalidCorridor(format!("need at least 4 cells, got {cells}")));
        }
        Ok(Self { length: length_km, cells })
    }

    /// Corridor whose cell width is `step_km`; `length_km / step_km` must be
    /// an integer.
    pub fn with_step(length_km: f64, step_km: f64) -> Result<Self> {
        if !(step_km.is_finite() && step_km > 0.0) {
            return Err(Error::InvalidCorridor(format!("grid step {step_km} must be positive")));
        }
        let ratio = length_km / step_km;
        let cells = floor(ratio + 0.5);
        if (ratio - cells).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::InvalidCorridor(format!(
                "length {length_km} is not a multiple of grid step {step_km}"
            )));
        }
        Self::new(length_km, cells as usize)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn step(&self) -> f64 {
        self.length / self.cells as f64
    }

    /// Center of cell `j` (zero-based).
    pub fn point(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.step()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.cells).map(|j| self.point(j))
    }

    /// Maps any position onto `[0, L)`.
    pub fn wrap(&self, x: f64) -> f64 {
        let r = x - self.length * floor(x / self.length);
        if r >= self.length {
            0.0
        } else {
            r
        }
    }

    /// Index of the cell containing `x` (after wrapping).
    pub fn cell_of(&self, x: f64) -> usize {
        let j = floor(self.wrap(x) / self.step()) as usize;
        j.min(self.cells - 1)
    }
}

/// Shorter of the two distances between `x` and `y` on a loop of length `l`.
pub fn circular_trip_length(x: f64, y: f64, l: f64) -> f64 {
    let d = (x - y).abs();
    d.min(l - d)
}

/// Distribution of trip origins.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OriginPdf {
    Uniform,
    /// Normal with mean `L/2` and the given standard deviation, truncated to
    /// `[0, L]` and renormalized.
    TruncatedNormal { std_km: f64 },
}

/// Uniform trip-length distribution given by its mean and standard deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripLengthPdf {
    pub mean_km: f64,
    pub std_km: f64,
}

impl TripLengthPdf {
    /// Support `[E - √3 σ, E + √3 σ]`.
    pub fn support(&self) -> (f64, f64) {
        (self.mean_km - SQRT_3 * self.std_km, self.mean_km + SQRT_3 * self.std_km)
    }
}

/// Factorized demand `λ(x, y) = p(x) θ(l(x, y)) Λ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DemandSpec {
    /// Total demand in each travel direction (trips/h).
    pub directional_demand: f64,
    pub origin: OriginPdf,
    pub trip_length: TripLengthPdf,
}

impl DemandSpec {
    pub fn validate(&self, corridor: &Corridor) -> Result<()> {
        if !(self.directional_demand.is_finite() && self.directional_demand >= 0.0) {
            return Err(Error::InvalidDemand(format!(
                "directional demand {} must be non-negative",
                self.directional_demand
            )));
        }
        if let OriginPdf::TruncatedNormal { std_km } = self.origin {
            if !(std_km > 0.0) || std_km.is_nan() {
                return Err(Error::InvalidDemand(format!("origin std {std_km} must be positive")));
            }
        }
        let (lo, hi) = self.trip_length.support();
        if !(self.trip_length.std_km > 0.0) {
            return Err(Error::InvalidDemand("trip length std must be positive".into()));
        }
        if !(lo > 0.0) {
            return Err(Error::InvalidDemand(format!("trip lengths must be positive (lower end {lo})")));
        }
        if hi > corridor.length() / 2.0 + 1e-12 {
            return Err(Error::InvalidDemand(format!(
                "trip lengths must not exceed half the loop (upper end {hi})"
            )));
        }
        Ok(())
    }
}

/// Demand aggregates at one grid point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PointDemand {
    pub p_cw: f64,
    pub q_cw: f64,
    pub p_ccw: f64,
    pub q_ccw: f64,
    pub c_cw: f64,
    pub c_ccw: f64,
}

impl PointDemand {
    /// Trip ends (origins plus destinations) per km in one direction.
    pub fn ends(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Cw => self.p_cw + self.q_cw,
            Direction::Ccw => self.p_ccw + self.q_ccw,
        }
    }

    pub fn total_ends(&self) -> f64 {
        self.p_cw + self.q_cw + self.p_ccw + self.q_ccw
    }

    pub fn flow(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Cw => self.c_cw,
            Direction::Ccw => self.c_ccw,
        }
    }
}

/// OD density on the grid plus its aggregates. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct DemandField {
    corridor: Corridor,
    /// Row-major `n x n`, trips/km²/h.
    lambda: Vec<f64>,
    /// Clockwise share of the mass in a cell pair, by cell offset
    /// `(dest - origin) mod n`.
    cw_share: Vec<f64>,
    p_cw: Vec<f64>,
    p_ccw: Vec<f64>,
    q_cw: Vec<f64>,
    q_ccw: Vec<f64>,
    c_cw: Vec<f64>,
    c_ccw: Vec<f64>,
    total_cw: f64,
    total_ccw: f64,
}

/// Mass of the triangular density centered at `c` with half-width `h` that
/// lies in `[lo, hi]`.
fn triangle_mass(c: f64, h: f64, lo: f64, hi: f64) -> f64 {
    let cdf = |u: f64| {
        if u <= c - h {
            0.0
        } else if u <= c {
            let t = u - c + h;
            t * t / (2.0 * h * h)
        } else if u < c + h {
            let t = c + h - u;
            1.0 - t * t / (2.0 * h * h)
        } else {
            1.0
        }
    };
    if hi <= lo {
        0.0
    } else {
        cdf(hi) - cdf(lo)
    }
}

fn normal_cdf(z: f64) -> f64 {
    0.5 * (1.0 + erf(z / core::f64::consts::SQRT_2))
}

/// Average origin density over each cell.
fn origin_cell_averages(origin: OriginPdf, corridor: &Corridor) -> Vec<f64> {
    let n = corridor.cells();
    let l = corridor.length();
    let dx = corridor.step();
    match origin {
        OriginPdf::Uniform => vec![1.0 / l; n],
        OriginPdf::TruncatedNormal { std_km } => {
            let mean = l / 2.0;
            let z = |x: f64| normal_cdf((x - mean) / std_km);
            let norm = z(l) - z(0.0);
            (0..n)
                .map(|j| {
                    let lo = j as f64 * dx;
                    let hi = lo + dx;
                    (z(hi) - z(lo)) / (norm * dx)
                })
                .collect()
        }
    }
}

/// Clockwise fraction of a cell pair's mass under a uniform density, by
/// cell offset.
fn geometric_cw_share(corridor: &Corridor) -> Vec<f64> {
    let n = corridor.cells();
    let l = corridor.length();
    let dx = corridor.step();
    (0..n)
        .map(|d| {
            let c = d as f64 * dx;
            (-1..=1)
                .map(|k| {
                    let base = k as f64 * l;
                    triangle_mass(c, dx, base, base + l / 2.0)
                })
                .sum()
        })
        .collect()
}

pub fn build_demand_field(spec: &DemandSpec, corridor: &Corridor) -> Result<DemandField> {
    spec.validate(corridor)?;
    let n = corridor.cells();
    let l = corridor.length();
    let dx = corridor.step();
    let (a, b) = spec.trip_length.support();
    let width = b - a;

    // Cell-pair averages of θ(l(x, y)), split by direction. The offset
    // u = y - x of a uniform point pair in cells at offset d is triangular
    // around d·Δx with half-width Δx.
    let mut theta = vec![0.0; n];
    let mut cw_share = geometric_cw_share(corridor);
    for d in 0..n {
        let c = d as f64 * dx;
        let mut cw = 0.0;
        let mut ccw = 0.0;
        for k in -1..=1 {
            let base = k as f64 * l;
            cw += triangle_mass(c, dx, base + a, base + b);
            ccw += triangle_mass(c, dx, base + l - b, base + l - a);
        }
        cw /= width;
        ccw /= width;
        theta[d] = cw + ccw;
        if theta[d] > 0.0 {
            cw_share[d] = cw / theta[d];
        }
    }

    let origin = origin_cell_averages(spec.origin, corridor);
    let mut lambda = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let d = (k + n - j) % n;
            lambda[j * n + k] = origin[j] * theta[d] * spec.directional_demand;
        }
    }
    Ok(DemandField::assemble(*corridor, lambda, cw_share))
}

impl DemandField {
    /// Field from an explicit `n x n` density matrix (row = origin cell).
    pub fn from_matrix(corridor: Corridor, lambda: Vec<f64>) -> Result<Self> {
        let n = corridor.cells();
        if lambda.len() != n * n {
            return Err(Error::GridMismatch { expected: n * n, actual: lambda.len() });
        }
        if let Some(bad) = lambda.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidDemand(format!("matrix entry {bad} must be finite and non-negative")));
        }
        let share = geometric_cw_share(&corridor);
        Ok(Self::assemble(corridor, lambda, share))
    }

    fn assemble(corridor: Corridor, lambda: Vec<f64>, cw_share: Vec<f64>) -> Self {
        let n = corridor.cells();
        let dx = corridor.step();
        let mut p_cw = vec![0.0; n];
        let mut p_ccw = vec![0.0; n];
        let mut q_cw = vec![0.0; n];
        let mut q_ccw = vec![0.0; n];
        let mut c_cw = vec![0.0; n];
        let mut c_ccw = vec![0.0; n];

        for a in 0..n {
            for d in 0..n {
                let b = (a + d) % n;
                let v = lambda[a * n + b];
                if v == 0.0 {
                    continue;
                }
                let cw = v * cw_share[d];
                let ccw = v - cw;
                p_cw[a] += cw * dx;
                q_cw[b] += cw * dx;
                p_ccw[a] += ccw * dx;
                q_ccw[b] += ccw * dx;

                // A trip passes the center of its own origin (or destination)
                // cell with probability 1/2, and every cell strictly between.
                let cw_flow = cw * dx * dx;
                if cw_flow > 0.0 {
                    if d == 0 {
                        c_cw[a] += 0.5 * cw_flow;
                    } else {
                        c_cw[a] += 0.5 * cw_flow;
                        c_cw[b] += 0.5 * cw_flow;
                        for i in 1..d {
                            c_cw[(a + i) % n] += cw_flow;
                        }
                    }
                }
                let ccw_flow = ccw * dx * dx;
                if ccw_flow > 0.0 {
                    let back = (n - d) % n;
                    if back == 0 {
                        c_ccw[a] += 0.5 * ccw_flow;
                    } else {
                        c_ccw[a] += 0.5 * ccw_flow;
                        c_ccw[b] += 0.5 * ccw_flow;
                        for i in 1..back {
                            c_ccw[(a + n - i) % n] += ccw_flow;
                        }
                    }
                }
            }
        }
        let total_cw = p_cw.iter().sum::<f64>() * dx;
        let total_ccw = p_ccw.iter().sum::<f64>() * dx;
        Self { corridor, lambda, cw_share, p_cw, p_ccw, q_cw, q_ccw, c_cw, c_ccw, total_cw, total_ccw }
    }

    pub fn corridor(&self) -> &Corridor {
        &self.corridor
    }

    pub fn cells(&self) -> usize {
        self.corridor.cells()
    }

    /// Density from origin cell `j` to destination cell `k`.
    pub fn lambda(&self, j: usize, k: usize) -> f64 {
        self.lambda[j * self.cells() + k]
    }

    pub fn lambda_matrix(&self) -> &[f64] {
        &self.lambda
    }

    /// Clockwise share of cell pairs at offset `(dest - origin) mod n`.
    pub fn cw_share(&self, offset: usize) -> f64 {
        self.cw_share[offset % self.cells()]
    }

    pub fn origins(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Cw => &self.p_cw,
            Direction::Ccw => &self.p_ccw,
        }
    }

    pub fn destinations(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Cw => &self.q_cw,
            Direction::Ccw => &self.q_ccw,
        }
    }

    pub fn flows(&self, dir: Direction) -> &[f64] {
        match dir {
            Direction::Cw => &self.c_cw,
            Direction::Ccw => &self.c_ccw,
        }
    }

    pub fn total(&self, dir: Direction) -> f64 {
        match dir {
            Direction::Cw => self.total_cw,
            Direction::Ccw => self.total_ccw,
        }
    }

    pub fn point(&self, j: usize) -> PointDemand {
        PointDemand {
            p_cw: self.p_cw[j],
            q_cw: self.q_cw[j],
            p_ccw: self.p_ccw[j],
            q_ccw: self.q_ccw[j],
            c_cw: self.c_cw[j],
            c_ccw: self.c_ccw[j],
        }
    }

    pub fn max_flow(&self, dir: Direction) -> f64 {
        self.flows(dir).iter().copied().fold(0.0, f64::max)
    }

    /// Sum of `λ Δx²` over all cell pairs (both directions).
    pub fn total_mass(&self) -> f64 {
        let dx = self.corridor.step();
        self.lambda.iter().sum::<f64>() * dx * dx
    }

    /// `λ(x, y) = λ(y, x)` for every cell pair.
    pub fn is_reversal_symmetric(&self, rel_tol: f64) -> bool {
        let n = self.cells();
        let scale = self.lambda.iter().copied().fold(0.0, f64::max);
        (0..n).all(|j| (0..j).all(|k| (self.lambda(j, k) - self.lambda(k, j)).abs() <= rel_tol * scale))
    }

    /// `λ(x, y) = λ(L - x, L - y)`: the counterclockwise demand is the mirror
    /// image of the clockwise demand.
    pub fn is_mirror_symmetric(&self, rel_tol: f64) -> bool {
        let n = self.cells();
        let scale = self.lambda.iter().copied().fold(0.0, f64::max);
        (0..n).all(|j| {
            (0..n).all(|k| (self.lambda(j, k) - self.lambda(n - 1 - j, n - 1 - k)).abs() <= rel_tol * scale)
        })
    }

    /// Directions are interchangeable, so an optimal design may use the same
    /// line count and headway both ways.
    pub fn is_directionally_symmetric(&self) -> bool {
        self.is_reversal_symmetric(1e-9) || self.is_mirror_symmetric(1e-9)
    }
}

/// Cells overlapping the unwrapped window `[lo, hi]`, as
/// `(cell index mod n, overlap length)` in increasing position.
fn window_cells(corridor: &Corridor, lo: f64, hi: f64) -> Vec<(usize, f64)> {
    let dx = corridor.step();
    let n = corridor.cells() as i64;
    let first = floor(lo / dx) as i64;
    let last = floor(hi / dx) as i64;
    let mut out = Vec::with_capacity((last - first + 1).max(0) as usize);
    for i in first..=last {
        let a = (i as f64 * dx).max(lo);
        let b = ((i + 1) as f64 * dx).min(hi);
        if b > a {
            out.push((i.rem_euclid(n) as usize, b - a));
        }
    }
    out
}

/// Average densities of clockwise and counterclockwise trips contained in a
/// bay of length `window` centered at `x`: the mass of the triangle
/// `{lo <= z <= y <= hi}` (or `y <= z` for counterclockwise) divided by the
/// bay length.
pub fn contained_trip_density(field: &DemandField, x: f64, window: f64) -> (f64, f64) {
    if window <= 0.0 {
        return (0.0, 0.0);
    }
    let cells = window_cells(field.corridor(), x - window / 2.0, x + window / 2.0);
    let mut cw = 0.0;
    let mut ccw = 0.0;
    for (ia, &(a, oa)) in cells.iter().enumerate() {
        let diag = field.lambda(a, a) * oa * oa / 2.0;
        cw += diag;
        ccw += diag;
        for &(b, ob) in &cells[ia + 1..] {
            cw += field.lambda(a, b) * oa * ob;
            ccw += field.lambda(b, a) * oa * ob;
        }
    }
    (cw / window, ccw / window)
}

/// Combinatorial factor turning a contained-trip density into a
/// backtracking-trip density: `(m-1)(T-1)² / (m T²)`.
pub fn backtrack_factor(lines: u32, bay: f64) -> f64 {
    let m = lines as f64;
    (m - 1.0) * (bay - 1.0) * (bay - 1.0) / (m * bay * bay)
}

/// Backtracking-trip densities at grid point `j` for bay size `bay` and
/// spacing `spacing` there.
pub fn backtrack_at(
    field: &DemandField,
    j: usize,
    spacing: f64,
    bay: f64,
    m_cw: u32,
    m_ccw: u32,
) -> Result<(f64, f64)> {
    if m_cw <= 1 && m_ccw <= 1 || bay <= 1.0 {
        return Ok((0.0, 0.0));
    }
    let window = bay * spacing;
    if window > field.corridor().length() / 2.0 {
        return Err(Error::DegenerateBay { point: j, window_km: window });
    }
    let (cw, ccw) = contained_trip_density(field, field.corridor().point(j), window);
    Ok((backtrack_factor(m_cw, bay) * cw, backtrack_factor(m_ccw, bay) * ccw))
}

/// Backtracking-trip densities `(b_cw, b_ccw)` at every grid point.
pub fn backtrack_densities(
    field: &DemandField,
    spacing: &[f64],
    bay: &[u32],
    m_cw: u32,
    m_ccw: u32,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = field.cells();
    for len in [spacing.len(), bay.len()] {
        if len != n {
            return Err(Error::GridMismatch { expected: n, actual: len });
        }
    }
    let mut b_cw = vec![0.0; n];
    let mut b_ccw = vec![0.0; n];
    for j in 0..n {
        if !(spacing[j] > 0.0) || bay[j] < 1 {
            return Err(Error::InvalidDesign(format!("grid point {j}: need s > 0 and T >= 1")));
        }
        let (cw, ccw) = backtrack_at(field, j, spacing[j], bay[j] as f64, m_cw, m_ccw)?;
        b_cw[j] = cw;
        b_ccw[j] = ccw;
    }
    Ok((b_cw, b_ccw))
}


#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn corridor() -> Corridor {
        Corridor::new(40.0, 80).unwrap()
    }

    fn spec(origin: OriginPdf) -> DemandSpec {
        DemandSpec {
            directional_demand: 1500.0,
            origin,
            trip_length: TripLengthPdf { mean_km: 8.0, std_km: 2.0 },
        }
    }

    #[test]
    fn trip_length_examples() {
        assert_eq!(circular_trip_length(0.0, 0.0, 40.0), 0.0);
        assert_eq!(circular_trip_length(0.0, 30.0, 40.0), 10.0);
        assert_eq!(circular_trip_length(5.0, 15.0, 40.0), 10.0);
    }

    #[test]
    fn corridor_rejects_bad_inputs() {
        assert!(Corridor::new(0.0, 80).is_err());
        assert!(Corridor::new(40.0, 3).is_err());
        assert!(Corridor::with_step(40.0, 0.3).is_err());
        let c = Corridor::with_step(40.0, 0.5).unwrap();
        assert_eq!(c.cells(), 80);
        assert_relative_eq!(c.point(0), 0.25);
        assert_eq!(c.cell_of(-0.1), 79);
    }

    #[test]
    fn uniform_origins_give_flat_densities() {
        let f = build_demand_field(&spec(OriginPdf::Uniform), &corridor()).unwrap();
        assert_relative_eq!(f.total(Direction::Cw), 1500.0, max_relative = 1e-12);
        assert_relative_eq!(f.total(Direction::Ccw), 1500.0, max_relative = 1e-12);
        for j in 0..80 {
            assert_relative_eq!(f.origins(Direction::Cw)[j], 37.5, max_relative = 1e-12);
            assert_relative_eq!(f.destinations(Direction::Ccw)[j], 37.5, max_relative = 1e-12);
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        let mut s = spec(OriginPdf::Uniform);
        s.trip_length = TripLengthPdf { mean_km: 2.0, std_km: 2.0 };
        assert!(build_demand_field(&s, &corridor()).is_err());
        s.trip_length = TripLengthPdf { mean_km: 18.0, std_km: 2.0 };
        assert!(build_demand_field(&s, &corridor()).is_err());
        let mut m = vec![1.0; 16];
        m[3] = -1.0;
        assert!(DemandField::from_matrix(Corridor::new(4.0, 4).unwrap(), m).is_err());
        assert!(DemandField::from_matrix(Corridor::new(4.0, 4).unwrap(), vec![1.0; 15]).is_err());
    }

    #[test]
    fn triangle_window_matches_closed_form() {
        // λ0 everywhere: contained mass = λ0 w²/2, density = λ0 w/2.
        let c = corridor();
        let f = DemandField::from_matrix(c, vec![2.0; 80 * 80]).unwrap();
        for w in [0.3, 0.75, 1.5, 4.2] {
            let (cw, ccw) = contained_trip_density(&f, c.point(5), w);
            assert_relative_eq!(cw, 2.0 * w / 2.0, max_relative = 1e-12);
            assert_relative_eq!(ccw, 2.0 * w / 2.0, max_relative = 1e-12);
        }
        // Window crossing the origin of the loop.
        let (cw, _) = contained_trip_density(&f, 0.1, 3.0);
        assert_relative_eq!(cw, 3.0, max_relative = 1e-12);
    }

    #[test]
    fn backtrack_vanishes_for_single_line_or_unit_bay() {
        let c = corridor();
        let f = build_demand_field(&spec(OriginPdf::TruncatedNormal { std_km: 4.0 }), &c).unwrap();
        let s = vec![0.5; 80];
        let (bc, bcc) = backtrack_densities(&f, &s, &vec![3; 80], 1, 1).unwrap();
        assert!(bc.iter().chain(&bcc).all(|v| *v == 0.0));
        let (bc, _) = backtrack_densities(&f, &s, &vec![3; 80], 1, 2).unwrap();
        assert!(bc.iter().all(|v| *v == 0.0));
        let (bc, bcc) = backtrack_densities(&f, &s, &vec![1; 80], 3, 3).unwrap();
        assert!(bc.iter().chain(&bcc).all(|v| *v == 0.0));
    }

    #[test]
    fn backtrack_uniform_example() {
        let c = corridor();
        let lambda0 = 3.0;
        let f = DemandField::from_matrix(c, vec![lambda0; 80 * 80]).unwrap();
        let (bc, _) = backtrack_densities(&f, &vec![0.5; 80], &vec![3; 80], 2, 2).unwrap();
        let expected = (1.0 * 4.0 / (2.0 * 9.0)) * lambda0 * 0.75;
        for v in bc {
            assert_relative_eq!(v, expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn oversized_bay_is_rejected() {
        let c = corridor();
        let f = DemandField::from_matrix(c, vec![1.0; 80 * 80]).unwrap();
        let err = backtrack_densities(&f, &vec![1.0; 80], &vec![25; 80], 2, 2).unwrap_err();
        assert!(matches!(err, Error::DegenerateBay { .. }));
    }
}
