//! Periodic cubic interpolation on a uniform grid.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::floor;

/// Periodic cubic spline through values at `(j + 0.5) h`, `j = 0..n`, with
/// period `n h`. Spans can be switched to linear interpolation.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSpline {
    period: f64,
    values: Vec<f64>,
    /// Second derivatives at the knots.
    curvature: Vec<f64>,
    linear: Vec<bool>,
}

/// Solves the cyclic system `M[j-1] + 4 M[j] + M[j+1] = rhs[j]`.
fn solve_cyclic(rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    // Sherman–Morrison on the tridiagonal part with corner terms folded in.
    let gamma = -4.0;
    let mut diag = vec![4.0; n];
    diag[0] -= gamma;
    diag[n - 1] -= 1.0 / gamma;
    let thomas = |d: &[f64], r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = 1.0 / d[0];
        x[0] = r[0] / d[0];
        for i in 1..n {
            let denom = d[i] - c[i - 1];
            c[i] = 1.0 / denom;
            x[i] = (r[i] - x[i - 1]) / denom;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };
    let y = thomas(&diag, rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = 1.0;
    let z = thomas(&diag, &u);
    let factor = (y[0] + y[n - 1] / gamma) / (1.0 + z[0] + z[n - 1] / gamma);
    y.iter().zip(&z).map(|(a, b)| a - factor * b).collect()
}

impl PeriodicSpline {
    pub fn new(period: f64, values: &[f64]) -> Self {
        let n = values.len();
        assert!(n >= 3, "periodic spline needs at least three knots");
        let h = period / n as f64;
        let rhs: Vec<f64> = (0..n)
            .map(|j| 6.0 * (values[(j + 1) % n] - 2.0 * values[j] + values[(j + n - 1) % n]) / (h * h))
            .collect();
        Self { period, values: values.to_vec(), curvature: solve_cyclic(&rhs), linear: vec![false; n] }
    }

    /// Spline whose spans dipping to `floor_value` or below are replaced by
    /// linear interpolation. Returns the number of replaced spans.
    pub fn with_floor(period: f64, values: &[f64], floor_value: f64) -> (Self, usize) {
        let mut spline = Self::new(period, values);
        let mut replaced = 0;
        for span in 0..values.len() {
            let low = (0..=32).map(|k| spline.eval_span(span, k as f64 / 32.0)).fold(f64::INFINITY, f64::min);
            if low <= floor_value {
                spline.linear[span] = true;
                replaced += 1;
            }
        }
        (spline, replaced)
    }

    fn step(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    fn eval_span(&self, span: usize, t: f64) -> f64 {
        let n = self.values.len();
        let next = (span + 1) % n;
        let (a, b) = (self.values[span], self.values[next]);
        let lin = (1.0 - t) * a + t * b;
        if self.linear[span] {
            return lin;
        }
        let h = self.step();
        let u = 1.0 - t;
        lin + h * h / 6.0 * ((u * u * u - u) * self.curvature[span] + (t * t * t - t) * self.curvature[next])
    }

    pub fn eval(&self, x: f64) -> f64 {
        let h = self.step();
        let n = self.values.len();
        let shifted = x / h - 0.5;
        let k = floor(shifted);
        let t = shifted - k;
        let span = (k as i64).rem_euclid(n as i64) as usize;
        self.eval_span(span, t)
    }

    pub fn linear_spans(&self) -> usize {
        self.linear.iter().filter(|l| **l).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn constant_is_reproduced() {
        let s = PeriodicSpline::new(40.0, &vec![0.5; 80]);
        for k in 0..400 {
            assert_abs_diff_eq!(s.eval(k as f64 * 0.1), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn passes_through_knots_and_wraps() {
        let values: Vec<f64> = (0..40).map(|j| 1.0 + (j as f64 * 0.37).sin()).collect();
        let s = PeriodicSpline::new(20.0, &values);
        for (j, v) in values.iter().enumerate() {
            assert_abs_diff_eq!(s.eval((j as f64 + 0.5) * 0.5), *v, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(s.eval(0.1), s.eval(20.1), epsilon = 1e-12);
        assert_abs_diff_eq!(s.eval(-0.2), s.eval(19.8), epsilon = 1e-12);
    }

    #[test]
    fn smooth_periodic_function_is_accurate() {
        let l = 40.0;
        let g = |x: f64| 2.0 + (2.0 * core::f64::consts::PI * x / l).cos();
        let values: Vec<f64> = (0..80).map(|j| g((j as f64 + 0.5) * 0.5)).collect();
        let s = PeriodicSpline::new(l, &values);
        for k in 0..800 {
            let x = k as f64 * 0.05;
            assert_abs_diff_eq!(s.eval(x), g(x), epsilon = 1e-6);
        }
    }

    #[test]
    fn undershooting_spans_fall_back_to_linear() {
        let mut values = vec![0.05; 20];
        values[10] = 5.0;
        let (s, replaced) = PeriodicSpline::with_floor(10.0, &values, 0.0);
        assert!(replaced > 0);
        for k in 0..1000 {
            assert!(s.eval(k as f64 * 0.01) > 0.0);
        }
    }
}
