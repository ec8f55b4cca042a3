//! Adaptive three-stage Radau IIA integrator (order 5) for linear systems
//! `ẏ = A(t) y`.
//!
//! The scheme is L-stable and stiffly accurate, so step sizes follow the
//! variation of the solution rather than the size of `A`. For a linear
//! system a step is itself a linear map; [`radau_step`] returns that map.
//! Local error is estimated by step doubling and controlled per unit time.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

const SQRT6: f64 = 2.449_489_742_783_178;

const NODES: [f64; 3] = [(4.0 - SQRT6) / 10.0, (4.0 + SQRT6) / 10.0, 1.0];

const COEFFS: [[f64; 3]; 3] = [
    [
        (88.0 - 7.0 * SQRT6) / 360.0,
        (296.0 - 169.0 * SQRT6) / 1800.0,
        (-2.0 + 3.0 * SQRT6) / 225.0,
    ],
    [
        (296.0 + 169.0 * SQRT6) / 1800.0,
        (88.0 + 7.0 * SQRT6) / 360.0,
        (-2.0 - 3.0 * SQRT6) / 225.0,
    ],
    [(16.0 - SQRT6) / 36.0, (16.0 + SQRT6) / 36.0, 1.0 / 9.0],
];

/// Richardson denominator `2^5 − 1` for the step-doubling estimate.
const RICHARDSON: f64 = 31.0;

const MIN_STEP: f64 = 1e-13;

/// The step map from `t` to `t + h`.
pub fn radau_step<F>(generator: &F, t: f64, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let a: Vec<DMatrix<f64>> = NODES
        .iter()
        .map(|c| generator(t + c * h))
        .collect::<Result<_>>()?;
    let n = a[0].nrows();
    let mut system = DMatrix::identity(3 * n, 3 * n);
    for i in 0..3 {
        for (j, aj) in a.iter().enumerate() {
            let mut block = system.view_mut((i * n, j * n), (n, n));
            block -= aj * (h * COEFFS[i][j]);
        }
    }
    let mut rhs = DMatrix::zeros(3 * n, n);
    for i in 0..3 {
        rhs.view_mut((i * n, 0), (n, n)).fill_with_identity();
    }
    let stages = system.lu().solve(&rhs).ok_or(Error::StepFailure { t, h })?;
    Ok(stages.view((2 * n, 0), (n, n)).into_owned())
}

/// Puts the rounding defect of each column sum back on the diagonal.
fn restore_unit_column_sums(m: &mut DMatrix<f64>) {
    for j in 0..m.ncols() {
        let defect = 1.0 - m.column(j).sum();
        m[(j, j)] += defect;
    }
}

/// Integrates `y` from `grid[0]` through every later grid time, returning
/// the state at each grid point (the first entry is `y0`). Steps are
/// shortened to land on grid points exactly.
pub fn propagate<F>(generator: &F, y0: &DMatrix<f64>, grid: &[f64], tol: f64) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    propagate_impl(generator, y0, grid, tol, false)
}

/// As [`propagate`], for generators whose columns sum to zero: each step
/// map is corrected to exact unit column sums so `Σ_i y_i` is conserved to
/// rounding.
pub fn propagate_conservative<F>(generator: &F, y0: &DMatrix<f64>, grid: &[f64], tol: f64) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    propagate_impl(generator, y0, grid, tol, true)
}

fn propagate_impl<F>(generator: &F, y0: &DMatrix<f64>, grid: &[f64], tol: f64, conservative: bool) -> Result<Vec<DMatrix<f64>>>
where
    F: Fn(f64) -> Result<DMatrix<f64>>,
{
    let step_map = |t: f64, h: f64| -> Result<DMatrix<f64>> {
        let mut m = radau_step(generator, t, h)?;
        if conservative {
            restore_unit_column_sums(&mut m);
        }
        Ok(m)
    };
    let mut out = Vec::with_capacity(grid.len());
    let Some(&start) = grid.first() else {
        return Ok(out);
    };
    out.push(y0.clone());
    let mut y = y0.clone();
    let mut t = start;
    let span = grid.last().unwrap() - start;
    let mut h = (span / 64.0).max(1e-6);

    for &target in &grid[1..] {
        if target < t {
            return Err(Error::InvalidArgument("grid must be non-decreasing".into()));
        }
        while target - t > MIN_STEP * target.abs().max(1.0) {
            let clamped = h >= target - t;
            let step = if clamped { target - t } else { h };
            if step < MIN_STEP {
                return Err(Error::StepFailure { t, h: step });
            }
            let big = step_map(t, step)? * &y;
            let half = step_map(t, step / 2.0)? * &y;
            let fine = step_map(t + step / 2.0, step / 2.0)? * half;
            let err = (&fine - &big).amax() / RICHARDSON;
            if !err.is_finite() {
                h = step / 4.0;
                continue;
            }
            // below this the estimate measures rounding, not truncation
            let noise = 64.0 * f64::EPSILON * fine.amax();
            let allowed = (tol * step).max(noise);
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * (allowed / err).powf(0.2)).clamp(0.2, 4.0)
            };
            if err <= allowed {
                t = if clamped { target } else { t + step };
                y = fine;
                if !clamped || factor < 1.0 {
                    h = step * factor;
                }
            } else {
                h = step * factor;
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn airy(t: f64) -> Result<DMatrix<f64>> {
        Ok(DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -10.0 * (1.0 + t), 0.0]))
    }

    fn fixed_steps(n: usize) -> DMatrix<f64> {
        let h = 1.0 / n as f64;
        let mut y = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        for k in 0..n {
            y = radau_step(&airy, k as f64 * h, h).unwrap() * y;
        }
        y
    }

    #[test]
    fn fifth_order_convergence() {
        let reference = fixed_steps(2048);
        let errors: Vec<f64> = [8, 16, 32]
            .iter()
            .map(|&n| (fixed_steps(n) - &reference).amax())
            .collect();
        for pair in errors.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order > 4.6, "observed order {order}");
        }
    }

    #[test]
    fn adaptive_hits_tolerance_and_grid() {
        // rotation at angular speed 1 + t², closed form
        let rotation = |t: f64| -> Result<DMatrix<f64>> {
            let w = 1.0 + t * t;
            Ok(DMatrix::from_row_slice(2, 2, &[0.0, -w, w, 0.0]))
        };
        let y0 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let grid = [0.0, 0.25, 0.5, 1.0];
        let out = propagate(&rotation, &y0, &grid, 1e-10).unwrap();
        assert_eq!(out.len(), 4);
        for (y, &t) in out.iter().zip(&grid) {
            let angle = t + t * t * t / 3.0;
            assert!((y[0] - angle.cos()).abs() < 1e-9);
            assert!((y[1] - angle.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn stiff_two_state_relaxation() {
        let a = DMatrix::from_row_slice(2, 2, &[-1e6, 1.0, 1e6, -1.0]);
        let gen = |_t: f64| Ok(a.clone());
        let y0 = DMatrix::identity(2, 2);
        let out = propagate_conservative(&gen, &y0, &[0.0, 1.0], 1e-10).unwrap();
        // exp of [[-a, b], [a, -b]] is π1ᵀ + e^{-(a+b)}(I - π1ᵀ), π = (b, a)/(a+b)
        let (a_, b_) = (1e6, 1.0);
        let pi = [b_ / (a_ + b_), a_ / (a_ + b_)];
        let reference = DMatrix::from_fn(2, 2, |i, _| pi[i]);
        let err = (&out[1] - reference).amax();
        assert!(err < 1e-10, "{err}");
        for j in 0..2 {
            assert!((out[1].column(j).sum() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empty_interval_is_identity() {
        let y0 = DMatrix::from_column_slice(2, 1, &[0.3, 0.7]);
        let out = propagate(&airy, &y0, &[0.4, 0.4], 1e-8).unwrap();
        assert_eq!(out[1], y0);
    }
}
