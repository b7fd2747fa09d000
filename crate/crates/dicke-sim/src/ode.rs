//! Embedded Dormand–Prince 5(4) stepper with cubic Hermite dense output.
//!
//! The state type is abstract: the exact backend integrates one dense
//! complex matrix, the collective backend a list of sector blocks. Butcher
//! coefficients are real, so states only need real axpy operations.
//!
//! The maximum step is capped at twice the output spacing so the cubic
//! Hermite interpolant stays well below the integration tolerance.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Linear-space operations the stepper needs from a state.
pub trait OdeState: Clone {
    fn set_zero(&mut self);
    /// self += a·x
    fn axpy(&mut self, a: f64, x: &Self);
    fn assign(&mut self, x: &Self);
    /// max_i |e_i| / (atol + rtol·max(|y0_i|, |y1_i|))
    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64;
}

impl OdeState for DMatrix<Complex64> {
    fn set_zero(&mut self) {
        self.fill(Complex64::ZERO);
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        let dst = self.as_mut_slice();
        let src = x.as_slice();
        for (d, s) in dst.iter_mut().zip(src) {
            *d += a * s;
        }
    }

    fn assign(&mut self, x: &Self) {
        self.as_mut_slice().copy_from_slice(x.as_slice());
    }

    fn error_ratio(err: &Self, y0: &Self, y1: &Self, atol: f64, rtol: f64) -> f64 {
        let mut worst = 0.0f64;
        for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
            let scale = atol + rtol * a.norm().max(b.norm());
            worst = worst.max(e.norm() / scale);
        }
        worst
    }
}

// Dormand-Prince 5(4) tableau (FSAL). The c column is unused because the
// Lindblad right-hand side is autonomous; kept for reference.
#[allow(dead_code)]
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 5th-order weights equal the last A row (FSAL); 4th-order embedded weights:
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone)]
pub struct StepperOpts {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on the step size (dense-output accuracy control).
    pub h_max: f64,
    pub max_steps: usize,
}

impl StepperOpts {
    pub fn new(rtol: f64, atol: f64, h_max: f64) -> Self {
        Self {
            rtol,
            atol,
            h_max,
            max_steps: 50_000_000,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct OdeDiagnostics {
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub rhs_evals: usize,
    /// Largest post-step projection correction (e.g. re-Hermitization).
    pub max_projection: f64,
}

/// Integrate dy/dt = rhs(y) from `grid[0]` to `grid.last()`, emitting the
/// solution at every grid point (dense output within accepted steps).
///
/// `project` is applied to the state after each accepted step and returns
/// the magnitude of the correction it made.
pub fn integrate<S, F, P, E>(
    mut rhs: F,
    mut project: P,
    y0: &S,
    grid: &[f64],
    opts: &StepperOpts,
    mut emit: E,
) -> Result<OdeDiagnostics>
where
    S: OdeState,
    F: FnMut(&S, &mut S),
    P: FnMut(&mut S) -> f64,
    E: FnMut(usize, f64, &S) -> Result<()>,
{
    assert!(grid.len() >= 2, "time grid needs at least two points");
    let t_end = *grid.last().unwrap();
    let mut t = grid[0];
    let mut diag = OdeDiagnostics::default();

    let mut y = y0.clone();
    let mut k: Vec<S> = (0..7)
        .map(|_| {
            let mut z = y0.clone();
            z.set_zero();
            z
        })
        .collect();
    let mut y_stage = y0.clone();
    let mut y_new = y0.clone();
    let mut err = y0.clone();
    let mut interp = y0.clone();

    rhs(&y, &mut k[0]);
    diag.rhs_evals += 1;

    emit(0, t, &y)?;
    let mut next_grid = 1usize;

    let mut h = opts.h_max.min((t_end - t) / 16.0).max(1e-8);
    let safety = 0.9;
    let min_scale = 0.2;
    let max_scale = 5.0;

    while t < t_end {
        if diag.steps_accepted + diag.steps_rejected >= opts.max_steps {
            return Err(Error::Integration {
                t,
                reason: format!("exceeded {} steps", opts.max_steps),
            });
        }
        if h < 1e-14 * t_end.max(1.0) {
            return Err(Error::Integration {
                t,
                reason: format!("step size underflow (h = {h:.3e})"),
            });
        }
        let h_step = h.min(t_end - t);

        // Stages 2..7 (k[0] holds f(t, y) via FSAL).
        for s in 1..7 {
            y_stage.assign(&y);
            for (j, a) in A[s].iter().enumerate().take(s) {
                if *a != 0.0 {
                    y_stage.axpy(a * h_step, &k[j]);
                }
            }
            let (_, rest) = k.split_at_mut(s);
            rhs(&y_stage, &mut rest[0]);
            diag.rhs_evals += 1;
        }

        // 5th-order solution is the last stage input state: y + h Σ a7j kj,
        // which equals y_stage after the loop above ran s = 6.
        y_new.assign(&y_stage);

        // Embedded error: err = h Σ (b5 − b4)_j k_j = y_new − (y + h Σ b4 k).
        err.assign(&y_new);
        err.axpy(-1.0, &y);
        for (j, b) in B4.iter().enumerate() {
            if *b != 0.0 {
                err.axpy(-b * h_step, &k[j]);
            }
        }

        let ratio = S::error_ratio(&err, &y, &y_new, opts.atol, opts.rtol);

        if ratio.is_finite() && ratio <= 1.0 {
            // Accept. k[6] = f(t+h, y_new) is the FSAL derivative.
            let correction = project(&mut y_new);
            diag.max_projection = diag.max_projection.max(correction);
            let t_new = t + h_step;

            // Dense output over (t, t_new]: cubic Hermite from the step
            // endpoints and their derivatives k[0], k[6].
            while next_grid < grid.len() && grid[next_grid] <= t_new + 1e-12 * t_end.max(1.0) {
                let tg = grid[next_grid].min(t_new);
                let theta = ((tg - t) / h_step).clamp(0.0, 1.0);
                let t2 = theta * theta;
                let t3 = t2 * theta;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + theta;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                interp.set_zero();
                interp.axpy(h00, &y);
                interp.axpy(h01, &y_new);
                interp.axpy(h10 * h_step, &k[0]);
                interp.axpy(h11 * h_step, &k[6]);
                emit(next_grid, grid[next_grid], &interp)?;
                next_grid += 1;
            }

            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            k.swap(0, 6); // FSAL: reuse the last stage as the next first stage
            diag.steps_accepted += 1;
        } else {
            diag.steps_rejected += 1;
        }

        let scale = if ratio.is_finite() && ratio > 0.0 {
            (safety * ratio.powf(-0.2)).clamp(min_scale, max_scale)
        } else if ratio == 0.0 {
            max_scale
        } else {
            min_scale // NaN/inf: back off hard
        };
        h = (h_step * scale).min(opts.h_max);
    }

    // Emit any grid points that coincide with t_end within roundoff.
    while next_grid < grid.len() {
        emit(next_grid, grid[next_grid], &y)?;
        next_grid += 1;
    }

    Ok(diag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn scalar_state(v: f64) -> DMatrix<Complex64> {
        DMatrix::from_element(1, 1, Complex64::new(v, 0.0))
    }

    #[test]
    fn exponential_decay_is_exact_to_tolerance() {
        let lambda = 0.7;
        let y0 = scalar_state(1.0);
        let grid: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let opts = StepperOpts::new(1e-10, 1e-12, 0.2);
        let mut worst = 0.0f64;
        integrate(
            |y, dy| {
                dy.assign(y);
                dy.axpy(-1.0 - lambda, y); // dy = -lambda * y
            },
            |_| 0.0,
            &y0,
            &grid,
            &opts,
            |_, t, y| {
                let exact = (-lambda * t).exp();
                worst = worst.max((y[(0, 0)].re - exact).abs());
                Ok(())
            },
        )
        .unwrap();
        assert!(worst < 2e-8, "max error {worst}");
    }

    #[test]
    fn oscillator_amplitude_preserved() {
        // y'' = -ω² y as a 2-component system; checks phase accuracy of the
        // dense output against the closed form.
        let omega = 3.0;
        let mut y0 = DMatrix::zeros(2, 1);
        y0[(0, 0)] = Complex64::new(1.0, 0.0);
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.025).collect();
        let opts = StepperOpts::new(1e-9, 1e-11, 0.05);
        let mut worst = 0.0f64;
        integrate(
            |y, dy| {
                dy.set_zero();
                let p = y[(0, 0)];
                let q = y[(1, 0)];
                dy[(0, 0)] = q;
                dy[(1, 0)] = -Complex64::new(omega * omega, 0.0) * p;
            },
            |_| 0.0,
            &y0,
            &grid,
            &opts,
            |_, t, y| {
                let exact = (omega * t).cos();
                worst = worst.max((y[(0, 0)].re - exact).abs());
                Ok(())
            },
        )
        .unwrap();
        assert!(worst < 1e-7, "max error {worst}");
    }

    #[test]
    fn projection_hook_is_applied() {
        let y0 = scalar_state(1.0);
        let grid = vec![0.0, 1.0];
        let opts = StepperOpts::new(1e-8, 1e-10, 0.5);
        let diag = integrate(
            |y, dy| {
                dy.set_zero();
                dy.axpy(-0.5, y);
            },
            |y| {
                // Projection that zeroes a (ficticious) imaginary part.
                let im = y[(0, 0)].im;
                y[(0, 0)] = Complex64::new(y[(0, 0)].re, 0.0);
                im.abs()
            },
            &y0,
            &grid,
            &opts,
            |_, _, _| Ok(()),
        )
        .unwrap();
        assert_abs_diff_eq!(diag.max_projection, 0.0, epsilon = 1e-15);
        assert!(diag.steps_accepted >= 2);
    }

    #[test]
    fn emits_every_grid_point_once() {
        let y0 = scalar_state(1.0);
        let grid: Vec<f64> = (0..=37).map(|i| i as f64 * 0.27).collect();
        let opts = StepperOpts::new(1e-8, 1e-10, 0.54);
        let mut seen = Vec::new();
        integrate(
            |y, dy| {
                dy.set_zero();
                dy.axpy(-1.0, y);
            },
            |_| 0.0,
            &y0,
            &grid,
            &opts,
            |idx, t, _| {
                seen.push((idx, t));
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), grid.len());
        for (i, (idx, t)) in seen.iter().enumerate() {
            assert_eq!(*idx, i);
            assert_abs_diff_eq!(*t, grid[i], epsilon = 1e-15);
        }
    }
}
