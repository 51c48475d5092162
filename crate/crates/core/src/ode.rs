//! Adaptive Dormand–Prince 5(4) integration of scalar ODEs.
//!
//! Only scalar problems appear in the travelling-wave construction, so the
//! integrator works on `f64` directly. It may run in either direction.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative tolerance.
    pub rtol: f64,
    /// Absolute tolerance.
    pub atol: f64,
    /// Largest step magnitude.
    pub max_step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rtol: 1e-11,
            atol: 1e-13,
            max_step: 0.05,
        }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// 5th minus embedded 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `y' = f(t, y)` from `(t0, y0)` and returns `y` at each of `outputs`.
///
/// `outputs` must be monotone in the direction of integration starting at or
/// beyond `t0`. Errors from `f` abort the integration.
pub fn integrate<F>(
    mut f: F,
    t0: f64,
    y0: f64,
    outputs: &[f64],
    tol: Tolerances,
) -> Result<Vec<f64>>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    let mut out = Vec::with_capacity(outputs.len());
    let Some(&last) = outputs.last() else {
        return Ok(out);
    };
    let dir = if last >= t0 { 1.0 } else { -1.0 };
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, y)?;
    let mut h = tol.max_step.min(1e-3);
    for &target in outputs {
        while dir * (target - t) > 0.0 {
            let remaining = (target - t).abs();
            let mut step = h.min(remaining);
            let last_step = step >= remaining;
            if last_step {
                step = remaining;
            }
            let s = dir * step;
            let k2 = f(t + C2 * s, y + s * A21 * k1)?;
            let k3 = f(t + C3 * s, y + s * (A31 * k1 + A32 * k2))?;
            let k4 = f(t + C4 * s, y + s * (A41 * k1 + A42 * k2 + A43 * k3))?;
            let k5 = f(
                t + C5 * s,
                y + s * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4),
            )?;
            let k6 = f(
                t + s,
                y + s * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5),
            )?;
            let y_new = y + s * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6);
            let k7 = f(t + s, y_new)?;
            let err_est = s * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
            let scale = tol.atol + tol.rtol * y.abs().max(y_new.abs());
            let err = (err_est / scale).abs();
            if !err.is_finite() {
                h = step * 0.2;
            } else if err <= 1.0 {
                t = if last_step { target } else { t + s };
                y = y_new;
                k1 = k7;
                let grow = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * libm::pow(err, -0.2)).clamp(0.2, 5.0)
                };
                // a clipped final step says nothing about the admissible size
                if !last_step || grow < 1.0 {
                    h = (step * grow).min(tol.max_step);
                }
            } else {
                h = step * (0.9 * libm::pow(err, -0.2)).clamp(0.1, 0.9);
            }
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { at: t });
            }
        }
        out.push(y);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let ts = [0.5, 1.0, 2.0];
        let ys = integrate(|_, y| Ok(y), 0.0, 1.0, &ts, Tolerances::default()).unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y - libm::exp(*t)).abs() < 1e-9 * libm::exp(*t));
        }
    }

    #[test]
    fn backward_direction() {
        // y' = -2 t y, y(1) = e^{-1}; exact y = e^{-t^2}
        let ts = [0.5, 0.0, -1.0];
        let ys = integrate(
            |t, y| Ok(-2.0 * t * y),
            1.0,
            libm::exp(-1.0),
            &ts,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in ts.iter().zip(&ys) {
            assert!((y - libm::exp(-t * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn output_at_start_is_initial_value() {
        let ys = integrate(|_, y| Ok(y), 2.0, 3.0, &[2.0], Tolerances::default()).unwrap();
        assert_eq!(ys, [3.0]);
    }

    #[test]
    fn rhs_error_propagates() {
        let r = integrate(
            |_, y| {
                if y > 2.0 {
                    Err(Error::Stiffness {
                        value: y,
                        what: "test",
                    })
                } else {
                    Ok(y)
                }
            },
            0.0,
            1.0,
            &[5.0],
            Tolerances::default(),
        );
        assert!(matches!(r, Err(Error::Stiffness { .. })));
    }
}
