//! Dormand-Prince 5(4) embedded Runge-Kutta pair.
//!
//! Only the single-step kernel and the step-size controller live here; the
//! scattering driver in the parent module owns termination, sampling and
//! event location.

use crate::error::Result;

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
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// difference between the 5th and 4th order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Result of one trial step.
#[derive(Debug, Clone, Copy)]
pub struct Trial<const N: usize> {
    pub y: [f64; N],
    /// Derivative at the new point (first stage of the next step).
    pub dy: [f64; N],
    /// Scaled RMS error norm; the step is acceptable when `<= 1`.
    pub error: f64,
}

fn combo<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o += h * acc;
    }
    out
}

/// One Dormand-Prince step of size `h` from `(t, y)` with `dy = f(t, y)`.
pub fn step<const N: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &[f64; N],
    dy: &[f64; N],
    h: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trial<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k1 = dy;
    let k2 = rhs(t + C2 * h, &combo(y, h, &[(A21, k1)]))?;
    let k3 = rhs(t + C3 * h, &combo(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(
        t + C4 * h,
        &combo(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]),
    )?;
    let k5 = rhs(
        t + C5 * h,
        &combo(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
    )?;
    let k6 = rhs(
        t + h,
        &combo(
            y,
            h,
            &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        ),
    )?;
    let y_new = combo(
        y,
        h,
        &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
    );
    let k7 = rhs(t + h, &y_new)?;

    let mut sum = 0.0;
    for i in 0..N {
        let err = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol + rtol * y[i].abs().max(y_new[i].abs());
        sum += (err / sc) * (err / sc);
    }
    Ok(Trial {
        y: y_new,
        dy: k7,
        error: (sum / N as f64).sqrt(),
    })
}

/// Step-size factor from an error norm (order 5 controller with safety).
pub fn next_factor(error: f64, accepted_last: bool) -> f64 {
    const SAFETY: f64 = 0.9;
    const MIN_FACTOR: f64 = 0.2;
    let max_factor = if accepted_last { 5.0 } else { 1.0 };
    if error == 0.0 {
        return max_factor;
    }
    (SAFETY * error.powf(-0.2)).clamp(MIN_FACTOR, max_factor)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_exponential_to_high_accuracy() {
        let mut f = |_t: f64, y: &[f64; 1]| Ok([y[0]]);
        let (mut t, mut y) = (0.0f64, [1.0]);
        let mut dy = f(t, &y).unwrap();
        let mut h: f64 = 1e-3;
        let mut accepted;
        while t < 1.0 {
            h = h.min(1.0 - t);
            let trial = step(&mut f, t, &y, &dy, h, 1e-12, 1e-12).unwrap();
            if trial.error <= 1.0 {
                t += h;
                y = trial.y;
                dy = trial.dy;
                accepted = true;
            } else {
                accepted = false;
            }
            h *= next_factor(trial.error, accepted);
        }
        assert!((y[0] - 1f64.exp()).abs() < 1e-10);
    }

    type Scalar<'a> = dyn FnMut(f64, &[f64; 1]) -> Result<[f64; 1]> + 'a;

    #[test]
    fn fifth_order_convergence() {
        // y' = cos t, one step of size h: local error ~ h^6
        let mut f = |t: f64, _y: &[f64; 1]| Ok([t.cos()]);
        let err = |h: f64, f: &mut Scalar| {
            let mut g = |t: f64, y: &[f64; 1]| f(t, y);
            let s = step(&mut g, 0.0, &[0.0], &[1.0], h, 1.0, 1.0).unwrap();
            (s.y[0] - h.sin()).abs()
        };
        let ratio = err(0.2, &mut f) / err(0.1, &mut f);
        assert!(ratio > 40.0, "ratio {ratio}");
    }
}
