//! Adaptive explicit Runge-Kutta integration (Dormand-Prince 5(4)).

use crate::error::{Error, Result};

/// Butcher tableau of the Dormand-Prince 5(4) pair.
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
/// 5th-order solution weights (same as the last A row, FSAL).
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
/// Embedded 4th-order weights.
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 50_000_000,
        }
    }
}

/// Integrate y' = f(t, y) from `t0` across the sorted `t_samples`, returning
/// the state at every sample time. `post_step` runs after each accepted
/// step (used to re-symmetrize density matrices).
pub fn integrate<F, P>(
    mut f: F,
    t0: f64,
    y0: &[f64],
    t_samples: &[f64],
    opts: &OdeOptions,
    mut post_step: P,
) -> Result<Vec<Vec<f64>>>
where
    F: FnMut(f64, &[f64], &mut [f64]),
    P: FnMut(&mut [f64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = t0;
    let mut out = Vec::with_capacity(t_samples.len());
    let t_end = *t_samples.last().unwrap_or(&t0);
    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);

    let mut k: Vec<Vec<f64>> = (0..7).map(|_| vec![0.0; n]).collect();
    let mut ytmp = vec![0.0; n];
    let mut yerr = vec![0.0; n];

    // Initial step from the magnitude of the first derivative.
    f(t, &y, &mut k[0]);
    let d0: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-10);
    let d1: f64 = k[0].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut h = if d1 > 0.0 {
        (0.01 * d0 / d1).min(span)
    } else {
        span / 100.0
    };

    let mut steps = 0usize;
    for &ts in t_samples {
        if ts < t {
            return Err(Error::InvalidState("sample grid not sorted".into()));
        }
        while t < ts {
            if steps >= opts.max_steps {
                return Err(Error::StepSizeUnderflow {
                    time: t,
                    ratio: d1 * (t_end - t),
                });
            }
            let h_step = h.min(ts - t);
            // Stages (k[0] holds f(t, y) from FSAL).
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = A[s][j];
                        if a != 0.0 {
                            acc += a * kj[i];
                        }
                    }
                    ytmp[i] = y[i] + h_step * acc;
                }
                let (head, tail) = k.split_at_mut(s);
                let _ = head;
                f(t + C[s] * h_step, &ytmp, &mut tail[0]);
            }
            // 5th-order candidate and embedded error.
            let mut err_norm: f64 = 0.0;
            for i in 0..n {
                let mut y5 = 0.0;
                let mut e = 0.0;
                for (j, kj) in k.iter().enumerate() {
                    y5 += B[j] * kj[i];
                    e += (B[j] - B4[j]) * kj[i];
                }
                let ynew = y[i] + h_step * y5;
                yerr[i] = ynew;
                let sc = opts.atol + opts.rtol * y[i].abs().max(ynew.abs());
                let r = h_step * e / sc;
                err_norm += r * r;
            }
            err_norm = (err_norm / n as f64).sqrt();

            if err_norm <= 1.0 {
                t += h_step;
                std::mem::swap(&mut y, &mut yerr);
                post_step(&mut y);
                f(t, &y, &mut k[0]);
                steps += 1;
            }
            let factor = if err_norm > 0.0 {
                (0.9 * err_norm.powf(-0.2)).clamp(0.2, 5.0)
            } else {
                5.0
            };
            h = (h_step * factor).min(span);
            if h < 1e-14 * span {
                return Err(Error::StepSizeUnderflow {
                    time: t,
                    ratio: (t_end - t) / h,
                });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}
