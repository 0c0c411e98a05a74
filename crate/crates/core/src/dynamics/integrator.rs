//! Adaptive Dormand–Prince 5(4) for complex-valued systems.
//!
//! Steps are clamped to land on every requested sample time. The error
//! estimate is the max norm scaled by `atol + rtol·|y|`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

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
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step, seconds.
    pub initial_step: f64,
    pub max_step: f64,
    pub safety: f64,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-8, initial_step: 1e-12, max_step: f64::INFINITY, safety: 0.9, max_steps: 50_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// Integrates `dy/dt = rhs(t, y)` from `t0` through the increasing
/// `samples`, calling `observe(i, t_i, y)` at each. `post_step` may modify the
/// state after each accepted step and returns whether it did.
pub fn integrate<F, P, O>(
    y: &mut [C64],
    t0: f64,
    samples: &[f64],
    cfg: &IntegratorConfig,
    mut rhs: F,
    mut post_step: P,
    mut observe: O,
) -> Result<IntegratorStats>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    P: FnMut(&mut [C64]) -> bool,
    O: FnMut(usize, f64, &[C64]) -> Result<()>,
{
    if samples.windows(2).any(|w| w[1] <= w[0]) || samples.first().map_or(false, |&s| s < t0) {
        return Err(Error::Domain("sample times must be increasing and not before t0".into()));
    }
    let n = y.len();
    let zero = C64::new(0.0, 0.0);
    let mut k: Vec<Vec<C64>> = (0..7).map(|_| vec![zero; n]).collect();
    let mut stage = vec![zero; n];
    let mut y_new = vec![zero; n];
    let mut stats = IntegratorStats::default();

    let mut t = t0;
    let mut h = cfg.initial_step.min(cfg.max_step);
    rhs(t, y, &mut k[0]);
    stats.evaluations += 1;
    let mut after_reject = false;

    for (i, &target) in samples.iter().enumerate() {
        while t < target {
            if stats.accepted + stats.rejected >= cfg.max_steps {
                return Err(Error::Convergence(format!("exceeded {} steps at t = {t:e}", cfg.max_steps)));
            }
            let remaining = target - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h };
            let min_step = 64.0 * f64::EPSILON * t.abs().max(target.abs());
            if step < min_step {
                return Err(Error::Stiffness { t, h: step, steps: stats.accepted });
            }

            macro_rules! combine {
                ($out:expr, $($coef:expr => $idx:expr),+) => {
                    for j in 0..n {
                        $out[j] = y[j] + step * (C64::new(0.0, 0.0) $(+ $coef * k[$idx][j])+);
                    }
                };
            }
            combine!(stage, A21 => 0);
            rhs(t + C2 * step, &stage, &mut k[1]);
            combine!(stage, A31 => 0, A32 => 1);
            rhs(t + C3 * step, &stage, &mut k[2]);
            combine!(stage, A41 => 0, A42 => 1, A43 => 2);
            rhs(t + C4 * step, &stage, &mut k[3]);
            combine!(stage, A51 => 0, A52 => 1, A53 => 2, A54 => 3);
            rhs(t + C5 * step, &stage, &mut k[4]);
            combine!(stage, A61 => 0, A62 => 1, A63 => 2, A64 => 3, A65 => 4);
            rhs(t + step, &stage, &mut k[5]);
            combine!(y_new, B1 => 0, B3 => 2, B4 => 3, B5 => 4, B6 => 5);
            let t_new = if landing { target } else { t + step };
            rhs(t_new, &y_new, &mut k[6]);
            stats.evaluations += 6;

            let mut err = 0.0f64;
            for j in 0..n {
                let e = step * (E1 * k[0][j] + E3 * k[2][j] + E4 * k[3][j] + E5 * k[4][j] + E6 * k[5][j] + E7 * k[6][j]);
                let scale = cfg.atol + cfg.rtol * y[j].norm().max(y_new[j].norm());
                err = err.max(e.norm() / scale);
            }

            if err <= 1.0 {
                y.copy_from_slice(&y_new);
                t = t_new;
                stats.accepted += 1;
                if post_step(y) {
                    rhs(t, y, &mut k[0]);
                    stats.evaluations += 1;
                } else {
                    k.swap(0, 6);
                }
                let grow = if err == 0.0 { 10.0 } else { (cfg.safety * err.powf(-0.2)).clamp(0.2, 10.0) };
                let grow = if after_reject { grow.min(1.0) } else { grow };
                after_reject = false;
                // a clamped landing step says nothing about the natural size
                if !landing || step >= h {
                    h = (step * grow).min(cfg.max_step);
                }
            } else {
                stats.rejected += 1;
                after_reject = true;
                h = step * (cfg.safety * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        observe(i, t, y)?;
    }
    Ok(stats)
}
