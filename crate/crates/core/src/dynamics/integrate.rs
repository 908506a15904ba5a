//! Fixed-step RK4 and adaptive Runge–Kutta–Fehlberg 4(5) for autonomous systems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rkf45,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorOptions {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub step: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self {
            method: Method::Rkf45,
            step: 1e-2,
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_steps: 1_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn rk4(step: f64) -> Self {
        Self {
            method: Method::Rk4,
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.step) || !positive(self.abs_tol) || !positive(self.rel_tol) {
            return Err(Error::InvalidArgument(
                "integrator step and tolerances must be positive".into(),
            ));
        }
        if self.max_steps == 0 {
            return Err(Error::InvalidArgument("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub y: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
}

/// Integrates `y' = f(y)` from `0` to `t`.
pub fn integrate<F>(mut f: F, y0: &[f64], t: f64, opts: &IntegratorOptions) -> Result<Solution>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    opts.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("evolution time must be ≥ 0, got {t}")));
    }
    if t == 0.0 {
        return Ok(Solution {
            y: y0.to_vec(),
            accepted: 0,
            rejected: 0,
        });
    }
    match opts.method {
        Method::Rk4 => rk4(&mut f, y0, t, opts),
        Method::Rkf45 => rkf45(&mut f, y0, t, opts),
    }
}

fn axpy_into(out: &mut [f64], y: &[f64], terms: &[(f64, &[f64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = y[i];
        for (w, k) in terms {
            acc += w * k[i];
        }
        *o = acc;
    }
}

fn rk4<F>(f: &mut F, y0: &[f64], t: f64, opts: &IntegratorOptions) -> Result<Solution>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let steps = (t / opts.step).ceil().max(1.0) as usize;
    if steps > opts.max_steps {
        return Err(Error::Integration {
            time: 0.0,
            reason: format!("{steps} RK4 steps needed, max_steps is {}", opts.max_steps),
        });
    }
    let h = t / steps as f64;
    let n = y0.len();
    let mut y = y0.to_vec();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for step in 0..steps {
        f(&y, &mut k1)?;
        axpy_into(&mut tmp, &y, &[(h / 2.0, &k1)]);
        f(&tmp, &mut k2)?;
        axpy_into(&mut tmp, &y, &[(h / 2.0, &k2)]);
        f(&tmp, &mut k3)?;
        axpy_into(&mut tmp, &y, &[(h, &k3)]);
        f(&tmp, &mut k4)?;
        for i in 0..n {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Integration {
                time: (step + 1) as f64 * h,
                reason: "state became non-finite".into(),
            });
        }
    }
    Ok(Solution {
        y,
        accepted: steps,
        rejected: 0,
    })
}

const A2: [f64; 1] = [1.0 / 4.0];
const A3: [f64; 2] = [3.0 / 32.0, 9.0 / 32.0];
const A4: [f64; 3] = [1932.0 / 2197.0, -7200.0 / 2197.0, 7296.0 / 2197.0];
const A5: [f64; 4] = [439.0 / 216.0, -8.0, 3680.0 / 513.0, -845.0 / 4104.0];
const A6: [f64; 5] = [-8.0 / 27.0, 2.0, -3544.0 / 2565.0, 1859.0 / 4104.0, -11.0 / 40.0];
/// Fifth-order weights.
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
/// Fourth-order weights.
const B4: [f64; 6] = [25.0 / 216.0, 0.0, 1408.0 / 2565.0, 2197.0 / 4104.0, -1.0 / 5.0, 0.0];

fn rkf45<F>(f: &mut F, y0: &[f64], t: f64, opts: &IntegratorOptions) -> Result<Solution>
where
    F: FnMut(&[f64], &mut [f64]) -> Result<()>,
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 6];
    let mut tmp = vec![0.0; n];
    let mut y5 = vec![0.0; n];
    let mut time = 0.0;
    let mut h = opts.step.min(t);
    let (mut accepted, mut rejected) = (0usize, 0usize);
    let min_step = 1e-14 * t.max(1.0);

    while time < t {
        if accepted + rejected >= opts.max_steps {
            return Err(Error::Integration {
                time,
                reason: format!("max_steps ({}) exceeded", opts.max_steps),
            });
        }
        let last = time + h >= t;
        if last {
            h = t - time;
        }
        f(&y, &mut k[0])?;
        for (stage, a) in [&A2[..], &A3[..], &A4[..], &A5[..], &A6[..]].iter().enumerate() {
            for i in 0..n {
                let mut acc = y[i];
                for (j, w) in a.iter().enumerate() {
                    acc += h * w * k[j][i];
                }
                tmp[i] = acc;
            }
            f(&tmp, &mut k[stage + 1])?;
        }
        let mut err = 0.0_f64;
        for i in 0..n {
            let mut hi = 0.0;
            let mut lo = 0.0;
            for s in 0..6 {
                hi += B5[s] * k[s][i];
                lo += B4[s] * k[s][i];
            }
            y5[i] = y[i] + h * hi;
            let scale = opts.abs_tol + opts.rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((h * (hi - lo)).abs() / scale);
        }
        if !err.is_finite() {
            return Err(Error::Integration {
                time,
                reason: "state became non-finite".into(),
            });
        }
        if err <= 1.0 {
            accepted += 1;
            time = if last { t } else { time + h };
            std::mem::swap(&mut y, &mut y5);
        } else {
            rejected += 1;
        }
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        };
        h *= factor;
        if time < t && h < min_step {
            return Err(Error::Integration {
                time,
                reason: format!("step size underflow (h = {h:.3e})"),
            });
        }
    }
    Ok(Solution { y, accepted, rejected })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = -y[1];
        dy[1] = y[0];
        Ok(())
    }

    #[test]
    fn rkf45_meets_tolerance_on_rotation() {
        let sol = integrate(rotation, &[1.0, 0.0], 3.0, &IntegratorOptions::default()).unwrap();
        assert!((sol.y[0] - 3f64.cos()).abs() < 1e-8);
        assert!((sol.y[1] - 3f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let decay = |y: &[f64], dy: &mut [f64]| {
            dy[0] = -y[0];
            Ok(())
        };
        let e1 = (integrate(decay, &[1.0], 1.0, &IntegratorOptions::rk4(0.1)).unwrap().y[0] - (-1f64).exp()).abs();
        let e2 = (integrate(decay, &[1.0], 1.0, &IntegratorOptions::rk4(0.05)).unwrap().y[0] - (-1f64).exp()).abs();
        let ratio = e1 / e2;
        assert!((14.0..18.0).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn zero_time_returns_input() {
        let sol = integrate(rotation, &[0.3, 0.4], 0.0, &IntegratorOptions::default()).unwrap();
        assert_eq!(sol.y, vec![0.3, 0.4]);
    }

    #[test]
    fn blow_up_fails_cleanly() {
        let blowup = |y: &[f64], dy: &mut [f64]| {
            dy[0] = y[0] * y[0];
            Ok(())
        };
        let opts = IntegratorOptions {
            max_steps: 10_000,
            ..IntegratorOptions::default()
        };
        assert!(matches!(
            integrate(blowup, &[1.0], 2.0, &opts),
            Err(Error::Integration { .. })
        ));
    }

    #[test]
    fn invalid_options_are_rejected() {
        let opts = IntegratorOptions {
            step: 0.0,
            ..IntegratorOptions::default()
        };
        assert!(integrate(rotation, &[1.0, 0.0], 1.0, &opts).is_err());
        assert!(integrate(rotation, &[1.0, 0.0], -1.0, &IntegratorOptions::default()).is_err());
    }
}
