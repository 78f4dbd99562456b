//! One-step truncation errors of the time steppers on scalar linear ODEs
//! `u' = −λu + f(t)`, their observed order and leading coefficient.

use std::fmt;
use std::str::FromStr;

use crate::convergence::fit_loglog_slope;
use crate::error::{Error, Result};
use crate::time_steppers::{
    bootstrap_history, step_explicit, step_implicit_scalar_linear, History, Method, StartupMode,
};

/// Errors smaller than this are treated as round-off.
pub const ERROR_FLOOR: f64 = 1e-14;

#[derive(Debug, Clone, Copy)]
pub enum Forcing {
    Zero,
    Constant(f64),
    /// `sin t`.
    Sine,
    /// Arbitrary forcing without closed-form derivatives.
    Other(fn(f64) -> f64),
}

impl Forcing {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Forcing::Zero => 0.0,
            Forcing::Constant(c) => c,
            Forcing::Sine => t.sin(),
            Forcing::Other(f) => f(t),
        }
    }

    /// `d^k f / dt^k`.
    pub fn derivative(&self, k: usize, t: f64) -> Result<f64> {
        match *self {
            Forcing::Zero => Ok(0.0),
            Forcing::Constant(c) => Ok(if k == 0 { c } else { 0.0 }),
            Forcing::Sine => Ok(match k % 4 {
                0 => t.sin(),
                1 => t.cos(),
                2 => -t.sin(),
                _ => -t.cos(),
            }),
            Forcing::Other(_) => Err(Error::UnsupportedForcing),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScalarOde {
    pub lambda: f64,
    pub forcing: Forcing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdePreset {
    /// `u' = −u`
    Decay,
    /// `u' = −u + sin t`
    DecaySine,
    /// `u' = u`
    Growth,
    /// `u' = 1`
    Constant,
    /// `u' = 0`
    Zero,
}

impl OdePreset {
    pub const ALL: [OdePreset; 5] = [
        OdePreset::Decay,
        OdePreset::DecaySine,
        OdePreset::Growth,
        OdePreset::Constant,
        OdePreset::Zero,
    ];

    pub fn token(self) -> &'static str {
        match self {
            OdePreset::Decay => "decay",
            OdePreset::DecaySine => "decay-sine",
            OdePreset::Growth => "growth",
            OdePreset::Constant => "constant",
            OdePreset::Zero => "zero",
        }
    }

    pub fn ode(self) -> ScalarOde {
        match self {
            OdePreset::Decay => ScalarOde::new(1.0, Forcing::Zero),
            OdePreset::DecaySine => ScalarOde::new(1.0, Forcing::Sine),
            OdePreset::Growth => ScalarOde::new(-1.0, Forcing::Zero),
            OdePreset::Constant => ScalarOde::new(0.0, Forcing::Constant(1.0)),
            OdePreset::Zero => ScalarOde::new(0.0, Forcing::Zero),
        }
    }
}

impl fmt::Display for OdePreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for OdePreset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OdePreset::ALL
            .into_iter()
            .find(|p| p.token() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown ODE preset `{s}`")))
    }
}

impl ScalarOde {
    pub fn new(lambda: f64, forcing: Forcing) -> Self {
        Self { lambda, forcing }
    }

    pub fn rhs(&self, u: f64, t: f64) -> f64 {
        -self.lambda * u + self.forcing.value(t)
    }

    /// Closed-form solution through `(t0, u0)`, when one exists.
    pub fn exact(&self, u0: f64, t0: f64, t: f64) -> Option<f64> {
        let l = self.lambda;
        let decay = (-l * (t - t0)).exp();
        match self.forcing {
            Forcing::Zero => Some(u0 * decay),
            Forcing::Constant(c) if l == 0.0 => Some(u0 + c * (t - t0)),
            Forcing::Constant(c) => Some(c / l + (u0 - c / l) * decay),
            Forcing::Sine => {
                let particular = |s: f64| (l * s.sin() - s.cos()) / (l * l + 1.0);
                Some(particular(t) + (u0 - particular(t0)) * decay)
            }
            Forcing::Other(_) => None,
        }
    }

    /// Solution at `t0 + dt`; RK4 with step `dt/100` stands in when there is
    /// no closed form.
    fn reference(&self, u0: f64, t0: f64, t: f64) -> Result<f64> {
        if let Some(v) = self.exact(u0, t0, t) {
            return Ok(v);
        }
        let h = (t - t0) / 100.0;
        let mut u = [u0];
        let f = |u: &[f64], s: f64, out: &mut [f64]| out[0] = self.rhs(u[0], s);
        for i in 0..100 {
            step_explicit(&mut u, t0 + i as f64 * h, h, &f, Method::Rk4, &mut History::new())?;
        }
        Ok(u[0])
    }
}

/// `u(t0 + dt) − u^{n+1}` for one step started from exact data at `t0`.
/// Multistep methods get exact history.
pub fn one_step_error(ode: &ScalarOde, method: Method, u0: f64, t0: f64, dt: f64) -> Result<f64> {
    let numerical = if method.is_implicit() {
        let f = |t: f64| ode.forcing.value(t);
        step_implicit_scalar_linear(u0, t0, dt, ode.lambda, &f, method)?
    } else {
        let f = |u: &[f64], t: f64, out: &mut [f64]| out[0] = ode.rhs(u[0], t);
        let mut hist = if method.is_multistep() {
            let exact = |t: f64| vec![ode.reference(u0, t0, t).expect("reference solve")];
            bootstrap_history(&f, method, &[u0], t0, dt, StartupMode::ExactSolution, Some(&exact))?
        } else {
            History::new()
        };
        let mut u = [u0];
        step_explicit(&mut u, t0, dt, &f, method, &mut hist)?;
        u[0]
    };
    Ok(ode.reference(u0, t0, t0 + dt)? - numerical)
}

/// Fitted slope of `log|error|` against `log dt`.
pub fn estimate_local_order(ode: &ScalarOde, method: Method, u0: f64, t0: f64, dts: &[f64]) -> Result<f64> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &dt in dts {
        let e = one_step_error(ode, method, u0, t0, dt)?.abs();
        if e >= ERROR_FLOOR {
            xs.push(dt);
            ys.push(e);
        }
    }
    if xs.len() < 3 {
        return Err(Error::TooFewPoints {
            needed: 3,
            got: xs.len(),
        });
    }
    Ok(fit_loglog_slope(&xs, &ys)?.0)
}

/// Limit of `error / dt^{β+1}` as `dt → 0`, by Richardson extrapolation of
/// the two smallest steps. Errors below round-off count as zero.
pub fn estimate_lte_coefficient(ode: &ScalarOde, method: Method, u0: f64, t0: f64, dts: &[f64]) -> Result<f64> {
    if dts.len() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: dts.len(),
        });
    }
    let mut sorted = dts.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite steps"));
    let p = method.order() as i32 + 1;
    let scaled = |dt: f64| -> Result<f64> {
        let e = one_step_error(ode, method, u0, t0, dt)?;
        Ok(if e.abs() < ERROR_FLOOR { 0.0 } else { e / dt.powi(p) })
    };
    let (h1, h2) = (sorted[sorted.len() - 2], sorted[sorted.len() - 1]);
    let (g1, g2) = (scaled(h1)?, scaled(h2)?);
    let r = h2 / h1;
    Ok((g2 - r * g1) / (1.0 - r))
}

/// `d^k u / dt^k` along the solution of `u' = −λu + f(t)` through `(t, u)`,
/// i.e. `F^{(k)}` with `F^{(1)} = F`.
pub fn analytic_fk_linear(ode: &ScalarOde, u: f64, t: f64, k: usize) -> Result<f64> {
    if !(1..=4).contains(&k) {
        return Err(Error::UnsupportedDerivative(k));
    }
    let l = ode.lambda;
    let d = |i: usize| ode.forcing.derivative(i, t);
    let f1 = -l * u + d(0)?;
    Ok(match k {
        1 => f1,
        2 => d(1)? - l * f1,
        3 => d(2)? - l * d(1)? + l * l * f1,
        _ => d(3)? - l * d(2)? + l * l * d(1)? - l * l * l * f1,
    })
}

/// `dt_max · ratio^i` for `i < count`.
pub fn geometric_steps(dt_max: f64, dt_min: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![dt_max];
    }
    let r = (dt_min / dt_max).powf(1.0 / (count - 1) as f64);
    (0..count).map(|i| dt_max * r.powi(i as i32)).collect()
}
