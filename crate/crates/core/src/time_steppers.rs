//! Explicit method-of-lines integrators for arbitrary tendencies and
//! closed-form implicit steps for the scalar linear ODE `u' = −λu + f(t)`.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Fe1,
    Rk2,
    Rk3,
    Rk4,
    Ab2,
    Ab3,
    Ab4,
    Be1,
    Imid,
    Trap,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Fe1,
        Method::Rk2,
        Method::Rk3,
        Method::Rk4,
        Method::Ab2,
        Method::Ab3,
        Method::Ab4,
        Method::Be1,
        Method::Imid,
        Method::Trap,
    ];

    pub const EXPLICIT: [Method; 7] = [
        Method::Fe1,
        Method::Rk2,
        Method::Rk3,
        Method::Rk4,
        Method::Ab2,
        Method::Ab3,
        Method::Ab4,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Method::Fe1 => "fe1",
            Method::Rk2 => "rk2",
            Method::Rk3 => "rk3",
            Method::Rk4 => "rk4",
            Method::Ab2 => "ab2",
            Method::Ab3 => "ab3",
            Method::Ab4 => "ab4",
            Method::Be1 => "be1",
            Method::Imid => "imid",
            Method::Trap => "trap",
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Method::Fe1 | Method::Be1 => 1,
            Method::Rk2 | Method::Ab2 | Method::Imid | Method::Trap => 2,
            Method::Rk3 | Method::Ab3 => 3,
            Method::Rk4 | Method::Ab4 => 4,
        }
    }

    /// Number of past tendencies an Adams–Bashforth method reads.
    pub fn history_depth(self) -> usize {
        match self {
            Method::Ab2 => 1,
            Method::Ab3 => 2,
            Method::Ab4 => 3,
            _ => 0,
        }
    }

    pub fn is_explicit(self) -> bool {
        !self.is_implicit()
    }

    pub fn is_implicit(self) -> bool {
        matches!(self, Method::Be1 | Method::Imid | Method::Trap)
    }

    pub fn is_multistep(self) -> bool {
        self.history_depth() > 0
    }

    /// Adams–Bashforth weights, newest tendency first.
    pub fn ab_weights(self) -> Option<&'static [f64]> {
        match self {
            Method::Ab2 => Some(&AB2),
            Method::Ab3 => Some(&AB3),
            Method::Ab4 => Some(&AB4),
            _ => None,
        }
    }

    pub fn spec(self) -> StepperSpec {
        StepperSpec {
            method: self,
            order_beta: self.order(),
            history_depth: self.history_depth(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.token() == s)
            .ok_or_else(|| Error::Config(format!("unknown time stepper `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepperSpec {
    pub method: Method,
    pub order_beta: u32,
    pub history_depth: usize,
}

impl From<Method> for StepperSpec {
    fn from(m: Method) -> Self {
        m.spec()
    }
}

const AB2: [f64; 2] = [1.5, -0.5];
const AB3: [f64; 3] = [23.0 / 12.0, -16.0 / 12.0, 5.0 / 12.0];
const AB4: [f64; 4] = [55.0 / 24.0, -59.0 / 24.0, 37.0 / 24.0, -9.0 / 24.0];

const RK3_A: [f64; 3] = [0.0, -5.0 / 9.0, -153.0 / 128.0];
const RK3_B: [f64; 3] = [1.0 / 3.0, 15.0 / 16.0, 8.0 / 15.0];
const RK3_C: [f64; 3] = [0.0, 1.0 / 3.0, 3.0 / 4.0];

// Carpenter & Kennedy five-stage, fourth-order 2N-storage scheme.
const RK4_A: [f64; 5] = [
    0.0,
    -567_301_805_773.0 / 1_357_537_059_087.0,
    -2_404_267_990_393.0 / 2_016_746_695_238.0,
    -3_550_918_686_646.0 / 2_091_501_179_385.0,
    -1_275_806_237_668.0 / 842_570_457_699.0,
];
const RK4_B: [f64; 5] = [
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    5_161_836_677_717.0 / 13_612_068_292_357.0,
    1_720_146_321_549.0 / 2_090_206_949_498.0,
    3_134_564_353_537.0 / 4_481_467_310_338.0,
    2_277_821_191_437.0 / 14_882_151_754_819.0,
];
const RK4_C: [f64; 5] = [
    0.0,
    1_432_997_174_477.0 / 9_575_080_441_755.0,
    2_526_269_341_429.0 / 6_820_363_962_896.0,
    2_006_345_519_317.0 / 3_224_310_063_776.0,
    2_802_321_613_138.0 / 2_924_317_926_251.0,
];

/// Past tendencies `F(u^{n−m}, t^{n−m})`, newest first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    entries: VecDeque<(f64, Vec<f64>)>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn clear(&mut self) {
        self.entries.clear();
    }

    /// Adds an entry older than every stored one.
    pub fn push_oldest(&mut self, t: f64, tendency: Vec<f64>) {
        self.entries.push_back((t, tendency));
    }

    pub fn push_newest(&mut self, t: f64, tendency: Vec<f64>, keep: usize) {
        self.entries.push_front((t, tendency));
        self.entries.truncate(keep);
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|(t, _)| *t).collect()
    }

    pub fn get(&self, i: usize) -> Option<&[f64]> {
        self.entries.get(i).map(|(_, f)| f.as_slice())
    }

    fn check(&self, method: Method, t: f64, dt: f64, len: usize) -> Result<()> {
        let needed = method.history_depth();
        let usable = self
            .entries
            .iter()
            .take(needed)
            .enumerate()
            .take_while(|(i, (ti, f))| {
                let want = t - (*i as f64 + 1.0) * dt;
                f.len() == len && (ti - want).abs() <= 1e-9 * dt.max(t.abs())
            })
            .count();
        if usable < needed {
            return Err(Error::InsufficientHistory {
                method: method.token(),
                needed,
                found: usable,
            });
        }
        Ok(())
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidStep(dt))
    }
}

/// Advances `u` from `t` to `t + dt` in place. `tendency(u, t, out)` writes
/// `du/dt` into `out`. Adams–Bashforth methods read `hist` and push
/// `F(u^n, t^n)` onto it; one-step methods leave it alone.
pub fn step_explicit<F>(
    u: &mut [f64],
    t: f64,
    dt: f64,
    tendency: &F,
    method: Method,
    hist: &mut History,
) -> Result<()>
where
    F: Fn(&[f64], f64, &mut [f64]) + ?Sized,
{
    check_dt(dt)?;
    let n = u.len();
    let mut k = vec![0.0; n];
    match method {
        Method::Fe1 => {
            tendency(u, t, &mut k);
            axpy(u, dt, &k);
        }
        Method::Rk2 => {
            tendency(u, t, &mut k);
            let mut mid = u.to_vec();
            axpy(&mut mid, 0.5 * dt, &k);
            tendency(&mid, t + 0.5 * dt, &mut k);
            axpy(u, dt, &k);
        }
        Method::Rk3 => low_storage(u, t, dt, tendency, &RK3_A, &RK3_B, &RK3_C),
        Method::Rk4 => low_storage(u, t, dt, tendency, &RK4_A, &RK4_B, &RK4_C),
        Method::Ab2 | Method::Ab3 | Method::Ab4 => {
            hist.check(method, t, dt, n)?;
            let w = method.ab_weights().expect("multistep");
            tendency(u, t, &mut k);
            let mut incr: Vec<f64> = k.iter().map(|f| w[0] * f).collect();
            for (i, wi) in w.iter().enumerate().skip(1) {
                let past = hist.get(i - 1).expect("checked");
                for (a, f) in incr.iter_mut().zip(past) {
                    *a += wi * f;
                }
            }
            axpy(u, dt, &incr);
            hist.push_newest(t, k, method.history_depth());
        }
        Method::Be1 | Method::Imid | Method::Trap => {
            return Err(Error::NotExplicit(method.token()))
        }
    }
    Ok(())
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Two-register Williamson form: `du ← A_i du + dt F(u, t + C_i dt)`,
/// `u ← u + B_i du`.
fn low_storage<F>(u: &mut [f64], t: f64, dt: f64, tendency: &F, a: &[f64], b: &[f64], c: &[f64])
where
    F: Fn(&[f64], f64, &mut [f64]) + ?Sized,
{
    let n = u.len();
    let mut du = vec![0.0; n];
    let mut f = vec![0.0; n];
    for i in 0..a.len() {
        tendency(u, t + c[i] * dt, &mut f);
        for (d, fi) in du.iter_mut().zip(&f) {
            *d = a[i] * *d + dt * fi;
        }
        axpy(u, b[i], &du);
    }
}

/// One implicit step of `u' = −λu + f(t)` in closed form.
pub fn step_implicit_scalar_linear(
    u: f64,
    t: f64,
    dt: f64,
    lambda: f64,
    f: &dyn Fn(f64) -> f64,
    method: Method,
) -> Result<f64> {
    check_dt(dt)?;
    let (den, num) = match method {
        Method::Be1 => (1.0 + lambda * dt, u + dt * f(t + dt)),
        Method::Imid => (
            1.0 + 0.5 * lambda * dt,
            (1.0 - 0.5 * lambda * dt) * u + dt * f(t + 0.5 * dt),
        ),
        Method::Trap => (
            1.0 + 0.5 * lambda * dt,
            (1.0 - 0.5 * lambda * dt) * u + 0.5 * dt * (f(t) + f(t + dt)),
        ),
        _ => return Err(Error::NotImplicit(method.token())),
    };
    if den == 0.0 || !den.is_finite() {
        return Err(Error::SingularUpdate(den));
    }
    Ok(num / den)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StartupMode {
    /// Tendencies of the exact solution at the earlier time levels.
    #[default]
    ExactSolution,
    /// RK4 run backward to `t0 − depth·dt`, then forward over the levels.
    RkStartup,
}

impl FromStr for StartupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "exact" | "exact_solution" => Ok(StartupMode::ExactSolution),
            "rk" | "rk_startup" | "rk4" => Ok(StartupMode::RkStartup),
            other => Err(Error::Config(format!("unknown startup mode `{other}`"))),
        }
    }
}

/// History for a multistep method about to step from `(u0, t0)`.
/// `exact(t)` gives the exact state and is required in exact mode.
pub fn bootstrap_history<F>(
    tendency: &F,
    method: Method,
    u0: &[f64],
    t0: f64,
    dt: f64,
    mode: StartupMode,
    exact: Option<&dyn Fn(f64) -> Vec<f64>>,
) -> Result<History>
where
    F: Fn(&[f64], f64, &mut [f64]) + ?Sized,
{
    check_dt(dt)?;
    let depth = method.history_depth();
    let mut hist = History::new();
    let n = u0.len();
    match mode {
        StartupMode::ExactSolution => {
            let exact = exact.ok_or_else(|| Error::NoExactSolution("history bootstrap".into()))?;
            for m in 1..=depth {
                let tm = t0 - m as f64 * dt;
                let um = exact(tm);
                let mut f = vec![0.0; n];
                tendency(&um, tm, &mut f);
                hist.push_oldest(tm, f);
            }
        }
        StartupMode::RkStartup => {
            let mut u = u0.to_vec();
            let neg = |v: &[f64], s: f64, out: &mut [f64]| {
                tendency(v, -s, out);
                out.iter_mut().for_each(|o| *o = -*o);
            };
            // reversed time s = −t
            let mut scratch = History::new();
            for m in 0..depth {
                let s = -(t0 - m as f64 * dt);
                step_explicit(&mut u, s, dt, &neg, Method::Rk4, &mut scratch)?;
            }
            for m in (1..=depth).rev() {
                let tm = t0 - m as f64 * dt;
                let mut f = vec![0.0; n];
                tendency(&u, tm, &mut f);
                hist.push_newest(tm, f, depth);
                step_explicit(&mut u, tm, dt, tendency, Method::Rk4, &mut scratch)?;
            }
        }
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn factorial(k: usize) -> f64 {
        (1..=k).map(|i| i as f64).product()
    }

    /// Coefficients of the stability polynomial: the state holds polynomial
    /// coefficients in z and the tendency multiplies by z.
    fn stability_polynomial(method: Method) -> Vec<f64> {
        let shift = |u: &[f64], _t: f64, out: &mut [f64]| {
            out[0] = 0.0;
            out[1..].copy_from_slice(&u[..u.len() - 1]);
        };
        let mut u = vec![0.0; 8];
        u[0] = 1.0;
        step_explicit(&mut u, 0.0, 1.0, &shift, method, &mut History::new()).unwrap();
        u
    }

    #[test]
    fn one_step_polynomials_match_exponential() {
        for m in [Method::Fe1, Method::Rk2, Method::Rk3, Method::Rk4] {
            let r = stability_polynomial(m);
            for (k, c) in r.iter().enumerate().take(m.order() as usize + 1) {
                assert_relative_eq!(*c, 1.0 / factorial(k), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rk3_amplification_at_small_z() {
        let r = stability_polynomial(Method::Rk3);
        let z: f64 = 0.1;
        let rz: f64 = r.iter().enumerate().map(|(k, c)| c * z.powi(k as i32)).sum();
        let taylor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0;
        assert!((rz - taylor).abs() <= 1e-12);
        assert!(r[4..].iter().all(|c| *c == 0.0));
    }

    #[test]
    fn rk3_direct_scalar_step() {
        let z = 0.1;
        let mut u = [1.0];
        let f = |u: &[f64], _t: f64, out: &mut [f64]| out[0] = z * u[0];
        step_explicit(&mut u, 0.0, 1.0, &f, Method::Rk3, &mut History::new()).unwrap();
        assert!((u[0] - (1.0 + z + z * z / 2.0 + z.powi(3) / 6.0)).abs() <= 1e-12);
    }

    #[test]
    fn rk4_fifth_coefficient_is_nonzero() {
        let r = stability_polynomial(Method::Rk4);
        assert!((r[5] - 1.0 / 120.0).abs() > 1e-6);
    }

    #[test]
    fn ab_weights_satisfy_order_conditions() {
        for m in [Method::Ab2, Method::Ab3, Method::Ab4] {
            let w = m.ab_weights().unwrap();
            assert_relative_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-15);
            // ∫₀¹ s^q ds = Σ_i w_i (−i)^q for q < order
            for q in 0..m.order() as i32 {
                let lhs: f64 = w.iter().enumerate().map(|(i, wi)| wi * (-(i as f64)).powi(q)).sum();
                assert_relative_eq!(lhs, 1.0 / (q as f64 + 1.0), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn constant_tendency_is_exact() {
        let c = 0.7;
        let f = |_u: &[f64], _t: f64, out: &mut [f64]| out[0] = c;
        for m in Method::EXPLICIT {
            let mut hist = History::new();
            for i in 1..=m.history_depth() {
                hist.push_oldest(1.0 - i as f64 * 0.1, vec![c]);
            }
            let mut u = [2.0];
            step_explicit(&mut u, 1.0, 0.1, &f, m, &mut hist).unwrap();
            assert_relative_eq!(u[0], 2.0 + c * 0.1, epsilon = 1e-15);
        }
    }

    #[test]
    fn zero_tendency_leaves_state() {
        let f = |_u: &[f64], _t: f64, out: &mut [f64]| out.fill(0.0);
        for m in Method::EXPLICIT {
            let mut hist = History::new();
            for i in 1..=m.history_depth() {
                hist.push_oldest(-(i as f64) * 0.5, vec![0.0; 3]);
            }
            let mut u = [1.0, -2.0, 3.5];
            step_explicit(&mut u, 0.0, 0.5, &f, m, &mut hist).unwrap();
            assert_eq!(u, [1.0, -2.0, 3.5]);
        }
        for m in [Method::Be1, Method::Imid, Method::Trap] {
            assert_eq!(step_implicit_scalar_linear(1.25, 0.0, 0.3, 0.0, &|_| 0.0, m).unwrap(), 1.25);
        }
    }

    #[test]
    fn ab_rejects_missing_history() {
        let f = |_u: &[f64], _t: f64, out: &mut [f64]| out.fill(1.0);
        let mut u = [0.0];
        let mut hist = History::new();
        hist.push_oldest(-0.1, vec![1.0]);
        let err = step_explicit(&mut u, 0.0, 0.1, &f, Method::Ab3, &mut hist).unwrap_err();
        assert!(matches!(err, Error::InsufficientHistory { needed: 2, found: 1, .. }));
        // wrong spacing also counts as missing
        let mut hist = History::new();
        hist.push_oldest(-0.2, vec![1.0]);
        assert!(step_explicit(&mut u, 0.0, 0.1, &f, Method::Ab2, &mut hist).is_err());
        assert!(matches!(
            step_explicit(&mut u, 0.0, 0.1, &f, Method::Be1, &mut History::new()),
            Err(Error::NotExplicit(_))
        ));
    }

    #[test]
    fn ab_history_rolls_forward() {
        let f = |u: &[f64], _t: f64, out: &mut [f64]| out[0] = -u[0];
        let dt = 0.1;
        let exact = |t: f64| vec![(-t).exp()];
        let mut hist =
            bootstrap_history(&f, Method::Ab3, &[1.0], 0.0, dt, StartupMode::ExactSolution, Some(&exact))
                .unwrap();
        assert_eq!(hist.len(), 2);
        let mut u = [1.0];
        for n in 0..5 {
            step_explicit(&mut u, n as f64 * dt, dt, &f, Method::Ab3, &mut hist).unwrap();
            let ts = hist.times();
            assert_eq!(ts.len(), 2);
            assert_relative_eq!(ts[0], n as f64 * dt, epsilon = 1e-14);
        }
        assert_relative_eq!(u[0], (-0.5f64).exp(), epsilon = 5e-4);
    }

    #[test]
    fn implicit_examples() {
        let zero = |_t: f64| 0.0;
        assert_relative_eq!(step_implicit_scalar_linear(1.0, 0.0, 1.0, 1.0, &zero, Method::Be1).unwrap(), 0.5);
        assert_relative_eq!(
            step_implicit_scalar_linear(1.0, 0.0, 1.0, 1.0, &zero, Method::Trap).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-15
        );
        for m in [Method::Be1, Method::Imid, Method::Trap] {
            let v = step_implicit_scalar_linear(1.0, 0.0, 0.2, 0.0, &|_| 3.0, m).unwrap();
            assert_relative_eq!(v, 1.6, epsilon = 1e-15);
        }
        assert!(matches!(
            step_implicit_scalar_linear(1.0, 0.0, 1.0, -1.0, &zero, Method::Be1),
            Err(Error::SingularUpdate(_))
        ));
        assert!(matches!(
            step_implicit_scalar_linear(1.0, 0.0, 1.0, 1.0, &zero, Method::Rk3),
            Err(Error::NotImplicit(_))
        ));
    }

    #[test]
    fn bootstrap_modes() {
        let f = |u: &[f64], _t: f64, out: &mut [f64]| out[0] = -u[0];
        let exact = |t: f64| vec![(-t).exp()];
        let dt = 0.05;
        let t0 = 3.0 * dt;
        let u0 = exact(t0);
        let a = bootstrap_history(&f, Method::Ab4, &u0, t0, dt, StartupMode::ExactSolution, Some(&exact)).unwrap();
        let b = bootstrap_history(&f, Method::Ab4, &u0, t0, dt, StartupMode::RkStartup, None).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(b.len(), 3);
        for i in 0..3 {
            assert_relative_eq!(a.times()[i], t0 - (i as f64 + 1.0) * dt, epsilon = 1e-14);
            assert_relative_eq!(a.times()[i], b.times()[i], epsilon = 1e-14);
            let diff = (a.get(i).unwrap()[0] - b.get(i).unwrap()[0]).abs();
            assert!(diff < 10.0 * dt.powi(5), "entry {i}: {diff}");
        }
        assert_relative_eq!(a.get(0).unwrap()[0], -(-(t0 - dt)).exp(), epsilon = 1e-15);
        assert!(matches!(
            bootstrap_history(&f, Method::Ab2, &u0, t0, dt, StartupMode::ExactSolution, None),
            Err(Error::NoExactSolution(_))
        ));
    }

    #[test]
    fn tokens_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.token().parse::<Method>().unwrap(), m);
            let s = m.spec();
            assert_eq!((s.order_beta, s.history_depth), (m.order(), m.history_depth()));
        }
        assert!("rk5".parse::<Method>().is_err());
    }
}
