//! PDE presets, manufactured exact solutions and their source terms.
//!
//! Every operator has the conservative form `u_t + F(u, x)_x + d(u, x) = s(x, t)`
//! where `d` is a linear damping term. For manufactured problems `s` is the
//! operator applied to the exact solution, evaluated from closed-form
//! derivatives.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// `u(x, t) = û sin(kx − ωt) + 2û cos(2kx − ωt)` with `ω = c k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedSolution {
    pub amplitude: f64,
    pub wavenumber: f64,
    pub phase_speed: f64,
}

impl ManufacturedSolution {
    pub fn new(amplitude: f64, wavenumber: f64, phase_speed: f64) -> Self {
        Self {
            amplitude,
            wavenumber,
            phase_speed,
        }
    }

    pub fn omega(&self) -> f64 {
        self.phase_speed * self.wavenumber
    }

    /// Period of the first wave mode.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega()
    }

    fn phases(&self, x: f64, t: f64) -> (f64, f64) {
        let (k, w) = (self.wavenumber, self.omega());
        (k * x - w * t, 2.0 * k * x - w * t)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        let (a, b) = self.phases(x, t);
        self.amplitude * (a.sin() + 2.0 * b.cos())
    }

    pub fn time_derivative(&self, x: f64, t: f64) -> f64 {
        let (a, b) = self.phases(x, t);
        self.amplitude * self.omega() * (-a.cos() + 2.0 * b.sin())
    }

    pub fn space_derivative(&self, x: f64, t: f64) -> f64 {
        let (a, b) = self.phases(x, t);
        self.amplitude * self.wavenumber * (a.cos() - 4.0 * b.sin())
    }

    /// Exact integral over `[lo, hi]`, written with product-to-sum identities
    /// so that narrow cells do not lose digits to cancellation.
    pub fn integral(&self, lo: f64, hi: f64, t: f64) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        let (k, w) = (self.wavenumber, self.omega());
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        // ∫ sin(kx − ωt) = (2/k) sin(k·half) sin(k·mid − ωt)
        let first = 2.0 / k * (k * half).sin() * (k * mid - w * t).sin();
        // ∫ 2cos(2kx − ωt) = (2/k) sin(2k·half) cos(2k·mid − ωt)
        let second = 2.0 / k * (2.0 * k * half).sin() * (2.0 * k * mid - w * t).cos();
        self.amplitude * (first + second)
    }

    pub fn cell_average(&self, lo: f64, hi: f64, t: f64) -> f64 {
        self.integral(lo, hi, t) / (hi - lo)
    }
}

/// Single sine wave `A sin(k x)`, the initial profile of the translation problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProfile {
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl SineProfile {
    pub fn value(&self, x: f64) -> f64 {
        self.amplitude * (self.wavenumber * x).sin()
    }

    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let k = self.wavenumber;
        2.0 / k * self.amplitude * (0.5 * k * (hi - lo)).sin() * (0.5 * k * (hi + lo)).sin()
    }
}

/// `c0 + c1 x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub const fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub fn at(&self, x: f64) -> f64 {
        self.c0 + self.c1 * x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// `u_t + (q(x) u)_x + p(x) u = s`
    LinearVariable { p: Affine, q: Affine },
    /// `u_t + (ū u + u²/2)_x + p0 (ū + u) = s`, the perturbation form of
    /// `(ū+u)_t + (ū+u)(ū+u)_x + p0 (ū+u) = s`.
    Nonlinear { mean: f64, damping: f64 },
    /// `u_t + a u_x = 0`
    ConstantAdvection { speed: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExactSolution {
    TwoMode(ManufacturedSolution),
    /// `u0(x − a t)` for the constant-coefficient problem.
    Translated { profile: SineProfile, speed: f64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemId {
    Linear,
    Nonlinear,
    ConstantAdvection,
    Burgers,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [
        ProblemId::Linear,
        ProblemId::Nonlinear,
        ProblemId::ConstantAdvection,
        ProblemId::Burgers,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::Linear => "linear",
            ProblemId::Nonlinear => "nonlinear",
            ProblemId::ConstantAdvection => "constant-advection",
            ProblemId::Burgers => "burgers",
        }
    }

    pub fn preset(self) -> ProblemSpec {
        match self {
            ProblemId::Linear => ProblemSpec::linear(),
            ProblemId::Nonlinear => ProblemSpec::nonlinear(),
            ProblemId::ConstantAdvection => ProblemSpec::constant_advection(1.0),
            ProblemId::Burgers => ProblemSpec::burgers(),
        }
    }
}

impl fmt::Display for ProblemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ProblemId::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown problem preset `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub equation: Equation,
    pub exact: ExactSolution,
}

impl ProblemSpec {
    /// `u_t + (x u)_x + u = s` on `[0, 1]` with `û = 1, k = 2π, c = 1`.
    pub fn linear() -> Self {
        Self {
            id: ProblemId::Linear,
            equation: Equation::LinearVariable {
                p: Affine::new(1.0, 0.0),
                q: Affine::new(0.0, 1.0),
            },
            exact: ExactSolution::TwoMode(ManufacturedSolution::new(1.0, 2.0 * PI, 1.0)),
        }
    }

    /// `u_t + (u + u²/2)_x + (1 + u) = s` with `û = 0.01, k = 2π, c = 1`.
    pub fn nonlinear() -> Self {
        Self {
            id: ProblemId::Nonlinear,
            equation: Equation::Nonlinear {
                mean: 1.0,
                damping: 1.0,
            },
            exact: ExactSolution::TwoMode(ManufacturedSolution::new(0.01, 2.0 * PI, 1.0)),
        }
    }

    /// `u_t + a u_x = 0` with `u(x, 0) = sin(2πx)`.
    pub fn constant_advection(speed: f64) -> Self {
        Self {
            id: ProblemId::ConstantAdvection,
            equation: Equation::ConstantAdvection { speed },
            exact: ExactSolution::Translated {
                profile: SineProfile {
                    amplitude: 1.0,
                    wavenumber: 2.0 * PI,
                },
                speed,
            },
        }
    }

    /// Unforced inviscid Burgers, `u_t + (u²/2)_x = 0`.
    pub fn burgers() -> Self {
        Self {
            id: ProblemId::Burgers,
            equation: Equation::Nonlinear {
                mean: 0.0,
                damping: 0.0,
            },
            exact: ExactSolution::None,
        }
    }

    pub fn name(&self) -> &'static str {
        self.id.name()
    }

    pub fn has_exact(&self) -> bool {
        !matches!(self.exact, ExactSolution::None)
    }

    pub fn manufactured(&self) -> Option<&ManufacturedSolution> {
        match &self.exact {
            ExactSolution::TwoMode(m) => Some(m),
            _ => None,
        }
    }

    /// Period of the leading wave of the exact solution, 1 for unit presets.
    pub fn period(&self) -> f64 {
        match &self.exact {
            ExactSolution::TwoMode(m) => m.period(),
            ExactSolution::Translated { profile, speed } => {
                2.0 * PI / (profile.wavenumber * speed.abs())
            }
            ExactSolution::None => 1.0,
        }
    }

    fn no_exact(&self) -> Error {
        Error::NoExactSolution(self.name().to_owned())
    }

    pub fn exact_solution(&self, x: f64, t: f64) -> Result<f64> {
        match &self.exact {
            ExactSolution::TwoMode(m) => Ok(m.value(x, t)),
            ExactSolution::Translated { profile, speed } => Ok(profile.value(x - speed * t)),
            ExactSolution::None => Err(self.no_exact()),
        }
    }

    pub fn exact_time_derivative(&self, x: f64, t: f64) -> Result<f64> {
        match &self.exact {
            ExactSolution::TwoMode(m) => Ok(m.time_derivative(x, t)),
            ExactSolution::Translated { profile, speed } => {
                let k = profile.wavenumber;
                Ok(-speed * profile.amplitude * k * (k * (x - speed * t)).cos())
            }
            ExactSolution::None => Err(self.no_exact()),
        }
    }

    /// Mean of the exact solution over `[lo, hi]` from its antiderivative.
    pub fn exact_cell_average(&self, lo: f64, hi: f64, t: f64) -> Result<f64> {
        match &self.exact {
            ExactSolution::TwoMode(m) => Ok(m.cell_average(lo, hi, t)),
            ExactSolution::Translated { profile, speed } => {
                let shift = speed * t;
                Ok(profile.integral(lo - shift, hi - shift) / (hi - lo))
            }
            ExactSolution::None => Err(self.no_exact()),
        }
    }

    pub fn flux(&self, u: f64, x: f64) -> f64 {
        match self.equation {
            Equation::LinearVariable { q, .. } => q.at(x) * u,
            Equation::Nonlinear { mean, .. } => mean * u + 0.5 * u * u,
            Equation::ConstantAdvection { speed } => speed * u,
        }
    }

    /// Signed characteristic speed `∂F/∂u`.
    pub fn wave_speed(&self, u: f64, x: f64) -> f64 {
        match self.equation {
            Equation::LinearVariable { q, .. } => q.at(x),
            Equation::Nonlinear { mean, .. } => mean + u,
            Equation::ConstantAdvection { speed } => speed,
        }
    }

    /// The non-flux term `d(u, x)` of the operator.
    pub fn damping(&self, u: f64, x: f64) -> f64 {
        match self.equation {
            Equation::LinearVariable { p, .. } => p.at(x) * u,
            Equation::Nonlinear { mean, damping } => damping * (mean + u),
            Equation::ConstantAdvection { .. } => 0.0,
        }
    }

    /// Cell mean of the damping term for a state whose parabola in the cell
    /// has mean `mean` and edge values `left`, `right`; exact for affine `p`.
    pub fn damping_cell_average(&self, mean: f64, left: f64, right: f64, lo: f64, hi: f64) -> f64 {
        match self.equation {
            Equation::LinearVariable { p, .. } => {
                let dx = hi - lo;
                p.at(0.5 * (lo + hi)) * mean + p.c1 * dx * (right - left) / 12.0
            }
            _ => self.damping(mean, 0.5 * (lo + hi)),
        }
    }

    /// Space derivative of the flux along the exact solution.
    fn exact_flux_gradient(&self, m: &ManufacturedSolution, x: f64, t: f64) -> f64 {
        let u = m.value(x, t);
        let ux = m.space_derivative(x, t);
        match self.equation {
            Equation::LinearVariable { q, .. } => q.c1 * u + q.at(x) * ux,
            Equation::Nonlinear { mean, .. } => (mean + u) * ux,
            Equation::ConstantAdvection { speed } => speed * ux,
        }
    }

    /// Manufactured source: the operator applied to the exact solution.
    /// Zero for problems whose exact solution solves the homogeneous equation.
    pub fn source_term(&self, x: f64, t: f64) -> f64 {
        match &self.exact {
            ExactSolution::TwoMode(m) => {
                m.time_derivative(x, t)
                    + self.exact_flux_gradient(m, x, t)
                    + self.damping(m.value(x, t), x)
            }
            _ => 0.0,
        }
    }

    pub fn has_source(&self) -> bool {
        matches!(self.exact, ExactSolution::TwoMode(_))
    }

    /// Cell mean of the source by five-point Gauss–Legendre quadrature.
    pub fn source_cell_average(&self, lo: f64, hi: f64, t: f64) -> f64 {
        if !self.has_source() {
            return 0.0;
        }
        gauss_average(|x| self.source_term(x, t), lo, hi)
    }

    /// Largest `|∂F/∂u|` over the given samples.
    pub fn max_wave_speed(&self, values: &[f64], coords: &[f64]) -> f64 {
        values
            .iter()
            .zip(coords)
            .map(|(&u, &x)| self.wave_speed(u, x).abs())
            .fold(0.0, f64::max)
    }
}

/// Five-point Gauss–Legendre mean of `f` over `[lo, hi]`.
pub(crate) fn gauss_average(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    GAUSS5
        .iter()
        .map(|&(node, weight)| weight * f(mid + half * node))
        .sum::<f64>()
        * 0.5
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub(crate) const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
    (0.906_179_845_938_664, 0.236_926_885_056_189_1),
];

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn exact_values_at_origin() {
        let lin = ProblemSpec::linear();
        assert_relative_eq!(lin.exact_solution(0.0, 0.0).unwrap(), 2.0);
        assert_relative_eq!(lin.exact_solution(0.25, 0.0).unwrap(), -1.0, epsilon = 1e-14);
        let non = ProblemSpec::nonlinear();
        assert_relative_eq!(non.exact_solution(0.0, 0.0).unwrap(), 0.02);
    }

    #[test]
    fn burgers_has_no_exact_solution() {
        let b = ProblemSpec::burgers();
        assert!(matches!(b.exact_solution(0.0, 0.0), Err(Error::NoExactSolution(_))));
        assert_eq!(b.source_term(0.3, 0.1), 0.0);
    }

    #[test]
    fn full_period_average_vanishes() {
        let lin = ProblemSpec::linear();
        for t in [0.0, 0.37, 1.9] {
            assert!(lin.exact_cell_average(0.0, 1.0, t).unwrap().abs() < 1e-15);
        }
    }

    /// Composite midpoint-free Simpson rule on 64 panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let n = 64;
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn half_domain_average() {
        let lin = ProblemSpec::linear();
        let avg = lin.exact_cell_average(0.0, 0.5, 0.0).unwrap();
        assert_relative_eq!(avg, 2.0 / PI, epsilon = 1e-14);
        let quad = simpson(|x| lin.exact_solution(x, 0.0).unwrap(), 0.0, 0.5) / 0.5;
        assert_relative_eq!(avg, quad, epsilon = 1e-7);
    }

    #[test]
    fn zero_amplitude_average() {
        let m = ManufacturedSolution::new(0.0, 2.0 * PI, 1.0);
        assert_eq!(m.cell_average(0.1, 0.2, 0.3), 0.0);
    }

    #[test]
    fn translated_average_matches_quadrature() {
        let p = ProblemSpec::constant_advection(1.0);
        let avg = p.exact_cell_average(0.1, 0.3, 0.45).unwrap();
        let quad = simpson(|x| p.exact_solution(x, 0.45).unwrap(), 0.1, 0.3) / 0.2;
        assert_relative_eq!(avg, quad, epsilon = 1e-8);
    }

    #[test]
    fn source_examples() {
        assert_relative_eq!(
            ProblemSpec::linear().source_term(0.0, 0.0),
            4.0 - 2.0 * PI,
            epsilon = 1e-13
        );
        assert_relative_eq!(
            ProblemSpec::nonlinear().source_term(0.0, 0.0),
            0.0004 * PI + 1.02,
            epsilon = 1e-13
        );
        let c = ProblemSpec::constant_advection(1.0);
        assert_eq!(c.source_term(0.3, 0.2), 0.0);
    }

    #[test]
    fn flux_examples() {
        let lin = ProblemSpec::linear();
        assert_relative_eq!(lin.flux(2.0, 0.5), 1.0);
        assert_relative_eq!(lin.wave_speed(2.0, 0.5), 0.5);
        let non = ProblemSpec::nonlinear();
        assert_relative_eq!(non.flux(0.02, 0.0), 0.0202, epsilon = 1e-15);
        assert_relative_eq!(non.wave_speed(0.02, 0.0), 1.02);
        let c = ProblemSpec::constant_advection(1.0);
        assert_eq!(c.flux(3.0, 0.9), 3.0);
        assert_eq!(c.wave_speed(3.0, 0.9), 1.0);
    }

    /// Operator applied to the exact solution through central differences.
    fn fd_operator(p: &ProblemSpec, x: f64, t: f64) -> f64 {
        let h = 1e-6;
        let u = |x: f64, t: f64| p.exact_solution(x, t).unwrap();
        let ut = (u(x, t + h) - u(x, t - h)) / (2.0 * h);
        let fx = (p.flux(u(x + h, t), x + h) - p.flux(u(x - h, t), x - h)) / (2.0 * h);
        ut + fx + p.damping(u(x, t), x)
    }

    #[test]
    fn source_matches_difference_oracle() {
        for p in [ProblemSpec::linear(), ProblemSpec::nonlinear()] {
            for i in 0..50 {
                let x = i as f64 / 50.0 + 0.013;
                let t = 0.7 * i as f64 / 50.0;
                let s = p.source_term(x, t);
                assert!((s - fd_operator(&p, x, t)).abs() < 1e-8, "{} at {x},{t}", p.name());
            }
        }
    }

    #[test]
    fn source_cell_average_is_accurate() {
        let p = ProblemSpec::linear();
        let (lo, hi) = (0.2, 0.28);
        let quad = simpson(|x| p.source_term(x, 0.1), lo, hi) / (hi - lo);
        assert_relative_eq!(p.source_cell_average(lo, hi, 0.1), quad, epsilon = 1e-8);
    }

    #[test]
    fn damping_average_exact_for_affine_coefficient() {
        let p = ProblemSpec {
            id: ProblemId::Linear,
            equation: Equation::LinearVariable {
                p: Affine::new(0.5, 2.0),
                q: Affine::new(0.0, 1.0),
            },
            exact: ExactSolution::None,
        };
        // parabola with edges 1 and 3, mean 2.5 on [0.2, 0.6]
        let (lo, hi, left, right, mean) = (0.2, 0.6, 1.0, 3.0, 2.5);
        let u6 = 6.0 * (mean - 0.5 * (left + right));
        let profile = |x: f64| {
            let xi = (x - lo) / (hi - lo);
            left + xi * (right - left) + u6 * xi * (1.0 - xi)
        };
        let quad = simpson(|x| (0.5 + 2.0 * x) * profile(x), lo, hi) / (hi - lo);
        assert_relative_eq!(
            p.damping_cell_average(mean, left, right, lo, hi),
            quad,
            epsilon = 1e-12
        );
    }

    #[test]
    fn preset_names_round_trip() {
        for id in ProblemId::ALL {
            assert_eq!(id.name().parse::<ProblemId>().unwrap(), id);
        }
        assert!("quadratic".parse::<ProblemId>().is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn linear_source_consistent(x in 0.0f64..1.0, t in 0.0f64..1.0) {
            // u_t + x u_x + 2u written out independently of the flux form
            let m = ManufacturedSolution::new(1.0, 2.0 * PI, 1.0);
            let (k, w) = (2.0 * PI, 2.0 * PI);
            let u = (k * x - w * t).sin() + 2.0 * (2.0 * k * x - w * t).cos();
            let ut = -w * (k * x - w * t).cos() + 2.0 * w * (2.0 * k * x - w * t).sin();
            let ux = k * (k * x - w * t).cos() - 4.0 * k * (2.0 * k * x - w * t).sin();
            let op = ut + x * ux + 2.0 * u;
            prop_assert!((m.value(x, t) - u).abs() <= 1e-12);
            prop_assert!((ProblemSpec::linear().source_term(x, t) - op).abs() <= 1e-10);
        }

        #[test]
        fn nonlinear_source_consistent(x in 0.0f64..1.0, t in 0.0f64..1.0) {
            // (1+u)_t + (1+u)(1+u)_x + (1+u)
            let a = 0.01;
            let (k, w) = (2.0 * PI, 2.0 * PI);
            let u = a * ((k * x - w * t).sin() + 2.0 * (2.0 * k * x - w * t).cos());
            let ut = a * w * (-(k * x - w * t).cos() + 2.0 * (2.0 * k * x - w * t).sin());
            let ux = a * k * ((k * x - w * t).cos() - 4.0 * (2.0 * k * x - w * t).sin());
            let op = ut + (1.0 + u) * ux + 1.0 + u;
            prop_assert!((ProblemSpec::nonlinear().source_term(x, t) - op).abs() <= 1e-10);
        }

        #[test]
        fn exact_solution_periodic(x in -2.0f64..2.0, t in 0.0f64..3.0) {
            for p in [ProblemSpec::linear(), ProblemSpec::nonlinear(), ProblemSpec::constant_advection(1.0)] {
                let a = p.exact_solution(x, t).unwrap();
                let b = p.exact_solution(x + 1.0, t).unwrap();
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn cell_average_approaches_point_value_at_second_order() {
        let p = ProblemSpec::linear();
        let mut hs = Vec::new();
        let mut errs = Vec::new();
        for level in 4..=10 {
            let h = 1.0 / f64::from(1u32 << level);
            let c = 0.3;
            let avg = p.exact_cell_average(c - h / 2.0, c + h / 2.0, 0.2).unwrap();
            hs.push(h);
            errs.push((avg - p.exact_solution(c, 0.2).unwrap()).abs());
        }
        let (slope, _) = crate::convergence::fit_loglog_slope(&hs, &errs).unwrap();
        assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
    }
}
