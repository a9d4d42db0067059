//! Fixed-step closed-loop simulation (RK4, input held over each step).
//!
//! Initial conditions in [`SimConfig`] are deviations from the operating
//! point for every scenario. Linear traces are recorded in deviation
//! variables, nonlinear traces in absolute units.

mod rk4;
mod scenarios;
mod trace;

pub use rk4::rk4_step;
pub use scenarios::{
    simulate_linear_feedback, simulate_lqr, simulate_nonlinear_feedback, simulate_open_loop,
    simulate_with_observer,
};
pub use trace::{SimTrace, TraceRow};

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::plant::StateVector;

pub const DEFAULT_DT: f64 = 1e-4;
pub const DEFAULT_T_FINAL: f64 = 50.0;
pub const MAX_DT: f64 = 0.01;
pub const MAX_STEPS: f64 = 1e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Initial plant state, as a deviation from the operating point.
    pub x0: StateVector,
    /// Initial observer estimate, as a deviation from the operating point.
    pub xhat0: StateVector,
    /// Constant reference input added to the feedback law.
    pub v_ref: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            x0: StateVector::default(),
            xhat0: StateVector::default(),
            v_ref: 0.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.dt > 0.0 && self.dt <= MAX_DT) {
            problems.push(format!("dt = {} must be in (0, {MAX_DT}]", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            problems.push(format!("t_final = {} must be positive", self.t_final));
        } else if self.dt > 0.0 && self.t_final / self.dt > MAX_STEPS {
            problems.push(format!(
                "t_final / dt = {:.3e} exceeds {MAX_STEPS:e} steps",
                self.t_final / self.dt
            ));
        }
        if !self.x0.is_finite() {
            problems.push("x0 has non-finite entries".into());
        }
        if !self.xhat0.is_finite() {
            problems.push("xhat0 has non-finite entries".into());
        }
        if !self.v_ref.is_finite() {
            problems.push("v_ref is not finite".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSimConfig(problems))
        }
    }

    /// Number of integration steps; the trace holds one more row than this.
    pub fn steps(&self) -> usize {
        (self.t_final / self.dt + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Linear,
    Nonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    LinearFeedback,
    NonlinearFeedback,
    LinearObserver,
    NonlinearObserver,
    LinearLqr,
    NonlinearLqr,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::LinearFeedback,
        Scenario::NonlinearFeedback,
        Scenario::LinearObserver,
        Scenario::NonlinearObserver,
        Scenario::LinearLqr,
        Scenario::NonlinearLqr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::LinearFeedback => "linear-feedback",
            Scenario::NonlinearFeedback => "nonlinear-feedback",
            Scenario::LinearObserver => "linear-observer",
            Scenario::NonlinearObserver => "nonlinear-observer",
            Scenario::LinearLqr => "linear-lqr",
            Scenario::NonlinearLqr => "nonlinear-lqr",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            Scenario::LinearFeedback | Scenario::LinearObserver | Scenario::LinearLqr => {
                Mode::Linear
            }
            _ => Mode::Nonlinear,
        }
    }

    pub fn uses_observer(self) -> bool {
        matches!(self, Scenario::LinearObserver | Scenario::NonlinearObserver)
    }

    pub fn uses_lqr(self) -> bool {
        matches!(self, Scenario::LinearLqr | Scenario::NonlinearLqr)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Scenario::ALL.iter().map(|sc| sc.name()).collect();
                format!(
                    "unknown scenario `{s}` (expected one of {})",
                    names.join(", ")
                )
            })
    }
}
