//! Nonlinear magnetic ball suspension model.
//!
//! State is `(y, dy/dt, i)`: ball distance below the magnet, its velocity
//! and the coil current. The input is the coil voltage.
//!
//! ```text
//! dx1/dt = x2
//! dx2/dt = g - K x3^2 / (M x1^2)
//! dx3/dt = (x1 / L) (u - R x3)
//! ```
//!
//! The electrical equation uses the position-scaled inductance form
//! `di/dt = (y/L)(e - R i)` and omits the `dL/dy * dy/dt` back-EMF term that
//! a full derivation from `L(y) = L/y` would add.

use crate::error::{Error, Result};
use crate::numkit::Matrix;

/// Physical constants of the rig.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantParams {
    /// Ball mass M \[kg\].
    pub mass: f64,
    /// Electromagnet force constant K \[N·m²/A²\].
    pub force_const: f64,
    /// Coil inductance L \[H\].
    pub inductance: f64,
    /// Coil resistance R \[Ω\].
    pub resistance: f64,
    /// Gravitational acceleration g \[m/s²\].
    pub gravity: f64,
    /// Nominal supply voltage E \[V\].
    pub nominal_voltage: f64,
}

impl PlantParams {
    /// E = 8 V, R = 10 Ω, K = 0.01, M = 0.2 kg, L = 0.5 H, g = 9.8 m/s².
    pub const fn reference() -> Self {
        Self {
            mass: 0.2,
            force_const: 0.01,
            inductance: 0.5,
            resistance: 10.0,
            gravity: 9.8,
            nominal_voltage: 8.0,
        }
    }

    /// Checks every field and reports all violations together.
    ///
    /// The nominal voltage may be zero: that yields the degenerate contact
    /// equilibrium, which [`equilibrium`] reports and linearization rejects.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        for (name, v) in [
            ("M", self.mass),
            ("K", self.force_const),
            ("L", self.inductance),
            ("R", self.resistance),
            ("g", self.gravity),
        ] {
            if !v.is_finite() || v <= 0.0 {
                problems.push(format!("{name} must be finite and > 0 (got {v})"));
            }
        }
        let e = self.nominal_voltage;
        if !e.is_finite() || e < 0.0 {
            problems.push(format!("E must be finite and >= 0 (got {e})"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(problems))
        }
    }
}

impl Default for PlantParams {
    fn default() -> Self {
        Self::reference()
    }
}

/// `(x1, x2, x3) = (y, dy/dt, i)`; also used for time derivatives of the state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub position: f64,
    pub velocity: f64,
    pub current: f64,
}

impl StateVector {
    pub const fn new(position: f64, velocity: f64, current: f64) -> Self {
        Self {
            position,
            velocity,
            current,
        }
    }

    pub const fn to_array(self) -> [f64; 3] {
        [self.position, self.velocity, self.current]
    }

    pub const fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// How the operating point is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Rounding {
    /// Exact closed-form equilibrium.
    #[default]
    Exact,
    /// Reproduces the tabulated reference design: position rounded to two
    /// decimals (0.0571 m becomes 0.06 m) and the linearized state matrix
    /// rounded to one decimal.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumPoint {
    pub state: StateVector,
    pub input_voltage: f64,
    pub rounding: Rounding,
}

impl EquilibriumPoint {
    /// Zero (or negative) hover distance: the ball sits on the magnet.
    pub fn is_degenerate(&self) -> bool {
        self.state.position <= 0.0
    }
}

/// State derivative at `x` under input voltage `u`.
pub fn dynamics(x: &StateVector, u: f64, p: &PlantParams) -> Result<StateVector> {
    let y = x.position;
    if !(y > 0.0) {
        return Err(Error::Domain { x1: y });
    }
    let accel = p.gravity - p.force_const * x.current * x.current / (p.mass * y * y);
    let di = (y / p.inductance) * (u - p.resistance * x.current);
    Ok(StateVector::new(x.velocity, accel, di))
}

/// Measured output: ball position.
pub fn output(x: &StateVector) -> f64 {
    x.position
}

/// Exact equilibrium `((E/R)·sqrt(K/(M g)), 0, E/R)` at the nominal voltage.
pub fn equilibrium(p: &PlantParams) -> EquilibriumPoint {
    let current = p.nominal_voltage / p.resistance;
    let position = current * (p.force_const / (p.mass * p.gravity)).sqrt();
    EquilibriumPoint {
        state: StateVector::new(position, 0.0, current),
        input_voltage: p.nominal_voltage,
        rounding: Rounding::Exact,
    }
}

pub fn equilibrium_with(p: &PlantParams, rounding: Rounding) -> EquilibriumPoint {
    let mut eq = equilibrium(p);
    if rounding == Rounding::Paper {
        eq.state.position = round_decimals(eq.state.position, 2);
        eq.rounding = Rounding::Paper;
    }
    eq
}

pub fn round_decimals(v: f64, decimals: i32) -> f64 {
    let s = 10f64.powi(decimals);
    (v * s).round() / s
}

/// Closed-form partial derivatives of [`dynamics`] at the operating point.
///
/// Returns `(A, B)` with
/// `A = [[0, 1, 0], [2K i0²/(M y0³), 0, -2K i0/(M y0²)], [(E - R i0)/L, 0, -R y0/L]]`
/// and `B = [0, 0, y0/L]ᵀ`.
pub fn analytic_jacobian(eq: &EquilibriumPoint, p: &PlantParams) -> Result<(Matrix, Matrix)> {
    let y0 = eq.state.position;
    if !(y0 > 0.0) {
        return Err(Error::Domain { x1: y0 });
    }
    let i0 = eq.state.current;
    let (m, k, l, r) = (p.mass, p.force_const, p.inductance, p.resistance);
    let a = Matrix::from_rows(&[
        [0.0, 1.0, 0.0],
        [
            2.0 * k * i0 * i0 / (m * y0.powi(3)),
            0.0,
            -2.0 * k * i0 / (m * y0 * y0),
        ],
        [(eq.input_voltage - r * i0) / l, 0.0, -r * y0 / l],
    ]);
    let b = Matrix::column(&[0.0, 0.0, y0 / l]);
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: PlantParams = PlantParams::reference();

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn equilibrium_values() {
        let eq = equilibrium(&P);
        assert!(close(eq.state.position, 0.8 / 14.0, 1e-15));
        assert!(close(eq.state.position, 0.0571428, 1e-7));
        assert_eq!(eq.state.velocity, 0.0);
        assert_eq!(eq.state.current, 0.8);
        assert!(!eq.is_degenerate());

        let rounded = equilibrium_with(&P, Rounding::Paper);
        assert_eq!(rounded.state, StateVector::new(0.06, 0.0, 0.8));
        assert_eq!(rounded.rounding, Rounding::Paper);
    }

    #[test]
    fn zero_voltage_is_degenerate() {
        let p = PlantParams {
            nominal_voltage: 0.0,
            ..P
        };
        assert!(p.validate().is_ok());
        let eq = equilibrium(&p);
        assert_eq!(eq.state, StateVector::new(0.0, 0.0, 0.0));
        assert!(eq.is_degenerate());
        assert!(matches!(
            analytic_jacobian(&eq, &p),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn validate_collects_all_problems() {
        let p = PlantParams {
            mass: 0.0,
            resistance: -1.0,
            nominal_voltage: f64::NAN,
            ..P
        };
        match p.validate() {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dynamics_examples() {
        let eq = equilibrium(&P);
        let d = dynamics(&eq.state, 8.0, &P).unwrap();
        assert!(d.to_array().iter().all(|v| v.abs() < 1e-12), "{d:?}");

        // 9.8 - 0.01*0.64/(0.2*0.0036)
        let d = dynamics(&StateVector::new(0.06, 0.0, 0.8), 8.0, &P).unwrap();
        assert!(close(d.velocity, 9.8 - 0.0064 / 0.00072, 1e-12));
        assert!(close(d.velocity, 0.9111, 1e-4));
        assert_eq!((d.position, d.current), (0.0, 0.0));

        let d = dynamics(&StateVector::new(0.1, 0.0, 0.8), 8.0, &P).unwrap();
        assert!(close(d.velocity, 6.6, 1e-12));

        assert!(matches!(
            dynamics(&StateVector::new(0.0, 1.0, 1.0), 8.0, &P),
            Err(Error::Domain { x1 }) if x1 == 0.0
        ));
        assert!(dynamics(&StateVector::new(-0.01, 0.0, 0.0), 0.0, &P).is_err());
    }

    #[test]
    fn output_is_position() {
        assert_eq!(output(&StateVector::new(0.06, 0.0, 0.8)), 0.06);
        assert_eq!(output(&StateVector::default()), 0.0);
        assert_eq!(output(&StateVector::new(1.5, -2.0, 3.0)), 1.5);
    }

    #[test]
    fn jacobian_at_rounded_point() {
        let eq = equilibrium_with(&P, Rounding::Paper);
        let (a, b) = analytic_jacobian(&eq, &P).unwrap();
        // unrounded formula at y0 = 0.06: 0.0128/0.0000432 and -0.016/0.00072
        assert!(close(a[(1, 0)], 296.296296, 1e-5));
        assert!(close(a[(1, 2)], -22.222222, 1e-5));
        assert!(close(a[(2, 2)], -1.2, 1e-12));
        assert!(close(b[(2, 0)], 0.12, 1e-15));
        assert_eq!(a[(2, 0)], 0.0);
    }

    #[test]
    fn jacobian_at_exact_point() {
        let eq = equilibrium(&P);
        let (a, b) = analytic_jacobian(&eq, &P).unwrap();
        let y0 = eq.state.position;
        // at equilibrium A21 = 2g/y0, A23 = -2g/i0
        assert!(close(a[(1, 0)], 2.0 * 9.8 / y0, 1e-9));
        assert!(close(a[(1, 0)], 343.0, 1e-9));
        assert!(close(a[(1, 2)], -24.5, 1e-12));
        assert!(close(a[(2, 2)], -1.142857142857, 1e-9));
        assert!(close(b[(2, 0)], 0.1142857142857, 1e-12));
        for (i, j) in [(0, 0), (0, 2), (1, 1), (2, 1), (2, 0)] {
            assert_eq!(a[(i, j)], 0.0);
        }
        assert_eq!(a[(0, 1)], 1.0);
        assert_eq!((b[(0, 0)], b[(1, 0)]), (0.0, 0.0));
    }

    #[test]
    fn jacobian_off_equilibrium_input_entry() {
        // general form (E - R i0)/L for A(3,1)
        let eq = EquilibriumPoint {
            state: StateVector::new(0.05, 0.0, 0.7),
            input_voltage: 8.0,
            rounding: Rounding::Exact,
        };
        let (a, _) = analytic_jacobian(&eq, &P).unwrap();
        assert!(close(a[(2, 0)], (8.0 - 7.0) / 0.5, 1e-12));
    }
}
