//! Controller and observer synthesis.
//!
//! Sign conventions are kept as in the classical derivation and never
//! normalized:
//!
//! * placement gain `K_fb`: `u = K_fb x + v`, closed loop `A + B K_fb`
//! * observer gain `G_obs`: `x̂' = (A + G C) x̂ + B u - G y`
//! * LQR gain `K_lqr`: `u = -K_lqr x`, closed loop `A - B K_lqr`

mod care;
mod observer;
mod placement;

pub use care::{
    care_residual, lqr_gain, lyapunov, min_eigenvalue, seed_poles, solve_care, solve_care_from,
    CareSolution, CARE_MAX_ITER, CARE_STEP_TOL,
};
pub use observer::{observer_gain, observer_ledger};
pub use placement::{
    canonical_form, desired_poly, place_poles, place_poles_ledger, PlacementLedger,
};

use crate::error::Result;
use crate::lti::{is_stable, StateSpace};
use crate::numkit::{eigenvalues, root_set_distance, ComplexRoot, Matrix};

/// Closed-loop eigenvalues must land within this distance of the request.
pub const POLE_MATCH_TOL: f64 = 1e-3;

/// Desired closed-loop (or observer error) eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct PoleSpec {
    poles: Vec<ComplexRoot>,
}

impl PoleSpec {
    pub fn new(poles: Vec<ComplexRoot>) -> Self {
        Self { poles }
    }

    pub fn real(poles: &[f64]) -> Self {
        Self::new(poles.iter().map(|p| ComplexRoot::new(*p, 0.0)).collect())
    }

    pub fn poles(&self) -> &[ComplexRoot] {
        &self.poles
    }

    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    /// Every complex pole has its conjugate in the set (with multiplicity).
    pub fn is_conjugate_closed(&self) -> bool {
        let scale = self.poles.iter().fold(1.0f64, |m, p| m.max(p.norm()));
        let tol = 1e-9 * scale;
        let mut unmatched: Vec<ComplexRoot> = self
            .poles
            .iter()
            .copied()
            .filter(|p| p.im.abs() > tol)
            .collect();
        while let Some(p) = unmatched.pop() {
            match unmatched.iter().position(|q| (q - p.conj()).norm() <= tol) {
                Some(i) => {
                    unmatched.swap_remove(i);
                }
                None => return false,
            }
        }
        true
    }

    /// All poles strictly in the open left half plane.
    pub fn is_stabilizing(&self) -> bool {
        self.poles.iter().all(|p| p.re < 0.0)
    }
}

/// Gains of one design session, each in its own sign convention.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GainSet {
    /// `u = K_fb x + v`.
    pub k_fb: Option<Matrix>,
    /// `x̂' = (A + G C) x̂ + B u - G y`.
    pub g_obs: Option<Matrix>,
    /// `u = -K_lqr x`.
    pub k_lqr: Option<Matrix>,
}

impl GainSet {
    /// Lists every gain invariant that does not hold for `ss`.
    pub fn violations(
        &self,
        ss: &StateSpace,
        controller: Option<&PoleSpec>,
        observer: Option<&PoleSpec>,
    ) -> Result<Vec<String>> {
        let mut out = Vec::new();
        if let (Some(k), Some(spec)) = (&self.k_fb, controller) {
            let eig = eigenvalues(&(&ss.a + &(&ss.b * k)))?;
            let d = root_set_distance(&eig, spec.poles());
            if d > POLE_MATCH_TOL {
                out.push(format!("eig(A + B K_fb) off by {d:.3e}"));
            }
        }
        if let (Some(g), Some(spec)) = (&self.g_obs, observer) {
            let eig = eigenvalues(&(&ss.a + &(g * &ss.c)))?;
            let d = root_set_distance(&eig, spec.poles());
            if d > POLE_MATCH_TOL {
                out.push(format!("eig(A + G C) off by {d:.3e}"));
            }
        }
        if let Some(k) = &self.k_lqr {
            if !is_stable(&(&ss.a - &(&ss.b * k)))? {
                out.push("A - B K_lqr is not stable".into());
            }
        }
        Ok(out)
    }
}
