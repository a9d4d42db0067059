use super::placement::{placement, PlacementLedger};
use super::PoleSpec;
use crate::error::{Error, Result};
use crate::lti::{is_observable, StateSpace};
use crate::numkit::Matrix;

/// Full-order observer gain `G` for `x̂' = (A + G C) x̂ + B u - G y`.
///
/// Computed as the transpose of the placement gain for the dual pair
/// `(Aᵀ, Cᵀ)`, so `eig(A + G C)` equals the requested poles.
pub fn observer_gain(ss: &StateSpace, spec: &PoleSpec) -> Result<Matrix> {
    Ok(observer_ledger(ss, spec)?.gain.transpose())
}

/// Placement ledger of the dual problem; its `gain` is `Gᵀ`.
pub fn observer_ledger(ss: &StateSpace, spec: &PoleSpec) -> Result<PlacementLedger> {
    let test = is_observable(ss);
    if !test.full_rank {
        return Err(Error::NotObservable {
            rank: test.rank,
            n: ss.order(),
        });
    }
    let dual = ss.dual();
    placement(&dual.a, &dual.b, spec)
}
