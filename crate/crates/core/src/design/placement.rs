use super::PoleSpec;
use crate::error::{Error, Result};
use crate::lti::{controllability_matrix, StateSpace};
use crate::numkit::{char_poly, expand_roots, invert, rank, sort_roots, Matrix, Polynomial};

/// Every intermediate quantity of the canonical-form placement procedure.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementLedger {
    /// Open-loop characteristic polynomial `phi(s)`.
    pub open_loop_poly: Polynomial,
    pub canonical_a: Matrix,
    pub canonical_b: Matrix,
    /// Desired closed-loop polynomial `phi_bar(s)`.
    pub desired_poly: Polynomial,
    /// `T_c = Ctrb(A, B) · Ctrb(A_c, B_c)⁻¹`.
    pub transform: Matrix,
    /// `K_c = [a_0 - ā_0, ..., a_{n-1} - ā_{n-1}]`.
    pub canonical_gain: Matrix,
    /// `K = K_c T_c⁻¹`, for the law `u = K x + v`.
    pub gain: Matrix,
}

/// Controllable canonical (companion) form of a monic polynomial.
///
/// Superdiagonal ones, last row `[-a_0, ..., -a_{n-1}]`, `B_c = e_n`.
pub fn canonical_form(charpoly: &Polynomial) -> Result<(Matrix, Matrix)> {
    let n = charpoly.degree();
    if n == 0 || charpoly.is_zero() {
        return Err(Error::Dimension("canonical form needs degree >= 1".into()));
    }
    if !charpoly.is_monic() {
        return Err(Error::Dimension(format!(
            "canonical form needs a monic polynomial, leading coefficient is {}",
            charpoly.leading()
        )));
    }
    let mut a = Matrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for (j, coeff) in charpoly.lower_coeffs().into_iter().enumerate() {
        a[(n - 1, j)] = -coeff;
    }
    let mut b = Matrix::zeros(n, 1);
    b[(n - 1, 0)] = 1.0;
    Ok((a, b))
}

/// Monic real polynomial with the requested roots.
///
/// Poles are expanded in sorted order so the result does not depend on the
/// order they were listed in.
pub fn desired_poly(spec: &PoleSpec) -> Result<Polynomial> {
    if spec.is_empty() {
        return Err(Error::InvalidPoleSpec("no poles given".into()));
    }
    if !spec.is_conjugate_closed() {
        return Err(Error::ComplexCoefficients);
    }
    let mut poles = spec.poles().to_vec();
    sort_roots(&mut poles);
    let coeffs = expand_roots(&poles);
    let scale = coeffs.iter().fold(1.0f64, |m, c| m.max(c.norm()));
    if coeffs.iter().any(|c| c.im.abs() > 1e-9 * scale) {
        return Err(Error::ComplexCoefficients);
    }
    Polynomial::new(coeffs.iter().map(|c| c.re).collect())
}

/// Single-input pole placement through the controllable canonical form.
pub fn place_poles(ss: &StateSpace, spec: &PoleSpec) -> Result<Matrix> {
    Ok(place_poles_ledger(ss, spec)?.gain)
}

pub fn place_poles_ledger(ss: &StateSpace, spec: &PoleSpec) -> Result<PlacementLedger> {
    placement(&ss.a, &ss.b, spec)
}

pub(crate) fn placement(a: &Matrix, b: &Matrix, spec: &PoleSpec) -> Result<PlacementLedger> {
    let n = a.rows();
    if b.cols() != 1 || b.rows() != n {
        return Err(Error::Dimension(format!(
            "placement needs an {n}x1 input matrix, got {}x{}",
            b.rows(),
            b.cols()
        )));
    }
    if spec.len() != n {
        return Err(Error::InvalidPoleSpec(format!(
            "{} poles given for a system of order {n}",
            spec.len()
        )));
    }
    let ss = StateSpace::new(
        a.clone(),
        b.clone(),
        Matrix::zeros(1, n),
        Matrix::zeros(1, 1),
    )?;
    let ctrb = controllability_matrix(&ss);
    let r = rank(&ctrb);
    if r < n {
        return Err(Error::NotControllable { rank: r, n });
    }

    let open_loop_poly = char_poly(a)?;
    let (canonical_a, canonical_b) = canonical_form(&open_loop_poly)?;
    let desired = desired_poly(spec)?;

    let canonical_ss = StateSpace::new(
        canonical_a.clone(),
        canonical_b.clone(),
        Matrix::zeros(1, n),
        Matrix::zeros(1, 1),
    )?;
    let transform = &ctrb * &invert(&controllability_matrix(&canonical_ss))?;

    let gains: Vec<f64> = open_loop_poly
        .lower_coeffs()
        .iter()
        .zip(desired.lower_coeffs())
        .map(|(a, abar)| a - abar)
        .collect();
    let canonical_gain = Matrix::row(&gains);
    let gain = &canonical_gain * &invert(&transform)?;

    Ok(PlacementLedger {
        open_loop_poly,
        canonical_a,
        canonical_b,
        desired_poly: desired,
        transform,
        canonical_gain,
        gain,
    })
}
