//! Linear state-space models, linearization and structural analysis.

use crate::error::{Error, Result};
use crate::numkit::{eigenvalues, rank, Matrix};
use crate::plant::{analytic_jacobian, round_decimals, EquilibriumPoint, PlantParams, Rounding};

/// Real-part margin for stability: eigenvalues must satisfy `re < -STABILITY_MARGIN`.
pub const STABILITY_MARGIN: f64 = 1e-9;

/// Default finite-difference step before per-component scaling.
pub const DEFAULT_FD_STEP: f64 = 1e-6;

/// `dx = A x + B u`, `y = C x + D u`, in deviation variables around `op_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
    pub op_point: Option<EquilibriumPoint>,
}

impl StateSpace {
    pub fn new(a: Matrix, b: Matrix, c: Matrix, d: Matrix) -> Result<Self> {
        let n = a.rows();
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "A must be square, got {}x{}",
                a.rows(),
                a.cols()
            )));
        }
        if b.rows() != n {
            return Err(Error::Dimension(format!(
                "B has {} rows, expected {n}",
                b.rows()
            )));
        }
        if c.cols() != n {
            return Err(Error::Dimension(format!(
                "C has {} cols, expected {n}",
                c.cols()
            )));
        }
        if d.rows() != c.rows() || d.cols() != b.cols() {
            return Err(Error::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.rows(),
                d.cols(),
                c.rows(),
                b.cols()
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            op_point: None,
        })
    }

    /// Convenience for single-input single-output models with `D = 0`.
    pub fn siso(a: Matrix, b: Matrix, c: Matrix) -> Result<Self> {
        Self::new(a, b, c, Matrix::zeros(1, 1))
    }

    pub fn with_op_point(mut self, eq: EquilibriumPoint) -> Self {
        self.op_point = Some(eq);
        self
    }

    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.cols()
    }

    pub fn outputs(&self) -> usize {
        self.c.rows()
    }

    /// `(Aᵀ, Cᵀ, Bᵀ, Dᵀ)`: controllability of one is observability of the other.
    pub fn dual(&self) -> StateSpace {
        StateSpace {
            a: self.a.transpose(),
            b: self.c.transpose(),
            c: self.b.transpose(),
            d: self.d.transpose(),
            op_point: None,
        }
    }
}

/// Central-difference Jacobian of `f(x, u)` with respect to `x` and `u`.
///
/// The step for component `i` is `h * max(1, |x_i|)`; `h` defaults to
/// [`DEFAULT_FD_STEP`].
pub fn numeric_jacobian<F>(f: F, x0: &[f64], u0: f64, h: Option<f64>) -> Result<(Matrix, Matrix)>
where
    F: Fn(&[f64], f64) -> Result<Vec<f64>>,
{
    let h = h.unwrap_or(DEFAULT_FD_STEP);
    if !(h > 0.0) {
        return Err(Error::Dimension(format!(
            "finite-difference step must be > 0, got {h}"
        )));
    }
    let n = x0.len();
    let mut a = Matrix::zeros(n, n);
    let mut x = x0.to_vec();
    for j in 0..n {
        let step = h * x0[j].abs().max(1.0);
        let (hi, lo) = (x0[j] + step, x0[j] - step);
        x[j] = hi;
        let plus = f(&x, u0)?;
        x[j] = lo;
        let minus = f(&x, u0)?;
        x[j] = x0[j];
        for i in 0..n {
            a[(i, j)] = (plus[i] - minus[i]) / (hi - lo);
        }
    }
    let step = h * u0.abs().max(1.0);
    let (hi, lo) = (u0 + step, u0 - step);
    let plus = f(x0, hi)?;
    let minus = f(x0, lo)?;
    let b = Matrix::column(
        &plus
            .iter()
            .zip(&minus)
            .map(|(p, m)| (p - m) / (hi - lo))
            .collect::<Vec<_>>(),
    );
    Ok((a, b))
}

/// Linear model about `eq` with output `y = x1`.
///
/// Under [`Rounding::Paper`] the state matrix entries are rounded to one
/// decimal, matching the tabulated reference model.
pub fn linearize(p: &PlantParams, eq: &EquilibriumPoint) -> Result<StateSpace> {
    if eq.is_degenerate() {
        return Err(Error::DegenerateEquilibrium);
    }
    let (mut a, b) = analytic_jacobian(eq, p)?;
    if eq.rounding == Rounding::Paper {
        a = a.map(|v| round_decimals(v, 1));
    }
    let c = Matrix::row(&[1.0, 0.0, 0.0]);
    Ok(StateSpace::siso(a, b, c)?.with_op_point(*eq))
}

/// `[B, AB, A²B, ..., Aⁿ⁻¹B]`.
pub fn controllability_matrix(ss: &StateSpace) -> Matrix {
    let mut blocks = Vec::with_capacity(ss.order());
    let mut block = ss.b.clone();
    for _ in 0..ss.order() {
        let next = &ss.a * &block;
        blocks.push(block);
        block = next;
    }
    Matrix::hstack(&blocks).expect("blocks share row count")
}

/// `[C; CA; CA²; ...; CAⁿ⁻¹]`.
pub fn observability_matrix(ss: &StateSpace) -> Matrix {
    let mut blocks = Vec::with_capacity(ss.order());
    let mut block = ss.c.clone();
    for _ in 0..ss.order() {
        let next = &block * &ss.a;
        blocks.push(block);
        block = next;
    }
    Matrix::vstack(&blocks).expect("blocks share column count")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankTest {
    pub full_rank: bool,
    pub rank: usize,
}

pub fn is_controllable(ss: &StateSpace) -> RankTest {
    let rank = rank(&controllability_matrix(ss));
    RankTest {
        full_rank: rank == ss.order(),
        rank,
    }
}

pub fn is_observable(ss: &StateSpace) -> RankTest {
    let rank = rank(&observability_matrix(ss));
    RankTest {
        full_rank: rank == ss.order(),
        rank,
    }
}

/// True when every eigenvalue has real part below `-STABILITY_MARGIN`.
pub fn is_stable(m: &Matrix) -> Result<bool> {
    Ok(eigenvalues(m)?.iter().all(|e| e.re < -STABILITY_MARGIN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{dynamics, equilibrium, equilibrium_with, StateVector};

    const P: PlantParams = PlantParams::reference();

    fn mbss_fn(p: PlantParams) -> impl Fn(&[f64], f64) -> Result<Vec<f64>> {
        move |x, u| {
            let d = dynamics(&StateVector::new(x[0], x[1], x[2]), u, &p)?;
            Ok(d.to_array().to_vec())
        }
    }

    #[test]
    fn numeric_jacobian_of_linear_map() {
        let m = Matrix::from_rows(&[[1.0, -2.0], [0.5, 3.0]]);
        let nvec = [4.0, -1.0];
        let f = |x: &[f64], u: f64| {
            Ok(vec![
                m[(0, 0)] * x[0] + m[(0, 1)] * x[1] + nvec[0] * u,
                m[(1, 0)] * x[0] + m[(1, 1)] * x[1] + nvec[1] * u,
            ])
        };
        let (a, b) = numeric_jacobian(f, &[0.3, -7.0], 2.0, None).unwrap();
        assert!(a.max_abs_diff(&m) < 1e-8);
        assert!(b.max_abs_diff(&Matrix::column(&nvec)) < 1e-8);
    }

    #[test]
    fn numeric_jacobian_matches_analytic_at_exact_equilibrium() {
        let eq = equilibrium(&P);
        let (a_num, b_num) =
            numeric_jacobian(mbss_fn(P), &eq.state.to_array(), eq.input_voltage, None).unwrap();
        let (a, b) = analytic_jacobian(&eq, &P).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let tol = 1e-5 * a[(i, j)].abs().max(1.0);
                assert!((a_num[(i, j)] - a[(i, j)]).abs() < tol, "A({i},{j})");
            }
            assert!((b_num[(i, 0)] - b[(i, 0)]).abs() < 1e-5 * b[(i, 0)].abs().max(1.0));
        }
    }

    #[test]
    fn numeric_jacobian_at_rounded_point() {
        let eq = equilibrium_with(&P, Rounding::Paper);
        let (a, _) =
            numeric_jacobian(mbss_fn(P), &eq.state.to_array(), eq.input_voltage, None).unwrap();
        assert!((a[(1, 0)] - 296.3).abs() < 0.01);
    }

    #[test]
    fn numeric_jacobian_propagates_domain_error() {
        let r = numeric_jacobian(mbss_fn(P), &[0.0, 0.0, 0.8], 8.0, None);
        assert!(matches!(r, Err(Error::Domain { .. })));
        assert!(numeric_jacobian(mbss_fn(P), &[0.05, 0.0, 0.8], 8.0, Some(0.0)).is_err());
    }

    #[test]
    fn linearize_rounded_matches_tabulated_model() {
        let ss = linearize(&P, &equilibrium_with(&P, Rounding::Paper)).unwrap();
        let expect_a = [[0.0, 1.0, 0.0], [296.29, 0.0, -22.2], [0.0, 0.0, -1.2]];
        for i in 0..3 {
            for j in 0..3 {
                let want = expect_a[i][j];
                let got = ss.a[(i, j)];
                assert!(
                    (got - want).abs() <= 5e-4 * want.abs(),
                    "A({i},{j}) {got} vs {want}"
                );
            }
        }
        assert_eq!(ss.b, Matrix::column(&[0.0, 0.0, 0.12]));
        assert_eq!(ss.c, Matrix::row(&[1.0, 0.0, 0.0]));
        assert_eq!(ss.d, Matrix::zeros(1, 1));
        assert!(ss.op_point.is_some());
    }

    #[test]
    fn linearize_exact() {
        let ss = linearize(&P, &equilibrium(&P)).unwrap();
        assert!((ss.a[(1, 0)] - 343.0).abs() < 1e-9);
    }

    #[test]
    fn linearize_rejects_degenerate() {
        let p = PlantParams {
            nominal_voltage: 0.0,
            ..P
        };
        assert_eq!(
            linearize(&p, &equilibrium(&p)).unwrap_err(),
            Error::DegenerateEquilibrium
        );
    }

    fn tabulated() -> StateSpace {
        StateSpace::siso(
            Matrix::from_rows(&[[0.0, 1.0, 0.0], [296.29, 0.0, -22.2], [0.0, 0.0, -1.2]]),
            Matrix::column(&[0.0, 0.0, 0.12]),
            Matrix::row(&[1.0, 0.0, 0.0]),
        )
        .unwrap()
    }

    #[test]
    fn controllability_of_tabulated_model() {
        let ss = tabulated();
        let expect = Matrix::from_rows(&[
            [0.0, 0.0, -2.6640],
            [0.0, -2.6640, 3.1968],
            [0.1200, -0.1440, 0.1728],
        ]);
        assert!(controllability_matrix(&ss).max_abs_diff(&expect) < 1e-9);
        assert_eq!(
            is_controllable(&ss),
            RankTest {
                full_rank: true,
                rank: 3
            }
        );
    }

    #[test]
    fn observability_of_tabulated_model() {
        let ss = tabulated();
        let expect = Matrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [296.29, 0.0, -22.20]]);
        assert!(observability_matrix(&ss).max_abs_diff(&expect) < 1e-12);
        assert!(is_observable(&ss).full_rank);
    }

    #[test]
    fn trivial_rank_cases() {
        let ss = StateSpace::new(
            Matrix::zeros(2, 2),
            Matrix::column(&[1.0, 0.0]),
            Matrix::identity(2),
            Matrix::zeros(2, 1),
        )
        .unwrap();
        assert_eq!(
            controllability_matrix(&ss),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0]])
        );
        // full-state output: the stacked observability matrix starts with I
        let o = observability_matrix(&ss);
        assert_eq!(o.rows(), 4);
        assert_eq!(o.row_slice(0), &[1.0, 0.0]);
        assert_eq!(o.row_slice(1), &[0.0, 1.0]);

        let repeated = StateSpace::siso(
            Matrix::diag(&[1.0, 1.0]),
            Matrix::column(&[1.0, 0.0]),
            Matrix::row(&[1.0, 1.0]),
        )
        .unwrap();
        assert_eq!(
            is_controllable(&repeated),
            RankTest {
                full_rank: false,
                rank: 1
            }
        );

        let blind =
            StateSpace::siso(tabulated().a, tabulated().b, Matrix::row(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(
            is_observable(&blind),
            RankTest {
                full_rank: false,
                rank: 0
            }
        );
    }

    #[test]
    fn exact_model_is_controllable_and_observable() {
        let ss = linearize(&P, &equilibrium(&P)).unwrap();
        assert!(is_controllable(&ss).full_rank);
        assert!(is_observable(&ss).full_rank);
    }

    #[test]
    fn stability_verdicts() {
        assert!(!is_stable(&tabulated().a).unwrap());
        assert!(is_stable(&Matrix::diag(&[-1.0, -2.0])).unwrap());
        // marginal eigenvalue on the imaginary axis is not stable
        assert!(!is_stable(&Matrix::diag(&[0.0, -2.0])).unwrap());
    }

    #[test]
    fn state_space_dimension_checks() {
        let bad = StateSpace::new(
            Matrix::zeros(2, 2),
            Matrix::column(&[1.0, 0.0, 0.0]),
            Matrix::row(&[1.0, 0.0]),
            Matrix::zeros(1, 1),
        );
        assert!(matches!(bad, Err(Error::Dimension(_))));
        assert!(StateSpace::siso(
            Matrix::zeros(2, 3),
            Matrix::zeros(2, 1),
            Matrix::zeros(1, 3)
        )
        .is_err());
    }
}
