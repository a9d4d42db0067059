//! Continuous-time algebraic Riccati equation by Kleinman–Newton iteration.
//!
//! Solves `S A + Aᵀ S + Q - S B R⁻¹ Bᵀ S = 0` for the stabilizing `S`.
//! Each step solves the Lyapunov equation
//! `(A - B K)ᵀ S + S (A - B K) = -(Q + Kᵀ R K)` and updates `K = R⁻¹ Bᵀ S`.

use super::placement::place_poles;
use super::PoleSpec;
use crate::error::{Error, Result};
use crate::lti::{is_stable, StateSpace};
use crate::numkit::{solve_dense, symmetric_eigenvalues, Matrix};

pub const CARE_MAX_ITER: usize = 100;
/// Relative step tolerance on `S` (scaled by `max(1, ||S||_inf)`).
pub const CARE_STEP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct CareSolution {
    pub s: Matrix,
    /// Optimal gain for `u = -K_lqr x`.
    pub k_lqr: Matrix,
    pub iterations: usize,
    /// `||S A + Aᵀ S + Q - S B R⁻¹ Bᵀ S||_inf`.
    pub residual: f64,
}

/// Seed poles for the stabilizing initial gain: -5, -10, -20, -40, ...
pub fn seed_poles(n: usize) -> PoleSpec {
    PoleSpec::real(
        &(0..n)
            .map(|i| -5.0 * 2f64.powi(i as i32))
            .collect::<Vec<_>>(),
    )
}

/// Stabilizing solution of the CARE for scalar control weight `r_weight`.
pub fn solve_care(ss: &StateSpace, q: &Matrix, r_weight: f64) -> Result<CareSolution> {
    check_weights(ss, q, r_weight)?;
    let n = ss.order();
    let seed = if is_stable(&ss.a)? {
        Matrix::zeros(1, n)
    } else {
        let k_fb = place_poles(ss, &seed_poles(n)).map_err(|_| Error::NoStabilizingSeed)?;
        // placement uses u = K x; the Riccati loop uses u = -K x
        -&k_fb
    };
    solve_care_from(ss, q, r_weight, seed)
}

/// Kleinman iteration from an explicit initial gain (`u = -k0 x`), which
/// must make `A - B k0` stable.
pub fn solve_care_from(
    ss: &StateSpace,
    q: &Matrix,
    r_weight: f64,
    k0: Matrix,
) -> Result<CareSolution> {
    check_weights(ss, q, r_weight)?;
    let closed = &ss.a - &(&ss.b * &k0);
    if !is_stable(&closed).unwrap_or(false) {
        return Err(Error::NoStabilizingSeed);
    }

    let bt = ss.b.transpose();
    let mut k = k0;
    let mut s_prev: Option<Matrix> = None;
    let mut last_step = f64::INFINITY;
    for iter in 1..=CARE_MAX_ITER {
        let closed = &ss.a - &(&ss.b * &k);
        let rhs = q + &(&k.transpose() * &k).scale(r_weight);
        let s = lyapunov(&closed, &rhs)?.symmetrize();
        if !s.is_finite() {
            break;
        }
        k = (&bt * &s).scale(1.0 / r_weight);
        if let Some(prev) = &s_prev {
            last_step = (&s - prev).norm_inf();
            if last_step < CARE_STEP_TOL * s.norm_inf().max(1.0) {
                let (s, residual) = refine(ss, s, q, r_weight);
                return Ok(CareSolution {
                    k_lqr: (&bt * &s).scale(1.0 / r_weight),
                    s,
                    iterations: iter,
                    residual,
                });
            }
        }
        s_prev = Some(s);
    }
    Err(Error::NoConvergence {
        what: "Kleinman-Newton Riccati iteration",
        iterations: CARE_MAX_ITER,
        residual: last_step,
    })
}

/// Solves `Aᵀ S + S A = -rhs` through the n²-dimensional Kronecker system.
pub fn lyapunov(a: &Matrix, rhs: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    if !a.is_square() || rhs.rows() != n || rhs.cols() != n {
        return Err(Error::Dimension("Lyapunov equation shapes".into()));
    }
    let mut kron = Matrix::zeros(n * n, n * n);
    let mut vec_rhs = Matrix::zeros(n * n, 1);
    // row (i, j): sum_k a[k][i] S[k][j] + sum_k S[i][k] a[k][j]
    for i in 0..n {
        for j in 0..n {
            let row = i * n + j;
            for k in 0..n {
                kron[(row, k * n + j)] += a[(k, i)];
                kron[(row, i * n + k)] += a[(k, j)];
            }
            vec_rhs[(row, 0)] = -rhs[(i, j)];
        }
    }
    let x = solve_dense(&kron, &vec_rhs)?;
    Matrix::new(n, n, x.as_slice().to_vec())
}

pub fn care_residual(ss: &StateSpace, s: &Matrix, q: &Matrix, r_weight: f64) -> f64 {
    residual_matrix(ss, s, q, r_weight).norm_inf()
}

fn residual_matrix(ss: &StateSpace, s: &Matrix, q: &Matrix, r_weight: f64) -> Matrix {
    let sa = s * &ss.a;
    let sb = s * &ss.b;
    let quad = (&sb * &sb.transpose()).scale(1.0 / r_weight);
    (&(&(&sa + &sa.transpose()) + q) - &quad).symmetrize()
}

/// Newton steps in correction form: `Acl^T D + D Acl = -Res(S)`. The small
/// correction is solved to full relative precision, which removes most of
/// the roundoff left by solving for `S` directly.
fn refine(ss: &StateSpace, mut s: Matrix, q: &Matrix, r_weight: f64) -> (Matrix, f64) {
    let bt = ss.b.transpose();
    let mut best = care_residual(ss, &s, q, r_weight);
    for _ in 0..3 {
        let k = (&bt * &s).scale(1.0 / r_weight);
        let closed = &ss.a - &(&ss.b * &k);
        let Ok(delta) = lyapunov(&closed, &residual_matrix(ss, &s, q, r_weight)) else {
            break;
        };
        let candidate = (&s + &delta).symmetrize();
        let res = care_residual(ss, &candidate, q, r_weight);
        if !(res < best) {
            break;
        }
        s = candidate;
        best = res;
    }
    (s, best)
}

/// `K_lqr = R⁻¹ Bᵀ S`, for the control law `u = -K_lqr x`.
pub fn lqr_gain(sol: &CareSolution, ss: &StateSpace, r_weight: f64) -> Matrix {
    (&ss.b.transpose() * &sol.s).scale(1.0 / r_weight)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(s: &Matrix) -> Result<f64> {
    Ok(symmetric_eigenvalues(s)?[0])
}

fn check_weights(ss: &StateSpace, q: &Matrix, r_weight: f64) -> Result<()> {
    let n = ss.order();
    if ss.inputs() != 1 {
        return Err(Error::Dimension(
            "LQR synthesis supports a single input".into(),
        ));
    }
    if q.rows() != n || q.cols() != n {
        return Err(Error::InvalidWeights(format!(
            "Q must be {n}x{n}, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    if q.max_abs_diff(&q.transpose()) > 1e-12 * q.max_abs().max(1.0) {
        return Err(Error::InvalidWeights("Q must be symmetric".into()));
    }
    if min_eigenvalue(q)? < -1e-9 * q.max_abs().max(1.0) {
        return Err(Error::InvalidWeights(
            "Q must be positive semi-definite".into(),
        ));
    }
    if !(r_weight > 0.0) || !r_weight.is_finite() {
        return Err(Error::InvalidWeights(format!(
            "R must be finite and > 0, got {r_weight}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rk4_step;

    fn scalar(a: f64, b: f64) -> StateSpace {
        StateSpace::siso(Matrix::row(&[a]), Matrix::row(&[b]), Matrix::row(&[1.0])).unwrap()
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
    fn scalar_closed_form() {
        // 2s + 1 - s² = 0, stabilizing root 1 + sqrt(2)
        let sol = solve_care(&scalar(1.0, 1.0), &Matrix::row(&[1.0]), 1.0).unwrap();
        let expect = 1.0 + 2f64.sqrt();
        assert!((sol.s[(0, 0)] - expect).abs() < 1e-9);
        assert!((sol.k_lqr[(0, 0)] - expect).abs() < 1e-9);
        assert!(sol.residual < 1e-8);
        let k = lqr_gain(&sol, &scalar(1.0, 1.0), 1.0);
        assert!((k[(0, 0)] - 2.414213562).abs() < 1e-8);
    }

    #[test]
    fn zero_cost_on_stable_plant() {
        let ss = StateSpace::siso(
            Matrix::from_rows(&[[-1.0, 2.0], [0.0, -3.0]]),
            Matrix::column(&[0.0, 1.0]),
            Matrix::row(&[1.0, 0.0]),
        )
        .unwrap();
        let sol = solve_care(&ss, &Matrix::zeros(2, 2), 1.0).unwrap();
        assert!(sol.s.max_abs() < 1e-12);
        assert!(sol.k_lqr.max_abs() < 1e-12);
    }

    #[test]
    fn lqr_gain_of_zero_solution() {
        let sol = CareSolution {
            s: Matrix::zeros(3, 3),
            k_lqr: Matrix::zeros(1, 3),
            iterations: 0,
            residual: 0.0,
        };
        assert_eq!(lqr_gain(&sol, &tabulated(), 1.0), Matrix::zeros(1, 3));
    }

    #[test]
    fn tabulated_system() {
        let ss = tabulated();
        let q = Matrix::diag(&[9.0, 0.0, 0.0]);
        let sol = solve_care(&ss, &q, 1.0).unwrap();
        assert!(sol.iterations <= 25, "{}", sol.iterations);
        assert!(sol.residual < 1e-8, "{}", sol.residual);
        assert!(sol.s.max_abs_diff(&sol.s.transpose()) < 1e-9);
        assert!(min_eigenvalue(&sol.s).unwrap() >= -1e-9);
        let closed = &ss.a - &(&ss.b * &sol.k_lqr);
        assert!(is_stable(&closed).unwrap());
        assert_eq!(lqr_gain(&sol, &ss, 1.0), sol.k_lqr);
    }

    #[test]
    fn gain_invariant_under_cost_scaling() {
        let ss = tabulated();
        let q = Matrix::diag(&[9.0, 0.0, 0.0]);
        let base = solve_care(&ss, &q, 1.0).unwrap();
        for c in [0.1, 10.0] {
            let scaled = solve_care(&ss, &q.scale(c), c).unwrap();
            let diff = scaled.k_lqr.max_abs_diff(&base.k_lqr);
            assert!(diff < 1e-6 * base.k_lqr.max_abs(), "c={c} diff={diff}");
        }
    }

    #[test]
    fn weight_validation() {
        let ss = tabulated();
        assert!(matches!(
            solve_care(&ss, &Matrix::diag(&[1.0, 1.0]), 1.0),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            solve_care(&ss, &Matrix::diag(&[1.0, -1.0, 0.0]), 1.0),
            Err(Error::InvalidWeights(_))
        ));
        assert!(matches!(
            solve_care(&ss, &Matrix::diag(&[1.0, 1.0, 1.0]), 0.0),
            Err(Error::InvalidWeights(_))
        ));
        let asym = Matrix::from_rows(&[[1.0, 0.5, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        assert!(solve_care(&ss, &asym, 1.0).is_err());
    }

    #[test]
    fn uncontrollable_unstable_has_no_seed() {
        let ss = StateSpace::siso(
            Matrix::diag(&[1.0, 1.0]),
            Matrix::column(&[1.0, 0.0]),
            Matrix::row(&[1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(
            solve_care(&ss, &Matrix::identity(2), 1.0).unwrap_err(),
            Error::NoStabilizingSeed
        );
        assert_eq!(
            solve_care_from(
                &scalar(1.0, 1.0),
                &Matrix::row(&[1.0]),
                1.0,
                Matrix::row(&[0.5])
            )
            .unwrap_err(),
            Error::NoStabilizingSeed
        );
    }

    #[test]
    fn lyapunov_scalar() {
        // 2 a s = -q  =>  s = q / 2 for a = -1
        let s = lyapunov(&Matrix::row(&[-1.0]), &Matrix::row(&[3.0])).unwrap();
        assert!((s[(0, 0)] - 1.5).abs() < 1e-15);
    }

    #[test]
    fn lyapunov_kronecker_matches_residual() {
        let a = Matrix::from_rows(&[[-1.0, 2.0, 0.0], [0.0, -3.0, 1.0], [1.0, 0.0, -4.0]]);
        let rhs = Matrix::from_rows(&[[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]]);
        let s = lyapunov(&a, &rhs).unwrap();
        let res = &(&(&a.transpose() * &s) + &(&s * &a)) + &rhs;
        assert!(res.max_abs() < 1e-12);
    }

    /// Quadratic cost of `u = -k x` from `x0` over a 20 s RK4 rollout.
    fn rollout_cost<const N: usize>(
        ss: &StateSpace,
        q: &Matrix,
        r: f64,
        k: &Matrix,
        x0: [f64; N],
    ) -> f64 {
        let dt = 1e-4;
        let stage = |x: &[f64; N]| {
            let u = -(0..N).map(|j| k[(0, j)] * x[j]).sum::<f64>();
            let mut xqx = 0.0;
            for i in 0..N {
                for j in 0..N {
                    xqx += x[i] * q[(i, j)] * x[j];
                }
            }
            (xqx + r * u * u, u)
        };
        let f = |z: &[f64; N], u: f64| -> std::result::Result<[f64; N], ()> {
            let mut d = [0.0; N];
            for (i, di) in d.iter_mut().enumerate() {
                *di = (0..N).map(|j| ss.a[(i, j)] * z[j]).sum::<f64>() + ss.b[(i, 0)] * u;
            }
            Ok(d)
        };
        let mut x = x0;
        let mut cost = 0.0;
        for _ in 0..200_000 {
            let (l0, u) = stage(&x);
            x = rk4_step(f, &x, u, dt).unwrap();
            let (l1, _) = stage(&x);
            cost += 0.5 * dt * (l0 + l1);
        }
        cost
    }

    #[test]
    fn lqr_gain_is_a_local_minimum_of_the_cost() {
        let scalar_case = scalar(1.0, 1.0);
        check_local_minimum(&scalar_case, &Matrix::row(&[1.0]), 1.0, [1.0]);
        let second_order = StateSpace::siso(
            Matrix::from_rows(&[[0.0, 1.0], [2.0, -0.5]]),
            Matrix::column(&[0.0, 1.0]),
            Matrix::row(&[1.0, 0.0]),
        )
        .unwrap();
        check_local_minimum(&second_order, &Matrix::diag(&[4.0, 1.0]), 0.5, [1.0, -0.5]);
    }

    fn check_local_minimum<const N: usize>(ss: &StateSpace, q: &Matrix, r: f64, x0: [f64; N]) {
        let sol = solve_care(ss, q, r).unwrap();
        let best = rollout_cost(ss, q, r, &sol.k_lqr, x0);
        // the optimal infinite-horizon cost is x0ᵀ S x0
        let x0m = Matrix::column(&x0);
        let analytic = (&x0m.transpose() * &(&sol.s * &x0m))[(0, 0)];
        assert!(
            (best - analytic).abs() < 1e-3 * analytic,
            "{best} vs {analytic}"
        );
        for delta in [0.9, 1.1] {
            let perturbed = rollout_cost(ss, q, r, &sol.k_lqr.scale(delta), x0);
            assert!(best <= perturbed, "delta={delta}: {best} > {perturbed}");
        }
    }
}
