use maglev::numkit::{
    char_poly, eigenvalues, expand_roots, invert, poly_roots, rank, root_set_distance, ComplexRoot,
    Matrix, Polynomial,
};
use proptest::prelude::*;

fn matrix3(range: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-range..range, 9).prop_map(|v| Matrix::new(3, 3, v).unwrap())
}

/// Diagonally dominant, hence comfortably invertible.
fn well_conditioned() -> impl Strategy<Value = Matrix> {
    (
        matrix3(1.0),
        prop::collection::vec(3.5..10.0f64, 3),
        prop::collection::vec(any::<bool>(), 3),
    )
        .prop_map(|(mut m, d, neg)| {
            for i in 0..3 {
                m[(i, i)] = if neg[i] { -d[i] } else { d[i] };
            }
            m
        })
}

/// Distinct real roots, at least 0.5 apart.
fn spread_roots(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-30.0..30.0f64, n).prop_filter("roots too close", |r| {
        r.iter()
            .enumerate()
            .all(|(i, a)| r[i + 1..].iter().all(|b| (a - b).abs() > 0.5))
    })
}

proptest! {
    #[test]
    fn inverse_round_trips(m in well_conditioned()) {
        let inv = invert(&m).unwrap();
        prop_assert!((&m * &inv).max_abs_diff(&Matrix::identity(3)) < 1e-9);
        prop_assert!((&inv * &m).max_abs_diff(&Matrix::identity(3)) < 1e-9);
    }

    #[test]
    fn rank_is_transpose_invariant(
        l in prop::collection::vec(-5.0..5.0f64, 6),
        r in prop::collection::vec(-5.0..5.0f64, 6),
    ) {
        let low = Matrix::new(3, 2, l).unwrap();
        let right = Matrix::new(2, 3, r).unwrap();
        let m = &low * &right;
        prop_assert!(rank(&m) <= 2);
        prop_assert_eq!(rank(&m), rank(&m.transpose()));
    }

    #[test]
    fn char_poly_vanishes_at_eigenvalues(m in matrix3(10.0)) {
        let p = char_poly(&m).unwrap();
        prop_assert!(p.is_monic());
        prop_assert!((p.coeffs()[1] + m.trace()).abs() < 1e-9 * (1.0 + m.max_abs()));
        let scale = p.norm_inf();
        for lambda in eigenvalues(&m).unwrap() {
            let v = p.eval_complex(lambda).norm();
            prop_assert!(v < 1e-6 * scale.max(1.0), "p({lambda}) = {v}");
        }
    }

    #[test]
    fn roots_reconstruct_polynomial(roots in spread_roots(4)) {
        let zs: Vec<ComplexRoot> = roots.iter().map(|r| ComplexRoot::new(*r, 0.0)).collect();
        let coeffs: Vec<f64> = expand_roots(&zs).iter().map(|c| c.re).collect();
        let p = Polynomial::new(coeffs).unwrap();
        let found = poly_roots(&p).unwrap();
        prop_assert!(root_set_distance(&found, &zs) < 1e-6);
        prop_assert!(found.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn transpose_has_same_spectrum(m in matrix3(10.0)) {
        let a = eigenvalues(&m).unwrap();
        let b = eigenvalues(&m.transpose()).unwrap();
        prop_assert!(root_set_distance(&a, &b) < 1e-6 * (1.0 + m.max_abs()));
    }
}

#[test]
fn faddeev_leverrier_on_companion() {
    let a = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [-6.0, -11.0, -6.0]]);
    let p = char_poly(&a).unwrap();
    assert_eq!(p.coeffs(), &[1.0, 6.0, 11.0, 6.0]);
    let mut eig: Vec<f64> = eigenvalues(&a).unwrap().iter().map(|z| z.re).collect();
    eig.sort_by(f64::total_cmp);
    for (got, want) in eig.iter().zip([-3.0, -2.0, -1.0]) {
        assert!((got - want).abs() < 1e-9);
    }
}
