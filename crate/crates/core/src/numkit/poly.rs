use num_complex::Complex64;

use super::Matrix;
use crate::error::{Error, Result};

/// A root of a real polynomial (or an eigenvalue of a real matrix).
pub type ComplexRoot = Complex64;

/// Imaginary parts smaller than this are snapped to zero.
pub const REAL_SNAP: f64 = 1e-8;

const ROOT_MAX_ITER: usize = 500;
const ROOT_RESIDUAL: f64 = 1e-8;

/// Real polynomial with coefficients in descending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Leading zeros are stripped; an all-zero input becomes the zero polynomial `[0]`.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("polynomial coefficients"));
        }
        let first = coeffs.iter().position(|c| *c != 0.0);
        let coeffs = match first {
            Some(i) => coeffs[i..].to_vec(),
            None => vec![0.0],
        };
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs == [0.0]
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs[0] == 1.0
    }

    /// Coefficients `a_0, a_1, ..., a_{n-1}` of a monic polynomial
    /// `s^n + a_{n-1} s^{n-1} + ... + a_0`, lowest degree first.
    pub fn lower_coeffs(&self) -> Vec<f64> {
        self.coeffs[1..].iter().rev().copied().collect()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc * s + c)
    }

    pub fn eval_complex(&self, s: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * s + c)
    }

    /// All complex roots, see [`poly_roots`].
    pub fn roots(&self) -> Result<Vec<ComplexRoot>> {
        poly_roots(self)
    }
}

/// Complex coefficients of `prod (s - r_i)`, descending degree.
pub fn expand_roots(roots: &[ComplexRoot]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); coeffs.len() + 1];
        for (i, c) in coeffs.iter().enumerate() {
            next[i] += c;
            next[i + 1] -= c * r;
        }
        coeffs = next;
    }
    coeffs
}

/// Characteristic polynomial `det(sI - m)` by the Faddeev–LeVerrier recursion.
pub fn char_poly(m: &Matrix) -> Result<Polynomial> {
    if !m.is_square() {
        return Err(Error::Dimension(format!(
            "characteristic polynomial of a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let identity = Matrix::identity(n);
    let mut coeffs = vec![1.0];
    // M_1 = I, c_{n-k} = -tr(A M_k) / k, M_{k+1} = A M_k + c_{n-k} I
    let mut mk = identity.clone();
    for k in 1..=n {
        let am = m * &mk;
        let c = -am.trace() / k as f64;
        coeffs.push(c);
        mk = &am + &identity.scale(c);
    }
    Polynomial::new(coeffs)
}

/// All roots of `p` by Durand–Kerner (Weierstrass) iteration.
///
/// Starting points are successive powers of `0.4 + 0.9i`. Roots whose
/// imaginary part is below [`REAL_SNAP`] are returned as real, and the
/// result is sorted by `(re, im)`.
pub fn poly_roots(p: &Polynomial) -> Result<Vec<ComplexRoot>> {
    let n = p.degree();
    if n == 0 || p.is_zero() {
        return Err(Error::Dimension(
            "root finding needs a polynomial of degree >= 1".into(),
        ));
    }
    let lead = p.leading();
    let monic: Vec<f64> = p.coeffs().iter().map(|c| c / lead).collect();
    let eval = |z: Complex64| {
        monic
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    };

    let seed = Complex64::new(0.4, 0.9);
    let mut z: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32)).collect();

    for _ in 0..ROOT_MAX_ITER {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if j != i {
                    denom *= z[i] - z[j];
                }
            }
            if denom.norm() == 0.0 {
                // coincident iterates; nudge apart and keep going
                z[i] += Complex64::new(1e-10, 1e-10);
                max_step = f64::INFINITY;
                continue;
            }
            let step = eval(z[i]) / denom;
            z[i] -= step;
            max_step = max_step.max(step.norm() / z[i].norm().max(1.0));
        }
        if max_step < 1e-15 {
            break;
        }
    }

    let scale = p.norm_inf();
    let residual = z
        .iter()
        .map(|r| p.eval_complex(*r).norm())
        .fold(0.0, f64::max);
    if !residual.is_finite() || residual >= ROOT_RESIDUAL * scale {
        return Err(Error::NoConvergence {
            what: "polynomial root finding",
            iterations: ROOT_MAX_ITER,
            residual,
        });
    }

    for r in z.iter_mut() {
        if r.im.abs() < REAL_SNAP {
            r.im = 0.0;
        }
    }
    sort_roots(&mut z);
    Ok(z)
}

/// Eigenvalues as the roots of the characteristic polynomial, sorted by `(re, im)`.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<ComplexRoot>> {
    poly_roots(&char_poly(m)?)
}

pub fn sort_roots(roots: &mut [ComplexRoot]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Largest distance between two root multisets under a greedy
/// nearest-neighbour pairing. Returns infinity if the sizes differ.
pub fn root_set_distance(a: &[ComplexRoot], b: &[ComplexRoot]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut unused: Vec<ComplexRoot> = b.to_vec();
    let mut worst: f64 = 0.0;
    for ra in a {
        let (idx, d) = unused
            .iter()
            .enumerate()
            .map(|(i, rb)| (i, (ra - rb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("equal lengths");
        worst = worst.max(d);
        unused.swap_remove(idx);
    }
    worst
}
