/// One classical Runge–Kutta step with the input `u` held over the step.
pub fn rk4_step<const N: usize, E, F>(f: F, x: &[f64; N], u: f64, dt: f64) -> Result<[f64; N], E>
where
    F: Fn(&[f64; N], f64) -> Result<[f64; N], E>,
{
    let k1 = f(x, u)?;
    let k2 = f(&axpy(x, 0.5 * dt, &k1), u)?;
    let k3 = f(&axpy(x, 0.5 * dt, &k2), u)?;
    let k4 = f(&axpy(x, dt, &k3), u)?;
    let mut out = *x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

fn axpy<const N: usize>(x: &[f64; N], a: f64, y: &[f64; N]) -> [f64; N] {
    let mut out = *x;
    for i in 0..N {
        out[i] += a * y[i];
    }
    out
}
