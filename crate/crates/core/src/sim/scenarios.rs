use super::rk4::rk4_step;
use super::trace::{SimTrace, TraceRow};
use super::{Mode, SimConfig};
use crate::error::{Error, Result};
use crate::lti::StateSpace;
use crate::numkit::Matrix;
use crate::plant::{dynamics, EquilibriumPoint, PlantParams, StateVector};

type V3 = [f64; 3];

/// Third-order SISO model unpacked into fixed arrays.
#[derive(Debug, Clone, Copy)]
struct Lin3 {
    a: [V3; 3],
    b: V3,
    c: V3,
}

impl Lin3 {
    fn from_ss(ss: &StateSpace) -> Result<Self> {
        if ss.order() != 3 || ss.inputs() != 1 || ss.outputs() != 1 {
            return Err(Error::Dimension(format!(
                "simulation needs a 3-state SISO model, got n={} m={} p={}",
                ss.order(),
                ss.inputs(),
                ss.outputs()
            )));
        }
        let mut a = [[0.0; 3]; 3];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = ss.a[(i, j)];
            }
        }
        Ok(Self {
            a,
            b: [ss.b[(0, 0)], ss.b[(1, 0)], ss.b[(2, 0)]],
            c: [ss.c[(0, 0)], ss.c[(0, 1)], ss.c[(0, 2)]],
        })
    }

    fn deriv(&self, x: &V3, u: f64) -> V3 {
        let mut dx = [0.0; 3];
        for i in 0..3 {
            dx[i] = dot(&self.a[i], x) + self.b[i] * u;
        }
        dx
    }

    fn output(&self, x: &V3) -> f64 {
        dot(&self.c, x)
    }
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn add(a: &V3, b: &V3) -> V3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn gain_row(k: &Matrix, what: &str) -> Result<V3> {
    if k.rows() != 1 || k.cols() != 3 {
        return Err(Error::Dimension(format!(
            "{what} must be 1x3, got {}x{}",
            k.rows(),
            k.cols()
        )));
    }
    Ok([k[(0, 0)], k[(0, 1)], k[(0, 2)]])
}

fn gain_col(g: &Matrix, what: &str) -> Result<V3> {
    if g.rows() != 3 || g.cols() != 1 {
        return Err(Error::Dimension(format!(
            "{what} must be 3x1, got {}x{}",
            g.rows(),
            g.cols()
        )));
    }
    Ok([g[(0, 0)], g[(1, 0)], g[(2, 0)]])
}

fn plant_deriv(x: &V3, u: f64, p: &PlantParams) -> Result<V3> {
    Ok(dynamics(&StateVector::from_array(*x), u, p)?.to_array())
}

fn split(z: &[f64; 6]) -> (V3, V3) {
    ([z[0], z[1], z[2]], [z[3], z[4], z[5]])
}

fn join(a: V3, b: V3) -> [f64; 6] {
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

/// Shared fixed-step loop. `law` gives the input held over the next step;
/// `record` turns a state and its input into a trace row. For `absolute`
/// (nonlinear) runs, the ball reaching the magnet ends the run early.
fn integrate<const S: usize>(
    cfg: &SimConfig,
    absolute: bool,
    z0: [f64; S],
    deriv: impl Fn(&[f64; S], f64) -> Result<[f64; S]>,
    law: impl Fn(&[f64; S]) -> f64,
    record: impl Fn(f64, &[f64; S], f64) -> TraceRow,
) -> Result<SimTrace> {
    cfg.validate()?;
    let steps = cfg.steps();
    let mut rows = Vec::with_capacity(steps + 1);
    let mut z = z0;
    let mut u = law(&z);
    rows.push(record(0.0, &z, u));
    let mut ball_contact = None;
    for k in 0..steps {
        let t_next = (k + 1) as f64 * cfg.dt;
        match rk4_step(&deriv, &z, u, cfg.dt) {
            Ok(next) => z = next,
            Err(Error::Domain { .. }) => {
                ball_contact = Some(t_next);
                break;
            }
            Err(e) => return Err(e),
        }
        if !z.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("simulation state"));
        }
        u = law(&z);
        let row = record(t_next, &z, u);
        if absolute && !(row.x[0] > 0.0) {
            ball_contact = Some(t_next);
            break;
        }
        rows.push(row);
    }
    Ok(SimTrace {
        dt: cfg.dt,
        rows,
        ball_contact,
    })
}

fn linear_row(sys: Lin3) -> impl Fn(f64, &V3, f64) -> TraceRow {
    move |t, x, u| TraceRow {
        t,
        x: *x,
        xhat: None,
        u,
        y: sys.output(x),
    }
}

/// Linear model under `u = K_fb x + v`.
pub fn simulate_linear_feedback(
    ss: &StateSpace,
    k_fb: &Matrix,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let sys = Lin3::from_ss(ss)?;
    let k = gain_row(k_fb, "K_fb")?;
    let v = cfg.v_ref;
    integrate(
        cfg,
        false,
        cfg.x0.to_array(),
        |x, u| Ok(sys.deriv(x, u)),
        |x| dot(&k, x) + v,
        linear_row(sys),
    )
}

/// Nonlinear plant under `u = E + K_fb (x - x_eq) + v`.
pub fn simulate_nonlinear_feedback(
    p: &PlantParams,
    eq: &EquilibriumPoint,
    k_fb: &Matrix,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let k = gain_row(k_fb, "K_fb")?;
    nonlinear_state_feedback(p, eq, k, cfg)
}

/// Nonlinear plant with the input fixed at `E + v`.
pub fn simulate_open_loop(
    p: &PlantParams,
    eq: &EquilibriumPoint,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    nonlinear_state_feedback(p, eq, [0.0; 3], cfg)
}

fn nonlinear_state_feedback(
    p: &PlantParams,
    eq: &EquilibriumPoint,
    k: V3,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let x_eq = eq.state.to_array();
    let (e, v) = (eq.input_voltage, cfg.v_ref);
    integrate(
        cfg,
        true,
        add(&x_eq, &cfg.x0.to_array()),
        |x, u| plant_deriv(x, u, p),
        |x| e + dot(&k, &sub(x, &x_eq)) + v,
        |t, x, u| TraceRow {
            t,
            x: *x,
            xhat: None,
            u,
            y: x[0],
        },
    )
}

/// Output feedback through a full-order observer:
/// `x̂' = (A + G C) x̂ + B Δu - G Δy`, `Δu = K_fb x̂ + v`.
///
/// In [`Mode::Nonlinear`] the plant is the nonlinear model driven by
/// `E + Δu`, with `Δy = x1 - x1_eq`; recorded estimates are absolute.
pub fn simulate_with_observer(
    mode: Mode,
    ss: &StateSpace,
    p: &PlantParams,
    eq: &EquilibriumPoint,
    k_fb: &Matrix,
    g_obs: &Matrix,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let sys = Lin3::from_ss(ss)?;
    let k = gain_row(k_fb, "K_fb")?;
    let g = gain_col(g_obs, "G_obs")?;
    let v = cfg.v_ref;
    let observer = move |xh: &V3, du: f64, dy: f64| {
        let mut d = sys.deriv(xh, du);
        let innovation = sys.output(xh) - dy;
        for i in 0..3 {
            d[i] += g[i] * innovation;
        }
        d
    };
    let law = move |z: &[f64; 6]| {
        let (_, xh) = split(z);
        dot(&k, &xh) + v
    };
    match mode {
        Mode::Linear => integrate(
            cfg,
            false,
            join(cfg.x0.to_array(), cfg.xhat0.to_array()),
            |z, du| {
                let (x, xh) = split(z);
                Ok(join(sys.deriv(&x, du), observer(&xh, du, sys.output(&x))))
            },
            law,
            |t, z, du| {
                let (x, xh) = split(z);
                TraceRow {
                    t,
                    x,
                    xhat: Some(xh),
                    u: du,
                    y: sys.output(&x),
                }
            },
        ),
        Mode::Nonlinear => {
            let x_eq = eq.state.to_array();
            let e = eq.input_voltage;
            integrate(
                cfg,
                true,
                join(add(&x_eq, &cfg.x0.to_array()), cfg.xhat0.to_array()),
                |z, du| {
                    let (x, xh) = split(z);
                    let dx = plant_deriv(&x, e + du, p)?;
                    Ok(join(dx, observer(&xh, du, x[0] - x_eq[0])))
                },
                law,
                |t, z, du| {
                    let (x, xh) = split(z);
                    TraceRow {
                        t,
                        x,
                        xhat: Some(add(&x_eq, &xh)),
                        u: e + du,
                        y: x[0],
                    }
                },
            )
        }
    }
}

/// State feedback `Δu = -K_lqr Δx + v` on the linear or nonlinear plant.
pub fn simulate_lqr(
    mode: Mode,
    ss: &StateSpace,
    p: &PlantParams,
    eq: &EquilibriumPoint,
    k_lqr: &Matrix,
    cfg: &SimConfig,
) -> Result<SimTrace> {
    let k = gain_row(k_lqr, "K_lqr")?;
    let neg = [-k[0], -k[1], -k[2]];
    match mode {
        Mode::Linear => {
            let sys = Lin3::from_ss(ss)?;
            let v = cfg.v_ref;
            integrate(
                cfg,
                false,
                cfg.x0.to_array(),
                |x, u| Ok(sys.deriv(x, u)),
                |x| dot(&neg, x) + v,
                linear_row(sys),
            )
        }
        Mode::Nonlinear => nonlinear_state_feedback(p, eq, neg, cfg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::{observer_gain, place_poles, PoleSpec};
    use crate::lti::linearize;
    use crate::plant::equilibrium;

    fn setup() -> (PlantParams, EquilibriumPoint, StateSpace) {
        let p = PlantParams::reference();
        let eq = equilibrium(&p);
        let ss = linearize(&p, &eq).unwrap();
        (p, eq, ss)
    }

    fn short(x0: StateVector) -> SimConfig {
        SimConfig {
            dt: 1e-3,
            t_final: 2.0,
            x0,
            ..SimConfig::default()
        }
    }

    #[test]
    fn linear_feedback_decays_with_right_shape() {
        let (_, _, ss) = setup();
        let k = place_poles(&ss, &PoleSpec::real(&[-5.0, -10.0, -20.0])).unwrap();
        let tr =
            simulate_linear_feedback(&ss, &k, &short(StateVector::new(0.005, 0.0, 0.0))).unwrap();
        assert_eq!(tr.len(), 2001);
        assert_eq!(tr.rows[0].x, [0.005, 0.0, 0.0]);
        assert!((tr.rows[0].u - k[(0, 0)] * 0.005).abs() < 1e-12);
        assert!(tr.last().y.abs() < 0.005 * 1e-3);
        assert!(tr.ball_contact.is_none());
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let (p, eq, ss) = setup();
        let k = place_poles(&ss, &PoleSpec::real(&[-5.0, -10.0, -20.0])).unwrap();
        let tr = simulate_nonlinear_feedback(&p, &eq, &k, &short(StateVector::default())).unwrap();
        let x_eq = eq.state.to_array();
        for row in &tr.rows {
            for i in 0..3 {
                assert!((row.x[i] - x_eq[i]).abs() < 1e-12);
            }
            assert!((row.u - eq.input_voltage).abs() < 1e-9);
        }
    }

    #[test]
    fn observer_error_decays_linear_and_nonlinear() {
        let (p, eq, ss) = setup();
        let k = place_poles(&ss, &PoleSpec::real(&[-5.0, -10.0, -20.0])).unwrap();
        let g = observer_gain(&ss, &PoleSpec::real(&[-15.0, -30.0, -60.0])).unwrap();
        let cfg = short(StateVector::new(0.002, 0.0, 0.0));
        for mode in [Mode::Linear, Mode::Nonlinear] {
            let tr = simulate_with_observer(mode, &ss, &p, &eq, &k, &g, &cfg).unwrap();
            assert!(tr.has_observer());
            let err = tr.estimation_error();
            assert!(err[0] > 1e-3);
            assert!(
                *err.last().unwrap() < 1e-6,
                "{mode:?}: {}",
                err.last().unwrap()
            );
        }
    }

    #[test]
    fn strong_pull_hits_the_magnet() {
        let (p, eq, _) = setup();
        let cfg = SimConfig {
            dt: 1e-3,
            t_final: 5.0,
            v_ref: 40.0,
            ..SimConfig::default()
        };
        let tr = simulate_open_loop(&p, &eq, &cfg).unwrap();
        let t = tr.ball_contact.expect("ball should reach the magnet");
        assert!(t < 5.0);
        assert!(tr.rows.iter().all(|r| r.x[0] > 0.0));
        assert!(tr.len() < cfg.steps() + 1);
    }

    #[test]
    fn rejects_wrong_gain_shapes() {
        let (p, eq, ss) = setup();
        let cfg = short(StateVector::default());
        assert!(matches!(
            simulate_linear_feedback(&ss, &Matrix::row(&[1.0, 2.0]), &cfg),
            Err(Error::Dimension(_))
        ));
        assert!(matches!(
            simulate_with_observer(
                Mode::Linear,
                &ss,
                &p,
                &eq,
                &Matrix::row(&[0.0; 3]),
                &Matrix::row(&[0.0; 3]),
                &cfg
            ),
            Err(Error::Dimension(_))
        ));
    }
}
