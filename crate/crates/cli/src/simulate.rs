use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use maglev::design::{observer_gain, place_poles, solve_care};
use maglev::lti::linearize;
use maglev::sim::{
    simulate_linear_feedback, simulate_lqr, simulate_nonlinear_feedback, simulate_with_observer,
    Mode, Scenario, SimTrace,
};

use crate::config::RunConfig;
use crate::report::num;
use crate::CliError;

pub const SETTLING_BAND: f64 = 0.01;

fn numerical(op: &'static str) -> impl Fn(maglev::Error) -> CliError {
    move |e| CliError::Numerical(format!("{op}: {e}"))
}

pub fn run(cfg: &RunConfig, scenario: Scenario) -> Result<SimTrace, CliError> {
    let ss = linearize(&cfg.plant, &cfg.eq).map_err(numerical("linearize"))?;
    let (p, eq, sim) = (&cfg.plant, &cfg.eq, &cfg.sim);
    let k_fb = || place_poles(&ss, &cfg.poles).map_err(numerical("place_poles"));
    let trace = match scenario {
        Scenario::LinearFeedback => simulate_linear_feedback(&ss, &k_fb()?, sim),
        Scenario::NonlinearFeedback => simulate_nonlinear_feedback(p, eq, &k_fb()?, sim),
        Scenario::LinearObserver | Scenario::NonlinearObserver => {
            let g = observer_gain(&ss, &cfg.observer_poles).map_err(numerical("observer_gain"))?;
            simulate_with_observer(scenario.mode(), &ss, p, eq, &k_fb()?, &g, sim)
        }
        Scenario::LinearLqr | Scenario::NonlinearLqr => {
            let sol = solve_care(&ss, &cfg.q, cfg.r).map_err(numerical("solve_care"))?;
            simulate_lqr(scenario.mode(), &ss, p, eq, &sol.k_lqr, sim)
        }
    };
    trace.map_err(numerical("simulate"))
}

pub fn write_csv(trace: &SimTrace, w: &mut impl Write) -> std::io::Result<()> {
    let observer = trace.has_observer();
    if observer {
        writeln!(w, "t,x1,x2,x3,u,y,xh1,xh2,xh3")?;
    } else {
        writeln!(w, "t,x1,x2,x3,u,y")?;
    }
    for r in &trace.rows {
        write!(
            w,
            "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
            r.t, r.x[0], r.x[1], r.x[2], r.u, r.y
        )?;
        if let Some(h) = r.xhat {
            write!(w, ",{:.9e},{:.9e},{:.9e}", h[0], h[1], h[2])?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn save_csv(trace: &SimTrace, path: &Path) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    write_csv(trace, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

/// Operating-point output around which the trace is judged.
pub fn y_reference(cfg: &RunConfig, scenario: Scenario) -> f64 {
    match scenario.mode() {
        Mode::Linear => 0.0,
        Mode::Nonlinear => cfg.eq.state.position,
    }
}

pub fn summary(cfg: &RunConfig, scenario: Scenario, trace: &SimTrace) -> Vec<String> {
    let y_ref = y_reference(cfg, scenario);
    let last = trace.last();
    let settle = trace
        .settling_time(last.y, SETTLING_BAND)
        .map(num)
        .unwrap_or_else(|| "not settled".into());
    let mut out = vec![
        format!("scenario: {scenario}"),
        format!(
            "rows: {} (dt = {}, t_end = {})",
            trace.len(),
            num(trace.dt),
            num(last.t)
        ),
        format!(
            "final state: [{}, {}, {}]",
            num(last.x[0]),
            num(last.x[1]),
            num(last.x[2])
        ),
        format!("final output: {}", num(last.y)),
        format!(
            "peak |y - y_ref|: {} (y_ref = {})",
            num(trace.peak_deviation(y_ref)),
            num(y_ref)
        ),
        format!("settling time (1% band around final output): {settle}"),
    ];
    out.push(match trace.ball_contact {
        Some(t) => format!("truncated: ball contact at t = {}", num(t)),
        None => "truncated: no".into(),
    });
    out
}
