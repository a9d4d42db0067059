use crate::numkit::Matrix;

/// One sample of a closed-loop run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    pub x: [f64; 3],
    pub xhat: Option<[f64; 3]>,
    pub u: f64,
    pub y: f64,
}

/// Uniformly sampled record of a run. Linear runs hold deviation
/// variables; nonlinear runs hold absolute state, voltage and position.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub dt: f64,
    pub rows: Vec<TraceRow>,
    /// Time at which the ball reached the magnet (x1 <= 0), if it did.
    /// The trace ends at the last valid sample before that.
    pub ball_contact: Option<f64>,
}

impl SimTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_observer(&self) -> bool {
        self.rows.first().is_some_and(|r| r.xhat.is_some())
    }

    pub fn last(&self) -> &TraceRow {
        self.rows
            .last()
            .expect("trace has at least the initial row")
    }

    /// Sample closest to time `t`.
    pub fn at(&self, t: f64) -> &TraceRow {
        let idx = ((t / self.dt).round().max(0.0) as usize).min(self.rows.len() - 1);
        &self.rows[idx]
    }

    /// Largest `|y - y_ref|` over the whole trace.
    pub fn peak_deviation(&self, y_ref: f64) -> f64 {
        self.rows
            .iter()
            .fold(0.0, |m, r| m.max((r.y - y_ref).abs()))
    }

    /// First time after which `|y - y_ref|` stays within `band` times the
    /// peak deviation. `None` if the trace never settles or the peak is zero.
    pub fn settling_time(&self, y_ref: f64, band: f64) -> Option<f64> {
        let peak = self.peak_deviation(y_ref);
        if peak == 0.0 {
            return Some(0.0);
        }
        let limit = band * peak;
        let last_outside = self.rows.iter().rposition(|r| (r.y - y_ref).abs() > limit);
        match last_outside {
            None => Some(0.0),
            Some(i) if i + 1 < self.rows.len() => Some(self.rows[i + 1].t),
            Some(_) => None,
        }
    }

    /// Trapezoidal `∫ (Δxᵀ Q Δx + r Δu²) dt` with `Δx = x - x_ref`, `Δu = u - u_ref`.
    pub fn quadratic_cost(&self, q: &Matrix, r: f64, x_ref: [f64; 3], u_ref: f64) -> f64 {
        let stage = |row: &TraceRow| {
            let dx: Vec<f64> = row.x.iter().zip(x_ref).map(|(a, b)| a - b).collect();
            let mut xqx = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    xqx += dx[i] * q[(i, j)] * dx[j];
                }
            }
            let du = row.u - u_ref;
            xqx + r * du * du
        };
        self.rows
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (stage(&w[0]) + stage(&w[1])))
            .sum()
    }

    /// Estimation error norm `||x - x̂||` per row (observer runs only).
    pub fn estimation_error(&self) -> Vec<f64> {
        self.rows
            .iter()
            .map(|r| match r.xhat {
                Some(h) => norm(&[r.x[0] - h[0], r.x[1] - h[1], r.x[2] - h[2]]),
                None => f64::NAN,
            })
            .collect()
    }
}

pub(crate) fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}
