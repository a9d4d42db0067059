//! Values printed in the original design write-up for the reference rig,
//! kept only to flag differences in reports. Never used as inputs.

pub const POSITION: f64 = 0.06;
pub const A: [[f64; 3]; 3] = [[0.0, 1.0, 0.0], [296.29, 0.0, -22.2], [0.0, 0.0, -1.2]];
pub const B: [f64; 3] = [0.0, 0.0, 0.12];
pub const CTRB: [[f64; 3]; 3] = [
    [0.0, 0.0, -2.6640],
    [0.0, -2.6640, 3.1968],
    [0.1200, -0.1440, 0.1728],
];
pub const OBSV: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [296.29, 0.0, -22.20]];
pub const CHAR_POLY: [f64; 4] = [1.0, 1.2, -296.29, -355.548];

pub const POLES: [f64; 3] = [-5.0, -10.0, -20.0];
/// Printed as `s³ + 35s² − 350s − 1000`.
pub const DESIRED_POLY: [f64; 4] = [1.0, 35.0, -350.0, -1000.0];
pub const CANONICAL_LAST_ROW: [f64; 3] = [355.548, 296.29, -1.2];
pub const T_C: [[f64; 3]; 3] = [
    [-2.664, 0.0, 0.0],
    [0.0, -2.664, 0.0],
    [-35.5548, 0.0, 0.12],
];
pub const K_C: [f64; 3] = [-1355.5, -646.3, -33.8];
pub const K_FB: [f64; 3] = [4268.1, 242.6, -28.17];

pub const Q_DIAG: [f64; 3] = [9.0, 0.0, 0.0];
pub const R: f64 = 1.0;
pub const LQR_S_ROW1: [f64; 3] = [4.8731, 0.2831, -0.3413];
pub const K_LQR: [f64; 3] = [-4.0959, -0.2380, 0.2869];

/// Relative difference above which a value is reported.
pub const FLAG_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub name: String,
    pub paper: f64,
    pub computed: f64,
}

impl Comparison {
    pub fn new(name: impl Into<String>, paper: f64, computed: f64) -> Self {
        Self {
            name: name.into(),
            paper,
            computed,
        }
    }

    pub fn rel_diff(&self) -> f64 {
        if self.paper == 0.0 {
            self.computed.abs()
        } else {
            ((self.computed - self.paper) / self.paper).abs()
        }
    }

    pub fn is_flagged(&self) -> bool {
        if self.paper == 0.0 {
            self.computed.abs() > 1e-9
        } else {
            self.rel_diff() > FLAG_THRESHOLD
        }
    }

    /// computed / paper, when meaningful.
    pub fn ratio(&self) -> Option<f64> {
        (self.paper != 0.0).then(|| self.computed / self.paper)
    }
}

pub fn compare_vec(name: &str, paper: &[f64], computed: &[f64]) -> Vec<Comparison> {
    paper
        .iter()
        .zip(computed)
        .enumerate()
        .map(|(i, (p, c))| Comparison::new(format!("{name}[{}]", i + 1), *p, *c))
        .collect()
}

pub fn compare_mat(
    name: &str,
    paper: &[[f64; 3]; 3],
    computed: &maglev::numkit::Matrix,
) -> Vec<Comparison> {
    let mut out = Vec::new();
    for (i, row) in paper.iter().enumerate() {
        for (j, p) in row.iter().enumerate() {
            out.push(Comparison::new(
                format!("{name}({},{})", i + 1, j + 1),
                *p,
                computed[(i, j)],
            ));
        }
    }
    out
}
