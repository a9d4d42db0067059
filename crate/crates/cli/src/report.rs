use std::fmt::Write as _;

use maglev::design::{observer_ledger, place_poles_ledger, solve_care, PlacementLedger, PoleSpec};
use maglev::lti::{
    controllability_matrix, is_controllable, is_observable, is_stable, linearize,
    observability_matrix, StateSpace,
};
use maglev::numkit::{char_poly, eigenvalues, ComplexRoot, Matrix};
use maglev::plant::Rounding;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::reference::{self as paper, compare_mat, compare_vec, Comparison};
use crate::CliError;

/// Text for the terminal plus the same content as structured data.
#[derive(Debug, Clone, Default)]
pub struct Report {
    text: String,
    json: serde_json::Map<String, Value>,
}

impl Report {
    fn section(&mut self, title: &str) {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        let _ = writeln!(self.text, "== {title} ==");
    }

    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }

    fn matrix(&mut self, name: &str, m: &Matrix) {
        self.line(format!("{name} ="));
        for i in 0..m.rows() {
            let cells: Vec<String> = m
                .row_slice(i)
                .iter()
                .map(|v| format!("{:>16}", num(*v)))
                .collect();
            self.line(format!("  [{}]", cells.join(" ")));
        }
        self.put(name, matrix_json(m));
    }

    fn put(&mut self, key: &str, v: Value) {
        self.json.insert(key.to_string(), v);
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&Value::Object(self.json.clone()))
            .expect("report values are finite numbers and strings");
        s.push('\n');
        s
    }

    fn discrepancies(&mut self, comparisons: &[Comparison], notes: &[String]) {
        self.section("paper discrepancies");
        let flagged: Vec<&Comparison> = comparisons.iter().filter(|c| c.is_flagged()).collect();
        if flagged.is_empty() {
            self.line(format!(
                "all {} printed values match within {}%",
                comparisons.len(),
                paper::FLAG_THRESHOLD * 100.0
            ));
        }
        for c in &flagged {
            let ratio = c
                .ratio()
                .map(|r| format!(", ratio {}", num(r)))
                .unwrap_or_default();
            self.line(format!(
                "{:<14} paper {:>14}  computed {:>16}{ratio}",
                c.name,
                num(c.paper),
                num(c.computed)
            ));
        }
        for n in notes {
            self.line(format!("note: {n}"));
        }
        let items: Vec<Value> = flagged
            .iter()
            .map(|c| json!({"name": c.name, "paper": c.paper, "computed": c.computed}))
            .collect();
        self.put(
            "paper_discrepancies",
            json!({"checked": comparisons.len(), "flagged": items, "notes": notes}),
        );
    }
}

/// Fixed-format number: plain decimals in the usual range, scientific otherwise.
pub fn num(v: f64) -> String {
    let v = v + 0.0;
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if (1e-3..1e7).contains(&a) {
        format!("{v:.6}")
    } else {
        format!("{v:.6e}")
    }
}

fn root(z: &ComplexRoot) -> String {
    if z.im == 0.0 {
        num(z.re)
    } else if z.im > 0.0 {
        format!("{}+{}i", num(z.re), num(z.im))
    } else {
        format!("{}-{}i", num(z.re), num(-z.im))
    }
}

fn roots(zs: &[ComplexRoot]) -> String {
    let parts: Vec<String> = zs.iter().map(root).collect();
    format!("{{{}}}", parts.join(", "))
}

fn list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| num(*x)).collect();
    format!("[{}]", parts.join(", "))
}

fn matrix_json(m: &Matrix) -> Value {
    json!(m.to_rows())
}

fn roots_json(zs: &[ComplexRoot]) -> Value {
    json!(zs.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

fn numerical(op: &'static str) -> impl Fn(maglev::Error) -> CliError {
    move |e| CliError::Numerical(format!("{op}: {e}"))
}

fn model(cfg: &RunConfig) -> Result<StateSpace, CliError> {
    linearize(&cfg.plant, &cfg.eq).map_err(numerical("linearize"))
}

fn header(r: &mut Report, cfg: &RunConfig) {
    r.section("operating point");
    let rounding = match cfg.rounding {
        Rounding::Exact => "exact",
        Rounding::Paper => "paper (x1 to 2 decimals, A to 1 decimal)",
    };
    r.line(format!("rounding: {rounding}"));
    let x = cfg.eq.state.to_array();
    r.line(format!("x_eq = {}", list(&x)));
    r.line(format!("u_eq = {}", num(cfg.eq.input_voltage)));
    r.put(
        "rounding",
        json!(if cfg.rounding == Rounding::Paper {
            "paper"
        } else {
            "exact"
        }),
    );
    r.put("x_eq", json!(x));
    r.put("u_eq", json!(cfg.eq.input_voltage));
}

pub fn analyze(cfg: &RunConfig) -> Result<Report, CliError> {
    let mut r = Report::default();
    header(&mut r, cfg);
    let ss = model(cfg)?;

    r.section("linear model");
    r.matrix("A", &ss.a);
    r.matrix("B", &ss.b);
    r.matrix("C", &ss.c);
    r.matrix("D", &ss.d);

    r.section("open loop");
    let phi = char_poly(&ss.a).map_err(numerical("char_poly"))?;
    let eig = eigenvalues(&ss.a).map_err(numerical("eigenvalues"))?;
    let stable = is_stable(&ss.a).map_err(numerical("eigenvalues"))?;
    r.line(format!(
        "characteristic polynomial = {}",
        list(phi.coeffs())
    ));
    r.line(format!("eigenvalues = {}", roots(&eig)));
    r.line(format!(
        "open loop {}",
        if stable { "stable" } else { "unstable" }
    ));
    r.put("char_poly", json!(phi.coeffs()));
    r.put("eigenvalues", roots_json(&eig));
    r.put("open_loop_stable", json!(stable));

    r.section("controllability");
    let ctrb = controllability_matrix(&ss);
    let c_rank = is_controllable(&ss);
    r.matrix("Ctrb", &ctrb);
    r.line(format!(
        "rank C = {} ({})",
        c_rank.rank,
        if c_rank.full_rank {
            "controllable"
        } else {
            "not controllable"
        }
    ));
    r.put("rank_ctrb", json!(c_rank.rank));

    r.section("observability");
    let obsv = observability_matrix(&ss);
    let o_rank = is_observable(&ss);
    r.matrix("Obsv", &obsv);
    r.line(format!(
        "rank O = {} ({})",
        o_rank.rank,
        if o_rank.full_rank {
            "observable"
        } else {
            "not observable"
        }
    ));
    r.put("rank_obsv", json!(o_rank.rank));

    if cfg.is_reference_plant() {
        let mut cmp = vec![Comparison::new(
            "x1_eq",
            paper::POSITION,
            cfg.eq.state.position,
        )];
        cmp.extend(compare_mat("A", &paper::A, &ss.a));
        cmp.extend(compare_vec(
            "B",
            &paper::B,
            &[ss.b[(0, 0)], ss.b[(1, 0)], ss.b[(2, 0)]],
        ));
        cmp.extend(compare_mat("Ctrb", &paper::CTRB, &ctrb));
        cmp.extend(compare_mat("Obsv", &paper::OBSV, &obsv));
        cmp.extend(compare_vec("phi", &paper::CHAR_POLY, phi.coeffs()));
        r.discrepancies(&cmp, &[]);
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DesignKind {
    Place,
    Observer,
    Lqr,
}

fn ledger(r: &mut Report, l: &PlacementLedger, prefix: &str) {
    r.line(format!("phi(s)     = {}", list(l.open_loop_poly.coeffs())));
    r.line(format!("phi_bar(s) = {}", list(l.desired_poly.coeffs())));
    r.matrix(&format!("{prefix}A_c"), &l.canonical_a);
    r.matrix(&format!("{prefix}B_c"), &l.canonical_b);
    r.matrix(&format!("{prefix}T_c"), &l.transform);
    r.matrix(&format!("{prefix}K_c"), &l.canonical_gain);
    r.put(&format!("{prefix}phi"), json!(l.open_loop_poly.coeffs()));
    r.put(&format!("{prefix}phi_bar"), json!(l.desired_poly.coeffs()));
}

fn same_poles(spec: &PoleSpec, reference: &[f64]) -> bool {
    let mut a: Vec<ComplexRoot> = spec.poles().to_vec();
    let mut b: Vec<ComplexRoot> = reference
        .iter()
        .map(|p| ComplexRoot::new(*p, 0.0))
        .collect();
    maglev::numkit::sort_roots(&mut a);
    maglev::numkit::sort_roots(&mut b);
    a == b
}

pub fn design(cfg: &RunConfig, kind: DesignKind) -> Result<Report, CliError> {
    let mut r = Report::default();
    header(&mut r, cfg);
    let ss = model(cfg)?;
    match kind {
        DesignKind::Place => {
            r.section("pole placement (u = K x + v)");
            r.line(format!("requested poles = {}", roots(cfg.poles.poles())));
            let l = place_poles_ledger(&ss, &cfg.poles).map_err(numerical("place_poles"))?;
            ledger(&mut r, &l, "");
            r.matrix("K", &l.gain);
            let eig =
                eigenvalues(&(&ss.a + &(&ss.b * &l.gain))).map_err(numerical("eigenvalues"))?;
            r.line(format!("eig(A + B K) = {}", roots(&eig)));
            r.put("closed_loop_eigenvalues", roots_json(&eig));

            if cfg.is_reference_plant() && same_poles(&cfg.poles, &paper::POLES) {
                let mut cmp = compare_vec("phi_bar", &paper::DESIRED_POLY, l.desired_poly.coeffs());
                let last: Vec<f64> = (0..3).map(|j| l.canonical_a[(2, j)]).collect();
                cmp.extend(compare_vec("A_c row 3", &paper::CANONICAL_LAST_ROW, &last));
                cmp.extend(compare_mat("T_c", &paper::T_C, &l.transform));
                cmp.extend(compare_vec(
                    "K_c",
                    &paper::K_C,
                    l.canonical_gain.row_slice(0),
                ));
                cmp.extend(compare_vec("K", &paper::K_FB, l.gain.row_slice(0)));
                let printed = Matrix::row(&paper::K_FB);
                let tr = (&ss.a + &(&ss.b * &printed)).trace();
                let wanted: f64 = paper::POLES.iter().sum();
                let notes = vec![format!(
                    "with the printed K, trace(A + B K) = {} but the requested poles sum to {}",
                    num(tr),
                    num(wanted)
                )];
                r.discrepancies(&cmp, &notes);
            }
        }
        DesignKind::Observer => {
            r.section("observer (x̂' = (A + G C) x̂ + B u - G y)");
            r.line(format!(
                "requested poles = {}",
                roots(cfg.observer_poles.poles())
            ));
            let l =
                observer_ledger(&ss, &cfg.observer_poles).map_err(numerical("observer_gain"))?;
            ledger(&mut r, &l, "dual ");
            let g = l.gain.transpose();
            r.matrix("G", &g);
            let eig = eigenvalues(&(&ss.a + &(&g * &ss.c))).map_err(numerical("eigenvalues"))?;
            r.line(format!("eig(A + G C) = {}", roots(&eig)));
            r.put("observer_eigenvalues", roots_json(&eig));
        }
        DesignKind::Lqr => {
            r.section("LQR (u = -K_lqr x)");
            let q: Vec<f64> = (0..3).map(|i| cfg.q[(i, i)]).collect();
            r.line(format!("Q = diag{}, R = {}", list(&q), num(cfg.r)));
            let sol = solve_care(&ss, &cfg.q, cfg.r).map_err(numerical("solve_care"))?;
            r.matrix("S", &sol.s);
            r.matrix("K_lqr", &sol.k_lqr);
            r.line(format!("ARE residual = {:.3e}", sol.residual));
            r.line(format!("iterations = {}", sol.iterations));
            let eig =
                eigenvalues(&(&ss.a - &(&ss.b * &sol.k_lqr))).map_err(numerical("eigenvalues"))?;
            r.line(format!("eig(A - B K_lqr) = {}", roots(&eig)));
            r.put("are_residual", json!(sol.residual));
            r.put("iterations", json!(sol.iterations));
            r.put("closed_loop_eigenvalues", roots_json(&eig));

            if cfg.is_reference_plant() && q == paper::Q_DIAG && cfg.r == paper::R {
                let mut cmp = compare_vec("S row 1", &paper::LQR_S_ROW1, sol.s.row_slice(0));
                cmp.extend(compare_vec("K_lqr", &paper::K_LQR, sol.k_lqr.row_slice(0)));
                let ratios =
                    |c: &[Comparison]| -> Vec<f64> { c.iter().filter_map(|x| x.ratio()).collect() };
                let notes = vec![
                    format!(
                        "computed/printed ratios for S row 1: {}",
                        list(&ratios(&cmp[..3]))
                    ),
                    format!(
                        "computed/printed ratios for K_lqr: {}",
                        list(&ratios(&cmp[3..]))
                    ),
                    "uniform ratios indicate the printed values omit a common scale factor"
                        .to_string(),
                ];
                r.discrepancies(&cmp, &notes);
            }
        }
    }
    Ok(r)
}
