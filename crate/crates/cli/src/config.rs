use std::path::{Path, PathBuf};

use maglev::design::PoleSpec;
use maglev::numkit::{ComplexRoot, Matrix};
use maglev::plant::{equilibrium_with, EquilibriumPoint, PlantParams, Rounding, StateVector};
use maglev::sim::{SimConfig, DEFAULT_DT, DEFAULT_T_FINAL};
use serde::Deserialize;

use crate::CliError;

pub const DEFAULT_POLES: [f64; 3] = [-5.0, -10.0, -20.0];
pub const DEFAULT_OBSERVER_POLES: [f64; 3] = [-15.0, -30.0, -60.0];
pub const DEFAULT_Q_DIAG: [f64; 3] = [9.0, 0.0, 0.0];
pub const DEFAULT_R: f64 = 1.0;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    plant: RawPlant,
    #[serde(default)]
    design: RawDesign,
    #[serde(default)]
    sim: RawSim,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlant {
    #[serde(rename = "M")]
    mass: f64,
    #[serde(rename = "K")]
    force_const: f64,
    #[serde(rename = "L")]
    inductance: f64,
    #[serde(rename = "R")]
    resistance: f64,
    #[serde(rename = "g")]
    gravity: f64,
    #[serde(rename = "E")]
    nominal_voltage: f64,
    #[serde(default)]
    use_paper_rounding: bool,
}

impl Default for RawPlant {
    fn default() -> Self {
        let p = PlantParams::reference();
        Self {
            mass: p.mass,
            force_const: p.force_const,
            inductance: p.inductance,
            resistance: p.resistance,
            gravity: p.gravity,
            nominal_voltage: p.nominal_voltage,
            use_paper_rounding: false,
        }
    }
}

/// A pole given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum RawPole {
    Real(f64),
    Complex([f64; 2]),
}

impl RawPole {
    fn to_root(self) -> ComplexRoot {
        match self {
            RawPole::Real(re) => ComplexRoot::new(re, 0.0),
            RawPole::Complex([re, im]) => ComplexRoot::new(re, im),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawDesign {
    poles: Vec<RawPole>,
    observer_poles: Vec<RawPole>,
    q_diag: Vec<f64>,
    r: f64,
}

impl Default for RawDesign {
    fn default() -> Self {
        Self {
            poles: DEFAULT_POLES.map(RawPole::Real).to_vec(),
            observer_poles: DEFAULT_OBSERVER_POLES.map(RawPole::Real).to_vec(),
            q_diag: DEFAULT_Q_DIAG.to_vec(),
            r: DEFAULT_R,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSim {
    dt: f64,
    t_final: f64,
    v_ref: f64,
    x0: Vec<f64>,
    xhat0: Vec<f64>,
}

impl Default for RawSim {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            t_final: DEFAULT_T_FINAL,
            v_ref: 0.0,
            x0: vec![0.0; 3],
            xhat0: vec![0.0; 3],
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub x0: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

/// Fully validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plant: PlantParams,
    pub rounding: Rounding,
    pub eq: EquilibriumPoint,
    pub poles: PoleSpec,
    pub observer_poles: PoleSpec,
    pub q: Matrix,
    pub r: f64,
    pub sim: SimConfig,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    pub fn parse(text: &str, overrides: &Overrides) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        Self::from_raw(raw, overrides)
    }

    fn from_raw(raw: RawConfig, ov: &Overrides) -> Result<Self, CliError> {
        let mut problems = Vec::new();

        let plant = PlantParams {
            mass: raw.plant.mass,
            force_const: raw.plant.force_const,
            inductance: raw.plant.inductance,
            resistance: raw.plant.resistance,
            gravity: raw.plant.gravity,
            nominal_voltage: raw.plant.nominal_voltage,
        };
        let rounding = if raw.plant.use_paper_rounding {
            Rounding::Paper
        } else {
            Rounding::Exact
        };
        let plant_ok = match plant.validate() {
            Ok(()) => true,
            Err(e) => {
                problems.push(e.to_string());
                false
            }
        };
        let eq = equilibrium_with(&plant, rounding);
        if plant_ok && eq.is_degenerate() {
            problems.push(maglev::Error::DegenerateEquilibrium.to_string());
        }

        let poles = pole_spec("design.poles", &raw.design.poles, &mut problems);
        let observer_poles = pole_spec(
            "design.observer_poles",
            &raw.design.observer_poles,
            &mut problems,
        );

        if raw.design.q_diag.len() != 3 {
            problems.push(format!(
                "design.q_diag needs 3 entries, got {}",
                raw.design.q_diag.len()
            ));
        } else if raw
            .design
            .q_diag
            .iter()
            .any(|q| !(q.is_finite() && *q >= 0.0))
        {
            problems.push("design.q_diag entries must be finite and >= 0".into());
        }
        if !(raw.design.r.is_finite() && raw.design.r > 0.0) {
            problems.push(format!("design.r = {} must be > 0", raw.design.r));
        }

        let x0 = ov.x0.clone().unwrap_or(raw.sim.x0);
        let x0 = state("sim.x0", &x0, &mut problems);
        let xhat0 = state("sim.xhat0", &raw.sim.xhat0, &mut problems);
        let sim = SimConfig {
            dt: ov.dt.unwrap_or(raw.sim.dt),
            t_final: ov.t_final.unwrap_or(raw.sim.t_final),
            x0,
            xhat0,
            v_ref: raw.sim.v_ref,
        };
        if let Err(maglev::Error::InvalidSimConfig(v)) = sim.validate() {
            problems.extend(v.into_iter().map(|p| format!("sim: {p}")));
        }

        if !problems.is_empty() {
            return Err(CliError::Config(problems.join("\n")));
        }
        Ok(Self {
            plant,
            rounding,
            eq,
            poles,
            observer_poles,
            q: Matrix::diag(&raw.design.q_diag),
            r: raw.design.r,
            sim,
            output: ov.out.clone().or(raw.output.path),
        })
    }

    /// The configuration the reference numbers were printed for.
    pub fn is_reference_plant(&self) -> bool {
        self.plant == PlantParams::reference()
    }
}

fn pole_spec(key: &str, raw: &[RawPole], problems: &mut Vec<String>) -> PoleSpec {
    let spec = PoleSpec::new(raw.iter().map(|p| p.to_root()).collect());
    if spec.len() != 3 {
        problems.push(format!("{key} needs 3 poles, got {}", spec.len()));
    }
    if spec
        .poles()
        .iter()
        .any(|p| !(p.re.is_finite() && p.im.is_finite()))
    {
        problems.push(format!("{key} has non-finite entries"));
    } else if !spec.is_conjugate_closed() {
        problems.push(format!("{key} is not closed under conjugation"));
    }
    spec
}

fn state(key: &str, v: &[f64], problems: &mut Vec<String>) -> StateVector {
    if v.len() != 3 {
        problems.push(format!("{key} needs 3 entries, got {}", v.len()));
        return StateVector::default();
    }
    StateVector::new(v[0], v[1], v[2])
}
