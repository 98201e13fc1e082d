//! Robot/environment composition and full-mission simulation.

mod calibrate;
mod config;
mod run;
mod sweep;

use std::path::Path;

use thiserror::Error;

pub use calibrate::{calibrate, Calibration, Residuals, DISPLACEMENT_TARGET_BL, EMBEDDED_CALIBRATION, TURN_TARGET_DEG};
pub use config::{
    key_line, EnvironmentConfig, FinsConfig, GripperConfig, HydroConfig, MuscleConfig, PairConfig, RobotConfig,
    ScenarioConfig, SchedulePoint, SimConfig, SynthesisRecord, TopologyConfig, TrussConfig, REFERENCE_TRUSS,
};
pub use run::{actuate, propel, run, summarize, RunResult, StrokeSummary, Summary, Timeline, TrajectorySample};
pub use sweep::{apply_override, parse_vary, sweep, sweep_csv, SweepRow, Variation};

use crate::actuation::{ActuationError, ActuatorPair, Gripper, Topology};
use crate::hydro::{Fin, HydroError, HydroParams};
use crate::schedule::TemperatureSchedule;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("{}", match line { Some(l) => format!("line {l}: {message}"), None => message.clone() })]
    Parse { line: Option<usize>, message: String },
    #[error("{key}{}: {reason}", match line { Some(l) => format!(" (line {l})"), None => String::new() })]
    Invalid {
        key: String,
        line: Option<usize>,
        reason: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("empty value list for `{0}`")]
    EmptyList(String),
    #[error("calibration failed: {0}")]
    Bracket(String),
    #[error("simulation diverged at t = {t} s")]
    Diverged { t: f64 },
    #[error(transparent)]
    Actuation(#[from] ActuationError),
    #[error(transparent)]
    Hydro(HydroError),
}

impl From<HydroError> for ScenarioError {
    fn from(e: HydroError) -> Self {
        match e {
            HydroError::NonFinite { t } => ScenarioError::Diverged { t },
            other => ScenarioError::Hydro(other),
        }
    }
}

impl ScenarioError {
    pub(crate) fn from_toml(text: &str, e: &toml::de::Error) -> Self {
        let line = e
            .span()
            .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1);
        ScenarioError::Parse {
            line,
            message: e.message().trim().replace('\n', " "),
        }
    }

    /// True for errors caused by the user's input files.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            ScenarioError::Io { .. }
                | ScenarioError::Parse { .. }
                | ScenarioError::Invalid { .. }
                | ScenarioError::UnknownKey(_)
                | ScenarioError::EmptyList(_)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobotDesign {
    /// Shell length `l` (m).
    pub body_length: f64,
    pub width: f64,
    /// Dry mass without cargo (kg).
    pub mass: f64,
    pub inertia: Option<f64>,
    pub topology: Topology,
    pub pairs: Vec<ActuatorPair<f64>>,
    /// Present fins in slot order.
    pub fins: Vec<Fin<f64>>,
    pub gripper: Option<Gripper<f64>>,
    pub hydro: HydroConfig,
}

impl RobotDesign {
    pub fn rotational_inertia(&self) -> f64 {
        self.inertia
            .unwrap_or(self.mass * (self.body_length.powi(2) + self.width.powi(2)) / 12.0)
    }

    /// Dynamics parameters for the unladen body.
    pub fn hydro_params(&self, env: &Environment, calibration: &Calibration) -> HydroParams<f64> {
        let h = &self.hydro;
        HydroParams {
            body_mass: self.mass,
            rotational_inertia: self.rotational_inertia(),
            water_density: env.water_density,
            body_drag_coeff: h.body_drag_coeff.unwrap_or(calibration.body_drag_coeff),
            rotational_drag_coeff: h.rotational_drag_coeff.unwrap_or(calibration.rotational_drag_coeff),
            reference_area: h.reference_area_m2,
            snap_duration: h.snap_duration_s,
            efficiency: h.efficiency,
            linear_drag: h.linear_drag_per_length_n_s_per_m2 * self.body_length,
            rotational_damping: h.rotational_damping_n_m_s,
        }
    }

    /// Fins paddled by pair `pair`.
    pub fn fins_of(&self, pair: usize) -> Vec<Fin<f64>> {
        self.fins
            .iter()
            .copied()
            .filter(|f| f.slot.pair_index() == pair)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub schedule: TemperatureSchedule<f64>,
    /// kg/m³.
    pub water_density: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    /// Step (s).
    pub dt: f64,
    pub horizon: f64,
    /// Trajectory output spacing (s).
    pub sample_interval: f64,
}

impl SimSettings {
    pub fn steps(&self) -> usize {
        (self.horizon / self.dt - 1e-9).ceil().max(0.0) as usize
    }
}

/// A validated, runnable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub design: RobotDesign,
    pub environment: Environment,
    pub sim: SimSettings,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        ScenarioConfig::parse(text)?.build(text)
    }

    pub fn load(path: &Path) -> Result<(ScenarioConfig, Self), ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let cfg = ScenarioConfig::parse(&text)?;
        let sc = cfg.build(&text)?;
        Ok((cfg, sc))
    }

    pub fn run(&self, calibration: &Calibration) -> Result<RunResult, ScenarioError> {
        run(self, calibration)
    }
}

/// Shipped scenario files, by name.
pub mod shipped {
    pub const SINGLE_STROKE: &str = include_str!("../../../../scenarios/single_stroke.toml");
    pub const TWO_STROKE_4FIN: &str = include_str!("../../../../scenarios/two_stroke_4fin.toml");
    pub const THREE_FIN: &str = include_str!("../../../../scenarios/three_fin.toml");
    pub const TWO_FIN_DIAGONAL: &str = include_str!("../../../../scenarios/two_fin_diagonal.toml");
    pub const REVERSE_CARGO: &str = include_str!("../../../../scenarios/reverse_cargo.toml");

    pub const ALL: [(&str, &str); 5] = [
        ("single_stroke", SINGLE_STROKE),
        ("two_stroke_4fin", TWO_STROKE_4FIN),
        ("three_fin", THREE_FIN),
        ("two_fin_diagonal", TWO_FIN_DIAGONAL),
        ("reverse_cargo", REVERSE_CARGO),
    ];
}
