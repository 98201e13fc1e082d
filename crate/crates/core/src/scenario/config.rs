//! Scenario file schema, validation and conversion to a runnable [`Scenario`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Environment, RobotDesign, Scenario, ScenarioError, SimSettings};
use crate::actuation::{ActuatorPair, Gripper, Topology};
use crate::hydro::{Fin, FinSlot};
use crate::mech::TrussGeometry;
use crate::muscle::{MaterialDb, MuscleOrientation, MuscleSpec};
use crate::schedule::TemperatureSchedule;

/// Reference truss shared by the shipped scenarios.
pub const REFERENCE_TRUSS: &str = include_str!("../../../../scenarios/reference_truss.toml");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrussConfig {
    pub rise_mm: f64,
    pub half_span_mm: f64,
    pub support_stiffness_n_per_mm: f64,
    pub joint_stiffness_nmm_per_rad: f64,
}

impl TrussConfig {
    pub fn reference() -> Self {
        toml::from_str(REFERENCE_TRUSS).expect("shipped reference truss is valid")
    }

    pub fn geometry(&self) -> TrussGeometry<f64> {
        TrussGeometry {
            rise: self.rise_mm,
            half_span: self.half_span_mm,
            support_stiffness: self.support_stiffness_n_per_mm,
            joint_stiffness: self.joint_stiffness_nmm_per_rad,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TopologyConfig {
    #[default]
    Independent,
    Series,
}

impl From<TopologyConfig> for Topology {
    fn from(t: TopologyConfig) -> Self {
        match t {
            TopologyConfig::Independent => Topology::Independent,
            TopologyConfig::Series => Topology::Series,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub body_length_m: f64,
    #[serde(default = "defaults::width")]
    pub width_m: f64,
    pub mass_kg: f64,
    #[serde(default)]
    pub topology: TopologyConfig,
    /// Overrides the slender-box yaw inertia `m (l² + w²) / 12`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inertia_kg_m2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MuscleConfig {
    pub thickness_mm: f64,
    pub material: String,
    #[serde(default = "defaults::stroke")]
    pub programmed_stroke_mm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rise_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_span_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_stiffness_n_per_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_stiffness_nmm_per_rad: Option<f64>,
    pub thickness_mm: f64,
    pub material: String,
    #[serde(default = "defaults::stroke")]
    pub programmed_stroke_mm: f64,
    #[serde(default = "defaults::recovery")]
    pub recovery_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reverse_muscle: Option<MuscleConfig>,
}

impl PairConfig {
    pub fn truss(&self) -> TrussConfig {
        let r = TrussConfig::reference();
        TrussConfig {
            rise_mm: self.rise_mm.unwrap_or(r.rise_mm),
            half_span_mm: self.half_span_mm.unwrap_or(r.half_span_mm),
            support_stiffness_n_per_mm: self.support_stiffness_n_per_mm.unwrap_or(r.support_stiffness_n_per_mm),
            joint_stiffness_nmm_per_rad: self
                .joint_stiffness_nmm_per_rad
                .unwrap_or(r.joint_stiffness_nmm_per_rad),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FinsConfig {
    #[serde(default = "defaults::fin_area")]
    pub area_m2: f64,
    #[serde(default = "defaults::fin_coeff")]
    pub paddle_drag_coeff: f64,
    #[serde(default = "defaults::lateral")]
    pub lateral_offset_m: f64,
    #[serde(default = "defaults::front_x")]
    pub front_x_m: f64,
    #[serde(default = "defaults::rear_x")]
    pub rear_x_m: f64,
    #[serde(default)]
    pub front_left: bool,
    #[serde(default)]
    pub front_right: bool,
    #[serde(default)]
    pub rear_left: bool,
    #[serde(default)]
    pub rear_right: bool,
}

impl FinsConfig {
    pub fn with_layout(slots: &[FinSlot]) -> Self {
        let mut f = Self {
            area_m2: defaults::fin_area(),
            paddle_drag_coeff: defaults::fin_coeff(),
            lateral_offset_m: defaults::lateral(),
            front_x_m: defaults::front_x(),
            rear_x_m: defaults::rear_x(),
            front_left: false,
            front_right: false,
            rear_left: false,
            rear_right: false,
        };
        for &s in slots {
            *f.slot_mut(s) = true;
        }
        f
    }

    pub fn has(&self, slot: FinSlot) -> bool {
        match slot {
            FinSlot::FrontLeft => self.front_left,
            FinSlot::FrontRight => self.front_right,
            FinSlot::RearLeft => self.rear_left,
            FinSlot::RearRight => self.rear_right,
        }
    }

    pub fn slot_mut(&mut self, slot: FinSlot) -> &mut bool {
        match slot {
            FinSlot::FrontLeft => &mut self.front_left,
            FinSlot::FrontRight => &mut self.front_right,
            FinSlot::RearLeft => &mut self.rear_left,
            FinSlot::RearRight => &mut self.rear_right,
        }
    }

    /// Present slots in slot order.
    pub fn layout(&self) -> Vec<FinSlot> {
        FinSlot::ALL.into_iter().filter(|&s| self.has(s)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchedulePoint {
    pub t_s: f64,
    pub temp_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentConfig {
    #[serde(default = "defaults::density")]
    pub water_density_kg_m3: f64,
    pub schedule: Vec<SchedulePoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HydroConfig {
    #[serde(default = "defaults::reference_area")]
    pub reference_area_m2: f64,
    #[serde(default = "defaults::snap_duration")]
    pub snap_duration_s: f64,
    #[serde(default = "defaults::efficiency")]
    pub efficiency: f64,
    /// Skin friction per metre of body length (N·s/m²).
    #[serde(default = "defaults::linear_drag")]
    pub linear_drag_per_length_n_s_per_m2: f64,
    #[serde(default = "defaults::rotational_damping")]
    pub rotational_damping_n_m_s: f64,
    /// Length unit for reported distances (m).
    #[serde(default = "defaults::reference_length")]
    pub reference_length_m: f64,
    /// Replaces the calibrated value when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body_drag_coeff: Option<f64>,
    /// Replaces the calibrated value when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotational_drag_coeff: Option<f64>,
}

impl Default for HydroConfig {
    fn default() -> Self {
        Self {
            reference_area_m2: defaults::reference_area(),
            snap_duration_s: defaults::snap_duration(),
            efficiency: defaults::efficiency(),
            linear_drag_per_length_n_s_per_m2: defaults::linear_drag(),
            rotational_damping_n_m_s: defaults::rotational_damping(),
            reference_length_m: defaults::reference_length(),
            body_drag_coeff: None,
            rotational_drag_coeff: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GripperConfig {
    pub material: String,
    #[serde(default = "defaults::cargo")]
    pub cargo_mass_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default = "defaults::dt_ms")]
    pub dt_ms: f64,
    #[serde(default = "defaults::horizon")]
    pub horizon_s: f64,
    /// Trajectory output spacing (ms); events always get a sample.
    #[serde(default = "defaults::sample_ms")]
    pub sample_interval_ms: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt_ms: defaults::dt_ms(),
            horizon_s: defaults::horizon(),
            sample_interval_ms: defaults::sample_ms(),
        }
    }
}

/// Provenance written by the synthesizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthesisRecord {
    pub mission: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    pub robot: RobotConfig,
    pub pairs: BTreeMap<String, PairConfig>,
    pub fins: FinsConfig,
    pub environment: EnvironmentConfig,
    #[serde(default)]
    pub hydro: HydroConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gripper: Option<GripperConfig>,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisRecord>,
}

pub(crate) mod defaults {
    pub fn width() -> f64 {
        0.04
    }
    pub fn stroke() -> f64 {
        6.0
    }
    pub fn recovery() -> f64 {
        5.0
    }
    pub fn fin_area() -> f64 {
        5e-4
    }
    pub fn fin_coeff() -> f64 {
        2.0
    }
    pub fn lateral() -> f64 {
        0.025
    }
    pub fn front_x() -> f64 {
        0.03
    }
    pub fn rear_x() -> f64 {
        -0.03
    }
    pub fn density() -> f64 {
        1000.0
    }
    pub fn reference_area() -> f64 {
        4.5e-4
    }
    pub fn snap_duration() -> f64 {
        0.05
    }
    pub fn efficiency() -> f64 {
        0.5
    }
    pub fn linear_drag() -> f64 {
        0.03
    }
    pub fn rotational_damping() -> f64 {
        6e-6
    }
    pub fn reference_length() -> f64 {
        0.10
    }
    pub fn cargo() -> f64 {
        0.0025
    }
    pub fn dt_ms() -> f64 {
        1.0
    }
    pub fn horizon() -> f64 {
        300.0
    }
    pub fn sample_ms() -> f64 {
        10.0
    }
}

/// 1-based line of `dotted` in the source text. Array-of-table entries are
/// addressed by index (`environment.schedule.2.t_s`). Falls back to the
/// section header when the key is absent.
pub fn key_line(text: &str, dotted: &str) -> Option<usize> {
    let (section, key) = match dotted.rfind('.') {
        Some(i) => (&dotted[..i], &dotted[i + 1..]),
        None => ("", dotted),
    };
    let mut current = String::new();
    let mut array_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut header_line = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix("[[").and_then(|l| l.split("]]").next()) {
            let name = name.trim().to_string();
            let n = array_counts.entry(name.clone()).or_insert(0);
            current = format!("{name}.{n}");
            *n += 1;
        } else if let Some(name) = line.strip_prefix('[').and_then(|l| l.split(']').next()) {
            current = name.trim().to_string();
        } else if current == section {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
            continue;
        } else {
            continue;
        }
        if current == section && header_line.is_none() {
            header_line = Some(i + 1);
        }
    }
    header_line
}

struct Checker<'a> {
    text: &'a str,
}

impl Checker<'_> {
    fn invalid(&self, key: &str, reason: impl Into<String>) -> ScenarioError {
        ScenarioError::Invalid {
            key: key.to_string(),
            line: key_line(self.text, key),
            reason: reason.into(),
        }
    }

    fn positive(&self, key: &str, v: f64) -> Result<(), ScenarioError> {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(self.invalid(key, format!("must be positive and finite, got {v}")))
        }
    }

    fn non_negative(&self, key: &str, v: f64) -> Result<(), ScenarioError> {
        if v.is_finite() && v >= 0.0 {
            Ok(())
        } else {
            Err(self.invalid(key, format!("must be non-negative and finite, got {v}")))
        }
    }

    fn finite(&self, key: &str, v: f64) -> Result<(), ScenarioError> {
        if v.is_finite() {
            Ok(())
        } else {
            Err(self.invalid(key, format!("must be finite, got {v}")))
        }
    }
}

fn muscle_spec(
    chk: &Checker,
    db: &MaterialDb,
    prefix: &str,
    thickness: f64,
    material: &str,
    stroke: f64,
    orientation: MuscleOrientation,
) -> Result<MuscleSpec<f64>, ScenarioError> {
    let mat = db
        .get(material)
        .map_err(|_| chk.invalid(&format!("{prefix}.material"), format!("unknown material `{material}`")))?;
    chk.positive(&format!("{prefix}.programmed_stroke_mm"), stroke)?;
    let mut spec = MuscleSpec::new(thickness, mat.clone(), orientation);
    spec.programmed_stroke = stroke;
    spec.validate()
        .map_err(|e| chk.invalid(&format!("{prefix}.thickness_mm"), e.to_string()))?;
    Ok(spec)
}

impl ScenarioConfig {
    /// Parses scenario text. Syntax and schema errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::from_toml(text, &e))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config serializes")
    }

    /// Validates against `text` (for line numbers) and builds the runnable scenario.
    pub fn build(&self, text: &str) -> Result<Scenario, ScenarioError> {
        let chk = Checker { text };
        let db = MaterialDb::builtin();
        let r = &self.robot;
        chk.positive("robot.body_length_m", r.body_length_m)?;
        chk.positive("robot.width_m", r.width_m)?;
        chk.positive("robot.mass_kg", r.mass_kg)?;
        if let Some(i) = r.inertia_kg_m2 {
            chk.positive("robot.inertia_kg_m2", i)?;
        }

        if self.pairs.is_empty() {
            return Err(chk.invalid("pairs", "at least one actuator pair is required"));
        }
        let mut pairs = Vec::with_capacity(self.pairs.len());
        let mut indexed: Vec<(usize, &String, &PairConfig)> = Vec::new();
        for (name, p) in &self.pairs {
            let idx: usize = name
                .parse()
                .map_err(|_| chk.invalid(&format!("pairs.{name}"), "pair keys must be 0, 1, ..."))?;
            indexed.push((idx, name, p));
        }
        indexed.sort_by_key(|(i, _, _)| *i);
        for (expect, (idx, name, p)) in indexed.iter().enumerate() {
            let prefix = format!("pairs.{name}");
            if *idx != expect {
                return Err(chk.invalid(
                    &prefix,
                    format!("pairs must be numbered consecutively from 0, missing pairs.{expect}"),
                ));
            }
            let truss = p.truss();
            for (k, v) in [
                ("rise_mm", truss.rise_mm),
                ("half_span_mm", truss.half_span_mm),
                ("support_stiffness_n_per_mm", truss.support_stiffness_n_per_mm),
                ("joint_stiffness_nmm_per_rad", truss.joint_stiffness_nmm_per_rad),
            ] {
                chk.finite(&format!("{prefix}.{k}"), v)?;
            }
            let geometry = truss.geometry();
            geometry
                .validate()
                .map_err(|e| chk.invalid(&format!("{prefix}.rise_mm"), e.to_string()))?;
            if let Err(e) = geometry.barriers() {
                return Err(chk.invalid(&format!("{prefix}.joint_stiffness_nmm_per_rad"), e.to_string()));
            }
            let fwd = muscle_spec(
                &chk,
                &db,
                &prefix,
                p.thickness_mm,
                &p.material,
                p.programmed_stroke_mm,
                MuscleOrientation::ForwardDriver,
            )?;
            chk.non_negative(&format!("{prefix}.recovery_s"), p.recovery_s)?;
            let mut pair = ActuatorPair::new(*idx, geometry, fwd);
            pair.recovery_duration = p.recovery_s;
            if let Some(rm) = &p.reverse_muscle {
                pair.reverse_muscle = Some(muscle_spec(
                    &chk,
                    &db,
                    &format!("{prefix}.reverse_muscle"),
                    rm.thickness_mm,
                    &rm.material,
                    rm.programmed_stroke_mm,
                    MuscleOrientation::ReverseDriver,
                )?);
            }
            pairs.push(pair);
        }
        let topology: Topology = r.topology.into();
        if topology == Topology::Series && pairs.len() < 2 {
            return Err(chk.invalid("robot.topology", "series topology needs at least two pairs"));
        }

        let f = &self.fins;
        chk.positive("fins.area_m2", f.area_m2)?;
        chk.positive("fins.paddle_drag_coeff", f.paddle_drag_coeff)?;
        chk.non_negative("fins.lateral_offset_m", f.lateral_offset_m)?;
        chk.finite("fins.front_x_m", f.front_x_m)?;
        chk.finite("fins.rear_x_m", f.rear_x_m)?;
        let mut fins = Vec::new();
        for slot in f.layout() {
            if slot.pair_index() >= pairs.len() {
                return Err(chk.invalid(
                    &format!("fins.{}", slot.name()),
                    format!("fin is carried by pair {} which does not exist", slot.pair_index()),
                ));
            }
            pairs[slot.pair_index()].attached_fins.push(slot);
            fins.push(Fin::in_slot(
                slot,
                f.front_x_m,
                f.rear_x_m,
                f.lateral_offset_m,
                f.area_m2,
                f.paddle_drag_coeff,
            ));
        }

        let e = &self.environment;
        chk.positive("environment.water_density_kg_m3", e.water_density_kg_m3)?;
        if e.schedule.is_empty() {
            return Err(chk.invalid("environment.schedule", "needs at least one (t_s, temp_c) point"));
        }
        for (i, p) in e.schedule.iter().enumerate() {
            chk.finite(&format!("environment.schedule.{i}.t_s"), p.t_s)?;
            chk.finite(&format!("environment.schedule.{i}.temp_c"), p.temp_c)?;
            if i > 0 && p.t_s < e.schedule[i - 1].t_s {
                return Err(chk.invalid(
                    &format!("environment.schedule.{i}.t_s"),
                    "schedule times must be non-decreasing",
                ));
            }
        }
        let schedule = TemperatureSchedule::new(e.schedule.iter().map(|p| (p.t_s, p.temp_c)).collect())
            .map_err(|err| chk.invalid("environment.schedule", err.to_string()))?;

        let h = &self.hydro;
        chk.positive("hydro.reference_area_m2", h.reference_area_m2)?;
        chk.positive("hydro.snap_duration_s", h.snap_duration_s)?;
        chk.positive("hydro.efficiency", h.efficiency)?;
        if h.efficiency > 1.0 {
            return Err(chk.invalid("hydro.efficiency", "must not exceed 1"));
        }
        chk.non_negative(
            "hydro.linear_drag_per_length_n_s_per_m2",
            h.linear_drag_per_length_n_s_per_m2,
        )?;
        chk.non_negative("hydro.rotational_damping_n_m_s", h.rotational_damping_n_m_s)?;
        chk.positive("hydro.reference_length_m", h.reference_length_m)?;
        if let Some(v) = h.body_drag_coeff {
            chk.non_negative("hydro.body_drag_coeff", v)?;
        }
        if let Some(v) = h.rotational_drag_coeff {
            chk.non_negative("hydro.rotational_drag_coeff", v)?;
        }

        let gripper = match &self.gripper {
            None => None,
            Some(g) => {
                let mat = db
                    .get(&g.material)
                    .map_err(|_| chk.invalid("gripper.material", format!("unknown material `{}`", g.material)))?;
                chk.non_negative("gripper.cargo_mass_kg", g.cargo_mass_kg)?;
                Some(Gripper {
                    material: mat.clone(),
                    cargo_mass: g.cargo_mass_kg,
                    held: true,
                })
            }
        };

        let s = &self.sim;
        chk.positive("sim.dt_ms", s.dt_ms)?;
        if s.dt_ms > 10.0 {
            return Err(chk.invalid("sim.dt_ms", "time step must not exceed 10 ms"));
        }
        chk.positive("sim.horizon_s", s.horizon_s)?;
        chk.positive("sim.sample_interval_ms", s.sample_interval_ms)?;

        Ok(Scenario {
            name: self.name.clone(),
            design: RobotDesign {
                body_length: r.body_length_m,
                width: r.width_m,
                mass: r.mass_kg,
                inertia: r.inertia_kg_m2,
                topology,
                pairs,
                fins,
                gripper,
                hydro: h.clone(),
            },
            environment: Environment {
                schedule,
                water_density: e.water_density_kg_m3,
            },
            sim: SimSettings {
                dt: s.dt_ms * 1e-3,
                horizon: s.horizon_s,
                sample_interval: s.sample_interval_ms * 1e-3,
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_lines() {
        let text = "name = \"x\"\n[robot]\nmass_kg = 1\n\n[[environment.schedule]]\nt_s = 0\n[[environment.schedule]]\nt_s = 5\n";
        assert_eq!(key_line(text, "robot.mass_kg"), Some(3));
        assert_eq!(key_line(text, "robot.width_m"), Some(2));
        assert_eq!(key_line(text, "environment.schedule.1.t_s"), Some(8));
        assert_eq!(key_line(text, "name"), Some(1));
        assert_eq!(key_line(text, "fins.area_m2"), None);
    }

    #[test]
    fn reference_truss_loads() {
        let r = TrussConfig::reference();
        assert_eq!(r.rise_mm, 5.0);
        assert_eq!(r.half_span_mm, 20.0);
        assert!(r.geometry().barriers().is_ok());
    }
}
