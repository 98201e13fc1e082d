//! Exhaustive design search: every fin layout, muscle thickness and material
//! on the printable grid is simulated and scored against the mission.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rayon::prelude::*;

use super::{Mission, MissionError, Statement};
use crate::actuation::{chain_condition, reverse_condition, ActuationEvent, ActuatorPair, Phase};
use crate::hydro::FinSlot;
use crate::mech::{BistableProfile, SnapDirection};
use crate::muscle::can_trigger;
use crate::scenario::{
    actuate, propel, summarize, Calibration, EnvironmentConfig, FinsConfig, GripperConfig, HydroConfig, MuscleConfig,
    PairConfig, RobotConfig, Scenario, ScenarioConfig, ScenarioError, SchedulePoint, SimConfig, Summary,
    SynthesisRecord, TopologyConfig, TrussConfig,
};

/// Degrees of heading error that weigh as much as one body length.
pub const ANGLE_WEIGHT_DEG: f64 = 30.0;
/// Missions whose best score reaches this are infeasible.
pub const INFEASIBLE_SCORE: f64 = 1.0;
pub const THICKNESS_GRID_MM: [f64; 3] = [1.2, 1.4, 1.6];
/// Scores within this of the best count as ties.
pub const SCORE_TIE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MaterialChoice {
    VeroWhitePlus,
    Flx9895,
}

impl MaterialChoice {
    pub const ALL: [MaterialChoice; 2] = [MaterialChoice::VeroWhitePlus, MaterialChoice::Flx9895];

    pub fn name(self) -> &'static str {
        match self {
            MaterialChoice::VeroWhitePlus => "VeroWhitePlus",
            MaterialChoice::Flx9895 => "FLX9895",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name().eq_ignore_ascii_case(name))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuscleChoice {
    pub thickness_mm: f64,
    pub material: MaterialChoice,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairChoice {
    pub forward: MuscleChoice,
    pub reverse: Option<MuscleChoice>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignCandidate {
    /// Present fins in slot order.
    pub layout: Vec<FinSlot>,
    /// Rear pair first; two pairs are chained in series.
    pub pairs: Vec<PairChoice>,
    pub gripper: bool,
    pub fin_area_m2: f64,
    /// Trajectory error against the mission (dimensionless).
    pub score: f64,
}

impl DesignCandidate {
    fn muscles(&self) -> impl Iterator<Item = &MuscleChoice> {
        self.pairs
            .iter()
            .map(|p| &p.forward)
            .chain(self.pairs.iter().filter_map(|p| p.reverse.as_ref()))
    }

    /// Ordering among equal scores: fewer pairs, fewer fins, slot order,
    /// thinner muscles, then material.
    fn tie_break(&self, other: &Self) -> Ordering {
        self.pairs
            .len()
            .cmp(&other.pairs.len())
            .then(self.layout.len().cmp(&other.layout.len()))
            .then(self.layout.cmp(&other.layout))
            .then_with(|| {
                let a = self.muscles().map(|m| m.thickness_mm);
                let b = other.muscles().map(|m| m.thickness_mm);
                a.zip(b)
                    .map(|(x, y)| x.total_cmp(&y))
                    .find(|o| o.is_ne())
                    .unwrap_or(Ordering::Equal)
            })
            .then_with(|| {
                let a: Vec<_> = self.muscles().map(|m| m.material).collect();
                let b: Vec<_> = other.muscles().map(|m| m.material).collect();
                a.cmp(&b)
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisOptions {
    /// Water temperature `(t_s, temp_c)` knots every candidate is simulated in.
    pub schedule: Vec<(f64, f64)>,
    pub dt_ms: f64,
    pub horizon_s: f64,
    pub calibration: Calibration,
    /// Golden-section refinement of the winner's fin area. Off by default.
    pub refine_fin_area: bool,
    /// Fin-area search range as multiples of the default area.
    pub fin_area_range: (f64, f64),
}

impl SynthesisOptions {
    /// Warm stage at 35 °C, then a ramp to 60 °C, so both materials can fire
    /// in a definite order.
    pub fn staged(calibration: Calibration) -> Self {
        Self {
            schedule: vec![(0.0, 35.0), (150.0, 35.0), (200.0, 60.0)],
            dt_ms: 1.0,
            horizon_s: 600.0,
            calibration,
            refine_fin_area: false,
            fin_area_range: (0.5, 2.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesisReport {
    pub best: DesignCandidate,
    /// Candidates simulated.
    pub evaluated: usize,
    /// Candidates discarded by the actuation predicates.
    pub rejected: usize,
    /// Best few candidates, best first.
    pub ranking: Vec<DesignCandidate>,
}

/// Scenario text for a candidate under the synthesis environment.
pub fn emit_design(candidate: &DesignCandidate, mission: &Mission, options: &SynthesisOptions) -> String {
    config_for(candidate, Some(mission), options).to_toml()
}

fn config_for(candidate: &DesignCandidate, mission: Option<&Mission>, options: &SynthesisOptions) -> ScenarioConfig {
    let two = candidate.pairs.len() > 1;
    let truss = TrussConfig::reference();
    let pairs = candidate
        .pairs
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let cfg = PairConfig {
                rise_mm: Some(truss.rise_mm),
                half_span_mm: Some(truss.half_span_mm),
                support_stiffness_n_per_mm: Some(truss.support_stiffness_n_per_mm),
                joint_stiffness_nmm_per_rad: Some(truss.joint_stiffness_nmm_per_rad),
                thickness_mm: p.forward.thickness_mm,
                material: p.forward.material.name().to_string(),
                programmed_stroke_mm: 6.0,
                recovery_s: 5.0,
                reverse_muscle: p.reverse.map(|r| MuscleConfig {
                    thickness_mm: r.thickness_mm,
                    material: r.material.name().to_string(),
                    programmed_stroke_mm: 6.0,
                }),
            };
            (i.to_string(), cfg)
        })
        .collect::<BTreeMap<_, _>>();
    let mut fins = FinsConfig::with_layout(&candidate.layout);
    fins.area_m2 = candidate.fin_area_m2;
    ScenarioConfig {
        name: "synthesized".to_string(),
        robot: RobotConfig {
            body_length_m: if two { 0.125 } else { 0.10 },
            width_m: 0.04,
            mass_kg: if two { 0.0625 } else { 0.05 },
            topology: if two {
                TopologyConfig::Series
            } else {
                TopologyConfig::Independent
            },
            inertia_kg_m2: None,
        },
        pairs,
        fins,
        environment: EnvironmentConfig {
            water_density_kg_m3: 1000.0,
            schedule: options
                .schedule
                .iter()
                .map(|&(t_s, temp_c)| SchedulePoint { t_s, temp_c })
                .collect(),
        },
        hydro: HydroConfig::default(),
        gripper: candidate.gripper.then(|| GripperConfig {
            material: MaterialChoice::VeroWhitePlus.name().to_string(),
            cargo_mass_kg: 0.0025,
        }),
        sim: SimConfig {
            dt_ms: options.dt_ms,
            horizon_s: options.horizon_s,
            sample_interval_ms: 10.0,
        },
        synthesis: mission.map(|m| SynthesisRecord {
            mission: m.to_string().trim_end().replace('\n', "; "),
            score: candidate.score,
        }),
    }
}

/// Reads a candidate back from a scenario config (inverse of [`emit_design`]).
pub fn candidate_from_config(cfg: &ScenarioConfig) -> Result<DesignCandidate, ScenarioError> {
    let muscle = |key: String, thickness_mm: f64, material: &str| {
        MaterialChoice::from_name(material)
            .map(|material| MuscleChoice { thickness_mm, material })
            .ok_or(ScenarioError::Invalid {
                key,
                line: None,
                reason: format!("material `{material}` is outside the synthesis catalog"),
            })
    };
    let mut pairs = Vec::new();
    for (name, p) in &cfg.pairs {
        let forward = muscle(format!("pairs.{name}.material"), p.thickness_mm, &p.material)?;
        let reverse = match &p.reverse_muscle {
            Some(r) => Some(muscle(
                format!("pairs.{name}.reverse_muscle.material"),
                r.thickness_mm,
                &r.material,
            )?),
            None => None,
        };
        pairs.push(PairChoice { forward, reverse });
    }
    Ok(DesignCandidate {
        layout: cfg.fins.layout(),
        pairs,
        gripper: cfg.gripper.is_some(),
        fin_area_m2: cfg.fins.area_m2,
        score: cfg.synthesis.as_ref().map_or(f64::NAN, |s| s.score),
    })
}

/// Trajectory error of a run against `mission`.
///
/// Strokes are matched to `FORWARD`, `TURN` and `RETURN` in order. A stroke
/// that fires before an earlier `DROP`, or in the wrong direction, counts as
/// missing, which costs `1 +` the target magnitude. Unclaimed strokes are
/// charged for the motion they cause.
pub fn score_run(mission: &Mission, summary: &Summary, events: &[ActuationEvent<f64>]) -> f64 {
    let release = events.iter().find_map(|e| match e {
        ActuationEvent::CargoRelease { time } => Some(*time),
        _ => None,
    });
    let mut strokes = summary.strokes.iter();
    let mut cursor = f64::NEG_INFINITY;
    let mut score = 0.0;
    for st in &mission.statements {
        match *st {
            Statement::Forward(d) | Statement::Turn(d) => {
                let is_turn = matches!(st, Statement::Turn(_));
                let missing = 1.0 + if is_turn { d.abs() / ANGLE_WEIGHT_DEG } else { d };
                match strokes.next() {
                    Some(s) if s.direction == SnapDirection::Forward && s.t_start >= cursor => {
                        score += if is_turn {
                            (s.dtheta_deg - d).abs() / ANGLE_WEIGHT_DEG
                        } else {
                            (s.displacement_bl - d).abs() + s.dtheta_deg.abs() / ANGLE_WEIGHT_DEG
                        };
                        cursor = s.t_start;
                    }
                    _ => score += missing,
                }
            }
            Statement::Drop => match release {
                Some(t) if t >= cursor => cursor = t,
                _ => score += 1.0,
            },
            Statement::Return => match strokes.next() {
                Some(s) if s.direction == SnapDirection::Reverse && s.t_start >= cursor => cursor = s.t_start,
                _ => score += 1.0,
            },
        }
    }
    for s in strokes {
        score += s.displacement_bl + s.dtheta_deg.abs() / ANGLE_WEIGHT_DEG;
    }
    score
}

fn muscle_grid() -> Vec<MuscleChoice> {
    MaterialChoice::ALL
        .into_iter()
        .flat_map(|material| {
            THICKNESS_GRID_MM
                .into_iter()
                .map(move |thickness_mm| MuscleChoice { thickness_mm, material })
        })
        .collect()
}

fn layouts(pairs: usize) -> Vec<Vec<FinSlot>> {
    let slots: Vec<FinSlot> = FinSlot::ALL.into_iter().filter(|s| s.pair_index() < pairs).collect();
    (1u32..(1 << slots.len()))
        .map(|mask| {
            slots
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &s)| s)
                .collect()
        })
        .collect()
}

fn muscle_assignments(mission: &Mission) -> Vec<Vec<PairChoice>> {
    let grid = muscle_grid();
    let mut out = Vec::new();
    let reverse: Vec<Option<MuscleChoice>> = if mission.has_return() {
        grid.iter().copied().map(Some).collect()
    } else {
        vec![None]
    };
    for &f in &grid {
        for &r in &reverse {
            out.push(vec![PairChoice { forward: f, reverse: r }]);
        }
    }
    for &rear in &grid {
        for &front in &grid {
            out.push(vec![
                PairChoice {
                    forward: rear,
                    reverse: None,
                },
                PairChoice {
                    forward: front,
                    reverse: None,
                },
            ]);
        }
    }
    out
}

/// Actuation predicates every candidate must satisfy.
fn admissible(scenario: &Scenario) -> bool {
    let pairs = &scenario.design.pairs;
    let profiles: Vec<BistableProfile<f64>> = match pairs.iter().map(|p| p.truss.barriers()).collect() {
        Ok(p) => p,
        Err(_) => return false,
    };
    for (p, prof) in pairs.iter().zip(&profiles) {
        if !can_trigger(&p.forward_muscle, prof) {
            return false;
        }
        if let Some(r) = &p.reverse_muscle {
            let snapped = ActuatorPair {
                phase: Phase::Snapped,
                shuttle_position: prof.second_stable(),
                ..p.clone()
            };
            if !can_trigger(r, prof) || !reverse_condition(&snapped, prof) {
                return false;
            }
        }
    }
    pairs
        .windows(2)
        .zip(profiles.windows(2))
        .all(|(p, f)| chain_condition(&p[0], &f[0], &p[1], &f[1]))
}

fn evaluate_group(
    mission: &Mission,
    muscles: &[PairChoice],
    options: &SynthesisOptions,
    fin_area: f64,
) -> Result<Vec<DesignCandidate>, ScenarioError> {
    let gripper = mission.has_drop();
    let template = DesignCandidate {
        layout: vec![FinSlot::RearLeft],
        pairs: muscles.to_vec(),
        gripper,
        fin_area_m2: fin_area,
        score: 0.0,
    };
    let build = |c: &DesignCandidate| config_for(c, None, options).build("");
    let base = build(&template)?;
    if !admissible(&base) {
        return Ok(Vec::new());
    }
    let timeline = actuate(&base.design, &base.environment, &base.sim)?;
    let events: Vec<_> = timeline.events.iter().map(|(_, e)| e.clone()).collect();
    layouts(muscles.len())
        .into_iter()
        .map(|layout| {
            let mut c = DesignCandidate {
                layout,
                ..template.clone()
            };
            let sc = build(&c)?;
            let params = sc.design.hydro_params(&sc.environment, &options.calibration);
            let traj = propel(&sc.design, &sc.environment, &sc.sim, &timeline, &params)?;
            let summary = summarize(&traj, &events, sc.design.hydro.reference_length_m, params.snap_duration);
            c.score = score_run(mission, &summary, &events);
            Ok(c)
        })
        .collect()
}

/// Sorts by score, then applies the tie-break among everything within
/// [`SCORE_TIE`] of the best score.
fn rank(all: &mut [DesignCandidate]) {
    all.sort_by(|a, b| a.score.total_cmp(&b.score).then_with(|| a.tie_break(b)));
    let Some(best) = all.first().map(|c| c.score) else {
        return;
    };
    let tied = all.iter().take_while(|c| c.score <= best + SCORE_TIE).count();
    all[..tied].sort_by(|a, b| a.tie_break(b));
}

/// Re-simulates a candidate from scratch and returns its score.
pub fn rescore(
    mission: &Mission,
    candidate: &DesignCandidate,
    options: &SynthesisOptions,
) -> Result<f64, ScenarioError> {
    let sc = config_for(candidate, None, options).build("")?;
    let r = sc.run(&options.calibration)?;
    Ok(score_run(mission, &r.summary, &r.events))
}

fn refine_fin_area(
    mission: &Mission,
    best: &DesignCandidate,
    options: &SynthesisOptions,
) -> Result<DesignCandidate, ScenarioError> {
    let base = best.fin_area_m2;
    let eval = |factor: f64| -> Result<f64, ScenarioError> {
        let c = DesignCandidate {
            fin_area_m2: base * factor,
            ..best.clone()
        };
        rescore(mission, &c, options)
    };
    let (mut a, mut b) = options.fin_area_range;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for _ in 0..24 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = eval(d)?;
        }
    }
    let (factor, score) = if fc < fd { (c, fc) } else { (d, fd) };
    if score < best.score {
        Ok(DesignCandidate {
            fin_area_m2: base * factor,
            score,
            ..best.clone()
        })
    } else {
        Ok(best.clone())
    }
}

pub fn synthesize(mission: &Mission, calibration: &Calibration) -> Result<SynthesisReport, MissionError> {
    synthesize_with(mission, &SynthesisOptions::staged(calibration.clone()))
}

/// Enumerates, simulates and ranks every admissible design. The result does
/// not depend on thread count or completion order.
pub fn synthesize_with(mission: &Mission, options: &SynthesisOptions) -> Result<SynthesisReport, MissionError> {
    let fin_area = FinsConfig::with_layout(&[]).area_m2;
    let groups = muscle_assignments(mission);
    let results: Vec<Vec<DesignCandidate>> = groups
        .par_iter()
        .map(|m| evaluate_group(mission, m, options, fin_area))
        .collect::<Result<_, _>>()?;
    let total: usize = groups.iter().map(|m| layouts(m.len()).len()).sum();
    let mut all: Vec<DesignCandidate> = results.into_iter().flatten().collect();
    let evaluated = all.len();
    rank(&mut all);
    let Some(first) = all.first().cloned() else {
        return Err(MissionError::NoCandidates);
    };
    let best = if options.refine_fin_area {
        refine_fin_area(mission, &first, options)?
    } else {
        first
    };
    if !(best.score < INFEASIBLE_SCORE) {
        return Err(MissionError::Infeasible {
            best: best.score,
            threshold: INFEASIBLE_SCORE,
        });
    }
    all.truncate(10);
    Ok(SynthesisReport {
        best,
        evaluated,
        rejected: total - evaluated,
        ranking: all,
    })
}
