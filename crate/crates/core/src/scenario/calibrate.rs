//! Drag calibration against the single-stroke distance and the three-fin turn.

use serde::{Deserialize, Serialize};

use super::run::{actuate, propel, summarize, Timeline};
use super::{Scenario, ScenarioError};

/// Single-stroke travel (body lengths).
pub const DISPLACEMENT_TARGET_BL: f64 = 1.15;
/// Heading change of the three-fin robot's second stroke (degrees).
pub const TURN_TARGET_DEG: f64 = 23.85;

/// Calibration shipped with the crate; used when no file is supplied.
pub const EMBEDDED_CALIBRATION: &str = include_str!("../../../../scenarios/calibration.toml");

const REL_TOL: f64 = 1e-7;
const MAX_ITER: usize = 200;
const MAX_UPPER: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Residuals {
    pub single_stroke_bl: f64,
    pub single_stroke_rel_error: f64,
    pub three_fin_turn_deg: f64,
    pub three_fin_turn_rel_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Calibration {
    /// Quadratic body drag coefficient `C_D`.
    pub body_drag_coeff: f64,
    /// Quadratic yaw drag `c_r` (N·m·s²).
    pub rotational_drag_coeff: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<Residuals>,
}

impl Calibration {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let c: Calibration = toml::from_str(text).map_err(|e| ScenarioError::from_toml(text, &e))?;
        for (key, v) in [
            ("body_drag_coeff", c.body_drag_coeff),
            ("rotational_drag_coeff", c.rotational_drag_coeff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScenarioError::Invalid {
                    key: key.to_string(),
                    line: super::key_line(text, key),
                    reason: format!("must be non-negative and finite, got {v}"),
                });
            }
        }
        Ok(c)
    }

    pub fn embedded() -> Self {
        Self::parse(EMBEDDED_CALIBRATION).expect("shipped calibration is valid")
    }

    pub fn to_toml(&self) -> String {
        let body = toml::to_string(self).expect("calibration serializes");
        format!("# Written by `snapswim calibrate`.\n{body}")
    }
}

/// Root of a decreasing `f` on `[0, ∞)` with `f(x) = target`. Doubles the
/// upper end until it brackets, then bisects.
fn solve_decreasing(
    name: &str,
    target: f64,
    mut f: impl FnMut(f64) -> Result<f64, ScenarioError>,
) -> Result<(f64, f64), ScenarioError> {
    let f0 = f(0.0)?;
    if !(f0 > target) {
        return Err(ScenarioError::Bracket(format!(
            "{name}: target {target} not reachable, zero drag already gives {f0}"
        )));
    }
    let mut hi = 1.0;
    let mut f_hi = f(hi)?;
    while f_hi > target {
        hi *= 2.0;
        if hi > MAX_UPPER {
            return Err(ScenarioError::Bracket(format!(
                "{name}: no coefficient below {MAX_UPPER} reaches {target}"
            )));
        }
        f_hi = f(hi)?;
    }
    let mut lo = 0.0;
    let (mut best, mut best_val) = (hi, f_hi);
    for _ in 0..MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if (v - target).abs() < (best_val - target).abs() {
            best = mid;
            best_val = v;
        }
        if ((v - target) / target).abs() < REL_TOL || hi - lo <= f64::EPSILON * hi {
            break;
        }
        if v > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((best, best_val))
}

/// Fits `C_D` on `single` (one straight stroke) and then `c_r` on `three_fin`
/// (second stroke turns left). Both are one-dimensional bisections.
pub fn calibrate(single: &Scenario, three_fin: &Scenario) -> Result<Calibration, ScenarioError> {
    let mut cal = Calibration {
        body_drag_coeff: 0.0,
        rotational_drag_coeff: 0.0,
        residuals: None,
    };
    let single_tl = actuate(&single.design, &single.environment, &single.sim)?;
    require_snaps(&single.name, &single_tl, 1)?;
    let (cd, disp) = solve_decreasing("body_drag_coeff", DISPLACEMENT_TARGET_BL, |cd| {
        let c = Calibration {
            body_drag_coeff: cd,
            ..cal.clone()
        };
        let s = stroke_metrics(single, &single_tl, &c)?;
        Ok(s.0)
    })?;
    cal.body_drag_coeff = cd;

    let turn_tl = actuate(&three_fin.design, &three_fin.environment, &three_fin.sim)?;
    require_snaps(&three_fin.name, &turn_tl, 2)?;
    let (cr, turn) = solve_decreasing("rotational_drag_coeff", TURN_TARGET_DEG, |cr| {
        let c = Calibration {
            rotational_drag_coeff: cr,
            ..cal.clone()
        };
        Ok(stroke_metrics(three_fin, &turn_tl, &c)?.1)
    })?;
    cal.rotational_drag_coeff = cr;
    cal.residuals = Some(Residuals {
        single_stroke_bl: disp,
        single_stroke_rel_error: (disp - DISPLACEMENT_TARGET_BL) / DISPLACEMENT_TARGET_BL,
        three_fin_turn_deg: turn,
        three_fin_turn_rel_error: (turn - TURN_TARGET_DEG) / TURN_TARGET_DEG,
    });
    Ok(cal)
}

fn require_snaps(name: &str, tl: &Timeline, n: usize) -> Result<(), ScenarioError> {
    let snaps = tl
        .events
        .iter()
        .filter(|(_, e)| matches!(e, crate::actuation::ActuationEvent::Snap(_)))
        .count();
    if snaps < n {
        return Err(ScenarioError::Bracket(format!(
            "anchor scenario `{name}` produced {snaps} snaps, expected {n}"
        )));
    }
    Ok(())
}

/// (total displacement in body lengths, second-stroke turn in degrees).
fn stroke_metrics(sc: &Scenario, tl: &Timeline, cal: &Calibration) -> Result<(f64, f64), ScenarioError> {
    let params = sc.design.hydro_params(&sc.environment, cal);
    let traj = propel(&sc.design, &sc.environment, &sc.sim, tl, &params)?;
    let events: Vec<_> = tl.events.iter().map(|(_, e)| e.clone()).collect();
    let s = summarize(&traj, &events, sc.design.hydro.reference_length_m, params.snap_duration);
    let turn = s.strokes.get(1).map_or(0.0, |st| st.dtheta_deg);
    Ok((s.displacement_bl, turn))
}
