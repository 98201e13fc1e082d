//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{rngs::StdRng, Rng, SeedableRng};

use snapswim::actuation::ActuationEvent;
use snapswim::hydro::FinSlot;
use snapswim::io;
use snapswim::mech::SnapDirection;
use snapswim::mission::{self, SynthesisOptions};
use snapswim::muscle::{can_trigger, MaterialDb, MuscleOrientation};
use snapswim::scenario::{self, shipped, Calibration, Scenario, TrussConfig};
use snapswim::{MuscleSpec, TrussGeometry};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let r = f();
    let took = start.elapsed();
    let note = format!("{:.2}s", took.as_secs_f64());
    match (r, limit) {
        (Ok(d), Some(l)) if took > l => Err(format!("{d}; {note} exceeds {:.0}s", l.as_secs_f64())),
        (Ok(d), _) => Ok(format!("{d}; {note}")),
        (Err(d), _) => Err(format!("{d}; {note}")),
    }
}

fn scenario(text: &str) -> Scenario {
    Scenario::parse(text).expect("shipped scenario parses")
}

/// Fourth-order central difference, one-sided at the ends of `[0, 2H]`.
fn energy_slope(g: &TrussGeometry, v: f64) -> f64 {
    let h = 1e-3 * g.rise;
    let e = |x: f64| g.strain_energy(x).unwrap();
    let travel = g.travel();
    if v - 2.0 * h < 0.0 {
        (-25.0 * e(v) + 48.0 * e(v + h) - 36.0 * e(v + 2.0 * h) + 16.0 * e(v + 3.0 * h) - 3.0 * e(v + 4.0 * h))
            / (12.0 * h)
    } else if v + 2.0 * h > travel {
        (25.0 * e(v) - 48.0 * e(v - h) + 36.0 * e(v - 2.0 * h) - 16.0 * e(v - 3.0 * h) + 3.0 * e(v - 4.0 * h))
            / (12.0 * h)
    } else {
        (e(v - 2.0 * h) - 8.0 * e(v - h) + 8.0 * e(v + h) - e(v + 2.0 * h)) / (12.0 * h)
    }
}

fn c1_load_matches_energy() -> Outcome {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let rise = rng.gen_range(1.0..10.0);
        let g = TrussGeometry::new(
            rise,
            rise * rng.gen_range(2.0..8.0),
            rng.gen_range(0.5..10.0),
            rng.gen_range(0.0..10.0),
        )
        .unwrap();
        let n = 1024;
        let vs: Vec<f64> = (0..n).map(|i| g.travel() * i as f64 / (n - 1) as f64).collect();
        let loads: Vec<f64> = vs.iter().map(|&v| g.load(v).unwrap()).collect();
        let peak = loads.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        for (&v, &p) in vs.iter().zip(&loads) {
            let fd = 2.0 * energy_slope(&g, v);
            worst = worst.max((p - fd).abs() / p.abs().max(1e-3 * peak));
        }
    }
    check(
        worst < 1e-5,
        format!("max relative error {worst:.2e} over 50 geometries x 1024 points"),
    )
}

fn c2_symmetric_truss() -> Outcome {
    let mut worst_root: f64 = 0.0;
    let mut worst_peak: f64 = 0.0;
    for rise in [2.0, 5.0, 8.0] {
        for span in [15.0, 20.0, 30.0] {
            for k in [1.0, 4.0] {
                let g = TrussGeometry::new(rise, span, k, 0.0).unwrap();
                let p = g.barriers().map_err(|e| format!("H={rise} L={span}: {e}"))?;
                for (r, want) in p.equilibria.iter().zip([0.0, rise, 2.0 * rise]) {
                    worst_root = worst_root.max((r - want).abs());
                }
                let (fmax, fmin) = (p.forward_peak_force.abs(), p.reverse_peak_force.abs());
                worst_peak = worst_peak.max((fmax - fmin).abs() / fmax);
            }
        }
    }
    check(
        worst_root < 1e-9 && worst_peak < 1e-10,
        format!("root error {worst_root:.1e} mm, peak mismatch {worst_peak:.1e}"),
    )
}

fn c3_asymmetry() -> Outcome {
    let mut count = 0;
    for i in 0..10 {
        for j in 0..10 {
            let rise = 3.0 + 0.4 * i as f64;
            let kt = 0.2 + 0.4 * j as f64;
            let g = TrussGeometry::new(rise, 20.0, 4.0, kt).unwrap();
            let p = g.barriers().map_err(|e| format!("H={rise} k_theta={kt}: {e}"))?;
            if !(p.reverse_peak_force.abs() < p.forward_peak_force.abs()) {
                return Err(format!("H={rise} k_theta={kt}: |F_min| >= |F_max|"));
            }
            if !(p.energy(p.second_stable()) > p.energy(p.first_stable())) {
                return Err(format!("H={rise} k_theta={kt}: activated state not above fabricated"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} geometries"))
}

fn c4_trigger_threshold() -> Outcome {
    let profile = TrussConfig::reference()
        .geometry()
        .barriers()
        .map_err(|e| e.to_string())?;
    let material = MaterialDb::builtin().get("VeroWhitePlus").unwrap().clone();
    let fires = |t: f64| {
        can_trigger(
            &MuscleSpec::new(t, material.clone(), MuscleOrientation::ForwardDriver),
            &profile,
        )
    };
    let mut bad = Vec::new();
    for i in 5..=20 {
        let t = i as f64 / 10.0;
        let expected = t > 1.1;
        if (t <= 1.0 || t >= 1.2) && fires(t) != expected {
            bad.push(format!("{t}"));
        }
    }
    check(
        bad.is_empty(),
        if bad.is_empty() {
            "false for 0.5..1.0 mm, true for 1.2..2.0 mm".into()
        } else {
            format!("wrong at t = {}", bad.join(", "))
        },
    )
}

fn c5_calibration(out: &mut Option<Calibration>) -> Outcome {
    let cal = scenario::calibrate(&scenario(shipped::SINGLE_STROKE), &scenario(shipped::THREE_FIN))
        .map_err(|e| e.to_string())?;
    let r = cal.residuals.clone().unwrap();
    *out = Some(cal);
    check(
        r.single_stroke_rel_error.abs() < 1e-3 && r.three_fin_turn_rel_error.abs() < 1e-3,
        format!(
            "single stroke {:.6} l, three-fin turn {:.6} deg",
            r.single_stroke_bl, r.three_fin_turn_deg
        ),
    )
}

fn c6_predictions(cal: &Calibration) -> Outcome {
    let two = scenario(shipped::TWO_STROKE_4FIN).run(cal).map_err(|e| e.to_string())?;
    let diag = scenario(shipped::TWO_FIN_DIAGONAL)
        .run(cal)
        .map_err(|e| e.to_string())?;
    let d = two.summary.displacement_bl;
    let turns: Vec<f64> = diag.summary.strokes.iter().map(|s| s.dtheta_deg).collect();
    let ok = (d - 1.9).abs() <= 0.15 * 1.9
        && turns.len() == 2
        && (turns[0] - 21.64).abs() <= 5.0
        && (turns[1] + 21.45).abs() <= 5.0;
    check(ok, format!("two-stroke {d:.4} l, diagonal turns {turns:.3?} deg"))
}

fn c7_thickness(cal: &Calibration) -> Outcome {
    let v = scenario::parse_vary("thickness_mm=1.2,1.4,1.6").unwrap();
    let rows = scenario::sweep(shipped::SINGLE_STROKE, &v, cal).map_err(|e| e.to_string())?;
    let d: Vec<f64> = rows.iter().map(|r| r.summary.displacement_bl).collect();
    let (lo, hi) = d.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
    let spread = (hi - lo) / hi;
    check(
        hi > 0.0 && spread < 0.02,
        format!("displacements {d:.6?}, spread {:.3}%", 100.0 * spread),
    )
}

fn c8_sequencing() -> Outcome {
    let mut notes = Vec::new();
    for dt_ms in [1.0, 5.0, 10.0] {
        let mut sc = scenario(shipped::TWO_STROKE_4FIN);
        sc.sim.dt = dt_ms * 1e-3;
        if sc.design.fins_of(0).iter().any(|f| f.slot.is_front()) {
            return Err("pair 0 is not the rear pair".into());
        }
        let tl = scenario::actuate(&sc.design, &sc.environment, &sc.sim).map_err(|e| e.to_string())?;
        let snap = |pair: usize| {
            tl.events.iter().find_map(|(_, e)| match e {
                ActuationEvent::Snap(s) if s.pair_id == pair => Some(s.time),
                _ => None,
            })
        };
        match (snap(0), snap(1)) {
            (Some(t1), Some(t2)) if t1 < t2 => notes.push(format!("dt={dt_ms}ms {t1:.3}<{t2:.3}")),
            other => return Err(format!("dt={dt_ms}ms: snaps {other:?}")),
        }
    }
    Ok(notes.join(", "))
}

fn c9_reverse_cargo(cal: &Calibration) -> Outcome {
    let r = scenario(shipped::REVERSE_CARGO).run(cal).map_err(|e| e.to_string())?;
    let order: Vec<&str> = r
        .events
        .iter()
        .filter_map(|e| match e {
            ActuationEvent::Snap(s) if s.direction == SnapDirection::Forward => Some("snap"),
            ActuationEvent::Snap(_) => Some("reverse-snap"),
            ActuationEvent::CargoRelease { .. } => Some("release"),
            ActuationEvent::MuscleActive { .. } => None,
        })
        .collect();
    let err = r.summary.return_error_bl.unwrap_or(f64::INFINITY);
    check(
        order == ["snap", "release", "reverse-snap"] && err < 0.35,
        format!("order {}, return error {err:.4} l", order.join(" -> ")),
    )
}

const MISSIONS: [&str; 3] = ["FORWARD 0.5; TURN 23", "TURN 21; TURN -21", "FORWARD 1.0; DROP; RETURN"];

fn synthesize_all(cal: &Calibration) -> Result<Vec<(mission::SynthesisReport, String)>, String> {
    let options = SynthesisOptions::staged(cal.clone());
    MISSIONS
        .iter()
        .map(|text| {
            let m = mission::parse(text).map_err(|e| e.to_string())?;
            let report = mission::synthesize_with(&m, &options).map_err(|e| format!("{text}: {e}"))?;
            let emitted = mission::emit_design(&report.best, &m, &options);
            Ok((report, emitted))
        })
        .collect()
}

fn c10_synthesis(cal: &Calibration, out: &mut Vec<String>) -> Outcome {
    use FinSlot::*;
    let results = synthesize_all(cal)?;
    *out = results.iter().map(|(_, e)| e.clone()).collect();
    let best: Vec<_> = results.iter().map(|(r, _)| &r.best).collect();
    let first = best[0].layout == [FrontRight, RearLeft, RearRight];
    let second = best[1].layout == [FrontLeft, RearRight];
    let third = best[2].gripper && best[2].pairs.iter().any(|p| p.reverse.is_some());
    let names = |l: &[FinSlot]| l.iter().map(|s| s.name()).collect::<Vec<_>>().join("+");
    check(
        first && second && third,
        format!(
            "[{}], [{}], dual-muscle={} gripper={}",
            names(&best[0].layout),
            names(&best[1].layout),
            best[2].pairs.iter().any(|p| p.reverse.is_some()),
            best[2].gripper
        ),
    )
}

fn artifacts(cal: &Calibration) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (name, text) in shipped::ALL {
        let sc = scenario(text);
        let r = sc.run(cal).map_err(|e| format!("{name}: {e}"))?;
        out.push(io::trajectory_csv(&r));
        out.push(io::event_log(&r.events));
        out.push(io::summary_text(name, &r.summary));
    }
    Ok(out)
}

fn c11_determinism(cal: &Calibration, synth_first: &[String]) -> Outcome {
    let a = artifacts(cal)?;
    let b = artifacts(cal)?;
    let again = scenario::calibrate(&scenario(shipped::SINGLE_STROKE), &scenario(shipped::THREE_FIN))
        .map_err(|e| e.to_string())?;
    let synth_second: Vec<String> = synthesize_all(cal)?.into_iter().map(|(_, e)| e).collect();
    let bytes: usize = a.iter().map(String::len).sum();
    check(
        a == b && again.to_toml() == cal.to_toml() && synth_first == synth_second.as_slice(),
        format!(
            "{} artifacts ({bytes} bytes), calibration and {} synthesis outputs compared",
            a.len(),
            synth_second.len()
        ),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        (
            "1 load equals twice the energy slope",
            timed(Some(Duration::from_secs(1)), c1_load_matches_energy),
        ),
        ("2 symmetric truss analytics", timed(None, c2_symmetric_truss)),
        ("3 asymmetry properties", timed(None, c3_asymmetry)),
        ("4 trigger threshold", timed(None, c4_trigger_threshold)),
    ];
    let mut cal = None;
    results.push((
        "5 calibration anchors",
        timed(Some(Duration::from_secs(10)), || c5_calibration(&mut cal)),
    ));
    let cal = cal.unwrap_or_else(Calibration::embedded);
    results.push(("6 predicted results", timed(None, || c6_predictions(&cal))));
    results.push(("7 thickness invariance", timed(None, || c7_thickness(&cal))));
    results.push(("8 series sequencing", timed(None, c8_sequencing)));
    results.push(("9 reverse cargo", timed(None, || c9_reverse_cargo(&cal))));
    let mut synth = Vec::new();
    results.push((
        "10 synthesis regression",
        timed(Some(Duration::from_secs(120)), || c10_synthesis(&cal, &mut synth)),
    ));
    results.push(("11 determinism", timed(None, || c11_determinism(&cal, &synth))));

    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(d) => println!("PASS  {name}: {d}"),
            Err(d) => {
                failed += 1;
                println!("FAIL  {name}: {d}");
            }
        }
    }
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
