//! Text artifacts: trajectory CSV, event log, summary block, SVG plot and
//! load-profile CSV. All writers are pure and byte-deterministic.

use std::fmt::Write;

use crate::actuation::ActuationEvent;
use crate::mech::{BistableProfile, SnapDirection};
use crate::scenario::{RunResult, Summary};

pub const TRAJECTORY_HEADER: &str = "t_s,x_m,y_m,theta_rad,vx,vy,omega,Twater_C";
pub const PROFILE_HEADER: &str = "V_mm,P_N,E_Nmm";

pub fn trajectory_csv(result: &RunResult) -> String {
    let mut out = String::with_capacity(80 * (result.trajectory.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for s in &result.trajectory {
        let b = &s.state;
        let _ = writeln!(
            out,
            "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.3}",
            s.t, b.x, b.y, b.theta, b.vx, b.vy, b.omega, s.water_temp
        );
    }
    out
}

/// `t_s=<t> event=<kind> pair=<id> energy_Nmm=<E>`; the gripper has pair `-`.
pub fn event_line(event: &ActuationEvent<f64>) -> String {
    let (kind, pair, energy) = match event {
        ActuationEvent::MuscleActive { pair, .. } => ("MuscleActive", pair.to_string(), 0.0),
        ActuationEvent::Snap(s) => (
            match s.direction {
                SnapDirection::Forward => "Snap",
                SnapDirection::Reverse => "ReverseSnap",
            },
            s.pair_id.to_string(),
            s.released_energy,
        ),
        ActuationEvent::CargoRelease { .. } => ("CargoRelease", "-".to_string(), 0.0),
    };
    format!(
        "t_s={:.6} event={kind} pair={pair} energy_Nmm={energy:.6}",
        event.time()
    )
}

pub fn event_log(events: &[ActuationEvent<f64>]) -> String {
    events.iter().map(|e| event_line(e) + "\n").collect()
}

/// Flat `key=value` block.
pub fn summary_text(name: &str, s: &Summary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario={name}");
    let _ = writeln!(out, "displacement_bl={:.6}", s.displacement_bl);
    let _ = writeln!(out, "final_heading_deg={:.6}", s.final_heading_deg);
    let _ = writeln!(out, "max_excursion_bl={:.6}", s.max_excursion_bl);
    if let Some(r) = s.return_error_bl {
        let _ = writeln!(out, "return_error_bl={r:.6}");
    }
    let _ = writeln!(out, "cargo_released={}", s.cargo_released);
    let _ = writeln!(out, "no_snap={}", s.no_snap);
    let _ = writeln!(out, "duration_s={:.6}", s.duration_s);
    let _ = writeln!(out, "strokes={}", s.strokes.len());
    for (i, st) in s.strokes.iter().enumerate() {
        let n = i + 1;
        let dir = match st.direction {
            SnapDirection::Forward => "forward",
            SnapDirection::Reverse => "reverse",
        };
        let _ = writeln!(out, "stroke{n}_pair={}", st.pair);
        let _ = writeln!(out, "stroke{n}_direction={dir}");
        let _ = writeln!(out, "stroke{n}_t_s={:.6}", st.t_start);
        let _ = writeln!(out, "stroke{n}_displacement_bl={:.6}", st.displacement_bl);
        let _ = writeln!(out, "stroke{n}_dtheta_deg={:.6}", st.dtheta_deg);
    }
    out
}

/// Parses a summary block back into `key → value` pairs.
pub fn parse_summary(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

/// Top-down view of the path in body lengths, with a marker at every snap
/// and cargo release.
pub fn trajectory_svg(result: &RunResult, reference_length: f64) -> String {
    const SIZE: f64 = 480.0;
    const PAD: f64 = 30.0;
    let pts: Vec<(f64, f64)> = result
        .trajectory
        .iter()
        .map(|s| (s.state.x / reference_length, s.state.y / reference_length))
        .collect();
    let (mut x0, mut x1, mut y0, mut y1) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(x, y) in &pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let span = (x1 - x0).max(y1 - y0).max(0.5);
    let scale = (SIZE - 2.0 * PAD) / span;
    let map = |x: f64, y: f64| (PAD + (x - x0) * scale, SIZE - PAD - (y - y0) * scale);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let (ox, oy) = map(0.0, 0.0);
    let _ = writeln!(
        out,
        r##"<circle cx="{ox:.2}" cy="{oy:.2}" r="4" fill="none" stroke="#555"/>"##
    );
    let mut d = String::new();
    let mut last = String::new();
    for &(x, y) in &pts {
        let (px, py) = map(x, y);
        let p = format!("{px:.2},{py:.2}");
        if p != last {
            let _ = write!(d, "{}{p}", if last.is_empty() { "M" } else { " L" });
            last = p;
        }
    }
    let _ = writeln!(
        out,
        r##"<path d="{d}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##
    );
    for ev in &result.events {
        let (color, label) = match ev {
            ActuationEvent::Snap(s) if s.direction == SnapDirection::Forward => ("#d62728", "snap"),
            ActuationEvent::Snap(_) => ("#9467bd", "reverse"),
            ActuationEvent::CargoRelease { .. } => ("#2ca02c", "release"),
            ActuationEvent::MuscleActive { .. } => continue,
        };
        let idx = result
            .trajectory
            .partition_point(|s| s.t <= ev.time())
            .saturating_sub(1);
        let (px, py) = map(pts[idx].0, pts[idx].1);
        let _ = writeln!(
            out,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="3.5" fill="{color}"><title>{label} t={:.3}s</title></circle>"#,
            ev.time()
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{PAD}" y="{:.0}" font-family="sans-serif" font-size="11" fill="#333">grid unit: body length, span {span:.2}</text>"##,
        PAD / 2.0 + 4.0
    );
    out.push_str("</svg>\n");
    out
}

/// `points` evenly spaced samples of load and energy over `[0, 2H]`.
pub fn profile_csv(profile: &BistableProfile<f64>, points: usize) -> String {
    let n = points.max(2);
    let travel = profile.geometry.travel();
    let mut out = String::from(PROFILE_HEADER);
    out.push('\n');
    for i in 0..n {
        let v = if i == n - 1 {
            travel
        } else {
            travel * i as f64 / (n - 1) as f64
        };
        let _ = writeln!(out, "{v:.6},{:.9},{:.9}", profile.load(v), profile.energy(v));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::actuation::SnapEvent;

    #[test]
    fn event_lines() {
        let snap = ActuationEvent::Snap(SnapEvent {
            time: 31.25,
            pair_id: 0,
            direction: SnapDirection::Forward,
            released_energy: 0.5853,
            stroke_length: 4.6,
        });
        assert_eq!(event_line(&snap), "t_s=31.250000 event=Snap pair=0 energy_Nmm=0.585300");
        let rel = ActuationEvent::CargoRelease { time: 200.0 };
        assert_eq!(
            event_line(&rel),
            "t_s=200.000000 event=CargoRelease pair=- energy_Nmm=0.000000"
        );
    }

    #[test]
    fn profile_csv_covers_travel() {
        let p = crate::mech::TrussGeometry::new(5.0, 20.0, 4.0, 2.0)
            .unwrap()
            .barriers()
            .unwrap();
        let csv = profile_csv(&p, 11);
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], PROFILE_HEADER);
        assert_eq!(lines.len(), 12);
        assert!(lines[1].starts_with("0.000000,"));
        assert!(lines[11].starts_with("10.000000,"));
    }
}
