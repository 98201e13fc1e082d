//! Scans support and joint stiffness for the H = 5 mm, L = 20 mm truss and
//! lists every combination whose trigger threshold lies in (1.0, 1.2] mm with
//! both load extrema inside the muscle force range 0.2..2.1 N.
//!
//! Selection: the support stiffness whose symmetric truss puts the threshold
//! nearest 1.1 mm, then the smallest joint stiffness that makes the reverse
//! peak at least 15% weaker than the forward peak.

use snapswim::mech::SnapDirection;
use snapswim::muscle::{trigger_threshold, FORCE_ANCHORS};
use snapswim::TrussGeometry;

const RISE: f64 = 5.0;
const HALF_SPAN: f64 = 20.0;

fn main() {
    let [(t0, f0), (t1, f1)] = FORCE_ANCHORS;
    let thickness_for = |force: f64| t0 + (force - f0) * (t1 - t0) / (f1 - f0);

    println!("k_N_per_mm,k_theta_Nmm_per_rad,F_max_N,F_min_N,threshold_mm");
    let mut admissible = Vec::new();
    for i in 1..=16 {
        for j in 0..=16 {
            let (k, kt) = (0.5 * i as f64, 0.5 * j as f64);
            let Ok(profile) = TrussGeometry::new(RISE, HALF_SPAN, k, kt).and_then(|g| g.barriers()) else {
                continue;
            };
            let (fmax, fmin) = (profile.forward_peak_force, profile.reverse_peak_force);
            let threshold = thickness_for(trigger_threshold(&profile, SnapDirection::Forward));
            let in_range = |f: f64| (f0..=f1).contains(&f.abs());
            if threshold > 1.0 && threshold <= 1.2 && in_range(fmax) && in_range(fmin) {
                println!("{k},{kt},{fmax:.4},{fmin:.4},{threshold:.4}");
                admissible.push((k, kt, threshold, 1.0 - fmin.abs() / fmax));
            }
        }
    }
    let support = admissible
        .iter()
        .filter(|c| c.1 == 0.0)
        .min_by(|a, b| (a.2 - 1.1).abs().total_cmp(&(b.2 - 1.1).abs()))
        .map(|c| c.0);
    let best = admissible
        .iter()
        .filter(|c| Some(c.0) == support && c.3 >= 0.15)
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((k, kt, th, _)) => println!(
            "\nselected: rise_mm = {RISE}, half_span_mm = {HALF_SPAN}, \
             support_stiffness_n_per_mm = {k}, joint_stiffness_nmm_per_rad = {kt} (threshold {th:.3} mm)"
        ),
        None => println!("\nno admissible geometry on this grid"),
    }
}
