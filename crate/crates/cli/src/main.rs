//! `snapswim`: simulate, calibrate, sweep and synthesize snap-through swimmers.
//!
//! Exit codes: 0 success, 1 output failure, 2 bad input (config, mission,
//! missing file, sweep key), 3 simulation diverged, 4 calibration could not
//! bracket an anchor, 5 mission infeasible.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use snapswim::io;
use snapswim::mission::{self, MissionError, SynthesisOptions};
use snapswim::scenario::{self, shipped, Calibration, Scenario, ScenarioConfig, ScenarioError, TrussConfig};

const CALIBRATION_ENV: &str = "SNAPSWIM_CALIBRATION";

#[derive(Parser)]
#[command(name = "snapswim", version, about = "Bistable snap-through swimmer simulator")]
struct Cli {
    /// Worker threads for sweep and synth (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write trajectory.csv, events.log, summary.txt and trajectory.svg.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long)]
        dt_ms: Option<f64>,
        #[arg(long)]
        horizon_s: Option<f64>,
        /// Calibration file (overrides SNAPSWIM_CALIBRATION).
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Fit drag coefficients to the distance and turn anchors.
    Calibrate {
        #[arg(long)]
        out: PathBuf,
        /// Single-stroke anchor scenario (default: the shipped one).
        #[arg(long)]
        single_stroke: Option<PathBuf>,
        /// Three-fin anchor scenario (default: the shipped one).
        #[arg(long)]
        three_fin: Option<PathBuf>,
    },
    /// Compile a mission file into a scenario config.
    Synth {
        #[arg(long)]
        mission: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Refine the winner's fin area by golden-section search.
        #[arg(long)]
        refine_fin_area: bool,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Re-run a scenario for each value of one key; one summary row per value.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// `key=v1,v2,...`; a bare key is replaced everywhere it occurs.
        #[arg(long)]
        vary: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        calibration: Option<PathBuf>,
    },
    /// Write the load and strain-energy curve of a pair's truss as CSV.
    ProfileExport {
        /// Scenario to take the truss from (default: the reference truss).
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        pair: usize,
        #[arg(long, default_value_t = 1024)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        let code = if let Some(e) = error.downcast_ref::<ScenarioError>() {
            scenario_code(e)
        } else if let Some(e) = error.downcast_ref::<MissionError>() {
            match e {
                MissionError::Parse { .. } => 2,
                MissionError::Infeasible { .. } | MissionError::NoCandidates => 5,
                MissionError::Scenario(s) => scenario_code(s),
            }
        } else {
            1
        };
        Failure { code, error }
    }
}

fn scenario_code(e: &ScenarioError) -> u8 {
    match e {
        ScenarioError::Diverged { .. } => 3,
        ScenarioError::Bracket(_) => 4,
        e if e.is_input_error() => 2,
        _ => 1,
    }
}

fn input<T>(r: Result<T, ScenarioError>) -> Result<T, Failure> {
    r.map_err(|e| Failure::from(anyhow::Error::new(e)))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure {
        code: 2,
        error: anyhow!("cannot read {}: {e}", path.display()),
    })
}

fn write(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

fn load_scenario(path: &Path) -> Result<(String, ScenarioConfig, Scenario), Failure> {
    let text = read(path)?;
    let cfg = input(ScenarioConfig::parse(&text)).map_err(|f| in_file(f, path))?;
    let sc = input(cfg.build(&text)).map_err(|f| in_file(f, path))?;
    Ok((text, cfg, sc))
}

fn in_file(f: Failure, path: &Path) -> Failure {
    let code = f.code;
    Failure {
        code,
        error: f.error.context(path.display().to_string()),
    }
}

fn load_calibration(flag: Option<&Path>) -> Result<Calibration, Failure> {
    let path = flag
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(CALIBRATION_ENV).map(PathBuf::from));
    match path {
        Some(p) => {
            let text = read(&p)?;
            input(Calibration::parse(&text)).map_err(|f| in_file(f, &p))
        }
        None => {
            eprintln!("warning: no calibration file given (--calibration or {CALIBRATION_ENV}); using the shipped calibration");
            Ok(Calibration::embedded())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| anyhow!("cannot size worker pool: {e}"))?;
    }
    match cli.command {
        Command::Simulate {
            scenario,
            out_dir,
            dt_ms,
            horizon_s,
            calibration,
        } => {
            let (text, mut cfg, _) = load_scenario(&scenario)?;
            if let Some(dt) = dt_ms {
                cfg.sim.dt_ms = dt;
            }
            if let Some(h) = horizon_s {
                cfg.sim.horizon_s = h;
            }
            let sc = input(cfg.build(&text)).map_err(|f| in_file(f, &scenario))?;
            let cal = load_calibration(calibration.as_deref())?;
            let result = input(sc.run(&cal))?;
            let ref_len = sc.design.hydro.reference_length_m;
            write(&out_dir.join("trajectory.csv"), &io::trajectory_csv(&result))?;
            write(&out_dir.join("events.log"), &io::event_log(&result.events))?;
            let summary = io::summary_text(&sc.name, &result.summary);
            write(&out_dir.join("summary.txt"), &summary)?;
            write(&out_dir.join("trajectory.svg"), &io::trajectory_svg(&result, ref_len))?;
            print!("{summary}");
        }
        Command::Calibrate {
            out,
            single_stroke,
            three_fin,
        } => {
            let anchor = |p: Option<PathBuf>, fallback: &str| -> Result<Scenario, Failure> {
                match p {
                    Some(p) => Ok(load_scenario(&p)?.2),
                    None => input(Scenario::parse(fallback)),
                }
            };
            let single = anchor(single_stroke, shipped::SINGLE_STROKE)?;
            let turn = anchor(three_fin, shipped::THREE_FIN)?;
            let cal = input(scenario::calibrate(&single, &turn))?;
            let text = cal.to_toml();
            write(&out, &text)?;
            print!("{text}");
        }
        Command::Synth {
            mission: mission_path,
            out,
            refine_fin_area,
            calibration,
        } => {
            let text = read(&mission_path)?;
            let m = mission::parse(&text).map_err(|e| Failure {
                code: 2,
                error: anyhow::Error::new(e).context(mission_path.display().to_string()),
            })?;
            let cal = load_calibration(calibration.as_deref())?;
            let mut options = SynthesisOptions::staged(cal);
            options.refine_fin_area = refine_fin_area;
            let report = mission::synthesize_with(&m, &options).map_err(|e| Failure::from(anyhow::Error::new(e)))?;
            write(&out, &mission::emit_design(&report.best, &m, &options))?;
            let best = &report.best;
            let layout: Vec<_> = best.layout.iter().map(|s| s.name()).collect();
            println!("score={:.6}", best.score);
            println!("pairs={}", best.pairs.len());
            println!("fins={}", layout.join(","));
            for (i, p) in best.pairs.iter().enumerate() {
                println!(
                    "pair{i}_forward={} {}mm",
                    p.forward.material.name(),
                    p.forward.thickness_mm
                );
                if let Some(r) = p.reverse {
                    println!("pair{i}_reverse={} {}mm", r.material.name(), r.thickness_mm);
                }
            }
            println!("gripper={}", best.gripper);
            println!("evaluated={} rejected={}", report.evaluated, report.rejected);
        }
        Command::Sweep {
            scenario,
            vary,
            out,
            calibration,
        } => {
            let text = read(&scenario)?;
            let variation = input(scenario::parse_vary(&vary))?;
            let cal = load_calibration(calibration.as_deref())?;
            let rows = input(scenario::sweep(&text, &variation, &cal)).map_err(|f| in_file(f, &scenario))?;
            let csv = scenario::sweep_csv(&variation.key, &rows);
            write(&out, &csv)?;
            print!("{csv}");
        }
        Command::ProfileExport {
            scenario,
            pair,
            points,
            out,
        } => {
            let geometry = match scenario {
                Some(p) => {
                    let (_, _, sc) = load_scenario(&p)?;
                    sc.design.pairs.get(pair).map(|p| p.truss).ok_or_else(|| Failure {
                        code: 2,
                        error: anyhow!("{}: no pair {pair}", p.display()),
                    })?
                }
                None => TrussConfig::reference().geometry(),
            };
            let profile = geometry.barriers().map_err(|e| Failure {
                code: 2,
                error: anyhow!("{e}"),
            })?;
            write(&out, &io::profile_csv(&profile, points))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = format!("{:#}", f.error).replace('\n', " ");
            eprintln!("error: {msg}");
            ExitCode::from(f.code)
        }
    }
}
