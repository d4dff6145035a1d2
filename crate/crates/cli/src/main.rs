//! gravcat: force signals from a gravitational cat state under canonical
//! quantum theory and the objective-collapse roster.

// validation uses `!(x > 0.0)` so NaN fails closed
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use gravcat_core::error::CoreError;
use gravcat_core::force::{density_force, point_force, self_energy};
use gravcat_core::grid::grid_trajectory;
use gravcat_core::protocol::{ExperimentProtocol, ProtocolName};
use gravcat_core::rates::{rate_report, TheoryId, ALL_THEORIES};
use gravcat_core::scenario::{run_scenario, EngineKind};
use gravcat_core::sn::{detect_critical_mass, sn_evolve_radial, RadialState};
use gravcat_core::two_site::run_two_site_trajectory;
use gravcat_core::verdict::verdict_table;

use config::{fmt_full, parse_config, ConfigError, OutputFormat, RunConfig};

#[derive(Parser)]
#[command(
    name = "gravcat",
    version,
    about = "Simulate the probe-force signal of a gravitational cat state across collapse theories"
)]
struct Cli {
    /// Config file (TOML; dimensional values need unit suffixes, e.g. "1 pm")
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Protocol preset when no config is given: romero-isart | pino
    #[arg(long, global = true)]
    preset: Option<String>,

    /// Restrict to one theory (e.g. CSL_mN)
    #[arg(long, global = true)]
    theory: Option<String>,

    /// Override the RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory (default: config value, $GRAVCAT_OUT_DIR, or ".")
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output formats, comma separated: csv,json
    #[arg(long, global = true, value_delimiter = ',')]
    format: Option<Vec<String>>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate report for the protocol across the configured theories
    Rates,
    /// Closed-form force and self-energy figures for the protocol
    Forces,
    /// One stochastic force trajectory
    Trajectory,
    /// Trajectory ensemble with mean and correlation statistics
    Ensemble,
    /// Radial self-gravitating wavepacket evolution (width series)
    SnEvolve,
    /// Bisect the gravitational-collapse mass threshold
    CriticalMass,
    /// Theory x protocol signal-class table
    Verdict,
    /// Full scenario: verdict, rates, ensemble records and consistency check
    Scenario,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] CoreError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(
                CoreError::StabilityAbort(_)
                | CoreError::GridTooSmall(_)
                | CoreError::ResolutionTooCoarse(_),
            ) => 3,
            _ => 1,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => parse_config(path)?,
        None => {
            let mut cfg = RunConfig { theories: ALL_THEORIES.to_vec(), ..Default::default() };
            if let Some(preset) = &cli.preset {
                let name = ProtocolName::from_str(preset)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
                cfg.protocol = ExperimentProtocol::preset(name)
                    .map_err(|e| ConfigError::Invalid(e.to_string()))?;
            }
            cfg
        }
    };
    if let Some(theory) = &cli.theory {
        let t = TheoryId::from_str(theory).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        cfg.theories = vec![t];
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    } else if cli.config.is_none() {
        if let Ok(dir) = std::env::var("GRAVCAT_OUT_DIR") {
            cfg.out_dir = PathBuf::from(dir);
        }
    }
    if let Some(formats) = &cli.format {
        let parsed: Result<Vec<OutputFormat>, _> =
            formats.iter().map(|f| OutputFormat::from_str(f)).collect();
        cfg.formats = parsed?;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let dir = cfg.out_dir.clone();
    let mut files: Vec<PathBuf> = Vec::new();

    match cli.command {
        Command::Rates => {
            let reports: Vec<_> = cfg
                .theories
                .iter()
                .map(|&t| rate_report(t, &cfg.protocol, &cfg.collapse, &cfg.constants))
                .collect();
            print!("{}", output::rates_csv(&reports));
            output::write_rates_outputs(&cfg, &dir, &reports, &mut files)?;
        }
        Command::Forces => {
            let p = &cfg.protocol;
            let c = &cfg.constants;
            let f_point =
                point_force(c, p.sphere_mass, p.probe_mass, p.cat_separation_l, p.probe_distance())?;
            let f_density = density_force(
                c,
                p.sphere_density,
                p.probe_mass,
                p.cat_separation_l,
                p.surface_gap_a,
                p.sphere_radius,
            )?;
            let u_self = self_energy(c, p.sphere_mass, p.cat_separation_l)?;
            let csv = format!(
                "quantity,value,unit\npoint_force_f0,{},N\ndensity_force_f0,{},N\nself_energy,{},J\n",
                fmt_full(f_point),
                fmt_full(f_density),
                fmt_full(u_self)
            );
            print!("{csv}");
            if cfg.formats.contains(&OutputFormat::Csv) {
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("forces.csv");
                std::fs::write(&path, &csv)?;
                files.push(path);
            }
            if cfg.formats.contains(&OutputFormat::Json) {
                #[derive(serde::Serialize)]
                struct ForcesDoc<'a> {
                    schema_version: u32,
                    protocol: &'a ExperimentProtocol,
                    point_force_f0: f64,
                    density_force_f0: f64,
                    self_energy: f64,
                }
                let doc = ForcesDoc {
                    schema_version: output::SCHEMA_VERSION,
                    protocol: p,
                    point_force_f0: f_point,
                    density_force_f0: f_density,
                    self_energy: u_self,
                };
                std::fs::create_dir_all(&dir)?;
                let path = dir.join("forces.json");
                std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap() + "\n")?;
                files.push(path);
            }
        }
        Command::Trajectory => {
            let theory = cfg.theories[0];
            let record = match cfg.engine {
                EngineKind::TwoSite => run_two_site_trajectory(
                    theory,
                    &cfg.protocol,
                    &cfg.collapse,
                    &cfg.constants,
                    cfg.horizon,
                    cfg.dt,
                    cfg.seed,
                )?,
                EngineKind::Grid => {
                    let run = grid_trajectory(
                        theory,
                        &cfg.protocol,
                        &cfg.collapse,
                        &cfg.constants,
                        &cfg.grid,
                        cfg.horizon,
                        cfg.dt,
                        cfg.seed,
                        &[],
                    )?;
                    std::fs::create_dir_all(&dir)?;
                    let state_path = dir.join("state_final.bin");
                    let mut file = std::fs::File::create(&state_path)?;
                    run.final_state.write_binary(&mut file)?;
                    files.push(state_path);
                    run.record
                }
            };
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("traj_0.csv");
            std::fs::write(&path, output::trajectory_csv(&record))?;
            files.push(path);
            println!(
                "{theory}: {} samples, {} events",
                record.times.len(),
                record.events.len()
            );
        }
        Command::Ensemble | Command::Scenario => {
            let theory = cfg.theories[0];
            let n_traj = if matches!(cli.command, Command::Ensemble) {
                cfg.n_traj.max(1)
            } else {
                cfg.n_traj
            };
            let result = run_scenario(
                theory,
                &cfg.protocol,
                &cfg.collapse,
                &cfg.constants,
                cfg.engine,
                n_traj,
                cfg.horizon,
                cfg.dt,
                cfg.seed,
            )?;
            output::write_scenario_outputs(&cfg, &dir, &result, &mut files)?;
            // resolved config alongside the outputs, for exact reruns
            std::fs::create_dir_all(&dir)?;
            let cfg_path = dir.join("config.toml");
            std::fs::write(&cfg_path, config::emit_config(&cfg))?;
            files.push(cfg_path);
            println!(
                "{theory} @ {}: {}{}",
                result.verdict.protocol,
                result.verdict.signal_class,
                match result.consistent {
                    Some(ok) => format!(" (simulation consistent: {ok})"),
                    None => String::new(),
                }
            );
        }
        Command::SnEvolve => {
            let sn = &cfg.sn;
            let r_max = sn.budget.box_sigmas * sn.sigma0;
            let state =
                RadialState::new_gaussian(sn.sigma0, sn.mass, sn.budget.n_intervals, r_max)?;
            let (_, series) =
                sn_evolve_radial(&state, cfg.constants.g, sn.dt, sn.n_steps, &cfg.constants)?;
            let mut csv = String::from("t,width\n");
            for (t, w) in &series {
                csv.push_str(&format!("{},{}\n", fmt_full(*t), fmt_full(*w)));
            }
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("sn_width.csv");
            std::fs::write(&path, &csv)?;
            files.push(path);
            let (t_end, w_end) = *series.last().unwrap();
            println!(
                "evolved to t = {t_end:.3e} s: width {:.4e} -> {:.4e} m",
                series[0].1, w_end
            );
        }
        Command::CriticalMass => {
            let sn = &cfg.sn;
            let bracket = detect_critical_mass(
                &cfg.constants,
                cfg.constants.g,
                sn.sigma0,
                sn.mass_lo,
                sn.mass_hi,
                &sn.budget,
            )?;
            #[derive(serde::Serialize)]
            struct BracketDoc {
                schema_version: u32,
                sigma0_m: f64,
                bracket_kg: Option<(f64, f64)>,
                bracket_amu: Option<(f64, f64)>,
            }
            let amu = cfg.constants.amu;
            let doc = BracketDoc {
                schema_version: output::SCHEMA_VERSION,
                sigma0_m: sn.sigma0,
                bracket_kg: bracket,
                bracket_amu: bracket.map(|(lo, hi)| (lo / amu, hi / amu)),
            };
            let text = serde_json::to_string_pretty(&doc).unwrap() + "\n";
            print!("{text}");
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("critical_mass.json");
            std::fs::write(&path, &text)?;
            files.push(path);
        }
        Command::Verdict => {
            let protocols: Vec<ExperimentProtocol> =
                if cli.config.is_some() || cli.preset.is_some() {
                    vec![cfg.protocol.clone()]
                } else {
                    vec![ExperimentProtocol::romero_isart(), ExperimentProtocol::pino()]
                };
            let cells = verdict_table(&cfg.theories, &protocols, &cfg.collapse, &cfg.constants);
            print!("{}", output::verdict_text(&cells));
            output::write_verdict_outputs(&cfg, &dir, &cells, &mut files)?;
        }
    }

    for f in &files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}
