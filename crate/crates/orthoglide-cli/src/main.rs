//! Command-line front end: inverse geometry queries, trajectory simulation
//! sweeps with CSV output, SVG chart rendering and the numerical
//! verification suites.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use orthoglide::kinematics::inverse_geometry;
use orthoglide::model::Leg;
use orthoglide::plot::render_plots;
use orthoglide::sim::{emit_csv, simulate};
use orthoglide::trajectory::CosineTrajectory;
use orthoglide::verify::{
    energy_balance, fd_kinematics_check, lagrangian_equivalence_check, static_equivalence_check,
    OracleReport,
};
use orthoglide::{Error, RobotModel, Vec3};

#[derive(Parser)]
#[command(
    name = "orthoglide",
    version,
    about = "Kinematics and inverse-dynamics simulator for the Orthoglide translational parallel robot"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the inverse geometry for one platform position (meters).
    #[command(allow_negative_numbers = true)]
    Ik {
        x: f64,
        y: f64,
        z: f64,
        /// Parameter file (key=value); defaults used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep the reference trajectory and write one CSV row per sample.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Sweep end time in seconds.
        #[arg(long = "t-end", default_value_t = 2.0)]
        t_end: f64,
        /// Number of uniform samples on [0, t-end].
        #[arg(long, default_value_t = 201, value_parser = clap::value_parser!(u32).range(2..))]
        samples: u32,
        /// Output CSV path.
        #[arg(long, default_value = "simulation.csv")]
        out: PathBuf,
    },
    /// Render displacement and power charts from a simulation CSV.
    Plot {
        csv: PathBuf,
        /// Output directory for the SVG files.
        #[arg(long, default_value = "plots")]
        out: PathBuf,
    },
    /// Run the numerical oracle suites and print a report table.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Suite {
    All,
    Kin,
    Dyn,
}

fn load_model(config: &Option<PathBuf>) -> Result<RobotModel, Error> {
    match config {
        Some(path) => RobotModel::from_config_file(path),
        None => Ok(RobotModel::default()),
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Ik { x, y, z, config } => {
            let model = load_model(&config)?;
            let joints = inverse_geometry(Vec3::new(x, y, z), &model)?;
            println!("platform position: ({x:.6}, {y:.6}, {z:.6}) m");
            for leg in Leg::ALL {
                let j = &joints[leg];
                println!(
                    "leg {leg}: lambda = {:+.9} m, phi21 = {:+.9} rad, phi32 = {:+.9} rad",
                    j.lambda, j.phi21, j.phi32
                );
            }
            Ok(true)
        }
        Command::Simulate {
            config,
            t_end,
            samples,
            out,
        } => {
            let model = load_model(&config)?;
            let traj = CosineTrajectory::default();
            let rows = simulate(&model, &traj, t_end, samples as usize)?;
            emit_csv(&rows, &out)?;
            println!(
                "wrote {} samples over [0, {t_end}] s to {}",
                rows.len(),
                out.display()
            );
            Ok(true)
        }
        Command::Plot { csv, out } => {
            let files = render_plots(&csv, &out)?;
            for f in &files {
                println!("wrote {}", f.display());
            }
            Ok(true)
        }
        Command::Verify { suite, config } => {
            let model = load_model(&config)?;
            let traj = CosineTrajectory::default();
            let mut reports: Vec<OracleReport> = Vec::new();
            if suite != Suite::Dyn {
                reports.extend(fd_kinematics_check(&traj, &model, 1e-5, 201)?);
            }
            if suite != Suite::Kin {
                reports.push(static_equivalence_check(&model, 50)?);
                reports.push(lagrangian_equivalence_check(&traj, &model, 21)?);
                reports.push(energy_balance(&traj, 201, &model)?);
            }
            for r in &reports {
                println!("{r}");
            }
            let all_pass = reports.iter().all(|r| r.pass);
            println!(
                "verification: {} of {} checks passed",
                reports.iter().filter(|r| r.pass).count(),
                reports.len()
            );
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            if e.is_workspace_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
