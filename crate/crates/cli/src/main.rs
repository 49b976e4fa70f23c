use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use nearfield_ma::arrays::{read_geometry, write_geometry};
use nearfield_ma::harness::experiment::bound_table;
use nearfield_ma::harness::{
    beam_pattern, compare_schemes, construction_report, focused_weights, load_config, run_experiment,
    write_results, BeamGridSpec, ExperimentConfig, Scene,
};

#[derive(Parser)]
#[command(name = "nfma", version, about = "Movable-antenna near-field beamforming experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory. Without it `run` writes to ./results and the other
    /// commands print to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Override the number of Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Suppress progress and summary output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write trials.csv and summary.csv.
    Run { config: PathBuf },
    /// Beam gain of a geometry focused on a point, over a ground grid.
    Beampattern { geometry: PathBuf, grid: PathBuf },
    /// Closed-form bound for every trial of a configuration.
    Bound { config: PathBuf },
    /// Bound-achieving placement for a two-user single-path scene.
    ConstructApv { scene: PathBuf },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn emit(out: Option<&Path>, name: &str, contents: &str, quiet: bool) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
            if !quiet {
                eprintln!("wrote {}", path.display());
            }
        }
        None => print!("{contents}"),
    }
    Ok(())
}

fn config(cli: &Cli, path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = load_config(path).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = cli.seed {
        cfg.scenario.seed = seed;
    }
    if let Some(trials) = cli.trials {
        if trials == 0 {
            bail!("--trials must be at least 1");
        }
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Run { config: path } => {
            let cfg = config(&cli, path)?;
            if !cli.quiet {
                eprintln!(
                    "running {} trials of {} schemes on {} architectures",
                    cfg.trials,
                    cfg.schemes.len(),
                    cfg.architectures.len()
                );
            }
            let results = run_experiment(&cfg)?;
            let dir = out.unwrap_or(Path::new("results"));
            let written = write_results(&results, dir)?;
            if !cli.quiet {
                for report in compare_schemes(&results) {
                    print!("{}", report.to_text());
                }
                eprintln!("wrote {} files to {}", written.len(), dir.display());
            }
        }
        Command::Bound { config: path } => {
            let cfg = config(&cli, path)?;
            emit(out, "bound.csv", &bound_table(&cfg)?, cli.quiet)?;
        }
        Command::Beampattern { geometry, grid } => {
            let geom = read_geometry(&read(geometry)?, None)?;
            let spec = BeamGridSpec::parse(&read(grid)?)?;
            let w = focused_weights(&geom, &spec.focus_point(), spec.wavelength)?;
            let pattern = beam_pattern(&geom, &w, &spec)?;
            emit(out, "beam.csv", &pattern.to_csv(), cli.quiet)?;
        }
        Command::ConstructApv { scene } => {
            let scene = Scene::parse(&read(scene)?)?;
            let (geom, cert) = scene.construct()?;
            match out {
                Some(_) => {
                    emit(out, "geometry.txt", &write_geometry(&geom), cli.quiet)?;
                    emit(out, "certification.json", &format!("{}\n", cert.to_json()), cli.quiet)?;
                }
                None => print!("{}", construction_report(&geom, &cert)),
            }
            if !cert.pass {
                bail!("constructed geometry failed certification");
            }
        }
    }
    Ok(())
}
