use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcmsc_core::dataset::{generate_synthetic, write_labels_csv, write_matrix_csv, SyntheticSpec};
use fcmsc_cli::{
    export_matrices, run_experiment_with, run_sweep, CliError, ExperimentConfig, MatrixKind,
    Result, RunOptions, SavedState, SweepGrid, EXIT_OK,
};

#[derive(Debug, Parser)]
#[command(name = "fcmsc", version, about = "Multi-view subspace clustering experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment described by a TOML config.
    Run(RunArgs),
    /// Write matrices of a saved solver state as CSV.
    Export(ExportArgs),
    /// Generate a synthetic multi-view dataset as CSV files.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial t uses seed + t.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of trials run concurrently.
    #[arg(long)]
    threads: Option<usize>,
    /// λ grid, e.g. `--sweep lambda1=0.1,1,10`; repeatable.
    #[arg(long, value_name = "NAME=V1,V2,...")]
    sweep: Vec<String>,
    /// Also write the final state of every FCMSC/grFCMSC trial to
    /// `<out>/states/`.
    #[arg(long)]
    save_state: bool,
    /// Suppress the summary table.
    #[arg(long, short)]
    quiet: bool,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// State file written by `run --save-state`.
    #[arg(long)]
    state: PathBuf,
    /// Comma-separated subset of Z, C, E_x, E_z, affinity.
    #[arg(long, default_value = "Z,C,E_x,E_z,affinity")]
    which: String,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// Number of clusters.
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n_per_cluster: usize,
    #[arg(long, default_value_t = 3)]
    views: usize,
    /// One dimension for every view, or a comma-separated list per view.
    #[arg(long, default_value = "20")]
    dims: String,
    #[arg(long, default_value_t = 3)]
    rank: usize,
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[arg(long, default_value_t = 0.0)]
    cluster_corrupt: f64,
    #[arg(long, default_value_t = 0.0)]
    sample_corrupt: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Export(args) => export(args),
        Command::Synth(args) => synth(args),
    };
    match result {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("fcmsc: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(args: RunArgs) -> Result<()> {
    let mut config = ExperimentConfig::from_file(&args.config)?;
    if let Some(t) = args.trials {
        config.trials = t;
    }
    if let Some(s) = args.seed {
        config.base_seed = s;
    }
    if let Some(o) = args.out {
        config.output_dir = Some(o);
    }
    if let Some(t) = args.threads {
        config.threads = t;
    }
    config.validate()?;

    let mut grid = SweepGrid::default();
    for s in &args.sweep {
        grid.add_arg(s)?;
    }
    if !grid.is_empty() {
        for report in run_sweep(&config, &grid)? {
            if !args.quiet {
                println!("{}", report.table());
            }
        }
        return Ok(());
    }

    let run = run_experiment_with(&config, RunOptions { keep_states: args.save_state })?;
    if let Some(dir) = &config.output_dir {
        run.report.write_json(&dir.join(fcmsc_cli::experiment::REPORT_FILE))?;
        for kept in &run.states {
            let name = format!("{}_trial{}.json", kept.method.name(), kept.trial);
            SavedState::new(kept.method.name(), kept.trial, kept.seed, &kept.state)
                .write(&dir.join("states").join(name))?;
        }
    } else if args.save_state {
        return Err(CliError::Config("--save-state needs an output directory".into()));
    }
    if !args.quiet {
        print!("{}", run.report.table());
    }
    Ok(())
}

fn export(args: ExportArgs) -> Result<()> {
    let which = MatrixKind::parse_list(&args.which)?;
    let state = SavedState::read(&args.state)?.to_solver_state()?;
    for path in export_matrices(&state, &which, &args.out)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn parse_dims(text: &str, views: usize) -> Result<Vec<usize>> {
    let dims: Vec<usize> = text
        .split(',')
        .map(|d| {
            d.trim()
                .parse()
                .map_err(|_| CliError::Config(format!("bad dimension {d:?}")))
        })
        .collect::<Result<_>>()?;
    match dims.len() {
        1 => Ok(vec![dims[0]; views]),
        n if n == views => Ok(dims),
        n => Err(CliError::Config(format!("{n} dimensions given for {views} views"))),
    }
}

fn synth(args: SynthArgs) -> Result<()> {
    if args.views == 0 {
        return Err(CliError::Config("--views must be at least 1".into()));
    }
    let spec = SyntheticSpec {
        clusters: args.m,
        n_per_cluster: args.n_per_cluster,
        dims: parse_dims(&args.dims, args.views)?,
        subspace_rank: args.rank,
        noise_level: args.noise,
        cluster_corruption_fraction: args.cluster_corrupt,
        sample_corruption_fraction: args.sample_corrupt,
        seed: args.seed,
    };
    spec.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let ds = generate_synthetic(&spec)?;
    std::fs::create_dir_all(&args.out).map_err(|e| io_err(&args.out, e))?;
    for (i, v) in ds.views().iter().enumerate() {
        let path = args.out.join(format!("view{}.csv", i + 1));
        write_matrix_csv(&path, v)?;
        println!("{}", path.display());
    }
    let labels = args.out.join("labels.csv");
    write_labels_csv(&labels, ds.labels().expect("synthetic data is labelled"))?;
    println!("{}", labels.display());
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> CliError {
    CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}
