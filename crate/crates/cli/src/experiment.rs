use std::borrow::Cow;
use std::time::Instant;

use fcmsc_core::dataset::{generate_synthetic, load_views, CsvOptions};
use fcmsc_core::pipeline::{run_method, Method};
use fcmsc_core::{MultiViewDataset, SolverState};
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig, SweepGrid};
use crate::error::{CliError, Result};
use crate::report::{ExperimentReport, MethodReport, TrialDiagnostics, TrialOutcome, TrialRecord};

pub const REPORT_FILE: &str = "report.json";

/// Extra outputs of a run beyond the report.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep the final solver state of every FCMSC-type trial.
    pub keep_states: bool,
}

#[derive(Debug, Clone)]
pub struct KeptState {
    pub method: Method,
    pub trial: usize,
    pub seed: u64,
    pub state: SolverState,
}

#[derive(Debug, Clone)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub states: Vec<KeptState>,
}

/// Runs every method on every trial, writes `report.json` into the output
/// directory when one is configured, and returns the report.
///
/// A method failing on a trial is recorded in the report; the run only
/// fails as a whole when the data cannot be loaded or every method fails on
/// every trial.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    let run = run_experiment_with(config, RunOptions::default())?;
    if let Some(dir) = &config.output_dir {
        run.report.write_json(&dir.join(REPORT_FILE))?;
    }
    Ok(run.report)
}

pub fn run_experiment_with(config: &ExperimentConfig, options: RunOptions) -> Result<ExperimentRun> {
    config.validate()?;
    let start = Instant::now();
    let fixed = match &config.data {
        DataSource::Files {
            views,
            labels,
            header,
        } => Some(load_views(
            views,
            labels.as_deref(),
            CsvOptions { header: *header },
        )?),
        DataSource::Synthetic(_) => None,
    };
    if let Some(ds) = &fixed {
        if ds.n_samples() < config.clusters {
            return Err(CliError::Config(format!(
                "{} clusters requested for {} samples",
                config.clusters,
                ds.n_samples()
            )));
        }
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let per_trial: Vec<Vec<(TrialRecord, Option<SolverState>)>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(config, fixed.as_ref(), t, options))
            .collect()
    });

    let mut methods: Vec<Vec<TrialRecord>> = vec![Vec::with_capacity(config.trials); config.methods.len()];
    let mut states = Vec::new();
    for (t, row) in per_trial.into_iter().enumerate() {
        for (k, (record, state)) in row.into_iter().enumerate() {
            if let Some(state) = state {
                states.push(KeptState {
                    method: config.methods[k],
                    trial: t,
                    seed: record.seed,
                    state,
                });
            }
            methods[k].push(record);
        }
    }
    let report = ExperimentReport {
        config: config.clone(),
        sweep_cell: None,
        trial_seeds: (0..config.trials).map(|t| config.trial_seed(t)).collect(),
        methods: config
            .methods
            .iter()
            .zip(methods)
            .map(|(m, trials)| MethodReport::new(m.name().to_string(), trials))
            .collect(),
        total_seconds: start.elapsed().as_secs_f64(),
    };
    if report.all_failed() {
        return Err(CliError::AllFailed);
    }
    Ok(ExperimentRun { report, states })
}

fn trial_data<'a>(
    config: &ExperimentConfig,
    fixed: Option<&'a MultiViewDataset>,
    seed: u64,
) -> fcmsc_core::Result<Cow<'a, MultiViewDataset>> {
    match (fixed, &config.data) {
        (Some(ds), _) => Ok(Cow::Borrowed(ds)),
        (None, DataSource::Synthetic(s)) => {
            generate_synthetic(&s.spec(config.clusters, seed)).map(Cow::Owned)
        }
        (None, DataSource::Files { .. }) => unreachable!("file data is loaded up front"),
    }
}

fn run_trial(
    config: &ExperimentConfig,
    fixed: Option<&MultiViewDataset>,
    trial: usize,
    options: RunOptions,
) -> Vec<(TrialRecord, Option<SolverState>)> {
    let seed = config.trial_seed(trial);
    let data = trial_data(config, fixed, seed);
    config
        .methods
        .iter()
        .map(|&method| {
            let start = Instant::now();
            let result = data
                .as_ref()
                .map_err(|e| e.to_string())
                .and_then(|ds| {
                    run_method(ds, method, &config.method_params(method, seed)).map_err(|e| e.to_string())
                });
            let (outcome, state) = match result {
                Ok(out) => (
                    TrialOutcome::Ok {
                        metrics: out.metrics.map(Into::into),
                        diagnostics: TrialDiagnostics {
                            iterations: out.diagnostics.iterations,
                            converged: out.diagnostics.converged,
                            final_residuals: out.diagnostics.final_residuals,
                        },
                        best_view: out.best_view,
                        labels: out.labels,
                    },
                    out.state.filter(|_| options.keep_states),
                ),
                Err(error) => (TrialOutcome::Failed { error }, None),
            };
            (
                TrialRecord {
                    trial,
                    seed,
                    outcome,
                    seconds: start.elapsed().as_secs_f64(),
                },
                state,
            )
        })
        .collect()
}

/// One report per sweep cell, in lambda1-major order. Reports are written
/// as `report_<cell>.json` when an output directory is configured.
pub fn run_sweep(config: &ExperimentConfig, grid: &SweepGrid) -> Result<Vec<ExperimentReport>> {
    grid.cells()
        .into_iter()
        .map(|cell| {
            let cell_config = cell.apply(config);
            let mut report = run_experiment_with(&cell_config, RunOptions::default())?.report;
            report.sweep_cell = Some(cell);
            if let Some(dir) = &config.output_dir {
                report.write_json(&dir.join(format!("report_{}.json", cell.label())))?;
            }
            Ok(report)
        })
        .collect()
}
