use std::fmt::Write as _;
use std::path::Path;

use fcmsc_core::MetricTriple;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, SweepCell};
use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub nmi: f64,
    pub acc: f64,
    pub fscore: f64,
}

impl From<MetricTriple> for Metrics {
    fn from(m: MetricTriple) -> Self {
        Self {
            nmi: m.nmi,
            acc: m.acc,
            fscore: m.fscore,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialDiagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub final_residuals: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TrialOutcome {
    Ok {
        /// Absent when the data carries no labels.
        metrics: Option<Metrics>,
        diagnostics: TrialDiagnostics,
        /// View selected by LRR_BSV.
        #[serde(skip_serializing_if = "Option::is_none")]
        best_view: Option<usize>,
        labels: Vec<usize>,
    },
    Failed {
        error: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub seed: u64,
    pub outcome: TrialOutcome,
    pub seconds: f64,
}

impl TrialRecord {
    pub fn metrics(&self) -> Option<Metrics> {
        match &self.outcome {
            TrialOutcome::Ok { metrics, .. } => *metrics,
            TrialOutcome::Failed { .. } => None,
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self.outcome, TrialOutcome::Ok { .. })
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Some(Self {
            mean,
            std: var.sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Number of trials the statistics are taken over.
    pub count: usize,
    pub nmi: MeanStd,
    pub acc: MeanStd,
    pub fscore: MeanStd,
}

impl Summary {
    pub fn of(metrics: &[Metrics]) -> Option<Self> {
        let pick = |f: fn(&Metrics) -> f64| metrics.iter().map(f).collect::<Vec<_>>();
        Some(Self {
            count: metrics.len(),
            nmi: MeanStd::of(&pick(|m| m.nmi))?,
            acc: MeanStd::of(&pick(|m| m.acc))?,
            fscore: MeanStd::of(&pick(|m| m.fscore))?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: String,
    pub trials: Vec<TrialRecord>,
    pub failures: usize,
    /// Over the successful, labelled trials.
    pub summary: Option<Summary>,
    pub mean_iterations: Option<f64>,
}

impl MethodReport {
    pub fn new(method: String, trials: Vec<TrialRecord>) -> Self {
        let failures = trials.iter().filter(|t| !t.is_ok()).count();
        let metrics: Vec<Metrics> = trials.iter().filter_map(TrialRecord::metrics).collect();
        let iters: Vec<f64> = trials
            .iter()
            .filter_map(|t| match &t.outcome {
                TrialOutcome::Ok { diagnostics, .. } => Some(diagnostics.iterations as f64),
                TrialOutcome::Failed { .. } => None,
            })
            .collect();
        Self {
            method,
            failures,
            summary: Summary::of(&metrics),
            mean_iterations: MeanStd::of(&iters).map(|m| m.mean),
            trials,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_cell: Option<SweepCell>,
    pub trial_seeds: Vec<u64>,
    pub methods: Vec<MethodReport>,
    pub total_seconds: f64,
}

impl ExperimentReport {
    pub fn method(&self, name: &str) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == name)
    }

    /// The report with every wall-clock field zeroed, for comparisons.
    pub fn without_timings(&self) -> Self {
        let mut out = self.clone();
        out.total_seconds = 0.0;
        for m in &mut out.methods {
            for t in &mut m.trials {
                t.seconds = 0.0;
            }
        }
        out
    }

    pub fn all_failed(&self) -> bool {
        self.methods
            .iter()
            .all(|m| m.failures == m.trials.len())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        std::fs::write(path, self.to_json()).map_err(|e| CliError::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Plain-text `mean(std)` table, one row per method.
    pub fn table(&self) -> String {
        let mut out = String::new();
        if let Some(cell) = &self.sweep_cell {
            let _ = writeln!(out, "sweep cell {}", cell.label());
        }
        let _ = writeln!(
            out,
            "{:<9} {:>16} {:>16} {:>16} {:>7} {:>6}",
            "method", "NMI", "ACC", "F-score", "iters", "failed"
        );
        for m in &self.methods {
            let cell = |s: Option<MeanStd>| match s {
                Some(s) => format!("{:.4}({:.4})", s.mean, s.std),
                None => "-".into(),
            };
            let _ = writeln!(
                out,
                "{:<9} {:>16} {:>16} {:>16} {:>7} {:>6}",
                m.method,
                cell(m.summary.map(|s| s.nmi)),
                cell(m.summary.map(|s| s.acc)),
                cell(m.summary.map(|s| s.fscore)),
                m.mean_iterations.map_or("-".into(), |i| format!("{i:.1}")),
                format!("{}/{}", m.failures, m.trials.len()),
            );
        }
        let _ = writeln!(
            out,
            "{} trial(s), {:.2}s",
            self.trial_seeds.len(),
            self.total_seconds
        );
        out
    }
}
