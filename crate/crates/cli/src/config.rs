//! Experiment configuration, read from TOML.
//!
//! ```toml
//! methods = ["LRR_BSV", "FCMSC", "grFCMSC"]
//! clusters = 3
//! trials = 30          # default 30
//! base_seed = 0
//! threads = 4          # trials run concurrently; results do not depend on it
//! output_dir = "out"
//!
//! [data]
//! source = "synthetic"
//! n_per_cluster = 30
//! dims = [20, 20, 20]
//! subspace_rank = 3
//! noise = 0.05
//! cluster_corrupt = 0.2
//! sample_corrupt = 0.0
//!
//! [solver]             # shared by all methods
//! lambda1 = 10.0
//! lambda2 = 3.0
//!
//! [method.grFCMSC]     # per-method overrides
//! lambda3 = 0.1
//!
//! [graph]
//! k = 5
//! sigma = 0.5          # omit for the median-distance bandwidth
//! ```
//!
//! File data uses `source = "files"` with `views = ["a.csv", ...]`, an
//! optional `labels` path and `header = true|false`. Relative paths are
//! resolved against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use fcmsc_core::dataset::SyntheticSpec;
use fcmsc_core::graph::Bandwidth;
use fcmsc_core::pipeline::{Method, MethodParams};
use fcmsc_core::SolverConfig;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const DEFAULT_TRIALS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum DataSource {
    Files {
        views: Vec<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        labels: Option<PathBuf>,
        #[serde(default)]
        header: bool,
    },
    Synthetic(SyntheticSettings),
}

/// Generator parameters; the cluster count comes from the top-level
/// `clusters` and the seed from the trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSettings {
    pub n_per_cluster: usize,
    pub dims: Vec<usize>,
    #[serde(default = "default_rank")]
    pub subspace_rank: usize,
    #[serde(default)]
    pub noise: f64,
    #[serde(default)]
    pub cluster_corrupt: f64,
    #[serde(default)]
    pub sample_corrupt: f64,
}

fn default_rank() -> usize {
    3
}

impl SyntheticSettings {
    pub fn spec(&self, clusters: usize, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            clusters,
            n_per_cluster: self.n_per_cluster,
            dims: self.dims.clone(),
            subspace_rank: self.subspace_rank,
            noise_level: self.noise,
            cluster_corruption_fraction: self.cluster_corrupt,
            sample_corruption_fraction: self.sample_corrupt,
            seed,
        }
    }
}

/// Solver parameters with every field present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    pub z_init_scale: f64,
    /// Nuclear-norm weight of the LRR baselines.
    pub lrr_lambda: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let d = SolverConfig::default();
        Self {
            lambda1: d.lambda1,
            lambda2: d.lambda2,
            lambda3: d.lambda3,
            mu0: d.mu0,
            mu_max: d.mu_max,
            rho: d.rho,
            epsilon: d.epsilon,
            max_iter: d.max_iter,
            z_init_scale: d.z_init_scale,
            lrr_lambda: 1.0,
        }
    }
}

impl SolverSettings {
    pub fn solver_config(&self, seed: u64) -> SolverConfig {
        SolverConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            mu0: self.mu0,
            mu_max: self.mu_max,
            rho: self.rho,
            epsilon: self.epsilon,
            max_iter: self.max_iter,
            seed,
            z_init_scale: self.z_init_scale,
        }
    }

    fn validate(&self, context: &str) -> Result<()> {
        self.solver_config(0)
            .validate()
            .map_err(|e| CliError::Config(format!("{context}: {e}")))?;
        if !(self.lrr_lambda > 0.0) || !self.lrr_lambda.is_finite() {
            return Err(CliError::Config(format!(
                "{context}: lrr_lambda must be positive, got {}",
                self.lrr_lambda
            )));
        }
        Ok(())
    }
}

/// Partial solver settings layered over [`SolverSettings`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda3: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_init_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lrr_lambda: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, base: &SolverSettings) -> SolverSettings {
        SolverSettings {
            lambda1: self.lambda1.unwrap_or(base.lambda1),
            lambda2: self.lambda2.unwrap_or(base.lambda2),
            lambda3: self.lambda3.unwrap_or(base.lambda3),
            mu0: self.mu0.unwrap_or(base.mu0),
            mu_max: self.mu_max.unwrap_or(base.mu_max),
            rho: self.rho.unwrap_or(base.rho),
            epsilon: self.epsilon.unwrap_or(base.epsilon),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            z_init_scale: self.z_init_scale.unwrap_or(base.z_init_scale),
            lrr_lambda: self.lrr_lambda.unwrap_or(base.lrr_lambda),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphSettings {
    pub k: usize,
    /// Fixed Gaussian bandwidth; absent means the median k-NN distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

impl Default for GraphSettings {
    fn default() -> Self {
        Self {
            k: fcmsc_core::graph::DEFAULT_NEIGHBORS,
            sigma: None,
        }
    }
}

impl GraphSettings {
    pub fn bandwidth(&self) -> Bandwidth {
        self.sigma.map_or(Bandwidth::Auto, Bandwidth::Fixed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataSource,
    #[serde(with = "method_list")]
    pub methods: Vec<Method>,
    pub clusters: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_threads")]
    pub threads: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub solver: SolverSettings,
    /// Per-method overrides keyed by method name.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub method: BTreeMap<String, SolverOverrides>,
    #[serde(default)]
    pub graph: GraphSettings,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

fn default_threads() -> usize {
    1
}

mod method_list {
    use fcmsc_core::pipeline::Method;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(methods: &[Method], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(methods.iter().map(|m| m.name()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Method>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(D::Error::custom))
            .collect()
    }
}

impl ExperimentConfig {
    /// A config with default solver and graph settings.
    pub fn new(data: DataSource, methods: Vec<Method>, clusters: usize) -> Self {
        Self {
            data,
            methods,
            clusters,
            trials: DEFAULT_TRIALS,
            base_seed: 0,
            threads: 1,
            output_dir: None,
            solver: SolverSettings::default(),
            method: BTreeMap::new(),
            graph: GraphSettings::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and validates a config file; relative data paths are resolved
    /// against the file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ConfigIo {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        if let DataSource::Files { views, labels, .. } = &mut cfg.data {
            for v in views.iter_mut() {
                *v = base.join(&*v);
            }
            if let Some(l) = labels {
                *l = base.join(&*l);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CliError::Config(msg));
        if self.trials < 1 {
            return fail("trials must be at least 1".into());
        }
        if self.methods.is_empty() {
            return fail("method list is empty".into());
        }
        if self.clusters < 2 {
            return fail(format!("clusters must be at least 2, got {}", self.clusters));
        }
        if self.threads < 1 {
            return fail("threads must be at least 1".into());
        }
        if self.graph.k < 1 {
            return fail("graph.k must be at least 1".into());
        }
        if let Some(s) = self.graph.sigma {
            if !(s > 0.0) || !s.is_finite() {
                return fail(format!("graph.sigma must be positive, got {s}"));
            }
        }
        self.solver.validate("solver")?;
        for (name, o) in &self.method {
            let method: Method = name
                .parse()
                .map_err(|_| CliError::Config(format!("[method.{name}]: unknown method")))?;
            o.apply(&self.solver).validate(&format!("method.{}", method.name()))?;
        }
        match &self.data {
            DataSource::Files { views, .. } if views.is_empty() => {
                return fail("data.views is empty".into());
            }
            DataSource::Synthetic(s) => {
                s.spec(self.clusters, 0)
                    .validate()
                    .map_err(|e| CliError::Config(format!("data: {e}")))?;
            }
            DataSource::Files { .. } => {}
        }
        Ok(())
    }

    /// Effective solver settings of one method.
    pub fn settings_for(&self, method: Method) -> SolverSettings {
        self.method
            .iter()
            .find(|(name, _)| name.parse::<Method>().ok() == Some(method))
            .map_or_else(|| self.solver.clone(), |(_, o)| o.apply(&self.solver))
    }

    pub fn method_params(&self, method: Method, seed: u64) -> MethodParams {
        let s = self.settings_for(method);
        MethodParams {
            solver: s.solver_config(seed),
            lrr_lambda: s.lrr_lambda,
            knn: self.graph.k,
            sigma: self.graph.bandwidth(),
            clusters: self.clusters,
            seed,
        }
    }

    /// Seed of trial `t`.
    pub fn trial_seed(&self, t: usize) -> u64 {
        self.base_seed.wrapping_add(t as u64)
    }
}

/// λ grids for a parameter sweep; an empty grid keeps the configured value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
    pub lambda3: Vec<f64>,
}

/// One point of a sweep. `None` leaves the configured value in place.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda3: Option<f64>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.lambda1.is_empty() && self.lambda2.is_empty() && self.lambda3.is_empty()
    }

    /// Parses one `--sweep` argument such as `lambda2=0.1,1,10`.
    pub fn add_arg(&mut self, arg: &str) -> Result<()> {
        let (key, values) = arg
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("sweep {arg:?} is not NAME=v1,v2,...")))?;
        let parsed: Vec<f64> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("sweep value {v:?} is not a number")))
            })
            .collect::<Result<_>>()?;
        let slot = match key.trim() {
            "lambda1" => &mut self.lambda1,
            "lambda2" => &mut self.lambda2,
            "lambda3" => &mut self.lambda3,
            other => {
                return Err(CliError::Config(format!(
                    "cannot sweep {other:?}; use lambda1, lambda2 or lambda3"
                )))
            }
        };
        *slot = parsed;
        Ok(())
    }

    /// Cartesian product in lambda1-major order.
    pub fn cells(&self) -> Vec<SweepCell> {
        fn axis(v: &[f64]) -> Vec<Option<f64>> {
            if v.is_empty() {
                vec![None]
            } else {
                v.iter().copied().map(Some).collect()
            }
        }
        let mut out = Vec::new();
        for &lambda1 in &axis(&self.lambda1) {
            for &lambda2 in &axis(&self.lambda2) {
                for &lambda3 in &axis(&self.lambda3) {
                    out.push(SweepCell {
                        lambda1,
                        lambda2,
                        lambda3,
                    });
                }
            }
        }
        out
    }
}

impl SweepCell {
    /// The config with this cell's values forced on every method.
    pub fn apply(&self, config: &ExperimentConfig) -> ExperimentConfig {
        let forced = SolverOverrides {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            lambda3: self.lambda3,
            ..Default::default()
        };
        let mut out = config.clone();
        out.solver = forced.apply(&out.solver);
        for o in out.method.values_mut() {
            o.lambda1 = self.lambda1.or(o.lambda1);
            o.lambda2 = self.lambda2.or(o.lambda2);
            o.lambda3 = self.lambda3.or(o.lambda3);
        }
        out
    }

    pub fn label(&self) -> String {
        let parts: Vec<String> = [("l1", self.lambda1), ("l2", self.lambda2), ("l3", self.lambda3)]
            .into_iter()
            .filter_map(|(k, v)| v.map(|v| format!("{k}={v}")))
            .collect();
        if parts.is_empty() {
            "base".into()
        } else {
            parts.join("_")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        methods = ["FCMSC", "lrr_bsv"]
        clusters = 3
        [data]
        source = "synthetic"
        n_per_cluster = 10
        dims = [8, 8]
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = ExperimentConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(cfg.trials, DEFAULT_TRIALS);
        assert_eq!(cfg.methods, vec![Method::Fcmsc, Method::LrrBsv]);
        assert_eq!(cfg.solver, SolverSettings::default());
        assert_eq!(cfg.graph.k, 5);
        assert_eq!(cfg.graph.bandwidth(), Bandwidth::Auto);
        match &cfg.data {
            DataSource::Synthetic(s) => assert_eq!(s.subspace_rank, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn method_overrides_layer_over_shared_settings() {
        let text = format!("{MINIMAL}\n[solver]\nlambda2 = 5.0\n[method.FCMSC]\nlambda1 = 2.0\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let f = cfg.settings_for(Method::Fcmsc);
        assert_eq!((f.lambda1, f.lambda2), (2.0, 5.0));
        let l = cfg.settings_for(Method::LrrBsv);
        assert_eq!((l.lambda1, l.lambda2), (SolverSettings::default().lambda1, 5.0));
        let p = cfg.method_params(Method::Fcmsc, 17);
        assert_eq!((p.seed, p.solver.seed, p.clusters), (17, 17, 3));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cases = [
            MINIMAL.replace("clusters = 3", "clusters = 1"),
            MINIMAL.replace(r#"["FCMSC", "lrr_bsv"]"#, "[]"),
            MINIMAL.replace(r#""FCMSC""#, r#""KMEANS""#),
            format!("trials = 0\n{MINIMAL}"),
            format!("{MINIMAL}\n[solver]\nrho = 0.5\n"),
            format!("{MINIMAL}\n[method.nope]\nlambda1 = 1.0\n"),
            format!("{MINIMAL}\nsubspace_rank = 9\n"),
            format!("{MINIMAL}\n[graph]\nsigma = -1.0\n"),
            format!("bogus_key = 1\n{MINIMAL}"),
        ];
        for text in cases {
            assert!(
                matches!(ExperimentConfig::from_toml(&text), Err(CliError::Config(_))),
                "accepted:\n{text}"
            );
        }
    }

    #[test]
    fn relative_file_paths_resolve_against_the_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.toml");
        std::fs::write(
            &path,
            "methods = [\"FCMSC\"]\nclusters = 2\n[data]\nsource = \"files\"\nviews = [\"v1.csv\"]\nlabels = \"y.csv\"\n",
        )
        .unwrap();
        let cfg = ExperimentConfig::from_file(&path).unwrap();
        match cfg.data {
            DataSource::Files { views, labels, header } => {
                assert_eq!(views, vec![dir.path().join("v1.csv")]);
                assert_eq!(labels, Some(dir.path().join("y.csv")));
                assert!(!header);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_grid_enumerates_cells() {
        let mut g = SweepGrid::default();
        assert_eq!(g.cells(), vec![SweepCell::default()]);
        g.add_arg("lambda1=1,10").unwrap();
        g.add_arg("lambda3=0,0.1,1").unwrap();
        let cells = g.cells();
        assert_eq!(cells.len(), 6);
        assert_eq!(cells[0].lambda1, Some(1.0));
        assert_eq!(cells[0].lambda3, Some(0.0));
        assert_eq!(cells[5].label(), "l1=10_l3=1");
        assert!(g.add_arg("rho=2").is_err());
        assert!(g.add_arg("lambda2").is_err());
        assert!(g.add_arg("lambda2=a").is_err());
    }

    #[test]
    fn sweep_cell_wins_over_method_overrides() {
        let text = format!("{MINIMAL}\n[method.FCMSC]\nlambda2 = 7.0\nlambda1 = 4.0\n");
        let cfg = ExperimentConfig::from_toml(&text).unwrap();
        let cell = SweepCell { lambda2: Some(0.5), ..Default::default() };
        let swept = cell.apply(&cfg);
        let f = swept.settings_for(Method::Fcmsc);
        assert_eq!((f.lambda1, f.lambda2), (4.0, 0.5));
        assert_eq!(swept.settings_for(Method::LrrBsv).lambda2, 0.5);
    }
}
