//! Run configuration: one flat TOML document.
//!
//! ```toml
//! items_csv = "items.csv"
//! pairs_csv = "pairs.csv"        # or triplets_csv for train-triplet
//! model_out = "model.json"
//! lambda = 0.1                   # ideal-point regularizer (pairs)
//! mu = 0.0                       # trace regularizer (triplets)
//! kernel = { kind = "rbf", gamma = 1.0 }
//! loss = { kind = "hinge", margin = 1.0 }
//! max_iters = 2000
//! step_size = 0.01
//! tol_grad = 1e-6
//! seed = 0
//! init = { kind = "identity_zero" }
//! ```
//!
//! Relative paths are resolved against the directory holding the config file.

use std::path::{Path, PathBuf};

use reprmetric::{Init, KernelSpec, LossSpec, SolverConfig};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    items_csv: Option<PathBuf>,
    pairs_csv: Option<PathBuf>,
    triplets_csv: Option<PathBuf>,
    model_out: Option<PathBuf>,
    #[serde(default = "default_lambda")]
    lambda: f64,
    #[serde(default)]
    mu: f64,
    #[serde(default)]
    kernel: KernelSpec,
    #[serde(default)]
    loss: LossSpec,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_step_size")]
    step_size: f64,
    #[serde(default = "default_tol_grad")]
    tol_grad: f64,
    #[serde(default)]
    seed: u64,
    #[serde(default = "default_init")]
    init: Init,
}

fn default_lambda() -> f64 {
    0.1
}

fn default_max_iters() -> usize {
    SolverConfig::default().max_iters
}

fn default_step_size() -> f64 {
    SolverConfig::default().step_size
}

fn default_tol_grad() -> f64 {
    SolverConfig::default().tol_grad
}

fn default_init() -> Init {
    SolverConfig::default().init
}

/// Which comparison file a command needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Preference,
    Triplet,
}

/// A validated configuration with absolute paths.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub items_csv: PathBuf,
    /// Pairs or triplets, depending on the task.
    pub comparisons_csv: PathBuf,
    pub model_out: PathBuf,
    pub lambda: f64,
    pub mu: f64,
    pub kernel: KernelSpec,
    pub loss: LossSpec,
    pub solver: SolverConfig,
}

impl RunConfig {
    pub fn load(path: &Path, task: Task) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(path, format!("cannot read: {e}")))?;
        Self::parse(&text, path, task)
    }

    /// Parses `text` as if it had been read from `path`.
    pub fn parse(text: &str, path: &Path, task: Task) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::config(path, e.message().to_string()))?;
        let base = path.parent().unwrap_or_else(|| Path::new(""));
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };
        let require = |p: Option<PathBuf>, key: &str| {
            p.map(resolve)
                .ok_or_else(|| CliError::config(path, format!("missing required key `{key}`")))
        };

        let (wanted, unwanted, other) = match task {
            Task::Preference => ("pairs_csv", &raw.triplets_csv, "triplets_csv"),
            Task::Triplet => ("triplets_csv", &raw.pairs_csv, "pairs_csv"),
        };
        if unwanted.is_some() {
            return Err(CliError::config(
                path,
                format!("`{other}` does not apply to this command (expected `{wanted}`)"),
            ));
        }
        let comparisons = match task {
            Task::Preference => raw.pairs_csv.clone(),
            Task::Triplet => raw.triplets_csv.clone(),
        };

        let cfg = RunConfig {
            items_csv: require(raw.items_csv, "items_csv")?,
            comparisons_csv: require(comparisons, wanted)?,
            model_out: require(raw.model_out, "model_out")?,
            lambda: raw.lambda,
            mu: raw.mu,
            kernel: raw.kernel,
            loss: raw.loss,
            solver: SolverConfig {
                max_iters: raw.max_iters,
                step_size: raw.step_size,
                tol_grad: raw.tol_grad,
                seed: raw.seed,
                init: raw.init,
            },
        };
        cfg.validate(path)?;
        Ok(cfg)
    }

    fn validate(&self, path: &Path) -> Result<(), CliError> {
        let invalid = |e: reprmetric::Error| CliError::config(path, e.to_string());
        for (key, value) in [("lambda", self.lambda), ("mu", self.mu)] {
            if !(value.is_finite() && value >= 0.0) {
                return Err(CliError::config(
                    path,
                    format!("`{key}` must be a non-negative number, got {value}"),
                ));
            }
        }
        self.kernel.validate().map_err(invalid)?;
        self.loss.validate().map_err(invalid)?;
        if !self.loss.is_differentiable() {
            return Err(CliError::config(
                path,
                "the zero_one loss cannot be trained; use hinge or logistic",
            ));
        }
        self.solver.validate().map_err(invalid)?;
        for file in [&self.items_csv, &self.comparisons_csv] {
            if !file.is_file() {
                return Err(CliError::config(
                    path,
                    format!("file not found: {}", file.display()),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_inputs(dir: &Path) {
        for name in ["items.csv", "pairs.csv", "triplets.csv"] {
            std::fs::write(dir.join(name), "x\n").unwrap();
        }
    }

    #[test]
    fn defaults_and_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        write_inputs(dir.path());
        let path = dir.path().join("run.toml");
        let text = r#"
            items_csv = "items.csv"
            pairs_csv = "pairs.csv"
            model_out = "out/model.json"
        "#;
        let cfg = RunConfig::parse(text, &path, Task::Preference).unwrap();
        assert_eq!(cfg.items_csv, dir.path().join("items.csv"));
        assert_eq!(cfg.model_out, dir.path().join("out/model.json"));
        assert_eq!(cfg.lambda, 0.1);
        assert_eq!(cfg.mu, 0.0);
        assert_eq!(cfg.kernel, KernelSpec::default());
        assert_eq!(cfg.loss, LossSpec::default());
        assert_eq!(cfg.solver, SolverConfig::default());
    }

    #[test]
    fn full_document() {
        let dir = tempfile::tempdir().unwrap();
        write_inputs(dir.path());
        let path = dir.path().join("run.toml");
        let text = r#"
            items_csv = "items.csv"
            triplets_csv = "triplets.csv"
            model_out = "model.json"
            mu = 0.5
            kernel = { kind = "polynomial", degree = 3, coef0 = 0.5 }
            loss = { kind = "logistic" }
            max_iters = 10
            step_size = 0.5
            tol_grad = 1e-3
            seed = 7
            init = { kind = "random", scale = 0.25 }
        "#;
        let cfg = RunConfig::parse(text, &path, Task::Triplet).unwrap();
        assert_eq!(cfg.mu, 0.5);
        assert_eq!(
            cfg.kernel,
            KernelSpec::Polynomial {
                degree: 3,
                coef0: 0.5
            }
        );
        assert_eq!(cfg.loss, LossSpec::Logistic);
        assert_eq!(cfg.solver.init, Init::Random { scale: 0.25 });
        assert_eq!(cfg.solver.seed, 7);
    }

    #[test]
    fn rejections() {
        let dir = tempfile::tempdir().unwrap();
        write_inputs(dir.path());
        let path = dir.path().join("run.toml");
        let base = "items_csv = \"items.csv\"\nmodel_out = \"m.json\"\n";
        let cases = [
            format!("{base}pairs_csv = \"pairs.csv\"\nlambda = -1"),
            format!("{base}pairs_csv = \"pairs.csv\"\nunknown_key = 1"),
            format!("{base}pairs_csv = \"pairs.csv\"\nloss = {{ kind = \"zero_one\" }}"),
            format!("{base}pairs_csv = \"pairs.csv\"\nkernel = {{ kind = \"rbf\", gamma = 0 }}"),
            format!("{base}pairs_csv = \"missing.csv\""),
            format!("{base}triplets_csv = \"triplets.csv\""),
            base.to_string(),
            "pairs_csv = \"pairs.csv\"\nmodel_out = \"m.json\"".to_string(),
        ];
        for text in &cases {
            let err = RunConfig::parse(text, &path, Task::Preference).unwrap_err();
            assert_eq!(err.exit_code(), 1, "{text}");
        }
    }
}
