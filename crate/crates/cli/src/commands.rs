use std::io::Write;
use std::path::Path;

use reprmetric::lab::{a_orthogonal_project, run_suite, CheckReport, Projector, SuiteConfig};
use reprmetric::preference::fit_preference;
use reprmetric::triplet::fit_triplet;
use reprmetric::{Error, GramBasis};
use serde::Serialize;

use crate::config::{RunConfig, Task};
use crate::data::{parse_float, read_items, read_pairs, read_triplets, reader, ItemTable};
use crate::error::CliError;
use crate::model::{LoadError, LoadedModel, ModelFile};

/// Differences this close to zero are reported as "no preference".
pub const TIE_TOL: f64 = 1e-12;

/// Headline numbers of a finished training run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub objective: f64,
    pub zero_one_train_error: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn build_basis(cfg: &RunConfig, items: &ItemTable) -> Result<GramBasis, CliError> {
    GramBasis::build(cfg.kernel, items.vectors.clone()).map_err(|e| {
        let context = match &e {
            Error::LinearDependence { index, .. } => format!(
                "{} (id `{}`)",
                cfg.items_csv.display(),
                items.ids[index - 1]
            ),
            _ => cfg.items_csv.display().to_string(),
        };
        CliError::core(context, e)
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    let wrap = |source| CliError::Write {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(wrap)?;
    }
    std::fs::write(path, text).map_err(wrap)
}

fn report(out: &mut dyn Write, summary: &TrainSummary, model_out: &Path) {
    // Losing a progress line to a closed pipe is not worth failing the run.
    let _ = writeln!(out, "objective            {}", summary.objective);
    let _ = writeln!(out, "zero_one_train_error {}", summary.zero_one_train_error);
    let _ = writeln!(
        out,
        "iterations           {}{}",
        summary.iterations,
        if summary.converged {
            " (converged)"
        } else {
            ""
        }
    );
    let _ = writeln!(out, "model                {}", model_out.display());
}

pub fn cmd_train_preference(config: &Path, out: &mut dyn Write) -> Result<TrainSummary, CliError> {
    let cfg = RunConfig::load(config, Task::Preference)?;
    let items = read_items(&cfg.items_csv)?;
    let pairs = read_pairs(&cfg.comparisons_csv, &items)?;
    let basis = build_basis(&cfg, &items)?;
    let fit = fit_preference(basis, &pairs, cfg.loss, cfg.lambda, &cfg.solver)
        .map_err(|e| CliError::core("training", e))?;
    let error = fit
        .model
        .zero_one_error(&pairs)
        .map_err(|e| CliError::core("evaluation", e))?;
    let file = ModelFile::from_preference(&fit, &items.ids, cfg.loss, error);
    write_file(&cfg.model_out, &file.to_json())?;
    let summary = TrainSummary {
        objective: fit.trace.last(),
        zero_one_train_error: error,
        iterations: fit.trace.iterations,
        converged: fit.trace.converged,
    };
    report(out, &summary, &cfg.model_out);
    Ok(summary)
}

pub fn cmd_train_triplet(config: &Path, out: &mut dyn Write) -> Result<TrainSummary, CliError> {
    let cfg = RunConfig::load(config, Task::Triplet)?;
    let items = read_items(&cfg.items_csv)?;
    let triplets = read_triplets(&cfg.comparisons_csv, &items)?;
    let basis = build_basis(&cfg, &items)?;
    let fit = fit_triplet(basis, &triplets, cfg.loss, cfg.mu, &cfg.solver)
        .map_err(|e| CliError::core("training", e))?;
    let error = fit
        .model
        .zero_one_error(&triplets)
        .map_err(|e| CliError::core("evaluation", e))?;
    let file = ModelFile::from_triplet(&fit, &items.ids, cfg.loss, cfg.mu, error);
    write_file(&cfg.model_out, &file.to_json())?;
    let summary = TrainSummary {
        objective: fit.trace.last(),
        zero_one_train_error: error,
        iterations: fit.trace.iterations,
        converged: fit.trace.converged,
    };
    report(out, &summary, &cfg.model_out);
    Ok(summary)
}

pub fn load_model(path: &Path) -> Result<(ModelFile, LoadedModel), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(path, format!("cannot read: {e}")))?;
    let file = ModelFile::from_json(&text).map_err(|m| CliError::input(path, m))?;
    let model = file.load().map_err(|e| match e {
        LoadError::Format(m) => CliError::input(path, m),
        // A stored model that no longer validates is malformed input, not a
        // training failure.
        LoadError::Core(e) => CliError::input(path, e.to_string()),
    })?;
    Ok((file, model))
}

fn training_items(file: &ModelFile) -> Result<ItemTable, String> {
    let (ids, items) = match file {
        ModelFile::Preference(r) => (&r.item_ids, &r.items),
        ModelFile::Triplet(r) => (&r.item_ids, &r.items),
    };
    ItemTable::new(ids.clone(), items.clone())
}

/// One predicted row per query: `query,delta,label`, with label 0 when
/// `|delta| <= TIE_TOL`.
///
/// Queries either name items (every header ends in `_id`; ids come from
/// `items_csv`, or from the model's training items when it is omitted) or
/// spell out the compared points as consecutive raw coordinates.
pub fn cmd_predict(
    model_path: &Path,
    items_csv: Option<&Path>,
    queries_csv: &Path,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let (file, model) = load_model(model_path)?;
    let (header, rows) = reader(queries_csv)?;
    let arity = model.arity();
    let dim = model.basis().item_dim();
    let by_id = header.iter().all(|h| h.ends_with("_id"));

    let table = if by_id {
        if header.len() != arity {
            return Err(CliError::input(
                queries_csv,
                format!("expected {arity} id columns, found {}", header.len()),
            ));
        }
        let table = match items_csv {
            Some(p) => read_items(p)?,
            None => training_items(&file).map_err(|m| CliError::input(model_path, m))?,
        };
        if table.dim() != dim {
            return Err(CliError::input(
                items_csv.unwrap_or(model_path),
                format!(
                    "items have dimension {}, the model expects {dim}",
                    table.dim()
                ),
            ));
        }
        Some(table)
    } else {
        if header.len() != arity * dim {
            return Err(CliError::input(
                queries_csv,
                format!(
                    "expected {} coordinate columns ({arity} points in R^{dim}), found {}",
                    arity * dim,
                    header.len()
                ),
            ));
        }
        None
    };

    let mut lines = String::from("query,delta,label\n");
    for (q, row) in rows.iter().enumerate() {
        let line = q + 2;
        let points: Vec<Vec<f64>> = match &table {
            Some(t) => row
                .iter()
                .map(|id| {
                    t.lookup(id).map(|i| t.vectors[i].clone()).ok_or_else(|| {
                        CliError::input(queries_csv, format!("row {line}: unknown item id `{id}`"))
                    })
                })
                .collect::<Result<_, _>>()?,
            None => {
                let values = row
                    .iter()
                    .map(|f| parse_float(queries_csv, line, f))
                    .collect::<Result<Vec<_>, _>>()?;
                values.chunks(dim).map(<[f64]>::to_vec).collect()
            }
        };
        let refs: Vec<&[f64]> = points.iter().map(Vec::as_slice).collect();
        let delta = model
            .delta(&refs)
            .map_err(|e| CliError::core(format!("{} row {line}", queries_csv.display()), e))?;
        let label = if delta.abs() <= TIE_TOL {
            0
        } else if delta > 0.0 {
            1
        } else {
            -1
        };
        lines.push_str(&format!("{q},{delta},{label}\n"));
    }
    out.write_all(lines.as_bytes())
        .map_err(|source| CliError::Write {
            path: "<stdout>".into(),
            source,
        })
}

#[derive(Debug, Serialize)]
struct VerifyReport<'a> {
    seed: u64,
    pass: bool,
    checks: &'a [CheckReport],
}

pub fn cmd_verify(seed: u64, out_path: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    cmd_verify_with(seed, out_path, a_orthogonal_project, out)
}

/// [`cmd_verify`] with a replaceable projection, so that a deliberately
/// wrong one can be shown to fail.
pub fn cmd_verify_with(
    seed: u64,
    out_path: &Path,
    projector: Projector,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let checks = run_suite(&SuiteConfig {
        seed,
        projector,
        ..SuiteConfig::default()
    });
    let pass = checks.iter().all(|c| c.pass);
    for c in &checks {
        let _ = writeln!(out, "{c}");
    }
    let mut json = serde_json::to_string_pretty(&VerifyReport {
        seed,
        pass,
        checks: &checks,
    })
    .expect("reports serialize");
    json.push('\n');
    write_file(out_path, &json)?;
    if pass {
        Ok(())
    } else {
        let failed: Vec<&str> = checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.check.as_str())
            .collect();
        Err(CliError::Verify(failed.join(", ")))
    }
}
