use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use spar_core::ensemble::{Averaging, SelectionRule, SparConfig};
use spar_core::experiment::{self, ExperimentSpec, GridCell};
use spar_core::io::{self, DatasetMetadata};
use spar_core::metrics;
use spar_core::rng::stream;
use spar_core::screening::{ScreeningConfig, ScreeningSelector};
use spar_core::sim::{self, SimSpec};
use spar_core::{spar_fit, Family, PredictKind, SparError};

use crate::{AveragingArg, BenchmarkArgs, EvaluateArgs, FitArgs, PredictArgs, ScreeningArg, SimulateArgs, ThresholdRule};

pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }
}

impl From<SparError> for CliError {
    fn from(e: SparError) -> Self {
        let code = match e {
            SparError::Parameter(_) => 2,
            SparError::Numerical(_) | SparError::SignalAbsent => 4,
            _ => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        SparError::from(e).into()
    }
}

type CliResult = Result<(), CliError>;

fn print_json<T: Serialize>(value: &T, file: Option<&Path>) -> CliResult {
    let text = serde_json::to_string_pretty(value).map_err(SparError::from)?;
    println!("{text}");
    if let Some(path) = file {
        fs::write(path, format!("{text}\n"))?;
    }
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> CliResult {
    let spec = SimSpec {
        n_test: a.n_test,
        signal_c: a.signal,
        target_mean: a.target_mean,
        ..SimSpec::new(a.family, a.n, a.p, a.sparsity, a.covariance)
    };
    let sim = sim::simulate(&spec, &mut stream(a.seed, 0))?;
    fs::create_dir_all(&a.out)?;
    io::write_dataset(&a.out.join("train.csv"), &sim.train.x, Some(&sim.train.y), Some(&sim.train.eta))?;
    if let Some(test) = &sim.test {
        io::write_dataset(&a.out.join("test.csv"), &test.x, Some(&test.y), Some(&test.eta))?;
    }
    let meta = DatasetMetadata::from_simulation(&sim, a.seed);
    io::write_json(&a.out.join("metadata.json"), &meta)?;
    println!("beta0 = {:?}", meta.beta0);
    println!("active = {}", meta.active_count);
    Ok(())
}

fn fit_config(a: &FitArgs) -> Result<SparConfig, CliError> {
    let selector = match a.screening {
        ScreeningArg::Dev => ScreeningSelector::DevianceRatio { threshold: a.dev_threshold },
        ScreeningArg::Cv => ScreeningSelector::Cv { folds: a.folds },
        ScreeningArg::TrainDev => ScreeningSelector::TrainDev,
        ScreeningArg::Holp => ScreeningSelector::HolpLimit,
    };
    if a.dev_threshold.is_some() && !matches!(a.screening, ScreeningArg::Dev) {
        return Err(CliError::usage("--dev-threshold only applies to --screening dev"));
    }
    Ok(SparConfig {
        m_max: a.models,
        nu: a.nu,
        cv: a.cv && !a.no_cv,
        cv_folds: a.folds,
        nu_grid_size: a.nu_grid,
        selection_rule: match a.threshold_rule {
            ThresholdRule::Min => SelectionRule::MinScore,
            ThresholdRule::OneSe => SelectionRule::OneStandardError,
        },
        averaging: match a.averaging {
            AveragingArg::Link => Averaging::Link,
            AveragingArg::Response => Averaging::Response,
        },
        screening: ScreeningConfig { selector, ..ScreeningConfig::default() },
        seed: a.seed,
        ..SparConfig::new(a.family)
    })
}

pub fn fit(a: &FitArgs) -> CliResult {
    let config = fit_config(a)?;
    let table = io::read_table(&a.data, &a.response)?;
    let y = table
        .y
        .ok_or_else(|| SparError::Data(format!("response column '{}' not found in {}", a.response, a.data.display())))?;
    let model = spar_fit(&table.x, &y, &config)?;
    io::save_model(&a.model, &model)?;

    let converged = model.members.iter().filter(|m| m.converged).count();
    let report = json!({
        "family_link": model.family_link().to_string(),
        "n": table.x.nrows(),
        "p": table.x.ncols(),
        "deviance_ratio": model.deviance_ratio(&table.x, &y)?,
        "models": model.n_models,
        "nu": model.nu,
        "cv": config.cv,
        "screening_lambda": model.screening.as_ref().and_then(|s| s.lambda_used),
        "screening_deviance_ratio": model.screening.as_ref().and_then(|s| s.deviance_ratio),
        "nonzeros": model.nonzeros(),
        "intercept": model.intercept_hat,
        "members_converged": converged,
        "members_fitted": model.members.len(),
    });
    print_json(&report, a.report.as_deref())
}

pub fn predict(a: &PredictArgs) -> CliResult {
    let model = io::load_model(&a.model)?;
    let table = io::read_table(&a.data, &a.response)?;
    let mu = model.predict(&table.x, PredictKind::Response)?;
    if model.config.averaging == Averaging::Link {
        let eta = model.predict(&table.x, PredictKind::Link)?;
        io::write_columns(&a.out, &[("eta", &eta), ("mu", &mu)])?;
    } else {
        io::write_columns(&a.out, &[("mu", &mu)])?;
    }
    Ok(())
}

/// Value of a metric, or null (with a log line) when it is undefined.
fn metric(name: &str, r: spar_core::Result<f64>) -> Value {
    match r {
        Ok(v) => json!(v),
        Err(e) => {
            log::warn!("{name}: {e}");
            Value::Null
        }
    }
}

pub fn evaluate(a: &EvaluateArgs) -> CliResult {
    let table = io::read_table(&a.data, &a.response)?;
    let y = table
        .y
        .ok_or_else(|| SparError::Data(format!("response column '{}' not found in {}", a.response, a.data.display())))?;
    let model = a.model.as_deref().map(io::load_model).transpose()?;
    let (mu, eta) = match (&model, &a.predictions) {
        (Some(m), _) => {
            let mu = m.predict(&table.x, PredictKind::Response)?;
            let eta = (m.config.averaging == Averaging::Link).then(|| m.predict(&table.x, PredictKind::Link)).transpose()?;
            (mu, eta)
        }
        (None, Some(path)) => {
            let p = io::read_table(path, "mu")?;
            let mu = p.y.ok_or_else(|| SparError::Data(format!("{} has no 'mu' column", path.display())))?;
            let eta = p.predictor_names.iter().position(|c| c == "eta").map(|j| p.x.column(j).iter().copied().collect());
            (mu, eta)
        }
        (None, None) => return Err(CliError::usage("either --model or --predictions is required")),
    };
    if mu.len() != y.len() {
        return Err(SparError::Dimension(format!("{} predictions for {} observations", mu.len(), y.len())).into());
    }
    let train_mean = a.train_mean.or(model.as_ref().map(|m| m.train_response_mean));

    let mut record = serde_json::Map::new();
    record.insert("n".into(), json!(y.len()));
    record.insert("mspe".into(), metric("mspe", metrics::mspe(&y, &mu)));
    record.insert("rmspe".into(), train_mean.map_or(Value::Null, |m| metric("rmspe", metrics::rmspe(&y, &mu, m))));
    let (msle, rmsle) = match (&table.eta_true, &eta) {
        (Some(t), Some(e)) => (metric("msle", metrics::msle(t, e)), metric("rmsle", metrics::rmsle(t, e))),
        _ => (Value::Null, Value::Null),
    };
    record.insert("msle".into(), msle);
    record.insert("rmsle".into(), rmsle);

    let binary = match &model {
        Some(m) => m.family_link().family() == Family::Binomial,
        None => y.iter().all(|v| *v == 0.0 || *v == 1.0),
    };
    if binary {
        let labels: Vec<bool> = y.iter().map(|v| *v > 0.5).collect();
        record.insert("auc".into(), metric("auc", metrics::auc(&labels, &mu)));
        let mut counts = [0usize; 4];
        for (&l, &m) in labels.iter().zip(&mu) {
            counts[(usize::from(m >= 0.5) << 1) | usize::from(l)] += 1;
        }
        record.insert("tn".into(), json!(counts[0]));
        record.insert("fn".into(), json!(counts[1]));
        record.insert("fp".into(), json!(counts[2]));
        record.insert("tp".into(), json!(counts[3]));
    } else {
        record.insert("auc".into(), Value::Null);
    }

    let pauc = match (&model, &a.metadata) {
        (Some(m), Some(path)) => {
            let meta: DatasetMetadata = io::read_json(path)?;
            if meta.beta.len() != m.beta_hat.len() {
                return Err(SparError::Dimension(format!(
                    "metadata describes {} predictors, model has {}",
                    meta.beta.len(),
                    m.beta_hat.len()
                ))
                .into());
            }
            let scores: Vec<f64> = m.beta_hat.iter().map(|b| b.abs()).collect();
            metric("pauc", metrics::pauc(&meta.active_mask(), &scores, meta.spec.n))
        }
        _ => Value::Null,
    };
    record.insert("pauc".into(), pauc);
    print_json(&Value::Object(record), a.out.as_deref())
}

fn benchmark_spec(a: &BenchmarkArgs) -> Result<ExperimentSpec, CliError> {
    let mut spec = match &a.config {
        Some(path) => io::read_json::<ExperimentSpec>(path)?,
        None => {
            let scenario = a.scenario.ok_or_else(|| CliError::usage("--scenario is required without --config"))?;
            if a.family.is_empty() {
                return Err(CliError::usage("--family is required without --config"));
            }
            let template = GridCell {
                family_link: a.family[0],
                n: 200,
                p: 2000,
                sparsity: spar_core::sim::Sparsity::Medium,
                covariance: spar_core::sim::CovarianceKind::Block,
                n_test: 200,
                replications: 1,
            };
            ExperimentSpec { scenario, cells: vec![template], methods: vec![], seed: 0, projection_dim: None, timing: true }
        }
    };
    if let Some(s) = a.scenario {
        spec.scenario = s;
    }
    if !a.methods.is_empty() {
        spec.methods = a.methods.clone();
    }
    if let Some(s) = a.seed {
        spec.seed = s;
    }
    if a.projection_dim.is_some() {
        spec.projection_dim = a.projection_dim;
    }
    if a.no_timing {
        spec.timing = false;
    }
    // grid flags replace the corresponding field of every cell; lists expand
    // into the cartesian product
    let mut cells = spec.cells.clone();
    macro_rules! expand {
        ($values:expr, $field:ident) => {
            if !$values.is_empty() {
                cells = cells
                    .iter()
                    .flat_map(|c| $values.iter().map(move |v| GridCell { $field: *v, ..*c }))
                    .collect();
            }
        };
    }
    expand!(a.family, family_link);
    expand!(a.n, n);
    expand!(a.p, p);
    expand!(a.sparsity, sparsity);
    expand!(a.covariance, covariance);
    for c in &mut cells {
        if let Some(t) = a.n_test {
            c.n_test = t;
        }
        if let Some(r) = a.reps {
            c.replications = r;
        }
    }
    spec.cells = cells;
    spec.validate()?;
    Ok(spec)
}

/// Metrics ranked by the rank table, with their direction.
const RANKED: [(&str, bool); 7] =
    [("mspe", true), ("rmspe", true), ("msle", true), ("rmsle", true), ("auc", false), ("pauc", false), ("correlation", false)];

pub fn benchmark(a: &BenchmarkArgs) -> CliResult {
    let spec = benchmark_spec(a)?;
    let rows = experiment::run_experiment(&spec)?;
    experiment::write_results_file(&a.out, &rows)?;
    let skipped = rows.iter().filter(|r| r.metric == "skipped").count();
    println!("{} rows written to {}", rows.len(), a.out.display());
    if skipped > 0 {
        println!("{skipped} method runs skipped; see the reason column");
    }
    if let Some(path) = &a.ranks {
        let mut w = csv::Writer::from_path(path).map_err(SparError::from)?;
        w.write_record(["cell_id", "metric", "method", "mean_rank", "replications"]).map_err(SparError::from)?;
        for (metric, lower) in RANKED {
            for r in experiment::mean_ranks(&rows, metric, lower) {
                w.write_record([
                    r.cell_id.to_string(),
                    metric.to_string(),
                    r.method,
                    format!("{:?}", r.mean_rank),
                    r.replications.to_string(),
                ])
                .map_err(SparError::from)?;
            }
        }
        w.flush()?;
    }
    Ok(())
}
