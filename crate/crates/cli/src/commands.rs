use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use shapshift::bench::run_table;
use shapshift::selector::run_selection;
use shapshift::shapley::{exact_shapley, tree_shap, EXACT_MAX_FEATURES};
use shapshift::synth::generate;
use shapshift::{CoalitionValue, Dataset, GbdtModel};

use crate::config::{Block, ConfigError, RunConfig, SplitMode};

/// Rows compared by `shap --verify-exact`.
const EXACT_ROWS: usize = 100;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or input that fails validation; exit code 2.
    Config(String),
    /// Anything that goes wrong while running; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<shapshift::Error> for CliError {
    fn from(e: shapshift::Error) -> Self {
        match e {
            shapshift::Error::InvalidParam(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

fn load(cfg: &RunConfig) -> Result<Dataset, CliError> {
    Ok(match &cfg.data_path {
        Some(p) => Dataset::load_csv(p, &cfg.target)?,
        None => generate(&cfg.scenario)?,
    })
}

fn blocks(cfg: &RunConfig) -> Result<(Dataset, Dataset, Dataset), CliError> {
    let ds = load(cfg)?;
    let idx = match cfg.split_mode {
        SplitMode::Chronological => ds.split_chronological(cfg.n_train, cfg.n_val)?,
        SplitMode::Random => ds.split_random(cfg.fractions, cfg.split_seed)?,
    };
    Ok(idx.apply(&ds)?)
}

pub fn synth(cfg: &RunConfig) -> Result<(), CliError> {
    let ds = generate(&cfg.scenario)?;
    write(&cfg.output_dir, "synth.csv", &ds.to_csv_string())?;
    write(&cfg.output_dir, "synth.meta", &cfg.scenario.to_meta())?;
    println!("{} rows, {} features", ds.n_rows(), ds.n_features());
    Ok(())
}

pub fn select(cfg: &RunConfig) -> Result<(), CliError> {
    let (train, val, _) = blocks(cfg)?;
    let trace = run_selection(&train, &val, &cfg.selector)?;
    write(&cfg.output_dir, "trace.csv", &trace.to_csv())?;
    let mut names = trace.best_feature_set.clone();
    names.sort();
    let list: String = names.iter().map(|n| format!("{n}\n")).collect();
    write(&cfg.output_dir, "selected_features.txt", &list)?;
    println!(
        "selected {} of {} features, validation {} {}",
        names.len(),
        train.n_features(),
        trace.metric,
        trace.best_metric.map_or("nan".to_string(), |m| m.to_string())
    );
    Ok(())
}

pub fn shap(cfg: &RunConfig, verify: bool, verify_exact: bool) -> Result<(), CliError> {
    let (train, val, test) = blocks(cfg)?;
    if verify_exact && train.n_features() > EXACT_MAX_FEATURES {
        return Err(CliError::Config(format!(
            "--verify-exact enumerates coalitions and supports at most {EXACT_MAX_FEATURES} features, got {}",
            train.n_features()
        )));
    }
    let model = GbdtModel::fit(&train, &cfg.selector.model_params)?;
    let block = match cfg.shap_rows {
        Block::Train => train,
        Block::Val => val,
        Block::Test => test,
    };
    let mut rows = block.feature_matrix();
    if cfg.shap_max_rows > 0 && rows.n_rows() > cfg.shap_max_rows {
        rows = rows.take_rows(&(0..cfg.shap_max_rows).collect::<Vec<_>>());
    }
    let shap = tree_shap(&model, &rows)?;
    let pred = model.predict(&rows)?;

    if verify {
        for (r, p) in pred.iter().enumerate() {
            let gap = (shap.reconstructed(r) - p).abs();
            if gap >= f64::max(1e-8, 1e-8 * p.abs()) {
                return Err(CliError::Runtime(format!("row {r}: base + sum of attributions is off by {gap:e}")));
            }
        }
        println!("additivity holds on {} rows", pred.len());
    }
    if verify_exact {
        let n = rows.n_rows().min(EXACT_ROWS);
        let mut worst: f64 = 0.0;
        for r in 0..n {
            let exact = exact_shapley(&model, rows.row(r), &CoalitionValue::TreeConditional)?;
            for (a, b) in shap.values.row(r).iter().zip(&exact) {
                worst = worst.max((a - b).abs());
            }
        }
        if worst >= 1e-8 {
            return Err(CliError::Runtime(format!("attributions differ from enumeration by {worst:e}")));
        }
        println!("matches enumeration on {n} rows (max gap {worst:e})");
    }
    write(&cfg.output_dir, "shap.csv", &shap.to_csv(&pred)?)?;
    Ok(())
}

pub fn bench(cfg: &RunConfig, per_seed: bool) -> Result<(), CliError> {
    let (train, val, test) = blocks(cfg)?;
    let table = run_table(&train, &val, &test, &cfg.bench)?;
    for row in table.rows.iter().filter(|r| !r.converged) {
        eprintln!("warning: {} did not converge", row.algorithm);
    }
    let csv = table.to_csv();
    write(&cfg.output_dir, "bench.csv", &csv)?;
    if per_seed {
        write(&cfg.output_dir, "bench_per_seed.csv", &table.per_seed_csv())?;
    }
    print!("{csv}");
    Ok(())
}
