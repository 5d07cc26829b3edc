//! Flat `section.key = value` run configuration.
//!
//! Values are layered: built-in defaults, then the config file, then
//! `SHAPSHIFT_*` environment variables, then command-line flags.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use shapshift::bench::{Algorithm, BenchConfig, FitOn, LassoParams};
use shapshift::selector::{Metric, QuantilePair, SelectorParams};
use shapshift::synth::{ShiftKind, ShiftScenario};
use shapshift::GbdtParams;

pub const ENV_PREFIX: &str = "SHAPSHIFT_";

pub struct Key {
    pub name: &'static str,
    pub default: &'static str,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> Key {
    Key { name, default, help }
}

pub const KEYS: &[Key] = &[
    key("data.path", "", "input CSV; empty generates a synthetic scenario from synth.*"),
    key("data.target", "y", "target column of the input CSV"),
    key("split.mode", "chronological", "chronological or random"),
    key("split.n_train", "20000", "training rows (chronological mode)"),
    key("split.n_val", "5000", "validation rows (chronological mode)"),
    key("split.fractions", "0.6,0.2,0.2", "train,val,test fractions (random mode)"),
    key("split.seed", "0", "row shuffle seed (random mode)"),
    key("selector.q_low", "0.1", "lower error quantile"),
    key("selector.q_high", "0.9", "upper error quantile"),
    key("selector.n_iter_prev", "30", "shadow-phase fits; 0 disables the phase"),
    key("selector.metric", "mae", "validation metric: mae, mse, rmse or r2"),
    key("selector.zero_tolerance", "0", "group-effect total treated as no effect"),
    key("selector.seed", "0", "seed of the selector fits and shadow permutations"),
    key("model.n_trees", "250", "boosting rounds"),
    key("model.learning_rate", "0.1", "shrinkage"),
    key("model.max_depth", "6", "maximum tree depth"),
    key("model.min_samples_leaf", "20", "minimum rows per leaf"),
    key("model.subsample", "1", "row fraction per tree"),
    key("bench.seeds", "1..50", "evaluation seeds: inclusive range a..b or a comma list"),
    key("bench.algorithms", "default", "comma list of algorithm labels, or default"),
    key("bench.k", "auto", "top-k size; auto uses the SHAPEffects(0.1,0.9) selection size"),
    key("bench.fit_on", "train", "rows that train the evaluation models: train or train_val"),
    key("synth.kind", "sudden", "sudden or incremental"),
    key("synth.case", "1", "coefficient case 1, 2 or 3"),
    key("synth.lambdas", "", "lambda1_a,lambda1_b,lambda2_a,lambda2_b; overrides synth.case"),
    key("synth.shift", "true", "false keeps the a-coefficients throughout"),
    key("synth.n_samples", "30000", "time steps to draw"),
    key("synth.break_index", "20000", "first shifted sample"),
    key("synth.ramp_len", "5000", "ramp length (incremental)"),
    key("synth.seed", "0", "generator seed"),
    key("synth.noise_sd", "0.1", "standard deviation of the additive noise"),
    key("synth.lagged_inputs", "true", "also emit the lag-1 copy of every input"),
    key("shap.rows", "val", "block to explain: train, val or test"),
    key("shap.max_rows", "0", "explain at most this many rows; 0 means all"),
    key("output.dir", ".", "directory for output files"),
];

pub fn find_key(name: &str) -> Option<&'static Key> {
    KEYS.iter().find(|k| k.name == name)
}

pub fn env_name(key: &str) -> String {
    format!("{ENV_PREFIX}{}", key.replace('.', "_").to_uppercase())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub msg: String,
}

impl ConfigError {
    fn at(key: &str, msg: impl Into<String>) -> Self {
        ConfigError {
            key: Some(key.to_string()),
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.key {
            Some(k) => write!(f, "{k}: {}", self.msg),
            None => f.write_str(&self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Resolved string values for every known key.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<&'static str, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        RawConfig {
            values: KEYS.iter().map(|k| (k.name, k.default.to_string())).collect(),
        }
    }
}

impl RawConfig {
    pub fn get(&self, key: &str) -> &str {
        &self.values[key]
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let k = find_key(key).ok_or_else(|| ConfigError::at(key, "unknown key"))?;
        self.values.insert(k.name, value.trim().to_string());
        Ok(())
    }

    /// Applies a config file. Blank lines and `#` comments are ignored;
    /// repeating a key is an error.
    pub fn apply_file(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError {
                key: None,
                msg: format!("line {}: expected section.key = value", i + 1),
            })?;
            let k = k.trim();
            if seen.contains(&k) {
                return Err(ConfigError::at(k, format!("line {}: repeated key", i + 1)));
            }
            seen.push(k);
            self.set(k, v)?;
        }
        Ok(())
    }

    /// Applies `SHAPSHIFT_SECTION_KEY` variables; any other variable with the
    /// prefix is rejected.
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<(), ConfigError> {
        for (name, value) in vars {
            if !name.starts_with(ENV_PREFIX) {
                continue;
            }
            let key = KEYS
                .iter()
                .find(|k| env_name(k.name) == name)
                .ok_or_else(|| ConfigError::at(&name, "unknown environment override"))?;
            self.set(key.name, &value)?;
        }
        Ok(())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        let v = self.get(key);
        v.parse().map_err(|_| ConfigError::at(key, format!("invalid value {v:?}")))
    }

    fn parse_with<T, E: fmt::Display>(&self, key: &str, f: impl FnOnce(&str) -> Result<T, E>) -> Result<T, ConfigError> {
        f(self.get(key)).map_err(|e| ConfigError::at(key, e.to_string()))
    }

    fn reals(&self, key: &str, n: usize) -> Result<Vec<f64>, ConfigError> {
        let v = self.get(key);
        let out: Vec<f64> = v
            .split(',')
            .map(|s| s.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| ConfigError::at(key, format!("invalid number list {v:?}")))?;
        if out.len() != n {
            return Err(ConfigError::at(key, format!("expected {n} comma-separated numbers")));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitMode {
    Chronological,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Train,
    Val,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub data_path: Option<PathBuf>,
    pub target: String,
    pub split_mode: SplitMode,
    pub n_train: usize,
    pub n_val: usize,
    pub fractions: [f64; 3],
    pub split_seed: u64,
    pub selector: SelectorParams,
    pub bench: BenchConfig,
    pub scenario: ShiftScenario,
    pub shap_rows: Block,
    pub shap_max_rows: usize,
    pub output_dir: PathBuf,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("invalid seed list {s:?}");
    let seeds: Vec<u64> = if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',').map(|v| v.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?
    };
    if seeds.is_empty() {
        return Err("seed list is empty".into());
    }
    Ok(seeds)
}

fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>, String> {
    if s == "default" {
        return Ok(Algorithm::default_list());
    }
    s.split(',')
        .map(|a| a.trim().parse::<Algorithm>().map_err(|e| e.to_string()))
        .collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(format!("expected true or false, got {s:?}")),
    }
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<RunConfig, ConfigError> {
        let path = raw.get("data.path");
        let split_mode = match raw.get("split.mode") {
            "chronological" => SplitMode::Chronological,
            "random" => SplitMode::Random,
            v => return Err(ConfigError::at("split.mode", format!("expected chronological or random, got {v:?}"))),
        };
        let fr = raw.reals("split.fractions", 3)?;

        let seed = raw.parse("selector.seed")?;
        let model_params = GbdtParams {
            n_trees: raw.parse("model.n_trees")?,
            learning_rate: raw.parse("model.learning_rate")?,
            max_depth: raw.parse("model.max_depth")?,
            min_samples_leaf: raw.parse("model.min_samples_leaf")?,
            subsample: raw.parse("model.subsample")?,
            seed,
        };
        model_params.validate().map_err(|e| ConfigError::at("model", e.to_string()))?;
        let quantiles = QuantilePair::new(raw.parse("selector.q_low")?, raw.parse("selector.q_high")?)
            .map_err(|e| ConfigError::at("selector.q_low", e.to_string()))?;
        let zero_tolerance: f64 = raw.parse("selector.zero_tolerance")?;
        if !(zero_tolerance >= 0.0) {
            return Err(ConfigError::at("selector.zero_tolerance", "must be >= 0"));
        }
        let selector = SelectorParams {
            quantiles,
            n_iter_prev: raw.parse("selector.n_iter_prev")?,
            metric: raw.parse_with("selector.metric", Metric::from_str)?,
            model_params,
            seed,
            zero_tolerance,
        };

        let k = match raw.get("bench.k") {
            "auto" => None,
            _ => Some(raw.parse("bench.k")?),
        };
        let bench = BenchConfig {
            selector: selector.clone(),
            seeds: raw.parse_with("bench.seeds", parse_seeds)?,
            algorithms: raw.parse_with("bench.algorithms", parse_algorithms)?,
            k,
            fit_on: raw.parse_with("bench.fit_on", FitOn::from_str)?,
            lasso_max_sweeps: LassoParams::default().max_sweeps,
            lasso_tol: LassoParams::default().tol,
        };

        let kind: ShiftKind = raw.parse_with("synth.kind", ShiftKind::from_str)?;
        let case: u8 = raw.parse("synth.case")?;
        let mut scenario =
            ShiftScenario::case(kind, case).map_err(|e| ConfigError::at("synth.case", e.to_string()))?;
        if !raw.get("synth.lambdas").is_empty() {
            let l = raw.reals("synth.lambdas", 4)?;
            scenario.lambda1_a = l[0];
            scenario.lambda1_b = l[1];
            scenario.lambda2_a = l[2];
            scenario.lambda2_b = l[3];
        }
        scenario.n_samples = raw.parse("synth.n_samples")?;
        scenario.break_index = raw.parse("synth.break_index")?;
        scenario.ramp_len = raw.parse("synth.ramp_len")?;
        scenario.seed = raw.parse("synth.seed")?;
        scenario.noise_sd = raw.parse("synth.noise_sd")?;
        scenario.lagged_inputs = raw.parse_with("synth.lagged_inputs", parse_bool)?;
        if !raw.parse_with("synth.shift", parse_bool)? {
            scenario = scenario.without_shift();
        }
        scenario.validate().map_err(|e| ConfigError::at("synth", e.to_string()))?;

        let shap_rows = match raw.get("shap.rows") {
            "train" => Block::Train,
            "val" => Block::Val,
            "test" => Block::Test,
            v => return Err(ConfigError::at("shap.rows", format!("expected train, val or test, got {v:?}"))),
        };

        Ok(RunConfig {
            data_path: (!path.is_empty()).then(|| PathBuf::from(path)),
            target: raw.get("data.target").to_string(),
            split_mode,
            n_train: raw.parse("split.n_train")?,
            n_val: raw.parse("split.n_val")?,
            fractions: [fr[0], fr[1], fr[2]],
            split_seed: raw.parse("split.seed")?,
            selector,
            bench,
            scenario,
            shap_rows,
            shap_max_rows: raw.parse("shap.max_rows")?,
            output_dir: PathBuf::from(raw.get("output.dir")),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve() {
        let c = RunConfig::from_raw(&RawConfig::default()).unwrap();
        assert_eq!(c.selector.quantiles, QuantilePair::default());
        assert_eq!(c.selector.n_iter_prev, 30);
        assert_eq!(c.selector.metric, Metric::Mae);
        assert_eq!(c.bench.seeds, (1..=50).collect::<Vec<_>>());
        assert_eq!(c.bench.algorithms.len(), 11);
        assert_eq!(c.scenario, ShiftScenario::default());
        assert_eq!(c.data_path, None);
        // every key has a default that parses
        assert_eq!(RawConfig::default().values.len(), KEYS.len());
    }

    #[test]
    fn file_layer() {
        let mut raw = RawConfig::default();
        raw.apply_file("# comment\nselector.q_low = 0.2\n\nbench.seeds=3,5\n").unwrap();
        let c = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(c.selector.quantiles.q_low(), 0.2);
        assert_eq!(c.bench.seeds, vec![3, 5]);
        let err = RawConfig::default().apply_file("selector.qlow = 1\n").unwrap_err();
        assert_eq!(err.key.as_deref(), Some("selector.qlow"));
        assert!(RawConfig::default().apply_file("a.b = 1\na.b = 2\n").is_err());
        assert!(RawConfig::default().apply_file("selector.q_low 0.2\n").is_err());
    }

    #[test]
    fn env_layer() {
        let mut raw = RawConfig::default();
        raw.apply_env([
            ("SHAPSHIFT_MODEL_N_TREES".to_string(), "7".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ])
        .unwrap();
        assert_eq!(raw.get("model.n_trees"), "7");
        assert!(raw.apply_env([("SHAPSHIFT_NOPE".to_string(), "1".to_string())]).is_err());
    }

    #[test]
    fn invalid_values_name_their_key() {
        let cases = [
            ("synth.kind", "gradual"),
            ("selector.metric", "mape"),
            ("bench.seeds", "x"),
            ("bench.algorithms", "boruta"),
            ("split.fractions", "0.5,0.5"),
            ("synth.lagged_inputs", "maybe"),
        ];
        for (k, v) in cases {
            let mut raw = RawConfig::default();
            raw.set(k, v).unwrap();
            let err = RunConfig::from_raw(&raw).unwrap_err();
            assert_eq!(err.key.as_deref(), Some(k), "{k}");
        }
        let mut raw = RawConfig::default();
        raw.set("selector.q_low", "0.9").unwrap();
        raw.set("selector.q_high", "0.1").unwrap();
        assert!(RunConfig::from_raw(&raw).is_err());
    }

    #[test]
    fn scenario_overrides() {
        let mut raw = RawConfig::default();
        raw.set("synth.kind", "incremental").unwrap();
        raw.set("synth.case", "3").unwrap();
        raw.set("synth.shift", "false").unwrap();
        let c = RunConfig::from_raw(&raw).unwrap();
        assert_eq!(c.scenario.kind, ShiftKind::Incremental);
        assert_eq!(c.scenario.lambda1_a, c.scenario.lambda1_b);
        raw.set("synth.lambdas", "1,2,3,4").unwrap();
        raw.set("synth.shift", "true").unwrap();
        assert_eq!(RunConfig::from_raw(&raw).unwrap().scenario.lambdas(), [1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("2..4").unwrap(), vec![2, 3, 4]);
        assert!(parse_seeds("4..2").is_err());
        assert_eq!(parse_seeds("9").unwrap(), vec![9]);
    }
}
