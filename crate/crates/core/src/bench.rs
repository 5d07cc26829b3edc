//! Multi-seed evaluation and comparison selectors.
//!
//! Every algorithm picks a feature set from the training and validation
//! blocks; a fresh model per seed is then fitted on that set and scored on the
//! test block. Summaries report mean, std, max and min of MAE, RMSE and R².

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::dataset::{format_f64, Dataset};
use crate::error::{Error, Result};
use crate::gbdt::{GbdtModel, GbdtParams};
use crate::selector::{compute_metric, run_selection_cached, FitCache, Metric, QuantilePair, SelectorParams};
use crate::shapley::{global_influence, tree_shap};
use crate::stats::{mean, std_dev};

pub const CSV_HEADER: &str = "algorithm,n_features,mae_mean,mae_std,mae_max,mae_min,rmse_mean,rmse_std,rmse_max,rmse_min,r2_mean,r2_std,r2_max,r2_min";
pub const PER_SEED_HEADER: &str = "algorithm,seed,n_features,mae,rmse,r2";

/// Mean, population standard deviation, max and min of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub std: f64,
    pub max: f64,
    pub min: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Stats {
        Stats {
            mean: mean(values),
            std: std_dev(values),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricSummary {
    pub algorithm: String,
    pub n_features: usize,
    pub mae: Stats,
    pub rmse: Stats,
    pub r2: Stats,
}

impl MetricSummary {
    pub fn csv_row(&self) -> String {
        let mut out = format!("{},{}", self.algorithm, self.n_features);
        for s in [&self.mae, &self.rmse, &self.r2] {
            for v in [s.mean, s.std, s.max, s.min] {
                let _ = write!(out, ",{}", format_f64(v));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeedMetrics {
    pub seed: u64,
    pub mae: f64,
    pub rmse: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub summary: MetricSummary,
    pub per_seed: Vec<SeedMetrics>,
}

fn summarize(algorithm: &str, n_features: usize, per_seed: Vec<SeedMetrics>) -> Evaluation {
    let col = |f: fn(&SeedMetrics) -> f64| per_seed.iter().map(f).collect::<Vec<_>>();
    Evaluation {
        summary: MetricSummary {
            algorithm: algorithm.to_string(),
            n_features,
            mae: Stats::of(&col(|s| s.mae)),
            rmse: Stats::of(&col(|s| s.rmse)),
            r2: Stats::of(&col(|s| s.r2)),
        },
        per_seed,
    }
}

fn score(seed: u64, y: &[f64], pred: &[f64]) -> Result<SeedMetrics> {
    Ok(SeedMetrics {
        seed,
        mae: compute_metric(y, pred, Metric::Mae)?,
        rmse: compute_metric(y, pred, Metric::Rmse)?,
        r2: compute_metric(y, pred, Metric::R2)?,
    })
}

/// Fits one model per seed on `fit_data` restricted to `feature_set` and
/// scores it on `test`. When the model parameters make fitting
/// seed-independent the single fit is reused for every seed.
pub fn evaluate<S: AsRef<str>>(
    algorithm: &str,
    feature_set: &[S],
    fit_data: &Dataset,
    test: &Dataset,
    model_params: &GbdtParams,
    seeds: &[u64],
) -> Result<Evaluation> {
    if feature_set.is_empty() {
        return Err(Error::InvalidParam("feature set is empty".into()));
    }
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed list is empty".into()));
    }
    let fit_data = fit_data.select_features(feature_set)?;
    let test = test.select_features(feature_set)?;
    let mut per_seed = Vec::with_capacity(seeds.len());
    let mut shared: Option<Vec<f64>> = None;
    for &seed in seeds {
        let pred = match &shared {
            Some(p) => p.clone(),
            None => {
                let model = GbdtModel::fit(&fit_data, &model_params.with_seed(seed))?;
                let p = model.predict_dataset(&test)?;
                if !model_params.is_seed_dependent() {
                    shared = Some(p.clone());
                }
                p
            }
        };
        per_seed.push(score(seed, test.target(), &pred)?);
    }
    Ok(summarize(algorithm, fit_data.n_features(), per_seed))
}

/// Scores the constant prediction `mean(fit_data.target)`; used when a
/// selector keeps no feature at all.
pub fn evaluate_mean_only(algorithm: &str, fit_data: &Dataset, test: &Dataset, seeds: &[u64]) -> Result<Evaluation> {
    if seeds.is_empty() {
        return Err(Error::InvalidParam("seed list is empty".into()));
    }
    let pred = vec![mean(fit_data.target()); test.n_rows()];
    let per_seed = seeds
        .iter()
        .map(|&s| score(s, test.target(), &pred))
        .collect::<Result<Vec<_>>>()?;
    Ok(summarize(algorithm, 0, per_seed))
}

/// The `k` features with the largest mean |SHAP| on `val` under a model fitted
/// on `train`. Ties go to the alphabetically first name.
pub fn baseline_topk_shap(train: &Dataset, val: &Dataset, model_params: &GbdtParams, k: usize) -> Result<Vec<String>> {
    let m = train.n_features();
    if k == 0 || k > m {
        return Err(Error::InvalidParam(format!("k must be in 1..={m}, got {k}")));
    }
    let model = GbdtModel::fit(train, model_params)?;
    let influence = global_influence(&tree_shap(&model, &val.feature_matrix())?)?;
    Ok(top_k_names(train.feature_names(), &influence, k))
}

fn top_k_names(names: &[String], influence: &[f64], k: usize) -> Vec<String> {
    let mut order: Vec<usize> = (0..names.len()).collect();
    // names are sorted, so a stable sort keeps ties alphabetical
    order.sort_by(|&a, &b| influence[b].total_cmp(&influence[a]));
    let mut out: Vec<String> = order[..k].iter().map(|&j| names[j].clone()).collect();
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoParams {
    pub lambda: f64,
    pub max_sweeps: usize,
    pub tol: f64,
}

impl Default for LassoParams {
    fn default() -> Self {
        LassoParams {
            lambda: 0.001,
            max_sweeps: 10_000,
            tol: 1e-8,
        }
    }
}

impl LassoParams {
    /// The four penalties used for the comparison tables.
    pub const GRID: [f64; 4] = [0.01, 0.001, 0.0001, 0.00001];

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParam("lasso lambda must be finite and >= 0".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParam("lasso tol must be > 0".into()));
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParam("lasso max_sweeps must be >= 1".into()));
        }
        Ok(())
    }
}

/// L1-penalized least squares on min-max normalized features.
///
/// Minimizes `(1/2n)·‖y − b − Zβ‖² + λ‖β‖₁` with an unpenalized intercept `b`.
/// Coefficients are in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// Non-constant features, in name order.
    pub feature_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Constant columns, excluded before normalization.
    pub constant: Vec<String>,
    pub converged: bool,
    pub sweeps: usize,
}

impl LassoFit {
    pub fn selected(&self) -> Vec<String> {
        self.feature_names
            .iter()
            .zip(&self.coefficients)
            .filter(|(_, c)| **c != 0.0)
            .map(|(n, _)| n.clone())
            .collect()
    }
}

/// Normalized, centered design columns plus the centered target.
struct Design {
    names: Vec<String>,
    constant: Vec<String>,
    cols: Vec<Vec<f64>>,
    col_means: Vec<f64>,
    y_mean: f64,
    y: Vec<f64>,
}

fn design(data: &Dataset) -> Design {
    let mut d = Design {
        names: Vec::new(),
        constant: Vec::new(),
        cols: Vec::new(),
        col_means: Vec::new(),
        y_mean: mean(data.target()),
        y: Vec::new(),
    };
    d.y = data.target().iter().map(|v| v - d.y_mean).collect();
    for (name, col) in data.feature_names().iter().zip(data.columns()) {
        let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if hi <= lo {
            d.constant.push(name.clone());
            continue;
        }
        let z: Vec<f64> = col.iter().map(|v| (v - lo) / (hi - lo)).collect();
        let m = mean(&z);
        d.names.push(name.clone());
        d.col_means.push(m);
        d.cols.push(z.into_iter().map(|v| v - m).collect());
    }
    d
}

fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Cyclic coordinate descent until no coefficient moves by more than `tol`
/// in a sweep. Not converging within `max_sweeps` is reported through
/// [`LassoFit::converged`] with the last iterate.
pub fn lasso_select(data: &Dataset, params: &LassoParams) -> Result<LassoFit> {
    params.validate()?;
    let d = design(data);
    let n = data.n_rows() as f64;
    let p = d.cols.len();
    let sq: Vec<f64> = d.cols.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>() / n).collect();
    let mut beta = vec![0.0; p];
    let mut resid = d.y.clone();
    let mut converged = p == 0;
    let mut sweeps = 0;
    while !converged && sweeps < params.max_sweeps {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            let col = &d.cols[j];
            let rho = col.iter().zip(&resid).map(|(z, r)| z * r).sum::<f64>() / n + sq[j] * beta[j];
            let new = soft_threshold(rho, params.lambda) / sq[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, z) in resid.iter_mut().zip(col) {
                    *r -= delta * z;
                }
                beta[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        converged = max_change < params.tol;
    }
    let intercept = d.y_mean - beta.iter().zip(&d.col_means).map(|(b, m)| b * m).sum::<f64>();
    Ok(LassoFit {
        feature_names: d.names,
        coefficients: beta,
        intercept,
        constant: d.constant,
        converged,
        sweeps,
    })
}

/// Largest violation of the lasso optimality conditions: `g_j = λ·sgn(β_j)`
/// for nonzero coefficients and `|g_j| ≤ λ` otherwise, where `g_j` is the
/// correlation of normalized column `j` with the residual, divided by `n`.
pub fn lasso_kkt_violation(data: &Dataset, fit: &LassoFit, lambda: f64) -> f64 {
    let d = design(data);
    let n = data.n_rows() as f64;
    let mut resid = d.y.clone();
    for (col, b) in d.cols.iter().zip(&fit.coefficients) {
        for (r, z) in resid.iter_mut().zip(col) {
            *r -= b * z;
        }
    }
    let mut worst: f64 = 0.0;
    for (col, &b) in d.cols.iter().zip(&fit.coefficients) {
        let g = col.iter().zip(&resid).map(|(z, r)| z * r).sum::<f64>() / n;
        let v = if b != 0.0 {
            (g - lambda * b.signum()).abs()
        } else {
            (g.abs() - lambda).max(0.0)
        };
        worst = worst.max(v);
    }
    worst
}

/// Smallest penalty that zeroes every coefficient.
pub fn lasso_lambda_max(data: &Dataset) -> f64 {
    let d = design(data);
    let n = data.n_rows() as f64;
    d.cols
        .iter()
        .map(|c| (c.iter().zip(&d.y).map(|(z, y)| z * y).sum::<f64>() / n).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Algorithm {
    ShapEffects(QuantilePair),
    /// `None` takes `k` from the SHAPEffects(0.1, 0.9) selection.
    TopKShap(Option<usize>),
    Lasso(f64),
    KeepAll,
}

impl Algorithm {
    pub fn default_list() -> Vec<Algorithm> {
        let mut out: Vec<Algorithm> = QuantilePair::standard_grid()
            .into_iter()
            .map(Algorithm::ShapEffects)
            .collect();
        out.push(Algorithm::TopKShap(None));
        out.extend(LassoParams::GRID.map(Algorithm::Lasso));
        out.push(Algorithm::KeepAll);
        out
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::ShapEffects(q) => write!(f, "shapeffects_{}_{}", q.q_low(), q.q_high()),
            Algorithm::TopKShap(None) => f.write_str("topk_shap"),
            Algorithm::TopKShap(Some(k)) => write!(f, "topk_shap_{k}"),
            Algorithm::Lasso(l) => write!(f, "lasso_{l}"),
            Algorithm::KeepAll => f.write_str("keep_all"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    /// Accepts the labels produced by `Display`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParam(format!("unknown algorithm {s:?}"));
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
        if s == "keep_all" {
            Ok(Algorithm::KeepAll)
        } else if s == "topk_shap" {
            Ok(Algorithm::TopKShap(None))
        } else if let Some(k) = s.strip_prefix("topk_shap_") {
            Ok(Algorithm::TopKShap(Some(k.parse().map_err(|_| bad())?)))
        } else if let Some(l) = s.strip_prefix("lasso_") {
            Ok(Algorithm::Lasso(num(l)?))
        } else if let Some(q) = s.strip_prefix("shapeffects_") {
            let (lo, hi) = q.split_once('_').ok_or_else(bad)?;
            Ok(Algorithm::ShapEffects(QuantilePair::new(num(lo)?, num(hi)?)?))
        } else {
            Err(bad())
        }
    }
}

/// Which rows train the evaluation models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitOn {
    Train,
    TrainVal,
}

impl fmt::Display for FitOn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitOn::Train => "train",
            FitOn::TrainVal => "train_val",
        })
    }
}

impl FromStr for FitOn {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(FitOn::Train),
            "train_val" => Ok(FitOn::TrainVal),
            _ => Err(Error::InvalidParam(format!(
                "unknown fit set {s:?} (expected train or train_val)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    /// Quantiles are overridden per SHAPEffects row; model parameters are
    /// shared by every algorithm.
    pub selector: SelectorParams,
    pub seeds: Vec<u64>,
    pub algorithms: Vec<Algorithm>,
    /// Overrides `k` for every top-k row that does not carry its own.
    pub k: Option<usize>,
    pub fit_on: FitOn,
    pub lasso_max_sweeps: usize,
    pub lasso_tol: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            selector: SelectorParams::default(),
            seeds: (1..=50).collect(),
            algorithms: Algorithm::default_list(),
            k: None,
            fit_on: FitOn::Train,
            lasso_max_sweeps: LassoParams::default().max_sweeps,
            lasso_tol: LassoParams::default().tol,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub selected: Vec<String>,
    pub evaluation: Evaluation,
    /// Set for a lasso row that hit `max_sweeps`.
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchTable {
    pub rows: Vec<BenchRow>,
}

impl BenchTable {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(out, "{}", r.evaluation.summary.csv_row());
        }
        out
    }

    pub fn per_seed_csv(&self) -> String {
        let mut out = format!("{PER_SEED_HEADER}\n");
        for r in &self.rows {
            let s = &r.evaluation.summary;
            for m in &r.evaluation.per_seed {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    s.algorithm,
                    m.seed,
                    s.n_features,
                    format_f64(m.mae),
                    format_f64(m.rmse),
                    format_f64(m.r2)
                );
            }
        }
        out
    }

    pub fn row(&self, label: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algorithm.to_string() == label)
    }
}

/// Runs every configured algorithm on the same blocks and evaluates the
/// selected sets, one row per algorithm in configuration order.
pub fn run_table(train: &Dataset, val: &Dataset, test: &Dataset, config: &BenchConfig) -> Result<BenchTable> {
    if config.seeds.is_empty() {
        return Err(Error::InvalidParam("seed list is empty".into()));
    }
    let model_params = &config.selector.model_params;
    let train_val = train.concat(val)?;
    let fit_data = match config.fit_on {
        FitOn::Train => train,
        FitOn::TrainVal => &train_val,
    };
    let mut cache = FitCache::new();
    let mut selections: Vec<(QuantilePair, Vec<String>)> = Vec::new();
    let mut select = |q: QuantilePair, cache: &mut FitCache| -> Result<Vec<String>> {
        if let Some((_, s)) = selections.iter().find(|(p, _)| *p == q) {
            return Ok(s.clone());
        }
        let params = SelectorParams {
            quantiles: q,
            ..config.selector.clone()
        };
        let set = run_selection_cached(train, val, &params, cache)?.best_feature_set;
        selections.push((q, set.clone()));
        Ok(set)
    };

    let mut evaluated: Vec<(Vec<String>, Evaluation)> = Vec::new();
    let mut rows = Vec::with_capacity(config.algorithms.len());
    for &alg in &config.algorithms {
        let label = alg.to_string();
        let mut converged = true;
        let selected = match alg {
            Algorithm::ShapEffects(q) => select(q, &mut cache)?,
            Algorithm::TopKShap(k) => {
                let k = match k.or(config.k) {
                    Some(k) => k,
                    None => select(QuantilePair::default(), &mut cache)?.len(),
                };
                if k == 0 {
                    Vec::new()
                } else {
                    baseline_topk_shap(train, val, &model_params.with_seed(config.selector.seed), k)?
                }
            }
            Algorithm::Lasso(lambda) => {
                let fit = lasso_select(
                    &train_val,
                    &LassoParams {
                        lambda,
                        max_sweeps: config.lasso_max_sweeps,
                        tol: config.lasso_tol,
                    },
                )?;
                converged = fit.converged;
                fit.selected()
            }
            Algorithm::KeepAll => train.feature_names().to_vec(),
        };
        let evaluation = match evaluated.iter().find(|(s, _)| *s == selected) {
            Some((_, e)) => e.clone(),
            None => {
                let e = if selected.is_empty() {
                    evaluate_mean_only(&label, fit_data, test, &config.seeds)?
                } else {
                    evaluate(&label, &selected, fit_data, test, model_params, &config.seeds)?
                };
                evaluated.push((selected.clone(), e.clone()));
                e
            }
        };
        let mut evaluation = evaluation;
        evaluation.summary.algorithm = label;
        rows.push(BenchRow {
            algorithm: alg,
            selected,
            evaluation,
            converged,
        });
    }
    Ok(BenchTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let a: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64 / n as f64).collect();
        let b: Vec<f64> = (0..n).map(|i| ((i * 53) % n) as f64 / n as f64).collect();
        let c = vec![1.0; n];
        let y: Vec<f64> = a.iter().zip(&b).map(|(a, b)| 3.0 * a - b).collect();
        Dataset::new(vec!["a".into(), "b".into(), "c".into()], vec![a, b, c], "y", y).unwrap()
    }

    fn small_params() -> GbdtParams {
        GbdtParams {
            n_trees: 10,
            max_depth: 3,
            min_samples_leaf: 5,
            ..Default::default()
        }
    }

    #[test]
    fn single_seed_has_no_spread() {
        let d = toy(100);
        let e = evaluate("x", &["a", "b"], &d, &d, &small_params(), &[1]).unwrap();
        assert_eq!(e.summary.mae.std, 0.0);
        assert_eq!(e.summary.mae.min, e.summary.mae.mean);
        assert_eq!(e.summary.mae.max, e.summary.mae.mean);
        let e = evaluate("x", &["b", "a"], &d, &d, &small_params(), &[1, 2]).unwrap();
        assert_eq!(e.summary.rmse.std, 0.0);
        assert_eq!(e.summary.n_features, 2);
        assert!(evaluate("x", &["zz"], &d, &d, &small_params(), &[1]).is_err());
        assert!(evaluate::<&str>("x", &[], &d, &d, &small_params(), &[1]).is_err());
    }

    #[test]
    fn topk_ranks_by_influence() {
        let d = toy(200);
        assert_eq!(baseline_topk_shap(&d, &d, &small_params(), 3).unwrap().len(), 3);
        // the constant column is never used, so it cannot make the top two
        assert_eq!(baseline_topk_shap(&d, &d, &small_params(), 2).unwrap(), vec!["a", "b"]);
        assert!(baseline_topk_shap(&d, &d, &small_params(), 0).is_err());
        assert!(baseline_topk_shap(&d, &d, &small_params(), 4).is_err());
        let names: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
        assert_eq!(top_k_names(&names, &[0.1, 0.5, 0.5, 0.0, 0.3], 3), vec!["b", "c", "e"]);
    }

    #[test]
    fn lasso_extremes() {
        let d = toy(100);
        let lmax = lasso_lambda_max(&d);
        let fit = lasso_select(&d, &LassoParams { lambda: lmax * 1.0001, ..Default::default() }).unwrap();
        assert!(fit.selected().is_empty());
        assert_eq!(fit.constant, vec!["c"]);
        let fit = lasso_select(&d, &LassoParams { lambda: 1e-4, ..Default::default() }).unwrap();
        assert!(fit.converged);
        assert_eq!(fit.selected(), vec!["a", "b"]);
        assert!(lasso_kkt_violation(&d, &fit, 1e-4) < 1e-6);
    }

    #[test]
    fn lasso_without_penalty_is_ols() {
        let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = x.iter().enumerate().map(|(i, v)| 2.0 * v + 0.1 * ((i * 7 % 11) as f64 - 5.0)).collect();
        let d = Dataset::new(vec!["x".into()], vec![x.clone()], "y", y.clone()).unwrap();
        let fit = lasso_select(&d, &LassoParams { lambda: 0.0, ..Default::default() }).unwrap();
        // closed form on the normalized column
        let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: Vec<f64> = x.iter().map(|v| (v - lo) / (hi - lo)).collect();
        let (mz, my) = (mean(&z), mean(&y));
        let sxy: f64 = z.iter().zip(&y).map(|(a, b)| (a - mz) * (b - my)).sum();
        let sxx: f64 = z.iter().map(|a| (a - mz).powi(2)).sum();
        assert!((fit.coefficients[0] - sxy / sxx).abs() < 1e-8);
        assert!((fit.intercept - (my - sxy / sxx * mz)).abs() < 1e-8);
    }

    #[test]
    fn algorithm_labels_round_trip() {
        let list = Algorithm::default_list();
        assert_eq!(list.len(), 11);
        for a in list.iter().copied().chain([Algorithm::TopKShap(Some(4))]) {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!(list[0].to_string(), "shapeffects_0.25_0.75");
        assert!("boruta".parse::<Algorithm>().is_err());
        assert!("shapeffects_0.9_0.1".parse::<Algorithm>().is_err());
    }

    #[test]
    fn table_rows_follow_config() {
        let d = toy(300);
        let idx = d.split_chronological(150, 75).unwrap();
        let (tr, va, te) = idx.apply(&d).unwrap();
        let config = BenchConfig {
            selector: SelectorParams {
                n_iter_prev: 0,
                model_params: small_params(),
                ..Default::default()
            },
            seeds: vec![1, 2],
            algorithms: vec![Algorithm::KeepAll, Algorithm::TopKShap(Some(1)), Algorithm::Lasso(1e3)],
            ..Default::default()
        };
        let t = run_table(&tr, &va, &te, &config).unwrap();
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert!(lines[1].starts_with("keep_all,3,"));
        assert!(lines[2].starts_with("topk_shap_1,1,"));
        assert!(lines[3].starts_with("lasso_1000,0,"));
        assert_eq!(t.per_seed_csv().lines().count(), 1 + 3 * 2);
        assert_eq!(run_table(&tr, &va, &te, &config).unwrap().to_csv(), csv);
    }
}
