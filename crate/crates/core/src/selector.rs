//! Backward elimination driven by the signed Shapley effects of each feature
//! on correctly, over- and under-predicted validation rows.
//!
//! One iteration: fit on the current features, attribute the validation
//! predictions, partition the validation errors into three groups
//! ([`classify_errors`]), sum signed-squared attributions per group
//! ([`group_effects`]), score each feature ([`negative_influence`]) and remove
//! either every feature with no effect at all or the single worst offender.

use std::fmt;
use std::rc::Rc;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::dataset::{format_f64, Dataset};
use crate::error::{Error, Result};
use crate::gbdt::{GbdtModel, GbdtParams};
use crate::shapley::{global_influence, tree_shap, ShapMatrix};
use crate::stats::{quantile_sorted, sorted_copy};

/// `0 <= q_low < q_high <= 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantilePair {
    q_low: f64,
    q_high: f64,
}

impl QuantilePair {
    pub fn new(q_low: f64, q_high: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&q_low) || !(0.0..=1.0).contains(&q_high) || q_low >= q_high {
            return Err(Error::InvalidParam(format!(
                "quantiles must satisfy 0 <= q_low < q_high <= 1, got ({q_low}, {q_high})"
            )));
        }
        Ok(QuantilePair { q_low, q_high })
    }

    pub fn q_low(&self) -> f64 {
        self.q_low
    }

    pub fn q_high(&self) -> f64 {
        self.q_high
    }

    /// The five configurations used in the synthetic experiments.
    pub fn standard_grid() -> [QuantilePair; 5] {
        [
            (0.25, 0.75),
            (0.2, 0.8),
            (0.15, 0.85),
            (0.1, 0.9),
            (0.05, 0.95),
        ]
        .map(|(l, h)| QuantilePair { q_low: l, q_high: h })
    }
}

impl Default for QuantilePair {
    fn default() -> Self {
        QuantilePair {
            q_low: 0.1,
            q_high: 0.9,
        }
    }
}

impl fmt::Display for QuantilePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.q_low, self.q_high)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorGroup {
    /// Error inside the translated band.
    Correct,
    /// Error below the band: prediction too high.
    Over,
    /// Error above the band: prediction too low.
    Under,
}

/// Which band translation applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Translation {
    /// `0 ∈ [Q_low, Q_high]`.
    None,
    /// `Q_high < 0`: model mostly over-predicts.
    Down,
    /// `Q_low > 0`: model mostly under-predicts.
    Up,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorPartition {
    /// `y - ŷ` per row.
    pub errors: Vec<f64>,
    /// Fraction of errors `<= 0`.
    pub q_star: f64,
    /// Quantile of the errors at `q_star`.
    pub q_star_value: f64,
    pub q_low_value: f64,
    pub q_high_value: f64,
    pub low_star: f64,
    pub high_star: f64,
    pub translation: Translation,
    pub labels: Vec<ErrorGroup>,
    pub median_err: f64,
}

impl ErrorPartition {
    pub fn count(&self, group: ErrorGroup) -> usize {
        self.labels.iter().filter(|&&g| g == group).count()
    }
}

/// Partitions prediction errors into correct / over / under groups.
///
/// The band `[Q_low, Q_high]` is used as is when it contains zero. Otherwise
/// it is translated, keeping its width, so that one edge sits at the error
/// quantile matching the share of non-positive errors.
pub fn classify_errors(errors: &[f64], q: QuantilePair) -> Result<ErrorPartition> {
    if errors.len() < 2 {
        return Err(Error::InvalidParam(format!(
            "need at least 2 errors, got {}",
            errors.len()
        )));
    }
    if errors.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidParam("errors must be finite".into()));
    }
    let sorted = sorted_copy(errors);
    let n = errors.len() as f64;
    let q_low_value = quantile_sorted(&sorted, q.q_low);
    let q_high_value = quantile_sorted(&sorted, q.q_high);
    let q_star = errors.iter().filter(|&&e| e <= 0.0).count() as f64 / n;
    let q_star_value = quantile_sorted(&sorted, q_star);

    let (low_star, high_star, translation) = if q_low_value <= 0.0 && 0.0 <= q_high_value {
        (q_low_value, q_high_value, Translation::None)
    } else if q_high_value < 0.0 {
        (
            q_star_value,
            q_high_value - (q_low_value - q_star_value),
            Translation::Down,
        )
    } else {
        (
            q_low_value - (q_high_value - q_star_value),
            q_star_value,
            Translation::Up,
        )
    };

    let labels = errors
        .iter()
        .map(|&e| {
            if e > high_star {
                ErrorGroup::Under
            } else if e < low_star {
                ErrorGroup::Over
            } else {
                ErrorGroup::Correct
            }
        })
        .collect();
    Ok(ErrorPartition {
        errors: errors.to_vec(),
        q_star,
        q_star_value,
        q_low_value,
        q_high_value,
        low_star,
        high_star,
        translation,
        labels,
        median_err: quantile_sorted(&sorted, 0.5),
    })
}

/// Signed square of an attribution: `sgn(φ) φ²`.
pub fn effect_per_obs(shap_value: f64) -> f64 {
    shap_value * shap_value.abs()
}

/// Per-feature sums of [`effect_per_obs`] within each error group.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupEffects {
    pub feature_names: Vec<String>,
    pub correct: Vec<f64>,
    pub over: Vec<f64>,
    pub under: Vec<f64>,
}

pub fn group_effects(shap: &ShapMatrix, partition: &ErrorPartition) -> Result<GroupEffects> {
    if shap.explained_rows() != partition.labels.len() {
        return Err(Error::Shape {
            expected: partition.labels.len(),
            got: shap.explained_rows(),
        });
    }
    let m = shap.n_features();
    let mut ge = GroupEffects {
        feature_names: shap.feature_names.clone(),
        correct: vec![0.0; m],
        over: vec![0.0; m],
        under: vec![0.0; m],
    };
    for (row, label) in shap.values.iter_rows().zip(&partition.labels) {
        let target = match label {
            ErrorGroup::Correct => &mut ge.correct,
            ErrorGroup::Over => &mut ge.over,
            ErrorGroup::Under => &mut ge.under,
        };
        for (acc, &phi) in target.iter_mut().zip(row) {
            *acc += effect_per_obs(phi);
        }
    }
    Ok(ge)
}

/// Which scoring rule produced a negative-influence value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfluenceRule {
    /// No effect on any group: `+∞`.
    NoEffect,
    /// Model over-predicts and the feature pushes the over-predicted group.
    FeedsOverPrediction,
    /// Model under-predicts and the feature pushes the under-predicted group.
    FeedsUnderPrediction,
    /// Raises over-predictions and lowers under-predictions.
    WidensBothErrors,
    Harmless,
}

/// Scores one feature from its group effects and the median error.
pub fn neg_influence_of(
    cp: f64,
    op: f64,
    up: f64,
    median_err: f64,
    zero_tolerance: f64,
) -> (f64, InfluenceRule) {
    let (acp, aop, aup) = (cp.abs(), op.abs(), up.abs());
    if acp + aop + aup <= zero_tolerance {
        (f64::INFINITY, InfluenceRule::NoEffect)
    } else if median_err < 0.0 && op > 0.0 && up > 0.0 && aop > aup + acp {
        (aop - (aup + acp), InfluenceRule::FeedsOverPrediction)
    } else if median_err > 0.0 && op > 0.0 && up > 0.0 && aup > aop + acp {
        (aup - (aop + acp), InfluenceRule::FeedsUnderPrediction)
    } else if op > 0.0 && up < 0.0 && aup + aop > acp {
        (aup + aop - acp, InfluenceRule::WidensBothErrors)
    } else {
        (0.0, InfluenceRule::Harmless)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NegInfluence {
    pub feature_names: Vec<String>,
    pub values: Vec<f64>,
    pub rules: Vec<InfluenceRule>,
}

impl NegInfluence {
    /// Names with infinite score, in name order.
    pub fn infinite(&self) -> Vec<String> {
        self.feature_names
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.is_infinite())
            .map(|(n, _)| n.clone())
            .collect()
    }

    /// Largest finite positive score; ties go to the alphabetically first name.
    pub fn worst(&self) -> Option<(&str, f64)> {
        let mut best: Option<(&str, f64)> = None;
        for (name, &v) in self.feature_names.iter().zip(&self.values) {
            if v > 0.0 && v.is_finite() && best.is_none_or(|(_, b)| v > b) {
                best = Some((name, v));
            }
        }
        best
    }
}

pub fn negative_influence(ge: &GroupEffects, median_err: f64, zero_tolerance: f64) -> NegInfluence {
    let (values, rules) = (0..ge.feature_names.len())
        .map(|j| neg_influence_of(ge.correct[j], ge.over[j], ge.under[j], median_err, zero_tolerance))
        .unzip();
    NegInfluence {
        feature_names: ge.feature_names.clone(),
        values,
        rules,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Mae,
    Mse,
    Rmse,
    R2,
}

impl Metric {
    pub fn higher_is_better(self) -> bool {
        matches!(self, Metric::R2)
    }

    /// Whether `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        if self.higher_is_better() {
            a > b
        } else {
            a < b
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Mae => "mae",
            Metric::Mse => "mse",
            Metric::Rmse => "rmse",
            Metric::R2 => "r2",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mae" => Ok(Metric::Mae),
            "mse" => Ok(Metric::Mse),
            "rmse" => Ok(Metric::Rmse),
            "r2" => Ok(Metric::R2),
            _ => Err(Error::InvalidParam(format!("unknown metric {s:?}"))),
        }
    }
}

pub fn compute_metric(y_true: &[f64], y_pred: &[f64], metric: Metric) -> Result<f64> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Shape {
            expected: y_true.len(),
            got: y_pred.len(),
        });
    }
    if y_true.is_empty() {
        return Err(Error::InvalidParam("metric of empty vectors".into()));
    }
    let n = y_true.len() as f64;
    let sse: f64 = y_true.iter().zip(y_pred).map(|(y, p)| (y - p).powi(2)).sum();
    Ok(match metric {
        Metric::Mae => y_true.iter().zip(y_pred).map(|(y, p)| (y - p).abs()).sum::<f64>() / n,
        Metric::Mse => sse / n,
        Metric::Rmse => (sse / n).sqrt(),
        Metric::R2 => {
            let mean = y_true.iter().sum::<f64>() / n;
            let sst: f64 = y_true.iter().map(|y| (y - mean).powi(2)).sum();
            if sst == 0.0 {
                return Err(Error::InvalidParam("R2 undefined for constant y_true".into()));
            }
            1.0 - sse / sst
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorParams {
    pub quantiles: QuantilePair,
    /// Shadow-phase fits; 0 skips the phase.
    pub n_iter_prev: usize,
    pub metric: Metric,
    pub model_params: GbdtParams,
    pub seed: u64,
    pub zero_tolerance: f64,
}

impl Default for SelectorParams {
    fn default() -> Self {
        SelectorParams {
            quantiles: QuantilePair::default(),
            n_iter_prev: 30,
            metric: Metric::Mae,
            model_params: GbdtParams::default(),
            seed: 0,
            zero_tolerance: 0.0,
        }
    }
}

impl SelectorParams {
    fn validate(&self) -> Result<()> {
        self.model_params.validate()?;
        if !(self.zero_tolerance >= 0.0) {
            return Err(Error::InvalidParam("zero_tolerance must be >= 0".into()));
        }
        Ok(())
    }
}

/// Outcome of the shadow prefilter.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowReport {
    /// Feature whose permutation served as the shadow.
    pub source: String,
    pub shadow_name: String,
    /// Averaged influence per original feature, in name order.
    pub influences: Vec<(String, f64)>,
    pub shadow_influence: f64,
    pub retained: Vec<String>,
    pub removed: Vec<String>,
}

/// Predictions and validation attributions of one fit.
#[derive(Debug)]
pub struct Fitted {
    pub predictions: Vec<f64>,
    pub shap: ShapMatrix,
}

/// Memo of fits keyed by feature set and model parameters.
///
/// Only valid for one (train, validation) pair: callers must not share a cache
/// across different data. Seeds are ignored as keys when the parameters make
/// the fit seed-independent.
#[derive(Debug, Default)]
pub struct FitCache {
    entries: Vec<(GbdtParams, Vec<String>, Rc<Fitted>)>,
    hits: usize,
}

impl FitCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn hits(&self) -> usize {
        self.hits
    }

    pub fn fit(&mut self, train: &Dataset, val: &Dataset, params: &GbdtParams) -> Result<Rc<Fitted>> {
        let key = if params.is_seed_dependent() {
            params.clone()
        } else {
            params.with_seed(0)
        };
        let names = train.feature_names();
        if let Some((_, _, f)) = self.entries.iter().find(|(p, n, _)| *p == key && n == names) {
            self.hits += 1;
            return Ok(Rc::clone(f));
        }
        let fitted = Rc::new(fit_and_explain(train, val, params)?);
        self.entries.push((key, names.to_vec(), Rc::clone(&fitted)));
        Ok(fitted)
    }
}

fn fit_and_explain(train: &Dataset, val: &Dataset, params: &GbdtParams) -> Result<Fitted> {
    let model = GbdtModel::fit(train, params)?;
    let shap = tree_shap(&model, &val.feature_matrix())?;
    let predictions = model.predict_dataset(val)?;
    Ok(Fitted { predictions, shap })
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = j;
        }
    }
    best
}

/// Drops every feature whose mean validation influence, averaged over
/// `n_iter_prev` differently seeded fits, is no larger than that of a
/// permuted copy of the most influential feature.
pub fn preprocess_shadow(train: &Dataset, val: &Dataset, params: &SelectorParams) -> Result<ShadowReport> {
    preprocess_shadow_cached(train, val, params, &mut FitCache::new())
}

pub fn preprocess_shadow_cached(
    train: &Dataset,
    val: &Dataset,
    params: &SelectorParams,
    cache: &mut FitCache,
) -> Result<ShadowReport> {
    params.validate()?;
    if params.n_iter_prev == 0 {
        return Err(Error::InvalidParam("shadow phase needs n_iter_prev >= 1".into()));
    }
    check_schemas(train, val)?;
    let fitted = cache.fit(train, val, &params.model_params.with_seed(params.seed))?;
    let influence = global_influence(&fitted.shap)?;
    let source = train.feature_names()[argmax_first(&influence)].clone();

    let mut shadow_name = format!("shadow_{source}");
    while train.column_index(&shadow_name).is_some() || shadow_name == train.target_name() {
        shadow_name.push('_');
    }
    let train_aug = train.permute_column(&source, params.seed, &shadow_name)?;
    let val_aug = val.permute_column(&source, params.seed.wrapping_add(1), &shadow_name)?;

    let m = train_aug.n_features();
    let mut total = vec![0.0; m];
    for k in 1..=params.n_iter_prev {
        let seed = params.seed.wrapping_add(k as u64);
        let fitted = cache.fit(&train_aug, &val_aug, &params.model_params.with_seed(seed))?;
        for (t, v) in total.iter_mut().zip(global_influence(&fitted.shap)?) {
            *t += v;
        }
    }
    let avg: Vec<f64> = total.iter().map(|t| t / params.n_iter_prev as f64).collect();
    let shadow_idx = train_aug.column_index(&shadow_name).expect("shadow column exists");
    let shadow_influence = avg[shadow_idx];

    let mut report = ShadowReport {
        source,
        shadow_name: shadow_name.clone(),
        influences: Vec::new(),
        shadow_influence,
        retained: Vec::new(),
        removed: Vec::new(),
    };
    for (name, &v) in train_aug.feature_names().iter().zip(&avg) {
        if *name == shadow_name {
            continue;
        }
        report.influences.push((name.clone(), v));
        if v <= shadow_influence {
            report.removed.push(name.clone());
        } else {
            report.retained.push(name.clone());
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RemovalKind {
    InfiniteSweep,
    MaxNegInf,
    None,
}

impl fmt::Display for RemovalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RemovalKind::InfiniteSweep => "infinite-sweep",
            RemovalKind::MaxNegInf => "max-neg-inf",
            RemovalKind::None => "none",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub feature_set: Vec<String>,
    pub removed: Vec<String>,
    pub removal_kind: RemovalKind,
    pub metric_value: f64,
    pub median_err: f64,
    pub group_effects: GroupEffects,
    pub neg_influence: NegInfluence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionTrace {
    pub metric: Metric,
    pub shadow: Option<ShadowReport>,
    pub iterations: Vec<IterationRecord>,
    /// Empty when no iteration ran.
    pub best_feature_set: Vec<String>,
    /// `None` when no iteration ran.
    pub best_metric: Option<f64>,
}

impl SelectionTrace {
    /// `iteration,n_features,removed,removal_kind,metric_value` rows, then
    /// `best,<n>,<features joined by ';'>,<metric>`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iteration,n_features,removed,removal_kind,metric_value\n");
        for (i, it) in self.iterations.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                i + 1,
                it.feature_set.len(),
                it.removed.join(";"),
                it.removal_kind,
                format_f64(it.metric_value)
            );
        }
        let _ = writeln!(
            out,
            "best,{},{},{}",
            self.best_feature_set.len(),
            self.best_feature_set.join(";"),
            self.best_metric.map_or_else(|| "nan".to_string(), format_f64)
        );
        out
    }
}

fn check_schemas(train: &Dataset, val: &Dataset) -> Result<()> {
    if train.feature_names() != val.feature_names() {
        return Err(Error::InvalidDataset("train and validation features differ".into()));
    }
    if train.n_features() == 0 {
        return Err(Error::InvalidDataset("no candidate features".into()));
    }
    Ok(())
}

/// One elimination step on a fixed feature set.
pub struct IterationOutcome {
    pub fitted: Rc<Fitted>,
    pub partition: ErrorPartition,
    pub record: IterationRecord,
}

/// Runs a single iteration on `train`/`val` as given.
pub fn selection_step(
    train: &Dataset,
    val: &Dataset,
    params: &SelectorParams,
    cache: &mut FitCache,
) -> Result<IterationOutcome> {
    let fitted = cache.fit(train, val, &params.model_params.with_seed(params.seed))?;
    let (pred, shap) = (&fitted.predictions, &fitted.shap);
    let errors: Vec<f64> = val.target().iter().zip(pred).map(|(y, p)| y - p).collect();
    let partition = classify_errors(&errors, params.quantiles)?;
    let ge = group_effects(shap, &partition)?;
    let ni = negative_influence(&ge, partition.median_err, params.zero_tolerance);
    let metric_value = compute_metric(val.target(), pred, params.metric)?;

    let infinite = ni.infinite();
    let (removed, removal_kind) = if !infinite.is_empty() {
        (infinite, RemovalKind::InfiniteSweep)
    } else if let Some((name, _)) = ni.worst() {
        (vec![name.to_string()], RemovalKind::MaxNegInf)
    } else {
        (Vec::new(), RemovalKind::None)
    };
    let record = IterationRecord {
        feature_set: train.feature_names().to_vec(),
        removed,
        removal_kind,
        metric_value,
        median_err: partition.median_err,
        group_effects: ge,
        neg_influence: ni,
    };
    Ok(IterationOutcome {
        fitted,
        partition,
        record,
    })
}

/// Full selection: optional shadow prefilter, then backward elimination until
/// nothing is removed or no features remain. Returns every iteration and the
/// feature set with the best validation metric (ties: fewer features, then
/// earlier iteration).
pub fn run_selection(train: &Dataset, val: &Dataset, params: &SelectorParams) -> Result<SelectionTrace> {
    run_selection_cached(train, val, params, &mut FitCache::new())
}

/// [`run_selection`] reusing fits from `cache`; runs that differ only in
/// quantiles or metric share most of their fits.
pub fn run_selection_cached(
    train: &Dataset,
    val: &Dataset,
    params: &SelectorParams,
    cache: &mut FitCache,
) -> Result<SelectionTrace> {
    params.validate()?;
    check_schemas(train, val)?;
    let shadow = if params.n_iter_prev > 0 {
        Some(preprocess_shadow_cached(train, val, params, cache)?)
    } else {
        None
    };
    let mut features: Vec<String> = match &shadow {
        Some(s) => s.retained.clone(),
        None => train.feature_names().to_vec(),
    };
    let mut iterations: Vec<IterationRecord> = Vec::new();
    while !features.is_empty() {
        let tr = train.select_features(&features)?;
        let va = val.select_features(&features)?;
        let record = selection_step(&tr, &va, params, cache)?.record;
        let stop = record.removed.is_empty();
        features.retain(|f| !record.removed.contains(f));
        iterations.push(record);
        if stop {
            break;
        }
    }

    let mut best: Option<&IterationRecord> = None;
    for it in &iterations {
        let better = match best {
            None => true,
            Some(b) => {
                params.metric.better(it.metric_value, b.metric_value)
                    || (it.metric_value == b.metric_value && it.feature_set.len() < b.feature_set.len())
            }
        };
        if better {
            best = Some(it);
        }
    }
    Ok(SelectionTrace {
        metric: params.metric,
        best_feature_set: best.map(|b| b.feature_set.clone()).unwrap_or_default(),
        best_metric: best.map(|b| b.metric_value),
        shadow,
        iterations,
    })
}
