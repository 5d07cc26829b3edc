//! WebAssembly bindings for the demo page in `www/`.

use shapshift::selector::{classify_errors, run_selection, ErrorGroup, QuantilePair, SelectorParams};
use shapshift::synth::{generate, lambda_at, ShiftKind, ShiftScenario};
use shapshift::GbdtParams;
use wasm_bindgen::prelude::*;

fn scenario(kind: &str, case: u8) -> Result<ShiftScenario, String> {
    let kind: ShiftKind = kind.parse().map_err(|e: shapshift::Error| e.to_string())?;
    ShiftScenario::case(kind, case).map_err(|e| e.to_string())
}

/// Both coefficients sampled at evenly spaced indices of a full-length run.
#[wasm_bindgen]
pub struct Schedule {
    index: Vec<f64>,
    lambda1: Vec<f64>,
    lambda2: Vec<f64>,
}

#[wasm_bindgen]
impl Schedule {
    #[wasm_bindgen(getter)]
    pub fn index(&self) -> Vec<f64> {
        self.index.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn lambda1(&self) -> Vec<f64> {
        self.lambda1.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn lambda2(&self) -> Vec<f64> {
        self.lambda2.clone()
    }
}

#[wasm_bindgen]
pub fn lambda_schedule(kind: &str, case: u8, points: usize) -> Result<Schedule, String> {
    let scn = scenario(kind, case)?;
    if points < 2 {
        return Err("need at least 2 points".into());
    }
    let last = scn.n_samples - 1;
    let mut s = Schedule {
        index: Vec::with_capacity(points),
        lambda1: Vec::with_capacity(points),
        lambda2: Vec::with_capacity(points),
    };
    for p in 0..points {
        let i = p * last / (points - 1);
        s.index.push(i as f64);
        s.lambda1.push(lambda_at(&scn, 1, i).map_err(|e| e.to_string())?);
        s.lambda2.push(lambda_at(&scn, 2, i).map_err(|e| e.to_string())?);
    }
    Ok(s)
}

/// Error band and per-row labels: 0 correct, 1 over-predicted, 2 under-predicted.
#[wasm_bindgen]
pub struct Partition {
    low: f64,
    high: f64,
    q_low_value: f64,
    q_high_value: f64,
    translation: String,
    labels: Vec<u8>,
}

#[wasm_bindgen]
impl Partition {
    #[wasm_bindgen(getter)]
    pub fn low(&self) -> f64 {
        self.low
    }

    #[wasm_bindgen(getter)]
    pub fn high(&self) -> f64 {
        self.high
    }

    #[wasm_bindgen(getter)]
    pub fn q_low_value(&self) -> f64 {
        self.q_low_value
    }

    #[wasm_bindgen(getter)]
    pub fn q_high_value(&self) -> f64 {
        self.q_high_value
    }

    #[wasm_bindgen(getter)]
    pub fn translation(&self) -> String {
        self.translation.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn labels(&self) -> Vec<u8> {
        self.labels.clone()
    }

    pub fn count(&self, label: u8) -> usize {
        self.labels.iter().filter(|&&l| l == label).count()
    }
}

#[wasm_bindgen]
pub fn partition_errors(errors: Vec<f64>, q_low: f64, q_high: f64) -> Result<Partition, String> {
    let q = QuantilePair::new(q_low, q_high).map_err(|e| e.to_string())?;
    let p = classify_errors(&errors, q).map_err(|e| e.to_string())?;
    Ok(Partition {
        low: p.low_star,
        high: p.high_star,
        q_low_value: p.q_low_value,
        q_high_value: p.q_high_value,
        translation: format!("{:?}", p.translation).to_lowercase(),
        labels: p
            .labels
            .iter()
            .map(|g| match g {
                ErrorGroup::Correct => 0,
                ErrorGroup::Over => 1,
                ErrorGroup::Under => 2,
            })
            .collect(),
    })
}

#[wasm_bindgen]
pub struct Selection {
    trace_csv: String,
    selected: Vec<String>,
    best_mae: f64,
}

#[wasm_bindgen]
impl Selection {
    #[wasm_bindgen(getter)]
    pub fn trace_csv(&self) -> String {
        self.trace_csv.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn selected(&self) -> Vec<String> {
        self.selected.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn best_mae(&self) -> f64 {
        self.best_mae
    }
}

/// Runs the selector on a 3000-step version of a scenario (inputs plus the
/// target lag, 2000 training and 500 validation rows, 60-tree models) so it
/// finishes in a few seconds in the browser.
#[wasm_bindgen]
pub fn small_selection(
    kind: &str,
    case: u8,
    shift: bool,
    q_low: f64,
    q_high: f64,
    shadow_fits: usize,
    seed: u32,
) -> Result<Selection, String> {
    let mut scn = ShiftScenario {
        n_samples: 3000,
        break_index: 2000,
        ramp_len: 500,
        lagged_inputs: false,
        seed: seed.into(),
        ..scenario(kind, case)?
    };
    if !shift {
        scn = scn.without_shift();
    }
    let ds = generate(&scn).map_err(|e| e.to_string())?;
    let (train, val, _) = ds
        .split_chronological(2000, 500)
        .and_then(|s| s.apply(&ds))
        .map_err(|e| e.to_string())?;
    let params = SelectorParams {
        quantiles: QuantilePair::new(q_low, q_high).map_err(|e| e.to_string())?,
        n_iter_prev: shadow_fits,
        model_params: GbdtParams {
            n_trees: 60,
            ..Default::default()
        },
        seed: seed.into(),
        ..Default::default()
    };
    let trace = run_selection(&train, &val, &params).map_err(|e| e.to_string())?;
    Ok(Selection {
        trace_csv: trace.to_csv(),
        selected: trace.best_feature_set,
        best_mae: trace.best_metric.unwrap_or(f64::NAN),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sudden_schedule_steps_once() {
        let s = lambda_schedule("sudden", 1, 31).unwrap();
        assert_eq!(s.index().len(), 31);
        assert_eq!(s.lambda1()[0], -10.0);
        assert_eq!(s.lambda1()[30], -4.0);
        assert_eq!(s.lambda2()[30], -25.0);
        assert!(lambda_schedule("gradual", 1, 10).is_err());
        assert!(lambda_schedule("sudden", 1, 1).is_err());
    }

    #[test]
    fn biased_errors_translate_down() {
        let errors: Vec<f64> = (0..100).map(|i| -5.0 + i as f64 * 0.04).collect();
        let p = partition_errors(errors, 0.1, 0.9).unwrap();
        assert_eq!(p.translation(), "down");
        assert!((p.high() - p.low() - (p.q_high_value() - p.q_low_value())).abs() < 1e-12);
        assert_eq!(p.count(0) + p.count(1) + p.count(2), 100);
        assert!(partition_errors(vec![1.0, 2.0], 0.9, 0.1).is_err());
    }

    #[test]
    fn small_selection_runs() {
        let s = small_selection("sudden", 1, true, 0.1, 0.9, 0, 0).unwrap();
        assert!(s.trace_csv().starts_with("iteration,"));
        assert!(!s.selected().is_empty());
        assert!(s.best_mae().is_finite());
    }
}
