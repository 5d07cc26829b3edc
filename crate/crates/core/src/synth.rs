//! Synthetic concept-shift streams.
//!
//! Ten `U(0,1)` inputs drive
//!
//! ```text
//! f_t = 2 x1 + λ1 x2² + 3 sin(2π x3) − 0.4 x4 + λ2 x5²   (at t)
//!     + the same five terms at t−1
//!     + ε_t
//! ```
//!
//! where `λ1` and `λ2` change at `break_index`, either in one step or along a
//! ramp. Only x1..x5 are informative.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{format_f64, Dataset};
use crate::error::{Error, Result};

pub const N_INPUTS: usize = 10;
pub const TARGET_NAME: &str = "y";
pub const TARGET_LAG_NAME: &str = "y_lag1";

/// Scale used by the incremental ramp formula. It is fixed and does not follow
/// `ramp_len`, so with the default layout λ jumps from (λa+λb)/2 to λb at the
/// end of the ramp.
pub const RAMP_SCALE: f64 = 10000.0;

pub const LAMBDA1_A: [f64; 3] = [-10.0, -1.0, -0.1];
pub const LAMBDA1_B: [f64; 3] = [-4.0, -0.4, -0.04];
pub const LAMBDA2_A: [f64; 3] = [10.0, 1.0, 0.1];
pub const LAMBDA2_B: [f64; 3] = [-25.0, -2.5, -0.25];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftKind {
    Sudden,
    Incremental,
}

impl fmt::Display for ShiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ShiftKind::Sudden => "sudden",
            ShiftKind::Incremental => "incremental",
        })
    }
}

impl FromStr for ShiftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sudden" => Ok(ShiftKind::Sudden),
            "incremental" => Ok(ShiftKind::Incremental),
            _ => Err(Error::InvalidParam(format!(
                "unknown shift kind {s:?} (expected sudden or incremental)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScenario {
    pub lambda1_a: f64,
    pub lambda1_b: f64,
    pub lambda2_a: f64,
    pub lambda2_b: f64,
    pub kind: ShiftKind,
    pub n_samples: usize,
    pub break_index: usize,
    /// Only used by [`ShiftKind::Incremental`].
    pub ramp_len: usize,
    pub noise_sd: f64,
    /// Emit `x{i}_lag1` columns. The target lag is always present.
    pub lagged_inputs: bool,
    pub seed: u64,
}

impl Default for ShiftScenario {
    fn default() -> Self {
        ShiftScenario {
            lambda1_a: LAMBDA1_A[0],
            lambda1_b: LAMBDA1_B[0],
            lambda2_a: LAMBDA2_A[0],
            lambda2_b: LAMBDA2_B[0],
            kind: ShiftKind::Sudden,
            n_samples: 30000,
            break_index: 20000,
            ramp_len: 5000,
            noise_sd: 0.1,
            lagged_inputs: true,
            seed: 0,
        }
    }
}

impl ShiftScenario {
    /// One of the three representative λ settings (1: large, 2: medium, 3: small).
    pub fn case(kind: ShiftKind, case: u8) -> Result<Self> {
        if !(1..=3).contains(&case) {
            return Err(Error::InvalidParam(format!("case must be 1, 2 or 3, got {case}")));
        }
        let i = (case - 1) as usize;
        Ok(ShiftScenario {
            lambda1_a: LAMBDA1_A[i],
            lambda1_b: LAMBDA1_B[i],
            lambda2_a: LAMBDA2_A[i],
            lambda2_b: LAMBDA2_B[i],
            kind,
            ..Default::default()
        })
    }

    /// Same scenario with the pre-break λ values kept throughout.
    pub fn without_shift(&self) -> Self {
        ShiftScenario {
            lambda1_b: self.lambda1_a,
            lambda2_b: self.lambda2_a,
            ..self.clone()
        }
    }

    pub fn lambdas(&self) -> [f64; 4] {
        [self.lambda1_a, self.lambda1_b, self.lambda2_a, self.lambda2_b]
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas().iter().any(|l| !l.is_finite()) {
            return Err(Error::InvalidParam("lambda values must be finite".into()));
        }
        if self.n_samples < 2 {
            return Err(Error::InvalidParam("n_samples must be >= 2".into()));
        }
        if !(self.noise_sd >= 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::InvalidParam("noise_sd must be finite and >= 0".into()));
        }
        if self.break_index > self.n_samples {
            return Err(Error::InvalidParam("break_index exceeds n_samples".into()));
        }
        if self.kind == ShiftKind::Incremental && self.break_index + self.ramp_len > self.n_samples {
            return Err(Error::InvalidParam(
                "break_index + ramp_len exceeds n_samples".into(),
            ));
        }
        Ok(())
    }

    /// Plain `key=value` lines, one per field.
    pub fn to_meta(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "kind={}", self.kind);
        for (k, v) in [
            ("lambda1_a", self.lambda1_a),
            ("lambda1_b", self.lambda1_b),
            ("lambda2_a", self.lambda2_a),
            ("lambda2_b", self.lambda2_b),
        ] {
            let _ = writeln!(out, "{k}={}", format_f64(v));
        }
        let _ = writeln!(out, "n_samples={}", self.n_samples);
        let _ = writeln!(out, "break_index={}", self.break_index);
        let _ = writeln!(out, "ramp_len={}", self.ramp_len);
        let _ = writeln!(out, "noise_sd={}", format_f64(self.noise_sd));
        let _ = writeln!(out, "lagged_inputs={}", self.lagged_inputs);
        let _ = writeln!(out, "seed={}", self.seed);
        out
    }

    pub fn from_meta(text: &str) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::ModelParse {
                line: i + 1,
                msg: "expected key=value".into(),
            })?;
            kv.insert(k.trim().to_string(), v.trim().to_string());
        }
        let mut take = |k: &str| {
            kv.remove(k)
                .ok_or_else(|| Error::InvalidParam(format!("metadata misses {k}")))
        };
        fn num<T: FromStr>(k: &str, v: String) -> Result<T> {
            v.parse()
                .map_err(|_| Error::InvalidParam(format!("bad value for {k}: {v:?}")))
        }
        let scn = ShiftScenario {
            kind: take("kind")?.parse()?,
            lambda1_a: num("lambda1_a", take("lambda1_a")?)?,
            lambda1_b: num("lambda1_b", take("lambda1_b")?)?,
            lambda2_a: num("lambda2_a", take("lambda2_a")?)?,
            lambda2_b: num("lambda2_b", take("lambda2_b")?)?,
            n_samples: num("n_samples", take("n_samples")?)?,
            break_index: num("break_index", take("break_index")?)?,
            ramp_len: num("ramp_len", take("ramp_len")?)?,
            noise_sd: num("noise_sd", take("noise_sd")?)?,
            lagged_inputs: num("lagged_inputs", take("lagged_inputs")?)?,
            seed: num("seed", take("seed")?)?,
        };
        if let Some(k) = kv.keys().next() {
            return Err(Error::InvalidParam(format!("unknown metadata key {k}")));
        }
        scn.validate()?;
        Ok(scn)
    }
}

/// λ1 (`which == 1`) or λ2 (`which == 2`) at sample `index`.
pub fn lambda_at(scn: &ShiftScenario, which: u8, index: usize) -> Result<f64> {
    if index >= scn.n_samples {
        return Err(Error::OutOfRange {
            index,
            n: scn.n_samples,
        });
    }
    let (a, b) = match which {
        1 => (scn.lambda1_a, scn.lambda1_b),
        2 => (scn.lambda2_a, scn.lambda2_b),
        _ => return Err(Error::InvalidParam(format!("lambda index must be 1 or 2, got {which}"))),
    };
    Ok(lambda_unchecked(scn, a, b, index))
}

fn lambda_unchecked(scn: &ShiftScenario, a: f64, b: f64, index: usize) -> f64 {
    match scn.kind {
        ShiftKind::Sudden => {
            if index < scn.break_index {
                a
            } else {
                b
            }
        }
        ShiftKind::Incremental => {
            if index <= scn.break_index {
                a
            } else if index < scn.break_index + scn.ramp_len {
                ((b - a) * (index - scn.break_index) as f64 + RAMP_SCALE * a) / RAMP_SCALE
            } else {
                b
            }
        }
    }
}

/// The five λ-weighted terms of the target for one input vector.
pub fn signal_terms(x: &[f64], lambda1: f64, lambda2: f64) -> f64 {
    2.0 * x[0] + lambda1 * x[1] * x[1] + 3.0 * (2.0 * PI * x[2]).sin() - 0.4 * x[3]
        + lambda2 * x[4] * x[4]
}

pub fn input_name(i: usize) -> String {
    format!("x{}", i + 1)
}

pub fn lagged_input_name(i: usize) -> String {
    format!("x{}_lag1", i + 1)
}

/// Draws `n_samples` time steps (plus one leading step so the first has a
/// predecessor) and returns `n_samples − 1` rows: row `r` is sample `r + 1`,
/// with the current inputs, the previous inputs and the previous target.
pub fn generate(scn: &ShiftScenario) -> Result<Dataset> {
    scn.validate()?;
    let n = scn.n_samples;
    let mut rng = ChaCha8Rng::seed_from_u64(scn.seed);
    let noise = Normal::new(0.0, scn.noise_sd).map_err(|e| Error::InvalidParam(e.to_string()))?;

    // x[t + 1] holds sample t; x[0] is the step before sample 0.
    let mut x = vec![[0.0f64; N_INPUTS]; n + 1];
    let mut y = vec![0.0; n];
    for v in &mut x[0] {
        *v = rng.random();
    }
    for t in 0..n {
        for v in &mut x[t + 1] {
            *v = rng.random();
        }
        let eps = if scn.noise_sd > 0.0 { noise.sample(&mut rng) } else { 0.0 };
        let l1 = lambda_unchecked(scn, scn.lambda1_a, scn.lambda1_b, t);
        let l2 = lambda_unchecked(scn, scn.lambda2_a, scn.lambda2_b, t);
        y[t] = signal_terms(&x[t + 1], l1, l2) + signal_terms(&x[t], l1, l2) + eps;
    }

    let rows = n - 1;
    let mut names = Vec::with_capacity(2 * N_INPUTS + 1);
    let mut columns = Vec::with_capacity(2 * N_INPUTS + 1);
    for i in 0..N_INPUTS {
        names.push(input_name(i));
        columns.push((1..n).map(|t| x[t + 1][i]).collect::<Vec<_>>());
        if scn.lagged_inputs {
            names.push(lagged_input_name(i));
            columns.push((1..n).map(|t| x[t][i]).collect::<Vec<_>>());
        }
    }
    names.push(TARGET_LAG_NAME.to_string());
    columns.push(y[..rows].to_vec());
    Dataset::new(names, columns, TARGET_NAME, y[1..].to_vec())
}

/// All 81 λ combinations, lexicographic over the grids in declaration order.
pub fn scenario_grid(kind: ShiftKind) -> Vec<ShiftScenario> {
    let mut out = Vec::with_capacity(81);
    for &l1a in &LAMBDA1_A {
        for &l1b in &LAMBDA1_B {
            for &l2a in &LAMBDA2_A {
                for &l2b in &LAMBDA2_B {
                    out.push(ShiftScenario {
                        lambda1_a: l1a,
                        lambda1_b: l1b,
                        lambda2_a: l2a,
                        lambda2_b: l2b,
                        kind,
                        ..Default::default()
                    });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(kind: ShiftKind) -> ShiftScenario {
        ShiftScenario {
            kind,
            n_samples: 400,
            break_index: 200,
            ramp_len: 100,
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn sudden_step() {
        let s = ShiftScenario::case(ShiftKind::Sudden, 2).unwrap();
        assert_eq!(lambda_at(&s, 1, 19999).unwrap(), -1.0);
        assert_eq!(lambda_at(&s, 1, 20000).unwrap(), -0.4);
        assert_eq!(lambda_at(&s, 2, 0).unwrap(), 1.0);
        assert!(lambda_at(&s, 1, 30000).is_err());
        assert!(lambda_at(&s, 3, 0).is_err());
    }

    #[test]
    fn incremental_ramp() {
        let s = ShiftScenario::case(ShiftKind::Incremental, 2).unwrap();
        assert!((lambda_at(&s, 1, 22500).unwrap() - -0.85).abs() < 1e-12);
        assert_eq!(lambda_at(&s, 1, 20000).unwrap(), -1.0);
        assert_eq!(lambda_at(&s, 1, 25000).unwrap(), -0.4);
        // last ramp step sits near the midpoint, not near λb
        assert!((lambda_at(&s, 1, 24999).unwrap() - -0.70006).abs() < 1e-9);
    }

    #[test]
    fn shape_and_ranges() {
        let ds = generate(&small(ShiftKind::Sudden)).unwrap();
        assert_eq!(ds.n_rows(), 399);
        assert_eq!(ds.n_features(), 21);
        assert_eq!(ds.target_name(), "y");
        for (name, col) in ds.feature_names().iter().zip(ds.columns()) {
            if name.starts_with('x') {
                assert!(col.iter().all(|v| (0.0..=1.0).contains(v)), "{name}");
            }
        }
        assert!(ds.target().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn lag_columns_line_up() {
        let ds = generate(&small(ShiftKind::Sudden)).unwrap();
        let x1 = ds.column("x1").unwrap();
        let x1_lag = ds.column("x1_lag1").unwrap();
        let y = ds.target();
        let y_lag = ds.column("y_lag1").unwrap();
        for r in 1..ds.n_rows() {
            assert_eq!(x1_lag[r], x1[r - 1]);
            assert_eq!(y_lag[r], y[r - 1]);
        }
    }

    #[test]
    fn noise_free_target_is_formula() {
        let mut s = small(ShiftKind::Incremental);
        s.noise_sd = 0.0;
        let ds = generate(&s).unwrap();
        let col = |n: &str| ds.column(n).unwrap().to_vec();
        let cur: Vec<Vec<f64>> = (1..=5).map(|i| col(&format!("x{i}"))).collect();
        let lag: Vec<Vec<f64>> = (1..=5).map(|i| col(&format!("x{i}_lag1"))).collect();
        for r in [0, 150, 199, 200, 250, 298, 299, 398] {
            let t = r + 1;
            let l1 = lambda_at(&s, 1, t).unwrap();
            let l2 = lambda_at(&s, 2, t).unwrap();
            let term = |v: &Vec<Vec<f64>>| {
                2.0 * v[0][r] + l1 * v[1][r].powi(2) + 3.0 * (2.0 * PI * v[2][r]).sin() - 0.4 * v[3][r]
                    + l2 * v[4][r].powi(2)
            };
            let expected = term(&cur) + term(&lag);
            assert!((ds.target()[r] - expected).abs() < 1e-12, "row {r}");
        }
    }

    #[test]
    fn zero_inputs_give_zero() {
        assert_eq!(signal_terms(&[0.0; 10], -10.0, 10.0), 0.0);
    }

    #[test]
    fn deterministic() {
        let a = generate(&small(ShiftKind::Sudden)).unwrap();
        let b = generate(&small(ShiftKind::Sudden)).unwrap();
        assert_eq!(a.to_csv_string(), b.to_csv_string());
    }

    #[test]
    fn grid_order() {
        let g = scenario_grid(ShiftKind::Sudden);
        assert_eq!(g.len(), 81);
        assert_eq!(g[0].lambdas(), [-10.0, -4.0, 10.0, -25.0]);
        assert!(g.iter().any(|s| s.lambdas() == [-0.1, -0.04, 0.1, -0.25]));
        assert_eq!(g[80].lambdas(), [-0.1, -0.04, 0.1, -0.25]);
    }

    #[test]
    fn without_lagged_inputs() {
        let full = generate(&small(ShiftKind::Sudden)).unwrap();
        let s = ShiftScenario {
            lagged_inputs: false,
            ..small(ShiftKind::Sudden)
        };
        let short = generate(&s).unwrap();
        assert_eq!(short.n_features(), N_INPUTS + 1);
        assert_eq!(short.target(), full.target());
        assert_eq!(short.column("y_lag1").unwrap(), full.column("y_lag1").unwrap());
        assert_eq!(short.column("x7").unwrap(), full.column("x7").unwrap());
        assert!(short.column("x7_lag1").is_err());
    }

    #[test]
    fn meta_round_trip() {
        let s = small(ShiftKind::Incremental);
        assert_eq!(ShiftScenario::from_meta(&s.to_meta()).unwrap(), s);
        assert!(ShiftScenario::from_meta("kind=sudden\n").is_err());
        assert!(ShiftScenario::from_meta(&format!("{}extra=1\n", s.to_meta())).is_err());
    }

    #[test]
    fn invalid_layouts() {
        let mut s = small(ShiftKind::Incremental);
        s.ramp_len = 300;
        assert!(generate(&s).is_err());
        assert!(ShiftScenario::case(ShiftKind::Sudden, 4).is_err());
        assert!("gradual".parse::<ShiftKind>().is_err());
    }
}
