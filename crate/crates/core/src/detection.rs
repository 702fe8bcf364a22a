//! Residual-based sensor interpolation: every sensor is predicted from all
//! the others by a linear least-squares fit, and a time step is suspicious
//! when some sensor strays from its prediction by more than its threshold.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scada::GroundTruthEvent;

/// Floor for every threshold.
pub const THRESHOLD_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DetectionError {
    #[error("need at least {needed} training rows, got {rows}")]
    InsufficientData { rows: usize, needed: usize },
    #[error("expected {expected} columns, got {found}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("margin must be finite and > 0, got {0}")]
    InvalidMargin(f64),
}

/// Missing readings are replaced by the last observed value of the same
/// column; a gap at the start takes `fill[j]`.
pub fn impute(rows: &[Vec<Option<f64>>], fill: &[f64]) -> Vec<Vec<f64>> {
    let mut last: Vec<f64> = fill.to_vec();
    rows.iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(j, v)| {
                    if let Some(v) = v {
                        last[j] = *v;
                    }
                    last[j]
                })
                .collect()
        })
        .collect()
}

/// Mean of the observed values per column (0 for a column with none).
pub fn column_means(rows: &[Vec<Option<f64>>], columns: usize) -> Vec<f64> {
    (0..columns)
        .map(|j| {
            let (s, n) = rows
                .iter()
                .filter_map(|r| r[j])
                .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
            if n == 0 {
                0.0
            } else {
                s / n as f64
            }
        })
        .collect()
}

/// Linear predictor of one sensor from the others, kept in standardized
/// coordinates: `mean_y + Σ_j w_j · (x_j − mean_j) / scale_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorPredictor {
    pub target: usize,
    pub target_mean: f64,
    /// One entry per column; the target's own entry is zero.
    pub weights: Vec<f64>,
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl SensorPredictor {
    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut y = self.target_mean;
        for j in 0..x.len() {
            if self.weights[j] != 0.0 {
                y += self.weights[j] * (x[j] - self.means[j]) / self.scales[j];
            }
        }
        y
    }

    /// Coefficients and intercept in the original units.
    pub fn coefficients(&self) -> (Vec<f64>, f64) {
        let beta: Vec<f64> = (0..self.weights.len())
            .map(|j| {
                if self.weights[j] == 0.0 {
                    0.0
                } else {
                    self.weights[j] / self.scales[j]
                }
            })
            .collect();
        let intercept = self.target_mean - beta.iter().zip(&self.means).map(|(b, m)| b * m).sum::<f64>();
        (beta, intercept)
    }
}

/// Fitted detector: one predictor and one threshold per sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorInterpolationDetector {
    pub predictors: Vec<SensorPredictor>,
    pub thresholds: Vec<f64>,
    /// Column means of the training data, used to fill leading gaps.
    pub train_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectionResult {
    /// Row indices into the data passed to `apply`, ascending.
    pub suspicious_time_indices: Vec<usize>,
    /// `residuals[i][t]` = prediction − reading for sensor `i`.
    pub residuals: Vec<Vec<f64>>,
}

impl SensorInterpolationDetector {
    /// Fits with the default 10% threshold margin.
    pub fn fit(train: &[Vec<Option<f64>>]) -> Result<Self, DetectionError> {
        Self::fit_with_margin(train, 0.1)
    }

    pub fn fit_with_margin(train: &[Vec<Option<f64>>], margin: f64) -> Result<Self, DetectionError> {
        if !(margin.is_finite() && margin > 0.0) {
            return Err(DetectionError::InvalidMargin(margin));
        }
        let n = train.first().map_or(0, Vec::len);
        if let Some(bad) = train.iter().find(|r| r.len() != n) {
            return Err(DetectionError::ColumnMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let rows = train.len();
        if rows < n + 1 || rows == 0 {
            return Err(DetectionError::InsufficientData { rows, needed: n + 1 });
        }
        let train_means = column_means(train, n);
        let x = impute(train, &train_means);

        let means: Vec<f64> = (0..n)
            .map(|j| x.iter().map(|r| r[j]).sum::<f64>() / rows as f64)
            .collect();
        let scales: Vec<f64> = (0..n)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - means[j]).powi(2)).sum::<f64>() / rows as f64;
                var.sqrt()
            })
            .collect();
        let z = DMatrix::from_fn(rows, n, |t, j| {
            if scales[j] > 0.0 {
                (x[t][j] - means[j]) / scales[j]
            } else {
                0.0
            }
        });

        let mut predictors = Vec::with_capacity(n);
        let mut thresholds = Vec::with_capacity(n);
        for i in 0..n {
            let others: Vec<usize> = (0..n).filter(|&j| j != i && scales[j] > 0.0).collect();
            let mut weights = vec![0.0; n];
            if scales[i] > 0.0 && !others.is_empty() {
                let a = z.select_columns(&others);
                let b = DVector::from_fn(rows, |t, _| x[t][i] - means[i]);
                let svd = a.svd(true, true);
                let tol = svd.singular_values.max() * 1e-10;
                let w = svd.solve(&b, tol).expect("u and v were computed");
                for (k, &j) in others.iter().enumerate() {
                    weights[j] = w[k];
                }
            }
            let p = SensorPredictor {
                target: i,
                target_mean: means[i],
                weights,
                means: means.clone(),
                scales: scales.iter().map(|s| if *s > 0.0 { *s } else { 1.0 }).collect(),
            };
            let worst = x.iter().map(|r| (p.predict(r) - r[i]).abs()).fold(0.0, f64::max);
            thresholds.push(THRESHOLD_FLOOR.max((1.0 + margin) * worst));
            predictors.push(p);
        }
        Ok(Self {
            predictors,
            thresholds,
            train_means,
        })
    }

    pub fn sensor_count(&self) -> usize {
        self.thresholds.len()
    }

    /// Flags row `t` when some sensor's residual magnitude exceeds its
    /// threshold.
    pub fn apply(&self, test: &[Vec<Option<f64>>]) -> Result<DetectionResult, DetectionError> {
        self.apply_scaled(test, 1.0)
    }

    /// Like [`apply`](Self::apply) with every threshold multiplied by
    /// `factor`.
    pub fn apply_scaled(&self, test: &[Vec<Option<f64>>], factor: f64) -> Result<DetectionResult, DetectionError> {
        let n = self.sensor_count();
        if let Some(bad) = test.iter().find(|r| r.len() != n) {
            return Err(DetectionError::ColumnMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        let x = impute(test, &self.train_means);
        let mut residuals = vec![Vec::with_capacity(x.len()); n];
        let mut flagged = Vec::new();
        for (t, row) in x.iter().enumerate() {
            let mut alarm = false;
            for (i, p) in self.predictors.iter().enumerate() {
                let r = p.predict(row) - row[i];
                alarm |= r.abs() > factor * self.thresholds[i];
                residuals[i].push(r);
            }
            if alarm {
                flagged.push(t);
            }
        }
        Ok(DetectionResult {
            suspicious_time_indices: flagged,
            residuals,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventDetection {
    pub event_id: String,
    pub start_s: u64,
    pub end_s: u64,
    pub detected: bool,
    /// First flagged time inside the window minus its start.
    pub delay_s: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub true_positives: usize,
    pub false_positives: usize,
    pub true_negatives: usize,
    pub false_negatives: usize,
    pub tpr: f64,
    pub fpr: f64,
    pub precision: f64,
    pub f1: f64,
    pub events: Vec<EventDetection>,
}

impl Metrics {
    /// `key=value` lines.
    pub fn report(&self) -> String {
        let mut s = format!(
            "true_positives={}\nfalse_positives={}\ntrue_negatives={}\nfalse_negatives={}\ntpr={}\nfpr={}\nprecision={}\nf1={}\n",
            self.true_positives,
            self.false_positives,
            self.true_negatives,
            self.false_negatives,
            self.tpr,
            self.fpr,
            self.precision,
            self.f1
        );
        for e in &self.events {
            match e.delay_s {
                Some(d) => s.push_str(&format!("event.{}.delay_s={d}\n", e.event_id)),
                None => s.push_str(&format!("event.{}.detected=false\n", e.event_id)),
            }
        }
        s
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Scores flagged rows against labelled windows. `times[t]` is the time of
/// row `t` of the data the result came from; a row is positive when it lies
/// inside any window.
pub fn evaluate(result: &DetectionResult, truth: &[GroundTruthEvent], times: &[u64]) -> Metrics {
    let mut flagged = vec![false; times.len()];
    for &t in &result.suspicious_time_indices {
        if t < flagged.len() {
            flagged[t] = true;
        }
    }
    let inside = |t: u64, e: &GroundTruthEvent| e.start_s <= t && t < e.end_s;
    let (mut tp, mut fp, mut tn, mut fn_) = (0, 0, 0, 0);
    for (k, &t) in times.iter().enumerate() {
        let positive = truth.iter().any(|e| inside(t, e));
        match (positive, flagged[k]) {
            (true, true) => tp += 1,
            (true, false) => fn_ += 1,
            (false, true) => fp += 1,
            (false, false) => tn += 1,
        }
    }
    let tpr = ratio(tp, tp + fn_);
    let precision = ratio(tp, tp + fp);
    let f1 = if precision + tpr > 0.0 {
        2.0 * precision * tpr / (precision + tpr)
    } else {
        0.0
    };
    let events = truth
        .iter()
        .map(|e| {
            let first = times.iter().zip(&flagged).find(|(t, f)| **f && inside(**t, e));
            EventDetection {
                event_id: e.event_id.clone(),
                start_s: e.start_s,
                end_s: e.end_s,
                detected: first.is_some(),
                delay_s: first.map(|(t, _)| t - e.start_s),
            }
        })
        .collect();
    Metrics {
        true_positives: tp,
        false_positives: fp,
        true_negatives: tn,
        false_negatives: fn_,
        tpr,
        fpr: ratio(fp, fp + tn),
        precision,
        f1,
        events,
    }
}
