//! Classification accuracy, confusion matrix and per-class statistics.

use std::fmt::Write as _;

use serde::Serialize;

use crate::data::CLASS_NAMES;
use crate::error::{Error, Result};

/// Fraction of positions where prediction equals truth.
pub fn accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    check_lengths(y_true, y_pred)?;
    let hits = y_true.iter().zip(y_pred).filter(|(t, p)| t == p).count();
    Ok(hits as f64 / y_true.len() as f64)
}

fn check_lengths(y_true: &[usize], y_pred: &[usize]) -> Result<()> {
    if y_true.len() != y_pred.len() {
        return Err(Error::Input(format!(
            "{} true labels vs {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    if y_true.is_empty() {
        return Err(Error::Input("no samples".into()));
    }
    Ok(())
}

/// `counts[t][p]`: samples of true class `t` predicted as `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    n: u64,
}

impl ConfusionMatrix {
    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, truth: usize, predicted: usize) -> u64 {
        self.counts[truth][predicted]
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.n
    }

    pub fn trace(&self) -> u64 {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn row_sum(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn column_sum(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    /// Header row of class names, then one row of counts per true class.
    /// Column names beyond the canonical set fall back to `class_<i>`.
    pub fn to_csv(&self) -> String {
        let names: Vec<String> = (0..self.num_classes()).map(class_name).collect();
        let mut out = names.join(",");
        out.push('\n');
        for row in &self.counts {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }
}

fn class_name(i: usize) -> String {
    CLASS_NAMES
        .get(i)
        .map_or_else(|| format!("class_{i}"), |s| s.to_string())
}

pub fn confusion(y_true: &[usize], y_pred: &[usize], num_classes: usize) -> Result<ConfusionMatrix> {
    check_lengths(y_true, y_pred)?;
    let mut counts = vec![vec![0u64; num_classes]; num_classes];
    for (&t, &p) in y_true.iter().zip(y_pred) {
        for index in [t, p] {
            if index >= num_classes {
                return Err(Error::Label { index, num_classes });
            }
        }
        counts[t][p] += 1;
    }
    Ok(ConfusionMatrix {
        counts,
        n: y_true.len() as u64,
    })
}

/// One-vs-rest counts and scores for a class. Ratios with a zero denominator
/// are reported as 0.0 and flagged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassStats {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub tn: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub precision_undefined: bool,
    pub recall_undefined: bool,
    pub f1_undefined: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerClassStats {
    pub classes: Vec<ClassStats>,
}

fn ratio(num: u64, den: u64) -> (f64, bool) {
    if den == 0 {
        (0.0, true)
    } else {
        (num as f64 / den as f64, false)
    }
}

pub fn per_class_stats(cm: &ConfusionMatrix) -> PerClassStats {
    let n = cm.total();
    let classes = (0..cm.num_classes())
        .map(|c| {
            let tp = cm.get(c, c);
            let fp = cm.column_sum(c) - tp;
            let fn_ = cm.row_sum(c) - tp;
            let tn = n - tp - fp - fn_;
            let (precision, precision_undefined) = ratio(tp, tp + fp);
            let (recall, recall_undefined) = ratio(tp, tp + fn_);
            let (f1, f1_undefined) = if precision + recall > 0.0 {
                (2.0 * precision * recall / (precision + recall), false)
            } else {
                (0.0, true)
            };
            ClassStats {
                tp,
                fp,
                fn_,
                tn,
                precision,
                recall,
                f1,
                precision_undefined,
                recall_undefined,
                f1_undefined,
            }
        })
        .collect();
    PerClassStats { classes }
}

impl PerClassStats {
    /// Micro-averaged precision `Σtp / Σ(tp + fp)`.
    pub fn micro_precision(&self) -> f64 {
        let tp: u64 = self.classes.iter().map(|c| c.tp).sum();
        let fp: u64 = self.classes.iter().map(|c| c.fp).sum();
        ratio(tp, tp + fp).0
    }

    /// Micro-averaged recall `Σtp / Σ(tp + fn)`.
    pub fn micro_recall(&self) -> f64 {
        let tp: u64 = self.classes.iter().map(|c| c.tp).sum();
        let fn_: u64 = self.classes.iter().map(|c| c.fn_).sum();
        ratio(tp, tp + fn_).0
    }

    /// JSON object keyed by class name, in class order.
    pub fn to_json(&self) -> String {
        let mut map = serde_json::Map::new();
        for (i, stats) in self.classes.iter().enumerate() {
            map.insert(
                class_name(i),
                serde_json::to_value(stats).expect("stats serialize"),
            );
        }
        serde_json::to_string_pretty(&serde_json::Value::Object(map)).expect("json") + "\n"
    }
}
