//! Accuracy, per-class accuracy and label transition matrices.

use std::fmt::Write as _;

use crate::blackbox::BlackBoxHandle;
use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::model::{argmax, ClassifierModel};

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Samples per true class.
    pub support: Vec<usize>,
    /// Diagonal of the transition matrix; `None` for classes without samples.
    pub per_class: Vec<Option<f64>>,
    /// Row `r`, column `c`: share of true-class-`r` samples predicted as `c`.
    pub transition: Vec<Option<Vec<f64>>>,
}

impl Evaluation {
    /// Per-class error `1 - acc_r`.
    pub fn per_class_noise(&self) -> Vec<Option<f64>> {
        self.per_class.iter().map(|a| a.map(|a| 1.0 - a)).collect()
    }

    /// `true_class,p0,…,p{K-1}`; rows without support have empty cells.
    pub fn transition_csv(&self, provenance: &str) -> String {
        let k = self.support.len();
        let mut out = format!("# {provenance}\ntrue_class");
        for c in 0..k {
            let _ = write!(out, ",p{c}");
        }
        out.push('\n');
        for (r, row) in self.transition.iter().enumerate() {
            let _ = write!(out, "{r}");
            match row {
                Some(row) => row.iter().for_each(|v| {
                    let _ = write!(out, ",{v:?}");
                }),
                None => out.push_str(&",".repeat(k)),
            }
            out.push('\n');
        }
        out
    }

    /// Human-readable matrix with two decimals.
    pub fn render_table(&self) -> String {
        let k = self.support.len();
        let mut out = String::from("true\\pred");
        for c in 0..k {
            let _ = write!(out, " {c:>5}");
        }
        out.push_str("    n\n");
        for (r, row) in self.transition.iter().enumerate() {
            let _ = write!(out, "{r:>9}");
            match row {
                Some(row) => row.iter().for_each(|v| {
                    let _ = write!(out, " {v:>5.2}");
                }),
                None => out.push_str(&"     -".repeat(k)),
            }
            let _ = writeln!(out, " {:>4}", self.support[r]);
        }
        let _ = writeln!(out, "accuracy {:.4}", self.accuracy);
        out
    }
}

/// Score predicted labels against ground truth over `k` classes.
pub fn evaluate_labels(predicted: &[usize], truth: &[usize], k: usize) -> Result<Evaluation> {
    if predicted.len() != truth.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} labels",
            predicted.len(),
            truth.len()
        )));
    }
    if truth.is_empty() {
        return Err(Error::Data("cannot evaluate an empty split".into()));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in predicted.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::Data(format!("label out of range for k={k}")));
        }
        counts[t][p] += 1;
    }
    let support: Vec<usize> = counts.iter().map(|r| r.iter().sum()).collect();
    let transition: Vec<Option<Vec<f64>>> = counts
        .iter()
        .zip(&support)
        .map(|(row, &n)| (n > 0).then(|| row.iter().map(|&c| c as f64 / n as f64).collect()))
        .collect();
    let per_class = transition
        .iter()
        .enumerate()
        .map(|(r, row)| row.as_ref().map(|row| row[r]))
        .collect();
    let correct: usize = (0..k).map(|r| counts[r][r]).sum();
    Ok(Evaluation {
        accuracy: correct as f64 / truth.len() as f64,
        support,
        per_class,
        transition,
    })
}

fn split_truth(split: &DatasetSplit) -> Result<&[usize]> {
    split
        .evaluation_labels()
        .ok_or_else(|| Error::Data("evaluation needs a labeled split".into()))
}

pub fn evaluate(handle: &BlackBoxHandle, split: &DatasetSplit) -> Result<Evaluation> {
    let truth = split_truth(split)?;
    let probs = handle.predict_batch(split.features().view())?;
    let predicted: Vec<usize> = probs
        .rows()
        .into_iter()
        .map(|r| argmax(&r.to_vec()))
        .collect();
    evaluate_labels(&predicted, truth, split.k())
}

pub fn evaluate_model(model: &ClassifierModel, split: &DatasetSplit) -> Result<Evaluation> {
    let truth = split_truth(split)?;
    evaluate_labels(&model.predict_labels(split.features().view())?, truth, split.k())
}
