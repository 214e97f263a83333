//! CSV artifacts of a run and the report built from them.
//!
//! Every CSV written here starts with a `# seed=…, config-hash=…` comment
//! line followed by a header row.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::data::DatasetSplit;
use crate::error::{Error, Result};
use crate::eval::{evaluate_labels, evaluate_model, Evaluation};
use crate::iterative::{step_dir, StepRecord};
use crate::lnl::NoisyLabeling;
use crate::model::load_checkpoint;

pub fn provenance(seed: u64, config_hash: &str) -> String {
    format!("seed={seed}, config-hash={config_hash}")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Data rows of one of our CSVs: comment lines and the header dropped.
fn data_rows(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty())
        .skip(1)
        .map(|(i, l)| (i + 1, l.split(',').collect()))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

pub fn labeling_csv(labeling: &NoisyLabeling, provenance: &str) -> String {
    let mut out = format!("# {provenance}\nindex,label,max_conf\n");
    for (i, (y, c)) in labeling.labels().iter().zip(labeling.max_conf()).enumerate() {
        let _ = writeln!(out, "{i},{y},{c:?}");
    }
    out
}

pub fn write_labeling_csv(labeling: &NoisyLabeling, path: impl AsRef<Path>, provenance: &str) -> Result<()> {
    write_file(path.as_ref(), &labeling_csv(labeling, provenance))
}

/// `(label, max_conf)` per row of a persisted labeling.
pub fn read_labeling_csv(path: impl AsRef<Path>) -> Result<Vec<(usize, f64)>> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let mut out = Vec::new();
    for (line, cells) in data_rows(&text) {
        if cells.len() != 3 {
            return Err(parse_err(path, line, "expected index,label,max_conf"));
        }
        let idx: usize = cells[0].parse().map_err(|_| parse_err(path, line, "bad index"))?;
        if idx != out.len() {
            return Err(parse_err(path, line, format!("index {idx} out of sequence")));
        }
        let y = cells[1].parse().map_err(|_| parse_err(path, line, "bad label"))?;
        let c = cells[2].parse().map_err(|_| parse_err(path, line, "bad max_conf"))?;
        out.push((y, c));
    }
    Ok(out)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:?}")).unwrap_or_default()
}

pub fn trace_csv(trace: &[StepRecord], provenance: &str) -> String {
    let mut out = format!("# {provenance}\nm,epsilon_est,label_acc,model_acc,checkpoint\n");
    for r in trace {
        let ckpt = r
            .checkpoint
            .as_ref()
            .and_then(|p| p.parent().and_then(|d| d.file_name()).map(|d| Path::new(d).join("model.ckpt")))
            .map(|p| p.display().to_string())
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{:?},{},{},{}",
            r.step,
            r.epsilon_est,
            opt(r.label_accuracy),
            opt(r.model_accuracy),
            ckpt
        );
    }
    out
}

pub fn write_trace_csv(trace: &[StepRecord], path: impl AsRef<Path>, provenance: &str) -> Result<()> {
    write_file(path.as_ref(), &trace_csv(trace, provenance))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: usize,
    pub epsilon_est: f64,
    pub label_accuracy: Option<f64>,
    pub model_accuracy: Option<f64>,
    /// Relative to the run directory.
    pub checkpoint: Option<PathBuf>,
}

/// Rows of `trace.csv` and its provenance comment (without the leading `# `).
pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<(Vec<TraceRow>, String)> {
    let path = path.as_ref();
    let text = read_file(path)?;
    let provenance = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# "))
        .unwrap_or("")
        .to_string();
    let num = |s: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| parse_err(path, line, format!("bad number {s:?}")))
        }
    };
    let mut rows = Vec::new();
    for (line, cells) in data_rows(&text) {
        if cells.len() != 5 {
            return Err(parse_err(path, line, "expected 5 columns"));
        }
        rows.push(TraceRow {
            step: cells[0].parse().map_err(|_| parse_err(path, line, "bad step"))?,
            epsilon_est: num(cells[1], line)?.ok_or_else(|| parse_err(path, line, "missing epsilon"))?,
            label_accuracy: num(cells[2], line)?,
            model_accuracy: num(cells[3], line)?,
            checkpoint: (!cells[4].is_empty()).then(|| PathBuf::from(cells[4])),
        });
    }
    Ok((rows, provenance))
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReportSummary {
    pub written: Vec<PathBuf>,
    pub notices: Vec<String>,
    /// Noisy-label evaluation per step, when ground truth was supplied.
    pub label_evaluations: Vec<Evaluation>,
}

/// Build transition matrices and ε / accuracy curves from a run directory.
///
/// Without `eval` (or when it has no labels) only the ε curve is produced.
pub fn generate_report(run_dir: &Path, eval: Option<&DatasetSplit>, out_dir: &Path) -> Result<ReportSummary> {
    let trace_path = run_dir.join("trace.csv");
    if !trace_path.exists() {
        return Err(Error::MissingArtifact(trace_path.display().to_string()));
    }
    let (rows, prov) = read_trace_csv(&trace_path)?;
    let mut missing = Vec::new();
    for r in &rows {
        let sd = step_dir(run_dir, r.step);
        for name in ["labeling.csv", "model.ckpt"] {
            if !sd.join(name).exists() {
                missing.push(sd.join(name).display().to_string());
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::MissingArtifact(missing.join(", ")));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut summary = ReportSummary::default();

    let mut eps = format!("# {prov}\nm,epsilon_est\n");
    for r in &rows {
        let _ = writeln!(eps, "{},{:?}", r.step, r.epsilon_est);
    }
    let p = out_dir.join("epsilon_curve.csv");
    write_file(&p, &eps)?;
    summary.written.push(p);

    let truth = eval.and_then(|e| e.evaluation_labels().map(|t| (e, t)));
    let Some((split, truth)) = truth else {
        summary
            .notices
            .push("no labeled evaluation split; transition matrices and accuracy curve skipped".into());
        return Ok(summary);
    };

    let mut acc = format!("# {prov}\nm,label_acc,model_acc\n");
    for r in &rows {
        let sd = step_dir(run_dir, r.step);
        let labels: Vec<usize> = read_labeling_csv(sd.join("labeling.csv"))?
            .into_iter()
            .map(|(y, _)| y)
            .collect();
        let ev = evaluate_labels(&labels, truth, split.k())?;
        for row in ev.transition.iter().flatten() {
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-9 {
                return Err(Error::Data(format!("transition row sums to {s} at step {}", r.step)));
            }
        }
        let p = out_dir.join(format!("transition_step_{}.csv", r.step));
        write_file(&p, &ev.transition_csv(&prov))?;
        summary.written.push(p);

        let model = load_checkpoint(sd.join("model.ckpt"))?;
        let model_acc = evaluate_model(&model, split)?.accuracy;
        let _ = writeln!(acc, "{},{:?},{:?}", r.step, ev.accuracy, model_acc);
        summary.label_evaluations.push(ev);
    }
    let p = out_dir.join("accuracy_curve.csv");
    write_file(&p, &acc)?;
    summary.written.push(p);
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn labeling_round_trip() {
        let l = NoisyLabeling::from_probs(array![[0.2, 0.8], [0.6, 0.4]]);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("l.csv");
        write_labeling_csv(&l, &p, "seed=1, config-hash=ab").unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("# seed=1, config-hash=ab\nindex,label,max_conf\n"));
        assert_eq!(read_labeling_csv(&p).unwrap(), vec![(1, 0.8), (0, 0.6)]);
    }

    #[test]
    fn missing_trace_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let err = generate_report(dir.path(), None, dir.path()).unwrap_err();
        assert!(matches!(err, Error::MissingArtifact(ref s) if s.contains("trace.csv")));
    }
}
