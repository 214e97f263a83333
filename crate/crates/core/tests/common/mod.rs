#![allow(dead_code)]

use std::io::Write as _;

use iterlnl::data::{make_synthetic_pair, DatasetSplit, ShiftSpec};
use iterlnl::iterative::IterConfig;
use iterlnl::lnl::LnlConfig;
use iterlnl::model::{train_source, ClassifierModel, TrainConfig};

/// Benchmark pair plus its linear source model. The target keeps its labels
/// for scoring only.
pub struct Fixture {
    pub source: DatasetSplit,
    pub target: DatasetSplit,
    pub source_model: ClassifierModel,
}

pub fn source_train_config() -> TrainConfig {
    TrainConfig {
        hidden: vec![],
        iterations: 2000,
        seed: 0,
        ..TrainConfig::default()
    }
}

pub fn fixture() -> Fixture {
    let (source, target) = make_synthetic_pair(&ShiftSpec::unbalanced_benchmark()).unwrap();
    let source_model = train_source(&source, &source_train_config()).unwrap();
    Fixture {
        source,
        target,
        source_model,
    }
}

/// Target-side settings for the fixture; early stopping is off so every run
/// takes exactly `steps` steps.
pub fn fixture_config(steps: usize) -> IterConfig {
    IterConfig {
        steps,
        lnl: LnlConfig {
            iterations: 4000,
            hidden: vec![64, 32],
            ..LnlConfig::default()
        },
        early_stop_tolerance: None,
        seed: 0,
        ..IterConfig::default()
    }
}

/// One uncaptured status line, visible without `--nocapture`.
pub fn status(line: &str) {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}
