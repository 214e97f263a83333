//! MNIST to USPS with IDX files.
//!
//! cargo run --release --example digits_idx -- <dir>
//!
//! `<dir>` holds `train-images-idx3-ubyte`, `train-labels-idx1-ubyte` and USPS
//! converted to the same format as `usps-images-idx3-ubyte` /
//! `usps-labels-idx1-ubyte`. USPS is resized to 28×28.

use iterlnl::blackbox::wrap_as_blackbox;
use iterlnl::data::{load_idx, resize_images, subsample, DatasetSplit, Normalizer};
use iterlnl::eval::evaluate_model;
use iterlnl::iterative::{run_iterlnl, IterConfig};
use iterlnl::lnl::LnlConfig;
use iterlnl::model::{train_source, TrainConfig};

fn main() -> iterlnl::Result<()> {
    let Some(dir) = std::env::args().nth(1).map(std::path::PathBuf::from) else {
        eprintln!("usage: digits_idx <dir with MNIST and USPS IDX files>");
        std::process::exit(2);
    };
    let mnist = subsample(
        &load_idx(dir.join("train-images-idx3-ubyte"), dir.join("train-labels-idx1-ubyte"))?,
        10_000,
        0,
    );
    let usps = load_idx(dir.join("usps-images-idx3-ubyte"), dir.join("usps-labels-idx1-ubyte"))?;
    let side = (usps.dim() as f64).sqrt().round() as usize;
    let usps_px = resize_images(usps.features(), side, 28)?;

    let norm = Normalizer::fit(mnist.features());
    let source = DatasetSplit::new(norm.apply(mnist.features()), mnist.training_labels().map(<[usize]>::to_vec), 10)?;
    let target = DatasetSplit::new(norm.apply(&usps_px), usps.evaluation_labels().map(<[usize]>::to_vec), 10)?.hide_labels();

    let fs = train_source(&source, &TrainConfig { iterations: 3000, ..TrainConfig::default() })?;
    println!("source only: {:.4}", evaluate_model(&fs, &target)?.accuracy);
    let cfg = IterConfig {
        steps: 3,
        lnl: LnlConfig { iterations: 3000, ..LnlConfig::default() },
        ..IterConfig::default()
    };
    let out = run_iterlnl(&wrap_as_blackbox(fs), &target, &cfg)?;
    for r in &out.trace {
        println!("step {} eps {:.3} label acc {:.4} model acc {:.4}", r.step, r.epsilon_est, r.label_accuracy.unwrap(), r.model_accuracy.unwrap());
    }
    Ok(())
}
