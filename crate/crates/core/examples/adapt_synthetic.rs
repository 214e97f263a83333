//! Full iterative adaptation on the benchmark pair, with artifacts on disk.
//!
//! cargo run --release --example adapt_synthetic -- [run_dir]

use iterlnl::blackbox::wrap_as_blackbox;
use iterlnl::data::{make_synthetic_pair, ShiftSpec};
use iterlnl::eval::evaluate_model;
use iterlnl::iterative::{run_iterlnl, IterConfig};
use iterlnl::lnl::LnlConfig;
use iterlnl::model::{train_source, TrainConfig};
use iterlnl::report::generate_report;

fn main() -> iterlnl::Result<()> {
    let run_dir = std::env::args().nth(1).unwrap_or_else(|| "runs/adapt_synthetic".into());
    let (source, target) = make_synthetic_pair(&ShiftSpec::unbalanced_benchmark())?;
    let fs = train_source(&source, &TrainConfig { hidden: vec![], ..TrainConfig::default() })?;
    println!("source model on target: {:.4}", evaluate_model(&fs, &target)?.accuracy);

    let cfg = IterConfig {
        steps: 3,
        lnl: LnlConfig {
            iterations: 4000,
            hidden: vec![64, 32],
            ..LnlConfig::default()
        },
        early_stop_tolerance: None,
        run_dir: Some(run_dir.clone().into()),
        ..IterConfig::default()
    };
    let out = run_iterlnl(&wrap_as_blackbox(fs), &target, &cfg)?;
    println!(" m  eps_est  label_acc  model_acc");
    for r in &out.trace {
        println!(
            "{:>2}  {:.4}   {:.4}     {:.4}",
            r.step,
            r.epsilon_est,
            r.label_accuracy.unwrap_or(f64::NAN),
            r.model_accuracy.unwrap_or(f64::NAN)
        );
    }

    let report_dir = std::path::Path::new(&run_dir).join("report");
    let summary = generate_report(run_dir.as_ref(), Some(&target), &report_dir)?;
    println!("{} report files in {}", summary.written.len(), report_dir.display());
    Ok(())
}
