//! Full IterLNL against its ablations on the benchmark pair.

use iterlnl::blackbox::wrap_as_blackbox;
use iterlnl::data::{make_synthetic_pair, ShiftSpec};
use iterlnl::eval::evaluate_model;
use iterlnl::iterative::{run_iterlnl, IterConfig};
use iterlnl::lnl::LnlConfig;
use iterlnl::model::{train_source, TrainConfig};

fn main() -> iterlnl::Result<()> {
    let (source, target) = make_synthetic_pair(&ShiftSpec::unbalanced_benchmark())?;
    let (val, _) = target.stratified_holdout(30, 0)?;
    let fs = train_source(&source, &TrainConfig { hidden: vec![], ..TrainConfig::default() })?;
    let handle = wrap_as_blackbox(fs.clone());
    let base = IterConfig {
        steps: 3,
        lnl: LnlConfig {
            iterations: 4000,
            hidden: vec![64, 32],
            ..LnlConfig::default()
        },
        early_stop_tolerance: None,
        ..IterConfig::default()
    };

    let mut variants: Vec<(&str, IterConfig)> = vec![("IterLNL", base.clone())];
    let mut c = base.clone();
    c.steps = 1;
    variants.push(("w/o Iter", c));
    let mut c = base.clone();
    c.lnl.no_category_sampling = true;
    variants.push(("w/o CateS", c));
    let mut c = base.clone();
    c.lnl.no_rescale = true;
    variants.push(("w/o Rescale", c));
    let mut c = base.clone();
    c.lnl.validation_set = Some(std::sync::Arc::new(val));
    variants.push(("with Val", c));

    let src = evaluate_model(&fs, &target)?;
    let fmt = |v: &[Option<f64>]| v.iter().map(|a| format!("{:6.1}", 100.0 * a.unwrap_or(f64::NAN))).collect::<String>();
    println!("{:<12} {:>6}  per class", "variant", "acc");
    println!("{:<12} {:>6.1}  {}", "source only", 100.0 * src.accuracy, fmt(&src.per_class));
    for (name, cfg) in variants {
        let out = run_iterlnl(&handle, &target, &cfg)?;
        let ev = evaluate_model(&out.model, &target)?;
        println!("{name:<12} {:>6.1}  {}", 100.0 * ev.accuracy, fmt(&ev.per_class));
    }
    Ok(())
}
