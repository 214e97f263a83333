//! Estimate the noise rate of a black box's labels without target labels,
//! then compare against the truth and the with-validation estimate.

use std::sync::Arc;

use iterlnl::blackbox::wrap_as_blackbox;
use iterlnl::data::{make_synthetic_pair, ShiftSpec};
use iterlnl::lnl::{empirical_noise_rate, estimate_noise_rate, high_conf_proportion, noisy_labeling, rescale, LnlConfig};
use iterlnl::model::{train_source, TrainConfig};

fn main() -> iterlnl::Result<()> {
    let (source, target) = make_synthetic_pair(&ShiftSpec::unbalanced_benchmark())?;
    let model = train_source(&source, &TrainConfig { hidden: vec![], ..TrainConfig::default() })?;
    let handle = wrap_as_blackbox(model);

    let labeling = noisy_labeling(&handle, &target)?;
    let truth = empirical_noise_rate(&labeling, target.evaluation_labels())?;
    println!("true noise rate        {truth:.4}");

    for gamma in [0.8, 0.9, 0.95] {
        let rho = high_conf_proportion(&labeling, gamma);
        println!("gamma {gamma}: rho' {rho:.4}  eps(no rescale) {:.4}  eps(kappa 2) {:.4}", 1.0 - rho, 1.0 - rescale(rho, 2.0));
    }

    let (val, _) = target.stratified_holdout(30, 1)?;
    let cfg = LnlConfig {
        validation_set: Some(Arc::new(val)),
        ..LnlConfig::default()
    };
    let est = estimate_noise_rate(&labeling, &cfg, Some(&handle))?;
    println!("with 30 labels/class   {:.4}", est.epsilon);
    Ok(())
}
