mod common;

use ndarray::Array2;

use common::{fixture, fixture_config};
use iterlnl::blackbox::wrap_as_blackbox;
use iterlnl::data::{make_synthetic_pair, ShiftSpec};
use iterlnl::eval::{evaluate, evaluate_model};
use iterlnl::iterative::{run_iterlnl, step_dir, IterConfig, ReinitPolicy};
use iterlnl::lnl::{empirical_noise_rate, noisy_labeling, run_lnl, LnlConfig};
use iterlnl::model::{load_checkpoint, train_source, ClassifierModel, TrainConfig};
use iterlnl::report::{generate_report, read_labeling_csv, read_trace_csv};

fn small_lnl() -> LnlConfig {
    LnlConfig {
        iterations: 300,
        hidden: vec![16],
        ..LnlConfig::default()
    }
}

#[test]
fn shifted_target_is_harder_than_source() {
    let fx = fixture();
    let handle = wrap_as_blackbox(fx.source_model.clone());
    let src = evaluate(&handle, &fx.source).unwrap().accuracy;
    let labeling = noisy_labeling(&handle, &fx.target).unwrap();
    let label_acc = 1.0 - empirical_noise_rate(&labeling, fx.target.evaluation_labels()).unwrap();
    assert!(label_acc < src, "target {label_acc} vs source {src}");
}

#[test]
fn benchmark_noise_is_unbalanced_across_classes() {
    let fx = fixture();
    let ev = evaluate_model(&fx.source_model, &fx.target).unwrap();
    let noise: Vec<f64> = ev.per_class_noise().into_iter().flatten().collect();
    let lo = noise.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = noise.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert!(lo < 0.2 && hi > 0.9, "per-class noise {noise:?}");
}

#[test]
fn separable_source_is_learned() {
    let spec = ShiftSpec {
        k: 2,
        d: 2,
        n_source: 400,
        n_target: 10,
        translation: vec![],
        rotation: 0.0,
        spread: 0.3,
        mean_scale: 3.0,
        seed: 7,
    };
    let (source, _) = make_synthetic_pair(&spec).unwrap();
    let cfg = TrainConfig {
        hidden: vec![8],
        iterations: 500,
        ..TrainConfig::default()
    };
    let model = train_source(&source, &cfg).unwrap();
    assert!(evaluate_model(&model, &source).unwrap().accuracy >= 0.99);
    assert_eq!(model, train_source(&source, &cfg).unwrap());
}

#[test]
fn hidden_target_labels_are_not_trainable() {
    let fx = fixture();
    assert!(train_source(&fx.target, &TrainConfig::default()).is_err());
}

#[test]
fn single_step_matches_plain_lnl() {
    let fx = fixture();
    let handle = wrap_as_blackbox(fx.source_model.clone());
    let cfg = IterConfig {
        steps: 1,
        lnl: small_lnl(),
        seed: 11,
        ..IterConfig::default()
    };
    let out = run_iterlnl(&handle, &fx.target, &cfg).unwrap();
    let (model, metrics) = run_lnl(&handle, &fx.target, &cfg.lnl, cfg.step_seed(1)).unwrap();
    assert_eq!(out.trace.len(), 1);
    assert_eq!(out.model, model);
    assert_eq!(out.metrics[0].labeling_checksum, metrics.labeling_checksum);
}

#[test]
fn later_steps_label_with_the_previous_model() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let cfg = IterConfig {
        steps: 2,
        lnl: small_lnl(),
        early_stop_tolerance: None,
        run_dir: Some(dir.path().to_path_buf()),
        ..IterConfig::default()
    };
    let out = run_iterlnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &cfg).unwrap();
    assert_eq!(out.trace[1].label_accuracy, out.trace[0].model_accuracy);

    // Recompute the step-2 labels from the persisted step-1 checkpoint.
    let step1 = load_checkpoint(step_dir(dir.path(), 1).join("model.ckpt")).unwrap();
    let expected = step1.predict_labels(fx.target.features().view()).unwrap();
    let stored: Vec<usize> = read_labeling_csv(step_dir(dir.path(), 2).join("labeling.csv"))
        .unwrap()
        .into_iter()
        .map(|(y, _)| y)
        .collect();
    assert_eq!(stored, expected);

    let (rows, prov) = read_trace_csv(dir.path().join("trace.csv")).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(prov.starts_with("seed=0, config-hash="));
    assert_eq!(rows[1].checkpoint.as_deref(), Some(std::path::Path::new("step_2/model.ckpt")));
}

#[test]
fn labeling_is_unchanged_by_training() {
    let fx = fixture();
    let handle = wrap_as_blackbox(fx.source_model.clone());
    let before = noisy_labeling(&handle, &fx.target).unwrap();
    let (_, metrics) = run_lnl(&handle, &fx.target, &small_lnl(), 0).unwrap();
    assert_eq!(before.checksum(), metrics.labeling_checksum);
    assert_eq!(before.checksum(), noisy_labeling(&handle, &fx.target).unwrap().checksum());
}

#[test]
fn zero_noise_override_keeps_everything() {
    let fx = fixture();
    let cfg = LnlConfig {
        noise_rate_override: Some(0.0),
        ..small_lnl()
    };
    let (_, metrics) = run_lnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &cfg, 0).unwrap();
    for it in &metrics.iterations {
        assert_eq!(it.keep_ratio, 1.0);
    }
}

#[test]
fn zero_iterations_return_the_initial_model() {
    let fx = fixture();
    let cfg = LnlConfig {
        iterations: 0,
        ..small_lnl()
    };
    let (model, metrics) = run_lnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &cfg, 3).unwrap();
    assert!(metrics.iterations.is_empty());
    assert_eq!(model, ClassifierModel::init(&[10, 16, 6], 3).unwrap());
}

#[test]
fn lnl_beats_its_input_labels_on_the_benchmark() {
    let fx = fixture();
    let out = run_iterlnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &fixture_config(1)).unwrap();
    let r = &out.trace[0];
    assert!(r.model_accuracy.unwrap() > r.label_accuracy.unwrap());
}

#[test]
fn warm_start_and_early_stop() {
    let fx = fixture();
    let cfg = IterConfig {
        steps: 4,
        lnl: small_lnl(),
        reinit: ReinitPolicy::WarmStart,
        early_stop_tolerance: Some(1.0),
        ..IterConfig::default()
    };
    let out = run_iterlnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &cfg).unwrap();
    // Any change below 1.0 counts as a plateau, so step 2 is the last.
    assert_eq!(out.trace.len(), 2);
    assert!(out.trace.iter().all(|r| (0.0..=1.0).contains(&r.epsilon_est)));
}

#[test]
fn report_from_a_run_directory() {
    let fx = fixture();
    let dir = tempfile::tempdir().unwrap();
    let cfg = IterConfig {
        steps: 3,
        lnl: small_lnl(),
        early_stop_tolerance: None,
        run_dir: Some(dir.path().join("run")),
        ..IterConfig::default()
    };
    run_iterlnl(&wrap_as_blackbox(fx.source_model.clone()), &fx.target, &cfg).unwrap();
    let out = dir.path().join("report");
    let summary = generate_report(&dir.path().join("run"), Some(&fx.target), &out).unwrap();
    assert_eq!(summary.written.len(), 5);
    assert_eq!(summary.label_evaluations.len(), 3);
    for m in 1..=3 {
        let text = std::fs::read_to_string(out.join(format!("transition_step_{m}.csv"))).unwrap();
        assert!(text.starts_with("# seed=0, config-hash="));
        for line in text.lines().skip(2) {
            let sum: f64 = line.split(',').skip(1).map(|v| v.parse::<f64>().unwrap()).sum();
            assert!((sum - 1.0).abs() <= 1e-9);
        }
    }

    let unlabeled = fx.target.clone().without_labels();
    let summary = generate_report(&dir.path().join("run"), Some(&unlabeled), &dir.path().join("r2")).unwrap();
    assert_eq!(summary.written.len(), 1);
    assert_eq!(summary.notices.len(), 1);

    std::fs::remove_file(step_dir(&dir.path().join("run"), 2).join("model.ckpt")).unwrap();
    let err = generate_report(&dir.path().join("run"), None, &out).unwrap_err();
    assert!(err.to_string().contains("step_2"), "{err}");
}

#[test]
fn unlabeled_evaluation_is_rejected() {
    let m = ClassifierModel::init(&[2, 3], 0).unwrap();
    let split = iterlnl::data::DatasetSplit::unlabeled(Array2::zeros((4, 2)), 3).unwrap();
    assert!(evaluate_model(&m, &split).is_err());
}
