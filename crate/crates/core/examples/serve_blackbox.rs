//! Seal a model behind HTTP and query it like any other black box.

use iterlnl::blackbox::{serve_model, wrap_as_blackbox, BlackBoxHandle, RemoteOptions};
use iterlnl::model::ClassifierModel;
use ndarray::Array2;

fn main() -> iterlnl::Result<()> {
    let model = ClassifierModel::init(&[4, 16, 3], 42)?;
    let server = serve_model(model.clone(), "127.0.0.1:0")?;
    println!("serving on {}", server.url());

    let remote = BlackBoxHandle::remote(&server.url(), RemoteOptions::default())?;
    let batch = Array2::from_shape_fn((5, 4), |(i, j)| (i as f64 - 2.0) * 0.5 + j as f64 * 0.1);
    let probs = remote.predict_batch(batch.view())?;
    for row in probs.rows() {
        println!("{:?}", row.iter().map(|p| format!("{p:.4}")).collect::<Vec<_>>());
    }

    let local = wrap_as_blackbox(model).predict_batch(batch.view())?;
    let diff = (&local - &probs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("max difference from in-process predictions: {diff:.1e}");

    // Wrong input width is refused by the server, not silently padded.
    match remote.predict_batch(Array2::<f64>::zeros((1, 7)).view()) {
        Err(e) => println!("7-wide input rejected: {e}"),
        Ok(_) => println!("unexpected success"),
    }
    server.shutdown();
    Ok(())
}
