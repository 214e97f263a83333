//! Train a source classifier, checkpoint it, and check the round trip.

use iterlnl::data::{make_synthetic_pair, ShiftSpec};
use iterlnl::eval::evaluate_model;
use iterlnl::model::{read_checkpoint, train_source, write_checkpoint, TrainConfig};

fn main() -> iterlnl::Result<()> {
    let (source, target) = make_synthetic_pair(&ShiftSpec::unbalanced_benchmark())?;
    let cfg = TrainConfig {
        hidden: vec![],
        ..TrainConfig::default()
    };
    let model = train_source(&source, &cfg)?;
    println!("params: {}", model.param_count());
    println!("source accuracy {:.4}", evaluate_model(&model, &source)?.accuracy);

    let target_eval = evaluate_model(&model, &target)?;
    println!("target accuracy {:.4}", target_eval.accuracy);
    print!("{}", target_eval.render_table());

    let bytes = write_checkpoint(&model);
    let back = read_checkpoint(&bytes)?;
    assert_eq!(back, model);
    println!("checkpoint: {} bytes, round trip exact", bytes.len());
    Ok(())
}
