//! Generate the benchmark source/target pair and show how far apart they are.
//!
//! cargo run --example gen_data -- [out_dir]

use iterlnl::data::{make_synthetic_pair, write_csv, ShiftSpec};

fn main() -> iterlnl::Result<()> {
    let spec = ShiftSpec::unbalanced_benchmark();
    let (source, target) = make_synthetic_pair(&spec)?;
    println!("source: {} rows, target: {} rows, d={}, k={}", source.len(), target.len(), source.dim(), source.k());

    // Mean of the first coordinate moves by the translation (in source-normalized units).
    let mean0 = |s: &iterlnl::data::DatasetSplit| s.features().column(0).mean().unwrap();
    println!("mean of x0: source {:+.3}, target {:+.3}", mean0(&source), mean0(&target));
    println!("target labels usable for training: {}", target.training_labels().is_some());

    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir).map_err(|e| iterlnl::Error::Data(e.to_string()))?;
        write_csv(&source, format!("{dir}/source.csv"), true)?;
        write_csv(&target, format!("{dir}/target.csv"), false)?;
        println!("wrote {dir}/source.csv and {dir}/target.csv");
    }
    Ok(())
}
