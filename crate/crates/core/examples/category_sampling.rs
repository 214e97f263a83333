//! Per-class loss buffers and the keep schedule on a toy loss stream.
//!
//! Class 0 produces small losses, class 1 large ones. A single global buffer
//! rejects almost all of class 1; per-class buffers keep a share of both.

use iterlnl::lnl::{accept_sample, keep_ratio, CategoryBuffers};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> iterlnl::Result<()> {
    let (h, eps, n_k) = (50, 0.4, 100.0);
    for n in [0, 25, 50, 100, 200] {
        println!("R({n}) = {:.3}", keep_ratio(n, n_k, eps));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut per_class = CategoryBuffers::new(2, h)?;
    let mut global = CategoryBuffers::new(1, h)?;
    let mut kept = [[0usize; 2]; 2];
    let mut seen = [0usize; 2];
    for n in 0..400 {
        let r = keep_ratio(n, n_k, eps);
        let class = rng.random_range(0..2);
        let loss: f64 = if class == 0 { rng.random_range(0.0..0.5) } else { rng.random_range(0.4..2.0) };
        if n >= 200 {
            seen[class] += 1;
            kept[0][class] += accept_sample(loss, &per_class, class, r) as usize;
            kept[1][class] += accept_sample(loss, &global, 0, r) as usize;
        }
        per_class.push(class, loss);
        global.push(0, loss);
    }
    for (name, k) in ["per-class", "global"].iter().zip(kept) {
        println!(
            "{name:>9}: kept {:.2} of class 0, {:.2} of class 1",
            k[0] as f64 / seen[0] as f64,
            k[1] as f64 / seen[1] as f64
        );
    }
    Ok(())
}
