//! Final test accuracy of each rule under each attack on the 2-class blobs task.
//!
//! Usage: cargo run --release -p dstar-core --example desk_scale [seed] [n_b] [separation]

use dstar_core::aggregation::Gar;
use dstar_core::simulator::{run_experiment, AttackName, DatasetSpec, ExperimentConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let seed: u64 = args.get(1).map_or(0, |s| s.parse().unwrap());
    let n_b: usize = args.get(2).map_or(16, |s| s.parse().unwrap());
    let sep: f64 = args.get(3).map_or(4.0, |s| s.parse().unwrap());
    for gar in [Gar::Dstar, Gar::Average, Gar::Trmean, Gar::Median, Gar::Krum] {
        for attack in AttackName::ALL {
            let mut cfg = ExperimentConfig::blobs_default(25, 8, 8, 500, gar);
            cfg.seed = seed;
            cfg.n_b = n_b;
            cfg.attack = attack;
            cfg.dataset = DatasetSpec::Blobs { n: 10_000, p: 20, classes: 2, separation: sep };
            match run_experiment(&cfg) {
                Ok(recs) => {
                    let last = recs.last().unwrap();
                    let accepted: usize = recs.iter().map(|r| r.n_accepted).sum();
                    let skipped = recs.iter().filter(|r| !r.updated).count();
                    println!(
                        "{:>7} {:>7}  acc={:.4}  loss={:.4}  mean_accepted={:.2}  skipped={skipped}",
                        gar.name(),
                        attack.name(),
                        last.accuracy.unwrap(),
                        last.loss,
                        accepted as f64 / recs.len() as f64
                    );
                }
                Err(e) => println!("{:>7} {:>7}  error: {e}", gar.name(), attack.name()),
            }
        }
    }
}
