// All five variants on the toy corpus with shared seeds, plus a paired
// t-test of each against the full model.
//
// ```bash
// cargo run --release -p lcr-rot --example ablation
// ```

use lcr_rot::corpus::load_examples;
use lcr_rot::embeddings::EmbeddingTable;
use lcr_rot::eval::{accuracy, paired_t_test};
use lcr_rot::model::{EmbeddedExample, ModelConfig, Variant};
use lcr_rot::rng::{self, streams};
use lcr_rot::training::{train, Hyperparams};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");
const SEEDS: [u64; 3] = [1, 2, 3];

pub fn run() -> lcr_rot::Result<()> {
    let train_set = load_examples(&std::fs::read_to_string(format!("{DATA}/synthetic_train.txt"))?)?;
    let test_set = load_examples(&std::fs::read_to_string(format!("{DATA}/synthetic_test.txt"))?)?;

    let mut results: Vec<(Variant, Vec<f64>)> = Vec::new();
    for variant in Variant::ALL {
        let mut accs = Vec::new();
        for seed in SEEDS {
            let hp = Hyperparams {
                seed,
                batch_size: 5,
                max_epochs: 150,
                ..Hyperparams::default()
            };
            let mut table = EmbeddingTable::new(8);
            let mut emb_rng = rng::stream(seed, streams::EMBEDDINGS);
            let tr = EmbeddedExample::embed_all(&train_set, &mut table, &mut emb_rng);
            let te = EmbeddedExample::embed_all(&test_set, &mut table, &mut emb_rng);
            let out = train(&tr, None, ModelConfig::new(variant, 8, 4), &hp)?;
            accs.push(accuracy(&out.model, &te)?);
        }
        println!("{:<20} {:.3?}", variant.name(), accs);
        results.push((variant, accs));
    }
    let base = &results[0].1;
    for (v, accs) in &results[1..] {
        match paired_t_test(base, accs) {
            Ok(t) => println!("lcr-rot vs {v}: {t}"),
            Err(e) => println!("lcr-rot vs {v}: {e}"),
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
