// Train on the bundled toy corpus, evaluate on its held-out half, and
// reload the checkpoint.
//
// ```bash
// cargo run --release -p lcr-rot --example train_synthetic
// ```

use lcr_rot::corpus::load_examples;
use lcr_rot::embeddings::EmbeddingTable;
use lcr_rot::eval::evaluate;
use lcr_rot::model::{EmbeddedExample, ModelConfig, Variant};
use lcr_rot::rng::{self, streams};
use lcr_rot::training::{load_checkpoint, save_checkpoint, train, Checkpoint, Hyperparams};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

pub fn run() -> lcr_rot::Result<()> {
    let train_set = load_examples(&std::fs::read_to_string(format!("{DATA}/synthetic_train.txt"))?)?;
    let test_set = load_examples(&std::fs::read_to_string(format!("{DATA}/synthetic_test.txt"))?)?;
    let hp = Hyperparams {
        batch_size: 5,
        max_epochs: 200,
        ..Hyperparams::default()
    };

    // No pretrained file: every token gets a seeded random row.
    let mut table = EmbeddingTable::new(16);
    let mut emb_rng = rng::stream(hp.seed, streams::EMBEDDINGS);
    let tr = EmbeddedExample::embed_all(&train_set, &mut table, &mut emb_rng);
    let te = EmbeddedExample::embed_all(&test_set, &mut table, &mut emb_rng);

    let out = train(&tr, Some(&te), ModelConfig::new(Variant::LcrRot, 16, 8), &hp)?;
    for m in out.log.iter().filter(|m| m.epoch % 25 == 0) {
        println!("{m}");
    }
    let best = out.best.as_ref().expect("dev set given");
    println!("best held-out accuracy {:.3} at epoch {}", best.dev_acc, best.epoch);

    let dir = std::env::temp_dir().join("lcr-rot-example");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("synthetic.ck");
    save_checkpoint(&path, &Checkpoint::new(out.model.clone(), hp, Some(&table)))?;
    let reloaded = load_checkpoint(&path)?;
    let acc = evaluate(&reloaded.model, &te)?.accuracy;
    println!("reloaded {} -> held-out accuracy {acc:.3}", path.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
