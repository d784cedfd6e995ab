// Train briefly, then export one example's attention weights as JSON and
// as an HTML page.
//
// ```bash
// cargo run --release -p lcr-rot --example attention_viz
// ```

use lcr_rot::corpus::load_examples;
use lcr_rot::embeddings::EmbeddingTable;
use lcr_rot::eval::{attention_export, ExportFormat};
use lcr_rot::model::{EmbeddedExample, ModelConfig, Variant};
use lcr_rot::rng::{self, streams};
use lcr_rot::training::{train, Hyperparams};

const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data");

pub fn run() -> lcr_rot::Result<()> {
    let examples = load_examples(&std::fs::read_to_string(format!("{DATA}/synthetic_train.txt"))?)?;
    let hp = Hyperparams {
        batch_size: 5,
        max_epochs: 300,
        ..Hyperparams::default()
    };
    let mut table = EmbeddingTable::new(16);
    let embedded = EmbeddedExample::embed_all(&examples, &mut table, &mut rng::stream(hp.seed, streams::EMBEDDINGS));
    let model = train(&embedded, None, ModelConfig::new(Variant::LcrRot, 16, 8), &hp)?.model;

    let export = attention_export(&model, &examples[1], &embedded[1])?;
    print!("{}", export.render(ExportFormat::Json));

    let path = std::env::temp_dir().join("lcr-rot-attention.html");
    std::fs::write(&path, export.render(ExportFormat::Html))?;
    println!("html written to {}", path.display());
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
