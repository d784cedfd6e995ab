// Pretrained vectors plus seeded rows for unseen tokens.
//
// ```bash
// cargo run -p lcr-rot --example embeddings
// ```

use std::io::Cursor;

use lcr_rot::embeddings::EmbeddingTable;
use lcr_rot::rng::{self, streams};

const VECTORS: &str = "\
good 0.30 0.10 -0.20
bad -0.40 0.05 0.10
Battery 0.02 0.70 0.11
";

pub fn run() -> lcr_rot::Result<()> {
    let mut table = EmbeddingTable::load_pretrained(Cursor::new(VECTORS), 3)?;
    println!("{} pretrained rows of dimension {}", table.len(), table.dim());

    let mut rng = rng::stream(7, streams::EMBEDDINGS);
    for tok in ["battery", "zorbly", "ZORBLY", "good"] {
        let row = table.lookup(tok, &mut rng).to_vec();
        println!("{tok:<8} oov={:<5} {row:.4?}", table.is_oov(tok));
    }

    // Same seed, same order: the unseen row is drawn identically.
    let mut again = EmbeddingTable::load_pretrained(Cursor::new(VECTORS), 3)?;
    let mut rng = rng::stream(7, streams::EMBEDDINGS);
    again.lookup("battery", &mut rng);
    assert_eq!(again.lookup("zorbly", &mut rng), table.get("zorbly").unwrap());
    println!("unseen rows reproduce under the same seed");
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
