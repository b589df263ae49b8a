//! Loading a word-embedding table and looking words up.
//!
//! ```text
//! cargo run --example embeddings
//! ```

use linkner::embeddings::{CaseFallback, BOUNDARY_TOKEN};
use linkner::EmbeddingTable;

const TABLE: &str = "\
4 3
the 0.1 0.0 -0.2
paris 0.7 0.3 0.1
Paris 0.9 0.4 0.0
mayor 0.2 -0.5 0.3
";

fn main() -> linkner::Result<()> {
    let table = EmbeddingTable::parse(TABLE, "inline")?;
    println!("{} words, dimension {}", table.len(), table.dim());

    for word in ["Paris", "PARIS", "The", "Zanzibar", BOUNDARY_TOKEN] {
        let i = table.index_of(word);
        let kind = if i == table.unk_index() {
            "UNK"
        } else if i == table.pad_index() {
            "PAD"
        } else {
            table.words()[i].as_str()
        };
        println!("{word:>10} -> {kind:<6} {:?}", table.lookup(word));
    }

    // case-sensitive only: "The" no longer falls back to "the"
    let strict = table.with_fallback(CaseFallback::None);
    println!(
        "strict: The -> unk? {}",
        strict.index_of("The") == strict.unk_index()
    );
    Ok(())
}
