//! Regenerates the bundled synthetic corpora under `data/`.

use std::path::Path;

use abusenet::synth::{desk_corpus, glove_to_text, overfit_corpus, synthetic_glove, to_tsv, DESK_SIZE};

const DESK_SEED: u64 = 2019;
const DESK_NOISE: f64 = 0.05;
const GLOVE_DIM: usize = 50;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("overfit.tsv"), to_tsv(&overfit_corpus()))?;
    std::fs::write(dir.join("desk.tsv"), to_tsv(&desk_corpus(DESK_SEED, DESK_SIZE, DESK_NOISE)))?;
    std::fs::write(dir.join("desk_glove.txt"), glove_to_text(&synthetic_glove(GLOVE_DIM, DESK_SEED)))?;
    println!("wrote {}", dir.display());
    Ok(())
}
