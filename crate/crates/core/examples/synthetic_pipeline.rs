//! The whole file-based pipeline on a generated corpus: extract, train, tag,
//! eval, with and without oversampling.
//!
//! ```text
//! cargo run --release --example synthetic_pipeline [output-dir]
//! ```
//!
//! Without an argument everything goes to a temporary directory. With one,
//! the generated inputs stay around and can be fed to the `linkner` binary.

use std::path::PathBuf;

use linkner::pipeline::{self, PipelineConfig};
use linkner::synth::{SynthConfig, SyntheticCorpus};

fn main() -> linkner::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let tmp = tempfile::tempdir().expect("temporary directory");
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| tmp.path().to_path_buf());

    let world = SyntheticCorpus::generate(&SynthConfig::default());
    let paths = world.write_to(&dir)?;
    let base = PipelineConfig {
        embeddings: Some(paths.embeddings.clone()),
        kb: Some(paths.kb.clone()),
        redirects: Some(paths.redirects.clone()),
        corpus: Some(paths.corpus.clone()),
        labeled: Some(dir.join("labeled.conll")),
        exclude_top: world.function_words,
        hidden: 32,
        seed: Some(7),
        ..PipelineConfig::default()
    };
    println!("{}", base.to_toml());

    let report = pipeline::extract(&base)?;
    println!(
        "extract: {} articles, {} tokens, {} entity tokens ({} from links), coverage {:.4}",
        report.articles,
        report.tokens,
        report.entity_tokens,
        report.link_entity_tokens,
        report.coverage
    );

    for oversample in [true, false] {
        let name = if oversample { "oversampled" } else { "natural" };
        let cfg = PipelineConfig {
            oversample,
            model: Some(dir.join(format!("{name}.model"))),
            ..base.clone()
        };
        let (_, train) = pipeline::train_model(&cfg)?;
        let pred = dir.join(format!("{name}.pred.conll"));
        pipeline::tag_file(&cfg, &paths.test_gold, &pred)?;
        let f1 = pipeline::eval_files(&paths.test_gold, &pred)?;
        println!(
            "\n{name}: {} examples, rho {:.3}",
            train.examples, train.rho
        );
        print!("{}", f1.to_table());
    }
    Ok(())
}
