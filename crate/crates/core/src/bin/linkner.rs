use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use linkner::pipeline::{self, ConfigLayer, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "linkner",
    version,
    about = "Build and evaluate link-supervised NER taggers"
)]
struct Cli {
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(flatten)]
    flags: Flags,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    #[arg(long, global = true)]
    embeddings: Option<PathBuf>,
    #[arg(long, global = true)]
    kb: Option<PathBuf>,
    #[arg(long, global = true)]
    redirects: Option<PathBuf>,
    #[arg(long, global = true)]
    corpus: Option<PathBuf>,
    #[arg(long, global = true)]
    labeled: Option<PathBuf>,
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Target fraction of positive examples after oversampling.
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Window half-width n (window size 2n+1).
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    hidden: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Expected embedding dimension.
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Most frequent vocabulary words excluded from surface matching.
    #[arg(long, global = true)]
    exclude_top: Option<usize>,
    #[arg(long, global = true)]
    init_scale: Option<f64>,
    #[arg(long, global = true)]
    batch_size: Option<usize>,
    #[arg(long, global = true)]
    no_surface_match: bool,
    #[arg(long, global = true)]
    no_oversample: bool,
}

impl Flags {
    fn layer(&self) -> ConfigLayer {
        ConfigLayer {
            embeddings: self.embeddings.clone(),
            kb: self.kb.clone(),
            redirects: self.redirects.clone(),
            corpus: self.corpus.clone(),
            labeled: self.labeled.clone(),
            dataset: self.dataset.clone(),
            model: self.model.clone(),
            rho: self.rho,
            window: self.window,
            hidden: self.hidden,
            epochs: self.epochs,
            exclude_top: self.exclude_top,
            seed: self.seed,
            dim: self.dim,
            init_scale: self.init_scale,
            epsilon: None,
            batch_size: self.batch_size,
            surface_match: self.no_surface_match.then_some(false),
            oversample: self.no_oversample.then_some(false),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Label the article corpus from links and write CoNLL (--labeled).
    Extract,
    /// Write window examples to --dataset (debug format).
    Build,
    /// Train a model on the labeled corpus and write it to --model.
    Train,
    /// Tag a token-per-line file with --model.
    Tag {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Exact-match F1 of predictions against gold.
    Eval {
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
    },
    /// Omission/addition errors between aligned source and target files.
    DistantEval {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Write the TSV report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> linkner::Result<()> {
    let mut config = PipelineConfig::default();
    if let Some(path) = &cli.config {
        config = config.apply(&ConfigLayer::load(path)?);
    }
    let config = config.apply(&cli.flags.layer());
    config.validate()?;
    eprintln!("# resolved config\n{}", config.to_toml());

    match cli.command {
        Command::Extract => {
            let r = pipeline::extract(&config)?;
            println!(
                "articles {}\ttokens {}\tentity tokens {} (links only {})\tphrase coverage {:.4}",
                r.articles, r.tokens, r.entity_tokens, r.link_entity_tokens, r.coverage
            );
        }
        Command::Build => {
            let ds = pipeline::build(&config)?;
            println!("examples {}\trho {:.4}", ds.len(), ds.rho());
        }
        Command::Train => {
            let (_, r) = pipeline::train_model(&config)?;
            println!("examples {}\trho {:.4}", r.examples, r.rho);
            for (i, l) in r.epoch_losses.iter().enumerate() {
                println!("epoch {}\tloss {l:.6}", i + 1);
            }
        }
        Command::Tag { input, output } => pipeline::tag_file(&config, &input, &output)?,
        Command::Eval { gold, pred } => {
            print!("{}", pipeline::eval_files(&gold, &pred)?.to_table());
        }
        Command::DistantEval {
            source,
            target,
            report,
        } => {
            let tsv = pipeline::distant_files(&source, &target)?.to_tsv();
            match report {
                Some(p) => std::fs::write(&p, tsv).map_err(|e| linkner::Error::Io {
                    path: p.clone(),
                    source: e,
                })?,
                None => print!("{tsv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
