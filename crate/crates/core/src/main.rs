use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use symparts::pipeline::{cmd_detect, cmd_eval, cmd_synth, cmd_train, PipelineConfig, Preset};
use symparts::Result;

#[derive(Parser)]
#[command(name = "symparts", version, about = "Detect symmetric parts with deformable discs")]
struct Cli {
    /// JSON config; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// ellipse+clustering, ellipse+sequences, deform+sequences or deform+unsmooth.
    #[arg(long, global = true)]
    preset: Option<Preset>,
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long, global = true)]
    top_n: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = one per CPU).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the affinity model on a corpus.
    Train { corpus: PathBuf },
    /// Detect parts in one image.
    Detect {
        image: PathBuf,
        /// Also write label planes, disc boundaries and warped edgels.
        #[arg(long)]
        debug: bool,
    },
    /// Evaluate on an annotated dataset.
    Eval { dataset: PathBuf },
    /// Write a synthetic corpus.
    Synth {
        #[arg(long)]
        count: Option<usize>,
    },
}

fn resolve(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(p) = cli.preset {
        p.apply(&mut cfg);
    }
    if let Some(m) = &cli.model {
        cfg.model = Some(m.clone());
    }
    if cli.top_n.is_some() {
        cfg.top_n = cli.top_n;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if let Command::Synth { count: Some(c) } = cli.command {
        cfg.count = c;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = resolve(cli)?;
    match &cli.command {
        Command::Train { corpus } => {
            let path = cmd_train(&cfg, corpus, &cli.out)?;
            println!("model written to {}", path.display());
        }
        Command::Detect { image, debug } => {
            let masks = cmd_detect(&cfg, image, &cli.out, *debug)?;
            println!("{} detections written to {}", masks.len(), cli.out.display());
        }
        Command::Eval { dataset } => {
            let curve = cmd_eval(&cfg, dataset, &cli.out)?;
            println!(
                "AP {:.4}, recall {:.4} ({} detections, {} parts)",
                curve.average_precision,
                curve.final_recall(),
                curve.n_detections,
                curve.n_ground_truth
            );
        }
        Command::Synth { .. } => {
            cmd_synth(&cfg, &cli.out)?;
            println!("{} scenes written to {}", cfg.count, cli.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
