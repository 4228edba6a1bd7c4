mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use config::RunConfig;
use qkad::eval::sweep::Metric;
use qkad::{GammaRule, KernelKind, Regime};

/// Quantum-kernel one-class anomaly detection on acoustic AR features.
#[derive(Parser, Debug)]
#[command(name = "qkad", version)]
struct Cli {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "QKAD_THREADS")]
    threads: Option<usize>,

    #[command(flatten)]
    overrides: Overrides,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long, global = true)]
    regime: Option<Regime>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    segment_seconds: Option<f64>,
    #[arg(long, global = true)]
    d_min: Option<usize>,
    #[arg(long, global = true)]
    d_max: Option<usize>,
    /// Comma-separated kernel list, e.g. `qk1,rbf`.
    #[arg(long, global = true, value_delimiter = ',')]
    kernels: Option<Vec<KernelKind>>,
    #[arg(long, global = true)]
    layers: Option<usize>,
    #[arg(long, global = true)]
    angle_scale: Option<f64>,
    #[arg(long, global = true)]
    nu: Option<f64>,
    /// `auto` (1/d) or a positive number.
    #[arg(long, global = true)]
    gamma: Option<GammaRule>,
    #[arg(long, global = true)]
    snr_db: Option<f64>,
    /// Dataset directory.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output directory; for `synth` the dataset directory to create.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic dataset: WAV segments plus manifest.csv.
    Synth,
    /// Extract AR(d) features for every segment of a dataset.
    Features {
        #[arg(long)]
        d: usize,
    },
    /// Train a detector on the normal training split.
    Train {
        #[arg(long)]
        kernel: Option<KernelKind>,
        #[arg(long)]
        d: usize,
    },
    /// Score the test split with a trained model.
    Score {
        #[arg(long)]
        model: PathBuf,
        /// Score every segment instead of the test split.
        #[arg(long)]
        all: bool,
    },
    /// Feature-count sweep over every configured kernel.
    Sweep,
    /// Paired t-test between two sweep tables.
    Ttest {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "f1")]
        metric: Metric,
        /// Kernel to read from `a` when it holds several.
        #[arg(long)]
        kernel_a: Option<KernelKind>,
        #[arg(long)]
        kernel_b: Option<KernelKind>,
    },
    /// Decision-function grid over two features of a trained model.
    Grid {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0)]
        feature_x: usize,
        #[arg(long, default_value_t = 1)]
        feature_y: usize,
        #[arg(long, default_value_t = 50)]
        resolution: usize,
    },
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident => $target:expr),* $(,)?) => {
                $(if let Some(v) = self.$field.clone() { $target = v; })*
            };
        }
        set! {
            regime => cfg.regime,
            seed => cfg.seed,
            segment_seconds => cfg.segment_seconds,
            d_min => cfg.d_range[0],
            d_max => cfg.d_range[1],
            kernels => cfg.kernels,
            layers => cfg.layers,
            angle_scale => cfg.angle_scale,
            nu => cfg.nu,
            gamma => cfg.gamma,
            data => cfg.paths.data,
            out => cfg.paths.out,
        }
        if self.snr_db.is_some() {
            cfg.snr_db = self.snr_db;
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(qkad::Error::InvalidArgument("--threads must be at least 1".into()).into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    log::debug!("config hash {}", cfg.hash());

    match cli.command {
        Command::Synth => {
            let dir = cli
                .overrides
                .out
                .clone()
                .unwrap_or_else(|| cfg.paths.data.clone());
            commands::synth(&cfg, &dir)
        }
        Command::Features { d } => commands::features(&cfg, d),
        Command::Train { kernel, d } => commands::train(&cfg, kernel.unwrap_or(cfg.kernels[0]), d),
        Command::Score { model, all } => commands::score(&cfg, &model, all),
        Command::Sweep => commands::sweep(&cfg),
        Command::Ttest {
            a,
            b,
            metric,
            kernel_a,
            kernel_b,
        } => commands::ttest(&cfg, &a, &b, metric, kernel_a, kernel_b),
        Command::Grid {
            model,
            feature_x,
            feature_y,
            resolution,
        } => commands::grid(&cfg, &model, feature_x, feature_y, resolution),
    }
}

/// Message category and exit code for a failure.
fn classify(err: &anyhow::Error) -> (&'static str, u8) {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<qkad::Error>() {
            return match e {
                e if e.is_numerical() => ("numerical error", 2),
                qkad::Error::InvalidArgument(_) => ("validation error", 1),
                qkad::Error::Io(_) => ("file error", 1),
                qkad::Error::Csv(c) if c.is_io_error() => ("file error", 1),
                qkad::Error::Wav(hound::Error::IoError(_)) => ("file error", 1),
                _ => ("format error", 1),
            };
        }
        if cause.is::<serde_json::Error>() {
            return ("schema error", 1);
        }
        if cause.is::<std::io::Error>() {
            return ("file error", 1);
        }
    }
    ("error", 1)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let (category, code) = classify(&err);
            eprintln!("{category}: {err:#}");
            ExitCode::from(code)
        }
    }
}
