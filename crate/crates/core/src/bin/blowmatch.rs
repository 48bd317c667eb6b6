use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};

use blowmatch::cli::{self, RunManifest, Subcommand};
use blowmatch::{Error, FusionWeights};

#[derive(Parser)]
#[command(
    name = "blowmatch",
    version,
    about = "Blow-acoustic and face authentication toolkit"
)]
struct Cli {
    /// Run a saved manifest instead of a subcommand.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Turn WAV or sample-column CSV files named <user>_<session>_<sit|stand> into a session CSV.
    Preprocess {
        /// Files or directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        prep: PrepArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Pairwise distance matrix for each kernel.
    Simmatrix {
        dataset: PathBuf,
        #[arg(long, default_value = "dtw")]
        kernel: Vec<String>,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Leave-one-out evaluation over every (channel, kernel, mode, q).
    Evaluate {
        dataset: PathBuf,
        /// Face embedding CSV, required for the face and fused channels.
        #[arg(long)]
        embeddings: Option<PathBuf>,
        /// Kernel specs, comma separated or repeated; `all` for every kernel.
        #[arg(long, default_value = "dtw")]
        kernel: Vec<String>,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Target recall: an integer, `n` or `n-<r>`.
        #[arg(long, default_value = "10")]
        q: Vec<String>,
        #[arg(long, default_value = "both")]
        mode: Vec<String>,
        #[arg(long, default_value = "blow")]
        channel: Vec<String>,
        /// Blow weight of the fused channel; the face weight is 1 minus this.
        #[arg(long, default_value_t = 0.5)]
        w_blow: f64,
        #[arg(long, default_value = "mean")]
        aggregation: String,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Generate a synthetic dataset and face embeddings.
    Synth {
        #[arg(long, default_value_t = 10)]
        users: usize,
        #[arg(long, default_value_t = 10)]
        sessions: usize,
        #[arg(long, default_value_t = 250)]
        length: usize,
        #[arg(long, default_value_t = 0.02)]
        dt: f64,
        /// Onset jitter in seconds.
        #[arg(long, default_value_t = 0.04)]
        time_jitter: f64,
        #[arg(long, default_value_t = 0.1)]
        amplitude_jitter: f64,
        /// Embedding noise; negative skips embeddings.
        #[arg(long, default_value_t = 0.05, allow_negative_numbers = true)]
        face_sigma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct PrepArgs {
    #[arg(long, default_value_t = blowmatch::signal::DEFAULT_SAMPLE_RATE)]
    sample_rate: u32,
    #[arg(long, default_value_t = blowmatch::signal::DEFAULT_WINDOW_SIZE)]
    window_size: usize,
    #[arg(long, default_value_t = blowmatch::signal::DEFAULT_SMA_WINDOW)]
    sma_window: usize,
}

impl PrepArgs {
    fn config(&self) -> blowmatch::PreprocessConfig {
        blowmatch::PreprocessConfig {
            window_size: self.window_size,
            sma_window: self.sma_window,
            sample_rate: self.sample_rate,
        }
    }
}

#[derive(Args)]
struct DataArgs {
    /// TOML column mapping for session CSVs with a different layout.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepArgs,
}

impl DataArgs {
    fn apply(&self, m: &mut RunManifest) -> blowmatch::Result<()> {
        m.preprocess = self.prep.config();
        if let Some(p) = &self.schema {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            m.schema = toml::from_str(&text).map_err(|e| Error::parse(p, None, e.to_string()))?;
        }
        Ok(())
    }
}

fn build(command: Command) -> blowmatch::Result<RunManifest> {
    let mut m = RunManifest::default();
    match command {
        Command::Preprocess { inputs, prep, out } => {
            m.subcommand = Subcommand::Preprocess;
            m.inputs = inputs;
            m.preprocess = prep.config();
            m.out = out;
        }
        Command::Simmatrix {
            dataset,
            kernel,
            data,
            out,
        } => {
            m.subcommand = Subcommand::Simmatrix;
            m.inputs = vec![dataset];
            m.evaluate.kernels = cli::parse_kernels(&kernel)?;
            data.apply(&mut m)?;
            m.out = out;
        }
        Command::Evaluate {
            dataset,
            embeddings,
            kernel,
            k,
            q,
            mode,
            channel,
            w_blow,
            aggregation,
            data,
            out,
        } => {
            m.subcommand = Subcommand::Evaluate;
            m.inputs = vec![dataset];
            m.embeddings = embeddings;
            m.evaluate.kernels = cli::parse_kernels(&kernel)?;
            m.evaluate.k = k;
            m.evaluate.q = cli::parse_list(&q)?;
            m.evaluate.modes = cli::parse_list(&mode)?;
            m.evaluate.channels = cli::parse_list(&channel)?;
            m.evaluate.weights = FusionWeights::new(w_blow, 1.0 - w_blow)?;
            m.evaluate.aggregation = aggregation.parse()?;
            data.apply(&mut m)?;
            m.out = out;
        }
        Command::Synth {
            users,
            sessions,
            length,
            dt,
            time_jitter,
            amplitude_jitter,
            face_sigma,
            seed,
            out,
        } => {
            m.subcommand = Subcommand::Synth;
            m.seed = seed;
            m.synth.params.n_users = users;
            m.synth.params.sessions_per_user = sessions;
            m.synth.params.length = length;
            m.synth.params.dt = dt;
            m.synth.params.time_jitter = time_jitter;
            m.synth.params.amplitude_jitter = amplitude_jitter;
            m.synth.params.seed = seed;
            m.synth.face_sigma = (face_sigma >= 0.0).then_some(face_sigma);
            m.out = out;
        }
    }
    Ok(m)
}

fn run(args: Cli) -> blowmatch::Result<()> {
    let manifest = match (args.manifest, args.command) {
        (Some(path), None) => RunManifest::load(&path)?,
        (None, Some(cmd)) => build(cmd)?,
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "give either --manifest or a subcommand, not both",
            ))
        }
        (None, None) => {
            return Err(Error::invalid(
                "nothing to do; pass a subcommand or --manifest",
            ))
        }
    };
    cli::execute(&manifest)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::FAILURE
        }
    }
}
