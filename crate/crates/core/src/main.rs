use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rcgp::dataset::{self, LayoutKind};
use rcgp::experiment::{self, Experiment, Overrides, SynthKind};
use rcgp::{cgp::Genotype, report, Error, Result};

#[derive(Parser)]
#[command(
    name = "rcgp",
    version,
    about = "Recurrent CGP classifiers for small, imbalanced tabular data"
)]
struct Cli {
    /// Worker threads (default: one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print class counts and the majority-class accuracy.
    Baseline {
        /// Dataset manifest.
        dataset: PathBuf,
    },
    /// Repeated stratified train/validation/test runs.
    SplitRun(RunArgs),
    /// Repeated k-fold cross-validation.
    CvRun(RunArgs),
    /// Render a genotype as Graphviz DOT.
    ExportDot {
        genotype: PathBuf,
        /// Dataset manifest supplying input names.
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write a synthetic dataset and manifests.
    SynthData {
        #[arg(value_enum)]
        kind: Kind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Separable,
    SequenceSum,
    CohortShape,
    LabelFeature,
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Flat,
    Sequential,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment manifest.
    manifest: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    mutation_rate: Option<f64>,
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    recurrent_prob: Option<f64>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    k_neighbors: Option<usize>,
    #[arg(long, value_enum)]
    adasyn: Option<Switch>,
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
}

impl RunArgs {
    fn overrides(&self) -> Overrides {
        // --out is relative to the working directory, not the manifest.
        let output_dir = self.out.as_ref().map(|p| {
            if p.is_absolute() {
                p.clone()
            } else {
                std::env::current_dir()
                    .map(|d| d.join(p))
                    .unwrap_or_else(|_| p.clone())
            }
        });
        Overrides {
            seed: self.seed,
            nodes: self.nodes,
            mutation_rate: self.mutation_rate,
            iterations: self.iterations,
            lambda: self.lambda,
            recurrent_prob: self.recurrent_prob,
            runs: self.runs,
            folds: self.folds,
            reps: self.reps,
            beta: self.beta,
            k_neighbors: self.k_neighbors,
            adasyn: self.adasyn.map(|s| matches!(s, Switch::On)),
            layout: self.layout.map(|l| match l {
                LayoutArg::Flat => LayoutKind::Flat,
                LayoutArg::Sequential => LayoutKind::Sequential,
            }),
            output_dir,
        }
    }
}

fn print_outcome(o: &experiment::RunOutcome) {
    println!("{}", o.table_row);
    if o.skipped > 0 {
        println!("skipped {} of {} rotations", o.skipped, o.records);
    }
    println!("wrote {}", o.output_dir.display());
}

fn export_dot(genotype: &Path, dataset: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let text = std::fs::read_to_string(genotype)
        .map_err(|e| Error::Input(format!("{}: {e}", genotype.display())))?;
    let g = Genotype::from_json(&text)?;
    let names = match dataset {
        Some(path) => dataset::load_manifest(path)?.input_names().to_vec(),
        None => (0..g.n_inputs()).map(|i| format!("x{i}")).collect(),
    };
    if names.len() != g.n_inputs() {
        return Err(Error::Input(format!(
            "genotype has {} inputs, dataset supplies {} names",
            g.n_inputs(),
            names.len()
        )));
    }
    let dot = report::export_dot(&g, &names);
    match out {
        Some(path) => {
            std::fs::write(path, dot).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{dot}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    match cli.command {
        Command::Baseline { dataset } => print!("{}", experiment::cmd_baseline(&dataset)?),
        Command::SplitRun(args) => {
            let exp = Experiment::load(&args.manifest, &args.overrides())?;
            print_outcome(&experiment::run_single_split(&exp)?);
        }
        Command::CvRun(args) => {
            let exp = Experiment::load(&args.manifest, &args.overrides())?;
            print_outcome(&experiment::run_cross_validation(&exp)?);
        }
        Command::ExportDot {
            genotype,
            dataset,
            out,
        } => export_dot(&genotype, dataset.as_deref(), out.as_deref())?,
        Command::SynthData { kind, out, seed } => {
            let kind = match kind {
                Kind::Separable => SynthKind::Separable,
                Kind::SequenceSum => SynthKind::SequenceSum,
                Kind::CohortShape => SynthKind::CohortShape,
                Kind::LabelFeature => SynthKind::LabelFeature,
            };
            for path in experiment::write_synthetic(kind, &out, seed)? {
                println!("{}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
