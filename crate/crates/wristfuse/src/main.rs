use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wristfuse::bundle::ModelBundle;
use wristfuse::config::{check_cost_file, Settings};
use wristfuse::error::{AppError, Result};
use wristfuse::{ingest, report, runner};
use wristfuse_core::energy::CostModel;
use wristfuse_core::eval::{evaluate_subject, summarize, PipelineConfig};
use wristfuse_core::gating::BranchSpec;
use wristfuse_core::synthetic::{generate_synthetic, ClassProfile};

#[derive(Parser)]
#[command(name = "wristfuse", version, about = "Context-gated multi-modal stress classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset in the canonical CSV layout.
    Synth {
        #[arg(long, default_value_t = 4)]
        subjects: usize,
        /// Recording length per subject, seconds.
        #[arg(long, default_value_t = 900.0)]
        duration: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Profile::Separable)]
        profile: Profile,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train on every subject and write a model bundle.
    Train {
        #[command(flatten)]
        run: RunArgs,
        /// Bundle path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Leave-one-subject-out evaluation, or evaluation of a saved bundle.
    Eval {
        #[command(flatten)]
        run: RunArgs,
        /// Evaluate this bundle on every subject instead of running LOSO.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Output directory for results.csv, summary.csv and energy.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// LOSO accuracy and energy over a list of delta values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0])]
        deltas: Vec<f64>,
        /// Output directory for sweep.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print per-branch costs and the bounds on window cost.
    Energy {
        #[arg(long)]
        costs: Option<PathBuf>,
        /// Cost the branches of this bundle instead of every candidate.
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Profile {
    Separable,
    EdaOnly,
}

#[derive(Args)]
struct RunArgs {
    /// Dataset root holding S<k>/ subject directories.
    #[arg(long)]
    data: PathBuf,
    /// key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// File of cost.* keys.
    #[arg(long)]
    costs: Option<PathBuf>,
    /// Override a configuration key, e.g. --set kalman.epsilon=0.5.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    problem: Option<String>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    fusion: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut s = match &self.config {
            Some(p) => Settings::load(p)?,
            None => Settings::default(),
        };
        if let Some(p) = &self.costs {
            let c = Settings::load(p)?;
            check_cost_file(&c)?;
            s.extend(&c);
        }
        for pair in &self.overrides {
            s.set_pair(pair)?;
        }
        let flags = [
            ("problem", self.problem.clone()),
            ("delta", self.delta.map(|v| v.to_string())),
            ("fusion", self.fusion.clone()),
            ("k", self.k.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, &v);
            }
        }
        Ok(s)
    }

    fn config(&self) -> Result<PipelineConfig> {
        self.settings()?.to_pipeline()
    }

    fn prepared(&self, cfg: &PipelineConfig) -> Result<Vec<wristfuse_core::eval::PreparedSubject>> {
        if !self.data.is_dir() {
            return Err(AppError::Usage(format!("data directory {} does not exist", self.data.display())));
        }
        let records = ingest::load_dataset(&self.data)?;
        runner::prepare_all(&records, cfg)
    }
}

fn out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| AppError::Io {
        path: dir.into(),
        source,
    })
}

fn synth(subjects: usize, duration: f64, seed: u64, profile: Profile, out: &Path) -> Result<()> {
    let profile = match profile {
        Profile::Separable => ClassProfile::separable(),
        Profile::EdaOnly => ClassProfile::eda_only(),
    };
    let records = generate_synthetic(subjects, duration, seed, &profile)?;
    ingest::write_dataset(&records, out)?;
    println!("wrote {} subjects to {}", records.len(), out.display());
    Ok(())
}

fn train(run: &RunArgs, out: &Path) -> Result<()> {
    let cfg = run.config()?;
    let data = run.prepared(&cfg)?;
    let pipeline = runner::train_all(&data, &cfg)?;
    let ids = data.iter().map(|s| s.subject_id.clone()).collect();
    let bundle = ModelBundle::new(pipeline, &cfg, ids);
    bundle.save(out)?;
    let specs: Vec<String> = bundle.pipeline.specs().iter().map(|s| s.to_string()).collect();
    println!("branches: {}", specs.join(", "));
    println!("wrote {}", out.display());
    Ok(())
}

fn eval(run: &RunArgs, model: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let mut cfg = run.config()?;
    let folds = match model {
        Some(path) => {
            let bundle = ModelBundle::load(path)?;
            bundle.apply_to(&mut cfg);
            cfg.validate()?;
            let data = run.prepared(&cfg)?;
            data.iter()
                .map(|s| evaluate_subject(&bundle.pipeline, s, &cfg).map_err(AppError::from))
                .collect::<Result<Vec<_>>>()?
        }
        None => {
            let data = run.prepared(&cfg)?;
            runner::run_loso(&data, &cfg)?
        }
    };
    let summary = summarize(&folds, cfg.problem.class_count())?;
    print!("{}", report::fold_table(&folds, &summary));
    if let Some(dir) = out {
        out_dir(dir)?;
        report::write_results(&dir.join("results.csv"), &folds)?;
        report::write_summary(&dir.join("summary.csv"), &folds, &summary)?;
        report::write_energy(&dir.join("energy.csv"), &folds)?;
    }
    Ok(())
}

fn sweep(run: &RunArgs, deltas: &[f64], out: Option<&Path>) -> Result<()> {
    if deltas.is_empty() {
        return Err(AppError::Usage("--deltas needs at least one value".into()));
    }
    let cfg = run.config()?;
    let data = run.prepared(&cfg)?;
    let rows = runner::sweep(&data, &cfg, deltas)?;
    print!("{}", report::sweep_table(&rows));
    if let Some(dir) = out {
        out_dir(dir)?;
        report::write_sweep(&dir.join("sweep.csv"), &rows)?;
    }
    Ok(())
}

fn energy(costs: Option<&Path>, model: Option<&Path>) -> Result<()> {
    let mut s = Settings::default();
    if let Some(p) = costs {
        let c = Settings::load(p)?;
        check_cost_file(&c)?;
        s.extend(&c);
    }
    let cm: CostModel = s.to_pipeline()?.costs;
    let specs: Vec<BranchSpec> = match model {
        Some(p) => ModelBundle::load(p)?.pipeline.specs(),
        None => BranchSpec::all_candidates().collect(),
    };
    println!("{:<8} {:>10} {:>10}", "branch", "classifier", "branch");
    let mut cheapest = f64::INFINITY;
    for spec in &specs {
        let b = cm.branch_cost(*spec)?;
        cheapest = cheapest.min(b);
        println!("{:<8} {:>10.3} {:>10.3}", spec.to_string(), cm.classifier_cost(*spec)?, b);
    }
    let base = cm.baseline_cost(&specs)?;
    let full = cm.gate + base - cm.extraction[0];
    println!("gate: {:.3}", cm.gate);
    println!("baseline per window: {base:.3}");
    println!("gated per window: {:.3} to {full:.3}", cm.gate + cheapest);
    println!("best relative energy: {:.4}", (cm.gate + cheapest) / base);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth {
            subjects,
            duration,
            seed,
            profile,
            out,
        } => synth(subjects, duration, seed, profile, &out),
        Command::Train { run, out } => train(&run, &out),
        Command::Eval { run, model, out } => eval(&run, model.as_deref(), out.as_deref()),
        Command::Sweep { run, deltas, out } => sweep(&run, &deltas, out.as_deref()),
        Command::Energy { costs, model } => energy(costs.as_deref(), model.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
