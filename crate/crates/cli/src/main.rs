//! `fsforge`: resampling, feature selection, and the five-classifier
//! comparison harness behind one binary.
//!
//! Exit codes: 0 success, 1 configuration error, 2 data error, 3 internal
//! invariant violation.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fsforge_core::data::write_arff;
use fsforge_core::pipeline::{
    compare_methods, load_dataset, run_phase1, write_outputs, Comparison, Method, PipelineConfig,
};
use fsforge_core::rank::{rank_features_by, Measure};
use fsforge_core::selftest::{all_passed, run_selftest};
use fsforge_core::{Error, Result};

#[derive(Parser)]
#[command(name = "fsforge", version, about = "Feature-selection laboratory: SMOTE + filtering, IG/SU ranking, GA wrapper search, five-classifier evaluation")]
struct Cli {
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method end to end and write its report
    Run(RunArgs),
    /// Run several methods against one dataset and write comparison series
    Compare(CompareArgs),
    /// Print a feature ranking table
    Rank(RankArgs),
    /// Run Phase 1 only and emit the merged dataset as ARFF
    Smote(SmoteArgs),
    /// Run the built-in invariant battery
    Selftest,
}

/// Flags shared by every data-consuming subcommand. Each one mirrors a
/// config-file key; flags win over the file.
#[derive(Args)]
struct CommonOpts {
    /// config file (TOML, sectioned per module)
    #[arg(long)]
    config: Option<PathBuf>,
    /// dataset file
    #[arg(long)]
    data: Option<PathBuf>,
    /// arff | csv
    #[arg(long)]
    format: Option<String>,
    /// 0-based class column (required for csv; arff defaults to the last
    /// attribute)
    #[arg(long = "class-col")]
    class_col: Option<usize>,
    /// master seed (falls back to $FSFORGE_SEED, then 42)
    #[arg(long)]
    seed: Option<u64>,
    /// outer cross-validation folds
    #[arg(long)]
    folds: Option<usize>,
    /// folds used inside the GA fitness function
    #[arg(long)]
    wrapper_folds: Option<usize>,
    /// keep features scoring strictly above this
    #[arg(long)]
    ig_threshold: Option<f64>,
    /// keep the k best-scoring features instead of thresholding
    #[arg(long)]
    ig_top_k: Option<usize>,
    /// SMOTE neighbour count
    #[arg(long)]
    smote_k: Option<usize>,
    /// GA population size
    #[arg(long)]
    ga_pop: Option<usize>,
    /// GA generation count
    #[arg(long)]
    ga_gens: Option<usize>,
    /// GA crossover probability
    #[arg(long)]
    ga_crossover: Option<f64>,
    /// GA mutation probability
    #[arg(long)]
    ga_mutation: Option<f64>,
    /// elite individuals copied unchanged each generation
    #[arg(long)]
    elitism: Option<usize>,
    /// which instances the misclassification filter may drop:
    /// synthetic-only | all
    #[arg(long)]
    filter_scope: Option<String>,
    /// re-run Phase 1 inside each training fold so synthetics never reach
    /// a test fold
    #[arg(long)]
    leak_free: bool,
    /// score training-set fit instead of cross-validating
    #[arg(long)]
    resubstitution: bool,
    /// micro-average the per-class rates instead of macro-averaging
    #[arg(long)]
    micro_average: bool,
}

impl CommonOpts {
    fn build_config(&self) -> Result<PipelineConfig> {
        let (mut cfg, file_sets_seed) = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                let cfg = PipelineConfig::from_toml_str(&text)?;
                let raw: toml::Value = text
                    .parse()
                    .map_err(|e| Error::config(format!("config file: {e}")))?;
                let has_seed = raw
                    .get("run")
                    .and_then(|r| r.get("seed"))
                    .is_some();
                (cfg, has_seed)
            }
            None => (PipelineConfig::default(), false),
        };
        if let Some(seed) = self.seed {
            cfg.run.seed = seed;
        } else if !file_sets_seed {
            if let Ok(env_seed) = std::env::var("FSFORGE_SEED") {
                cfg.run.seed = env_seed.parse().map_err(|_| {
                    Error::config(format!("FSFORGE_SEED is not a number: '{env_seed}'"))
                })?;
            }
        }
        if let Some(data) = &self.data {
            cfg.data.path = data.clone();
        }
        if let Some(format) = &self.format {
            cfg.data.format = format.parse()?;
        }
        if let Some(col) = self.class_col {
            cfg.data.class_column = Some(col);
        }
        if let Some(folds) = self.folds {
            cfg.run.outer_folds = folds;
        }
        if let Some(folds) = self.wrapper_folds {
            cfg.run.wrapper_folds = folds;
        }
        if let Some(t) = self.ig_threshold {
            cfg.rank.threshold = t;
        }
        if let Some(k) = self.ig_top_k {
            cfg.rank.top_k = Some(k);
        }
        if let Some(k) = self.smote_k {
            cfg.smote.k_neighbors = k;
        }
        if let Some(p) = self.ga_pop {
            cfg.ga.population_size = p;
        }
        if let Some(g) = self.ga_gens {
            cfg.ga.max_generations = g;
        }
        if let Some(p) = self.ga_crossover {
            cfg.ga.crossover_probability = p;
        }
        if let Some(p) = self.ga_mutation {
            cfg.ga.mutation_probability = p;
        }
        if let Some(e) = self.elitism {
            cfg.ga.elitism = e;
        }
        if let Some(scope) = &self.filter_scope {
            cfg.smote.filter_scope = scope.parse()?;
        }
        if self.leak_free {
            cfg.run.leak_free = true;
        }
        if self.resubstitution {
            cfg.run.resubstitution = true;
        }
        if self.micro_average {
            cfg.run.averaging = fsforge_core::metrics::Averaging::Micro;
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// all_features | info_gain | ga_wrapper | su_ga_wrapper | hybrid
    #[arg(long)]
    method: Option<String>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// comma-separated method list (default: all five)
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    /// output directory
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// ig | su
    #[arg(long, default_value = "ig")]
    measure: String,
    /// write the table as CSV instead of printing it
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SmoteArgs {
    #[command(flatten)]
    common: CommonOpts,
    /// output ARFF file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn print_summary(comparison: &Comparison) {
    println!(
        "{}: {} instances, {} attributes, seed {}",
        comparison.dataset, comparison.n_instances, comparison.n_attributes, comparison.seed
    );
    println!(
        "{:<14} {:>8} {:>9} {:>9} {:>9} {:>9}",
        "method", "features", "ams", "arae", "atp_rate", "afp_rate"
    );
    for run in &comparison.runs {
        let g = &run.report.group;
        println!(
            "{:<14} {:>8} {:>9.3} {:>9.3} {:>9.3} {:>9.3}",
            run.method.label(),
            run.selected.len(),
            g.ams,
            g.arae,
            g.atp_rate,
            g.afp_rate
        );
    }
}

fn cmd_run(args: &RunArgs) -> Result<()> {
    let mut cfg = args.common.build_config()?;
    if let Some(method) = &args.method {
        cfg.run.method = method.parse()?;
    }
    let comparison = compare_methods(&[cfg])?;
    write_outputs(&args.out, &comparison)?;
    print_summary(&comparison);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_compare(args: &CompareArgs) -> Result<()> {
    let base = args.common.build_config()?;
    let methods: Vec<Method> = match &args.methods {
        Some(labels) => labels
            .iter()
            .map(|l| l.parse())
            .collect::<Result<_>>()?,
        None => Method::ALL.to_vec(),
    };
    let cfgs: Vec<PipelineConfig> = methods.into_iter().map(|m| base.with_method(m)).collect();
    let comparison = compare_methods(&cfgs)?;
    write_outputs(&args.out, &comparison)?;
    print_summary(&comparison);
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_rank(args: &RankArgs) -> Result<()> {
    let cfg = args.common.build_config()?;
    cfg.validate()?;
    let measure: Measure = args.measure.parse()?;
    let d = load_dataset(&cfg.data)?;
    let scores = rank_features_by(&d, measure)?;
    match &args.out {
        Some(path) => {
            let csv_error = |e: csv::Error| Error::internal(format!("csv write: {e}"));
            let mut w = csv::Writer::from_writer(fs::File::create(path)?);
            w.write_record(["rank", "attribute", "score"]).map_err(csv_error)?;
            for s in &scores {
                w.write_record([
                    s.rank.to_string(),
                    d.schema[s.attribute].name.clone(),
                    s.score.to_string(),
                ])
                .map_err(csv_error)?;
            }
            w.flush()?;
            println!("wrote {} rows to {}", scores.len(), path.display());
        }
        None => {
            println!("{:<6} {:<20} {:>12}", "rank", "attribute", measure.to_string());
            for s in &scores {
                println!("{:<6} {:<20} {:>12.6}", s.rank, d.schema[s.attribute].name, s.score);
            }
        }
    }
    Ok(())
}

fn cmd_smote(args: &SmoteArgs) -> Result<()> {
    let cfg = args.common.build_config()?;
    cfg.validate()?;
    let d = load_dataset(&cfg.data)?;
    let (merged, summary) = run_phase1(&d, &cfg)?;
    match &args.out {
        Some(path) => {
            write_arff(&merged, fs::File::create(path)?)?;
            println!(
                "phase 1: {} -> {} instances (+{} synthetic, filter removed {}); wrote {}",
                summary.input_instances,
                summary.output_instances,
                summary.generated,
                summary.removed_by_filter,
                path.display()
            );
        }
        None => {
            let mut out = Vec::new();
            write_arff(&merged, &mut out)?;
            print!("{}", String::from_utf8_lossy(&out));
            eprintln!(
                "phase 1: {} -> {} instances (+{} synthetic, filter removed {})",
                summary.input_instances,
                summary.output_instances,
                summary.generated,
                summary.removed_by_filter
            );
        }
    }
    Ok(())
}

fn cmd_selftest() -> Result<()> {
    let checks = run_selftest();
    for c in &checks {
        println!("{} {:<26} {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    if all_passed(&checks) {
        println!("{} checks passed", checks.len());
        Ok(())
    } else {
        Err(Error::internal("selftest found a broken invariant"))
    }
}

fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Rank(args) => cmd_rank(args),
        Command::Smote(args) => cmd_smote(args),
        Command::Selftest => cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .ok();
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
