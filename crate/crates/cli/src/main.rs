use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use rmt_sharp::experiments::{self, aggregate, AggregateReport, ExperimentConfig};
use rmt_sharp::spectral::{self, DistanceInstance, SpectralOptions};
use rmt_sharp::structure::{check_typical_structure, StructureParams};
use rmt_sharp::{io, Error, GraphModel, ModelKind, SeededRng, SparseBinaryMatrix};

const USAGE_ERROR: u8 = 2;
const RUNTIME_ERROR: u8 = 1;

#[derive(Parser, Debug)]
#[command(name = "rmt-sharp", version, about = "Monte Carlo spectra of sparse random 0/1 matrices")]
struct Cli {
    /// Directory for output files; results go to stdout when omitted.
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample one matrix and write it as an edge list.
    Sample(SampleArgs),
    /// Check the structural properties of a matrix file.
    Audit(AuditArgs),
    /// Singular values, condition numbers and the top eigenpair of a matrix file.
    Spectrum(SpectrumArgs),
    /// Distance from the first column to the span of the others, two ways.
    Distance(MatrixArg),
    /// Run an experiment described by a JSON config.
    Run(RunArgs),
    /// Summarize a records CSV into grouped statistics.
    Aggregate(AggregateArgs),
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[arg(long)]
    model: ModelKind,
    #[arg(long)]
    n: usize,
    /// Edge probability.
    #[arg(long, conflicts_with = "offset", required_unless_present = "offset")]
    p: Option<f64>,
    /// Offset k in np = log n + k.
    #[arg(long, allow_negative_numbers = true)]
    offset: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    stream: u64,
}

#[derive(Args, Debug)]
struct MatrixArg {
    /// Edge-list matrix file.
    matrix: PathBuf,
}

#[derive(Args, Debug)]
struct AuditArgs {
    matrix: PathBuf,
    /// Edge probability used by the thresholds; defaults to the density.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    delta0: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    matrix: PathBuf,
    /// Model whose mean is subtracted for the centered norm.
    #[arg(long, default_value = "directed")]
    model: ModelKind,
    /// Defaults to the density.
    #[arg(long)]
    p: Option<f64>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Override a config field, e.g. `--set trials=50` or
    /// `--set params.structure.delta0=0.02`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Exit with status 1 when an enforced check fails.
    #[arg(long)]
    strict: bool,
}

#[derive(Args, Debug)]
struct AggregateArgs {
    /// Records CSV written by `run`.
    input: PathBuf,
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

struct Ctx {
    output_dir: Option<PathBuf>,
    verbose: u8,
}

impl Ctx {
    fn log(&self, level: u8, msg: impl AsRef<str>) {
        if self.verbose >= level {
            eprintln!("{}", msg.as_ref());
        }
    }

    /// Write `text` to `name` under the output directory, or to stdout.
    fn emit_text(&self, name: &str, text: &str) -> Result<(), Failure> {
        match &self.output_dir {
            Some(dir) => {
                let path = dir.join(name);
                io::write_file(&path, text.as_bytes())?;
                self.log(0, format!("wrote {}", path.display()));
            }
            None => print!("{text}"),
        }
        Ok(())
    }

    fn emit_json(&self, name: &str, value: &serde_json::Value) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
        text.push('\n');
        self.emit_text(name, &text)
    }
}

fn density(a: &SparseBinaryMatrix) -> f64 {
    a.nnz() as f64 / (a.rows() * a.cols()).max(1) as f64
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "matrix".into())
}

fn sample(ctx: &Ctx, args: &SampleArgs) -> Result<(), Failure> {
    let model = match (args.p, args.offset) {
        (Some(p), _) => GraphModel::new(args.model, args.n, p),
        (None, Some(k)) => GraphModel::with_offset(args.model, args.n, k),
        (None, None) => unreachable!("clap requires one of --p and --offset"),
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    let a = model.sample(&SeededRng::new(args.seed, args.stream))?;
    ctx.log(1, format!("{} n={} p={} nnz={}", model.kind, model.n, model.p, a.nnz()));
    let name = format!("{}_n{}_seed{}_stream{}.txt", model.kind, model.n, args.seed, args.stream);
    ctx.emit_text(&name, &io::matrix_to_string(&a))
}

fn audit(ctx: &Ctx, args: &AuditArgs) -> Result<(), Failure> {
    let a = io::load_matrix(&args.matrix)?;
    let p = args.p.unwrap_or_else(|| density(&a));
    let mut params = StructureParams::default();
    if let Some(d) = args.delta0 {
        params.delta0 = d;
    }
    let report = check_typical_structure(&a, p, &params, &SeededRng::new(args.seed, 0))?;
    ctx.log(1, format!("properties {:?}", report.properties()));
    let value = serde_json::to_value(&report).map_err(Error::from)?;
    ctx.emit_json(&format!("{}_audit.json", stem(&args.matrix)), &value)
}

fn spectrum(ctx: &Ctx, args: &SpectrumArgs) -> Result<(), Failure> {
    let a = io::load_matrix(&args.matrix)?;
    if !a.is_square() {
        return Err(Failure::Runtime(Error::Dimension(format!("{}x{} matrix is not square", a.rows(), a.cols()))));
    }
    let p = args.p.unwrap_or_else(|| density(&a));
    let model = GraphModel::new(args.model, a.rows(), p).map_err(|e| Failure::Usage(e.to_string()))?;
    let summary = spectral::summarize(&a, &model, &SpectralOptions::default(), true)?;
    let value = serde_json::to_value(&summary).map_err(Error::from)?;
    ctx.emit_json(&format!("{}_spectrum.json", stem(&args.matrix)), &value)
}

fn distance(ctx: &Ctx, args: &MatrixArg) -> Result<(), Failure> {
    let a = io::load_matrix(&args.matrix)?;
    let projection = spectral::distance_column_to_span(&a, 0)?;
    let formula = spectral::distance_via_quadratic_form(&DistanceInstance::new(&a)?)?;
    let value = json!({
        "projection": projection,
        "formula": formula.value,
        "branch": formula.kind,
        "rel_gap": experiments::relative_gap(formula.value, projection),
    });
    ctx.emit_json(&format!("{}_distance.json", stem(&args.matrix)), &value)
}

fn load_config(ctx: &Ctx, args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", args.config.display())))?;
    let cfg = ExperimentConfig::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", args.config.display())))?;
    for o in &args.overrides {
        ctx.log(0, format!("override {o}"));
    }
    cfg.with_overrides(&args.overrides).map_err(|e| Failure::Usage(e.to_string()))
}

fn run(ctx: &Ctx, args: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(ctx, args)?;
    let dir = ctx.output_dir.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("."));
    ctx.log(1, format!("{} over {} grid cells x {} trials", cfg.experiment, cfg.points()?.len(), cfg.trials));
    let out = experiments::run(&cfg)?;
    let id = cfg.experiment.id();
    let csv = dir.join(format!("{id}_records.csv"));
    io::emit_csv(&out.records, &csv)?;
    let agg = dir.join(format!("{id}_aggregates.json"));
    io::emit_json(&AggregateReport::new(aggregate(&out.records)), &agg)?;
    let summary = dir.join(format!("{id}_run.json"));
    io::emit_json(
        &json!({
            "schema_version": experiments::SCHEMA_VERSION,
            "config": out.config,
            "points": out.points,
            "checks": out.checks,
        }),
        &summary,
    )?;
    for c in &out.checks {
        let tag = match (c.passed, c.enforced) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "NOTE",
        };
        if !c.passed || ctx.verbose >= 1 {
            eprintln!("{tag} {}: {}", c.name, c.detail);
        }
    }
    let failed = out.enforced_failures().count();
    ctx.log(0, format!("{} records, {} checks, {failed} failed; wrote {}", out.records.len(), out.checks.len(), dir.display()));
    if failed > 0 && args.strict {
        return Err(Failure::Runtime(Error::InvalidParameter(format!("{failed} enforced checks failed"))));
    }
    Ok(())
}

fn aggregate_cmd(ctx: &Ctx, args: &AggregateArgs) -> Result<(), Failure> {
    let records = io::load_csv(&args.input)?;
    let report = AggregateReport::new(aggregate(&records));
    let value = serde_json::to_value(&report).map_err(Error::from)?;
    ctx.emit_json(&format!("{}_aggregates.json", stem(&args.input)), &value)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE_ERROR } else { 0 });
        }
    };
    let ctx = Ctx {
        output_dir: cli.output_dir,
        verbose: cli.verbose,
    };
    let result = match &cli.command {
        Command::Sample(a) => sample(&ctx, a),
        Command::Audit(a) => audit(&ctx, a),
        Command::Spectrum(a) => spectrum(&ctx, a),
        Command::Distance(a) => distance(&ctx, a),
        Command::Run(a) => run(&ctx, a),
        Command::Aggregate(a) => aggregate_cmd(&ctx, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(USAGE_ERROR)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(RUNTIME_ERROR)
        }
    }
}
