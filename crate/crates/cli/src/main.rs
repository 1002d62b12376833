//! Command-line front end: gallery listing, classification and batch runs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use weakcontact::gallery::ENTRIES;
use weakcontact::runner::{PartialSampling, SEED_ENV};
use weakcontact::{
    classify, lookup, lookup_structure, run_suite, sample_points, write_report, Error, Format, PartialConfig,
    RunConfig, SolitonConfig, SolitonParams, Suite, Tolerances,
};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_DEGENERATE: u8 = 3;

#[derive(Parser)]
#[command(name = "weakcontact", version, about = "Numerical checks for weak contact metric structures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List gallery manifolds.
    List,
    /// Print the ladder level of a gallery structure.
    Classify(Common),
    /// Run residual suites and write a report.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Suite to run; repeat for several. Defaults to all suites.
        #[arg(long = "suite")]
        suites: Vec<Suite>,
        /// JSON config file; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the soliton equation and lemma suites.
    Soliton {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        c1: f64,
        #[arg(long, allow_hyphen_values = true)]
        c2: f64,
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambda: f64,
        /// Potential over chart coordinates, e.g. `sin(rho) * t1`. Without it
        /// the soliton field is zero.
        #[arg(long)]
        potential: Option<String>,
        /// Second potential for the two-potential form.
        #[arg(long)]
        potential2: Option<String>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    manifold: Option<String>,
    /// Manifold parameter as `key=value`; repeatable.
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    jet_order: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "text")]
    format: Format,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl Common {
    fn layer(&self) -> PartialConfig {
        PartialConfig {
            manifold: self.manifold.clone(),
            params: (!self.params.is_empty()).then(|| self.params.iter().cloned().collect::<BTreeMap<_, _>>()),
            sampling: PartialSampling { count: self.samples, seed: self.seed, margin: None },
            tolerance: self.tol,
            jet_order: self.jet_order,
            output: self.out.clone(),
            ..Default::default()
        }
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn resolve(base: PartialConfig, flags: PartialConfig) -> Result<RunConfig, Error> {
    base.overlay(flags).resolve(env_seed().as_deref())
}

fn exit_for(err: &Error) -> u8 {
    if err.is_degenerate_structure() {
        EXIT_DEGENERATE
    } else {
        EXIT_USAGE
    }
}

fn run_and_report(config: &RunConfig, format: Format) -> Result<u8, Error> {
    let report = run_suite(config)?;
    if let Some(text) = write_report(&report, format, config.output.as_deref())? {
        println!("{text}");
    }
    Ok(if report.all_pass() { 0 } else { EXIT_FAIL })
}

fn list() -> u8 {
    for (name, about) in ENTRIES {
        println!("{name:<22} {about}");
    }
    0
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn classify_cmd(common: &Common) -> Result<u8, Error> {
    let config = resolve(PartialConfig::default(), common.layer())?;
    let entry = lookup(&config.manifold, &config.params)?;
    let structure = lookup_structure(&config.manifold, &config.params)?;
    let points = sample_points(&entry.chart, &config.sampling)?;
    let opts = Tolerances {
        identity: config.tolerance,
        seed: config.sampling.seed,
        jet_order: config.jet_order,
        ..Default::default()
    };
    let c = classify(&structure, &points, &opts)?;
    let text = match common.format {
        Format::Text => format!("{} (classical: {})", c.level, yes_no(c.classical)),
        Format::Json => serde_json::json!({
            "manifold": config.manifold,
            "params": entry.params,
            "level": c.level,
            "classical": c.classical,
            "normal": c.normal,
            "n1_max": c.n1_max,
            "report": c.report,
        })
        .to_string(),
    };
    match &config.output {
        Some(path) => std::fs::write(path, text + "\n")
            .map_err(|e| Error::Output { path: path.display().to_string(), reason: e.to_string() })?,
        None => println!("{text}"),
    }
    Ok(0)
}

fn dispatch(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::List => Ok(list()),
        Command::Classify(common) => classify_cmd(&common),
        Command::Verify { common, suites, config } => {
            let base = match &config {
                Some(path) => PartialConfig::from_file(path)?,
                None => PartialConfig::default(),
            };
            let mut flags = common.layer();
            flags.suites = (!suites.is_empty()).then_some(suites);
            run_and_report(&resolve(base, flags)?, common.format)
        }
        Command::Soliton { common, c1, c2, lambda, potential, potential2 } => {
            let mut flags = common.layer();
            flags.suites = Some(vec![Suite::Soliton, Suite::Lemmas]);
            flags.soliton = Some(SolitonConfig { params: SolitonParams::new(c1, c2, lambda), potential, potential2 });
            run_and_report(&resolve(PartialConfig::default(), flags)?, common.format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_for(&e))
        }
    }
}
