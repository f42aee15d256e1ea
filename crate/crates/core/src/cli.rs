//! Command-line front end.
//!
//! Exit codes: 0 success, 1 validation or physics error (including a failed
//! bound-chain audit), 2 usage error, 3 derivation residual failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::derive::{
    build_basis, class_report, fit_many, verify_table_claims, ClaimReport, ClassReport, CoefficientVector, FitOptions,
    Target,
};
use crate::error::{Error, Result};
use crate::estimation::{estimate_distances, EstimationOptions, EstimationSetup, Measure};
use crate::report::DistanceReport;
use crate::statefile::StateFile;
use crate::sweep::{run_sweep, Ensemble, SweepOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_RESIDUAL: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qdistance", version, about = "Two-qubit state distances: spectral, overlap formulas, interferometric estimates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads for sampling and fitting; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file; for derive, a directory receiving one table per target.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compare two state files.
    Distance {
        state1: PathBuf,
        state2: PathBuf,
        /// Also estimate from simulated counts with this many shots per configuration.
        #[arg(long, value_name = "SHOTS")]
        simulate: Option<u64>,
        /// Bootstrap replicates for the trace-distance error.
        #[arg(long, default_value_t = 200)]
        bootstrap: usize,
    },
    /// Fit graph-probability decompositions and check the structural claims.
    Derive {
        /// Targets such as pi2, pi3, pi4, o2, 12 or 1122; repeatable or comma separated.
        #[arg(long, value_delimiter = ',', value_parser = parse::<Target>)]
        target: Vec<Target>,
        /// Training pairs; defaults to 2.5 times the candidate count.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 500)]
        held_out: usize,
        /// Copies in the basis; defaults to 2 when the target allows it, else 4.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4))]
        basis: Option<u8>,
        /// Drop graphs whose removal keeps the residual below tolerance.
        #[arg(long)]
        prune: bool,
        /// Also count the eight-mode graph classes.
        #[arg(long)]
        classes: bool,
    },
    /// Estimator bias and RMSE against the oracle over an ensemble of pairs.
    Sweep {
        /// ginibre, pure, rank1..rank4 or identical.
        #[arg(long, default_value = "ginibre", value_parser = parse::<Ensemble>)]
        ensemble: Ensemble,
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
        #[arg(long, value_delimiter = ',', default_value = "10000,100000,1000000")]
        shots: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "H2,H,G,E,T", value_parser = parse::<Measure>)]
        measures: Vec<Measure>,
        #[arg(long, default_value_t = 100)]
        bootstrap: usize,
    },
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.common.threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Residual { .. } | Error::Setup(_) => EXIT_RESIDUAL,
        _ => EXIT_VALIDATION,
    }
}

fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Distance { state1, state2, simulate, bootstrap } => {
            cmd_distance(&cli.common, state1, state2, *simulate, *bootstrap)
        }
        Command::Derive { target, samples, held_out, basis, prune, classes } => {
            let opts = FitOptions { samples: *samples, seed: cli.common.seed, held_out: *held_out, prune: *prune };
            cmd_derive(&cli.common, target, opts, basis.map(usize::from), *classes)
        }
        Command::Sweep { ensemble, pairs, repeats, shots, measures, bootstrap } => {
            let opts = SweepOptions {
                pairs: *pairs,
                repeats: *repeats,
                shots: shots.clone(),
                seed: cli.common.seed,
                ensemble: *ensemble,
                measures: measures.clone(),
                bootstrap: *bootstrap,
            };
            cmd_sweep(&cli.common, &opts)
        }
    }
}

fn cmd_distance(common: &Common, p1: &Path, p2: &Path, simulate: Option<u64>, bootstrap: usize) -> Result<i32> {
    let s1 = StateFile::load(p1)?;
    let s2 = StateFile::load(p2)?;
    let estimation = match simulate {
        Some(shots) => {
            let setup = EstimationSetup::standard()?;
            let measures = [Measure::HilbertSchmidt, Measure::Superfidelity, Measure::Subfidelity, Measure::TraceDistance];
            let plan = setup.plan(&measures)?;
            let opts = EstimationOptions { shots, seed: common.seed, bootstrap };
            Some(estimate_distances(setup, &plan, &measures, &s1.state, &s2.state, &opts)?)
        }
        None => None,
    };
    let report = DistanceReport::build([&s1.label, &s2.label], &s1.state, &s2.state, common.seed, estimation)?;
    emit(
        common,
        &match common.format {
            Format::Text => report.to_text(),
            Format::Json => report.to_json() + "\n",
        },
    )?;
    if report.audit_passed() {
        Ok(EXIT_OK)
    } else {
        for c in report.violations() {
            eprintln!("error: bound violated: {} (margin {:.3e})", c.name, c.margin);
        }
        Ok(EXIT_VALIDATION)
    }
}

#[derive(Serialize)]
struct FitSummary {
    target: String,
    graphs: usize,
    terms: usize,
    rank: usize,
    candidates: usize,
    non_unique: bool,
    train_residual: f64,
    held_out_residual: f64,
    denominators: Vec<i64>,
}

impl From<&CoefficientVector> for FitSummary {
    fn from(f: &CoefficientVector) -> Self {
        Self {
            target: f.target.clone(),
            graphs: f.support_graphs().len(),
            terms: f.terms.len(),
            rank: f.rank,
            candidates: f.candidates,
            non_unique: f.non_unique,
            train_residual: f.train_residual,
            held_out_residual: f.held_out_residual,
            denominators: f.denominators().into_iter().collect(),
        }
    }
}

#[derive(Serialize)]
struct DeriveOutput {
    version: &'static str,
    seed: u64,
    fits: Vec<FitSummary>,
    claims: Option<ClaimReport>,
    classes: Option<ClassReport>,
}

fn cmd_derive(
    common: &Common,
    targets: &[Target],
    opts: FitOptions,
    basis: Option<usize>,
    classes: bool,
) -> Result<i32> {
    let targets = if targets.is_empty() { Target::standard() } else { targets.to_vec() };
    let mut fits = Vec::new();
    for size in [1, 2, 3, 4] {
        let group: Vec<Target> =
            targets.iter().filter(|t| basis.unwrap_or_else(|| t.default_basis()) == size).cloned().collect();
        if !group.is_empty() {
            fits.extend(fit_many(&group, &build_basis(size)?, &opts)?);
        }
    }
    let has = |n: &str| fits.iter().any(|f| f.target == n);
    let claims = ["pi2", "1212", "pi3", "pi4"].iter().all(|n| has(n)).then(|| verify_table_claims(&fits));
    let classes = if classes { Some(class_report(common.seed)?) } else { None };

    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir)?;
        for f in &fits {
            std::fs::write(dir.join(format!("{}.txt", f.target)), f.to_table())?;
        }
        if let Some(c) = &claims {
            std::fs::write(dir.join("claims.txt"), c.to_string())?;
        }
    }
    let output = DeriveOutput {
        version: crate::report::VERSION,
        seed: common.seed,
        fits: fits.iter().map(FitSummary::from).collect(),
        claims,
        classes,
    };
    let text = match common.format {
        Format::Json => serde_json::to_string_pretty(&output).expect("plain data serializes") + "\n",
        Format::Text => derive_text(&output, &fits),
    };
    print!("{text}");
    Ok(EXIT_OK)
}

fn derive_text(out: &DeriveOutput, fits: &[CoefficientVector]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "qdistance {}  seed {}", out.version, out.seed);
    for (sum, fit) in out.fits.iter().zip(fits) {
        let _ = writeln!(
            s,
            "\n{}: {} graphs, {} terms, rank {}/{}{}, train {:.1e}, held-out {:.1e}, denominators {:?}",
            sum.target,
            sum.graphs,
            sum.terms,
            sum.rank,
            sum.candidates,
            if sum.non_unique { " (non-unique)" } else { "" },
            sum.train_residual,
            sum.held_out_residual,
            sum.denominators,
        );
        if sum.terms <= 24 {
            for line in fit.to_table().lines().filter(|l| !l.starts_with('#')) {
                let _ = writeln!(s, "  {line}");
            }
        }
    }
    if let Some(c) = &out.claims {
        let _ = writeln!(s, "\nclaims:\n{c}");
    }
    if let Some(c) = &out.classes {
        let _ = writeln!(
            s,
            "classes: {} matchings (formula {}), {} nonempty",
            c.raw_matchings, c.formula, c.nonempty
        );
        for (name, count, eq) in c.comparisons() {
            let _ = writeln!(s, "  {:<38} {:>4}  {} {}", name, count, if eq { "==" } else { "!=" }, c.published);
        }
    }
    s
}

fn cmd_sweep(common: &Common, opts: &SweepOptions) -> Result<i32> {
    let setup = EstimationSetup::standard()?;
    let result = run_sweep(setup, opts)?;
    let mut buf = Vec::new();
    match common.format {
        Format::Text => result.write_csv(&mut buf)?,
        Format::Json => {
            buf = serde_json::to_vec_pretty(&result).expect("plain data serializes");
            buf.push(b'\n');
        }
    }
    emit(common, &String::from_utf8(buf).expect("utf-8 output"))?;
    Ok(EXIT_OK)
}
