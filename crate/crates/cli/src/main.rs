//! `ssdb`: checks on finite-dimensional symmetrically self-dual spaces,
//! driven by JSON documents and reporting JSON verdicts.
//!
//! Exit codes: 0 for a true or successful verdict, 1 for a false verdict,
//! 2 for any error (the report then carries an `error` field).

mod commands;
mod docs;
mod report;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ssdb_core::subspace::DEFAULT_ORACLE_TRIALS;
use ssdb_core::Tolerance;

use commands::{BatchCommand, Context, Method, RelationAction};
use report::{CliError, Report};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "ssdb", version, about = "Verdicts on symmetrically self-dual spaces from JSON documents")]
struct Cli {
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Absolute tolerance.
    #[arg(long, global = true, allow_hyphen_values = true, default_value_t = 1e-9)]
    tol: f64,

    /// Relative rank cutoff for spans and pseudoinverses.
    #[arg(long = "rank-tol", global = true, allow_hyphen_values = true, default_value_t = 1e-10)]
    rank_tol: f64,

    /// Seed for randomized checks; always echoed in the report.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a space document.
    Validate { doc: PathBuf },
    /// q-positivity (or q-negativity) of a subspace or point set.
    CheckPositive {
        doc: PathBuf,
        #[arg(long)]
        negative: bool,
        /// Instead, test whether adding this point keeps the set q-positive
        /// (for a subspace: the point lies outside it and extends it).
        #[arg(long, allow_hyphen_values = true)]
        extend: Option<String>,
    },
    /// The q-complement of a subspace, with an orthonormal basis.
    Complement { doc: PathBuf },
    /// Maximal q-positivity of a subspace.
    CheckMaximal {
        doc: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Theorem)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_ORACLE_TRIALS)]
        trials: usize,
    },
    /// Split a point as a - n with a in the subspace and n in N_q(g0).
    Decompose {
        doc: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Run even when the hypotheses fail.
        #[arg(long)]
        force: bool,
    },
    /// Conjugate of a functional document at a point.
    Conjugate {
        doc: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    /// Adjoint, monotonicity or maximal monotonicity of a linear relation.
    Relation {
        #[arg(value_enum)]
        action: RelationAction,
        doc: PathBuf,
        /// all, via_complement, via_adjoint_monotone or via_adjoint_maximal.
        #[arg(long)]
        method: Option<String>,
    },
    /// Replay the worked examples against their known answers.
    Demo,
    /// Run one check over every JSON document in a directory.
    Batch {
        dir: PathBuf,
        #[arg(long, value_enum, default_value_t = BatchCommand::CheckPositive)]
        command: BatchCommand,
        #[arg(long, value_enum, default_value_t = Method::Theorem)]
        method: Method,
        #[arg(long, default_value_t = DEFAULT_ORACLE_TRIALS)]
        trials: usize,
    },
}

fn run(cli: &Cli, ctx: Context) -> Report {
    match &cli.command {
        Command::Validate { doc } => commands::run_on_document("validate", doc, ctx, |d, r| commands::validate(d, ctx, r)),
        Command::CheckPositive { doc, negative, extend } => {
            commands::run_on_document("check-positive", doc, ctx, |d, r| {
                commands::check_positive(d, ctx, *negative, extend.as_deref(), r)
            })
        }
        Command::Complement { doc } => {
            commands::run_on_document("complement", doc, ctx, |d, r| commands::complement(d, ctx, r))
        }
        Command::CheckMaximal { doc, method, trials } => {
            commands::run_on_document("check-maximal", doc, ctx, |d, r| {
                commands::check_maximal(d, ctx, *method, *trials, r)
            })
        }
        Command::Decompose { doc, point, force } => commands::run_on_document("decompose", doc, ctx, |d, r| {
            commands::decomposition(d, ctx, point, *force, r)
        }),
        Command::Conjugate { doc, at } => {
            commands::run_on_document("conjugate", doc, ctx, |d, r| commands::conjugate(d, ctx, at, r))
        }
        Command::Relation { action, doc, method } => commands::run_on_document("relation", doc, ctx, |d, r| {
            commands::relation(d, ctx, *action, method.as_deref(), r)
        }),
        Command::Demo => commands::demo(ctx),
        Command::Batch { dir, command, method, trials } => commands::batch(dir, *command, *method, *trials, ctx),
    }
}

fn emit(report: &Report, format: Format) -> ExitCode {
    let text = match format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    // A closed pipe downstream is not an error of the check itself.
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    ExitCode::from(report.exit as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::Parse(e.kind().to_string());
            eprint!("{e}");
            let report = Report::failed("ssdb", String::new(), 42, Tolerance::default(), &err);
            return emit(&report, Format::Json);
        }
    };
    let tol = match Tolerance::new(cli.tol, cli.rank_tol) {
        Ok(tol) => tol,
        Err(e) => {
            let report = Report::failed("ssdb", String::new(), cli.seed, Tolerance::default(), &e.into());
            return emit(&report, cli.format);
        }
    };
    let report = run(&cli, Context { tol, seed: cli.seed });
    emit(&report, cli.format)
}
