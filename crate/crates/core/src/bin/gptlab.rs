use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use gptlab::query::LearningProblem;
use gptlab::report::{
    interference_report, parity_report, subroutine_report, useless_check_report, Format, Report, RunConfig,
};
use gptlab::theories::Theory;

#[derive(Parser)]
#[command(name = "gptlab", version, about = "Oracle, interference and query-bound experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coherence residuals and Sorkin samples for N = 2..N.
    Interference {
        #[arg(long, value_enum, default_value = "quantum")]
        theory: TheoryArg,
        #[command(flatten)]
        common: Common,
    },
    /// Query bounds, explicit algorithm and symbolic verdicts for parity.
    Parity(Common),
    /// Classical, symbolic and sampled quantum uselessness of a problem file.
    UselessCheck {
        #[arg(long = "in", value_name = "PATH")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Oracle from a bounded-error toy algorithm, before and after amplification.
    Subroutine {
        /// Unamplified acceptance probability, as p/q or an integer.
        #[arg(long, default_value = "2/3")]
        p: String,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long = "N", default_value_t = 4)]
    slits: usize,
    #[arg(long, default_value_t = 2)]
    k: usize,
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum TheoryArg {
    Classical,
    Quantum,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

impl Common {
    fn config(&self, command: &str) -> RunConfig {
        RunConfig {
            command: command.into(),
            tol: self.tol,
            seed: self.seed,
            samples: self.samples,
            slits: self.slits,
            k: self.k,
            n: self.n,
            format: match self.format {
                FormatArg::Json => Format::Json,
                FormatArg::Csv => Format::Csv,
            },
            ..RunConfig::default()
        }
    }
}

fn run(cli: Cli) -> Result<(Report, Option<PathBuf>, Format), String> {
    let (report, common) = match cli.command {
        Command::Interference { theory, common } => {
            let cfg = RunConfig {
                theory: match theory {
                    TheoryArg::Classical => Theory::Classical,
                    TheoryArg::Quantum => Theory::Quantum,
                },
                ..common.config("interference")
            };
            (interference_report(&cfg).map(Report::Interference), common)
        }
        Command::Parity(common) => (parity_report(&common.config("parity")).map(Report::Parity), common),
        Command::UselessCheck { input, common } => {
            let text = std::fs::read_to_string(&input).map_err(|e| format!("{}: {e}", input.display()))?;
            let problem = LearningProblem::from_json(&text).map_err(|e| format!("{}: {e}", input.display()))?;
            let cfg = RunConfig {
                input: Some(input.display().to_string()),
                ..common.config("useless-check")
            };
            (useless_check_report(&problem, &cfg).map(Report::UselessCheck), common)
        }
        Command::Subroutine { p, q, common } => {
            let cfg = RunConfig {
                p_acc: p,
                q,
                ..common.config("subroutine")
            };
            (subroutine_report(&cfg).map(Report::Subroutine), common)
        }
    };
    let report = report.map_err(|e| e.to_string())?;
    let format = report.config().format;
    Ok((report, common.out, format))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (report, out, format) = match run(cli) {
        Ok(v) => v,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let text = match report.render(format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(&path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(1);
            }
        }
        None => print!("{text}"),
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}
