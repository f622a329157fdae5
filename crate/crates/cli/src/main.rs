mod commands;
mod config;
mod examples;
mod table;
mod verify;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::parser::ValueSource;
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use commands::{Failure, Outcome};
use config::{Format, RunConfig};

/// Exact obstruction calculus for CR deformations of X^{2n-1} in P^n.
///
/// Exit status: 0 success or fillable, 1 negative verdict or failed check,
/// 2 usage or input error, 3 the finite model did not stabilize.
#[derive(Parser)]
#[command(name = "crobs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form versus Čech cohomology of line and tangent bundles on P^0..P^4.
    Cohomology(RunConfig),
    /// Per-weight H^1 of the extended complex, H^2 and dim W_k.
    Obstructions(RunConfig),
    /// Fillability verdict for a deformation tensor file.
    Classify(RunConfig),
    /// Runs the invariant suites; one pass/fail record per group.
    Verify {
        #[command(flatten)]
        cfg: RunConfig,
        /// Flip the sign of one half of the bracket (detector check).
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Formal Kuranishi series of a seed (from --input, else random from --seed).
    Kuranishi {
        #[command(flatten)]
        cfg: RunConfig,
        /// Replace the nonnegative-weight part of the seed by an exact correction first.
        #[arg(long)]
        negative_representative: bool,
    },
    /// Writes the bundled example tensors into a directory.
    #[command(hide = true)]
    Examples {
        #[arg(long)]
        out: PathBuf,
    },
}

fn n_given(m: &clap::ArgMatches) -> bool {
    m.subcommand()
        .is_some_and(|(_, sub)| sub.try_get_raw("n").is_ok() && sub.value_source("n") == Some(ValueSource::CommandLine))
}

fn dispatch(cmd: Command, n_given: bool) -> Result<Outcome, Failure> {
    let check = |cfg: &RunConfig| cfg.validate().map_err(Failure::usage);
    match cmd {
        Command::Cohomology(cfg) => {
            check(&cfg)?;
            commands::cohomology(&cfg)
        }
        Command::Obstructions(cfg) => {
            check(&cfg)?;
            commands::obstructions(&cfg)
        }
        Command::Classify(cfg) => {
            check(&cfg)?;
            commands::classify(&cfg, n_given)
        }
        Command::Verify { cfg, inject_fault } => {
            check(&cfg)?;
            let r = verify::run(&cfg, inject_fault);
            let out = match cfg.format {
                Format::Json => serde_json::to_string_pretty(&r).expect("serializable") + "\n",
                Format::Table => {
                    let rows: Vec<Vec<String>> = r
                        .groups
                        .iter()
                        .map(|g| {
                            vec![
                                g.name.to_string(),
                                g.checked.to_string(),
                                if g.passed { "pass" } else { "FAIL" }.to_string(),
                                g.detail.clone().unwrap_or_default(),
                            ]
                        })
                        .collect();
                    table::render(&["group", "checks", "result", "detail"], &rows)
                }
            };
            Ok(Outcome { out, code: if r.passed { 0 } else { 1 } })
        }
        Command::Kuranishi { cfg, negative_representative } => {
            check(&cfg)?;
            commands::kuranishi(&cfg, negative_representative)
        }
        Command::Examples { out } => {
            let files = examples::build()?;
            for (name, text) in files {
                let path = out.join(name);
                std::fs::write(&path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
            }
            Ok(Outcome { out: String::new(), code: 0 })
        }
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().get_matches();
    let n_given = n_given(&matches);
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let code = match dispatch(cli.command, n_given) {
        Ok(o) => {
            let mut stdout = std::io::stdout().lock();
            let _ = stdout.write_all(o.out.as_bytes());
            o.code
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    };
    ExitCode::from(code as u8)
}
