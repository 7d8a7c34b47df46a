use clap::{Parser, Subcommand, ValueEnum};
use ptalg::cli;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ptalg",
    about = "Algebras of partially triangulated marked surfaces: bases, tables, invariants"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StyleArg {
    Alt0,
    Alt2,
    Jacobian,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Core,
    Symmetry,
    Brauer,
    Flip,
    Resolution,
    Weights,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Check the surface document and report every violated invariant.
    Validate {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Faces, degrees and classification labels.
    Describe {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Print the defining relations in the requested style.
    Present {
        file: String,
        #[arg(long, value_enum, default_value = "alt0")]
        style: StyleArg,
        #[arg(long)]
        json: bool,
    },
    /// List the basis of the algebra.
    Basis {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Full structure-constant table.
    Table {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Rank, Cartan matrix, centre, trace data and classification labels.
    Invariants {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Flip an arc (with coefficient mutation) and print the new document.
    Flip {
        file: String,
        #[arg(long)]
        arc: String,
        #[arg(long)]
        write: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Run a verification suite; exits nonzero on any FAIL.
    Verify {
        file: String,
        #[arg(long, value_enum, default_value = "core")]
        suite: SuiteArg,
        #[arg(long)]
        json: bool,
    },
    /// Independent truncation oracle for the dimension and products.
    Oracle {
        file: String,
        #[arg(long, short = 'L')]
        l: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Realize a Brauer graph as a surface document.
    ImportBrauer {
        file: String,
        #[arg(long)]
        write: Option<String>,
    },
}

fn main() -> ExitCode {
    let args = Cli::parse();
    let outcome = match args.command {
        Command::Validate { file, json } => cli::cmd_validate(&file, json),
        Command::Describe { file, json } => cli::cmd_describe(&file, json),
        Command::Present { file, style, json } => {
            let style = match style {
                StyleArg::Alt0 => cli::PresentStyle::Alt0,
                StyleArg::Alt2 => cli::PresentStyle::Alt2,
                StyleArg::Jacobian => cli::PresentStyle::Jacobian,
            };
            cli::cmd_present(&file, style, json)
        }
        Command::Basis { file, json } => cli::cmd_basis(&file, json),
        Command::Table { file, json } => cli::cmd_table(&file, json),
        Command::Invariants { file, json } => cli::cmd_invariants(&file, json),
        Command::Flip {
            file,
            arc,
            write,
            json,
        } => cli::cmd_flip(&file, &arc, write.as_deref(), json),
        Command::Verify { file, suite, json } => {
            let suite = match suite {
                SuiteArg::Core => cli::Suite::Core,
                SuiteArg::Symmetry => cli::Suite::Symmetry,
                SuiteArg::Brauer => cli::Suite::Brauer,
                SuiteArg::Flip => cli::Suite::Flip,
                SuiteArg::Resolution => cli::Suite::Resolution,
                SuiteArg::Weights => cli::Suite::Weights,
                SuiteArg::All => cli::Suite::All,
            };
            cli::cmd_verify(&file, suite, json)
        }
        Command::Oracle { file, l, json } => cli::cmd_oracle(&file, l, json),
        Command::ImportBrauer { file, write } => cli::cmd_import_brauer(&file, write.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e))
        }
    }
}
