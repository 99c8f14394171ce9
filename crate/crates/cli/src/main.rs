use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use courant_cli::config::parse_config;
use courant_cli::output::{emit_report, exit_code, Format, EXIT_INPUT};
use courant_cli::run::{run_command, Command, Flags};
use courant_core::morphism::ShiftKind;

#[derive(Parser)]
#[command(name = "courant", version, about = "Exact checks for regular Courant algebroids in split form")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[arg(long, value_enum, global = true, default_value = "text")]
    format: FormatArg,
    /// Seed for sampled connections and forms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monomial degree cap of the test family.
    #[arg(long, global = true, default_value_t = 2)]
    degree: u32,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Hoist,
    Omega,
    Central,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate fiber, connection and quintuple, then the Courant axioms.
    Check { file: PathBuf },
    /// Courant axioms only.
    Axioms { file: PathBuf },
    /// Emit the standard 3-form and check that it is closed.
    Charform { file: PathBuf },
    /// Compare E-connection 3-forms with the standard one.
    Chernweil { file: PathBuf },
    /// Emit <R^R> and compare with d H.
    Pontryagin { file: PathBuf },
    /// Find a hoist for [cform] and check coherence.
    Coherent { file: PathBuf },
    /// Build a quintuple from a characteristic pair.
    Build { file: PathBuf },
    /// Quintuple -> pair -> quintuple.
    Roundtrip { file: PathBuf },
    /// Transport along [iso].
    Transport { file: PathBuf },
    /// Canned equivalence isomorphisms.
    Shift {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: KindArg,
    },
    /// Naive versus Chevalley-Eilenberg differential tables.
    Naive { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, file) = match cli.command {
        Cmd::Check { file } => (Command::Check, file),
        Cmd::Axioms { file } => (Command::Axioms, file),
        Cmd::Charform { file } => (Command::Charform, file),
        Cmd::Chernweil { file } => (Command::Chernweil, file),
        Cmd::Pontryagin { file } => (Command::Pontryagin, file),
        Cmd::Coherent { file } => (Command::Coherent, file),
        Cmd::Build { file } => (Command::Build, file),
        Cmd::Roundtrip { file } => (Command::Roundtrip, file),
        Cmd::Transport { file } => (Command::Transport, file),
        Cmd::Shift { file, kind } => {
            let kind = match kind {
                KindArg::Hoist => ShiftKind::Hoist,
                KindArg::Omega => ShiftKind::Omega,
                KindArg::Central => ShiftKind::Central,
            };
            (Command::Shift(kind), file)
        }
        Cmd::Naive { file } => (Command::Naive, file),
    };
    let format = match cli.format {
        FormatArg::Text => Format::Text,
        FormatArg::Json => Format::Json,
    };
    let flags = Flags { seed: cli.seed, degree: cli.degree };
    let outcome = parse_config(&file).map_err(Into::into).and_then(|cfg| run_command(cmd, &cfg, flags));
    match outcome {
        Ok(out) => {
            print!("{}", emit_report(&out.report, &out.artifacts, format));
            ExitCode::from(exit_code(&out.report) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT as u8)
        }
    }
}
