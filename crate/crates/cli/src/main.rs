//! `dispkey`: experiments on displacement-key encryption of linear optics.
//!
//! Exit codes: 0 when every check passed, 1 when a bound or tolerance was
//! violated (or a protocol session failed), 2 on usage or configuration
//! errors.

mod commands;
mod presets;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Debug, Parser)]
#[command(name = "dispkey", version, about = "Displacement-key encryption experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args, Clone)]
pub struct Common {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Report path; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Leave out the generation time and zero the runtime column.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Trace distance of encrypted state pairs against the security bound.
    VerifyBound(commands::VerifyArgs),
    /// Closed form vs quadrature (and Monte-Carlo) for the channel elements.
    OracleCheck(commands::OracleArgs),
    /// Numerical checks of the intermediate identities and bounds.
    LemmaChecks(commands::LemmaArgs),
    /// Passive encrypt/compute/decrypt round trip.
    ProtocolDemo(commands::DemoArgs),
    /// Round trip with one mid-circuit measurement and feedforward.
    AdaptiveDemo(commands::AdaptiveArgs),
    /// Run Bob's side of a networked session.
    Serve(commands::ServeArgs),
    /// Run Alice's side against a running server.
    Connect(commands::ConnectArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::VerifyBound(a) => commands::verify_bound(&cli.common, a),
        Command::OracleCheck(a) => commands::oracle_check(&cli.common, a),
        Command::LemmaChecks(a) => commands::lemma_checks(&cli.common, a),
        Command::ProtocolDemo(a) => commands::protocol_demo(&cli.common, a),
        Command::AdaptiveDemo(a) => commands::adaptive_demo(&cli.common, a),
        Command::Serve(a) => commands::serve(&cli.common, a),
        Command::Connect(a) => commands::connect(&cli.common, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(commands::Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(commands::Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
