//! `pmdkit` command-line front end. Every subcommand produces one report;
//! the exit code is 0 when every check passes, 1 when a check fails and 2 on
//! usage or input errors.

pub mod commands;
pub mod config;
pub mod report;

use clap::{Parser, Subcommand};
use commands::{aqec, auth, nm, pmd, ptc, qlde, sweep, Common};
use report::Report;
use std::io::Write;

pub use commands::stream_rng;

#[derive(Parser, Debug)]
#[command(name = "pmdkit", version, about = "Pauli manipulation detection toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Purity testing code families.
    #[command(subcommand)]
    Ptc(PtcCommand),
    /// Pauli manipulation detection codes.
    #[command(subcommand)]
    Pmd(PmdCommand),
    /// Erasure list decoding of stabilizer codes.
    #[command(subcommand)]
    Qlde(QldeCommand),
    /// Composed codes against erasure adversaries.
    #[command(subcommand)]
    Aqec(AqecCommand),
    /// Authentication protocols.
    #[command(subcommand)]
    Auth(AuthCommand),
    /// Non-malleable codes for bit-wise tampering.
    #[command(subcommand)]
    Nm(NmCommand),
    /// Parameter grids emitted as tables.
    #[command(subcommand)]
    Sweep(SweepCommand),
}

#[derive(Subcommand, Debug)]
enum PtcCommand {
    /// Strong error and pairwise detectability of a family.
    Check(ptc::PtcCheck),
}

#[derive(Subcommand, Debug)]
enum PmdCommand {
    /// Measured error against its bound, key phases and the authentication map.
    Verify(pmd::PmdVerify),
}

#[derive(Subcommand, Debug)]
enum QldeCommand {
    /// Candidate corrections for one erased set and syndrome.
    Decode(qlde::QldeDecode),
    /// Largest list over all erased sets within a fraction of the qubits.
    Profile(qlde::QldeProfile),
    /// Random CSS code and its list profile against the classical ones.
    SampleCss(qlde::QldeSampleCss),
}

#[derive(Subcommand, Debug)]
enum AqecCommand {
    /// Entanglement fidelity against one adversary file or seeded adversaries.
    Simulate(aqec::AqecSimulate),
}

#[derive(Subcommand, Debug)]
enum AuthCommand {
    /// Completeness and one attack on a toy protocol.
    Simulate(auth::AuthSimulate),
}

#[derive(Subcommand, Debug)]
enum NmCommand {
    /// Seeded random search for a small non-malleable code.
    Search(nm::NmSearch),
    /// Exhaustive distance of a code file.
    Verify(nm::NmVerify),
}

#[derive(Subcommand, Debug)]
enum SweepCommand {
    /// PMD error over a grid of family parameters.
    Pmd(sweep::SweepPmd),
    /// Fidelity over a grid of erasure budgets.
    Aqec(sweep::SweepAqec),
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Ptc(PtcCommand::Check(a)) => &a.common,
            Command::Pmd(PmdCommand::Verify(a)) => &a.common,
            Command::Qlde(QldeCommand::Decode(a)) => &a.common,
            Command::Qlde(QldeCommand::Profile(a)) => &a.common,
            Command::Qlde(QldeCommand::SampleCss(a)) => &a.common,
            Command::Aqec(AqecCommand::Simulate(a)) => &a.common,
            Command::Auth(AuthCommand::Simulate(a)) => &a.common,
            Command::Nm(NmCommand::Search(a)) => &a.common,
            Command::Nm(NmCommand::Verify(a)) => &a.common,
            Command::Sweep(SweepCommand::Pmd(a)) => &a.common,
            Command::Sweep(SweepCommand::Aqec(a)) => &a.common,
        }
    }

    fn execute(&self) -> anyhow::Result<Report> {
        match self {
            Command::Ptc(PtcCommand::Check(a)) => a.execute(),
            Command::Pmd(PmdCommand::Verify(a)) => a.execute(),
            Command::Qlde(QldeCommand::Decode(a)) => a.execute(),
            Command::Qlde(QldeCommand::Profile(a)) => a.execute(),
            Command::Qlde(QldeCommand::SampleCss(a)) => a.execute(),
            Command::Aqec(AqecCommand::Simulate(a)) => a.execute(),
            Command::Auth(AuthCommand::Simulate(a)) => a.execute(),
            Command::Nm(NmCommand::Search(a)) => a.execute(),
            Command::Nm(NmCommand::Verify(a)) => a.execute(),
            Command::Sweep(SweepCommand::Pmd(a)) => a.execute(),
            Command::Sweep(SweepCommand::Aqec(a)) => a.execute(),
        }
    }
}

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Runs with the process's standard streams.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// `args` starts with the program name, as in `std::env::args`.
pub fn run_with<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return if e.exit_code() == 0 { EXIT_PASS } else { EXIT_USAGE };
        }
    };
    match emit(&cli.command, out) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn emit(command: &Command, out: &mut dyn Write) -> anyhow::Result<bool> {
    let common = command.common();
    let report = command.execute()?;
    if let Some(path) = &common.save_config {
        config::save_config(&report.config, path)?;
    }
    let text = report.render(common.format)?;
    match &common.output {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(report.pass)
}
