use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qaes_core::modes::{BlockMode, BoxRefresh, KeyRefresh, Mode, OnlineOptions};

mod analyze;
mod bench;
mod crypt;
mod demo;
mod error;
mod keyfile;
mod keys;

use error::CliResult;

/// AES with quantum-keyed dynamic S-boxes over a simulated BB84 link.
#[derive(Debug, Parser)]
#[command(name = "qaes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a BB84 session and write the usable key bits to a key file.
    Keygen(keys::KeygenArgs),
    /// Encrypt a file into a QAES container.
    Encrypt(crypt::EncryptArgs),
    /// Decrypt a QAES container.
    Decrypt(crypt::DecryptArgs),
    /// Row correlation report for two S-boxes or fixture grids.
    SboxAnalyze(analyze::AnalyzeArgs),
    /// Time AES and QAES over synthetic files, CSV output.
    Bench(bench::BenchArgs),
    /// Two-party negotiation over localhost TCP, or in-process.
    Demo(demo::DemoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Online,
    Offline,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Online => Mode::Online,
            ModeArg::Offline => Mode::Offline,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BlockModeArg {
    Ctr,
    Cfb,
    Ofb,
    Raw,
}

impl From<BlockModeArg> for BlockMode {
    fn from(m: BlockModeArg) -> BlockMode {
        match m {
            BlockModeArg::Ctr => BlockMode::Ctr,
            BlockModeArg::Cfb => BlockMode::Cfb,
            BlockModeArg::Ofb => BlockMode::Ofb,
            BlockModeArg::Raw => BlockMode::RawBlock,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoxRefreshArg {
    Message,
    Block,
    Round,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KeyRefreshArg {
    Block,
    Message,
}

/// Cipher selection shared by encrypt and demo.
#[derive(Debug, Clone, Args)]
pub struct CipherArgs {
    #[arg(long, value_enum, default_value = "offline")]
    pub mode: ModeArg,
    /// 128, 192 or 256.
    #[arg(long, default_value_t = 128)]
    pub key_len: usize,
    #[arg(long, value_enum, default_value = "ctr")]
    pub block_mode: BlockModeArg,
    /// Online mode: how often the S-box is regenerated.
    #[arg(long, value_enum, default_value = "message")]
    pub box_refresh: BoxRefreshArg,
    /// Online mode: how often whitening and round keys are redrawn.
    #[arg(long, value_enum, default_value = "block")]
    pub key_refresh: KeyRefreshArg,
}

impl CipherArgs {
    pub fn online_options(&self) -> OnlineOptions {
        OnlineOptions {
            key_refresh: match self.key_refresh {
                KeyRefreshArg::Block => KeyRefresh::PerBlock,
                KeyRefreshArg::Message => KeyRefresh::PerMessage,
            },
            box_refresh: match self.box_refresh {
                BoxRefreshArg::Message => BoxRefresh::PerMessage,
                BoxRefreshArg::Block => BoxRefresh::PerBlock,
                BoxRefreshArg::Round => BoxRefresh::PerRound,
            },
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Keygen(a) => keys::keygen(a),
        Command::Encrypt(a) => crypt::encrypt(a),
        Command::Decrypt(a) => crypt::decrypt(a),
        Command::SboxAnalyze(a) => analyze::analyze(a),
        Command::Bench(a) => bench::bench(a),
        Command::Demo(a) => demo::demo(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qaes: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
