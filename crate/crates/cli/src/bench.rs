use std::fs;
use std::path::PathBuf;

use clap::{Args, ValueEnum};
use qaes_core::bench::{run_bench, to_csv, Algo, BenchConfig, DEFAULT_SIZES_KIB};

use crate::error::{CliError, CliResult};
use crate::{keys, BlockModeArg};

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlgoArg {
    Aes,
    Qaes,
    Both,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// File sizes in KiB.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SIZES_KIB)]
    pub sizes: Vec<usize>,
    #[arg(long, default_value_t = 128)]
    pub key_len: usize,
    #[arg(long, value_enum, default_value = "both")]
    pub algo: AlgoArg,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
    #[arg(long, value_enum, default_value = "ctr")]
    pub block_mode: BlockModeArg,
    /// BB84 config for the QAES key generation step.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides n_pump from the config (default 2000).
    #[arg(long)]
    pub n_pump: Option<usize>,
    /// Write CSV here instead of stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

pub fn bench(args: BenchArgs) -> CliResult {
    let mut bb84 = match &args.config {
        Some(p) => keys::load_config(Some(p))?,
        None => BenchConfig::default().bb84,
    };
    if let Some(n) = args.n_pump {
        bb84.n_pump = n;
    }
    let cfg = BenchConfig {
        sizes_kib: args.sizes,
        key_len: args.key_len,
        algos: match args.algo {
            AlgoArg::Aes => vec![Algo::Aes],
            AlgoArg::Qaes => vec![Algo::Qaes],
            AlgoArg::Both => vec![Algo::Aes, Algo::Qaes],
        },
        repeats: args.repeats,
        block_mode: args.block_mode.into(),
        bb84,
        data_seed: 0,
    };
    let records = run_bench(&cfg).map_err(|e| match e {
        qaes_core::bench::BenchError::Aborted(_) => CliError::Abort(e.to_string()),
        qaes_core::bench::BenchError::Mode(_) => CliError::Crypto(e.to_string()),
        _ => CliError::BadInput(e.to_string()),
    })?;
    let text = to_csv(&records);
    match &args.out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::write(p, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
