use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qaes_core::qkd::{run_session, Bb84Config, Bb84SessionResult, BitString};

use crate::error::{CliError, CliResult};
use crate::keyfile::KeyFile;

#[derive(Debug, Args)]
pub struct KeygenArgs {
    /// BB84 config file (TOML). Defaults apply to missing keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, short)]
    pub out: PathBuf,
}

/// Where encrypt and decrypt get key bits from.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct KeySource {
    /// Key file written by `keygen`.
    #[arg(long)]
    pub key: Option<PathBuf>,
    /// Run an embedded BB84 session from this config instead.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

/// Key bits plus the identity of the session that produced them.
#[derive(Debug, Clone)]
pub struct KeyMaterial {
    pub bits: BitString,
    pub seed: u64,
    pub config_digest: [u8; 8],
}

pub fn load_config(path: Option<&Path>) -> CliResult<Bb84Config> {
    let Some(path) = path else {
        return Ok(Bb84Config::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    Bb84Config::parse(&text).map_err(|e| CliError::BadInput(format!("{}: {e}", path.display())))
}

pub fn session(cfg: &Bb84Config) -> CliResult<Bb84SessionResult> {
    let r = run_session(cfg).map_err(|e| CliError::BadInput(e.to_string()))?;
    if r.aborted {
        return Err(CliError::Abort(format!(
            "BB84 session aborted: estimated QBER {:.4} exceeds threshold {} ({} sifted, {} sampled)",
            r.qber_estimate, cfg.qber_abort_threshold, r.n_sifted, r.n_sampled
        )));
    }
    Ok(r)
}

pub fn keygen(args: KeygenArgs) -> CliResult {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let r = session(&cfg)?;
    let kf = KeyFile {
        bits: r.sifted_key.clone(),
        qber: r.qber_estimate,
        seed: cfg.seed,
        config_digest: cfg.digest(),
    };
    fs::write(&args.out, kf.to_text()).map_err(|e| CliError::write(&args.out, e))?;
    println!(
        "pumped {} qubits, sifted {}, sampled {}, qber {:.4}, usable key bits {}, modelled t_qkg {:.4} ms",
        r.n_pump,
        r.n_sifted,
        r.n_sampled,
        r.qber_estimate,
        r.usable_bits(),
        r.t_qkg
    );
    Ok(())
}

pub fn load_key_file(path: &Path) -> CliResult<KeyMaterial> {
    let text = fs::read_to_string(path).map_err(|e| CliError::read(path, e))?;
    let kf = KeyFile::parse(&text)?;
    Ok(KeyMaterial {
        bits: kf.bits,
        seed: kf.seed,
        config_digest: kf.config_digest,
    })
}

/// Runs the embedded session for `cfg` as given.
pub fn from_config(cfg: &Bb84Config) -> CliResult<KeyMaterial> {
    let r = session(cfg)?;
    Ok(KeyMaterial {
        bits: r.sifted_key,
        seed: cfg.seed,
        config_digest: cfg.digest(),
    })
}
