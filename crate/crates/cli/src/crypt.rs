use std::fs;
use std::path::PathBuf;

use clap::Args;
use qaes_core::container::{Container, OnlineExtension};
use qaes_core::modes::{Mode, ModeError, QaesContext};
use qaes_core::params_for_key_len;
use qaes_core::qkd::{QkdError, QuantumKeyStream};
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};
use crate::keys::{self, KeyMaterial, KeySource};
use crate::CipherArgs;

#[derive(Debug, Args)]
pub struct EncryptArgs {
    #[arg(long = "in", short = 'i')]
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub key: KeySource,
    #[command(flatten)]
    pub cipher: CipherArgs,
    /// 32 hex digits. Default: derived from the key and the plaintext.
    #[arg(long)]
    pub nonce: Option<String>,
}

#[derive(Debug, Args)]
pub struct DecryptArgs {
    #[arg(long = "in", short = 'i')]
    pub input: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub key: KeySource,
}

fn mode_error(e: ModeError) -> CliError {
    match e {
        ModeError::Key(QkdError::KeyDepleted { requested, remaining }) => CliError::Crypto(format!(
            "key material exhausted: need {requested} bits, {remaining} available; \
             generate a longer key (raise n_pump) or use offline mode"
        )),
        other => CliError::Crypto(other.to_string()),
    }
}

fn parse_nonce(s: &str) -> CliResult<[u8; 16]> {
    hex::decode(s)
        .ok()
        .and_then(|v| <[u8; 16]>::try_from(v).ok())
        .ok_or_else(|| CliError::BadInput(format!("nonce must be 32 hex digits, got {s:?}")))
}

fn synthetic_nonce(key: &KeyMaterial, data: &[u8]) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(b"qaes nonce");
    h.update((key.bits.len() as u64).to_be_bytes());
    h.update(key.bits.as_bytes());
    h.update(data);
    h.finalize()[..16].try_into().expect("sha256 is 32 bytes")
}

fn context(mode: Mode, key: &KeyMaterial, key_len: usize, c: &Container) -> CliResult<QaesContext> {
    let mut stream = QuantumKeyStream::new(key.bits.clone());
    match mode {
        Mode::Offline => QaesContext::offline_init(&mut stream, key_len, c.block_mode),
        Mode::Online => QaesContext::online(
            stream,
            key_len,
            c.block_mode,
            c.online.map(|e| e.options).unwrap_or_default(),
        ),
    }
    .map_err(mode_error)
}

pub fn encrypt(args: EncryptArgs) -> CliResult {
    let data = fs::read(&args.input).map_err(|e| CliError::read(&args.input, e))?;
    params_for_key_len(args.cipher.key_len).map_err(|e| CliError::BadInput(e.to_string()))?;
    let nonce = args.nonce.as_deref().map(parse_nonce).transpose()?;
    let key = match (&args.key.key, &args.key.config) {
        (Some(path), _) => keys::load_key_file(path)?,
        (None, config) => keys::from_config(&keys::load_config(config.as_deref())?)?,
    };
    let mode: Mode = args.cipher.mode.into();
    let mut c = Container {
        mode,
        key_len: args.cipher.key_len,
        block_mode: args.cipher.block_mode.into(),
        nonce: nonce.unwrap_or_else(|| synthetic_nonce(&key, &data)),
        online: (mode == Mode::Online).then(|| OnlineExtension {
            options: args.cipher.online_options(),
            session_seed: key.seed,
            config_digest: key.config_digest,
        }),
        payload: Vec::new(),
    };
    let mut ctx = context(mode, &key, c.key_len, &c)?;
    c.payload = ctx.encrypt_message(&data, &c.nonce).map_err(mode_error)?;
    fs::write(&args.out, c.encode()).map_err(|e| CliError::write(&args.out, e))?;
    if let Some(s) = ctx.stream() {
        eprintln!("consumed {} of {} key bits", s.cursor(), s.len());
    }
    Ok(())
}

pub fn decrypt(args: DecryptArgs) -> CliResult {
    let bytes = fs::read(&args.input).map_err(|e| CliError::read(&args.input, e))?;
    let c = Container::decode(&bytes).map_err(|e| CliError::BadInput(format!("{}: {e}", args.input.display())))?;
    let key = match (&args.key.key, &args.key.config, &c.online) {
        (Some(path), _, ext) => {
            let key = keys::load_key_file(path)?;
            if let Some(ext) = ext {
                if ext.config_digest != key.config_digest || ext.session_seed != key.seed {
                    return Err(CliError::Crypto(
                        "key file comes from a different BB84 session than the container".into(),
                    ));
                }
            }
            key
        }
        (None, config, ext) => {
            let mut cfg = keys::load_config(config.as_deref())?;
            if let Some(ext) = ext {
                cfg.seed = ext.session_seed;
                if cfg.digest() != ext.config_digest {
                    return Err(CliError::Crypto(
                        "config does not match the BB84 session recorded in the container".into(),
                    ));
                }
            }
            keys::from_config(&cfg)?
        }
    };
    let mut ctx = context(c.mode, &key, c.key_len, &c)?;
    let plain = ctx.decrypt_message(&c.payload, &c.nonce).map_err(mode_error)?;
    fs::write(&args.out, plain).map_err(|e| CliError::write(&args.out, e))
}
