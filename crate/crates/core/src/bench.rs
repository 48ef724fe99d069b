//! Timing harness for `T_total = T_qkg + T_enc`.
//!
//! For QAES, `t_qkg_ms` is the modelled key-generation time plus the wall
//! time of the BB84 simulation, `t_enc_ms` the wall time of encrypting the
//! file. `t_total_ms` adds the same model term to one outer wall-clock
//! measurement around both steps, so additivity is checked against a timer
//! that is independent of the two inner ones. AES rows have no key
//! generation step.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;

use crate::aes::{params_for_key_len, AesError, Sbox};
use crate::modes::{BlockMode, ModeError, QaesContext};
use crate::qkd::{run_session, t_qkg_model, Bb84Config, QkdError};

pub const DEFAULT_SIZES_KIB: [usize; 5] = [500, 1000, 1500, 2000, 3500];
pub const CSV_HEADER: &str = "algo,key_len,file_size_kib,repeats,t_qkg_ms,t_enc_ms,t_total_ms,t_total_spread_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algo {
    Aes,
    Qaes,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Aes => "AES",
            Algo::Qaes => "QAES",
        }
    }
}

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("no file sizes given")]
    NoSizes,
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error(transparent)]
    Aes(#[from] AesError),
    #[error(transparent)]
    Qkd(#[from] QkdError),
    #[error(transparent)]
    Mode(#[from] ModeError),
    #[error("BB84 session aborted at QBER {0:.4}")]
    Aborted(f64),
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes_kib: Vec<usize>,
    pub key_len: usize,
    pub algos: Vec<Algo>,
    pub repeats: usize,
    pub block_mode: BlockMode,
    /// Key generation for QAES rows. Offline mode needs 256 + key_len bits.
    pub bb84: Bb84Config,
    /// Seeds the synthetic input files.
    pub data_seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes_kib: DEFAULT_SIZES_KIB.to_vec(),
            key_len: 128,
            algos: vec![Algo::Aes, Algo::Qaes],
            repeats: 5,
            block_mode: BlockMode::Ctr,
            bb84: Bb84Config {
                n_pump: 2000,
                ..Default::default()
            },
            data_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algo: Algo,
    pub key_len: usize,
    pub file_size_kib: usize,
    pub repeats: usize,
    pub t_qkg_ms: f64,
    pub t_enc_ms: f64,
    pub t_total_ms: f64,
    /// Max minus min of `t_total_ms` across repeats.
    pub t_total_spread_ms: f64,
}

impl BenchRecord {
    /// `|t_total - (t_qkg + t_enc)| / t_total`.
    pub fn additivity_gap(&self) -> f64 {
        (self.t_total_ms - (self.t_qkg_ms + self.t_enc_ms)).abs() / self.t_total_ms
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            self.algo.name(),
            self.key_len,
            self.file_size_kib,
            self.repeats,
            self.t_qkg_ms,
            self.t_enc_ms,
            self.t_total_ms,
            self.t_total_spread_ms
        )
    }
}

pub fn to_csv(records: &[BenchRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Sample {
    qkg: f64,
    enc: f64,
    total: f64,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

fn time_aes(data: &[u8], key_len: usize, block_mode: BlockMode, key: &[u8]) -> Result<Sample, BenchError> {
    let params = params_for_key_len(key_len)?;
    let outer = Instant::now();
    let mut ctx = QaesContext::offline_with_box(&key[..key_len / 8], params, Sbox::standard().clone(), block_mode)?;
    let inner = Instant::now();
    std::hint::black_box(ctx.encrypt_message(data, &[0; 16])?);
    let enc = ms(inner);
    Ok(Sample {
        qkg: 0.0,
        enc,
        total: ms(outer),
    })
}

fn time_qaes(data: &[u8], cfg: &BenchConfig) -> Result<Sample, BenchError> {
    let model = t_qkg_model(&cfg.bb84);
    let outer = Instant::now();
    let session = run_session(&cfg.bb84)?;
    if session.aborted {
        return Err(BenchError::Aborted(session.qber_estimate));
    }
    let mut stream = session.key_stream();
    let mut ctx = QaesContext::offline_init(&mut stream, cfg.key_len, cfg.block_mode)?;
    let sim = ms(outer);
    let inner = Instant::now();
    std::hint::black_box(ctx.encrypt_message(data, &[0; 16])?);
    let enc = ms(inner);
    let total = ms(outer);
    Ok(Sample {
        qkg: model + sim,
        enc,
        total: model + total,
    })
}

fn summarize(algo: Algo, cfg: &BenchConfig, size: usize, mut samples: Vec<Sample>) -> BenchRecord {
    samples.sort_by(|a, b| a.total.total_cmp(&b.total));
    let median = samples[samples.len() / 2];
    BenchRecord {
        algo,
        key_len: cfg.key_len,
        file_size_kib: size,
        repeats: samples.len(),
        t_qkg_ms: median.qkg,
        t_enc_ms: median.enc,
        t_total_ms: median.total,
        t_total_spread_ms: samples[samples.len() - 1].total - samples[0].total,
    }
}

/// One record per (size, algo), components taken from the repeat with the
/// median total.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    if cfg.sizes_kib.is_empty() {
        return Err(BenchError::NoSizes);
    }
    if cfg.repeats == 0 {
        return Err(BenchError::NoRepeats);
    }
    params_for_key_len(cfg.key_len)?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.data_seed);
    let mut aes_key = [0u8; 32];
    rng.fill_bytes(&mut aes_key);

    let mut records = Vec::new();
    for &size in &cfg.sizes_kib {
        let mut data = vec![0u8; size * 1024];
        rng.fill_bytes(&mut data);
        for &algo in &cfg.algos {
            let samples = (0..cfg.repeats)
                .map(|_| match algo {
                    Algo::Aes => time_aes(&data, cfg.key_len, cfg.block_mode, &aes_key),
                    Algo::Qaes => time_qaes(&data, cfg),
                })
                .collect::<Result<Vec<_>, _>>()?;
            records.push(summarize(algo, cfg, size, samples));
        }
    }
    Ok(records)
}
