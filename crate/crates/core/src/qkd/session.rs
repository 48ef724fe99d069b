use std::fmt::Write as _;

use rand::{seq::index, Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::physics::{flip, intercept_resend, measure, Basis, Qubit};
use super::{t_qkg_model, Bb84Config, BitString, QkdError, QuantumKeyStream};

/// Outcome of one simulated BB84 exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct Bb84SessionResult {
    /// Sender's sifted bits minus the sacrificed sample. Empty when aborted.
    pub sifted_key: BitString,
    /// Receiver's copy of the same positions. Differs where errors survived.
    pub receiver_key: BitString,
    pub qber_estimate: f64,
    /// Actual disagreement rate over all sifted positions.
    pub error_rate: f64,
    pub n_pump: usize,
    pub n_sifted: usize,
    pub n_sampled: usize,
    /// Modelled key-generation time in milliseconds.
    pub t_qkg: f64,
    pub aborted: bool,
}

impl Bb84SessionResult {
    pub fn usable_bits(&self) -> usize {
        self.sifted_key.len()
    }

    pub fn sift_ratio(&self) -> f64 {
        self.n_sifted as f64 / self.n_pump as f64
    }

    pub fn key_stream(&self) -> QuantumKeyStream {
        QuantumKeyStream::new(self.sifted_key.clone())
    }
}

/// Per-qubit record of a session, sufficient to replay sifting offline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QubitRecord {
    pub sent: Qubit,
    pub eve_basis: Option<Basis>,
    pub receiver_basis: Basis,
    pub received: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SessionTranscript {
    pub records: Vec<QubitRecord>,
    /// Sacrificed positions, as indices into the sifted sequence, ascending.
    pub sample: Vec<usize>,
}

fn basis_char(b: Basis) -> char {
    match b {
        Basis::Rectilinear => 'R',
        Basis::Diagonal => 'D',
    }
}

fn parse_basis(s: &str) -> Option<Basis> {
    match s {
        "R" => Some(Basis::Rectilinear),
        "D" => Some(Basis::Diagonal),
        _ => None,
    }
}

impl SessionTranscript {
    /// One line per qubit: `index sent_bit sent_basis eve_basis|- receiver_basis received_bit`,
    /// then a final `sample` line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.records.iter().enumerate() {
            let _ = writeln!(
                out,
                "{i} {} {} {} {} {}",
                r.sent.value as u8,
                basis_char(r.sent.basis),
                r.eve_basis.map_or('-', basis_char),
                basis_char(r.receiver_basis),
                r.received as u8
            );
        }
        out.push_str("sample");
        for s in &self.sample {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        out
    }

    pub fn parse(text: &str) -> Result<Self, QkdError> {
        let bad = |line: usize| QkdError::BadTranscript(line + 1);
        let mut t = SessionTranscript::default();
        for (n, line) in text.lines().enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                ["sample", rest @ ..] => {
                    t.sample = rest
                        .iter()
                        .map(|s| s.parse().map_err(|_| bad(n)))
                        .collect::<Result<_, _>>()?;
                }
                [idx, v, b, eve, rb, rv] => {
                    if idx.parse::<usize>().ok() != Some(t.records.len()) {
                        return Err(bad(n));
                    }
                    let bit = |s: &str| match s {
                        "0" => Some(false),
                        "1" => Some(true),
                        _ => None,
                    };
                    let eve_basis = match *eve {
                        "-" => None,
                        other => Some(parse_basis(other).ok_or(bad(n))?),
                    };
                    t.records.push(QubitRecord {
                        sent: Qubit::prepare(bit(v).ok_or(bad(n))?, parse_basis(b).ok_or(bad(n))?),
                        eve_basis,
                        receiver_basis: parse_basis(rb).ok_or(bad(n))?,
                        received: bit(rv).ok_or(bad(n))?,
                    });
                }
                [] => {}
                _ => return Err(bad(n)),
            }
        }
        Ok(t)
    }

    /// Positions where sender and receiver bases matched.
    pub fn matched_positions(&self) -> Vec<usize> {
        self.records
            .iter()
            .enumerate()
            .filter(|(_, r)| r.sent.basis == r.receiver_basis)
            .map(|(i, _)| i)
            .collect()
    }

    /// Re-derives (sender usable key, sampled error count) from the records alone.
    pub fn replay_key(&self) -> (BitString, usize) {
        let matched = self.matched_positions();
        let mut sample = self.sample.iter().peekable();
        let mut key = BitString::new();
        let mut errors = 0;
        for (k, &pos) in matched.iter().enumerate() {
            let r = &self.records[pos];
            if sample.peek() == Some(&&k) {
                sample.next();
                errors += (r.sent.value != r.received) as usize;
            } else {
                key.push(r.sent.value);
            }
        }
        (key, errors)
    }
}

pub fn run_session(cfg: &Bb84Config) -> Result<Bb84SessionResult, QkdError> {
    run(cfg, false).map(|(r, _)| r)
}

/// Same as [`run_session`], also returning the per-qubit transcript.
pub fn run_session_traced(cfg: &Bb84Config) -> Result<(Bb84SessionResult, SessionTranscript), QkdError> {
    run(cfg, true)
}

/// Number of sifted bits disclosed for QBER estimation.
pub fn sample_size(n_sifted: usize, sacrifice_fraction: f64) -> usize {
    ((n_sifted as f64 * sacrifice_fraction).round() as usize).min(n_sifted)
}

fn run(cfg: &Bb84Config, trace: bool) -> Result<(Bb84SessionResult, SessionTranscript), QkdError> {
    cfg.validate()?;
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut transcript = SessionTranscript::default();
    let mut sent_bits = Vec::with_capacity(cfg.n_pump / 2 + 16);
    let mut recv_bits = Vec::with_capacity(cfg.n_pump / 2 + 16);

    for _ in 0..cfg.n_pump {
        // Fixed number of draws per qubit regardless of configuration.
        let value: bool = rng.gen();
        let basis = Basis::from_bit(rng.gen());
        let eve_u: f64 = rng.gen();
        let eve_basis = Basis::from_bit(rng.gen());
        let eve_coin: bool = rng.gen();
        let noise_u: f64 = rng.gen();
        let recv_basis = Basis::from_bit(rng.gen());
        let recv_coin: bool = rng.gen();

        let sent = Qubit::prepare(value, basis);
        let intercepted = eve_u < cfg.eve_fraction;
        let mut q = sent;
        if intercepted {
            q = intercept_resend(q, eve_basis, eve_coin);
        }
        q = flip(q, noise_u < cfg.p_noise);
        let received = measure(q, recv_basis, recv_coin);

        if basis == recv_basis {
            sent_bits.push(value);
            recv_bits.push(received);
        }
        if trace {
            transcript.records.push(QubitRecord {
                sent,
                eve_basis: intercepted.then_some(eve_basis),
                receiver_basis: recv_basis,
                received,
            });
        }
    }

    let n_sifted = sent_bits.len();
    let true_errors = sent_bits.iter().zip(&recv_bits).filter(|(a, b)| a != b).count();
    let k = sample_size(n_sifted, cfg.sacrifice_fraction);
    let mut sample = index::sample(&mut rng, n_sifted, k).into_vec();
    sample.sort_unstable();

    let mut in_sample = vec![false; n_sifted];
    for &i in &sample {
        in_sample[i] = true;
    }
    let sample_errors = sample.iter().filter(|&&i| sent_bits[i] != recv_bits[i]).count();
    let qber_estimate = if k == 0 { 0.0 } else { sample_errors as f64 / k as f64 };
    let aborted = qber_estimate > cfg.qber_abort_threshold;

    let (sifted_key, receiver_key) = if aborted {
        (BitString::new(), BitString::new())
    } else {
        let keep = |bits: &[bool]| -> BitString {
            bits.iter()
                .zip(&in_sample)
                .filter(|(_, &s)| !s)
                .map(|(&b, _)| b)
                .collect()
        };
        (keep(&sent_bits), keep(&recv_bits))
    };

    transcript.sample = sample;
    let result = Bb84SessionResult {
        sifted_key,
        receiver_key,
        qber_estimate,
        error_rate: if n_sifted == 0 {
            0.0
        } else {
            true_errors as f64 / n_sifted as f64
        },
        n_pump: cfg.n_pump,
        n_sifted,
        n_sampled: k,
        t_qkg: t_qkg_model(cfg),
        aborted,
    };
    Ok((result, transcript))
}
