//! Master and slave endpoints as event-driven state machines.
//!
//! Each endpoint consumes one inbound [`Frame`] at a time and returns the
//! frames it wants sent, so the same code runs over a blocking transport or
//! under the single-threaded lockstep driver.
//!
//! Phase order: HELLO, QBATCH*, BASES, SIFT_IDX, QBER_SAMPLE, KEY_CONFIRM,
//! PARAMS, DATA*, BYE. Either side may send ABORT; the receiver echoes it and
//! both end aborted.

use rand::{seq::index, Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use super::frame::{Frame, Tag, MAX_FRAME};
use crate::modes::{BlockMode, Mode, ModeError, OnlineOptions, QaesContext, BOX_BITS};
use crate::qkd::physics::{flip, measure, Basis, Qubit};
use crate::qkd::{sample_size, Bb84Config, BitString, QuantumKeyStream};

pub const PROTOCOL_VERSION: u8 = 1;
/// Bits disclosed by key confirmation and discarded afterwards.
pub const CONFIRM_BITS: usize = 64;
const DATA_CHUNK: usize = MAX_FRAME - 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Master,
    Slave,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Phase {
    Hello,
    Quantum,
    Sifting,
    QberCheck,
    KeyConfirm,
    Params,
    Data,
    Closing,
    AbortSent,
    Done,
    Aborted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortReason {
    QberExceeded(f64),
    DigestMismatch,
    KeyDepleted,
    Malformed,
    ProtocolViolation,
}

impl AbortReason {
    fn encode(self) -> Vec<u8> {
        match self {
            AbortReason::QberExceeded(q) => {
                let mut v = vec![1];
                v.extend_from_slice(&q.to_be_bytes());
                v
            }
            AbortReason::DigestMismatch => vec![2],
            AbortReason::KeyDepleted => vec![3],
            AbortReason::Malformed => vec![4],
            AbortReason::ProtocolViolation => vec![5],
        }
    }

    fn decode(p: &[u8]) -> AbortReason {
        match p {
            [1, rest @ ..] if rest.len() == 8 => {
                AbortReason::QberExceeded(f64::from_be_bytes(rest.try_into().expect("8 bytes")))
            }
            [2] => AbortReason::DigestMismatch,
            [3] => AbortReason::KeyDepleted,
            [5] => AbortReason::ProtocolViolation,
            _ => AbortReason::Malformed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Completed,
    Aborted { reason: AbortReason, by_peer: bool },
}

/// Cipher parameters the master proposes in PARAMS.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SessionParams {
    pub key_len: usize,
    pub mode: Mode,
    pub block_mode: BlockMode,
    pub online: OnlineOptions,
}

impl Default for SessionParams {
    fn default() -> Self {
        SessionParams {
            key_len: 128,
            mode: Mode::Offline,
            block_mode: BlockMode::Ctr,
            online: OnlineOptions::default(),
        }
    }
}

impl SessionParams {
    fn encode(&self) -> Vec<u8> {
        let mut v = (self.key_len as u16).to_be_bytes().to_vec();
        v.extend([self.mode.code(), self.block_mode.code(), self.online.code()]);
        v
    }

    fn decode(p: &[u8]) -> Option<Self> {
        let [k0, k1, m, b, o] = p.try_into().ok()?;
        let key_len = u16::from_be_bytes([k0, k1]) as usize;
        crate::aes::params_for_key_len(key_len).ok()?;
        Some(SessionParams {
            key_len,
            mode: Mode::from_code(m)?,
            block_mode: BlockMode::from_code(b)?,
            online: OnlineOptions::from_code(o)?,
        })
    }

    /// Key bits needed to set up contexts and encrypt `chunks`.
    fn required_bits(&self, chunks: &[usize]) -> Result<usize, ModeError> {
        match self.mode {
            Mode::Offline => Ok(BOX_BITS + self.key_len),
            Mode::Online => {
                let probe = QaesContext::online(
                    QuantumKeyStream::new(BitString::new()),
                    self.key_len,
                    self.block_mode,
                    self.online,
                )?;
                Ok(chunks.iter().map(|&n| probe.bits_for_message(n)).sum())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct MasterConfig {
    /// Uses n_pump, sacrifice_fraction, qber_abort_threshold and seed.
    pub bb84: Bb84Config,
    pub batch_size: usize,
    pub params: SessionParams,
    pub payload: Vec<u8>,
}

impl MasterConfig {
    pub fn new(bb84: Bb84Config, params: SessionParams, payload: Vec<u8>) -> Self {
        MasterConfig {
            bb84,
            batch_size: 1024,
            params,
            payload,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SlaveConfig {
    /// Channel flip probability applied at the slave's detector.
    pub p_noise: f64,
    pub qber_abort_threshold: f64,
    pub seed: u64,
}

impl SlaveConfig {
    pub fn from_bb84(cfg: &Bb84Config, seed: u64) -> Self {
        SlaveConfig {
            p_noise: cfg.p_noise,
            qber_abort_threshold: cfg.qber_abort_threshold,
            seed,
        }
    }
}

/// What an endpoint knows once it stops.
#[derive(Debug, Clone, PartialEq)]
pub struct SessionSummary {
    pub role: Role,
    pub outcome: Option<Outcome>,
    pub n_sifted: usize,
    pub qber: Option<f64>,
    /// Truncated digest of the confirmed key (before the confirmation bits are dropped).
    pub key_digest: Option<[u8; 8]>,
    /// Key material left after confirmation.
    pub key: BitString,
    pub params: Option<SessionParams>,
    /// Slave: decrypted data. Master: empty.
    pub received: Vec<u8>,
    /// Digest of the data as received by the slave (reported in BYE).
    pub data_digest: Option<[u8; 8]>,
}

impl SessionSummary {
    fn new(role: Role) -> Self {
        SessionSummary {
            role,
            outcome: None,
            n_sifted: 0,
            qber: None,
            key_digest: None,
            key: BitString::new(),
            params: None,
            received: Vec::new(),
            data_digest: None,
        }
    }

    pub fn completed(&self) -> bool {
        self.outcome == Some(Outcome::Completed)
    }

    pub fn aborted(&self) -> bool {
        matches!(self.outcome, Some(Outcome::Aborted { .. }))
    }
}

pub fn digest64(data: &[u8]) -> [u8; 8] {
    Sha256::digest(data)[..8].try_into().expect("sha256 is 32 bytes")
}

/// Digest of a bit string, binding its exact length.
pub fn key_digest(bits: &BitString) -> [u8; 8] {
    let mut h = Sha256::new();
    h.update((bits.len() as u64).to_be_bytes());
    h.update(bits.as_bytes());
    h.finalize()[..8].try_into().expect("sha256 is 32 bytes")
}

fn pack_bits(bits: impl IntoIterator<Item = bool>) -> Vec<u8> {
    bits.into_iter().collect::<BitString>().as_bytes().to_vec()
}

fn unpack_bits(bytes: &[u8], n: usize) -> Option<Vec<bool>> {
    let bs = BitString::from_bytes_truncated(bytes, n)?;
    (bytes.len() == n.div_ceil(8)).then(|| bs.iter().collect())
}

fn qber_of(errors: usize, k: usize) -> f64 {
    if k == 0 {
        0.0
    } else {
        errors as f64 / k as f64
    }
}

/// Shared endpoint plumbing: phase, summary and abort handling.
#[derive(Debug)]
struct Core {
    phase: Phase,
    summary: SessionSummary,
    own_abort: Option<AbortReason>,
}

impl Core {
    fn abort(&mut self, reason: AbortReason) -> Vec<Frame> {
        self.phase = Phase::AbortSent;
        self.own_abort = Some(reason);
        vec![Frame::new(Tag::Abort, reason.encode())]
    }

    /// Handles an inbound ABORT. Returns the echo, if one is due.
    fn on_abort(&mut self, payload: &[u8]) -> Vec<Frame> {
        match self.phase {
            Phase::AbortSent => {
                let reason = self.own_abort.expect("set when entering AbortSent");
                self.summary.outcome = Some(Outcome::Aborted { reason, by_peer: false });
                self.phase = Phase::Aborted;
                vec![]
            }
            Phase::Done | Phase::Aborted => vec![],
            _ => {
                let reason = AbortReason::decode(payload);
                self.summary.outcome = Some(Outcome::Aborted { reason, by_peer: true });
                self.phase = Phase::Aborted;
                vec![Frame::new(Tag::Abort, reason.encode())]
            }
        }
    }

    fn finished(&self) -> bool {
        matches!(self.phase, Phase::Done | Phase::Aborted)
    }
}

#[derive(Debug)]
pub struct Master {
    cfg: MasterConfig,
    rng: ChaCha20Rng,
    core: Core,
    sent: Vec<Qubit>,
    sifted: Vec<usize>,
    sample: Vec<usize>,
}

impl Master {
    pub fn new(cfg: MasterConfig) -> Self {
        Master {
            rng: ChaCha20Rng::seed_from_u64(cfg.bb84.seed),
            cfg,
            core: Core {
                phase: Phase::Hello,
                summary: SessionSummary::new(Role::Master),
                own_abort: None,
            },
            sent: Vec::new(),
            sifted: Vec::new(),
            sample: Vec::new(),
        }
    }

    pub fn phase(&self) -> Phase {
        self.core.phase
    }

    pub fn is_finished(&self) -> bool {
        self.core.finished()
    }

    pub fn summary(&self) -> &SessionSummary {
        &self.core.summary
    }

    pub fn start(&mut self) -> Vec<Frame> {
        let mut p = vec![PROTOCOL_VERSION];
        p.extend_from_slice(&(self.cfg.bb84.n_pump as u32).to_be_bytes());
        p.extend_from_slice(&self.cfg.bb84.sacrifice_fraction.to_be_bytes());
        vec![Frame::new(Tag::Hello, p)]
    }

    pub fn handle(&mut self, frame: Frame) -> Vec<Frame> {
        if frame.tag == Tag::Abort {
            return self.core.on_abort(&frame.payload);
        }
        match (self.core.phase, frame.tag) {
            (Phase::Hello, Tag::Hello) if frame.payload == [PROTOCOL_VERSION] => self.send_qubits(),
            (Phase::Quantum, Tag::Bases) => self.on_bases(&frame.payload),
            (Phase::QberCheck, Tag::QberSample) => self.on_sample(&frame.payload),
            (Phase::KeyConfirm, Tag::KeyConfirm) => self.on_confirm(&frame.payload),
            (Phase::Params, Tag::Params) => self.on_params(&frame.payload),
            (Phase::Closing, Tag::Bye) => {
                self.core.summary.data_digest = frame.payload.try_into().ok();
                self.core.summary.outcome = Some(Outcome::Completed);
                self.core.phase = Phase::Done;
                vec![]
            }
            (Phase::Done | Phase::Aborted | Phase::AbortSent, _) => vec![],
            _ => self.core.abort(AbortReason::ProtocolViolation),
        }
    }

    fn send_qubits(&mut self) -> Vec<Frame> {
        let n = self.cfg.bb84.n_pump;
        self.sent = (0..n)
            .map(|_| {
                let value: bool = self.rng.gen();
                Qubit::prepare(value, Basis::from_bit(self.rng.gen()))
            })
            .collect();
        self.core.phase = Phase::Quantum;
        self.sent
            .chunks(self.cfg.batch_size.clamp(1, MAX_FRAME))
            .map(|batch| Frame::new(Tag::QBatch, batch.iter().map(|q| q.to_byte()).collect()))
            .collect()
    }

    fn on_bases(&mut self, payload: &[u8]) -> Vec<Frame> {
        let Some(bases) = unpack_bits(payload, self.sent.len()) else {
            return self.core.abort(AbortReason::Malformed);
        };
        let matched: Vec<bool> = self
            .sent
            .iter()
            .zip(&bases)
            .map(|(q, &b)| q.basis == Basis::from_bit(b))
            .collect();
        self.sifted = matched.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        self.core.summary.n_sifted = self.sifted.len();

        let k = sample_size(self.sifted.len(), self.cfg.bb84.sacrifice_fraction);
        self.sample = index::sample(&mut self.rng, self.sifted.len(), k).into_vec();
        self.sample.sort_unstable();
        let mut sample_payload = (k as u32).to_be_bytes().to_vec();
        for &i in &self.sample {
            sample_payload.extend_from_slice(&(i as u32).to_be_bytes());
        }
        sample_payload.extend(pack_bits(self.sample.iter().map(|&i| self.sent[self.sifted[i]].value)));

        self.core.phase = Phase::QberCheck;
        vec![
            Frame::new(Tag::SiftIdx, pack_bits(matched)),
            Frame::new(Tag::QberSample, sample_payload),
        ]
    }

    fn on_sample(&mut self, payload: &[u8]) -> Vec<Frame> {
        let Some(theirs) = unpack_bits(payload, self.sample.len()) else {
            return self.core.abort(AbortReason::Malformed);
        };
        let errors = self
            .sample
            .iter()
            .zip(&theirs)
            .filter(|(&i, &b)| self.sent[self.sifted[i]].value != b)
            .count();
        let qber = qber_of(errors, self.sample.len());
        self.core.summary.qber = Some(qber);
        if qber > self.cfg.bb84.qber_abort_threshold {
            return self.core.abort(AbortReason::QberExceeded(qber));
        }
        let key = usable_key(&self.sifted, &self.sample, |pos| self.sent[pos].value);
        let digest = key_digest(&key);
        self.core.summary.key_digest = Some(digest);
        self.core.summary.key = key;
        self.core.phase = Phase::KeyConfirm;
        vec![Frame::new(Tag::KeyConfirm, digest.to_vec())]
    }

    fn on_confirm(&mut self, payload: &[u8]) -> Vec<Frame> {
        if Some(payload) != self.core.summary.key_digest.as_ref().map(|d| &d[..]) {
            return self.core.abort(AbortReason::DigestMismatch);
        }
        let key = &self.core.summary.key;
        self.core.summary.key = key
            .slice(CONFIRM_BITS, key.len().saturating_sub(CONFIRM_BITS))
            .unwrap_or_default();
        let params = self.cfg.params;
        let chunks = chunk_lengths(self.cfg.payload.len());
        match params.required_bits(&chunks) {
            Ok(need) if need <= self.core.summary.key.len() => {}
            _ => return self.core.abort(AbortReason::KeyDepleted),
        }
        self.core.phase = Phase::Params;
        vec![Frame::new(Tag::Params, params.encode())]
    }

    fn on_params(&mut self, payload: &[u8]) -> Vec<Frame> {
        if SessionParams::decode(payload) != Some(self.cfg.params) {
            return self.core.abort(AbortReason::ProtocolViolation);
        }
        self.core.summary.params = Some(self.cfg.params);
        let mut ctx = match build_context(&self.cfg.params, &self.core.summary.key) {
            Ok(c) => c,
            Err(_) => return self.core.abort(AbortReason::KeyDepleted),
        };
        let mut out = Vec::new();
        let payload = std::mem::take(&mut self.cfg.payload);
        let chunks: Vec<&[u8]> = if payload.is_empty() {
            vec![&[]]
        } else {
            payload.chunks(DATA_CHUNK).collect()
        };
        for chunk in chunks {
            let mut nonce = [0u8; 16];
            self.rng.fill_bytes(&mut nonce);
            let ct = match ctx.encrypt_message(chunk, &nonce) {
                Ok(ct) => ct,
                Err(_) => return self.core.abort(AbortReason::KeyDepleted),
            };
            let mut p = nonce.to_vec();
            p.extend(ct);
            out.push(Frame::new(Tag::Data, p));
        }
        self.cfg.payload = payload;
        out.push(Frame::new(Tag::Bye, vec![]));
        self.core.phase = Phase::Closing;
        out
    }
}

fn chunk_lengths(len: usize) -> Vec<usize> {
    if len == 0 {
        return vec![0];
    }
    (0..len)
        .step_by(DATA_CHUNK)
        .map(|s| (len - s).min(DATA_CHUNK))
        .collect()
}

/// Sifted values at positions not disclosed by the QBER sample.
fn usable_key(sifted: &[usize], sample: &[usize], value_at: impl Fn(usize) -> bool) -> BitString {
    let mut s = sample.iter().peekable();
    let mut key = BitString::with_capacity(sifted.len());
    for (k, &pos) in sifted.iter().enumerate() {
        if s.peek() == Some(&&k) {
            s.next();
        } else {
            key.push(value_at(pos));
        }
    }
    key
}

fn build_context(params: &SessionParams, key: &BitString) -> Result<QaesContext, ModeError> {
    let stream = QuantumKeyStream::new(key.clone());
    match params.mode {
        Mode::Offline => {
            let mut stream = stream;
            QaesContext::offline_init(&mut stream, params.key_len, params.block_mode)
        }
        Mode::Online => QaesContext::online(stream, params.key_len, params.block_mode, params.online),
    }
}

#[derive(Debug)]
pub struct Slave {
    cfg: SlaveConfig,
    rng: ChaCha20Rng,
    core: Core,
    n_pump: usize,
    sacrifice_fraction: f64,
    bases: Vec<Basis>,
    measured: Vec<bool>,
    sifted: Vec<usize>,
    sample: Vec<usize>,
    ctx: Option<QaesContext>,
}

impl Slave {
    pub fn new(cfg: SlaveConfig) -> Self {
        Slave {
            rng: ChaCha20Rng::seed_from_u64(cfg.seed),
            cfg,
            core: Core {
                phase: Phase::Hello,
                summary: SessionSummary::new(Role::Slave),
                own_abort: None,
            },
            n_pump: 0,
            sacrifice_fraction: 0.0,
            bases: Vec::new(),
            measured: Vec::new(),
            sifted: Vec::new(),
            sample: Vec::new(),
            ctx: None,
        }
    }

    pub fn phase(&self) -> Phase {
        self.core.phase
    }

    pub fn is_finished(&self) -> bool {
        self.core.finished()
    }

    pub fn summary(&self) -> &SessionSummary {
        &self.core.summary
    }

    pub fn handle(&mut self, frame: Frame) -> Vec<Frame> {
        if frame.tag == Tag::Abort {
            return self.core.on_abort(&frame.payload);
        }
        match (self.core.phase, frame.tag) {
            (Phase::Hello, Tag::Hello) => self.on_hello(&frame.payload),
            (Phase::Quantum, Tag::QBatch) => self.on_batch(&frame.payload),
            (Phase::Sifting, Tag::SiftIdx) => self.on_sift(&frame.payload),
            (Phase::QberCheck, Tag::QberSample) => self.on_sample(&frame.payload),
            (Phase::KeyConfirm, Tag::KeyConfirm) => self.on_confirm(&frame.payload),
            (Phase::Params, Tag::Params) => self.on_params(&frame.payload),
            (Phase::Data, Tag::Data) => self.on_data(&frame.payload),
            (Phase::Data, Tag::Bye) => {
                let digest = digest64(&self.core.summary.received);
                self.core.summary.data_digest = Some(digest);
                self.core.summary.outcome = Some(Outcome::Completed);
                self.core.phase = Phase::Done;
                vec![Frame::new(Tag::Bye, digest.to_vec())]
            }
            (Phase::Done | Phase::Aborted | Phase::AbortSent, _) => vec![],
            _ => self.core.abort(AbortReason::ProtocolViolation),
        }
    }

    fn on_hello(&mut self, p: &[u8]) -> Vec<Frame> {
        let Ok([v, n0, n1, n2, n3, f0, f1, f2, f3, f4, f5, f6, f7]) = <[u8; 13]>::try_from(p) else {
            return self.core.abort(AbortReason::Malformed);
        };
        let sacrifice = f64::from_be_bytes([f0, f1, f2, f3, f4, f5, f6, f7]);
        if v != PROTOCOL_VERSION || !(sacrifice > 0.0 && sacrifice < 1.0) {
            return self.core.abort(AbortReason::Malformed);
        }
        self.n_pump = u32::from_be_bytes([n0, n1, n2, n3]) as usize;
        self.sacrifice_fraction = sacrifice;
        self.core.phase = Phase::Quantum;
        vec![Frame::new(Tag::Hello, vec![PROTOCOL_VERSION])]
    }

    fn on_batch(&mut self, p: &[u8]) -> Vec<Frame> {
        if self.measured.len() + p.len() > self.n_pump {
            return self.core.abort(AbortReason::Malformed);
        }
        for &b in p {
            let Some(q) = Qubit::from_byte(b) else {
                return self.core.abort(AbortReason::Malformed);
            };
            let basis = Basis::from_bit(self.rng.gen());
            let coin: bool = self.rng.gen();
            let noise: f64 = self.rng.gen();
            let q = flip(q, noise < self.cfg.p_noise);
            self.bases.push(basis);
            self.measured.push(measure(q, basis, coin));
        }
        if self.measured.len() < self.n_pump {
            return vec![];
        }
        self.core.phase = Phase::Sifting;
        vec![Frame::new(Tag::Bases, pack_bits(self.bases.iter().map(|b| b.as_bit())))]
    }

    fn on_sift(&mut self, p: &[u8]) -> Vec<Frame> {
        let Some(matched) = unpack_bits(p, self.n_pump) else {
            return self.core.abort(AbortReason::Malformed);
        };
        self.sifted = matched.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
        self.core.summary.n_sifted = self.sifted.len();
        self.core.phase = Phase::QberCheck;
        vec![]
    }

    fn on_sample(&mut self, p: &[u8]) -> Vec<Frame> {
        let parsed = (|| {
            let k = u32::from_be_bytes(p.get(..4)?.try_into().ok()?) as usize;
            if k != sample_size(self.sifted.len(), self.sacrifice_fraction) {
                return None;
            }
            let idx_end = 4 + 4 * k;
            let idx: Vec<usize> = p
                .get(4..idx_end)?
                .chunks_exact(4)
                .map(|c| u32::from_be_bytes(c.try_into().expect("4 bytes")) as usize)
                .collect();
            if idx.windows(2).any(|w| w[0] >= w[1]) || idx.last().is_some_and(|&i| i >= self.sifted.len()) {
                return None;
            }
            let bits = unpack_bits(&p[idx_end..], k)?;
            Some((idx, bits))
        })();
        let Some((idx, theirs)) = parsed else {
            return self.core.abort(AbortReason::Malformed);
        };
        let mine: Vec<bool> = idx.iter().map(|&i| self.measured[self.sifted[i]]).collect();
        let errors = mine.iter().zip(&theirs).filter(|(a, b)| a != b).count();
        let qber = qber_of(errors, idx.len());
        self.core.summary.qber = Some(qber);
        self.sample = idx;
        if qber > self.cfg.qber_abort_threshold {
            return self.core.abort(AbortReason::QberExceeded(qber));
        }
        let key = usable_key(&self.sifted, &self.sample, |pos| self.measured[pos]);
        self.core.summary.key_digest = Some(key_digest(&key));
        self.core.summary.key = key;
        self.core.phase = Phase::KeyConfirm;
        vec![Frame::new(Tag::QberSample, pack_bits(mine))]
    }

    fn on_confirm(&mut self, p: &[u8]) -> Vec<Frame> {
        let digest = self.core.summary.key_digest.expect("set before KeyConfirm");
        if p != digest {
            return self.core.abort(AbortReason::DigestMismatch);
        }
        let key = &self.core.summary.key;
        self.core.summary.key = key
            .slice(CONFIRM_BITS, key.len().saturating_sub(CONFIRM_BITS))
            .unwrap_or_default();
        self.core.phase = Phase::Params;
        vec![Frame::new(Tag::KeyConfirm, digest.to_vec())]
    }

    fn on_params(&mut self, p: &[u8]) -> Vec<Frame> {
        let Some(params) = SessionParams::decode(p) else {
            return self.core.abort(AbortReason::Malformed);
        };
        match build_context(&params, &self.core.summary.key) {
            Ok(ctx) => self.ctx = Some(ctx),
            Err(_) => return self.core.abort(AbortReason::KeyDepleted),
        }
        self.core.summary.params = Some(params);
        self.core.phase = Phase::Data;
        vec![Frame::new(Tag::Params, params.encode())]
    }

    fn on_data(&mut self, p: &[u8]) -> Vec<Frame> {
        let (Some(nonce), Some(ctx)) = (p.get(..16), self.ctx.as_mut()) else {
            return self.core.abort(AbortReason::Malformed);
        };
        let nonce: [u8; 16] = nonce.try_into().expect("16 bytes");
        match ctx.decrypt_message(&p[16..], &nonce) {
            Ok(pt) => {
                self.core.summary.received.extend(pt);
                vec![]
            }
            Err(ModeError::Key(_)) => self.core.abort(AbortReason::KeyDepleted),
            Err(_) => self.core.abort(AbortReason::Malformed),
        }
    }
}
