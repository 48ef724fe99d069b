//! Key files written by `keygen`.
//!
//! ```text
//! # qaes-key v1 bits=208 qber=0.041667 seed=7 config=3f0c9a1d22e8b415
//! 9c1f0e...
//! ```
//!
//! The body is the key bits packed MSB-first, hex, 64 characters per line.
//! `bits` says how many of them are key; the rest of the last byte is zero.

use qaes_core::qkd::BitString;

use crate::error::{CliError, CliResult};

const MAGIC: &str = "# qaes-key v1";

#[derive(Debug, Clone, PartialEq)]
pub struct KeyFile {
    pub bits: BitString,
    pub qber: f64,
    pub seed: u64,
    pub config_digest: [u8; 8],
}

impl KeyFile {
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{MAGIC} bits={} qber={:.6} seed={} config={}\n",
            self.bits.len(),
            self.qber,
            self.seed,
            hex::encode(self.config_digest)
        );
        let body = hex::encode(self.bits.as_bytes());
        for line in body.as_bytes().chunks(64) {
            out.push_str(std::str::from_utf8(line).expect("hex is ascii"));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let bad = |what: &str| CliError::BadInput(format!("key file: {what}"));
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| bad("empty"))?;
        let fields = header.strip_prefix(MAGIC).ok_or_else(|| bad("missing header line"))?;
        let (mut bits, mut qber, mut seed, mut config) = (None, None, None, None);
        for kv in fields.split_whitespace() {
            let (k, v) = kv.split_once('=').ok_or_else(|| bad("malformed header field"))?;
            match k {
                "bits" => bits = v.parse::<usize>().ok(),
                "qber" => qber = v.parse::<f64>().ok(),
                "seed" => seed = v.parse::<u64>().ok(),
                "config" => config = hex::decode(v).ok().and_then(|d| <[u8; 8]>::try_from(d).ok()),
                _ => {}
            }
        }
        let body: String = lines.flat_map(|l| l.trim().chars()).collect();
        let bytes = hex::decode(&body).map_err(|_| bad("body is not hex"))?;
        let n = bits.ok_or_else(|| bad("bad or missing bits="))?;
        if bytes.len() != n.div_ceil(8) {
            return Err(bad("body length does not match bits="));
        }
        Ok(KeyFile {
            bits: BitString::from_bytes_truncated(&bytes, n).ok_or_else(|| bad("body too short"))?,
            qber: qber.ok_or_else(|| bad("bad or missing qber="))?,
            seed: seed.ok_or_else(|| bad("bad or missing seed="))?,
            config_digest: config.ok_or_else(|| bad("bad or missing config="))?,
        })
    }
}
