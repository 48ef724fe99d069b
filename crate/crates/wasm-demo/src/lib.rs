//! wasm-bindgen exports for the static page in `www/`.
//!
//! Each export returns a JSON string; the page parses it with `JSON.parse`.

use qaes_core::dqsbox::{box_diagnostics, correlation_profile, ValueGrid};
use qaes_core::{generate_box, run_session, Bb84Config};
use serde::Serialize;
use thiserror::Error;
use wasm_bindgen::prelude::*;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("key must be 64 hex digits: {0}")]
    BadKey(String),
    #[error("{0}")]
    Qkd(#[from] qaes_core::qkd::QkdError),
    #[error("sweep needs between 2 and 101 steps, got {0}")]
    BadSteps(u32),
}

/// 32 bytes of S-box key material.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxKey([u8; 32]);

impl std::str::FromStr for BoxKey {
    type Err = DemoError;

    fn from_str(s: &str) -> Result<Self, DemoError> {
        let bytes = hex::decode(s.trim()).map_err(|e| DemoError::BadKey(e.to_string()))?;
        let key = bytes
            .try_into()
            .map_err(|b: Vec<u8>| DemoError::BadKey(format!("{} bytes", b.len())))?;
        Ok(BoxKey(key))
    }
}

#[derive(Debug, Serialize)]
pub struct BoxReport {
    pub forward: Vec<u8>,
    pub seed_digest: String,
    pub fixed_points: usize,
    pub differential_uniformity: usize,
}

pub fn box_report(key: &BoxKey) -> BoxReport {
    let b = generate_box(&key.0).expect("key is 32 bytes");
    let d = box_diagnostics(b.sbox());
    BoxReport {
        forward: b.forward().to_vec(),
        seed_digest: hex::encode(b.seed_digest()),
        fixed_points: d.fixed_points,
        differential_uniformity: d.differential_uniformity,
    }
}

#[derive(Debug, Serialize)]
pub struct RowReport {
    pub corr: Option<f64>,
    pub independence: Option<f64>,
    pub pearson: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ProfileReport {
    pub rows: Vec<RowReport>,
    pub mean_independence: f64,
    pub mean_pearson_independence: f64,
    pub pooled_pearson: Option<f64>,
}

pub fn profile_report(a: &BoxKey, b: &BoxKey) -> ProfileReport {
    let grid = |k: &BoxKey| ValueGrid::from_table(generate_box(&k.0).expect("key is 32 bytes").forward());
    let p = correlation_profile(&grid(a), &grid(b));
    ProfileReport {
        rows: p
            .rows
            .iter()
            .map(|r| RowReport {
                corr: r.corr,
                independence: r.independence,
                pearson: r.pearson,
            })
            .collect(),
        mean_independence: p.mean_independence,
        mean_pearson_independence: p.mean_pearson_independence,
        pooled_pearson: p.pooled_pearson,
    }
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub eve_fraction: f64,
    pub qber: f64,
    pub error_rate: f64,
    pub usable_bits: usize,
    pub aborted: bool,
}

/// QBER and key yield as the intercepted fraction goes from 0 to 1.
pub fn bb84_sweep(n_pump: usize, p_noise: f64, steps: u32, seed: u64) -> Result<Vec<SweepPoint>, DemoError> {
    if !(2..=101).contains(&steps) {
        return Err(DemoError::BadSteps(steps));
    }
    (0..steps)
        .map(|i| {
            let eve_fraction = i as f64 / (steps - 1) as f64;
            let r = run_session(&Bb84Config {
                n_pump,
                p_noise,
                eve_fraction,
                seed: seed.wrapping_add(i as u64),
                ..Default::default()
            })?;
            Ok(SweepPoint {
                eve_fraction,
                qber: r.qber_estimate,
                error_rate: r.error_rate,
                usable_bits: r.usable_bits(),
                aborted: r.aborted,
            })
        })
        .collect()
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("reports serialize")
}

fn js(e: DemoError) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = generateBox)]
pub fn generate_box_js(key_hex: &str) -> Result<String, JsError> {
    Ok(json(&box_report(&key_hex.parse().map_err(js)?)))
}

#[wasm_bindgen(js_name = compareBoxes)]
pub fn compare_boxes_js(key_a: &str, key_b: &str) -> Result<String, JsError> {
    Ok(json(&profile_report(
        &key_a.parse().map_err(js)?,
        &key_b.parse().map_err(js)?,
    )))
}

#[wasm_bindgen(js_name = bb84Sweep)]
pub fn bb84_sweep_js(n_pump: u32, p_noise: f64, steps: u32, seed: u32) -> Result<String, JsError> {
    Ok(json(
        &bb84_sweep(n_pump as usize, p_noise, steps, seed as u64).map_err(js)?,
    ))
}
