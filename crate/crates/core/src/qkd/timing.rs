//! Key-generation time model: `t = c0 + c1 * n_pump * (1 + alpha * p_noise + beta * eve)`.
//!
//! `c1` is not stored; it is fixed by pinning the reference point
//! (500 pumped qubits, noise 0.05, no eavesdropper) to 0.23 ms.

use super::Bb84Config;

/// Fixed negotiation overhead in milliseconds (the model's value at zero qubits).
pub const NEGOTIATION_OVERHEAD_MS: f64 = 0.03;
pub const NOISE_WEIGHT: f64 = 2.0;
pub const EVE_WEIGHT: f64 = 4.0;

pub const CALIBRATION_PUMP: usize = 500;
pub const CALIBRATION_NOISE: f64 = 0.05;
pub const CALIBRATION_MS: f64 = 0.23;

fn workload(n_pump: usize, p_noise: f64, eve_fraction: f64) -> f64 {
    n_pump as f64 * (1.0 + NOISE_WEIGHT * p_noise + EVE_WEIGHT * eve_fraction)
}

/// Modelled key-generation time (T_QKG) in milliseconds.
pub fn t_qkg_model(cfg: &Bb84Config) -> f64 {
    let ratio =
        workload(cfg.n_pump, cfg.p_noise, cfg.eve_fraction) / workload(CALIBRATION_PUMP, CALIBRATION_NOISE, 0.0);
    // Written around the reference point so that it evaluates to CALIBRATION_MS exactly.
    CALIBRATION_MS + (CALIBRATION_MS - NEGOTIATION_OVERHEAD_MS) * (ratio - 1.0)
}

/// The implied per-qubit coefficient c1 (ms per weighted qubit).
pub fn per_qubit_ms() -> f64 {
    (CALIBRATION_MS - NEGOTIATION_OVERHEAD_MS) / workload(CALIBRATION_PUMP, CALIBRATION_NOISE, 0.0)
}
