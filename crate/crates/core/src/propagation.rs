//! Link-budget arithmetic: path loss, reflection loss, the SWIPT time split
//! and SINR.

use std::f64::consts::PI;

use crate::config::SystemParams;
use crate::error::ModelError;
use crate::SPEED_OF_LIGHT;

/// Frequency-dependent path-loss constant `(c / (4 pi f_c))^2`.
pub fn path_loss_constant(carrier_hz: f64) -> f64 {
    let k = SPEED_OF_LIGHT / (4.0 * PI * carrier_hz);
    k * k
}

/// Power gain `b * max(d_ref, d)^-alpha` of a link of length `distance`.
pub fn path_loss(distance: f64, exponent: f64, carrier_hz: f64, ref_distance: f64) -> f64 {
    path_loss_constant(carrier_hz) * distance.max(ref_distance).powf(-exponent)
}

pub fn reflected_power(incident: f64, rho: f64) -> f64 {
    rho * incident
}

/// Splits the power received over one path into the information slot
/// (signal) and the energy slot (seen as interference by an eavesdropper).
/// `rho_applied` is 1 for LOS links and the reflection coefficient otherwise.
pub fn eve_rx_components(params: &SystemParams, gain: f64, loss: f64, rho_applied: f64) -> (f64, f64) {
    let total = params.tx_power * gain * loss * rho_applied;
    let eta = params.ts_ratio;
    ((1.0 - eta) * total, eta * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkBudget {
    pub signal_power: f64,
    pub self_interference: f64,
    pub external_interference: f64,
    pub noise: f64,
}

impl LinkBudget {
    pub fn scaled(self, k: f64) -> Self {
        Self {
            signal_power: self.signal_power * k,
            self_interference: self.self_interference * k,
            external_interference: self.external_interference * k,
            noise: self.noise * k,
        }
    }
}

pub fn sinr(budget: &LinkBudget) -> Result<f64, ModelError> {
    let denom = budget.self_interference + budget.external_interference + budget.noise;
    if !(denom > 0.0) {
        return Err(ModelError::Domain(
            "SINR undefined: no noise and no interference".into(),
        ));
    }
    Ok(budget.signal_power / denom)
}
