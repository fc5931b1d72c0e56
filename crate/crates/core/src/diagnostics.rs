//! Model-validity warnings. Corrections applied to the published model are
//! reported here rather than made silently.

use std::fmt;

use crate::analytic::{interference_integral, reflection_area, InterferenceMode, ReflectionGeometry};
use crate::antenna::{side_lobe_formula, GainClampMode};
use crate::config::{noise_power, NoiseMode, SystemParams};
use crate::units::{linear_to_db, watts_to_dbm};

#[derive(Debug, Clone, PartialEq)]
pub struct Warning {
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] {}", self.code, self.message)
    }
}

fn warn(code: &'static str, message: String) -> Warning {
    Warning { code, message }
}

/// Side-lobe formula breakdown for an array side, if any.
pub fn gain_breakdown(params: &SystemParams, n: u32, side: &str) -> Option<Warning> {
    if params.side_gain.is_some() {
        return None;
    }
    let main = params.main_gain.unwrap_or(n as f64);
    let formula = side_lobe_formula(n);
    if formula < main {
        return None;
    }
    let action = match params.gain_clamp {
        GainClampMode::Error => "engines will refuse to run (gainClampMode=error)".to_string(),
        GainClampMode::SwapSafe => format!("clamped to G_s = {} (gainClampMode=swapSafe)", (formula).min(main / 10.0)),
    };
    Some(warn(
        "gain-formula-breakdown",
        format!("{side} array N={n}: side-lobe formula gives G_s = {formula:.4} >= G_m = {main}; {action}"),
    ))
}

/// Unregularized interference integral `2/(r^alpha (2 - alpha))` at one exponent.
fn faithful_integral_warning(params: &SystemParams, alpha: f64, label: &str) -> Option<Warning> {
    let active = params.interference_mode == InterferenceMode::PaperFaithful;
    let suffix = if active {
        "paperFaithful mode is active"
    } else {
        "regularized mode in use"
    };
    match interference_integral(alpha, params.comm_radius, params.ref_distance, params.carrier_freq, InterferenceMode::PaperFaithful) {
        Err(_) => Some(warn(
            "interference-integral-singular",
            format!("{label} exponent {alpha}: the unclamped mean-interference integral 2/(r^a (2-a)) divides by zero; {suffix}"),
        )),
        Ok(v) if v < 0.0 => Some(warn(
            "interference-integral-negative",
            format!("{label} exponent {alpha}: the unclamped mean-interference integral 2/(r^a (2-a)) is negative ({v:e}); {suffix}"),
        )),
        Ok(_) => None,
    }
}

/// All warnings for a parameter set, in a fixed order.
pub fn config_warnings(params: &SystemParams) -> Vec<Warning> {
    let mut out = Vec::new();
    out.extend(gain_breakdown(params, params.n_elements_tx, "BS"));
    out.extend(gain_breakdown(params, params.n_elements_rx, "eavesdropper"));
    out.extend(faithful_integral_warning(params, params.alpha_los, "LOS"));
    out.extend(faithful_integral_warning(params, params.alpha_nlos, "NLOS"));

    let d = params.esp_eval_distance.unwrap_or(2.0 * params.comm_radius / 3.0);
    let geom = ReflectionGeometry::representative(params, d);
    if let Ok(area) = reflection_area(&geom, params.obstacle_length_mean, params.obstacle_width_mean) {
        let plus = (params.obstacle_density * area).exp();
        let minus = (-params.obstacle_density * area).exp();
        out.push(warn(
            "reflection-exponent-sign",
            format!(
                "reflection-path probability written as exp(+lambda_0 A) gives {plus:.6} at D = {d:.2} m, which is not a probability; using exp(-lambda_0 A) = {minus:.6}"
            ),
        ));
    }
    out.push(warn(
        "misalignment-pdf-delta",
        "gain PDF with delta(x - G_m) in both terms read as delta(x - G_m) and delta(x - G_s)".into(),
    ));
    out.push(warn(
        "reflection-radius-rho",
        "reflected-path threshold radius uses rho in the numerator (received power carries one factor rho)".into(),
    ));

    let literal = watts_to_dbm(noise_power(10.0, params.noise_figure)).unwrap_or(f64::NEG_INFINITY);
    let bandwidth = watts_to_dbm(noise_power(params.bandwidth, params.noise_figure)).unwrap_or(f64::NEG_INFINITY);
    let active = match params.noise_mode {
        NoiseMode::Bandwidth => format!("bandwidth reading active ({bandwidth:.2} dBm)"),
        NoiseMode::PaperLiteral => format!("literal reading active ({literal:.2} dBm)"),
        NoiseMode::Off => "noise disabled".to_string(),
    };
    out.push(warn(
        "noise-reading",
        format!(
            "noise -174 + 10log10(BW) + NF: BW = {} Hz gives {bandwidth:.2} dBm, a literal 10log10(10) gives {literal:.2} dBm; {active}",
            params.bandwidth
        ),
    ));

    let eta = params.ts_ratio;
    let cap = (1.0 - eta) / eta;
    if params.sinr_threshold >= cap {
        let cap_db = linear_to_db(cap).map_or_else(|_| "-inf".to_string(), |v| format!("{v:.2}"));
        let beta_db = linear_to_db(params.sinr_threshold).map_or_else(|_| "-inf".to_string(), |v| format!("{v:.2}"));
        out.push(warn(
            "threshold-above-split-cap",
            format!(
                "SINR is capped at (1-eta)/eta = {cap_db} dB by the time split; threshold {beta_db} dB is unreachable and the independent ESP is 0"
            ),
        ));
    }
    out
}
