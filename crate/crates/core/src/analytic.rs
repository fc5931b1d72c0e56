//! Closed-form stochastic-geometry quantities and the two ESP expressions.
//!
//! Obstacles form a Boolean model of rectangles whose centers are a PPP of
//! density `lambda_0`. The number of obstacles cut by a segment of length
//! `d` is Poisson with mean `beta_0 d + p`; a height factor `k` discounts
//! obstacles too short to reach the BS-receiver ray. Everything else in
//! this module builds on those three numbers.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::antenna::{expected_eve_gain, pattern_for, MisalignmentModel};
use crate::config::SystemParams;
use crate::error::ModelError;
use crate::geometry::{HeightDistribution, UniformHeights};
use crate::numeric::adaptive_simpson;
use crate::propagation::path_loss_constant;
use crate::SPEED_OF_LIGHT;

/// How the mean interferer path-loss integral over the hearing disk is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterferenceMode {
    /// `int_0^r (2x/r^2) b max(d_ref, x)^-alpha dx`, finite for every alpha.
    Regularized,
    /// `2 / (r^alpha (2 - alpha))`: the upper-limit-only antiderivative with
    /// no near-field clamp. Singular at alpha = 2 and negative above it.
    PaperFaithful,
}

impl FromStr for InterferenceMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regularized" => Ok(Self::Regularized),
            "paperFaithful" => Ok(Self::PaperFaithful),
            _ => Err(format!("expected regularized|paperFaithful, got `{s}`")),
        }
    }
}

impl InterferenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Regularized => "regularized",
            Self::PaperFaithful => "paperFaithful",
        }
    }
}

/// A probability-like value and whether it had to be clamped into `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluated {
    pub value: f64,
    pub clamped: bool,
}

impl Evaluated {
    fn clamp_unit(raw: f64) -> Self {
        let value = raw.clamp(0.0, 1.0);
        Self { value, clamped: value != raw }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageStats {
    /// Per-meter growth of the mean obstacle count.
    pub beta0: f64,
    /// Mean obstacle count at zero distance.
    pub p: f64,
    /// Fraction of crossing obstacles tall enough to cut the ray.
    pub k: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionGeometry {
    /// Propagation delay of the reflected path, s.
    pub delay: f64,
    /// Direct BS-receiver distance, m.
    pub direct_distance: f64,
    pub incidence_angle: f64,
}

impl ReflectionGeometry {
    /// The representative geometry used when a concrete path is not known:
    /// delay a fixed factor above the direct delay at the configured angle.
    pub fn representative(params: &SystemParams, direct_distance: f64) -> Self {
        Self {
            delay: params.refl_delay_factor * direct_distance / SPEED_OF_LIGHT,
            direct_distance,
            incidence_angle: params.refl_incidence_angle,
        }
    }
}

/// `k = 1 - int_0^1 F_H(s H_rx + (1 - s) H_tx) ds`.
pub fn height_factor<H: HeightDistribution>(heights: &H, rx_height: f64, tx_height: f64) -> f64 {
    let inner = |s: f64| heights.cdf(s * rx_height + (1.0 - s) * tx_height);
    1.0 - adaptive_simpson(&inner, 0.0, 1.0, 1e-10)
}

pub fn blockage_stats(params: &SystemParams) -> BlockageStats {
    let lambda0 = params.obstacle_density;
    let (el, ew) = (params.obstacle_length_mean, params.obstacle_width_mean);
    let heights = UniformHeights {
        min: params.obstacle_height_range.0,
        max: params.obstacle_height_range.1,
    };
    BlockageStats {
        beta0: 2.0 * lambda0 * (el + ew) / PI,
        p: lambda0 * el * ew,
        k: height_factor(&heights, params.eve_height, params.bs_height),
    }
}

pub fn expected_blockage_count(stats: &BlockageStats, d: f64) -> f64 {
    stats.beta0 * d + stats.p
}

/// Probability that no obstacle cuts the BS-receiver ray at plan distance `d`.
pub fn los_probability(stats: &BlockageStats, d: f64) -> f64 {
    (-stats.k * expected_blockage_count(stats, d)).exp()
}

/// The area term `A` whose void probability `exp(-lambda_0 A)` is the
/// chance that a first-order reflection path of this geometry is clear.
pub fn reflection_area(geom: &ReflectionGeometry, mean_length: f64, mean_width: f64) -> Result<f64, ModelError> {
    let ct = SPEED_OF_LIGHT * geom.delay;
    let d = geom.direct_distance;
    if !(d > 0.0) {
        return Err(ModelError::Domain(format!("direct distance must be > 0, got {d}")));
    }
    // c tau below D by more than rounding is an impossible geometry.
    if ct < d * (1.0 - 1e-12) {
        return Err(ModelError::Domain(format!("c*tau = {ct} m is shorter than the direct distance {d} m")));
    }
    let ct = ct.max(d);
    let cos_t = geom.incidence_angle.cos();
    let (l, w) = (mean_length, mean_width);
    Ok(l * (ct * ct - d * d * cos_t * cos_t).max(0.0).sqrt() + w * d * cos_t.abs() + l * w
        - l * (ct - d) / 4.0
        - l * l * (ct * ct - d * d).max(0.0).sqrt() / (8.0 * d))
}

/// Probability that a first-order reflection of this geometry is unblocked.
/// Negative area terms clamp to 1 (flagged).
pub fn reflection_probability(geom: &ReflectionGeometry, params: &SystemParams) -> Result<Evaluated, ModelError> {
    let area = reflection_area(geom, params.obstacle_length_mean, params.obstacle_width_mean)?;
    Ok(Evaluated::clamp_unit((-params.obstacle_density * area).exp()))
}

/// `g(y) / y^2` with `g(y) = 1 - y e^-y - e^-y`, stable for small `y`.
fn blockage_bracket_over_y2(y: f64) -> f64 {
    if y < 1e-2 {
        // sum_{n>=2} (-1)^n (n-1) y^(n-2) / n!
        let mut term_fact = 2.0; // n!
        let mut pow = 1.0; // y^(n-2)
        let mut acc = 0.0;
        for n in 2..12 {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (n as f64 - 1.0) * pow / term_fact;
            pow *= y;
            term_fact *= (n + 1) as f64;
        }
        acc
    } else {
        (1.0 - (1.0 + y) * (-y).exp()) / (y * y)
    }
}

/// CDF of the distance to the nearest LOS BS. The law is defective:
/// the limit at infinity is `1 - exp(-2 pi lambda_b e^-p / beta_0^2)`.
pub fn nearest_los_bs_cdf(stats: &BlockageStats, bs_density: f64, x: f64) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    // 2 pi lambda e^-p / beta0^2 * g(beta0 x) = 2 pi lambda e^-p x^2 * g(y)/y^2
    let exponent = if x.is_infinite() {
        if stats.beta0 > 0.0 {
            2.0 * PI * bs_density * (-stats.p).exp() / (stats.beta0 * stats.beta0)
        } else {
            f64::INFINITY
        }
    } else {
        let y = stats.beta0 * x;
        2.0 * PI * bs_density * (-stats.p).exp() * x * x * blockage_bracket_over_y2(y)
    };
    -(-exponent).exp_m1()
}

/// Mean path-loss weight `J_alpha` of an interferer uniformly placed in the
/// hearing disk of radius `r`.
pub fn interference_integral(
    alpha: f64,
    r: f64,
    ref_distance: f64,
    carrier_hz: f64,
    mode: InterferenceMode,
) -> Result<f64, ModelError> {
    match mode {
        InterferenceMode::PaperFaithful => {
            if (alpha - 2.0).abs() < 1e-12 {
                return Err(ModelError::Interference(format!(
                    "2/(r^alpha (2-alpha)) divides by zero at alpha = {alpha}"
                )));
            }
            Ok(2.0 / (r.powf(alpha) * (2.0 - alpha)))
        }
        InterferenceMode::Regularized => {
            if !(r > ref_distance) {
                return Err(ModelError::Interference(format!(
                    "hearing radius {r} m must exceed the reference distance {ref_distance} m"
                )));
            }
            let d0 = ref_distance;
            let r2 = r * r;
            let inner = d0.powf(2.0 - alpha) / r2;
            let outer = if (alpha - 2.0).abs() < 1e-9 {
                2.0 / r2 * (r / d0).ln()
            } else {
                2.0 / r2 * (r.powf(2.0 - alpha) - d0.powf(2.0 - alpha)) / (2.0 - alpha)
            };
            Ok(path_loss_constant(carrier_hz) * (inner + outer))
        }
    }
}

/// Distance at which the LOS/reflection mixing probabilities of the
/// interference term are evaluated: the configured override, else the mean
/// distance `2r/3` of a uniform point in the hearing disk.
pub fn interference_eval_distance(params: &SystemParams) -> f64 {
    params.esp_eval_distance.unwrap_or(2.0 * params.comm_radius / 3.0)
}

/// LOS-only and reflection-only probabilities `(P_Los (1 - P_Ref), (1 - P_Los) P_Ref)`
/// at distance `d`.
pub fn link_mix(params: &SystemParams, stats: &BlockageStats, d: f64) -> Result<(f64, f64, bool), ModelError> {
    let p_los = los_probability(stats, d);
    let p_ref = reflection_probability(&ReflectionGeometry::representative(params, d), params)?;
    Ok((p_los * (1.0 - p_ref.value), (1.0 - p_los) * p_ref.value, p_ref.clamped))
}

/// Mean aggregate interference (W) from the other BSs at an eavesdropper.
/// May be negative in `PaperFaithful` mode; `clamped` is never set here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceMean {
    pub watts: f64,
    /// The bracket `P_LOS J_L + rho P_Ref J_N` before the `pi r^2 lambda_b P_t E[G]` prefactor.
    pub bracket: f64,
    pub negative: bool,
    pub clamped: bool,
}

pub fn interference_mean(
    params: &SystemParams,
    stats: &BlockageStats,
    eve_gain: f64,
    mode: InterferenceMode,
) -> Result<InterferenceMean, ModelError> {
    let r = params.comm_radius;
    let j_los = interference_integral(params.alpha_los, r, params.ref_distance, params.carrier_freq, mode)?;
    let j_nlos = interference_integral(params.alpha_nlos, r, params.ref_distance, params.carrier_freq, mode)?;
    let (los_mix, ref_mix, clamped) = link_mix(params, stats, interference_eval_distance(params))?;
    let bracket = los_mix * j_los + params.reflection_coeff * ref_mix * j_nlos;
    let watts = PI * r * r * params.bs_density * params.tx_power * eve_gain * bracket;
    Ok(InterferenceMean { watts, bracket, negative: watts < 0.0, clamped })
}

/// Everything the independent-attack expression needs.
#[derive(Debug, Clone, Copy)]
pub struct EspInputs<'a> {
    pub params: &'a SystemParams,
    pub stats: BlockageStats,
    /// `E[G_e]`.
    pub eve_gain: f64,
    /// Linear SINR threshold.
    pub beta: f64,
    pub mode: InterferenceMode,
}

impl<'a> EspInputs<'a> {
    pub fn from_params(params: &'a SystemParams, beta: f64) -> Result<Self, ModelError> {
        Ok(Self {
            params,
            stats: blockage_stats(params),
            eve_gain: mean_eve_gain(params)?,
            beta,
            mode: params.interference_mode,
        })
    }
}

/// `E[G_e]` for the eavesdropper's array.
pub fn mean_eve_gain(params: &SystemParams) -> Result<f64, ModelError> {
    let (pattern, _) = pattern_for(params, params.n_elements_rx)?;
    Ok(expected_eve_gain(&pattern, &MisalignmentModel::from_params(params, &pattern)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IndependentEsp {
    pub esp: f64,
    /// Largest LOS distance at which the threshold is met, m (0 if infeasible).
    pub los_radius: f64,
    /// Largest reflected-path distance at which the threshold is met, m.
    pub reflection_radius: f64,
    pub interference: f64,
    pub clamped: bool,
}

/// ESP of a single eavesdropper overhearing over its best LOS or
/// first-order reflected path.
pub fn esp_independent(inputs: &EspInputs) -> Result<IndependentEsp, ModelError> {
    let p = inputs.params;
    let eta = p.ts_ratio;
    let beta = inputs.beta;
    let interference = interference_mean(p, &inputs.stats, inputs.eve_gain, inputs.mode)?;
    let infeasible = IndependentEsp {
        esp: 0.0,
        los_radius: 0.0,
        reflection_radius: 0.0,
        interference: interference.watts,
        clamped: interference.clamped,
    };
    let margin = (1.0 - eta) - beta * eta;
    if margin <= 0.0 {
        return Ok(infeasible);
    }
    let denom = (p.noise() + interference.watts) * beta;
    if !(denom > 0.0) {
        return Err(ModelError::Validity(format!(
            "noise plus mean interference is {} W; the distance thresholds are undefined",
            p.noise() + interference.watts
        )));
    }
    let base = margin * p.tx_power * inputs.eve_gain * path_loss_constant(p.carrier_freq) / denom;
    let los_radius = base.powf(1.0 / p.alpha_los);
    let reflection_radius = (p.reflection_coeff * base).powf(1.0 / p.alpha_nlos);

    let mut clamped = interference.clamped;
    let density = p.bs_density;
    let los_term = if los_radius > 0.0 {
        let d = p.esp_eval_distance.unwrap_or(los_radius);
        let p_ref = reflection_probability(&ReflectionGeometry::representative(p, d), p)?;
        clamped |= p_ref.clamped;
        nearest_los_bs_cdf(&inputs.stats, density, los_radius) * los_probability(&inputs.stats, d) * (1.0 - p_ref.value)
    } else {
        0.0
    };
    let ref_term = if reflection_radius > 0.0 {
        let d = p.esp_eval_distance.unwrap_or(reflection_radius);
        let p_ref = reflection_probability(&ReflectionGeometry::representative(p, d), p)?;
        clamped |= p_ref.clamped;
        nearest_los_bs_cdf(&inputs.stats, density, reflection_radius)
            * (1.0 - los_probability(&inputs.stats, d))
            * p_ref.value
    } else {
        0.0
    };
    let esp = Evaluated::clamp_unit(los_term + ref_term);
    Ok(IndependentEsp {
        esp: esp.value,
        los_radius,
        reflection_radius,
        interference: interference.watts,
        clamped: clamped || esp.clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColludingEsp {
    /// 1 when the approximated aggregate SINR exceeds the threshold, else 0.
    pub esp: f64,
    /// The approximated aggregate SINR.
    pub ratio: f64,
    /// The common bracket `P_LOS J_L + rho P_Ref J_N`.
    pub bracket: f64,
}

/// Colluding (MRC) eavesdroppers with noise neglected. The common bracket
/// cancels, leaving `(1 - eta) / (pi r^2 lambda_b + eta)`; it is still
/// evaluated so that an invalid bracket is reported.
pub fn esp_colluding(
    params: &SystemParams,
    stats: &BlockageStats,
    geom: &ReflectionGeometry,
    beta: f64,
) -> Result<ColludingEsp, ModelError> {
    let r = params.comm_radius;
    let mode = params.interference_mode;
    let j_los = interference_integral(params.alpha_los, r, params.ref_distance, params.carrier_freq, mode)?;
    let j_nlos = interference_integral(params.alpha_nlos, r, params.ref_distance, params.carrier_freq, mode)?;
    let p_los = los_probability(stats, geom.direct_distance);
    let p_ref = reflection_probability(geom, params)?.value;
    let bracket = p_los * (1.0 - p_ref) * j_los + params.reflection_coeff * (1.0 - p_los) * p_ref * j_nlos;
    if !(bracket > 0.0) {
        return Err(ModelError::Validity(format!(
            "colluding SINR bracket is {bracket:e} (must be > 0); use interferenceMode=regularized"
        )));
    }
    let eta = params.ts_ratio;
    let interferers = PI * r * r * params.bs_density;
    let ratio = (1.0 - eta) * bracket / ((interferers + eta) * bracket);
    Ok(ColludingEsp {
        esp: if ratio > beta { 1.0 } else { 0.0 },
        ratio,
        bracket,
    })
}

/// [`esp_colluding`] with the representative reflection geometry.
pub fn esp_colluding_from_params(params: &SystemParams, beta: f64) -> Result<ColludingEsp, ModelError> {
    let d = interference_eval_distance(params);
    esp_colluding(params, &blockage_stats(params), &ReflectionGeometry::representative(params, d), beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::antenna::GainClampMode;
    use crate::units::db_to_linear;

    fn table_defaults() -> SystemParams {
        let mut p = SystemParams::default();
        p.gain_clamp = GainClampMode::SwapSafe;
        p
    }

    fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn blockage_stats_reference_values() {
        let s = blockage_stats(&SystemParams::default());
        assert!((s.beta0 - 1.591_549_430_918_953_3e-3).abs() < 1e-15);
        assert!((s.p - 0.015).abs() < 1e-15);
        // uniform heights on [0, 50], path from 35 m down to 1.5 m:
        // mean path height 18.25 m, so k = 1 - 18.25/50
        assert!((s.k - 0.635).abs() < 1e-8, "{}", s.k);
        assert!((expected_blockage_count(&s, 100.0) - 0.174_155).abs() < 1e-6);
        assert_eq!(expected_blockage_count(&s, 0.0), s.p);
        assert!((los_probability(&s, 100.0) - (-0.110_588_5f64).exp()).abs() < 1e-6);
        assert!((los_probability(&s, 100.0) - 0.8953).abs() < 1e-4);
    }

    #[test]
    fn degenerate_heights() {
        let point = |h: f64| UniformHeights { min: h, max: h };
        // shorter than both antennas: never cuts the ray
        assert!(height_factor(&point(1.0), 1.5, 35.0).abs() < 1e-8);
        // taller than both: always does
        assert!((height_factor(&point(40.0), 1.5, 35.0) - 1.0).abs() < 1e-8);
        // in between: fraction of the ray below the roof, (20 - 1.5)/33.5
        let k = height_factor(&point(20.0), 1.5, 35.0);
        assert!((k - 18.5 / 33.5).abs() < 1e-7, "{k}");
    }

    #[test]
    fn los_probability_limits() {
        let s = BlockageStats { beta0: 1e-3, p: 0.0, k: 0.7 };
        assert_eq!(los_probability(&s, 0.0), 1.0);
        let mut prev = 1.0;
        for i in 1..50 {
            let v = los_probability(&s, i as f64 * 20.0);
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn reflection_probability_cases() {
        let mut p = SystemParams::default();
        let d = 80.0;
        let degenerate = ReflectionGeometry { delay: d / SPEED_OF_LIGHT, direct_distance: d, incidence_angle: 0.0 };
        let got = reflection_probability(&degenerate, &p).unwrap().value;
        let expect = (-p.obstacle_density * (10.0 * d + 150.0)).exp();
        assert!((got - expect).abs() < 1e-12);

        p.obstacle_density = 1e-15;
        let g = ReflectionGeometry::representative(&p, 100.0);
        assert!((reflection_probability(&g, &p).unwrap().value - 1.0).abs() < 1e-9);

        let bad = ReflectionGeometry { delay: 0.9 * d / SPEED_OF_LIGHT, ..degenerate };
        assert!(reflection_probability(&bad, &p).is_err());

        // tiny D makes the -l^2 sqrt(.)/(8D) term dominate: negative area, clamped to 1
        let p = SystemParams::default();
        let tiny = ReflectionGeometry { delay: 10.0 * 0.1 / SPEED_OF_LIGHT, direct_distance: 0.1, incidence_angle: 1.0 };
        let v = reflection_probability(&tiny, &p).unwrap();
        assert!(v.clamped && v.value == 1.0);
    }

    #[test]
    fn reflection_probability_nonincreasing_in_delay_at_normal_incidence() {
        let p = SystemParams::default();
        let d = 100.0;
        let mut prev = f64::INFINITY;
        for i in 0..200 {
            let ct = d * (1.01 + 0.01 * i as f64);
            let g = ReflectionGeometry { delay: ct / SPEED_OF_LIGHT, direct_distance: d, incidence_angle: PI / 2.0 };
            let v = reflection_probability(&g, &p).unwrap().value;
            assert!(v <= prev + 1e-15, "ct={ct}");
            prev = v;
        }
    }

    #[test]
    fn nearest_los_bs_cdf_limits_and_shape() {
        let s = blockage_stats(&SystemParams::default());
        let lb = 1e-4;
        assert_eq!(nearest_los_bs_cdf(&s, lb, 0.0), 0.0);
        let limit = 1.0 - (-2.0 * PI * lb * (-s.p).exp() / (s.beta0 * s.beta0)).exp();
        assert!((nearest_los_bs_cdf(&s, lb, f64::INFINITY) - limit).abs() < 1e-12);
        assert!((nearest_los_bs_cdf(&s, lb, 1e7) - limit).abs() < 1e-9);
        let mut prev = 0.0;
        for i in 1..400 {
            let v = nearest_los_bs_cdf(&s, lb, i as f64 * 5.0);
            assert!(v >= prev);
            prev = v;
        }
        // sparse obstacles: tiny limit value sanity (defective CDF)
        let dense = BlockageStats { beta0: 0.05, p: 0.5, k: 1.0 };
        assert!(nearest_los_bs_cdf(&dense, lb, f64::INFINITY) < 0.2);
    }

    #[test]
    fn nearest_los_bs_cdf_matches_direct_formula() {
        let s = BlockageStats { beta0: 2e-3, p: 0.02, k: 0.6 };
        let lb = 5e-5;
        for x in [60.0, 100.0, 400.0, 2500.0] {
            let y = s.beta0 * x;
            let direct = 1.0 - (-2.0 * PI * lb * (-s.p).exp() / (s.beta0 * s.beta0) * (1.0 - y * (-y).exp() - (-y).exp())).exp();
            assert!((nearest_los_bs_cdf(&s, lb, x) - direct).abs() < 1e-12, "x={x}");
        }
        // Sparse-obstacle limit: 1 - exp(-pi lambda x^2) (PPP void probability).
        let clear = BlockageStats { beta0: 1e-12, p: 0.0, k: 1.0 };
        for x in [10.0, 50.0, 120.0] {
            let expect = 1.0 - (-PI * lb * x * x).exp();
            assert!((nearest_los_bs_cdf(&clear, lb, x) - expect).abs() < 1e-9);
        }
        // series/direct branches agree at the switch point
        let a = blockage_bracket_over_y2(0.01 - 1e-12);
        let b = blockage_bracket_over_y2(0.01 + 1e-12);
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn regularized_integral_matches_quadrature() {
        let b = path_loss_constant(28e9);
        let got = interference_integral(2.0, 100.0, 1.0, 28e9, InterferenceMode::Regularized).unwrap();
        let expect = b * (1e-4 + 2e-4 * 100f64.ln());
        assert!((got - expect).abs() / expect < 1e-12);
        assert!((got / b - (1e-4 + 9.21e-4)).abs() < 1e-6);
        for (alpha, r, d0) in [(2.0, 100.0, 1.0), (3.0, 100.0, 1.0), (3.76, 80.0, 2.0), (2.25, 150.0, 0.5)] {
            let f = |x: f64| 2.0 * x / (r * r) * b * x.max(d0).powf(-alpha);
            let oracle = simpson(f, 0.0, d0, 2000) + simpson(f, d0, r, 200_000);
            let got = interference_integral(alpha, r, d0, 28e9, InterferenceMode::Regularized).unwrap();
            assert!((got - oracle).abs() / oracle < 1e-9, "alpha={alpha}: {got} vs {oracle}");
        }
    }

    #[test]
    fn paper_faithful_integral_values() {
        let v = interference_integral(3.0, 100.0, 1.0, 28e9, InterferenceMode::PaperFaithful).unwrap();
        assert!((v + 2e-6).abs() < 1e-18);
        assert!(interference_integral(2.0, 100.0, 1.0, 28e9, InterferenceMode::PaperFaithful).is_err());
    }

    #[test]
    fn interference_vanishes_with_bs_density() {
        let mut p = table_defaults();
        p.set("bsDensity", "1e-300").unwrap();
        let s = blockage_stats(&p);
        let i = interference_mean(&p, &s, 1.1, InterferenceMode::Regularized).unwrap();
        assert!(i.watts < 1e-290);
    }

    #[test]
    fn independent_esp_zero_when_threshold_exceeds_split_ratio() {
        let mut p = table_defaults();
        p.ts_ratio = 0.5;
        let inputs = EspInputs::from_params(&p, 1.0).unwrap();
        assert_eq!(esp_independent(&inputs).unwrap().esp, 0.0);
        let p = table_defaults();
        let cap = (1.0 - p.ts_ratio) / p.ts_ratio;
        for beta in [cap, cap * 1.0001, 10.0, 1e10] {
            let inputs = EspInputs::from_params(&p, beta).unwrap();
            assert_eq!(esp_independent(&inputs).unwrap().esp, 0.0);
        }
        let inputs = EspInputs::from_params(&p, cap * 0.5).unwrap();
        assert!(esp_independent(&inputs).unwrap().esp > 0.0);
    }

    #[test]
    fn no_reflection_leaves_only_los_term() {
        let mut p = table_defaults();
        p.reflection_coeff = 0.0;
        let beta = db_to_linear(1.0);
        let inputs = EspInputs::from_params(&p, beta).unwrap();
        let out = esp_independent(&inputs).unwrap();
        assert_eq!(out.reflection_radius, 0.0);
        let s = inputs.stats;
        let d = out.los_radius;
        let p_ref = reflection_probability(&ReflectionGeometry::representative(&p, d), &p).unwrap().value;
        let los_only = nearest_los_bs_cdf(&s, p.bs_density, d) * los_probability(&s, d) * (1.0 - p_ref);
        assert!((out.esp - los_only).abs() < 1e-15);
    }

    #[test]
    fn independent_esp_nonincreasing_in_threshold() {
        let p = table_defaults();
        let mut prev = f64::INFINITY;
        for db in 1..=100 {
            let inputs = EspInputs::from_params(&p, db_to_linear(db as f64)).unwrap();
            let v = esp_independent(&inputs).unwrap().esp;
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev, "beta={db} dB");
            prev = v;
        }
    }

    #[test]
    fn independent_esp_ordered_by_time_switch_ratio() {
        let base = table_defaults();
        for tenth_db in 0..60 {
            let beta = db_to_linear(-3.0 + 0.1 * tenth_db as f64);
            let mut prev = f64::INFINITY;
            for eta in [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.8] {
                let mut p = base.clone();
                p.ts_ratio = eta;
                let v = esp_independent(&EspInputs::from_params(&p, beta).unwrap()).unwrap().esp;
                assert!(v <= prev + 1e-15, "eta={eta} beta={beta}");
                prev = v;
            }
        }
    }

    #[test]
    fn independent_esp_invariant_under_joint_power_scaling() {
        let p = table_defaults();
        let mut q = p.clone();
        q.tx_power *= 10.0;
        q.noise_figure += 10.0;
        for db in [-2.0, 0.0, 1.0, 2.0, 3.0] {
            let beta = db_to_linear(db);
            let a = esp_independent(&EspInputs::from_params(&p, beta).unwrap()).unwrap();
            let b = esp_independent(&EspInputs::from_params(&q, beta).unwrap()).unwrap();
            assert!((a.esp - b.esp).abs() < 1e-12, "{db}: {} vs {}", a.esp, b.esp);
            assert!((a.los_radius - b.los_radius).abs() < 1e-9 * a.los_radius.max(1.0));
        }
    }

    #[test]
    fn faithful_mode_errors_surface() {
        let mut p = table_defaults();
        p.interference_mode = InterferenceMode::PaperFaithful;
        let inputs = EspInputs::from_params(&p, 1.0).unwrap();
        assert!(matches!(esp_independent(&inputs), Err(ModelError::Interference(_))));
        assert!(esp_colluding_from_params(&p, 1.0).is_err());
        // both exponents above 2: the integral is negative
        p.set("alphaLos", "2.5").unwrap();
        p.set("alphaNlos", "3").unwrap();
        let s = blockage_stats(&p);
        let i = interference_mean(&p, &s, 1.0, InterferenceMode::PaperFaithful).unwrap();
        assert!(i.negative);
        assert!(matches!(esp_colluding_from_params(&p, 1.0), Err(ModelError::Validity(_))));
    }

    #[test]
    fn colluding_ratio_closed_form() {
        let mut p = table_defaults();
        for nb in [1usize, 2, 3, 5, 8] {
            p.set_n_bs(nb);
            let c = esp_colluding_from_params(&p, 1.0).unwrap();
            let expect = (1.0 - p.ts_ratio) / (PI * p.comm_radius.powi(2) * p.bs_density + p.ts_ratio);
            assert!((c.ratio - expect).abs() < 1e-12 * expect);
        }
        // vanishing interferer count, eta = 0.4: ratio 1.5
        p.ts_ratio = 0.4;
        p.set("bsDensity", "1e-300").unwrap();
        let c = esp_colluding_from_params(&p, 1.49).unwrap();
        assert!((c.ratio - 1.5).abs() < 1e-12);
        assert_eq!(c.esp, 1.0);
        assert_eq!(esp_colluding_from_params(&p, 1.5).unwrap().esp, 0.0);
    }

    #[test]
    fn colluding_ratio_decreasing_in_bs_density_and_free_of_power_and_gain() {
        let p = table_defaults();
        let mut prev = f64::INFINITY;
        for i in 1..30 {
            let mut q = p.clone();
            q.set("bsDensity", &format!("{}", i as f64 * 2e-5)).unwrap();
            let r = esp_colluding_from_params(&q, 1.0).unwrap().ratio;
            assert!(r < prev);
            prev = r;
        }
        let base = esp_colluding_from_params(&p, 1.0).unwrap().ratio;
        let mut q = p.clone();
        q.tx_power = 123.0;
        q.reflection_coeff = 0.9;
        q.main_gain = Some(50.0);
        q.side_gain = Some(0.3);
        assert!((esp_colluding_from_params(&q, 1.0).unwrap().ratio - base).abs() < 1e-15);
    }
}
