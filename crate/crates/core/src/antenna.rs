//! Ideal sector antennas and beam-misalignment statistics.

use std::f64::consts::PI;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::config::SystemParams;
use crate::error::ModelError;

/// Two-level sector pattern: `main_gain` within `beamwidth / 2` of boresight,
/// `side_gain` elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorPattern {
    pub main_gain: f64,
    pub side_gain: f64,
    pub beamwidth: f64,
}

/// Which normalization the misalignment CDF uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MisalignMode {
    /// The half-normal density normalized by `erf(theta / (2 sqrt(2) sigma))`
    /// integrated on `[0, x]`. Carries mass 1/2 on `[0, theta/2]`.
    PaperLiteral,
    /// Twice the above, so the law is a proper distribution on `[0, theta/2]`.
    OneSidedRenormalized,
}

impl FromStr for MisalignMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "paperLiteral" => Ok(Self::PaperLiteral),
            "oneSidedRenormalized" => Ok(Self::OneSidedRenormalized),
            _ => Err(format!("expected paperLiteral|oneSidedRenormalized, got `{s}`")),
        }
    }
}

impl MisalignMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PaperLiteral => "paperLiteral",
            Self::OneSidedRenormalized => "oneSidedRenormalized",
        }
    }
}

/// What to do when the element-count side-lobe formula exceeds the main lobe.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GainClampMode {
    Error,
    /// Use `min(formula, G_m / 10)` for the side lobe.
    SwapSafe,
}

impl FromStr for GainClampMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "error" => Ok(Self::Error),
            "swapSafe" => Ok(Self::SwapSafe),
            _ => Err(format!("expected error|swapSafe, got `{s}`")),
        }
    }
}

impl GainClampMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Error => "error",
            Self::SwapSafe => "swapSafe",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MisalignmentModel {
    pub sigma: f64,
    pub beamwidth: f64,
    pub mode: MisalignMode,
}

/// Default main-lobe width of an `n`-element ULA.
pub fn default_beamwidth(n: u32) -> f64 {
    2.0 * PI / (n as f64).sqrt()
}

/// Side-lobe level of an `n`-element ULA: `1 / sin^2(3 pi / (2 sqrt(n)))`.
pub fn side_lobe_formula(n: u32) -> f64 {
    let s = (3.0 * PI / (2.0 * (n as f64).sqrt())).sin();
    1.0 / (s * s)
}

/// Sector pattern of an `n`-element ULA with main gain `n`.
pub fn gains_from_elements(n: u32) -> Result<SectorPattern, ModelError> {
    if n == 0 {
        return Err(ModelError::Domain("element count must be >= 1".into()));
    }
    let main = n as f64;
    let side = side_lobe_formula(n);
    if side >= main {
        return Err(ModelError::GainBreakdown { n, main, side });
    }
    Ok(SectorPattern {
        main_gain: main,
        side_gain: side,
        beamwidth: default_beamwidth(n),
    })
}

/// Builds the pattern for an `n`-element array, honoring gain overrides,
/// the beamwidth override and the clamp mode. The flag reports whether the
/// side-lobe value was clamped.
pub fn pattern_for(params: &SystemParams, n: u32) -> Result<(SectorPattern, bool), ModelError> {
    let beamwidth = params.beamwidth.unwrap_or_else(|| default_beamwidth(n));
    if !(beamwidth > 0.0 && beamwidth < 2.0 * PI) {
        return Err(ModelError::Domain(format!(
            "beamwidth {beamwidth} rad for N={n} is outside (0, 2pi); set beamwidthRad"
        )));
    }
    let main = params.main_gain.unwrap_or(n as f64);
    let formula = side_lobe_formula(n);
    let (side, clamped) = match params.side_gain {
        Some(s) => (s, false),
        None if formula < main => (formula, false),
        None => match params.gain_clamp {
            GainClampMode::Error => return Err(ModelError::GainBreakdown { n, main, side: formula }),
            GainClampMode::SwapSafe => (formula.min(main / 10.0), true),
        },
    };
    if !(main > side && side > 0.0) {
        return Err(ModelError::Domain(format!("need G_m > G_s > 0, got {main} / {side}")));
    }
    Ok((SectorPattern { main_gain: main, side_gain: side, beamwidth }, clamped))
}

/// Gain at angular offset `offset` from boresight; the boundary belongs to the main lobe.
pub fn gain_at(pattern: &SectorPattern, offset: f64) -> f64 {
    let w = wrap_angle(offset).abs();
    if w <= 0.5 * pattern.beamwidth {
        pattern.main_gain
    } else {
        pattern.side_gain
    }
}

/// Maps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

impl MisalignmentModel {
    pub fn from_params(params: &SystemParams, pattern: &SectorPattern) -> Self {
        Self {
            sigma: params.misalignment_sigma,
            beamwidth: pattern.beamwidth,
            mode: params.misalign_mode,
        }
    }

    fn half_width(&self) -> f64 {
        0.5 * self.beamwidth
    }
}

/// CDF of the pointing error at `x` in `[0, theta/2]`.
pub fn misalignment_cdf(model: &MisalignmentModel, x: f64) -> Result<f64, ModelError> {
    let half = model.half_width();
    if !(0.0..=half * (1.0 + 1e-12)).contains(&x) {
        return Err(ModelError::Domain(format!("misalignment CDF needs 0 <= x <= {half}, got {x}")));
    }
    let s2 = std::f64::consts::SQRT_2 * model.sigma;
    // integral_0^x of exp(-t^2 / 2s^2) / (s sqrt(2 pi)) dt = erf(x / (sqrt2 s)) / 2
    let literal = 0.5 * libm::erf(x.min(half) / s2) / libm::erf(half / s2);
    Ok(match model.mode {
        MisalignMode::PaperLiteral => literal,
        MisalignMode::OneSidedRenormalized => 2.0 * literal,
    })
}

/// Probability that the eavesdropper sees the main lobe.
pub fn main_lobe_probability(model: &MisalignmentModel) -> f64 {
    misalignment_cdf(model, model.half_width()).expect("theta/2 is inside the domain")
}

/// One pointing error from the half-normal law truncated to `[0, theta/2]`.
pub fn sample_misalignment<R: Rng + ?Sized>(model: &MisalignmentModel, rng: &mut R) -> f64 {
    let half = model.half_width();
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let x = (z * model.sigma).abs();
        if x <= half {
            return x;
        }
    }
}

/// Gain seen by an eavesdropper pointing at a path: main lobe with
/// probability `F(theta/2)`, side lobe otherwise. Also returns the drawn
/// pointing error.
pub fn sample_eve_gain<R: Rng + ?Sized>(pattern: &SectorPattern, model: &MisalignmentModel, rng: &mut R) -> (f64, f64) {
    let err = sample_misalignment(model, rng);
    let u: f64 = rng.random();
    if u < main_lobe_probability(model) {
        (gain_at(pattern, err), err)
    } else {
        (pattern.side_gain, err)
    }
}

/// Mean eavesdropper gain `F G_m + (1 - F) G_s`.
pub fn expected_eve_gain(pattern: &SectorPattern, model: &MisalignmentModel) -> f64 {
    let f = main_lobe_probability(model);
    f * pattern.main_gain + (1.0 - f) * pattern.side_gain
}
