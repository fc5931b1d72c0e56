//! Run parameters, the flat `key=value` config format, and the noise model.
//!
//! [`SystemParams`] is the single source of truth for a run. It is built
//! from defaults, then overridden by a config file, the `ESP_SEED`
//! environment variable and finally command-line flags.

use std::f64::consts::PI;
use std::str::FromStr;

use crate::analytic::InterferenceMode;
use crate::antenna::{GainClampMode, MisalignMode};
use crate::error::ConfigError;
use crate::geometry::SizeDistribution;
use crate::montecarlo::{BsGainTowardEve, InterfererPlacement};
use crate::units::{db_to_linear, dbm_to_watts, linear_to_db};

/// Environment variable that overrides the RNG seed.
pub const SEED_ENV: &str = "ESP_SEED";

/// Thermal noise density at room temperature, dBm/Hz.
const THERMAL_FLOOR_DBM_HZ: f64 = -174.0;

/// How the receiver noise power is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseMode {
    /// -174 dBm/Hz + 10 log10(bandwidth) + noise figure.
    Bandwidth,
    /// -174 + 10 log10(10) + noise figure, ignoring the configured bandwidth.
    PaperLiteral,
    /// No noise at all. Only meaningful when interference is present.
    Off,
}

impl FromStr for NoiseMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bandwidth" => Ok(Self::Bandwidth),
            "paperLiteral" => Ok(Self::PaperLiteral),
            "off" => Ok(Self::Off),
            _ => Err(format!("expected bandwidth|paperLiteral|off, got `{s}`")),
        }
    }
}

impl NoiseMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bandwidth => "bandwidth",
            Self::PaperLiteral => "paperLiteral",
            Self::Off => "off",
        }
    }
}

/// Thermal noise power in watts for a receiver of the given bandwidth (Hz)
/// and noise figure (dB).
pub fn noise_power(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    debug_assert!(bandwidth_hz > 0.0);
    dbm_to_watts(THERMAL_FLOOR_DBM_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}

/// LOS / NLOS path-loss exponents measured at the three common mmWave
/// carriers. Returns `None` for carriers not in the table.
pub fn tabulated_exponents(carrier_hz: f64) -> Option<(f64, f64)> {
    const TABLE: [(f64, f64, f64); 3] = [(28e9, 2.0, 3.0), (38e9, 2.0, 3.71), (60e9, 2.25, 3.76)];
    TABLE
        .iter()
        .find(|(f, _, _)| (carrier_hz - f).abs() <= 0.5e9)
        .map(|&(_, los, nlos)| (los, nlos))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Transmit power, W.
    pub tx_power: f64,
    /// Carrier frequency, Hz.
    pub carrier_freq: f64,
    /// Time-switching ratio: the fraction of each block spent on power transfer.
    pub ts_ratio: f64,
    /// Reference SINR threshold (linear), used when no grid is given.
    pub sinr_threshold: f64,
    /// BS density, per m^2.
    pub bs_density: f64,
    bs_density_explicit: bool,
    /// Number of BSs (target plus interferers) within the hearing radius.
    pub n_bs: usize,
    pub eve_density: f64,
    pub obstacle_density: f64,
    pub reflection_coeff: f64,
    pub alpha_los: f64,
    pub alpha_nlos: f64,
    exponents_from_table: bool,
    /// Close-in reference distance of the path-loss law, m.
    pub ref_distance: f64,
    pub bs_height: f64,
    pub eve_height: f64,
    /// Height of the legitimate user. Not used by either ESP engine.
    pub user_height: f64,
    pub obstacle_length_mean: f64,
    pub obstacle_width_mean: f64,
    pub obstacle_height_range: (f64, f64),
    pub obstacle_size_dist: SizeDistribution,
    pub reflector_fraction: f64,
    pub n_elements_tx: u32,
    pub n_elements_rx: u32,
    /// Main-lobe beamwidth override, rad. Defaults to 2 pi / sqrt(N).
    pub beamwidth: Option<f64>,
    pub main_gain: Option<f64>,
    pub side_gain: Option<f64>,
    pub gain_clamp: GainClampMode,
    pub misalignment_sigma: f64,
    pub misalign_mode: MisalignMode,
    /// Largest BS-Eve distance at which a BS is heard, m.
    pub comm_radius: f64,
    pub map_size: (f64, f64),
    pub map_granularity: f64,
    pub bandwidth: f64,
    /// Receiver noise figure, dB.
    pub noise_figure: f64,
    pub noise_mode: NoiseMode,
    pub rng_seed: u64,
    pub interference_mode: InterferenceMode,
    /// Fixes the distance at which LOS/reflection probabilities are evaluated.
    pub esp_eval_distance: Option<f64>,
    /// Incidence angle of the representative reflection geometry, rad.
    pub refl_incidence_angle: f64,
    /// Representative reflection delay as a multiple of D / c.
    pub refl_delay_factor: f64,
    /// Plan-view BS-Eve separation bounds, m.
    pub eve_distance_range: (f64, f64),
    pub bs_gain_toward_eve: BsGainTowardEve,
    pub interferer_placement: InterfererPlacement,
    pub trials_per_world: usize,
}

impl Default for SystemParams {
    fn default() -> Self {
        let mut p = Self {
            tx_power: dbm_to_watts(30.0),
            carrier_freq: 28e9,
            ts_ratio: 0.3,
            sinr_threshold: db_to_linear(8.0),
            bs_density: 0.0,
            bs_density_explicit: false,
            n_bs: 3,
            eve_density: 2e-4,
            obstacle_density: 1e-4,
            reflection_coeff: 0.4,
            alpha_los: 2.0,
            alpha_nlos: 3.0,
            exponents_from_table: true,
            ref_distance: 1.0,
            bs_height: 35.0,
            eve_height: 1.5,
            user_height: 1.5,
            obstacle_length_mean: 15.0,
            obstacle_width_mean: 10.0,
            obstacle_height_range: (0.0, 50.0),
            obstacle_size_dist: SizeDistribution::PointMass,
            reflector_fraction: 1.0,
            n_elements_tx: 2,
            n_elements_rx: 2,
            beamwidth: None,
            main_gain: None,
            side_gain: None,
            gain_clamp: GainClampMode::Error,
            misalignment_sigma: 0.1,
            misalign_mode: MisalignMode::PaperLiteral,
            comm_radius: 100.0,
            map_size: (200.0, 160.0),
            map_granularity: 1.0,
            bandwidth: 800e6,
            noise_figure: 10.0,
            noise_mode: NoiseMode::Bandwidth,
            rng_seed: 1,
            interference_mode: InterferenceMode::Regularized,
            esp_eval_distance: None,
            refl_incidence_angle: PI / 4.0,
            refl_delay_factor: 1.2,
            eve_distance_range: (10.0, 500.0),
            bs_gain_toward_eve: BsGainTowardEve::Bernoulli,
            interferer_placement: InterfererPlacement::Uniform,
            trials_per_world: 1,
        };
        p.resolve_derived();
        p
    }
}

/// Parses flat `key=value` text on top of the defaults and validates the result.
pub fn load_params(source: &str) -> Result<SystemParams, ConfigError> {
    let mut params = SystemParams::default();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(ConfigError::Parse {
                line: line_no,
                message: format!("expected key=value, got `{line}`"),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(ConfigError::Parse { line: line_no, message: "empty key".into() });
        }
        params.set(key, value).map_err(|e| match e {
            ConfigError::UnknownKey { key, .. } => ConfigError::UnknownKey { line: line_no, key },
            ConfigError::Value { key, message } => ConfigError::Parse {
                line: line_no,
                message: format!("{key}: {message}"),
            },
            other => other,
        })?;
    }
    params.validate()?;
    Ok(params)
}

fn num(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ConfigError::Value { key: key.into(), message: format!("not a finite number: `{value}`") })
}

fn int<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse::<T>()
        .map_err(|_| ConfigError::Value { key: key.into(), message: format!("not an integer: `{value}`") })
}

fn choice<T: FromStr<Err = String>>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse::<T>().map_err(|message| ConfigError::Value { key: key.into(), message })
}

fn pair(key: &str, value: &str) -> Result<(f64, f64), ConfigError> {
    let (a, b) = value
        .split_once(['x', ','])
        .ok_or_else(|| ConfigError::Value { key: key.into(), message: format!("expected two numbers, got `{value}`") })?;
    Ok((num(key, a.trim())?, num(key, b.trim())?))
}

impl SystemParams {
    /// Applies one `key=value` override. Keys are the camelCase field names;
    /// power-like inputs are taken in dB/dBm.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "txPowerDbm" => self.tx_power = dbm_to_watts(num(key, value)?),
            "carrierFreq" => self.set_carrier_freq(num(key, value)?),
            "carrierFreqGhz" => self.set_carrier_freq(num(key, value)? * 1e9),
            "eta" | "tsRatio" => self.ts_ratio = num(key, value)?,
            "sinrThresholdDb" | "betaDb" => self.sinr_threshold = db_to_linear(num(key, value)?),
            "bsDensity" => {
                self.bs_density = num(key, value)?;
                self.bs_density_explicit = true;
            }
            "nBs" => self.set_n_bs(int(key, value)?),
            "eveDensity" => self.eve_density = num(key, value)?,
            "obstacleDensity" => self.obstacle_density = num(key, value)?,
            "reflectionCoeff" | "rho" => self.reflection_coeff = num(key, value)?,
            "alphaLos" => {
                self.alpha_los = num(key, value)?;
                self.exponents_from_table = false;
            }
            "alphaNlos" => {
                self.alpha_nlos = num(key, value)?;
                self.exponents_from_table = false;
            }
            "refDistance" => self.ref_distance = num(key, value)?,
            "bsHeight" => self.bs_height = num(key, value)?,
            "eveHeight" => self.eve_height = num(key, value)?,
            "userHeight" => self.user_height = num(key, value)?,
            "obstacleLengthMean" => self.obstacle_length_mean = num(key, value)?,
            "obstacleWidthMean" => self.obstacle_width_mean = num(key, value)?,
            "obstacleHeightMin" => self.obstacle_height_range.0 = num(key, value)?,
            "obstacleHeightMax" => self.obstacle_height_range.1 = num(key, value)?,
            "obstacleHeightRange" => self.obstacle_height_range = pair(key, value)?,
            "obstacleSizeDist" => self.obstacle_size_dist = choice(key, value)?,
            "reflectorFraction" => self.reflector_fraction = num(key, value)?,
            "nElements" => {
                let n = int(key, value)?;
                self.n_elements_tx = n;
                self.n_elements_rx = n;
            }
            "nElementsTx" => self.n_elements_tx = int(key, value)?,
            "nElementsRx" => self.n_elements_rx = int(key, value)?,
            "beamwidthRad" => self.beamwidth = Some(num(key, value)?),
            "mainGain" => self.main_gain = Some(num(key, value)?),
            "sideGain" => self.side_gain = Some(num(key, value)?),
            "gainClampMode" => self.gain_clamp = choice(key, value)?,
            "sigmaMisalign" | "misalignmentSigma" => self.misalignment_sigma = num(key, value)?,
            "misalignMode" => self.misalign_mode = choice(key, value)?,
            "commRadius" => {
                self.comm_radius = num(key, value)?;
                self.resolve_derived();
            }
            "mapSize" => self.map_size = pair(key, value)?,
            "mapWidth" => self.map_size.0 = num(key, value)?,
            "mapHeight" => self.map_size.1 = num(key, value)?,
            "mapGranularity" => self.map_granularity = num(key, value)?,
            "bandwidth" => self.bandwidth = num(key, value)?,
            "noiseFigure" => self.noise_figure = num(key, value)?,
            "noiseMode" => self.noise_mode = choice(key, value)?,
            "rngSeed" | "seed" => self.rng_seed = int(key, value)?,
            "interferenceMode" => self.interference_mode = choice(key, value)?,
            "espEvalDistance" => self.esp_eval_distance = Some(num(key, value)?),
            "reflIncidenceAngle" => self.refl_incidence_angle = num(key, value)?,
            "reflDelayFactor" => self.refl_delay_factor = num(key, value)?,
            "eveDistanceMin" => self.eve_distance_range.0 = num(key, value)?,
            "eveDistanceMax" => self.eve_distance_range.1 = num(key, value)?,
            "bsGainTowardEve" => self.bs_gain_toward_eve = choice(key, value)?,
            "interfererPlacement" => self.interferer_placement = choice(key, value)?,
            "trialsPerWorld" => self.trials_per_world = int(key, value)?,
            _ => return Err(ConfigError::UnknownKey { line: 0, key: key.into() }),
        }
        Ok(())
    }

    /// Changes the carrier and, unless exponents were set explicitly, picks
    /// the tabulated LOS/NLOS exponents for it.
    pub fn set_carrier_freq(&mut self, hz: f64) {
        self.carrier_freq = hz;
        self.resolve_derived();
    }

    /// Changes the BS count; the BS density follows unless it was set explicitly.
    pub fn set_n_bs(&mut self, n: usize) {
        self.n_bs = n;
        self.resolve_derived();
    }

    pub fn exponents_from_table(&self) -> bool {
        self.exponents_from_table
    }

    pub fn bs_density_explicit(&self) -> bool {
        self.bs_density_explicit
    }

    fn resolve_derived(&mut self) {
        if self.exponents_from_table {
            if let Some((los, nlos)) = tabulated_exponents(self.carrier_freq) {
                self.alpha_los = los;
                self.alpha_nlos = nlos;
            }
        }
        if !self.bs_density_explicit && self.comm_radius > 0.0 {
            self.bs_density = self.n_bs as f64 / (PI * self.comm_radius * self.comm_radius);
        }
    }

    /// Noise power at the eavesdropper, W.
    pub fn noise(&self) -> f64 {
        match self.noise_mode {
            NoiseMode::Bandwidth => noise_power(self.bandwidth, self.noise_figure),
            NoiseMode::PaperLiteral => noise_power(10.0, self.noise_figure),
            NoiseMode::Off => 0.0,
        }
    }

    pub fn map_area(&self) -> f64 {
        self.map_size.0 * self.map_size.1
    }

    /// Reads `ESP_SEED` through `lookup` (normally `std::env::var`).
    pub fn apply_env<F>(&mut self, lookup: F) -> Result<(), ConfigError>
    where
        F: Fn(&str) -> Option<String>,
    {
        if let Some(seed) = lookup(SEED_ENV) {
            self.rng_seed = int(SEED_ENV, seed.trim())?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<(), ConfigError> {
            Err(ConfigError::Invalid { field, reason: reason.into() })
        }
        let eta = self.ts_ratio;
        if !(eta > 0.0 && eta < 1.0) {
            return bad("eta", format!("time-switching ratio must lie in (0,1), got {eta}"));
        }
        if !(0.0..=1.0).contains(&self.reflection_coeff) {
            return bad("reflectionCoeff", format!("must lie in [0,1], got {}", self.reflection_coeff));
        }
        for (field, v) in [
            ("bsDensity", self.bs_density),
            ("eveDensity", self.eve_density),
            ("obstacleDensity", self.obstacle_density),
        ] {
            if !(v > 0.0) {
                return bad(field, format!("density must be > 0, got {v}"));
            }
        }
        if self.alpha_los < 2.0 || self.alpha_nlos < 2.0 {
            return bad("alphaLos/alphaNlos", format!("exponents must be >= 2, got {} / {}", self.alpha_los, self.alpha_nlos));
        }
        if self.exponents_from_table && tabulated_exponents(self.carrier_freq).is_none() {
            return bad("carrierFreq", format!("no tabulated exponents for {} Hz; set alphaLos and alphaNlos", self.carrier_freq));
        }
        let (hmin, hmax) = self.obstacle_height_range;
        if !(hmin >= 0.0 && hmin <= hmax) {
            return bad("obstacleHeightRange", format!("need 0 <= H_min <= H_max, got [{hmin}, {hmax}]"));
        }
        if !(self.tx_power > 0.0) {
            return bad("txPowerDbm", "transmit power must be positive");
        }
        if !(self.ref_distance > 0.0) {
            return bad("refDistance", "must be > 0");
        }
        if !(self.comm_radius > self.ref_distance) {
            return bad("commRadius", format!("must exceed the reference distance {}", self.ref_distance));
        }
        if !(self.carrier_freq > 0.0) || !(self.bandwidth > 0.0) {
            return bad("carrierFreq/bandwidth", "must be positive");
        }
        if !(self.sinr_threshold > 0.0) {
            return bad("sinrThresholdDb", "threshold must be finite");
        }
        for (field, v) in [("bsHeight", self.bs_height), ("eveHeight", self.eve_height), ("userHeight", self.user_height)] {
            if !(v >= 0.0) {
                return bad(field, "height must be >= 0");
            }
        }
        if !(self.obstacle_length_mean > 0.0 && self.obstacle_width_mean > 0.0) {
            return bad("obstacleLengthMean/obstacleWidthMean", "obstacle dimensions must be > 0");
        }
        if !(0.0..=1.0).contains(&self.reflector_fraction) {
            return bad("reflectorFraction", "must lie in [0,1]");
        }
        if self.n_elements_tx == 0 || self.n_elements_rx == 0 {
            return bad("nElements", "need at least one element");
        }
        if let Some(bw) = self.beamwidth {
            if !(bw > 0.0 && bw < 2.0 * PI) {
                return bad("beamwidthRad", format!("must lie in (0, 2pi), got {bw}"));
            }
        }
        if let (Some(m), Some(s)) = (self.main_gain, self.side_gain) {
            if !(m > s && s > 0.0) {
                return bad("mainGain/sideGain", format!("need G_m > G_s > 0, got {m} / {s}"));
            }
        }
        if !(self.misalignment_sigma > 0.0) {
            return bad("sigmaMisalign", "must be > 0");
        }
        if !(self.map_size.0 > 0.0 && self.map_size.1 > 0.0 && self.map_granularity > 0.0) {
            return bad("mapSize/mapGranularity", "must be positive");
        }
        if self.n_bs == 0 {
            return bad("nBs", "need at least the target BS");
        }
        let (dmin, dmax) = self.eve_distance_range;
        if !(dmin >= 0.0 && dmin < dmax) {
            return bad("eveDistanceMin/eveDistanceMax", format!("need 0 <= min < max, got [{dmin}, {dmax}]"));
        }
        if let Some(d) = self.esp_eval_distance {
            if !(d > 0.0) {
                return bad("espEvalDistance", "must be > 0");
            }
        }
        if !(self.refl_delay_factor >= 1.0) {
            return bad("reflDelayFactor", "a reflected path cannot be shorter than the direct one");
        }
        if self.trials_per_world == 0 {
            return bad("trialsPerWorld", "must be >= 1");
        }
        Ok(())
    }

    /// Renders the parameters back to config text; `load_params` of the
    /// output reproduces `self`.
    pub fn to_config_text(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            out.push_str(k);
            out.push('=');
            out.push_str(&v);
            out.push('\n');
        };
        kv("txPowerDbm", format!("{}", linear_to_db(self.tx_power).map(|d| d + 30.0).unwrap_or(f64::NAN)));
        kv("carrierFreq", format!("{}", self.carrier_freq));
        kv("eta", format!("{}", self.ts_ratio));
        kv("sinrThresholdDb", format!("{}", linear_to_db(self.sinr_threshold).unwrap_or(f64::NAN)));
        kv("nBs", format!("{}", self.n_bs));
        if self.bs_density_explicit {
            kv("bsDensity", format!("{}", self.bs_density));
        }
        kv("eveDensity", format!("{}", self.eve_density));
        kv("obstacleDensity", format!("{}", self.obstacle_density));
        kv("reflectionCoeff", format!("{}", self.reflection_coeff));
        if !self.exponents_from_table {
            kv("alphaLos", format!("{}", self.alpha_los));
            kv("alphaNlos", format!("{}", self.alpha_nlos));
        }
        kv("refDistance", format!("{}", self.ref_distance));
        kv("bsHeight", format!("{}", self.bs_height));
        kv("eveHeight", format!("{}", self.eve_height));
        kv("userHeight", format!("{}", self.user_height));
        kv("obstacleLengthMean", format!("{}", self.obstacle_length_mean));
        kv("obstacleWidthMean", format!("{}", self.obstacle_width_mean));
        kv("obstacleHeightRange", format!("{},{}", self.obstacle_height_range.0, self.obstacle_height_range.1));
        kv("obstacleSizeDist", self.obstacle_size_dist.as_str().into());
        kv("reflectorFraction", format!("{}", self.reflector_fraction));
        kv("nElementsTx", format!("{}", self.n_elements_tx));
        kv("nElementsRx", format!("{}", self.n_elements_rx));
        if let Some(bw) = self.beamwidth {
            kv("beamwidthRad", format!("{bw}"));
        }
        if let Some(g) = self.main_gain {
            kv("mainGain", format!("{g}"));
        }
        if let Some(g) = self.side_gain {
            kv("sideGain", format!("{g}"));
        }
        kv("gainClampMode", self.gain_clamp.as_str().into());
        kv("sigmaMisalign", format!("{}", self.misalignment_sigma));
        kv("misalignMode", self.misalign_mode.as_str().into());
        kv("commRadius", format!("{}", self.comm_radius));
        kv("mapSize", format!("{}x{}", self.map_size.0, self.map_size.1));
        kv("mapGranularity", format!("{}", self.map_granularity));
        kv("bandwidth", format!("{}", self.bandwidth));
        kv("noiseFigure", format!("{}", self.noise_figure));
        kv("noiseMode", self.noise_mode.as_str().into());
        kv("rngSeed", format!("{}", self.rng_seed));
        kv("interferenceMode", self.interference_mode.as_str().into());
        if let Some(d) = self.esp_eval_distance {
            kv("espEvalDistance", format!("{d}"));
        }
        kv("reflIncidenceAngle", format!("{}", self.refl_incidence_angle));
        kv("reflDelayFactor", format!("{}", self.refl_delay_factor));
        kv("eveDistanceMin", format!("{}", self.eve_distance_range.0));
        kv("eveDistanceMax", format!("{}", self.eve_distance_range.1));
        kv("bsGainTowardEve", self.bs_gain_toward_eve.as_str().into());
        kv("interfererPlacement", self.interferer_placement.as_str().into());
        kv("trialsPerWorld", format!("{}", self.trials_per_world));
        out
    }
}
