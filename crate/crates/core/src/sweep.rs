//! Parameter sweeps over the threshold grid and one varied parameter,
//! emitted as CSV.

use std::collections::BTreeSet;
use std::str::FromStr;

use crate::analytic::{esp_colluding_from_params, esp_independent, EspInputs};
use crate::antenna::pattern_for;
use crate::config::SystemParams;
use crate::error::{ConfigError, Error};
use crate::montecarlo::{esp_from_outcomes, simulate, Attack, EspEstimate};
use crate::units::{db_to_linear, linear_to_db};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    Analytic,
    Simulate,
    Compare,
}

impl SweepMode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Analytic => "analytic",
            Self::Simulate => "simulate",
            Self::Compare => "compare",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VaryKey {
    Eta,
    Fc,
    Nb,
}

impl VaryKey {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Eta => "eta",
            Self::Fc => "fc",
            Self::Nb => "nb",
        }
    }

    /// Applies one value. `fc` is in GHz.
    pub fn apply(self, params: &mut SystemParams, value: f64) -> Result<(), ConfigError> {
        match self {
            Self::Eta => params.ts_ratio = value,
            Self::Fc => params.set_carrier_freq(value * 1e9),
            Self::Nb => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(ConfigError::Value { key: "nb".into(), message: format!("not a positive integer: {value}") });
                }
                params.set_n_bs(value as usize);
            }
        }
        params.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vary {
    pub key: VaryKey,
    pub values: Vec<f64>,
}

impl FromStr for Vary {
    type Err = String;
    /// `eta=0.3,0.5,0.8`, `fc=28,60` (GHz) or `nb=1,3,5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=v1,v2,..., got `{s}`"))?;
        let key = match k.trim() {
            "eta" => VaryKey::Eta,
            "fc" => VaryKey::Fc,
            "nb" => VaryKey::Nb,
            other => return Err(format!("cannot vary `{other}`; expected eta, fc or nb")),
        };
        let values = v
            .split(',')
            .map(|x| x.trim().parse::<f64>().map_err(|_| format!("`{x}` is not a number")))
            .collect::<Result<Vec<_>, _>>()?;
        if values.is_empty() {
            return Err("empty value list".into());
        }
        Ok(Self { key, values })
    }
}

/// Parses `start:stop:step` (inclusive) or a single value, in dB.
pub fn parse_beta_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    let num = |x: &str| x.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("`{x}` is not a number"));
    match parts.as_slice() {
        [one] => Ok(vec![num(one)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(format!("need start <= stop and step > 0, got {s}"));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        _ => Err(format!("expected start:stop:step, got `{s}`")),
    }
}

pub fn default_beta_grid() -> Vec<f64> {
    (1..=100).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub mode: SweepMode,
    pub attack: Attack,
    pub betas_db: Vec<f64>,
    pub vary: Option<Vary>,
    pub n_trials: usize,
    pub workers: usize,
    pub dry_run: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            mode: SweepMode::Analytic,
            attack: Attack::Independent,
            betas_db: default_beta_grid(),
            vary: None,
            n_trials: 1000,
            workers: 0,
            dry_run: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub csv: String,
    /// Distinct warnings, sorted.
    pub warnings: Vec<String>,
}

struct Cell {
    esp: f64,
    meta: String,
    warnings: Vec<&'static str>,
}

fn fmt_db(v: f64) -> String {
    linear_to_db(v).map_or_else(|_| "-inf".to_string(), |d| d.to_string())
}

fn analytic_cells(params: &SystemParams, attack: Attack, betas: &[f64]) -> Result<Vec<Cell>, Error> {
    let mode = params.interference_mode.as_str();
    betas
        .iter()
        .map(|&db| {
            let beta = db_to_linear(db);
            match attack {
                Attack::Independent => {
                    let r = esp_independent(&EspInputs::from_params(params, beta)?)?;
                    let mut warnings = Vec::new();
                    if r.clamped {
                        warnings.push("probability-clamped");
                    }
                    if r.interference < 0.0 {
                        warnings.push("interference-negative");
                    }
                    Ok(Cell {
                        esp: r.esp,
                        meta: format!("analytic;interference={mode};a={};b={}", r.los_radius, r.reflection_radius),
                        warnings,
                    })
                }
                Attack::Colluding => {
                    let r = esp_colluding_from_params(params, beta)?;
                    Ok(Cell {
                        esp: r.esp,
                        meta: format!("analytic;interference={mode};ratioDb={}", fmt_db(r.ratio)),
                        warnings: Vec::new(),
                    })
                }
            }
        })
        .collect()
}

fn mc_estimates(params: &SystemParams, spec: &SweepSpec) -> Result<Vec<EspEstimate>, Error> {
    let outcomes = simulate(params, spec.attack, spec.n_trials, spec.workers)?;
    Ok(esp_from_outcomes(&outcomes, &spec.betas_db))
}

fn gain_warnings(params: &SystemParams) -> Result<Vec<&'static str>, Error> {
    let (_, tx) = pattern_for(params, params.n_elements_tx)?;
    let (_, rx) = pattern_for(params, params.n_elements_rx)?;
    Ok(if tx || rx { vec!["gain-formula-clamped"] } else { Vec::new() })
}

/// Runs the sweep and renders CSV. Rows follow the vary-value order given,
/// then the threshold grid order.
pub fn run_sweep(spec: &SweepSpec, base: &SystemParams) -> Result<SweepOutput, Error> {
    if spec.betas_db.is_empty() {
        return Err(ConfigError::Invalid { field: "betaDb", reason: "threshold grid is empty".into() }.into());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let header: &[&str] = match spec.mode {
        SweepMode::Compare => &[
            "mode", "attack", "varyKey", "varyValue", "betaDb", "espAnalytic", "espMc", "absDiff", "ci95", "nTrials",
            "engineMeta", "warnings",
        ],
        _ => &["mode", "attack", "varyKey", "varyValue", "betaDb", "esp", "ci95", "nTrials", "engineMeta", "warnings"],
    };
    w.write_record(header)?;
    let mut all_warnings = BTreeSet::new();

    if !spec.dry_run {
        let points: Vec<(String, String, SystemParams)> = match &spec.vary {
            None => vec![("none".into(), String::new(), base.clone())],
            Some(v) => v
                .values
                .iter()
                .map(|&x| {
                    let mut p = base.clone();
                    v.key.apply(&mut p, x)?;
                    Ok((v.key.as_str().to_string(), x.to_string(), p))
                })
                .collect::<Result<_, ConfigError>>()?,
        };
        for (key, value, params) in &points {
            let common = gain_warnings(params)?;
            let needs_analytic = spec.mode != SweepMode::Simulate;
            let needs_mc = spec.mode != SweepMode::Analytic;
            let analytic = if needs_analytic { Some(analytic_cells(params, spec.attack, &spec.betas_db)?) } else { None };
            let mc = if needs_mc { Some(mc_estimates(params, spec)?) } else { None };
            let mc_meta = format!("mc;seed={};trialsPerWorld={}", params.rng_seed, params.trials_per_world);
            for (i, &beta_db) in spec.betas_db.iter().enumerate() {
                let cell = analytic.as_ref().map(|c| &c[i]);
                let est = mc.as_ref().map(|m| m[i]);
                let mut warnings: Vec<&str> = common.clone();
                if let Some(c) = cell {
                    warnings.extend(&c.warnings);
                }
                warnings.sort_unstable();
                warnings.dedup();
                for &wcode in &warnings {
                    all_warnings.insert(match &spec.vary {
                        Some(_) => format!("{wcode} ({key}={value})"),
                        None => wcode.to_string(),
                    });
                }
                let warn_col = warnings.join(";");
                let mut row = vec![
                    spec.mode.as_str().to_string(),
                    spec.attack.as_str().to_string(),
                    key.clone(),
                    value.clone(),
                    beta_db.to_string(),
                ];
                match (cell, est) {
                    (Some(c), Some(e)) => {
                        row.extend([
                            c.esp.to_string(),
                            e.esp.to_string(),
                            (c.esp - e.esp).abs().to_string(),
                            e.ci95.to_string(),
                            e.n_trials.to_string(),
                            format!("{}|{}", c.meta, mc_meta),
                        ]);
                    }
                    (Some(c), None) => {
                        row.extend(["0".to_string(), "0".to_string(), c.meta.clone()]);
                        row.insert(5, c.esp.to_string());
                    }
                    (None, Some(e)) => {
                        row.extend([e.esp.to_string(), e.ci95.to_string(), e.n_trials.to_string(), mc_meta.clone()]);
                    }
                    (None, None) => unreachable!("every mode runs at least one engine"),
                }
                row.push(warn_col);
                w.write_record(&row)?;
            }
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(SweepOutput {
        csv: String::from_utf8(bytes).expect("csv output is UTF-8"),
        warnings: all_warnings.into_iter().collect(),
    })
}
