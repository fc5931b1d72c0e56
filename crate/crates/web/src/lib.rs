//! Browser bindings for the demo page in `www/`: analytic ESP curves, a
//! LOS/reflection coverage raster of one random map, and a small Monte
//! Carlo estimate. Configuration is passed as `key=value` text.

use wasm_bindgen::prelude::*;

use secsim_core::analytic::{esp_independent, EspInputs};
use secsim_core::config::load_params;
use secsim_core::geometry::coverage_grid;
use secsim_core::montecarlo::{estimate_esp, generate_world, world_rng, Attack};
use secsim_core::sweep::parse_beta_grid;
use secsim_core::units::db_to_linear;
use secsim_core::SystemParams;

fn params(config: &str) -> Result<SystemParams, String> {
    load_params(config).map_err(|e| e.to_string())
}

fn grid(beta_db: &str) -> Result<Vec<f64>, String> {
    parse_beta_grid(beta_db)
}

/// Closed-form independent ESP, one curve per `eta`, concatenated.
pub fn analytic_curves(config: &str, etas: &[f64], beta_db: &str) -> Result<Vec<f64>, String> {
    let base = params(config)?;
    let betas = grid(beta_db)?;
    let mut out = Vec::with_capacity(etas.len() * betas.len());
    for &eta in etas {
        let mut p = base.clone();
        p.ts_ratio = eta;
        p.validate().map_err(|e| e.to_string())?;
        for &db in &betas {
            let inputs = EspInputs::from_params(&p, db_to_linear(db)).map_err(|e| e.to_string())?;
            out.push(esp_independent(&inputs).map_err(|e| e.to_string())?.esp);
        }
    }
    Ok(out)
}

/// Monte Carlo ESP at each threshold, single-threaded.
pub fn monte_carlo_curve(config: &str, beta_db: &str, trials: usize, colluding: bool) -> Result<Vec<f64>, String> {
    let p = params(config)?;
    let attack = if colluding { Attack::Colluding } else { Attack::Independent };
    let est = estimate_esp(&p, &grid(beta_db)?, trials.max(1), attack, 1).map_err(|e| e.to_string())?;
    Ok(est.into_iter().map(|e| e.esp).collect())
}

/// Coverage raster of world 0 for `seed`, seen from the target BS.
#[wasm_bindgen]
pub struct CoverageMap {
    width: usize,
    height: usize,
    cells: Vec<u8>,
    obstacles: Vec<f64>,
    base_stations: Vec<f64>,
}

#[wasm_bindgen]
impl CoverageMap {
    #[wasm_bindgen(getter)]
    pub fn width(&self) -> usize {
        self.width
    }

    #[wasm_bindgen(getter)]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major, `y` outer: 0 LOS, 1 reflection only, 2 dark, 3 inside a building.
    #[wasm_bindgen(getter)]
    pub fn cells(&self) -> Vec<u8> {
        self.cells.clone()
    }

    /// Eight corner coordinates per obstacle.
    #[wasm_bindgen(getter)]
    pub fn obstacles(&self) -> Vec<f64> {
        self.obstacles.clone()
    }

    /// `x, y` per BS; the first is the target.
    #[wasm_bindgen(getter = baseStations)]
    pub fn base_stations(&self) -> Vec<f64> {
        self.base_stations.clone()
    }
}

pub fn coverage(config: &str, seed: u64) -> Result<CoverageMap, String> {
    let mut p = params(config)?;
    p.rng_seed = seed;
    let world = generate_world(&p, &mut world_rng(seed, 0));
    let tx = world.bs_positions[0].at_height(p.bs_height);
    let (width, height, cells) = coverage_grid(&world, tx, p.eve_height);
    Ok(CoverageMap {
        width,
        height,
        cells: cells.into_iter().map(|c| c as u8).collect(),
        obstacles: world.obstacles.iter().flat_map(|o| o.corners()).flat_map(|c| [c.x, c.y]).collect(),
        base_stations: world.bs_positions.iter().flat_map(|b| [b.x, b.y]).collect(),
    })
}

#[wasm_bindgen(js_name = analyticCurves)]
pub fn analytic_curves_js(config: &str, etas: Vec<f64>, beta_db: &str) -> Result<Vec<f64>, JsError> {
    analytic_curves(config, &etas, beta_db).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = monteCarloCurve)]
pub fn monte_carlo_curve_js(config: &str, beta_db: &str, trials: usize, colluding: bool) -> Result<Vec<f64>, JsError> {
    monte_carlo_curve(config, beta_db, trials, colluding).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = coverageMap)]
pub fn coverage_js(config: &str, seed: u64) -> Result<CoverageMap, JsError> {
    coverage(config, seed).map_err(|e| JsError::new(&e))
}
