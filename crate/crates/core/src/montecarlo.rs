//! Map-based Monte Carlo estimation of the ESP.
//!
//! Each trial owns a ChaCha stream derived from `(seed, trial index)` and
//! each world one derived from `(seed, world index)`, so results do not
//! depend on how trials are scheduled across workers. No draw depends on
//! the time-switching ratio or the threshold, which makes sweeps over
//! either use common random numbers.

use std::f64::consts::PI;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::antenna::{gain_at, pattern_for, sample_eve_gain, MisalignmentModel, SectorPattern};
use crate::config::SystemParams;
use crate::error::ModelError;
use crate::geometry::{
    find_first_order_reflections, los_blocked, poisson_count, sample_obstacles, Point2, Point3, WorldMap,
};
use crate::propagation::{eve_rx_components, path_loss, sinr, LinkBudget};
use crate::units::{db_to_linear, linear_to_db};

/// Which lobe of an interfering or target BS the eavesdropper falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsGainTowardEve {
    /// Main lobe with probability `theta / 2pi` (beam aimed at a random user).
    Bernoulli,
    AlwaysMain,
    AlwaysSide,
}

impl FromStr for BsGainTowardEve {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bernoulli" => Ok(Self::Bernoulli),
            "alwaysMain" => Ok(Self::AlwaysMain),
            "alwaysSide" => Ok(Self::AlwaysSide),
            _ => Err(format!("expected bernoulli|alwaysMain|alwaysSide, got `{s}`")),
        }
    }
}

impl BsGainTowardEve {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bernoulli => "bernoulli",
            Self::AlwaysMain => "alwaysMain",
            Self::AlwaysSide => "alwaysSide",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterfererPlacement {
    /// Exactly `N_b - 1` interferers, uniform in the hearing disk.
    Uniform,
    /// A PPP of density `lambda_b` in the hearing disk.
    Ppp,
}

impl FromStr for InterfererPlacement {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "ppp" => Ok(Self::Ppp),
            _ => Err(format!("expected uniform|ppp, got `{s}`")),
        }
    }
}

impl InterfererPlacement {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Uniform => "uniform",
            Self::Ppp => "ppp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Attack {
    Independent,
    Colluding,
}

impl FromStr for Attack {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent" => Ok(Self::Independent),
            "colluding" => Ok(Self::Colluding),
            _ => Err(format!("expected independent|colluding, got `{s}`")),
        }
    }
}

impl Attack {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Independent => "independent",
            Self::Colluding => "colluding",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkKind {
    Los,
    Reflection,
    None,
}

impl LinkKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Los => "los",
            Self::Reflection => "reflection",
            Self::None => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub sinr: f64,
    pub link_kind: LinkKind,
    /// Position of the (first) eavesdropper.
    pub eve_position: Point2,
    /// Interfering BSs with a live path to the eavesdropper(s).
    pub n_interferers: usize,
    pub n_eves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EspEstimate {
    pub beta_db: f64,
    pub esp: f64,
    pub n_trials: usize,
    pub ci95: f64,
}

/// Best propagation path from one BS to one receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathObservation {
    pub kind: LinkKind,
    /// Path-loss gain, reflection loss excluded.
    pub loss: f64,
    /// 1 for LOS, the reflection coefficient otherwise.
    pub rho: f64,
    /// Direction the energy arrives from, as seen by the receiver, rad.
    pub arrival_angle: f64,
}

/// Received powers of one eavesdropper in one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EveObservation {
    pub position: Point2,
    pub link_kind: LinkKind,
    pub signal: f64,
    pub self_interference: f64,
    pub external_interference: f64,
    pub n_interferers: usize,
}

/// Antenna patterns shared by every trial of a run.
#[derive(Debug, Clone, Copy)]
pub struct Antennas {
    pub bs: SectorPattern,
    pub eve: SectorPattern,
    pub misalignment: MisalignmentModel,
}

impl Antennas {
    pub fn from_params(params: &SystemParams) -> Result<Self, ModelError> {
        let (bs, _) = pattern_for(params, params.n_elements_tx)?;
        let (eve, _) = pattern_for(params, params.n_elements_rx)?;
        Ok(Self { bs, eve, misalignment: MisalignmentModel::from_params(params, &eve) })
    }
}

fn map_center(params: &SystemParams) -> Point2 {
    Point2::new(params.map_size.0 / 2.0, params.map_size.1 / 2.0)
}

fn uniform_in_disk<R: Rng + ?Sized>(center: Point2, radius: f64, rng: &mut R) -> Point2 {
    let r = radius * rng.random::<f64>().sqrt();
    let phi = rng.random::<f64>() * 2.0 * PI;
    center + Point2::new(r * phi.cos(), r * phi.sin())
}

/// Obstacles plus the target BS at the map center and its interferers in
/// the hearing disk. Worlds whose center lies inside a footprint are redrawn;
/// interferer sites inside the map extent and outside footprints are kept.
pub fn generate_world<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> WorldMap {
    let center = map_center(params);
    let mut world = loop {
        let w = sample_obstacles(params, rng);
        if !w.inside_any_footprint(center) {
            break w;
        }
    };
    world.bs_height = params.bs_height;
    world.bs_positions.push(center);
    let usable = |w: &WorldMap, p: Point2| w.in_extent(p) && !w.inside_any_footprint(p) && p != center;
    match params.interferer_placement {
        InterfererPlacement::Uniform => {
            for _ in 1..params.n_bs {
                let p = loop {
                    let p = uniform_in_disk(center, params.comm_radius, rng);
                    if usable(&world, p) {
                        break p;
                    }
                };
                world.bs_positions.push(p);
            }
        }
        InterfererPlacement::Ppp => {
            let mean = params.bs_density * PI * params.comm_radius * params.comm_radius;
            for _ in 0..poisson_count(mean, rng) {
                let p = uniform_in_disk(center, params.comm_radius, rng);
                if usable(&world, p) {
                    world.bs_positions.push(p);
                }
            }
        }
    }
    world
}

/// Uniform eavesdropper position in the map, inside the configured distance
/// annulus around the target BS and outside every footprint.
pub fn place_eve<R: Rng + ?Sized>(params: &SystemParams, world: &WorldMap, rng: &mut R) -> Point2 {
    let bs = world.bs_positions[0];
    let (lo, hi) = params.eve_distance_range;
    loop {
        let p = Point2::new(rng.random::<f64>() * world.extent.0, rng.random::<f64>() * world.extent.1);
        let d = p.dist(bs);
        if d >= lo && d <= hi && !world.inside_any_footprint(p) {
            return p;
        }
    }
}

fn angle_of(v: Point2) -> f64 {
    v.y.atan2(v.x)
}

/// LOS if unblocked, else the strongest unblocked first-order reflection.
pub fn best_path(params: &SystemParams, world: &WorldMap, bs: Point2, rx: Point3) -> Option<PathObservation> {
    let tx = bs.at_height(world.bs_height);
    let dz = tx.z - rx.z;
    if !los_blocked(tx, rx, world) {
        return Some(PathObservation {
            kind: LinkKind::Los,
            loss: path_loss(tx.dist(rx), params.alpha_los, params.carrier_freq, params.ref_distance),
            rho: 1.0,
            arrival_angle: angle_of(bs - rx.plan()),
        });
    }
    find_first_order_reflections(tx, rx, world)
        .into_iter()
        .map(|r| PathObservation {
            kind: LinkKind::Reflection,
            loss: path_loss(r.path_length.hypot(dz), params.alpha_nlos, params.carrier_freq, params.ref_distance),
            rho: params.reflection_coeff,
            arrival_angle: angle_of(r.reflection_point - rx.plan()),
        })
        .max_by(|a, b| a.loss.total_cmp(&b.loss))
}

fn bs_gain<R: Rng + ?Sized>(params: &SystemParams, pattern: &SectorPattern, rng: &mut R) -> f64 {
    match params.bs_gain_toward_eve {
        BsGainTowardEve::AlwaysMain => pattern.main_gain,
        BsGainTowardEve::AlwaysSide => pattern.side_gain,
        BsGainTowardEve::Bernoulli => {
            if rng.random::<f64>() < pattern.beamwidth / (2.0 * PI) {
                pattern.main_gain
            } else {
                pattern.side_gain
            }
        }
    }
}

/// Received powers at an eavesdropper at `pos`. The eavesdropper aims its
/// beam at the target BS's best path, off by a misalignment drawn from the
/// pointing-error law; interferers are weighted by the sector pattern at
/// their arrival angle.
pub fn observe_eve<R: Rng + ?Sized>(
    params: &SystemParams,
    world: &WorldMap,
    antennas: &Antennas,
    pos: Point2,
    rng: &mut R,
) -> EveObservation {
    let rx = pos.at_height(params.eve_height);
    let target = best_path(params, world, world.bs_positions[0], rx);
    let (eve_gain, err) = sample_eve_gain(&antennas.eve, &antennas.misalignment, rng);
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let uniform_dir = (rng.random::<f64>() * 2.0 - 1.0) * PI;
    let g_bs = bs_gain(params, &antennas.bs, rng);

    let (link_kind, signal, self_interference, boresight) = match target {
        Some(path) => {
            let (s, i) = eve_rx_components(params, g_bs * eve_gain, path.loss, path.rho);
            (path.kind, s, i, path.arrival_angle + sign * err)
        }
        None => (LinkKind::None, 0.0, 0.0, uniform_dir),
    };

    let mut external_interference = 0.0;
    let mut n_interferers = 0;
    for &bs in &world.bs_positions[1..] {
        let g = bs_gain(params, &antennas.bs, rng);
        if let Some(path) = best_path(params, world, bs, rx) {
            let g_eve = gain_at(&antennas.eve, path.arrival_angle - boresight);
            external_interference += params.tx_power * g * g_eve * path.loss * path.rho;
            n_interferers += 1;
        }
    }
    EveObservation { position: pos, link_kind, signal, self_interference, external_interference, n_interferers }
}

/// Maximal-ratio combination of all observations: total signal over total
/// interference plus one noise term. Zero when nothing is heard.
pub fn combine(observations: &[EveObservation], noise: f64) -> f64 {
    let signal: f64 = observations.iter().map(|o| o.signal).sum();
    if signal <= 0.0 {
        return 0.0;
    }
    let budget = LinkBudget {
        signal_power: signal,
        self_interference: observations.iter().map(|o| o.self_interference).sum(),
        external_interference: observations.iter().map(|o| o.external_interference).sum(),
        noise,
    };
    // A positive signal with eta in (0, 1) implies a positive denominator.
    sinr(&budget).unwrap_or(f64::INFINITY)
}

fn strongest_kind(observations: &[EveObservation]) -> LinkKind {
    if observations.iter().any(|o| o.link_kind == LinkKind::Los) {
        LinkKind::Los
    } else if observations.iter().any(|o| o.link_kind == LinkKind::Reflection) {
        LinkKind::Reflection
    } else {
        LinkKind::None
    }
}

/// Trial with `n_eves` colluding eavesdroppers; one eavesdropper is the
/// independent attack.
pub fn trial_with_eves<R: Rng + ?Sized>(
    params: &SystemParams,
    world: &WorldMap,
    antennas: &Antennas,
    n_eves: usize,
    rng: &mut R,
) -> TrialOutcome {
    let observations: Vec<EveObservation> = (0..n_eves)
        .map(|_| {
            let pos = place_eve(params, world, rng);
            observe_eve(params, world, antennas, pos, rng)
        })
        .collect();
    let link_kind = strongest_kind(&observations);
    TrialOutcome {
        sinr: if link_kind == LinkKind::None { 0.0 } else { combine(&observations, params.noise()) },
        link_kind,
        eve_position: observations.first().map_or(Point2::default(), |o| o.position),
        n_interferers: observations.iter().map(|o| o.n_interferers).max().unwrap_or(0),
        n_eves,
    }
}

pub fn run_independent_trial<R: Rng + ?Sized>(
    params: &SystemParams,
    world: &WorldMap,
    antennas: &Antennas,
    rng: &mut R,
) -> TrialOutcome {
    trial_with_eves(params, world, antennas, 1, rng)
}

/// Number of eavesdroppers in the map, conditioned on at least one.
pub fn sample_eve_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean > 30.0 {
        loop {
            let n = poisson_count(mean, rng);
            if n > 0 {
                return n;
            }
        }
    }
    if !(mean > 0.0) {
        return 1;
    }
    // Inverse CDF of the zero-truncated Poisson law.
    let u: f64 = rng.random();
    let norm = -(-mean).exp_m1();
    let mut pmf = (-mean).exp() * mean / norm;
    let mut cdf = pmf;
    let mut k = 1;
    while u >= cdf && k < 10_000 {
        k += 1;
        pmf *= mean / k as f64;
        cdf += pmf;
    }
    k
}

pub fn run_colluding_trial<R: Rng + ?Sized>(
    params: &SystemParams,
    world: &WorldMap,
    antennas: &Antennas,
    rng: &mut R,
) -> TrialOutcome {
    let n = sample_eve_count(params.eve_density * world.extent.0 * world.extent.1, rng);
    trial_with_eves(params, world, antennas, n, rng)
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Stream that builds world `index` of a run.
pub fn world_rng(seed: u64, index: usize) -> ChaCha8Rng {
    stream_rng(seed, 2 * index as u64 + 1)
}

/// Stream that drives trial `index` of a run.
pub fn trial_rng(seed: u64, index: usize) -> ChaCha8Rng {
    stream_rng(seed, 2 * index as u64)
}

fn world_batch(
    params: &SystemParams,
    antennas: &Antennas,
    attack: Attack,
    world_index: usize,
    n_trials: usize,
) -> Vec<TrialOutcome> {
    let per_world = params.trials_per_world.max(1);
    let first = world_index * per_world;
    let last = (first + per_world).min(n_trials);
    let world = generate_world(params, &mut world_rng(params.rng_seed, world_index));
    (first..last)
        .map(|t| {
            let mut rng = trial_rng(params.rng_seed, t);
            match attack {
                Attack::Independent => run_independent_trial(params, &world, antennas, &mut rng),
                Attack::Colluding => run_colluding_trial(params, &world, antennas, &mut rng),
            }
        })
        .collect()
}

/// Runs `n_trials` trials, ordered by trial index. `workers` = 0 uses every
/// core; 1 runs on the calling thread. The result does not depend on it.
pub fn simulate(params: &SystemParams, attack: Attack, n_trials: usize, workers: usize) -> Result<Vec<TrialOutcome>, ModelError> {
    let antennas = Antennas::from_params(params)?;
    let n_worlds = n_trials.div_ceil(params.trials_per_world.max(1));
    let run = |w: usize| world_batch(params, &antennas, attack, w, n_trials);
    Ok(run_batches(n_worlds, workers, run))
}

#[cfg(feature = "parallel")]
fn run_batches<F>(n: usize, workers: usize, run: F) -> Vec<TrialOutcome>
where
    F: Fn(usize) -> Vec<TrialOutcome> + Sync + Send,
{
    use rayon::prelude::*;
    if workers == 1 || n <= 1 {
        return (0..n).flat_map(run).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build();
    match pool {
        Ok(pool) => pool.install(|| (0..n).into_par_iter().flat_map_iter(&run).collect()),
        Err(_) => (0..n).flat_map(run).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn run_batches<F>(n: usize, _workers: usize, run: F) -> Vec<TrialOutcome>
where
    F: Fn(usize) -> Vec<TrialOutcome>,
{
    (0..n).flat_map(run).collect()
}

/// Empirical survival function of the SINR sample at each threshold.
pub fn esp_from_outcomes(outcomes: &[TrialOutcome], betas_db: &[f64]) -> Vec<EspEstimate> {
    let n = outcomes.len();
    betas_db
        .iter()
        .map(|&beta_db| {
            let beta = db_to_linear(beta_db);
            let hits = outcomes.iter().filter(|o| o.sinr > beta).count();
            let esp = if n == 0 { 0.0 } else { hits as f64 / n as f64 };
            let ci95 = if n == 0 { 0.0 } else { 1.96 * (esp * (1.0 - esp) / n as f64).sqrt() };
            EspEstimate { beta_db, esp, n_trials: n, ci95 }
        })
        .collect()
}

pub fn estimate_esp(
    params: &SystemParams,
    betas_db: &[f64],
    n_trials: usize,
    attack: Attack,
    workers: usize,
) -> Result<Vec<EspEstimate>, ModelError> {
    let outcomes = simulate(params, attack, n_trials, workers)?;
    Ok(esp_from_outcomes(&outcomes, betas_db))
}

/// Per-trial CSV: `trial,eveX,eveY,linkKind,sinrDb,nInterferers`.
pub fn write_trial_dump<W: Write>(outcomes: &[TrialOutcome], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "eveX", "eveY", "linkKind", "sinrDb", "nInterferers"])?;
    for (i, o) in outcomes.iter().enumerate() {
        let sinr_db = linear_to_db(o.sinr).map_or_else(|_| "-inf".to_string(), |v| v.to_string());
        w.write_record([
            i.to_string(),
            o.eve_position.x.to_string(),
            o.eve_position.y.to_string(),
            o.link_kind.as_str().to_string(),
            sinr_db,
            o.n_interferers.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
