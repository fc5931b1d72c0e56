//! Plan-view geometry with heights: PPP sampling, rectangular prism
//! obstacles, line-of-sight tests and first-order specular reflections
//! found with the image method.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::config::SystemParams;
use crate::SPEED_OF_LIGHT;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    pub fn at_height(self, z: f64) -> Point3 {
        Point3 { x: self.x, y: self.y, z }
    }
}

impl Add for Point2 {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Self;
    fn mul(self, k: f64) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

/// A plan-view position with an antenna height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn plan(self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn dist(self, o: Self) -> f64 {
        ((self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.z - o.z).powi(2)).sqrt()
    }
}

/// Law of obstacle lengths and widths around their configured means.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SizeDistribution {
    /// Every obstacle has exactly the mean length and width.
    PointMass,
    /// Uniform on `[0.5, 1.5]` times the mean.
    Uniform,
}

impl FromStr for SizeDistribution {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "point" | "pointMass" => Ok(Self::PointMass),
            "uniform" => Ok(Self::Uniform),
            _ => Err(format!("expected pointMass|uniform, got `{s}`")),
        }
    }
}

impl SizeDistribution {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::PointMass => "pointMass",
            Self::Uniform => "uniform",
        }
    }

    fn sample<R: Rng + ?Sized>(self, mean: f64, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        match self {
            Self::PointMass => mean,
            Self::Uniform => mean * (0.5 + u),
        }
    }
}

/// Obstacle height law `f_H` on `[min, max]`.
pub trait HeightDistribution {
    fn cdf(&self, h: f64) -> f64;
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformHeights {
    pub min: f64,
    pub max: f64,
}

impl HeightDistribution for UniformHeights {
    fn cdf(&self, h: f64) -> f64 {
        if h < self.min {
            0.0
        } else if h >= self.max {
            1.0
        } else {
            (h - self.min) / (self.max - self.min)
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        self.min + u * (self.max - self.min)
    }
}

/// A rectangular prism standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectObstacle {
    pub center: Point2,
    pub length: f64,
    pub width: f64,
    /// Anticlockwise angle between the x-axis and the length side, in `[0, pi)`.
    pub orientation: f64,
    pub height: f64,
    pub is_reflector: bool,
}

/// One side of a rectangle, seen from outside.
#[derive(Debug, Clone, Copy)]
pub struct Face {
    pub center: Point2,
    pub normal: Point2,
    pub tangent: Point2,
    pub half_len: f64,
}

impl RectObstacle {
    pub fn new(center: Point2, length: f64, width: f64, orientation: f64, height: f64, is_reflector: bool) -> Self {
        Self {
            center,
            length,
            width,
            orientation: orientation.rem_euclid(PI),
            height,
            is_reflector,
        }
    }

    fn axes(&self) -> (Point2, Point2) {
        let (s, c) = self.orientation.sin_cos();
        (Point2::new(c, s), Point2::new(-s, c))
    }

    fn local(&self, p: Point2) -> Point2 {
        let (u, v) = self.axes();
        let d = p - self.center;
        Point2::new(d.dot(u), d.dot(v))
    }

    /// True when `p` lies inside or on the footprint.
    pub fn contains(&self, p: Point2) -> bool {
        let q = self.local(p);
        q.x.abs() <= 0.5 * self.length && q.y.abs() <= 0.5 * self.width
    }

    pub fn corners(&self) -> [Point2; 4] {
        let (u, v) = self.axes();
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        [
            self.center + u * hl + v * hw,
            self.center - u * hl + v * hw,
            self.center - u * hl - v * hw,
            self.center + u * hl - v * hw,
        ]
    }

    pub fn faces(&self) -> [Face; 4] {
        let (u, v) = self.axes();
        let (hl, hw) = (0.5 * self.length, 0.5 * self.width);
        let face = |n: Point2, t: Point2, offset: f64, half_len: f64| Face {
            center: self.center + n * offset,
            normal: n,
            tangent: t,
            half_len,
        };
        [
            face(u, v, hl, hw),
            face(u * -1.0, v, hl, hw),
            face(v, u, hw, hl),
            face(v * -1.0, u, hw, hl),
        ]
    }

    /// Parameter interval `[t0, t1]` of the plan-view segment `a -> b`
    /// that lies over the footprint, if any.
    pub fn clip_segment(&self, a: Point2, b: Point2) -> Option<(f64, f64)> {
        let p = self.local(a);
        let q = self.local(b);
        let d = q - p;
        let mut t0 = 0.0f64;
        let mut t1 = 1.0f64;
        for (start, delta, half) in [(p.x, d.x, 0.5 * self.length), (p.y, d.y, 0.5 * self.width)] {
            if delta.abs() < 1e-15 {
                if start.abs() > half {
                    return None;
                }
                continue;
            }
            let ta = (-half - start) / delta;
            let tb = (half - start) / delta;
            let (lo, hi) = if ta < tb { (ta, tb) } else { (tb, ta) };
            t0 = t0.max(lo);
            t1 = t1.min(hi);
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }

    /// Whether this prism cuts the straight 3-D segment `a -> b`.
    pub fn blocks(&self, a: Point3, b: Point3) -> bool {
        match self.clip_segment(a.plan(), b.plan()) {
            Some((t0, t1)) => {
                let h = |t: f64| a.z + t * (b.z - a.z);
                self.height > h(t0).min(h(t1))
            }
            None => false,
        }
    }
}

/// A sampled environment.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldMap {
    pub extent: (f64, f64),
    pub obstacles: Vec<RectObstacle>,
    /// BS sites; index 0 is the target BS when built by the simulator.
    pub bs_positions: Vec<Point2>,
    pub bs_height: f64,
    pub granularity: f64,
}

impl WorldMap {
    pub fn empty(extent: (f64, f64), granularity: f64) -> Self {
        Self {
            extent,
            obstacles: Vec::new(),
            bs_positions: Vec::new(),
            bs_height: 0.0,
            granularity,
        }
    }

    pub fn inside_any_footprint(&self, p: Point2) -> bool {
        self.obstacles.iter().any(|o| o.contains(p))
    }

    pub fn in_extent(&self, p: Point2) -> bool {
        (0.0..=self.extent.0).contains(&p.x) && (0.0..=self.extent.1).contains(&p.y)
    }
}

/// A first-order specular path from a transmitter to a receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectionPath {
    pub reflector: usize,
    pub reflection_point: Point2,
    /// Plan-view length of the two legs.
    pub path_length: f64,
    /// `path_length / c`.
    pub delay: f64,
    pub direct_distance: f64,
    /// Angle between the incoming leg and the face normal.
    pub incidence_angle: f64,
    /// Angle between the outgoing leg and the face normal.
    pub departure_angle: f64,
}

/// Points of a homogeneous PPP of `density` per m^2 on `[0,w] x [0,h]`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, extent: (f64, f64), rng: &mut R) -> Vec<Point2> {
    let n = poisson_count(density * extent.0 * extent.1, rng);
    (0..n)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            Point2::new(x * extent.0, y * extent.1)
        })
        .collect()
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if !(mean > 0.0) {
        return 0;
    }
    // Poisson::new only fails on non-positive or non-finite means.
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

/// Draws the obstacle population for one map. BS sites are left empty.
pub fn sample_obstacles<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> WorldMap {
    let extent = params.map_size;
    let centers = sample_ppp(params.obstacle_density, extent, rng);
    let heights = UniformHeights {
        min: params.obstacle_height_range.0,
        max: params.obstacle_height_range.1,
    };
    let obstacles = centers
        .into_iter()
        .map(|center| {
            let length = params.obstacle_size_dist.sample(params.obstacle_length_mean, rng);
            let width = params.obstacle_size_dist.sample(params.obstacle_width_mean, rng);
            let orientation = rng.random::<f64>() * PI;
            let height = heights.sample(rng);
            let is_reflector = rng.random::<f64>() < params.reflector_fraction;
            RectObstacle::new(center, length, width, orientation, height, is_reflector)
        })
        .collect();
    WorldMap {
        obstacles,
        ..WorldMap::empty(extent, params.map_granularity)
    }
}

/// Distance from the center of a disk of `radius` to a uniform point in it.
pub fn sample_disk_distance<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> f64 {
    // random() is in [0, 1); 1 - u is in (0, 1].
    let u: f64 = 1.0 - rng.random::<f64>();
    radius * u.sqrt()
}

pub fn disk_distance_pdf(x: f64, radius: f64) -> f64 {
    if (0.0..=radius).contains(&x) {
        2.0 * x / (radius * radius)
    } else {
        0.0
    }
}

pub fn disk_distance_cdf(x: f64, radius: f64) -> f64 {
    (x / radius).clamp(0.0, 1.0).powi(2)
}

/// True when some obstacle cuts the straight path `tx -> rx`.
pub fn los_blocked(tx: Point3, rx: Point3, map: &WorldMap) -> bool {
    los_blocked_except(tx, rx, map, None)
}

/// As [`los_blocked`], ignoring obstacle `skip`.
pub fn los_blocked_except(tx: Point3, rx: Point3, map: &WorldMap, skip: Option<usize>) -> bool {
    map.obstacles
        .iter()
        .enumerate()
        .any(|(i, o)| Some(i) != skip && o.blocks(tx, rx))
}

/// All unblocked first-order specular paths from `tx` to `rx`.
pub fn find_first_order_reflections(tx: Point3, rx: Point3, map: &WorldMap) -> Vec<ReflectionPath> {
    let (a, b) = (tx.plan(), rx.plan());
    let direct = a.dist(b);
    let mut paths = Vec::new();
    for (idx, obstacle) in map.obstacles.iter().enumerate() {
        if !obstacle.is_reflector {
            continue;
        }
        for face in obstacle.faces() {
            let Some(path) = reflect_off_face(a, b, &face, direct) else {
                continue;
            };
            // Unfolded ray height where it meets the wall.
            let frac = a.dist(path.reflection_point) / path.path_length;
            let z = tx.z + frac * (rx.z - tx.z);
            if z > obstacle.height {
                continue;
            }
            let bounce = path.reflection_point.at_height(z);
            if los_blocked_except(tx, bounce, map, Some(idx)) || los_blocked_except(bounce, rx, map, Some(idx)) {
                continue;
            }
            paths.push(ReflectionPath { reflector: idx, ..path });
        }
    }
    paths
}

fn reflect_off_face(a: Point2, b: Point2, face: &Face, direct: f64) -> Option<ReflectionPath> {
    let sa = (a - face.center).dot(face.normal);
    let sb = (b - face.center).dot(face.normal);
    if sa <= 0.0 || sb <= 0.0 {
        return None;
    }
    let image = a - face.normal * (2.0 * sa);
    let lambda = sa / (sa + sb);
    let hit = image + (b - image) * lambda;
    let along = (hit - face.center).dot(face.tangent);
    if along.abs() > face.half_len {
        return None;
    }
    let path_length = image.dist(b);
    let angle_to_normal = |p: Point2| {
        let d = p - hit;
        d.dot(face.tangent).abs().atan2(d.dot(face.normal))
    };
    Some(ReflectionPath {
        reflector: usize::MAX,
        reflection_point: hit,
        path_length,
        delay: path_length / SPEED_OF_LIGHT,
        direct_distance: direct,
        incidence_angle: angle_to_normal(a),
        departure_angle: angle_to_normal(b),
    })
}

/// Per-cell link classification of a map as seen from one transmitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coverage {
    Los = 0,
    Reflection = 1,
    Dark = 2,
    Inside = 3,
}

/// Classifies every `granularity`-sized cell center of the map for a
/// receiver at `rx_height`. Row-major, `y` outer.
pub fn coverage_grid(map: &WorldMap, tx: Point3, rx_height: f64) -> (usize, usize, Vec<Coverage>) {
    let g = map.granularity;
    let nx = (map.extent.0 / g).ceil() as usize;
    let ny = (map.extent.1 / g).ceil() as usize;
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let p = Point2::new((i as f64 + 0.5) * g, (j as f64 + 0.5) * g);
            let rx = p.at_height(rx_height);
            let c = if map.inside_any_footprint(p) {
                Coverage::Inside
            } else if !los_blocked(tx, rx, map) {
                Coverage::Los
            } else if !find_first_order_reflections(tx, rx, map).is_empty() {
                Coverage::Reflection
            } else {
                Coverage::Dark
            };
            cells.push(c);
        }
    }
    (nx, ny, cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn p3(x: f64, y: f64, z: f64) -> Point3 {
        Point3 { x, y, z }
    }

    fn map_with(obstacles: Vec<RectObstacle>) -> WorldMap {
        WorldMap {
            obstacles,
            ..WorldMap::empty((200.0, 160.0), 1.0)
        }
    }

    #[test]
    fn orientation_is_normalized() {
        let o = RectObstacle::new(Point2::new(0.0, 0.0), 2.0, 1.0, -PI / 4.0, 1.0, true);
        assert!((o.orientation - 3.0 * PI / 4.0).abs() < 1e-12);
        let o = RectObstacle::new(Point2::new(0.0, 0.0), 2.0, 1.0, PI, 1.0, true);
        assert_eq!(o.orientation, 0.0);
    }

    #[test]
    fn ppp_zero_density_is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(sample_ppp(0.0, (200.0, 160.0), &mut rng).is_empty());
        assert!(sample_ppp(1e-12, (200.0, 160.0), &mut rng).is_empty());
    }

    #[test]
    fn ppp_is_reproducible() {
        let a = sample_ppp(1e-3, (200.0, 160.0), &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_ppp(1e-3, (200.0, 160.0), &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        assert!(a.iter().all(|p| (0.0..=200.0).contains(&p.x) && (0.0..=160.0).contains(&p.y)));
    }

    #[test]
    fn ppp_mean_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 4000;
        let total: usize = (0..n).map(|_| sample_ppp(1e-3, (200.0, 160.0), &mut rng).len()).sum();
        let mean = total as f64 / n as f64;
        // sd of the mean = sqrt(32 / 4000) ~ 0.09
        assert!((mean - 32.0).abs() < 0.4, "{mean}");
    }

    #[test]
    fn obstacles_reproducible_and_mean_length() {
        let mut params = SystemParams::default();
        params.obstacle_size_dist = SizeDistribution::Uniform;
        params.obstacle_density = 2e-3;
        let a = sample_obstacles(&params, &mut ChaCha8Rng::seed_from_u64(42));
        let b = sample_obstacles(&params, &mut ChaCha8Rng::seed_from_u64(42));
        assert_eq!(a, b);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut lengths = Vec::new();
        while lengths.len() < 10_000 {
            lengths.extend(sample_obstacles(&params, &mut rng).obstacles.iter().map(|o| o.length));
        }
        let mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        // uniform on [7.5, 22.5]: sd 4.33, sd of mean over 1e4 ~ 0.043
        assert!((mean - 15.0).abs() < 0.2, "{mean}");
        for o in &a.obstacles {
            assert!(o.length > 0.0 && o.width > 0.0 && o.height >= 0.0);
            assert!((0.0..PI).contains(&o.orientation));
        }
    }

    #[test]
    fn point_mass_sizes_by_default() {
        let mut params = SystemParams::default();
        params.obstacle_density = 1e-3;
        let map = sample_obstacles(&params, &mut ChaCha8Rng::seed_from_u64(1));
        assert!(!map.obstacles.is_empty());
        assert!(map.obstacles.iter().all(|o| o.length == 15.0 && o.width == 10.0));
    }

    #[test]
    fn disk_distance_density_and_cdf() {
        assert!((disk_distance_pdf(50.0, 100.0) - 0.01).abs() < 1e-15);
        assert_eq!(disk_distance_cdf(100.0, 100.0), 1.0);
        assert_eq!(disk_distance_cdf(0.0, 100.0), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut xs: Vec<f64> = (0..20_001).map(|_| sample_disk_distance(100.0, &mut rng)).collect();
        xs.sort_by(f64::total_cmp);
        let median = xs[xs.len() / 2];
        assert!((median - 100.0 / 2f64.sqrt()).abs() < 0.6, "{median}");
        assert!(xs.iter().all(|&x| x > 0.0 && x <= 100.0));
    }

    #[test]
    fn empty_map_never_blocks() {
        let map = map_with(vec![]);
        assert!(!los_blocked(p3(0.0, 0.0, 35.0), p3(100.0, 0.0, 1.5), &map));
    }

    #[test]
    fn tall_obstacle_at_midpoint_blocks() {
        let o = RectObstacle::new(Point2::new(50.0, 0.0), 10.0, 10.0, 0.3, 50.0, true);
        let map = map_with(vec![o]);
        assert!(los_blocked(p3(0.0, 0.0, 35.0), p3(100.0, 0.0, 1.5), &map));
    }

    #[test]
    fn short_obstacle_near_tall_end_does_not_block() {
        // Path height near x=10 is ~31.7 m.
        let o = RectObstacle::new(Point2::new(10.0, 0.0), 4.0, 4.0, 0.0, 25.0, true);
        let map = map_with(vec![o]);
        assert!(!los_blocked(p3(0.0, 0.0, 35.0), p3(100.0, 0.0, 1.5), &map));
        // ... but the same building near the low end does.
        let o = RectObstacle::new(Point2::new(90.0, 0.0), 4.0, 4.0, 0.0, 25.0, true);
        assert!(los_blocked(p3(0.0, 0.0, 35.0), p3(100.0, 0.0, 1.5), &map_with(vec![o])));
    }

    #[test]
    fn obstacle_off_the_path_does_not_block() {
        let o = RectObstacle::new(Point2::new(50.0, 20.0), 10.0, 10.0, 0.0, 50.0, true);
        assert!(!los_blocked(p3(0.0, 0.0, 35.0), p3(100.0, 0.0, 1.5), &map_with(vec![o])));
    }

    #[test]
    fn no_reflectors_no_paths() {
        let mut o = RectObstacle::new(Point2::new(50.0, 20.0), 40.0, 2.0, 0.0, 50.0, false);
        let tx = p3(20.0, 0.0, 10.0);
        let rx = p3(80.0, 0.0, 10.0);
        assert!(find_first_order_reflections(tx, rx, &map_with(vec![o])).is_empty());
        o.is_reflector = true;
        assert_eq!(find_first_order_reflections(tx, rx, &map_with(vec![o])).len(), 1);
    }

    #[test]
    fn long_parallel_wall_gives_one_specular_path() {
        let wall = RectObstacle::new(Point2::new(100.0, 30.0), 1000.0, 1.0, 0.0, 60.0, true);
        let tx = p3(60.0, 0.0, 35.0);
        let rx = p3(140.0, 10.0, 1.5);
        let paths = find_first_order_reflections(tx, rx, &map_with(vec![wall]));
        assert_eq!(paths.len(), 1);
        let p = paths[0];
        assert!((p.incidence_angle - p.departure_angle).abs() < 1e-9);
        assert!((p.reflection_point.y - 29.5).abs() < 1e-9);
        // mirror of tx across y = 29.5 is (60, 59)
        let expect = Point2::new(60.0, 59.0).dist(rx.plan());
        assert!((p.path_length - expect).abs() < 1e-9);
        assert!((p.delay * SPEED_OF_LIGHT - p.path_length).abs() < 1e-6);
    }

    #[test]
    fn low_wall_is_overshot() {
        let wall = RectObstacle::new(Point2::new(100.0, 30.0), 1000.0, 1.0, 0.0, 5.0, true);
        let tx = p3(60.0, 0.0, 35.0);
        let rx = p3(140.0, 10.0, 1.5);
        assert!(find_first_order_reflections(tx, rx, &map_with(vec![wall])).is_empty());
    }

    #[test]
    fn blocked_leg_discards_path() {
        let wall = RectObstacle::new(Point2::new(100.0, 30.0), 1000.0, 1.0, 0.0, 60.0, true);
        let blocker = RectObstacle::new(Point2::new(75.0, 15.0), 6.0, 6.0, 0.0, 60.0, false);
        let tx = p3(60.0, 0.0, 35.0);
        let rx = p3(140.0, 0.0, 1.5);
        let open = find_first_order_reflections(tx, rx, &map_with(vec![wall]));
        assert_eq!(open.len(), 1);
        let shut = find_first_order_reflections(tx, rx, &map_with(vec![wall, blocker]));
        assert!(shut.is_empty());
    }

    #[test]
    fn coverage_grid_shape_and_inside_cells() {
        let o = RectObstacle::new(Point2::new(10.0, 10.0), 4.0, 4.0, 0.0, 20.0, true);
        let mut map = map_with(vec![o]);
        map.extent = (20.0, 16.0);
        let (nx, ny, cells) = coverage_grid(&map, p3(2.0, 2.0, 35.0), 1.5);
        assert_eq!((nx, ny), (20, 16));
        assert_eq!(cells.len(), 320);
        assert_eq!(cells[10 * nx + 10], Coverage::Inside);
        assert_eq!(cells[3 * nx + 3], Coverage::Los);
    }

    fn arb_obstacle() -> impl Strategy<Value = RectObstacle> {
        (0.0f64..200.0, 0.0f64..160.0, 1.0f64..40.0, 1.0f64..20.0, 0.0f64..PI, 0.5f64..60.0)
            .prop_map(|(x, y, l, w, t, h)| RectObstacle::new(Point2::new(x, y), l, w, t, h, true))
    }

    fn arb_station(z: std::ops::Range<f64>) -> impl Strategy<Value = Point3> {
        (0.0f64..200.0, 0.0f64..160.0, z).prop_map(|(x, y, z)| Point3 { x, y, z })
    }

    proptest! {
        #[test]
        fn adding_obstacles_never_unblocks(
            obstacles in prop::collection::vec(arb_obstacle(), 0..8),
            extra in arb_obstacle(),
            tx in arb_station(1.0..40.0),
            rx in arb_station(1.0..40.0),
        ) {
            let mut map = map_with(obstacles);
            let before = los_blocked(tx, rx, &map);
            map.obstacles.push(extra);
            let after = los_blocked(tx, rx, &map);
            prop_assert!(!before || after);
        }

        #[test]
        fn reflections_obey_specular_law_and_triangle_inequality(
            obstacles in prop::collection::vec(arb_obstacle(), 1..8),
            tx in arb_station(10.0..40.0),
            rx in arb_station(1.0..3.0),
        ) {
            let map = map_with(obstacles);
            prop_assume!(!map.inside_any_footprint(tx.plan()) && !map.inside_any_footprint(rx.plan()));
            for p in find_first_order_reflections(tx, rx, &map) {
                prop_assert!((p.incidence_angle - p.departure_angle).abs() < 1e-9);
                let legs = tx.plan().dist(p.reflection_point) + p.reflection_point.dist(rx.plan());
                prop_assert!((legs - p.path_length).abs() < 1e-9 * legs.max(1.0));
                prop_assert!(p.path_length >= p.direct_distance - 1e-9);
                let face_hit = map.obstacles[p.reflector].faces().iter().any(|f| {
                    let d = p.reflection_point - f.center;
                    d.dot(f.normal).abs() < 1e-7 && d.dot(f.tangent).abs() <= f.half_len + 1e-7
                });
                prop_assert!(face_hit);
            }
        }
    }
}
