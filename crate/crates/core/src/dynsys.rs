//! The test system `X = ([0,1]^D)^Z x S^1` with the map
//! `T((x_n), c) = ((x_{n+1}), c + theta)`.
//!
//! Circle points are stored as integer ticks modulo [`CIRCLE_TICKS`], and the
//! rotation angle as a rational `p / CIRCLE_TICKS`, so every rotation is exact
//! integer arithmetic. The only approximation is `theta` itself; its error per
//! step is recorded in [`System::theta_error_per_step`].

use std::sync::Arc;

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hash;
use crate::{Error, Result};

/// Number of ticks in one turn of the circle.
pub const CIRCLE_TICKS: u64 = 1_000_000_000_000;

/// Golden rotation truncated to twelve decimals.
pub const DEFAULT_THETA: f64 = 0.618_033_988_749;

pub const SYSTEM_SCHEMA: &str = "dynsys/v1";

/// Smallest admissible reduced denominator of the stored rotation.
const MIN_DENOMINATOR: u64 = 1_000_000;

/// Coordinates whose metric weight falls below this are dropped from sums.
const WEIGHT_FLOOR: f64 = 1e-17;

fn default_decay() -> f64 {
    0.5
}

fn default_schema() -> String {
    SYSTEM_SCHEMA.to_string()
}

/// Serialized description of the test system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    #[serde(default = "default_schema")]
    pub schema: String,
    #[serde(rename = "D")]
    pub dim: usize,
    pub theta: f64,
    pub window_radius: i64,
    #[serde(default = "default_decay")]
    pub decay: f64,
}

impl SystemSpec {
    pub fn new(dim: usize, theta: f64, window_radius: i64, decay: f64) -> Self {
        Self {
            schema: default_schema(),
            dim,
            theta,
            window_radius,
            decay,
        }
    }
}

impl Default for SystemSpec {
    fn default() -> Self {
        Self::new(1, DEFAULT_THETA, 1_000_000_000, default_decay())
    }
}

/// How cube coordinates outside the represented window are defined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseExtension {
    #[default]
    ConstantZero,
    Periodic,
}

/// A validated system: spec plus the exact rotation step in ticks.
#[derive(Clone, Debug, PartialEq)]
pub struct System {
    spec: SystemSpec,
    theta_ticks: u64,
    truncation_radius: i64,
}

impl System {
    pub fn new(spec: SystemSpec) -> Result<Arc<Self>> {
        if spec.schema != SYSTEM_SCHEMA {
            return Err(Error::Config(format!(
                "unsupported system schema `{}`",
                spec.schema
            )));
        }
        if spec.window_radius < 1 {
            return Err(Error::Config("window_radius must be positive".into()));
        }
        if !(spec.decay > 0.0 && spec.decay < 1.0) {
            return Err(Error::Config(format!(
                "decay must lie in (0,1), got {}",
                spec.decay
            )));
        }
        if !(spec.theta > 0.0 && spec.theta < 1.0) {
            return Err(Error::Config(format!(
                "theta must be irrational in (0,1), got {}",
                spec.theta
            )));
        }
        let theta_ticks = (spec.theta * CIRCLE_TICKS as f64).round() as u64;
        if theta_ticks == 0 || theta_ticks >= CIRCLE_TICKS {
            return Err(Error::Config("theta rounds to a trivial rotation".into()));
        }
        let denominator = CIRCLE_TICKS / theta_ticks.gcd(&CIRCLE_TICKS);
        if denominator < MIN_DENOMINATOR {
            return Err(Error::Config(format!(
                "theta must be irrational: {} has denominator {denominator}",
                spec.theta
            )));
        }
        let truncation_radius = (WEIGHT_FLOOR.ln() / spec.decay.ln()).ceil() as i64;
        Ok(Arc::new(Self {
            spec,
            theta_ticks,
            truncation_radius,
        }))
    }

    pub fn spec(&self) -> &SystemSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim
    }

    pub fn decay(&self) -> f64 {
        self.spec.decay
    }

    pub fn window_radius(&self) -> i64 {
        self.spec.window_radius
    }

    pub fn theta_ticks(&self) -> u64 {
        self.theta_ticks
    }

    /// Stored rotation as a real number.
    pub fn theta(&self) -> f64 {
        self.theta_ticks as f64 / CIRCLE_TICKS as f64
    }

    /// Distance between the stored rotation and the configured value; the
    /// drift after `k` steps is bounded by `|k|` times this.
    pub fn theta_error_per_step(&self) -> f64 {
        (self.theta() - self.spec.theta).abs() + 0.5 / CIRCLE_TICKS as f64
    }

    /// Radius beyond which cube coordinates carry weight below `1e-17`.
    pub fn truncation_radius(&self) -> i64 {
        self.truncation_radius
    }

    /// Metric weight of coordinate `j` under the Bowen metric of horizon `n`:
    /// `max_{0 <= i < n} decay^{|j - i|}`.
    pub fn bowen_weight(&self, j: i64, n: u64) -> f64 {
        let gap = if j < 0 {
            -j
        } else if j >= n as i64 {
            j - n as i64 + 1
        } else {
            0
        };
        self.spec.decay.powi(gap.min(i32::MAX as i64) as i32)
    }
}

/// A point of the circle, in ticks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CirclePoint(u64);

impl CirclePoint {
    pub fn from_ticks(ticks: u64) -> Self {
        Self(ticks % CIRCLE_TICKS)
    }

    pub fn from_f64(t: f64) -> Self {
        let r = t.rem_euclid(1.0);
        Self::from_ticks((r * CIRCLE_TICKS as f64).round() as u64)
    }

    pub fn ticks(self) -> u64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / CIRCLE_TICKS as f64
    }

    /// Signed offset in ticks.
    pub fn offset(self, ticks: i64) -> Self {
        let t = (self.0 as i128 + ticks as i128).rem_euclid(CIRCLE_TICKS as i128);
        Self(t as u64)
    }

    /// Rotate by `k` steps of `step` ticks.
    pub fn rotate(self, step: u64, k: i64) -> Self {
        let delta = (k as i128 * step as i128).rem_euclid(CIRCLE_TICKS as i128);
        Self(((self.0 as u128 + delta as u128) % CIRCLE_TICKS as u128) as u64)
    }

    pub fn arc_ticks(self, other: Self) -> u64 {
        let d = self.0.abs_diff(other.0);
        d.min(CIRCLE_TICKS - d)
    }

    pub fn arcdist(self, other: Self) -> f64 {
        self.arc_ticks(other) as f64 / CIRCLE_TICKS as f64
    }
}

#[derive(Clone, Debug)]
enum Cube {
    Zero,
    /// Coordinates for original indices `[-window_radius, window_radius]`,
    /// row-major with `D` entries per index.
    Explicit(Arc<[f64]>),
    /// Uniform coordinates drawn on demand from a key.
    Hashed(u64),
    /// Coordinates of `base` on the sorted original-index ranges `keep`,
    /// drawn from `fresh` elsewhere.
    Spliced {
        base: u64,
        fresh: u64,
        keep: Arc<[(i64, i64)]>,
    },
}

/// A point of the test system, in a frame shifted `shift` steps from the
/// frame it was created in.
#[derive(Clone, Debug)]
pub struct OrbitWindow {
    system: Arc<System>,
    cube: Cube,
    circle: CirclePoint,
    shift: i64,
    extension: BaseExtension,
}

impl PartialEq for OrbitWindow {
    fn eq(&self, other: &Self) -> bool {
        if self.system != other.system
            || self.circle != other.circle
            || self.shift != other.shift
            || self.extension != other.extension
        {
            return false;
        }
        match (&self.cube, &other.cube) {
            (Cube::Zero, Cube::Zero) => true,
            (Cube::Hashed(a), Cube::Hashed(b)) => a == b,
            (Cube::Explicit(a), Cube::Explicit(b)) => a == b,
            (
                Cube::Spliced { base, fresh, keep },
                Cube::Spliced {
                    base: b2,
                    fresh: f2,
                    keep: k2,
                },
            ) => base == b2 && fresh == f2 && keep == k2,
            _ => false,
        }
    }
}

impl OrbitWindow {
    /// Point with every cube coordinate zero.
    pub fn zero(system: &Arc<System>, circle: CirclePoint) -> Self {
        Self {
            system: Arc::clone(system),
            cube: Cube::Zero,
            circle,
            shift: 0,
            extension: BaseExtension::ConstantZero,
        }
    }

    /// Point with explicit coordinates for indices `-R..=R`, `R` the window
    /// radius; `coords[i]` holds index `i - R`.
    pub fn from_coords(
        system: &Arc<System>,
        coords: &[Vec<f64>],
        circle: CirclePoint,
        extension: BaseExtension,
    ) -> Result<Self> {
        let r = system.window_radius();
        let d = system.dim();
        if coords.len() as i64 != 2 * r + 1 {
            return Err(Error::Config(format!(
                "expected {} coordinate vectors, got {}",
                2 * r + 1,
                coords.len()
            )));
        }
        let mut flat = Vec::with_capacity(coords.len() * d);
        for v in coords {
            if v.len() != d || v.iter().any(|c| !(0.0..=1.0).contains(c)) {
                return Err(Error::Config(format!(
                    "cube coordinates must be {d}-vectors in [0,1]"
                )));
            }
            flat.extend_from_slice(v);
        }
        Ok(Self {
            system: Arc::clone(system),
            cube: Cube::Explicit(flat.into()),
            circle,
            shift: 0,
            extension,
        })
    }

    /// Point with lazily drawn uniform coordinates.
    pub fn hashed(system: &Arc<System>, key: u64, circle: CirclePoint) -> Self {
        Self {
            system: Arc::clone(system),
            cube: Cube::Hashed(key),
            circle,
            shift: 0,
            extension: BaseExtension::ConstantZero,
        }
    }

    /// Copy of a point with drawn coordinates that keeps the coordinates at
    /// times in `keep` (current frame) and redraws all others from `fresh`.
    pub fn resampled_outside(&self, keep: &[(i64, i64)], fresh: u64) -> Result<Self> {
        let Cube::Hashed(base) = self.cube else {
            return Err(Error::Precondition("only drawn points can be resampled".into()));
        };
        let mut ranges: Vec<(i64, i64)> = keep
            .iter()
            .filter(|r| r.0 <= r.1)
            .map(|&(a, b)| (a + self.shift, b + self.shift))
            .collect();
        ranges.sort_unstable();
        let mut merged: Vec<(i64, i64)> = Vec::with_capacity(ranges.len());
        for r in ranges {
            match merged.last_mut() {
                Some(last) if r.0 <= last.1 + 1 => last.1 = last.1.max(r.1),
                _ => merged.push(r),
            }
        }
        Ok(Self {
            cube: Cube::Spliced {
                base,
                fresh,
                keep: merged.into(),
            },
            ..self.clone()
        })
    }

    pub fn with_extension(mut self, extension: BaseExtension) -> Self {
        self.extension = extension;
        self
    }

    pub fn system(&self) -> &Arc<System> {
        &self.system
    }

    pub fn circle(&self) -> CirclePoint {
        self.circle
    }

    pub fn shift(&self) -> i64 {
        self.shift
    }

    pub fn extension(&self) -> BaseExtension {
        self.extension
    }

    /// Copy of this point with a different circle coordinate.
    pub fn with_circle(&self, circle: CirclePoint) -> Self {
        Self {
            circle,
            ..self.clone()
        }
    }

    /// Range of times `n` (in the current frame) that stay inside the
    /// represented window.
    pub fn time_range(&self) -> (i64, i64) {
        let r = self.system.window_radius();
        (-r - self.shift, r - self.shift)
    }

    /// Fails unless every time in `[lo, hi]` is representable.
    pub fn check_times(&self, lo: i64, hi: i64) -> Result<()> {
        let (min, max) = self.time_range();
        for t in [lo, hi] {
            if t < min || t > max {
                return Err(Error::Range {
                    requested: t,
                    min,
                    max,
                });
            }
        }
        Ok(())
    }

    fn base_index(&self, original: i64) -> Option<i64> {
        let r = self.system.window_radius();
        if original.abs() <= r {
            return Some(original);
        }
        match self.extension {
            BaseExtension::ConstantZero => None,
            BaseExtension::Periodic => Some((original + r).rem_euclid(2 * r + 1) - r),
        }
    }

    /// Component `c` of the cube coordinate at time `n` of the current frame.
    pub fn coord(&self, n: i64, c: usize) -> f64 {
        let Some(i) = self.base_index(n + self.shift) else {
            return 0.0;
        };
        match &self.cube {
            Cube::Zero => 0.0,
            Cube::Explicit(data) => {
                let r = self.system.window_radius();
                data[((i + r) as usize) * self.system.dim() + c]
            }
            Cube::Hashed(key) => hash::unit(hash::mix(&[*key, i as u64, c as u64])),
            Cube::Spliced { base, fresh, keep } => {
                let pos = keep.partition_point(|r| r.1 < i);
                let key = if keep.get(pos).is_some_and(|r| r.0 <= i) { base } else { fresh };
                hash::unit(hash::mix(&[*key, i as u64, c as u64]))
            }
        }
    }

    /// `T^k x`.
    pub fn apply_shift(&self, k: i64) -> Result<Self> {
        let r = self.system.window_radius();
        let shift = self.shift + k;
        if shift.abs() > r {
            return Err(Error::Range {
                requested: k,
                min: -r - self.shift,
                max: r - self.shift,
            });
        }
        Ok(Self {
            system: Arc::clone(&self.system),
            cube: self.cube.clone(),
            circle: self.circle.rotate(self.system.theta_ticks(), k),
            shift,
            extension: self.extension,
        })
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.system.spec() != other.system.spec() || self.extension != other.extension {
            return Err(Error::Config(
                "points belong to different systems or extensions".into(),
            ));
        }
        Ok(())
    }

    fn coord_gap(&self, other: &Self, n: i64) -> f64 {
        (0..self.system.dim())
            .map(|c| (self.coord(n, c) - other.coord(n, c)).abs())
            .fold(0.0, f64::max)
    }
}

/// Product metric `max(sup_n decay^|n| |x_n - y_n|_inf, arcdist)`, with the
/// sup truncated where the weights drop below `1e-17`.
pub fn dist(x: &OrbitWindow, y: &OrbitWindow) -> Result<f64> {
    bowen_dist(x, y, 1)
}

/// Bowen metric `d_n(x, y) = max_{0 <= i < n} d(T^i x, T^i y)`.
///
/// Rotation is an isometry of the circle, so the circle term is unchanged and
/// the cube term becomes a sup with weights [`System::bowen_weight`].
pub fn bowen_dist(x: &OrbitWindow, y: &OrbitWindow, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Precondition("Bowen horizon must be positive".into()));
    }
    x.compatible(y)?;
    let sys = &x.system;
    if n > 1 {
        x.check_times(0, n as i64 - 1)?;
        y.check_times(0, n as i64 - 1)?;
    }
    let t = sys.truncation_radius();
    let mut best = x.circle.arcdist(y.circle);
    for j in -t..(n as i64 + t) {
        let w = sys.bowen_weight(j, n);
        if w <= best {
            continue;
        }
        best = best.max(w * x.coord_gap(y, j));
    }
    Ok(best)
}

/// `count` reproducible points with uniform cube entries and circle points.
pub fn sample_points(system: &Arc<System>, count: usize, seed: u64) -> Result<Vec<OrbitWindow>> {
    if count == 0 {
        return Err(Error::Precondition("sample count must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| {
            let key = rng.gen::<u64>();
            let circle = CirclePoint::from_ticks(rng.gen_range(0..CIRCLE_TICKS));
            OrbitWindow::hashed(system, key, circle)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn small_system() -> Arc<System> {
        System::new(SystemSpec::new(2, DEFAULT_THETA, 20, 0.5)).unwrap()
    }

    #[test]
    fn rejects_rational_and_degenerate_theta() {
        for theta in [0.0, 0.5, 0.25, 1.0, 0.123] {
            assert!(System::new(SystemSpec::new(1, theta, 10, 0.5)).is_err());
        }
        assert!(System::new(SystemSpec::new(1, DEFAULT_THETA, 10, 0.5)).is_ok());
    }

    #[test]
    fn shift_identity_and_rotation() {
        let sys = small_system();
        let x = OrbitWindow::hashed(&sys, 7, CirclePoint::from_f64(0.9));
        assert_eq!(x.apply_shift(0).unwrap(), x);
        let tx = x.apply_shift(1).unwrap();
        let expected = (0.9 + sys.theta()).rem_euclid(1.0);
        assert_abs_diff_eq!(tx.circle().to_f64(), expected, epsilon = 1e-12);
        assert_eq!(tx.coord(0, 1), x.coord(1, 1));
    }

    #[test]
    fn shift_round_trip_is_exact() {
        let sys = small_system();
        let x = OrbitWindow::hashed(&sys, 99, CirclePoint::from_f64(0.123_456));
        let back = x.apply_shift(3).unwrap().apply_shift(-3).unwrap();
        assert_eq!(back, x);
        for n in -17..=17 {
            assert_eq!(back.coord(n, 0), x.coord(n, 0));
        }
    }

    #[test]
    fn shift_beyond_window_is_a_range_error() {
        let sys = small_system();
        let x = OrbitWindow::zero(&sys, CirclePoint::from_f64(0.0));
        assert!(matches!(x.apply_shift(21), Err(Error::Range { .. })));
        let y = x.apply_shift(15).unwrap();
        assert!(matches!(y.apply_shift(6), Err(Error::Range { .. })));
    }

    #[test]
    fn dist_examples() {
        let sys = small_system();
        let base = vec![vec![0.2, 0.2]; 41];
        let x = OrbitWindow::from_coords(&sys, &base, CirclePoint::from_f64(0.0), BaseExtension::ConstantZero)
            .unwrap();
        assert_eq!(dist(&x, &x).unwrap(), 0.0);
        let mut moved = base.clone();
        moved[20] = vec![0.6, 0.2];
        let y = OrbitWindow::from_coords(&sys, &moved, CirclePoint::from_f64(0.0), BaseExtension::ConstantZero)
            .unwrap();
        assert_abs_diff_eq!(dist(&x, &y).unwrap(), 0.4, epsilon = 1e-15);
        let z = x.with_circle(CirclePoint::from_f64(0.3));
        assert_abs_diff_eq!(dist(&x, &z).unwrap(), 0.3, epsilon = 1e-12);
    }

    #[test]
    fn mismatched_systems_are_rejected() {
        let a = small_system();
        let b = System::new(SystemSpec::new(2, DEFAULT_THETA, 20, 0.25)).unwrap();
        let x = OrbitWindow::zero(&a, CirclePoint::from_f64(0.0));
        let y = OrbitWindow::zero(&b, CirclePoint::from_f64(0.0));
        assert!(matches!(dist(&x, &y), Err(Error::Config(_))));
    }

    #[test]
    fn bowen_matches_literal_definition() {
        let sys = small_system();
        let pts = sample_points(&sys, 12, 3).unwrap();
        for pair in pts.chunks(2) {
            let (x, y) = (&pair[0], &pair[1]);
            assert_eq!(bowen_dist(x, y, 1).unwrap(), dist(x, y).unwrap());
            for n in 1..6u64 {
                let literal = (0..n as i64)
                    .map(|i| dist(&x.apply_shift(i).unwrap(), &y.apply_shift(i).unwrap()).unwrap())
                    .fold(0.0, f64::max);
                assert_abs_diff_eq!(bowen_dist(x, y, n).unwrap(), literal, epsilon = 1e-12);
            }
            assert!(bowen_dist(x, y, 5).unwrap() >= bowen_dist(x, y, 3).unwrap());
            assert_eq!(bowen_dist(x, x, 4).unwrap(), 0.0);
        }
    }

    #[test]
    fn periodic_extension_repeats_the_window() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 3, 0.5)).unwrap();
        let coords: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 / 10.0]).collect();
        let x = OrbitWindow::from_coords(&sys, &coords, CirclePoint::from_f64(0.0), BaseExtension::Periodic)
            .unwrap();
        assert_eq!(x.coord(4, 0), x.coord(-3, 0));
        let z = OrbitWindow::from_coords(&sys, &coords, CirclePoint::from_f64(0.0), BaseExtension::ConstantZero)
            .unwrap();
        assert_eq!(z.coord(4, 0), 0.0);
    }

    #[test]
    fn sampling_is_deterministic_and_uniform() {
        let sys = System::new(SystemSpec::default()).unwrap();
        assert!(sample_points(&sys, 0, 1).is_err());
        let a = sample_points(&sys, 50, 11).unwrap();
        let b = sample_points(&sys, 50, 11).unwrap();
        assert_eq!(a, b);
        let pts = sample_points(&sys, 10_000, 5).unwrap();
        let mean = pts.iter().map(|p| p.coord(0, 0)).sum::<f64>() / pts.len() as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
        let circ = pts.iter().map(|p| p.circle().to_f64()).sum::<f64>() / pts.len() as f64;
        assert!((circ - 0.5).abs() < 0.02, "circle mean {circ}");
    }

    #[test]
    fn shift_expands_metric_by_at_most_inverse_decay() {
        let sys = small_system();
        let pts = sample_points(&sys, 40, 21).unwrap();
        for pair in pts.chunks(2) {
            let d0 = dist(&pair[0], &pair[1]).unwrap();
            let d1 = dist(&pair[0].apply_shift(1).unwrap(), &pair[1].apply_shift(1).unwrap()).unwrap();
            assert!(d1 <= d0 / sys.decay() + 1e-12);
        }
    }

    #[test]
    fn resampling_keeps_only_the_listed_times() {
        let sys = small_system();
        let x = OrbitWindow::hashed(&sys, 5, CirclePoint::from_f64(0.3)).apply_shift(2).unwrap();
        let y = x.resampled_outside(&[(-3, -1), (4, 4), (0, 0)], 99).unwrap();
        assert_eq!(y.circle(), x.circle());
        for n in -10..=10 {
            let kept = (-3..=0).contains(&n) || n == 4;
            for c in 0..2 {
                assert_eq!(x.coord(n, c) == y.coord(n, c), kept, "time {n}");
            }
        }
        let z = y.apply_shift(-2).unwrap();
        assert_eq!(z.coord(2, 0), x.coord(0, 0));
        assert!(OrbitWindow::zero(&sys, CirclePoint::from_f64(0.0)).resampled_outside(&[], 1).is_err());
    }
}
