//! Width of sampled orbit sets under the Bowen metric.
//!
//! The Bowen metric is a weighted sup over the cube coordinates and the
//! circle, so a sample set sits inside the product of its coordinate
//! projections. Width is subadditive over such products, and each projection
//! is a subset of an interval or circle whose width is computed exactly on a
//! bucketed model. The sum over coordinates is the reported upper bound.

use serde::Serialize;

use super::solver::{min_multiplicity, Budget, Mode};
use super::space::{Axis, CellSpace};
use crate::dynsys::OrbitWindow;
use crate::{Error, Result};

/// Buckets are this fraction of `eps` wide in the weighted metric.
const BUCKET_FRACTION: f64 = 0.125;

/// Width contributed by one coordinate of the product.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorWidth {
    /// Cube coordinate `(time, component)`, or `None` for the circle.
    pub coordinate: Option<(i64, usize)>,
    pub weight: f64,
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitWidim {
    pub horizon: u64,
    pub eps: f64,
    pub widim_upper: usize,
    pub factors: Vec<FactorWidth>,
}

/// Occupied buckets of `values` in `[0, 1)` cut into `slots`, with isolated
/// empty buckets between occupied ones filled in.
fn occupied_buckets(values: &[f64], slots: usize, cyclic: bool) -> Vec<usize> {
    let mut hit = vec![false; slots];
    for &v in values {
        hit[((v * slots as f64) as usize).min(slots - 1)] = true;
    }
    let filled: Vec<bool> = (0..slots)
        .map(|k| {
            if hit[k] {
                return true;
            }
            let (prev, next) = if cyclic {
                ((k + slots - 1) % slots, (k + 1) % slots)
            } else if k == 0 || k + 1 == slots {
                return false;
            } else {
                (k - 1, k + 1)
            };
            hit[prev] && hit[next]
        })
        .collect();
    (0..slots).filter(|&k| filled[k]).collect()
}

fn factor_width(values: &[f64], kind: Axis, weight: f64, eps: f64) -> Result<usize> {
    let slots = (1.0 / (BUCKET_FRACTION * eps / weight)).ceil().max(1.0) as usize;
    let width = 1.0 / slots as f64;
    if width * weight >= eps / 4.0 {
        return Err(Error::Resolution(format!(
            "bucket diameter {} is not below eps/4",
            width * weight
        )));
    }
    let cyclic = matches!(kind, Axis::Circle { .. });
    let occupied = occupied_buckets(values, slots, cyclic);
    let space = CellSpace::buckets(kind, weight, 0.0, width, slots, &occupied)?;
    Ok(min_multiplicity(&space, eps, Mode::Exact, Budget::default())?.widim_upper)
}

/// Upper bound on `Widim_eps` of the samples under the Bowen metric of
/// horizon `n`.
pub fn widim_orbit(samples: &[OrbitWindow], n: u64, eps: f64) -> Result<OrbitWidim> {
    let Some(first) = samples.first() else {
        return Err(Error::Precondition("no samples".into()));
    };
    if n == 0 || !(eps > 0.0) {
        return Err(Error::Precondition("horizon and eps must be positive".into()));
    }
    let sys = first.system();
    if samples.iter().any(|x| x.system().spec() != sys.spec()) {
        return Err(Error::Config("samples come from different systems".into()));
    }
    for x in samples {
        x.check_times(0, n as i64 - 1)?;
    }
    let mut factors = Vec::new();
    let circle: Vec<f64> = samples.iter().map(|x| x.circle().to_f64()).collect();
    factors.push(FactorWidth {
        coordinate: None,
        weight: 1.0,
        width: factor_width(&circle, Axis::Circle { period: 1.0 }, 1.0, eps)?,
    });
    let t = sys.truncation_radius();
    for j in -t..(n as i64 + t) {
        let weight = sys.bowen_weight(j, n);
        // the whole coordinate has diameter at most `weight`
        if weight < eps {
            continue;
        }
        for c in 0..sys.dim() {
            let values: Vec<f64> = samples.iter().map(|x| x.coord(j, c)).collect();
            factors.push(FactorWidth {
                coordinate: Some((j, c)),
                weight,
                width: factor_width(&values, Axis::Interval, weight, eps)?,
            });
        }
    }
    Ok(OrbitWidim {
        horizon: n,
        eps,
        widim_upper: factors.iter().map(|f| f.width).sum(),
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{sample_points, System, SystemSpec, DEFAULT_THETA};

    #[test]
    fn grows_by_one_per_step_in_one_dimension() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 1_000, 0.1)).unwrap();
        let pts = sample_points(&sys, 400, 1).unwrap();
        let w: Vec<usize> = (1..=4).map(|n| widim_orbit(&pts, n, 0.25).unwrap().widim_upper).collect();
        assert_eq!(w, vec![2, 3, 4, 5]);
    }

    #[test]
    fn slope_tracks_cube_dimension() {
        let sys = System::new(SystemSpec::new(2, DEFAULT_THETA, 1_000, 0.1)).unwrap();
        let pts = sample_points(&sys, 400, 2).unwrap();
        let a = widim_orbit(&pts, 1, 0.25).unwrap().widim_upper;
        let b = widim_orbit(&pts, 2, 0.25).unwrap().widim_upper;
        assert_eq!(b - a, 2);
    }

    #[test]
    fn large_eps_gives_zero() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 1_000, 0.1)).unwrap();
        let pts = sample_points(&sys, 100, 3).unwrap();
        assert_eq!(widim_orbit(&pts, 3, 1.5).unwrap().widim_upper, 0);
    }

    #[test]
    fn subadditive_in_horizon() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 1_000, 0.5)).unwrap();
        let pts = sample_points(&sys, 300, 4).unwrap();
        let w: Vec<usize> = (1..=6).map(|n| widim_orbit(&pts, n, 0.25).unwrap().widim_upper).collect();
        for n in 1..=3 {
            for m in 1..=3 {
                assert!(w[n + m - 1] <= w[n - 1] + w[m - 1]);
            }
        }
    }

    #[test]
    fn single_point_has_zero_width() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 1_000, 0.1)).unwrap();
        let pts = sample_points(&sys, 1, 3).unwrap();
        assert_eq!(widim_orbit(&pts, 2, 0.25).unwrap().widim_upper, 0);
    }
}
