//! Epsilon-width dimension through covers of small multiplicity.
//!
//! `Widim_eps` of a compact metric space equals the least multiplicity minus
//! one of a finite closed cover with mesh below `eps`, up to the resolution of
//! the discretisation. Spaces are modelled by [`CellSpace`]s of box atoms and
//! solved by [`min_multiplicity`].

mod nerve;
mod orbit;
mod solver;
mod space;

use std::collections::BTreeMap;

use serde::Serialize;

pub use nerve::{nerve_and_projection, Barycentric, NerveComplex};
pub use orbit::{widim_orbit, FactorWidth, OrbitWidim};
pub use solver::{min_multiplicity, Budget, Mode, WidimResult};
pub use space::{cover_stats, Atom, Axis, AxisSpec, CellCover, CellSpace, CoverStats};

use crate::{Error, Result};

/// Mean-dimension estimates from a series `n -> Widim(X, d_n)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MdimEstimate {
    /// `min_n Widim / n`, an upper bound on the limit by subadditivity.
    pub fekete_upper: f64,
    /// Increment per step between the two largest horizons.
    pub last_slope: Option<f64>,
    pub min_slope: Option<f64>,
    pub max_slope: Option<f64>,
}

pub fn mdim_estimate(series: &BTreeMap<u64, f64>) -> Result<MdimEstimate> {
    if series.is_empty() {
        return Err(Error::Precondition("empty width series".into()));
    }
    if series.contains_key(&0) {
        return Err(Error::Precondition("horizons must be positive".into()));
    }
    let fekete_upper = series.iter().map(|(&n, &w)| w / n as f64).fold(f64::INFINITY, f64::min);
    let points: Vec<(f64, f64)> = series.iter().map(|(&n, &w)| (n as f64, w)).collect();
    let slopes: Vec<f64> = points.windows(2).map(|p| (p[1].1 - p[0].1) / (p[1].0 - p[0].0)).collect();
    Ok(MdimEstimate {
        fekete_upper,
        last_slope: slopes.last().copied(),
        min_slope: slopes.iter().copied().reduce(f64::min),
        max_slope: slopes.iter().copied().reduce(f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_zero_series() {
        let s: BTreeMap<u64, f64> = (1..=4).map(|n| (n, 0.0)).collect();
        let e = mdim_estimate(&s).unwrap();
        assert_eq!(e.fekete_upper, 0.0);
        assert_eq!(e.last_slope, Some(0.0));
    }

    #[test]
    fn linear_series() {
        let s: BTreeMap<u64, f64> = (1..=5).map(|n| (n, 3.0 * n as f64)).collect();
        let e = mdim_estimate(&s).unwrap();
        assert_eq!(e.fekete_upper, 3.0);
        assert_eq!((e.min_slope, e.max_slope), (Some(3.0), Some(3.0)));
    }

    #[test]
    fn affine_series_brackets_slope() {
        let s: BTreeMap<u64, f64> = (1..=6).map(|n| (n, n as f64 + 1.0)).collect();
        let e = mdim_estimate(&s).unwrap();
        assert!((e.fekete_upper - 7.0 / 6.0).abs() < 1e-12);
        assert_eq!(e.last_slope, Some(1.0));
        assert!(mdim_estimate(&BTreeMap::new()).is_err());
    }
}
