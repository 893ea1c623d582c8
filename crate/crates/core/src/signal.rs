//! Signals read off a tiling: the map `Phi` into `[0,2]^Z`, the block
//! signal `g` and the factor `pi = (I_g, Phi)`.

use serde::{Deserialize, Serialize};

use crate::dynsys::OrbitWindow;
use crate::tiling::IntervalTiling;
use crate::{Error, Result};

/// Choice of the bump `gamma`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GammaVariant {
    /// `2 / (1 + e^{|t|})`: even, maximal exactly at 0 with value 1.
    #[default]
    MaxAtZero,
    /// `2 / (1 + e^{-|t|})`, kept for comparison; minimal at 0.
    PaperPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignalParams {
    /// Scale `R` of the tiling; the profile ramp ends at `R/3`.
    pub big_r: f64,
    /// Block length parameter; blocks have `m - 1` entries.
    pub m: usize,
    pub gamma: GammaVariant,
}

impl SignalParams {
    pub fn new(big_r: f64, m: usize, gamma: GammaVariant) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config(format!("block parameter m must be at least 2, got {m}")));
        }
        if !(big_r > 6.0) {
            return Err(Error::Config(format!("R must exceed 6, got {big_r}")));
        }
        Ok(Self { big_r, m, gamma })
    }

    /// Radius beyond which `g` vanishes, `3m`.
    pub fn g_reach(&self) -> f64 {
        3.0 * self.m as f64
    }
}

pub fn gamma(t: f64, variant: GammaVariant) -> f64 {
    match variant {
        GammaVariant::MaxAtZero => 2.0 / (1.0 + t.abs().exp()),
        GammaVariant::PaperPrinted => 2.0 / (1.0 + (-t.abs()).exp()),
    }
}

/// 0 on `[0, 2]`, 1 from `R/3` on, linear in between.
pub fn alpha_profile(t: f64, big_r: f64) -> f64 {
    let top = big_r / 3.0;
    if t <= 2.0 {
        0.0
    } else if t >= top {
        1.0
    } else {
        (t - 2.0) / (top - 2.0)
    }
}

/// 0 at 0, 1 on `[1, 2m]`, 0 from `3m` on, linear ramps in between.
pub fn alpha_block(t: f64, m: usize) -> f64 {
    let m = m as f64;
    if t <= 0.0 || t >= 3.0 * m {
        0.0
    } else if t < 1.0 {
        t
    } else if t <= 2.0 * m {
        1.0
    } else {
        (3.0 * m - t) / m
    }
}

/// Value of `h(T^k x)` given the tiling of `x`: 0 on an endpoint, otherwise
/// `min(d, 1) + alpha(d) gamma(n - k)` with `d` the distance to the nearest
/// endpoint and `n` the label of the tile containing `k`.
pub fn h_at(tiling: &IntervalTiling, k: i64, params: &SignalParams) -> Result<f64> {
    let u = k as f64;
    let reach = params.big_r / 3.0;
    tiling.check_within(u - reach, u + reach)?;
    Ok(h_value(k, tiling.interior_label(u), tiling.dist_to_boundary(u), params))
}

fn h_value(k: i64, label: Option<i64>, d: f64, params: &SignalParams) -> f64 {
    match label {
        None => 0.0,
        Some(n) => d.min(1.0) + alpha_profile(d, params.big_r) * gamma((n - k) as f64, params.gamma),
    }
}

/// The rigid value `1 + gamma(n - k)` reached when `k` is at least `R/3` from
/// every endpoint, or `None` when `k` is closer.
pub fn rigid_value(tiling: &IntervalTiling, k: i64, params: &SignalParams) -> Option<f64> {
    let u = k as f64;
    if tiling.dist_to_boundary(u) < params.big_r / 3.0 {
        return None;
    }
    let n = tiling.interior_label(u)?;
    Some(1.0 + gamma((n - k) as f64, params.gamma))
}

/// `(Phi(x)_k)` for `k` in `[lo, hi]`.
pub fn phi_map(tiling: &IntervalTiling, lo: i64, hi: i64, params: &SignalParams) -> Result<Vec<f64>> {
    if hi < lo {
        return Ok(Vec::new());
    }
    let reach = params.big_r / 3.0;
    tiling.check_within(lo as f64 - reach, hi as f64 + reach)?;
    Ok(tiling.sweep(lo, hi).map(|(k, label, d)| h_value(k, label, d, params)).collect())
}

/// Rigid blocks of a `Phi` window and the share of coordinates outside them.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PlateauReport {
    pub free_fraction: f64,
    /// Maximal inclusive runs of rigid coordinates.
    pub blocks: Vec<(i64, i64)>,
    /// Coordinates flagged rigid whose value differs from the rigid profile.
    pub profile_mismatches: usize,
}

/// Plateau analysis of `phi` (indexed from `lo`) over `[lo, lo + n)`.
pub fn plateau_report(phi: &[f64], tiling: &IntervalTiling, lo: i64, n: usize, params: &SignalParams) -> Result<PlateauReport> {
    if n == 0 || phi.len() < n {
        return Err(Error::Precondition(format!(
            "plateau window of length {n} needs that many values, got {}",
            phi.len()
        )));
    }
    let mut blocks: Vec<(i64, i64)> = Vec::new();
    let mut rigid = 0usize;
    let mut profile_mismatches = 0usize;
    let reach = params.big_r / 3.0;
    for ((k, label, d), &v) in tiling.sweep(lo, lo + n as i64 - 1).zip(phi) {
        let (Some(b), true) = (label, d >= reach) else {
            continue;
        };
        let expected = 1.0 + gamma((b - k) as f64, params.gamma);
        if v != expected {
            profile_mismatches += 1;
        }
        rigid += 1;
        match blocks.last_mut() {
            Some(last) if last.1 == k - 1 => last.1 = k,
            _ => blocks.push((k, k)),
        }
    }
    Ok(PlateauReport {
        free_fraction: 1.0 - rigid as f64 / n as f64,
        blocks,
        profile_mismatches,
    })
}

/// A map `X -> [0,1]^{m-1}` evaluated on orbit points.
pub trait BlockOracle: Sync {
    /// Output dimension `m - 1`.
    fn out_dim(&self) -> usize;
    fn eval(&self, x: &OrbitWindow) -> Result<Vec<f64>>;
}

/// Start `a` of the block containing `t` for a tile labelled `b`: the
/// largest `a <= t` with `a = b mod (m - 1)`.
pub fn block_start(t: i64, b: i64, m: usize) -> i64 {
    t - (t - b).rem_euclid(m as i64 - 1)
}

/// Windows of `Phi(x)` and `I_g(x)` over the same coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorImage {
    pub lo: i64,
    pub phi: Vec<f64>,
    pub g: Vec<f64>,
}

fn check_oracle(oracle: &dyn BlockOracle, m: usize) -> Result<()> {
    if oracle.out_dim() != m - 1 {
        return Err(Error::Oracle(format!(
            "block map has dimension {}, expected {}",
            oracle.out_dim(),
            m - 1
        )));
    }
    Ok(())
}

/// `(g(T^t x))` for `t` in `[lo, hi]`, where `tiling` is the lower slice of
/// `x`. The block map is only evaluated where the ramp is positive.
pub fn g_window(
    x: &OrbitWindow,
    tiling: &IntervalTiling,
    lo: i64,
    hi: i64,
    params: &SignalParams,
    oracle: &dyn BlockOracle,
) -> Result<Vec<f64>> {
    check_oracle(oracle, params.m)?;
    let reach = params.g_reach();
    tiling.check_within(lo as f64 - reach, hi as f64 + reach)?;
    let mut cache: Option<(i64, Vec<f64>)> = None;
    let mut out = Vec::with_capacity((hi - lo + 1).max(0) as usize);
    for t in lo..=hi {
        let u = t as f64;
        let weight = alpha_block(tiling.dist_to_boundary(u), params.m);
        let label = tiling.interior_label(u);
        let (Some(b), true) = (label, weight > 0.0) else {
            out.push(0.0);
            continue;
        };
        let a = block_start(t, b, params.m);
        if cache.as_ref().map(|c| c.0) != Some(a) {
            let value = oracle.eval(&x.apply_shift(a)?)?;
            if value.len() != params.m - 1 || value.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(Error::Oracle(format!("block map returned an invalid value at shift {a}")));
            }
            cache = Some((a, value));
        }
        let block = &cache.as_ref().expect("cache filled above").1;
        out.push(weight * block[(t - a) as usize]);
    }
    Ok(out)
}

/// `pi(x)` restricted to `[lo, hi]`.
pub fn pi_map(
    x: &OrbitWindow,
    tiling: &IntervalTiling,
    lo: i64,
    hi: i64,
    params: &SignalParams,
    oracle: &dyn BlockOracle,
) -> Result<FactorImage> {
    Ok(FactorImage {
        lo,
        phi: phi_map(tiling, lo, hi, params)?,
        g: g_window(x, tiling, lo, hi, params, oracle)?,
    })
}

/// Whether the block `[a, a + m - 2]` reproduces the block map exactly: it
/// must sit inside one tile `b` with `a = b mod (m - 1)` and every
/// coordinate at distance in `[1, 2m]` from the endpoints.
pub fn block_admissible(tiling: &IntervalTiling, a: i64, params: &SignalParams) -> bool {
    let m = params.m as i64;
    let Some(b) = tiling.interior_label(a as f64) else {
        return false;
    };
    if (a - b).rem_euclid(m - 1) != 0 {
        return false;
    }
    (a..=a + m - 2).all(|t| {
        let d = tiling.dist_to_boundary(t as f64);
        tiling.interior_label(t as f64) == Some(b) && (1.0..=2.0 * params.m as f64).contains(&d)
    })
}

/// Blocks meeting only the weaker condition that both ends lie in the same
/// tile with distance in `[1, 2m]`, yet with some interior coordinate past
/// `2m`, where recovery can fail.
pub fn endpoint_only_admissible(tiling: &IntervalTiling, a: i64, params: &SignalParams) -> bool {
    let m = params.m as i64;
    let end = a + m - 2;
    let Some(b) = tiling.interior_label(a as f64) else {
        return false;
    };
    let ok = |t: i64| {
        let d = tiling.dist_to_boundary(t as f64);
        tiling.interior_label(t as f64) == Some(b) && (1.0..=2.0 * params.m as f64).contains(&d)
    };
    (a - b).rem_euclid(m - 1) == 0 && ok(a) && ok(end) && !block_admissible(tiling, a, params)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::Tile;
    use approx::assert_abs_diff_eq;

    fn params() -> SignalParams {
        SignalParams::new(30.0, 4, GammaVariant::MaxAtZero).unwrap()
    }

    fn tiling(bounds: &[f64], labels: &[i64]) -> IntervalTiling {
        let mut tiles = Vec::new();
        for (i, &label) in labels.iter().enumerate() {
            tiles.push(Tile {
                label,
                a: if i == 0 { f64::NEG_INFINITY } else { bounds[i - 1] },
                b: bounds.get(i).copied().unwrap_or(f64::INFINITY),
            });
        }
        IntervalTiling::from_tiles(1.0, (-200.0, 200.0), tiles, vec![]).unwrap()
    }

    #[test]
    fn gamma_values() {
        assert_eq!(gamma(0.0, GammaVariant::MaxAtZero), 1.0);
        assert_abs_diff_eq!(gamma(1.0, GammaVariant::MaxAtZero), 2.0 / (1.0 + std::f64::consts::E), epsilon = 1e-15);
        assert_abs_diff_eq!(gamma(1.0, GammaVariant::MaxAtZero), 0.537_882_842_739_990, epsilon = 1e-12);
        for t in [0.3, 2.0, 7.5] {
            assert_eq!(gamma(t, GammaVariant::MaxAtZero), gamma(-t, GammaVariant::MaxAtZero));
            assert!(gamma(t, GammaVariant::MaxAtZero) < 1.0);
            assert!(gamma(t, GammaVariant::PaperPrinted) > 1.0);
        }
        assert_eq!(gamma(0.0, GammaVariant::PaperPrinted), 1.0);
    }

    #[test]
    fn alpha_values() {
        let r = 30.0;
        assert_eq!(alpha_profile(1.0, r), 0.0);
        assert_eq!(alpha_profile(r / 3.0, r), 1.0);
        assert_abs_diff_eq!(alpha_profile((2.0 + r / 3.0) / 2.0, r), 0.5, epsilon = 1e-15);
        let m = 5;
        assert_eq!(alpha_block(0.0, m), 0.0);
        assert_eq!(alpha_block(7.5, m), 1.0);
        assert_abs_diff_eq!(alpha_block(12.5, m), 0.5, epsilon = 1e-15);
        assert_eq!(alpha_block(15.0, m), 0.0);
        assert_eq!(alpha_block(40.0, m), 0.0);
    }

    #[test]
    fn h_examples() {
        let p = params();
        let t = tiling(&[-50.0, 0.0, 0.5, 60.0], &[-80, -20, 0, 30, 90]);
        assert_eq!(h_at(&t, 0, &p).unwrap(), 0.0);
        let t = tiling(&[-50.0, -0.5, 60.0], &[-80, -20, 30, 90]);
        assert_abs_diff_eq!(h_at(&t, 0, &p).unwrap(), 0.5, epsilon = 1e-15);
        let t = tiling(&[-50.0, 60.0], &[-80, 0, 90]);
        assert_eq!(h_at(&t, 0, &p).unwrap(), 2.0);
        assert!(h_at(&t, 195, &p).is_err());
    }

    #[test]
    fn profile_bound_and_plateaus() {
        let p = params();
        let t = tiling(&[-50.0, -5.5, 4.0, 60.0], &[-80, -20, 0, 30, 90]);
        let phi = phi_map(&t, -100, 100, &p).unwrap();
        for (i, &v) in phi.iter().enumerate() {
            let k = i as i64 - 100;
            assert!((0.0..=2.0).contains(&v));
            if let Some(n) = t.interior_label(k as f64) {
                assert!(v <= 1.0 + gamma((n - k) as f64, p.gamma) + 1e-12);
            }
        }
        let report = plateau_report(&phi, &t, -100, 201, &p).unwrap();
        assert_eq!(report.profile_mismatches, 0);
        // the tile [-5.5, 4] is shorter than 2R/3 = 20 and holds no plateau
        assert!(report.blocks.iter().all(|&(a, b)| b < -5 || a > 4));
        assert!(report.free_fraction > 0.0 && report.free_fraction < 1.0);

        let wide = tiling(&[-500.0, 500.0], &[-900, 0, 900]);
        let flat = phi_map(&wide, -20, 20, &p).unwrap();
        assert_eq!(plateau_report(&flat, &wide, -20, 41, &p).unwrap().free_fraction, 0.0);
    }

    struct Affine;

    impl BlockOracle for Affine {
        fn out_dim(&self) -> usize {
            3
        }

        fn eval(&self, x: &OrbitWindow) -> Result<Vec<f64>> {
            Ok((0..3).map(|i| x.coord(i as i64, 0)).collect())
        }
    }

    #[test]
    fn block_structure() {
        use crate::dynsys::{sample_points, System, SystemSpec};
        let sys = System::new(SystemSpec::new(1, crate::dynsys::DEFAULT_THETA, 1000, 0.5)).unwrap();
        let x = sample_points(&sys, 1, 9).unwrap().remove(0);
        let p = params();
        let t = tiling(&[-60.0, 10.5, 80.0], &[-100, -30, 40, 120]);
        let g = g_window(&x, &t, -40, 40, &p, &Affine).unwrap();
        for (i, &v) in g.iter().enumerate() {
            let s = i as i64 - 40;
            if t.dist_to_boundary(s as f64) >= p.g_reach() {
                assert_eq!(v, 0.0);
            }
            assert!((0.0..=1.0).contains(&v));
        }
        let mut recovered = 0;
        for a in -40..=38 {
            if block_admissible(&t, a, &p) {
                let f = Affine.eval(&x.apply_shift(a).unwrap()).unwrap();
                let seen: Vec<f64> = (a..a + 3).map(|s| g[(s + 40) as usize]).collect();
                assert_eq!(seen, f);
                recovered += 1;
            }
        }
        assert!(recovered > 0);
        assert_eq!(block_start(10, 40, 4), 10);
        assert_eq!(block_start(11, 40, 4), 10);
        assert_eq!(block_start(9, 40, 4), 7);
        assert!(g_window(&x, &t, -40, 40, &SignalParams::new(30.0, 5, GammaVariant::MaxAtZero).unwrap(), &Affine).is_err());
    }
}
