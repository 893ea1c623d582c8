//! Voronoi slice tilings of the real line.
//!
//! Sites are the points `(n, 1/phi(T^n x))` of the upper half plane. Cutting
//! their Voronoi diagram with the line `y = -level` and projecting gives an
//! interval tiling of the line. On that line the squared distance to site
//! `(n, h)` is `(u - n)^2 + (level + h)^2`, so after dropping `u^2` every site
//! is a line in `u` and the tiling is the lower envelope of those lines.

use serde::{Deserialize, Serialize};

use crate::marker::MarkerSequence;
use crate::{Error, Result};

/// Parameters of the tiling construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingParams {
    pub r: f64,
    pub delta: f64,
    pub c: f64,
    /// `max(r, 9)`.
    pub big_r: f64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "M1")]
    pub m1: u64,
    /// Lower slice level `(M1 + 1)^2`.
    pub h: f64,
}

/// Lower bound on `M`: `max{2R(c+1)/(c-1), 2/((1-delta)^-1 - c)}`.
pub fn m_bound(r: f64, delta: f64, c: f64) -> f64 {
    let big_r = r.max(9.0);
    let a = 2.0 * big_r * (c + 1.0) / (c - 1.0);
    let b = 2.0 / (1.0 / (1.0 - delta) - c);
    a.max(b)
}

/// The `c` in `(1, 1/(1-delta))` minimising [`m_bound`]. The first term
/// decreases and the second increases in `c`, so the minimum sits where they
/// cross.
pub fn auto_c(r: f64, delta: f64) -> f64 {
    let big_r = r.max(9.0);
    let (mut lo, mut hi) = (1.0, 1.0 / (1.0 - delta));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let a = 2.0 * big_r * (mid + 1.0) / (mid - 1.0);
        let b = 2.0 / (1.0 / (1.0 - delta) - mid);
        if a > b {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Smallest integer `M` strictly above [`m_bound`].
pub fn min_m(r: f64, delta: f64, c: f64) -> u64 {
    m_bound(r, delta, c).floor() as u64 + 1
}

impl TilingParams {
    pub fn new(r: f64, delta: f64, c: Option<f64>, m: u64, m1: u64) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::Config(format!("r must be positive, got {r}")));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {delta}")));
        }
        let c = c.unwrap_or_else(|| auto_c(r, delta));
        if !(c > 1.0 && c < 1.0 / (1.0 - delta)) {
            return Err(Error::Config(format!(
                "c = {c} must lie strictly inside (1, {})",
                1.0 / (1.0 - delta)
            )));
        }
        let bound = m_bound(r, delta, c);
        if !(m as f64 > bound) {
            return Err(Error::Tiling(format!(
                "M = {m} does not exceed the required bound {bound:.3}"
            )));
        }
        if m1 <= m {
            return Err(Error::Tiling(format!("M1 = {m1} must exceed M = {m}")));
        }
        Ok(Self {
            r,
            delta,
            c,
            big_r: r.max(9.0),
            m,
            m1,
            h: ((m1 + 1) * (m1 + 1)) as f64,
        })
    }

    /// Upper slice level `c H`.
    pub fn ch(&self) -> f64 {
        self.c * self.h
    }

    /// Largest distance from a site to its tile, `M1 + 1`.
    pub fn locality(&self) -> i64 {
        self.m1 as i64 + 1
    }

    /// Radius `2 M1 + 2` within which the good tile lies.
    pub fn good_radius(&self) -> i64 {
        2 * self.m1 as i64 + 2
    }
}

/// Boundary between sites `(n, hn)` and `(m, hm)`, `n < m`, on the slice at
/// `level`: `(n+m)/2 + ((level+hm)^2 - (level+hn)^2) / (2(m-n))`, factored to
/// avoid cancellation when the heights are large.
pub fn bisector(n: i64, hn: f64, m: i64, hm: f64, level: f64) -> f64 {
    let d = (m - n) as f64;
    0.5 * (n + m) as f64 + (hm - hn) * (2.0 * level + hm + hn) / (2.0 * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub label: i64,
    pub a: f64,
    pub b: f64,
}

impl Tile {
    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, u: f64) -> bool {
        self.a <= u && u <= self.b
    }
}

/// State of one label in a tiling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TileState {
    Nonempty(Tile),
    Empty,
    NotASite,
}

/// A slice tiling, exact on `valid`.
///
/// `tiles` are the envelope pieces in order; the first starts at `-inf` and
/// the last ends at `+inf`, and pieces reaching past `valid` are only exact
/// inside it.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalTiling {
    level: f64,
    valid: (f64, f64),
    tiles: Vec<Tile>,
    empty: Vec<i64>,
}

impl IntervalTiling {
    /// Tiling from explicit contiguous tiles, for tests and examples.
    pub fn from_tiles(level: f64, valid: (f64, f64), tiles: Vec<Tile>, empty: Vec<i64>) -> Result<Self> {
        for w in tiles.windows(2) {
            if w[0].b != w[1].a || w[0].label >= w[1].label {
                return Err(Error::Tiling("tiles must be contiguous with increasing labels".into()));
            }
        }
        match (tiles.first(), tiles.last()) {
            (Some(f), Some(l)) if f.a <= valid.0 && l.b >= valid.1 => {}
            _ => return Err(Error::Tiling("tiles do not cover the valid window".into())),
        }
        Ok(Self {
            level,
            valid,
            tiles,
            empty,
        })
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn valid_window(&self) -> (f64, f64) {
        self.valid
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn empty_labels(&self) -> &[i64] {
        &self.empty
    }

    /// Pieces meeting the valid window, clipped to it, positive length only.
    pub fn clipped_tiles(&self) -> Vec<Tile> {
        let (lo, hi) = self.valid;
        self.tiles
            .iter()
            .filter(|t| t.b > lo && t.a < hi)
            .map(|t| Tile {
                label: t.label,
                a: t.a.max(lo),
                b: t.b.min(hi),
            })
            .collect()
    }

    pub fn tile_of(&self, label: i64) -> TileState {
        match self.tiles.binary_search_by_key(&label, |t| t.label) {
            Ok(i) => TileState::Nonempty(self.tiles[i]),
            Err(_) if self.empty.binary_search(&label).is_ok() => TileState::Empty,
            Err(_) => TileState::NotASite,
        }
    }

    /// Whether `[a, b]` of this label lies entirely inside the valid window.
    pub fn is_certified(&self, tile: &Tile) -> bool {
        tile.a >= self.valid.0 && tile.b <= self.valid.1
    }

    /// All finite endpoints, increasing.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> + '_ {
        self.tiles.iter().skip(1).map(|t| t.a)
    }

    /// Index of the piece whose closed interval contains `u`; the left piece
    /// on a shared endpoint.
    fn piece_index(&self, u: f64) -> usize {
        self.tiles.partition_point(|t| t.b < u).min(self.tiles.len() - 1)
    }

    /// `(k, interior label, distance to the nearest endpoint)` for the
    /// integers `k` in `[lo, hi]`, in one pass over the pieces.
    pub fn sweep(&self, lo: i64, hi: i64) -> impl Iterator<Item = (i64, Option<i64>, f64)> + '_ {
        let mut i = self.piece_index(lo as f64);
        (lo..=hi).map(move |k| {
            let u = k as f64;
            while i + 1 < self.tiles.len() && self.tiles[i].b < u {
                i += 1;
            }
            let t = &self.tiles[i];
            let label = (t.a < u && u < t.b).then_some(t.label);
            (k, label, (u - t.a).abs().min((t.b - u).abs()))
        })
    }

    /// Label whose tile has `u` in its interior, or `None` when `u` is an
    /// endpoint.
    pub fn interior_label(&self, u: f64) -> Option<i64> {
        let t = &self.tiles[self.piece_index(u)];
        (t.a < u && u < t.b).then_some(t.label)
    }

    /// Distance from `u` to the nearest endpoint.
    pub fn dist_to_boundary(&self, u: f64) -> f64 {
        let i = self.piece_index(u);
        let t = &self.tiles[i];
        (u - t.a).abs().min((t.b - u).abs())
    }

    /// Fails unless `[lo, hi]` lies inside the valid window.
    pub fn check_within(&self, lo: f64, hi: f64) -> Result<()> {
        if lo < self.valid.0 || hi > self.valid.1 {
            return Err(Error::Tiling(format!(
                "[{lo}, {hi}] leaves the certified window [{}, {}]",
                self.valid.0, self.valid.1
            )));
        }
        Ok(())
    }
}

/// The slice at `level` of the Voronoi diagram of the marker sites, exact on
/// the real window `[lo, hi]`. The sequence must extend `M1 + 1` past the
/// window on both sides.
pub fn slice_tiling(seq: &MarkerSequence, params: &TilingParams, level: f64, lo: f64, hi: f64) -> Result<IntervalTiling> {
    if !(level > 0.0) {
        return Err(Error::Precondition(format!("slice level must be positive, got {level}")));
    }
    if !(lo < hi) {
        return Err(Error::Precondition(format!("empty tiling window [{lo}, {hi}]")));
    }
    let (slo, shi) = seq.window();
    let margin = params.locality().max(seq.m1() as i64 + 1) as f64;
    if (slo as f64) > lo - margin || (shi as f64) < hi + margin {
        return Err(Error::Range {
            requested: if (slo as f64) > lo - margin { lo.floor() as i64 } else { hi.ceil() as i64 },
            min: slo + margin as i64,
            max: shi - margin as i64,
        });
    }
    let sites = seq.support();
    for w in sites.windows(2) {
        if ((w[1].0 - w[0].0) as u64) < params.m {
            return Err(Error::MarkerSeparation {
                first: w[0].0,
                second: w[1].0,
            });
        }
    }
    if sites.is_empty() {
        return Err(Error::Tiling("no marker sites in the sequence window".into()));
    }

    // Lower envelope: slopes -2n decrease with n, so sites enter in order and
    // each new site can only hide sites on top of the stack.
    let mut stack: Vec<(i64, f64)> = Vec::new();
    let mut breaks: Vec<f64> = Vec::new();
    let mut empty = Vec::new();
    for &(n, v) in sites {
        let h = 1.0 / v;
        while let Some(&(tn, th)) = stack.last() {
            let u = bisector(tn, th, n, h, level);
            match breaks.last() {
                Some(&prev) if prev >= u => {
                    empty.push(tn);
                    stack.pop();
                    breaks.pop();
                }
                _ => {
                    breaks.push(u);
                    break;
                }
            }
        }
        stack.push((n, h));
    }
    empty.sort_unstable();
    let tiles = stack
        .iter()
        .enumerate()
        .map(|(i, &(label, _))| Tile {
            label,
            a: if i == 0 { f64::NEG_INFINITY } else { breaks[i - 1] },
            b: breaks.get(i).copied().unwrap_or(f64::INFINITY),
        })
        .collect();
    Ok(IntervalTiling {
        level,
        valid: (lo, hi),
        tiles,
        empty,
    })
}

/// `r`-neighbourhood of the endpoints, as merged intervals clipped to the
/// valid window shrunk by `rho`.
pub fn boundary_set(tiling: &IntervalTiling, rho: f64) -> Vec<(f64, f64)> {
    let (lo, hi) = (tiling.valid.0 + rho, tiling.valid.1 - rho);
    let mut out: Vec<(f64, f64)> = Vec::new();
    if rho <= 0.0 || lo >= hi {
        return out;
    }
    for e in tiling.endpoints() {
        let (a, b) = ((e - rho).max(lo), (e + rho).min(hi));
        if a >= b {
            continue;
        }
        match out.last_mut() {
            Some(last) if last.1 >= a => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Measure of the `rho`-boundary inside `[lo, hi]` divided by `hi - lo`.
pub fn boundary_density_in(tiling: &IntervalTiling, rho: f64, lo: f64, hi: f64) -> Result<f64> {
    if rho <= 0.0 {
        return Ok(0.0);
    }
    tiling.check_within(lo - rho, hi + rho)?;
    let covered: f64 = boundary_set(tiling, rho)
        .iter()
        .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
        .sum();
    Ok(covered / (hi - lo))
}

/// Density of the `rho`-boundary on `[-r_window, r_window]`.
pub fn boundary_density(tiling: &IntervalTiling, rho: f64, r_window: f64) -> Result<f64> {
    if !(r_window > 0.0) {
        return Err(Error::Precondition("density window must be positive".into()));
    }
    boundary_density_in(tiling, rho, -r_window, r_window)
}

/// Measure of a tile minus the `rho`-neighbourhoods of its endpoints.
pub fn interior_measure(tile: &Tile, rho: f64) -> f64 {
    (tile.len() - 2.0 * rho).max(0.0)
}

/// The tile selected near 0 and the checks made on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GoodTile {
    pub label: i64,
    /// Tile of `label` in the lower slice, if nonempty.
    pub tile: Option<Tile>,
    /// The tile has a point at distance more than `r` from its endpoints.
    pub deep_interior: bool,
    /// The tile lies in `[-(2 M1 + 2), 2 M1 + 2]`.
    pub contained: bool,
}

impl GoodTile {
    pub fn ok(&self) -> bool {
        self.deep_interior && self.contained
    }
}

/// Select the label whose upper-slice tile contains 0 (ties: longer tile,
/// then smaller label) and check its lower-slice tile.
pub fn good_tile(lower: &IntervalTiling, upper: &IntervalTiling, params: &TilingParams) -> Result<GoodTile> {
    good_tile_at(lower, upper, params, 0)
}

/// [`good_tile`] for the point `T^t x`, read off the tilings of `x`; labels
/// and intervals stay in the frame of `x`.
pub fn good_tile_at(lower: &IntervalTiling, upper: &IntervalTiling, params: &TilingParams, t: i64) -> Result<GoodTile> {
    let k = params.good_radius() as f64;
    let c = t as f64;
    lower.check_within(c - k, c + k)?;
    upper.check_within(c - k, c + k)?;
    let label = upper
        .tiles()
        .iter()
        .filter(|tile| tile.contains(c) && tile.len() > 0.0)
        .max_by(|x, y| x.len().total_cmp(&y.len()).then(y.label.cmp(&x.label)))
        .map(|t| t.label)
        .ok_or_else(|| Error::Tiling("no tile contains 0".into()))?;
    let tile = match lower.tile_of(label) {
        TileState::Nonempty(t) => Some(t),
        _ => None,
    };
    let deep_interior = tile.is_some_and(|t| t.len() > 2.0 * params.r);
    let contained = tile.is_some_and(|t| t.a >= c - k && t.b <= c + k);
    Ok(GoodTile {
        label,
        tile,
        deep_interior,
        contained,
    })
}

/// Outcome of comparing a tiling with the tiling of a shifted point.
#[derive(Clone, Debug, PartialEq)]
pub struct Equivariance {
    pub ok: bool,
    /// First label (in the shifted frame) whose tile disagrees.
    pub first_mismatch: Option<i64>,
}

/// Compare the tiling of `shifted` (the sequence of `T^k x`) with the tiling
/// of `seq` translated by `-k` and relabelled, on the largest window both
/// certify, to within `1e-9` per endpoint.
pub fn check_equivariance(
    seq: &MarkerSequence,
    shifted: &MarkerSequence,
    params: &TilingParams,
    level: f64,
    k: i64,
) -> Result<Equivariance> {
    let margin = params.locality().max(seq.m1() as i64 + 1);
    let (a0, a1) = seq.window();
    let (b0, b1) = shifted.window();
    let lo = (a0 - k).max(b0) + margin;
    let hi = (a1 - k).min(b1) - margin;
    if lo >= hi {
        return Err(Error::Precondition("sequence windows too short to compare".into()));
    }
    let base = slice_tiling(seq, params, level, (lo + k) as f64, (hi + k) as f64)?;
    let moved = slice_tiling(shifted, params, level, lo as f64, hi as f64)?;
    let expected: Vec<Tile> = base
        .clipped_tiles()
        .into_iter()
        .map(|t| Tile {
            label: t.label - k,
            a: t.a - k as f64,
            b: t.b - k as f64,
        })
        .collect();
    let actual = moved.clipped_tiles();
    for (i, e) in expected.iter().enumerate() {
        match actual.get(i) {
            Some(a) if a.label == e.label && (a.a - e.a).abs() <= 1e-9 && (a.b - e.b).abs() <= 1e-9 => {}
            Some(a) => {
                return Ok(Equivariance {
                    ok: false,
                    first_mismatch: Some(a.label.min(e.label)),
                })
            }
            None => {
                return Ok(Equivariance {
                    ok: false,
                    first_mismatch: Some(e.label),
                })
            }
        }
    }
    if let Some(extra) = actual.get(expected.len()) {
        return Ok(Equivariance {
            ok: false,
            first_mismatch: Some(extra.label),
        });
    }
    Ok(Equivariance {
        ok: true,
        first_mismatch: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn periodic(period: i64, lo: i64, hi: i64) -> MarkerSequence {
        let support = (lo..=hi).filter(|n| n.rem_euclid(period) == 0).map(|n| (n, 1.0)).collect();
        MarkerSequence::new(lo, hi, support, period as u64, period as u64).unwrap()
    }

    fn loose_params(m: u64, m1: u64) -> TilingParams {
        TilingParams {
            r: 1.0,
            delta: 0.5,
            c: 1.5,
            big_r: 9.0,
            m,
            m1,
            h: ((m1 + 1) * (m1 + 1)) as f64,
        }
    }

    #[test]
    fn bisector_example() {
        assert_abs_diff_eq!(bisector(0, 1.0, 10, 2.0, 100.0), 15.15, epsilon = 1e-12);
        let literal = 5.0 + (102.0f64.powi(2) - 101.0f64.powi(2)) / 20.0;
        assert_abs_diff_eq!(bisector(0, 1.0, 10, 2.0, 100.0), literal, epsilon = 1e-12);
    }

    #[test]
    fn bisector_matches_planar_distances() {
        let (n, hn, m, hm, level) = (3, 1.7, 11, 1.05, 49.0);
        let u = bisector(n, hn, m, hm, level);
        let d = |s: i64, h: f64| ((u - s as f64).powi(2) + (level + h).powi(2)).sqrt();
        assert_abs_diff_eq!(d(n, hn), d(m, hm), epsilon = 1e-9);
    }

    #[test]
    fn sweep_matches_pointwise_queries() {
        let seq = periodic(10, -100, 100);
        let params = loose_params(10, 10);
        let t = slice_tiling(&seq, &params, params.h, -50.0, 50.0).unwrap();
        for (k, label, d) in t.sweep(-40, 40) {
            assert_eq!(label, t.interior_label(k as f64));
            assert_eq!(d, t.dist_to_boundary(k as f64));
        }
    }

    #[test]
    fn periodic_sites_give_midpoint_tiles() {
        let seq = periodic(10, -100, 100);
        let params = loose_params(10, 10);
        let t = slice_tiling(&seq, &params, params.h, -50.0, 50.0).unwrap();
        match t.tile_of(0) {
            TileState::Nonempty(tile) => {
                assert_abs_diff_eq!(tile.a, -5.0, epsilon = 1e-9);
                assert_abs_diff_eq!(tile.b, 5.0, epsilon = 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
        let g = good_tile(&t, &slice_tiling(&seq, &params, params.ch(), -50.0, 50.0).unwrap(), &params).unwrap();
        assert_eq!(g.label, 0);
        assert!(g.contained);
    }

    #[test]
    fn low_marker_values_lose_their_tile() {
        // a weak site between two full ones is swallowed on a deep slice
        let seq = MarkerSequence::new(-60, 60, vec![(-10, 1.0), (0, 0.3), (10, 1.0)], 10, 30).unwrap();
        let params = loose_params(10, 30);
        let t = slice_tiling(&seq, &params, params.h, -20.0, 20.0).unwrap();
        assert_eq!(t.tile_of(0), TileState::Empty);
        assert_eq!(t.tile_of(5), TileState::NotASite);
        assert_abs_diff_eq!(t.dist_to_boundary(0.0), 0.0, epsilon = 1e-9);
        assert_eq!(t.interior_label(0.0), None);
        assert_eq!(t.interior_label(1.0), Some(10));
    }

    #[test]
    fn boundary_examples() {
        let tiles: Vec<Tile> = (-10..=10)
            .map(|k| Tile {
                label: 10 * k,
                a: if k == -10 { f64::NEG_INFINITY } else { 10.0 * k as f64 - 5.0 },
                b: if k == 10 { f64::INFINITY } else { 10.0 * k as f64 + 5.0 },
            })
            .collect();
        let t = IntervalTiling::from_tiles(1.0, (-50.0, 50.0), tiles, vec![]).unwrap();
        let set = boundary_set(&t, 1.0);
        assert!(set.contains(&(4.0, 6.0)) && set.contains(&(-6.0, -4.0)));
        assert_abs_diff_eq!(boundary_density(&t, 1.0, 30.0).unwrap(), 0.2, epsilon = 1e-12);
        assert_eq!(boundary_density(&t, 0.0, 30.0).unwrap(), 0.0);
        assert!(boundary_density(&t, 1.0, 60.0).is_err());
        let small = boundary_density(&t, 1e-6, 30.0).unwrap();
        assert!(small < 1e-6);

        let single = vec![
            Tile { label: -5, a: f64::NEG_INFINITY, b: 0.0 },
            Tile { label: 5, a: 0.0, b: 10.0 },
            Tile { label: 15, a: 10.0, b: f64::INFINITY },
        ];
        let t = IntervalTiling::from_tiles(1.0, (-20.0, 30.0), single, vec![]).unwrap();
        assert_eq!(boundary_set(&t, 2.0), vec![(-2.0, 2.0), (8.0, 12.0)]);
    }

    #[test]
    fn m_bound_and_auto_c() {
        let c = auto_c(9.0, 0.2);
        assert!(c > 1.0 && c < 1.25);
        let best = m_bound(9.0, 0.2, c);
        for other in [1.05, 1.1, 1.2, 1.24] {
            assert!(m_bound(9.0, 0.2, other) >= best - 1e-9);
        }
        assert!(TilingParams::new(9.0, 0.2, None, min_m(9.0, 0.2, c) - 1, 10_000).is_err());
        assert!(TilingParams::new(9.0, 0.2, None, min_m(9.0, 0.2, c), 10_000).is_ok());
        assert!(TilingParams::new(9.0, 0.2, Some(1.3), 10_000, 20_000).is_err());
    }

    #[test]
    fn margins_are_enforced() {
        let seq = periodic(10, -100, 100);
        let params = loose_params(10, 10);
        assert!(matches!(slice_tiling(&seq, &params, 5.0, -95.0, 50.0), Err(Error::Range { .. })));
        let bad = seq.with_value(3, 0.4);
        assert!(matches!(
            slice_tiling(&bad, &params, 5.0, -50.0, 50.0),
            Err(Error::MarkerSeparation { .. })
        ));
    }

    #[test]
    fn equivariance_detects_corruption() {
        let seq = MarkerSequence::new(
            -200,
            200,
            (-20..=20).map(|k| (10 * k, if k % 3 == 0 { 1.0 } else { 0.8 })).collect(),
            10,
            30,
        )
        .unwrap();
        let params = loose_params(10, 30);
        let shifted = seq.shifted(7);
        assert!(check_equivariance(&seq, &seq, &params, params.h, 0).unwrap().ok);
        assert!(check_equivariance(&seq, &shifted, &params, params.h, 7).unwrap().ok);
        let corrupted = shifted.with_value(-7, 0.55);
        let res = check_equivariance(&seq, &corrupted, &params, params.h, 7).unwrap();
        assert!(!res.ok);
        assert!(res.first_mismatch.is_some());
    }
}
