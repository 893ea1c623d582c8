//! Marker data on the circle factor.
//!
//! `U` is the open arc of radius `arc_radius` around `arc_center` (times any
//! cube part) and `F` the closed sub-arc of radius `inner_radius`. The marker
//! function is 1 on `F`, 0 off `U` and a linear ramp in between.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dynsys::{CirclePoint, OrbitWindow, System, CIRCLE_TICKS};
use crate::{Error, Result};

/// Largest return time searched for `M`.
const M_SEARCH_LIMIT: u64 = 100_000_000;
/// Largest first-entry time searched for `M1`.
const M1_SEARCH_LIMIT: u64 = 1 << 24;
/// Arc radius used by automatic markers, as a fraction of the closest
/// approach of `k theta` to 0 for `0 < k < M`.
const AUTO_ARC_FRACTION: f64 = 0.45;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerSpec {
    pub arc_center: f64,
    pub arc_radius: f64,
    pub inner_radius: f64,
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "M1")]
    pub m1: u64,
}

fn to_ticks(r: f64) -> u64 {
    (r * CIRCLE_TICKS as f64).round() as u64
}

impl MarkerSpec {
    /// Build a spec for the given arcs with `M` and `M1` computed exactly.
    pub fn from_arcs(system: &System, arc_center: f64, arc_radius: f64, inner_radius: f64) -> Result<Self> {
        let (m, m1) = compute_m_m1(system, arc_radius, inner_radius)?;
        Ok(Self {
            arc_center: arc_center.rem_euclid(1.0),
            arc_radius,
            inner_radius,
            m,
            m1,
        })
    }

    /// Marker whose separation constant is at least `min_m`, with the arc
    /// centred at 0 and the inner arc half as wide.
    pub fn auto(system: &System, min_m: u64) -> Result<Self> {
        let min_m = min_m.max(2);
        if min_m > M_SEARCH_LIMIT {
            return Err(Error::Marker(format!("requested M = {min_m} exceeds the search limit")));
        }
        let p = system.theta_ticks();
        let closest = (1..min_m)
            .map(|k| CirclePoint::from_ticks(0).rotate(p, k as i64).ticks())
            .map(|t| t.min(CIRCLE_TICKS - t))
            .min()
            .unwrap_or(CIRCLE_TICKS / 2);
        let radius = AUTO_ARC_FRACTION * closest as f64 / CIRCLE_TICKS as f64;
        Self::from_arcs(system, 0.0, radius, radius / 2.0)
    }

    /// Check a user-supplied spec against the exact constants: `M` may not
    /// exceed the true separation and `M1` may not undercut the true entry
    /// time.
    pub fn validate(&self, system: &System) -> Result<()> {
        let (m, m1) = compute_m_m1(system, self.arc_radius, self.inner_radius)?;
        if self.m < 2 || self.m > m {
            return Err(Error::Marker(format!(
                "M = {} is not valid for these arcs (separation holds up to {m})",
                self.m
            )));
        }
        if self.m1 < m1 || self.m1 <= self.m {
            return Err(Error::Marker(format!(
                "M1 = {} is too small (first entry needs {m1}, and M1 > M)",
                self.m1
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> CirclePoint {
        CirclePoint::from_f64(self.arc_center)
    }

    fn radius_ticks(&self) -> u64 {
        to_ticks(self.arc_radius)
    }

    fn inner_ticks(&self) -> u64 {
        to_ticks(self.inner_radius)
    }

    /// Marker value at a circle point.
    pub fn phi_circle(&self, c: CirclePoint) -> f64 {
        let d = c.arc_ticks(self.center());
        let (outer, inner) = (self.radius_ticks(), self.inner_ticks());
        if d <= inner {
            1.0
        } else if d >= outer {
            0.0
        } else {
            (outer - d) as f64 / (outer - inner) as f64
        }
    }

    /// Lipschitz constant of the ramp with respect to arc distance.
    pub fn ramp_slope(&self) -> f64 {
        1.0 / (self.arc_radius - self.inner_radius)
    }
}

/// The marker function. Depends only on the circle coordinate.
pub fn phi_eval(spec: &MarkerSpec, x: &OrbitWindow) -> f64 {
    spec.phi_circle(x.circle())
}

fn validate_arcs(arc_radius: f64, inner_radius: f64) -> Result<()> {
    if !(arc_radius > 0.0) {
        return Err(Error::Marker("arc_radius must be positive".into()));
    }
    if !(inner_radius > 0.0 && inner_radius < arc_radius) {
        return Err(Error::Marker("inner_radius must lie in (0, arc_radius)".into()));
    }
    if to_ticks(inner_radius) == 0 || to_ticks(inner_radius) >= to_ticks(arc_radius) {
        return Err(Error::Marker("arc radii are below circle resolution".into()));
    }
    Ok(())
}

/// First `k >= 1` with `arcdist(k theta, 0) <= 2 arc_radius`. For `0 < k < M`
/// the arc and its `k`-th rotate are disjoint.
pub fn separation_constant(system: &System, arc_radius: f64) -> Result<u64> {
    let p = system.theta_ticks();
    let diameter = 2 * to_ticks(arc_radius);
    let mut pos = 0u64;
    for k in 1..=M_SEARCH_LIMIT {
        pos = (pos + p) % CIRCLE_TICKS;
        if pos.min(CIRCLE_TICKS - pos) <= diameter {
            return Ok(k);
        }
    }
    Err(Error::Marker(format!(
        "no return within {M_SEARCH_LIMIT} steps; choose a smaller arc"
    )))
}

/// Whether the closed arcs of radius `inner` around `-k theta`, `0 <= k <= k_max`,
/// cover the circle.
fn arcs_cover(p: u64, inner: u64, k_max: u64) -> bool {
    let mut centers: Vec<u64> = Vec::with_capacity(k_max as usize + 1);
    let step = CIRCLE_TICKS - p;
    let mut pos = 0u64;
    for _ in 0..=k_max {
        centers.push(pos);
        pos = (pos + step) % CIRCLE_TICKS;
    }
    centers.sort_unstable();
    let wrap = centers[0] + CIRCLE_TICKS - centers[centers.len() - 1];
    let max_gap = centers.windows(2).map(|w| w[1] - w[0]).fold(wrap, u64::max);
    max_gap <= 2 * inner
}

/// Smallest `K` such that every circle point enters the inner arc within `K`
/// forward steps. Backward entry has the same bound because `{-k theta}` and
/// `{k theta}` are mirror images, so their gap structure coincides.
pub fn entry_time(system: &System, inner_radius: f64) -> Result<u64> {
    let p = system.theta_ticks();
    let inner = to_ticks(inner_radius);
    if 2 * inner >= CIRCLE_TICKS {
        return Ok(0);
    }
    let mut hi = 1u64;
    while !arcs_cover(p, inner, hi) {
        if hi >= M1_SEARCH_LIMIT {
            return Err(Error::Marker(format!(
                "inner arc needs more than {M1_SEARCH_LIMIT} steps to cover the circle; choose a larger arc"
            )));
        }
        hi *= 2;
    }
    let mut lo = hi / 2;
    // invariant: arcs_cover(hi) and (lo == 0 or !arcs_cover(lo))
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if arcs_cover(p, inner, mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if lo == 0 && arcs_cover(p, inner, 0) {
        return Ok(0);
    }
    Ok(hi)
}

/// Exact `(M, M1)` for the given arcs, with `M1` one more than the first-entry
/// time and forced above `M`.
pub fn compute_m_m1(system: &System, arc_radius: f64, inner_radius: f64) -> Result<(u64, u64)> {
    validate_arcs(arc_radius, inner_radius)?;
    let m = separation_constant(system, arc_radius)?;
    if m < 2 {
        return Err(Error::Marker(format!(
            "arc of radius {arc_radius} meets its first rotate (M = {m}); M >= 2 required"
        )));
    }
    let m1 = (entry_time(system, inner_radius)? + 1).max(m + 1);
    Ok((m, m1))
}

/// A point inside `F` and a point outside `U`, both with zero cube part.
pub fn pick_z_zprime(spec: &MarkerSpec, system: &Arc<System>) -> (OrbitWindow, OrbitWindow) {
    let z = OrbitWindow::zero(system, spec.center());
    let zp = OrbitWindow::zero(system, spec.center().offset((CIRCLE_TICKS / 2) as i64));
    (z, zp)
}

/// Values `n -> phi(T^n x)` on an inclusive window, stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkerSequence {
    lo: i64,
    hi: i64,
    support: Vec<(i64, f64)>,
    m: u64,
    m1: u64,
}

impl MarkerSequence {
    /// Validated sequence from its positive values.
    pub fn new(lo: i64, hi: i64, mut support: Vec<(i64, f64)>, m: u64, m1: u64) -> Result<Self> {
        if lo > hi {
            return Err(Error::Precondition(format!("empty window [{lo}, {hi}]")));
        }
        support.retain(|&(_, v)| v > 0.0);
        support.sort_by_key(|&(n, _)| n);
        if support.iter().any(|&(n, v)| n < lo || n > hi || v > 1.0) {
            return Err(Error::Marker("support entry outside window or above 1".into()));
        }
        let seq = Self { lo, hi, support, m, m1 };
        seq.check_invariants()?;
        Ok(seq)
    }

    pub fn window(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn m1(&self) -> u64 {
        self.m1
    }

    /// Times with positive value, in increasing order.
    pub fn support(&self) -> &[(i64, f64)] {
        &self.support
    }

    pub fn value(&self, n: i64) -> f64 {
        match self.support.binary_search_by_key(&n, |&(t, _)| t) {
            Ok(i) => self.support[i].1,
            Err(_) => 0.0,
        }
    }

    /// Sequence of `T^k x`: value at `n` equals `self.value(n + k)`.
    pub fn shifted(&self, k: i64) -> Self {
        Self {
            lo: self.lo - k,
            hi: self.hi - k,
            support: self.support.iter().map(|&(n, v)| (n - k, v)).collect(),
            m: self.m,
            m1: self.m1,
        }
    }

    /// Restriction to a sub-window.
    pub fn restricted(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo < self.lo || hi > self.hi || lo > hi {
            return Err(Error::Range {
                requested: if lo < self.lo { lo } else { hi },
                min: self.lo,
                max: self.hi,
            });
        }
        Ok(Self {
            lo,
            hi,
            support: self.support.iter().copied().filter(|&(n, _)| n >= lo && n <= hi).collect(),
            m: self.m,
            m1: self.m1,
        })
    }

    /// Copy with one value replaced, without re-checking invariants. Used to
    /// build perturbed sequences.
    pub fn with_value(&self, n: i64, v: f64) -> Self {
        let mut support: Vec<_> = self.support.iter().copied().filter(|&(t, _)| t != n).collect();
        if v > 0.0 {
            support.push((n, v));
            support.sort_by_key(|&(t, _)| t);
        }
        Self { support, ..self.clone() }
    }

    /// Separation of the support and syndeticity of the value-1 times.
    pub fn check_invariants(&self) -> Result<()> {
        for w in self.support.windows(2) {
            if ((w[1].0 - w[0].0) as u64) < self.m {
                return Err(Error::MarkerSeparation {
                    first: w[0].0,
                    second: w[1].0,
                });
            }
        }
        let span = 2 * self.m1 as i64;
        if self.hi - self.lo + 1 < span {
            return Ok(());
        }
        let mut prev = self.lo - 1;
        for t in self.support.iter().filter(|&&(_, v)| v == 1.0).map(|&(t, _)| t) {
            if t - prev - 1 >= span {
                return Err(Error::Marker(format!(
                    "no full marker between times {prev} and {t} (M1 = {})",
                    self.m1
                )));
            }
            prev = t;
        }
        if self.hi - prev >= span {
            return Err(Error::Marker(format!(
                "no full marker between times {prev} and {} (M1 = {})",
                self.hi, self.m1
            )));
        }
        Ok(())
    }

    /// Histogram of gaps between consecutive support times.
    pub fn gap_histogram(&self) -> BTreeMap<u64, u64> {
        let mut hist = BTreeMap::new();
        for w in self.support.windows(2) {
            *hist.entry((w[1].0 - w[0].0) as u64).or_insert(0) += 1;
        }
        hist
    }
}

/// `n -> phi(T^n x)` for `n` in `[lo, hi]`, checked against the marker
/// invariants.
pub fn marker_sequence(spec: &MarkerSpec, x: &OrbitWindow, lo: i64, hi: i64) -> Result<MarkerSequence> {
    x.check_times(lo, hi)?;
    let p = x.system().theta_ticks();
    let mut c = x.circle().rotate(p, lo).ticks();
    let center = spec.center();
    let outer = spec.radius_ticks();
    let mut support = Vec::new();
    for n in lo..=hi {
        let point = CirclePoint::from_ticks(c);
        if point.arc_ticks(center) < outer {
            support.push((n, spec.phi_circle(point)));
        }
        c += p;
        if c >= CIRCLE_TICKS {
            c -= CIRCLE_TICKS;
        }
    }
    MarkerSequence::new(lo, hi, support, spec.m, spec.m1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynsys::{sample_points, SystemSpec, DEFAULT_THETA};
    use approx::assert_abs_diff_eq;

    fn golden() -> Arc<System> {
        System::new(SystemSpec::default()).unwrap()
    }

    fn brute_force_m(theta: f64, radius: f64) -> u64 {
        (1..).find(|&k| {
            let f = (k as f64 * theta).rem_euclid(1.0);
            f.min(1.0 - f) <= 2.0 * radius
        }).unwrap()
    }

    #[test]
    fn golden_separation_matches_brute_force() {
        let sys = golden();
        let m = separation_constant(&sys, 0.01).unwrap();
        assert_eq!(m, brute_force_m(DEFAULT_THETA, 0.01));
        assert_eq!(m, 34);
        for r in [0.2, 0.05, 0.003, 0.0007] {
            assert_eq!(separation_constant(&sys, r).unwrap(), brute_force_m(DEFAULT_THETA, r));
        }
    }

    #[test]
    fn entry_time_matches_grid_scan() {
        let sys = golden();
        for inner in [0.05, 0.01, 0.004] {
            let k = entry_time(&sys, inner).unwrap();
            let spec = MarkerSpec {
                arc_center: 0.0,
                arc_radius: 2.0 * inner,
                inner_radius: inner,
                m: 2,
                m1: 3,
            };
            let grid = 20_000;
            let worst = (0..grid)
                .map(|i| {
                    let mut c = CirclePoint::from_f64(i as f64 / grid as f64);
                    let mut t = 0;
                    while spec.phi_circle(c) < 1.0 {
                        c = c.rotate(sys.theta_ticks(), 1);
                        t += 1;
                    }
                    t
                })
                .max()
                .unwrap();
            assert!(worst <= k, "grid needs {worst}, exact {k}");
            // a grid this fine finds the worst point up to a step or two
            assert!(k - worst <= 2, "grid {worst} vs exact {k}");
        }
    }

    #[test]
    fn degenerate_arcs_are_rejected() {
        let sys = golden();
        assert!(compute_m_m1(&sys, 0.45, 0.2).is_err());
        assert!(compute_m_m1(&sys, 0.01, 0.02).is_err());
        assert!(compute_m_m1(&sys, 0.0, 0.0).is_err());
        let (m, m1) = compute_m_m1(&sys, 0.01, 0.005).unwrap();
        assert!(m1 > m);
    }

    #[test]
    fn phi_examples() {
        let sys = golden();
        let spec = MarkerSpec::from_arcs(&sys, 0.3, 0.02, 0.01).unwrap();
        let (z, zp) = pick_z_zprime(&spec, &sys);
        assert_eq!(phi_eval(&spec, &z), 1.0);
        assert_eq!(phi_eval(&spec, &zp), 0.0);
        assert!(crate::dynsys::dist(&z, &zp).unwrap() > 0.0);
        let mid = z.with_circle(CirclePoint::from_f64(0.3 + 0.015));
        assert_abs_diff_eq!(phi_eval(&spec, &mid), 0.5, epsilon = 1e-12);
        let edge = z.with_circle(CirclePoint::from_f64(0.3 - 0.02));
        assert_eq!(phi_eval(&spec, &edge), 0.0);
    }

    #[test]
    fn phi_lipschitz_by_finite_differences() {
        let sys = golden();
        let spec = MarkerSpec::from_arcs(&sys, 0.0, 0.02, 0.01).unwrap();
        let step = 1e-5;
        for i in 0..10_000 {
            let a = CirclePoint::from_f64(-0.03 + i as f64 * step * 0.6);
            let b = a.offset((step * CIRCLE_TICKS as f64) as i64);
            let diff = (spec.phi_circle(a) - spec.phi_circle(b)).abs();
            assert!(diff <= spec.ramp_slope() * a.arcdist(b) + 1e-9);
        }
    }

    #[test]
    fn auto_marker_meets_requested_separation() {
        let sys = golden();
        for req in [2, 10, 182, 1000] {
            let spec = MarkerSpec::auto(&sys, req).unwrap();
            assert!(spec.m >= req, "M = {} < {req}", spec.m);
            spec.validate(&sys).unwrap();
        }
    }

    #[test]
    fn validate_rejects_overclaimed_constants() {
        let sys = golden();
        let mut spec = MarkerSpec::from_arcs(&sys, 0.0, 0.01, 0.005).unwrap();
        spec.m += 1;
        assert!(spec.validate(&sys).is_err());
        let mut spec = MarkerSpec::from_arcs(&sys, 0.0, 0.01, 0.005).unwrap();
        spec.m1 -= 1;
        assert!(spec.validate(&sys).is_err());
    }

    #[test]
    fn sequences_respect_gaps_and_shift() {
        let sys = golden();
        let spec = MarkerSpec::from_arcs(&sys, 0.0, 0.01, 0.005).unwrap();
        let span = 4 * spec.m1 as i64;
        for x in sample_points(&sys, 1000, 17).unwrap() {
            let seq = marker_sequence(&spec, &x, 0, span).unwrap();
            for (&gap, _) in seq.gap_histogram().iter() {
                assert!(gap >= spec.m && gap <= 2 * spec.m1, "gap {gap}");
            }
        }
        let x = &sample_points(&sys, 1, 2).unwrap()[0];
        let seq = marker_sequence(&spec, x, -span, span).unwrap();
        let tx = x.apply_shift(1).unwrap();
        let tseq = marker_sequence(&spec, &tx, -span, span - 1).unwrap();
        for n in -span..span {
            assert_eq!(tseq.value(n), seq.value(n + 1));
        }
        assert_eq!(seq.shifted(1).restricted(-span, span - 1).unwrap(), tseq);
    }

    #[test]
    fn window_outside_orbit_is_an_error() {
        let sys = System::new(SystemSpec::new(1, DEFAULT_THETA, 100, 0.5)).unwrap();
        let spec = MarkerSpec::from_arcs(&sys, 0.0, 0.01, 0.005).unwrap();
        let x = OrbitWindow::zero(&sys, CirclePoint::from_f64(0.0));
        assert!(matches!(marker_sequence(&spec, &x, 0, 101), Err(Error::Range { .. })));
    }

    #[test]
    fn unseparated_support_is_reported() {
        let err = MarkerSequence::new(0, 100, vec![(10, 1.0), (12, 0.5)], 5, 50).unwrap_err();
        assert_eq!(err, Error::MarkerSeparation { first: 10, second: 12 });
        assert!(MarkerSequence::new(0, 100, vec![(10, 1.0)], 5, 10).is_err());
    }
}
