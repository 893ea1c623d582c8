//! Maps `F: X -> [0,1]^{m-1}` with small-width fibres.
//!
//! Every map here factors through the nerve of a cover of mesh below
//! `eps/2`: a partition of unity sends points into the nerve, and vertex
//! images in `[0,1]^{m-1}` are extended linearly over simplices (or
//! multilinearly over products of nerves). Fibre widths are checked with
//! the width solver on thickened sampled fibres.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynsys::{bowen_dist, OrbitWindow, System};
use crate::hash;
use crate::signal::BlockOracle;
use crate::widim::{
    min_multiplicity, nerve_and_projection, widim_orbit, Barycentric, Budget, CellCover, CellSpace, Mode, NerveComplex,
};
use crate::{Error, Result};

/// Largest product-nerve vertex set stored for orbit maps.
const MAX_PRODUCT_VERTICES: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Construction {
    LinearOnNerve,
    SearchedPl,
    Constant,
}

/// A map from a cell space into `[0,1]^{m-1}` through the nerve of a cover.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NerveFMap {
    pub construction: Construction,
    pub eps: f64,
    pub m: usize,
    pub nerve: NerveComplex,
    pub vertex_images: Vec<Vec<f64>>,
    pub cover: CellCover,
    #[serde(skip)]
    projection: Vec<Barycentric>,
    /// Touching element pairs whose images are closer than twice the fibre
    /// tolerance; search aims to bring this to zero.
    pub close_pairs: usize,
    pub unverified: bool,
}

fn fiber_tol(eps: f64) -> f64 {
    eps / 10.0
}

fn sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>()).collect()
}

/// Pairs of cover elements meeting at a feature.
fn touching_pairs(nerve: &NerveComplex) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = nerve
        .simplices
        .iter()
        .flat_map(|s| {
            s.iter()
                .enumerate()
                .flat_map(move |(i, &a)| s[i + 1..].iter().map(move |&b| (a, b)))
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn count_close(pairs: &[(usize, usize)], images: &[Vec<f64>], gap: f64) -> usize {
    pairs.iter().filter(|&&(a, b)| sup_dist(&images[a], &images[b]) <= gap).count()
}

impl NerveFMap {
    /// Cover `space` at mesh below `eps/2`, project onto the nerve and choose
    /// vertex images: a seeded generic draw, refined by local search for
    /// [`Construction::SearchedPl`].
    pub fn build(space: &CellSpace, eps: f64, m: usize, construction: Construction, budget: Budget, seed: u64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Config("m must be at least 2".into()));
        }
        let cover = min_multiplicity(space, eps / 2.0, Mode::Greedy, budget)?.cover;
        let (nerve, projection) = nerve_and_projection(space, &cover)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = m - 1;
        let mut images: Vec<Vec<f64>> = match construction {
            Construction::Constant => vec![vec![0.5; dim]; nerve.vertices],
            _ => (0..nerve.vertices).map(|_| random_point(&mut rng, dim)).collect(),
        };
        let pairs = touching_pairs(&nerve);
        let gap = 2.0 * fiber_tol(eps);
        let mut close = count_close(&pairs, &images, gap);
        if construction == Construction::SearchedPl {
            for _ in 0..budget.moves {
                if close == 0 {
                    break;
                }
                let bad: Vec<usize> = pairs
                    .iter()
                    .filter(|&&(a, b)| sup_dist(&images[a], &images[b]) <= gap)
                    .map(|&(a, _)| a)
                    .collect();
                let v = bad[rng.gen_range(0..bad.len())];
                let old = std::mem::replace(&mut images[v], random_point(&mut rng, dim));
                let next = count_close(&pairs, &images, gap);
                if next <= close {
                    close = next;
                } else {
                    images[v] = old;
                }
            }
        }
        Ok(Self {
            construction,
            eps,
            m,
            nerve,
            vertex_images: images,
            cover,
            projection,
            close_pairs: close,
            unverified: construction == Construction::SearchedPl && close > 0,
        })
    }

    /// Image of one atom.
    pub fn eval_atom(&self, atom: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.m - 1];
        for &(e, w) in &self.projection[atom] {
            for (o, v) in out.iter_mut().zip(&self.vertex_images[e]) {
                *o += w * v;
            }
        }
        out
    }

    /// Smallest nerve distance (sup norm of barycentric vectors) between
    /// atoms whose centres are at least `eps` apart; nerve distances below it
    /// imply distance below `eps` on the sampled atoms.
    pub fn transfer_delta(&self, space: &CellSpace) -> f64 {
        let centres: Vec<Vec<f64>> = space
            .atoms()
            .iter()
            .map(|a| a.lo.iter().zip(&a.hi).map(|(l, h)| 0.5 * (l + h)).collect())
            .collect();
        let bary_dist = |a: usize, b: usize| {
            let mut d = 0.0f64;
            for &(e, w) in &self.projection[a] {
                let other = self.projection[b].iter().find(|p| p.0 == e).map_or(0.0, |p| p.1);
                d = d.max((w - other).abs());
            }
            for &(e, w) in &self.projection[b] {
                if !self.projection[a].iter().any(|p| p.0 == e) {
                    d = d.max(w);
                }
            }
            d
        };
        let mut best = f64::INFINITY;
        for a in 0..space.len() {
            for b in a + 1..space.len() {
                let gap = space
                    .axes()
                    .iter()
                    .enumerate()
                    .map(|(d, ax)| ax.weight * (centres[a][d] - centres[b][d]).abs())
                    .fold(0.0, f64::max);
                if gap >= self.eps {
                    best = best.min(bary_dist(a, b));
                }
            }
        }
        best
    }
}

/// One probe of a fibre check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberProbe {
    pub probe: usize,
    pub fiber_size: usize,
    pub widim_upper: usize,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberReport {
    pub probes: Vec<FiberProbe>,
    pub bound: f64,
    pub violations: usize,
    /// Every probed fibre was empty; nothing was verified.
    pub vacuous: bool,
    pub transfer_delta: f64,
}

impl FiberReport {
    fn new(probes: Vec<FiberProbe>, bound: f64, transfer_delta: f64) -> Self {
        let violations = probes.iter().filter(|p| !p.pass).count();
        let vacuous = probes.iter().all(|p| p.fiber_size == 0);
        Self {
            probes,
            bound,
            violations,
            vacuous,
            transfer_delta,
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && !self.vacuous
    }
}

/// Check `Widim_eps(F^-1(p)) <= Widim_{eps/2}(space) / m` on thickened
/// fibres of half uniform, half pushed-forward probes.
pub fn verify_fiber_bound(fmap: &NerveFMap, space: &CellSpace, probe_count: usize, seed: u64) -> Result<FiberReport> {
    let eps = fmap.eps;
    let half = min_multiplicity(space, eps / 2.0, Mode::Greedy, Budget::default())?;
    let bound = half.widim_upper as f64 / fmap.m as f64;
    let images: Vec<Vec<f64>> = (0..space.len()).map(|a| fmap.eval_atom(a)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = fiber_tol(eps);
    let mut probes = Vec::with_capacity(probe_count);
    for i in 0..probe_count {
        let p = if i % 2 == 0 {
            random_point(&mut rng, fmap.m - 1)
        } else {
            images[rng.gen_range(0..images.len())].clone()
        };
        let fiber: Vec<usize> = (0..space.len()).filter(|&a| sup_dist(&images[a], &p) <= tol).collect();
        let widim_upper = if fiber.is_empty() {
            0
        } else {
            min_multiplicity(&space.subspace(&fiber)?, eps, Mode::Greedy, Budget::default())?.widim_upper
        };
        probes.push(FiberProbe {
            probe: i,
            fiber_size: fiber.len(),
            widim_upper,
            bound,
            pass: widim_upper as f64 <= bound,
        });
    }
    Ok(FiberReport::new(probes, bound, fmap.transfer_delta(space)))
}

/// Cover of one coordinate of the orbit metric by `pieces` overlapping
/// intervals (or arcs on the circle).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitFactor {
    pub coordinate: Option<(i64, usize)>,
    pub weight: f64,
    pub pieces: usize,
}

impl OrbitFactor {
    fn overlap(&self) -> f64 {
        0.25 / self.pieces as f64
    }

    /// Nonzero partition-of-unity weights at `v`.
    fn weights(&self, v: f64) -> Vec<(usize, f64)> {
        let q = self.pieces;
        let ov = self.overlap();
        let step = 1.0 / q as f64;
        let cyclic = self.coordinate.is_none();
        let mut out = Vec::with_capacity(2);
        let base = ((v * q as f64) as usize).min(q - 1);
        for idx in [base as i64 - 1, base as i64, base as i64 + 1] {
            let i = if cyclic {
                idx.rem_euclid(q as i64) as usize
            } else if idx < 0 || idx >= q as i64 {
                continue;
            } else {
                idx as usize
            };
            let (lo, hi) = (idx as f64 * step - ov, (idx + 1) as f64 * step + ov);
            let left = if !cyclic && i == 0 { f64::INFINITY } else { v - lo };
            let right = if !cyclic && i == q - 1 { f64::INFINITY } else { hi - v };
            let w = left.min(right).min(ov);
            if w > 0.0 && !out.iter().any(|p: &(usize, f64)| p.0 == i) {
                out.push((i, w));
            }
        }
        let total: f64 = out.iter().map(|p| p.1).sum();
        out.iter_mut().for_each(|p| p.1 /= total);
        out
    }
}

/// `F = G o f` for orbit points: `f` is the product of per-coordinate nerve
/// projections for the Bowen metric at `eps/2`, `G` is multilinear on the
/// product of nerves with seeded generic vertex images.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitFMap {
    pub eps: f64,
    pub horizon: u64,
    pub m: usize,
    pub factors: Vec<OrbitFactor>,
    #[serde(skip)]
    images: Vec<f64>,
    pub seed: u64,
}

impl OrbitFMap {
    pub fn build(system: &System, eps: f64, horizon: u64, m: usize, seed: u64) -> Result<Self> {
        if m < 2 || horizon == 0 || !(eps > 0.0) {
            return Err(Error::Config("block map needs m >= 2, a positive horizon and eps".into()));
        }
        let half = eps / 2.0;
        let pieces = |w: f64| ((2.0 * w / half).ceil() as usize).max(3);
        let mut factors = Vec::new();
        if half <= 0.5 {
            factors.push(OrbitFactor {
                coordinate: None,
                weight: 1.0,
                pieces: pieces(1.0),
            });
        }
        let t = system.truncation_radius();
        for j in -t..(horizon as i64 + t) {
            let w = system.bowen_weight(j, horizon);
            if w < half {
                continue;
            }
            for c in 0..system.dim() {
                factors.push(OrbitFactor {
                    coordinate: Some((j, c)),
                    weight: w,
                    pieces: pieces(w),
                });
            }
        }
        let vertices = factors
            .iter()
            .try_fold(1usize, |acc, f| acc.checked_mul(f.pieces))
            .filter(|&v| v <= MAX_PRODUCT_VERTICES)
            .ok_or_else(|| Error::Config("product nerve too large; raise eps or lower the horizon".into()))?;
        let dim = m - 1;
        let images = (0..vertices * dim)
            .map(|i| hash::unit(hash::mix(&[seed, i as u64])))
            .collect();
        Ok(Self {
            eps,
            horizon,
            m,
            factors,
            images,
            seed,
        })
    }

    /// Smallest and largest cube time the map reads, relative to the point.
    pub fn coordinate_span(&self) -> Option<(i64, i64)> {
        let times = self.factors.iter().filter_map(|f| f.coordinate.map(|c| c.0));
        Some((times.clone().min()?, times.max()?))
    }

    pub fn vertex_count(&self) -> usize {
        self.images.len() / (self.m - 1)
    }

    /// Product-nerve coordinates of `x`: `(vertex, weight)` pairs.
    pub fn project(&self, x: &OrbitWindow) -> Vec<(usize, f64)> {
        let mut terms = vec![(0usize, 1.0f64)];
        for f in &self.factors {
            let v = match f.coordinate {
                None => x.circle().to_f64(),
                Some((j, c)) => x.coord(j, c),
            };
            let ws = f.weights(v);
            terms = terms
                .iter()
                .flat_map(|&(idx, w)| ws.iter().map(move |&(i, wi)| (idx * f.pieces + i, w * wi)))
                .collect();
        }
        terms
    }

    /// Largest sup-distance between product-nerve coordinates of pairs at
    /// Bowen distance at least `eps`, minimised: below it the nerve map
    /// separates no such pair.
    pub fn transfer_delta(&self, samples: &[OrbitWindow]) -> Result<f64> {
        let proj: Vec<Vec<(usize, f64)>> = samples.iter().map(|x| self.project(x)).collect();
        let mut best = f64::INFINITY;
        for a in 0..samples.len() {
            for b in a + 1..samples.len() {
                if bowen_dist(&samples[a], &samples[b], self.horizon)? < self.eps {
                    continue;
                }
                let mut d = 0.0f64;
                for &(v, w) in &proj[a] {
                    let o = proj[b].iter().find(|p| p.0 == v).map_or(0.0, |p| p.1);
                    d = d.max((w - o).abs());
                }
                for &(v, w) in &proj[b] {
                    if !proj[a].iter().any(|p| p.0 == v) {
                        d = d.max(w);
                    }
                }
                best = best.min(d);
            }
        }
        Ok(best)
    }
}

impl BlockOracle for OrbitFMap {
    fn out_dim(&self) -> usize {
        self.m - 1
    }

    fn eval(&self, x: &OrbitWindow) -> Result<Vec<f64>> {
        let dim = self.m - 1;
        let mut out = vec![0.0; dim];
        for (v, w) in self.project(x) {
            for (o, img) in out.iter_mut().zip(&self.images[v * dim..(v + 1) * dim]) {
                *o += w * img;
            }
        }
        Ok(out)
    }
}

/// Fibre check for an orbit map: thickened fibres among `samples`, width by
/// the orbit solver, against `widim_half / m` where `widim_half` bounds
/// `Widim_{eps/2}(X, d_n)`.
pub fn verify_orbit_fiber_bound(
    fmap: &OrbitFMap,
    samples: &[OrbitWindow],
    widim_half: usize,
    probe_count: usize,
    seed: u64,
) -> Result<FiberReport> {
    let bound = widim_half as f64 / fmap.m as f64;
    let images: Vec<Vec<f64>> = samples.iter().map(|x| fmap.eval(x)).collect::<Result<_>>()?;
    let tol = fiber_tol(fmap.eps);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut probes = Vec::with_capacity(probe_count);
    for i in 0..probe_count {
        let p = if i % 2 == 0 {
            random_point(&mut rng, fmap.m - 1)
        } else {
            images[rng.gen_range(0..images.len())].clone()
        };
        let fiber: Vec<OrbitWindow> = samples
            .iter()
            .zip(&images)
            .filter(|(_, img)| sup_dist(img, &p) <= tol)
            .map(|(x, _)| x.clone())
            .collect();
        let widim_upper = if fiber.is_empty() {
            0
        } else {
            widim_orbit(&fiber, fmap.horizon, fmap.eps)?.widim_upper
        };
        probes.push(FiberProbe {
            probe: i,
            fiber_size: fiber.len(),
            widim_upper,
            bound,
            pass: widim_upper as f64 <= bound,
        });
    }
    let delta = fmap.transfer_delta(&samples[..samples.len().min(300)])?;
    Ok(FiberReport::new(probes, bound, delta))
}

/// Calibration complexes realised as cell spaces.
pub fn calibration_complexes() -> Result<Vec<(&'static str, CellSpace)>> {
    let square = CellSpace::grid(2, 0.0, 1.0, 5)?;
    let triangle_atoms: Vec<usize> = square
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| a.grid.as_ref().is_some_and(|g| g[0] + g[1] < 5))
        .map(|(i, _)| i)
        .collect();
    Ok(vec![
        ("edge", CellSpace::grid(1, 0.0, 1.0, 10)?),
        ("path", CellSpace::grid(1, 0.0, 3.0, 30)?),
        ("triangle", square.subspace(&triangle_atoms)?),
        ("grid2x2", CellSpace::grid(2, 0.0, 2.0, 10)?),
    ])
}
