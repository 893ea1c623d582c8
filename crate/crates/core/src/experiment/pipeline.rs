//! The factor pipeline: parameter selection, the statement suites on the
//! selected tiling, the block map, the fibre chain and the comparison of
//! mean dimensions across the factor.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AutoOr, ExperimentConfig};
use super::suite::{
    block_suite, separation, tiling_suite, BlockSuiteOptions, Check, Instance, Separation, TilingSuiteOptions,
};
use crate::dynsys::{sample_points, OrbitWindow, System};
use crate::fibre::{verify_orbit_fiber_bound, FiberReport, OrbitFMap};
use crate::hash;
use crate::marker::MarkerSpec;
use crate::signal::{
    alpha_block, block_admissible, block_start, gamma, pi_map, BlockOracle, FactorImage, GammaVariant, SignalParams,
};
use crate::tiling::{auto_c, min_m, TilingParams};
use crate::widim::{mdim_estimate, widim_orbit, MdimEstimate};
use crate::{Error, Result};

/// Largest horizon of the width series used for estimates.
pub const SERIES_HORIZON: u64 = 6;
/// Scale `r` of the tiling the standalone suites use when none is given.
pub const DEFAULT_R: f64 = 9.0;
/// Share of the admissible range taken for `delta'`.
const DELTA_PRIME_FRACTION: f64 = 0.9;

/// Marker and tiling constants for scale `r` and density `delta`.
pub fn tiling_setup(
    sys: &System,
    marker: &AutoOr<MarkerSpec>,
    r: f64,
    delta: f64,
    c: Option<f64>,
) -> Result<(MarkerSpec, TilingParams)> {
    if !(r > 0.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::Config(format!("tiling needs r > 0 and delta in (0,1), got r = {r}, delta = {delta}")));
    }
    let c_value = c.unwrap_or_else(|| auto_c(r, delta));
    let spec = match marker.value() {
        Some(spec) => {
            spec.validate(sys)?;
            spec.clone()
        }
        None => MarkerSpec::auto(sys, min_m(r, delta, c_value))?,
    };
    let params = TilingParams::new(r, delta, Some(c_value), spec.m, spec.m1)?;
    Ok((spec, params))
}

/// The tiling the standalone suites run on: configured `r` (default 9) and
/// `delta`.
pub fn base_tiling(config: &ExperimentConfig, sys: &System) -> Result<(MarkerSpec, TilingParams)> {
    let t = &config.tiling;
    tiling_setup(sys, &config.marker, t.r.unwrap_or(DEFAULT_R), t.delta, t.c)
}

/// `n -> Widim_eps(samples, d_n)` for `n` in `horizons`.
pub fn width_series(samples: &[OrbitWindow], horizons: impl IntoIterator<Item = u64>, eps: f64) -> Result<BTreeMap<u64, f64>> {
    let horizons: Vec<u64> = horizons.into_iter().collect();
    let widths: Vec<(u64, f64)> = horizons
        .into_par_iter()
        .map(|n| Ok((n, widim_orbit(samples, n, eps)?.widim_upper as f64)))
        .collect::<Result<_>>()?;
    Ok(widths.into_iter().collect())
}

/// Parameters chosen by the pipeline.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub eps: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub n_horizon: u64,
    pub m: usize,
    /// Upper estimate of the mean dimension at scale `eps/2`.
    pub mdim_half: f64,
    /// `Widim_{eps/2}(X, d_n)` at the chosen horizon.
    pub widim_half: usize,
    pub widim_half_series: BTreeMap<u64, f64>,
    pub marker: MarkerSpec,
    pub tiling: TilingParams,
    pub signal: SignalParams,
}

impl Resolved {
    /// The bound `Widim_{eps/2}(X, d_n) / (n m)` on fibre widths per step.
    pub fn fiber_bound(&self) -> f64 {
        self.widim_half as f64 / (self.n_horizon as f64 * self.m as f64)
    }
}

/// A system, its samples and the resolved parameters.
pub struct Setup {
    pub system: Arc<System>,
    pub samples: Vec<OrbitWindow>,
    pub resolved: Resolved,
}

/// Select `n`, `m`, `delta'`, the tiling and the marker from `config`.
pub fn resolve(config: &ExperimentConfig) -> Result<Setup> {
    config.check()?;
    let system = System::new(config.system.clone())?;
    let samples = sample_points(&system, config.sampling.count, config.sampling.seed)?;
    let eps = config.factor.eps;
    let delta = config.tiling.delta;
    let mut series = width_series(&samples, 1..=SERIES_HORIZON, eps / 2.0)?;
    let mdim_half = mdim_estimate(&series)?.fekete_upper;
    let n_horizon = match config.factor.n_horizon.value() {
        Some(&n) => n,
        None => series
            .iter()
            .find(|(&n, &w)| w / (n as f64) < mdim_half + 1.0)
            .map(|(&n, _)| n)
            .ok_or_else(|| Error::Config("no horizon meets the width-per-step rule".into()))?,
    };
    if !series.contains_key(&n_horizon) {
        series.extend(width_series(&samples, [n_horizon], eps / 2.0)?);
    }
    let widim_half = series[&n_horizon] as usize;
    let m_floor = (mdim_half + 1.0) / delta;
    let m = match config.factor.m.value() {
        Some(&m) if (m as f64) > m_floor => m,
        Some(&m) => {
            return Err(Error::Config(format!("factor.m = {m} must exceed (mdim + 1)/delta = {m_floor:.3}")));
        }
        None => m_floor.floor() as usize + 1,
    };
    let delta_prime = DELTA_PRIME_FRACTION * ((mdim_half + 1.0) / (2.0 * m as f64)).min(delta / 2.0);
    let r = config.tiling.r.unwrap_or(0.0).max(3.0 * m as f64);
    let (marker, tiling) = tiling_setup(&system, &config.marker, r, delta_prime, config.tiling.c)?;
    let signal = SignalParams::new(tiling.big_r, m, config.gamma)?;
    Ok(Setup {
        system,
        samples,
        resolved: Resolved {
            eps,
            delta,
            delta_prime,
            n_horizon,
            m,
            mdim_half,
            widim_half,
            widim_half_series: series,
            marker,
            tiling,
            signal,
        },
    })
}

#[derive(Clone, Debug)]
pub struct FiberChainOptions {
    pub probes: usize,
    /// Points per probe that agree with it wherever `pi` reads the orbit
    /// on the window and are drawn afresh elsewhere.
    pub completions: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainProbe {
    pub probe: usize,
    pub fiber_size: usize,
    /// Members found among the other samples rather than as completions.
    pub sampled_members: usize,
    pub widim_upper: usize,
    /// Strict bound `delta n` on the width.
    pub bound: f64,
    pub contained: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FiberChainReport {
    pub window: (i64, i64),
    pub tolerance: f64,
    pub horizon: u64,
    pub probes: Vec<ChainProbe>,
    /// Largest `Widim_eps(fibre, d_n) / n` seen.
    pub max_ratio: f64,
    pub containment: Check,
    pub width: Check,
}

fn sup_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn images_close(a: &FactorImage, b: &FactorImage, tol: f64) -> bool {
    a.phi.len() == b.phi.len() && sup_gap(&a.phi, &b.phi) <= tol && sup_gap(&a.g, &b.g) <= tol
}

struct Imaged {
    x: OrbitWindow,
    inst: Instance,
    image: FactorImage,
}

/// Times read by `pi` on `[lo, hi]` through the block map, as ranges.
fn read_times(inst: &Instance, lo: i64, hi: i64, signal: &SignalParams, span: (i64, i64)) -> Vec<(i64, i64)> {
    let mut starts: Vec<i64> = inst
        .lower
        .sweep(lo, hi)
        .filter_map(|(t, label, d)| {
            let b = label?;
            (alpha_block(d, signal.m) > 0.0).then(|| block_start(t, b, signal.m))
        })
        .collect();
    starts.dedup();
    starts.into_iter().map(|a| (a + span.0, a + span.1)).collect()
}

/// Whether some admissible block `[a, a + m - 2]`, `|a| <= k`, of `x`
/// carries `F(T^a x)` within `tol` of the block of `target` at `a`.
fn contained(x: &Imaged, target: &FactorImage, fmap: &OrbitFMap, signal: &SignalParams, k: i64, tol: f64) -> Result<bool> {
    let len = signal.m - 1;
    for step in 0..=2 * k {
        let a = if step % 2 == 0 { step / 2 } else { -(step + 1) / 2 };
        if !block_admissible(&x.inst.lower, a, signal) {
            continue;
        }
        let at = (a - target.lo) as usize;
        let f = fmap.eval(&x.x.apply_shift(a)?)?;
        if sup_gap(&f, &target.g[at..at + len]) <= tol {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Sample `pi`-fibres and check that each lies in the union of shifted
/// `F`-fibres over `|a| <= 2 M1 + 2` and has `Widim_eps(fibre, d_n) < delta n`.
pub fn fiber_chain(setup: &Setup, fmap: &OrbitFMap, opts: &FiberChainOptions) -> Result<FiberChainReport> {
    let r = &setup.resolved;
    let signal = &r.signal;
    let m = signal.m as i64;
    let k = r.tiling.good_radius();
    let (lo, hi) = (-k, k + m - 2);
    let half = hi + signal.g_reach().ceil() as i64 + r.tiling.big_r.ceil() as i64 + 2;
    let tol = r.eps / 10.0;
    let span = fmap
        .coordinate_span()
        .ok_or_else(|| Error::Precondition("block map reads no cube coordinates".into()))?;
    let image = |x: OrbitWindow| -> Result<Imaged> {
        let inst = Instance::build(&r.marker, &r.tiling, x.clone(), half)?;
        let image = pi_map(&x, &inst.lower, lo, hi, signal, fmap)?;
        Ok(Imaged { x, inst, image })
    };
    let imaged: Vec<Imaged> = setup.samples.par_iter().map(|x| image(x.clone())).collect::<Result<_>>()?;
    let probes = opts.probes.min(imaged.len());
    let n = r.n_horizon;
    let bound = r.delta * n as f64;
    let results: Vec<(ChainProbe, Check, Option<String>)> = (0..probes)
        .into_par_iter()
        .map(|p| {
            let base = &imaged[p];
            let target = &base.image;
            let mut members: Vec<&Imaged> = vec![base];
            let sampled: Vec<&Imaged> = imaged
                .iter()
                .enumerate()
                .filter(|&(j, other)| j != p && images_close(&other.image, target, tol))
                .map(|(_, other)| other)
                .collect();
            let sampled_members = sampled.len();
            members.extend(sampled);
            let keep = read_times(&base.inst, lo, hi, signal, span);
            let completions: Vec<Imaged> = (0..opts.completions)
                .map(|c| image(base.x.resampled_outside(&keep, hash::mix(&[opts.seed, p as u64, c as u64]))?))
                .collect::<Result<_>>()?;
            members.extend(completions.iter().filter(|c| images_close(&c.image, target, tol)));
            let mut containment = Check::new("fiber-containment", "");
            for x in &members {
                let ok = contained(x, target, fmap, signal, k, tol)?;
                containment.tally(ok, || format!("probe {p}: a fibre member has no matching admissible block"));
            }
            let points: Vec<OrbitWindow> = members.iter().map(|x| x.x.clone()).collect();
            let widim_upper = widim_orbit(&points, n, r.eps)?.widim_upper;
            let pass = (widim_upper as f64) < bound;
            let witness = (!pass).then(|| format!("probe {p}: width {widim_upper} over {} members", points.len()));
            Ok((
                ChainProbe {
                    probe: p,
                    fiber_size: points.len(),
                    sampled_members,
                    widim_upper,
                    bound,
                    contained: containment.pass,
                    pass,
                },
                containment,
                witness,
            ))
        })
        .collect::<Result<_>>()?;
    let mut containment = Check::new(
        "fiber-containment",
        "every fibre member x has an admissible block a, |a| <= 2M1+2, with F(T^a x) equal to the fibre's block at a",
    );
    let mut width = Check::new("fiber-width", "Widim_eps(fibre, d_n) / n < delta for every probed fibre");
    let mut chain = Vec::with_capacity(results.len());
    let mut max_ratio = 0.0f64;
    for (probe, c, witness) in results {
        containment.merge(&c);
        width.tally(probe.pass, || witness.unwrap_or_default());
        max_ratio = max_ratio.max(probe.widim_upper as f64 / n as f64);
        chain.push(probe);
    }
    width.value = Some(max_ratio);
    Ok(FiberChainReport {
        window: (lo, hi),
        tolerance: tol,
        horizon: n,
        probes: chain,
        max_ratio,
        containment,
        width,
    })
}

/// Subadditivity of the width series at scale `eps`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Subadditivity {
    pub eps: f64,
    pub series: BTreeMap<u64, f64>,
    pub check: Check,
}

/// `Widim(d_{n+m}) <= Widim(d_n) + Widim(d_m)` for all `n <= m <= max`.
pub fn subadditivity(samples: &[OrbitWindow], eps: f64, max: u64) -> Result<Subadditivity> {
    let series = width_series(samples, 1..=2 * max, eps)?;
    let mut check = Check::new("subadditivity", "Widim_eps(d_{n+m}) <= Widim_eps(d_n) + Widim_eps(d_m)");
    for n in 1..=max {
        for m in n..=max {
            let (a, b, c) = (series[&n], series[&m], series[&(n + m)]);
            check.tally(c <= a + b, || format!("n = {n}, m = {m}: {c} > {a} + {b}"));
        }
    }
    Ok(Subadditivity { eps, series, check })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The mean dimension of `X` exceeds the factor side.
    Violated,
    Inconclusive,
    /// Both sides vanish.
    TriviallySatisfied,
}

impl Verdict {
    pub fn describe(self) -> &'static str {
        match self {
            Verdict::Violated => "inequality violated",
            Verdict::Inconclusive => "inconclusive",
            Verdict::TriviallySatisfied => "trivially satisfied",
        }
    }
}

/// Comparison of `mdim(X)` with the factor side `mdim(Y) + mdim(Z)` and the
/// fibre term.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HurewiczReport {
    pub eps: f64,
    /// Smallest and largest increment of `Widim_eps(X, d_n)` per step.
    pub mdim_x_lower: f64,
    pub mdim_x_upper: f64,
    pub mdim_x_fekete: f64,
    pub mdim_y_bound: f64,
    pub mdim_z_bound: f64,
    pub factor_side: f64,
    /// `Widim_{eps/2}(X, d_n) / (n m)`, the bound the fibre chain targets.
    pub fiber_bound: f64,
    pub fiber_ratio_observed: f64,
    pub fiber_chain_passed: bool,
    pub verdict: Verdict,
}

/// A violation needs the fibre term bounded, so it is only declared when the
/// fibre chain passed.
pub fn hurewicz_report(
    x_series: &BTreeMap<u64, f64>,
    mdim_y_bound: f64,
    mdim_z_bound: f64,
    fiber_bound: f64,
    chain: &FiberChainReport,
    eps: f64,
) -> Result<HurewiczReport> {
    let est: MdimEstimate = mdim_estimate(x_series)?;
    let mdim_x_lower = est.min_slope.unwrap_or(est.fekete_upper);
    let mdim_x_upper = est.max_slope.unwrap_or(est.fekete_upper);
    let factor_side = mdim_y_bound + mdim_z_bound;
    let fiber_chain_passed = chain.containment.pass && chain.width.pass;
    let verdict = if mdim_x_upper <= 0.0 && est.fekete_upper <= 0.0 {
        Verdict::TriviallySatisfied
    } else if fiber_chain_passed && mdim_x_lower > factor_side {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    };
    Ok(HurewiczReport {
        eps,
        mdim_x_lower,
        mdim_x_upper,
        mdim_x_fekete: est.fekete_upper,
        mdim_y_bound,
        mdim_z_bound,
        factor_side,
        fiber_bound,
        fiber_ratio_observed: chain.max_ratio,
        fiber_chain_passed,
        verdict,
    })
}

/// Sizes of the finite checks the pipeline runs.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineOptions {
    pub tiling_instances: usize,
    /// Tiling window as a multiple of `M1`.
    pub tiling_window_m1: i64,
    pub block_instances: usize,
    pub block_window: i64,
    pub sparsity_window: i64,
    pub fmap_probes: usize,
    pub fiber_probes: usize,
    pub fiber_completions: usize,
    pub subadditivity_max: u64,
}

impl PipelineOptions {
    pub fn for_config(config: &ExperimentConfig) -> Self {
        let count = config.sampling.count;
        Self {
            tiling_instances: count.min(40),
            tiling_window_m1: 20,
            block_instances: count.min(60),
            block_window: 20_000,
            sparsity_window: 1000,
            fmap_probes: count,
            fiber_probes: count,
            fiber_completions: 16,
            subadditivity_max: SERIES_HORIZON,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlockMapSummary {
    pub eps: f64,
    pub horizon: u64,
    pub vertex_count: usize,
    pub fibers: FiberReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PipelineReport {
    pub resolved: Resolved,
    pub options: PipelineOptions,
    pub checks: Vec<Check>,
    pub separation: Separation,
    pub block_map: BlockMapSummary,
    pub fiber_chain: FiberChainReport,
    pub subadditivity: Subadditivity,
    pub hurewicz: HurewiczReport,
}

impl PipelineReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }
}

pub fn separation_check(sep: &Separation, signal: &SignalParams) -> Check {
    let mut check = Check::new(
        "separation",
        "Phi(z)_0 = 2 and Phi(z')_0 <= 1 + gamma(n) < 2 for the designated pair",
    );
    let min_gap = match signal.gamma {
        GammaVariant::MaxAtZero => 1.0 - gamma(1.0, signal.gamma),
        GammaVariant::PaperPrinted => 0.0,
    };
    check.tally(sep.separated && sep.gap >= min_gap, || {
        format!("Phi(z)_0 = {}, Phi(z')_0 = {}", sep.phi_z0, sep.phi_zprime0)
    });
    check.value = Some(sep.gap);
    check
}

fn value_of(checks: &[Check], id: &str) -> Option<f64> {
    checks.iter().find(|c| c.id == id).and_then(|c| c.value)
}

/// Run every stage on the resolved parameters.
pub fn run_pipeline_with(config: &ExperimentConfig, opts: &PipelineOptions) -> Result<PipelineReport> {
    let setup = resolve(config)?;
    let r = &setup.resolved;
    let sys = &setup.system;
    let seed = config.sampling.seed;
    let mut checks = tiling_suite(
        sys,
        &r.marker,
        &r.tiling,
        &r.signal,
        &TilingSuiteOptions {
            instances: opts.tiling_instances,
            window: opts.tiling_window_m1 * r.tiling.m1 as i64,
            seed: hash::mix(&[seed, 1]),
            equivariance_every: 4,
            equivariance_shift: 7,
            good_tile_positions: 50,
            phi_mdim_threshold: r.delta_prime,
        },
    )?;
    let sep = separation(sys, &r.marker, &r.tiling, &r.signal)?;
    checks.push(separation_check(&sep, &r.signal));

    let fmap = OrbitFMap::build(sys, r.eps, r.n_horizon, r.m, seed)?;
    let fibers = verify_orbit_fiber_bound(&fmap, &setup.samples, r.widim_half, opts.fmap_probes, hash::mix(&[seed, 2]))?;
    let mut fmap_check = Check::new(
        "block-map-fibers",
        "Widim_eps(F^-1(p), d_n) <= Widim_{eps/2}(X, d_n) / m on sampled fibres of F",
    );
    for p in &fibers.probes {
        fmap_check.tally(p.pass, || format!("probe {}: width {} over {} points", p.probe, p.widim_upper, p.fiber_size));
    }
    if fibers.vacuous {
        fmap_check.fail("every probed fibre was empty".into());
    }
    checks.push(fmap_check);

    let sparsity_window = opts.sparsity_window;
    checks.extend(block_suite(
        sys,
        &r.marker,
        &r.tiling,
        &r.signal,
        &fmap,
        &BlockSuiteOptions {
            instances: opts.block_instances,
            window: opts.block_window,
            sparsity_window,
            sparsity_delta: r.delta_prime,
            seed: hash::mix(&[seed, 3]),
        },
    )?);

    let chain = fiber_chain(
        &setup,
        &fmap,
        &FiberChainOptions {
            probes: opts.fiber_probes,
            completions: opts.fiber_completions,
            seed: hash::mix(&[seed, 4]),
        },
    )?;
    checks.push(chain.containment.clone());
    checks.push(chain.width.clone());

    let sub = subadditivity(&setup.samples, r.eps, opts.subadditivity_max)?;
    checks.push(sub.check.clone());

    let x_series: BTreeMap<u64, f64> = sub.series.range(1..=SERIES_HORIZON).map(|(&n, &w)| (n, w)).collect();
    let sparse_ok = checks.iter().any(|c| c.id == "g-sparsity" && c.pass);
    let mdim_y_bound = if sparse_ok {
        r.delta_prime + 1.0 / sparsity_window as f64
    } else {
        value_of(&checks, "g-sparsity").unwrap_or(1.0)
    };
    let mdim_z_bound = value_of(&checks, "phi-image-width").unwrap_or(1.0);
    let hurewicz = hurewicz_report(&x_series, mdim_y_bound, mdim_z_bound, r.fiber_bound(), &chain, r.eps)?;

    Ok(PipelineReport {
        resolved: setup.resolved.clone(),
        options: opts.clone(),
        checks,
        separation: sep,
        block_map: BlockMapSummary {
            eps: fmap.eps,
            horizon: fmap.horizon,
            vertex_count: fmap.vertex_count(),
            fibers,
        },
        fiber_chain: chain,
        subadditivity: sub,
        hurewicz,
    })
}

pub fn run_pipeline(config: &ExperimentConfig) -> Result<PipelineReport> {
    run_pipeline_with(config, &PipelineOptions::for_config(config))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(pass: bool, ratio: f64) -> FiberChainReport {
        let mut width = Check::new("fiber-width", "");
        width.pass = pass;
        FiberChainReport {
            window: (0, 0),
            tolerance: 0.0,
            horizon: 1,
            probes: Vec::new(),
            max_ratio: ratio,
            containment: Check::new("fiber-containment", ""),
            width,
        }
    }

    fn linear(slope: f64) -> BTreeMap<u64, f64> {
        (1..=6).map(|n| (n, slope * n as f64 + 1.0)).collect()
    }

    #[test]
    fn verdict_rules() {
        let v = |series: &BTreeMap<u64, f64>, y, z, c: &FiberChainReport| {
            hurewicz_report(series, y, z, 0.18, c, 0.25).unwrap().verdict
        };
        let one = linear(1.0);
        assert_eq!(v(&one, 0.1, 0.01, &chain(true, 0.0)), Verdict::Violated);
        assert_eq!(v(&one, 0.6, 0.5, &chain(true, 0.0)), Verdict::Inconclusive);
        assert_eq!(v(&one, 0.1, 0.01, &chain(false, 1.0)), Verdict::Inconclusive);
        let zero: BTreeMap<u64, f64> = (1..=6).map(|n| (n, 0.0)).collect();
        assert_eq!(v(&zero, 0.0, 0.0, &chain(true, 0.0)), Verdict::TriviallySatisfied);
    }

    #[test]
    fn default_selection() {
        // the default 240 samples are dense enough to see both circle and cube
        let r = resolve(&ExperimentConfig::default()).unwrap().resolved;
        assert_eq!((r.n_horizon, r.m, r.widim_half), (1, 11, 2));
        assert!((r.mdim_half - 7.0 / 6.0).abs() < 1e-12);
        assert!(r.delta_prime < (r.mdim_half + 1.0) / (2.0 * r.m as f64) && r.delta_prime < r.delta / 2.0);
        assert!(r.tiling.r >= 3.0 * r.m as f64);
        assert!((r.m as f64) > (r.mdim_half + 1.0) / r.delta);
    }

    #[test]
    fn small_marker_constant_is_rejected() {
        let mut cfg = ExperimentConfig::default();
        cfg.sampling.count = 20;
        cfg.marker = AutoOr::Value(MarkerSpec {
            arc_center: 0.0,
            arc_radius: 0.01,
            inner_radius: 0.005,
            m: 34,
            m1: 200,
        });
        assert!(matches!(resolve(&cfg), Err(Error::Tiling(_)) | Err(Error::Marker(_))));
        cfg.factor.m = AutoOr::Value(5);
        assert!(matches!(resolve(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn subadditive_on_samples() {
        let sys = System::new(crate::dynsys::SystemSpec::new(1, crate::dynsys::DEFAULT_THETA, 1000, 0.1)).unwrap();
        let samples = sample_points(&sys, 30, 2).unwrap();
        let s = subadditivity(&samples, 0.25, 3).unwrap();
        assert!(s.check.pass);
        assert_eq!(s.check.checked, 6);
    }
}
