//! Finite products of pipeline factors at scales `1/k` and densities
//! `delta / 2^k`.

use serde::Serialize;

use super::config::{AutoOr, ExperimentConfig};
use super::pipeline::{resolve, separation_check};
use super::suite::{block_suite, separation, tiling_suite, BlockSuiteOptions, Check, TilingSuiteOptions};
use crate::fibre::OrbitFMap;
use crate::hash;
use crate::{Error, Result};

/// Largest number of factors run.
pub const MAX_FACTORS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductFactor {
    pub k: usize,
    pub eps: f64,
    pub delta: f64,
    pub delta_prime: f64,
    pub m: usize,
    #[serde(rename = "M")]
    pub big_m: u64,
    #[serde(rename = "M1")]
    pub m1: u64,
    /// Largest share of nonzero block-signal entries per window.
    pub mdim_y_bound: f64,
    pub mdim_z_bound: f64,
    pub separated: bool,
    pub checks: Vec<Check>,
}

impl ProductFactor {
    pub fn bound(&self) -> f64 {
        self.mdim_y_bound + self.mdim_z_bound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductReport {
    pub delta: f64,
    pub factors: Vec<ProductFactor>,
    pub summed_bound: f64,
    pub below_delta: bool,
    pub all_separated: bool,
}

impl ProductReport {
    pub fn passed(&self) -> bool {
        self.below_delta && self.all_separated && self.factors.iter().all(|f| f.checks.iter().all(|c| c.pass))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductOptions {
    pub instances: usize,
    /// Windows as multiples of `M1`.
    pub window_m1: i64,
}

impl Default for ProductOptions {
    fn default() -> Self {
        Self {
            instances: 6,
            window_m1: 4,
        }
    }
}

/// Factor `k` uses `eps = 1/k` and `delta / 2^k`; its bound on
/// `mdim(Y_k) + mdim(Z_k)` comes from sparsity and plateau counts over windows
/// of several `M1`.
pub fn run_products(config: &ExperimentConfig, count: usize, opts: &ProductOptions) -> Result<ProductReport> {
    if count == 0 || count > MAX_FACTORS {
        return Err(Error::Config(format!("number of factors must lie in 1..={MAX_FACTORS}, got {count}")));
    }
    let delta = config.tiling.delta;
    let mut factors = Vec::with_capacity(count);
    for k in 1..=count {
        let mut cfg = config.clone();
        cfg.factor.eps = 1.0 / k as f64;
        cfg.tiling.delta = delta / (1u64 << k) as f64;
        cfg.factor.m = AutoOr::auto();
        cfg.factor.n_horizon = AutoOr::auto();
        cfg.tiling.c = None;
        cfg.marker = AutoOr::auto();
        let setup = resolve(&cfg)?;
        let r = &setup.resolved;
        let sys = &setup.system;
        let seed = hash::mix(&[config.sampling.seed, k as u64]);
        let window = opts.window_m1 * r.tiling.m1 as i64;
        let mut checks = tiling_suite(
            sys,
            &r.marker,
            &r.tiling,
            &r.signal,
            &TilingSuiteOptions {
                instances: opts.instances,
                window,
                seed,
                equivariance_every: 0,
                equivariance_shift: 7,
                good_tile_positions: 10,
                phi_mdim_threshold: r.delta_prime,
            },
        )?;
        let sep = separation(sys, &r.marker, &r.tiling, &r.signal)?;
        checks.push(separation_check(&sep, &r.signal));
        let fmap = OrbitFMap::build(sys, r.eps, r.n_horizon, r.m, seed)?;
        let blocks = block_suite(
            sys,
            &r.marker,
            &r.tiling,
            &r.signal,
            &fmap,
            &BlockSuiteOptions {
                instances: opts.instances,
                window,
                sparsity_window: window,
                sparsity_delta: r.delta_prime,
                seed: hash::mix(&[seed, 1]),
            },
        )?;
        checks.extend(blocks);
        let value = |id: &str| checks.iter().find(|c| c.id == id).and_then(|c| c.value).unwrap_or(1.0);
        let (mdim_y_bound, mdim_z_bound) = (value("g-sparsity"), value("phi-image-width"));
        factors.push(ProductFactor {
            k,
            eps: r.eps,
            delta: r.delta,
            delta_prime: r.delta_prime,
            m: r.m,
            big_m: r.tiling.m,
            m1: r.tiling.m1,
            mdim_y_bound,
            mdim_z_bound,
            separated: sep.separated,
            checks,
        });
    }
    let summed_bound: f64 = factors.iter().map(ProductFactor::bound).sum();
    Ok(ProductReport {
        delta,
        summed_bound,
        below_delta: summed_bound < delta,
        all_separated: factors.iter().all(|f| f.separated),
        factors,
    })
}
