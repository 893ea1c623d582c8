//! Acceptance run: one PASS/FAIL line per criterion, with timings.
//!
//! Criteria 5, 6 and 8 are known to fail on the default parameters (sparsity
//! at N = 1000, fibre width of pi, and the verdict that depends on it). They
//! still print FAIL; the process only exits nonzero when a criterion outside
//! that list fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use meandim::dynsys::System;
use meandim::experiment::{
    base_tiling, resolve, run_pipeline, strip_timestamp, tiling_suite, widim_calibration, Check, ExperimentConfig,
    PipelineReport, Report, TilingSuiteOptions, Verdict,
};
use meandim::signal::SignalParams;
use meandim::widim::{Budget, Mode};

const KNOWN_GAPS: &[u32] = &[5, 6, 8];

struct Outcome {
    criterion: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
}

fn all_pass<'a>(checks: impl IntoIterator<Item = &'a Check>, ids: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    let checks: Vec<&Check> = checks.into_iter().collect();
    for id in ids {
        match checks.iter().find(|c| c.id == *id) {
            Some(c) => {
                ok &= c.pass;
                parts.push(format!("{id} {}/{}", c.violations, c.checked));
            }
            None => {
                ok = false;
                parts.push(format!("{id} missing"));
            }
        }
    }
    (ok, parts.join(", "))
}

fn calibration() -> Outcome {
    let start = Instant::now();
    let (rows, _, check) = widim_calibration(Mode::Exact, Budget::default()).expect("calibration runs");
    let elapsed = start.elapsed();
    let detail = rows
        .iter()
        .map(|r| format!("n={} upper {} lower {:?}", r.dim, r.widim_upper, r.certified_lower))
        .collect::<Vec<_>>()
        .join("; ");
    Outcome {
        criterion: 1,
        name: "width calibration on cubes",
        pass: check.pass && elapsed <= Duration::from_secs(60),
        detail,
        elapsed,
    }
}

/// Criteria 2 and 4 share one run of the tiling suite on the base tiling.
fn tiling_and_plateau(config: &ExperimentConfig, delta_prime: f64) -> (Outcome, Outcome) {
    let sys = System::new(config.system.clone()).expect("system");
    let (spec, params) = base_tiling(config, &sys).expect("base tiling");
    let signal = SignalParams::new(params.big_r, 2, config.gamma).expect("signal");
    let opts = TilingSuiteOptions {
        instances: 1000,
        window: 1000 * params.m1 as i64,
        seed: config.sampling.seed,
        equivariance_every: 10,
        equivariance_shift: 7,
        good_tile_positions: 100,
        phi_mdim_threshold: delta_prime,
    };
    let start = Instant::now();
    let checks = tiling_suite(&sys, &spec, &params, &signal, &opts).expect("tiling suite");
    let elapsed = start.elapsed();
    let (tiles_ok, tiles) = all_pass(
        &checks,
        &[
            "tile-locality",
            "tile-support-threshold",
            "interior-fraction",
            "tiling-coverage",
            "boundary-density",
            "good-tile",
            "tiling-equivariance",
        ],
    );
    let (plateau_ok, plateau) = all_pass(&checks, &["rigid-profile", "plateau-dimension", "phi-image-width"]);
    let width = checks.iter().find(|c| c.id == "phi-image-width").and_then(|c| c.value);
    (
        Outcome {
            criterion: 2,
            name: "tiling statements",
            pass: tiles_ok && elapsed <= Duration::from_secs(120),
            detail: format!("M={} M1={}; {tiles}", params.m, params.m1),
            elapsed,
        },
        Outcome {
            criterion: 4,
            name: "plateau and Phi-image width",
            pass: plateau_ok,
            detail: format!("{plateau}; width estimate {width:?} vs {delta_prime:.4}"),
            elapsed,
        },
    )
}

fn pipeline_outcomes(report: &PipelineReport, elapsed: Duration) -> Vec<Outcome> {
    let sep = &report.separation;
    let (sep_ok, _) = all_pass(&report.checks, &["separation"]);
    let (g_ok, g) = all_pass(&report.checks, &["window-recovery", "g-vanishing", "g-sparsity"]);
    let chain = &report.fiber_chain;
    let (chain_ok, chain_detail) = all_pass(&report.checks, &["fiber-containment", "fiber-width"]);
    let (sub_ok, sub) = all_pass(&report.checks, &["subadditivity"]);
    let h = &report.hurewicz;
    let bracket = (0.6..=1.0).contains(&h.mdim_x_lower) && (0.6..=1.0).contains(&h.mdim_x_upper);
    vec![
        Outcome {
            criterion: 3,
            name: "separation of the designated pair",
            pass: sep_ok,
            detail: format!("Phi(z)_0 = {}, Phi(z')_0 = {}, gap {}", sep.phi_z0, sep.phi_zprime0, sep.gap),
            elapsed,
        },
        Outcome {
            criterion: 5,
            name: "block signal structure",
            pass: g_ok,
            detail: g,
            elapsed,
        },
        Outcome {
            criterion: 6,
            name: "fibres of pi",
            pass: chain_ok && chain.probes.len() >= 200 && elapsed <= Duration::from_secs(600),
            detail: format!("{} probes; {chain_detail}; max width ratio {}", chain.probes.len(), chain.max_ratio),
            elapsed,
        },
        Outcome {
            criterion: 7,
            name: "subadditivity of orbit widths",
            pass: sub_ok,
            detail: sub,
            elapsed,
        },
        Outcome {
            criterion: 8,
            name: "mean dimension comparison",
            pass: bracket && h.factor_side < 0.4 && h.verdict == Verdict::Violated,
            detail: format!(
                "mdim(X) in [{}, {}], factor side {:.4}, verdict {}",
                h.mdim_x_lower,
                h.mdim_x_upper,
                h.factor_side,
                h.verdict.describe()
            ),
            elapsed,
        },
    ]
}

fn report_text(config: &ExperimentConfig, report: &PipelineReport) -> String {
    Report::new("pipeline", config, report.passed(), &report.checks, report)
        .and_then(|r| r.stamped().to_json())
        .and_then(|text| strip_timestamp(&text))
        .expect("report serializes")
}

fn main() -> ExitCode {
    let config = ExperimentConfig::default();
    let delta_prime = resolve(&config).expect("default config resolves").resolved.delta_prime;
    let mut outcomes = vec![calibration()];

    let start = Instant::now();
    let first = run_pipeline(&config).expect("pipeline runs");
    let pipeline_time = start.elapsed();
    let (tiles, plateau) = tiling_and_plateau(&config, delta_prime);
    outcomes.push(tiles);
    outcomes.extend(pipeline_outcomes(&first, pipeline_time));
    outcomes.push(plateau);

    let start = Instant::now();
    let second = run_pipeline(&config).expect("pipeline runs");
    let same = report_text(&config, &first) == report_text(&config, &second);
    outcomes.push(Outcome {
        criterion: 9,
        name: "deterministic report",
        pass: same,
        detail: if same { "identical modulo timestamp".into() } else { "reports differ".into() },
        elapsed: start.elapsed(),
    });

    outcomes.sort_by_key(|o| o.criterion);
    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_GAPS.contains(&o.criterion);
        let tag = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!(
            "{tag} criterion {}: {} [{:.1} s] {}",
            o.criterion,
            o.name,
            o.elapsed.as_secs_f64(),
            o.detail
        );
        if !o.pass && !known {
            unexpected.push(o.criterion);
        }
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
