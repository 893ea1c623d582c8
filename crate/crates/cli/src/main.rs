use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use meandim::dynsys::{sample_points, System};
use meandim::experiment::{
    base_tiling, resolve, run_pipeline, run_products, strip_timestamp, tiling_suite,
    widim_calibration, Check, ExperimentConfig, Instance, ProductOptions, Report, TilingSuiteOptions, REPORT_FILE,
};
use meandim::export;
use meandim::fibre::{calibration_complexes, verify_fiber_bound, verify_orbit_fiber_bound, Construction, NerveFMap, OrbitFMap};
use meandim::marker::marker_sequence;
use meandim::signal::{pi_map, plateau_report, SignalParams};
use meandim::tiling::boundary_density_in;
use meandim::widim::{Budget, Mode};
use serde_json::json;

#[derive(Parser)]
#[command(name = "meandimlab", version, about = "Factor constructions and width estimates on a marker-property test system")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment configuration (JSON, schema meandimlab/v1); defaults apply without it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides sampling.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides outputs.dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Width solver mode.
    #[arg(long, global = true, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Greedy,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Greedy => Mode::Greedy,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Marker constants and the gap histogram of a sample.
    Marker,
    /// Tiling statements on random instances, with tile and density tables.
    Tile {
        #[arg(long, default_value_t = 20)]
        instances: usize,
        /// Window length in multiples of M1.
        #[arg(long, default_value_t = 20)]
        window_m1: i64,
    },
    /// Phi and g traces of a sample and the separation of the designated pair.
    Phi,
    /// Solver calibration on cubes.
    Widim,
    /// Block map construction and its fibre check.
    Fmap,
    /// The full factor pipeline.
    Pipeline,
    /// Finite products of factors at shrinking scales.
    Products {
        #[arg(long, default_value_t = 3)]
        factors: usize,
    },
    /// Calibration, tiling statements and the full pipeline in one report.
    Verify {
        #[arg(long, default_value_t = 100)]
        instances: usize,
        #[arg(long, default_value_t = 100)]
        window_m1: i64,
    },
    /// Print the summary of an existing report.
    Report,
}

/// A failure with its exit code: 2 for configuration, 1 otherwise.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 2,
        error: error.into(),
    }
}

fn run_error(error: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: error.into(),
    }
}

/// Errors from building the system, marker or tiling count as
/// configuration errors.
fn setup_error(e: meandim::Error) -> Failure {
    use meandim::Error as E;
    match e {
        E::Config(_) | E::Marker(_) | E::Tiling(_) | E::Horizon(_) => config_error(e),
        other => run_error(other),
    }
}

struct Ctx {
    config: ExperimentConfig,
    out: PathBuf,
    mode: Mode,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn finish(&self, command: &str, checks: &[Check], passed: bool, results: serde_json::Value) -> Result<bool, Failure> {
        let report = Report::new(command, &self.config, passed, checks, results).map_err(run_error)?;
        report.clone().stamped().write(&self.out).map_err(run_error)?;
        for line in &report.lines {
            println!("{line}");
        }
        println!("{} -> {}", if passed { "PASS" } else { "FAIL" }, self.path(REPORT_FILE).display());
        Ok(passed)
    }
}

fn load(cli: &Cli) -> Result<Ctx, Failure> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path).map_err(config_error)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.sampling.seed = seed;
    }
    let out = cli
        .out
        .clone()
        .or_else(|| config.outputs.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("meandimlab-out"));
    std::fs::create_dir_all(&out)
        .with_context(|| format!("cannot create {}", out.display()))
        .map_err(config_error)?;
    Ok(Ctx {
        config,
        out,
        mode: cli.mode.into(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load(&cli).and_then(|ctx| dispatch(&cli.command, &ctx));
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: &Command, ctx: &Ctx) -> Result<bool, Failure> {
    match command {
        Command::Marker => marker(ctx),
        Command::Tile { instances, window_m1 } => tile(ctx, *instances, *window_m1),
        Command::Phi => phi(ctx),
        Command::Widim => widim(ctx),
        Command::Fmap => fmap(ctx),
        Command::Pipeline => pipeline(ctx),
        Command::Products { factors } => products(ctx, *factors),
        Command::Verify { instances, window_m1 } => verify(ctx, *instances, *window_m1),
        Command::Report => show_report(&ctx.out),
    }
}

fn marker(ctx: &Ctx) -> Result<bool, Failure> {
    let sys = System::new(ctx.config.system.clone()).map_err(setup_error)?;
    let (spec, params) = base_tiling(&ctx.config, &sys).map_err(setup_error)?;
    let x = sample_points(&sys, 1, ctx.config.sampling.seed).map_err(run_error)?.remove(0);
    let len = 1000 * spec.m1 as i64;
    let seq = marker_sequence(&spec, &x, 0, len).map_err(run_error)?;
    let gaps = seq.gap_histogram();
    export::write_gaps(&ctx.path("gaps.csv"), &gaps).map_err(run_error)?;
    let mut check = Check::new("marker-gaps", "consecutive marker sites are between M and M1 apart");
    check.checked = seq.support().len() as u64;
    if let Err(e) = seq.check_invariants() {
        check.violations = 1;
        check.pass = false;
        check.witness = Some(e.to_string());
    }
    let results = json!({ "marker": spec, "tiling": params, "window": [0, len], "gap_histogram": gaps });
    let pass = check.pass;
    ctx.finish("marker", &[check], pass, results)
}

fn tile(ctx: &Ctx, instances: usize, window_m1: i64) -> Result<bool, Failure> {
    let sys = System::new(ctx.config.system.clone()).map_err(setup_error)?;
    let (spec, params) = base_tiling(&ctx.config, &sys).map_err(setup_error)?;
    let signal = SignalParams::new(params.big_r, 2, ctx.config.gamma).map_err(setup_error)?;
    let window = window_m1 * params.m1 as i64;
    let opts = TilingSuiteOptions {
        instances,
        window,
        seed: ctx.config.sampling.seed,
        equivariance_every: 5,
        equivariance_shift: 7,
        good_tile_positions: 100,
        phi_mdim_threshold: params.delta,
    };
    let checks = tiling_suite(&sys, &spec, &params, &signal, &opts).map_err(run_error)?;
    let x = sample_points(&sys, 1, ctx.config.sampling.seed).map_err(run_error)?.remove(0);
    let half = window / 2 + params.good_radius();
    let inst = Instance::build(&spec, &params, x, half).map_err(run_error)?;
    export::write_tiling(&ctx.path("tiling_lower.csv"), &inst.lower).map_err(run_error)?;
    export::write_tiling(&ctx.path("tiling_upper.csv"), &inst.upper).map_err(run_error)?;
    let mut rows = Vec::new();
    for rho in [params.r, params.big_r, 2.0 * params.big_r] {
        for w in [params.m1 as i64, 10 * params.m1 as i64, window] {
            let w = w.min(2 * half);
            let density = boundary_density_in(&inst.lower, rho, -(w as f64) / 2.0, w as f64 / 2.0).map_err(run_error)?;
            rows.push(export::DensityRow {
                rho,
                r_window: w as f64,
                density,
            });
        }
    }
    export::write_density(&ctx.path("density.csv"), &rows).map_err(run_error)?;
    let pass = checks.iter().all(|c| c.pass);
    let results = json!({ "marker": spec, "tiling": params, "instances": instances, "window": window, "checks": checks, "density": rows });
    ctx.finish("tile", &checks, pass, results)
}

fn phi(ctx: &Ctx) -> Result<bool, Failure> {
    let setup = resolve(&ctx.config).map_err(setup_error)?;
    let r = &setup.resolved;
    let fmap = OrbitFMap::build(&setup.system, r.eps, r.n_horizon, r.m, ctx.config.sampling.seed).map_err(run_error)?;
    let k = 5 * r.tiling.m1 as i64;
    let half = k + r.tiling.good_radius();
    let inst = Instance::build(&r.marker, &r.tiling, setup.samples[0].clone(), half).map_err(run_error)?;
    let image = pi_map(&inst.x, &inst.lower, -k, k, &r.signal, &fmap).map_err(run_error)?;
    export::write_factor_image(&ctx.path("factor_image.csv"), &image).map_err(run_error)?;
    let plateau = plateau_report(&image.phi, &inst.lower, -k, image.phi.len(), &r.signal).map_err(run_error)?;
    let sep = meandim::experiment::separation(&setup.system, &r.marker, &r.tiling, &r.signal).map_err(run_error)?;
    export::write_separation(&ctx.path("separation.json"), &sep).map_err(run_error)?;
    let mut checks = vec![meandim::experiment::separation_check(&sep, &r.signal)];
    let mut free = Check::new("plateau-dimension", "free fraction of a Phi window is below delta'");
    free.checked = 1;
    free.value = Some(plateau.free_fraction);
    if !(plateau.free_fraction < r.delta_prime && plateau.profile_mismatches == 0) {
        free.violations = 1;
        free.pass = false;
        free.witness = Some(format!("free fraction {}", plateau.free_fraction));
    }
    checks.push(free);
    let pass = checks.iter().all(|c| c.pass);
    let results = json!({
        "resolved": r,
        "window": [-k, k],
        "free_fraction": plateau.free_fraction,
        "rigid_blocks": plateau.blocks.len(),
        "separation": sep,
    });
    ctx.finish("phi", &checks, pass, results)
}

fn widim(ctx: &Ctx) -> Result<bool, Failure> {
    let budget = Budget {
        seed: ctx.config.sampling.seed,
        ..Budget::default()
    };
    let (rows, seconds, check) = widim_calibration(ctx.mode, budget).map_err(run_error)?;
    let bench: Vec<export::BenchmarkRow> = rows
        .iter()
        .zip(&seconds)
        .map(|(r, &s)| export::BenchmarkRow {
            instance: format!("cube{}_grid{}", r.dim, r.grid),
            eps: r.eps,
            mode: format!("{:?}", r.mode).to_lowercase(),
            widim: r.widim_upper,
            seconds: s,
        })
        .collect();
    export::write_benchmark(&ctx.path("widim_benchmark.csv"), &bench).map_err(run_error)?;
    let pass = check.pass;
    ctx.finish("widim", &[check], pass, json!({ "calibration": rows }))
}

fn fmap(ctx: &Ctx) -> Result<bool, Failure> {
    let setup = resolve(&ctx.config).map_err(setup_error)?;
    let r = &setup.resolved;
    let seed = ctx.config.sampling.seed;
    let map = OrbitFMap::build(&setup.system, r.eps, r.n_horizon, r.m, seed).map_err(run_error)?;
    let report = verify_orbit_fiber_bound(&map, &setup.samples, r.widim_half, setup.samples.len(), seed).map_err(run_error)?;
    export::write_fiber_probes(&ctx.path("fiber_probes.csv"), &report.probes).map_err(run_error)?;
    let mut orbit = Check::new(
        "block-map-fibers",
        "Widim_eps(F^-1(p), d_n) <= Widim_{eps/2}(X, d_n) / m on sampled fibres of F",
    );
    orbit.checked = report.probes.len() as u64;
    orbit.violations = report.violations as u64;
    orbit.pass = report.passed();
    let mut complexes = Check::new(
        "complex-fibers",
        "Widim_eps(F^-1(p)) <= Widim_{eps/2}(K) / m for searched maps on calibration complexes",
    );
    let mut complex_results = Vec::new();
    for (name, space) in calibration_complexes().map_err(run_error)? {
        for m in [2, 3] {
            let f = NerveFMap::build(&space, 0.9, m, Construction::SearchedPl, Budget::default(), seed).map_err(run_error)?;
            let rep = verify_fiber_bound(&f, &space, 60, seed).map_err(run_error)?;
            complexes.checked += rep.probes.len() as u64;
            complexes.violations += rep.violations as u64;
            if !rep.passed() {
                complexes.pass = false;
                complexes.witness.get_or_insert_with(|| format!("{name}, m = {m}"));
            }
            complex_results.push(json!({ "complex": name, "m": m, "bound": rep.bound, "violations": rep.violations, "transfer_delta": rep.transfer_delta }));
        }
    }
    let checks = [orbit, complexes];
    let pass = checks.iter().all(|c| c.pass);
    let results = json!({
        "resolved": r,
        "vertex_count": map.vertex_count(),
        "orbit": { "bound": report.bound, "violations": report.violations, "vacuous": report.vacuous, "transfer_delta": report.transfer_delta },
        "complexes": complex_results,
    });
    ctx.finish("fmap", &checks, pass, results)
}

fn pipeline_outputs(ctx: &Ctx, report: &meandim::experiment::PipelineReport) -> Result<(), Failure> {
    export::write_separation(&ctx.path("separation.json"), &report.separation).map_err(run_error)?;
    export::write_chain_probes(&ctx.path("fiber_chain.csv"), &report.fiber_chain.probes).map_err(run_error)?;
    export::write_fiber_probes(&ctx.path("fiber_probes.csv"), &report.block_map.fibers.probes).map_err(run_error)?;
    let setup = resolve(&ctx.config).map_err(setup_error)?;
    let r = &setup.resolved;
    let map = OrbitFMap::build(&setup.system, r.eps, r.n_horizon, r.m, ctx.config.sampling.seed).map_err(run_error)?;
    let (lo, hi) = report.fiber_chain.window;
    let half = hi + r.signal.g_reach().ceil() as i64 + r.tiling.big_r.ceil() as i64 + 2;
    let inst = Instance::build(&r.marker, &r.tiling, setup.samples[0].clone(), half).map_err(run_error)?;
    let image = pi_map(&inst.x, &inst.lower, lo, hi, &r.signal, &map).map_err(run_error)?;
    export::write_factor_image(&ctx.path("factor_image.csv"), &image).map_err(run_error)?;
    export::write_tiling(&ctx.path("tiling_lower.csv"), &inst.lower).map_err(run_error)
}

fn pipeline(ctx: &Ctx) -> Result<bool, Failure> {
    let report = run_pipeline(&ctx.config).map_err(setup_error)?;
    pipeline_outputs(ctx, &report)?;
    let pass = report.passed();
    println!("comparison: {}", report.hurewicz.verdict.describe());
    ctx.finish("pipeline", &report.checks, pass, serde_json::to_value(&report).map_err(run_error)?)
}

fn products(ctx: &Ctx, factors: usize) -> Result<bool, Failure> {
    let report = run_products(&ctx.config, factors, &ProductOptions::default()).map_err(setup_error)?;
    let checks: Vec<Check> = report
        .factors
        .iter()
        .flat_map(|f| {
            f.checks.iter().map(move |c| Check {
                id: format!("factor-{}/{}", f.k, c.id),
                ..c.clone()
            })
        })
        .collect();
    let pass = report.passed();
    println!("summed bound {:.6} against delta {}", report.summed_bound, report.delta);
    ctx.finish("products", &checks, pass, serde_json::to_value(&report).map_err(run_error)?)
}

fn verify(ctx: &Ctx, instances: usize, window_m1: i64) -> Result<bool, Failure> {
    let (calibration, _, cal_check) = widim_calibration(ctx.mode, Budget::default()).map_err(run_error)?;
    let sys = System::new(ctx.config.system.clone()).map_err(setup_error)?;
    let (spec, params) = base_tiling(&ctx.config, &sys).map_err(setup_error)?;
    let signal = SignalParams::new(params.big_r, 2, ctx.config.gamma).map_err(setup_error)?;
    let opts = TilingSuiteOptions {
        instances,
        window: window_m1 * params.m1 as i64,
        seed: ctx.config.sampling.seed,
        equivariance_every: 10,
        equivariance_shift: 7,
        good_tile_positions: 100,
        phi_mdim_threshold: params.delta,
    };
    let base = tiling_suite(&sys, &spec, &params, &signal, &opts).map_err(run_error)?;
    let report = run_pipeline(&ctx.config).map_err(setup_error)?;
    pipeline_outputs(ctx, &report)?;
    let mut checks = vec![cal_check];
    checks.extend(base.iter().map(|c| Check {
        id: format!("base/{}", c.id),
        ..c.clone()
    }));
    checks.extend(report.checks.iter().cloned());
    let pass = checks.iter().all(|c| c.pass);
    println!("comparison: {}", report.hurewicz.verdict.describe());
    let results = json!({
        "calibration": calibration,
        "base_tiling": { "marker": spec, "tiling": params, "instances": instances, "window_m1": window_m1 },
        "pipeline": report,
    });
    ctx.finish("verify", &checks, pass, results)
}

fn show_report(out: &Path) -> Result<bool, Failure> {
    let path = out.join(REPORT_FILE);
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(config_error)?;
    let stripped = strip_timestamp(&text).map_err(config_error)?;
    let value: serde_json::Value = serde_json::from_str(&stripped).map_err(config_error)?;
    if let Some(lines) = value["lines"].as_array() {
        for line in lines.iter().filter_map(|l| l.as_str()) {
            println!("{line}");
        }
    }
    let passed = value["passed"].as_bool().unwrap_or(false);
    println!("{}: {}", value["command"].as_str().unwrap_or("?"), if passed { "PASS" } else { "FAIL" });
    Ok(passed)
}
