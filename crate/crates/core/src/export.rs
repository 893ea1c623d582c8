//! CSV and JSON tables for plotting and inspection.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::experiment::{ChainProbe, Separation};
use crate::fibre::FiberProbe;
use crate::signal::FactorImage;
use crate::tiling::IntervalTiling;
use crate::{Error, Result};

fn io_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Invariant {
        stage: "export".into(),
        detail: format!("{}: {e}", path.display()),
    }
}

/// Write `rows` as CSV with a header taken from the field names.
pub fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    for row in rows {
        w.serialize(row).map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

#[derive(Serialize)]
struct TileRow {
    label: i64,
    a: f64,
    b: f64,
    slice_level: f64,
}

pub fn write_tiling(path: &Path, tiling: &IntervalTiling) -> Result<()> {
    let level = tiling.level();
    write_rows(
        path,
        tiling.clipped_tiles().into_iter().map(|t| TileRow {
            label: t.label,
            a: t.a,
            b: t.b,
            slice_level: level,
        }),
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityRow {
    pub rho: f64,
    #[serde(rename = "R_window")]
    pub r_window: f64,
    pub density: f64,
}

pub fn write_density(path: &Path, rows: &[DensityRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Serialize)]
struct ImageRow {
    k: i64,
    phi_k: f64,
    g_k: f64,
}

pub fn write_factor_image(path: &Path, image: &FactorImage) -> Result<()> {
    write_rows(
        path,
        image.phi.iter().zip(&image.g).enumerate().map(|(i, (&phi_k, &g_k))| ImageRow {
            k: image.lo + i as i64,
            phi_k,
            g_k,
        }),
    )
}

#[derive(Serialize)]
struct GapRow {
    n_gap: u64,
    count: u64,
}

pub fn write_gaps(path: &Path, gaps: &BTreeMap<u64, u64>) -> Result<()> {
    write_rows(path, gaps.iter().map(|(&n_gap, &count)| GapRow { n_gap, count }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub instance: String,
    pub eps: f64,
    pub mode: String,
    pub widim: usize,
    pub seconds: f64,
}

pub fn write_benchmark(path: &Path, rows: &[BenchmarkRow]) -> Result<()> {
    write_rows(path, rows)
}

#[derive(Serialize)]
struct FiberRow {
    probe: usize,
    fiber_size: usize,
    widim_upper: usize,
    bound: f64,
    pass: bool,
}

pub fn write_fiber_probes(path: &Path, probes: &[FiberProbe]) -> Result<()> {
    write_rows(
        path,
        probes.iter().map(|p| FiberRow {
            probe: p.probe,
            fiber_size: p.fiber_size,
            widim_upper: p.widim_upper,
            bound: p.bound,
            pass: p.pass,
        }),
    )
}

pub fn write_chain_probes(path: &Path, probes: &[ChainProbe]) -> Result<()> {
    write_rows(
        path,
        probes.iter().map(|p| FiberRow {
            probe: p.probe,
            fiber_size: p.fiber_size,
            widim_upper: p.widim_upper,
            bound: p.bound,
            pass: p.pass && p.contained,
        }),
    )
}

#[derive(Serialize)]
struct SeparationJson {
    phi_z0: f64,
    phi_zprime0: f64,
    separated: bool,
}

pub fn write_separation(path: &Path, sep: &Separation) -> Result<()> {
    let body = SeparationJson {
        phi_z0: sep.phi_z0,
        phi_zprime0: sep.phi_zprime0,
        separated: sep.separated,
    };
    let text = serde_json::to_string_pretty(&body).map_err(|e| io_error(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| io_error(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tiling::Tile;

    fn tmp(name: &str) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!("meandim-export-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn tiling_and_image_tables() {
        let tiles = vec![
            Tile { label: 0, a: -5.0, b: 2.5 },
            Tile { label: 6, a: 2.5, b: 9.0 },
        ];
        let t = IntervalTiling::from_tiles(100.0, (-4.0, 8.0), tiles, vec![3]).unwrap();
        let p = tmp("tiles.csv");
        write_tiling(&p, &t).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        assert_eq!(text, "label,a,b,slice_level\n0,-4.0,2.5,100.0\n6,2.5,8.0,100.0\n");

        let img = FactorImage {
            lo: -1,
            phi: vec![0.0, 1.5],
            g: vec![0.0, 0.25],
        };
        let p = tmp("image.csv");
        write_factor_image(&p, &img).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "k,phi_k,g_k\n-1,0.0,0.0\n0,1.5,0.25\n");
    }

    #[test]
    fn gap_and_density_headers() {
        let p = tmp("gaps.csv");
        write_gaps(&p, &BTreeMap::from([(34, 2), (55, 1)])).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "n_gap,count\n34,2\n55,1\n");
        let p = tmp("density.csv");
        write_density(&p, &[DensityRow { rho: 9.0, r_window: 1000.0, density: 0.05 }]).unwrap();
        assert!(std::fs::read_to_string(&p).unwrap().starts_with("rho,R_window,density\n"));
    }
}
