//! Discretised metric spaces: finitely many box atoms under a weighted sup
//! metric, plus the closure incidences needed to count cover multiplicity.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    Interval,
    /// Circle of the given circumference, distance measured along arcs.
    Circle { period: f64 },
}

/// One coordinate of the ambient sup metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub kind: Axis,
    pub weight: f64,
    /// Number of grid slots along the axis when atoms carry grid indices;
    /// used to wrap index ranges on circles.
    pub slots: usize,
}

/// An axis-parallel box, optionally tagged with integer grid coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub grid: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSpace {
    axes: Vec<AxisSpec>,
    atoms: Vec<Atom>,
    /// Sets of atoms sharing a closure point.
    features: Vec<Vec<usize>>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
    #[serde(skip)]
    atom_features: Vec<Vec<usize>>,
}

impl CellSpace {
    pub fn new(axes: Vec<AxisSpec>, atoms: Vec<Atom>, features: Vec<Vec<usize>>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::Precondition("cell space needs at least one atom".into()));
        }
        for (i, a) in atoms.iter().enumerate() {
            if a.lo.len() != axes.len() || a.hi.len() != axes.len() || a.lo.iter().zip(&a.hi).any(|(l, h)| l > h) {
                return Err(Error::Precondition(format!("atom {i} is not a box in {} dimensions", axes.len())));
            }
            if let Some(g) = &a.grid {
                if g.len() != axes.len() || g.iter().zip(&axes).any(|(&k, ax)| k >= ax.slots) {
                    return Err(Error::Precondition(format!("atom {i} has out-of-range grid index")));
                }
            }
        }
        let mut atom_features = vec![Vec::new(); atoms.len()];
        for (f, members) in features.iter().enumerate() {
            for &a in members {
                if a >= atoms.len() {
                    return Err(Error::Precondition(format!("feature {f} names missing atom {a}")));
                }
                atom_features[a].push(f);
            }
        }
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for members in &features {
            for &a in members {
                adjacency[a].extend(members.iter().copied().filter(|&b| b != a));
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        Ok(Self {
            axes,
            atoms,
            features,
            adjacency,
            atom_features,
        })
    }

    /// `[lo, hi]^dim` cut into `g^dim` congruent boxes, sup metric. Features
    /// are the grid vertices.
    pub fn grid(dim: usize, lo: f64, hi: f64, g: usize) -> Result<Self> {
        if dim == 0 || g == 0 || !(lo < hi) {
            return Err(Error::Precondition("grid needs dim >= 1, g >= 1 and lo < hi".into()));
        }
        let step = (hi - lo) / g as f64;
        let count = g.pow(dim as u32);
        let index = |cell: &[usize]| cell.iter().rev().fold(0, |acc, &k| acc * g + k);
        let unflatten = |mut i: usize, base: usize| -> Vec<usize> {
            (0..dim)
                .map(|_| {
                    let k = i % base;
                    i /= base;
                    k
                })
                .collect()
        };
        let atoms = (0..count)
            .map(|i| {
                let cell = unflatten(i, g);
                Atom {
                    lo: cell.iter().map(|&k| lo + k as f64 * step).collect(),
                    hi: cell.iter().map(|&k| lo + (k + 1) as f64 * step).collect(),
                    grid: Some(cell),
                }
            })
            .collect();
        let features = (0..(g + 1).pow(dim as u32))
            .map(|v| {
                let vertex = unflatten(v, g + 1);
                let mut members = Vec::new();
                for corner in 0..(1usize << dim) {
                    let cell: Option<Vec<usize>> = vertex
                        .iter()
                        .enumerate()
                        .map(|(d, &k)| {
                            let c = if corner >> d & 1 == 1 { k.checked_sub(1) } else { Some(k) };
                            c.filter(|&c| c < g)
                        })
                        .collect();
                    if let Some(cell) = cell {
                        members.push(index(&cell));
                    }
                }
                members.sort_unstable();
                members
            })
            .collect();
        let axes = vec![
            AxisSpec {
                kind: Axis::Interval,
                weight: 1.0,
                slots: g,
            };
            dim
        ];
        Self::new(axes, atoms, features)
    }

    /// One-dimensional space from occupied buckets `[lo + k w, lo + (k+1) w]`
    /// of a line or circle split into `slots` buckets. Consecutive occupied
    /// buckets touch.
    pub fn buckets(kind: Axis, weight: f64, lo: f64, width: f64, slots: usize, occupied: &[usize]) -> Result<Self> {
        let mut occ: Vec<usize> = occupied.to_vec();
        occ.sort_unstable();
        occ.dedup();
        let atoms: Vec<Atom> = occ
            .iter()
            .map(|&k| Atom {
                lo: vec![lo + k as f64 * width],
                hi: vec![lo + (k + 1) as f64 * width],
                grid: Some(vec![k]),
            })
            .collect();
        let mut features: Vec<Vec<usize>> = (0..atoms.len()).map(|i| vec![i]).collect();
        for i in 1..occ.len() {
            if occ[i] == occ[i - 1] + 1 {
                features.push(vec![i - 1, i]);
            }
        }
        if matches!(kind, Axis::Circle { .. }) && occ.len() > 1 && occ[0] == 0 && occ[occ.len() - 1] == slots - 1 {
            features.push(vec![0, occ.len() - 1]);
        }
        let axes = vec![AxisSpec { kind, weight, slots }];
        Self::new(axes, atoms, features)
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn features(&self) -> &[Vec<usize>] {
        &self.features
    }

    pub fn features_of(&self, atom: usize) -> &[usize] {
        &self.atom_features[atom]
    }

    pub fn neighbours(&self, atom: usize) -> &[usize] {
        &self.adjacency[atom]
    }

    pub fn is_grid(&self) -> bool {
        self.atoms.iter().all(|a| a.grid.is_some())
    }

    /// Sup-metric diameter of a union of atoms. On circles the extent is the
    /// circumference minus the largest uncovered gap, capped at half the
    /// circumference; this never underestimates.
    pub fn diameter(&self, atoms: &[usize]) -> f64 {
        if atoms.is_empty() {
            return 0.0;
        }
        let mut best = 0.0f64;
        for (d, axis) in self.axes.iter().enumerate() {
            let extent = match axis.kind {
                Axis::Interval => {
                    let lo = atoms.iter().map(|&a| self.atoms[a].lo[d]).fold(f64::INFINITY, f64::min);
                    let hi = atoms.iter().map(|&a| self.atoms[a].hi[d]).fold(f64::NEG_INFINITY, f64::max);
                    hi - lo
                }
                Axis::Circle { period } => {
                    let mut arcs: Vec<(f64, f64)> = atoms
                        .iter()
                        .map(|&a| {
                            let s = self.atoms[a].lo[d].rem_euclid(period);
                            (s, s + (self.atoms[a].hi[d] - self.atoms[a].lo[d]))
                        })
                        .collect();
                    arcs.sort_by(|x, y| x.0.total_cmp(&y.0));
                    let mut reach = arcs[0].1;
                    let mut gap = 0.0f64;
                    for &(s, e) in &arcs[1..] {
                        gap = gap.max(s - reach);
                        reach = reach.max(e);
                    }
                    gap = gap.max(arcs[0].0 + period - reach);
                    (period - gap.max(0.0)).min(period / 2.0)
                }
            };
            best = best.max(extent * axis.weight);
        }
        best
    }

    pub fn atom_diameter(&self, atom: usize) -> f64 {
        self.diameter(&[atom])
    }

    pub fn max_atom_diameter(&self) -> f64 {
        (0..self.atoms.len()).map(|a| self.atom_diameter(a)).fold(0.0, f64::max)
    }

    /// Sub-space on the given atoms, keeping features restricted to them.
    pub fn subspace(&self, keep: &[usize]) -> Result<Self> {
        let mut map = vec![usize::MAX; self.atoms.len()];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let atoms = keep.iter().map(|&a| self.atoms[a].clone()).collect();
        let features = self
            .features
            .iter()
            .map(|f| f.iter().filter(|&&a| map[a] != usize::MAX).map(|&a| map[a]).collect::<Vec<_>>())
            .filter(|f| !f.is_empty())
            .collect();
        Self::new(self.axes.clone(), atoms, features)
    }
}

/// A cover by sets of atoms; elements may overlap.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellCover {
    pub elements: Vec<Vec<usize>>,
}

impl CellCover {
    /// Cover from an element label per atom.
    pub fn from_labels(labels: &[usize]) -> Self {
        let count = labels.iter().copied().max().map_or(0, |m| m + 1);
        let mut elements = vec![Vec::new(); count];
        for (atom, &l) in labels.iter().enumerate() {
            elements[l].push(atom);
        }
        elements.retain(|e| !e.is_empty());
        Self { elements }
    }
}

/// Mesh and multiplicity of a cover.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverStats {
    pub mesh: f64,
    pub multiplicity: usize,
}

/// For every atom, the elements containing it.
pub(crate) fn memberships(space: &CellSpace, cover: &CellCover) -> Vec<Vec<usize>> {
    let mut member = vec![Vec::new(); space.len()];
    for (e, atoms) in cover.elements.iter().enumerate() {
        for &a in atoms {
            if member[a].last() != Some(&e) {
                member[a].push(e);
            }
        }
    }
    member
}

/// Number of distinct elements touching a feature.
pub(crate) fn feature_count(feature: &[usize], member: &[Vec<usize>], scratch: &mut Vec<usize>) -> usize {
    scratch.clear();
    for &a in feature {
        scratch.extend_from_slice(&member[a]);
    }
    scratch.sort_unstable();
    scratch.dedup();
    scratch.len()
}

pub fn cover_stats(space: &CellSpace, cover: &CellCover) -> Result<CoverStats> {
    if cover.elements.iter().flatten().any(|&a| a >= space.len()) {
        return Err(Error::Precondition("cover names atoms outside the space".into()));
    }
    let member = memberships(space, cover);
    let uncovered: Vec<usize> = (0..space.len()).filter(|&a| member[a].is_empty()).collect();
    if !uncovered.is_empty() {
        return Err(Error::Uncovered(uncovered));
    }
    let mesh = cover.elements.iter().map(|e| space.diameter(e)).fold(0.0, f64::max);
    let mut scratch = Vec::new();
    let by_feature = space
        .features()
        .iter()
        .map(|f| feature_count(f, &member, &mut scratch))
        .max()
        .unwrap_or(0);
    let by_atom = member.iter().map(Vec::len).max().unwrap_or(0);
    Ok(CoverStats {
        mesh,
        multiplicity: by_feature.max(by_atom),
    })
}
