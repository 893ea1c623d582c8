//! Covers of small multiplicity at mesh below `eps`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::space::{cover_stats, feature_count, memberships, Axis, CellCover, CellSpace, CoverStats};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Greedy,
    LocalSearch,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Mode::Exact),
            "greedy" => Ok(Mode::Greedy),
            "local_search" | "local-search" => Ok(Mode::LocalSearch),
            other => Err(Error::Config(format!("unknown solver mode `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Search nodes allowed in exact mode.
    pub nodes: u64,
    /// Relabelling moves allowed in local search.
    pub moves: u64,
    pub seed: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            nodes: 20_000_000,
            moves: 5_000,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WidimResult {
    pub mode: Mode,
    /// Multiplicity of the best cover minus one.
    pub widim_upper: usize,
    /// Lower bound proved by exhausting the box dictionary.
    pub certified_lower: Option<usize>,
    /// Exact search ran out of budget; only the upper bound is meaningful.
    pub upper_only: bool,
    pub stats: CoverStats,
    pub cover: CellCover,
}

/// Best cover found in the given mode. Fails when some atom is too large to
/// sit in any element of mesh below `eps`.
pub fn min_multiplicity(space: &CellSpace, eps: f64, mode: Mode, budget: Budget) -> Result<WidimResult> {
    let atom = space.max_atom_diameter();
    if !(eps > atom) {
        return Err(Error::Resolution(format!(
            "eps = {eps} does not exceed the atom diameter {atom}"
        )));
    }
    let greedy = best_greedy(space, eps)?;
    match mode {
        Mode::Greedy => Ok(greedy),
        Mode::LocalSearch => local_search(space, eps, greedy, budget),
        Mode::Exact => exact(space, eps, greedy, budget),
    }
}

fn result_from_labels(space: &CellSpace, labels: &[usize], mode: Mode) -> Result<WidimResult> {
    let cover = CellCover::from_labels(labels);
    let stats = cover_stats(space, &cover)?;
    Ok(WidimResult {
        mode,
        widim_upper: stats.multiplicity - 1,
        certified_lower: None,
        upper_only: false,
        stats,
        cover,
    })
}

fn best_greedy(space: &CellSpace, eps: f64) -> Result<WidimResult> {
    let all: Vec<usize> = (0..space.len()).collect();
    if space.diameter(&all) < eps {
        return result_from_labels(space, &vec![0; space.len()], Mode::Greedy);
    }
    let mut best = result_from_labels(space, &ball_growing(space, eps), Mode::Greedy)?;
    if space.is_grid() {
        for labels in brick_partitions(space, eps) {
            let candidate = result_from_labels(space, &labels, Mode::Greedy)?;
            if candidate.stats.multiplicity < best.stats.multiplicity {
                best = candidate;
            }
        }
    }
    Ok(best)
}

/// Grow elements by breadth-first search from the first unassigned atom,
/// adding neighbours while the mesh stays below `eps`.
fn ball_growing(space: &CellSpace, eps: f64) -> Vec<usize> {
    let mut labels = vec![usize::MAX; space.len()];
    let mut next = 0;
    for seed in 0..space.len() {
        if labels[seed] != usize::MAX {
            continue;
        }
        let mut members = vec![seed];
        labels[seed] = next;
        let mut head = 0;
        while head < members.len() {
            let a = members[head];
            head += 1;
            for &b in space.neighbours(a) {
                if labels[b] != usize::MAX {
                    continue;
                }
                members.push(b);
                if space.diameter(&members) < eps {
                    labels[b] = next;
                } else {
                    members.pop();
                }
            }
        }
        next += 1;
    }
    labels
}

/// Staggered brick partitions: bricks of `b` slots per axis, where the
/// offset along axis `i` is a multiple of the brick layers along the later
/// axes. With unit coefficients a `d`-dimensional grid gets multiplicity
/// `d + 1` once the grid is fine enough relative to the brick.
fn brick_partitions(space: &CellSpace, eps: f64) -> Vec<Vec<usize>> {
    let dim = space.axes().len();
    let max_slots = space.axes().iter().map(|a| a.slots).max().unwrap_or(1);
    let mut out = Vec::new();
    let mut largest_fit = None;
    for b in (1..=max_slots).rev() {
        if largest_fit.is_some_and(|f: usize| b + 1 < f) {
            break;
        }
        let mut patterns: Vec<Vec<usize>> = (0..b.max(1)).map(|c| vec![c; dim]).collect();
        patterns.push((0..dim).map(|i| i + 1).collect());
        for coef in patterns {
            let mut keys: HashMap<Vec<usize>, usize> = HashMap::new();
            let labels: Vec<usize> = space
                .atoms()
                .iter()
                .map(|a| {
                    let g = a.grid.as_ref().expect("grid space");
                    let mut layers = vec![0usize; dim];
                    for i in (0..dim).rev() {
                        let shift: usize = (i + 1..dim).map(|j| layers[j] * coef[i]).sum::<usize>() % b;
                        layers[i] = (g[i] + shift) / b;
                    }
                    let n = keys.len();
                    *keys.entry(layers).or_insert(n)
                })
                .collect();
            let cover = CellCover::from_labels(&labels);
            if cover.elements.iter().all(|e| space.diameter(e) < eps) {
                out.push(labels);
                largest_fit.get_or_insert(b);
            }
        }
    }
    out
}

/// Multiplicity and the number of features attaining it.
fn objective(space: &CellSpace, labels: &[usize]) -> (usize, usize) {
    let cover = CellCover::from_labels(labels);
    let member = memberships(space, &cover);
    let mut scratch = Vec::new();
    let counts: Vec<usize> = space
        .features()
        .iter()
        .map(|f| feature_count(f, &member, &mut scratch))
        .collect();
    let max = counts.iter().copied().max().unwrap_or(1).max(1);
    (max, counts.iter().filter(|&&c| c == max).count())
}

fn local_search(space: &CellSpace, eps: f64, start: WidimResult, budget: Budget) -> Result<WidimResult> {
    let mut labels = vec![0usize; space.len()];
    for (e, atoms) in start.cover.elements.iter().enumerate() {
        for &a in atoms {
            labels[a] = e;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut score = objective(space, &labels);
    for _ in 0..budget.moves {
        if score.0 <= 1 {
            break;
        }
        let a = rng.gen_range(0..space.len());
        let nbrs = space.neighbours(a);
        if nbrs.is_empty() {
            continue;
        }
        let target = labels[nbrs[rng.gen_range(0..nbrs.len())]];
        if target == labels[a] {
            continue;
        }
        let mut members: Vec<usize> = (0..space.len()).filter(|&b| labels[b] == target).collect();
        members.push(a);
        if space.diameter(&members) >= eps {
            continue;
        }
        let old = labels[a];
        labels[a] = target;
        let next = objective(space, &labels);
        if next <= score {
            score = next;
        } else {
            labels[a] = old;
        }
    }
    let mut res = result_from_labels(space, &labels, Mode::LocalSearch)?;
    if res.stats.multiplicity > start.stats.multiplicity {
        res = WidimResult {
            mode: Mode::LocalSearch,
            ..start
        };
    }
    Ok(res)
}

/// All axis-aligned index boxes whose atoms form a set of diameter below
/// `eps`, deduplicated.
fn box_dictionary(space: &CellSpace, eps: f64) -> Vec<Vec<usize>> {
    let index: HashMap<&[usize], usize> = space
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| (a.grid.as_deref().expect("grid space"), i))
        .collect();
    let ranges: Vec<Vec<Vec<usize>>> = space
        .axes()
        .iter()
        .map(|ax| {
            let cyclic = matches!(ax.kind, Axis::Circle { .. });
            let mut rs = Vec::new();
            for start in 0..ax.slots {
                for len in 1..=ax.slots {
                    if !cyclic && start + len > ax.slots {
                        break;
                    }
                    if cyclic && len == ax.slots && start > 0 {
                        break;
                    }
                    rs.push((start..start + len).map(|k| k % ax.slots).collect());
                }
            }
            rs
        })
        .collect();
    let mut seen: HashMap<Vec<usize>, ()> = HashMap::new();
    let mut out = Vec::new();
    let mut choice = vec![0usize; ranges.len()];
    'outer: loop {
        // skip boxes whose extent along one axis alone is too large
        let mut members = Vec::new();
        let mut cell = vec![0usize; ranges.len()];
        collect_box(&ranges, &choice, 0, &mut cell, &index, &mut members);
        members.sort_unstable();
        if !members.is_empty() && space.diameter(&members) < eps && seen.insert(members.clone(), ()).is_none() {
            out.push(members);
        }
        for d in 0..ranges.len() {
            choice[d] += 1;
            if choice[d] < ranges[d].len() {
                continue 'outer;
            }
            choice[d] = 0;
        }
        break;
    }
    out
}

fn collect_box(
    ranges: &[Vec<Vec<usize>>],
    choice: &[usize],
    d: usize,
    cell: &mut Vec<usize>,
    index: &HashMap<&[usize], usize>,
    out: &mut Vec<usize>,
) {
    if d == ranges.len() {
        if let Some(&a) = index.get(cell.as_slice()) {
            out.push(a);
        }
        return;
    }
    for &k in &ranges[d][choice[d]] {
        cell[d] = k;
        collect_box(ranges, choice, d + 1, cell, index, out);
    }
}

enum Search {
    Found(Vec<usize>),
    Refuted,
    OutOfBudget,
}

struct ExactSearch<'a> {
    boxes: &'a [Vec<usize>],
    box_features: &'a [Vec<usize>],
    boxes_at: &'a [Vec<usize>],
    feature_load: Vec<usize>,
    covered: Vec<usize>,
    chosen: Vec<usize>,
    limit: usize,
    nodes: u64,
    budget: u64,
}

impl ExactSearch<'_> {
    fn run(&mut self, first: usize) -> Search {
        let Some(atom) = (first..self.covered.len()).find(|&a| self.covered[a] == 0) else {
            return Search::Found(self.chosen.clone());
        };
        let boxes_at = self.boxes_at;
        for &bx in &boxes_at[atom] {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Search::OutOfBudget;
            }
            if self.box_features[bx].iter().any(|&f| self.feature_load[f] >= self.limit) {
                continue;
            }
            for &f in &self.box_features[bx] {
                self.feature_load[f] += 1;
            }
            for &a in &self.boxes[bx] {
                self.covered[a] += 1;
            }
            self.chosen.push(bx);
            match self.run(atom + 1) {
                Search::Refuted => {}
                other => return other,
            }
            self.chosen.pop();
            for &a in &self.boxes[bx] {
                self.covered[a] -= 1;
            }
            for &f in &self.box_features[bx] {
                self.feature_load[f] -= 1;
            }
        }
        Search::Refuted
    }
}

/// Exhaustive search over covers by dictionary boxes, for multiplicity
/// `1, 2, ...` until a cover exists. Every refuted level is a lower bound
/// relative to the dictionary.
fn exact(space: &CellSpace, eps: f64, greedy: WidimResult, budget: Budget) -> Result<WidimResult> {
    if !space.is_grid() {
        return Err(Error::Precondition("exact mode needs atoms with grid indices".into()));
    }
    let boxes = box_dictionary(space, eps);
    let mut boxes_at = vec![Vec::new(); space.len()];
    let mut box_features = Vec::with_capacity(boxes.len());
    for (b, atoms) in boxes.iter().enumerate() {
        for &a in atoms {
            boxes_at[a].push(b);
        }
        let mut fs: Vec<usize> = atoms.iter().flat_map(|&a| space.features_of(a).iter().copied()).collect();
        fs.sort_unstable();
        fs.dedup();
        box_features.push(fs);
    }
    // try large boxes first: covers are found sooner, refutation is unaffected
    for list in &mut boxes_at {
        list.sort_by_key(|&b| std::cmp::Reverse(boxes[b].len()));
    }
    let mut nodes_left = budget.nodes;
    for limit in 1..greedy.stats.multiplicity {
        let mut search = ExactSearch {
            boxes: &boxes,
            box_features: &box_features,
            boxes_at: &boxes_at,
            feature_load: vec![0; space.features().len()],
            covered: vec![0; space.len()],
            chosen: Vec::new(),
            limit,
            nodes: 0,
            budget: nodes_left,
        };
        match search.run(0) {
            Search::Refuted => nodes_left -= search.nodes,
            Search::Found(chosen) => {
                let cover = CellCover {
                    elements: chosen.iter().map(|&b| boxes[b].clone()).collect(),
                };
                let stats = cover_stats(space, &cover)?;
                return Ok(WidimResult {
                    mode: Mode::Exact,
                    widim_upper: stats.multiplicity - 1,
                    certified_lower: Some(limit - 1),
                    upper_only: false,
                    stats,
                    cover,
                });
            }
            Search::OutOfBudget => {
                return Ok(WidimResult {
                    mode: Mode::Exact,
                    upper_only: true,
                    ..greedy
                })
            }
        }
    }
    Ok(WidimResult {
        mode: Mode::Exact,
        certified_lower: Some(greedy.widim_upper),
        ..greedy
    })
}
