//! Nerves of cell covers and the partition-of-unity projection onto them.

use std::collections::VecDeque;

use serde::Serialize;

use super::space::{memberships, CellCover, CellSpace};
use crate::{Error, Result};

/// Distance in atom steps beyond which projection weights stop growing.
const WEIGHT_CLAMP: usize = 4;

/// Abstract simplicial complex on the cover elements, stored by its maximal
/// simplices.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NerveComplex {
    pub vertices: usize,
    pub simplices: Vec<Vec<usize>>,
    pub dimension: usize,
}

impl NerveComplex {
    /// Whether `face` is a face of some maximal simplex.
    pub fn contains(&self, face: &[usize]) -> bool {
        self.simplices.iter().any(|s| face.iter().all(|v| s.binary_search(v).is_ok()))
    }
}

/// Barycentric coordinates of one atom: `(element, weight)` with weights
/// summing to 1.
pub type Barycentric = Vec<(usize, f64)>;

/// Nerve of the cover together with the projection of every atom.
///
/// The weight of element `e` at an atom is its distance, in adjacency steps
/// and clamped, to the nearest atom outside `e`; an element covering every
/// atom gets indicator weights.
pub fn nerve_and_projection(space: &CellSpace, cover: &CellCover) -> Result<(NerveComplex, Vec<Barycentric>)> {
    let member = memberships(space, cover);
    if let Some(a) = member.iter().position(Vec::is_empty) {
        return Err(Error::Uncovered(vec![a]));
    }
    let mut faces: Vec<Vec<usize>> = member.clone();
    for f in space.features() {
        let mut touching: Vec<usize> = f.iter().flat_map(|&a| member[a].iter().copied()).collect();
        touching.sort_unstable();
        touching.dedup();
        faces.push(touching);
    }
    faces.sort_by_key(|f| std::cmp::Reverse(f.len()));
    faces.dedup();
    let mut simplices: Vec<Vec<usize>> = Vec::new();
    for f in faces {
        if !simplices.iter().any(|s| f.iter().all(|v| s.binary_search(v).is_ok())) {
            simplices.push(f);
        }
    }
    simplices.sort();
    let dimension = simplices.iter().map(Vec::len).max().unwrap_or(1) - 1;

    let mut depth = vec![vec![0usize; cover.elements.len()]; space.len()];
    for (e, atoms) in cover.elements.iter().enumerate() {
        let mut inside = vec![false; space.len()];
        for &a in atoms {
            inside[a] = true;
        }
        let mut queue: VecDeque<usize> = VecDeque::new();
        let mut dist = vec![usize::MAX; space.len()];
        for a in 0..space.len() {
            if !inside[a] {
                dist[a] = 0;
                queue.push_back(a);
            }
        }
        while let Some(a) = queue.pop_front() {
            for &b in space.neighbours(a) {
                if dist[b] == usize::MAX {
                    dist[b] = dist[a] + 1;
                    queue.push_back(b);
                }
            }
        }
        for &a in atoms {
            depth[a][e] = dist[a].min(WEIGHT_CLAMP).max(1);
        }
    }
    let projection = member
        .iter()
        .enumerate()
        .map(|(a, elems)| {
            let total: usize = elems.iter().map(|&e| depth[a][e]).sum();
            elems.iter().map(|&e| (e, depth[a][e] as f64 / total as f64)).collect()
        })
        .collect();
    Ok((
        NerveComplex {
            vertices: cover.elements.len(),
            simplices,
            dimension,
        },
        projection,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disjoint_cover_gives_vertices() {
        // two separated atoms
        let s = CellSpace::buckets(super::super::space::Axis::Interval, 1.0, 0.0, 0.1, 5, &[0, 3]).unwrap();
        let cover = CellCover { elements: vec![vec![0], vec![1]] };
        let (nerve, proj) = nerve_and_projection(&s, &cover).unwrap();
        assert_eq!(nerve.dimension, 0);
        assert_eq!(nerve.simplices, vec![vec![0], vec![1]]);
        assert_eq!(proj[0], vec![(0, 1.0)]);
    }

    #[test]
    fn overlapping_interval_cover_is_an_edge() {
        let s = CellSpace::grid(1, 0.0, 1.0, 10).unwrap();
        let cover = CellCover {
            elements: vec![(0..6).collect(), (4..10).collect()],
        };
        let (nerve, proj) = nerve_and_projection(&s, &cover).unwrap();
        assert_eq!(nerve.simplices, vec![vec![0, 1]]);
        assert_eq!(nerve.dimension, 1);
        for bary in &proj {
            let total: f64 = bary.iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert_eq!(proj[0], vec![(0, 1.0)]);
        assert_eq!(proj[5].len(), 2);
    }

    #[test]
    fn brick_cover_of_square_has_triangles() {
        let s = CellSpace::grid(2, -1.0, 1.0, 5).unwrap();
        let r = super::super::solver::min_multiplicity(&s, 0.9, super::super::solver::Mode::Greedy, Default::default())
            .unwrap();
        let (nerve, _) = nerve_and_projection(&s, &r.cover).unwrap();
        assert_eq!(nerve.dimension, 2);
        assert!(nerve.contains(&nerve.simplices[0][..1]));
    }
}
