//! Worked instance families with their translations to set-valued
//! hypergraphs and closed-form extremal oracles.

use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;

use crate::combin::{colex_rank, subsets_colex};
use crate::error::{invalid, Result};
use crate::property::HereditaryProperty;
use crate::template::TypePool;

pub mod colored;
pub mod digraph;
pub mod errorex;
pub mod metric;
pub mod multigraph;
pub mod triples;

/// A complete or partial assignment of label sets to the k-subsets of [n].
///
/// `sets` is indexed by the colex rank of the k-subset; labels are kept sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetGraph {
    pub n: usize,
    pub k: usize,
    pub sets: Vec<Vec<usize>>,
}

impl SetGraph {
    pub fn new(n: usize, k: usize, mut sets: Vec<Vec<usize>>) -> Result<Self> {
        if sets.len() != subsets_colex(n, k).len() {
            return invalid(format!("expected one label set per {k}-subset of {n} points"));
        }
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        Ok(SetGraph { n, k, sets })
    }

    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> Vec<usize>) -> Self {
        let sets = subsets_colex(n, k)
            .iter()
            .map(|a| {
                let mut s = f(a);
                s.sort_unstable();
                s.dedup();
                s
            })
            .collect();
        SetGraph { n, k, sets }
    }

    pub fn get(&self, a: &[usize]) -> &[usize] {
        &self.sets[colex_rank(a)]
    }

    pub fn is_complete(&self) -> bool {
        self.sets.iter().all(|s| !s.is_empty())
    }

    /// W(G) = ∏ |c(e)|.
    pub fn weight(&self) -> BigUint {
        self.sets.iter().fold(BigUint::one(), |acc, s| acc * s.len())
    }

    /// Number of k-subsets where the two label sets differ.
    pub fn delta(&self, other: &SetGraph) -> usize {
        self.sets.iter().zip(&other.sets).filter(|(a, b)| a != b).count()
    }
}

/// A property together with the type pool used to build its templates.
#[derive(Clone, Debug)]
pub struct Instance {
    pub name: String,
    pub pool: Arc<TypePool>,
}

impl Instance {
    pub fn prop(&self) -> &Arc<HereditaryProperty> {
        &self.pool.prop
    }
}

/// Maximal sets of ⌊n/2⌋ pairwise disjoint pairs of [n], each sorted.
pub fn maximum_matchings(n: usize) -> Vec<Vec<(usize, usize)>> {
    fn go(free: &[usize], want: usize, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        if cur.len() == want {
            let mut m = cur.clone();
            m.sort_unstable();
            out.push(m);
            return;
        }
        if free.len() < 2 * (want - cur.len()) {
            return;
        }
        let x = free[0];
        // x unmatched (possible only when a vertex is left over)
        if free.len() > 2 * (want - cur.len()) {
            go(&free[1..], want, cur, out);
        }
        for i in 1..free.len() {
            let y = free[i];
            let rest: Vec<usize> = free[1..].iter().copied().filter(|&z| z != y).collect();
            cur.push((x, y));
            go(&rest, want, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    let free: Vec<usize> = (0..n).collect();
    go(&free, n / 2, &mut Vec::new(), &mut out);
    out.sort();
    out.dedup();
    out
}

/// Partitions of [n] into `parts` classes whose sizes differ by at most one,
/// as class labels per vertex (restricted growth form).
pub fn balanced_partitions(n: usize, parts: usize) -> Vec<Vec<usize>> {
    crate::combin::set_partitions(n)
        .into_iter()
        .filter(|p| {
            let t = crate::combin::blocks(p);
            if t != parts.min(n) {
                return false;
            }
            let mut sizes = vec![0usize; t];
            for &b in p {
                sizes[b] += 1;
            }
            sizes.iter().max().unwrap_or(&0) - sizes.iter().min().unwrap_or(&0) <= 1
        })
        .collect()
}

/// Edges of the balanced complete k-partite graph on n vertices.
pub fn turan_edges(n: usize, k: usize) -> u64 {
    let k = k.max(1);
    let (q, rem) = (n / k, n % k);
    let inside: u64 = (0..k)
        .map(|i| {
            let s = (q + usize::from(i < rem)) as u64;
            s * s.saturating_sub(1) / 2
        })
        .sum();
    (n as u64) * (n as u64).saturating_sub(1) / 2 - inside
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matchings_of_small_complete_graphs() {
        assert_eq!(maximum_matchings(3).len(), 3);
        assert_eq!(maximum_matchings(4).len(), 3);
        assert_eq!(maximum_matchings(5).len(), 15);
        assert_eq!(maximum_matchings(6).len(), 15);
    }

    #[test]
    fn turan_numbers() {
        assert_eq!(turan_edges(3, 2), 2);
        assert_eq!(turan_edges(4, 2), 4);
        assert_eq!(turan_edges(5, 2), 6);
        assert_eq!(turan_edges(6, 3), 12);
        assert_eq!(balanced_partitions(4, 2).len(), 3);
        assert_eq!(balanced_partitions(3, 2).len(), 3);
    }

    #[test]
    fn set_graph_weight_and_delta() {
        let g = SetGraph::new(3, 2, vec![vec![1, 2, 3], vec![1], vec![2, 1]]).unwrap();
        assert_eq!(g.weight(), BigUint::from(6u32));
        assert_eq!(g.get(&[1, 2]), &[1, 2]);
        let h = SetGraph::new(3, 2, vec![vec![1, 2, 3], vec![2], vec![1, 2]]).unwrap();
        assert_eq!(g.delta(&h), 1);
    }
}
