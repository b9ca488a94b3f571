//! Multigraphs with bounded triangle weight and their weight products.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::combin::{binom, colex_rank, subsets_colex};
use crate::error::{invalid, Result};

/// Weights on the pairs of [n], indexed by colex rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multigraph {
    pub n: usize,
    pub w: Vec<u64>,
}

impl Multigraph {
    pub fn new(n: usize, w: Vec<u64>) -> Result<Self> {
        if w.len() as u64 != binom(n, 2) {
            return invalid(format!("expected {} pair weights", binom(n, 2)));
        }
        Ok(Multigraph { n, w })
    }

    pub fn constant(n: usize, a: u64) -> Self {
        Multigraph {
            n,
            w: vec![a; binom(n, 2) as usize],
        }
    }

    pub fn weight(&self, x: usize, y: usize) -> u64 {
        let (a, b) = if x < y { (x, y) } else { (y, x) };
        self.w[colex_rank(&[a, b])]
    }

    /// Every s-set carries total weight at most q.
    pub fn is_sq_graph(&self, s: usize, q: u64) -> bool {
        subsets_colex(self.n, s).iter().all(|set| {
            let mut total = 0;
            for (i, &x) in set.iter().enumerate() {
                for &y in &set[i + 1..] {
                    total += self.weight(x, y);
                }
            }
            total <= q
        })
    }

    /// P(G) = ∏ w(xy).
    pub fn product(&self) -> BigUint {
        self.w.iter().fold(BigUint::one(), |acc, &x| acc * x)
    }

    pub fn in_u1(&self, a: u64) -> bool {
        self.w.iter().all(|&x| x == a)
    }

    /// ⌊n/2⌋ disjoint pairs of weight a+1, everything else a.
    pub fn in_u2(&self, a: u64) -> bool {
        let heavy: Vec<Vec<usize>> = subsets_colex(self.n, 2)
            .into_iter()
            .zip(&self.w)
            .filter_map(|(p, &x)| (x == a + 1).then_some(p))
            .collect();
        if self.w.iter().any(|&x| x != a && x != a + 1) || heavy.len() != self.n / 2 {
            return false;
        }
        let mut seen = vec![false; self.n];
        for p in &heavy {
            for &v in p {
                if seen[v] {
                    return false;
                }
                seen[v] = true;
            }
        }
        true
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BoundCase {
    /// (3,3a)-graph.
    Uniform,
    /// (3,3a+1)-graph but not (3,3a).
    Matching,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MultigraphReport {
    pub case: Option<BoundCase>,
    #[serde(serialize_with = "crate::json::ser_big")]
    pub product: BigUint,
    #[serde(serialize_with = "crate::json::ser_big")]
    pub bound: BigUint,
    pub within_bound: bool,
    pub attains_bound: bool,
    pub in_extremal_family: bool,
}

pub fn uniform_bound(n: usize, a: u64) -> BigUint {
    BigUint::from(a).pow(binom(n, 2) as u32)
}

/// a^{C(n,2)} ((a+1)/a)^{⌊n/2⌋}, an integer.
pub fn matching_bound(n: usize, a: u64) -> BigUint {
    let h = (n / 2) as u32;
    BigUint::from(a).pow(binom(n, 2) as u32 - h) * BigUint::from(a + 1).pow(h)
}

/// Classify G and compare P(G) with the matching bound. Outside both
/// classes the report has no case and trivially holds.
pub fn check_multigraph_bound(g: &Multigraph, a: u64) -> Result<MultigraphReport> {
    if g.n < 3 {
        return invalid("need at least 3 vertices");
    }
    if a == 0 {
        return invalid("a must be positive");
    }
    let product = g.product();
    let (case, bound, member) = if g.is_sq_graph(3, 3 * a) {
        (Some(BoundCase::Uniform), uniform_bound(g.n, a), g.in_u1(a))
    } else if g.is_sq_graph(3, 3 * a + 1) {
        (Some(BoundCase::Matching), matching_bound(g.n, a), g.in_u2(a))
    } else {
        return Ok(MultigraphReport {
            case: None,
            bound: product.clone(),
            product,
            within_bound: true,
            attains_bound: false,
            in_extremal_family: false,
        });
    };
    Ok(MultigraphReport {
        case,
        within_bound: product <= bound,
        attains_bound: product == bound,
        in_extremal_family: member,
        product,
        bound,
    })
}
