//! 3-uniform hypergraphs without the triangle F = {123, 124, 345}.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{balanced_partitions, Instance};
use crate::combin::{colex_rank, permutations, subsets_colex};
use crate::error::{invalid, Result};
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{Template, TypePool};
use crate::types::{FactLayout, QfType};

pub fn signature() -> Arc<Signature> {
    Arc::new(Signature::new(vec![("E", 3)]).expect("valid signature"))
}

/// A hypergraph on [n] as a structure with E symmetric on its edges.
pub fn hypergraph(n: usize, edges: &[[usize; 3]]) -> Structure {
    let mut s = Structure::empty(signature(), n);
    for e in edges {
        for p in permutations(3) {
            s.set(0, &[e[p[0]], e[p[1]], e[p[2]]], true);
        }
    }
    s
}

/// The triangle on five points.
pub fn triangle() -> Structure {
    hypergraph(5, &[[0, 1, 2], [0, 1, 3], [2, 3, 4]])
}

pub fn property() -> Result<HereditaryProperty> {
    let sig = signature();
    let mut f = Vec::new();
    f.push(ForbiddenEntry::non_induced(Structure::from_tuples(
        sig.clone(),
        1,
        &[vec![vec![0, 0, 0]]],
    )?));
    let mut seen = HashSet::new();
    for t in [[0, 0, 1], [0, 1, 0], [1, 0, 0], [0, 1, 1], [1, 0, 1], [1, 1, 0]] {
        let s = Structure::from_tuples(sig.clone(), 2, &[vec![t.to_vec()]])?;
        if seen.insert(s.canonical_form()) {
            f.push(ForbiddenEntry::non_induced(s));
        }
    }
    let perms = permutations(3);
    for mask in 1u32..(1 << 6) - 1 {
        let mut s = Structure::empty(sig.clone(), 3);
        for (i, p) in perms.iter().enumerate() {
            if mask >> i & 1 == 1 {
                s.set(0, p, true);
            }
        }
        if seen.insert(s.canonical_form()) {
            f.push(ForbiddenEntry::induced(s));
        }
    }
    f.push(ForbiddenEntry::non_induced(triangle()));
    HereditaryProperty::new(sig, Mode::NonInduced, f)
}

/// p_1: an edge, p_2: a non-edge.
pub fn triple_type(layout: &FactLayout, i: usize) -> QfType {
    match i {
        1 => QfType(permutations(3).iter().fold(0, |acc, p| acc | layout.bit(0, p))),
        2 => QfType(0),
        _ => panic!("triple types are numbered 1 and 2"),
    }
}

pub fn instance() -> Result<Instance> {
    let prop = Arc::new(property()?);
    let layout = prop.layout()?;
    let types = vec![triple_type(&layout, 1), triple_type(&layout, 2)];
    Ok(Instance {
        name: "triples".into(),
        pool: TypePool::with_types(prop, types)?,
    })
}

/// Ψ(T): triples whose choice set contains an edge.
pub fn psi(t: &Template) -> Structure {
    let edge = triple_type(&t.pool.layout, 1);
    let edges: Vec<[usize; 3]> = t
        .subsets()
        .into_iter()
        .filter(|a| t.ch(a).contains(&edge))
        .map(|a| [a[0], a[1], a[2]])
        .collect();
    hypergraph(t.n, &edges)
}

/// Ψ⁻¹(H): non-edge everywhere, edge on the edges of H.
pub fn psi_inverse(pool: &Arc<TypePool>, g: &Structure) -> Result<Template> {
    if *g.sig != *signature() {
        return invalid("expected a 3-uniform hypergraph");
    }
    let (edge, non) = (triple_type(&pool.layout, 1), triple_type(&pool.layout, 2));
    Template::from_fn(pool.clone(), g.n, |a| {
        if g.holds(0, a) {
            vec![non, edge]
        } else {
            vec![non]
        }
    })
}

pub fn is_downward_closed(t: &Template) -> bool {
    let non = triple_type(&t.pool.layout, 2);
    t.choices.iter().all(|c| c.contains(&non))
}

/// G*: add the non-edge to every choice set.
pub fn downward_close(t: &Template) -> Result<Template> {
    psi_inverse(&t.pool, &psi(t))
}

/// e(n) = ⌊n/3⌋⌊(n+1)/3⌋⌊(n+2)/3⌋.
pub fn e_of(n: usize) -> u64 {
    (n / 3) as u64 * ((n + 1) / 3) as u64 * n.div_ceil(3) as u64
}

/// 2^{e(n)}, the large-n closed form.
pub fn closed_form_ex(n: usize) -> BigUint {
    BigUint::from(2u32).pow(e_of(n) as u32)
}

/// Balanced complete tripartite hypergraphs on [n].
pub fn balanced_tripartite(n: usize) -> Vec<Structure> {
    let mut out: Vec<Structure> = balanced_partitions(n, 3)
        .into_iter()
        .map(|p| {
            let edges: Vec<[usize; 3]> = subsets_colex(n, 3)
                .into_iter()
                .filter(|a| p[a[0]] != p[a[1]] && p[a[0]] != p[a[2]] && p[a[1]] != p[a[2]])
                .map(|a| [a[0], a[1], a[2]])
                .collect();
            hypergraph(n, &edges)
        })
        .collect();
    out.sort_by(|a, b| a.tables().cmp(b.tables()));
    out.dedup();
    out
}

/// Does the edge set (a bitmask over colex-ranked triples) contain F?
pub fn contains_triangle(n: usize, edges: u64) -> bool {
    let has = |mut t: [usize; 3]| {
        t.sort_unstable();
        edges >> colex_rank(&t) & 1 == 1
    };
    for a in 0..n {
        for b in a + 1..n {
            for c in 0..n {
                if c == a || c == b || !has([a, b, c]) {
                    continue;
                }
                for d in c + 1..n {
                    if d == a || d == b || !has([a, b, d]) {
                        continue;
                    }
                    if (0..n).any(|e| e != a && e != b && e != c && e != d && has([c, d, e])) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Maximum edge count of an F-free hypergraph on [n], by exhaustion (n ≤ 6).
pub fn max_triangle_free_edges(n: usize) -> Result<u32> {
    let m = subsets_colex(n, 3).len();
    if m > 20 {
        return invalid("exhaustive search supports n <= 6");
    }
    Ok((0u64..1 << m)
        .filter(|&e| !contains_triangle(n, e))
        .map(|e| e.count_ones())
        .max()
        .unwrap_or(0))
}

/// ex(n, P) = 2^{max edges of an F-free hypergraph}.
pub fn oracle_ex(n: usize) -> Result<BigUint> {
    Ok(BigUint::from(2u32).pow(max_triangle_free_edges(n)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::extremal::search_extremal;
    use proptest::prelude::*;

    #[test]
    fn two_triple_types() {
        let inst = instance().unwrap();
        assert_eq!(
            inst.prop().realized_types(&Budget::unlimited()).unwrap(),
            inst.pool.types
        );
        assert!(inst.pool.uniform_lower());
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(e_of(3), 1);
        assert_eq!(e_of(4), 2);
        assert_eq!(e_of(5), 4);
        assert_eq!(closed_form_ex(4), BigUint::from(4u32));
        assert_eq!(closed_form_ex(5), BigUint::from(16u32));
        assert_eq!(balanced_tripartite(5).len(), 15);
    }

    #[test]
    fn small_extremal_numbers_by_exhaustion() {
        assert_eq!(max_triangle_free_edges(4).unwrap(), 4);
        // the star at one vertex has C(4,2) = 6 edges and no triangle
        assert_eq!(max_triangle_free_edges(5).unwrap(), 6);
        assert!(contains_triangle(5, triangle_mask()));
    }

    fn triangle_mask() -> u64 {
        [[0, 1, 2], [0, 1, 3], [2, 3, 4]]
            .iter()
            .fold(0, |acc, t| acc | 1 << colex_rank(t))
    }

    #[test]
    fn search_agrees_with_exhaustion() {
        let inst = instance().unwrap();
        for n in 3..=5 {
            let rep = search_extremal(&inst.pool, n, 1000, 1, &Budget::unlimited()).unwrap();
            assert_eq!(rep.ex, oracle_ex(n).unwrap(), "n = {n}");
            assert!(rep.extremal_templates.iter().all(is_downward_closed));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_and_closure_gain(masks in proptest::collection::vec(1u32..4, 4)) {
            let inst = instance().unwrap();
            let b = Budget::unlimited();
            let t = Template::new(
                inst.pool.clone(),
                4,
                masks.iter().map(|m| (0..2).filter(|i| m >> i & 1 == 1).map(|i| inst.pool.types[i]).collect()).collect(),
            ).unwrap();
            let star = downward_close(&t).unwrap();
            prop_assert!(is_downward_closed(&star));
            prop_assert_eq!(psi(&star), psi(&t));
            prop_assert_eq!(psi_inverse(&inst.pool, &psi(&star)).unwrap(), star.clone());
            let d = crate::distance::template_diff(&t, &star).unwrap().len() as u32;
            prop_assert!(star.sub_count(&b).unwrap().count >= t.sub_count(&b).unwrap().count * BigUint::from(2u32).pow(d));
        }
    }
}
