//! Metric spaces with distances in [r], as structures with one symmetric
//! binary relation per distance.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;

use super::{maximum_matchings, Instance, SetGraph};
use crate::combin::{binom, blocks, set_partitions, subsets_colex};
use crate::error::{invalid, Result};
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{Template, TypePool};
use crate::types::{FactLayout, QfType};

fn check_r(r: usize) -> Result<()> {
    if !(3..=16).contains(&r) {
        return invalid(format!("metric instance needs 3 <= r <= 16, got {r}"));
    }
    Ok(())
}

pub fn signature(r: usize) -> Result<Arc<Signature>> {
    let names: Vec<String> = (1..=r).map(|i| format!("R{i}")).collect();
    Ok(Arc::new(Signature::new(
        names.iter().map(|s| (s.as_str(), 2)).collect(),
    )?))
}

/// (i, j, k) fails |i − j| ≤ k ≤ i + j.
pub fn violating(i: usize, j: usize, k: usize) -> bool {
    !(i.abs_diff(j) <= k && k <= i + j)
}

fn distance_structure(sig: &Arc<Signature>, n: usize, pairs: &[(usize, usize, usize)]) -> Structure {
    let mut s = Structure::empty(sig.clone(), n);
    for &(x, y, d) in pairs {
        s.set(d - 1, &[x, y], true);
        s.set(d - 1, &[y, x], true);
    }
    s
}

pub fn property(r: usize) -> Result<HereditaryProperty> {
    check_r(r)?;
    let sig = signature(r)?;
    let mut f = Vec::new();
    for i in 0..r {
        let mut lp = Structure::empty(sig.clone(), 1);
        lp.set(i, &[0, 0], true);
        f.push(ForbiddenEntry::non_induced(lp));
        let mut one_way = Structure::empty(sig.clone(), 2);
        one_way.set(i, &[0, 1], true);
        f.push(ForbiddenEntry::induced(one_way));
        for j in 0..r {
            if i == j {
                continue;
            }
            let mut both = Structure::empty(sig.clone(), 2);
            both.set(i, &[0, 1], true);
            both.set(j, &[0, 1], true);
            f.push(ForbiddenEntry::non_induced(both));
            let mut cross = Structure::empty(sig.clone(), 2);
            cross.set(i, &[0, 1], true);
            cross.set(j, &[1, 0], true);
            f.push(ForbiddenEntry::non_induced(cross));
        }
    }
    f.push(ForbiddenEntry::induced(Structure::empty(sig.clone(), 2)));
    let mut seen = HashSet::new();
    for i in 1..=r {
        for j in 1..=r {
            for k in 1..=r {
                if violating(i, j, k) {
                    let s = distance_structure(&sig, 3, &[(0, 1, i), (1, 2, j), (0, 2, k)]);
                    if seen.insert(s.canonical_form()) {
                        f.push(ForbiddenEntry::induced(s));
                    }
                }
            }
        }
    }
    HereditaryProperty::new(sig, Mode::Induced, f)
}

/// p_d: the 2-type saying the two points are at distance d.
pub fn distance_type(layout: &FactLayout, d: usize) -> QfType {
    QfType(layout.bit(d - 1, &[0, 1]) | layout.bit(d - 1, &[1, 0]))
}

pub fn instance(r: usize) -> Result<Instance> {
    let prop = Arc::new(property(r)?);
    let layout = prop.layout()?;
    let types = (1..=r).map(|d| distance_type(&layout, d)).collect();
    Ok(Instance {
        name: format!("metric-r{r}"),
        pool: TypePool::with_types(prop, types)?,
    })
}

fn distance_of(pool: &TypePool, p: QfType) -> usize {
    (1..=pool.prop.sig.len())
        .find(|&d| distance_type(&pool.layout, d) == p)
        .expect("metric pool holds distance types only")
}

/// Ψ(T): c(xy) = {d : p_d ∈ Ch(xy)}.
pub fn psi(t: &Template) -> SetGraph {
    let sets = t
        .choices
        .iter()
        .map(|ch| ch.iter().map(|&p| distance_of(&t.pool, p)).collect())
        .collect();
    SetGraph::new(t.n, 2, sets).expect("template has one set per pair")
}

pub fn psi_inverse(pool: &Arc<TypePool>, g: &SetGraph) -> Result<Template> {
    let r = pool.prop.sig.len();
    if g.k != 2 {
        return invalid("metric set-graphs live on pairs");
    }
    if !g.is_complete() {
        return invalid("set-graph is not complete");
    }
    if g.sets.iter().flatten().any(|&d| d == 0 || d > r) {
        return invalid(format!("distances must lie in 1..={r}"));
    }
    let choices = g
        .sets
        .iter()
        .map(|s| s.iter().map(|&d| distance_type(&pool.layout, d)).collect())
        .collect();
    Template::new(pool.clone(), g.n, choices)
}

/// No (i,j,k) ∈ c(xy) × c(yz) × c(xz) is violating.
pub fn is_metric_set_graph(g: &SetGraph) -> bool {
    subsets_colex(g.n, 3).iter().all(|t| {
        let (x, y, z) = (t[0], t[1], t[2]);
        let (a, b, c) = (g.get(&[x, y]), g.get(&[y, z]), g.get(&[x, z]));
        a.iter()
            .all(|&i| b.iter().all(|&j| c.iter().all(|&k| !violating(i, j, k))))
    })
}

/// m(r) = ⌈(r+1)/2⌉.
pub fn m_of(r: usize) -> usize {
    (r + 2) / 2
}

/// L_r = [(r−1)/2, r−1] for odd r.
pub fn lower_set(r: usize) -> Vec<usize> {
    ((r - 1) / 2..r).collect()
}

/// U_r = [(r+1)/2, r] for odd r.
pub fn upper_set(r: usize) -> Vec<usize> {
    (r.div_ceil(2)..=r).collect()
}

/// [r/2, r] for even r.
pub fn even_set(r: usize) -> Vec<usize> {
    (r / 2..=r).collect()
}

/// The closed form for ex(n, P).
pub fn oracle_ex(r: usize, n: usize) -> BigUint {
    let m = m_of(r) as u64;
    let e = binom(n, 2) as u32;
    if r.is_multiple_of(2) {
        BigUint::from(m).pow(e)
    } else {
        let h = (n / 2) as u32;
        BigUint::from(m).pow(e - h) * BigUint::from(m + 1).pow(h)
    }
}

/// C̃_r(n). For odd r, partitions with at most `max_parts` classes.
pub fn tilde_c(r: usize, n: usize, max_parts: usize) -> Vec<SetGraph> {
    if r.is_multiple_of(2) {
        let c = even_set(r);
        return vec![SetGraph::from_fn(n, 2, |_| c.clone())];
    }
    let (lo, up) = (lower_set(r), upper_set(r));
    let mut out: Vec<SetGraph> = set_partitions(n)
        .into_iter()
        .filter(|p| blocks(p) <= max_parts)
        .map(|p| SetGraph::from_fn(n, 2, |a| if p[a[0]] == p[a[1]] { lo.clone() } else { up.clone() }))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Ẽ_r(n) for odd r (U ∪ L on a maximum matching, U elsewhere); C̃_r(n) for even r.
pub fn extremal_family(r: usize, n: usize) -> Vec<SetGraph> {
    if r.is_multiple_of(2) {
        return tilde_c(r, n, 1);
    }
    let up = upper_set(r);
    let mut both = up.clone();
    both.extend(lower_set(r));
    let mut out: Vec<SetGraph> = maximum_matchings(n)
        .into_iter()
        .map(|m| {
            SetGraph::from_fn(n, 2, |a| {
                if m.contains(&(a[0], a[1])) {
                    both.clone()
                } else {
                    up.clone()
                }
            })
        })
        .collect();
    out.sort();
    out.dedup();
    out
}

/// The all-L_r set-graph, which is far from every extremal one when r is odd.
pub fn lower_witness(r: usize, n: usize) -> Result<SetGraph> {
    if r.is_multiple_of(2) {
        return invalid("the all-L_r witness is defined for odd r");
    }
    let lo = lower_set(r);
    Ok(SetGraph::from_fn(n, 2, |_| lo.clone()))
}

/// Exhaustive product maximization over complete metric set-graphs.
pub fn brute_force_extremal(r: usize, n: usize) -> (BigUint, Vec<SetGraph>) {
    let nonempty: Vec<Vec<usize>> = (1u32..1 << r)
        .map(|m| (1..=r).filter(|&d| m >> (d - 1) & 1 == 1).collect())
        .collect();
    let pairs = binom(n, 2) as usize;
    let mut pick = vec![0usize; pairs];
    let mut best = BigUint::from(0u32);
    let mut all = Vec::new();
    loop {
        let g = SetGraph {
            n,
            k: 2,
            sets: pick.iter().map(|&i| nonempty[i].clone()).collect(),
        };
        if is_metric_set_graph(&g) {
            let w = g.weight();
            if w > best {
                best = w;
                all.clear();
                all.push(g);
            } else if w == best {
                all.push(g);
            }
        }
        if !crate::template::odometer(&mut pick, |_| nonempty.len()) {
            break;
        }
    }
    all.sort();
    (best, all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::extremal::search_extremal;
    use proptest::prelude::*;

    #[test]
    fn realized_pairs_are_the_distance_types() {
        let inst = instance(3).unwrap();
        let found = inst.prop().realized_types(&Budget::unlimited()).unwrap();
        assert_eq!(found, inst.pool.types);
    }

    #[test]
    fn psi_of_example_template() {
        let inst = instance(3).unwrap();
        let g = SetGraph::new(3, 2, vec![vec![1, 2, 3], vec![1], vec![1, 2]]).unwrap();
        let t = psi_inverse(&inst.pool, &g).unwrap();
        let back = psi(&t);
        assert_eq!(back.get(&[0, 1]), &[1, 2, 3]);
        assert_eq!(back.get(&[1, 2]), &[1, 2]);
        assert_eq!(back.get(&[0, 2]), &[1]);
        assert_eq!(t.sub_count(&Budget::unlimited()).unwrap().count, g.weight());
        assert!(psi_inverse(
            &inst.pool,
            &SetGraph::new(3, 2, vec![vec![1], vec![], vec![2]]).unwrap()
        )
        .is_err());
    }

    #[test]
    fn closed_forms() {
        assert_eq!(m_of(3), 2);
        assert_eq!(m_of(4), 3);
        assert_eq!(lower_set(3), vec![1, 2]);
        assert_eq!(upper_set(3), vec![2, 3]);
        assert_eq!(even_set(4), vec![2, 3, 4]);
        assert_eq!(oracle_ex(3, 3), BigUint::from(12u32));
        assert_eq!(oracle_ex(3, 4), BigUint::from(144u32));
        assert_eq!(oracle_ex(4, 3), BigUint::from(27u32));
        assert_eq!(oracle_ex(4, 4), BigUint::from(729u32));
        assert_eq!(extremal_family(3, 4).len(), 3);
        assert_eq!(extremal_family(3, 3).len(), 3);
        for g in extremal_family(3, 4) {
            assert_eq!(g.weight(), oracle_ex(3, 4));
            assert!(is_metric_set_graph(&g));
        }
        for g in tilde_c(3, 4, 4) {
            assert!(is_metric_set_graph(&g));
        }
    }

    #[test]
    fn brute_force_matches_closed_form_and_family() {
        for (r, n) in [(3, 3), (3, 4), (4, 3)] {
            let (best, all) = brute_force_extremal(r, n);
            assert_eq!(best, oracle_ex(r, n));
            assert_eq!(all, extremal_family(r, n));
        }
    }

    #[test]
    fn generic_search_matches_brute_force_at_three_points() {
        let inst = instance(3).unwrap();
        let rep = search_extremal(&inst.pool, 3, 100, 1, &Budget::unlimited()).unwrap();
        let (best, all) = brute_force_extremal(3, 3);
        assert_eq!(rep.ex, best);
        let mut images: Vec<SetGraph> = rep.extremal_templates.iter().map(psi).collect();
        images.sort();
        assert_eq!(images, all);
    }

    fn arb_set_graph(r: usize) -> impl Strategy<Value = SetGraph> {
        (3usize..=5).prop_flat_map(move |n| {
            proptest::collection::vec(1u32..(1 << r), binom(n, 2) as usize).prop_map(move |masks| SetGraph {
                n,
                k: 2,
                sets: masks
                    .iter()
                    .map(|m| (1..=r).filter(|&d| m >> (d - 1) & 1 == 1).collect())
                    .collect(),
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn psi_round_trip(g in arb_set_graph(3)) {
            let inst = instance(3).unwrap();
            let t = psi_inverse(&inst.pool, &g).unwrap();
            prop_assert_eq!(psi(&t), g.clone());
            prop_assert_eq!(psi_inverse(&inst.pool, &psi(&t)).unwrap(), t.clone());
            prop_assert_eq!(t.choice_count(), g.weight());
        }

        #[test]
        fn metric_set_graphs_are_exactly_random_templates(g in arb_set_graph(3)) {
            let inst = instance(3).unwrap();
            let t = psi_inverse(&inst.pool, &g).unwrap();
            prop_assert_eq!(t.is_h_random(&Budget::unlimited()).unwrap(), is_metric_set_graph(&g));
        }
    }
}
