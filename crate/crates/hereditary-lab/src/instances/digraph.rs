//! Digraphs (and oriented graphs) without a transitive tournament on k+1
//! vertices.

use std::sync::Arc;

use num_bigint::BigUint;

use super::{balanced_partitions, turan_edges, Instance};
use crate::combin::{permutations, subsets_colex};
use crate::error::{invalid, Result};
use crate::extremal::CandidateFilter;
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{Template, TypePool};
use crate::types::{FactLayout, QfType};

pub fn signature() -> Arc<Signature> {
    Arc::new(Signature::new(vec![("E", 2)]).expect("valid signature"))
}

/// T_{k+1}: i → j for all i < j.
pub fn transitive_tournament(k: usize) -> Structure {
    let mut t = Structure::empty(signature(), k + 1);
    for i in 0..=k {
        for j in i + 1..=k {
            t.set(0, &[i, j], true);
        }
    }
    t
}

fn base_entries(k: usize, oriented: bool) -> Vec<ForbiddenEntry> {
    let sig = signature();
    let mut f = vec![ForbiddenEntry::non_induced(
        Structure::from_tuples(sig.clone(), 1, &[vec![vec![0, 0]]]).unwrap(),
    )];
    if oriented {
        f.push(ForbiddenEntry::non_induced(
            Structure::from_tuples(sig, 2, &[vec![vec![0, 1], vec![1, 0]]]).unwrap(),
        ));
    }
    f.push(ForbiddenEntry::non_induced(transitive_tournament(k)));
    f
}

pub fn property(k: usize) -> Result<HereditaryProperty> {
    if k < 2 {
        return invalid("k must be at least 2");
    }
    HereditaryProperty::new(signature(), Mode::NonInduced, base_entries(k, false))
}

/// The oriented-graph variant: double edges are forbidden as well.
pub fn oriented_property(k: usize) -> Result<HereditaryProperty> {
    if k < 2 {
        return invalid("k must be at least 2");
    }
    HereditaryProperty::new(signature(), Mode::NonInduced, base_entries(k, true))
}

/// p_1: x→y only, p_2: y→x only, p_3: both, p_4: neither.
pub fn pair_type(layout: &FactLayout, i: usize) -> QfType {
    let fwd = layout.bit(0, &[0, 1]);
    let back = layout.bit(0, &[1, 0]);
    QfType(match i {
        1 => fwd,
        2 => back,
        3 => fwd | back,
        4 => 0,
        _ => panic!("pair types are numbered 1..=4"),
    })
}

pub fn instance(k: usize) -> Result<Instance> {
    let prop = Arc::new(property(k)?);
    let layout = prop.layout()?;
    let types = (1..=4).map(|i| pair_type(&layout, i)).collect();
    Ok(Instance {
        name: format!("digraph-k{k}"),
        pool: TypePool::with_types(prop, types)?,
    })
}

pub fn oriented_instance(k: usize) -> Result<Instance> {
    let prop = Arc::new(oriented_property(k)?);
    let layout = prop.layout()?;
    let types = [1, 2, 4].iter().map(|&i| pair_type(&layout, i)).collect();
    Ok(Instance {
        name: format!("oriented-k{k}"),
        pool: TypePool::with_types(prop, types)?,
    })
}

fn label(layout: &FactLayout, p: QfType) -> usize {
    (1..=4)
        .find(|&i| pair_type(layout, i) == p)
        .expect("pool holds pair types only")
}

/// Ψ(T): (u,v) is an edge iff some choice on {u,v} has the edge u→v.
pub fn psi(t: &Template) -> Structure {
    let mut g = Structure::empty(signature(), t.n);
    for a in t.subsets() {
        let (u, v) = (a[0], a[1]);
        for &p in t.ch(&a) {
            match label(&t.pool.layout, p) {
                1 => g.set(0, &[u, v], true),
                2 => g.set(0, &[v, u], true),
                3 => {
                    g.set(0, &[u, v], true);
                    g.set(0, &[v, u], true);
                }
                _ => {}
            }
        }
    }
    g
}

/// Ψ⁻¹(G): p_4 everywhere, p_1/p_2 per present direction, p_3 on double edges.
pub fn psi_inverse(pool: &Arc<TypePool>, g: &Structure) -> Result<Template> {
    if *g.sig != *signature() {
        return invalid("expected a digraph");
    }
    let layout = pool.layout.clone();
    Template::from_fn(pool.clone(), g.n, |a| {
        let (u, v) = (a[0], a[1]);
        let (f, b) = (g.holds(0, &[u, v]), g.holds(0, &[v, u]));
        let mut ch = vec![pair_type(&layout, 4)];
        if f {
            ch.push(pair_type(&layout, 1));
        }
        if b {
            ch.push(pair_type(&layout, 2));
        }
        if f && b {
            ch.push(pair_type(&layout, 3));
        }
        ch.retain(|p| pool.contains(*p));
        ch
    })
}

fn closed_set(labels: &[usize]) -> bool {
    labels.contains(&4) && (labels.contains(&3) == (labels.contains(&1) && labels.contains(&2)))
}

pub fn is_downward_closed(t: &Template) -> bool {
    t.choices.iter().all(|ch| {
        let labels: Vec<usize> = ch.iter().map(|&p| label(&t.pool.layout, p)).collect();
        closed_set(&labels)
    })
}

/// G*: the downward-closed template with the same Ψ-image.
pub fn downward_close(t: &Template) -> Result<Template> {
    psi_inverse(&t.pool, &psi(t))
}

/// Choice-set filter restricting a search to downward-closed templates.
pub fn downward_filter(pool: &Arc<TypePool>) -> CandidateFilter {
    let layout = pool.layout.clone();
    Arc::new(move |set: &[QfType]| {
        let labels: Vec<usize> = set.iter().map(|&p| label(&layout, p)).collect();
        closed_set(&labels)
    })
}

/// (f_1, f_2): pairs with exactly one direction, pairs with both.
pub fn f_counts(g: &Structure) -> (u32, u32) {
    let (mut f1, mut f2) = (0, 0);
    for a in subsets_colex(g.n, 2) {
        match (g.holds(0, &[a[0], a[1]]), g.holds(0, &[a[1], a[0]])) {
            (true, true) => f2 += 1,
            (true, false) | (false, true) => f1 += 1,
            _ => {}
        }
    }
    (f1, f2)
}

/// Full subdigraphs of G: 2^{f_1} 4^{f_2}.
pub fn full_subdigraph_count(g: &Structure) -> BigUint {
    let (f1, f2) = f_counts(g);
    BigUint::from(2u32).pow(f1) * BigUint::from(4u32).pow(f2)
}

/// 2^{f_1} 3^{f_2}: full oriented subgraphs of G, i.e. 2^{e(G)} with
/// e(G) = f_1 + log2(3) f_2.
pub fn log3_subdigraph_count(g: &Structure) -> BigUint {
    let (f1, f2) = f_counts(g);
    BigUint::from(2u32).pow(f1) * BigUint::from(3u32).pow(f2)
}

/// Subdigraph-based T_{k+1} test written directly on edge lists.
pub fn contains_transitive_tournament(g: &Structure, k: usize) -> bool {
    subsets_colex(g.n, k + 1).iter().any(|set| {
        permutations(k + 1)
            .iter()
            .any(|perm| (0..=k).all(|i| (i + 1..=k).all(|j| g.holds(0, &[set[perm[i]], set[perm[j]]]))))
    })
}

/// DT_k(n): double edges across a Turán partition.
pub fn dt(k: usize, n: usize) -> Vec<Structure> {
    let mut out: Vec<Structure> = balanced_partitions(n, k)
        .into_iter()
        .map(|p| {
            let mut g = Structure::empty(signature(), n);
            for a in subsets_colex(n, 2) {
                if p[a[0]] != p[a[1]] {
                    g.set(0, &[a[0], a[1]], true);
                    g.set(0, &[a[1], a[0]], true);
                }
            }
            g
        })
        .collect();
    out.sort_by(|a, b| a.tables().cmp(b.tables()));
    out.dedup();
    out
}

/// ex(n, P) for digraphs: 4^{t_k(n)}.
pub fn oracle_ex(k: usize, n: usize) -> BigUint {
    BigUint::from(4u32).pow(turan_edges(n, k) as u32)
}

/// 3^{t_k(n)}: the value for oriented graphs.
pub fn oracle_ex_oriented(k: usize, n: usize) -> BigUint {
    BigUint::from(3u32).pow(turan_edges(n, k) as u32)
}

/// Maximum over loopless T_{k+1}-free digraphs of the number of full
/// subdigraphs (or, with `oriented`, of full oriented subgraphs), with the
/// maximizers.
pub fn brute_force_extremal(k: usize, n: usize, oriented: bool) -> (BigUint, Vec<Structure>) {
    let pairs = subsets_colex(n, 2);
    let mut pick = vec![0usize; pairs.len()];
    let mut best = BigUint::from(0u32);
    let mut all = Vec::new();
    loop {
        let mut g = Structure::empty(signature(), n);
        for (a, &s) in pairs.iter().zip(&pick) {
            // 0 none, 1 forward, 2 backward, 3 both
            if s == 1 || s == 3 {
                g.set(0, &[a[0], a[1]], true);
            }
            if s == 2 || s == 3 {
                g.set(0, &[a[1], a[0]], true);
            }
        }
        if !contains_transitive_tournament(&g, k) {
            let c = if oriented {
                log3_subdigraph_count(&g)
            } else {
                full_subdigraph_count(&g)
            };
            if c > best {
                best = c;
                all.clear();
                all.push(g);
            } else if c == best {
                all.push(g);
            }
        }
        if !crate::template::odometer(&mut pick, |_| 4) {
            break;
        }
    }
    all.sort_by(|a, b| a.tables().cmp(b.tables()));
    (best, all)
}
