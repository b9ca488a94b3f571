//! Colored k-uniform hypergraphs: every k-set carries exactly one color.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::{Instance, SetGraph};
use crate::combin::{colex_rank, permutations, subsets_colex, tuples};
use crate::error::{invalid, Result};
use crate::json::subset_key;
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{odometer, Template, TypePool};
use crate::types::{FactLayout, QfType};

/// A (k,C)-graph: one color index per colex-ranked k-subset.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    pub n: usize,
    pub k: usize,
    pub color: Vec<usize>,
}

impl ColoredGraph {
    pub fn get(&self, a: &[usize]) -> usize {
        self.color[colex_rank(a)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredGraphJson {
    pub n: usize,
    /// "[1,2]" → color name.
    pub colors: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredSpec {
    pub k: usize,
    pub colors: Vec<String>,
    #[serde(default)]
    pub forbidden: Vec<ColoredGraphJson>,
}

#[derive(Clone, Debug)]
pub struct ColoredInstance {
    pub k: usize,
    /// Colors kept, in signature order.
    pub colors: Vec<String>,
    /// Colors removed because no member realizes them.
    pub dropped: Vec<String>,
    pub forbidden: Vec<ColoredGraph>,
    pub instance: Instance,
}

fn signature(k: usize, colors: &[String]) -> Result<Arc<Signature>> {
    let names: Vec<String> = colors.iter().map(|c| format!("E_{c}")).collect();
    Ok(Arc::new(Signature::new(
        names.iter().map(|s| (s.as_str(), k)).collect(),
    )?))
}

pub fn to_structure(sig: &Arc<Signature>, g: &ColoredGraph) -> Structure {
    let mut s = Structure::empty(sig.clone(), g.n);
    for (a, &c) in subsets_colex(g.n, g.k).iter().zip(&g.color) {
        for p in permutations(g.k) {
            let t: Vec<usize> = p.iter().map(|&i| a[i]).collect();
            s.set(c, &t, true);
        }
    }
    s
}

fn parse_graph(j: &ColoredGraphJson, k: usize, colors: &[String], field: &str) -> Result<ColoredGraph> {
    if j.n < k {
        return invalid(format!("{field}: needs at least k = {k} vertices"));
    }
    let subsets = subsets_colex(j.n, k);
    let mut color = vec![usize::MAX; subsets.len()];
    for (key, name) in &j.colors {
        let Some(c) = colors.iter().position(|x| x == name) else {
            return invalid(format!("{field}.colors.{key}: unknown color {name:?}"));
        };
        let a = subsets.iter().position(|a| subset_key(a) == key.replace(' ', ""));
        match a {
            Some(i) => color[i] = c,
            None => {
                return invalid(format!(
                    "{field}.colors: key {key:?} is not a sorted {k}-subset of 1..={}",
                    j.n
                ))
            }
        }
    }
    if let Some(i) = color.iter().position(|&c| c == usize::MAX) {
        return invalid(format!(
            "{field}.colors: subset {} has no color",
            subset_key(&subsets[i])
        ));
    }
    Ok(ColoredGraph { n: j.n, k, color })
}

fn structural_entries(sig: &Arc<Signature>, k: usize) -> Result<Vec<ForbiddenEntry>> {
    let ncol = sig.len();
    let mut f = Vec::new();
    let mut seen = HashSet::new();
    // facts on tuples with a repeated entry
    for m in 1..k {
        for t in tuples(m, k) {
            let mut used: Vec<usize> = t.clone();
            used.sort_unstable();
            used.dedup();
            if used.len() != m {
                continue;
            }
            for c in 0..ncol {
                let s = Structure::from_tuples(
                    sig.clone(),
                    m,
                    &(0..ncol)
                        .map(|d| if d == c { vec![t.clone()] } else { vec![] })
                        .collect::<Vec<_>>(),
                )?;
                if seen.insert(s.canonical_form()) {
                    f.push(ForbiddenEntry::non_induced(s));
                }
            }
        }
    }
    // each color symmetric
    let perms = permutations(k);
    for c in 0..ncol {
        for mask in 1u64..(1 << perms.len()) - 1 {
            let mut s = Structure::empty(sig.clone(), k);
            for (i, p) in perms.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    s.set(c, p, true);
                }
            }
            if seen.insert(s.canonical_form()) {
                f.push(ForbiddenEntry {
                    structure: s,
                    mode: Mode::Induced,
                    scope: Some(vec![c]),
                });
            }
        }
    }
    // at most one color per k-set
    let id: Vec<usize> = (0..k).collect();
    for c in 0..ncol {
        for d in c + 1..ncol {
            let mut s = Structure::empty(sig.clone(), k);
            s.set(c, &id, true);
            s.set(d, &id, true);
            f.push(ForbiddenEntry::non_induced(s));
        }
    }
    // at least one
    f.push(ForbiddenEntry::induced(Structure::empty(sig.clone(), k)));
    Ok(f)
}

fn build(k: usize, colors: &[String], forbidden: &[ColoredGraph]) -> Result<HereditaryProperty> {
    let sig = signature(k, colors)?;
    let mut f = structural_entries(&sig, k)?;
    for g in forbidden {
        f.push(ForbiddenEntry::induced(to_structure(&sig, g)));
    }
    HereditaryProperty::new(sig, Mode::Induced, f)
}

/// p_c: the k-set has color c.
pub fn color_type(layout: &FactLayout, c: usize, k: usize) -> QfType {
    QfType(permutations(k).iter().fold(0, |acc, p| acc | layout.bit(c, p)))
}

pub fn colored_instance(spec: &ColoredSpec) -> Result<ColoredInstance> {
    let k = spec.k;
    if !(2..=3).contains(&k) {
        return invalid("colored instances support k = 2 or 3");
    }
    if spec.colors.is_empty() {
        return invalid("color set is empty");
    }
    let mut names = spec.colors.clone();
    names.sort();
    names.dedup();
    if names.len() != spec.colors.len() {
        return invalid("color names must be distinct");
    }
    let mut graphs = Vec::new();
    for (i, g) in spec.forbidden.iter().enumerate() {
        graphs.push(parse_graph(g, k, &spec.colors, &format!("forbidden[{i}]"))?);
    }
    // drop colors no member realizes
    let full = build(k, &spec.colors, &graphs)?;
    let full_layout = full.layout()?;
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for (c, name) in spec.colors.iter().enumerate() {
        if full.is_realized(color_type(&full_layout, c, k), &full_layout)? {
            kept.push(c);
        } else {
            dropped.push(name.clone());
        }
    }
    if kept.is_empty() {
        return invalid("no color is realized by the property");
    }
    let colors: Vec<String> = kept.iter().map(|&c| spec.colors[c].clone()).collect();
    let forbidden: Vec<ColoredGraph> = graphs
        .into_iter()
        .filter(|g| g.color.iter().all(|c| kept.contains(c)))
        .map(|g| ColoredGraph {
            color: g
                .color
                .iter()
                .map(|c| kept.iter().position(|x| x == c).unwrap())
                .collect(),
            ..g
        })
        .collect();
    let prop = Arc::new(build(k, &colors, &forbidden)?);
    let layout = prop.layout()?;
    let types = (0..colors.len()).map(|c| color_type(&layout, c, k)).collect();
    let pool = TypePool::with_types(prop, types)?;
    Ok(ColoredInstance {
        k,
        colors,
        dropped,
        forbidden,
        instance: Instance {
            name: format!("colored-k{k}"),
            pool,
        },
    })
}

impl ColoredInstance {
    fn color_of(&self, p: QfType) -> usize {
        (0..self.colors.len())
            .find(|&c| color_type(&self.instance.pool.layout, c, self.k) == p)
            .expect("pool holds color types only")
    }

    /// Ψ(T): H(e) = colors available on e.
    pub fn psi(&self, t: &Template) -> SetGraph {
        let sets = t
            .choices
            .iter()
            .map(|ch| ch.iter().map(|&p| self.color_of(p)).collect())
            .collect();
        SetGraph::new(t.n, self.k, sets).expect("one set per k-subset")
    }

    pub fn psi_inverse(&self, g: &SetGraph) -> Result<Template> {
        if g.k != self.k || !g.is_complete() {
            return invalid("expected a complete set-graph on k-subsets");
        }
        if g.sets.iter().flatten().any(|&c| c >= self.colors.len()) {
            return invalid("color index out of range");
        }
        let layout = &self.instance.pool.layout;
        let choices = g
            .sets
            .iter()
            .map(|s| s.iter().map(|&c| color_type(layout, c, self.k)).collect())
            .collect();
        Template::new(self.instance.pool.clone(), g.n, choices)
    }

    /// Induced copy of a forbidden graph, checked directly on colors.
    pub fn contains_forbidden(&self, g: &ColoredGraph) -> bool {
        self.forbidden.iter().any(|f| {
            f.n <= g.n
                && subsets_colex(g.n, f.n).iter().any(|img| {
                    permutations(f.n).iter().any(|perm| {
                        subsets_colex(f.n, self.k).iter().all(|a| {
                            let mut b: Vec<usize> = a.iter().map(|&i| img[perm[i]]).collect();
                            b.sort_unstable();
                            g.get(&b) == f.get(a)
                        })
                    })
                })
        })
    }

    /// P-good: every coloring drawn from H avoids the forbidden family.
    pub fn is_p_good(&self, h: &SetGraph) -> bool {
        let mut pick = vec![0usize; h.sets.len()];
        loop {
            let g = ColoredGraph {
                n: h.n,
                k: self.k,
                color: pick.iter().zip(&h.sets).map(|(&i, s)| s[i]).collect(),
            };
            if self.contains_forbidden(&g) {
                return false;
            }
            if !odometer(&mut pick, |j| h.sets[j].len()) {
                return true;
            }
        }
    }

    /// max over P-good H of ∏|H(e)| = 2^{max(n,P)·C(n,k)}, with the maximizers.
    pub fn max_product(&self, n: usize) -> Result<(BigUint, Vec<SetGraph>)> {
        if n < self.k {
            return invalid("n must be at least k");
        }
        let c = self.colors.len();
        let nonempty: Vec<Vec<usize>> = (1u32..1 << c)
            .map(|m| (0..c).filter(|&i| m >> i & 1 == 1).collect())
            .collect();
        let m = subsets_colex(n, self.k).len();
        let mut pick = vec![0usize; m];
        let mut best = BigUint::zero();
        let mut all = Vec::new();
        loop {
            let h = SetGraph {
                n,
                k: self.k,
                sets: pick.iter().map(|&i| nonempty[i].clone()).collect(),
            };
            let w = h.weight();
            if w >= best && self.is_p_good(&h) {
                if w > best {
                    best = w;
                    all.clear();
                }
                all.push(h);
            }
            if !odometer(&mut pick, |_| nonempty.len()) {
                break;
            }
        }
        all.sort();
        Ok((best, all))
    }

    /// max(n, P) in bits per k-set.
    pub fn max_density(&self, n: usize) -> Result<f64> {
        let (best, _) = self.max_product(n)?;
        let e = subsets_colex(n, self.k).len() as f64;
        Ok(if best.is_one() {
            0.0
        } else {
            crate::extremal::big_ln(&best) / std::f64::consts::LN_2 / e
        })
    }
}

/// C = {0,1}, k = 2, with the all-1 triangle forbidden.
pub fn triangle_spec() -> ColoredSpec {
    let mut colors = BTreeMap::new();
    for key in ["[1,2]", "[1,3]", "[2,3]"] {
        colors.insert(key.to_string(), "1".to_string());
    }
    ColoredSpec {
        k: 2,
        colors: vec!["0".into(), "1".into()],
        forbidden: vec![ColoredGraphJson { n: 3, colors }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::extremal::search_extremal;

    #[test]
    fn unrestricted_two_colors() {
        let ci = colored_instance(&ColoredSpec {
            k: 2,
            colors: vec!["0".into(), "1".into()],
            forbidden: vec![],
        })
        .unwrap();
        let (best, all) = ci.max_product(3).unwrap();
        assert_eq!(best, BigUint::from(8u32));
        assert_eq!(all.len(), 1);
        assert_eq!(ci.max_density(3).unwrap(), 1.0);
        let realized = ci.instance.prop().realized_types(&Budget::unlimited()).unwrap();
        assert_eq!(realized, ci.instance.pool.types);
    }

    #[test]
    fn triangle_free_paths_agree() {
        let ci = colored_instance(&triangle_spec()).unwrap();
        assert!(ci.dropped.is_empty());
        for n in 3..=4 {
            let (best, _) = ci.max_product(n).unwrap();
            let rep = search_extremal(&ci.instance.pool, n, 100, 1, &Budget::unlimited()).unwrap();
            assert_eq!(rep.ex, best, "n = {n}");
        }
    }

    #[test]
    fn unrealizable_color_is_dropped() {
        let mut colors = BTreeMap::new();
        colors.insert("[1,2]".to_string(), "2".to_string());
        let spec = ColoredSpec {
            k: 2,
            colors: vec!["0".into(), "1".into(), "2".into()],
            forbidden: vec![ColoredGraphJson { n: 2, colors }],
        };
        let ci = colored_instance(&spec).unwrap();
        assert_eq!(ci.dropped, vec!["2".to_string()]);
        assert_eq!(ci.colors.len(), 2);
    }

    #[test]
    fn sub_is_product_of_color_set_sizes() {
        let ci = colored_instance(&triangle_spec()).unwrap();
        let h = SetGraph::new(3, 2, vec![vec![0, 1], vec![0], vec![0, 1]]).unwrap();
        let t = ci.psi_inverse(&h).unwrap();
        assert_eq!(t.sub_count(&Budget::unlimited()).unwrap().count, BigUint::from(4u32));
        assert_eq!(ci.psi(&t), h);
    }
}
