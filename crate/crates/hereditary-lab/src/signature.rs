//! Relational signatures and finite labeled structures on `{0..n}`.
//!
//! Elements are 0-based in memory; the JSON layer shifts to 1-based.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::combin::{binom_big, subsets_colex, tuples};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Relation {
    pub name: String,
    pub arity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Signature {
    pub relations: Vec<Relation>,
}

impl Signature {
    pub fn new(relations: Vec<(&str, usize)>) -> Result<Self> {
        let sig = Signature {
            relations: relations
                .into_iter()
                .map(|(name, arity)| Relation {
                    name: name.to_string(),
                    arity,
                })
                .collect(),
        };
        sig.validate()?;
        Ok(sig)
    }

    pub fn validate(&self) -> Result<()> {
        if self.relations.is_empty() {
            return invalid("signature has no relations");
        }
        let mut seen = std::collections::HashSet::new();
        for rel in &self.relations {
            if rel.arity == 0 {
                return invalid(format!("relation {} has arity 0", rel.name));
            }
            if !seen.insert(rel.name.as_str()) {
                return invalid(format!("duplicate relation name {}", rel.name));
            }
        }
        if self.r() < 2 {
            return invalid("maximum arity must be at least 2");
        }
        Ok(())
    }

    /// Maximum arity.
    pub fn r(&self) -> usize {
        self.relations.iter().map(|r| r.arity).max().unwrap_or(0)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.relations.iter().position(|r| r.name == name)
    }

    pub fn arity(&self, rel: usize) -> usize {
        self.relations[rel].arity
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }
}

/// A finite structure with domain `{0..n}`. Tables are dense boolean arrays
/// indexed by the tuple read as a base-n number.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Structure {
    pub sig: Arc<Signature>,
    pub n: usize,
    tables: Vec<Vec<bool>>,
}

impl Structure {
    pub fn empty(sig: Arc<Signature>, n: usize) -> Self {
        let tables = sig
            .relations
            .iter()
            .map(|r| vec![false; n.pow(r.arity as u32)])
            .collect();
        Structure { sig, n, tables }
    }

    /// Build from explicit 0-based tuple lists, one list per relation.
    pub fn from_tuples(sig: Arc<Signature>, n: usize, rels: &[Vec<Vec<usize>>]) -> Result<Self> {
        if rels.len() != sig.len() {
            return invalid("tuple lists do not match the signature");
        }
        let mut s = Structure::empty(sig, n);
        for (ri, list) in rels.iter().enumerate() {
            for t in list {
                if t.len() != s.sig.arity(ri) {
                    return invalid(format!(
                        "tuple {:?} has wrong length for {}",
                        t, s.sig.relations[ri].name
                    ));
                }
                if t.iter().any(|&x| x >= n) {
                    return invalid(format!("tuple {:?} leaves the domain", t));
                }
                s.set(ri, t, true);
            }
        }
        Ok(s)
    }

    fn index(&self, t: &[usize]) -> usize {
        t.iter().fold(0, |acc, &x| acc * self.n + x)
    }

    pub fn holds(&self, rel: usize, t: &[usize]) -> bool {
        self.tables[rel][self.index(t)]
    }

    pub fn set(&mut self, rel: usize, t: &[usize], value: bool) {
        let i = self.index(t);
        self.tables[rel][i] = value;
    }

    /// True tuples of a relation, lexicographic.
    pub fn tuples(&self, rel: usize) -> Vec<Vec<usize>> {
        tuples(self.n, self.sig.arity(rel))
            .into_iter()
            .filter(|t| self.holds(rel, t))
            .collect()
    }

    pub fn fact_count(&self) -> usize {
        self.tables.iter().map(|t| t.iter().filter(|&&b| b).count()).sum()
    }

    /// The substructure induced on `a`, relabeled by the order-preserving map onto `0..|a|`.
    pub fn induced(&self, a: &[usize]) -> Result<Structure> {
        if a.is_empty() {
            return invalid("induced substructure of the empty set");
        }
        let mut sorted = a.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != a.len() {
            return invalid("repeated element in subset");
        }
        if sorted.iter().any(|&x| x >= self.n) {
            return invalid("subset element out of range");
        }
        Ok(self.pull_back(&sorted))
    }

    /// The induced substructure on `a` together with the original labels.
    pub fn induced_on(&self, a: &[usize]) -> Result<(Structure, Vec<usize>)> {
        let s = self.induced(a)?;
        let mut labels = a.to_vec();
        labels.sort_unstable();
        Ok((s, labels))
    }

    /// Structure on `0..map.len()` with R(t) iff R(map[t]) here. `map` need not be sorted.
    pub fn pull_back(&self, map: &[usize]) -> Structure {
        let m = map.len();
        let mut out = Structure::empty(self.sig.clone(), m);
        for ri in 0..self.sig.len() {
            let a = self.sig.arity(ri);
            for t in tuples(m, a) {
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                if self.holds(ri, &img) {
                    out.set(ri, &t, true);
                }
            }
        }
        out
    }

    fn check_same_sig(&self, other: &Structure) -> Result<()> {
        if self.sig != other.sig {
            return invalid("signature mismatch");
        }
        Ok(())
    }

    /// Per-vertex invariant: for each relation and each set of positions, the
    /// number of true tuples in which the vertex occupies exactly those positions.
    fn vertex_invariants(&self) -> Vec<Vec<usize>> {
        let mut inv = vec![Vec::new(); self.n];
        for ri in 0..self.sig.len() {
            let a = self.sig.arity(ri);
            let width = 1usize << a;
            let mut counts = vec![vec![0usize; width]; self.n];
            for t in self.tuples(ri) {
                for v in 0..self.n {
                    let mut mask = 0usize;
                    for (i, &x) in t.iter().enumerate() {
                        if x == v {
                            mask |= 1 << i;
                        }
                    }
                    if mask != 0 {
                        counts[v][mask] += 1;
                    }
                }
            }
            for v in 0..self.n {
                inv[v].extend_from_slice(&counts[v]);
            }
        }
        inv
    }

    /// Find a bijection f with R(t) iff R(f(t)) in `other`, if one exists.
    pub fn isomorphism(&self, other: &Structure) -> Result<Option<Embedding>> {
        self.check_same_sig(other)?;
        if self.n != other.n || self.fact_count() != other.fact_count() {
            return Ok(None);
        }
        let inv_a = self.vertex_invariants();
        let inv_b = other.vertex_invariants();
        let mut sa = inv_a.clone();
        let mut sb = inv_b.clone();
        sa.sort();
        sb.sort();
        if sa != sb {
            return Ok(None);
        }
        let n = self.n;
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        if self.iso_rec(other, 0, &inv_a, &inv_b, &mut map, &mut used) {
            Ok(Some(Embedding { map, target_n: n }))
        } else {
            Ok(None)
        }
    }

    fn iso_rec(
        &self,
        other: &Structure,
        i: usize,
        inv_a: &[Vec<usize>],
        inv_b: &[Vec<usize>],
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if i == self.n {
            return true;
        }
        for cand in 0..self.n {
            if used[cand] || inv_a[i] != inv_b[cand] {
                continue;
            }
            map[i] = cand;
            if self.consistent_upto(other, i, map) {
                used[cand] = true;
                if self.iso_rec(other, i + 1, inv_a, inv_b, map, used) {
                    return true;
                }
                used[cand] = false;
            }
        }
        map[i] = usize::MAX;
        false
    }

    /// Checks every tuple over `0..=i` that mentions `i`.
    fn consistent_upto(&self, other: &Structure, i: usize, map: &[usize]) -> bool {
        for ri in 0..self.sig.len() {
            let a = self.sig.arity(ri);
            for t in tuples(i + 1, a) {
                if !t.contains(&i) {
                    continue;
                }
                let img: Vec<usize> = t.iter().map(|&x| map[x]).collect();
                if self.holds(ri, &t) != other.holds(ri, &img) {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_isomorphic(&self, other: &Structure) -> Result<bool> {
        Ok(self.isomorphism(other)?.is_some())
    }

    /// Canonical form by brute force over all relabelings: the lexicographically
    /// least fact table. Only used at tiny sizes.
    pub fn canonical_form(&self) -> Structure {
        let mut best: Option<Structure> = None;
        for perm in crate::combin::permutations(self.n) {
            let cand = self.pull_back(&perm);
            let better = match &best {
                None => true,
                Some(b) => cand.tables < b.tables,
            };
            if better {
                best = Some(cand);
            }
        }
        best.unwrap_or_else(|| self.clone())
    }

    pub fn tables(&self) -> &[Vec<bool>] {
        &self.tables
    }
}

/// An injective map between domains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Embedding {
    pub map: Vec<usize>,
    pub target_n: usize,
}

impl Embedding {
    pub fn new(map: Vec<usize>, target_n: usize) -> Result<Self> {
        let mut seen = vec![false; target_n];
        for &x in &map {
            if x >= target_n {
                return invalid("embedding image out of range");
            }
            if seen[x] {
                return invalid("embedding is not injective");
            }
            seen[x] = true;
        }
        Ok(Embedding { map, target_n })
    }
}

/// cop(B, M): all subsets A of dom(M) with M[A] isomorphic to B.
pub fn copies(b: &Structure, m: &Structure) -> Result<Vec<Vec<usize>>> {
    if b.sig != m.sig {
        return invalid("signature mismatch");
    }
    if b.n > m.n {
        return Ok(Vec::new());
    }
    let mut out = Vec::new();
    for a in subsets_colex(m.n, b.n) {
        let sub = m.pull_back(&a);
        if sub.is_isomorphic(b)? {
            out.push(a);
        }
    }
    Ok(out)
}

/// prob(B, M) = |cop(B,M)| / C(|M|, |B|).
pub fn density(b: &Structure, m: &Structure) -> Result<BigRational> {
    let c = copies(b, m)?;
    if c.is_empty() {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(
        BigUint::from(c.len()).into(),
        binom_big(m.n, b.n).into(),
    ))
}

/// Union of copies over a family (each subset listed once).
pub fn copies_of_family(bs: &[Structure], m: &Structure) -> Result<Vec<Vec<usize>>> {
    let mut set: HashMap<Vec<usize>, ()> = HashMap::new();
    for b in bs {
        for a in copies(b, m)? {
            set.insert(a, ());
        }
    }
    let mut v: Vec<Vec<usize>> = set.into_keys().collect();
    v.sort_by(|x, y| x.len().cmp(&y.len()).then_with(|| x.iter().rev().cmp(y.iter().rev())));
    Ok(v)
}

/// Maximum density over a family.
pub fn max_density(bs: &[Structure], m: &Structure) -> Result<BigRational> {
    let mut best = BigRational::zero();
    for b in bs {
        let d = density(b, m)?;
        if d > best {
            best = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph_sig() -> Arc<Signature> {
        Arc::new(Signature::new(vec![("E", 2)]).unwrap())
    }

    fn undirected(n: usize, edges: &[(usize, usize)]) -> Structure {
        let mut list = Vec::new();
        for &(a, b) in edges {
            list.push(vec![a, b]);
            list.push(vec![b, a]);
        }
        Structure::from_tuples(graph_sig(), n, &[list]).unwrap()
    }

    #[test]
    fn signature_validation() {
        assert!(Signature::new(vec![("E", 2), ("E", 3)]).is_err());
        assert!(Signature::new(vec![("U", 1)]).is_err());
        assert!(Signature::new(vec![("U", 0), ("E", 2)]).is_err());
        assert_eq!(Signature::new(vec![("U", 1), ("T", 3)]).unwrap().r(), 3);
    }

    #[test]
    fn induced_full_domain_is_identity() {
        let m = undirected(3, &[(0, 1), (1, 2)]);
        assert_eq!(m.induced(&[0, 1, 2]).unwrap(), m);
    }

    #[test]
    fn induced_path_endpoints_have_no_edges() {
        let m = undirected(3, &[(0, 1), (1, 2)]);
        let s = m.induced(&[0, 2]).unwrap();
        assert_eq!(s.fact_count(), 0);
        let (s2, labels) = m.induced_on(&[2, 0]).unwrap();
        assert_eq!(labels, vec![0, 2]);
        assert_eq!(s2, s);
        assert!(m.induced(&[]).is_err());
        assert!(m.induced(&[5]).is_err());
    }

    #[test]
    fn isomorphism_examples() {
        let a = undirected(3, &[(0, 1)]);
        let b = undirected(3, &[(0, 2)]);
        assert!(a.is_isomorphic(&b).unwrap());
        let mut c = a.clone();
        c.set(0, &[0, 0], true);
        let mut d = b.clone();
        d.set(0, &[1, 1], true);
        // loop on an edge endpoint versus a loop on the isolated vertex
        assert!(!c.is_isomorphic(&d).unwrap());
        let e12 = Structure::from_tuples(graph_sig(), 2, &[vec![vec![0, 1]]]).unwrap();
        let e21 = Structure::from_tuples(graph_sig(), 2, &[vec![vec![1, 0]]]).unwrap();
        let w = e12.isomorphism(&e21).unwrap().unwrap();
        assert_eq!(w.map, vec![1, 0]);
    }

    #[test]
    fn copies_and_density() {
        let single = Structure::empty(graph_sig(), 1);
        let m = Structure::empty(graph_sig(), 4);
        assert_eq!(copies(&single, &m).unwrap().len(), 4);
        assert_eq!(density(&single, &m).unwrap(), BigRational::from_integer(1.into()));
        let k3 = undirected(3, &[(0, 1), (0, 2), (1, 2)]);
        let k4 = undirected(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(copies(&k3, &k4).unwrap().len(), 4);
        assert_eq!(density(&k3, &k4).unwrap(), BigRational::from_integer(1.into()));
        assert!(copies(&k4, &k3).unwrap().is_empty());
    }

    #[test]
    fn canonical_form_identifies_isomorphic() {
        let a = undirected(4, &[(0, 1), (1, 2)]);
        let b = undirected(4, &[(3, 2), (2, 0)]);
        assert_eq!(a.canonical_form(), b.canonical_form());
    }

    fn arb_digraph(n: usize) -> impl Strategy<Value = Structure> {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let mut s = Structure::empty(graph_sig(), n);
            for (i, b) in bits.into_iter().enumerate() {
                if b {
                    s.set(0, &[i / n, i % n], true);
                }
            }
            s
        })
    }

    proptest! {
        #[test]
        fn isomorphism_is_an_equivalence(a in arb_digraph(4), b in arb_digraph(4), c in arb_digraph(4), perm in Just(()).prop_perturb(|_, mut rng| {
            let mut p: Vec<usize> = (0..4).collect();
            for i in (1..4).rev() { let j = (rng.next_u32() as usize) % (i + 1); p.swap(i, j); }
            p
        })) {
            prop_assert!(a.is_isomorphic(&a).unwrap());
            let relabeled = a.pull_back(&perm);
            prop_assert!(a.is_isomorphic(&relabeled).unwrap());
            prop_assert_eq!(a.is_isomorphic(&b).unwrap(), b.is_isomorphic(&a).unwrap());
            if a.is_isomorphic(&b).unwrap() && b.is_isomorphic(&c).unwrap() {
                prop_assert!(a.is_isomorphic(&c).unwrap());
            }
            prop_assert_eq!(a.is_isomorphic(&b).unwrap(), a.canonical_form() == b.canonical_form());
        }

        #[test]
        fn density_zero_iff_free(b in arb_digraph(2), m in arb_digraph(4)) {
            let d = density(&b, &m).unwrap();
            prop_assert!(d >= BigRational::zero() && d <= BigRational::from_integer(1.into()));
            let mut found = false;
            for a in subsets_colex(4, 2) {
                for p in crate::combin::permutations(2) {
                    let img: Vec<usize> = p.iter().map(|&i| a[i]).collect();
                    if m.pull_back(&img) == b { found = true; }
                }
            }
            prop_assert_eq!(d.is_zero(), !found);
        }
    }
}
