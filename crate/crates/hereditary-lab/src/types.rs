//! Complete proper quantifier-free types, located types and syntactic diagrams.
//!
//! A type on `m` variables is a truth assignment to every atomic fact
//! `R(x_{i1},...,x_{ia})` with all `i_j < m`. Facts are laid out relation by
//! relation, tuples in lexicographic order, and packed into a `u128` with fact
//! 0 in the most significant used bit, so the integer value is the position of
//! the type in the lexicographic listing of all types.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use itertools::Itertools;

use crate::combin::{subsets_colex, tuples};
use crate::error::{invalid, Result};
use crate::signature::{Signature, Structure};

/// Fact layout for types on `m` variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactLayout {
    pub sig: Arc<Signature>,
    pub m: usize,
    offsets: Vec<usize>,
    total: usize,
}

impl FactLayout {
    pub fn new(sig: Arc<Signature>, m: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(sig.len());
        let mut total = 0usize;
        for rel in &sig.relations {
            offsets.push(total);
            total += m.pow(rel.arity as u32);
        }
        if total > 128 {
            return invalid(format!(
                "{} atomic facts on {} variables exceed the 128-bit type encoding",
                total, m
            ));
        }
        Ok(FactLayout { sig, m, offsets, total })
    }

    pub fn len(&self) -> usize {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn fact_index(&self, rel: usize, vars: &[usize]) -> usize {
        self.offsets[rel] + vars.iter().fold(0, |acc, &v| acc * self.m + v)
    }

    pub fn bit(&self, rel: usize, vars: &[usize]) -> u128 {
        1u128 << (self.total - 1 - self.fact_index(rel, vars))
    }

    /// All facts in layout order.
    pub fn facts(&self) -> Vec<(usize, Vec<usize>)> {
        let mut out = Vec::with_capacity(self.total);
        for (ri, rel) in self.sig.relations.iter().enumerate() {
            for t in tuples(self.m, rel.arity) {
                out.push((ri, t));
            }
        }
        out
    }

    pub fn full_mask(&self) -> u128 {
        if self.total == 128 {
            u128::MAX
        } else {
            (1u128 << self.total) - 1
        }
    }

    /// Mask of the facts whose variables all lie in `positions`.
    pub fn mask_within(&self, positions: &[usize]) -> u128 {
        let mut mask = 0;
        for (ri, t) in self.facts() {
            if t.iter().all(|v| positions.contains(v)) {
                mask |= self.bit(ri, &t);
            }
        }
        mask
    }

    pub fn fact_label(&self, rel: usize, vars: &[usize]) -> String {
        let args: Vec<String> = vars.iter().map(|v| (v + 1).to_string()).collect();
        format!("{}({})", self.sig.relations[rel].name, args.join(","))
    }
}

/// A complete proper quantifier-free type, identified by its fact bit-vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QfType(pub u128);

impl QfType {
    pub fn id(&self) -> String {
        format!("t{}", self.0)
    }

    pub fn parse_id(s: &str) -> Result<Self> {
        match s.strip_prefix('t').and_then(|d| d.parse::<u128>().ok()) {
            Some(v) => Ok(QfType(v)),
            None => invalid(format!("bad type id {s:?}")),
        }
    }

    pub fn holds(&self, layout: &FactLayout, rel: usize, vars: &[usize]) -> bool {
        self.0 & layout.bit(rel, vars) != 0
    }

    /// The type of `a∘π`, i.e. the new fact `(R, v)` is the old fact `(R, π[v])`.
    pub fn permute(&self, layout: &FactLayout, perm: &[usize]) -> QfType {
        let mut bits = 0u128;
        for (ri, t) in layout.facts() {
            let img: Vec<usize> = t.iter().map(|&v| perm[v]).collect();
            if self.holds(layout, ri, &img) {
                bits |= layout.bit(ri, &t);
            }
        }
        QfType(bits)
    }

    /// Restriction to the variables at `positions` (listed in the order they
    /// become the new variables), as a type in `small`.
    pub fn restrict(&self, layout: &FactLayout, small: &FactLayout, positions: &[usize]) -> QfType {
        let mut bits = 0u128;
        for (ri, t) in small.facts() {
            let img: Vec<usize> = t.iter().map(|&v| positions[v]).collect();
            if self.holds(layout, ri, &img) {
                bits |= small.bit(ri, &t);
            }
        }
        QfType(bits)
    }

    /// The unique structure on `0..m` realizing this type by the identity tuple.
    pub fn realize(&self, layout: &FactLayout) -> Structure {
        let mut s = Structure::empty(layout.sig.clone(), layout.m);
        for (ri, t) in layout.facts() {
            if self.holds(layout, ri, &t) {
                s.set(ri, &t, true);
            }
        }
        s
    }

    pub fn facts_json(&self, layout: &FactLayout) -> BTreeMap<String, bool> {
        layout
            .facts()
            .into_iter()
            .map(|(ri, t)| (layout.fact_label(ri, &t), self.holds(layout, ri, &t)))
            .collect()
    }
}

impl fmt::Display for QfType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

/// qftp(ā) in M for a tuple of distinct elements.
pub fn qftp(m: &Structure, a: &[usize], layout: &FactLayout) -> Result<QfType> {
    if layout.m != a.len() {
        return invalid("tuple length does not match the layout");
    }
    for (i, &x) in a.iter().enumerate() {
        if x >= m.n {
            return invalid("tuple element out of range");
        }
        if a[..i].contains(&x) {
            return invalid("proper types need distinct elements");
        }
    }
    Ok(qftp_unchecked(m, a, layout))
}

pub(crate) fn qftp_unchecked(m: &Structure, a: &[usize], layout: &FactLayout) -> QfType {
    let mut bits = 0u128;
    for (ri, t) in layout.facts() {
        let img: Vec<usize> = t.iter().map(|&v| a[v]).collect();
        if m.holds(ri, &img) {
            bits |= layout.bit(ri, &t);
        }
    }
    QfType(bits)
}

/// S_r(L): every truth assignment, listed by id. Refuses more than 2^24 types.
pub fn type_space(layout: &FactLayout) -> Result<Vec<QfType>> {
    if layout.len() > 24 {
        return invalid(format!("type space has 2^{} elements; too large to list", layout.len()));
    }
    Ok((0..(1u128 << layout.len())).map(QfType).collect())
}

/// A type bound to the sorted enumeration of its support.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocatedType {
    pub support: Vec<usize>,
    pub ty: QfType,
}

impl LocatedType {
    pub fn new(mut support: Vec<usize>, ty: QfType) -> Self {
        support.sort_unstable();
        LocatedType { support, ty }
    }

    /// Locate a type given on an arbitrary enumeration `a` of its support.
    pub fn from_enumeration(a: &[usize], ty: QfType, layout: &FactLayout) -> Self {
        let mut order: Vec<usize> = (0..a.len()).collect();
        order.sort_by_key(|&i| a[i]);
        // sorted[j] = a[order[j]], so the sorted tuple is a∘order
        let t = ty.permute(layout, &order);
        LocatedType {
            support: order.iter().map(|&i| a[i]).collect(),
            ty: t,
        }
    }
}

/// Diag^M(A): the located type of the sorted enumeration of A.
pub fn diagram(m: &Structure, a: &[usize], layout: &FactLayout) -> Result<LocatedType> {
    if a.len() != layout.m {
        return invalid(format!("diagram needs a {}-subset", layout.m));
    }
    let mut s = a.to_vec();
    s.sort_unstable();
    let ty = qftp(m, &s, layout)?;
    Ok(LocatedType { support: s, ty })
}

/// A set of located types, kept sorted by (support colex, type).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct SyntacticDiagram {
    pub entries: Vec<LocatedType>,
}

fn colex_key(s: &[usize]) -> Vec<usize> {
    s.iter().rev().copied().collect()
}

impl SyntacticDiagram {
    pub fn new(mut entries: Vec<LocatedType>) -> Self {
        entries.sort_by(|a, b| colex_key(&a.support).cmp(&colex_key(&b.support)).then(a.ty.cmp(&b.ty)));
        entries.dedup();
        SyntacticDiagram { entries }
    }

    pub fn support(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.entries.iter().flat_map(|e| e.support.iter().copied()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn choices(&self, a: &[usize]) -> Vec<QfType> {
        self.entries.iter().filter(|e| e.support == a).map(|e| e.ty).collect()
    }

    /// Exactly one entry per r-subset of the support, with support of size m.
    pub fn is_m_diagram(&self, m: usize, r: usize) -> bool {
        let v = self.support();
        if v.len() != m || m < r {
            return false;
        }
        if self.entries.len() as u64 != crate::combin::binom(m, r) {
            return false;
        }
        subsets_colex(m, r).iter().all(|idx| {
            let a: Vec<usize> = idx.iter().map(|&i| v[i]).collect();
            self.choices(&a).len() == 1
        })
    }

    pub fn contains(&self, e: &LocatedType) -> bool {
        self.entries.contains(e)
    }
}

/// Diag^tp(M): one located type per r-subset, in colex order.
pub fn type_diagram(m: &Structure, layout: &FactLayout) -> SyntacticDiagram {
    let entries = subsets_colex(m.n, layout.m)
        .into_iter()
        .map(|a| {
            let ty = qftp_unchecked(m, &a, layout);
            LocatedType { support: a, ty }
        })
        .collect();
    SyntacticDiagram { entries }
}

/// Merge located types into one structure on `0..n`. Returns `None` on a
/// clash between two entries about the same atomic fact. Facts not mentioned
/// by any entry stay false.
pub fn merge_located(entries: &[LocatedType], n: usize, layout: &FactLayout) -> Option<Structure> {
    let mut s = Structure::empty(layout.sig.clone(), n);
    let mut seen = Structure::empty(layout.sig.clone(), n);
    for e in entries {
        for (ri, t) in layout.facts() {
            let img: Vec<usize> = t.iter().map(|&v| e.support[v]).collect();
            let val = e.ty.holds(layout, ri, &t);
            if seen.holds(ri, &img) {
                if s.holds(ri, &img) != val {
                    return None;
                }
            } else {
                seen.set(ri, &img, true);
                s.set(ri, &img, val);
            }
        }
    }
    Some(s)
}

/// Satisfiability of a syntactic m-diagram. On success returns the witness
/// on `0..m` (relabeled from the sorted support).
pub fn satisfy(sigma: &SyntacticDiagram, layout: &FactLayout) -> Result<Option<(Structure, Vec<usize>)>> {
    let v = sigma.support();
    if !sigma.is_m_diagram(v.len(), layout.m) {
        return invalid("not a syntactic m-diagram");
    }
    let pos = |x: usize| v.binary_search(&x).expect("support element");
    let relabeled: Vec<LocatedType> = sigma
        .entries
        .iter()
        .map(|e| LocatedType {
            support: e.support.iter().map(|&x| pos(x)).collect(),
            ty: e.ty,
        })
        .collect();
    Ok(merge_located(&relabeled, v.len(), layout).map(|s| (s, v)))
}

pub fn is_satisfiable(sigma: &SyntacticDiagram, layout: &FactLayout) -> Result<bool> {
    Ok(satisfy(sigma, layout)?.is_some())
}

/// Membership in Err_ℓ: an unsatisfiable syntactic ℓ-diagram.
pub fn is_error(sigma: &SyntacticDiagram, ell: usize, layout: &FactLayout) -> Result<bool> {
    if !sigma.is_m_diagram(ell, layout.m) {
        return invalid(format!("not a syntactic {ell}-diagram"));
    }
    Ok(!is_satisfiable(sigma, layout)?)
}

/// Span(σ): every sub-diagram of σ, i.e. for each support W of size ≥ r one
/// entry of σ per r-subset of W. The empty diagram is listed first.
pub fn span(sigma: &SyntacticDiagram, r: usize) -> Vec<SyntacticDiagram> {
    let v = sigma.support();
    let mut out = vec![SyntacticDiagram::default()];
    for m in r..=v.len() {
        out.extend(span_of_size(sigma, r, m));
    }
    out
}

/// The members of Span(σ) whose support has exactly m elements.
pub fn span_of_size(sigma: &SyntacticDiagram, r: usize, m: usize) -> Vec<SyntacticDiagram> {
    let v = sigma.support();
    let mut out = Vec::new();
    if m < r {
        return out;
    }
    for w_idx in subsets_colex(v.len(), m) {
        let w: Vec<usize> = w_idx.iter().map(|&i| v[i]).collect();
        let slots: Vec<Vec<LocatedType>> = subsets_colex(m, r)
            .into_iter()
            .map(|idx| {
                let a: Vec<usize> = idx.iter().map(|&i| w[i]).collect();
                sigma.entries.iter().filter(|e| e.support == a).cloned().collect()
            })
            .collect();
        if slots.iter().any(|s| s.is_empty()) {
            continue;
        }
        for combo in slots.iter().map(|s| s.iter().cloned()).multi_cartesian_product() {
            out.push(SyntacticDiagram::new(combo));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn digraph_layout() -> FactLayout {
        let sig = Arc::new(Signature::new(vec![("E", 2)]).unwrap());
        FactLayout::new(sig, 2).unwrap()
    }

    fn metric3_sig() -> Arc<Signature> {
        Arc::new(Signature::new(vec![("R1", 2), ("R2", 2), ("R3", 2)]).unwrap())
    }

    fn metric_type(layout: &FactLayout, i: usize) -> QfType {
        QfType(layout.bit(i, &[0, 1]) | layout.bit(i, &[1, 0]))
    }

    fn metric_structure(n: usize, dist: &[((usize, usize), usize)]) -> Structure {
        let sig = metric3_sig();
        let mut lists = vec![Vec::new(); 3];
        for &((a, b), d) in dist {
            lists[d - 1].push(vec![a, b]);
            lists[d - 1].push(vec![b, a]);
        }
        Structure::from_tuples(sig, n, &lists).unwrap()
    }

    #[test]
    fn type_space_sizes() {
        assert_eq!(type_space(&digraph_layout()).unwrap().len(), 16);
        let metric = FactLayout::new(metric3_sig(), 2).unwrap();
        assert_eq!(type_space(&metric).unwrap().len(), 1 << 12);
        let t = type_space(&metric).unwrap();
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn empty_structure_gives_all_false_type() {
        let l = digraph_layout();
        let m = Structure::empty(l.sig.clone(), 3);
        assert_eq!(qftp(&m, &[2, 0], &l).unwrap(), QfType(0));
        assert!(qftp(&m, &[1, 1], &l).is_err());
    }

    #[test]
    fn metric_distance_one_is_p1() {
        let l = FactLayout::new(metric3_sig(), 2).unwrap();
        let m = metric_structure(2, &[((0, 1), 1)]);
        assert_eq!(qftp(&m, &[0, 1], &l).unwrap(), metric_type(&l, 0));
        assert_eq!(metric_type(&l, 0).id(), "t1536");
    }

    #[test]
    fn type_diagram_example_and_roundtrip() {
        let l = FactLayout::new(metric3_sig(), 2).unwrap();
        let m = metric_structure(3, &[((0, 1), 1), ((0, 2), 2), ((1, 2), 3)]);
        let d = type_diagram(&m, &l);
        assert_eq!(d.len(), 3);
        assert_eq!(d.choices(&[0, 1]), vec![metric_type(&l, 0)]);
        assert_eq!(d.choices(&[0, 2]), vec![metric_type(&l, 1)]);
        assert_eq!(d.choices(&[1, 2]), vec![metric_type(&l, 2)]);
        let (w, labels) = satisfy(&d, &l).unwrap().unwrap();
        assert_eq!(labels, vec![0, 1, 2]);
        assert_eq!(w, m);
    }

    #[test]
    fn span_example() {
        let l = FactLayout::new(metric3_sig(), 2).unwrap();
        let mut entries = vec![];
        for i in 0..3 {
            entries.push(LocatedType::new(vec![0, 1], metric_type(&l, i)));
        }
        entries.push(LocatedType::new(vec![1, 2], metric_type(&l, 0)));
        entries.push(LocatedType::new(vec![0, 2], metric_type(&l, 0)));
        let sigma = SyntacticDiagram::new(entries);
        let full = span_of_size(&sigma, 2, 3);
        assert_eq!(full.len(), 3);
        let mut firsts: Vec<QfType> = full.iter().map(|d| d.choices(&[0, 1])[0]).collect();
        firsts.sort();
        let mut want: Vec<QfType> = (0..3).map(|i| metric_type(&l, i)).collect();
        want.sort();
        assert_eq!(firsts, want);
        // plus 5 two-point diagrams and the empty one
        assert_eq!(span(&sigma, 2).len(), 1 + 5 + 3);
    }

    #[test]
    fn span_missing_choice_has_no_full_support() {
        let l = FactLayout::new(metric3_sig(), 2).unwrap();
        let sigma = SyntacticDiagram::new(vec![
            LocatedType::new(vec![0, 1], metric_type(&l, 0)),
            LocatedType::new(vec![1, 2], metric_type(&l, 0)),
        ]);
        assert!(span_of_size(&sigma, 2, 3).is_empty());
    }

    #[test]
    fn same_arity_signatures_never_clash() {
        // every 3- and 4-diagram over a pure ternary signature, sampled over a
        // small pool of types, is satisfiable
        let sig = Arc::new(Signature::new(vec![("E", 3)]).unwrap());
        let l = FactLayout::new(sig, 3).unwrap();
        let facts = l.facts();
        let distinct: Vec<u128> = facts
            .iter()
            .filter(|(_, t)| t[0] != t[1] && t[1] != t[2] && t[0] != t[2])
            .map(|(ri, t)| l.bit(*ri, t))
            .collect();
        let all_distinct: u128 = distinct.iter().fold(0, |a, b| a | b);
        let pool = [QfType(0), QfType(all_distinct), QfType(distinct[0])];
        let triples = subsets_colex(4, 3);
        for a in 0..3 {
            for b in 0..3 {
                for c in 0..3 {
                    for d in 0..3 {
                        let sigma = SyntacticDiagram::new(
                            triples
                                .iter()
                                .zip([a, b, c, d])
                                .map(|(s, i)| LocatedType::new(s.clone(), pool[i]))
                                .collect(),
                        );
                        assert!(!is_error(&sigma, 4, &l).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn from_enumeration_normalizes() {
        let l = digraph_layout();
        let arc = QfType(l.bit(0, &[0, 1]));
        // arc from 5 to 2, given on the enumeration (5, 2)
        let lt = LocatedType::from_enumeration(&[5, 2], arc, &l);
        assert_eq!(lt.support, vec![2, 5]);
        assert_eq!(lt.ty, QfType(l.bit(0, &[1, 0])));
    }

    fn arb_digraph(n: usize) -> impl Strategy<Value = Structure> {
        proptest::collection::vec(any::<bool>(), n * n).prop_map(move |bits| {
            let sig = Arc::new(Signature::new(vec![("E", 2)]).unwrap());
            let mut s = Structure::empty(sig, n);
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
        fn diagram_matches_qftp_and_roundtrips(m in arb_digraph(4)) {
            let l = digraph_layout();
            for a in subsets_colex(4, 2) {
                let d = diagram(&m, &a, &l).unwrap();
                prop_assert_eq!(d.ty, qftp(&m, &a, &l).unwrap());
            }
            let td = type_diagram(&m, &l);
            prop_assert!(td.is_m_diagram(4, 2));
            let (w, _) = satisfy(&td, &l).unwrap().unwrap();
            prop_assert_eq!(type_diagram(&w, &l), td);
            prop_assert_eq!(w, m);
        }

        #[test]
        fn permute_inverse(bits in 0u128..16, swap in any::<bool>()) {
            let l = digraph_layout();
            let p = QfType(bits);
            let perm = if swap { vec![1, 0] } else { vec![0, 1] };
            prop_assert_eq!(p.permute(&l, &perm).permute(&l, &perm), p);
        }
    }
}
