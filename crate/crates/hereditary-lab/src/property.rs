//! Hereditary properties given as Forb(F) for a finite forbidden family.
//!
//! Each forbidden entry is matched either induced (every fact of the pattern,
//! true or false, must agree) or non-induced (only the true facts must be
//! present), optionally restricted to a subset of the relations.

use std::collections::HashSet;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::combin::{subsets_colex, tuples};
use crate::error::{invalid, LabError, Result};
use crate::signature::{Signature, Structure};
use crate::types::{qftp_unchecked, FactLayout, QfType};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Induced,
    NonInduced,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForbiddenEntry {
    pub structure: Structure,
    pub mode: Mode,
    /// Relations the pattern speaks about; `None` means all of them.
    pub scope: Option<Vec<usize>>,
}

impl ForbiddenEntry {
    pub fn induced(structure: Structure) -> Self {
        ForbiddenEntry {
            structure,
            mode: Mode::Induced,
            scope: None,
        }
    }

    pub fn non_induced(structure: Structure) -> Self {
        ForbiddenEntry {
            structure,
            mode: Mode::NonInduced,
            scope: None,
        }
    }

    pub fn size(&self) -> usize {
        self.structure.n
    }
}

/// A literal `R(t) = value` over the pattern's variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Literal {
    pub rel: usize,
    pub tuple: Vec<usize>,
    pub value: bool,
}

#[derive(Clone, Debug)]
pub struct HereditaryProperty {
    pub sig: Arc<Signature>,
    pub default_mode: Mode,
    pub forbidden: Vec<ForbiddenEntry>,
    /// Literals per entry, bucketed by their largest variable.
    compiled: Vec<Vec<Vec<Literal>>>,
}

impl PartialEq for HereditaryProperty {
    fn eq(&self, other: &Self) -> bool {
        self.sig == other.sig && self.forbidden == other.forbidden
    }
}

impl HereditaryProperty {
    pub fn new(sig: Arc<Signature>, default_mode: Mode, forbidden: Vec<ForbiddenEntry>) -> Result<Self> {
        sig.validate()?;
        for (i, e) in forbidden.iter().enumerate() {
            if *e.structure.sig != *sig {
                return invalid(format!("forbidden structure {i} has a different signature"));
            }
            if e.structure.n == 0 {
                return invalid(format!("forbidden structure {i} is empty"));
            }
            if let Some(scope) = &e.scope {
                if scope.iter().any(|&r| r >= sig.len()) {
                    return invalid(format!("forbidden structure {i} has a bad scope"));
                }
            }
        }
        let compiled = forbidden.iter().map(compile).collect();
        Ok(HereditaryProperty {
            sig,
            default_mode,
            forbidden,
            compiled,
        })
    }

    /// Convenience constructor where every entry uses the same mode.
    pub fn uniform(sig: Arc<Signature>, mode: Mode, structures: Vec<Structure>) -> Result<Self> {
        let entries = structures
            .into_iter()
            .map(|s| ForbiddenEntry {
                structure: s,
                mode,
                scope: None,
            })
            .collect();
        Self::new(sig, mode, entries)
    }

    pub fn r(&self) -> usize {
        self.sig.r()
    }

    /// Largest forbidden size.
    pub fn k(&self) -> usize {
        self.forbidden.iter().map(|e| e.size()).max().unwrap_or(0)
    }

    pub fn entry_sizes(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.forbidden.iter().map(|e| e.size()).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    pub fn layout(&self) -> Result<FactLayout> {
        FactLayout::new(self.sig.clone(), self.r())
    }

    /// Literals of entry `i` flattened, with the pattern variables.
    pub(crate) fn literals(&self, i: usize) -> Vec<Literal> {
        self.compiled[i].iter().flatten().cloned().collect()
    }

    /// Does entry `i` embed into `m` with pattern variable j sent to `window[perm[j]]`
    /// for some bijection? `window` must have the entry's size.
    pub fn entry_on_window(&self, i: usize, m: &Structure, window: &[usize]) -> bool {
        let s = self.forbidden[i].size();
        debug_assert_eq!(window.len(), s);
        let mut img = vec![usize::MAX; s];
        let mut used = vec![false; s];
        self.bij_rec(i, m, window, 0, &mut img, &mut used)
    }

    fn bij_rec(
        &self,
        i: usize,
        m: &Structure,
        window: &[usize],
        var: usize,
        img: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if var == img.len() {
            return true;
        }
        for slot in 0..window.len() {
            if used[slot] {
                continue;
            }
            img[var] = window[slot];
            let ok = self.compiled[i][var].iter().all(|lit| {
                let t: Vec<usize> = lit.tuple.iter().map(|&x| img[x]).collect();
                m.holds(lit.rel, &t) == lit.value
            });
            if ok {
                used[slot] = true;
                if self.bij_rec(i, m, window, var + 1, img, used) {
                    return true;
                }
                used[slot] = false;
            }
        }
        img[var] = usize::MAX;
        false
    }

    /// First violation found: (entry index, window).
    pub fn find_violation(&self, m: &Structure) -> Result<Option<(usize, Vec<usize>)>> {
        if *m.sig != *self.sig {
            return invalid("signature mismatch");
        }
        for (i, e) in self.forbidden.iter().enumerate() {
            if e.size() > m.n {
                continue;
            }
            for w in subsets_colex(m.n, e.size()) {
                if self.entry_on_window(i, m, &w) {
                    return Ok(Some((i, w)));
                }
            }
        }
        Ok(None)
    }

    pub fn is_member(&self, m: &Structure) -> Result<bool> {
        Ok(self.find_violation(m)?.is_none())
    }

    /// Is some entry of exactly this size present on exactly this window?
    pub fn window_violated(&self, m: &Structure, window: &[usize]) -> bool {
        self.forbidden
            .iter()
            .enumerate()
            .any(|(i, e)| e.size() == window.len() && self.entry_on_window(i, m, window))
    }

    /// Visit every labeled member on `0..n` in a fixed order. The callback
    /// returns false to stop early. Returns Ok(false) when the walk was cut
    /// short by the callback.
    pub fn for_each_member(
        &self,
        n: usize,
        budget: &Budget,
        visit: &mut dyn FnMut(&Structure) -> bool,
    ) -> Result<bool> {
        if n == 0 {
            return invalid("n must be at least 1");
        }
        let groups = self.support_groups(n)?;
        let mut m = Structure::empty(self.sig.clone(), n);
        let mut stop = false;
        self.member_rec(&groups, 0, &mut m, budget, visit, &mut stop)?;
        Ok(!stop)
    }

    fn support_groups(&self, n: usize) -> Result<Vec<Group>> {
        let r = self.r();
        let sizes = self.entry_sizes();
        let mut groups = Vec::new();
        for v in 0..n {
            for size in 1..=r.min(v + 1) {
                for rest in subsets_colex(v, size - 1) {
                    let mut support = rest.clone();
                    support.push(v);
                    let mut facts = Vec::new();
                    for ri in 0..self.sig.len() {
                        for t in tuples(size, self.sig.arity(ri)) {
                            let mut seen = vec![false; size];
                            for &x in &t {
                                seen[x] = true;
                            }
                            if seen.iter().all(|&b| b) {
                                facts.push((ri, t.iter().map(|&x| support[x]).collect::<Vec<_>>()));
                            }
                        }
                    }
                    if facts.len() > 24 {
                        return invalid("too many facts on one support set to enumerate");
                    }
                    let mut windows = Vec::new();
                    if sizes.contains(&size) {
                        windows.push(support.clone());
                    }
                    groups.push(Group { facts, windows });
                }
            }
            // larger windows close when their largest vertex is finished
            if let Some(last) = groups.last_mut() {
                for &s in sizes.iter().filter(|&&s| s > r && s <= v + 1) {
                    for rest in subsets_colex(v, s - 1) {
                        let mut w = rest;
                        w.push(v);
                        last.windows.push(w);
                    }
                }
            }
        }
        Ok(groups)
    }

    fn member_rec(
        &self,
        groups: &[Group],
        gi: usize,
        m: &mut Structure,
        budget: &Budget,
        visit: &mut dyn FnMut(&Structure) -> bool,
        stop: &mut bool,
    ) -> Result<()> {
        if gi == groups.len() {
            if !visit(m) {
                *stop = true;
            }
            return Ok(());
        }
        let g = &groups[gi];
        let count = 1u32 << g.facts.len();
        for assign in 0..count {
            if !budget.tick() {
                return Err(LabError::BudgetExhausted(format!(
                    "member enumeration stopped after {} nodes",
                    budget.used()
                )));
            }
            for (j, (ri, t)) in g.facts.iter().enumerate() {
                m.set(*ri, t, assign >> j & 1 == 1);
            }
            if g.windows.iter().all(|w| !self.window_violated(m, w)) {
                self.member_rec(groups, gi + 1, m, budget, visit, stop)?;
                if *stop {
                    break;
                }
            }
        }
        for (ri, t) in &g.facts {
            m.set(*ri, t, false);
        }
        Ok(())
    }

    pub fn enumerate_members(&self, n: usize, budget: &Budget) -> Result<Vec<Structure>> {
        let mut out = Vec::new();
        self.for_each_member(n, budget, &mut |s| {
            out.push(s.clone());
            true
        })?;
        Ok(out)
    }

    /// |H_n| as an exact integer.
    pub fn count_members(&self, n: usize, budget: &Budget) -> Result<BigUint> {
        let mut count = BigUint::zero();
        self.for_each_member(n, budget, &mut |_| {
            count += 1u32;
            true
        })?;
        Ok(count)
    }

    /// S_r(H): the types of the identity tuple over members on r points.
    pub fn realized_types(&self, budget: &Budget) -> Result<Vec<QfType>> {
        let layout = self.layout()?;
        let r = self.r();
        let ident: Vec<usize> = (0..r).collect();
        let mut out = Vec::new();
        self.for_each_member(r, budget, &mut |s| {
            out.push(qftp_unchecked(s, &ident, &layout));
            true
        })?;
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// Whether a type is realized, via its r-point structure.
    pub fn is_realized(&self, p: QfType, layout: &FactLayout) -> Result<bool> {
        self.is_member(&p.realize(layout))
    }

    /// cl_K(F): size-K structures containing a forbidden copy, one per
    /// isomorphism class, found by exhausting all 2^facts structures.
    pub fn closure(&self, k: usize, budget: &Budget) -> Result<Vec<Structure>> {
        if k < self.k() {
            return invalid("K must be at least the largest forbidden size");
        }
        let facts: Vec<(usize, Vec<usize>)> = (0..self.sig.len())
            .flat_map(|ri| tuples(k, self.sig.arity(ri)).into_iter().map(move |t| (ri, t)))
            .collect();
        if facts.len() > 40 {
            return invalid("closure would need more than 2^40 structures");
        }
        let mut classes = HashSet::new();
        let mut out = Vec::new();
        let total: u64 = 1u64 << facts.len();
        for bits in 0..total {
            if !budget.tick() {
                return Err(LabError::BudgetExhausted("closure enumeration".into()));
            }
            let mut m = Structure::empty(self.sig.clone(), k);
            for (j, (ri, t)) in facts.iter().enumerate() {
                if bits >> j & 1 == 1 {
                    m.set(*ri, t, true);
                }
            }
            if !self.is_member(&m)? {
                let c = m.canonical_form();
                if classes.insert(c.clone()) {
                    out.push(c);
                }
            }
        }
        Ok(out)
    }

    /// The part of cl_K(F) whose r-subsets all carry types from `pool`
    /// (normally S_r(H)), assembled from syntactic K-diagrams.
    pub fn closure_local(&self, k: usize, pool: &[QfType], budget: &Budget) -> Result<Vec<Structure>> {
        if k < self.k() {
            return invalid("K must be at least the largest forbidden size");
        }
        let layout = self.layout()?;
        let r = self.r();
        let slots = subsets_colex(k, r);
        let mut classes = HashSet::new();
        let mut out = Vec::new();
        let mut pick = vec![0usize; slots.len()];
        if pool.is_empty() {
            return Ok(out);
        }
        loop {
            if !budget.tick() {
                return Err(LabError::BudgetExhausted("closure enumeration".into()));
            }
            let entries: Vec<crate::types::LocatedType> = slots
                .iter()
                .zip(&pick)
                .map(|(a, &i)| crate::types::LocatedType {
                    support: a.clone(),
                    ty: pool[i],
                })
                .collect();
            if let Some(m) = crate::types::merge_located(&entries, k, &layout) {
                if !self.is_member(&m)? {
                    let c = m.canonical_form();
                    if classes.insert(c.clone()) {
                        out.push(c);
                    }
                }
            }
            let mut i = 0;
            while i < pick.len() {
                pick[i] += 1;
                if pick[i] < pool.len() {
                    break;
                }
                pick[i] = 0;
                i += 1;
            }
            if i == pick.len() {
                break;
            }
        }
        Ok(out)
    }

    /// Smallest m ≤ n with no members on m points, if any ("trivial up to n").
    pub fn trivial_up_to(&self, n: usize, budget: &Budget) -> Result<Option<usize>> {
        for m in 1..=n {
            let mut any = false;
            self.for_each_member(m, budget, &mut |_| {
                any = true;
                false
            })?;
            if !any {
                return Ok(Some(m));
            }
        }
        Ok(None)
    }

    /// Product of |S_r(H)| style helper: 1 if pool empty.
    pub fn pool_bound(pool: &[QfType]) -> BigUint {
        if pool.is_empty() {
            BigUint::one()
        } else {
            BigUint::from(pool.len())
        }
    }
}

struct Group {
    facts: Vec<(usize, Vec<usize>)>,
    windows: Vec<Vec<usize>>,
}

fn compile(e: &ForbiddenEntry) -> Vec<Vec<Literal>> {
    let s = e.structure.n;
    let mut buckets = vec![Vec::new(); s];
    for ri in 0..e.structure.sig.len() {
        if let Some(scope) = &e.scope {
            if !scope.contains(&ri) {
                continue;
            }
        }
        for t in tuples(s, e.structure.sig.arity(ri)) {
            let value = e.structure.holds(ri, &t);
            if e.mode == Mode::NonInduced && !value {
                continue;
            }
            let mx = *t.iter().max().expect("arity at least one");
            buckets[mx].push(Literal {
                rel: ri,
                tuple: t,
                value,
            });
        }
    }
    buckets
}
