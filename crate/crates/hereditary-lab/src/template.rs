//! Templates in canonical form: one choice set Ch(A) ⊆ S_r(H) per r-subset.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::budget::Budget;
use crate::combin::{binom, colex_rank, subsets_colex};
use crate::error::{invalid, LabError, Result};
use crate::property::HereditaryProperty;
use crate::signature::Structure;
use crate::types::{diagram, merge_located, FactLayout, LocatedType, QfType};

/// S_r(H) together with the data every template over it needs.
#[derive(Debug)]
pub struct TypePool {
    pub prop: Arc<HereditaryProperty>,
    pub layout: FactLayout,
    pub types: Vec<QfType>,
    index: HashMap<QfType, usize>,
    /// restricted[i][mask]: type i restricted to the positions in `mask`, read in increasing order.
    restricted: Vec<Vec<u128>>,
    uniform_lower: bool,
}

impl TypePool {
    /// Compute S_r(H) by enumerating H_r.
    pub fn new(prop: Arc<HereditaryProperty>, budget: &Budget) -> Result<Arc<TypePool>> {
        let types = prop.realized_types(budget)?;
        Self::from_types(prop, types)
    }

    /// Use a known list of types; each must be realized.
    pub fn with_types(prop: Arc<HereditaryProperty>, mut types: Vec<QfType>) -> Result<Arc<TypePool>> {
        let layout = prop.layout()?;
        types.sort();
        types.dedup();
        for p in &types {
            if !prop.is_realized(*p, &layout)? {
                return invalid(format!("type {p} is not realized in the property"));
            }
        }
        Self::from_types(prop, types)
    }

    fn from_types(prop: Arc<HereditaryProperty>, types: Vec<QfType>) -> Result<Arc<TypePool>> {
        let layout = prop.layout()?;
        let r = layout.m;
        let small: Vec<FactLayout> = (0..r)
            .map(|m| FactLayout::new(prop.sig.clone(), m))
            .collect::<Result<_>>()?;
        let restricted: Vec<Vec<u128>> = types
            .iter()
            .map(|p| {
                (0..1usize << r)
                    .map(|mask| {
                        let pos: Vec<usize> = (0..r).filter(|&i| mask >> i & 1 == 1).collect();
                        if pos.len() == r {
                            p.0
                        } else {
                            p.restrict(&layout, &small[pos.len()], &pos).0
                        }
                    })
                    .collect()
            })
            .collect();
        let mut uniform_lower = true;
        let mut by_size: HashMap<u32, u128> = HashMap::new();
        for row in &restricted {
            for (mask, &v) in row.iter().enumerate() {
                let size = (mask as u32).count_ones();
                if size as usize == r || size == 0 {
                    continue;
                }
                match by_size.get(&size) {
                    Some(&w) if w != v => uniform_lower = false,
                    _ => {
                        by_size.insert(size, v);
                    }
                }
            }
        }
        let index = types.iter().enumerate().map(|(i, &p)| (p, i)).collect();
        Ok(Arc::new(TypePool {
            prop,
            layout,
            types,
            index,
            restricted,
            uniform_lower,
        }))
    }

    pub fn r(&self) -> usize {
        self.layout.m
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn index_of(&self, p: QfType) -> Option<usize> {
        self.index.get(&p).copied()
    }

    pub fn contains(&self, p: QfType) -> bool {
        self.index.contains_key(&p)
    }

    /// All pool types agree on every proper sub-tuple, so no two located
    /// choices can ever clash.
    pub fn uniform_lower(&self) -> bool {
        self.uniform_lower
    }

    /// Can pool types i on support `a` and j on support `b` live in one structure?
    pub fn compatible_idx(&self, i: usize, a: &[usize], j: usize, b: &[usize]) -> bool {
        let mut ma = 0usize;
        let mut mb = 0usize;
        for (x, ea) in a.iter().enumerate() {
            if let Some(y) = b.iter().position(|eb| eb == ea) {
                ma |= 1 << x;
                mb |= 1 << y;
            }
        }
        if ma == 0 {
            return true;
        }
        self.restricted[i][ma] == self.restricted[j][mb]
    }

    pub fn compatible(&self, p: &LocatedType, q: &LocatedType) -> bool {
        match (self.index_of(p.ty), self.index_of(q.ty)) {
            (Some(i), Some(j)) => self.compatible_idx(i, &p.support, j, &q.support),
            _ => merge_located(&[p.clone(), q.clone()], self.max_elem(p, q), &self.layout).is_some(),
        }
    }

    fn max_elem(&self, p: &LocatedType, q: &LocatedType) -> usize {
        p.support.iter().chain(&q.support).max().map_or(0, |m| m + 1)
    }
}

/// A template on `0..n`; `choices[colex_rank(A)]` is Ch(A), sorted by id.
#[derive(Clone, Debug)]
pub struct Template {
    pub pool: Arc<TypePool>,
    pub n: usize,
    pub choices: Vec<Vec<QfType>>,
}

impl PartialEq for Template {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.choices == other.choices
    }
}

impl Eq for Template {}

impl Hash for Template {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.n.hash(state);
        self.choices.hash(state);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubCount {
    pub count: BigUint,
    pub error_free: bool,
}

impl Template {
    pub fn new(pool: Arc<TypePool>, n: usize, mut choices: Vec<Vec<QfType>>) -> Result<Self> {
        let r = pool.r();
        if n < r {
            return invalid(format!("template needs at least {r} points"));
        }
        if choices.len() as u64 != binom(n, r) {
            return invalid(format!("expected {} choice sets, got {}", binom(n, r), choices.len()));
        }
        for (k, ch) in choices.iter_mut().enumerate() {
            ch.sort();
            ch.dedup();
            if let Some(p) = ch.iter().find(|p| !pool.contains(**p)) {
                return invalid(format!(
                    "type {p} on subset {:?} is not in S_r(H)",
                    one_based(&crate::combin::colex_unrank(k, r))
                ));
            }
        }
        Ok(Template { pool, n, choices })
    }

    pub fn from_fn(pool: Arc<TypePool>, n: usize, mut f: impl FnMut(&[usize]) -> Vec<QfType>) -> Result<Self> {
        let choices = subsets_colex(n, pool.r()).iter().map(|a| f(a)).collect();
        Self::new(pool, n, choices)
    }

    /// The singleton template Ñ with Ch(A) = {Diag^N(A)}.
    pub fn from_structure(pool: Arc<TypePool>, m: &Structure) -> Result<Self> {
        if !pool.prop.is_member(m)? {
            return invalid("structure is not in the property");
        }
        let layout = pool.layout.clone();
        let mut out = Vec::new();
        for a in subsets_colex(m.n, pool.r()) {
            out.push(vec![diagram(m, &a, &layout)?.ty]);
        }
        Self::new(pool, m.n, out)
    }

    pub fn r(&self) -> usize {
        self.pool.r()
    }

    pub fn subsets(&self) -> Vec<Vec<usize>> {
        subsets_colex(self.n, self.r())
    }

    /// Ch(A) for a sorted r-subset.
    pub fn ch(&self, a: &[usize]) -> &[QfType] {
        &self.choices[colex_rank(a)]
    }

    pub fn is_complete(&self) -> bool {
        self.choices.iter().all(|c| !c.is_empty())
    }

    fn require_complete(&self) -> Result<()> {
        if let Some(k) = self.choices.iter().position(|c| c.is_empty()) {
            return invalid(format!(
                "template is not complete: empty choice set on {:?}",
                one_based(&crate::combin::colex_unrank(k, self.r()))
            ));
        }
        Ok(())
    }

    /// |Ch(T)| = ∏ |Ch(A)|.
    pub fn choice_count(&self) -> BigUint {
        self.choices.iter().fold(BigUint::one(), |acc, c| acc * c.len())
    }

    /// Choice functions in lexicographic order, the first subset varying slowest.
    pub fn choice_functions(&self) -> Result<ChoiceFunctions<'_>> {
        self.require_complete()?;
        Ok(ChoiceFunctions {
            t: self,
            pos: Some(vec![0; self.choices.len()]),
        })
    }

    fn located(&self, chi: &[QfType]) -> Vec<LocatedType> {
        self.subsets()
            .into_iter()
            .zip(chi)
            .map(|(a, &ty)| LocatedType { support: a, ty })
            .collect()
    }

    /// The full subpattern chosen by χ, if the located choices are consistent.
    pub fn subpattern_of_choice(&self, chi: &[QfType]) -> Result<Option<Structure>> {
        if chi.len() != self.choices.len() {
            return invalid("choice function has the wrong length");
        }
        for (c, p) in self.choices.iter().zip(chi) {
            if !c.contains(p) {
                return invalid(format!("{p} is not an available choice"));
            }
        }
        Ok(merge_located(&self.located(chi), self.n, &self.pool.layout))
    }

    /// Pairs of overlapping located choices that cannot coexist, as the
    /// union of their supports (size between r+1 and 2r-1).
    pub fn detect_errors(&self) -> Result<Vec<Vec<usize>>> {
        self.require_complete()?;
        let mut found = BTreeSet::new();
        if self.pool.uniform_lower() {
            return Ok(Vec::new());
        }
        let subs = self.subsets();
        for (x, a) in subs.iter().enumerate() {
            for (y, b) in subs.iter().enumerate().skip(x + 1) {
                if !a.iter().any(|e| b.contains(e)) {
                    continue;
                }
                let clash = self.choices[x].iter().any(|p| {
                    let i = self.pool.index_of(*p).expect("pool type");
                    self.choices[y].iter().any(|q| {
                        let j = self.pool.index_of(*q).expect("pool type");
                        !self.pool.compatible_idx(i, a, j, b)
                    })
                });
                if clash {
                    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
                    u.sort_unstable();
                    u.dedup();
                    found.insert((u.iter().rev().copied().collect::<Vec<_>>(), u));
                }
            }
        }
        let mut out: Vec<(Vec<usize>, Vec<usize>)> = found.into_iter().collect();
        out.sort_by(|x, y| x.1.len().cmp(&y.1.len()).then(x.0.cmp(&y.0)));
        Ok(out.into_iter().map(|(_, u)| u).collect())
    }

    pub fn is_error_free(&self) -> Result<bool> {
        Ok(self.detect_errors()?.is_empty())
    }

    /// Error-freeness read off the definition: every choice function merges.
    pub fn every_choice_merges(&self, budget: &Budget) -> Result<bool> {
        for chi in self.choice_functions()? {
            tick(budget)?;
            if merge_located(&self.located(&chi), self.n, &self.pool.layout).is_none() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// sub(T): the number of full subpatterns.
    pub fn sub_count(&self, budget: &Budget) -> Result<SubCount> {
        if self.is_error_free()? {
            return Ok(SubCount {
                count: self.choice_count(),
                error_free: true,
            });
        }
        let subs = self.subsets();
        let mut picked: Vec<usize> = Vec::with_capacity(subs.len());
        let mut count = BigUint::zero();
        self.count_rec(&subs, &mut picked, &mut count, budget)?;
        Ok(SubCount {
            count,
            error_free: false,
        })
    }

    fn count_rec(
        &self,
        subs: &[Vec<usize>],
        picked: &mut Vec<usize>,
        count: &mut BigUint,
        budget: &Budget,
    ) -> Result<()> {
        let k = picked.len();
        if k == subs.len() {
            *count += 1u32;
            return Ok(());
        }
        for p in &self.choices[k] {
            tick(budget)?;
            let i = self.pool.index_of(*p).expect("pool type");
            let ok = (0..k).all(|x| self.pool.compatible_idx(picked[x], &subs[x], i, &subs[k]));
            if ok {
                picked.push(i);
                self.count_rec(subs, picked, count, budget)?;
                picked.pop();
            }
        }
        Ok(())
    }

    /// sub(T) by merging every choice function; distinct merges are distinct structures.
    pub fn sub_count_by_merging(&self, budget: &Budget) -> Result<BigUint> {
        let mut count = BigUint::zero();
        for chi in self.choice_functions()? {
            tick(budget)?;
            if merge_located(&self.located(&chi), self.n, &self.pool.layout).is_some() {
                count += 1u32;
            }
        }
        Ok(count)
    }

    /// Every full subpattern, in choice-function order.
    pub fn full_subpatterns(&self, budget: &Budget) -> Result<Vec<Structure>> {
        let mut out = Vec::new();
        for chi in self.choice_functions()? {
            tick(budget)?;
            if let Some(s) = merge_located(&self.located(&chi), self.n, &self.pool.layout) {
                out.push(s);
            }
        }
        Ok(out)
    }

    /// H-randomness as error-free plus no forbidden copy choosable on any window.
    pub fn is_h_random(&self, budget: &Budget) -> Result<bool> {
        if !self.is_error_free()? {
            return Ok(false);
        }
        Ok(self.first_bad_window(budget)?.is_none())
    }

    /// A window B of some forbidden size larger than r on which some choice
    /// function of T[B] merges to a structure containing a forbidden entry.
    pub fn first_bad_window(&self, budget: &Budget) -> Result<Option<Vec<usize>>> {
        let prop = &self.pool.prop;
        let r = self.r();
        for s in prop.entry_sizes() {
            if s <= r || s > self.n {
                continue;
            }
            let entries: Vec<usize> = (0..prop.forbidden.len())
                .filter(|&i| prop.forbidden[i].size() == s)
                .collect();
            for w in subsets_colex(self.n, s) {
                if self.window_admits(&w, &entries, budget)? {
                    return Ok(Some(w));
                }
            }
        }
        Ok(None)
    }

    fn window_admits(&self, w: &[usize], entries: &[usize], budget: &Budget) -> Result<bool> {
        let s = w.len();
        let local: Vec<Vec<usize>> = subsets_colex(s, self.r());
        let sets: Vec<&[QfType]> = local
            .iter()
            .map(|idx| {
                let a: Vec<usize> = idx.iter().map(|&i| w[i]).collect();
                self.ch(&a)
            })
            .collect();
        let ident: Vec<usize> = (0..s).collect();
        let mut pick = vec![0usize; local.len()];
        loop {
            tick(budget)?;
            let located: Vec<LocatedType> = local
                .iter()
                .zip(&pick)
                .zip(&sets)
                .map(|((a, &k), set)| LocatedType {
                    support: a.clone(),
                    ty: set[k],
                })
                .collect();
            if let Some(m) = merge_located(&located, s, &self.pool.layout) {
                if entries.iter().any(|&i| self.pool.prop.entry_on_window(i, &m, &ident)) {
                    return Ok(true);
                }
            }
            if !odometer(&mut pick, |i| sets[i].len()) {
                return Ok(false);
            }
        }
    }

    /// Direct reading of H-randomness: every choice function merges to a member of H.
    pub fn is_h_random_oracle(&self, budget: &Budget) -> Result<bool> {
        if !self.is_complete() {
            return Ok(false);
        }
        for chi in self.choice_functions()? {
            tick(budget)?;
            match merge_located(&self.located(&chi), self.n, &self.pool.layout) {
                Some(m) if self.pool.prop.is_member(&m)? => {}
                _ => return Ok(false),
            }
        }
        Ok(true)
    }

    /// T[A], relabeled onto `0..|A|`.
    pub fn restrict(&self, a: &[usize]) -> Result<Template> {
        let r = self.r();
        let mut sorted = a.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != a.len() || sorted.iter().any(|&x| x >= self.n) {
            return invalid("bad subset for restriction");
        }
        if sorted.len() < r {
            return invalid(format!("restriction needs at least {r} points"));
        }
        let choices = subsets_colex(sorted.len(), r)
            .into_iter()
            .map(|idx| {
                let sub: Vec<usize> = idx.iter().map(|&i| sorted[i]).collect();
                self.ch(&sub).to_vec()
            })
            .collect();
        Ok(Template {
            pool: self.pool.clone(),
            n: sorted.len(),
            choices,
        })
    }

    /// sub(T)^(n-r) = ∏_a sub(T - a) for error-free T, checked exactly.
    pub fn geometric_mean_identity(&self, budget: &Budget) -> Result<bool> {
        let r = self.r();
        if self.n <= r {
            return invalid("needs more than r points");
        }
        let lhs = self.sub_count(budget)?.count.pow((self.n - r) as u32);
        let mut rhs = BigUint::one();
        for drop in 0..self.n {
            let keep: Vec<usize> = (0..self.n).filter(|&x| x != drop).collect();
            rhs *= self.restrict(&keep)?.sub_count(budget)?.count;
        }
        Ok(lhs == rhs)
    }
}

/// Advance a mixed-radix counter, last digit fastest. False after the last value.
pub(crate) fn odometer(pick: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    let mut i = pick.len();
    while i > 0 {
        i -= 1;
        pick[i] += 1;
        if pick[i] < radix(i) {
            return true;
        }
        pick[i] = 0;
    }
    false
}

fn tick(budget: &Budget) -> Result<()> {
    if budget.tick() {
        Ok(())
    } else {
        Err(LabError::BudgetExhausted(format!(
            "stopped after {} nodes",
            budget.used()
        )))
    }
}

pub fn one_based(a: &[usize]) -> Vec<usize> {
    a.iter().map(|x| x + 1).collect()
}

pub struct ChoiceFunctions<'a> {
    t: &'a Template,
    pos: Option<Vec<usize>>,
}

impl Iterator for ChoiceFunctions<'_> {
    type Item = Vec<QfType>;

    fn next(&mut self) -> Option<Vec<QfType>> {
        let pos = self.pos.as_mut()?;
        let item = pos.iter().zip(&self.t.choices).map(|(&k, c)| c[k]).collect();
        if !odometer(pos, |i| self.t.choices[i].len()) {
            self.pos = None;
        }
        Some(item)
    }
}

/// An L_H-structure in relational form: facts R_p(a) with p a type and a an r-tuple.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawTemplate {
    pub n: usize,
    pub facts: Vec<(QfType, Vec<usize>)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawIssue {
    /// R_p holds on a tuple with a repeated element.
    Improper { tuple: Vec<usize> },
    /// R_p for a type outside S_r(H).
    UnknownType { ty: QfType },
    /// R_p(a) holds but the same located type under another enumeration does not.
    Incoherent {
        subset: Vec<usize>,
        missing: (QfType, Vec<usize>),
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Validation {
    Valid(Template),
    /// Flaw-free but some r-subset has no choice.
    Incomplete {
        template: Template,
        subset: Vec<usize>,
    },
    Flawed(RawIssue),
}

impl RawTemplate {
    /// The relational form of a canonical template: every enumeration of every choice.
    pub fn from_template(t: &Template) -> RawTemplate {
        let layout = &t.pool.layout;
        let perms = crate::combin::permutations(t.r());
        let mut facts = Vec::new();
        for a in t.subsets() {
            for p in t.ch(&a) {
                for pi in &perms {
                    let tuple: Vec<usize> = pi.iter().map(|&i| a[i]).collect();
                    facts.push((p.permute(layout, pi), tuple));
                }
            }
        }
        facts.sort();
        RawTemplate { n: t.n, facts }
    }

    /// Check the template axioms and normalize to choice sets.
    pub fn validate(&self, pool: &Arc<TypePool>) -> Result<Validation> {
        let r = pool.r();
        if self.n < r {
            return invalid(format!("template needs at least {r} points"));
        }
        let mut choices = vec![Vec::new(); binom(self.n, r) as usize];
        for (p, tuple) in &self.facts {
            if tuple.len() != r || tuple.iter().any(|&x| x >= self.n) {
                return invalid(format!("bad tuple {:?}", one_based(tuple)));
            }
            if !pool.contains(*p) {
                return Ok(Validation::Flawed(RawIssue::UnknownType { ty: *p }));
            }
            let distinct: HashSet<usize> = tuple.iter().copied().collect();
            if distinct.len() != r {
                return Ok(Validation::Flawed(RawIssue::Improper { tuple: tuple.clone() }));
            }
            let lt = LocatedType::from_enumeration(tuple, *p, &pool.layout);
            let k = colex_rank(&lt.support);
            if !choices[k].contains(&lt.ty) {
                choices[k].push(lt.ty);
            }
        }
        let t = Template::new(pool.clone(), self.n, choices)?;
        let have: HashSet<&(QfType, Vec<usize>)> = self.facts.iter().collect();
        let full = RawTemplate::from_template(&t);
        if let Some(missing) = full.facts.iter().find(|f| !have.contains(f)) {
            let mut subset = missing.1.clone();
            subset.sort_unstable();
            return Ok(Validation::Flawed(RawIssue::Incoherent {
                subset,
                missing: missing.clone(),
            }));
        }
        if let Some(k) = t.choices.iter().position(|c| c.is_empty()) {
            let subset = crate::combin::colex_unrank(k, r);
            return Ok(Validation::Incomplete { template: t, subset });
        }
        Ok(Validation::Valid(t))
    }

    pub fn is_flaw_free(&self, pool: &Arc<TypePool>) -> Result<bool> {
        Ok(!matches!(self.validate(pool)?, Validation::Flawed(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::property::{ForbiddenEntry, Mode};
    use crate::signature::Signature;

    // metric spaces with distances 1..3, built by hand to keep this module self-contained
    fn metric_pool() -> Arc<TypePool> {
        let sig = Arc::new(Signature::new(vec![("R1", 2), ("R2", 2), ("R3", 2)]).unwrap());
        let mut f = Vec::new();
        for i in 0..3 {
            let mut loop_ = Structure::empty(sig.clone(), 1);
            loop_.set(i, &[0, 0], true);
            f.push(ForbiddenEntry::non_induced(loop_));
            let mut asym = Structure::empty(sig.clone(), 2);
            asym.set(i, &[0, 1], true);
            f.push(ForbiddenEntry::induced(asym));
            for j in 0..3 {
                if i != j {
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
        }
        f.push(ForbiddenEntry::induced(Structure::empty(sig.clone(), 2)));
        let mut bad = Structure::empty(sig.clone(), 3);
        for (a, b, d) in [(0, 1, 0), (1, 2, 0), (0, 2, 2)] {
            bad.set(d, &[a, b], true);
            bad.set(d, &[b, a], true);
        }
        f.push(ForbiddenEntry::induced(bad));
        let prop = Arc::new(HereditaryProperty::new(sig, Mode::Induced, f).unwrap());
        TypePool::new(prop, &Budget::unlimited()).unwrap()
    }

    fn p(pool: &TypePool, d: usize) -> QfType {
        QfType(pool.layout.bit(d - 1, &[0, 1]) | pool.layout.bit(d - 1, &[1, 0]))
    }

    fn tmpl(pool: &Arc<TypePool>, n: usize, sets: &[&[usize]]) -> Template {
        let choices = sets.iter().map(|s| s.iter().map(|&d| p(pool, d)).collect()).collect();
        Template::new(pool.clone(), n, choices).unwrap()
    }

    // subsets of 3 points in colex order: {0,1}, {0,2}, {1,2}
    fn example_g(pool: &Arc<TypePool>) -> Template {
        tmpl(pool, 3, &[&[1, 2, 3], &[1], &[1, 2]])
    }

    #[test]
    fn metric_pool_has_three_types() {
        let pool = metric_pool();
        assert_eq!(pool.len(), 3);
        assert!(pool.uniform_lower());
    }

    #[test]
    fn example_g_counts() {
        let pool = metric_pool();
        let g = example_g(&pool);
        assert_eq!(g.choice_count(), BigUint::from(6u32));
        assert_eq!(g.choice_functions().unwrap().count(), 6);
        let s = g.sub_count(&Budget::unlimited()).unwrap();
        assert_eq!(
            s,
            SubCount {
                count: BigUint::from(6u32),
                error_free: true
            }
        );
        assert!(!g.is_h_random(&Budget::unlimited()).unwrap());
        assert!(!g.is_h_random_oracle(&Budget::unlimited()).unwrap());
    }

    #[test]
    fn choice_p1_p2_p1_is_a_metric_space() {
        let pool = metric_pool();
        let g = example_g(&pool);
        // (uv, uw, vw) with u=0, v=1, w=2
        let h = g
            .subpattern_of_choice(&[p(&pool, 1), p(&pool, 1), p(&pool, 2)])
            .unwrap()
            .unwrap();
        assert!(pool.prop.is_member(&h).unwrap());
        let h2 = g
            .subpattern_of_choice(&[p(&pool, 3), p(&pool, 1), p(&pool, 1)])
            .unwrap()
            .unwrap();
        assert!(!pool.prop.is_member(&h2).unwrap());
        assert!(g
            .subpattern_of_choice(&[p(&pool, 2), p(&pool, 2), p(&pool, 2)])
            .is_err());
    }

    #[test]
    fn all_one_two_is_random() {
        let pool = metric_pool();
        let g = tmpl(&pool, 3, &[&[1, 2], &[1, 2], &[1, 2]]);
        assert_eq!(g.choice_count(), BigUint::from(8u32));
        assert!(g.is_h_random(&Budget::unlimited()).unwrap());
        assert!(g.is_h_random_oracle(&Budget::unlimited()).unwrap());
    }

    #[test]
    fn singleton_template_roundtrip() {
        let pool = metric_pool();
        let g = tmpl(&pool, 3, &[&[2], &[2], &[2]]);
        let subs = g.full_subpatterns(&Budget::unlimited()).unwrap();
        assert_eq!(subs.len(), 1);
        let back = Template::from_structure(pool.clone(), &subs[0]).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.sub_count(&Budget::unlimited()).unwrap().count, BigUint::one());
        assert!(back.is_h_random(&Budget::unlimited()).unwrap());
        let r = back.restrict(&[0, 2]).unwrap();
        assert_eq!(
            r,
            Template::from_structure(pool.clone(), &subs[0].induced(&[0, 2]).unwrap()).unwrap()
        );
    }

    #[test]
    fn restrict_identity_and_errors() {
        let pool = metric_pool();
        let g = example_g(&pool);
        assert_eq!(g.restrict(&[0, 1, 2]).unwrap(), g);
        assert!(g.restrict(&[1]).is_err());
        assert_eq!(
            g.restrict(&[1, 2]).unwrap().choices,
            vec![vec![p(&pool, 2), p(&pool, 1)]]
        );
    }

    #[test]
    fn raw_templates_normalize() {
        let pool = metric_pool();
        let g = example_g(&pool);
        let raw = RawTemplate::from_template(&g);
        assert_eq!(raw.validate(&pool).unwrap(), Validation::Valid(g.clone()));
        // drop R_{p1}(v,u): the symmetric partner is still present
        let mut bad = raw.clone();
        bad.facts.retain(|f| !(f.0 == p(&pool, 1) && f.1 == vec![1, 0]));
        assert!(matches!(
            bad.validate(&pool).unwrap(),
            Validation::Flawed(RawIssue::Incoherent { .. })
        ));
        let mut looped = raw.clone();
        looped.facts.push((p(&pool, 1), vec![2, 2]));
        assert!(matches!(
            looped.validate(&pool).unwrap(),
            Validation::Flawed(RawIssue::Improper { .. })
        ));
        let partial = RawTemplate {
            n: 3,
            facts: raw
                .facts
                .iter()
                .filter(|f| f.1 != vec![0, 2] && f.1 != vec![2, 0])
                .cloned()
                .collect(),
        };
        assert!(matches!(
            partial.validate(&pool).unwrap(),
            Validation::Incomplete { .. }
        ));
        assert!(partial.is_flaw_free(&pool).unwrap());
    }

    #[test]
    fn incomplete_templates_are_refused() {
        let pool = metric_pool();
        let t = Template::new(pool.clone(), 3, vec![vec![p(&pool, 1)], vec![], vec![p(&pool, 1)]]).unwrap();
        assert!(!t.is_complete());
        assert!(t.sub_count(&Budget::unlimited()).is_err());
        assert!(t.choice_functions().is_err());
    }

    #[test]
    fn geometric_mean() {
        let pool = metric_pool();
        let t = tmpl(&pool, 4, &[&[1, 2], &[1], &[2, 3], &[1, 2, 3], &[2], &[1, 2]]);
        assert!(t.geometric_mean_identity(&Budget::unlimited()).unwrap());
    }

    #[test]
    fn errors_with_loops_unrestricted() {
        // digraphs with no restriction at all: a loop at a shared vertex can clash
        let sig = Arc::new(Signature::new(vec![("E", 2)]).unwrap());
        let mut big = Structure::empty(sig.clone(), 3);
        for a in 0..3 {
            for b in 0..3 {
                big.set(0, &[a, b], true);
            }
        }
        // forbid nothing realizable on two points
        let prop = Arc::new(HereditaryProperty::uniform(sig.clone(), Mode::Induced, vec![big]).unwrap());
        let pool = TypePool::new(prop, &Budget::unlimited()).unwrap();
        assert_eq!(pool.len(), 16);
        assert!(!pool.uniform_lower());
        let l = &pool.layout;
        let with_loop = QfType(l.bit(0, &[0, 0]));
        let without = QfType(0);
        let t = Template::new(pool.clone(), 3, vec![vec![with_loop], vec![without], vec![without]]).unwrap();
        assert_eq!(t.detect_errors().unwrap(), vec![vec![0, 1, 2]]);
        let s = t.sub_count(&Budget::unlimited()).unwrap();
        assert_eq!(s.count, BigUint::zero());
        assert_eq!(t.sub_count_by_merging(&Budget::unlimited()).unwrap(), BigUint::zero());
        assert!(!t.every_choice_merges(&Budget::unlimited()).unwrap());
    }
}
