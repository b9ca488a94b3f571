//! The container hypergraph H(F,W) over located types, its degrees and
//! co-degree function, and the templates D_σ built from diagram sets.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::budget::Budget;
use crate::combin::{binom, binom_big, colex_rank, colex_unrank, factorial, subsets_colex};
use crate::error::{invalid, LabError, Result};
use crate::property::HereditaryProperty;
use crate::signature::Structure;
use crate::template::{odometer, one_based, RawTemplate, Template, TypePool};
use crate::types::{merge_located, qftp_unchecked, satisfy, span_of_size, LocatedType, SyntacticDiagram};

/// Largest uniformity for which every sub-edge is tabulated.
pub const MAX_UNIFORMITY: usize = 20;

/// H(F,W) on W = 0..n. Vertex `i·|pool| + t` is pool type t located on the
/// r-subset of colex rank i.
#[derive(Clone, Debug)]
pub struct ContainerHypergraph {
    pub pool: Arc<TypePool>,
    pub n: usize,
    pub k: usize,
    /// Uniformity C(k,r).
    pub s: usize,
    /// `groups[colex_rank(X)]` holds the edges whose support is the k-subset X,
    /// each as a sorted list of vertex ids.
    pub groups: Vec<Vec<Vec<u32>>>,
    pub alpha: u64,
}

fn budget_err(what: &str, budget: &Budget) -> LabError {
    LabError::BudgetExhausted(format!("{what}: stopped after {} nodes", budget.used()))
}

/// Is a merged k-structure (or a clash) an edge? Clashes are Err_k; merged
/// non-members are Diag^tp(cl_k(F)).
fn is_edge_diagram(prop: &HereditaryProperty, merged: Option<Structure>) -> Result<bool> {
    match merged {
        None => Ok(true),
        Some(m) => Ok(!prop.is_member(&m)?),
    }
}

/// Membership of a merged ℓ-structure in F(ℓ): some forbidden entry of size ℓ
/// sits on the whole domain.
fn in_f_ell(prop: &HereditaryProperty, m: &Structure) -> bool {
    let all: Vec<usize> = (0..m.n).collect();
    prop.window_violated(m, &all)
}

impl ContainerHypergraph {
    /// Build H(F,W) for the property's forbidden family with closure size k.
    pub fn build(pool: &Arc<TypePool>, k: usize, n: usize, workers: usize, budget: &Budget) -> Result<Self> {
        let prop = &pool.prop;
        let r = pool.r();
        if prop.forbidden.is_empty() {
            return invalid("the forbidden family must be nonempty");
        }
        if k < r {
            return invalid(format!("k = {k} is below r = {r}"));
        }
        if k < prop.k() {
            return invalid(format!("k = {k} is below the largest forbidden size {}", prop.k()));
        }
        if n < k {
            return invalid(format!("n = {n} is below k = {k}"));
        }
        let s = binom(k, r) as usize;
        let per_subset = BigUint::from(pool.len()).pow(s as u32);
        let total = &per_subset * binom_big(n, k);
        if total > BigUint::from(budget.max_nodes.saturating_sub(budget.used())) {
            return Err(LabError::BudgetExhausted(format!(
                "{total} syntactic {k}-diagrams exceed the node budget"
            )));
        }
        let subsets = subsets_colex(n, k);
        let slots = subsets_colex(k, r);
        let p = pool.len();
        let groups: Mutex<Vec<Option<Vec<Vec<u32>>>>> = Mutex::new(vec![None; subsets.len()]);
        let failure: Mutex<Option<LabError>> = Mutex::new(None);
        let next = std::sync::atomic::AtomicUsize::new(0);
        let run = || loop {
            let gi = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
            if gi >= subsets.len() || failure.lock().expect("failure lock").is_some() {
                return;
            }
            match Self::group_edges(pool, &subsets[gi], &slots, p, budget) {
                Ok(g) => groups.lock().expect("groups lock")[gi] = Some(g),
                Err(e) => {
                    *failure.lock().expect("failure lock") = Some(e);
                    return;
                }
            }
        };
        let workers = workers.max(1).min(subsets.len());
        if workers == 1 {
            run();
        } else {
            std::thread::scope(|sc| {
                for _ in 0..workers {
                    sc.spawn(run);
                }
            });
        }
        if let Some(e) = failure.into_inner().expect("failure lock") {
            return Err(e);
        }
        let groups: Vec<Vec<Vec<u32>>> = groups
            .into_inner()
            .expect("groups lock")
            .into_iter()
            .flatten()
            .collect();
        let alpha = groups.first().map_or(0, |g| g.len() as u64);
        if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.len() as u64 != alpha) {
            return Err(LabError::Verification(format!(
                "k-subset {:?} carries {} edges, the first carries {alpha}",
                one_based(&subsets[i]),
                g.len()
            )));
        }
        let hg = ContainerHypergraph {
            pool: pool.clone(),
            n,
            k,
            s,
            groups,
            alpha,
        };
        if hg.e() as u128 != alpha as u128 * binom(n, k) as u128 {
            return Err(LabError::Verification("|E| differs from alpha·C(n,k)".into()));
        }
        Ok(hg)
    }

    fn group_edges(
        pool: &Arc<TypePool>,
        x: &[usize],
        slots: &[Vec<usize>],
        p: usize,
        budget: &Budget,
    ) -> Result<Vec<Vec<u32>>> {
        let k = x.len();
        let ids: Vec<usize> = slots
            .iter()
            .map(|idx| colex_rank(&idx.iter().map(|&i| x[i]).collect::<Vec<_>>()))
            .collect();
        let mut out = Vec::new();
        let mut pick = vec![0usize; slots.len()];
        if p == 0 {
            return Ok(out);
        }
        loop {
            if !budget.tick() {
                return Err(budget_err("edge construction", budget));
            }
            let entries: Vec<LocatedType> = slots
                .iter()
                .zip(&pick)
                .map(|(a, &t)| LocatedType {
                    support: a.clone(),
                    ty: pool.types[t],
                })
                .collect();
            if is_edge_diagram(&pool.prop, merge_located(&entries, k, &pool.layout))? {
                let mut e: Vec<u32> = ids.iter().zip(&pick).map(|(&i, &t)| (i * p + t) as u32).collect();
                e.sort_unstable();
                out.push(e);
            }
            if !odometer(&mut pick, |_| p) {
                break;
            }
        }
        Ok(out)
    }

    pub fn r(&self) -> usize {
        self.pool.r()
    }

    /// v(H) = C(n,r)·|S_r(H)|.
    pub fn v(&self) -> usize {
        binom(self.n, self.r()) as usize * self.pool.len()
    }

    pub fn e(&self) -> usize {
        self.groups.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Vec<u32>> {
        self.groups.iter().flatten()
    }

    pub fn vertex(&self, id: u32) -> LocatedType {
        let p = self.pool.len();
        let id = id as usize;
        LocatedType {
            support: colex_unrank(id / p, self.r()),
            ty: self.pool.types[id % p],
        }
    }

    pub fn vertex_id(&self, lt: &LocatedType) -> Option<u32> {
        if lt.support.len() != self.r() || lt.support.iter().any(|&x| x >= self.n) {
            return None;
        }
        let t = self.pool.index_of(lt.ty)?;
        Some((colex_rank(&lt.support) * self.pool.len() + t) as u32)
    }

    pub fn diagram_of(&self, ids: &[u32]) -> SyntacticDiagram {
        SyntacticDiagram::new(ids.iter().map(|&i| self.vertex(i)).collect())
    }

    pub fn ids_of(&self, sigma: &SyntacticDiagram) -> Option<Vec<u32>> {
        let mut v: Vec<u32> = sigma.entries.iter().map(|e| self.vertex_id(e)).collect::<Option<_>>()?;
        v.sort_unstable();
        v.dedup();
        Some(v)
    }

    fn support_of(&self, ids: &[u32]) -> Vec<usize> {
        let mut v: Vec<usize> = ids.iter().flat_map(|&i| self.vertex(i).support).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// d(σ) = |{e ∈ E : σ ⊆ e}| by scanning the groups whose support contains V(σ).
    pub fn degree(&self, sigma: &[u32]) -> u64 {
        let mut sigma = sigma.to_vec();
        sigma.sort_unstable();
        sigma.dedup();
        let vs = self.support_of(&sigma);
        if vs.len() > self.k {
            return 0;
        }
        let mut count = 0;
        for (gi, g) in self.groups.iter().enumerate() {
            let x = colex_unrank(gi, self.k);
            if !vs.iter().all(|v| x.contains(v)) {
                continue;
            }
            count += g
                .iter()
                .filter(|e| sigma.iter().all(|v| e.binary_search(v).is_ok()))
                .count() as u64;
        }
        count
    }

    /// Degrees of every nonempty vertex set lying inside some edge.
    fn sub_edge_degrees(&self, budget: &Budget) -> Result<HashMap<Vec<u32>, u64>> {
        if self.s > MAX_UNIFORMITY {
            return invalid(format!("uniformity {} is too large to tabulate sub-edges", self.s));
        }
        let mut table: HashMap<Vec<u32>, u64> = HashMap::new();
        for e in self.edges() {
            for mask in 1u32..(1u32 << e.len()) {
                if !budget.tick() {
                    return Err(budget_err("co-degree table", budget));
                }
                let sub: Vec<u32> = (0..e.len()).filter(|&i| mask >> i & 1 == 1).map(|i| e[i]).collect();
                *table.entry(sub).or_insert(0) += 1;
            }
        }
        Ok(table)
    }

    /// d^{(j)}(v) for every vertex: the largest degree of a j-set through v.
    /// A j-set inside no edge has degree 0, so only sub-edges matter.
    pub fn max_codegrees(&self, j: usize, budget: &Budget) -> Result<Vec<u64>> {
        Ok(self
            .codegree_table(budget)?
            .remove(&j)
            .unwrap_or_else(|| vec![0; self.v()]))
    }

    /// d^{(j)} for all 1 ≤ j ≤ s at once.
    pub fn codegree_table(&self, budget: &Budget) -> Result<HashMap<usize, Vec<u64>>> {
        let degrees = self.sub_edge_degrees(budget)?;
        let mut out: HashMap<usize, Vec<u64>> = (1..=self.s).map(|j| (j, vec![0; self.v()])).collect();
        for (sub, d) in degrees {
            let row = out.get_mut(&sub.len()).expect("size within uniformity");
            for v in sub {
                let slot = &mut row[v as usize];
                *slot = (*slot).max(d);
            }
        }
        Ok(out)
    }

    /// δ_j and δ(H,τ) in exact arithmetic.
    pub fn codegree_function(&self, tau: &BigRational, budget: &Budget) -> Result<CodegreeReport> {
        let v = self.v();
        if v == 0 {
            return invalid("the hypergraph has no vertices");
        }
        if !tau.is_positive() {
            return invalid("tau must be positive");
        }
        let s = self.s;
        let e = self.e();
        let d = BigRational::new(BigInt::from(e) * BigInt::from(s), BigInt::from(v));
        let mut delta_j = Vec::new();
        let mut codegree_sums = Vec::new();
        let mut delta = BigRational::zero();
        if !d.is_zero() {
            let table = self.codegree_table(budget)?;
            for j in 2..=s {
                let sum: BigUint = table[&j].iter().map(|&x| BigUint::from(x)).sum();
                let denom = pow_rational(tau, j - 1) * BigRational::from_integer(BigInt::from(v)) * &d;
                let dj = BigRational::from_integer(BigInt::from(sum.clone())) / denom;
                delta += &dj / BigRational::from_integer(BigInt::from(BigUint::one() << binom(j - 1, 2)));
                codegree_sums.push(sum);
                delta_j.push(dj);
            }
            if s >= 2 {
                let lead = BigInt::from(BigUint::one() << binom(s, 2)) / BigInt::from(2u32);
                delta *= BigRational::from_integer(lead);
            }
        } else {
            for _ in 2..=s {
                codegree_sums.push(BigUint::zero());
                delta_j.push(BigRational::zero());
            }
        }
        Ok(CodegreeReport {
            v,
            e,
            s,
            alpha: self.alpha,
            tau: tau.clone(),
            d,
            codegree_sums,
            delta_j,
            delta,
        })
    }

    /// Diag^tp(M) independent in H? Otherwise an edge inside it, or an r-type
    /// of M that is not a vertex at all.
    pub fn independence_check(&self, m: &Structure) -> Result<Independence> {
        if m.n != self.n || *m.sig != *self.pool.prop.sig {
            return invalid("structure is not on the hypergraph's domain");
        }
        let layout = &self.pool.layout;
        let mut ids = Vec::new();
        for a in subsets_colex(self.n, self.r()) {
            let lt = LocatedType {
                ty: qftp_unchecked(m, &a, layout),
                support: a,
            };
            match self.vertex_id(&lt) {
                Some(i) => ids.push(i),
                None => return Ok(Independence::Outside(lt)),
            }
        }
        ids.sort_unstable();
        for e in self.edges() {
            if e.iter().all(|v| ids.binary_search(v).is_ok()) {
                return Ok(Independence::Edge(self.diagram_of(e)));
            }
        }
        Ok(Independence::Independent)
    }

    /// E(H[S]): the edges contained in S.
    pub fn induced_edges(&self, s: &[u32]) -> Vec<Vec<u32>> {
        let mut s = s.to_vec();
        s.sort_unstable();
        self.edges()
            .filter(|e| e.iter().all(|v| s.binary_search(v).is_ok()))
            .cloned()
            .collect()
    }

    /// (Diag^tp(cl_k(F),C_W) ∪ Err_k(C_W)) ∩ Span(S), classified directly from
    /// the syntactic k-diagrams spanned by S.
    pub fn spanned_edges(&self, s: &[u32], budget: &Budget) -> Result<Vec<Vec<u32>>> {
        let sigma = self.diagram_of(s);
        let mut out = Vec::new();
        for d in span_of_size(&sigma, self.r(), self.k) {
            if !budget.tick() {
                return Err(budget_err("span classification", budget));
            }
            let merged = satisfy(&d, &self.pool.layout)?.map(|(m, _)| m);
            if is_edge_diagram(&self.pool.prop, merged)? {
                out.push(self.ids_of(&d).expect("entries are vertices"));
            }
        }
        out.sort();
        Ok(out)
    }
}

fn pow_rational(x: &BigRational, e: usize) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * x)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Independence {
    Independent,
    Edge(SyntacticDiagram),
    Outside(LocatedType),
}

impl Independence {
    pub fn is_independent(&self) -> bool {
        matches!(self, Independence::Independent)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodegreeReport {
    pub v: usize,
    pub e: usize,
    pub s: usize,
    pub alpha: u64,
    pub tau: BigRational,
    /// Average degree e·s/v.
    pub d: BigRational,
    /// Σ_v d^{(j)}(v) for j = 2..=s.
    pub codegree_sums: Vec<BigUint>,
    /// δ_j for j = 2..=s.
    pub delta_j: Vec<BigRational>,
    pub delta: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ThresholdCheck {
    pub epsilon: BigRational,
    pub epsilon_prime: BigRational,
    pub threshold: BigRational,
    /// 0 < τ < 1/2 and 0 < ε′ < 1/2.
    pub in_range: bool,
    pub met: bool,
}

impl CodegreeReport {
    /// Compare δ(H,τ) with ε′/(12·s!) where ε′ = ε/|S_r(L)|^s.
    pub fn threshold(&self, epsilon: &BigRational, type_space_size: &BigUint) -> ThresholdCheck {
        let big = |x: BigUint| BigRational::from_integer(BigInt::from(x));
        let epsilon_prime = epsilon / big(type_space_size.pow(self.s as u32));
        let threshold = &epsilon_prime / big(factorial(self.s) * 12u32);
        let half = BigRational::new(1.into(), 2.into());
        let in_range = self.tau.is_positive() && self.tau < half && epsilon_prime.is_positive() && epsilon_prime < half;
        let met = in_range && self.delta <= threshold;
        ThresholdCheck {
            epsilon: epsilon.clone(),
            epsilon_prime,
            threshold,
            in_range,
            met,
        }
    }
}

/// |S_r(L)|: every complete type on r distinct points.
pub fn type_space_size(pool: &TypePool) -> BigUint {
    BigUint::one() << pool.layout.len()
}

/// m(k,r) = max over r < ℓ ≤ k of (C(ℓ,r) − 1)/(ℓ − r).
pub fn exponent_m(k: usize, r: usize) -> Result<BigRational> {
    if r == 0 || k <= r {
        return invalid(format!("m(k,r) needs 1 ≤ r < k, got k = {k}, r = {r}"));
    }
    let mut best: Option<BigRational> = None;
    for ell in r + 1..=k {
        let q = BigRational::new(BigInt::from(binom_big(ell, r)) - 1, BigInt::from(ell - r));
        if best.as_ref().is_none_or(|b| q > *b) {
            best = Some(q);
        }
    }
    Ok(best.expect("nonempty range"))
}

/// τ = n^{−1/m}·γ^{−1}, rounded to the nearest double and then held exactly.
pub fn auto_tau(n: usize, m: &BigRational, gamma: f64) -> Result<BigRational> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return invalid("gamma must lie in (0,1)");
    }
    let m = m.to_f64().unwrap_or(f64::NAN);
    let tau = (n as f64).powf(-1.0 / m) / gamma;
    BigRational::from_float(tau).ok_or_else(|| LabError::InvalidArgument("tau is not finite".into()))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCheck {
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
}

/// 2^{C(s,2)+1}·|S_r(L)|·r!·(k−r)^{k−r}·γ ≤ ε′/(12·s!), with s = C(k,r).
pub fn gamma_inequality(
    k: usize,
    r: usize,
    type_space_size: &BigUint,
    gamma: &BigRational,
    epsilon: &BigRational,
) -> Result<GammaCheck> {
    if k < r {
        return invalid("k must be at least r");
    }
    let s = binom(k, r) as usize;
    let big = |x: BigUint| BigRational::from_integer(BigInt::from(x));
    let coeff = (BigUint::one() << (binom(s, 2) + 1))
        * type_space_size
        * factorial(r)
        * BigUint::from(k - r).pow((k - r) as u32);
    let lhs = big(coeff) * gamma;
    let rhs = epsilon / big(type_space_size.pow(s as u32)) / big(factorial(s) * 12u32);
    let holds = lhs <= rhs;
    Ok(GammaCheck { lhs, rhs, holds })
}

/// D_σ: the template on 0..n with Ch(A) = Ch_σ(A). σ must be complete.
pub fn d_sigma(pool: &Arc<TypePool>, n: usize, sigma: &SyntacticDiagram) -> Result<Template> {
    let r = pool.r();
    if n < r {
        return invalid(format!("D_sigma needs at least {r} points"));
    }
    let mut choices = vec![Vec::new(); binom(n, r) as usize];
    for e in &sigma.entries {
        if e.support.len() != r || e.support.iter().any(|&x| x >= n) {
            return invalid(format!(
                "entry on {:?} is not an r-subset of the domain",
                one_based(&e.support)
            ));
        }
        if !pool.contains(e.ty) {
            return invalid(format!("type {} is not in S_r(H)", e.ty));
        }
        choices[colex_rank(&e.support)].push(e.ty);
    }
    if let Some(i) = choices.iter().position(Vec::is_empty) {
        return invalid(format!(
            "sigma is not complete: no entry on {:?}",
            one_based(&colex_unrank(i, r))
        ));
    }
    let t = Template::new(pool.clone(), n, choices)?;
    if !RawTemplate::from_template(&t).is_flaw_free(pool)? {
        return Err(LabError::Verification("D_sigma is not a template".into()));
    }
    Ok(t)
}

/// The diagram set of a template: every located choice.
pub fn sigma_of(t: &Template) -> SyntacticDiagram {
    SyntacticDiagram::new(
        t.subsets()
            .into_iter()
            .flat_map(|a| {
                t.ch(&a)
                    .iter()
                    .map(move |&ty| LocatedType { support: a.clone(), ty })
                    .collect::<Vec<_>>()
            })
            .collect(),
    )
}

/// One size ℓ of the injection check: copies in D_σ against spanned diagrams.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InjectionRow {
    pub ell: usize,
    pub copies: u64,
    pub diagrams: u64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundingReport {
    /// |cop(F̃(ℓ), D_σ)| against |Diag^tp(F(ℓ),C_W) ∩ Span(σ)|, r ≤ ℓ ≤ min(k,n).
    pub forbidden: Vec<InjectionRow>,
    /// |cop(E(ℓ), D_σ)| against |Err_ℓ(C_W) ∩ Span(σ)|, r+1 ≤ ℓ ≤ min(2r,n).
    pub errors: Vec<InjectionRow>,
}

impl BoundingReport {
    pub fn holds(&self) -> bool {
        self.forbidden.iter().chain(&self.errors).all(|r| r.holds)
    }
}

/// Count both sides of the two injections for D_σ. Copies are counted on the
/// template (windows with a choice function landing in F(ℓ), windows that are
/// errors); diagrams are counted on Span(σ).
pub fn bounding_check(t: &Template, k: usize, budget: &Budget) -> Result<BoundingReport> {
    let prop = &t.pool.prop;
    let layout = &t.pool.layout;
    let r = t.r();
    let sigma = sigma_of(t);
    let mut forbidden = Vec::new();
    for ell in r..=k.min(t.n) {
        let mut copies = 0;
        for x in subsets_colex(t.n, ell) {
            let sub = t.restrict(&x)?;
            let mut hit = false;
            for chi in sub.choice_functions()? {
                if !budget.tick() {
                    return Err(budget_err("copy count", budget));
                }
                if let Some(m) = sub.subpattern_of_choice(&chi)? {
                    if in_f_ell(prop, &m) {
                        hit = true;
                        break;
                    }
                }
            }
            copies += hit as u64;
        }
        let mut diagrams = 0;
        for d in span_of_size(&sigma, r, ell) {
            if !budget.tick() {
                return Err(budget_err("span count", budget));
            }
            if let Some((m, _)) = satisfy(&d, layout)? {
                diagrams += in_f_ell(prop, &m) as u64;
            }
        }
        forbidden.push(InjectionRow {
            ell,
            copies,
            diagrams,
            holds: copies <= diagrams,
        });
    }
    let windows = t.detect_errors()?;
    let mut errors = Vec::new();
    for ell in r + 1..=(2 * r).min(t.n) {
        let copies = windows.iter().filter(|w| w.len() == ell).count() as u64;
        let mut diagrams = 0;
        for d in span_of_size(&sigma, r, ell) {
            if !budget.tick() {
                return Err(budget_err("span count", budget));
            }
            diagrams += satisfy(&d, layout)?.is_none() as u64;
        }
        errors.push(InjectionRow {
            ell,
            copies,
            diagrams,
            holds: copies <= diagrams,
        });
    }
    Ok(BoundingReport { forbidden, errors })
}

/// |Γ(ℓ)| for r ≤ ℓ ≤ k: Γ(k) uses cl_k(F), smaller ℓ use F(ℓ), all with Err_ℓ.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GammaCounts {
    pub n: usize,
    pub k: usize,
    /// (ℓ, |Γ(ℓ)|) in increasing ℓ.
    pub counts: Vec<(usize, u64)>,
}

impl GammaCounts {
    pub fn top(&self) -> u64 {
        self.counts.last().map_or(0, |c| c.1)
    }

    /// |Γ(ℓ)|·C(n−ℓ,k−ℓ) ≤ |Γ(k)|·C(k,ℓ) for every ℓ.
    pub fn double_count_holds(&self) -> bool {
        self.counts.iter().all(|&(ell, g)| {
            BigUint::from(g) * binom_big(self.n - ell, self.k - ell)
                <= BigUint::from(self.top()) * binom_big(self.k, ell)
        })
    }

    /// If |Γ(k)| ≤ ε·C(n,k) then |Γ(ℓ)| ≤ ε·C(n,ℓ) for every ℓ.
    pub fn implication_holds(&self, epsilon: &BigRational) -> bool {
        let bound = |ell: usize| epsilon * BigRational::from_integer(BigInt::from(binom_big(self.n, ell)));
        let le = |g: u64, ell: usize| BigRational::from_integer(BigInt::from(g)) <= bound(ell);
        !le(self.top(), self.k) || self.counts.iter().all(|&(ell, g)| le(g, ell))
    }
}

/// Γ(ℓ) for a complete σ on 0..n, counted over Span(σ).
pub fn gamma_counts(
    prop: &HereditaryProperty,
    layout: &crate::types::FactLayout,
    sigma: &SyntacticDiagram,
    n: usize,
    k: usize,
    budget: &Budget,
) -> Result<GammaCounts> {
    let r = layout.m;
    if sigma.support() != (0..n).collect::<Vec<_>>() {
        return invalid("sigma must cover the whole domain");
    }
    if k < r || k > n {
        return invalid("need r ≤ k ≤ n");
    }
    for a in subsets_colex(n, r) {
        if sigma.choices(&a).is_empty() {
            return invalid(format!("sigma is not complete: no entry on {:?}", one_based(&a)));
        }
    }
    let mut counts = Vec::new();
    for ell in r..=k {
        let mut g = 0;
        for d in span_of_size(sigma, r, ell) {
            if !budget.tick() {
                return Err(budget_err("gamma count", budget));
            }
            g += match satisfy(&d, layout)? {
                None => 1,
                Some((m, _)) if ell == k => !prop.is_member(&m)? as u64,
                Some((m, _)) => in_f_ell(prop, &m) as u64,
            };
        }
        counts.push((ell, g));
    }
    Ok(GammaCounts { n, k, counts })
}
