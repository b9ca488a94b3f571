//! Exact maximization of sub(T) over H-random templates, density sequences
//! and finite stability probes.
//!
//! Templates are built by depth-first assignment of choice sets to r-subsets
//! in colex order. A window B (a set of a forbidden size larger than r) is
//! complete once its largest r-subset is assigned, and is then tested for a
//! choosable forbidden copy. Choice sets are bitmasks over the pool.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::budget::Budget;
use crate::combin::{binom, ceil_root, colex_rank, permutations, subsets_colex};
use crate::distance::{nearest_subpattern, template_dist};
use crate::error::{invalid, LabError, Result};
use crate::signature::Structure;
use crate::template::{Template, TypePool};
use crate::types::QfType;

/// Largest pool the bitmask search accepts.
pub const MAX_POOL: usize = 16;

pub const DEFAULT_CAP: usize = 10_000;

pub type CandidateFilter = Arc<dyn Fn(&[QfType]) -> bool + Send + Sync>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Goal {
    /// All templates attaining the maximum, up to `cap`.
    Maximize { cap: usize },
    /// All templates with sub ≥ threshold, up to `cap`.
    AtLeast { threshold: BigUint, cap: usize },
}

#[derive(Clone)]
pub struct SearchOptions {
    pub goal: Goal,
    pub workers: usize,
    /// Only choice sets accepted by the filter are tried.
    pub filter: Option<CandidateFilter>,
}

impl SearchOptions {
    pub fn maximize() -> Self {
        SearchOptions {
            goal: Goal::Maximize { cap: DEFAULT_CAP },
            workers: 1,
            filter: None,
        }
    }

    pub fn workers(mut self, w: usize) -> Self {
        self.workers = w.max(1);
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub nodes: u64,
    pub pruned: u64,
    pub windows_checked: u64,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Largest sub found (0 when no H-random template exists).
    pub best: BigUint,
    pub templates: Vec<Template>,
    pub truncated: bool,
    /// False when the budget ran out.
    pub exact: bool,
    pub stats: SearchStats,
}

/// Window test data for one forbidden entry: each profile is a permutation
/// class giving, per local r-subset, the pool types compatible with the entry.
struct Matcher {
    profiles: Vec<Vec<u32>>,
}

fn build_matcher(pool: &TypePool, entry: usize) -> Matcher {
    let prop = &pool.prop;
    let s = prop.forbidden[entry].size();
    let r = pool.r();
    let local = subsets_colex(s, r);
    let lits = prop.literals(entry);
    let full: u32 = (1u32 << pool.len()) - 1;
    let mut profiles: Vec<Vec<u32>> = Vec::new();
    for perm in permutations(s) {
        let mut masks = vec![full; local.len()];
        for lit in &lits {
            let img: Vec<usize> = lit.tuple.iter().map(|&v| perm[v]).collect();
            let j = local
                .iter()
                .position(|jset| img.iter().all(|x| jset.contains(x)))
                .expect("every literal fits in some r-subset");
            let vars: Vec<usize> = img
                .iter()
                .map(|x| local[j].iter().position(|y| y == x).unwrap())
                .collect();
            let mut ok = 0u32;
            for (i, p) in pool.types.iter().enumerate() {
                if p.holds(&pool.layout, lit.rel, &vars) == lit.value {
                    ok |= 1 << i;
                }
            }
            masks[j] &= ok;
        }
        if masks.iter().all(|&m| m != 0) && !profiles.contains(&masks) {
            profiles.push(masks);
        }
    }
    Matcher { profiles }
}

struct Window {
    /// Global subset indices of the window's r-subsets in local colex order.
    parts: Vec<usize>,
    matchers: Vec<usize>,
}

struct Plan {
    nsubs: usize,
    cands: Vec<u32>,
    maxsize: u64,
    /// Windows completed by assigning subset k.
    completes: Vec<Vec<usize>>,
    windows: Vec<Window>,
    matchers: Vec<Matcher>,
    /// Earlier overlapping subsets, only filled when the pool can clash.
    overlaps: Vec<Vec<usize>>,
    subsets: Vec<Vec<usize>>,
}

fn plan(pool: &TypePool, n: usize, filter: Option<&CandidateFilter>) -> Result<Plan> {
    let r = pool.r();
    if n < r {
        return invalid(format!("n must be at least r = {r}"));
    }
    if pool.len() > MAX_POOL {
        return invalid(format!(
            "search supports at most {MAX_POOL} realized types, got {}",
            pool.len()
        ));
    }
    let subsets = subsets_colex(n, r);
    let nsubs = subsets.len();
    let mut cands: Vec<u32> = (1u32..(1u32 << pool.len()))
        .filter(|&m| {
            let types: Vec<QfType> = (0..pool.len())
                .filter(|&i| m >> i & 1 == 1)
                .map(|i| pool.types[i])
                .collect();
            filter.is_none_or(|f| f(&types))
        })
        .collect();
    let ids = |m: u32| -> Vec<usize> { (0..pool.len()).filter(|&i| m >> i & 1 == 1).collect() };
    cands.sort_by(|&a, &b| b.count_ones().cmp(&a.count_ones()).then_with(|| ids(a).cmp(&ids(b))));
    let maxsize = cands.iter().map(|m| m.count_ones() as u64).max().unwrap_or(0);
    if maxsize > 1 && (maxsize as f64).log2() * nsubs as f64 >= 63.0 {
        return invalid(format!(
            "{maxsize}^{nsubs} exceeds the 64-bit product range of the search"
        ));
    }

    let prop = &pool.prop;
    let mut matchers = Vec::new();
    let mut by_size: HashMap<usize, Vec<usize>> = HashMap::new();
    for (i, e) in prop.forbidden.iter().enumerate() {
        if e.size() > r && e.size() <= n {
            by_size.entry(e.size()).or_default().push(matchers.len());
            matchers.push(build_matcher(pool, i));
        }
    }
    let mut windows = Vec::new();
    let mut completes = vec![Vec::new(); nsubs];
    let mut sizes: Vec<usize> = by_size.keys().copied().collect();
    sizes.sort_unstable();
    for s in sizes {
        for w in subsets_colex(n, s) {
            let parts: Vec<usize> = subsets_colex(s, r)
                .into_iter()
                .map(|idx| colex_rank(&idx.iter().map(|&i| w[i]).collect::<Vec<_>>()))
                .collect();
            let last = *parts.iter().max().expect("window has r-subsets");
            completes[last].push(windows.len());
            windows.push(Window {
                parts,
                matchers: by_size[&s].clone(),
            });
        }
    }
    let overlaps = if pool.uniform_lower() {
        vec![Vec::new(); nsubs]
    } else {
        (0..nsubs)
            .map(|k| {
                (0..k)
                    .filter(|&x| subsets[x].iter().any(|e| subsets[k].contains(e)))
                    .collect()
            })
            .collect()
    };
    Ok(Plan {
        nsubs,
        cands,
        maxsize,
        completes,
        windows,
        matchers,
        overlaps,
        subsets,
    })
}

struct Shared<'a> {
    plan: &'a Plan,
    pool: &'a TypePool,
    goal: &'a Goal,
    budget: &'a Budget,
    incumbent: AtomicU64,
    stop: AtomicBool,
}

#[derive(Default)]
struct Branch {
    best: u64,
    found: Vec<Vec<u32>>,
    truncated: bool,
    stats: SearchStats,
}

struct Worker<'a, 'b> {
    sh: &'b Shared<'a>,
    masks: Vec<u32>,
    memo: HashMap<Vec<u32>, bool>,
    out: Branch,
}

impl Worker<'_, '_> {
    fn pow_bound(&self, product: u64, remaining: usize) -> u128 {
        let mut b = product as u128;
        for _ in 0..remaining {
            b = b.saturating_mul(self.sh.plan.maxsize as u128);
        }
        b
    }

    fn floor(&self) -> u128 {
        match self.sh.goal {
            Goal::Maximize { .. } => self.sh.incumbent.load(Ordering::Relaxed).max(self.out.best) as u128,
            Goal::AtLeast { threshold, .. } => threshold.to_u128().unwrap_or(u128::MAX),
        }
    }

    fn window_bad(&mut self, w: usize) -> bool {
        let win = &self.sh.plan.windows[w];
        let key: Vec<u32> = win.parts.iter().map(|&g| self.masks[g]).collect();
        if let Some(&v) = self.memo.get(&key) {
            return v;
        }
        self.out.stats.windows_checked += 1;
        let bad = win.matchers.iter().any(|&mi| {
            self.sh.plan.matchers[mi]
                .profiles
                .iter()
                .any(|prof| prof.iter().zip(&key).all(|(p, k)| p & k != 0))
        });
        self.memo.insert(key, bad);
        bad
    }

    fn compatible(&self, k: usize, m: u32) -> bool {
        let plan = self.sh.plan;
        plan.overlaps[k].iter().all(|&x| {
            let mx = self.masks[x];
            (0..self.sh.pool.len()).filter(|&i| m >> i & 1 == 1).all(|i| {
                (0..self.sh.pool.len())
                    .filter(|&j| mx >> j & 1 == 1)
                    .all(|j| self.sh.pool.compatible_idx(j, &plan.subsets[x], i, &plan.subsets[k]))
            })
        })
    }

    /// Try candidate `m` at subset k; returns false if it is rejected.
    fn place(&mut self, k: usize, m: u32) -> bool {
        if !self.compatible(k, m) {
            return false;
        }
        self.masks[k] = m;
        let plan = self.sh.plan;
        for &w in &plan.completes[k] {
            if self.window_bad(w) {
                return false;
            }
        }
        true
    }

    fn dfs(&mut self, k: usize, product: u64) {
        if self.sh.stop.load(Ordering::Relaxed) {
            return;
        }
        if !self.sh.budget.tick() {
            self.sh.stop.store(true, Ordering::Relaxed);
            return;
        }
        self.out.stats.nodes += 1;
        let plan = self.sh.plan;
        if k == plan.nsubs {
            self.leaf(product);
            return;
        }
        if self.pow_bound(product, plan.nsubs - k) < self.floor() {
            self.out.stats.pruned += 1;
            return;
        }
        for ci in 0..plan.cands.len() {
            let m = plan.cands[ci];
            let next = product * m.count_ones() as u64;
            if self.pow_bound(next, plan.nsubs - k - 1) < self.floor() {
                self.out.stats.pruned += 1;
                continue;
            }
            if self.place(k, m) {
                self.dfs(k + 1, next);
            }
        }
        self.masks[k] = 0;
    }

    fn leaf(&mut self, product: u64) {
        match self.sh.goal {
            Goal::Maximize { cap } => {
                if product > self.out.best {
                    self.out.best = product;
                    self.out.found.clear();
                    self.out.truncated = false;
                    self.sh.incumbent.fetch_max(product, Ordering::Relaxed);
                }
                if product == self.out.best {
                    if self.out.found.len() < *cap {
                        self.out.found.push(self.masks.clone());
                    } else {
                        self.out.truncated = true;
                    }
                }
            }
            Goal::AtLeast { cap, .. } => {
                self.out.best = self.out.best.max(product);
                if self.out.found.len() < *cap {
                    self.out.found.push(self.masks.clone());
                } else {
                    self.out.truncated = true;
                }
            }
        }
    }
}

fn masks_to_template(pool: &Arc<TypePool>, n: usize, masks: &[u32]) -> Result<Template> {
    let choices = masks
        .iter()
        .map(|&m| {
            (0..pool.len())
                .filter(|&i| m >> i & 1 == 1)
                .map(|i| pool.types[i])
                .collect()
        })
        .collect();
    Template::new(pool.clone(), n, choices)
}

/// Exhaustive branch-and-bound over H-random templates on `0..n`.
pub fn search(pool: &Arc<TypePool>, n: usize, opts: &SearchOptions, budget: &Budget) -> Result<SearchOutcome> {
    let plan = plan(pool, n, opts.filter.as_ref())?;
    if let Goal::AtLeast { threshold, .. } = &opts.goal {
        if threshold.to_u64().is_none() {
            return invalid("threshold exceeds the 64-bit search range");
        }
    }
    let sh = Shared {
        plan: &plan,
        pool,
        goal: &opts.goal,
        budget,
        incumbent: AtomicU64::new(0),
        stop: AtomicBool::new(false),
    };
    // roots: the first one or two subsets' choice sets
    let depth = plan.nsubs.min(2);
    let mut roots: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..depth {
        roots = roots
            .into_iter()
            .flat_map(|pre| {
                plan.cands.iter().map(move |&c| {
                    let mut v = pre.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    let results: Mutex<Vec<Option<Branch>>> = Mutex::new((0..roots.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let run = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        if i >= roots.len() {
            break;
        }
        let mut w = Worker {
            sh: &sh,
            masks: vec![0; plan.nsubs],
            memo: HashMap::new(),
            out: Branch::default(),
        };
        let mut ok = true;
        let mut product = 1u64;
        for (k, &m) in roots[i].iter().enumerate() {
            product *= m.count_ones() as u64;
            if !w.place(k, m) {
                ok = false;
                break;
            }
        }
        if ok && w.pow_bound(product, plan.nsubs - roots[i].len()) >= w.floor() {
            w.dfs(roots[i].len(), product);
        }
        results.lock().expect("results lock")[i] = Some(w.out);
    };
    let workers = opts.workers.max(1).min(roots.len().max(1));
    if workers == 1 {
        run();
    } else {
        std::thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(run);
            }
        });
    }
    let branches: Vec<Branch> = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .flatten()
        .collect();
    let mut stats = SearchStats::default();
    let mut best = 0u64;
    for b in &branches {
        stats.nodes += b.stats.nodes;
        stats.pruned += b.stats.pruned;
        stats.windows_checked += b.stats.windows_checked;
        best = best.max(b.best);
    }
    let cap = match &opts.goal {
        Goal::Maximize { cap } | Goal::AtLeast { cap, .. } => *cap,
    };
    let mut truncated = false;
    let mut found: Vec<Vec<u32>> = Vec::new();
    for b in branches {
        let keep = match &opts.goal {
            Goal::Maximize { .. } => b.best == best,
            Goal::AtLeast { .. } => true,
        };
        if !keep || b.found.is_empty() {
            continue;
        }
        truncated |= b.truncated;
        for m in b.found {
            if found.len() < cap {
                found.push(m);
            } else {
                truncated = true;
            }
        }
    }
    let mut templates = found
        .iter()
        .map(|m| masks_to_template(pool, n, m))
        .collect::<Result<Vec<_>>>()?;
    templates.sort_by(|a, b| a.choices.cmp(&b.choices));
    Ok(SearchOutcome {
        best: BigUint::from(best),
        templates,
        truncated,
        exact: !sh.stop.load(Ordering::Relaxed),
        stats,
    })
}

/// Prune-free reference: every candidate template, tested through the template API.
pub fn search_oracle(pool: &Arc<TypePool>, n: usize, budget: &Budget) -> Result<(BigUint, Vec<Template>)> {
    let r = pool.r();
    let nsubs = binom(n, r) as usize;
    let sets: Vec<Vec<QfType>> = (1u32..(1u32 << pool.len()))
        .map(|m| {
            (0..pool.len())
                .filter(|&i| m >> i & 1 == 1)
                .map(|i| pool.types[i])
                .collect()
        })
        .collect();
    let mut pick = vec![0usize; nsubs];
    let mut best = BigUint::zero();
    let mut all = Vec::new();
    loop {
        if !budget.tick() {
            return Err(LabError::BudgetExhausted("oracle search".into()));
        }
        let t = Template::new(pool.clone(), n, pick.iter().map(|&i| sets[i].clone()).collect())?;
        if t.is_h_random(budget)? {
            let s = t.sub_count(budget)?.count;
            if s > best {
                best = s;
                all.clear();
                all.push(t);
            } else if s == best {
                all.push(t);
            }
        }
        if !crate::template::odometer(&mut pick, |_| sets.len()) {
            break;
        }
    }
    all.sort_by(|a, b| a.choices.cmp(&b.choices));
    Ok((best, all))
}

#[derive(Clone, Debug)]
pub struct ExtremalReport {
    pub n: usize,
    pub r: usize,
    pub ex: BigUint,
    pub extremal_templates: Vec<Template>,
    pub truncated: bool,
    pub exact: bool,
    pub stats: SearchStats,
}

impl ExtremalReport {
    /// C(n, r).
    pub fn exponent(&self) -> u64 {
        binom(self.n, self.r)
    }

    /// b_n = ex^{1/C(n,r)} as a float.
    pub fn b_n(&self) -> f64 {
        if self.ex.is_zero() {
            return 0.0;
        }
        (big_ln(&self.ex) / self.exponent() as f64).exp()
    }
}

/// Natural log of a big integer without overflow.
pub fn big_ln(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    let top = (x >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn search_extremal(
    pool: &Arc<TypePool>,
    n: usize,
    cap: usize,
    workers: usize,
    budget: &Budget,
) -> Result<ExtremalReport> {
    let opts = SearchOptions {
        goal: Goal::Maximize { cap },
        workers,
        filter: None,
    };
    search_extremal_with(pool, n, &opts, budget)
}

pub fn search_extremal_with(
    pool: &Arc<TypePool>,
    n: usize,
    opts: &SearchOptions,
    budget: &Budget,
) -> Result<ExtremalReport> {
    let out = search(pool, n, opts, budget)?;
    Ok(ExtremalReport {
        n,
        r: pool.r(),
        ex: out.best,
        extremal_templates: out.templates,
        truncated: out.truncated,
        exact: out.exact,
        stats: out.stats,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityPoint {
    pub n: usize,
    #[serde(serialize_with = "crate::json::ser_big")]
    pub ex: BigUint,
    pub exponent: u64,
    pub b_n: f64,
    pub exact: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensitySequence {
    pub points: Vec<DensityPoint>,
    /// b_{n+1} ≤ b_n at every computed step, compared exactly.
    pub non_increasing: bool,
    /// b_n ≥ 1 at every computed n (fails only when some H_n is empty).
    pub at_least_one: bool,
    /// b at the largest computed n, an upper estimate for the limit.
    pub pi_upper: f64,
}

/// b_{n+1} ≤ b_n ⟺ ex_{n+1}^{C(n,r)} ≤ ex_n^{C(n+1,r)}.
pub fn density_le(ex_next: &BigUint, e_next: u64, ex: &BigUint, e: u64) -> bool {
    ex_next.pow(e as u32) <= ex.pow(e_next as u32)
}

pub fn density_sequence(
    pool: &Arc<TypePool>,
    n_max: usize,
    workers: usize,
    budget: &Budget,
) -> Result<DensitySequence> {
    let r = pool.r();
    if n_max < r {
        return invalid(format!("n_max must be at least r = {r}"));
    }
    let mut points = Vec::new();
    for n in r..=n_max {
        let rep = search_extremal(pool, n, 1, workers, budget)?;
        if !rep.exact {
            return Err(LabError::BudgetExhausted(format!("search at n = {n} did not finish")));
        }
        points.push(DensityPoint {
            n,
            b_n: rep.b_n(),
            exponent: rep.exponent(),
            ex: rep.ex,
            exact: rep.exact,
        });
    }
    Ok(summarize_density(points))
}

pub fn summarize_density(points: Vec<DensityPoint>) -> DensitySequence {
    let non_increasing = points
        .windows(2)
        .all(|w| density_le(&w[1].ex, w[1].exponent, &w[0].ex, w[0].exponent));
    let at_least_one = points.iter().all(|p| p.ex >= BigUint::from(1u32));
    let pi_upper = points.last().map_or(0.0, |p| p.b_n);
    DensitySequence {
        points,
        non_increasing,
        at_least_one,
        pi_upper,
    }
}

/// Least t with t ≥ ex^{1-ε} for ε = num/den, i.e. t^den ≥ ex^{den-num}.
pub fn near_threshold(ex: &BigUint, eps_num: &BigUint, eps_den: &BigUint) -> Result<BigUint> {
    if eps_den.is_zero() || eps_num > eps_den {
        return invalid("epsilon must lie in [0, 1]");
    }
    let den = eps_den
        .to_u32()
        .ok_or_else(|| LabError::InvalidArgument("epsilon denominator too large".into()))?;
    let keep = (eps_den - eps_num).to_u32().expect("fits");
    Ok(ceil_root(&ex.pow(keep), den))
}

/// sub ≥ ex^{1-ε}, exactly.
pub fn is_near(sub: &BigUint, ex: &BigUint, eps_num: &BigUint, eps_den: &BigUint) -> bool {
    let den = eps_den.to_u32().unwrap_or(u32::MAX);
    let keep = (eps_den - eps_num).to_u32().unwrap_or(0);
    sub.pow(den) >= ex.pow(keep)
}

/// Templates with sub ≥ ex^{1-ε}.
pub fn near_extremal_set(
    pool: &Arc<TypePool>,
    n: usize,
    ex: &BigUint,
    eps: (&BigUint, &BigUint),
    cap: usize,
    workers: usize,
    budget: &Budget,
) -> Result<SearchOutcome> {
    let threshold = near_threshold(ex, eps.0, eps.1)?.max(BigUint::from(1u32));
    let opts = SearchOptions {
        goal: Goal::AtLeast { threshold, cap },
        workers,
        filter: None,
    };
    search(pool, n, &opts, budget)
}

#[derive(Clone, Debug)]
pub struct NearExtremal {
    pub template: Template,
    pub sub: BigUint,
    pub min_dist: BigRational,
}

#[derive(Clone, Debug)]
pub struct StabilityProbe {
    pub n: usize,
    pub epsilon: (BigUint, BigUint),
    pub ex: BigUint,
    pub threshold: BigUint,
    pub near_extremal: Vec<NearExtremal>,
    pub worst_gap: BigRational,
    pub exact: bool,
    pub truncated: bool,
}

pub fn stability_probe(
    pool: &Arc<TypePool>,
    n: usize,
    eps: (&BigUint, &BigUint),
    cap: usize,
    workers: usize,
    budget: &Budget,
) -> Result<StabilityProbe> {
    let ext = search_extremal(pool, n, cap, workers, budget)?;
    let near = near_extremal_set(pool, n, &ext.ex, eps, cap, workers, budget)?;
    let mut list = Vec::new();
    let mut worst = BigRational::zero();
    for t in near.templates {
        let sub = t.choice_count();
        let mut min: Option<BigRational> = None;
        for e in &ext.extremal_templates {
            let d = template_dist(&t, e)?;
            if min.as_ref().is_none_or(|m| d < *m) {
                min = Some(d);
            }
        }
        let min_dist = min.unwrap_or_else(BigRational::zero);
        if min_dist > worst {
            worst = min_dist.clone();
        }
        list.push(NearExtremal {
            template: t,
            sub,
            min_dist,
        });
    }
    Ok(StabilityProbe {
        n,
        epsilon: (eps.0.clone(), eps.1.clone()),
        threshold: near_threshold(&ext.ex, eps.0, eps.1)?,
        ex: ext.ex,
        near_extremal: list,
        worst_gap: worst,
        exact: ext.exact && near.exact,
        truncated: ext.truncated || near.truncated,
    })
}

/// G ∈ E(…): G is a full subpattern of one of the listed templates.
pub fn in_e_set(g: &Structure, templates: &[Template]) -> Result<bool> {
    for t in templates {
        if crate::distance::is_full_subpattern(g, t)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// G ∈ E^δ(…): some full subpattern of a listed template is within dist δ of G.
/// Returns the closest distance found alongside the answer.
pub fn in_e_delta_set(
    g: &Structure,
    templates: &[Template],
    delta: &BigRational,
) -> Result<(bool, Option<BigRational>)> {
    let mut best: Option<BigRational> = None;
    for t in templates {
        let (_, changed) = nearest_subpattern(g, t)?;
        let d = BigRational::new(changed.into(), crate::combin::binom_big(t.n, t.r()).into());
        if best.as_ref().is_none_or(|b| d < *b) {
            best = Some(d);
        }
    }
    Ok((best.as_ref().is_some_and(|b| b <= delta), best))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
    use crate::signature::Signature;

    fn tournament_pool() -> Arc<TypePool> {
        // digraphs without loops or transitive triangles
        let sig = Arc::new(Signature::new(vec![("E", 2)]).unwrap());
        let lp = Structure::from_tuples(sig.clone(), 1, &[vec![vec![0, 0]]]).unwrap();
        let t3 = Structure::from_tuples(sig.clone(), 3, &[vec![vec![0, 1], vec![0, 2], vec![1, 2]]]).unwrap();
        let prop = HereditaryProperty::new(
            sig,
            Mode::NonInduced,
            vec![ForbiddenEntry::non_induced(lp), ForbiddenEntry::non_induced(t3)],
        )
        .unwrap();
        TypePool::new(Arc::new(prop), &Budget::unlimited()).unwrap()
    }

    #[test]
    fn search_matches_oracle_at_three() {
        let pool = tournament_pool();
        let (best, all) = search_oracle(&pool, 3, &Budget::unlimited()).unwrap();
        for w in [1, 3] {
            let rep = search_extremal(&pool, 3, 1000, w, &Budget::unlimited()).unwrap();
            assert!(rep.exact);
            assert_eq!(rep.ex, best);
            assert_eq!(rep.extremal_templates, all);
        }
    }

    #[test]
    fn threshold_search_lists_everything_above() {
        let pool = tournament_pool();
        let opts = SearchOptions {
            goal: Goal::AtLeast {
                threshold: BigUint::from(1u32),
                cap: 100_000,
            },
            workers: 2,
            filter: None,
        };
        let out = search(&pool, 3, &opts, &Budget::unlimited()).unwrap();
        let mut count = 0;
        let sets: Vec<Vec<QfType>> = (1u32..16)
            .map(|m| (0..4).filter(|&i| m >> i & 1 == 1).map(|i| pool.types[i]).collect())
            .collect();
        for a in &sets {
            for b in &sets {
                for c in &sets {
                    let t = Template::new(pool.clone(), 3, vec![a.clone(), b.clone(), c.clone()]).unwrap();
                    if t.is_h_random_oracle(&Budget::unlimited()).unwrap() {
                        count += 1;
                        assert!(out.templates.contains(&t));
                    }
                }
            }
        }
        assert_eq!(out.templates.len(), count);
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let pool = tournament_pool();
        let rep = search_extremal(&pool, 4, 10, 1, &Budget::new(50, None)).unwrap();
        assert!(!rep.exact);
    }

    #[test]
    fn near_thresholds() {
        let ex = BigUint::from(144u32);
        let t = near_threshold(&ex, &BigUint::from(17u32), &BigUint::from(100u32)).unwrap();
        assert_eq!(t, BigUint::from(62u32));
        assert!(is_near(
            &BigUint::from(64u32),
            &ex,
            &BigUint::from(17u32),
            &BigUint::from(100u32)
        ));
        assert!(!is_near(
            &BigUint::from(64u32),
            &ex,
            &BigUint::from(16u32),
            &BigUint::from(100u32)
        ));
        let t0 = near_threshold(&ex, &BigUint::zero(), &BigUint::from(1u32)).unwrap();
        assert_eq!(t0, ex);
        let t = near_threshold(&BigUint::from(729u32), &BigUint::from(5u32), &BigUint::from(100u32)).unwrap();
        assert_eq!(t, BigUint::from(525u32));
    }

    #[test]
    fn big_logs() {
        let x = BigUint::from(3u32).pow(2000);
        assert!((big_ln(&x) - 2000.0 * 3f64.ln()).abs() < 1e-6);
    }
}
