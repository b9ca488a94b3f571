//! Distances between structures on a common domain and between templates.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use crate::budget::Budget;
use crate::combin::{binom_big, blocks, factorial, set_partitions, subsets_colex, tuples};
use crate::error::{invalid, Result};
use crate::signature::{Signature, Structure};
use crate::template::Template;
use crate::types::{merge_located, qftp_unchecked, FactLayout, LocatedType};

fn ratio(num: usize, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn same_domain(m: &Structure, n: &Structure) -> Result<()> {
    if m.sig != n.sig {
        return invalid("signature mismatch");
    }
    if m.n != n.n {
        return invalid(format!("domain sizes differ: {} vs {}", m.n, n.n));
    }
    Ok(())
}

/// diff(M,N): the r-subsets whose diagrams differ.
pub fn diff(m: &Structure, n: &Structure) -> Result<Vec<Vec<usize>>> {
    same_domain(m, n)?;
    let r = m.sig.r();
    if m.n < r {
        return invalid(format!("domain smaller than r = {r}"));
    }
    let layout = FactLayout::new(m.sig.clone(), r)?;
    Ok(subsets_colex(m.n, r)
        .into_iter()
        .filter(|a| qftp_unchecked(m, a, &layout) != qftp_unchecked(n, a, &layout))
        .collect())
}

/// dist(M,N) = |diff(M,N)| / C(n,r).
pub fn dist(m: &Structure, n: &Structure) -> Result<BigRational> {
    let d = diff(m, n)?;
    Ok(ratio(d.len(), binom_big(m.n, m.sig.r())))
}

/// A relation together with a partition of its argument places.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexEntry {
    pub rel: usize,
    /// Restricted growth string: place i belongs to block `partition[i]`.
    pub partition: Vec<usize>,
    pub collapsed_arity: usize,
}

impl IndexEntry {
    /// C_p(b): the full argument tuple obtained from a tuple of block values.
    pub fn expand(&self, b: &[usize]) -> Vec<usize> {
        self.partition.iter().map(|&k| b[k]).collect()
    }
}

/// Relations in signature order, partitions in restricted-growth order.
pub fn index(sig: &crate::signature::Signature) -> Vec<IndexEntry> {
    let mut out = Vec::new();
    for rel in 0..sig.len() {
        for p in set_partitions(sig.arity(rel)) {
            let collapsed_arity = blocks(&p);
            out.push(IndexEntry {
                rel,
                partition: p,
                collapsed_arity,
            });
        }
    }
    out
}

/// DH_p^R(M): tuples of distinct elements whose expansion lies in R.
pub fn dh(entry: &IndexEntry, m: &Structure) -> Vec<Vec<usize>> {
    tuples(m.n, entry.collapsed_arity)
        .into_iter()
        .filter(|b| {
            let mut seen = b.clone();
            seen.sort_unstable();
            seen.dedup();
            seen.len() == b.len() && m.holds(entry.rel, &entry.expand(b))
        })
        .collect()
}

/// d(M,N) = Σ |DH_p^R(M) Δ DH_p^R(N)| / n^{‖p‖}.
pub fn ac_distance(m: &Structure, n: &Structure) -> Result<BigRational> {
    same_domain(m, n)?;
    let mut total = BigRational::zero();
    for e in index(&m.sig) {
        let a = dh(&e, m);
        let b = dh(&e, n);
        let sym = a.iter().filter(|t| !b.contains(t)).count() + b.iter().filter(|t| !a.contains(t)).count();
        if sym > 0 {
            total += ratio(sym, BigUint::from(m.n).pow(e.collapsed_arity as u32));
        }
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundCheck {
    pub dist: BigRational,
    pub d: BigRational,
    pub rhs: BigRational,
    pub holds: bool,
}

/// dist(M,N) ≤ (r!)² 2^r d(M,N).
pub fn distance_bound(m: &Structure, n: &Structure) -> Result<BoundCheck> {
    let r = m.sig.r();
    let dist = dist(m, n)?;
    let d = ac_distance(m, n)?;
    let f = factorial(r);
    let c = BigInt::from(&f * &f * (BigUint::one() << r));
    let rhs = &d * BigRational::from_integer(c);
    let holds = dist <= rhs;
    Ok(BoundCheck { dist, d, rhs, holds })
}

fn same_template_domain(a: &Template, b: &Template) -> Result<()> {
    if a.pool.prop != b.pool.prop {
        return invalid("templates are over different properties");
    }
    if a.n != b.n {
        return invalid("templates have different sizes");
    }
    Ok(())
}

/// The r-subsets where the two choice sets differ.
pub fn template_diff(a: &Template, b: &Template) -> Result<Vec<Vec<usize>>> {
    same_template_domain(a, b)?;
    Ok(a.subsets()
        .into_iter()
        .zip(a.choices.iter().zip(&b.choices))
        .filter(|(_, (x, y))| x != y)
        .map(|(s, _)| s)
        .collect())
}

pub fn template_dist(a: &Template, b: &Template) -> Result<BigRational> {
    let d = template_diff(a, b)?;
    Ok(ratio(d.len(), binom_big(a.n, a.r())))
}

/// Is G a full subpattern of C (every diagram of G is an available choice)?
pub fn is_full_subpattern(g: &Structure, c: &Template) -> Result<bool> {
    if g.n != c.n || *g.sig != *c.pool.prop.sig {
        return invalid("structure and template do not share a domain");
    }
    let layout = &c.pool.layout;
    Ok(c.subsets()
        .iter()
        .all(|a| c.ch(a).contains(&qftp_unchecked(g, a, layout))))
}

/// Given G ⊴ C and an H-random D, build G' ⊴ D keeping G's diagrams off
/// template_diff(C,D) and taking the least available choice on it.
pub fn transfer_subpattern(c: &Template, g: &Structure, d: &Template, budget: &Budget) -> Result<Structure> {
    same_template_domain(c, d)?;
    if !is_full_subpattern(g, c)? {
        return invalid("structure is not a full subpattern of the source template");
    }
    if !d.is_h_random(budget)? {
        return invalid("target template is not H-random");
    }
    let layout = &d.pool.layout;
    let changed = template_diff(c, d)?;
    let located: Vec<LocatedType> = d
        .subsets()
        .into_iter()
        .map(|a| {
            let ty = if changed.contains(&a) {
                d.ch(&a)[0]
            } else {
                qftp_unchecked(g, &a, layout)
            };
            LocatedType { support: a, ty }
        })
        .collect();
    let out = merge_located(&located, d.n, layout)
        .ok_or_else(|| crate::error::LabError::Verification("transfer merge failed on an H-random template".into()))?;
    if !d.pool.prop.is_member(&out)? {
        return Err(crate::error::LabError::Verification(
            "transferred structure left the property".into(),
        ));
    }
    Ok(out)
}

/// The closest full subpattern of T to G: keep G's diagram wherever T allows
/// it. Returns the number of r-subsets that had to change.
pub fn nearest_subpattern(g: &Structure, t: &Template) -> Result<(Structure, usize)> {
    if g.n != t.n || *g.sig != *t.pool.prop.sig {
        return invalid("structure and template do not share a domain");
    }
    if !t.is_error_free()? {
        return invalid("template has errors");
    }
    let layout = &t.pool.layout;
    let mut changed = 0;
    let located: Vec<LocatedType> = t
        .subsets()
        .into_iter()
        .map(|a| {
            let own = qftp_unchecked(g, &a, layout);
            let ty = if t.ch(&a).contains(&own) {
                own
            } else {
                changed += 1;
                t.ch(&a)[0]
            };
            LocatedType { support: a, ty }
        })
        .collect();
    let out = merge_located(&located, t.n, layout)
        .ok_or_else(|| crate::error::LabError::Verification("merge failed on an error-free template".into()))?;
    Ok((out, changed))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosenessReport {
    pub sub: BigUint,
    pub sub_prime: BigUint,
    pub diff: usize,
    pub rhs: BigUint,
    pub holds: bool,
}

/// sub(C) ≤ sub(C')·|S_r(H)|^{|diff(C,C')|} for error-free C'.
pub fn closeness_inequality(c: &Template, c_prime: &Template, budget: &Budget) -> Result<ClosenessReport> {
    if !c_prime.is_error_free()? {
        return invalid("second template must be error-free");
    }
    let diff = template_diff(c, c_prime)?.len();
    let sub = c.sub_count(budget)?.count;
    let sub_prime = c_prime.choice_count();
    let rhs = &sub_prime * BigUint::from(c.pool.len()).pow(diff as u32);
    let holds = sub <= rhs;
    Ok(ClosenessReport {
        sub,
        sub_prime,
        diff,
        rhs,
        holds,
    })
}

/// A uniformly random structure on `0..n`: every atomic fact is a fair coin.
pub fn random_structure(sig: &Arc<Signature>, n: usize, rng: &mut impl Rng) -> Structure {
    let mut m = Structure::empty(sig.clone(), n);
    for rel in 0..sig.len() {
        for t in tuples(n, sig.arity(rel)) {
            if rng.gen::<bool>() {
                m.set(rel, &t, true);
            }
        }
    }
    m
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampledBound {
    pub checked: usize,
    pub violations: usize,
}

/// dist ≤ (r!)²2^r·d on `samples` seeded random pairs on `0..n`.
pub fn sampled_bound_check(sig: &Arc<Signature>, n: usize, samples: usize, seed: u64) -> Result<SampledBound> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = 0;
    for _ in 0..samples {
        let a = random_structure(sig, n, &mut rng);
        let b = random_structure(sig, n, &mut rng);
        if !distance_bound(&a, &b)?.holds {
            violations += 1;
        }
    }
    Ok(SampledBound {
        checked: samples,
        violations,
    })
}
