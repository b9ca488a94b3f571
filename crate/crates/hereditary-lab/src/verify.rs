//! Oracle-versus-search comparison for the built-in instance families.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;

use crate::budget::Budget;
use crate::error::{invalid, Result};
use crate::extremal::{search_extremal_with, Goal, SearchOptions, DEFAULT_CAP};
use crate::instances::colored::{colored_instance, ColoredSpec};
use crate::instances::{digraph, metric, triples, Instance, SetGraph};
use crate::json::ser_big;
use crate::signature::Structure;

#[derive(Clone, Debug)]
pub enum Family {
    Metric { r: usize },
    Digraph { k: usize },
    Oriented { k: usize },
    Triples,
    Colored(ColoredSpec),
}

impl Family {
    pub fn instance(&self) -> Result<Instance> {
        match self {
            Family::Metric { r } => metric::instance(*r),
            Family::Digraph { k } => digraph::instance(*k),
            Family::Oriented { k } => digraph::oriented_instance(*k),
            Family::Triples => triples::instance(),
            Family::Colored(spec) => Ok(colored_instance(spec)?.instance),
        }
    }

    /// Smallest n compared.
    pub fn n_min(&self) -> usize {
        match self {
            Family::Metric { .. } | Family::Triples => 3,
            Family::Digraph { k } | Family::Oriented { k } => (*k).max(2),
            Family::Colored(spec) => spec.k,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyRow {
    pub n: usize,
    #[serde(serialize_with = "ser_big")]
    pub search_ex: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub oracle_ex: BigUint,
    /// The closed form quoted for the family, where it differs from the oracle path.
    #[serde(serialize_with = "ser_big")]
    pub closed_form: BigUint,
    pub maximizers: usize,
    /// Search restricted to downward-closed templates.
    pub reduced: bool,
    pub exact: bool,
    pub truncated: bool,
    pub ex_agrees: bool,
    pub family_agrees: bool,
    pub closed_form_agrees: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub instance: String,
    pub rows: Vec<VerifyRow>,
    /// Search equals the oracle and the maximizer family matches at every n.
    pub passed: bool,
    pub exact: bool,
}

fn structure_set(gs: impl IntoIterator<Item = Structure>) -> BTreeSet<Vec<Vec<bool>>> {
    gs.into_iter().map(|g| g.tables().to_vec()).collect()
}

fn set_graph_set(gs: impl IntoIterator<Item = SetGraph>) -> BTreeSet<SetGraph> {
    gs.into_iter().collect()
}

fn triples_mask(g: &Structure) -> u64 {
    crate::combin::subsets_colex(g.n, 3)
        .iter()
        .enumerate()
        .filter(|(_, a)| g.holds(0, a))
        .fold(0, |m, (i, _)| m | 1 << i)
}

/// Compare the generic search with the family's oracle for n_min..=n_max.
pub fn verify(family: &Family, n_max: usize, workers: usize, budget: &Budget) -> Result<VerifyReport> {
    let inst = family.instance()?;
    let pool = &inst.pool;
    if n_max < family.n_min() {
        return invalid(format!("nmax must be at least {}", family.n_min()));
    }
    let colored = match family {
        Family::Colored(spec) => Some(colored_instance(spec)?),
        _ => None,
    };
    let mut rows = Vec::new();
    for n in family.n_min()..=n_max {
        let reduced = matches!(family, Family::Digraph { .. }) && n >= 4;
        let mut opts = SearchOptions {
            goal: Goal::Maximize { cap: DEFAULT_CAP },
            workers,
            filter: None,
        };
        if reduced {
            opts.filter = Some(digraph::downward_filter(pool));
        }
        let rep = search_extremal_with(pool, n, &opts, budget)?;
        let ts = &rep.extremal_templates;
        let (oracle_ex, closed_form, family_agrees) = match family {
            Family::Metric { r } => {
                let want = set_graph_set(metric::extremal_family(*r, n));
                let got = set_graph_set(ts.iter().map(metric::psi));
                (metric::oracle_ex(*r, n), metric::oracle_ex(*r, n), got == want)
            }
            Family::Digraph { k } => {
                let got = structure_set(ts.iter().map(digraph::psi));
                let t = crate::instances::turan_edges(n, *k) as u32;
                (
                    digraph::oracle_ex(*k, n),
                    BigUint::from(3u32).pow(t),
                    got == structure_set(digraph::dt(*k, n)),
                )
            }
            Family::Oriented { k } => {
                let got = structure_set(ts.iter().map(digraph::psi));
                (
                    digraph::oracle_ex_oriented(*k, n),
                    digraph::oracle_ex_oriented(*k, n),
                    got == structure_set(digraph::dt(*k, n)),
                )
            }
            Family::Triples => {
                let best = triples::max_triangle_free_edges(n)?;
                let ok = ts.iter().map(triples::psi).all(|g| {
                    let m = triples_mask(&g);
                    !triples::contains_triangle(n, m) && m.count_ones() == best
                });
                (triples::oracle_ex(n)?, triples::closed_form_ex(n), ok)
            }
            Family::Colored(_) => {
                let c = colored.as_ref().expect("colored instance");
                let (best, maximizers) = c.max_product(n)?;
                let got = set_graph_set(ts.iter().map(|t| c.psi(t)));
                (best.clone(), best, got == set_graph_set(maximizers))
            }
        };
        let family_agrees = family_agrees && !rep.truncated;
        rows.push(VerifyRow {
            n,
            ex_agrees: rep.ex == oracle_ex,
            closed_form_agrees: rep.ex == closed_form,
            search_ex: rep.ex,
            oracle_ex,
            closed_form,
            maximizers: ts.len(),
            reduced,
            exact: rep.exact,
            truncated: rep.truncated,
            family_agrees,
        });
    }
    let exact = rows.iter().all(|r| r.exact);
    let passed = rows.iter().all(|r| r.ex_agrees && r.family_agrees);
    Ok(VerifyReport {
        instance: inst.name.clone(),
        rows,
        passed,
        exact,
    })
}
