//! JSON schemas for structures, properties, templates and type listings.
//!
//! Elements are 1-based on the wire. Parse errors from serde carry line and
//! column; semantic errors name the offending field.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::{Deserialize, Serialize, Serializer};

use crate::budget::Budget;
use crate::error::{invalid, LabError, Result};
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{one_based, Template, TypePool};
use crate::types::{FactLayout, QfType};

pub fn ser_big<S: Serializer>(x: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

pub fn ser_rational<S: Serializer>(x: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&x.to_string())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<Signature>,
    pub n: usize,
    #[serde(default)]
    pub relations: BTreeMap<String, Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PropertyJson {
    pub signature: Signature,
    pub mode: Mode,
    pub forbidden: Vec<StructureJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PropertyRef {
    Inline(PropertyJson),
    Path(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemplateJson {
    pub property: PropertyRef,
    pub n: usize,
    pub choices: BTreeMap<String, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeEntry {
    pub id: String,
    pub facts: BTreeMap<String, bool>,
}

fn structure_with(sig: Arc<Signature>, j: &StructureJson, field: &str) -> Result<Structure> {
    let mut rels = vec![Vec::new(); sig.len()];
    for (name, ts) in &j.relations {
        let Some(rel) = sig.index_of(name) else {
            return invalid(format!("{field}.relations: unknown relation {name:?}"));
        };
        for (i, t) in ts.iter().enumerate() {
            if t.len() != sig.arity(rel) {
                return invalid(format!(
                    "{field}.relations.{name}[{i}]: expected {} elements, got {}",
                    sig.arity(rel),
                    t.len()
                ));
            }
            if let Some(&x) = t.iter().find(|&&x| x == 0 || x > j.n) {
                return invalid(format!(
                    "{field}.relations.{name}[{i}]: element {x} outside 1..={}",
                    j.n
                ));
            }
            rels[rel].push(t.iter().map(|x| x - 1).collect());
        }
    }
    Structure::from_tuples(sig, j.n, &rels)
}

/// Build a structure, using the embedded signature or the supplied one.
pub fn structure_from_json(j: &StructureJson, sig: Option<Arc<Signature>>) -> Result<Structure> {
    let sig = match (&j.signature, sig) {
        (Some(s), Some(outer)) if *s != *outer => return invalid("structure signature differs from the expected one"),
        (_, Some(outer)) => outer,
        (Some(s), None) => {
            s.validate()?;
            Arc::new(s.clone())
        }
        (None, None) => return invalid("structure has no signature"),
    };
    structure_with(sig, j, "structure")
}

pub fn structure_to_json(m: &Structure, with_signature: bool) -> StructureJson {
    let relations = (0..m.sig.len())
        .map(|rel| {
            (
                m.sig.relations[rel].name.clone(),
                m.tuples(rel).iter().map(|t| one_based(t)).collect(),
            )
        })
        .collect();
    StructureJson {
        signature: with_signature.then(|| (*m.sig).clone()),
        n: m.n,
        relations,
        mode: None,
        scope: None,
    }
}

pub fn parse_structure(text: &str) -> Result<Structure> {
    let j: StructureJson = serde_json::from_str(text)?;
    structure_from_json(&j, None)
}

pub fn property_from_json(j: &PropertyJson) -> Result<HereditaryProperty> {
    j.signature.validate()?;
    let sig = Arc::new(j.signature.clone());
    let mut entries = Vec::with_capacity(j.forbidden.len());
    for (i, f) in j.forbidden.iter().enumerate() {
        let field = format!("forbidden[{i}]");
        if let Some(s) = &f.signature {
            if *s != *sig {
                return invalid(format!("{field}.signature: differs from the property signature"));
            }
        }
        let structure = structure_with(sig.clone(), f, &field)?;
        let scope = match &f.scope {
            None => None,
            Some(names) => {
                let mut idx = Vec::new();
                for name in names {
                    match sig.index_of(name) {
                        Some(k) => idx.push(k),
                        None => return invalid(format!("{field}.scope: unknown relation {name:?}")),
                    }
                }
                Some(idx)
            }
        };
        entries.push(ForbiddenEntry {
            structure,
            mode: f.mode.unwrap_or(j.mode),
            scope,
        });
    }
    HereditaryProperty::new(sig, j.mode, entries)
}

pub fn property_to_json(p: &HereditaryProperty) -> PropertyJson {
    let forbidden = p
        .forbidden
        .iter()
        .map(|e| {
            let mut s = structure_to_json(&e.structure, false);
            if e.mode != p.default_mode {
                s.mode = Some(e.mode);
            }
            s.scope = e
                .scope
                .as_ref()
                .map(|sc| sc.iter().map(|&k| p.sig.relations[k].name.clone()).collect());
            s
        })
        .collect();
    PropertyJson {
        signature: (*p.sig).clone(),
        mode: p.default_mode,
        forbidden,
    }
}

pub fn parse_property(text: &str) -> Result<HereditaryProperty> {
    let j: PropertyJson = serde_json::from_str(text)?;
    property_from_json(&j)
}

pub fn load_property(path: &Path) -> Result<HereditaryProperty> {
    parse_property(&std::fs::read_to_string(path)?)
}

fn parse_key(key: &str, r: usize, n: usize) -> Result<Vec<usize>> {
    let inner = key
        .trim()
        .strip_prefix('[')
        .and_then(|k| k.strip_suffix(']'))
        .ok_or_else(|| LabError::InvalidArgument(format!("choices: key {key:?} is not of the form [i,j,...]")))?;
    let mut a = Vec::new();
    for part in inner.split(',') {
        let x: usize = part
            .trim()
            .parse()
            .map_err(|_| LabError::InvalidArgument(format!("choices: key {key:?} has a non-integer element")))?;
        if x == 0 || x > n {
            return invalid(format!("choices: key {key:?} has element {x} outside 1..={n}"));
        }
        a.push(x - 1);
    }
    a.sort_unstable();
    a.dedup();
    if a.len() != r {
        return invalid(format!("choices: key {key:?} is not a set of {r} distinct elements"));
    }
    Ok(a)
}

pub fn subset_key(a: &[usize]) -> String {
    let v: Vec<String> = a.iter().map(|x| (x + 1).to_string()).collect();
    format!("[{}]", v.join(","))
}

/// Resolve the property of a template document; path references are taken
/// relative to `base`.
pub fn resolve_property(j: &TemplateJson, base: Option<&Path>) -> Result<HereditaryProperty> {
    match &j.property {
        PropertyRef::Inline(p) => property_from_json(p),
        PropertyRef::Path(p) => {
            let path = match base {
                Some(b) => b.join(p),
                None => Path::new(p).to_path_buf(),
            };
            load_property(&path)
        }
    }
}

pub fn template_from_json(j: &TemplateJson, pool: Arc<TypePool>) -> Result<Template> {
    let r = pool.r();
    if j.n < r {
        return invalid(format!("n: {} is smaller than r = {r}", j.n));
    }
    let subsets = crate::combin::subsets_colex(j.n, r);
    let mut choices: Vec<Option<Vec<QfType>>> = vec![None; subsets.len()];
    for (key, ids) in &j.choices {
        let a = parse_key(key, r, j.n)?;
        let idx = crate::combin::colex_rank(&a);
        if choices[idx].is_some() {
            return invalid(format!("choices: subset {key} listed twice"));
        }
        let mut tys = Vec::with_capacity(ids.len());
        for id in ids {
            let t = QfType::parse_id(id)?;
            if !pool.contains(t) {
                return invalid(format!("choices.{key}: type {id} is not realized in the property"));
            }
            tys.push(t);
        }
        choices[idx] = Some(tys);
    }
    let mut out = Vec::with_capacity(subsets.len());
    for (a, c) in subsets.iter().zip(choices) {
        match c {
            Some(c) => out.push(c),
            None => return invalid(format!("choices: subset {} missing", subset_key(a))),
        }
    }
    Template::new(pool, j.n, out)
}

pub fn template_to_json(t: &Template) -> TemplateJson {
    let choices = t
        .subsets()
        .iter()
        .map(|a| (subset_key(a), t.ch(a).iter().map(|p| p.id()).collect()))
        .collect();
    TemplateJson {
        property: PropertyRef::Inline(property_to_json(&t.pool.prop)),
        n: t.n,
        choices,
    }
}

/// Parse a template, building its type pool from the realized types.
pub fn parse_template(text: &str, base: Option<&Path>, budget: &Budget) -> Result<Template> {
    let j: TemplateJson = serde_json::from_str(text)?;
    let prop = Arc::new(resolve_property(&j, base)?);
    let pool = TypePool::new(prop, budget)?;
    template_from_json(&j, pool)
}

pub fn type_listing(layout: &FactLayout, types: &[QfType]) -> Vec<TypeEntry> {
    types
        .iter()
        .map(|t| TypeEntry {
            id: t.id(),
            facts: t.facts_json(layout),
        })
        .collect()
}
