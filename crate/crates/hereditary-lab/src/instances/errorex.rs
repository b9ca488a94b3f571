//! A mixed-arity signature where templates can have errors: one ternary
//! relation left unrestricted and a metric space on three binary relations.

use std::sync::Arc;

use super::metric::violating;
use crate::error::Result;
use crate::property::{ForbiddenEntry, HereditaryProperty, Mode};
use crate::signature::{Signature, Structure};
use crate::template::{Template, TypePool};
use crate::types::{FactLayout, LocatedType, QfType, SyntacticDiagram};

pub fn signature() -> Arc<Signature> {
    Arc::new(Signature::new(vec![("E", 3), ("R1", 2), ("R2", 2), ("R3", 2)]).expect("valid signature"))
}

fn scoped(structure: Structure, mode: Mode) -> ForbiddenEntry {
    ForbiddenEntry {
        structure,
        mode,
        scope: Some(vec![1, 2, 3]),
    }
}

/// Metric spaces on R1..R3; E is free.
pub fn property() -> Result<HereditaryProperty> {
    let sig = signature();
    let mut f = Vec::new();
    for i in 1..=3 {
        let mut lp = Structure::empty(sig.clone(), 1);
        lp.set(i, &[0, 0], true);
        f.push(ForbiddenEntry::non_induced(lp));
        let mut one_way = Structure::empty(sig.clone(), 2);
        one_way.set(i, &[0, 1], true);
        f.push(scoped(one_way, Mode::Induced));
        for j in 1..=3 {
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
    f.push(scoped(Structure::empty(sig.clone(), 2), Mode::Induced));
    for a in 1..=3 {
        for b in a..=3 {
            for c in b..=3 {
                if violating(a, b, c) {
                    let mut s = Structure::empty(sig.clone(), 3);
                    for (x, y, d) in [(0, 1, a), (1, 2, b), (0, 2, c)] {
                        s.set(d, &[x, y], true);
                        s.set(d, &[y, x], true);
                    }
                    f.push(scoped(s, Mode::Induced));
                }
            }
        }
    }
    HereditaryProperty::new(sig, Mode::Induced, f)
}

/// The 3-type with E(t) = `e` for every t ∈ {x1,x2,x3}^3 and distances
/// d(x1,x2) = d12, d(x1,x3) = d13, d(x2,x3) = d23.
pub fn triangle_type(layout: &FactLayout, e: bool, d12: usize, d13: usize, d23: usize) -> QfType {
    let mut bits = 0u128;
    if e {
        for t in crate::combin::tuples(3, 3) {
            bits |= layout.bit(0, &t);
        }
    }
    for (x, y, d) in [(0, 1, d12), (0, 2, d13), (1, 2, d23)] {
        bits |= layout.bit(d, &[x, y]) | layout.bit(d, &[y, x]);
    }
    QfType(bits)
}

/// q_1: E everywhere, all distances 1.
pub fn q1(layout: &FactLayout) -> QfType {
    triangle_type(layout, true, 1, 1, 1)
}

/// q_2: E everywhere, d(x1,x2) = 2, other distances 1.
pub fn q2(layout: &FactLayout) -> QfType {
    triangle_type(layout, true, 2, 1, 1)
}

/// q_0: no E facts, all distances 1.
pub fn q0(layout: &FactLayout) -> QfType {
    triangle_type(layout, false, 1, 1, 1)
}

/// Every realized type with E constant: 2 × 24 metric triangles.
pub fn full_pool() -> Result<Arc<TypePool>> {
    let prop = Arc::new(property()?);
    let layout = prop.layout()?;
    let mut types = Vec::new();
    for e in [false, true] {
        for a in 1..=3 {
            for b in 1..=3 {
                for c in 1..=3 {
                    if !violating(a, b, c) {
                        types.push(triangle_type(&layout, e, a, b, c));
                    }
                }
            }
        }
    }
    TypePool::with_types(prop, types)
}

/// Pool {q0, q1, q2}.
pub fn small_pool() -> Result<Arc<TypePool>> {
    let prop = Arc::new(property()?);
    let layout = prop.layout()?;
    TypePool::with_types(prop, vec![q0(&layout), q1(&layout), q2(&layout)])
}

/// Points t,u,v,w = 0,1,2,3: Ch = {q1} everywhere, plus q2 on (t,u,v).
pub fn error_template() -> Result<Template> {
    let pool = small_pool()?;
    let layout = pool.layout.clone();
    Template::from_fn(pool, 4, |a| {
        if a == [0, 1, 2] {
            vec![q1(&layout), q2(&layout)]
        } else {
            vec![q1(&layout)]
        }
    })
}

/// {q1(c2,c3,c4), q2(c1,c2,c3), q1(c1,c3,c4), q1(c1,c2,c4)}.
pub fn size_four_error(layout: &FactLayout) -> SyntacticDiagram {
    let (a, b) = (q1(layout), q2(layout));
    SyntacticDiagram::new(vec![
        LocatedType::from_enumeration(&[1, 2, 3], a, layout),
        LocatedType::from_enumeration(&[0, 1, 2], b, layout),
        LocatedType::from_enumeration(&[0, 2, 3], a, layout),
        LocatedType::from_enumeration(&[0, 1, 3], a, layout),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::budget::Budget;
    use crate::types::{is_error, is_satisfiable};
    use num_bigint::BigUint;

    #[test]
    fn error_template_has_one_error() {
        let t = error_template().unwrap();
        assert_eq!(t.detect_errors().unwrap(), vec![vec![0, 1, 2, 3]]);
        let b = Budget::unlimited();
        let sub = t.sub_count(&b).unwrap();
        assert!(!sub.error_free);
        assert!(sub.count < t.choice_count());
        assert_eq!(t.sub_count_by_merging(&b).unwrap(), sub.count);
        assert_eq!(sub.count, BigUint::from(1u32));
    }

    #[test]
    fn restriction_to_three_points_realizes_q1() {
        let t = error_template().unwrap();
        let r = t.restrict(&[1, 2, 3]).unwrap();
        assert_eq!(r.choices, vec![vec![q1(&t.pool.layout)]]);
    }

    #[test]
    fn size_four_diagram_is_an_error() {
        let pool = small_pool().unwrap();
        let d = size_four_error(&pool.layout);
        assert!(d.is_m_diagram(4, 3));
        assert!(!is_satisfiable(&d, &pool.layout).unwrap());
        assert!(is_error(&d, 4, &pool.layout).unwrap());
    }

    #[test]
    fn pools_are_realized() {
        assert_eq!(full_pool().unwrap().len(), 48);
        assert!(!small_pool().unwrap().uniform_lower());
    }
}
