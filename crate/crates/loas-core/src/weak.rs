//! Weak-constraint profiles and the dominance ordering over answer sets.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::AspError;
use crate::syntax::{Atom, BodyElem, Interpretation, Program, Rule, SumCoeff, Term};

/// The tuples contributed by a ground program's weak constraints under one
/// interpretation, with per-level weight sums (each distinct tuple counted
/// once).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeakProfile {
    pub tuples: BTreeSet<(i64, i64, Vec<Term>)>,
    pub level_sums: BTreeMap<i64, i64>,
}

impl WeakProfile {
    pub fn level_sum(&self, level: i64) -> i64 {
        self.level_sums.get(&level).copied().unwrap_or(0)
    }

    /// Strict dominance: better at some level, equal at every higher level.
    pub fn dominates(&self, other: &WeakProfile) -> bool {
        let levels: BTreeSet<i64> = self
            .level_sums
            .keys()
            .chain(other.level_sums.keys())
            .copied()
            .collect();
        for l in levels.into_iter().rev() {
            let (a, b) = (self.level_sum(l), other.level_sum(l));
            if a < b {
                return true;
            }
            if a > b {
                return false;
            }
        }
        false
    }
}

pub(crate) fn body_satisfied(body: &[BodyElem], i: &Interpretation) -> Result<bool, AspError> {
    for e in body {
        let ok = match e {
            BodyElem::Lit(l) => l.negated != i.contains(&l.atom),
            BodyElem::Lt(a, b) => match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) => x < y,
                _ => return Err(AspError::Grounding(format!("comparison {a} < {b}"))),
            },
            BodyElem::Sum(s) => {
                let mut total = 0i64;
                for (atom, coeff) in &s.elems {
                    if i.contains(atom) {
                        match coeff {
                            SumCoeff::Int(n) => total += n,
                            other => {
                                return Err(AspError::Grounding(format!(
                                    "unexpanded sum coefficient {other:?}"
                                )))
                            }
                        }
                    }
                }
                total < 0
            }
            BodyElem::Card(c) => {
                let n = c.atoms.iter().filter(|a| i.contains(a)).count() as i64;
                c.lower.is_none_or(|l| n >= l) && c.upper.is_none_or(|u| n <= u)
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `weak(p, a)` for a ground program: the set of `(weight, level, terms)`
/// tuples of weak constraints whose bodies `a` satisfies.
pub fn weak_profile(p: &Program, a: &Interpretation) -> Result<WeakProfile, AspError> {
    let mut profile = WeakProfile::default();
    for rule in p.weak() {
        let Rule::Weak { body, weight, level, terms } = rule else { unreachable!() };
        if !rule.is_ground() {
            return Err(AspError::NotGround(rule.to_string()));
        }
        if body_satisfied(body, a)? {
            let (Some(w), Some(l)) = (weight.as_int(), level.as_int()) else {
                return Err(AspError::Grounding(format!("non-integer weight/level in {rule}")));
            };
            profile.tuples.insert((w, l, terms.clone()));
        }
    }
    for (w, l, _) in &profile.tuples {
        *profile.level_sums.entry(*l).or_insert(0) += w;
    }
    Ok(profile)
}

/// Whether `a1` dominates `a2` under the ground program's weak constraints.
pub fn dominates(p: &Program, a1: &Interpretation, a2: &Interpretation) -> Result<bool, AspError> {
    Ok(weak_profile(p, a1)?.dominates(&weak_profile(p, a2)?))
}

/// The non-dominated members of a set of interpretations.
pub fn optimal_among(
    p: &Program,
    sets: &[Interpretation],
) -> Result<Vec<Interpretation>, AspError> {
    let profiles: Vec<WeakProfile> =
        sets.iter().map(|a| weak_profile(p, a)).collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for (i, a) in sets.iter().enumerate() {
        let dominated = profiles.iter().enumerate().any(|(j, pj)| j != i && pj.dominates(&profiles[i]));
        if !dominated {
            out.push(a.clone());
        }
    }
    Ok(out)
}

#[allow(unused)]
fn _unused(_: &Atom) {}
