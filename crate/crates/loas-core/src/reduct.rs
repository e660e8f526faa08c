//! The simplified reduct for programs with choice rules, least models of the
//! resulting definite programs, and the answer-set test.

use crate::error::AspError;
use crate::syntax::{Atom, BodyElem, Interpretation, Program, Rule, SumCoeff};

fn require_ground(p: &Program) -> Result<(), AspError> {
    for r in p.iter() {
        if !r.is_ground() {
            return Err(AspError::NotGround(r.to_string()));
        }
    }
    Ok(())
}

fn sum_holds(elems: &[(Atom, SumCoeff)], i: &Interpretation) -> Result<bool, AspError> {
    let mut total = 0i64;
    for (atom, coeff) in elems {
        if i.contains(atom) {
            match coeff {
                SumCoeff::Int(n) => total += n,
                other => {
                    return Err(AspError::NotGround(format!("sum coefficient {other:?}")));
                }
            }
        }
    }
    Ok(total < 0)
}

fn card_holds(lower: Option<i64>, upper: Option<i64>, atoms: &[Atom], i: &Interpretation) -> bool {
    let n = atoms.iter().filter(|a| i.contains(a)).count() as i64;
    lower.is_none_or(|l| n >= l) && upper.is_none_or(|u| n <= u)
}

/// Positive plain body, with negative literals and aggregate elements
/// evaluated against `i`: returns `None` when the rule is removed.
fn reduce_body(body: &[BodyElem], i: &Interpretation) -> Result<Option<Vec<BodyElem>>, AspError> {
    let mut out = Vec::new();
    for e in body {
        match e {
            BodyElem::Lit(l) => {
                if l.negated {
                    if i.contains(&l.atom) {
                        return Ok(None); // step 1
                    }
                    // step 2: drop the negative literal
                } else {
                    out.push(e.clone());
                }
            }
            BodyElem::Lt(a, b) => match (a.as_int(), b.as_int()) {
                (Some(x), Some(y)) if x < y => {}
                (Some(_), Some(_)) => return Ok(None),
                _ => return Err(AspError::Grounding(format!("comparison {a} < {b}"))),
            },
            BodyElem::Sum(s) => {
                if !sum_holds(&s.elems, i)? {
                    return Ok(None);
                }
            }
            BodyElem::Card(c) => {
                if !card_holds(c.lower, c.upper, &c.atoms, i) {
                    return Ok(None);
                }
            }
        }
    }
    Ok(Some(out))
}

/// The 4-step reduct of a ground program with respect to an interpretation.
/// Weak constraints are ignored. The result contains only normal rules with
/// positive bodies; unsatisfied constraint and choice heads become `bot`.
pub fn compute_reduct(p: &Program, i: &Interpretation) -> Result<Program, AspError> {
    require_ground(p)?;
    let mut out = Program::new();
    for rule in p.non_weak() {
        let Some(body) = reduce_body(rule.body(), i)? else { continue };
        match rule {
            Rule::Normal { head, .. } => {
                out.push(Rule::Normal { head: head.clone(), body });
            }
            Rule::Constraint { .. } => {
                out.push(Rule::Normal { head: Atom::bot(), body });
            }
            Rule::Choice { lower, upper, heads, .. } => {
                let chosen = heads.iter().filter(|h| i.contains(h)).count() as i64;
                if chosen < *lower || chosen > *upper {
                    // step 3: head aggregate unsatisfied
                    out.push(Rule::Normal { head: Atom::bot(), body });
                } else {
                    // step 4: one rule per chosen head
                    for h in heads.iter().filter(|h| i.contains(h)) {
                        out.push(Rule::Normal { head: h.clone(), body: body.clone() });
                    }
                }
            }
            Rule::Weak { .. } => unreachable!(),
        }
    }
    Ok(out)
}

/// Least model of a definite (negation-free) program.
pub fn least_model(p: &Program) -> Interpretation {
    let mut model = Interpretation::new();
    let mut changed = true;
    while changed {
        changed = false;
        for rule in p.iter() {
            if let Rule::Normal { head, body } = rule {
                if model.contains(head) {
                    continue;
                }
                let fires = body.iter().all(|e| match e {
                    BodyElem::Lit(l) if !l.negated => model.contains(&l.atom),
                    _ => false,
                });
                if fires {
                    model.insert(head.clone());
                    changed = true;
                }
            }
        }
    }
    model
}

/// Whether `i` is an answer set of the ground program `p`: `i` must equal the
/// least model of the reduct, and `bot` must not be derivable.
pub fn is_answer_set(p: &Program, i: &Interpretation) -> Result<bool, AspError> {
    let reduct = compute_reduct(p, i)?;
    let lm = least_model(&reduct);
    Ok(!lm.contains(&Atom::bot()) && &lm == i)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_ground_atom, parse_program};

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| parse_ground_atom(a).unwrap()).collect()
    }

    #[test]
    fn textbook_two_rule_reduct() {
        let p = parse_program("p :- not q. q :- not p.").unwrap();
        let r = compute_reduct(&p, &interp(&["p"])).unwrap();
        assert_eq!(r, parse_program("p.").unwrap());
        assert!(is_answer_set(&p, &interp(&["p"])).unwrap());
        assert!(is_answer_set(&p, &interp(&["q"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&["p", "q"])).unwrap());
        assert!(!is_answer_set(&p, &interp(&[])).unwrap());
    }

    #[test]
    fn satisfied_choice_expands_to_chosen_heads() {
        let p = parse_program("0 {a} 1.").unwrap();
        let r = compute_reduct(&p, &interp(&["a"])).unwrap();
        assert_eq!(r, parse_program("a.").unwrap());
        let r0 = compute_reduct(&p, &interp(&[])).unwrap();
        assert!(r0.is_empty());
    }

    #[test]
    fn unsatisfied_choice_head_becomes_bot() {
        let p = parse_program("1 {a; b} 1.").unwrap();
        let i = interp(&["a", "b"]);
        let r = compute_reduct(&p, &i).unwrap();
        let printed = r.to_string();
        assert_eq!(printed.trim(), "bot.");
        assert!(!is_answer_set(&p, &i).unwrap());
        assert!(is_answer_set(&p, &interp(&["a"])).unwrap());
    }

    #[test]
    fn constraints_turn_into_bot_rules() {
        let p = parse_program("a :- not b. :- a.").unwrap();
        assert!(!is_answer_set(&p, &interp(&["a"])).unwrap());
    }

    #[test]
    fn non_ground_input_is_rejected() {
        let p = parse_program("q(X) :- p(X).").unwrap();
        assert!(matches!(
            compute_reduct(&p, &interp(&[])),
            Err(AspError::NotGround(_))
        ));
    }

    #[test]
    fn unfounded_loops_are_not_answer_sets() {
        let p = parse_program("a :- b. b :- a.").unwrap();
        assert!(is_answer_set(&p, &interp(&[])).unwrap());
        assert!(!is_answer_set(&p, &interp(&["a", "b"])).unwrap());
    }
}
