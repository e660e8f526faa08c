//! Seeded random micro-task generation, used to cross-check the learning
//! strategies against the brute-force oracle on small propositional tasks.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::asp::AspCtx;
use crate::space::SearchSpace;
use crate::syntax::{sym, Atom, BodyElem, Interpretation, Literal, Program, Rule, Sym, Term};
use crate::task::{LearningTask, OrderingExample, OrderingKind, PartialInterpretation};

const POOL: &[&str] = &["a", "b", "c", "d", "e", "f"];

fn atom(rng: &mut impl Rng, n_atoms: usize) -> Atom {
    Atom::prop(POOL[rng.gen_range(0..n_atoms)])
}

fn literal(rng: &mut impl Rng, n_atoms: usize) -> Literal {
    Literal { atom: atom(rng, n_atoms), negated: rng.gen_bool(0.4) }
}

fn body(rng: &mut impl Rng, n_atoms: usize, max: usize) -> Vec<BodyElem> {
    let len = rng.gen_range(0..=max);
    (0..len).map(|_| BodyElem::Lit(literal(rng, n_atoms))).collect()
}

fn random_rule(rng: &mut impl Rng, n_atoms: usize) -> Rule {
    match rng.gen_range(0..10) {
        0..=3 => Rule::Normal { head: atom(rng, n_atoms), body: body(rng, n_atoms, 2) },
        4..=5 => {
            let mut b = body(rng, n_atoms, 2);
            if b.is_empty() {
                b.push(BodyElem::Lit(literal(rng, n_atoms)));
            }
            Rule::Constraint { body: b }
        }
        6..=7 => {
            let mut heads = vec![atom(rng, n_atoms)];
            if rng.gen_bool(0.5) {
                let extra = atom(rng, n_atoms);
                if !heads.contains(&extra) {
                    heads.push(extra);
                }
            }
            let k = heads.len() as i64;
            let lower = rng.gen_range(0..=k);
            let upper = rng.gen_range(lower..=k);
            Rule::Choice { lower, upper, heads, body: body(rng, n_atoms, 1) }
        }
        _ => {
            let mut b = body(rng, n_atoms, 2);
            if b.is_empty() {
                b.push(BodyElem::Lit(literal(rng, n_atoms)));
            }
            let terms = if rng.gen_bool(0.5) {
                // terms derived from the body give colliding tuples a chance
                b.iter()
                    .filter_map(|e| e.as_lit().map(|l| Term::Const(l.atom.pred.clone())))
                    .collect()
            } else {
                vec![Term::Const(sym(&format!("t{}", rng.gen_range(0..4))))]
            };
            Rule::Weak {
                body: b,
                weight: Term::Int(*[-1, 1, 1, 2].choose(rng).unwrap()),
                level: Term::Int(rng.gen_range(0..2)),
                terms,
            }
        }
    }
}

fn partial_from(
    rng: &mut impl Rng,
    id: &str,
    universe: &[Atom],
    template: Option<&Interpretation>,
) -> PartialInterpretation {
    let mut inc = Interpretation::new();
    let mut exc = Interpretation::new();
    for a in universe {
        if rng.gen_bool(0.45) {
            continue; // unspecified
        }
        let truth = match template {
            Some(t) => t.contains(a),
            None => rng.gen_bool(0.5),
        };
        if truth {
            inc.insert(a.clone());
        } else {
            exc.insert(a.clone());
        }
    }
    PartialInterpretation { id: sym(id), inclusions: inc, exclusions: exc }
}

/// A random propositional task over at most six atoms, with a handful of
/// background rules, a small mixed search space, examples sampled around the
/// background's answer sets, and random orderings over the positives.
pub fn random_micro_task(seed: u64) -> LearningTask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_atoms = rng.gen_range(3..=5);
    let universe: Vec<Atom> = POOL[..n_atoms].iter().map(|s| Atom::prop(s)).collect();

    // background: a couple of facts or rules, plus often a choice
    let mut background = Program::new();
    for _ in 0..rng.gen_range(1..=3) {
        background.push(Rule::fact(atom(&mut rng, n_atoms)));
    }
    if rng.gen_bool(0.8) {
        let mut heads = Vec::new();
        for a in &universe {
            if rng.gen_bool(0.5) && heads.len() < 3 {
                heads.push(a.clone());
            }
        }
        if !heads.is_empty() {
            let k = heads.len() as i64;
            background.push(Rule::Choice { lower: 0, upper: k, heads, body: Vec::new() });
        }
    }
    for _ in 0..rng.gen_range(0..=2) {
        background.push(Rule::Normal {
            head: atom(&mut rng, n_atoms),
            body: body(&mut rng, n_atoms, 2),
        });
    }

    // search space: a few rules of any form
    let n_entries = rng.gen_range(2..=6);
    let mut rules = Vec::new();
    for i in 0..n_entries {
        rules.push((sym(&format!("r{}", i + 1)), random_rule(&mut rng, n_atoms)));
    }
    let space = SearchSpace::from_named_rules(rules);

    // examples: positives sampled near actual answer sets so that coverage is
    // often achievable; negatives fully random
    let answer_sets =
        crate::asp::enumerate_answer_sets(&background, &AspCtx::default()).unwrap_or_default();
    let n_pos = rng.gen_range(1..=3);
    let mut positives = Vec::new();
    for i in 0..n_pos {
        let template = if !answer_sets.is_empty() && rng.gen_bool(0.8) {
            Some(&answer_sets[rng.gen_range(0..answer_sets.len())])
        } else {
            None
        };
        positives.push(partial_from(&mut rng, &format!("p{}", i + 1), &universe, template));
    }
    let mut negatives = Vec::new();
    for i in 0..rng.gen_range(0..=2) {
        negatives.push(partial_from(&mut rng, &format!("n{}", i + 1), &universe, None));
    }

    let mut orderings = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let i = rng.gen_range(0..positives.len());
        let j = rng.gen_range(0..positives.len());
        let kind = if rng.gen_bool(0.5) { OrderingKind::Brave } else { OrderingKind::Cautious };
        if kind == OrderingKind::Cautious && i == j {
            continue;
        }
        orderings.push(OrderingExample {
            first: positives[i].id.clone(),
            second: positives[j].id.clone(),
            kind,
        });
    }

    LearningTask::new(background, space, positives, negatives, orderings)
        .expect("generated tasks are structurally valid")
}
