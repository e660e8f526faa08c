//! Meta-level program construction: reification combinators, cover and
//! dominance blocks, reduct encodings, the task program whose answer sets
//! represent positive hypotheses, the violating-reason program that rules out
//! refuted classes, and decoding of meta answer sets.

use std::collections::BTreeSet;

use crate::asp::AspCtx;
use crate::error::{EngineError, MetaError};
use crate::ground::{ground, herbrand_atoms};
use crate::syntax::{sym, Atom, BodyElem, CardBody, Interpretation, Literal, Program, Rule, Sym, SumBody, SumCoeff, Term};
use crate::task::{Hypothesis, LearningTask, OrderingKind, PartialInterpretation, ViolatingReason};

/// Predicates owned by the meta encodings; they may not occur in the task.
pub const RESERVED_PREDICATES: &[&str] = &[
    "in_as", "in_vs", "in_h", "w", "lv", "as", "vs", "cov", "v_i", "v_p", "violating", "dom",
    "dom_lv", "non_dom_lv", "non_bef", "mmr", "nas", "bot",
];

const META_VAR: &str = "X";

/// An atom turned into a term, for use as an argument of a meta predicate.
pub fn atom_to_term(a: &Atom) -> Term {
    if a.args.is_empty() {
        Term::Const(a.pred.clone())
    } else {
        Term::Func(a.pred.clone(), a.args.clone())
    }
}

/// The inverse of [`atom_to_term`].
pub fn term_to_atom(t: &Term) -> Result<Atom, MetaError> {
    match t {
        Term::Const(c) => Ok(Atom { pred: c.clone(), args: Vec::new() }),
        Term::Func(f, args) => Ok(Atom { pred: f.clone(), args: args.clone() }),
        other => Err(MetaError::MalformedMetaModel(format!("term {other} is not an atom"))),
    }
}

fn wrap(a: &Atom, pred: &str, t: &Term) -> Atom {
    Atom { pred: sym(pred), args: vec![atom_to_term(a), t.clone()] }
}

/// Renames the rule's variables to `V1, V2, ...` when any of them collides
/// with the meta variable.
fn avoid_meta_var(rule: &Rule) -> Rule {
    let vars = rule.vars();
    if !vars.iter().any(|v| v.as_ref() == META_VAR) {
        return rule.clone();
    }
    let map: std::collections::HashMap<Sym, Sym> = vars
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), sym(&format!("V{}", i + 1))))
        .collect();
    crate::space::rename_vars(rule, &map)
}

fn reify_rule(rule: &Rule, pred: &str, t: &Term) -> Rule {
    let rule = avoid_meta_var(rule);
    let map_body = |body: &[BodyElem]| -> Vec<BodyElem> {
        body.iter()
            .map(|e| match e {
                BodyElem::Lit(l) => BodyElem::Lit(Literal {
                    atom: wrap(&l.atom, pred, t),
                    negated: l.negated,
                }),
                other => other.clone(),
            })
            .collect()
    };
    match &rule {
        Rule::Normal { head, body } => {
            Rule::Normal { head: wrap(head, pred, t), body: map_body(body) }
        }
        Rule::Constraint { body } => Rule::Constraint { body: map_body(body) },
        Rule::Choice { lower, upper, heads, body } => Rule::Choice {
            lower: *lower,
            upper: *upper,
            heads: heads.iter().map(|h| wrap(h, pred, t)).collect(),
            body: map_body(body),
        },
        Rule::Weak { .. } => rule.clone(),
    }
}

/// Replaces every atom of the (weak-constraint-free) program by
/// `pred(atom, term)`.
pub fn reify(p: &Program, pred: &str, t: &Term) -> Program {
    p.iter().map(|r| reify_rule(r, pred, t)).collect()
}

/// Reifies a set of ground atoms into facts `pred(atom, term).`.
pub fn reify_interpretation(i: &Interpretation, pred: &str, t: &Term) -> Program {
    i.iter().map(|a| Rule::fact(wrap(a, pred, t))).collect()
}

/// Conjoins `a` positively to every rule body of the program.
pub fn append_body_atom(p: &Program, a: &Atom) -> Program {
    p.iter()
        .map(|r| {
            let mut r = r.clone();
            r.body_mut().push(BodyElem::pos(a.clone()));
            r
        })
        .collect()
}

/// The two statements forcing the answer set named `t` to extend `e`:
/// a `cov(t)` definition over the reified inclusions/exclusions and the
/// constraint `:- not cov(t).`.
pub fn cover_program(e: &PartialInterpretation, t: &Term) -> Program {
    let cov = Atom { pred: sym("cov"), args: vec![t.clone()] };
    let mut body: Vec<BodyElem> = Vec::new();
    for a in e.inclusions.iter() {
        body.push(BodyElem::pos(wrap(a, "in_as", t)));
    }
    for a in e.exclusions.iter() {
        body.push(BodyElem::neg(wrap(a, "in_as", t)));
    }
    let mut p = Program::new();
    p.push(Rule::Normal { head: cov.clone(), body });
    p.push(Rule::Constraint { body: vec![BodyElem::neg(cov)] });
    p
}

/// Encodes one weak constraint as a rule deriving its tuple:
/// `w(wt, lev, args(t1,...,tn), X) :- p2(X), p1(b1,X), ..., not p1(c1,X), ...`.
pub fn meta_weak(w: &Rule, p1: &str, p2: &str, t: &Term) -> Rule {
    let w = avoid_meta_var(w);
    let Rule::Weak { body, weight, level, terms } = &w else {
        panic!("meta_weak expects a weak constraint");
    };
    let args = if terms.is_empty() {
        Term::Const(sym("args"))
    } else {
        Term::Func(sym("args"), terms.clone())
    };
    let head = Atom {
        pred: sym("w"),
        args: vec![weight.clone(), level.clone(), args, t.clone()],
    };
    let mut out_body = vec![BodyElem::pos(Atom { pred: sym(p2), args: vec![t.clone()] })];
    for e in body {
        if let BodyElem::Lit(l) = e {
            if !l.negated {
                out_body.push(BodyElem::pos(wrap(&l.atom, p1, t)));
            }
        }
    }
    for e in body {
        if let BodyElem::Lit(l) = e {
            if l.negated {
                out_body.push(BodyElem::neg(wrap(&l.atom, p1, t)));
            }
        }
    }
    Rule::Normal { head, body: out_body }
}

fn meta_weak_program(weaks: &[&Rule], p1: &str, p2: &str, t: &Term) -> Program {
    weaks.iter().map(|w| meta_weak(w, p1, p2, t)).collect()
}

fn pred1(name: &str, t: Term) -> Atom {
    Atom { pred: sym(name), args: vec![t] }
}

fn pred2(name: &str, a: Term, b: Term) -> Atom {
    Atom { pred: sym(name), args: vec![a, b] }
}

fn pred3(name: &str, a: Term, b: Term, c: Term) -> Atom {
    Atom { pred: sym(name), args: vec![a, b, c] }
}

fn var(name: &str) -> Term {
    Term::Var(sym(name))
}

/// The four rules deriving `dom(t1,t2)` when the answer set named `t1`
/// dominates the one named `t2`, over the declared `lv` levels.
pub fn dominates_program(t1: &Term, t2: &Term) -> Program {
    let w_atom = |id: &Term| Atom {
        pred: sym("w"),
        args: vec![var("W"), var("L"), var("A"), id.clone()],
    };
    let mut p = Program::new();
    p.push(Rule::Normal {
        head: pred3("dom_lv", t1.clone(), t2.clone(), var("L")),
        body: vec![
            BodyElem::pos(pred1("lv", var("L"))),
            BodyElem::Sum(SumBody {
                elems: vec![
                    (w_atom(t1), SumCoeff::Plus(sym("W"))),
                    (w_atom(t2), SumCoeff::Minus(sym("W"))),
                ],
            }),
        ],
    });
    p.push(Rule::Normal {
        head: pred3("non_dom_lv", t1.clone(), t2.clone(), var("L")),
        body: vec![
            BodyElem::pos(pred1("lv", var("L"))),
            BodyElem::Sum(SumBody {
                elems: vec![
                    (w_atom(t2), SumCoeff::Plus(sym("W"))),
                    (w_atom(t1), SumCoeff::Minus(sym("W"))),
                ],
            }),
        ],
    });
    p.push(Rule::Normal {
        head: pred3("non_bef", t1.clone(), t2.clone(), var("L")),
        body: vec![
            BodyElem::pos(pred1("lv", var("L"))),
            BodyElem::pos(pred1("lv", var("L2"))),
            BodyElem::Lt(var("L"), var("L2")),
            BodyElem::pos(pred3("non_dom_lv", t1.clone(), t2.clone(), var("L2"))),
        ],
    });
    p.push(Rule::Normal {
        head: pred2("dom", t1.clone(), t2.clone()),
        body: vec![
            BodyElem::pos(pred3("dom_lv", t1.clone(), t2.clone(), var("L"))),
            BodyElem::neg(pred3("non_bef", t1.clone(), t2.clone(), var("L"))),
        ],
    });
    p
}

fn reductify_body(body: &[BodyElem], x: &Term) -> Vec<BodyElem> {
    let mut out = Vec::new();
    for e in body {
        if let BodyElem::Lit(l) = e {
            if !l.negated {
                out.push(BodyElem::pos(wrap(&l.atom, "mmr", x)));
            }
        }
    }
    for e in body {
        if let BodyElem::Lit(l) = e {
            if l.negated {
                out.push(BodyElem::neg(wrap(&l.atom, "in_vs", x)));
            }
        }
    }
    out
}

fn mmr_head(a: &Atom, x: &Term) -> Atom {
    wrap(a, "mmr", x)
}

/// Rules computing the least model of the reduct of one rule against stored
/// interpretations named by `vs` facts. Choice rules must be ground.
pub fn reductify_rule(rule: &Rule) -> Program {
    let rule = avoid_meta_var(rule);
    let x = var(META_VAR);
    let vs_guard = BodyElem::pos(pred1("vs", x.clone()));
    let mut p = Program::new();
    match &rule {
        Rule::Normal { head, body } => {
            let mut b = reductify_body(body, &x);
            b.push(vs_guard);
            p.push(Rule::Normal { head: mmr_head(head, &x), body: b });
        }
        Rule::Constraint { body } => {
            let mut b = reductify_body(body, &x);
            b.push(vs_guard);
            p.push(Rule::Normal { head: mmr_head(&Atom::bot(), &x), body: b });
        }
        Rule::Choice { lower, upper, heads, body } => {
            let in_vs_heads: Vec<Atom> = heads.iter().map(|h| wrap(h, "in_vs", &x)).collect();
            for h in heads {
                let mut b = reductify_body(body, &x);
                b.push(BodyElem::Card(CardBody {
                    lower: Some(*lower),
                    upper: Some(*upper),
                    atoms: in_vs_heads.clone(),
                }));
                b.push(BodyElem::pos(wrap(h, "in_vs", &x)));
                b.push(vs_guard.clone());
                p.push(Rule::Normal { head: mmr_head(h, &x), body: b });
            }
            let mut over = reductify_body(body, &x);
            over.push(BodyElem::Card(CardBody {
                lower: Some(*upper + 1),
                upper: None,
                atoms: in_vs_heads.clone(),
            }));
            over.push(vs_guard.clone());
            p.push(Rule::Normal { head: mmr_head(&Atom::bot(), &x), body: over });
            let mut under = reductify_body(body, &x);
            under.push(BodyElem::Card(CardBody {
                lower: None,
                upper: Some(*lower - 1),
                atoms: in_vs_heads,
            }));
            under.push(vs_guard);
            p.push(Rule::Normal { head: mmr_head(&Atom::bot(), &x), body: under });
        }
        Rule::Weak { .. } => panic!("reductify expects a non-weak rule"),
    }
    p
}

/// Reductifies a whole (weak-constraint-free) program.
pub fn reductify(p: &Program) -> Program {
    let mut out = Program::new();
    for rule in p.iter() {
        out.extend_from(&reductify_rule(rule));
    }
    out
}

/// Naming and shared grounding context for the meta encodings of one task.
pub struct MetaContext {
    pub task: LearningTask,
    /// Meta ids of the positive examples, in task order.
    pos_ids: Vec<Term>,
    /// Fresh meta id pairs for the brave orderings, in task order.
    brave_ids: Vec<(Term, Term)>,
    /// Levels available to the dominance blocks.
    pub levels: BTreeSet<i64>,
    /// Ground atoms of `ground(B ∪ rules(S_M))`, the universe for the
    /// reduct-check rules.
    base_atoms: BTreeSet<Atom>,
    /// Choice-rule instances are expanded against this fact base.
    instantiation_facts: Program,
}

impl MetaContext {
    pub fn new(task: &LearningTask, ctx: &AspCtx) -> Result<Self, EngineError> {
        for rule in task.background.iter().chain(task.space.entries().iter().map(|e| &e.rule)) {
            for atom in rule.atoms() {
                if RESERVED_PREDICATES.contains(&atom.pred.as_ref()) {
                    return Err(EngineError::Meta(MetaError::ReservedPredicateClash(
                        atom.pred.clone(),
                    )));
                }
            }
        }
        let base = task.background.union(&task.space.rules_program());
        let ground_base = ground(&base, &ctx.ground)?;
        let mut levels: BTreeSet<i64> = task.space.levels();
        for rule in ground_base.weak() {
            if let Rule::Weak { level, .. } = rule {
                if let Some(l) = level.as_int() {
                    levels.insert(l);
                }
            }
        }
        let base_atoms = herbrand_atoms(&ground_base);
        let instantiation_facts: Program =
            base_atoms.iter().map(|a| Rule::fact(a.clone())).collect();

        let pos_ids: Vec<Term> =
            (1..=task.positives.len() as i64).map(Term::Int).collect();
        let mut next = task.positives.len() as i64 + 1;
        let mut brave_ids = Vec::new();
        for o in task.orderings.iter() {
            if o.kind == OrderingKind::Brave {
                brave_ids.push((Term::Int(next), Term::Int(next + 1)));
                next += 2;
            }
        }
        Ok(MetaContext {
            task: task.clone(),
            pos_ids,
            brave_ids,
            levels,
            base_atoms,
            instantiation_facts,
        })
    }

    pub fn negative_id(&self) -> Term {
        Term::Const(sym("n"))
    }

    pub fn positive_id(&self, example: &Sym) -> Option<&Term> {
        self.task
            .positives
            .iter()
            .position(|e| &e.id == example)
            .map(|i| &self.pos_ids[i])
    }

    fn example_of_meta_id(&self, id: &Term) -> Option<&PartialInterpretation> {
        self.pos_ids
            .iter()
            .position(|t| t == id)
            .map(|i| &self.task.positives[i])
    }

    fn lv_facts(&self) -> Program {
        self.levels.iter().map(|&l| Rule::fact(pred1("lv", Term::Int(l)))).collect()
    }

    /// Ground instances of a choice rule against the task's derivable atoms;
    /// other rules pass through schematically.
    fn choice_instances(&self, rule: &Rule) -> Result<Program, EngineError> {
        if !matches!(rule, Rule::Choice { .. }) || rule.is_ground() {
            return Ok(Program::from_rules([rule.clone()]));
        }
        let mut p = self.instantiation_facts.clone();
        p.push(rule.clone());
        let g = ground(&p, &crate::ground::GroundOptions::default())?;
        Ok(g.iter().filter(|r| matches!(r, Rule::Choice { .. })).cloned().collect())
    }

    fn reductify_source(&self, rule: &Rule) -> Result<Program, EngineError> {
        let mut out = Program::new();
        for inst in self.choice_instances(rule)?.iter() {
            out.extend_from(&reductify_rule(inst));
        }
        Ok(out)
    }
}

/// Builds the task program: its answer sets represent the positive hypotheses
/// of the task, at cost `2*cost(H)` when the answer set contains `violating`
/// and `2*cost(H)+1` otherwise.
pub fn build_t_meta(ctx: &MetaContext) -> Program {
    let task = &ctx.task;
    let x = var(META_VAR);
    let as_x = Atom { pred: sym("as"), args: vec![x.clone()] };
    let mut p = Program::new();

    // background: reified rules guarded by as(X), plus its weak tuples
    let non_weak_b: Program = task.background.non_weak().cloned().collect();
    p.extend_from(&append_body_atom(&reify(&non_weak_b, "in_as", &x), &as_x));
    let b_weaks: Vec<&Rule> = task.background.weak().collect();
    p.extend_from(&meta_weak_program(&b_weaks, "in_as", "as", &x));

    // search space: rules additionally guarded by in_h(id), the choice over
    // the in_h atoms, and one cost statement per entry
    for entry in task.space.entries() {
        let guard = pred1("in_h", Term::Const(entry.id.clone()));
        if entry.rule.is_weak() {
            let w = meta_weak(&entry.rule, "in_as", "as", &x);
            p.extend_from(&append_body_atom(&Program::from_rules([w]), &guard));
        } else {
            let reified = append_body_atom(
                &reify(&Program::from_rules([entry.rule.clone()]), "in_as", &x),
                &as_x,
            );
            p.extend_from(&append_body_atom(&reified, &guard));
        }
    }
    if !task.space.is_empty() {
        let heads: Vec<Atom> = task
            .space
            .entries()
            .iter()
            .map(|e| pred1("in_h", Term::Const(e.id.clone())))
            .collect();
        p.push(Rule::Choice { lower: 0, upper: heads.len() as i64, heads, body: Vec::new() });
        for entry in task.space.entries() {
            p.push(Rule::Weak {
                body: vec![BodyElem::pos(pred1("in_h", Term::Const(entry.id.clone())))],
                weight: Term::Int(2 * entry.cost as i64),
                level: Term::Int(0),
                terms: vec![Term::Const(entry.id.clone())],
            });
        }
    }

    // positive examples: one named answer set each, forced to extend it
    for id in &ctx.pos_ids {
        p.push(Rule::fact(pred1("as", id.clone())));
    }
    for (e, id) in task.positives.iter().zip(&ctx.pos_ids) {
        p.extend_from(&cover_program(e, id));
    }

    // negative examples: a shared unconstrained answer set named n
    let n = ctx.negative_id();
    for e in &task.negatives {
        let mut body: Vec<BodyElem> = Vec::new();
        for a in e.inclusions.iter() {
            body.push(BodyElem::pos(wrap(a, "in_as", &n)));
        }
        for a in e.exclusions.iter() {
            body.push(BodyElem::neg(wrap(a, "in_as", &n)));
        }
        p.push(Rule::Normal { head: Atom::prop("v_i"), body });
    }
    if !task.negatives.is_empty() {
        p.push(Rule::fact(pred1("as", n)));
    }
    p.push(Rule::Normal {
        head: Atom::prop("violating"),
        body: vec![BodyElem::pos(Atom::prop("v_i"))],
    });
    p.push(Rule::Weak {
        body: vec![BodyElem::neg(Atom::prop("violating"))],
        weight: Term::Int(1),
        level: Term::Int(0),
        terms: Vec::new(),
    });

    // brave orderings: two fresh named answer sets, each covering its
    // endpoint, with the first forced to dominate the second
    let mut brave_iter = ctx.brave_ids.iter();
    for o in task.orderings_of(OrderingKind::Brave) {
        let (id1, id2) = brave_iter.next().expect("one id pair per brave ordering");
        p.push(Rule::fact(pred1("as", id1.clone())));
        p.push(Rule::fact(pred1("as", id2.clone())));
        p.extend_from(&cover_program(task.positive(&o.first).expect("validated"), id1));
        p.extend_from(&cover_program(task.positive(&o.second).expect("validated"), id2));
        p.extend_from(&dominates_program(id1, id2));
        p.push(Rule::Constraint {
            body: vec![BodyElem::neg(pred2("dom", id1.clone(), id2.clone()))],
        });
    }
    p.extend_from(&ctx.lv_facts());

    // cautious orderings: the endpoints' own answer sets, with a violation
    // witness when the first fails to dominate the second
    for o in task.orderings_of(OrderingKind::Cautious) {
        let id1 = ctx.positive_id(&o.first).expect("validated").clone();
        let id2 = ctx.positive_id(&o.second).expect("validated").clone();
        p.extend_from(&dominates_program(&id1, &id2));
        p.push(Rule::Normal {
            head: pred2("v_p", id1.clone(), id2.clone()),
            body: vec![BodyElem::neg(pred2("dom", id1, id2))],
        });
    }
    p.push(Rule::Normal {
        head: Atom::prop("v_p"),
        body: vec![BodyElem::pos(pred2("v_p", var("T1"), var("T2")))],
    });
    p.push(Rule::Normal {
        head: Atom::prop("violating"),
        body: vec![BodyElem::pos(Atom::prop("v_p"))],
    });
    p
}

/// Builds the violating-reason program for the accumulated reasons: stored
/// interpretations must stop being answer sets, and stored pairs must either
/// break or be dominated correctly.
pub fn build_vr_meta(
    ctx: &MetaContext,
    reasons: &[ViolatingReason],
) -> Result<Program, EngineError> {
    let mut p = Program::new();
    let mut next_vs = 1usize;
    let fresh = |next_vs: &mut usize| {
        let t = Term::Const(sym(&format!("v{next_vs}")));
        *next_vs += 1;
        t
    };

    for reason in reasons {
        match reason {
            ViolatingReason::Interpretation(i) => {
                let id = fresh(&mut next_vs);
                p.extend_from(&reify_interpretation(i, "in_vs", &id));
                p.push(Rule::Constraint {
                    body: vec![BodyElem::neg(pred1("nas", id.clone()))],
                });
                p.push(Rule::fact(pred1("vs", id)));
            }
            ViolatingReason::Pair { first, second, .. } => {
                let id1 = fresh(&mut next_vs);
                let id2 = fresh(&mut next_vs);
                p.extend_from(&reify_interpretation(first, "in_vs", &id1));
                p.extend_from(&reify_interpretation(second, "in_vs", &id2));
                p.push(Rule::fact(pred1("vs", id1.clone())));
                p.push(Rule::fact(pred1("vs", id2.clone())));
                p.extend_from(&dominates_program(&id1, &id2));
                p.push(Rule::Constraint {
                    body: vec![
                        BodyElem::neg(pred1("nas", id1.clone())),
                        BodyElem::neg(pred1("nas", id2.clone())),
                        BodyElem::neg(pred2("dom", id1, id2)),
                    ],
                });
            }
        }
    }

    // auxiliary rules: reduct computation for the background, hypothesis-
    // guarded reduct computation for the space, weak tuples over vs ids, and
    // the answer-set mismatch rules
    let task = &ctx.task;
    let x = var(META_VAR);
    for rule in task.background.non_weak() {
        p.extend_from(&ctx.reductify_source(rule)?);
    }
    for entry in task.space.entries() {
        let guard = pred1("in_h", Term::Const(entry.id.clone()));
        if entry.rule.is_weak() {
            let w = meta_weak(&entry.rule, "in_vs", "vs", &x);
            p.extend_from(&append_body_atom(&Program::from_rules([w]), &guard));
        } else {
            p.extend_from(&append_body_atom(&ctx.reductify_source(&entry.rule)?, &guard));
        }
    }
    let b_weaks: Vec<&Rule> = task.background.weak().collect();
    p.extend_from(&meta_weak_program(&b_weaks, "in_vs", "vs", &x));

    let mut universe = ctx.base_atoms.clone();
    universe.insert(Atom::bot());
    for atom in &universe {
        let a = atom_to_term(atom);
        p.push(Rule::Normal {
            head: pred1("nas", x.clone()),
            body: vec![
                BodyElem::pos(pred2("in_vs", a.clone(), x.clone())),
                BodyElem::neg(pred2("mmr", a.clone(), x.clone())),
            ],
        });
        p.push(Rule::Normal {
            head: pred1("nas", x.clone()),
            body: vec![
                BodyElem::neg(pred2("in_vs", a.clone(), x.clone())),
                BodyElem::pos(pred2("mmr", a, x.clone())),
            ],
        });
    }
    p.extend_from(&ctx.lv_facts());
    Ok(p)
}

/// Extracts the hypothesis and, when present, the violating reason from a
/// meta answer set: the `in_h` atoms name the hypothesis; `v_i` marks the
/// shared negative answer set as a violating interpretation; otherwise the
/// least `v_p(t1,t2)` names a violating pair.
pub fn decode_meta_answer_set(
    ctx: &MetaContext,
    a: &Interpretation,
) -> Result<(Hypothesis, Option<ViolatingReason>), MetaError> {
    let mut ids = BTreeSet::new();
    for atom in a.iter() {
        if atom.pred.as_ref() == "in_h" && atom.args.len() == 1 {
            match &atom.args[0] {
                Term::Const(id) if ctx.task.space.contains_id(id) => {
                    ids.insert(id.clone());
                }
                other => {
                    return Err(MetaError::MalformedMetaModel(format!(
                        "unknown hypothesis id {other}"
                    )))
                }
            }
        }
    }
    let hyp = Hypothesis { rule_ids: ids };

    let collect = |id: &Term| -> Result<Interpretation, MetaError> {
        let mut out = Interpretation::new();
        for atom in a.iter() {
            if atom.pred.as_ref() == "in_as" && atom.args.len() == 2 && &atom.args[1] == id {
                out.insert(term_to_atom(&atom.args[0])?);
            }
        }
        Ok(out)
    };

    if a.contains(&Atom::prop("v_i")) {
        let vi = collect(&ctx.negative_id())?;
        return Ok((hyp, Some(ViolatingReason::Interpretation(vi))));
    }

    let mut pairs: Vec<(Term, Term)> = a
        .iter()
        .filter(|atom| atom.pred.as_ref() == "v_p" && atom.args.len() == 2)
        .map(|atom| (atom.args[0].clone(), atom.args[1].clone()))
        .collect();
    pairs.sort();
    if let Some((t1, t2)) = pairs.into_iter().next() {
        let e1 = ctx.example_of_meta_id(&t1).ok_or_else(|| {
            MetaError::MalformedMetaModel(format!("unknown example id {t1}"))
        })?;
        let e2 = ctx.example_of_meta_id(&t2).ok_or_else(|| {
            MetaError::MalformedMetaModel(format!("unknown example id {t2}"))
        })?;
        let first = collect(&t1)?;
        let second = collect(&t2)?;
        return Ok((
            hyp,
            Some(ViolatingReason::Pair {
                first,
                second,
                ordering: (e1.id.clone(), e2.id.clone()),
            }),
        ));
    }
    Ok((hyp, None))
}
