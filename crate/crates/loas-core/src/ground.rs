//! Semi-naive bottom-up grounder.
//!
//! Instantiation is restricted to substitutions whose positive body atoms are
//! potentially derivable; choice-rule heads seed derivability. Rules that are
//! already ground pass through untouched, so grounding is the identity on
//! variable-free programs.

use std::collections::{HashMap, HashSet};

use crate::error::AspError;
use crate::parser::check_rule_safety;
use crate::syntax::{Atom, BodyElem, Program, Rule, Sym, SumBody, SumCoeff, Term};

/// Grounding configuration.
#[derive(Debug, Clone)]
pub struct GroundOptions {
    /// Maximum function-term nesting depth of derived atoms. Exceeding it
    /// raises [`AspError::NonFiniteGrounding`] instead of looping.
    pub max_fn_depth: usize,
}

impl Default for GroundOptions {
    fn default() -> Self {
        GroundOptions { max_fn_depth: 2 }
    }
}

type Binding = Vec<(Sym, Term)>;

fn lookup(b: &Binding, v: &Sym) -> Option<Term> {
    b.iter().rev().find(|(name, _)| name == v).map(|(_, t)| t.clone())
}

fn unify_term(pattern: &Term, value: &Term, b: &mut Binding) -> bool {
    match pattern {
        Term::Var(v) => match lookup(b, v) {
            Some(bound) => &bound == value,
            None => {
                b.push((v.clone(), value.clone()));
                true
            }
        },
        Term::Const(c) => matches!(value, Term::Const(d) if c == d),
        Term::Int(n) => matches!(value, Term::Int(m) if n == m),
        Term::Func(f, args) => match value {
            Term::Func(g, vargs) if f == g && args.len() == vargs.len() => {
                args.iter().zip(vargs).all(|(p, v)| unify_term(p, v, b))
            }
            _ => false,
        },
    }
}

fn unify_atom(pattern: &Atom, value: &Atom, b: &mut Binding) -> bool {
    pattern.pred == value.pred
        && pattern.args.len() == value.args.len()
        && pattern.args.iter().zip(&value.args).all(|(p, v)| unify_term(p, v, b))
}

pub(crate) fn subst_term(t: &Term, b: &Binding) -> Term {
    match t {
        Term::Var(v) => lookup(b, v).unwrap_or_else(|| t.clone()),
        Term::Func(f, args) => Term::Func(f.clone(), args.iter().map(|a| subst_term(a, b)).collect()),
        _ => t.clone(),
    }
}

pub(crate) fn subst_atom(a: &Atom, b: &Binding) -> Atom {
    Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| subst_term(t, b)).collect() }
}

/// Ground atoms indexed by predicate and arity, in derivation order.
#[derive(Default)]
struct FactIndex {
    by_pred: HashMap<(Sym, usize), Vec<Atom>>,
    all: HashSet<Atom>,
}

impl FactIndex {
    fn insert(&mut self, atom: Atom) -> bool {
        if self.all.insert(atom.clone()) {
            self.by_pred.entry((atom.pred.clone(), atom.arity())).or_default().push(atom);
            true
        } else {
            false
        }
    }

    fn candidates(&self, pattern: &Atom) -> &[Atom] {
        self.by_pred
            .get(&(pattern.pred.clone(), pattern.arity()))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    fn contains(&self, atom: &Atom) -> bool {
        self.all.contains(atom)
    }
}

fn positive_atoms(rule: &Rule) -> Vec<&Atom> {
    rule.body()
        .iter()
        .filter_map(|e| match e {
            BodyElem::Lit(l) if !l.negated => Some(&l.atom),
            _ => None,
        })
        .collect()
}

/// Enumerates bindings that match every positive atom against `facts`. When
/// `delta_at` is set, the atom at that position must match inside `delta`.
fn for_each_match(
    pos: &[&Atom],
    facts: &FactIndex,
    delta_at: Option<(usize, &FactIndex)>,
    binding: &mut Binding,
    emit: &mut dyn FnMut(&Binding),
) {
    fn go(
        pos: &[&Atom],
        i: usize,
        facts: &FactIndex,
        delta_at: Option<(usize, &FactIndex)>,
        binding: &mut Binding,
        emit: &mut dyn FnMut(&Binding),
    ) {
        if i == pos.len() {
            emit(binding);
            return;
        }
        let source = match delta_at {
            Some((d, delta)) if d == i => delta,
            _ => facts,
        };
        let pattern = pos[i];
        let mark = binding.len();
        // candidate slices are owned by the index; clone the atoms we touch
        let cands: Vec<Atom> = source.candidates(pattern).to_vec();
        for cand in &cands {
            if unify_atom(pattern, cand, binding) {
                go(pos, i + 1, facts, delta_at, binding, emit);
            }
            binding.truncate(mark);
        }
    }
    go(pos, 0, facts, delta_at, binding, emit);
}

fn rule_heads(rule: &Rule) -> Vec<&Atom> {
    match rule {
        Rule::Normal { head, .. } => vec![head],
        Rule::Choice { heads, .. } => heads.iter().collect(),
        _ => Vec::new(),
    }
}

fn eval_lt(a: &Term, b: &Term) -> Result<bool, AspError> {
    match (a.as_int(), b.as_int()) {
        (Some(x), Some(y)) => Ok(x < y),
        _ => Err(AspError::Grounding(format!("comparison {a} < {b} on non-integer terms"))),
    }
}

/// Whether the binding passes all ground comparison elements of the rule.
/// Comparisons over unbound variables fail the whole instantiation.
fn comparisons_hold(rule: &Rule, b: &Binding) -> Result<bool, AspError> {
    for e in rule.body() {
        if let BodyElem::Lt(lhs, rhs) = e {
            let (l, r) = (subst_term(lhs, b), subst_term(rhs, b));
            if !eval_lt(&l, &r)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn expand_sum(sum: &SumBody, b: &Binding, facts: &FactIndex) -> Result<SumBody, AspError> {
    let mut elems = Vec::new();
    for (schema, coeff) in &sum.elems {
        let pattern = subst_atom(schema, b);
        if pattern.is_ground() {
            if facts.contains(&pattern) {
                let c = match coeff {
                    SumCoeff::Int(n) => *n,
                    SumCoeff::Plus(v) | SumCoeff::Minus(v) => {
                        return Err(AspError::Grounding(format!(
                            "sum coefficient variable {v} not bound in ground element {pattern}"
                        )))
                    }
                };
                elems.push((pattern, SumCoeff::Int(c)));
            }
            continue;
        }
        let mut local = b.clone();
        let mark = local.len();
        let cands: Vec<Atom> = facts.candidates(&pattern).to_vec();
        for cand in &cands {
            if unify_atom(&pattern, cand, &mut local) {
                let c = match coeff {
                    SumCoeff::Int(n) => *n,
                    SumCoeff::Plus(v) => match lookup(&local, v).and_then(|t| t.as_int()) {
                        Some(n) => n,
                        None => {
                            return Err(AspError::Grounding(format!(
                                "sum weight {v} is not an integer in {cand}"
                            )))
                        }
                    },
                    SumCoeff::Minus(v) => match lookup(&local, v).and_then(|t| t.as_int()) {
                        Some(n) => -n,
                        None => {
                            return Err(AspError::Grounding(format!(
                                "sum weight {v} is not an integer in {cand}"
                            )))
                        }
                    },
                };
                elems.push((cand.clone(), SumCoeff::Int(c)));
            }
            local.truncate(mark);
        }
    }
    Ok(SumBody { elems })
}

/// Instantiates the non-positional parts of a rule under a binding. Returns
/// `None` when a comparison fails or a sum has no possible contribution.
fn instantiate(rule: &Rule, b: &Binding, facts: &FactIndex) -> Result<Option<Rule>, AspError> {
    if !comparisons_hold(rule, b)? {
        return Ok(None);
    }
    let mut body = Vec::new();
    for e in rule.body() {
        match e {
            BodyElem::Lit(l) => {
                body.push(BodyElem::Lit(crate::syntax::Literal {
                    atom: subst_atom(&l.atom, b),
                    negated: l.negated,
                }));
            }
            BodyElem::Lt(..) => {} // already evaluated
            BodyElem::Sum(s) => {
                let ground = expand_sum(s, b, facts)?;
                if ground.elems.is_empty() {
                    // empty sum is 0, never < 0
                    return Ok(None);
                }
                body.push(BodyElem::Sum(ground));
            }
            BodyElem::Card(c) => {
                let atoms: Vec<Atom> = c.atoms.iter().map(|a| subst_atom(a, b)).collect();
                if let Some(a) = atoms.iter().find(|a| !a.is_ground()) {
                    return Err(AspError::Grounding(format!(
                        "cardinality element {a} not ground after substitution"
                    )));
                }
                body.push(BodyElem::Card(crate::syntax::CardBody {
                    lower: c.lower,
                    upper: c.upper,
                    atoms,
                }));
            }
        }
    }
    let out = match rule {
        Rule::Normal { head, .. } => Rule::Normal { head: subst_atom(head, b), body },
        Rule::Constraint { .. } => Rule::Constraint { body },
        Rule::Choice { lower, upper, heads, .. } => Rule::Choice {
            lower: *lower,
            upper: *upper,
            heads: heads.iter().map(|h| subst_atom(h, b)).collect(),
            body,
        },
        Rule::Weak { weight, level, terms, .. } => {
            let weight = subst_term(weight, b);
            let level = subst_term(level, b);
            if weight.as_int().is_none() || level.as_int().is_none() {
                return Err(AspError::Grounding(format!(
                    "weak constraint weight/level not integers after grounding: [{weight}@{level}]"
                )));
            }
            Rule::Weak {
                body,
                weight,
                level,
                terms: terms.iter().map(|t| subst_term(t, b)).collect(),
            }
        }
    };
    let ground = match &out {
        Rule::Normal { head, body } => head.is_ground() && body_ground(body),
        Rule::Constraint { body } => body_ground(body),
        Rule::Choice { heads, body, .. } => heads.iter().all(Atom::is_ground) && body_ground(body),
        Rule::Weak { body, terms, .. } => body_ground(body) && terms.iter().all(Term::is_ground),
    };
    if !ground {
        return Err(AspError::Grounding(format!("instance not ground: {out}")));
    }
    Ok(Some(out))
}

fn body_ground(body: &[BodyElem]) -> bool {
    body.iter().all(|e| match e {
        BodyElem::Lit(l) => l.atom.is_ground(),
        BodyElem::Lt(a, b) => a.is_ground() && b.is_ground(),
        BodyElem::Sum(s) => s.elems.iter().all(|(a, _)| a.is_ground()),
        BodyElem::Card(c) => c.atoms.iter().all(Atom::is_ground),
    })
}

/// Computes the set of potentially derivable ground atoms.
fn derivable(p: &Program, opts: &GroundOptions) -> Result<FactIndex, AspError> {
    let mut facts = FactIndex::default();
    let rules: Vec<&Rule> = p.iter().collect();

    let check_depth = |atom: &Atom| -> Result<(), AspError> {
        if atom.depth() > opts.max_fn_depth {
            Err(AspError::NonFiniteGrounding { bound: opts.max_fn_depth, atom: atom.to_string() })
        } else {
            Ok(())
        }
    };

    // round 0: rules whose positive body is empty
    let mut delta = FactIndex::default();
    for rule in &rules {
        if positive_atoms(rule).is_empty() {
            let b = Binding::new();
            if comparisons_hold(rule, &b)? {
                for head in rule_heads(rule) {
                    if head.is_ground() {
                        check_depth(head)?;
                        if facts.insert(head.clone()) {
                            delta.insert(head.clone());
                        }
                    }
                }
            }
        }
    }

    while !delta.all.is_empty() {
        let mut next = FactIndex::default();
        for rule in &rules {
            let pos = positive_atoms(rule);
            if pos.is_empty() {
                continue;
            }
            let heads = rule_heads(rule);
            if heads.is_empty() {
                continue;
            }
            for d in 0..pos.len() {
                let mut binding = Binding::new();
                let mut derived: Vec<Atom> = Vec::new();
                for_each_match(&pos, &facts, Some((d, &delta)), &mut binding, &mut |b| {
                    for head in &heads {
                        derived.push(subst_atom(head, b));
                    }
                });
                for atom in derived {
                    check_depth(&atom)?;
                    if facts.insert(atom.clone()) {
                        next.insert(atom);
                    }
                }
            }
        }
        delta = next;
    }
    Ok(facts)
}

/// Grounds a program. Rules must be safe.
pub fn ground(p: &Program, opts: &GroundOptions) -> Result<Program, AspError> {
    for (i, rule) in p.iter().enumerate() {
        check_rule_safety(rule, i)?;
    }
    let facts = derivable(p, opts)?;
    let mut out = Program::new();
    for rule in p.iter() {
        if rule.is_ground() {
            out.push(rule.clone());
            continue;
        }
        let pos = positive_atoms(rule);
        let mut binding = Binding::new();
        let mut bindings: Vec<Binding> = Vec::new();
        for_each_match(&pos, &facts, None, &mut binding, &mut |b| bindings.push(b.clone()));
        let mut instances = Vec::new();
        for b in &bindings {
            if let Some(inst) = instantiate(rule, b, &facts)? {
                instances.push(inst);
            }
        }
        instances.sort();
        instances.dedup();
        for inst in instances {
            out.push(inst);
        }
    }
    Ok(out)
}

/// All ground atoms occurring anywhere in a ground program.
pub fn herbrand_atoms(p: &Program) -> std::collections::BTreeSet<Atom> {
    let mut out = std::collections::BTreeSet::new();
    for rule in p.iter() {
        for atom in rule.atoms() {
            if atom.is_ground() {
                out.insert(atom.clone());
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn g(text: &str) -> Program {
        ground(&parse_program(text).unwrap(), &GroundOptions::default()).unwrap()
    }

    #[test]
    fn identity_on_ground_programs() {
        let p = parse_program("p :- not q. q :- not p. :- p, q.").unwrap();
        let gp = ground(&p, &GroundOptions::default()).unwrap();
        assert_eq!(p, gp);
    }

    #[test]
    fn choice_heads_seed_derivability() {
        let gp = g("slot(m,1). slot(m,2). slot(t,1). slot(t,2).\n\
                    0 {assign(D,S)} 1 :- slot(D,S).\n\
                    some :- assign(D,S).");
        let text = gp.to_string();
        assert!(text.contains("0 {assign(m,1)} 1 :- slot(m,1)."));
        assert!(text.contains("some :- assign(t,2)."));
        // 4 facts + 4 choice instances + 4 some-instances
        assert_eq!(gp.len(), 12);
    }

    #[test]
    fn irrelevant_instances_are_omitted() {
        let gp = g("p(1). q(X) :- p(X), r(X).");
        assert_eq!(gp.len(), 1, "r is never derivable, so q has no instances");
    }

    #[test]
    fn weak_constraints_ground_with_terms() {
        let gp = g("p(1). p(2). :~ p(V).[1@2, V]");
        let text = gp.to_string();
        assert!(text.contains(":~ p(1).[1@2, 1]"));
        assert!(text.contains(":~ p(2).[1@2, 2]"));
    }

    #[test]
    fn non_integer_weight_is_an_error() {
        let p = parse_program("p(a). :~ p(V).[V@1, V]").unwrap();
        let e = ground(&p, &GroundOptions::default()).unwrap_err();
        assert!(matches!(e, AspError::Grounding(_)));
    }

    #[test]
    fn function_nesting_bound_detects_growth() {
        let p = parse_program("n(z). n(s(X)) :- n(X).").unwrap();
        let e = ground(&p, &GroundOptions::default()).unwrap_err();
        assert!(matches!(e, AspError::NonFiniteGrounding { .. }));
    }

    #[test]
    fn comparison_prunes_instances() {
        let gp = g("lv(1). lv(2). big(L2) :- lv(L), lv(L2), L < L2.");
        let text = gp.to_string();
        assert!(text.contains("big(2) :- lv(1), lv(2)."));
        assert!(!text.contains("big(1)"));
    }

    #[test]
    fn sum_bodies_expand_over_derivable_atoms() {
        let gp = g("w(1,1,a,t1). w(2,1,b,t2). lv(1).\n\
                    dom(t1,t2) :- lv(L), #sum{w(W,L,A,t1)=W, w(W,L,A,t2)=-W} < 0.");
        let text = gp.to_string();
        assert!(text.contains("dom(t1,t2) :- lv(1), #sum{w(1,1,a,t1)=1, w(2,1,b,t2)=-2} < 0."));
    }
}
