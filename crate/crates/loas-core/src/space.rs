//! Hypothesis search spaces: mode declarations, the bias with ordering, rule
//! enumeration with canonicalisation, and rule costs.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::SpaceError;
use crate::syntax::{sym, Atom, BodyElem, Literal, Program, Rule, Sym, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Placeholder {
    Var,
    Constant,
}

/// A predicate with `v`/`c` placeholder arguments, e.g. `assign(v,v)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeDeclaration {
    pub pred: Sym,
    pub placeholders: Vec<Placeholder>,
}

impl ModeDeclaration {
    pub fn arity(&self) -> usize {
        self.placeholders.len()
    }
}

/// Whether replacing the `v` placeholders of `m` by variables and the `c`
/// placeholders by constants can yield `a`.
pub fn atom_compatible(a: &Atom, m: &ModeDeclaration) -> bool {
    a.pred == m.pred
        && a.arity() == m.arity()
        && a.args.iter().zip(&m.placeholders).all(|(t, p)| match p {
            Placeholder::Var => matches!(t, Term::Var(_)),
            Placeholder::Constant => matches!(t, Term::Const(_) | Term::Int(_)),
        })
}

#[derive(Debug, Clone)]
pub struct SpaceLimits {
    pub max_body: usize,
    pub max_vars: usize,
    pub max_choice_heads: usize,
    pub constants: BTreeSet<Sym>,
    pub cap: usize,
}

impl Default for SpaceLimits {
    fn default() -> Self {
        SpaceLimits {
            max_body: 3,
            max_vars: 3,
            max_choice_heads: 2,
            constants: BTreeSet::new(),
            cap: 100_000,
        }
    }
}

/// A mode bias with ordering: head, body, and weak-body declarations, the
/// admissible weights, and the number of priority levels.
#[derive(Debug, Clone)]
pub struct ModeBias {
    pub head_decls: Vec<ModeDeclaration>,
    pub body_decls: Vec<ModeDeclaration>,
    pub ordering_decls: Vec<ModeDeclaration>,
    pub weights: BTreeSet<i64>,
    /// Weak-constraint levels range over `0..max_level`.
    pub max_level: i64,
    pub limits: SpaceLimits,
}

impl Default for ModeBias {
    fn default() -> Self {
        ModeBias {
            head_decls: Vec::new(),
            body_decls: Vec::new(),
            ordering_decls: Vec::new(),
            weights: BTreeSet::new(),
            max_level: 1,
            limits: SpaceLimits::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpaceEntry {
    pub id: Sym,
    pub rule: Rule,
    pub cost: u64,
}

/// The hypothesis search space: rules with stable identifiers and costs.
#[derive(Debug, Clone, Default)]
pub struct SearchSpace {
    entries: Vec<SpaceEntry>,
    by_id: HashMap<Sym, usize>,
}

impl SearchSpace {
    pub fn from_canonical_rules<I: IntoIterator<Item = Rule>>(rules: I) -> Self {
        let mut space = SearchSpace::default();
        for (i, rule) in rules.into_iter().enumerate() {
            let id = sym(&format!("r{}", i + 1));
            space.insert(id, rule);
        }
        space
    }

    pub fn from_named_rules<I: IntoIterator<Item = (Sym, Rule)>>(rules: I) -> Self {
        let mut space = SearchSpace::default();
        for (id, rule) in rules {
            space.insert(id, rule);
        }
        space
    }

    fn insert(&mut self, id: Sym, rule: Rule) {
        let cost = rule_cost(&rule);
        self.by_id.insert(id.clone(), self.entries.len());
        self.entries.push(SpaceEntry { id, rule, cost });
    }

    pub fn entries(&self) -> &[SpaceEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: &Sym) -> Option<&SpaceEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub fn contains_id(&self, id: &Sym) -> bool {
        self.by_id.contains_key(id)
    }

    /// All rules as one program (weak and non-weak alike).
    pub fn rules_program(&self) -> Program {
        self.entries.iter().map(|e| e.rule.clone()).collect()
    }

    /// Integer levels occurring in the space's weak constraints.
    pub fn levels(&self) -> BTreeSet<i64> {
        self.entries
            .iter()
            .filter_map(|e| match &e.rule {
                Rule::Weak { level, .. } => level.as_int(),
                _ => None,
            })
            .collect()
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1u64;
    for i in 0..k {
        out = out * (n - i) / (i + 1);
    }
    out
}

fn count_lits(body: &[BodyElem]) -> u64 {
    body.iter().filter(|e| matches!(e, BodyElem::Lit(_))).count() as u64
}

/// Length of a rule for optimisation purposes. Choice rules count as their
/// expansion into disjunctions of conjunctions: `k` literals per admissible
/// head subset. Weak constraints count only their body literals.
pub fn rule_cost(rule: &Rule) -> u64 {
    match rule {
        Rule::Normal { body, .. } => 1 + count_lits(body),
        Rule::Constraint { body } => count_lits(body),
        Rule::Choice { lower, upper, heads, body } => {
            let k = heads.len() as u64;
            let subsets: u64 =
                (*lower..=*upper).map(|s| binomial(k, s.max(0) as u64)).sum();
            count_lits(body) + k * subsets
        }
        Rule::Weak { body, .. } => count_lits(body),
    }
}

// -- canonical forms ---------------------------------------------------------

fn rename_term(t: &Term, map: &HashMap<Sym, Sym>) -> Term {
    match t {
        Term::Var(v) => Term::Var(map.get(v).cloned().unwrap_or_else(|| v.clone())),
        Term::Func(f, args) => {
            Term::Func(f.clone(), args.iter().map(|a| rename_term(a, map)).collect())
        }
        _ => t.clone(),
    }
}

fn rename_atom(a: &Atom, map: &HashMap<Sym, Sym>) -> Atom {
    Atom { pred: a.pred.clone(), args: a.args.iter().map(|t| rename_term(t, map)).collect() }
}

pub(crate) fn rename_vars(rule: &Rule, map: &HashMap<Sym, Sym>) -> Rule {
    let body = |body: &[BodyElem]| {
        body.iter()
            .map(|e| match e {
                BodyElem::Lit(l) => BodyElem::Lit(Literal {
                    atom: rename_atom(&l.atom, map),
                    negated: l.negated,
                }),
                BodyElem::Lt(a, b) => BodyElem::Lt(rename_term(a, map), rename_term(b, map)),
                other => other.clone(),
            })
            .collect::<Vec<_>>()
    };
    match rule {
        Rule::Normal { head, body: b } => {
            Rule::Normal { head: rename_atom(head, map), body: body(b) }
        }
        Rule::Constraint { body: b } => Rule::Constraint { body: body(b) },
        Rule::Choice { lower, upper, heads, body: b } => Rule::Choice {
            lower: *lower,
            upper: *upper,
            heads: heads.iter().map(|h| rename_atom(h, map)).collect(),
            body: body(b),
        },
        Rule::Weak { body: b, weight, level, terms } => Rule::Weak {
            body: body(b),
            weight: rename_term(weight, map),
            level: rename_term(level, map),
            terms: terms.iter().map(|t| rename_term(t, map)).collect(),
        },
    }
}

fn sort_rule(rule: &Rule) -> Rule {
    let sort_body = |body: &[BodyElem]| {
        let mut b = body.to_vec();
        b.sort_by(|x, y| match (x, y) {
            (BodyElem::Lit(a), BodyElem::Lit(b)) => {
                (a.negated, &a.atom).cmp(&(b.negated, &b.atom))
            }
            _ => std::cmp::Ordering::Equal,
        });
        b
    };
    match rule {
        Rule::Normal { head, body } => Rule::Normal { head: head.clone(), body: sort_body(body) },
        Rule::Constraint { body } => Rule::Constraint { body: sort_body(body) },
        Rule::Choice { lower, upper, heads, body } => {
            let mut hs = heads.clone();
            hs.sort();
            Rule::Choice { lower: *lower, upper: *upper, heads: hs, body: sort_body(body) }
        }
        Rule::Weak { body, weight, level, terms } => Rule::Weak {
            body: sort_body(body),
            weight: weight.clone(),
            level: level.clone(),
            terms: terms.clone(),
        },
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k % 2 == 0 {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}

/// The canonical representative of the rule's class under variable renaming
/// and body reordering: variables renamed `V1, V2, ...`, body literals sorted
/// by (negation, predicate, args), minimal over all renamings.
pub fn canonical_rule(rule: &Rule) -> Rule {
    let vars = rule.vars();
    if vars.is_empty() {
        return sort_rule(rule);
    }
    let mut best: Option<(String, Rule)> = None;
    for perm in permutations(vars.len()) {
        let map: HashMap<Sym, Sym> = vars
            .iter()
            .zip(&perm)
            .map(|(v, &i)| (v.clone(), sym(&format!("V{}", i + 1))))
            .collect();
        let candidate = sort_rule(&rename_vars(rule, &map));
        let key = candidate.to_string();
        if best.as_ref().is_none_or(|(bk, _)| key < *bk) {
            best = Some((key, candidate));
        }
    }
    best.unwrap().1
}

/// α-equivalence modulo body reordering.
pub fn rules_equivalent(a: &Rule, b: &Rule) -> bool {
    canonical_rule(a) == canonical_rule(b)
}

// -- enumeration ---------------------------------------------------------

/// Ground or variable atoms compatible with the declarations, over variables
/// `V1..Vmax` and the constant pool.
fn declaration_atoms(decls: &[ModeDeclaration], limits: &SpaceLimits) -> Vec<Atom> {
    let vars: Vec<Term> =
        (1..=limits.max_vars).map(|i| Term::Var(sym(&format!("V{i}")))).collect();
    let consts: Vec<Term> = limits.constants.iter().map(|c| Term::Const(c.clone())).collect();
    let mut out = Vec::new();
    for decl in decls {
        let choices: Vec<&[Term]> = decl
            .placeholders
            .iter()
            .map(|p| match p {
                Placeholder::Var => vars.as_slice(),
                Placeholder::Constant => consts.as_slice(),
            })
            .collect();
        let mut stack: Vec<Vec<Term>> = vec![Vec::new()];
        for slot in &choices {
            let mut next = Vec::new();
            for partial in &stack {
                for t in *slot {
                    let mut p = partial.clone();
                    p.push(t.clone());
                    next.push(p);
                }
            }
            stack = next;
        }
        for args in stack {
            out.push(Atom { pred: decl.pred.clone(), args });
        }
    }
    out.sort();
    out.dedup();
    out
}

fn literal_is_safe_body(body: &[Literal]) -> bool {
    let mut positive = Vec::new();
    for l in body {
        if !l.negated {
            l.atom.vars_into(&mut positive);
        }
    }
    let mut all = Vec::new();
    for l in body {
        l.atom.vars_into(&mut all);
    }
    all.iter().all(|v| positive.contains(v))
}

/// All bodies of 1..=max_body distinct literals over the pool, without
/// internally contradictory pairs.
fn enumerate_bodies(pool: &[Atom], max_body: usize) -> Vec<Vec<Literal>> {
    let lits: Vec<Literal> = pool
        .iter()
        .flat_map(|a| [Literal::pos(a.clone()), Literal::neg(a.clone())])
        .collect();
    let mut out = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    fn go(
        lits: &[Literal],
        from: usize,
        max: usize,
        current: &mut Vec<Literal>,
        out: &mut Vec<Vec<Literal>>,
    ) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == max {
            return;
        }
        for i in from..lits.len() {
            let cand = &lits[i];
            if current.iter().any(|l| l.atom == cand.atom && l.negated != cand.negated) {
                continue; // contradictory body never fires
            }
            current.push(cand.clone());
            go(lits, i + 1, max, current, out);
            current.pop();
        }
    }
    go(&lits, 0, max_body, &mut current, &mut out);
    out
}

fn body_elems(body: &[Literal]) -> Vec<BodyElem> {
    body.iter().cloned().map(BodyElem::Lit).collect()
}

/// Terms of the body literals in first-appearance order, each term once.
fn body_terms(body: &[Literal]) -> Vec<Term> {
    let mut out = Vec::new();
    for l in body {
        for t in &l.atom.args {
            if !out.contains(t) {
                out.push(t.clone());
            }
        }
    }
    out
}

/// Builds the search space defined by a mode bias with ordering: the
/// LAS rules over `(head_decls, body_decls)` plus every safe weak constraint
/// over `ordering_decls` with weight in `weights` and level in
/// `0..max_level`, canonicalised and deduplicated.
pub fn build_search_space(bias: &ModeBias) -> Result<SearchSpace, SpaceError> {
    let limits = &bias.limits;
    let mut canon: BTreeMap<String, Rule> = BTreeMap::new();
    let add = |rule: Rule, canon: &mut BTreeMap<String, Rule>| -> Result<(), SpaceError> {
        let c = canonical_rule(&rule);
        canon.insert(c.to_string(), c);
        if canon.len() > limits.cap {
            return Err(SpaceError::Explosion { cap: limits.cap });
        }
        Ok(())
    };

    let rule_safe = |rule: &Rule| {
        let mut positive = Vec::new();
        for e in rule.body() {
            if let BodyElem::Lit(l) = e {
                if !l.negated {
                    l.atom.vars_into(&mut positive);
                }
            }
        }
        rule.vars().iter().all(|v| positive.contains(v))
    };

    // rules over the head/body declarations
    if !bias.head_decls.is_empty() || !bias.body_decls.is_empty() {
        let head_atoms = declaration_atoms(&bias.head_decls, limits);
        let body_pool = declaration_atoms(&bias.body_decls, limits);
        let mut bodies = enumerate_bodies(&body_pool, limits.max_body);
        bodies.retain(|b| literal_is_safe_body(b));
        let with_empty: Vec<Vec<Literal>> =
            std::iter::once(Vec::new()).chain(bodies.iter().cloned()).collect();

        // hard constraints (nonempty body only)
        for body in &bodies {
            add(Rule::Constraint { body: body_elems(body) }, &mut canon)?;
        }
        // normal rules
        for head in &head_atoms {
            for body in &with_empty {
                let rule = Rule::Normal { head: head.clone(), body: body_elems(body) };
                if rule_safe(&rule) {
                    add(rule, &mut canon)?;
                }
            }
        }
        // choice rules
        let head_subsets = subsets_up_to(&head_atoms, limits.max_choice_heads);
        for heads in &head_subsets {
            let k = heads.len() as i64;
            for lower in 0..=k {
                for upper in lower..=k {
                    for body in &with_empty {
                        let rule = Rule::Choice {
                            lower,
                            upper,
                            heads: heads.clone(),
                            body: body_elems(body),
                        };
                        if rule_safe(&rule) {
                            add(rule, &mut canon)?;
                        }
                    }
                }
            }
        }
    }

    // weak constraints over the ordering declarations
    if !bias.ordering_decls.is_empty() && !bias.weights.is_empty() {
        let pool = declaration_atoms(&bias.ordering_decls, limits);
        let mut bodies = enumerate_bodies(&pool, limits.max_body);
        bodies.retain(|b| literal_is_safe_body(b));
        for body in &bodies {
            let terms = body_terms(body);
            for &weight in &bias.weights {
                for level in 0..bias.max_level {
                    add(
                        Rule::Weak {
                            body: body_elems(body),
                            weight: Term::Int(weight),
                            level: Term::Int(level),
                            terms: terms.clone(),
                        },
                        &mut canon,
                    )?;
                }
            }
        }
    }

    Ok(SearchSpace::from_canonical_rules(canon.into_values()))
}

fn subsets_up_to(atoms: &[Atom], max: usize) -> Vec<Vec<Atom>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn go(atoms: &[Atom], from: usize, max: usize, current: &mut Vec<Atom>, out: &mut Vec<Vec<Atom>>) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == max {
            return;
        }
        for i in from..atoms.len() {
            current.push(atoms[i].clone());
            go(atoms, i + 1, max, current, out);
            current.pop();
        }
    }
    go(atoms, 0, max, &mut current, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn decl(pred: &str, ps: &[Placeholder]) -> ModeDeclaration {
        ModeDeclaration { pred: sym(pred), placeholders: ps.to_vec() }
    }

    fn first_rule(text: &str) -> Rule {
        parse_program(text).unwrap().iter().next().unwrap().clone()
    }

    #[test]
    fn compatibility() {
        let m = decl("assign", &[Placeholder::Var, Placeholder::Var]);
        assert!(atom_compatible(&first_head("p :- assign(D,S)."), &m));
        let tc = decl("type", &[Placeholder::Var, Placeholder::Constant]);
        let a = Atom::new("type", vec![Term::Var(sym("D")), Term::Const(sym("c1"))]);
        assert!(atom_compatible(&a, &tc));
        let slot = Atom::new("slot", vec![Term::Const(sym("m")), Term::Int(1)]);
        assert!(!atom_compatible(&slot, &m));
        // arity must match exactly
        let t3 = Atom::new(
            "type",
            vec![Term::Var(sym("D")), Term::Var(sym("S")), Term::Const(sym("c1"))],
        );
        assert!(!atom_compatible(&t3, &tc));
    }

    fn first_head(text: &str) -> Atom {
        match first_rule(text) {
            Rule::Normal { body, .. } => match &body[0] {
                BodyElem::Lit(l) => l.atom.clone(),
                _ => panic!(),
            },
            _ => panic!(),
        }
    }

    #[test]
    fn paper_aggregate_cost_is_six() {
        let r = first_rule("1 {p; q} 2.");
        assert_eq!(rule_cost(&r), 6);
    }

    #[test]
    fn normal_rule_cost_counts_literals() {
        assert_eq!(rule_cost(&first_rule("p :- q, not r.")), 3);
        assert_eq!(rule_cost(&first_rule(":~ assign(D,S), type(D,S,c1).[1@2, D, S]")), 2);
        assert_eq!(rule_cost(&first_rule("p.")), 1);
        assert_eq!(rule_cost(&first_rule(":- q, r.")), 2);
    }

    #[test]
    fn canonical_form_merges_alpha_variants() {
        let a = first_rule(":~ assign(D,S1), assign(D,S2), neq(S1,S2).[1@1, D, S1, S2]");
        let b = first_rule(":~ assign(X,B), neq(A,B), assign(X,A).[1@1, X, A, B]");
        assert!(rules_equivalent(&a, &b));
        let c = first_rule(":~ assign(D,S1), assign(D,S2), neq(S2,S1).[1@1, D, S1, S2]");
        assert!(!rules_equivalent(&a, &c));
    }

    #[test]
    fn empty_bias_yields_empty_space() {
        let space = build_search_space(&ModeBias::default()).unwrap();
        assert!(space.is_empty());
    }

    #[test]
    fn weak_space_contains_target_rule() {
        let mut bias = ModeBias {
            ordering_decls: vec![
                decl("assign", &[Placeholder::Var, Placeholder::Var]),
                decl("neq", &[Placeholder::Var, Placeholder::Var]),
            ],
            weights: [1].into_iter().collect(),
            max_level: 2,
            ..Default::default()
        };
        bias.limits.max_body = 3;
        bias.limits.max_vars = 3;
        let space = build_search_space(&bias).unwrap();
        let target = first_rule(":~ assign(D,S1), assign(D,S2), neq(S1,S2).[1@1, D, S1, S2]");
        assert!(
            space.entries().iter().any(|e| rules_equivalent(&e.rule, &target)),
            "space of {} entries misses the target",
            space.len()
        );
        // every entry is safe and parses back to itself
        for e in space.entries() {
            let text = e.rule.to_string();
            let reparsed = parse_program(&text).unwrap();
            assert_eq!(reparsed.iter().next().unwrap(), &e.rule, "round-trip failed for {text}");
        }
    }

    #[test]
    fn weights_multiply_weak_entries() {
        let mk = |weights: &[i64]| {
            let mut bias = ModeBias {
                ordering_decls: vec![decl("assign", &[Placeholder::Var, Placeholder::Var])],
                weights: weights.iter().copied().collect(),
                max_level: 2,
                ..Default::default()
            };
            bias.limits.max_body = 2;
            build_search_space(&bias).unwrap().len()
        };
        assert_eq!(mk(&[-1, 1]), 2 * mk(&[1]));
    }

    #[test]
    fn monotone_in_levels_and_weights() {
        let mk = |weights: &[i64], max_level: i64| {
            let mut bias = ModeBias {
                ordering_decls: vec![decl("p", &[Placeholder::Var])],
                weights: weights.iter().copied().collect(),
                max_level,
                ..Default::default()
            };
            bias.limits.max_body = 2;
            bias.limits.max_vars = 2;
            let space = build_search_space(&bias).unwrap();
            space
                .entries()
                .iter()
                .map(|e| e.rule.to_string())
                .collect::<std::collections::BTreeSet<_>>()
        };
        let small = mk(&[1], 1);
        let more_weights = mk(&[-1, 1], 1);
        let more_levels = mk(&[1], 2);
        assert!(small.is_subset(&more_weights));
        assert!(small.is_subset(&more_levels));
    }

    #[test]
    fn no_two_entries_alpha_equivalent() {
        let mut bias = ModeBias {
            ordering_decls: vec![decl("assign", &[Placeholder::Var, Placeholder::Var])],
            weights: [1].into_iter().collect(),
            max_level: 1,
            ..Default::default()
        };
        bias.limits.max_body = 2;
        let space = build_search_space(&bias).unwrap();
        for (i, a) in space.entries().iter().enumerate() {
            for b in &space.entries()[i + 1..] {
                assert!(!rules_equivalent(&a.rule, &b.rule), "{} ~ {}", a.rule, b.rule);
            }
        }
    }

    #[test]
    fn cap_is_enforced() {
        let mut bias = ModeBias {
            ordering_decls: vec![
                decl("assign", &[Placeholder::Var, Placeholder::Var]),
                decl("neq", &[Placeholder::Var, Placeholder::Var]),
            ],
            weights: [-1, 1].into_iter().collect(),
            max_level: 2,
            ..Default::default()
        };
        bias.limits.cap = 10;
        assert!(matches!(
            build_search_space(&bias),
            Err(SpaceError::Explosion { cap: 10 })
        ));
    }

    #[test]
    fn las_rules_constraints_and_choices() {
        let mut bias = ModeBias {
            head_decls: vec![decl("p", &[])],
            body_decls: vec![decl("q", &[]), decl("r", &[])],
            weights: BTreeSet::new(),
            max_level: 1,
            ..Default::default()
        };
        bias.limits.max_body = 2;
        let space = build_search_space(&bias).unwrap();
        let texts: BTreeSet<String> =
            space.entries().iter().map(|e| e.rule.to_string()).collect();
        assert!(texts.contains("p."));
        assert!(texts.contains("p :- q, not r."));
        assert!(texts.contains(":- q, r."));
        assert!(texts.contains("0 {p} 1."));
        assert!(texts.contains("1 {p} 1 :- q."));
    }
}
