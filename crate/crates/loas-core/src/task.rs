//! Learning tasks over ordered answer sets and their semantic judgements:
//! example coverage, brave/cautious ordering respect, positive and violating
//! hypotheses, remaining hypotheses, inductive solutions, and the
//! satisfiability precondition checks.

use std::collections::{BTreeSet, HashMap, HashSet};

use crate::asp::{self, AspCtx};
use crate::error::TaskError;
use crate::ground::ground;
use crate::solve::SolveError;
use crate::space::SearchSpace;
use crate::syntax::{Atom, Interpretation, Program, Sym};
use crate::weak::{self, WeakProfile};

/// A pair of inclusion and exclusion sets of ground atoms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialInterpretation {
    pub id: Sym,
    pub inclusions: Interpretation,
    pub exclusions: Interpretation,
}

impl PartialInterpretation {
    pub fn new(
        id: Sym,
        inclusions: Interpretation,
        exclusions: Interpretation,
    ) -> Result<Self, TaskError> {
        if let Some(atom) = inclusions.iter().find(|a| exclusions.contains(a)) {
            return Err(TaskError::InconsistentExample { id, atom: atom.to_string() });
        }
        Ok(PartialInterpretation { id, inclusions, exclusions })
    }

    pub fn empty(id: Sym) -> Self {
        PartialInterpretation {
            id,
            inclusions: Interpretation::new(),
            exclusions: Interpretation::new(),
        }
    }

    /// Whether the total interpretation `a` extends this partial one.
    pub fn extended_by(&self, a: &Interpretation) -> bool {
        self.inclusions.is_subset(a) && self.exclusions.is_disjoint(a)
    }

    /// Whether this partial interpretation extends `other`.
    pub fn extends(&self, other: &PartialInterpretation) -> bool {
        other.inclusions.is_subset(&self.inclusions)
            && other.exclusions.is_subset(&self.exclusions)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingKind {
    Brave,
    Cautious,
}

/// An ordered pair of positive-example ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderingExample {
    pub first: Sym,
    pub second: Sym,
    pub kind: OrderingKind,
}

/// A subset of the search space, by entry id.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hypothesis {
    pub rule_ids: BTreeSet<Sym>,
}

impl Hypothesis {
    pub fn empty() -> Self {
        Hypothesis::default()
    }

    pub fn from_ids<I: IntoIterator<Item = Sym>>(ids: I) -> Self {
        Hypothesis { rule_ids: ids.into_iter().collect() }
    }

    pub fn len(&self) -> usize {
        self.rule_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rule_ids.is_empty()
    }
}

/// Why a positive hypothesis is violating: an answer set extending a negative
/// example, or a pair breaking a cautious ordering.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ViolatingReason {
    Interpretation(Interpretation),
    Pair { first: Interpretation, second: Interpretation, ordering: (Sym, Sym) },
}

/// A learning task: background knowledge, search space, positive and negative
/// examples, and brave/cautious orderings over the positive examples.
#[derive(Debug, Clone)]
pub struct LearningTask {
    pub background: Program,
    pub space: SearchSpace,
    pub positives: Vec<PartialInterpretation>,
    pub negatives: Vec<PartialInterpretation>,
    pub orderings: Vec<OrderingExample>,
}

impl LearningTask {
    pub fn new(
        background: Program,
        space: SearchSpace,
        positives: Vec<PartialInterpretation>,
        negatives: Vec<PartialInterpretation>,
        orderings: Vec<OrderingExample>,
    ) -> Result<Self, TaskError> {
        let mut seen: HashSet<Sym> = HashSet::new();
        for e in positives.iter().chain(negatives.iter()) {
            if !seen.insert(e.id.clone()) {
                return Err(TaskError::DuplicateExample(e.id.clone()));
            }
        }
        let positive_ids: HashSet<Sym> = positives.iter().map(|e| e.id.clone()).collect();
        for o in &orderings {
            for end in [&o.first, &o.second] {
                if !positive_ids.contains(end) {
                    return Err(TaskError::UnknownOrderingEndpoint(end.clone()));
                }
            }
            if o.kind == OrderingKind::Cautious && o.first == o.second {
                return Err(TaskError::ReflexiveCautiousOrdering(o.first.clone()));
            }
        }
        Ok(LearningTask { background, space, positives, negatives, orderings })
    }

    pub fn positive(&self, id: &Sym) -> Option<&PartialInterpretation> {
        self.positives.iter().find(|e| &e.id == id)
    }

    pub fn orderings_of(&self, kind: OrderingKind) -> impl Iterator<Item = &OrderingExample> {
        self.orderings.iter().filter(move |o| o.kind == kind)
    }

    /// The rules named by a hypothesis.
    pub fn hypothesis_rules(&self, h: &Hypothesis) -> Result<Program, TaskError> {
        let mut p = Program::new();
        for id in &h.rule_ids {
            let entry =
                self.space.get(id).ok_or_else(|| TaskError::UnknownRuleId(id.clone()))?;
            p.push(entry.rule.clone());
        }
        Ok(p)
    }

    pub fn hypothesis_cost(&self, h: &Hypothesis) -> u64 {
        h.rule_ids.iter().filter_map(|id| self.space.get(id)).map(|e| e.cost).sum()
    }
}

/// Ground program with answer sets and their weak profiles, computed once per
/// hypothesis evaluation.
pub struct HypEval {
    pub ground: Program,
    pub answer_sets: Vec<Interpretation>,
    pub profiles: Vec<WeakProfile>,
}

impl HypEval {
    pub fn of_program(p: &Program, ctx: &AspCtx) -> Result<Self, SolveError> {
        let g = ground(p, &ctx.ground)?;
        let c = crate::solve::Compiled::new(&g)?;
        let answer_sets = crate::solve::enumerate_stable(&c, &ctx.solve)?;
        let profiles = answer_sets
            .iter()
            .map(|a| weak::weak_profile(&g, a))
            .collect::<Result<_, _>>()?;
        Ok(HypEval { ground: g, answer_sets, profiles })
    }

    pub fn of_hypothesis(t: &LearningTask, h: &Hypothesis, ctx: &AspCtx) -> Result<Self, SolveError> {
        let rules = t
            .hypothesis_rules(h)
            .map_err(|e| SolveError::Asp(crate::error::AspError::Grounding(e.to_string())))?;
        Self::of_program(&t.background.union(&rules), ctx)
    }

    /// Indices of the answer sets extending `e`, in canonical order.
    pub fn extending(&self, e: &PartialInterpretation) -> Vec<usize> {
        (0..self.answer_sets.len()).filter(|&i| e.extended_by(&self.answer_sets[i])).collect()
    }

    pub fn dominates(&self, i: usize, j: usize) -> bool {
        self.profiles[i].dominates(&self.profiles[j])
    }
}

/// Whether the program bravely/cautiously respects the ordering of `e1` over
/// `e2`. The cautious reading is vacuously true when no extending pair exists.
pub fn respects_ordering(
    p: &Program,
    e1: &PartialInterpretation,
    e2: &PartialInterpretation,
    kind: OrderingKind,
    ctx: &AspCtx,
) -> Result<bool, SolveError> {
    let eval = HypEval::of_program(p, ctx)?;
    Ok(respects_ordering_eval(&eval, e1, e2, kind))
}

pub(crate) fn respects_ordering_eval(
    eval: &HypEval,
    e1: &PartialInterpretation,
    e2: &PartialInterpretation,
    kind: OrderingKind,
) -> bool {
    let ext1 = eval.extending(e1);
    let ext2 = eval.extending(e2);
    match kind {
        OrderingKind::Brave => {
            ext1.iter().any(|&i| ext2.iter().any(|&j| eval.dominates(i, j)))
        }
        OrderingKind::Cautious => {
            ext1.iter().all(|&i| ext2.iter().all(|&j| eval.dominates(i, j)))
        }
    }
}

/// Covers every positive example and bravely respects every brave ordering.
pub fn is_positive_hypothesis(
    t: &LearningTask,
    h: &Hypothesis,
    ctx: &AspCtx,
) -> Result<bool, SolveError> {
    let eval = HypEval::of_hypothesis(t, h, ctx)?;
    Ok(is_positive_eval(t, &eval))
}

pub(crate) fn is_positive_eval(t: &LearningTask, eval: &HypEval) -> bool {
    if !t.positives.iter().all(|e| !eval.extending(e).is_empty()) {
        return false;
    }
    t.orderings_of(OrderingKind::Brave).all(|o| {
        let e1 = t.positive(&o.first).expect("validated");
        let e2 = t.positive(&o.second).expect("validated");
        respects_ordering_eval(eval, e1, e2, OrderingKind::Brave)
    })
}

/// A witness that the (positive) hypothesis is violating: some answer set
/// extending a negative example, preferred over pair witnesses; otherwise the
/// first pair breaking a cautious ordering. Witnesses are chosen canonically.
pub fn find_violating_reason(
    t: &LearningTask,
    h: &Hypothesis,
    ctx: &AspCtx,
) -> Result<Option<ViolatingReason>, SolveError> {
    let eval = HypEval::of_hypothesis(t, h, ctx)?;
    Ok(find_violating_eval(t, &eval))
}

pub(crate) fn find_violating_eval(t: &LearningTask, eval: &HypEval) -> Option<ViolatingReason> {
    for a in &eval.answer_sets {
        if t.negatives.iter().any(|e| e.extended_by(a)) {
            return Some(ViolatingReason::Interpretation(a.clone()));
        }
    }
    for o in t.orderings_of(OrderingKind::Cautious) {
        let e1 = t.positive(&o.first).expect("validated");
        let e2 = t.positive(&o.second).expect("validated");
        for &i in &eval.extending(e1) {
            for &j in &eval.extending(e2) {
                if !eval.dominates(i, j) {
                    return Some(ViolatingReason::Pair {
                        first: eval.answer_sets[i].clone(),
                        second: eval.answer_sets[j].clone(),
                        ordering: (o.first.clone(), o.second.clone()),
                    });
                }
            }
        }
    }
    None
}

/// Remaining with respect to accumulated violating reasons: no recorded
/// interpretation is an answer set, and every recorded pair that is still a
/// pair of answer sets is ordered correctly.
pub fn is_remaining_hypothesis(
    t: &LearningTask,
    h: &Hypothesis,
    reasons: &[ViolatingReason],
    ctx: &AspCtx,
) -> Result<bool, SolveError> {
    let eval = HypEval::of_hypothesis(t, h, ctx)?;
    Ok(is_remaining_eval(&eval, reasons))
}

pub(crate) fn is_remaining_eval(eval: &HypEval, reasons: &[ViolatingReason]) -> bool {
    let position = |i: &Interpretation| eval.answer_sets.binary_search(i).ok();
    for r in reasons {
        match r {
            ViolatingReason::Interpretation(i) => {
                if position(i).is_some() {
                    return false;
                }
            }
            ViolatingReason::Pair { first, second, .. } => {
                if let (Some(i), Some(j)) = (position(first), position(second)) {
                    if !eval.dominates(i, j) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Definition of an inductive solution: all positives covered, no negative
/// extended by any answer set, and every ordering respected in its mode.
pub fn is_inductive_solution(
    t: &LearningTask,
    h: &Hypothesis,
    ctx: &AspCtx,
) -> Result<bool, SolveError> {
    let eval = HypEval::of_hypothesis(t, h, ctx)?;
    Ok(is_inductive_solution_eval(t, &eval))
}

pub(crate) fn is_inductive_solution_eval(t: &LearningTask, eval: &HypEval) -> bool {
    if !t.positives.iter().all(|e| !eval.extending(e).is_empty()) {
        return false;
    }
    if eval.answer_sets.iter().any(|a| t.negatives.iter().any(|e| e.extended_by(a))) {
        return false;
    }
    t.orderings.iter().all(|o| {
        let e1 = t.positive(&o.first).expect("validated");
        let e2 = t.positive(&o.second).expect("validated");
        respects_ordering_eval(eval, e1, e2, o.kind)
    })
}

// -- task condition checks ----------------------------------------------

#[derive(Debug, Clone)]
pub struct ConditionReport {
    pub label: String,
    pub passed: bool,
    pub details: String,
}

/// Results of the existence checks: failed necessary conditions make the task
/// unsatisfiable; sufficient conditions are advisory (they assume an
/// unrestricted search space).
#[derive(Debug, Clone)]
pub struct TaskReport {
    pub necessary: Vec<ConditionReport>,
    pub sufficient: Vec<ConditionReport>,
}

impl TaskReport {
    pub fn satisfiable(&self) -> bool {
        self.necessary.iter().all(|c| c.passed)
    }

    pub fn first_failed_necessary(&self) -> Option<&ConditionReport> {
        self.necessary.iter().find(|c| !c.passed)
    }
}

fn has_cycle(edges: &[(Sym, Sym)]) -> Option<Vec<Sym>> {
    let mut adj: HashMap<Sym, Vec<Sym>> = HashMap::new();
    let mut nodes: BTreeSet<Sym> = BTreeSet::new();
    for (a, b) in edges {
        adj.entry(a.clone()).or_default().push(b.clone());
        nodes.insert(a.clone());
        nodes.insert(b.clone());
    }
    // colors: 0 unseen, 1 on stack, 2 done
    let mut color: HashMap<Sym, u8> = HashMap::new();
    fn dfs(
        n: &Sym,
        adj: &HashMap<Sym, Vec<Sym>>,
        color: &mut HashMap<Sym, u8>,
        path: &mut Vec<Sym>,
    ) -> bool {
        color.insert(n.clone(), 1);
        path.push(n.clone());
        for m in adj.get(n).map(Vec::as_slice).unwrap_or(&[]) {
            match color.get(m).copied().unwrap_or(0) {
                0 => {
                    if dfs(m, adj, color, path) {
                        return true;
                    }
                }
                1 => {
                    path.push(m.clone());
                    return true;
                }
                _ => {}
            }
        }
        color.insert(n.clone(), 2);
        path.pop();
        false
    }
    for n in &nodes {
        if color.get(n).copied().unwrap_or(0) == 0 {
            let mut path = Vec::new();
            if dfs(n, &adj, &mut color, &mut path) {
                return Some(path);
            }
        }
    }
    None
}

/// Runs the necessary and sufficient existence conditions for the task.
pub fn check_task_conditions(t: &LearningTask, ctx: &AspCtx) -> Result<TaskReport, SolveError> {
    let mut necessary = Vec::new();
    let mut sufficient = Vec::new();

    // necessary (i): each positive example has a classical model of B extending it
    let mut bad = Vec::new();
    for e in &t.positives {
        let inc: Vec<Atom> = e.inclusions.iter().cloned().collect();
        let exc: Vec<Atom> = e.exclusions.iter().cloned().collect();
        if !asp::has_classical_model_extending(&t.background, &inc, &exc, ctx)? {
            bad.push(e.id.to_string());
        }
    }
    necessary.push(ConditionReport {
        label: "necessary (i): every positive example has a model of the background".into(),
        passed: bad.is_empty(),
        details: if bad.is_empty() { String::new() } else { format!("no model extends: {}", bad.join(", ")) },
    });

    // necessary (ii): no positive example extends a negative example
    let mut bad = Vec::new();
    for e1 in &t.positives {
        for e2 in &t.negatives {
            if e1.extends(e2) {
                bad.push(format!("{} extends {}", e1.id, e2.id));
            }
        }
    }
    necessary.push(ConditionReport {
        label: "necessary (ii): no positive example extends a negative example".into(),
        passed: bad.is_empty(),
        details: bad.join("; "),
    });

    // necessary (iii): no cyclic chain of cautious orderings
    let cautious_edges: Vec<(Sym, Sym)> = t
        .orderings_of(OrderingKind::Cautious)
        .map(|o| (o.first.clone(), o.second.clone()))
        .collect();
    let cycle = has_cycle(&cautious_edges);
    necessary.push(ConditionReport {
        label: "necessary (iii): no cyclic chain of cautious orderings".into(),
        passed: cycle.is_none(),
        details: cycle
            .map(|c| format!("cycle: {}", c.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" -> ")))
            .unwrap_or_default(),
    });

    // sufficient (i) coincides with necessary (i)
    sufficient.push(ConditionReport {
        label: "sufficient (i): every positive example has a model of the background".into(),
        passed: necessary[0].passed,
        details: necessary[0].details.clone(),
    });

    // sufficient (ii): no positive extends another positive or a negative
    let mut bad = Vec::new();
    for e1 in &t.positives {
        for e2 in t.positives.iter().chain(t.negatives.iter()) {
            if e1.id != e2.id && e1.extends(e2) {
                bad.push(format!("{} extends {}", e1.id, e2.id));
            }
        }
    }
    sufficient.push(ConditionReport {
        label: "sufficient (ii): no positive example extends another example".into(),
        passed: bad.is_empty(),
        details: bad.join("; "),
    });

    // sufficient (iii): no cyclic chain in brave and cautious orderings together
    let all_edges: Vec<(Sym, Sym)> =
        t.orderings.iter().map(|o| (o.first.clone(), o.second.clone())).collect();
    let cycle = has_cycle(&all_edges);
    sufficient.push(ConditionReport {
        label: "sufficient (iii): no cyclic chain of ordering examples".into(),
        passed: cycle.is_none(),
        details: cycle
            .map(|c| format!("cycle: {}", c.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" -> ")))
            .unwrap_or_default(),
    });

    Ok(TaskReport { necessary, sufficient })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_ground_atom, parse_program};
    use crate::syntax::sym;

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| parse_ground_atom(a).unwrap()).collect()
    }

    fn pi(id: &str, inc: &[&str], exc: &[&str]) -> PartialInterpretation {
        PartialInterpretation::new(sym(id), interp(inc), interp(exc)).unwrap()
    }

    #[test]
    fn extension_tests() {
        let e = pi("e", &["p"], &["q"]);
        assert!(e.extended_by(&interp(&["p", "r"])));
        assert!(!e.extended_by(&interp(&["p", "q"])));
        assert!(!e.extended_by(&interp(&["r"])));
        let everything = pi("all", &[], &[]);
        assert!(everything.extended_by(&interp(&[])));

        let big = pi("big", &["p", "q"], &["r"]);
        let small = pi("small", &["p"], &["r"]);
        assert!(big.extends(&small));
        assert!(!small.extends(&big));
        assert!(small.extends(&pi("none", &[], &[])));
        assert!(!pi("a", &["p"], &[]).extends(&pi("b", &[], &["p"])));
    }

    #[test]
    fn inconsistent_examples_rejected() {
        assert!(matches!(
            PartialInterpretation::new(sym("e"), interp(&["p"]), interp(&["p"])),
            Err(TaskError::InconsistentExample { .. })
        ));
    }

    #[test]
    fn reflexive_cautious_ordering_rejected() {
        let e = pi("e", &[], &[]);
        let err = LearningTask::new(
            Program::new(),
            SearchSpace::default(),
            vec![e],
            vec![],
            vec![OrderingExample { first: sym("e"), second: sym("e"), kind: OrderingKind::Cautious }],
        );
        assert!(matches!(err, Err(TaskError::ReflexiveCautiousOrdering(_))));
    }

    #[test]
    fn cautious_is_vacuous_without_pairs() {
        // e1 cannot be extended: p is a fact but e1 excludes it
        let p = parse_program("p.").unwrap();
        let e1 = pi("e1", &[], &["p"]);
        let e2 = pi("e2", &[], &[]);
        let ctx = AspCtx::default();
        assert!(respects_ordering(&p, &e1, &e2, OrderingKind::Cautious, &ctx).unwrap());
        assert!(!respects_ordering(&p, &e1, &e2, OrderingKind::Brave, &ctx).unwrap());
    }

    #[test]
    fn condition_checker_flags_cycles_and_extension() {
        let e1 = pi("e1", &["p"], &[]);
        let e2 = pi("e2", &[], &["p"]);
        let t = LearningTask::new(
            parse_program("0 {p} 1.").unwrap(),
            SearchSpace::default(),
            vec![e1, e2],
            vec![pi("n1", &[], &[])],
            vec![
                OrderingExample { first: sym("e1"), second: sym("e2"), kind: OrderingKind::Cautious },
                OrderingExample { first: sym("e2"), second: sym("e1"), kind: OrderingKind::Cautious },
            ],
        )
        .unwrap();
        let report = check_task_conditions(&t, &AspCtx::default()).unwrap();
        assert!(report.necessary[0].passed);
        assert!(!report.necessary[1].passed, "positives extend the empty negative");
        assert!(!report.necessary[2].passed, "two-cycle of cautious orderings");
        assert!(!report.satisfiable());
    }
}
