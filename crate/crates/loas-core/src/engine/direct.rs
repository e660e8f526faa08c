//! Direct strategy: cost-ordered search over hypothesis subsets using the
//! task judgements. Computes the same reason-accumulation fixpoint as the
//! meta encodings, with evaluations memoised per hypothesis and answer sets
//! shared across hypotheses with the same non-weak part.

use std::collections::{BTreeSet, HashMap};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use crate::asp::AspCtx;
use crate::error::EngineError;
use crate::ground::{ground, herbrand_atoms, GroundOptions};
use crate::solve::{enumerate_stable, Compiled};
use crate::syntax::{Interpretation, Program, Rule, Sym, Term};
use crate::task::{Hypothesis, LearningTask, OrderingKind, ViolatingReason};
use crate::weak::body_satisfied;

use super::LearnOutcome;

type Tuple = (i64, i64, Vec<Term>);

/// Task-independent evaluation of `B ∪ H'` for one non-weak hypothesis part:
/// its answer sets and per-contributor weak-tuple level sums. Expensive to
/// build and shareable across learning runs over the same background and
/// space.
pub struct WeakWorld {
    answer_sets: Vec<Interpretation>,
    levels: Vec<i64>,
    background_sums: Vec<Vec<i64>>,
    entry_sums: HashMap<Sym, Vec<Vec<i64>>>,
    /// Source pairs that can contribute the same tuple somewhere; hypotheses
    /// avoiding them get additive level sums. The background is source 0,
    /// entries are numbered from 1 in `slot_of` order.
    colliding: std::collections::HashSet<(usize, usize)>,
    slot_of: HashMap<Sym, usize>,
    background_tuples: Vec<BTreeSet<Tuple>>,
    entry_tuples: HashMap<Sym, Vec<BTreeSet<Tuple>>>,
}

/// Shared cache of [`WeakWorld`]s, keyed by the non-weak hypothesis part.
/// Reusable across learning runs on the same background and search space.
#[derive(Default)]
pub struct DirectCache {
    worlds: Mutex<HashMap<BTreeSet<Sym>, Arc<WeakWorld>>>,
}

/// Per-task view: the shared world plus example extensions.
struct Base {
    world: Arc<WeakWorld>,
    pos_ext: Vec<Vec<usize>>,
    neg_witness: Vec<bool>,
}

impl std::ops::Deref for Base {
    type Target = WeakWorld;

    fn deref(&self) -> &WeakWorld {
        &self.world
    }
}

impl WeakWorld {
    fn additive_for(&self, h: &Hypothesis) -> bool {
        if self.colliding.is_empty() {
            return true;
        }
        let mut slots: Vec<usize> = vec![0];
        slots.extend(h.rule_ids.iter().filter_map(|id| self.slot_of.get(id).copied()));
        for (i, &a) in slots.iter().enumerate() {
            for &b in &slots[i + 1..] {
                let key = if a < b { (a, b) } else { (b, a) };
                if self.colliding.contains(&key) {
                    return false;
                }
            }
        }
        true
    }

    fn level_sums(&self, h: &Hypothesis, idx: usize) -> Vec<i64> {
        if self.additive_for(h) {
            let mut sums = self.background_sums[idx].clone();
            for id in &h.rule_ids {
                if let Some(per_as) = self.entry_sums.get(id) {
                    for (s, v) in sums.iter_mut().zip(&per_as[idx]) {
                        *s += v;
                    }
                }
            }
            sums
        } else {
            let mut tuples: BTreeSet<Tuple> = self.background_tuples[idx].clone();
            for id in &h.rule_ids {
                if let Some(per_as) = self.entry_tuples.get(id) {
                    tuples.extend(per_as[idx].iter().cloned());
                }
            }
            let mut sums = vec![0i64; self.levels.len()];
            for (w, l, _) in &tuples {
                if let Ok(pos) = self.levels.binary_search(l) {
                    sums[pos] += w;
                }
            }
            sums
        }
    }

    fn dominates_cached(
        &self,
        h: &Hypothesis,
        i: usize,
        j: usize,
        cache: &mut [Option<Vec<i64>>],
    ) -> bool {
        if cache[i].is_none() {
            cache[i] = Some(self.level_sums(h, i));
        }
        if cache[j].is_none() {
            cache[j] = Some(self.level_sums(h, j));
        }
        let (a, b) = (cache[i].as_ref().unwrap(), cache[j].as_ref().unwrap());
        for pos in (0..self.levels.len()).rev() {
            if a[pos] < b[pos] {
                return true;
            }
            if a[pos] > b[pos] {
                return false;
            }
        }
        false
    }

    fn fresh_cache(&self) -> Vec<Option<Vec<i64>>> {
        vec![None; self.answer_sets.len()]
    }
}

impl Base {
    fn fresh_cache(&self) -> Vec<Option<Vec<i64>>> {
        self.world.fresh_cache()
    }
}

struct DirectSolver<'t> {
    t: &'t LearningTask,
    ctx: AspCtx,
    cache: Option<&'t DirectCache>,
    bases: HashMap<BTreeSet<Sym>, Arc<Base>>,
    positive: HashMap<Hypothesis, bool>,
    reasons: HashMap<Hypothesis, Option<ViolatingReason>>,
}

impl<'t> DirectSolver<'t> {
    fn new(t: &'t LearningTask, ctx: &AspCtx, cache: Option<&'t DirectCache>) -> Self {
        DirectSolver {
            t,
            ctx: ctx.clone(),
            cache,
            bases: HashMap::new(),
            positive: HashMap::new(),
            reasons: HashMap::new(),
        }
    }

    fn check_deadline(&self) -> Result<(), EngineError> {
        if self.ctx.solve.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(EngineError::Timeout);
        }
        Ok(())
    }

    fn non_weak_part(&self, h: &Hypothesis) -> BTreeSet<Sym> {
        h.rule_ids
            .iter()
            .filter(|id| {
                self.t.space.get(id).is_some_and(|e| !e.rule.is_weak())
            })
            .cloned()
            .collect()
    }

    /// Ground instances of one weak entry against the derivable atoms of the
    /// evaluated program.
    fn weak_instances(
        &self,
        universe: &Program,
        rule: &Rule,
    ) -> Result<Vec<Rule>, EngineError> {
        if rule.is_ground() {
            return Ok(vec![rule.clone()]);
        }
        let mut p = universe.clone();
        p.push(rule.clone());
        let g = ground(&p, &GroundOptions::default())?;
        Ok(g.weak().cloned().collect())
    }

    fn world_for(&mut self, key: &BTreeSet<Sym>) -> Result<Arc<WeakWorld>, EngineError> {
        let Some(cache) = self.cache else {
            return Ok(Arc::new(self.build_world(key)?));
        };
        // hold the lock across the build so concurrent runs share one build
        let mut worlds = cache.worlds.lock().expect("cache lock");
        if let Some(w) = worlds.get(key) {
            return Ok(w.clone());
        }
        let world = Arc::new(self.build_world(key)?);
        worlds.insert(key.clone(), world.clone());
        Ok(world)
    }

    fn build_world(&self, key: &BTreeSet<Sym>) -> Result<WeakWorld, EngineError> {
        let mut program = self.t.background.clone();
        for id in key {
            program.push(self.t.space.get(id).expect("validated id").rule.clone());
        }
        let g = ground(&program, &self.ctx.ground)?;
        let compiled = Compiled::new(&g)?;
        let answer_sets = enumerate_stable(&compiled, &self.ctx.solve)?;

        // weak tuple contributions: the background's own ground weaks, plus
        // each weak space entry grounded against the derivable universe
        let universe: Program =
            herbrand_atoms(&g).into_iter().map(Rule::fact).collect();
        let b_ground: Vec<Rule> = g.weak().cloned().collect();
        let mut contributions: Vec<(Option<Sym>, Vec<Rule>)> = vec![(None, b_ground)];
        for entry in self.t.space.entries() {
            if entry.rule.is_weak() {
                let instances = self.weak_instances(&universe, &entry.rule)?;
                contributions.push((Some(entry.id.clone()), instances));
            }
        }

        let mut owners_of: HashMap<Tuple, Vec<usize>> = HashMap::new();
        let mut level_set: BTreeSet<i64> = BTreeSet::new();
        let mut tuple_sets: Vec<Vec<BTreeSet<Tuple>>> = Vec::new();
        for (slot, (_, instances)) in contributions.iter().enumerate() {
            let mut per_as: Vec<BTreeSet<Tuple>> = vec![BTreeSet::new(); answer_sets.len()];
            for inst in instances {
                let Rule::Weak { body, weight, level, terms } = inst else { continue };
                let (Some(w), Some(l)) = (weight.as_int(), level.as_int()) else {
                    return Err(EngineError::Asp(crate::error::AspError::Grounding(format!(
                        "non-integer weight/level in {inst}"
                    ))));
                };
                level_set.insert(l);
                let tuple = (w, l, terms.clone());
                let mut seen_anywhere = false;
                for (i, a) in answer_sets.iter().enumerate() {
                    if body_satisfied(body, a).map_err(EngineError::Asp)? {
                        seen_anywhere = true;
                        per_as[i].insert(tuple.clone());
                    }
                }
                if seen_anywhere {
                    let owners = owners_of.entry(tuple).or_default();
                    if !owners.contains(&slot) {
                        owners.push(slot);
                    }
                }
            }
            tuple_sets.push(per_as);
        }
        let mut colliding: std::collections::HashSet<(usize, usize)> =
            std::collections::HashSet::new();
        for owners in owners_of.values() {
            for (i, &a) in owners.iter().enumerate() {
                for &b in &owners[i + 1..] {
                    colliding.insert(if a < b { (a, b) } else { (b, a) });
                }
            }
        }
        let slot_of: HashMap<Sym, usize> = contributions
            .iter()
            .enumerate()
            .filter_map(|(slot, (owner, _))| owner.clone().map(|id| (id, slot)))
            .collect();

        let levels: Vec<i64> = level_set.into_iter().collect();
        let sums_of = |sets: &[BTreeSet<Tuple>]| -> Vec<Vec<i64>> {
            sets.iter()
                .map(|tuples| {
                    let mut sums = vec![0i64; levels.len()];
                    for (w, l, _) in tuples {
                        if let Ok(pos) = levels.binary_search(l) {
                            sums[pos] += w;
                        }
                    }
                    sums
                })
                .collect()
        };

        let background_sums = sums_of(&tuple_sets[0]);
        let mut entry_sums = HashMap::new();
        let mut entry_tuples = HashMap::new();
        for ((owner, _), sets) in contributions.iter().zip(tuple_sets.iter()).skip(1) {
            let id = owner.clone().expect("entry slot");
            entry_sums.insert(id.clone(), sums_of(sets));
            entry_tuples.insert(id, sets.clone());
        }

        Ok(WeakWorld {
            answer_sets,
            levels,
            background_sums,
            entry_sums,
            colliding,
            slot_of,
            background_tuples: tuple_sets.swap_remove(0),
            entry_tuples,
        })
    }

    fn base_for(&mut self, key: BTreeSet<Sym>) -> Result<Arc<Base>, EngineError> {
        if let Some(b) = self.bases.get(&key) {
            return Ok(b.clone());
        }
        let world = self.world_for(&key)?;
        let pos_ext = self
            .t
            .positives
            .iter()
            .map(|e| {
                (0..world.answer_sets.len())
                    .filter(|&i| e.extended_by(&world.answer_sets[i]))
                    .collect()
            })
            .collect();
        let neg_witness = world
            .answer_sets
            .iter()
            .map(|a| self.t.negatives.iter().any(|e| e.extended_by(a)))
            .collect();
        let base = Arc::new(Base { world, pos_ext, neg_witness });
        self.bases.insert(key, base.clone());
        Ok(base)
    }

    fn is_positive(&mut self, h: &Hypothesis) -> Result<bool, EngineError> {
        if let Some(&v) = self.positive.get(h) {
            return Ok(v);
        }
        let base = self.base_for(self.non_weak_part(h))?;
        let mut cache = base.fresh_cache();
        let mut ok = base.pos_ext.iter().all(|ext| !ext.is_empty());
        if ok {
            'braves: for o in self.t.orderings_of(OrderingKind::Brave) {
                let i1 = self.t.positives.iter().position(|e| e.id == o.first).unwrap();
                let i2 = self.t.positives.iter().position(|e| e.id == o.second).unwrap();
                for &i in &base.pos_ext[i1] {
                    for &j in &base.pos_ext[i2] {
                        if base.dominates_cached(h, i, j, &mut cache) {
                            continue 'braves;
                        }
                    }
                }
                ok = false;
                break;
            }
        }
        self.positive.insert(h.clone(), ok);
        Ok(ok)
    }

    fn violating_reason(&mut self, h: &Hypothesis) -> Result<Option<ViolatingReason>, EngineError> {
        if let Some(r) = self.reasons.get(h) {
            return Ok(r.clone());
        }
        let base = self.base_for(self.non_weak_part(h))?;
        let mut cache = base.fresh_cache();
        let mut found = None;
        for (i, is_witness) in base.neg_witness.iter().enumerate() {
            if *is_witness {
                found = Some(ViolatingReason::Interpretation(base.answer_sets[i].clone()));
                break;
            }
        }
        if found.is_none() {
            'outer: for o in self.t.orderings_of(OrderingKind::Cautious) {
                let i1 = self.t.positives.iter().position(|e| e.id == o.first).unwrap();
                let i2 = self.t.positives.iter().position(|e| e.id == o.second).unwrap();
                for &i in &base.pos_ext[i1] {
                    for &j in &base.pos_ext[i2] {
                        if !base.dominates_cached(h, i, j, &mut cache) {
                            found = Some(ViolatingReason::Pair {
                                first: base.answer_sets[i].clone(),
                                second: base.answer_sets[j].clone(),
                                ordering: (o.first.clone(), o.second.clone()),
                            });
                            break 'outer;
                        }
                    }
                }
            }
        }
        self.reasons.insert(h.clone(), found.clone());
        Ok(found)
    }

    fn is_remaining(
        &mut self,
        h: &Hypothesis,
        reasons: &[ViolatingReason],
    ) -> Result<bool, EngineError> {
        let base = self.base_for(self.non_weak_part(h))?;
        let mut cache = base.fresh_cache();
        for r in reasons {
            match r {
                ViolatingReason::Interpretation(i) => {
                    if base.answer_sets.binary_search(i).is_ok() {
                        return Ok(false);
                    }
                }
                ViolatingReason::Pair { first, second, .. } => {
                    if let (Ok(i), Ok(j)) =
                        (base.answer_sets.binary_search(first), base.answer_sets.binary_search(second))
                    {
                        if !base.dominates_cached(h, i, j, &mut cache) {
                            return Ok(false);
                        }
                    }
                }
            }
        }
        Ok(true)
    }
}

/// All hypotheses of exactly the given cost, in entry order.
fn cost_band(t: &LearningTask, cost: u64) -> Vec<Hypothesis> {
    let entries = t.space.entries();
    let n = entries.len();
    let mut suffix_total = vec![0u64; n + 1];
    for i in (0..n).rev() {
        suffix_total[i] = suffix_total[i + 1] + entries[i].cost;
    }
    let mut out = Vec::new();
    let mut current: Vec<Sym> = Vec::new();
    fn go(
        entries: &[crate::space::SpaceEntry],
        suffix_total: &[u64],
        i: usize,
        left: u64,
        current: &mut Vec<Sym>,
        out: &mut Vec<Hypothesis>,
    ) {
        if left == 0 {
            out.push(Hypothesis::from_ids(current.iter().cloned()));
            return;
        }
        if i == entries.len() || suffix_total[i] < left {
            return;
        }
        // include entry i
        if entries[i].cost <= left {
            current.push(entries[i].id.clone());
            go(entries, suffix_total, i + 1, left - entries[i].cost, current, out);
            current.pop();
        }
        // skip entry i
        go(entries, suffix_total, i + 1, left, current, out);
    }
    go(entries, &suffix_total, 0, cost, &mut current, &mut out);
    out
}

pub(super) fn solve_direct(
    t: &LearningTask,
    max_iterations: usize,
    ctx: &AspCtx,
    cache: Option<&DirectCache>,
) -> Result<LearnOutcome, EngineError> {
    let mut solver = DirectSolver::new(t, ctx, cache);
    let ceiling: u64 = t.space.entries().iter().map(|e| e.cost).sum();
    let mut reasons: Vec<ViolatingReason> = Vec::new();
    let mut iterations = 0usize;

    'iterate: loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(EngineError::IterationLimitExceeded(max_iterations));
        }
        for cost in 0..=ceiling {
            solver.check_deadline()?;
            let t_band = Instant::now();
            let band = cost_band(t, cost);
            let n_band = band.len();
            let mut survivors = Vec::new();
            for h in band {
                solver.check_deadline()?;
                if !solver.is_positive(&h)? {
                    continue;
                }
                if !solver.is_remaining(&h, &reasons)? {
                    continue;
                }
                if let Some(reason) = solver.violating_reason(&h)? {
                    reasons.push(reason);
                    continue 'iterate;
                }
                survivors.push(h);
            }
            if std::env::var("LOAS_TRACE").is_ok() {
                eprintln!("band {cost}: {n_band} candidates in {:?}", t_band.elapsed());
            }
            if !survivors.is_empty() {
                survivors.sort();
                return Ok(LearnOutcome { solutions: survivors, iterations, reasons });
            }
        }
        return Ok(LearnOutcome { solutions: Vec::new(), iterations, reasons });
    }
}
