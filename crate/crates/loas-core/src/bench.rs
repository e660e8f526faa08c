//! Benchmark protocol for preference learning in the interview-scheduling
//! domain: generate the background and bias, sample target hypotheses made of
//! weak constraints, generate brave/cautious ordering examples of controlled
//! fullness, learn, and score pairwise ranking accuracy over the answer sets
//! of the background.

use std::collections::BTreeSet;
use std::time::Instant;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::asp::AspCtx;
use crate::error::BenchError;
use crate::engine::{ilasp2_with_cache, DirectCache, EngineConfig};
use crate::ground::ground;
use crate::space::{build_search_space, ModeBias, ModeDeclaration, Placeholder, SearchSpace};
use crate::syntax::{sym, Atom, BodyElem, Interpretation, Literal, Program, Rule, Sym, Term};
use crate::task::{Hypothesis, LearningTask, OrderingExample, OrderingKind, PartialInterpretation};
use crate::weak::{weak_profile, WeakProfile};

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub days: usize,
    pub slots_per_day: usize,
    pub num_targets: usize,
    pub trials_per_target: usize,
    pub num_examples: usize,
    /// Fraction of the assignable atoms an example specifies, drawn uniformly
    /// from this interval per endpoint.
    pub fullness: (f64, f64),
    pub seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        BenchSpec {
            days: 3,
            slots_per_day: 3,
            num_targets: 10,
            trials_per_target: 5,
            num_examples: 10,
            fullness: (5.0 / 9.0, 1.0),
            seed: 0,
        }
    }
}

const DAY_NAMES: &[&str] = &["m", "t", "w", "th", "f", "sa", "su"];

fn day_name(i: usize) -> Sym {
    if i < DAY_NAMES.len() {
        sym(DAY_NAMES[i])
    } else {
        sym(&format!("d{}", i + 1))
    }
}

/// The scheduling background: slot facts, inequality over slots and days, a
/// course type per slot (the three-day pattern extended cyclically), and one
/// optional assignment per slot.
pub fn scheduling_background(days: usize, slots_per_day: usize) -> Program {
    let mut p = Program::new();
    for d in 0..days {
        for s in 1..=slots_per_day {
            p.push(Rule::fact(Atom::new(
                "slot",
                vec![Term::Const(day_name(d)), Term::Int(s as i64)],
            )));
        }
    }
    for a in 1..=slots_per_day {
        for b in 1..=slots_per_day {
            if a != b {
                p.push(Rule::fact(Atom::new(
                    "neq",
                    vec![Term::Int(a as i64), Term::Int(b as i64)],
                )));
            }
        }
    }
    for a in 0..days {
        for b in 0..days {
            if a != b {
                p.push(Rule::fact(Atom::new(
                    "neq",
                    vec![Term::Const(day_name(a)), Term::Const(day_name(b))],
                )));
            }
        }
    }
    for d in 0..days {
        for s in 1..=slots_per_day {
            let course = if (slots_per_day * d + s) % 7 == 1 { "c1" } else { "c2" };
            p.push(Rule::fact(Atom::new(
                "type",
                vec![Term::Const(day_name(d)), Term::Int(s as i64), Term::Const(sym(course))],
            )));
        }
    }
    let d = Term::Var(sym("D"));
    let s = Term::Var(sym("S"));
    p.push(Rule::Choice {
        lower: 0,
        upper: 1,
        heads: vec![Atom::new("assign", vec![d.clone(), s.clone()])],
        body: vec![BodyElem::pos(Atom::new("slot", vec![d, s]))],
    });
    p
}

/// The bench bias: weak constraints only, over assignment, inequality, and
/// course-type literals, with weights ±1 and two levels. Body size is capped
/// at two literals to keep the space close to the size a hand-pruned space
/// would have.
pub fn scheduling_bias() -> ModeBias {
    let v = Placeholder::Var;
    let c = Placeholder::Constant;
    let mut bias = ModeBias {
        ordering_decls: vec![
            ModeDeclaration { pred: sym("assign"), placeholders: vec![v, v] },
            ModeDeclaration { pred: sym("neq"), placeholders: vec![v, v] },
            ModeDeclaration { pred: sym("type"), placeholders: vec![v, c] },
        ],
        weights: [-1, 1].into_iter().collect(),
        max_level: 2,
        ..Default::default()
    };
    bias.limits.max_body = 2;
    bias.limits.max_vars = 3;
    bias.limits.constants = [sym("c1"), sym("c2")].into_iter().collect();
    bias
}

/// Background plus search space for a scheduling run.
pub fn generate_scheduling_task(
    days: usize,
    slots_per_day: usize,
) -> Result<(Program, SearchSpace), BenchError> {
    let background = scheduling_background(days, slots_per_day);
    let space = build_search_space(&scheduling_bias())?;
    Ok((background, space))
}

/// Precomputed ranking structure: the answer sets of the background and, per
/// weak space entry, its tuple contribution to each answer set's profile.
pub struct RankingWorld {
    pub background: Program,
    pub ground_background: Program,
    pub answer_sets: Vec<Interpretation>,
    pub assign_atoms: Vec<Atom>,
    background_profiles: Vec<WeakProfile>,
    entry_profiles: std::collections::HashMap<Sym, Vec<WeakProfile>>,
}

impl RankingWorld {
    pub fn new(background: &Program, space: &SearchSpace, ctx: &AspCtx) -> Result<Self, BenchError> {
        let ground_background = ground(background, &ctx.ground).map_err(crate::error::EngineError::Asp)?;
        let answer_sets = crate::asp::enumerate_answer_sets(background, ctx)
            .map_err(crate::error::EngineError::from)?;
        let assign_atoms: Vec<Atom> = crate::ground::herbrand_atoms(&ground_background)
            .into_iter()
            .filter(|a| a.pred.as_ref() == "assign")
            .collect();

        // ground every weak entry against the derivable atoms once
        let universe: Program = crate::ground::herbrand_atoms(&ground_background)
            .into_iter()
            .map(Rule::fact)
            .collect();
        let background_profiles: Vec<WeakProfile> = answer_sets
            .iter()
            .map(|a| weak_profile(&ground_background, a))
            .collect::<Result<_, _>>()
            .map_err(crate::error::EngineError::Asp)?;
        let mut entry_profiles = std::collections::HashMap::new();
        for entry in space.entries() {
            if !entry.rule.is_weak() {
                continue;
            }
            let mut p = universe.clone();
            p.push(entry.rule.clone());
            let g = ground(&p, &ctx.ground).map_err(crate::error::EngineError::Asp)?;
            let weaks: Program = g.weak().cloned().collect();
            let profiles: Vec<WeakProfile> = answer_sets
                .iter()
                .map(|a| weak_profile(&weaks, a))
                .collect::<Result<_, _>>()
                .map_err(crate::error::EngineError::Asp)?;
            entry_profiles.insert(entry.id.clone(), profiles);
        }
        Ok(RankingWorld {
            background: background.clone(),
            ground_background,
            answer_sets,
            assign_atoms,
            background_profiles,
            entry_profiles,
        })
    }

    /// Profile of answer set `idx` under the hypothesis (tuple-set union of
    /// the entry contributions plus the background's own weak constraints).
    pub fn profile(&self, h: &Hypothesis, idx: usize) -> WeakProfile {
        let mut tuples: BTreeSet<(i64, i64, Vec<Term>)> =
            self.background_profiles[idx].tuples.clone();
        for id in &h.rule_ids {
            if let Some(profiles) = self.entry_profiles.get(id) {
                tuples.extend(profiles[idx].tuples.iter().cloned());
            }
        }
        let mut profile = WeakProfile { tuples, ..Default::default() };
        let entries: Vec<(i64, i64)> =
            profile.tuples.iter().map(|(w, l, _)| (*w, *l)).collect();
        for (w, l) in entries {
            *profile.level_sums.entry(l).or_insert(0) += w;
        }
        profile
    }

    pub fn dominates(&self, h: &Hypothesis, i: usize, j: usize) -> bool {
        self.profile(h, i).dominates(&self.profile(h, j))
    }

    /// Per-level sums of every answer set under the hypothesis, computed once.
    pub fn sum_table(&self, h: &Hypothesis) -> SumTable {
        let profiles: Vec<WeakProfile> =
            (0..self.answer_sets.len()).map(|i| self.profile(h, i)).collect();
        let levels: Vec<i64> = profiles
            .iter()
            .flat_map(|p| p.level_sums.keys().copied())
            .collect::<BTreeSet<i64>>()
            .into_iter()
            .collect();
        let sums = profiles
            .iter()
            .map(|p| levels.iter().map(|&l| p.level_sum(l)).collect())
            .collect();
        SumTable { levels, sums }
    }

    fn extending(&self, e: &PartialInterpretation) -> Vec<usize> {
        (0..self.answer_sets.len()).filter(|&i| e.extended_by(&self.answer_sets[i])).collect()
    }
}

/// Level sums of each answer set under one hypothesis.
pub struct SumTable {
    levels: Vec<i64>,
    sums: Vec<Vec<i64>>,
}

impl SumTable {
    pub fn dominates(&self, i: usize, j: usize) -> bool {
        let (a, b) = (&self.sums[i], &self.sums[j]);
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

    fn outcome(&self, i: usize, j: usize) -> i8 {
        if self.dominates(i, j) {
            1
        } else if self.dominates(j, i) {
            -1
        } else {
            0
        }
    }
}

/// Draws a target of 1–3 weak constraints that does not rank all answer sets
/// of the background equally.
pub fn sample_target_hypothesis(
    space: &SearchSpace,
    world: &RankingWorld,
    rng: &mut impl Rng,
) -> Result<Hypothesis, BenchError> {
    let weak_ids: Vec<Sym> = space
        .entries()
        .iter()
        .filter(|e| e.rule.is_weak())
        .map(|e| e.id.clone())
        .collect();
    if weak_ids.is_empty() {
        return Err(BenchError::ExhaustedSampling(0));
    }
    const MAX_TRIES: usize = 500;
    for _ in 0..MAX_TRIES {
        let count = rng.gen_range(1..=3usize.min(weak_ids.len()));
        let mut ids = BTreeSet::new();
        while ids.len() < count {
            ids.insert(weak_ids[rng.gen_range(0..weak_ids.len())].clone());
        }
        let h = Hypothesis { rule_ids: ids };
        let table = world.sum_table(&h);
        let ranks_somewhere = (1..world.answer_sets.len()).any(|i| table.sums[i] != table.sums[0]);
        if ranks_somewhere {
            return Ok(h);
        }
    }
    Err(BenchError::ExhaustedSampling(MAX_TRIES))
}

fn sample_endpoint(
    world: &RankingWorld,
    id: Sym,
    fullness: (f64, f64),
    rng: &mut impl Rng,
) -> (PartialInterpretation, f64) {
    let n = world.assign_atoms.len();
    let f = rng.gen_range(fullness.0..=fullness.1);
    let k = ((f * n as f64).round() as usize).clamp(1, n);
    let mut picks: Vec<usize> = (0..n).collect();
    picks.shuffle(rng);
    let mut inc = Interpretation::new();
    let mut exc = Interpretation::new();
    for &i in picks.iter().take(k) {
        if rng.gen_bool(0.5) {
            inc.insert(world.assign_atoms[i].clone());
        } else {
            exc.insert(world.assign_atoms[i].clone());
        }
    }
    let fullness = k as f64 / n as f64;
    (PartialInterpretation { id, inclusions: inc, exclusions: exc }, fullness)
}

/// Generates `n` ordering examples respected by the target: pairs that the
/// target bravely respects, labelled cautious when it also cautiously
/// respects them. Endpoints become positive examples. Returns the examples,
/// the orderings, and the mean endpoint fullness.
pub fn generate_ordering_examples(
    world: &RankingWorld,
    target: &Hypothesis,
    n: usize,
    fullness: (f64, f64),
    rng: &mut impl Rng,
) -> Result<(Vec<PartialInterpretation>, Vec<OrderingExample>, f64), BenchError> {
    let table = world.sum_table(target);
    let mut positives = Vec::new();
    let mut orderings = Vec::new();
    let mut fullness_sum = 0.0;
    let max_tries = 500 * n.max(1);
    let mut tries = 0usize;
    for k in 0..n {
        loop {
            tries += 1;
            if tries > max_tries {
                return Err(BenchError::ExhaustedSampling(max_tries));
            }
            let (e1, f1) = sample_endpoint(world, sym(&format!("o{}a", k + 1)), fullness, rng);
            let (e2, f2) = sample_endpoint(world, sym(&format!("o{}b", k + 1)), fullness, rng);
            let ext1 = world.extending(&e1);
            let ext2 = world.extending(&e2);
            let brave =
                ext1.iter().any(|&i| ext2.iter().any(|&j| table.dominates(i, j)));
            if !brave {
                continue;
            }
            let cautious =
                ext1.iter().all(|&i| ext2.iter().all(|&j| table.dominates(i, j)));
            let kind = if cautious { OrderingKind::Cautious } else { OrderingKind::Brave };
            orderings.push(OrderingExample {
                first: e1.id.clone(),
                second: e2.id.clone(),
                kind,
            });
            fullness_sum += f1 + f2;
            positives.push(e1);
            positives.push(e2);
            break;
        }
    }
    let mean = if n == 0 { 0.0 } else { fullness_sum / (2.0 * n as f64) };
    Ok((positives, orderings, mean))
}

/// Fraction of unordered answer-set pairs on which the two hypotheses agree
/// in the three-way comparison (first dominates, second dominates, neither).
pub fn pairwise_accuracy(world: &RankingWorld, ht: &Hypothesis, hl: &Hypothesis) -> f64 {
    let n = world.answer_sets.len();
    if n < 2 {
        return 1.0;
    }
    let table_t = world.sum_table(ht);
    let table_l = world.sum_table(hl);
    let mut agree = 0usize;
    let mut total = 0usize;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if table_t.outcome(i, j) == table_l.outcome(i, j) {
                agree += 1;
            }
        }
    }
    agree as f64 / total as f64
}

/// One benchmark measurement.
#[derive(Debug, Clone)]
pub struct TrialRow {
    pub target_id: usize,
    pub trial: usize,
    pub n_examples: usize,
    pub fullness_mean: f64,
    pub accuracy: f64,
    pub wall_ms: u128,
    pub iterations: usize,
}

/// Runs the accuracy protocol: for each sampled target and trial, generate
/// ordering examples, learn a hypothesis, and score it against the target
/// over all answer-set pairs. Trials run in parallel, each on its own rng
/// stream derived from the seed.
pub fn run_accuracy(spec: &BenchSpec, config: &EngineConfig) -> Result<Vec<TrialRow>, BenchError> {
    let (background, space) = generate_scheduling_task(spec.days, spec.slots_per_day)?;
    let ctx = AspCtx::default();
    let world = RankingWorld::new(&background, &space, &ctx)?;

    let mut targets = Vec::new();
    for t in 0..spec.num_targets {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ (0x7a65 + t as u64));
        targets.push(sample_target_hypothesis(&space, &world, &mut rng)?);
    }

    let jobs: Vec<(usize, usize)> = (0..spec.num_targets)
        .flat_map(|t| (0..spec.trials_per_target).map(move |k| (t, k)))
        .collect();
    let cache = DirectCache::default();

    let rows: Result<Vec<TrialRow>, BenchError> = jobs
        .par_iter()
        .map(|&(t, k)| {
            let mut rng = ChaCha8Rng::seed_from_u64(
                spec.seed ^ (t as u64).wrapping_mul(0x9e3779b97f4a7c15) ^ (k as u64) << 32,
            );
            let target = &targets[t];
            let (positives, orderings, fullness_mean) = generate_ordering_examples(
                &world,
                target,
                spec.num_examples,
                spec.fullness,
                &mut rng,
            )?;
            let task = LearningTask::new(
                background.clone(),
                space.clone(),
                positives,
                Vec::new(),
                orderings,
            )
            .map_err(|e| {
                BenchError::Engine(crate::error::EngineError::Asp(
                    crate::error::AspError::Grounding(e.to_string()),
                ))
            })?;
            let start = Instant::now();
            let outcome = ilasp2_with_cache(&task, config, Some(&cache))?;
            let wall_ms = start.elapsed().as_millis();
            let learned = outcome.solutions.first().cloned().unwrap_or_default();
            let accuracy = pairwise_accuracy(&world, target, &learned);
            Ok(TrialRow {
                target_id: t,
                trial: k,
                n_examples: spec.num_examples,
                fullness_mean,
                accuracy,
                wall_ms,
                iterations: outcome.iterations,
            })
        })
        .collect();
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_day_background_has_512_answer_sets() {
        let b = scheduling_background(3, 3);
        let sets = crate::asp::enumerate_answer_sets(&b, &AspCtx::default()).unwrap();
        assert_eq!(sets.len(), 512);
    }

    #[test]
    fn one_slot_background_has_two_answer_sets() {
        let b = scheduling_background(1, 1);
        let sets = crate::asp::enumerate_answer_sets(&b, &AspCtx::default()).unwrap();
        assert_eq!(sets.len(), 2);
    }

    #[test]
    fn background_matches_running_example_shape() {
        let b = scheduling_background(3, 3);
        let text = b.to_string();
        assert!(text.contains("slot(m,1)."));
        assert!(text.contains("slot(w,3)."));
        assert!(text.contains("neq(1,2)."));
        assert!(text.contains("neq(m,t)."));
        assert!(text.contains("type(m,1,c1)."));
        assert!(text.contains("type(w,2,c1)."));
        assert!(text.contains("type(t,2,c2)."));
        assert!(text.contains("0 {assign(D,S)} 1 :- slot(D,S)."));
        // exactly two c1 slots in the three-day pattern
        assert_eq!(text.matches(",c1).").count(), 2);
    }

    #[test]
    fn sampled_targets_rank_something() {
        let (b, space) = generate_scheduling_task(2, 2).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let h = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
            let first = world.profile(&h, 0);
            assert!((1..world.answer_sets.len()).any(|i| world.profile(&h, i) != first));
        }
    }

    #[test]
    fn sampling_rejects_flat_spaces() {
        // a slotless background: no assign atoms vary, so nothing ranks
        let b = scheduling_background(1, 1);
        let mut only_neq = ModeBias {
            ordering_decls: vec![ModeDeclaration {
                pred: sym("slot"),
                placeholders: vec![Placeholder::Var, Placeholder::Var],
            }],
            weights: [1].into_iter().collect(),
            max_level: 1,
            ..Default::default()
        };
        only_neq.limits.max_body = 1;
        let space = build_search_space(&only_neq).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            sample_target_hypothesis(&space, &world, &mut rng),
            Err(BenchError::ExhaustedSampling(_))
        ));
    }

    #[test]
    fn generated_orderings_are_respected_by_target() {
        let (b, space) = generate_scheduling_task(2, 2).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
        let (positives, orderings, mean) =
            generate_ordering_examples(&world, &target, 6, (0.5, 1.0), &mut rng).unwrap();
        assert_eq!(positives.len(), 12);
        assert_eq!(orderings.len(), 6);
        assert!(mean > 0.0 && mean <= 1.0);

        // re-check each ordering by definition
        let ctx = AspCtx::default();
        let mut program = b.clone();
        for id in &target.rule_ids {
            program.push(space.get(id).unwrap().rule.clone());
        }
        for o in &orderings {
            let e1 = positives.iter().find(|e| e.id == o.first).unwrap();
            let e2 = positives.iter().find(|e| e.id == o.second).unwrap();
            assert!(crate::task::respects_ordering(&program, e1, e2, o.kind, &ctx).unwrap());
            if o.kind == OrderingKind::Brave {
                assert!(!crate::task::respects_ordering(
                    &program,
                    e1,
                    e2,
                    OrderingKind::Cautious,
                    &ctx
                )
                .unwrap());
            }
        }
    }

    #[test]
    fn full_endpoints_make_brave_equal_cautious() {
        let (b, space) = generate_scheduling_task(2, 2).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let target = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
        let (_, orderings, _) =
            generate_ordering_examples(&world, &target, 8, (1.0, 1.0), &mut rng).unwrap();
        assert!(orderings.iter().all(|o| o.kind == OrderingKind::Cautious));
    }

    #[test]
    fn accuracy_is_one_for_identical_hypotheses() {
        let (b, space) = generate_scheduling_task(2, 2).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let target = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
        assert_eq!(pairwise_accuracy(&world, &target, &target), 1.0);
    }

    #[test]
    fn accuracy_is_symmetric() {
        let (b, space) = generate_scheduling_task(2, 2).unwrap();
        let world = RankingWorld::new(&b, &space, &AspCtx::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let h1 = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
        let h2 = sample_target_hypothesis(&space, &world, &mut rng).unwrap();
        assert_eq!(
            pairwise_accuracy(&world, &h1, &h2),
            pairwise_accuracy(&world, &h2, &h1)
        );
    }
}
