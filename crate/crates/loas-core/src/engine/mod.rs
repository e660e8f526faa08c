//! Solver backends and the learning loop: repeatedly solve the meta program
//! for an optimal remaining hypothesis, record violating reasons while the
//! optimality stays even, and return every optimal hypothesis once it turns
//! odd. A direct search strategy computes the same fixpoint from the task
//! judgements, and a brute-force oracle checks both.

mod direct;
mod external;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use crate::asp::AspCtx;
use crate::error::EngineError;
use crate::ground::ground;
use crate::meta::{build_t_meta, build_vr_meta, decode_meta_answer_set, MetaContext};
use crate::solve::{self, Compiled};
use crate::syntax::{sym, Atom, BodyElem, Interpretation, Program, Rule, Term};
use crate::task::{is_inductive_solution, Hypothesis, LearningTask, ViolatingReason};
use crate::weak;

pub use direct::DirectCache;
pub use external::parse_solver_output;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    MetaNative,
    MetaExternal,
    Direct,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    pub strategy: Strategy,
    /// Command template for the external backend; `{file}` is replaced by the
    /// program path.
    pub external_command: Option<String>,
    pub max_iterations: usize,
    pub timeout: Option<Duration>,
    /// Log external solver transcripts to stderr.
    pub log_transcripts: bool,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            strategy: Strategy::MetaNative,
            external_command: None,
            max_iterations: 10_000,
            timeout: None,
            log_transcripts: false,
        }
    }
}

impl EngineConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.strategy == Strategy::MetaExternal && self.external_command.is_none() {
            return Err(EngineError::MissingExternalCommand);
        }
        Ok(())
    }

    fn deadline(&self) -> Option<Instant> {
        self.timeout.map(|t| Instant::now() + t)
    }
}

/// An optimal answer set together with its level-0 optimality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveResult {
    pub answer_set: Interpretation,
    pub optimality: i64,
}

enum Backend {
    Native,
    External { command: String, log: bool },
}

impl Backend {
    fn of(config: &EngineConfig) -> Result<Backend, EngineError> {
        match config.strategy {
            Strategy::MetaExternal => Ok(Backend::External {
                command: config
                    .external_command
                    .clone()
                    .ok_or(EngineError::MissingExternalCommand)?,
                log: config.log_transcripts,
            }),
            _ => Ok(Backend::Native),
        }
    }

    fn solve(&self, p: &Program, ctx: &AspCtx) -> Result<Option<SolveResult>, EngineError> {
        match self {
            Backend::Native => solve_optimal_native(p, ctx),
            Backend::External { command, log } => {
                external::solve_external(command, p, ctx.solve.deadline, *log)
            }
        }
    }
}

fn solve_optimal_native(p: &Program, ctx: &AspCtx) -> Result<Option<SolveResult>, EngineError> {
    let g = ground(p, &ctx.ground)?;
    let c = Compiled::new(&g)?;
    let levels: BTreeSet<i64> = g
        .weak()
        .filter_map(|r| match r {
            Rule::Weak { level, .. } => level.as_int(),
            _ => None,
        })
        .collect();
    if levels.iter().all(|&l| l == 0) {
        let out = solve::find_optimal_level0(&c, &ctx.solve)?;
        return Ok(out.map(|(answer_set, optimality)| SolveResult { answer_set, optimality }));
    }
    // several priority levels: enumerate and filter by dominance
    let sets = solve::enumerate_stable(&c, &ctx.solve)?;
    let optimal = weak::optimal_among(&g, &sets)?;
    match optimal.into_iter().next() {
        None => Ok(None),
        Some(answer_set) => {
            let optimality = weak::weak_profile(&g, &answer_set)?.level_sum(0);
            Ok(Some(SolveResult { answer_set, optimality }))
        }
    }
}

/// Finds one optimal answer set of a program with the configured backend.
/// `None` means the program has no answer sets.
pub fn solve_optimal(
    p: &Program,
    config: &EngineConfig,
    ctx: &AspCtx,
) -> Result<Option<SolveResult>, EngineError> {
    config.validate()?;
    let mut ctx = ctx.clone();
    if ctx.solve.deadline.is_none() {
        ctx.solve.deadline = config.deadline();
    }
    Backend::of(config)?.solve(p, &ctx)
}

/// Outcome of a learning run.
#[derive(Debug, Clone)]
pub struct LearnOutcome {
    /// All optimal inductive solutions; empty when the task is unsatisfiable.
    pub solutions: Vec<Hypothesis>,
    /// Solver calls made by the loop (including the final one).
    pub iterations: usize,
    /// Violating reasons accumulated before the loop finished.
    pub reasons: Vec<ViolatingReason>,
}

fn meta_ctx_for(t: &LearningTask, ctx: &AspCtx) -> Result<MetaContext, EngineError> {
    MetaContext::new(t, ctx)
}

fn block_hypothesis(t: &LearningTask, h: &Hypothesis) -> Rule {
    let body = t
        .space
        .entries()
        .iter()
        .map(|e| {
            let atom = Atom {
                pred: sym("in_h"),
                args: vec![Term::Const(e.id.clone())],
            };
            if h.rule_ids.contains(&e.id) {
                BodyElem::pos(atom)
            } else {
                BodyElem::neg(atom)
            }
        })
        .collect();
    Rule::Constraint { body }
}

fn meta_loop(
    t: &LearningTask,
    backend: &Backend,
    max_iterations: usize,
    ctx: &AspCtx,
) -> Result<LearnOutcome, EngineError> {
    let mctx = meta_ctx_for(t, ctx)?;
    let t_meta = build_t_meta(&mctx);
    let mut reasons: Vec<ViolatingReason> = Vec::new();
    let mut iterations = 0usize;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(EngineError::IterationLimitExceeded(max_iterations));
        }
        let program = t_meta.union(&build_vr_meta(&mctx, &reasons)?);
        let Some(result) = backend.solve(&program, ctx)? else {
            return Ok(LearnOutcome { solutions: Vec::new(), iterations, reasons });
        };
        if result.optimality % 2 == 0 {
            let (_, reason) = decode_meta_answer_set(&mctx, &result.answer_set)?;
            let reason = reason.ok_or_else(|| {
                crate::error::MetaError::MalformedMetaModel(
                    "even optimality without a violation witness".into(),
                )
            })?;
            if reasons.contains(&reason) {
                return Err(crate::error::MetaError::MalformedMetaModel(
                    "violating reason repeated; the loop cannot progress".into(),
                )
                .into());
            }
            reasons.push(reason);
            continue;
        }
        // odd optimality: collect every optimal hypothesis by blocking the
        // ones found and re-solving while the optimum is unchanged
        let best = result.optimality;
        let mut solutions: BTreeSet<Hypothesis> = BTreeSet::new();
        let (first, _) = decode_meta_answer_set(&mctx, &result.answer_set)?;
        let mut blocked = program.clone();
        blocked.push(block_hypothesis(t, &first));
        solutions.insert(first);
        loop {
            iterations += 1;
            if iterations > max_iterations {
                return Err(EngineError::IterationLimitExceeded(max_iterations));
            }
            match backend.solve(&blocked, ctx)? {
                Some(next) if next.optimality == best => {
                    let (h, _) = decode_meta_answer_set(&mctx, &next.answer_set)?;
                    blocked.push(block_hypothesis(t, &h));
                    if !solutions.insert(h) {
                        return Err(crate::error::MetaError::MalformedMetaModel(
                            "blocked hypothesis returned again".into(),
                        )
                        .into());
                    }
                }
                _ => break,
            }
        }
        return Ok(LearnOutcome {
            solutions: solutions.into_iter().collect(),
            iterations,
            reasons,
        });
    }
}

/// Runs the learning loop and returns the set of optimal inductive solutions
/// of the task (empty when none exist). All strategies compute the same set.
pub fn ilasp2(t: &LearningTask, config: &EngineConfig) -> Result<LearnOutcome, EngineError> {
    ilasp2_with_cache(t, config, None)
}

/// Like [`ilasp2`], with a shared evaluation cache for the direct strategy.
/// The cache is only valid across tasks with the same background and space.
pub fn ilasp2_with_cache(
    t: &LearningTask,
    config: &EngineConfig,
    cache: Option<&DirectCache>,
) -> Result<LearnOutcome, EngineError> {
    config.validate()?;
    let mut ctx = AspCtx::default();
    ctx.solve.deadline = config.deadline();
    ctx.solve.prefer_preds = vec![sym("in_h")];
    match config.strategy {
        Strategy::Direct => direct::solve_direct(t, config.max_iterations, &ctx, cache),
        _ => {
            let backend = Backend::of(config)?;
            meta_loop(t, &backend, config.max_iterations, &ctx)
        }
    }
}

/// Independent oracle: enumerates hypothesis subsets in nondecreasing cost
/// and returns all minimum-cost inductive solutions, judged directly.
pub fn brute_force_solutions(
    t: &LearningTask,
    max_space: usize,
) -> Result<Vec<Hypothesis>, EngineError> {
    if t.space.len() > max_space {
        return Err(EngineError::SpaceTooLarge { size: t.space.len(), max: max_space });
    }
    let ctx = AspCtx::default();
    let entries = t.space.entries();
    let n = entries.len();
    let mut subsets: Vec<(u64, Hypothesis)> = Vec::with_capacity(1 << n);
    for mask in 0u32..(1u32 << n) {
        let ids = entries
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, e)| e.id.clone());
        let h = Hypothesis::from_ids(ids);
        subsets.push((t.hypothesis_cost(&h), h));
    }
    subsets.sort();
    let mut best: Option<u64> = None;
    let mut out = Vec::new();
    for (cost, h) in subsets {
        if best.is_some_and(|b| cost > b) {
            break;
        }
        if is_inductive_solution(t, &h, &ctx).map_err(EngineError::from)? {
            best = Some(cost);
            out.push(h);
        }
    }
    out.sort();
    Ok(out)
}
