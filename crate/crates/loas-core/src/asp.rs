//! High-level operations over programs: answer-set enumeration, optimal
//! answer sets, and the classical-model extension test.


use crate::ground::{ground, GroundOptions};
use crate::solve::{self, Compiled, SolveError, SolveOptions};
use crate::syntax::{Atom, Interpretation, Program};
use crate::weak;

/// Evaluation context threading grounding and search options through the
/// semantic judgements.
#[derive(Debug, Clone, Default)]
pub struct AspCtx {
    pub ground: GroundOptions,
    pub solve: SolveOptions,
}

/// `AS(p)`: all answer sets, canonically ordered. Weak constraints do not
/// change the result.
pub fn enumerate_answer_sets(p: &Program, ctx: &AspCtx) -> Result<Vec<Interpretation>, SolveError> {
    let g = ground(p, &ctx.ground)?;
    let c = Compiled::new(&g)?;
    solve::enumerate_stable(&c, &ctx.solve)
}

/// `AS*(p)`: the answer sets not dominated by any other answer set.
pub fn optimal_answer_sets(p: &Program, ctx: &AspCtx) -> Result<Vec<Interpretation>, SolveError> {
    let g = ground(p, &ctx.ground)?;
    let c = Compiled::new(&g)?;
    let sets = solve::enumerate_stable(&c, &ctx.solve)?;
    Ok(weak::optimal_among(&g, &sets)?)
}

/// Whether some classical model of the non-weak rules of `p` extends the
/// partial interpretation given by `inc`/`exc`.
pub fn has_classical_model_extending(
    p: &Program,
    inc: &[Atom],
    exc: &[Atom],
    ctx: &AspCtx,
) -> Result<bool, SolveError> {
    let non_weak: Program = p.non_weak().cloned().collect();
    let g = ground(&non_weak, &ctx.ground)?;
    let c = Compiled::new(&g)?;
    solve::has_classical_model(&c, inc, exc, &ctx.solve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::{parse_ground_atom, parse_program};

    fn interp(atoms: &[&str]) -> Interpretation {
        atoms.iter().map(|a| parse_ground_atom(a).unwrap()).collect()
    }

    #[test]
    fn optimal_drops_dominated_sets() {
        let p = parse_program("0 {a} 1. :~ a.[1@1, a]").unwrap();
        let ctx = AspCtx::default();
        assert_eq!(enumerate_answer_sets(&p, &ctx).unwrap().len(), 2);
        let opt = optimal_answer_sets(&p, &ctx).unwrap();
        assert_eq!(opt, vec![interp(&[])]);
    }

    #[test]
    fn no_weak_constraints_means_all_optimal() {
        let p = parse_program("0 {a} 1.").unwrap();
        let ctx = AspCtx::default();
        assert_eq!(optimal_answer_sets(&p, &ctx).unwrap().len(), 2);
    }

    #[test]
    fn classical_extension_examples() {
        let ctx = AspCtx::default();
        let p = parse_program("p.").unwrap();
        assert!(!has_classical_model_extending(&p, &[], &[parse_ground_atom("p").unwrap()], &ctx)
            .unwrap());
        let empty = Program::new();
        assert!(has_classical_model_extending(
            &empty,
            &[parse_ground_atom("q").unwrap()],
            &[],
            &ctx
        )
        .unwrap());
    }
}
