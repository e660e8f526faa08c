//! Task-file loading. A task file mixes background rules (bare or inside
//! `#background { ... }`) with directives:
//!
//! ```text
//! #modeh(atom).  #modeb(atom).  #modeo(atom).
//! #weight(w).  #maxlevel(n).  #maxbody(n).  #maxvars(n).  #constant(c).
//! #pos(id, {inc}, {exc}).  #neg(id, {inc}, {exc}).
//! #brave_ordering(id1, id2).  #cautious_ordering(id1, id2).
//! #space_rule(id) <rule>
//! ```
//!
//! `v` and `c` inside mode atoms are variable and constant placeholders. The
//! search space is built from the mode bias; `#space_rule` adds (or fully
//! specifies) entries with explicit identifiers.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::error::{AspError, SpaceError, TaskError};
use crate::parser::{check_rule_safety, Parser, Tok};
use crate::space::{build_search_space, ModeBias, ModeDeclaration, Placeholder, SearchSpace};
use crate::syntax::{sym, Atom, Interpretation, Program, Rule, Sym, Term};
use crate::task::{LearningTask, OrderingExample, OrderingKind, PartialInterpretation};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LoadError {
    #[error(transparent)]
    Asp(#[from] AspError),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("duplicate search-space id {0}")]
    DuplicateRuleId(Sym),
}

/// Limit overrides applied on top of the file's own directives.
#[derive(Debug, Clone, Default)]
pub struct LimitOverrides {
    pub max_body: Option<usize>,
    pub max_vars: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct LoadedTask {
    pub task: LearningTask,
    pub bias: ModeBias,
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct Source {
    background: Vec<Rule>,
    modeh: Vec<ModeDeclaration>,
    modeb: Vec<ModeDeclaration>,
    modeo: Vec<ModeDeclaration>,
    weights: BTreeSet<i64>,
    max_level: Option<i64>,
    max_body: Option<usize>,
    max_vars: Option<usize>,
    constants: BTreeSet<Sym>,
    positives: Vec<PartialInterpretation>,
    negatives: Vec<PartialInterpretation>,
    orderings: Vec<OrderingExample>,
    explicit: Vec<(Sym, Rule)>,
}

fn placeholder_decl(p: &mut Parser, atom: Atom) -> Result<ModeDeclaration, AspError> {
    let mut placeholders = Vec::new();
    for arg in &atom.args {
        match arg {
            Term::Const(c) if c.as_ref() == "v" => placeholders.push(Placeholder::Var),
            Term::Const(c) if c.as_ref() == "c" => placeholders.push(Placeholder::Constant),
            other => {
                return p.err(format!(
                    "mode placeholder must be 'v' or 'c', found {other}"
                ))
            }
        }
    }
    Ok(ModeDeclaration { pred: atom.pred, placeholders })
}

fn parse_id(p: &mut Parser) -> Result<Sym, AspError> {
    match p.peek().clone() {
        Tok::Ident(s) => {
            p.eat(&Tok::Ident(s.clone()))?;
            Ok(sym(&s))
        }
        Tok::Int(n) => {
            p.eat(&Tok::Int(n))?;
            Ok(sym(&n.to_string()))
        }
        other => p.err(format!("expected an identifier, found {other:?}")),
    }
}

fn parse_atom_set(p: &mut Parser) -> Result<Interpretation, AspError> {
    p.eat(&Tok::LBrace)?;
    let mut out = Interpretation::new();
    if !matches!(p.peek(), Tok::RBrace) {
        loop {
            let atom = p.parse_atom()?;
            if !atom.is_ground() {
                return p.err(format!("example atom {atom} must be ground"));
            }
            out.insert(atom);
            if matches!(p.peek(), Tok::Comma) {
                p.eat(&Tok::Comma)?;
            } else {
                break;
            }
        }
    }
    p.eat(&Tok::RBrace)?;
    Ok(out)
}

fn parse_example(p: &mut Parser) -> Result<(Sym, Interpretation, Interpretation), AspError> {
    p.eat(&Tok::LParen)?;
    let id = parse_id(p)?;
    p.eat(&Tok::Comma)?;
    let inc = parse_atom_set(p)?;
    p.eat(&Tok::Comma)?;
    let exc = parse_atom_set(p)?;
    p.eat(&Tok::RParen)?;
    p.eat(&Tok::Dot)?;
    Ok((id, inc, exc))
}

fn parse_id_pair(p: &mut Parser) -> Result<(Sym, Sym), AspError> {
    p.eat(&Tok::LParen)?;
    let a = parse_id(p)?;
    p.eat(&Tok::Comma)?;
    let b = parse_id(p)?;
    p.eat(&Tok::RParen)?;
    p.eat(&Tok::Dot)?;
    Ok((a, b))
}

fn check_background_rule(rule: &Rule, index: usize) -> Result<(), AspError> {
    for atom in rule.atoms() {
        if atom.pred.as_ref() == crate::syntax::BOT {
            return Err(AspError::Syntax {
                line: 0,
                col: 0,
                msg: format!("statement {index}: predicate 'bot' is reserved"),
            });
        }
    }
    check_rule_safety(rule, index)
}

fn parse_source(text: &str) -> Result<Source, LoadError> {
    let mut p = Parser::new(text)?;
    let mut src = Source::default();
    let mut index = 0usize;
    while !p.at_eof() {
        let directive = match p.peek() {
            Tok::Directive(d) => Some(d.clone()),
            _ => None,
        };
        let Some(d) = directive else {
            let rule = p.parse_rule()?;
            check_background_rule(&rule, index)?;
            src.background.push(rule);
            index += 1;
            continue;
        };
        p.eat(&Tok::Directive(d.clone()))?;
        match d.as_str() {
            "background" => {
                p.eat(&Tok::LBrace)?;
                while !matches!(p.peek(), Tok::RBrace) {
                    let rule = p.parse_rule()?;
                    check_background_rule(&rule, index)?;
                    src.background.push(rule);
                    index += 1;
                }
                p.eat(&Tok::RBrace)?;
                if matches!(p.peek(), Tok::Dot) {
                    p.eat(&Tok::Dot)?;
                }
            }
            "modeh" | "modeb" | "modeo" => {
                p.eat(&Tok::LParen)?;
                let atom = p.parse_atom()?;
                p.eat(&Tok::RParen)?;
                p.eat(&Tok::Dot)?;
                let decl = placeholder_decl(&mut p, atom)?;
                match d.as_str() {
                    "modeh" => src.modeh.push(decl),
                    "modeb" => src.modeb.push(decl),
                    _ => src.modeo.push(decl),
                }
            }
            "weight" => {
                p.eat(&Tok::LParen)?;
                let w = p.eat_int()?;
                p.eat(&Tok::RParen)?;
                p.eat(&Tok::Dot)?;
                src.weights.insert(w);
            }
            "maxlevel" | "maxbody" | "maxvars" => {
                p.eat(&Tok::LParen)?;
                let n = p.eat_int()?;
                p.eat(&Tok::RParen)?;
                p.eat(&Tok::Dot)?;
                match d.as_str() {
                    "maxlevel" => src.max_level = Some(n),
                    "maxbody" => src.max_body = Some(n.max(0) as usize),
                    _ => src.max_vars = Some(n.max(0) as usize),
                }
            }
            "constant" => {
                p.eat(&Tok::LParen)?;
                let c = p.eat_ident()?;
                p.eat(&Tok::RParen)?;
                p.eat(&Tok::Dot)?;
                src.constants.insert(sym(&c));
            }
            "pos" => {
                let (id, inc, exc) = parse_example(&mut p)?;
                src.positives.push(PartialInterpretation::new(id, inc, exc)?);
            }
            "neg" => {
                let (id, inc, exc) = parse_example(&mut p)?;
                src.negatives.push(PartialInterpretation::new(id, inc, exc)?);
            }
            "brave_ordering" => {
                let (a, b) = parse_id_pair(&mut p)?;
                src.orderings.push(OrderingExample { first: a, second: b, kind: OrderingKind::Brave });
            }
            "cautious_ordering" => {
                let (a, b) = parse_id_pair(&mut p)?;
                src.orderings.push(OrderingExample {
                    first: a,
                    second: b,
                    kind: OrderingKind::Cautious,
                });
            }
            "space_rule" => {
                p.eat(&Tok::LParen)?;
                let id = parse_id(&mut p)?;
                p.eat(&Tok::RParen)?;
                let rule = p.parse_rule()?;
                check_background_rule(&rule, index)?;
                index += 1;
                src.explicit.push((id, rule));
            }
            other => {
                return Err(p.err::<()>(format!("unknown directive #{other}")).unwrap_err().into())
            }
        }
    }
    Ok(src)
}

fn collect_constants(src: &Source) -> BTreeSet<Sym> {
    fn from_term(t: &Term, out: &mut BTreeSet<Sym>) {
        match t {
            Term::Const(c) => {
                out.insert(c.clone());
            }
            Term::Func(_, args) => args.iter().for_each(|a| from_term(a, out)),
            _ => {}
        }
    }
    let mut out = BTreeSet::new();
    for rule in &src.background {
        for atom in rule.atoms() {
            atom.args.iter().for_each(|t| from_term(t, &mut out));
        }
    }
    for e in src.positives.iter().chain(src.negatives.iter()) {
        for atom in e.inclusions.iter().chain(e.exclusions.iter()) {
            atom.args.iter().for_each(|t| from_term(t, &mut out));
        }
    }
    out
}

/// Loads a task from text, applying limit overrides on top of the file's own
/// directives, and builds the search space.
pub fn load_task(text: &str, overrides: &LimitOverrides) -> Result<LoadedTask, LoadError> {
    let src = parse_source(text)?;
    let background: Program = src.background.iter().cloned().collect();

    let mut bias = ModeBias {
        head_decls: src.modeh.clone(),
        body_decls: src.modeb.clone(),
        ordering_decls: src.modeo.clone(),
        weights: src.weights.clone(),
        max_level: src.max_level.unwrap_or(1),
        ..Default::default()
    };
    if let Some(n) = src.max_body {
        bias.limits.max_body = n;
    }
    if let Some(n) = overrides.max_body {
        bias.limits.max_body = n;
    }
    if let Some(n) = src.max_vars {
        bias.limits.max_vars = n;
    }
    if let Some(n) = overrides.max_vars {
        bias.limits.max_vars = n;
    }
    bias.limits.constants =
        if src.constants.is_empty() { collect_constants(&src) } else { src.constants.clone() };

    let mut warnings = Vec::new();
    let background_preds: BTreeSet<(Sym, usize)> = src
        .background
        .iter()
        .flat_map(|r| r.atoms().into_iter().map(|a| (a.pred.clone(), a.arity())))
        .collect();
    for decl in bias
        .head_decls
        .iter()
        .chain(bias.body_decls.iter())
        .chain(bias.ordering_decls.iter())
    {
        if !background_preds.contains(&(decl.pred.clone(), decl.arity())) {
            warnings.push(format!(
                "mode declaration {}/{} matches no background predicate",
                decl.pred,
                decl.arity()
            ));
        }
    }

    let mut named: Vec<(Sym, Rule)> = Vec::new();
    let mut used: BTreeSet<Sym> = BTreeSet::new();
    for (id, rule) in &src.explicit {
        if !used.insert(id.clone()) {
            return Err(LoadError::DuplicateRuleId(id.clone()));
        }
        named.push((id.clone(), rule.clone()));
    }
    let has_bias =
        !(bias.head_decls.is_empty() && bias.body_decls.is_empty() && bias.ordering_decls.is_empty());
    if has_bias {
        let generated = build_search_space(&bias)?;
        let mut counter = 1usize;
        for entry in generated.entries() {
            let mut id = sym(&format!("r{counter}"));
            while used.contains(&id) {
                counter += 1;
                id = sym(&format!("r{counter}"));
            }
            counter += 1;
            used.insert(id.clone());
            named.push((id, entry.rule.clone()));
        }
    }
    let space = SearchSpace::from_named_rules(named);

    let task = LearningTask::new(background, space, src.positives, src.negatives, src.orderings)?;
    Ok(LoadedTask { task, bias, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = "
        % background may be bare or in a block
        #background {
            p(V) :- r(V), not q(V).
            q(V) :- r(V), not p(V).
            r(1). r(2).
            a :- not b.
            b :- not a.
        }
        #space_rule(r1) q(1).
        #space_rule(r2) :~ q(V).[1@1, V, r2]
        #space_rule(r3) :~ b.[1@1, b, r3]
        #pos(1, {p(2)}, {}).
        #pos(2, {}, {p(2)}).
        #pos(3, {a}, {b}).
        #pos(4, {}, {a}).
        #neg(5, {p(1)}, {}).
        #brave_ordering(3, 4).
        #cautious_ordering(1, 2).
    ";

    #[test]
    fn loads_explicit_space_task() {
        let loaded = load_task(SMALL, &LimitOverrides::default()).unwrap();
        let t = &loaded.task;
        assert_eq!(t.background.len(), 6);
        assert_eq!(t.space.len(), 3);
        assert_eq!(t.positives.len(), 4);
        assert_eq!(t.negatives.len(), 1);
        assert_eq!(t.orderings.len(), 2);
        assert_eq!(t.space.get(&sym("r2")).unwrap().cost, 1);
    }

    #[test]
    fn loads_bias_task() {
        let text = "
            slot(m,1). slot(m,2).
            0 {assign(D,S)} 1 :- slot(D,S).
            #modeo(assign(v,v)).
            #weight(1). #weight(-1).
            #maxlevel(2).
            #maxbody(2).
            #pos(e1, {}, {}).
        ";
        let loaded = load_task(text, &LimitOverrides::default()).unwrap();
        assert!(loaded.task.space.len() > 0);
        assert!(loaded.warnings.is_empty());
        // every generated rule is a weak constraint over assign
        for e in loaded.task.space.entries() {
            assert!(e.rule.is_weak());
        }
    }

    #[test]
    fn flags_mode_arity_mismatch() {
        let text = "
            type(m,1,c1).
            #modeo(type(v,c)).
            #weight(1).
            #pos(e1, {}, {}).
        ";
        let loaded = load_task(text, &LimitOverrides::default()).unwrap();
        assert_eq!(loaded.warnings.len(), 1);
        assert!(loaded.warnings[0].contains("type/2"));
    }

    #[test]
    fn rejects_duplicate_ids() {
        let text = "#space_rule(r1) p. #space_rule(r1) q. #pos(e, {}, {}).";
        assert!(matches!(
            load_task(text, &LimitOverrides::default()),
            Err(LoadError::DuplicateRuleId(_))
        ));
    }

    #[test]
    fn unknown_ordering_endpoint_rejected() {
        let text = "#pos(e1, {}, {}). #cautious_ordering(e1, nope).";
        assert!(matches!(
            load_task(text, &LimitOverrides::default()),
            Err(LoadError::Task(TaskError::UnknownOrderingEndpoint(_)))
        ));
    }
}
