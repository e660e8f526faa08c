//! Golden tests for the meta encodings on a small reference task, and the
//! end-to-end learning loop over it.

use loas_core::asp::AspCtx;
use loas_core::engine::{brute_force_solutions, ilasp2, solve_optimal, EngineConfig, Strategy};
use loas_core::meta::{
    append_body_atom, build_t_meta, build_vr_meta, decode_meta_answer_set, dominates_program,
    meta_weak, reify, reify_interpretation, MetaContext,
};
use loas_core::parser::{parse_ground_atom, parse_program};
use loas_core::syntax::{sym, Atom, Interpretation, Program, Rule, Term};
use loas_core::task::{Hypothesis, ViolatingReason};
use loas_core::taskfile::{load_task, LimitOverrides};

const TASK: &str = "
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

fn interp(atoms: &[&str]) -> Interpretation {
    atoms.iter().map(|a| parse_ground_atom(a).unwrap()).collect()
}

fn sorted_lines(p: &Program) -> Vec<String> {
    let mut v: Vec<String> = p.iter().map(|r| r.to_string()).collect();
    v.sort();
    v
}

fn sorted_vec(lines: &[&str]) -> Vec<String> {
    let mut v: Vec<String> = lines.iter().map(|s| s.to_string()).collect();
    v.sort();
    v
}

fn reference_context() -> MetaContext {
    let loaded = load_task(TASK, &LimitOverrides::default()).unwrap();
    MetaContext::new(&loaded.task, &AspCtx::default()).unwrap()
}

#[test]
fn t_meta_matches_reference() {
    let ctx = reference_context();
    let t_meta = build_t_meta(&ctx);
    let expected = sorted_vec(&[
        // background, reified and guarded
        "in_as(p(V),X) :- in_as(r(V),X), not in_as(q(V),X), as(X).",
        "in_as(q(V),X) :- in_as(r(V),X), not in_as(p(V),X), as(X).",
        "in_as(r(1),X) :- as(X).",
        "in_as(r(2),X) :- as(X).",
        "in_as(a,X) :- not in_as(b,X), as(X).",
        "in_as(b,X) :- not in_as(a,X), as(X).",
        // search space, additionally guarded by hypothesis membership
        "in_as(q(1),X) :- as(X), in_h(r1).",
        "w(1,1,args(V,r2),X) :- as(X), in_as(q(V),X), in_h(r2).",
        "w(1,1,args(b,r3),X) :- as(X), in_as(b,X), in_h(r3).",
        "0 {in_h(r1); in_h(r2); in_h(r3)} 3.",
        ":~ in_h(r1).[2@0, r1]",
        ":~ in_h(r2).[2@0, r2]",
        ":~ in_h(r3).[2@0, r3]",
        // positive examples
        "as(1).",
        "as(2).",
        "as(3).",
        "as(4).",
        "cov(1) :- in_as(p(2),1).",
        ":- not cov(1).",
        "cov(2) :- not in_as(p(2),2).",
        ":- not cov(2).",
        "cov(3) :- in_as(a,3), not in_as(b,3).",
        ":- not cov(3).",
        "cov(4) :- not in_as(a,4).",
        ":- not cov(4).",
        // negative examples
        "v_i :- in_as(p(1),n).",
        "as(n).",
        "violating :- v_i.",
        ":~ not violating.[1@0]",
        // brave ordering over fresh ids 5 and 6
        "as(5).",
        "as(6).",
        "cov(5) :- in_as(a,5), not in_as(b,5).",
        ":- not cov(5).",
        "cov(6) :- not in_as(a,6).",
        ":- not cov(6).",
        "dom_lv(5,6,L) :- lv(L), #sum{w(W,L,A,5)=W, w(W,L,A,6)=-W} < 0.",
        "non_dom_lv(5,6,L) :- lv(L), #sum{w(W,L,A,6)=W, w(W,L,A,5)=-W} < 0.",
        "non_bef(5,6,L) :- lv(L), lv(L2), L < L2, non_dom_lv(5,6,L2).",
        "dom(5,6) :- dom_lv(5,6,L), not non_bef(5,6,L).",
        ":- not dom(5,6).",
        "lv(1).",
        // cautious ordering over the examples' own ids
        "dom_lv(1,2,L) :- lv(L), #sum{w(W,L,A,1)=W, w(W,L,A,2)=-W} < 0.",
        "non_dom_lv(1,2,L) :- lv(L), #sum{w(W,L,A,2)=W, w(W,L,A,1)=-W} < 0.",
        "non_bef(1,2,L) :- lv(L), lv(L2), L < L2, non_dom_lv(1,2,L2).",
        "dom(1,2) :- dom_lv(1,2,L), not non_bef(1,2,L).",
        "v_p(1,2) :- not dom(1,2).",
        "v_p :- v_p(T1,T2).",
        "violating :- v_p.",
    ]);
    assert_eq!(sorted_lines(&t_meta), expected);
}

fn reference_reasons() -> Vec<ViolatingReason> {
    vec![
        ViolatingReason::Interpretation(interp(&["p(1)", "p(2)", "r(1)", "r(2)", "a"])),
        ViolatingReason::Pair {
            first: interp(&["p(2)", "q(1)", "r(1)", "r(2)", "a"]),
            second: interp(&["q(1)", "q(2)", "r(1)", "r(2)", "a"]),
            ordering: (sym("1"), sym("2")),
        },
    ]
}

#[test]
fn vr_meta_matches_reference() {
    let ctx = reference_context();
    let vr = build_vr_meta(&ctx, &reference_reasons()).unwrap();
    let mut expected: Vec<String> = vec![
        // stored violating interpretation
        "in_vs(a,v1).",
        "in_vs(p(1),v1).",
        "in_vs(p(2),v1).",
        "in_vs(r(1),v1).",
        "in_vs(r(2),v1).",
        ":- not nas(v1).",
        "vs(v1).",
        // stored violating pair
        "in_vs(a,v2).",
        "in_vs(p(2),v2).",
        "in_vs(q(1),v2).",
        "in_vs(r(1),v2).",
        "in_vs(r(2),v2).",
        "in_vs(a,v3).",
        "in_vs(q(1),v3).",
        "in_vs(q(2),v3).",
        "in_vs(r(1),v3).",
        "in_vs(r(2),v3).",
        "vs(v2).",
        "vs(v3).",
        "dom_lv(v2,v3,L) :- lv(L), #sum{w(W,L,A,v2)=W, w(W,L,A,v3)=-W} < 0.",
        "non_dom_lv(v2,v3,L) :- lv(L), #sum{w(W,L,A,v3)=W, w(W,L,A,v2)=-W} < 0.",
        "non_bef(v2,v3,L) :- lv(L), lv(L2), L < L2, non_dom_lv(v2,v3,L2).",
        "dom(v2,v3) :- dom_lv(v2,v3,L), not non_bef(v2,v3,L).",
        ":- not nas(v2), not nas(v3), not dom(v2,v3).",
        // reduct computation for the background
        "mmr(p(V),X) :- mmr(r(V),X), not in_vs(q(V),X), vs(X).",
        "mmr(q(V),X) :- mmr(r(V),X), not in_vs(p(V),X), vs(X).",
        "mmr(r(1),X) :- vs(X).",
        "mmr(r(2),X) :- vs(X).",
        "mmr(a,X) :- not in_vs(b,X), vs(X).",
        "mmr(b,X) :- not in_vs(a,X), vs(X).",
        // hypothesis-guarded reduct computation for the space
        "mmr(q(1),X) :- vs(X), in_h(r1).",
        "w(1,1,args(V,r2),X) :- vs(X), in_vs(q(V),X), in_h(r2).",
        "w(1,1,args(b,r3),X) :- vs(X), in_vs(b,X), in_h(r3).",
        "lv(1).",
    ]
    .into_iter()
    .map(String::from)
    .collect();
    // answer-set mismatch rules, one pair per atom of the ground base plus bot
    for atom in ["a", "b", "bot", "p(1)", "p(2)", "q(1)", "q(2)", "r(1)", "r(2)"] {
        expected.push(format!("nas(X) :- in_vs({atom},X), not mmr({atom},X)."));
        expected.push(format!("nas(X) :- not in_vs({atom},X), mmr({atom},X)."));
    }
    expected.sort();
    assert_eq!(sorted_lines(&vr), expected);
}

#[test]
fn vr_meta_without_reasons_changes_nothing() {
    let ctx = reference_context();
    let t_meta = build_t_meta(&ctx);
    let aux_only = build_vr_meta(&ctx, &[]).unwrap();
    assert!(!aux_only.iter().any(|r| r.to_string().starts_with("vs(")));
    let actx = AspCtx::default();
    let plain = loas_core::asp::enumerate_answer_sets(&t_meta, &actx).unwrap();
    let with_aux =
        loas_core::asp::enumerate_answer_sets(&t_meta.union(&aux_only), &actx).unwrap();
    assert_eq!(plain, with_aux);
}

#[test]
fn cover_machinery_restricts_answer_sets() {
    let p = parse_program("p :- not q. q :- not p.").unwrap();
    let x = Term::Var(sym("X"));
    let as_x = Atom::new("as", vec![x.clone()]);
    let mut q = append_body_atom(&reify(&p, "in_as", &x), &as_x);
    q.push(Rule::fact(parse_ground_atom("as(as1)").unwrap()));
    q.push(Rule::fact(parse_ground_atom("as(as2)").unwrap()));
    let i1 = loas_core::task::PartialInterpretation::new(sym("i1"), interp(&["p"]), interp(&[]))
        .unwrap();
    let i2 = loas_core::task::PartialInterpretation::new(sym("i2"), interp(&[]), interp(&["p"]))
        .unwrap();
    q.extend_from(&loas_core::meta::cover_program(&i1, &Term::Const(sym("as1"))));
    q.extend_from(&loas_core::meta::cover_program(&i2, &Term::Const(sym("as2"))));

    let sets = loas_core::asp::enumerate_answer_sets(&q, &AspCtx::default()).unwrap();
    assert_eq!(sets.len(), 1);
    assert_eq!(
        sets[0],
        interp(&["as(as1)", "as(as2)", "in_as(p,as1)", "in_as(q,as2)", "cov(as1)", "cov(as2)"])
    );
}

fn two_weak_program() -> Program {
    parse_program(":~ p(V).[1@2, V]\n:~ q(V).[2@1, V]").unwrap()
}

#[test]
fn weak_tuples_via_meta_weak_match_profiles() {
    let x = Term::Var(sym("X"));
    let weaks = two_weak_program();
    let mut p = Program::new();
    for w in weaks.iter() {
        p.push(meta_weak(w, "in_as", "as", &x));
    }
    let i = interp(&["p(1)", "p(2)", "q(1)"]);
    p.extend_from(&reify_interpretation(&i, "in_as", &Term::Const(sym("id"))));
    p.push(Rule::fact(parse_ground_atom("as(id)").unwrap()));
    let sets = loas_core::asp::enumerate_answer_sets(&p, &AspCtx::default()).unwrap();
    assert_eq!(sets.len(), 1);
    let w_atoms: Vec<String> = sets[0]
        .iter()
        .filter(|a| a.pred.as_ref() == "w")
        .map(|a| a.to_string())
        .collect();
    assert_eq!(
        w_atoms,
        vec!["w(1,2,args(1),id)", "w(1,2,args(2),id)", "w(2,1,args(1),id)"]
    );

    // the profile computed directly agrees
    let mut facts: Program = i.iter().cloned().map(Rule::fact).collect();
    facts.extend_from(&weaks);
    let g = loas_core::ground::ground(&facts, &Default::default()).unwrap();
    let profile = loas_core::weak::weak_profile(&g, &i).unwrap();
    let tuples: Vec<(i64, i64, Vec<Term>)> = profile.tuples.iter().cloned().collect();
    assert_eq!(
        tuples,
        vec![
            (1, 2, vec![Term::Int(1)]),
            (1, 2, vec![Term::Int(2)]),
            (2, 1, vec![Term::Int(1)]),
        ]
    );
}

#[test]
fn dominance_block_agrees_with_profiles() {
    let x = Term::Var(sym("X"));
    let weaks = two_weak_program();
    let i1 = interp(&["p(1)", "p(2)", "q(1)"]);
    let i2 = interp(&["p(1)", "p(2)", "p(3)"]);

    let build = |first: &str, second: &str| {
        let mut p = Program::new();
        for w in weaks.iter() {
            p.push(meta_weak(w, "in_as", "as", &x));
        }
        p.extend_from(&reify_interpretation(&i1, "in_as", &Term::Const(sym("id1"))));
        p.extend_from(&reify_interpretation(&i2, "in_as", &Term::Const(sym("id2"))));
        p.push(Rule::fact(parse_ground_atom("as(id1)").unwrap()));
        p.push(Rule::fact(parse_ground_atom("as(id2)").unwrap()));
        p.push(Rule::fact(parse_ground_atom("lv(1)").unwrap()));
        p.push(Rule::fact(parse_ground_atom("lv(2)").unwrap()));
        p.extend_from(&dominates_program(
            &Term::Const(sym(first)),
            &Term::Const(sym(second)),
        ));
        p
    };

    let forward = loas_core::asp::enumerate_answer_sets(&build("id1", "id2"), &AspCtx::default())
        .unwrap();
    assert_eq!(forward.len(), 1);
    assert!(forward[0].contains(&parse_ground_atom("dom_lv(id1,id2,2)").unwrap()));
    assert!(forward[0].contains(&parse_ground_atom("non_dom_lv(id1,id2,1)").unwrap()));
    assert!(!forward[0].iter().any(|a| a.pred.as_ref() == "non_bef"));
    assert!(forward[0].contains(&parse_ground_atom("dom(id1,id2)").unwrap()));

    let backward = loas_core::asp::enumerate_answer_sets(&build("id2", "id1"), &AspCtx::default())
        .unwrap();
    assert_eq!(backward.len(), 1);
    assert!(backward[0].contains(&parse_ground_atom("dom_lv(id2,id1,1)").unwrap()));
    assert!(backward[0].contains(&parse_ground_atom("non_dom_lv(id2,id1,2)").unwrap()));
    assert!(backward[0].contains(&parse_ground_atom("non_bef(id2,id1,1)").unwrap()));
    assert!(!backward[0].contains(&parse_ground_atom("dom(id2,id1)").unwrap()));
}

#[test]
fn optimal_meta_model_after_reasons_has_cost_five() {
    let ctx = reference_context();
    let program = build_t_meta(&ctx).union(&build_vr_meta(&ctx, &reference_reasons()).unwrap());
    let config = EngineConfig::default();
    let result = solve_optimal(&program, &config, &AspCtx::default()).unwrap().unwrap();
    assert_eq!(result.optimality, 5);
    let (hyp, reason) = decode_meta_answer_set(&ctx, &result.answer_set).unwrap();
    assert_eq!(hyp, Hypothesis::from_ids([sym("r1"), sym("r2")]));
    assert!(reason.is_none());
}

#[test]
fn learning_loop_finds_the_reference_solution() {
    let loaded = load_task(TASK, &LimitOverrides::default()).unwrap();
    let expected = vec![Hypothesis::from_ids([sym("r1"), sym("r2")])];

    let native = ilasp2(&loaded.task, &EngineConfig::default()).unwrap();
    assert_eq!(native.solutions, expected);
    assert!(native.iterations <= 40, "took {} iterations", native.iterations);

    let direct = ilasp2(
        &loaded.task,
        &EngineConfig { strategy: Strategy::Direct, ..Default::default() },
    )
    .unwrap();
    assert_eq!(direct.solutions, expected);

    let oracle = brute_force_solutions(&loaded.task, 16).unwrap();
    assert_eq!(oracle, expected);
}

#[test]
fn decoding_reads_hypothesis_and_witnesses() {
    let ctx = reference_context();
    // a violating-interpretation witness
    let model = interp(&[
        "in_h(r2)",
        "v_i",
        "violating",
        "in_as(r(1),n)",
        "in_as(r(2),n)",
        "in_as(p(1),n)",
        "in_as(q(2),n)",
        "in_as(a,n)",
        "in_as(p(2),1)",
    ]);
    let (hyp, reason) = decode_meta_answer_set(&ctx, &model).unwrap();
    assert_eq!(hyp, Hypothesis::from_ids([sym("r2")]));
    assert_eq!(
        reason,
        Some(ViolatingReason::Interpretation(interp(&[
            "r(1)", "r(2)", "p(1)", "q(2)", "a"
        ])))
    );

    // a violating-pair witness
    let model = interp(&[
        "in_h(r2)",
        "v_p(1,2)",
        "v_p",
        "violating",
        "in_as(p(2),1)",
        "in_as(q(1),1)",
        "in_as(r(1),1)",
        "in_as(r(2),1)",
        "in_as(a,1)",
        "in_as(p(1),2)",
        "in_as(q(2),2)",
        "in_as(r(1),2)",
        "in_as(r(2),2)",
        "in_as(a,2)",
    ]);
    let (hyp, reason) = decode_meta_answer_set(&ctx, &model).unwrap();
    assert_eq!(hyp, Hypothesis::from_ids([sym("r2")]));
    match reason {
        Some(ViolatingReason::Pair { first, second, ordering }) => {
            assert_eq!(first, interp(&["p(2)", "q(1)", "r(1)", "r(2)", "a"]));
            assert_eq!(second, interp(&["p(1)", "q(2)", "r(1)", "r(2)", "a"]));
            assert_eq!(ordering, (sym("1"), sym("2")));
        }
        other => panic!("expected a pair, got {other:?}"),
    }

    // neither marker: no reason
    let model = interp(&["in_h(r1)", "in_as(p(2),1)"]);
    let (hyp, reason) = decode_meta_answer_set(&ctx, &model).unwrap();
    assert_eq!(hyp, Hypothesis::from_ids([sym("r1")]));
    assert!(reason.is_none());
}
