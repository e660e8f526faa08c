//! Native search over ground programs: branch-and-propagate on atom truth
//! values, with unfounded-set checking on the reduct at full assignments and
//! branch-and-bound on the level-0 weak-constraint sum.
//!
//! The same machinery also finds classical models (rules read as implications,
//! choice heads as satisfiable ranges) for the task consistency checks.

use std::collections::HashMap;
use std::time::Instant;

use crate::error::AspError;
use crate::syntax::{Atom, BodyElem, Interpretation, Program, Rule, Sym, SumCoeff, Term};

pub use crate::error::SolveError;

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Predicates whose atoms are decided first, in the given order.
    pub prefer_preds: Vec<Sym>,
    pub deadline: Option<Instant>,
}

#[derive(Clone)]
enum CKind {
    Head(usize),
    Bot,
    Choice { lower: i64, upper: i64, heads: Vec<usize> },
    Weak { weight: i64, level: i64, terms: Vec<Term> },
}

struct CRule {
    kind: CKind,
    pos: Vec<usize>,
    neg: Vec<usize>,
    sums: Vec<usize>,
    cards: Vec<usize>,
}

impl CRule {
    fn n_elems(&self) -> u32 {
        (self.pos.len() + self.neg.len() + self.sums.len() + self.cards.len()) as u32
    }
}

struct CSum {
    elems: Vec<(usize, i64)>,
}

struct CCard {
    lower: Option<i64>,
    upper: Option<i64>,
    atoms: Vec<usize>,
}

/// A ground program compiled for search.
pub struct Compiled {
    pub atoms: Vec<Atom>,
    index: HashMap<Atom, usize>,
    rules: Vec<CRule>,
    sums: Vec<CSum>,
    cards: Vec<CCard>,
    pos_in_body: Vec<Vec<usize>>,
    neg_in_body: Vec<Vec<usize>>,
    in_sum: Vec<Vec<usize>>,
    in_card: Vec<Vec<usize>>,
    head_of: Vec<Vec<usize>>,
    sum_in_rule: Vec<Vec<usize>>,
    card_in_rule: Vec<Vec<usize>>,
}

impl Compiled {
    pub fn new(p: &Program) -> Result<Self, AspError> {
        let mut atom_set: std::collections::BTreeSet<Atom> = std::collections::BTreeSet::new();
        for rule in p.iter() {
            if !rule.is_ground() {
                return Err(AspError::NotGround(rule.to_string()));
            }
            for a in rule.atoms() {
                atom_set.insert(a.clone());
            }
        }
        let atoms: Vec<Atom> = atom_set.into_iter().collect();
        let index: HashMap<Atom, usize> =
            atoms.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect();

        let mut c = Compiled {
            pos_in_body: vec![Vec::new(); atoms.len()],
            neg_in_body: vec![Vec::new(); atoms.len()],
            in_sum: vec![Vec::new(); atoms.len()],
            in_card: vec![Vec::new(); atoms.len()],
            head_of: vec![Vec::new(); atoms.len()],
            sum_in_rule: Vec::new(),
            card_in_rule: Vec::new(),
            rules: Vec::new(),
            sums: Vec::new(),
            cards: Vec::new(),
            atoms,
            index,
        };

        'rules: for rule in p.iter() {
            let mut pos = Vec::new();
            let mut neg = Vec::new();
            let mut sums = Vec::new();
            let mut cards = Vec::new();
            for e in rule.body() {
                match e {
                    BodyElem::Lit(l) => {
                        let a = c.index[&l.atom];
                        if l.negated {
                            neg.push(a);
                        } else {
                            pos.push(a);
                        }
                    }
                    BodyElem::Lt(a, b) => match (a.as_int(), b.as_int()) {
                        (Some(x), Some(y)) if x < y => {}
                        (Some(_), Some(_)) => continue 'rules, // constantly false
                        _ => {
                            return Err(AspError::Grounding(format!("comparison {a} < {b}")));
                        }
                    },
                    BodyElem::Sum(s) => {
                        let mut elems = Vec::new();
                        for (atom, coeff) in &s.elems {
                            let w = match coeff {
                                SumCoeff::Int(n) => *n,
                                other => {
                                    return Err(AspError::Grounding(format!(
                                        "unexpanded sum coefficient {other:?}"
                                    )))
                                }
                            };
                            elems.push((c.index[atom], w));
                        }
                        let sidx = c.sums.len();
                        for (a, _) in &elems {
                            c.in_sum[*a].push(sidx);
                        }
                        c.sums.push(CSum { elems });
                        c.sum_in_rule.push(Vec::new());
                        sums.push(sidx);
                    }
                    BodyElem::Card(cb) => {
                        let atoms: Vec<usize> = cb.atoms.iter().map(|a| c.index[a]).collect();
                        let cidx = c.cards.len();
                        for a in &atoms {
                            c.in_card[*a].push(cidx);
                        }
                        c.cards.push(CCard { lower: cb.lower, upper: cb.upper, atoms });
                        c.card_in_rule.push(Vec::new());
                        cards.push(cidx);
                    }
                }
            }
            let kind = match rule {
                Rule::Normal { head, .. } => CKind::Head(c.index[head]),
                Rule::Constraint { .. } => CKind::Bot,
                Rule::Choice { lower, upper, heads, .. } => {
                    let mut hs: Vec<usize> = heads.iter().map(|h| c.index[h]).collect();
                    hs.sort_unstable();
                    hs.dedup();
                    CKind::Choice { lower: *lower, upper: *upper, heads: hs }
                }
                Rule::Weak { weight, level, terms, .. } => {
                    let (Some(w), Some(l)) = (weight.as_int(), level.as_int()) else {
                        return Err(AspError::Grounding(format!(
                            "weak constraint weight/level not integers: {rule}"
                        )));
                    };
                    CKind::Weak { weight: w, level: l, terms: terms.clone() }
                }
            };
            let ridx = c.rules.len();
            for a in &pos {
                c.pos_in_body[*a].push(ridx);
            }
            for a in &neg {
                c.neg_in_body[*a].push(ridx);
            }
            for s in &sums {
                c.sum_in_rule[*s].push(ridx);
            }
            for cd in &cards {
                c.card_in_rule[*cd].push(ridx);
            }
            match &kind {
                CKind::Head(h) => c.head_of[*h].push(ridx),
                CKind::Choice { heads, .. } => {
                    for h in heads {
                        c.head_of[*h].push(ridx);
                    }
                }
                _ => {}
            }
            c.rules.push(CRule { kind, pos, neg, sums, cards });
        }
        Ok(c)
    }

    pub fn atom_index(&self, a: &Atom) -> Option<usize> {
        self.index.get(a).copied()
    }

    fn has_weaks(&self) -> bool {
        self.rules.iter().any(|r| matches!(r.kind, CKind::Weak { .. }))
    }
}

const TRUE: i8 = 1;
const FALSE: i8 = 0;
const UNDEC: i8 = -1;

#[derive(Clone, Copy, PartialEq)]
enum Mode {
    Stable,
    Classical,
}

enum Goal {
    EnumerateAll,
    /// Minimise the level-0 weak sum; keep the first witness of the best cost.
    Optimize,
    CheckSat,
}

struct Search<'a> {
    c: &'a Compiled,
    mode: Mode,
    val: Vec<i8>,
    trail: Vec<usize>,
    qhead: usize,
    unsat: Vec<u32>,
    dead: Vec<u32>,
    support: Vec<u32>,
    heads_true: Vec<u32>,
    heads_false: Vec<u32>,
    sum_und: Vec<u32>,
    sum_state: Vec<i8>,
    card_und: Vec<u32>,
    card_state: Vec<i8>,
    conflict: bool,
    order: Vec<usize>,
    deadline: Option<Instant>,
    ticks: u64,
}

impl<'a> Search<'a> {
    fn new(c: &'a Compiled, mode: Mode, opts: &SolveOptions) -> Self {
        let n = c.atoms.len();
        let mut order: Vec<usize> = (0..n).collect();
        if !opts.prefer_preds.is_empty() {
            let prio = |a: usize| {
                opts.prefer_preds
                    .iter()
                    .position(|p| *p == c.atoms[a].pred)
                    .unwrap_or(opts.prefer_preds.len())
            };
            order.sort_by_key(|&a| (prio(a), a));
        }
        let mut s = Search {
            c,
            mode,
            val: vec![UNDEC; n],
            trail: Vec::with_capacity(n),
            qhead: 0,
            unsat: c.rules.iter().map(CRule::n_elems).collect(),
            dead: vec![0; c.rules.len()],
            support: vec![0; n],
            heads_true: vec![0; c.rules.len()],
            heads_false: vec![0; c.rules.len()],
            sum_und: c.sums.iter().map(|s| s.elems.len() as u32).collect(),
            sum_state: vec![UNDEC; c.sums.len()],
            card_und: c.cards.iter().map(|cd| cd.atoms.len() as u32).collect(),
            card_state: vec![UNDEC; c.cards.len()],
            conflict: false,
            order,
            deadline: opts.deadline,
            ticks: 0,
        };
        for rule in c.rules.iter() {
            match &rule.kind {
                CKind::Head(h) => s.support[*h] += 1,
                CKind::Choice { heads, .. } => {
                    for h in heads {
                        s.support[*h] += 1;
                    }
                }
                _ => {}
            }
        }
        s
    }

    fn tick(&mut self) -> Result<(), SolveError> {
        self.ticks += 1;
        if self.ticks & 0x1fff == 0 {
            if let Some(d) = self.deadline {
                if Instant::now() > d {
                    return Err(SolveError::Timeout);
                }
            }
        }
        Ok(())
    }

    fn alive(&self, r: usize) -> bool {
        self.dead[r] == 0
    }

    fn fired(&self, r: usize) -> bool {
        self.dead[r] == 0 && self.unsat[r] == 0
    }

    fn assign(&mut self, a: usize, v: i8) {
        match self.val[a] {
            x if x == v => {}
            UNDEC => {
                self.val[a] = v;
                self.trail.push(a);
            }
            _ => self.conflict = true,
        }
    }

    // -- forward updates -----------------------------------------------------

    fn satisfy_elem(&mut self, r: usize) {
        self.unsat[r] -= 1;
        if self.dead[r] != 0 {
            return;
        }
        if self.unsat[r] == 0 {
            self.fire(r);
        } else if self.unsat[r] == 1 {
            self.maybe_unit(r);
        }
    }

    fn falsify_elem(&mut self, r: usize) {
        self.dead[r] += 1;
        if self.dead[r] == 1 && self.mode == Mode::Stable {
            let c = self.c;
            match &c.rules[r].kind {
                CKind::Head(h) => self.drop_support(*h),
                CKind::Choice { heads, .. } => {
                    for &h in heads {
                        self.drop_support(h);
                    }
                }
                _ => {}
            }
        }
    }

    fn drop_support(&mut self, h: usize) {
        self.support[h] -= 1;
        match self.support[h] {
            0 => match self.val[h] {
                TRUE => self.conflict = true,
                UNDEC => self.assign(h, FALSE),
                _ => {}
            },
            1 => {
                if self.val[h] == TRUE {
                    self.force_last_support(h);
                }
            }
            _ => {}
        }
    }

    /// A true atom with a single alive deriving rule: that rule's plain body
    /// literals must hold.
    fn force_last_support(&mut self, h: usize) {
        let c = self.c;
        let Some(&r) = c.head_of[h].iter().find(|&&r| self.alive(r)) else {
            self.conflict = true;
            return;
        };
        let rule = &c.rules[r];
        for &p in &rule.pos {
            if self.val[p] == UNDEC {
                self.assign(p, TRUE);
            }
        }
        for &n in &rule.neg {
            if self.val[n] == UNDEC {
                self.assign(n, FALSE);
            }
        }
    }

    fn fire(&mut self, r: usize) {
        let c = self.c;
        match &c.rules[r].kind {
            CKind::Head(h) => {
                let h = *h;
                if self.val[h] == FALSE {
                    self.conflict = true;
                } else {
                    self.assign(h, TRUE);
                }
            }
            CKind::Bot => self.conflict = true,
            CKind::Choice { .. } => self.choice_check(r),
            CKind::Weak { .. } => {}
        }
    }

    /// With one undecided element left, a constraint (or a normal rule whose
    /// head is false) falsifies that element.
    fn maybe_unit(&mut self, r: usize) {
        let applies = match &self.c.rules[r].kind {
            CKind::Bot => true,
            CKind::Head(h) => self.val[*h] == FALSE,
            _ => false,
        };
        if applies {
            self.falsify_remaining(r);
        }
    }

    fn falsify_remaining(&mut self, r: usize) {
        let c = self.c;
        let rule = &c.rules[r];
        for &p in &rule.pos {
            if self.val[p] == UNDEC {
                self.assign(p, FALSE);
                return;
            }
        }
        for &n in &rule.neg {
            if self.val[n] == UNDEC {
                self.assign(n, TRUE);
                return;
            }
        }
        // the remaining element is an undecided aggregate: no propagation
    }

    fn choice_check(&mut self, r: usize) {
        let c = self.c;
        let CKind::Choice { lower, upper, heads } = &c.rules[r].kind else { return };
        let t = self.heads_true[r] as i64;
        let f = self.heads_false[r] as i64;
        let n = heads.len() as i64;
        let und = n - t - f;
        if t > *upper || t + und < *lower {
            self.conflict = true;
            return;
        }
        if t == *upper && und > 0 {
            for &h in heads {
                if self.val[h] == UNDEC {
                    self.assign(h, FALSE);
                }
            }
        } else if t + und == *lower && und > 0 {
            for &h in heads {
                if self.val[h] == UNDEC {
                    self.assign(h, TRUE);
                }
            }
        }
    }

    fn sum_settled(&mut self, s: usize) {
        let c = self.c;
        let total: i64 = c.sums[s]
            .elems
            .iter()
            .filter(|(a, _)| self.val[*a] == TRUE)
            .map(|(_, w)| *w)
            .sum();
        let state = if total < 0 { TRUE } else { FALSE };
        self.sum_state[s] = state;
        for &r in &c.sum_in_rule[s] {
            if state == TRUE {
                self.satisfy_elem(r);
            } else {
                self.falsify_elem(r);
            }
        }
    }

    fn card_settled(&mut self, cidx: usize) {
        let c = self.c;
        let cd = &c.cards[cidx];
        let n = cd.atoms.iter().filter(|&&a| self.val[a] == TRUE).count() as i64;
        let holds = cd.lower.is_none_or(|l| n >= l) && cd.upper.is_none_or(|u| n <= u);
        let state = if holds { TRUE } else { FALSE };
        self.card_state[cidx] = state;
        for &r in &c.card_in_rule[cidx] {
            if state == TRUE {
                self.satisfy_elem(r);
            } else {
                self.falsify_elem(r);
            }
        }
    }

    fn on_assigned(&mut self, a: usize) {
        let c = self.c;
        let v = self.val[a];
        if v == TRUE {
            for &r in &c.pos_in_body[a] {
                self.satisfy_elem(r);
            }
            for &r in &c.neg_in_body[a] {
                self.falsify_elem(r);
            }
            for &r in &c.head_of[a] {
                if matches!(c.rules[r].kind, CKind::Choice { .. }) {
                    self.heads_true[r] += 1;
                    if self.fired(r) {
                        self.choice_check(r);
                    }
                }
            }
            if self.mode == Mode::Stable {
                match self.support[a] {
                    0 => self.conflict = true,
                    1 => self.force_last_support(a),
                    _ => {}
                }
            }
        } else {
            for &r in &c.pos_in_body[a] {
                self.falsify_elem(r);
            }
            for &r in &c.neg_in_body[a] {
                self.satisfy_elem(r);
            }
            for &r in &c.head_of[a] {
                match c.rules[r].kind {
                    CKind::Choice { .. } => {
                        self.heads_false[r] += 1;
                        if self.fired(r) {
                            self.choice_check(r);
                        }
                    }
                    CKind::Head(_) => {
                        if self.alive(r) {
                            match self.unsat[r] {
                                0 => self.conflict = true,
                                1 => self.falsify_remaining(r),
                                _ => {}
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for &s in &c.in_sum[a] {
            self.sum_und[s] -= 1;
            if self.sum_und[s] == 0 {
                self.sum_settled(s);
            }
        }
        for &cd in &c.in_card[a] {
            self.card_und[cd] -= 1;
            if self.card_und[cd] == 0 {
                self.card_settled(cd);
            }
        }
    }

    fn propagate(&mut self) -> Result<(), SolveError> {
        while self.qhead < self.trail.len() && !self.conflict {
            self.tick()?;
            let a = self.trail[self.qhead];
            self.qhead += 1;
            self.on_assigned(a);
        }
        Ok(())
    }

    // -- undo ------------------------------------------------------------

    fn unsatisfy_elem(&mut self, r: usize) {
        self.unsat[r] += 1;
    }

    fn unfalsify_elem(&mut self, r: usize) {
        self.dead[r] -= 1;
        if self.dead[r] == 0 && self.mode == Mode::Stable {
            let c = self.c;
            match &c.rules[r].kind {
                CKind::Head(h) => self.support[*h] += 1,
                CKind::Choice { heads, .. } => {
                    for &h in heads {
                        self.support[h] += 1;
                    }
                }
                _ => {}
            }
        }
    }

    fn undo_assigned(&mut self, a: usize) {
        let c = self.c;
        let v = self.val[a];
        for &s in &c.in_sum[a] {
            if self.sum_und[s] == 0 {
                let state = self.sum_state[s];
                self.sum_state[s] = UNDEC;
                for &r in &c.sum_in_rule[s] {
                    if state == TRUE {
                        self.unsatisfy_elem(r);
                    } else {
                        self.unfalsify_elem(r);
                    }
                }
            }
            self.sum_und[s] += 1;
        }
        for &cd in &c.in_card[a] {
            if self.card_und[cd] == 0 {
                let state = self.card_state[cd];
                self.card_state[cd] = UNDEC;
                for &r in &c.card_in_rule[cd] {
                    if state == TRUE {
                        self.unsatisfy_elem(r);
                    } else {
                        self.unfalsify_elem(r);
                    }
                }
            }
            self.card_und[cd] += 1;
        }
        if v == TRUE {
            for &r in &c.pos_in_body[a] {
                self.unsatisfy_elem(r);
            }
            for &r in &c.neg_in_body[a] {
                self.unfalsify_elem(r);
            }
            for &r in &c.head_of[a] {
                if matches!(c.rules[r].kind, CKind::Choice { .. }) {
                    self.heads_true[r] -= 1;
                }
            }
        } else {
            for &r in &c.pos_in_body[a] {
                self.unfalsify_elem(r);
            }
            for &r in &c.neg_in_body[a] {
                self.unsatisfy_elem(r);
            }
            for &r in &c.head_of[a] {
                if matches!(c.rules[r].kind, CKind::Choice { .. }) {
                    self.heads_false[r] -= 1;
                }
            }
        }
        self.val[a] = UNDEC;
    }

    /// Unwinds the trail to `mark`. Assignments that were queued but never
    /// propagated have no counter effects to reverse.
    fn backtrack_to(&mut self, mark: usize) {
        while self.trail.len() > mark {
            let idx = self.trail.len() - 1;
            let a = self.trail[idx];
            if idx < self.qhead {
                self.undo_assigned(a);
            } else {
                self.val[a] = UNDEC;
            }
            self.trail.pop();
        }
        self.qhead = mark;
        self.conflict = false;
    }

    // -- leaf checks -------------------------------------------------------

    /// Least model of the reduct with respect to the current full assignment,
    /// compared against the assignment itself.
    fn stable_here(&self) -> bool {
        let c = self.c;
        let nr = c.rules.len();
        let mut derived = vec![false; c.atoms.len()];
        let mut usable = vec![false; nr];
        let mut missing = vec![0u32; nr];
        let mut queue: Vec<usize> = Vec::new();

        for (ri, rule) in c.rules.iter().enumerate() {
            if matches!(rule.kind, CKind::Weak { .. }) {
                continue;
            }
            // negatives and aggregates are evaluated against the assignment
            let negs_ok = rule.neg.iter().all(|&n| self.val[n] == FALSE);
            let sums_ok = rule.sums.iter().all(|&s| self.sum_state[s] == TRUE);
            let cards_ok = rule.cards.iter().all(|&cd| self.card_state[cd] == TRUE);
            if !(negs_ok && sums_ok && cards_ok) {
                continue;
            }
            usable[ri] = true;
            missing[ri] = rule.pos.len() as u32;
            if missing[ri] == 0 {
                queue.push(ri);
            }
        }

        fn derive(
            c: &Compiled,
            val: &[i8],
            usable: &[bool],
            a: usize,
            derived: &mut [bool],
            missing: &mut [u32],
            queue: &mut Vec<usize>,
        ) -> bool {
            if val[a] != TRUE {
                return false; // the least model escapes the assignment
            }
            if !derived[a] {
                derived[a] = true;
                for &r in &c.pos_in_body[a] {
                    if usable[r] {
                        missing[r] -= 1;
                        if missing[r] == 0 {
                            queue.push(r);
                        }
                    }
                }
            }
            true
        }

        while let Some(r) = queue.pop() {
            match &c.rules[r].kind {
                CKind::Head(h) => {
                    if !derive(c, &self.val, &usable, *h, &mut derived, &mut missing, &mut queue) {
                        return false;
                    }
                }
                CKind::Bot => return false,
                CKind::Choice { lower, upper, heads } => {
                    let chosen = heads.iter().filter(|&&h| self.val[h] == TRUE).count() as i64;
                    if chosen < *lower || chosen > *upper {
                        return false; // the reduct replaces the head with bot
                    }
                    for &h in heads {
                        if self.val[h] == TRUE
                            && !derive(c, &self.val, &usable, h, &mut derived, &mut missing, &mut queue)
                        {
                            return false;
                        }
                    }
                }
                CKind::Weak { .. } => unreachable!(),
            }
        }

        // every true atom must be derived
        (0..c.atoms.len()).all(|a| (self.val[a] == TRUE) == derived[a])
    }

    fn classical_model_here(&self) -> bool {
        self.c.rules.iter().enumerate().all(|(ri, rule)| {
            if !self.fired(ri) {
                return true;
            }
            match &rule.kind {
                CKind::Head(h) => self.val[*h] == TRUE,
                CKind::Bot => false,
                CKind::Choice { lower, upper, heads } => {
                    let t = heads.iter().filter(|&&h| self.val[h] == TRUE).count() as i64;
                    *lower <= t && t <= *upper
                }
                CKind::Weak { .. } => true,
            }
        })
    }

    fn model(&self) -> Interpretation {
        (0..self.c.atoms.len())
            .filter(|&a| self.val[a] == TRUE)
            .map(|a| self.c.atoms[a].clone())
            .collect()
    }

    /// Exact level-0 cost of the current full assignment, with tuple
    /// deduplication.
    fn level0_cost(&self) -> i64 {
        let mut tuples: std::collections::BTreeSet<(i64, &[Term])> = Default::default();
        for (ri, rule) in self.c.rules.iter().enumerate() {
            if let CKind::Weak { weight, level, terms } = &rule.kind {
                if *level == 0 && self.fired(ri) {
                    tuples.insert((*weight, terms.as_slice()));
                }
            }
        }
        tuples.iter().map(|(w, _)| w).sum()
    }

    /// Admissible lower bound on the final level-0 cost: certainly-true
    /// tuples, plus negative weights of tuples that may still become true.
    fn level0_bound(&self) -> i64 {
        let mut certain: std::collections::BTreeSet<(i64, &[Term])> = Default::default();
        let mut possible_neg: std::collections::BTreeSet<(i64, &[Term])> = Default::default();
        for (ri, rule) in self.c.rules.iter().enumerate() {
            if let CKind::Weak { weight, level, terms } = &rule.kind {
                if *level != 0 {
                    continue;
                }
                if self.fired(ri) {
                    certain.insert((*weight, terms.as_slice()));
                } else if self.alive(ri) && *weight < 0 {
                    possible_neg.insert((*weight, terms.as_slice()));
                }
            }
        }
        let base: i64 = certain.iter().map(|(w, _)| w).sum();
        let neg: i64 =
            possible_neg.iter().filter(|t| !certain.contains(*t)).map(|(w, _)| w).sum();
        base + neg
    }
}

struct Frame {
    atom: usize,
    mark: usize,
    ord_pos: usize,
    flipped: bool,
}

struct Driver<'a> {
    s: Search<'a>,
    decisions: Vec<Frame>,
}

#[derive(Default)]
struct SearchOutcome {
    models: Vec<Interpretation>,
    best_cost: Option<i64>,
}

impl<'a> Driver<'a> {
    fn new(s: Search<'a>) -> Self {
        Driver { s, decisions: Vec::new() }
    }

    /// Steps back to the most recent decision with an untried value. Returns
    /// false when the search is exhausted.
    fn step_back(&mut self) -> bool {
        while let Some(frame) = self.decisions.pop() {
            self.s.backtrack_to(frame.mark);
            if !frame.flipped {
                self.s.assign(frame.atom, TRUE);
                self.decisions.push(Frame { flipped: true, ..frame });
                return true;
            }
        }
        false
    }

    fn next_undecided(&self, from: usize) -> Option<(usize, usize)> {
        self.s.order[from..]
            .iter()
            .enumerate()
            .find(|(_, &a)| self.s.val[a] == UNDEC)
            .map(|(off, &a)| (from + off, a))
    }

    fn run(
        &mut self,
        goal: Goal,
        assumptions: &[(usize, i8)],
    ) -> Result<SearchOutcome, SolveError> {
        let mut out = SearchOutcome::default();
        for &(a, v) in assumptions {
            self.s.assign(a, v);
            if self.s.conflict {
                return Ok(out);
            }
        }
        // fire rules with empty bodies
        for r in 0..self.s.c.rules.len() {
            if self.s.fired(r) {
                self.s.fire(r);
                if self.s.conflict {
                    return Ok(out);
                }
            }
        }
        // atoms without any support can never hold
        if self.s.mode == Mode::Stable {
            for a in 0..self.s.c.atoms.len() {
                if self.s.support[a] == 0 && self.s.val[a] == UNDEC {
                    self.s.assign(a, FALSE);
                }
            }
        }
        loop {
            self.s.propagate()?;
            if self.s.conflict {
                if !self.step_back() {
                    return Ok(out);
                }
                continue;
            }
            if matches!(goal, Goal::Optimize) {
                if let Some(best) = out.best_cost {
                    if self.s.level0_bound() >= best {
                        if !self.step_back() {
                            return Ok(out);
                        }
                        continue;
                    }
                }
            }
            let scan_from = self.decisions.last().map(|f| f.ord_pos + 1).unwrap_or(0);
            match self.next_undecided(scan_from) {
                Some((ord_pos, atom)) => {
                    self.decisions.push(Frame {
                        atom,
                        mark: self.s.trail.len(),
                        ord_pos,
                        flipped: false,
                    });
                    self.s.assign(atom, FALSE);
                }
                None => {
                    let ok = match self.s.mode {
                        Mode::Stable => self.s.stable_here(),
                        Mode::Classical => self.s.classical_model_here(),
                    };
                    if ok {
                        match goal {
                            Goal::CheckSat => {
                                out.models.push(self.s.model());
                                return Ok(out);
                            }
                            Goal::EnumerateAll => out.models.push(self.s.model()),
                            Goal::Optimize => {
                                let cost = self.s.level0_cost();
                                if out.best_cost.is_none_or(|b| cost < b) {
                                    out.best_cost = Some(cost);
                                    out.models = vec![self.s.model()];
                                }
                            }
                        }
                    }
                    if !self.step_back() {
                        return Ok(out);
                    }
                }
            }
        }
    }
}

/// All answer sets of a compiled ground program, canonically ordered.
pub fn enumerate_stable(
    c: &Compiled,
    opts: &SolveOptions,
) -> Result<Vec<Interpretation>, SolveError> {
    let mut d = Driver::new(Search::new(c, Mode::Stable, opts));
    let mut out = d.run(Goal::EnumerateAll, &[])?;
    out.models.sort();
    Ok(out.models)
}

/// One answer set minimising the level-0 weak sum, with that sum. `None` when
/// the program has no answer sets. Weak constraints at other levels do not
/// take part in the minimisation.
pub fn find_optimal_level0(
    c: &Compiled,
    opts: &SolveOptions,
) -> Result<Option<(Interpretation, i64)>, SolveError> {
    let mut d = Driver::new(Search::new(c, Mode::Stable, opts));
    let goal = if c.has_weaks() { Goal::Optimize } else { Goal::CheckSat };
    let out = d.run(goal, &[])?;
    match out.models.into_iter().next() {
        Some(m) => {
            let cost = out.best_cost.unwrap_or(0);
            Ok(Some((m, cost)))
        }
        None => Ok(None),
    }
}

/// Whether some classical model of the program makes every atom of `inc` true
/// and every atom of `exc` false. Atoms foreign to the program are free, so
/// only assumption atoms that occur in the program constrain anything.
pub fn has_classical_model(
    c: &Compiled,
    inc: &[Atom],
    exc: &[Atom],
    opts: &SolveOptions,
) -> Result<bool, SolveError> {
    for a in inc {
        if exc.contains(a) {
            return Ok(false);
        }
    }
    let mut assumptions = Vec::new();
    for a in inc {
        if let Some(i) = c.atom_index(a) {
            assumptions.push((i, TRUE));
        }
    }
    for a in exc {
        if let Some(i) = c.atom_index(a) {
            assumptions.push((i, FALSE));
        }
    }
    let mut d = Driver::new(Search::new(c, Mode::Classical, opts));
    let out = d.run(Goal::CheckSat, &assumptions)?;
    Ok(!out.models.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_program;

    fn answer_sets(text: &str) -> Vec<Interpretation> {
        let p = parse_program(text).unwrap();
        let g = crate::ground::ground(&p, &crate::ground::GroundOptions::default()).unwrap();
        let c = Compiled::new(&g).unwrap();
        enumerate_stable(&c, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn two_stable_models() {
        let sets = answer_sets("p :- not q. q :- not p.");
        assert_eq!(sets.len(), 2);
    }

    #[test]
    fn choice_rule_generates_subsets() {
        let sets = answer_sets("0 {a; b} 2.");
        assert_eq!(sets.len(), 4);
        let sets = answer_sets("1 {a; b} 1.");
        assert_eq!(sets.len(), 2);
    }

    #[test]
    fn constraints_filter_models() {
        let sets = answer_sets("0 {a; b} 2. :- a, b.");
        assert_eq!(sets.len(), 3);
    }

    #[test]
    fn positive_loops_are_unfounded() {
        let sets = answer_sets("a :- b. b :- a.");
        assert_eq!(sets.len(), 1);
        assert!(sets[0].is_empty());
    }

    #[test]
    fn unsat_program_has_no_models() {
        let sets = answer_sets("a. :- a.");
        assert!(sets.is_empty());
    }

    #[test]
    fn optimal_level0() {
        let p = parse_program("a. :~ a.[1@0, a]").unwrap();
        let c = Compiled::new(&p).unwrap();
        let (m, cost) = find_optimal_level0(&c, &SolveOptions::default()).unwrap().unwrap();
        assert_eq!(cost, 1);
        assert_eq!(m.len(), 1);

        let p2 = parse_program("0 {a} 1. :~ a.[3@0, a]").unwrap();
        let c2 = Compiled::new(&p2).unwrap();
        let (m2, cost2) = find_optimal_level0(&c2, &SolveOptions::default()).unwrap().unwrap();
        assert_eq!(cost2, 0);
        assert!(m2.is_empty());
    }

    #[test]
    fn negative_weights_push_atoms_in() {
        let p = parse_program("0 {a} 1. :~ a.[-2@0, a]").unwrap();
        let c = Compiled::new(&p).unwrap();
        let (m, cost) = find_optimal_level0(&c, &SolveOptions::default()).unwrap().unwrap();
        assert_eq!(cost, -2);
        assert_eq!(m.len(), 1);
    }

    #[test]
    fn classical_models_ignore_foundedness() {
        let p = parse_program("q :- p.").unwrap();
        let c = Compiled::new(&p).unwrap();
        let opts = SolveOptions::default();
        assert!(has_classical_model(&c, &[Atom::prop("p")], &[], &opts).unwrap());
        assert!(has_classical_model(&c, &[Atom::prop("q")], &[Atom::prop("p")], &opts).unwrap());
        assert!(!has_classical_model(&c, &[Atom::prop("p")], &[Atom::prop("q")], &opts).unwrap());
    }

    #[test]
    fn classical_fact_forces_atom() {
        let p = parse_program("p.").unwrap();
        let c = Compiled::new(&p).unwrap();
        assert!(
            !has_classical_model(&c, &[], &[Atom::prop("p")], &SolveOptions::default()).unwrap()
        );
    }

    #[test]
    fn sum_bodies_gate_rules() {
        // dom fires only when the sum of true w-atom weights is negative
        let text = "w1. :- not w1.\n\
                    dom :- #sum{w1=-1} < 0.\n\
                    ndom :- #sum{w1=1} < 0.";
        let p = parse_program(text).unwrap();
        let c = Compiled::new(&p).unwrap();
        let sets = enumerate_stable(&c, &SolveOptions::default()).unwrap();
        assert_eq!(sets.len(), 1);
        assert!(sets[0].contains(&Atom::prop("dom")));
        assert!(!sets[0].contains(&Atom::prop("ndom")));
    }

    #[test]
    fn enumeration_matches_bruteforce_on_powerset() {
        let texts = [
            "p :- not q. q :- not p. r :- p.",
            "0 {a; b; c} 2. :- a, not b.",
            "a :- not b. b :- not a. c :- a. c :- b. :- not c.",
            "1 {p; q} 2. r :- p, q. :- r, not p.",
            "0 {a; b} 2. c :- a, b. d :- c. :- d, not a.",
        ];
        for text in texts {
            let p = parse_program(text).unwrap();
            let g = crate::ground::ground(&p, &crate::ground::GroundOptions::default()).unwrap();
            let c = Compiled::new(&g).unwrap();
            let got = enumerate_stable(&c, &SolveOptions::default()).unwrap();
            let atoms = crate::ground::herbrand_atoms(&g);
            let atoms: Vec<Atom> = atoms.into_iter().collect();
            let mut expect = Vec::new();
            for mask in 0u32..1 << atoms.len() {
                let interp: Interpretation = atoms
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, a)| a.clone())
                    .collect();
                if crate::reduct::is_answer_set(&g, &interp).unwrap() {
                    expect.push(interp);
                }
            }
            expect.sort();
            assert_eq!(got, expect, "mismatch for {text}");
        }
    }
}
