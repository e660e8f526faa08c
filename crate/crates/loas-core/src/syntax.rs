//! Abstract syntax for the ASP subset: terms, atoms, literals, the four rule
//! forms (normal, hard constraint, choice, weak constraint) and programs.
//!
//! `Display` on these types is the canonical text emission; the parser accepts
//! everything `Display` produces, so programs round-trip.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

/// Interned-ish symbol. Cheap to clone, compares by contents.
pub type Sym = Arc<str>;

/// Convenience constructor for [`Sym`].
pub fn sym(s: &str) -> Sym {
    Arc::from(s)
}

/// Reserved predicate standing for falsity in reducts (`bot/0`).
pub const BOT: &str = "bot";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Uppercase-initial identifier.
    Var(Sym),
    /// Lowercase-initial identifier.
    Const(Sym),
    Int(i64),
    /// Functor applied to one or more arguments.
    Func(Sym, Vec<Term>),
}

impl Term {
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Int(_) => true,
            Term::Func(_, args) => args.iter().all(Term::is_ground),
        }
    }

    /// Nesting depth of function terms; constants and variables have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Term::Func(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn vars_into(&self, out: &mut Vec<Sym>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Func(_, args) => args.iter().for_each(|t| t.vars_into(out)),
            _ => {}
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Term::Int(n) => Some(*n),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Int(n) => write!(f, "{n}"),
            Term::Func(name, args) => {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(pred: &str, args: Vec<Term>) -> Self {
        Atom { pred: sym(pred), args }
    }

    pub fn prop(pred: &str) -> Self {
        Atom { pred: sym(pred), args: Vec::new() }
    }

    pub fn bot() -> Self {
        Atom::prop(BOT)
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn depth(&self) -> usize {
        self.args.iter().map(Term::depth).max().unwrap_or(0)
    }

    pub fn vars_into(&self, out: &mut Vec<Sym>) {
        self.args.iter().for_each(|t| t.vars_into(out));
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.pred)?;
        if !self.args.is_empty() {
            write!(f, "(")?;
            for (i, a) in self.args.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{a}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

/// An atom with a negation-as-failure flag.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not ")?;
        }
        write!(f, "{}", self.atom)
    }
}

/// Coefficient of one element inside a sum body element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SumCoeff {
    /// `atom=V`: the value bound to variable `V` inside the atom.
    Plus(Sym),
    /// `atom=-V`.
    Minus(Sym),
    /// `atom=n` on ground expansions.
    Int(i64),
}

/// `#sum{a1=c1, a2=c2, ...} < 0` as a rule body element. Variables occurring
/// only inside the braces are local and aggregated over.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SumBody {
    pub elems: Vec<(Atom, SumCoeff)>,
}

impl fmt::Display for SumBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#sum{{")?;
        for (i, (atom, coeff)) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            match coeff {
                SumCoeff::Plus(v) => write!(f, "{atom}={v}")?,
                SumCoeff::Minus(v) => write!(f, "{atom}=-{v}")?,
                SumCoeff::Int(n) => write!(f, "{atom}={n}")?,
            }
        }
        write!(f, "}} < 0")
    }
}

/// `l {a1; ...; ak} u` as a rule body element (a cardinality test over the
/// listed atoms). Either bound may be absent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CardBody {
    pub lower: Option<i64>,
    pub upper: Option<i64>,
    pub atoms: Vec<Atom>,
}

impl fmt::Display for CardBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(l) = self.lower {
            write!(f, "{l} ")?;
        }
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")?;
        if let Some(u) = self.upper {
            write!(f, " {u}")?;
        }
        Ok(())
    }
}

/// One element of a rule body.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BodyElem {
    Lit(Literal),
    /// Integer comparison `t1 < t2`.
    Lt(Term, Term),
    Sum(SumBody),
    Card(CardBody),
}

impl BodyElem {
    pub fn pos(atom: Atom) -> Self {
        BodyElem::Lit(Literal::pos(atom))
    }

    pub fn neg(atom: Atom) -> Self {
        BodyElem::Lit(Literal::neg(atom))
    }

    pub fn as_lit(&self) -> Option<&Literal> {
        match self {
            BodyElem::Lit(l) => Some(l),
            _ => None,
        }
    }
}

impl fmt::Display for BodyElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BodyElem::Lit(l) => write!(f, "{l}"),
            BodyElem::Lt(a, b) => write!(f, "{a} < {b}"),
            BodyElem::Sum(s) => write!(f, "{s}"),
            BodyElem::Card(c) => write!(f, "{c}"),
        }
    }
}

fn fmt_body(f: &mut fmt::Formatter<'_>, body: &[BodyElem]) -> fmt::Result {
    for (i, e) in body.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{e}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Normal {
        head: Atom,
        body: Vec<BodyElem>,
    },
    Constraint {
        body: Vec<BodyElem>,
    },
    Choice {
        lower: i64,
        upper: i64,
        heads: Vec<Atom>,
        body: Vec<BodyElem>,
    },
    Weak {
        body: Vec<BodyElem>,
        weight: Term,
        level: Term,
        terms: Vec<Term>,
    },
}

impl Rule {
    pub fn fact(head: Atom) -> Self {
        Rule::Normal { head, body: Vec::new() }
    }

    pub fn body(&self) -> &[BodyElem] {
        match self {
            Rule::Normal { body, .. }
            | Rule::Constraint { body }
            | Rule::Choice { body, .. }
            | Rule::Weak { body, .. } => body,
        }
    }

    pub fn body_mut(&mut self) -> &mut Vec<BodyElem> {
        match self {
            Rule::Normal { body, .. }
            | Rule::Constraint { body }
            | Rule::Choice { body, .. }
            | Rule::Weak { body, .. } => body,
        }
    }

    pub fn is_weak(&self) -> bool {
        matches!(self, Rule::Weak { .. })
    }

    /// All variables of the rule in first-appearance order (head, then body,
    /// then weight/level/terms for weak constraints).
    pub fn vars(&self) -> Vec<Sym> {
        let mut out = Vec::new();
        match self {
            Rule::Normal { head, .. } => head.vars_into(&mut out),
            Rule::Choice { heads, .. } => heads.iter().for_each(|h| h.vars_into(&mut out)),
            _ => {}
        }
        for e in self.body() {
            match e {
                BodyElem::Lit(l) => l.atom.vars_into(&mut out),
                BodyElem::Lt(a, b) => {
                    a.vars_into(&mut out);
                    b.vars_into(&mut out);
                }
                // Sum-local variables are not rule variables.
                BodyElem::Sum(_) => {}
                BodyElem::Card(c) => c.atoms.iter().for_each(|a| a.vars_into(&mut out)),
            }
        }
        if let Rule::Weak { weight, level, terms, .. } = self {
            weight.vars_into(&mut out);
            level.vars_into(&mut out);
            terms.iter().for_each(|t| t.vars_into(&mut out));
        }
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }

    /// Every atom occurring in the rule (heads, plain body literals, sum and
    /// cardinality elements).
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        match self {
            Rule::Normal { head, .. } => out.push(head),
            Rule::Choice { heads, .. } => out.extend(heads.iter()),
            _ => {}
        }
        for e in self.body() {
            match e {
                BodyElem::Lit(l) => out.push(&l.atom),
                BodyElem::Sum(s) => out.extend(s.elems.iter().map(|(a, _)| a)),
                BodyElem::Card(c) => out.extend(c.atoms.iter()),
                BodyElem::Lt(..) => {}
            }
        }
        out
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::Normal { head, body } => {
                write!(f, "{head}")?;
                if !body.is_empty() {
                    write!(f, " :- ")?;
                    fmt_body(f, body)?;
                }
                write!(f, ".")
            }
            Rule::Constraint { body } => {
                write!(f, ":- ")?;
                fmt_body(f, body)?;
                write!(f, ".")
            }
            Rule::Choice { lower, upper, heads, body } => {
                write!(f, "{lower} {{")?;
                for (i, h) in heads.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{h}")?;
                }
                write!(f, "}} {upper}")?;
                if !body.is_empty() {
                    write!(f, " :- ")?;
                    fmt_body(f, body)?;
                }
                write!(f, ".")
            }
            Rule::Weak { body, weight, level, terms } => {
                write!(f, ":~ ")?;
                fmt_body(f, body)?;
                write!(f, ".[{weight}@{level}")?;
                for t in terms {
                    write!(f, ", {t}")?;
                }
                write!(f, "]")
            }
        }
    }
}

/// A finite set of rules. Insertion order is preserved and duplicates are
/// dropped, so unions of program fragments behave like set unions.
#[derive(Debug, Clone, Default)]
pub struct Program {
    rules: Vec<Rule>,
    seen: HashSet<Rule>,
}

impl Program {
    pub fn new() -> Self {
        Program::default()
    }

    pub fn from_rules<I: IntoIterator<Item = Rule>>(rules: I) -> Self {
        let mut p = Program::new();
        for r in rules {
            p.push(r);
        }
        p
    }

    pub fn push(&mut self, rule: Rule) {
        if self.seen.insert(rule.clone()) {
            self.rules.push(rule);
        }
    }

    pub fn extend_from(&mut self, other: &Program) {
        for r in other.iter() {
            self.push(r.clone());
        }
    }

    pub fn union(&self, other: &Program) -> Program {
        let mut p = self.clone();
        p.extend_from(other);
        p
    }

    pub fn iter(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn contains(&self, rule: &Rule) -> bool {
        self.seen.contains(rule)
    }

    /// The weak constraints of the program.
    pub fn weak(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| r.is_weak())
    }

    /// The rules that are not weak constraints.
    pub fn non_weak(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().filter(|r| !r.is_weak())
    }

    pub fn is_ground(&self) -> bool {
        self.rules.iter().all(Rule::is_ground)
    }

    /// Set equality on rules, ignoring order.
    pub fn same_rules(&self, other: &Program) -> bool {
        self.len() == other.len() && self.iter().all(|r| other.contains(r))
    }
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.same_rules(other)
    }
}

impl Eq for Program {}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl FromIterator<Rule> for Program {
    fn from_iter<I: IntoIterator<Item = Rule>>(iter: I) -> Self {
        Program::from_rules(iter)
    }
}

/// A set of ground atoms.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Interpretation {
    atoms: std::collections::BTreeSet<Atom>,
}

impl Interpretation {
    pub fn new() -> Self {
        Interpretation::default()
    }

    pub fn from_atoms<I: IntoIterator<Item = Atom>>(atoms: I) -> Self {
        Interpretation { atoms: atoms.into_iter().collect() }
    }

    pub fn insert(&mut self, atom: Atom) {
        self.atoms.insert(atom);
    }

    pub fn contains(&self, atom: &Atom) -> bool {
        self.atoms.contains(atom)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Atom> {
        self.atoms.iter()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn is_subset(&self, other: &Interpretation) -> bool {
        self.atoms.is_subset(&other.atoms)
    }

    pub fn is_disjoint(&self, other: &Interpretation) -> bool {
        self.atoms.is_disjoint(&other.atoms)
    }

    /// Canonical ordering: by cardinality, then element-wise.
    pub fn canonical_cmp(&self, other: &Interpretation) -> std::cmp::Ordering {
        self.len().cmp(&other.len()).then_with(|| self.atoms.cmp(&other.atoms))
    }
}

impl FromIterator<Atom> for Interpretation {
    fn from_iter<I: IntoIterator<Item = Atom>>(iter: I) -> Self {
        Interpretation::from_atoms(iter)
    }
}

impl PartialOrd for Interpretation {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.canonical_cmp(other))
    }
}

impl Ord for Interpretation {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.canonical_cmp(other)
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn atom(s: &str, args: &[Term]) -> Atom {
        Atom::new(s, args.to_vec())
    }

    #[test]
    fn display_round_shapes() {
        let r = Rule::Normal {
            head: atom("p", &[Term::Var(sym("X"))]),
            body: vec![
                BodyElem::pos(atom("q", &[Term::Var(sym("X"))])),
                BodyElem::neg(atom("r", &[Term::Int(3)])),
            ],
        };
        assert_eq!(r.to_string(), "p(X) :- q(X), not r(3).");

        let w = Rule::Weak {
            body: vec![BodyElem::pos(atom("p", &[Term::Var(sym("V"))]))],
            weight: Term::Int(1),
            level: Term::Int(2),
            terms: vec![Term::Var(sym("V"))],
        };
        assert_eq!(w.to_string(), ":~ p(V).[1@2, V]");

        let c = Rule::Choice {
            lower: 0,
            upper: 1,
            heads: vec![atom("a", &[]), atom("b", &[])],
            body: vec![BodyElem::pos(atom("s", &[]))],
        };
        assert_eq!(c.to_string(), "0 {a; b} 1 :- s.");
    }

    #[test]
    fn program_dedups_and_keeps_order() {
        let f1 = Rule::fact(atom("a", &[]));
        let f2 = Rule::fact(atom("b", &[]));
        let p = Program::from_rules(vec![f1.clone(), f2.clone(), f1.clone()]);
        assert_eq!(p.len(), 2);
        assert_eq!(p.iter().cloned().collect::<Vec<_>>(), vec![f1, f2]);
    }

    #[test]
    fn interpretation_canonical_order_is_size_first() {
        let small = Interpretation::from_atoms(vec![atom("b", &[])]);
        let big = Interpretation::from_atoms(vec![atom("a", &[]), atom("a", &[Term::Int(1)])]);
        assert!(small < big);
    }

    #[test]
    fn rule_vars_in_first_appearance_order() {
        let r = Rule::Weak {
            body: vec![
                BodyElem::pos(atom("assign", &[Term::Var(sym("D")), Term::Var(sym("S1"))])),
                BodyElem::pos(atom("assign", &[Term::Var(sym("D")), Term::Var(sym("S2"))])),
            ],
            weight: Term::Int(1),
            level: Term::Int(1),
            terms: vec![],
        };
        let vars = r.vars();
        let vs: Vec<&str> = vars.iter().map(|s| s.as_ref()).collect();
        assert_eq!(vs, vec!["D", "S1", "S2"]);
    }
}
