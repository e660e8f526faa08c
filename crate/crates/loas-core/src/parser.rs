//! Recursive-descent parser for the rule syntax and the task-file directives.
//!
//! Statements end with `.`; negation is the `not` keyword; choice rules are
//! `l {a1; a2} u :- body.` (`,` is also accepted between head atoms); weak
//! constraints are `:~ body.[w@l, t1, ..., tn]`; `%` starts a comment. The
//! body may additionally contain `t1 < t2`, `#sum{..} < 0` and cardinality
//! tests, which the meta encodings emit.

use crate::error::AspError;
use crate::syntax::{sym, Atom, BodyElem, CardBody, Literal, Program, Rule, Sym, SumBody, SumCoeff, Term, BOT};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Directive(String),
    If,     // :-
    Tilde,  // :~
    Dot,
    Comma,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    At,
    Lt,
    Eq,
    Minus,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: Tok,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(text: &str) -> Result<Vec<Token>, AspError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    macro_rules! tok {
        ($k:expr, $l:expr, $c:expr) => {
            toks.push(Token { kind: $k, line: $l, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            '%' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' => { chars.next(); col += 1; tok!(Tok::LParen, tl, tc); }
            ')' => { chars.next(); col += 1; tok!(Tok::RParen, tl, tc); }
            '{' => { chars.next(); col += 1; tok!(Tok::LBrace, tl, tc); }
            '}' => { chars.next(); col += 1; tok!(Tok::RBrace, tl, tc); }
            '[' => { chars.next(); col += 1; tok!(Tok::LBracket, tl, tc); }
            ']' => { chars.next(); col += 1; tok!(Tok::RBracket, tl, tc); }
            ',' => { chars.next(); col += 1; tok!(Tok::Comma, tl, tc); }
            ';' => { chars.next(); col += 1; tok!(Tok::Semi, tl, tc); }
            '.' => { chars.next(); col += 1; tok!(Tok::Dot, tl, tc); }
            '@' => { chars.next(); col += 1; tok!(Tok::At, tl, tc); }
            '<' => { chars.next(); col += 1; tok!(Tok::Lt, tl, tc); }
            '=' => { chars.next(); col += 1; tok!(Tok::Eq, tl, tc); }
            ':' => {
                chars.next();
                col += 1;
                match chars.peek() {
                    Some('-') => { chars.next(); col += 1; tok!(Tok::If, tl, tc); }
                    Some('~') => { chars.next(); col += 1; tok!(Tok::Tilde, tl, tc); }
                    other => {
                        return Err(AspError::Syntax {
                            line: tl,
                            col: tc,
                            msg: format!("expected ':-' or ':~', found ':{}'", other.map(|c| c.to_string()).unwrap_or_default()),
                        })
                    }
                }
            }
            '#' => {
                chars.next();
                col += 1;
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(AspError::Syntax { line: tl, col: tc, msg: "bare '#'".into() });
                }
                tok!(Tok::Directive(name), tl, tc);
            }
            '-' => {
                chars.next();
                col += 1;
                if chars.peek().is_some_and(|c| c.is_ascii_digit()) {
                    let mut n = String::from("-");
                    while let Some(&c) = chars.peek() {
                        if c.is_ascii_digit() {
                            n.push(c);
                            chars.next();
                            col += 1;
                        } else {
                            break;
                        }
                    }
                    let v = n.parse::<i64>().map_err(|_| AspError::Syntax {
                        line: tl,
                        col: tc,
                        msg: format!("integer out of range: {n}"),
                    })?;
                    tok!(Tok::Int(v), tl, tc);
                } else {
                    tok!(Tok::Minus, tl, tc);
                }
            }
            c if c.is_ascii_digit() => {
                let mut n = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        n.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let v = n.parse::<i64>().map_err(|_| AspError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("integer out of range: {n}"),
                })?;
                tok!(Tok::Int(v), tl, tc);
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        chars.next();
                        col += 1;
                    } else {
                        break;
                    }
                }
                let first = name.chars().next().unwrap();
                if first.is_ascii_uppercase() || first == '_' {
                    tok!(Tok::Var(name), tl, tc);
                } else {
                    tok!(Tok::Ident(name), tl, tc);
                }
            }
            other => {
                return Err(AspError::Syntax {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    toks.push(Token { kind: Tok::Eof, line, col });
    Ok(toks)
}

pub(crate) struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    pub fn new(text: &str) -> Result<Self, AspError> {
        Ok(Parser { toks: lex(text)?, pos: 0 })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].kind
    }

    pub fn peek2(&self) -> &Tok {
        &self.toks[(self.pos + 1).min(self.toks.len() - 1)].kind
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.col)
    }

    pub fn err<T>(&self, msg: impl Into<String>) -> Result<T, AspError> {
        let (line, col) = self.here();
        Err(AspError::Syntax { line, col, msg: msg.into() })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].kind.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn eat(&mut self, want: &Tok) -> Result<(), AspError> {
        if self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {want:?}, found {:?}", self.peek()))
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn eat_ident(&mut self) -> Result<String, AspError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            other => self.err(format!("expected identifier, found {other:?}")),
        }
    }

    pub fn eat_int(&mut self) -> Result<i64, AspError> {
        match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            ref other => self.err(format!("expected integer, found {other:?}")),
        }
    }

    pub fn parse_term(&mut self) -> Result<Term, AspError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Term::Int(n))
            }
            Tok::Var(v) => {
                self.bump();
                Ok(Term::Var(sym(&v)))
            }
            Tok::Ident(name) => {
                self.bump();
                if matches!(self.peek(), Tok::LParen) {
                    self.bump();
                    let mut args = vec![self.parse_term()?];
                    while matches!(self.peek(), Tok::Comma) {
                        self.bump();
                        args.push(self.parse_term()?);
                    }
                    self.eat(&Tok::RParen)?;
                    Ok(Term::Func(sym(&name), args))
                } else {
                    Ok(Term::Const(sym(&name)))
                }
            }
            other => self.err(format!("expected term, found {other:?}")),
        }
    }

    fn term_to_atom(&self, t: Term) -> Result<Atom, AspError> {
        match t {
            Term::Const(name) => Ok(Atom { pred: name, args: Vec::new() }),
            Term::Func(name, args) => Ok(Atom { pred: name, args }),
            other => self.err(format!("expected an atom, found term {other}")),
        }
    }

    pub fn parse_atom(&mut self) -> Result<Atom, AspError> {
        let t = self.parse_term()?;
        self.term_to_atom(t)
    }

    fn parse_sum_body(&mut self) -> Result<SumBody, AspError> {
        // caller consumed the `#sum` directive token
        self.eat(&Tok::LBrace)?;
        let mut elems = Vec::new();
        loop {
            let atom = self.parse_atom()?;
            self.eat(&Tok::Eq)?;
            let coeff = match self.peek().clone() {
                Tok::Minus => {
                    self.bump();
                    match self.peek().clone() {
                        Tok::Var(v) => {
                            self.bump();
                            SumCoeff::Minus(sym(&v))
                        }
                        other => return self.err(format!("expected variable after '-', found {other:?}")),
                    }
                }
                Tok::Var(v) => {
                    self.bump();
                    SumCoeff::Plus(sym(&v))
                }
                Tok::Int(n) => {
                    self.bump();
                    SumCoeff::Int(n)
                }
                other => return self.err(format!("expected sum coefficient, found {other:?}")),
            };
            elems.push((atom, coeff));
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                _ => break,
            }
        }
        self.eat(&Tok::RBrace)?;
        self.eat(&Tok::Lt)?;
        let zero = self.eat_int()?;
        if zero != 0 {
            return self.err("sum comparisons support only '< 0'");
        }
        Ok(SumBody { elems })
    }

    fn parse_card_atoms(&mut self) -> Result<Vec<Atom>, AspError> {
        self.eat(&Tok::LBrace)?;
        let mut atoms = Vec::new();
        if !matches!(self.peek(), Tok::RBrace) {
            atoms.push(self.parse_atom()?);
            while matches!(self.peek(), Tok::Semi | Tok::Comma) {
                self.bump();
                atoms.push(self.parse_atom()?);
            }
        }
        self.eat(&Tok::RBrace)?;
        Ok(atoms)
    }

    fn parse_body_elem(&mut self) -> Result<BodyElem, AspError> {
        match self.peek().clone() {
            Tok::Ident(s) if s == "not" => {
                self.bump();
                let atom = self.parse_atom()?;
                Ok(BodyElem::Lit(Literal::neg(atom)))
            }
            Tok::Directive(d) if d == "sum" => {
                self.bump();
                Ok(BodyElem::Sum(self.parse_sum_body()?))
            }
            Tok::LBrace => {
                let atoms = self.parse_card_atoms()?;
                let upper = match *self.peek() {
                    Tok::Int(n) => {
                        self.bump();
                        Some(n)
                    }
                    _ => None,
                };
                Ok(BodyElem::Card(CardBody { lower: None, upper, atoms }))
            }
            Tok::Int(lower) if matches!(self.peek2(), Tok::LBrace) => {
                self.bump();
                let atoms = self.parse_card_atoms()?;
                let upper = match *self.peek() {
                    Tok::Int(n) => {
                        self.bump();
                        Some(n)
                    }
                    _ => None,
                };
                Ok(BodyElem::Card(CardBody { lower: Some(lower), upper, atoms }))
            }
            _ => {
                let t = self.parse_term()?;
                if matches!(self.peek(), Tok::Lt) {
                    self.bump();
                    let rhs = self.parse_term()?;
                    Ok(BodyElem::Lt(t, rhs))
                } else {
                    Ok(BodyElem::Lit(Literal::pos(self.term_to_atom(t)?)))
                }
            }
        }
    }

    pub fn parse_body(&mut self) -> Result<Vec<BodyElem>, AspError> {
        let mut body = vec![self.parse_body_elem()?];
        while matches!(self.peek(), Tok::Comma) {
            self.bump();
            body.push(self.parse_body_elem()?);
        }
        Ok(body)
    }

    fn parse_weak_tail(&mut self, body: Vec<BodyElem>) -> Result<Rule, AspError> {
        self.eat(&Tok::Dot)?;
        self.eat(&Tok::LBracket)?;
        let weight = self.parse_term()?;
        self.eat(&Tok::At)?;
        let level = self.parse_term()?;
        let mut terms = Vec::new();
        while matches!(self.peek(), Tok::Comma) {
            self.bump();
            terms.push(self.parse_term()?);
        }
        self.eat(&Tok::RBracket)?;
        Ok(Rule::Weak { body, weight, level, terms })
    }

    /// One rule statement, including the terminating `.` (or `.[...]`).
    pub fn parse_rule(&mut self) -> Result<Rule, AspError> {
        match self.peek().clone() {
            Tok::If => {
                self.bump();
                let body = self.parse_body()?;
                self.eat(&Tok::Dot)?;
                Ok(Rule::Constraint { body })
            }
            Tok::Tilde => {
                self.bump();
                let body = if matches!(self.peek(), Tok::Dot) { Vec::new() } else { self.parse_body()? };
                self.parse_weak_tail(body)
            }
            Tok::LBrace | Tok::Int(_) => self.parse_choice(),
            _ => {
                let head = self.parse_atom()?;
                let body = if matches!(self.peek(), Tok::If) {
                    self.bump();
                    self.parse_body()?
                } else {
                    Vec::new()
                };
                self.eat(&Tok::Dot)?;
                Ok(Rule::Normal { head, body })
            }
        }
    }

    fn parse_choice(&mut self) -> Result<Rule, AspError> {
        let lower = match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Some(n)
            }
            _ => None,
        };
        let heads = self.parse_card_atoms()?;
        let upper = match *self.peek() {
            Tok::Int(n) => {
                self.bump();
                Some(n)
            }
            _ => None,
        };
        let body = if matches!(self.peek(), Tok::If) {
            self.bump();
            self.parse_body()?
        } else {
            Vec::new()
        };
        self.eat(&Tok::Dot)?;
        let lower = lower.unwrap_or(0);
        let upper = upper.unwrap_or(heads.len() as i64);
        if lower < 0 || lower > upper || upper > heads.len() as i64 {
            return self.err(format!(
                "choice bounds must satisfy 0 <= {lower} <= {upper} <= {}",
                heads.len()
            ));
        }
        Ok(Rule::Choice { lower, upper, heads, body })
    }
}

/// Variables bound by a positive plain body literal.
fn positively_bound(rule: &Rule) -> Vec<Sym> {
    let mut out = Vec::new();
    for e in rule.body() {
        if let BodyElem::Lit(l) = e {
            if !l.negated {
                l.atom.vars_into(&mut out);
            }
        }
    }
    out
}

/// Checks the safety invariant: every variable of the rule occurs in at least
/// one positive body literal.
pub fn check_rule_safety(rule: &Rule, rule_index: usize) -> Result<(), AspError> {
    let bound = positively_bound(rule);
    for v in rule.vars() {
        if !bound.contains(&v) {
            return Err(AspError::Safety { rule_index, var: v });
        }
    }
    Ok(())
}

fn check_reserved_bot(rule: &Rule, index: usize) -> Result<(), AspError> {
    for atom in rule.atoms() {
        if atom.pred.as_ref() == BOT {
            return Err(AspError::Syntax {
                line: 0,
                col: 0,
                msg: format!("statement {index}: predicate '{BOT}' is reserved"),
            });
        }
    }
    Ok(())
}

/// Parses a program. All rules must be safe and may not declare the reserved
/// predicate `bot`.
pub fn parse_program(text: &str) -> Result<Program, AspError> {
    let mut p = Parser::new(text)?;
    let mut program = Program::new();
    let mut index = 0usize;
    while !p.at_eof() {
        if let Tok::Directive(d) = p.peek() {
            return p.err(format!("directive #{d} is not allowed in a plain program"));
        }
        let rule = p.parse_rule()?;
        check_reserved_bot(&rule, index)?;
        check_rule_safety(&rule, index)?;
        program.push(rule);
        index += 1;
    }
    Ok(program)
}

/// Parses a single ground atom, as printed by the canonical emission.
pub fn parse_ground_atom(text: &str) -> Result<Atom, AspError> {
    let mut p = Parser::new(text)?;
    let atom = p.parse_atom()?;
    if !p.at_eof() {
        return p.err("trailing input after atom");
    }
    if !atom.is_ground() {
        return Err(AspError::NotGround(atom.to_string()));
    }
    Ok(atom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_normal_rules() {
        let p = parse_program("p :- not q.  q :- not p.").unwrap();
        assert_eq!(p.len(), 2);
        let printed: Vec<String> = p.iter().map(|r| r.to_string()).collect();
        assert_eq!(printed, vec!["p :- not q.", "q :- not p."]);
    }

    #[test]
    fn parses_weak_constraint() {
        let p = parse_program(":~ p(V).[1@2, V]").unwrap();
        let r = p.iter().next().unwrap();
        match r {
            Rule::Weak { body, weight, level, terms } => {
                assert_eq!(body.len(), 1);
                assert_eq!(weight, &Term::Int(1));
                assert_eq!(level, &Term::Int(2));
                assert_eq!(terms, &vec![Term::Var(sym("V"))]);
            }
            other => panic!("expected weak constraint, got {other}"),
        }
    }

    #[test]
    fn unsafe_fact_is_rejected() {
        let e = parse_program("p(X).").unwrap_err();
        assert!(matches!(e, AspError::Safety { rule_index: 0, ref var } if var.as_ref() == "X"));
    }

    #[test]
    fn bot_predicate_is_reserved() {
        assert!(parse_program("bot.").is_err());
        assert!(parse_program("p :- bot.").is_err());
        // bot as a constant argument is fine
        assert!(parse_program("mmr(bot, x).").is_ok());
    }

    #[test]
    fn choice_rule_accepts_both_separators() {
        let a = parse_program("0 {a; b} 1 :- s.").unwrap();
        let b = parse_program("0 {a, b} 1 :- s.").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn choice_bounds_validated() {
        assert!(parse_program("1 {a} 2.").is_err());
        assert!(parse_program("2 {a; b} 1.").is_err());
        let p = parse_program("{a; b}.").unwrap();
        let first = p.iter().next().unwrap().clone();
        match first {
            Rule::Choice { lower, upper, .. } => {
                assert_eq!((lower, upper), (0, 2));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn parses_sum_and_card_bodies() {
        let text = "dom_lv(t1,t2,L) :- lv(L), #sum{w(W,L,A,t1)=W, w(W,L,A,t2)=-W} < 0.";
        let p = parse_program(text).unwrap();
        assert_eq!(p.iter().next().unwrap().to_string(), text);

        let text2 = "mmr(a,X) :- vs(X), 1 {in_vs(a,X)} 1, in_vs(a,X).";
        let p2 = parse_program(text2).unwrap();
        assert_eq!(p2.iter().next().unwrap().to_string(), text2);
    }

    #[test]
    fn comparison_body_round_trips() {
        let text = "non_bef(t1,t2,L) :- lv(L), lv(L2), L < L2, non_dom_lv(t1,t2,L2).";
        let p = parse_program(text).unwrap();
        assert_eq!(p.iter().next().unwrap().to_string(), text);
    }

    #[test]
    fn comments_and_whitespace_ignored() {
        let p = parse_program("% header\np. % tail\n% q is out\nq :- p.\n").unwrap();
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn reports_position() {
        let e = parse_program("p :- q\nr.").unwrap_err();
        match e {
            AspError::Syntax { line, .. } => assert_eq!(line, 2),
            other => panic!("{other}"),
        }
    }
}
