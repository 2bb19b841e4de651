//! Bounded relational formulas over atoms `R(a, b)`.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! formula := disj
//! disj    := conj ("|" conj)*
//! conj    := unary ("&" unary)*
//! unary   := "!" unary
//!          | "A" var "<=" int "." unary
//!          | "E" var "<=" int "." unary
//!          | "R(" term "," term ")"
//!          | "(" formula ")"
//! term    := int | var
//! ```
//!
//! Quantifier bounds are inclusive. `A`, `E` and `R` are reserved words; any
//! other identifier is a variable. `!` directly in front of an atom parses
//! as a negated atom, so printing and re-parsing is the identity.

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Const(u32),
    Var(String),
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(c) => write!(f, "{}", c),
            Term::Var(v) => write!(f, "{}", v),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(Term, Term),
    NegAtom(Term, Term),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Not(Box<Formula>),
    ForallLe {
        var: String,
        bound: u32,
        body: Box<Formula>,
    },
    ExistsLe {
        var: String,
        bound: u32,
        body: Box<Formula>,
    },
}

/// Syntactic classes, most specific first. Atoms and negated atoms are
/// atomic; formulas built from them with connectives and bounded universal
/// quantifiers are sharply bounded; a block of bounded existentials in front
/// of a sharply bounded matrix is an existential prefix; anything else
/// (an existential under other structure) is general.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormulaShape {
    Atomic,
    SharplyBounded,
    ExistentialPrefix,
    General,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhpKind {
    Plain,
    Onto,
    Weak,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormulaError {
    Syntax {
        line: u32,
        col: u32,
        msg: String,
    },
    NegativeBound {
        line: u32,
        col: u32,
    },
    UnboundVariable {
        var: String,
    },
    /// Instance expansion would exceed the node budget.
    Budget {
        nodes: u64,
        budget: u64,
    },
    BadParameters {
        msg: String,
    },
}

impl fmt::Display for FormulaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormulaError::Syntax { line, col, msg } => {
                write!(f, "syntax error at {}:{}: {}", line, col, msg)
            }
            FormulaError::NegativeBound { line, col } => {
                write!(f, "negative quantifier bound at {}:{}", line, col)
            }
            FormulaError::UnboundVariable { var } => write!(f, "unbound variable `{}`", var),
            FormulaError::Budget { nodes, budget } => {
                write!(f, "expansion of {} nodes exceeds budget {}", nodes, budget)
            }
            FormulaError::BadParameters { msg } => write!(f, "{}", msg),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for FormulaError {}

impl Formula {
    pub fn atom(a: u32, b: u32) -> Formula {
        Formula::Atom(Term::Const(a), Term::Const(b))
    }

    pub fn neg_atom(a: u32, b: u32) -> Formula {
        Formula::NegAtom(Term::Const(a), Term::Const(b))
    }

    pub fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Formula, r: Formula) -> Formula {
        Formula::Or(Box::new(l), Box::new(r))
    }

    /// Negation with atoms flipped in place, so `Not` never wraps a bare
    /// atom.
    pub fn negate(self) -> Formula {
        match self {
            Formula::Atom(a, b) => Formula::NegAtom(a, b),
            Formula::NegAtom(a, b) => Formula::Atom(a, b),
            other => Formula::Not(Box::new(other)),
        }
    }

    pub fn forall_le(var: &str, bound: u32, body: Formula) -> Formula {
        Formula::ForallLe {
            var: var.to_string(),
            bound,
            body: Box::new(body),
        }
    }

    pub fn exists_le(var: &str, bound: u32, body: Formula) -> Formula {
        Formula::ExistsLe {
            var: var.to_string(),
            bound,
            body: Box::new(body),
        }
    }

    pub fn node_count(&self) -> u64 {
        match self {
            Formula::Atom(..) | Formula::NegAtom(..) => 1,
            Formula::Not(b) => 1 + b.node_count(),
            Formula::And(l, r) | Formula::Or(l, r) => 1 + l.node_count() + r.node_count(),
            Formula::ForallLe { body, .. } | Formula::ExistsLe { body, .. } => {
                1 + body.node_count()
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn term_var(t: &Term, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            if let Term::Var(v) = t {
                if !bound.iter().any(|b| b == v) {
                    out.insert(v.clone());
                }
            }
        }
        fn rec(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Atom(a, b) | Formula::NegAtom(a, b) => {
                    term_var(a, bound, out);
                    term_var(b, bound, out);
                }
                Formula::Not(inner) => rec(inner, bound, out),
                Formula::And(l, r) | Formula::Or(l, r) => {
                    rec(l, bound, out);
                    rec(r, bound, out);
                }
                Formula::ForallLe { var, body, .. } | Formula::ExistsLe { var, body, .. } => {
                    bound.push(var.clone());
                    rec(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        rec(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn ensure_closed(&self) -> Result<(), FormulaError> {
        match self.free_vars().into_iter().next() {
            None => Ok(()),
            Some(var) => Err(FormulaError::UnboundVariable { var }),
        }
    }

    /// Replaces free occurrences of `var` by the integer `value`; occurrences
    /// rebound by an inner quantifier are left alone. Capture cannot arise
    /// since only integers are substituted.
    pub fn substitute(&self, var: &str, value: u32) -> Formula {
        fn term(t: &Term, var: &str, value: u32) -> Term {
            match t {
                Term::Var(v) if v == var => Term::Const(value),
                other => other.clone(),
            }
        }
        match self {
            Formula::Atom(a, b) => Formula::Atom(term(a, var, value), term(b, var, value)),
            Formula::NegAtom(a, b) => Formula::NegAtom(term(a, var, value), term(b, var, value)),
            Formula::Not(inner) => Formula::Not(Box::new(inner.substitute(var, value))),
            Formula::And(l, r) => Formula::and(l.substitute(var, value), r.substitute(var, value)),
            Formula::Or(l, r) => Formula::or(l.substitute(var, value), r.substitute(var, value)),
            Formula::ForallLe { var: v, bound, body } => {
                if v == var {
                    self.clone()
                } else {
                    Formula::ForallLe {
                        var: v.clone(),
                        bound: *bound,
                        body: Box::new(body.substitute(var, value)),
                    }
                }
            }
            Formula::ExistsLe { var: v, bound, body } => {
                if v == var {
                    self.clone()
                } else {
                    Formula::ExistsLe {
                        var: v.clone(),
                        bound: *bound,
                        body: Box::new(body.substitute(var, value)),
                    }
                }
            }
        }
    }

    fn exists_free(&self) -> bool {
        match self {
            Formula::Atom(..) | Formula::NegAtom(..) => true,
            Formula::Not(b) => b.exists_free(),
            Formula::And(l, r) | Formula::Or(l, r) => l.exists_free() && r.exists_free(),
            Formula::ForallLe { body, .. } => body.exists_free(),
            Formula::ExistsLe { .. } => false,
        }
    }

    /// Most specific class among atomic, sharply bounded, existential prefix
    /// and general.
    pub fn classify(&self) -> FormulaShape {
        match self {
            Formula::Atom(..) | Formula::NegAtom(..) => FormulaShape::Atomic,
            _ if self.exists_free() => FormulaShape::SharplyBounded,
            _ => {
                let mut matrix = self;
                while let Formula::ExistsLe { body, .. } = matrix {
                    matrix = body;
                }
                if matrix.exists_free() {
                    FormulaShape::ExistentialPrefix
                } else {
                    FormulaShape::General
                }
            }
        }
    }

    /// Negation normal form: negations pushed down to atoms, double
    /// negations removed. This eliminates every `Not`, trading clause-5
    /// dispatch for the dual connectives.
    pub fn to_nnf(&self) -> Formula {
        fn pos(f: &Formula) -> Formula {
            match f {
                Formula::Atom(..) | Formula::NegAtom(..) => f.clone(),
                Formula::Not(inner) => neg(inner),
                Formula::And(l, r) => Formula::and(pos(l), pos(r)),
                Formula::Or(l, r) => Formula::or(pos(l), pos(r)),
                Formula::ForallLe { var, bound, body } => Formula::ForallLe {
                    var: var.clone(),
                    bound: *bound,
                    body: Box::new(pos(body)),
                },
                Formula::ExistsLe { var, bound, body } => Formula::ExistsLe {
                    var: var.clone(),
                    bound: *bound,
                    body: Box::new(pos(body)),
                },
            }
        }
        fn neg(f: &Formula) -> Formula {
            match f {
                Formula::Atom(a, b) => Formula::NegAtom(a.clone(), b.clone()),
                Formula::NegAtom(a, b) => Formula::Atom(a.clone(), b.clone()),
                Formula::Not(inner) => pos(inner),
                Formula::And(l, r) => Formula::or(neg(l), neg(r)),
                Formula::Or(l, r) => Formula::and(neg(l), neg(r)),
                Formula::ForallLe { var, bound, body } => Formula::ExistsLe {
                    var: var.clone(),
                    bound: *bound,
                    body: Box::new(neg(body)),
                },
                Formula::ExistsLe { var, bound, body } => Formula::ForallLe {
                    var: var.clone(),
                    bound: *bound,
                    body: Box::new(neg(body)),
                },
            }
        }
        pos(self)
    }

    pub fn parse(text: &str) -> Result<Formula, FormulaError> {
        Parser::new(text).parse()
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // binary connectives always parenthesized, quantifier and negation
        // bodies wrapped when binary, so the output re-parses to the same AST
        fn unary(f: &mut fmt::Formatter<'_>, x: &Formula) -> fmt::Result {
            match x {
                Formula::And(..) | Formula::Or(..) => write!(f, "({})", x),
                _ => write!(f, "{}", x),
            }
        }
        match self {
            Formula::Atom(a, b) => write!(f, "R({},{})", a, b),
            Formula::NegAtom(a, b) => write!(f, "!R({},{})", a, b),
            Formula::Not(inner) => {
                write!(f, "!")?;
                unary(f, inner)
            }
            Formula::And(l, r) => {
                write!(f, "(")?;
                write!(f, "{}", l)?;
                write!(f, " & ")?;
                write!(f, "{}", r)?;
                write!(f, ")")
            }
            Formula::Or(l, r) => {
                write!(f, "(")?;
                write!(f, "{}", l)?;
                write!(f, " | ")?;
                write!(f, "{}", r)?;
                write!(f, ")")
            }
            Formula::ForallLe { var, bound, body } => {
                write!(f, "A {} <= {} . ", var, bound)?;
                unary(f, body)
            }
            Formula::ExistsLe { var, bound, body } => {
                write!(f, "E {} <= {} . ", var, bound)?;
                unary(f, body)
            }
        }
    }
}

struct Parser<'a> {
    chars: Vec<char>,
    pos: usize,
    line: u32,
    col: u32,
    text: &'a str,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().collect(),
            pos: 0,
            line: 1,
            col: 1,
            text,
        }
    }

    fn err(&self, msg: impl Into<String>) -> FormulaError {
        FormulaError::Syntax {
            line: self.line,
            col: self.col,
            msg: msg.into(),
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.bump();
        }
    }

    fn expect(&mut self, c: char) -> Result<(), FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some(got) if got == c => {
                self.bump();
                Ok(())
            }
            Some(got) => Err(self.err(alloc::format!("expected `{}`, found `{}`", c, got))),
            None => Err(self.err(alloc::format!("expected `{}`, found end of input", c))),
        }
    }

    fn ident(&mut self) -> Option<String> {
        self.skip_ws();
        let mut s = String::new();
        match self.peek() {
            Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return None,
        }
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        Some(s)
    }

    fn int(&mut self) -> Result<u32, FormulaError> {
        self.skip_ws();
        if self.peek() == Some('-') {
            return Err(FormulaError::NegativeBound {
                line: self.line,
                col: self.col,
            });
        }
        let mut s = String::new();
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            s.push(self.bump().unwrap());
        }
        if s.is_empty() {
            return Err(self.err("expected an integer"));
        }
        s.parse().map_err(|_| self.err("integer out of range"))
    }

    fn term(&mut self) -> Result<Term, FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c.is_ascii_digit() => Ok(Term::Const(self.int()?)),
            Some('-') => Err(self.err("terms are nonnegative integers or variables")),
            _ => match self.ident() {
                Some(v) if v != "A" && v != "E" && v != "R" => Ok(Term::Var(v)),
                Some(v) => Err(self.err(alloc::format!("`{}` is reserved", v))),
                None => Err(self.err("expected a term")),
            },
        }
    }

    fn parse(&mut self) -> Result<Formula, FormulaError> {
        let f = self.disj()?;
        self.skip_ws();
        if self.pos != self.chars.len() {
            return Err(self.err("trailing input"));
        }
        let _ = self.text;
        Ok(f)
    }

    fn disj(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.conj()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('|') {
                self.bump();
                f = Formula::or(f, self.conj()?);
            } else {
                return Ok(f);
            }
        }
    }

    fn conj(&mut self) -> Result<Formula, FormulaError> {
        let mut f = self.unary()?;
        loop {
            self.skip_ws();
            if self.peek() == Some('&') {
                self.bump();
                f = Formula::and(f, self.unary()?);
            } else {
                return Ok(f);
            }
        }
    }

    fn quantifier(&mut self, exists: bool) -> Result<Formula, FormulaError> {
        let var = self
            .ident()
            .filter(|v| v != "A" && v != "E" && v != "R")
            .ok_or_else(|| self.err("expected a variable after quantifier"))?;
        self.skip_ws();
        self.expect('<')?;
        self.expect('=')?;
        let bound = self.int()?;
        self.expect('.')?;
        let body = Box::new(self.unary()?);
        Ok(if exists {
            Formula::ExistsLe { var, bound, body }
        } else {
            Formula::ForallLe { var, bound, body }
        })
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        self.skip_ws();
        match self.peek() {
            Some('!') => {
                self.bump();
                Ok(self.unary()?.negate())
            }
            Some('(') => {
                self.bump();
                let f = self.disj()?;
                self.expect(')')?;
                Ok(f)
            }
            _ => {
                let word = self.ident().ok_or_else(|| self.err("expected a formula"))?;
                match word.as_str() {
                    "A" => self.quantifier(false),
                    "E" => self.quantifier(true),
                    "R" => {
                        self.expect('(')?;
                        let a = self.term()?;
                        self.expect(',')?;
                        let b = self.term()?;
                        self.expect(')')?;
                        Ok(Formula::Atom(a, b))
                    }
                    other => Err(self.err(alloc::format!("unexpected identifier `{}`", other))),
                }
            }
        }
    }
}

/// Bounded quantifier that collapses to its single instance when the
/// inclusive bound is zero.
fn quantifier_or_instance(exists: bool, var: &str, bound_excl: u32, body: Formula) -> Formula {
    debug_assert!(bound_excl >= 1);
    if bound_excl == 1 {
        body.substitute(var, 0)
    } else if exists {
        Formula::exists_le(var, bound_excl - 1, body)
    } else {
        Formula::forall_le(var, bound_excl - 1, body)
    }
}

fn or_all(mut parts: Vec<Formula>) -> Option<Formula> {
    let first = if parts.is_empty() {
        return None;
    } else {
        parts.remove(0)
    };
    Some(parts.into_iter().fold(first, Formula::or))
}

/// The pigeonhole statement for `pigeons` pigeons and `holes` holes as a
/// disjunction: some pigeon unmapped, two pigeons sharing a hole, or one
/// pigeon in two holes; `Onto` adds an unfilled-hole clause. Distinct-index
/// pairs are expanded explicitly. `Weak` requires `pigeons = 2 * holes`.
pub fn make_php_instance(
    kind: PhpKind,
    pigeons: u32,
    holes: u32,
    budget: u64,
) -> Result<Formula, FormulaError> {
    if pigeons < 1 || holes < 1 {
        return Err(FormulaError::BadParameters {
            msg: "need at least one pigeon and one hole".to_string(),
        });
    }
    if kind == PhpKind::Weak && pigeons != 2 * holes {
        return Err(FormulaError::BadParameters {
            msg: alloc::format!(
                "weak instance needs pigeons = 2 * holes, got {} and {}",
                pigeons,
                holes
            ),
        });
    }
    // pair expansion dominates the size
    let pair_cost = |m: u64| m * (m - 1) / 2;
    let estimated = 2 * pigeons as u64
        + 2 * pair_cost(pigeons as u64) * holes as u64
        + 2 * pair_cost(holes as u64) * pigeons as u64;
    if estimated > budget {
        return Err(FormulaError::Budget {
            nodes: estimated,
            budget,
        });
    }

    let mut clauses = Vec::new();

    // some pigeon maps nowhere
    clauses.push(quantifier_or_instance(
        true,
        "a",
        pigeons,
        quantifier_or_instance(false, "b", holes, Formula::NegAtom(var("a"), var("b"))),
    ));

    // two pigeons share a hole
    let mut collisions = Vec::new();
    for a in 0..pigeons {
        for a2 in (a + 1)..pigeons {
            collisions.push(quantifier_or_instance(
                true,
                "b",
                holes,
                Formula::and(
                    Formula::Atom(Term::Const(a), var("b")),
                    Formula::Atom(Term::Const(a2), var("b")),
                ),
            ));
        }
    }
    if let Some(f) = or_all(collisions) {
        clauses.push(f);
    }

    // one pigeon sits in two holes
    let mut doubled = Vec::new();
    for b in 0..holes {
        for b2 in (b + 1)..holes {
            doubled.push(quantifier_or_instance(
                true,
                "a",
                pigeons,
                Formula::and(
                    Formula::Atom(var("a"), Term::Const(b)),
                    Formula::Atom(var("a"), Term::Const(b2)),
                ),
            ));
        }
    }
    if let Some(f) = or_all(doubled) {
        clauses.push(f);
    }

    if kind == PhpKind::Onto {
        clauses.push(quantifier_or_instance(
            true,
            "b",
            holes,
            quantifier_or_instance(false, "a", pigeons, Formula::NegAtom(var("a"), var("b"))),
        ));
    }

    Ok(or_all(clauses).expect("at least the unmapped-pigeon clause"))
}

/// `make_php_instance(Weak, 2m, m, ...)`.
pub fn make_wphp_instance(m: u32, budget: u64) -> Result<Formula, FormulaError> {
    make_php_instance(PhpKind::Weak, 2 * m, m, budget)
}

fn var(v: &str) -> Term {
    Term::Var(v.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        assert_eq!(Formula::parse("R(0,0)").unwrap(), Formula::atom(0, 0));
        assert_eq!(
            Formula::parse("E u <= 1 . R(u,0)").unwrap(),
            Formula::exists_le("u", 1, Formula::Atom(var("u"), Term::Const(0)))
        );
        assert_eq!(
            Formula::parse("!(R(0,0) & R(1,1))").unwrap(),
            Formula::Not(Box::new(Formula::and(
                Formula::atom(0, 0),
                Formula::atom(1, 1)
            )))
        );
        // negation straight on an atom is a negated atom
        assert_eq!(Formula::parse("!R(0,0)").unwrap(), Formula::neg_atom(0, 0));
    }

    #[test]
    fn parse_errors_carry_positions() {
        match Formula::parse("R(0 0)") {
            Err(FormulaError::Syntax { line: 1, col, .. }) => assert!(col >= 4),
            other => panic!("unexpected {:?}", other),
        }
        assert!(matches!(
            Formula::parse("E u <= -1 . R(u,0)"),
            Err(FormulaError::NegativeBound { .. })
        ));
        assert!(matches!(
            Formula::parse("R(0,0) R(1,1)"),
            Err(FormulaError::Syntax { .. })
        ));
        assert!(Formula::parse("E A <= 1 . R(0,0)").is_err());
    }

    #[test]
    fn free_variables_allowed_but_detectable() {
        let f = Formula::parse("R(x,y)").unwrap();
        assert!(!f.is_closed());
        assert!(matches!(
            f.ensure_closed(),
            Err(FormulaError::UnboundVariable { .. })
        ));
        assert!(Formula::parse("E u <= 1 . R(u,0)").unwrap().is_closed());
    }

    #[test]
    fn classify_examples() {
        assert_eq!(Formula::atom(0, 0).classify(), FormulaShape::Atomic);
        assert_eq!(
            Formula::parse("A u <= 2 . (R(u,0) | !R(u,1))")
                .unwrap()
                .classify(),
            FormulaShape::SharplyBounded
        );
        assert_eq!(
            Formula::parse("E u <= 2 . A v <= 1 . R(u,v)")
                .unwrap()
                .classify(),
            FormulaShape::ExistentialPrefix
        );
        assert_eq!(
            Formula::parse("A v <= 1 . E u <= 2 . R(u,v)")
                .unwrap()
                .classify(),
            FormulaShape::General
        );
    }

    #[test]
    fn substitute_examples() {
        let f = Formula::Atom(var("x"), Term::Const(0));
        assert_eq!(f.substitute("x", 2), Formula::atom(2, 0));

        let f = Formula::exists_le("u", 1, Formula::Atom(var("u"), var("y")));
        assert_eq!(
            f.substitute("y", 0),
            Formula::exists_le("u", 1, Formula::Atom(var("u"), Term::Const(0)))
        );

        assert_eq!(Formula::atom(0, 0).substitute("x", 5), Formula::atom(0, 0));

        // shadowed occurrences stay put
        let f = Formula::exists_le("u", 1, Formula::Atom(var("u"), Term::Const(0)));
        assert_eq!(f.substitute("u", 7), f);
    }

    #[test]
    fn classify_monotone_under_substitution() {
        let rank = |s: FormulaShape| match s {
            FormulaShape::Atomic => 0,
            FormulaShape::SharplyBounded => 1,
            FormulaShape::ExistentialPrefix => 2,
            FormulaShape::General => 3,
        };
        for text in [
            "R(x,0)",
            "E u <= 1 . R(u,x)",
            "A v <= 1 . (R(v,x) & R(x,0))",
            "A v <= 1 . E u <= 2 . R(u,x)",
        ] {
            let f = Formula::parse(text).unwrap();
            assert!(rank(f.substitute("x", 1).classify()) <= rank(f.classify()));
        }
    }

    #[test]
    fn php_instance_plain_2_1() {
        let f = make_php_instance(PhpKind::Plain, 2, 1, 10_000).unwrap();
        // E a <= 1 . !R(a,0)  |  (R(0,0) & R(1,0)); hole-collision clause vacuous
        let unmapped = Formula::exists_le("a", 1, Formula::NegAtom(var("a"), Term::Const(0)));
        let collision = Formula::and(Formula::atom(0, 0), Formula::atom(1, 0));
        assert_eq!(f, Formula::or(unmapped, collision));
    }

    #[test]
    fn php_instance_onto_1_1() {
        let f = make_php_instance(PhpKind::Onto, 1, 1, 10_000).unwrap();
        // both clauses collapse to !R(0,0)
        assert_eq!(
            f,
            Formula::or(Formula::neg_atom(0, 0), Formula::neg_atom(0, 0))
        );
    }

    #[test]
    fn wphp_is_php_2m_m() {
        let f = make_wphp_instance(1, 10_000).unwrap();
        assert_eq!(f, make_php_instance(PhpKind::Plain, 2, 1, 10_000).unwrap());
        assert!(matches!(
            make_php_instance(PhpKind::Weak, 3, 1, 10_000),
            Err(FormulaError::BadParameters { .. })
        ));
    }

    #[test]
    fn php_instance_budget() {
        assert!(matches!(
            make_php_instance(PhpKind::Plain, 100, 100, 10),
            Err(FormulaError::Budget { .. })
        ));
    }

    #[test]
    fn nnf_pushes_negations() {
        let f = Formula::parse("!(R(0,0) & E u <= 1 . R(u,1))").unwrap();
        let nnf = f.to_nnf();
        assert_eq!(
            nnf,
            Formula::or(
                Formula::neg_atom(0, 0),
                Formula::forall_le("u", 1, Formula::NegAtom(var("u"), Term::Const(1)))
            )
        );
    }

    fn arb_formula() -> impl Strategy<Value = Formula> {
        let leaf = (0u32..4, 0u32..4, proptest::bool::ANY)
            .prop_map(|(a, b, neg)| if neg { Formula::neg_atom(a, b) } else { Formula::atom(a, b) });
        leaf.prop_recursive(5, 64, 2, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::and(l, r)),
                (inner.clone(), inner.clone()).prop_map(|(l, r)| Formula::or(l, r)),
                inner.clone().prop_map(|f| f.negate()),
                (0u32..3, inner.clone()).prop_map(|(b, f)| Formula::forall_le("u", b, f)),
                (0u32..3, inner).prop_map(|(b, f)| Formula::exists_le("v", b, f)),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(f in arb_formula()) {
            let printed = f.to_string();
            let reparsed = Formula::parse(&printed).unwrap();
            prop_assert_eq!(reparsed, f);
        }
    }
}
