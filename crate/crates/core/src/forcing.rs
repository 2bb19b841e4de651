//! The forcing relation over `P(n, K)`, defined by the clause recursion.
//!
//! * an atom is forced when its pair lies in the condition;
//! * a negated atom is forced when the pair is incompatible with the
//!   condition *inside the poset* — the union fails injectivity or spills
//!   over the cap. The cap is a real horizon: a condition of size `K` has no
//!   proper extensions and therefore decides every formula;
//! * conjunctions and bounded universals are forced componentwise;
//! * a negation of a sharply bounded formula is forced when no extension
//!   forces the formula;
//! * disjunctions and bounded existentials are forced when the deciding
//!   conditions sit densely below: every extension has a further extension
//!   forcing one disjunct (some instance).
//!
//! Everything is relative to the finite poset; verdicts may change with `K`.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Formula, FormulaShape, Term};
use crate::poset::{self, Condition, PosetError, Scale};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ForcingError {
    /// `Not` wrapping something other than an atom or a sharply bounded
    /// subformula.
    UnsupportedShape { formula: String },
    UnboundVariable { var: String },
    AtomOutOfRange { pigeon: u32, hole: u32, n: u32 },
    InvalidCondition(PosetError),
}

impl From<PosetError> for ForcingError {
    fn from(e: PosetError) -> Self {
        ForcingError::InvalidCondition(e)
    }
}

impl fmt::Display for ForcingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ForcingError::UnsupportedShape { formula } => {
                write!(f, "negation of a non-sharply-bounded formula: {}", formula)
            }
            ForcingError::UnboundVariable { var } => write!(f, "unbound variable `{}`", var),
            ForcingError::AtomOutOfRange { pigeon, hole, n } => write!(
                f,
                "atom R({},{}) outside pigeons [{}] and holes [{}]",
                pigeon,
                hole,
                n + 1,
                n
            ),
            ForcingError::InvalidCondition(e) => write!(f, "{}", e),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for ForcingError {}

/// One step of the clause recursion, for `--trace` style output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceEntry {
    pub condition: Condition,
    pub formula: String,
    pub clause: u8,
    pub verdict: bool,
}

/// Evaluation context: the scale plus a memo table over (condition, formula)
/// pairs. The relation is deterministic, so memo entries never change.
pub struct ForcingContext {
    scale: Scale,
    memo: BTreeMap<(Condition, Formula), bool>,
    ext_cache: BTreeMap<Condition, Vec<Condition>>,
    trace: Option<Vec<TraceEntry>>,
}

impl ForcingContext {
    pub fn new(scale: Scale) -> Self {
        ForcingContext {
            scale,
            memo: BTreeMap::new(),
            ext_cache: BTreeMap::new(),
            trace: None,
        }
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    /// Whether `sigma` forces `phi`. The condition must lie in `P(n, K)` and
    /// the formula must be closed.
    pub fn forces(&mut self, sigma: &Condition, phi: &Formula) -> Result<bool, ForcingError> {
        sigma.validate_under(&self.scale)?;
        phi.ensure_closed()
            .map_err(|_| ForcingError::UnboundVariable {
                var: phi.free_vars().into_iter().next().unwrap_or_default(),
            })?;
        self.eval(sigma, phi)
    }

    /// Like [`forces`](Self::forces) but records every clause decision.
    /// The memo is cleared first so the trace is complete.
    pub fn forces_traced(
        &mut self,
        sigma: &Condition,
        phi: &Formula,
    ) -> Result<(bool, Vec<TraceEntry>), ForcingError> {
        self.memo.clear();
        self.trace = Some(Vec::new());
        let verdict = self.forces(sigma, phi);
        let trace = self.trace.take().unwrap_or_default();
        Ok((verdict?, trace))
    }

    fn extensions(&mut self, sigma: &Condition) -> Vec<Condition> {
        if let Some(v) = self.ext_cache.get(sigma) {
            return v.clone();
        }
        let v = poset::enumerate_extensions(sigma, &self.scale);
        self.ext_cache.insert(sigma.clone(), v.clone());
        v
    }

    fn record(&mut self, sigma: &Condition, phi: &Formula, clause: u8, verdict: bool) {
        if let Some(t) = self.trace.as_mut() {
            t.push(TraceEntry {
                condition: sigma.clone(),
                formula: phi.to_string(),
                clause,
                verdict,
            });
        }
    }

    fn atom_pair(&self, a: &Term, b: &Term) -> Result<(u32, u32), ForcingError> {
        let val = |t: &Term| match t {
            Term::Const(c) => Ok(*c),
            Term::Var(v) => Err(ForcingError::UnboundVariable { var: v.clone() }),
        };
        let (p, h) = (val(a)?, val(b)?);
        if p >= self.scale.pigeons() || h >= self.scale.n() {
            return Err(ForcingError::AtomOutOfRange {
                pigeon: p,
                hole: h,
                n: self.scale.n(),
            });
        }
        Ok((p, h))
    }

    fn eval(&mut self, sigma: &Condition, phi: &Formula) -> Result<bool, ForcingError> {
        let key = (sigma.clone(), phi.clone());
        if let Some(&v) = self.memo.get(&key) {
            return Ok(v);
        }
        let (clause, verdict) = match phi {
            Formula::Atom(a, b) => {
                let (p, h) = self.atom_pair(a, b)?;
                (1, sigma.contains_pair(p, h))
            }
            Formula::NegAtom(a, b) => {
                let (p, h) = self.atom_pair(a, b)?;
                let single = Condition::single(p, h);
                (2, !poset::is_compatible(sigma, &single, &self.scale))
            }
            Formula::And(l, r) => (3, self.eval(sigma, l)? && self.eval(sigma, r)?),
            Formula::ForallLe { var, bound, body } => {
                let mut all = true;
                for value in 0..=*bound {
                    if !self.eval(sigma, &body.substitute(var, value))? {
                        all = false;
                        break;
                    }
                }
                (4, all)
            }
            Formula::Not(inner) => match inner.as_ref() {
                Formula::Atom(a, b) => {
                    let f = Formula::NegAtom(a.clone(), b.clone());
                    (2, self.eval(sigma, &f)?)
                }
                Formula::NegAtom(a, b) => {
                    let f = Formula::Atom(a.clone(), b.clone());
                    (1, self.eval(sigma, &f)?)
                }
                other if other.classify() == FormulaShape::SharplyBounded => {
                    let mut none = true;
                    for tau in self.extensions(sigma) {
                        if self.eval(&tau, other)? {
                            none = false;
                            break;
                        }
                    }
                    (5, none)
                }
                other => {
                    return Err(ForcingError::UnsupportedShape {
                        formula: other.to_string(),
                    })
                }
            },
            Formula::Or(l, r) => {
                let mut dense = true;
                'outer: for tau in self.extensions(sigma) {
                    for rho in self.extensions(&tau) {
                        if self.eval(&rho, l)? || self.eval(&rho, r)? {
                            continue 'outer;
                        }
                    }
                    dense = false;
                    break;
                }
                (6, dense)
            }
            Formula::ExistsLe { var, bound, body } => {
                let instances: Vec<Formula> =
                    (0..=*bound).map(|v| body.substitute(var, v)).collect();
                let mut dense = true;
                'outer: for tau in self.extensions(sigma) {
                    for rho in self.extensions(&tau) {
                        for inst in &instances {
                            if self.eval(&rho, inst)? {
                                continue 'outer;
                            }
                        }
                    }
                    dense = false;
                    break;
                }
                (7, dense)
            }
        };
        self.record(sigma, phi, clause, verdict);
        self.memo.insert(key, verdict);
        Ok(verdict)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::enumerate_conditions;

    fn cond(pairs: &[(u32, u32)]) -> Condition {
        Condition::new(pairs.iter().copied()).unwrap()
    }

    fn ctx(n: u32, k: u32) -> ForcingContext {
        ForcingContext::new(Scale::new(n, k).unwrap())
    }

    fn f(text: &str) -> Formula {
        Formula::parse(text).unwrap()
    }

    #[test]
    fn atomic_clauses() {
        let mut c = ctx(3, 2);
        assert!(c.forces(&cond(&[(0, 0)]), &f("R(0,0)")).unwrap());
        assert!(c.forces(&cond(&[(0, 1)]), &f("!R(0,0)")).unwrap());
        assert!(!c.forces(&Condition::empty(), &f("R(0,0)")).unwrap());
        // every extension of {} can still pick up (0,0)
        assert!(!c.forces(&Condition::empty(), &f("!R(0,0)")).unwrap());
    }

    #[test]
    fn negation_via_extensions() {
        let mut c = ctx(3, 2);
        // extension {(0,0)} forces the atom, so the negation is not forced
        assert!(!c
            .forces(&Condition::empty(), &f("!(R(0,0) & R(0,0))"))
            .unwrap());
    }

    #[test]
    fn excluded_middle_is_forced_densely() {
        let mut c = ctx(3, 2);
        assert!(c
            .forces(&Condition::empty(), &f("R(0,0) | !R(0,0)"))
            .unwrap());
    }

    #[test]
    fn existential_clause_feels_the_horizon() {
        // at K = 2 a maximal condition may leave hole 0 empty, so "some
        // pigeon gets hole 0" is not forced; at K = n every maximal
        // condition fills all holes and it is
        let mut c = ctx(3, 2);
        assert!(!c
            .forces(&Condition::empty(), &f("E u <= 3 . R(u,0)"))
            .unwrap());
        let mut c3 = ctx(3, 3);
        assert!(c3
            .forces(&Condition::empty(), &f("E u <= 3 . R(u,0)"))
            .unwrap());
        // hole 0 taken by pigeon 2 rules the restricted candidates out
        assert!(!c.forces(&cond(&[(2, 0)]), &f("E u <= 1 . R(u,0)")).unwrap());
    }

    #[test]
    fn unsupported_negation_errors() {
        let mut c = ctx(3, 2);
        assert!(matches!(
            c.forces(&Condition::empty(), &f("!(E u <= 1 . R(u,0))")),
            Err(ForcingError::UnsupportedShape { .. })
        ));
    }

    #[test]
    fn out_of_range_atom_errors() {
        let mut c = ctx(3, 2);
        assert!(matches!(
            c.forces(&Condition::empty(), &f("R(4,0)")),
            Err(ForcingError::AtomOutOfRange { .. })
        ));
        assert!(matches!(
            c.forces(&Condition::empty(), &f("R(x,0)")),
            Err(ForcingError::UnboundVariable { .. })
        ));
    }

    #[test]
    fn atomic_negation_matches_clash_below_horizon() {
        // for conditions strictly below the cap, a negated atom is forced
        // exactly when the condition already clashes with the pair
        let s = Scale::new(3, 2).unwrap();
        let mut c = ForcingContext::new(s);
        for sigma in enumerate_conditions(&s, 10_000).unwrap() {
            if sigma.len() as u32 == s.k_cap() {
                continue;
            }
            for p in 0..s.pigeons() {
                for h in 0..s.n() {
                    let forced = c
                        .forces(&sigma, &Formula::neg_atom(p, h))
                        .unwrap();
                    let clash = sigma.hole_for(p).map(|x| x != h).unwrap_or(false)
                        || sigma.pigeon_for(h).map(|x| x != p).unwrap_or(false);
                    assert_eq!(forced, clash, "sigma={} atom=({},{})", sigma, p, h);
                }
            }
        }
    }

    #[test]
    fn horizon_conditions_decide_everything() {
        let s = Scale::new(3, 2).unwrap();
        let mut c = ForcingContext::new(s);
        let sigma = cond(&[(1, 1), (2, 2)]);
        for phi in [f("R(0,0)"), f("!R(0,0)"), f("R(0,0) | R(3,0)")] {
            let pos = c.forces(&sigma, &phi).unwrap();
            let neg = c.forces(&sigma, &phi.clone().negate()).unwrap();
            assert!(pos != neg);
        }
    }

    #[test]
    fn conjunction_distributes() {
        let mut c = ctx(3, 2);
        for sigma in [Condition::empty(), cond(&[(0, 0)]), cond(&[(0, 0), (1, 1)])] {
            let both = c.forces(&sigma, &f("R(0,0) & R(1,1)")).unwrap();
            let l = c.forces(&sigma, &f("R(0,0)")).unwrap();
            let r = c.forces(&sigma, &f("R(1,1)")).unwrap();
            assert_eq!(both, l && r);
        }
    }

    #[test]
    fn monotone_and_consistent_small() {
        let s = Scale::new(3, 2).unwrap();
        let mut c = ForcingContext::new(s);
        let formulas = [
            f("R(0,0)"),
            f("!R(0,0)"),
            f("R(0,0) | R(1,1)"),
            f("E u <= 1 . R(u,0)"),
            f("!(R(0,0) & R(1,1))"),
            f("A u <= 1 . (R(u,0) | !R(u,0))"),
        ];
        let all = enumerate_conditions(&s, 10_000).unwrap();
        for phi in &formulas {
            for sigma in &all {
                let at_sigma = c.forces(sigma, phi).unwrap();
                if at_sigma {
                    for tau in poset::enumerate_extensions(sigma, &s) {
                        assert!(c.forces(&tau, phi).unwrap(), "monotonicity at {}", tau);
                    }
                }
                if matches!(
                    phi.classify(),
                    FormulaShape::Atomic | FormulaShape::SharplyBounded
                ) {
                    let neg = c.forces(sigma, &phi.clone().negate()).unwrap();
                    assert!(!(at_sigma && neg), "contradiction at {}", sigma);
                }
            }
        }
    }

    #[test]
    fn trace_records_clause_steps() {
        let mut c = ctx(3, 2);
        let (verdict, trace) = c
            .forces_traced(&cond(&[(0, 0)]), &f("R(0,0) & !R(1,1)"))
            .unwrap();
        assert!(!verdict);
        assert!(trace.iter().any(|t| t.clause == 1));
        assert!(!trace.is_empty());
    }

    #[test]
    fn memo_is_stable() {
        let mut c1 = ctx(3, 2);
        let mut c2 = ctx(3, 2);
        let phi = f("(R(0,0) | !R(0,0)) & (E u <= 2 . R(u,1))");
        let a = c1.forces(&Condition::empty(), &phi).unwrap();
        // second evaluation hits the memo
        let b = c1.forces(&Condition::empty(), &phi).unwrap();
        let fresh = c2.forces(&Condition::empty(), &phi).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, fresh);
    }
}
