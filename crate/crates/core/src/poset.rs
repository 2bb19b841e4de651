//! The forcing poset of partial injective maps from pigeons to holes.
//!
//! At scale `n` there are `n + 1` pigeons `0..=n` and `n` holes `0..n-1`.
//! A [`Condition`] is a partial injective map between them; the poset
//! `P(n, K)` consists of all conditions of size at most the cap `K`, ordered
//! by reverse inclusion (a superset is a *stronger* condition, written
//! `tau <= sigma`).
//!
//! Two compatibility notions coexist and both are exposed:
//!
//! * [`Condition::compatible`] — the raw matching-theoretic one: the union of
//!   the two pair sets is again injective both ways. Decision trees, leaf
//!   families, matching families and array properties all use this.
//! * [`is_compatible`] — compatibility *inside* `P(n, K)`: the union must be
//!   injective and additionally fit under the size cap. Filters and the
//!   forcing relation quantify over `P(n, K)` and use this one.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::combin;

/// Ambient finite parameters: `n` holes, `n + 1` pigeons, and the condition
/// size cap `K` that cuts the poset off.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Scale {
    n: u32,
    k_cap: u32,
}

impl Scale {
    /// Requires `n >= 1` and `1 <= K <= n`.
    pub fn new(n: u32, k_cap: u32) -> Result<Self, PosetError> {
        if n < 1 || k_cap < 1 || k_cap > n {
            return Err(PosetError::BadScale { n, k_cap });
        }
        Ok(Scale { n, k_cap })
    }

    /// Number of holes.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of pigeons, always `n + 1`.
    pub fn pigeons(&self) -> u32 {
        self.n + 1
    }

    /// The size cap of the poset.
    pub fn k_cap(&self) -> u32 {
        self.k_cap
    }
}

/// A partial injective map from pigeons to holes, kept as a pair list sorted
/// by pigeon. Equality is structural; the ordering is size first, then
/// lexicographic on the sorted pair list, which is the canonical enumeration
/// order used everywhere.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Condition {
    pairs: Vec<(u32, u32)>,
}

impl PartialOrd for Condition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Condition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.pairs
            .len()
            .cmp(&other.pairs.len())
            .then_with(|| self.pairs.cmp(&other.pairs))
    }
}

impl Condition {
    /// The empty condition, the weakest element of every poset.
    pub fn empty() -> Self {
        Condition { pairs: Vec::new() }
    }

    /// A single pigeon-to-hole assignment.
    pub fn single(pigeon: u32, hole: u32) -> Self {
        Condition {
            pairs: alloc::vec![(pigeon, hole)],
        }
    }

    /// Builds a condition from pairs, sorting by pigeon and rejecting any
    /// repeated pigeon or repeated hole.
    pub fn new(pairs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self, PosetError> {
        let mut pairs: Vec<(u32, u32)> = pairs.into_iter().collect();
        pairs.sort_unstable();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PosetError::PigeonReused { pigeon: w[0].0 });
            }
        }
        let mut holes: Vec<u32> = pairs.iter().map(|&(_, h)| h).collect();
        holes.sort_unstable();
        for w in holes.windows(2) {
            if w[0] == w[1] {
                return Err(PosetError::HoleReused { hole: w[0] });
            }
        }
        Ok(Condition { pairs })
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains_pair(&self, pigeon: u32, hole: u32) -> bool {
        self.pairs.binary_search(&(pigeon, hole)).is_ok()
    }

    /// The hole this condition assigns to `pigeon`, if any.
    pub fn hole_for(&self, pigeon: u32) -> Option<u32> {
        self.pairs
            .binary_search_by_key(&pigeon, |&(p, _)| p)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// The pigeon this condition sends to `hole`, if any.
    pub fn pigeon_for(&self, hole: u32) -> Option<u32> {
        self.pairs.iter().find(|&&(_, h)| h == hole).map(|&(p, _)| p)
    }

    pub fn uses_pigeon(&self, pigeon: u32) -> bool {
        self.hole_for(pigeon).is_some()
    }

    pub fn uses_hole(&self, hole: u32) -> bool {
        self.pigeon_for(hole).is_some()
    }

    /// Union of the two pair sets, if it is again injective both ways.
    pub fn union(&self, other: &Condition) -> Option<Condition> {
        let mut pairs = self.pairs.clone();
        for &(p, h) in &other.pairs {
            match self.hole_for(p) {
                Some(h2) if h2 == h => continue,
                Some(_) => return None,
                None => {
                    if self.uses_hole(h) {
                        return None;
                    }
                    pairs.push((p, h));
                }
            }
        }
        // other is itself injective, so only cross clashes among the newly
        // added holes remain to be checked
        let mut added: Vec<u32> = other
            .pairs
            .iter()
            .filter(|&&(p, _)| !self.uses_pigeon(p))
            .map(|&(_, h)| h)
            .collect();
        added.sort_unstable();
        if added.windows(2).any(|w| w[0] == w[1]) {
            return None;
        }
        pairs.sort_unstable();
        Some(Condition { pairs })
    }

    /// Raw compatibility: the union is a partial injective map. No size cap.
    pub fn compatible(&self, other: &Condition) -> bool {
        self.union(other).is_some()
    }

    /// Poset order: `self` extends (is stronger than) `weaker` when it
    /// contains every pair of `weaker`.
    pub fn extends(&self, weaker: &Condition) -> bool {
        weaker
            .pairs
            .iter()
            .all(|&(p, h)| self.contains_pair(p, h))
    }

    /// True when the two pair sets share no pair.
    pub fn is_disjoint(&self, other: &Condition) -> bool {
        self.pairs
            .iter()
            .all(|&(p, h)| !other.contains_pair(p, h))
    }

    /// Pairs of `self` not present in `other`.
    pub fn difference(&self, other: &Condition) -> Condition {
        Condition {
            pairs: self
                .pairs
                .iter()
                .copied()
                .filter(|&(p, h)| !other.contains_pair(p, h))
                .collect(),
        }
    }

    /// Checks membership in `P(n, K)`: pigeons below `n + 1`, holes below
    /// `n`, size at most `K`.
    pub fn validate_under(&self, s: &Scale) -> Result<(), PosetError> {
        self.validate_range(s)?;
        if self.len() as u32 > s.k_cap() {
            return Err(PosetError::CapExceeded {
                size: self.len() as u32,
                k_cap: s.k_cap(),
            });
        }
        Ok(())
    }

    /// Range check only: a valid partial injection of the scale's pigeons
    /// into its holes, with no size constraint. Tree bases and array entries
    /// live here; the cap applies only to poset membership.
    pub fn validate_range(&self, s: &Scale) -> Result<(), PosetError> {
        for &(p, h) in &self.pairs {
            if p >= s.pigeons() || h >= s.n() {
                return Err(PosetError::OutOfRange {
                    pigeon: p,
                    hole: h,
                    n: s.n(),
                });
            }
        }
        Ok(())
    }

    /// Parses the text form: comma-separated `p->h` entries, or the literal
    /// `{}` for the empty condition. Entries are canonicalized.
    pub fn parse(text: &str) -> Result<Condition, PosetError> {
        let text = text.trim();
        if text == "{}" {
            return Ok(Condition::empty());
        }
        if text.is_empty() {
            return Err(PosetError::Parse {
                input: String::from(text),
            });
        }
        let mut pairs = Vec::new();
        for entry in text.split(',') {
            let entry = entry.trim();
            let (p, h) = entry.split_once("->").ok_or_else(|| PosetError::Parse {
                input: String::from(entry),
            })?;
            let p: u32 = p.trim().parse().map_err(|_| PosetError::Parse {
                input: String::from(entry),
            })?;
            let h: u32 = h.trim().parse().map_err(|_| PosetError::Parse {
                input: String::from(entry),
            })?;
            pairs.push((p, h));
        }
        Condition::new(pairs)
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.pairs.is_empty() {
            return write!(f, "{{}}");
        }
        for (i, &(p, h)) in self.pairs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}->{}", p, h)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PosetError {
    BadScale { n: u32, k_cap: u32 },
    PigeonReused { pigeon: u32 },
    HoleReused { hole: u32 },
    OutOfRange { pigeon: u32, hole: u32, n: u32 },
    CapExceeded { size: u32, k_cap: u32 },
    BudgetExceeded { count: BigUint, budget: u64 },
    Parse { input: String },
}

impl fmt::Display for PosetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PosetError::BadScale { n, k_cap } => {
                write!(f, "invalid scale: n={} K={} (need 1 <= K <= n)", n, k_cap)
            }
            PosetError::PigeonReused { pigeon } => {
                write!(f, "pigeon {} mapped twice", pigeon)
            }
            PosetError::HoleReused { hole } => write!(f, "hole {} used twice", hole),
            PosetError::OutOfRange { pigeon, hole, n } => write!(
                f,
                "pair {}->{} outside pigeons [{}] and holes [{}]",
                pigeon,
                hole,
                n + 1,
                n
            ),
            PosetError::CapExceeded { size, k_cap } => {
                write!(f, "condition of size {} exceeds cap K={}", size, k_cap)
            }
            PosetError::BudgetExceeded { count, budget } => {
                write!(f, "{} conditions exceed budget {}", count, budget)
            }
            PosetError::Parse { input } => write!(f, "cannot parse condition entry `{}`", input),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for PosetError {}

/// Compatibility inside `P(n, K)`: the union is injective both ways and its
/// size stays under the cap. Symmetric in its arguments.
pub fn is_compatible(a: &Condition, b: &Condition, s: &Scale) -> bool {
    match a.union(b) {
        Some(u) => u.len() as u32 <= s.k_cap(),
        None => false,
    }
}

/// Exact cardinality of `P(n, K)`: the sum over sizes `j` of
/// `j! C(n+1, j) C(n, j)`.
pub fn condition_count(s: &Scale) -> BigUint {
    let n = s.n() as u64;
    let mut total = BigUint::ZERO;
    for j in 0..=s.k_cap() as u64 {
        total += combin::factorial(j) * combin::binomial(n + 1, j) * combin::binomial(n, j);
    }
    total
}

/// All extensions of `base` inside `P(n, K)` (including `base` itself when it
/// is a member), in canonical size-then-lexicographic order. Empty when the
/// base already exceeds the cap.
pub fn enumerate_extensions(base: &Condition, s: &Scale) -> Vec<Condition> {
    let mut out = Vec::new();
    if base.len() as u32 > s.k_cap() {
        return out;
    }
    // grow from base, always adding pairs in increasing lexicographic order;
    // every extension is reached exactly once since the added pairs form a
    // unique sorted sequence
    fn rec(
        base: &Condition,
        added: &mut Vec<(u32, u32)>,
        min_pair: Option<(u32, u32)>,
        s: &Scale,
        out: &mut Vec<Condition>,
    ) {
        let cur = Condition::new(base.pairs().iter().copied().chain(added.iter().copied()))
            .expect("pair choice keeps injectivity");
        let size = cur.len() as u32;
        out.push(cur.clone());
        if size == s.k_cap() {
            return;
        }
        for p in 0..s.pigeons() {
            if cur.uses_pigeon(p) {
                continue;
            }
            for h in 0..s.n() {
                if cur.uses_hole(h) {
                    continue;
                }
                if let Some(mp) = min_pair {
                    if (p, h) <= mp {
                        continue;
                    }
                }
                added.push((p, h));
                rec(base, added, Some((p, h)), s, out);
                added.pop();
            }
        }
    }
    rec(base, &mut Vec::new(), None, s, &mut out);
    out.sort();
    out
}

/// Materializes all of `P(n, K)` in canonical order, guarded by a budget on
/// the exact count.
pub fn enumerate_conditions(s: &Scale, budget: u64) -> Result<Vec<Condition>, PosetError> {
    let count = condition_count(s);
    if count.to_u64().map(|c| c > budget).unwrap_or(true) {
        return Err(PosetError::BudgetExceeded { count, budget });
    }
    Ok(enumerate_extensions(&Condition::empty(), s))
}

/// A filter: pairwise compatible within `P(n, K)` and upward closed, i.e.
/// closed under weakening (every subset of a member is a member).
pub fn is_filter(set: &[Condition], s: &Scale) -> bool {
    for c in set {
        if c.validate_under(s).is_err() {
            return false;
        }
    }
    for (i, a) in set.iter().enumerate() {
        for b in set.iter().skip(i + 1) {
            if !is_compatible(a, b, s) {
                return false;
            }
        }
    }
    // upward closure within P(n, K) is exactly closure under subsets
    for c in set {
        for drop in 0..c.len() {
            let weaker = Condition {
                pairs: c
                    .pairs()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != drop)
                    .map(|(_, &p)| p)
                    .collect(),
            };
            if !set.contains(&weaker) {
                return false;
            }
        }
    }
    true
}

/// Density of `pred` over `P(n, K)`: every condition reaches a member of the
/// set by extending. Conditions already at the size horizon `K` cannot be
/// properly extended at all and are excluded from the quantifier; keeping
/// them would make every set that misses some horizon condition non-dense
/// and the notion useless at finite scale.
pub fn is_dense(pred: impl Fn(&Condition) -> bool, s: &Scale) -> bool {
    is_dense_relative(pred, &Condition::empty(), s)
}

/// Density restricted to extensions of `base`, with the same horizon rule as
/// [`is_dense`].
pub fn is_dense_relative(
    pred: impl Fn(&Condition) -> bool,
    base: &Condition,
    s: &Scale,
) -> bool {
    for sigma in enumerate_extensions(base, s) {
        if sigma.len() as u32 == s.k_cap() {
            continue;
        }
        if !enumerate_extensions(&sigma, s).iter().any(&pred) {
            return false;
        }
    }
    true
}
