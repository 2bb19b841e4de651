//! Weak-pigeonhole arrays: `2m x m` grids of condition sets.
//!
//! A valid array satisfies four properties: (1) cells in a common row or
//! column are disjoint as sets, (2) entries sharing a column are pairwise
//! incompatible, (3) entries sharing a row are pairwise incompatible, and
//! (4) every condition extending the base inside `P(n, K)` is compatible
//! with some entry of every row. Entries are bounded in size by the array
//! parameter `k`, compatible with and disjoint from the base.
//!
//! Row uniformization grafts deciding trees step by step until every leaf
//! extends a unique row entry, giving the `2m * (n-s)!/(n-s-2k^2)!` lower
//! bound on uniform array size; the matching bound gives the
//! `m * (n+1-s)!/(n+1-s-k)!` upper bound. Their exact comparison is the
//! contradiction that rules arrays out when `k` is small against `n`.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::combin;
use crate::poset::{self, Condition, PosetError, Scale};
use crate::tree::{check_covering, LeafFamily, PhpTree, TreeError};

/// A `2m x m` grid of condition sets over a base condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WArray {
    m: u32,
    k: u32,
    base: Condition,
    scale: Scale,
    /// `cells[a][b]` is the entry set at row `a`, column `b`, kept sorted.
    cells: Vec<Vec<Vec<Condition>>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EntryViolation {
    pub cell: (u32, u32),
    pub entry: Condition,
    pub why: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisjointnessViolation {
    pub cell_a: (u32, u32),
    pub cell_b: (u32, u32),
    pub shared: Condition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompatibilityViolation {
    pub cell_a: (u32, u32),
    pub cell_b: (u32, u32),
    pub tau_a: Condition,
    pub tau_b: Condition,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringViolation {
    pub row: u32,
    pub rho: Condition,
}

/// Outcome of the four property checks plus the entry constraint; a `None`
/// field passed, a `Some` carries a concrete witness.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PropertyReport {
    pub entry_constraint: Option<EntryViolation>,
    pub p1: Option<DisjointnessViolation>,
    pub p2: Option<IncompatibilityViolation>,
    pub p3: Option<IncompatibilityViolation>,
    pub p4: Option<CoveringViolation>,
}

impl PropertyReport {
    pub fn all_ok(&self) -> bool {
        self.entry_constraint.is_none()
            && self.p1.is_none()
            && self.p2.is_none()
            && self.p3.is_none()
            && self.p4.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArraySizes {
    pub total: u64,
    pub row_decomposition: u64,
    pub col_decomposition: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WArrayError {
    BadDimensions { rows: usize, cols: usize, m: u32 },
    DegenerateK,
    EmptyEntry { cell: (u32, u32) },
    RowEntryInvalid { entry: Condition, why: &'static str },
    RowNotAntichain { a: Condition, b: Condition },
    RowNotCovering { rho: Condition },
    /// No row entry compatible with a leaf grown during uniformization.
    StuckAtStep { step: u32, leaf: Condition },
    Regime { need: u32, have: u32 },
    PropertiesFail(Box<PropertyReport>),
    SizeNeedsDisjointness(DisjointnessViolation),
    Domain { msg: &'static str },
    BudgetExceeded { explored: u64, budget: u64 },
    Poset(PosetError),
    Tree(TreeError),
}

impl From<PosetError> for WArrayError {
    fn from(e: PosetError) -> Self {
        WArrayError::Poset(e)
    }
}

impl From<TreeError> for WArrayError {
    fn from(e: TreeError) -> Self {
        WArrayError::Tree(e)
    }
}

impl fmt::Display for WArrayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WArrayError::BadDimensions { rows, cols, m } => {
                write!(f, "grid is {}x{}, expected {}x{}", rows, cols, 2 * m, m)
            }
            WArrayError::DegenerateK => write!(f, "entry size bound k must be at least 1"),
            WArrayError::EmptyEntry { cell } => {
                write!(f, "empty condition as entry at cell ({},{})", cell.0, cell.1)
            }
            WArrayError::RowEntryInvalid { entry, why } => {
                write!(f, "row entry {} rejected: {}", entry, why)
            }
            WArrayError::RowNotAntichain { a, b } => {
                write!(f, "row entries {} and {} are compatible", a, b)
            }
            WArrayError::RowNotCovering { rho } => {
                write!(f, "row covers no extension compatible with {}", rho)
            }
            WArrayError::StuckAtStep { step, leaf } => write!(
                f,
                "no row entry compatible with leaf {} at step {}",
                leaf, step
            ),
            WArrayError::Regime { need, have } => {
                write!(f, "out of regime: need {} <= n = {}", need, have)
            }
            WArrayError::PropertiesFail(_) => write!(f, "array properties do not hold"),
            WArrayError::SizeNeedsDisjointness(_) => {
                write!(f, "size identity requires property 1")
            }
            WArrayError::Domain { msg } => write!(f, "domain error: {}", msg),
            WArrayError::BudgetExceeded { explored, budget } => {
                write!(f, "search explored {} nodes, budget {}", explored, budget)
            }
            WArrayError::Poset(e) => write!(f, "{}", e),
            WArrayError::Tree(e) => write!(f, "{}", e),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for WArrayError {}

impl WArray {
    /// Structural construction: dimensions `2m x m`, a base in `P(n, K)`,
    /// entries in range and nonempty. The four properties and the per-entry
    /// constraints are *not* enforced here; [`verify_properties`]
    /// (Self::verify_properties) reports them.
    pub fn new(
        m: u32,
        k: u32,
        base: Condition,
        scale: Scale,
        cells: Vec<Vec<Vec<Condition>>>,
    ) -> Result<Self, WArrayError> {
        if m < 1 {
            return Err(WArrayError::BadDimensions {
                rows: cells.len(),
                cols: 0,
                m,
            });
        }
        if k < 1 {
            return Err(WArrayError::DegenerateK);
        }
        base.validate_under(&scale)?;
        if cells.len() != 2 * m as usize || cells.iter().any(|r| r.len() != m as usize) {
            return Err(WArrayError::BadDimensions {
                rows: cells.len(),
                cols: cells.first().map(|r| r.len()).unwrap_or(0),
                m,
            });
        }
        let mut cells = cells;
        for (a, row) in cells.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                cell.sort();
                cell.dedup();
                for entry in cell.iter() {
                    entry.validate_range(&scale)?;
                    if entry.is_empty() {
                        return Err(WArrayError::EmptyEntry {
                            cell: (a as u32, b as u32),
                        });
                    }
                }
            }
        }
        Ok(WArray {
            m,
            k,
            base,
            scale,
            cells,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn base(&self) -> &Condition {
        &self.base
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn cells(&self) -> &[Vec<Vec<Condition>>] {
        &self.cells
    }

    pub fn cell(&self, a: u32, b: u32) -> &[Condition] {
        &self.cells[a as usize][b as usize]
    }

    /// All entries of row `a`, deduplicated and sorted.
    pub fn row_union(&self, a: u32) -> Vec<Condition> {
        let mut out: Vec<Condition> = self.cells[a as usize]
            .iter()
            .flat_map(|c| c.iter().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// All entries of column `b`, deduplicated and sorted.
    pub fn col_union(&self, b: u32) -> Vec<Condition> {
        let mut out: Vec<Condition> = self
            .cells
            .iter()
            .flat_map(|row| row[b as usize].iter().cloned())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    /// Checks the entry constraint and the four array properties, returning
    /// a witness for each failure.
    pub fn verify_properties(&self) -> PropertyReport {
        let mut report = PropertyReport::default();

        'entry: for a in 0..2 * self.m {
            for b in 0..self.m {
                for entry in self.cell(a, b) {
                    let why = if entry.len() as u32 > self.k {
                        Some("size exceeds k")
                    } else if !entry.compatible(&self.base) {
                        Some("incompatible with base")
                    } else if !entry.is_disjoint(&self.base) {
                        Some("intersects base")
                    } else {
                        None
                    };
                    if let Some(why) = why {
                        report.entry_constraint = Some(EntryViolation {
                            cell: (a, b),
                            entry: entry.clone(),
                            why,
                        });
                        break 'entry;
                    }
                }
            }
        }

        // property 1: same-column and same-row cells are disjoint sets
        'p1: for a in 0..2 * self.m {
            for b in 0..self.m {
                for a2 in (a + 1)..2 * self.m {
                    if let Some(shared) = first_shared(self.cell(a, b), self.cell(a2, b)) {
                        report.p1 = Some(DisjointnessViolation {
                            cell_a: (a, b),
                            cell_b: (a2, b),
                            shared,
                        });
                        break 'p1;
                    }
                }
                for b2 in (b + 1)..self.m {
                    if let Some(shared) = first_shared(self.cell(a, b), self.cell(a, b2)) {
                        report.p1 = Some(DisjointnessViolation {
                            cell_a: (a, b),
                            cell_b: (a, b2),
                            shared,
                        });
                        break 'p1;
                    }
                }
            }
        }

        // property 2: all entries of a column pairwise incompatible
        'p2: for b in 0..self.m {
            for a in 0..2 * self.m {
                for a2 in a..2 * self.m {
                    for tau in self.cell(a, b) {
                        for tau2 in self.cell(a2, b) {
                            if tau != tau2 && tau.compatible(tau2) {
                                report.p2 = Some(IncompatibilityViolation {
                                    cell_a: (a, b),
                                    cell_b: (a2, b),
                                    tau_a: tau.clone(),
                                    tau_b: tau2.clone(),
                                });
                                break 'p2;
                            }
                        }
                    }
                }
            }
        }

        // property 3: all entries of a row pairwise incompatible
        'p3: for a in 0..2 * self.m {
            for b in 0..self.m {
                for b2 in b..self.m {
                    for tau in self.cell(a, b) {
                        for tau2 in self.cell(a, b2) {
                            if tau != tau2 && tau.compatible(tau2) {
                                report.p3 = Some(IncompatibilityViolation {
                                    cell_a: (a, b),
                                    cell_b: (a, b2),
                                    tau_a: tau.clone(),
                                    tau_b: tau2.clone(),
                                });
                                break 'p3;
                            }
                        }
                    }
                }
            }
        }

        // property 4: exhaustive covering over P(n, K)
        'p4: for rho in poset::enumerate_extensions(&self.base, &self.scale) {
            for a in 0..2 * self.m {
                let covered = (0..self.m)
                    .any(|b| self.cell(a, b).iter().any(|tau| tau.compatible(&rho)));
                if !covered {
                    report.p4 = Some(CoveringViolation { row: a, rho });
                    break 'p4;
                }
            }
        }

        report
    }

    /// Total entry count together with its row and column decompositions.
    /// Property 1 makes the three numbers coincide; without it the identity
    /// is meaningless, so its violation is an error.
    pub fn size(&self) -> Result<ArraySizes, WArrayError> {
        let report = self.verify_properties();
        if let Some(v) = report.p1 {
            return Err(WArrayError::SizeNeedsDisjointness(v));
        }
        let total = self
            .cells
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.len() as u64)
            .sum();
        let row_decomposition = (0..2 * self.m).map(|a| self.row_union(a).len() as u64).sum();
        let col_decomposition = (0..self.m).map(|b| self.col_union(b).len() as u64).sum();
        Ok(ArraySizes {
            total,
            row_decomposition,
            col_decomposition,
        })
    }

    /// Rebuilds the array into a `2k^2`-uniform one: every row is grown by
    /// [`uniformize_row`] and each new leaf is filed under the column of the
    /// unique original entry it extends. Requires all properties and the
    /// regime `2k^2 + K + |base| <= n`.
    pub fn uniformize(&self) -> Result<WArray, WArrayError> {
        let report = self.verify_properties();
        if !report.all_ok() {
            return Err(WArrayError::PropertiesFail(Box::new(report)));
        }
        let k = self.k;
        let need = 2 * k * k + self.scale.k_cap() + self.base.len() as u32;
        if need > self.scale.n() {
            return Err(WArrayError::Regime {
                need,
                have: self.scale.n(),
            });
        }
        let mut cells =
            alloc::vec![alloc::vec![Vec::new(); self.m as usize]; 2 * self.m as usize];
        for a in 0..2 * self.m {
            let row = self.row_union(a);
            let fam = uniformize_row(&row, k, &self.base, &self.scale)?;
            for rho in fam.leaves() {
                let tau = row
                    .iter()
                    .find(|t| rho.extends(t))
                    .expect("final loop property: every leaf extends a row entry");
                let b = (0..self.m)
                    .find(|&b| self.cell(a, b).contains(tau))
                    .expect("row entries live in some cell");
                cells[a as usize][b as usize].push(rho.clone());
            }
        }
        WArray::new(self.m, 2 * k * k, self.base.clone(), self.scale, cells)
    }
}

fn first_shared(a: &[Condition], b: &[Condition]) -> Option<Condition> {
    a.iter().find(|x| b.contains(x)).cloned()
}

fn validate_row(
    row: &[Condition],
    k: u32,
    base: &Condition,
    scale: &Scale,
) -> Result<(), WArrayError> {
    if k < 1 {
        return Err(WArrayError::DegenerateK);
    }
    let need = 2 * k * k + scale.k_cap() + base.len() as u32;
    if need > scale.n() {
        return Err(WArrayError::Regime {
            need,
            have: scale.n(),
        });
    }
    for entry in row {
        entry.validate_range(scale)?;
        let why = if entry.is_empty() {
            Some("entries must be nonempty")
        } else if entry.len() as u32 > k {
            Some("size exceeds k")
        } else if !entry.compatible(base) {
            Some("incompatible with base")
        } else if !entry.is_disjoint(base) {
            Some("intersects base")
        } else {
            None
        };
        if let Some(why) = why {
            return Err(WArrayError::RowEntryInvalid {
                entry: entry.clone(),
                why,
            });
        }
    }
    for (i, a) in row.iter().enumerate() {
        for b in row.iter().skip(i + 1) {
            if a.compatible(b) {
                return Err(WArrayError::RowNotAntichain {
                    a: a.clone(),
                    b: b.clone(),
                });
            }
        }
    }
    let fam = LeafFamily::new(base.clone(), row.to_vec());
    if !check_covering(&fam, scale) {
        let witness = poset::enumerate_extensions(base, scale)
            .into_iter()
            .find(|rho| !row.iter().any(|t| t.compatible(rho)))
            .unwrap_or_else(Condition::empty);
        return Err(WArrayError::RowNotCovering { rho: witness });
    }
    Ok(())
}

/// Grows a `2k^2`-uniform leaf family from a covering antichain of row
/// entries: `k` grafting steps, each deciding for every current leaf the
/// smallest row entry still compatible with it. Afterwards every compatible
/// row entry is contained in the leaf.
pub fn uniformize_row(
    row: &[Condition],
    k: u32,
    base: &Condition,
    scale: &Scale,
) -> Result<LeafFamily, WArrayError> {
    Ok(uniformize_row_trace(row, k, base, scale)?
        .pop()
        .expect("k >= 1 steps"))
}

/// Same construction, returning the leaf family after every step; the last
/// element is the final family.
pub fn uniformize_row_trace(
    row: &[Condition],
    k: u32,
    base: &Condition,
    scale: &Scale,
) -> Result<Vec<LeafFamily>, WArrayError> {
    validate_row(row, k, base, scale)?;
    let mut tree = PhpTree::root_only(base.clone(), *scale)?;
    let mut stages = Vec::new();
    for step in 1..=k {
        let mut attachments = BTreeMap::new();
        let mut failure = None;
        tree.walk_leaves(|leaf, _| {
            if failure.is_some() || attachments.contains_key(leaf) {
                return;
            }
            let pick = row.iter().find(|pi| pi.compatible(leaf));
            let Some(pi) = pick else {
                failure = Some(WArrayError::StuckAtStep {
                    step,
                    leaf: leaf.clone(),
                });
                return;
            };
            let sub_base = base.union(leaf).expect("labels extend the base");
            let built = PhpTree::decide_condition_tree(sub_base, pi, *scale)
                .and_then(|t| t.extend_uniform(2 * k));
            match built {
                Ok(t) => {
                    attachments.insert(leaf.clone(), t);
                }
                Err(e) => failure = Some(WArrayError::Tree(e)),
            }
        });
        if let Some(e) = failure {
            return Err(e);
        }
        tree = tree.graft(&attachments)?;
        debug_assert!(tree.is_uniform(2 * step * k));
        stages.push(tree.leaves());
    }
    Ok(stages)
}

/// `2m * (n-s)!/(n-s-k)!`: the uniform-array size lower bound.
pub fn lower_bound(n: u64, s: u64, k: u64, m: u64) -> Result<BigUint, WArrayError> {
    if s > n || k > n - s {
        return Err(WArrayError::Domain {
            msg: "need s <= n and k <= n - s",
        });
    }
    Ok(BigUint::from(2 * m) * combin::falling_factorial(n - s, k))
}

/// `m * (n+1-s)!/(n+1-s-k)!`: the uniform-array size upper bound.
pub fn upper_bound(n: u64, s: u64, k: u64, m: u64) -> Result<BigUint, WArrayError> {
    if s > n || k > n + 1 - s {
        return Err(WArrayError::Domain {
            msg: "need s <= n and k <= n + 1 - s",
        });
    }
    Ok(BigUint::from(m) * combin::falling_factorial(n + 1 - s, k))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ContradictionReport {
    pub ratio: BigRational,
    pub contradiction: bool,
}

/// Compares the two bounds exactly: combining them forces
/// `2 <= (n+1-s)/(n+1-s-k)`, so a ratio strictly below 2 means arrays with
/// these parameters cannot exist.
pub fn contradiction_check(n: u64, s: u64, k: u64) -> Result<ContradictionReport, WArrayError> {
    if s > n || k >= n + 1 - s {
        return Err(WArrayError::Domain {
            msg: "need s <= n and k < n + 1 - s",
        });
    }
    let ratio = BigRational::new(BigInt::from(n + 1 - s), BigInt::from(n + 1 - s - k));
    let two = BigRational::from_integer(BigInt::from(2));
    Ok(ContradictionReport {
        contradiction: ratio < two,
        ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AjtaiReport {
    pub floor_pow: BigUint,
    pub lhs: BigRational,
    pub rhs: BigRational,
    pub contradiction: bool,
}

/// The almost-bijective variant: with `t = floor(n^(1-eps))` the bounds give
/// `(t+1)/t <= (n+1-s)/(n+1-s-k)`, so `lhs > rhs` is the contradiction.
/// `eps` must be a rational strictly between 0 and 1; the floor is computed
/// by an exact integer root.
pub fn ajtai_check(
    n: u64,
    s: u64,
    k: u64,
    eps: &BigRational,
) -> Result<AjtaiReport, WArrayError> {
    if s > n || k >= n + 1 - s {
        return Err(WArrayError::Domain {
            msg: "need s <= n and k < n + 1 - s",
        });
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(WArrayError::Domain {
            msg: "need 0 < eps < 1",
        });
    }
    if n == 0 {
        return Err(WArrayError::Domain { msg: "need n >= 1" });
    }
    let p = eps.numer().to_u32().ok_or(WArrayError::Domain {
        msg: "eps numerator too large",
    })?;
    let q = eps.denom().to_u32().ok_or(WArrayError::Domain {
        msg: "eps denominator too large",
    })?;
    // floor(n^((q-p)/q)) = floor((n^(q-p))^(1/q)), exactly
    let t = BigUint::from(n).pow(q - p).nth_root(q);
    debug_assert!(!t.is_zero());
    let t_int = BigInt::from(t.clone());
    let lhs = BigRational::new(t_int.clone() + BigInt::one(), t_int);
    let rhs = BigRational::new(BigInt::from(n + 1 - s), BigInt::from(n + 1 - s - k));
    Ok(AjtaiReport {
        floor_pow: t,
        contradiction: lhs > rhs,
        lhs,
        rhs,
    })
}

/// Exhaustive search for a valid array at the given parameters: `None` when
/// no grid of candidate entries satisfies all four properties.
///
/// Candidates are all matchings of size `1..=k` compatible with and disjoint
/// from the base (sizes beyond the poset cap are legitimate entries — row
/// uniformization routinely produces them). The search is goal-directed:
/// it repeatedly picks the first uncovered pair (row, extension of the base
/// in `P(n, K)`) and branches over every placement that would cover it,
/// maintaining properties 1-3 incrementally; since partial grids below a
/// valid array stay valid, the search is complete.
pub fn brute_force_search_array(
    scale: &Scale,
    m: u32,
    k: u32,
    base: &Condition,
    budget: u64,
) -> Result<Option<WArray>, WArrayError> {
    if m < 1 {
        return Err(WArrayError::Domain { msg: "need m >= 1" });
    }
    base.validate_under(scale)?;

    // candidate entries: matchings avoiding the base's pigeons and holes
    let mut candidates: Vec<Condition> = Vec::new();
    if k >= 1 {
        let pigeons: Vec<u32> = (0..scale.pigeons())
            .filter(|&p| !base.uses_pigeon(p))
            .collect();
        let holes: Vec<u32> = (0..scale.n()).filter(|&h| !base.uses_hole(h)).collect();
        fn gen(
            pigeons: &[u32],
            holes: &[u32],
            k: u32,
            start: usize,
            cur: &mut Vec<(u32, u32)>,
            out: &mut Vec<Condition>,
        ) {
            if !cur.is_empty() {
                out.push(Condition::new(cur.iter().copied()).unwrap());
            }
            if cur.len() as u32 == k {
                return;
            }
            for (i, &p) in pigeons.iter().enumerate().skip(start) {
                for &h in holes {
                    if cur.iter().any(|&(_, h2)| h2 == h) {
                        continue;
                    }
                    cur.push((p, h));
                    gen(pigeons, holes, k, i + 1, cur, out);
                    cur.pop();
                }
            }
        }
        gen(&pigeons, &holes, k, 0, &mut Vec::new(), &mut candidates);
        candidates.sort();
        candidates.dedup();
    }

    let targets: Vec<Condition> = poset::enumerate_extensions(base, scale);

    struct Search<'a> {
        m: u32,
        candidates: &'a [Condition],
        targets: &'a [Condition],
        cells: Vec<Vec<Vec<Condition>>>,
        explored: u64,
        budget: u64,
    }

    impl Search<'_> {
        fn covered(&self, a: u32, rho: &Condition) -> bool {
            self.cells[a as usize]
                .iter()
                .any(|cell| cell.iter().any(|t| t.compatible(rho)))
        }

        fn placement_ok(&self, tau: &Condition, a: u32, b: u32) -> bool {
            // property 1: not already in this row or this column
            for b2 in 0..self.m {
                if self.cells[a as usize][b2 as usize].contains(tau) {
                    return false;
                }
            }
            for a2 in 0..2 * self.m {
                if self.cells[a2 as usize][b as usize].contains(tau) {
                    return false;
                }
            }
            // property 2: incompatible with the rest of the column
            for a2 in 0..2 * self.m {
                for t in &self.cells[a2 as usize][b as usize] {
                    if t != tau && t.compatible(tau) {
                        return false;
                    }
                }
            }
            // property 3: incompatible with the rest of the row
            for b2 in 0..self.m {
                for t in &self.cells[a as usize][b2 as usize] {
                    if t != tau && t.compatible(tau) {
                        return false;
                    }
                }
            }
            true
        }

        fn run(&mut self) -> Result<bool, WArrayError> {
            self.explored += 1;
            if self.explored > self.budget {
                return Err(WArrayError::BudgetExceeded {
                    explored: self.explored,
                    budget: self.budget,
                });
            }
            let mut goal = None;
            'find: for a in 0..2 * self.m {
                for rho in self.targets {
                    if !self.covered(a, rho) {
                        goal = Some((a, rho.clone()));
                        break 'find;
                    }
                }
            }
            let Some((a, rho)) = goal else {
                return Ok(true);
            };
            for i in 0..self.candidates.len() {
                let tau = self.candidates[i].clone();
                if !tau.compatible(&rho) {
                    continue;
                }
                for b in 0..self.m {
                    if !self.placement_ok(&tau, a, b) {
                        continue;
                    }
                    self.cells[a as usize][b as usize].push(tau.clone());
                    if self.run()? {
                        return Ok(true);
                    }
                    self.cells[a as usize][b as usize].pop();
                }
            }
            Ok(false)
        }
    }

    let mut search = Search {
        m,
        candidates: &candidates,
        targets: &targets,
        cells: alloc::vec![alloc::vec![Vec::new(); m as usize]; 2 * m as usize],
        explored: 0,
        budget,
    };
    if search.run()? {
        let array = WArray::new(m, k.max(1), base.clone(), *scale, search.cells)?;
        debug_assert!(array.verify_properties().all_ok());
        Ok(Some(array))
    } else {
        Ok(None)
    }
}
