//! Exact counts and extremal families of matchings in complete bipartite
//! graphs.
//!
//! A `k`-matching of `K_{d,c}` is a set of `k` edges injective on both
//! sides; the [`Condition`] type carries them (left part playing pigeons).
//! Two matchings are incompatible when their union is not a matching; a
//! shared identical edge keeps them compatible. The headline bound: any
//! pairwise-incompatible family of `k`-matchings has at most `d!/(d-k)!`
//! members, and fixing the set of right endpoints achieves it.

use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::combin;
use crate::poset::Condition;

/// A family of `k`-matchings of `K_{d,c}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingFamily {
    pub d: u32,
    pub c: u32,
    pub k: u32,
    pub members: Vec<Condition>,
}

impl MatchingFamily {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// No union of two distinct members is a matching.
    pub fn is_pairwise_incompatible(&self) -> bool {
        for (i, a) in self.members.iter().enumerate() {
            for b in self.members.iter().skip(i + 1) {
                if a.compatible(b) {
                    return false;
                }
            }
        }
        true
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MatchingError {
    Domain { msg: &'static str },
    BudgetExceeded { explored: u64, budget: u64 },
}

impl fmt::Display for MatchingError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatchingError::Domain { msg } => write!(f, "domain error: {}", msg),
            MatchingError::BudgetExceeded { explored, budget } => {
                write!(f, "search explored {} nodes, budget {}", explored, budget)
            }
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for MatchingError {}

/// Number of `k`-matchings of `K_{d,c}`: `k! C(d,k) C(c,k)`.
pub fn count_k_matchings(d: u32, c: u32, k: u32) -> Result<BigUint, MatchingError> {
    if k > d.min(c) {
        return Err(MatchingError::Domain {
            msg: "need k <= min(c, d)",
        });
    }
    Ok(combin::factorial(k as u64)
        * combin::binomial(d as u64, k as u64)
        * combin::binomial(c as u64, k as u64))
}

/// Number of `c`-matchings of `K_{d,c}` extending a fixed `k`-matching:
/// `(c-k)! C(d-k, c-k)`.
pub fn count_extensions(d: u32, c: u32, k: u32) -> Result<BigUint, MatchingError> {
    if !(k <= c && c <= d) {
        return Err(MatchingError::Domain {
            msg: "need k <= c <= d",
        });
    }
    Ok(combin::factorial((c - k) as u64) * combin::binomial((d - k) as u64, (c - k) as u64))
}

/// The extremal bound `d!/(d-k)!` on pairwise-incompatible `k`-matching
/// families. Equals `count_k_matchings(d,c,k) / count_extensions(d,c,k)`
/// scaled by the full-matching count, for every `c` in range.
pub fn family_bound(d: u32, k: u32) -> Result<BigUint, MatchingError> {
    if k > d {
        return Err(MatchingError::Domain { msg: "need k <= d" });
    }
    Ok(combin::falling_factorial(d as u64, k as u64))
}

/// Every `k`-matching of `K_{d,c}` in canonical order.
pub fn enumerate_k_matchings(d: u32, c: u32, k: u32) -> Vec<Condition> {
    let mut out = Vec::new();
    // choose left endpoints ascending, assign right endpoints injectively
    fn assign(
        lefts: &[u32],
        idx: usize,
        c: u32,
        used: &mut Vec<u32>,
        cur: &mut Vec<(u32, u32)>,
        out: &mut Vec<Condition>,
    ) {
        if idx == lefts.len() {
            out.push(Condition::new(cur.iter().copied()).unwrap());
            return;
        }
        for r in 0..c {
            if used.contains(&r) {
                continue;
            }
            used.push(r);
            cur.push((lefts[idx], r));
            assign(lefts, idx + 1, c, used, cur, out);
            cur.pop();
            used.pop();
        }
    }
    if k > d.min(c) {
        return out;
    }
    for lefts in combin::subsets(d, k) {
        assign(&lefts, 0, c, &mut Vec::new(), &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

/// All `k`-matchings whose right endpoints are exactly `{0..k-1}`: the
/// tightness witness for [`family_bound`], of size `d!/(d-k)!`.
pub fn fixed_holes_family(d: u32, k: u32) -> Result<MatchingFamily, MatchingError> {
    if k > d {
        return Err(MatchingError::Domain { msg: "need k <= d" });
    }
    let mut members = Vec::new();
    fn rec(d: u32, k: u32, hole: u32, cur: &mut Vec<(u32, u32)>, out: &mut Vec<Condition>) {
        if hole == k {
            out.push(Condition::new(cur.iter().copied()).unwrap());
            return;
        }
        for p in 0..d {
            if cur.iter().any(|&(q, _)| q == p) {
                continue;
            }
            cur.push((p, hole));
            rec(d, k, hole + 1, cur, out);
            cur.pop();
        }
    }
    rec(d, k, 0, &mut Vec::new(), &mut members);
    members.sort();
    Ok(MatchingFamily { d, c: k, k, members })
}

/// Exact maximum pairwise-incompatible family of `k`-matchings of `K_{d,c}`,
/// with a witness, by exhaustive branch and bound.
///
/// A family is an independent set of the compatibility graph on all
/// `k`-matchings; that graph splits into connected components, and the
/// maximum is the sum of per-component maxima. Each component is solved by
/// include/exclude search with the remaining-vertex bound.
pub fn brute_force_max_family(
    d: u32,
    c: u32,
    k: u32,
    budget: u64,
) -> Result<MatchingFamily, MatchingError> {
    if !(k <= c && c <= d) {
        return Err(MatchingError::Domain {
            msg: "need k <= c <= d",
        });
    }
    let all = enumerate_k_matchings(d, c, k);
    let n = all.len();
    let mut compat = alloc::vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if all[i].compatible(&all[j]) {
                compat[i].push(j);
                compat[j].push(i);
            }
        }
    }

    // connected components of the compatibility graph
    let mut comp_of = alloc::vec![usize::MAX; n];
    let mut components: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if comp_of[start] != usize::MAX {
            continue;
        }
        let id = components.len();
        let mut stack = alloc::vec![start];
        let mut members = Vec::new();
        comp_of[start] = id;
        while let Some(v) = stack.pop() {
            members.push(v);
            for &w in &compat[v] {
                if comp_of[w] == usize::MAX {
                    comp_of[w] = id;
                    stack.push(w);
                }
            }
        }
        members.sort_unstable();
        components.push(members);
    }

    struct Search<'a> {
        compat: &'a [Vec<usize>],
        explored: u64,
        budget: u64,
    }
    impl Search<'_> {
        // maximum independent set within `verts`, chosen greedily-first then
        // exhaustively; `chosen` holds the current partial set
        fn mis(
            &mut self,
            verts: &[usize],
            idx: usize,
            chosen: &mut Vec<usize>,
            best: &mut Vec<usize>,
        ) -> Result<(), MatchingError> {
            self.explored += 1;
            if self.explored > self.budget {
                return Err(MatchingError::BudgetExceeded {
                    explored: self.explored,
                    budget: self.budget,
                });
            }
            if chosen.len() + (verts.len() - idx) <= best.len() {
                return Ok(());
            }
            if idx == verts.len() {
                if chosen.len() > best.len() {
                    *best = chosen.clone();
                }
                return Ok(());
            }
            let v = verts[idx];
            let clash = chosen.iter().any(|&u| self.compat[v].contains(&u));
            if !clash {
                chosen.push(v);
                self.mis(verts, idx + 1, chosen, best)?;
                chosen.pop();
            }
            self.mis(verts, idx + 1, chosen, best)
        }
    }

    let mut search = Search {
        compat: &compat,
        explored: 0,
        budget,
    };
    let mut picked: Vec<usize> = Vec::new();
    for comp in &components {
        let mut best = Vec::new();
        search.mis(comp, 0, &mut Vec::new(), &mut best)?;
        picked.extend(best);
    }
    picked.sort_unstable();
    let members: Vec<Condition> = picked.into_iter().map(|i| all[i].clone()).collect();
    let family = MatchingFamily { d, c, k, members };
    debug_assert!(family.is_pairwise_incompatible());
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn counting_examples() {
        assert_eq!(count_k_matchings(3, 2, 1).unwrap(), BigUint::from(6u32));
        assert_eq!(count_k_matchings(2, 2, 2).unwrap(), BigUint::from(2u32));
        assert_eq!(count_k_matchings(7, 4, 0).unwrap(), BigUint::from(1u32));
        assert!(count_k_matchings(2, 2, 3).is_err());

        assert_eq!(count_extensions(3, 2, 1).unwrap(), BigUint::from(2u32));
        assert_eq!(count_extensions(5, 3, 3).unwrap(), BigUint::from(1u32));
        assert_eq!(count_extensions(4, 2, 0).unwrap(), BigUint::from(12u32));
        assert!(count_extensions(3, 4, 1).is_err());

        assert_eq!(family_bound(3, 1).unwrap(), BigUint::from(3u32));
        assert_eq!(family_bound(3, 2).unwrap(), BigUint::from(6u32));
        assert_eq!(family_bound(9, 0).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn enumeration_matches_count() {
        for d in 0..=5u32 {
            for c in 0..=5u32 {
                for k in 0..=d.min(c) {
                    let listed = enumerate_k_matchings(d, c, k);
                    let counted = count_k_matchings(d, c, k).unwrap();
                    assert_eq!(BigUint::from(listed.len()), counted, "d={} c={} k={}", d, c, k);
                    let mut dedup = listed.clone();
                    dedup.dedup();
                    assert_eq!(dedup.len(), listed.len());
                }
            }
        }
    }

    #[test]
    fn extension_count_matches_enumeration() {
        for d in 1..=5u32 {
            for c in 1..=d {
                for k in 0..=c {
                    let full = enumerate_k_matchings(d, c, c);
                    for m in enumerate_k_matchings(d, c, k).iter().take(5) {
                        let ext = full.iter().filter(|f| f.extends(m)).count();
                        assert_eq!(
                            BigUint::from(ext),
                            count_extensions(d, c, k).unwrap(),
                            "d={} c={} k={}",
                            d,
                            c,
                            k
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn displayed_identity_is_exact() {
        for d in 0..=6u32 {
            for c in 0..=d {
                for k in 0..=c {
                    let lhs = combin::factorial(c as u64)
                        * combin::binomial(d as u64, c as u64);
                    let per = count_extensions(d, c, k).unwrap();
                    let bound = family_bound(d, k).unwrap();
                    assert_eq!(lhs, per.clone() * bound.clone(), "d={} c={} k={}", d, c, k);
                }
            }
        }
    }

    #[test]
    fn fixed_holes_examples() {
        let f = fixed_holes_family(3, 1).unwrap();
        assert_eq!(f.len(), 3);
        assert!(f.is_pairwise_incompatible());

        let f = fixed_holes_family(3, 2).unwrap();
        assert_eq!(f.len(), 6);
        assert!(f.is_pairwise_incompatible());

        let f = fixed_holes_family(4, 0).unwrap();
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn fixed_holes_achieves_bound() {
        for d in 0..=4u32 {
            for k in 0..=d {
                let f = fixed_holes_family(d, k).unwrap();
                assert_eq!(
                    BigUint::from(f.len()),
                    family_bound(d, k).unwrap(),
                    "d={} k={}",
                    d,
                    k
                );
                assert!(f.is_pairwise_incompatible());
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_max_family(3, 2, 1, 1 << 22).unwrap().len(), 3);
        assert_eq!(brute_force_max_family(2, 2, 2, 1 << 22).unwrap().len(), 2);
        assert_eq!(brute_force_max_family(3, 2, 2, 1 << 22).unwrap().len(), 6);
    }

    #[test]
    fn brute_force_respects_budget() {
        assert!(matches!(
            brute_force_max_family(4, 4, 2, 3),
            Err(MatchingError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn brute_force_never_beats_bound_and_is_tight() {
        for d in 1..=4u32 {
            for c in 1..=d {
                for k in 1..=c {
                    let max = brute_force_max_family(d, c, k, 1 << 26).unwrap();
                    let bound = family_bound(d, k).unwrap().to_u64().unwrap();
                    assert!(max.len() as u64 <= bound, "d={} c={} k={}", d, c, k);
                    assert_eq!(max.len() as u64, bound, "bound tight at d={} c={} k={}", d, c, k);
                }
            }
        }
    }
}
