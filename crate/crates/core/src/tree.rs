//! Decision trees over partial matchings.
//!
//! A tree node either queries a pigeon ("which hole does `a` get?") and
//! branches over every hole still free, or queries a hole ("which pigeon
//! lands in `b`?") and branches over every free pigeon. Edges carry the
//! resulting pair, so every root-to-node path is a partial injective map
//! disjoint from the base condition. Leaves may carry an accept/reject mark;
//! the operations here ignore marks, the compiler consumes them.
//!
//! Base conditions are only range-checked: grafting grows paths well past
//! the poset size cap by design, the cap matters only when a leaf family is
//! compared against `P(n, K)` (see [`check_covering`]).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_bigint::BigUint;

use crate::combin;
use crate::poset::{Condition, PosetError, Scale};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Leaf {
        mark: Option<bool>,
    },
    /// Branches over every free hole; the map key is the hole received.
    Pigeon {
        pigeon: u32,
        children: BTreeMap<u32, Node>,
    },
    /// Branches over every free pigeon; the map key is the pigeon assigned.
    Hole {
        hole: u32,
        children: BTreeMap<u32, Node>,
    },
}

impl Node {
    pub fn leaf() -> Node {
        Node::Leaf { mark: None }
    }

    pub fn marked(mark: bool) -> Node {
        Node::Leaf { mark: Some(mark) }
    }
}

/// A decision tree rooted at a base condition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhpTree {
    scale: Scale,
    base: Condition,
    root: Node,
}

/// The labels of all leaves of some tree, together with the base they hang
/// under. Labels exclude the base and are kept in canonical order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LeafFamily {
    base: Condition,
    leaves: Vec<Condition>,
}

impl LeafFamily {
    pub fn new(base: Condition, mut leaves: Vec<Condition>) -> Self {
        leaves.sort();
        leaves.dedup();
        LeafFamily { base, leaves }
    }

    pub fn base(&self) -> &Condition {
        &self.base
    }

    pub fn leaves(&self) -> &[Condition] {
        &self.leaves
    }

    pub fn len(&self) -> usize {
        self.leaves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaves.is_empty()
    }

    /// Pairwise raw incompatibility of the labels.
    pub fn is_antichain(&self) -> bool {
        for (i, a) in self.leaves.iter().enumerate() {
            for b in self.leaves.iter().skip(i + 1) {
                if a.compatible(b) {
                    return false;
                }
            }
        }
        true
    }

    /// Every member disjoint from and raw-compatible with the base.
    pub fn respects_base(&self) -> bool {
        self.leaves
            .iter()
            .all(|l| l.is_disjoint(&self.base) && l.compatible(&self.base))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeError {
    Regime {
        need: u32,
        have: u32,
    },
    /// The target condition is not compatible with the base.
    IncompatibleTarget,
    AmbientMismatch,
    /// An attachment is not rooted at base ∪ leaf label.
    AttachmentBase {
        leaf: Condition,
    },
    MissingAttachment {
        leaf: Condition,
    },
    /// Requested uniform depth is below an existing leaf.
    TargetDepthTooSmall {
        depth: u32,
        requested: u32,
    },
    InvalidStructure(String),
    Poset(PosetError),
}

impl From<PosetError> for TreeError {
    fn from(e: PosetError) -> Self {
        TreeError::Poset(e)
    }
}

impl fmt::Display for TreeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeError::Regime { need, have } => {
                write!(f, "out of regime: construction needs {} <= n = {}", need, have)
            }
            TreeError::IncompatibleTarget => write!(f, "target incompatible with base"),
            TreeError::AmbientMismatch => write!(f, "trees live at different scales"),
            TreeError::AttachmentBase { leaf } => {
                write!(f, "attachment for leaf {} not rooted at base + leaf", leaf)
            }
            TreeError::MissingAttachment { leaf } => {
                write!(f, "no attachment for leaf {}", leaf)
            }
            TreeError::TargetDepthTooSmall { depth, requested } => write!(
                f,
                "tree already has a leaf at depth {} > requested {}",
                depth, requested
            ),
            TreeError::InvalidStructure(why) => write!(f, "invalid tree: {}", why),
            TreeError::Poset(e) => write!(f, "{}", e),
        }
    }
}

#[cfg(any(feature = "std", test))]
impl std::error::Error for TreeError {}

fn free_holes(ctx: &Condition, s: &Scale) -> Vec<u32> {
    (0..s.n()).filter(|&h| !ctx.uses_hole(h)).collect()
}

fn free_pigeons(ctx: &Condition, s: &Scale) -> Vec<u32> {
    (0..s.pigeons()).filter(|&p| !ctx.uses_pigeon(p)).collect()
}

fn extend_ctx(ctx: &Condition, pigeon: u32, hole: u32) -> Condition {
    ctx.union(&Condition::single(pigeon, hole))
        .expect("branch pair chosen among free pigeons/holes")
}

impl PhpTree {
    /// The root-only tree: one unmarked leaf.
    pub fn root_only(base: Condition, scale: Scale) -> Result<Self, TreeError> {
        base.validate_range(&scale)?;
        Ok(PhpTree {
            scale,
            base,
            root: Node::leaf(),
        })
    }

    /// Assembles a tree from a prebuilt node, validating every invariant.
    pub fn from_parts(base: Condition, scale: Scale, root: Node) -> Result<Self, TreeError> {
        base.validate_range(&scale)?;
        let t = PhpTree { scale, base, root };
        t.validate()?;
        Ok(t)
    }

    pub fn scale(&self) -> &Scale {
        &self.scale
    }

    pub fn base(&self) -> &Condition {
        &self.base
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Walks the whole tree checking the branching invariants: queried
    /// pigeons/holes are fresh, and every query branches over exactly the
    /// free holes (resp. pigeons).
    pub fn validate(&self) -> Result<(), TreeError> {
        fn walk(node: &Node, ctx: &Condition, s: &Scale) -> Result<(), TreeError> {
            match node {
                Node::Leaf { .. } => Ok(()),
                Node::Pigeon { pigeon, children } => {
                    if *pigeon >= s.pigeons() || ctx.uses_pigeon(*pigeon) {
                        return Err(TreeError::InvalidStructure(alloc::format!(
                            "pigeon {} queried but not free",
                            pigeon
                        )));
                    }
                    let expect: BTreeSet<u32> = free_holes(ctx, s).into_iter().collect();
                    let got: BTreeSet<u32> = children.keys().copied().collect();
                    if expect != got {
                        return Err(TreeError::InvalidStructure(alloc::format!(
                            "pigeon {} must branch over all free holes",
                            pigeon
                        )));
                    }
                    for (&h, child) in children {
                        walk(child, &extend_ctx(ctx, *pigeon, h), s)?;
                    }
                    Ok(())
                }
                Node::Hole { hole, children } => {
                    if *hole >= s.n() || ctx.uses_hole(*hole) {
                        return Err(TreeError::InvalidStructure(alloc::format!(
                            "hole {} queried but not free",
                            hole
                        )));
                    }
                    let expect: BTreeSet<u32> = free_pigeons(ctx, s).into_iter().collect();
                    let got: BTreeSet<u32> = children.keys().copied().collect();
                    if expect != got {
                        return Err(TreeError::InvalidStructure(alloc::format!(
                            "hole {} must branch over all free pigeons",
                            hole
                        )));
                    }
                    for (&p, child) in children {
                        walk(child, &extend_ctx(ctx, p, *hole), s)?;
                    }
                    Ok(())
                }
            }
        }
        walk(&self.root, &self.base, &self.scale)
    }

    /// Path labels of all leaves (excluding the base).
    pub fn leaves(&self) -> LeafFamily {
        let mut out = Vec::new();
        self.walk_leaves(|label, _| out.push(label.clone()));
        LeafFamily::new(self.base.clone(), out)
    }

    /// Visits every leaf with its label (path pairs, base excluded) and mark.
    pub fn walk_leaves(&self, mut visit: impl FnMut(&Condition, Option<bool>)) {
        fn rec(
            node: &Node,
            path: &mut Vec<(u32, u32)>,
            visit: &mut impl FnMut(&Condition, Option<bool>),
        ) {
            match node {
                Node::Leaf { mark } => {
                    let label = Condition::new(path.iter().copied())
                        .expect("paths are injective by construction");
                    visit(&label, *mark);
                }
                Node::Pigeon { pigeon, children } => {
                    for (&h, child) in children {
                        path.push((*pigeon, h));
                        rec(child, path, visit);
                        path.pop();
                    }
                }
                Node::Hole { hole, children } => {
                    for (&p, child) in children {
                        path.push((p, *hole));
                        rec(child, path, visit);
                        path.pop();
                    }
                }
            }
        }
        let mut path = Vec::new();
        rec(&self.root, &mut path, &mut visit);
    }

    /// Length of the longest root-to-leaf path.
    pub fn depth(&self) -> u32 {
        let mut d = 0;
        self.walk_leaves(|label, _| d = d.max(label.len() as u32));
        d
    }

    /// True when every maximal path has length exactly `k`.
    pub fn is_uniform(&self, k: u32) -> bool {
        let mut ok = true;
        self.walk_leaves(|label, _| ok &= label.len() as u32 == k);
        ok
    }

    /// The canonical minimal-leaf uniform tree: queries the `k` smallest
    /// free pigeons in ascending order, branching over free holes.
    pub fn pigeon_chain(base: Condition, k: u32, scale: Scale) -> Result<Self, TreeError> {
        base.validate_range(&scale)?;
        if k + base.len() as u32 > scale.n() {
            return Err(TreeError::Regime {
                need: k + base.len() as u32,
                have: scale.n(),
            });
        }
        let pigeons: Vec<u32> = free_pigeons(&base, &scale).into_iter().take(k as usize).collect();
        fn build(level: usize, pigeons: &[u32], ctx: &Condition, s: &Scale) -> Node {
            if level == pigeons.len() {
                return Node::leaf();
            }
            let pigeon = pigeons[level];
            let children = free_holes(ctx, s)
                .into_iter()
                .map(|h| (h, build(level + 1, pigeons, &extend_ctx(ctx, pigeon, h), s)))
                .collect();
            Node::Pigeon { pigeon, children }
        }
        let root = build(0, &pigeons, &base, &scale);
        Ok(PhpTree { scale, base, root })
    }

    /// Builds a tree deciding every pair of `target \ base`: each leaf label,
    /// together with the base, either contains the pair `(a, b)` or contains
    /// both `(a, b')` and `(a', b)` with `a' != a`, `b' != b`.
    ///
    /// Pairs are processed in ascending pigeon order: query pigeon `a`; on
    /// the correct branch move on, on a wrong branch additionally query hole
    /// `b`. Pairs already decided by the path (earlier queries can settle
    /// later pairs) are skipped, which keeps every query legal.
    pub fn decide_condition_tree(
        base: Condition,
        target: &Condition,
        scale: Scale,
    ) -> Result<Self, TreeError> {
        base.validate_range(&scale)?;
        target.validate_range(&scale)?;
        if !base.compatible(target) {
            return Err(TreeError::IncompatibleTarget);
        }
        let pairs = target.difference(&base);
        let need = 2 * pairs.len() as u32 + base.len() as u32;
        if need > scale.n() {
            return Err(TreeError::Regime {
                need,
                have: scale.n(),
            });
        }

        fn hole_query_then(
            b: u32,
            idx: usize,
            pairs: &[(u32, u32)],
            ctx: &Condition,
            s: &Scale,
        ) -> Node {
            let children = free_pigeons(ctx, s)
                .into_iter()
                .map(|p| (p, build(idx + 1, pairs, &extend_ctx(ctx, p, b), s)))
                .collect();
            Node::Hole { hole: b, children }
        }

        fn build(idx: usize, pairs: &[(u32, u32)], ctx: &Condition, s: &Scale) -> Node {
            if idx == pairs.len() {
                return Node::leaf();
            }
            let (a, b) = pairs[idx];
            if ctx.contains_pair(a, b) {
                return build(idx + 1, pairs, ctx, s);
            }
            let pigeon_taken = ctx.uses_pigeon(a);
            let hole_taken = ctx.uses_hole(b);
            match (pigeon_taken, hole_taken) {
                // (a,b') and (a',b) both present already
                (true, true) => build(idx + 1, pairs, ctx, s),
                // (a,b') present, b still free: fetch some (a',b)
                (true, false) => hole_query_then(b, idx, pairs, ctx, s),
                // (a',b) present: any branch (a,b') completes the pair
                (false, true) => {
                    let children = free_holes(ctx, s)
                        .into_iter()
                        .map(|h| (h, build(idx + 1, pairs, &extend_ctx(ctx, a, h), s)))
                        .collect();
                    Node::Pigeon { pigeon: a, children }
                }
                (false, false) => {
                    let children = free_holes(ctx, s)
                        .into_iter()
                        .map(|h| {
                            let ctx2 = extend_ctx(ctx, a, h);
                            let child = if h == b {
                                build(idx + 1, pairs, &ctx2, s)
                            } else {
                                hole_query_then(b, idx, pairs, &ctx2, s)
                            };
                            (h, child)
                        })
                        .collect();
                    Node::Pigeon { pigeon: a, children }
                }
            }
        }

        let root = build(0, pairs.pairs(), &base, &scale);
        Ok(PhpTree {
            scale,
            base,
            root,
        })
    }

    /// Structural check of the deciding property against `target`.
    pub fn decides(&self, target: &Condition) -> bool {
        let pairs = target.difference(&self.base);
        let mut ok = true;
        self.walk_leaves(|label, _| {
            for &(a, b) in pairs.pairs() {
                let direct = label.contains_pair(a, b);
                let split = label.hole_for(a).map(|h| h != b).unwrap_or(false)
                    && label.pigeon_for(b).map(|p| p != a).unwrap_or(false);
                if !(direct || split) {
                    ok = false;
                }
            }
        });
        ok
    }

    /// Appends `attachments[label]` at each leaf. Every attachment must live
    /// at the same scale and be rooted at base ∪ label, exactly the context
    /// in which it is inserted, so the composite branches remain exhaustive.
    pub fn graft(&self, attachments: &BTreeMap<Condition, PhpTree>) -> Result<Self, TreeError> {
        // check all leaves up front so errors do not depend on walk order
        let mut err = None;
        self.walk_leaves(|label, _| {
            if err.is_some() {
                return;
            }
            match attachments.get(label) {
                None => {
                    err = Some(TreeError::MissingAttachment {
                        leaf: label.clone(),
                    })
                }
                Some(t) => {
                    if t.scale != self.scale {
                        err = Some(TreeError::AmbientMismatch);
                    } else {
                        let expected = self.base.union(label);
                        if expected.as_ref() != Some(&t.base) {
                            err = Some(TreeError::AttachmentBase {
                                leaf: label.clone(),
                            });
                        }
                    }
                }
            }
        });
        if let Some(e) = err {
            return Err(e);
        }

        fn rebuild(
            node: &Node,
            path: &mut Vec<(u32, u32)>,
            attachments: &BTreeMap<Condition, PhpTree>,
        ) -> Node {
            match node {
                Node::Leaf { .. } => {
                    let label = Condition::new(path.iter().copied()).unwrap();
                    attachments[&label].root.clone()
                }
                Node::Pigeon { pigeon, children } => Node::Pigeon {
                    pigeon: *pigeon,
                    children: children
                        .iter()
                        .map(|(&h, c)| {
                            path.push((*pigeon, h));
                            let r = rebuild(c, path, attachments);
                            path.pop();
                            (h, r)
                        })
                        .collect(),
                },
                Node::Hole { hole, children } => Node::Hole {
                    hole: *hole,
                    children: children
                        .iter()
                        .map(|(&p, c)| {
                            path.push((p, *hole));
                            let r = rebuild(c, path, attachments);
                            path.pop();
                            (p, r)
                        })
                        .collect(),
                },
            }
        }
        let mut path = Vec::new();
        let root = rebuild(&self.root, &mut path, attachments);
        Ok(PhpTree {
            scale: self.scale,
            base: self.base.clone(),
            root,
        })
    }

    /// Extends to a `k'`-uniform tree by grafting a pigeon chain of the
    /// missing depth under every leaf.
    pub fn extend_uniform(&self, k_prime: u32) -> Result<Self, TreeError> {
        if k_prime + self.base.len() as u32 > self.scale.n() {
            return Err(TreeError::Regime {
                need: k_prime + self.base.len() as u32,
                have: self.scale.n(),
            });
        }
        let depth = self.depth();
        if depth > k_prime {
            return Err(TreeError::TargetDepthTooSmall {
                depth,
                requested: k_prime,
            });
        }
        let mut attachments = BTreeMap::new();
        let mut failed = None;
        self.walk_leaves(|label, _| {
            if failed.is_some() || attachments.contains_key(label) {
                return;
            }
            let sub_base = self.base.union(label).expect("leaf paths extend the base");
            match PhpTree::pigeon_chain(sub_base, k_prime - label.len() as u32, self.scale) {
                Ok(t) => {
                    attachments.insert(label.clone(), t);
                }
                Err(e) => failed = Some(e),
            }
        });
        if let Some(e) = failed {
            return Err(e);
        }
        self.graft(&attachments)
    }
}

/// Exact minimum leaf count of a `k`-uniform tree over a base of size `s`:
/// the falling factorial `(n-s)!/(n-s-k)!`.
pub fn min_leaf_count(n: u32, base_size: u32, k: u32) -> Result<BigUint, TreeError> {
    if base_size > n || k > n - base_size {
        return Err(TreeError::Regime {
            need: k + base_size,
            have: n,
        });
    }
    Ok(combin::falling_factorial((n - base_size) as u64, k as u64))
}

/// Exhaustive covering check: every condition extending the family's base
/// inside `P(n, K)` is raw-compatible with some member.
pub fn check_covering(f: &LeafFamily, s: &Scale) -> bool {
    crate::poset::enumerate_extensions(f.base(), s)
        .iter()
        .all(|rho| f.leaves().iter().any(|leaf| leaf.compatible(rho)))
}
