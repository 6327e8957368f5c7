//! Deciding whether a normal network and a tree-child network on the same
//! leaf set display the same set of trees.
//!
//! The decision procedure peels one cherry or reticulated cherry per
//! iteration.  It first strips trivial shortcuts from the tree-child side
//! (they never change the display set), then repeatedly locates a cherry or
//! reticulated cherry `{a, b}` in the normal network and checks that the
//! tree-child network matches it locally:
//!
//! * plain cherry: `{a, b}` must be a cherry on the other side too, and the
//!   shared leaf `b` is removed from both networks;
//! * reticulated cherry whose counterpart parent of `b` is a reticulation:
//!   the other side must form the same reticulated cherry, neither incoming
//!   arc of `b`'s parent may be a shortcut, and the coparents must agree on
//!   visibility and cluster sets; then the cherry-side reticulation arc is
//!   removed from both networks;
//! * reticulated cherry whose counterpart parent of `b` is a tree vertex:
//!   the second network must exhibit a specific local template — `b`'s
//!   sibling is a reticulation fed by a shortcut from the grandparent's own
//!   parent, with the `{a}`-side and the coparent-side visibility/cluster
//!   pairs matching — while in the first network the parent of `a` and the
//!   coparent must be siblings.  One or two arcs are then removed from the
//!   tree-child side and the reticulation arc from the normal side.
//!
//! Every removal preserves equality of display sets in both directions, so
//! the loop's verdict transfers to the original inputs.  Each iteration
//! shrinks both networks, and a pair reduced to two leaves displays the one
//! two-leaf tree, so the loop terminates with `yes` exactly when the display
//! sets coincide.  All checks per iteration are linear in the network size,
//! giving a quadratic decision overall, in contrast to the exponential
//! enumeration oracle.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::{
    cluster_of, find_cherry, is_normal, is_shortcut, is_tree_child, visibility_set, CherryShape,
    LeafSet,
};
use crate::network::{Arc, IdMap, Network, ValidationReport, VertexId, VertexKind};

/// Why a pair of inputs cannot be processed at all.
#[derive(Debug, Error)]
pub enum EquivError {
    #[error("first network is not valid: {0}")]
    InvalidFirst(ValidationReport),
    #[error("second network is not valid: {0}")]
    InvalidSecond(ValidationReport),
    #[error("first network is not normal")]
    NotNormal,
    #[error("second network is not tree-child")]
    NotTreeChild,
    #[error("leaf sets differ: first has {first}, second has {second}")]
    LeafSetMismatch { first: LeafSet, second: LeafSet },
    #[error("need at least two leaves, got {0}")]
    TooFewLeaves(usize),
}

/// The local check that failed, ending the run with verdict `no`.
///
/// Set-valued variants carry the two sets that were compared, so a trace
/// doubles as a counterexample record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum NoMatchReason {
    /// `{a, b}` is a cherry of the first network but not of the second.
    NotCherryInSecond { a: String, b: String },
    /// `b`'s parent in the second network is a reticulation, but the parents
    /// of `a` and `b` are not joined by an arc there.
    RetCherryNotFormed { a: String, b: String },
    /// An incoming arc of `b`'s reticulation parent in the second network is
    /// a shortcut.
    RetInArcShortcut { a: String, b: String },
    /// The coparents' visibility sets disagree across the two networks.
    VisibilityMismatch { first: LeafSet, second: LeafSet },
    /// The coparents' cluster sets disagree across the two networks.
    ClusterMismatch { first: LeafSet, second: LeafSet },
    /// In the first network, `a`'s parent and the reticulation's other
    /// parent are not siblings.
    NoCommonParentInFirst { a: String, b: String },
    /// `b`'s parent in the second network is the root.
    ParentOfBIsRoot { b: String },
    /// `b`'s sibling in the second network is not a reticulation.
    SiblingNotReticulation { b: String },
    /// `b`'s grandparent in the second network is not a tree vertex.
    GrandparentNotTreeVertex { b: String },
    /// `b`'s sibling reticulation is itself the grandparent's other child.
    SiblingIsGrandparentChild { b: String },
    /// The second incoming arc of `b`'s sibling reticulation is not a
    /// shortcut.
    SiblingArcNotShortcut { b: String },
    /// The tail of the sibling's shortcut is not the parent of `b`'s
    /// grandparent.
    ShortcutTailNotAboveGrandparent { b: String },
    /// Neither the sibling nor the grandparent's other child is visible from
    /// exactly `{a}`, or the other one's visibility differs from the
    /// coparent's.
    VisibilityPairMismatch {
        expected: (LeafSet, LeafSet),
        got: (LeafSet, LeafSet),
    },
    /// The cluster sets of the sibling and the grandparent's other child do
    /// not pair up with `{a}` and the coparent's cluster minus `b`.
    ClusterPairMismatch {
        expected: (LeafSet, LeafSet),
        got: (LeafSet, LeafSet),
    },
    /// The grandparent's other child is a reticulation whose second incoming
    /// arc is not a shortcut.
    OtherChildArcNotShortcut { b: String },
    /// The two shortcut tails are not joined by an arc.
    ShortcutTailsNotAdjacent { b: String },
}

impl fmt::Display for NoMatchReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use NoMatchReason::*;
        match self {
            NotCherryInSecond { a, b } => {
                write!(f, "cherry: {{{a},{b}}} is not a cherry of the second network")
            }
            RetCherryNotFormed { a, b } => write!(
                f,
                "ret-parent: the parents of {a} and {b} in the second network are not joined by an arc"
            ),
            RetInArcShortcut { b, .. } => write!(
                f,
                "ret-parent: an incoming arc of {b}'s parent in the second network is a shortcut"
            ),
            VisibilityMismatch { first, second } => write!(
                f,
                "ret-parent: coparent visibility sets differ: {first} vs {second}"
            ),
            ClusterMismatch { first, second } => write!(
                f,
                "ret-parent: coparent cluster sets differ: {first} vs {second}"
            ),
            NoCommonParentInFirst { a, b } => write!(
                f,
                "tree-parent: in the first network, {a}'s parent and {b}'s coparent are not siblings"
            ),
            ParentOfBIsRoot { b } => write!(
                f,
                "tree-parent: {b}'s parent in the second network is the root"
            ),
            SiblingNotReticulation { b } => write!(
                f,
                "tree-parent: {b}'s sibling in the second network is not a reticulation"
            ),
            GrandparentNotTreeVertex { b } => write!(
                f,
                "tree-parent: {b}'s grandparent in the second network is not a tree vertex"
            ),
            SiblingIsGrandparentChild { b } => write!(
                f,
                "tree-parent: {b}'s sibling is also a child of {b}'s grandparent"
            ),
            SiblingArcNotShortcut { b } => write!(
                f,
                "tree-parent: the second incoming arc of {b}'s sibling is not a shortcut"
            ),
            ShortcutTailNotAboveGrandparent { b } => write!(
                f,
                "tree-parent: the sibling's shortcut tail is not the parent of {b}'s grandparent"
            ),
            VisibilityPairMismatch { expected, got } => write!(
                f,
                "tree-parent: visibility sets {},{} do not pair up with {},{}",
                got.0, got.1, expected.0, expected.1
            ),
            ClusterPairMismatch { expected, got } => write!(
                f,
                "tree-parent: cluster sets {},{} do not pair up with {},{}",
                got.0, got.1, expected.0, expected.1
            ),
            OtherChildArcNotShortcut { b } => write!(
                f,
                "tree-parent: the second incoming arc of {b}'s grandparent's other child is not a shortcut"
            ),
            ShortcutTailsNotAdjacent { b } => write!(
                f,
                "tree-parent: the two shortcut tails around {b} are not joined by an arc"
            ),
        }
    }
}

/// Outcome of matching the current cherry of the first network against the
/// second network's local structure.  Vertex ids refer to the second
/// network's current (post-reduction) numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatchResult {
    /// `{a, b}` is a cherry on both sides.
    CherryMatch,
    /// The second network forms the same reticulated cherry; arcs into
    /// `parent_b` are shortcut-free and `coparent` agrees with the first
    /// network's coparent on visibility and cluster.
    RetCherryMatch {
        parent_a: VertexId,
        parent_b: VertexId,
        coparent: VertexId,
    },
    /// The tree-vertex-parent template with the grandparent's other child a
    /// tree vertex or leaf.  `a_under_sibling` records which of the two
    /// candidate vertices carries `{a}` (true: the sibling of `b`).
    TreeParentMatchA {
        parent_b: VertexId,
        grandparent: VertexId,
        sibling: VertexId,
        other_child: VertexId,
        shortcut_tail: VertexId,
        a_under_sibling: bool,
    },
    /// Same template but the grandparent's other child is a reticulation,
    /// with its own shortcut from `other_shortcut_tail`.
    TreeParentMatchB {
        parent_b: VertexId,
        grandparent: VertexId,
        sibling: VertexId,
        other_child: VertexId,
        shortcut_tail: VertexId,
        other_shortcut_tail: VertexId,
        a_under_sibling: bool,
    },
    /// The template failed; the run ends with verdict `no`.
    NoMatch(NoMatchReason),
}

/// Which branch of the per-iteration case split applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepCase {
    /// Two leaves left: the pair displays the unique two-leaf tree.
    #[serde(rename = "stop")]
    TwoLeafStop,
    /// `{a, b}` is a plain cherry of the first network.
    #[serde(rename = "cherry")]
    Cherry,
    /// Reticulated cherry; `b`'s parent in the second network is a
    /// reticulation.
    #[serde(rename = "ret-parent")]
    RetParent,
    /// Reticulated cherry; `b`'s parent in the second network is a tree
    /// vertex (or the root, which can only fail).
    #[serde(rename = "tree-parent")]
    TreeParent,
}

impl fmt::Display for StepCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepCase::TwoLeafStop => "stop",
            StepCase::Cherry => "cherry",
            StepCase::RetParent => "ret-parent",
            StepCase::TreeParent => "tree-parent",
        };
        write!(f, "{s}")
    }
}

/// One deletion applied to a network, reported in the vertex numbering of
/// the original input (arc endpoints survive renumbering; a suppressed
/// in-between vertex does not appear).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeletionEvent {
    Leaf { label: String },
    Arc { tail: usize, head: usize },
}

impl fmt::Display for DeletionEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DeletionEvent::Leaf { label } => write!(f, "leaf({label})"),
            DeletionEvent::Arc { tail, head } => write!(f, "arc(v{tail},v{head})"),
        }
    }
}

/// One iteration of the reduction loop.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IterationRecord {
    pub index: usize,
    /// Leaves remaining at the start of the iteration.
    pub leaf_count: usize,
    /// The cherry pair `(a, b)` under consideration; absent on the final
    /// two-leaf stop.
    pub pair: Option<(String, String)>,
    pub case: StepCase,
    pub matched: bool,
    pub left_deletions: Vec<DeletionEvent>,
    pub right_deletions: Vec<DeletionEvent>,
}

impl fmt::Display for IterationRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "i={} leaves={} case={}",
            self.index, self.leaf_count, self.case
        )?;
        if let Some((a, b)) = &self.pair {
            write!(f, " pair={{{a},{b}}}")?;
        }
        write!(f, " matched={}", if self.matched { "yes" } else { "no" })?;
        if !self.left_deletions.is_empty() {
            write!(f, " left=[")?;
            for (i, d) in self.left_deletions.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{d}")?;
            }
            write!(f, "]")?;
        }
        if !self.right_deletions.is_empty() {
            write!(f, " right=[")?;
            for (i, d) in self.right_deletions.iter().enumerate() {
                if i > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{d}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Verdict plus the per-iteration log that justifies it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decision {
    pub equivalent: bool,
    /// The failed check when `equivalent` is false.
    pub reason: Option<NoMatchReason>,
    /// Trivial shortcuts stripped from the second network up front.
    pub removed_trivial_shortcuts: usize,
    pub trace: Vec<IterationRecord>,
}

/// Checks whether `{a, b}` is a cherry of `second`.
pub fn match_cherry_case(second: &Network, a: &str, b: &str) -> MatchResult {
    let no = || {
        MatchResult::NoMatch(NoMatchReason::NotCherryInSecond {
            a: a.to_string(),
            b: b.to_string(),
        })
    };
    let (Some(leaf_a), Some(leaf_b)) = (second.leaf_by_label(a), second.leaf_by_label(b)) else {
        return no();
    };
    let parent = second.parents(leaf_b)[0];
    if second.kind(parent) == VertexKind::Reticulation {
        return no();
    }
    if second.other_child(parent, leaf_b) == leaf_a {
        MatchResult::CherryMatch
    } else {
        no()
    }
}

/// Matches a reticulated cherry of `first` whose counterpart parent of `b`
/// in `second` is a reticulation: the same reticulated cherry must form in
/// `second` with shortcut-free incoming arcs, and the two coparents must
/// have equal visibility sets and equal clusters.
pub fn match_reticulation_parent_case(
    first: &Network,
    second: &Network,
    shape: &CherryShape,
) -> MatchResult {
    let CherryShape::ReticulatedCherry { a, b, coparent, .. } = shape else {
        panic!("reticulation-parent matching requires a reticulated cherry");
    };
    let leaf_a = second.leaf_by_label(a).expect("leaf sets agree");
    let leaf_b = second.leaf_by_label(b).expect("leaf sets agree");
    let parent_b = second.parents(leaf_b)[0];
    debug_assert_eq!(second.kind(parent_b), VertexKind::Reticulation);
    let parent_a = second.parents(leaf_a)[0];
    if !second.parents(parent_b).contains(&parent_a) {
        return MatchResult::NoMatch(NoMatchReason::RetCherryNotFormed {
            a: a.clone(),
            b: b.clone(),
        });
    }
    let coparent2 = second.other_parent(parent_b, parent_a);
    for tail in [parent_a, coparent2] {
        let arc = Arc::new(tail, parent_b);
        if is_shortcut(second, arc).expect("reticulation arc") {
            return MatchResult::NoMatch(NoMatchReason::RetInArcShortcut {
                a: a.clone(),
                b: b.clone(),
            });
        }
    }
    let vis_first = visibility_set(first, *coparent);
    let vis_second = visibility_set(second, coparent2);
    if vis_first != vis_second {
        return MatchResult::NoMatch(NoMatchReason::VisibilityMismatch {
            first: vis_first,
            second: vis_second,
        });
    }
    let cl_first = cluster_of(first, *coparent);
    let cl_second = cluster_of(second, coparent2);
    if cl_first != cl_second {
        return MatchResult::NoMatch(NoMatchReason::ClusterMismatch {
            first: cl_first,
            second: cl_second,
        });
    }
    MatchResult::RetCherryMatch {
        parent_a,
        parent_b,
        coparent: coparent2,
    }
}

/// Matches a reticulated cherry of `first` whose counterpart parent of `b`
/// in `second` is a tree vertex, against the shortcut template: `b`'s
/// sibling `v1` is a reticulation, the grandparent `g` is a tree vertex
/// whose other child `v2` differs from `v1`, the second arc into `v1` is a
/// shortcut from the grandparent's own parent `u1`, and `{v1, v2}` carry the
/// visibility/cluster pair `({a}, V)` / `({a}, C − b)` where `V` and `C` are
/// the coparent's sets in `first`.  If `v2` is itself a reticulation, its
/// second incoming arc must be a shortcut whose tail feeds `u1`.  On the
/// `first` side, `a`'s parent and the coparent must be siblings.
pub fn match_tree_parent_case(
    first: &Network,
    second: &Network,
    shape: &CherryShape,
) -> MatchResult {
    let CherryShape::ReticulatedCherry {
        a,
        b,
        parent_a,
        coparent,
        ..
    } = shape
    else {
        panic!("tree-parent matching requires a reticulated cherry");
    };

    // First network: the parent of `a` and the coparent must share a parent.
    let not_siblings = || {
        MatchResult::NoMatch(NoMatchReason::NoCommonParentInFirst {
            a: a.clone(),
            b: b.clone(),
        })
    };
    if first.kind(*parent_a) == VertexKind::Root {
        return not_siblings();
    }
    let common = first.parents(*parent_a)[0];
    if !first.has_arc(common, *coparent) {
        return not_siblings();
    }

    // Second network: walk the template top-down from b.
    let leaf_b = second.leaf_by_label(b).expect("leaf sets agree");
    let parent_b = second.parents(leaf_b)[0];
    match second.kind(parent_b) {
        VertexKind::Root => {
            return MatchResult::NoMatch(NoMatchReason::ParentOfBIsRoot { b: b.clone() })
        }
        VertexKind::Tree => {}
        kind => panic!("parent of a leaf cannot be {kind:?}"),
    }
    let sibling = second.other_child(parent_b, leaf_b);
    if second.kind(sibling) != VertexKind::Reticulation {
        return MatchResult::NoMatch(NoMatchReason::SiblingNotReticulation { b: b.clone() });
    }
    let grandparent = second.parents(parent_b)[0];
    if second.kind(grandparent) != VertexKind::Tree {
        return MatchResult::NoMatch(NoMatchReason::GrandparentNotTreeVertex { b: b.clone() });
    }
    let other_child = second.other_child(grandparent, parent_b);
    if other_child == sibling {
        return MatchResult::NoMatch(NoMatchReason::SiblingIsGrandparentChild { b: b.clone() });
    }
    let shortcut_tail = second.other_parent(sibling, parent_b);
    if !is_shortcut(second, Arc::new(shortcut_tail, sibling)).expect("reticulation arc") {
        return MatchResult::NoMatch(NoMatchReason::SiblingArcNotShortcut { b: b.clone() });
    }
    if !second.has_arc(shortcut_tail, grandparent) {
        return MatchResult::NoMatch(NoMatchReason::ShortcutTailNotAboveGrandparent {
            b: b.clone(),
        });
    }

    // The sibling and the other child must carry ({a}, V_coparent) as their
    // visibility sets and ({a}, C_coparent − b) as their clusters, with the
    // {a} sides aligned.
    let a_set = LeafSet::singleton(a);
    let vis_coparent = visibility_set(first, *coparent);
    let cl_coparent_less_b = cluster_of(first, *coparent).without(b);
    let vis_sibling = visibility_set(second, sibling);
    let vis_other = visibility_set(second, other_child);
    let a_under_sibling = if vis_sibling == a_set {
        true
    } else if vis_other == a_set {
        false
    } else {
        return MatchResult::NoMatch(NoMatchReason::VisibilityPairMismatch {
            expected: (a_set, vis_coparent),
            got: (vis_sibling, vis_other),
        });
    };
    let (vis_big, cl_small, cl_big) = if a_under_sibling {
        (
            vis_other.clone(),
            cluster_of(second, sibling),
            cluster_of(second, other_child),
        )
    } else {
        (
            vis_sibling.clone(),
            cluster_of(second, other_child),
            cluster_of(second, sibling),
        )
    };
    if vis_big != vis_coparent {
        return MatchResult::NoMatch(NoMatchReason::VisibilityPairMismatch {
            expected: (a_set, vis_coparent),
            got: (vis_sibling, vis_other),
        });
    }
    if cl_small != a_set || cl_big != cl_coparent_less_b {
        let got = if a_under_sibling {
            (cl_small, cl_big)
        } else {
            (cl_big, cl_small)
        };
        return MatchResult::NoMatch(NoMatchReason::ClusterPairMismatch {
            expected: (a_set, cl_coparent_less_b),
            got,
        });
    }

    match second.kind(other_child) {
        VertexKind::Tree | VertexKind::Leaf => MatchResult::TreeParentMatchA {
            parent_b,
            grandparent,
            sibling,
            other_child,
            shortcut_tail,
            a_under_sibling,
        },
        VertexKind::Reticulation => {
            let other_tail = second.other_parent(other_child, grandparent);
            if !is_shortcut(second, Arc::new(other_tail, other_child)).expect("reticulation arc") {
                return MatchResult::NoMatch(NoMatchReason::OtherChildArcNotShortcut {
                    b: b.clone(),
                });
            }
            if !second.has_arc(other_tail, shortcut_tail) {
                return MatchResult::NoMatch(NoMatchReason::ShortcutTailsNotAdjacent {
                    b: b.clone(),
                });
            }
            MatchResult::TreeParentMatchB {
                parent_b,
                grandparent,
                sibling,
                other_child,
                shortcut_tail,
                other_shortcut_tail: other_tail,
                a_under_sibling,
            }
        }
        VertexKind::Root => unreachable!("a child vertex cannot be the root"),
    }
}

/// A deletion applied during one reduction, in the coordinates the networks
/// had just before the step.
#[derive(Debug, Clone, PartialEq, Eq)]
enum LocalDeletion {
    Leaf(String),
    Arc(Arc),
}

/// Result of applying one matched reduction.
struct StepOutcome {
    left: Network,
    right: Network,
    left_map: IdMap,
    right_map: IdMap,
    left_deleted: Vec<LocalDeletion>,
    right_deleted: Vec<LocalDeletion>,
}

/// Applies the deletions dictated by a successful match.  Panics on
/// `NoMatch` — callers decide the verdict before reducing.
fn recurse_step(
    left: &Network,
    right: &Network,
    shape: &CherryShape,
    matched: &MatchResult,
) -> StepOutcome {
    match (shape, matched) {
        (CherryShape::Cherry { b, .. }, MatchResult::CherryMatch) => {
            let (l, lm) = left.delete_leaf_mapped(b).expect("cherry leaf");
            let (r, rm) = right.delete_leaf_mapped(b).expect("cherry leaf");
            StepOutcome {
                left: l,
                right: r,
                left_map: lm,
                right_map: rm,
                left_deleted: vec![LocalDeletion::Leaf(b.clone())],
                right_deleted: vec![LocalDeletion::Leaf(b.clone())],
            }
        }
        (
            CherryShape::ReticulatedCherry {
                parent_a, parent_b, ..
            },
            MatchResult::RetCherryMatch {
                parent_a: pa2,
                parent_b: pb2,
                ..
            },
        ) => {
            let left_arc = Arc::new(*parent_a, *parent_b);
            let right_arc = Arc::new(*pa2, *pb2);
            let (l, lm) = left.delete_arc_mapped(left_arc).expect("cherry-side arc");
            let (r, rm) = right.delete_arc_mapped(right_arc).expect("cherry-side arc");
            StepOutcome {
                left: l,
                right: r,
                left_map: lm,
                right_map: rm,
                left_deleted: vec![LocalDeletion::Arc(left_arc)],
                right_deleted: vec![LocalDeletion::Arc(right_arc)],
            }
        }
        (
            CherryShape::ReticulatedCherry {
                parent_a, parent_b, ..
            },
            MatchResult::TreeParentMatchA { .. } | MatchResult::TreeParentMatchB { .. },
        ) => {
            let left_arc = Arc::new(*parent_a, *parent_b);
            let (l, lm) = left.delete_arc_mapped(left_arc).expect("cherry-side arc");

            // If the {a} side is the sibling, unhook it from b's parent so a
            // migrates to the shortcut tail; otherwise cut the shortcut so a
            // stays put.  When the other child is a reticulation, its
            // shortcut goes too.
            let (first_arc, second_arc) = match *matched {
                MatchResult::TreeParentMatchA {
                    parent_b: pb2,
                    sibling,
                    shortcut_tail,
                    a_under_sibling,
                    ..
                } => {
                    let tail = if a_under_sibling { pb2 } else { shortcut_tail };
                    (Arc::new(tail, sibling), None)
                }
                MatchResult::TreeParentMatchB {
                    parent_b: pb2,
                    sibling,
                    other_child,
                    shortcut_tail,
                    other_shortcut_tail,
                    a_under_sibling,
                    ..
                } => {
                    let tail = if a_under_sibling { pb2 } else { shortcut_tail };
                    (
                        Arc::new(tail, sibling),
                        Some(Arc::new(other_shortcut_tail, other_child)),
                    )
                }
                _ => unreachable!(),
            };
            let (mut r, mut rm) = right.delete_arc_mapped(first_arc).expect("template arc");
            let mut right_deleted = vec![LocalDeletion::Arc(first_arc)];
            if let Some(arc) = second_arc {
                let mapped = rm.map_arc(arc).expect("second template arc survives");
                let (r2, m2) = r.delete_arc_mapped(mapped).expect("template arc");
                r = r2;
                rm = rm.compose(&m2);
                right_deleted.push(LocalDeletion::Arc(arc));
            }
            StepOutcome {
                left: l,
                right: r,
                left_map: lm,
                right_map: rm,
                left_deleted: vec![LocalDeletion::Arc(left_arc)],
                right_deleted,
            }
        }
        _ => panic!("recurse_step called with a non-matching shape/result pair"),
    }
}

fn to_events(deleted: &[LocalDeletion], map: &IdMap) -> Vec<DeletionEvent> {
    deleted
        .iter()
        .map(|d| match d {
            LocalDeletion::Leaf(label) => DeletionEvent::Leaf {
                label: label.clone(),
            },
            LocalDeletion::Arc(arc) => DeletionEvent::Arc {
                tail: map.to_old(arc.tail).index(),
                head: map.to_old(arc.head).index(),
            },
        })
        .collect()
}

/// Decides whether the normal network `first` and the tree-child network
/// `second` display exactly the same set of trees.
///
/// Runs in time quadratic in the leaf count.  The returned trace lists every
/// reduction; deletion events are reported in the vertex numbering of the
/// inputs (for the second network: as numbered before trivial-shortcut
/// removal).
pub fn same_display_set(first: &Network, second: &Network) -> Result<Decision, EquivError> {
    let report = first.validate();
    if !report.ok() {
        return Err(EquivError::InvalidFirst(report));
    }
    let report = second.validate();
    if !report.ok() {
        return Err(EquivError::InvalidSecond(report));
    }
    if !is_normal(first) {
        return Err(EquivError::NotNormal);
    }
    if !is_tree_child(second) {
        return Err(EquivError::NotTreeChild);
    }
    let first_labels = first.leaf_labels();
    let second_labels = second.leaf_labels();
    if first_labels != second_labels {
        return Err(EquivError::LeafSetMismatch {
            first: first_labels.into_iter().collect(),
            second: second_labels.into_iter().collect(),
        });
    }
    if first_labels.len() < 2 {
        return Err(EquivError::TooFewLeaves(first_labels.len()));
    }

    let (mut right, mut right_map) = second
        .remove_trivial_shortcuts_mapped()
        .expect("tree-child checked above");
    let removed_trivial_shortcuts = second.reticulation_count() - right.reticulation_count();
    let mut left = first.clone();
    let mut left_map = IdMap::identity(left.n_vertices());

    let mut trace = Vec::new();
    let iteration_bound = first.n_vertices() + second.n_vertices();
    loop {
        let index = trace.len();
        assert!(index <= iteration_bound, "reduction failed to make progress");
        let leaf_count = left.leaf_count();
        if leaf_count == 2 {
            trace.push(IterationRecord {
                index,
                leaf_count,
                pair: None,
                case: StepCase::TwoLeafStop,
                matched: true,
                left_deletions: vec![],
                right_deletions: vec![],
            });
            return Ok(Decision {
                equivalent: true,
                reason: None,
                removed_trivial_shortcuts,
                trace,
            });
        }

        let shape = find_cherry(&left)
            .expect("a normal network with at least three leaves yields a cherry");
        let (case, matched) = match &shape {
            CherryShape::Cherry { a, b, .. } => {
                (StepCase::Cherry, match_cherry_case(&right, a, b))
            }
            CherryShape::ReticulatedCherry { b, .. } => {
                let leaf_b = right.leaf_by_label(b).expect("leaf sets agree");
                let parent_b = right.parents(leaf_b)[0];
                if right.kind(parent_b) == VertexKind::Reticulation {
                    (
                        StepCase::RetParent,
                        match_reticulation_parent_case(&left, &right, &shape),
                    )
                } else {
                    (
                        StepCase::TreeParent,
                        match_tree_parent_case(&left, &right, &shape),
                    )
                }
            }
        };
        let pair = Some((shape.leaf_a().to_string(), shape.leaf_b().to_string()));

        if let MatchResult::NoMatch(reason) = &matched {
            trace.push(IterationRecord {
                index,
                leaf_count,
                pair,
                case,
                matched: false,
                left_deletions: vec![],
                right_deletions: vec![],
            });
            return Ok(Decision {
                equivalent: false,
                reason: Some(reason.clone()),
                removed_trivial_shortcuts,
                trace,
            });
        }

        let outcome = recurse_step(&left, &right, &shape, &matched);
        trace.push(IterationRecord {
            index,
            leaf_count,
            pair,
            case,
            matched: true,
            left_deletions: to_events(&outcome.left_deleted, &left_map),
            right_deletions: to_events(&outcome.right_deleted, &right_map),
        });
        left = outcome.left;
        right = outcome.right;
        left_map = left_map.compose(&outcome.left_map);
        right_map = right_map.compose(&outcome.right_map);

        // Linear-cost insurance only: a full shortcut-freeness recheck would
        // cost a reachability query per reticulation arc and push the loop
        // past its quadratic budget in debug builds.
        debug_assert!(left.validate().ok());
        debug_assert!(right.validate().ok());
        debug_assert!(is_tree_child(&left));
        debug_assert!(is_tree_child(&right));
        debug_assert!(right.first_trivial_shortcut().is_none());
    }
}
