//! Brute-force display-set enumeration.
//!
//! A switching keeps exactly one in-arc per reticulation. In the kept
//! subgraph every non-root vertex still has one parent, so the kept arcs
//! form a spanning tree; pruning unlabelled sinks and flattening unary
//! chains turns it into the displayed phylogenetic tree. Enumerating all
//! 2^r switchings enumerates the display set. This is the slow, obviously
//! correct reference the fast equivalence check is tested against.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::network::{Network, PhyloTree, VertexId};
use crate::newick::serialize_enewick;

/// Hard stop for the 2^r enumeration unless the caller raises it.
pub const DEFAULT_MAX_RETICULATIONS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{count} reticulations exceed the enumeration bound of {bound}")]
    TooManyReticulations { count: usize, bound: usize },
}

/// One in-arc choice per reticulation: reticulation id -> chosen parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Switching(BTreeMap<VertexId, VertexId>);

impl Switching {
    pub fn from_choices(choices: impl IntoIterator<Item = (VertexId, VertexId)>) -> Self {
        Switching(choices.into_iter().collect())
    }

    pub fn chosen_parent(&self, reticulation: VertexId) -> Option<VertexId> {
        self.0.get(&reticulation).copied()
    }

    pub fn choices(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.0.iter().map(|(&r, &p)| (r, p))
    }
}

/// All switchings of `net`, in binary-counter order over the id-sorted
/// reticulations (bit i flips reticulation i's parent choice). 2^r items.
pub fn switchings(net: &Network) -> impl Iterator<Item = Switching> + '_ {
    let rets: Vec<VertexId> = net.reticulations().collect();
    let total: u64 = 1u64
        .checked_shl(rets.len() as u32)
        .expect("enumeration bound keeps r far below 64");
    (0..total).map(move |mask| {
        Switching(
            rets.iter()
                .enumerate()
                .map(|(i, &r)| {
                    let ps = net.parents(r);
                    (r, ps[(mask >> i & 1) as usize])
                })
                .collect(),
        )
    })
}

/// The kept subgraph of a switching after pruning: keeps every arc except
/// the unchosen reticulation in-arcs, then repeatedly drops unlabelled
/// sinks. Returns the surviving arcs and a per-vertex alive mask. The
/// displayed tree is this subgraph with unary vertices flattened.
pub fn apply_switching_subgraph(net: &Network, sw: &Switching) -> (Vec<(VertexId, VertexId)>, Vec<bool>) {
    let mut arcs: BTreeSet<(VertexId, VertexId)> = net
        .arcs()
        .iter()
        .filter(|a| match sw.chosen_parent(a.head) {
            Some(p) => p == a.tail,
            None => true,
        })
        .map(|a| (a.tail, a.head))
        .collect();
    let mut alive = vec![true; net.n_vertices()];
    loop {
        let mut outdeg = vec![0usize; net.n_vertices()];
        for &(t, _) in &arcs {
            outdeg[t.index()] += 1;
        }
        let Some(dead) = net.vertices().find(|&v| {
            alive[v.index()] && outdeg[v.index()] == 0 && net.label(v).is_none()
        }) else {
            break;
        };
        alive[dead.index()] = false;
        arcs.retain(|&(t, h)| t != dead && h != dead);
    }
    (arcs.into_iter().collect(), alive)
}

/// The tree a switching displays: prune the kept subgraph, flatten unary
/// chains (including a root left with a single child). Expects a network
/// that validates.
pub fn apply_switching(net: &Network, sw: &Switching) -> PhyloTree {
    let (arcs, alive) = apply_switching_subgraph(net, sw);
    let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); net.n_vertices()];
    for (t, h) in arcs {
        children[t.index()].push(h);
    }

    // Nested rebuild: each surviving vertex contributes a node, unary
    // vertices contribute their only child's node instead.
    struct Node {
        label: Option<String>,
        children: Vec<Node>,
    }
    fn build(net: &Network, children: &[Vec<VertexId>], v: VertexId) -> Node {
        let kids: Vec<Node> = children[v.index()]
            .iter()
            .map(|&c| build(net, children, c))
            .collect();
        match (kids.len(), net.label(v)) {
            (1, None) => kids.into_iter().next().expect("one child"),
            (_, label) => Node {
                label: label.map(str::to_string),
                children: kids,
            },
        }
    }
    debug_assert!(alive[net.root().index()], "the root always survives");
    let tree = build(net, &children, net.root());

    let mut arcs: Vec<(usize, usize)> = Vec::new();
    let mut labels: Vec<(usize, String)> = Vec::new();
    let mut count = 0usize;
    fn number(
        node: &Node,
        count: &mut usize,
        arcs: &mut Vec<(usize, usize)>,
        labels: &mut Vec<(usize, String)>,
    ) -> usize {
        let id = *count;
        *count += 1;
        if let Some(l) = &node.label {
            labels.push((id, l.clone()));
        }
        for c in &node.children {
            let cid = number(c, count, arcs, labels);
            arcs.push((id, cid));
        }
        id
    }
    number(&tree, &mut count, &mut arcs, &mut labels);
    let net = Network::from_parts(count, arcs, labels)
        .expect("a pruned switching subgraph flattens to a rooted tree");
    PhyloTree::try_from(net).expect("switchings of valid networks display trees")
}

/// A displayed tree in canonical serialized form; equal strings mean equal
/// trees, and the derived order is the output order everywhere.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CanonicalTree(String);

impl CanonicalTree {
    pub fn of(tree: &PhyloTree) -> CanonicalTree {
        CanonicalTree(serialize_enewick(tree.network()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type DisplaySet = BTreeSet<CanonicalTree>;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EnumerationStats {
    pub total_switchings: u64,
    /// Switchings whose pruned subgraph did not cover the whole leaf set.
    /// Cannot happen for valid binary networks; counted as insurance.
    pub dropped: u64,
}

/// Enumerates the display set by brute force. Refuses networks with more
/// than `max_ret` reticulations (the work is 2^r trees).
pub fn enumerate_display_set(net: &Network, max_ret: usize) -> Result<DisplaySet, OracleError> {
    enumerate_display_set_with_stats(net, max_ret).map(|(set, _)| set)
}

pub fn enumerate_display_set_with_stats(
    net: &Network,
    max_ret: usize,
) -> Result<(DisplaySet, EnumerationStats), OracleError> {
    let count = net.reticulation_count();
    if count > max_ret {
        return Err(OracleError::TooManyReticulations {
            count,
            bound: max_ret,
        });
    }
    let mut set = DisplaySet::new();
    let mut stats = EnumerationStats::default();
    for sw in switchings(net) {
        stats.total_switchings += 1;
        let tree = apply_switching(net, &sw);
        if tree.network().leaf_count() == net.leaf_count() {
            set.insert(CanonicalTree::of(&tree));
        } else {
            stats.dropped += 1;
        }
    }
    Ok((set, stats))
}

/// Does `net` display `tree`? Brute force via full enumeration.
pub fn displays(net: &Network, tree: &PhyloTree, max_ret: usize) -> Result<bool, OracleError> {
    Ok(enumerate_display_set(net, max_ret)?.contains(&CanonicalTree::of(tree)))
}

/// Do two networks display exactly the same trees? Brute force on both
/// sides; the reference implementation for the fast equivalence check.
pub fn display_sets_equal_bruteforce(
    left: &Network,
    right: &Network,
    max_ret: usize,
) -> Result<bool, OracleError> {
    Ok(enumerate_display_set(left, max_ret)? == enumerate_display_set(right, max_ret)?)
}
