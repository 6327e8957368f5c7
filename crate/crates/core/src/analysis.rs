//! Structural queries on networks: clusters, visibility, shortcuts, the
//! tree-child and normal properties, and cherry detection.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use fixedbitset::FixedBitSet;
use serde::Serialize;
use thiserror::Error;

use crate::network::{Arc, Network, NetworkError, VertexId, VertexKind};

/// A set of leaf labels, ordered for stable display and comparison.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct LeafSet(BTreeSet<String>);

impl LeafSet {
    pub fn new() -> Self {
        LeafSet::default()
    }

    pub fn singleton(label: &str) -> Self {
        LeafSet(BTreeSet::from([label.to_string()]))
    }

    pub fn insert(&mut self, label: &str) {
        self.0.insert(label.to_string());
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.contains(label)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|s| s.as_str())
    }

    pub fn is_subset(&self, other: &LeafSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn without(&self, label: &str) -> LeafSet {
        let mut out = self.clone();
        out.0.remove(label);
        out
    }

    pub fn union(&self, other: &LeafSet) -> LeafSet {
        LeafSet(self.0.union(&other.0).cloned().collect())
    }
}

impl FromIterator<String> for LeafSet {
    fn from_iter<T: IntoIterator<Item = String>>(iter: T) -> Self {
        LeafSet(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<&'a str> for LeafSet {
    fn from_iter<T: IntoIterator<Item = &'a str>>(iter: T) -> Self {
        LeafSet(iter.into_iter().map(str::to_string).collect())
    }
}

impl fmt::Display for LeafSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, l) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "}}")
    }
}

/// Per-vertex clusters as bitsets over the sorted leaf-label alphabet.
/// Computed once per network in reverse topological order.
#[derive(Debug, Clone)]
pub struct ClusterMap {
    labels: Vec<String>,
    bits: Vec<FixedBitSet>,
}

impl ClusterMap {
    pub fn compute(net: &Network) -> ClusterMap {
        let labels: Vec<String> = net
            .leaf_labels()
            .into_iter()
            .map(str::to_string)
            .collect();
        let rank: BTreeMap<&str, usize> = labels
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();
        let mut bits = vec![FixedBitSet::with_capacity(labels.len()); net.n_vertices()];
        let order = net.topo_order();
        for &v in order.iter().rev() {
            if let Some(label) = net.label(v) {
                bits[v.index()].insert(rank[label]);
            } else {
                let mut b = FixedBitSet::with_capacity(labels.len());
                for &c in net.children(v) {
                    b.union_with(&bits[c.index()]);
                }
                bits[v.index()] = b;
            }
        }
        ClusterMap { labels, bits }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leaf_set(&self, v: VertexId) -> LeafSet {
        self.bits[v.index()]
            .ones()
            .map(|i| self.labels[i].as_str())
            .collect()
    }

    pub fn bits(&self, v: VertexId) -> &FixedBitSet {
        &self.bits[v.index()]
    }

    pub fn eq_clusters(&self, u: VertexId, v: VertexId) -> bool {
        self.bits[u.index()] == self.bits[v.index()]
    }

    /// Orders two clusters by their sorted label sequences, shortest-prefix
    /// first; the total order used to normalize serialization.
    pub fn cmp_clusters(&self, u: VertexId, v: VertexId) -> Ordering {
        let mut a = self.bits[u.index()].ones();
        let mut b = self.bits[v.index()].ones();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }
}

/// Vertices reachable from `start` by directed paths, optionally pretending
/// `skip` (and its incident arcs) is absent.
fn reach_mask(net: &Network, start: &[VertexId], skip: Option<VertexId>) -> Vec<bool> {
    let mut seen = vec![false; net.n_vertices()];
    let mut stack: Vec<VertexId> = start
        .iter()
        .copied()
        .filter(|&v| Some(v) != skip)
        .collect();
    for &v in &stack {
        seen[v.index()] = true;
    }
    while let Some(v) = stack.pop() {
        for &c in net.children(v) {
            if Some(c) != skip && !seen[c.index()] {
                seen[c.index()] = true;
                stack.push(c);
            }
        }
    }
    seen
}

/// Is there a directed path from `from` to `to` (including the empty path)?
pub fn reachable(net: &Network, from: VertexId, to: VertexId) -> bool {
    reach_mask(net, &[from], None)[to.index()]
}

/// The cluster of `v`: all leaf labels reachable from `v`.
pub fn cluster_of(net: &Network, v: VertexId) -> LeafSet {
    let mask = reach_mask(net, &[v], None);
    net.leaves()
        .filter(|l| mask[l.index()])
        .filter_map(|l| net.label(l))
        .collect()
}

/// Clusters of every vertex, keyed by vertex id.
pub fn cluster_sets(net: &Network) -> BTreeMap<VertexId, LeafSet> {
    let cm = net.clusters();
    net.vertices().map(|v| (v, cm.leaf_set(v))).collect()
}

/// The visibility set of `v`: leaves that every root-to-leaf path must pass
/// `v` to reach. Computed by removing `v` and taking the complement of what
/// the root still reaches. Always a subset of the cluster of `v`.
pub fn visibility_set(net: &Network, v: VertexId) -> LeafSet {
    if v == net.root() {
        return net.leaf_labels().into_iter().collect();
    }
    let mask = reach_mask(net, &[net.root()], Some(v));
    net.leaves()
        .filter(|l| !mask[l.index()])
        .filter_map(|l| net.label(l))
        .collect()
}

/// Is `arc` a shortcut, i.e. a reticulation arc whose endpoints are also
/// joined by a longer directed path?
pub fn is_shortcut(net: &Network, arc: Arc) -> Result<bool, NetworkError> {
    if !net.has_arc(arc.tail, arc.head) {
        return Err(NetworkError::NoSuchArc(arc));
    }
    if net.kind(arc.head) != VertexKind::Reticulation {
        return Ok(false);
    }
    // Any tail-to-head path avoiding the arc itself must start through a
    // different out-arc of the tail.
    let mut alternatives: Vec<VertexId> = net.children(arc.tail).to_vec();
    if let Some(pos) = alternatives.iter().position(|&c| c == arc.head) {
        alternatives.remove(pos);
    }
    Ok(reach_mask(net, &alternatives, None)[arc.head.index()])
}

/// Is `arc` a trivial shortcut: a shortcut whose head's other parent is
/// itself a child of the tail?
pub fn is_trivial_shortcut(net: &Network, arc: Arc) -> Result<bool, NetworkError> {
    if !net.has_arc(arc.tail, arc.head) {
        return Err(NetworkError::NoSuchArc(arc));
    }
    if net.kind(arc.head) != VertexKind::Reticulation {
        return Ok(false);
    }
    let other = net.other_parent(arc.head, arc.tail);
    Ok(net.children(arc.tail).contains(&other))
}

/// Tree-child: every non-leaf vertex has at least one child that is a tree
/// vertex or a leaf.
pub fn is_tree_child(net: &Network) -> bool {
    net.vertices().all(|v| {
        net.kind(v) == VertexKind::Leaf
            || net
                .children(v)
                .iter()
                .any(|&c| net.kind(c) != VertexKind::Reticulation)
    })
}

/// Normal: tree-child and without shortcuts.
pub fn is_normal(net: &Network) -> bool {
    is_tree_child(net)
        && net.arcs().iter().all(|&a| {
            net.kind(a.head) != VertexKind::Reticulation
                || !is_shortcut(net, a).expect("arc comes from the network")
        })
}

/// The bottom structure a reduction step works on. Leaf `a` always sorts
/// before leaf `b` in a plain cherry; in a reticulated cherry `b` is the leaf
/// below the reticulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum CherryShape {
    /// Two leaves with a common parent.
    Cherry {
        a: String,
        b: String,
        parent: VertexId,
    },
    /// Leaf `a` and reticulation leaf `b`: `a`'s parent is one parent of
    /// `b`'s reticulation parent, `coparent` is the other.
    ReticulatedCherry {
        a: String,
        b: String,
        parent_a: VertexId,
        parent_b: VertexId,
        coparent: VertexId,
    },
}

impl CherryShape {
    pub fn leaf_a(&self) -> &str {
        match self {
            CherryShape::Cherry { a, .. } | CherryShape::ReticulatedCherry { a, .. } => a,
        }
    }

    pub fn leaf_b(&self) -> &str {
        match self {
            CherryShape::Cherry { b, .. } | CherryShape::ReticulatedCherry { b, .. } => b,
        }
    }

    pub fn is_reticulated(&self) -> bool {
        matches!(self, CherryShape::ReticulatedCherry { .. })
    }
}

impl fmt::Display for CherryShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CherryShape::Cherry { a, b, .. } => write!(f, "cherry{{{a},{b}}}"),
            CherryShape::ReticulatedCherry { a, b, .. } => {
                write!(f, "reticulated-cherry{{{a},{b}}}")
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("network is not tree-child")]
    NotTreeChild,
    #[error("cherries require at least two leaves")]
    TooFewLeaves,
}

/// Finds a cherry or reticulated cherry by walking down from the root,
/// always into a tree-vertex child while one exists. Every tree-child
/// network with two or more leaves has one; the walk is deterministic, so
/// repeated calls on the same network agree.
pub fn find_cherry(net: &Network) -> Result<CherryShape, AnalysisError> {
    if net.leaf_count() < 2 {
        return Err(AnalysisError::TooFewLeaves);
    }
    let mut cur = net.root();
    loop {
        let kids = net.children(cur);
        if let Some(&t) = kids.iter().find(|&&c| net.kind(c) == VertexKind::Tree) {
            cur = t;
            continue;
        }
        let leaf_kids: Vec<VertexId> = kids
            .iter()
            .copied()
            .filter(|&c| net.kind(c) == VertexKind::Leaf)
            .collect();
        let ret_kids: Vec<VertexId> = kids
            .iter()
            .copied()
            .filter(|&c| net.kind(c) == VertexKind::Reticulation)
            .collect();
        match (leaf_kids.as_slice(), ret_kids.as_slice()) {
            ([x, y], []) => {
                let mut a = net.label(*x).expect("leaves are labelled").to_string();
                let mut b = net.label(*y).expect("leaves are labelled").to_string();
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                return Ok(CherryShape::Cherry { a, b, parent: cur });
            }
            ([x], [r]) => {
                let below = net.children(*r)[0];
                match net.kind(below) {
                    VertexKind::Leaf => {
                        return Ok(CherryShape::ReticulatedCherry {
                            a: net.label(*x).expect("leaves are labelled").to_string(),
                            b: net.label(below).expect("leaves are labelled").to_string(),
                            parent_a: cur,
                            parent_b: *r,
                            coparent: net.other_parent(*r, cur),
                        });
                    }
                    VertexKind::Tree => {
                        cur = below;
                    }
                    _ => return Err(AnalysisError::NotTreeChild),
                }
            }
            _ => return Err(AnalysisError::NotTreeChild),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{net_a, net_b, net_c};

    fn vertex_with_cluster(net: &Network, want: &[&str]) -> VertexId {
        let want: LeafSet = want.iter().copied().collect();
        net.vertices()
            .find(|&v| cluster_of(net, v) == want && net.kind(v) != VertexKind::Leaf)
            .expect("no vertex with that cluster")
    }

    #[test]
    fn clusters_of_net_a() {
        let net = net_a();
        let cm = net.clusters();
        let by_cluster: Vec<LeafSet> = net.vertices().map(|v| cm.leaf_set(v)).collect();
        let want = [
            ("rho", vec!["a", "b", "c"]),
            ("u", vec!["a", "b"]),
            ("v", vec!["b", "c"]),
            ("r", vec!["b"]),
        ];
        for (_, labels) in want {
            let set: LeafSet = labels.iter().copied().collect();
            assert!(by_cluster.contains(&set), "missing cluster {set}");
        }
        // Bitset clusters agree with the per-vertex traversal.
        for v in net.vertices() {
            assert_eq!(cm.leaf_set(v), cluster_of(&net, v));
        }
    }

    #[test]
    fn visibility_on_net_a() {
        let net = net_a();
        let r = net.leaf_by_label("b").map(|b| net.parents(b)[0]).unwrap();
        let v = vertex_with_cluster(&net, &["b", "c"]);
        let u = vertex_with_cluster(&net, &["a", "b"]);
        assert_eq!(visibility_set(&net, r), ["b"].into_iter().collect());
        assert_eq!(visibility_set(&net, v), ["c"].into_iter().collect());
        assert_eq!(visibility_set(&net, u), ["a"].into_iter().collect());
        assert_eq!(
            visibility_set(&net, net.root()),
            ["a", "b", "c"].into_iter().collect()
        );
    }

    #[test]
    fn visibility_is_contained_in_cluster() {
        for net in [net_a(), net_b(), net_c()] {
            for v in net.vertices() {
                assert!(visibility_set(&net, v).is_subset(&cluster_of(&net, v)));
            }
        }
    }

    #[test]
    fn shortcut_classification_on_net_b() {
        let net = net_b();
        let u = vertex_with_cluster(&net, &["a", "b"]);
        let v = net.leaf_by_label("b").map(|b| net.parents(b)[0]).unwrap();
        let shortcut = Arc::new(u, v);
        assert!(is_shortcut(&net, shortcut).unwrap());
        assert!(is_trivial_shortcut(&net, shortcut).unwrap());
        // The other in-arc of v is no shortcut.
        let w = net.other_parent(v, u);
        assert!(!is_shortcut(&net, Arc::new(w, v)).unwrap());
        assert!(!is_trivial_shortcut(&net, Arc::new(w, v)).unwrap());
    }

    #[test]
    fn non_trivial_shortcut_is_detected() {
        // Shortcut spanning two arcs: rho -> m -> w -> v plus rho -> v.
        let net = Network::from_named_arcs(&[
            ("rho", "m"),
            ("rho", "v"),
            ("m", "w"),
            ("m", "c"),
            ("w", "a"),
            ("w", "v"),
            ("v", "b"),
        ])
        .unwrap();
        assert!(net.validate().ok());
        let v = net.leaf_by_label("b").map(|b| net.parents(b)[0]).unwrap();
        let arc = Arc::new(net.root(), v);
        assert!(is_shortcut(&net, arc).unwrap());
        assert!(!is_trivial_shortcut(&net, arc).unwrap());
        assert!(net.first_trivial_shortcut().is_none());
    }

    #[test]
    fn tree_child_and_normal_classification() {
        assert!(is_tree_child(&net_a()));
        assert!(is_normal(&net_a()));
        assert!(is_tree_child(&net_b()));
        assert!(!is_normal(&net_b()));
        assert!(is_normal(&net_c()));

        // Both children of p are reticulations: not tree-child.
        let net = Network::from_named_arcs(&[
            ("rho", "p"),
            ("rho", "w"),
            ("p", "u"),
            ("p", "d"),
            ("u", "d"),
            ("u", "v"),
            ("w", "v"),
            ("w", "l3"),
            ("v", "l1"),
            ("d", "l2"),
        ])
        .unwrap();
        assert!(net.validate().ok());
        assert!(!is_tree_child(&net));
    }

    #[test]
    fn reachability_includes_the_empty_path() {
        let net = net_a();
        assert!(reachable(&net, net.root(), net.root()));
        let a = net.leaf_by_label("a").unwrap();
        assert!(reachable(&net, net.root(), a));
        assert!(!reachable(&net, a, net.root()));
    }

    #[test]
    fn find_cherry_on_net_a_is_reticulated() {
        let net = net_a();
        let got = find_cherry(&net).unwrap();
        let u = vertex_with_cluster(&net, &["a", "b"]);
        let v = vertex_with_cluster(&net, &["b", "c"]);
        let r = net.leaf_by_label("b").map(|b| net.parents(b)[0]).unwrap();
        assert_eq!(
            got,
            CherryShape::ReticulatedCherry {
                a: "a".into(),
                b: "b".into(),
                parent_a: u,
                parent_b: r,
                coparent: v,
            }
        );
    }

    #[test]
    fn find_cherry_on_a_tree() {
        let got = find_cherry(&net_c()).unwrap();
        assert_eq!(got.leaf_a(), "a");
        assert_eq!(got.leaf_b(), "b");
        assert!(!got.is_reticulated());
    }

    #[test]
    fn find_cherry_walks_through_reticulations() {
        // The walk reaches a leaf/reticulation pair whose reticulation leads
        // to another tree vertex; it must continue below it.
        let net = Network::from_named_arcs(&[
            ("rho", "u"),
            ("rho", "v"),
            ("u", "a"),
            ("u", "r"),
            ("v", "r"),
            ("v", "c"),
            ("r", "w"),
            ("w", "b1"),
            ("w", "b2"),
        ])
        .unwrap();
        assert!(net.validate().ok());
        let got = find_cherry(&net).unwrap();
        assert_eq!(
            got,
            CherryShape::Cherry {
                a: "b1".into(),
                b: "b2".into(),
                parent: net.leaf_by_label("b1").map(|l| net.parents(l)[0]).unwrap(),
            }
        );
    }

    #[test]
    fn find_cherry_rejects_non_tree_child() {
        let net = Network::from_named_arcs(&[
            ("rho", "p"),
            ("rho", "w"),
            ("p", "u"),
            ("p", "d"),
            ("u", "d"),
            ("u", "v"),
            ("w", "v"),
            ("w", "l3"),
            ("v", "l1"),
            ("d", "l2"),
        ])
        .unwrap();
        assert_eq!(find_cherry(&net), Err(AnalysisError::NotTreeChild));
        assert_eq!(
            find_cherry(&Network::single("x")),
            Err(AnalysisError::TooFewLeaves)
        );
    }

    #[test]
    fn cluster_order_is_by_label_sequence() {
        let net = net_a();
        let cm = net.clusters();
        let u = vertex_with_cluster(&net, &["a", "b"]);
        let v = vertex_with_cluster(&net, &["b", "c"]);
        let r = net.leaf_by_label("b").map(|b| net.parents(b)[0]).unwrap();
        assert_eq!(cm.cmp_clusters(u, v), std::cmp::Ordering::Less);
        // {b} is a prefix of {b,c}.
        assert_eq!(cm.cmp_clusters(r, v), std::cmp::Ordering::Less);
        assert_eq!(cm.cmp_clusters(u, u), std::cmp::Ordering::Equal);
    }
}
