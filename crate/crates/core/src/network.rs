//! Rooted binary phylogenetic networks and the deletion operations used by
//! the reduction algorithms.
//!
//! A network value is immutable. Every mutating operation (leaf deletion,
//! reticulation-arc deletion, trivial-shortcut removal) returns a fresh
//! network with a contiguous id space together with an [`IdMap`] relating the
//! new ids back to the operand, so callers can keep naming vertices of the
//! network they started from.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::OnceLock;

use serde::Serialize;
use thiserror::Error;

use crate::analysis::ClusterMap;

/// Dense vertex index. Ids are only meaningful within the network value that
/// produced them; operations never reuse ids in place.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct VertexId(pub usize);

impl VertexId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum VertexKind {
    /// The unique in-degree-0 vertex (out-degree 2 unless the network is a
    /// single labelled vertex).
    Root,
    /// In-degree 1, out-degree 2.
    Tree,
    /// In-degree 2, out-degree 1.
    Reticulation,
    /// Labelled, in-degree 1, out-degree 0.
    Leaf,
}

/// A directed arc `tail -> head`. Ordering is lexicographic on (tail, head),
/// which is also the normalized storage order inside [`Network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
}

impl Arc {
    pub fn new(tail: VertexId, head: VertexId) -> Self {
        Arc { tail, head }
    }
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.tail, self.head)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("vertex id {0} out of range")]
    InvalidVertexId(usize),
    #[error("expected exactly one in-degree-0 vertex, found {0}")]
    Unrooted(usize),
    #[error("unknown leaf label {0:?}")]
    UnknownLeaf(String),
    #[error("deleting the last leaf would empty the network")]
    WouldEmptyNetwork,
    #[error("no arc {0}")]
    NoSuchArc(Arc),
    #[error("arc {0} does not end in a reticulation")]
    NotReticulationArc(Arc),
    #[error("suppressing {vertex} would duplicate arc {arc}")]
    WouldCreateParallelArc { vertex: VertexId, arc: Arc },
    #[error("operation requires a tree-child network")]
    NotTreeChild,
    #[error("network has {0} reticulations, expected a tree")]
    HasReticulations(usize),
    #[error("network fails validation")]
    Invalid,
}

/// One failed validation rule, attached to the vertex or arc that breaks it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub rule: &'static str,
    pub subject: Subject,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Subject {
    Vertex(VertexId),
    Arc(Arc),
    Whole,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.subject {
            Subject::Vertex(v) => write!(f, "{}: {}", self.rule, v),
            Subject::Arc(a) => write!(f, "{}: {}", self.rule, a),
            Subject::Whole => write!(f, "{}", self.rule),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Maps vertex ids of an operation's result back to ids of its operand.
#[derive(Debug, Clone)]
pub struct IdMap {
    new_to_old: Vec<VertexId>,
    old_to_new: Vec<Option<VertexId>>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        IdMap {
            new_to_old: (0..n).map(VertexId).collect(),
            old_to_new: (0..n).map(|i| Some(VertexId(i))).collect(),
        }
    }

    fn from_survivors(old_n: usize, survivors: &[usize]) -> Self {
        let mut old_to_new = vec![None; old_n];
        for (new, &old) in survivors.iter().enumerate() {
            old_to_new[old] = Some(VertexId(new));
        }
        IdMap {
            new_to_old: survivors.iter().map(|&o| VertexId(o)).collect(),
            old_to_new,
        }
    }

    /// New id of `old`, if the vertex survived.
    pub fn to_new(&self, old: VertexId) -> Option<VertexId> {
        self.old_to_new.get(old.0).copied().flatten()
    }

    /// Operand id of the surviving vertex `new`.
    pub fn to_old(&self, new: VertexId) -> VertexId {
        self.new_to_old[new.0]
    }

    pub fn map_arc(&self, arc: Arc) -> Option<Arc> {
        Some(Arc::new(self.to_new(arc.tail)?, self.to_new(arc.head)?))
    }

    /// Chains two maps: `self` takes A-ids to B-ids, `next` takes B-ids to
    /// C-ids; the result takes A-ids to C-ids.
    pub fn compose(&self, next: &IdMap) -> IdMap {
        let new_to_old: Vec<VertexId> =
            next.new_to_old.iter().map(|&b| self.to_old(b)).collect();
        let mut old_to_new = vec![None; self.old_to_new.len()];
        for (c, &a) in new_to_old.iter().enumerate() {
            old_to_new[a.0] = Some(VertexId(c));
        }
        IdMap { new_to_old, old_to_new }
    }
}

/// A rooted binary phylogenetic network: one in-degree-0 root of out-degree
/// two, labelled leaves of in-degree one, tree vertices (1 in, 2 out) and
/// reticulations (2 in, 1 out), acyclic, without parallel arcs. A single
/// labelled vertex is the degenerate one-leaf network.
///
/// Construction derives each vertex's kind from its degrees; [`Network::validate`]
/// reports how far a value deviates from the axioms above, so malformed
/// inputs can be represented and diagnosed instead of rejected blindly.
pub struct Network {
    kinds: Vec<VertexKind>,
    labels: Vec<Option<String>>,
    arcs: Vec<Arc>,
    root: VertexId,
    children: Vec<Vec<VertexId>>,
    parents: Vec<Vec<VertexId>>,
    clusters: OnceLock<ClusterMap>,
}

impl Clone for Network {
    fn clone(&self) -> Self {
        Network {
            kinds: self.kinds.clone(),
            labels: self.labels.clone(),
            arcs: self.arcs.clone(),
            root: self.root,
            children: self.children.clone(),
            parents: self.parents.clone(),
            clusters: OnceLock::new(),
        }
    }
}

impl PartialEq for Network {
    fn eq(&self, other: &Self) -> bool {
        self.kinds == other.kinds
            && self.labels == other.labels
            && self.arcs == other.arcs
            && self.root == other.root
    }
}

impl Eq for Network {}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("root", &self.root)
            .field("arcs", &self.arcs)
            .field("labels", &self.labels)
            .finish()
    }
}

impl Network {
    /// Builds a network over vertex ids `0..n_vertices` from raw arcs and
    /// leaf labels. The unique in-degree-0 vertex becomes the root; kinds are
    /// derived from degrees. The arc list may describe an invalid network
    /// (parallel arcs, cycles through non-root vertices, bad degrees); run
    /// [`Network::validate`] to find out.
    pub fn from_parts(
        n_vertices: usize,
        arcs: Vec<(usize, usize)>,
        labels: impl IntoIterator<Item = (usize, String)>,
    ) -> Result<Network, NetworkError> {
        for &(t, h) in &arcs {
            if t >= n_vertices {
                return Err(NetworkError::InvalidVertexId(t));
            }
            if h >= n_vertices {
                return Err(NetworkError::InvalidVertexId(h));
            }
        }
        let mut label_store: Vec<Option<String>> = vec![None; n_vertices];
        for (v, label) in labels {
            if v >= n_vertices {
                return Err(NetworkError::InvalidVertexId(v));
            }
            label_store[v] = Some(label);
        }

        let mut sorted: Vec<Arc> = arcs
            .into_iter()
            .map(|(t, h)| Arc::new(VertexId(t), VertexId(h)))
            .collect();
        sorted.sort();

        let mut children: Vec<Vec<VertexId>> = vec![Vec::new(); n_vertices];
        let mut parents: Vec<Vec<VertexId>> = vec![Vec::new(); n_vertices];
        for a in &sorted {
            children[a.tail.0].push(a.head);
            parents[a.head.0].push(a.tail);
        }
        for p in &mut parents {
            p.sort();
        }

        let roots: Vec<usize> = (0..n_vertices).filter(|&v| parents[v].is_empty()).collect();
        if roots.len() != 1 {
            return Err(NetworkError::Unrooted(roots.len()));
        }
        let root = VertexId(roots[0]);

        let kinds = (0..n_vertices)
            .map(|v| match (parents[v].len(), children[v].len()) {
                (_, 0) => VertexKind::Leaf,
                (0, _) => VertexKind::Root,
                (i, _) if i >= 2 => VertexKind::Reticulation,
                _ => VertexKind::Tree,
            })
            .collect();

        Ok(Network {
            kinds,
            labels: label_store,
            arcs: sorted,
            root,
            children,
            parents,
            clusters: OnceLock::new(),
        })
    }

    /// Convenience constructor for hand-written networks: vertices are named,
    /// ids are assigned in first-mention order, and every sink (out-degree 0)
    /// is labelled with its own name.
    pub fn from_named_arcs(arcs: &[(&str, &str)]) -> Result<Network, NetworkError> {
        let mut ids: BTreeMap<&str, usize> = BTreeMap::new();
        let mut order: Vec<&str> = Vec::new();
        let mut raw = Vec::with_capacity(arcs.len());
        for &(t, h) in arcs {
            for name in [t, h] {
                ids.entry(name).or_insert_with(|| {
                    order.push(name);
                    order.len() - 1
                });
            }
            raw.push((ids[t], ids[h]));
        }
        let has_out: BTreeSet<usize> = raw.iter().map(|&(t, _)| t).collect();
        let labels: Vec<(usize, String)> = order
            .iter()
            .enumerate()
            .filter(|(i, _)| !has_out.contains(i))
            .map(|(i, name)| (i, name.to_string()))
            .collect();
        Network::from_parts(order.len(), raw, labels)
    }

    /// The one-leaf network: a single labelled vertex.
    pub fn single(label: &str) -> Network {
        Network::from_parts(1, Vec::new(), [(0, label.to_string())])
            .expect("a single labelled vertex is always well-formed")
    }

    pub fn n_vertices(&self) -> usize {
        self.kinds.len()
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn kind(&self, v: VertexId) -> VertexKind {
        self.kinds[v.0]
    }

    pub fn label(&self, v: VertexId) -> Option<&str> {
        self.labels[v.0].as_deref()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn has_arc(&self, tail: VertexId, head: VertexId) -> bool {
        self.arcs.binary_search(&Arc::new(tail, head)).is_ok()
    }

    pub fn children(&self, v: VertexId) -> &[VertexId] {
        &self.children[v.0]
    }

    pub fn parents(&self, v: VertexId) -> &[VertexId] {
        &self.parents[v.0]
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.n_vertices()).map(VertexId)
    }

    pub fn leaves(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices().filter(|&v| self.kind(v) == VertexKind::Leaf)
    }

    pub fn reticulations(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices()
            .filter(|&v| self.kind(v) == VertexKind::Reticulation)
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn reticulation_count(&self) -> usize {
        self.reticulations().count()
    }

    /// Sorted leaf labels (the taxon set X).
    pub fn leaf_labels(&self) -> Vec<&str> {
        let mut out: Vec<&str> = self.leaves().filter_map(|v| self.label(v)).collect();
        out.sort_unstable();
        out
    }

    pub fn leaf_by_label(&self, label: &str) -> Option<VertexId> {
        self.leaves().find(|&v| self.label(v) == Some(label))
    }

    /// The parent of `v` other than `not`. Panics unless `v` has exactly two
    /// parents, one of them `not`.
    pub fn other_parent(&self, v: VertexId, not: VertexId) -> VertexId {
        let ps = self.parents(v);
        assert_eq!(ps.len(), 2, "{v} does not have two parents");
        if ps[0] == not {
            ps[1]
        } else {
            assert_eq!(ps[1], not);
            ps[0]
        }
    }

    /// The child of `v` other than `not`. Panics unless `v` has exactly two
    /// children, one of them `not`.
    pub fn other_child(&self, v: VertexId, not: VertexId) -> VertexId {
        let cs = self.children(v);
        assert_eq!(cs.len(), 2, "{v} does not have two children");
        if cs[0] == not {
            cs[1]
        } else {
            assert_eq!(cs[1], not);
            cs[0]
        }
    }

    /// Topological order (parents before children). Shorter than the vertex
    /// count when the graph has a cycle.
    pub fn topo_order(&self) -> Vec<VertexId> {
        let n = self.n_vertices();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut stack: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = stack.pop() {
            order.push(VertexId(v));
            for &c in &self.children[v] {
                indeg[c.0] -= 1;
                if indeg[c.0] == 0 {
                    stack.push(c.0);
                }
            }
        }
        order
    }

    /// Cached per-vertex cluster sets (leaves reachable from each vertex).
    /// Requires an acyclic network.
    pub fn clusters(&self) -> &ClusterMap {
        self.clusters.get_or_init(|| ClusterMap::compute(self))
    }

    /// Checks the axioms and reports every violated rule. An empty report
    /// means the value is a phylogenetic network.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let n = self.n_vertices();

        if n == 1 {
            let v = VertexId(0);
            if self.label(v).is_none() {
                violations.push(Violation {
                    rule: "unlabelled-leaf",
                    subject: Subject::Vertex(v),
                });
            }
            return ValidationReport { violations };
        }

        for w in self.arcs.windows(2) {
            if w[0] == w[1] {
                violations.push(Violation {
                    rule: "parallel-arcs",
                    subject: Subject::Arc(w[0]),
                });
            }
        }

        if self.topo_order().len() != n {
            violations.push(Violation {
                rule: "cyclic",
                subject: Subject::Whole,
            });
        }

        if self.children(self.root).len() != 2 {
            violations.push(Violation {
                rule: "root-out-degree",
                subject: Subject::Vertex(self.root),
            });
        }

        let mut seen_labels: BTreeMap<&str, VertexId> = BTreeMap::new();
        for v in self.vertices() {
            let indeg = self.parents(v).len();
            let outdeg = self.children(v).len();
            match self.kind(v) {
                VertexKind::Root => {}
                VertexKind::Leaf => {
                    if self.label(v).is_none() {
                        violations.push(Violation {
                            rule: "unlabelled-leaf",
                            subject: Subject::Vertex(v),
                        });
                    }
                    if indeg != 1 {
                        violations.push(Violation {
                            rule: "leaf-in-degree",
                            subject: Subject::Vertex(v),
                        });
                    }
                }
                VertexKind::Tree | VertexKind::Reticulation => {
                    if !(indeg == 1 && outdeg == 2 || indeg == 2 && outdeg == 1) {
                        violations.push(Violation {
                            rule: "vertex-degree",
                            subject: Subject::Vertex(v),
                        });
                    }
                }
            }
            if let Some(label) = self.label(v) {
                if self.kind(v) != VertexKind::Leaf {
                    violations.push(Violation {
                        rule: "labelled-internal",
                        subject: Subject::Vertex(v),
                    });
                }
                if let Some(&first) = seen_labels.get(label) {
                    let _ = first;
                    violations.push(Violation {
                        rule: "duplicate-label",
                        subject: Subject::Vertex(v),
                    });
                } else {
                    seen_labels.insert(label, v);
                }
            }
        }

        ValidationReport { violations }
    }

    /// Deletes leaf `label` and its incident arc, suppresses any resulting
    /// in-1/out-1 vertex, and, if the leaf's parent was the root, deletes the
    /// root together with its remaining arc.
    pub fn delete_leaf(&self, label: &str) -> Result<Network, NetworkError> {
        self.delete_leaf_mapped(label).map(|(net, _)| net)
    }

    pub fn delete_leaf_mapped(&self, label: &str) -> Result<(Network, IdMap), NetworkError> {
        let leaf = self
            .leaf_by_label(label)
            .ok_or_else(|| NetworkError::UnknownLeaf(label.to_string()))?;
        if self.leaf_count() == 1 {
            return Err(NetworkError::WouldEmptyNetwork);
        }
        let parent = self.parents(leaf)[0];
        let mut edit = EditState::new(self);
        edit.remove_vertex(leaf);
        if parent == self.root {
            edit.remove_vertex(parent);
        }
        edit.suppress_all()?;
        edit.finish()
    }

    /// Deletes the reticulation arc `arc` and suppresses the two vertices it
    /// leaves with one parent and one child; deleting an arc out of the root
    /// also deletes the root and its remaining arc.
    pub fn delete_arc(&self, arc: Arc) -> Result<Network, NetworkError> {
        self.delete_arc_mapped(arc).map(|(net, _)| net)
    }

    pub fn delete_arc_mapped(&self, arc: Arc) -> Result<(Network, IdMap), NetworkError> {
        if !self.has_arc(arc.tail, arc.head) {
            return Err(NetworkError::NoSuchArc(arc));
        }
        if self.kind(arc.head) != VertexKind::Reticulation {
            return Err(NetworkError::NotReticulationArc(arc));
        }
        let mut edit = EditState::new(self);
        edit.remove_arc(arc.tail.0, arc.head.0);
        if arc.tail == self.root {
            edit.remove_vertex(self.root);
        }
        edit.suppress_all()?;
        edit.finish()
    }

    /// Finds the first trivial shortcut in arc order: a reticulation arc
    /// whose head's other parent is a child of its tail.
    pub fn first_trivial_shortcut(&self) -> Option<Arc> {
        self.arcs.iter().copied().find(|a| {
            self.kind(a.head) == VertexKind::Reticulation && {
                let other = self.other_parent(a.head, a.tail);
                self.children(a.tail).contains(&other)
            }
        })
    }

    /// Repeatedly deletes the smallest trivial shortcut until none remain.
    /// Deleting one trivial shortcut can expose another, so the arc list is
    /// rescanned from the start after every deletion. Display sets are
    /// preserved; requires a tree-child operand.
    pub fn remove_trivial_shortcuts(&self) -> Result<Network, NetworkError> {
        self.remove_trivial_shortcuts_mapped().map(|(net, _)| net)
    }

    pub fn remove_trivial_shortcuts_mapped(&self) -> Result<(Network, IdMap), NetworkError> {
        if !crate::analysis::is_tree_child(self) {
            return Err(NetworkError::NotTreeChild);
        }
        let mut net = self.clone();
        let mut map = IdMap::identity(self.n_vertices());
        while let Some(arc) = net.first_trivial_shortcut() {
            let (next, step) = net.delete_arc_mapped(arc)?;
            map = map.compose(&step);
            net = next;
        }
        Ok((net, map))
    }
}

/// Working state for a deletion: the operand's arcs as an editable set plus
/// the vertices already removed.
struct EditState<'a> {
    net: &'a Network,
    arcs: BTreeSet<(usize, usize)>,
    gone: BTreeSet<usize>,
}

impl<'a> EditState<'a> {
    fn new(net: &'a Network) -> Self {
        EditState {
            net,
            arcs: net.arcs.iter().map(|a| (a.tail.0, a.head.0)).collect(),
            gone: BTreeSet::new(),
        }
    }

    fn remove_arc(&mut self, tail: usize, head: usize) {
        self.arcs.remove(&(tail, head));
    }

    fn remove_vertex(&mut self, v: VertexId) {
        self.gone.insert(v.0);
        self.arcs
            .retain(|&(t, h)| t != v.0 && h != v.0);
    }

    fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.net.n_vertices();
        let mut indeg = vec![0usize; n];
        let mut outdeg = vec![0usize; n];
        for &(t, h) in &self.arcs {
            outdeg[t] += 1;
            indeg[h] += 1;
        }
        (indeg, outdeg)
    }

    /// Suppresses in-1/out-1 vertices until none remain. Refuses to merge a
    /// pair of arcs that would duplicate an existing arc, because silently
    /// collapsing parallel arcs would hide a malformed reduction.
    fn suppress_all(&mut self) -> Result<(), NetworkError> {
        loop {
            let (indeg, outdeg) = self.degrees();
            let candidate = (0..self.net.n_vertices())
                .find(|&v| !self.gone.contains(&v) && indeg[v] == 1 && outdeg[v] == 1);
            let Some(v) = candidate else { return Ok(()) };
            let &(p, _) = self
                .arcs
                .iter()
                .find(|&&(_, h)| h == v)
                .expect("in-degree 1");
            let &(_, c) = self
                .arcs
                .iter()
                .find(|&&(t, _)| t == v)
                .expect("out-degree 1");
            if self.arcs.contains(&(p, c)) {
                return Err(NetworkError::WouldCreateParallelArc {
                    vertex: VertexId(v),
                    arc: Arc::new(VertexId(p), VertexId(c)),
                });
            }
            self.arcs.remove(&(p, v));
            self.arcs.remove(&(v, c));
            self.arcs.insert((p, c));
            self.gone.insert(v);
        }
    }

    fn finish(self) -> Result<(Network, IdMap), NetworkError> {
        let survivors: Vec<usize> = (0..self.net.n_vertices())
            .filter(|v| !self.gone.contains(v))
            .collect();
        let map = IdMap::from_survivors(self.net.n_vertices(), &survivors);
        let arcs: Vec<(usize, usize)> = self
            .arcs
            .iter()
            .map(|&(t, h)| {
                let nt = map.to_new(VertexId(t)).expect("tail survived");
                let nh = map.to_new(VertexId(h)).expect("head survived");
                (nt.0, nh.0)
            })
            .collect();
        let labels = survivors
            .iter()
            .enumerate()
            .filter_map(|(new, &old)| {
                self.net.labels[old].clone().map(|l| (new, l))
            })
            .collect::<Vec<_>>();
        let net = Network::from_parts(survivors.len(), arcs, labels)?;
        Ok((net, map))
    }
}

/// A phylogenetic tree: a network without reticulations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhyloTree {
    net: Network,
}

impl PhyloTree {
    pub fn network(&self) -> &Network {
        &self.net
    }

    pub fn into_network(self) -> Network {
        self.net
    }
}

impl TryFrom<Network> for PhyloTree {
    type Error = NetworkError;

    fn try_from(net: Network) -> Result<Self, Self::Error> {
        if !net.validate().ok() {
            return Err(NetworkError::Invalid);
        }
        let rets = net.reticulation_count();
        if rets > 0 {
            return Err(NetworkError::HasReticulations(rets));
        }
        Ok(PhyloTree { net })
    }
}
