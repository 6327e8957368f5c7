//! Extended-Newick and arc-list I/O.
//!
//! The Newick dialect carries reticulations as `#H<k>` hybrid tags: each tag
//! appears exactly twice, once with a subtree (supplying the reticulation's
//! child) and once as a bare reference (supplying its second parent). No
//! branch lengths. Internal vertex names are accepted and discarded.
//!
//! Serialization is canonical: at every vertex the children are ordered by
//! their clusters (compared as sorted label sequences), each reticulation's
//! subtree is written under the parent with the smaller cluster, and hybrid
//! numbers count up from 1 in output order. Equal inputs serialize to equal
//! bytes, and the output parses back to the same arc set.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::analysis::{reachable, ClusterMap};
use crate::network::{
    Network, NetworkError, Subject, ValidationReport, VertexId, VertexKind, Violation,
};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error(
        "hybrid tag #{tag} appears {occurrences} time(s) with {bodies} subtree occurrence(s); \
         expected two occurrences, exactly one with a subtree"
    )]
    HybridArity {
        tag: String,
        occurrences: usize,
        bodies: usize,
    },
    #[error("parsed structure is not a phylogenetic network: {0}")]
    Validation(ValidationReport),
}

fn syntax(pos: usize, msg: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        pos,
        msg: msg.into(),
    }
}

/// Shared tail of both parsers: build the network and insist it validates.
fn finish_network(
    n: usize,
    arcs: Vec<(usize, usize)>,
    labels: Vec<(usize, String)>,
) -> Result<Network, ParseError> {
    let net = Network::from_parts(n, arcs, labels).map_err(|e| match e {
        NetworkError::Unrooted(_) => ParseError::Validation(ValidationReport {
            violations: vec![Violation {
                rule: "unique-root",
                subject: Subject::Whole,
            }],
        }),
        other => unreachable!("interned ids are in range: {other}"),
    })?;
    let report = net.validate();
    if !report.ok() {
        return Err(ParseError::Validation(report));
    }
    Ok(net)
}

/// One node as written: children in input order, optional name, optional
/// hybrid tag. Nodes sharing a tag merge into one reticulation.
#[derive(Debug, Default)]
struct RawNode {
    children: Vec<usize>,
    name: Option<String>,
    hybrid: Option<String>,
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    arena: Vec<RawNode>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            bytes: text.as_bytes(),
            pos: 0,
            arena: Vec::new(),
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b':') => Err(syntax(self.pos, "branch lengths are not supported")),
            Some(b) if b == byte => {
                self.pos += 1;
                Ok(())
            }
            Some(b) => Err(syntax(
                self.pos,
                format!("expected '{}', found '{}'", byte as char, b as char),
            )),
            None => Err(syntax(
                self.pos,
                format!("expected '{}', found end of input", byte as char),
            )),
        }
    }

    fn name(&mut self) -> Option<String> {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() || b"(),;:#".contains(&b) {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
        }
    }

    fn hybrid_tag(&mut self) -> Result<Option<String>, ParseError> {
        if self.peek() != Some(b'#') {
            return Ok(None);
        }
        self.pos += 1;
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(syntax(start, "expected a hybrid tag after '#'"));
        }
        Ok(Some(
            String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned(),
        ))
    }

    fn subtree(&mut self) -> Result<usize, ParseError> {
        self.skip_ws();
        let mut node = RawNode::default();
        if self.peek() == Some(b'(') {
            self.pos += 1;
            loop {
                node.children.push(self.subtree()?);
                self.skip_ws();
                match self.peek() {
                    Some(b',') => {
                        self.pos += 1;
                    }
                    Some(b')') => {
                        self.pos += 1;
                        break;
                    }
                    Some(b':') => {
                        return Err(syntax(self.pos, "branch lengths are not supported"))
                    }
                    Some(b) => {
                        return Err(syntax(
                            self.pos,
                            format!("expected ',' or ')', found '{}'", b as char),
                        ))
                    }
                    None => return Err(syntax(self.pos, "unbalanced '('")),
                }
            }
            self.skip_ws();
            node.name = self.name();
            self.skip_ws();
            node.hybrid = self.hybrid_tag()?;
        } else {
            node.name = self.name();
            self.skip_ws();
            node.hybrid = self.hybrid_tag()?;
            if node.name.is_none() && node.hybrid.is_none() {
                let found = match self.peek() {
                    Some(b':') => return Err(syntax(self.pos, "branch lengths are not supported")),
                    Some(b) => format!("'{}'", b as char),
                    None => "end of input".to_string(),
                };
                return Err(syntax(
                    self.pos,
                    format!("expected a subtree, found {found}"),
                ));
            }
        }
        self.arena.push(node);
        Ok(self.arena.len() - 1)
    }
}

/// Parses one `;`-terminated extended-Newick string into a network and
/// checks that the result actually is one.
pub fn parse_enewick(text: &str) -> Result<Network, ParseError> {
    let mut p = Parser::new(text);
    let root = p.subtree()?;
    p.expect(b';')?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(syntax(p.pos, "trailing input after ';'"));
    }

    let arena = p.arena;
    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, node) in arena.iter().enumerate() {
        if let Some(tag) = &node.hybrid {
            groups.entry(tag).or_default().push(i);
        }
    }

    // Plain nodes get one vertex each; each hybrid group shares one.
    let mut vid: Vec<Option<usize>> = vec![None; arena.len()];
    let mut next = 0;
    for (i, node) in arena.iter().enumerate() {
        if node.hybrid.is_none() {
            vid[i] = Some(next);
            next += 1;
        }
    }
    for (tag, members) in &groups {
        let bodies = members
            .iter()
            .filter(|&&m| !arena[m].children.is_empty())
            .count();
        if members.len() != 2 || bodies != 1 {
            return Err(ParseError::HybridArity {
                tag: tag.to_string(),
                occurrences: members.len(),
                bodies,
            });
        }
        for &m in members {
            vid[m] = Some(next);
        }
        next += 1;
    }

    let mut arcs = Vec::new();
    let mut labels = Vec::new();
    for (i, node) in arena.iter().enumerate() {
        let v = vid[i].expect("every node is numbered");
        for &c in &node.children {
            arcs.push((v, vid[c].expect("every node is numbered")));
        }
        if node.children.is_empty() && node.hybrid.is_none() {
            let name = node.name.clone().expect("childless nodes carry a name");
            labels.push((v, name));
        }
    }
    let _ = root;
    finish_network(next, arcs, labels)
}

/// Parses the tab-separated arc-list format: one `tail<TAB>head` line per
/// arc, `label=<name>` after the head field to label a leaf, `#` comments,
/// blank lines ignored.
pub fn parse_arclist(text: &str) -> Result<Network, ParseError> {
    let mut ids: BTreeMap<String, usize> = BTreeMap::new();
    let mut labels: BTreeMap<usize, String> = BTreeMap::new();
    let mut arcs: Vec<(usize, usize)> = Vec::new();
    let intern = |name: &str, ids: &mut BTreeMap<String, usize>| {
        let n = ids.len();
        *ids.entry(name.to_string()).or_insert(n)
    };

    let mut offset = 0;
    for raw in text.split_inclusive('\n') {
        let line_start = offset;
        offset += raw.len();
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let tail_field = fields.next().unwrap_or("").trim();
        let Some(head_field) = fields.next() else {
            return Err(syntax(line_start, "expected tail<TAB>head"));
        };
        if fields.next().is_some() {
            return Err(syntax(line_start, "expected exactly one tab"));
        }
        if tail_field.split_whitespace().count() != 1 {
            return Err(syntax(line_start, "tail must be a single name"));
        }
        let mut head_tokens = head_field.split_whitespace();
        let Some(head_name) = head_tokens.next() else {
            return Err(syntax(line_start, "missing head name"));
        };
        let tail = intern(tail_field, &mut ids);
        let head = intern(head_name, &mut ids);
        for attr in head_tokens {
            match attr.split_once('=') {
                Some(("label", value)) if !value.is_empty() => {
                    labels.insert(head, value.to_string());
                }
                _ => {
                    return Err(syntax(
                        line_start,
                        format!("unrecognized attribute {attr:?} (expected label=<name>)"),
                    ))
                }
            }
        }
        arcs.push((tail, head));
    }

    if arcs.is_empty() {
        return Err(syntax(0, "empty input: no arcs"));
    }
    let n = ids.len();
    finish_network(n, arcs, labels.into_iter().collect())
}

/// Renders the canonical extended-Newick form described in the module docs.
/// Expects a network that validates; trees come out as plain Newick.
pub fn serialize_enewick(net: &Network) -> String {
    let cm = net.clusters();

    // Each reticulation's subtree is written under exactly one parent: the
    // one with the smaller cluster, falling back for equal clusters to the
    // lower parent (the one the other can reach), then to the smaller id.
    let mut body_parent: Vec<Option<VertexId>> = vec![None; net.n_vertices()];
    for v in net.reticulations() {
        let ps = net.parents(v);
        let mut best = ps[0];
        for &p in &ps[1..] {
            best = match cm.cmp_clusters(p, best) {
                Ordering::Less => p,
                Ordering::Greater => best,
                Ordering::Equal => {
                    if reachable(net, best, p) {
                        p
                    } else {
                        best
                    }
                }
            };
        }
        body_parent[v.index()] = Some(best);
    }

    let mut state = RenderState {
        net,
        cm,
        body_parent,
        numbers: vec![None; net.n_vertices()],
        next: 1,
        out: String::new(),
    };
    state.render(net.root(), None);
    state.out.push(';');
    state.out
}

struct RenderState<'a> {
    net: &'a Network,
    cm: &'a ClusterMap,
    body_parent: Vec<Option<VertexId>>,
    numbers: Vec<Option<usize>>,
    next: usize,
    out: String,
}

impl RenderState<'_> {
    fn number(&mut self, v: VertexId) -> usize {
        *self.numbers[v.index()].get_or_insert_with(|| {
            let k = self.next;
            self.next += 1;
            k
        })
    }

    fn children_ordered(&self, v: VertexId) -> Vec<VertexId> {
        let mut cs = self.net.children(v).to_vec();
        cs.sort_by(|&x, &y| self.cm.cmp_clusters(x, y).then(x.cmp(&y)));
        cs
    }

    fn render_children(&mut self, v: VertexId) {
        self.out.push('(');
        for (i, c) in self.children_ordered(v).into_iter().enumerate() {
            if i > 0 {
                self.out.push(',');
            }
            self.render(c, Some(v));
        }
        self.out.push(')');
    }

    fn render(&mut self, v: VertexId, via: Option<VertexId>) {
        match self.net.kind(v) {
            VertexKind::Leaf => {
                self.out.push_str(self.net.label(v).unwrap_or_default());
            }
            VertexKind::Reticulation => {
                let k = self.number(v);
                if via == self.body_parent[v.index()] {
                    self.render_children(v);
                    self.out.push_str(&format!("#H{k}"));
                } else {
                    self.out.push_str(&format!("#H{k}"));
                }
            }
            VertexKind::Root | VertexKind::Tree => {
                self.render_children(v);
            }
        }
    }
}
