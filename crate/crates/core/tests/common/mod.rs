//! Fixtures and helpers shared by the integration suites.
#![allow(dead_code)]

use std::collections::BTreeSet;

use dispset_core::{random_network, GenSpec, Network, NetworkClass, VertexId};

/// Normal network on {a,b,c}: the reticulation leaf b sits between the two
/// root children; displays (a,(b,c)) and ((a,b),c).
pub fn net_a() -> Network {
    Network::from_named_arcs(&[
        ("rho", "u"),
        ("rho", "v"),
        ("u", "a"),
        ("u", "r"),
        ("v", "r"),
        ("v", "c"),
        ("r", "b"),
    ])
    .expect("fixture is well-formed")
}

/// Tree-child network on {a,b,x} with the trivial shortcut (u,v); displays
/// exactly the one tree (x,(a,b)).
pub fn net_b() -> Network {
    Network::from_named_arcs(&[
        ("rho", "u"),
        ("rho", "x"),
        ("u", "w"),
        ("u", "v"),
        ("w", "a"),
        ("w", "v"),
        ("v", "b"),
    ])
    .expect("fixture is well-formed")
}

/// The tree (x,(a,b)): net_b with its shortcut removed.
pub fn net_c() -> Network {
    Network::from_named_arcs(&[("rho", "w"), ("rho", "x"), ("w", "a"), ("w", "b")])
        .expect("fixture is well-formed")
}

/// Id-free picture of a network: each vertex named by kind plus the leaf
/// labels it reaches, each arc a "tail->head" string over those names. Equal
/// shapes mean isomorphic networks whenever the vertex names come out
/// distinct, which they do for every graph used in these tests.
pub fn shape(net: &Network) -> BTreeSet<String> {
    fn name(net: &Network, v: VertexId) -> String {
        let mut reach: Vec<&str> = Vec::new();
        let mut stack = vec![v];
        let mut seen = vec![false; net.n_vertices()];
        while let Some(u) = stack.pop() {
            if seen[u.index()] {
                continue;
            }
            seen[u.index()] = true;
            if let Some(l) = net.label(u) {
                reach.push(l);
            }
            stack.extend_from_slice(net.children(u));
        }
        reach.sort_unstable();
        format!("{:?}{{{}}}", net.kind(v), reach.join(","))
    }
    net.arcs()
        .iter()
        .map(|a| format!("{}->{}", name(net, a.tail), name(net, a.head)))
        .collect()
}

/// Same graph, two leaf labels exchanged.
pub fn swap_labels(net: &Network, x: &str, y: &str) -> Network {
    let arcs: Vec<(usize, usize)> = net
        .arcs()
        .iter()
        .map(|a| (a.tail.index(), a.head.index()))
        .collect();
    let labels: Vec<(usize, String)> = net
        .vertices()
        .filter_map(|v| net.label(v).map(|l| (v.index(), l)))
        .map(|(v, l)| {
            let swapped = if l == x {
                y
            } else if l == y {
                x
            } else {
                l
            };
            (v, swapped.to_string())
        })
        .collect();
    Network::from_parts(net.n_vertices(), arcs, labels).expect("relabelling keeps the graph")
}

/// Generates a network of the requested class, scanning seeds upward from
/// `seed` until one succeeds: tight specs can exhaust a single seed's
/// rejection-sampling budget.
pub fn gen_ok(class: NetworkClass, n_leaves: usize, n_reticulations: usize, seed: u64) -> Network {
    for offset in 0..64 {
        let s = seed.wrapping_add(offset);
        let spec = match class {
            NetworkClass::Normal => GenSpec::normal(n_leaves, n_reticulations, s),
            NetworkClass::TreeChild => GenSpec::tree_child(n_leaves, n_reticulations, s),
        };
        if let Ok(net) = random_network(spec) {
            return net;
        }
    }
    panic!("no {class:?} network with n={n_leaves}, r={n_reticulations} within 64 seeds");
}

/// Which kind of vertex sits where the reticulation leaf's co-sibling goes
/// on the reticulated side of a [`template_pair`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateVariant {
    /// The co-sibling position holds a plain subtree.
    PlainSibling,
    /// The co-sibling position holds a second reticulation (with its own
    /// shortcut) above the subtree.
    ReticulatedSibling,
}

#[derive(Debug, Clone, Copy)]
pub struct TemplateSpec {
    pub variant: TemplateVariant,
    /// Leaves c1..cm in the subtree next to the reticulation pair (>= 1).
    pub coparent_leaves: usize,
    /// Leaves d1..dk hanging off the chain above the core (>= 1).
    pub context_leaves: usize,
}

fn caterpillar(parent: &str, labels: &[String], prefix: &str, out: &mut Vec<(String, String)>) {
    if labels.len() == 1 {
        out.push((parent.to_string(), labels[0].clone()));
        return;
    }
    let spine: Vec<String> = (1..labels.len()).map(|i| format!("{prefix}{i}")).collect();
    out.push((parent.to_string(), spine[0].clone()));
    for i in 0..spine.len() {
        out.push((spine[i].clone(), labels[i].clone()));
        let next = if i + 1 < spine.len() {
            spine[i + 1].clone()
        } else {
            labels[i + 1].clone()
        };
        out.push((spine[i].clone(), next));
    }
}

/// Chain of context leaves d1..dk from the root down to `core_root`.
fn context_chain(k: usize, core_root: &str, out: &mut Vec<(String, String)>) {
    for i in 1..=k {
        let parent = if i == 1 {
            "rho".to_string()
        } else {
            format!("g{}", i - 1)
        };
        let inner = if i == k {
            core_root.to_string()
        } else {
            format!("g{i}")
        };
        out.push((parent.clone(), inner));
        out.push((parent, format!("d{i}")));
    }
}

fn named(arcs: &[(String, String)], rotation: usize) -> Network {
    let mut rotated: Vec<(&str, &str)> = arcs
        .iter()
        .map(|(t, h)| (t.as_str(), h.as_str()))
        .collect();
    let shift = rotation % rotated.len();
    rotated.rotate_left(shift);
    Network::from_named_arcs(&rotated).expect("template arcs are well-formed")
}

/// A hand-shaped equivalent pair: the left network is normal with a
/// reticulated cherry {a,b}, the right is tree-child and realises the same
/// display set through a shortcut next to the cherry, so deciding the pair
/// exercises the tree-vertex branch of the reticulated-cherry step. The
/// rotation permutes the arc lists to vary vertex numbering.
pub fn template_pair(spec: &TemplateSpec, rotation: usize) -> (Network, Network) {
    let m = spec.coparent_leaves;
    let k = spec.context_leaves;
    assert!(m >= 1 && k >= 1);
    let cs: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();

    let mut left: Vec<(String, String)> = Vec::new();
    context_chain(k, "t", &mut left);
    for (t, h) in [("t", "pa"), ("t", "q"), ("pa", "a"), ("pa", "pb"), ("q", "pb"), ("pb", "b")] {
        left.push((t.to_string(), h.to_string()));
    }
    caterpillar("q", &cs, "s", &mut left);

    let mut right: Vec<(String, String)> = Vec::new();
    match spec.variant {
        TemplateVariant::PlainSibling => {
            context_chain(k, "u1", &mut right);
            for (t, h) in [
                ("u1", "q"),
                ("u1", "v1"),
                ("q", "pb"),
                ("pb", "b"),
                ("pb", "v1"),
                ("v1", "a"),
            ] {
                right.push((t.to_string(), h.to_string()));
            }
            caterpillar("q", &cs, "s", &mut right);
        }
        TemplateVariant::ReticulatedSibling => {
            context_chain(k, "u2", &mut right);
            for (t, h) in [
                ("u2", "u1"),
                ("u2", "v2"),
                ("u1", "q"),
                ("u1", "v1"),
                ("q", "v2"),
                ("q", "pb"),
                ("pb", "b"),
                ("pb", "v1"),
                ("v1", "a"),
            ] {
                right.push((t.to_string(), h.to_string()));
            }
            caterpillar("v2", &cs, "s", &mut right);
        }
    }
    (named(&left, rotation), named(&right, rotation + 3))
}

/// The left network of [`template_pair`] against a right network with the
/// same leaf set whose reticulation was rewired away from the cherry, so the
/// structural match fails and the display sets genuinely differ.
pub fn template_pair_rewired(spec: &TemplateSpec, rotation: usize) -> (Network, Network) {
    let m = spec.coparent_leaves;
    let k = spec.context_leaves;
    assert!(m >= 1 && k >= 1);
    let cs: Vec<String> = (1..=m).map(|i| format!("c{i}")).collect();

    let (left, _) = template_pair(spec, rotation);

    let mut right: Vec<(String, String)> = Vec::new();
    context_chain(k, "u1", &mut right);
    for (t, h) in [
        ("u1", "q"),
        ("u1", "v1"),
        ("q", "b"),
        ("q", "cc"),
        ("cc", "v1"),
        ("v1", "a"),
    ] {
        right.push((t.to_string(), h.to_string()));
    }
    caterpillar("cc", &cs, "s", &mut right);
    (left, named(&right, rotation + 3))
}
