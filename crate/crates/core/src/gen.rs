//! Seeded random generation of tree-child and normal networks, plus the
//! display-set-preserving trivial-shortcut insertion used to manufacture
//! equivalent network pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analysis::{is_normal, is_tree_child};
use crate::network::{Network, VertexId, VertexKind};

/// Attempts allowed per reticulation before generation gives up.
pub const RETRY_BOUND: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkClass {
    Normal,
    TreeChild,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenSpec {
    pub n_leaves: usize,
    pub n_reticulations: usize,
    pub seed: u64,
    pub class: NetworkClass,
}

impl GenSpec {
    pub fn normal(n_leaves: usize, n_reticulations: usize, seed: u64) -> Self {
        GenSpec {
            n_leaves,
            n_reticulations,
            seed,
            class: NetworkClass::Normal,
        }
    }

    pub fn tree_child(n_leaves: usize, n_reticulations: usize, seed: u64) -> Self {
        GenSpec {
            n_leaves,
            n_reticulations,
            seed,
            class: NetworkClass::TreeChild,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("generation needs n_leaves >= 2 and n_reticulations <= n_leaves - 1")]
    InvalidSpec,
    #[error("no candidate kept the class after {attempts} attempts ({placed} reticulations placed)")]
    Exhausted { placed: usize, attempts: usize },
    #[error("no vertex admits a trivial-shortcut insertion")]
    NoEligibleArc,
}

fn build(arcs: &[(usize, usize)], leaves: &[usize]) -> Option<Network> {
    let n = arcs.iter().flat_map(|&(a, b)| [a, b]).max().unwrap_or(0) + 1;
    let labels: Vec<(usize, String)> = leaves
        .iter()
        .enumerate()
        .map(|(k, &v)| (v, format!("x{}", k + 1)))
        .collect();
    Network::from_parts(n, arcs.to_vec(), labels).ok()
}

/// Generates a random network of the requested class: grow a random tree by
/// arc subdivision, then add reticulations by subdividing two arcs and
/// joining them, rejection-sampling candidates until one keeps the class.
/// Deterministic per seed. Leaves are labelled x1..xn.
pub fn random_network(spec: GenSpec) -> Result<Network, GenError> {
    if spec.n_leaves < 2 || spec.n_reticulations >= spec.n_leaves {
        return Err(GenError::InvalidSpec);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut arcs: Vec<(usize, usize)> = vec![(0, 1), (0, 2)];
    let mut leaves: Vec<usize> = vec![1, 2];
    let mut next = 3;
    for _ in 2..spec.n_leaves {
        let i = rng.random_range(0..arcs.len());
        let (x, y) = arcs[i];
        let s = next;
        let l = next + 1;
        next += 2;
        arcs[i] = (x, s);
        arcs.push((s, y));
        arcs.push((s, l));
        leaves.push(l);
    }

    let mut placed = 0;
    while placed < spec.n_reticulations {
        let mut attempts = 0;
        loop {
            attempts += 1;
            if attempts > RETRY_BOUND {
                return Err(GenError::Exhausted {
                    placed,
                    attempts: RETRY_BOUND,
                });
            }
            let i = rng.random_range(0..arcs.len());
            let j = rng.random_range(0..arcs.len());
            if i == j {
                continue;
            }
            // Subdivide arc i with a tree vertex s, arc j with a
            // reticulation t, and join them with (s, t).
            let mut cand = arcs.clone();
            let (x1, y1) = cand[i];
            let (x2, y2) = cand[j];
            let s = next;
            let t = next + 1;
            cand[i] = (x1, s);
            cand.push((s, y1));
            cand[j] = (x2, t);
            cand.push((t, y2));
            cand.push((s, t));
            let keeps_class = build(&cand, &leaves).is_some_and(|net| {
                net.validate().ok()
                    && is_tree_child(&net)
                    && (spec.class == NetworkClass::TreeChild || is_normal(&net))
            });
            if keeps_class {
                arcs = cand;
                next += 2;
                placed += 1;
                break;
            }
        }
    }
    Ok(build(&arcs, &leaves).expect("the accepted arc set builds"))
}

/// Inserts one trivial shortcut without changing the display set: picks a
/// root-or-tree vertex `w` whose children are all tree vertices or leaves,
/// hangs a new tree vertex `u` above `w` (subdividing `w`'s in-arc, or as a
/// new root), subdivides one child arc of `w` with a new reticulation `v`,
/// and adds the arc (u, v) — which is then a trivial shortcut, since `v`'s
/// other parent `w` is a child of `u`. Expects a tree-child operand.
pub fn insert_trivial_shortcut(net: &Network, seed: u64) -> Result<Network, GenError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eligible: Vec<VertexId> = net
        .vertices()
        .filter(|&w| {
            matches!(net.kind(w), VertexKind::Root | VertexKind::Tree)
                && net.children(w).len() == 2
                && net
                    .children(w)
                    .iter()
                    .all(|&c| net.kind(c) != VertexKind::Reticulation)
        })
        .collect();
    if eligible.is_empty() {
        return Err(GenError::NoEligibleArc);
    }
    let w = eligible[rng.random_range(0..eligible.len())];
    let c = net.children(w)[rng.random_range(0..2)];

    let n = net.n_vertices();
    let u_new = n;
    let v_new = n + 1;
    let mut arcs: Vec<(usize, usize)> = net
        .arcs()
        .iter()
        .map(|a| (a.tail.index(), a.head.index()))
        .collect();
    arcs.retain(|&(t, h)| (t, h) != (w.index(), c.index()));
    arcs.push((w.index(), v_new));
    arcs.push((v_new, c.index()));
    if w == net.root() {
        arcs.push((u_new, w.index()));
    } else {
        let p = net.parents(w)[0];
        arcs.retain(|&(t, h)| (t, h) != (p.index(), w.index()));
        arcs.push((p.index(), u_new));
        arcs.push((u_new, w.index()));
    }
    arcs.push((u_new, v_new));

    let labels: Vec<(usize, String)> = net
        .vertices()
        .filter_map(|v| net.label(v).map(|l| (v.index(), l.to_string())))
        .collect();
    let out = Network::from_parts(n + 2, arcs, labels)
        .expect("shortcut insertion preserves rootedness");
    debug_assert!(out.validate().ok());
    debug_assert!(!is_tree_child(net) || is_tree_child(&out));
    Ok(out)
}
