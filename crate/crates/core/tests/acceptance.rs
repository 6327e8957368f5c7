//! The acceptance gate: one test per shipped guarantee, each printing a
//! single pass line (a failed assertion prints the matching fail line).
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

mod common;

use std::time::Instant;

use dispset_core::{
    cluster_of, display_sets_equal_bruteforce, enumerate_display_set, find_cherry,
    insert_trivial_shortcut, measure_scaling, parse_enewick, same_display_set,
    serialize_enewick, visibility_set, CherryShape, LeafSet, Network, NetworkClass,
    VertexKind, DEFAULT_MAX_RETICULATIONS,
};

use common::{
    gen_ok, shape, swap_labels, template_pair, template_pair_rewired, TemplateSpec,
    TemplateVariant,
};

fn oracle(left: &Network, right: &Network) -> bool {
    display_sets_equal_bruteforce(left, right, DEFAULT_MAX_RETICULATIONS)
        .expect("acceptance instances stay within the oracle bound")
}

fn fast(left: &Network, right: &Network) -> bool {
    same_display_set(left, right)
        .expect("acceptance instances satisfy the preconditions")
        .equivalent
}

fn mix(i: usize) -> u64 {
    (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

/// A normal base plus `k` display-set-preserving shortcut insertions; retries
/// bases until the whole insertion chain succeeds.
fn insertion_pair(n: usize, r: usize, k: usize, seed: u64) -> (Network, Network) {
    'attempt: for bump in 0..64 {
        let base = gen_ok(NetworkClass::Normal, n, r, seed.wrapping_add(bump));
        let mut grown = insert_trivial_shortcut(&base, seed.wrapping_add(bump));
        for step in 1..k {
            grown = match grown {
                Ok(net) => insert_trivial_shortcut(&net, seed.wrapping_add(bump + step as u64)),
                Err(_) => continue 'attempt,
            };
        }
        if let Ok(right) = grown {
            return (base, right);
        }
    }
    panic!("no insertion chain for n={n}, r={r}, k={k} within 64 bases");
}

#[test]
fn criterion_1_fast_decision_agrees_with_brute_force() {
    let started = Instant::now();
    let mut yes = 0usize;
    let mut no = 0usize;
    let mut check = |left: &Network, right: &Network, family: &str, i: usize| {
        let want = oracle(left, right);
        let got = fast(left, right);
        assert_eq!(
            got, want,
            "acceptance criterion 1: FAIL — {family} pair {i} disagrees with brute force \
             (fast {got}, oracle {want}):\n  left:  {}\n  right: {}",
            serialize_enewick(left),
            serialize_enewick(right),
        );
        if want {
            yes += 1;
        } else {
            no += 1;
        }
    };

    // Shortcut-insertion pairs: always equivalent by construction. An
    // insertion point exists only while n >= r + 2, so the base reticulation
    // count leaves room for the whole chain.
    for i in 0..500 {
        let n = 4 + i % 5;
        let k = 1 + i % 3;
        let cap = (n - k - 1).min(4 - k).min(2);
        let r = (i / 3) % (cap + 1);
        let (left, right) = insertion_pair(n, r, k, mix(i));
        check(&left, &right, "insertion", i);
    }

    // Independent draws: equivalence is the rare exception.
    for i in 0..500 {
        let n = 3 + i % 6;
        let left = gen_ok(NetworkClass::Normal, n, (i / 2) % ((n - 2).min(2) + 1), mix(i + 1000));
        let right = gen_ok(NetworkClass::TreeChild, n, (i / 3) % ((n - 1).min(3) + 1), mix(i + 2000));
        check(&left, &right, "independent", i);
    }

    // Label-swapped copies: near misses that only symmetric shapes survive.
    for i in 0..500 {
        let n = 3 + i % 6;
        let left = gen_ok(NetworkClass::Normal, n, (i / 2) % ((n - 2).min(2) + 1), mix(i + 3000));
        let x = format!("x{}", 1 + i % n);
        let y = format!("x{}", 1 + (i / n + 1 + i) % n);
        if x == y {
            check(&left, &gen_ok(NetworkClass::Normal, n, 0, mix(i + 4000)), "swap", i);
            continue;
        }
        let right = swap_labels(&left, &x, &y);
        check(&left, &right, "swap", i);
    }

    // Hand-shaped reticulated-cherry templates, whole and perturbed.
    for i in 0..500 {
        let spec = TemplateSpec {
            variant: if i % 2 == 0 {
                TemplateVariant::PlainSibling
            } else {
                TemplateVariant::ReticulatedSibling
            },
            coparent_leaves: 1 + (i / 2) % 3,
            context_leaves: 1 + (i / 6) % 3,
        };
        let rotation = i % 7;
        match i % 5 {
            0 => {
                let (left, right) = template_pair(&spec, rotation);
                check(&left, &right, "template", i);
            }
            1 => {
                let (left, right) = template_pair(&spec, rotation);
                check(&left, &swap_labels(&right, "a", "c1"), "template", i);
            }
            2 => {
                let (left, right) = template_pair(&spec, rotation);
                check(&left, &swap_labels(&right, "b", "d1"), "template", i);
            }
            3 => {
                let (left, _) = template_pair(&spec, rotation);
                let (copy, _) = template_pair(&spec, rotation);
                check(&left, &copy, "template", i);
            }
            _ => {
                let (left, right) = template_pair_rewired(&spec, rotation);
                check(&left, &right, "template", i);
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "acceptance criterion 1: FAIL — took {elapsed:.1?}, budget is 60s"
    );
    println!(
        "acceptance criterion 1: PASS — 2000/2000 verdicts agree with brute force \
         ({yes} equivalent, {no} not, {elapsed:.1?})"
    );
}

#[test]
fn criterion_2_shortcut_insertion_round_trips() {
    for i in 0..200 {
        let k = 1 + i % 3;
        let n = 4 + i % 5;
        let r = (i / 5) % ((n - 1 - k).min(2) + 1);
        'attempt: for bump in 0..64 {
            let base = gen_ok(NetworkClass::TreeChild, n, r, mix(i).wrapping_add(bump));
            let reference = enumerate_display_set(&base, DEFAULT_MAX_RETICULATIONS).unwrap();
            let mut cur = base;
            for step in 0..k {
                cur = match insert_trivial_shortcut(&cur, mix(i + 7000 + step)) {
                    Ok(net) => net,
                    Err(_) => continue 'attempt,
                };
                let grown = enumerate_display_set(&cur, DEFAULT_MAX_RETICULATIONS).unwrap();
                assert_eq!(
                    grown, reference,
                    "acceptance criterion 2: FAIL — net {i} changed display set at insertion {step}"
                );
            }
            let stripped = cur.remove_trivial_shortcuts().unwrap();
            let back = enumerate_display_set(&stripped, DEFAULT_MAX_RETICULATIONS).unwrap();
            assert_eq!(
                back, reference,
                "acceptance criterion 2: FAIL — net {i} changed display set after removal"
            );
            break;
        }
    }
    println!(
        "acceptance criterion 2: PASS — 200 nets keep their display set through \
         1–3 insertions and removal"
    );
}

#[test]
fn criterion_3_every_tree_child_network_has_a_cherry() {
    for i in 0..1000 {
        let n = 2 + i % 7;
        let r = (i / 7) % ((n - 1).min(3) + 1);
        let net = gen_ok(NetworkClass::TreeChild, n, r, mix(i + 11_000));
        let found = find_cherry(&net);
        let Ok(shape) = found else {
            panic!("acceptance criterion 3: FAIL — net {i} (n={n}, r={r}) has no cherry: {found:?}");
        };
        // The reported shape must be real, not merely present.
        match shape {
            CherryShape::Cherry { ref a, ref b, parent } => {
                let va = net.leaf_by_label(a).unwrap();
                let vb = net.leaf_by_label(b).unwrap();
                assert_eq!(net.parents(va), &[parent]);
                assert_eq!(net.parents(vb), &[parent]);
            }
            CherryShape::ReticulatedCherry { ref a, ref b, parent_a, parent_b, coparent } => {
                let va = net.leaf_by_label(a).unwrap();
                let vb = net.leaf_by_label(b).unwrap();
                assert_eq!(net.kind(parent_b), VertexKind::Reticulation);
                assert_eq!(net.parents(va), &[parent_a]);
                assert_eq!(net.parents(vb), &[parent_b]);
                assert!(net.has_arc(parent_a, parent_b) && net.has_arc(coparent, parent_b));
            }
        }
    }
    println!("acceptance criterion 3: PASS — a cherry was found in 1000/1000 networks");
}

#[test]
fn criterion_4_cluster_containment_mirrors_reachability() {
    let mut pairs = 0usize;
    for i in 0..200 {
        let n = 3 + i % 6;
        let r = (i / 2) % ((n - 2).min(2) + 1);
        let net = gen_ok(NetworkClass::Normal, n, r, mix(i + 13_000));
        let clusters = net.clusters();
        for t in net.vertices() {
            for u in net.vertices() {
                pairs += 1;
                let contained = clusters.bits(u).is_subset(clusters.bits(t));
                let reach = dispset_core::reachable(&net, t, u);
                // A reticulation shares its cluster with its only child but
                // is not reachable from it; every other pair must agree.
                if net.kind(u) == VertexKind::Reticulation && net.children(u) == [t] {
                    assert!(
                        contained && !reach,
                        "acceptance criterion 4: FAIL — net {i}: reticulation v{} above v{}",
                        u.index(),
                        t.index()
                    );
                } else {
                    assert_eq!(
                        contained,
                        reach,
                        "acceptance criterion 4: FAIL — net {i}: C_v{} ⊆ C_v{} is {contained} \
                         but reachability is {reach}",
                        u.index(),
                        t.index()
                    );
                }
            }
        }
    }
    println!(
        "acceptance criterion 4: PASS — containment and reachability agree on \
         {pairs} vertex pairs across 200 normal networks"
    );
}

/// In a displayed tree, the cluster of the sibling subtree of leaf `b`, or
/// None when `b` hangs directly under the root.
fn sibling_cluster(tree: &Network, b: &str) -> Option<LeafSet> {
    let vb = tree.leaf_by_label(b)?;
    let parent = *tree.parents(vb).first()?;
    let sibling = tree.other_child(parent, vb);
    Some(cluster_of(tree, sibling))
}

#[test]
fn criterion_5_displayed_trees_respect_the_reticulated_cherry_dichotomy() {
    let mut inspected = 0usize;
    let mut seed = 0usize;
    while inspected < 200 {
        seed += 1;
        let n = 3 + seed % 6;
        let r = 1 + (seed / 2) % (n - 2).clamp(1, 2);
        let net = gen_ok(NetworkClass::Normal, n, r.min(n - 2), mix(seed + 17_000));

        // Every reading of a reticulated cherry {a, b} in the network.
        let mut readings = Vec::new();
        for pb in net.reticulations().collect::<Vec<_>>() {
            let child = net.children(pb)[0];
            let Some(b) = net.label(child) else { continue };
            for pa in net.parents(pb).to_vec() {
                let other = net.other_child(pa, pb);
                let Some(a) = net.label(other) else { continue };
                let q = net.other_parent(pb, pa);
                readings.push((a.to_string(), b.to_string(), q));
            }
        }
        if readings.is_empty() {
            continue;
        }
        inspected += 1;

        let trees = enumerate_display_set(&net, DEFAULT_MAX_RETICULATIONS).unwrap();
        for (a, b, q) in readings {
            let v_q = visibility_set(&net, q);
            let c_q = cluster_of(&net, q);
            assert!(
                !c_q.contains(&a),
                "acceptance criterion 5: FAIL — net {seed}: leaf {a} below the far parent"
            );
            let c_q_no_b = c_q.without(&b);
            let a_only = LeafSet::singleton(&a);
            let (mut saw_a, mut saw_vq, mut saw_cq) = (false, false, false);
            for tree in &trees {
                let parsed = parse_enewick(tree.as_str()).unwrap();
                let s = sibling_cluster(&parsed, &b)
                    .expect("displayed trees here have at least two leaves");
                let in_band = v_q.is_subset(&s) && s.is_subset(&c_q_no_b);
                assert!(
                    s == a_only || in_band,
                    "acceptance criterion 5: FAIL — net {seed}: sibling set {s} of {b} is \
                     neither {{{a}}} nor between {v_q} and {c_q_no_b} in {tree}"
                );
                saw_a |= s == a_only;
                saw_vq |= s == v_q;
                saw_cq |= s == c_q_no_b;
            }
            assert!(
                saw_a && saw_vq && saw_cq,
                "acceptance criterion 5: FAIL — net {seed}: expected sibling sets \
                 {{{a}}}, {v_q}, {c_q_no_b} to each appear (got {saw_a}/{saw_vq}/{saw_cq})"
            );
        }
    }
    println!(
        "acceptance criterion 5: PASS — the sibling of the reticulation leaf is the \
         co-leaf or sits between visibility and cluster in all trees of 200 networks"
    );
}

#[test]
fn criterion_6_decision_time_scales_quadratically() {
    let points = measure_scaling(&[50, 100, 200, 400], 42, 3);
    for p in &points {
        assert!(
            p.millis < 1000.0,
            "acceptance criterion 6: FAIL — n={} took {:.1} ms (budget 1000 ms)",
            p.n_leaves,
            p.millis
        );
    }
    let exponent = dispset_core::fit_loglog_exponent(&points)
        .expect("four distinct sizes were measured");
    assert!(
        exponent <= 2.3,
        "acceptance criterion 6: FAIL — fitted exponent {exponent:.2} exceeds 2.3"
    );
    let shown: Vec<String> = points
        .iter()
        .map(|p| format!("n={} {:.1}ms", p.n_leaves, p.millis))
        .collect();
    println!(
        "acceptance criterion 6: PASS — {} fit exponent {exponent:.2}",
        shown.join(", ")
    );
}

#[test]
fn criterion_7_serialization_round_trips_and_is_deterministic() {
    for i in 0..1000 {
        let class = if i % 2 == 0 {
            NetworkClass::Normal
        } else {
            NetworkClass::TreeChild
        };
        let n = 3 + i % 6;
        let cap = match class {
            NetworkClass::Normal => (n - 2).min(2),
            NetworkClass::TreeChild => (n - 1).min(3),
        };
        let r = (i / 2) % (cap + 1);
        let net = gen_ok(class, n, r, mix(i + 23_000));
        let text = serialize_enewick(&net);
        let reparsed = parse_enewick(&text).unwrap_or_else(|e| {
            panic!("acceptance criterion 7: FAIL — net {i} does not reparse: {e} in {text}")
        });
        assert_eq!(
            shape(&reparsed),
            shape(&net),
            "acceptance criterion 7: FAIL — net {i} changed shape across the round trip"
        );
        assert_eq!(
            serialize_enewick(&reparsed),
            text,
            "acceptance criterion 7: FAIL — net {i} is not byte-stable across the round trip"
        );
        let again = gen_ok(class, n, r, mix(i + 23_000));
        assert_eq!(
            serialize_enewick(&again),
            text,
            "acceptance criterion 7: FAIL — net {i} differs between two same-seed runs"
        );
    }
    println!(
        "acceptance criterion 7: PASS — 1000 networks round-trip byte-stably and \
         regenerate identically per seed"
    );
}

#[test]
fn criterion_8_worked_micro_instances() {
    let net_a = common::net_a();
    let net_b = common::net_b();
    let net_c = common::net_c();

    let hand_derived = ["((a,b),c);", "(a,(b,c));"];
    let enumerated: Vec<String> = enumerate_display_set(&net_a, DEFAULT_MAX_RETICULATIONS)
        .unwrap()
        .iter()
        .map(|t| t.as_str().to_string())
        .collect();
    assert_eq!(
        enumerated, hand_derived,
        "acceptance criterion 8: FAIL — the two-tree display set is wrong"
    );

    let tree = parse_enewick("(a,(b,c));").unwrap();
    for (left, right, want, name) in [
        (&net_a, &net_a, true, "identity"),
        (&net_c, &net_b, true, "shortcut collapse"),
        (&net_a, &tree, false, "network vs one of its trees"),
    ] {
        let got = fast(left, right);
        assert_eq!(
            got, want,
            "acceptance criterion 8: FAIL — {name} decided {got}, expected {want}"
        );
        assert_eq!(
            oracle(left, right),
            want,
            "acceptance criterion 8: FAIL — {name} oracle disagrees with the expectation"
        );
    }
    println!(
        "acceptance criterion 8: PASS — both worked equivalences hold, the tree \
         counterexample is rejected, and the two-tree display set matches by hand"
    );
}
