//! Scaling measurements for the equivalence decision on generated pairs.

use std::time::Instant;

use crate::equivalence::same_display_set;
use crate::gen::{insert_trivial_shortcut, random_network, GenSpec};
use crate::network::Network;

/// Extra trivial shortcuts grafted onto the second half of a generated pair.
const PAIR_INSERTIONS: usize = 3;

/// One measured size: leaf count and the fastest observed run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchPoint {
    pub n_leaves: usize,
    pub millis: f64,
}

/// Deterministically builds a pair with equal display sets: a random normal
/// network and a copy carrying a few extra trivial shortcuts.  Falls back to
/// nearby derived seeds when rejection sampling runs dry, so every size
/// yields a pair.
pub fn equivalent_pair(n_leaves: usize, seed: u64) -> (Network, Network) {
    let n_reticulations = (n_leaves / 10).max(1);
    for attempt in 0..64u64 {
        let base = seed.wrapping_add(attempt.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let Ok(left) = random_network(GenSpec::normal(n_leaves, n_reticulations, base)) else {
            continue;
        };
        let mut right = left.clone();
        let mut ok = true;
        for i in 0..PAIR_INSERTIONS {
            match insert_trivial_shortcut(&right, base.wrapping_add(i as u64 + 1)) {
                Ok(next) => right = next,
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            return (left, right);
        }
    }
    panic!("no equivalent pair for {n_leaves} leaves after 64 attempts");
}

/// Fastest of `reps` decision runs, in milliseconds.  The pair must be
/// equivalent — a `no` verdict here means the harness itself is broken.
pub fn time_decision(first: &Network, second: &Network, reps: usize) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let decision = same_display_set(first, second).expect("generated pair is well-formed");
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        assert!(decision.equivalent, "generated pair must stay equivalent");
        best = best.min(elapsed);
    }
    best
}

/// Times one generated pair per size.
pub fn measure_scaling(sizes: &[usize], seed: u64, reps: usize) -> Vec<BenchPoint> {
    sizes
        .iter()
        .map(|&n| {
            let (first, second) = equivalent_pair(n, seed.wrapping_add(n as u64));
            BenchPoint {
                n_leaves: n,
                millis: time_decision(&first, &second, reps),
            }
        })
        .collect()
}

/// Least-squares slope of log(millis) against log(leaves): the empirical
/// scaling exponent.  `None` when fewer than two distinct sizes were
/// measured.
pub fn fit_loglog_exponent(points: &[BenchPoint]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n_leaves as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.millis.max(1e-9).ln()).collect();
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let var_x: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    if var_x == 0.0 {
        return None;
    }
    let cov: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    Some(cov / var_x)
}
