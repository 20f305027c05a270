//! Cross-checks the closed-form per-node transition kernel against a
//! brute-force oracle that enumerates every erasure pattern of a round.
//!
//! For a node that still needs `i` degrees of freedom and transmits `c`
//! packets, each of the 2^c success/failure patterns has probability
//! (1-p)^s * p^(c-s) where `s` is the number of delivered packets, and it
//! moves the node to `max(i - s, 0)`. Summing over patterns gives the exact
//! row of the kernel, with no combinatorics or log-space evaluation shared
//! with the implementation under test.

use ncuplink::{joint_transition_prob, node_transition_prob, NetworkConfig};

/// Exact enumeration of the transition row for one node: returns the vector
/// `probs[j]` for j in 0..=i. Only practical for small `c`.
fn enumerate_row(i: u32, c: u32, p: f64) -> Vec<f64> {
    assert!(c <= 20, "enumeration oracle is exponential in c");
    let mut probs = vec![0.0; i as usize + 1];
    for mask in 0u32..(1u32 << c) {
        let s = mask.count_ones();
        let prob = (1.0 - p).powi(s as i32) * p.powi((c - s) as i32);
        let j = i.saturating_sub(s);
        probs[j as usize] += prob;
    }
    probs
}

#[test]
fn kernel_matches_pattern_enumeration() {
    let erasures = [0.0, 0.05, 0.1, 0.2, 0.4, 0.5, 0.75, 0.9, 0.97];
    let mut checked = 0usize;
    for i in 1..=5u32 {
        for c in i..=12u32 {
            for &p in &erasures {
                let oracle = enumerate_row(i, c, p);
                for j in 0..=i {
                    let got = node_transition_prob(i, j, c, p).unwrap();
                    let want = oracle[j as usize];
                    assert!(
                        (got - want).abs() <= 1e-12,
                        "i={i} j={j} c={c} p={p}: got {got}, oracle {want}"
                    );
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn kernel_matches_enumeration_when_need_exceeds_supply() {
    // i > c: the node cannot finish this round, so the absorbing entry of the
    // oracle row stays zero and everything mass sits on j >= i - c
    for &p in &[0.1, 0.5, 0.8] {
        let oracle = enumerate_row(7, 4, p);
        assert_eq!(oracle[0], 0.0);
        assert_eq!(oracle[1], 0.0);
        assert_eq!(oracle[2], 0.0);
        for j in 0..=7u32 {
            let got = node_transition_prob(7, j, 4, p).unwrap();
            assert!((got - oracle[j as usize]).abs() <= 1e-12);
        }
    }
}

#[test]
fn absorbed_node_with_no_transmissions_stays_put() {
    let oracle = enumerate_row(0, 0, 0.3);
    assert_eq!(oracle, vec![1.0]);
    assert_eq!(node_transition_prob(0, 0, 0, 0.3).unwrap(), 1.0);
}

#[test]
fn joint_kernel_is_the_product_of_enumerated_rows() {
    let cfg = NetworkConfig::new(2, 3, vec![0.25, 0.6]);
    let from = [2u32, 3u32];
    let action = [3u32, 4u32];
    let row_a = enumerate_row(from[0], action[0], 0.25);
    let row_b = enumerate_row(from[1], action[1], 0.6);
    for j_a in 0..=from[0] {
        for j_b in 0..=from[1] {
            let got = joint_transition_prob(&from, &[j_a, j_b], &action, &cfg).unwrap();
            let want = row_a[j_a as usize] * row_b[j_b as usize];
            assert!(
                (got - want).abs() <= 1e-12,
                "to=({j_a},{j_b}): got {got}, oracle {want}"
            );
        }
    }
}
