//! Transition probabilities of the absorbing chain.
//!
//! Per node and round: out of `c` transmitted coded packets each one is
//! independently erased with probability `p`, and the node's outstanding dof
//! drops by the number of surviving packets (floored at zero). Nodes fade
//! independently, so joint transition probabilities factor per node.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::model::NetworkConfig;

/// Successor entries below this probability are dropped from
/// [`successor_distribution`] output (the self-loop is always kept).
pub const MIN_SUCCESSOR_PROB: f64 = 1e-15;

const LN_FACT_TABLE: usize = 4096;

fn ln_factorial(n: u64) -> f64 {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0.0f64; LN_FACT_TABLE];
        let mut acc = 0.0f64;
        for (k, slot) in t.iter_mut().enumerate().skip(1) {
            acc += (k as f64).ln();
            *slot = acc;
        }
        t
    });
    if (n as usize) < table.len() {
        table[n as usize]
    } else {
        // Stirling series; relative error far below 1e-12 at this magnitude.
        let x = n as f64;
        (x + 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
            - 1.0 / (360.0 * x * x * x)
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// P(exactly `s` of `c` packets survive a channel with erasure probability `p`).
///
/// Evaluated in log space so it stays accurate for packet counts in the
/// hundreds; exact at the p = 0 boundary.
fn survivors_pmf(c: u32, s: u32, p: f64) -> f64 {
    if s > c {
        return 0.0;
    }
    if p == 0.0 {
        return if s == c { 1.0 } else { 0.0 };
    }
    let mut ln = ln_choose(c as u64, s as u64);
    if s > 0 {
        // ln(1−p) via ln_1p keeps precision when p is small
        ln += s as f64 * (-p).ln_1p();
    }
    if c > s {
        ln += (c - s) as f64 * p.ln();
    }
    ln.exp().clamp(0.0, 1.0)
}

/// P(at least `i` of `c` packets survive), with `i ≥ 1`.
///
/// Sums whichever side of the distribution has fewer terms; the complement
/// branch is clamped to [0, 1] so rows stay exactly stochastic.
fn survivors_tail(i: u32, c: u32, p: f64) -> f64 {
    debug_assert!(i >= 1);
    if c < i {
        return 0.0;
    }
    if c - i < i {
        (i..=c).map(|s| survivors_pmf(c, s, p)).sum()
    } else {
        let below: f64 = (0..i).map(|s| survivors_pmf(c, s, p)).sum();
        (1.0 - below).clamp(0.0, 1.0)
    }
}

/// Probability that a node needing `i` dof still needs `j` after a round of
/// `c` transmitted packets on a channel with erasure probability `p`.
///
/// `j = 0` absorbs all outcomes with `i` or more survivors; `j ≥ 1` requires
/// exactly `i − j` survivors.
pub fn node_transition_prob(i: u32, j: u32, c: u32, p: f64) -> Result<f64> {
    if j > i {
        return Err(Error::InvalidArgument(format!(
            "dof cannot grow: j = {j} > i = {i}"
        )));
    }
    if !p.is_finite() || !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("p = {p} outside [0, 1)")));
    }
    if i == 0 && c != 0 {
        return Err(Error::InvalidArgument(
            "a node with no outstanding dof transmits nothing".into(),
        ));
    }
    if i == 0 {
        return Ok(1.0);
    }
    if j == 0 {
        Ok(survivors_tail(i, c, p))
    } else {
        let needed = i - j;
        if needed > c { Ok(0.0) } else { Ok(survivors_pmf(c, needed, p)) }
    }
}

/// One node's full outgoing transition row for a round.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTransitionRow {
    pub i: u32,
    pub c: u32,
    pub p: f64,
    /// `probs[j]` = P(i → j), for j = 0..=i.
    pub probs: Vec<f64>,
}

impl NodeTransitionRow {
    pub fn new(i: u32, c: u32, p: f64) -> Result<Self> {
        let probs = (0..=i)
            .map(|j| node_transition_prob(i, j, c, p))
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self { i, c, p, probs })
    }

    /// Probability of staying at `i` (all transmitted packets erased).
    pub fn self_loop(&self) -> f64 {
        self.probs[self.i as usize]
    }
}

fn check_joint_args(from: &[u32], action: &[u32], cfg: &NetworkConfig) -> Result<()> {
    if from.len() != cfg.num_nodes || action.len() != cfg.num_nodes {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: state arity {}, action arity {}, config has {} nodes",
            from.len(),
            action.len(),
            cfg.num_nodes
        )));
    }
    for (k, (&i, &c)) in from.iter().zip(action).enumerate() {
        if i == 0 && c != 0 {
            return Err(Error::InvalidArgument(format!(
                "node {}: finished but transmitting {c} packets",
                k + 1
            )));
        }
        if i >= 1 && c < i {
            return Err(Error::InvalidArgument(format!(
                "node {}: action {c} below outstanding dof {i}",
                k + 1
            )));
        }
    }
    Ok(())
}

/// P(I → J) in one round under `action`: the product of the per-node
/// transition probabilities (losses are independent across nodes).
pub fn joint_transition_prob(
    from: &[u32],
    to: &[u32],
    action: &[u32],
    cfg: &NetworkConfig,
) -> Result<f64> {
    check_joint_args(from, action, cfg)?;
    if to.len() != from.len() {
        return Err(Error::InvalidArgument(format!(
            "dimension mismatch: from arity {}, to arity {}",
            from.len(),
            to.len()
        )));
    }
    let mut prob = 1.0;
    for k in 0..from.len() {
        if to[k] > from[k] {
            return Err(Error::InvalidArgument(format!(
                "node {}: dof cannot grow from {} to {}",
                k + 1,
                from[k],
                to[k]
            )));
        }
        prob *= node_transition_prob(from[k], to[k], action[k], cfg.erasures[k])?;
    }
    Ok(prob)
}

/// All reachable successors of `from` under `action`, in lexicographic state
/// order, with entries below [`MIN_SUCCESSOR_PROB`] pruned (except the
/// self-loop, which the solver always needs).
pub fn successor_distribution(
    from: &[u32],
    action: &[u32],
    cfg: &NetworkConfig,
) -> Result<Vec<(Vec<u32>, f64)>> {
    check_joint_args(from, action, cfg)?;
    let rows = from
        .iter()
        .zip(action)
        .zip(&cfg.erasures)
        .map(|((&i, &c), &p)| NodeTransitionRow::new(i, c, p))
        .collect::<Result<Vec<_>>>()?;

    let mut out = Vec::new();
    let mut j = vec![0u32; from.len()];
    loop {
        let prob: f64 = j.iter().zip(&rows).map(|(&jk, row)| row.probs[jk as usize]).product();
        let is_self = j == from;
        if prob >= MIN_SUCCESSOR_PROB || is_self {
            out.push((j.clone(), prob));
        }
        // odometer over the down-set {0..=i_1} × … × {0..=i_K}
        let mut pos = j.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            if j[pos] < from[pos] {
                j[pos] += 1;
                j[pos + 1..].fill(0);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn single_packet_cases() {
        assert_eq!(node_transition_prob(1, 1, 1, 0.4).unwrap(), 0.4);
        assert_eq!(node_transition_prob(0, 0, 0, 0.7).unwrap(), 1.0);
        assert!(close(node_transition_prob(1, 0, 1, 0.4).unwrap(), 0.6, 1e-15));
    }

    #[test]
    fn three_packet_row_matches_hand_enumeration() {
        // i=2, c=3, p=0.2: exactly-one-survivor patterns are 3·0.8·0.2²
        assert!(close(node_transition_prob(2, 1, 3, 0.2).unwrap(), 0.096, 1e-13));
        // ≥2 survivors: 3·0.8²·0.2 + 0.8³
        assert!(close(node_transition_prob(2, 0, 3, 0.2).unwrap(), 0.896, 1e-13));
        // all erased
        assert!(close(node_transition_prob(2, 2, 3, 0.2).unwrap(), 0.008, 1e-13));
    }

    #[test]
    fn row_is_stochastic_and_nonnegative() {
        for &(i, c, p) in &[(1u32, 1u32, 0.5), (3, 7, 0.9), (5, 5, 0.01), (4, 40, 0.97), (2, 0, 0.3)] {
            let row = NodeTransitionRow::new(i, c, p).unwrap();
            assert_eq!(row.probs.len(), i as usize + 1);
            assert!(row.probs.iter().all(|&q| (0.0..=1.0).contains(&q)));
            let sum: f64 = row.probs.iter().sum();
            assert!((sum - 1.0).abs() <= 1e-12, "i={i} c={c} p={p}: sum {sum}");
        }
    }

    #[test]
    fn fewer_packets_than_dof() {
        // c < i can never clear the node: the j=0 entry is exactly 0
        assert_eq!(node_transition_prob(3, 0, 2, 0.5).unwrap(), 0.0);
        // with c=2, landing at j=1 means both packets survived
        assert!(close(node_transition_prob(3, 1, 2, 0.5).unwrap(), 0.25, 1e-15));
    }

    #[test]
    fn lossless_channel() {
        let row = NodeTransitionRow::new(3, 5, 0.0).unwrap();
        assert_eq!(row.probs, vec![1.0, 0.0, 0.0, 0.0]);
        let row = NodeTransitionRow::new(3, 2, 0.0).unwrap();
        // both packets always arrive: 3 dof drop to 1
        assert_eq!(row.probs, vec![0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn argument_errors() {
        assert!(node_transition_prob(1, 2, 1, 0.4).is_err());
        assert!(node_transition_prob(1, 1, 1, 1.0).is_err());
        assert!(node_transition_prob(1, 1, 1, -0.1).is_err());
        assert!(node_transition_prob(0, 0, 3, 0.4).is_err());
    }

    #[test]
    fn large_count_stays_accurate() {
        // c = 200, p = 0.9: P(0 survivors) = 0.9^200
        let row = NodeTransitionRow::new(1, 200, 0.9).unwrap();
        let expect = 0.9f64.powi(200);
        assert!(close(row.probs[1], expect, 1e-12), "{} vs {expect}", row.probs[1]);
        let sum: f64 = row.probs.iter().sum();
        assert!((sum - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn joint_prob_factorizes() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        // second node already absorbed
        let p = joint_transition_prob(&[1, 0], &[0, 0], &[1, 0], &cfg).unwrap();
        assert!(close(p, 0.8, 1e-15));
        // joint self-loop is the product of per-node self-loops
        let p = joint_transition_prob(&[1, 1], &[1, 1], &[1, 1], &cfg).unwrap();
        assert!(close(p, 0.08, 1e-15));
        let p = joint_transition_prob(&[2, 1], &[1, 0], &[3, 1], &cfg).unwrap();
        assert!(close(p, 0.096 * 0.6, 1e-13));
    }

    #[test]
    fn joint_prob_rejects_bad_args() {
        let cfg = NetworkConfig::new(2, 4, vec![0.2, 0.4]);
        assert!(joint_transition_prob(&[1, 1], &[1, 2], &[1, 1], &cfg).is_err());
        assert!(joint_transition_prob(&[1, 1], &[0, 0], &[1], &cfg).is_err());
        assert!(joint_transition_prob(&[2, 1], &[1, 0], &[1, 1], &cfg).is_err());
    }

    #[test]
    fn successors_enumerate_the_down_set() {
        let cfg = NetworkConfig::new(2, 4, vec![0.0, 0.0]);
        let succ = successor_distribution(&[1, 1], &[1, 1], &cfg).unwrap();
        // lossless: everything lands on (0,0), but the self-loop entry is kept
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0], (vec![0, 0], 1.0));
        assert_eq!(succ[1].0, vec![1, 1]);
        assert_eq!(succ[1].1, 0.0);

        let cfg = NetworkConfig::new(2, 4, vec![0.5, 0.4]);
        let succ = successor_distribution(&[1, 0], &[1, 0], &cfg).unwrap();
        assert_eq!(succ.len(), 2);
        assert_eq!(succ[0].0, vec![0, 0]);
        assert_eq!(succ[1].0, vec![1, 0]);
        assert!(close(succ[0].1, 0.5, 1e-15));
        assert!(close(succ[1].1, 0.5, 1e-15));
    }

    #[test]
    fn successor_mass_sums_to_one() {
        let cfg = NetworkConfig::new(3, 4, vec![0.2, 0.5, 0.8]);
        let succ = successor_distribution(&[4, 2, 3], &[5, 2, 4], &cfg).unwrap();
        let total: f64 = succ.iter().map(|(_, q)| q).sum();
        assert!((total - 1.0).abs() <= 1e-10, "total {total}");
        // self-loop mass matches the closed form Π p_k^{c_k}
        let self_loop = succ.iter().find(|(j, _)| j == &[4, 2, 3]).unwrap().1;
        let expect = 0.2f64.powi(5) * 0.5f64.powi(2) * 0.8f64.powi(4);
        assert!(close(self_loop, expect, 1e-12));
    }
}
