//! Parameter sweeps: reduction-vs-channel curves, ack-cost and coding-cost
//! sensitivity, node-count scaling, and the generation-size study.
//!
//! Each sweep point is an independent full optimizer run plus a baseline
//! evaluation; rows are emitted axis-major so output files diff cleanly.

use crate::error::{Error, Result};
use crate::model::{EnergyParams, NetworkConfig, Scheme, validate_config};
use crate::optimizer::{carq_policy, optimize};
use crate::solver::{RoundCostSpec, evaluate_policy, per_accepted_packet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    /// Axis: first node's erasure probability; curves: second node's.
    PSweep,
    /// Axis: node count K; curves: first node's erasure probability, with
    /// the remaining nodes fixed at the template background channel.
    KSweep,
    /// Axis: ack energy ratio α; curves: first node's erasure probability.
    AlphaSweep,
    /// Axis: coding overhead β; curves: first node's erasure probability.
    BetaSweep,
}

impl SweepKind {
    pub fn name(self) -> &'static str {
        match self {
            SweepKind::PSweep => "p_sweep",
            SweepKind::KSweep => "k_sweep",
            SweepKind::AlphaSweep => "alpha_sweep",
            SweepKind::BetaSweep => "beta_sweep",
        }
    }
}

impl std::str::FromStr for SweepKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "p_sweep" => Ok(SweepKind::PSweep),
            "k_sweep" => Ok(SweepKind::KSweep),
            "alpha_sweep" => Ok(SweepKind::AlphaSweep),
            "beta_sweep" => Ok(SweepKind::BetaSweep),
            other => Err(Error::InvalidArgument(format!(
                "unknown sweep kind {other:?}; expected p_sweep, k_sweep, alpha_sweep or beta_sweep"
            ))),
        }
    }
}

/// A grid of configurations: one template plus an axis (primary parameter)
/// and a family of curves (secondary parameter).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub base_config: NetworkConfig,
    pub base_energy: EnergyParams,
    pub axis: Vec<f64>,
    pub curves: Vec<f64>,
}

/// One sweep point: completion energies per accepted packet for both schemes
/// and the percentage saved by coding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub axis: f64,
    pub curve: f64,
    pub e_carq_pp: f64,
    pub e_nc_pp: f64,
    pub reduction_pct: f64,
}

/// Grid helper: i/20 for i in `range`, which represents multiples of 0.05
/// exactly in binary floating point.
fn twentieths(range: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    range.map(|i| i as f64 / 20.0).collect()
}

impl SweepSpec {
    /// The default grids. They bracket the known reference results: the
    /// p-sweep axis spans [0, 0.9] (the family intercepts at p_1 = 0 carry
    /// the headline reduction figures), the α axis reaches 100 where ack
    /// cost dominates, and the β axis spans coding overheads up to 50%.
    pub fn defaults(kind: SweepKind) -> Self {
        match kind {
            SweepKind::PSweep => Self {
                kind,
                base_config: NetworkConfig::new(2, 4, vec![0.0, 0.0]),
                base_energy: EnergyParams::unit(1.0, 0.0),
                axis: twentieths(0..=18),
                curves: vec![0.2, 0.4, 0.6, 0.8],
            },
            SweepKind::KSweep => Self {
                kind,
                base_config: NetworkConfig::new(2, 2, vec![0.8, 0.8]),
                base_energy: EnergyParams::unit(1.0, 0.0),
                axis: vec![2.0, 3.0, 4.0],
                curves: vec![0.2, 0.8],
            },
            SweepKind::AlphaSweep => Self {
                kind,
                base_config: NetworkConfig::new(2, 4, vec![0.0, 0.8]),
                base_energy: EnergyParams::unit(1.0, 0.0),
                axis: vec![0.5, 1.0, 2.0, 5.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0],
                curves: vec![0.2, 0.4, 0.6],
            },
            SweepKind::BetaSweep => Self {
                kind,
                base_config: NetworkConfig::new(2, 4, vec![0.0, 0.8]),
                base_energy: EnergyParams::unit(1.0, 0.0),
                axis: twentieths(0..=10),
                curves: vec![0.0, 0.2, 0.4, 0.6],
            },
        }
    }

    /// The concrete configuration at one (axis, curve) grid point.
    pub fn instantiate(&self, axis: f64, curve: f64) -> Result<(NetworkConfig, EnergyParams)> {
        let mut cfg = self.base_config.clone();
        let mut e = self.base_energy;
        match self.kind {
            SweepKind::PSweep => {
                if cfg.num_nodes != 2 {
                    return Err(Error::InvalidConfig(
                        "p_sweep requires a two-node template".into(),
                    ));
                }
                cfg.erasures = vec![axis, curve];
            }
            SweepKind::AlphaSweep | SweepKind::BetaSweep => {
                if cfg.num_nodes != 2 {
                    return Err(Error::InvalidConfig(format!(
                        "{} requires a two-node template",
                        self.kind.name()
                    )));
                }
                let background = cfg.erasures[1];
                cfg.erasures = vec![curve, background];
                if self.kind == SweepKind::AlphaSweep {
                    e.alpha = axis;
                } else {
                    e.beta = axis;
                }
            }
            SweepKind::KSweep => {
                if axis.fract() != 0.0 || !(1.0..=64.0).contains(&axis) {
                    return Err(Error::InvalidConfig(format!(
                        "k_sweep axis value {axis} is not a node count"
                    )));
                }
                let k = axis as usize;
                let background = *cfg.erasures.last().ok_or_else(|| {
                    Error::InvalidConfig("k_sweep template needs a background erasure".into())
                })?;
                let mut p = vec![background; k];
                p[0] = curve;
                cfg.num_nodes = k;
                cfg.erasures = p;
            }
        }
        validate_config(&cfg, &e)?;
        Ok((cfg, e))
    }

    pub fn validate(&self) -> Result<()> {
        if self.axis.is_empty() {
            return Err(Error::InvalidConfig("sweep axis is empty".into()));
        }
        if !self.axis.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "sweep axis must be strictly increasing".into(),
            ));
        }
        if self.curves.is_empty() {
            return Err(Error::InvalidConfig("sweep needs at least one curve".into()));
        }
        for &axis in &self.axis {
            for &curve in &self.curves {
                self.instantiate(axis, curve)?;
            }
        }
        Ok(())
    }
}

/// Optimizes every grid point and tabulates both schemes' per-packet
/// energies plus the percentage reduction, axis-major.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let mut rows = Vec::with_capacity(spec.axis.len() * spec.curves.len());
    for &axis in &spec.axis {
        for &curve in &spec.curves {
            let (cfg, e) = spec.instantiate(axis, curve)?;
            let coded = optimize(&cfg, &e)?.optimal_value;
            let baseline = evaluate_policy(
                &carq_policy(&cfg)?,
                &cfg,
                &e,
                RoundCostSpec::energy(Scheme::Carq),
            )?
            .initial_value();
            rows.push(SweepRow {
                axis,
                curve,
                e_carq_pp: per_accepted_packet(baseline, &cfg),
                e_nc_pp: per_accepted_packet(coded, &cfg),
                reduction_pct: 100.0 * (baseline - coded) / baseline,
            });
        }
    }
    Ok(rows)
}

/// Percentage reduction as the generation size varies, all else fixed.
pub fn generation_size_study(
    m_values: &[u32],
    cfg: &NetworkConfig,
    e: &EnergyParams,
) -> Result<Vec<(u32, f64)>> {
    let mut rows = Vec::with_capacity(m_values.len());
    for &m in m_values {
        let mut point = cfg.clone();
        point.generation_size = m;
        let red = crate::optimizer::percent_reduction(&point, e)?;
        rows.push((m, red));
    }
    Ok(rows)
}
