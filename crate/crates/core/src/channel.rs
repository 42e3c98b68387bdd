//! Establishing the shared pairs `a|00> + b|11>` before any transfer.
//!
//! Alice prepares `n + m` pairs, keeps the `A` halves and sends the `B` halves
//! to Bob with `k` decoy qubits mixed in at random positions. Once Bob has
//! everything, Alice reveals where the decoys sit and how she prepared them;
//! any mismatch in Bob's readout aborts the run. Otherwise Bob picks `m`
//! pairs, Alice hands over their `A` halves, and Bob measures each in the
//! eta basis, where an untouched pair always yields `eta_1`. The remaining `n`
//! pairs form the channel.
//!
//! Classical and quantum channels between the parties are authenticated, so
//! the only eavesdropping modelled is an intercept-resend attack on the
//! transmitted sequence.

use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::statevec::{c, labels, MeasurementBasis, Qubit, StateVector};
use crate::stats::Proportion;
use crate::teleport::{channel_state, ChannelParams};

/// `eta_1 = a|00> + b|11>`, `eta_2 = b*|00> - a*|11>`, `eta_3 = a|01> + b|10>`,
/// `eta_4 = b*|01> - a*|10>` on `(A, B)`.
pub fn eta_basis(p: &ChannelParams) -> MeasurementBasis {
    let (a, b, z) = (p.a(), p.b(), c(0.0));
    let vectors = vec![
        vec![a, z, z, b],
        vec![b.conj(), z, z, -a.conj()],
        vec![z, a, b, z],
        vec![z, b.conj(), -a.conj(), z],
    ];
    MeasurementBasis::new(labels(&["A", "B"]), vectors).expect("eta vectors are orthonormal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoyBasis {
    Computational,
    Diagonal,
}

/// A decoy qubit: `|value>` in the computational basis or `|+>`/`|->` in the diagonal one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DecoyState {
    /// Index in the transmitted sequence.
    pub position: usize,
    pub basis: DecoyBasis,
    pub value: u8,
}

impl DecoyState {
    pub fn qubit(&self) -> Qubit {
        match (self.basis, self.value) {
            (DecoyBasis::Computational, 0) => Qubit::zero(),
            (DecoyBasis::Computational, _) => Qubit::one(),
            (DecoyBasis::Diagonal, 0) => Qubit::plus(),
            (DecoyBasis::Diagonal, _) => Qubit::minus(),
        }
    }

    fn measurement(&self) -> MeasurementBasis {
        let (zero, one) = match self.basis {
            DecoyBasis::Computational => (Qubit::zero(), Qubit::one()),
            DecoyBasis::Diagonal => (Qubit::plus(), Qubit::minus()),
        };
        MeasurementBasis::from_qubits("B".into(), &zero, &one).expect("orthonormal")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Eavesdropper {
    #[default]
    None,
    /// Measures every transmitted qubit in the computational basis and resends the result.
    InterceptResend,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SharingConfig {
    /// Pairs kept as the channel.
    pub n: usize,
    /// Pairs sacrificed to the eta test.
    pub m: usize,
    /// Decoy qubits.
    pub k: usize,
    pub eavesdropper: Eavesdropper,
    pub seed: u64,
}

impl SharingConfig {
    pub fn validate(&self) -> Result<()> {
        for (v, name) in [(self.n, "n"), (self.m, "m"), (self.k, "k")] {
            if v == 0 {
                return Err(Error::ZeroCount(name));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectionStage {
    Decoy,
    Eta,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SharingReport {
    pub decoy_error_count: usize,
    pub decoy_tests: usize,
    /// One-based eta outcome per sacrificed pair; empty when the decoy check aborted.
    pub eta_outcomes: Vec<u8>,
    pub accepted: bool,
    pub rejection_stage: Option<RejectionStage>,
    /// Fidelity of each kept pair to the channel state; empty unless accepted.
    pub kept_fidelities: Vec<f64>,
}

/// `amount` distinct indices below `len`, ascending.
fn chosen<R: Rng + ?Sized>(rng: &mut R, len: usize, amount: usize) -> Vec<usize> {
    let mut v = sample(rng, len, amount).into_vec();
    v.sort_unstable();
    v
}

/// Runs the sharing procedure once. All randomness comes from `cfg.seed`.
pub fn share_channel(p: &ChannelParams, cfg: &SharingConfig) -> Result<SharingReport> {
    cfg.validate()?;
    let mut rng = rng::seeded(cfg.seed);
    let pairs_total = cfg.n + cfg.m;
    let len = pairs_total + cfg.k;
    let ideal = channel_state(p);

    let mut decoy_at = vec![None; len];
    for position in chosen(&mut rng, len, cfg.k) {
        let basis = if rng.random::<bool>() {
            DecoyBasis::Diagonal
        } else {
            DecoyBasis::Computational
        };
        decoy_at[position] = Some(DecoyState {
            position,
            basis,
            value: u8::from(rng.random::<bool>()),
        });
    }

    // transmission
    let z = MeasurementBasis::computational(labels(&["B"]))?;
    let mut pairs = Vec::with_capacity(pairs_total);
    let mut decoys = Vec::with_capacity(cfg.k);
    for slot in &decoy_at {
        match slot {
            Some(d) => {
                let mut q = d.qubit().to_state("B");
                if cfg.eavesdropper == Eavesdropper::InterceptResend {
                    let seen = q.measure_sampled(&z, &mut rng)?.outcome;
                    q = StateVector::basis_state(labels(&["B"]), seen)?;
                }
                decoys.push((*d, q));
            }
            None => {
                let mut pair = ideal.clone();
                if cfg.eavesdropper == Eavesdropper::InterceptResend {
                    pair = pair
                        .measure_sampled(&z, &mut rng)?
                        .state
                        .expect("sampled branches are possible");
                }
                pairs.push(pair);
            }
        }
    }

    let mut decoy_error_count = 0;
    for (d, q) in &decoys {
        if q.measure_sampled(&d.measurement(), &mut rng)?.outcome != usize::from(d.value) {
            decoy_error_count += 1;
        }
    }
    if decoy_error_count > 0 {
        return Ok(SharingReport {
            decoy_error_count,
            decoy_tests: cfg.k,
            eta_outcomes: Vec::new(),
            accepted: false,
            rejection_stage: Some(RejectionStage::Decoy),
            kept_fidelities: Vec::new(),
        });
    }

    let eta = eta_basis(p);
    let mut tested = vec![false; pairs_total];
    for i in chosen(&mut rng, pairs_total, cfg.m) {
        tested[i] = true;
    }
    let mut eta_outcomes = Vec::with_capacity(cfg.m);
    let mut kept_fidelities = Vec::with_capacity(cfg.n);
    for (pair, t) in pairs.iter().zip(&tested) {
        if *t {
            eta_outcomes.push(pair.measure_sampled(&eta, &mut rng)?.outcome as u8 + 1);
        } else {
            kept_fidelities.push(pair.fidelity(&ideal)?);
        }
    }
    let accepted = eta_outcomes.iter().all(|&o| o == 1);
    Ok(SharingReport {
        decoy_error_count,
        decoy_tests: cfg.k,
        eta_outcomes,
        accepted,
        rejection_stage: (!accepted).then_some(RejectionStage::Eta),
        kept_fidelities: if accepted { kept_fidelities } else { Vec::new() },
    })
}

/// `1 - (3/4)^k`: chance that computational-basis intercept-resend trips at
/// least one of `k` decoys.
pub fn detection_probability(k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroCount("k"));
    }
    Ok(1.0 - 0.75f64.powi(k as i32))
}

/// Chance that one eta test of an intercepted pair deviates from `eta_1`.
pub fn eta_deviation_probability(p: &ChannelParams) -> f64 {
    2.0 * p.a2() * p.b2()
}

/// Outcome counts over `runs` sharing attempts; run `r` uses
/// `trial_seed(cfg.seed, r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SharingStatistics {
    pub rejected: Proportion,
    pub rejected_at_decoys: Proportion,
}

pub fn sharing_statistics(p: &ChannelParams, cfg: &SharingConfig, runs: u64) -> Result<SharingStatistics> {
    cfg.validate()?;
    let stages: Vec<Option<RejectionStage>> = (0..runs)
        .into_par_iter()
        .map(|r| {
            let run = SharingConfig {
                seed: rng::trial_seed(cfg.seed, r),
                ..*cfg
            };
            share_channel(p, &run).map(|rep| rep.rejection_stage)
        })
        .collect::<Result<_>>()?;
    Ok(SharingStatistics {
        rejected: Proportion::from_flags(stages.iter().map(Option::is_some)),
        rejected_at_decoys: Proportion::from_flags(stages.iter().map(|s| *s == Some(RejectionStage::Decoy))),
    })
}
