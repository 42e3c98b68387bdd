//! Probabilistic teleportation over the partially entangled pair
//! `a|00>_AB + b|11>_AB`.
//!
//! Alice Bell-measures her input qubit `C` together with her half `A` of the
//! pair and announces the outcome `i`. Bob appends an ancilla `m` in `|0>`,
//! applies the two-qubit correction `U_i` to `(B, m)` and reads `m` in the Z
//! basis. Outcome `m = 0` leaves `B` exactly in the input state; it occurs with
//! probability `|b|^2 / 2` per Bell outcome, `2|b|^2` in total.

use std::fmt;

use num_complex::Complex64 as C64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rng;
use crate::stats::Proportion;
use crate::statevec::{c, fidelity, labels, GateMatrix, Label, MeasurementBasis, Qubit, StateVector, ALGEBRA_TOL};

/// The teleported qubit `alpha|0> + beta|1>`.
pub type InputQubit = Qubit;

/// Coefficients of the shared pair `a|00> + b|11>`, with `|a| > |b| > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChannelParams {
    a: C64,
    b: C64,
}

impl ChannelParams {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        if ![a.re, a.im, b.re, b.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = a.norm_sqr() + b.norm_sqr();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidChannel(format!(
                "|a|^2 + |b|^2 = {norm}, expected 1"
            )));
        }
        if b.norm() <= 0.0 {
            return Err(Error::InvalidChannel("|b| > 0 violated".into()));
        }
        if a.norm() <= b.norm() {
            return Err(Error::InvalidChannel(format!(
                "|a| > |b| violated (|a| = {}, |b| = {})",
                a.norm(),
                b.norm()
            )));
        }
        Ok(Self { a, b })
    }

    /// Real channel with `b = sqrt(b2)`, `a = sqrt(1 - b2)`; needs `0 < b2 < 0.5`.
    pub fn from_b2(b2: f64) -> Result<Self> {
        if !b2.is_finite() || b2 <= 0.0 || b2 >= 0.5 {
            return Err(Error::InvalidChannel(format!(
                "b^2 = {b2} outside (0, 0.5); |a| > |b| > 0 violated"
            )));
        }
        Self::new(c((1.0 - b2).sqrt()), c(b2.sqrt()))
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn a2(&self) -> f64 {
        self.a.norm_sqr()
    }

    pub fn b2(&self) -> f64 {
        self.b.norm_sqr()
    }

    /// `2|b|^2`, the probability that Bob extracts the qubit.
    pub fn success_probability(&self) -> f64 {
        2.0 * self.b2()
    }
}

/// Result of Alice's Bell measurement, `psi_1 .. psi_4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    /// `(|00> + |11>) / sqrt 2`
    Psi1,
    /// `(|00> - |11>) / sqrt 2`
    Psi2,
    /// `(|01> + |10>) / sqrt 2`
    Psi3,
    /// `(|01> - |10>) / sqrt 2`
    Psi4,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 4] = [Self::Psi1, Self::Psi2, Self::Psi3, Self::Psi4];

    /// One-based index.
    pub fn index(self) -> u8 {
        self.position() as u8 + 1
    }

    /// Zero-based position in [`MeasurementBasis::bell`].
    pub fn position(self) -> usize {
        self as usize
    }

    pub fn from_index(i: u8) -> Option<Self> {
        Self::ALL.get(usize::from(i).checked_sub(1)?).copied()
    }

    pub(crate) fn from_position(p: usize) -> Self {
        Self::ALL[p]
    }
}

impl fmt::Display for BellOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "psi{}", self.index())
    }
}

impl Serialize for BellOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.index())
    }
}

/// Operation Bob applies after hearing Alice's announcement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    /// Two-qubit `U_i` on `(B, m)`.
    Unitary(BellOutcome),
    /// Identity on `B` (computational-basis decoding).
    PauliI,
    /// Bit flip on `B` (computational-basis decoding).
    PauliX,
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Unitary(i) => write!(f, "U{}", i.index()),
            Self::PauliI => f.write_str("I"),
            Self::PauliX => f.write_str("X"),
        }
    }
}

impl Serialize for Correction {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `a|00>_AB + b|11>_AB`.
pub fn channel_state(p: &ChannelParams) -> StateVector {
    StateVector::new(labels(&["A", "B"]), vec![p.a, c(0.0), c(0.0), p.b])
        .expect("channel invariants imply a normalized state")
}

/// One term of the Bell-basis expansion of the three-particle state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BellBranch {
    pub outcome: BellOutcome,
    pub probability: f64,
    /// Collapsed state of `B`, normalized.
    pub state: Qubit,
}

/// Unnormalized components of `B` in `|zeta>_C |phi>_AB = sum_i |psi_i>_CA |phi_i>_B`.
///
/// The `psi_4` component is `-(beta a|0> - alpha b|1>) / sqrt 2`; the sign is
/// needed for the sum to reproduce the product state.
pub fn bell_components(p: &ChannelParams, q: &InputQubit) -> [[C64; 2]; 4] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (a, b, al, be) = (p.a, p.b, q.alpha, q.beta);
    [
        [al * a * h, be * b * h],
        [al * a * h, -be * b * h],
        [be * a * h, al * b * h],
        [-be * a * h, al * b * h],
    ]
}

/// Closed-form Bell outcome probabilities and collapsed states of `B`.
pub fn bell_decompose(p: &ChannelParams, q: &InputQubit) -> [BellBranch; 4] {
    let (a, b, al, be) = (p.a, p.b, q.alpha, q.beta);
    let pr12 = 0.5 * ((al * a).norm_sqr() + (be * b).norm_sqr());
    let pr34 = 0.5 * ((be * a).norm_sqr() + (al * b).norm_sqr());
    let norm = |pr: f64| (2.0 * pr).sqrt();
    let states = [
        (al * a, be * b, pr12),
        (al * a, -be * b, pr12),
        (be * a, al * b, pr34),
        (be * a, -al * b, pr34),
    ];
    std::array::from_fn(|k| {
        let (x, y, pr) = states[k];
        BellBranch {
            outcome: BellOutcome::from_position(k),
            probability: pr,
            // pr > 0 because |a| > |b| > 0
            state: Qubit::normalized(x / norm(pr), y / norm(pr)).expect("nonzero Bell branch"),
        }
    })
}

/// `A(a, b) = [[b/a, s], [s, -conj(b/a)]]` with `s = sqrt(1 - |b|^2/|a|^2)`.
///
/// The conjugate keeps the block unitary when `b/a` is complex; for real
/// coefficients it is the familiar `[[b/a, s], [s, -b/a]]`.
pub fn a_block(p: &ChannelParams) -> GateMatrix {
    let r = p.b / p.a;
    let s = c((1.0 - p.b2() / p.a2()).sqrt());
    GateMatrix::from_rows([[r, s], [s, -r.conj()]])
}

/// Bob's correction `U_i` on `(B, m)`, `B` being the most significant index bit.
pub fn correction_unitary(i: BellOutcome, p: &ChannelParams) -> GateMatrix {
    let a = a_block(p);
    let z = GateMatrix::pauli_z();
    let o = GateMatrix::zeros(2);
    match i {
        BellOutcome::Psi1 => GateMatrix::from_blocks(&a, &o, &o, &z),
        BellOutcome::Psi2 => GateMatrix::from_blocks(&a, &o, &o, &z.scale(c(-1.0))),
        BellOutcome::Psi3 => GateMatrix::from_blocks(&o, &z, &a, &o),
        BellOutcome::Psi4 => GateMatrix::from_blocks(&o, &z.scale(c(-1.0)), &a, &o),
    }
}

/// `(V1, V2, V3)` with `U1 = V1 U2 = V2 U3 = V3 U4`.
pub fn v_matrices() -> [GateMatrix; 3] {
    let id = GateMatrix::identity(2);
    let neg = id.scale(c(-1.0));
    let o = GateMatrix::zeros(2);
    [
        GateMatrix::from_blocks(&id, &o, &o, &neg),
        GateMatrix::from_blocks(&o, &id, &id, &o),
        GateMatrix::from_blocks(&o, &id, &neg, &o),
    ]
}

/// `W_ji` with `U_j = W_ji U_i` for every channel.
pub fn w_entry(j: BellOutcome, i: BellOutcome) -> GateMatrix {
    use BellOutcome::*;
    let [v1, v2, v3] = v_matrices();
    let neg = |m: GateMatrix| m.scale(c(-1.0));
    match (j, i) {
        _ if j == i => GateMatrix::identity(4),
        (Psi1, Psi2) | (Psi2, Psi1) => v1,
        (Psi1, Psi3) | (Psi3, Psi1) => v2,
        (Psi1, Psi4) => v3,
        (Psi2, Psi3) => &v1 * &v2,
        (Psi2, Psi4) => &v1 * &v3,
        (Psi3, Psi2) => &v2 * &v1,
        (Psi3, Psi4) => &v2 * &v3,
        (Psi4, Psi1) => neg(v3),
        (Psi4, Psi2) => neg(&v3 * &v1),
        (Psi4, Psi3) => neg(&v3 * &v2),
        _ => unreachable!("diagonal handled above"),
    }
}

/// One leaf of the protocol's outcome tree.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TreeBranch {
    pub bell: BellOutcome,
    pub bell_probability: f64,
    pub m: u8,
    /// Joint probability of `(bell, m)`.
    pub probability: f64,
    /// Terminal state of `B`; `None` if the branch cannot occur.
    pub bob_state: Option<Qubit>,
    pub fidelity: Option<f64>,
}

/// All eight `(Bell outcome, m)` leaves of an honest run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeTree {
    pub channel: ChannelParams,
    pub input: InputQubit,
    pub branches: Vec<TreeBranch>,
}

impl OutcomeTree {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability that `m` reads 0.
    pub fn success_probability(&self) -> f64 {
        self.branches.iter().filter(|b| b.m == 0).map(|b| b.probability).sum()
    }

    pub fn branch(&self, bell: BellOutcome, m: u8) -> &TreeBranch {
        self.branches
            .iter()
            .find(|b| b.bell == bell && b.m == m)
            .expect("tree holds every (bell, m) pair")
    }
}

fn ancilla() -> StateVector {
    StateVector::basis_state(labels(&["m"]), 0).expect("one-qubit register")
}

fn bob_labels() -> [Label; 2] {
    [Label::from("B"), Label::from("m")]
}

/// The three-particle register `|zeta>_C (x) |phi>_AB`.
pub fn initial_state(p: &ChannelParams, q: &InputQubit) -> StateVector {
    q.to_state("C")
        .tensor(&channel_state(p))
        .expect("disjoint labels")
}

/// Bob's `(B, m)` register after applying `U_announced` to `B`'s collapsed state.
pub(crate) fn bob_after_correction(b_state: &StateVector, announced: BellOutcome, p: &ChannelParams) -> Result<StateVector> {
    b_state
        .tensor(&ancilla())?
        .apply_gate(&correction_unitary(announced, p), &bob_labels())
}

/// Enumerates every branch of an honest run by direct state-vector simulation.
pub fn run_analytic(p: &ChannelParams, q: &InputQubit) -> Result<OutcomeTree> {
    let bell = MeasurementBasis::bell("C".into(), "A".into());
    let m_basis = MeasurementBasis::computational(vec!["m".into()])?;
    let mut branches = Vec::with_capacity(8);
    for br in initial_state(p, q).measure(&bell)? {
        let outcome = BellOutcome::from_position(br.outcome);
        let Some(b_state) = &br.remainder else {
            branches.extend((0..2).map(|m| TreeBranch {
                bell: outcome,
                bell_probability: 0.0,
                m,
                probability: 0.0,
                bob_state: None,
                fidelity: None,
            }));
            continue;
        };
        let bm = bob_after_correction(b_state, outcome, p)?;
        for mb in bm.measure(&m_basis)? {
            let bob_state = mb.remainder.as_ref().map(Qubit::from_state).transpose()?;
            branches.push(TreeBranch {
                bell: outcome,
                bell_probability: br.probability,
                m: mb.outcome as u8,
                probability: br.probability * mb.probability,
                bob_state,
                fidelity: bob_state.map(|s| fidelity(&s, q)),
            });
        }
    }
    Ok(OutcomeTree {
        channel: *p,
        input: *q,
        branches,
    })
}

/// Record of one sampled protocol run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transcript {
    pub seed: u64,
    pub channel: ChannelParams,
    pub input: InputQubit,
    pub bm_outcome: BellOutcome,
    pub bm_probability: f64,
    pub correction_applied: Correction,
    pub m_outcome: u8,
    pub success: bool,
    /// Bob's qubit when `m` reads 0.
    pub bob_state: Option<Qubit>,
    /// Fidelity of `bob_state` to the input; 0 on failure.
    pub recovered_fidelity: f64,
}

/// Alice's Bell measurement, drawn with one variate from `rng`.
pub(crate) fn sample_bell<R: Rng + ?Sized>(
    p: &ChannelParams,
    q: &InputQubit,
    rng: &mut R,
) -> Result<(BellOutcome, f64, StateVector)> {
    sample_bell_from(&initial_state(p, q), rng)
}

/// Bell measurement of `C, A` on an arbitrary register holding them.
pub(crate) fn sample_bell_from<R: Rng + ?Sized>(
    state: &StateVector,
    rng: &mut R,
) -> Result<(BellOutcome, f64, StateVector)> {
    let bell = MeasurementBasis::bell("C".into(), "A".into());
    let br = state.measure_sampled(&bell, rng)?;
    let b_state = br.remainder.expect("sampled branches are possible");
    Ok((BellOutcome::from_position(br.outcome), br.probability, b_state))
}

/// One run: the Bell draw consumes the first variate of `rng`, the ancilla
/// readout the second.
pub fn run_with_rng<R: Rng + ?Sized>(
    p: &ChannelParams,
    q: &InputQubit,
    seed: u64,
    rng: &mut R,
) -> Result<Transcript> {
    run_from_state(&initial_state(p, q), p, q, seed, rng)
}

/// A run whose `C, A, B` register was prepared by the caller, e.g. after a
/// tampering operation on `A`. Extra qubits ride along in Bob's remainder.
pub(crate) fn run_from_state<R: Rng + ?Sized>(
    state: &StateVector,
    p: &ChannelParams,
    q: &InputQubit,
    seed: u64,
    rng: &mut R,
) -> Result<Transcript> {
    let (outcome, bm_probability, b_state) = sample_bell_from(state, rng)?;
    let bm = bob_after_correction(&b_state, outcome, p)?;
    let m_basis = MeasurementBasis::computational(vec!["m".into()])?;
    let mb = bm.measure_sampled(&m_basis, rng)?;
    let success = mb.outcome == 0;
    let bob_state = if success {
        Some(Qubit::from_state(mb.remainder.as_ref().expect("sampled branches are possible"))?)
    } else {
        None
    };
    Ok(Transcript {
        seed,
        channel: *p,
        input: *q,
        bm_outcome: outcome,
        bm_probability,
        correction_applied: Correction::Unitary(outcome),
        m_outcome: mb.outcome as u8,
        success,
        bob_state,
        recovered_fidelity: bob_state.map_or(0.0, |s| fidelity(&s, q)),
    })
}

/// One honest run driven by its own seeded stream.
pub fn run_sampled(p: &ChannelParams, q: &InputQubit, seed: u64) -> Result<Transcript> {
    run_with_rng(p, q, seed, &mut rng::seeded(seed))
}

/// `trials` independent runs; trial `k` uses [`rng::trial_seed`]`(master, k)`.
/// Output order follows the trial index regardless of scheduling.
pub fn run_batch(p: &ChannelParams, q: &InputQubit, master: u64, trials: u64) -> Result<Vec<Transcript>> {
    (0..trials)
        .into_par_iter()
        .map(|k| run_sampled(p, q, rng::trial_seed(master, k)))
        .collect()
}

/// Fraction of successful runs in [`run_batch`]`(p, q, master, trials)`.
pub fn success_rate(p: &ChannelParams, q: &InputQubit, master: u64, trials: u64) -> Result<Proportion> {
    let flags: Vec<bool> = (0..trials)
        .into_par_iter()
        .map(|k| run_sampled(p, q, rng::trial_seed(master, k)).map(|t| t.success))
        .collect::<Result<_>>()?;
    Ok(Proportion::from_flags(flags))
}
