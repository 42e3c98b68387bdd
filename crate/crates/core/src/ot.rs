//! p-Rabin oblivious transfer over probabilistic teleportation.
//!
//! Bob obtains the sender's qubit with probability `p = 2|b|^2` and learns
//! from his ancilla whether he did; nothing Alice sees depends on that
//! ancilla readout. Classical bits ride on two orthogonal qubits.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::statevec::{fidelity, labels, DensityMatrix, GateMatrix, MeasurementBasis, Qubit, ALGEBRA_TOL};
use crate::stats::Proportion;
use crate::teleport::{
    bell_decompose, run_with_rng, sample_bell, BellOutcome, ChannelParams, Correction, InputQubit, Transcript,
};

/// Two orthogonal qubits standing for the classical bits 0 and 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BitEncoding {
    zero: Qubit,
    one: Qubit,
}

impl BitEncoding {
    pub fn new(zero: Qubit, one: Qubit) -> Result<Self> {
        let overlap = zero.inner(&one).norm();
        if overlap >= ALGEBRA_TOL {
            return Err(Error::NonOrthogonalEncoding(overlap));
        }
        Ok(Self { zero, one })
    }

    /// `{|+>, |->}`.
    pub fn plus_minus() -> Self {
        Self {
            zero: Qubit::plus(),
            one: Qubit::minus(),
        }
    }

    /// `{|0>, |1>}`. Decoding needs no ancilla, so Bob always learns the bit.
    pub fn computational() -> Self {
        Self {
            zero: Qubit::zero(),
            one: Qubit::one(),
        }
    }

    pub fn zero(&self) -> Qubit {
        self.zero
    }

    pub fn one(&self) -> Qubit {
        self.one
    }

    pub fn state(&self, bit: u8) -> Qubit {
        if bit == 0 {
            self.zero
        } else {
            self.one
        }
    }

    /// True when the pair is `{|0>, |1>}` up to phases and order.
    pub fn is_computational(&self) -> bool {
        let on_z = |q: &Qubit| fidelity(q, &Qubit::zero()).max(fidelity(q, &Qubit::one())) > 1.0 - ALGEBRA_TOL;
        on_z(&self.zero) && on_z(&self.one)
    }

    fn basis(&self) -> MeasurementBasis {
        MeasurementBasis::from_qubits("B".into(), &self.zero, &self.one)
            .expect("orthogonality checked on construction")
    }
}

impl Default for BitEncoding {
    fn default() -> Self {
        Self::plus_minus()
    }
}

/// Outcome of one transfer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OtResult {
    pub transcript: Transcript,
    pub bob_learned: bool,
    /// Bob's decoded bit for bit transfers on success.
    pub decoded_bit: Option<u8>,
}

/// The part of a run Alice observes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AliceView {
    pub channel: ChannelParams,
    pub input: InputQubit,
    pub bm_outcome: BellOutcome,
}

impl OtResult {
    pub fn alice_view(&self) -> AliceView {
        AliceView {
            channel: self.transcript.channel,
            input: self.transcript.input,
            bm_outcome: self.transcript.bm_outcome,
        }
    }
}

/// Transfers `q`; Bob learns it exactly when his ancilla reads 0.
pub fn ot_qubit(p: &ChannelParams, q: &InputQubit, seed: u64) -> Result<OtResult> {
    let transcript = run_with_rng(p, q, seed, &mut rng::seeded(seed))?;
    Ok(OtResult {
        bob_learned: transcript.success,
        transcript,
        decoded_bit: None,
    })
}

/// Transfers `bit` encoded by `enc`. The stream's first variate draws the Bell
/// outcome; the following ones drive Bob's measurements.
pub fn ot_bit(p: &ChannelParams, bit: u8, enc: &BitEncoding, seed: u64) -> Result<OtResult> {
    if bit > 1 {
        return Err(Error::InvalidBit(bit));
    }
    let mut rng = rng::seeded(seed);
    if enc.is_computational() {
        return computational_transfer(p, bit, enc, seed, &mut rng);
    }
    let transcript = run_with_rng(p, &enc.state(bit), seed, &mut rng)?;
    let decoded_bit = match &transcript.bob_state {
        Some(b) => Some(decode(&b.to_state("B"), enc, &mut rng)?),
        // nothing is defined for failed extractions
        None => None,
    };
    Ok(OtResult {
        bob_learned: transcript.success,
        transcript,
        decoded_bit,
    })
}

fn decode<R: Rng + ?Sized>(b: &crate::statevec::StateVector, enc: &BitEncoding, rng: &mut R) -> Result<u8> {
    Ok(b.measure_sampled(&enc.basis(), rng)?.outcome as u8)
}

/// `{|0>, |1>}` case: `B` is already `|bit>` or its flip, so Bob applies I
/// after `psi_1`/`psi_2` and X after `psi_3`/`psi_4`, then reads Z.
fn computational_transfer<R: Rng + ?Sized>(
    p: &ChannelParams,
    bit: u8,
    enc: &BitEncoding,
    seed: u64,
    rng: &mut R,
) -> Result<OtResult> {
    let input = enc.state(bit);
    let (outcome, bm_probability, b_state) = sample_bell(p, &input, rng)?;
    let (correction, gate) = match outcome {
        BellOutcome::Psi1 | BellOutcome::Psi2 => (Correction::PauliI, GateMatrix::identity(2)),
        BellOutcome::Psi3 | BellOutcome::Psi4 => (Correction::PauliX, GateMatrix::pauli_x()),
    };
    let corrected = b_state.apply_gate(&gate, &labels(&["B"]))?;
    let decoded = decode(&corrected, enc, rng)?;
    let bob_state = Qubit::from_state(&corrected)?;
    let transcript = Transcript {
        seed,
        channel: *p,
        input,
        bm_outcome: outcome,
        bm_probability,
        correction_applied: correction,
        m_outcome: 0,
        success: true,
        bob_state: Some(bob_state),
        recovered_fidelity: fidelity(&bob_state, &input),
    };
    Ok(OtResult {
        transcript,
        bob_learned: true,
        decoded_bit: Some(decoded),
    })
}

/// Bob's state before the announcement, `sum_i Pr_i |phi_i><phi_i|`, checked
/// against `diag(|a|^2, |b|^2)` within `1e-12`.
pub fn concealment_check(p: &ChannelParams, q: &InputQubit) -> Result<DensityMatrix> {
    let branches = bell_decompose(p, q);
    let states: Vec<_> = branches.iter().map(|b| b.state.to_state("B")).collect();
    let rho = DensityMatrix::mixture(branches.iter().zip(&states).map(|(b, s)| (b.probability, s)))?;
    let expected = DensityMatrix::diagonal(labels(&["B"]), &[p.a2(), p.b2()])?;
    let deviation = rho.max_abs_diff(&expected);
    if deviation > ALGEBRA_TOL {
        return Err(Error::ConcealmentViolated(deviation));
    }
    Ok(rho)
}

/// `1 - (1 - 2|b|^2)^n`: chance that at least one of `n` transfers succeeds.
pub fn repeated_ot_probability(p: &ChannelParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Err(Error::ZeroCount("n"));
    }
    Ok(1.0 - (1.0 - p.success_probability()).powi(n as i32))
}

/// Transfers `q` up to `n` times; true if any attempt succeeds. Attempt `k`
/// uses `trial_seed(seed, k)`.
pub fn repeated_ot_episode(p: &ChannelParams, q: &InputQubit, n: u32, seed: u64) -> Result<bool> {
    if n == 0 {
        return Err(Error::ZeroCount("n"));
    }
    for k in 0..u64::from(n) {
        if ot_qubit(p, q, rng::trial_seed(seed, k))?.bob_learned {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Fraction of `episodes` runs of [`repeated_ot_episode`] with at least one
/// success; episode `e` uses `trial_seed(master, e)`.
pub fn repeated_ot_rate(p: &ChannelParams, q: &InputQubit, n: u32, master: u64, episodes: u64) -> Result<Proportion> {
    let flags: Vec<bool> = (0..episodes)
        .into_par_iter()
        .map(|e| repeated_ot_episode(p, q, n, rng::trial_seed(master, e)))
        .collect::<Result<_>>()?;
    Ok(Proportion::from_flags(flags))
}

/// Fraction of `trials` qubit transfers Bob learns; trial `k` uses `trial_seed(master, k)`.
pub fn learn_rate(p: &ChannelParams, q: &InputQubit, master: u64, trials: u64) -> Result<Proportion> {
    crate::teleport::success_rate(p, q, master, trials)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::c;

    fn channel(b2: f64) -> ChannelParams {
        ChannelParams::from_b2(b2).unwrap()
    }

    #[test]
    fn encoding_validation() {
        assert!(matches!(
            BitEncoding::new(Qubit::zero(), Qubit::plus()),
            Err(Error::NonOrthogonalEncoding(_))
        ));
        assert!(BitEncoding::new(Qubit::plus(), Qubit::minus()).is_ok());
        assert!(BitEncoding::computational().is_computational());
        assert!(!BitEncoding::plus_minus().is_computational());
        assert!(BitEncoding::new(Qubit::one(), Qubit::zero()).unwrap().is_computational());
        assert_eq!(BitEncoding::default(), BitEncoding::plus_minus());
    }

    #[test]
    fn ot_qubit_mirrors_transcript() {
        let p = channel(0.2);
        for seed in 0..50 {
            let r = ot_qubit(&p, &Qubit::plus(), seed).unwrap();
            assert_eq!(r.bob_learned, r.transcript.success);
            assert_eq!(r, ot_qubit(&p, &Qubit::plus(), seed).unwrap());
        }
    }

    #[test]
    fn plus_minus_decodes_on_success() {
        let p = channel(0.2);
        let enc = BitEncoding::plus_minus();
        let mut successes = 0;
        for seed in 0..400 {
            for bit in [0, 1] {
                let r = ot_bit(&p, bit, &enc, seed).unwrap();
                match r.decoded_bit {
                    Some(d) => {
                        successes += 1;
                        assert!(r.bob_learned);
                        assert_eq!(d, bit);
                    }
                    None => assert!(!r.bob_learned),
                }
            }
        }
        assert!(successes > 0);
    }

    #[test]
    fn computational_path_always_learns() {
        let p = channel(0.2);
        let enc = BitEncoding::computational();
        for seed in 0..500 {
            for bit in [0, 1] {
                let r = ot_bit(&p, bit, &enc, seed).unwrap();
                assert!(r.bob_learned);
                assert_eq!(r.decoded_bit, Some(bit));
                assert!(matches!(r.transcript.correction_applied, Correction::PauliI | Correction::PauliX));
            }
        }
    }

    #[test]
    fn bad_bit_rejected() {
        assert!(ot_bit(&channel(0.2), 2, &BitEncoding::default(), 0).is_err());
    }

    #[test]
    fn concealment_is_input_independent() {
        let p = channel(0.2);
        let want = DensityMatrix::diagonal(labels(&["B"]), &[0.8, 0.2]).unwrap();
        for q in [Qubit::zero(), Qubit::plus(), Qubit::real(0.6, 0.8).unwrap()] {
            let rho = concealment_check(&p, &q).unwrap();
            assert!(rho.max_abs_diff(&want) < 1e-12);
        }
    }

    #[test]
    fn concealment_matches_partial_trace() {
        // Bob's reduced state of the untouched register equals the Bell mixture.
        let p = channel(0.3);
        let q = Qubit::new(c(0.6), num_complex::Complex64::new(0.0, 0.8)).unwrap();
        let direct = crate::teleport::initial_state(&p, &q).partial_trace(&labels(&["B"])).unwrap();
        assert!(direct.max_abs_diff(&concealment_check(&p, &q).unwrap()) < 1e-12);
    }

    #[test]
    fn repeated_probability_closed_form() {
        let p = channel(0.2);
        assert!((repeated_ot_probability(&p, 1).unwrap() - 0.4).abs() < 1e-15);
        // 1 - 0.6^3
        assert!((repeated_ot_probability(&p, 3).unwrap() - 0.784).abs() < 1e-12);
        assert_eq!(repeated_ot_probability(&p, 0).unwrap_err(), Error::ZeroCount("n"));
        let mut prev = 0.0;
        for n in 1..40 {
            let v = repeated_ot_probability(&p, n).unwrap();
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn learn_rates() {
        let r = learn_rate(&channel(0.25), &Qubit::plus(), 11, 100_000).unwrap();
        assert!(r.within_sigma(0.5, 3.0), "{}", r.rate());
        let r = learn_rate(&channel(0.2), &Qubit::real(0.6, 0.8).unwrap(), 12, 100_000).unwrap();
        assert!(r.within_sigma(0.4, 3.0), "{}", r.rate());
    }
}
