//! Cheating strategies open to the sender.
//!
//! * [`fake_bm_attack`]: Alice announces a Bell outcome other than the one she
//!   obtained, so Bob applies the wrong correction.
//! * [`unitary_attack`]: Alice applies a unitary to her half `A` of the pair
//!   before the Bell measurement.
//! * [`entangle_measure_attack`]: Alice entangles `A` with a private qubit `E`
//!   through a CNOT and later measures `E`.
//!
//! None of them touches Bob's ancilla, which is what keeps Bob's success
//! probability at `2|b|^2`. What each of them does to Bob's qubit, and what
//! Alice can infer about his ancilla readout, is reported in an
//! [`AttackOutcome`].

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;
use crate::statevec::{
    c, fidelity, labels, pauli_decompose, pauli_reconstruct, DensityMatrix, GateMatrix, MeasurementBasis, Qubit,
    StateVector, ALGEBRA_TOL, DEGENERATE_PROB, STATE_TOL,
};
use crate::teleport::{
    bell_components, bell_decompose, bob_after_correction, initial_state, run_from_state, w_entry, BellOutcome,
    ChannelParams, InputQubit, Transcript,
};

/// Alice obtains `true_outcome` but announces `reported_outcome`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FakeBmConfig {
    pub true_outcome: BellOutcome,
    pub reported_outcome: BellOutcome,
}

/// `U_A = k1 I + k2 X + k3 Z + k4 iY` applied to `A`, with `iY = [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PauliAttackConfig {
    k: [C64; 4],
}

impl PauliAttackConfig {
    /// Rejects coefficients whose operator is not unitary within `1e-10`.
    pub fn new(k: [C64; 4]) -> Result<Self> {
        if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = pauli_reconstruct(&k).unitarity_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { k })
    }

    pub fn real(k: [f64; 4]) -> Result<Self> {
        Self::new(k.map(c))
    }

    pub fn from_unitary(u: &GateMatrix) -> Result<Self> {
        Self::new(pauli_decompose(u)?)
    }

    pub fn coefficients(&self) -> [C64; 4] {
        self.k
    }

    pub fn unitary(&self) -> GateMatrix {
        pauli_reconstruct(&self.k)
    }

    /// True when `U_A` is the identity up to a global phase.
    pub fn is_trivial(&self) -> bool {
        self.k[1..].iter().all(|z| z.norm() < ALGEBRA_TOL)
    }
}

/// What Bob holds when his ancilla reads 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BobState {
    Pure { state: Qubit },
    Mixed { density: DensityMatrix },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AliceInformation {
    pub description: String,
    pub metrics: BTreeMap<String, f64>,
}

impl AliceInformation {
    fn new(description: &str, metrics: &[(&str, f64)]) -> Self {
        Self {
            description: description.to_owned(),
            metrics: metrics.iter().map(|(k, v)| ((*k).to_owned(), *v)).collect(),
        }
    }
}

/// Effect of an attack on one Bell-outcome branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackOutcome {
    pub bell_outcome: BellOutcome,
    pub bell_probability: f64,
    /// Probability that Bob's ancilla reads 0 given this Bell outcome.
    pub success_probability: f64,
    /// `None` when the branch cannot occur.
    pub bob_success_state: Option<BobState>,
    /// Fidelity of Bob's success state to the input; 0 if there is none.
    pub fidelity_to_intended: f64,
    /// Bob sees `m = 0` in this branch with positive probability.
    pub bob_believes_success: bool,
    pub alice_information: AliceInformation,
}

fn guess_probability(success: f64) -> f64 {
    success.max(1.0 - success)
}

/// Conditional probability of `m = 0` and the `m = 0` state of the rest.
fn ancilla_zero(bm: &StateVector) -> Result<(f64, Option<StateVector>)> {
    let m_basis = MeasurementBasis::computational(labels(&["m"]))?;
    let zero = bm.measure(&m_basis)?.swap_remove(0);
    Ok((zero.probability, zero.remainder))
}

/// Bob applies `U_reported` to the branch Alice actually obtained. Computed as
/// `W_{reported,true}` acting on the honest post-correction state.
pub fn fake_bm_attack(p: &ChannelParams, q: &InputQubit, cfg: FakeBmConfig) -> Result<AttackOutcome> {
    let branch = bell_decompose(p, q)[cfg.true_outcome.position()];
    let honest = bob_after_correction(&branch.state.to_state("B"), cfg.true_outcome, p)?;
    let w = w_entry(cfg.reported_outcome, cfg.true_outcome);
    let bm = honest.apply_gate(&w, &labels(&["B", "m"]))?;
    let (success, rest) = ancilla_zero(&bm)?;
    let bob = rest.as_ref().map(Qubit::from_state).transpose()?;
    Ok(AttackOutcome {
        bell_outcome: cfg.true_outcome,
        bell_probability: branch.probability,
        success_probability: success,
        fidelity_to_intended: bob.map_or(0.0, |s| fidelity(&s, q)),
        bob_believes_success: bob.is_some(),
        bob_success_state: bob.map(|state| BobState::Pure { state }),
        alice_information: AliceInformation::new(
            "Alice knows which Pauli error reaches Bob's qubit but not whether his ancilla read 0; \
             her best guess of m is no better than in an honest run",
            &[("m_guess_probability", guess_probability(success))],
        ),
    })
}

/// Image of `psi_i` under `I (x) P` on `(C, A)` for the Pauli `P` at position
/// `pauli` of `[I, X, Z, iY]`: a Bell state and a sign.
pub fn pauli_bell_transition(pauli: usize, i: BellOutcome) -> (BellOutcome, f64) {
    const TABLE: [[(usize, f64); 4]; 4] = [
        [(0, 1.0), (1, 1.0), (2, 1.0), (3, 1.0)],
        [(2, 1.0), (3, 1.0), (0, 1.0), (1, 1.0)],
        [(1, 1.0), (0, 1.0), (3, -1.0), (2, -1.0)],
        [(3, -1.0), (2, -1.0), (1, 1.0), (0, 1.0)],
    ];
    let (k, sign) = TABLE[pauli][i.position()];
    (BellOutcome::from_position(k), sign)
}

/// Unnormalized components of `B` per Bell outcome once `U_A` has acted on `A`.
pub fn attacked_components(p: &ChannelParams, q: &InputQubit, cfg: &PauliAttackConfig) -> [[C64; 2]; 4] {
    let honest = bell_components(p, q);
    let mut out = [[c(0.0); 2]; 4];
    for (pauli, k) in cfg.k.iter().enumerate() {
        for i in BellOutcome::ALL {
            let (to, sign) = pauli_bell_transition(pauli, i);
            for (o, h) in out[to.position()].iter_mut().zip(honest[i.position()]) {
                *o += k * sign * h;
            }
        }
    }
    out
}

/// `(delta1, delta2)` with the `psi_1` component of `B` equal to
/// `delta1 a|0> + delta2 b|1>`.
pub fn delta_coefficients(q: &InputQubit, cfg: &PauliAttackConfig) -> [C64; 2] {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let [k1, k2, k3, k4] = cfg.k;
    let (al, be) = (q.alpha, q.beta);
    [
        ((k1 + k3) * al + (k2 - k4) * be) * h,
        ((k1 - k3) * be + (k2 + k4) * al) * h,
    ]
}

/// Per Bell outcome: the branch probability and Bob's `m = 0` state after
/// the honest correction for that outcome.
///
/// With `x = c0/a`, `y = c1/b` for the collapsed component `c`, the `m = 0`
/// amplitude of `B` is `b (x, y)`, `b (x, -y)`, `b (y, x)` or `b (-y, x)` for
/// outcomes 1 to 4.
pub fn unitary_attack(p: &ChannelParams, q: &InputQubit, cfg: &PauliAttackConfig) -> Result<Vec<AttackOutcome>> {
    let comps = attacked_components(p, q, cfg);
    let mut out = Vec::with_capacity(4);
    for k in BellOutcome::ALL {
        let [c0, c1] = comps[k.position()];
        let pr = c0.norm_sqr() + c1.norm_sqr();
        let (x, y) = (c0 / p.a(), c1 / p.b());
        let v = match k {
            BellOutcome::Psi1 => [x, y],
            BellOutcome::Psi2 => [x, -y],
            BellOutcome::Psi3 => [y, x],
            BellOutcome::Psi4 => [-y, x],
        }
        .map(|z| p.b() * z);
        let joint = v[0].norm_sqr() + v[1].norm_sqr();
        let (success, bob) = if pr < DEGENERATE_PROB {
            (0.0, None)
        } else {
            (joint / pr, Some(Qubit::normalized(v[0], v[1])?))
        };
        out.push(AttackOutcome {
            bell_outcome: k,
            bell_probability: if pr < DEGENERATE_PROB { 0.0 } else { pr },
            success_probability: success,
            fidelity_to_intended: bob.map_or(0.0, |s| fidelity(&s, q)),
            bob_believes_success: bob.is_some(),
            bob_success_state: bob.map(|state| BobState::Pure { state }),
            alice_information: AliceInformation::new(
                "the attack acts before the Bell measurement and never reaches Bob's ancilla; \
                 Alice's view of m is that of an honest run",
                &[("m_guess_probability", guess_probability(success))],
            ),
        });
    }
    Ok(out)
}

/// One sampled run with `U_A` applied to `A` before the Bell measurement.
/// Uses the same variates as [`crate::teleport::run_sampled`].
pub fn unitary_attack_sampled(p: &ChannelParams, q: &InputQubit, cfg: &PauliAttackConfig, seed: u64) -> Result<Transcript> {
    let state = initial_state(p, q).apply_gate(&cfg.unitary(), &labels(&["A"]))?;
    run_from_state(&state, p, q, seed, &mut rng::seeded(seed))
}

/// Basis in which Alice reads her private qubit `E`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EBasis {
    Z,
    X,
}

/// Joint distribution of Alice's `E` outcome and Bob's `m` outcome over a
/// whole run, `probs[e][m]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointDistribution {
    pub basis: EBasis,
    pub probs: [[f64; 2]; 2],
}

impl JointDistribution {
    pub fn e_marginal(&self) -> [f64; 2] {
        self.probs.map(|row| row[0] + row[1])
    }

    pub fn m_marginal(&self) -> [f64; 2] {
        [0, 1].map(|m| self.probs[0][m] + self.probs[1][m])
    }

    /// In bits.
    pub fn mutual_information(&self) -> f64 {
        let (pe, pm) = (self.e_marginal(), self.m_marginal());
        let mut mi = 0.0;
        for (row, pe) in self.probs.iter().zip(pe) {
            for (&pj, pm) in row.iter().zip(pm) {
                if pj > DEGENERATE_PROB {
                    mi += pj * (pj / (pe * pm)).log2();
                }
            }
        }
        mi.max(0.0)
    }

    /// Alice's best chance of naming `m` from her `E` outcome.
    pub fn m_guess_probability(&self) -> f64 {
        self.probs.iter().map(|row| row[0].max(row[1])).sum()
    }
}

/// `CNOT_{A->E} |zeta>_C |phi>_AB |0>_E` on `(C, A, B, E)`.
pub fn entangled_register(p: &ChannelParams, q: &InputQubit) -> Result<StateVector> {
    let e = StateVector::basis_state(labels(&["E"]), 0)?;
    initial_state(p, q)
        .tensor(&e)?
        .apply_gate(&GateMatrix::cnot(), &labels(&["A", "E"]))
}

/// Unnormalized `(B, E)` components per Bell outcome of `(C, A)` in the
/// entangled register. `E` copies `B`, so only `|00>` and `|11>` appear.
pub fn entangled_components(p: &ChannelParams, q: &InputQubit) -> [[C64; 4]; 4] {
    bell_components(p, q).map(|[x, y]| [x, c(0.0), c(0.0), y])
}

/// `(B, E, m)` after Bell outcome `k` and Bob's honest correction `U_k`, normalized.
pub fn entangled_bem_state(p: &ChannelParams, q: &InputQubit, k: BellOutcome) -> Result<StateVector> {
    let be = StateVector::normalized(labels(&["B", "E"]), entangled_components(p, q)[k.position()].to_vec())?;
    let m = StateVector::basis_state(labels(&["m"]), 0)?;
    be.tensor(&m)?
        .apply_gate(&crate::teleport::correction_unitary(k, p), &labels(&["B", "m"]))
}

/// `(B, E)` given Bell outcome `k` and `m = 0`.
pub fn entangled_success_state(p: &ChannelParams, q: &InputQubit, k: BellOutcome) -> Result<Option<StateVector>> {
    Ok(ancilla_zero(&entangled_bem_state(p, q, k)?)?.1)
}

/// `P(e, m)` summed over the four Bell outcomes.
pub fn entangled_joint_distribution(p: &ChannelParams, q: &InputQubit, basis: EBasis) -> Result<JointDistribution> {
    let e_basis = match basis {
        EBasis::Z => MeasurementBasis::computational(labels(&["E"]))?,
        EBasis::X => MeasurementBasis::from_qubits("E".into(), &Qubit::plus(), &Qubit::minus())?,
    };
    let m_basis = MeasurementBasis::computational(labels(&["m"]))?;
    let mut probs = [[0.0; 2]; 2];
    for branch in bell_decompose(p, q) {
        let bem = entangled_bem_state(p, q, branch.outcome)?;
        for eb in bem.measure(&e_basis)? {
            let Some(rest) = &eb.state else { continue };
            for mb in rest.measure(&m_basis)? {
                probs[eb.outcome][mb.outcome] += branch.probability * eb.probability * mb.probability;
            }
        }
    }
    Ok(JointDistribution { basis, probs })
}

/// `<q| rho |q>` for a one-qubit density matrix.
fn expectation(rho: &DensityMatrix, q: &Qubit) -> f64 {
    let v = [q.alpha, q.beta];
    let mut acc = c(0.0);
    for r in 0..2 {
        for col in 0..2 {
            acc += v[r].conj() * rho.get(r, col) * v[col];
        }
    }
    acc.re.clamp(0.0, 1.0)
}

/// Entangle-measure attack, reported for Bell outcome `psi_1` followed by `U_1`.
///
/// On `m = 0` Bob's qubit is entangled with `E` as `alpha|00> + beta|11>`, so his
/// reduced state is `diag(|alpha|^2, |beta|^2)`. The Alice-side metrics cover
/// the whole run: a Z readout of `E` is correlated with `m` (`E = 1` forces
/// `m = 0`), an X readout is not.
pub fn entangle_measure_attack(p: &ChannelParams, q: &InputQubit) -> Result<AttackOutcome> {
    let k = BellOutcome::Psi1;
    let bell_probability = bell_decompose(p, q)[k.position()].probability;
    let (success, rest) = ancilla_zero(&entangled_bem_state(p, q, k)?)?;
    let rho = rest.as_ref().map(|s| s.partial_trace(&labels(&["B"]))).transpose()?;
    let z = entangled_joint_distribution(p, q, EBasis::Z)?;
    let x = entangled_joint_distribution(p, q, EBasis::X)?;
    let pm = z.m_marginal();
    let e_given_success = rest
        .as_ref()
        .map(|s| s.partial_trace(&labels(&["E"])))
        .transpose()?
        .map_or(0.0, |r| r.get(0, 0).re);
    Ok(AttackOutcome {
        bell_outcome: k,
        bell_probability,
        success_probability: success,
        fidelity_to_intended: rho.as_ref().map_or(0.0, |r| expectation(r, q)),
        bob_believes_success: rho.is_some(),
        bob_success_state: rho.map(|density| BobState::Mixed { density }),
        alice_information: AliceInformation::new(
            "a Z readout of E collapses Bob's qubit to |E> and is correlated with his ancilla \
             (E = 1 only occurs with m = 0); an X readout of E carries no information about m",
            &[
                ("mutual_information_z_bits", z.mutual_information()),
                ("mutual_information_x_bits", x.mutual_information()),
                ("m_guess_probability_z", z.m_guess_probability()),
                ("m_guess_probability_x", x.m_guess_probability()),
                ("m_guess_probability_without_e", pm[0].max(pm[1])),
                ("p_e0_given_success", e_given_success),
            ],
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevec::pauli_basis;
    use proptest::prelude::*;

    fn channel(b2: f64) -> ChannelParams {
        ChannelParams::from_b2(b2).unwrap()
    }

    fn sixty_eighty() -> Qubit {
        Qubit::real(0.6, 0.8).unwrap()
    }

    fn pure(o: &AttackOutcome) -> Qubit {
        match o.bob_success_state.as_ref().unwrap() {
            BobState::Pure { state } => *state,
            BobState::Mixed { .. } => panic!("expected a pure state"),
        }
    }

    fn arb_channel() -> impl Strategy<Value = ChannelParams> {
        (0.01f64..0.49, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(b2, pa, pb)| {
            ChannelParams::new(C64::from_polar((1.0 - b2).sqrt(), pa), C64::from_polar(b2.sqrt(), pb)).unwrap()
        })
    }

    fn arb_qubit() -> impl Strategy<Value = Qubit> {
        (0.0f64..1.0, 0.0..std::f64::consts::TAU, 0.0..std::f64::consts::TAU).prop_map(|(t, pa, pb)| {
            Qubit::new(C64::from_polar(t.sqrt(), pa), C64::from_polar((1.0 - t).sqrt(), pb)).unwrap()
        })
    }

    /// Random unitary from Euler angles and a global phase.
    fn arb_attack() -> impl Strategy<Value = PauliAttackConfig> {
        let ang = 0.0..std::f64::consts::TAU;
        (ang.clone(), ang.clone(), ang.clone(), ang).prop_map(|(g, th, ph, la)| {
            let e = |x: f64| C64::from_polar(1.0, x);
            let (co, si) = ((th / 2.0).cos(), (th / 2.0).sin());
            let u = GateMatrix::new(
                2,
                vec![e(g) * co, -e(g + la) * si, e(g + ph) * si, e(g + ph + la) * co],
            )
            .unwrap();
            PauliAttackConfig::from_unitary(&u).unwrap()
        })
    }

    #[test]
    fn fake_two_reported_three() {
        let q = sixty_eighty();
        let cfg = FakeBmConfig {
            true_outcome: BellOutcome::Psi2,
            reported_outcome: BellOutcome::Psi3,
        };
        let out = fake_bm_attack(&channel(0.2), &q, cfg).unwrap();
        let want = Qubit::real(-0.8, 0.6).unwrap();
        assert!(fidelity(&pure(&out), &want) > 1.0 - 1e-12);
        assert!(out.fidelity_to_intended < 1e-12);
        assert!(out.bob_believes_success);
    }

    #[test]
    fn honest_report_is_faithful() {
        let q = sixty_eighty();
        for k in BellOutcome::ALL {
            let cfg = FakeBmConfig {
                true_outcome: k,
                reported_outcome: k,
            };
            let out = fake_bm_attack(&channel(0.2), &q, cfg).unwrap();
            assert!((out.fidelity_to_intended - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fake_report_keeps_success_rate() {
        // W acts on B only, so P(m = 0 | i) = |b|^2 / (2 Pr_i) whatever is announced
        let p = channel(0.2);
        let q = sixty_eighty();
        let branches = bell_decompose(&p, &q);
        for i in BellOutcome::ALL {
            for j in BellOutcome::ALL {
                let cfg = FakeBmConfig {
                    true_outcome: i,
                    reported_outcome: j,
                };
                let out = fake_bm_attack(&p, &q, cfg).unwrap();
                let want = 0.5 * p.b2() / branches[i.position()].probability;
                assert!((out.success_probability - want).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn fake_bm_matches_direct_correction(p in arb_channel(), q in arb_qubit()) {
            for (i, branch) in bell_decompose(&p, &q).iter().enumerate() {
                for j in BellOutcome::ALL {
                    let i = BellOutcome::from_position(i);
                    let out = fake_bm_attack(&p, &q, FakeBmConfig { true_outcome: i, reported_outcome: j }).unwrap();
                    let direct = bob_after_correction(&branch.state.to_state("B"), j, &p).unwrap();
                    let (pr, rest) = ancilla_zero(&direct).unwrap();
                    let want = Qubit::from_state(&rest.unwrap()).unwrap();
                    prop_assert!((out.success_probability - pr).abs() < 1e-12);
                    prop_assert!(fidelity(&pure(&out), &want) > 1.0 - 1e-12);
                }
            }
        }

        #[test]
        fn unitary_attack_probabilities_sum_to_one(p in arb_channel(), q in arb_qubit(), cfg in arb_attack()) {
            let total: f64 = unitary_attack(&p, &q, &cfg).unwrap().iter().map(|o| o.bell_probability).sum();
            prop_assert!((total - 1.0).abs() < 1e-10);
        }

        #[test]
        fn delta_form_is_psi1_component(p in arb_channel(), q in arb_qubit(), cfg in arb_attack()) {
            let [d1, d2] = delta_coefficients(&q, &cfg);
            let comp = attacked_components(&p, &q, &cfg)[0];
            prop_assert!((comp[0] - d1 * p.a()).norm() < 1e-12);
            prop_assert!((comp[1] - d2 * p.b()).norm() < 1e-12);
        }
    }

    #[test]
    fn transition_table_matches_operators() {
        let bell = MeasurementBasis::bell("C".into(), "A".into());
        for (j, pauli) in pauli_basis().iter().enumerate() {
            for i in BellOutcome::ALL {
                let image = bell.state(i.position()).apply_gate(pauli, &labels(&["A"])).unwrap();
                let (to, sign) = pauli_bell_transition(j, i);
                let overlap = bell.state(to.position()).inner(&image).unwrap();
                assert!((overlap - c(sign)).norm() < 1e-12, "P{j} on {i}");
            }
        }
    }

    #[test]
    fn identity_attack_is_honest() {
        let p = channel(0.2);
        let q = sixty_eighty();
        let cfg = PauliAttackConfig::real([1.0, 0.0, 0.0, 0.0]).unwrap();
        assert!(cfg.is_trivial());
        let honest = bell_decompose(&p, &q);
        for (o, h) in unitary_attack(&p, &q, &cfg).unwrap().iter().zip(&honest) {
            assert!((o.bell_probability - h.probability).abs() < 1e-15);
            assert!((o.fidelity_to_intended - 1.0).abs() < 1e-12);
        }
        for seed in 0..200 {
            assert_eq!(
                unitary_attack_sampled(&p, &q, &cfg, seed).unwrap(),
                crate::teleport::run_sampled(&p, &q, seed).unwrap()
            );
        }
    }

    #[test]
    fn x_attack_permutes_outcomes() {
        let p = channel(0.2);
        let q = sixty_eighty();
        let cfg = PauliAttackConfig::real([0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(!cfg.is_trivial());
        let honest = bell_decompose(&p, &q);
        let out = unitary_attack(&p, &q, &cfg).unwrap();
        // psi1 <-> psi3, psi2 <-> psi4
        for (k, from) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            assert!((out[k].bell_probability - honest[from].probability).abs() < 1e-15);
        }
    }

    #[test]
    fn non_unitary_rejected_with_deviation() {
        let err = PauliAttackConfig::real([1.0, 1.0, 0.0, 0.0]).unwrap_err();
        let Error::NotUnitary { deviation } = err else {
            panic!("{err:?}")
        };
        let want = pauli_reconstruct(&[c(1.0), c(1.0), c(0.0), c(0.0)]).unitarity_deviation();
        assert!((deviation - want).abs() < 1e-15 && deviation > 1.0);
    }

    #[test]
    fn entangle_success_state() {
        let p = channel(0.2);
        let q = sixty_eighty();
        let be = entangled_success_state(&p, &q, BellOutcome::Psi1).unwrap().unwrap();
        let want = StateVector::new(labels(&["B", "E"]), vec![c(0.6), c(0.0), c(0.0), c(0.8)]).unwrap();
        assert!(be.fidelity(&want).unwrap() > 1.0 - 1e-12);
        let out = entangle_measure_attack(&p, &q).unwrap();
        let Some(BobState::Mixed { density }) = &out.bob_success_state else {
            panic!()
        };
        let diag = DensityMatrix::diagonal(labels(&["B"]), &[0.36, 0.64]).unwrap();
        assert!(density.max_abs_diff(&diag) < 1e-12);
        assert!((out.alice_information.metrics["p_e0_given_success"] - 0.36).abs() < 1e-12);
    }

    #[test]
    fn entangle_harmless_on_zero() {
        let out = entangle_measure_attack(&channel(0.2), &Qubit::zero()).unwrap();
        assert!((out.fidelity_to_intended - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entangle_joint_distribution() {
        let p = channel(0.2);
        let z = entangled_joint_distribution(&p, &sixty_eighty(), EBasis::Z).unwrap();
        let want = [[0.2, 0.6], [0.2, 0.0]];
        for (got, w) in z.probs.iter().flatten().zip(want.iter().flatten()) {
            assert!((got - w).abs() < 1e-12);
        }
        assert!(z.mutual_information() > 0.3);
        let x = entangled_joint_distribution(&p, &sixty_eighty(), EBasis::X).unwrap();
        assert!(x.mutual_information() < 1e-10);
    }

    #[test]
    fn outcome_serializes() {
        let out = entangle_measure_attack(&channel(0.2), &sixty_eighty()).unwrap();
        let v = serde_json::to_value(&out).unwrap();
        assert_eq!(v["bob_success_state"]["kind"], "mixed");
        assert_eq!(v["bell_outcome"], 1);
    }
}
