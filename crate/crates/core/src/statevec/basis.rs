use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

use super::{c, gather_bits, positions, scatter_bits, Label, Qubit, StateVector, DEGENERATE_PROB, STATE_TOL};

/// Orthonormal basis of the state space of one or two named qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementBasis {
    subsystem: Vec<Label>,
    vectors: Vec<Vec<C64>>,
}

/// One outcome of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Zero-based position of the basis vector.
    pub outcome: usize,
    pub probability: f64,
    /// Whole register after collapse, renormalized. `None` for degenerate branches.
    pub state: Option<StateVector>,
    /// Unmeasured qubits after collapse, in register order. `None` for degenerate branches.
    pub remainder: Option<StateVector>,
}

impl Branch {
    pub fn is_possible(&self) -> bool {
        self.state.is_some()
    }
}

impl MeasurementBasis {
    /// Validates that `vectors` are `2^k` pairwise orthonormal vectors within `1e-10`.
    pub fn new(subsystem: Vec<Label>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        if subsystem.is_empty() || subsystem.len() > 2 {
            return Err(Error::InvalidBasis(format!(
                "subsystem must hold 1 or 2 qubits, got {}",
                subsystem.len()
            )));
        }
        positions(&subsystem, &subsystem)?;
        let dim = 1usize << subsystem.len();
        if vectors.len() != dim || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidBasis(format!(
                "expected {dim} vectors of length {dim}"
            )));
        }
        for (i, u) in vectors.iter().enumerate() {
            for (j, v) in vectors.iter().enumerate().skip(i) {
                let ip: C64 = u.iter().zip(v).map(|(x, y)| x.conj() * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (ip - c(want)).norm() > STATE_TOL {
                    return Err(Error::InvalidBasis(format!(
                        "<v{i}|v{j}> = {ip}, expected {want}"
                    )));
                }
            }
        }
        Ok(Self { subsystem, vectors })
    }

    /// The computational (Z) basis on `subsystem`.
    pub fn computational(subsystem: Vec<Label>) -> Result<Self> {
        let dim = 1usize << subsystem.len();
        let vectors = (0..dim)
            .map(|k| (0..dim).map(|j| c(if j == k { 1.0 } else { 0.0 })).collect())
            .collect();
        Self::new(subsystem, vectors)
    }

    /// Bell basis ordered `(|00>+|11>, |00>-|11>, |01>+|10>, |01>-|10>) / sqrt 2`.
    pub fn bell(first: Label, second: Label) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let o = c(0.0);
        let vectors = vec![
            vec![c(h), o, o, c(h)],
            vec![c(h), o, o, c(-h)],
            vec![o, c(h), c(h), o],
            vec![o, c(h), c(-h), o],
        ];
        Self::new(vec![first, second], vectors).expect("Bell basis is orthonormal")
    }

    /// Single-qubit basis `{zero, one}`.
    pub fn from_qubits(label: Label, zero: &Qubit, one: &Qubit) -> Result<Self> {
        Self::new(
            vec![label],
            vec![vec![zero.alpha, zero.beta], vec![one.alpha, one.beta]],
        )
    }

    pub fn subsystem(&self) -> &[Label] {
        &self.subsystem
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Basis vector `k` as a state on the subsystem.
    pub fn state(&self, k: usize) -> StateVector {
        StateVector::new(self.subsystem.clone(), self.vectors[k].clone())
            .expect("basis vectors are normalized")
    }

    pub(super) fn branches(&self, s: &StateVector) -> Result<Vec<Branch>> {
        let n = s.num_qubits();
        let pos = positions(s.labels(), &self.subsystem)?;
        let rest: Vec<usize> = (0..n).filter(|p| !pos.contains(p)).collect();
        let rest_labels: Vec<Label> = rest.iter().map(|&p| s.labels()[p].clone()).collect();
        let rest_dim = 1usize << rest.len();

        let branches = self
            .vectors
            .iter()
            .enumerate()
            .map(|(outcome, v)| {
                let rem: Vec<C64> = (0..rest_dim)
                    .map(|r| {
                        let base = scatter_bits(r, n, &rest);
                        v.iter()
                            .enumerate()
                            .map(|(sub, vk)| vk.conj() * s.amp(base | scatter_bits(sub, n, &pos)))
                            .sum()
                    })
                    .collect();
                let probability: f64 = rem.iter().map(C64::norm_sqr).sum();
                if probability < DEGENERATE_PROB {
                    return Branch {
                        outcome,
                        probability: 0.0,
                        state: None,
                        remainder: None,
                    };
                }
                let scale = probability.sqrt();
                let rem: Vec<C64> = rem.into_iter().map(|z| z / scale).collect();
                let full = (0..s.dim())
                    .map(|i| v[gather_bits(i, n, &pos)] * rem[gather_bits(i, n, &rest)])
                    .collect();
                Branch {
                    outcome,
                    probability,
                    state: Some(StateVector::normalized(s.labels().to_vec(), full).expect("nonzero branch")),
                    remainder: Some(StateVector::normalized(rest_labels.clone(), rem).expect("nonzero branch")),
                }
            })
            .collect();
        Ok(branches)
    }

    /// Cumulative inversion over branches in index order; degenerate branches
    /// are never chosen.
    pub(super) fn select(&self, branches: Vec<Branch>, u: f64) -> Result<Branch> {
        let mut acc = 0.0;
        let mut last = None;
        for b in branches {
            if !b.is_possible() {
                continue;
            }
            acc += b.probability;
            if u < acc {
                return Ok(b);
            }
            last = Some(b);
        }
        // u landed in the rounding gap above the final cumulative sum
        last.ok_or(Error::ZeroNorm)
    }
}
