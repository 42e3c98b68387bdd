//! Dense state-vector and density-matrix engine for registers of at most
//! [`MAX_QUBITS`] labelled qubits.
//!
//! Amplitudes are indexed big-endian over the register's label list: the first
//! label is the most significant bit. Every value is immutable; operations
//! return new states.

mod basis;
mod density;
mod gate;
mod qubit;

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use basis::{Branch, MeasurementBasis};
pub use density::DensityMatrix;
pub use gate::{pauli_basis, pauli_decompose, pauli_reconstruct, GateMatrix};
pub use qubit::{fidelity, Qubit};

/// Largest register the engine accepts (C, A, B, E and m).
pub const MAX_QUBITS: usize = 5;

/// Tolerance for state invariants (norms, traces, orthonormality).
pub const STATE_TOL: f64 = 1e-10;

/// Tolerance for pure matrix algebra.
pub const ALGEBRA_TOL: f64 = 1e-12;

/// Branches less likely than this are treated as impossible.
pub const DEGENERATE_PROB: f64 = 1e-14;

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Name of a qubit within a register.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn labels(names: &[&str]) -> Vec<Label> {
    names.iter().map(|&n| Label::from(n)).collect()
}

fn check_labels(labels: &[Label]) -> Result<()> {
    if labels.len() > MAX_QUBITS {
        return Err(Error::TooManyQubits(labels.len()));
    }
    let mut seen = HashSet::new();
    for l in labels {
        if !seen.insert(l) {
            return Err(Error::DuplicateLabel(l.to_string()));
        }
    }
    Ok(())
}

/// Positions of `wanted` inside `labels`, in the order of `wanted`.
pub(crate) fn positions(labels: &[Label], wanted: &[Label]) -> Result<Vec<usize>> {
    let mut seen = HashSet::new();
    wanted
        .iter()
        .map(|w| {
            if !seen.insert(w) {
                return Err(Error::DuplicateLabel(w.to_string()));
            }
            labels
                .iter()
                .position(|l| l == w)
                .ok_or_else(|| Error::UnknownLabel(w.to_string()))
        })
        .collect()
}

/// Gathers the bits of `index` at register positions `pos` (first = MSB of the result).
#[inline]
pub(crate) fn gather_bits(index: usize, n: usize, pos: &[usize]) -> usize {
    pos.iter()
        .fold(0, |acc, &p| (acc << 1) | ((index >> (n - 1 - p)) & 1))
}

/// Inverse of [`gather_bits`]: spreads `sub` over register positions `pos`.
#[inline]
pub(crate) fn scatter_bits(sub: usize, n: usize, pos: &[usize]) -> usize {
    let k = pos.len();
    pos.iter().enumerate().fold(0, |acc, (j, &p)| {
        acc | (((sub >> (k - 1 - j)) & 1) << (n - 1 - p))
    })
}

/// Normalized pure state over an ordered register of labelled qubits.
#[derive(Clone, PartialEq)]
pub struct StateVector {
    labels: Vec<Label>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Rejects the amplitudes unless their squared norm is 1 within `1e-10`.
    pub fn new(labels: Vec<Label>, amps: Vec<C64>) -> Result<Self> {
        let state = Self::build(labels, amps)?;
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(state)
    }

    /// Rescales the amplitudes to unit norm.
    pub fn normalized(labels: Vec<Label>, amps: Vec<C64>) -> Result<Self> {
        let mut state = Self::build(labels, amps)?;
        let norm = state.norm_sqr().sqrt();
        if norm < DEGENERATE_PROB {
            return Err(Error::ZeroNorm);
        }
        state.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(state)
    }

    fn build(labels: Vec<Label>, amps: Vec<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let expected = 1usize << labels.len();
        if amps.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { labels, amps })
    }

    /// Computational basis state `|index>`.
    pub fn basis_state(labels: Vec<Label>, index: usize) -> Result<Self> {
        let dim = 1usize << labels.len();
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: index,
            });
        }
        let mut amps = vec![c(0.0); dim];
        amps[index] = c(1.0);
        Self::new(labels, amps)
    }

    /// The empty register, the unit of [`tensor`](Self::tensor).
    pub fn scalar() -> Self {
        Self {
            labels: Vec::new(),
            amps: vec![c(1.0)],
        }
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(C64::norm_sqr).sum()
    }

    /// Amplitude of the computational basis state whose bits are given per label.
    pub fn amp(&self, index: usize) -> C64 {
        self.amps[index]
    }

    /// Kronecker product; `self`'s labels come first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let labels: Vec<Label> = self.labels.iter().chain(&other.labels).cloned().collect();
        check_labels(&labels)?;
        let amps = self
            .amps
            .iter()
            .flat_map(|x| other.amps.iter().map(move |y| x * y))
            .collect();
        Ok(Self { labels, amps })
    }

    /// Applies a unitary gate to `targets`. The first target is the most
    /// significant bit of the gate's index.
    pub fn apply_gate(&self, gate: &GateMatrix, targets: &[Label]) -> Result<Self> {
        let deviation = gate.unitarity_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        self.apply_operator(gate, targets)
    }

    /// Like [`apply_gate`](Self::apply_gate) but without the unitarity check.
    /// The result is not renormalized, so only use it with unitaries built
    /// from validated parts.
    pub(crate) fn apply_operator(&self, gate: &GateMatrix, targets: &[Label]) -> Result<Self> {
        if targets.len() != gate.num_qubits() {
            return Err(Error::DimensionMismatch {
                expected: gate.num_qubits(),
                actual: targets.len(),
            });
        }
        let pos = positions(&self.labels, targets)?;
        let n = self.num_qubits();
        let mask = scatter_bits(gate.dim() - 1, n, &pos);
        let mut amps = self.amps.clone();
        let mut local = vec![c(0.0); gate.dim()];
        for base in (0..self.dim()).filter(|i| i & mask == 0) {
            for (sub, slot) in local.iter_mut().enumerate() {
                *slot = self.amps[base | scatter_bits(sub, n, &pos)];
            }
            for (sub, v) in gate.apply_to(&local).into_iter().enumerate() {
                amps[base | scatter_bits(sub, n, &pos)] = v;
            }
        }
        Ok(Self {
            labels: self.labels.clone(),
            amps,
        })
    }

    /// `<self|other>`; both registers must carry the same labels in the same order.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.labels != other.labels {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(x, y)| x.conj() * y)
            .sum())
    }

    /// `|<self|other>|^2`, insensitive to global phase.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr().min(1.0))
    }

    /// Reorders the register so that labels appear in `order`.
    pub fn permute(&self, order: &[Label]) -> Result<Self> {
        if order.len() != self.labels.len() {
            return Err(Error::DimensionMismatch {
                expected: self.labels.len(),
                actual: order.len(),
            });
        }
        let pos = positions(&self.labels, order)?;
        let n = self.num_qubits();
        let mut amps = vec![c(0.0); self.dim()];
        for (i, a) in self.amps.iter().enumerate() {
            amps[gather_bits(i, n, &pos)] = *a;
        }
        Ok(Self {
            labels: order.to_vec(),
            amps,
        })
    }

    /// Reduced density matrix over `keep`, in the order given. An empty `keep`
    /// is rejected; use [`trace_out`](Self::trace_out) to discard everything.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<DensityMatrix> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        DensityMatrix::from_pure(self).partial_trace(keep)
    }

    /// Traces out `remove`, keeping the remaining qubits in register order.
    pub fn trace_out(&self, remove: &[Label]) -> Result<DensityMatrix> {
        DensityMatrix::from_pure(self).trace_out(remove)
    }

    /// All branches of a projective measurement of `basis.subsystem()`.
    pub fn measure(&self, basis: &MeasurementBasis) -> Result<Vec<Branch>> {
        basis.branches(self)
    }

    /// Draws one branch by inverting the cumulative distribution with a single
    /// uniform variate taken from `rng`.
    pub fn measure_sampled<R: rand::Rng + ?Sized>(
        &self,
        basis: &MeasurementBasis,
        rng: &mut R,
    ) -> Result<Branch> {
        let u: f64 = rng.random();
        basis.select(self.measure(basis)?, u)
    }
}

impl fmt::Debug for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.labels.iter().map(Label::as_str).collect();
        write!(f, "StateVector[{}](", names.join(""))?;
        let n = self.num_qubits();
        let mut first = true;
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm() < 1e-15 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({:.6}{:+.6}i)|{:0width$b}>", a.re, a.im, i, width = n)?;
        }
        write!(f, ")")
    }
}
