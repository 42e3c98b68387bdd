use std::fmt;
use std::ops::Mul;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

use super::{c, STATE_TOL};

/// Dense square operator on one or two qubits, stored row-major.
///
/// Index bits follow the target list handed to
/// [`StateVector::apply_gate`](super::StateVector::apply_gate): the first
/// target is the most significant bit of the row/column index.
#[derive(Clone, PartialEq)]
pub struct GateMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl GateMatrix {
    /// Builds a gate and rejects it unless `G G^+ = I` within `1e-10`.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        let gate = Self::new_unchecked(dim, entries)?;
        let deviation = gate.unitarity_deviation();
        if deviation > STATE_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(gate)
    }

    /// Builds an operator without the unitarity check. Shape is still validated.
    pub fn new_unchecked(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim != 2 && dim != 4 {
            return Err(Error::DimensionMismatch {
                expected: 4,
                actual: dim,
            });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self { dim, entries })
    }

    pub(crate) fn from_rows<const N: usize>(rows: [[C64; N]; N]) -> Self {
        Self {
            dim: N,
            entries: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = C64::new(1.0, 0.0);
        }
        Self { dim, entries }
    }

    pub fn pauli_x() -> Self {
        Self::from_rows([[c(0.0), c(1.0)], [c(1.0), c(0.0)]])
    }

    pub fn pauli_z() -> Self {
        Self::from_rows([[c(1.0), c(0.0)], [c(0.0), c(-1.0)]])
    }

    /// `iY = [[0, 1], [-1, 0]]`, the real form of the Pauli Y.
    pub fn pauli_iy() -> Self {
        Self::from_rows([[c(0.0), c(1.0)], [c(-1.0), c(0.0)]])
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::from_rows([[c(h), c(h)], [c(h), c(-h)]])
    }

    /// Controlled NOT with the first target as control.
    pub fn cnot() -> Self {
        let (o, l) = (c(0.0), c(1.0));
        Self::from_rows([[l, o, o, o], [o, l, o, o], [o, o, o, l], [o, o, l, o]])
    }

    /// Assembles a 4x4 matrix from four 2x2 blocks.
    pub fn from_blocks(tl: &Self, tr: &Self, bl: &Self, br: &Self) -> Self {
        debug_assert!([tl, tr, bl, br].iter().all(|b| b.dim == 2));
        let mut entries = vec![C64::new(0.0, 0.0); 16];
        for (block, r0, c0) in [(tl, 0, 0), (tr, 0, 2), (bl, 2, 0), (br, 2, 2)] {
            for r in 0..2 {
                for col in 0..2 {
                    entries[(r0 + r) * 4 + c0 + col] = block.get(r, col);
                }
            }
        }
        Self { dim: 4, entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            entries: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for col in 0..d {
                entries[col * d + r] = self.entries[r * d + col].conj();
            }
        }
        Self { dim: d, entries }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * k).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "gate dimension mismatch");
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(x, y)| x + y)
                .collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Frobenius norm of `G G^+ - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let prod = self * &self.adjoint();
        let id = Self::identity(self.dim);
        prod.frobenius_distance(&id)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_deviation() <= tol
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "gate dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "gate dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub(crate) fn apply_to(&self, v: &[C64]) -> Vec<C64> {
        (0..self.dim)
            .map(|r| (0..self.dim).map(|k| self.get(r, k) * v[k]).sum())
            .collect()
    }
}

impl Mul for &GateMatrix {
    type Output = GateMatrix;

    fn mul(self, rhs: &GateMatrix) -> GateMatrix {
        assert_eq!(self.dim, rhs.dim, "gate dimension mismatch");
        let d = self.dim;
        let mut entries = vec![C64::new(0.0, 0.0); d * d];
        for r in 0..d {
            for col in 0..d {
                entries[r * d + col] = (0..d).map(|k| self.get(r, k) * rhs.get(k, col)).sum();
            }
        }
        GateMatrix { dim: d, entries }
    }
}

impl fmt::Debug for GateMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "GateMatrix({}x{})", self.dim, self.dim)?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|col| {
                    let z = self.get(r, col);
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Coefficients `(k1, k2, k3, k4)` with `g = k1 I + k2 X + k3 Z + k4 iY`.
///
/// The four matrices are orthogonal under the Hilbert-Schmidt product and each
/// has squared norm 2, so `k = tr(P^+ g) / 2`.
pub fn pauli_decompose(g: &GateMatrix) -> Result<[C64; 4]> {
    if g.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: g.dim(),
        });
    }
    let basis = pauli_basis();
    Ok(std::array::from_fn(|i| (&basis[i].adjoint() * g).trace() / 2.0))
}

/// Inverse of [`pauli_decompose`]. The result is not checked for unitarity.
pub fn pauli_reconstruct(k: &[C64; 4]) -> GateMatrix {
    pauli_basis()
        .iter()
        .zip(k)
        .fold(GateMatrix::zeros(2), |acc, (p, &ki)| acc.add(&p.scale(ki)))
}

/// `[I, X, Z, iY]` in the order used by [`pauli_decompose`].
pub fn pauli_basis() -> [GateMatrix; 4] {
    [
        GateMatrix::identity(2),
        GateMatrix::pauli_x(),
        GateMatrix::pauli_z(),
        GateMatrix::pauli_iy(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(x: C64, y: C64) -> bool {
        (x - y).norm() < 1e-12
    }

    #[test]
    fn standard_gates_are_unitary() {
        for g in [
            GateMatrix::pauli_x(),
            GateMatrix::pauli_z(),
            GateMatrix::pauli_iy(),
            GateMatrix::hadamard(),
            GateMatrix::cnot(),
        ] {
            assert!(g.is_unitary(1e-12), "{g:?}");
        }
    }

    #[test]
    fn rejects_non_unitary_and_bad_shapes() {
        let err = GateMatrix::new(2, vec![c(1.0), c(1.0), c(0.0), c(1.0)]).unwrap_err();
        assert!(matches!(err, Error::NotUnitary { deviation } if deviation > 0.5));
        assert!(GateMatrix::new(3, vec![c(0.0); 9]).is_err());
        assert!(GateMatrix::new(2, vec![c(0.0); 3]).is_err());
        assert!(GateMatrix::new(2, vec![c(f64::NAN), c(0.0), c(0.0), c(1.0)]).is_err());
    }

    #[test]
    fn decompose_identity_and_x() {
        let k = pauli_decompose(&GateMatrix::identity(2)).unwrap();
        assert!(close(k[0], c(1.0)) && close(k[1], c(0.0)) && close(k[2], c(0.0)) && close(k[3], c(0.0)));
        let k = pauli_decompose(&GateMatrix::pauli_x()).unwrap();
        assert!(close(k[0], c(0.0)) && close(k[1], c(1.0)) && close(k[2], c(0.0)) && close(k[3], c(0.0)));
    }

    #[test]
    fn decompose_hadamard() {
        // Solving k1 + k3 = h, k1 - k3 = -h, k2 + k4 = h, k2 - k4 = h by hand.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let k = pauli_decompose(&GateMatrix::hadamard()).unwrap();
        for (got, want) in k.iter().zip([0.0, h, h, 0.0]) {
            assert!(close(*got, c(want)), "{k:?}");
        }
    }

    #[test]
    fn decompose_rejects_4x4() {
        assert!(pauli_decompose(&GateMatrix::cnot()).is_err());
    }

    fn arb_c64() -> impl Strategy<Value = C64> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| C64::new(re, im))
    }

    proptest! {
        #[test]
        fn decompose_reconstruct_roundtrip(e in proptest::collection::vec(arb_c64(), 4)) {
            let g = GateMatrix::new_unchecked(2, e).unwrap();
            let k = pauli_decompose(&g).unwrap();
            prop_assert!(pauli_reconstruct(&k).max_abs_diff(&g) < 1e-12);
        }
    }
}
