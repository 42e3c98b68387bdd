use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::{Error, Result};

use super::{c, check_labels, positions, scatter_bits, Label, StateVector, STATE_TOL};

/// Hermitian, unit-trace, positive semidefinite matrix over labelled qubits,
/// stored row-major.
#[derive(Clone, PartialEq)]
pub struct DensityMatrix {
    labels: Vec<Label>,
    dim: usize,
    entries: Vec<C64>,
}

/// Serializes as `{labels, matrix}` with `matrix` a list of rows of `[re, im]`.
impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[C64]> = self.entries.chunks(self.dim).collect();
        let mut st = serializer.serialize_struct("DensityMatrix", 2)?;
        st.serialize_field("labels", &self.labels)?;
        st.serialize_field("matrix", &rows)?;
        st.end()
    }
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and eigenvalues `>= -1e-10`.
    pub fn new(labels: Vec<Label>, entries: Vec<C64>) -> Result<Self> {
        check_labels(&labels)?;
        let dim = 1usize << labels.len();
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let rho = Self { labels, dim, entries };
        rho.validate()?;
        Ok(rho)
    }

    fn validate(&self) -> Result<()> {
        let herm = self.hermiticity_deviation();
        if herm > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "not Hermitian (max |rho - rho^+| = {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!("trace {tr} != 1")));
        }
        let min = self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
        if min < -STATE_TOL {
            return Err(Error::InvalidDensityMatrix(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    /// `|s><s|`.
    pub fn from_pure(s: &StateVector) -> Self {
        let dim = s.dim();
        let amps = s.amps();
        let entries = (0..dim * dim)
            .map(|k| amps[k / dim] * amps[k % dim].conj())
            .collect();
        Self {
            labels: s.labels().to_vec(),
            dim,
            entries,
        }
    }

    /// `sum_i p_i |s_i><s_i|` over states sharing one register.
    pub fn mixture<'a, I>(components: I) -> Result<Self>
    where
        I: IntoIterator<Item = (f64, &'a StateVector)>,
    {
        let mut acc: Option<Self> = None;
        for (p, s) in components {
            let term = Self::from_pure(s);
            acc = Some(match acc {
                None => term.scaled(p),
                Some(mut rho) => {
                    if rho.labels != term.labels {
                        return Err(Error::DimensionMismatch {
                            expected: rho.dim,
                            actual: term.dim,
                        });
                    }
                    rho.entries
                        .iter_mut()
                        .zip(&term.entries)
                        .for_each(|(x, y)| *x += y * p);
                    rho
                }
            });
        }
        let rho = acc.ok_or(Error::ZeroNorm)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Diagonal matrix; the entries must sum to 1.
    pub fn diagonal(labels: Vec<Label>, diag: &[f64]) -> Result<Self> {
        let dim = diag.len();
        let mut entries = vec![c(0.0); dim * dim];
        for (i, d) in diag.iter().enumerate() {
            entries[i * dim + i] = c(*d);
        }
        Self::new(labels, entries)
    }

    fn scaled(mut self, p: f64) -> Self {
        self.entries.iter_mut().for_each(|z| *z *= p);
        self
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// `tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        // rho is Hermitian, so tr(rho^2) = sum |rho_ij|^2
        self.entries.iter().map(C64::norm_sqr).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        (0..d * d)
            .map(|k| (self.entries[k] - self.entries[(k % d) * d + k / d].conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.dim, self.dim, &self.entries);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "density matrix dimension mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Reduced matrix over `keep`, in the order given.
    pub fn partial_trace(&self, keep: &[Label]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        self.reduce(keep)
    }

    /// Traces out `remove`; removing every qubit yields the 1x1 matrix `[1]`.
    pub fn trace_out(&self, remove: &[Label]) -> Result<Self> {
        positions(&self.labels, remove)?;
        let keep: Vec<Label> = self
            .labels
            .iter()
            .filter(|l| !remove.contains(l))
            .cloned()
            .collect();
        self.reduce(&keep)
    }

    fn reduce(&self, keep: &[Label]) -> Result<Self> {
        let n = self.labels.len();
        let kpos = positions(&self.labels, keep)?;
        let rpos: Vec<usize> = (0..n).filter(|p| !kpos.contains(p)).collect();
        let kd = 1usize << kpos.len();
        let rd = 1usize << rpos.len();
        let mut entries = vec![c(0.0); kd * kd];
        for i in 0..kd {
            let ri = scatter_bits(i, n, &kpos);
            for j in 0..kd {
                let rj = scatter_bits(j, n, &kpos);
                entries[i * kd + j] = (0..rd)
                    .map(|r| {
                        let off = scatter_bits(r, n, &rpos);
                        self.get(ri | off, rj | off)
                    })
                    .sum();
            }
        }
        Ok(Self {
            labels: keep.to_vec(),
            dim: kd,
            entries,
        })
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.labels.iter().map(Label::as_str).collect();
        writeln!(f, "DensityMatrix[{}]", names.join(""))?;
        for r in 0..self.dim {
            let row: Vec<String> = (0..self.dim)
                .map(|col| {
                    let z = self.get(r, col);
                    format!("{:+.6}{:+.6}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}
