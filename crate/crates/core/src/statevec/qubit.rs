use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::{c, Label, StateVector, ALGEBRA_TOL, DEGENERATE_PROB};

/// Single-qubit pure state `alpha|0> + beta|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Qubit {
    pub alpha: C64,
    pub beta: C64,
}

impl Qubit {
    /// Requires `|alpha|^2 + |beta|^2 = 1` within `1e-12`.
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        if ![alpha.re, alpha.im, beta.re, beta.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = alpha.norm_sqr() + beta.norm_sqr();
        if (norm - 1.0).abs() > ALGEBRA_TOL {
            return Err(Error::InvalidQubit(format!(
                "|alpha|^2 + |beta|^2 = {norm}, expected 1"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// Rescales `(alpha, beta)` to unit norm.
    pub fn normalized(alpha: C64, beta: C64) -> Result<Self> {
        if ![alpha.re, alpha.im, beta.re, beta.im].iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if norm < DEGENERATE_PROB {
            return Err(Error::ZeroNorm);
        }
        Ok(Self {
            alpha: alpha / norm,
            beta: beta / norm,
        })
    }

    pub fn real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(c(alpha), c(beta))
    }

    pub fn zero() -> Self {
        Self { alpha: c(1.0), beta: c(0.0) }
    }

    pub fn one() -> Self {
        Self { alpha: c(0.0), beta: c(1.0) }
    }

    pub fn plus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { alpha: c(h), beta: c(h) }
    }

    pub fn minus() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self { alpha: c(h), beta: c(-h) }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> C64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }

    pub fn to_state(&self, label: impl Into<Label>) -> StateVector {
        StateVector::new(vec![label.into()], vec![self.alpha, self.beta])
            .expect("qubit invariants imply a valid state")
    }

    /// Reads a one-qubit register back into a [`Qubit`].
    pub fn from_state(state: &StateVector) -> Result<Self> {
        if state.num_qubits() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                actual: state.dim(),
            });
        }
        Self::normalized(state.amp(0), state.amp(1))
    }
}

/// `|<x|y>|^2`, in `[0, 1]` for normalized inputs.
pub fn fidelity(x: &Qubit, y: &Qubit) -> f64 {
    x.inner(y).norm_sqr().min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fidelity_of_identical_and_orthogonal() {
        assert_eq!(fidelity(&Qubit::zero(), &Qubit::zero()), 1.0);
        assert_eq!(fidelity(&Qubit::zero(), &Qubit::one()), 0.0);
        assert!(fidelity(&Qubit::plus(), &Qubit::minus()) < 1e-30);
    }

    #[test]
    fn fidelity_of_rotated_pair_is_zero() {
        let x = Qubit::real(0.6, 0.8).unwrap();
        let y = Qubit::real(-0.8, 0.6).unwrap();
        // <x|y> = 0.6 * -0.8 + 0.8 * 0.6 = 0
        assert!(fidelity(&x, &y).abs() < 1e-30);
    }

    #[test]
    fn fidelity_is_phase_invariant() {
        let x = Qubit::new(C64::new(0.6, 0.0), C64::new(0.0, 0.8)).unwrap();
        let ph = C64::from_polar(1.0, 1.3);
        let y = Qubit::new(x.alpha * ph, x.beta * ph).unwrap();
        assert!((fidelity(&x, &y) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn validation() {
        assert!(Qubit::real(1.0, 1.0).is_err());
        assert!(Qubit::real(f64::NAN, 0.0).is_err());
        let q = Qubit::normalized(c(3.0), c(4.0)).unwrap();
        assert!((q.alpha.re - 0.6).abs() < 1e-15);
        assert!(Qubit::normalized(c(0.0), c(0.0)).is_err());
    }
}
