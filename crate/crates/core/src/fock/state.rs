use std::sync::Arc;

use num_complex::Complex;

use super::basis::FockBasis;
use super::operator::SparseOperator;
use crate::error::{Error, Result};
use crate::scalar::{inner, norm, Real};

/// Complex amplitudes over a shared [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector<T> {
    basis: Arc<FockBasis>,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn new(basis: Arc<FockBasis>, amps: Vec<Complex<T>>) -> Result<Self> {
        if amps.len() != basis.dimension() {
            return Err(Error::DimensionMismatch {
                expected: basis.dimension(),
                got: amps.len(),
            });
        }
        if amps.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParams("state has non-finite amplitudes".into()));
        }
        Ok(StateVector { basis, amps })
    }

    pub fn zeros(basis: Arc<FockBasis>) -> Self {
        let amps = vec![Complex::new(T::zero(), T::zero()); basis.dimension()];
        StateVector { basis, amps }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex<T>] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amps
    }

    pub fn norm(&self) -> T {
        norm(&self.amps)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > T::zero()) {
            return Err(Error::InvalidParams("cannot normalize a zero state".into()));
        }
        self.amps.iter_mut().for_each(|z| *z /= n);
        Ok(self)
    }

    /// `<self|other>`; both states must share the same basis layout.
    pub fn overlap(&self, other: &StateVector<T>) -> Result<Complex<T>> {
        if *self.basis != *other.basis {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dimension(),
                got: other.basis.dimension(),
            });
        }
        Ok(inner(&self.amps, &other.amps))
    }
}

/// `<psi|A|psi> / <psi|psi>`.
pub fn expectation<T: Real>(op: &SparseOperator<T>, psi: &StateVector<T>) -> Result<Complex<T>> {
    let a_psi = op.apply_checked(psi.amplitudes())?;
    let n2 = psi.norm().powi(2);
    if !(n2 > T::zero()) {
        return Err(Error::InvalidParams("expectation in a zero state".into()));
    }
    Ok(inner(psi.amplitudes(), &a_psi) / n2)
}
