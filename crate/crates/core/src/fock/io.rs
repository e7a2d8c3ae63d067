//! Little-endian eigenpair cache.
//!
//! Layout: `u64 n_sites`, `u64 cutoff`, `u64 dimension`, `f64 energy`, then
//! `dimension` amplitudes as `(f64 re, f64 im)` pairs.

use std::io::{Read, Write};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenDump {
    pub n_sites: u64,
    pub cutoff: u64,
    pub energy: f64,
    pub amplitudes: Vec<Complex<f64>>,
}

impl EigenDump {
    pub fn new<T: Real>(n_sites: usize, cutoff: usize, energy: T, amps: &[Complex<T>]) -> Self {
        EigenDump {
            n_sites: n_sites as u64,
            cutoff: cutoff as u64,
            energy: energy.as_f64(),
            amplitudes: amps
                .iter()
                .map(|z| Complex::new(z.re.as_f64(), z.im.as_f64()))
                .collect(),
        }
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(&self.n_sites.to_le_bytes())?;
        w.write_all(&self.cutoff.to_le_bytes())?;
        w.write_all(&(self.amplitudes.len() as u64).to_le_bytes())?;
        w.write_all(&self.energy.to_le_bytes())?;
        for z in &self.amplitudes {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut word = [0u8; 8];
        let mut next = |r: &mut dyn Read| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let n_sites = u64::from_le_bytes(next(&mut r)?);
        let cutoff = u64::from_le_bytes(next(&mut r)?);
        let dim = u64::from_le_bytes(next(&mut r)?);
        let energy = f64::from_le_bytes(next(&mut r)?);
        if dim > (1 << 32) {
            return Err(Error::Io(format!("implausible dimension {dim} in dump")));
        }
        let mut amplitudes = Vec::with_capacity(dim as usize);
        for _ in 0..dim {
            let re = f64::from_le_bytes(next(&mut r)?);
            let im = f64::from_le_bytes(next(&mut r)?);
            amplitudes.push(Complex::new(re, im));
        }
        Ok(EigenDump {
            n_sites,
            cutoff,
            energy,
            amplitudes,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn byte_layout() {
        let d = EigenDump::new(2, 1, -1.5f64, &[Complex::new(1.0, -2.0)]);
        let mut buf = Vec::new();
        d.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 4 * 8 + 16);
        assert_eq!(&buf[0..8], &2u64.to_le_bytes());
        assert_eq!(&buf[24..32], &(-1.5f64).to_le_bytes());
        assert_eq!(&buf[40..48], &(-2.0f64).to_le_bytes());
        assert_eq!(EigenDump::read_from(&buf[..]).unwrap(), d);
        assert!(EigenDump::read_from(&buf[..20]).is_err());
    }
}
