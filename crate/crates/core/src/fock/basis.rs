use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::binomial;

/// Default cap on the dense basis dimension.
pub const DEFAULT_DIMENSION_CAP: usize = 5_000_000;

/// Which fermion-number sectors a basis spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    ZeroExcitation,
    OneExcitation,
    Both,
}

impl Sector {
    pub fn has_zero(self) -> bool {
        matches!(self, Sector::ZeroExcitation | Sector::Both)
    }

    pub fn has_one(self) -> bool {
        matches!(self, Sector::OneExcitation | Sector::Both)
    }
}

/// Truncated excitation x phonon basis on a ring of `n_sites`.
///
/// Phonon configurations obey a total-number cap `sum m_i <= cutoff` and are
/// ordered lexicographically. The zero-excitation block (if present) comes
/// first, followed by one block per excitation site.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    n_sites: usize,
    cutoff: usize,
    sector: Sector,
    phonon_dim: usize,
    /// Row-major `phonon_dim x n_sites` occupation table.
    configs: Vec<u16>,
    /// `binom[a][b] = C(a, b)` for `a <= n_sites + cutoff + 1`.
    binom: Vec<Vec<usize>>,
}

/// Decoded basis element.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BasisState<'a> {
    /// Site holding the excitation, or `None` in the zero sector.
    pub excitation: Option<usize>,
    pub phonons: &'a [u16],
}

pub fn build_basis(n_sites: usize, cutoff: usize, sector: Sector) -> Result<FockBasis> {
    FockBasis::with_cap(n_sites, cutoff, sector, DEFAULT_DIMENSION_CAP)
}

/// Number of phonon configurations on `n_sites` with at most `cutoff` quanta.
pub fn phonon_dimension(n_sites: usize, cutoff: usize) -> u128 {
    binomial(n_sites + cutoff, n_sites)
}

impl FockBasis {
    pub fn with_cap(n_sites: usize, cutoff: usize, sector: Sector, cap: usize) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "basis needs at least 2 sites, got {n_sites}"
            )));
        }
        if cutoff > u16::MAX as usize {
            return Err(Error::InvalidParams(format!("cutoff {cutoff} too large")));
        }
        let ph = phonon_dimension(n_sites, cutoff);
        let blocks = match sector {
            Sector::ZeroExcitation => 1,
            Sector::OneExcitation => n_sites as u128,
            Sector::Both => n_sites as u128 + 1,
        };
        let dim = ph.saturating_mul(blocks);
        if dim > cap as u128 {
            return Err(Error::SizeOverflow { dim, cap });
        }
        let phonon_dim = ph as usize;
        let top = n_sites + cutoff + 1;
        let mut binom = vec![vec![0usize; n_sites + 2]; top + 1];
        for (a, row) in binom.iter_mut().enumerate() {
            for (b, c) in row.iter_mut().enumerate() {
                *c = binomial(a, b) as usize;
            }
        }
        let mut configs = Vec::with_capacity(phonon_dim * n_sites);
        let mut current = vec![0u16; n_sites];
        enumerate(&mut current, 0, cutoff, &mut configs);
        debug_assert_eq!(configs.len(), phonon_dim * n_sites);
        Ok(FockBasis {
            n_sites,
            cutoff,
            sector,
            phonon_dim,
            configs,
            binom,
        })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn phonon_dim(&self) -> usize {
        self.phonon_dim
    }

    pub fn dimension(&self) -> usize {
        match self.sector {
            Sector::ZeroExcitation => self.phonon_dim,
            Sector::OneExcitation => self.phonon_dim * self.n_sites,
            Sector::Both => self.phonon_dim * (self.n_sites + 1),
        }
    }

    /// Offset of the first one-excitation state.
    pub fn one_offset(&self) -> Option<usize> {
        match self.sector {
            Sector::ZeroExcitation => None,
            Sector::OneExcitation => Some(0),
            Sector::Both => Some(self.phonon_dim),
        }
    }

    pub fn zero_offset(&self) -> Option<usize> {
        self.sector.has_zero().then_some(0)
    }

    pub fn phonons(&self, phonon_index: usize) -> &[u16] {
        &self.configs[phonon_index * self.n_sites..(phonon_index + 1) * self.n_sites]
    }

    pub fn state(&self, index: usize) -> BasisState<'_> {
        let (excitation, p) = self.split(index);
        BasisState {
            excitation,
            phonons: self.phonons(p),
        }
    }

    /// `(excitation site, phonon index)` of a dense index.
    pub fn split(&self, index: usize) -> (Option<usize>, usize) {
        debug_assert!(index < self.dimension());
        let ph = self.phonon_dim;
        match self.sector {
            Sector::ZeroExcitation => (None, index),
            Sector::OneExcitation => (Some(index / ph), index % ph),
            Sector::Both => {
                if index < ph {
                    (None, index)
                } else {
                    let r = index - ph;
                    (Some(r / ph), r % ph)
                }
            }
        }
    }

    /// Dense index of `(excitation, phonon index)`, if that sector is present.
    pub fn join(&self, excitation: Option<usize>, phonon_index: usize) -> Option<usize> {
        match (excitation, self.sector) {
            (None, s) if s.has_zero() => Some(phonon_index),
            (Some(n), s) if s.has_one() && n < self.n_sites => {
                Some(self.one_offset()? + n * self.phonon_dim + phonon_index)
            }
            _ => None,
        }
    }

    /// Lexicographic rank of a phonon configuration, `None` if it exceeds the
    /// cutoff or has the wrong length.
    pub fn phonon_rank(&self, m: &[u16]) -> Option<usize> {
        if m.len() != self.n_sites {
            return None;
        }
        let mut budget = self.cutoff;
        let mut rank = 0usize;
        for (i, &mi) in m.iter().enumerate() {
            let mi = mi as usize;
            if mi > budget {
                return None;
            }
            let k = self.n_sites - i - 1;
            // configurations with a smaller value at site i
            rank += self.binom[budget + k + 1][k + 1] - self.binom[budget - mi + k + 1][k + 1];
            budget -= mi;
        }
        Some(rank)
    }

    pub fn index_of(&self, excitation: Option<usize>, m: &[u16]) -> Option<usize> {
        self.join(excitation, self.phonon_rank(m)?)
    }

    /// Rank of the configuration `m` translated by `d` sites:
    /// `m'[(s + d) mod N] = m[s]`.
    pub fn shifted_rank(&self, m: &[u16], d: usize, scratch: &mut Vec<u16>) -> usize {
        let n = self.n_sites;
        scratch.clear();
        scratch.resize(n, 0);
        for (s, &ms) in m.iter().enumerate() {
            scratch[(s + d) % n] = ms;
        }
        self.phonon_rank(scratch).expect("translation preserves the total cap")
    }
}

fn enumerate(current: &mut [u16], site: usize, budget: usize, out: &mut Vec<u16>) {
    if site == current.len() {
        out.extend_from_slice(current);
        return;
    }
    for v in 0..=budget {
        current[site] = v as u16;
        enumerate(current, site + 1, budget - v, out);
    }
    current[site] = 0;
}
