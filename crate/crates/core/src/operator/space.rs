use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// A chain of `len` sites, each with `local_dim` states (2 for spin-1/2, 3 for spin-1).
///
/// Computational basis states are indexed with site 1 as the most significant
/// digit. Local basis order is (↑, ↓) for spin-1/2 and (+, 0, −) for spin-1,
/// so digit 0 is always the highest local S^z.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpec {
    len: usize,
    local_dim: usize,
    boundary: Boundary,
}

impl HilbertSpec {
    pub fn new(len: usize, local_dim: usize, boundary: Boundary) -> Result<Self> {
        if len < 2 {
            return Err(Error::InvalidSpace(format!("need L >= 2, got {len}")));
        }
        if local_dim != 2 && local_dim != 3 {
            return Err(Error::InvalidSpace(format!(
                "local dimension must be 2 or 3, got {local_dim}"
            )));
        }
        let dim = (local_dim as u64).checked_pow(len as u32);
        if dim.is_none_or(|d| d > (1 << 28)) {
            return Err(Error::InvalidSpace(format!("{local_dim}^{len} is too large")));
        }
        Ok(Self {
            len,
            local_dim,
            boundary,
        })
    }

    pub fn spin_half(len: usize, boundary: Boundary) -> Result<Self> {
        Self::new(len, 2, boundary)
    }

    pub fn spin_one(len: usize, boundary: Boundary) -> Result<Self> {
        Self::new(len, 3, boundary)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn local_dim(&self) -> usize {
        self.local_dim
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Total Hilbert space dimension `local_dim^L`.
    pub fn dim(&self) -> usize {
        self.local_dim.pow(self.len as u32)
    }

    /// Maps a 1-based site label to a 0-based position. Labels `L+1..=2L`
    /// wrap around when the boundary is periodic.
    pub fn site_position(&self, site: usize) -> Result<usize> {
        if site == 0 || site > 2 * self.len {
            return Err(Error::SiteOutOfRange {
                site,
                len: self.len,
            });
        }
        if site <= self.len {
            return Ok(site - 1);
        }
        match self.boundary {
            Boundary::Periodic => Ok(site - self.len - 1),
            Boundary::Open => Err(Error::WrapUnderOpenBoundary { site }),
        }
    }

    /// Local state digit of `site0` (0-based) in basis state `index`.
    pub fn digit(&self, index: usize, site0: usize) -> usize {
        let shift = self.len - 1 - site0;
        (index / self.local_dim.pow(shift as u32)) % self.local_dim
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        let mut out = vec![0; self.len];
        let mut rest = index;
        for pos in (0..self.len).rev() {
            out[pos] = rest % self.local_dim;
            rest /= self.local_dim;
        }
        out
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .fold(0, |acc, &d| acc * self.local_dim + d)
    }

    /// Local magnetization of a digit: σ^z eigenvalue for spin-1/2, S^z for spin-1.
    pub fn local_magnetization(&self, digit: usize) -> i32 {
        match self.local_dim {
            2 => 1 - 2 * digit as i32,
            _ => 1 - digit as i32,
        }
    }

    /// Total magnetization of a basis state, in units of σ^z (spin-1/2) or S^z (spin-1).
    pub fn magnetization(&self, index: usize) -> i32 {
        self.digits(index)
            .into_iter()
            .map(|d| self.local_magnetization(d))
            .sum()
    }

    /// 1-based left sites of nearest-neighbour bonds, respecting the boundary.
    pub fn bonds(&self) -> Vec<usize> {
        self.windows(2)
    }

    /// 1-based left sites of `width`-site windows: `1..=L-width+1` (open) or `1..=L` (periodic).
    pub fn windows(&self, width: usize) -> Vec<usize> {
        match self.boundary {
            Boundary::Open => (1..=self.len + 1 - width.min(self.len)).collect(),
            Boundary::Periodic => (1..=self.len).collect(),
        }
    }
}

/// The vector space an operator acts on: a whole chain or one of its
/// magnetization sectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Chain(HilbertSpec),
    Sector {
        chain: HilbertSpec,
        magnetization: i32,
        dim: usize,
    },
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Chain(spec) => spec.dim(),
            Space::Sector { dim, .. } => *dim,
        }
    }

    pub fn chain(&self) -> HilbertSpec {
        match self {
            Space::Chain(spec) => *spec,
            Space::Sector { chain, .. } => *chain,
        }
    }

    pub fn sector(&self) -> Option<i32> {
        match self {
            Space::Chain(_) => None,
            Space::Sector { magnetization, .. } => Some(*magnetization),
        }
    }
}

impl From<HilbertSpec> for Space {
    fn from(spec: HilbertSpec) -> Self {
        Space::Chain(spec)
    }
}
