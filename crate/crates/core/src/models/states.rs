use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::terms::bimagnon_raising;
use crate::algebra::BondAlgebra;
use crate::error::{Error, Result};
use crate::operator::{binomial, HilbertSpec};
use crate::{CVector, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum ScarState {
    FerromagnetUp,
    FerromagnetDown,
    /// `n` momentum-π bimagnons on the all-down spin-1 ferromagnet.
    Tower { n: usize },
    /// One momentum-`k` bimagnon on top of `tower(n − 1)`.
    Aqmbs { n: usize, k: f64 },
}

impl ScarState {
    /// The slow bimagnon momentum `π + 2π/L`.
    pub fn default_momentum(len: usize) -> f64 {
        PI + 2.0 * PI / len as f64
    }
}

pub fn basis_state(spec: &HilbertSpec, index: usize) -> CVector {
    let mut v = CVector::zeros(spec.dim());
    v[index] = C64::new(1.0, 0.0);
    v
}

/// Product state from a pattern repeated periodically over the chain.
///
/// Spin-1/2 accepts `u`/`d` (or `↑`/`↓`); spin-1 accepts `+`/`0`/`-`.
pub fn product_state(spec: &HilbertSpec, pattern: &str) -> Result<CVector> {
    let symbols: Vec<char> = pattern.chars().collect();
    if symbols.is_empty() {
        return Err(Error::InvalidState("empty product-state pattern".into()));
    }
    let digit = |c: char| -> Result<usize> {
        match (spec.local_dim(), c) {
            (2, 'u' | '↑') => Ok(0),
            (2, 'd' | '↓') => Ok(1),
            (3, '+') => Ok(0),
            (3, '0') => Ok(1),
            (3, '-') => Ok(2),
            _ => Err(Error::InvalidState(format!(
                "symbol `{c}` is not a local state for local dimension {}",
                spec.local_dim()
            ))),
        }
    };
    let digits = (0..spec.len())
        .map(|j| digit(symbols[j % symbols.len()]))
        .collect::<Result<Vec<_>>>()?;
    Ok(basis_state(spec, spec.index_of(&digits)))
}

fn tower(spec: &HilbertSpec, n: usize) -> Result<CVector> {
    let raising = bimagnon_raising(spec, PI)?;
    let mut v = basis_state(spec, spec.dim() - 1);
    let mut factorial = 1.0;
    for m in 1..=n {
        v = raising.apply(&v);
        factorial *= m as f64;
    }
    let norm = factorial * (binomial(spec.len() as u64, n as u64) as f64).sqrt();
    Ok(v.unscale(norm))
}

pub fn scar_state(state: &ScarState, spec: &HilbertSpec) -> Result<CVector> {
    let need_spin_one = || {
        if spec.local_dim() == 3 {
            Ok(())
        } else {
            Err(Error::InvalidState("tower states live on spin-1 chains".into()))
        }
    };
    let len = spec.len();
    match *state {
        ScarState::FerromagnetUp => Ok(basis_state(spec, 0)),
        ScarState::FerromagnetDown => Ok(basis_state(spec, spec.dim() - 1)),
        ScarState::Tower { n } => {
            need_spin_one()?;
            if n > len {
                return Err(Error::InvalidState(format!("tower index {n} exceeds L = {len}")));
            }
            tower(spec, n)
        }
        ScarState::Aqmbs { n, k } => {
            need_spin_one()?;
            if n == 0 || n > len {
                return Err(Error::InvalidState(format!("bimagnon number {n} outside 1..={len}")));
            }
            let m = (k - PI) * len as f64 / (2.0 * PI);
            if (m - m.round()).abs() > 1e-9 {
                return Err(Error::InvalidState(format!("momentum {k} is not π + 2πm/L")));
            }
            let v = bimagnon_raising(spec, k)?.apply(&tower(spec, n - 1)?);
            let norm = v.norm();
            if norm < 1e-12 {
                return Err(Error::InvalidState(format!("|{n}, {k}⟩ vanishes")));
            }
            Ok(v.unscale(norm))
        }
    }
}

/// Result of testing whether a state is a simultaneous eigenvector of every generator.
#[derive(Clone, Debug)]
pub struct SingletReport {
    /// `(label, eigenvalue)`; `None` when `‖gψ − εψ‖` exceeds the tolerance.
    pub entries: Vec<(String, Option<f64>)>,
}

impl SingletReport {
    pub fn is_singlet(&self) -> bool {
        self.entries.iter().all(|(_, e)| e.is_some())
    }

    pub fn eigenvalue(&self, label: &str) -> Option<f64> {
        self.entries.iter().find(|(l, _)| l == label).and_then(|(_, e)| *e)
    }

    pub fn first_failure(&self) -> Option<&str> {
        self.entries.iter().find(|(_, e)| e.is_none()).map(|(l, _)| l.as_str())
    }
}

pub const SINGLET_TOL: f64 = 1e-10;

pub fn singlet_check(algebra: &BondAlgebra, psi: &CVector) -> SingletReport {
    let entries = algebra
        .generators()
        .iter()
        .map(|g| {
            let gpsi = g.op.apply(psi);
            let eps = psi.dotc(&gpsi).re;
            let residual = (&gpsi - psi * C64::new(eps, 0.0)).norm();
            (g.label.clone(), (residual < SINGLET_TOL).then_some(eps))
        })
        .collect();
    SingletReport { entries }
}

/// Initial states orthogonal to both ferromagnets: Néel, `↑↑↓↓…`, and a single flip `↓↑↑…`.
pub fn isolated_initial_states(spec: &HilbertSpec) -> Result<Vec<(String, CVector)>> {
    let flip: String = std::iter::once('d').chain(std::iter::repeat_n('u', spec.len() - 1)).collect();
    ["ud", "uudd", flip.as_str()]
        .iter()
        .map(|p| Ok((p.to_string(), product_state(spec, p)?)))
        .collect()
}

/// Zero-magnetization product state with local zeros, `|0 0 + −⟩` repeated.
pub fn tower_initial_state(spec: &HilbertSpec) -> Result<CVector> {
    let psi = product_state(spec, "00+-")?;
    let idx = psi.iter().position(|z| z.norm() > 0.0).unwrap_or(0);
    if spec.magnetization(idx) != 0 {
        return Err(Error::InvalidState(format!(
            "pattern 00+- has nonzero magnetization at L = {}",
            spec.len()
        )));
    }
    Ok(psi)
}
