use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::{CMatrix, C64};

/// Single-site operator kinds.
///
/// For spin-1/2 the Pauli convention is used (`Z = diag(1, −1)`, `Plus = |↑⟩⟨↓|`);
/// for spin-1 the spin matrices `S^α` in the basis (+, 0, −).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LocalKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
    ZSquared,
    ProjUp,
    ProjDown,
    ProjPlus,
    ProjZero,
    ProjMinus,
    Identity,
}

impl FromStr for LocalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "x" => LocalKind::X,
            "y" => LocalKind::Y,
            "z" => LocalKind::Z,
            "+" => LocalKind::Plus,
            "-" => LocalKind::Minus,
            "z2" => LocalKind::ZSquared,
            "up" => LocalKind::ProjUp,
            "down" => LocalKind::ProjDown,
            "p+" => LocalKind::ProjPlus,
            "p0" => LocalKind::ProjZero,
            "p-" => LocalKind::ProjMinus,
            "1" => LocalKind::Identity,
            other => return Err(Error::UnknownOperator(other.to_string())),
        })
    }
}

impl fmt::Display for LocalKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LocalKind::X => "x",
            LocalKind::Y => "y",
            LocalKind::Z => "z",
            LocalKind::Plus => "+",
            LocalKind::Minus => "-",
            LocalKind::ZSquared => "z2",
            LocalKind::ProjUp => "up",
            LocalKind::ProjDown => "down",
            LocalKind::ProjPlus => "p+",
            LocalKind::ProjZero => "p0",
            LocalKind::ProjMinus => "p-",
            LocalKind::Identity => "1",
        };
        f.write_str(s)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn local_operator(kind: LocalKind, local_dim: usize) -> Result<CMatrix> {
    let incompatible = || Error::IncompatibleLocalDim {
        kind: kind.to_string(),
        local_dim,
    };
    let i = C64::i();
    match local_dim {
        2 => {
            let m = match kind {
                LocalKind::X => [[c(0.), c(1.)], [c(1.), c(0.)]],
                LocalKind::Y => [[c(0.), -i], [i, c(0.)]],
                LocalKind::Z => [[c(1.), c(0.)], [c(0.), c(-1.)]],
                LocalKind::Plus => [[c(0.), c(1.)], [c(0.), c(0.)]],
                LocalKind::Minus => [[c(0.), c(0.)], [c(1.), c(0.)]],
                LocalKind::ProjUp => [[c(1.), c(0.)], [c(0.), c(0.)]],
                LocalKind::ProjDown => [[c(0.), c(0.)], [c(0.), c(1.)]],
                LocalKind::Identity => [[c(1.), c(0.)], [c(0.), c(1.)]],
                _ => return Err(incompatible()),
            };
            Ok(CMatrix::from_fn(2, 2, |r, col| m[r][col]))
        }
        3 => {
            let s = std::f64::consts::SQRT_2;
            let h = s / 2.0;
            let z = c(0.);
            let m = match kind {
                LocalKind::X => [[z, c(h), z], [c(h), z, c(h)], [z, c(h), z]],
                LocalKind::Y => [
                    [z, -i * h, z],
                    [i * h, z, -i * h],
                    [z, i * h, z],
                ],
                LocalKind::Z => [[c(1.), z, z], [z, z, z], [z, z, c(-1.)]],
                LocalKind::Plus => [[z, c(s), z], [z, z, c(s)], [z, z, z]],
                LocalKind::Minus => [[z, z, z], [c(s), z, z], [z, c(s), z]],
                LocalKind::ZSquared => [[c(1.), z, z], [z, z, z], [z, z, c(1.)]],
                LocalKind::ProjPlus => [[c(1.), z, z], [z, z, z], [z, z, z]],
                LocalKind::ProjZero => [[z, z, z], [z, c(1.), z], [z, z, z]],
                LocalKind::ProjMinus => [[z, z, z], [z, z, z], [z, z, c(1.)]],
                LocalKind::Identity => [[c(1.), z, z], [z, c(1.), z], [z, z, c(1.)]],
                _ => return Err(incompatible()),
            };
            Ok(CMatrix::from_fn(3, 3, |r, col| m[r][col]))
        }
        _ => Err(incompatible()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &CMatrix, b: &CMatrix) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn pauli_z_convention() {
        let z = local_operator(LocalKind::Z, 2).unwrap();
        assert!(close(&z, &CMatrix::from_diagonal(&crate::CVector::from_vec(vec![c(1.), c(-1.)]))));
    }

    #[test]
    fn spin_one_z_squared() {
        let z2 = local_operator(LocalKind::ZSquared, 3).unwrap();
        let z = local_operator(LocalKind::Z, 3).unwrap();
        assert!(close(&z2, &(&z * &z)));
        assert!(close(&z2, &CMatrix::from_diagonal(&crate::CVector::from_vec(vec![c(1.), c(0.), c(1.)]))));
    }

    #[test]
    fn bimagnon_creation_from_raising_operator() {
        // (S⁺)²/2 = |+⟩⟨−|
        let plus = local_operator(LocalKind::Plus, 3).unwrap();
        let bimagnon = &plus * &plus / c(2.0);
        let mut expected = CMatrix::zeros(3, 3);
        expected[(0, 2)] = c(1.0);
        assert!(close(&bimagnon, &expected));
    }

    #[test]
    fn spin_one_algebra() {
        let x = local_operator(LocalKind::X, 3).unwrap();
        let y = local_operator(LocalKind::Y, 3).unwrap();
        let z = local_operator(LocalKind::Z, 3).unwrap();
        // [Sx, Sy] = i Sz and S² = 2
        assert!(close(&(&x * &y - &y * &x), &(&z * C64::i())));
        let casimir = &x * &x + &y * &y + &z * &z;
        assert!(close(&casimir, &(CMatrix::identity(3, 3) * c(2.0))));
        let plus = local_operator(LocalKind::Plus, 3).unwrap();
        assert!(close(&plus, &(&x + &y * C64::i())));
    }

    #[test]
    fn incompatible_kinds() {
        assert!(matches!(
            local_operator(LocalKind::ZSquared, 2),
            Err(Error::IncompatibleLocalDim { .. })
        ));
        assert!(local_operator(LocalKind::ProjUp, 3).is_err());
        assert!(local_operator(LocalKind::ProjZero, 2).is_err());
        assert!(local_operator(LocalKind::X, 4).is_err());
        assert!(matches!(
            "w".parse::<LocalKind>(),
            Err(Error::UnknownOperator(_))
        ));
    }
}
