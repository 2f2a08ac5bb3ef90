use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{double_commutator_superop, HilbertSpec, Space, SparseOperator, SparseSuperOperator};
use crate::C64;

/// Where a generator appears in a Lindbladian built from the algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    Hamiltonian,
    Jump,
    Both,
}

impl Role {
    pub fn in_hamiltonian(self) -> bool {
        matches!(self, Role::Hamiltonian | Role::Both)
    }

    pub fn is_jump(self) -> bool {
        matches!(self, Role::Jump | Role::Both)
    }
}

#[derive(Clone, Debug)]
pub struct Generator {
    /// Unique label, `family@site` for local terms or the bare family name.
    pub label: String,
    pub family: String,
    pub op: SparseOperator,
    pub role: Role,
}

/// Hermitian generators of a bond algebra (the identity is implicit).
#[derive(Clone, Debug)]
pub struct BondAlgebra {
    spec: HilbertSpec,
    generators: Vec<Generator>,
}

impl BondAlgebra {
    pub fn new(spec: HilbertSpec) -> Self {
        Self {
            spec,
            generators: Vec::new(),
        }
    }

    pub fn push(&mut self, family: &str, site: Option<usize>, op: SparseOperator, role: Role) -> Result<()> {
        if op.space() != Space::Chain(self.spec) {
            return Err(Error::DimensionMismatch {
                expected: self.spec.dim(),
                found: op.dim(),
            });
        }
        if !op.is_hermitian() {
            return Err(Error::InvalidArgument(format!("generator {family} is not hermitian")));
        }
        let label = match site {
            Some(s) => format!("{family}@{s}"),
            None => family.to_string(),
        };
        if self.generators.iter().any(|g| g.label == label) {
            return Err(Error::InvalidArgument(format!("duplicate generator label {label}")));
        }
        self.generators.push(Generator {
            label,
            family: family.to_string(),
            op,
            role,
        });
        Ok(())
    }

    pub fn spec(&self) -> HilbertSpec {
        self.spec
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn get(&self, label: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.label == label)
    }

    pub fn family(&self, family: &str) -> impl Iterator<Item = &Generator> + '_ {
        let family = family.to_string();
        self.generators.iter().filter(move |g| g.family == family)
    }
}

/// `P = Σ_g ad_g† ad_g = Σ_g [g, [g, ·]]` over all generators.
pub fn super_hamiltonian(algebra: &BondAlgebra) -> Result<SparseSuperOperator> {
    let space = Space::Chain(algebra.spec);
    let terms = algebra
        .generators
        .iter()
        .map(|g| double_commutator_superop(&g.op))
        .collect::<Result<Vec<_>>>()?;
    let one = C64::new(1.0, 0.0);
    let refs: Vec<(C64, &SparseSuperOperator)> = terms.iter().map(|t| (one, t)).collect();
    Ok(SparseSuperOperator::linear_combination(space, &refs))
}
