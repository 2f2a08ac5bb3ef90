use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::terms;
use crate::algebra::{BondAlgebra, Role};
use crate::error::{Error, Result};
use crate::operator::{Boundary, HilbertSpec, LocalKind, SparseOperator};
use crate::C64;

pub type Params = BTreeMap<String, f64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelId {
    /// XX bonds and on-site X, Z: generates every operator.
    Full,
    /// `{XX, Z}`, commutant spanned by 1 and the global Z parity.
    Z2,
    /// `{XX, ZZ}`, two commuting parities.
    DoubleZ2,
    /// `{XX + YY, Z}`, magnetization conservation.
    U1,
    /// Single scar `|↑…↑⟩`.
    Isolated1,
    /// Two scars `|↑…↑⟩`, `|↓…↓⟩`.
    Isolated2,
    /// Spin-1 tower model with on-site `(S^z)²` dephasing.
    Tower1,
    /// Spin-1 tower model with exchange jumps.
    Tower2,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Full,
        ModelId::Z2,
        ModelId::DoubleZ2,
        ModelId::U1,
        ModelId::Isolated1,
        ModelId::Isolated2,
        ModelId::Tower1,
        ModelId::Tower2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Full => "full",
            ModelId::Z2 => "z2",
            ModelId::DoubleZ2 => "double-z2",
            ModelId::U1 => "u1",
            ModelId::Isolated1 => "isolated-1",
            ModelId::Isolated2 => "isolated-2",
            ModelId::Tower1 => "tower-1",
            ModelId::Tower2 => "tower-2",
        }
    }

    pub fn local_dim(self) -> usize {
        match self {
            ModelId::Tower1 | ModelId::Tower2 => 3,
            _ => 2,
        }
    }

    pub fn min_len(self) -> usize {
        match self {
            ModelId::Isolated2 => 3,
            _ => 2,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            ModelId::Full => &["J", "hx", "gamma"],
            ModelId::Z2 | ModelId::DoubleZ2 | ModelId::U1 => &["J", "gamma"],
            ModelId::Isolated1 => &["J", "omega", "gamma"],
            ModelId::Isolated2 => &["J", "D", "gamma"],
            ModelId::Tower1 => &["J", "D", "h", "gamma"],
            ModelId::Tower2 => &["D", "D2", "h", "gamma"],
        }
    }

    /// Reference parameters for each model.
    pub fn default_params(self) -> Params {
        let values: &[f64] = match self {
            ModelId::Full => &[1.0, 0.7, 1.0],
            ModelId::Z2 | ModelId::DoubleZ2 | ModelId::U1 => &[1.0, 1.0],
            ModelId::Isolated1 => &[1.0, 0.6, 1.0],
            ModelId::Isolated2 => &[0.5, 1.2, 1.0],
            ModelId::Tower1 => &[2.0, 0.2, 0.3, 1.0],
            ModelId::Tower2 => &[0.2, 0.8, 1.0, 4.0],
        };
        self.param_names()
            .iter()
            .zip(values)
            .map(|(k, v)| (k.to_string(), *v))
            .collect()
    }

    pub fn spec(self, len: usize, boundary: Boundary) -> Result<HilbertSpec> {
        HilbertSpec::new(len, self.local_dim(), boundary)
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Hamiltonian couplings and jump rates attached to the generators of a bond algebra.
#[derive(Clone, Debug)]
pub struct LindbladModel {
    id: Option<ModelId>,
    algebra: BondAlgebra,
    couplings: BTreeMap<String, f64>,
    rates: BTreeMap<String, f64>,
}

impl LindbladModel {
    /// Every Hamiltonian-role generator needs a coupling and every jump-role generator a rate.
    pub fn new(
        algebra: BondAlgebra,
        couplings: BTreeMap<String, f64>,
        rates: BTreeMap<String, f64>,
    ) -> Result<Self> {
        for g in algebra.generators() {
            if g.role.in_hamiltonian() != couplings.contains_key(&g.label) {
                return Err(Error::InvalidArgument(format!("coupling for `{}` does not match its role", g.label)));
            }
            if g.role.is_jump() != rates.contains_key(&g.label) {
                return Err(Error::InvalidArgument(format!("rate for `{}` does not match its role", g.label)));
            }
        }
        let known = |k: &String| algebra.get(k).is_some();
        if let Some(k) = couplings.keys().chain(rates.keys()).find(|k| !known(k)) {
            return Err(Error::InvalidArgument(format!("no generator labelled `{k}`")));
        }
        if let Some((k, r)) = rates.iter().find(|(_, r)| !(**r >= 0.0)) {
            return Err(Error::InvalidArgument(format!("rate for `{k}` is negative ({r})")));
        }
        Ok(Self {
            id: None,
            algebra,
            couplings,
            rates,
        })
    }

    /// Uniform coupling per Hamiltonian family and uniform rate per jump family.
    pub fn from_families(algebra: BondAlgebra, couplings: &[(&str, f64)], rates: &[(&str, f64)]) -> Result<Self> {
        let lookup = |table: &[(&str, f64)], family: &str| table.iter().find(|(f, _)| *f == family).map(|p| p.1);
        let mut c = BTreeMap::new();
        let mut r = BTreeMap::new();
        for g in algebra.generators() {
            if g.role.in_hamiltonian() {
                let v = lookup(couplings, &g.family)
                    .ok_or_else(|| Error::InvalidArgument(format!("no coupling for family `{}`", g.family)))?;
                c.insert(g.label.clone(), v);
            }
            if g.role.is_jump() {
                let v = lookup(rates, &g.family)
                    .ok_or_else(|| Error::InvalidArgument(format!("no rate for family `{}`", g.family)))?;
                r.insert(g.label.clone(), v);
            }
        }
        Self::new(algebra, c, r)
    }

    pub fn id(&self) -> Option<ModelId> {
        self.id
    }

    pub fn algebra(&self) -> &BondAlgebra {
        &self.algebra
    }

    pub fn spec(&self) -> HilbertSpec {
        self.algebra.spec()
    }

    pub fn couplings(&self) -> &BTreeMap<String, f64> {
        &self.couplings
    }

    pub fn rates(&self) -> &BTreeMap<String, f64> {
        &self.rates
    }

    /// `H = Σ_α J_α h_α`.
    pub fn hamiltonian(&self) -> Result<SparseOperator> {
        let pairs: Vec<(C64, &SparseOperator)> = self
            .algebra
            .generators()
            .iter()
            .filter_map(|g| self.couplings.get(&g.label).map(|&c| (C64::new(c, 0.0), &g.op)))
            .collect();
        SparseOperator::linear_combination(self.spec(), &pairs)
    }

    /// `(γ_j, l_j)` for every jump with a nonzero rate.
    pub fn jumps(&self) -> Vec<(f64, &SparseOperator)> {
        self.algebra
            .generators()
            .iter()
            .filter_map(|g| self.rates.get(&g.label).map(|&r| (r, &g.op)))
            .filter(|(r, _)| *r > 0.0)
            .collect()
    }

    /// Same model with every rate multiplied by `factor`.
    pub fn with_scaled_rates(&self, factor: f64) -> Result<Self> {
        let rates = self.rates.iter().map(|(k, v)| (k.clone(), v * factor)).collect();
        let mut m = Self::new(self.algebra.clone(), self.couplings.clone(), rates)?;
        m.id = self.id;
        Ok(m)
    }
}

/// Generators of a catalog model, each with the role it plays in that model.
pub fn bond_algebra(id: ModelId, len: usize, boundary: Boundary) -> Result<BondAlgebra> {
    if len < id.min_len() {
        return Err(Error::ChainTooShort {
            model: id.to_string(),
            min: id.min_len(),
            len,
        });
    }
    let spec = id.spec(len, boundary)?;
    let mut a = BondAlgebra::new(spec);
    let bonds = spec.bonds();
    let sites: Vec<usize> = (1..=len).collect();
    use LocalKind::{X, Z};
    use Role::{Hamiltonian as H, Jump};

    let mut family = |name: &str, anchors: &[usize], role: Role, build: &dyn Fn(usize) -> Result<SparseOperator>| {
        anchors
            .iter()
            .try_for_each(|&j| a.push(name, Some(j), build(j)?, role))
    };
    match id {
        ModelId::Full => {
            family("xx", &bonds, H, &|j| terms::string_operator(&spec, &[X, X], j))?;
            family("x", &sites, H, &|j| terms::site_operator(&spec, X, j))?;
            family("z", &sites, Jump, &|j| terms::site_operator(&spec, Z, j))?;
        }
        ModelId::Z2 => {
            family("xx", &bonds, H, &|j| terms::string_operator(&spec, &[X, X], j))?;
            family("z", &sites, Jump, &|j| terms::site_operator(&spec, Z, j))?;
        }
        ModelId::DoubleZ2 => {
            family("xx", &bonds, H, &|j| terms::string_operator(&spec, &[X, X], j))?;
            family("zz", &bonds, Jump, &|j| terms::string_operator(&spec, &[Z, Z], j))?;
        }
        ModelId::U1 => {
            family("exchange", &bonds, H, &|j| terms::exchange(&spec, j))?;
            family("z", &sites, Jump, &|j| terms::site_operator(&spec, Z, j))?;
        }
        ModelId::Isolated1 => {
            family("exchange", &bonds, H, &|j| terms::exchange(&spec, j))?;
            family("x-down", &bonds, H, &|j| terms::flip_if_down_right(&spec, j))?;
            family("down-x", &bonds, H, &|j| terms::flip_if_down_left(&spec, j))?;
            family("z", &sites, Jump, &|j| terms::site_operator(&spec, Z, j))?;
        }
        ModelId::Isolated2 => {
            family("exchange", &bonds, H, &|j| terms::exchange(&spec, j))?;
            family("pair-flip", &spec.windows(3), H, &|j| terms::pair_flip(&spec, j))?;
            family("z", &sites, Jump, &|j| terms::site_operator(&spec, Z, j))?;
        }
        ModelId::Tower1 | ModelId::Tower2 => {
            let (ex_role, z2_role) = if id == ModelId::Tower1 { (H, Jump) } else { (Jump, H) };
            family("exchange", &bonds, ex_role, &|j| terms::exchange(&spec, j))?;
            family("z2", &sites, z2_role, &|j| terms::site_operator(&spec, LocalKind::ZSquared, j))?;
            family("tower-bond", &bonds, H, &|j| terms::tower_bond(&spec, j))?;
            a.push("sz-total", None, terms::total_z(&spec)?, H)?;
        }
    }
    Ok(a)
}

fn param(id: ModelId, params: &Params, name: &str) -> Result<f64> {
    params.get(name).copied().ok_or_else(|| Error::MissingParameter {
        model: id.to_string(),
        param: name.to_string(),
    })
}

pub fn build_model(id: ModelId, len: usize, boundary: Boundary, params: &Params) -> Result<LindbladModel> {
    if let Some(k) = params.keys().find(|k| !id.param_names().contains(&k.as_str())) {
        return Err(Error::InvalidArgument(format!("model `{id}` has no parameter `{k}`")));
    }
    let p = |name: &str| param(id, params, name);
    let algebra = bond_algebra(id, len, boundary)?;
    let gamma = p("gamma")?;
    let mut model = match id {
        ModelId::Full => LindbladModel::from_families(algebra, &[("xx", p("J")?), ("x", p("hx")?)], &[("z", gamma)])?,
        ModelId::Z2 => LindbladModel::from_families(algebra, &[("xx", p("J")?)], &[("z", gamma)])?,
        ModelId::DoubleZ2 => LindbladModel::from_families(algebra, &[("xx", p("J")?)], &[("zz", gamma)])?,
        ModelId::U1 => LindbladModel::from_families(algebra, &[("exchange", p("J")?)], &[("z", gamma)])?,
        ModelId::Isolated1 => {
            let w = p("omega")?;
            LindbladModel::from_families(
                algebra,
                &[("exchange", p("J")?), ("x-down", w), ("down-x", w)],
                &[("z", gamma)],
            )?
        }
        ModelId::Isolated2 => LindbladModel::from_families(
            algebra,
            &[("exchange", -p("J")?), ("pair-flip", p("D")?)],
            &[("z", gamma)],
        )?,
        ModelId::Tower1 => LindbladModel::from_families(
            algebra,
            &[("exchange", p("J")?), ("tower-bond", p("D")?), ("sz-total", -p("h")?)],
            &[("z2", gamma)],
        )?,
        ModelId::Tower2 => LindbladModel::from_families(
            algebra,
            &[("z2", p("D2")?), ("tower-bond", p("D")?), ("sz-total", -p("h")?)],
            &[("exchange", gamma)],
        )?,
    };
    model.id = Some(id);
    Ok(model)
}
