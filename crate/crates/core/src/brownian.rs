//! Lindbladian Brownian circuits: random Gaussian Hamiltonian couplings, fixed decay rates.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::algebra::BondAlgebra;
use crate::dynamics::Series;
use crate::error::{Error, Result};
use crate::linalg::{expm, expmv, KrylovOptions};
use crate::operator::{adjoint_superop, double_commutator_superop, CsrMatrix, SparseOperator, SparseSuperOperator};
use crate::{CMatrix, CVector, C64};

/// `ε · √(2k/ε) · ‖h‖` above which a warning is attached to sampled results.
pub const STEP_WARNING: f64 = 0.1;
/// Words of the ChaCha keystream reserved for each circuit step.
const WORDS_PER_STEP: u128 = 1 << 32;
/// Per-step exponentials act over short times, so a small Krylov space suffices.
const STEP_KRYLOV: KrylovOptions = KrylovOptions { dim: 12, tol: 1e-12 };
/// Largest number of random couplings handled by tensor-product quadrature.
pub const MAX_QUADRATURE_COUPLINGS: usize = 4;

#[derive(Clone, Debug)]
pub struct BrownianSpec {
    pub algebra: BondAlgebra,
    /// Variance scale `k_α` per Hamiltonian generator label.
    pub variances: BTreeMap<String, f64>,
    /// Decay rate `γ_l` per jump generator label.
    pub rates: BTreeMap<String, f64>,
    pub eps: f64,
    pub n_samples: usize,
    pub seed: u64,
}

impl BrownianSpec {
    pub fn new(
        algebra: BondAlgebra,
        variances: BTreeMap<String, f64>,
        rates: BTreeMap<String, f64>,
        eps: f64,
        n_samples: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("step ε must be positive, got {eps}")));
        }
        if let Some((k, v)) = variances.iter().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::InvalidArgument(format!("variance for `{k}` must be positive, got {v}")));
        }
        if let Some((k, v)) = rates.iter().find(|(_, v)| !(**v >= 0.0)) {
            return Err(Error::InvalidArgument(format!("rate for `{k}` must be nonnegative, got {v}")));
        }
        if let Some(k) = variances.keys().chain(rates.keys()).find(|k| algebra.get(k).is_none()) {
            return Err(Error::InvalidArgument(format!("no generator labelled `{k}`")));
        }
        Ok(Self {
            algebra,
            variances,
            rates,
            eps,
            n_samples,
            seed,
        })
    }

    /// Variance `k` on every Hamiltonian-role generator and rate `γ` on every jump-role generator.
    pub fn uniform(algebra: BondAlgebra, k: f64, gamma: f64, eps: f64, n_samples: usize, seed: u64) -> Result<Self> {
        let mut variances = BTreeMap::new();
        let mut rates = BTreeMap::new();
        for g in algebra.generators() {
            if g.role.in_hamiltonian() {
                variances.insert(g.label.clone(), k);
            }
            if g.role.is_jump() {
                rates.insert(g.label.clone(), gamma);
            }
        }
        Self::new(algebra, variances, rates, eps, n_samples, seed)
    }

    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(
            self.algebra.clone(),
            self.variances.clone(),
            self.rates.clone(),
            eps,
            self.n_samples,
            self.seed,
        )
    }

    fn hamiltonian_terms(&self) -> Vec<(f64, &SparseOperator)> {
        self.variances
            .iter()
            .map(|(label, &k)| (k, &self.algebra.get(label).expect("validated label").op))
            .collect()
    }

    /// `−½ Σ_l γ_l [l, [l, ·]]`.
    fn dissipator(&self) -> Result<CsrMatrix> {
        let d = self.algebra.spec().dim();
        let mut out = CsrMatrix::zeros(d * d);
        for (label, &g) in &self.rates {
            if g > 0.0 {
                let dc = double_commutator_superop(&self.algebra.get(label).expect("validated label").op)?;
                let one = C64::new(1.0, 0.0);
                out = CsrMatrix::linear_combination(d * d, &[(one, &out), (C64::new(-0.5 * g, 0.0), dc.matrix())]);
            }
        }
        Ok(out)
    }
}

/// `D_eff = ½ Σ_l γ_l [l, [l, ·]] + Σ_α k_α [h_α, [h_α, ·]]`.
pub fn d_eff(spec: &BrownianSpec) -> Result<SparseSuperOperator> {
    let space = spec.algebra.spec().into();
    let mut terms = Vec::new();
    for (k, h) in spec.hamiltonian_terms() {
        terms.push((C64::new(k, 0.0), double_commutator_superop(h)?));
    }
    for (label, &g) in &spec.rates {
        let l = &spec.algebra.get(label).expect("validated label").op;
        terms.push((C64::new(0.5 * g, 0.0), double_commutator_superop(l)?));
    }
    let refs: Vec<(C64, &SparseSuperOperator)> = terms.iter().map(|(c, s)| (*c, s)).collect();
    Ok(SparseSuperOperator::linear_combination(space, &refs))
}

fn check_observable(spec: &BrownianSpec, o: &SparseOperator) -> Result<()> {
    let d = spec.algebra.spec().dim();
    if o.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: o.dim() });
    }
    if !o.is_hermitian() {
        return Err(Error::InvalidArgument("autocorrelations need a hermitian observable".into()));
    }
    Ok(())
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite() || *t < 0.0) || times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("times must be finite, nonnegative and nondecreasing".into()));
    }
    Ok(())
}

fn overlap(v: &[C64], o: &[C64], d: usize) -> f64 {
    v.iter().zip(o).map(|(a, b)| a * b.conj()).sum::<C64>().re / d as f64
}

/// `Tr[e^{−t D_eff}(O) O] / D`.
pub fn averaged_autocorrelation(spec: &BrownianSpec, o: &SparseOperator, times: &[f64]) -> Result<Vec<f64>> {
    check_observable(spec, o)?;
    check_times(times)?;
    let d = o.dim();
    let gen = d_eff(spec)?;
    let anorm = gen.matrix().max_abs_row_sum();
    let o_vec = o.to_dense().as_slice().to_vec();
    let mut v = o_vec.clone();
    let mut t_prev = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        v = expmv(|x, y| gen.matrix().matvec_into(x, y), d * d, anorm, -(t - t_prev), &v, KrylovOptions::default())?;
        t_prev = t;
        out.push(overlap(&v, &o_vec, d));
    }
    Ok(out)
}

/// Infinite-time value of [`averaged_autocorrelation`], by doubling `t` until
/// successive values agree within `tol`.
pub fn autocorrelation_limit(spec: &BrownianSpec, o: &SparseOperator, tol: f64) -> Result<f64> {
    check_observable(spec, o)?;
    let d = o.dim();
    let gen = d_eff(spec)?;
    let anorm = gen.matrix().max_abs_row_sum();
    let o_vec = o.to_dense().as_slice().to_vec();
    let mut v = o_vec.clone();
    let mut t = 1.0;
    v = expmv(|x, y| gen.matrix().matvec_into(x, y), d * d, anorm, -t, &v, KrylovOptions::default())?;
    let mut value = overlap(&v, &o_vec, d);
    for _ in 0..40 {
        v = expmv(|x, y| gen.matrix().matvec_into(x, y), d * d, anorm, -t, &v, KrylovOptions::default())?;
        t *= 2.0;
        let next = overlap(&v, &o_vec, d);
        if (next - value).abs() <= tol {
            return Ok(next);
        }
        value = next;
    }
    Err(Error::NoConvergence { residual: t })
}

#[derive(Clone, Debug)]
pub struct CircuitResult {
    /// Output times snapped to the circuit grid `round(t/ε)·ε`.
    pub times: Vec<f64>,
    pub autocorrelation: Series,
    pub warnings: Vec<String>,
}

struct Circuit {
    d: usize,
    ads: Vec<(f64, CsrMatrix)>,
    dissipator: CsrMatrix,
}

impl Circuit {
    fn new(spec: &BrownianSpec) -> Result<Self> {
        Ok(Self {
            d: spec.algebra.spec().dim(),
            ads: spec
                .hamiltonian_terms()
                .into_iter()
                .map(|(k, h)| (k, adjoint_superop(h).matrix().clone()))
                .collect(),
            dissipator: spec.dissipator()?,
        })
    }

    /// `L† = i Σ_α g_α [h_α, ·] − ½ Σ_l γ_l [l, [l, ·]]` for one coupling draw.
    fn generator(&self, couplings: &[f64]) -> CsrMatrix {
        let mut terms: Vec<(C64, &CsrMatrix)> = vec![(C64::new(1.0, 0.0), &self.dissipator)];
        for ((_, ad), &g) in self.ads.iter().zip(couplings) {
            terms.push((C64::new(0.0, g), ad));
        }
        CsrMatrix::linear_combination(self.d * self.d, &terms)
    }

    /// Matrix-free action of [`Circuit::generator`].
    fn apply(&self, couplings: &[f64], x: &[C64], y: &mut [C64]) {
        self.dissipator.matvec_into(x, y);
        for ((_, ad), &g) in self.ads.iter().zip(couplings) {
            let ig = C64::new(0.0, g);
            for (r, out) in y.iter_mut().enumerate() {
                *out += ig * ad.row(r).map(|(c, v)| v * x[c]).sum::<C64>();
            }
        }
    }

    fn norm_bound(&self, couplings: &[f64]) -> f64 {
        self.dissipator.max_abs_row_sum()
            + self.ads.iter().zip(couplings).map(|((_, ad), g)| g.abs() * ad.max_abs_row_sum()).sum::<f64>()
    }
}

/// Monte Carlo average of `Tr[O(t) O] / D` over independent circuit realizations.
///
/// Couplings at step `j` of sample `s` come from the ChaCha stream `s` at a
/// fixed offset proportional to `j`, so each `(s, j)` pair owns its draws.
pub fn sample_circuit_autocorrelation(spec: &BrownianSpec, o: &SparseOperator, times: &[f64]) -> Result<CircuitResult> {
    check_observable(spec, o)?;
    check_times(times)?;
    if spec.n_samples == 0 {
        return Err(Error::InvalidArgument("n_samples must be positive".into()));
    }
    let circuit = Circuit::new(spec)?;
    let d = circuit.d;
    let eps = spec.eps;
    let mut warnings = Vec::new();
    let typical = spec
        .hamiltonian_terms()
        .iter()
        .map(|(k, h)| eps * (2.0 * k / eps).sqrt() * h.matrix().max_abs_row_sum())
        .fold(0.0, f64::max);
    if typical > STEP_WARNING {
        warnings.push(format!("ε·√(2k/ε)·‖h‖ = {typical:.3} exceeds {STEP_WARNING}"));
    }
    let stds: Vec<f64> = circuit.ads.iter().map(|(k, _)| (2.0 * k / eps).sqrt()).collect();
    let steps: Vec<usize> = times.iter().map(|t| (t / eps).round() as usize).collect();
    let o_vec = o.to_dense().as_slice().to_vec();

    let run = |sample: usize| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(sample as u64);
        let mut v = o_vec.clone();
        let mut out = Vec::with_capacity(steps.len());
        let mut step = 0usize;
        for &target in &steps {
            while step < target {
                rng.set_word_pos(step as u128 * WORDS_PER_STEP);
                let g: Vec<f64> = stds
                    .iter()
                    .map(|s| s * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                    .collect();
                let anorm = circuit.norm_bound(&g);
                v = expmv(|x, y| circuit.apply(&g, x, y), d * d, anorm, eps, &v, STEP_KRYLOV)?;
                step += 1;
            }
            out.push(overlap(&v, &o_vec, d));
        }
        Ok(out)
    };
    let samples = (0..spec.n_samples)
        .into_par_iter()
        .map(run)
        .collect::<Result<Vec<_>>>()?;
    let n = samples.len() as f64;
    let mut series = Series::default();
    for k in 0..steps.len() {
        let mean = samples.iter().map(|s| s[k]).sum::<f64>() / n;
        let var = if n > 1.0 {
            samples.iter().map(|s| (s[k] - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        series.mean.push(mean);
        series.stderr.push((var / n).sqrt());
    }
    Ok(CircuitResult {
        times: steps.iter().map(|&s| s as f64 * eps).collect(),
        autocorrelation: series,
        warnings,
    })
}

/// Gauss–Hermite nodes and normalized weights for a standard normal variable.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            (i.max(j) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i] * 2f64.sqrt(), eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Exact ensemble average of the circuit: the one-step channel
/// `E[e^{ε L†_j}]` is integrated by tensor-product Gauss–Hermite quadrature
/// (`nodes` points per coupling) and applied `round(t/ε)` times.
pub fn circuit_average_quadrature(
    spec: &BrownianSpec,
    o: &SparseOperator,
    times: &[f64],
    nodes: usize,
) -> Result<Vec<f64>> {
    check_observable(spec, o)?;
    check_times(times)?;
    let circuit = Circuit::new(spec)?;
    let n_couplings = circuit.ads.len();
    if n_couplings > MAX_QUADRATURE_COUPLINGS {
        return Err(Error::InvalidArgument(format!(
            "{n_couplings} random couplings exceed the quadrature limit {MAX_QUADRATURE_COUPLINGS}"
        )));
    }
    let d = circuit.d;
    let (x, w) = gauss_hermite(nodes);
    let stds: Vec<f64> = circuit.ads.iter().map(|(k, _)| (2.0 * k / spec.eps).sqrt()).collect();
    let total = nodes.pow(n_couplings as u32);
    let channel = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rest = flat;
            let mut weight = 1.0;
            let mut g = Vec::with_capacity(n_couplings);
            for s in &stds {
                let i = rest % nodes;
                rest /= nodes;
                weight *= w[i];
                g.push(s * x[i]);
            }
            expm(&(circuit.generator(&g).to_dense() * C64::new(spec.eps, 0.0))) * C64::new(weight, 0.0)
        })
        .collect::<Vec<CMatrix>>()
        .into_iter()
        .fold(CMatrix::zeros(d * d, d * d), |acc, m| acc + m);
    let o_vec = CVector::from_column_slice(o.to_dense().as_slice());
    let mut v = o_vec.clone();
    let mut step = 0usize;
    let mut out = Vec::with_capacity(times.len());
    for t in times {
        let target = (t / spec.eps).round() as usize;
        while step < target {
            v = &channel * v;
            step += 1;
        }
        out.push(overlap(v.as_slice(), o_vec.as_slice(), d));
    }
    Ok(out)
}

/// Largest `|circuit average − e^{−tD_eff}|` over `times` for each step `ε`,
/// with the circuit average from [`circuit_average_quadrature`].
pub fn epsilon_bias_study(
    spec: &BrownianSpec,
    o: &SparseOperator,
    times: &[f64],
    eps_values: &[f64],
    nodes: usize,
) -> Result<Vec<(f64, f64)>> {
    let exact = averaged_autocorrelation(spec, o, times)?;
    eps_values
        .iter()
        .map(|&eps| {
            let s = spec.with_eps(eps)?;
            let avg = circuit_average_quadrature(&s, o, times, nodes)?;
            let bias = avg.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            Ok((eps, bias))
        })
        .collect()
}
