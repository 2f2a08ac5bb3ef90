use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::check_times;
use crate::error::{Error, Result};
use crate::linalg::{expm, expmv, KrylovOptions};
use crate::models::LindbladModel;
use crate::operator::SparseOperator;
use crate::{CMatrix, CVector, C64};

/// Dense drift propagators are precomputed up to this Hilbert-space dimension.
const DENSE_DRIFT_LIMIT: usize = 1024;
/// `dt · max(γ‖l‖², ‖H‖)` above which a warning is attached to the result.
pub const STEP_WARNING: f64 = 0.05;

/// Mean and standard error of the mean at each output time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Series {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl Series {
    fn from_samples(samples: &[Vec<f64>], column: usize, n_times: usize) -> Self {
        let n = samples.len() as f64;
        let mut mean = vec![0.0; n_times];
        let mut stderr = vec![0.0; n_times];
        let width = samples.first().map(|s| s.len() / n_times.max(1)).unwrap_or(1);
        for k in 0..n_times {
            let xs = samples.iter().map(|s| s[k * width + column]);
            let m = xs.clone().sum::<f64>() / n;
            let var = if n > 1.0 {
                xs.map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)
            } else {
                0.0
            };
            mean[k] = m;
            stderr[k] = (var / n).sqrt();
        }
        Series { mean, stderr }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryResult {
    /// Output times, snapped to the step grid `round(t/dt)·dt`.
    pub times: Vec<f64>,
    pub n_traj: usize,
    pub dt: f64,
    pub seed: u64,
    pub observables: Vec<Series>,
    /// `|⟨ψ0|ψ(t)⟩|²` averaged over trajectories.
    pub fidelity: Series,
    pub warnings: Vec<String>,
    /// Per-trajectory records, `[fidelity, observables…]` per output time.
    samples: Vec<Vec<f64>>,
}

/// Long-time value estimated from the final 10% of a time grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    pub mean: f64,
    /// Standard error across trajectories of the per-trajectory window means (0 for exact series).
    pub stderr: f64,
    /// `max − min` of the (averaged) series over the window.
    pub spread: f64,
}

fn window(n: usize) -> std::ops::Range<usize> {
    n - n.div_ceil(10).max(1).min(n)..n
}

/// Plateau of a deterministic series.
pub fn plateau(values: &[f64]) -> Plateau {
    let w = &values[window(values.len())];
    let (lo, hi) = w.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    Plateau {
        mean: w.iter().sum::<f64>() / w.len() as f64,
        stderr: 0.0,
        spread: hi - lo,
    }
}

impl TrajectoryResult {
    fn column_plateau(&self, column: usize, averaged: &[f64]) -> Plateau {
        let n_times = self.times.len();
        let width = self.observables.len() + 1;
        let range = window(n_times);
        let per_traj: Vec<f64> = self
            .samples
            .iter()
            .map(|s| range.clone().map(|k| s[k * width + column]).sum::<f64>() / range.len() as f64)
            .collect();
        let n = per_traj.len() as f64;
        let mean = per_traj.iter().sum::<f64>() / n;
        let var = if n > 1.0 {
            per_traj.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Plateau {
            mean,
            stderr: (var / n).sqrt(),
            spread: plateau(averaged).spread,
        }
    }

    pub fn fidelity_plateau(&self) -> Plateau {
        self.column_plateau(0, &self.fidelity.mean)
    }

    pub fn observable_plateau(&self, index: usize) -> Plateau {
        self.column_plateau(index + 1, &self.observables[index].mean)
    }
}

enum Drift {
    Dense(CMatrix),
    Sparse(SparseOperator, f64),
}

impl Drift {
    fn step_into(&self, psi: &CVector, out: &mut CVector, dt: f64) -> Result<()> {
        match self {
            Drift::Dense(p) => p.mul_to(psi, out),
            Drift::Sparse(g, anorm) => {
                let v = expmv(
                    |x, y| g.matrix().matvec_into(x, y),
                    psi.len(),
                    *anorm,
                    dt,
                    psi.as_slice(),
                    KrylovOptions::default(),
                )?;
                out.as_mut_slice().copy_from_slice(&v);
            }
        }
        Ok(())
    }
}

/// Default step `10⁻³ / max γ_j`.
pub fn default_dt(model: &LindbladModel) -> f64 {
    let g = model.jumps().iter().map(|(g, _)| *g).fold(0.0, f64::max);
    if g > 0.0 {
        1e-3 / g
    } else {
        1e-3
    }
}

/// First-order quantum-trajectory unraveling for hermitian jump operators.
///
/// Each step either applies jump `j` with probability `γ_j dt ⟨l_j²⟩` or
/// propagates with `exp(−iH dt − ½Σγ_j l_j² dt)`; the state is renormalized
/// after either branch. Trajectory `i` draws from the ChaCha stream `(seed, i)`,
/// so results do not depend on scheduling.
pub fn evolve_trajectories(
    model: &LindbladModel,
    psi0: &CVector,
    times: &[f64],
    n_traj: usize,
    dt: f64,
    seed: u64,
    observables: &[SparseOperator],
) -> Result<TrajectoryResult> {
    check_times(times)?;
    let d = model.spec().dim();
    if psi0.len() != d {
        return Err(Error::DimensionMismatch { expected: d, found: psi0.len() });
    }
    if (psi0.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("state norm {} is not 1", psi0.norm())));
    }
    if !(dt > 0.0) || n_traj == 0 {
        return Err(Error::InvalidArgument("dt must be positive and n_traj nonzero".into()));
    }
    if let Some(o) = observables.iter().find(|o| o.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, found: o.dim() });
    }

    let h = model.hamiltonian()?;
    let jumps: Vec<(f64, &SparseOperator)> = model.jumps();
    let mut warnings = Vec::new();
    let scale = jumps
        .iter()
        .map(|(g, l)| g * l.matrix().max_abs_row_sum().powi(2))
        .fold(h.matrix().max_abs_row_sum(), f64::max);
    if dt * scale > STEP_WARNING {
        warnings.push(format!("dt·max(γ‖l‖², ‖H‖) = {:.3} exceeds {STEP_WARNING}", dt * scale));
    }

    // G = −iH − ½ Σ γ l²
    let mut terms = vec![(C64::new(0.0, -1.0), h.clone())];
    for (g, l) in &jumps {
        terms.push((C64::new(-0.5 * g, 0.0), l.matmul(l)?));
    }
    let refs: Vec<(C64, &SparseOperator)> = terms.iter().map(|(c, o)| (*c, o)).collect();
    let generator = SparseOperator::linear_combination(h.space(), &refs)?;
    let drift = if d <= DENSE_DRIFT_LIMIT {
        Drift::Dense(expm(&(generator.to_dense() * C64::new(dt, 0.0))))
    } else {
        let anorm = generator.matrix().max_abs_row_sum();
        Drift::Sparse(generator, anorm)
    };

    let steps: Vec<usize> = times.iter().map(|t| (t / dt).round() as usize).collect();
    let width = observables.len() + 1;
    let n_times = times.len();

    let n_jumps = jumps.len();
    let run = |index: usize| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64);
        let mut psi = psi0.clone();
        let mut next = CVector::zeros(d);
        let mut images = vec![CVector::zeros(d); n_jumps];
        let mut probs = vec![0.0; n_jumps];
        let mut record = vec![0.0; n_times * width];
        let mut step = 0usize;
        for (k, &target) in steps.iter().enumerate() {
            while step < target {
                let mut total = 0.0;
                for (j, (g, l)) in jumps.iter().enumerate() {
                    l.matrix().matvec_into(psi.as_slice(), images[j].as_mut_slice());
                    probs[j] = g * dt * images[j].norm_squared();
                    total += probs[j];
                }
                if total > 1.0 {
                    return Err(Error::ProbabilityOverflow(total));
                }
                let r: f64 = rng.random();
                if r < total {
                    let mut pick: f64 = rng.random::<f64>() * total;
                    let mut chosen = n_jumps - 1;
                    for (j, p) in probs.iter().enumerate() {
                        if pick < *p {
                            chosen = j;
                            break;
                        }
                        pick -= p;
                    }
                    std::mem::swap(&mut psi, &mut images[chosen]);
                } else {
                    drift.step_into(&psi, &mut next, dt)?;
                    std::mem::swap(&mut psi, &mut next);
                }
                let n = psi.norm();
                psi.unscale_mut(n);
                step += 1;
            }
            let base = k * width;
            record[base] = psi0.dotc(&psi).norm_sqr();
            for (o, op) in observables.iter().enumerate() {
                record[base + 1 + o] = op.expectation(&psi).re;
            }
        }
        Ok(record)
    };

    let samples = (0..n_traj)
        .into_par_iter()
        .map(run)
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(TrajectoryResult {
        times: steps.iter().map(|&s| s as f64 * dt).collect(),
        n_traj,
        dt,
        seed,
        observables: (0..observables.len())
            .map(|o| Series::from_samples(&samples, o + 1, n_times))
            .collect(),
        fidelity: Series::from_samples(&samples, 0, n_times),
        warnings,
        samples,
    })
}
