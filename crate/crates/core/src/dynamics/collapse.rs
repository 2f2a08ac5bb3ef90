use serde::Serialize;

use super::exact::{evolve_pure_exact, ExactOptions};
use super::liouvillian::conserved_sector;
use crate::error::{Error, Result};
use crate::models::{build_model, scar_state, ModelId, Params, ScarState};
use crate::operator::Boundary;

/// Scaling variable under which the fidelity of `|n, k⟩` collapses:
/// `t²/L²` for tower-1, `t/L²` for tower-2.
pub fn scaling_variable(id: ModelId, t: f64, len: usize) -> Result<f64> {
    let l2 = (len * len) as f64;
    match id {
        ModelId::Tower1 => Ok(t * t / l2),
        ModelId::Tower2 => Ok(t / l2),
        _ => Err(Error::InvalidArgument(format!("no scaling collapse for model `{id}`"))),
    }
}

/// Inverse of [`scaling_variable`].
pub fn scaled_time(id: ModelId, x: f64, len: usize) -> Result<f64> {
    let l2 = (len * len) as f64;
    match id {
        ModelId::Tower1 => Ok((x * l2).sqrt()),
        ModelId::Tower2 => Ok(x * l2),
        _ => Err(Error::InvalidArgument(format!("no scaling collapse for model `{id}`"))),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseCurve {
    pub len: usize,
    pub times: Vec<f64>,
    pub scaled: Vec<f64>,
    pub fidelity: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CollapseMetric {
    /// End of the common window: the smallest scaled time at which some curve drops below the threshold.
    pub window_end: f64,
    /// Largest spread `max_L F − min_L F` over the window.
    pub max_delta: f64,
    /// Scaled time where the largest spread occurs.
    pub at: f64,
}

/// Fidelity of `|n, k = π + 2π/L⟩` sampled at scaled times `xs` for each chain length.
pub fn collapse_curves(
    id: ModelId,
    lens: &[usize],
    boundary: Boundary,
    params: &Params,
    n: usize,
    xs: &[f64],
) -> Result<Vec<CollapseCurve>> {
    lens.iter()
        .map(|&len| {
            let model = build_model(id, len, boundary, params)?;
            let state = ScarState::Aqmbs {
                n,
                k: ScarState::default_momentum(len),
            };
            let psi = scar_state(&state, &model.spec())?;
            let sector = conserved_sector(&model, &psi)?;
            let times = xs
                .iter()
                .map(|&x| scaled_time(id, x, len))
                .collect::<Result<Vec<_>>>()?;
            let result = evolve_pure_exact(&model, &psi, &times, sector, ExactOptions::default())?;
            Ok(CollapseCurve {
                len,
                scaled: xs.to_vec(),
                fidelity: result.fidelity(&psi),
                times,
            })
        })
        .collect()
}

fn interpolate(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v <= x);
    if k == 0 {
        return ys[0];
    }
    if k == xs.len() {
        return ys[xs.len() - 1];
    }
    let (x0, x1) = (xs[k - 1], xs[k]);
    ys[k - 1] + (ys[k] - ys[k - 1]) * (x - x0) / (x1 - x0)
}

/// First scaled time at which a curve falls below `threshold` (linear interpolation).
fn crossing(curve: &CollapseCurve, threshold: f64) -> Option<f64> {
    let (x, f) = (&curve.scaled, &curve.fidelity);
    (1..f.len()).find(|&i| f[i] < threshold).map(|i| {
        let (f0, f1) = (f[i - 1], f[i]);
        x[i - 1] + (x[i] - x[i - 1]) * (f0 - threshold) / (f0 - f1)
    })
}

/// Collapse quality over the window where every curve has `F ≥ threshold`,
/// evaluated on `n_grid` uniform points by linear interpolation.
pub fn collapse_metric(curves: &[CollapseCurve], threshold: f64, n_grid: usize) -> Result<CollapseMetric> {
    if curves.len() < 2 || n_grid < 2 {
        return Err(Error::InvalidArgument("collapse needs two curves and two grid points".into()));
    }
    let mut window_end = f64::INFINITY;
    for c in curves {
        if c.scaled.len() != c.fidelity.len() || c.scaled.len() < 2 || c.scaled.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!("curve L = {} is not on an increasing grid", c.len)));
        }
        let end = crossing(c, threshold).ok_or_else(|| {
            Error::InvalidArgument(format!("curve L = {} never drops below F = {threshold}", c.len))
        })?;
        window_end = window_end.min(end);
    }
    let start = curves.iter().map(|c| c.scaled[0]).fold(f64::NEG_INFINITY, f64::max);
    let mut best = CollapseMetric {
        window_end,
        max_delta: 0.0,
        at: start,
    };
    for i in 0..n_grid {
        let x = start + (window_end - start) * i as f64 / (n_grid - 1) as f64;
        let values = curves.iter().map(|c| interpolate(&c.scaled, &c.fidelity, x));
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
        if hi - lo > best.max_delta {
            best.max_delta = hi - lo;
            best.at = x;
        }
    }
    Ok(best)
}
