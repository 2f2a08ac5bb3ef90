use std::path::Path;

use scarlab::algebra::{commutant_basis, irrep_decomposition, mazur_bound, DEFAULT_KERNEL_TOL};
use scarlab::brownian::{averaged_autocorrelation, sample_circuit_autocorrelation, BrownianSpec};
use scarlab::dynamics::{
    coherence_norm_series, collapse_curves, collapse_metric, conserved_sector, default_dt, effective_pair,
    evolve_pure_exact, evolve_trajectories, plateau, short_time_derivatives, tower_coherence_case, ExactOptions,
};
use scarlab::linalg::hermitian_eigen;
use scarlab::models::bond_algebra;
use scarlab::{CMatrix, C64};

use crate::config::{CoherenceConfig, ExperimentConfig, Method};
use crate::error::CliError;
use crate::output::{emit, Cell, Csv, VERSION};

use Cell::{Float, Int, Text};

pub fn commutant(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let len = config.len()?;
    let algebra = bond_algebra(config.model_id()?, len, config.boundary()).map_err(CliError::config)?;
    let tol = config.commutant.as_ref().map_or(DEFAULT_KERNEL_TOL, |c| c.tol);
    let basis = commutant_basis(&algebra, tol)?;
    let decomp = irrep_decomposition(&algebra, &basis, config.seed)?;
    let mut csv = Csv::new("commutant", config, &["block", "irrep_dim", "multiplicity"]);
    csv.note("hilbert_dim", algebra.spec().dim());
    csv.note("commutant_dim", basis.dim());
    csv.note("sum_irrep_dim_times_multiplicity", decomp.total_dim());
    csv.note("sum_multiplicity_squared", decomp.commutant_dim());
    csv.note("krylov_subspaces", decomp.krylov_count());
    csv.note("gap", format!("{:.16e}", basis.gap()));
    for (label, irrep_dim, multiplicity) in decomp.table() {
        csv.row(&[Int(label), Int(irrep_dim), Int(multiplicity)]);
    }
    eprintln!(
        "dim C = {}, Σ D d = {} (D = {}), gap = {:.3e}",
        basis.dim(),
        decomp.total_dim(),
        algebra.spec().dim(),
        basis.gap()
    );
    csv.finish(out)
}

pub fn evolve(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let len = config.len()?;
    let model = config.build_model(len)?;
    let spec = model.spec();
    let times = config.times()?;
    let observable = config.observable.as_ref().expect("resolved");
    let op = observable.build(&spec)?;
    if config.initial.is_empty() {
        return Err(CliError::Config("evolve needs at least one initial state".into()));
    }
    let mut csv = match config.method {
        Method::Exact => Csv::new("evolve", config, &["state", "time", "observable", "fidelity"]),
        Method::Trajectories { .. } => Csv::new(
            "evolve",
            config,
            &["state", "time", "observable", "observable_stderr", "fidelity", "fidelity_stderr"],
        ),
    };
    csv.note("observable", observable.label());
    for state in &config.initial {
        let psi = state.vector(&spec)?;
        let label = state.label();
        match config.method {
            Method::Exact => {
                let sector = conserved_sector(&model, &psi)?;
                let result = evolve_pure_exact(&model, &psi, &times, sector, ExactOptions::default())?;
                let obs = result.expectation(&op)?;
                let fid = result.fidelity(&psi);
                let (po, pf) = (plateau(&obs), plateau(&fid));
                csv.note(
                    &format!("plateau {label}"),
                    format!("observable {:.16e} fidelity {:.16e}", po.mean, pf.mean),
                );
                eprintln!("{label}: plateau ⟨O⟩ = {:.3e}, F = {:.6}", po.mean, pf.mean);
                for (k, t) in times.iter().enumerate() {
                    csv.row(&[Text(label.clone()), Float(*t), Float(obs[k]), Float(fid[k])]);
                }
            }
            Method::Trajectories { n_traj, dt } => {
                let dt = dt.unwrap_or_else(|| default_dt(&model));
                let r = evolve_trajectories(&model, &psi, &times, n_traj, dt, config.seed, std::slice::from_ref(&op))?;
                for w in &r.warnings {
                    csv.note("warning", w);
                    eprintln!("warning: {w}");
                }
                let (po, pf) = (r.observable_plateau(0), r.fidelity_plateau());
                csv.note(
                    &format!("plateau {label}"),
                    format!(
                        "observable {:.16e} ± {:.3e} fidelity {:.16e} ± {:.3e}",
                        po.mean, po.stderr, pf.mean, pf.stderr
                    ),
                );
                eprintln!(
                    "{label}: plateau ⟨O⟩ = {:.3e} ± {:.1e}, F = {:.6} ± {:.1e}",
                    po.mean, po.stderr, pf.mean, pf.stderr
                );
                let (o, f) = (&r.observables[0], &r.fidelity);
                for (k, t) in r.times.iter().enumerate() {
                    csv.row(&[
                        Text(label.clone()),
                        Float(*t),
                        Float(o.mean[k]),
                        Float(o.stderr[k]),
                        Float(f.mean[k]),
                        Float(f.stderr[k]),
                    ]);
                }
            }
        }
    }
    csv.finish(out)
}

pub fn collapse(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let c = config
        .collapse
        .as_ref()
        .ok_or_else(|| CliError::Config("collapse needs a `collapse` section".into()))?;
    let id = config.model_id()?;
    let xs: Vec<f64> = (0..c.n_points)
        .map(|i| c.x_max * i as f64 / (c.n_points - 1) as f64)
        .collect();
    let curves = collapse_curves(id, &c.lens, config.boundary(), &config.model.params, c.n, &xs)
        .map_err(|e| match e {
            scarlab::Error::InvalidArgument(_) | scarlab::Error::ChainTooShort { .. } | scarlab::Error::InvalidState(_) => {
                CliError::config(e)
            }
            e => CliError::Solver(e),
        })?;
    let metric = collapse_metric(&curves, c.threshold, c.n_grid)?;
    let mut csv = Csv::new("collapse", config, &["len", "time", "scaled", "fidelity"]);
    csv.note("window_end", format!("{:.16e}", metric.window_end));
    csv.note("max_delta", format!("{:.16e}", metric.max_delta));
    csv.note("max_delta_at", format!("{:.16e}", metric.at));
    for curve in &curves {
        for k in 0..curve.times.len() {
            csv.row(&[
                Int(curve.len),
                Float(curve.times[k]),
                Float(curve.scaled[k]),
                Float(curve.fidelity[k]),
            ]);
        }
    }
    eprintln!(
        "collapse: max |ΔF| = {:.4} over scaled window [0, {:.3e}]",
        metric.max_delta, metric.window_end
    );
    csv.finish(out)
}

pub fn coherence(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let case = config
        .coherence
        .as_ref()
        .ok_or_else(|| CliError::Config("coherence needs a `coherence` section".into()))?;
    let len = config.len()?;
    let times = config.times()?;
    let (series, reference, label) = match case {
        CoherenceConfig::TowerLaw { n0 } => {
            let case = tower_coherence_case(len, *n0, &config.model.params).map_err(CliError::config)?;
            let law: Vec<f64> = times.iter().map(|&t| case.law(t)).collect();
            (case.series(&times)?, law, "exact_law")
        }
        CoherenceConfig::DephasingBound => {
            let model = config.build_model(len)?;
            let spec = model.spec();
            let [scar, other] = config.initial.as_slice() else {
                return Err(CliError::Config("dephasing-bound needs two initial states: singlet, partner".into()));
            };
            let s = scar.vector(&spec)?;
            let pair = effective_pair(&model, &s).map_err(CliError::config)?;
            let phi = other.vector(&spec)?;
            let overlap = s.dotc(&phi);
            if overlap.norm() > 1e-12 {
                return Err(CliError::Config("partner state must be orthogonal to the singlet".into()));
            }
            let psi = (&s + &phi).unscale(2f64.sqrt());
            let rho0 = &psi * psi.adjoint();
            let d = spec.dim();
            let pi_s = &s * s.adjoint();
            let pi_th = CMatrix::identity(d, d) - &pi_s;
            // gap of H2 on the complement of the singlet
            let h2 = pair.h2.to_dense();
            let shift = h2.norm() + 1.0;
            let deflated = &pi_th * h2 * &pi_th + &pi_s * C64::new(shift, 0.0);
            let (values, _) = hermitian_eigen(&deflated);
            let rate = values[0];
            let series = coherence_norm_series(&model, &rho0, &pi_s, &pi_th, &times, None)?;
            let bound = times.iter().map(|&t| series[0] * (-rate * t).exp()).collect();
            (series, bound, "bound")
        }
    };
    let mut csv = Csv::new("coherence", config, &["time", "coherence", label]);
    for (k, t) in times.iter().enumerate() {
        csv.row(&[Float(*t), Float(series[k]), Float(reference[k])]);
    }
    csv.finish(out)
}

pub fn brownian(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let b = config
        .brownian
        .as_ref()
        .ok_or_else(|| CliError::Config("brownian needs a `brownian` section".into()))?;
    let len = config.len()?;
    let algebra = bond_algebra(config.model_id()?, len, config.boundary()).map_err(CliError::config)?;
    let op = config.observable.as_ref().expect("resolved").build(&algebra.spec())?;
    let times = config.times()?;
    let basis = commutant_basis(&algebra, DEFAULT_KERNEL_TOL)?;
    let mazur = mazur_bound(&basis, &op)?;
    let spec = BrownianSpec::uniform(algebra, b.k, b.gamma, b.eps, b.n_samples, config.seed).map_err(CliError::config)?;
    let sampled = sample_circuit_autocorrelation(&spec, &op, &times)?;
    let exact = averaged_autocorrelation(&spec, &op, &sampled.times)?;
    let mut csv = Csv::new("brownian", config, &["time", "sampled_mean", "stderr", "deterministic", "mazur_bound"]);
    for w in &sampled.warnings {
        csv.note("warning", w);
        eprintln!("warning: {w}");
    }
    let a = &sampled.autocorrelation;
    let mut worst = 0.0f64;
    for (k, t) in sampled.times.iter().enumerate() {
        if a.stderr[k] > 0.0 {
            worst = worst.max((a.mean[k] - exact[k]).abs() / a.stderr[k]);
        }
        csv.row(&[Float(*t), Float(a.mean[k]), Float(a.stderr[k]), Float(exact[k]), Float(mazur)]);
    }
    eprintln!("brownian: largest deviation {worst:.2}σ, Mazur bound {mazur:.6}");
    csv.finish(out)
}

pub fn derivatives(config: &ExperimentConfig, out: Option<&Path>) -> Result<(), CliError> {
    let len = config.len()?;
    let model = config.build_model(len)?;
    let state = config
        .initial
        .first()
        .and_then(|s| s.scar())
        .ok_or_else(|| CliError::Config("derivatives needs a scar initial state".into()))?;
    let op = config.observable.as_ref().expect("resolved").build(&model.spec())?;
    let report = short_time_derivatives(&model, &state, &op).map_err(|e| match e {
        scarlab::Error::InvalidState(_) => CliError::config(e),
        e => CliError::Solver(e),
    })?;
    let doc = serde_json::json!({
        "scarlab": VERSION,
        "command": "derivatives",
        "config": config,
        "config_sha256": config.hash(),
        "seed": config.seed,
        "report": report,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    emit(&text, out)
}
