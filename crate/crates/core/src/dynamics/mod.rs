mod coherence;
mod collapse;
mod exact;
mod liouvillian;
mod short_time;
mod trajectories;

pub use coherence::{
    coherence_norm_series, coherence_rate_check, coherence_rate_check_with, commutant_residual, effective_pair,
    heisenberg_map_check, spin_half_embedding, tower_coherence_case, EffectivePair, TowerCoherence,
};
pub use collapse::{collapse_curves, collapse_metric, scaled_time, scaling_variable, CollapseCurve, CollapseMetric};
pub use exact::{
    evolve_exact, evolve_exact_with, evolve_pure_exact, fidelity_series, EvolutionResult, ExactOptions,
    ExactSolver, KRYLOV_LIMIT,
};
pub use liouvillian::{conserved_sector, liouvillian, magnetization_commutator, sector_liouvillian, WorkingModel};
pub use short_time::{hermitian_norm, short_time_derivatives, ShortTimeReport};
pub use trajectories::{default_dt, evolve_trajectories, plateau, Plateau, Series, TrajectoryResult, STEP_WARNING};
