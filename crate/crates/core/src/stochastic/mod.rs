//! Monte Carlo check of second-order relaxation rates: classical noise
//! drives the three-state model, ensemble-averaged amplitudes grow
//! linearly in time, and their slopes give `w₁₁` and `w₀₁`.

mod noise;
mod rates;
mod spectrum;
mod trajectories;

pub use noise::{simulate_noise, simulate_paths, NoiseKind, NoiseProcess, MAX_DT_FRACTION};
pub use rates::{
    closed_loop_check, closed_loop_from, extract_rates, oracle_relaxation, ClosedLoopReport, RateEstimate, CLOSED_LOOP_TOL, DEFAULT_BOOTSTRAP,
    MIN_BOOTSTRAP, MIN_WINDOW_POINTS, WINDOW_REACH,
};
pub use spectrum::{
    correlation_and_spectrum, estimate_spectrum, CorrelationEstimate, Window, LAG_CUTOFF_TAU,
    MIN_SPECTRUM_PATHS,
};
pub use trajectories::{
    perturbative_amplitudes, simulate_trajectory, AmplitudeAverages, BatchSums, EnsembleConfig, EnsembleMeans,
    Trajectory, PERTURBATIVE_LIMIT,
};
