//! Identity checks, eigen-reports and the verification battery.

mod battery;
mod checks;
mod evolution;
mod levels;
mod report;

pub use battery::{case_ids, run_battery, BatteryConfig, GridParams};
pub use checks::{
    eigen_transfer_check, ensure_landau_resolved, intertwining_residual, moyal_identity_residual, spectral_tail,
    translation_intertwining_residual, IntertwiningSetup, TransferSetup, TRANSFER_NODE_LIMIT,
};
pub use evolution::{evolve_schrodinger, lifted_evolution_residual, Evolver, MAX_EVOLUTION_TIME, TRUNCATION_LIMIT};
pub use levels::{eigenvector_expansion, gram_deviation, landau_rayleigh_quotients, landau_report, ExpansionTable};
pub use report::{cluster_levels, EigenEntry, EigenReport, VerificationReport};
