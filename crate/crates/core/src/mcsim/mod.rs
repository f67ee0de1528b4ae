//! Classical Monte-Carlo transport of atom ensembles: thermal sampling,
//! velocity-Verlet integration in static or time-dependent potentials, the
//! side-guide loading schedule and loss channels.
//!
//! Every particle owns counter-based random streams keyed by the run seed
//! and its id, and particles never interact, so results are bit-identical
//! for any number of worker threads.

mod ensemble;
mod integrate;
mod loading;
mod losses;
mod output;
mod particle;
mod potential;

pub use ensemble::{sample_ensemble, EnsembleSpec};
pub use integrate::{
    characteristic_frequency, integrate, median, propagate, run_with, DtPolicy, PropagationOptions, Scenario,
    SimulationResult,
};
pub use loading::{loading_schedule, PAIR, SINGLE_WIRE};
pub use losses::{apply_losses, step_adiabaticity, DomainBox, LossConfig, StepInfo};
pub use output::{loss_csv, read_loss_csv, read_snapshot_csv, snapshot_csv, LOSS_HEADER, SNAPSHOT_HEADER};
pub use particle::{LossCause, LossEvent, Particle, Snapshot, Status};
pub use potential::{Evaluation, Potential, PotentialMode, FORCE_FIELD_FLOOR};
