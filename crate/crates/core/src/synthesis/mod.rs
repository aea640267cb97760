//! Control synthesis: moment problems, generators, rotations and pulses.

pub mod lie;
pub mod moment;
pub mod pulse;
pub mod rotation;
pub mod signal;

pub use lie::{admissible_generators, lie_closure_rank, planar_generator, GeneratorSet};
pub use moment::{solve_moment_problem, verify_moments, MomentProblem, MomentSolution};
pub use pulse::{resonant_pulse, ResonantPulse};
pub use rotation::{
    match_drift_phases, plan_rotations, random_special_unitary, DriftMatch, RotationFactor,
    RotationPlan,
};
pub use signal::{budget_report, Budget, ControlSignal, SignalForm, TrigTerm};
