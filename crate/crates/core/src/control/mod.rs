//! Control-vector synthesis: the identity block, Newton refinement toward a
//! target and the repetition scheme for large rotations.

pub mod charpoly;
pub mod identity;
pub mod synthesis;

pub use charpoly::{char_poly, CharPolyCoefficients};
pub use identity::{
    default_identity_seed, identity_functional, solve_identity_seed, IdentitySeed, SearchConfig,
    SeedSelection, DEFAULT_RNG_SEED,
};
pub use synthesis::{
    choose_repetitions, control_conditioning, newton_step, synthesize, ControlSchedule, NewtonRhs,
    SynthesisOptions, SynthesisTarget,
};
