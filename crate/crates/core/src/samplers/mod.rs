//! Decoding policies and the trajectory runners built on them.

mod config;
mod sampling;
mod steps;
mod trajectory;

pub use config::{
    Bypass, Policy, SamplerConfig, DEFAULT_CANDIDATES, DEFAULT_GAMMA, DEFAULT_TAU_POS,
    DEFAULT_TAU_TOKEN,
};
pub use sampling::{sampling_distribution, select_positions, token_sample};
pub use steps::{
    greedy_certainty_step, info_gain_step, lookum_step, propose_candidates, uniform_step,
    InfoGainStep, StepInput,
};
pub use trajectory::{beam_search, best_of_n, run_trajectory, run_trajectory_on_stream, BeamEntry};
