//! Separate source-channel coding over the asynchronous relay channel:
//! random binning, Gaussian codebooks, block Markov transmission,
//! decode-and-forward relaying and backward decoding.

mod binning;
mod codebook;
mod decode;
mod relay_df;
mod schedule;
mod sim;
mod stage;
mod sync;

pub use binning::{
    sw_block_errors, sw_decode, sw_encode, BinningCode, MAX_SEQUENCE_SPACE, MAX_SOURCE_BLOCK, MAX_SW_CANDIDATES,
};
pub use codebook::{GaussianCodebook, MaterializedCodebook, MAX_CODEBOOK_BITS, MAX_MATERIALIZED_ENTRIES};
pub use decode::{destination_backward_decode, relay_decode_block, BackwardDecode, Decision};
pub use relay_df::{DecodeForwardRelay, RelayTraceEntry};
pub use schedule::{block_markov_encode, tuple_index, tuple_of, BlockMarkovSchedule, MarcCodebooks};
pub use sim::{
    calibrate_noise, channel_load, message_rates, monte_carlo_error, run_trial, trial_seed, wilson_interval,
    LoadTarget, MonteCarloReport, ProfileStats, SimConfig, SimSetup, TrialReport,
};
pub use stage::{StageDecision, MAX_SEARCH};
pub use sync::monte_carlo_synchronous;
