//! Channel model: domain types, the delayed channel variants, the causal
//! relay interface and the unitary DFT.

mod channel;
mod dft;
mod relay;
mod types;

pub use channel::{noise_stream, transmit, transmit_cyclic, transmit_sliced, ChannelOutput, Noise, Receiver};
pub use dft::{dft, idft};
pub use relay::{relay_causal_encode, run_relay, AmplifyForward, PowerMeter, RelayPolicy, RelayRun, SilentRelay};
pub(crate) use types::toml_key;
pub use types::{
    ChannelParams, ChannelParamsFile, CodewordBlock, DelayProfile, IntervalPartition, SourceModel, SourceModelFile,
};
