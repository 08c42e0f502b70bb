use num_complex::Complex64;

use super::decode::relay_decode_block;
use super::schedule::{tuple_index, BlockMarkovSchedule, MarcCodebooks};
use crate::error::Result;
use crate::model::{ChannelParams, RelayPolicy};

/// One relay decision: the block decoded and how much of `y_R` it had seen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelayTraceEntry {
    pub block: usize,
    pub messages: Vec<usize>,
    pub observed: usize,
}

/// Decode-and-forward relay: at the start of block `b + 1` it decodes block
/// `b` from its own observations and sends the codeword of that tuple.
pub struct DecodeForwardRelay<'a> {
    params: &'a ChannelParams,
    codebooks: &'a MarcCodebooks,
    schedule: BlockMarkovSchedule,
    decoded: Vec<Vec<usize>>,
    current: usize,
    trace: Vec<RelayTraceEntry>,
    error: Option<crate::error::Error>,
}

impl<'a> DecodeForwardRelay<'a> {
    pub fn new(params: &'a ChannelParams, codebooks: &'a MarcCodebooks, schedule: BlockMarkovSchedule) -> Self {
        Self {
            params,
            codebooks,
            schedule,
            decoded: Vec::new(),
            current: 0,
            trace: Vec::new(),
            error: None,
        }
    }

    /// Relay estimates, `decoded[b-1]` for block `b`.
    pub fn decoded(&self) -> &[Vec<usize>] {
        &self.decoded
    }

    pub fn trace(&self) -> &[RelayTraceEntry] {
        &self.trace
    }

    pub fn into_result(self) -> Result<(Vec<Vec<usize>>, Vec<RelayTraceEntry>)> {
        match self.error {
            Some(e) => Err(e),
            None => Ok((self.decoded, self.trace)),
        }
    }

    fn start_block(&mut self, b: usize, prefix: &[Complex64]) {
        let k = self.schedule.k;
        if b == 1 || b > self.schedule.blocks + 1 {
            self.current = 0;
            return;
        }
        let prev_block = b - 1;
        let known = if prev_block == 1 {
            vec![0; k]
        } else {
            self.decoded[prev_block - 2].clone()
        };
        let start = self.schedule.block_start(prev_block);
        let len = self.schedule.slot_len();
        let messages = match relay_decode_block(
            &prefix[start..start + len],
            self.params,
            self.codebooks,
            &known,
            self.schedule.guard,
        ) {
            Ok(d) => d.messages,
            Err(e) => {
                // Fall back to the fixed message and keep the first error.
                self.error.get_or_insert(e);
                vec![0; k]
            }
        };
        self.trace.push(RelayTraceEntry {
            block: prev_block,
            messages: messages.clone(),
            observed: prefix.len(),
        });
        self.current = tuple_index(&messages, self.codebooks.counts());
        self.decoded.push(messages);
    }
}

impl RelayPolicy for DecodeForwardRelay<'_> {
    fn next_symbol(&mut self, local_index: usize, prefix: &[Complex64]) -> Complex64 {
        let s = self.schedule.slot_len();
        let (slot, pos) = (local_index / s, local_index % s);
        if pos == 0 {
            self.start_block(slot + 1, prefix);
        }
        if pos < self.schedule.n && slot <= self.schedule.blocks {
            self.codebooks.relay_word(self.current)[pos]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }
}
