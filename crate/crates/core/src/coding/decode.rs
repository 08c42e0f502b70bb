use num_complex::Complex64;

use super::schedule::{tuple_of, BlockMarkovSchedule, MarcCodebooks};
use super::stage::{decode_stage, Component, Dep, Stage};
use crate::error::{Error, Result};
use crate::model::ChannelParams;

/// Decoded message tuple with the shifts that explained the window best.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub messages: Vec<usize>,
    pub shifts: Vec<usize>,
}

fn window(y: &[Complex64], start: usize, len: usize) -> Result<&[Complex64]> {
    y.get(start..start + len).ok_or_else(|| {
        Error::invalid(format!(
            "received signal too short for window [{start}, {})",
            start + len
        ))
    })
}

pub(crate) fn relay_stage<'a>(
    params: &ChannelParams,
    codebooks: &'a MarcCodebooks,
    known_prev: &[usize],
    d_max: usize,
) -> Stage<'a> {
    let counts = codebooks.counts();
    let components = (1..=codebooks.k())
        .map(|l| Component {
            gain: params.gain_relay(l),
            dep: Dep::Digit(l - 1),
            words: (0..counts[l - 1])
                .map(|w| codebooks.encoder_word(l, known_prev[l - 1], w))
                .collect(),
        })
        .collect();
    Stage {
        radices: counts.to_vec(),
        components,
        n: codebooks.n(),
        d_max,
    }
}

pub(crate) fn destination_stage<'a>(
    params: &ChannelParams,
    codebooks: &'a MarcCodebooks,
    known_next: &[usize],
    d_max: usize,
) -> Stage<'a> {
    let counts = codebooks.counts();
    let mut components: Vec<Component<'a>> = (1..=codebooks.k())
        .map(|l| Component {
            gain: params.gain_dest(l),
            dep: Dep::Digit(l - 1),
            words: (0..counts[l - 1])
                .map(|w| codebooks.encoder_word(l, w, known_next[l - 1]))
                .collect(),
        })
        .collect();
    components.push(Component {
        gain: params.gain_dest(params.relay_index()),
        dep: Dep::Full,
        words: (0..codebooks.tuples()).map(|t| codebooks.relay_word(t)).collect(),
    });
    Stage {
        radices: counts.to_vec(),
        components,
        n: codebooks.n(),
        d_max,
    }
}

fn check_known(known: &[usize], codebooks: &MarcCodebooks) -> Result<()> {
    if known.len() != codebooks.k() || known.iter().zip(codebooks.counts()).any(|(&w, &m)| w >= m) {
        return Err(Error::invalid(
            "known messages must hold one in-range index per encoder",
        ));
    }
    Ok(())
}

/// ML decoding of the current messages at the relay from one block window
/// of `n + d_max` samples, given the previous messages it already decoded.
pub fn relay_decode_block(
    window: &[Complex64],
    params: &ChannelParams,
    codebooks: &MarcCodebooks,
    known_prev: &[usize],
    d_max: usize,
) -> Result<Decision> {
    check_known(known_prev, codebooks)?;
    let stage = relay_stage(params, codebooks, known_prev, d_max);
    let d = decode_stage(window, &stage)?;
    Ok(Decision {
        messages: tuple_of(d.hypothesis, codebooks.counts()),
        shifts: d.shifts,
    })
}

/// Messages of every block recovered by backward decoding, with the shifts
/// chosen at each stage (`stages[0]` is block `B + 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BackwardDecode {
    /// `K × B`, `messages[l-1][b-1]`.
    pub messages: Vec<Vec<usize>>,
    pub stages: Vec<Decision>,
}

/// Backward decoding at the destination.
///
/// Block `B + 1` resolves `W_{·,B}` from the relay word and the encoders'
/// `(W_{l,B}, 1)` words; each earlier block `b` then resolves `W_{·,b-1}`
/// given the already decoded `W_{·,b}`. Every stage searches all message
/// tuples and all `(d_max+1)^{K+1}` shifts.
pub fn destination_backward_decode(
    y_dest: &[Complex64],
    params: &ChannelParams,
    codebooks: &MarcCodebooks,
    schedule: &BlockMarkovSchedule,
) -> Result<BackwardDecode> {
    if schedule.k != codebooks.k() || schedule.n != codebooks.n() {
        return Err(Error::invalid("codebooks do not match the schedule"));
    }
    let k = schedule.k;
    let d_max = schedule.guard;
    destination_stage(params, codebooks, &vec![0; k], d_max).check_budget()?;
    let mut messages = vec![vec![0; schedule.blocks]; k];
    let mut stages = Vec::with_capacity(schedule.blocks);
    let mut next = vec![0; k];
    for b in (2..=schedule.blocks + 1).rev() {
        let w = window(y_dest, schedule.block_start(b), schedule.n + d_max)?;
        let stage = destination_stage(params, codebooks, &next, d_max);
        let d = decode_stage(w, &stage)?;
        let decoded = tuple_of(d.hypothesis, codebooks.counts());
        for l in 0..k {
            messages[l][b - 2] = decoded[l];
        }
        stages.push(Decision {
            messages: decoded.clone(),
            shifts: d.shifts,
        });
        next = decoded;
    }
    Ok(BackwardDecode { messages, stages })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::schedule::block_markov_encode;
    use crate::coding::stage::decode_stage_bruteforce;
    use crate::model::{transmit, DelayProfile, Noise};

    fn setup(relay_power: f64) -> (ChannelParams, MarcCodebooks) {
        let p = ChannelParams::uniform(2, 1.0, 2.0, 1.0, 0.5)
            .unwrap()
            .with_powers(vec![1.0, 1.0, relay_power])
            .unwrap();
        let cb = MarcCodebooks::generate(&p, &[4, 3], 12, 77).unwrap();
        (p, cb)
    }

    #[test]
    fn noiseless_end_to_end() {
        let (p, cb) = setup(1.0);
        let s = BlockMarkovSchedule::new(2, 3, 12, 2).unwrap();
        let msgs = vec![vec![3, 1, 2], vec![2, 0, 1]];
        let x = block_markov_encode(&s, &cb, &msgs).unwrap();
        let delays = DelayProfile::new(vec![2, 0, 1], 2).unwrap();
        let out = transmit(&p, &delays, &x, Noise::Off).unwrap();
        let dec = destination_backward_decode(&out.y_dest, &p, &cb, &s).unwrap();
        assert_eq!(dec.messages, msgs);
        assert!(dec.stages.iter().all(|st| st.shifts == vec![2, 0, 1]));
        // relay: block 2 given block 1
        let w = &out.y_relay[s.block_start(2)..s.block_start(2) + 14];
        let r = relay_decode_block(w, &p, &cb, &[3, 2], 2).unwrap();
        assert_eq!(r.messages, vec![1, 0]);
        assert_eq!(r.shifts, vec![2, 0]);
    }

    #[test]
    fn relay_synchronous_matches_direct_ml() {
        let (p, cb) = setup(1.0);
        let s = BlockMarkovSchedule::new(2, 1, 12, 0).unwrap();
        for seed in 0..30u64 {
            let msgs = vec![vec![(seed % 4) as usize], vec![(seed % 3) as usize]];
            let x = block_markov_encode(&s, &cb, &msgs).unwrap();
            let noisy = p.with_noise_power(3.0).unwrap();
            let out = transmit(&noisy, &DelayProfile::synchronous(3), &x, Noise::Seeded(seed)).unwrap();
            let w = &out.y_relay[..12];
            let fast = relay_decode_block(w, &p, &cb, &[0, 0], 0).unwrap();
            let stage = relay_stage(&p, &cb, &[0, 0], 0);
            let direct = decode_stage_bruteforce(w, &stage).unwrap();
            assert_eq!(fast.messages, tuple_of(direct.hypothesis, cb.counts()));
        }
    }

    #[test]
    fn silent_relay_reduces_to_mac_decoding() {
        let (p, cb) = setup(0.0);
        let s = BlockMarkovSchedule::new(2, 2, 12, 1).unwrap();
        let noisy = p.with_noise_power(2.0).unwrap();
        for seed in 0..20u64 {
            let msgs = vec![vec![(seed % 4) as usize, 1], vec![2, (seed % 3) as usize]];
            let x = block_markov_encode(&s, &cb, &msgs).unwrap();
            let delays = DelayProfile::new(vec![1, 0, 1], 1).unwrap();
            let out = transmit(&noisy, &delays, &x, Noise::Seeded(seed)).unwrap();
            let dec = destination_backward_decode(&out.y_dest, &p, &cb, &s).unwrap();
            // MAC-only backward decoder: the same stages without the relay component
            let mut next = vec![0, 0];
            let mut mac = vec![vec![0; 2]; 2];
            for b in (2..=3).rev() {
                let mut stage = destination_stage(&p, &cb, &next, 1);
                stage.components.pop();
                let w = &out.y_dest[s.block_start(b)..s.block_start(b) + 13];
                let d = decode_stage_bruteforce(w, &stage).unwrap();
                next = tuple_of(d.hypothesis, cb.counts());
                mac[0][b - 2] = next[0];
                mac[1][b - 2] = next[1];
            }
            assert_eq!(dec.messages, mac);
        }
    }
}
