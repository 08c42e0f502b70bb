//! Joint ML search over message hypotheses and integer shifts.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest `hypotheses × shift combinations` examined in one stage.
pub const MAX_SEARCH: usize = 1 << 24;

/// How a component's codeword depends on the hypothesis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Dep {
    /// Word chosen by one digit of the hypothesis tuple.
    Digit(usize),
    /// One word per hypothesis.
    Full,
}

pub(crate) struct Component<'a> {
    pub gain: Complex64,
    pub dep: Dep,
    pub words: Vec<&'a [Complex64]>,
}

/// One decoding problem: a window, the unknown message digits and the
/// components whose shifted, scaled codewords superpose in it.
pub(crate) struct Stage<'a> {
    pub radices: Vec<usize>,
    pub components: Vec<Component<'a>>,
    pub n: usize,
    pub d_max: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageDecision {
    pub hypothesis: usize,
    pub shifts: Vec<usize>,
}

impl<'a> Stage<'a> {
    pub fn hypotheses(&self) -> usize {
        self.radices.iter().product()
    }

    pub fn search_size(&self) -> Option<usize> {
        let shifts = (self.d_max + 1).checked_pow(self.components.len() as u32)?;
        self.hypotheses().checked_mul(shifts)
    }

    pub fn check_budget(&self) -> Result<()> {
        match self.search_size() {
            Some(s) if s <= MAX_SEARCH => Ok(()),
            _ => Err(Error::budget(format!(
                "search over {} hypotheses × {}^{} shifts exceeds 2^24; lower n·R or d_max",
                self.hypotheses(),
                self.d_max + 1,
                self.components.len()
            ))),
        }
    }

    fn ids(&self, h: usize, digits: &mut [usize], ids: &mut [usize]) {
        let mut rest = h;
        for (slot, &m) in digits.iter_mut().zip(&self.radices).rev() {
            *slot = rest % m;
            rest /= m;
        }
        for (id, c) in ids.iter_mut().zip(&self.components) {
            *id = match c.dep {
                Dep::Digit(i) => digits[i],
                Dep::Full => h,
            };
        }
    }
}

/// Real dot product with four independent accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for i in 0..4 {
            acc[i] += x[i] * y[i];
        }
    }
    acc[0] + acc[1] + acc[2] + acc[3] + tail
}

/// `g · x` as interleaved `[re, im, re, im, ...]`, so that
/// `Re Σ a_j conj(b_j)` becomes a plain dot product.
fn interleave(g: Complex64, x: &[Complex64]) -> Vec<f64> {
    x.iter()
        .flat_map(|&z| {
            let v = g * z;
            [v.re, v.im]
        })
        .collect()
}

/// `Re Σ_j a[j] · conj(b[j + lag])` over the overlap, on interleaved words.
fn xcorr_re(a: &[f64], b: &[f64], lag: isize) -> f64 {
    let n = (a.len() / 2) as isize;
    let lo = 0.max(-lag);
    let hi = n.min(n - lag);
    if hi <= lo {
        return 0.0;
    }
    dot(
        &a[2 * lo as usize..2 * hi as usize],
        &b[2 * (lo + lag) as usize..2 * (hi + lag) as usize],
    )
}

struct PairTable {
    a: usize,
    b: usize,
    by_hypothesis: bool,
    stride_b: usize,
    /// `[entry][lag + d_max]`
    values: Vec<f64>,
}

/// Minimizes `‖y − Σ_c g_c S_{d_c} x_c(h)‖²` over hypotheses `h` and shifts
/// `d_c ∈ [0, d_max]` using precomputed correlations.
pub(crate) fn decode_stage(window: &[Complex64], stage: &Stage<'_>) -> Result<StageDecision> {
    stage.check_budget()?;
    let (n, dm) = (stage.n, stage.d_max);
    if window.len() < n + dm {
        return Err(Error::invalid(format!(
            "window of {} samples shorter than n + d_max",
            window.len()
        )));
    }
    let nd = dm + 1;
    let lags = 2 * dm + 1;
    let h_count = stage.hypotheses();
    let comps = &stage.components;
    let active: Vec<bool> = comps
        .iter()
        .map(|c| c.gain.norm_sqr() > 0.0 && c.words.iter().any(|w| w.iter().any(|z| z.norm_sqr() > 0.0)))
        .collect();
    let y = interleave(Complex64::new(1.0, 0.0), &window[..n + dm]);
    let scaled: Vec<Vec<Vec<f64>>> = comps
        .iter()
        .zip(&active)
        .map(|(c, &on)| {
            if on {
                c.words.iter().map(|w| interleave(c.gain, w)).collect()
            } else {
                Vec::new()
            }
        })
        .collect();

    // corr[c][id * nd + d] = Re <y, g S_d x> and energy[c][id] = ‖g x‖²
    let mut corr: Vec<Vec<f64>> = Vec::with_capacity(comps.len());
    let mut energy: Vec<Vec<f64>> = Vec::with_capacity(comps.len());
    for (c, comp) in comps.iter().enumerate() {
        let len = comp.words.len();
        let mut cv = vec![0.0; len * nd];
        let mut ev = vec![0.0; len];
        if active[c] {
            for (id, w) in scaled[c].iter().enumerate() {
                ev[id] = dot(w, w);
                for d in 0..nd {
                    cv[id * nd + d] = dot(&y[2 * d..2 * (d + n)], w);
                }
            }
        }
        corr.push(cv);
        energy.push(ev);
    }

    let mut digits = vec![0; stage.radices.len()];
    let mut ids = vec![0; comps.len()];
    let mut pairs = Vec::new();
    for a in 0..comps.len() {
        for b in a + 1..comps.len() {
            if !(active[a] && active[b]) {
                continue;
            }
            let (ca, cb) = (&comps[a], &comps[b]);
            let by_h = !matches!((ca.dep, cb.dep), (Dep::Digit(i), Dep::Digit(j)) if i != j);
            let entries = if by_h { h_count } else { ca.words.len() * cb.words.len() };
            let mut values = vec![0.0; entries * lags];
            let mut fill = |e: usize, xa: &[f64], xb: &[f64]| {
                for (li, slot) in values[e * lags..(e + 1) * lags].iter_mut().enumerate() {
                    *slot = xcorr_re(xa, xb, li as isize - dm as isize);
                }
            };
            if by_h {
                for h in 0..h_count {
                    stage.ids(h, &mut digits, &mut ids);
                    fill(h, &scaled[a][ids[a]], &scaled[b][ids[b]]);
                }
            } else {
                for ia in 0..ca.words.len() {
                    for ib in 0..cb.words.len() {
                        fill(ia * cb.words.len() + ib, &scaled[a][ia], &scaled[b][ib]);
                    }
                }
            }
            pairs.push(PairTable {
                a,
                b,
                by_hypothesis: by_h,
                stride_b: cb.words.len(),
                values,
            });
        }
    }

    let cc = comps.len();
    // pair_of[b * cc + a] indexes `pairs` for a < b
    let mut pair_of = vec![usize::MAX; cc * cc];
    for (i, p) in pairs.iter().enumerate() {
        pair_of[p.b * cc + p.a] = i;
    }
    let mut search = Search {
        cc,
        nd,
        dm,
        single: vec![0.0; cc * nd],
        rows: vec![0.0; pairs.len() * lags],
        pair_of,
        lags,
        shifts: vec![0; cc],
        partial: vec![0.0; cc + 1],
        best: f64::INFINITY,
        best_h: 0,
        best_shifts: vec![0; cc],
    };
    for h in 0..h_count {
        stage.ids(h, &mut digits, &mut ids);
        for c in 0..cc {
            let e = energy[c][ids[c]];
            let row = &corr[c][ids[c] * nd..(ids[c] + 1) * nd];
            for d in 0..nd {
                search.single[c * nd + d] = e - 2.0 * row[d];
            }
        }
        for (i, p) in pairs.iter().enumerate() {
            let e = if p.by_hypothesis {
                h
            } else {
                ids[p.a] * p.stride_b + ids[p.b]
            };
            for (dst, v) in search.rows[i * lags..(i + 1) * lags]
                .iter_mut()
                .zip(&p.values[e * lags..(e + 1) * lags])
            {
                *dst = 2.0 * v;
            }
        }
        search.run(h, 0);
    }
    Ok(StageDecision {
        hypothesis: search.best_h,
        shifts: search.best_shifts,
    })
}

/// Depth-first enumeration of shift tuples with cached partial metrics.
struct Search {
    cc: usize,
    nd: usize,
    dm: usize,
    single: Vec<f64>,
    rows: Vec<f64>,
    pair_of: Vec<usize>,
    lags: usize,
    shifts: Vec<usize>,
    partial: Vec<f64>,
    best: f64,
    best_h: usize,
    best_shifts: Vec<usize>,
}

impl Search {
    fn run(&mut self, h: usize, c: usize) {
        for d in 0..self.nd {
            let mut m = self.partial[c] + self.single[c * self.nd + d];
            for a in 0..c {
                let p = self.pair_of[c * self.cc + a];
                if p != usize::MAX {
                    m += self.rows[p * self.lags + self.shifts[a] + self.dm - d];
                }
            }
            self.shifts[c] = d;
            if c + 1 == self.cc {
                if m < self.best {
                    self.best = m;
                    self.best_h = h;
                    self.best_shifts.copy_from_slice(&self.shifts);
                }
            } else {
                self.partial[c + 1] = m;
                self.run(h, c + 1);
            }
        }
    }
}

/// Direct residual evaluation of every hypothesis and shift tuple.
#[cfg(test)]
pub(crate) fn decode_stage_bruteforce(window: &[Complex64], stage: &Stage<'_>) -> Result<StageDecision> {
    stage.check_budget()?;
    let (n, dm) = (stage.n, stage.d_max);
    let len = n + dm;
    if window.len() < len {
        return Err(Error::invalid("window shorter than n + d_max"));
    }
    let cc = stage.components.len();
    let mut digits = vec![0; stage.radices.len()];
    let mut ids = vec![0; cc];
    let mut best = f64::INFINITY;
    let mut decision = StageDecision {
        hypothesis: 0,
        shifts: vec![0; cc],
    };
    let combos = (dm + 1).pow(cc as u32);
    let mut sig = vec![Complex64::new(0.0, 0.0); len];
    for h in 0..stage.hypotheses() {
        stage.ids(h, &mut digits, &mut ids);
        for combo in 0..combos {
            let mut rest = combo;
            let mut shifts = vec![0; cc];
            for s in shifts.iter_mut().rev() {
                *s = rest % (dm + 1);
                rest /= dm + 1;
            }
            sig.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (c, comp) in stage.components.iter().enumerate() {
                for (j, &x) in comp.words[ids[c]].iter().enumerate() {
                    sig[j + shifts[c]] += comp.gain * x;
                }
            }
            let r: f64 = window[..len].iter().zip(&sig).map(|(y, s)| (y - s).norm_sqr()).sum();
            if r < best {
                best = r;
                decision = StageDecision { hypothesis: h, shifts };
            }
        }
    }
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coding::codebook::GaussianCodebook;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Fixture {
        books: Vec<crate::coding::codebook::MaterializedCodebook>,
    }

    fn fixture(n: usize) -> Fixture {
        Fixture {
            books: (0..3)
                .map(|i| {
                    GaussianCodebook::new(n, 12, 1.0, 40 + i)
                        .unwrap()
                        .materialize()
                        .unwrap()
                })
                .collect(),
        }
    }

    fn stage<'a>(f: &'a Fixture, gains: [Complex64; 3], n: usize, d_max: usize) -> Stage<'a> {
        Stage {
            radices: vec![3, 4],
            components: vec![
                Component {
                    gain: gains[0],
                    dep: Dep::Digit(0),
                    words: (0..3).map(|i| f.books[0].word(i)).collect(),
                },
                Component {
                    gain: gains[1],
                    dep: Dep::Digit(1),
                    words: (0..4).map(|i| f.books[1].word(i)).collect(),
                },
                Component {
                    gain: gains[2],
                    dep: Dep::Full,
                    words: (0..12).map(|i| f.books[2].word(i)).collect(),
                },
            ],
            n,
            d_max,
        }
    }

    fn received(st: &Stage<'_>, h: usize, shifts: &[usize], noise: f64, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        let mut digits = vec![0; 2];
        let mut ids = vec![0; 3];
        st.ids(h, &mut digits, &mut ids);
        let mut y: Vec<Complex64> = (0..st.n + st.d_max)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * noise)
            .collect();
        for (c, comp) in st.components.iter().enumerate() {
            for (j, &x) in comp.words[ids[c]].iter().enumerate() {
                y[j + shifts[c]] += comp.gain * x;
            }
        }
        y
    }

    #[test]
    fn noiseless_recovery() {
        let f = fixture(16);
        let gains = [
            Complex64::new(1.0, 0.2),
            Complex64::new(-0.4, 0.8),
            Complex64::new(0.7, 0.0),
        ];
        let st = stage(&f, gains, 16, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for h in 0..12 {
            let shifts = [h % 4, (h / 2) % 4, (h * 3) % 4];
            let y = received(&st, h, &shifts, 0.0, &mut rng);
            let d = decode_stage(&y, &st).unwrap();
            assert_eq!(d.hypothesis, h);
            assert_eq!(d.shifts, shifts.to_vec());
        }
    }

    #[test]
    fn agrees_with_bruteforce_under_noise() {
        let f = fixture(10);
        let gains = [
            Complex64::new(0.6, 0.1),
            Complex64::new(0.3, -0.5),
            Complex64::new(0.4, 0.4),
        ];
        let st = stage(&f, gains, 10, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for t in 0..40 {
            let h = t % 12;
            let y = received(&st, h, &[t % 3, 0, 2], 2.5, &mut rng);
            assert_eq!(
                decode_stage(&y, &st).unwrap(),
                decode_stage_bruteforce(&y, &st).unwrap()
            );
        }
    }

    #[test]
    fn budget_guard() {
        let f = fixture(8);
        let mut st = stage(&f, [Complex64::new(1.0, 0.0); 3], 8, 2);
        st.radices = vec![1 << 12, 1 << 12];
        assert!(matches!(decode_stage(&[], &st), Err(Error::Budget(_))));
    }
}
