use serde::{Deserialize, Serialize};

/// Logarithm base for every information quantity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }

    /// `log(1 + x)`, accurate for small `x`.
    pub fn log1p(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.ln_1p() / std::f64::consts::LN_2,
            LogBase::Nats => x.ln_1p(),
        }
    }

    /// Converts a natural-log quantity into this base.
    pub fn from_nats(self, nats: f64) -> f64 {
        match self {
            LogBase::Bits => nats / std::f64::consts::LN_2,
            LogBase::Nats => nats,
        }
    }

    /// `base^x`.
    pub fn exp(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.exp2(),
            LogBase::Nats => x.exp(),
        }
    }

    pub fn unit(self) -> &'static str {
        match self {
            LogBase::Bits => "bits",
            LogBase::Nats => "nats",
        }
    }
}

/// splitmix64 finalizer; used to derive independent stream seeds.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Order-sensitive seed derivation from a list of words.
pub fn derive_seed(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x005E_ED0F_7A3A_2C00_u64, |acc, &w| mix64(acc ^ mix64(w)))
}

/// Number of indices `ceil(2^bits)`, robust to `bits` landing a hair above an integer.
pub fn index_count(bits: f64) -> u64 {
    let raw = bits.exp2();
    let snapped = raw.round();
    if (raw - snapped).abs() <= 1e-9 * snapped.max(1.0) {
        snapped.max(1.0) as u64
    } else {
        raw.ceil().max(1.0) as u64
    }
}

/// Decimal rendering with `digits` significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..15).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{:.*e}", digits - 1, x);
        let (mant, e) = s.split_once('e').unwrap();
        let mant = if mant.contains('.') {
            mant.trim_end_matches('0').trim_end_matches('.')
        } else {
            mant
        };
        format!("{mant}e{e}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_count_snaps_integers() {
        assert_eq!(index_count(0.0), 1);
        assert_eq!(index_count(12.0), 4096);
        assert_eq!(index_count(12.0 * (3.0f64).log2() / (3.0f64).log2()), 4096);
        assert_eq!(index_count(1.5), 3);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(2.0, 12), "2");
        assert_eq!(fmt_sig(0.345943161863729, 12), "0.345943161864");
        assert_eq!(fmt_sig(-1.25, 12), "-1.25");
        assert_eq!(fmt_sig(1.5e-9, 12), "1.5e-9");
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(derive_seed(&[1, 2]), derive_seed(&[2, 1]));
        assert_eq!(derive_seed(&[7, 9]), derive_seed(&[7, 9]));
    }
}
