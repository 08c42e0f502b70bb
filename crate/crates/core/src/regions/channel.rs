use num_complex::Complex64;

use super::entropy::conditional_entropy;
use super::region::{intersect, RateRegion, RegionKind, Sense};
use crate::error::{Error, Result};
use crate::model::{ChannelParams, SourceModel};
use crate::subset::Subset;
use crate::units::LogBase;

/// Slack within which a verdict is reported as `boundary`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

fn check_kappa(kappa: f64) -> Result<()> {
    if !(kappa.is_finite() && kappa > 0.0) {
        return Err(Error::invalid(format!("kappa must be finite and > 0, got {kappa}")));
    }
    Ok(())
}

fn destination_family(params: &ChannelParams, kappa: f64, base: LogBase, kind: RegionKind, strict: bool) -> RateRegion {
    let k = params.k();
    let mut r = RateRegion::new(k, k + 1, kind);
    for s in Subset::with_relay(k) {
        let rhs = kappa * base.log1p(params.received_power_dest(s) / params.noise_power());
        r.push(s, rhs, kind, Sense::Upper, strict);
    }
    r
}

/// `H(U_S|U_{S^c}) ≤ κ log(1 + Σ_S |g_lD|² P_l / N)` for every `S ∋ K+1`.
pub fn outer_region(params: &ChannelParams, kappa: f64) -> Result<RateRegion> {
    outer_region_in(params, kappa, LogBase::Bits)
}

pub fn outer_region_in(params: &ChannelParams, kappa: f64, base: LogBase) -> Result<RateRegion> {
    check_kappa(kappa)?;
    Ok(destination_family(params, kappa, base, RegionKind::Outer, false))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GainConditions {
    pub hold: bool,
    pub violating: Vec<Subset>,
}

/// `Σ_S |g_lR|² P_l ≥ |g_(K+1)D|² P_(K+1) + Σ_S |g_lD|² P_l` for every nonempty `S ⊆ [1,K]`.
pub fn gain_conditions_hold(params: &ChannelParams) -> GainConditions {
    let relay = params.relay_index();
    let relay_term = params.gain_dest(relay).norm_sqr() * params.power(relay);
    let violating: Vec<Subset> = Subset::nonempty_encoders(params.k())
        .filter(|&s| params.received_power_relay(s) < relay_term + params.received_power_dest(s))
        .collect();
    GainConditions {
        hold: violating.is_empty(),
        violating,
    }
}

/// Sufficient conditions of the separate scheme.
///
/// Matches [`outer_region`] (strict) when the gain conditions hold; otherwise
/// the relay MAC constraints are added and the region is flagged.
pub fn achievable_region(params: &ChannelParams, kappa: f64) -> Result<RateRegion> {
    achievable_region_in(params, kappa, LogBase::Bits)
}

pub fn achievable_region_in(params: &ChannelParams, kappa: f64, base: LogBase) -> Result<RateRegion> {
    check_kappa(kappa)?;
    let mut r = destination_family(params, kappa, base, RegionKind::Achievable, true);
    if !gain_conditions_hold(params).hold {
        for s in Subset::nonempty_encoders(params.k()) {
            let rhs = kappa * base.log1p(params.received_power_relay(s) / params.noise_power());
            r.push(s, rhs, RegionKind::MacRelay, Sense::Upper, true);
        }
        r.separation_guaranteed = false;
        r.notes.push("intersection, separation not guaranteed".into());
    }
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Inside,
    Boundary,
    Outside,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Inside => "inside",
            Status::Boundary => "boundary",
            Status::Outside => "outside",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityVerdict {
    pub status: Status,
    /// Constraints with slack at or below the tolerance.
    pub binding: Vec<Subset>,
    /// `min_S (rhs_S − H(U_S|U_{S^c}))`.
    pub margin: f64,
    /// False when the gain conditions fail and only the intersection region was checked.
    pub definitive: bool,
}

impl FeasibilityVerdict {
    pub fn render(&self, width: usize) -> String {
        let binding: Vec<String> = self.binding.iter().map(|s| s.to_bitstring(width)).collect();
        format!(
            "status={} margin={} binding=[{}] definitive={}\n",
            self.status.as_str(),
            crate::units::fmt_sig(self.margin, 12),
            binding.join(","),
            self.definitive
        )
    }
}

/// Compares the source's conditional entropies with the channel constraints.
pub fn feasible(src: &SourceModel, params: &ChannelParams, kappa: f64) -> Result<FeasibilityVerdict> {
    if src.k() != params.k() {
        return Err(Error::invalid(format!(
            "source has {} components but the channel has K = {}",
            src.k(),
            params.k()
        )));
    }
    let base = src.log_base();
    let gains = gain_conditions_hold(params);
    let region = if gains.hold {
        outer_region_in(params, kappa, base)?
    } else {
        achievable_region_in(params, kappa, base)?
    };
    let mut margin = f64::INFINITY;
    let mut binding = Vec::new();
    // S = {K+1} alone constrains nothing: both sides vanish when the relay is silent.
    let relay_only = Subset::singleton(params.relay_index());
    for c in region.constraints.iter().filter(|c| c.subset != relay_only) {
        let slack = c.rhs - conditional_entropy(src, c.subset);
        margin = margin.min(slack);
        if slack <= BOUNDARY_TOLERANCE {
            binding.push(c.subset);
        }
    }
    let status = if margin > BOUNDARY_TOLERANCE {
        Status::Inside
    } else if margin >= -BOUNDARY_TOLERANCE {
        Status::Boundary
    } else {
        Status::Outside
    };
    Ok(FeasibilityVerdict {
        status,
        binding,
        margin,
        definitive: gains.hold,
    })
}

/// Lower bounds `R_S > H(U_S|U_{S^c})` for every `S ∋ K+1`, with `R_(K+1) = 0`.
pub fn slepian_wolf_region(src: &SourceModel) -> RateRegion {
    let k = src.k();
    let mut r = RateRegion::new(k, k + 1, RegionKind::SlepianWolf);
    for s in Subset::with_relay(k) {
        r.push(
            s,
            conditional_entropy(src, s),
            RegionKind::SlepianWolf,
            Sense::Lower,
            true,
        );
    }
    r
}

/// Capacity region of a Gaussian MAC: `R_S ≤ log(1 + Σ_S |g_l|² P_l / N)` for nonempty `S`.
pub fn mac_region(gains: &[Complex64], powers: &[f64], noise_power: f64) -> Result<RateRegion> {
    if gains.len() != powers.len() || gains.is_empty() {
        return Err(Error::invalid("mac_region needs one power per gain"));
    }
    if gains.iter().any(|g| !(g.re.is_finite() && g.im.is_finite()))
        || powers.iter().any(|p| !(p.is_finite() && *p >= 0.0))
        || !(noise_power.is_finite() && noise_power > 0.0)
    {
        return Err(Error::invalid(
            "gains, powers and noise power must be finite (N > 0, P >= 0)",
        ));
    }
    let k = gains.len();
    let mut r = RateRegion::new(k, k, RegionKind::MacDestination);
    for s in Subset::all(k).filter(|s| !s.is_empty()) {
        let snr: f64 = s
            .indices()
            .map(|l| gains[l - 1].norm_sqr() * powers[l - 1])
            .sum::<f64>()
            / noise_power;
        r.push(
            s,
            LogBase::Bits.log1p(snr),
            RegionKind::MacDestination,
            Sense::Upper,
            false,
        );
    }
    Ok(r)
}

/// Two-user interference channel; `g_ij` is the gain from transmitter `i` to receiver `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct IcRegion {
    pub strong: bool,
    /// Constraints on `{1}`, `{2}` and `{1,2}`; the sum entry is the smaller of the two below.
    pub region: RateRegion,
    /// Sum constraints seen at receiver 1 and receiver 2.
    pub sum_constraints: [f64; 2],
}

pub fn ic_region(
    g11: Complex64,
    g12: Complex64,
    g21: Complex64,
    g22: Complex64,
    p1: f64,
    p2: f64,
    noise_power: f64,
) -> Result<IcRegion> {
    for (name, g) in [("g11", g11), ("g12", g12), ("g21", g21), ("g22", g22)] {
        if !(g.re.is_finite() && g.im.is_finite()) {
            return Err(Error::config(name, "gain must be finite"));
        }
    }
    for (name, v) in [("P1", p1), ("P2", p2)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::config(name, "power must be finite and >= 0"));
        }
    }
    if !(noise_power.is_finite() && noise_power > 0.0) {
        return Err(Error::config("noise_power", "must be finite and > 0"));
    }
    let (a11, a12, a21, a22) = (g11.norm_sqr(), g12.norm_sqr(), g21.norm_sqr(), g22.norm_sqr());
    let strong = g11.norm() <= g12.norm() && g22.norm() <= g21.norm();
    let c = |snr: f64| LogBase::Bits.log1p(snr / noise_power);
    // Under strong interference the direct link is the weaker one for each user.
    let r1 = c(a11.min(a12) * p1);
    let r2 = c(a22.min(a21) * p2);
    let sum_rx1 = c(a11 * p1 + a21 * p2);
    let sum_rx2 = c(a12 * p1 + a22 * p2);
    let mut region = RateRegion::new(2, 2, RegionKind::Ic);
    region.push(Subset::singleton(1), r1, RegionKind::Ic, Sense::Upper, false);
    region.push(Subset::singleton(2), r2, RegionKind::Ic, Sense::Upper, false);
    region.push(
        Subset::full(2),
        sum_rx1.min(sum_rx2),
        RegionKind::Ic,
        Sense::Upper,
        false,
    );
    region.notes.push(format!(
        "sum constraints: receiver 1 {} receiver 2 {}",
        crate::units::fmt_sig(sum_rx1, 12),
        crate::units::fmt_sig(sum_rx2, 12)
    ));
    region.notes.push(
        "the sufficient list names three conditions while the necessary list has four; all four are applied in both directions"
            .into(),
    );
    if !strong {
        region.separation_guaranteed = false;
        region
            .notes
            .push("weak interference: region is the two-receiver MAC intersection only".into());
    }
    Ok(IcRegion {
        strong,
        region,
        sum_constraints: [sum_rx1, sum_rx2],
    })
}

/// The region as the intersection of the MAC regions at both receivers.
pub fn ic_region_via_macs(
    g11: Complex64,
    g12: Complex64,
    g21: Complex64,
    g22: Complex64,
    p1: f64,
    p2: f64,
    noise_power: f64,
) -> Result<RateRegion> {
    let rx1 = mac_region(&[g11, g21], &[p1, p2], noise_power)?;
    let rx2 = mac_region(&[g12, g22], &[p1, p2], noise_power)?;
    Ok(intersect(&rx1, &rx2, RegionKind::Ic))
}
