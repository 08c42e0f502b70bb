//! Entropy and capacity constraint families over subsets of terminals.

mod channel;
mod entropy;
mod region;

pub use channel::{
    achievable_region, achievable_region_in, feasible, gain_conditions_hold, ic_region, ic_region_via_macs, mac_region,
    outer_region, outer_region_in, slepian_wolf_region, FeasibilityVerdict, GainConditions, IcRegion, Status,
    BOUNDARY_TOLERANCE,
};
pub use entropy::conditional_entropy;
pub use region::{intersect, Constraint, RateRegion, RegionKind, Sense};
