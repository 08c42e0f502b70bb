use std::fmt;

use crate::subset::Subset;
use crate::units::fmt_sig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionKind {
    Outer,
    SlepianWolf,
    MacRelay,
    MacDestination,
    Achievable,
    Ic,
}

impl RegionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RegionKind::Outer => "outer",
            RegionKind::SlepianWolf => "slepian_wolf",
            RegionKind::MacRelay => "mac_relay",
            RegionKind::MacDestination => "mac_destination",
            RegionKind::Achievable => "achievable",
            RegionKind::Ic => "ic",
        }
    }
}

impl fmt::Display for RegionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Direction of a constraint on the rate or entropy attached to `subset`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    /// quantity ≤ rhs (or < rhs when strict)
    Upper,
    /// quantity ≥ rhs (or > rhs when strict)
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub subset: Subset,
    pub rhs: f64,
    pub kind: RegionKind,
    pub sense: Sense,
    pub strict: bool,
}

/// A family of subset-indexed constraints.
#[derive(Clone, Debug, PartialEq)]
pub struct RateRegion {
    /// Number of users (encoders); subsets are printed over `width` bits.
    pub k: usize,
    pub width: usize,
    pub kind: RegionKind,
    pub constraints: Vec<Constraint>,
    /// False when relay decoding may be the bottleneck.
    pub separation_guaranteed: bool,
    pub notes: Vec<String>,
}

impl RateRegion {
    pub fn new(k: usize, width: usize, kind: RegionKind) -> Self {
        Self {
            k,
            width,
            kind,
            constraints: Vec::new(),
            separation_guaranteed: true,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, subset: Subset, rhs: f64, kind: RegionKind, sense: Sense, strict: bool) {
        debug_assert!(
            !self.constraints.iter().any(|c| c.subset == subset && c.kind == kind),
            "duplicate constraint"
        );
        self.constraints.push(Constraint {
            subset,
            rhs,
            kind,
            sense,
            strict,
        });
    }

    pub fn get(&self, subset: Subset, kind: RegionKind) -> Option<f64> {
        self.constraints
            .iter()
            .find(|c| c.subset == subset && c.kind == kind)
            .map(|c| c.rhs)
    }

    /// `(subset, rhs)` pairs sorted by subset, ignoring kind and strictness.
    pub fn pairs(&self) -> Vec<(Subset, f64)> {
        let mut v: Vec<_> = self.constraints.iter().map(|c| (c.subset, c.rhs)).collect();
        v.sort_by_key(|p| p.0);
        v
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// One line per constraint: `S=<bitmask> rhs=<value> kind=<kind>`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            out.push_str(&format!(
                "S={} rhs={} kind={}\n",
                c.subset.to_bitstring(self.width),
                fmt_sig(c.rhs, 12),
                c.kind
            ));
        }
        out
    }
}

/// Constraint-wise intersection of two upper-bound regions over the same users:
/// the smaller rhs wins for each subset present in either.
pub fn intersect(a: &RateRegion, b: &RateRegion, kind: RegionKind) -> RateRegion {
    let mut out = RateRegion::new(a.k.max(b.k), a.width.max(b.width), kind);
    let mut subsets: Vec<Subset> = a.constraints.iter().chain(&b.constraints).map(|c| c.subset).collect();
    subsets.sort();
    subsets.dedup();
    for s in subsets {
        let pick = |r: &RateRegion| {
            r.constraints
                .iter()
                .filter(|c| c.subset == s && c.sense == Sense::Upper)
                .map(|c| c.rhs)
                .fold(f64::INFINITY, f64::min)
        };
        let rhs = pick(a).min(pick(b));
        if rhs.is_finite() {
            let strict = a
                .constraints
                .iter()
                .chain(&b.constraints)
                .any(|c| c.subset == s && c.strict);
            out.push(s, rhs, kind, Sense::Upper, strict);
        }
    }
    out.separation_guaranteed = a.separation_guaranteed && b.separation_guaranteed;
    out
}
