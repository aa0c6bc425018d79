//! Distance-based selection of the near/far NOMA pair.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::geometry::DevicePoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairingScheme {
    /// Random near device, random far device.
    Rnrf,
    /// Nearest near device, nearest far device.
    Nnnf,
    /// Nearest near device, farthest far device.
    Nnff,
}

impl PairingScheme {
    pub const ALL: [PairingScheme; 3] = [PairingScheme::Rnrf, PairingScheme::Nnnf, PairingScheme::Nnff];

    pub fn as_str(self) -> &'static str {
        match self {
            PairingScheme::Rnrf => "RNRF",
            PairingScheme::Nnnf => "NNNF",
            PairingScheme::Nnff => "NNFF",
        }
    }
}

impl fmt::Display for PairingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PairingScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "RNRF" => Ok(PairingScheme::Rnrf),
            "NNNF" => Ok(PairingScheme::Nnnf),
            "NNFF" => Ok(PairingScheme::Nnff),
            _ => Err(invalid("scheme", format!("unknown pairing scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSelection {
    pub near: DevicePoint,
    pub far: DevicePoint,
}

/// Picks one device from each group. Only distances are consulted; the
/// random scheme is the only one that touches `rng`. Distance ties go to the
/// lowest index.
pub fn select_pair<R: Rng + ?Sized>(
    scheme: PairingScheme,
    group_a: &[DevicePoint],
    group_b: &[DevicePoint],
    rng: &mut R,
) -> Result<PairSelection> {
    if group_a.is_empty() {
        return Err(Error::EmptyGroup { group: "A" });
    }
    if group_b.is_empty() {
        return Err(Error::EmptyGroup { group: "B" });
    }
    let (near, far) = match scheme {
        PairingScheme::Rnrf => {
            let i = rng.random_range(0..group_a.len());
            let j = rng.random_range(0..group_b.len());
            (group_a[i], group_b[j])
        }
        PairingScheme::Nnnf => (group_a[nearest(group_a)], group_b[nearest(group_b)]),
        PairingScheme::Nnff => (group_a[nearest(group_a)], group_b[farthest(group_b)]),
    };
    Ok(PairSelection { near, far })
}

fn nearest(group: &[DevicePoint]) -> usize {
    let mut best = 0;
    for (i, p) in group.iter().enumerate().skip(1) {
        if p.distance < group[best].distance {
            best = i;
        }
    }
    best
}

fn farthest(group: &[DevicePoint]) -> usize {
    let mut best = 0;
    for (i, p) in group.iter().enumerate().skip(1) {
        if p.distance > group[best].distance {
            best = i;
        }
    }
    best
}
