//! Vector spherical-harmonic mode labels.
//!
//! On a radially stratified ball the time-harmonic Maxwell pair system
//! decouples over vector spherical harmonics into scalar radial problems
//! labelled by the angular degree `l >= 1` and a polarization:
//!
//! * `TE` — the field is a purely tangential, divergence-free harmonic times
//!   a radial profile,
//! * `TM` — the field has radial and gradient-type tangential components.
//!
//! The degree `l = 0` carries no transverse Maxwell field and is excluded.

use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Polarization of a vector spherical-harmonic mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    /// Tangential curl-type field (one scalar radial unknown).
    TE,
    /// Radial plus gradient-type tangential field (two coupled radial
    /// unknowns).
    TM,
}

impl fmt::Display for Polarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Polarization::TE => write!(f, "TE"),
            Polarization::TM => write!(f, "TM"),
        }
    }
}

/// A single radial mode: angular degree and polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    l: u32,
    polarization: Polarization,
}

impl ModeIndex {
    /// New mode label; requires `l >= 1`.
    pub fn new(l: u32, polarization: Polarization) -> Result<Self> {
        if l == 0 {
            return Err(Error::validation(
                "angular degree l must be at least 1; l = 0 carries no \
                 transverse Maxwell field",
            ));
        }
        Ok(Self { l, polarization })
    }

    /// Angular degree.
    pub fn l(&self) -> u32 {
        self.l
    }

    /// Polarization.
    pub fn polarization(&self) -> Polarization {
        self.polarization
    }

    /// The angular eigenvalue `l (l + 1)` as a float.
    pub fn ll1(&self) -> f64 {
        let l = self.l as f64;
        l * (l + 1.0)
    }

    /// Number of azimuthal copies of this radial mode (degeneracy `2l + 1`).
    pub fn azimuthal_multiplicity(&self) -> u32 {
        2 * self.l + 1
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-l{}", self.polarization, self.l)
    }
}
