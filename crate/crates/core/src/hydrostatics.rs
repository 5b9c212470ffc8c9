//! Buoyancy and payload arithmetic for fully submerged bodies.
//!
//! Default density is seawater, 1025 kg/m^3. With it the UAV shell's
//! 0.004006 m^3 supports 4.106 kg; freshwater would give only 4.006 kg.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const SEAWATER_DENSITY: f64 = 1025.0;

/// UAV shell displaced volume, m^3.
pub const UAV_SHELL_VOLUME: f64 = 0.004006;

/// Bare hull mass, kg.
pub const HULL_DRY_MASS: f64 = 8.1;

/// Hull displaced volume back-solved from a 32.5 kg payload rating:
/// (32.5 + 8.1) / 1025.
pub const HULL_VOLUME: f64 = 0.03961;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum HydroError {
    #[error("displaced volume must be non-negative, got {0} m^3")]
    NegativeVolume(f64),
    #[error("dry mass must be non-negative, got {0} kg")]
    NegativeMass(f64),
    #[error("water density must be positive, got {0} kg/m^3")]
    NonPositiveDensity(f64),
    #[error("payload must be non-negative, got {0} kg")]
    NegativePayload(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatBody {
    displaced_volume: f64,
    dry_mass: f64,
    water_density: f64,
}

impl FloatBody {
    pub fn new(
        displaced_volume: f64,
        dry_mass: f64,
        water_density: f64,
    ) -> Result<Self, HydroError> {
        if displaced_volume < 0.0 {
            return Err(HydroError::NegativeVolume(displaced_volume));
        }
        if dry_mass < 0.0 {
            return Err(HydroError::NegativeMass(dry_mass));
        }
        if water_density <= 0.0 {
            return Err(HydroError::NonPositiveDensity(water_density));
        }
        Ok(Self {
            displaced_volume,
            dry_mass,
            water_density,
        })
    }

    pub fn seawater(displaced_volume: f64, dry_mass: f64) -> Result<Self, HydroError> {
        Self::new(displaced_volume, dry_mass, SEAWATER_DENSITY)
    }

    pub fn displaced_volume(&self) -> f64 {
        self.displaced_volume
    }

    pub fn dry_mass(&self) -> f64 {
        self.dry_mass
    }

    pub fn water_density(&self) -> f64 {
        self.water_density
    }
}

/// Total mass supported at full submersion.
pub fn buoyant_mass_capacity(volume: f64, density: f64) -> Result<f64, HydroError> {
    if volume < 0.0 {
        return Err(HydroError::NegativeVolume(volume));
    }
    if density <= 0.0 {
        return Err(HydroError::NonPositiveDensity(density));
    }
    Ok(density * volume)
}

pub fn payload_capacity(body: &FloatBody) -> f64 {
    (body.water_density * body.displaced_volume - body.dry_mass).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloatCheck {
    pub floats: bool,
    /// Capacity left after the payload; negative when the body sinks.
    pub margin: f64,
}

pub fn float_check(body: &FloatBody, payload: f64) -> Result<FloatCheck, HydroError> {
    if payload < 0.0 {
        return Err(HydroError::NegativePayload(payload));
    }
    let capacity = payload_capacity(body);
    Ok(FloatCheck {
        floats: payload <= capacity,
        margin: capacity - payload,
    })
}
