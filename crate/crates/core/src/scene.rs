//! Scene description: what the channel simulator illuminates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{AntennaArray, CoreError, Point2, Region, Result};

/// A point scatterer: position plus complex reflectivity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scatterer {
    pub position: Point2,
    pub reflectivity: Complex64,
}

impl Scatterer {
    pub fn new(position: Point2, reflectivity: Complex64) -> Self {
        Scatterer {
            position,
            reflectivity,
        }
    }

    /// A unit-reflectivity scatterer, the default model for a person.
    pub fn unit(position: Point2) -> Self {
        Scatterer::new(position, Complex64::new(1.0, 0.0))
    }
}

/// Everything the channel model needs about the environment: the observation
/// region, the transceiver array, the static furniture/wall returns and the
/// moving targets of the current instant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub region: Region,
    pub array: AntennaArray,
    pub static_scatterers: Vec<Scatterer>,
    pub targets: Vec<Scatterer>,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        self.region.validate()?;
        self.array.validate()?;
        for s in self.static_scatterers.iter().chain(self.targets.iter()) {
            if !(s.position[0].is_finite()
                && s.position[1].is_finite()
                && s.reflectivity.re.is_finite()
                && s.reflectivity.im.is_finite())
            {
                return Err(CoreError::InvalidArgument(
                    "scatterer position/reflectivity must be finite".into(),
                ));
            }
            if !self.region.contains(s.position) {
                return Err(CoreError::InvalidArgument(format!(
                    "scatterer at ({}, {}) lies outside the region",
                    s.position[0], s.position[1]
                )));
            }
        }
        Ok(())
    }

    /// Copy of the scene with the moving targets replaced.
    pub fn with_targets(&self, targets: Vec<Scatterer>) -> Scene {
        Scene {
            targets,
            ..self.clone()
        }
    }
}
