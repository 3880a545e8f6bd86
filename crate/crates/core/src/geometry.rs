//! Planar geometry: points, the rectangular observation region and the
//! uniform linear antenna array.

use serde::{Deserialize, Serialize};

use crate::{CoreError, Result, WaveformConfig};

/// A 2-D position in meters, `[x, y]`.
pub type Point2 = [f64; 2];

/// Euclidean distance between two points.
pub fn distance(a: Point2, b: Point2) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Axis-aligned rectangle bounding the observed area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Region {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let r = Region {
            x_min,
            x_max,
            y_min,
            y_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let vals = [self.x_min, self.x_max, self.y_min, self.y_max];
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::InvalidArgument("region bounds must be finite".into()));
        }
        if self.x_min >= self.x_max || self.y_min >= self.y_max {
            return Err(CoreError::InvalidArgument("region must have positive extent".into()));
        }
        Ok(())
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: Point2) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }

    /// Clamps a point onto the rectangle.
    pub fn clamp(&self, p: Point2) -> Point2 {
        [
            p[0].clamp(self.x_min, self.x_max),
            p[1].clamp(self.y_min, self.y_max),
        ]
    }

    /// Shrinks the rectangle by `margin` on every side.
    pub fn shrunk(&self, margin: f64) -> Result<Self> {
        Region::new(
            self.x_min + margin,
            self.x_max - margin,
            self.y_min + margin,
            self.y_max - margin,
        )
    }
}

/// Transceiver array: every element both transmits and receives, so an
/// M-element array yields an M×M CSI matrix per subcarrier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AntennaArray {
    /// Element phase centers in meters. Built-in constructors lay the array
    /// on the x axis, centered on the origin, looking toward +y.
    pub positions: Vec<Point2>,
}

impl AntennaArray {
    /// Uniform linear array along x, centered on the origin.
    pub fn ula(elements: usize, spacing_m: f64) -> Result<Self> {
        if elements == 0 {
            return Err(CoreError::InvalidArgument("array needs at least one element".into()));
        }
        if !(spacing_m.is_finite() && spacing_m > 0.0) && elements > 1 {
            return Err(CoreError::InvalidArgument("element spacing must be positive".into()));
        }
        let mid = (elements as f64 - 1.0) / 2.0;
        let positions = (0..elements)
            .map(|i| [(i as f64 - mid) * spacing_m, 0.0])
            .collect();
        Ok(AntennaArray { positions })
    }

    /// ULA pitched at half the shortest wavelength of `wf`, which keeps the
    /// whole ±90° field of view free of grating lobes.
    pub fn for_waveform(wf: &WaveformConfig, elements: usize) -> Result<Self> {
        AntennaArray::ula(elements, wf.min_wavelength_m() / 2.0)
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(CoreError::InvalidArgument("array needs at least one element".into()));
        }
        if self
            .positions
            .iter()
            .any(|p| !(p[0].is_finite() && p[1].is_finite()))
        {
            return Err(CoreError::InvalidArgument("element positions must be finite".into()));
        }
        Ok(())
    }

    /// Scalar element coordinates along the array axis, in element order.
    /// Fails unless the elements are collinear and uniformly spaced, which is
    /// what the virtual-aperture construction requires.
    pub fn axis_coordinates(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.positions.len();
        if n == 1 {
            return Ok(vec![0.0]);
        }
        let p0 = self.positions[0];
        let dir = [
            self.positions[n - 1][0] - p0[0],
            self.positions[n - 1][1] - p0[1],
        ];
        let norm = dir[0].hypot(dir[1]);
        if norm == 0.0 {
            return Err(CoreError::InvalidArgument("array elements coincide".into()));
        }
        let u = [dir[0] / norm, dir[1] / norm];
        let mut coords = Vec::with_capacity(n);
        for p in &self.positions {
            let d = [p[0] - p0[0], p[1] - p0[1]];
            let cross = d[0] * u[1] - d[1] * u[0];
            if cross.abs() > 1e-9 {
                return Err(CoreError::InvalidArgument(
                    "array elements are not collinear".into(),
                ));
            }
            coords.push(d[0] * u[0] + d[1] * u[1]);
        }
        let step = coords[1] - coords[0];
        if step <= 0.0 {
            return Err(CoreError::InvalidArgument(
                "array elements must be laid out in axis order".into(),
            ));
        }
        for pair in coords.windows(2) {
            if ((pair[1] - pair[0]) - step).abs() > 1e-9 {
                return Err(CoreError::InvalidArgument(
                    "array elements are not uniformly spaced".into(),
                ));
            }
        }
        Ok(coords)
    }

    /// Uniform element pitch; zero for a single-element array.
    pub fn spacing_m(&self) -> Result<f64> {
        let coords = self.axis_coordinates()?;
        Ok(if coords.len() < 2 { 0.0 } else { coords[1] - coords[0] })
    }
}
