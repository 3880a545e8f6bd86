//! Virtual aperture synthesis for a co-located transceiver array.

use ndarray::{Array2, Array3};
use num_complex::Complex64;

use csiloc_core::AntennaArray;

use crate::{RadarError, Result};

/// The virtual aperture spanned by an M-element transceiver array.
///
/// Each (tx, rx) pair acts like a monostatic element at the pair midpoint,
/// so an M-element uniform line yields `2M - 1` distinct phase centers at
/// half the physical pitch. Pairs sharing a midpoint are folded together.
#[derive(Debug, Clone, PartialEq)]
pub struct VirtualArray {
    /// Phase-center coordinates along the array axis, ascending.
    pub positions: Vec<f64>,
    /// Pitch between consecutive phase centers (half the element pitch).
    pub spacing_m: f64,
    /// For each phase center, the (tx, rx) index pairs that map onto it.
    pub groups: Vec<Vec<(usize, usize)>>,
}

impl VirtualArray {
    /// Derives the virtual aperture of `array`, which must be uniform and
    /// linear.
    pub fn new(array: &AntennaArray) -> Result<Self> {
        let mut coords = array.axis_coordinates()?;
        // Rebase onto the aperture center so the phase reference sits in the
        // middle of the array no matter where element 0 is.
        let mean = coords.iter().sum::<f64>() / coords.len() as f64;
        coords.iter_mut().for_each(|c| *c -= mean);
        let m = coords.len();
        if m < 2 {
            return Err(RadarError::InvalidParams(
                "virtual aperture needs at least two elements".into(),
            ));
        }
        let pitch = coords[1] - coords[0];
        let spacing_m = pitch / 2.0;
        let v = 2 * m - 1;
        let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::new(); v];
        for i in 0..m {
            for j in 0..m {
                groups[i + j].push((i, j));
            }
        }
        // Midpoint of the first pair in each group; all pairs of a group
        // share it by construction.
        let positions = groups
            .iter()
            .enumerate()
            .map(|(s, g)| {
                let (i, j) = g[0];
                debug_assert_eq!(i + j, s);
                (coords[i] + coords[j]) / 2.0
            })
            .collect();
        Ok(VirtualArray {
            positions,
            spacing_m,
            groups,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Number of element pairs folded into each phase center.
    pub fn multiplicities(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }
}

/// Collapses a CSI tensor `(m, m, n_c)` onto the virtual aperture, returning
/// a `(v, n_c)` matrix. Pairs sharing a phase center are averaged coherently,
/// which keeps signal phase and suppresses uncorrelated noise.
pub fn collapse_to_virtual(
    csi: &Array3<Complex64>,
    va: &VirtualArray,
) -> Result<Array2<Complex64>> {
    let m = va.len().div_ceil(2);
    let shape = csi.shape();
    if shape[0] != m || shape[1] != m {
        return Err(RadarError::ShapeMismatch(format!(
            "tensor is {shape:?}, virtual aperture expects ({m}, {m}, _)"
        )));
    }
    let n_c = shape[2];
    let mut out = Array2::from_elem((va.len(), n_c), Complex64::new(0.0, 0.0));
    for (s, group) in va.groups.iter().enumerate() {
        let scale = 1.0 / group.len() as f64;
        for &(i, j) in group {
            for k in 0..n_c {
                out[(s, k)] += csi[(i, j, k)];
            }
        }
        for k in 0..n_c {
            out[(s, k)] *= scale;
        }
    }
    Ok(out)
}
