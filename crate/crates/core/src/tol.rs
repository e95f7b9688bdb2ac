//! Numerical tolerances shared by every pipeline.

use serde::{Deserialize, Serialize};

/// Tolerance set. Every field can be overridden from a JSON file; missing
/// fields fall back to the defaults below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Relative threshold below which a coefficient counts as zero.
    pub coeff: f64,
    /// Relative backward-error bound accepted for a polynomial root.
    pub residual: f64,
    /// Roots closer than this (scaled by `max(1, |r|)`) are merged.
    pub cluster: f64,
    /// Allowed deviation of `|B(ζ)|` from 1 on the circle.
    pub unimod: f64,
    /// Minimum clearance between poles and the closed unit disk.
    pub polegap: f64,
    /// Relative on-curve margin; the absolute margin is `margin * (1 + sup|φ|)`.
    pub margin: f64,
    /// Distance from the unit circle accepted as "on the circle".
    pub circle: f64,
    /// Residual accepted along a tracked local inverse.
    pub track: f64,
    /// `|φ'|` below this counts as a critical point.
    pub crit: f64,
    /// Relative composition residual for decompositions.
    pub decomp: f64,
    /// Maximum order of a compiled symbol.
    pub degree_cap: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            coeff: 1e-12,
            residual: 1e-10,
            cluster: 1e-7,
            unimod: 1e-9,
            polegap: 1e-8,
            margin: 1e-6,
            circle: 1e-7,
            track: 1e-8,
            crit: 1e-9,
            decomp: 1e-7,
            degree_cap: 64,
        }
    }
}
