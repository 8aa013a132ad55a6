//! The discrete angular torus: `2n` equispaced directions `phi_k = k*pi/n`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Equispaced grid on the circle with `2n` points and `n` odd.
///
/// Odd `n` guarantees that no two grid directions are exactly a right angle
/// apart, so every colliding pair is unambiguously either aligning or
/// reversing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridSpec", into = "GridSpec")]
pub struct AngularGrid {
    n: usize,
    dphi: f64,
    angles: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GridSpec {
    n: usize,
}

impl TryFrom<GridSpec> for AngularGrid {
    type Error = Error;

    fn try_from(spec: GridSpec) -> Result<Self> {
        AngularGrid::new(spec.n)
    }
}

impl From<AngularGrid> for GridSpec {
    fn from(grid: AngularGrid) -> Self {
        GridSpec { n: grid.n }
    }
}

impl AngularGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::InvalidResolution(n));
        }
        let dphi = PI / n as f64;
        let angles = (0..2 * n).map(|k| k as f64 * dphi).collect();
        Ok(Self { n, dphi, angles })
    }

    /// Half-resolution `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_points(&self) -> usize {
        2 * self.n
    }

    pub fn dphi(&self) -> f64 {
        self.dphi
    }

    pub fn angle(&self, k: usize) -> f64 {
        self.angles[k]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Canonical representative of `k` in `0..2n`.
    #[inline]
    pub fn wrap(&self, k: isize) -> usize {
        k.rem_euclid(2 * self.n as isize) as usize
    }

    /// Index of the direction opposite to `k`.
    #[inline]
    pub fn opposite(&self, k: usize) -> usize {
        (k + self.n) % (2 * self.n)
    }

    /// The `d` in `(-n, n]` with `l = k + d (mod 2n)`.
    #[inline]
    pub fn signed_distance(&self, k: usize, l: usize) -> isize {
        let m = 2 * self.n as isize;
        let d = (l as isize - k as isize).rem_euclid(m);
        if d > self.n as isize {
            d - m
        } else {
            d
        }
    }

    /// Largest alignment half-distance `J`: the biggest integer strictly below
    /// `n/4`. Aligning pairs sit at index distance `2j` with `1 <= j <= J`.
    pub fn alignment_reach(&self) -> usize {
        (self.n - 1) / 4
    }

    /// Smallest index distance whose angle exceeds `pi/2`.
    pub fn reversal_threshold(&self) -> usize {
        self.n.div_ceil(2)
    }

    /// Quadrature mass `dphi * sum f_k`.
    pub fn mass(&self, f: &[f64]) -> f64 {
        self.dphi * f.iter().sum::<f64>()
    }

    /// Cyclic index shift: `out[k] = f[k - m]`.
    pub fn rotate(&self, f: &[f64], m: isize) -> Vec<f64> {
        (0..f.len())
            .map(|k| f[self.wrap(k as isize - m)])
            .collect()
    }

    /// Index reflection `k -> -k`.
    pub fn reflect(&self, f: &[f64]) -> Vec<f64> {
        (0..f.len()).map(|k| f[self.wrap(-(k as isize))]).collect()
    }
}
