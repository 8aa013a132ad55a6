//! Discrete alignment/reversal collision operator on the angular grid.
//!
//! For an output direction `k` the operator reads, with `J` the alignment
//! reach and `R(k)` the directions more than a right angle away from `k`,
//!
//! ```text
//! Q(g,h)_k = 2 dphi sum_{0<|j|<=J} b(2j dphi) g[k-j] h[k+j]
//!          +   dphi sum_{l in R(k)} b(|k-l| dphi) g[k+n] h[l+n]
//!          - 2 dphi sum_{i=1..J}    b(2i dphi) g[k] (h[k+2i] + h[k-2i])
//!          -   dphi sum_{l in R(k)} b(|k-l| dphi) g[k] h[l]
//! ```
//!
//! An aligning pair `(k-j, k+j)` lands exactly on its midpoint `k`, so only
//! partners at even index distance can align. The alignment loss therefore
//! runs over even distances with the doubled weight `2 dphi`, which makes the
//! gain and loss totals equal term by term. The reversal gain is an index
//! shift of the reversal loss. Mass is conserved as an algebraic identity.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AngularGrid;
use crate::par;

/// Nodal values `f_k` of an angular density; the quadrature weight is `dphi`.
pub type AngularDensity = Vec<f64>;

/// Collision cross-section `b`, a function of the angle between the partners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CollisionKernel {
    /// Rod-shaped cells: `b = |sin(phi - phi_*)|`.
    Rod,
    /// Constant rate `b = 1`.
    Maxwell,
}

impl CollisionKernel {
    pub fn value(self, angle: f64) -> f64 {
        match self {
            CollisionKernel::Rod => angle.sin().abs(),
            CollisionKernel::Maxwell => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CollisionKernel::Rod => "rod",
            CollisionKernel::Maxwell => "maxwell",
        }
    }
}

impl std::str::FromStr for CollisionKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rod" => Ok(CollisionKernel::Rod),
            "maxwell" | "maxwellian" => Ok(CollisionKernel::Maxwell),
            other => Err(crate::error::invalid(
                "kernel",
                format!("unknown kernel `{other}` (expected rod or maxwell)"),
            )),
        }
    }
}

/// Kernel value for an index distance `d` with `|d| <= n`.
///
/// The rod kernel uses `sin(min(|d|, n-|d|) dphi)` so that `b(0)` and `b(pi)`
/// are exactly zero and `b(d) = b(n-d)` holds bitwise.
pub fn kernel_eval(kernel: CollisionKernel, d: isize, grid: &AngularGrid) -> f64 {
    let n = grid.n();
    let a = d.unsigned_abs();
    debug_assert!(a <= n);
    match kernel {
        CollisionKernel::Rod => (a.min(n - a) as f64 * grid.dphi()).sin(),
        CollisionKernel::Maxwell => 1.0,
    }
}

/// Collision operator bound to a grid and kernel, with the kernel tabulated
/// per index distance.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    grid: AngularGrid,
    kernel: CollisionKernel,
    table: Vec<f64>,
}

impl CollisionOperator {
    pub fn new(grid: AngularGrid, kernel: CollisionKernel) -> Self {
        let table = (0..=grid.n() as isize)
            .map(|d| kernel_eval(kernel, d, &grid))
            .collect();
        Self {
            grid,
            kernel,
            table,
        }
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn kernel(&self) -> CollisionKernel {
        self.kernel
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        let expected = self.grid.num_points();
        if f.len() != expected {
            return Err(Error::GridMismatch {
                expected,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// `Q(g,h)_k` for a single output index. Lengths are not checked.
    #[inline]
    pub fn output(&self, k: usize, g: &[f64], h: &[f64]) -> f64 {
        let n = self.grid.n();
        let m = 2 * n;
        let dphi = self.grid.dphi();
        let at = |i: usize| i % m;

        let mut gain = 0.0;
        let mut loss = 0.0;
        for j in 1..=self.grid.alignment_reach() {
            let b = self.table[2 * j];
            let (lo, hi) = (at(k + m - j), at(k + j));
            gain += b * (g[lo] * h[hi] + g[hi] * h[lo]);
            loss += b * (h[at(k + 2 * j)] + h[at(k + m - 2 * j)]);
        }
        let alignment = 2.0 * dphi * (gain - g[k] * loss);

        let gk = g[k];
        let go = g[at(k + n)];
        let mut reversal = 0.0;
        for d in self.grid.reversal_threshold()..=n {
            let b = self.table[d];
            let l = at(k + d);
            reversal += b * (go * h[at(l + n)] - gk * h[l]);
            if d < n {
                let l = at(k + m - d);
                reversal += b * (go * h[at(l + n)] - gk * h[l]);
            }
        }
        alignment + dphi * reversal
    }

    /// Writes `Q(g,h)` into `out`.
    pub fn bilinear_into(&self, g: &[f64], h: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(g)?;
        self.check(h)?;
        self.check(out)?;
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.output(k, g, h);
        }
        Ok(())
    }

    pub fn bilinear(&self, g: &[f64], h: &[f64]) -> Result<AngularDensity> {
        let mut out = vec![0.0; self.grid.num_points()];
        self.bilinear_into(g, h, &mut out)?;
        Ok(out)
    }

    /// Writes `Q(f,f)` into `out`.
    pub fn collide_into(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        self.bilinear_into(f, f, out)
    }

    pub fn collide(&self, f: &[f64]) -> Result<AngularDensity> {
        self.bilinear(f, f)
    }

    /// Linearization around the uniform density of mass `mass`:
    /// `Q(f0, v) + Q(v, f0)`.
    pub fn apply_linearized(&self, mass: f64, v: &[f64]) -> Result<AngularDensity> {
        self.check(v)?;
        let f0 = vec![mass / (2.0 * PI); self.grid.num_points()];
        Ok((0..v.len())
            .map(|k| self.output(k, &f0, v) + self.output(k, v, &f0))
            .collect())
    }

    /// Dense matrix of [`Self::apply_linearized`], assembled column by column
    /// from basis vectors.
    pub fn linearized_matrix(&self, mass: f64) -> Result<DMatrix<f64>> {
        if !(mass > 0.0) {
            return Err(crate::error::invalid("mass", "must be positive"));
        }
        let size = self.grid.num_points();
        let columns = par::map_range(size, |c| {
            let mut e = vec![0.0; size];
            e[c] = 1.0;
            self.apply_linearized(mass, &e)
                .expect("basis vector matches the grid")
        });
        Ok(DMatrix::from_fn(size, size, |r, c| columns[c][r]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
        (0..len).map(|_| rng.random::<f64>()).collect()
    }

    #[test]
    fn kernel_values() {
        let g = AngularGrid::new(51).unwrap();
        assert_eq!(CollisionKernel::Rod.value(PI / 2.0), 1.0);
        assert_eq!(kernel_eval(CollisionKernel::Rod, 0, &g), 0.0);
        assert_eq!(kernel_eval(CollisionKernel::Rod, 51, &g), 0.0);
        assert_eq!(kernel_eval(CollisionKernel::Maxwell, 17, &g), 1.0);
        assert_eq!(kernel_eval(CollisionKernel::Maxwell, -51, &g), 1.0);
        for d in 0..=51 {
            let b = kernel_eval(CollisionKernel::Rod, d, &g);
            assert!((0.0..=1.0).contains(&b));
            assert_eq!(b, kernel_eval(CollisionKernel::Rod, -d, &g));
            assert!((b - (d as f64 * g.dphi()).sin().abs()).abs() < 1e-15);
        }
    }

    #[test]
    fn uniform_is_stationary() {
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let op = CollisionOperator::new(AngularGrid::new(51).unwrap(), kernel);
            let f0 = 1.0 / (2.0 * PI);
            let q = op.collide(&vec![f0; 102]).unwrap();
            assert!(q.iter().all(|v| v.abs() <= 1e-13 * f0 * f0));
        }
    }

    #[test]
    fn opposite_point_masses_are_stationary() {
        let g = AngularGrid::new(25).unwrap();
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let op = CollisionOperator::new(g.clone(), kernel);
            for k0 in [0, 7, 31] {
                let mut f = vec![0.0; 50];
                f[k0] = 3.7;
                f[g.opposite(k0)] = 0.4;
                let q = op.collide(&f).unwrap();
                assert!(q.iter().all(|&v| v == 0.0), "{kernel:?} {k0}: {q:?}");
            }
        }
    }

    #[test]
    fn conserves_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [5, 25, 51] {
            let grid = AngularGrid::new(n).unwrap();
            for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
                let op = CollisionOperator::new(grid.clone(), kernel);
                for _ in 0..20 {
                    let g = random_state(&mut rng, 2 * n);
                    let h = random_state(&mut rng, 2 * n);
                    let q = op.bilinear(&g, &h).unwrap();
                    let scale = grid.mass(&g) * grid.mass(&h);
                    assert!(grid.mass(&q).abs() <= 1e-13 * scale);
                }
            }
        }
    }

    #[test]
    fn shift_and_reflection_equivariance() {
        let grid = AngularGrid::new(25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_state(&mut rng, 50);
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let op = CollisionOperator::new(grid.clone(), kernel);
            let q = op.collide(&f).unwrap();
            for m in 0..50 {
                let lhs = op.collide(&grid.rotate(&f, m)).unwrap();
                assert_eq!(lhs, grid.rotate(&q, m));
            }
            let lhs = op.collide(&grid.reflect(&f)).unwrap();
            let rhs = grid.reflect(&q);
            for (a, b) in lhs.iter().zip(&rhs) {
                assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn pi_shift_symmetry_is_preserved() {
        let grid = AngularGrid::new(25).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let half = random_state(&mut rng, 25);
        let f: Vec<f64> = (0..50).map(|k| half[k % 25]).collect();
        let op = CollisionOperator::new(grid, CollisionKernel::Rod);
        let q = op.collide(&f).unwrap();
        for k in 0..25 {
            assert!((q[k] - q[k + 25]).abs() < 1e-15);
        }
    }

    #[test]
    fn linearized_matrix_properties() {
        let grid = AngularGrid::new(11).unwrap();
        let dphi = grid.dphi();
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let op = CollisionOperator::new(grid.clone(), kernel);
            let a = op.linearized_matrix(1.0).unwrap();
            let ones = nalgebra::DVector::from_element(22, 1.0);
            assert!((&a * ones).amax() < 1e-12);
            for c in 0..22 {
                assert!((dphi * a.column(c).sum()).abs() < 1e-12);
            }
            // circulant: A[r][c] depends on r - c only
            for r in 0..22 {
                for c in 0..22 {
                    assert_eq!(a[(r, c)], a[((r + 1) % 22, (c + 1) % 22)]);
                }
            }
            assert!((&a - a.transpose()).amax() < 1e-14);
        }
        assert!(CollisionOperator::new(grid, CollisionKernel::Rod)
            .linearized_matrix(0.0)
            .is_err());
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let op = CollisionOperator::new(AngularGrid::new(5).unwrap(), CollisionKernel::Rod);
        assert!(matches!(
            op.collide(&[1.0; 9]),
            Err(Error::GridMismatch {
                expected: 10,
                found: 9
            })
        ));
    }
}
