//! Linear stability of the uniform state.
//!
//! The linearized generator `mu d^2/dphi^2 + Q_M` commutes with rotations, so
//! Fourier modes are invariant subspaces and each `cos(m phi)`/`sin(m phi)`
//! pair carries one (double) eigenvalue `lambda_m`. Numerically the
//! eigenvalues are read off as Rayleigh quotients on the discrete modes; a
//! dense symmetric eigensolve is kept as a cross-check for small grids.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::collision::{CollisionKernel, CollisionOperator};
use crate::error::{invalid, Error, Result};
use crate::grid::AngularGrid;
use crate::par;

/// Closed-form eigenvalue `lambda_m` of the rod-kernel linearization at the
/// uniform density `f0`.
pub fn lambda_rod(m: usize, mu: f64, f0: f64) -> f64 {
    let mf = m as f64;
    match m {
        0 => 0.0,
        1 => -mu - f0 / 3.0 * (4.0 * 2f64.sqrt() - 1.0),
        2 => -4.0 * mu + 2.0 * f0 / 3.0,
        _ => {
            let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
            -mf * mf * mu
                + 2.0
                    * f0
                    * ((4.0 * mf * (mf * PI / 4.0).sin() - 8.0) / (mf * mf - 4.0)
                        + (mf * (mf * PI / 2.0).sin() + sign) / (mf * mf - 1.0)
                        + sign
                        - 2.0)
        }
    }
}

/// Diffusivity at which `lambda_2` changes sign: `f0 / 6` for rods and
/// `f0 (1 - pi/4)` for the constant kernel.
pub fn critical_mu(kernel: CollisionKernel, mass: f64) -> f64 {
    let f0 = mass / (2.0 * PI);
    match kernel {
        CollisionKernel::Rod => f0 / 6.0,
        CollisionKernel::Maxwell => f0 * (1.0 - PI / 4.0),
    }
}

/// Symbol of the three-point Laplacian on mode `m`: `(2 - 2 cos(m dphi)) / dphi^2`,
/// the discrete counterpart of `m^2`.
pub fn laplacian_symbol(grid: &AngularGrid, m: usize) -> f64 {
    let h = grid.dphi();
    (2.0 - 2.0 * (m as f64 * h).cos()) / (h * h)
}

fn laplacian(grid: &AngularGrid, v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let c = 1.0 / grid.dphi().powi(2);
    (0..m)
        .map(|k| c * (v[(k + 1) % m] - 2.0 * v[k] + v[(k + m - 1) % m]))
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeEigen {
    pub mode: usize,
    /// Closed form, rod kernel only.
    pub lambda_closed: Option<f64>,
    /// Mean of the cosine and sine Rayleigh quotients.
    pub lambda_numeric: f64,
    pub lambda_cos: f64,
    pub lambda_sin: f64,
    /// Collision contribution to `lambda_numeric`.
    pub collision_part: f64,
    /// `-mu (discrete symbol - m^2)`: the diffusion discretization error,
    /// reported apart from the collision discrepancy.
    pub diffusion_error: f64,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    /// `||A v - lambda v|| / (||mu L v|| + ||Q_M v||)`, worst of cos and sin.
    pub invariance_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub kernel: CollisionKernel,
    pub n: usize,
    pub mu: f64,
    pub mass: f64,
    pub modes: Vec<ModeEigen>,
    pub mu_star_closed: f64,
    /// Root of the discrete `lambda_2(mu) = 0`.
    pub mu_star_numeric: f64,
}

struct ModeResponse {
    lambda: f64,
    collision: f64,
    residual: f64,
}

fn mode_response(
    op: &CollisionOperator,
    mu: f64,
    mass: f64,
    v: &[f64],
) -> Result<ModeResponse> {
    let q = op.apply_linearized(mass, v)?;
    let l: Vec<f64> = laplacian(op.grid(), v).into_iter().map(|x| mu * x).collect();
    let av: Vec<f64> = q.iter().zip(&l).map(|(a, b)| a + b).collect();
    let vv = dot(v, v);
    let lambda = dot(v, &av) / vv;
    let collision = dot(v, &q) / vv;
    let off: Vec<f64> = av.iter().zip(v).map(|(a, x)| a - lambda * x).collect();
    let scale = norm(&q) + norm(&l);
    let residual = if scale > 0.0 { norm(&off) / scale } else { 0.0 };
    Ok(ModeResponse {
        lambda,
        collision,
        residual,
    })
}

/// Rayleigh quotient of the linearized collision operator alone on
/// `sin(m phi)`.
pub fn collision_eigenvalue(
    grid: &AngularGrid,
    kernel: CollisionKernel,
    mass: f64,
    m: usize,
) -> Result<f64> {
    let op = CollisionOperator::new(grid.clone(), kernel);
    let v: Vec<f64> = grid.angles().iter().map(|p| (m as f64 * p).sin()).collect();
    Ok(mode_response(&op, 0.0, mass, &v)?.collision)
}

/// Root of the discrete `lambda_2(mu)`, which is affine in `mu`.
pub fn numeric_critical_mu(grid: &AngularGrid, kernel: CollisionKernel, mass: f64) -> Result<f64> {
    Ok(collision_eigenvalue(grid, kernel, mass, 2)? / laplacian_symbol(grid, 2))
}

pub fn numeric_spectrum(
    grid: &AngularGrid,
    kernel: CollisionKernel,
    mu: f64,
    mass: f64,
    modes: &[usize],
) -> Result<SpectrumReport> {
    if !(mass > 0.0) {
        return Err(invalid("mass", "must be positive"));
    }
    if let Some(&m) = modes.iter().find(|&&m| m == 0 || m >= grid.n()) {
        return Err(Error::ModeOutOfRange {
            mode: m,
            limit: grid.n(),
        });
    }
    let op = CollisionOperator::new(grid.clone(), kernel);
    let f0 = mass / (2.0 * PI);
    let rows = par::map_slice(modes, |&m| -> Result<ModeEigen> {
        let mf = m as f64;
        let cos: Vec<f64> = grid.angles().iter().map(|p| (mf * p).cos()).collect();
        let sin: Vec<f64> = grid.angles().iter().map(|p| (mf * p).sin()).collect();
        let c = mode_response(&op, mu, mass, &cos)?;
        let s = mode_response(&op, mu, mass, &sin)?;
        let lambda_numeric = 0.5 * (c.lambda + s.lambda);
        let lambda_closed = (kernel == CollisionKernel::Rod).then(|| lambda_rod(m, mu, f0));
        let abs_err = lambda_closed.map(|l| (lambda_numeric - l).abs());
        let rel_err = lambda_closed
            .zip(abs_err)
            .map(|(l, e)| if l != 0.0 { e / l.abs() } else { f64::INFINITY });
        Ok(ModeEigen {
            mode: m,
            lambda_closed,
            lambda_numeric,
            lambda_cos: c.lambda,
            lambda_sin: s.lambda,
            collision_part: 0.5 * (c.collision + s.collision),
            diffusion_error: -mu * (laplacian_symbol(grid, m) - mf * mf),
            abs_err,
            rel_err,
            invariance_residual: c.residual.max(s.residual),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SpectrumReport {
        kernel,
        n: grid.n(),
        mu,
        mass,
        modes: rows,
        mu_star_closed: critical_mu(kernel, mass),
        mu_star_numeric: numeric_critical_mu(grid, kernel, mass)?,
    })
}

/// Dense matrix of `mu L + Q_M`.
pub fn generator_matrix(
    grid: &AngularGrid,
    kernel: CollisionKernel,
    mu: f64,
    mass: f64,
) -> Result<DMatrix<f64>> {
    let op = CollisionOperator::new(grid.clone(), kernel);
    let mut a = op.linearized_matrix(mass)?;
    let size = grid.num_points();
    let c = mu / grid.dphi().powi(2);
    for k in 0..size {
        a[(k, k)] -= 2.0 * c;
        a[(k, (k + 1) % size)] += c;
        a[(k, (k + size - 1) % size)] += c;
    }
    Ok(a)
}

/// All eigenvalues of `mu L + Q_M`, ascending, by dense symmetric
/// eigensolve. Intended for small grids.
pub fn dense_eigenvalues(
    grid: &AngularGrid,
    kernel: CollisionKernel,
    mu: f64,
    mass: f64,
) -> Result<Vec<f64>> {
    let a = generator_matrix(grid, kernel, mu, mass)?;
    let sym = 0.5 * (&a + a.transpose());
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const F0: f64 = 1.0 / (2.0 * PI);

    #[test]
    fn closed_form_values() {
        assert!(lambda_rod(2, F0 / 6.0, F0).abs() < 1e-16);
        // -88/15 f0 at the critical point
        assert_relative_eq!(lambda_rod(4, F0 / 6.0, F0), -88.0 / 15.0 * F0, max_relative = 1e-13);
        assert_relative_eq!(lambda_rod(4, F0 / 6.0, F0), -0.933_70, max_relative = 1e-4);
        assert_relative_eq!(lambda_rod(1, 0.0, F0), -0.247_04, max_relative = 1e-4);
    }

    #[test]
    fn closed_form_sign_structure() {
        for i in 1..=40 {
            let mu = 0.002 * i as f64;
            for m in (1..=12).filter(|&m| m != 2) {
                assert!(lambda_rod(m, mu, F0) < 0.0, "m={m} mu={mu}");
            }
            assert!(lambda_rod(2, mu, F0) > lambda_rod(2, mu + 0.001, F0));
            assert!(lambda_rod(2, mu, 1.1 * F0) > lambda_rod(2, mu, F0));
        }
    }

    #[test]
    fn critical_values() {
        assert_relative_eq!(critical_mu(CollisionKernel::Rod, 1.0), 1.0 / (12.0 * PI));
        assert_relative_eq!(critical_mu(CollisionKernel::Rod, 1.0), 0.0265, max_relative = 2e-3);
        assert_relative_eq!(critical_mu(CollisionKernel::Maxwell, 1.0), 0.034_16, max_relative = 1e-3);
        assert_relative_eq!(
            critical_mu(CollisionKernel::Rod, 2.0),
            2.0 * critical_mu(CollisionKernel::Rod, 1.0)
        );
    }

    #[test]
    fn rayleigh_quotients_are_double_and_exact_subspaces() {
        let g = AngularGrid::new(51).unwrap();
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let r = numeric_spectrum(&g, kernel, 0.02, 1.0, &[1, 2, 3, 4, 5, 6, 11]).unwrap();
            for m in &r.modes {
                assert!((m.lambda_cos - m.lambda_sin).abs() < 1e-10, "{m:?}");
                assert!(m.invariance_residual < 1e-10, "{m:?}");
            }
        }
    }

    #[test]
    fn lambda2_near_threshold() {
        let g = AngularGrid::new(51).unwrap();
        let mu_star = critical_mu(CollisionKernel::Rod, 1.0);
        let r = numeric_spectrum(&g, CollisionKernel::Rod, mu_star, 1.0, &[2]).unwrap();
        assert!(r.modes[0].lambda_numeric.abs() <= 0.02 * F0);
        let r = numeric_spectrum(&g, CollisionKernel::Rod, 0.02, 1.0, &[2]).unwrap();
        let expected = 2.0 * F0 / 3.0 - 0.08;
        assert!(r.modes[0].lambda_numeric > 0.0);
        assert!((r.modes[0].lambda_numeric - expected).abs() <= 0.05 * expected);
    }

    #[test]
    fn dense_eigensolve_agrees_with_mode_quotients() {
        let g = AngularGrid::new(9).unwrap();
        for kernel in [CollisionKernel::Rod, CollisionKernel::Maxwell] {
            let dense = dense_eigenvalues(&g, kernel, 0.03, 1.0).unwrap();
            let modes: Vec<usize> = (1..9).collect();
            let r = numeric_spectrum(&g, kernel, 0.03, 1.0, &modes).unwrap();
            let mut expected = vec![0.0];
            for m in &r.modes {
                expected.push(m.lambda_numeric);
                expected.push(m.lambda_numeric);
            }
            // mode n: the alternating vector, a single eigenvalue
            let alt: Vec<f64> = (0..18).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
            let op = CollisionOperator::new(g.clone(), kernel);
            let res = mode_response(&op, 0.03, 1.0, &alt).unwrap();
            expected.push(res.lambda);
            expected.sort_by(f64::total_cmp);
            assert_eq!(dense.len(), expected.len());
            for (a, b) in dense.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn aliasing_is_rejected() {
        let g = AngularGrid::new(11).unwrap();
        assert!(matches!(
            numeric_spectrum(&g, CollisionKernel::Rod, 0.02, 1.0, &[11]),
            Err(Error::ModeOutOfRange { mode: 11, .. })
        ));
    }

    #[test]
    fn maxwell_root_near_closed_form() {
        let g = AngularGrid::new(51).unwrap();
        let root = numeric_critical_mu(&g, CollisionKernel::Maxwell, 1.0).unwrap();
        assert_relative_eq!(root, critical_mu(CollisionKernel::Maxwell, 1.0), max_relative = 0.01);
    }
}
