//! Peak profile of the small-diffusivity limit with the constant kernel.
//!
//! Zooming into one peak with `phi = sqrt(2 mu / M) xi` and
//! `f = (M/2) sqrt(M / 2mu) F` leads, as `mu -> 0`, to
//!
//! ```text
//! F'' + 2 (F * F)(2 xi) - F = 0,     int F = 1,
//! ```
//!
//! or `F = S(F)` with `S(F)(xi) = int e^{-|xi - s|} (F * F)(2 s) ds`. `S` maps
//! even probability densities with second moment 4 into themselves and
//! satisfies `sup S(F) <= 1/2`. The fixed point is found by damped Picard
//! iteration on a truncated line.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bifurcation::{equilibrate, Equilibrium};
use crate::collision::CollisionKernel;
use crate::error::{invalid, Error, Result};
use crate::grid::AngularGrid;
use crate::homogeneous::{half_interval_masses, make_initial, InitialCondition, SimConfig};
use crate::par;

/// Equispaced nodes `xi_i = -R + i dxi`, `i = 0..N`, with `N` odd so that
/// `xi = 0` is a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineGrid {
    radius: f64,
    len: usize,
    dxi: f64,
}

impl LineGrid {
    pub fn new(radius: f64, len: usize) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(invalid("R", "truncation radius must be positive"));
        }
        if len < 3 || len.is_multiple_of(2) {
            return Err(invalid("N", format!("node count {len} must be odd and at least 3")));
        }
        Ok(Self {
            radius,
            len,
            dxi: 2.0 * radius / (len - 1) as f64,
        })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn dxi(&self) -> f64 {
        self.dxi
    }

    pub fn node(&self, i: usize) -> f64 {
        // centred index keeps the nodes exactly antisymmetric
        (i as f64 - (self.len / 2) as f64) * self.dxi
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        if i == 0 || i + 1 == self.len {
            0.5 * self.dxi
        } else {
            self.dxi
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values
            .iter()
            .enumerate()
            .map(|(i, v)| self.weight(i) * v)
            .sum()
    }
}

impl Default for LineGrid {
    fn default() -> Self {
        Self::new(16.0, 1601).expect("valid defaults")
    }
}

/// Nodal values of a candidate profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: LineGrid,
    pub values: Vec<f64>,
}

/// `(mass, mean, variance)` by trapezoid quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mass: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Profile {
    pub fn new(grid: LineGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("profile", "value count does not match the line grid"));
        }
        Ok(Self { grid, values })
    }

    pub fn moments(&self) -> Moments {
        let g = &self.grid;
        let mass = g.integrate(&self.values);
        let first: f64 = (0..g.len()).map(|i| g.weight(i) * g.node(i) * self.values[i]).sum();
        let second: f64 = (0..g.len())
            .map(|i| g.weight(i) * g.node(i).powi(2) * self.values[i])
            .sum();
        let mean = first / mass;
        Moments {
            mass,
            mean,
            variance: second / mass - mean * mean,
        }
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0, |a: f64, &v| a.max(v))
    }

    /// Value at the centre node.
    pub fn center_value(&self) -> f64 {
        self.values[self.grid.len() / 2]
    }

    /// Linear interpolation, zero outside `[-R, R]`.
    pub fn eval(&self, xi: f64) -> f64 {
        let g = &self.grid;
        let s = (xi + g.radius) / g.dxi;
        if !(s >= 0.0) || s > (g.len - 1) as f64 {
            return 0.0;
        }
        let i = (s.floor() as usize).min(g.len - 2);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    /// Largest finite-difference slope.
    pub fn lipschitz(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| (w[1] - w[0]).abs() / self.grid.dxi)
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Profile) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Replaces the values by their mirror average, making the profile
    /// exactly even.
    pub fn symmetrize(&mut self) {
        let n = self.values.len();
        for i in 0..n / 2 {
            let avg = 0.5 * (self.values[i] + self.values[n - 1 - i]);
            self.values[i] = avg;
            self.values[n - 1 - i] = avg;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }
}

/// `exp(-xi^2 / 8) / sqrt(8 pi)`, the variance-4 Gaussian, renormalized to
/// unit trapezoid mass.
pub fn gaussian_seed(grid: &LineGrid) -> Profile {
    let values: Vec<f64> = (0..grid.len())
        .map(|i| (-grid.node(i).powi(2) / 8.0).exp() / (8.0 * PI).sqrt())
        .collect();
    let mut p = Profile {
        grid: grid.clone(),
        values,
    };
    let mass = p.grid.integrate(&p.values);
    p.scale(1.0 / mass);
    p
}

/// `g_i = (F * F)(2 xi_i)` by trapezoid quadrature. Since
/// `2 xi_i - xi_j = xi_{2i-j}`, every evaluation lands on a node.
pub fn doubled_autoconvolution(profile: &Profile) -> Vec<f64> {
    let g = &profile.grid;
    let f = &profile.values;
    let len = g.len();
    let mut out = vec![0.0; len];
    par::fill(&mut out, |i| {
        // 2i - j must lie in 0..len
        let lo = (2 * i + 1).saturating_sub(len);
        let hi = (2 * i).min(len - 1);
        (lo..=hi).map(|j| g.weight(j) * f[2 * i - j] * f[j]).sum()
    });
    out
}

/// `int_{-R}^{R} e^{-|xi_i - s|} g(s) ds` with `g` linear between nodes,
/// integrated exactly by two first-order recursions.
pub fn exponential_smoothing(grid: &LineGrid, g: &[f64]) -> Vec<f64> {
    let h = grid.dxi();
    let decay = (-h).exp();
    // weights of the far and near node of a cell
    let far = (1.0 - decay * (1.0 + h)) / h;
    let near = 1.0 - (1.0 - decay) / h;
    let len = g.len();
    let mut left = vec![0.0; len];
    for i in 1..len {
        left[i] = decay * left[i - 1] + far * g[i - 1] + near * g[i];
    }
    let mut right = vec![0.0; len];
    for i in (0..len - 1).rev() {
        right[i] = decay * right[i + 1] + far * g[i + 1] + near * g[i];
    }
    left.iter().zip(&right).map(|(a, b)| a + b).collect()
}

/// Result of one application of `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SMapOutput {
    /// `S(F)` rescaled to unit mass.
    pub profile: Profile,
    /// Trapezoid mass of `S(F)` before rescaling; deviations from one
    /// measure the tail lost to truncation.
    pub raw_mass: f64,
}

/// `S(F)` for an even `F`. The output is symmetrized, which only removes the
/// rounding asymmetry of the left-to-right sums.
pub fn s_map(profile: &Profile) -> SMapOutput {
    let g = doubled_autoconvolution(profile);
    let values = exponential_smoothing(&profile.grid, &g);
    let mut out = Profile {
        grid: profile.grid.clone(),
        values,
    };
    out.symmetrize();
    let raw_mass = out.grid.integrate(&out.values);
    out.scale(1.0 / raw_mass);
    SMapOutput {
        profile: out,
        raw_mass,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardStep {
    pub iter: usize,
    /// `|| F - S(F) ||_inf` for the iterate entering this step.
    pub sup_residual: f64,
    pub mass_renorm_factor: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardResult {
    pub profile: Profile,
    pub converged: bool,
    pub history: Vec<PicardStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    /// Damping `omega` in `(0, 1]`.
    pub omega: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest tolerated departure of the variance from 4.
    pub variance_tol: f64,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            omega: 0.5,
            tol: 1e-8,
            max_iter: 500,
            variance_tol: 1e-2,
        }
    }
}

/// Damped iteration `F <- (1 - omega) F + omega S(F)` until
/// `|| F - S(F) ||_inf <= tol`. Evenness is restored after every update; the
/// variance is only monitored.
pub fn picard_solve(seed: &Profile, options: &PicardOptions) -> Result<PicardResult> {
    if !(options.omega > 0.0 && options.omega <= 1.0) {
        return Err(invalid("omega", "damping must lie in (0, 1]"));
    }
    if !(options.tol > 0.0) {
        return Err(invalid("tol", "must be positive"));
    }
    let mass = seed.grid.integrate(&seed.values);
    if (mass - 1.0).abs() > 1e-6 {
        return Err(invalid("seed", format!("seed mass {mass} is not 1")));
    }
    let mut current = seed.clone();
    current.symmetrize();
    let mut history = Vec::new();
    for iter in 0..=options.max_iter {
        let image = s_map(&current);
        let residual = current.sup_distance(&image.profile);
        let variance = current.moments().variance;
        history.push(PicardStep {
            iter,
            sup_residual: residual,
            mass_renorm_factor: image.raw_mass,
            variance,
        });
        if (variance - 4.0).abs() > options.variance_tol {
            return Err(Error::VarianceDrift { iter, variance });
        }
        if residual <= options.tol {
            return Ok(PicardResult {
                profile: current,
                converged: true,
                history,
            });
        }
        if iter == options.max_iter {
            break;
        }
        let w = options.omega;
        for (v, s) in current.values.iter_mut().zip(&image.profile.values) {
            *v = (1.0 - w) * *v + w * s;
        }
        current.symmetrize();
        let m = current.grid.integrate(&current.values);
        current.scale(1.0 / m);
    }
    Ok(PicardResult {
        profile: current,
        converged: false,
        history,
    })
}

/// Scale `sqrt(M / 2mu)` between angle and profile variable.
pub fn profile_scale(mu: f64, mass: f64) -> f64 {
    (mass / (2.0 * mu)).sqrt()
}

/// Two-peak approximation `(M/2) s F(s (phi - center))` plus its copy shifted
/// by `pi`, with `s = sqrt(M / 2mu)`, sampled on the angular grid and
/// renormalized to mass `M`.
pub fn rescale_to_angle(
    profile: &Profile,
    mu: f64,
    mass: f64,
    grid: &AngularGrid,
    center: f64,
) -> Result<Vec<f64>> {
    if !(mu > 0.0) {
        return Err(invalid("mu", "must be positive"));
    }
    let s = profile_scale(mu, mass);
    if s * grid.dphi() > 2.0 {
        return Err(Error::Aliasing(s * grid.dphi()));
    }
    let amp = 0.5 * mass * s;
    let mut f: Vec<f64> = grid
        .angles()
        .iter()
        .map(|&phi| {
            // offset from the nearer of the two peaks, in (-pi/2, pi/2]
            let d = (phi - center + PI / 2.0).rem_euclid(PI) - PI / 2.0;
            amp * profile.eval(s * d)
        })
        .collect();
    let total = grid.mass(&f);
    f.iter_mut().for_each(|v| *v *= mass / total);
    Ok(f)
}

/// Axis of a two-peak density: `arg(sum f e^{2 i phi}) / 2`, in `[0, pi)`.
pub fn peak_axis(grid: &AngularGrid, f: &[f64]) -> f64 {
    let (mut c, mut s) = (0.0, 0.0);
    for (k, v) in f.iter().enumerate() {
        let a = 2.0 * grid.angle(k);
        c += v * a.cos();
        s += v * a.sin();
    }
    let axis = (0.5 * s.atan2(c)).rem_euclid(PI);
    // rem_euclid of a tiny negative angle rounds up to pi itself
    if axis >= PI {
        0.0
    } else {
        axis
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallMuComparison {
    pub mu: f64,
    pub mass: f64,
    pub equilibrium: Equilibrium,
    pub rescaled: Vec<f64>,
    pub center: f64,
    /// `|| f_eq - f_rescaled ||_{L1} / M`.
    pub rel_l1: f64,
    /// Masses of the half-circles split at the peak axis plus a right angle,
    /// so each contains one peak.
    pub half_masses: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallMuOptions {
    pub tol_eq: f64,
    pub t_max: f64,
    /// Initial mass fractions of the plateaus around `0` and `pi`.
    pub plateau_masses: (f64, f64),
}

impl Default for SmallMuOptions {
    fn default() -> Self {
        Self {
            tol_eq: 1e-9,
            t_max: 5.0e4,
            plateau_masses: (0.5, 0.5),
        }
    }
}

/// Equilibrates the homogeneous model from two opposite plateaus and
/// measures the relative L1 distance to the rescaled fixed-point profile,
/// centred on the equilibrium's peak axis.
pub fn compare_small_mu(
    mu: f64,
    mass: f64,
    grid: &AngularGrid,
    kernel: CollisionKernel,
    profile: &Profile,
    options: &SmallMuOptions,
) -> Result<SmallMuComparison> {
    let mut config = SimConfig::new(mu, kernel, grid.n(), options.t_max);
    config.mass = mass;
    config.output_cadence = 1000;
    let spec = InitialCondition::Plateaus {
        m1: options.plateau_masses.0,
        m2: options.plateau_masses.1,
        interval1: (-PI / 4.0, PI / 4.0),
        interval2: (3.0 * PI / 4.0, 5.0 * PI / 4.0),
    };
    let initial = make_initial(grid, mass, &spec)?;
    let equilibrium = equilibrate(&config, initial, options.tol_eq, options.t_max)?;
    let f = &equilibrium.state.f;
    let center = peak_axis(grid, f);
    let rescaled = rescale_to_angle(profile, mu, mass, grid, center)?;
    let rel_l1 = grid.dphi()
        * f.iter()
            .zip(&rescaled)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
        / mass;
    let split = ((center + PI / 2.0) / grid.dphi()).round() as isize;
    let half_masses = half_interval_masses(grid, f, grid.wrap(split));
    Ok(SmallMuComparison {
        mu,
        mass,
        rescaled,
        center,
        rel_l1,
        half_masses,
        equilibrium,
    })
}
