//! Full model on the flat torus `T^2 x T^1`: transport along
//! `omega(phi) = (cos phi, sin phi)`, angular diffusion and collisions, by
//! Lie splitting of first-order upwind transport and the homogeneous update.
//!
//! Upwinding adds numerical diffusion, so fitted decay rates overstate the
//! true rate. They are evidence of exponential decay, not measurements of it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bifurcation::linear_fit;
use crate::collision::CollisionKernel;
use crate::error::{invalid, Error, Result};
use crate::grid::AngularGrid;
use crate::homogeneous::{auto_dt, make_initial, HomogeneousSolver, InitialCondition, MAX_HALVINGS};
use crate::par;

/// Density `f[ix][iy][k]` stored flat, `ix`-major, then `iy`, then `k`.
///
/// Masses are reported per unit area, `dphi dx dy sum f / (4 pi^2)`, so a
/// spatially uniform field has the same mass as its angular profile and the
/// uniform equilibrium is `M / 2pi` as in the homogeneous model.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticField {
    nx: usize,
    ny: usize,
    grid: AngularGrid,
    data: Vec<f64>,
}

impl KineticField {
    pub fn new(nx: usize, ny: usize, grid: AngularGrid, data: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(invalid("nx/ny", "spatial resolution must be positive"));
        }
        let expected = nx * ny * grid.num_points();
        if data.len() != expected {
            return Err(Error::GridMismatch {
                expected,
                found: data.len(),
            });
        }
        Ok(Self { nx, ny, grid, data })
    }

    /// The same angular profile in every cell.
    pub fn from_profile(nx: usize, ny: usize, grid: AngularGrid, profile: &[f64]) -> Result<Self> {
        if profile.len() != grid.num_points() {
            return Err(Error::GridMismatch {
                expected: grid.num_points(),
                found: profile.len(),
            });
        }
        let data = profile
            .iter()
            .copied()
            .cycle()
            .take(nx * ny * profile.len())
            .collect();
        Self::new(nx, ny, grid, data)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn grid(&self) -> &AngularGrid {
        &self.grid
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.nx as f64
    }

    pub fn dy(&self) -> f64 {
        2.0 * PI / self.ny as f64
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Angular profile of cell `(ix, iy)`.
    pub fn cell(&self, ix: usize, iy: usize) -> &[f64] {
        let m = self.grid.num_points();
        let start = (ix * self.ny + iy) * m;
        &self.data[start..start + m]
    }

    /// `dphi dx dy sum f`.
    pub fn total_mass(&self) -> f64 {
        self.grid.dphi() * self.dx() * self.dy() * self.data.iter().sum::<f64>()
    }

    /// Mass per unit area.
    pub fn mass(&self) -> f64 {
        self.total_mass() / (4.0 * PI * PI)
    }

    /// Discrete L2 norm of `f - M/2pi` over `T^2 x T^1`.
    pub fn l2_distance(&self, mass: f64) -> f64 {
        let f0 = mass / (2.0 * PI);
        let w = self.grid.dphi() * self.dx() * self.dy();
        (w * self.data.iter().map(|v| (v - f0).powi(2)).sum::<f64>()).sqrt()
    }

    /// Largest stable transport step `1 / max_k (|cos|/dx + |sin|/dy)`.
    pub fn cfl_bound(&self) -> f64 {
        let (dx, dy) = (self.dx(), self.dy());
        let worst = self
            .grid
            .angles()
            .iter()
            .map(|p| p.cos().abs() / dx + p.sin().abs() / dy)
            .fold(0.0, f64::max);
        1.0 / worst
    }
}

/// One upwind transport step. Rejected when the advective CFL number exceeds
/// one.
pub fn transport_step(field: &KineticField, dt: f64) -> Result<KineticField> {
    let bound = field.cfl_bound();
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    upwind(field, dt)
}

fn upwind(field: &KineticField, dt: f64) -> Result<KineticField> {
    let (nx, ny) = (field.nx, field.ny);
    let m = field.grid.num_points();
    let nu: Vec<(f64, f64)> = field
        .grid
        .angles()
        .iter()
        .map(|p| (dt * p.cos() / field.dx(), dt * p.sin() / field.dy()))
        .collect();
    let src = &field.data;
    let at = |ix: usize, iy: usize, k: usize| src[(ix * ny + iy) * m + k];
    let mut out = vec![0.0; src.len()];
    par::for_each_chunk(&mut out, ny * m, |ix, row| {
        let (xm, xp) = ((ix + nx - 1) % nx, (ix + 1) % nx);
        for iy in 0..ny {
            let (ym, yp) = ((iy + ny - 1) % ny, (iy + 1) % ny);
            for (k, &(vx, vy)) in nu.iter().enumerate() {
                let f = at(ix, iy, k);
                let dfx = if vx > 0.0 {
                    f - at(xm, iy, k)
                } else {
                    at(xp, iy, k) - f
                };
                let dfy = if vy > 0.0 {
                    f - at(ix, ym, k)
                } else {
                    at(ix, yp, k) - f
                };
                row[iy * m + k] = f - vx * dfx - vy * dfy;
            }
        }
    });
    KineticField::new(nx, ny, field.grid.clone(), out)
}

/// Lie splitting: transport by `dt`, then the homogeneous Euler update with
/// the same `dt` in every cell. The whole step is retried with half the step
/// while any cell would turn negative. Returns the step actually taken.
pub fn spatial_step(field: &mut KineticField, local: &HomogeneousSolver, dt: f64) -> Result<f64> {
    let m = field.grid.num_points();
    let mut h = dt;
    for _ in 0..=MAX_HALVINGS {
        let mut next = transport_step(field, h)?;
        let ok = par::map_chunks(&mut next.data, m, |_, cell| -> Result<bool> {
            let mut rhs = vec![0.0; m];
            local.rhs_into(cell, &mut rhs)?;
            let mut ok = true;
            for (v, r) in cell.iter_mut().zip(&rhs) {
                *v += h * r;
                ok &= *v >= 0.0;
            }
            Ok(ok)
        })
        .into_iter()
        .collect::<Result<Vec<bool>>>()?;
        if ok.iter().all(|&b| b) {
            *field = next;
            return Ok(h);
        }
        h *= 0.5;
    }
    Err(Error::Unstable {
        t: f64::NAN,
        halvings: MAX_HALVINGS,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpatialInit {
    Uniform,
    /// `f0 (1 + eps (u - mean u))` with i.i.d. `u` uniform on `[-1, 1]` per
    /// node. Centering keeps the mass exact and the perturbation linear in
    /// `eps`.
    Random { eps: f64, seed: u64 },
    /// A homogeneous initial condition copied into every cell.
    Homogeneous(InitialCondition),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpatialConfig {
    pub nx: usize,
    pub ny: usize,
    pub n: usize,
    pub mu: f64,
    pub kernel: CollisionKernel,
    #[serde(default = "one")]
    pub mass: f64,
    pub t_end: f64,
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "safety")]
    pub safety: f64,
    #[serde(default = "cadence")]
    pub output_cadence: usize,
    pub init: SpatialInit,
}

fn one() -> f64 {
    1.0
}
fn safety() -> f64 {
    0.9
}
fn cadence() -> usize {
    100
}

impl SpatialConfig {
    /// Desk-scale defaults: `32 x 32` cells and `n = 25`.
    pub fn new(mu: f64, kernel: CollisionKernel, t_end: f64, init: SpatialInit) -> Self {
        Self {
            nx: 32,
            ny: 32,
            n: 25,
            mu,
            kernel,
            mass: 1.0,
            t_end,
            dt: None,
            safety: safety(),
            output_cadence: cadence(),
            init,
        }
    }

    pub fn initial_field(&self) -> Result<KineticField> {
        let grid = AngularGrid::new(self.n)?;
        let f0 = self.mass / (2.0 * PI);
        match &self.init {
            SpatialInit::Uniform => {
                KineticField::from_profile(self.nx, self.ny, grid.clone(), &vec![f0; 2 * self.n])
            }
            SpatialInit::Random { eps, seed } => {
                if !(eps.abs() <= 0.5) {
                    return Err(invalid("eps", "perturbation must lie in [-0.5, 0.5]"));
                }
                let len = self.nx * self.ny * grid.num_points();
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let u: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
                let mean = u.iter().sum::<f64>() / len as f64;
                let data = u.iter().map(|x| f0 * (1.0 + eps * (x - mean))).collect();
                KineticField::new(self.nx, self.ny, grid, data)
            }
            SpatialInit::Homogeneous(spec) => {
                let state = make_initial(&grid, self.mass, spec)?;
                KineticField::from_profile(self.nx, self.ny, grid, &state.f)
            }
        }
    }

    /// Explicit step or the smaller of the homogeneous bound and the
    /// advective CFL bound, both scaled by `safety`.
    pub fn resolved_dt(&self, field: &KineticField) -> Result<f64> {
        let auto = auto_dt(field.grid(), self.mu, self.mass, self.safety)
            .min(self.safety * field.cfl_bound());
        match self.dt {
            Some(dt) if dt > 0.0 => Ok(dt),
            Some(dt) => Err(invalid("dt", format!("{dt} must be positive"))),
            None => Ok(auto),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRecord {
    pub t: f64,
    pub mass: f64,
    pub l2_dist: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialRun {
    pub records: Vec<DecayRecord>,
    pub final_field: KineticField,
    pub steps: usize,
    pub dt: f64,
}

pub fn run_spatial(config: &SpatialConfig) -> Result<SpatialRun> {
    if !(config.mu >= 0.0) || !(config.t_end >= 0.0) || config.output_cadence == 0 {
        return Err(invalid("spatial", "mu, t_end must be non-negative and cadence positive"));
    }
    let mut field = config.initial_field()?;
    let dt = config.resolved_dt(&field)?;
    let local = HomogeneousSolver::new(field.grid().clone(), config.kernel, config.mu);
    let record = |t: f64, f: &KineticField| DecayRecord {
        t,
        mass: f.mass(),
        l2_dist: f.l2_distance(config.mass),
    };
    let mut records = vec![record(0.0, &field)];
    let mut t = 0.0;
    let mut steps = 0;
    while config.t_end - t > 1e-12 * config.t_end.max(1.0) {
        let h = spatial_step(&mut field, &local, dt.min(config.t_end - t)).map_err(|e| match e {
            Error::Unstable { halvings, .. } => Error::Unstable { t, halvings },
            other => other,
        })?;
        t += h;
        steps += 1;
        if steps % config.output_cadence == 0 {
            records.push(record(t, &field));
        }
    }
    if steps % config.output_cadence != 0 {
        records.push(record(t, &field));
    }
    Ok(SpatialRun {
        records,
        final_field: field,
        steps,
        dt,
    })
}

/// Decay rate `lambda` from a least-squares fit of `ln d(t) = c - lambda t`
/// over samples with `t` in `[window.0, window.1]`.
pub fn fit_decay_rate(times: &[f64], distances: &[f64], window: (f64, f64)) -> Result<f64> {
    let mut pts = Vec::new();
    for (&t, &d) in times.iter().zip(distances) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if !(d > 0.0) {
            return Err(Error::NonPositiveData { t, value: d });
        }
        pts.push((t, d.ln()));
    }
    linear_fit(&pts)
        .map(|(slope, _)| -slope)
        .ok_or_else(|| invalid("window", "fewer than two distinct samples in the fit window"))
}
