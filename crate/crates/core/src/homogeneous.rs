//! Spatially homogeneous dynamics `df/dt = mu f'' + Q(f,f)` on the angular
//! grid: three-point diffusion, the discrete collision operator and explicit
//! Euler steps.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collision::{AngularDensity, CollisionKernel, CollisionOperator};
use crate::error::{invalid, Error, Result};
use crate::grid::AngularGrid;

/// Name of the generator behind every randomized initial condition.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64 (rand_chacha 0.9)";

/// Maximum number of step halvings before a step is declared unstable.
pub const MAX_HALVINGS: u32 = 30;

/// Number of Fourier modes recorded in trajectories.
pub const RECORDED_MODES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionState {
    pub f: AngularDensity,
    pub t: f64,
}

impl DistributionState {
    pub fn new(f: AngularDensity) -> Self {
        Self { f, t: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub mu: f64,
    pub kernel: CollisionKernel,
    pub n: usize,
    #[serde(default = "default_mass")]
    pub mass: f64,
    /// Explicit time step; `None` selects [`auto_dt`].
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default = "default_safety")]
    pub safety: f64,
    pub t_end: f64,
    /// Steps between trajectory records.
    #[serde(default = "default_cadence")]
    pub output_cadence: usize,
    /// Steps between profile snapshots; zero disables them.
    #[serde(default)]
    pub snapshot_cadence: usize,
    #[serde(default)]
    pub seed: u64,
}

fn default_mass() -> f64 {
    1.0
}
fn default_safety() -> f64 {
    0.9
}
fn default_cadence() -> usize {
    100
}

impl SimConfig {
    pub fn new(mu: f64, kernel: CollisionKernel, n: usize, t_end: f64) -> Self {
        Self {
            mu,
            kernel,
            n,
            mass: 1.0,
            dt: None,
            safety: default_safety(),
            t_end,
            output_cadence: default_cadence(),
            snapshot_cadence: 0,
            seed: 0,
        }
    }

    pub fn grid(&self) -> Result<AngularGrid> {
        AngularGrid::new(self.n)
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(invalid("mu", "must be a finite non-negative number"));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(invalid("mass", "must be positive"));
        }
        if !(self.safety > 0.0 && self.safety <= 1.0) {
            return Err(invalid("safety", "must lie in (0, 1]"));
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(invalid("t_end", "must be a finite non-negative number"));
        }
        if self.output_cadence == 0 {
            return Err(invalid("output_cadence", "must be at least 1"));
        }
        if let Some(dt) = self.dt {
            let bound = auto_dt(&grid, self.mu, self.mass, 1.0);
            if !(dt > 0.0) || dt > bound {
                return Err(invalid(
                    "dt",
                    format!("{dt} outside the stable range (0, {bound}]"),
                ));
            }
        }
        Ok(())
    }

    /// The step size actually used: the explicit one or [`auto_dt`].
    pub fn resolved_dt(&self) -> Result<f64> {
        let grid = self.grid()?;
        Ok(self
            .dt
            .unwrap_or_else(|| auto_dt(&grid, self.mu, self.mass, self.safety)))
    }
}

/// Stable explicit step: `safety * min(dphi^2 / (2 mu), 1 / (6 M))`.
///
/// The first bound is the parabolic CFL condition of the three-point
/// stencil, the second caps the collision loss rate, which is at most about
/// `3M` for kernels bounded by one.
pub fn auto_dt(grid: &AngularGrid, mu: f64, mass: f64, safety: f64) -> f64 {
    let diffusion = if mu > 0.0 {
        grid.dphi().powi(2) / (2.0 * mu)
    } else {
        f64::INFINITY
    };
    safety * diffusion.min(1.0 / (6.0 * mass))
}

/// Initial data for homogeneous runs. Every variant is rescaled to the
/// requested total mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    Uniform,
    /// `f0 (1 + eps u_k)` with `u_k` i.i.d. uniform on `[-1, 1]`.
    UniformRandom { eps: f64, seed: u64 },
    /// `f0` everywhere and `f0 (1 + eps)` at index `k0`.
    SinglePoint { eps: f64, k0: usize },
    /// Constant densities carrying relative masses `m1`, `m2` on the closed
    /// arcs `interval1`, `interval2` (radians, counter-clockwise).
    Plateaus {
        m1: f64,
        m2: f64,
        interval1: (f64, f64),
        interval2: (f64, f64),
    },
    /// Point masses `(k, m)`, each stored as `m / dphi` at index `k`.
    PointMasses(Vec<(usize, f64)>),
    /// `f0 + amplitude sin(mode (phi - phase))`.
    Sine {
        amplitude: f64,
        mode: usize,
        phase: f64,
    },
}

fn in_arc(angle: f64, (a, b): (f64, f64)) -> bool {
    let span = (b - a).rem_euclid(2.0 * PI);
    (angle - a).rem_euclid(2.0 * PI) <= span + 1e-12
}

pub fn make_initial(
    grid: &AngularGrid,
    mass: f64,
    spec: &InitialCondition,
) -> Result<DistributionState> {
    if !(mass > 0.0) {
        return Err(invalid("mass", "must be positive"));
    }
    let len = grid.num_points();
    let f0 = mass / (2.0 * PI);
    let mut f = match spec {
        InitialCondition::Uniform => vec![f0; len],
        InitialCondition::UniformRandom { eps, seed } => {
            if !(eps.abs() <= 1.0) {
                return Err(invalid("eps", "random amplitude must lie in [-1, 1]"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            (0..len)
                .map(|_| f0 * (1.0 + eps * rng.random_range(-1.0..=1.0)))
                .collect()
        }
        InitialCondition::SinglePoint { eps, k0 } => {
            if *k0 >= len {
                return Err(invalid("k0", format!("index {k0} outside 0..{len}")));
            }
            if !(*eps >= -1.0) {
                return Err(invalid("eps", "bump would make the density negative"));
            }
            let mut f = vec![f0; len];
            f[*k0] *= 1.0 + eps;
            f
        }
        InitialCondition::Plateaus {
            m1,
            m2,
            interval1,
            interval2,
        } => {
            if *m1 < 0.0 || *m2 < 0.0 || m1 + m2 <= 0.0 {
                return Err(invalid("plateaus", "masses must be non-negative, not both zero"));
            }
            let mut f = vec![0.0; len];
            for (m, arc) in [(*m1, *interval1), (*m2, *interval2)] {
                let members: Vec<usize> =
                    (0..len).filter(|&k| in_arc(grid.angle(k), arc)).collect();
                if members.is_empty() && m > 0.0 {
                    return Err(invalid("plateaus", "arc contains no grid point"));
                }
                let value = m / (members.len().max(1) as f64 * grid.dphi());
                for k in members {
                    f[k] += value;
                }
            }
            f
        }
        InitialCondition::PointMasses(points) => {
            let mut f = vec![0.0; len];
            for &(k, m) in points {
                if m < 0.0 {
                    return Err(invalid("point_masses", format!("negative mass {m}")));
                }
                if k >= len {
                    return Err(invalid("point_masses", format!("index {k} outside 0..{len}")));
                }
                f[k] += m / grid.dphi();
            }
            f
        }
        InitialCondition::Sine {
            amplitude,
            mode,
            phase,
        } => {
            if amplitude.abs() > f0 {
                return Err(invalid("amplitude", "must not exceed f0 (negative density)"));
            }
            grid.angles()
                .iter()
                .map(|&phi| f0 + amplitude * (*mode as f64 * (phi - phase)).sin())
                .collect()
        }
    };
    let total = grid.mass(&f);
    if !(total > 0.0) {
        return Err(invalid("initial", "initial data carry no mass"));
    }
    // Skip the rescale when it would only add rounding noise.
    if (total - mass).abs() > 1e-15 * mass {
        let scale = mass / total;
        f.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(DistributionState::new(f))
}

/// Discrete Fourier coefficients `(a_m, b_m)` of `f` so that
/// `f ~ a_0/2 + sum a_m cos(m phi) + b_m sin(m phi)`.
pub fn fourier_mode(grid: &AngularGrid, f: &[f64], m: usize) -> Result<(f64, f64)> {
    if m == 0 || m >= grid.n() {
        return Err(Error::ModeOutOfRange {
            mode: m,
            limit: grid.n(),
        });
    }
    let (mut a, mut b) = (0.0, 0.0);
    for (k, v) in f.iter().enumerate() {
        let arg = m as f64 * grid.angle(k);
        a += v * arg.cos();
        b += v * arg.sin();
    }
    let w = grid.dphi() / PI;
    Ok((w * a, w * b))
}

/// Masses on the two half-circles `[phi_k0 - pi, phi_k0)` and
/// `[phi_k0, phi_k0 + pi)`, returned as `(left, right)`.
pub fn half_interval_masses(grid: &AngularGrid, f: &[f64], k0: usize) -> (f64, f64) {
    let n = grid.n();
    let side = |start: usize| grid.dphi() * (0..n).map(|i| f[(start + i) % (2 * n)]).sum::<f64>();
    (side(grid.opposite(k0)), side(k0))
}

/// `sqrt(dphi * sum (f_k - M / 2pi)^2)`.
pub fn l2_distance_to_uniform(grid: &AngularGrid, f: &[f64], mass: f64) -> f64 {
    let f0 = mass / (2.0 * PI);
    (grid.dphi() * f.iter().map(|v| (v - f0).powi(2)).sum::<f64>()).sqrt()
}

/// One trajectory record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub t: f64,
    pub mass: f64,
    pub l2_dist_uniform: f64,
    /// `(a_m, b_m)` for `m = 1..=6`; modes at or above `n` are NaN.
    pub modes: Vec<(f64, f64)>,
    pub m_left: f64,
    pub m_right: f64,
}

impl Record {
    pub fn of(grid: &AngularGrid, state: &DistributionState, mass: f64) -> Self {
        let modes = (1..=RECORDED_MODES)
            .map(|m| fourier_mode(grid, &state.f, m).unwrap_or((f64::NAN, f64::NAN)))
            .collect();
        let (m_left, m_right) = half_interval_masses(grid, &state.f, 0);
        Self {
            t: state.t,
            mass: grid.mass(&state.f),
            l2_dist_uniform: l2_distance_to_uniform(grid, &state.f, mass),
            modes,
            m_left,
            m_right,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub records: Vec<Record>,
    pub snapshots: Vec<DistributionState>,
    pub final_state: DistributionState,
    pub steps: usize,
    pub dt: f64,
}

/// Outcome of a single accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub dt: f64,
    pub halvings: u32,
    /// `|| mu f'' + Q(f) ||_inf` before the update.
    pub residual: f64,
}

/// Explicit Euler integrator with preallocated work buffers.
#[derive(Debug, Clone)]
pub struct HomogeneousSolver {
    op: CollisionOperator,
    mu: f64,
    rhs: Vec<f64>,
    trial: Vec<f64>,
}

impl HomogeneousSolver {
    pub fn new(grid: AngularGrid, kernel: CollisionKernel, mu: f64) -> Self {
        let len = grid.num_points();
        Self {
            op: CollisionOperator::new(grid, kernel),
            mu,
            rhs: vec![0.0; len],
            trial: vec![0.0; len],
        }
    }

    pub fn grid(&self) -> &AngularGrid {
        self.op.grid()
    }

    pub fn operator(&self) -> &CollisionOperator {
        &self.op
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Writes `mu f'' + Q(f,f)` into `out`.
    pub fn rhs_into(&self, f: &[f64], out: &mut [f64]) -> Result<()> {
        self.op.collide_into(f, out)?;
        let m = f.len();
        let c = self.mu / self.grid().dphi().powi(2);
        if c != 0.0 {
            for k in 0..m {
                let lap = f[(k + 1) % m] - 2.0 * f[k] + f[(k + m - 1) % m];
                out[k] += c * lap;
            }
        }
        Ok(())
    }

    /// Steady-state residual `|| mu f'' + Q(f,f) ||_inf`.
    pub fn residual(&self, f: &[f64]) -> Result<f64> {
        let mut out = vec![0.0; f.len()];
        self.rhs_into(f, &mut out)?;
        Ok(sup_norm(&out))
    }

    /// Advances `f` in place by `dt`, halving the step while the update
    /// would produce a negative density.
    pub fn advance(&mut self, f: &mut [f64], t: f64, dt: f64) -> Result<StepReport> {
        let mut rhs = std::mem::take(&mut self.rhs);
        let result = self.rhs_into(f, &mut rhs);
        self.rhs = rhs;
        result?;
        let residual = sup_norm(&self.rhs);
        let mut dt = dt;
        for halvings in 0..=MAX_HALVINGS {
            let mut ok = true;
            for ((out, v), r) in self.trial.iter_mut().zip(f.iter()).zip(&self.rhs) {
                *out = v + dt * r;
                ok &= *out >= 0.0;
            }
            if ok {
                f.copy_from_slice(&self.trial);
                return Ok(StepReport {
                    dt,
                    halvings,
                    residual,
                });
            }
            dt *= 0.5;
        }
        Err(Error::Unstable {
            t,
            halvings: MAX_HALVINGS,
        })
    }

    pub fn step(&mut self, state: &mut DistributionState, dt: f64) -> Result<StepReport> {
        let report = self.advance(&mut state.f, state.t, dt)?;
        state.t += report.dt;
        Ok(report)
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Integrates from `initial` to `config.t_end`, recording diagnostics every
/// `output_cadence` steps and at both ends.
pub fn run(config: &SimConfig, initial: DistributionState) -> Result<Trajectory> {
    config.validate()?;
    let grid = config.grid()?;
    if initial.f.len() != grid.num_points() {
        return Err(Error::GridMismatch {
            expected: grid.num_points(),
            found: initial.f.len(),
        });
    }
    let dt = config.resolved_dt()?;
    let mut solver = HomogeneousSolver::new(grid.clone(), config.kernel, config.mu);
    let mut state = initial;
    let mut records = vec![Record::of(&grid, &state, config.mass)];
    let mut snapshots = Vec::new();
    if config.snapshot_cadence > 0 {
        snapshots.push(state.clone());
    }
    let t_end = config.t_end;
    let mut steps = 0;
    while t_end - state.t > 1e-12 * t_end.max(1.0) {
        let h = dt.min(t_end - state.t);
        solver.step(&mut state, h)?;
        steps += 1;
        if steps % config.output_cadence == 0 {
            records.push(Record::of(&grid, &state, config.mass));
        }
        if config.snapshot_cadence > 0 && steps % config.snapshot_cadence == 0 {
            snapshots.push(state.clone());
        }
    }
    if steps % config.output_cadence != 0 {
        records.push(Record::of(&grid, &state, config.mass));
    }
    Ok(Trajectory {
        records,
        snapshots,
        final_state: state,
        steps,
        dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn auto_dt_examples() {
        let g = AngularGrid::new(51).unwrap();
        let dt = auto_dt(&g, 0.02, 1.0, 0.9);
        let parabolic = (PI / 51.0).powi(2) / 0.04;
        assert_relative_eq!(parabolic, 0.094_862, max_relative = 1e-4);
        assert_relative_eq!(dt, 0.9 * parabolic, max_relative = 1e-15);
        assert_relative_eq!(dt, 0.085_37, max_relative = 1e-3);
        assert_eq!(auto_dt(&g, 0.0, 1.0, 1.0), 1.0 / 6.0);
        assert_relative_eq!(auto_dt(&g, 0.03, 2.0, 0.5), 0.5 * auto_dt(&g, 0.03, 2.0, 1.0));
    }

    #[test]
    fn uniform_is_unchanged_by_a_step() {
        let g = AngularGrid::new(51).unwrap();
        let mut solver = HomogeneousSolver::new(g.clone(), CollisionKernel::Rod, 0.02);
        let mut s = make_initial(&g, 1.0, &InitialCondition::Uniform).unwrap();
        let before = s.f.clone();
        solver.step(&mut s, 0.05).unwrap();
        for (a, b) in s.f.iter().zip(&before) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(s.t, 0.05);
    }

    #[test]
    fn opposite_point_masses_without_diffusion() {
        let g = AngularGrid::new(25).unwrap();
        let mut solver = HomogeneousSolver::new(g.clone(), CollisionKernel::Maxwell, 0.0);
        let spec = InitialCondition::PointMasses(vec![(3, 0.5), (28, 0.5)]);
        let mut s = make_initial(&g, 1.0, &spec).unwrap();
        let before = s.f.clone();
        let report = solver.step(&mut s, 0.1).unwrap();
        assert_eq!(s.f, before);
        assert_eq!(report.residual, 0.0);
    }

    #[test]
    fn mass_drift_per_step() {
        let g = AngularGrid::new(51).unwrap();
        let mut solver = HomogeneousSolver::new(g.clone(), CollisionKernel::Rod, 0.01);
        let spec = InitialCondition::UniformRandom { eps: 0.5, seed: 11 };
        let mut s = make_initial(&g, 1.0, &spec).unwrap();
        let dt = auto_dt(&g, 0.01, 1.0, 0.9);
        for _ in 0..50 {
            let m0 = g.mass(&s.f);
            solver.step(&mut s, dt).unwrap();
            assert!((g.mass(&s.f) - m0).abs() <= 1e-14);
        }
    }

    #[test]
    fn oversized_step_is_halved() {
        let g = AngularGrid::new(25).unwrap();
        let mut solver = HomogeneousSolver::new(g.clone(), CollisionKernel::Rod, 0.5);
        let spec = InitialCondition::PointMasses(vec![(0, 1.0)]);
        let mut s = make_initial(&g, 1.0, &spec).unwrap();
        let report = solver.step(&mut s, 10.0).unwrap();
        assert!(report.halvings > 0);
        assert!(s.f.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn random_with_zero_eps_is_uniform() {
        let g = AngularGrid::new(51).unwrap();
        let s = make_initial(&g, 1.0, &InitialCondition::UniformRandom { eps: 0.0, seed: 5 })
            .unwrap();
        assert!(s.f.iter().all(|&v| v == 1.0 / (2.0 * PI)));
    }

    #[test]
    fn random_initial_is_reproducible() {
        let g = AngularGrid::new(51).unwrap();
        let spec = InitialCondition::UniformRandom { eps: 0.1, seed: 42 };
        let a = make_initial(&g, 1.0, &spec).unwrap();
        let b = make_initial(&g, 1.0, &spec).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(g.mass(&a.f), 1.0, max_relative = 1e-14);
        let c = make_initial(&g, 1.0, &InitialCondition::UniformRandom { eps: 0.1, seed: 43 })
            .unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn symmetric_plateaus() {
        let g = AngularGrid::new(51).unwrap();
        let spec = InitialCondition::Plateaus {
            m1: 0.5,
            m2: 0.5,
            interval1: (-0.75 * PI, -0.25 * PI),
            interval2: (0.25 * PI, 0.75 * PI),
        };
        let s = make_initial(&g, 1.0, &spec).unwrap();
        for k in 0..51 {
            assert_eq!(s.f[k], s.f[k + 51]);
        }
        let (l, r) = half_interval_masses(&g, &s.f, 0);
        assert_relative_eq!(l, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn point_mass_initial() {
        let g = AngularGrid::new(51).unwrap();
        let s = make_initial(&g, 1.0, &InitialCondition::PointMasses(vec![(10, 1.0)])).unwrap();
        assert_relative_eq!(g.dphi() * s.f[10], 1.0, max_relative = 1e-14);
        assert_eq!(s.f.iter().filter(|&&v| v != 0.0).count(), 1);
        assert!(make_initial(&g, 1.0, &InitialCondition::PointMasses(vec![(1, -0.1)])).is_err());
    }

    #[test]
    fn fourier_orthogonality() {
        let g = AngularGrid::new(51).unwrap();
        let f: Vec<f64> = g.angles().iter().map(|p| 0.2 + 0.3 * (2.0 * p).sin()).collect();
        let (a2, b2) = fourier_mode(&g, &f, 2).unwrap();
        assert!(a2.abs() < 1e-15);
        assert!((b2 - 0.3).abs() < 1e-15);
        let f: Vec<f64> = g.angles().iter().map(|p| (3.0 * p).cos()).collect();
        for m in 1..51 {
            let (a, b) = fourier_mode(&g, &f, m).unwrap();
            let expected = if m == 3 { 1.0 } else { 0.0 };
            assert!((a - expected).abs() < 1e-14 && b.abs() < 1e-14, "m={m}");
        }
        let u = vec![0.3; 102];
        for m in 1..51 {
            let (a, b) = fourier_mode(&g, &u, m).unwrap();
            assert!(a.abs() < 1e-14 && b.abs() < 1e-14);
        }
        assert!(fourier_mode(&g, &u, 51).is_err());
        assert!(fourier_mode(&g, &u, 0).is_err());
    }

    #[test]
    fn half_masses() {
        let g = AngularGrid::new(51).unwrap();
        let u = vec![1.0 / (2.0 * PI); 102];
        let (l, r) = half_interval_masses(&g, &u, 0);
        assert_relative_eq!(l, 0.5, max_relative = 1e-14);
        assert_relative_eq!(r, 0.5, max_relative = 1e-14);
        let s = make_initial(&g, 1.0, &InitialCondition::PointMasses(vec![(8, 1.0)])).unwrap();
        let (l, r) = half_interval_masses(&g, &s.f, 7);
        assert_eq!(l, 0.0);
        assert_relative_eq!(r, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn explicit_dt_is_checked() {
        let mut cfg = SimConfig::new(0.02, CollisionKernel::Rod, 51, 1.0);
        cfg.dt = Some(1.0);
        assert!(cfg.validate().is_err());
        cfg.dt = Some(0.05);
        assert!(cfg.validate().is_ok());
        cfg.n = 50;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn run_records_ends_and_cadence() {
        let mut cfg = SimConfig::new(0.03, CollisionKernel::Rod, 25, 1.0);
        cfg.output_cadence = 3;
        let g = cfg.grid().unwrap();
        let init = make_initial(&g, 1.0, &InitialCondition::UniformRandom { eps: 0.1, seed: 1 })
            .unwrap();
        let traj = run(&cfg, init).unwrap();
        assert_eq!(traj.records.first().unwrap().t, 0.0);
        assert!((traj.final_state.t - 1.0).abs() < 1e-12);
        assert_eq!(traj.records.last().unwrap().t, traj.final_state.t);
        assert_eq!(traj.records.len(), 1 + traj.steps / 3 + usize::from(!traj.steps.is_multiple_of(3)));
    }
}
