//! Pitchfork branch below the critical diffusivity, traced by integrating the
//! homogeneous equation to steady state. Only stable branches are reachable
//! this way, which doubles as a stability check.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::AngularGrid;
use crate::homogeneous::{
    fourier_mode, make_initial, DistributionState, HomogeneousSolver, InitialCondition, SimConfig,
};
use crate::par;
use crate::spectral::critical_mu;
use crate::CollisionKernel;

/// Default steady-state tolerance, relative to the mass.
pub const DEFAULT_TOL_EQ: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: DistributionState,
    pub converged: bool,
    /// Last residual `|| mu f'' + Q(f) ||_inf`.
    pub residual: f64,
    /// `(t, residual)` samples.
    pub history: Vec<(f64, f64)>,
    pub steps: usize,
}

/// Integrates until `|| mu f'' + Q(f) ||_inf <= tol_eq * M` or `t >= t_max`.
/// Running out of time is reported through `converged`, not as an error.
pub fn equilibrate(
    config: &SimConfig,
    initial: DistributionState,
    tol_eq: f64,
    t_max: f64,
) -> Result<Equilibrium> {
    if !(tol_eq > 0.0) {
        return Err(invalid("tol_eq", "must be positive"));
    }
    config.validate()?;
    let grid = config.grid()?;
    let dt = config.resolved_dt()?;
    let mut solver = HomogeneousSolver::new(grid, config.kernel, config.mu);
    let mut state = initial;
    let threshold = tol_eq * config.mass;
    let mut residual = solver.residual(&state.f)?;
    let mut history = vec![(state.t, residual)];
    let mut steps = 0usize;
    while residual > threshold && state.t < t_max {
        let t = state.t;
        let report = solver.advance(&mut state.f, t, dt.min(t_max - t))?;
        state.t += report.dt;
        steps += 1;
        // The step reports the residual of the state it started from.
        residual = report.residual;
        if residual <= threshold {
            residual = solver.residual(&state.f)?;
        }
        if steps.is_multiple_of(config.output_cadence) {
            history.push((state.t, residual));
        }
    }
    let residual = solver.residual(&state.f)?;
    if history.last().map(|h| h.0) != Some(state.t) {
        history.push((state.t, residual));
    }
    Ok(Equilibrium {
        converged: residual <= threshold,
        state,
        residual,
        history,
        steps,
    })
}

/// Leading-order branch amplitude of the `sin(2(phi - phi0))` component for
/// the rod kernel: `sqrt(220 M (mu* - mu) / (15 pi))`, zero above `mu*`.
pub fn predicted_amplitude(mu: f64, mass: f64) -> f64 {
    let mu_star = critical_mu(CollisionKernel::Rod, mass);
    if mu >= mu_star {
        0.0
    } else {
        (220.0 * mass * (mu_star - mu) / (15.0 * PI)).sqrt()
    }
}

/// `A_2 = sqrt(a_2^2 + b_2^2)`.
pub fn amplitude(grid: &AngularGrid, f: &[f64]) -> f64 {
    let (a, b) = fourier_mode(grid, f, 2).expect("mode 2 exists for n >= 5");
    a.hypot(b)
}

/// Global maximum and the largest value more than a right angle away from it.
pub fn peak_positions(grid: &AngularGrid, f: &[f64]) -> (usize, usize) {
    let argmax = |it: &mut dyn Iterator<Item = usize>| {
        it.fold(None, |best: Option<usize>, k| match best {
            Some(b) if f[b] >= f[k] => Some(b),
            _ => Some(k),
        })
        .expect("non-empty")
    };
    let first = argmax(&mut (0..f.len()));
    let n = grid.n() as isize;
    let second = argmax(
        &mut (0..f.len()).filter(|&k| 2 * grid.signed_distance(first, k).abs() > n),
    );
    (first, second)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mu: f64,
    pub converged: bool,
    pub t_equilibrate: f64,
    pub amplitude: f64,
    pub peaks: (usize, usize),
    pub predicted: f64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub mu_star: f64,
}

impl SweepTable {
    /// Least-squares slope of `ln A_2` against `ln(mu_ref - mu)` over rows with
    /// `mu_ref - mu` in `[lo, hi] * mu_ref`. `None` with fewer than two rows.
    pub fn loglog_slope(&self, mu_ref: f64, lo: f64, hi: f64) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| {
                let gap = (mu_ref - r.mu) / mu_ref;
                gap >= lo * (1.0 - 1e-9) && gap <= hi * (1.0 + 1e-9) && r.amplitude > 0.0
            })
            .map(|r| ((mu_ref - r.mu).ln(), r.amplitude.ln()))
            .collect();
        linear_fit(&pts).map(|(slope, _)| slope)
    }
}

/// Ordinary least squares `y = slope x + intercept`.
pub(crate) fn linear_fit(pts: &[(f64, f64)]) -> Option<(f64, f64)> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

/// Options shared by all rows of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub tol_eq: f64,
    pub t_max: f64,
    /// Relative amplitude of the `sin(2 phi)` seed, in units of `f0`.
    pub seed_amplitude: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            tol_eq: DEFAULT_TOL_EQ,
            t_max: 1.0e5,
            seed_amplitude: 1e-3,
        }
    }
}

/// Equilibrates from `f0 (1 + seed_amplitude sin 2phi)` for every `mu` in
/// `mus`; rows run concurrently and come back sorted by `mu`.
pub fn amplitude_sweep(
    mus: &[f64],
    template: &SimConfig,
    options: &SweepOptions,
) -> Result<SweepTable> {
    if let Some(mu) = mus.iter().find(|&&mu| !(mu >= 0.0)) {
        return Err(invalid("mu", format!("sweep value {mu} must be non-negative")));
    }
    let mut sorted = mus.to_vec();
    sorted.sort_by(f64::total_cmp);
    let grid = template.grid()?;
    let f0 = template.mass / (2.0 * PI);
    let spec = InitialCondition::Sine {
        amplitude: options.seed_amplitude * f0,
        mode: 2,
        phase: 0.0,
    };
    let rows = par::map_slice(&sorted, |&mu| -> Result<SweepRow> {
        let mut config = template.clone();
        config.mu = mu;
        config.dt = None;
        let initial = make_initial(&grid, config.mass, &spec)?;
        let eq = equilibrate(&config, initial, options.tol_eq, options.t_max)?;
        let amp = amplitude(&grid, &eq.state.f);
        let predicted = predicted_amplitude(mu, config.mass);
        let rel_err = if predicted > 0.0 {
            (amp - predicted).abs() / predicted
        } else {
            f64::NAN
        };
        Ok(SweepRow {
            mu,
            converged: eq.converged,
            t_equilibrate: eq.state.t,
            amplitude: amp,
            peaks: peak_positions(&grid, &eq.state.f),
            predicted,
            rel_err,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        rows,
        mu_star: critical_mu(CollisionKernel::Rod, template.mass),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn predicted_amplitude_law() {
        let mu_star = 1.0 / (12.0 * PI);
        assert_eq!(predicted_amplitude(mu_star, 1.0), 0.0);
        assert_eq!(predicted_amplitude(0.03, 1.0), 0.0);
        assert_relative_eq!(predicted_amplitude(0.02, 1.0), 0.1746, max_relative = 1e-3);
        let eps = 1e-4;
        let ratio = predicted_amplitude(mu_star - 4.0 * eps, 1.0)
            / predicted_amplitude(mu_star - eps, 1.0);
        assert_relative_eq!(ratio, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn opposite_point_masses_converge_immediately() {
        let cfg = SimConfig::new(0.0, CollisionKernel::Rod, 25, 10.0);
        let g = cfg.grid().unwrap();
        let init = make_initial(&g, 1.0, &InitialCondition::PointMasses(vec![(4, 0.5), (29, 0.5)]))
            .unwrap();
        let eq = equilibrate(&cfg, init.clone(), DEFAULT_TOL_EQ, 10.0).unwrap();
        assert!(eq.converged);
        assert_eq!(eq.residual, 0.0);
        assert_eq!(eq.state.f, init.f);
    }

    #[test]
    fn peaks_of_a_two_bump_profile() {
        let g = AngularGrid::new(25).unwrap();
        let f: Vec<f64> = g.angles().iter().map(|p| 1.0 + (2.0 * (p - 0.4)).cos()).collect();
        let (a, b) = peak_positions(&g, &f);
        assert_eq!(g.signed_distance(a, b).unsigned_abs(), 25);
    }

    #[test]
    fn slope_fit_recovers_square_root() {
        let mu_star = 0.03;
        let rows = [0.01, 0.02, 0.05, 0.1]
            .iter()
            .map(|gap| SweepRow {
                mu: mu_star * (1.0 - gap),
                converged: true,
                t_equilibrate: 0.0,
                amplitude: 3.0 * (mu_star * gap).sqrt(),
                peaks: (0, 0),
                predicted: 0.0,
                rel_err: 0.0,
            })
            .collect();
        let table = SweepTable { rows, mu_star };
        assert_relative_eq!(table.loglog_slope(mu_star, 0.01, 0.1).unwrap(), 0.5, max_relative = 1e-10);
    }
}
