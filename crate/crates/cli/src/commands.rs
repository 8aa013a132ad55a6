//! One function per subcommand: resolve parameters (defaults, then the
//! config file, then flags), run, write outputs and metadata.

use std::path::Path;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use myxo_core::bifurcation::{amplitude_sweep, SweepOptions};
use myxo_core::fixedpoint::{
    compare_small_mu, gaussian_seed, picard_solve, LineGrid, PicardOptions, SmallMuOptions,
};
use myxo_core::homogeneous::{make_initial, run, RECORDED_MODES};
use myxo_core::spatial::{fit_decay_rate, run_spatial, SpatialConfig};
use myxo_core::spectral::{critical_mu, lambda_rod, numeric_critical_mu, numeric_spectrum};
use myxo_core::{AngularGrid, CollisionKernel, SimConfig};

use crate::config::{load, overlay, CliError};
use crate::init;
use crate::output::{Cell, Metadata, OutDir};

pub struct Context<'a> {
    pub config: Option<&'a Path>,
    pub out: &'a Path,
    pub threads: usize,
}

/// Writes the outputs of a finished run. A numerical failure leaves a
/// `failure.json` with the parameters and the message next to whatever was
/// written before it.
fn finish<P: Serialize>(
    ctx: &Context,
    out: &OutDir,
    command: &str,
    params: &P,
    seed: Option<u64>,
    start: Instant,
    result: Result<(), CliError>,
) -> Result<(), CliError> {
    if let Err(CliError::Numerical(msg)) = &result {
        #[derive(Serialize)]
        struct Failure<'a, P> {
            command: &'a str,
            config: &'a P,
            error: &'a str,
        }
        out.json(
            "failure.json",
            &Failure {
                command,
                config: params,
                error: msg,
            },
        )?;
    }
    result?;
    out.json("config.json", params)?;
    out.json(
        "metadata.json",
        &Metadata::new(command, params, seed, ctx.threads, start.elapsed()),
    )
}

fn profile_rows<'a>(grid: &'a AngularGrid, f: &'a [f64]) -> impl Iterator<Item = Vec<Cell>> + 'a {
    grid.angles()
        .iter()
        .zip(f)
        .map(|(&phi, &v)| vec![phi.into(), v.into()])
}

// ---------------------------------------------------------------- simulate

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateParams {
    pub kernel: CollisionKernel,
    pub mu: f64,
    pub n: usize,
    pub mass: f64,
    pub dt: Option<f64>,
    pub safety: f64,
    pub t_end: f64,
    pub output_cadence: usize,
    /// Profile snapshots every this many steps; 0 disables them.
    pub snapshot_cadence: usize,
    pub init: String,
    pub seed: u64,
}

impl Default for SimulateParams {
    fn default() -> Self {
        Self {
            kernel: CollisionKernel::Rod,
            mu: 0.02,
            n: 51,
            mass: 1.0,
            dt: None,
            safety: 0.9,
            t_end: 2000.0,
            output_cadence: 100,
            snapshot_cadence: 0,
            init: "random:1e-2".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long)]
    kernel: Option<CollisionKernel>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    output_cadence: Option<usize>,
    #[arg(long)]
    snapshot_cadence: Option<usize>,
    /// uniform | random:EPS | point:EPS[,K] | plateaus:M1,M2 | masses:K=M,.. | sine:AMP,MODE[,PHASE]
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn simulate(ctx: &Context, args: &SimulateArgs) -> Result<(), CliError> {
    let mut p: SimulateParams = load(ctx.config)?;
    overlay!(p, args; kernel, mu, n, mass, safety, t_end, output_cadence, snapshot_cadence, init, seed);
    if args.dt.is_some() {
        p.dt = args.dt;
    }
    let config = SimConfig {
        mu: p.mu,
        kernel: p.kernel,
        n: p.n,
        mass: p.mass,
        dt: p.dt,
        safety: p.safety,
        t_end: p.t_end,
        output_cadence: p.output_cadence,
        snapshot_cadence: p.snapshot_cadence,
        seed: p.seed,
    };
    config.validate()?;
    let grid = config.grid()?;
    let initial = make_initial(&grid, p.mass, &init::parse(&p.init, p.seed)?)?;
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    out.csv("profile_initial.csv", &["phi", "f"], profile_rows(&grid, &initial.f))?;
    let result = run(&config, initial).map_err(CliError::from).and_then(|tr| {
        let mut header = vec!["t".to_string(), "mass".into(), "l2_dist_uniform".into()];
        for m in 1..=RECORDED_MODES {
            header.push(format!("a{m}"));
            header.push(format!("b{m}"));
        }
        header.extend(["m_left".into(), "m_right".into()]);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        out.csv(
            "trajectory.csv",
            &header,
            tr.records.iter().map(|r| {
                let mut row: Vec<Cell> = vec![r.t.into(), r.mass.into(), r.l2_dist_uniform.into()];
                for &(a, b) in &r.modes {
                    row.push(a.into());
                    row.push(b.into());
                }
                row.push(r.m_left.into());
                row.push(r.m_right.into());
                row
            }),
        )?;
        out.csv("profile_final.csv", &["phi", "f"], profile_rows(&grid, &tr.final_state.f))?;
        if p.snapshot_cadence > 0 {
            out.csv(
                "snapshots.csv",
                &["t", "phi", "f"],
                tr.snapshots.iter().flat_map(|s| {
                    grid.angles()
                        .iter()
                        .zip(&s.f)
                        .map(move |(&phi, &v)| vec![s.t.into(), phi.into(), v.into()])
                }),
            )?;
        }
        Ok(())
    });
    finish(ctx, &out, "simulate", &p, Some(p.seed), start, result)
}

// ---------------------------------------------------------------- spectrum

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub kernel: CollisionKernel,
    pub n: usize,
    pub mu: f64,
    pub mass: f64,
    pub max_mode: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            kernel: CollisionKernel::Rod,
            n: 51,
            mu: 0.02,
            mass: 1.0,
            max_mode: 6,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpectrumArgs {
    #[arg(long)]
    kernel: Option<CollisionKernel>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    max_mode: Option<usize>,
}

pub fn spectrum(ctx: &Context, args: &SpectrumArgs) -> Result<(), CliError> {
    let mut p: SpectrumParams = load(ctx.config)?;
    overlay!(p, args; kernel, n, mu, mass, max_mode);
    let grid = AngularGrid::new(p.n)?;
    let modes: Vec<usize> = (1..=p.max_mode).collect();
    let report = numeric_spectrum(&grid, p.kernel, p.mu, p.mass, &modes)?;
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    out.csv(
        "spectrum.csv",
        &["mode", "lambda_closed", "lambda_numeric", "abs_err", "rel_err"],
        report.modes.iter().map(|m| {
            vec![
                m.mode.into(),
                m.lambda_closed.into(),
                m.lambda_numeric.into(),
                m.abs_err.into(),
                m.rel_err.into(),
            ]
        }),
    )?;
    // fourth mode at the critical diffusivity, where the second one is neutral
    let mu_star = critical_mu(p.kernel, p.mass);
    let at_threshold = if p.n > 4 {
        numeric_spectrum(&grid, p.kernel, mu_star, p.mass, &[4])?
            .modes
            .first()
            .map(|m| m.lambda_numeric)
    } else {
        None
    };
    let f0 = p.mass / (2.0 * std::f64::consts::PI);
    #[derive(Serialize)]
    struct Summary<'a> {
        mu_star_closed: f64,
        mu_star_numeric: f64,
        lambda4_at_mu_star_closed: Option<f64>,
        lambda4_at_mu_star_numeric: Option<f64>,
        report: &'a myxo_core::spectral::SpectrumReport,
    }
    out.json(
        "summary.json",
        &Summary {
            mu_star_closed: report.mu_star_closed,
            mu_star_numeric: numeric_critical_mu(&grid, p.kernel, p.mass)?,
            lambda4_at_mu_star_closed: (p.kernel == CollisionKernel::Rod)
                .then(|| lambda_rod(4, mu_star, f0)),
            lambda4_at_mu_star_numeric: at_threshold,
            report: &report,
        },
    )?;
    finish(ctx, &out, "spectrum", &p, None, start, Ok(()))
}

// ---------------------------------------------------------------- bifurcate

/// Which critical diffusivity the relative gaps are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// `M / 12pi`.
    Closed,
    /// Root of the discrete second-mode eigenvalue on this grid.
    Numeric,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BifurcateParams {
    pub n: usize,
    pub mass: f64,
    /// Explicit diffusivities; when empty they are built from `gaps`.
    pub mus: Vec<f64>,
    /// Relative distances `(mu* - mu) / mu*` below the reference threshold.
    pub gaps: Vec<f64>,
    pub reference: Reference,
    /// Gap range of the log-log slope fit.
    pub fit_range: (f64, f64),
    pub tol_eq: f64,
    pub t_max: f64,
    pub seed_amplitude: f64,
}

impl Default for BifurcateParams {
    fn default() -> Self {
        let options = SweepOptions::default();
        Self {
            n: 51,
            mass: 1.0,
            mus: Vec::new(),
            gaps: vec![0.01, 0.015, 0.02, 0.03, 0.05, 0.07, 0.1],
            reference: Reference::Numeric,
            fit_range: (0.01, 0.1),
            tol_eq: options.tol_eq,
            t_max: options.t_max,
            seed_amplitude: options.seed_amplitude,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct BifurcateArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    mus: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    gaps: Option<Vec<f64>>,
    #[arg(long)]
    reference: Option<Reference>,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    seed_amplitude: Option<f64>,
}

pub fn bifurcate(ctx: &Context, args: &BifurcateArgs) -> Result<(), CliError> {
    let mut p: BifurcateParams = load(ctx.config)?;
    overlay!(p, args; n, mass, mus, gaps, reference, tol_eq, t_max, seed_amplitude);
    let grid = AngularGrid::new(p.n)?;
    let mu_star_closed = critical_mu(CollisionKernel::Rod, p.mass);
    let mu_star_numeric = numeric_critical_mu(&grid, CollisionKernel::Rod, p.mass)?;
    let mu_ref = match p.reference {
        Reference::Closed => mu_star_closed,
        Reference::Numeric => mu_star_numeric,
    };
    let mus: Vec<f64> = if p.mus.is_empty() {
        p.gaps.iter().map(|g| mu_ref * (1.0 - g)).collect()
    } else {
        p.mus.clone()
    };
    if mus.is_empty() {
        return Err(CliError::Config("bifurcate needs `mus` or `gaps`".into()));
    }
    let template = SimConfig {
        mass: p.mass,
        ..SimConfig::new(mu_ref, CollisionKernel::Rod, p.n, 0.0)
    };
    let options = SweepOptions {
        tol_eq: p.tol_eq,
        t_max: p.t_max,
        seed_amplitude: p.seed_amplitude,
    };
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    let result = amplitude_sweep(&mus, &template, &options)
        .map_err(CliError::from)
        .and_then(|table| {
            out.csv(
                "sweep.csv",
                &["mu", "A2", "A2_predicted", "rel_err", "t_equilibrate", "converged"],
                table.rows.iter().map(|r| {
                    vec![
                        r.mu.into(),
                        r.amplitude.into(),
                        r.predicted.into(),
                        (r.predicted > 0.0).then_some(r.rel_err).into(),
                        r.t_equilibrate.into(),
                        r.converged.into(),
                    ]
                }),
            )?;
            out.csv(
                "bifurcation_diagram.csv",
                &["mu", "A2_plus", "A2_minus", "uniform"],
                table
                    .rows
                    .iter()
                    .map(|r| vec![r.mu.into(), r.amplitude.into(), (-r.amplitude).into(), 0.0.into()]),
            )?;
            #[derive(Serialize)]
            struct Summary {
                mu_star_closed: f64,
                mu_star_numeric: f64,
                reference: Reference,
                mu_ref: f64,
                fit_range: (f64, f64),
                loglog_slope: Option<f64>,
                all_converged: bool,
            }
            out.json(
                "summary.json",
                &Summary {
                    mu_star_closed,
                    mu_star_numeric,
                    reference: p.reference,
                    mu_ref,
                    fit_range: p.fit_range,
                    loglog_slope: table.loglog_slope(mu_ref, p.fit_range.0, p.fit_range.1),
                    all_converged: table.rows.iter().all(|r| r.converged),
                },
            )
        });
    finish(ctx, &out, "bifurcate", &p, None, start, result)
}

// ---------------------------------------------------------------- fixedpoint

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FixedpointParams {
    /// Half-width `R` of the truncated line.
    pub radius: f64,
    /// Number of nodes `N` (odd).
    pub len: usize,
    pub tol: f64,
    pub omega: f64,
    pub max_iter: usize,
    pub variance_tol: f64,
}

impl Default for FixedpointParams {
    fn default() -> Self {
        let o = PicardOptions::default();
        let g = LineGrid::default();
        Self {
            radius: g.radius(),
            len: g.len(),
            tol: o.tol,
            omega: o.omega,
            max_iter: o.max_iter,
            variance_tol: o.variance_tol,
        }
    }
}

impl FixedpointParams {
    fn options(&self) -> PicardOptions {
        PicardOptions {
            omega: self.omega,
            tol: self.tol,
            max_iter: self.max_iter,
            variance_tol: self.variance_tol,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FixedpointArgs {
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long = "N")]
    len: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    variance_tol: Option<f64>,
}

pub fn fixedpoint(ctx: &Context, args: &FixedpointArgs) -> Result<(), CliError> {
    let mut p: FixedpointParams = load(ctx.config)?;
    overlay!(p, args; radius, len, tol, omega, max_iter, variance_tol);
    let grid = LineGrid::new(p.radius, p.len)?;
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    let result = picard_solve(&gaussian_seed(&grid), &p.options())
        .map_err(CliError::from)
        .and_then(|res| {
            let prof = &res.profile;
            out.csv(
                "profile.csv",
                &["xi", "F"],
                (0..grid.len()).map(|i| vec![grid.node(i).into(), prof.values[i].into()]),
            )?;
            out.csv(
                "residuals.csv",
                &["iter", "sup_residual", "mass_renorm_factor", "variance"],
                res.history.iter().map(|h| {
                    vec![
                        h.iter.into(),
                        h.sup_residual.into(),
                        h.mass_renorm_factor.into(),
                        h.variance.into(),
                    ]
                }),
            )?;
            let m = prof.moments();
            #[derive(Serialize)]
            struct Summary {
                converged: bool,
                iterations: usize,
                mass: f64,
                mean: f64,
                variance: f64,
                sup: f64,
                center_value: f64,
            }
            out.json(
                "summary.json",
                &Summary {
                    converged: res.converged,
                    iterations: res.history.len(),
                    mass: m.mass,
                    mean: m.mean,
                    variance: m.variance,
                    sup: prof.sup(),
                    center_value: prof.center_value(),
                },
            )?;
            if res.converged {
                Ok(())
            } else {
                Err(CliError::Numerical(format!(
                    "Picard iteration did not reach {} in {} iterations",
                    p.tol, p.max_iter
                )))
            }
        });
    finish(ctx, &out, "fixedpoint", &p, None, start, result)
}

// ---------------------------------------------------------------- spatial

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpatialParams {
    pub nx: usize,
    pub ny: usize,
    pub n: usize,
    pub mu: f64,
    pub kernel: CollisionKernel,
    pub mass: f64,
    pub t_end: f64,
    pub dt: Option<f64>,
    pub safety: f64,
    pub output_cadence: usize,
    pub init: String,
    pub seed: u64,
    /// Time window of the decay fit; defaults to `[min(1, t_end/2), t_end]`.
    pub fit_window: Option<(f64, f64)>,
    /// Dump the initial and final fields as raw binary.
    pub snapshot: bool,
}

impl Default for SpatialParams {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            n: 25,
            mu: 8.0,
            kernel: CollisionKernel::Rod,
            mass: 1.0,
            t_end: 5.0,
            dt: None,
            safety: 0.9,
            output_cadence: 100,
            init: "random:1e-2".into(),
            seed: 0,
            fit_window: None,
            snapshot: false,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SpatialArgs {
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    kernel: Option<CollisionKernel>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    safety: Option<f64>,
    #[arg(long)]
    output_cadence: Option<usize>,
    /// uniform | random:EPS (noise per cell) | any homogeneous init, copied to every cell
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, num_args = 2, value_names = ["T0", "T1"])]
    fit_window: Option<Vec<f64>>,
    #[arg(long)]
    snapshot: bool,
}

pub fn spatial(ctx: &Context, args: &SpatialArgs) -> Result<(), CliError> {
    let mut p: SpatialParams = load(ctx.config)?;
    overlay!(p, args; nx, ny, n, mu, kernel, mass, t_end, safety, output_cadence, init, seed);
    if args.dt.is_some() {
        p.dt = args.dt;
    }
    if let Some(w) = &args.fit_window {
        p.fit_window = Some((w[0], w[1]));
    }
    p.snapshot |= args.snapshot;
    let config = SpatialConfig {
        nx: p.nx,
        ny: p.ny,
        n: p.n,
        mu: p.mu,
        kernel: p.kernel,
        mass: p.mass,
        t_end: p.t_end,
        dt: p.dt,
        safety: p.safety,
        output_cadence: p.output_cadence,
        init: init::parse_spatial(&p.init, p.seed)?,
    };
    let initial = config.initial_field()?;
    config.resolved_dt(&initial)?;
    let window = p.fit_window.unwrap_or((1f64.min(0.5 * p.t_end), p.t_end));
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    let dump = |name: &str, field: &myxo_core::spatial::KineticField, t: f64| -> Result<(), CliError> {
        out.binary(&format!("{name}.bin"), field.data())?;
        #[derive(Serialize)]
        struct Sidecar {
            nx: usize,
            ny: usize,
            n: usize,
            angular_points: usize,
            t: f64,
            layout: &'static str,
            dtype: &'static str,
        }
        out.json(
            &format!("{name}.json"),
            &Sidecar {
                nx: field.nx(),
                ny: field.ny(),
                n: field.grid().n(),
                angular_points: field.grid().num_points(),
                t,
                layout: "f[ix][iy][k], ix slowest, k fastest",
                dtype: "f64 little-endian",
            },
        )
    };
    if p.snapshot {
        dump("field_initial", &initial, 0.0)?;
    }
    let result = run_spatial(&config).map_err(CliError::from).and_then(|run| {
        out.csv(
            "decay.csv",
            &["t", "mass", "l2_dist"],
            run.records
                .iter()
                .map(|r| vec![r.t.into(), r.mass.into(), r.l2_dist.into()]),
        )?;
        if p.snapshot {
            dump("field_final", &run.final_field, run.records.last().map_or(0.0, |r| r.t))?;
        }
        let t: Vec<f64> = run.records.iter().map(|r| r.t).collect();
        let d: Vec<f64> = run.records.iter().map(|r| r.l2_dist).collect();
        let fit = fit_decay_rate(&t, &d, window);
        #[derive(Serialize)]
        struct Summary {
            dt: f64,
            steps: usize,
            fit_window: (f64, f64),
            decay_rate: Option<f64>,
            fit_error: Option<String>,
        }
        out.json(
            "summary.json",
            &Summary {
                dt: run.dt,
                steps: run.steps,
                fit_window: window,
                decay_rate: fit.as_ref().ok().copied(),
                fit_error: fit.err().map(|e| e.to_string()),
            },
        )
    });
    finish(ctx, &out, "spatial", &p, Some(p.seed), start, result)
}

// ---------------------------------------------------------------- compare-smallmu

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareParams {
    pub mu: f64,
    pub mass: f64,
    pub n: usize,
    pub kernel: CollisionKernel,
    pub radius: f64,
    pub len: usize,
    pub tol: f64,
    pub omega: f64,
    pub max_iter: usize,
    pub tol_eq: f64,
    pub t_max: f64,
    pub plateau_masses: (f64, f64),
}

impl Default for CompareParams {
    fn default() -> Self {
        let fp = FixedpointParams::default();
        let o = SmallMuOptions::default();
        Self {
            mu: 0.001,
            mass: 1.0,
            n: 51,
            kernel: CollisionKernel::Maxwell,
            radius: fp.radius,
            len: fp.len,
            tol: fp.tol,
            omega: fp.omega,
            max_iter: fp.max_iter,
            tol_eq: o.tol_eq,
            t_max: o.t_max,
            plateau_masses: o.plateau_masses,
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct CompareArgs {
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kernel: Option<CollisionKernel>,
    #[arg(long = "R")]
    radius: Option<f64>,
    #[arg(long = "N")]
    len: Option<usize>,
    #[arg(long)]
    tol_eq: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
}

pub fn compare_smallmu(ctx: &Context, args: &CompareArgs) -> Result<(), CliError> {
    let mut p: CompareParams = load(ctx.config)?;
    overlay!(p, args; mu, mass, n, kernel, radius, len, tol_eq, t_max);
    let grid = AngularGrid::new(p.n)?;
    let line = LineGrid::new(p.radius, p.len)?;
    let picard = PicardOptions {
        omega: p.omega,
        tol: p.tol,
        max_iter: p.max_iter,
        ..PicardOptions::default()
    };
    let options = SmallMuOptions {
        tol_eq: p.tol_eq,
        t_max: p.t_max,
        plateau_masses: p.plateau_masses,
    };
    let out = OutDir::create(ctx.out)?;
    let start = Instant::now();
    let result = picard_solve(&gaussian_seed(&line), &picard)
        .map_err(CliError::from)
        .and_then(|fp| {
            if !fp.converged {
                return Err(CliError::Numerical(format!(
                    "fixed-point iteration did not reach {} in {} iterations",
                    p.tol, p.max_iter
                )));
            }
            Ok(compare_small_mu(p.mu, p.mass, &grid, p.kernel, &fp.profile, &options)?)
        })
        .and_then(|c| {
            out.csv(
                "comparison.csv",
                &["phi", "f_equilibrium", "f_rescaled"],
                grid.angles()
                    .iter()
                    .zip(&c.equilibrium.state.f)
                    .zip(&c.rescaled)
                    .map(|((&phi, &a), &b)| vec![phi.into(), a.into(), b.into()]),
            )?;
            #[derive(Serialize)]
            struct Summary {
                rel_l1: f64,
                half_masses: (f64, f64),
                peak_axis: f64,
                converged: bool,
                t_equilibrate: f64,
                residual: f64,
            }
            out.json(
                "summary.json",
                &Summary {
                    rel_l1: c.rel_l1,
                    half_masses: c.half_masses,
                    peak_axis: c.center,
                    converged: c.equilibrium.converged,
                    t_equilibrate: c.equilibrium.state.t,
                    residual: c.equilibrium.residual,
                },
            )
        });
    finish(ctx, &out, "compare-smallmu", &p, None, start, result)
}
