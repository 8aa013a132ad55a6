//! Initial-condition strings such as `random:1e-2` or `masses:3=0.5,54=0.5`.

use std::f64::consts::PI;

use myxo_core::spatial::SpatialInit;
use myxo_core::InitialCondition;

use crate::config::CliError;

fn numbers(kind: &str, args: &str, count: std::ops::RangeInclusive<usize>) -> Result<Vec<f64>, CliError> {
    let values = if args.is_empty() {
        Vec::new()
    } else {
        args.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("init `{kind}`: `{s}` is not a number")))
            })
            .collect::<Result<Vec<_>, _>>()?
    };
    if !count.contains(&values.len()) {
        return Err(CliError::Config(format!(
            "init `{kind}` takes {} to {} arguments, got {}",
            count.start(),
            count.end(),
            values.len()
        )));
    }
    Ok(values)
}

fn index(kind: &str, v: f64) -> Result<usize, CliError> {
    if v >= 0.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(CliError::Config(format!("init `{kind}`: {v} is not a grid index")))
    }
}

/// Parses a homogeneous initial condition. `seed` feeds the random variant.
///
/// - `uniform`
/// - `random:EPS`
/// - `point:EPS[,K]` (bump at index `K`, default 0)
/// - `plateaus:M1,M2` on `[-3pi/4, -pi/4]` and `[pi/4, 3pi/4]`, or
///   `plateaus:M1,A1,B1,M2,A2,B2` with explicit arcs
/// - `masses:K=M,K=M,...`
/// - `sine:AMP,MODE[,PHASE]`
pub fn parse(spec: &str, seed: u64) -> Result<InitialCondition, CliError> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let kind = kind.trim();
    match kind {
        "uniform" => {
            numbers(kind, args, 0..=0)?;
            Ok(InitialCondition::Uniform)
        }
        "random" => {
            let v = numbers(kind, args, 1..=1)?;
            Ok(InitialCondition::UniformRandom { eps: v[0], seed })
        }
        "point" => {
            let v = numbers(kind, args, 1..=2)?;
            let k0 = v.get(1).map(|&k| index(kind, k)).transpose()?.unwrap_or(0);
            Ok(InitialCondition::SinglePoint { eps: v[0], k0 })
        }
        "plateaus" => {
            let v = numbers(kind, args, 2..=6)?;
            match v.len() {
                2 => Ok(InitialCondition::Plateaus {
                    m1: v[0],
                    m2: v[1],
                    interval1: (-0.75 * PI, -0.25 * PI),
                    interval2: (0.25 * PI, 0.75 * PI),
                }),
                6 => Ok(InitialCondition::Plateaus {
                    m1: v[0],
                    m2: v[3],
                    interval1: (v[1], v[2]),
                    interval2: (v[4], v[5]),
                }),
                _ => Err(CliError::Config("init `plateaus` takes 2 or 6 arguments".into())),
            }
        }
        "masses" => {
            let list = args
                .split(',')
                .map(|pair| {
                    let (k, m) = pair.split_once('=').ok_or_else(|| {
                        CliError::Config(format!("init `masses`: expected K=M, got `{pair}`"))
                    })?;
                    let k = k
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Config(format!("init `masses`: bad index `{k}`")))?;
                    let m = m
                        .trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("init `masses`: bad mass `{m}`")))?;
                    Ok((k, m))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(InitialCondition::PointMasses(list))
        }
        "sine" => {
            let v = numbers(kind, args, 2..=3)?;
            Ok(InitialCondition::Sine {
                amplitude: v[0],
                mode: index(kind, v[1])?,
                phase: v.get(2).copied().unwrap_or(0.0),
            })
        }
        _ => Err(CliError::Config(format!("unknown init `{kind}`"))),
    }
}

/// Spatial runs: `uniform`, `random:EPS` (independent noise in every cell),
/// or any homogeneous string, copied into every cell.
pub fn parse_spatial(spec: &str, seed: u64) -> Result<SpatialInit, CliError> {
    match parse(spec, seed)? {
        InitialCondition::Uniform => Ok(SpatialInit::Uniform),
        InitialCondition::UniformRandom { eps, seed } => Ok(SpatialInit::Random { eps, seed }),
        other => Ok(SpatialInit::Homogeneous(other)),
    }
}
