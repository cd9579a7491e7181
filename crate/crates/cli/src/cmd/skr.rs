use std::path::Path;

use cvqkd_gqi::channel::measure;
use cvqkd_gqi::grid::ThetaGrid;
use cvqkd_gqi::keyrate::{
    cumulative_rate_vector, rate_vs_m, rate_vs_z, simulate_trial, RateCurve, Scenario,
};
use cvqkd_gqi::rng::{RngStream, StreamPurpose};
use cvqkd_gqi::spectral::RealSequence;
use rayon::prelude::*;
use serde::Serialize;

use super::Report;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{num, primary_sequence, read_measurements, OutDir};

#[derive(Serialize)]
struct Verdict<'a> {
    non_decreasing: bool,
    curve: &'a RateCurve,
}

fn write_verdict(
    cfg: &RunConfig,
    out: &OutDir,
    command: &str,
    name: &str,
    curve: &RateCurve,
) -> Result<(), CliError> {
    out.json(
        name,
        &Report {
            command,
            seed: cfg.seed()?,
            config: cfg,
            body: Verdict {
                non_decreasing: curve.non_decreasing(),
                curve,
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    for v in &curve.violations {
        println!(
            "violation: {:?} fell from {} to {} by {:e} (tolerance {:e})",
            v.series, v.from, v.to, v.drop, v.tolerance
        );
    }
    println!("non_decreasing = {}", curve.non_decreasing());
    Ok(())
}

/// Measured primary quadratures of every trial, concatenated in trial order.
fn simulated_sequences(s: &Scenario, m: usize) -> Result<(Vec<f64>, Vec<f64>), CliError> {
    let per_trial = (0..s.trials as u64)
        .into_par_iter()
        .map(|t| {
            let sig = simulate_trial(s, m, t)?;
            let bob = measure(
                &sig.bob,
                s.detector,
                &RngStream::new(s.seed, StreamPurpose::MeasurementPenalty, t),
            );
            let eve = measure(&sig.eve, s.detector, &RngStream::new(s.seed, StreamPurpose::Auxiliary(1), t));
            Ok((bob.primary().to_vec(), eve.primary().to_vec()))
        })
        .collect::<Result<Vec<_>, cvqkd_gqi::Error>>()?;
    let (bob, eve): (Vec<_>, Vec<_>) = per_trial.into_iter().unzip();
    Ok((bob.concat(), eve.concat()))
}

pub fn vs_z(
    cfg: &RunConfig,
    out: &OutDir,
    bob: Option<&Path>,
    eve: Option<&Path>,
) -> Result<(), CliError> {
    let (b, e) = match (bob, eve) {
        (Some(b), Some(e)) => (
            primary_sequence(&read_measurements(b)?),
            primary_sequence(&read_measurements(e)?),
        ),
        (None, None) => simulated_sequences(&cfg.scenario()?, cfg.m)?,
        _ => {
            return Err(CliError::Validation(
                "--bob and --eve must be given together".into(),
            ))
        }
    };
    let grid = ThetaGrid::new(cfg.grid_points)?;
    let curve = rate_vs_z(&RealSequence::new(b)?, &RealSequence::new(e)?, cfg.z_max, &grid)?;
    out.csv(
        "rate_vs_z.csv",
        &["Z", "d_ab", "d_be", "rate"],
        curve.points.iter().map(|p| {
            vec![p.z.to_string(), num(p.d_ab), num(p.d_be), num(p.rate_per_carrier)]
        }),
    )?;
    write_verdict(cfg, out, "skr vs-z", "rate_vs_z.json", &curve)
}

pub fn vs_m(cfg: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    let curve = rate_vs_m(&cfg.scenario()?, &cfg.m_list)?;
    out.csv(
        "rate_vs_m.csv",
        &["m", "d_ab", "d_be", "rate", "stderr"],
        curve.points.iter().zip(&curve.stderr).map(|(p, se)| {
            vec![
                p.m.unwrap_or_default().to_string(),
                num(p.d_ab),
                num(p.d_be),
                num(p.rate_per_carrier),
                num(*se),
            ]
        }),
    )?;
    write_verdict(cfg, out, "skr vs-m", "rate_vs_m.json", &curve)
}

#[derive(Serialize)]
struct CumulativeOutput<'a> {
    m: usize,
    rates: &'a [f64],
    stderr: &'a [f64],
}

pub fn cumulative(cfg: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let c = cumulative_rate_vector(&cfg.scenario()?, cfg.m)?;
    out.csv(
        "cumulative.csv",
        &["i", "rate", "stderr"],
        c.rates
            .iter()
            .zip(&c.stderr)
            .enumerate()
            .map(|(i, (r, se))| vec![i.to_string(), num(*r), num(*se)]),
    )?;
    out.json(
        "cumulative.json",
        &Report {
            command: "skr cumulative",
            seed,
            config: cfg,
            body: CumulativeOutput {
                m: c.m,
                rates: &c.rates,
                stderr: &c.stderr,
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("cumulative: {} prefixes", c.rates.len());
    Ok(())
}
