use cvqkd_gqi::channel::{
    apply_variance_ratio, draw_block, eve_tap, measure, segmented_inverse, transmit, LogicalChannel,
    MeasurementRecord,
};
use cvqkd_gqi::rng::{RngStream, StreamPurpose};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{num, OutDir, MEASUREMENT_HEADER};

struct UserRecords {
    bob: MeasurementRecord,
    eve: Option<MeasurementRecord>,
}

/// User `u` reads every stream from element `2·u·n` on, so users never share
/// random numbers and user 0 matches the key-rate scenario draws.
fn simulate_user(
    cfg: &RunConfig,
    seed: u64,
    trial: u64,
    u: usize,
    channel: &LogicalChannel,
) -> Result<UserRecords, CliError> {
    let offset = (2 * u * cfg.n) as u64;
    let stream = |p: StreamPurpose| RngStream::new(seed, p, trial).offset(offset);
    let block = draw_block(cfg.n, cfg.sigma_w0_sq, &stream(StreamPurpose::Input))?;
    let mut d = segmented_inverse(block.carriers(), cfg.m)?;
    apply_variance_ratio(&mut d, cfg.omega())?;
    let detector = cfg.detector();
    let bob = transmit(&d, channel, &stream(StreamPurpose::BobNoise))?;
    let bob = measure(&bob, detector, &stream(StreamPurpose::MeasurementPenalty));
    let eve = match cfg.eve_noise_variance {
        Some(v) => {
            let e = eve_tap(&d, channel, v, &stream(StreamPurpose::EveNoise))?;
            Some(measure(&e, detector, &stream(StreamPurpose::Auxiliary(1))))
        }
        None => None,
    };
    Ok(UserRecords { bob, eve })
}

fn rows(trial: u64, base: usize, rec: &MeasurementRecord, out: &mut Vec<Vec<String>>) {
    match rec {
        MeasurementRecord::Homodyne { mode, values } => {
            for (j, v) in values.iter().enumerate() {
                out.push(vec![trial.to_string(), (base + j).to_string(), mode.as_str().into(), num(*v)]);
            }
        }
        MeasurementRecord::Heterodyne { x, p } => {
            for (j, (a, b)) in x.iter().zip(p).enumerate() {
                let s = (base + j).to_string();
                out.push(vec![trial.to_string(), s.clone(), "heterodyne-x".into(), num(*a)]);
                out.push(vec![trial.to_string(), s, "heterodyne-p".into(), num(*b)]);
            }
        }
    }
}

pub fn run(cfg: &RunConfig, out: &OutDir, dgqi: bool) -> Result<(), CliError> {
    if dgqi {
        cfg.validate_dgqi()?;
    }
    let seed = cfg.seed()?;
    let channels = cfg.logical_channels()?;
    let per_trial = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            channels
                .iter()
                .enumerate()
                .map(|(u, ch)| simulate_user(cfg, seed, t, u, ch))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut bob_rows = Vec::new();
    let mut eve_rows = Vec::new();
    for (t, users) in per_trial.iter().enumerate() {
        for (u, rec) in users.iter().enumerate() {
            rows(t as u64, u * cfg.n, &rec.bob, &mut bob_rows);
            if let Some(e) = &rec.eve {
                rows(t as u64, u * cfg.n, e, &mut eve_rows);
            }
        }
    }
    let count = bob_rows.len();
    out.csv("bob.csv", &MEASUREMENT_HEADER, bob_rows)?;
    if cfg.eve_noise_variance.is_some() {
        out.csv("eve.csv", &MEASUREMENT_HEADER, eve_rows)?;
    }
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("simulate: {count} rows per party, {} trials", cfg.trials);
    Ok(())
}
