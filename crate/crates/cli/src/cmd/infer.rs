use std::path::Path;

use cvqkd_gqi::dgqi::{periodogram_estimate, BinGrid, WindowSpec};
use cvqkd_gqi::gqi::{build_gain_profile, inferred_spectrum, solve_lagrangians, ConstraintSet};
use cvqkd_gqi::grid::ThetaGrid;
use serde::Serialize;

use super::Report;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{num, read_measurements, user0_traces, OutDir, Trace};

#[derive(Serialize)]
struct Spectrum {
    theta: Vec<f64>,
    power: Vec<f64>,
}

#[derive(Serialize)]
struct GqiOutput {
    targets: Vec<f64>,
    lambdas: Vec<f64>,
    residual: f64,
    converged: bool,
    iterations: usize,
    /// Absent when the search stopped where the spectrum is undefined.
    spectrum: Option<Spectrum>,
}

#[derive(Serialize)]
struct WindowEcho {
    coeffs: Vec<f64>,
    m: usize,
}

#[derive(Serialize)]
struct DgqiOutput {
    segments: usize,
    bins: Vec<f64>,
    estimates: Vec<f64>,
    peak_bin: usize,
    window: WindowEcho,
}

/// Mean square of the primary quadrature per subcarrier index `j mod m`,
/// pooled over trials.
fn gqi_targets(traces: &[Trace], m: usize) -> Result<ConstraintSet, CliError> {
    let mut per_sub = vec![Vec::new(); m];
    for tr in traces {
        for (j, v) in tr.primary.iter().enumerate() {
            per_sub[j % m].push(*v);
        }
    }
    Ok(ConstraintSet::from_measurements(&per_sub)?)
}

pub fn gqi(cfg: &RunConfig, out: &OutDir, input: &Path) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let traces = user0_traces(&read_measurements(input)?, cfg.n, cfg.k)?;
    let targets = gqi_targets(&traces, cfg.m)?;
    let grid = ThetaGrid::new(cfg.grid_points)?;
    let channel = &cfg.logical_channels()?[0];
    let profile = build_gain_profile(channel, cfg.omega(), &grid)?;
    let solution = solve_lagrangians(&targets, &profile)?;
    let spectrum = match inferred_spectrum(&solution.lambdas, &profile) {
        Ok(s) => Some(s),
        // a stalled search is reported as such below
        Err(_) if !solution.converged => None,
        Err(e) => return Err(e.into()),
    };

    let spectrum = spectrum.map(|s| Spectrum {
        theta: grid.thetas(),
        power: s.into_values(),
    });
    if let Some(s) = &spectrum {
        out.csv(
            "spectrum.csv",
            &["theta", "power"],
            s.theta.iter().zip(&s.power).map(|(t, p)| vec![num(*t), num(*p)]),
        )?;
    }
    out.json(
        "infer_gqi.json",
        &Report {
            command: "infer gqi",
            seed,
            config: cfg,
            body: GqiOutput {
                targets: targets.targets().to_vec(),
                lambdas: solution.lambdas.clone(),
                residual: solution.residual,
                converged: solution.converged,
                iterations: solution.iterations,
                spectrum,
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("infer gqi: residual {:e}, converged {}", solution.residual, solution.converged);
    if !solution.converged {
        return Err(CliError::NonConvergence {
            residual: solution.residual,
        });
    }
    Ok(())
}

pub fn dgqi(cfg: &RunConfig, out: &OutDir, input: &Path) -> Result<(), CliError> {
    cfg.validate_dgqi()?;
    let seed = cfg.seed()?;
    let traces = user0_traces(&read_measurements(input)?, cfg.n, cfg.k)?;
    let coeffs = cfg.window_coeffs.clone().unwrap_or_default();
    let window = WindowSpec::new(coeffs.clone(), cfg.m)?;

    let mut sum = vec![0.0; cfg.m / 2 + 1];
    let mut segments = 0usize;
    for tr in &traces {
        for seg in tr.values.chunks(cfg.m) {
            let est = periodogram_estimate(seg, &window)?;
            sum.iter_mut().zip(est.values()).for_each(|(s, v)| *s += v);
            segments += 1;
        }
    }
    let estimates: Vec<f64> = sum.iter().map(|s| s / segments as f64).collect();
    // ties go to the lower bin
    let peak_bin = estimates
        .iter()
        .enumerate()
        .fold(0, |best, (i, v)| if *v > estimates[best] { i } else { best });
    let bins = BinGrid::new(cfg.sigma_w_sq, cfg.m)?.bins();

    out.csv(
        "estimate.csv",
        &["bin", "frequency", "estimate"],
        bins.iter()
            .zip(&estimates)
            .enumerate()
            .map(|(i, (f, e))| vec![i.to_string(), num(*f), num(*e)]),
    )?;
    out.json(
        "infer_dgqi.json",
        &Report {
            command: "infer dgqi",
            seed,
            config: cfg,
            body: DgqiOutput {
                segments,
                bins,
                estimates,
                peak_bin,
                window: WindowEcho { coeffs, m: cfg.m },
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("infer dgqi: {segments} segments, peak bin {peak_bin}");
    Ok(())
}
