use std::path::Path;

use cvqkd_gqi::dgqi::{magnitude_error, normalize_window, offset_grid, optimize_window, WindowSpec};
use serde::Serialize;

use super::Report;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::io::{num, OutDir};

/// "P=<int>" and "C=<c1,...,cP>" lines.
pub fn format_window(coeffs: &[f64]) -> String {
    let c: Vec<String> = coeffs.iter().map(|v| num(*v)).collect();
    format!("P={}\nC={}\n", coeffs.len(), c.join(","))
}

pub fn parse_window(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |msg: String| CliError::Validation(format!("window file: {msg}"));
    let mut p = None;
    let mut coeffs = None;
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        match line.split_once('=') {
            Some(("P", v)) => {
                p = Some(v.trim().parse::<usize>().map_err(|e| bad(format!("P: {e}")))?)
            }
            Some(("C", v)) => {
                let parsed = v
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<f64>().map_err(|e| bad(format!("C: {e}"))))
                    .collect::<Result<Vec<_>, _>>()?;
                coeffs = Some(parsed);
            }
            _ => return Err(bad(format!("unexpected line '{line}'"))),
        }
    }
    let (p, coeffs) = match (p, coeffs) {
        (Some(p), Some(c)) => (p, c),
        _ => return Err(bad("needs both a P line and a C line".into())),
    };
    if coeffs.len() != p {
        return Err(bad(format!("P = {p} but {} coefficients", coeffs.len())));
    }
    Ok(coeffs)
}

#[derive(Serialize)]
struct DesignOutput {
    #[serde(rename = "P")]
    p: usize,
    m: usize,
    coeffs: Vec<f64>,
    eps_max: f64,
    optimal: bool,
}

pub fn design(cfg: &RunConfig, out: &OutDir) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let d = optimize_window(cfg.p, cfg.window_m, &offset_grid(cfg.offsets))?;
    let norm = normalize_window(&d.window)?;
    let m = d.window.m();
    out.text("window.txt", &format_window(d.window.coeffs()))?;
    out.csv(
        "window_beta.csv",
        &["i_over_m", "n_beta"],
        norm.beta()
            .iter()
            .enumerate()
            .map(|(i, b)| vec![num(i as f64 / m as f64), num(*b)]),
    )?;
    out.json(
        "window_design.json",
        &Report {
            command: "window design",
            seed,
            config: cfg,
            body: DesignOutput {
                p: d.window.p(),
                m,
                coeffs: d.window.coeffs().to_vec(),
                eps_max: d.eps_max,
                optimal: d.optimal,
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("eps_max = {} dB", num(d.eps_max));
    if !d.optimal {
        println!("optimal = false (search stopped at its evaluation cap)");
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepOutput {
    m: usize,
    coeffs: Vec<f64>,
    eps_max: f64,
}

pub fn sweep(cfg: &RunConfig, out: &OutDir, window_file: Option<&Path>) -> Result<(), CliError> {
    let seed = cfg.seed()?;
    let coeffs = match window_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_window(&text)?
        }
        None => cfg.window_coeffs.clone().unwrap_or_default(),
    };
    let window = WindowSpec::new(coeffs.clone(), cfg.window_m)?;
    let curve = magnitude_error(&window, &offset_grid(cfg.offsets))?;
    out.csv(
        "sweep.csv",
        &["offset", "deviation_db"],
        curve
            .offsets
            .iter()
            .zip(&curve.deviation_db)
            .map(|(o, d)| vec![num(*o), num(*d)]),
    )?;
    out.json(
        "sweep.json",
        &Report {
            command: "window sweep",
            seed,
            config: cfg,
            body: SweepOutput {
                m: cfg.window_m,
                coeffs,
                eps_max: curve.eps_max,
            },
        },
    )?;
    out.text("config.json", &(cfg.to_json() + "\n"))?;
    println!("eps_max = {} dB", num(curve.eps_max));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_text_round_trips() {
        let c = vec![-1.999_84, 1.962_78, -1.555_3, 0.592_35];
        assert_eq!(parse_window(&format_window(&c)).unwrap(), c);
        assert_eq!(format_window(&[-1.0]), "P=1\nC=-1.0000000000000000e0\n");
        assert!(parse_window(&format_window(&[])).unwrap().is_empty());
    }

    #[test]
    fn malformed_window_files() {
        for text in ["P=2\nC=1.0\n", "C=1.0\n", "P=x\nC=\n", "P=1\nC=1.0\nQ=3\n"] {
            assert_eq!(parse_window(text).unwrap_err().exit_code(), 2, "{text:?}");
        }
    }
}
