//! Maximum-entropy Gaussian quadrature inference.
//!
//! Given per-sub-channel gain profiles `G_i(θ)` and measured lag-0 statistics
//! `A'_i`, find positive multipliers `λ_i` such that the reciprocal spectrum
//! `P(θ) = 1 / Σ_i G_i(θ) λ_i` reproduces the constraint integrals
//!
//! ```text
//! ω_i(λ) = (1/2π) ∫ G_i(θ) / Σ_u G_u(θ) λ_u dθ = A'_i .
//! ```
//!
//! The multipliers are found by minimizing `Θ(λ) = Σ_i (ω_i(λ) - A'_i)²`
//! with damped Gauss-Newton steps in `u = ln λ`, falling back to simplex
//! descent when a step cannot improve `Θ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::LogicalChannel;
use crate::error::{Error, Result};
use crate::grid::{ThetaGrid, SPECTRUM_FLOOR};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::spectral::PowerSpectrum;

/// Per-sub-channel gain functions on a shared grid, band-limited to `|θ| ≤ π/Ω`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    grid: ThetaGrid,
    omega: f64,
    gains: Vec<Vec<f64>>,
}

impl GainProfile {
    /// Samples `f(i, θ)` inside the band; points outside the band are zero.
    pub fn from_fn(
        grid: ThetaGrid,
        omega: f64,
        count: usize,
        f: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        check_omega(omega)?;
        let limit = PI / omega;
        let gains = (0..count)
            .map(|i| {
                grid.thetas()
                    .into_iter()
                    .map(|t| if in_band(t, limit) { f(i, t) } else { 0.0 })
                    .collect()
            })
            .collect();
        Self::from_values(grid, omega, gains)
    }

    pub fn from_values(grid: ThetaGrid, omega: f64, gains: Vec<Vec<f64>>) -> Result<Self> {
        check_omega(omega)?;
        if gains.is_empty() {
            return Err(Error::Usage("gain profile needs at least one sub-channel".into()));
        }
        let limit = PI / omega;
        for (i, g) in gains.iter().enumerate() {
            if g.len() != grid.len() {
                return Err(Error::Usage(format!(
                    "gain {i} has {} samples for a {}-point grid",
                    g.len(),
                    grid.len()
                )));
            }
            for (k, v) in g.iter().enumerate() {
                if !v.is_finite() || *v < 0.0 {
                    return Err(Error::Domain(format!("gain {i} is {v} at point {k}")));
                }
                if *v != 0.0 && !in_band(grid.theta(k), limit) {
                    return Err(Error::Domain(format!(
                        "gain {i} is nonzero outside the band at point {k}"
                    )));
                }
                let mirrored = g[grid.mirror(k)];
                if (v - mirrored).abs() > 1e-12 * (1.0 + v.abs()) {
                    return Err(Error::Domain(format!("gain {i} is not even at point {k}")));
                }
            }
        }
        Ok(Self { grid, omega, gains })
    }

    pub fn grid(&self) -> &ThetaGrid {
        &self.grid
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// `π/Ω`.
    pub fn band_limit(&self) -> f64 {
        PI / self.omega
    }

    /// Number of sub-channels `m`.
    pub fn count(&self) -> usize {
        self.gains.len()
    }

    pub fn gain(&self, i: usize) -> &[f64] {
        &self.gains[i]
    }

    pub fn is_informative(&self) -> bool {
        self.gains.iter().flatten().any(|v| *v > 0.0)
    }

    /// Grid points where at least one gain is positive. Outside this support
    /// the constraints carry no information and the inferred spectrum is zero.
    pub fn support(&self) -> Vec<usize> {
        (0..self.grid.len())
            .filter(|&k| self.gains.iter().any(|g| g[k] > 0.0))
            .collect()
    }
}

fn in_band(theta: f64, limit: f64) -> bool {
    theta.abs() <= limit * (1.0 + 1e-12)
}

fn check_omega(omega: f64) -> Result<()> {
    if !(omega >= 1.0) || !omega.is_finite() {
        return Err(Error::Config(format!("variance ratio Ω = {omega} must be ≥ 1")));
    }
    Ok(())
}

/// `G_i(θ) = |T_i|²` on `|θ| ≤ π/Ω`, zero outside.
pub fn build_gain_profile(
    channel: &LogicalChannel,
    omega: f64,
    grid: &ThetaGrid,
) -> Result<GainProfile> {
    let gains: Vec<f64> = channel.subchannels().iter().map(|s| s.power_gain()).collect();
    GainProfile::from_fn(*grid, omega, gains.len(), |i, _| gains[i])
}

/// Measured lag-0 targets `A'_i`, one per sub-channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    targets: Vec<f64>,
    measurements: usize,
}

impl ConstraintSet {
    pub fn new(targets: Vec<f64>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Usage("constraint set is empty".into()));
        }
        if let Some(i) = targets.iter().position(|a| !a.is_finite() || *a < 0.0) {
            return Err(Error::Precondition(format!(
                "lag-0 target {i} = {} must be finite and nonnegative",
                targets[i]
            )));
        }
        Ok(Self {
            targets,
            measurements: 1,
        })
    }

    /// Lag-0 sample autocorrelation (mean square) of each subcarrier's
    /// measured quadrature values.
    pub fn from_measurements(per_subcarrier: &[Vec<f64>]) -> Result<Self> {
        let targets = per_subcarrier
            .iter()
            .enumerate()
            .map(|(i, v)| {
                if v.is_empty() {
                    Err(Error::Usage(format!("subcarrier {i} has no measurements")))
                } else {
                    Ok(v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(targets)
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    /// Measurements per subcarrier `L`; always 1 here.
    pub fn measurements(&self) -> usize {
        self.measurements
    }
}

/// Result of the multiplier search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagrangianSet {
    pub lambdas: Vec<f64>,
    pub converged: bool,
    /// Final `Θ`.
    pub residual: f64,
    pub iterations: usize,
    /// `Θ` after every accepted step, starting with the initial point.
    pub theta_history: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub max_iterations: usize,
    pub theta_tol: f64,
    pub gradient_tol: f64,
    /// Bound on `|ln λ_i|`.
    pub log_bound: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            theta_tol: 1e-12,
            gradient_tol: 1e-10,
            log_bound: 30.0,
        }
    }
}

struct Problem<'a> {
    profile: &'a GainProfile,
    support: Vec<usize>,
    weights: Vec<f64>,
    targets: &'a [f64],
}

impl<'a> Problem<'a> {
    fn new(profile: &'a GainProfile, targets: &'a [f64]) -> Self {
        let support = profile.support();
        let weights = support
            .iter()
            .map(|&k| profile.grid.weight(k) / (2.0 * PI))
            .collect();
        Self {
            profile,
            support,
            weights,
            targets,
        }
    }

    fn denominators(&self, lambdas: &[f64]) -> Result<Vec<f64>> {
        self.support
            .iter()
            .map(|&k| {
                let d: f64 = self
                    .profile
                    .gains
                    .iter()
                    .zip(lambdas)
                    .map(|(g, l)| g[k] * l)
                    .sum();
                if d > SPECTRUM_FLOOR {
                    Ok(d)
                } else {
                    Err(Error::InfeasibleDenominator { index: k, value: d })
                }
            })
            .collect()
    }

    fn omegas_from(&self, den: &[f64]) -> Vec<f64> {
        self.profile
            .gains
            .iter()
            .map(|g| {
                self.support
                    .iter()
                    .zip(&self.weights)
                    .zip(den)
                    .map(|((&k, w), d)| w * g[k] / d)
                    .sum()
            })
            .collect()
    }

    fn theta(&self, lambdas: &[f64]) -> Result<f64> {
        let den = self.denominators(lambdas)?;
        Ok(self
            .omegas_from(&den)
            .iter()
            .zip(self.targets)
            .map(|(w, a)| (w - a) * (w - a))
            .sum())
    }

    /// Residuals and Jacobian with respect to `u = ln λ`.
    fn linearize(&self, lambdas: &[f64]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        let m = lambdas.len();
        let den = self.denominators(lambdas)?;
        let om = self.omegas_from(&den);
        let r = DVector::from_iterator(m, om.iter().zip(self.targets).map(|(w, a)| w - a));
        let mut jac = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let gi = &self.profile.gains[i];
                let gj = &self.profile.gains[j];
                let s: f64 = self
                    .support
                    .iter()
                    .zip(&self.weights)
                    .zip(&den)
                    .map(|((&k, w), d)| w * gi[k] * gj[k] / (d * d))
                    .sum();
                jac[(i, j)] = -s;
                jac[(j, i)] = -s;
            }
        }
        for (j, l) in lambdas.iter().enumerate() {
            jac.column_mut(j).scale_mut(*l);
        }
        Ok((r, jac))
    }

    /// Convex dual `Ψ(λ) = Σ λ_i A'_i - (1/2π) ∫ ln Σ_u G_u λ_u`, whose
    /// gradient is `A' - ω(λ)`.
    fn dual(&self, lambdas: &[f64]) -> Result<f64> {
        let den = self.denominators(lambdas)?;
        let linear: f64 = lambdas.iter().zip(self.targets).map(|(l, a)| l * a).sum();
        let log: f64 = den.iter().zip(&self.weights).map(|(d, w)| w * d.ln()).sum();
        Ok(linear - log)
    }

    /// Gram matrix `(1/2π) ∫ G_i G_j / D²`, the Hessian of the dual.
    fn hessian(&self, den: &[f64]) -> DMatrix<f64> {
        let m = self.profile.count();
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let gi = &self.profile.gains[i];
                let gj = &self.profile.gains[j];
                let s: f64 = self
                    .support
                    .iter()
                    .zip(&self.weights)
                    .zip(den)
                    .map(|((&k, w), d)| w * gi[k] * gj[k] / (d * d))
                    .sum();
                h[(i, j)] = s;
                h[(j, i)] = s;
            }
        }
        h
    }

    /// Damped Newton descent on the dual over its natural domain, where every
    /// denominator is positive, with multipliers capped at `hi`. Returns the
    /// final point and the number of steps taken.
    fn dual_descent(&self, start: &[f64], hi: f64, max_steps: usize) -> (Vec<f64>, usize) {
        let m = start.len();
        let mut lam = start.to_vec();
        let Ok(mut psi) = self.dual(&lam) else {
            return (lam, 0);
        };
        let scale: f64 = 1.0 + self.targets.iter().map(|a| a.abs()).sum::<f64>();
        let mut steps = 0;
        while steps < max_steps {
            let Ok(den) = self.denominators(&lam) else { break };
            let om = self.omegas_from(&den);
            let grad = DVector::from_iterator(m, self.targets.iter().zip(&om).map(|(a, w)| a - w));
            if grad.norm() < 1e-15 * scale {
                break;
            }
            let mut h = self.hessian(&den);
            let ridge = 1e-13 * (h.trace() / m as f64).max(1e-300);
            for d in 0..m {
                h[(d, d)] += ridge;
            }
            let Some(dir) = h.cholesky().map(|c| c.solve(&(-&grad))) else { break };
            let mut t: f64 = 1.0;
            for (l, d) in lam.iter().zip(dir.iter()) {
                if *d > 0.0 {
                    t = t.min((hi - l) / d);
                }
            }
            let slope = grad.dot(&dir);
            let g_norm = grad.norm();
            let grad_norm_at = |c: &[f64]| {
                self.denominators(c).map(|den| {
                    let om = self.omegas_from(&den);
                    self.targets.iter().zip(&om).map(|(a, w)| (a - w) * (a - w)).sum::<f64>().sqrt()
                })
            };
            let mut accepted = false;
            while t > 1e-14 {
                let cand: Vec<f64> = lam.iter().zip(dir.iter()).map(|(l, d)| l + t * d).collect();
                if let Ok(v) = self.dual(&cand) {
                    let armijo = v < psi && v <= psi + 1e-4 * t * slope;
                    // near the minimum Ψ no longer resolves progress; the gradient still does
                    if armijo || grad_norm_at(&cand).is_ok_and(|g| g < 0.5 * g_norm) {
                        lam = cand;
                        psi = v;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            steps += 1;
            if !accepted {
                break;
            }
        }
        (lam, steps)
    }

    /// Orthonormal basis of multiplier directions that leave every
    /// denominator unchanged.
    fn null_directions(&self) -> Vec<DVector<f64>> {
        let m = self.profile.count();
        let mut gram = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let s: f64 = self
                    .support
                    .iter()
                    .zip(&self.weights)
                    .map(|(&k, w)| w * self.profile.gains[i][k] * self.profile.gains[j][k])
                    .sum();
                gram[(i, j)] = s;
                gram[(j, i)] = s;
            }
        }
        let eig = gram.symmetric_eigen();
        let top = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        (0..m)
            .filter(|&c| eig.eigenvalues[c] <= 1e-10 * top)
            .map(|c| eig.eigenvectors.column(c).into_owned())
            .collect()
    }
}

/// `ω_i(λ)`, the constraint integral of sub-channel `i`.
pub fn constraint_integral(lambdas: &[f64], profile: &GainProfile, i: usize) -> Result<f64> {
    Ok(constraint_integrals(lambdas, profile)?[i])
}

/// All constraint integrals `ω_0..ω_{m-1}`.
pub fn constraint_integrals(lambdas: &[f64], profile: &GainProfile) -> Result<Vec<f64>> {
    check_lengths(lambdas.len(), profile)?;
    let problem = Problem::new(profile, &[]);
    let den = problem.denominators(lambdas)?;
    Ok(problem.omegas_from(&den))
}

/// `Θ(λ) = Σ (ω_i(λ) - A'_i)²`.
pub fn objective(lambdas: &[f64], targets: &ConstraintSet, profile: &GainProfile) -> Result<f64> {
    check_lengths(lambdas.len(), profile)?;
    check_lengths(targets.targets.len(), profile)?;
    Problem::new(profile, &targets.targets).theta(lambdas)
}

fn check_lengths(len: usize, profile: &GainProfile) -> Result<()> {
    if len != profile.count() {
        return Err(Error::Usage(format!(
            "{len} values for {} sub-channels",
            profile.count()
        )));
    }
    Ok(())
}

/// Solves for the multipliers from the default starting point.
pub fn solve_lagrangians(targets: &ConstraintSet, profile: &GainProfile) -> Result<LagrangianSet> {
    solve_lagrangians_with(targets, profile, None, SolverOptions::default())
}

/// Solves for the multipliers, optionally from a caller-supplied positive start.
///
/// A damped Newton descent on the convex dual `Ψ` first moves the start to
/// the point where `ω = A'` when one exists. Damped Gauss-Newton steps on
/// `Θ` in `u = ln λ` follow, with simplex descent as a fallback when a step
/// cannot improve `Θ`. `theta_history` covers this least-squares stage.
///
/// The default start sets every multiplier to the common value that matches
/// `Σ ω_i` to `Σ A'_i`. When the gain matrix has a null space the
/// multipliers are only determined up to it; the minimum-norm representative
/// is returned whenever it stays positive.
pub fn solve_lagrangians_with(
    targets: &ConstraintSet,
    profile: &GainProfile,
    init: Option<&[f64]>,
    opts: SolverOptions,
) -> Result<LagrangianSet> {
    let m = profile.count();
    check_lengths(targets.targets.len(), profile)?;
    if !profile.is_informative() {
        return Err(Error::NoInformation);
    }
    let problem = Problem::new(profile, &targets.targets);

    let start: Vec<f64> = match init {
        Some(l) => {
            check_lengths(l.len(), profile)?;
            if l.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::Precondition("initial multipliers must be positive".into()));
            }
            l.to_vec()
        }
        None => {
            let unit = problem.omegas_from(&problem.denominators(&vec![1.0; m])?);
            let total: f64 = targets.targets.iter().sum();
            let c = if total > 0.0 {
                unit.iter().sum::<f64>() / total
            } else {
                1.0
            };
            vec![c; m]
        }
    };

    let bound = opts.log_bound;
    let clamp = |u: f64| u.clamp(-bound, bound);
    let lam = |u: &[f64]| -> Vec<f64> { u.iter().map(|v| v.exp()).collect() };
    let mut start: Vec<f64> = start.iter().map(|l| clamp(l.ln()).exp()).collect();
    // huge targets put the natural start below the denominator floor; lift it
    // until the integrals exist, the search then reports the stall itself
    for _ in 0..(4.0 * bound) as usize {
        if problem.denominators(&start).is_ok() {
            break;
        }
        start = start.iter().map(|l| clamp((2.0 * l).ln()).exp()).collect();
    }

    // the dual is convex, so its descent reaches the feasible fixed point from
    // any start; least squares then takes over for infeasible targets
    let (dual_point, dual_steps) =
        problem.dual_descent(&start, bound.exp(), opts.max_iterations / 2);
    let start_theta = problem.theta(&start)?;
    let positive = dual_point.iter().all(|l| *l > 0.0);
    let mut u: Vec<f64> = match problem.theta(&dual_point) {
        Ok(t) if positive && t <= start_theta => dual_point.iter().map(|l| clamp(l.ln())).collect(),
        _ => start.iter().map(|l| l.ln()).collect(),
    };

    let mut theta = problem.theta(&lam(&u))?;
    let mut history = vec![theta];
    let mut mu = 1e-3;
    let mut iterations = dual_steps;
    let mut fallbacks = 0;
    let mut grad_norm = f64::INFINITY;

    while iterations < opts.max_iterations && theta > 1e-30 {
        iterations += 1;
        let (r, jac) = problem.linearize(&lam(&u))?;
        let jt = jac.transpose();
        let grad = &jt * &r;
        grad_norm = 2.0 * grad.norm();
        if grad_norm < 1e-18 {
            break;
        }
        let jtj = &jt * &jac;
        let mut a = jtj.clone();
        for d in 0..m {
            a[(d, d)] += mu * jtj[(d, d)].max(1e-12);
        }
        // J is square, so the undamped step solves J s = -r directly and
        // avoids the squared conditioning of the normal equations
        let newton = jac.clone().lu().solve(&(-&r));
        let damped = || {
            a.clone()
                .cholesky()
                .map(|c| c.solve(&(-&grad)))
                .or_else(|| a.clone().lu().solve(&(-&grad)))
        };

        let mut improved = false;
        let mut moved = f64::INFINITY;
        for step in [newton, damped()].into_iter().flatten() {
            let cand: Vec<f64> = u.iter().zip(step.iter()).map(|(a, b)| clamp(a + b)).collect();
            if let Ok(t) = problem.theta(&lam(&cand)) {
                if t < theta {
                    moved = cand
                        .iter()
                        .zip(&u)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0, f64::max);
                    u = cand;
                    theta = t;
                    history.push(theta);
                    mu = (mu * 0.3).max(1e-12);
                    improved = true;
                    break;
                }
            }
        }
        if improved {
            if moved < 1e-15 {
                break;
            }
            continue;
        }
        mu *= 10.0;
        if mu > 1e12 {
            if theta <= opts.theta_tol || fallbacks >= 3 {
                break;
            }
            fallbacks += 1;
            let simplex = nelder_mead(
                |x| {
                    let c: Vec<f64> = x.iter().map(|v| clamp(*v)).collect();
                    problem.theta(&lam(&c)).unwrap_or(f64::INFINITY)
                },
                &u,
                SimplexOptions {
                    max_evals: 400,
                    initial_step: 0.05,
                    ..Default::default()
                },
            );
            if simplex.value < theta {
                u = simplex.x.iter().map(|v| clamp(*v)).collect();
                theta = simplex.value;
                history.push(theta);
                mu = 1e-3;
            } else {
                break;
            }
        }
    }

    let mut lambdas = lam(&u);
    let nulls = problem.null_directions();
    if !nulls.is_empty() {
        let mut v = DVector::from_column_slice(&lambdas);
        for n in &nulls {
            let c = n.dot(&v);
            v -= n * c;
        }
        if v.iter().all(|l| *l > 0.0 && l.ln().abs() <= bound) {
            if let Ok(t) = problem.theta(v.as_slice()) {
                if t <= theta * (1.0 + 1e-9) + 1e-30 {
                    lambdas = v.as_slice().to_vec();
                    theta = t;
                }
            }
        }
    }

    let at_bound = lambdas.iter().any(|l| l.ln().abs() >= bound * (1.0 - 1e-12));
    let converged = !at_bound && (theta < opts.theta_tol || grad_norm < opts.gradient_tol);
    if !converged {
        log::debug!("multiplier search stopped at Θ = {theta:e} after {iterations} iterations");
    }
    Ok(LagrangianSet {
        lambdas,
        converged,
        residual: theta,
        iterations,
        theta_history: history,
    })
}

/// Inferred spectrum `|1 / Σ_i G_i(θ) λ_i|` on the support, zero elsewhere.
pub fn inferred_spectrum(lambdas: &[f64], profile: &GainProfile) -> Result<PowerSpectrum> {
    check_lengths(lambdas.len(), profile)?;
    let problem = Problem::new(profile, &[]);
    let den = problem.denominators(lambdas)?;
    let mut values = vec![0.0; profile.grid.len()];
    for (&k, d) in problem.support.iter().zip(&den) {
        values[k] = (1.0 / d).abs();
    }
    PowerSpectrum::new(profile.grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::SubChannel;
    use approx::assert_abs_diff_eq;

    fn grid() -> ThetaGrid {
        ThetaGrid::new(1025).unwrap()
    }

    fn flat(gains: &[f64]) -> GainProfile {
        GainProfile::from_fn(grid(), 1.0, gains.len(), |i, _| gains[i]).unwrap()
    }

    #[test]
    fn gain_profile_examples() {
        let ch = LogicalChannel::uniform(0, SubChannel::with_power_gain(0.5, 0.1).unwrap(), 1).unwrap();
        let p = build_gain_profile(&ch, 1.0, &grid()).unwrap();
        assert!(p.gain(0).iter().all(|g| (g - 0.5).abs() < 1e-15));

        let ch = LogicalChannel::uniform(0, SubChannel::with_power_gain(1.0, 0.0).unwrap(), 1).unwrap();
        let p = build_gain_profile(&ch, 2.0, &grid()).unwrap();
        for (k, t) in grid().thetas().iter().enumerate() {
            let want = if t.abs() <= PI / 2.0 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(p.gain(0)[k], want, epsilon = 1e-15);
        }

        let ch = LogicalChannel::uniform(0, SubChannel::symmetric(0.0, 0.1).unwrap(), 2).unwrap();
        let p = build_gain_profile(&ch, 1.0, &grid()).unwrap();
        assert!(!p.is_informative());
        let t = ConstraintSet::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(solve_lagrangians(&t, &p), Err(Error::NoInformation));

        assert!(matches!(
            build_gain_profile(&ch, 0.5, &grid()),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn unreachable_target_stalls_without_error() {
        let p = flat(&[1.0]);
        let t = ConstraintSet::new(vec![1e20]).unwrap();
        let sol = solve_lagrangians(&t, &p).unwrap();
        assert!(!sol.converged);
        assert!(sol.residual > 1e30);
        assert!(inferred_spectrum(&sol.lambdas, &p).is_ok());
    }

    #[test]
    fn constraint_integral_examples() {
        let p = flat(&[0.7]);
        assert_abs_diff_eq!(constraint_integral(&[2.5], &p, 0).unwrap(), 1.0 / 2.5, epsilon = 1e-12);
        let p = flat(&[1.0, 1.0]);
        for i in 0..2 {
            assert_abs_diff_eq!(constraint_integral(&[1.0, 1.0], &p, i).unwrap(), 0.5, epsilon = 1e-12);
        }
        assert!(matches!(
            constraint_integral(&[0.0, 0.0], &p, 0),
            Err(Error::InfeasibleDenominator { .. })
        ));
    }

    #[test]
    fn solve_single_closed_form() {
        let p = flat(&[0.5]);
        let t = ConstraintSet::new(vec![2.0]).unwrap();
        let sol = solve_lagrangians(&t, &p).unwrap();
        assert!(sol.converged);
        assert!(sol.residual < 1e-12);
        assert_abs_diff_eq!(sol.lambdas[0], 0.5, epsilon = 1e-9);
        let s = inferred_spectrum(&sol.lambdas, &p).unwrap();
        assert!(s.values().iter().all(|v| (v - 4.0).abs() < 1e-8));
    }

    #[test]
    fn solve_symmetric_pair() {
        let p = flat(&[1.0, 1.0]);
        let t = ConstraintSet::new(vec![0.5, 0.5]).unwrap();
        let sol = solve_lagrangians_with(&t, &p, Some(&[0.3, 2.0]), SolverOptions::default()).unwrap();
        assert!(sol.converged);
        assert_abs_diff_eq!(sol.lambdas[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.lambdas[1], 1.0, epsilon = 1e-9);
        let s = inferred_spectrum(&sol.lambdas, &p).unwrap();
        assert!(s.values().iter().all(|v| (v - 0.5).abs() < 1e-8));
    }

    #[test]
    fn infeasible_targets_report_positive_residual() {
        let p = flat(&[1.0, 1.0]);
        let t = ConstraintSet::new(vec![0.0, 1.0]).unwrap();
        let sol = solve_lagrangians(&t, &p).unwrap();
        assert_abs_diff_eq!(sol.residual, 0.5, epsilon = 1e-9);

        let p = flat(&[0.8]);
        let t = ConstraintSet::new(vec![0.0]).unwrap();
        let sol = solve_lagrangians(&t, &p).unwrap();
        assert!(sol.residual > 0.0);
        assert!(sol.lambdas[0].is_finite());
    }

    #[test]
    fn spectrum_scales_inversely_with_multipliers() {
        let p = GainProfile::from_fn(grid(), 1.0, 2, |i, t| 1.0 + 0.5 * ((i + 1) as f64 * t).cos()).unwrap();
        let a = inferred_spectrum(&[0.4, 0.9], &p).unwrap();
        let b = inferred_spectrum(&[1.2, 2.7], &p).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_abs_diff_eq!(x / 3.0, *y, epsilon = 1e-14);
        }
    }

    #[test]
    fn out_of_band_spectrum_is_zero() {
        let p = GainProfile::from_fn(grid(), 2.0, 1, |_, _| 1.0).unwrap();
        let s = inferred_spectrum(&[2.0], &p).unwrap();
        for (t, v) in grid().thetas().iter().zip(s.values()) {
            if t.abs() > PI / 2.0 + 1e-9 {
                assert_eq!(*v, 0.0);
            } else {
                assert_abs_diff_eq!(*v, 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn zero_gain_subchannel_stays_stable() {
        let p = GainProfile::from_fn(grid(), 1.0, 3, |i, t| match i {
            0 => 1.0 + 0.3 * t.cos(),
            1 => 0.0,
            _ => 0.6 + 0.2 * (2.0 * t).cos(),
        })
        .unwrap();
        let t = ConstraintSet::new(vec![0.8, 0.3, 0.5]).unwrap();
        let sol = solve_lagrangians(&t, &p).unwrap();
        assert!(sol.lambdas.iter().all(|l| l.is_finite() && *l > 0.0));
        assert!(sol.theta_history.windows(2).all(|w| w[1] <= w[0]));
        // the zero-gain residual A'_1 = 0.3 can never be matched
        assert!(sol.residual >= 0.3 * 0.3 - 1e-9);
    }

    #[test]
    fn measurement_targets_are_mean_squares() {
        let c = ConstraintSet::from_measurements(&[vec![1.0, -1.0], vec![2.0]]).unwrap();
        assert_eq!(c.targets(), &[1.0, 4.0]);
        assert_eq!(c.measurements(), 1);
        assert!(ConstraintSet::from_measurements(&[vec![]]).is_err());
        assert!(ConstraintSet::new(vec![-1.0]).is_err());
    }
}
