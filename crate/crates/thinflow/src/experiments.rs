//! Paired Euler/Navier-Stokes runs, viscosity pairing, dissipation scaling,
//! palinstrophy growth and the trivial-dissipation control.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thinflow_core::fit::{linear_fit, log_log_fit, LinearFit};
use thinflow_core::initial_data::assemble_omega0;
use thinflow_core::solver::Diagnostics;
use thinflow_core::{BubbleConfig, Error, FlowState, Solver, SolverConfig, Spectral, SpectralScalarField};

use crate::config::{PairingRule, RunConfig};
use crate::error::{Result, ThinflowError};
use crate::fft;

/// `N(n) = 2^{n + offset}` clamped to `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub offset: u32,
    pub min: usize,
    pub max: usize,
}

impl GridPolicy {
    /// Grid for level `n`; fails when the clamped size cannot hold `cfg`.
    pub fn size(&self, n: u32, cfg: &BubbleConfig) -> Result<usize> {
        let raw = 1usize.checked_shl(n + self.offset).unwrap_or(usize::MAX);
        let size = raw.clamp(self.min, self.max).next_power_of_two();
        let required = cfg.required_size();
        if size < required {
            return Err(Error::UnderResolved { size, required }.into());
        }
        Ok(size)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Pairing {
    /// `ν = prefactor · 2^{-c n}`.
    Explicit { c: f64, prefactor: f64 },
    /// Search `ν ∈ [nu_min, nu_max]` until the terminal H¹ gap lies in `[κ/2, κ]`.
    GapTargeted { kappa: f64, nu_min: f64, nu_max: f64, max_iterations: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub n_list: Vec<u32>,
    pub pairing: Pairing,
    pub t_end: f64,
    pub grid: GridPolicy,
    /// Template; `n` is replaced per run.
    pub bubble: BubbleConfig,
    /// Small blob at level `n + blob_offset`; `None` keeps the template's level.
    pub blob_offset: Option<u32>,
    pub solver: SolverConfig,
    pub workers: usize,
}

impl ExperimentPlan {
    pub fn from_config(cfg: &RunConfig) -> Self {
        let p = &cfg.plan;
        let pairing = match p.pairing {
            PairingRule::Explicit => Pairing::Explicit { c: p.c, prefactor: p.prefactor },
            PairingRule::GapTargeted => Pairing::GapTargeted {
                kappa: p.kappa,
                nu_min: p.nu_min,
                nu_max: p.nu_max,
                max_iterations: p.max_iterations,
            },
        };
        ExperimentPlan {
            n_list: p.n_list.clone(),
            pairing,
            t_end: p.t_end,
            grid: GridPolicy { offset: p.grid_offset, min: p.grid_min, max: p.grid_max },
            bubble: cfg.bubble.to_core(),
            blob_offset: p.blob_offset,
            solver: cfg.solver.to_core(),
            workers: p.workers.max(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("the plan's n_list is empty").into());
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig("the plan's t_end must be positive").into());
        }
        self.solver.validate()?;
        for &n in &self.n_list {
            let b = self.bubble_for(n);
            b.validate()?;
            self.grid.size(n, &b)?;
        }
        Ok(())
    }

    pub fn bubble_for(&self, n: u32) -> BubbleConfig {
        let mut b = self.bubble;
        b.n = n;
        if let Some(off) = self.blob_offset {
            b.small_scale_index = Some(n + off);
        }
        b
    }

    pub fn omega0(&self, n: u32) -> Result<SpectralScalarField> {
        let b = self.bubble_for(n);
        b.validate()?;
        let spectral = fft::spectral(self.grid.size(n, &b)?)?;
        Ok(assemble_omega0(&b, &spectral)?)
    }
}

/// Gaps between the paired runs and the viscous budget terms at one time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSample {
    pub t: f64,
    /// `‖u^ν − u‖_{L²}`.
    pub velocity_gap: f64,
    /// `‖ω^ν − ω‖_{L²}`.
    pub vorticity_gap: f64,
    /// `‖∇(ω^ν − ω)‖_{L²}`.
    pub gradient_gap: f64,
    /// `‖ω^ν‖²_{L²}`.
    pub enstrophy: f64,
    /// `‖∇ω^ν‖_{L²}`.
    pub palinstrophy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissipationRecord {
    pub n: u32,
    pub nu: f64,
    pub t_end: f64,
    pub grid: usize,
    /// `ν (1/T) ∫₀ᵀ ‖∇ω^ν‖² dt`, from the solver's per-step quadrature.
    pub chi: f64,
    /// `(1/T) ∫₀ᵀ ‖∇ω^ν‖² dt` by the trapezoid rule on the samples.
    pub mean_palinstrophy_sq: f64,
    pub enstrophy_initial: f64,
    pub enstrophy_final: f64,
    /// `|χT − ½(‖ω₀‖² − ‖ω(T)‖²)| / χT` (absolute when `χT = 0`).
    pub budget_residual: f64,
    /// Earliest loss of resolution in either run.
    pub resolved_until: Option<f64>,
    pub samples: Vec<PairSample>,
}

impl DissipationRecord {
    pub fn terminal(&self) -> &PairSample {
        self.samples.last().expect("a record always holds its initial sample")
    }
}

/// A paired run with its final states.
pub struct PairRun {
    pub record: DissipationRecord,
    pub euler: FlowState,
    pub viscous: FlowState,
}

fn pair_sample(s: &Spectral, e: &FlowState, v: &FlowState) -> PairSample {
    let d: Vec<_> = v.omega_coeffs().iter().zip(e.omega_coeffs()).map(|(a, b)| a - b).collect();
    PairSample {
        t: v.t(),
        velocity_gap: s.energy_from_vorticity(&d).sqrt(),
        vorticity_gap: s.l2_squared(&d).sqrt(),
        gradient_gap: s.h1_seminorm_squared(&d).sqrt(),
        enstrophy: v.enstrophy(),
        palinstrophy: v.palinstrophy_squared().sqrt(),
    }
}

/// Evolve Euler and Navier-Stokes from `omega0` with a shared step sequence,
/// sampling on the solver cadence.
pub fn run_pair_field(omega0: &SpectralScalarField, nu: f64, t_end: f64, cfg: &SolverConfig) -> Result<PairRun> {
    if !(nu >= 0.0 && t_end >= 0.0) {
        return Err(Error::InvalidConfig("viscosity and horizon must be nonnegative").into());
    }
    cfg.validate()?;
    let spectral = omega0.spectral().clone();
    let mut se = Solver::new(&spectral, *cfg)?;
    let mut sv = Solver::new(&spectral, *cfg)?;
    let mut e = FlowState::new(omega0.clone(), 0.0)?;
    let mut v = FlowState::new(omega0.clone(), nu)?;
    let mut samples = vec![pair_sample(&spectral, &e, &v)];
    let mut j = 1u64;
    loop {
        let t = v.t();
        if t >= t_end {
            break;
        }
        let goal = (j as f64 * cfg.cadence).min(t_end);
        let limit = se.cfl_dt(&e).min(sv.cfl_dt(&v));
        let dt = match cfg.fixed_dt {
            Some(dt) if dt > limit * (1.0 + 1e-12) => return Err(Error::CflViolation { dt, limit }.into()),
            Some(dt) => dt,
            None => limit,
        };
        let remaining = goal - t;
        if dt >= remaining * (1.0 - 1e-9) {
            se.step(&mut e, remaining)?;
            sv.step(&mut v, remaining)?;
            e = e.with_time(goal);
            v = v.with_time(goal);
            samples.push(pair_sample(&spectral, &e, &v));
            j += 1;
        } else {
            se.step(&mut e, dt)?;
            sv.step(&mut v, dt)?;
        }
    }
    let mean_palinstrophy_sq = if t_end > 0.0 {
        trapezoid(samples.iter().map(|s| (s.t, s.palinstrophy * s.palinstrophy))) / t_end
    } else {
        samples[0].palinstrophy.powi(2)
    };
    let chi_t = v.dissipated();
    let enstrophy_initial = samples[0].enstrophy;
    let enstrophy_final = v.enstrophy();
    let budget = 0.5 * (enstrophy_initial - enstrophy_final);
    let budget_residual = if chi_t > 0.0 { (chi_t - budget).abs() / chi_t } else { budget.abs() };
    let resolved_until = match (e.unresolved_since(), v.unresolved_since()) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let record = DissipationRecord {
        n: 0,
        nu,
        t_end,
        grid: spectral.size(),
        chi: if t_end > 0.0 { chi_t / t_end } else { 0.0 },
        mean_palinstrophy_sq,
        enstrophy_initial,
        enstrophy_final,
        budget_residual,
        resolved_until,
        samples,
    };
    Ok(PairRun { record, euler: e, viscous: v })
}

/// Paired run on the plan's bubble data at level `n`.
pub fn run_pair(n: u32, nu: f64, plan: &ExperimentPlan) -> Result<DissipationRecord> {
    let omega0 = plan.omega0(n)?;
    let mut record = run_pair_field(&omega0, nu, plan.t_end, &plan.solver)?.record;
    record.n = n;
    Ok(record)
}

fn trapezoid(points: impl Iterator<Item = (f64, f64)>) -> f64 {
    let mut acc = 0.0;
    let mut prev: Option<(f64, f64)> = None;
    for (t, y) in points {
        if let Some((t0, y0)) = prev {
            acc += 0.5 * (t - t0) * (y + y0);
        }
        prev = Some((t, y));
    }
    acc
}

/// Outcome of pairing one `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingOutcome {
    pub n: u32,
    pub nu: f64,
    /// `(ν, terminal H¹ gap)` of every paired run tried, in order.
    pub evaluations: Vec<(f64, f64)>,
    pub record: DissipationRecord,
}

/// `ν` for level `n`. The gap-targeted rule brackets `ln ν` and steps by the
/// log-log secant, falling back to bisection when the secant is not safely
/// inside the bracket.
pub fn pair_viscosity(n: u32, plan: &ExperimentPlan) -> Result<PairingOutcome> {
    match plan.pairing {
        Pairing::Explicit { c, prefactor } => {
            let nu = explicit_viscosity(n, c, prefactor);
            let record = run_pair(n, nu, plan)?;
            let g = record.terminal().gradient_gap;
            Ok(PairingOutcome { n, nu, evaluations: vec![(nu, g)], record })
        }
        Pairing::GapTargeted { kappa, nu_min, nu_max, max_iterations } => {
            let guess = explicit_viscosity(n, 4.0, 1.0).clamp(nu_min, nu_max);
            gap_targeted(kappa, nu_min, nu_max, max_iterations, guess, |nu| run_pair(n, nu, plan)).map(
                |(nu, evaluations, record)| PairingOutcome { n, nu, evaluations, record },
            )
        }
    }
}

pub fn explicit_viscosity(n: u32, c: f64, prefactor: f64) -> f64 {
    prefactor * (-c * n as f64).exp2()
}

type Search = (f64, Vec<(f64, f64)>, DissipationRecord);

/// Root search of `ln gap(ln ν) = ln(κ/√2)` accepting any gap in `[κ/2, κ]`.
pub fn gap_targeted(
    kappa: f64,
    nu_min: f64,
    nu_max: f64,
    max_iterations: usize,
    first: f64,
    mut eval: impl FnMut(f64) -> Result<DissipationRecord>,
) -> Result<Search> {
    if !(kappa > 0.0 && nu_min > 0.0 && nu_min < nu_max) {
        return Err(Error::InvalidConfig("gap targeting needs kappa > 0 and 0 < nu_min < nu_max").into());
    }
    let (x_min, x_max) = (nu_min.ln(), nu_max.ln());
    let target = (kappa / std::f64::consts::SQRT_2).ln();
    // (ln ν, ln gap) with the gap below / above the band
    let mut lo: Option<(f64, f64)> = None;
    let mut hi: Option<(f64, f64)> = None;
    let mut evaluations = Vec::new();
    let mut x = first.clamp(nu_min, nu_max).ln();
    for _ in 0..max_iterations.max(1) {
        let nu = x.exp();
        let record = eval(nu)?;
        let gap = record.terminal().gradient_gap;
        evaluations.push((nu, gap));
        if (0.5 * kappa..=kappa).contains(&gap) {
            return Ok((nu, evaluations, record));
        }
        let y = gap.max(f64::MIN_POSITIVE).ln();
        let not_monotone = || {
            ThinflowError::Bisection(format!("terminal H1 gap is not monotone in nu near nu = {nu:.6e}"))
        };
        if gap < 0.5 * kappa {
            if hi.is_some_and(|(xh, yh)| xh < x && yh > y) || lo.is_some_and(|(xl, yl)| xl > x && yl < y) {
                return Err(not_monotone());
            }
            if lo.is_none_or(|(xl, _)| x > xl) {
                lo = Some((x, y));
            }
        } else {
            if lo.is_some_and(|(xl, yl)| xl > x && yl < y) || hi.is_some_and(|(xh, yh)| xh < x && yh > y) {
                return Err(not_monotone());
            }
            if hi.is_none_or(|(xh, _)| x < xh) {
                hi = Some((x, y));
            }
        }
        x = match (lo, hi) {
            (Some((xl, yl)), Some((xh, yh))) => {
                let s = xl + (target - yl) * (xh - xl) / (yh - yl);
                let margin = 0.05 * (xh - xl);
                if s.is_finite() && s > xl + margin && s < xh - margin {
                    s
                } else {
                    0.5 * (xl + xh)
                }
            }
            (Some((xl, yl)), None) => {
                if xl >= x_max {
                    return Err(ThinflowError::Bisection(format!(
                        "terminal H1 gap {gap:.3e} at nu_max stays below kappa/2"
                    )));
                }
                // the gap is close to linear in ν for small ν
                (xl + (target - yl).min(8.0)).min(x_max)
            }
            (None, Some((xh, yh))) => {
                if xh <= x_min {
                    return Err(ThinflowError::Bisection(format!(
                        "terminal H1 gap {gap:.3e} at nu_min stays above kappa"
                    )));
                }
                (xh + (target - yh).max(-8.0)).max(x_min)
            }
            (None, None) => unreachable!("every evaluation lands on one side of the band"),
        };
    }
    Err(ThinflowError::Bisection(format!("no nu with terminal H1 gap in [{}, {kappa}] after {} runs", 0.5 * kappa, evaluations.len())))
}

/// Time series and log-log fit of `‖∇ω(t)‖_{L²}` against `S_n t`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthReport {
    pub s_n: f64,
    /// `(t, ‖∇ω‖_{L²})`.
    pub samples: Vec<(f64, f64)>,
    /// Fit over `[t_lo, t_hi]`; `None` with fewer than 3 samples there.
    pub fit: Option<LinearFit>,
    pub window: (f64, f64),
    /// `(1/T) ∫₀ᵀ ‖∇ω‖² dt`.
    pub mean_square: f64,
    /// Nondecreasing over the resolved part of the run.
    pub increasing: bool,
    pub resolved_until: Option<f64>,
}

impl GrowthReport {
    /// Fit on `[t_lo, t_hi]`, clipped to the resolved window.
    pub fn from_diagnostics(
        s_n: f64,
        diagnostics: &[Diagnostics],
        t_lo: f64,
        t_hi: f64,
        resolved_until: Option<f64>,
    ) -> Self {
        let samples: Vec<(f64, f64)> = diagnostics.iter().map(|d| (d.t, d.palinstrophy)).collect();
        let t_res = resolved_until.unwrap_or(f64::INFINITY);
        let hi = t_hi.min(t_res);
        let (x, y): (Vec<f64>, Vec<f64>) = samples
            .iter()
            .filter(|(t, _)| *t >= t_lo && *t <= hi && *t > 0.0)
            .map(|&(t, p)| (s_n * t, p))
            .unzip();
        let fit = if x.len() >= 3 { log_log_fit(&x, &y).ok() } else { None };
        let t_end = samples.last().map_or(0.0, |s| s.0);
        let mean_square = if t_end > 0.0 {
            trapezoid(samples.iter().map(|&(t, p)| (t, p * p))) / t_end
        } else {
            samples.first().map_or(0.0, |s| s.1 * s.1)
        };
        let resolved: Vec<f64> = samples.iter().filter(|s| s.0 <= t_res).map(|s| s.1).collect();
        let increasing = resolved.windows(2).all(|w| w[1] >= w[0]);
        GrowthReport { s_n, samples, fit, window: (t_lo, hi), mean_square, increasing, resolved_until }
    }

    pub fn exponent(&self) -> Option<f64> {
        self.fit.map(|f| f.slope)
    }
}

/// Euler run of the bubble data on an `size`-grid, fitted over
/// `[t_lo, t_end]`.
pub fn palinstrophy_growth(
    cfg: &BubbleConfig,
    size: usize,
    solver: &SolverConfig,
    t_end: f64,
    t_lo: f64,
) -> Result<GrowthReport> {
    cfg.validate()?;
    if size < cfg.required_size() {
        return Err(Error::UnderResolved { size, required: cfg.required_size() }.into());
    }
    let spectral = fft::spectral(size)?;
    let omega0 = assemble_omega0(cfg, &spectral)?;
    let mut state = FlowState::new(omega0, 0.0)?;
    let mut log = thinflow_core::solver::DiagnosticsLog::default();
    log.samples.push(state.diagnostics());
    Solver::new(&spectral, *solver)?.run(&mut state, t_end, &mut log)?;
    let s_n = cfg.partial_sums().get(cfg.n);
    Ok(GrowthReport::from_diagnostics(s_n, &log.samples, t_lo, t_end, state.unresolved_since()))
}

/// Result of [`dissipation_scaling`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    /// `(ν, χ)` sorted by `ν`.
    pub points: Vec<(f64, f64)>,
    /// Slope of `ln χ` against `ln ν`.
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub slope_ci: [f64; 2],
    pub r_squared: f64,
    /// `c₀` making `χ (ln 1/ν)^{c₀}` flattest (least squares); needs every `ν < 1`.
    pub c0_fit: Option<f64>,
    pub c0_ci: Option<[f64; 2]>,
    pub confidence: f64,
    /// The whole slope band lies below 1.
    pub slower_than_laminar: bool,
}

pub const CONFIDENCE: f64 = 0.95;

fn band(fit: &LinearFit) -> [f64; 2] {
    let q = StudentsT::new(0.0, 1.0, fit.dof as f64)
        .expect("at least one degree of freedom")
        .inverse_cdf(0.5 + 0.5 * CONFIDENCE);
    [fit.slope - q * fit.slope_se, fit.slope + q * fit.slope_se]
}

/// Fit `ln χ = a + slope · ln ν` and the flatness exponent `c₀`.
pub fn dissipation_scaling(records: &[DissipationRecord]) -> Result<ScalingFit> {
    let mut points: Vec<(f64, f64)> = records.iter().map(|r| (r.nu, r.chi)).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut distinct = points.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(Error::InsufficientPoints { needed: 3, found: distinct.len() }.into());
    }
    let (nu, chi): (Vec<f64>, Vec<f64>) = points.iter().cloned().unzip();
    let fit = log_log_fit(&nu, &chi)?;
    let slope_ci = band(&fit);
    let (c0_fit, c0_ci) = if nu.iter().all(|&v| v < 1.0) {
        let x: Vec<f64> = nu.iter().map(|v| (1.0 / v).ln().ln()).collect();
        let y: Vec<f64> = chi.iter().map(|c| c.ln()).collect();
        let f = linear_fit(&x, &y)?;
        let [a, b] = band(&f);
        (Some(-f.slope), Some([-b, -a]))
    } else {
        (None, None)
    };
    Ok(ScalingFit {
        points,
        slope: fit.slope,
        intercept: fit.intercept,
        slope_se: fit.slope_se,
        slope_ci,
        r_squared: fit.r_squared,
        c0_fit,
        c0_ci,
        confidence: CONFIDENCE,
        slower_than_laminar: slope_ci[1] < 1.0,
    })
}

/// One member of the amplitude family `A ω₀`, `ν = ν₀/A²`, `T = T₀/A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub amplitude: f64,
    pub nu: f64,
    pub t_end: f64,
    /// `ν (1/T) ∫₀ᵀ ‖∇ω‖² dt`.
    pub product: f64,
}

/// Runs the amplitude family built by `data(A)`. `A = 0` yields a zero
/// product without running.
pub fn trivial_dissipation_control(
    amplitudes: &[f64],
    nu0: f64,
    t0: f64,
    solver: &SolverConfig,
    mut data: impl FnMut(f64) -> Result<SpectralScalarField>,
) -> Result<Vec<ControlRecord>> {
    let mut out = Vec::with_capacity(amplitudes.len());
    for &a in amplitudes {
        if a == 0.0 {
            out.push(ControlRecord { amplitude: 0.0, nu: nu0, t_end: t0, product: 0.0 });
            continue;
        }
        let (nu, t_end) = (nu0 / (a * a), t0 / a.abs());
        let omega0 = data(a)?;
        let spectral = omega0.spectral().clone();
        let mut state = FlowState::new(omega0, nu)?;
        Solver::new(&spectral, *solver)?.run(&mut state, t_end, &mut ())?;
        out.push(ControlRecord { amplitude: a, nu, t_end, product: state.dissipated() / t_end });
    }
    Ok(out)
}

/// Closed form of the control product for `A sin(πx₁) sin(πx₂)`.
pub fn single_mode_product(amplitude: f64, nu: f64, t_end: f64) -> f64 {
    let k2 = 2.0 * std::f64::consts::PI.powi(2);
    let rate = 2.0 * nu * k2;
    let mean = if rate * t_end > 0.0 { -(-rate * t_end).exp_m1() / (rate * t_end) } else { 1.0 };
    nu * amplitude * amplitude * k2 * mean
}

/// The paired sweep: one [`PairingOutcome`] per `n`, sorted by `(n, ν)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub outcomes: Vec<PairingOutcome>,
    pub fit: Option<ScalingFit>,
}

impl SweepResult {
    pub fn records(&self) -> Vec<DissipationRecord> {
        self.outcomes.iter().map(|o| o.record.clone()).collect()
    }
}

/// Worker count: the plan's, capped by `THINFLOW_THREADS`.
pub fn worker_count(requested: usize) -> usize {
    let cap = std::env::var("THINFLOW_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&c| c > 0);
    requested.max(1).min(cap.unwrap_or(usize::MAX))
}

/// Pair every `n` of the plan (concurrently up to the worker count) and
/// fit the scaling when at least 3 viscosities are available.
pub fn sweep(plan: &ExperimentPlan) -> Result<SweepResult> {
    plan.validate()?;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(usize, Result<PairingOutcome>)>> = Mutex::new(Vec::new());
    let workers = worker_count(plan.workers).min(plan.n_list.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&n) = plan.n_list.get(i) else { break };
                let r = pair_viscosity(n, plan);
                results.lock().expect("no worker panics while holding the lock").push((i, r));
            });
        }
    });
    let mut results = results.into_inner().expect("workers have finished");
    results.sort_by_key(|r| r.0);
    let mut outcomes = results.into_iter().map(|r| r.1).collect::<Result<Vec<_>>>()?;
    outcomes.sort_by(|a, b| a.n.cmp(&b.n).then(a.nu.total_cmp(&b.nu)));
    let records: Vec<_> = outcomes.iter().map(|o| o.record.clone()).collect();
    let fit = match dissipation_scaling(&records) {
        Ok(f) => Some(f),
        Err(ThinflowError::Core(Error::InsufficientPoints { .. })) => None,
        Err(e) => return Err(e),
    };
    Ok(SweepResult { outcomes, fit })
}

/// Shared grid for the plan's level `n` (exposed for callers that build
/// their own data).
pub fn plan_spectral(plan: &ExperimentPlan, n: u32) -> Result<Arc<Spectral>> {
    let b = plan.bubble_for(n);
    Ok(fft::spectral(plan.grid.size(n, &b)?)?)
}
