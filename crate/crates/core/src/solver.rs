//! Integrating-factor RK4 for `∂ₜω + u·∇ω = νΔω`, with co-advected passive
//! scalars that diffuse with the same ν.
//!
//! The state lives in coefficient space, projected onto the 2/3 band. With
//! `E = exp(−ν|k|² dt/2)` one step reads
//!
//! ```text
//! k1 = N(ω)
//! k2 = N(E (ω + dt/2 k1))
//! k3 = N(E ω + dt/2 k2)
//! k4 = N(E² ω + dt E k3)
//! ω ← E² ω + dt/6 (E² k1 + 2E (k2 + k3) + k4)
//! ```
//!
//! where `N(ω) = −P(u·∇ω)` is the truncated advection term.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::field::{biot_savart, MEAN_TOLERANCE};
use crate::fft::{forward_2d, inverse_2d};
use crate::spectral::Spectral;
use crate::{Complex64, Error, SpectralScalarField, VelocityField};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub cfl: f64,
    /// 2/3 truncation of the advection product.
    pub dealias: bool,
    pub max_dt: f64,
    /// Spacing of observer samples in `run`.
    pub cadence: f64,
    /// Use this step instead of the CFL step (rejected if it exceeds the limit).
    pub fixed_dt: Option<f64>,
    /// Tail fraction above which the state counts as under-resolved.
    pub tail_threshold: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            cfl: 0.4,
            dealias: true,
            max_dt: 1e-2,
            cadence: 1e-2,
            fixed_dt: None,
            tail_threshold: 1e-6,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.cfl > 0.0 && self.cfl < 1.0) {
            return Err(Error::InvalidConfig("cfl must lie in (0, 1)"));
        }
        if !(self.max_dt > 0.0) {
            return Err(Error::InvalidConfig("max_dt must be positive"));
        }
        if !(self.cadence > 0.0) {
            return Err(Error::InvalidConfig("cadence must be positive"));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::InvalidConfig("fixed_dt must be positive"));
            }
        }
        if !(self.tail_threshold > 0.0) {
            return Err(Error::InvalidConfig("tail_threshold must be positive"));
        }
        Ok(())
    }
}

/// Scalar summary of a state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub t: f64,
    /// `‖u‖²_{L²}`.
    pub energy: f64,
    /// `‖ω‖²_{L²}`.
    pub enstrophy: f64,
    /// `‖∇ω‖_{L²}`.
    pub palinstrophy: f64,
    pub max_omega: f64,
    pub tail_fraction: f64,
}

/// Vorticity, passive scalars, clock and viscosity.
#[derive(Debug, Clone)]
pub struct FlowState {
    spectral: Arc<Spectral>,
    omega: Vec<Complex64>,
    scalars: Vec<Vec<Complex64>>,
    t: f64,
    nu: f64,
    dissipated: f64,
    unresolved_since: Option<f64>,
    steps: u64,
}

impl FlowState {
    /// State at `t = 0`. The vorticity must be mean-free; it is projected
    /// onto the 2/3 band.
    pub fn new(mut omega: SpectralScalarField, nu: f64) -> Result<Self, Error> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::InvalidConfig("viscosity must be finite and nonnegative"));
        }
        let spectral = omega.spectral().clone();
        biot_savart(&mut omega)?;
        let mut coeffs = omega.coeffs().to_vec();
        coeffs[0] = ZERO;
        spectral.dealias(&mut coeffs);
        Ok(FlowState {
            spectral,
            omega: coeffs,
            scalars: Vec::new(),
            t: 0.0,
            nu,
            dissipated: 0.0,
            unresolved_since: None,
            steps: 0,
        })
    }

    /// Attach a passive scalar (projected onto the 2/3 band); returns its index.
    pub fn add_scalar(&mut self, mut c: SpectralScalarField) -> Result<usize, Error> {
        if c.grid() != self.spectral.grid() {
            return Err(Error::GridMismatch { expected: self.spectral.size(), found: c.grid().size() });
        }
        let mut coeffs = c.coeffs().to_vec();
        self.spectral.dealias(&mut coeffs);
        self.scalars.push(coeffs);
        Ok(self.scalars.len() - 1)
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    pub fn spectral(&self) -> &Arc<Spectral> {
        &self.spectral
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn omega_coeffs(&self) -> &[Complex64] {
        &self.omega
    }

    pub fn omega(&self) -> SpectralScalarField {
        SpectralScalarField::from_coeffs(&self.spectral, self.omega.clone()).expect("same grid")
    }

    pub fn scalar_count(&self) -> usize {
        self.scalars.len()
    }

    pub fn scalar_coeffs(&self, j: usize) -> &[Complex64] {
        &self.scalars[j]
    }

    pub fn scalar(&self, j: usize) -> SpectralScalarField {
        SpectralScalarField::from_coeffs(&self.spectral, self.scalars[j].clone()).expect("same grid")
    }

    pub fn velocity(&self) -> VelocityField {
        crate::field::biot_savart_projected(&mut self.omega())
    }

    /// `∫₀ᵗ ν‖∇ω‖²_{L²} ds` accumulated by the solver.
    pub fn dissipated(&self) -> f64 {
        self.dissipated
    }

    /// First step end time at which the tail fraction exceeded the threshold.
    pub fn unresolved_since(&self) -> Option<f64> {
        self.unresolved_since
    }

    pub fn is_resolved(&self) -> bool {
        self.unresolved_since.is_none()
    }

    pub fn enstrophy(&self) -> f64 {
        self.spectral.l2_squared(&self.omega)
    }

    pub fn palinstrophy_squared(&self) -> f64 {
        self.spectral.h1_seminorm_squared(&self.omega)
    }

    pub fn energy(&self) -> f64 {
        self.spectral.energy_from_vorticity(&self.omega)
    }

    pub fn tail_fraction(&self) -> f64 {
        self.spectral.tail_fraction(&self.omega)
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let mut w = self.omega();
        Diagnostics {
            t: self.t,
            energy: self.energy(),
            enstrophy: self.enstrophy(),
            palinstrophy: self.palinstrophy_squared().sqrt(),
            max_omega: w.norms().linf,
            tail_fraction: self.tail_fraction(),
        }
    }
}

/// Fields at one RK stage, for tracer integration.
#[derive(Debug, Clone)]
pub struct Stage {
    pub t: f64,
    /// Vorticity coefficients fed to this stage.
    pub omega: Vec<Complex64>,
    /// Velocity samples packed as `u₁ + i u₂`.
    pub velocity: Vec<Complex64>,
}

/// One completed step, as seen by observers.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub t0: f64,
    pub dt: f64,
    /// Stage fields at `t0`, `t0 + dt/2`, `t0 + dt/2`, `t0 + dt`; empty
    /// unless the observer asked for them.
    pub stages: &'a [Stage],
}

/// Hooks invoked by [`Solver::run`].
pub trait Observer {
    /// Whether [`StepInfo::stages`] should be filled.
    fn wants_stages(&self) -> bool {
        false
    }

    /// After every step, with the updated state.
    fn on_step(&mut self, _state: &FlowState, _step: &StepInfo<'_>) -> Result<(), Error> {
        Ok(())
    }

    /// At `t₀ + j·cadence` and at the final time.
    fn on_sample(&mut self, _state: &FlowState) -> Result<(), Error> {
        Ok(())
    }
}

impl Observer for () {}

/// Observer that records [`Diagnostics`] at every sample.
#[derive(Debug, Default, Clone)]
pub struct DiagnosticsLog {
    pub samples: Vec<Diagnostics>,
}

impl Observer for DiagnosticsLog {
    fn on_sample(&mut self, state: &FlowState) -> Result<(), Error> {
        self.samples.push(state.diagnostics());
        Ok(())
    }
}

struct Work {
    vel: Vec<Complex64>,
    grad: Vec<Complex64>,
    prod: Vec<Complex64>,
    grads: Vec<Vec<f64>>,
}

/// Time stepper with reusable buffers.
pub struct Solver {
    spectral: Arc<Spectral>,
    config: SolverConfig,
    work: Work,
    half: Vec<f64>,
    half_key: Option<(f64, f64)>,
    acc: Vec<Complex64>,
    y: Vec<Complex64>,
    k: Vec<Complex64>,
    acc_s: Vec<Vec<Complex64>>,
    y_s: Vec<Vec<Complex64>>,
    k_s: Vec<Vec<Complex64>>,
    stages: Vec<Stage>,
    k2: Vec<f64>,
}

impl core::fmt::Debug for Solver {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Solver").field("n", &self.spectral.size()).field("config", &self.config).finish()
    }
}

impl Solver {
    pub fn new(spectral: &Arc<Spectral>, config: SolverConfig) -> Result<Self, Error> {
        config.validate()?;
        let n = spectral.size();
        let len = n * n;
        let mut k2 = vec![0.0; len];
        for p in 0..n {
            for q in 0..n {
                k2[p * n + q] = spectral.k_squared(p, q);
            }
        }
        Ok(Solver {
            spectral: spectral.clone(),
            config,
            work: Work {
                vel: vec![ZERO; len],
                grad: vec![ZERO; len],
                prod: vec![ZERO; len],
                grads: Vec::new(),
            },
            half: vec![1.0; len],
            half_key: None,
            acc: vec![ZERO; len],
            y: vec![ZERO; len],
            k: vec![ZERO; len],
            acc_s: Vec::new(),
            y_s: Vec::new(),
            k_s: Vec::new(),
            stages: Vec::new(),
            k2,
        })
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    pub fn spectral(&self) -> &Arc<Spectral> {
        &self.spectral
    }

    fn check_state(&self, state: &FlowState) -> Result<(), Error> {
        if state.spectral.grid() != self.spectral.grid() {
            return Err(Error::GridMismatch { expected: self.spectral.size(), found: state.spectral.size() });
        }
        Ok(())
    }

    fn ensure_scalar_buffers(&mut self, count: usize) {
        let len = self.spectral.grid().len();
        for v in [&mut self.acc_s, &mut self.y_s, &mut self.k_s] {
            v.resize_with(count, || vec![ZERO; len]);
        }
        self.work.grads.resize_with(count, || vec![0.0; len]);
    }

    /// `N(ω) = −P(u·∇ω)`, the advection part of the right-hand side.
    pub fn rhs(&mut self, state: &FlowState) -> Result<Vec<Complex64>, Error> {
        self.check_state(state)?;
        let mut out = vec![ZERO; self.spectral.grid().len()];
        nonlinear(&self.spectral, self.config.dealias, &mut self.work, &state.omega, &[], &mut out, &mut [], None);
        Ok(out)
    }

    /// Largest pointwise speed of the state.
    pub fn max_speed(&mut self, state: &FlowState) -> f64 {
        fill_velocity(&self.spectral, &state.omega, &mut self.work.vel);
        inverse_2d(self.spectral.engine(), &mut self.work.vel);
        self.work.vel.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr())).sqrt()
    }

    fn dt_from_speed(&self, umax: f64) -> f64 {
        let h = self.spectral.grid().spacing();
        if umax > 0.0 {
            (self.config.cfl * h / umax).min(self.config.max_dt)
        } else {
            self.config.max_dt
        }
    }

    fn cfl_limit(&self, umax: f64) -> f64 {
        if umax > 0.0 {
            self.config.cfl * self.spectral.grid().spacing() / umax
        } else {
            f64::INFINITY
        }
    }

    /// `min(cfl · h / max|u|, max_dt)`.
    pub fn cfl_dt(&mut self, state: &FlowState) -> f64 {
        let umax = self.max_speed(state);
        self.dt_from_speed(umax)
    }

    /// Advance by exactly `dt`.
    pub fn step(&mut self, state: &mut FlowState, dt: f64) -> Result<(), Error> {
        self.advance(state, |_| Some(dt), false)?;
        Ok(())
    }

    fn set_half(&mut self, nu: f64, dt: f64) {
        if self.half_key == Some((nu, dt)) {
            return;
        }
        for (e, k2) in self.half.iter_mut().zip(&self.k2) {
            *e = (-nu * k2 * dt * 0.5).exp();
        }
        self.half_key = Some((nu, dt));
    }

    /// One step with `dt = choose(cfl_dt)`; returns the step actually taken.
    fn advance(
        &mut self,
        state: &mut FlowState,
        choose: impl FnOnce(f64) -> Option<f64>,
        capture: bool,
    ) -> Result<f64, Error> {
        self.check_state(state)?;
        let ns = state.scalars.len();
        self.ensure_scalar_buffers(ns);
        let spectral = self.spectral.clone();
        let dealias = self.config.dealias;
        let len = spectral.grid().len();
        if capture && self.stages.len() != 4 {
            self.stages = (0..4)
                .map(|_| Stage { t: 0.0, omega: vec![ZERO; len], velocity: vec![ZERO; len] })
                .collect();
        }

        // Stage 1 also yields the speed that fixes the step.
        let umax = nonlinear(
            &spectral,
            dealias,
            &mut self.work,
            &state.omega,
            &state.scalars,
            &mut self.k,
            &mut self.k_s,
            None,
        );
        let auto = self.dt_from_speed(umax);
        let dt = match choose(auto) {
            Some(dt) => dt,
            None => auto,
        };
        let limit = self.cfl_limit(umax);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let t0 = state.t;
        if capture {
            let s = &mut self.stages[0];
            s.t = t0;
            s.omega.copy_from_slice(&state.omega);
            s.velocity.copy_from_slice(&self.work.vel);
        }
        self.set_half(state.nu, dt);
        let e = &self.half;
        let p_start = spectral.h1_seminorm_squared(&state.omega);

        // acc = E² k1, y = E (ω + dt/2 k1)
        rk_first(e, dt, &state.omega, &self.k, &mut self.acc, &mut self.y);
        for j in 0..ns {
            rk_first(e, dt, &state.scalars[j], &self.k_s[j], &mut self.acc_s[j], &mut self.y_s[j]);
        }
        let p2 = spectral.h1_seminorm_squared(&self.y);
        let cap = capture.then(|| &mut self.stages[1]);
        stage(&spectral, dealias, &mut self.work, &self.y, &self.y_s, &mut self.k, &mut self.k_s, cap, t0 + 0.5 * dt);

        // acc += 2E k2, y = E ω + dt/2 k2
        rk_middle(e, dt, &state.omega, &self.k, &mut self.acc, &mut self.y);
        for j in 0..ns {
            rk_middle(e, dt, &state.scalars[j], &self.k_s[j], &mut self.acc_s[j], &mut self.y_s[j]);
        }
        let p3 = spectral.h1_seminorm_squared(&self.y);
        let cap = capture.then(|| &mut self.stages[2]);
        stage(&spectral, dealias, &mut self.work, &self.y, &self.y_s, &mut self.k, &mut self.k_s, cap, t0 + 0.5 * dt);

        // acc += 2E k3, y = E² ω + dt E k3
        rk_last(e, dt, &state.omega, &self.k, &mut self.acc, &mut self.y);
        for j in 0..ns {
            rk_last(e, dt, &state.scalars[j], &self.k_s[j], &mut self.acc_s[j], &mut self.y_s[j]);
        }
        let p4 = spectral.h1_seminorm_squared(&self.y);
        let cap = capture.then(|| &mut self.stages[3]);
        stage(&spectral, dealias, &mut self.work, &self.y, &self.y_s, &mut self.k, &mut self.k_s, cap, t0 + dt);

        rk_finish(e, dt, &mut state.omega, &self.k, &self.acc);
        for j in 0..ns {
            rk_finish(e, dt, &mut state.scalars[j], &self.k_s[j], &self.acc_s[j]);
        }

        state.dissipated += state.nu * dt * (p_start + 2.0 * p2 + 2.0 * p3 + p4) / 6.0;
        state.t = t0 + dt;
        state.steps += 1;
        if state.unresolved_since.is_none() && spectral.tail_fraction(&state.omega) > self.config.tail_threshold {
            state.unresolved_since = Some(state.t);
        }
        Ok(dt)
    }

    /// Integrate to `t_end`, calling `observer.on_sample` at
    /// `t₀ + j·cadence` (the last sample lands on `t_end`).
    pub fn run(&mut self, state: &mut FlowState, t_end: f64, observer: &mut dyn Observer) -> Result<(), Error> {
        self.check_state(state)?;
        let t0 = state.t;
        if !(t_end >= t0) {
            return Err(Error::InvalidConfig("run end time precedes the state time"));
        }
        if t_end == t0 {
            return Ok(());
        }
        let cadence = self.config.cadence;
        let count = ((t_end - t0) / cadence * (1.0 - 1e-12)).ceil().max(1.0) as u64;
        // Anchor the sample times on integer multiples of the cadence when the
        // start is one, so split runs see the same targets as a single run.
        let base = (t0 / cadence).round();
        let anchored = (base * cadence - t0).abs() <= 1e-9 * cadence;
        let target = |j: u64| -> f64 {
            if j == count {
                t_end
            } else if anchored {
                ((base + j as f64) * cadence).min(t_end)
            } else {
                (t0 + j as f64 * cadence).min(t_end)
            }
        };
        let capture = observer.wants_stages();
        let fixed = self.config.fixed_dt;
        for j in 1..=count {
            let goal = target(j);
            while state.t < goal {
                let remaining = goal - state.t;
                let t_before = state.t;
                let dt = self.advance(
                    state,
                    |auto| {
                        let dt = fixed.unwrap_or(auto);
                        // Land on the goal rather than leave a sliver.
                        if dt >= remaining * (1.0 - 1e-9) {
                            Some(remaining)
                        } else {
                            Some(dt)
                        }
                    },
                    capture,
                )?;
                if dt == remaining {
                    state.t = goal;
                }
                let info = StepInfo { t0: t_before, dt, stages: if capture { &self.stages } else { &[] } };
                observer.on_step(state, &info)?;
            }
            observer.on_sample(state)?;
        }
        Ok(())
    }
}

fn rk_first(e: &[f64], dt: f64, w: &[Complex64], k: &[Complex64], acc: &mut [Complex64], y: &mut [Complex64]) {
    for i in 0..w.len() {
        acc[i] = k[i] * (e[i] * e[i]);
        y[i] = (w[i] + k[i] * (0.5 * dt)) * e[i];
    }
}

fn rk_middle(e: &[f64], dt: f64, w: &[Complex64], k: &[Complex64], acc: &mut [Complex64], y: &mut [Complex64]) {
    for i in 0..w.len() {
        acc[i] += k[i] * (2.0 * e[i]);
        y[i] = w[i] * e[i] + k[i] * (0.5 * dt);
    }
}

fn rk_last(e: &[f64], dt: f64, w: &[Complex64], k: &[Complex64], acc: &mut [Complex64], y: &mut [Complex64]) {
    for i in 0..w.len() {
        acc[i] += k[i] * (2.0 * e[i]);
        y[i] = w[i] * (e[i] * e[i]) + k[i] * (dt * e[i]);
    }
}

fn rk_finish(e: &[f64], dt: f64, w: &mut [Complex64], k: &[Complex64], acc: &[Complex64]) {
    for i in 0..w.len() {
        w[i] = w[i] * (e[i] * e[i]) + (acc[i] + k[i]) * (dt / 6.0);
    }
}

#[allow(clippy::too_many_arguments)]
fn stage(
    spectral: &Spectral,
    dealias: bool,
    work: &mut Work,
    y: &[Complex64],
    ys: &[Vec<Complex64>],
    k: &mut [Complex64],
    ks: &mut [Vec<Complex64>],
    capture: Option<&mut Stage>,
    t: f64,
) {
    let cap = capture.map(|s| {
        s.t = t;
        s.omega.copy_from_slice(y);
        s
    });
    nonlinear(spectral, dealias, work, y, ys, k, ks, cap);
}

/// `vel = û₁ + i û₂` for vorticity coefficients `w`.
fn fill_velocity(spectral: &Spectral, w: &[Complex64], vel: &mut [Complex64]) {
    let n = spectral.size();
    for p in 0..n {
        let k1 = spectral.wavenumber_odd(p);
        for q in 0..n {
            let i = p * n + q;
            let k2 = spectral.k_squared(p, q);
            if k2 == 0.0 {
                vel[i] = ZERO;
                continue;
            }
            // û₁ = i k₂ ψ̂, û₂ = −i k₁ ψ̂ with ψ̂ = ω̂/|k|²
            let c = w[i] / k2;
            let ic = Complex64::new(-c.im, c.re);
            let u1 = ic * spectral.wavenumber_odd(q);
            let u2 = ic * (-k1);
            vel[i] = u1 + Complex64::new(-u2.im, u2.re);
        }
    }
}

/// `grad = ∂₁ĉ + i ∂₂ĉ`.
fn fill_gradient(spectral: &Spectral, c: &[Complex64], grad: &mut [Complex64]) {
    let n = spectral.size();
    for p in 0..n {
        let k1 = spectral.wavenumber_odd(p);
        for q in 0..n {
            let k2 = spectral.wavenumber_odd(q);
            let v = c[p * n + q];
            let d1 = Complex64::new(-k1 * v.im, k1 * v.re);
            let d2 = Complex64::new(-k2 * v.im, k2 * v.re);
            grad[p * n + q] = d1 + Complex64::new(-d2.im, d2.re);
        }
    }
}

fn finish_rhs(spectral: &Spectral, dealias: bool, out: &mut [Complex64]) {
    out[0] = ZERO;
    if dealias {
        spectral.dealias(out);
    }
}

/// Advection terms of ω and of every scalar; returns `max |u|`.
#[allow(clippy::too_many_arguments)]
fn nonlinear(
    spectral: &Spectral,
    dealias: bool,
    work: &mut Work,
    w: &[Complex64],
    scalars: &[Vec<Complex64>],
    k: &mut [Complex64],
    ks: &mut [Vec<Complex64>],
    capture: Option<&mut Stage>,
) -> f64 {
    let engine = spectral.engine();
    fill_velocity(spectral, w, &mut work.vel);
    inverse_2d(engine, &mut work.vel);
    let umax = work.vel.iter().fold(0.0f64, |m, v| m.max(v.norm_sqr())).sqrt();
    if let Some(s) = capture {
        s.velocity.copy_from_slice(&work.vel);
    }

    // Products −u·∇c as real samples: ω first, then each scalar.
    let advect = |work_grad: &mut [Complex64], vel: &[Complex64], c: &[Complex64], out: &mut [f64]| {
        fill_gradient(spectral, c, work_grad);
        inverse_2d(engine, work_grad);
        for ((o, g), u) in out.iter_mut().zip(work_grad.iter()).zip(vel) {
            *o = -(u.re * g.re + u.im * g.im);
        }
    };

    let ns = scalars.len();
    for j in 0..ns {
        let (grad, vel) = (&mut work.grad, &work.vel);
        advect(grad, vel, &scalars[j], &mut work.grads[j]);
    }
    {
        // ω's product is paired with the first scalar when there is one.
        let Work { grad, vel, prod, grads, .. } = &mut *work;
        fill_gradient(spectral, w, grad);
        inverse_2d(engine, grad);
        for i in 0..prod.len() {
            let u = vel[i];
            let g = grad[i];
            let b = if ns > 0 { grads[0][i] } else { 0.0 };
            prod[i] = Complex64::new(-(u.re * g.re + u.im * g.im), b);
        }
    }
    if ns > 0 {
        let (first, _) = ks.split_at_mut(1);
        spectral.forward_packed(&mut work.prod, k, &mut first[0]);
    } else {
        forward_real_in_place(spectral, &mut work.prod, k);
    }
    finish_rhs(spectral, dealias, k);

    let mut j = 1;
    while j < ns {
        if j + 1 < ns {
            for i in 0..work.prod.len() {
                work.prod[i] = Complex64::new(work.grads[j][i], work.grads[j + 1][i]);
            }
            let (a, b) = ks.split_at_mut(j + 1);
            spectral.forward_packed(&mut work.prod, &mut a[j], &mut b[0]);
            j += 2;
        } else {
            for i in 0..work.prod.len() {
                work.prod[i] = Complex64::new(work.grads[j][i], 0.0);
            }
            forward_real_in_place(spectral, &mut work.prod, &mut ks[j]);
            j += 1;
        }
    }
    for kj in ks.iter_mut() {
        finish_rhs(spectral, dealias, kj);
    }
    umax
}

/// Normalized coefficients of the real samples held in `buf` (imaginary parts zero).
fn forward_real_in_place(spectral: &Spectral, buf: &mut [Complex64], out: &mut [Complex64]) {
    forward_2d(spectral.engine(), buf);
    let scale = 1.0 / buf.len() as f64;
    for (o, b) in out.iter_mut().zip(buf.iter()) {
        *o = b * scale;
    }
}

/// Mean-free check used when attaching data to a state.
pub fn is_mean_free(field: &mut SpectralScalarField) -> bool {
    let mean = field.mean();
    mean.abs() <= MEAN_TOLERANCE * field.norms().l2
}
