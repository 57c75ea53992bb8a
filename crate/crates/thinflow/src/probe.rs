//! Observer that samples everything `diagnose` reports: diagnostics, the
//! origin jet and `Dη(t, 0)`, a tracer cloud with Yudovich pairs, the key
//! integral with its per-bubble parts, and the size of the remainder `B`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thinflow_core::initial_data::{BubbleConfig, Component};
use thinflow_core::key_integral::{
    compute_i_with, decompose_b, grid_sampler, Annulus, BubbleTracks, PolarQuadrature,
};
use thinflow_core::lagrangian::{
    grad_u_at_origin, grad_u_linf, torus_distance, yudovich_check, Evaluation, OriginSample, TracerEnsemble,
    YudovichReport,
};
use thinflow_core::solver::{Diagnostics, Observer, StepInfo};
use thinflow_core::{Error, FlowState, Spectral};

/// Key-integral sampling.
#[derive(Debug, Clone)]
pub struct KeyOptions {
    pub quadrature: PolarQuadrature,
    pub radii: Vec<f64>,
    /// Every this many diagnostic samples (the first sample always counts).
    pub every: usize,
    pub annulus: Option<Annulus>,
    /// Upsampled grid for bicubic sampling; built on demand when absent.
    pub fine: Option<Arc<Spectral>>,
}

/// What a [`Probe`] records.
#[derive(Debug, Clone)]
pub struct ProbeOptions {
    pub origin: bool,
    pub tracers: Vec<[f64; 2]>,
    pub evaluation: Evaluation,
    /// Random pairs appended to the cloud for the Yudovich check.
    pub yudovich_pairs: usize,
    pub yudovich_c: Option<f64>,
    pub seed: u64,
    pub key: Option<KeyOptions>,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            origin: true,
            tracers: Vec::new(),
            evaluation: Evaluation::Spectral,
            yudovich_pairs: 0,
            yudovich_c: None,
            seed: 7,
            key: None,
        }
    }
}

/// One key-integral row.
#[derive(Debug, Clone, PartialEq)]
pub struct KeyRow {
    pub t: f64,
    pub r: f64,
    pub total: f64,
    /// `(label, weight · I(c_k))` per tracked component.
    pub parts: Vec<(String, f64)>,
    /// `sup|B| / ‖ω‖_{L∞}` over the configured annulus.
    pub sup_b_ratio: Option<f64>,
    pub sup_b: Option<f64>,
}

/// Yudovich results at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YudovichRow {
    pub t: f64,
    pub report: YudovichReport,
}

/// Everything recorded by a probe.
#[derive(Debug, Clone, Default)]
pub struct ProbeReport {
    pub diagnostics: Vec<Diagnostics>,
    pub origin: Vec<OriginSample>,
    pub key_rows: Vec<KeyRow>,
    pub yudovich: Vec<YudovichRow>,
    /// Largest excursion of a tracked scalar outside its initial range.
    pub scalar_range_excess: f64,
    pub resolved_until: Option<f64>,
}

/// Label of a tracked component in CSV headers.
pub fn component_label(cfg: &BubbleConfig, c: Component) -> String {
    match c {
        Component::Bubble(l) => format!("I_{l}"),
        Component::SmallScale => format!("I_{}", cfg.small_scale_index()),
        Component::Background => "I_bg".to_string(),
    }
}

/// Sampling observer; call [`Probe::start`] before the run.
pub struct Probe {
    spectral: Arc<Spectral>,
    opts: ProbeOptions,
    origin: TracerEnsemble,
    cloud: TracerEnsemble,
    pairs: Vec<(usize, usize)>,
    w_inf0: f64,
    tracks: Option<(BubbleConfig, BubbleTracks, Vec<(f64, f64)>)>,
    samples_seen: usize,
    pub report: ProbeReport,
}

/// `count` random pairs with separations log-uniform in `[1e-3, 1/2]`.
pub fn random_pairs(count: usize, seed: u64) -> Vec<[f64; 2]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = Vec::with_capacity(2 * count);
    for _ in 0..count {
        let x = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let d = (rng.random_range((1e-3f64).ln()..(0.5f64).ln())).exp();
        let a = rng.random_range(0.0..std::f64::consts::TAU);
        pts.push(x);
        pts.push([x[0] + d * a.cos(), x[1] + d * a.sin()]);
    }
    pts
}

impl Probe {
    pub fn new(spectral: &Arc<Spectral>, opts: ProbeOptions) -> Self {
        let origin = TracerEnsemble::new(if opts.origin { vec![[0.0, 0.0]] } else { Vec::new() }, Evaluation::Spectral);
        let mut points = opts.tracers.clone();
        let first = points.len();
        points.extend(random_pairs(opts.yudovich_pairs, opts.seed));
        let pairs = (0..opts.yudovich_pairs).map(|i| (first + 2 * i, first + 2 * i + 1)).collect();
        let cloud = TracerEnsemble::new(points, opts.evaluation);
        Probe {
            spectral: spectral.clone(),
            opts,
            origin,
            cloud,
            pairs,
            w_inf0: 0.0,
            tracks: None,
            samples_seen: 0,
            report: ProbeReport::default(),
        }
    }

    /// Track the components of `cfg` as passive scalars of `state`.
    pub fn track_bubbles(&mut self, cfg: &BubbleConfig, state: &mut FlowState) -> Result<(), Error> {
        let tracks = BubbleTracks::attach(cfg, state)?;
        let ranges = tracks
            .entries
            .iter()
            .map(|&(_, _, idx)| {
                let mut f = state.scalar(idx);
                let s = f.samples();
                let lo = s.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            })
            .collect();
        self.tracks = Some((*cfg, tracks, ranges));
        Ok(())
    }

    pub fn tracks(&self) -> Option<&BubbleTracks> {
        self.tracks.as_ref().map(|t| &t.1)
    }

    pub fn cloud(&self) -> &TracerEnsemble {
        &self.cloud
    }

    pub fn origin_ensemble(&self) -> &TracerEnsemble {
        &self.origin
    }

    /// Labels of the per-component columns, in row order.
    pub fn part_labels(&self) -> Vec<String> {
        match &self.tracks {
            Some((cfg, tracks, _)) => tracks.entries.iter().map(|e| component_label(cfg, e.0)).collect(),
            None => Vec::new(),
        }
    }

    /// Record the initial sample.
    pub fn start(&mut self, state: &FlowState) -> Result<(), Error> {
        let mut w = state.omega();
        self.w_inf0 = w.norms().linf;
        self.sample(state)
    }

    pub fn finish(mut self, state: &FlowState) -> ProbeReport {
        self.report.resolved_until = state.unresolved_since();
        self.report
    }

    fn sample(&mut self, state: &FlowState) -> Result<(), Error> {
        let s = &self.spectral;
        let t = state.t();
        self.report.diagnostics.push(state.diagnostics());
        if self.opts.origin {
            let grad = grad_u_at_origin(s, state.omega_coeffs());
            self.report.origin.push(OriginSample {
                t,
                grad,
                deformation: self.origin.deformation[0],
                grad_linf: grad_u_linf(s, state.omega_coeffs()),
            });
        }
        if !self.pairs.is_empty() && t <= 1.0 {
            let c = self.opts.yudovich_c.unwrap_or(f64::INFINITY);
            let report = yudovich_check(&self.cloud, &self.pairs, t, self.w_inf0, c)?;
            self.report.yudovich.push(YudovichRow { t, report });
        }
        let due = self.samples_seen % self.opts.key.as_ref().map_or(1, |k| k.every.max(1)) == 0;
        if due {
            if let Some(key) = self.opts.key.clone() {
                self.key_sample(state, &key)?;
            }
        }
        self.samples_seen += 1;
        Ok(())
    }

    fn key_sample(&mut self, state: &FlowState, key: &KeyOptions) -> Result<(), Error> {
        let s = &self.spectral;
        let t = state.t();
        let q = &key.quadrature;
        let fine = key.fine.as_ref();
        let nodes = key.radii.iter().map(|&r| q.node_count(r)).max().unwrap_or(0);
        let omega = state.omega_coeffs();
        let sampler = grid_sampler(s, omega, q, nodes, fine)?;
        let mut part_samplers = Vec::new();
        if let Some((_, tracks, ranges)) = &self.tracks {
            for (j, &(c, weight, idx)) in tracks.entries.iter().enumerate() {
                let coeffs = state.scalar_coeffs(idx);
                part_samplers.push((c, weight, idx, grid_sampler(s, coeffs, q, nodes, fine)?));
                let mut f = state.scalar(idx);
                let (lo, hi) = ranges[j];
                for &v in f.samples() {
                    let excess = (lo - v).max(v - hi).max(0.0);
                    self.report.scalar_range_excess = self.report.scalar_range_excess.max(excess);
                }
            }
        }
        let b = match &key.annulus {
            Some(region) => Some(decompose_b(s, omega, region, q, fine)?),
            None => None,
        };
        let labels = self.part_labels();
        for &r in &key.radii {
            let total = compute_i_with(s, omega, r, q, &*sampler)?.value;
            let mut parts = Vec::new();
            for (j, (_, weight, idx, ps)) in part_samplers.iter().enumerate() {
                let v = compute_i_with(s, state.scalar_coeffs(*idx), r, q, &**ps)?.value;
                parts.push((labels[j].clone(), weight * v));
            }
            self.report.key_rows.push(KeyRow {
                t,
                r,
                total,
                parts,
                sup_b_ratio: b.map(|b| b.ratio),
                sup_b: b.map(|b| b.sup_b),
            });
        }
        Ok(())
    }
}

impl Observer for Probe {
    fn wants_stages(&self) -> bool {
        !self.origin.is_empty() || !self.cloud.is_empty()
    }

    fn on_step(&mut self, _state: &FlowState, step: &StepInfo<'_>) -> Result<(), Error> {
        if !self.origin.is_empty() {
            self.origin.advance(&self.spectral, step.stages, step.dt)?;
        }
        if !self.cloud.is_empty() {
            self.cloud.advance(&self.spectral, step.stages, step.dt)?;
        }
        Ok(())
    }

    fn on_sample(&mut self, state: &FlowState) -> Result<(), Error> {
        self.sample(state)
    }
}

/// Largest `c` the pairs needed over the recorded times, for calibration.
pub fn calibrated_yudovich_c(rows: &[YudovichRow]) -> f64 {
    rows.iter().map(|r| r.report.worst_needed).fold(0.0, f64::max)
}

/// Minimal-image separation of two seeds, exposed for tests.
pub fn pair_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    torus_distance(a, b)
}
