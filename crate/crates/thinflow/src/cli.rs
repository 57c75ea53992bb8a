//! The `thinflow` command line: gen-data, run, sweep, diagnose, export.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use thinflow_core::initial_data::assemble_omega0;
use thinflow_core::key_integral::{Annulus, PolarQuadrature};
use thinflow_core::lagrangian::Evaluation;
use thinflow_core::solver::DiagnosticsLog;
use thinflow_core::{Error, FlowState, Solver, Spectral, SpectralScalarField};

use crate::checkpoint::Checkpoint;
use crate::config::{shorthand, RunConfig, TracerEvaluation};
use crate::error::{Result, ThinflowError};
use crate::experiments::{sweep, ExperimentPlan};
use crate::fft;
use crate::output::{self, Summary};
use crate::probe::{KeyOptions, Probe, ProbeOptions};

#[derive(Debug, Parser)]
#[command(name = "thinflow", version, about = "Vortex-thinning experiments on the periodic square")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the bubble initial vorticity as a checkpoint.
    GenData {
        #[command(flatten)]
        common: Common,
        /// Checkpoint file to write.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evolve a checkpoint (or the configured data) and write diagnostics.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Like `run`, plus origin, tracer, Yudovich and key-integral output.
    Diagnose {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        run: RunArgs,
        /// Seed points, one `x1 x2` pair per line.
        #[arg(long)]
        tracers: Option<PathBuf>,
    },
    /// Paired viscosity sweep with a scaling fit.
    Sweep {
        /// Configuration holding the `[plan]` section.
        #[arg(long)]
        plan: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-export a sweep's summary.json as CSV or JSON.
    Export {
        #[arg(long)]
        summary: PathBuf,
        #[arg(long, value_parser = ["csv", "json"], default_value = "csv")]
        format: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Dotted override, e.g. `--set solver.cfl=0.3`; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Grid size (`grid.n`).
    #[arg(long = "N")]
    pub grid: Option<usize>,
    /// Finest bubble index (`bubble.n`).
    #[arg(long = "n")]
    pub level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Start from this checkpoint instead of the configured data.
    #[arg(long)]
    pub init: Option<PathBuf>,
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub nu: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn load(common: &Common, run: Option<&RunArgs>) -> Result<RunConfig> {
    let mut overrides = Vec::new();
    let mut push = |flag: &str, v: String| overrides.push(format!("{}={v}", shorthand(flag).expect("known flag")));
    if let Some(n) = common.grid {
        push("N", n.to_string());
    }
    if let Some(n) = common.level {
        push("n", n.to_string());
    }
    if let Some(r) = run {
        if let Some(t) = r.t_end {
            push("T", toml_float(t));
        }
        if let Some(nu) = r.nu {
            push("nu", toml_float(nu));
        }
    }
    overrides.extend(common.set.iter().cloned());
    Ok(RunConfig::load(common.config.as_deref(), &overrides)?)
}

fn toml_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:?}")
    } else {
        v.to_string()
    }
}

/// Run the parsed command.
pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { common, out } => gen_data(&load(&common, None)?, &out),
        Command::Run { common, run } => {
            let cfg = load(&common, Some(&run))?;
            run_cmd(&cfg, run.init.as_deref(), &run.out)
        }
        Command::Diagnose { common, run, tracers } => {
            let cfg = load(&common, Some(&run))?;
            diagnose(&cfg, run.init.as_deref(), tracers.as_deref(), &run.out)
        }
        Command::Sweep { plan, set, out } => {
            let cfg = RunConfig::load(Some(&plan), &set)?;
            sweep_cmd(&cfg, &plan, &out)
        }
        Command::Export { summary, format, out } => export(&summary, &format, &out),
    }
}

/// The configured bubble vorticity on the configured grid.
pub fn configured_data(cfg: &RunConfig) -> Result<SpectralScalarField> {
    let b = cfg.bubble.to_core();
    if cfg.grid.n < b.required_size() {
        return Err(Error::UnderResolved { size: cfg.grid.n, required: b.required_size() }.into());
    }
    Ok(assemble_omega0(&b, &fft::spectral(cfg.grid.n)?)?)
}

pub fn gen_data(cfg: &RunConfig, out: &Path) -> Result<()> {
    let mut w = configured_data(cfg)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Checkpoint::from_field(&mut w, 0.0, cfg.solver.nu).write(out)?;
    Ok(())
}

/// Initial state plus the paths of its binary inputs.
fn initial(cfg: &RunConfig, init: Option<&Path>) -> Result<(FlowState, Vec<PathBuf>)> {
    match init {
        Some(p) => {
            let c = Checkpoint::read(p)?;
            let state = FlowState::new(c.field()?, cfg.solver.nu)?.with_time(c.t);
            Ok((state, vec![p.to_path_buf()]))
        }
        None => Ok((FlowState::new(configured_data(cfg)?, cfg.solver.nu)?, Vec::new())),
    }
}

fn checkpoint_times(t0: f64, t_end: f64, every: Option<f64>) -> Vec<f64> {
    let mut out = Vec::new();
    if let Some(dt) = every.filter(|d| *d > 0.0) {
        let mut k = (t0 / dt).floor() + 1.0;
        while k * dt < t_end * (1.0 - 1e-12) {
            out.push(k * dt);
            k += 1.0;
        }
    }
    out.push(t_end);
    out
}

fn write_checkpoint(dir: &Path, state: &FlowState) -> Result<()> {
    let name = format!("checkpoint_t{:.6}.bin", state.t());
    Checkpoint::from_field(&mut state.omega(), state.t(), state.nu()).write(&dir.join(name))?;
    Ok(())
}

pub fn run_cmd(cfg: &RunConfig, init: Option<&Path>, out: &Path) -> Result<()> {
    let (mut state, inputs) = initial(cfg, init)?;
    let t_end = state.t() + cfg.solver.t_end;
    output::write_provenance(out, &cfg.resolved(), &inputs)?;
    let mut solver = Solver::new(state.spectral(), cfg.solver.to_core())?;
    let mut log = DiagnosticsLog::default();
    log.samples.push(state.diagnostics());
    for t in checkpoint_times(state.t(), t_end, cfg.solver.checkpoint_every) {
        solver.run(&mut state, t, &mut log)?;
        if cfg.solver.checkpoint_every.is_some() {
            write_checkpoint(out, &state)?;
        }
    }
    output::write_diagnostics(&out.join("diagnostics.csv"), &log.samples)?;
    Checkpoint::from_field(&mut state.omega(), state.t(), state.nu()).write(&out.join("final.bin"))?;
    Ok(())
}

/// Seed points: `x1 x2` or `x1,x2` per line; `#` starts a comment.
pub fn read_tracers(path: &Path) -> Result<Vec<[f64; 2]>> {
    let text = fs::read_to_string(path)?;
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| ThinflowError::Usage(format!("{}:{}: expected two numbers", path.display(), i + 1)))?;
        match v.as_slice() {
            [a, b] => pts.push([*a, *b]),
            _ => return Err(ThinflowError::Usage(format!("{}:{}: expected two numbers", path.display(), i + 1))),
        }
    }
    Ok(pts)
}

pub fn probe_options(cfg: &RunConfig, tracers: Vec<[f64; 2]>, spectral: &Arc<Spectral>) -> Result<ProbeOptions> {
    let q = &cfg.quadrature;
    let key = if q.radii.is_empty() {
        None
    } else {
        let quadrature: PolarQuadrature = q.to_core();
        let annulus: Option<Annulus> = q.annulus();
        let fine = Some(fft::spectral(spectral.size() * quadrature.upsample.max(1))?);
        Some(KeyOptions { quadrature, radii: q.radii.clone(), every: q.every, annulus, fine })
    };
    Ok(ProbeOptions {
        origin: cfg.tracers.origin,
        tracers,
        evaluation: match cfg.tracers.evaluation {
            TracerEvaluation::Spectral => Evaluation::Spectral,
            TracerEvaluation::Interpolated => Evaluation::Interpolated(cfg.tracers.radius),
        },
        yudovich_pairs: cfg.tracers.yudovich_pairs,
        yudovich_c: Some(cfg.tracers.yudovich_c),
        seed: cfg.tracers.seed,
        key,
    })
}

pub fn diagnose(cfg: &RunConfig, init: Option<&Path>, tracers: Option<&Path>, out: &Path) -> Result<()> {
    let (mut state, mut inputs) = initial(cfg, init)?;
    let tracer_file = tracers.map(Path::to_path_buf).or_else(|| cfg.tracers.file.clone());
    let seeds = match &tracer_file {
        Some(p) => {
            inputs.push(p.clone());
            read_tracers(p)?
        }
        None => Vec::new(),
    };
    output::write_provenance(out, &cfg.resolved(), &inputs)?;
    let spectral = state.spectral().clone();
    let opts = probe_options(cfg, seeds, &spectral)?;
    let mut probe = Probe::new(&spectral, opts);
    // Per-bubble parts need the components of the configured data at t = 0.
    let bubble = cfg.bubble.to_core();
    if !cfg.quadrature.radii.is_empty() && state.t() == 0.0 && spectral.size() >= bubble.required_size() {
        probe.track_bubbles(&bubble, &mut state)?;
    }
    probe.start(&state)?;
    let t_end = state.t() + cfg.solver.t_end;
    Solver::new(&spectral, cfg.solver.to_core())?.run(&mut state, t_end, &mut probe)?;
    let labels = probe.part_labels();
    let cloud = probe.cloud().clone();
    let report = probe.finish(&state);
    output::write_diagnostics(&out.join("diagnostics.csv"), &report.diagnostics)?;
    if cfg.tracers.origin {
        output::write_origin(&out.join("origin.csv"), &report.origin)?;
    }
    if !cfg.quadrature.radii.is_empty() {
        output::write_key_integral(&out.join("key_integral.csv"), &labels, &report.key_rows)?;
    }
    if !cloud.is_empty() {
        let rows: Vec<_> = cloud
            .initial
            .iter()
            .zip(&cloud.positions)
            .map(|(a, b)| vec![Some(a[0]), Some(a[1]), Some(b[0]), Some(b[1])])
            .collect();
        let header = ["x1_0", "x2_0", "x1", "x2"].map(String::from);
        output::write_table(&out.join("tracers.csv"), &header, &rows)?;
    }
    if !report.yudovich.is_empty() {
        let rows: Vec<_> = report
            .yudovich
            .iter()
            .map(|y| {
                let r = y.report;
                vec![Some(y.t), Some(r.pairs as f64), Some(r.failures as f64), Some(r.worst_needed)]
            })
            .collect();
        let header = ["t", "pairs", "failures", "worst_c"].map(String::from);
        output::write_table(&out.join("yudovich.csv"), &header, &rows)?;
    }
    Ok(())
}

pub fn sweep_cmd(cfg: &RunConfig, plan_path: &Path, out: &Path) -> Result<()> {
    let plan = ExperimentPlan::from_config(cfg);
    plan.validate()?;
    output::write_provenance(out, &cfg.resolved(), &[plan_path.to_path_buf()])?;
    let result = sweep(&plan)?;
    write_sweep(out, &Summary::new(&result.outcomes, result.fit))
}

fn write_sweep(out: &Path, summary: &Summary) -> Result<()> {
    fs::create_dir_all(out)?;
    output::write_records(&out.join("records.csv"), &summary.records)?;
    for r in &summary.records {
        output::write_pair_samples(&out.join(format!("run_n{}_nu{:.6e}.csv", r.n, r.nu)), r)?;
    }
    summary.write(&out.join("summary.json"))
}

pub fn export(summary: &Path, format: &str, out: &Path) -> Result<()> {
    let s = Summary::read(summary)?;
    fs::create_dir_all(out)?;
    match format {
        "json" => s.write(&out.join("summary.json")),
        _ => {
            output::write_records(&out.join("records.csv"), &s.records)?;
            for r in &s.records {
                output::write_pair_samples(&out.join(format!("run_n{}_nu{:.6e}.csv", r.n, r.nu)), r)?;
            }
            Ok(())
        }
    }
}

/// The one-line error report printed by the binary.
pub fn error_line(e: &ThinflowError) -> String {
    let msg = e.to_string().replace('\n', " ");
    format!("error: {}: {msg}", e.category())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checkpoint_schedule_ends_at_the_horizon() {
        assert_eq!(checkpoint_times(0.0, 1.0, None), vec![1.0]);
        assert_eq!(checkpoint_times(0.0, 1.0, Some(0.25)), vec![0.25, 0.5, 0.75, 1.0]);
        assert_eq!(checkpoint_times(0.3, 1.0, Some(0.5)), vec![0.5, 1.0]);
    }

    #[test]
    fn tracer_files_accept_both_separators() {
        let p = std::env::temp_dir().join(format!("thinflow-tracers-{}.txt", std::process::id()));
        fs::write(&p, "# seeds\n0.1 0.2\n-0.5,0.25\n\n").unwrap();
        assert_eq!(read_tracers(&p).unwrap(), vec![[0.1, 0.2], [-0.5, 0.25]]);
        fs::write(&p, "0.1\n").unwrap();
        assert!(matches!(read_tracers(&p), Err(ThinflowError::Usage(_))));
    }

    #[test]
    fn error_lines_carry_a_category() {
        let e = ThinflowError::from(Error::UnderResolved { size: 64, required: 256 });
        assert!(error_line(&e).starts_with("error: under-resolved: "));
        assert!(!error_line(&e).contains('\n'));
    }
}
