//! Run orchestration behind the `tdhfb` binary: one function per
//! subcommand, each writing CSV files with a `#` provenance header.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{OutputFormat, RunConfig};
use crate::diagnostics::{collapsing_ratio_gamma, collapsing_ratio_lambda, norm_nt, NormReport, NORM_COMPONENTS};
use crate::error::{Error, Result};
use crate::initial::{random_gamma, random_lambda};
use crate::integrator::{evolve, free_gamma, free_lambda, picard_solve, solve_hartree, Trajectory};
use crate::snapshot::write_snapshot;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Command-line overrides layered on top of the config file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
}

/// Files written by a command plus its headline numbers.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub summary: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Picard,
    Hartree,
    VerifyEstimates,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::Hartree => "hartree",
            Command::VerifyEstimates => "verify-estimates",
            Command::Sweep => "sweep",
        }
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    command: Command,
    out: PathBuf,
    seed: u64,
}

impl Ctx<'_> {
    fn header(&self) -> Vec<String> {
        let c = self.cfg;
        let p = &c.potential;
        vec![
            format!("tdhfb {VERSION} {}", self.command.name()),
            format!("config_sha256: {}", c.source_hash),
            format!("grid: L={} M={}", c.grid.half_length, c.grid.points),
            format!(
                "potential: profile={:?} beta={} N={} discretization={:?}",
                p.profile, p.beta, p.n, p.discretization
            ),
            format!(
                "stepper: scheme={:?} dt={} T={} stride={} resym_every={}",
                c.stepper.scheme, c.stepper.dt, c.stepper.t_final, c.stepper.snapshot_stride, c.stepper.resym_every
            ),
            format!("epsilon_request: {}", c.estimates.epsilon),
            format!("seed: {}", self.seed),
        ]
    }

    fn csv(&self, name: &str, columns: &[&str], rows: &[Vec<String>], report: &mut Report) -> Result<()> {
        let path = self.out.join(name);
        let mut f = BufWriter::new(File::create(&path)?);
        for line in self.header() {
            writeln!(f, "# {line}")?;
        }
        let mut w = csv::Writer::from_writer(f);
        w.write_record(columns)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        report.files.push(path);
        Ok(())
    }
}

fn num(v: f64) -> String {
    format!("{v:e}")
}

fn timeseries_rows(tr: &Trajectory) -> Vec<Vec<String>> {
    let s = &tr.series;
    (0..s.len())
        .map(|i| {
            vec![
                num(s.times[i]),
                num(s.number[i]),
                num(s.energy[i]),
                num(s.gamma_hermiticity[i]),
                num(s.lambda_symmetry[i]),
            ]
        })
        .collect()
}

const TIMESERIES_COLUMNS: [&str; 5] = ["t", "particle_number", "energy", "gamma_hermiticity", "lambda_symmetry"];

fn norm_summary(norms: &NormReport, out: &mut BTreeMap<String, f64>) {
    for name in NORM_COMPONENTS {
        out.insert(name.to_string(), norms.get(name));
    }
}

fn summary_row(summary: &BTreeMap<String, f64>) -> (Vec<&str>, Vec<String>) {
    summary.iter().map(|(k, v)| (k.as_str(), num(*v))).unzip()
}

/// Runs `command` under `cfg`, honoring the overrides and the thread count.
pub fn run(command: Command, cfg: &RunConfig, ov: &Overrides) -> Result<Report> {
    let out = ov.out.clone().unwrap_or_else(|| cfg.output_dir());
    fs::create_dir_all(&out)?;
    let ctx = Ctx {
        cfg,
        command,
        out,
        seed: ov.seed.unwrap_or(cfg.seed),
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = ov.threads {
        if k == 0 {
            return Err(Error::InvalidParameter("--threads must be at least 1".into()));
        }
        pool = pool.num_threads(k);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| match command {
        Command::Simulate => cmd_simulate(&ctx),
        Command::Picard => cmd_picard(&ctx),
        Command::Hartree => cmd_hartree(&ctx),
        Command::VerifyEstimates => cmd_verify_estimates(&ctx),
        Command::Sweep => cmd_sweep(&ctx),
    })
}

fn cmd_simulate(ctx: &Ctx) -> Result<Report> {
    let cfg = ctx.cfg;
    let table = cfg.table()?;
    let s0 = cfg.initial_state(table)?;
    let step = cfg.step_config();
    info!("simulate: {} steps of dt={}", step.steps(), step.dt);
    let tr = evolve(&s0, &step)?;
    let mut report = Report::default();
    ctx.csv("timeseries.csv", &TIMESERIES_COLUMNS, &timeseries_rows(&tr), &mut report)?;

    let p = cfg.estimate_params(cfg.potential.beta)?;
    let mut summary = BTreeMap::new();
    summary.insert("number_drift".into(), tr.series.number_drift());
    summary.insert("energy_drift".into(), tr.series.energy_drift());
    summary.insert("max_symmetry_drift".into(), tr.max_symmetry_drift);
    summary.insert("epsilon".into(), p.epsilon);
    summary.insert("sigma".into(), p.sigma);
    if tr.states.len() >= 4 {
        norm_summary(&norm_nt(&tr, &p)?, &mut summary);
    }
    let (cols, row) = summary_row(&summary);
    ctx.csv("summary.csv", &cols, &[row], &mut report)?;
    if cfg.wants(OutputFormat::Snapshot) {
        let path = ctx.out.join("final.snap");
        write_snapshot(&path, &tr.final_state)?;
        report.files.push(path);
    }
    report.summary = summary;
    Ok(report)
}

fn cmd_picard(ctx: &Ctx) -> Result<Report> {
    let cfg = ctx.cfg;
    let s0 = cfg.initial_state(cfg.table()?)?;
    let st = &cfg.stepper;
    info!("picard: {} iterations on {} nodes over T={}", st.picard_iters, st.picard_nodes, st.t_final);
    let r = picard_solve(&s0, st.t_final, st.picard_iters, st.picard_nodes)?;
    let mut report = Report::default();
    let rows: Vec<Vec<String>> = r
        .differences
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let ratio = if i == 0 { f64::NAN } else { d / r.differences[i - 1] };
            vec![(i + 1).to_string(), num(*d), num(ratio)]
        })
        .collect();
    ctx.csv("picard.csv", &["iteration", "difference", "ratio"], &rows, &mut report)?;
    ctx.csv("timeseries.csv", &TIMESERIES_COLUMNS, &timeseries_rows(&r.trajectory), &mut report)?;

    let mut summary = BTreeMap::new();
    let ratios: Vec<f64> = r.differences.windows(2).map(|w| w[1] / w[0]).collect();
    if !ratios.is_empty() {
        summary.insert("max_ratio".into(), ratios.iter().cloned().fold(f64::MIN, f64::max));
    }
    summary.insert("iterations".into(), r.differences.len() as f64);
    summary.insert("final_difference".into(), r.differences.last().copied().unwrap_or(0.0));
    summary.insert("number_drift".into(), r.trajectory.series.number_drift());
    summary.insert("energy_drift".into(), r.trajectory.series.energy_drift());
    let (cols, row) = summary_row(&summary);
    ctx.csv("summary.csv", &cols, &[row], &mut report)?;
    if cfg.wants(OutputFormat::Snapshot) {
        let path = ctx.out.join("final.snap");
        write_snapshot(&path, &r.trajectory.final_state)?;
        report.files.push(path);
    }
    report.summary = summary;
    Ok(report)
}

fn cmd_hartree(ctx: &Ctx) -> Result<Report> {
    let cfg = ctx.cfg;
    let table = cfg.table()?;
    let s0 = cfg.initial_state(table.clone())?;
    let h = solve_hartree(&s0.gamma, &table, &cfg.step_config())?;
    let mut report = Report::default();
    let rows: Vec<Vec<String>> = (0..h.times.len())
        .map(|i| vec![num(h.times[i]), num(h.trace[i]), num(h.l2_norm[i]), num(h.hermiticity[i])])
        .collect();
    ctx.csv("hartree.csv", &["t", "trace", "l2_norm", "hermiticity"], &rows, &mut report)?;
    let drift = |v: &[f64]| crate::diagnostics::DiagnosticSeries::relative_drift(v);
    let mut summary = BTreeMap::new();
    summary.insert("trace_drift".into(), drift(&h.trace));
    summary.insert("l2_norm_drift".into(), drift(&h.l2_norm));
    summary.insert("max_hermiticity".into(), h.hermiticity.iter().cloned().fold(0.0, f64::max));
    let (cols, row) = summary_row(&summary);
    ctx.csv("summary.csv", &cols, &[row], &mut report)?;
    report.summary = summary;
    Ok(report)
}

/// Ratios of one ensemble member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MemberRatios {
    pub gamma: f64,
    pub lambda_quarter: f64,
    pub lambda_l4l2: f64,
}

/// Seeded ensemble of free-flow collapsing ratios, evaluated in parallel but
/// drawn sequentially so the result does not depend on the thread count.
///
/// Members are random packet kernels at their focus time, rewound by `T/2`
/// so the verifier window is centered on the focus. The ratios are
/// time-translation invariant, and centering keeps the tapered window from
/// discarding the part of the flow where the data is concentrated.
pub fn ensemble_ratios(cfg: &RunConfig, seed: u64) -> Result<Vec<MemberRatios>> {
    let e = &cfg.estimates;
    let grid = cfg.spatial_grid();
    let ranges = e.packet_ranges();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members: Vec<_> = (0..e.ensemble_size)
        .map(|_| {
            let g0 = random_gamma(&mut rng, &grid, e.rank, &ranges);
            let l0 = random_lambda(&mut rng, &grid, e.rank, &ranges);
            (free_gamma(&g0, -0.5 * e.window), free_lambda(&l0, -0.5 * e.window))
        })
        .collect();
    members
        .par_iter()
        .map(|(g0, l0)| {
            let gamma = collapsing_ratio_gamma(g0, e.window, e.time_samples)?;
            let (lambda_quarter, lambda_l4l2) = collapsing_ratio_lambda(l0, e.window, e.time_samples)?;
            Ok(MemberRatios {
                gamma,
                lambda_quarter,
                lambda_l4l2,
            })
        })
        .collect()
}

fn cmd_verify_estimates(ctx: &Ctx) -> Result<Report> {
    let e = &ctx.cfg.estimates;
    info!("verify-estimates: {} members, window {}, {} samples", e.ensemble_size, e.window, e.time_samples);
    let ratios = ensemble_ratios(ctx.cfg, ctx.seed)?;
    let mut report = Report::default();
    let rows: Vec<Vec<String>> = ratios
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), num(r.gamma), num(r.lambda_quarter), num(r.lambda_l4l2)])
        .collect();
    ctx.csv(
        "estimates.csv",
        &["member", "gamma_ratio", "lambda_quarter_ratio", "lambda_l4l2_ratio"],
        &rows,
        &mut report,
    )?;
    let max = |f: fn(&MemberRatios) -> f64| ratios.iter().map(f).fold(f64::MIN, f64::max);
    let finite = ratios
        .iter()
        .all(|r| r.gamma.is_finite() && r.lambda_quarter.is_finite() && r.lambda_l4l2.is_finite());
    let mut summary = BTreeMap::new();
    summary.insert("members".into(), ratios.len() as f64);
    summary.insert("max_gamma_ratio".into(), max(|r| r.gamma));
    summary.insert("max_lambda_quarter_ratio".into(), max(|r| r.lambda_quarter));
    summary.insert("max_lambda_l4l2_ratio".into(), max(|r| r.lambda_l4l2));
    summary.insert("all_finite".into(), if finite { 1.0 } else { 0.0 });
    let (cols, row) = summary_row(&summary);
    ctx.csv("estimates_summary.csv", &cols, &[row], &mut report)?;
    report.summary = summary;
    Ok(report)
}

/// Norms and drifts of one `(N, β)` sweep cell.
pub fn sweep_cell(cfg: &RunConfig, n: f64, beta: f64) -> Result<BTreeMap<String, f64>> {
    let table = cfg.table_for(beta, n)?;
    let s0 = cfg.initial_state(table)?;
    let tr = evolve(&s0, &cfg.step_config())?;
    let p = cfg.estimate_params(beta)?;
    let mut m = BTreeMap::new();
    norm_summary(&norm_nt(&tr, &p)?, &mut m);
    m.insert("number_drift".into(), tr.series.number_drift());
    m.insert("energy_drift".into(), tr.series.energy_drift());
    m.insert("sigma".into(), p.sigma);
    m.insert("epsilon".into(), p.epsilon);
    Ok(m)
}

fn cmd_sweep(ctx: &Ctx) -> Result<Report> {
    let sw = &ctx.cfg.sweep;
    let cells: Vec<(f64, f64)> = sw
        .beta_values
        .iter()
        .flat_map(|&b| sw.n_values.iter().map(move |&n| (n, b)))
        .collect();
    info!("sweep: {} cells", cells.len());
    let results: Vec<BTreeMap<String, f64>> = cells
        .par_iter()
        .map(|&(n, b)| sweep_cell(ctx.cfg, n, b))
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut report = Report::default();
    for (&(n, b), m) in cells.iter().zip(&results) {
        for (k, v) in m {
            rows.push(vec![num(n), num(b), k.clone(), num(*v)]);
            report.summary.insert(format!("{k}@N={n},beta={b}"), *v);
        }
    }
    ctx.csv("sweep.csv", &["n", "beta", "quantity", "value"], &rows, &mut report)?;
    Ok(report)
}

/// One-line JSON error record for the binary's stderr.
pub fn error_record(command: Option<Command>, e: &Error) -> String {
    serde_json::json!({
        "error": e.kind(),
        "command": command.map(Command::name),
        "message": e.to_string(),
    })
    .to_string()
}

/// Writes `error.json` next to the outputs; failures here are ignored since
/// the record also goes to stderr.
pub fn write_error_record(dir: &Path, record: &str) {
    if fs::create_dir_all(dir).is_ok() {
        let _ = fs::write(dir.join("error.json"), format!("{record}\n"));
    }
}
