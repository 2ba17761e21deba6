use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use glv_core::continuation::{switch_branch, trace_branch, BifurcationKind, Branch, BranchEnd, Start};
use glv_core::{
    checks, free_energy, guess, newton_solve, postproc, stability, ExtendedState, Grid, OrderField, ReferencePolicy,
};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::config::{GuessSpec, Mode, RunConfig};
use crate::io;

/// Failure that should map to exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// Collects outputs and timings for the manifest.
pub struct RunLog {
    pub out: PathBuf,
    pub outputs: Vec<PathBuf>,
    pub timings: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub lines: Vec<String>,
}

impl RunLog {
    fn new(out: PathBuf) -> Self {
        Self { out, outputs: Vec::new(), timings: Vec::new(), warnings: Vec::new(), lines: Vec::new() }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn record(&mut self, p: PathBuf) {
        self.outputs.push(p);
    }

    fn say(&mut self, line: String) {
        println!("{line}");
        self.lines.push(line);
    }
}

pub struct Outcome {
    pub status: i32,
}

fn grid_of(cfg: &RunConfig) -> Result<Grid> {
    Ok(Grid::new(cfg.d, cfg.grid_n())?)
}

fn field_from(spec: &GuessSpec, grid: Grid) -> Result<OrderField> {
    match spec {
        GuessSpec::Constant { re, im } => Ok(guess::constant(grid, Complex64::new(*re, *im))),
        GuessSpec::Vortices { centers, amplitude } => Ok(guess::vortices(grid, centers, *amplitude)),
        GuessSpec::File { path } => {
            let (psi, _) = io::read_field(path)?;
            if psi.grid() != &grid {
                return Err(ConfigError(format!("{} is on a different grid than the config", path.display())).into());
            }
            Ok(psi)
        }
        GuessSpec::Switch { .. } => {
            Err(ConfigError("a switch descriptor is only valid as the start of a trace".into()).into())
        }
    }
}

fn start_from(spec: &GuessSpec, grid: Grid, mu: f64, direction: f64, fraction: f64) -> Result<Start> {
    match spec {
        GuessSpec::Switch { run, branch, bifurcation, choice } => {
            let bif = io::read_bifurcation(run, branch, *bifurcation)
                .map_err(|e| ConfigError(format!("loading bifurcation {bifurcation} of {branch}: {e:#}")))?;
            if bif.state.psi.grid() != &grid {
                return Err(ConfigError("parent run used a different grid".into()).into());
            }
            let guesses = switch_branch(&bif)?;
            let g = guesses.get(*choice).ok_or_else(|| {
                ConfigError(format!("choice {choice} out of range; {} directions available", guesses.len()))
            })?;
            Ok(Start::Switch {
                amplitude: fraction * bif.state.psi.norm(),
                base: bif.state,
                direction: g.direction.clone(),
            })
        }
        other => {
            Ok(Start::Guess { guess: ExtendedState::new(field_from(other, grid)?, mu), mu_sign: direction })
        }
    }
}

#[derive(Serialize)]
struct SolveSummary {
    mu: f64,
    eta: f64,
    residual_norm: f64,
    iterations: usize,
    energy: f64,
    norm_psi: f64,
    isotropy: String,
    total_vorticity: Option<i64>,
    vortices: Vec<postproc::VortexRecord>,
}

fn solve_mode(cfg: &RunConfig, ctx: &mut RunLog) -> Result<ExtendedState> {
    let grid = grid_of(cfg)?;
    let psi = field_from(&cfg.guess, grid)?;
    let t = Instant::now();
    let sol = newton_solve(ExtendedState::new(psi, cfg.mu), &ReferencePolicy::Auto, &cfg.newton)?;
    ctx.timings.push(("newton".into(), t.elapsed().as_secs_f64()));
    let psi = &sol.state.psi;
    let summary = SolveSummary {
        mu: sol.state.mu,
        eta: sol.state.eta,
        residual_norm: sol.residual_norm,
        iterations: sol.iterations,
        energy: free_energy(psi),
        norm_psi: psi.norm(),
        isotropy: glv_core::isotropy(psi, cfg.continuation.isotropy_tol)?.to_string(),
        total_vorticity: postproc::total_vorticity(psi).ok(),
        vortices: postproc::vortex_census(psi),
    };
    ctx.say(format!(
        "solved mu={} energy={} residual={:.3e} iterations={} isotropy={}",
        summary.mu, summary.energy, summary.residual_norm, summary.iterations, summary.isotropy
    ));
    let p = ctx.path("solution.json");
    io::write_atomic(&p, serde_json::to_string_pretty(&summary)?.as_bytes())?;
    ctx.record(p);
    let p = ctx.path("solution.csv");
    io::write_field(psi, sol.state.mu, &p)?;
    ctx.record(p);
    if cfg.write_patterns {
        for p in io::write_pattern(psi, sol.state.mu, &ctx.path("pattern"))? {
            ctx.record(p);
        }
    }
    Ok(sol.state)
}

fn eigen_mode(cfg: &RunConfig, ctx: &mut RunLog) -> Result<()> {
    let state = solve_mode(cfg, ctx)?;
    let mut es = cfg.continuation.eigen.clone();
    es.seed = cfg.seed;
    let t = Instant::now();
    let info = stability(&state.psi, &state.links(), cfg.eigen_count, &es, &[], None)?;
    ctx.timings.push(("eigen".into(), t.elapsed().as_secs_f64()));
    let mut s = String::from("index,eigenvalue,residual\n");
    for (k, (v, r)) in info.eigenvalues.iter().zip(&info.residuals).enumerate() {
        let _ = writeln!(s, "{k},{},{}", io::fmt_f(*v), io::fmt_f(*r));
    }
    let p = ctx.path("eigenvalues.csv");
    io::write_atomic(&p, s.as_bytes())?;
    ctx.record(p);
    ctx.say(format!(
        "n_unstable={} stable={} critical={:.6e} (multiplicity {}) phase-mode eigenvalue={:.3e}",
        info.n_unstable, info.stable, info.critical_value, info.critical_multiplicity, info.phase_eigenvalue
    ));
    Ok(())
}

fn end_str(end: &BranchEnd) -> String {
    match end {
        BranchEnd::WindowExit => "window".into(),
        BranchEnd::Trivial { mu } => format!("trivial at mu={mu:.6}"),
        BranchEnd::StepFailure(why) => format!("step failure: {why}"),
        BranchEnd::MaxPoints => "max points".into(),
        BranchEnd::AfterExtremum => "after extremum".into(),
    }
}

fn store_branch(cfg: &RunConfig, ctx: &mut RunLog, b: &Branch, table: &mut String) -> Result<()> {
    let p = ctx.path(&format!("branch_{}.csv", b.label));
    io::write_branch(b, &p)?;
    ctx.record(p);
    table.push_str(&io::bifurcation_rows(b));
    for bif in &b.bifurcations {
        io::write_bifurcation(&ctx.out, &b.label, bif)?;
        ctx.say(format!(
            "  bifurcation {}:{} mu*={:.6} multiplicity={} kind={} isotropy={}",
            b.label,
            bif.id,
            bif.mu,
            bif.multiplicity,
            bif.kind.as_str(),
            bif.isotropy
        ));
    }
    if cfg.write_patterns {
        if let (Some(first), Some(last)) = (b.points.first(), b.points.last()) {
            for (tag, pt) in [("first", first), ("last", last)] {
                let prefix = ctx.path(&format!("pattern_{}_{tag}", b.label));
                for p in io::write_pattern(pt.psi(), pt.mu(), &prefix)? {
                    ctx.record(p);
                }
            }
        }
    }
    let extrema: Vec<String> = b.mu_extrema().iter().map(|(m, _)| format!("{m:.6}")).collect();
    ctx.say(format!(
        "branch {}: {} points, mu in [{:.4}, {:.4}], end: {}{}",
        b.label,
        b.points.len(),
        b.points.iter().map(|p| p.mu()).fold(f64::INFINITY, f64::min),
        b.points.iter().map(|p| p.mu()).fold(f64::NEG_INFINITY, f64::max),
        end_str(&b.end),
        if extrema.is_empty() { String::new() } else { format!(", mu extrema {}", extrema.join(" ")) }
    ));
    for w in &b.warnings {
        ctx.warnings.push(format!("{}: {w}", b.label));
    }
    Ok(())
}

fn write_table(ctx: &mut RunLog, table: &str) -> Result<()> {
    let p = ctx.path("bifurcations.csv");
    io::write_atomic(&p, format!("{}\n{table}", io::BIFURCATION_HEADER).as_bytes())?;
    ctx.record(p);
    Ok(())
}

fn trace_mode(cfg: &RunConfig, ctx: &mut RunLog) -> Result<()> {
    let grid = grid_of(cfg)?;
    let start = start_from(&cfg.guess, grid, cfg.mu, cfg.direction, cfg.switch_fraction)?;
    let mut settings = cfg.settings();
    if matches!(start, Start::Switch { .. }) {
        settings.stop_after_extremum = cfg.stop_after_extremum;
    }
    let t = Instant::now();
    let b = trace_branch(start, &cfg.label, &settings)?;
    ctx.timings.push((format!("trace {}", b.label), t.elapsed().as_secs_f64()));
    let mut table = String::new();
    store_branch(cfg, ctx, &b, &mut table)?;
    write_table(ctx, &table)
}

fn direction_tag(kind: BifurcationKind, sub: Option<glv_core::IsotropyLabel>, sign: f64) -> String {
    let s = if sign > 0.0 { "p" } else { "m" };
    match (kind, sub) {
        (_, Some(glv_core::IsotropyLabel::Sigma)) => format!("sigma{s}"),
        (_, Some(glv_core::IsotropyLabel::SigmaRho)) => format!("sigmarho{s}"),
        _ => s.to_string(),
    }
}

fn diagram_mode(cfg: &RunConfig, ctx: &mut RunLog) -> Result<()> {
    let grid = grid_of(cfg)?;
    let settings = cfg.settings();
    let mut table = String::new();
    let mut roots: Vec<(String, Start)> =
        vec![(cfg.label.clone(), start_from(&cfg.guess, grid, cfg.mu, cfg.direction, cfg.switch_fraction)?)];
    for s in &cfg.extra_starts {
        let dirs: Vec<f64> = if s.direction == 0.0 { vec![1.0, -1.0] } else { vec![s.direction.signum()] };
        for (k, d) in dirs.iter().enumerate() {
            let label = if dirs.len() == 2 { format!("{}{}", s.label, if k == 0 { "up" } else { "down" }) } else { s.label.clone() };
            roots.push((label, start_from(&s.guess, grid, s.mu, *d, cfg.switch_fraction)?));
        }
    }
    let mut queue: Vec<(String, Start, usize)> = roots.into_iter().map(|(l, s)| (l, s, 0)).collect();
    let mut main_failed = None;
    let mut first = true;
    while !queue.is_empty() {
        let (label, start, depth) = queue.remove(0);
        let mut st = settings.clone();
        if depth > 0 {
            st.stop_after_extremum = cfg.stop_after_extremum;
        }
        let t = Instant::now();
        let result = trace_branch(start, &label, &st);
        ctx.timings.push((format!("trace {label}"), t.elapsed().as_secs_f64()));
        let b = match result {
            Ok(b) => b,
            Err(e) => {
                if first {
                    main_failed = Some(e.to_string());
                    first = false;
                    continue;
                }
                ctx.warnings.push(format!("{label}: {e}"));
                ctx.say(format!("branch {label}: failed: {e}"));
                continue;
            }
        };
        first = false;
        store_branch(cfg, ctx, &b, &mut table)?;
        if depth >= cfg.switch_depth {
            continue;
        }
        for bif in &b.bifurcations {
            if bif.kind == BifurcationKind::Turning {
                continue;
            }
            let guesses = match switch_branch(bif) {
                Ok(g) => g,
                Err(e) => {
                    ctx.warnings.push(format!("{}:{}: {e}", b.label, bif.id));
                    continue;
                }
            };
            for g in guesses.into_iter().filter(|g| cfg.both_signs || g.sign > 0.0) {
                let child = format!("{}.{}.{}", b.label, bif.id, direction_tag(bif.kind, g.subgroup, g.sign));
                let start = Start::Switch {
                    base: bif.state.clone(),
                    direction: g.direction,
                    amplitude: cfg.switch_fraction * bif.state.psi.norm(),
                };
                queue.push((child, start, depth + 1));
            }
        }
    }
    write_table(ctx, &table)?;
    if let Some(e) = main_failed {
        bail!("main branch: {e}");
    }
    Ok(())
}

fn verify_mode(cfg: &RunConfig, ctx: &mut RunLog) -> Result<bool> {
    let t = Instant::now();
    let results = checks::run_all(cfg.seed)?;
    ctx.timings.push(("verify".into(), t.elapsed().as_secs_f64()));
    for c in &results {
        ctx.say(format!(
            "{} {}: {:.3e} (tolerance {:.1e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.value,
            c.tolerance
        ));
    }
    let p = ctx.path("verify.json");
    io::write_atomic(&p, serde_json::to_string_pretty(&results)?.as_bytes())?;
    ctx.record(p);
    Ok(results.iter().all(|c| c.passed))
}

fn write_manifest(cfg: &RunConfig, mode: Mode, ctx: &RunLog, status: &str, error: Option<&str>) -> Result<()> {
    let mut echo = cfg.clone();
    echo.continuation = cfg.settings();
    let manifest = json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "core_version": glv_core::VERSION,
        "mode": mode.as_str(),
        "status": status,
        "error": error,
        "threads": glv_core::exec::threads(),
        "config": echo,
        "timings_seconds": ctx.timings.iter().map(|(k, v)| json!({"step": k, "seconds": v})).collect::<Vec<_>>(),
        "warnings": ctx.warnings,
        "outputs": ctx.outputs.iter().map(|p| p.strip_prefix(&ctx.out).unwrap_or(p).display().to_string()).collect::<Vec<_>>(),
    });
    io::write_atomic(&ctx.path("manifest.json"), serde_json::to_string_pretty(&manifest)?.as_bytes())
}

/// Runs `mode` and writes the manifest. Status 0 on success, 1 on a
/// numerical failure (partial outputs kept, plus a `FAILED` marker).
pub fn run(mode: Mode, cfg: &RunConfig) -> Result<Outcome> {
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let _ = fs::remove_file(cfg.out.join("FAILED"));
    let mut ctx = RunLog::new(cfg.out.clone());
    let t = Instant::now();
    let result: Result<bool> = match mode {
        Mode::Solve => solve_mode(cfg, &mut ctx).map(|_| true),
        Mode::Eigen => eigen_mode(cfg, &mut ctx).map(|_| true),
        Mode::Trace => trace_mode(cfg, &mut ctx).map(|_| true),
        Mode::Diagram => diagram_mode(cfg, &mut ctx).map(|_| true),
        Mode::Verify => verify_mode(cfg, &mut ctx),
    };
    ctx.timings.push(("total".into(), t.elapsed().as_secs_f64()));
    match result {
        Ok(true) => {
            write_manifest(cfg, mode, &ctx, "ok", None)?;
            Ok(Outcome { status: 0 })
        }
        Ok(false) => {
            let msg = "one or more checks failed";
            io::write_atomic(&cfg.out.join("FAILED"), format!("{msg}\n").as_bytes())?;
            write_manifest(cfg, mode, &ctx, "failed", Some(msg))?;
            Ok(Outcome { status: 1 })
        }
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => Err(e),
        Err(e) => {
            let msg = format!("{e:#}");
            io::write_atomic(&cfg.out.join("FAILED"), format!("{msg}\n").as_bytes())?;
            write_manifest(cfg, mode, &ctx, "failed", Some(&msg))?;
            eprintln!("error: {msg}");
            Ok(Outcome { status: 1 })
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: Option<&Path>) -> std::result::Result<RunConfig, ConfigError> {
    let cfg: RunConfig = match path {
        None => RunConfig::default(),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| ConfigError(format!("reading {}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| ConfigError(format!("parsing {}: {e}", p.display())))?
        }
    };
    cfg.validate().map_err(ConfigError)?;
    Ok(cfg)
}

pub fn config_error(e: &anyhow::Error) -> Option<String> {
    e.downcast_ref::<ConfigError>().map(|c| c.0.clone()).or_else(|| {
        e.chain().find_map(|c| c.downcast_ref::<ConfigError>()).map(|c| c.0.clone())
    })
}
