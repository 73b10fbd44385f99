// Copyright 2026 Penning Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Every subcommand that writes a file also writes `<file>.manifest.json`
//! holding the argument vector; `penning replay <manifest>` re-runs it.
//! Options may also come from `--config FILE`, a `key = value` file whose keys
//! are the long flag names; flags given on the command line take precedence.
//!
//! Exit codes: 0 success, 2 usage, 3 I/O, 4 domain (not confined, not a loop,
//! failed verification).

use clap::{Args, Parser, Subcommand};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::json;
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::floquet::{
    region_map, AxialFrequency, GridAxis, PhysicalField, RegionMapSpec, RotatingFieldConfig,
    StabilityClass,
};
use crate::format::fmt_sig;
use crate::phases::{
    angle_distance, beta_floquet_lz, beta_floquet_sum, beta_loop, richardson_step,
    LoopSpectrumModel, PhaseMethod, PhaseRecord, StateDistribution,
};
use crate::reference::match_report;
use crate::solver::{multi_start_solve, write_csv, MultiStartOptions, TargetClass};
use crate::symplectic::{verify_identity_2, verify_identity_3};
use crate::trap::{LoopSpec, TrapConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_DOMAIN: i32 = 4;

/// Truncation tolerance for the default finite-difference step of `phase floquet`.
pub const RICHARDSON_TOL: f64 = 1e-7;

/// Residual threshold for `verify`.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug, Parser)]
#[command(
    name = "penning",
    version,
    about = "Dynamical manipulation of a Penning-trapped particle"
)]
struct Cli {
    /// Read further options from a `key = value` file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the hexagon operator identities for each scale parameter.
    Verify(VerifyArgs),
    /// Find evolution loops for rational ratios ω_c/ω₀.
    Loops(LoopsArgs),
    /// Multi-start search for two-kick schedules of a given class.
    Solve(SolveArgs),
    /// Stability classification over an α × α₀ grid.
    Map(MapArgs),
    /// Loop and geometric phases.
    #[command(subcommand)]
    Phase(PhaseCommand),
    /// Re-run the command recorded in a manifest.
    Replay { manifest: PathBuf },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Comma-separated scale parameters (default 1).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lambda: Vec<f64>,
}

#[derive(Debug, Args)]
struct LoopsArgs {
    /// Comma-separated ratios such as 3/2.
    #[arg(long, value_delimiter = ',', required = true)]
    ratio: Vec<String>,
    /// Largest loop period searched, in units of T.
    #[arg(long, default_value_t = 64)]
    max_periods: u32,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// fourier3d, fourierz-scalexy or scale3d.
    #[arg(long)]
    kind: String,
    #[arg(long, default_value_t = 2000)]
    starts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Initial kick strengths are drawn from [−fmax, fmax] in units of ω₀.
    #[arg(long, default_value_t = 10.0)]
    fmax: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MapArgs {
    /// start:end:count
    #[arg(long)]
    alpha: String,
    /// start:end:count
    #[arg(long)]
    alpha0: String,
    /// Pin w = 4α₀/3.
    #[arg(long, conflicts_with = "w")]
    loop_constraint: bool,
    /// Fixed axial frequency ω₀/ω.
    #[arg(long)]
    w: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum PhaseCommand {
    /// φ and β on an evolution loop of the static trap.
    Loop(PhaseLoopArgs),
    /// Geometric phase of a Floquet state, by both methods.
    Floquet(PhaseFloquetArgs),
}

#[derive(Debug, Args)]
struct PhaseLoopArgs {
    /// `ground` or n₊,n₋,n_z.
    #[arg(long, default_value = "ground")]
    state: String,
    /// ω_c/ω₀ as a ratio.
    #[arg(long, default_value = "3/2")]
    ratio: String,
    #[arg(long, default_value_t = 1.0)]
    omega0: f64,
    /// Loop time in units of T (defaults to the shortest loop).
    #[arg(long)]
    periods: Option<u32>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PhaseFloquetArgs {
    /// Mode occupations, ascending frequency.
    #[arg(long, default_value = "0,0,0")]
    n: String,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    alpha0: f64,
    #[arg(long, conflicts_with = "w")]
    loop_constraint: bool,
    #[arg(long)]
    w: Option<f64>,
    /// Rotation frequency ω in physical units.
    #[arg(long, default_value_t = 1.0)]
    omega: f64,
    /// Finite-difference step in ω (default: chosen by the Richardson rule).
    #[arg(long)]
    delta: Option<f64>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Record written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<PathBuf>,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_)
            | Error::TrapRegime(_)
            | Error::Domain(_)
            | Error::Dimension { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

/// Turn `key = value` lines into trailing `--key value` arguments for keys not
/// already present.
fn config_args(path: &Path, existing: &[String]) -> std::result::Result<Vec<String>, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_at(path))?;
    let mut extra = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Failure::Usage(format!(
                "{}:{}: expected key = value",
                path.display(),
                lineno + 1
            )));
        };
        let flag = format!("--{}", key.trim().replace('_', "-"));
        let value = value.trim();
        if existing
            .iter()
            .any(|a| a == &flag || a.starts_with(&format!("{flag}=")))
        {
            continue;
        }
        match value {
            "true" => extra.push(flag),
            "false" => {}
            v => {
                extra.push(flag);
                extra.push(v.to_string());
            }
        }
    }
    Ok(extra)
}

fn expand_config(args: Vec<String>) -> std::result::Result<Vec<String>, Failure> {
    let mut path = None;
    let mut kept = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            match it.next() {
                Some(p) => path = Some(PathBuf::from(p)),
                None => return Err(Failure::Usage("--config requires a path".into())),
            }
        } else if let Some(p) = a.strip_prefix("--config=") {
            path = Some(PathBuf::from(p));
        } else {
            kept.push(a);
        }
    }
    if let Some(p) = path {
        let extra = config_args(&p, &kept)?;
        kept.extend(extra);
    }
    Ok(kept)
}

/// Parse and execute; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<String> = args
        .into_iter()
        .map(|a| a.into().to_string_lossy().into_owned())
        .collect();
    let code = match dispatch(args, out, err) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(err, "I/O error: {m}");
            EXIT_IO
        }
        Err(Failure::Domain(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_DOMAIN
        }
    };
    let _ = out.flush();
    code
}

fn dispatch(args: Vec<String>, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let args = expand_config(args)?;
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write!(out, "{}", e.render())?;
                    Ok(())
                }
                _ => Err(Failure::Usage(
                    e.render().to_string().trim_end().to_string(),
                )),
            };
        }
    };
    let argv = args.get(1..).unwrap_or_default().to_vec();
    match cli.command {
        Command::Verify(a) => cmd_verify(a, out),
        Command::Loops(a) => cmd_loops(a, out),
        Command::Solve(a) => cmd_solve(a, &argv, out, err),
        Command::Map(a) => cmd_map(a, &argv, out, err),
        Command::Phase(PhaseCommand::Loop(a)) => cmd_phase_loop(a, &argv, out),
        Command::Phase(PhaseCommand::Floquet(a)) => cmd_phase_floquet(a, &argv, out),
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(&manifest).map_err(io_at(&manifest))?;
            let m: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", manifest.display())))?;
            let mut full = vec!["penning".to_string()];
            full.extend(m.argv);
            dispatch(full, out, err)
        }
    }
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    let lambdas = if a.lambda.is_empty() {
        vec![1.0]
    } else {
        a.lambda
    };
    if let Some(bad) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Failure::Usage(format!(
            "lambda must be positive, got {bad}"
        )));
    }
    let mut failed = 0;
    for (name, f) in [
        (
            "identity-2",
            verify_identity_2 as fn(f64) -> crate::Result<f64>,
        ),
        ("identity-3", verify_identity_3),
    ] {
        for &l in &lambdas {
            let r = f(l)?;
            let ok = r < IDENTITY_TOL;
            failed += usize::from(!ok);
            writeln!(
                out,
                "{name} lambda={} residual={:.3e} {}",
                fmt_sig(l),
                r,
                if ok { "PASS" } else { "FAIL" }
            )?;
        }
    }
    if failed > 0 {
        return Err(Failure::Domain(format!("{failed} identity checks failed")));
    }
    Ok(())
}

fn parse_ratio(s: &str) -> std::result::Result<Ratio<i64>, Failure> {
    let bad = || Failure::Usage(format!("expected a ratio p/q, got '{s}'"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (
            p.trim().parse::<i64>().map_err(|_| bad())?,
            q.trim().parse::<i64>().map_err(|_| bad())?,
        ),
        None => (s.trim().parse::<i64>().map_err(|_| bad())?, 1),
    };
    if q == 0 {
        return Err(bad());
    }
    Ok(Ratio::new(p, q))
}

fn cmd_loops(a: LoopsArgs, out: &mut dyn Write) -> CmdResult {
    let ratios = a
        .ratio
        .iter()
        .map(|s| parse_ratio(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    writeln!(out, "ratio\tomega_rho/omega0\tloop_periods")?;
    let mut errors = 0;
    for r in ratios {
        match crate::trap::radial_ratio(r) {
            Err(e) => {
                errors += 1;
                writeln!(out, "{r}\terror\t{e}")?;
            }
            Ok(None) => writeln!(out, "{r}\tirrational\tnone within {} T", a.max_periods)?,
            Ok(Some(rho)) => match LoopSpec::from_ratio(r, a.max_periods)? {
                Some(spec) => writeln!(out, "{r}\t{rho}\t{}", spec.tau_periods)?,
                None => writeln!(out, "{r}\t{rho}\tnone within {} T", a.max_periods)?,
            },
        }
    }
    if errors > 0 {
        return Err(Failure::Domain(format!(
            "{errors} ratio(s) outside the trapping regime"
        )));
    }
    Ok(())
}

fn create(path: &Path) -> std::result::Result<BufWriter<File>, Failure> {
    Ok(BufWriter::new(File::create(path).map_err(io_at(path))?))
}

fn write_manifest(manifest: &RunManifest, output: &Path) -> CmdResult {
    let path = RunManifest::path_for(output);
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, manifest).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(w).map_err(io_at(&path))?;
    w.flush().map_err(io_at(&path))?;
    Ok(())
}

fn manifest(
    command: &str,
    argv: &[String],
    parameters: serde_json::Value,
    seed: Option<u64>,
    output: &Path,
) -> RunManifest {
    RunManifest {
        command: command.to_string(),
        argv: argv.to_vec(),
        parameters,
        seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: vec![output.to_path_buf()],
    }
}

/// Write `body` to `output` (plus manifest) or to `out`.
fn emit(
    output: Option<&Path>,
    out: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
    man: impl FnOnce(&Path) -> RunManifest,
) -> CmdResult {
    match output {
        Some(path) => {
            let mut w = create(path)?;
            body(&mut w).map_err(io_at(path))?;
            w.flush().map_err(io_at(path))?;
            write_manifest(&man(path), path)
        }
        None => Ok(body(out)?),
    }
}

fn cmd_solve(a: SolveArgs, argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let kind: TargetClass = a.kind.parse()?;
    let opts = MultiStartOptions {
        n_starts: a.starts,
        seed: a.seed,
        f_max: a.fmax,
        max_iter: a.max_iter,
        ..MultiStartOptions::default()
    };
    let cfg = TrapConfig::default();
    let records = multi_start_solve(kind, &cfg, &opts)?;
    let params = json!({
        "kind": kind.token(),
        "starts": opts.n_starts,
        "seed": opts.seed,
        "fmax": opts.f_max,
        "max_iter": opts.max_iter,
        "dedup_tol": opts.dedup_tol,
    });
    emit(
        a.output.as_deref(),
        out,
        |w| write_csv(w, &records),
        |p| manifest("solve", argv, params, Some(opts.seed), p),
    )?;
    let report: &mut dyn Write = if a.output.is_some() { out } else { err };
    let matched = match_report(kind, &records);
    for (i, m) in matched.iter().enumerate() {
        match m {
            Some(r) => writeln!(report, "reference row {}: found (record {r})", i + 1)?,
            None => writeln!(report, "reference row {}: missing", i + 1)?,
        }
    }
    writeln!(
        report,
        "{} solutions; {}/{} reference rows matched",
        records.len(),
        matched.iter().filter(|m| m.is_some()).count(),
        matched.len()
    )?;
    Ok(())
}

fn cmd_map(a: MapArgs, argv: &[String], out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let alpha: GridAxis = a.alpha.parse()?;
    let alpha0: GridAxis = a.alpha0.parse()?;
    let axial = match (a.loop_constraint, a.w) {
        (true, _) => AxialFrequency::LoopConstraint,
        (false, Some(w)) => AxialFrequency::Fixed(w),
        (false, None) => {
            return Err(Failure::Usage(
                "give either --loop-constraint or --w".into(),
            ))
        }
    };
    let spec = RegionMapSpec::new(alpha, alpha0, axial);
    let map = region_map(&spec)?;
    let params = serde_json::to_value(spec).map_err(|e| Failure::Io(e.to_string()))?;
    emit(
        a.output.as_deref(),
        out,
        |w| map.write_csv(w),
        |p| manifest("map", argv, params, None, p),
    )?;
    let report: &mut dyn Write = if a.output.is_some() { out } else { err };
    writeln!(
        report,
        "confined={} deconfined={} marginal={} confined_components(alpha>0)={}",
        map.count(StabilityClass::Confined),
        map.count(StabilityClass::Deconfined),
        map.count(StabilityClass::Marginal),
        map.confined_components()
    )?;
    Ok(())
}

fn parse_triple(s: &str) -> std::result::Result<[u32; 3], Failure> {
    let bad = || {
        Failure::Usage(format!(
            "expected three nonnegative integers a,b,c, got '{s}'"
        ))
    };
    let v: Vec<u32> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| bad()))
        .collect::<std::result::Result<_, _>>()?;
    v.try_into().map_err(|_| bad())
}

fn emit_json(
    output: Option<&Path>,
    out: &mut dyn Write,
    value: &serde_json::Value,
    command: &str,
    argv: &[String],
) -> CmdResult {
    let params = value.clone();
    emit(
        output,
        out,
        |w| {
            serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
            writeln!(w)
        },
        |p| manifest(command, argv, params, None, p),
    )
}

fn cmd_phase_loop(a: PhaseLoopArgs, argv: &[String], out: &mut dyn Write) -> CmdResult {
    let n = if a.state == "ground" {
        [0, 0, 0]
    } else {
        parse_triple(&a.state)?
    };
    let ratio = parse_ratio(&a.ratio)?;
    let c = *ratio.numer() as f64 / *ratio.denom() as f64;
    let cfg = TrapConfig::new(1.0, a.omega0, c * a.omega0)?;
    let periods = match a.periods {
        Some(k) => k,
        None => {
            LoopSpec::from_ratio(ratio, 64)?
                .ok_or_else(|| Failure::Domain(format!("no loop within 64 T for ratio {ratio}")))?
                .tau_periods
        }
    };
    let tau = periods as f64 * cfg.period();
    let model = LoopSpectrumModel::from_trap(&cfg);
    let res = beta_loop(&model, tau, &StateDistribution::eigenstate(n))?;
    let rec = PhaseRecord {
        phi: Some(res.phi),
        beta: res.beta,
        method: PhaseMethod::Loop,
        n: n.to_vec(),
        config: json!({
            "omega0": model.omega0,
            "omega_c": model.omega_c,
            "omega_rho": model.omega_rho,
            "tau": tau,
            "periods": periods,
            "beta_unreduced": res.beta_unreduced,
        }),
    };
    let value = serde_json::to_value(rec).map_err(|e| Failure::Io(e.to_string()))?;
    emit_json(a.output.as_deref(), out, &value, "phase loop", argv)
}

fn cmd_phase_floquet(a: PhaseFloquetArgs, argv: &[String], out: &mut dyn Write) -> CmdResult {
    let n = parse_triple(&a.n)?;
    let cfg = match (a.loop_constraint, a.w) {
        (true, _) => RotatingFieldConfig::loop_constrained(a.alpha, a.alpha0)?,
        (false, Some(w)) => RotatingFieldConfig::new(a.alpha, a.alpha0, w)?,
        (false, None) => {
            return Err(Failure::Usage(
                "give either --loop-constraint or --w".into(),
            ))
        }
    };
    if !(a.omega > 0.0 && a.omega.is_finite()) {
        return Err(Failure::Usage(format!(
            "omega must be positive, got {}",
            a.omega
        )));
    }
    let phys = PhysicalField::from_dimensionless(&cfg, a.omega);
    let lz = beta_floquet_lz(&phys, n)?;
    let delta = match a.delta {
        Some(d) => d,
        None => richardson_step(&phys, n, RICHARDSON_TOL)?.delta,
    };
    let sum = beta_floquet_sum(&phys, n, delta)?;
    let config = json!({
        "alpha": cfg.alpha,
        "alpha0": cfg.alpha0,
        "w": cfg.w,
        "omega": a.omega,
        "delta": delta,
    });
    let record = |method, beta| PhaseRecord {
        phi: None,
        beta,
        method,
        n: n.to_vec(),
        config: config.clone(),
    };
    let mut value = BTreeMap::new();
    value.insert(
        "sum",
        serde_json::to_value(record(PhaseMethod::Sum, sum.beta))
            .map_err(|e| Failure::Io(e.to_string()))?,
    );
    value.insert(
        "lz",
        serde_json::to_value(record(PhaseMethod::Lz, lz.beta))
            .map_err(|e| Failure::Io(e.to_string()))?,
    );
    value.insert("difference", json!(angle_distance(sum.beta, lz.beta)));
    let value = serde_json::to_value(value).map_err(|e| Failure::Io(e.to_string()))?;
    emit_json(a.output.as_deref(), out, &value, "phase floquet", argv)
}
