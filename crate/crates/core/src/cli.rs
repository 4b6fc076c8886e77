//! Command-line front end. Every subcommand writes CSV/JSON with fixed formatting, so
//! identical arguments give byte-identical files.
//!
//! Exit codes: 0 success, 2 input error, 3 regime error, 4 numerical failure (including
//! checks whose residual exceeds its bound).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::{json, Value};
use thiserror::Error;

use crate::asymptotics::{self, AsymptoticCase, AsymptoticsError, Regime};
use crate::inverse::{self, Bump, InverseError, UniquenessScenario};
use crate::kernel::{self, KernelError};
use crate::profile::{LiouvilleData, ProfileError, RefractiveProfile};
use crate::zeros::{self, Rect, SpectralZero, ZeroClass, ZerosError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Regime(String),
    #[error("{0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Regime(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<ProfileError> for CliError {
    fn from(e: ProfileError) -> Self {
        match e {
            ProfileError::QuadratureFailure(_) | ProfileError::BoundaryNotConverged { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<ZerosError> for CliError {
    fn from(e: ZerosError) -> Self {
        match e {
            ZerosError::InvalidRect(_) => CliError::Input(e.to_string()),
            ZerosError::Forward(crate::forward::ForwardError::InvalidTolerance(_)) => CliError::Input(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<AsymptoticsError> for CliError {
    fn from(e: AsymptoticsError) -> Self {
        match e {
            AsymptoticsError::IterationDiverged { .. } => CliError::Numerical(e.to_string()),
            AsymptoticsError::InvalidIndex(_) => CliError::Input(e.to_string()),
            AsymptoticsError::Profile(p) => p.into(),
            _ => CliError::Regime(e.to_string()),
        }
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        match e {
            KernelError::StepTooLarge { .. } | KernelError::Io(_) => CliError::Input(e.to_string()),
            KernelError::TailNotNormalized => CliError::Regime(e.to_string()),
            KernelError::Profile(p) => p.into(),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<InverseError> for CliError {
    fn from(e: InverseError) -> Self {
        match e {
            InverseError::RegimeError { .. } => CliError::Regime(e.to_string()),
            InverseError::Integration { .. } => CliError::Numerical(e.to_string()),
            InverseError::Profile(p) => p.into(),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "transmission", version, about = "Interior transmission eigenvalues of stratified media")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Travel time, regime, smoothness data and subinterval endpoints of a profile.
    ProfileInfo(ProfileInfoArgs),
    /// Zeros of d(k) in a rectangle of the first quadrant, plus real zeros up to --kmax.
    Spectrum(SpectrumArgs),
    /// Match a spectrum file against the leading-order asymptotics.
    Asymptotics(AsymptoticsArgs),
    /// Transformation-operator kernel identities and the representation oracle.
    KernelCheck(KernelCheckArgs),
    /// Two-way evaluation of the Wronskian function g(k) for a scenario.
    InverseCheck(InverseCheckArgs),
}

/// Rectangle `x0,x1,y0,y1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectArg(pub Rect);

impl FromStr for RectArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_floats(s)?;
        if v.len() != 4 {
            return Err(format!("expected x0,x1,y0,y1, got {} values", v.len()));
        }
        let r = Rect::new(v[0], v[1], v[2], v[3]);
        if !r.is_valid() || r.x0 < 0.0 || r.y0 < 0.0 {
            return Err(format!("need 0 ≤ x0 < x1 and 0 ≤ y0 < y1, got {s}"));
        }
        Ok(RectArg(r))
    }
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("not a finite number: {t:?}"))
        })
        .collect()
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    match parts.as_slice() {
        [a, b] => {
            let a = a.trim().parse::<i64>().map_err(|e| e.to_string())?;
            let b = b.trim().parse::<i64>().map_err(|e| e.to_string())?;
            Ok((a, b))
        }
        _ => Err(format!("expected n1,n2, got {s:?}")),
    }
}

#[derive(Debug, Args)]
pub struct ProfileInfoArgs {
    /// Profile: a JSON file, or a name such as rational_example, const4, raised_cosine:0.5.
    #[arg(long)]
    pub profile: String,
    /// Optical length b of the known outer shell, for the ε₂ endpoint and the density threshold.
    #[arg(long)]
    pub b: Option<f64>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[arg(long)]
    pub profile: String,
    #[arg(long, value_parser = RectArg::from_str)]
    pub rect: RectArg,
    /// Upper end of the real-axis scan (default: the rectangle's right edge).
    #[arg(long)]
    pub kmax: Option<f64>,
    /// Zero-location tolerance.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Output stem: writes STEM.csv, STEM.json and STEM_plot.csv.
    #[arg(long, default_value = "spectrum")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct AsymptoticsArgs {
    #[arg(long)]
    pub profile: String,
    /// Spectrum JSON written by the spectrum subcommand.
    #[arg(long)]
    pub spectrum: PathBuf,
    /// Index window n1,n2.
    #[arg(long, value_parser = parse_window, default_value = "5,30")]
    pub window: (i64, i64),
    /// Radii for the counting law (default: five radii up to the spectrum's right edge).
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Output stem: writes STEM_match.csv and STEM_summary.json.
    #[arg(long, default_value = "asymptotics")]
    pub out: PathBuf,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct KernelCheckArgs {
    #[arg(long)]
    pub profile: String,
    /// Grid steps on [0, a] (at least 50).
    #[arg(long, default_value_t = kernel::DEFAULT_STEPS)]
    pub steps: usize,
    /// Output stem: writes STEM_kernel.csv and STEM_report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct InverseCheckArgs {
    /// Scenario JSON. Without it, the profile's potential is paired with a bumped copy.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    #[arg(long, default_value = "rational_example")]
    pub profile: String,
    /// Number of random k in the upper half-disk |k| ≤ kmax, 0 ≤ Im k ≤ 3.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 30.0)]
    pub kmax: f64,
    /// Bound on |g_integral − g_wronskian| / max(1, |g|).
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output stem: writes STEM_g.csv and STEM_report.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::ProfileInfo(a) => cmd_profile_info(a, out),
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Asymptotics(a) => cmd_asymptotics(a, out),
        Command::KernelCheck(a) => cmd_kernel_check(a, out),
        Command::InverseCheck(a) => cmd_inverse_check(a, out),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|e| CliError::Input(format!("stdout: {e}")))
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<(), CliError> {
    emit(out, &format!("{}\n", serde_json::to_string_pretty(v).expect("JSON values serialize")))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_profile_info(args: &ProfileInfoArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let profile = RefractiveProfile::from_arg(&args.profile)?;
    let liouville = LiouvilleData::new(&profile)?;
    let a = liouville.a();
    let regime = Regime::classify(a);
    let mut warnings = Vec::new();
    if profile.is_constant() && (profile.eta(0.0) - 1.0).abs() < 1e-15 {
        warnings.push("η ≡ 1: d(k) vanishes identically, so there is no discrete spectrum".to_string());
    } else if profile.is_constant() {
        warnings.push("constant η: no finite smoothness index m, non-real asymptotics do not apply".to_string());
    }
    let m = profile.smoothness_m();
    let eta_deriv = match m {
        Some(m) => Some(profile.derivatives(1.0, m as usize + 2)?[m as usize + 2]),
        None => None,
    };
    let sub = if regime == Regime::AGreaterThanOne { Some(inverse::subinterval_data(&liouville)?) } else { None };
    let epsilon2 = match args.b {
        Some(b) => Some(liouville.subinterval_boundary(b)?),
        None => None,
    };
    let threshold = match (args.b, regime) {
        (Some(b), Regime::AGreaterThanOne) => Some(inverse::density_threshold(a, b)?),
        _ => None,
    };
    let v = json!({
        "profile": profile.label(),
        "a": a,
        "q_integral": liouville.q_mean(),
        "regime": regime.as_str(),
        "normalized_tail": profile.normalized_tail(),
        "m": m,
        "eta_deriv_m2_at_1": eta_deriv,
        "epsilon": sub.map(|s| s.epsilon),
        "epsilon1": sub.map(|s| s.epsilon1),
        "x0": sub.map(|s| s.x0),
        "b": args.b,
        "epsilon2": epsilon2,
        "density_threshold": threshold,
        "warnings": warnings,
    });
    if args.json {
        return emit_json(out, &v);
    }
    let mut s = String::new();
    let _ = writeln!(s, "profile          {}", profile.label());
    let _ = writeln!(s, "a                {a:.15}");
    let _ = writeln!(s, "integral of q    {:.15}", liouville.q_mean());
    let _ = writeln!(s, "regime           {}", regime.as_str());
    let _ = writeln!(s, "normalized tail  {}", profile.normalized_tail());
    match (m, eta_deriv) {
        (Some(m), Some(d)) => {
            let _ = writeln!(s, "m                {m}");
            let _ = writeln!(s, "eta^(m+2)(1)     {d:.15}");
        }
        _ => {
            let _ = writeln!(s, "m                none");
        }
    }
    if let Some(sub) = sub {
        let _ = writeln!(s, "epsilon          {:.15}", sub.epsilon);
        let _ = writeln!(s, "epsilon1         {:.15}", sub.epsilon1);
        let _ = writeln!(s, "x0 = (a+1)/2     {:.15}", sub.x0);
    }
    if let (Some(b), Some(e2)) = (args.b, epsilon2) {
        let _ = writeln!(s, "b                {b}");
        let _ = writeln!(s, "epsilon2         {e2:.15}");
    }
    if let Some(t) = threshold {
        let _ = writeln!(s, "alpha threshold  {t:.15}");
    }
    for w in &warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    emit(out, &s)
}

fn zero_key(z: &SpectralZero) -> (f64, f64) {
    (z.k.re, z.k.im)
}

pub fn cmd_spectrum(args: &SpectrumArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let profile = RefractiveProfile::from_arg(&args.profile)?;
    let rect = args.rect.0;
    let kmax = args.kmax.unwrap_or(rect.x1);
    if !(kmax > 0.0 && kmax.is_finite()) {
        return Err(CliError::Input(format!("--kmax must be positive, got {kmax}")));
    }
    let report = zeros::find_zeros(&profile, rect, args.tol)?;
    let a = crate::profile::travel_time(&profile)?;
    let mut all = report.zeros.clone();
    // Real zeros beyond the rectangle (or below it when y0 > 0) come from the axis scan.
    let scan = zeros::real_zeros(&profile, kmax, args.tol)?;
    let mut scan_missing = 0usize;
    for z in scan {
        let known = all.iter().any(|w| (w.k - z.k).norm() <= 1e-6 * (1.0 + z.k.norm()));
        if known {
            continue;
        }
        if rect.contains(z.k) {
            scan_missing += 1;
        }
        all.push(z);
    }
    all.sort_by(|p, q| zero_key(p).0.total_cmp(&zero_key(q).0).then(zero_key(p).1.total_cmp(&zero_key(q).1)));
    let mut merged = report.clone();
    merged.zeros = all;

    let csv = merged.to_csv();
    let mut value = merged.to_json_value();
    let count = report.total_count;
    if let Value::Object(map) = &mut value {
        map.insert("count".into(), json!(count));
        map.insert("a".into(), json!(a));
        map.insert("regime".into(), json!(Regime::classify(a).as_str()));
        map.insert("profile".into(), json!(profile.label()));
        map.insert("tol".into(), json!(args.tol));
        map.insert("kmax".into(), json!(kmax));
        map.insert("real_scan_extra".into(), json!(merged.zeros.len() - report.zeros.len()));
        map.insert("real_scan_missed_by_search".into(), json!(scan_missing));
    }
    let mut plot = String::from("re,im,multiplicity,class\n");
    for z in &merged.zeros {
        let mut copies = vec![z.k, -z.k, z.k.conj(), -z.k.conj()];
        copies.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
        copies.dedup();
        for c in copies {
            // Avoid a signed zero in the output.
            let re = if c.re == 0.0 { 0.0 } else { c.re };
            let im = if c.im == 0.0 { 0.0 } else { c.im };
            let _ = writeln!(plot, "{re:.15e},{im:.15e},{},{}", z.multiplicity, z.class.as_str());
        }
    }
    write_file(&with_suffix(&args.out, ".csv"), &csv)?;
    write_file(
        &with_suffix(&args.out, ".json"),
        &format!("{}\n", serde_json::to_string_pretty(&value).expect("serializable")),
    )?;
    write_file(&with_suffix(&args.out, "_plot.csv"), &plot)?;
    if args.json {
        return emit_json(out, &value);
    }
    let mut s = String::new();
    let _ = writeln!(s, "profile {}  a = {a:.12}  regime {}", profile.label(), Regime::classify(a).as_str());
    let _ = writeln!(
        s,
        "rect [{}, {}] x [{}, {}]: {} zeros with multiplicity by the argument principle",
        rect.x0, rect.x1, rect.y0, rect.y1, count
    );
    for z in &merged.zeros {
        let _ = writeln!(s, "  {:>22.15} {:>22.15}  m={}  {}", z.k.re, z.k.im, z.multiplicity, z.class.as_str());
    }
    let _ =
        writeln!(s, "wrote {}.csv, {}.json, {}_plot.csv", args.out.display(), args.out.display(), args.out.display());
    emit(out, &s)
}

/// Reads zeros, rectangle and regime from a spectrum JSON file.
pub fn read_spectrum(path: &Path) -> Result<(Vec<SpectralZero>, Rect, Option<Regime>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let bad = |what: &str| CliError::Input(format!("{}: missing or malformed {what}", path.display()));
    let rect = v
        .get("rect")
        .and_then(Value::as_array)
        .filter(|r| r.len() == 4)
        .and_then(|r| r.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
        .map(|r| Rect::new(r[0], r[1], r[2], r[3]))
        .ok_or_else(|| bad("rect"))?;
    let regime = match v.get("regime") {
        None => None,
        Some(r) => Some(r.as_str().and_then(Regime::parse).ok_or_else(|| bad("regime"))?),
    };
    let list = v.get("zeros").and_then(Value::as_array).ok_or_else(|| bad("zeros"))?;
    let mut zeros = Vec::with_capacity(list.len());
    for z in list {
        let re = z.get("re").and_then(Value::as_f64).ok_or_else(|| bad("zero re"))?;
        let im = z.get("im").and_then(Value::as_f64).ok_or_else(|| bad("zero im"))?;
        let mult = z.get("mult").and_then(Value::as_u64).filter(|m| *m >= 1).ok_or_else(|| bad("zero mult"))?;
        zeros.push(SpectralZero::canonical(Complex64::new(re, im), mult as u32, 0.0));
    }
    Ok((zeros, rect, regime))
}

pub fn cmd_asymptotics(args: &AsymptoticsArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let profile = RefractiveProfile::from_arg(&args.profile)?;
    let liouville = LiouvilleData::new(&profile)?;
    let (zeros, rect, file_regime) = read_spectrum(&args.spectrum)?;
    let regime = Regime::classify(liouville.a());
    if let Some(fr) = file_regime {
        if fr != regime {
            return Err(CliError::Regime(format!(
                "spectrum file regime {} disagrees with profile regime {} (a = {})",
                fr,
                regime,
                liouville.a()
            )));
        }
    }
    let case = AsymptoticCase::from_liouville(&liouville)?;
    let (n1, n2) = args.window;
    let report = asymptotics::match_zero_set(&zeros, &case, args.window, None)?;

    // Decay proxy: first and last 40% of the window.
    let len = (n2 - n1 + 1).max(0);
    let part = (len * 2 / 5).max(1);
    let early = (n1, n1 + part - 1);
    let late = (n2 - part + 1, n2);
    let decay = if len >= 2 { report.decay_trend(early, late) } else { None };
    let max_residual = report.pairs.iter().map(|p| p.abs_residual()).reduce(f64::max);

    if args.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(CliError::Input("--radii must be positive".into()));
    }
    let radii =
        if args.radii.is_empty() { (1..=5).map(|j| rect.x1 * j as f64 / 5.0).collect() } else { args.radii.clone() };
    let counting = asymptotics::counting_check(&zeros, &radii);
    let counting_json: Vec<Value> = counting
        .iter()
        .map(|c| json!({"r": c.r, "count": c.count, "ratio": c.ratio, "disk_covered": rect.x0 == 0.0 && rect.y0 == 0.0 && rect.x1 >= c.r && rect.y1 >= c.r}))
        .collect();

    let mut real: Vec<&SpectralZero> = zeros.iter().filter(|z| z.class == ZeroClass::Real && z.k.re > 0.0).collect();
    real.sort_by(|p, q| p.k.re.total_cmp(&q.k.re));
    let mut real_rows = Vec::new();
    if regime != Regime::AEqualsOne {
        for (j, z) in real.iter().enumerate() {
            let n = j as i64 + 1;
            if let Ok(pred) = asymptotics::predict_real(&liouville, n) {
                real_rows.push(json!({"n": n, "computed": z.k.re, "predicted": pred, "relative_gap": (z.k.re - pred).abs() / pred}));
            }
        }
    }

    let summary = json!({
        "profile": profile.label(),
        "regime": regime.as_str(),
        "case": {"m": case.m, "eta_deriv": case.eta_deriv, "q_integral": case.q_mean, "a": case.a},
        "window": [n1, n2],
        "shift_plus": report.shift_plus,
        "shift_minus": report.shift_minus,
        "matched": report.pairs.len(),
        "unmatched_zeros": report.unmatched_zeros.len(),
        "unmatched_indices": report.unmatched_indices.len(),
        "outside_window": report.outside_window,
        "systematic_offset": report.systematic_offset,
        "max_residual": max_residual,
        "decay_early_window": [early.0, early.1],
        "decay_late_window": [late.0, late.1],
        "decay_trend_holds": decay,
        "counting": counting_json,
        "real_zeros": real_rows,
    });
    write_file(&with_suffix(&args.out, "_match.csv"), &report.to_csv())?;
    write_file(
        &with_suffix(&args.out, "_summary.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).expect("serializable")),
    )?;
    if args.json {
        return emit_json(out, &summary);
    }
    let mut s = String::new();
    let _ = writeln!(s, "regime {}  m = {}  eta^(m+2)(1) = {}", regime, case.m, case.eta_deriv);
    let _ = writeln!(
        s,
        "window {n1}..{n2}: {} pairs, shifts (+{}, -{}), {} unmatched zeros, {} unmatched indices",
        report.pairs.len(),
        report.shift_plus,
        report.shift_minus,
        report.unmatched_zeros.len(),
        report.unmatched_indices.len()
    );
    if let Some(m) = max_residual {
        let _ = writeln!(s, "max |residual| {m:.6e}");
    }
    if let Some(d) = decay {
        let _ = writeln!(
            s,
            "decay proxy (max over {}..{} <= max over {}..{}): {}",
            late.0,
            late.1,
            early.0,
            early.1,
            if d { "holds" } else { "fails" }
        );
    }
    if report.systematic_offset {
        let _ = writeln!(s, "warning: residuals are spacing-sized; the predictions look misindexed");
    }
    for c in &counting {
        let _ = writeln!(s, "N({:.3}) = {:>5}  N pi/(4r) = {:.6}", c.r, c.count, c.ratio);
    }
    emit(out, &s)
}

struct CheckRow {
    name: &'static str,
    value: f64,
    bound: Option<f64>,
    pass: bool,
    note: String,
}

fn checks_json(rows: &[CheckRow]) -> Vec<Value> {
    rows.iter()
        .map(|r| json!({"check": r.name, "value": r.value, "bound": r.bound, "pass": r.pass, "note": r.note}))
        .collect()
}

fn checks_text(rows: &[CheckRow]) -> String {
    let mut s = String::new();
    for r in rows {
        let bound = r.bound.map(|b| format!("{b:.3e}")).unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:<5} {:<34} {:>14.6e}  bound {:>10}  {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            bound,
            r.note
        );
    }
    s
}

pub fn cmd_kernel_check(args: &KernelCheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let profile = RefractiveProfile::from_arg(&args.profile)?;
    let liouville = LiouvilleData::new(&profile)?;
    let a = liouville.a();
    if args.steps < 50 {
        return Err(CliError::Input(format!("--steps must be at least 50, got {}", args.steps)));
    }
    let grid = kernel::solve_kernel(&liouville, a / args.steps as f64)?;
    let fine = kernel::solve_kernel(&liouville, a / (2 * args.steps) as f64)?;
    let (q_abs, _) = crate::quadrature::integrate(|x| liouville.q(x).abs(), 0.0, a, 1e-12)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let q_int = |x: f64| liouville.q_integral(x).unwrap_or(f64::NAN);
    let diag = grid.diagonal_residual(q_int);
    let diag_fine = fine.diagonal_residual(q_int);
    let mut rows = Vec::new();
    let diag_bound = 5e-4 * q_abs.max(1.0);
    rows.push(CheckRow {
        name: "diagonal 2K(x,x) = int_0^x q",
        value: diag,
        bound: Some(diag_bound),
        pass: diag <= diag_bound,
        note: String::new(),
    });
    let col0 = (0..=grid.steps()).map(|i| grid.value(i, 0).abs()).fold(0.0, f64::max);
    rows.push(CheckRow { name: "K(x,0) = 0", value: col0, bound: Some(0.0), pass: col0 == 0.0, note: String::new() });
    // The order is only observable when the residual is above roundoff.
    let floor = 1e-12 * q_abs.max(1.0);
    if diag > floor {
        let ratio = diag / diag_fine;
        rows.push(CheckRow {
            name: "diagonal halving ratio",
            value: ratio,
            bound: None,
            pass: (3.0..=5.0).contains(&ratio),
            note: "expected in [3, 5]".into(),
        });
    } else {
        rows.push(CheckRow {
            name: "diagonal halving ratio",
            value: diag / diag_fine.max(f64::MIN_POSITIVE),
            bound: None,
            pass: true,
            note: "not measurable: residual at roundoff (quadrature exact for this q)".into(),
        });
    }
    let kmax_abs = (0..=grid.steps())
        .flat_map(|i| (0..=i).map(move |j| (i, j)))
        .map(|(i, j)| grid.value(i, j).abs())
        .fold(0.0, f64::max);
    let mut report_extra = json!({});
    if profile.normalized_tail() {
        let traces = kernel::boundary_traces(&grid);
        let target = 0.5 * liouville.q(a);
        let gap = (traces.endpoint_sum() - target).abs();
        rows.push(CheckRow {
            name: "K1(a) + K2(a) = q(a)/2",
            value: gap,
            bound: Some(5e-4),
            pass: gap <= 5e-4,
            note: format!("sum {:.9}, target {:.9}", traces.endpoint_sum(), target),
        });
        let mut reps = Vec::new();
        for k in [1.0, PI, 7.3, 15.0] {
            let r = kernel::representation_check(&profile, &liouville, &grid, Complex64::new(k, 0.0))?;
            let v = r.residual_y1.max(r.residual_dy1);
            rows.push(CheckRow {
                name: "representation vs shooting",
                value: v,
                bound: Some(1e-5),
                pass: v <= 1e-5,
                note: format!("k = {k:.6}"),
            });
            reps.push(json!({"k": k, "residual_y1": r.residual_y1, "residual_dy1": r.residual_dy1}));
        }
        report_extra =
            json!({"representation": reps, "endpoint_sum": traces.endpoint_sum(), "endpoint_target": target});
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let v = json!({
        "profile": profile.label(),
        "a": a,
        "steps": grid.steps(),
        "picard_iterations": grid.iterations(),
        "max_abs_kernel": kmax_abs,
        "checks": checks_json(&rows),
        "details": report_extra,
        "pass": all_pass,
    });
    if let Some(stem) = &args.out {
        let path = with_suffix(stem, "_kernel.csv");
        let file = std::fs::File::create(&path).map_err(|e| io_err(&path, e))?;
        grid.write_csv(std::io::BufWriter::new(file)).map_err(|e| io_err(&path, e))?;
        write_file(
            &with_suffix(stem, "_report.json"),
            &format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")),
        )?;
    }
    if args.json {
        emit_json(out, &v)?;
    } else {
        let mut s = format!(
            "profile {}  a = {a:.12}  steps {}  Picard iterations {}  max |K| {kmax_abs:.6e}\n",
            profile.label(),
            grid.steps(),
            grid.iterations()
        );
        s.push_str(&checks_text(&rows));
        emit(out, &s)?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Numerical("kernel check: a residual exceeds its bound".into()))
    }
}

pub fn cmd_inverse_check(args: &InverseCheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let scenario = match &args.scenario {
        Some(path) => UniquenessScenario::from_path(path)?,
        None => {
            let profile = RefractiveProfile::from_arg(&args.profile)?;
            let a = crate::profile::travel_time(&profile)?;
            let x0 = (0.5 * (a + 1.0)).min(a);
            UniquenessScenario::bumped(&profile, Bump::new(x0 / 4.0, x0 / 4.0, 0.5)?)?
        }
    };
    if !(args.kmax > 0.0 && args.kmax.is_finite()) || !(args.tol > 0.0) {
        return Err(CliError::Input("--kmax and --tol must be positive".into()));
    }
    let a = scenario.a();
    let mut rng = StdRng::seed_from_u64(args.seed);
    let mut ks = Vec::with_capacity(args.samples);
    while ks.len() < args.samples {
        let k = Complex64::new(rng.gen_range(-args.kmax..=args.kmax), rng.gen_range(0.0..=3.0f64.min(args.kmax)));
        if k.norm() <= args.kmax {
            ks.push(k);
        }
    }
    let values = {
        use rayon::prelude::*;
        ks.par_iter().map(|&k| inverse::wronskian_g(&scenario, k)).collect::<Result<Vec<_>, _>>()?
    };
    let worst = values.iter().map(|g| g.relative_gap()).fold(0.0, f64::max);
    let mut rows = vec![CheckRow {
        name: "g integral vs Wronskian",
        value: worst,
        bound: Some(args.tol),
        pass: worst <= args.tol,
        note: format!("{} samples", values.len()),
    }];
    rows.push(CheckRow {
        name: "agreement on [x0, a]",
        value: scenario.agreement_sup,
        bound: Some(inverse::AGREEMENT_TOL),
        pass: true,
        note: format!("x0 = {:.9}", scenario.agree_from),
    });
    let mut uniqueness = json!({});
    if a > 1.0 {
        let l = scenario.q.liouville();
        let sub = inverse::subinterval_data(l)?;
        let unit = inverse::optical_length(l.profile(), sub.epsilon1, sub.epsilon)?;
        rows.push(CheckRow {
            name: "int_{eps1}^{eps} sqrt(eta) = 1",
            value: (unit - 1.0).abs(),
            bound: Some(1e-9),
            pass: (unit - 1.0).abs() <= 1e-9,
            note: format!("eps = {:.12}, eps1 = {:.12}", sub.epsilon, sub.epsilon1),
        });
        let threshold = scenario.b.map(|b| inverse::density_threshold(a, b)).transpose()?;
        uniqueness = json!({
            "epsilon": sub.epsilon,
            "epsilon1": sub.epsilon1,
            "x0": sub.x0,
            "b": scenario.b,
            "alpha": scenario.alpha,
            "threshold": threshold,
            "threshold_strict": scenario.b.map(|b| inverse::threshold_is_strict(a, b)),
            "alpha_exceeds_threshold": match (scenario.alpha, threshold) {
                (Some(al), Some(t)) => Some(al > t),
                _ => None,
            },
        });
    }
    let mut csv = String::from("re_k,im_k,re_g_integral,im_g_integral,re_g_wronskian,im_g_wronskian,relative_gap\n");
    for g in &values {
        let _ = writeln!(
            csv,
            "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.3e}",
            g.k.re,
            g.k.im,
            g.integral.re,
            g.integral.im,
            g.wronskian.re,
            g.wronskian.im,
            g.relative_gap()
        );
    }
    let all_pass = rows.iter().all(|r| r.pass);
    let v = json!({
        "a": a,
        "agree_from": scenario.agree_from,
        "samples": values.len(),
        "seed": args.seed,
        "checks": checks_json(&rows),
        "uniqueness_data": uniqueness,
        "pass": all_pass,
    });
    if let Some(stem) = &args.out {
        write_file(&with_suffix(stem, "_g.csv"), &csv)?;
        write_file(
            &with_suffix(stem, "_report.json"),
            &format!("{}\n", serde_json::to_string_pretty(&v).expect("serializable")),
        )?;
    }
    if args.json {
        emit_json(out, &v)?;
    } else {
        emit(out, &format!("a = {a:.12}  x0 = {:.12}\n{}", scenario.agree_from, checks_text(&rows)))?;
    }
    if all_pass {
        Ok(())
    } else {
        Err(CliError::Numerical("inverse check: a residual exceeds its bound".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rect_parsing() {
        assert_eq!(RectArg::from_str("0,60,0,10").unwrap().0, Rect::new(0.0, 60.0, 0.0, 10.0));
        assert!(RectArg::from_str("0,60,0").is_err());
        assert!(RectArg::from_str("0,60,x,10").is_err());
        assert!(RectArg::from_str("5,1,0,1").is_err());
        assert!(RectArg::from_str("0,1,-1,1").is_err());
    }

    #[test]
    fn window_parsing() {
        assert_eq!(parse_window("5,30").unwrap(), (5, 30));
        assert!(parse_window("5").is_err());
    }

    #[test]
    fn exit_codes_for_bad_input() {
        let mut o = Vec::new();
        let mut e = Vec::new();
        assert_eq!(
            main_with_args(["transmission", "spectrum", "--profile", "const4", "--rect", "1,2"], &mut o, &mut e),
            2
        );
        assert_eq!(main_with_args(["transmission", "profile-info", "--profile", "no_such_profile"], &mut o, &mut e), 2);
        assert_eq!(main_with_args(["transmission", "bogus"], &mut o, &mut e), 2);
    }
}
