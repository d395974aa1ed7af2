//! Command-line front end. [`run`] parses arguments, merges an optional
//! `key=value` config file, dispatches to a subcommand and returns the exit
//! code: 0 when every verdict holds, 1 on usage errors, 2 when some
//! inequality fails, 3 when a cap or the working precision is exceeded.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::bounds::{bounded_degree_constant, counting_constants, epsilon_threshold, lehmer_bound, ConstantsReport, Side};
use crate::census::{
    census, covering_count, greedy_cover, lattice_ball_count, measured_points, mw_sublattice, product_census,
    sample_ball, standard_grid, CensusConfig, CensusTable, MWLattice, MeasuredPoint, ProductFactor, DEFAULT_CAP,
};
use crate::elliptic::{CurveModel, RationalPoint};
use crate::fields::{parse_overrides, torsion_field, Override, TorsionFieldData};
use crate::heights::{doubling_oracle, profile_with, zimmer_d, HeightContext, HeightProfile, DEFAULT_TOL, ORACLE_DOUBLINGS};
use crate::precision::{Interval, Precision};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_CAP: i32 = 3;

const MAX_WORKERS: usize = 256;
const MAX_GRID: usize = 1000;
const MAX_CURVES: usize = 64;
const HEIGHT_SAMPLE: usize = 6;
const RANK_CANDIDATES: usize = 40;

#[derive(Parser, Debug)]
#[command(name = "ellcount", version, about = "Heights, rank bounds and bounded-height point counts on elliptic curves over Q")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Curve invariants, torsion and a table of canonical heights.
    Analyze(Opts),
    /// Every explicit constant for each curve.
    Constants(Opts),
    /// Exact point counts on a B grid with the theorem's ceilings.
    Count(Opts),
    /// The whole inequality suite with one verdict per check.
    Verify(Opts),
    /// Counts on the product of the given curves.
    Product(Opts),
    /// Covering and lattice-point demonstrations.
    Covering(Opts),
    /// Lehmer-type bound tables over a range of degrees D.
    Lehmer(Opts),
}

#[derive(Args, Debug, Clone, Default)]
struct Opts {
    /// Curve y^2 = x^3 + ax + b given as `a,b`; repeatable.
    #[arg(long = "curve", value_name = "A,B", allow_hyphen_values = true)]
    curve: Vec<String>,
    /// Prime with E(Q)[p] nonzero.
    #[arg(long)]
    p: Option<u32>,
    /// Largest height bound B (largest degree D for `lehmer`).
    #[arg(long)]
    bmax: Option<f64>,
    /// Either a count k, giving e^e * (1..=k) capped at bmax, or a comma-separated list.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Constant c of the Lehmer-type bound.
    #[arg(long = "c-masser")]
    c_masser: Option<f64>,
    /// Degree bound f for the bounded-degree constant.
    #[arg(long)]
    f: Option<u32>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Torsion-field data file: lines `[a,b] p degQ degK rho`.
    #[arg(long)]
    overrides: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Plain `key=value` file; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// The fully resolved configuration of one invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub curves: Vec<CurveModel>,
    pub p: u32,
    pub bmax: Option<f64>,
    pub grid: GridSpec,
    pub tol: f64,
    pub c_masser: f64,
    pub f: u32,
    pub epsilon: f64,
    pub overrides: Vec<Override>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub seed: Option<u64>,
    pub precision: Precision,
}

#[derive(Clone, Debug, PartialEq)]
pub enum GridSpec {
    Count(usize),
    Values(Vec<f64>),
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(Failure::Usage(msg.into()))
}

/// Runs the command line `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(true) => EXIT_OK,
        Ok(false) => {
            eprintln!("ellcount: at least one inequality check FAILED");
            EXIT_VIOLATION
        }
        Err(Failure::Usage(m)) => {
            eprintln!("ellcount: {m}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("ellcount: {e}");
            match e {
                Error::CapExceeded { .. } | Error::Precision(_) | Error::NonConvergent(_) => EXIT_CAP,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn execute(cli: Cli) -> CliResult<bool> {
    let (kind, opts) = match cli.command {
        Command::Analyze(o) => ("analyze", o),
        Command::Constants(o) => ("constants", o),
        Command::Count(o) => ("count", o),
        Command::Verify(o) => ("verify", o),
        Command::Product(o) => ("product", o),
        Command::Covering(o) => ("covering", o),
        Command::Lehmer(o) => ("lehmer", o),
    };
    let rc = resolve(opts)?;
    let needs_curve = !matches!(kind, "covering" | "lehmer");
    if needs_curve && rc.curves.is_empty() {
        return usage(format!("{kind} needs at least one --curve"));
    }
    let (text, ok) = match kind {
        "analyze" => analyze(&rc)?,
        "constants" => constants(&rc)?,
        "count" => count(&rc)?,
        "verify" => verify(&rc)?,
        "product" => product(&rc)?,
        "covering" => covering(&rc)?,
        _ => lehmer(&rc)?,
    };
    match &rc.out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(ok)
}

// configuration -----------------------------------------------------------

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim().parse().or_else(|_| usage(format!("bad value for {key}: {v:?}")))
}

fn merge_config(o: &mut Opts, text: &str) -> CliResult<()> {
    let mut file_curves = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return usage(format!("config line {}: expected key=value", i + 1));
        };
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        match k {
            "curve" => file_curves.extend(v.split(';').map(|s| s.trim().to_string()).filter(|s| !s.is_empty())),
            "p" => o.p = o.p.or(Some(parse_num(k, v)?)),
            "bmax" => o.bmax = o.bmax.or(Some(parse_num(k, v)?)),
            "grid" => o.grid = o.grid.take().or(Some(v.to_string())),
            "tol" => o.tol = o.tol.or(Some(parse_num(k, v)?)),
            "c-masser" | "c_masser" => o.c_masser = o.c_masser.or(Some(parse_num(k, v)?)),
            "f" => o.f = o.f.or(Some(parse_num(k, v)?)),
            "epsilon" => o.epsilon = o.epsilon.or(Some(parse_num(k, v)?)),
            "overrides" => o.overrides = o.overrides.take().or(Some(PathBuf::from(v))),
            "out" => o.out = o.out.take().or(Some(PathBuf::from(v))),
            "format" => {
                if o.format.is_none() {
                    o.format = Some(Format::from_str(v, true).or_else(|_| usage(format!("bad format {v:?}")))?);
                }
            }
            "workers" => o.workers = o.workers.or(Some(parse_num(k, v)?)),
            "seed" => o.seed = o.seed.or(Some(parse_num(k, v)?)),
            _ => return usage(format!("config line {}: unknown key {k:?}", i + 1)),
        }
    }
    if o.curve.is_empty() {
        o.curve = file_curves;
    }
    Ok(())
}

fn parse_grid(s: &str) -> CliResult<GridSpec> {
    if s.contains(',') || s.contains('.') || s.contains('e') {
        let vals = s.split(',').map(|x| parse_num::<f64>("grid", x)).collect::<CliResult<Vec<_>>>()?;
        if vals.len() > MAX_GRID || vals.iter().any(|b| !b.is_finite()) {
            return usage("grid values must be finite and at most 1000 in number");
        }
        Ok(GridSpec::Values(vals))
    } else {
        let k: usize = parse_num("grid", s)?;
        if k == 0 || k > MAX_GRID {
            return usage("grid count must lie in 1..=1000");
        }
        Ok(GridSpec::Count(k))
    }
}

fn resolve(mut o: Opts) -> CliResult<RunConfig> {
    if let Some(path) = o.config.clone() {
        let text = std::fs::read_to_string(&path).or_else(|e| usage(format!("cannot read {}: {e}", path.display())))?;
        merge_config(&mut o, &text)?;
    }
    if o.curve.len() > MAX_CURVES {
        return usage(format!("at most {MAX_CURVES} curves"));
    }
    let curves = o
        .curve
        .iter()
        .map(|s| CurveModel::parse(s).map_err(|e| Failure::Usage(format!("--curve {s}: {e}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let p = o.p.unwrap_or(2);
    if !matches!(p, 2 | 3 | 5 | 7) {
        return usage("--p must be one of 2, 3, 5, 7");
    }
    if let Some(b) = o.bmax {
        if !(b >= 1.0 && b.is_finite()) {
            return usage("--bmax must be a finite number at least 1");
        }
    }
    let grid = match &o.grid {
        Some(g) => parse_grid(g)?,
        None => GridSpec::Count(10),
    };
    let tol = o.tol.unwrap_or(DEFAULT_TOL);
    if !(tol > 0.0 && tol < 1.0) {
        return usage("--tol must lie in (0, 1)");
    }
    let c_masser = o.c_masser.unwrap_or(1.0);
    if !(c_masser > 0.0 && c_masser.is_finite()) {
        return usage("--c-masser must be positive");
    }
    let f = o.f.unwrap_or(2);
    if !(2..=1000).contains(&f) {
        return usage("--f must lie in 2..=1000");
    }
    let epsilon = o.epsilon.unwrap_or(0.5);
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return usage("--epsilon must be positive");
    }
    if let Some(w) = o.workers {
        if w == 0 || w > MAX_WORKERS {
            return usage(format!("--workers must lie in 1..={MAX_WORKERS}"));
        }
    }
    let overrides = match &o.overrides {
        Some(path) => {
            let text = std::fs::read_to_string(path).or_else(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            parse_overrides(&text).map_err(|e| Failure::Usage(e.to_string()))?
        }
        None => Vec::new(),
    };
    let precision = Precision::from_env()?;
    Ok(RunConfig {
        curves,
        p,
        bmax: o.bmax,
        grid,
        tol,
        c_masser,
        f,
        epsilon,
        overrides,
        out: o.out,
        format: o.format,
        workers: o.workers,
        seed: o.seed,
        precision,
    })
}

impl RunConfig {
    fn census_config(&self) -> CensusConfig {
        CensusConfig { cap: DEFAULT_CAP, workers: self.workers, tol: self.tol, precision: self.precision }
    }

    fn torsion_data(&self, c: &CurveModel) -> Result<TorsionFieldData> {
        let key = (c.a().clone(), c.b().clone());
        let specific = self.overrides.iter().find(|o| o.data.p == self.p && o.curve.as_ref() == Some(&key));
        let generic = self.overrides.iter().find(|o| o.data.p == self.p && o.curve.is_none());
        match specific.or(generic) {
            Some(o) => Ok(o.data.clone()),
            None => torsion_field(c, self.p),
        }
    }

    fn constants(&self, c: &CurveModel) -> Result<ConstantsReport> {
        counting_constants(c, &self.torsion_data(c)?, self.p, self.precision)
    }

    fn grid_for(&self, threshold: &Interval, default_bmax: f64) -> Result<Vec<f64>> {
        let bmax = self.bmax.unwrap_or(default_bmax);
        let g = match &self.grid {
            GridSpec::Count(k) => standard_grid(threshold.hi_f64(), bmax, *k as u32),
            GridSpec::Values(v) => v.clone(),
        };
        if g.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "no grid point lies in [{}, {bmax}]",
                threshold.hi_f64()
            )));
        }
        Ok(g)
    }
}

// report lines ------------------------------------------------------------

/// One line of a report: a named value, the expression it evaluates and,
/// for checks, the verdict.
#[derive(Clone, Debug, Serialize)]
pub struct Line {
    pub curve: String,
    pub name: String,
    pub value: String,
    pub formula: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<bool>,
}

fn info(curve: &str, name: impl Into<String>, value: impl ToString, formula: &str) -> Line {
    Line { curve: curve.to_string(), name: name.into(), value: value.to_string(), formula: formula.to_string(), verdict: None }
}

fn check(curve: &str, name: impl Into<String>, value: impl ToString, formula: &str, ok: bool) -> Line {
    Line { verdict: Some(ok), ..info(curve, name, value, formula) }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn lines_text(lines: &[Line]) -> String {
    let mut s = String::new();
    let mut current = None;
    for l in lines {
        if current != Some(&l.curve) {
            if !l.curve.is_empty() {
                let _ = writeln!(s, "# curve {}", l.curve);
            }
            current = Some(&l.curve);
        }
        let _ = match l.verdict {
            Some(v) => writeln!(s, "{} = {} | {} | {}", l.name, l.value, l.formula, if v { "PASS" } else { "FAIL" }),
            None => writeln!(s, "{} = {} | {}", l.name, l.value, l.formula),
        };
    }
    s
}

fn lines_csv(lines: &[Line]) -> String {
    let mut s = String::from("curve,name,value,formula,verdict\n");
    for l in lines {
        let v = l.verdict.map_or(String::new(), |v| v.to_string());
        let _ = writeln!(s, "{},{},{},{},{}", csv_field(&l.curve), csv_field(&l.name), csv_field(&l.value), csv_field(&l.formula), v);
    }
    s
}

fn all_pass(lines: &[Line]) -> bool {
    lines.iter().all(|l| l.verdict != Some(false))
}

fn json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn render_lines(rc: &RunConfig, lines: &[Line]) -> String {
    match rc.format {
        None => lines_text(lines),
        Some(Format::Csv) => lines_csv(lines),
        Some(Format::Json) => json_text(&json!({ "lines": lines, "all_verdicts_true": all_pass(lines) })),
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::Upper => "upper",
        Side::Lower => "lower",
        Side::Exact => "exact",
    }
}

// subcommands -------------------------------------------------------------

fn torsion_name(s: &[u32]) -> String {
    if s.is_empty() {
        return "trivial".into();
    }
    s.iter().map(|k| format!("Z/{k}")).collect::<Vec<_>>().join(" x ")
}

fn analyze(rc: &RunConfig) -> CliResult<(String, bool)> {
    let hb = rc.bmax.unwrap_or(100.0);
    let cfg = rc.census_config();
    let mut lines = Vec::new();
    let mut tables: Vec<(String, Vec<HeightProfile>)> = Vec::new();
    for c in &rc.curves {
        let id = c.id();
        let id = id.as_str();
        lines.push(info(id, "a", c.a(), "y^2 = x^3 + a x + b"));
        lines.push(info(id, "b", c.b(), "y^2 = x^3 + a x + b"));
        lines.push(info(id, "discriminant", c.discriminant(), "-16(4a^3 + 27b^2)"));
        lines.push(info(id, "Delta_min", c.minimal_discriminant(), "minimal discriminant, Tate's algorithm"));
        lines.push(info(id, "conductor", c.conductor(), "prod p^f_p, Tate's algorithm"));
        for l in c.local_data() {
            let v = format!("{} f={} v(Delta)={} c={}", l.kodaira, l.conductor_exponent, l.min_disc_valuation, l.tamagawa);
            lines.push(info(id, format!("local_{}", l.prime), v, "Kodaira type, conductor exponent, valuation, Tamagawa number"));
        }
        lines.push(info(id, "j", c.j_invariant(), "c4^3 / Delta_min"));
        if let Ok(s) = c.szpiro_ratio() {
            lines.push(info(id, "szpiro_ratio", format!("{s:.12}"), "log|Delta_min| / log N"));
        }
        lines.push(info(id, "omega1", c.omega1(), "number of primes dividing N"));
        let t = c.torsion();
        lines.push(info(id, "torsion", torsion_name(&t.structure), "E(Q)_tors"));
        lines.push(info(id, "torsion_order", t.order, "#E(Q)_tors"));
        let pts: Vec<String> = t.points.iter().map(ToString::to_string).collect();
        lines.push(info(id, "torsion_points", pts.join(" "), "E(Q)_tors"));
        let z = zimmer_d(c, 1);
        lines.push(info(id, "nu", format!("{:.15}", z.nu), "sum over places of max(0, -v(a)/2, -v(b)/3)"));
        lines.push(info(id, "d", format!("{:.15}", z.d), "(3 nu + 7 n log 2) / 2"));
        lines.push(info(id, "h_F", format!("{:.12}", crate::heights::faltings_height(c)?), "stable Faltings height"));
        let ctx = HeightContext::new(c);
        let bound = (hb.floor() as u64).max(1);
        let prof = measured_points(c, bound, &cfg)?
            .iter()
            .map(|q| profile_with(&ctx, &q.point, rc.tol))
            .collect::<Result<Vec<_>>>()?;
        lines.push(info(id, "points_with_H_le_B", prof.len(), &format!("#{{P : H(P) <= {bound}}}")));
        tables.push((c.id(), prof));
    }
    let text = match rc.format {
        Some(Format::Json) => {
            let curves: Vec<_> = tables
                .iter()
                .map(|(id, prof)| {
                    let ls: Vec<&Line> = lines.iter().filter(|l| &l.curve == id).collect();
                    json!({ "curve": id, "lines": ls, "heights": prof })
                })
                .collect();
            json_text(&json!({ "curves": curves }))
        }
        fmt => {
            let mut s = if fmt == Some(Format::Csv) { lines_csv(&lines) } else { lines_text(&lines) };
            for (id, prof) in &tables {
                let _ = writeln!(s, "\n# heights {id}\n{}", HeightProfile::CSV_HEADER);
                for p in prof {
                    let _ = writeln!(s, "{}", p.csv_row());
                }
            }
            s
        }
    };
    Ok((text, true))
}

fn constants(rc: &RunConfig) -> CliResult<(String, bool)> {
    let reports = rc.curves.iter().map(|c| rc.constants(c)).collect::<Result<Vec<_>>>()?;
    let text = match rc.format {
        None => reports.iter().map(ConstantsReport::to_key_value).collect::<Vec<_>>().join("\n"),
        Some(Format::Csv) => {
            let mut s = String::from("curve,name,value,side,formula,flags\n");
            for r in &reports {
                for e in r.entries() {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{}",
                        csv_field(&r.curve_id),
                        e.name,
                        e.value,
                        side_name(e.side),
                        csv_field(e.formula),
                        csv_field(&e.flags.join(";"))
                    );
                }
            }
            s
        }
        Some(Format::Json) => json_text(&json!({ "reports": reports.iter().map(ConstantsReport::to_json).collect::<Vec<_>>() })),
    };
    Ok((text, true))
}

fn render_tables(rc: &RunConfig, tables: &[CensusTable]) -> String {
    match rc.format {
        Some(Format::Json) => json_text(&json!({ "tables": tables.iter().map(CensusTable::to_json).collect::<Vec<_>>() })),
        _ if tables.len() == 1 => tables[0].to_csv(),
        _ => tables.iter().map(|t| format!("# curve {}\n{}", t.curve_id, t.to_csv())).collect::<Vec<_>>().join("\n"),
    }
}

fn count(rc: &RunConfig) -> CliResult<(String, bool)> {
    let cfg = rc.census_config();
    let mut tables = Vec::new();
    for c in &rc.curves {
        let k = rc.constants(c)?;
        let grid = rc.grid_for(&k.threshold(), 1e4)?;
        tables.push(census(c, &grid, &k, &cfg)?);
    }
    let ok = tables.iter().all(CensusTable::all_true);
    Ok((render_tables(rc, &tables), ok))
}

fn product(rc: &RunConfig) -> CliResult<(String, bool)> {
    let cfg = rc.census_config();
    let factors = rc
        .curves
        .iter()
        .map(|c| Ok(ProductFactor { curve: c.clone(), tfd: rc.torsion_data(c)? }))
        .collect::<Result<Vec<_>>>()?;
    let mut threshold = Interval::e(rc.precision).exp();
    for c in &rc.curves {
        threshold = threshold.max(&rc.constants(c)?.threshold());
    }
    let grid = rc.grid_for(&threshold, 1e3)?;
    let t = product_census(&factors, &grid, rc.p, &cfg)?;
    let ok = t.all_true();
    Ok((render_tables(rc, &[t]), ok))
}

fn log10_ratio(a: f64, b: &Interval) -> String {
    format!("{:.3}", a.log10() - b.hi_f64().log10())
}

/// Lattice of the independent points found among the non-torsion census points.
fn sublattice(c: &CurveModel, pts: &[MeasuredPoint], torsion: &[RationalPoint], t: u32, tol: f64) -> Result<(Vec<RationalPoint>, MWLattice)> {
    let mut free: Vec<&MeasuredPoint> = pts.iter().filter(|q| !torsion.contains(&q.point)).collect();
    free.sort_by(|a, b| a.canonical.total_cmp(&b.canonical));
    let cands: Vec<RationalPoint> = free.iter().take(RANK_CANDIDATES).map(|q| q.point.clone()).collect();
    mw_sublattice(c, &cands, t, tol)
}

fn verify_curve(rc: &RunConfig, c: &CurveModel) -> Result<(Vec<Line>, ConstantsReport)> {
    let cfg = rc.census_config();
    let id = c.id();
    let id = id.as_str();
    let tol = rc.tol;
    let mut out = Vec::new();
    let k = rc.constants(c)?;
    let grid = rc.grid_for(&k.threshold(), 1e4)?;
    let bmax = grid.iter().cloned().fold(0.0, f64::max);
    let tors = c.torsion();

    let on_curve = tors.points.iter().all(|p| c.contains(p) && c.mul(tors.order as i64, p).is_infinity());
    out.push(check(id, "torsion_points", torsion_name(&tors.structure), "t T = O for every T in E(Q)_tors", on_curve));

    let ctx = HeightContext::new(c);
    let z = zimmer_d(c, 1);
    let hb = rc.bmax.unwrap_or(bmax).max(bmax).floor();
    let pts = measured_points(c, hb as u64, &cfg)?;
    let mut worst_t: f64 = 0.0;
    let mut worst_z: f64 = f64::NEG_INFINITY;
    for q in &pts {
        if tors.points.contains(&q.point) {
            worst_t = worst_t.max(q.canonical.abs());
        }
        worst_z = worst_z.max((q.canonical - crate::arith::ln_integer(&q.naive)).abs() - z.d);
    }
    out.push(check(id, "hhat_torsion_max", format!("{worst_t:.3e}"), "hhat(T) <= 1e-10", worst_t <= 1e-10));
    out.push(check(
        id,
        "hhat_minus_h_excess",
        format!("{worst_z:.6}"),
        &format!("max |hhat - h| - d over {} points with H <= {hb}", pts.len()),
        worst_z <= 0.0,
    ));

    let mut free: Vec<&MeasuredPoint> = pts.iter().filter(|q| !tors.points.contains(&q.point)).collect();
    free.sort_by(|a, b| a.canonical.total_cmp(&b.canonical));
    let sample: Vec<&RationalPoint> = free.iter().take(HEIGHT_SAMPLE).map(|q| &q.point).collect();
    let hh = |p: &RationalPoint| ctx.canonical(p, tol).map(|r| r.0);
    let mut par: f64 = 0.0;
    let mut quad: f64 = 0.0;
    let mut oracle_ok = true;
    let mut oracle_gap: f64 = 0.0;
    for (i, p) in sample.iter().enumerate() {
        let hp = hh(p)?;
        for m in [2i64, 3] {
            quad = quad.max((hh(&c.mul(m, p))? - (m * m) as f64 * hp).abs());
        }
        for q in &sample[i + 1..] {
            let hq = hh(q)?;
            let lhs = hh(&c.add(p, q))? + hh(&c.sub(p, q))?;
            par = par.max((lhs - 2.0 * hp - 2.0 * hq).abs());
        }
        if i < 3 {
            let (v, err) = doubling_oracle(c, p, ORACLE_DOUBLINGS);
            let gap = (v - hp).abs();
            oracle_gap = oracle_gap.max(gap);
            oracle_ok &= gap <= err + 1e-10;
        }
    }
    if !sample.is_empty() {
        out.push(check(id, "parallelogram_max", format!("{par:.3e}"), "|hhat(P+Q) + hhat(P-Q) - 2hhat(P) - 2hhat(Q)| <= 1e-8", par <= 1e-8));
        out.push(check(id, "quadratic_max", format!("{quad:.3e}"), "|hhat(mP) - m^2 hhat(P)| <= 1e-8, m = 2, 3", quad <= 1e-8));
        out.push(check(
            id,
            "two_oracle_gap",
            format!("{oracle_gap:.3e}"),
            &format!("|hhat(P) - 4^-{ORACLE_DOUBLINGS} h(2^{ORACLE_DOUBLINGS} P)| <= d/4^{ORACLE_DOUBLINGS} + 1e-10"),
            oracle_ok,
        ));
    }

    match free.first() {
        Some(q) => {
            let m = q.canonical;
            out.push(info(id, "min_nonzero_hhat", format!("{m:.12}"), &format!("attained at {}", q.point)));
            let pet = m >= k.petsche_lower.hi_f64();
            out.push(check(id, "petsche_margin_log10", log10_ratio(m, &k.petsche_lower), "min hhat >= petsche_lower", pet));
            let gr = m >= k.gr_lower.hi_f64();
            out.push(check(id, "gr_margin_log10", log10_ratio(m, &k.gr_lower), "min hhat >= gr_lower", gr));
        }
        None => out.push(info(id, "min_nonzero_hhat", "none", &format!("no non-torsion point with H <= {hb}"))),
    }

    let (basis, lattice) = sublattice(c, &pts, &tors.points, tors.order, tol)?;
    let r = basis.len() as u64;
    let gens: Vec<String> = basis.iter().map(ToString::to_string).collect();
    out.push(info(id, "independent_points", gens.join(" "), "greedy independent set under the height pairing"));
    out.push(check(id, "rank_upper_bound", format!("{} >= {r}", k.rank_bound), "2g(2[L:Q] + [L:K] omega_1 + rho) >= rank", k.rank_bound >= r));
    let mut census_cfg = cfg;
    census_cfg.workers = rc.workers;
    let table = census(c, &grid, &k, &census_cfg)?;
    for row in &table.rows {
        let b = row.b;
        let rb = k.rank_bound_in_b(b)?;
        out.push(check(id, format!("rank_bound_in_B[{b}]"), format!("{} >= {r}", rb.fmt_side(false)), "c2 log B / log log B >= rank", rb.lo_f64() >= r as f64));
        out.push(check(
            id,
            format!("N[{b}]"),
            format!("{} <= 10^{:.6e}", row.n, row.log10_ceil_cprime),
            "N(B) <= B^(C'/log log B)",
            row.verdict_n,
        ));
        out.push(check(
            id,
            format!("Nhat[{b}]"),
            format!("{} <= 10^{:.6e}", row.nhat, row.log10_ceil_c),
            "Nhat(B) <= B^(C/log log B)",
            row.verdict_nhat,
        ));
        let lat = lattice_ball_count(&lattice, b.ln().sqrt())?;
        let want = tors.order as u64 * lat;
        out.push(check(id, format!("lattice[{b}]"), format!("{} >= {want}", row.nhat), "Nhat(B) >= t #{v : hhat(v) <= log B}", row.nhat >= want));
        let (phi, ceil) = k.phi_check(b)?;
        out.push(check(
            id,
            format!("phi_max[{b}]"),
            format!("{} <= {}", phi.fmt_side(true), ceil.fmt_side(false)),
            "max log phi on [13, alpha(B)] <= (1 + 1/log 13) alpha(B), gamma = c9 log B",
            phi.certainly_le(&ceil),
        ));
    }
    Ok((out, k))
}

fn verify(rc: &RunConfig) -> CliResult<(String, bool)> {
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    for c in &rc.curves {
        let (l, k) = verify_curve(rc, c)?;
        lines.extend(l);
        reports.push(k);
    }
    let prime_ok = [17u64, 100, 1000, 10_000].into_iter().map(crate::bounds::check_prime_counting).collect::<Result<Vec<_>>>()?;
    lines.push(check("", "prime_counting", "m = 17, 100, 1000, 10000", "pi(m) >= m / log m", prime_ok.iter().all(|&b| b)));
    let prim_ok = [13usize, 50, 200].into_iter().map(crate::bounds::check_primorial).collect::<Result<Vec<_>>>()?;
    lines.push(check("", "primorial", "r = 13, 50, 200", "p(r) >= r^r", prim_ok.iter().all(|&b| b)));
    let ok = all_pass(&lines);
    let text = match rc.format {
        Some(Format::Json) => json_text(&json!({
            "lines": lines,
            "constants": reports.iter().map(ConstantsReport::to_json).collect::<Vec<_>>(),
            "all_verdicts_true": ok,
        })),
        _ => {
            let mut s = render_lines(rc, &lines);
            if rc.format.is_none() {
                let _ = writeln!(s, "all_verdicts = {ok}");
            }
            s
        }
    };
    Ok((text, ok))
}

fn covering(rc: &RunConfig) -> CliResult<(String, bool)> {
    let Some(seed) = rc.seed else {
        return usage("covering draws random points and needs --seed");
    };
    let mut lines = Vec::new();
    let (r, rho, npts) = (2.0, 1.0, 100);
    for n in 1..=3u32 {
        let pts = sample_ball(seed.wrapping_add(n as u64), npts, n as usize, r);
        let g = greedy_cover(&pts, r, rho)?.len();
        let bound = covering_count(n, r, rho)?;
        lines.push(check(
            "",
            format!("greedy_cover[n={n}]"),
            format!("{g} <= {bound}"),
            &format!("{npts} seeded points in B_n(0,{r}), balls of radius {rho}; (1 + 2R/rho)^n"),
            bound >= g as u64,
        ));
    }
    let id2 = MWLattice::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]], 1)?;
    let c13 = lattice_ball_count(&id2, 2.0)?;
    lines.push(check("", "lattice_ball_count[I2, 2]", c13, "#{v in Z^2 : |v| <= 2} = 13", c13 == 13));

    let cfg = rc.census_config();
    for c in &rc.curves {
        let id = c.id();
        let k = rc.constants(c)?;
        let grid = rc.grid_for(&k.threshold(), 1e3)?;
        let table = census(c, &grid, &k, &cfg)?;
        let bmax = grid.iter().cloned().fold(0.0, f64::max);
        let tors = c.torsion();
        let pts = measured_points(c, bmax.floor() as u64, &cfg)?;
        let (basis, lattice) = sublattice(c, &pts, &tors.points, tors.order, rc.tol)?;
        let gens: Vec<String> = basis.iter().map(ToString::to_string).collect();
        lines.push(info(&id, "independent_points", gens.join(" "), "greedy independent set under the height pairing"));
        for row in &table.rows {
            let lat = lattice_ball_count(&lattice, row.b.ln().sqrt())?;
            let want = tors.order as u64 * lat;
            let rel = if row.nhat == want { "=" } else { ">" };
            lines.push(check(
                &id,
                format!("lattice[{}]", row.b),
                format!("{} {rel} {want}", row.nhat),
                "Nhat(B) >= t #{v : hhat(v) <= log B}",
                row.nhat >= want,
            ));
        }
    }
    let ok = all_pass(&lines);
    Ok((render_lines(rc, &lines), ok))
}

fn degree_grid(rc: &RunConfig) -> Vec<u64> {
    let dmax = rc.bmax.unwrap_or(1000.0).floor().max(3.0);
    let mut ds: Vec<u64> = match &rc.grid {
        GridSpec::Values(v) => v.iter().map(|d| d.floor() as u64).collect(),
        GridSpec::Count(1) => vec![3],
        GridSpec::Count(k) => (0..*k).map(|i| (3.0 * (dmax / 3.0).powf(i as f64 / (*k - 1) as f64)).round() as u64).collect(),
    };
    ds.sort_unstable();
    ds.dedup();
    ds
}

fn lehmer(rc: &RunConfig) -> CliResult<(String, bool)> {
    let p = rc.precision;
    let g = 1;
    let c = rc.c_masser;
    let mut lines = Vec::new();
    let ci = Interval::f64(c, p);
    let base = (&ci * &(&ci + &Interval::int(1, p)).powi(2)).recip();
    for d in degree_grid(rc) {
        let lb = lehmer_bound(c, d, g, p)?;
        lines.push(info("", format!("lehmer_bound[D={d}]"), lb.fmt_side(false), "1/(c(c+1)^2) / (D log D)^(2g)"));
        let di = Interval::int(d, p);
        let scaled = &lb * &(&di * &di.ln()).powi(2 * g as i32);
        let same = scaled.lo() <= base.hi() && base.lo() <= scaled.hi();
        lines.push(check("", format!("lehmer_scaled[D={d}]"), scaled.fmt_side(false), "bound (D log D)^(2g) = 1/(c(c+1)^2)", same));
    }
    let bd = bounded_degree_constant(c, rc.f, g, p)?;
    lines.push(info("", format!("bounded_degree_c[f={}]", rc.f), bd.c.fmt_side(true), "least c with 2 sqrt(c)/(3 log c) > f^(g+1/2) (log f)^g"));
    lines.push(info("", format!("bounded_degree_C[f={}]", rc.f), bd.big_c.fmt_side(false), "1/c^4"));
    let eps = epsilon_threshold(rc.epsilon, g, p)?;
    lines.push(info("", format!("epsilon_threshold[eps={}]", rc.epsilon), eps, "least D0 with (D log D)^(2g) <= D^(2g+eps) for D >= D0"));
    let ok = all_pass(&lines);
    Ok((render_lines(rc, &lines), ok))
}
