//! Command-line front end: `bergman <subcommand> --config FILE ...`.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex;
use serde_json::json;

pub use config::{Experiment, OutputFormat, BUNDLED};

use crate::error::Error;
use crate::groups::{
    ball_size, convergence_table, enumerate_ball_with, injectivity_radius, EnumerationOptions,
    GroupSpec, Membership, TowerLevel, WholeGroup,
};
use crate::hyperbolic::{Model, ModelPoint};
use crate::kernel::{annulus_pullback_oracle, disc_kernel, QuotientSeries};
use crate::tower::{effective_bound_rhs, genus_bookkeeping, run_tower_report, EffectiveInputs, TowerExperiment};

/// Environment variable setting the worker-thread count.
pub const WORKERS_ENV: &str = "BERGMAN_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CAP: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(String),
    Core(Error),
    Io(String),
}

impl CliError {
    pub(crate) fn from_config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Core(Error::ResourceCap { .. }) => EXIT_CAP,
            CliError::Core(e) if e.is_numeric() => EXIT_NUMERIC,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io(_) => "io",
            CliError::Core(Error::ResourceCap { .. }) => "resource_cap",
            CliError::Core(e) if e.is_numeric() => "numeric",
            CliError::Core(_) => "invalid_input",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        json!({
            "error": self.kind(),
            "message": self.message(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

/// `RE,IM` on the command line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coord(pub f64, pub f64);

impl FromStr for Coord {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected RE,IM, got `{s}`"))?;
        let p = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        Ok(Coord(p(a)?, p(b)?))
    }
}

/// A real number, or `logX` for the natural logarithm of `X`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealArg(pub f64);

impl FromStr for RealArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let parse = |t: &str| t.parse::<f64>().map_err(|e| format!("`{t}`: {e}"));
        match s.strip_prefix("log") {
            Some(rest) => Ok(RealArg(parse(rest)?.ln())),
            None => Ok(RealArg(parse(s)?)),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "bergman", version, about = "Bergman kernels and Green functions of hyperbolic quotients")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Default)]
struct OutputArgs {
    /// Write machine-readable output to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Machine-readable output format.
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Debug, Args, Clone, Default)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override `series.max_word_length`.
    #[arg(long)]
    max_word_length: Option<usize>,
    /// Override `series.tol`.
    #[arg(long)]
    tol: Option<f64>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pulled-back quotient kernel Q(z, w).
    Kernel {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        z: Coord,
        #[arg(long, allow_hyphen_values = true)]
        w: Coord,
        /// Sum over tower level J instead of the whole group.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Green function of the quotient.
    Green {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        z: Coord,
        #[arg(long, allow_hyphen_values = true)]
        w: Coord,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Per-level stability report for the configured tower.
    Tower {
        #[command(flatten)]
        common: Common,
    },
    /// Injectivity radius at a point (default: the basepoint).
    Tau {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        z: Option<Coord>,
        #[arg(long)]
        level: Option<usize>,
    },
    /// Enumerate the word ball and its displacement sums.
    Enumerate {
        #[command(flatten)]
        common: Common,
        /// Count reduced words of a free group of this rank (no configuration needed).
        #[arg(long)]
        rank: Option<usize>,
    },
    /// Effective bound for a compact level of genus g and injectivity radius τ.
    Effective {
        #[arg(long)]
        genus: u64,
        /// A number, or `logX`.
        #[arg(long, allow_hyphen_values = true)]
        tau: RealArg,
        #[arg(long)]
        index: Option<u64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Quick internal consistency checks.
    Selftest,
}

/// What a command produced, before it is routed to stdout or files.
#[derive(Debug, Default)]
pub struct Rendered {
    pub human: String,
    pub csv: String,
    pub record: String,
    pub warnings: Vec<String>,
    /// Extra files requested by the configuration.
    pub files: Vec<(PathBuf, String)>,
    /// Non-zero when the command itself reports failure (selftest).
    pub status: i32,
}

impl Rendered {
    fn machine(&self, f: OutputFormat) -> &str {
        match f {
            OutputFormat::Csv => &self.csv,
            OutputFormat::Record => &self.record,
        }
    }
}

/// Runs the tool with explicit arguments and streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    EXIT_CONFIG
                }
            };
        }
    };
    let result = worker_pool().and_then(|pool| {
        let output = output_args(&cli.command);
        let rendered = match pool {
            Some(p) => p.install(|| execute(cli.command)),
            None => execute(cli.command),
        }?;
        Ok((rendered, output))
    });
    match result.and_then(|(r, o)| emit(&r, &o, out, err).map(|_| r.status)) {
        Ok(status) => status,
        Err(e) => {
            let _ = writeln!(err, "{}", e.record());
            e.exit_code()
        }
    }
}

fn worker_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else {
        return Ok(None);
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Config(format!("{WORKERS_ENV} must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map(Some)
        .map_err(|e| CliError::Config(format!("cannot start {n} workers: {e}")))
}

fn output_args(c: &Command) -> OutputArgs {
    match c {
        Command::Kernel { common, .. }
        | Command::Green { common, .. }
        | Command::Tower { common }
        | Command::Tau { common, .. }
        | Command::Enumerate { common, .. } => common.output.clone(),
        Command::Effective { output, .. } => output.clone(),
        Command::Selftest => OutputArgs::default(),
    }
}

fn write_file(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(r: &Rendered, o: &OutputArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    for w in &r.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    for (path, text) in &r.files {
        write_file(path, text)?;
    }
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match (&o.out, o.format) {
        (Some(path), f) => {
            write_file(path, r.machine(f.unwrap_or(OutputFormat::Csv)))?;
            out.write_all(r.human.as_bytes()).map_err(io)?;
        }
        (None, Some(f)) => out.write_all(r.machine(f).as_bytes()).map_err(io)?,
        (None, None) => out.write_all(r.human.as_bytes()).map_err(io)?,
    }
    Ok(())
}

fn load(common: &Common) -> Result<Experiment, CliError> {
    let path = common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required for this command".into()))?;
    let mut exp = Experiment::load(path)?;
    if let Some(l) = common.max_word_length {
        exp.series.max_len = l;
    }
    if let Some(t) = common.tol {
        if !(t > 0.0) {
            return Err(CliError::Config(format!("--tol must be positive, got {t}")));
        }
        exp.series.tol = t;
    }
    Ok(exp)
}

fn banner(exp: &Experiment) -> Vec<String> {
    if exp.needs_assertion_warning() {
        vec!["freeness, discreteness and convergence type of this group are asserted by the configuration and not verified".into()]
    } else {
        Vec::new()
    }
}

fn point(exp: &Experiment, c: Coord) -> Result<ModelPoint<f64>, CliError> {
    ModelPoint::new(Complex::new(c.0, c.1), exp.group.model()).map_err(CliError::from_config)
}

fn with_pred<R>(
    exp: &Experiment,
    level: Option<usize>,
    f: impl FnOnce(&dyn Membership) -> Result<R, CliError>,
) -> Result<R, CliError> {
    match level {
        None => f(&WholeGroup),
        Some(j) => {
            let t = exp.require_tower()?;
            let lvl = TowerLevel::new(t, j).map_err(CliError::from_config)?;
            f(&lvl)
        }
    }
}

fn execute(cmd: Command) -> Result<Rendered, CliError> {
    match cmd {
        Command::Kernel { common, z, w, level } => cmd_kernel(&load(&common)?, z, w, level),
        Command::Green { common, z, w, level } => cmd_green(&load(&common)?, z, w, level),
        Command::Tower { common } => cmd_tower(&load(&common)?),
        Command::Tau { common, z, level } => cmd_tau(&load(&common)?, z, level),
        Command::Enumerate { common, rank } => cmd_enumerate(&common, rank),
        Command::Effective { genus, tau, index, .. } => cmd_effective(genus, tau.0, index),
        Command::Selftest => Ok(cmd_selftest()),
    }
}

pub fn cmd_kernel(exp: &Experiment, z: Coord, w: Coord, level: Option<usize>) -> Result<Rendered, CliError> {
    exp.require_convergence()?;
    let (zp, wp) = (point(exp, z)?, point(exp, w)?);
    let kv = with_pred(exp, level, |p| Ok(QuotientSeries::new(&exp.group, p, &exp.series)?.kernel(&zp, &wp)?))?;
    let mut r = Rendered {
        warnings: banner(exp),
        ..Default::default()
    };
    if kv.truncation.divergence_warning() && kv.tail_estimate > 0.0 {
        r.warnings.push("shell sums are not decreasing; the tail estimate is unreliable".into());
    }
    let t = &kv.truncation;
    r.human = format!(
        "Q(z, w) = {}\ntail estimate = {}\nterms used = {} (max word length {}, {})\n",
        output::human_complex(kv.value),
        output::human(kv.tail_estimate),
        t.terms_used,
        t.max_len,
        t.policy
    );
    r.csv = format!(
        "# config_sha256={}\n{}z_re,z_im,w_re,w_im,value_re,value_im,tail_estimate\n{},{},{},{},{},{},{}\n",
        exp.hash,
        output::truncation_header(t),
        output::full(z.0),
        output::full(z.1),
        output::full(w.0),
        output::full(w.1),
        output::full(kv.value.re),
        output::full(kv.value.im),
        output::full(kv.tail_estimate)
    );
    r.record = json!({
        "record": "kernel",
        "config_sha256": exp.hash,
        "model": exp.group.model().to_string(),
        "level": level,
        "z": [output::num(z.0), output::num(z.1)],
        "w": [output::num(w.0), output::num(w.1)],
        "value": output::pair(kv.value),
        "tail_estimate": output::num(kv.tail_estimate),
        "truncation": output::truncation_record(t),
    })
    .to_string()
        + "\n";
    Ok(r)
}

pub fn cmd_green(exp: &Experiment, z: Coord, w: Coord, level: Option<usize>) -> Result<Rendered, CliError> {
    exp.require_convergence()?;
    let (zp, wp) = (point(exp, z)?, point(exp, w)?);
    let gv = with_pred(exp, level, |p| Ok(QuotientSeries::new(&exp.group, p, &exp.series)?.green(&zp, &wp)?))?;
    let t = &gv.truncation;
    let mut r = Rendered {
        warnings: banner(exp),
        ..Default::default()
    };
    if t.divergence_warning() && gv.tail_estimate > 0.0 {
        r.warnings.push("shell sums are not decreasing; the tail estimate is unreliable".into());
    }
    r.human = format!(
        "g(z, w) = {}\ntail estimate = {}\nterms used = {} (max word length {})\n",
        output::human(gv.value),
        output::human(gv.tail_estimate),
        t.terms_used,
        t.max_len
    );
    r.csv = format!(
        "# config_sha256={}\n{}z_re,z_im,w_re,w_im,value,tail_estimate\n{},{},{},{},{},{}\n",
        exp.hash,
        output::truncation_header(t),
        output::full(z.0),
        output::full(z.1),
        output::full(w.0),
        output::full(w.1),
        output::full(gv.value),
        output::full(gv.tail_estimate)
    );
    r.record = json!({
        "record": "green",
        "config_sha256": exp.hash,
        "model": exp.group.model().to_string(),
        "level": level,
        "z": [output::num(z.0), output::num(z.1)],
        "w": [output::num(w.0), output::num(w.1)],
        "value": output::num(gv.value),
        "tail_estimate": output::num(gv.tail_estimate),
        "truncation": output::truncation_record(t),
    })
    .to_string()
        + "\n";
    Ok(r)
}

pub fn cmd_tower(exp: &Experiment) -> Result<Rendered, CliError> {
    exp.require_convergence()?;
    let tower = exp.require_tower()?.clone();
    let report = run_tower_report(&TowerExperiment {
        group: exp.group.clone(),
        tower,
        basepoint: exp.basepoint,
        grid: exp.grid.clone(),
        series: exp.series.clone(),
    })?;
    let policy = exp.series.closure.to_string();
    let csv = output::tower_csv(&report, &exp.hash, &policy);
    let record = output::tower_records(&report, &exp.hash, &policy);
    let files = exp
        .outputs
        .iter()
        .map(|o| {
            let text = match o.format {
                OutputFormat::Csv => csv.clone(),
                OutputFormat::Record => record.clone(),
            };
            (o.path.clone(), text)
        })
        .collect();
    let mut warnings = banner(exp);
    if !report.decaying {
        warnings.push("shell sums are not decreasing; tail estimates are unreliable".into());
    }
    Ok(Rendered {
        human: output::tower_human(&report),
        csv,
        record,
        warnings,
        files,
        status: EXIT_OK,
    })
}

pub fn cmd_tau(exp: &Experiment, z: Option<Coord>, level: Option<usize>) -> Result<Rendered, CliError> {
    let x = match z {
        Some(c) => point(exp, c)?,
        None => exp.basepoint,
    };
    let ir = with_pred(exp, level, |p| Ok(injectivity_radius(&exp.group, p, &x, exp.series.max_len)?))?;
    let c = x.coordinate();
    let status = if ir.certified { "certified" } else { "upper bound over the enumerated ball" };
    Ok(Rendered {
        warnings: banner(exp),
        human: format!("tau = {} ({status})\n", output::human(ir.tau)),
        csv: format!(
            "# config_sha256={}\n# max_word_length={}\nz_re,z_im,tau,certified\n{},{},{},{}\n",
            exp.hash,
            exp.series.max_len,
            output::full(c.re),
            output::full(c.im),
            output::full(ir.tau),
            ir.certified
        ),
        record: json!({
            "record": "tau",
            "config_sha256": exp.hash,
            "max_word_length": exp.series.max_len,
            "level": level,
            "z": output::pair(c),
            "tau": output::num(ir.tau),
            "certified": ir.certified,
        })
        .to_string()
            + "\n",
        ..Default::default()
    })
}

fn cmd_enumerate(common: &Common, rank: Option<usize>) -> Result<Rendered, CliError> {
    if common.config.is_none() {
        let rank = rank.ok_or_else(|| CliError::Config("enumerate needs --config or --rank".into()))?;
        let l = common
            .max_word_length
            .ok_or_else(|| CliError::Config("--rank needs --max-word-length".into()))?;
        let n = ball_size(rank, l);
        return Ok(Rendered {
            human: format!("reduced words of length <= {l} in rank {rank}: {n}\n"),
            csv: format!("# config_sha256=none\nrank,max_word_length,count\n{rank},{l},{n}\n"),
            record: json!({"record": "enumerate", "config_sha256": "none", "rank": rank, "max_word_length": l, "count": n.to_string()}).to_string() + "\n",
            ..Default::default()
        });
    }
    let exp = load(common)?;
    if rank.is_some_and(|r| r != exp.group.rank()) {
        return Err(CliError::Config(format!("--rank disagrees with the configured rank {}", exp.group.rank())));
    }
    let ball = enumerate_ball_with(
        &exp.group,
        &EnumerationOptions {
            max_len: exp.series.max_len,
            cap: exp.series.element_cap,
            prune_below: exp.series.prune.then_some(exp.series.tol),
        },
    )?;
    let table = convergence_table(&ball);
    let mut csv = format!(
        "# config_sha256={}\n# max_word_length={} elements={} fitted_ratio={}\nlength,count,shell_sum,partial_sum\n",
        exp.hash,
        ball.max_len,
        ball.len(),
        output::opt(table.fitted_ratio)
    );
    let mut shells = Vec::new();
    for (k, (inc, ps)) in table.increments.iter().zip(&table.partial_sums).enumerate() {
        let l = k + 1;
        let count = ball.shell(l).len();
        let _ = writeln!(csv, "{l},{count},{},{}", output::full(*inc), output::full(*ps));
        shells.push(json!({"length": l, "count": count, "shell_sum": output::num(*inc), "partial_sum": output::num(*ps)}));
    }
    let human = format!(
        "elements: {}\nfitted decay ratio: {}\nlikely convergent: {}\n",
        ball.len(),
        table.fitted_ratio.map(output::human).unwrap_or_else(|| "none".into()),
        table.likely_convergent
    );
    Ok(Rendered {
        warnings: banner(&exp),
        human,
        csv,
        record: json!({
            "record": "enumerate",
            "config_sha256": exp.hash,
            "max_word_length": ball.max_len,
            "count": ball.len(),
            "fitted_ratio": table.fitted_ratio.map(output::num),
            "likely_convergent": table.likely_convergent,
            "shells": shells,
        })
        .to_string()
            + "\n",
        ..Default::default()
    })
}

pub fn cmd_effective(genus: u64, tau: f64, index: Option<u64>) -> Result<Rendered, CliError> {
    let b = effective_bound_rhs(&EffectiveInputs { genus, tau, index })?;
    let book = index.map(|i| genus_bookkeeping(genus, i)).transpose()?;
    let note = "valid for compact levels with injectivity radius >= log 3";
    let mut human = format!(
        "|4π|K|_hyp - 1| <= {}  ({note})\nconstant 18·4·24^(-1/3) = {} (12·3^(2/3) residual {})\n",
        output::human(b.value),
        output::human(b.constant),
        output::human(b.constant_residual)
    );
    if let Some(k) = &book {
        let _ = writeln!(human, "cover genus = {}, genus/index = {}", k.cover_genus, k.ratio);
    }
    let csv = format!(
        "# config_sha256=none\ngenus,tau,index,bound,constant,constant_residual,cover_genus\n{genus},{},{},{},{},{},{}\n",
        output::full(tau),
        index.map(|i| i.to_string()).unwrap_or_default(),
        output::full(b.value),
        output::full(b.constant),
        output::full(b.constant_residual),
        book.map(|k| k.cover_genus.to_string()).unwrap_or_default()
    );
    let record = json!({
        "record": "effective",
        "config_sha256": "none",
        "genus": genus,
        "tau": output::num(tau),
        "index": index,
        "bound": output::num(b.value),
        "constant": output::num(b.constant),
        "constant_residual": output::num(b.constant_residual),
        "cover_genus": book.map(|k| k.cover_genus),
        "ratio": book.map(|k| k.ratio.to_string()),
        "note": note,
    })
    .to_string()
        + "\n";
    Ok(Rendered {
        human,
        csv,
        record,
        ..Default::default()
    })
}

fn selftest_checks() -> Vec<(&'static str, Result<bool, Error>)> {
    let mut out: Vec<(&'static str, Result<bool, Error>)> = Vec::new();
    let zero = Complex::new(0.0, 0.0);
    out.push(("disc kernel at the origin", Ok((disc_kernel(zero, zero).re - std::f64::consts::FRAC_1_PI).abs() < 1e-16)));
    out.push(("annulus oracle against the cyclic series", (|| {
        let lambda = (2.0 * std::f64::consts::PI).exp();
        let g = GroupSpec::cyclic_dilation(lambda)?;
        let s = QuotientSeries::new(&g, &WholeGroup, &crate::kernel::SeriesOptions::new(30))?;
        let pts = [ModelPoint::halfplane(0.3, 1.2)?, ModelPoint::halfplane(-0.5, 0.7)?];
        for z in &pts {
            for w in &pts {
                let q = s.kernel(z, w)?.value;
                let o = annulus_pullback_oracle(lambda, z, w, 60)?;
                if (q - o).norm() > 1e-8 * o.norm() {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    })()));
    out.push(("injectivity radius of <w -> 9w> at i", (|| {
        let g = GroupSpec::cyclic_dilation(9.0)?;
        let r = injectivity_radius(&g, &WholeGroup, &ModelPoint::base(Model::HalfPlane), 4)?;
        Ok(r.certified && (r.tau - 3f64.ln()).abs() < 1e-12)
    })()));
    out.push(("effective constant identity", effective_bound_rhs(&EffectiveInputs { genus: 2, tau: 3f64.ln(), index: None })
        .map(|b| b.constant_residual < 1e-14 && (b.value - 12.0 * 3f64.cbrt() / std::f64::consts::PI).abs() < 1e-12)));
    out.push(("genus bookkeeping", genus_bookkeeping(3, 5).map(|b| b.cover_genus == 11)));
    out.push(("ball size", Ok(ball_size(2, 2) == 17)));
    out
}

pub fn cmd_selftest() -> Rendered {
    let mut human = String::new();
    let mut records = String::new();
    let mut failed = 0;
    for (name, res) in selftest_checks() {
        let ok = matches!(res, Ok(true));
        if !ok {
            failed += 1;
        }
        let detail = match &res {
            Err(e) => format!(" ({e})"),
            _ => String::new(),
        };
        let _ = writeln!(human, "{} {name}{detail}", if ok { "ok  " } else { "FAIL" });
        records += &(json!({"record": "selftest", "check": name, "ok": ok}).to_string() + "\n");
    }
    Rendered {
        csv: human.clone(),
        human,
        record: records,
        status: if failed == 0 { EXIT_OK } else { EXIT_NUMERIC },
        ..Default::default()
    }
}
