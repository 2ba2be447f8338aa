//! Command-line front end: argument model, run configuration and report
//! emission. `run` never prints; the binary writes the returned streams.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::germ::{ClaimRow, ExpansionReport};
use crate::mat::QSl2;
use crate::orbital::{ss_orbital, NORMALIZATION};
use crate::padic::{FieldConfig, DEFAULT_PRECISION};
use crate::rational::fmt_q;
use crate::sl2::{depth_exact, Boundary, TorusType};
use crate::suites::{
    claim_suite, germ_suite, homogeneity_suite, nilpotent_report, oracle_suite, parse_fspec,
    scaling_suite, theorem_suite, GermRow, HomogeneityRow, NilpotentRow, OracleRow, ScalingRow,
    TorusFilter,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Claim,
    Scaling,
    Theorem,
    Homogeneity,
    Oracles,
    Germs,
}

#[derive(Debug, Parser)]
#[command(name = "germlab", version, about = "Exact orbital integrals and Shalika germs for sl2(Q_p)")]
pub struct Cli {
    /// Odd prime.
    #[arg(long, global = true, default_value_t = 5)]
    pub p: u64,
    /// p-adic digits carried by inexact scalars.
    #[arg(long, global = true, env = "GERMLAB_PRECISION", default_value_t = DEFAULT_PRECISION)]
    pub precision: u32,
    /// Support bound: test functions live in p^{-M} sl2(O).
    #[arg(long = "M", global = true, default_value_t = 1)]
    pub m: i64,
    /// Depth.
    #[arg(long, global = true, default_value_t = 0)]
    pub r: i64,
    #[arg(long, global = true, value_enum, default_value_t = TorusFilter::All)]
    pub torus: TorusFilter,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Use depth(X) > r instead of depth(X) >= r for membership in g_r.
    #[arg(long, global = true)]
    pub depth_strict: bool,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// The five nilpotent orbital integrals of f and their scaling under zeta^2.
    Nilpotent {
        #[arg(long)]
        f: String,
    },
    /// The orbital integral of f at a regular semisimple X.
    Orbital {
        #[arg(long = "X")]
        x: String,
        #[arg(long)]
        f: String,
    },
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunConfig {
    pub p: u64,
    pub precision: u32,
    #[serde(rename = "M")]
    pub m: i64,
    pub r: i64,
    pub torus: TorusFilter,
    pub seed: u64,
    pub format: Format,
    pub depth_strict: bool,
    pub out: Option<String>,
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        FieldConfig::new(cli.p, cli.precision)?;
        if cli.m < 0 {
            return Err(Error::InvalidConfig(format!("M = {} must be non-negative", cli.m)));
        }
        if cli.r < 0 {
            return Err(Error::InvalidConfig(format!("r = {} must be non-negative", cli.r)));
        }
        Ok(Self {
            p: cli.p,
            precision: cli.precision,
            m: cli.m,
            r: cli.r,
            torus: cli.torus,
            seed: cli.seed,
            format: cli.format,
            depth_strict: cli.depth_strict,
            out: cli.out.as_ref().map(|p| p.display().to_string()),
        })
    }

    pub fn boundary(&self) -> Boundary {
        if self.depth_strict {
            Boundary::Strict
        } else {
            Boundary::Closed
        }
    }
}

/// Rows know whether they passed and whether they gate the exit code.
pub trait Verdict {
    fn passed(&self) -> bool;
    fn gating(&self) -> bool {
        true
    }
}

impl Verdict for ExpansionReport {
    fn passed(&self) -> bool {
        self.pass
    }
    fn gating(&self) -> bool {
        !self.contrast
    }
}

macro_rules! plain_verdict {
    ($($t:ty),*) => {$(
        impl Verdict for $t {
            fn passed(&self) -> bool {
                self.pass
            }
        }
    )*};
}
plain_verdict!(ClaimRow, ScalingRow, HomogeneityRow, GermRow, OracleRow, NilpotentRow);

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrbitalRow {
    #[serde(rename = "X_id")]
    pub x_id: String,
    pub torus: String,
    pub depth: String,
    pub f_id: String,
    pub value: String,
    pub v0: i64,
    pub tail: String,
    pub certified: bool,
}

impl Verdict for OrbitalRow {
    fn passed(&self) -> bool {
        self.certified
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub rows: usize,
    pub gating: usize,
    pub failed: usize,
    pub contrast_rows: usize,
    /// Some contrast row has a nonzero residual.
    pub contrast_observed: bool,
    pub pass: bool,
}

#[derive(Serialize)]
struct Document<'a, R: Serialize> {
    command: &'a str,
    config: &'a RunConfig,
    normalization: &'a str,
    summary: &'a Summary,
    rows: &'a [R],
}

/// Result of one invocation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn summarize<R: Verdict>(rows: &[R]) -> Summary {
    let gating = rows.iter().filter(|r| r.gating()).count();
    let failed = rows.iter().filter(|r| r.gating() && !r.passed()).count();
    let contrast: Vec<&R> = rows.iter().filter(|r| !r.gating()).collect();
    Summary {
        rows: rows.len(),
        gating,
        failed,
        contrast_rows: contrast.len(),
        contrast_observed: contrast.iter().any(|r| !r.passed()),
        pass: failed == 0,
    }
}

fn csv_rows<R: Serialize>(rows: &[&R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Unsupported(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Unsupported(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

/// Renders the report, writes it to the configured destination and picks
/// the exit code.
pub fn emit<R: Serialize + Verdict>(cfg: &RunConfig, command: &str, rows: &[R]) -> Result<Outcome> {
    let summary = summarize(rows);
    let body = match cfg.format {
        Format::Json => {
            let doc = Document { command, config: cfg, normalization: NORMALIZATION, summary: &summary, rows };
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let head = format!(
                "# command: {command}\n# config: {}\n# normalization: {NORMALIZATION}\n# summary: {}\n",
                serde_json::to_string(cfg).expect("serializable"),
                serde_json::to_string(&summary).expect("serializable"),
            );
            head + &csv_rows(&rows.iter().collect::<Vec<_>>())?
        }
    };
    let mut out = Outcome { code: if summary.pass { EXIT_PASS } else { EXIT_FAIL }, ..Default::default() };
    match &cfg.out {
        Some(path) => std::fs::write(path, &body)
            .map_err(|e| Error::InvalidConfig(format!("cannot write {path}: {e}")))?,
        None => out.stdout = body,
    }
    if !summary.pass {
        let failing: Vec<&R> = rows.iter().filter(|r| r.gating() && !r.passed()).collect();
        out.stderr = format!("{} of {} rows failed\n{}", summary.failed, summary.gating, csv_rows(&failing)?);
    }
    if summary.contrast_rows > 0 && !summary.contrast_observed {
        out.stderr += "finding: no contrast row showed a nonzero residual\n";
    }
    Ok(out)
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Outcome> {
    let p = cfg.p;
    let (b, t, r) = (cfg.boundary(), cfg.torus, cfg.r);
    match &cli.command {
        Command::Nilpotent { f } => {
            let func = parse_fspec(f, p)?;
            emit(cfg, &format!("nilpotent {f}"), &nilpotent_report(&func)?)
        }
        Command::Orbital { x, f } => {
            let xm = QSl2::parse(x)?;
            let func = parse_fspec(f, p)?;
            let res = ss_orbital(&xm, &func)?;
            let row = OrbitalRow {
                x_id: xm.to_string(),
                torus: TorusType::of_minus_det(&-xm.det(), p).name(),
                depth: depth_exact(&xm, p).to_string(),
                f_id: f.clone(),
                value: fmt_q(&res.value),
                v0: res.v0,
                tail: fmt_q(&res.tail),
                certified: res.certified,
            };
            emit(cfg, &format!("orbital {x} {f}"), &[row])
        }
        Command::Verify { suite } => {
            let name = format!("verify {}", suite.to_possible_value().expect("named").get_name());
            match suite {
                Suite::Theorem => emit(cfg, &name, &theorem_suite(r, p, b, t)?),
                Suite::Claim => emit(cfg, &name, &claim_suite(r, p, b, t)?),
                Suite::Scaling => emit(cfg, &name, &scaling_suite(r, p, b, t)?),
                Suite::Homogeneity => emit(cfg, &name, &homogeneity_suite(p, t)?),
                Suite::Germs => emit(cfg, &name, &germ_suite(p, t)?),
                Suite::Oracles => emit(cfg, &name, &oracle_suite(p, cfg.m, cfg.seed, t)?),
            }
        }
    }
}

pub fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::InvalidConfig(_) => EXIT_USAGE,
        _ => EXIT_COMPUTE,
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Outcome {
    let result = RunConfig::from_cli(cli).and_then(|cfg| execute(cli, &cfg));
    result.unwrap_or_else(|e| Outcome {
        code: exit_code_for(&e),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    })
}

/// Parses `args` (program name first) and runs; usage errors exit with 2.
pub fn run_args<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render().to_string();
            if code == EXIT_PASS {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}
