//! Command-line surface: argument parsing, verb dispatch and report emission.

pub mod report;
pub mod verbs;

use clap::{Parser, Subcommand, ValueEnum};
use report::{Format, RunReport};
use serde::Deserialize;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientArg {
    Psi,
    PsiInverse,
}

#[derive(Debug, Parser)]
#[command(name = "padic-harmonic", about = "p-adic harmonic analysis checks and factors")]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    #[command(flatten)]
    pub opts: Opts,
}

#[derive(Debug, Clone, clap::Args, Default)]
pub struct Opts {
    /// residue characteristic (odd prime)
    #[arg(long, global = true)]
    pub p: Option<i64>,
    /// rank of Sp(2n)
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// level of the unit group (Z/p^N)^x
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// conductor of the character (default: trivial)
    #[arg(long, global = true)]
    pub conductor: Option<u32>,
    /// index among characters of the given conductor
    #[arg(long, global = true)]
    pub index: Option<usize>,
    /// enumeration precision for fiber counts
    #[arg(long, global = true)]
    pub k: Option<u32>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub orientation: Option<OrientArg>,
    /// real part of s for the shells verb
    #[arg(long, global = true)]
    pub s: Option<f64>,
    /// record wall-clock runtimes (reports are then no longer byte-stable)
    #[arg(long, global = true)]
    pub timings: bool,
    /// TOML file; its values override flags
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Tate gamma factor as a rational function of z
    Gamma,
    /// beta(chi_s) as a rational function of z
    Beta,
    /// Shells of the eta kernel
    EtaTable,
    /// Functional equation checks
    Verify {
        #[command(subcommand)]
        which: VerifyWhich,
    },
    /// Determinant fiber counts on symmetric matrices mod p^k
    CountFibers,
    /// Exact symplectic identity suite
    SymplecticCheck,
    /// Gamma factors against brute-force Tate zeta ratios
    TateOracle,
    /// Double transform and Plancherel at n = 0
    FourierN0,
    /// Shell coefficients of the invariant distribution at n = 0
    Shells,
}

#[derive(Debug, Subcommand)]
pub enum VerifyWhich {
    FeGl1,
    FePvs,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    p: Option<i64>,
    n: Option<u32>,
    level: Option<u32>,
    conductor: Option<u32>,
    index: Option<usize>,
    k: Option<u32>,
    tolerance: Option<f64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    seed: Option<u64>,
    orientation: Option<OrientArg>,
    s: Option<f64>,
}

/// Fully resolved parameters.
#[derive(Debug, Clone)]
pub struct Params {
    pub p: i64,
    pub n: u32,
    pub level: Option<u32>,
    pub conductor: Option<u32>,
    pub index: usize,
    pub k: Option<u32>,
    pub tolerance: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub seed: u64,
    pub orient: padic_harmonic::padic::Orientation,
    pub s: f64,
    pub timings: bool,
}

/// Usage-level failure (exit 2).
#[derive(Debug)]
pub struct UsageError(pub String);

impl Opts {
    /// Config overrides flags; flags override defaults.
    pub fn resolve(&self) -> Result<Params, UsageError> {
        let cfg = match &self.config {
            None => ConfigFile::default(),
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))?
            }
        };
        let orient = match cfg.orientation.or(self.orientation).unwrap_or(OrientArg::Psi) {
            OrientArg::Psi => padic_harmonic::padic::Orientation::Psi,
            OrientArg::PsiInverse => padic_harmonic::padic::Orientation::PsiInverse,
        };
        let p = cfg.p.or(self.p).unwrap_or(3);
        if padic_harmonic::padic::check_odd_prime(p).is_err() {
            return Err(UsageError(format!("--p {p} is not an odd prime")));
        }
        Ok(Params {
            p,
            n: cfg.n.or(self.n).unwrap_or(0),
            level: cfg.level.or(self.level),
            conductor: cfg.conductor.or(self.conductor),
            index: cfg.index.or(self.index).unwrap_or(0),
            k: cfg.k.or(self.k),
            tolerance: cfg.tolerance.or(self.tolerance),
            out: cfg.out.or_else(|| self.out.clone()),
            format: cfg.format.or(self.format).unwrap_or(Format::Json),
            seed: cfg.seed.or(self.seed).unwrap_or(0),
            orient,
            s: cfg.s.or(self.s).unwrap_or(0.7),
            timings: self.timings,
        })
    }
}

/// Parse, run and write; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Ok(t) = std::env::var("PADIC_HARMONIC_THREADS") {
        if let Ok(t) = t.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let params = match cli.opts.resolve() {
        Ok(p) => p,
        Err(UsageError(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let report = match verbs::run(&cli.verb, &params) {
        Ok(r) => r,
        Err(UsageError(m)) => {
            eprintln!("error: {m}");
            return 2;
        }
    };
    let bytes = match report::emit(&report, params.format) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &params.out {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| e.to_string()),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(&bytes).map_err(|e| e.to_string())
        }
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return 1;
    }
    exit_code(&report)
}

pub fn exit_code(r: &RunReport) -> i32 {
    if r.all_pass() {
        0
    } else {
        1
    }
}
