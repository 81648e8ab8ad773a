//! Command-line front end.
//!
//! Every subcommand accepts the shared solver flags plus `--config <file>`, a
//! `key = value` file whose entries override the flags given on the command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use quasi1d::physics::InterfaceFlux;
use quasi1d::time_integration::Method;

use crate::nozzle::NozzleRegime;
use crate::report::{ExperimentReport, OutputFormat};
use crate::runs::{
    run_euler_convergence, run_euler_ec, run_euler_nozzle, run_swe_channel, run_swe_convergence, run_swe_wellbalanced,
    ChannelConfig, ConvergenceKind, EulerConvergenceConfig, EulerEcConfig, NozzleConfig, SweConvergenceConfig,
    WellBalancedCase, WellBalancedConfig,
};
use crate::verify::{run_verify, seed_from_env, VerifyConfig};
use crate::{ExperimentError, TimeStepping};

#[derive(Debug, Parser)]
#[command(name = "quasi1d", version, about = "Entropy stable quasi-1D shallow water and Euler experiments")]
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Convergence study for the shallow water equations.
    SweConvergence {
        #[command(flatten)]
        common: Common,
        /// manufactured or fine-grid.
        #[arg(long, default_value = "manufactured")]
        kind: ConvergenceKind,
        #[command(flatten)]
        reference: Reference,
        #[command(flatten)]
        domain: Domain,
    },
    /// Lake at rest over continuous or discontinuous geometry.
    SweWellbalanced {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "discontinuous")]
        case: WellBalancedCase,
    },
    /// Transcritical flow through a converging-diverging channel.
    SweChannel {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        contraction_end: Option<f64>,
        /// Constant width 5 instead of the contraction.
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        uniform_width: Option<bool>,
        #[arg(long)]
        steady_tol: Option<f64>,
        /// Half-width of the window around the shock left out of the discharge check.
        #[arg(long)]
        shock_exclusion: Option<f64>,
    },
    /// Entropy conservation test with discontinuous data and width.
    EulerEc {
        #[command(flatten)]
        common: Common,
    },
    /// Convergence study for the compressible Euler equations.
    EulerConvergence {
        #[command(flatten)]
        common: Common,
        /// manufactured, fine-grid or fine-grid-nonuniform.
        #[arg(long, default_value = "manufactured")]
        kind: ConvergenceKind,
        #[command(flatten)]
        reference: Reference,
        #[command(flatten)]
        domain: Domain,
        #[arg(long, num_args = 0..=1, default_missing_value = "true")]
        periodic: Option<bool>,
    },
    /// Subsonic or transonic flow through a Laval nozzle.
    EulerNozzle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "subsonic")]
        regime: NozzleRegime,
        /// Outlet over stagnation pressure.
        #[arg(long)]
        pressure_ratio: Option<f64>,
    },
    /// SBP, Tadmor, dissipation and entropy-gradient property suites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Seed of the random suites (default: QUASI1D_SEED or 0).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pairs: Option<usize>,
    },
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Polynomial degree, or a comma separated list for convergence studies.
    #[arg(long)]
    degree: Option<String>,
    /// Number of elements, or a comma separated doubling chain.
    #[arg(long)]
    elements: Option<String>,
    /// ec, es-lxf or es-wb.
    #[arg(long)]
    flux: Option<InterfaceFlux>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    /// rk4 or dopri5.
    #[arg(long)]
    integrator: Option<Method>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value = "output")]
    output: PathBuf,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// key = value file overriding the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct Reference {
    #[arg(long)]
    reference_degree: Option<usize>,
    #[arg(long)]
    reference_elements: Option<usize>,
}

#[derive(Debug, Clone, Args)]
struct Domain {
    #[arg(long, allow_hyphen_values = true)]
    x_left: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_right: Option<f64>,
}

impl Domain {
    fn apply(&self, default: (f64, f64)) -> (f64, f64) {
        (self.x_left.unwrap_or(default.0), self.x_right.unwrap_or(default.1))
    }
}

impl Common {
    fn stepping(&self, default: TimeStepping) -> TimeStepping {
        let mut s = default;
        if let Some(m) = self.integrator {
            s.method = m;
        }
        if let Some(c) = self.cfl {
            s.cfl = c;
        }
        if let Some(t) = self.tol {
            s.tol = t;
        }
        s
    }

    fn degrees(&self) -> Result<Option<Vec<usize>>, ExperimentError> {
        self.degree.as_deref().map(|s| parse_list(s, "degree")).transpose()
    }

    fn element_list(&self) -> Result<Option<Vec<usize>>, ExperimentError> {
        self.elements.as_deref().map(|s| parse_list(s, "elements")).transpose()
    }

    fn single(list: Option<Vec<usize>>, name: &str, default: usize) -> Result<usize, ExperimentError> {
        match list.as_deref() {
            None => Ok(default),
            Some([one]) => Ok(*one),
            Some(_) => Err(ExperimentError::InvalidInput(format!("--{name} takes a single value here"))),
        }
    }
}

fn parse_list(s: &str, name: &str) -> Result<Vec<usize>, ExperimentError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| ExperimentError::InvalidInput(format!("--{name} expects comma separated integers, got '{s}'")))
}

/// Parses a `key = value` file into `--key=value` tokens. Blank lines and `#`
/// comments are skipped; underscores in keys become dashes.
pub fn config_tokens(text: &str) -> Result<Vec<String>, String> {
    let mut tokens = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value, got '{raw}'", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key '{key}'", n + 1));
        }
        tokens.push(format!("--{key}={}", value.trim()));
    }
    Ok(tokens)
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::SweConvergence { common, .. }
        | Command::SweWellbalanced { common, .. }
        | Command::SweChannel { common, .. }
        | Command::EulerEc { common }
        | Command::EulerConvergence { common, .. }
        | Command::EulerNozzle { common, .. }
        | Command::Verify { common, .. } => common,
    }
}

fn parse(argv: &[OsString]) -> Result<Cli, clap::Error> {
    Cli::try_parse_from(argv)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let mut cli = match parse(&argv) {
        Ok(cli) => cli,
        Err(e) => return clap_exit(e),
    };
    if let Some(path) = common(&cli.command).config.clone() {
        let tokens = match fs::read_to_string(&path).map_err(|e| e.to_string()).and_then(|t| config_tokens(&t)) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: config file {}: {e}", path.display());
                return 2;
            }
        };
        argv.extend(tokens.into_iter().map(OsString::from));
        cli = match parse(&argv) {
            Ok(cli) => cli,
            Err(e) => return clap_exit(e),
        };
    }
    match execute(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn clap_exit(e: clap::Error) -> i32 {
    let code = match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
        _ => 2,
    };
    let _ = e.print();
    code
}

fn emit(report: &ExperimentReport, common: &Common) -> Result<i32, ExperimentError> {
    let paths = report.write(&common.output, common.format)?;
    println!("{}", report.experiment);
    for t in &report.tables {
        println!("  N = {}", t.degree);
        for row in &t.rows {
            match row.rate {
                Some(r) => println!("    K = {:>6}  error {:.4e}  rate {:.3}", row.elements, row.error, r),
                None => println!("    K = {:>6}  error {:.4e}", row.elements, row.error),
            }
        }
    }
    for (k, v) in &report.metrics {
        println!("  {k} = {v:.6e}");
    }
    for p in paths {
        println!("  wrote {}", p.display());
    }
    Ok(0)
}

fn execute(cmd: &Command) -> Result<i32, ExperimentError> {
    let c = common(cmd);
    if let Some(t) = c.t_final {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(ExperimentError::InvalidInput(format!("--t-final must be non-negative, got {t}")));
        }
    }
    match cmd {
        Command::SweConvergence { kind, reference, domain, .. } => {
            let mut cfg = SweConvergenceConfig::new(*kind);
            cfg.degrees = c.degrees()?.unwrap_or(cfg.degrees);
            cfg.elements = c.element_list()?.unwrap_or(cfg.elements);
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.g = c.g.unwrap_or(cfg.g);
            cfg.domain = domain.apply(cfg.domain);
            cfg.reference_degree = reference.reference_degree.unwrap_or(cfg.reference_degree);
            cfg.reference_elements = reference.reference_elements.unwrap_or(cfg.reference_elements);
            emit(&run_swe_convergence(&cfg)?, c)
        }
        Command::SweWellbalanced { case, .. } => {
            let mut cfg = WellBalancedConfig::new(*case);
            cfg.degree = Common::single(c.degrees()?, "degree", cfg.degree)?;
            cfg.elements = Common::single(c.element_list()?, "elements", cfg.elements)?;
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.g = c.g.unwrap_or(cfg.g);
            emit(&run_swe_wellbalanced(&cfg)?, c)
        }
        Command::SweChannel { contraction_end, uniform_width, steady_tol, shock_exclusion, .. } => {
            let mut cfg = ChannelConfig::default();
            cfg.degree = Common::single(c.degrees()?, "degree", cfg.degree)?;
            cfg.elements = Common::single(c.element_list()?, "elements", cfg.elements)?;
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.g = c.g.unwrap_or(cfg.g);
            cfg.contraction_end = contraction_end.unwrap_or(cfg.contraction_end);
            cfg.uniform_width = uniform_width.unwrap_or(cfg.uniform_width);
            cfg.steady_tol = steady_tol.unwrap_or(cfg.steady_tol);
            cfg.shock_exclusion = shock_exclusion.unwrap_or(cfg.shock_exclusion);
            emit(&run_swe_channel(&cfg)?, c)
        }
        Command::EulerEc { .. } => {
            let mut cfg = EulerEcConfig::default();
            cfg.degree = Common::single(c.degrees()?, "degree", cfg.degree)?;
            cfg.elements = Common::single(c.element_list()?, "elements", cfg.elements)?;
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.gamma = c.gamma.unwrap_or(cfg.gamma);
            emit(&run_euler_ec(&cfg)?, c)
        }
        Command::EulerConvergence { kind, reference, periodic, domain, .. } => {
            let mut cfg = EulerConvergenceConfig::new(*kind);
            cfg.degrees = c.degrees()?.unwrap_or(cfg.degrees);
            cfg.elements = c.element_list()?.unwrap_or(cfg.elements);
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.gamma = c.gamma.unwrap_or(cfg.gamma);
            cfg.periodic = periodic.unwrap_or(cfg.periodic);
            cfg.domain = domain.apply(cfg.domain);
            cfg.reference_degree = reference.reference_degree.unwrap_or(cfg.reference_degree);
            cfg.reference_elements = reference.reference_elements.unwrap_or(cfg.reference_elements);
            emit(&run_euler_convergence(&cfg)?, c)
        }
        Command::EulerNozzle { regime, pressure_ratio, .. } => {
            let mut cfg = NozzleConfig::new(*regime);
            cfg.degree = Common::single(c.degrees()?, "degree", cfg.degree)?;
            cfg.elements = Common::single(c.element_list()?, "elements", cfg.elements)?;
            cfg.flux = c.flux.unwrap_or(cfg.flux);
            cfg.t_final = c.t_final.unwrap_or(cfg.t_final);
            cfg.stepping = c.stepping(cfg.stepping);
            cfg.gamma = c.gamma.unwrap_or(cfg.gamma);
            cfg.outlet_ratio = pressure_ratio.unwrap_or(cfg.outlet_ratio);
            emit(&run_euler_nozzle(&cfg)?, c)
        }
        Command::Verify { seed, pairs, .. } => {
            let seed = match seed {
                Some(s) => *s,
                None => seed_from_env().map_err(ExperimentError::InvalidInput)?,
            };
            let mut cfg = VerifyConfig { seed, ..VerifyConfig::default() };
            cfg.pairs = pairs.unwrap_or(cfg.pairs);
            if let Some(d) = c.degrees()? {
                cfg.max_degree = Common::single(Some(d), "degree", cfg.max_degree)?;
            }
            let result = run_verify(&cfg);
            println!("verify (seed {})", result.seed);
            for check in &result.checks {
                println!("  {check}");
            }
            write_report(&result.to_report(), &c.output, c.format)?;
            Ok(if result.passed() { 0 } else { 1 })
        }
    }
}

fn write_report(report: &ExperimentReport, dir: &Path, format: OutputFormat) -> Result<(), ExperimentError> {
    for p in report.write(dir, format)? {
        println!("  wrote {}", p.display());
    }
    Ok(())
}
