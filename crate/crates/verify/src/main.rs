use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heisenberg_core::constants::sharp_constant;
use heisenberg_verify::config::{ExperimentConfig, OutputFormat};
use heisenberg_verify::report::{self, emit, to_json};
use heisenberg_verify::suite::run_property_suite;
use heisenberg_verify::sweep::run_ratio_sweep;
use heisenberg_verify::volume::volume_check;
use heisenberg_verify::Result;

#[derive(Parser)]
#[command(
    name = "heisenberg-verify",
    version,
    about = "Numerical checks of sharp operator constants on the Heisenberg group"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants with their quadrature cross-checks
    Constants(Common),
    /// Extremizer ratio sweeps against the sharp constant
    Sweep(Common),
    /// Property suites; exits with status 1 on any violation
    Suite(Common),
    /// Unit ball volume by closed form, quadrature and Monte Carlo
    Volume(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Heisenberg dimension n (Q = 2n + 2)
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    pbar_in: Option<String>,
    #[arg(long)]
    pbar_out: Option<String>,
    /// hilbert, hlp or mlinear; a comma list runs several sweeps
    #[arg(long)]
    operator: Option<String>,
    /// Arity of the multilinear operator
    #[arg(long)]
    m: Option<String>,
    /// Slot exponents p_1,...,p_m with sum 1/p_i = 1/p
    #[arg(long)]
    p_list: Option<String>,
    /// Strictly decreasing epsilon values, comma separated
    #[arg(long, allow_hyphen_values = true)]
    eps_grid: Option<String>,
    /// inner or outer extremizer family
    #[arg(long)]
    side: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Monte Carlo sample count
    #[arg(long)]
    samples: Option<String>,
    /// Relative quadrature tolerance
    #[arg(long)]
    tol: Option<String>,
    /// csv or json
    #[arg(long)]
    format: Option<String>,
    /// Output directory (default: $HEISENBERG_VERIFY_OUT, else stdout)
    #[arg(long)]
    out: Option<String>,
    /// Worker threads; output does not depend on it
    #[arg(long)]
    jobs: Option<String>,
    /// Comma list of suites to run (suite command)
    #[arg(long)]
    suite: Option<String>,
    /// Scale the sphere mass by this factor to check that suites notice
    #[arg(long)]
    omega_fault: Option<String>,
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let flags = [
            ("n", &self.n),
            ("p", &self.p),
            ("pbar_in", &self.pbar_in),
            ("pbar_out", &self.pbar_out),
            ("operator", &self.operator),
            ("m", &self.m),
            ("p_list", &self.p_list),
            ("eps_grid", &self.eps_grid),
            ("side", &self.side),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("tol", &self.tol),
            ("format", &self.format),
            ("out", &self.out),
            ("jobs", &self.jobs),
            ("suite", &self.suite),
            ("omega_fault", &self.omega_fault),
        ];
        let overrides: Vec<(String, String)> = flags
            .into_iter()
            .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
            .collect();
        ExperimentConfig::load(self.config.as_deref(), &overrides)
    }
}

fn write(
    cfg: &ExperimentConfig,
    stem: &str,
    csv: impl FnOnce() -> String,
    json: impl FnOnce() -> String,
) -> Result<()> {
    let (text, ext) = match cfg.format {
        OutputFormat::Csv => (csv(), "csv"),
        OutputFormat::Json => (json(), "json"),
    };
    if let Some(path) = emit(cfg.output_dir().as_deref(), &format!("{stem}.{ext}"), &text)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn constants(cfg: &ExperimentConfig) -> Result<u8> {
    let reports = cfg
        .operators
        .iter()
        .map(|&op| Ok(sharp_constant(&cfg.constant_request(op)?, &cfg.quad())?))
        .collect::<Result<Vec<_>>>()?;
    for r in &reports {
        eprintln!(
            "{:<10} {:.12}  quadrature gap {}",
            r.constant,
            r.closed_form_value,
            r.relative_gap.map_or("n/a".into(), |g| format!("{g:.2e}"))
        );
    }
    write(
        cfg,
        "constants",
        || report::constants_csv(&reports),
        || to_json(&reports),
    )?;
    Ok(0)
}

fn sweep(cfg: &ExperimentConfig) -> Result<u8> {
    let sweeps = run_ratio_sweep(cfg)?;
    let diverged: usize = sweeps.iter().map(|s| s.diverged_rows()).sum();
    for s in &sweeps {
        eprintln!(
            "{:<10} constant {:.10}  limit {}  monotone {}  bound {}",
            s.experiment,
            s.constant,
            s.extrapolated_limit
                .map_or("n/a".into(), |v| format!("{v:.10}")),
            s.monotone_flag,
            s.bound_holds()
        );
    }
    let full = report::sweep_report(cfg, sweeps)?;
    write(
        cfg,
        "sweep",
        || report::sweeps_csv(&full.sweeps),
        || to_json(&full),
    )?;
    if diverged > 0 {
        eprintln!("{diverged} row(s) diverged");
        return Ok(3);
    }
    Ok(0)
}

fn suite(cfg: &ExperimentConfig) -> Result<u8> {
    let rep = run_property_suite(cfg)?;
    for r in &rep.results {
        eprintln!(
            "{} {:<15} {} checks, {} violations",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.checks,
            r.violations
        );
        if let Some(v) = &r.first_violation {
            eprintln!("     first violation: {v}");
        }
    }
    write(cfg, "suite", || report::suite_csv(&rep), || to_json(&rep))?;
    Ok(if rep.passed() { 0 } else { 1 })
}

fn volume(cfg: &ExperimentConfig) -> Result<u8> {
    let rep = volume_check(cfg.n, &cfg.quad(), &cfg.mc())?;
    eprintln!(
        "n = {}: closed {:.12}  quadrature gap {:.2e}  Monte Carlo z {:.2}  printed/computed {:.6}",
        rep.n, rep.closed_form, rep.quadrature_rel_gap, rep.monte_carlo_z, rep.printed_ratio
    );
    let passed = rep.passes(1e-10);
    let reports = [rep];
    write(
        cfg,
        "volume",
        || report::volume_csv(&reports),
        || to_json(&reports),
    )?;
    Ok(if passed { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    let (common, f): (&Common, fn(&ExperimentConfig) -> Result<u8>) = match &cli.command {
        Command::Constants(c) => (c, constants),
        Command::Sweep(c) => (c, sweep),
        Command::Suite(c) => (c, suite),
        Command::Volume(c) => (c, volume),
    };
    f(&common.load()?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
