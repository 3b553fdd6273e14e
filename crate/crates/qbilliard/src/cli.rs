//! Command-line orchestration: subcommand dispatch, JSON run configuration,
//! CSV/JSON artifact emission, and concurrent parameter sweeps.
//!
//! Exit-code contract: 0 on success, 1 on numerical failure (non-convergence,
//! blow-up, I/O), 2 on invalid input. All outputs are deterministic; floats
//! are printed with 17 significant digits so artifacts round-trip exactly.

use std::fmt::Write as FmtWrite;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_closed, kernel_quadrature, QuadratureSpec};
use crate::model::{normalize, GaussianPacket, KernelParams};
use crate::nls::{self, CoefficientField, WaveField};
use crate::selfcons::{
    alpha_roots, audit_consistency, fixed_point_iterate, gaussian_b0, normalization_alpha,
    solve_eq21, RootSign,
};
use crate::specfun::{self, EvalPolicy};
use crate::stability::{scan_stability, B0Convention};

/// Environment variable overriding the sweep worker count.
pub const WORKERS_ENV: &str = "QBILLIARD_WORKERS";

#[derive(Parser, Debug)]
#[command(
    name = "qbilliard",
    about = "Numerical toolkit for the self-interacting wave-packet billiard near a wormhole time machine",
    version
)]
pub struct Cli {
    /// Directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,

    /// Suppress the one-line summary on stdout.
    #[arg(long, global = true)]
    pub quiet: bool,

    /// Worker threads for sweeps (default: QBILLIARD_WORKERS or all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Spot-check a special function: name plus numeric arguments.
    Eval {
        /// One of: gamma, ln-gamma, beta, i0, i0-scaled, phi, legendre,
        /// double-factorial, binomial, c-nu.
        function: String,
        args: Vec<f64>,
    },
    /// Evaluate the scattering kernel (closed form and singular quadrature)
    /// at configured points; emits kernel_eval.csv.
    KernelEval {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve for the Gaussian self-consistent parameters; emits JSON.
    GaussianSolve(GaussianSolveArgs),
    /// Root of the width equation a² ± a√(a² + 2√2 a) = rhs.
    Eq21Root {
        /// 'plus' or 'minus'.
        #[arg(long)]
        sign: String,
        #[arg(long)]
        rhs: f64,
    },
    /// Damped fixed-point iteration of the quadratic map; emits a trace CSV.
    FixedPoint {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config mixing parameter.
        #[arg(long)]
        mixing: Option<f64>,
        /// Overrides the config iteration cap.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Cross-validate every computation route for the Gaussian case; emits
    /// audit.json.
    Audit(AuditArgs),
    /// Scan the packet width for the stability threshold; emits
    /// stability_scan.csv with a JSON footer for the critical point.
    StabilityScan(StabilityScanArgs),
    /// Evolve the effective nonlinear Schrödinger equation; emits nls.csv
    /// and optionally a binary snapshot.
    NlsRun {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config horizon.
        #[arg(long)]
        t_final: Option<f64>,
        /// Overrides the config step size.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Run a base subcommand over a parameter range concurrently; emits
    /// sweep.csv sorted by the swept parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args, Debug)]
pub struct GaussianSolveArgs {
    #[arg(long)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
    /// 'coulomb' or 'yukawa'.
    #[arg(long, default_value = "coulomb")]
    pub variant: String,
    #[arg(long, default_value_t = 0.0)]
    pub yukawa_mass: f64,
}

#[derive(Args, Debug)]
pub struct AuditArgs {
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 1.0)]
    pub coupling: f64,
    #[arg(long, default_value_t = 0.1)]
    pub epsilon: f64,
}

#[derive(Args, Debug)]
pub struct StabilityScanArgs {
    #[arg(long)]
    pub a_min: f64,
    #[arg(long)]
    pub a_max: f64,
    #[arg(long)]
    pub count: usize,
    /// 'sqrt_pi_over_alpha' or 'sqrt_2alpha_over_pi'.
    #[arg(long, default_value = "sqrt_pi_over_alpha")]
    pub convention: String,
}

/// Entry point for the binary: parses argv, dispatches, maps errors to the
/// exit-code contract.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version as "errors" with exit code 0
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    fs::create_dir_all(&cli.output_dir)?;
    match &cli.command {
        Command::Eval { function, args } => cmd_eval(cli, function, args),
        Command::KernelEval { config } => cmd_kernel_eval(cli, config),
        Command::GaussianSolve(args) => cmd_gaussian_solve(cli, args),
        Command::Eq21Root { sign, rhs } => cmd_eq21_root(cli, sign, *rhs),
        Command::FixedPoint {
            config,
            mixing,
            max_iters,
        } => cmd_fixed_point(cli, config, *mixing, *max_iters),
        Command::Audit(args) => cmd_audit(cli, args),
        Command::StabilityScan(args) => cmd_stability_scan(cli, args),
        Command::NlsRun {
            config,
            t_final,
            dt,
        } => cmd_nls_run(cli, config, *t_final, *dt),
        Command::Sweep { config } => cmd_sweep(cli, config),
    }
}

/// 17 significant digits: round-trip exact for f64.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn say(cli: &Cli, msg: &str) {
    if !cli.quiet {
        println!("{msg}");
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("malformed config {}: {e}", path.display())))
}

fn write_artifact(cli: &Cli, name: &str, contents: &str) -> Result<PathBuf> {
    let path = cli.output_dir.join(name);
    fs::write(&path, contents)?;
    Ok(path)
}

// ---------------------------------------------------------------------------
// eval

fn cmd_eval(cli: &Cli, function: &str, args: &[f64]) -> Result<()> {
    let need = |n: usize| -> Result<()> {
        if args.len() != n {
            Err(Error::InvalidInput(format!(
                "'{function}' takes {n} argument(s), got {}",
                args.len()
            )))
        } else {
            Ok(())
        }
    };
    let as_u32 = |x: f64, what: &str| -> Result<u32> {
        if x < 0.0 || x.fract() != 0.0 || x > u32::MAX as f64 {
            Err(Error::InvalidInput(format!(
                "{what} must be a non-negative integer, got {x}"
            )))
        } else {
            Ok(x as u32)
        }
    };
    let policy = EvalPolicy::default();
    let value: String = match function {
        "gamma" => {
            need(1)?;
            fmt_f(specfun::gamma(args[0])?)
        }
        "ln-gamma" => {
            need(1)?;
            fmt_f(specfun::ln_gamma(args[0])?)
        }
        "beta" => {
            need(2)?;
            fmt_f(specfun::beta(args[0], args[1])?)
        }
        "i0" => {
            need(1)?;
            fmt_f(specfun::bessel_i0(args[0])?)
        }
        "i0-scaled" => {
            need(1)?;
            fmt_f(specfun::bessel_i0_scaled(args[0])?)
        }
        "phi" => {
            need(3)?;
            fmt_f(specfun::kummer_phi(args[0], args[1], args[2], &policy)?)
        }
        "legendre" => {
            need(2)?;
            fmt_f(specfun::legendre_p(as_u32(args[0], "degree")?, args[1]))
        }
        "double-factorial" => {
            need(1)?;
            if args[0].fract() != 0.0 {
                return Err(Error::InvalidInput("argument must be an integer".into()));
            }
            fmt_f(specfun::double_factorial(args[0] as i64)?)
        }
        "binomial" => {
            need(2)?;
            let n = as_u32(args[0], "n")? as u64;
            if args[1].fract() != 0.0 {
                return Err(Error::InvalidInput("k must be an integer".into()));
            }
            fmt_f(specfun::binomial(n, args[1] as i64))
        }
        "c-nu" => {
            need(3)?;
            fmt_f(specfun::c_nu(as_u32(args[0], "order")?, args[1], args[2])?)
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown function '{other}'; expected one of gamma, ln-gamma, beta, i0, \
                 i0-scaled, phi, legendre, double-factorial, binomial, c-nu"
            )))
        }
    };
    println!("{value}");
    let _ = cli;
    Ok(())
}

// ---------------------------------------------------------------------------
// kernel-eval

#[derive(Debug, Deserialize)]
struct PacketConfig {
    a: f64,
    #[serde(default)]
    b: [f64; 2],
    #[serde(default)]
    c_re: f64,
    #[serde(default)]
    c_im: f64,
    /// When set, Re c is overridden by the normalization convention.
    #[serde(default)]
    normalize: bool,
}

impl PacketConfig {
    fn build(&self) -> Result<GaussianPacket> {
        let packet = GaussianPacket::new(self.a, self.b, Complex64::new(self.c_re, self.c_im))
            .map_err(|e| Error::Config(format!("packet: {e}")))?;
        Ok(if self.normalize {
            normalize(&packet)
        } else {
            packet
        })
    }
}

#[derive(Debug, Deserialize)]
struct KernelPoint {
    k_prime: f64,
    p: [f64; 2],
    q: [f64; 2],
}

#[derive(Debug, Deserialize)]
struct KernelEvalConfig {
    packet: PacketConfig,
    params: KernelParams,
    #[serde(default)]
    quadrature: Option<QuadratureSpec>,
    points: Vec<KernelPoint>,
}

fn cmd_kernel_eval(cli: &Cli, config: &Path) -> Result<()> {
    let cfg: KernelEvalConfig = read_config(config)?;
    let packet = cfg.packet.build()?;
    cfg.params
        .validate()
        .map_err(|e| Error::Config(format!("params: {e}")))?;
    if cfg.points.is_empty() {
        return Err(Error::Config("points must be non-empty".into()));
    }
    if cfg.packet.c_im != 0.0 {
        return Err(Error::Config(
            "kernel quadrature requires a real log-normalization (c_im = 0)".into(),
        ));
    }
    let spec = cfg
        .quadrature
        .unwrap_or_else(|| QuadratureSpec::for_packet(&packet));
    spec.validate().map_err(|e| Error::Config(format!("quadrature: {e}")))?;
    for (i, pt) in cfg.points.iter().enumerate() {
        if !(pt.k_prime > 0.0) {
            return Err(Error::Config(format!(
                "points[{i}].k_prime must be positive for the singular quadrature, got {}",
                pt.k_prime
            )));
        }
        spec.validate_for_pole(cfg.params.effective_momentum(pt.k_prime))
            .map_err(|e| Error::Config(format!("points[{i}]: {e}")))?;
    }

    let mut out = String::from("k_prime,p_x,p_y,q_x,q_y,re_closed,im_closed,pv_part,re_pole,im_pole\n");
    for pt in &cfg.points {
        let closed = kernel_closed(pt.k_prime, pt.p, pt.q, &packet, &cfg.params)?;
        let (pv, pole) = kernel_quadrature(pt.k_prime, pt.p, pt.q, &packet, &cfg.params, &spec)?;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f(pt.k_prime),
            fmt_f(pt.p[0]),
            fmt_f(pt.p[1]),
            fmt_f(pt.q[0]),
            fmt_f(pt.q[1]),
            fmt_f(closed.re),
            fmt_f(closed.im),
            fmt_f(pv),
            fmt_f(pole.re),
            fmt_f(pole.im),
        )
        .expect("string write");
    }
    let path = write_artifact(cli, "kernel_eval.csv", &out)?;
    say(
        cli,
        &format!("kernel-eval: {} point(s) -> {}", cfg.points.len(), path.display()),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// gaussian-solve

#[derive(Debug, Serialize)]
struct GaussianSolveOutput {
    a: f64,
    params: KernelParams,
    xi: Complex64,
    b0: Complex64,
    alpha_plus: f64,
    alpha_minus: f64,
    normalization_alpha: Complex64,
    width_root_plus_unit_rhs: f64,
    width_root_minus_negative_unit_rhs: f64,
}

fn parse_params(coupling: f64, epsilon: f64, variant: &str, yukawa_mass: f64) -> Result<KernelParams> {
    match variant {
        "coulomb" => KernelParams::coulomb(coupling, epsilon),
        "yukawa" => KernelParams::yukawa(coupling, epsilon, yukawa_mass),
        other => Err(Error::InvalidInput(format!(
            "variant must be 'coulomb' or 'yukawa', got '{other}'"
        ))),
    }
}

fn cmd_gaussian_solve(cli: &Cli, args: &GaussianSolveArgs) -> Result<()> {
    let params = parse_params(args.coupling, args.epsilon, &args.variant, args.yukawa_mass)?;
    if args.coupling == 0.0 {
        return Err(Error::InvalidInput(
            "coupling must be nonzero: xi = 0 admits only the trivial solution".into(),
        ));
    }
    if !(args.a > 0.0) {
        return Err(Error::InvalidInput(format!(
            "packet width a must be positive, got {}",
            args.a
        )));
    }
    let packet = normalize(&GaussianPacket::isotropic(args.a, 0.0)?);
    let (alpha_plus, alpha_minus) = alpha_roots(args.a)?;
    let output = GaussianSolveOutput {
        a: args.a,
        params,
        xi: crate::model::xi(&packet, &params)?,
        b0: gaussian_b0(&packet, &params)?,
        alpha_plus,
        alpha_minus,
        normalization_alpha: normalization_alpha(&packet, &params)?,
        width_root_plus_unit_rhs: solve_eq21(RootSign::Plus, 1.0)?,
        width_root_minus_negative_unit_rhs: solve_eq21(RootSign::Minus, -1.0)?,
    };
    let json = serde_json::to_string_pretty(&output)
        .map_err(|e| Error::Config(format!("serialization: {e}")))?;
    let path = write_artifact(cli, "gaussian_solve.json", &format!("{json}\n"))?;
    say(
        cli,
        &format!(
            "gaussian-solve: alpha_plus = {}, |b0| = {} -> {}",
            fmt_f(alpha_plus),
            fmt_f(output.b0.norm()),
            path.display()
        ),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// eq21-root

fn cmd_eq21_root(cli: &Cli, sign: &str, rhs: f64) -> Result<()> {
    let sign: RootSign = sign.parse()?;
    let root = solve_eq21(sign, rhs)?;
    // always printed: downstream tools parse this line
    println!("root = {}", fmt_f(root));
    let _ = cli;
    Ok(())
}

// ---------------------------------------------------------------------------
// fixed-point

#[derive(Debug, Deserialize)]
struct GridConfig {
    k_max: f64,
    points: usize,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
enum InitialStateConfig {
    /// c(k) = (b0_re + i b0_im) e^{-alpha k²}.
    Gaussian {
        b0_re: f64,
        #[serde(default)]
        b0_im: f64,
        alpha: f64,
    },
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
}

fn default_mixing() -> f64 {
    0.5
}
fn default_max_iters() -> usize {
    200
}
fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Deserialize)]
struct FixedPointConfig {
    packet: PacketConfig,
    params: KernelParams,
    grid: GridConfig,
    initial: InitialStateConfig,
    #[serde(default = "default_mixing")]
    mixing: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    #[serde(default = "default_tol")]
    tol: f64,
}

fn cmd_fixed_point(
    cli: &Cli,
    config: &Path,
    mixing_override: Option<f64>,
    max_iters_override: Option<usize>,
) -> Result<()> {
    let cfg: FixedPointConfig = read_config(config)?;
    let packet = cfg.packet.build()?;
    cfg.params
        .validate()
        .map_err(|e| Error::Config(format!("params: {e}")))?;
    if packet.b != [0.0, 0.0] {
        return Err(Error::Config(
            "the radial fixed-point solver requires a drift-free packet (b = [0, 0])".into(),
        ));
    }
    if !(cfg.grid.k_max > 0.0) || cfg.grid.points < 2 {
        return Err(Error::Config(
            "grid needs k_max > 0 and at least 2 points".into(),
        ));
    }
    let mixing = mixing_override.unwrap_or(cfg.mixing);
    let max_iters = max_iters_override.unwrap_or(cfg.max_iters);
    if !(mixing > 0.0 && mixing <= 1.0) {
        return Err(Error::Config(format!("mixing must lie in (0, 1], got {mixing}")));
    }
    if max_iters == 0 || !(cfg.tol > 0.0) {
        return Err(Error::Config("max_iters must be >= 1 and tol > 0".into()));
    }

    let n = cfg.grid.points;
    let grid: Vec<f64> = (1..=n)
        .map(|i| cfg.grid.k_max * i as f64 / n as f64)
        .collect();
    let initial: Vec<Complex64> = match cfg.initial {
        InitialStateConfig::Gaussian { b0_re, b0_im, alpha } => {
            if !(alpha > 0.0) {
                return Err(Error::Config(format!(
                    "initial gaussian width must be positive, got {alpha}"
                )));
            }
            grid.iter()
                .map(|&k| Complex64::new(b0_re, b0_im) * (-alpha * k * k).exp())
                .collect()
        }
        InitialStateConfig::Constant { re, im } => {
            vec![Complex64::new(re, im); grid.len()]
        }
    };

    let trace = fixed_point_iterate(&initial, &grid, &packet, &cfg.params, mixing, max_iters, cfg.tol)?;

    let mut out = String::from("iter,k,re_c,im_c,delta\n");
    for (iter, state) in trace.iterates.iter().enumerate() {
        let delta = if iter == 0 {
            0.0
        } else {
            state
                .iter()
                .zip(&trace.iterates[iter - 1])
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        };
        for (k, c) in trace.radial_grid.iter().zip(state) {
            writeln!(
                out,
                "{iter},{},{},{},{}",
                fmt_f(*k),
                fmt_f(c.re),
                fmt_f(c.im),
                fmt_f(delta)
            )
            .expect("string write");
        }
    }
    let path = write_artifact(cli, "fixed_point_trace.csv", &out)?;
    say(
        cli,
        &format!(
            "fixed-point: {} iteration(s), final delta {} -> {}",
            trace.iterates.len() - 1,
            fmt_f(trace.final_delta),
            path.display()
        ),
    );
    if !trace.converged {
        return Err(Error::Accuracy(format!(
            "fixed-point iteration did not converge within {max_iters} iteration(s); \
             trace written to {}",
            path.display()
        )));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// audit

fn cmd_audit(cli: &Cli, args: &AuditArgs) -> Result<()> {
    let params = KernelParams::coulomb(args.coupling, args.epsilon)?;
    if !(args.a > 0.0) {
        return Err(Error::InvalidInput(format!(
            "packet width a must be positive, got {}",
            args.a
        )));
    }
    let report = audit_consistency(args.a, &params)?;
    let json = serde_json::to_string_pretty(&report)
        .map_err(|e| Error::Config(format!("serialization: {e}")))?;
    let path = write_artifact(cli, "audit.json", &format!("{json}\n"))?;
    say(
        cli,
        &format!(
            "audit: {} route discrepancy(ies) above 1e-6 -> {}",
            report.discrepancies.len(),
            path.display()
        ),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// stability-scan

fn cmd_stability_scan(cli: &Cli, args: &StabilityScanArgs) -> Result<()> {
    let convention: B0Convention = args.convention.parse()?;
    if !(args.a_min > 0.0 && args.a_max > args.a_min) {
        return Err(Error::InvalidInput(format!(
            "scan range requires 0 < a_min < a_max, got [{}, {}]",
            args.a_min, args.a_max
        )));
    }
    if args.count < 2 {
        return Err(Error::InvalidInput("count must be at least 2".into()));
    }
    let scan = scan_stability(args.a_min, args.a_max, args.count, convention)?;
    let mut out = String::from("a,alpha,b0,lambda0,max_lambda,classification\n");
    for row in &scan.rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f(row.a),
            fmt_f(row.alpha),
            fmt_f(row.b0),
            fmt_f(row.lambda0),
            fmt_f(row.max_lambda),
            row.classification
        )
        .expect("string write");
    }
    let footer = serde_json::json!({
        "critical_a": scan.critical_a,
        "convention": args.convention,
    });
    writeln!(out, "# {footer}").expect("string write");
    let path = write_artifact(cli, "stability_scan.csv", &out)?;
    let crit = match scan.critical_a {
        Some(a) => fmt_f(a),
        None => "none".to_string(),
    };
    say(
        cli,
        &format!(
            "stability-scan: {} row(s), critical a = {crit} -> {}",
            scan.rows.len(),
            path.display()
        ),
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// nls-run

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
enum InitialFieldConfig {
    /// ψ = amplitude·e^{-‖x‖²/(2 width²)}.
    Gaussian {
        width: f64,
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// ψ = sech(x); 1-D only.
    Sech,
    /// Binary snapshot produced by a previous run.
    File { path: PathBuf },
}

fn default_amplitude() -> f64 {
    1.0
}

fn default_sample_every() -> usize {
    1
}

#[derive(Debug, Deserialize)]
struct NlsConfig {
    grid: Vec<usize>,
    #[serde(rename = "box")]
    box_lengths: Vec<f64>,
    dt: f64,
    t_final: f64,
    #[serde(default = "default_sample_every")]
    sample_every: usize,
    initial: InitialFieldConfig,
    w: CoefficientField,
    /// When set, the final field is written as nls_final.snap.
    #[serde(default)]
    snapshot: bool,
}

fn build_initial(cfg: &NlsConfig) -> Result<WaveField> {
    match &cfg.initial {
        InitialFieldConfig::Gaussian { width, amplitude } => {
            if !(*width > 0.0) {
                return Err(Error::Config(format!(
                    "initial gaussian width must be positive, got {width}"
                )));
            }
            let (w, amp) = (*width, *amplitude);
            WaveField::from_fn(cfg.grid.clone(), cfg.box_lengths.clone(), 0.0, |x| {
                let d2: f64 = x.iter().map(|v| v * v).sum();
                Complex64::new(amp * (-0.5 * d2 / (w * w)).exp(), 0.0)
            })
        }
        InitialFieldConfig::Sech => {
            if cfg.grid.len() != 1 {
                return Err(Error::Config("sech initial data is 1-D only".into()));
            }
            WaveField::from_fn(cfg.grid.clone(), cfg.box_lengths.clone(), 0.0, |x| {
                Complex64::new(1.0 / x[0].cosh(), 0.0)
            })
        }
        InitialFieldConfig::File { path } => {
            let mut file = fs::File::open(path)
                .map_err(|e| Error::Config(format!("cannot open {}: {e}", path.display())))?;
            let field = nls::read_snapshot(&mut file)?;
            if field.grid_shape != cfg.grid || field.box_lengths != cfg.box_lengths {
                return Err(Error::Config(format!(
                    "snapshot {} does not match the configured grid/box",
                    path.display()
                )));
            }
            Ok(field)
        }
    }
}

fn cmd_nls_run(cli: &Cli, config: &Path, t_final: Option<f64>, dt: Option<f64>) -> Result<()> {
    let cfg: NlsConfig = read_config(config)?;
    let t_final = t_final.unwrap_or(cfg.t_final);
    let dt = dt.unwrap_or(cfg.dt);
    let initial = build_initial(&cfg).map_err(|e| match e {
        Error::InvalidInput(m) => Error::Config(m),
        other => other,
    })?;
    cfg.w
        .validate(&initial)
        .map_err(|e| Error::Config(format!("w: {e}")))?;
    if dt == 0.0 || !dt.is_finite() {
        return Err(Error::Config(format!("dt must be finite and nonzero, got {dt}")));
    }
    let span = t_final - initial.time;
    let n_steps = (span / dt).round();
    if !(n_steps >= 1.0) || ((span - n_steps * dt) / dt).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "dt = {dt} does not evenly divide the horizon {span}"
        )));
    }
    if cfg.sample_every == 0 {
        return Err(Error::Config("sample_every must be >= 1".into()));
    }

    let traj = nls::run(&initial, &cfg.w, t_final, dt, cfg.sample_every, cfg.snapshot)?;
    if traj.step_size_warning {
        eprintln!("warning: dt*max|w|*max|psi|^2 exceeds the splitting heuristic 0.1");
    }

    let mut out = String::from("t,norm,energy\n");
    for (i, (&t, &n)) in traj.times.iter().zip(&traj.norms).enumerate() {
        let e = traj
            .energies
            .as_ref()
            .map_or(String::new(), |es| fmt_f(es[i]));
        writeln!(out, "{},{},{e}", fmt_f(t), fmt_f(n)).expect("string write");
    }
    let path = write_artifact(cli, "nls.csv", &out)?;

    if cfg.snapshot {
        if let Some(fields) = &traj.fields {
            if let Some(last) = fields.last() {
                let snap_path = cli.output_dir.join("nls_final.snap");
                let mut file = fs::File::create(&snap_path)?;
                nls::write_snapshot(last, &mut file)?;
            }
        }
    }

    say(
        cli,
        &format!(
            "nls-run: {} sample(s) to t = {} -> {}",
            traj.times.len(),
            fmt_f(*traj.times.last().unwrap()),
            path.display()
        ),
    );
    // partial trajectory is written before the blow-up is reported
    traj.into_result().map(|_| ())
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "base")]
enum SweepBase {
    /// Stability classification per width; parameter 'a'.
    Stability {
        #[serde(default = "default_convention")]
        convention: String,
    },
    /// Gaussian solution parameters per width; parameter 'a'.
    GaussianSolve { params: KernelParams },
    /// Width-equation root per right-hand side; parameter 'rhs'.
    Eq21Root { sign: String },
}

fn default_convention() -> String {
    "sqrt_pi_over_alpha".to_string()
}

#[derive(Debug, Deserialize)]
struct SweepConfig {
    #[serde(flatten)]
    base: SweepBase,
    parameter: String,
    low: f64,
    high: f64,
    count: usize,
}

fn worker_count(cli: &Cli) -> usize {
    cli.workers
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.parse().ok())
                .filter(|&n| n > 0)
        })
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
        .max(1)
}

fn cmd_sweep(cli: &Cli, config: &Path) -> Result<()> {
    let cfg: SweepConfig = read_config(config)?;
    if !(cfg.low < cfg.high) || !cfg.low.is_finite() || !cfg.high.is_finite() {
        return Err(Error::Config(format!(
            "sweep range requires low < high, got [{}, {}]",
            cfg.low, cfg.high
        )));
    }
    if cfg.count < 1 {
        return Err(Error::Config("sweep needs at least 1 point".into()));
    }
    let expected_param = match cfg.base {
        SweepBase::Stability { .. } | SweepBase::GaussianSolve { .. } => "a",
        SweepBase::Eq21Root { .. } => "rhs",
    };
    if cfg.parameter != expected_param {
        return Err(Error::Config(format!(
            "this base sweeps '{expected_param}', got parameter '{}'",
            cfg.parameter
        )));
    }
    // validate shared inputs up front so failures are per-point numerics only
    let convention: Option<B0Convention> = match &cfg.base {
        SweepBase::Stability { convention } => Some(convention.parse()?),
        _ => None,
    };
    let sign: Option<RootSign> = match &cfg.base {
        SweepBase::Eq21Root { sign } => Some(sign.parse()?),
        _ => None,
    };
    if let SweepBase::GaussianSolve { params } = &cfg.base {
        params
            .validate()
            .map_err(|e| Error::Config(format!("params: {e}")))?;
        if params.coupling == 0.0 {
            return Err(Error::Config("sweep requires a nonzero coupling".into()));
        }
    }

    let values: Vec<f64> = (0..cfg.count)
        .map(|i| {
            if cfg.count == 1 {
                cfg.low
            } else {
                cfg.low + (cfg.high - cfg.low) * i as f64 / (cfg.count - 1) as f64
            }
        })
        .collect();

    let header = match cfg.base {
        SweepBase::Stability { .. } => "a,alpha,b0,lambda0,max_lambda,classification,status",
        SweepBase::GaussianSolve { .. } => {
            "a,alpha_plus,alpha_minus,re_b0,im_b0,re_norm_alpha,im_norm_alpha,status"
        }
        SweepBase::Eq21Root { .. } => "rhs,root,status",
    };

    let point_row = |&value: &f64| -> String {
        let result: Result<String> = (|| match &cfg.base {
            SweepBase::Stability { .. } => {
                if !(value > 0.0) {
                    return Err(Error::Domain(format!("a must be positive, got {value}")));
                }
                let convention = convention.unwrap();
                let (alpha, _) = alpha_roots(value)?;
                let b0 = convention.b0(alpha);
                let lambda0 = crate::stability::lyapunov_closed(0.0, value, alpha, b0)?;
                let mut max_lambda = lambda0;
                let mut k = 0.25;
                while k <= 4.0 {
                    max_lambda =
                        max_lambda.max(crate::stability::lyapunov_closed(k, value, alpha, b0)?);
                    k += 0.25;
                }
                let class = crate::stability::classify(max_lambda)?;
                Ok(format!(
                    "{},{},{},{},{class}",
                    fmt_f(alpha),
                    fmt_f(b0),
                    fmt_f(lambda0),
                    fmt_f(max_lambda)
                ))
            }
            SweepBase::GaussianSolve { params } => {
                if !(value > 0.0) {
                    return Err(Error::Domain(format!("a must be positive, got {value}")));
                }
                let packet = normalize(&GaussianPacket::isotropic(value, 0.0)?);
                let (alpha_plus, alpha_minus) = alpha_roots(value)?;
                let b0 = gaussian_b0(&packet, params)?;
                let na = normalization_alpha(&packet, params)?;
                Ok(format!(
                    "{},{},{},{},{},{}",
                    fmt_f(alpha_plus),
                    fmt_f(alpha_minus),
                    fmt_f(b0.re),
                    fmt_f(b0.im),
                    fmt_f(na.re),
                    fmt_f(na.im)
                ))
            }
            SweepBase::Eq21Root { .. } => {
                let root = solve_eq21(sign.unwrap(), value)?;
                Ok(fmt_f(root))
            }
        })();
        match result {
            Ok(fields) => format!("{},{fields},ok", fmt_f(value)),
            Err(e) => {
                let blanks = header.matches(',').count() - 1;
                let pad = ",".repeat(blanks);
                let msg = e.to_string().replace([',', '\n'], ";");
                format!("{}{pad},failed: {msg}", fmt_f(value))
            }
        }
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(cli))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    // values are pre-sorted; par_iter().map().collect() preserves order, so
    // the merged CSV is independent of scheduling
    let rows: Vec<String> = pool.install(|| values.par_iter().map(point_row).collect());

    let failed = rows.iter().filter(|r| r.contains(",failed: ")).count();
    let mut out = String::from(header);
    out.push('\n');
    for row in &rows {
        out.push_str(row);
        out.push('\n');
    }
    let path = write_artifact(cli, "sweep.csv", &out)?;
    say(
        cli,
        &format!(
            "sweep: {} point(s), {failed} failed -> {}",
            rows.len(),
            path.display()
        ),
    );
    if failed > 0 {
        return Err(Error::Accuracy(format!(
            "{failed} sweep point(s) failed; see {}",
            path.display()
        )));
    }
    Ok(())
}
