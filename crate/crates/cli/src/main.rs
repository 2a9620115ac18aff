mod format;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cspoly::critical::{all_critical_points, SolverConfig};
use cspoly::genericity::{
    bounds_report, certify_1d, genericity_report, random_instance, GenericityTols,
};
use cspoly::selections::{enumerate_selections_1d, Selection, SelectionSpec, DEFAULT_CAP};
use cspoly::slope_bounds::{
    coercivity_check, coercivity_sweep, default_infinity_radii, default_loja_radii,
    error_bound_check, goodness_at_infinity, verify_loja, ErrorBoundForm, Grid1D, LojaOptions,
    LojaVerdict, DEFAULT_SAMPLES,
};
use cspoly::{CspError, Instance};
use serde::Serialize;

use format::{emit, read_instance, to_json, Envelope, InstanceFile};

#[derive(Parser)]
#[command(
    name = "cspoly",
    version,
    about = "Continuous selections of polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Instance file (JSON).
    #[arg(long)]
    instance: PathBuf,
    /// Report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Sel {
    /// max | min | index:i | maxmin:<expr> | piecewise1d:l0,l1,...
    #[arg(long, default_value = "max")]
    selection: SelectionSpec,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all continuous selections (n = 1).
    Selections {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Critical points of all selections.
    Critical {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Genericity audit of the critical catalog.
    Genericity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, default_value_t = 1e-8)]
        strict_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        value_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        affine_tol: f64,
        /// Exit with status 1 when the audit fails.
        #[arg(long)]
        strict: bool,
    },
    /// Closed-form bounds B0(n,d,r), N(n,d,l) and L(n,d,r).
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        l: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled Łojasiewicz ratios around a zero of the selection.
    Loja {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Sel,
        /// Comma-separated coordinates.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        center: Vec<f64>,
        /// Comma-separated, strictly decreasing.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-7)]
        tol_active: f64,
        /// Overrides 1 - 1/L(n,d,r).
        #[arg(long)]
        exponent: Option<f64>,
        #[arg(long)]
        strict: bool,
    },
    /// Error-bound ratio over a grid outside the sublevel set (n = 1).
    Errorbound {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Sel,
        /// Defaults to 1/L(n,d,r).
        #[arg(long)]
        alpha: Option<f64>,
        /// lo,hi,step
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            default_value = "-3,3,0.01"
        )]
        grid: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Form::Local)]
        form: Form,
        #[arg(long)]
        strict: bool,
    },
    /// Coercivity and boundedness from below.
    Coercivity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Sel,
        /// Radial sweep even when an exact answer is available.
        #[arg(long)]
        empirical: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        strict: bool,
    },
    /// Minimum sampled slope on growing shells.
    Infinity {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sel: Sel,
        /// Comma-separated, strictly increasing.
        #[arg(long, value_delimiter = ',')]
        radii: Option<Vec<f64>>,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-7)]
        tol_active: f64,
        #[arg(long)]
        strict: bool,
    },
    /// Write a seeded random instance file.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-7)]
    tol_active: f64,
    #[arg(long, default_value_t = 1e-11)]
    newton_tol: f64,
    /// Newton start points per axis.
    #[arg(long, default_value_t = 21)]
    seed_grid: usize,
    /// Half-width of the start box.
    #[arg(long, default_value_t = 8.0)]
    search_box: f64,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            seed_grid: self.seed_grid,
            search_box: self.search_box,
            newton_tol: self.newton_tol,
            tol_active: self.tol_active,
            seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Local,
    Global,
}

enum Failure {
    Usage(String),
    Verdict,
}

impl From<CspError> for Failure {
    fn from(e: CspError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<String> for Failure {
    fn from(e: String) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<(), Failure>;

fn report<T: Serialize>(
    command: &str,
    instance: Option<&Instance>,
    seed: Option<u64>,
    payload: T,
    out: Option<&PathBuf>,
) -> Result<(), Failure> {
    let text = to_json(&Envelope::new(command, instance, seed, payload));
    emit(&text, out.map(PathBuf::as_path))?;
    Ok(())
}

fn verdict(strict: bool, passed: bool) -> Outcome {
    if strict && !passed {
        Err(Failure::Verdict)
    } else {
        Ok(())
    }
}

#[derive(Serialize)]
struct GenericityPayload {
    report: cspoly::GenericityReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<cspoly::genericity::Certificate1D>,
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Selections { common, cap } => {
            let inst = read_instance(&common.instance)?;
            if inst.n() != 1 {
                return Err(Failure::Usage("exact enumeration requires n=1".into()));
            }
            let e = enumerate_selections_1d(&inst, cap)?;
            report("selections", Some(&inst), None, e, common.out.as_ref())
        }
        Command::Critical { common, solver } => {
            let inst = read_instance(&common.instance)?;
            let cfg = solver.config();
            let cat = all_critical_points(&inst, &cfg)?;
            report(
                "critical",
                Some(&inst),
                Some(cfg.seed),
                cat,
                common.out.as_ref(),
            )
        }
        Command::Genericity {
            common,
            solver,
            strict_tol,
            value_tol,
            affine_tol,
            strict,
        } => {
            let inst = read_instance(&common.instance)?;
            let cfg = solver.config();
            let cat = all_critical_points(&inst, &cfg)?;
            let tols = GenericityTols {
                strict_tol,
                value_tol,
                affine_tol,
            };
            let rep = genericity_report(&inst, &cat, &tols);
            let passed = rep.overall;
            let certificate = if inst.n() == 1 {
                Some(certify_1d(&inst)?)
            } else {
                None
            };
            let payload = GenericityPayload {
                report: rep,
                certificate,
            };
            report(
                "genericity",
                Some(&inst),
                Some(cfg.seed),
                payload,
                common.out.as_ref(),
            )?;
            verdict(strict, passed)
        }
        Command::Bounds { n, d, r, l, out } => {
            let b = bounds_report(n, d, r, l)?;
            report("bounds", None, None, b, out.as_ref())
        }
        Command::Loja {
            common,
            sel,
            center,
            radii,
            samples,
            seed,
            tol_active,
            exponent,
            strict,
        } => {
            let inst = read_instance(&common.instance)?;
            let selection = Selection::resolve(&sel.selection, &inst)?;
            let center = if center.is_empty() {
                vec![0.0; inst.n()]
            } else {
                center
            };
            let opts = LojaOptions {
                radii: radii.unwrap_or_else(default_loja_radii),
                samples,
                seed,
                tol_active,
                exponent,
            };
            let rep = verify_loja(&inst, &selection, &center, &opts)?;
            let passed = rep.verdict == LojaVerdict::PositiveBoundedBelow;
            report("loja", Some(&inst), Some(seed), rep, common.out.as_ref())?;
            verdict(strict, passed)
        }
        Command::Errorbound {
            common,
            sel,
            alpha,
            grid,
            form,
            strict,
        } => {
            let inst = read_instance(&common.instance)?;
            let [lo, hi, step] = grid[..] else {
                return Err(Failure::Usage("--grid expects lo,hi,step".into()));
            };
            let selection = Selection::resolve(&sel.selection, &inst)?;
            let form = match form {
                Form::Local => ErrorBoundForm::Local,
                Form::Global => ErrorBoundForm::Global,
            };
            let rep = error_bound_check(&inst, &selection, alpha, Grid1D { lo, hi, step }, form)?;
            let passed = rep.positive;
            report("errorbound", Some(&inst), None, rep, common.out.as_ref())?;
            verdict(strict, passed)
        }
        Command::Coercivity {
            common,
            sel,
            empirical,
            seed,
            strict,
        } => {
            let inst = read_instance(&common.instance)?;
            let selection = Selection::resolve(&sel.selection, &inst)?;
            let v = if empirical {
                coercivity_sweep(&inst, &selection, seed)?
            } else {
                coercivity_check(&inst, &selection, seed)?
            };
            let passed = v.coercive;
            report(
                "coercivity",
                Some(&inst),
                Some(seed),
                v,
                common.out.as_ref(),
            )?;
            verdict(strict, passed)
        }
        Command::Infinity {
            common,
            sel,
            radii,
            samples,
            seed,
            tol_active,
            strict,
        } => {
            let inst = read_instance(&common.instance)?;
            let selection = Selection::resolve(&sel.selection, &inst)?;
            let radii = radii.unwrap_or_else(default_infinity_radii);
            let rep = goodness_at_infinity(&inst, &selection, &radii, samples, seed, tol_active)?;
            let passed = rep.good_at_infinity;
            report(
                "infinity",
                Some(&inst),
                Some(seed),
                rep,
                common.out.as_ref(),
            )?;
            verdict(strict, passed)
        }
        Command::Random { n, d, r, seed, out } => {
            let inst = random_instance(n, d, r, seed)?;
            emit(&to_json(&InstanceFile::canonical(&inst)), out.as_deref())?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
