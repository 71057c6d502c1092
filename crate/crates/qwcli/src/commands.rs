//! The six CLI verbs.

use std::io::Write as _;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qbessel_core::qtransform::{fourier_fast, fourier_qv};
use qbessel_core::qwavelet::{cwt_cell, cwt_fast, make_wavelet_from_fourier, recommended_scales, reconstruct};
use qbessel_core::{LatticeFn, QGrid, TransformPlan, Wavelet};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::Settings;
use crate::csvio::{
    fmt_real, format_lattice_fn, format_scalogram, format_wavelet_spec, read_lattice_fn, read_scalogram,
    read_wavelet_spec, write_atomic, Provenance,
};
use crate::error::{CliError, CliResult};
use crate::verify::{run_suite, wavelet_spec, Shape};

/// Largest condition-scaled deviation `--check` tolerates.
pub const CHECK_TOL: f64 = 1e-8;

/// `LO:HI` inclusive index range.
pub fn parse_range(s: &str) -> Result<RangeInclusive<i32>, String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got `{s}`"))?;
    let lo: i32 = lo.trim().parse().map_err(|_| format!("bad range start `{lo}`"))?;
    let hi: i32 = hi.trim().parse().map_err(|_| format!("bad range end `{hi}`"))?;
    if hi < lo {
        return Err(format!("empty range {lo}:{hi}"));
    }
    Ok(lo..=hi)
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Output file; standard output when omitted.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FourierArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input signal (`n,x,value` CSV).
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Use the separable fast evaluation instead of the direct sum.
    #[arg(long)]
    pub fast: bool,
}

#[derive(Debug, Clone, Args)]
pub struct CwtArgs {
    #[command(flatten)]
    pub common: Common,
    /// Input signal (`n,x,value` CSV).
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// Fourier-domain wavelet spec (`k,value` CSV).
    #[arg(long, value_name = "PATH")]
    pub wavelet: PathBuf,
    /// Scale indices `LO:HI`; defaults to the wavelet's recommended scales.
    #[arg(long, value_name = "LO:HI", value_parser = parse_range, allow_hyphen_values = true)]
    pub ka: Option<RangeInclusive<i32>>,
    /// Position indices `LO:HI`; defaults to the whole window.
    #[arg(long, value_name = "LO:HI", value_parser = parse_range, allow_hyphen_values = true)]
    pub kb: Option<RangeInclusive<i32>>,
    /// Recompute 1% of the cells by the direct path.
    #[arg(long)]
    pub check: bool,
    /// Seed for choosing the checked cells; overrides the config.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReconstructArgs {
    #[command(flatten)]
    pub common: Common,
    /// Scalogram CSV written by `cwt`.
    #[arg(long = "in", value_name = "PATH")]
    pub input: PathBuf,
    /// The wavelet spec the scalogram was computed with.
    #[arg(long, value_name = "PATH")]
    pub wavelet: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    /// JSON configuration file.
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    /// Report path; overrides `report_path` from the config.
    #[arg(long, value_name = "PATH", alias = "report")]
    pub out: Option<PathBuf>,
    /// Seed for the randomized checks; overrides the config.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Accepted for uniformity; verify always checks.
    #[arg(long, hide = true)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ShapeArg {
    Bump,
    Ramp,
}

#[derive(Debug, Clone, Args)]
pub struct WaveletGenArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "bump")]
    pub shape: ShapeArg,
    /// First Fourier index carrying height.
    #[arg(long, allow_hyphen_values = true)]
    pub k0: i32,
    /// Last Fourier index carrying height.
    #[arg(long, allow_hyphen_values = true)]
    pub k1: i32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LatticeValues {
    /// All ones.
    Ones,
    /// Jackson mass `(1-q) x^{2|v|+2}` of each point.
    Weight,
    /// The normalized kernel at `x = q^n`.
    Kernel,
}

#[derive(Debug, Clone, Args)]
pub struct LatticeArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "ones")]
    pub values: LatticeValues,
}

fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_atomic(path, contents.as_bytes()),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

/// The grid the transforms sum over, honoring `nonnegative_only`.
fn summation_grid(settings: &Settings) -> QGrid {
    settings.grid.clone().with_domain(settings.domain())
}

fn plan_for(settings: &Settings) -> CliResult<TransformPlan> {
    Ok(TransformPlan::with_tol(
        &summation_grid(settings),
        settings.v,
        settings.config.series_tol,
    )?)
}

fn load_wavelet(path: &Path, plan: &TransformPlan) -> CliResult<Wavelet> {
    let spec = read_wavelet_spec(path)?;
    Ok(make_wavelet_from_fourier(&spec, plan)?)
}

fn check_range(name: &str, range: &RangeInclusive<i32>, grid: &QGrid) -> CliResult<()> {
    if grid.contains(*range.start()) && grid.contains(*range.end()) {
        Ok(())
    } else {
        Err(CliError::Validation(format!(
            "{name} range {}:{} leaves the window [{}, {}]",
            range.start(),
            range.end(),
            grid.n_min(),
            grid.n_max()
        )))
    }
}

pub fn cmd_fourier(args: &FourierArgs) -> CliResult<()> {
    let settings = Settings::load(&args.common.config)?;
    let plan = plan_for(&settings)?;
    let f = read_lattice_fn(&args.input, plan.grid())?;
    let result = if args.fast {
        fourier_fast(&f, &plan)?
    } else {
        fourier_qv(&f, &plan)?
    };
    if result.warning_count() > 0 {
        eprintln!(
            "warning: {} outputs touched cancellation-flagged kernel values",
            result.warning_count()
        );
    }
    let prov =
        Provenance::new("fourier", plan.grid(), plan.v()).with("method", if args.fast { "fast" } else { "direct" });
    emit(args.common.out.as_deref(), &format_lattice_fn(&result.output, &prov))
}

pub fn cmd_cwt(args: &CwtArgs) -> CliResult<()> {
    let settings = Settings::load(&args.common.config)?;
    let plan = plan_for(&settings)?;
    let grid = plan.grid();
    let f = read_lattice_fn(&args.input, grid)?;
    let w = load_wavelet(&args.wavelet, &plan)?;
    let ka = match &args.ka {
        Some(r) => r.clone(),
        None => recommended_scales(&w, &plan).ok_or_else(|| {
            CliError::Validation("wavelet has no Fourier support inside the safe core; pass --ka".into())
        })?,
    };
    let kb = args.kb.clone().unwrap_or_else(|| grid.indices());
    check_range("ka", &ka, grid)?;
    check_range("kb", &kb, grid)?;
    let s = cwt_fast(&f, &w, ka.clone(), kb.clone(), &plan)?;
    if s.warnings > 0 {
        eprintln!("warning: {} cells touched flagged kernel values", s.warnings);
    }

    if args.check {
        let cells = s.coeffs.len();
        let count = cells.div_ceil(100).max(1);
        let seed = args.seed.unwrap_or(settings.config.seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut picked = sample(&mut rng, cells, count).into_vec();
        picked.sort_unstable();
        let cols = s.cols();
        let mut worst = 0.0f64;
        for i in picked {
            let a = ka.start() + (i / cols) as i32;
            let b = kb.start() + (i % cols) as i32;
            let (direct, scale) = cwt_cell(&f, &w, a, b, &plan)?;
            let dev = if scale > 0.0 {
                (s.coeffs[i] - direct).abs() / scale
            } else {
                (s.coeffs[i] - direct).abs()
            };
            worst = worst.max(dev);
        }
        eprintln!("check: {count} of {cells} cells recomputed directly, max deviation {worst:.3e}");
        if !(worst <= CHECK_TOL) {
            return Err(CliError::Failure(format!(
                "cross-check deviation {worst:.3e} exceeds {CHECK_TOL:e}"
            )));
        }
    }

    let (lo, hi) = w.spec_support().unwrap_or((0, -1));
    let prov = Provenance::new("scalogram", grid, plan.v())
        .with("wavelet_support", format!("{lo},{hi}"))
        .with("admissibility", fmt_real(w.c_admis));
    emit(args.common.out.as_deref(), &format_scalogram(&s, &prov))
}

pub fn cmd_reconstruct(args: &ReconstructArgs) -> CliResult<()> {
    let settings = Settings::load(&args.common.config)?;
    let plan = plan_for(&settings)?;
    let s = read_scalogram(&args.input)?;
    if !s.matches_plan(&plan) {
        return Err(CliError::Validation(format!(
            "{}: scalogram was computed for q={}, alpha={}, n={}, window [{}, {}], not the configured setup",
            args.input.display(),
            s.q,
            s.alpha,
            s.n_index,
            s.n_min,
            s.n_max
        )));
    }
    check_range("ka", &s.ka_range(), plan.grid())?;
    check_range("kb", &s.kb_range(), plan.grid())?;
    let w = load_wavelet(&args.wavelet, &plan)?;
    let rec = reconstruct(&s, &w, &plan)?;
    if rec.coverage_warning {
        eprintln!("warning: the scale range does not cover the wavelet's Fourier support");
    }
    let prov = Provenance::new("reconstruction", plan.grid(), plan.v());
    emit(args.common.out.as_deref(), &format_lattice_fn(&rec.output, &prov))
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let mut settings = Settings::load(&args.config)?;
    if let Some(seed) = args.seed {
        settings.config.seed = seed;
    }
    let path = args.out.clone().unwrap_or_else(|| settings.report_path.clone());
    let report = run_suite(&settings)?;
    write_atomic(&path, report.to_json().as_bytes())?;
    for r in &report.records {
        let status = match (r.pass, r.expected_fail) {
            (true, false) => "pass",
            (false, true) => "expected-fail",
            (false, false) => "FAIL",
            (true, true) => "UNEXPECTED-PASS",
        };
        eprintln!(
            "[{:>2}] {:<32} {:>10.3e} / {:.0e}  {status}",
            r.criterion, r.name, r.residual, r.tolerance
        );
    }
    if report.pass {
        Ok(())
    } else {
        let bad: Vec<&str> = report
            .records
            .iter()
            .filter(|r| !r.as_expected())
            .map(|r| r.name.as_str())
            .collect();
        Err(CliError::Failure(format!(
            "identities not confirmed: {}",
            bad.join(", ")
        )))
    }
}

pub fn cmd_wavelet_gen(args: &WaveletGenArgs) -> CliResult<()> {
    let settings = Settings::load(&args.common.config)?;
    let plan = plan_for(&settings)?;
    let shape = match args.shape {
        ShapeArg::Bump => Shape::Bump,
        ShapeArg::Ramp => Shape::Ramp,
    };
    let spec = wavelet_spec(shape, args.k0, args.k1)?;
    check_range("wavelet", &(args.k0..=args.k1), plan.grid())?;
    let w = make_wavelet_from_fourier(&spec, &plan)?;
    eprintln!("admissibility C = {}", fmt_real(w.c_admis));
    let shape_name = match args.shape {
        ShapeArg::Bump => "bump",
        ShapeArg::Ramp => "ramp",
    };
    let prov = Provenance::new("wavelet", plan.grid(), plan.v())
        .with("shape", shape_name)
        .with("admissibility", fmt_real(w.c_admis));
    emit(args.common.out.as_deref(), &format_wavelet_spec(&spec, &prov))
}

pub fn cmd_lattice(args: &LatticeArgs) -> CliResult<()> {
    let settings = Settings::load(&args.common.config)?;
    let grid = summation_grid(&settings);
    let f = match args.values {
        LatticeValues::Ones => LatticeFn::from_fn(&grid, |_, _| 1.0)?,
        LatticeValues::Weight => {
            let weights = grid.jackson_weights(2.0 * settings.v.abs_v() + 1.0);
            LatticeFn::new(grid.clone(), weights)?
        }
        LatticeValues::Kernel => {
            let plan = plan_for(&settings)?;
            LatticeFn::from_fn(&grid, |k, _| plan.j(k))?
        }
    };
    let name = match args.values {
        LatticeValues::Ones => "ones",
        LatticeValues::Weight => "weight",
        LatticeValues::Kernel => "kernel",
    };
    let prov = Provenance::new("lattice", &grid, &settings.v).with("values", name);
    emit(args.common.out.as_deref(), &format_lattice_fn(&f, &prov))
}
