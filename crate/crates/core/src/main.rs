//! Command-line driver for the BRMDD LSD simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use brmdd::ensemble::{drive_frequency, ModelParams};
use brmdd::experiments::{
    self, write_outputs,HistogramConfig, PointConfig, ReferenceConfig, SweepConfig,
};
use brmdd::fitting::ContourParams;
use brmdd::spectral::field_free_reference;
use brmdd::tssil::{self, Regime, TssilParams};
use brmdd::{Error, Real, Result};

#[derive(Parser)]
#[command(
    name = "brmdd",
    version,
    about = "Local spectral density statistics for a periodically driven band random \
             matrix with disordered diagonal (hbar = 1: energies and quasienergies \
             share units, and the mean quasienergy spacing equals delta)"
)]
struct Cli {
    /// Worker threads; RAYON_NUM_THREADS is honored when absent.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single ensemble point and print its summary.
    Point(PointArgs),
    /// Field-free reference (Gamma_0, xi_0) over a list of couplings.
    Fieldfree(FieldfreeArgs),
    /// Run a sweep described by a JSON config file.
    Sweep(SweepArgs),
    /// Evaluate the analytic driven two-state contours.
    Tssil(TssilArgs),
    /// Run the built-in oracle and invariant checks.
    Selftest,
}

#[derive(Args)]
struct ModelArgs {
    /// Number of band states N (odd).
    #[arg(long, short = 'n')]
    n: usize,
    /// Mean level spacing.
    #[arg(long, default_value_t = 1.0)]
    delta: Real,
    /// RMS coupling strength v.
    #[arg(long, short = 'v')]
    v: Real,
    /// Band halfwidth b; defaults to K = (N-1)/2.
    #[arg(long)]
    band: Option<usize>,
    /// Time pieces per drive period.
    #[arg(long, default_value_t = 32)]
    pieces: usize,
    /// Drive frequency factor C_f (omega_f = C_f * N * delta).
    #[arg(long, default_value_t = 10.0)]
    drive_factor: Real,
    /// Master seed.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Disorder realizations.
    #[arg(long, default_value_t = 256)]
    realizations: usize,
}

impl ModelArgs {
    fn params(&self, rabi: Real) -> ModelParams {
        ModelParams {
            n_states: self.n,
            delta: self.delta,
            v_rms: self.v,
            band: self.band.unwrap_or((self.n.max(3) - 1) / 2),
            rabi,
            pieces: self.pieces,
            drive_factor: self.drive_factor,
            seed: self.seed,
            realizations: self.realizations,
        }
    }
}

#[derive(Args)]
struct PointArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Rabi frequency Omega.
    #[arg(long, default_value_t = 0.0)]
    rabi: Real,
    /// Histogram bins for the driven LSD.
    #[arg(long)]
    bins: Option<usize>,
    /// Histogram half-span for the driven LSD.
    #[arg(long)]
    span: Option<Real>,
    /// Write results.csv and lsd_000.csv into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FieldfreeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Extra couplings to scan (comma separated), in addition to -v.
    #[arg(long, value_delimiter = ',')]
    v_list: Vec<Real>,
    /// Reference histogram bins.
    #[arg(long)]
    bins: Option<usize>,
    /// Reference histogram half-span.
    #[arg(long)]
    span: Option<Real>,
    /// Search the coupling that yields this Gamma_0 / Delta_omega, then scan it.
    #[arg(long)]
    tune_gamma0: Option<Real>,
}

#[derive(Args)]
struct SweepArgs {
    /// JSON sweep configuration (or a manifest from a previous run).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides the config's out_dir (default "out").
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the realization count.
    #[arg(long)]
    realizations: Option<usize>,
    /// Override the histogram bin count.
    #[arg(long)]
    bins: Option<usize>,
    /// Override the histogram half-span.
    #[arg(long)]
    span: Option<Real>,
}

#[derive(Args)]
struct TssilArgs {
    /// Loss width Gamma_0.
    #[arg(long)]
    gamma0: Real,
    /// Rabi frequency Omega.
    #[arg(long)]
    rabi: Real,
    /// Half-extent of the tabulation grid; defaults to the 99.9% mass span.
    #[arg(long)]
    grid_max: Option<Real>,
    /// Grid points.
    #[arg(long, default_value_t = 401)]
    grid_points: usize,
    /// Write the curve table here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error[config]: could not configure {threads} threads: {err}");
            return ExitCode::from(2);
        }
    }
    let outcome = match cli.command {
        Command::Point(args) => run_point_cmd(args),
        Command::Fieldfree(args) => run_fieldfree_cmd(args),
        Command::Sweep(args) => run_sweep_cmd(args),
        Command::Tssil(args) => run_tssil_cmd(args),
        Command::Selftest => return selftest(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let category = match &err {
                Error::InvalidParameter(_) => "parameter",
                Error::Config(_) => "config",
                Error::Regime(_) => "regime",
                Error::Numeric(_) => "numeric",
                Error::SpanTooSmall { .. } => "span",
                Error::EmptyAccumulator | Error::InsufficientData(_) => "data",
                Error::WindowExhausted { .. } => "window",
                Error::Io(_) => "io",
            };
            eprintln!("error[{category}]: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run_point_cmd(args: PointArgs) -> Result<()> {
    let mut cfg = PointConfig::new(args.model.params(args.rabi));
    if let Some(bins) = args.bins {
        cfg.histogram.bins = bins;
    }
    cfg.histogram.span = args.span;
    let result = experiments::run_point(&cfg)?;

    let drive = drive_frequency(&result.params)?;
    println!("# ensemble point (hbar = 1)");
    println!(
        "n_states = {}  delta = {}  v_rms = {}  band = {}  rabi = {}",
        result.params.n_states,
        result.params.delta,
        result.params.v_rms,
        result.params.band,
        result.params.rabi
    );
    println!(
        "omega_f = {:.6}  T_f = {:.6e}  pieces = {}  realizations = {}  seed = {}",
        drive.omega_f, drive.period, result.params.pieces, result.params.realizations,
        result.params.seed
    );
    println!(
        "gamma0 = {:.6}  xi0 = {:.4}  delta_omega = {}  reference {}",
        result.gamma0,
        result.xi0,
        result.delta_omega,
        if result.reference_resolved {
            "fitted"
        } else {
            "unresolved (upper bound, perturbative fallback)"
        }
    );
    println!(
        "gamma = {:.6}  xi = {:.4}  L = gamma/delta_omega = {:.4}",
        result.gamma, result.xi, result.loc_length
    );
    match &result.fit {
        Some(fit) => println!(
            "fit: {} params {:?} amplitude {:.4} residual {:.4} converged {}",
            fit.params.kind().label(),
            fit.params,
            fit.amplitude,
            fit.residual,
            fit.converged
        ),
        None => println!("fit: none (delta-like spectrum)"),
    }
    println!(
        "span = {:.4}  bins = {}  overflow = {:.3e}  moderate_width = {}  wall = {:.2}s",
        result.span, result.bins, result.overflow_fraction, result.moderate_width,
        result.wall_seconds
    );

    if let Some(dir) = args.out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(
            dir.join("results.csv"),
            experiments::results_csv(std::slice::from_ref(&result)),
        )?;
        std::fs::write(dir.join("lsd_000.csv"), experiments::lsd_csv(&result))?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}

fn run_fieldfree_cmd(args: FieldfreeArgs) -> Result<()> {
    let mut couplings = vec![args.model.v];
    couplings.extend(args.v_list.iter().copied());

    if let Some(target_ratio) = args.tune_gamma0 {
        let base = args.model.params(0.0);
        let target = target_ratio * base.delta_omega();
        let (v, reference) = experiments::find_v_for_gamma0(&base, target, 6)?;
        println!(
            "# tuned v = {v:.6} gives gamma0 = {:.4} (target {target:.4}), xi0 = {:.3}",
            reference.gamma0, reference.xi0
        );
        couplings.push(v);
    }

    println!("v_rms,gamma0,xi0,delta_omega,residual,resolved,golden_rule");
    for v in couplings {
        let mut params = args.model.params(0.0);
        params.v_rms = v;
        let reference = field_free_reference(&params, args.bins, args.span)?;
        println!(
            "{},{},{},{},{},{},{}",
            v,
            reference.gamma0,
            reference.xi0,
            reference.delta_omega,
            reference.fit_residual,
            reference.resolved,
            brmdd::spectral::golden_rule_gamma0(&params)
        );
    }
    Ok(())
}

fn run_sweep_cmd(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.config)?;
    // Accept either a sweep config or a manifest from a previous run.
    let mut config: SweepConfig = match serde_json::from_str::<SweepConfig>(&text) {
        Ok(cfg) => cfg,
        Err(config_err) => match serde_json::from_str::<experiments::RunManifest>(&text) {
            Ok(manifest) => manifest.config,
            Err(_) => {
                return Err(Error::Config(format!(
                    "{} is neither a sweep config nor a manifest: {config_err}",
                    args.config.display()
                )))
            }
        },
    };
    if let Some(seed) = args.seed {
        config.base.params.seed = seed;
    }
    if let Some(realizations) = args.realizations {
        config.base.params.realizations = realizations;
    }
    if let Some(bins) = args.bins {
        config.base.histogram.bins = bins;
    }
    if let Some(span) = args.span {
        config.base.histogram = HistogramConfig {
            bins: config.base.histogram.bins,
            span: Some(span),
        };
    }
    config.base.reference = ReferenceConfig {
        bins: config.base.reference.bins,
        span: config.base.reference.span,
    };

    let out_dir = args
        .out
        .or_else(|| config.out_dir.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));

    let result = experiments::run_sweep(&config)?;
    let written = write_outputs(&result, &out_dir)?;
    println!(
        "# sweep finished: {} points, {} files in {}",
        result.points.len(),
        written.len(),
        out_dir.display()
    );
    for p in &result.points {
        println!(
            "rabi={:.5} v={:.4} N={}: gamma0={:.4} gamma={:.5} L={:.4} xi0={:.3} xi={:.3} \
             fit={} overflow={:.2e}",
            p.params.rabi,
            p.params.v_rms,
            p.params.n_states,
            p.gamma0,
            p.gamma,
            p.loc_length,
            p.xi0,
            p.xi,
            p.fit.as_ref().map_or("none", |f| f.params.kind().label()),
            p.overflow_fraction
        );
    }
    let analysis = &result.analysis;
    if let Some(law) = &analysis.perturbative_linear {
        println!(
            "perturbative linear law: gamma = {:.4} * rabi^{:.4} (r^2 = {:.4})",
            law.coefficient, law.exponent, law.r_squared
        );
    }
    if let Some(coeff) = &analysis.weak_field_coefficient {
        println!(
            "weak-field coefficient A = {:.4} over {} points",
            coeff.mean,
            coeff.values.len()
        );
    }
    if let Some(law) = &analysis.quadratic_slope {
        println!(
            "large-L slope: gamma ~ rabi^{:.4} (r^2 = {:.4})",
            law.exponent, law.r_squared
        );
    }
    if let Some(law) = &analysis.ipr_law {
        println!(
            "ipr law: xi/xi0 = {:.4} * (rabi/gamma0)^{:.4} (r^2 = {:.4})",
            law.coefficient, law.exponent, law.r_squared
        );
    }
    for row in &analysis.strong_field {
        println!(
            "strong field 2R/G0={:.3}: gamma/gamma0={:.4} model={:.4} factor={:.3}{}",
            row.field_ratio,
            row.gamma_over_gamma0,
            row.model_over_gamma0,
            row.factor,
            if row.perturbative { " (perturbative)" } else { "" }
        );
    }
    Ok(())
}

fn run_tssil_cmd(args: TssilArgs) -> Result<()> {
    let p = TssilParams::new(args.gamma0, args.rabi)?;
    println!(
        "# gamma0 = {}, rabi = {}, 2*rabi/gamma0 = {:.6} ({} regime)",
        p.gamma0,
        p.rabi,
        p.ratio(),
        match p.regime() {
            Regime::Weak => "weak",
            Regime::Strong => "strong",
        }
    );
    let shape = match p.regime() {
        Regime::Weak => {
            let (a1, a2) = tssil::weak_coefficients(&p)?;
            println!("a1 = {a1:.10}");
            println!("a2 = {a2:.10}");
            ContourParams::WeakField { a1, a2 }
        }
        Regime::Strong => {
            let (d1, d2) = tssil::strong_coefficients(&p)?;
            println!("d1 = {d1:.10}");
            println!("d2 = {d2:.10}");
            println!(
                "peak positions = +/-{:.10}",
                tssil::strong_peak_position(d1, d2)
            );
            ContourParams::StrongField { d1, d2 }
        }
    };
    println!("predicted width = {:.10}", tssil::predicted_width(&p)?);

    if args.rabi > 0.0 || args.grid_max.is_some() {
        let grid_max = match args.grid_max {
            Some(g) => g,
            None => tssil::span_for_tail(&p, 1e-3)?,
        };
        let rows = tssil::tabulate(|w| shape.eval(w), grid_max, args.grid_points);
        let mut table = String::from("omega,lorentzian,contour\n");
        for (omega, value) in rows {
            table.push_str(&format!(
                "{omega:.10e},{:.10e},{value:.10e}\n",
                tssil::lorentzian(omega, args.gamma0)
            ));
        }
        match args.out {
            Some(path) => {
                std::fs::write(&path, table)?;
                println!("wrote {}", path.display());
            }
            None => print!("{table}"),
        }
    }
    Ok(())
}

/// Quick oracle and invariant suite; prints one line per check.
fn selftest() -> ExitCode {
    use brmdd::ensemble::sample_realization;
    use brmdd::floquet::{
        diagonalize, envelope_sample, floquet_operator, stroboscopic_correlation,
        unitarity_defect,
    };

    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool| {
        println!("{} {name}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failures += 1;
        }
    };

    // Envelope exactness.
    let envelope_ok = envelope_sample(16, 32) == 0.0
        && envelope_sample(8, 32) == 1.0
        && (1..=32).map(|m| envelope_sample(m, 32)).sum::<Real>() == 0.0;
    check("drive envelope nodes, extrema, zero mean", envelope_ok);

    // Unitarity, completeness, correlation equality on a small ensemble.
    let params = ModelParams {
        n_states: 21,
        delta: 1.0,
        v_rms: 1.0,
        band: 10,
        rabi: 2.0,
        pieces: 32,
        drive_factor: 10.0,
        seed: 9,
        realizations: 1,
    };
    let pipeline_ok = (|| -> Result<bool> {
        let r = sample_realization(&params, 0)?;
        let u = floquet_operator(&r, &params)?;
        if unitarity_defect(&u) >= 1e-9 {
            return Ok(false);
        }
        let spec = diagonalize(&u, &r, &params)?;
        let total: Real = spec.weights_g.iter().sum();
        if (total - 1.0).abs() >= 1e-10 {
            return Ok(false);
        }
        let mut state: Vec<brmdd::Cplx> = (0..u.nrows())
            .map(|i| {
                if i == r.g_index {
                    brmdd::Cplx::new(1.0, 0.0)
                } else {
                    brmdd::Cplx::new(0.0, 0.0)
                }
            })
            .collect();
        for n in 1..=16usize {
            let mut next = vec![brmdd::Cplx::new(0.0, 0.0); state.len()];
            for i in 0..state.len() {
                for k in 0..state.len() {
                    next[i] += u[(i, k)] * state[k];
                }
            }
            state = next;
            if (state[r.g_index] - stroboscopic_correlation(&spec, n)).norm() >= 1e-10 {
                return Ok(false);
            }
        }
        Ok(true)
    })()
    .unwrap_or(false);
    check("unitarity, completeness, stroboscopic correlation", pipeline_ok);

    // Contour coefficient identities over random pairs.
    let mut identities_ok = true;
    let mut state = 0x12345678u64;
    let mut next_unit = || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as Real / (1u64 << 53) as Real
    };
    for _ in 0..1000 {
        let gamma0 = 0.01 + 100.0 * next_unit();
        let rabi = 0.4999 * gamma0 * next_unit();
        let p = TssilParams::new(gamma0, rabi).unwrap();
        if let Ok((a1, a2)) = tssil::weak_coefficients(&p) {
            identities_ok &= ((a1 + a2) - gamma0).abs() <= 1e-12 * gamma0;
            identities_ok &= (a1 * a2 - rabi * rabi).abs() <= 1e-12 * (rabi * rabi).max(1e-300);
        } else {
            identities_ok = false;
        }
    }
    check("contour coefficient identities (1000 random pairs)", identities_ok);

    // Contour normalizations by Simpson quadrature.
    let simpson = |f: &dyn Fn(Real) -> Real, a: Real, b: Real, n: usize| -> Real {
        let n = n + n % 2;
        let h = (b - a) / n as Real;
        let mut acc = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as Real * h);
        }
        acc * h / 3.0
    };
    let p = TssilParams::new(2.0, 0.5).unwrap();
    let (a1, a2) = tssil::weak_coefficients(&p).unwrap();
    let weak_mass = simpson(&|w| tssil::weak_contour(w, a1, a2), -4000.0, 4000.0, 800_000);
    let ps = TssilParams::new(2.0, 4.0).unwrap();
    let strong_mass = simpson(&|w| tssil::strong_contour(w, &ps).unwrap(), -4000.0, 4000.0, 800_000);
    check(
        "contour normalization (weak -> 1, strong -> 1/4)",
        (weak_mass - 1.0).abs() < 1e-4 && (strong_mass - 0.25).abs() < 1e-4,
    );

    // Lorentzian self-fit.
    let samples: Vec<brmdd::fitting::FitSample<Real>> = (0..201)
        .map(|i| {
            let omega = -15.0 + 30.0 * i as Real / 200.0;
            brmdd::fitting::FitSample {
                omega,
                rho: tssil::lorentzian(omega, 2.0),
                weight: 1.0,
            }
        })
        .collect();
    let fit_ok = brmdd::fitting::fit_contour(
        &samples,
        ContourParams::Lorentzian { gamma0: 0.7 },
    )
    .map(|fit| (fit.width - 2.0).abs() < 1e-5 && fit.converged)
    .unwrap_or(false);
    check("lorentzian self-fit recovery", fit_ok);

    // Bitwise determinism of a small point.
    let cfg = PointConfig::new(ModelParams {
        n_states: 11,
        delta: 1.0,
        v_rms: 0.7,
        band: 5,
        rabi: 1.0,
        pieces: 8,
        drive_factor: 10.0,
        seed: 4,
        realizations: 6,
    });
    let determinism_ok = match (experiments::run_point(&cfg), experiments::run_point(&cfg)) {
        (Ok(a), Ok(b)) => {
            a.gamma.to_bits() == b.gamma.to_bits()
                && a.xi.to_bits() == b.xi.to_bits()
                && a.samples == b.samples
        }
        _ => false,
    };
    check("bitwise determinism of a repeated point", determinism_ok);

    if failures == 0 {
        println!("selftest: all checks passed");
        ExitCode::SUCCESS
    } else {
        println!("selftest: {failures} check(s) failed");
        ExitCode::FAILURE
    }
}
