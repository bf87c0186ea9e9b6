use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use preint::anova::{decompose, subset_label, JumpAnova};
use preint::brownian::{CovarianceMatrix, FactorizationMethod, PathFactorization, TimeGrid};
use preint::experiment::{Experiment, ExperimentConfig, Method, ReferenceSource};
use preint::payoff::{make_digital_asian, DigitalAsian, JumpIntegrand, MarketParams};
use preint::preint::{
    boundary_decay_probe, dk_preintegrated, find_root, preintegrate, Pathological,
};
use preint::Result;

#[derive(Parser)]
#[command(
    name = "preint",
    version,
    about = "Preintegrated (Q)MC pricing of a digital Asian option"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single estimate of the option value.
    Price(PriceArgs),
    /// Full convergence experiment, written as CSV files.
    Converge(ConvergeArgs),
    /// Per-subset ANOVA variances of the digital option as CSV.
    Anova(AnovaArgs),
    /// Invariant checks: factorization residuals, roots, derivatives, pathological example.
    Check(CheckArgs),
}

#[derive(Args, Clone)]
struct Market {
    /// Strike.
    #[arg(long = "K", default_value_t = 100.0)]
    strike: f64,
    /// Spot.
    #[arg(long = "S0", default_value_t = 100.0)]
    s0: f64,
    /// Risk-free rate.
    #[arg(long = "r", default_value_t = 0.1)]
    rate: f64,
    /// Volatility.
    #[arg(long = "sigma", default_value_t = 0.1)]
    sigma: f64,
    /// Maturity.
    #[arg(long = "T", default_value_t = 1.0)]
    horizon: f64,
}

impl Market {
    fn params(&self) -> Result<MarketParams<f64>> {
        MarketParams::new(self.s0, self.strike, self.rate, self.sigma, self.horizon)
    }
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    market: Market,
    /// Number of monitoring dates.
    #[arg(long, default_value_t = 256)]
    d: usize,
    /// Path construction: standard, bridge or pca.
    #[arg(long, default_value = "pca")]
    factorization: FactorizationMethod,
    /// Master seed.
    #[arg(long, default_value_t = 12345)]
    seed: u64,
    /// Joe–Kuo direction-number file (needed beyond 1024 dimensions).
    #[arg(long)]
    dirnums: Option<PathBuf>,
}

#[derive(Args)]
struct PriceArgs {
    #[command(flatten)]
    common: Common,
    /// Number of points (power of two).
    #[arg(long = "N", default_value_t = 1 << 16)]
    n: usize,
    #[arg(long, default_value = "pre-qmc")]
    method: Method,
}

#[derive(Args)]
struct ConvergeArgs {
    #[command(flatten)]
    common: Common,
    /// Sample sizes (repeatable, powers of two).
    #[arg(long = "N", default_values_t = [1usize << 12, 1 << 14, 1 << 16])]
    n: Vec<usize>,
    /// Replications per (method, N).
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Methods to run (repeatable).
    #[arg(long, default_values_t = Method::ALL)]
    method: Vec<Method>,
    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,
    /// Use this value as the reference instead of computing one.
    #[arg(long)]
    reference: Option<f64>,
    /// Initial points per scramble for the reference run.
    #[arg(long, default_value_t = 1 << 20)]
    reference_n: usize,
    /// Scrambles for the reference run.
    #[arg(long, default_value_t = 16)]
    reference_scrambles: usize,
}

#[derive(Args)]
struct AnovaArgs {
    #[command(flatten)]
    market: Market,
    /// Number of monitoring dates (at most 6).
    #[arg(long, default_value_t = 3)]
    d: usize,
    #[arg(long, default_value = "pca")]
    factorization: FactorizationMethod,
    /// Gauss–Hermite nodes per smooth axis.
    #[arg(long, default_value_t = 64)]
    nodes: usize,
    /// Directory for `anova.csv`; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    market: Market,
    /// Dimension for residual and root checks.
    #[arg(long, default_value_t = 256)]
    d: usize,
    #[arg(long, default_value = "pca")]
    factorization: FactorizationMethod,
    #[arg(long, default_value_t = 12345)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("PREINT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("warning: PREINT_THREADS ignored: {e}");
        }
    }
    let outcome = match cli.command {
        Command::Price(a) => price(a),
        Command::Converge(a) => converge(a),
        Command::Anova(a) => anova(a),
        Command::Check(a) => check(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn config(common: &Common) -> Result<ExperimentConfig> {
    Ok(ExperimentConfig {
        market: common.market.params()?,
        d: common.d,
        factorization: common.factorization,
        seed: common.seed,
        direction_file: common.dirnums.clone(),
        reference: if common.d == 1 {
            ReferenceSource::Analytic
        } else {
            ExperimentConfig::default().reference
        },
        ..ExperimentConfig::default()
    })
}

fn price(a: PriceArgs) -> Result<bool> {
    let exp = Experiment::new(ExperimentConfig {
        sample_sizes: vec![a.n],
        ..config(&a.common)?
    })?;
    let v = exp.estimate(a.method, a.n, exp.replication_seed(a.method, a.n, 0))?;
    println!("method,N,estimate");
    println!("{},{},{v:.15}", a.method, a.n);
    Ok(true)
}

fn converge(a: ConvergeArgs) -> Result<bool> {
    let mut cfg = config(&a.common)?;
    cfg.sample_sizes = a.n;
    cfg.replications = a.reps;
    cfg.methods = a.method;
    cfg.methods.sort();
    cfg.methods.dedup();
    if let Some(v) = a.reference {
        cfg.reference = ReferenceSource::Fixed(v);
    } else if cfg.d != 1 {
        cfg.reference = ReferenceSource::Oracle {
            n: a.reference_n,
            scrambles: a.reference_scrambles,
        };
    }
    let report = Experiment::new(cfg)?.run()?;
    report.write_dir(&a.out)?;
    let r = &report.reference;
    println!(
        "reference {:.12} (stderr {:.3e}, {} points x {} scrambles)",
        r.value, r.stderr, r.n, r.scrambles
    );
    if !r.is_resolved() {
        eprintln!(
            "warning: reference half-width {:.3e} exceeds target {:.3e}",
            r.half_width(),
            r.target.unwrap_or(0.0)
        );
    }
    for c in &report.cells {
        println!(
            "{:<8} N={:<8} rmse_rel={:.4e}",
            c.method.name(),
            c.n,
            c.rmse_rel
        );
    }
    for rate in &report.rates {
        println!(
            "{:<8} slope={:+.3} stderr={:.3}",
            rate.method.name(),
            rate.slope,
            rate.stderr
        );
    }
    println!("wrote {}", a.out.display());
    Ok(true)
}

fn digital(market: &Market, d: usize, method: FactorizationMethod) -> Result<DigitalAsian<f64>> {
    let grid = TimeGrid::new(d, market.horizon)?;
    make_digital_asian(
        market.params()?,
        PathFactorization::for_grid(&grid, method)?,
        0,
    )
}

fn anova(a: AnovaArgs) -> Result<bool> {
    let g = digital(&a.market, a.d, a.factorization)?;
    let jump = JumpAnova::new(&g)?;
    let dec = decompose(&jump, a.nodes)?;
    let rep = dec.variance_report();
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["kind", "subset", "variance"])?;
        w.write_record(["mean", "", &format!("{:.15e}", rep.mean)])?;
        w.write_record(["total", "", &format!("{:.15e}", rep.total)])?;
        for (u, v) in &rep.terms {
            w.write_record(["term", &subset_label(*u), &format!("{v:.15e}")])?;
        }
        w.write_record(["term_sum", "", &format!("{:.15e}", rep.term_sum)])?;
        for (k, (p, t)) in rep.projected.iter().zip(&rep.projected_terms).enumerate() {
            w.write_record(["projected", &(k + 1).to_string(), &format!("{p:.15e}")])?;
            w.write_record([
                "projected_terms",
                &(k + 1).to_string(),
                &format!("{t:.15e}"),
            ])?;
        }
        w.flush()?;
    }
    match a.out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            std::fs::write(dir.join("anova.csv"), &buf)?;
        }
        None => std::io::stdout().write_all(&buf)?,
    }
    Ok(rep.reduces.iter().all(|&r| r))
}

struct Checks {
    all_ok: bool,
}

impl Checks {
    fn report(&mut self, name: &str, value: f64, limit: f64) {
        let ok = value <= limit;
        self.all_ok &= ok;
        println!(
            "{:<4} {name:<48} {value:.3e} (limit {limit:.0e})",
            if ok { "ok" } else { "FAIL" }
        );
    }
}

fn check(a: CheckArgs) -> Result<bool> {
    let mut checks = Checks { all_ok: true };
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);

    let grid = TimeGrid::new(a.d, a.market.horizon)?;
    let cov = CovarianceMatrix::from_grid(&grid);
    for m in [
        FactorizationMethod::Standard,
        FactorizationMethod::BrownianBridge,
        FactorizationMethod::Pca,
    ] {
        let f = PathFactorization::for_grid(&grid, m)?;
        checks.report(
            &format!("residual max|AA^T - C| ({}, d={})", m.name(), a.d),
            f.residual(&cov),
            1e-9,
        );
    }

    let g = digital(&a.market, a.d, a.factorization)?;
    let (mut worst, mut iters) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let y: Vec<f64> = (0..a.d - 1).map(|_| rng.random_range(-3.0..3.0)).collect();
        let r = find_root(&g, &y)?;
        if r.root().is_some() {
            worst = worst.max(r.residual.abs() / g.root_scale());
            iters = iters.max(r.iterations);
        }
    }
    checks.report(
        &format!("root relative residual (1000 y, d={})", a.d),
        worst,
        1e-10,
    );
    checks.report("root iterations", iters as f64, 20.0);

    for d in [2, 4, 8] {
        let g = digital(&a.market, d, a.factorization)?;
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let y: Vec<f64> = (0..d - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
            for k in 1..d {
                let exact = dk_preintegrated(&g, &y, k)?;
                let h = 1e-5;
                let (mut yp, mut ym) = (y.clone(), y.clone());
                yp[k - 1] += h;
                ym[k - 1] -= h;
                let fd = (preintegrate(&g, &yp)? - preintegrate(&g, &ym)?) / (2.0 * h);
                worst = worst.max((exact - fd).abs() / exact.abs().max(1.0));
            }
        }
        checks.report(
            &format!("derivative vs central difference (d={d})"),
            worst,
            1e-6,
        );
    }

    let fixture = Pathological { m: 2 };
    let mut worst = 0.0f64;
    for i in 0..1000 {
        let x2 = 0.33 + 0.6 * (i as f64 + 0.5) / 1000.0;
        if let (Some(p), Some(e)) = (find_root(&fixture, &[x2])?.root(), fixture.psi_exact(x2)) {
            worst = worst.max((p - e).abs());
        }
    }
    checks.report("pathological root vs closed form", worst, 1e-9);
    let path: Vec<f64> = (1..=8)
        .map(|q| std::f64::consts::FRAC_1_PI + 10f64.powi(-q))
        .collect();
    let last = *boundary_decay_probe(&fixture, &path)?
        .last()
        .expect("non-empty path");
    checks.report(
        "pathological psi at 1/pi + 1e-8 (plus 15)",
        last.psi.unwrap_or(f64::NEG_INFINITY) + 15.0,
        0.0,
    );
    checks.report(
        "pathological |derivative| at 1/pi + 1e-8",
        last.derivative.abs(),
        1e-6,
    );
    Ok(checks.all_ok)
}
