//! Convergence study of MC, QMC and their preintegrated variants on the digital Asian option.

mod report;
mod seed;

use std::path::PathBuf;

use ndarray::Array2;
use rayon::prelude::*;

use crate::brownian::{FactorizationMethod, PathFactorization, TimeGrid};
use crate::error::{Error, Result};
use crate::lowdisc::{
    normal_cdf, to_gaussian_in_place, DirectionNumbers, Scramble, SobolSampler, UniformStream,
};
use crate::payoff::{make_digital_asian, DigitalAsian, JumpIntegrand, MarketParams};
use crate::preint::PreintegratedFunction;

pub use report::{fit_rate, Cell, ConvergenceReport, Rate, Reference, ROUNDOFF_FLOOR};
pub use seed::{split_seed, splitmix64};

/// Sampling strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Mc,
    Qmc,
    PreMc,
    PreQmc,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Mc, Method::Qmc, Method::PreMc, Method::PreQmc];

    pub fn name(self) -> &'static str {
        match self {
            Self::Mc => "mc",
            Self::Qmc => "qmc",
            Self::PreMc => "pre-mc",
            Self::PreQmc => "pre-qmc",
        }
    }

    pub fn is_preintegrated(self) -> bool {
        matches!(self, Self::PreMc | Self::PreQmc)
    }

    pub fn is_quasi(self) -> bool {
        matches!(self, Self::Qmc | Self::PreQmc)
    }

    fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown method {s:?} (expected mc, qmc, pre-mc or pre-qmc)"
                ))
            })
    }
}

/// Where the true value `V` comes from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReferenceSource {
    /// Black–Scholes digital formula; only for `d = 1`.
    Analytic,
    /// Preintegrated scrambled Sobol' at `n` points averaged over `scrambles` scrambles;
    /// `n` doubles until three standard errors drop below 1/20 of the smallest RMSE.
    Oracle { n: usize, scrambles: usize },
    /// A value supplied by the caller.
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub market: MarketParams<f64>,
    pub d: usize,
    pub factorization: FactorizationMethod,
    pub sample_sizes: Vec<usize>,
    pub replications: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    pub reference: ReferenceSource,
    /// Joe–Kuo table to use instead of the bundled one.
    pub direction_file: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    /// 256 monitoring dates, PCA, `N ∈ {2^12, 2^14, 2^16}`, 10 replications, all methods.
    fn default() -> Self {
        Self {
            market: MarketParams::default(),
            d: 256,
            factorization: FactorizationMethod::Pca,
            sample_sizes: vec![1 << 12, 1 << 14, 1 << 16],
            replications: 10,
            seed: 12345,
            methods: Method::ALL.to_vec(),
            reference: ReferenceSource::Oracle {
                n: 1 << 20,
                scrambles: 16,
            },
            direction_file: None,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::Config("d must be positive".into()));
        }
        if self.sample_sizes.is_empty() {
            return Err(Error::Config("no sample sizes".into()));
        }
        if let Some(n) = self.sample_sizes.iter().find(|n| !n.is_power_of_two()) {
            return Err(Error::Config(format!(
                "sample size {n} is not a power of two"
            )));
        }
        if self.replications < 2 {
            return Err(Error::Config("need at least two replications".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        match self.reference {
            ReferenceSource::Analytic if self.d != 1 => Err(Error::Config(
                "analytic reference only exists for d = 1".into(),
            )),
            ReferenceSource::Oracle { n, scrambles } if !n.is_power_of_two() || scrambles < 2 => {
                Err(Error::Config(
                    "oracle needs a power-of-two size and at least two scrambles".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// `e^{−rT} Φ((log(S0/K) + (r − σ²/2)T) / (σ√T))`, the single-date digital price.
pub fn analytic_digital_price(p: &MarketParams<f64>) -> f64 {
    let d2 = ((p.s0 / p.strike).ln() + p.drift(p.horizon)) / (p.sigma * p.horizon.sqrt());
    p.discount() * normal_cdf(d2)
}

/// Stream tag for the reference oracle, disjoint from method tags.
const ORACLE_TAG: u64 = 0x04ac1e;

/// A configured experiment: integrand, direction numbers and config.
pub struct Experiment {
    config: ExperimentConfig,
    integrand: DigitalAsian<f64>,
    directions: DirectionNumbers,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grid = TimeGrid::new(config.d, config.market.horizon)?;
        let fact = PathFactorization::for_grid(&grid, config.factorization)?;
        let integrand = make_digital_asian(config.market, fact, 0)?;
        let directions = match &config.direction_file {
            Some(path) => {
                let file = std::io::BufReader::new(std::fs::File::open(path)?);
                DirectionNumbers::load(file, config.d)?
            }
            None => DirectionNumbers::joe_kuo(config.d)?,
        };
        Ok(Self {
            config,
            integrand,
            directions,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn integrand(&self) -> &DigitalAsian<f64> {
        &self.integrand
    }

    fn stream(&self, method: Method, seed: u64) -> Result<UniformStream> {
        let dims = if method.is_preintegrated() {
            self.config.d - 1
        } else {
            self.config.d
        };
        Ok(if method.is_quasi() {
            let dn = self.directions.truncated(dims)?;
            UniformStream::sobol(SobolSampler::new(&dn, Scramble::LinearAffine { seed }))
        } else {
            UniformStream::pseudo(dims, seed)
        })
    }

    /// Sum of the integrand over points `start..end` of the stream for `method`.
    fn partial_sum(&self, method: Method, seed: u64, start: usize, end: usize) -> Result<f64> {
        let mut stream = self.stream(method, seed)?;
        stream.skip_to(start as u64)?;
        let g = &self.integrand;
        let mut state = g.new_state();
        let mut point = vec![0.0; stream.dims()];
        let mut sum = KahanSum::default();
        if method.is_preintegrated() {
            let pre = PreintegratedFunction::auto(g);
            for _ in start..end {
                stream.next_into(&mut point)?;
                to_gaussian_in_place(&mut point);
                sum.add(pre.evaluate_with(&point, &mut state)?);
            }
        } else {
            for _ in start..end {
                stream.next_into(&mut point)?;
                to_gaussian_in_place(&mut point);
                sum.add(g.eval_with(&point, &mut state));
            }
        }
        Ok(sum.total())
    }

    /// One estimate of `V` from `n` points drawn with `seed`.
    pub fn estimate(&self, method: Method, n: usize, seed: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("sample size must be positive".into()));
        }
        Ok(self.partial_sum(method, seed, 0, n)? / n as f64)
    }

    /// Average over caller-supplied Gaussian points (rows). Preintegrated methods expect
    /// `d − 1` columns, the others `d`.
    pub fn estimate_with_points(&self, method: Method, points: &Array2<f64>) -> Result<f64> {
        let want = if method.is_preintegrated() {
            self.config.d - 1
        } else {
            self.config.d
        };
        if points.ncols() != want || points.nrows() == 0 {
            return Err(Error::Domain(format!(
                "{method} needs a non-empty point set with {want} columns, got {:?}",
                points.dim()
            )));
        }
        let g = &self.integrand;
        let mut state = g.new_state();
        let pre = PreintegratedFunction::auto(g);
        let mut sum = 0.0;
        for row in points.rows() {
            let x = row.to_vec();
            sum += if method.is_preintegrated() {
                pre.evaluate_with(&x, &mut state)?
            } else {
                g.eval_with(&x, &mut state)
            };
        }
        Ok(sum / points.nrows() as f64)
    }

    /// Seed of replication `rep` of `(method, n)`.
    pub fn replication_seed(&self, method: Method, n: usize, rep: usize) -> u64 {
        split_seed(
            self.config.seed,
            &[method.tag(), n.trailing_zeros() as u64, rep as u64],
        )
    }

    /// All replications of every `(method, N)` cell, in that order.
    fn run_cells(&self) -> Result<Vec<Cell>> {
        let c = &self.config;
        let tasks: Vec<(Method, usize, usize)> = c
            .methods
            .iter()
            .flat_map(|&m| {
                c.sample_sizes
                    .iter()
                    .flat_map(move |&n| (0..c.replications).map(move |r| (m, n, r)))
            })
            .collect();
        let estimates: Vec<f64> = tasks
            .par_iter()
            .map(|&(m, n, r)| self.estimate(m, n, self.replication_seed(m, n, r)))
            .collect::<Result<_>>()?;
        Ok(tasks
            .chunks(c.replications)
            .zip(estimates.chunks(c.replications))
            .map(|(t, e)| Cell::new(t[0].0, t[0].1, e.to_vec()))
            .collect())
    }

    /// Runs every cell, fixes `V_ref` and fits the rates.
    pub fn run(&self) -> Result<ConvergenceReport> {
        let cells = self.run_cells()?;
        let reference = match self.config.reference {
            ReferenceSource::Analytic => {
                Reference::exact(analytic_digital_price(&self.config.market))
            }
            ReferenceSource::Fixed(v) => Reference::exact(v),
            ReferenceSource::Oracle { n, scrambles } => self.oracle(n, scrambles, &cells)?,
        };
        ConvergenceReport::new(reference, cells)
    }

    /// Preintegrated QMC reference, doubling `n` until `3·SE < min RMSE / 20`.
    fn oracle(&self, n0: usize, scrambles: usize, cells: &[Cell]) -> Result<Reference> {
        let seeds: Vec<u64> = (0..scrambles)
            .map(|s| split_seed(self.config.seed, &[ORACLE_TAG, s as u64]))
            .collect();
        let mut sums = vec![0.0; scrambles];
        let mut done = 0;
        let mut n = n0;
        loop {
            let extra: Vec<f64> = seeds
                .par_iter()
                .map(|&s| self.partial_sum(Method::PreQmc, s, done, n))
                .collect::<Result<_>>()?;
            for (a, b) in sums.iter_mut().zip(extra) {
                *a += b;
            }
            done = n;
            let means: Vec<f64> = sums.iter().map(|s| s / n as f64).collect();
            let reference = Reference::from_scrambles(&means, n);
            // RMSEs are relative, so the target is scaled back to absolute units.
            let min_rmse = cells
                .iter()
                .map(|c| c.rmse(reference.value))
                .fold(f64::INFINITY, f64::min);
            let target = min_rmse * reference.value.abs() / 20.0;
            if reference.half_width() < target || 2 * n as u64 > crate::lowdisc::CAPACITY {
                return Ok(reference.with_target(target));
            }
            n *= 2;
        }
    }
}

/// Compensated running sum.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    #[inline]
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum
    }
}

/// [`Experiment::new`] followed by [`Experiment::run`].
pub fn run_experiment(config: ExperimentConfig) -> Result<ConvergenceReport> {
    Experiment::new(config)?.run()
}
