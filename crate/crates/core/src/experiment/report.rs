use std::io::Write;
use std::path::Path;

use super::Method;
use crate::error::{Error, Result};

/// Relative RMSE indistinguishable from summation round-off.
pub const ROUNDOFF_FLOOR: f64 = 1e-12;

/// The value every estimate is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reference {
    pub value: f64,
    /// Standard error of `value`; zero when it is exact.
    pub stderr: f64,
    /// Points per scramble, zero when exact.
    pub n: usize,
    pub scrambles: usize,
    /// Required bound on the half-width (absolute units), when one was imposed.
    pub target: Option<f64>,
}

impl Reference {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            stderr: 0.0,
            n: 0,
            scrambles: 0,
            target: None,
        }
    }

    /// Mean and standard error over independent scrambles.
    pub fn from_scrambles(means: &[f64], n: usize) -> Self {
        let r = means.len() as f64;
        let value = means.iter().sum::<f64>() / r;
        let var = means.iter().map(|m| (m - value).powi(2)).sum::<f64>() / (r - 1.0);
        Self {
            value,
            stderr: (var / r).sqrt(),
            n,
            scrambles: means.len(),
            target: None,
        }
    }

    pub(crate) fn with_target(mut self, target: f64) -> Self {
        self.target = Some(target);
        self
    }

    /// Three standard errors.
    pub fn half_width(&self) -> f64 {
        3.0 * self.stderr
    }

    /// Whether the half-width meets the imposed target (always true when exact).
    pub fn is_resolved(&self) -> bool {
        self.target.is_none_or(|t| self.half_width() < t)
    }
}

/// All replications of one `(method, N)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub method: Method,
    pub n: usize,
    pub estimates: Vec<f64>,
    /// Relative RMSE against the report's reference.
    pub rmse_rel: f64,
}

impl Cell {
    pub(crate) fn new(method: Method, n: usize, estimates: Vec<f64>) -> Self {
        Self {
            method,
            n,
            estimates,
            rmse_rel: 0.0,
        }
    }

    /// `sqrt(mean (est − v)^2) / |v|`.
    pub fn rmse(&self, v: f64) -> f64 {
        let mse = self.estimates.iter().map(|e| (e - v).powi(2)).sum::<f64>()
            / self.estimates.len() as f64;
        mse.sqrt() / v.abs()
    }

    pub fn mean(&self) -> f64 {
        self.estimates.iter().sum::<f64>() / self.estimates.len() as f64
    }

    /// Sample variance across replications.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>()
            / (self.estimates.len() as f64 - 1.0)
    }
}

/// Least-squares slope of `log2 RMSE` against `log2 N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rate {
    pub method: Method,
    pub slope: f64,
    pub stderr: f64,
}

/// OLS fit of `log2 y` on `log2 x`; returns `(slope, stderr)`. The standard error is zero
/// for exactly two points.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && y.is_finite())
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::Fit(format!(
            "{} usable points, need at least 2",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all sample sizes are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let stderr = if pts.len() > 2 {
        let ssr: f64 = pts
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub reference: Reference,
    pub cells: Vec<Cell>,
    pub rates: Vec<Rate>,
}

impl ConvergenceReport {
    pub(crate) fn new(reference: Reference, mut cells: Vec<Cell>) -> Result<Self> {
        let v = reference.value;
        if v == 0.0 || !v.is_finite() {
            return Err(Error::ZeroReference(v));
        }
        for c in cells.iter_mut() {
            c.rmse_rel = c.rmse(v);
        }
        let mut methods: Vec<Method> = cells.iter().map(|c| c.method).collect();
        methods.dedup();
        // A method whose error sits at round-off everywhere is exact and has no rate to fit.
        methods.retain(|&m| {
            cells
                .iter()
                .any(|c| c.method == m && c.rmse_rel > ROUNDOFF_FLOOR)
        });
        let rates = methods
            .into_iter()
            .map(|m| {
                let pts: Vec<(f64, f64)> = cells
                    .iter()
                    .filter(|c| c.method == m)
                    .map(|c| (c.n as f64, c.rmse_rel))
                    .collect();
                let (slope, stderr) = fit_rate(&pts)?;
                Ok(Rate {
                    method: m,
                    slope,
                    stderr,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            reference,
            cells,
            rates,
        })
    }

    pub fn cell(&self, method: Method, n: usize) -> Option<&Cell> {
        self.cells.iter().find(|c| c.method == method && c.n == n)
    }

    pub fn rate(&self, method: Method) -> Option<&Rate> {
        self.rates.iter().find(|r| r.method == method)
    }

    pub fn write_estimates<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "method",
            "N",
            "replication",
            "estimate",
            "abs_err",
            "rel_err",
        ])?;
        let v = self.reference.value;
        for c in &self.cells {
            for (r, e) in c.estimates.iter().enumerate() {
                let abs = (e - v).abs();
                out.write_record([
                    c.method.name().to_string(),
                    c.n.to_string(),
                    r.to_string(),
                    format!("{e:.17e}"),
                    format!("{abs:.17e}"),
                    format!("{:.17e}", abs / v.abs()),
                ])?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_summary<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["method", "N", "rmse_rel"])?;
        for c in &self.cells {
            out.write_record([
                c.method.name().to_string(),
                c.n.to_string(),
                format!("{:.17e}", c.rmse_rel),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_rates<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["method", "slope", "stderr"])?;
        for r in &self.rates {
            out.write_record([
                r.method.name().to_string(),
                format!("{:.6}", r.slope),
                format!("{:.6}", r.stderr),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Writes `estimates.csv`, `summary.csv` and `rates.csv` into `dir`, creating it if needed.
    pub fn write_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        self.write_estimates(std::fs::File::create(dir.join("estimates.csv"))?)?;
        self.write_summary(std::fs::File::create(dir.join("summary.csv"))?)?;
        self.write_rates(std::fs::File::create(dir.join("rates.csv"))?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law_slope() {
        let pts: Vec<(f64, f64)> = (10..15)
            .map(|k| (2f64.powi(k), 3.0 * 2f64.powi(-k)))
            .collect();
        let (s, e) = fit_rate(&pts).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
        assert!(e < 1e-12);
    }

    #[test]
    fn two_points_have_zero_stderr() {
        let (s, e) = fit_rate(&[(4.0, 0.5), (16.0, 0.25)]).unwrap();
        assert!((s + 0.5).abs() < 1e-15);
        assert_eq!(e, 0.0);
    }

    #[test]
    fn fit_needs_two_points() {
        assert!(matches!(fit_rate(&[(4.0, 0.5)]), Err(Error::Fit(_))));
        assert!(matches!(
            fit_rate(&[(4.0, 0.5), (4.0, 0.25)]),
            Err(Error::Fit(_))
        ));
    }

    #[test]
    fn zero_reference_is_rejected() {
        let cells = vec![Cell::new(Method::Mc, 4, vec![0.1, 0.2])];
        assert!(matches!(
            ConvergenceReport::new(Reference::exact(0.0), cells),
            Err(Error::ZeroReference(_))
        ));
    }

    #[test]
    fn csv_layout() {
        let cells = vec![
            Cell::new(Method::Mc, 4, vec![1.5, 2.5]),
            Cell::new(Method::Mc, 16, vec![1.75, 2.25]),
        ];
        let rep = ConvergenceReport::new(Reference::exact(2.0), cells).unwrap();
        assert_eq!(rep.cells[0].rmse_rel, 0.25);
        let mut buf = Vec::new();
        rep.write_summary(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("method,N,rmse_rel\nmc,4,2.5"));
        let mut buf = Vec::new();
        rep.write_estimates(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
        let mut buf = Vec::new();
        rep.write_rates(&mut buf).unwrap();
        assert!(String::from_utf8(buf)
            .unwrap()
            .contains("mc,-0.500000,0.000000"));
    }
}
