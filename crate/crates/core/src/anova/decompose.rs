use ndarray::{ArrayD, Axis, Dimension, IxDyn};

use super::{members, AnovaIntegrand, Subset};
use crate::error::{Error, Result};
use crate::lowdisc::normal_cdf;
use crate::quadrature::{gauss_hermite, Rule};
use crate::scalar::Real;

/// Largest supported dimension.
pub const MAX_DIM: usize = 6;
/// Largest tensor grid that will be materialized.
pub const MAX_GRID_POINTS: usize = 1 << 25;

/// All `2ᵈ` ANOVA terms of `g` on a product quadrature grid.
pub struct AnovaDecomposition<'a, G, T> {
    g: &'a G,
    d: usize,
    jump: Option<usize>,
    rule: Rule<T>,
    /// Per-axis weights of the grid (interval masses on the jump axis).
    weights: Vec<Vec<T>>,
    /// `marginals[v]` integrates `g` over every axis outside `v`; axes follow `members(v)`.
    marginals: Vec<ArrayD<T>>,
    variances: Vec<T>,
    total_variance: T,
}

/// Both sides of the variance identities.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceReport<T> {
    pub mean: T,
    /// `σ²(g)` from the grid directly.
    pub total: T,
    /// `σ²(g_u)` for every non-empty `u`, in increasing bit order.
    pub terms: Vec<(Subset, T)>,
    pub term_sum: T,
    /// `σ²(P_k g)` computed from the projected function itself.
    pub projected: Vec<T>,
    /// `Σ_{u ∌ k, u ≠ ∅} σ²(g_u)`.
    pub projected_terms: Vec<T>,
    /// Whether `σ²(P_k g) ≤ σ²(g)` for each `k`.
    pub reduces: Vec<bool>,
}

/// Decomposes `g` using `n` Gauss–Hermite nodes per smooth axis.
pub fn decompose<T: Real, G: AnovaIntegrand<T>>(
    g: &G,
    n: usize,
) -> Result<AnovaDecomposition<'_, G, T>> {
    let d = g.dim();
    if d == 0 {
        return Err(Error::Domain("dimension must be positive".into()));
    }
    if d > MAX_DIM {
        return Err(Error::Capacity(format!(
            "ANOVA decomposition supports d ≤ {MAX_DIM}, got {d}"
        )));
    }
    if n == 0 {
        return Err(Error::Config("need at least one quadrature node".into()));
    }
    let rule: Rule<T> = gauss_hermite(n);
    let jump = g.jump_axis();
    let smooth: Vec<usize> = (0..d).filter(|&k| Some(k) != jump).collect();
    let tuples = checked_pow(n, smooth.len())?;

    let mut weights: Vec<Vec<T>> = vec![rule.weights.clone(); d];
    // Jump data: per smooth tuple, the first interval on which g equals θ.
    let mut jump_data: Option<(T, Vec<usize>)> = None;
    if let Some(j) = jump {
        let mut y = vec![T::zero(); d - 1];
        let mut psis = Vec::with_capacity(tuples);
        let mut theta = T::zero();
        for t in 0..tuples {
            fill_tuple(t, n, &rule.nodes, &mut y);
            let (th, psi) = g.jump(&y)?;
            theta = th;
            psis.push(psi);
        }
        let mut breaks: Vec<T> = psis.iter().flatten().copied().collect();
        breaks.sort_by(|a, b| a.partial_cmp(b).expect("finite jump points"));
        breaks.dedup();
        let mut w = Vec::with_capacity(breaks.len() + 1);
        let mut prev = T::zero();
        for &b in &breaks {
            let c = normal_cdf(b);
            w.push(c - prev);
            prev = c;
        }
        w.push(T::one() - prev);
        let ranks = psis
            .iter()
            .map(|p| match p {
                None => 0,
                Some(v) => breaks.partition_point(|b| b < v) + 1,
            })
            .collect();
        weights[j] = w;
        jump_data = Some((theta, ranks));
    }

    let shape: Vec<usize> = weights.iter().map(Vec::len).collect();
    let points = shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .unwrap_or(usize::MAX);
    if points > MAX_GRID_POINTS {
        return Err(Error::Capacity(format!(
            "{points} grid points exceed {MAX_GRID_POINTS}"
        )));
    }

    let mut grid = ArrayD::<T>::zeros(IxDyn(&shape));
    let mut x = vec![T::zero(); d];
    for (idx, v) in grid.indexed_iter_mut() {
        *v = match (&jump_data, jump) {
            (Some((theta, ranks)), Some(j)) => {
                let t = smooth.iter().fold(0, |acc, &k| acc * n + idx[k]);
                if idx[j] >= ranks[t] {
                    *theta
                } else {
                    T::zero()
                }
            }
            _ => {
                for k in 0..d {
                    x[k] = rule.nodes[idx[k]];
                }
                g.eval(&x)?
            }
        };
    }

    let full = (1usize << d) - 1;
    let mut marginals: Vec<Option<ArrayD<T>>> = vec![None; full + 1];
    marginals[full] = Some(grid);
    for v in (0..full).rev() {
        let k = (0..d).find(|k| v >> k & 1 == 0).expect("proper subset");
        let parent = v | (1 << k);
        let pos = (parent & ((1 << k) - 1)).count_ones() as usize;
        let w = &weights[k];
        let m = marginals[parent]
            .as_ref()
            .expect("parents first")
            .map_axis(Axis(pos), |lane| {
                lane.iter().zip(w).map(|(a, b)| *a * *b).sum()
            });
        marginals[v] = Some(m);
    }
    let marginals: Vec<ArrayD<T>> = marginals.into_iter().map(|m| m.expect("filled")).collect();

    let mut dec = AnovaDecomposition {
        g,
        d,
        jump,
        rule,
        weights,
        marginals,
        variances: vec![T::zero(); full + 1],
        total_variance: T::zero(),
    };
    let mean = dec.mean();
    dec.total_variance = dec.weighted_square_sum(full as Subset) - mean * mean;
    for u in 1..=full {
        dec.variances[u] = dec.term_square_sum(u as Subset);
    }
    Ok(dec)
}

fn checked_pow(n: usize, e: usize) -> Result<usize> {
    n.checked_pow(e as u32)
        .filter(|&p| p <= MAX_GRID_POINTS)
        .ok_or_else(|| Error::Capacity(format!("{n}^{e} grid points exceed {MAX_GRID_POINTS}")))
}

/// Writes the nodes of mixed-radix tuple `t` (most significant first) into `y`.
fn fill_tuple<T: Copy>(mut t: usize, n: usize, nodes: &[T], y: &mut [T]) {
    for v in y.iter_mut().rev() {
        *v = nodes[t % n];
        t /= n;
    }
}

impl<'a, T: Real, G: AnovaIntegrand<T>> AnovaDecomposition<'a, G, T> {
    pub fn dim(&self) -> usize {
        self.d
    }

    fn full(&self) -> Subset {
        ((1usize << self.d) - 1) as Subset
    }

    /// `g_∅ = ∫ g ρ_d`.
    pub fn mean(&self) -> T {
        self.marginals[0]
            .iter()
            .copied()
            .next()
            .unwrap_or(T::zero())
    }

    pub fn total_variance(&self) -> T {
        self.total_variance
    }

    /// `σ²(g_u)`; zero for the empty set.
    pub fn variance(&self, u: Subset) -> T {
        self.variances[u as usize]
    }

    /// Number of grid nodes along each axis.
    pub fn grid_shape(&self) -> Vec<usize> {
        self.weights.iter().map(Vec::len).collect()
    }

    /// `Σ w M_v²` over the grid of `v`.
    fn weighted_square_sum(&self, v: Subset) -> T {
        let axes = members(v);
        self.marginals[v as usize]
            .indexed_iter()
            .map(|(idx, &m)| self.weight(&axes, idx.slice()) * m * m)
            .sum()
    }

    fn weight(&self, axes: &[usize], idx: &[usize]) -> T {
        axes.iter()
            .zip(idx)
            .fold(T::one(), |w, (&k, &i)| w * self.weights[k][i])
    }

    /// `(v, sign, positions of v's axes inside u)` for every `v ⊆ u`.
    fn inclusion_exclusion(&self, u: Subset) -> Vec<(usize, T, Vec<usize>)> {
        let um = members(u);
        subsets(u)
            .map(|v| {
                let sign = if (u.count_ones() - v.count_ones()).is_multiple_of(2) {
                    T::one()
                } else {
                    -T::one()
                };
                let pos = members(v)
                    .iter()
                    .map(|k| um.iter().position(|x| x == k).expect("subset"))
                    .collect();
                (v as usize, sign, pos)
            })
            .collect()
    }

    /// `g_u` at grid index `idx` (indices along `members(u)`).
    fn term_on_grid(
        &self,
        parts: &[(usize, T, Vec<usize>)],
        idx: &[usize],
        buf: &mut Vec<usize>,
    ) -> T {
        let mut s = T::zero();
        for (v, sign, pos) in parts {
            buf.clear();
            buf.extend(pos.iter().map(|&p| idx[p]));
            s += *sign * self.marginals[*v][IxDyn(buf)];
        }
        s
    }

    fn term_square_sum(&self, u: Subset) -> T {
        let parts = self.inclusion_exclusion(u);
        let axes = members(u);
        let mut buf = Vec::with_capacity(self.d);
        let mut total = T::zero();
        for (idx, _) in self.marginals[u as usize].indexed_iter() {
            let t = self.term_on_grid(&parts, idx.slice(), &mut buf);
            total += self.weight(&axes, idx.slice()) * t * t;
        }
        total
    }

    /// `max_{u ≠ v} |∫ g_u g_v ρ_d|` on the grid. Only for grids up to `2^20` points.
    pub fn orthogonality_residual(&self) -> Result<T> {
        let shape = self.grid_shape();
        let points: usize = shape.iter().product();
        if points > 1 << 20 {
            return Err(Error::Capacity(format!(
                "orthogonality check limited to 2^20 points, grid has {points}"
            )));
        }
        let full = self.full();
        let all: Vec<Subset> = (0..=full).collect();
        let parts: Vec<_> = all.iter().map(|&u| self.inclusion_exclusion(u)).collect();
        let axes: Vec<Vec<usize>> = all.iter().map(|&u| members(u)).collect();
        let m = all.len();
        let mut inner = vec![T::zero(); m * m];
        let mut vals = vec![T::zero(); m];
        let mut buf = Vec::new();
        let mut sub = Vec::new();
        let full_axes = members(full);
        for (idx, _) in self.marginals[full as usize].indexed_iter() {
            let w = self.weight(&full_axes, idx.slice());
            for (a, val) in vals.iter_mut().enumerate() {
                sub.clear();
                sub.extend(axes[a].iter().map(|&k| idx[k]));
                *val = self.term_on_grid(&parts[a], &sub, &mut buf);
            }
            for a in 0..m {
                for b in a + 1..m {
                    inner[a * m + b] += w * vals[a] * vals[b];
                }
            }
        }
        Ok(inner.iter().fold(T::zero(), |acc, x| acc.max(x.abs())))
    }

    /// `(∏_{k ∉ v} P_k g)(x_v)` at an arbitrary point; coordinates outside `v` are ignored.
    pub fn marginal_at(&self, v: Subset, x: &[T]) -> Result<T> {
        let full = self.full();
        if v == full {
            return self.g.eval(x);
        }
        if v == 0 {
            return Ok(self.mean());
        }
        let d = self.d;
        let exact = self.jump.filter(|j| v >> j & 1 == 0);
        let free: Vec<usize> = (0..d)
            .filter(|&k| v >> k & 1 == 0 && Some(k) != exact)
            .collect();
        let n = self.rule.len();
        let count = n.pow(free.len() as u32);
        let mut z = x.to_vec();
        let mut y = vec![T::zero(); d.saturating_sub(1)];
        let mut total = T::zero();
        for t in 0..count {
            let mut r = t;
            let mut w = T::one();
            for &k in free.iter().rev() {
                z[k] = self.rule.nodes[r % n];
                w *= self.rule.weights[r % n];
                r /= n;
            }
            let value = match exact {
                Some(j) => {
                    let (_, rest) = crate::payoff::split(j, &z);
                    y.copy_from_slice(&rest);
                    self.g.project_jump(&y)?
                }
                None => self.g.eval(&z)?,
            };
            total += w * value;
        }
        Ok(total)
    }

    /// All `2ᵈ` terms `g_u(x)`, indexed by `u`.
    pub fn terms_at(&self, x: &[T]) -> Result<Vec<T>> {
        let full = self.full();
        let marg = (0..=full)
            .map(|v| self.marginal_at(v, x))
            .collect::<Result<Vec<T>>>()?;
        Ok((0..=full)
            .map(|u| {
                subsets(u).fold(T::zero(), |s, v| {
                    let sign = if (u.count_ones() - v.count_ones()).is_multiple_of(2) {
                        T::one()
                    } else {
                        -T::one()
                    };
                    s + sign * marg[v as usize]
                })
            })
            .collect())
    }

    /// `g_u(x)` at an arbitrary point.
    pub fn term(&self, u: Subset, x: &[T]) -> Result<T> {
        subsets(u).try_fold(T::zero(), |s, v| {
            let sign = if (u.count_ones() - v.count_ones()).is_multiple_of(2) {
                T::one()
            } else {
                -T::one()
            };
            Ok(s + sign * self.marginal_at(v, x)?)
        })
    }

    /// `(P_k g_u)(x)` with Gauss–Hermite along smooth axis `k` (`x_k` is ignored).
    pub fn project_term(&self, u: Subset, k: usize, x: &[T]) -> Result<T> {
        if self.jump == Some(k) {
            return Err(Error::Contract(
                "term projection along the jump axis is only exact on the grid".into(),
            ));
        }
        let mut z = x.to_vec();
        let mut total = T::zero();
        for (&node, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            z[k] = node;
            total += w * self.term(u, &z)?;
        }
        Ok(total)
    }

    /// Both sides of the variance identities and the projection inequality.
    pub fn variance_report(&self) -> VarianceReport<T> {
        let full = self.full();
        let mean = self.mean();
        let terms: Vec<(Subset, T)> = (1..=full).map(|u| (u, self.variance(u))).collect();
        let term_sum = terms.iter().map(|t| t.1).sum();
        let projected: Vec<T> = (0..self.d)
            .map(|k| self.weighted_square_sum(full & !(1 << k)) - mean * mean)
            .collect();
        let projected_terms: Vec<T> = (0..self.d)
            .map(|k| {
                terms
                    .iter()
                    .filter(|(u, _)| u >> k & 1 == 0)
                    .map(|t| t.1)
                    .sum()
            })
            .collect();
        let slack =
            T::epsilon() * T::c(64.0) * self.total_variance.abs().max(T::min_positive_value());
        let reduces = projected
            .iter()
            .map(|&p| p <= self.total_variance + slack)
            .collect();
        VarianceReport {
            mean,
            total: self.total_variance,
            terms,
            term_sum,
            projected,
            projected_terms,
            reduces,
        }
    }
}

/// All subsets of `u`, including `∅` and `u`.
fn subsets(u: Subset) -> impl Iterator<Item = Subset> {
    let mut next = Some(u);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & u) };
        Some(cur)
    })
}
