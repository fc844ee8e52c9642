//! Moments `I_f(p) = ∫₀¹ |M_f(α)|^p dα`: exact even moments by integer
//! convolution, general `p` by periodic-trapezoid quadrature on FFT grids,
//! arc-restricted splits, kernel moments and the singular series.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::arcs::{ArcFamily, ArcParams};
use crate::arith::{compositions_big, compositions_u128, floor_param, sieve_totient, ArithmeticTable, EULER_GAMMA, WIDE_COUNT_THRESHOLD};
use crate::error::{Error, Result};
use crate::expsum::{abs_pow, kernel_eval, GridEvaluation};
use crate::par;

/// Exact-arithmetic budget for `s·X` in convolution counts.
pub const CONVOLUTION_BUDGET: u64 = 10_000_000;
/// Largest grid the quadrature refines to.
pub const QUADRATURE_N_CAP: usize = 1 << 26;
pub const DEFAULT_TOL: f64 = 1e-3;
pub const KERNEL_MAX_S: u32 = 5;
pub const KERNEL_MAX_X: u64 = 1_000_000;
const KERNEL_INTERVALS_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentMethod {
    ExactInteger,
    Quadrature,
}

impl MomentMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            MomentMethod::ExactInteger => "exact_integer",
            MomentMethod::Quadrature => "quadrature",
        }
    }
}

/// A value of `I_f(p)` (or a restricted version) with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimate {
    pub value: f64,
    pub p: f64,
    pub method: MomentMethod,
    /// Grid size (quadrature) or 0 for exact values.
    pub n: usize,
    pub rel_error_est: f64,
    pub converged: bool,
    /// The exact integer behind `value` for `ExactInteger` moments.
    pub exact: Option<BigUint>,
}

impl MomentEstimate {
    fn exact(p: f64, v: BigUint) -> Self {
        MomentEstimate {
            value: v.to_f64().unwrap_or(f64::INFINITY),
            p,
            method: MomentMethod::ExactInteger,
            n: 0,
            rel_error_est: 0.0,
            converged: true,
            exact: Some(v),
        }
    }

    fn quadrature(value: f64, p: f64, n: usize, rel_error_est: f64, converged: bool) -> Self {
        MomentEstimate { value, p, method: MomentMethod::Quadrature, n, rel_error_est, converged, exact: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Counts {
    Narrow(Vec<u128>),
    Wide(Vec<BigUint>),
}

/// `r_s(n) = Σ_{n₁+⋯+n_s=n} f(n₁)⋯f(n_s)` for `s <= n <= sX`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionTable {
    s: u32,
    counts: Counts,
}

impl ConvolutionTable {
    pub fn s(&self) -> u32 {
        self.s
    }

    /// Smallest `n` with a (possibly) nonzero count.
    pub fn first(&self) -> usize {
        self.s as usize
    }

    pub fn len(&self) -> usize {
        match &self.counts {
            Counts::Narrow(v) => v.len(),
            Counts::Wide(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `r_s(n)`, zero outside `s..=sX`.
    pub fn count(&self, n: usize) -> BigUint {
        if n < self.first() || n - self.first() >= self.len() {
            return BigUint::zero();
        }
        let i = n - self.first();
        match &self.counts {
            Counts::Narrow(v) => BigUint::from(v[i]),
            Counts::Wide(v) => v[i].clone(),
        }
    }

    pub fn total(&self) -> BigUint {
        match &self.counts {
            Counts::Narrow(v) => v.iter().map(|&c| BigUint::from(c)).sum(),
            Counts::Wide(v) => v.iter().sum(),
        }
    }

    pub fn sum_of_squares(&self) -> BigUint {
        match &self.counts {
            Counts::Narrow(v) => {
                let narrow = v.iter().try_fold(0u128, |acc, &c| acc.checked_add(c.checked_mul(c)?));
                match narrow {
                    Some(s) => BigUint::from(s),
                    None => v.iter().map(|&c| BigUint::from(c) * BigUint::from(c)).sum(),
                }
            }
            Counts::Wide(v) => v.iter().map(|c| c * c).sum(),
        }
    }
}

fn convolve_narrow(prev: &[u128], f: &[u128]) -> Option<Vec<u128>> {
    let len = prev.len() + f.len() - 1;
    let out: Vec<Option<u128>> = par::map(len, |m| {
        let lo = m.saturating_sub(f.len() - 1);
        let hi = m.min(prev.len() - 1);
        (lo..=hi).try_fold(0u128, |acc, i| acc.checked_add(prev[i].checked_mul(f[m - i])?))
    });
    out.into_iter().collect()
}

fn convolve_wide(prev: &[BigUint], f: &[BigUint]) -> Vec<BigUint> {
    let len = prev.len() + f.len() - 1;
    par::map(len, |m| {
        let lo = m.saturating_sub(f.len() - 1);
        let hi = m.min(prev.len() - 1);
        (lo..=hi).map(|i| &prev[i] * &f[m - i]).sum()
    })
}

/// Exact `s`-fold convolution of `f(1..=X)` by repeated schoolbook products.
///
/// Works in `u128` and restarts in arbitrary width if any product or sum
/// overflows. Requires `s·X <= 10^7`.
pub fn convolve_counts(table: &ArithmeticTable, s: u32) -> Result<ConvolutionTable> {
    if s == 0 {
        return Err(Error::Parameter("convolution order s must be at least 1".into()));
    }
    let x = table.len() as u64;
    if (s as u64).saturating_mul(x) > CONVOLUTION_BUDGET {
        return Err(Error::Budget(format!("s*X = {} exceeds {CONVOLUTION_BUDGET}", s as u64 * x)));
    }
    let f: Vec<u128> = table.values().iter().map(|&v| v as u128).collect();
    let mut acc = f.clone();
    let mut narrow_ok = true;
    for _ in 1..s {
        match convolve_narrow(&acc, &f) {
            Some(next) => acc = next,
            None => {
                narrow_ok = false;
                break;
            }
        }
    }
    if narrow_ok {
        return Ok(ConvolutionTable { s, counts: Counts::Narrow(acc) });
    }
    let fw: Vec<BigUint> = f.iter().map(|&v| BigUint::from(v)).collect();
    let mut accw = fw.clone();
    for _ in 1..s {
        accw = convolve_wide(&accw, &fw);
    }
    Ok(ConvolutionTable { s, counts: Counts::Wide(accw) })
}

/// `I_f(2s) = Σ_n r_s(n)²`, exactly.
pub fn moment_even_exact(table: &ArithmeticTable, s: u32) -> Result<MomentEstimate> {
    let conv = convolve_counts(table, s)?;
    Ok(MomentEstimate::exact(2.0 * s as f64, conv.sum_of_squares()))
}

fn check_quadrature_args(p: f64, tol: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!("moment exponent p = {p} must be >= 1")));
    }
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance {tol} must be positive")));
    }
    Ok(())
}

/// Periodic-trapezoid estimate of `I_f(p)` with grid doubling.
///
/// Doubles `N` until successive estimates differ by less than `tol`
/// (relative) or `N` reaches [`QUADRATURE_N_CAP`]. Returns the estimate along
/// with the finest grid it used.
pub fn moment_quadrature_refined(grid: &GridEvaluation, p: f64, tol: f64) -> Result<(MomentEstimate, GridEvaluation)> {
    check_quadrature_args(p, tol)?;
    let mut current = grid.clone();
    let mut value = current.power_mean(p);
    let mut rel = 1.0;
    while current.n() < QUADRATURE_N_CAP {
        let finer = current.refine();
        let next = finer.power_mean(p);
        rel = if next == 0.0 { 0.0 } else { ((next - value) / next).abs() };
        current = finer;
        value = next;
        if rel < tol {
            let est = MomentEstimate::quadrature(value, p, current.n(), rel, true);
            return Ok((est, current));
        }
    }
    let est = MomentEstimate::quadrature(value, p, current.n(), rel, false);
    Ok((est, current))
}

/// [`moment_quadrature_refined`] without the grid.
pub fn moment_quadrature(grid: &GridEvaluation, p: f64, tol: f64) -> Result<MomentEstimate> {
    moment_quadrature_refined(grid, p, tol).map(|(e, _)| e)
}

/// Split the grid quadrature of `|M|^p` between major and minor arcs.
///
/// Each node is assigned wholly to the arc set containing it. The summed mass
/// of the nodes adjacent to arc endpoints is reported as `rel_error_est`.
pub fn moment_on_arcs(grid: &GridEvaluation, family: &ArcFamily, p: f64) -> Result<(MomentEstimate, MomentEstimate)> {
    check_quadrature_args(p, 1.0)?;
    if grid.x() as u64 != family.params().x {
        return Err(Error::Parameter(format!(
            "grid built for X = {} but arcs for X = {}",
            grid.x(),
            family.params().x
        )));
    }
    let n = grid.n();
    let vals = grid.values();
    let mask: Vec<bool> = par::map(n, |k| family.arc_of_node(k, n).is_some());
    let major = par::tree_sum(n, |k| if mask[k] { abs_pow(vals[k], p) } else { 0.0 }) / n as f64;
    let minor = par::tree_sum(n, |k| if mask[k] { 0.0 } else { abs_pow(vals[k], p) }) / n as f64;

    let mut edge_nodes: Vec<usize> = Vec::new();
    for arc in family.arcs() {
        for end in [arc.center - arc.radius, arc.center + arc.radius] {
            let t = end * n as f64;
            for k in [t.floor(), t.ceil()] {
                edge_nodes.push((k as i64).rem_euclid(n as i64) as usize);
            }
        }
    }
    edge_nodes.sort_unstable();
    edge_nodes.dedup();
    let boundary: f64 = edge_nodes.iter().map(|&k| abs_pow(vals[k], p)).sum::<f64>() / n as f64;
    let rel = |v: f64| if v > 0.0 { boundary / v } else { 0.0 };
    Ok((
        MomentEstimate::quadrature(major, p, n, rel(major), true),
        MomentEstimate::quadrature(minor, p, n, rel(minor), true),
    ))
}

/// `∫₀¹ |v(β)|^{2s} dβ = Σ_n c_s(n)²` where `c_s(n)` counts compositions of
/// `n` into `s` parts in `1..=X`. Requires `s <= 5`, `X <= 10^6`.
pub fn kernel_moment_even_exact(x: u64, s: u32) -> Result<MomentEstimate> {
    if s == 0 || x == 0 {
        return Err(Error::Parameter("kernel moment needs s >= 1 and X >= 1".into()));
    }
    if s > KERNEL_MAX_S || x > KERNEL_MAX_X {
        return Err(Error::Budget(format!(
            "kernel moment limited to s <= {KERNEL_MAX_S}, X <= {KERNEL_MAX_X}"
        )));
    }
    let lo = s as u64;
    let count = (s as u64 * x - lo + 1) as usize;
    let chunks = count.div_ceil(par::CHUNK);
    let chunk_range = |c: usize| {
        let start = lo + (c * par::CHUNK) as u64;
        let end = (lo + ((c + 1) * par::CHUNK).min(count) as u64).min(s as u64 * x + 1);
        start..end
    };
    if (s as u64) * x <= WIDE_COUNT_THRESHOLD {
        let partials: Vec<Option<u128>> = par::map(chunks, |c| {
            chunk_range(c).try_fold(0u128, |acc, n| {
                let r = compositions_u128(n as i64, s, x)?;
                acc.checked_add(r.checked_mul(r)?)
            })
        });
        if let Some(total) = partials.iter().try_fold(0u128, |acc, p| acc.checked_add((*p)?)) {
            return Ok(MomentEstimate::exact(2.0 * s as f64, BigUint::from(total)));
        }
    }
    let partials: Vec<BigUint> = par::map(chunks, |c| {
        chunk_range(c)
            .map(|n| {
                let r = compositions_big(n as i64, s, x);
                &r * &r
            })
            .sum()
    });
    Ok(MomentEstimate::exact(2.0 * s as f64, partials.into_iter().sum()))
}

/// `𝔖(X, P) = Σ_{q<=P} φ(q) q^{-p} (ln X − 2 ln q + 2γ − 1)^p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularSeriesValue {
    pub value: f64,
    pub x: u64,
    pub p_cap: f64,
    pub p: f64,
}

pub fn singular_series(x: u64, p_cap: f64, p: f64) -> Result<SingularSeriesValue> {
    if x < 2 {
        return Err(Error::Parameter(format!("X = {x} must be at least 2")));
    }
    if !p.is_finite() || p <= 0.0 {
        return Err(Error::Parameter(format!("exponent p = {p} must be positive")));
    }
    let qmax = floor_param(p_cap);
    if qmax == 0 {
        return Err(Error::Parameter(format!("cap P = {p_cap} below 1")));
    }
    let phi = sieve_totient(qmax as usize)?;
    let lx = (x as f64).ln();
    let mut terms = Vec::with_capacity(qmax as usize);
    for q in 1..=qmax {
        let base = lx - 2.0 * (q as f64).ln() + 2.0 * EULER_GAMMA - 1.0;
        if base <= 0.0 {
            return Err(Error::Domain(format!("non-positive base {base} at q = {q}; P = {p_cap} too large for X = {x}")));
        }
        terms.push(phi.get(q as usize) as f64 * (q as f64).powf(-p) * base.powf(p));
    }
    Ok(SingularSeriesValue { value: par::pairwise_sum(&terms), x, p_cap, p })
}

fn simpson(x: u64, width: f64, p: f64, m: usize) -> f64 {
    let h = width / m as f64;
    let sum = par::tree_sum(m + 1, |i| {
        let w = if i == 0 || i == m {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        w * abs_pow(kernel_eval(x, i as f64 * h), p)
    });
    sum * h / 3.0
}

/// `∫_{-w}^{w} |v(β)|^p dβ` by composite Simpson with interval doubling until
/// the relative change drops below `tol`. Returns `(value, intervals, rel)`.
pub fn kernel_arc_integral(x: u64, half_width: f64, p: f64, tol: f64) -> Result<(f64, usize, f64)> {
    check_quadrature_args(p, tol)?;
    if !(half_width > 0.0 && half_width <= 0.5) {
        return Err(Error::Parameter(format!("half width {half_width} outside (0, 1/2]")));
    }
    // Start with ~16 intervals per oscillation of v.
    let osc = (half_width * x as f64).ceil().max(1.0) as usize;
    let mut m = (16 * osc).next_power_of_two().max(16);
    let mut value = 2.0 * simpson(x, half_width, p, m);
    let mut rel = 1.0;
    while m < KERNEL_INTERVALS_CAP {
        m *= 2;
        let next = 2.0 * simpson(x, half_width, p, m);
        rel = if next == 0.0 { 0.0 } else { ((next - value) / next).abs() };
        value = next;
        if rel < tol {
            break;
        }
    }
    Ok((value, m, rel))
}

/// Major-arc main-term prediction `𝔖(X, X^ν) ∫_{|β|<=P/X} |v(β)|^p dβ`.
pub fn major_arc_prediction(x: u64, nu: f64, p: f64, tol: f64) -> Result<MomentEstimate> {
    let params = ArcParams::new(x, nu)?;
    if !(p > 2.0) {
        return Err(Error::Parameter(format!("prediction needs p > 2, got {p}")));
    }
    let series = singular_series(x, params.p, p)?;
    let (kernel, m, rel) = kernel_arc_integral(x, params.p / x as f64, p, tol)?;
    Ok(MomentEstimate::quadrature(series.value * kernel, p, m, rel, rel < tol))
}
