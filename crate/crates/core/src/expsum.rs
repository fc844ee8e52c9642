//! Evaluation of `M_f(α) = Σ_{n<=X} f(n) e(nα)` and the Dirichlet kernel,
//! together with the explicit pointwise bounds used on the arcs.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::{reduce_phase, ArithmeticTable, Fraction, RationalApprox, EULER_GAMMA};
use crate::error::{Error, Result};
use crate::par;

/// Distances to the nearest integer below this are treated as resonant.
pub const RESONANCE_EPS: f64 = 1e-12;

/// A phase reduced into `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PhasePoint(f64);

impl PhasePoint {
    pub fn new(alpha: f64) -> Self {
        PhasePoint(reduce_phase(alpha))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<f64> for PhasePoint {
    fn from(alpha: f64) -> Self {
        PhasePoint::new(alpha)
    }
}

/// Fractional part of `n * alpha`, using the FMA residual to recover the bits
/// lost in the product. `n` must be exactly representable.
pub fn frac_product(n: f64, alpha: f64) -> f64 {
    let t = n * alpha;
    let err = n.mul_add(alpha, -t);
    let f = (t - t.floor()) + err;
    reduce_phase(f)
}

/// `e(f) = exp(2πi f)`, exact at quarter turns.
pub fn unit(f: f64) -> Complex64 {
    let f = reduce_phase(f);
    if f == 0.0 {
        Complex64::new(1.0, 0.0)
    } else if f == 0.25 {
        Complex64::new(0.0, 1.0)
    } else if f == 0.5 {
        Complex64::new(-1.0, 0.0)
    } else if f == 0.75 {
        Complex64::new(0.0, -1.0)
    } else {
        let (s, c) = (2.0 * PI * f).sin_cos();
        Complex64::new(c, s)
    }
}

/// Distance from `x` to the nearest integer.
pub fn dist_to_int(x: f64) -> f64 {
    let f = reduce_phase(x);
    f.min(1.0 - f)
}

/// `Σ_{n<=X} f(n) e(nα)` by direct pairwise summation.
pub fn eval_direct(table: &ArithmeticTable, alpha: PhasePoint) -> Complex64 {
    let vals = table.values();
    let a = alpha.value();
    par::tree_sum_complex(vals.len(), |i| {
        let n = (i + 1) as f64;
        unit(frac_product(n, a)) * vals[i] as f64
    })
}

/// The hyperbola split `M_τ(α) = 2T(α) + E(α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolaParts {
    /// Pairs `u < v`, `uv <= X`.
    pub t: Complex64,
    /// Diagonal `u = v`.
    pub e: Complex64,
    pub m: Complex64,
}

/// `M_τ(α)` in `O(√X)` work: for each `u <= √X` the inner sum over
/// `u < v <= X/u` is a geometric series handled by [`kernel_eval`].
pub fn eval_hyperbola(x: u64, alpha: PhasePoint) -> HyperbolaParts {
    let a = alpha.value();
    let r = x.isqrt() as usize;
    let t = par::tree_sum_complex(r, |i| {
        let u = (i + 1) as u64;
        let len = x / u - u;
        if len == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let uf = u as f64;
        let beta = frac_product(uf, a);
        unit(frac_product(uf * uf, a)) * kernel_eval(len, beta)
    });
    let e = par::tree_sum_complex(r, |i| {
        let u = (i + 1) as f64;
        unit(frac_product(u * u, a))
    });
    HyperbolaParts { t, e, m: t * 2.0 + e }
}

/// `sin(π·L·b)` for `|b| <= 1/2`, with the argument reduced mod 2 exactly.
fn sin_pi_product(l: f64, b: f64) -> f64 {
    let t = l * b;
    let err = l.mul_add(b, -t);
    let k = t.round();
    let r = (t - k) + err;
    let s = (PI * r).sin();
    if (k as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

/// Dirichlet kernel `v(β) = Σ_{n<=X} e(nβ)` in closed form.
///
/// Uses `v(β) = e((X+1)β/2) · sin(πXβ) / sin(πβ)`; near-integer `β` falls back
/// to the second-order series and integer `β` returns exactly `X`.
pub fn kernel_eval(x: u64, beta: f64) -> Complex64 {
    let mut b = reduce_phase(beta);
    if b >= 0.5 {
        b -= 1.0;
    }
    let l = x as f64;
    if b == 0.0 {
        return Complex64::new(l, 0.0);
    }
    let ratio = if b.abs() < RESONANCE_EPS {
        let pb = PI * b;
        l * (1.0 - (l * l - 1.0) * pb * pb / 6.0)
    } else {
        sin_pi_product(l, b) / (PI * b).sin()
    };
    unit(frac_product(l + 1.0, 0.5 * b)) * ratio
}

/// `min(X, 1/‖β‖)`, equal to `X` at integers.
pub fn kernel_envelope(x: u64, beta: f64) -> f64 {
    let d = dist_to_int(beta);
    if d == 0.0 {
        x as f64
    } else {
        (x as f64).min(1.0 / d)
    }
}

/// `M_f` sampled at the phases `k/N`, `k = 0..N`.
#[derive(Debug, Clone)]
pub struct GridEvaluation {
    n: usize,
    coeffs: Vec<f64>,
    values: Vec<Complex64>,
}

fn check_pow2(n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!("grid size {n} is not a power of two")));
    }
    Ok(())
}

/// Inverse (positive-exponent) unnormalised DFT of `f(n)·twist(n)`, `n = 1..=X`.
fn transform(coeffs: &[f64], n: usize, twist: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (i, &c) in coeffs.iter().enumerate() {
        buf[i + 1] = twist(i + 1) * c;
    }
    let fft = FftPlanner::<f64>::new().plan_fft_inverse(n);
    fft.process(&mut buf);
    buf
}

/// Sample `M_f` on the `N`-point grid with one transform. `N` must be a power
/// of two strictly larger than `X`.
pub fn grid_eval(table: &ArithmeticTable, n: usize) -> Result<GridEvaluation> {
    check_pow2(n)?;
    let x = table.len();
    if n <= x {
        return Err(Error::Aliasing { n, x });
    }
    let coeffs: Vec<f64> = table.values().iter().map(|&v| v as f64).collect();
    let values = transform(&coeffs, n, |_| Complex64::new(1.0, 0.0));
    Ok(GridEvaluation { n, coeffs, values })
}

impl GridEvaluation {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Sum length `X`.
    pub fn x(&self) -> usize {
        self.coeffs.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at the phase `k/N`.
    pub fn value(&self, k: usize) -> Complex64 {
        self.values[k]
    }

    pub fn phase(&self, k: usize) -> f64 {
        k as f64 / self.n as f64
    }

    /// The same sum on the `2N` grid. Even nodes are reused; odd nodes come
    /// from one size-`N` transform of the coefficients twisted by `e(n/2N)`.
    pub fn refine(&self) -> GridEvaluation {
        let n = self.n;
        let step = 1.0 / (2 * n) as f64;
        let odd = transform(&self.coeffs, n, |m| unit(frac_product(m as f64, step)));
        let mut values = Vec::with_capacity(2 * n);
        for (e, o) in self.values.iter().zip(odd) {
            values.push(*e);
            values.push(o);
        }
        GridEvaluation { n: 2 * n, coeffs: self.coeffs.clone(), values }
    }

    /// Riemann mean `(1/N) Σ_k |M(k/N)|^p`.
    pub fn power_mean(&self, p: f64) -> f64 {
        let vals = &self.values;
        par::tree_sum(self.n, |k| abs_pow(vals[k], p)) / self.n as f64
    }

    /// Same as [`power_mean`](Self::power_mean) but always sequential.
    pub fn power_mean_seq(&self, p: f64) -> f64 {
        let vals = &self.values;
        par::tree_sum_seq(self.n, |k| abs_pow(vals[k], p)) / self.n as f64
    }
}

/// `|z|^p`, squaring exactly for `p = 2`.
pub fn abs_pow(z: Complex64, p: f64) -> f64 {
    let sq = z.norm_sqr();
    if p == 2.0 {
        sq
    } else if p == 4.0 {
        sq * sq
    } else {
        sq.powf(0.5 * p)
    }
}

/// `X log(2Xq) (1/q + X^{-1/2} + q/X)` with the natural logarithm.
pub fn prop_rhs(x: u64, q: u64) -> f64 {
    let (xf, qf) = (x as f64, q as f64);
    xf * (2.0 * xf * qf).ln() * (1.0 / qf + 1.0 / xf.sqrt() + qf / xf)
}

/// The triangle-inequality sum `Σ_{u<=√X} min(X/u, ‖αu‖^{-1})` at the
/// approximation's phase, paired with the pointwise bound for its denominator.
pub fn minsum_bound(x: u64, approx: &RationalApprox) -> (f64, f64) {
    let alpha = approx.alpha;
    let xf = x as f64;
    let r = x.isqrt() as usize;
    let minsum = par::tree_sum(r, |i| {
        let u = (i + 1) as f64;
        let d = dist_to_int(frac_product(u, alpha));
        if d < RESONANCE_EPS {
            xf / u
        } else {
            (xf / u).min(1.0 / d)
        }
    });
    (minsum, prop_rhs(x, approx.fraction.denom()))
}

/// `q^{-1}(ln(X/q²) + 2γ − 1)`, the major-arc coefficient of `v(α − a/q)`.
pub fn major_coefficient(x: u64, q: u64) -> f64 {
    let (xf, qf) = (x as f64, q as f64);
    ((xf / (qf * qf)).ln() + 2.0 * EULER_GAMMA - 1.0) / qf
}

/// Exact rational-phase divisor sum and its main term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalTauSum {
    pub exact: Complex64,
    pub main: f64,
    pub residual: Complex64,
}

/// `Σ_{n<=X} τ(n) e(an/q)` from the table, against `(X/q)(ln(X/q²) + 2γ − 1)`.
pub fn rational_tau_sum(table: &ArithmeticTable, frac: Fraction) -> RationalTauSum {
    let (a, q) = (frac.numer(), frac.denom());
    let roots: Vec<Complex64> = (0..q).map(|j| unit(((j * a) % q) as f64 / q as f64)).collect();
    let vals = table.values();
    let exact = par::tree_sum_complex(vals.len(), |i| {
        roots[((i as u64) + 1) as usize % q as usize] * vals[i] as f64
    });
    let x = table.len() as u64;
    let main = x as f64 * major_coefficient(x, q);
    RationalTauSum { exact, main, residual: exact - main }
}
