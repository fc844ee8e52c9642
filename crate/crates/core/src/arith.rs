//! Integer substrate: divisor and totient sieves, reduced fractions, Farey
//! enumeration, best rational approximation and restricted compositions.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Largest table length the sieves accept (2^28 entries, ~1 GiB of `u32`).
pub const MAX_TABLE_LEN: usize = 1 << 28;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Above this value of `s * X` composition counts go straight to big integers.
pub const WIDE_COUNT_THRESHOLD: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Divisor,
    Totient,
}

/// Sieved values of an arithmetic function on `1..=len`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArithmeticTable {
    kind: TableKind,
    // values[0] is unused and always zero.
    values: Vec<u32>,
}

impl ArithmeticTable {
    pub fn kind(&self) -> TableKind {
        self.kind
    }

    /// Number of entries `X`.
    pub fn len(&self) -> usize {
        self.values.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Value at `n`, `1 <= n <= X`.
    pub fn get(&self, n: usize) -> u32 {
        assert!(n >= 1 && n <= self.len(), "index {n} outside 1..={}", self.len());
        self.values[n]
    }

    /// Values for `n = 1..=X`.
    pub fn values(&self) -> &[u32] {
        &self.values[1..]
    }

    /// Sum of all values, exact.
    pub fn total(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }

    /// Sum of squared values, exact.
    pub fn sum_of_squares(&self) -> u128 {
        self.values.iter().map(|&v| (v as u128) * (v as u128)).sum()
    }
}

fn check_len(x: usize) -> Result<()> {
    if x == 0 {
        return Err(Error::Size("table length must be at least 1".into()));
    }
    if x > MAX_TABLE_LEN {
        return Err(Error::Size(format!("table length {x} exceeds ceiling {MAX_TABLE_LEN}")));
    }
    Ok(())
}

/// Divisor counts `τ(1..=x)` by the additive multiple sieve.
pub fn sieve_divisor(x: usize) -> Result<ArithmeticTable> {
    check_len(x)?;
    let mut values = vec![0u32; x + 1];
    for d in 1..=x {
        for m in (d..=x).step_by(d) {
            values[m] += 1;
        }
    }
    Ok(ArithmeticTable { kind: TableKind::Divisor, values })
}

/// Euler totients `φ(1..=q)`.
pub fn sieve_totient(q: usize) -> Result<ArithmeticTable> {
    check_len(q)?;
    let mut values: Vec<u32> = (0..=q as u32).collect();
    for p in 2..=q {
        if values[p] as usize == p {
            for m in (p..=q).step_by(p) {
                values[m] -= values[m] / p as u32;
            }
        }
    }
    Ok(ArithmeticTable { kind: TableKind::Totient, values })
}

/// A reduced fraction `a/q` with `1 <= a <= q`.
///
/// The residue `0 mod 1` is stored as `1/1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    a: u64,
    q: u64,
}

impl Fraction {
    pub fn new(a: u64, q: u64) -> Result<Self> {
        if q == 0 || a == 0 || a > q {
            return Err(Error::Parameter(format!("fraction {a}/{q} needs 1 <= a <= q")));
        }
        if a.gcd(&q) != 1 {
            return Err(Error::Parameter(format!("fraction {a}/{q} is not reduced")));
        }
        Ok(Fraction { a, q })
    }

    /// Reduce an arbitrary residue `a/q` (any integer `a`) into canonical form.
    pub fn from_residue(a: i64, q: u64) -> Self {
        assert!(q > 0);
        let r = a.rem_euclid(q as i64) as u64;
        let g = r.gcd(&q);
        let (a, q) = (r / g, q / g);
        if a == 0 {
            Fraction { a: 1, q: 1 }
        } else {
            Fraction { a, q }
        }
    }

    pub fn numer(&self) -> u64 {
        self.a
    }

    pub fn denom(&self) -> u64 {
        self.q
    }

    pub fn value(&self) -> f64 {
        self.a as f64 / self.q as f64
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        ((self.a as u128) * (other.q as u128)).cmp(&((other.a as u128) * (self.q as u128)))
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.a, self.q)
    }
}

/// `⌊p⌋` with a relative slack of 1e-12, so that `X^ν` landing a hair below an
/// integer (e.g. `65536^0.25`) still counts that integer.
pub fn floor_param(p: f64) -> u64 {
    if p <= 0.0 {
        return 0;
    }
    (p * (1.0 + 1e-12)).floor() as u64
}

/// All reduced `a/q` with `q <= ⌊P⌋`, `1 <= a <= q`, sorted by value.
pub fn farey(p: f64) -> Result<Vec<Fraction>> {
    if !(p >= 1.0) {
        return Err(Error::EmptyFamily(format!("order P = {p} is below 1")));
    }
    let qmax = floor_param(p);
    let mut out = Vec::new();
    for q in 1..=qmax {
        for a in 1..=q {
            if a.gcd(&q) == 1 {
                out.push(Fraction { a, q });
            }
        }
    }
    out.sort();
    Ok(out)
}

/// A reduced fraction approximating a phase, with `delta = |qα − a|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RationalApprox {
    pub fraction: Fraction,
    pub delta: f64,
    /// The reduced phase the approximation was built for.
    pub alpha: f64,
    /// Denominator bound `Q` supplied at construction; `delta <= 1/Q`.
    pub bound: u64,
}

/// Reduce a real phase into `[0, 1)`.
pub fn reduce_phase(alpha: f64) -> f64 {
    let r = alpha - alpha.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

fn approx_delta(alpha: f64, a: u64, q: u64) -> f64 {
    (q as f64).mul_add(alpha, -(a as f64)).abs()
}

/// Choose among candidate `(a, q)` pairs: minimal delta, ties within float
/// noise go to the smallest `q` then the smallest `a`.
fn select_candidate(alpha: f64, bound: u64, cands: impl IntoIterator<Item = (u64, u64)>) -> RationalApprox {
    let cands: Vec<(u64, u64, f64)> = cands
        .into_iter()
        .map(|(a, q)| (a, q, approx_delta(alpha, a, q)))
        .collect();
    let best = cands.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let tie = 8.0 * f64::EPSILON * bound as f64;
    let cap = 1.0 / bound as f64;
    let &(a, q, delta) = cands
        .iter()
        .filter(|c| c.2 <= best + tie && (c.2 <= cap || c.2 == best))
        .min_by(|x, y| x.1.cmp(&y.1).then(x.0.cmp(&y.0)))
        .expect("candidate set is never empty");
    RationalApprox { fraction: Fraction::from_residue(a as i64, q), delta, alpha, bound }
}

/// Exhaustive search over every `q <= bound`.
fn exhaustive_approx(alpha: f64, bound: u64) -> RationalApprox {
    select_candidate(alpha, bound, (1..=bound).map(|q| ((q as f64 * alpha).round() as u64, q)))
}

/// Best approximation from the continued-fraction expansion of `alpha`.
///
/// `alpha` is rounded to a multiple of 2^-64 and expanded with exact integer
/// Euclid steps. Candidates are every convergent with denominator `<= bound`
/// together with the largest admissible semiconvergent of the next block.
pub fn continued_fraction_approx(alpha: f64, bound: u64) -> RationalApprox {
    let alpha = reduce_phase(alpha);
    let bound = bound.max(1);
    let scale: u128 = 1 << 64;
    let mut num = (alpha * scale as f64).round() as u128;
    let mut den = scale;
    if num >= den {
        num = 0;
    }
    // Convergents h/k with the standard seed h_{-1}/k_{-1} = 1/0, h_{-2}/k_{-2} = 0/1.
    let (mut h_prev, mut k_prev): (u128, u128) = (1, 0);
    let (mut h_prev2, mut k_prev2): (u128, u128) = (0, 1);
    let mut cands: Vec<(u64, u64)> = Vec::new();
    let b = bound as u128;
    loop {
        if den == 0 {
            break;
        }
        let a_i = num / den;
        let (n2, d2) = (den, num % den);
        let h = a_i * h_prev + h_prev2;
        let k = a_i * k_prev + k_prev2;
        if k > b {
            // Largest semiconvergent of this block still within the bound.
            if k_prev > 0 {
                let j = (b - k_prev2) / k_prev;
                if j >= 1 {
                    cands.push(((h_prev2 + j * h_prev) as u64, (k_prev2 + j * k_prev) as u64));
                }
            }
            break;
        }
        cands.push((h as u64, k as u64));
        h_prev2 = h_prev;
        k_prev2 = k_prev;
        h_prev = h;
        k_prev = k;
        num = n2;
        den = d2;
    }
    select_candidate(alpha, bound, cands)
}

/// Best `a/q` with `q <= bound` minimising `|qα − a|`.
///
/// Ties (within floating-point noise) go to the smallest `q`, then the
/// smallest `a`. Bounds up to 64 are searched exhaustively; larger bounds use
/// the continued-fraction expansion. A bound of 0 is treated as 1.
pub fn best_rational_approx(alpha: f64, bound: u64) -> RationalApprox {
    let alpha = reduce_phase(alpha);
    let bound = bound.max(1);
    if bound <= 64 {
        exhaustive_approx(alpha, bound)
    } else {
        continued_fraction_approx(alpha, bound)
    }
}

fn binom_u128(m: i128, k: u32) -> Option<u128> {
    if m < k as i128 || m < 0 {
        return Some(0);
    }
    let m = m as u128;
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = c.checked_mul(m - i)? / (i + 1);
    }
    Some(c)
}

fn binom_big(m: i128, k: u32) -> BigUint {
    if m < k as i128 || m < 0 {
        return BigUint::zero();
    }
    let m = m as u128;
    let mut c = BigUint::one();
    for i in 0..k as u128 {
        c = c * BigUint::from(m - i) / BigUint::from(i + 1);
    }
    c
}

/// Fixed-width composition count; `None` on overflow.
pub(crate) fn compositions_u128(n: i64, s: u32, x: u64) -> Option<u128> {
    let (n, x) = (n as i128, x as i128);
    if n < s as i128 || n > s as i128 * x {
        return Some(0);
    }
    let (mut pos, mut neg) = (0u128, 0u128);
    let jmax = ((n - s as i128) / x).min(s as i128) as u32;
    for j in 0..=jmax {
        let term = binom_u128(s as i128, j)?.checked_mul(binom_u128(n - j as i128 * x - 1, s - 1)?)?;
        if j % 2 == 0 {
            pos = pos.checked_add(term)?;
        } else {
            neg = neg.checked_add(term)?;
        }
    }
    pos.checked_sub(neg)
}

pub(crate) fn compositions_big(n: i64, s: u32, x: u64) -> BigUint {
    let (n, x) = (n as i128, x as i128);
    if n < s as i128 || n > s as i128 * x {
        return BigUint::zero();
    }
    let (mut pos, mut neg) = (BigUint::zero(), BigUint::zero());
    let jmax = ((n - s as i128) / x).min(s as i128) as u32;
    for j in 0..=jmax {
        let term = binom_big(s as i128, j) * binom_big(n - j as i128 * x - 1, s - 1);
        if j % 2 == 0 {
            pos += term;
        } else {
            neg += term;
        }
    }
    pos - neg
}

/// Number of `(x_1, …, x_s)` with `1 <= x_i <= x` summing to `n`.
///
/// Inclusion–exclusion over binomials in exact arithmetic. Runs in `u128`
/// with checked operations and escalates to arbitrary width on overflow, or
/// directly when `s * x` exceeds [`WIDE_COUNT_THRESHOLD`].
pub fn restricted_compositions(n: i64, s: u32, x: u64) -> Result<BigUint> {
    if s == 0 || x == 0 {
        return Err(Error::Parameter("compositions need s >= 1 and X >= 1".into()));
    }
    if (s as u64).saturating_mul(x) <= WIDE_COUNT_THRESHOLD {
        if let Some(v) = compositions_u128(n, s, x) {
            return Ok(BigUint::from(v));
        }
    }
    Ok(compositions_big(n, s, x))
}

/// Number of lattice points `u*v <= x` by Dirichlet's hyperbola count.
pub fn hyperbola_divisor_sum(x: u64) -> u64 {
    let r = x.isqrt();
    let s: u64 = (1..=r).map(|u| x / u).sum();
    2 * s - r * r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_divisors(n: usize) -> u32 {
        (1..=n).filter(|d| n % d == 0).count() as u32
    }

    fn gcd_scan_phi(q: usize) -> u32 {
        (1..=q).filter(|&a| a.gcd(&q) == 1).count() as u32
    }

    #[test]
    fn divisor_sieve_examples() {
        assert_eq!(sieve_divisor(1).unwrap().values(), &[1]);
        assert_eq!(sieve_divisor(4).unwrap().values(), &[1, 2, 2, 3]);
        assert_eq!(sieve_divisor(12).unwrap().get(12), 6);
    }

    #[test]
    fn divisor_sieve_matches_trial_division() {
        let t = sieve_divisor(10_000).unwrap();
        for n in (1..=10_000).step_by(7) {
            assert_eq!(t.get(n), trial_divisors(n), "n = {n}");
        }
    }

    #[test]
    fn totient_examples() {
        let t = sieve_totient(9).unwrap();
        assert_eq!(t.get(1), 1);
        assert_eq!(t.get(6), 2);
        assert_eq!(t.get(9), 6);
        let t = sieve_totient(500).unwrap();
        for q in 1..=500 {
            assert_eq!(t.get(q), gcd_scan_phi(q));
        }
    }

    #[test]
    fn sieves_are_multiplicative() {
        let x = 3000;
        for t in [sieve_divisor(x).unwrap(), sieve_totient(x).unwrap()] {
            for m in 1..60usize {
                for n in 1..60usize {
                    if m.gcd(&n) == 1 && m * n <= x {
                        assert_eq!(t.get(m * n), t.get(m) * t.get(n));
                    }
                }
            }
        }
    }

    #[test]
    fn sieve_size_errors() {
        assert!(matches!(sieve_divisor(0), Err(Error::Size(_))));
        assert!(matches!(sieve_totient(MAX_TABLE_LEN + 1), Err(Error::Size(_))));
    }

    #[test]
    fn divisor_summatory_matches_hyperbola_count() {
        let t = sieve_divisor(10_000).unwrap();
        let mut running = 0u64;
        for x in 1..=10_000usize {
            running += t.get(x) as u64;
            assert_eq!(running, hyperbola_divisor_sum(x as u64), "X = {x}");
        }
    }

    #[test]
    fn farey_examples() {
        let f1 = farey(1.0).unwrap();
        assert_eq!(f1, vec![Fraction::new(1, 1).unwrap()]);
        let f3: Vec<String> = farey(3.0).unwrap().iter().map(|f| f.to_string()).collect();
        assert_eq!(f3, ["1/3", "1/2", "2/3", "1/1"]);
        assert_eq!(farey(5.0).unwrap().len(), 10);
        assert!(matches!(farey(0.5), Err(Error::EmptyFamily(_))));
    }

    #[test]
    fn farey_strictly_increasing_with_totient_count() {
        let phi = sieve_totient(40).unwrap();
        for p in 1..=40u64 {
            let f = farey(p as f64 + 0.5).unwrap();
            assert!(f.windows(2).all(|w| w[0] < w[1]));
            let expected: u64 = (1..=p as usize).map(|q| phi.get(q) as u64).sum();
            assert_eq!(f.len() as u64, expected);
        }
    }

    #[test]
    fn floor_param_absorbs_rounding() {
        assert_eq!(floor_param(65536f64.powf(0.25)), 16);
        assert_eq!(floor_param(4096f64.powf(0.25)), 8);
        assert_eq!(floor_param(2.512), 2);
    }

    #[test]
    fn rational_approx_examples() {
        let r = best_rational_approx(0.5, 3);
        assert_eq!(r.fraction, Fraction::new(1, 2).unwrap());
        assert_eq!(r.delta, 0.0);

        let r = best_rational_approx(0.30, 7);
        assert_eq!(r.fraction, Fraction::new(1, 3).unwrap());
        assert!((r.delta - 0.1).abs() < 1e-12);

        let r = best_rational_approx(0.14159265, 10);
        assert_eq!(r.fraction, Fraction::new(1, 7).unwrap());
        assert!((r.delta - 0.00885145).abs() < 1e-7);
    }

    #[test]
    fn rational_approx_near_zero_and_one() {
        let r = best_rational_approx(0.999, 10);
        assert_eq!(r.fraction, Fraction::new(1, 1).unwrap());
        let r = best_rational_approx(1e-9, 1000);
        assert_eq!(r.fraction, Fraction::new(1, 1).unwrap());
        assert!(r.delta <= 1e-9 + 1e-18);
        let r = best_rational_approx(-0.25, 8);
        assert_eq!(r.fraction, Fraction::new(3, 4).unwrap());
    }

    #[test]
    fn continued_fraction_large_bounds() {
        let pi_frac = std::f64::consts::PI - 3.0;
        let r = continued_fraction_approx(pi_frac, 200);
        assert_eq!((r.fraction.numer(), r.fraction.denom()), (16, 113));
        let r = continued_fraction_approx(pi_frac, 110);
        // 113 is out of range, so the previous convergent wins.
        assert_eq!((r.fraction.numer(), r.fraction.denom()), (15, 106));
    }

    #[test]
    fn compositions_examples() {
        let c = |n, s, x| restricted_compositions(n, s, x).unwrap();
        assert_eq!(c(2, 2, 5), BigUint::from(1u32));
        assert_eq!(c(4, 2, 2), BigUint::from(1u32));
        assert_eq!(c(5, 2, 4), BigUint::from(4u32));
        assert_eq!(c(1, 2, 4), BigUint::zero());
        assert_eq!(c(9, 2, 4), BigUint::zero());
        assert_eq!(c(-3, 2, 4), BigUint::zero());
        assert!(restricted_compositions(3, 0, 4).is_err());
    }

    #[test]
    fn compositions_total_count_identity() {
        for s in 1..=4u32 {
            for x in 1..=30u64 {
                let total: BigUint = (s as i64..=(s as u64 * x) as i64)
                    .map(|n| restricted_compositions(n, s, x).unwrap())
                    .sum();
                assert_eq!(total, BigUint::from(x).pow(s), "s = {s}, X = {x}");
            }
        }
    }

    #[test]
    fn wide_path_agrees_with_fixed_width() {
        for (n, s, x) in [(50i64, 3u32, 40u64), (1_000_000, 4, 400_000), (7, 5, 3)] {
            assert_eq!(BigUint::from(compositions_u128(n, s, x).unwrap()), compositions_big(n, s, x));
        }
        // s * X over the threshold takes the wide path directly.
        let v = restricted_compositions(3_000_000, 3, 2_000_000).unwrap();
        assert_eq!(v, compositions_big(3_000_000, 3, 2_000_000));
    }
}
