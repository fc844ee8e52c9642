//! Major/minor arc dissection of the circle `ℝ/ℤ`.
//!
//! Arcs are taken on the circle, so the arc around `1/1` wraps and covers a
//! neighbourhood of `0` as well as of `1`.

use num_integer::Integer;

use crate::arith::{best_rational_approx, farey, floor_param, Fraction, RationalApprox};
use crate::error::{Error, Result};

pub const DEFAULT_NU: f64 = 0.2;
pub const MAX_NU: f64 = 0.25;
pub const MIN_ARC_X: u64 = 16;

/// `(X, ν)` with `P = X^ν`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArcParams {
    pub x: u64,
    pub nu: f64,
    pub p: f64,
}

impl ArcParams {
    pub fn new(x: u64, nu: f64) -> Result<Self> {
        if !(nu > 0.0 && nu <= MAX_NU) {
            return Err(Error::Parameter(format!("nu = {nu} outside (0, {MAX_NU}]")));
        }
        if x < MIN_ARC_X {
            return Err(Error::Parameter(format!("X = {x} below {MIN_ARC_X}")));
        }
        Ok(ArcParams { x, nu, p: (x as f64).powf(nu) })
    }

    /// Largest admissible denominator `⌊P⌋`.
    pub fn qmax(&self) -> u64 {
        floor_param(self.p)
    }

    /// Denominator bound `⌈X/P⌉` for the Dirichlet witness of a minor phase.
    ///
    /// Taking the ceiling keeps `1/Q <= P/X`, so a witness with `q <= P` would
    /// already lie on a major arc.
    pub fn dirichlet_bound(&self) -> u64 {
        (self.x as f64 / self.p).ceil() as u64
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorArc {
    pub fraction: Fraction,
    pub center: f64,
    /// `P/(qX)`.
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArcFamily {
    params: ArcParams,
    arcs: Vec<MajorArc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArcTag {
    Major(Fraction),
    Minor,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification {
    pub tag: ArcTag,
    pub witness: RationalApprox,
}

impl Classification {
    pub fn is_major(&self) -> bool {
        matches!(self.tag, ArcTag::Major(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyChecks {
    pub disjoint: bool,
    /// Measure of the union on the circle.
    pub measure: f64,
    /// Measure with the `1/1` arc clipped to `[0, 1]` as a one-sided interval.
    pub measure_unwrapped: f64,
}

/// Reduced circle distance numerator between `a/q` and `b/r`, over `q·r`.
fn circle_numerator(f: Fraction, g: Fraction) -> u128 {
    let (a, q) = (f.numer() as u128, f.denom() as u128);
    let (b, r) = (g.numer() as u128, g.denom() as u128);
    let m = q * r;
    let d = (a * r).abs_diff(b * q) % m;
    d.min(m - d)
}

fn arcs_overlap(params: &ArcParams, f: Fraction, g: Fraction) -> bool {
    // |a/q − b/r|_circle > P/(qX) + P/(rX)  ⇔  d·X > P·(q + r)
    let d = circle_numerator(f, g);
    let lhs = d as f64 * params.x as f64;
    let rhs = params.p * (f.denom() + g.denom()) as f64;
    lhs <= rhs
}

fn find_overlap(params: &ArcParams, arcs: &[MajorArc]) -> Option<(Fraction, Fraction)> {
    for (i, s) in arcs.iter().enumerate() {
        for t in &arcs[i + 1..] {
            if arcs_overlap(params, s.fraction, t.fraction) {
                return Some((s.fraction, t.fraction));
            }
        }
    }
    None
}

/// One arc of radius `P/(qX)` per Farey fraction of order `⌊P⌋`.
pub fn build_arc_family(x: u64, nu: f64) -> Result<ArcFamily> {
    let params = ArcParams::new(x, nu)?;
    let arcs: Vec<MajorArc> = farey(params.p)?
        .into_iter()
        .map(|fraction| MajorArc {
            fraction,
            center: fraction.value(),
            radius: params.p / (fraction.denom() as f64 * x as f64),
        })
        .collect();
    if let Some((f, g)) = find_overlap(&params, &arcs) {
        return Err(Error::Overlap { first: f.to_string(), second: g.to_string() });
    }
    Ok(ArcFamily { params, arcs })
}

impl ArcFamily {
    pub fn params(&self) -> &ArcParams {
        &self.params
    }

    pub fn arcs(&self) -> &[MajorArc] {
        &self.arcs
    }

    fn major_witness(&self, fraction: Fraction, delta: f64, alpha: f64) -> Classification {
        Classification {
            tag: ArcTag::Major(fraction),
            witness: RationalApprox { fraction, delta, alpha, bound: self.params.qmax() },
        }
    }

    fn minor(&self, alpha: f64) -> Classification {
        let witness = best_rational_approx(alpha, self.params.dirichlet_bound());
        Classification { tag: ArcTag::Minor, witness }
    }

    /// Classify a phase. Scans every `q <= P` for the nearest `a` and tests
    /// `|qα − a| <= P/X`; arcs are disjoint so at most one matches.
    pub fn classify(&self, alpha: f64) -> Classification {
        let alpha = crate::arith::reduce_phase(alpha);
        let limit = self.params.p / self.params.x as f64;
        for q in 1..=self.params.qmax() {
            let a = (q as f64 * alpha).round() as i64;
            if q != 1 && (a.rem_euclid(q as i64) as u64).gcd(&q) != 1 {
                continue;
            }
            let delta = (q as f64).mul_add(alpha, -(a as f64)).abs();
            if delta <= limit {
                return self.major_witness(Fraction::from_residue(a, q), delta, alpha);
            }
        }
        self.minor(alpha)
    }

    /// Which arc (if any) holds the grid node `k/n`, decided with integer
    /// numerators: `|qk − an|·X <= P·n`.
    pub fn arc_of_node(&self, k: usize, n: usize) -> Option<Fraction> {
        let (k, n) = (k as u128, n as u128);
        for q in 1..=self.params.qmax() {
            let q128 = q as u128;
            let a = (2 * q128 * k + n) / (2 * n);
            if q != 1 && ((a % q128) as u64).gcd(&q) != 1 {
                continue;
            }
            let d = (q128 * k).abs_diff(a * n);
            if d as f64 * self.params.x as f64 <= self.params.p * n as f64 {
                return Some(Fraction::from_residue(a as i64, q));
            }
        }
        None
    }

    /// Classification of the grid node `k/n` with its witness.
    pub fn classify_node(&self, k: usize, n: usize) -> Classification {
        let alpha = k as f64 / n as f64;
        match self.arc_of_node(k, n) {
            Some(f) => {
                let q = f.denom() as f64;
                let delta = q.mul_add(alpha, -(q * alpha).round()).abs();
                self.major_witness(f, delta, alpha)
            }
            None => self.minor(alpha),
        }
    }

    /// Pairwise disjointness and measure of the family.
    pub fn checks(&self) -> FamilyChecks {
        family_checks(self)
    }
}

/// Disjointness verdict (exact numerators) and total measure.
pub fn family_checks(family: &ArcFamily) -> FamilyChecks {
    let disjoint = find_overlap(&family.params, &family.arcs).is_none();
    let measure: f64 = family.arcs.iter().map(|a| 2.0 * a.radius).sum();
    let one_sided: f64 = family.arcs.iter().filter(|a| a.fraction.denom() == 1).map(|a| a.radius).sum();
    FamilyChecks { disjoint, measure, measure_unwrapped: measure - one_sided }
}
