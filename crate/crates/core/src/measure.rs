//! Dominated measure-pair models.
//!
//! A [`MeasurePair`] is a pair `(P, R)` of probability measures with
//! densities `p`, `r` against the dominating measure `μ = P + R`. The
//! partition machinery only ever asks two questions of a pair:
//!
//! 1. the masses `(P, R)` of a likelihood-ratio level set
//!    `{x : p(x)/r(x) ∈ I}` for a [`RatioInterval`] `I`, and
//! 2. the restricted integral `∫_{ρ ∈ I} f(ρ) r dμ` for a generator `f`.
//!
//! Points with `p = r = 0` are `μ`-null and excluded. The ratio atom at
//! `+∞` (P-mass where `r = 0`) is tracked explicitly so that the
//! `f'(∞)·P(r=0)` convention is applied exactly.
//!
//! Four models are provided: finite discrete pairs, piecewise-constant
//! grid pairs (a discrete pair of cell masses), Gaussian pairs (level
//! sets solved in closed form from the log-ratio quadratic, masses from
//! the normal CDF, restricted integrals by adaptive quadrature), and
//! capped countable pairs with explicit truncation reporting.

use crate::divergence::DivergenceValue;
use crate::ext::ExtReal;
use crate::generator::Generator;
use crate::interval::RatioInterval;
use crate::quad;
use crate::{Error, Result};
use statrs::distribution::{ContinuousCDF, Normal};
use std::sync::Arc;

/// Tolerance on `Σ p_i = 1` for discrete-style constructors.
pub const MASS_SUM_TOL: f64 = 1e-10;

/// Default absolute tolerance for Gaussian restricted integrals.
pub const DEFAULT_QUAD_TOL: f64 = 1e-10;

/// Default enumeration cap for countable pairs.
pub const DEFAULT_COUNTABLE_CAP: u64 = 1_000_000;

/// Accuracy budget assumed for normal-CDF mass queries.
const GAUSS_MASS_TOL: f64 = 1e-12;

/// Half-width of the Gaussian integration window, in standard deviations.
const SUPPORT_SIGMAS: f64 = 40.0;

const MAX_QUAD_SEGMENTS: usize = 100_000;

// ---------------------------------------------------------------------------
// Ratio atoms (discrete, grid and countable models)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Atom {
    ratio: f64,
    p: f64,
    r: f64,
}

/// Point masses indexed by their likelihood ratio, sorted, with prefix and
/// suffix sums. Interval masses are telescoping differences; the side with
/// the smaller operands is used so that tail masses far below `ulp(1)` are
/// not cancelled away, and ranges still inside the cancellation zone are
/// re-summed directly.
#[derive(Debug, Clone)]
struct AtomTable {
    atoms: Vec<Atom>,
    p_prefix: Vec<f64>,
    r_prefix: Vec<f64>,
    p_suffix: Vec<f64>,
    r_suffix: Vec<f64>,
    p_deficit: f64,
    r_deficit: f64,
}

impl AtomTable {
    fn build(entries: &[(f64, f64)], p_deficit: f64, r_deficit: f64) -> AtomTable {
        let mut atoms: Vec<Atom> = entries
            .iter()
            .filter(|(p, r)| *p > 0.0 || *r > 0.0)
            .map(|&(p, r)| {
                // IEEE division sorts every case: 0/r = 0, p/0 = +∞, and
                // quotient overflow saturates to the +∞ ratio atom.
                let ratio = if r == 0.0 { f64::INFINITY } else { p / r };
                Atom { ratio, p, r }
            })
            .collect();
        atoms.sort_by(|a, b| a.ratio.total_cmp(&b.ratio));
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.ratio == a.ratio => {
                    last.p += a.p;
                    last.r += a.r;
                }
                _ => merged.push(a),
            }
        }
        let n = merged.len();
        let mut p_prefix = vec![0.0; n + 1];
        let mut r_prefix = vec![0.0; n + 1];
        for (i, a) in merged.iter().enumerate() {
            p_prefix[i + 1] = p_prefix[i] + a.p;
            r_prefix[i + 1] = r_prefix[i] + a.r;
        }
        let mut p_suffix = vec![0.0; n + 1];
        let mut r_suffix = vec![0.0; n + 1];
        for (i, a) in merged.iter().enumerate().rev() {
            p_suffix[i] = p_suffix[i + 1] + a.p;
            r_suffix[i] = r_suffix[i + 1] + a.r;
        }
        AtomTable {
            atoms: merged,
            p_prefix,
            r_prefix,
            p_suffix,
            r_suffix,
            p_deficit,
            r_deficit,
        }
    }

    fn range_mass(&self, s: usize, e: usize, of_p: bool) -> f64 {
        if s >= e {
            return 0.0;
        }
        let (prefix, suffix) = if of_p {
            (&self.p_prefix, &self.p_suffix)
        } else {
            (&self.r_prefix, &self.r_suffix)
        };
        let (diff, scale) = if suffix[s] < prefix[e] {
            (suffix[s] - suffix[e], suffix[s])
        } else {
            (prefix[e] - prefix[s], prefix[e])
        };
        if diff >= scale * 1e-10 {
            return diff.max(0.0);
        }
        // Cancellation zone: the telescoped difference has lost the range,
        // so sum it outright (compensated).
        let mut sum = 0.0f64;
        let mut carry = 0.0f64;
        for a in &self.atoms[s..e] {
            let x = (if of_p { a.p } else { a.r }) - carry;
            let t = sum + x;
            carry = (t - sum) - x;
            sum = t;
        }
        sum.max(0.0)
    }

    fn index_range(&self, i: &RatioInterval) -> (usize, usize) {
        if i.is_empty() {
            return (0, 0);
        }
        let lo = i.lo();
        let hi = i.hi();
        let start = if i.lo_closed() {
            self.atoms.partition_point(|a| a.ratio < lo)
        } else {
            self.atoms.partition_point(|a| a.ratio <= lo)
        };
        let end = if i.hi_closed() {
            self.atoms.partition_point(|a| a.ratio <= hi)
        } else {
            self.atoms.partition_point(|a| a.ratio < hi)
        };
        (start, end.max(start))
    }

    fn masses(&self, i: &RatioInterval) -> (f64, f64) {
        let (s, e) = self.index_range(i);
        (self.range_mass(s, e, true), self.range_mass(s, e, false))
    }

    fn restricted_divergence(&self, g: &Generator, i: &RatioInterval) -> ExtReal {
        let (s, e) = self.index_range(i);
        let mut total = 0.0f64;
        for a in &self.atoms[s..e] {
            let term = if a.ratio.is_infinite() {
                g.cell_value(a.p, a.r)
            } else {
                ExtReal::from_f64(g.eval_raw(a.ratio) * a.r)
            };
            match term {
                ExtReal::PosInf => return ExtReal::PosInf,
                ExtReal::Finite(v) => total += v,
            }
        }
        ExtReal::from_f64(total)
    }

    fn next_ratio_at_or_above(&self, t: f64, strict: bool) -> Option<f64> {
        let idx = if strict {
            self.atoms.partition_point(|a| a.ratio <= t)
        } else {
            self.atoms.partition_point(|a| a.ratio < t)
        };
        self.atoms.get(idx).map(|a| a.ratio)
    }

    fn prev_ratio_at_or_below(&self, t: f64, strict: bool) -> Option<f64> {
        let idx = if strict {
            self.atoms.partition_point(|a| a.ratio < t)
        } else {
            self.atoms.partition_point(|a| a.ratio <= t)
        };
        if idx == 0 {
            None
        } else {
            Some(self.atoms[idx - 1].ratio)
        }
    }

    fn ratio_range(&self) -> (f64, f64) {
        match (self.atoms.first(), self.atoms.last()) {
            (Some(a), Some(b)) => (a.ratio, b.ratio),
            _ => (1.0, 1.0),
        }
    }
}

fn validate_masses(values: &[f64], which: &'static str, tol: f64) -> Result<()> {
    let mut sum = 0.0;
    for (index, &v) in values.iter().enumerate() {
        if v.is_nan() || v.is_infinite() {
            return Err(Error::Domain(format!(
                "{which}[{index}] must be finite, got {v}"
            )));
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry { index, value: v });
        }
        sum += v;
    }
    if (sum - 1.0).abs() > tol {
        return Err(Error::NotNormalized { which, sum, tol });
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Discrete pairs
// ---------------------------------------------------------------------------

/// A pair of probability vectors on a common finite space.
#[derive(Debug, Clone)]
pub struct DiscretePair {
    p: Vec<f64>,
    r: Vec<f64>,
    table: AtomTable,
}

impl DiscretePair {
    pub fn new(p: Vec<f64>, r: Vec<f64>) -> Result<DiscretePair> {
        DiscretePair::with_sum_tolerance(p, r, MASS_SUM_TOL)
    }

    /// Constructor with a relaxed normalization tolerance, for masses that
    /// come out of truncated models.
    pub fn with_sum_tolerance(p: Vec<f64>, r: Vec<f64>, tol: f64) -> Result<DiscretePair> {
        if p.len() != r.len() {
            return Err(Error::LengthMismatch(p.len(), r.len()));
        }
        validate_masses(&p, "p", tol)?;
        validate_masses(&r, "r", tol)?;
        let entries: Vec<(f64, f64)> = p.iter().copied().zip(r.iter().copied()).collect();
        let table = AtomTable::build(&entries, 0.0, 0.0);
        Ok(DiscretePair { p, r, table })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }

    /// Indices carrying `μ`-mass; the brute-force oracle enumerates
    /// partitions of this support.
    pub fn support(&self) -> Vec<usize> {
        (0..self.p.len())
            .filter(|&i| self.p[i] > 0.0 || self.r[i] > 0.0)
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Grid pairs
// ---------------------------------------------------------------------------

/// Piecewise-constant densities on a user-supplied partition of an
/// interval. The density ratio is constant on each cell, so the pair is
/// exactly a discrete pair of cell masses.
#[derive(Debug, Clone)]
pub struct GridPair {
    edges: Vec<f64>,
    table: AtomTable,
}

impl GridPair {
    pub fn new(edges: Vec<f64>, p_mass: Vec<f64>, r_mass: Vec<f64>) -> Result<GridPair> {
        if edges.len() != p_mass.len() + 1 {
            return Err(Error::Domain(format!(
                "grid needs {} edges for {} cells, got {}",
                p_mass.len() + 1,
                p_mass.len(),
                edges.len()
            )));
        }
        if p_mass.len() != r_mass.len() {
            return Err(Error::LengthMismatch(p_mass.len(), r_mass.len()));
        }
        if edges.windows(2).any(|w| !(w[0] < w[1])) || edges.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("grid edges must be finite and strictly increasing".into()));
        }
        validate_masses(&p_mass, "p_mass", MASS_SUM_TOL)?;
        validate_masses(&r_mass, "r_mass", MASS_SUM_TOL)?;
        let entries: Vec<(f64, f64)> = p_mass.iter().copied().zip(r_mass.iter().copied()).collect();
        let table = AtomTable::build(&entries, 0.0, 0.0);
        Ok(GridPair { edges, table })
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }
}

// ---------------------------------------------------------------------------
// Gaussian pairs
// ---------------------------------------------------------------------------

/// `P = Normal(mean1, sd1)` against `R = Normal(mean2, sd2)`.
///
/// The log-ratio `ln(p/r)(x)` is the quadratic `a2·x² + a1·x + a0`, so
/// every ratio level set is a union of at most two x-intervals with
/// endpoints from the quadratic formula; masses are CDF differences and
/// never touch the densities.
#[derive(Debug, Clone)]
pub struct GaussianPair {
    mean1: f64,
    sd1: f64,
    mean2: f64,
    sd2: f64,
    quad_tol: f64,
    a2: f64,
    a1: f64,
    a0: f64,
    dist1: Normal,
    dist2: Normal,
}

/// `{x : q(x) ≤ t}` for the log-ratio quadratic `q`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Sublevel {
    Empty,
    All,
    /// `x ∈ [x1, x2]`
    Inside(f64, f64),
    /// `x ≤ x1` or `x ≥ x2`
    Outside(f64, f64),
    /// `x ≤ v`
    LeftRay(f64),
    /// `x ≥ v`
    RightRay(f64),
}

impl Sublevel {
    /// Canonical segment list (closures are irrelevant: boundaries are
    /// Lebesgue-null).
    fn segments(self) -> Vec<(f64, f64)> {
        match self {
            Sublevel::Empty => vec![],
            Sublevel::All => vec![(f64::NEG_INFINITY, f64::INFINITY)],
            Sublevel::Inside(x1, x2) => vec![(x1, x2)],
            Sublevel::Outside(x1, x2) => {
                vec![(f64::NEG_INFINITY, x1), (x2, f64::INFINITY)]
            }
            Sublevel::LeftRay(v) => vec![(f64::NEG_INFINITY, v)],
            Sublevel::RightRay(v) => vec![(v, f64::INFINITY)],
        }
    }
}

/// Set difference of unions of disjoint segments, each list sorted.
fn segment_difference(keep: &[(f64, f64)], drop: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in keep {
        let mut lo = a;
        for &(c, d) in drop {
            if d <= lo || c >= b {
                continue;
            }
            if c > lo {
                out.push((lo, c));
            }
            lo = lo.max(d);
            if lo >= b {
                break;
            }
        }
        if lo < b {
            out.push((lo, b));
        }
    }
    out
}

impl GaussianPair {
    pub fn new(mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> Result<GaussianPair> {
        GaussianPair::with_quad_tol(mean1, sd1, mean2, sd2, DEFAULT_QUAD_TOL)
    }

    pub fn with_quad_tol(
        mean1: f64,
        sd1: f64,
        mean2: f64,
        sd2: f64,
        quad_tol: f64,
    ) -> Result<GaussianPair> {
        for (name, v) in [("mean1", mean1), ("mean2", mean2)] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be finite, got {v}")));
            }
        }
        for (name, v) in [("sd1", sd1), ("sd2", sd2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(quad_tol > 0.0 && quad_tol.is_finite()) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {quad_tol}"
            )));
        }
        let v1 = sd1 * sd1;
        let v2 = sd2 * sd2;
        let a2 = 0.5 / v2 - 0.5 / v1;
        let a1 = mean1 / v1 - mean2 / v2;
        let a0 = mean2 * mean2 / (2.0 * v2) - mean1 * mean1 / (2.0 * v1) + (sd2 / sd1).ln();
        let dist1 = Normal::new(mean1, sd1).map_err(|e| Error::Domain(e.to_string()))?;
        let dist2 = Normal::new(mean2, sd2).map_err(|e| Error::Domain(e.to_string()))?;
        Ok(GaussianPair {
            mean1,
            sd1,
            mean2,
            sd2,
            quad_tol,
            a2,
            a1,
            a0,
            dist1,
            dist2,
        })
    }

    pub fn params(&self) -> (f64, f64, f64, f64) {
        (self.mean1, self.sd1, self.mean2, self.sd2)
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    fn log_ratio(&self, x: f64) -> f64 {
        (self.a2 * x + self.a1) * x + self.a0
    }

    fn r_density(&self, x: f64) -> f64 {
        let z = (x - self.mean2) / self.sd2;
        (-0.5 * z * z).exp() / (self.sd2 * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn is_constant_ratio(&self) -> bool {
        self.a2 == 0.0 && self.a1 == 0.0
    }

    fn constant_ratio(&self) -> f64 {
        self.a0.exp()
    }

    fn sublevel(&self, t: f64) -> Sublevel {
        if t == f64::INFINITY {
            return Sublevel::All;
        }
        if t == f64::NEG_INFINITY {
            return Sublevel::Empty;
        }
        if self.a2 == 0.0 {
            if self.a1 == 0.0 {
                return if self.a0 <= t { Sublevel::All } else { Sublevel::Empty };
            }
            let x = (t - self.a0) / self.a1;
            return if self.a1 > 0.0 {
                Sublevel::LeftRay(x)
            } else {
                Sublevel::RightRay(x)
            };
        }
        let disc = self.a1 * self.a1 - 4.0 * self.a2 * (self.a0 - t);
        if disc <= 0.0 {
            return if self.a2 > 0.0 { Sublevel::Empty } else { Sublevel::All };
        }
        // Stable quadratic roots: avoid the subtractive cancellation of the
        // textbook formula when |a1| dominates.
        let s = disc.sqrt();
        let q = -0.5 * (self.a1 + self.a1.signum() * s);
        let (r1, r2) = (q / self.a2, (self.a0 - t) / q);
        let (x1, x2) = (r1.min(r2), r1.max(r2));
        if self.a2 > 0.0 {
            Sublevel::Inside(x1, x2)
        } else {
            Sublevel::Outside(x1, x2)
        }
    }

    /// Mass of the x-segment `[a, b]`, evaluated from whichever tail keeps
    /// the CDF difference well conditioned.
    fn segment_mass(dist: &Normal, mean: f64, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        if b <= mean {
            (dist.cdf(b) - dist.cdf(a)).max(0.0)
        } else if a >= mean {
            (dist.sf(a) - dist.sf(b)).max(0.0)
        } else {
            ((dist.cdf(mean) - dist.cdf(a)) + (dist.sf(mean) - dist.sf(b))).max(0.0)
        }
    }

    fn masses(&self, i: &RatioInterval) -> (f64, f64) {
        if i.is_empty() {
            return (0.0, 0.0);
        }
        if self.is_constant_ratio() {
            return if i.contains(self.constant_ratio()) {
                (1.0, 1.0)
            } else {
                (0.0, 0.0)
            };
        }
        let mut p = 0.0;
        let mut r = 0.0;
        for (a, b) in self.region(i) {
            p += Self::segment_mass(&self.dist1, self.mean1, a, b);
            r += Self::segment_mass(&self.dist2, self.mean2, a, b);
        }
        (p.clamp(0.0, 1.0), r.clamp(0.0, 1.0))
    }

    /// The x-region `{ρ ∈ I}` as at most two disjoint segments.
    fn region(&self, i: &RatioInterval) -> Vec<(f64, f64)> {
        let hi = self.sublevel(i.hi().ln()).segments();
        let lo = self.sublevel(i.lo().ln()).segments();
        segment_difference(&hi, &lo)
    }

    fn window(&self) -> (f64, f64) {
        let lo = (self.mean1 - SUPPORT_SIGMAS * self.sd1).min(self.mean2 - SUPPORT_SIGMAS * self.sd2);
        let hi = (self.mean1 + SUPPORT_SIGMAS * self.sd1).max(self.mean2 + SUPPORT_SIGMAS * self.sd2);
        (lo, hi)
    }

    fn restricted_divergence(&self, g: &Generator, i: &RatioInterval) -> Result<DivergenceValue> {
        if i.is_empty() {
            return Ok(DivergenceValue::exact(ExtReal::ZERO));
        }
        if self.is_constant_ratio() {
            let value = if i.contains(self.constant_ratio()) {
                ExtReal::from_f64(g.eval_raw(self.constant_ratio()))
            } else {
                ExtReal::ZERO
            };
            return Ok(DivergenceValue::exact(value));
        }
        let integrand = |x: f64| {
            let r = self.r_density(x);
            if r == 0.0 {
                return 0.0;
            }
            let ratio = self.log_ratio(x).exp();
            if ratio.is_finite() {
                g.eval_raw(ratio) * r
            } else {
                // Ratio overflow inside the window: evaluate at the largest
                // representable argument; unbounded generators escalate to
                // a non-convergence error downstream.
                g.eval_raw(f64::MAX / 2.0) * r
            }
        };
        let (w_lo, w_hi) = self.window();
        let segments: Vec<(f64, f64)> = self
            .region(i)
            .into_iter()
            .map(|(a, b)| (a.max(w_lo), b.min(w_hi)))
            .filter(|(a, b)| a < b)
            .collect();
        if segments.is_empty() {
            return Ok(DivergenceValue::exact(ExtReal::ZERO));
        }
        // A non-negligible integrand at a clipped window edge means the
        // tail carries real mass and the window estimate cannot be trusted.
        for &(a, b) in &segments {
            for (edge, clipped) in [(a, a == w_lo), (b, b == w_hi)] {
                if clipped && integrand(edge).abs() > self.quad_tol {
                    return Err(Error::Accuracy {
                        context: format!("restricted divergence tail at x={edge}"),
                        best: f64::NAN,
                        error: f64::INFINITY,
                    });
                }
            }
        }
        let per_segment_tol = self.quad_tol / segments.len() as f64;
        let mut total = 0.0;
        let mut err = 0.0;
        for (a, b) in segments {
            let est = quad::integrate(
                &integrand,
                a,
                b,
                per_segment_tol,
                MAX_QUAD_SEGMENTS,
                "gaussian restricted divergence",
            )?;
            total += est.value;
            err += est.abs_error;
        }
        Ok(DivergenceValue::new(ExtReal::from_f64(total), err))
    }

    fn ratio_bounds(&self) -> (f64, f64) {
        if self.is_constant_ratio() {
            let c = self.constant_ratio();
            return (c, c);
        }
        if self.a2 == 0.0 {
            return (0.0, f64::INFINITY);
        }
        let vertex = self.a0 - self.a1 * self.a1 / (4.0 * self.a2);
        if self.a2 > 0.0 {
            (vertex.exp(), f64::INFINITY)
        } else {
            (0.0, vertex.exp())
        }
    }

    fn next_ratio_at_or_above(&self, t: f64, strict: bool) -> Option<f64> {
        let (lo, hi) = self.ratio_bounds();
        if self.is_constant_ratio() {
            let c = self.constant_ratio();
            let ok = if strict { c > t } else { c >= t };
            return ok.then_some(c);
        }
        if t > hi || (strict && t >= hi) {
            None
        } else {
            Some(t.max(lo))
        }
    }

    fn prev_ratio_at_or_below(&self, t: f64, strict: bool) -> Option<f64> {
        let (lo, hi) = self.ratio_bounds();
        if self.is_constant_ratio() {
            let c = self.constant_ratio();
            let ok = if strict { c < t } else { c <= t };
            return ok.then_some(c);
        }
        if t < lo || (strict && t <= lo) || t <= 0.0 {
            None
        } else {
            Some(t.min(hi))
        }
    }
}

// ---------------------------------------------------------------------------
// Countable pairs
// ---------------------------------------------------------------------------

type TermFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;

/// A countably supported pair enumerated up to a cap, with the
/// un-enumerated tail mass reported as a truncation bound.
#[derive(Clone)]
pub struct CountablePair {
    name: String,
    cap: u64,
    table: AtomTable,
}

impl std::fmt::Debug for CountablePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CountablePair")
            .field("name", &self.name)
            .field("cap", &self.cap)
            .field("truncation", &self.table.p_deficit.max(self.table.r_deficit))
            .finish()
    }
}

impl CountablePair {
    /// Enumerates `p_term`/`r_term` for `i = 1..=cap`. Partial sums must
    /// stay within `1 + 1e−9`; the remaining gap to 1 is reported by
    /// [`MeasurePair::mass_tolerance`].
    pub fn new(
        name: impl Into<String>,
        p_term: TermFn,
        r_term: TermFn,
        cap: u64,
    ) -> Result<CountablePair> {
        if cap == 0 {
            return Err(Error::Domain("countable cap must be >= 1".into()));
        }
        let mut entries = Vec::with_capacity(cap.min(16_000_000) as usize);
        let (mut sum_p, mut sum_r) = (0.0f64, 0.0f64);
        for i in 1..=cap {
            let (p, r) = (p_term(i), r_term(i));
            for (which, v) in [("p_term", p), ("r_term", r)] {
                if !(v >= 0.0) || !v.is_finite() {
                    return Err(Error::Domain(format!(
                        "{which}({i}) must be finite and nonnegative, got {v}"
                    )));
                }
            }
            sum_p += p;
            sum_r += r;
            if sum_p > 1.0 + 1e-9 {
                return Err(Error::SeriesExceedsOne {
                    which: "p_term",
                    index: i,
                    sum: sum_p,
                });
            }
            if sum_r > 1.0 + 1e-9 {
                return Err(Error::SeriesExceedsOne {
                    which: "r_term",
                    index: i,
                    sum: sum_r,
                });
            }
            entries.push((p, r));
        }
        let table = AtomTable::build(
            &entries,
            (1.0 - sum_p).max(0.0),
            (1.0 - sum_r).max(0.0),
        );
        Ok(CountablePair {
            name: name.into(),
            cap,
            table,
        })
    }

    /// Looks up a named built-in pair.
    ///
    /// - `telescoping_vs_geometric`: `p_i = 1/(i(i+1))` vs `r_i = 2^{−i}`
    ///   (infinite KL divergence),
    /// - `zeta_vs_geometric`: `p_i = 6/(π² i²)` vs `r_i = 2^{−i}`
    ///   (infinite KL divergence),
    /// - `geometric_vs_geometric`: `p_i = r_i = 2^{−i}` (zero divergence).
    pub fn builtin(name: &str, cap: u64) -> Result<CountablePair> {
        let geometric: TermFn = Arc::new(|i: u64| 0.5f64.powi(i as i32));
        match name {
            "telescoping_vs_geometric" => CountablePair::new(
                name,
                Arc::new(|i: u64| {
                    let i = i as f64;
                    1.0 / (i * (i + 1.0))
                }),
                geometric,
                cap,
            ),
            "zeta_vs_geometric" => CountablePair::new(
                name,
                Arc::new(|i: u64| {
                    let i = i as f64;
                    6.0 / (std::f64::consts::PI.powi(2) * i * i)
                }),
                geometric,
                cap,
            ),
            "geometric_vs_geometric" => {
                CountablePair::new(name, Arc::clone(&geometric), geometric, cap)
            }
            _ => Err(Error::UnknownCountable(name.to_string())),
        }
    }

    /// Names accepted by [`CountablePair::builtin`].
    pub fn builtin_names() -> &'static [&'static str] {
        &[
            "telescoping_vs_geometric",
            "zeta_vs_geometric",
            "geometric_vs_geometric",
        ]
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cap(&self) -> u64 {
        self.cap
    }

    /// Un-enumerated mass `1 − Σ_{i≤cap}` for each component.
    pub fn truncation(&self) -> (f64, f64) {
        (self.table.p_deficit, self.table.r_deficit)
    }
}

// ---------------------------------------------------------------------------
// The model-dispatching pair
// ---------------------------------------------------------------------------

/// A dominated measure pair under one of the supported models.
#[derive(Debug, Clone)]
pub enum MeasurePair {
    Discrete(DiscretePair),
    Grid(GridPair),
    Gaussian(GaussianPair),
    Countable(CountablePair),
}

impl From<DiscretePair> for MeasurePair {
    fn from(p: DiscretePair) -> Self {
        MeasurePair::Discrete(p)
    }
}
impl From<GridPair> for MeasurePair {
    fn from(p: GridPair) -> Self {
        MeasurePair::Grid(p)
    }
}
impl From<GaussianPair> for MeasurePair {
    fn from(p: GaussianPair) -> Self {
        MeasurePair::Gaussian(p)
    }
}
impl From<CountablePair> for MeasurePair {
    fn from(p: CountablePair) -> Self {
        MeasurePair::Countable(p)
    }
}

impl MeasurePair {
    fn atoms(&self) -> Option<&AtomTable> {
        match self {
            MeasurePair::Discrete(p) => Some(&p.table),
            MeasurePair::Grid(p) => Some(&p.table),
            MeasurePair::Countable(p) => Some(&p.table),
            MeasurePair::Gaussian(_) => None,
        }
    }

    /// The masses `(P{ρ ∈ I}, R{ρ ∈ I})`.
    pub fn ratio_interval_masses(&self, i: &RatioInterval) -> (f64, f64) {
        match self {
            MeasurePair::Gaussian(g) => g.masses(i),
            _ => self.atoms().expect("atomic model").masses(i),
        }
    }

    /// `∫_{ρ∈I} f(ρ) r dμ`, including `f'(∞)·P({r=0})` when `I` contains
    /// the `+∞` atom and `f(0)·R({p=0})` when it contains 0.
    pub fn restricted_divergence(
        &self,
        g: &Generator,
        i: &RatioInterval,
    ) -> Result<DivergenceValue> {
        match self {
            MeasurePair::Gaussian(gp) => gp.restricted_divergence(g, i),
            _ => {
                let value = self.atoms().expect("atomic model").restricted_divergence(g, i);
                Ok(DivergenceValue::new(value, self.mass_tolerance()))
            }
        }
    }

    /// Essential range `[ρ_min, ρ_max]` of the likelihood ratio, with
    /// `ρ_max = +∞` when P-mass lives on `{r = 0}` or ratios are unbounded.
    pub fn ratio_range(&self) -> (f64, f64) {
        match self {
            MeasurePair::Gaussian(g) => g.ratio_bounds(),
            _ => self.atoms().expect("atomic model").ratio_range(),
        }
    }

    /// Essential infimum of ratio values in `[t, +∞]` (or `(t, +∞]` when
    /// `strict`), `None` when that set carries no mass.
    pub fn next_ratio_at_or_above(&self, t: f64, strict: bool) -> Option<f64> {
        match self {
            MeasurePair::Gaussian(g) => g.next_ratio_at_or_above(t, strict),
            _ => self.atoms().expect("atomic model").next_ratio_at_or_above(t, strict),
        }
    }

    /// Essential supremum of ratio values in `[0, t]` (or `[0, t)` when
    /// `strict`), `None` when that set carries no mass.
    pub fn prev_ratio_at_or_below(&self, t: f64, strict: bool) -> Option<f64> {
        match self {
            MeasurePair::Gaussian(g) => g.prev_ratio_at_or_below(t, strict),
            _ => self.atoms().expect("atomic model").prev_ratio_at_or_below(t, strict),
        }
    }

    /// Bound on the error of a single mass query: 0 for exact models, the
    /// CDF budget for Gaussians, the truncation gap for countable pairs.
    pub fn mass_tolerance(&self) -> f64 {
        match self {
            MeasurePair::Discrete(_) | MeasurePair::Grid(_) => 0.0,
            MeasurePair::Gaussian(_) => GAUSS_MASS_TOL,
            MeasurePair::Countable(c) => c.table.p_deficit.max(c.table.r_deficit),
        }
    }

    /// Whether mass queries are exact sums (no quadrature, no truncation).
    pub fn is_exact(&self) -> bool {
        matches!(self, MeasurePair::Discrete(_) | MeasurePair::Grid(_))
    }
}

/// Validated discrete pair as a [`MeasurePair`].
pub fn make_discrete_pair(p: Vec<f64>, r: Vec<f64>) -> Result<MeasurePair> {
    Ok(DiscretePair::new(p, r)?.into())
}

/// Gaussian pair as a [`MeasurePair`] with the default quadrature
/// tolerance.
pub fn gaussian_pair(mean1: f64, sd1: f64, mean2: f64, sd2: f64) -> Result<MeasurePair> {
    Ok(GaussianPair::new(mean1, sd1, mean2, sd2)?.into())
}

/// Capped countable pair as a [`MeasurePair`].
pub fn countable_pair(
    p_term: impl Fn(u64) -> f64 + Send + Sync + 'static,
    r_term: impl Fn(u64) -> f64 + Send + Sync + 'static,
    cap: u64,
) -> Result<MeasurePair> {
    Ok(CountablePair::new("custom", Arc::new(p_term), Arc::new(r_term), cap)?.into())
}
