//! Convex divergence generators.
//!
//! A generator is a convex `f : [0, ∞) → R` with `f(1) = 0`, carrying the
//! two boundary quantities the divergence conventions need — `f(0)` as a
//! right limit and the slope at infinity `f'(∞) = lim f(u)/u` — plus the
//! subdifferential at `u = 1`. Subtracting the support line `a(u − 1)`
//! with `a` in that subdifferential yields the normalized form
//! `f̃(u) = f(u) − a(u−1)`, which is nonnegative, nonincreasing left of 1
//! and nondecreasing right of 1; every divergence value is invariant under
//! this substitution, and the partition machinery leans on the normalized
//! shape throughout.
//!
//! Built-ins: `kl` (u ln u), `tv` (|u−1|), `chi2` ((u−1)²), `hellinger`
//! ((√u−1)²), and the Tsallis family `(u^α − 1)/(α−1)` for `α > 0, α ≠ 1`.

use crate::ext::ExtReal;
use crate::{Error, Result};
use std::fmt;
use std::sync::Arc;

type EvalFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
type SlopeFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// Ratio-space search cap for level thresholds: past this the crossing is
/// reported as `+∞` with `capped` set.
pub const LEVEL_SEARCH_CAP: f64 = 1e18;

/// Absolute bisection tolerance on `u` for threshold searches.
pub const BISECT_TOL: f64 = 1e-12;

const NUMERIC_SLOPE_STEP: f64 = 1e-7;

/// A convex generator function with its boundary data.
#[derive(Clone)]
pub struct Generator {
    name: String,
    eval: EvalFn,
    slopes: Option<SlopeFn>,
    at_zero: ExtReal,
    slope_at_infinity: ExtReal,
    subgradient_at_one: (f64, f64),
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Generator")
            .field("name", &self.name)
            .field("at_zero", &self.at_zero)
            .field("slope_at_infinity", &self.slope_at_infinity)
            .field("subgradient_at_one", &self.subgradient_at_one)
            .finish()
    }
}

impl Generator {
    /// Builds a generator from its pieces. `eval` is only consulted on
    /// `u > 0`; the value at 0 is `at_zero`. `slopes`, when given, must
    /// return the one-sided derivatives `(f'₋(u), f'₊(u))` for `u > 0`.
    pub fn new(
        name: impl Into<String>,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        at_zero: ExtReal,
        slope_at_infinity: ExtReal,
        subgradient_at_one: (f64, f64),
        slopes: Option<SlopeFn>,
    ) -> Result<Generator> {
        let name = name.into();
        let f1 = eval(1.0);
        if f1 != 0.0 {
            return Err(Error::GeneratorDefinition(format!(
                "{name}: f(1) must be exactly 0, got {f1:e}"
            )));
        }
        let (l, r) = subgradient_at_one;
        if !(l.is_finite() && r.is_finite() && l <= r) {
            return Err(Error::GeneratorDefinition(format!(
                "{name}: subgradient interval [{l}, {r}] at u=1 is invalid"
            )));
        }
        Ok(Generator {
            name,
            eval: Arc::new(eval),
            slopes,
            at_zero,
            slope_at_infinity,
            subgradient_at_one,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// `f(0)` as the right limit at 0.
    pub fn at_zero(&self) -> ExtReal {
        self.at_zero
    }

    /// `f'(∞) = lim f(u)/u`, the weight of P-mass living where `r = 0`.
    pub fn slope_at_infinity(&self) -> ExtReal {
        self.slope_at_infinity
    }

    /// The subdifferential `[f'₋(1), f'₊(1)]`.
    pub fn subgradient_at_one(&self) -> (f64, f64) {
        self.subgradient_at_one
    }

    /// Evaluates `f(u)`, returning `at_zero` at `u = 0`. Negative or
    /// non-finite inputs are rejected.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !u.is_finite() || u < 0.0 {
            return Err(Error::Domain(format!(
                "generator argument must be a finite nonnegative real, got {u}"
            )));
        }
        Ok(self.eval_raw(u))
    }

    /// Evaluation without the domain check; `u` must be finite and `≥ 0`.
    /// May return `±∞` when `f` overflows at extreme ratios.
    pub(crate) fn eval_raw(&self, u: f64) -> f64 {
        debug_assert!(u.is_finite() && u >= 0.0);
        if u == 0.0 {
            self.at_zero.as_f64()
        } else {
            (self.eval)(u)
        }
    }

    /// The value of `R(E)·f(P(E)/R(E))` for one partition cell, applying
    /// the boundary conventions: `0·f(0/0) = 0` and `0·f(a/0) = a·f'(∞)`.
    pub(crate) fn cell_value(&self, p: f64, r: f64) -> ExtReal {
        debug_assert!(p >= 0.0 && r >= 0.0);
        if r == 0.0 {
            return if p == 0.0 {
                ExtReal::ZERO
            } else {
                self.slope_at_infinity.scale_nonneg(p)
            };
        }
        let ratio = p / r;
        if ratio.is_infinite() {
            // The quotient overflowed f64 even though r > 0. The generator
            // value at such ratios is above f(MAX), so resolve through the
            // slope at infinity.
            return match self.slope_at_infinity {
                ExtReal::PosInf => ExtReal::PosInf,
                ExtReal::Finite(s) if s > 0.0 => ExtReal::PosInf,
                _ => ExtReal::from_f64(self.eval_raw(LEVEL_SEARCH_CAP) * r),
            };
        }
        ExtReal::from_f64(self.eval_raw(ratio) * r)
    }

    /// Returns `(f(0), f'(∞))` after cross-checking the stored limits
    /// against evaluations on the geometric grids `u = 2^{−k}` and
    /// `u = 2^{k}`, `k ≤ 40`.
    pub fn boundary_limits(&self) -> Result<(ExtReal, ExtReal)> {
        let near = self.eval_raw(2f64.powi(-40));
        let mid = self.eval_raw(2f64.powi(-20));
        match self.at_zero {
            ExtReal::Finite(l) => {
                let tol = 1e-5f64.max(1e-5 * l.abs());
                if !((near - l).abs() <= tol) {
                    return Err(Error::GeneratorDefinition(format!(
                        "{}: declared f(0)={l} but f(2^-40)={near}",
                        self.name
                    )));
                }
            }
            ExtReal::PosInf => {
                if !(near > mid + 1.0 || near > 1e12) {
                    return Err(Error::GeneratorDefinition(format!(
                        "{}: declared f(0)=inf but f(2^-40)={near} is not growing",
                        self.name
                    )));
                }
            }
        }
        let far = self.eval_raw(2f64.powi(40)) / 2f64.powi(40);
        let mid = self.eval_raw(2f64.powi(20)) / 2f64.powi(20);
        match self.slope_at_infinity {
            ExtReal::Finite(l) => {
                let tol = 1e-5f64.max(1e-5 * l.abs());
                if !((far - l).abs() <= tol) {
                    return Err(Error::GeneratorDefinition(format!(
                        "{}: declared f'(inf)={l} but f(2^40)/2^40={far}",
                        self.name
                    )));
                }
            }
            ExtReal::PosInf => {
                if !(far > mid + 1.0 || far > 1e12) {
                    return Err(Error::GeneratorDefinition(format!(
                        "{}: declared f'(inf)=inf but f(2^40)/2^40={far} is not growing",
                        self.name
                    )));
                }
            }
        }
        Ok((self.at_zero, self.slope_at_infinity))
    }

    /// One-sided derivatives `(f'₋(u), f'₊(u))` at `u > 0`. Analytic for
    /// built-ins, Richardson-refined difference quotients otherwise.
    pub fn subgradient(&self, u: f64) -> Result<(f64, f64)> {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::Domain(format!(
                "subgradient requires a finite u > 0, got {u}"
            )));
        }
        if let Some(slopes) = &self.slopes {
            return Ok(slopes(u));
        }
        let h = NUMERIC_SLOPE_STEP * u.max(1.0);
        let right = {
            let d1 = (self.eval_raw(u + h) - self.eval_raw(u)) / h;
            let d2 = (self.eval_raw(u + h / 2.0) - self.eval_raw(u)) / (h / 2.0);
            2.0 * d2 - d1
        };
        let hl = h.min(u / 2.0);
        let left = {
            let d1 = (self.eval_raw(u) - self.eval_raw(u - hl)) / hl;
            let d2 = (self.eval_raw(u) - self.eval_raw(u - hl / 2.0)) / (hl / 2.0);
            2.0 * d2 - d1
        };
        // Difference-quotient noise can flip the pair on smooth stretches.
        Ok((left.min(right), left.max(right)))
    }

    /// Normalizes by the support line at 1, with slope chosen as the
    /// midpoint of the subdifferential.
    pub fn normalize(&self) -> NormalizedGenerator {
        let (l, r) = self.subgradient_at_one;
        let a = 0.5 * (l + r);
        let base_eval = Arc::clone(&self.eval);
        let tilde_eval = move |u: f64| base_eval(u) - a * (u - 1.0);
        let tilde_slopes: Option<SlopeFn> = self.slopes.as_ref().map(|s| {
            let s = Arc::clone(s);
            Arc::new(move |u: f64| {
                let (lo, hi) = s(u);
                (lo - a, hi - a)
            }) as SlopeFn
        });
        let tilde = Generator {
            name: format!("{}~", self.name),
            eval: Arc::new(tilde_eval),
            slopes: tilde_slopes,
            at_zero: self.at_zero.shift(a),
            slope_at_infinity: self.slope_at_infinity.shift(-a),
            subgradient_at_one: (l - a, r - a),
        };
        NormalizedGenerator {
            base: self.clone(),
            slope: a,
            tilde,
        }
    }

    /// KL generator `u ln u`.
    pub fn kl() -> Generator {
        Generator::new(
            "kl",
            |u: f64| u * u.ln(),
            ExtReal::Finite(0.0),
            ExtReal::PosInf,
            (1.0, 1.0),
            Some(Arc::new(|u: f64| {
                let d = u.ln() + 1.0;
                (d, d)
            })),
        )
        .expect("builtin")
    }

    /// Total-variation generator `|u − 1|`.
    pub fn tv() -> Generator {
        Generator::new(
            "tv",
            |u: f64| (u - 1.0).abs(),
            ExtReal::Finite(1.0),
            ExtReal::Finite(1.0),
            (-1.0, 1.0),
            Some(Arc::new(|u: f64| {
                if u < 1.0 {
                    (-1.0, -1.0)
                } else if u > 1.0 {
                    (1.0, 1.0)
                } else {
                    (-1.0, 1.0)
                }
            })),
        )
        .expect("builtin")
    }

    /// Chi-square generator `(u − 1)²`.
    pub fn chi_squared() -> Generator {
        Generator::new(
            "chi2",
            |u: f64| (u - 1.0) * (u - 1.0),
            ExtReal::Finite(1.0),
            ExtReal::PosInf,
            (0.0, 0.0),
            Some(Arc::new(|u: f64| {
                let d = 2.0 * (u - 1.0);
                (d, d)
            })),
        )
        .expect("builtin")
    }

    /// Hellinger generator `(√u − 1)²`.
    pub fn hellinger() -> Generator {
        Generator::new(
            "hellinger",
            |u: f64| {
                let s = u.sqrt() - 1.0;
                s * s
            },
            ExtReal::Finite(1.0),
            ExtReal::Finite(1.0),
            (0.0, 0.0),
            Some(Arc::new(|u: f64| {
                let d = 1.0 - 1.0 / u.sqrt();
                (d, d)
            })),
        )
        .expect("builtin")
    }

    /// Tsallis generator `(u^α − 1)/(α − 1)` for `α > 0`, `α ≠ 1`.
    pub fn tsallis(alpha: f64) -> Result<Generator> {
        if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
            return Err(Error::BadAlpha(alpha));
        }
        let slope_inf = if alpha > 1.0 {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(0.0)
        };
        let d1 = alpha / (alpha - 1.0);
        Generator::new(
            format!("tsallis:{alpha}"),
            move |u: f64| (u.powf(alpha) - 1.0) / (alpha - 1.0),
            ExtReal::Finite(1.0 / (1.0 - alpha)),
            slope_inf,
            (d1, d1),
            Some(Arc::new(move |u: f64| {
                let d = alpha * u.powf(alpha - 1.0) / (alpha - 1.0);
                (d, d)
            })),
        )
    }

    /// Resolves a CLI/config name: `kl`, `tv`, `chi2`, `hellinger`, or
    /// `tsallis:<alpha>`.
    pub fn by_name(name: &str) -> Result<Generator> {
        match name {
            "kl" => Ok(Generator::kl()),
            "tv" => Ok(Generator::tv()),
            "chi2" => Ok(Generator::chi_squared()),
            "hellinger" => Ok(Generator::hellinger()),
            _ => match name.strip_prefix("tsallis:") {
                Some(alpha) => {
                    let alpha: f64 = alpha
                        .parse()
                        .map_err(|_| Error::UnknownGenerator(name.to_string()))?;
                    Generator::tsallis(alpha)
                }
                None => Err(Error::UnknownGenerator(name.to_string())),
            },
        }
    }

    /// All built-in generators, for test sweeps. Tsallis is represented by
    /// one sub- and one super-linear member.
    pub fn builtins() -> Vec<Generator> {
        vec![
            Generator::kl(),
            Generator::tv(),
            Generator::chi_squared(),
            Generator::hellinger(),
            Generator::tsallis(0.5).expect("builtin"),
            Generator::tsallis(2.0).expect("builtin"),
        ]
    }
}

/// The result of a level-threshold search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelThreshold {
    /// `inf{u > 1 : f̃(u) ≥ n}`, or `+∞` when no crossing was found.
    pub value: ExtReal,
    /// Set when the doubling search hit [`LEVEL_SEARCH_CAP`] without a
    /// crossing, so `+∞` means "not found below the cap" rather than a
    /// proven bound.
    pub capped: bool,
}

/// A generator together with its support-line normalization
/// `f̃(u) = f(u) − a(u−1)`.
#[derive(Debug, Clone)]
pub struct NormalizedGenerator {
    base: Generator,
    slope: f64,
    tilde: Generator,
}

impl NormalizedGenerator {
    pub fn base(&self) -> &Generator {
        &self.base
    }

    /// The support-line slope `a ∈ [f'₋(1), f'₊(1)]`.
    pub fn slope(&self) -> f64 {
        self.slope
    }

    /// `f̃` as a full generator value.
    pub fn tilde(&self) -> &Generator {
        &self.tilde
    }

    /// `b_n = inf{u > 1 : f̃(u) ≥ n}` by bisection on the nondecreasing
    /// branch, `+∞` (with the capped flag) when `f̃` stays below `n` up to
    /// the search cap.
    pub fn level_threshold(&self, n: u64) -> Result<LevelThreshold> {
        if n == 0 {
            return Err(Error::Domain("level threshold index must be >= 1".into()));
        }
        Ok(self.crossing_above_one(n as f64, LEVEL_SEARCH_CAP))
    }

    /// Threshold search for arbitrary positive levels and caps; used by
    /// the infinite-divergence scan, which walks levels far beyond u64.
    pub(crate) fn crossing_above_one(&self, level: f64, cap: f64) -> LevelThreshold {
        debug_assert!(level > 0.0);
        let mut hi = 2.0;
        while self.tilde.eval_raw(hi) < level {
            hi *= 2.0;
            if hi > cap {
                return LevelThreshold {
                    value: ExtReal::PosInf,
                    capped: true,
                };
            }
        }
        let mut lo = (hi / 2.0).max(1.0);
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tilde.eval_raw(mid) >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        LevelThreshold {
            value: ExtReal::Finite(hi),
            capped: false,
        }
    }

    /// `c_n = sup{u < 1 : f̃(u) ≥ level}` by bisection on the nonincreasing
    /// branch, or `None` when even `f̃(0)` stays below the level.
    pub(crate) fn crossing_below_one(&self, level: f64) -> Option<f64> {
        debug_assert!(level > 0.0);
        if !(self.tilde.at_zero().as_f64() >= level) {
            return None;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        while hi - lo > BISECT_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.tilde.eval_raw(mid) >= level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }
}
