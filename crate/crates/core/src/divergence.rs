//! Reference divergence values: `D_f`, Tsallis `T_α`, Rényi `I_α`.
//!
//! `D_f(P,R) = ∫ f(p/r) r dμ` with the boundary conventions resolved
//! before any arithmetic: `0·f(0/0) = 0`, the `+∞` ratio atom contributes
//! `f'(∞)·P({r=0})`, and `{p=0, r>0}` contributes `f(0)·R({p=0})`.
//! Rényi values are the monotone transform
//! `I_α = (α−1)^{-1} ln[1 + (α−1)·T_α]` of the Tsallis value, reported in
//! nats.

use crate::ext::ExtReal;
use crate::generator::Generator;
use crate::interval::RatioInterval;
use crate::measure::MeasurePair;
use crate::{Error, Result};
use serde::Serialize;

/// A computed divergence with its accuracy disclosure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergenceValue {
    /// The value; `+∞` is represented explicitly.
    pub value: ExtReal,
    /// Error bound: 0 for exact models, the quadrature estimate for
    /// Gaussian pairs, the enumeration-truncation gap for countable pairs.
    pub error_bound: f64,
    /// Convenience flag, always equal to `value.is_finite()`.
    pub finite: bool,
}

impl DivergenceValue {
    pub fn new(value: ExtReal, error_bound: f64) -> DivergenceValue {
        DivergenceValue {
            value,
            error_bound,
            finite: value.is_finite(),
        }
    }

    pub fn exact(value: ExtReal) -> DivergenceValue {
        DivergenceValue::new(value, 0.0)
    }
}

/// `D_f(P, R)` over the whole space, atoms included.
pub fn divergence(g: &Generator, pair: &MeasurePair) -> Result<DivergenceValue> {
    pair.restricted_divergence(g, &RatioInterval::full())
}

/// Tsallis divergence `T_α`, the f-divergence of `(u^α − 1)/(α − 1)`.
///
/// The `α → 1` limit is KL but is never substituted silently; request the
/// `kl` generator explicitly instead.
pub fn tsallis(alpha: f64, pair: &MeasurePair) -> Result<DivergenceValue> {
    let g = Generator::tsallis(alpha)?;
    divergence(&g, pair)
}

/// Rényi divergence `I_α = (α−1)^{-1} ln[1 + (α−1) T_α]` in nats.
///
/// `T_α = +∞` propagates to `+∞`; for `α < 1` the transform argument can
/// reach 0 (disjoint supports), which is also `+∞`.
pub fn renyi(alpha: f64, pair: &MeasurePair) -> Result<DivergenceValue> {
    let t = tsallis(alpha, pair)?;
    Ok(renyi_from_tsallis(alpha, &t))
}

/// The monotone transform from a Tsallis value to the Rényi value.
pub(crate) fn renyi_from_tsallis(alpha: f64, t: &DivergenceValue) -> DivergenceValue {
    match t.value {
        ExtReal::PosInf => DivergenceValue::new(ExtReal::PosInf, t.error_bound),
        ExtReal::Finite(tv) => {
            let arg = 1.0 + (alpha - 1.0) * tv;
            if arg <= 0.0 {
                // Only reachable for α < 1 when T_α hits its 1/(1−α) cap.
                return DivergenceValue::new(ExtReal::PosInf, t.error_bound);
            }
            let value = arg.ln() / (alpha - 1.0);
            DivergenceValue::new(ExtReal::from_f64(value), t.error_bound / arg)
        }
    }
}

/// Inverse transform, used by tests and sanity checks.
pub fn tsallis_from_renyi(alpha: f64, renyi_value: f64) -> Result<f64> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    Ok((((alpha - 1.0) * renyi_value).exp() - 1.0) / (alpha - 1.0))
}
