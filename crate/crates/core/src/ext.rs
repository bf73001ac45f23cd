//! Extended reals: finite values plus a single point at `+∞`.
//!
//! Divergences, boundary limits and level thresholds live in `[−∞, +∞]`
//! with `−∞` never arising, so a two-variant tag is enough. Keeping the
//! tag explicit (instead of leaning on `f64::INFINITY`) makes the infinite
//! case impossible to lose in arithmetic and gives it a stable JSON form.

use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A finite real or `+∞`. `Finite` never holds NaN or an infinity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Zero, the additive identity.
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    /// Classifies an `f64`, mapping `+∞` (and overflow results) to
    /// [`ExtReal::PosInf`]. NaN is rejected because no operation in this
    /// crate legitimately produces it.
    pub fn from_f64(x: f64) -> ExtReal {
        debug_assert!(!x.is_nan(), "NaN has no extended-real meaning");
        if x.is_infinite() {
            ExtReal::PosInf
        } else {
            ExtReal::Finite(x)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// The value as an `f64`, with `PosInf` mapping to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        match self {
            ExtReal::Finite(x) => x,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    /// Finite payload, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(x) => Some(x),
            ExtReal::PosInf => None,
        }
    }

    /// Adds a finite shift; `+∞` absorbs it.
    pub fn shift(self, delta: f64) -> ExtReal {
        match self {
            ExtReal::Finite(x) => ExtReal::from_f64(x + delta),
            ExtReal::PosInf => ExtReal::PosInf,
        }
    }

    /// Multiplies by a nonnegative finite weight with the measure-theoretic
    /// convention `0 · ∞ = 0`.
    pub fn scale_nonneg(self, w: f64) -> ExtReal {
        debug_assert!(w >= 0.0 && w.is_finite());
        match self {
            ExtReal::PosInf if w == 0.0 => ExtReal::ZERO,
            ExtReal::PosInf => ExtReal::PosInf,
            ExtReal::Finite(x) => ExtReal::from_f64(x * w),
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::from_f64(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
            (ExtReal::Finite(_), ExtReal::PosInf) => Some(Ordering::Less),
            (ExtReal::PosInf, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::PosInf, ExtReal::PosInf) => Some(Ordering::Equal),
        }
    }
}

impl From<f64> for ExtReal {
    fn from(x: f64) -> ExtReal {
        ExtReal::from_f64(x)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(x) => write!(f, "{x}"),
            ExtReal::PosInf => write!(f, "inf"),
        }
    }
}

// JSON form: finite values are plain numbers, infinity is the tagged
// object `{"inf": true}` so it survives serializers that map f64::INFINITY
// to null.
impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(x) => serializer.serialize_f64(*x),
            ExtReal::PosInf => {
                use serde::ser::SerializeMap;
                let mut map = serializer.serialize_map(Some(1))?;
                map.serialize_entry("inf", &true)?;
                map.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ExtVisitor;

        impl<'de> Visitor<'de> for ExtVisitor {
            type Value = ExtReal;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a finite number, the string \"inf\", or {\"inf\": true}")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtReal, E> {
                if v.is_nan() {
                    Err(E::custom("NaN is not an extended real"))
                } else {
                    Ok(ExtReal::from_f64(v))
                }
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtReal, E> {
                Ok(ExtReal::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtReal, E> {
                if v == "inf" {
                    Ok(ExtReal::PosInf)
                } else {
                    Err(E::custom(format!("unexpected string `{v}`")))
                }
            }

            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<ExtReal, A::Error> {
                let mut seen = false;
                while let Some((key, value)) = map.next_entry::<String, bool>()? {
                    if key == "inf" && value {
                        seen = true;
                    }
                }
                if seen {
                    Ok(ExtReal::PosInf)
                } else {
                    Err(de::Error::custom("expected {\"inf\": true}"))
                }
            }
        }

        deserializer.deserialize_any(ExtVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_saturates() {
        let a = ExtReal::Finite(1.5);
        assert_eq!(a + ExtReal::Finite(2.5), ExtReal::Finite(4.0));
        assert_eq!(a + ExtReal::PosInf, ExtReal::PosInf);
        assert_eq!(ExtReal::from_f64(f64::MAX) + ExtReal::Finite(f64::MAX), ExtReal::PosInf);
    }

    #[test]
    fn zero_times_infinity_is_zero() {
        assert_eq!(ExtReal::PosInf.scale_nonneg(0.0), ExtReal::ZERO);
        assert_eq!(ExtReal::PosInf.scale_nonneg(0.5), ExtReal::PosInf);
        assert_eq!(ExtReal::Finite(3.0).scale_nonneg(2.0), ExtReal::Finite(6.0));
    }

    #[test]
    fn ordering() {
        assert!(ExtReal::Finite(1e300) < ExtReal::PosInf);
        assert!(ExtReal::Finite(-1.0) < ExtReal::Finite(0.0));
        assert!(ExtReal::PosInf >= ExtReal::PosInf);
    }

    #[test]
    fn json_round_trip() {
        let fin = serde_json::to_string(&ExtReal::Finite(0.25)).unwrap();
        assert_eq!(fin, "0.25");
        let inf = serde_json::to_string(&ExtReal::PosInf).unwrap();
        assert_eq!(inf, r#"{"inf":true}"#);
        assert_eq!(
            serde_json::from_str::<ExtReal>("0.25").unwrap(),
            ExtReal::Finite(0.25)
        );
        assert_eq!(
            serde_json::from_str::<ExtReal>(r#"{"inf":true}"#).unwrap(),
            ExtReal::PosInf
        );
        assert_eq!(serde_json::from_str::<ExtReal>(r#""inf""#).unwrap(), ExtReal::PosInf);
    }
}
