//! JSON schemas for measure pairs and partitions.
//!
//! Pair files are tagged by `"model"`:
//!
//! ```json
//! {"model": "discrete", "p": [0.5, 0.5], "r": [0.25, 0.75]}
//! {"model": "gaussian", "p": {"mean": 0, "sd": 1}, "r": {"mean": 1, "sd": 1}}
//! {"model": "grid", "edges": [0, 1, 2], "p_mass": [0.5, 0.5], "r_mass": [0.25, 0.75]}
//! {"model": "countable", "name": "telescoping_vs_geometric", "cap": 100000}
//! ```
//!
//! Countable pairs come from the built-in registry
//! ([`CountablePair::builtin_names`]); arbitrary term functions are only
//! constructible programmatically. Partition literals are
//! `{"cuts": [0.5, 1, 2]}`, meaning `[0, 0.5), [0.5, 1), [1, 2), [2, +∞]`,
//! or the explicit `{"cells": [...]}` form produced by certificates.

use crate::measure::{
    CountablePair, DiscretePair, GaussianPair, GridPair, MeasurePair, DEFAULT_COUNTABLE_CAP,
};
use crate::partition::Partition;
use crate::Result;
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GaussParam {
    pub mean: f64,
    pub sd: f64,
}

/// Declarative form of a [`MeasurePair`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum PairSpec {
    Discrete {
        p: Vec<f64>,
        r: Vec<f64>,
    },
    Gaussian {
        p: GaussParam,
        r: GaussParam,
    },
    Grid {
        edges: Vec<f64>,
        p_mass: Vec<f64>,
        r_mass: Vec<f64>,
    },
    Countable {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cap: Option<u64>,
    },
}

impl PairSpec {
    /// Validates and builds the pair. `quad_tol` overrides the default
    /// quadrature tolerance for Gaussian pairs.
    pub fn build(&self, quad_tol: Option<f64>) -> Result<MeasurePair> {
        match self {
            PairSpec::Discrete { p, r } => {
                Ok(DiscretePair::new(p.clone(), r.clone())?.into())
            }
            PairSpec::Gaussian { p, r } => {
                let pair = match quad_tol {
                    Some(tol) => GaussianPair::with_quad_tol(p.mean, p.sd, r.mean, r.sd, tol)?,
                    None => GaussianPair::new(p.mean, p.sd, r.mean, r.sd)?,
                };
                Ok(pair.into())
            }
            PairSpec::Grid {
                edges,
                p_mass,
                r_mass,
            } => Ok(GridPair::new(edges.clone(), p_mass.clone(), r_mass.clone())?.into()),
            PairSpec::Countable { name, cap } => {
                Ok(CountablePair::builtin(name, cap.unwrap_or(DEFAULT_COUNTABLE_CAP))?.into())
            }
        }
    }
}

pub fn parse_pair(json: &str) -> Result<PairSpec> {
    Ok(serde_json::from_str(json)?)
}

pub fn load_pair(path: impl AsRef<Path>) -> Result<PairSpec> {
    parse_pair(&std::fs::read_to_string(path)?)
}

pub fn parse_partition(json: &str) -> Result<Partition> {
    Ok(serde_json::from_str(json)?)
}

pub fn load_partition(path: impl AsRef<Path>) -> Result<Partition> {
    parse_partition(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interval::RatioInterval;

    #[test]
    fn discrete_spec_round_trip() {
        let spec = parse_pair(r#"{"model":"discrete","p":[0.5,0.5],"r":[0.25,0.75]}"#).unwrap();
        let pair = spec.build(None).unwrap();
        assert_eq!(pair.ratio_interval_masses(&RatioInterval::full()), (1.0, 1.0));
        let json = serde_json::to_string(&spec).unwrap();
        let again = parse_pair(&json).unwrap();
        assert!(matches!(again, PairSpec::Discrete { .. }));
    }

    #[test]
    fn gaussian_spec_builds() {
        let spec =
            parse_pair(r#"{"model":"gaussian","p":{"mean":0,"sd":1},"r":{"mean":1,"sd":1}}"#)
                .unwrap();
        assert!(matches!(spec.build(None), Ok(MeasurePair::Gaussian(_))));
        assert!(matches!(spec.build(Some(1e-8)), Ok(MeasurePair::Gaussian(_))));
        let bad = parse_pair(r#"{"model":"gaussian","p":{"mean":0,"sd":-1},"r":{"mean":1,"sd":1}}"#)
            .unwrap();
        assert!(bad.build(None).is_err());
    }

    #[test]
    fn grid_spec_builds() {
        let spec = parse_pair(
            r#"{"model":"grid","edges":[0,1,2],"p_mass":[0.5,0.5],"r_mass":[0.25,0.75]}"#,
        )
        .unwrap();
        let pair = spec.build(None).unwrap();
        let upper = RatioInterval::closed(1.0, f64::INFINITY).unwrap();
        assert_eq!(pair.ratio_interval_masses(&upper), (0.5, 0.25));
    }

    #[test]
    fn countable_spec_uses_registry() {
        let spec =
            parse_pair(r#"{"model":"countable","name":"zeta_vs_geometric","cap":1000}"#).unwrap();
        assert!(spec.build(None).is_ok());
        let unknown = parse_pair(r#"{"model":"countable","name":"nope"}"#).unwrap();
        assert!(unknown.build(None).is_err());
    }

    #[test]
    fn malformed_json_is_rejected() {
        assert!(parse_pair(r#"{"model":"discrete","p":[0.5]"#).is_err());
        assert!(parse_pair(r#"{"model":"cauchy","gamma":1}"#).is_err());
    }

    #[test]
    fn partition_literals() {
        let part = parse_partition(r#"{"cuts":[0.5,1,2]}"#).unwrap();
        assert_eq!(part.len(), 4);
        assert_eq!(part, Partition::from_cuts(&[0.5, 1.0, 2.0]).unwrap());
        assert!(parse_partition(r#"{"cuts":[2,1]}"#).is_err());
        let trivial = parse_partition(r#"{"cuts":[]}"#).unwrap();
        assert_eq!(trivial, Partition::trivial());
    }
}
