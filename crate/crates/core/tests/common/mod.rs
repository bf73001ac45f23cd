//! Shared generators of random inputs for the integration suites.

use divcert::measure::MeasurePair;
use divcert::{DiscretePair, Partition};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A strictly positive discrete pair on `n` points.
pub fn random_positive_pair(rng: &mut ChaCha8Rng, n: usize) -> DiscretePair {
    let draw = |rng: &mut ChaCha8Rng| {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
        let sum: f64 = v.iter().sum();
        for x in &mut v {
            *x /= sum;
        }
        v
    };
    let p = draw(rng);
    let r = draw(rng);
    DiscretePair::new(p, r).expect("normalized by construction")
}

/// A tame Gaussian pair: sd ratio stays below the chi-square criticality
/// threshold so every built-in divergence is finite and integrable.
pub fn random_gaussian_pair(rng: &mut ChaCha8Rng) -> MeasurePair {
    let mean1 = rng.random_range(-1.0..1.0);
    let mean2 = rng.random_range(-1.0..1.0);
    let sd1 = rng.random_range(0.85..1.1);
    let sd2 = rng.random_range(0.85..1.1);
    divcert::measure::gaussian_pair(mean1, sd1, mean2, sd2).expect("valid parameters")
}

/// Random partition with up to `max_cuts` log-uniform cut points.
pub fn random_partition(rng: &mut ChaCha8Rng, max_cuts: usize) -> Partition {
    let k = rng.random_range(0..=max_cuts);
    let mut cuts: Vec<f64> = (0..k)
        .map(|_| 10f64.powf(rng.random_range(-1.5..1.5)))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Partition::from_cuts(&cuts).expect("sorted positive cuts")
}

/// Random refinement target: a cell index and an interior split point.
pub fn random_split(rng: &mut ChaCha8Rng, part: &Partition) -> (usize, f64) {
    let idx = rng.random_range(0..part.len());
    let cell = &part.cells()[idx];
    let lo = cell.lo();
    let hi = if cell.hi().is_finite() {
        cell.hi()
    } else {
        (lo.max(1.0)) * rng.random_range(2.0..8.0)
    };
    let t = rng.random_range(0.25..0.75);
    let split = lo + t * (hi - lo);
    (idx, split)
}
