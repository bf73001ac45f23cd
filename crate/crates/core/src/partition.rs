//! Finite partitions of the likelihood-ratio axis and their divergences.
//!
//! A [`Partition`] is an ordered list of disjoint [`RatioInterval`] cells
//! covering `[0, +∞]`. Its divergence `Σ_k R(E_k)·f(P(E_k)/R(E_k))` is the
//! f-divergence of the coarsened pair and never exceeds `D_f` (Jensen);
//! refining a partition never decreases it. Partitions here are restricted
//! to ratio-level-set form — the certified constructions only ever produce
//! such partitions, and any measurable partition is dominated by one of
//! this form. Fully general partitions of a finite space are reachable
//! through the brute-force oracle, which enumerates set partitions by
//! restricted-growth strings.

use crate::divergence::DivergenceValue;
use crate::ext::ExtReal;
use crate::generator::Generator;
use crate::interval::RatioInterval;
use crate::measure::{DiscretePair, MeasurePair, MASS_SUM_TOL};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Guard: Bell(12) ≈ 4.2 million set partitions keeps brute force at desk
/// scale.
pub const BRUTE_FORCE_MAX_SUPPORT: usize = 12;

/// An ordered finite partition of `[0, +∞]` into ratio-interval cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    cells: Vec<RatioInterval>,
}

impl Partition {
    /// The single-cell partition `{[0, +∞]}`.
    pub fn trivial() -> Partition {
        Partition {
            cells: vec![RatioInterval::full()],
        }
    }

    /// Builds the canonical partition from interior cut points:
    /// `[0, c_1), [c_1, c_2), …, [c_m, +∞]`. No cuts means the trivial
    /// partition.
    pub fn from_cuts(cuts: &[f64]) -> Result<Partition> {
        for &c in cuts {
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::BadPartition(format!(
                    "cut points must be positive finite reals, got {c}"
                )));
            }
        }
        if cuts.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::BadPartition(
                "cut points must be strictly increasing".into(),
            ));
        }
        let mut cells = Vec::with_capacity(cuts.len() + 1);
        let mut lo = 0.0;
        for &c in cuts {
            cells.push(RatioInterval::half_open(lo, c)?);
            lo = c;
        }
        cells.push(RatioInterval::closed(lo, f64::INFINITY)?);
        Ok(Partition { cells })
    }

    /// Builds a partition from explicit cells, validating that they are
    /// nonempty, disjoint, ordered and cover `[0, +∞]` with each boundary
    /// point owned by exactly one cell.
    pub fn from_cells(cells: Vec<RatioInterval>) -> Result<Partition> {
        if cells.is_empty() {
            return Err(Error::BadPartition("a partition needs at least one cell".into()));
        }
        if let Some(c) = cells.iter().find(|c| c.is_empty()) {
            return Err(Error::BadPartition(format!("cell {c} is empty")));
        }
        let first = &cells[0];
        if !(first.lo() == 0.0 && first.lo_closed()) {
            return Err(Error::BadPartition(format!(
                "first cell {first} must start closed at 0"
            )));
        }
        let last = &cells[cells.len() - 1];
        if !(last.hi() == f64::INFINITY && last.hi_closed()) {
            return Err(Error::BadPartition(format!(
                "last cell {last} must end closed at +inf"
            )));
        }
        for w in cells.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            if a.hi() != b.lo() || !(a.hi_closed() ^ b.lo_closed()) {
                return Err(Error::BadPartition(format!(
                    "cells {a} and {b} do not tile the axis"
                )));
            }
        }
        Ok(Partition { cells })
    }

    pub fn cells(&self) -> &[RatioInterval] {
        &self.cells
    }

    /// Number of cells `m ≥ 1`.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The cut-point representation, when the partition is in canonical
    /// half-open form.
    pub fn as_cuts(&self) -> Option<Vec<f64>> {
        let canonical = self
            .cells
            .iter()
            .enumerate()
            .all(|(k, c)| c.lo_closed() && (c.hi_closed() == (k + 1 == self.cells.len())));
        canonical.then(|| self.cells.iter().skip(1).map(|c| c.lo()).collect())
    }

    /// Splits cell `cell_index` at an interior ratio value, leaving every
    /// other cell unchanged.
    pub fn refine(&self, cell_index: usize, split_point: f64) -> Result<Partition> {
        let cell = self.cells.get(cell_index).ok_or_else(|| {
            Error::BadPartition(format!(
                "cell index {cell_index} out of range for {} cells",
                self.cells.len()
            ))
        })?;
        let (left, right) = cell.split_at(split_point).map_err(|_| Error::BadSplit {
            cell: cell_index,
            split: split_point,
        })?;
        let mut cells = self.cells.clone();
        cells.splice(cell_index..=cell_index, [left, right]);
        Ok(Partition { cells })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PartitionRepr {
    Cuts { cuts: Vec<f64> },
    Cells { cells: Vec<RatioInterval> },
}

impl Serialize for Partition {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.as_cuts() {
            Some(cuts) => PartitionRepr::Cuts { cuts }.serialize(s),
            None => PartitionRepr::Cells {
                cells: self.cells.clone(),
            }
            .serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PartitionRepr::deserialize(d)?;
        let built = match repr {
            PartitionRepr::Cuts { cuts } => Partition::from_cuts(&cuts),
            PartitionRepr::Cells { cells } => Partition::from_cells(cells),
        };
        built.map_err(serde::de::Error::custom)
    }
}

fn mass_error_disclosure(pair: &MeasurePair, cells: usize) -> f64 {
    match pair {
        MeasurePair::Gaussian(_) => pair.mass_tolerance() * cells as f64,
        _ => pair.mass_tolerance(),
    }
}

/// `Σ_k R(E_k) f(P(E_k)/R(E_k))` with the boundary conventions:
/// cells with `R = 0 < P` contribute `P·f'(∞)`, cells with `P = R = 0`
/// contribute nothing.
pub fn partition_divergence(
    g: &Generator,
    pair: &MeasurePair,
    part: &Partition,
) -> Result<DivergenceValue> {
    let mut total = 0.0f64;
    let mut infinite = false;
    for cell in part.cells() {
        let (p, r) = pair.ratio_interval_masses(cell);
        match g.cell_value(p, r) {
            ExtReal::PosInf => {
                infinite = true;
                break;
            }
            ExtReal::Finite(v) => total += v,
        }
    }
    let value = if infinite {
        ExtReal::PosInf
    } else {
        ExtReal::from_f64(total)
    };
    Ok(DivergenceValue::new(
        value,
        mass_error_disclosure(pair, part.len()),
    ))
}

/// Materializes the coarsened pair `(P(E_k))_k, (R(E_k))_k` as a discrete
/// pair, so that `divergence(g, coarsen(pair, part))` equals
/// `partition_divergence(g, pair, part)` within model tolerance.
pub fn coarsen(pair: &MeasurePair, part: &Partition) -> Result<DiscretePair> {
    let mut p = Vec::with_capacity(part.len());
    let mut r = Vec::with_capacity(part.len());
    for cell in part.cells() {
        let (pm, rm) = pair.ratio_interval_masses(cell);
        p.push(pm);
        r.push(rm);
    }
    let tol = MASS_SUM_TOL.max(4.0 * pair.mass_tolerance() * part.len() as f64);
    DiscretePair::with_sum_tolerance(p, r, tol)
}

/// `(α−1)^{-1} ln Σ_k P(E_k)^α / R(E_k)^{α−1}` — the Rényi lower bound of
/// a partition, computed directly from the cell masses.
pub fn renyi_partition_bound(
    alpha: f64,
    pair: &MeasurePair,
    part: &Partition,
) -> Result<DivergenceValue> {
    if !(alpha > 0.0) || alpha == 1.0 || !alpha.is_finite() {
        return Err(Error::BadAlpha(alpha));
    }
    let mut sum = 0.0f64;
    let mut infinite = false;
    for cell in part.cells() {
        let (p, r) = pair.ratio_interval_masses(cell);
        if p == 0.0 {
            continue;
        }
        if r == 0.0 {
            if alpha > 1.0 {
                infinite = true;
                break;
            }
            // α < 1: P^α R^{1−α} → 0 as R → 0.
            continue;
        }
        sum += p.powf(alpha) * r.powf(1.0 - alpha);
    }
    let value = if infinite || (sum == 0.0 && alpha < 1.0) {
        ExtReal::PosInf
    } else {
        ExtReal::from_f64(sum.ln() / (alpha - 1.0))
    };
    Ok(DivergenceValue::new(
        value,
        mass_error_disclosure(pair, part.len()),
    ))
}

/// Iterates restricted-growth strings: `a[0] = 0` and
/// `a[j] ≤ max(a[..j]) + 1`, one string per set partition.
struct GrowthStrings {
    a: Vec<usize>,
    b: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl GrowthStrings {
    fn new(n: usize) -> GrowthStrings {
        GrowthStrings {
            a: vec![0; n],
            b: vec![1; n],
            fresh: true,
            done: n == 0,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(&self.a);
        }
        let n = self.a.len();
        let mut j = n;
        while j > 1 {
            j -= 1;
            if self.a[j] < self.b[j] {
                self.a[j] += 1;
                let m = self.b[j].max(self.a[j] + 1);
                for k in j + 1..n {
                    self.a[k] = 0;
                    self.b[k] = m;
                }
                return Some(&self.a);
            }
        }
        self.done = true;
        None
    }
}

/// Full search result of the supremum oracle.
#[derive(Debug, Clone, Serialize)]
pub struct BruteForceOutcome {
    pub value: DivergenceValue,
    /// Argmax partition as index blocks over the pair's support.
    pub best_blocks: Vec<Vec<usize>>,
    pub partitions_checked: u64,
}

/// Maximizes `Σ_blocks R(B) f(P(B)/R(B))` over every set partition of the
/// support (restricted-growth-string enumeration, `n ≤ 12`).
pub fn brute_force_search(g: &Generator, pair: &DiscretePair) -> Result<BruteForceOutcome> {
    let support = pair.support();
    let n = support.len();
    if n > BRUTE_FORCE_MAX_SUPPORT {
        return Err(Error::SizeGuard {
            n,
            max: BRUTE_FORCE_MAX_SUPPORT,
        });
    }
    let p = pair.p();
    let r = pair.r();
    let mut strings = GrowthStrings::new(n);
    let mut best: Option<(ExtReal, Vec<usize>)> = None;
    let mut checked = 0u64;
    let mut p_blk = vec![0.0f64; n];
    let mut r_blk = vec![0.0f64; n];
    while let Some(a) = strings.next() {
        checked += 1;
        let blocks = a.iter().copied().max().unwrap_or(0) + 1;
        p_blk[..blocks].fill(0.0);
        r_blk[..blocks].fill(0.0);
        for (k, &idx) in support.iter().enumerate() {
            p_blk[a[k]] += p[idx];
            r_blk[a[k]] += r[idx];
        }
        let mut value = ExtReal::ZERO;
        for b in 0..blocks {
            value = value + g.cell_value(p_blk[b], r_blk[b]);
        }
        let improved = match &best {
            None => true,
            Some((v, _)) => value > *v,
        };
        if improved {
            best = Some((value, a.to_vec()));
        }
    }
    let (value, assignment) = best.ok_or_else(|| {
        Error::Domain("pair has empty support".into())
    })?;
    let blocks_n = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut best_blocks = vec![Vec::new(); blocks_n];
    for (k, &idx) in support.iter().enumerate() {
        best_blocks[assignment[k]].push(idx);
    }
    Ok(BruteForceOutcome {
        value: DivergenceValue::exact(value),
        best_blocks,
        partitions_checked: checked,
    })
}

/// The supremum of the discretized divergence over every set partition of
/// the support. For finite discrete pairs this equals `divergence(g, pair)`
/// and is attained at the all-singletons partition.
pub fn brute_force_supremum(g: &Generator, pair: &DiscretePair) -> Result<DivergenceValue> {
    Ok(brute_force_search(g, pair)?.value)
}
