//! Constructive partition certificates.
//!
//! [`gyp_approximate`] builds, for a pair with finite divergence and a
//! requested `ε > 0`, a finite ratio partition whose coarsened divergence
//! is within `ε` of `D_f`. The construction follows the recipe behind the
//! partition-supremum theorem: shrink the two tails `A_H = {ρ < H}` and
//! `C_K = {ρ ≥ K}` until each single-cell Jensen gap drops below `ε/3`,
//! then cut `[H₀, K₀]` into equal ratio intervals finer than
//! `δ = ε/(3L)`, where `L` bounds the slope of the normalized generator on
//! the mid-range. Every quantity in the certificate is computed, not
//! assumed, so the result can be revalidated by replaying the masses.
//!
//! [`detect_infinite`] handles the complementary case: when `D_f = ∞`, the
//! level cells `D_n = {b_{n−1} ≤ ρ < b_n}` (and their mirror images left
//! of 1) have `Σ f̃(P(D_n)/R(D_n))·R(D_n) = ∞`, so running partial sums
//! past any target `M` certifies that some finite partition beats `M`.
//! The scan jumps over empty bands using the pair's ratio support, and
//! past the band levels representable in `f64` it falls back to per-atom
//! point cells, which are finer than bands and only tighten the bound.

use crate::divergence::{divergence, DivergenceValue};
use crate::ext::ExtReal;
use crate::generator::{Generator, NormalizedGenerator};
use crate::interval::RatioInterval;
use crate::measure::MeasurePair;
use crate::partition::{partition_divergence, Partition};
use crate::{Error, Result};
use serde::Serialize;

/// Smallest tail threshold tried before giving up on the lower tail.
pub const TAIL_H_FLOOR: f64 = 1e-12;

/// Largest tail threshold tried before giving up on the upper tail.
pub const TAIL_K_CEIL: f64 = 1e12;

/// Guard on the interior cell count of a certificate partition.
const MAX_INTERIOR_CELLS: f64 = 1e8;

/// Band indices above this lose unit spacing in `f64`; the infinite scan
/// switches to per-atom point cells there.
const MAX_BAND_LEVEL: f64 = 9.0e15;

/// Ratio cap for threshold searches inside the infinite scan. Doubling
/// stays clear of overflow and everything beyond is handled by point
/// cells or the terminal cell.
const DETECT_RATIO_CAP: f64 = 1e300;

/// An ε-tight lower-bound certificate for a finite divergence.
#[derive(Debug, Clone, Serialize)]
pub struct ApproxResult {
    /// The witness partition `{A_{H₀}, I_1, …, I_m, C_{K₀}}`.
    pub partition: Partition,
    /// Its coarsened divergence, a certified lower bound on `D_f`.
    pub lower_bound: f64,
    /// The requested tightness.
    pub epsilon: f64,
    /// Lower tail threshold: `A = [0, H₀)`.
    pub h0: f64,
    /// Upper tail threshold: `C = [K₀, +∞]`.
    pub k0: f64,
    /// Interior bin-width bound `ε/(3L)`.
    pub delta: f64,
    /// Jensen gap of the lower tail cell (must be `< ε/3`).
    pub tail_gap_low: f64,
    /// Jensen gap of the upper tail cell (must be `< ε/3`).
    pub tail_gap_high: f64,
    /// The reference divergence the bound is certified against.
    pub reference: DivergenceValue,
    /// Support-line slope used by the normalization.
    pub slope: f64,
}

impl ApproxResult {
    /// Number of interior cells `m` between the two tail cells.
    pub fn interior_cells(&self) -> usize {
        self.partition.len().saturating_sub(2)
    }

    /// `reference − lower_bound`, the realized certificate gap.
    pub fn gap(&self) -> f64 {
        self.reference.value.as_f64() - self.lower_bound
    }
}

/// Jensen gap of one tail cell: restricted integral minus the single-cell
/// coarsened value.
fn tail_gap(ft: &Generator, pair: &MeasurePair, cell: &RatioInterval) -> Result<f64> {
    let restricted = pair.restricted_divergence(ft, cell)?;
    let (p, r) = pair.ratio_interval_masses(cell);
    let coarse = ft.cell_value(p, r);
    match (restricted.value, coarse) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => Ok((a - b).max(0.0)),
        _ => Err(Error::InfiniteDivergence),
    }
}

/// Builds an ε-tight partition certificate for `D_f(P, R) < ∞`.
pub fn gyp_approximate(
    g: &Generator,
    pair: &MeasurePair,
    epsilon: f64,
) -> Result<ApproxResult> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Domain(format!(
            "epsilon must be a positive finite real, got {epsilon}"
        )));
    }
    let ng = g.normalize();
    let ft = ng.tilde();

    let reference = divergence(ft, pair)?;
    if !reference.finite {
        return Err(Error::InfiniteDivergence);
    }
    if reference.error_bound > epsilon / 10.0 {
        return Err(Error::Accuracy {
            context: format!(
                "pair model accuracy {:.3e} is worse than epsilon/10",
                reference.error_bound
            ),
            best: reference.value.as_f64(),
            error: reference.error_bound,
        });
    }
    let target = epsilon / 3.0;

    let gap_at_h = |h: f64| tail_gap(ft, pair, &RatioInterval::half_open(0.0, h)?);
    let gap_at_k = |k: f64| tail_gap(ft, pair, &RatioInterval::closed(k, f64::INFINITY)?);

    let shrink_lower = |mut h: f64| -> Result<(f64, f64)> {
        let mut gap = gap_at_h(h)?;
        while gap >= target {
            h *= 0.5;
            if h < TAIL_H_FLOOR {
                return Err(Error::Accuracy {
                    context: format!("lower tail gap stuck at {gap:.3e} with H below {TAIL_H_FLOOR:e}"),
                    best: gap,
                    error: gap,
                });
            }
            gap = gap_at_h(h)?;
        }
        Ok((h, gap))
    };
    let grow_upper = |mut k: f64| -> Result<(f64, f64)> {
        let mut gap = gap_at_k(k)?;
        while gap >= target {
            k *= 2.0;
            if k > TAIL_K_CEIL {
                return Err(Error::Accuracy {
                    context: format!("upper tail gap stuck at {gap:.3e} with K above {TAIL_K_CEIL:e}"),
                    best: gap,
                    error: gap,
                });
            }
            gap = gap_at_k(k)?;
        }
        Ok((k, gap))
    };

    let (mut h0, mut gap_low) = shrink_lower(1.0)?;
    let (mut k0, mut gap_high) = grow_upper(1.0)?;
    if h0 == k0 {
        // Both tails vanish at 1; widen once so the three regions are
        // distinct intervals and the invariant H0 < K0 holds.
        (h0, gap_low) = shrink_lower(0.5)?;
        (k0, gap_high) = grow_upper(2.0)?;
    }

    // Slope bound for f̃ on [H0, K0]: convexity puts every interior slope
    // between the left slope at H0 and the right slope at K0.
    let (left_at_h, _) = ft.subgradient(h0)?;
    let (_, right_at_k) = ft.subgradient(k0)?;
    let lipschitz = left_at_h.abs().max(right_at_k.abs());
    let delta = if lipschitz > 0.0 {
        epsilon / (3.0 * lipschitz)
    } else {
        k0 - h0
    };
    let m = ((k0 - h0) / delta).ceil().max(1.0);
    if !(m <= MAX_INTERIOR_CELLS) {
        return Err(Error::Accuracy {
            context: format!("certificate would need {m:.3e} interior cells"),
            best: f64::NAN,
            error: f64::INFINITY,
        });
    }
    let m = m as usize;
    let width = (k0 - h0) / m as f64;
    let mut cuts = Vec::with_capacity(m + 1);
    for i in 0..m {
        cuts.push(h0 + i as f64 * width);
    }
    cuts.push(k0);
    let partition = Partition::from_cuts(&cuts)?;

    let lower = partition_divergence(ft, pair, &partition)?;
    let lower_bound = lower.value.finite().ok_or(Error::InfiniteDivergence)?;
    Ok(ApproxResult {
        partition,
        lower_bound,
        epsilon,
        h0,
        k0,
        delta,
        tail_gap_low: gap_low,
        tail_gap_high: gap_high,
        reference,
        slope: ng.slope(),
    })
}

/// One cell of the exceedance evidence.
#[derive(Debug, Clone, Serialize)]
pub struct EvidenceCell {
    /// Band index `n` for unit bands `{n−1 ≤ f̃ < n}`; for point cells the
    /// generator level at the atom.
    pub level: f64,
    pub cell: RatioInterval,
    pub p_mass: f64,
    pub r_mass: f64,
    /// `R(D)·f̃(P(D)/R(D))`, the cell's contribution.
    pub term: ExtReal,
}

/// Partial-sum evidence that the partition supremum exceeds a target.
#[derive(Debug, Clone, Serialize)]
pub struct InfinityEvidence {
    /// The exceedance target `M`.
    pub target: f64,
    /// Whether the partial sums passed `M`. `false` is inconclusive: the
    /// cell budget ran out first.
    pub exceeded: bool,
    /// Number of cells examined.
    pub n_used: u64,
    pub cells: Vec<EvidenceCell>,
    /// Running sums of the cell terms, nondecreasing.
    pub partial_sums: Vec<ExtReal>,
    /// Thresholds computed along the way (upper `b_n`, lower `c_n`,
    /// point-cell locations), in discovery order.
    pub thresholds: Vec<ExtReal>,
}

impl InfinityEvidence {
    /// The final partial sum.
    pub fn total(&self) -> ExtReal {
        self.partial_sums.last().copied().unwrap_or(ExtReal::ZERO)
    }

    /// Completes the evidence cells into a finite partition of `[0, +∞]`
    /// by filling the uncovered remainder; its coarsened divergence is at
    /// least the final partial sum.
    pub fn to_partition(&self) -> Result<Partition> {
        let mut cells: Vec<RatioInterval> = self.cells.iter().map(|c| c.cell).collect();
        cells.sort_by(|a, b| {
            a.lo()
                .total_cmp(&b.lo())
                .then(b.lo_closed().cmp(&a.lo_closed()))
        });
        let mut out: Vec<RatioInterval> = Vec::with_capacity(cells.len() * 2 + 2);
        let mut pos = 0.0f64;
        let mut pos_open = false; // true once `pos` itself is already covered
        for cell in cells {
            let filler = RatioInterval::new(pos, !pos_open, cell.lo(), !cell.lo_closed())?;
            if !filler.is_empty() {
                out.push(filler);
            }
            out.push(cell);
            pos = cell.hi();
            pos_open = cell.hi_closed();
        }
        if !(pos == f64::INFINITY && pos_open) {
            let filler = RatioInterval::new(pos, !pos_open, f64::INFINITY, true)?;
            if !filler.is_empty() {
                out.push(filler);
            }
        }
        Partition::from_cells(out)
    }
}

struct Accumulator {
    target: f64,
    cells: Vec<EvidenceCell>,
    partial_sums: Vec<ExtReal>,
    thresholds: Vec<ExtReal>,
    sum: ExtReal,
    exceeded: bool,
}

impl Accumulator {
    fn push(&mut self, pair: &MeasurePair, ft: &Generator, level: f64, cell: RatioInterval, threshold: ExtReal) {
        let (p, r) = pair.ratio_interval_masses(&cell);
        let term = ft.cell_value(p, r);
        self.sum = self.sum + term;
        self.cells.push(EvidenceCell {
            level,
            cell,
            p_mass: p,
            r_mass: r,
            term,
        });
        self.partial_sums.push(self.sum);
        self.thresholds.push(threshold);
        if self.sum > ExtReal::Finite(self.target) {
            self.exceeded = true;
        }
    }
}

/// Scans the level cells above `ρ = 1`. Returns `true` while the branch
/// has more cells to visit.
fn upper_step(
    ng: &NormalizedGenerator,
    pair: &MeasurePair,
    acc: &mut Accumulator,
    cursor: &mut f64,
    edge_open: &mut bool,
) -> Result<bool> {
    let ft = ng.tilde();
    let Some(next) = pair.next_ratio_at_or_above(*cursor, *edge_open) else {
        return Ok(false);
    };
    if next.is_infinite() {
        // Only the +∞ ratio region is left (true r = 0 atoms and
        // saturated quotients): one terminal cell captures it.
        let cell = RatioInterval::new(*cursor, !*edge_open, f64::INFINITY, true)?;
        acc.push(pair, ft, f64::INFINITY, cell, ExtReal::PosInf);
        return Ok(false);
    }
    let level_at_next = ft.eval_raw(next).max(0.0);
    let band = level_at_next.floor() + 1.0;
    if level_at_next.is_finite() && band <= MAX_BAND_LEVEL {
        let crossing = ng.crossing_above_one(band, DETECT_RATIO_CAP);
        match crossing.value {
            ExtReal::Finite(found) => {
                // Absorb any skipped empty bands into this cell: there is
                // no mass in [cursor, next).
                let hi = found.max(next.next_up());
                let cell = RatioInterval::new(*cursor, !*edge_open, hi, false)?;
                acc.push(pair, ft, band, cell, ExtReal::Finite(hi));
                *cursor = hi;
                *edge_open = false;
                Ok(true)
            }
            ExtReal::PosInf => {
                // f̃ never reaches the band level: everything remaining is
                // one final cell.
                let cell = RatioInterval::new(*cursor, !*edge_open, f64::INFINITY, true)?;
                acc.push(pair, ft, band, cell, ExtReal::PosInf);
                Ok(false)
            }
        }
    } else {
        // Band indices have outgrown f64 integer spacing: isolate the atom
        // as a point cell, which is a finer (hence still valid) refinement.
        let cell = RatioInterval::point(next)?;
        let (p, r) = pair.ratio_interval_masses(&cell);
        if p == 0.0 && r == 0.0 {
            return Ok(false);
        }
        acc.push(pair, ft, level_at_next, cell, ExtReal::Finite(next));
        *cursor = next;
        *edge_open = true;
        Ok(true)
    }
}

/// Mirror scan on the nonincreasing branch left of `ρ = 1`.
fn lower_step(
    ng: &NormalizedGenerator,
    pair: &MeasurePair,
    acc: &mut Accumulator,
    cursor: &mut f64,
    edge_open: &mut bool,
) -> Result<bool> {
    let ft = ng.tilde();
    let Some(prev) = pair.prev_ratio_at_or_below(*cursor, *edge_open) else {
        return Ok(false);
    };
    let level_at_prev = ft.eval_raw(prev).max(0.0);
    let band = level_at_prev.floor() + 1.0;
    if level_at_prev.is_finite() && band <= MAX_BAND_LEVEL {
        match ng.crossing_below_one(band) {
            Some(c) => {
                let cell = RatioInterval::new(c, false, *cursor, !*edge_open)?;
                acc.push(pair, ft, band, cell, ExtReal::Finite(c));
                *cursor = c;
                *edge_open = false;
                Ok(true)
            }
            None => {
                // f̃(0) < band: the rest of the left tail, zero atom
                // included, forms the final lower cell.
                let cell = RatioInterval::new(0.0, true, *cursor, !*edge_open)?;
                acc.push(pair, ft, band, cell, ExtReal::Finite(0.0));
                Ok(false)
            }
        }
    } else {
        let cell = RatioInterval::point(prev)?;
        let (p, r) = pair.ratio_interval_masses(&cell);
        if p == 0.0 && r == 0.0 {
            return Ok(false);
        }
        acc.push(pair, ft, level_at_prev, cell, ExtReal::Finite(prev));
        if prev == 0.0 {
            return Ok(false);
        }
        *cursor = prev;
        *edge_open = true;
        Ok(true)
    }
}

/// Accumulates level-cell partial sums until they exceed `target` or the
/// cell budget `n_max` runs out.
///
/// `exceeded = true` certifies that the partition completed from the
/// visited cells has coarsened divergence above `target`, hence so does
/// the partition supremum. `exceeded = false` is inconclusive.
pub fn detect_infinite(
    g: &Generator,
    pair: &MeasurePair,
    target: f64,
    n_max: u64,
) -> Result<InfinityEvidence> {
    if !(target > 0.0) || !target.is_finite() {
        return Err(Error::Domain(format!(
            "exceedance target must be a positive finite real, got {target}"
        )));
    }
    if n_max == 0 {
        return Err(Error::Domain("n_max must be >= 1".into()));
    }
    let ng = g.normalize();
    let mut acc = Accumulator {
        target,
        cells: Vec::new(),
        partial_sums: Vec::new(),
        thresholds: Vec::new(),
        sum: ExtReal::ZERO,
        exceeded: false,
    };

    let (mut up_cursor, mut up_open, mut up_active) = (1.0f64, true, true);
    let (mut low_cursor, mut low_open, mut low_active) = (1.0f64, true, true);

    while (up_active || low_active) && !acc.exceeded && (acc.cells.len() as u64) < n_max {
        if up_active {
            up_active = upper_step(&ng, pair, &mut acc, &mut up_cursor, &mut up_open)?;
        }
        if acc.exceeded || (acc.cells.len() as u64) >= n_max {
            break;
        }
        if low_active {
            low_active = lower_step(&ng, pair, &mut acc, &mut low_cursor, &mut low_open)?;
        }
    }

    Ok(InfinityEvidence {
        target,
        exceeded: acc.exceeded,
        n_used: acc.cells.len() as u64,
        cells: acc.cells,
        partial_sums: acc.partial_sums,
        thresholds: acc.thresholds,
    })
}

/// One row of a convergence sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub m_cells: usize,
    pub lower_bound: f64,
    pub gap: f64,
}

/// Runs [`gyp_approximate`] once per tolerance and tabulates the realized
/// gaps. Tolerances must be positive and strictly decreasing.
///
/// Each row's partition is merged with the cuts accumulated from the
/// previous rows, so successive rows are genuine refinements: the gap
/// column is nonincreasing by the refinement theorem, not by luck, and
/// every row still satisfies its own ε certificate.
pub fn convergence_sweep(
    g: &Generator,
    pair: &MeasurePair,
    epsilons: &[f64],
) -> Result<Vec<SweepRow>> {
    if epsilons.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::Domain("sweep tolerances must be positive finite reals".into()));
    }
    if epsilons.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::Domain("sweep tolerances must be strictly decreasing".into()));
    }
    let ng = g.normalize();
    let ft = ng.tilde();
    let mut rows = Vec::with_capacity(epsilons.len());
    let mut carry: Vec<f64> = Vec::new();
    for &epsilon in epsilons {
        let approx = gyp_approximate(g, pair, epsilon)?;
        let mut cuts = approx
            .partition
            .as_cuts()
            .expect("certificate partitions are canonical");
        cuts.extend_from_slice(&carry);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let merged = Partition::from_cuts(&cuts)?;
        let bound = partition_divergence(ft, pair, &merged)?;
        let lower_bound = bound.value.finite().ok_or(Error::InfiniteDivergence)?;
        rows.push(SweepRow {
            epsilon,
            m_cells: merged.len().saturating_sub(2),
            lower_bound,
            gap: approx.reference.value.as_f64() - lower_bound,
        });
        carry = cuts;
    }
    Ok(rows)
}
