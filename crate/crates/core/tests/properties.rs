//! Property and oracle checks: sampled invariants with frozen seeds plus
//! proptest sweeps for the structural identities.

mod common;

use common::*;
use divcert::divergence::divergence;
use divcert::ext::ExtReal;
use divcert::generator::Generator;
use divcert::gyp::{convergence_sweep, detect_infinite, gyp_approximate};
use divcert::interval::RatioInterval;
use divcert::measure::{gaussian_pair, CountablePair, GridPair, MeasurePair};
use divcert::partition::{coarsen, partition_divergence, Partition};
use proptest::prelude::*;
use rand::RngExt;

// ---------------------------------------------------------------------------
// Generator invariants
// ---------------------------------------------------------------------------

#[test]
fn convexity_on_random_triples() {
    let mut rng = rng(11);
    for g in Generator::builtins() {
        for _ in 0..1000 {
            let u1 = 10f64.powf(rng.random_range(-3.0..3.0));
            let u2 = 10f64.powf(rng.random_range(-3.0..3.0));
            let t = rng.random_range(0.0..1.0);
            let mid = t * u1 + (1.0 - t) * u2;
            let lhs = g.eval(mid).unwrap();
            let rhs = t * g.eval(u1).unwrap() + (1.0 - t) * g.eval(u2).unwrap();
            let scale = 1.0f64.max(lhs.abs()).max(rhs.abs());
            assert!(
                lhs <= rhs + 1e-9 * scale,
                "{} not convex at ({u1}, {u2}, {t}): {lhs} > {rhs}",
                g.name()
            );
        }
    }
}

#[test]
fn builtin_evals_match_reference_formulas() {
    // Closed forms written out independently of the builtin definitions.
    #[allow(clippy::type_complexity)]
    let reference: Vec<(Generator, Box<dyn Fn(f64) -> f64>)> = vec![
        (Generator::kl(), Box::new(|u: f64| u * u.ln())),
        (Generator::tv(), Box::new(|u: f64| (u - 1.0).abs())),
        (Generator::chi_squared(), Box::new(|u: f64| u * u - 2.0 * u + 1.0)),
        (
            Generator::hellinger(),
            Box::new(|u: f64| u - 2.0 * u.sqrt() + 1.0),
        ),
        (
            Generator::tsallis(0.5).unwrap(),
            Box::new(|u: f64| 2.0 - 2.0 * u.sqrt()),
        ),
        (
            Generator::tsallis(2.0).unwrap(),
            Box::new(|u: f64| u * u - 1.0),
        ),
    ];
    for (g, f) in &reference {
        for k in -60..=60 {
            let u = 2f64.powf(k as f64 / 3.0);
            let got = g.eval(u).unwrap();
            let want = f(u);
            let scale = 1.0f64.max(want.abs());
            assert!(
                (got - want).abs() <= 1e-12 * scale,
                "{} at u={u}: {got} vs {want}",
                g.name()
            );
        }
    }
}

proptest! {
    #[test]
    fn level_threshold_brackets_the_level(n in 1u64..40) {
        for g in [Generator::kl(), Generator::chi_squared(), Generator::tsallis(2.0).unwrap()] {
            let ng = g.normalize();
            let t = ng.level_threshold(n).unwrap();
            let b = t.value.finite().expect("unbounded tilde for these generators is impossible");
            let h = 1e-9 * b.max(1.0);
            prop_assert!(ng.tilde().eval(b - h).unwrap() < n as f64);
            prop_assert!(ng.tilde().eval(b + h).unwrap() >= n as f64);
        }
    }
}

// ---------------------------------------------------------------------------
// Measure invariants
// ---------------------------------------------------------------------------

fn random_interval(rng: &mut rand_chacha::ChaCha8Rng) -> RatioInterval {
    let a = 10f64.powf(rng.random_range(-3.0..3.0));
    let b = 10f64.powf(rng.random_range(-3.0..3.0));
    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
    RatioInterval::new(lo, rng.random(), hi, rng.random()).unwrap()
}

#[test]
fn ratio_bound_fact_per_model() {
    let mut rng = rng(23);
    let models: Vec<MeasurePair> = vec![
        random_positive_pair(&mut rng, 7).into(),
        GridPair::new(
            vec![0.0, 0.5, 1.0, 2.0, 4.0],
            vec![0.1, 0.3, 0.4, 0.2],
            vec![0.25, 0.25, 0.25, 0.25],
        )
        .unwrap()
        .into(),
        random_gaussian_pair(&mut rng),
        CountablePair::builtin("telescoping_vs_geometric", 2000).unwrap().into(),
    ];
    for pair in &models {
        for _ in 0..1000 {
            let i = random_interval(&mut rng);
            let (p, r) = pair.ratio_interval_masses(&i);
            if r > 0.0 {
                let ratio = p / r;
                let slack = 1e-12 * ratio.max(1.0);
                assert!(
                    ratio >= i.lo() - slack && ratio <= i.hi() + slack,
                    "P/R = {ratio} escapes {i}"
                );
            }
        }
    }
}

#[test]
fn mass_additivity_over_random_splits() {
    let mut rng = rng(29);
    let discrete: MeasurePair = random_positive_pair(&mut rng, 9).into();
    let countable: MeasurePair = CountablePair::builtin("zeta_vs_geometric", 3000).unwrap().into();
    let gaussian = random_gaussian_pair(&mut rng);
    for _ in 0..500 {
        let a = 10f64.powf(rng.random_range(-2.0..2.0));
        let c = a + 10f64.powf(rng.random_range(-2.0..2.0));
        let b = a + (c - a) * rng.random_range(0.001..0.999);
        let whole = RatioInterval::closed(a, c).unwrap();
        let left = RatioInterval::half_open(a, b).unwrap();
        let right = RatioInterval::closed(b, c).unwrap();
        for (pair, tol) in [(&discrete, 1e-12), (&countable, 1e-12), (&gaussian, 1e-11)] {
            let (pw, rw) = pair.ratio_interval_masses(&whole);
            let (pl, rl) = pair.ratio_interval_masses(&left);
            let (pr, rr) = pair.ratio_interval_masses(&right);
            assert!((pw - (pl + pr)).abs() <= tol, "P additivity: {pw} vs {}", pl + pr);
            assert!((rw - (rl + rr)).abs() <= tol, "R additivity: {rw} vs {}", rl + rr);
        }
    }
}

#[test]
fn full_range_masses_are_unit() {
    let mut rng = rng(31);
    for _ in 0..50 {
        let n = 2 + rng.random_range(0..10);
        let pair: MeasurePair = random_positive_pair(&mut rng, n).into();
        let (p, r) = pair.ratio_interval_masses(&RatioInterval::full());
        assert!((p - 1.0).abs() <= 1e-12 && (r - 1.0).abs() <= 1e-12);
    }
    let (p, r) = random_gaussian_pair(&mut rng).ratio_interval_masses(&RatioInterval::full());
    assert!((p - 1.0).abs() <= 1e-12 && (r - 1.0).abs() <= 1e-12);
}

/// Region-finding oracle for Gaussian level sets: locate `{ρ ∈ I}` by
/// scanning density ratios on a dense grid (no quadratic formula), refine
/// the boundaries by bisection, then Simpson-integrate the densities.
mod gauss_oracle {
    use divcert::interval::RatioInterval;

    pub struct Pair {
        pub m1: f64,
        pub s1: f64,
        pub m2: f64,
        pub s2: f64,
    }

    impl Pair {
        fn log_density(&self, x: f64, first: bool) -> f64 {
            let (m, s) = if first { (self.m1, self.s1) } else { (self.m2, self.s2) };
            let z = (x - m) / s;
            -0.5 * z * z - (s * (2.0 * std::f64::consts::PI).sqrt()).ln()
        }

        fn in_set(&self, x: f64, i: &RatioInterval) -> bool {
            let ratio = (self.log_density(x, true) - self.log_density(x, false)).exp();
            i.contains(ratio)
        }

        fn simpson(&self, a: f64, b: f64, first: bool) -> f64 {
            let n = 4000;
            let h = (b - a) / n as f64;
            let mut sum = self.log_density(a, first).exp() + self.log_density(b, first).exp();
            for k in 1..n {
                let w = if k % 2 == 1 { 4.0 } else { 2.0 };
                sum += w * self.log_density(a + k as f64 * h, first).exp();
            }
            sum * h / 3.0
        }

        pub fn masses(&self, i: &RatioInterval) -> (f64, f64) {
            let lo = (self.m1 - 9.0 * self.s1).min(self.m2 - 9.0 * self.s2);
            let hi = (self.m1 + 9.0 * self.s1).max(self.m2 + 9.0 * self.s2);
            let grid = 40_000;
            let step = (hi - lo) / grid as f64;
            let mut runs: Vec<(f64, f64)> = Vec::new();
            let mut start: Option<f64> = None;
            let mut prev_x = lo;
            let mut prev_in = self.in_set(lo, i);
            if prev_in {
                start = Some(lo);
            }
            for k in 1..=grid {
                let x = lo + k as f64 * step;
                let now_in = self.in_set(x, i);
                if now_in != prev_in {
                    // Bisect the crossing.
                    let (mut a, mut b) = (prev_x, x);
                    for _ in 0..80 {
                        let mid = 0.5 * (a + b);
                        if self.in_set(mid, i) == prev_in {
                            a = mid;
                        } else {
                            b = mid;
                        }
                    }
                    let edge = 0.5 * (a + b);
                    if prev_in {
                        runs.push((start.take().unwrap(), edge));
                    } else {
                        start = Some(edge);
                    }
                }
                prev_in = now_in;
                prev_x = x;
            }
            if let Some(s) = start {
                runs.push((s, hi));
            }
            let mut p = 0.0;
            let mut r = 0.0;
            for (a, b) in runs {
                p += self.simpson(a, b, true);
                r += self.simpson(a, b, false);
            }
            (p, r)
        }
    }
}

#[test]
fn gaussian_masses_match_density_scan_oracle() {
    let mut rng = rng(37);
    for trial in 0..100 {
        let m1 = rng.random_range(-1.5..1.5);
        let m2 = rng.random_range(-1.5..1.5);
        let s1 = rng.random_range(0.6..1.5);
        let s2 = rng.random_range(0.6..1.5);
        let pair = gaussian_pair(m1, s1, m2, s2).unwrap();
        let oracle = gauss_oracle::Pair { m1, s1, m2, s2 };
        let i = random_interval(&mut rng);
        let (p, r) = pair.ratio_interval_masses(&i);
        let (po, ro) = oracle.masses(&i);
        assert!(
            (p - po).abs() <= 1e-6 && (r - ro).abs() <= 1e-6,
            "trial {trial}: ({p}, {r}) vs oracle ({po}, {ro}) on {i}"
        );
    }
}

#[test]
fn restricted_divergence_splits_sum_to_total() {
    let mut rng = rng(41);
    let kl = Generator::kl();
    for _ in 0..50 {
        let pair: MeasurePair = random_positive_pair(&mut rng, 8).into();
        let part = random_partition(&mut rng, 6);
        let total = pair
            .restricted_divergence(&kl, &RatioInterval::full())
            .unwrap()
            .value
            .as_f64();
        let pieces: f64 = part
            .cells()
            .iter()
            .map(|c| pair.restricted_divergence(&kl, c).unwrap().value.as_f64())
            .sum();
        assert!((total - pieces).abs() <= 1e-12, "{total} vs {pieces}");
    }
    // Gaussian version within quadrature tolerance.
    let pair = gaussian_pair(0.0, 1.0, 1.0, 1.0).unwrap();
    let part = Partition::from_cuts(&[0.2, 1.0, 5.0]).unwrap();
    let total = pair
        .restricted_divergence(&kl, &RatioInterval::full())
        .unwrap()
        .value
        .as_f64();
    let pieces: f64 = part
        .cells()
        .iter()
        .map(|c| pair.restricted_divergence(&kl, c).unwrap().value.as_f64())
        .sum();
    assert!((total - pieces).abs() <= 1e-8, "{total} vs {pieces}");
}

#[test]
fn discrete_divergence_equals_index_order_sum() {
    let mut rng = rng(43);
    for _ in 0..100 {
        let n = 2 + rng.random_range(0..10);
        let pair = random_positive_pair(&mut rng, n);
        for g in Generator::builtins() {
            let direct: f64 = pair
                .p()
                .iter()
                .zip(pair.r())
                .map(|(&p, &r)| r * g.eval(p / r).unwrap())
                .sum();
            let library = divergence(&g, &pair.clone().into()).unwrap().value.as_f64();
            assert!(
                (direct - library).abs() <= 1e-14,
                "{}: {direct} vs {library}",
                g.name()
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Partition invariants
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn coarsen_consistency_on_discrete(seed in 0u64..10_000, k in 0usize..6) {
        let mut r = rng(seed);
        let pair: MeasurePair = random_positive_pair(&mut r, 6).into();
        let part = random_partition(&mut r, k);
        let coarse = coarsen(&pair, &part).unwrap();
        for g in [Generator::kl(), Generator::hellinger()] {
            let a = divergence(&g, &coarse.clone().into()).unwrap().value.as_f64();
            let b = partition_divergence(&g, &pair, &part).unwrap().value.as_f64();
            prop_assert!((a - b).abs() <= 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn refine_then_flatten_recovers_cuts(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let part = random_partition(&mut r, 4);
        let (idx, split) = random_split(&mut r, &part);
        if let Ok(refined) = part.refine(idx, split) {
            prop_assert_eq!(refined.len(), part.len() + 1);
            // Dropping the inserted cut restores the original.
            let mut cuts = refined.as_cuts().unwrap();
            let pos = cuts.iter().position(|&c| c == split).unwrap();
            cuts.remove(pos);
            prop_assert_eq!(Partition::from_cuts(&cuts).unwrap(), part);
        }
    }

    #[test]
    fn partition_serde_round_trip(seed in 0u64..10_000) {
        let mut r = rng(seed);
        let part = random_partition(&mut r, 6);
        let json = serde_json::to_string(&part).unwrap();
        let back: Partition = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(part, back);
    }
}

// ---------------------------------------------------------------------------
// Certificate invariants
// ---------------------------------------------------------------------------

#[test]
fn gyp_bin_confinement_and_soundness() {
    let pair = gaussian_pair(0.0, 1.0, 1.0, 1.0).unwrap();
    let res = gyp_approximate(&Generator::kl(), &pair, 1e-2).unwrap();
    assert!(res.gap() >= -res.reference.error_bound);
    assert!(res.gap() <= res.epsilon + res.reference.error_bound);
    let cells = res.partition.cells();
    for cell in &cells[1..cells.len() - 1] {
        assert!(cell.width().as_f64() <= res.delta * (1.0 + 1e-12));
        let (p, r) = pair.ratio_interval_masses(cell);
        if r > 0.0 {
            let ratio = p / r;
            assert!(
                ratio >= cell.lo() - 1e-12 && ratio <= cell.hi() + 1e-12,
                "coarsened ratio {ratio} escapes {cell}"
            );
        }
    }
}

#[test]
fn detect_blockwise_slack_is_bounded_by_unit_mass() {
    let mut rng = rng(47);
    let kl = Generator::kl();
    let ng = kl.normalize();
    for _ in 0..25 {
        let pair: MeasurePair = random_positive_pair(&mut rng, 8).into();
        let ev = detect_infinite(&kl, &pair, 1e9, 10_000).unwrap();
        assert!(!ev.exceeded);
        let mut slack_sum = 0.0;
        let mut r_sum = 0.0;
        for cell in &ev.cells {
            let restricted = pair
                .restricted_divergence(ng.tilde(), &cell.cell)
                .unwrap()
                .value
                .as_f64();
            let slack = restricted - cell.term.as_f64();
            assert!(slack >= -1e-12, "negative slack {slack}");
            slack_sum += slack.max(0.0);
            r_sum += cell.r_mass;
        }
        assert!(r_sum <= 1.0 + 1e-9);
        assert!(slack_sum <= r_sum + 1e-9, "{slack_sum} vs {r_sum}");
    }
}

#[test]
fn sweep_gaps_shrink_on_random_gaussian_pairs() {
    let mut rng = rng(53);
    let epsilons = [0.5, 0.2, 0.05];
    for _ in 0..50 {
        let pair = random_gaussian_pair(&mut rng);
        let rows = convergence_sweep(&Generator::kl(), &pair, &epsilons).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].gap <= w[0].gap + 1e-9);
        }
        for row in &rows {
            assert!(row.gap <= row.epsilon + 1e-9);
            assert!(row.gap >= -1e-9);
        }
    }
}

#[test]
fn evidence_partition_dominates_partial_sums() {
    let mut rng = rng(59);
    let kl = Generator::kl();
    let ng = kl.normalize();
    for _ in 0..20 {
        let pair: MeasurePair = random_positive_pair(&mut rng, 6).into();
        let ev = detect_infinite(&kl, &pair, 1e9, 1000).unwrap();
        let part = ev.to_partition().unwrap();
        let v = partition_divergence(ng.tilde(), &pair, &part).unwrap();
        assert!(
            ExtReal::Finite(ev.total().as_f64() - 1e-9) <= v.value,
            "partition value {} below evidence total {}",
            v.value,
            ev.total()
        );
    }
}

#[test]
fn normalized_generators_have_valley_shape() {
    for g in Generator::builtins() {
        let ng = g.normalize();
        let ft = ng.tilde();
        let (l, r) = g.subgradient_at_one();
        assert!(l <= ng.slope() && ng.slope() <= r, "{}", g.name());
        let grid: Vec<f64> = (-40..=40).map(|k| 2f64.powf(k as f64 / 2.0)).collect();
        let mut prev: Option<(f64, f64)> = None;
        for &u in &grid {
            let v = ft.eval(u).unwrap();
            assert!(v >= -1e-12, "{}: negative normalized value {v} at {u}", g.name());
            if let Some((pu, pv)) = prev {
                if u <= 1.0 {
                    assert!(v <= pv + 1e-12, "{}: not nonincreasing at {pu}->{u}", g.name());
                } else if pu >= 1.0 {
                    assert!(v >= pv - 1e-12, "{}: not nondecreasing at {pu}->{u}", g.name());
                }
            }
            prev = Some((u, v));
        }
    }
}

#[test]
fn identical_gaussian_certificate_is_trivial() {
    let pair = gaussian_pair(0.7, 1.3, 0.7, 1.3).unwrap();
    let res = gyp_approximate(&Generator::kl(), &pair, 1e-6).unwrap();
    assert_eq!(res.lower_bound, 0.0);
    assert_eq!(res.reference.value.as_f64(), 0.0);
    assert!(res.h0 < res.k0);
}

#[test]
fn api_types_are_send_and_sync() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<divcert::Generator>();
    assert_send_sync::<divcert::NormalizedGenerator>();
    assert_send_sync::<MeasurePair>();
    assert_send_sync::<Partition>();
    assert_send_sync::<divcert::DivergenceValue>();
    assert_send_sync::<divcert::ApproxResult>();
    assert_send_sync::<divcert::InfinityEvidence>();
}
