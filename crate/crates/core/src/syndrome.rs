//! Syndrome-wise evaluation of the fidelity indicator and all lower-bound
//! witnesses, plus the Monte Carlo estimator.
//!
//! For Pauli error mixtures every witness is a deterministic function of the
//! syndrome, so one sampled syndrome serves all requested bounds per
//! repetition. The correction sums collapse to a single candidate term: a
//! term fires only at the lowest violated class-A generator paired with the
//! highest violated class-B generator, which makes each evaluation O(N/64).

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ClusterGraph, ClusterKind};
use crate::noise::{PauliErrorModel, SyndromeSample};
use crate::rng::RngStream;

/// Identity of an estimable quantity: the exact fidelity indicator or one of
/// the lower-bound witnesses.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BoundId {
    /// Product of all stabilizer indicators (the projector itself).
    #[serde(rename = "F")]
    FExact,
    /// Two-setting bound G_A + G_B - 1.
    P0,
    /// Refined chain bound; includes the j = i-3 correction terms.
    P1D,
    /// Simplified chain bound; drops the j = i-3 terms.
    #[serde(rename = "P1D_simplified")]
    P1DSimplified,
    /// Grid bound for odd-width grids.
    P2D,
    /// Grid bound for even-width grids (relabeled classes).
    #[serde(rename = "P2D_even")]
    P2DEven,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [
        BoundId::FExact,
        BoundId::P0,
        BoundId::P1D,
        BoundId::P1DSimplified,
        BoundId::P2D,
        BoundId::P2DEven,
    ];

    /// Checks the bound applies to the graph kind.
    pub fn check_compatible(self, g: &ClusterGraph) -> Result<()> {
        match self {
            BoundId::FExact | BoundId::P0 => Ok(()),
            BoundId::P1D | BoundId::P1DSimplified => {
                if g.kind() == ClusterKind::Chain {
                    Ok(())
                } else {
                    Err(Error::WrongKind(format!("{self} requires a chain graph")))
                }
            }
            BoundId::P2D => {
                if g.kind() == ClusterKind::Grid && g.n_x() % 2 == 1 {
                    Ok(())
                } else {
                    Err(Error::WrongKind(format!("{self} requires a grid with odd n_x")))
                }
            }
            BoundId::P2DEven => {
                if g.kind() == ClusterKind::Grid && g.n_x() % 2 == 0 {
                    Ok(())
                } else {
                    Err(Error::WrongKind(format!("{self} requires a grid with even n_x")))
                }
            }
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BoundId::FExact => "F",
            BoundId::P0 => "P0",
            BoundId::P1D => "P1D",
            BoundId::P1DSimplified => "P1D_simplified",
            BoundId::P2D => "P2D",
            BoundId::P2DEven => "P2D_even",
        };
        write!(f, "{s}")
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F" | "F_exact" => Ok(BoundId::FExact),
            "P0" => Ok(BoundId::P0),
            "P1D" => Ok(BoundId::P1D),
            "P1D_simplified" | "P1D'" => Ok(BoundId::P1DSimplified),
            "P2D" => Ok(BoundId::P2D),
            "P2D_even" => Ok(BoundId::P2DEven),
            other => Err(Error::WrongKind(format!("unknown bound '{other}'"))),
        }
    }
}

/// Result of one estimation run for one bound.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundEstimate {
    pub bound: BoundId,
    pub mean: f64,
    pub std_error: f64,
    pub repetitions: u64,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Core evaluation on violation words
// ---------------------------------------------------------------------------

fn first_violation(violations: &[u64], mask: &[u64]) -> Option<u32> {
    for (w, (&v, &m)) in violations.iter().zip(mask).enumerate() {
        let bits = v & m;
        if bits != 0 {
            return Some((w * 64) as u32 + bits.trailing_zeros() + 1);
        }
    }
    None
}

fn last_violation(violations: &[u64], mask: &[u64]) -> Option<u32> {
    for w in (0..violations.len()).rev() {
        let bits = violations[w] & mask[w];
        if bits != 0 {
            return Some((w * 64) as u32 + 63 - bits.leading_zeros() + 1);
        }
    }
    None
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Correction {
    /// No correction sum (F and P0).
    None,
    /// Chain window: fires when max-B >= min-A - 3 (refined) or > (simplified).
    ChainGap { include_gap3: bool },
    /// Grid window: fires when max-B - min-A >= n_x.
    GridLayer { n_x: u32 },
}

fn correction_for(g: &ClusterGraph, bound: BoundId) -> Correction {
    match bound {
        BoundId::FExact | BoundId::P0 => Correction::None,
        BoundId::P1D => Correction::ChainGap { include_gap3: true },
        BoundId::P1DSimplified => Correction::ChainGap { include_gap3: false },
        BoundId::P2D | BoundId::P2DEven => Correction::GridLayer { n_x: g.n_x() },
    }
}

fn eval_core(g: &ClusterGraph, bound: BoundId, violations: &[u64]) -> i32 {
    if bound == BoundId::FExact {
        return if violations.iter().all(|&v| v == 0) { 1 } else { 0 };
    }
    let min_a = first_violation(violations, g.mask_a());
    let max_b = last_violation(violations, g.mask_b());
    let p0 = min_a.is_none() as i32 + max_b.is_none() as i32 - 1;
    let (i, j) = match (min_a, max_b) {
        (Some(i), Some(j)) => (i as i64, j as i64),
        _ => return p0,
    };
    let fired = match correction_for(g, bound) {
        Correction::None => false,
        Correction::ChainGap { include_gap3 } => {
            if include_gap3 {
                j >= i - 3
            } else {
                j > i - 3
            }
        }
        Correction::GridLayer { n_x } => j - i >= n_x as i64,
    };
    p0 + fired as i32
}

fn eval_checked(g: &ClusterGraph, bound: BoundId, s: &SyndromeSample) -> Result<i32> {
    bound.check_compatible(g)?;
    assert_eq!(s.len(), g.n(), "syndrome length must match qubit count");
    Ok(eval_core(g, bound, &s.violation_words()))
}

/// Product of all stabilizer indicators: 1 on the all-satisfied syndrome.
pub fn eval_f(s: &SyndromeSample) -> i32 {
    if s.all() {
        1
    } else {
        0
    }
}

/// The two-setting bound: (product of class-A bits) + (product of class-B
/// bits) - 1.
pub fn eval_p0(g: &ClusterGraph, s: &SyndromeSample) -> i32 {
    eval_core(g, BoundId::P0, &s.violation_words())
}

/// Refined chain bound (includes the j = i-3 window).
pub fn eval_p1d(g: &ClusterGraph, s: &SyndromeSample) -> Result<i32> {
    eval_checked(g, BoundId::P1D, s)
}

/// Simplified chain bound (drops the j = i-3 window).
pub fn eval_p1d_simplified(g: &ClusterGraph, s: &SyndromeSample) -> Result<i32> {
    eval_checked(g, BoundId::P1DSimplified, s)
}

/// Grid bound for odd-width grids.
pub fn eval_p2d(g: &ClusterGraph, s: &SyndromeSample) -> Result<i32> {
    eval_checked(g, BoundId::P2D, s)
}

/// Grid bound for even-width grids.
pub fn eval_p2d_even(g: &ClusterGraph, s: &SyndromeSample) -> Result<i32> {
    eval_checked(g, BoundId::P2DEven, s)
}

/// Evaluates any bound on a syndrome, checking graph compatibility.
pub fn eval_bound(g: &ClusterGraph, bound: BoundId, s: &SyndromeSample) -> Result<i32> {
    if bound == BoundId::FExact {
        return Ok(eval_f(s));
    }
    if bound == BoundId::P0 {
        return Ok(eval_p0(g, s));
    }
    eval_checked(g, bound, s)
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

struct CompiledEvent {
    /// Cumulative outcome thresholds pre-scaled by the trigger probability;
    /// a uniform draw below thresholds[k] selects outcome k.
    thresholds: Vec<f64>,
    /// Flip masks per outcome, flattened with stride `words`.
    masks: Vec<u64>,
}

struct CompiledModel {
    words: usize,
    events: Vec<CompiledEvent>,
}

impl CompiledModel {
    fn build(g: &ClusterGraph, model: &PauliErrorModel) -> Result<Self> {
        model.validate_for(g)?;
        let words = g.words();
        let events = model
            .events
            .iter()
            .map(|ev| {
                let mut thresholds = Vec::with_capacity(ev.dist.len());
                let mut acc = 0.0;
                let mut masks = Vec::with_capacity(ev.dist.len() * words);
                let labels = ev.support.labels();
                for (outcome, w) in &ev.dist {
                    acc += w * ev.trigger;
                    thresholds.push(acc);
                    let mut mask = vec![0u64; words];
                    for (slot, op) in outcome.iter().enumerate() {
                        if let Some(op) = op {
                            crate::noise::xor_flips(g, labels[slot], *op, &mut mask);
                        }
                    }
                    masks.extend_from_slice(&mask);
                }
                CompiledEvent { thresholds, masks }
            })
            .collect();
        Ok(Self { words, events })
    }

    #[inline]
    fn sample_into(&self, rng: &mut RngStream, violations: &mut [u64]) {
        violations.fill(0);
        for ev in &self.events {
            let u = rng.next_f64();
            // thresholds are cumulative and end at the trigger probability
            if let Some(&last) = ev.thresholds.last() {
                if u >= last {
                    continue;
                }
                let mut k = 0;
                while u >= ev.thresholds[k] {
                    k += 1;
                }
                let base = k * self.words;
                for (w, m) in violations.iter_mut().zip(&ev.masks[base..base + self.words]) {
                    *w ^= m;
                }
            }
        }
    }
}

/// Integer tallies of the three possible witness values {-1, 0, +1}.
#[derive(Clone, Copy, Default)]
struct ValueCounts {
    counts: [u64; 3],
}

impl ValueCounts {
    #[inline]
    fn record(&mut self, v: i32) {
        self.counts[(v + 1) as usize] += 1;
    }

    fn merge(&mut self, other: &ValueCounts) {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
    }

    fn estimate(&self, bound: BoundId, seed: u64) -> BoundEstimate {
        let m: u64 = self.counts.iter().sum();
        let sum: i64 = -(self.counts[0] as i64) + self.counts[2] as i64;
        let sum_sq: i64 = (self.counts[0] + self.counts[2]) as i64;
        let mean = sum as f64 / m as f64;
        let std_error = if m > 1 {
            let var = (sum_sq as f64 - m as f64 * mean * mean) / (m as f64 - 1.0);
            (var.max(0.0) / m as f64).sqrt()
        } else {
            0.0
        };
        BoundEstimate { bound, mean, std_error, repetitions: m, seed }
    }
}

/// Monte Carlo estimation: samples `repetitions` error patterns, computes
/// each syndrome once, and evaluates every requested bound on it.
///
/// Repetition `r` draws from the substream `(seed, r)`, and per-value
/// tallies are exact integers, so the result is bitwise reproducible for a
/// fixed seed regardless of thread count.
pub fn monte_carlo(
    g: &ClusterGraph,
    model: &PauliErrorModel,
    bounds: &[BoundId],
    repetitions: u64,
    seed: u64,
) -> Result<Vec<BoundEstimate>> {
    if repetitions == 0 {
        return Err(Error::InvalidSize("repetitions must be >= 1".into()));
    }
    for &b in bounds {
        b.check_compatible(g)?;
    }
    let compiled = CompiledModel::build(g, model)?;
    let corrections: Vec<Correction> = bounds.iter().map(|&b| correction_for(g, b)).collect();
    let is_f: Vec<bool> = bounds.iter().map(|&b| b == BoundId::FExact).collect();

    const CHUNK: u64 = 1 << 14;
    let chunks: Vec<u64> = (0..repetitions.div_ceil(CHUNK)).collect();
    let tallies = chunks
        .par_iter()
        .map(|&c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(repetitions);
            let mut counts = vec![ValueCounts::default(); bounds.len()];
            let mut violations = vec![0u64; compiled.words];
            for rep in lo..hi {
                let mut rng = RngStream::substream(seed, rep);
                compiled.sample_into(&mut rng, &mut violations);
                let clean = violations.iter().all(|&v| v == 0);
                let min_a = first_violation(&violations, g.mask_a());
                let max_b = last_violation(&violations, g.mask_b());
                for (k, corr) in corrections.iter().enumerate() {
                    let v = if is_f[k] {
                        clean as i32
                    } else {
                        let p0 = min_a.is_none() as i32 + max_b.is_none() as i32 - 1;
                        match (*corr, min_a, max_b) {
                            (Correction::None, _, _) => p0,
                            (Correction::ChainGap { include_gap3 }, Some(i), Some(j)) => {
                                let fired = if include_gap3 {
                                    j as i64 >= i as i64 - 3
                                } else {
                                    j as i64 > i as i64 - 3
                                };
                                p0 + fired as i32
                            }
                            (Correction::GridLayer { n_x }, Some(i), Some(j)) => {
                                p0 + (j as i64 - i as i64 >= n_x as i64) as i32
                            }
                            _ => p0,
                        }
                    };
                    counts[k].record(v);
                }
            }
            counts
        })
        .reduce(
            || vec![ValueCounts::default(); bounds.len()],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(&b) {
                    x.merge(y);
                }
                a
            },
        );

    Ok(bounds
        .iter()
        .zip(tallies)
        .map(|(&b, t)| t.estimate(b, seed))
        .collect())
}

/// Number of error-pattern branches a full enumeration of the model visits;
/// used by the oracle budget check.
pub(crate) fn enumeration_branches(model: &PauliErrorModel) -> f64 {
    model
        .events
        .iter()
        .map(|ev| 1.0 + ev.dist.len() as f64)
        .product()
}

/// Iterates every error pattern of a product model with its probability,
/// yielding the violation words. Used by the exact oracle.
pub(crate) fn for_each_pattern<Fcb: FnMut(f64, &[u64])>(
    g: &ClusterGraph,
    model: &PauliErrorModel,
    budget: f64,
    mut cb: Fcb,
) -> Result<()> {
    if enumeration_branches(model) > budget {
        return Err(Error::TooLarge(format!(
            "pattern enumeration needs {} branches, budget is {}",
            enumeration_branches(model),
            budget
        )));
    }
    let compiled = CompiledModel::build(g, model)?;
    let words = compiled.words;
    let triggers: Vec<f64> = model.events.iter().map(|ev| ev.trigger).collect();
    let weights: Vec<Vec<f64>> = model
        .events
        .iter()
        .map(|ev| ev.dist.iter().map(|(_, w)| *w).collect())
        .collect();

    // explicit stack to avoid recursion limits on long chains of events
    let mut violations = vec![0u64; words];
    fn walk<Fcb: FnMut(f64, &[u64])>(
        ev_idx: usize,
        prob: f64,
        compiled: &CompiledModel,
        triggers: &[f64],
        weights: &[Vec<f64>],
        violations: &mut Vec<u64>,
        cb: &mut Fcb,
    ) {
        if ev_idx == compiled.events.len() {
            cb(prob, violations);
            return;
        }
        let words = compiled.words;
        // branch: event does not fire
        walk(ev_idx + 1, prob * (1.0 - triggers[ev_idx]), compiled, triggers, weights, violations, cb);
        // branches: each outcome
        for (k, w) in weights[ev_idx].iter().enumerate() {
            let base = k * words;
            let masks = &compiled.events[ev_idx].masks[base..base + words];
            for (v, m) in violations.iter_mut().zip(masks) {
                *v ^= m;
            }
            walk(ev_idx + 1, prob * triggers[ev_idx] * w, compiled, triggers, weights, violations, cb);
            for (v, m) in violations.iter_mut().zip(masks) {
                *v ^= m;
            }
        }
    }
    walk(0, 1.0, &compiled, &triggers, &weights, &mut violations, &mut cb);
    Ok(())
}

/// Evaluates a bound on explicit violation words (oracle helper).
pub(crate) fn eval_on_violations(g: &ClusterGraph, bound: BoundId, violations: &[u64]) -> i32 {
    eval_core(g, bound, violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{syndrome_of, EventSupport};
    use crate::pauli::{Pauli, PauliString};

    fn chain(n: u32) -> ClusterGraph {
        ClusterGraph::chain(n).unwrap()
    }

    fn syndrome_from_int(n: u32, bits: u32) -> SyndromeSample {
        SyndromeSample::from_bools(&(0..n).map(|i| bits >> i & 1 == 1).collect::<Vec<_>>())
    }

    /// Literal-sum reference implementations, straight from the defining
    /// formulas; the production evaluators must agree with these everywhere.
    mod reference {
        use crate::lattice::{ClusterGraph, QubitClass};
        use crate::noise::SyndromeSample;
        use crate::syndrome::BoundId;

        pub fn eval(g: &ClusterGraph, bound: BoundId, s: &SyndromeSample) -> i32 {
            let bit = |l: u32| s.is_satisfied(l) as i32;
            let a = g.labels_in_class(QubitClass::A);
            let b = g.labels_in_class(QubitClass::B);
            let ga: i32 = a.iter().map(|&l| bit(l)).product();
            let gb: i32 = b.iter().map(|&l| bit(l)).product();
            match bound {
                BoundId::FExact => (1..=g.n()).map(bit).product(),
                BoundId::P0 => ga + gb - 1,
                _ => {
                    let mut corr = 0;
                    for &i in &a {
                        for &j in &b {
                            let included = match bound {
                                BoundId::P1D => j as i64 >= i as i64 - 3,
                                BoundId::P1DSimplified => j as i64 > i as i64 - 3,
                                BoundId::P2D | BoundId::P2DEven => {
                                    j as i64 - i as i64 >= g.n_x() as i64
                                }
                                _ => unreachable!(),
                            };
                            if !included {
                                continue;
                            }
                            let e_i = 1 - bit(i);
                            let e_j = 1 - bit(j);
                            let prod_a: i32 =
                                a.iter().filter(|&&k| k < i).map(|&k| bit(k)).product();
                            let prod_b: i32 =
                                b.iter().filter(|&&m| m > j).map(|&m| bit(m)).product();
                            corr += e_i * e_j * prod_a * prod_b;
                        }
                    }
                    ga + gb - 1 + corr
                }
            }
        }
    }

    #[test]
    fn f_and_p0_basics() {
        let g = chain(5);
        let ones = SyndromeSample::all_satisfied(5);
        assert_eq!(eval_f(&ones), 1);
        assert_eq!(eval_p0(&g, &ones), 1);

        let x3 = syndrome_of(&g, &PauliString::single(3, Pauli::X));
        assert_eq!(eval_f(&x3), 0);
        assert_eq!(eval_p0(&g, &x3), 0);

        let y3 = syndrome_of(&g, &PauliString::single(3, Pauli::Y));
        assert_eq!(eval_p0(&g, &y3), -1);
    }

    #[test]
    fn stabilizer_pattern_counts_as_fidelity_one() {
        // Y1 Y2 on the 2-qubit chain is g1 g2, so the syndrome stays clean
        let g = chain(2);
        let e = PauliString::from_ops([(1, Pauli::Y), (2, Pauli::Y)]);
        let s = syndrome_of(&g, &e);
        assert_eq!(eval_f(&s), 1);
    }

    #[test]
    fn chain_bound_hand_examples() {
        let g = chain(5);
        let y3 = syndrome_of(&g, &PauliString::single(3, Pauli::Y));
        // the (i=3, j=4) correction term fires for both chain bounds
        assert_eq!(eval_p1d(&g, &y3).unwrap(), 0);
        assert_eq!(eval_p1d_simplified(&g, &y3).unwrap(), 0);

        let g7 = chain(7);
        let y34 = PauliString::from_ops([(3, Pauli::Y), (4, Pauli::Y)]);
        let s = syndrome_of(&g7, &y34);
        assert_eq!(s.to_string(), "1011011");
        // only the j = i-3 window catches this pattern
        assert_eq!(eval_p1d(&g7, &s).unwrap(), 0);
        assert_eq!(eval_p1d_simplified(&g7, &s).unwrap(), -1);
    }

    #[test]
    fn grid_bound_hand_examples() {
        let g = ClusterGraph::grid(3, 3).unwrap();
        let ones = SyndromeSample::all_satisfied(9);
        assert_eq!(eval_p2d(&g, &ones).unwrap(), 1);

        // zeros exactly at labels 1 and 4: the (1,4) term fires
        let mut bits = vec![true; 9];
        bits[0] = false;
        bits[3] = false;
        let s = SyndromeSample::from_bools(&bits);
        assert_eq!(eval_p2d(&g, &s).unwrap(), 0);

        let x5 = syndrome_of(&g, &PauliString::single(5, Pauli::X));
        assert_eq!(eval_p2d(&g, &x5).unwrap(), reference::eval(&g, BoundId::P2D, &x5));
    }

    #[test]
    fn wrong_kind_guards() {
        let grid = ClusterGraph::grid(3, 3).unwrap();
        let s9 = SyndromeSample::all_satisfied(9);
        assert!(matches!(eval_p1d(&grid, &s9), Err(Error::WrongKind(_))));

        let ch = chain(5);
        let s5 = SyndromeSample::all_satisfied(5);
        assert!(matches!(eval_p2d(&ch, &s5), Err(Error::WrongKind(_))));

        let even = ClusterGraph::grid(4, 4).unwrap();
        let s16 = SyndromeSample::all_satisfied(16);
        assert!(matches!(eval_p2d(&even, &s16), Err(Error::WrongKind(_))));
        assert_eq!(eval_p2d_even(&even, &s16).unwrap(), 1);
        assert!(matches!(eval_p2d_even(&grid, &s9), Err(Error::WrongKind(_))));
    }

    #[test]
    fn matches_literal_sums_exhaustively() {
        for n in [2u32, 3, 5, 8, 10] {
            let g = chain(n);
            for bits in 0..1u32 << n {
                let s = syndrome_from_int(n, bits);
                for bound in [BoundId::FExact, BoundId::P0, BoundId::P1D, BoundId::P1DSimplified] {
                    assert_eq!(
                        eval_bound(&g, bound, &s).unwrap(),
                        reference::eval(&g, bound, &s),
                        "chain {n} bits {bits:b} bound {bound}"
                    );
                }
            }
        }
        for (nx, ny, bound) in [(3, 3, BoundId::P2D), (2, 3, BoundId::P2DEven), (4, 2, BoundId::P2DEven)] {
            let g = ClusterGraph::grid(nx, ny).unwrap();
            let n = g.n();
            for bits in 0..1u32 << n {
                let s = syndrome_from_int(n, bits);
                assert_eq!(
                    eval_bound(&g, bound, &s).unwrap(),
                    reference::eval(&g, bound, &s),
                    "grid {nx}x{ny} bits {bits:b}"
                );
            }
        }
    }

    #[test]
    fn monte_carlo_zero_noise() {
        let g = chain(6);
        let model = PauliErrorModel::single_depolarizing(&g, 0.0).unwrap();
        let bounds = [BoundId::FExact, BoundId::P0, BoundId::P1D, BoundId::P1DSimplified];
        let out = monte_carlo(&g, &model, &bounds, 100, 7).unwrap();
        for est in out {
            assert_eq!(est.mean, 1.0);
            assert_eq!(est.std_error, 0.0);
            assert_eq!(est.repetitions, 100);
        }
    }

    #[test]
    fn monte_carlo_deterministic_any_thread_count() {
        let g = chain(10);
        let model = PauliErrorModel::single_depolarizing(&g, 0.05).unwrap();
        let bounds = [BoundId::FExact, BoundId::P0, BoundId::P1DSimplified];
        let run = || {
            monte_carlo(&g, &model, &bounds, 50_000, 123)
                .unwrap()
                .iter()
                .map(|e| (e.mean, e.std_error))
                .collect::<Vec<_>>()
        };
        let a = run();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(run);
        assert_eq!(a, b);
    }

    #[test]
    fn monte_carlo_tracks_closed_forms() {
        let g = chain(10);
        let p = 0.02;
        let model = PauliErrorModel::single_depolarizing(&g, p).unwrap();
        let out = monte_carlo(&g, &model, &[BoundId::FExact, BoundId::P0], 1_000_000, 11).unwrap();
        let f_an = (1.0 - p) as f64;
        let f_an = f_an.powi(10);
        let p0_an = 2.0 * (1.0 - 2.0 * p / 3.0).powi(10) - 1.0;
        assert!((out[0].mean - f_an).abs() < 5.0 * out[0].std_error + 1e-4);
        assert!((out[1].mean - p0_an).abs() < 5.0 * out[1].std_error + 1e-3);
    }

    #[test]
    fn monte_carlo_rejects_incompatible_bounds() {
        let g = ClusterGraph::grid(3, 3).unwrap();
        let model = PauliErrorModel::single_depolarizing(&g, 0.01).unwrap();
        let err = monte_carlo(&g, &model, &[BoundId::P1D], 10, 0);
        assert!(matches!(err, Err(Error::WrongKind(_))));
    }

    #[test]
    fn pointwise_ordering_exhaustive() {
        for n in 2..=12u32 {
            let g = chain(n);
            for bits in 0..1u32 << n {
                let s = syndrome_from_int(n, bits);
                let f = eval_f(&s);
                let p0 = eval_p0(&g, &s);
                let p1 = eval_p1d(&g, &s).unwrap();
                let p1s = eval_p1d_simplified(&g, &s).unwrap();
                assert!(p0 <= p1s && p1s <= p1 && p1 <= f, "chain {n} bits {bits:b}");
            }
        }
        let g = ClusterGraph::grid(3, 3).unwrap();
        for bits in 0..1u32 << 9 {
            let s = syndrome_from_int(9, bits);
            let f = eval_f(&s);
            let p0 = eval_p0(&g, &s);
            let p2 = eval_p2d(&g, &s).unwrap();
            assert!(p0 <= p2 && p2 <= f, "bits {bits:b}");
        }
    }

    #[test]
    fn pair_event_support_kinds() {
        let g = chain(4);
        let m = PauliErrorModel::pair_depolarizing(&g, 0.2).unwrap();
        for ev in &m.events {
            assert!(matches!(ev.support, EventSupport::Pair(_, _)));
        }
    }
}
