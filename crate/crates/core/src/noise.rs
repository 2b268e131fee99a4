//! Stochastic Pauli error models, coherent Kraus channels, and syndromes.
//!
//! A model is a product channel: a list of independent events, each firing
//! with its trigger probability and then drawing one Pauli (or Pauli pair)
//! from its conditional distribution. Coherent errors are carried separately
//! as [`KrausChannel`] values; only the dense oracle consumes those, since
//! acting on a cluster state they reduce to Pauli mixtures.

use std::collections::BTreeMap;
use std::fmt;

use num::complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::ClusterGraph;
use crate::pauli::{Pauli, PauliString};
use crate::rng::RngStream;

/// Qubits an event acts on: one label or one adjacent ordered pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum EventSupport {
    Single(u32),
    Pair(u32, u32),
}

impl EventSupport {
    pub fn labels(&self) -> Vec<u32> {
        match *self {
            EventSupport::Single(q) => vec![q],
            EventSupport::Pair(a, b) => vec![a, b],
        }
    }
}

/// One outcome of an event: a letter per support slot, `None` = identity.
pub type EventOutcome = Vec<Option<Pauli>>;

#[derive(Clone, Debug)]
pub struct ErrorEvent {
    pub support: EventSupport,
    pub trigger: f64,
    /// Conditional distribution over non-identity outcomes; weights sum to 1.
    pub dist: Vec<(EventOutcome, f64)>,
}

/// A product channel of independent Pauli error events.
#[derive(Clone, Debug, Default)]
pub struct PauliErrorModel {
    pub events: Vec<ErrorEvent>,
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        Err(Error::InvalidProbability(p))
    } else {
        Ok(())
    }
}

impl PauliErrorModel {
    /// Depolarizing noise on every qubit: with probability `p` one of X, Y,
    /// Z is applied, each with conditional weight 1/3.
    pub fn single_depolarizing(g: &ClusterGraph, p: f64) -> Result<Self> {
        check_probability(p)?;
        let events = (1..=g.n())
            .map(|q| ErrorEvent {
                support: EventSupport::Single(q),
                trigger: p,
                dist: [Pauli::X, Pauli::Y, Pauli::Z]
                    .into_iter()
                    .map(|op| (vec![Some(op)], 1.0 / 3.0))
                    .collect(),
            })
            .collect();
        Ok(Self { events })
    }

    /// Depolarizing pair noise on every edge: with probability `p` one of
    /// the nine non-identity Pauli pairs is applied, each with weight 1/9.
    pub fn pair_depolarizing(g: &ClusterGraph, p: f64) -> Result<Self> {
        check_probability(p)?;
        let letters = [Pauli::X, Pauli::Y, Pauli::Z];
        let events = g
            .edges()
            .into_iter()
            .map(|(a, b)| ErrorEvent {
                support: EventSupport::Pair(a, b),
                trigger: p,
                dist: letters
                    .iter()
                    .flat_map(|&l| letters.iter().map(move |&m| (vec![Some(l), Some(m)], 1.0 / 9.0)))
                    .collect(),
            })
            .collect();
        Ok(Self { events })
    }

    /// Checks the model against a target graph: labels in range, pair
    /// supports adjacent, probabilities valid, distributions normalized.
    pub fn validate_for(&self, g: &ClusterGraph) -> Result<()> {
        for ev in &self.events {
            check_probability(ev.trigger)?;
            match ev.support {
                EventSupport::Single(q) => g.check_label(q)?,
                EventSupport::Pair(a, b) => {
                    g.check_label(a)?;
                    g.check_label(b)?;
                    if !g.neighbors(a).contains(&b) {
                        return Err(Error::InvalidModel(format!(
                            "pair support ({a},{b}) is not an edge of the graph"
                        )));
                    }
                }
            }
            let slots = ev.support.labels().len();
            let mut total = 0.0;
            for (outcome, w) in &ev.dist {
                if outcome.len() != slots {
                    return Err(Error::InvalidModel(format!(
                        "outcome arity {} does not match support arity {slots}",
                        outcome.len()
                    )));
                }
                if outcome.iter().all(|o| o.is_none()) {
                    return Err(Error::InvalidModel(
                        "all-identity outcome is not allowed; fold it into the trigger".into(),
                    ));
                }
                if *w < 0.0 {
                    return Err(Error::InvalidModel(format!("negative weight {w}")));
                }
                total += w;
            }
            if !ev.dist.is_empty() && (total - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidModel(format!(
                    "conditional weights sum to {total}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Draws one error pattern. Events fire independently; overlapping
    /// outcomes multiply with exact phase.
    pub fn sample_error(&self, rng: &mut RngStream) -> PauliString {
        let mut e = PauliString::identity();
        for ev in &self.events {
            let u = rng.next_f64();
            if u >= ev.trigger {
                continue;
            }
            // scaled cumulative scan inside the fired branch
            let mut acc = 0.0;
            let mut chosen = ev.dist.len() - 1;
            for (k, (_, w)) in ev.dist.iter().enumerate() {
                acc += w * ev.trigger;
                if u < acc {
                    chosen = k;
                    break;
                }
            }
            let labels = ev.support.labels();
            for (slot, op) in ev.dist[chosen].0.iter().enumerate() {
                if let Some(op) = op {
                    e.multiply_site(labels[slot], *op);
                }
            }
        }
        e
    }
}

// ---------------------------------------------------------------------------
// JSON schema: {"events":[{"support":[q] or [q1,q2], "p":w, "dist":{"X":w,..}}]}
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EventJson {
    support: Vec<u32>,
    p: f64,
    dist: BTreeMap<String, f64>,
}

#[derive(Serialize, Deserialize)]
struct ModelJson {
    events: Vec<EventJson>,
}

fn outcome_key(outcome: &EventOutcome) -> String {
    outcome
        .iter()
        .map(|o| o.map_or('I', Pauli::as_char))
        .collect()
}

fn parse_outcome(key: &str, slots: usize) -> Result<EventOutcome> {
    if key.len() != slots {
        return Err(Error::InvalidModel(format!(
            "dist key '{key}' has {} letters, support has {slots}",
            key.len()
        )));
    }
    key.chars()
        .map(|c| match c {
            'I' => Ok(None),
            _ => Pauli::from_char(c)
                .map(Some)
                .ok_or_else(|| Error::InvalidModel(format!("bad Pauli letter '{c}'"))),
        })
        .collect()
}

impl PauliErrorModel {
    pub fn to_json(&self) -> Result<String> {
        let events = self
            .events
            .iter()
            .map(|ev| EventJson {
                support: ev.support.labels(),
                p: ev.trigger,
                dist: ev.dist.iter().map(|(o, w)| (outcome_key(o), *w)).collect(),
            })
            .collect();
        Ok(serde_json::to_string_pretty(&ModelJson { events })?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let parsed: ModelJson = serde_json::from_str(text)?;
        let mut events = Vec::with_capacity(parsed.events.len());
        for ev in parsed.events {
            let support = match ev.support.as_slice() {
                [q] => EventSupport::Single(*q),
                [a, b] => EventSupport::Pair(*a, *b),
                other => {
                    return Err(Error::InvalidModel(format!(
                        "support must have 1 or 2 labels, got {}",
                        other.len()
                    )))
                }
            };
            let slots = ev.support.len();
            let dist = ev
                .dist
                .iter()
                .map(|(k, w)| Ok((parse_outcome(k, slots)?, *w)))
                .collect::<Result<Vec<_>>>()?;
            events.push(ErrorEvent { support, trigger: ev.p, dist });
        }
        Ok(Self { events })
    }
}

// ---------------------------------------------------------------------------
// Syndromes
// ---------------------------------------------------------------------------

/// Which stabilizer generators a given error pattern leaves satisfied.
/// Bit `i-1` set means generator `g_i` still stabilizes the state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeSample {
    n: u32,
    words: Vec<u64>,
}

impl SyndromeSample {
    pub fn all_satisfied(n: u32) -> Self {
        let words = (n as usize).div_ceil(64);
        let mut s = Self { n, words: vec![u64::MAX; words] };
        s.clear_tail();
        s
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let n = bits.len() as u32;
        let mut s = Self { n, words: vec![0; (bits.len()).div_ceil(64)] };
        for (i, &b) in bits.iter().enumerate() {
            if b {
                s.words[i / 64] |= 1 << (i % 64);
            }
        }
        s
    }

    pub(crate) fn from_violation_words(n: u32, violations: &[u64]) -> Self {
        let mut s = Self::all_satisfied(n);
        for (w, v) in s.words.iter_mut().zip(violations) {
            *w &= !v;
        }
        s
    }

    fn clear_tail(&mut self) {
        let tail = self.n as usize % 64;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }

    pub fn len(&self) -> u32 {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_satisfied(&self, label: u32) -> bool {
        let bit = (label - 1) as usize;
        self.words[bit / 64] >> (bit % 64) & 1 == 1
    }

    pub fn all(&self) -> bool {
        let full = Self::all_satisfied(self.n);
        self.words == full.words
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (1..=self.n).map(|l| self.is_satisfied(l)).collect()
    }

    /// Violated-generator bit words (bit set = generator flipped).
    pub(crate) fn violation_words(&self) -> Vec<u64> {
        let full = Self::all_satisfied(self.n);
        self.words
            .iter()
            .zip(&full.words)
            .map(|(w, f)| !w & f)
            .collect()
    }
}

impl fmt::Display for SyndromeSample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in 1..=self.n {
            write!(f, "{}", if self.is_satisfied(l) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// XORs the generator flips caused by `op` acting at `site` into `words`.
///
/// Z flips the site's own generator; X flips every neighbor's generator;
/// Y flips both.
pub(crate) fn xor_flips(g: &ClusterGraph, site: u32, op: Pauli, words: &mut [u64]) {
    let mut flip = |label: u32| {
        let bit = (label - 1) as usize;
        words[bit / 64] ^= 1 << (bit % 64);
    };
    if matches!(op, Pauli::Z | Pauli::Y) {
        flip(site);
    }
    if matches!(op, Pauli::X | Pauli::Y) {
        for &nb in g.neighbors(site) {
            flip(nb);
        }
    }
}

/// Syndrome of an error pattern: generator `g_i` is satisfied iff the
/// pattern commutes with it.
///
/// Panics if the pattern touches labels outside the graph.
pub fn syndrome_of(g: &ClusterGraph, e: &PauliString) -> SyndromeSample {
    let mut violations = vec![0u64; g.words()];
    for (site, op) in e.iter() {
        assert!(
            site >= 1 && site <= g.n(),
            "error pattern touches label {site} outside 1..={}",
            g.n()
        );
        xor_flips(g, site, op, &mut violations);
    }
    SyndromeSample::from_violation_words(g.n(), &violations)
}

// ---------------------------------------------------------------------------
// Coherent channels
// ---------------------------------------------------------------------------

/// A single Kraus operator written in the Pauli basis.
#[derive(Clone, Debug)]
pub enum KrausChannel {
    /// E = alpha * I + sum_j beta_j * sigma_j on one qubit.
    Single { target: u32, alpha: Complex64, beta: [Complex64; 3] },
    /// E = sum_{j,j'} beta[j][j'] sigma_j (x) sigma_j' on an adjacent pair;
    /// index 0 is the identity, 1..=3 are X, Y, Z.
    Pair { targets: (u32, u32), beta: [[Complex64; 4]; 4] },
}

impl KrausChannel {
    /// Squared norm |alpha|^2 + sum |beta|^2.
    pub fn norm_sq(&self) -> f64 {
        match self {
            KrausChannel::Single { alpha, beta, .. } => {
                alpha.norm_sqr() + beta.iter().map(|b| b.norm_sqr()).sum::<f64>()
            }
            KrausChannel::Pair { beta, .. } => {
                beta.iter().flatten().map(|b| b.norm_sqr()).sum()
            }
        }
    }

    pub fn validate_for(&self, g: &ClusterGraph) -> Result<()> {
        match self {
            KrausChannel::Single { target, .. } => g.check_label(*target),
            KrausChannel::Pair { targets: (a, b), .. } => {
                g.check_label(*a)?;
                g.check_label(*b)?;
                if !g.neighbors(*a).contains(b) {
                    return Err(Error::InvalidModel(format!(
                        "pair channel ({a},{b}) is not an edge of the graph"
                    )));
                }
                Ok(())
            }
        }
    }

    /// True when a 1D pair channel touches the two-body edge stabilizers,
    /// where the Pauli-mixture reduction picks up a small correction.
    pub fn touches_chain_edge(&self, g: &ClusterGraph) -> bool {
        match self {
            KrausChannel::Single { .. } => false,
            KrausChannel::Pair { targets: (a, b), .. } => {
                g.is_chain() && {
                    let n = g.n();
                    let lo = (*a).min(*b);
                    let hi = (*a).max(*b);
                    (lo, hi) == (1, 2) || (lo, hi) == (n - 1, n)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::ClusterGraph;

    fn chain(n: u32) -> ClusterGraph {
        ClusterGraph::chain(n).unwrap()
    }

    #[test]
    fn depolarizing_shapes() {
        let g = chain(3);
        let m = PauliErrorModel::single_depolarizing(&g, 0.02).unwrap();
        assert_eq!(m.events.len(), 3);
        for ev in &m.events {
            assert_eq!(ev.trigger, 0.02);
            assert_eq!(ev.dist.len(), 3);
            for (_, w) in &ev.dist {
                assert!((w - 1.0 / 3.0).abs() < 1e-15);
            }
        }
        m.validate_for(&g).unwrap();
    }

    #[test]
    fn pair_model_event_counts() {
        let g = chain(5);
        let m = PauliErrorModel::pair_depolarizing(&g, 0.01).unwrap();
        assert_eq!(m.events.len(), 4);
        let grid = ClusterGraph::grid(3, 3).unwrap();
        let m = PauliErrorModel::pair_depolarizing(&grid, 0.01).unwrap();
        assert_eq!(m.events.len(), 12);
        m.validate_for(&grid).unwrap();
    }

    #[test]
    fn invalid_probability_rejected() {
        let g = chain(3);
        assert!(matches!(
            PauliErrorModel::single_depolarizing(&g, 1.5),
            Err(Error::InvalidProbability(_))
        ));
        assert!(matches!(
            PauliErrorModel::single_depolarizing(&g, -0.1),
            Err(Error::InvalidProbability(_))
        ));
    }

    #[test]
    fn zero_probability_samples_identity() {
        let g = chain(3);
        let m = PauliErrorModel::single_depolarizing(&g, 0.0).unwrap();
        let mut rng = RngStream::seed(1);
        for _ in 0..100 {
            assert!(m.sample_error(&mut rng).is_identity());
        }
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let g = chain(8);
        let m = PauliErrorModel::single_depolarizing(&g, 0.3).unwrap();
        let mut a = RngStream::substream(9, 4);
        let mut b = RngStream::substream(9, 4);
        for _ in 0..50 {
            assert_eq!(m.sample_error(&mut a), m.sample_error(&mut b));
        }
    }

    #[test]
    fn certain_single_qubit_frequencies() {
        // p=1 on a single qubit: X, Y, Z each ~1/3
        let g = chain(2);
        let m = PauliErrorModel {
            events: vec![ErrorEvent {
                support: EventSupport::Single(1),
                trigger: 1.0,
                dist: [Pauli::X, Pauli::Y, Pauli::Z]
                    .into_iter()
                    .map(|op| (vec![Some(op)], 1.0 / 3.0))
                    .collect(),
            }],
        };
        let mut rng = RngStream::seed(17);
        let trials = 1_000_000u32;
        let mut counts = [0u32; 3];
        for _ in 0..trials {
            let e = m.sample_error(&mut rng);
            match e.op_at(1).unwrap() {
                Pauli::X => counts[0] += 1,
                Pauli::Y => counts[1] += 1,
                Pauli::Z => counts[2] += 1,
            }
        }
        let sigma = (trials as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!(
                (c as f64 - trials as f64 / 3.0).abs() < 5.0 * sigma,
                "count {c} too far from {}",
                trials / 3
            );
        }
    }

    #[test]
    fn chain_flip_rules() {
        let g = chain(5);
        let x3 = PauliString::single(3, Pauli::X);
        assert_eq!(syndrome_of(&g, &x3).to_string(), "10101");
        let z1 = PauliString::single(1, Pauli::Z);
        assert_eq!(syndrome_of(&g, &z1).to_string(), "01111");
        let y5 = PauliString::single(5, Pauli::Y);
        assert_eq!(syndrome_of(&g, &y5).to_string(), "11100");
    }

    #[test]
    fn grid_center_x_flips_neighbors() {
        let g = ClusterGraph::grid(3, 3).unwrap();
        let s = syndrome_of(&g, &PauliString::single(5, Pauli::X));
        for l in 1..=9 {
            let expect = ![2, 4, 6, 8].contains(&l);
            assert_eq!(s.is_satisfied(l), expect, "label {l}");
        }
    }

    #[test]
    fn syndrome_matches_commutation_exhaustively() {
        // all single-site and adjacent-pair errors on chains up to N=8
        for n in 2..=8 {
            let g = chain(n);
            let stabs: Vec<_> = (1..=n).map(|i| g.stabilizer(i).unwrap()).collect();
            let mut patterns: Vec<PauliString> = Vec::new();
            for q in 1..=n {
                for op in [Pauli::X, Pauli::Y, Pauli::Z] {
                    patterns.push(PauliString::single(q, op));
                }
            }
            for (a, b) in g.edges() {
                for l in [Pauli::X, Pauli::Y, Pauli::Z] {
                    for m in [Pauli::X, Pauli::Y, Pauli::Z] {
                        patterns.push(PauliString::from_ops([(a, l), (b, m)]));
                    }
                }
            }
            for e in &patterns {
                let s = syndrome_of(&g, e);
                for (i, stab) in stabs.iter().enumerate() {
                    assert_eq!(
                        s.is_satisfied(i as u32 + 1),
                        e.commutes(stab),
                        "pattern {e} generator {}",
                        i + 1
                    );
                }
            }
        }
    }

    #[test]
    fn syndrome_xor_additivity() {
        let g = ClusterGraph::grid(3, 3).unwrap();
        let mut rng = RngStream::seed(5);
        let m = PauliErrorModel::single_depolarizing(&g, 0.5).unwrap();
        for _ in 0..200 {
            let e1 = m.sample_error(&mut rng);
            let e2 = m.sample_error(&mut rng);
            let s12 = syndrome_of(&g, &e1.multiply(&e2));
            let s1 = syndrome_of(&g, &e1);
            let s2 = syndrome_of(&g, &e2);
            for l in 1..=g.n() {
                assert_eq!(s12.is_satisfied(l), s1.is_satisfied(l) == s2.is_satisfied(l));
            }
        }
    }

    #[test]
    fn json_round_trip() {
        let g = chain(4);
        let m = PauliErrorModel::pair_depolarizing(&g, 0.05).unwrap();
        let text = m.to_json().unwrap();
        let back = PauliErrorModel::from_json(&text).unwrap();
        back.validate_for(&g).unwrap();
        assert_eq!(back.events.len(), m.events.len());
        let mut a = RngStream::seed(2);
        let mut b = RngStream::seed(2);
        for _ in 0..50 {
            assert_eq!(m.sample_error(&mut a), back.sample_error(&mut b));
        }
    }

    #[test]
    fn json_rejects_bad_keys() {
        let text = r#"{"events":[{"support":[1],"p":0.1,"dist":{"Q":1.0}}]}"#;
        assert!(PauliErrorModel::from_json(text).is_err());
        let text = r#"{"events":[{"support":[1,2],"p":0.1,"dist":{"X":1.0}}]}"#;
        assert!(PauliErrorModel::from_json(text).is_err());
    }

    #[test]
    fn kraus_edge_flagging() {
        let g = chain(6);
        let c = |a, b| KrausChannel::Pair {
            targets: (a, b),
            beta: [[Complex64::new(0.0, 0.0); 4]; 4],
        };
        assert!(c(1, 2).touches_chain_edge(&g));
        assert!(c(5, 6).touches_chain_edge(&g));
        assert!(!c(2, 3).touches_chain_edge(&g));
        assert!(!c(3, 4).touches_chain_edge(&g));
    }
}
