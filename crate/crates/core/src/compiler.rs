//! Expansion of bound operators into generator-subset observables and their
//! grouping into simultaneously measurable single-qubit settings.
//!
//! Every bound is an affine combination of observables `<prod_{i in T} g_i>`
//! over subsets T of generator labels, with exact rational coefficients.
//! A measurement setting assigns one basis letter per qubit; it covers a
//! subset when the subset's Pauli string matches the assignment site by
//! site. Settings are generated as sliding-window patterns: the basis is
//! checkerboard-like away from a small junction window, which is what makes
//! the setting count linear in the qubit count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num::rational::Ratio;
use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ClusterGraph, ClusterKind, QubitClass};
use crate::pauli::{Pauli, PauliString};
use crate::syndrome::{BoundEstimate, BoundId};

pub type Coeff = Ratio<i64>;

/// Exact expansion: bound = constant + sum_T coeff_T * <prod_{i in T} g_i>.
#[derive(Clone, Debug)]
pub struct TermExpansion {
    pub constant: Coeff,
    pub terms: BTreeMap<Vec<u32>, Coeff>,
}

/// Default ceiling on the number of expansion subsets.
pub const SUBSET_CAP: usize = 1_000_000;

fn pow2_inv(k: u32) -> Coeff {
    Coeff::new(1, 1i64 << k)
}

/// Expands a bound into generator subsets with exact rational coefficients.
pub fn expand_bound(g: &ClusterGraph, bound: BoundId) -> Result<TermExpansion> {
    expand_bound_capped(g, bound, SUBSET_CAP)
}

pub fn expand_bound_capped(
    g: &ClusterGraph,
    bound: BoundId,
    cap: usize,
) -> Result<TermExpansion> {
    bound.check_compatible(g)?;
    let mut exp = TermExpansion { constant: Coeff::zero(), terms: BTreeMap::new() };
    fn add(exp: &mut TermExpansion, cap: usize, labels: Vec<u32>, c: Coeff) -> Result<()> {
        if labels.is_empty() {
            exp.constant += c;
            return Ok(());
        }
        *exp.terms.entry(labels).or_insert_with(Coeff::zero) += c;
        if exp.terms.len() > cap {
            return Err(Error::TooLarge(format!("expansion exceeds the {cap}-subset cap")));
        }
        Ok(())
    }

    if bound == BoundId::FExact {
        // product of all G_i: every non-empty subset at 2^-N
        let n = g.n();
        if n >= 62 || (1u64 << n) > cap as u64 + 1 {
            return Err(Error::TooLarge(format!("full projector expands to 2^{n} subsets")));
        }
        let c = pow2_inv(n);
        for mask in 0u64..(1u64 << n) {
            let labels: Vec<u32> =
                (0..n).filter(|b| mask >> b & 1 == 1).map(|b| b + 1).collect();
            add(&mut exp, cap, labels, c)?;
        }
        return Ok(exp);
    }

    // P0 part, common to all remaining bounds
    let class_a = g.labels_in_class(QubitClass::A);
    let class_b = g.labels_in_class(QubitClass::B);
    for class in [&class_a, &class_b] {
        let k = class.len() as u32;
        if k >= 62 {
            return Err(Error::TooLarge("class too large to expand".into()));
        }
        let c = pow2_inv(k);
        for mask in 0u64..(1u64 << k) {
            let labels: Vec<u32> =
                (0..k).filter(|b| mask >> b & 1 == 1).map(|b| class[b as usize]).collect();
            add(&mut exp, cap, labels, c)?;
        }
    }
    exp.constant -= Coeff::one();
    if bound == BoundId::P0 {
        return Ok(exp);
    }

    // correction windows
    for &i in &class_a {
        for &j in &class_b {
            let included = match bound {
                BoundId::P1D => j as i64 >= i as i64 - 3,
                BoundId::P1DSimplified => j as i64 > i as i64 - 3,
                BoundId::P2D | BoundId::P2DEven => j as i64 - i as i64 >= g.n_x() as i64,
                _ => unreachable!(),
            };
            if !included {
                continue;
            }
            let below: Vec<u32> = class_a.iter().copied().filter(|&k| k < i).collect();
            let above: Vec<u32> = class_b.iter().copied().filter(|&m| m > j).collect();
            let total = below.len() + above.len();
            if total >= 60 {
                return Err(Error::TooLarge("correction window too large to expand".into()));
            }
            let base = pow2_inv(total as u32 + 2);
            for pmask in 0u8..4 {
                let sign =
                    if pmask.count_ones() % 2 == 1 { -Coeff::one() } else { Coeff::one() };
                for mask in 0u64..(1u64 << total) {
                    let mut labels: Vec<u32> = Vec::new();
                    if pmask & 1 == 1 {
                        labels.push(i);
                    }
                    if pmask & 2 == 2 {
                        labels.push(j);
                    }
                    for (b, &l) in below.iter().chain(&above).enumerate() {
                        if mask >> b & 1 == 1 {
                            labels.push(l);
                        }
                    }
                    labels.sort_unstable();
                    add(&mut exp, cap, labels, sign * base)?;
                }
            }
        }
    }
    // windows can cancel a subset exactly; drop zeros
    exp.terms.retain(|_, c| !c.is_zero());
    Ok(exp)
}

/// Ordered product of the stabilizer generators named by `T`.
///
/// The product of commuting generators is Hermitian, so the phase must be
/// real; odd-length consecutive runs legitimately produce -1 (for example
/// g5 g6 g7 on a chain is -Z4.Y5.X6.Y7.Z8), and estimation accounts for the
/// sign. An imaginary phase indicates an algebra bug.
pub fn pauli_of_subset(g: &ClusterGraph, subset: &[u32]) -> Result<PauliString> {
    if subset.is_empty() {
        return Err(Error::InvalidSize("subset must be non-empty".into()));
    }
    let mut labels = subset.to_vec();
    labels.sort_unstable();
    let mut prod = PauliString::identity();
    for l in labels {
        prod = prod.multiply(&g.stabilizer(l)?);
    }
    if !prod.phase().is_real() {
        return Err(Error::Inconsistent(format!(
            "generator product {subset:?} acquired imaginary phase {}",
            prod.phase()
        )));
    }
    Ok(prod)
}

// ---------------------------------------------------------------------------
// Measurement settings
// ---------------------------------------------------------------------------

/// A total basis assignment plus the expansion subsets it can estimate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasurementSetting {
    pub id: String,
    pub basis: BTreeMap<u32, Pauli>,
    pub covered_terms: Vec<Vec<u32>>,
}

impl MeasurementSetting {
    /// True when every site of the Pauli string matches this basis.
    pub fn is_compatible(&self, pauli: &PauliString) -> bool {
        pauli.iter().all(|(q, op)| self.basis.get(&q) == Some(&op))
    }

    fn basis_key(&self, n: u32) -> String {
        (1..=n).map(|q| self.basis[&q].as_char()).collect()
    }
}

/// One row of raw data: per-qubit +-1 outcomes for one shot of one setting.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub setting_id: String,
    pub outcomes: Vec<i8>,
}

fn alt_o(q: u32) -> Pauli {
    if q % 2 == 1 {
        Pauli::X
    } else {
        Pauli::Z
    }
}

fn alt_e(q: u32) -> Pauli {
    if q % 2 == 0 {
        Pauli::X
    } else {
        Pauli::Z
    }
}

fn checkerboard(g: &ClusterGraph, x_class: QubitClass, id: &str) -> MeasurementSetting {
    let basis = (1..=g.n())
        .map(|q| (q, if g.class_of(q) == x_class { Pauli::X } else { Pauli::Z }))
        .collect();
    MeasurementSetting { id: id.into(), basis, covered_terms: Vec::new() }
}

/// Chain setting with a single Z at site `u`: class-A pattern below,
/// class-B pattern above.
fn chain_zwindow(n: u32, u: u32) -> MeasurementSetting {
    let basis = (1..=n)
        .map(|q| {
            let op = if q < u {
                alt_o(q)
            } else if q == u {
                Pauli::Z
            } else {
                alt_e(q)
            };
            (q, op)
        })
        .collect();
    MeasurementSetting { id: format!("M1@{u}"), basis, covered_terms: Vec::new() }
}

/// Chain setting with an explicit junction word starting at `start`,
/// Z fringes on both sides, and checkerboard tails.
fn chain_junction(n: u32, id: String, start: u32, letters: &[Pauli]) -> MeasurementSetting {
    let end = start + letters.len() as u32 - 1;
    let mut basis: BTreeMap<u32, Pauli> = BTreeMap::new();
    for q in 1..=n {
        let op = if q < start {
            alt_o(q)
        } else if q <= end {
            letters[(q - start) as usize]
        } else {
            alt_e(q)
        };
        basis.insert(q, op);
    }
    if start >= 2 {
        basis.insert(start - 1, Pauli::Z);
    }
    if end + 1 <= n {
        basis.insert(end + 1, Pauli::Z);
    }
    MeasurementSetting { id, basis, covered_terms: Vec::new() }
}

fn chain_candidates(g: &ClusterGraph, bound: BoundId) -> Vec<MeasurementSetting> {
    use Pauli::{X, Y};
    let n = g.n();
    let mut out =
        vec![checkerboard(g, QubitClass::A, "Mo"), checkerboard(g, QubitClass::B, "Me")];
    if bound == BoundId::P0 {
        return out;
    }
    let mut sliding: Vec<MeasurementSetting> = Vec::new();
    // M1: single-Z windows at odd sites from 3 up
    let mut u = 3;
    while u <= n {
        sliding.push(chain_zwindow(n, u));
        u += 2;
    }
    // M2 / M6: YY windows at odd / even starts
    for v in 1..=n.saturating_sub(1) {
        let id = if v % 2 == 1 { format!("M2@{v}") } else { format!("M6@{v}") };
        sliding.push(chain_junction(n, id, v, &[Y, Y]));
    }
    // M4 / M5: YXY windows at odd / even starts
    for v in 1..=n.saturating_sub(2) {
        let id = if v % 2 == 1 { format!("M4@{v}") } else { format!("M5@{v}") };
        sliding.push(chain_junction(n, id, v, &[Y, X, Y]));
    }
    // M3: YXXY windows at odd starts
    let mut v = 1;
    while v + 3 <= n {
        sliding.push(chain_junction(n, format!("M3@{v}"), v, &[Y, X, X, Y]));
        v += 2;
    }
    sliding.sort_by_key(|s| (window_start(s), s.basis_key(n)));
    out.extend(sliding);
    out
}

fn window_start(s: &MeasurementSetting) -> u32 {
    s.id.split('@').nth(1).and_then(|t| t.parse().ok()).unwrap_or(0)
}

fn grid_candidates(g: &ClusterGraph) -> Vec<MeasurementSetting> {
    let n = g.n();
    let n_x = g.n_x();
    let mut out =
        vec![checkerboard(g, QubitClass::A, "Mo"), checkerboard(g, QubitClass::B, "Me")];
    let mut sliding = Vec::new();
    for i in 1..=n {
        if g.class_of(i) != QubitClass::A || g.row_of(i) >= g.n_y() {
            continue;
        }
        let j = i + n_x;
        // vertical YY window
        let mut basis: BTreeMap<u32, Pauli> = (1..=n)
            .map(|q| {
                let op = if q == i || q == j {
                    Pauli::Y
                } else if (g.class_of(q) == QubitClass::A && q < i)
                    || (g.class_of(q) == QubitClass::B && q > j)
                {
                    Pauli::X
                } else {
                    Pauli::Z
                };
                (q, op)
            })
            .collect();
        sliding.push(MeasurementSetting {
            id: format!("M2v@{i}"),
            basis: basis.clone(),
            covered_terms: Vec::new(),
        });
        // split window: X on class A up to and including the anchor, X on
        // class B strictly above the anchor's vertical partner
        basis.insert(i, Pauli::X);
        basis.insert(j, Pauli::Z);
        sliding
            .push(MeasurementSetting { id: format!("M1v@{i}"), basis, covered_terms: Vec::new() });
    }
    sliding.sort_by_key(|s| (window_start(s), s.basis_key(n)));
    out.extend(sliding);
    out
}

/// Canonical completion for a subset no sliding window covers: the subset's
/// own letters, checkerboard tails, Z on free mid-window sites.
fn bespoke_setting(n: u32, seq: usize, pauli: &PauliString) -> MeasurementSetting {
    let lo = pauli.iter().next().map(|(q, _)| q).unwrap_or(1);
    let hi = pauli.max_label().unwrap_or(n);
    let mut basis: BTreeMap<u32, Pauli> = BTreeMap::new();
    for q in 1..=n {
        let op = if let Some(op) = pauli.op_at(q) {
            op
        } else if q < lo {
            alt_o(q)
        } else if q > hi {
            alt_e(q)
        } else {
            Pauli::Z
        };
        basis.insert(q, op);
    }
    MeasurementSetting { id: format!("M7.{seq}@{lo}"), basis, covered_terms: Vec::new() }
}

/// Compiles a bound into measurement settings covering its whole expansion.
///
/// Setting counts: 2 for `P0`; 3(N-1) for `P1D_simplified` on chains;
/// `N_x(N_y-1)+2` on odd square grids for `P2D` (and on every even-width
/// grid for `P2D_even`); at most 11N for the refined `P1D`.
pub fn compile(g: &ClusterGraph, bound: BoundId) -> Result<Vec<MeasurementSetting>> {
    if bound == BoundId::FExact {
        return Err(Error::TooLarge(
            "the full projector expands exponentially; compile refuses it".into(),
        ));
    }
    let expansion = expand_bound(g, bound)?;
    let mut settings = if bound == BoundId::P0 {
        vec![checkerboard(g, QubitClass::A, "Mo"), checkerboard(g, QubitClass::B, "Me")]
    } else {
        match g.kind() {
            ClusterKind::Chain => chain_candidates(g, bound),
            ClusterKind::Grid => grid_candidates(g),
        }
    };
    let allow_bespoke = bound == BoundId::P1D;
    let mut bespoke_seq = 0usize;

    let paulis: BTreeMap<&Vec<u32>, PauliString> = expansion
        .terms
        .keys()
        .map(|subset| pauli_of_subset(g, subset).map(|p| (subset, p)))
        .collect::<Result<_>>()?;

    for (subset, pauli) in &paulis {
        let covered = settings.iter().any(|s| s.is_compatible(pauli));
        if !covered {
            if !allow_bespoke {
                return Err(Error::Inconsistent(format!(
                    "window construction left subset {subset:?} uncovered for {bound}"
                )));
            }
            bespoke_seq += 1;
            settings.push(bespoke_setting(g.n(), bespoke_seq, pauli));
        }
    }
    // record every compatible subset on every setting; the first listing is
    // the subset's primary setting
    for (subset, pauli) in &paulis {
        for s in &mut settings {
            if s.is_compatible(pauli) {
                s.covered_terms.push((*subset).clone());
            }
        }
    }
    Ok(settings)
}

// ---------------------------------------------------------------------------
// Estimation from shot records
// ---------------------------------------------------------------------------

/// Estimates a bound from raw shot records.
///
/// Each subset is estimated from its primary setting as the signed mean of
/// per-shot outcome products over the subset's Pauli support. Standard
/// errors treat distinct settings as independent; terms sharing a setting
/// are combined per shot, so their covariance is handled exactly.
pub fn estimate_from_shots(
    g: &ClusterGraph,
    bound: BoundId,
    settings: &[MeasurementSetting],
    shots: &[ShotRecord],
) -> Result<BoundEstimate> {
    let expansion = expand_bound(g, bound)?;
    let n = g.n();

    struct Term {
        support: Vec<u32>,
        weight: f64, // coeff * pauli sign
    }
    // primary assignment by basis compatibility, in settings order
    let mut per_setting: Vec<Vec<Term>> = (0..settings.len()).map(|_| Vec::new()).collect();
    for (subset, coeff) in &expansion.terms {
        let pauli = pauli_of_subset(g, subset)?;
        let primary = settings
            .iter()
            .position(|s| s.is_compatible(&pauli))
            .ok_or_else(|| Error::IncompleteData(format!("no setting covers subset {subset:?}")))?;
        let weight = ratio_to_f64(*coeff) * pauli.phase().real_sign();
        per_setting[primary].push(Term { support: pauli.support_labels().collect(), weight });
    }

    let mut by_id: BTreeMap<&str, Vec<&ShotRecord>> = BTreeMap::new();
    for rec in shots {
        if rec.outcomes.len() != n as usize {
            return Err(Error::IncompleteData(format!(
                "shot for '{}' has {} outcomes, expected {n}",
                rec.setting_id,
                rec.outcomes.len()
            )));
        }
        by_id.entry(rec.setting_id.as_str()).or_default().push(rec);
    }

    let mut mean = ratio_to_f64(expansion.constant);
    let mut variance = 0.0;
    let mut total_shots = 0u64;
    for (setting, terms) in settings.iter().zip(&per_setting) {
        if terms.is_empty() {
            continue;
        }
        let recs = by_id.get(setting.id.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if recs.is_empty() {
            return Err(Error::IncompleteData(format!(
                "setting '{}' has covered terms but no shots",
                setting.id
            )));
        }
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for rec in recs {
            let mut y = 0.0;
            for t in terms {
                let mut prod = 1i32;
                for &q in &t.support {
                    prod *= rec.outcomes[(q - 1) as usize] as i32;
                }
                y += t.weight * prod as f64;
            }
            sum += y;
            sum_sq += y * y;
        }
        let m = recs.len() as f64;
        total_shots += recs.len() as u64;
        let setting_mean = sum / m;
        mean += setting_mean;
        if recs.len() > 1 {
            let var = ((sum_sq - m * setting_mean * setting_mean) / (m - 1.0)).max(0.0);
            variance += var / m;
        }
    }

    Ok(BoundEstimate { bound, mean, std_error: variance.sqrt(), repetitions: total_shots, seed: 0 })
}

pub(crate) fn ratio_to_f64(r: Coeff) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Evaluates an expansion given per-generator values; used to cross-check
/// the expansion against the direct syndrome evaluators.
pub fn expansion_value(exp: &TermExpansion, generator_value: impl Fn(u32) -> f64) -> f64 {
    let mut total = ratio_to_f64(exp.constant);
    for (subset, c) in &exp.terms {
        let prod: f64 = subset.iter().map(|&l| generator_value(l)).product();
        total += ratio_to_f64(*c) * prod;
    }
    total
}

// ---------------------------------------------------------------------------
// Settings file (JSON) and shot file (CSV)
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphJson {
    kind: ClusterKind,
    n_x: u32,
    n_y: u32,
}

#[derive(Serialize, Deserialize)]
struct SettingJson {
    id: String,
    basis: BTreeMap<String, String>,
    terms: Vec<Vec<u32>>,
}

#[derive(Serialize, Deserialize)]
struct SettingsFileJson {
    graph: GraphJson,
    bound: BoundId,
    settings: Vec<SettingJson>,
}

pub fn settings_to_json(
    g: &ClusterGraph,
    bound: BoundId,
    settings: &[MeasurementSetting],
) -> Result<String> {
    let file = SettingsFileJson {
        graph: GraphJson { kind: g.kind(), n_x: g.n_x(), n_y: g.n_y() },
        bound,
        settings: settings
            .iter()
            .map(|s| SettingJson {
                id: s.id.clone(),
                basis: s
                    .basis
                    .iter()
                    .map(|(q, p)| (q.to_string(), p.as_char().to_string()))
                    .collect(),
                terms: s.covered_terms.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn settings_from_json(
    text: &str,
) -> Result<(ClusterGraph, BoundId, Vec<MeasurementSetting>)> {
    let file: SettingsFileJson = serde_json::from_str(text)?;
    let g = match file.graph.kind {
        ClusterKind::Chain => ClusterGraph::chain(file.graph.n_x)?,
        ClusterKind::Grid => ClusterGraph::grid(file.graph.n_x, file.graph.n_y)?,
    };
    let settings = file
        .settings
        .into_iter()
        .map(|s| {
            let basis = s
                .basis
                .iter()
                .map(|(q, p)| {
                    let label: u32 = q
                        .parse()
                        .map_err(|_| Error::InvalidModel(format!("bad qubit key '{q}'")))?;
                    let op = p
                        .chars()
                        .next()
                        .filter(|_| p.len() == 1)
                        .and_then(Pauli::from_char)
                        .ok_or_else(|| Error::InvalidModel(format!("bad basis letter '{p}'")))?;
                    Ok((label, op))
                })
                .collect::<Result<BTreeMap<_, _>>>()?;
            Ok(MeasurementSetting { id: s.id, basis, covered_terms: s.terms })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((g, file.bound, settings))
}

/// Writes the shot CSV: header `setting_id,q1,...,qN`, one +-1 outcome per
/// qubit, LF line endings, ASCII only.
pub fn shots_to_csv(n: u32, shots: &[ShotRecord]) -> String {
    let mut out = String::from("setting_id");
    for q in 1..=n {
        let _ = write!(out, ",q{q}");
    }
    out.push('\n');
    for rec in shots {
        out.push_str(&rec.setting_id);
        for o in &rec.outcomes {
            let _ = write!(out, ",{o}");
        }
        out.push('\n');
    }
    out
}

pub fn shots_from_csv(text: &str) -> Result<Vec<ShotRecord>> {
    let mut lines = text.lines();
    let header = loop {
        match lines.next() {
            None => return Err(Error::IncompleteData("empty shot file".into())),
            Some(l) if l.starts_with('#') => continue,
            Some(l) => break l,
        }
    };
    if !header.starts_with("setting_id") {
        return Err(Error::IncompleteData("missing shot file header".into()));
    }
    let mut out = Vec::new();
    for line in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split(',');
        let id = parts
            .next()
            .ok_or_else(|| Error::IncompleteData("missing setting id".into()))?;
        let outcomes = parts
            .map(|t| match t {
                "1" | "+1" => Ok(1i8),
                "-1" => Ok(-1i8),
                other => Err(Error::IncompleteData(format!("bad outcome '{other}'"))),
            })
            .collect::<Result<Vec<i8>>>()?;
        out.push(ShotRecord { setting_id: id.to_string(), outcomes });
    }
    Ok(out)
}
