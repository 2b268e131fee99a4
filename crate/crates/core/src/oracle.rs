//! Brute-force statevector and density-matrix reference for small systems.
//!
//! Two exactness routes back the fast syndrome engine: pattern enumeration
//! (exact for Pauli product channels) and dense linear algebra (handles
//! coherent Kraus channels). Amplitude ordering: qubit label 1 is the most
//! significant bit of the basis-state index.

use num::complex::Complex64;
use num::Zero;

use crate::compiler::{expand_bound, pauli_of_subset, ratio_to_f64, TermExpansion};
use crate::error::{Error, Result};
use crate::lattice::ClusterGraph;
use crate::noise::{syndrome_of, KrausChannel, PauliErrorModel};
use crate::pauli::{Pauli, PauliString, Phase};
use crate::syndrome::{enumeration_branches, eval_on_violations, for_each_pattern, BoundId};

/// Cap on qubit count for the pure statevector path.
pub const MAX_PURE_QUBITS: u32 = 14;
/// Cap on qubit count for the density-matrix path.
pub const MAX_MIXED_QUBITS: u32 = 10;
/// Cap on the number of enumerated error patterns.
pub const MAX_PATTERNS: f64 = 1e7;

/// Kahan compensated accumulator; the oracle equalities are asserted at
/// 1e-12 absolute, which plain summation over 1e6 branches cannot hold.
#[derive(Default, Clone, Copy)]
struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    #[inline]
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum
    }
}

/// Dense pure state over `n` qubits.
#[derive(Clone, Debug)]
pub struct DenseState {
    n: u32,
    amps: Vec<Complex64>,
}

impl DenseState {
    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn inner(&self, other: &DenseState) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }
}

fn bit_of(n: u32, index: usize, label: u32) -> usize {
    index >> (n - label) & 1
}

/// The unique joint +1 eigenstate of all stabilizer generators, built as the
/// uniform superposition with a controlled-phase factor per lattice edge.
pub fn build_cluster_state(g: &ClusterGraph) -> Result<DenseState> {
    let n = g.n();
    if n > MAX_PURE_QUBITS {
        return Err(Error::TooLarge(format!(
            "dense path supports up to {MAX_PURE_QUBITS} qubits, graph has {n}"
        )));
    }
    let dim = 1usize << n;
    let norm = 1.0 / (dim as f64).sqrt();
    let edges = g.edges();
    let amps = (0..dim)
        .map(|z| {
            let mut parity = 0usize;
            for &(a, b) in &edges {
                parity ^= bit_of(n, z, a) & bit_of(n, z, b);
            }
            Complex64::new(if parity == 1 { -norm } else { norm }, 0.0)
        })
        .collect();
    Ok(DenseState { n, amps })
}

/// Applies a signed Pauli string to a dense state.
pub fn apply_pauli(state: &DenseState, p: &PauliString) -> DenseState {
    let n = state.n;
    let dim = state.amps.len();
    let phase = match p.phase() {
        Phase::PlusOne => Complex64::new(1.0, 0.0),
        Phase::MinusOne => Complex64::new(-1.0, 0.0),
        Phase::PlusI => Complex64::new(0.0, 1.0),
        Phase::MinusI => Complex64::new(0.0, -1.0),
    };
    let mut xmask = 0usize;
    let sites: Vec<(u32, Pauli)> = p.iter().collect();
    for &(q, op) in &sites {
        if matches!(op, Pauli::X | Pauli::Y) {
            xmask |= 1 << (n - q);
        }
    }
    let mut out = vec![Complex64::zero(); dim];
    for (z, &amp) in state.amps.iter().enumerate() {
        let mut c = phase;
        for &(q, op) in &sites {
            let b = bit_of(n, z, q);
            match op {
                Pauli::X => {}
                Pauli::Z => {
                    if b == 1 {
                        c = -c;
                    }
                }
                Pauli::Y => {
                    // Y|b> = i(-1)^b |1-b>
                    c *= Complex64::new(0.0, 1.0);
                    if b == 1 {
                        c = -c;
                    }
                }
            }
        }
        out[z ^ xmask] += c * amp;
    }
    DenseState { n, amps: out }
}

/// Expectation `<state|P|state>` of a signed Pauli string.
pub fn pauli_expectation(state: &DenseState, p: &PauliString) -> Complex64 {
    let applied = apply_pauli(state, p);
    state.inner(&applied)
}

// ---------------------------------------------------------------------------
// Pattern-enumeration oracle
// ---------------------------------------------------------------------------

/// Exact bound expectation under a Pauli product channel, by enumerating
/// every error pattern with its probability.
pub fn exact_bound_expectation(
    g: &ClusterGraph,
    model: &PauliErrorModel,
    bound: BoundId,
) -> Result<f64> {
    bound.check_compatible(g)?;
    let mut total = Compensated::default();
    for_each_pattern(g, model, MAX_PATTERNS, |prob, violations| {
        match eval_on_violations(g, bound, violations) {
            0 => {}
            1 => total.add(prob),
            _ => total.add(-prob),
        }
    })?;
    Ok(total.total())
}

/// Number of branches the enumeration would visit.
pub fn enumeration_cost(model: &PauliErrorModel) -> f64 {
    enumeration_branches(model)
}

/// Probability mass, under the model, of non-identity patterns that land in
/// the stabilizer group (clean syndrome), split by the number of fired
/// events: (mass with 1-2 fired events, mass with 3 or more).
pub fn stabilizer_pattern_mass(g: &ClusterGraph, model: &PauliErrorModel) -> Result<(f64, f64)> {
    // count fired events by enumerating patterns alongside a weight channel:
    // rerun the enumeration once per split is cheap at desk scale
    let mut low = 0.0;
    let mut high = 0.0;
    let events = model.events.clone();
    // recursive enumeration carrying fired-event count
    struct Ctx<'a> {
        g: &'a ClusterGraph,
        events: &'a [crate::noise::ErrorEvent],
        low: f64,
        high: f64,
    }
    fn walk(ctx: &mut Ctx, idx: usize, prob: f64, fired: u32, pattern: PauliString) {
        if idx == ctx.events.len() {
            if fired > 0 {
                let s = syndrome_of(ctx.g, &pattern);
                if s.all() {
                    if fired >= 3 {
                        ctx.high += prob;
                    } else {
                        ctx.low += prob;
                    }
                }
            }
            return;
        }
        let ev = &ctx.events[idx];
        walk(ctx, idx + 1, prob * (1.0 - ev.trigger), fired, pattern.clone());
        let labels = ev.support.labels();
        for (outcome, w) in &ev.dist {
            let mut p = pattern.clone();
            for (slot, op) in outcome.iter().enumerate() {
                if let Some(op) = op {
                    p.multiply_site(labels[slot], *op);
                }
            }
            walk(ctx, idx + 1, prob * ev.trigger * w, fired + 1, p);
        }
    }
    if enumeration_branches(model) > MAX_PATTERNS {
        return Err(Error::TooLarge("pattern enumeration over budget".into()));
    }
    let mut ctx = Ctx { g, events: &events, low: 0.0, high: 0.0 };
    walk(&mut ctx, 0, 1.0, 0, PauliString::identity());
    low += ctx.low;
    high += ctx.high;
    Ok((low, high))
}

// ---------------------------------------------------------------------------
// Density-matrix oracle
// ---------------------------------------------------------------------------

/// Dense density matrix over `n` qubits, row-major.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n: u32,
    dim: usize,
    elems: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &DenseState) -> Result<Self> {
        if state.n > MAX_MIXED_QUBITS {
            return Err(Error::TooLarge(format!(
                "density path supports up to {MAX_MIXED_QUBITS} qubits"
            )));
        }
        let dim = state.amps.len();
        let mut elems = vec![Complex64::zero(); dim * dim];
        for (r, &a) in state.amps.iter().enumerate() {
            for (c, &b) in state.amps.iter().enumerate() {
                elems[r * dim + c] = a * b.conj();
            }
        }
        Ok(Self { n: state.n, dim, elems })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self.elems[i * self.dim + i]).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..=r {
                let d = (self.elems[r * self.dim + c] - self.elems[c * self.dim + r].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// rho -> sigma rho sigma for a Hermitian Pauli string (sign drops out).
    fn pauli_conjugate(&self, p: &PauliString) -> DensityMatrix {
        let n = self.n;
        let mut xmask = 0usize;
        let sites: Vec<(u32, Pauli)> = p.iter().collect();
        for &(q, op) in &sites {
            if matches!(op, Pauli::X | Pauli::Y) {
                xmask |= 1 << (n - q);
            }
        }
        let coeff = |z: usize| -> Complex64 {
            let mut c = Complex64::new(1.0, 0.0);
            for &(q, op) in &sites {
                let b = bit_of(n, z, q);
                match op {
                    Pauli::X => {}
                    Pauli::Z => {
                        if b == 1 {
                            c = -c;
                        }
                    }
                    Pauli::Y => {
                        c *= Complex64::new(0.0, 1.0);
                        if b == 1 {
                            c = -c;
                        }
                    }
                }
            }
            c
        };
        let mut out = vec![Complex64::zero(); self.dim * self.dim];
        for r in 0..self.dim {
            let cr = coeff(r ^ xmask);
            for c in 0..self.dim {
                let cc = coeff(c ^ xmask);
                out[r * self.dim + c] =
                    cr * self.elems[(r ^ xmask) * self.dim + (c ^ xmask)] * cc.conj();
            }
        }
        DensityMatrix { n, dim: self.dim, elems: out }
    }

    fn scaled_add(&mut self, w: f64, other: &DensityMatrix) {
        for (a, b) in self.elems.iter_mut().zip(&other.elems) {
            *a += w * b;
        }
    }

    fn scale(&mut self, w: f64) {
        for a in self.elems.iter_mut() {
            *a *= w;
        }
    }
}

/// Evolves the ideal cluster state through the product channel event by
/// event, as a dense density matrix.
pub fn density_under_model(g: &ClusterGraph, model: &PauliErrorModel) -> Result<DensityMatrix> {
    if g.n() > MAX_MIXED_QUBITS {
        return Err(Error::TooLarge(format!(
            "density path supports up to {MAX_MIXED_QUBITS} qubits, graph has {}",
            g.n()
        )));
    }
    model.validate_for(g)?;
    let psi = build_cluster_state(g)?;
    let mut rho = DensityMatrix::from_pure(&psi)?;
    for ev in &model.events {
        let labels = ev.support.labels();
        let mut next = rho.clone();
        next.scale(1.0 - ev.trigger);
        for (outcome, w) in &ev.dist {
            let mut p = PauliString::identity();
            for (slot, op) in outcome.iter().enumerate() {
                if let Some(op) = op {
                    p.multiply_site(labels[slot], *op);
                }
            }
            let conj = rho.pauli_conjugate(&p);
            next.scaled_add(ev.trigger * w, &conj);
        }
        rho = next;
    }
    Ok(rho)
}

/// Dense operator trace `Tr{P rho}` of an expanded bound against a density
/// matrix, via per-term Pauli matrices. Fully independent of the syndrome
/// shortcut: the only inputs are the expansion and dense linear algebra.
pub fn dense_bound_trace(
    g: &ClusterGraph,
    rho: &DensityMatrix,
    expansion: &TermExpansion,
) -> Result<f64> {
    let n = g.n();
    let dim = 1usize << n;
    let mut total = Compensated::default();
    total.add(ratio_to_f64(expansion.constant) * rho.trace().re);
    for (subset, coeff) in &expansion.terms {
        let pauli = pauli_of_subset(g, subset)?;
        // Tr{sigma rho}: sigma maps |z> -> c(z)|z ^ xmask>, so the trace
        // picks rows rho[z ^ xmask, z] weighted by c(z)
        let mut xmask = 0usize;
        let sites: Vec<(u32, Pauli)> = pauli.iter().collect();
        for &(q, op) in &sites {
            if matches!(op, Pauli::X | Pauli::Y) {
                xmask |= 1 << (n - q);
            }
        }
        let sign = pauli.phase().real_sign();
        let mut term = Compensated::default();
        for z in 0..dim {
            let mut c = Complex64::new(sign, 0.0);
            for &(q, op) in &sites {
                let b = bit_of(n, z, q);
                match op {
                    Pauli::X => {}
                    Pauli::Z => {
                        if b == 1 {
                            c = -c;
                        }
                    }
                    Pauli::Y => {
                        c *= Complex64::new(0.0, 1.0);
                        if b == 1 {
                            c = -c;
                        }
                    }
                }
            }
            term.add((c * rho.elems[(z ^ xmask) * dim + z]).re);
        }
        total.add(ratio_to_f64(*coeff) * term.total());
    }
    Ok(total.total())
}

/// Convenience composition: density-matrix evolution followed by the dense
/// operator trace of the expanded bound.
pub fn dense_bound_expectation(
    g: &ClusterGraph,
    model: &PauliErrorModel,
    bound: BoundId,
) -> Result<f64> {
    let rho = density_under_model(g, model)?;
    let expansion = expand_bound(g, bound)?;
    dense_bound_trace(g, &rho, &expansion)
}

// ---------------------------------------------------------------------------
// Coherent-error reduction checks
// ---------------------------------------------------------------------------

/// Applies a Kraus operator in the Pauli basis to a dense state.
pub fn apply_kraus(state: &DenseState, ch: &KrausChannel) -> DenseState {
    let mut out = DenseState { n: state.n, amps: vec![Complex64::zero(); state.amps.len()] };
    let mut add_term = |coeff: Complex64, pauli: Option<PauliString>| {
        if coeff == Complex64::zero() {
            return;
        }
        let applied = match &pauli {
            None => state.clone(),
            Some(p) => apply_pauli(state, p),
        };
        for (o, a) in out.amps.iter_mut().zip(&applied.amps) {
            *o += coeff * a;
        }
    };
    match ch {
        KrausChannel::Single { target, alpha, beta } => {
            add_term(*alpha, None);
            for (k, op) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                add_term(beta[k], Some(PauliString::single(*target, op)));
            }
        }
        KrausChannel::Pair { targets: (a, b), beta } => {
            let letter = |k: usize| -> Option<Pauli> {
                match k {
                    0 => None,
                    1 => Some(Pauli::X),
                    2 => Some(Pauli::Y),
                    _ => Some(Pauli::Z),
                }
            };
            for (j, row) in beta.iter().enumerate() {
                for (jp, &c) in row.iter().enumerate() {
                    let mut ops = Vec::new();
                    if let Some(op) = letter(j) {
                        ops.push((*a, op));
                    }
                    if let Some(op) = letter(jp) {
                        ops.push((*b, op));
                    }
                    let p = if ops.is_empty() {
                        None
                    } else {
                        Some(PauliString::from_ops(ops))
                    };
                    add_term(c, p);
                }
            }
        }
    }
    out
}

/// Left side: `<Psi| E^dag (prod_{i in T} g_i) E |Psi>` computed densely.
/// Right side: the Pauli-mixture prediction `sum |beta|^2 * v` where `v` is
/// the syndrome-wise value of the generator product under that Pauli.
///
/// The two agree exactly for single-qubit channels and for bulk pair
/// channels; 1D pair channels touching the two-body edge stabilizers are
/// the documented exception.
pub fn coherent_mixture_check(
    g: &ClusterGraph,
    ch: &KrausChannel,
    subset: &[u32],
) -> Result<(f64, f64)> {
    ch.validate_for(g)?;
    let psi = build_cluster_state(g)?;
    let phi = apply_kraus(&psi, ch);
    let g_t = pauli_of_subset(g, subset)?;
    let lhs_c = pauli_expectation(&phi, &g_t);
    if lhs_c.im.abs() > 1e-10 {
        return Err(Error::Inconsistent(format!(
            "expectation of a Hermitian operator came out complex: {lhs_c}"
        )));
    }

    let value_under = |pattern: &PauliString| -> f64 {
        let s = syndrome_of(g, pattern);
        subset
            .iter()
            .map(|&i| if s.is_satisfied(i) { 1.0 } else { -1.0 })
            .product()
    };
    let rhs = match ch {
        KrausChannel::Single { target, alpha, beta } => {
            let mut acc = alpha.norm_sqr();
            for (k, op) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
                acc += beta[k].norm_sqr() * value_under(&PauliString::single(*target, op));
            }
            acc
        }
        KrausChannel::Pair { targets: (a, b), beta } => {
            let letter = |k: usize| -> Option<Pauli> {
                match k {
                    0 => None,
                    1 => Some(Pauli::X),
                    2 => Some(Pauli::Y),
                    _ => Some(Pauli::Z),
                }
            };
            let mut acc = 0.0;
            for (j, row) in beta.iter().enumerate() {
                for (jp, &c) in row.iter().enumerate() {
                    let mut ops = Vec::new();
                    if let Some(op) = letter(j) {
                        ops.push((*a, op));
                    }
                    if let Some(op) = letter(jp) {
                        ops.push((*b, op));
                    }
                    let v = if ops.is_empty() {
                        1.0
                    } else {
                        value_under(&PauliString::from_ops(ops))
                    };
                    acc += c.norm_sqr() * v;
                }
            }
            acc
        }
    };
    Ok((lhs_c.re, rhs))
}

/// Exact fidelity of `E|Psi>` against the ideal state: `|<Psi|E|Psi>|^2`.
pub fn exact_fidelity_dense(g: &ClusterGraph, ch: &KrausChannel) -> Result<f64> {
    ch.validate_for(g)?;
    let psi = build_cluster_state(g)?;
    let phi = apply_kraus(&psi, ch);
    Ok(psi.inner(&phi).norm_sqr())
}
