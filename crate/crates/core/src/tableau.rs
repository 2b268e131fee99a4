//! Stabilizer-tableau simulation of noisy cluster-state measurements.
//!
//! The tableau keeps N destabilizer and N stabilizer rows in the binary
//! symplectic representation with sign bits. Pauli errors only flip row
//! signs; single-qubit basis changes conjugate the rows; measuring all
//! qubits walks label order and samples each Z outcome by the usual
//! random/deterministic split, which realizes the Born rule for the
//! recorded outcome vector.

use rayon::prelude::*;

use crate::compiler::{MeasurementSetting, ShotRecord};
use crate::error::{Error, Result};
use crate::lattice::ClusterGraph;
use crate::noise::PauliErrorModel;
use crate::pauli::{Pauli, PauliString};
use crate::rng::RngStream;

/// Stabilizer tableau over `n` qubits (destabilizers, stabilizers, scratch).
#[derive(Clone, Debug)]
pub struct Tableau {
    n: usize,
    words: usize,
    xs: Vec<u64>,
    zs: Vec<u64>,
    signs: Vec<bool>,
}

fn parity_and(a: &[u64], b: &[u64]) -> bool {
    a.iter().zip(b).fold(0u32, |acc, (&x, &y)| acc ^ (x & y).count_ones()) & 1 == 1
}

impl Tableau {
    /// Tableau stabilizing the ideal cluster state of `g`: stabilizer row i
    /// is `g_i` with + sign, destabilizer row i is `Z_i`.
    pub fn prepare_cluster(g: &ClusterGraph) -> Self {
        let n = g.n() as usize;
        let words = n.div_ceil(64);
        let rows = 2 * n + 1;
        let mut t = Tableau {
            n,
            words,
            xs: vec![0; rows * words],
            zs: vec![0; rows * words],
            signs: vec![false; rows],
        };
        for i in 0..n {
            // destabilizer: Z on qubit i
            t.set_z(i, i, true);
            // stabilizer: X on qubit i, Z on neighbors
            let row = n + i;
            t.set_x(row, i, true);
            for &nb in g.neighbors(i as u32 + 1) {
                t.set_z(row, (nb - 1) as usize, true);
            }
        }
        t
    }

    pub fn qubits(&self) -> usize {
        self.n
    }

    fn row_x(&self, row: usize) -> &[u64] {
        &self.xs[row * self.words..(row + 1) * self.words]
    }

    fn row_z(&self, row: usize) -> &[u64] {
        &self.zs[row * self.words..(row + 1) * self.words]
    }

    fn set_x(&mut self, row: usize, q: usize, v: bool) {
        let w = row * self.words + q / 64;
        if v {
            self.xs[w] |= 1 << (q % 64);
        } else {
            self.xs[w] &= !(1 << (q % 64));
        }
    }

    fn set_z(&mut self, row: usize, q: usize, v: bool) {
        let w = row * self.words + q / 64;
        if v {
            self.zs[w] |= 1 << (q % 64);
        } else {
            self.zs[w] &= !(1 << (q % 64));
        }
    }

    fn get_x(&self, row: usize, q: usize) -> bool {
        self.xs[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    fn get_z(&self, row: usize, q: usize) -> bool {
        self.zs[row * self.words + q / 64] >> (q % 64) & 1 == 1
    }

    /// Sign of stabilizer row `i` (0-based): +1 or -1.
    pub fn stabilizer_sign(&self, i: usize) -> i8 {
        if self.signs[self.n + i] {
            -1
        } else {
            1
        }
    }

    /// Stabilizer row as a signed Pauli string (1-based labels).
    pub fn stabilizer_row(&self, i: usize) -> PauliString {
        let row = self.n + i;
        let mut ops = Vec::new();
        for q in 0..self.n {
            let op = match (self.get_x(row, q), self.get_z(row, q)) {
                (false, false) => continue,
                (true, false) => Pauli::X,
                (false, true) => Pauli::Z,
                (true, true) => Pauli::Y,
            };
            ops.push((q as u32 + 1, op));
        }
        let mut p = PauliString::from_ops(ops);
        if self.signs[row] {
            p.set_phase(p.phase().mul(crate::pauli::Phase::MinusOne));
        }
        p
    }

    /// Applies a Pauli error: each row's sign flips iff the row
    /// anticommutes with the pattern; row letters never change.
    pub fn apply_error(&mut self, e: &PauliString) {
        let mut ex = vec![0u64; self.words];
        let mut ez = vec![0u64; self.words];
        for (site, op) in e.iter() {
            assert!(site >= 1 && site as usize <= self.n, "label {site} out of range");
            let q = (site - 1) as usize;
            if matches!(op, Pauli::X | Pauli::Y) {
                ex[q / 64] |= 1 << (q % 64);
            }
            if matches!(op, Pauli::Z | Pauli::Y) {
                ez[q / 64] |= 1 << (q % 64);
            }
        }
        for row in 0..2 * self.n {
            let anti = parity_and(self.row_x(row), &ez) ^ parity_and(self.row_z(row), &ex);
            if anti {
                self.signs[row] = !self.signs[row];
            }
        }
    }

    /// Hadamard on qubit `q` (0-based).
    fn h(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let x = self.get_x(row, q);
            let z = self.get_z(row, q);
            if x && z {
                self.signs[row] = !self.signs[row];
            }
            self.set_x(row, q, z);
            self.set_z(row, q, x);
        }
    }

    /// Phase gate on qubit `q` (0-based).
    fn s(&mut self, q: usize) {
        for row in 0..2 * self.n {
            let x = self.get_x(row, q);
            let z = self.get_z(row, q);
            if x && z {
                self.signs[row] = !self.signs[row];
            }
            self.set_z(row, q, x ^ z);
        }
    }

    fn s_dagger(&mut self, q: usize) {
        self.s(q);
        self.s(q);
        self.s(q);
    }

    /// Phase exponent contribution when left-multiplying a single-qubit
    /// Pauli (x1,z1) onto (x2,z2).
    fn phase_exp(x1: bool, z1: bool, x2: bool, z2: bool) -> i32 {
        match (x1, z1) {
            (false, false) => 0,
            (true, true) => z2 as i32 - x2 as i32,
            (true, false) => {
                if z2 {
                    2 * x2 as i32 - 1
                } else {
                    0
                }
            }
            (false, true) => {
                if x2 {
                    1 - 2 * z2 as i32
                } else {
                    0
                }
            }
        }
    }

    /// Row h := row i * row h, with exact sign bookkeeping.
    fn rowsum(&mut self, h: usize, i: usize) {
        let mut exp = 2 * self.signs[h] as i32 + 2 * self.signs[i] as i32;
        for w in 0..self.words {
            let xi = self.xs[i * self.words + w];
            let zi = self.zs[i * self.words + w];
            let xh = self.xs[h * self.words + w];
            let zh = self.zs[h * self.words + w];
            let mut occupied = xi | zi;
            while occupied != 0 {
                let b = occupied.trailing_zeros();
                occupied &= occupied - 1;
                exp += Self::phase_exp(
                    xi >> b & 1 == 1,
                    zi >> b & 1 == 1,
                    xh >> b & 1 == 1,
                    zh >> b & 1 == 1,
                );
            }
        }
        debug_assert!(exp.rem_euclid(4) % 2 == 0, "row product must stay Hermitian");
        self.signs[h] = exp.rem_euclid(4) == 2;
        for w in 0..self.words {
            self.xs[h * self.words + w] ^= self.xs[i * self.words + w];
            self.zs[h * self.words + w] ^= self.zs[i * self.words + w];
        }
    }

    fn clear_row(&mut self, row: usize) {
        for w in 0..self.words {
            self.xs[row * self.words + w] = 0;
            self.zs[row * self.words + w] = 0;
        }
        self.signs[row] = false;
    }

    fn copy_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.words {
            self.xs[dst * self.words + w] = self.xs[src * self.words + w];
            self.zs[dst * self.words + w] = self.zs[src * self.words + w];
        }
        self.signs[dst] = self.signs[src];
    }

    /// Measures Z on qubit `q` (0-based), collapsing the state.
    fn measure_z(&mut self, q: usize, rng: &mut RngStream) -> i8 {
        let n = self.n;
        let mut p = None;
        for row in n..2 * n {
            if self.get_x(row, q) {
                p = Some(row);
                break;
            }
        }
        match p {
            Some(p) => {
                // outcome is uniformly random
                let outcome = rng.next_bool();
                for row in 0..2 * n {
                    if row != p && row != p - n && self.get_x(row, q) {
                        self.rowsum(row, p);
                    }
                }
                self.copy_row(p - n, p);
                self.clear_row(p);
                self.set_z(p, q, true);
                self.signs[p] = outcome;
                if outcome {
                    -1
                } else {
                    1
                }
            }
            None => {
                // deterministic: accumulate the stabilizer combination named
                // by the destabilizer x bits into the scratch row
                let scratch = 2 * n;
                self.clear_row(scratch);
                for i in 0..n {
                    if self.get_x(i, q) {
                        self.rowsum(scratch, i + n);
                    }
                }
                if self.signs[scratch] {
                    -1
                } else {
                    1
                }
            }
        }
    }

    /// Measures every qubit in its assigned basis, ascending label order.
    ///
    /// X and Y bases are realized by conjugating with H (and S-dagger before
    /// H for Y) and then measuring Z.
    pub fn measure_all(
        &mut self,
        basis: &std::collections::BTreeMap<u32, Pauli>,
        rng: &mut RngStream,
    ) -> Result<Vec<i8>> {
        if basis.len() != self.n || (1..=self.n as u32).any(|q| !basis.contains_key(&q)) {
            return Err(Error::IncompleteData(format!(
                "basis must assign all {} qubits",
                self.n
            )));
        }
        for q in 0..self.n {
            match basis[&(q as u32 + 1)] {
                Pauli::Z => {}
                Pauli::X => self.h(q),
                Pauli::Y => {
                    self.s_dagger(q);
                    self.h(q);
                }
            }
        }
        Ok((0..self.n).map(|q| self.measure_z(q, rng)).collect())
    }
}

/// Simulates the full shot pipeline: per shot a fresh error pattern on a
/// fresh cluster, measured in one compiled setting.
///
/// Shot `k` of setting `s` draws from substream `(seed, s * shots + k)`, so
/// the record list is reproducible and ordered by (setting, shot index)
/// regardless of how the work is parallelized.
pub fn run_shots(
    g: &ClusterGraph,
    model: &PauliErrorModel,
    settings: &[MeasurementSetting],
    shots_per_setting: u64,
    seed: u64,
) -> Result<Vec<ShotRecord>> {
    if shots_per_setting == 0 {
        return Err(Error::InvalidSize("shots_per_setting must be >= 1".into()));
    }
    model.validate_for(g)?;
    for s in settings {
        if s.basis.len() != g.n() as usize {
            return Err(Error::IncompleteData(format!(
                "setting '{}' does not cover all {} qubits",
                s.id,
                g.n()
            )));
        }
    }
    let template = Tableau::prepare_cluster(g);
    let jobs: Vec<(usize, u64)> = (0..settings.len())
        .flat_map(|s| (0..shots_per_setting).map(move |k| (s, k)))
        .collect();
    jobs.par_iter()
        .map(|&(s_idx, k)| {
            let stream_idx = s_idx as u64 * shots_per_setting + k;
            let mut rng = RngStream::substream(seed, stream_idx);
            let error = model.sample_error(&mut rng);
            let mut t = template.clone();
            t.apply_error(&error);
            let outcomes = t.measure_all(&settings[s_idx].basis, &mut rng)?;
            Ok(ShotRecord { setting_id: settings[s_idx].id.clone(), outcomes })
        })
        .collect()
}
