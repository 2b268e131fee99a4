//! Chain and grid cluster-state lattices.
//!
//! Qubit labels run 1..=N in row-major order. Each stabilizer generator
//! applies X to its own qubit and Z to every lattice neighbor. Generators
//! split into two measurement classes A and B forming a proper 2-coloring;
//! class A plays the role of the "odd" set in all bound formulas. For chains
//! and odd-width grids A is simply the odd labels; for even-width grids the
//! checkerboard no longer matches label parity, so A holds the odd labels on
//! odd rows together with the even labels on even rows.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliString};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterKind {
    Chain,
    Grid,
}

/// Measurement class of a stabilizer generator.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum QubitClass {
    A,
    B,
}

/// An immutable cluster-state lattice description.
#[derive(Clone, Debug)]
pub struct ClusterGraph {
    kind: ClusterKind,
    n_x: u32,
    n_y: u32,
    neighbors: Vec<Vec<u32>>,
    class_of: Vec<QubitClass>,
    // class membership as bit masks over labels (bit label-1), used by the
    // syndrome evaluators
    mask_a: Vec<u64>,
    mask_b: Vec<u64>,
}

impl ClusterGraph {
    /// Linear cluster of `n >= 2` qubits.
    pub fn chain(n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidSize(format!("chain needs n >= 2, got {n}")));
        }
        Self::build(ClusterKind::Chain, n, 1)
    }

    /// Rectangular grid cluster, `n_x` columns by `n_y` rows, both >= 2.
    pub fn grid(n_x: u32, n_y: u32) -> Result<Self> {
        if n_x < 2 || n_y < 2 {
            return Err(Error::InvalidSize(format!(
                "grid needs n_x >= 2 and n_y >= 2, got {n_x}x{n_y}"
            )));
        }
        Self::build(ClusterKind::Grid, n_x, n_y)
    }

    fn build(kind: ClusterKind, n_x: u32, n_y: u32) -> Result<Self> {
        let n = n_x * n_y;
        let mut neighbors = vec![Vec::new(); n as usize];
        for label in 1..=n {
            let idx = (label - 1) as usize;
            let row = (label - 1) / n_x;
            let col = (label - 1) % n_x;
            if col > 0 {
                neighbors[idx].push(label - 1);
            }
            if col + 1 < n_x {
                neighbors[idx].push(label + 1);
            }
            if row > 0 {
                neighbors[idx].push(label - n_x);
            }
            if row + 1 < n_y {
                neighbors[idx].push(label + n_x);
            }
            neighbors[idx].sort_unstable();
        }

        let class_of: Vec<QubitClass> = (1..=n)
            .map(|label| {
                let in_a = if n_x % 2 == 1 {
                    label % 2 == 1
                } else {
                    // even width: odd labels on odd rows, even labels on even rows
                    let row = (label - 1) / n_x + 1;
                    (label % 2 == 1) == (row % 2 == 1)
                };
                if in_a {
                    QubitClass::A
                } else {
                    QubitClass::B
                }
            })
            .collect();

        let words = (n as usize).div_ceil(64);
        let mut mask_a = vec![0u64; words];
        let mut mask_b = vec![0u64; words];
        for label in 1..=n {
            let bit = (label - 1) as usize;
            match class_of[bit] {
                QubitClass::A => mask_a[bit / 64] |= 1 << (bit % 64),
                QubitClass::B => mask_b[bit / 64] |= 1 << (bit % 64),
            }
        }

        Ok(Self { kind, n_x, n_y, neighbors, class_of, mask_a, mask_b })
    }

    pub fn kind(&self) -> ClusterKind {
        self.kind
    }

    pub fn n_x(&self) -> u32 {
        self.n_x
    }

    pub fn n_y(&self) -> u32 {
        self.n_y
    }

    /// Total qubit count.
    pub fn n(&self) -> u32 {
        self.n_x * self.n_y
    }

    pub fn is_chain(&self) -> bool {
        self.kind == ClusterKind::Chain
    }

    pub fn check_label(&self, label: u32) -> Result<()> {
        if label == 0 || label > self.n() {
            Err(Error::InvalidLabel { label, n: self.n() })
        } else {
            Ok(())
        }
    }

    /// Sorted neighbor labels of `label`.
    pub fn neighbors(&self, label: u32) -> &[u32] {
        &self.neighbors[(label - 1) as usize]
    }

    pub fn class_of(&self, label: u32) -> QubitClass {
        self.class_of[(label - 1) as usize]
    }

    /// All labels of the given class, ascending.
    pub fn labels_in_class(&self, class: QubitClass) -> Vec<u32> {
        (1..=self.n()).filter(|&l| self.class_of(l) == class).collect()
    }

    /// 1-based row of a label.
    pub fn row_of(&self, label: u32) -> u32 {
        (label - 1) / self.n_x + 1
    }

    /// 1-based column of a label.
    pub fn col_of(&self, label: u32) -> u32 {
        (label - 1) % self.n_x + 1
    }

    /// Edges (a, b) with a < b, in ascending order.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for a in 1..=self.n() {
            for &b in self.neighbors(a) {
                if b > a {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Stabilizer generator `g_label`: X on the qubit, Z on each neighbor.
    pub fn stabilizer(&self, label: u32) -> Result<PauliString> {
        self.check_label(label)?;
        let mut ops = vec![(label, Pauli::X)];
        for &nb in self.neighbors(label) {
            ops.push((nb, Pauli::Z));
        }
        Ok(PauliString::from_ops(ops))
    }

    pub(crate) fn mask_a(&self) -> &[u64] {
        &self.mask_a
    }

    pub(crate) fn mask_b(&self) -> &[u64] {
        &self.mask_b
    }

    pub(crate) fn words(&self) -> usize {
        self.mask_a.len()
    }
}
