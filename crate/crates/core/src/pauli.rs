//! Signed multi-qubit Pauli strings with exact phase tracking.
//!
//! Strings are sparse maps from 1-based qubit labels to single-qubit Pauli
//! letters; identity sites are absent. The phase lives in the four-element
//! group {+1, +i, -1, -i} because intermediate products of stabilizer
//! generators pass through imaginary phases before they cancel.

use std::collections::BTreeMap;
use std::fmt;

/// Global phase of a Pauli string, stored as the exponent k in i^k.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Phase {
    PlusOne = 0,
    PlusI = 1,
    MinusOne = 2,
    MinusI = 3,
}

impl Phase {
    fn from_exponent(k: u8) -> Self {
        match k % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn mul(self, other: Phase) -> Phase {
        Phase::from_exponent(self as u8 + other as u8)
    }

    /// True for +1 and -1; Hermitian strings carry a real phase.
    pub fn is_real(self) -> bool {
        matches!(self, Phase::PlusOne | Phase::MinusOne)
    }

    /// +1.0 or -1.0; panics on imaginary phases.
    pub fn real_sign(self) -> f64 {
        match self {
            Phase::PlusOne => 1.0,
            Phase::MinusOne => -1.0,
            _ => panic!("phase {self:?} is not real"),
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::PlusOne => write!(f, "+"),
            Phase::PlusI => write!(f, "+i"),
            Phase::MinusOne => write!(f, "-"),
            Phase::MinusI => write!(f, "-i"),
        }
    }
}

/// Single-qubit Pauli letter (identity is represented by absence).
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Pauli> {
        match c {
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Product of two single-qubit letters: (phase, optional resulting letter).
/// `None` means the identity (a * a).
fn mul_single(a: Pauli, b: Pauli) -> (Phase, Option<Pauli>) {
    use Pauli::*;
    use Phase::*;
    match (a, b) {
        (X, X) | (Y, Y) | (Z, Z) => (PlusOne, None),
        (X, Y) => (PlusI, Some(Z)),
        (Y, X) => (MinusI, Some(Z)),
        (Y, Z) => (PlusI, Some(X)),
        (Z, Y) => (MinusI, Some(X)),
        (Z, X) => (PlusI, Some(Y)),
        (X, Z) => (MinusI, Some(Y)),
    }
}

/// A signed multi-qubit Pauli operator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PauliString {
    phase: Phase,
    support: BTreeMap<u32, Pauli>,
}

impl Default for PauliString {
    fn default() -> Self {
        Self::identity()
    }
}

impl PauliString {
    pub fn identity() -> Self {
        Self { phase: Phase::PlusOne, support: BTreeMap::new() }
    }

    /// Single-letter string on one qubit with phase +1.
    pub fn single(label: u32, op: Pauli) -> Self {
        let mut support = BTreeMap::new();
        support.insert(label, op);
        Self { phase: Phase::PlusOne, support }
    }

    /// Builds a string from `(label, letter)` pairs; later entries multiply
    /// onto earlier ones, so repeated labels combine with exact phase.
    pub fn from_ops(ops: impl IntoIterator<Item = (u32, Pauli)>) -> Self {
        let mut s = Self::identity();
        for (label, op) in ops {
            s.multiply_site(label, op);
        }
        s
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub fn is_identity(&self) -> bool {
        self.support.is_empty()
    }

    /// Number of non-identity sites.
    pub fn weight(&self) -> usize {
        self.support.len()
    }

    pub fn op_at(&self, label: u32) -> Option<Pauli> {
        self.support.get(&label).copied()
    }

    /// Sites in ascending label order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, Pauli)> + '_ {
        self.support.iter().map(|(&q, &p)| (q, p))
    }

    pub fn support_labels(&self) -> impl Iterator<Item = u32> + '_ {
        self.support.keys().copied()
    }

    pub fn max_label(&self) -> Option<u32> {
        self.support.keys().next_back().copied()
    }

    /// Right-multiplies the letter `op` at `label` onto this string.
    pub fn multiply_site(&mut self, label: u32, op: Pauli) {
        match self.support.remove(&label) {
            None => {
                self.support.insert(label, op);
            }
            Some(existing) => {
                let (ph, res) = mul_single(existing, op);
                self.phase = self.phase.mul(ph);
                if let Some(r) = res {
                    self.support.insert(label, r);
                }
            }
        }
    }

    /// The product `self * rhs` with exact phase.
    pub fn multiply(&self, rhs: &PauliString) -> PauliString {
        let mut out = self.clone();
        out.phase = out.phase.mul(rhs.phase);
        for (&label, &op) in &rhs.support {
            out.multiply_site(label, op);
        }
        out
    }

    /// True iff the two strings commute: the number of sites carrying
    /// different non-identity letters must be even.
    pub fn commutes(&self, rhs: &PauliString) -> bool {
        let mut anti = 0usize;
        let (small, big) = if self.support.len() <= rhs.support.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        for (&label, &op) in &small.support {
            if let Some(&other) = big.support.get(&label) {
                if other != op {
                    anti += 1;
                }
            }
        }
        anti % 2 == 0
    }
}

impl fmt::Display for PauliString {
    // Rendering convention: phase prefix, then dot-separated sites in
    // ascending label order, e.g. "+Z2.Y3.Y4.Z5". The identity prints "+I".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phase)?;
        if self.support.is_empty() {
            return write!(f, "I");
        }
        let mut first = true;
        for (&q, &p) in &self.support {
            if !first {
                write!(f, ".")?;
            }
            write!(f, "{}{}", p.as_char(), q)?;
            first = false;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ps(ops: &[(u32, Pauli)]) -> PauliString {
        PauliString::from_ops(ops.iter().copied())
    }

    #[test]
    fn single_qubit_relation() {
        // X * Z = -iY
        let x = PauliString::single(1, Pauli::X);
        let z = PauliString::single(1, Pauli::Z);
        let prod = x.multiply(&z);
        assert_eq!(prod.phase(), Phase::MinusI);
        assert_eq!(prod.op_at(1), Some(Pauli::Y));
    }

    #[test]
    fn two_generator_product() {
        // (X1 Z2) * (Z1 X2 Z3) = +Y1 Y2 Z3
        let a = ps(&[(1, Pauli::X), (2, Pauli::Z)]);
        let b = ps(&[(1, Pauli::Z), (2, Pauli::X), (3, Pauli::Z)]);
        let prod = a.multiply(&b);
        assert_eq!(prod.phase(), Phase::PlusOne);
        assert_eq!(prod.to_string(), "+Y1.Y2.Z3");
    }

    #[test]
    fn hermitian_involution() {
        let a = ps(&[(1, Pauli::Y), (4, Pauli::X), (9, Pauli::Z)]);
        let sq = a.multiply(&a);
        assert!(sq.is_identity());
        assert_eq!(sq.phase(), Phase::PlusOne);
    }

    #[test]
    fn commutation_cases() {
        let x1 = PauliString::single(1, Pauli::X);
        let z1 = PauliString::single(1, Pauli::Z);
        assert!(!x1.commutes(&z1));

        let a = ps(&[(1, Pauli::X), (2, Pauli::Z)]);
        let b = ps(&[(1, Pauli::Z), (2, Pauli::X)]);
        assert!(a.commutes(&b)); // two anticommuting sites

        let z3 = PauliString::single(3, Pauli::Z);
        let g3 = ps(&[(2, Pauli::Z), (3, Pauli::X), (4, Pauli::Z)]);
        assert!(!z3.commutes(&g3)); // one anticommuting site
    }

    #[test]
    fn display_identity() {
        assert_eq!(PauliString::identity().to_string(), "+I");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_pauli() -> impl Strategy<Value = Pauli> {
            prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)]
        }

        fn arb_string() -> impl Strategy<Value = PauliString> {
            proptest::collection::vec((1u32..12, arb_pauli()), 0..8)
                .prop_map(PauliString::from_ops)
        }

        proptest! {
            #[test]
            fn multiplication_is_associative(a in arb_string(), b in arb_string(), c in arb_string()) {
                let left = a.multiply(&b).multiply(&c);
                let right = a.multiply(&b.multiply(&c));
                prop_assert_eq!(left, right);
            }

            #[test]
            fn commutes_is_symmetric(a in arb_string(), b in arb_string()) {
                prop_assert_eq!(a.commutes(&b), b.commutes(&a));
            }

            #[test]
            fn product_order_differs_by_commutator_sign(a in arb_string(), b in arb_string()) {
                let ab = a.multiply(&b);
                let ba = b.multiply(&a);
                // same letters either way
                prop_assert_eq!(ab.iter().collect::<Vec<_>>(), ba.iter().collect::<Vec<_>>());
                let expected = if a.commutes(&b) {
                    ba.phase()
                } else {
                    ba.phase().mul(Phase::MinusOne)
                };
                prop_assert_eq!(ab.phase(), expected);
            }
        }
    }
}
