use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::scalar::{cx, Scalar, C};

/// Single-qubit Pauli letter. The discriminant is its base-4 digit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn digit(self) -> usize {
        self as usize
    }

    #[inline]
    pub fn from_digit(d: usize) -> Pauli {
        Self::ALL[d & 3]
    }

    /// Symplectic (x, z) bits: X = (1,0), Y = (1,1), Z = (0,1).
    #[inline]
    pub fn xz(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_xz(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// `self * other = i^phase * result`.
    pub fn mul(self, other: Pauli) -> (u8, Pauli) {
        use Pauli::*;
        let phase = match (self, other) {
            (X, Y) | (Y, Z) | (Z, X) => 1,
            (Y, X) | (Z, Y) | (X, Z) => 3,
            _ => 0,
        };
        let (x1, z1) = self.xz();
        let (x2, z2) = other.xz();
        (phase, Pauli::from_xz(x1 ^ x2, z1 ^ z2))
    }

    pub fn to_char(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.digit()]
    }
}

/// Tensor product of Pauli letters, one per qubit.
///
/// Indices use base-4 little-endian encoding: the letter on qubit 0 is the
/// least significant digit, so `I^n` has index 0. Matrices follow the same
/// convention (qubit 0 is the least significant bit of a basis index).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    pub fn identity(n: usize) -> Self {
        Self { letters: vec![Pauli::I; n] }
    }

    /// `letter` on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.letters[qubit] = letter;
        s
    }

    pub fn uniform(n: usize, letter: Pauli) -> Self {
        Self { letters: vec![letter; n] }
    }

    pub fn from_index(n: usize, index: usize) -> Result<Self> {
        if n >= usize::BITS as usize / 2 || index >= 1usize << (2 * n) {
            return Err(CoreError::InvalidArgument(format!(
                "Pauli index {index} out of range for {n} qubits"
            )));
        }
        let letters = (0..n).map(|q| Pauli::from_digit(index >> (2 * q))).collect();
        Ok(Self { letters })
    }

    pub fn index(&self) -> usize {
        self.letters
            .iter()
            .enumerate()
            .map(|(q, p)| p.digit() << (2 * q))
            .sum()
    }

    pub fn qubits(&self) -> usize {
        self.letters.len()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn weight(&self) -> usize {
        self.letters.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        debug_assert_eq!(self.qubits(), other.qubits());
        commutes(self.index(), other.index())
    }

    /// `self * other = i^phase * result`.
    pub fn mul(&self, other: &PauliString) -> (u8, PauliString) {
        let mut phase = 0u8;
        let letters = self
            .letters
            .iter()
            .zip(&other.letters)
            .map(|(&a, &b)| {
                let (ph, c) = a.mul(b);
                phase = (phase + ph) % 4;
                c
            })
            .collect();
        (phase, PauliString { letters })
    }

    /// Dense `2^n x 2^n` matrix.
    pub fn matrix<T: Scalar>(&self) -> DMatrix<C<T>> {
        let action = PauliAction::from_string(self);
        let dim = 1usize << self.qubits();
        let mut m = DMatrix::zeros(dim, dim);
        for col in 0..dim {
            let (row, ph) = action.apply(col);
            m[(row, col)] = phase_value(ph);
        }
        m
    }
}

impl fmt::Display for PauliString {
    /// Letters are written qubit 0 first.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(CoreError::InvalidArgument(format!("bad Pauli letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { letters })
    }
}

impl TryFrom<String> for PauliString {
    type Error = CoreError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<PauliString> for String {
    fn from(p: PauliString) -> String {
        p.to_string()
    }
}

/// Per-qubit symplectic masks of a base-4 Pauli index.
#[inline]
pub(crate) fn masks(index: usize) -> (usize, usize) {
    let mut x = 0usize;
    let mut z = 0usize;
    let mut rest = index;
    let mut q = 0;
    while rest != 0 {
        let (xb, zb) = Pauli::from_digit(rest).xz();
        x |= (xb as usize) << q;
        z |= (zb as usize) << q;
        rest >>= 2;
        q += 1;
    }
    (x, z)
}

/// Whether the Pauli strings with base-4 indices `a` and `b` commute.
#[inline]
pub fn commutes(a: usize, b: usize) -> bool {
    let (xa, za) = masks(a);
    let (xb, zb) = masks(b);
    ((xa & zb) ^ (za & xb)).count_ones() % 2 == 0
}

/// Index of the product `P_a P_b` up to phase.
#[inline]
pub fn product_index(a: usize, b: usize) -> usize {
    let (xa, za) = masks(a);
    let (xb, zb) = masks(b);
    from_masks(xa ^ xb, za ^ zb)
}

#[inline]
pub(crate) fn from_masks(x: usize, z: usize) -> usize {
    let mut idx = 0usize;
    let bits = usize::BITS - (x | z).leading_zeros();
    for q in 0..bits as usize {
        let p = Pauli::from_xz((x >> q) & 1 == 1, (z >> q) & 1 == 1);
        idx |= p.digit() << (2 * q);
    }
    idx
}

/// Sparse action of a Pauli string on computational basis states:
/// `P|b> = i^phase(b) |b xor x>`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliAction {
    pub x: usize,
    pub z: usize,
    y_count: u32,
}

impl PauliAction {
    pub fn from_index(index: usize) -> Self {
        let (x, z) = masks(index);
        Self { x, z, y_count: (x & z).count_ones() }
    }

    pub fn from_string(p: &PauliString) -> Self {
        Self::from_index(p.index())
    }

    /// Returns the image basis index and the power of `i` carried.
    #[inline]
    pub fn apply(&self, basis: usize) -> (usize, u8) {
        let sign = (self.z & basis).count_ones() % 2;
        let ph = (self.y_count + 2 * sign) % 4;
        (basis ^ self.x, ph as u8)
    }

    /// `Tr[P M]` for a dense matrix `M`.
    pub fn trace_with<T: Scalar>(&self, m: &DMatrix<C<T>>) -> C<T> {
        let dim = m.nrows();
        let mut acc = C::new(T::zero(), T::zero());
        for col in 0..dim {
            let (row, ph) = self.apply(col);
            // P[row, col] * M[col, row]
            acc += phase_value::<T>(ph) * m[(col, row)];
        }
        acc
    }

    /// Whether `P^T = -P` (odd number of Y letters).
    #[inline]
    pub fn transpose_negates(&self) -> bool {
        self.y_count % 2 == 1
    }
}

/// Moves a Pauli index on `targets.len()` qubits onto `targets` of a larger
/// register (local qubit `k` goes to `targets[k]`).
pub fn embed_index(local: usize, targets: &[usize]) -> usize {
    targets
        .iter()
        .enumerate()
        .fold(0, |acc, (k, &t)| acc | (((local >> (2 * k)) & 3) << (2 * t)))
}

/// `i^ph`.
#[inline]
pub fn phase_of<T: Scalar>(ph: u8) -> C<T> {
    phase_value(ph)
}

/// `conj(i^ph)`.
#[inline]
pub fn phase_conj<T: Scalar>(ph: u8) -> C<T> {
    phase_value((4 - ph % 4) % 4)
}

#[inline]
pub(crate) fn phase_value<T: Scalar>(ph: u8) -> C<T> {
    match ph % 4 {
        0 => cx(T::one(), T::zero()),
        1 => cx(T::zero(), T::one()),
        2 => cx(-T::one(), T::zero()),
        _ => cx(T::zero(), -T::one()),
    }
}
