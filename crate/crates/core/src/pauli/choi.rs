use nalgebra::{DMatrix, SymmetricEigen};

use super::ptm::Ptm;
use super::string::PauliAction;
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar, C};

/// Choi matrix `C = 4^-n sum_ij R_ij P_j^T ⊗ P_i`.
///
/// With this normalization a trace-preserving channel has unit trace and
/// the identity channel maps to the projector onto the maximally
/// entangled state `|Φ><Φ|`, `|Φ> = 2^{-n/2} sum_k |k>|k>`.
#[derive(Clone, Debug)]
pub struct ChoiMatrix<T: Scalar> {
    qubits: usize,
    matrix: DMatrix<C<T>>,
}

/// Visits the nonzeros of the monomial matrix `P_j^T ⊗ P_i`, calling
/// `f(row, col, value)`.
fn for_each_kron<T: Scalar>(n: usize, i: usize, j: usize, mut f: impl FnMut(usize, usize, C<T>)) {
    let dim = 1usize << n;
    let pi = PauliAction::from_index(i);
    let pj = PauliAction::from_index(j);
    let neg = pj.transpose_negates();
    for c1 in 0..dim {
        // (P^T)[r, c] = P[c, r]; for Pauli matrices the support is symmetric
        let (r1, ph1) = pj.apply(c1);
        let mut a = super::string::phase_value::<T>(ph1);
        if neg {
            a = -a;
        }
        for c2 in 0..dim {
            let (r2, ph2) = pi.apply(c2);
            let b = super::string::phase_value::<T>(ph2);
            f(r1 * dim + r2, c1 * dim + c2, a * b);
        }
    }
}

impl<T: Scalar> ChoiMatrix<T> {
    pub fn from_ptm(ptm: &Ptm<T>) -> Self {
        let n = ptm.qubits();
        let dim4 = 1usize << (2 * n);
        let norm = T::one() / lit::<T>(dim4 as f64);
        let mut m = DMatrix::<C<T>>::zeros(dim4, dim4);
        let r = ptm.matrix();
        for i in 0..dim4 {
            for j in 0..dim4 {
                let rij = r[(i, j)];
                if rij == T::zero() {
                    continue;
                }
                let w = rij * norm;
                for_each_kron::<T>(n, i, j, |row, col, v| m[(row, col)] += v * w);
            }
        }
        Self { qubits: n, matrix: m }
    }

    /// `R_ij = Tr[C (P_j^T ⊗ P_i)]`.
    pub fn to_ptm(&self) -> Ptm<T> {
        let n = self.qubits;
        let dim4 = 1usize << (2 * n);
        let mut r = DMatrix::<T>::zeros(dim4, dim4);
        for i in 0..dim4 {
            for j in 0..dim4 {
                let mut acc = C::new(T::zero(), T::zero());
                // Tr[C M] = sum over nonzeros M[row, col] * C[col, row]
                for_each_kron::<T>(n, i, j, |row, col, v| acc += v * self.matrix[(col, row)]);
                r[(i, j)] = acc.re;
            }
        }
        Ptm::from_matrix(n, r).expect("dimensions consistent")
    }

    pub fn from_matrix(qubits: usize, matrix: DMatrix<C<T>>) -> Result<Self> {
        let dim4 = 1usize << (2 * qubits);
        if matrix.nrows() != dim4 || matrix.ncols() != dim4 {
            return Err(CoreError::DimensionMismatch { expected: dim4, got: matrix.nrows() });
        }
        Ok(Self { qubits, matrix })
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<C<T>> {
        &self.matrix
    }

    pub fn trace(&self) -> C<T> {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> T {
        let diff = &self.matrix - self.matrix.adjoint();
        diff.iter().fold(T::zero(), |acc, z| acc.max((z.re * z.re + z.im * z.im).sqrt()))
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<T> {
        let herm = (&self.matrix + self.matrix.adjoint()) * C::new(lit::<T>(0.5), T::zero());
        let mut ev: Vec<T> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> T {
        self.eigenvalues()[0]
    }
}

pub fn choi_from_ptm<T: Scalar>(ptm: &Ptm<T>) -> ChoiMatrix<T> {
    ChoiMatrix::from_ptm(ptm)
}
