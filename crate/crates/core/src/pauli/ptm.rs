use nalgebra::{DMatrix, DVector};

use super::channel::PauliChannel;
use super::string::{commutes, PauliAction};
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar, C};

/// Largest register for which a Pauli channel PTM is built (4096 x 4096).
pub const PAULI_PTM_CAP: usize = 6;
/// Largest register for dense (Kraus / unitary) PTM construction.
pub const DENSE_PTM_CAP: usize = 3;

/// Pauli transfer matrix, `R_ij = 2^-n Tr[P_i A(P_j)]`.
///
/// Composition is right-to-left: `a.compose(&b)` is the map "apply `b`,
/// then `a`", i.e. the matrix product `a * b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Ptm<T: Scalar> {
    qubits: usize,
    matrix: DMatrix<T>,
}

/// Kraus representation `A(rho) = sum_k K_k rho K_k^dagger`.
#[derive(Clone, Debug)]
pub struct KrausSet<T: Scalar> {
    pub qubits: usize,
    pub operators: Vec<DMatrix<C<T>>>,
}

impl<T: Scalar> KrausSet<T> {
    pub fn new(qubits: usize, operators: Vec<DMatrix<C<T>>>) -> Result<Self> {
        let dim = 1usize << qubits;
        for k in &operators {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(CoreError::DimensionMismatch { expected: dim, got: k.nrows() });
            }
        }
        Ok(Self { qubits, operators })
    }

    pub fn unitary(u: DMatrix<C<T>>) -> Result<Self> {
        let dim = u.nrows();
        if !dim.is_power_of_two() || u.ncols() != dim {
            return Err(CoreError::InvalidArgument("unitary must be 2^n square".into()));
        }
        Self::new(dim.trailing_zeros() as usize, vec![u])
    }
}

/// Either representation accepted by [`ptm_from_channel`].
#[derive(Clone, Debug)]
pub enum Channel<T: Scalar> {
    Pauli(PauliChannel<T>),
    Kraus(KrausSet<T>),
}

pub fn ptm_from_channel<T: Scalar>(channel: &Channel<T>) -> Result<Ptm<T>> {
    match channel {
        Channel::Pauli(ch) => Ptm::from_pauli_channel(ch),
        Channel::Kraus(k) => Ptm::from_kraus(k),
    }
}

impl<T: Scalar> Ptm<T> {
    pub fn identity(qubits: usize) -> Self {
        let dim = 1usize << (2 * qubits);
        Self { qubits, matrix: DMatrix::identity(dim, dim) }
    }

    pub fn zeros(qubits: usize) -> Self {
        let dim = 1usize << (2 * qubits);
        Self { qubits, matrix: DMatrix::zeros(dim, dim) }
    }

    pub fn from_matrix(qubits: usize, matrix: DMatrix<T>) -> Result<Self> {
        let dim = 1usize << (2 * qubits);
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: matrix.nrows() });
        }
        Ok(Self { qubits, matrix })
    }

    pub fn from_diagonal(qubits: usize, diag: &[T]) -> Result<Self> {
        let dim = 1usize << (2 * qubits);
        if diag.len() != dim {
            return Err(CoreError::DimensionMismatch { expected: dim, got: diag.len() });
        }
        Ok(Self { qubits, matrix: DMatrix::from_diagonal(&DVector::from_column_slice(diag)) })
    }

    /// Diagonal PTM with entries `sum_i delta_i * sign(P_i, P_a)`.
    pub fn from_pauli_channel(ch: &PauliChannel<T>) -> Result<Self> {
        Self::from_pauli_channel_capped(ch, PAULI_PTM_CAP)
    }

    pub fn from_pauli_channel_capped(ch: &PauliChannel<T>, cap: usize) -> Result<Self> {
        if ch.qubits() > cap {
            return Err(CoreError::QubitCapExceeded { what: "Pauli-channel PTM", cap, got: ch.qubits() });
        }
        Self::from_diagonal(ch.qubits(), &ch.fidelities())
    }

    pub fn from_kraus(k: &KrausSet<T>) -> Result<Self> {
        Self::from_kraus_capped(k, DENSE_PTM_CAP)
    }

    pub fn from_kraus_capped(k: &KrausSet<T>, cap: usize) -> Result<Self> {
        let n = k.qubits;
        if n > cap {
            return Err(CoreError::QubitCapExceeded { what: "dense PTM", cap, got: n });
        }
        let dim4 = 1usize << (2 * n);
        let norm: T = lit::<T>(0.5).powi(n as i32);
        let paulis: Vec<_> = (0..dim4).map(PauliAction::from_index).collect();
        let mut matrix = DMatrix::zeros(dim4, dim4);
        for j in 0..dim4 {
            let pj = super::PauliString::from_index(n, j)?.matrix::<T>();
            let image = k
                .operators
                .iter()
                .map(|kk| kk * &pj * kk.adjoint())
                .fold(DMatrix::zeros(1 << n, 1 << n), |acc, m| acc + m);
            for (i, pi) in paulis.iter().enumerate() {
                matrix[(i, j)] = pi.trace_with(&image).re * norm;
            }
        }
        Ok(Self { qubits: n, matrix })
    }

    pub fn from_unitary(u: &DMatrix<C<T>>) -> Result<Self> {
        Self::from_kraus(&KrausSet::unitary(u.clone())?)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `self * b`: apply `b` first.
    pub fn compose(&self, b: &Ptm<T>) -> Result<Ptm<T>> {
        self.check_same(b)?;
        Ok(Ptm { qubits: self.qubits, matrix: &self.matrix * &b.matrix })
    }

    /// `u * e * u^-1`. The inverse is the transpose when `u` is orthogonal
    /// (any unitary channel), an explicit inverse otherwise.
    pub fn conjugate(u: &Ptm<T>, e: &Ptm<T>) -> Result<Ptm<T>> {
        u.check_same(e)?;
        let inv = u.inverse()?;
        Ok(Ptm { qubits: u.qubits, matrix: &u.matrix * &e.matrix * inv.matrix })
    }

    pub fn inverse(&self) -> Result<Ptm<T>> {
        let tol: T = lit(1e-10);
        if self.is_orthogonal(tol) {
            return Ok(self.transpose());
        }
        let inv = self.matrix.clone().try_inverse().ok_or(CoreError::Singular)?;
        Ok(Ptm { qubits: self.qubits, matrix: inv })
    }

    pub fn transpose(&self) -> Ptm<T> {
        Ptm { qubits: self.qubits, matrix: self.matrix.transpose() }
    }

    pub fn is_orthogonal(&self, tol: T) -> bool {
        let prod = self.matrix.transpose() * &self.matrix;
        let dim = self.dim();
        (prod - DMatrix::<T>::identity(dim, dim)).amax() <= tol
    }

    pub fn is_diagonal(&self, tol: T) -> bool {
        let dim = self.dim();
        (0..dim).all(|i| (0..dim).all(|j| i == j || self.matrix[(i, j)].abs() <= tol))
    }

    pub fn scale(&self, s: T) -> Ptm<T> {
        Ptm { qubits: self.qubits, matrix: &self.matrix * s }
    }

    pub fn add(&self, other: &Ptm<T>) -> Result<Ptm<T>> {
        self.check_same(other)?;
        Ok(Ptm { qubits: self.qubits, matrix: &self.matrix + &other.matrix })
    }

    pub fn sub(&self, other: &Ptm<T>) -> Result<Ptm<T>> {
        self.check_same(other)?;
        Ok(Ptm { qubits: self.qubits, matrix: &self.matrix - &other.matrix })
    }

    pub fn max_abs_diff(&self, other: &Ptm<T>) -> T {
        (&self.matrix - &other.matrix).amax()
    }

    /// Reads a diagonal PTM back as a Pauli channel.
    pub fn to_pauli_channel(&self, tol: T) -> Result<PauliChannel<T>> {
        if !self.is_diagonal(tol) {
            return Err(CoreError::InvalidChannel("PTM is not diagonal".into()));
        }
        let diag: Vec<T> = self.matrix.diagonal().iter().copied().collect();
        let w = PauliChannel::weights_from_fidelities(self.qubits, &diag);
        let cleaned = w.into_iter().enumerate().map(|(i, x)| {
            if x < T::zero() && x > -tol {
                (i, T::zero())
            } else {
                (i, x)
            }
        });
        PauliChannel::new(self.qubits, cleaned)
    }

    /// Pauli coordinates `c_j = Tr[P_j rho]` of an operator.
    pub fn pauli_coordinates(rho: &DMatrix<C<T>>) -> Vec<C<T>> {
        let n = rho.nrows().trailing_zeros() as usize;
        (0..1usize << (2 * n))
            .map(|j| PauliAction::from_index(j).trace_with(rho))
            .collect()
    }

    /// Inverse of [`pauli_coordinates`](Self::pauli_coordinates).
    pub fn operator_from_coordinates(n: usize, c: &[C<T>]) -> DMatrix<C<T>> {
        let dim = 1usize << n;
        let norm: T = lit::<T>(0.5).powi(n as i32);
        let mut m = DMatrix::zeros(dim, dim);
        for (j, &cj) in c.iter().enumerate() {
            if cj.re == T::zero() && cj.im == T::zero() {
                continue;
            }
            let act = PauliAction::from_index(j);
            for col in 0..dim {
                let (row, ph) = act.apply(col);
                m[(row, col)] += super::string::phase_value::<T>(ph) * cj * norm;
            }
        }
        m
    }

    /// Applies the superoperator to an operator.
    pub fn apply(&self, rho: &DMatrix<C<T>>) -> Result<DMatrix<C<T>>> {
        let n = rho.nrows().trailing_zeros() as usize;
        if n != self.qubits || rho.ncols() != rho.nrows() {
            return Err(CoreError::DimensionMismatch { expected: self.qubits, got: n });
        }
        let c = Self::pauli_coordinates(rho);
        let out: Vec<C<T>> = (0..self.dim())
            .map(|i| {
                c.iter().enumerate().fold(C::new(T::zero(), T::zero()), |acc, (j, &cj)| {
                    acc + cj * self.matrix[(i, j)]
                })
            })
            .collect();
        Ok(Self::operator_from_coordinates(n, &out))
    }

    fn check_same(&self, other: &Ptm<T>) -> Result<()> {
        if self.qubits != other.qubits {
            return Err(CoreError::DimensionMismatch { expected: self.qubits, got: other.qubits });
        }
        Ok(())
    }
}

/// `+1` when `P_i` and `P_a` commute, `-1` otherwise.
pub fn commutation_sign<T: Scalar>(i: usize, a: usize) -> T {
    if commutes(i, a) {
        T::one()
    } else {
        -T::one()
    }
}
