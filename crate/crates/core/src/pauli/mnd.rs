//! Maximum noise decomposition `E = (1 - p) I + p Λ`.

use super::channel::PauliChannel;
use super::choi::ChoiMatrix;
use super::ptm::Ptm;
use crate::error::{CoreError, Result};
use crate::scalar::{lit, Scalar};

/// Outcome of [`is_cptp`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CptpReport<T> {
    pub cptp: bool,
    /// Smallest Choi eigenvalue (negative means CP is violated).
    pub cp_margin: T,
    /// Largest deviation of PTM row 0 from the unit row `e_0`.
    pub tp_deviation: T,
}

impl<T: Scalar> CptpReport<T> {
    pub fn cp_ok(&self, tol: T) -> bool {
        self.cp_margin >= -tol
    }

    pub fn tp_ok(&self, tol: T) -> bool {
        self.tp_deviation <= tol
    }
}

/// CP via the Choi spectrum, TP via row 0 of the PTM.
///
/// Diagonal PTMs (Pauli channels) are checked through their Pauli weights,
/// which avoids building the `4^n x 4^n` Choi matrix.
pub fn is_cptp<T: Scalar>(ptm: &Ptm<T>, tol: T) -> CptpReport<T> {
    let m = ptm.matrix();
    let tp_deviation = (0..ptm.dim()).fold(T::zero(), |acc, j| {
        let target = if j == 0 { T::one() } else { T::zero() };
        acc.max((m[(0, j)] - target).abs())
    });
    let cp_margin = if ptm.is_diagonal(T::zero()) {
        let diag: Vec<T> = m.diagonal().iter().copied().collect();
        let w = PauliChannel::weights_from_fidelities(ptm.qubits(), &diag);
        // Choi of a Pauli mixture is diagonal in the Bell basis with
        // eigenvalues equal to the weights.
        w.into_iter().fold(T::max_value().unwrap_or_else(T::one), |acc, x| acc.min(x))
    } else {
        ChoiMatrix::from_ptm(ptm).min_eigenvalue()
    };
    CptpReport { cptp: cp_margin >= -tol && tp_deviation <= tol, cp_margin, tp_deviation }
}

/// Effective-noise part of a decomposition.
#[derive(Clone, Debug, PartialEq)]
pub enum Effective<T: Scalar> {
    Pauli(PauliChannel<T>),
    Ptm(Ptm<T>),
}

impl<T: Scalar> Effective<T> {
    pub fn to_ptm(&self) -> Result<Ptm<T>> {
        match self {
            Effective::Pauli(ch) => Ptm::from_pauli_channel(ch),
            Effective::Ptm(p) => Ok(p.clone()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MndResult<T: Scalar> {
    /// Effectiveness factor in `[0, 1]`.
    pub p: T,
    pub effective: Effective<T>,
    /// Set when the channel has no identity component (`p = 1`, `Λ = E`),
    /// e.g. for coherent noise.
    pub identity_absent: bool,
}

impl<T: Scalar> MndResult<T> {
    /// `(1 - p) I + p Λ` as a PTM.
    pub fn reconstruct(&self) -> Result<Ptm<T>> {
        let lambda = self.effective.to_ptm()?;
        let n = lambda.qubits();
        Ptm::identity(n).scale(T::one() - self.p).add(&lambda.scale(self.p))
    }
}

/// Pauli-channel fast path: `p = 1 - δ_0`, `Λ` the renormalized
/// non-identity part (identity when `p = 0`).
pub fn mnd_pauli<T: Scalar>(channel: &PauliChannel<T>) -> MndResult<T> {
    let n = channel.qubits();
    let p = channel.error_probability();
    if p == T::zero() {
        return MndResult { p, effective: Effective::Pauli(PauliChannel::identity(n)), identity_absent: false };
    }
    let identity_absent = channel.identity_weight() == T::zero();
    let lambda = PauliChannel::new(n, channel.iter().filter(|(i, _)| *i != 0).map(|(i, d)| (i, d / p)))
        .expect("renormalized weights form a channel");
    MndResult { p, effective: Effective::Pauli(lambda), identity_absent }
}

/// Bisection tolerance on `p` for the general path.
pub const MND_BISECTION_TOL: f64 = 1e-12;

/// General path: the smallest `p` (largest identity weight `1 - p`) for which
/// `(E - (1-p) I) / p` stays completely positive, found by bisection with
/// Choi positivity as the predicate. CP violation is monotone in `p`.
pub fn mnd_ptm<T: Scalar>(channel: &Ptm<T>) -> Result<MndResult<T>> {
    let check_tol: T = lit(1e-9);
    let report = is_cptp(channel, check_tol);
    if !report.cptp {
        return Err(CoreError::NotCptp {
            cp_margin: report.cp_margin.to_f64(),
            tp_deviation: report.tp_deviation.to_f64(),
        });
    }
    let n = channel.qubits();
    let id = Ptm::identity(n);
    let eig_tol = T::default_epsilon() * lit(1e3);
    // C(E) - (1-p) C(I) = p C(Λ); positivity of the left side is the predicate
    let choi_e = ChoiMatrix::from_ptm(channel);
    let choi_i = ChoiMatrix::from_ptm(&id);
    let cp_at = |p: T| {
        let m = choi_e.matrix() - choi_i.matrix() * crate::scalar::C::new(T::one() - p, T::zero());
        ChoiMatrix::from_matrix(n, m).expect("same dims").min_eigenvalue() >= -eig_tol
    };

    if cp_at(T::zero()) {
        return Ok(MndResult { p: T::zero(), effective: Effective::Ptm(id), identity_absent: false });
    }
    let tol: T = lit(MND_BISECTION_TOL);
    let (mut lo, mut hi) = (T::zero(), T::one());
    while hi - lo > tol {
        let mid = (lo + hi) * lit(0.5);
        if cp_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let p = hi;
    // the eigenvalue tolerance lets a sliver of identity through for
    // purely coherent channels, so the cut-off sits above the bisection tol
    let identity_absent = (T::one() - p) <= lit(1e-9);
    if identity_absent {
        return Ok(MndResult { p: T::one(), effective: Effective::Ptm(channel.clone()), identity_absent });
    }
    let lambda = channel.sub(&id.scale(T::one() - p))?.scale(T::one() / p);
    Ok(MndResult { p, effective: Effective::Ptm(lambda), identity_absent })
}

/// Dispatches to the Pauli fast path when possible.
pub fn mnd<T: Scalar>(channel: &super::ptm::Channel<T>) -> Result<MndResult<T>> {
    match channel {
        super::ptm::Channel::Pauli(ch) => Ok(mnd_pauli(ch)),
        super::ptm::Channel::Kraus(k) => mnd_ptm(&Ptm::from_kraus(k)?),
    }
}

/// Layer effectiveness from per-gate factors, `p = 1 - Π_d (1 - p^d)`.
///
/// Valid when the gate noises are independent; the per-gate factors survive
/// relocation through the layer because conjugation by a unitary keeps the
/// identity weight.
pub fn effectiveness_of_layer<T: Scalar>(gate_factors: &[T]) -> Result<T> {
    let mut survival = T::one();
    for &pd in gate_factors {
        if !(pd >= T::zero() && pd <= T::one()) {
            return Err(CoreError::ProbabilityOutOfRange(pd.to_f64()));
        }
        survival *= T::one() - pd;
    }
    Ok(T::one() - survival)
}
