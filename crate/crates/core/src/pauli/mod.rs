//! Pauli-string algebra and channel representations: Pauli mixtures,
//! transfer matrices, Choi matrices, CPTP checks and the maximum noise
//! decomposition.

mod channel;
mod choi;
mod mnd;
mod ptm;
mod string;

pub use channel::PauliChannel;
pub use choi::{choi_from_ptm, ChoiMatrix};
pub use mnd::{
    effectiveness_of_layer, is_cptp, mnd, mnd_pauli, mnd_ptm, CptpReport, Effective, MndResult,
    MND_BISECTION_TOL,
};
pub use ptm::{
    commutation_sign, ptm_from_channel, Channel, KrausSet, Ptm, DENSE_PTM_CAP, PAULI_PTM_CAP,
};
pub use string::{commutes, embed_index, phase_conj, phase_of, product_index, Pauli, PauliString};
pub(crate) use channel::convolve;
pub(crate) use string::PauliAction;
