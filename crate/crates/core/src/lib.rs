//! statecone: numerical toolkit for physical theories built on convex
//! state cones.
//!
//! The toolkit realizes, at finite dimension and with explicit tolerances,
//! the geometric picture in which a theory is a convex set of states
//! together with a group of automorphisms: unitary evolution of density
//! matrices, decoherence onto robust stationary states with Born
//! probabilities, Euclidean Jordan algebras and their symmetric cones,
//! coadjoint orbits with the moment-map quotient of redundant classical
//! states, L-functionals over a truncated Weyl algebra, and dispersion of
//! elementary excitations.
//!
//! Every module is generic over the real scalar through [`scalar::Real`];
//! `f64` aliases for the main types live at the crate root.

pub mod decoherence;
pub mod error;
pub mod excitations;
pub mod fourier;
pub mod jordan;
pub mod lfunc;
pub mod linalg;
pub mod momentmap;
pub mod sampling;
pub mod scalar;
pub mod serialize;
pub mod statespace;
pub mod tol;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` working-precision aliases.
pub type DensityState64 = statespace::DensityState<f64>;
pub type Generator64 = statespace::Generator<f64>;
pub type Observable64 = statespace::Observable<f64>;
pub type SpectralData64 = statespace::SpectralData<f64>;
pub type AdiabaticFamily64 = decoherence::AdiabaticFamily<f64>;
pub type ProbabilityTable64 = decoherence::ProbabilityTable<f64>;
pub type EnsembleReport64 = decoherence::EnsembleReport<f64>;
pub type JordanAlgebra64 = jordan::JordanAlgebra<f64>;
pub type JordanElement64 = jordan::JordanElement<f64>;
pub type StructuralMap64 = jordan::StructuralMap<f64>;
pub type CoadjointOrbit64 = momentmap::CoadjointOrbit<f64>;
pub type ClassicalEnsemble64 = momentmap::ClassicalEnsemble<f64>;
pub type TruncatedFock64 = lfunc::TruncatedFock<f64>;
pub type ElementarySpace64 = excitations::ElementarySpace<f64>;
pub type Wavepacket64 = excitations::Wavepacket<f64>;
pub type CMatrix64 = linalg::CMatrix<f64>;
pub type CVector64 = linalg::CVector<f64>;
pub type RMatrix64 = linalg::RMatrix<f64>;
pub type RVector64 = linalg::RVector<f64>;
