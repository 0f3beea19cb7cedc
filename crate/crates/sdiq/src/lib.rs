//! Semi-device-independent quantumness toolkit for low-dimensional bipartite
//! systems (local dimensions up to 6, with the sharpest tools specialised to
//! qubit-qubit and qubit-qutrit).
//!
//! The crate is organised around three layers:
//!
//! * **States and channels** — dense complex matrices with validated quantum
//!   invariants ([`qmath`], [`states`], [`channels`]): density operators,
//!   partial trace/transpose, entropies, Kraus maps.
//! * **Behaviors** — conditional probability boxes `p(a,b|x,y)` obtained from
//!   states and two-outcome measurement families via the Born rule
//!   ([`boxes`]), together with box-level witnesses: the `Q` determinant,
//!   the covariance Mermin strength `Γ`, CHSH, and the two-setting steering
//!   functional `F₂`.
//! * **Analysis** — bounded-cardinality hidden-variable fits and local
//!   polytope membership ([`models`]), correlation measures and state
//!   classification ([`info`]), canonical two-qubit form and remote state
//!   preparation measures ([`rsp`]), and a deterministic multi-start
//!   search engine ([`optimize`]).
//!
//! Randomised routines take an explicit seed and are bit-reproducible; see
//! [`sample`] for the seeded generators used by the property suites and by
//! [`repro`], which re-evaluates the toolkit's pinned reference claims.
//!
//! ```
//! use sdiq::states;
//! use sdiq::boxes::{self, MeasurementFamily};
//!
//! // Werner state at p = 0.5 probed with σ3/σ1 projective settings.
//! let rho = states::werner(0.5).unwrap();
//! let m = MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
//! let b = boxes::born_box(&rho, &m, &m).unwrap();
//! assert!(boxes::chsh(&b).unwrap().abs() <= 2.0);
//! ```

pub mod boxes;
pub mod channels;
pub mod error;
pub mod info;
pub mod json;
pub mod models;
pub mod optimize;
pub mod qmath;
pub mod repro;
pub mod rsp;
pub mod sample;
pub mod states;
pub mod tol;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
