//! Hilbert lattices, Gleason states and Berezin–Toeplitz quantization of P¹.
//!
//! The crate is organised bottom-up:
//!
//! * [`subspace`]: closed subspaces of finite-dimensional complex inner-product
//!   spaces and their lattice operations (meet, join, orthocomplement, order).
//! * [`lattice`]: checks of the distributive and orthomodular laws, diamond
//!   witnesses and the orthoalgebra structure of orthogonal families.
//! * [`gleason`]: density operators, trace-formula probabilities, spectral
//!   resolutions and additivity checks.
//! * [`quadrature`] and [`sphere`]: numerical integration on P¹ ≅ S² and the
//!   symbols (functions on the sphere) fed to the quantization maps.
//! * [`p1`]: holomorphic section spaces of O(k) over P¹, group actions,
//!   equivariant isotypes, coherent vectors and Berezin symbols.
//! * [`toeplitz`]: Toeplitz operators, latitude-band POVMs, Riemann-sum
//!   reconstruction and the Tuynman-corrected operator.
//! * [`semiclassics`]: Szegő kernel diagonals, dimension/trace sequences and
//!   power-law fits.

pub mod error;
pub mod gleason;
pub mod lattice;
pub mod linalg;
pub mod p1;
pub mod quadrature;
pub mod semiclassics;
pub mod sphere;
pub mod subspace;
pub mod toeplitz;

pub use error::{Error, Result};
pub use gleason::{DensityOperator, Probability, SpectralResolution};
pub use lattice::{DiamondWitness, LawKind, LawReport, OrthoalgebraReport};
pub use p1::{
    EquivariantComponent, GroupAction, QuantizedGeometry, SectionSpace, TruncatedHardySpace,
};
pub use quadrature::QuadratureSpec;
pub use sphere::{SpherePoint, Symbol};
pub use subspace::{HilbertSpace, Operator, Subspace};
pub use toeplitz::{RegionPartition, ToeplitzOperator};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
