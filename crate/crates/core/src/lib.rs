//! Wilczek-Zee holonomies of rotated spin subspaces.
//!
//! The library builds su(2) representation data (spin operators, rotation
//! matrices, polarization tensors), represents k-dimensional subspaces of a
//! spin-s Hilbert space as points of the Grassmannian Gr(k, 2s+1), drives
//! them along SO(3) rotation curves, and computes the resulting holonomy
//! U = P F⁻¹ from the overlap matrix Q and the path-ordered exponential F
//! of the connection. For 1-anticoherent planes closed by a symmetry
//! rotation the connection vanishes and the holonomy is a purely
//! topological logical gate, immune to arbitrary endpoint-fixing
//! perturbations of the rotation curve.
//!
//! Subspaces are visualized through Majorana constellations: states map to
//! root multisets of a characteristic polynomial, planes map to a family of
//! weighted constellations (one per spin multiplet of the Plücker space)
//! plus a rotation-invariant spectator constellation.

pub mod gates;
pub mod grassmann;
pub mod holonomy;
pub mod report;
pub mod spin;
pub mod stellar;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

/// Dense complex matrix used throughout.
pub type CMat = DMatrix<Complex64>;
/// Dense complex vector (a ket in the S_z eigenbasis, row 0 <-> m = s).
pub type Ket = DVector<Complex64>;

/// Errors shared by all modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Quantum numbers or arguments outside their domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// Input kets (or stars) do not determine the requested object.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    /// Sampling too coarse to disambiguate a branch or a projection step.
    #[error("refinement required: {0}")]
    RefinementRequired(String),
    /// Endpoint planes share an orthogonal direction; holonomy undefined.
    #[error("degenerate overlap: smallest singular value {0:.3e}")]
    DegenerateOverlap(f64),
    /// A multiplet tie-break failed numerically.
    #[error("degeneracy error: {0}")]
    Degeneracy(String),
}

pub type Result<T> = std::result::Result<T, Error>;


pub use gates::{
    catalog, compare_gate, extract_gate, invariance_sweep, perturb_curve, CatalogEntry, GateMode,
};
pub use grassmann::{anticoherence, is_symmetry_rotation, plane_distance, KPlane};
pub use holonomy::{wz_holonomy, FrameCurve, Holonomy};
pub use spin::{Rotation, RotationCurve, SpinQuantum};
pub use stellar::{majorana_constellation, multiconstellation, Constellation, MultiConstellation};
