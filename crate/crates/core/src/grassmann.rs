//! Spin-s k-planes: points of Gr(k, N) stored as orthonormal frames,
//! principal-angle comparison, rotation, and t-anticoherence checks.

use num_complex::Complex64;

use crate::spin::{self, Rotation, SpinQuantum};
use crate::{CMat, Error, Ket, Result};

/// A k-dimensional subspace of the spin-s Hilbert space, stored as an
/// orthonormal N x k frame. Two planes are equal iff their principal
/// angles vanish, regardless of the frame chosen.
#[derive(Debug, Clone)]
pub struct KPlane {
    pub s: SpinQuantum,
    frame: CMat,
}

/// Default tolerance on the largest principal angle for plane equality.
pub const PLANE_EQ_TOL: f64 = 1e-8;
/// Default tolerance on anticoherence residuals.
pub const ANTICOHERENCE_TOL: f64 = 1e-9;

impl KPlane {
    /// Wrap an already orthonormal frame.
    pub fn from_frame(s: SpinQuantum, frame: CMat) -> Result<Self> {
        let n = s.dimension();
        if frame.nrows() != n || frame.ncols() == 0 || frame.ncols() > n {
            return Err(Error::Domain(format!(
                "frame must be N x k with N = {n}, 1 <= k <= N; got {} x {}",
                frame.nrows(),
                frame.ncols()
            )));
        }
        let gram = frame.adjoint() * &frame;
        let dev = (&gram - CMat::identity(frame.ncols(), frame.ncols()))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        if dev > 1e-10 {
            return Err(Error::DegenerateInput(format!(
                "frame columns are not orthonormal (deviation {dev:.3e})"
            )));
        }
        Ok(Self { s, frame })
    }

    pub fn frame(&self) -> &CMat {
        &self.frame
    }

    pub fn k(&self) -> usize {
        self.frame.ncols()
    }

    pub fn dimension(&self) -> usize {
        self.frame.nrows()
    }

    /// New plane with the frame right-multiplied by a k x k unitary
    /// (same plane, different basis).
    pub fn with_basis_change(&self, b: &CMat) -> Result<Self> {
        Self::from_frame(self.s, &self.frame * b)
    }
}

/// Build a plane from a spanning list of kets, orthonormalizing in order
/// (Gram-Schmidt), so already-orthonormal inputs are reproduced exactly.
pub fn plane_from_kets(s: SpinQuantum, kets: &[Ket]) -> Result<KPlane> {
    let n = s.dimension();
    if kets.is_empty() || kets.len() > n {
        return Err(Error::Domain(format!("need between 1 and {n} kets, got {}", kets.len())));
    }
    let mut input = CMat::zeros(n, kets.len());
    for (j, ket) in kets.iter().enumerate() {
        if ket.len() != n {
            return Err(Error::Domain(format!(
                "ket {j} has length {}, expected {n}",
                ket.len()
            )));
        }
        input.set_column(j, ket);
    }
    let min_sv = input
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_sv < 1e-10 {
        return Err(Error::DegenerateInput(format!(
            "kets are (numerically) linearly dependent, smallest singular value {min_sv:.3e}"
        )));
    }
    // modified Gram-Schmidt, order preserving
    let mut frame = input;
    for j in 0..frame.ncols() {
        for i in 0..j {
            let prev = frame.column(i).clone_owned();
            let proj = prev.dotc(&frame.column(j));
            let col = frame.column(j) - prev * proj;
            frame.set_column(j, &col);
        }
        let norm = frame.column(j).norm();
        let col = frame.column(j) / Complex64::new(norm, 0.0);
        frame.set_column(j, &col);
    }
    KPlane::from_frame(s, frame)
}

/// Largest principal angle between two planes, in radians, in [0, pi/2].
///
/// cos of the angle is the smallest singular value of a^dagger b and its
/// sin the largest singular value of (1 - a a^dagger) b; combining them
/// through atan2 stays accurate near both 0 and pi/2.
pub fn plane_distance(a: &KPlane, b: &KPlane) -> Result<f64> {
    if a.s != b.s || a.k() != b.k() {
        return Err(Error::Domain("plane_distance: mismatched s or k".into()));
    }
    let overlap = a.frame.adjoint() * &b.frame;
    let cos = overlap
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
        .clamp(0.0, 1.0);
    let residual = &b.frame - &a.frame * (a.frame.adjoint() * &b.frame);
    let sin = residual
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .clamp(0.0, 1.0);
    Ok(sin.atan2(cos))
}

/// The plane spanned by D^(s)(R) applied to every frame column.
pub fn rotate_plane(p: &KPlane, r: &Rotation) -> KPlane {
    let d = spin::wigner_d(p.s, r);
    KPlane { s: p.s, frame: d * &p.frame }
}

/// Apply an explicit N x N unitary (e.g. a lifted rotation sample).
pub fn transform_plane(p: &KPlane, u: &CMat) -> KPlane {
    KPlane { s: p.s, frame: u * &p.frame }
}

/// Per-l anticoherence residuals and the resulting order.
#[derive(Debug, Clone)]
pub struct AnticoherenceReport {
    /// Largest t with all residuals for 1 <= l <= t below tolerance;
    /// 0 means not even 1-anticoherent.
    pub order: u32,
    /// residuals[l - 1] = max over m, i, j of |<psi_i| T_{lm} |psi_j>|.
    pub residuals: Vec<f64>,
    pub tol: f64,
}

/// Check t-anticoherence: all T_{lm} matrix elements between basis vectors
/// of the plane vanish for 1 <= l <= t. Basis independent.
pub fn anticoherence(p: &KPlane, t_max: u32, tol: f64) -> Result<AnticoherenceReport> {
    if t_max > p.s.twice() {
        return Err(Error::Domain(format!(
            "anticoherence: t_max = {t_max} exceeds 2s = {}",
            p.s.twice()
        )));
    }
    let mut residuals = Vec::with_capacity(t_max as usize);
    for ell in 1..=t_max {
        let mut worst: f64 = 0.0;
        for m in -(ell as i32)..=(ell as i32) {
            let t = spin::polarization_tensor(p.s, ell, m)?;
            let block = p.frame.adjoint() * &t.matrix * &p.frame;
            worst = worst.max(block.iter().map(|c| c.norm()).fold(0.0, f64::max));
        }
        residuals.push(worst);
    }
    let order = residuals.iter().take_while(|&&r| r < tol).count() as u32;
    Ok(AnticoherenceReport { order, residuals, tol })
}

/// True iff R maps the plane to itself within `tol` on the largest
/// principal angle. Also returns the residual angle.
pub fn is_symmetry_rotation(p: &KPlane, r: &Rotation, tol: f64) -> (bool, f64) {
    let rotated = rotate_plane(p, r);
    let angle = plane_distance(p, &rotated).expect("same s and k by construction");
    (angle < tol, angle)
}
