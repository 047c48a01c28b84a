//! su(2) representation data: spin operators, rotation matrices,
//! Clebsch-Gordan coefficients, polarization tensors, and continuous
//! SU(2) lifts of SO(3) rotation curves.
//!
//! Basis convention: the S_z eigenbasis ordered m = s, s-1, ..., -s, so
//! row/column 0 corresponds to m = s. Half-integer quantum numbers are
//! stored doubled so they stay exact.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::{DVector, Vector3};
use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};
use num_complex::Complex64;

use crate::{CMat, Error, Result};

/// Spin quantum number s, stored as 2s so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpinQuantum {
    twice_s: u32,
}

impl SpinQuantum {
    pub fn from_twice(twice_s: u32) -> Self {
        Self { twice_s }
    }

    /// Integer spin s (s = n).
    pub fn from_int(s: u32) -> Self {
        Self { twice_s: 2 * s }
    }

    pub fn twice(&self) -> u32 {
        self.twice_s
    }

    pub fn value(&self) -> f64 {
        self.twice_s as f64 / 2.0
    }

    /// Hilbert space dimension N = 2s + 1.
    pub fn dimension(&self) -> usize {
        self.twice_s as usize + 1
    }

    /// Eigenvalues of S_z in basis order: s, s-1, ..., -s.
    pub fn m_values(&self) -> impl Iterator<Item = f64> + '_ {
        let s = self.value();
        (0..self.dimension()).map(move |i| s - i as f64)
    }
}

/// Half-integer quantum number (j or m), stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfInt(pub i32);

impl HalfInt {
    pub fn from_twice(twice: i32) -> Self {
        Self(twice)
    }

    pub fn from_int(n: i32) -> Self {
        Self(2 * n)
    }

    pub fn value(&self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl From<SpinQuantum> for HalfInt {
    fn from(s: SpinQuantum) -> Self {
        Self(s.twice() as i32)
    }
}

/// The three su(2) generators in the spin-s representation (hbar = 1).
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub s: SpinQuantum,
    pub sx: CMat,
    pub sy: CMat,
    pub sz: CMat,
}

impl SpinOperators {
    /// m . S for a real 3-vector m.
    pub fn dot(&self, m: &Vector3<f64>) -> CMat {
        self.sx.scale(m.x) + self.sy.scale(m.y) + self.sz.scale(m.z)
    }
}

/// Standard matrix elements: S_z diagonal with entries s..-s, ladder
/// elements (S_±)_{m±1,m} = sqrt(s(s+1) - m(m±1)).
pub fn spin_operators(s: SpinQuantum) -> SpinOperators {
    let n = s.dimension();
    let sval = s.value();
    let ms: Vec<f64> = s.m_values().collect();
    let mut sz = CMat::zeros(n, n);
    let mut sp = CMat::zeros(n, n);
    for (i, &m) in ms.iter().enumerate() {
        sz[(i, i)] = Complex64::new(m, 0.0);
        if i > 0 {
            // S_+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>; column i holds m = ms[i]
            sp[(i - 1, i)] = Complex64::new((sval * (sval + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
        }
    }
    let sm = sp.adjoint();
    let sx = (&sp + &sm).scale(0.5);
    let sy = (&sp - &sm) * Complex64::new(0.0, -0.5);
    SpinOperators { s, sx, sy, sz }
}

fn factorial(n: i32) -> BigInt {
    assert!(n >= 0, "factorial of negative argument");
    (1..=n as u64).map(BigInt::from).product()
}

/// Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> in the Condon-Shortley
/// phase convention, evaluated with exact rational arithmetic internally.
pub fn clebsch_gordan(
    j1: HalfInt,
    j2: HalfInt,
    j: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m: HalfInt,
) -> Result<f64> {
    let (tj1, tj2, tj) = (j1.0, j2.0, j.0);
    let (tm1, tm2, tm) = (m1.0, m2.0, m.0);
    let bad = |what: &str| Error::Domain(format!("clebsch_gordan: {what}"));
    if tj1 < 0 || tj2 < 0 || tj < 0 {
        return Err(bad("negative j"));
    }
    if tm1.abs() > tj1 || tm2.abs() > tj2 || tm.abs() > tj {
        return Err(bad("|m| > j"));
    }
    if (tj1 + tm1) % 2 != 0 || (tj2 + tm2) % 2 != 0 || (tj + tm) % 2 != 0 {
        return Err(bad("m not of the same half-integer class as j"));
    }
    if (tj1 + tj2 + tj) % 2 != 0 || tj < (tj1 - tj2).abs() || tj > tj1 + tj2 {
        return Err(bad("triangle inequality violated"));
    }
    if tm1 + tm2 != tm {
        return Ok(0.0);
    }

    // All of the following are genuine integers (twice-values are even sums).
    let i = |t: i32| -> i32 {
        debug_assert!(t % 2 == 0);
        t / 2
    };
    let f = |t: i32| factorial(i(t));

    // Racah sum over k.
    let k_min = 0.max(-(i(tj - tj2 + tm1))).max(-(i(tj - tj1 - tm2)));
    let k_max = i(tj1 + tj2 - tj).min(i(tj1 - tm1)).min(i(tj2 + tm2));
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial(i(tj1 + tj2 - tj) - k)
            * factorial(i(tj1 - tm1) - k)
            * factorial(i(tj2 + tm2) - k)
            * factorial(i(tj - tj2 + tm1) + k)
            * factorial(i(tj - tj1 - tm2) + k);
        let term = BigRational::new(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    if sum.is_zero() {
        return Ok(0.0);
    }

    let delta = BigRational::new(
        f(tj1 + tj2 - tj) * f(tj1 - tj2 + tj) * f(-tj1 + tj2 + tj),
        f(tj1 + tj2 + tj) * BigInt::from(i(tj1 + tj2 + tj) + 1),
    );
    let pref = BigRational::from(BigInt::from(tj + 1))
        * delta
        * BigRational::from(
            f(tj1 + tm1) * f(tj1 - tm1) * f(tj2 + tm2) * f(tj2 - tm2) * f(tj + tm) * f(tj - tm),
        );
    // CG = sign(sum) * sqrt(pref * sum^2), with pref * sum^2 exact.
    let exact = pref * &sum * &sum;
    let val = exact
        .to_f64()
        .unwrap_or_else(|| exact.numer().to_f64().unwrap() / exact.denom().to_f64().unwrap());
    Ok(val.sqrt() * if sum.is_positive() { 1.0 } else { -1.0 })
}

/// Spin-s polarization tensor T_{l m}: an N x N matrix transforming as the
/// spin-l irrep under conjugation by rotations, trace-orthonormalized.
#[derive(Debug, Clone)]
pub struct PolarizationTensor {
    pub s: SpinQuantum,
    pub ell: u32,
    pub m: i32,
    pub matrix: CMat,
}

/// Matrix elements <s m'| T_{l m} |s m''> =
/// sqrt((2l+1)/(2s+1)) <s m''; l m | s m'>.
pub fn polarization_tensor(s: SpinQuantum, ell: u32, m: i32) -> Result<PolarizationTensor> {
    if ell > s.twice() {
        return Err(Error::Domain(format!(
            "polarization_tensor: l = {ell} exceeds 2s = {}",
            s.twice()
        )));
    }
    if m.unsigned_abs() > ell {
        return Err(Error::Domain(format!("polarization_tensor: |m| > l = {ell}")));
    }
    let n = s.dimension();
    let ts = s.twice() as i32;
    let scale = ((2.0 * ell as f64 + 1.0) / n as f64).sqrt();
    let mut mat = CMat::zeros(n, n);
    for row in 0..n {
        let tmp = ts - 2 * row as i32; // 2m' for the row
        for col in 0..n {
            let tmpp = ts - 2 * col as i32; // 2m'' for the column
            if tmpp + 2 * m != tmp {
                continue;
            }
            let cg = clebsch_gordan(
                HalfInt(ts),
                HalfInt(2 * ell as i32),
                HalfInt(ts),
                HalfInt(tmpp),
                HalfInt(2 * m),
                HalfInt(tmp),
            )?;
            mat[(row, col)] = Complex64::new(scale * cg, 0.0);
        }
    }
    Ok(PolarizationTensor { s, ell, m, matrix: mat })
}

// ---------------------------------------------------------------------------
// Rotations and curves
// ---------------------------------------------------------------------------

/// Unit quaternion (w, x, y, z); the SU(2) double cover of SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Quat {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quat {
    pub const IDENTITY: Quat = Quat { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn from_axis_angle(m: &Vector3<f64>) -> Self {
        let theta = m.norm();
        if theta < 1e-300 {
            return Self::IDENTITY;
        }
        let u = m / theta;
        let (sin, cos) = (theta / 2.0).sin_cos();
        Quat { w: cos, x: sin * u.x, y: sin * u.y, z: sin * u.z }
    }

    pub fn mul(&self, o: &Quat) -> Quat {
        Quat {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn dot(&self, o: &Quat) -> f64 {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn neg(&self) -> Quat {
        Quat { w: -self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    /// Canonical axis-angle with angle in [0, pi] (sign chosen so w >= 0).
    pub fn to_axis_angle(&self) -> Vector3<f64> {
        let q = if self.w < 0.0 { self.neg() } else { *self };
        let vn = (q.x * q.x + q.y * q.y + q.z * q.z).sqrt();
        if vn < 1e-15 {
            return Vector3::zeros();
        }
        let theta = 2.0 * vn.atan2(q.w);
        Vector3::new(q.x, q.y, q.z) * (theta / vn)
    }
}

/// An SO(3) rotation as a canonical axis-angle vector m: direction is the
/// rotation axis, |m| in [0, pi] the rotation angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation {
    axis_angle: Vector3<f64>,
}

impl Rotation {
    pub fn identity() -> Self {
        Self { axis_angle: Vector3::zeros() }
    }

    /// Canonicalizes: angle is reduced mod 2pi into [0, pi], flipping the
    /// axis when needed.
    pub fn from_axis_angle(axis: &Vector3<f64>, angle: f64) -> Self {
        let n = axis.norm();
        if n < 1e-300 || angle == 0.0 {
            return Self::identity();
        }
        Quat::from_axis_angle(&(axis * (angle / n))).into()
    }

    pub fn from_vector(m: &Vector3<f64>) -> Self {
        let theta = m.norm();
        Self::from_axis_angle(m, theta)
    }

    /// From an orthogonal 3x3 matrix with det +1, via the most stable of the
    /// four quaternion extraction branches.
    pub fn from_matrix(m: &nalgebra::Matrix3<f64>) -> Self {
        let t = m.trace();
        let q = if t > m[(0, 0)] && t > m[(1, 1)] && t > m[(2, 2)] {
            let r = (1.0 + t).sqrt();
            let s = 0.5 / r;
            Quat {
                w: 0.5 * r,
                x: (m[(2, 1)] - m[(1, 2)]) * s,
                y: (m[(0, 2)] - m[(2, 0)]) * s,
                z: (m[(1, 0)] - m[(0, 1)]) * s,
            }
        } else if m[(0, 0)] >= m[(1, 1)] && m[(0, 0)] >= m[(2, 2)] {
            let r = (1.0 + m[(0, 0)] - m[(1, 1)] - m[(2, 2)]).sqrt();
            let s = 0.5 / r;
            Quat {
                w: (m[(2, 1)] - m[(1, 2)]) * s,
                x: 0.5 * r,
                y: (m[(0, 1)] + m[(1, 0)]) * s,
                z: (m[(0, 2)] + m[(2, 0)]) * s,
            }
        } else if m[(1, 1)] >= m[(2, 2)] {
            let r = (1.0 - m[(0, 0)] + m[(1, 1)] - m[(2, 2)]).sqrt();
            let s = 0.5 / r;
            Quat {
                w: (m[(0, 2)] - m[(2, 0)]) * s,
                x: (m[(0, 1)] + m[(1, 0)]) * s,
                y: 0.5 * r,
                z: (m[(1, 2)] + m[(2, 1)]) * s,
            }
        } else {
            let r = (1.0 - m[(0, 0)] - m[(1, 1)] + m[(2, 2)]).sqrt();
            let s = 0.5 / r;
            Quat {
                w: (m[(1, 0)] - m[(0, 1)]) * s,
                x: (m[(0, 2)] + m[(2, 0)]) * s,
                y: (m[(1, 2)] + m[(2, 1)]) * s,
                z: 0.5 * r,
            }
        };
        q.into()
    }

    pub fn axis_angle(&self) -> &Vector3<f64> {
        &self.axis_angle
    }

    pub fn angle(&self) -> f64 {
        self.axis_angle.norm()
    }

    /// Composition: self applied after other (self * other).
    pub fn compose(&self, other: &Rotation) -> Rotation {
        Quat::from(*self).mul(&Quat::from(*other)).into()
    }

    pub fn inverse(&self) -> Rotation {
        Rotation { axis_angle: -self.axis_angle }
    }

    /// Action on a 3-vector (Rodrigues formula).
    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        let theta = self.angle();
        if theta < 1e-300 {
            return *v;
        }
        let k = self.axis_angle / theta;
        v * theta.cos() + k.cross(v) * theta.sin() + k * (k.dot(v) * (1.0 - theta.cos()))
    }
}

impl From<Quat> for Rotation {
    fn from(q: Quat) -> Self {
        Rotation { axis_angle: q.to_axis_angle() }
    }
}

impl From<Rotation> for Quat {
    fn from(r: Rotation) -> Self {
        Quat::from_axis_angle(&r.axis_angle)
    }
}

// Cached eigendecomposition of S_y per spin, for the rotation matrices.
struct YBasis {
    v: CMat,
    vt: CMat,
    eigs: Vec<f64>,
}

fn y_basis(s: SpinQuantum) -> Arc<YBasis> {
    static CACHE: RwLock<Option<HashMap<u32, Arc<YBasis>>>> = RwLock::new(None);
    if let Some(map) = CACHE.read().unwrap().as_ref() {
        if let Some(b) = map.get(&s.twice()) {
            return b.clone();
        }
    }
    let ops = spin_operators(s);
    let eig = nalgebra::SymmetricEigen::new(ops.sy);
    let vt = eig.eigenvectors.adjoint();
    let b = Arc::new(YBasis { v: eig.eigenvectors, vt, eigs: eig.eigenvalues.iter().copied().collect() });
    let mut guard = CACHE.write().unwrap();
    guard.get_or_insert_with(HashMap::new).insert(s.twice(), b.clone());
    b
}

fn z_phases(s: SpinQuantum, alpha: f64) -> DVector<Complex64> {
    DVector::from_iterator(s.dimension(), s.m_values().map(|m| Complex64::from_polar(1.0, -alpha * m)))
}

/// D^(s) for an SU(2) element given as a quaternion. Respects the sign of
/// the quaternion: D(-q) = (-1)^{2s} D(q).
pub(crate) fn wigner_d_quat(s: SpinQuantum, q: &Quat) -> CMat {
    // ZYZ Euler angles: q = qz(alpha) qy(beta) qz(gamma).
    let beta = 2.0 * (q.x * q.x + q.y * q.y).sqrt().atan2((q.w * q.w + q.z * q.z).sqrt());
    let half_sum = q.z.atan2(q.w); // (alpha + gamma)/2, carries the lift sign
    let half_diff = if q.x == 0.0 && q.y == 0.0 { 0.0 } else { (-q.x).atan2(q.y) };
    let alpha = half_sum + half_diff;
    let gamma = half_sum - half_diff;

    let yb = y_basis(s);
    let n = s.dimension();
    let exp_y = DVector::from_iterator(
        n,
        yb.eigs.iter().map(|&lam| Complex64::from_polar(1.0, -beta * lam)),
    );
    // exp(-i beta S_y) = V diag(exp_y) V^dagger
    let mut mid = yb.v.clone();
    for c in 0..n {
        let f = exp_y[c];
        for r in 0..n {
            mid[(r, c)] *= f;
        }
    }
    let mut d = mid * &yb.vt;
    let za = z_phases(s, alpha);
    let zg = z_phases(s, gamma);
    for r in 0..n {
        for c in 0..n {
            d[(r, c)] = za[r] * d[(r, c)] * zg[c];
        }
    }
    d
}

/// Rotation matrix D^(s)(R) = exp(-i m . S^(s)) for the canonical lift
/// (rotation angle in [0, pi]).
pub fn wigner_d(s: SpinQuantum, r: &Rotation) -> CMat {
    wigner_d_quat(s, &Quat::from(*r))
}

/// exp(-i H) for Hermitian H, by unitary diagonalization. Test oracle for
/// `wigner_d` and general-purpose small exponential.
pub fn expm_neg_i_hermitian(h: &CMat) -> CMat {
    let eig = nalgebra::SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut m = eig.eigenvectors.clone();
    for c in 0..n {
        let f = Complex64::from_polar(1.0, -eig.eigenvalues[c]);
        for r in 0..n {
            m[(r, c)] *= f;
        }
    }
    m * eig.eigenvectors.adjoint()
}

/// A continuous path t -> R(t) in SO(3), stored as uniform axis-angle
/// samples together with the generating map so it can be resampled exactly.
#[derive(Clone)]
pub struct RotationCurve {
    sampler: Arc<dyn Fn(f64) -> Rotation + Send + Sync>,
    times: Vec<f64>,
    rotations: Vec<Rotation>,
}

impl std::fmt::Debug for RotationCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RotationCurve")
            .field("steps", &self.times.len())
            .field("t_end", &self.times.last())
            .finish()
    }
}

impl RotationCurve {
    /// Uniform sampling of `f` on [0, t_end] with `steps` samples.
    pub fn from_fn<F>(f: F, t_end: f64, steps: usize) -> Self
    where
        F: Fn(f64) -> Rotation + Send + Sync + 'static,
    {
        assert!(steps >= 2, "a curve needs at least two samples");
        let times: Vec<f64> = (0..steps)
            .map(|i| t_end * i as f64 / (steps - 1) as f64)
            .collect();
        let rotations = times.iter().map(|&t| f(t)).collect();
        Self { sampler: Arc::new(f), times, rotations }
    }

    pub fn constant(r: Rotation, t_end: f64, steps: usize) -> Self {
        Self::from_fn(move |_| r, t_end, steps)
    }

    /// Same underlying map, resampled on `steps` uniform points.
    pub fn with_steps(&self, steps: usize) -> Self {
        assert!(steps >= 2);
        let t_end = *self.times.last().unwrap();
        let times: Vec<f64> = (0..steps)
            .map(|i| t_end * i as f64 / (steps - 1) as f64)
            .collect();
        let rotations = times.iter().map(|&t| (self.sampler)(t)).collect();
        Self { sampler: self.sampler.clone(), times, rotations }
    }

    pub fn at(&self, t: f64) -> Rotation {
        (self.sampler)(t)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn steps(&self) -> usize {
        self.times.len()
    }

    pub fn endpoint(&self) -> Rotation {
        *self.rotations.last().unwrap()
    }

}

/// Continuous SU(2) lift of the curve, as spin-s rotation matrices with the
/// branch fixed by continuity and the initial condition D(0) = I.
///
/// Fails with `RefinementRequired` when consecutive samples are separated
/// by a rotation angle of pi/2 or more, which makes the branch ambiguous.
pub fn lift_along_curve(s: SpinQuantum, curve: &RotationCurve) -> Result<Vec<CMat>> {
    let rots = curve.rotations();
    if rots.is_empty() {
        return Err(Error::Domain("empty curve".into()));
    }
    if rots[0].angle() > 1e-9 {
        return Err(Error::Domain("curve must start at the identity".into()));
    }
    let mut out = Vec::with_capacity(rots.len());
    let mut prev = Quat::IDENTITY;
    // cos(pi/4): relative rotation angle between samples must stay below pi/2
    let cos_quarter = std::f64::consts::FRAC_1_SQRT_2;
    for r in rots {
        let canonical = Quat::from(*r);
        let d = canonical.dot(&prev);
        if d.abs() <= cos_quarter + 1e-12 {
            return Err(Error::RefinementRequired(format!(
                "rotation between consecutive samples is >= pi/2 (|<q_i, q_i+1>| = {:.3})",
                d.abs()
            )));
        }
        // choose the branch nearest the previous lift
        let q = if d < 0.0 { canonical.neg() } else { canonical };
        out.push(wigner_d_quat(s, &q));
        prev = q;
    }
    Ok(out)
}
