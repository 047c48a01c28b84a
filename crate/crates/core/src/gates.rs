//! Catalog of reference planes, states, curves and expected holonomies;
//! gate extraction; and the endpoint-fixing perturbation harness used to
//! probe the topological invariance of the gates.

use std::sync::{Arc, OnceLock};

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::grassmann::{plane_from_kets, KPlane};
use crate::holonomy::{frame_curve_from_rotations, wz_holonomy, Holonomy};
use crate::spin::{Rotation, RotationCurve, SpinQuantum};
use crate::{CMat, Ket, Result};

/// Default sample count for gate curves.
pub const DEFAULT_STEPS: usize = 2001;
/// Default sample count for perturbation sweeps: large-amplitude
/// perturbations need a finer grid for the extrapolated holonomy to stay
/// well below the 1e-7 invariance tolerance.
pub const SWEEP_STEPS: usize = 4001;

/// One named reference gate: a plane driven by a constant-axis rotation
/// curve ending on a symmetry rotation, with its expected holonomy.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: String,
    pub plane: KPlane,
    pub axis: Vector3<f64>,
    pub angle: f64,
    pub expected: CMat,
    /// "published" for matrices transcribed from the source material,
    /// "computed" for values frozen from independent computations.
    pub provenance: String,
}

impl CatalogEntry {
    pub fn curve(&self, steps: usize) -> RotationCurve {
        rotation_curve(&self.axis, self.angle, steps)
    }

    /// The endpoint (symmetry) rotation of the reference curve.
    pub fn endpoint(&self) -> Rotation {
        Rotation::from_axis_angle(&self.axis, self.angle)
    }
}

/// The full reference data set.
#[derive(Debug)]
pub struct Catalog {
    /// The 1-anticoherent 2-plane in spin 2 realizing the NOT gate.
    pub plane_not: KPlane,
    /// The same plane in its alternative (rotated) basis.
    pub plane_not_alt: KPlane,
    /// The 1-anticoherent 4-plane in spin 5 realizing the CNOT-like gates.
    pub plane_cnot: KPlane,
    /// The tetrahedral spin-2 state used in the constellation examples.
    pub chi: Ket,
    /// Named gates: "not", "cnot1", "cnot2".
    pub gates: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn gate(&self, name: &str) -> Option<&CatalogEntry> {
        self.gates.iter().find(|g| g.name == name)
    }
}

#[derive(Deserialize)]
struct RawState {
    twice_s: u32,
    ket: Vec<[f64; 2]>,
    #[allow(dead_code)]
    provenance: String,
}

impl RawState {
    fn ket(&self) -> Ket {
        assert_eq!(self.ket.len(), self.twice_s as usize + 1, "catalog state dimension");
        to_ket(&self.ket)
    }
}

#[derive(Deserialize)]
struct RawPlane {
    twice_s: u32,
    kets: Vec<Vec<[f64; 2]>>,
    #[allow(dead_code)]
    provenance: String,
}

#[derive(Deserialize)]
struct RawGate {
    name: String,
    plane: String,
    axis: [f64; 3],
    angle: f64,
    expected: Vec<Vec<[f64; 2]>>,
    provenance: String,
}

#[derive(Deserialize)]
struct RawCatalog {
    chi: RawState,
    planes: std::collections::HashMap<String, RawPlane>,
    gates: Vec<RawGate>,
}

fn to_ket(raw: &[[f64; 2]]) -> Ket {
    Ket::from_iterator(raw.len(), raw.iter().map(|&[re, im]| Complex64::new(re, im)))
}

fn to_mat(raw: &[Vec<[f64; 2]>]) -> CMat {
    let rows = raw.len();
    let cols = raw[0].len();
    CMat::from_fn(rows, cols, |r, c| Complex64::new(raw[r][c][0], raw[r][c][1]))
}

fn build_catalog() -> Catalog {
    let raw: RawCatalog =
        serde_json::from_str(include_str!("../data/catalog.json")).expect("embedded catalog parses");
    let plane = |name: &str| -> KPlane {
        let p = &raw.planes[name];
        let s = SpinQuantum::from_twice(p.twice_s);
        let kets: Vec<Ket> = p.kets.iter().map(|k| to_ket(k)).collect();
        plane_from_kets(s, &kets).expect("catalog kets are independent")
    };
    let plane_not = plane("not");
    let plane_not_alt = plane("not_alt");
    let plane_cnot = plane("cnot");
    let gates = raw
        .gates
        .iter()
        .map(|g| CatalogEntry {
            name: g.name.clone(),
            plane: if g.plane == "not" { plane_not.clone() } else { plane_cnot.clone() },
            axis: Vector3::new(g.axis[0], g.axis[1], g.axis[2]),
            angle: g.angle,
            expected: to_mat(&g.expected),
            provenance: g.provenance.clone(),
        })
        .collect();
    Catalog { plane_not, plane_not_alt, plane_cnot, chi: raw.chi.ket(), gates }
}

static CATALOG: OnceLock<Arc<Catalog>> = OnceLock::new();

/// The reference catalog, loaded once from the embedded data file.
pub fn catalog() -> Arc<Catalog> {
    CATALOG.get_or_init(|| Arc::new(build_catalog())).clone()
}

/// The curve t -> rotation about `axis` by `angle * t`, t in [0, 1].
pub fn rotation_curve(axis: &Vector3<f64>, angle: f64, steps: usize) -> RotationCurve {
    let axis = axis.normalize();
    RotationCurve::from_fn(move |t| Rotation::from_axis_angle(&axis, angle * t), 1.0, steps)
}

/// Left-multiply the base curve by R_{eps(t)} with
/// eps(t) = sum_{n=1..n_modes} a_n sin(n pi t / T) and random coefficient
/// vectors |a_n| <= amplitude. The endpoints are unchanged exactly; the
/// amplitude need not be small.
pub fn perturb_curve(base: &RotationCurve, amplitude: f64, n_modes: usize, seed: u64) -> RotationCurve {
    if amplitude == 0.0 || n_modes == 0 {
        return base.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coeffs: Vec<Vector3<f64>> = (0..n_modes)
        .map(|_| loop {
            let v = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            if v.norm() <= 1.0 {
                break v * amplitude;
            }
        })
        .collect();
    let t_end = *base.times().last().unwrap();
    let steps = base.steps();
    let inner = base.clone();
    RotationCurve::from_fn(
        move |t| {
            if t == 0.0 || t == t_end {
                return inner.at(t);
            }
            let mut eps = Vector3::zeros();
            for (n, a) in coeffs.iter().enumerate() {
                eps += a * ((n + 1) as f64 * std::f64::consts::PI * t / t_end).sin();
            }
            Rotation::from_vector(&eps).compose(&inner.at(t))
        },
        t_end,
        steps,
    )
}

/// Drive the plane along the curve and return the holonomy.
pub fn extract_gate(p: &KPlane, curve: &RotationCurve) -> Result<Holonomy> {
    let fc = frame_curve_from_rotations(p, curve, curve.steps())?;
    wz_holonomy(&fc)
}

/// How unitaries are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    /// Entrywise max-abs distance; the overall phase matters.
    Exact,
    /// Distance minimized over a global phase, phi = arg tr(target^dag u).
    UpToGlobalPhase,
}

/// Compare two unitaries; returns (within tol, distance).
pub fn compare_gate(u: &CMat, target: &CMat, mode: GateMode, tol: f64) -> (bool, f64) {
    assert_eq!(u.shape(), target.shape(), "gate dimensions differ");
    let target = match mode {
        GateMode::Exact => target.clone(),
        GateMode::UpToGlobalPhase => {
            let tr = (target.adjoint() * u).trace();
            let phase = if tr.norm() > 0.0 { tr / tr.norm() } else { Complex64::new(1.0, 0.0) };
            target * phase
        }
    };
    let dist = (u - target).iter().map(|c| c.norm()).fold(0.0, f64::max);
    (dist < tol, dist)
}

/// One row of the invariance sweep.
#[derive(Debug, Clone, Copy)]
pub struct InvarianceRecord {
    pub seed: u64,
    pub amplitude: f64,
    /// Max-abs deviation of the perturbed holonomy from the unperturbed one.
    pub deviation: f64,
}

/// Holonomies of endpoint-fixing perturbations of a catalog curve over a
/// (seed, amplitude) grid, each compared exactly (no phase freedom) against
/// the holonomy of the unperturbed curve, so amplitude 0 gives deviation 0
/// identically. Rows come back sorted by (seed, amplitude).
pub fn invariance_sweep(
    entry: &CatalogEntry,
    seeds: &[u64],
    amplitudes: &[f64],
    n_modes: usize,
    steps: usize,
) -> Result<Vec<InvarianceRecord>> {
    let base = entry.curve(steps);
    let reference = extract_gate(&entry.plane, &base)?.u;
    let grid: Vec<(u64, f64)> = seeds
        .iter()
        .flat_map(|&s| amplitudes.iter().map(move |&a| (s, a)))
        .collect();
    let run = |&(seed, amplitude): &(u64, f64)| -> Result<InvarianceRecord> {
        let curve = perturb_curve(&base, amplitude, n_modes, seed);
        let hol = extract_gate(&entry.plane, &curve)?;
        let (_, deviation) = compare_gate(&hol.u, &reference, GateMode::Exact, f64::INFINITY);
        Ok(InvarianceRecord { seed, amplitude, deviation })
    };
    #[cfg(feature = "parallel")]
    let records: Result<Vec<_>> = {
        use rayon::prelude::*;
        grid.par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let records: Result<Vec<_>> = grid.iter().map(run).collect();
    records
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grassmann::is_symmetry_rotation;
    use std::f64::consts::PI;

    fn maxabs(m: &CMat) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn catalog_entries_are_as_written() {
        let cat = catalog();
        let f = cat.plane_not.frame();
        let r3 = 3.0f64.sqrt();
        assert!((f[(0, 0)].re - 1.0 / r3).abs() < 1e-15);
        assert!((f[(3, 0)].re - 2.0f64.sqrt() / r3).abs() < 1e-15);
        assert!((f[(1, 1)].re + 2.0f64.sqrt() / r3).abs() < 1e-15);
        assert!((f[(4, 1)].re - 1.0 / r3).abs() < 1e-15);
        // third CNOT ket: (sqrt2 |5,3> + sqrt3 i |5,-2>)/sqrt5
        let f = cat.plane_cnot.frame();
        assert!((f[(2, 2)].re - (2.0f64 / 5.0).sqrt()).abs() < 1e-15);
        assert!((f[(7, 2)].im - (3.0f64 / 5.0).sqrt()).abs() < 1e-15);
        // psi_a = cos(pi/3) psi1 + sin(pi/3) psi2
        let alt = cat.plane_not_alt.frame();
        let expect = cat.plane_not.frame().column(0) * Complex64::new((PI / 3.0).cos(), 0.0)
            + cat.plane_not.frame().column(1) * Complex64::new((PI / 3.0).sin(), 0.0);
        assert!((alt.column(0) - expect).norm() < 1e-14);
        assert_eq!(cat.gates.len(), 3);
        for g in &cat.gates {
            assert_eq!(g.provenance, "published");
        }
    }

    #[test]
    fn alt_basis_spans_the_same_plane() {
        let cat = catalog();
        assert!(crate::grassmann::plane_distance(&cat.plane_not, &cat.plane_not_alt).unwrap() < 1e-12);
    }

    #[test]
    fn curves_hit_their_endpoints() {
        let c = rotation_curve(&Vector3::y(), PI, 101);
        let end = c.endpoint();
        assert!((end.axis_angle() - Vector3::new(0.0, PI, 0.0)).norm() < 1e-12);
        let c = rotation_curve(&Vector3::z(), 0.0, 11);
        assert!(c.endpoint().angle() == 0.0);
    }

    #[test]
    fn perturbation_fixes_endpoints() {
        let base = rotation_curve(&Vector3::y(), PI, 101);
        let p = perturb_curve(&base, 1.5, 5, 7);
        assert_eq!(p.rotations()[0], Rotation::identity());
        let end_dev = p.endpoint().compose(&base.endpoint().inverse()).angle();
        assert!(end_dev == 0.0, "endpoint moved by {end_dev}");
        // interior differs
        let mid = p.at(0.5).compose(&base.at(0.5).inverse()).angle();
        assert!(mid > 1e-3);
        // amplitude 0 reproduces the base curve
        let p0 = perturb_curve(&base, 0.0, 5, 7);
        for (a, b) in p0.rotations().iter().zip(base.rotations()) {
            assert!(a.compose(&b.inverse()).angle() < 1e-15);
        }
    }

    #[test]
    fn cnot_gates_match_expected() {
        let cat = catalog();
        for name in ["cnot1", "cnot2"] {
            let g = cat.gate(name).unwrap();
            let (ok, sym_dev) = is_symmetry_rotation(&g.plane, &g.endpoint(), 1e-8);
            assert!(ok, "{name} endpoint not a symmetry ({sym_dev:.2e})");
            let hol = extract_gate(&g.plane, &g.curve(DEFAULT_STEPS)).unwrap();
            let (ok, dev) = compare_gate(&hol.u, &g.expected, GateMode::Exact, 1e-8);
            assert!(ok, "{name} deviates by {dev:.3e}");
        }
        // U2 phases explicitly
        let g = cat.gate("cnot2").unwrap();
        let hol = extract_gate(&g.plane, &g.curve(DEFAULT_STEPS)).unwrap();
        assert!((hol.u[(2, 2)].arg() - 4.0 * PI / 5.0).abs() < 1e-8);
        assert!((hol.u[(3, 3)].arg() + 4.0 * PI / 5.0).abs() < 1e-8);
        // determinants
        let u1 = &cat.gate("cnot1").unwrap().expected;
        assert!((det2(u1).norm() - 1.0).abs() < 1e-10);
        let u2 = &g.expected;
        assert!((det2(u2) - Complex64::new(1.0, 0.0)).norm() < 1e-10);
    }

    fn det2(m: &CMat) -> Complex64 {
        nalgebra::DMatrix::from(m.clone()).determinant()
    }

    #[test]
    fn perturbed_not_keeps_sigma_x() {
        let cat = catalog();
        let g = cat.gate("not").unwrap();
        let base = g.curve(DEFAULT_STEPS);
        for seed in [1u64, 2] {
            let curve = perturb_curve(&base, 1.0, 5, seed);
            let hol = extract_gate(&g.plane, &curve).unwrap();
            let (ok, dev) = compare_gate(&hol.u, &g.expected, GateMode::Exact, 1e-8);
            assert!(ok, "seed {seed}: deviation {dev:.3e}");
        }
    }

    #[test]
    fn invariance_sweep_records_grid() {
        let cat = catalog();
        let g = cat.gate("not").unwrap();
        let recs = invariance_sweep(g, &[0, 1, 2], &[0.0, 0.5], 5, 2001).unwrap();
        assert_eq!(recs.len(), 6);
        assert_eq!((recs[0].seed, recs[0].amplitude), (0, 0.0));
        assert_eq!(recs[0].deviation, 0.0); // amplitude 0: the very same curve
        assert!(recs.iter().all(|r| r.deviation < 1e-7));
    }

    #[test]
    fn homotopy_insensitive_for_integer_spin() {
        // appending a full 2pi y-loop lifts to +1 for spin 2: same holonomy
        let cat = catalog();
        let g = cat.gate("not").unwrap();
        let plain = extract_gate(&g.plane, &g.curve(2001)).unwrap();
        let looped = extract_gate(&g.plane, &rotation_curve(&Vector3::y(), 3.0 * PI, 6001)).unwrap();
        assert!(maxabs(&(&plain.u - &looped.u)) < 1e-8);
    }

    #[test]
    fn basis_covariance_of_the_not_gate() {
        let cat = catalog();
        let curve = cat.gate("not").unwrap().curve(2001);
        let hol = extract_gate(&cat.plane_not_alt, &curve).unwrap();
        // B: columns are psi_a, psi_b in psi1, psi2 coordinates
        let b = cat.plane_not.frame().adjoint() * cat.plane_not_alt.frame();
        let expect = b.adjoint() * &cat.gate("not").unwrap().expected * &b;
        assert!(maxabs(&(&hol.u - expect)) < 1e-8);
    }

    #[test]
    fn compare_gate_modes() {
        let cat = catalog();
        let sx = cat.gate("not").unwrap().expected.clone();
        let (ok, d) = compare_gate(&sx, &sx, GateMode::Exact, 1e-12);
        assert!(ok && d == 0.0);
        let rotated = &sx * Complex64::from_polar(1.0, 0.7);
        assert!(!compare_gate(&rotated, &sx, GateMode::Exact, 1e-6).0);
        assert!(compare_gate(&rotated, &sx, GateMode::UpToGlobalPhase, 1e-10).0);
        let mut sz = CMat::zeros(2, 2);
        sz[(0, 0)] = Complex64::new(1.0, 0.0);
        sz[(1, 1)] = Complex64::new(-1.0, 0.0);
        assert!(!compare_gate(&sx, &sz, GateMode::UpToGlobalPhase, 0.5).0);
    }
}
