//! End-to-end acceptance suite. Each test prints one PASS line when its
//! criterion holds; any failure shows up as a failed test with the measured
//! values in the assert message.

use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spin_holonomy::grassmann::plane_from_kets;
use spin_holonomy::holonomy::{
    self, abelian_geometric_phase, frame_curve_from_rotations, parallel_transport_oracle,
    path_ordered_exponential, wz_holonomy, Stencil,
};
use spin_holonomy::spin::{spin_operators, wigner_d, RotationCurve};
use spin_holonomy::stellar::{
    majorana_constellation, multiconstellation, multiplet_decomposition, plucker_coordinates,
};
use spin_holonomy::{
    catalog, compare_gate, extract_gate, gates, CMat, GateMode, Ket, Rotation, SpinQuantum,
};

fn maxabs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn random_ket(rng: &mut ChaCha8Rng, n: usize) -> Ket {
    let v = Ket::from_iterator(
        n,
        (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))),
    );
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

#[test]
fn criterion_01_not_gate() {
    let cat = catalog();
    let entry = cat.gate("not").unwrap();
    let start = Instant::now();
    let hol = extract_gate(&entry.plane, &entry.curve(2001)).unwrap();
    let elapsed = start.elapsed();
    let (_, dev) = compare_gate(&hol.u, &entry.expected, GateMode::Exact, 1e-8);
    assert!(dev < 1e-8, "NOT deviation {dev:.3e}");
    assert!(elapsed.as_secs_f64() < 1.0, "NOT runtime {elapsed:?}");
    println!("criterion 1 PASS: NOT holonomy = sigma_x (dev {dev:.2e}, {elapsed:?} at 2001 steps)");
}

#[test]
fn criterion_02_cnot_gates() {
    let cat = catalog();
    let mut devs = Vec::new();
    for name in ["cnot1", "cnot2"] {
        let entry = cat.gate(name).unwrap();
        let hol = extract_gate(&entry.plane, &entry.curve(2001)).unwrap();
        let (_, dev) = compare_gate(&hol.u, &entry.expected, GateMode::Exact, 1e-8);
        assert!(dev < 1e-8, "{name} deviation {dev:.3e}");
        devs.push(dev);
    }
    println!(
        "criterion 2 PASS: U1 (overall sign included) dev {:.2e}, U2 dev {:.2e}",
        devs[0], devs[1]
    );
}

#[test]
fn criterion_03_anticoherence() {
    let cat = catalog();
    let mut worst: f64 = 0.0;
    for plane in [&cat.plane_not, &cat.plane_cnot] {
        let ops = spin_operators(plane.s);
        for op in [&ops.sx, &ops.sy, &ops.sz] {
            let block = plane.frame().adjoint() * op * plane.frame();
            worst = worst.max(maxabs(&block));
        }
    }
    assert!(worst < 1e-12, "largest spin block element {worst:.3e}");
    println!("criterion 3 PASS: both planes 1-anticoherent (max |<psi_i|S_a|psi_j>| = {worst:.2e})");
}

#[test]
fn criterion_04_vanishing_connection() {
    let cat = catalog();
    // O(dt^2) decay of the plain central-difference connection where its
    // truncation error dominates (the CNOT curves)
    let entry = cat.gate("cnot1").unwrap();
    let coarse = frame_curve_from_rotations(&entry.plane, &entry.curve(1001), 1001).unwrap();
    let fine = frame_curve_from_rotations(&entry.plane, &entry.curve(4001), 4001).unwrap();
    let (a_coarse, _) = holonomy::max_connection_norm(&coarse, Stencil::Central2);
    let (a_fine, _) = holonomy::max_connection_norm(&fine, Stencil::Central2);
    let ratio = a_coarse / a_fine;
    assert!(
        ratio > 10.0,
        "expected ~16x decay over two halvings, got {a_coarse:.3e} -> {a_fine:.3e}"
    );
    // the connection itself vanishes: high-order stencil at 2001 steps
    let mut worst_a: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for name in ["not", "cnot1", "cnot2"] {
        let entry = cat.gate(name).unwrap();
        let fc = frame_curve_from_rotations(&entry.plane, &entry.curve(2001), 2001).unwrap();
        let (max_a, _) = holonomy::max_connection_norm(&fc, Stencil::Central6);
        assert!(max_a < 1e-9, "{name}: max |A| = {max_a:.3e} at 2001 steps");
        let k = fc.k();
        let f = wz_holonomy(&fc).unwrap().f;
        let f_dev = maxabs(&(f - CMat::identity(k, k)));
        assert!(f_dev < 1e-9, "{name}: |F - I| = {f_dev:.3e}");
        worst_a = worst_a.max(max_a);
        worst_f = worst_f.max(f_dev);
    }
    println!(
        "criterion 4 PASS: connection O(dt^2)-decays (x{ratio:.0}), max |A| {worst_a:.2e} < 1e-9 \
         at 2001 steps, |F - I| {worst_f:.2e}"
    );
}

#[test]
fn criterion_05_topological_invariance() {
    let cat = catalog();
    let seeds: Vec<u64> = (0..50).collect();
    let amplitudes = [0.1, 0.5, 1.0, 2.0];
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for name in ["not", "cnot1"] {
        let entry = cat.gate(name).unwrap();
        let recs = gates::invariance_sweep(entry, &seeds, &amplitudes, 5, 4001).unwrap();
        assert_eq!(recs.len(), 200);
        for r in recs {
            assert!(
                r.deviation < 1e-7,
                "{name} seed {} amplitude {}: deviation {:.3e}",
                r.seed,
                r.amplitude,
                r.deviation
            );
            worst = worst.max(r.deviation);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 120.0, "sweep took {elapsed:?}");
    println!(
        "criterion 5 PASS: 400 perturbed holonomies within {worst:.2e} of the gates ({elapsed:?})"
    );
}

#[test]
fn criterion_06_plucker_decomposition() {
    let cat = catalog();
    let comps = multiplet_decomposition(&plucker_coordinates(&cat.plane_not)).unwrap();
    let js: Vec<u32> = comps.iter().map(|(j, _)| j.twice()).collect();
    assert_eq!(js, vec![6, 2], "expected exactly one spin-3 and one spin-1 multiplet");
    let spin3 = &comps[0].1;
    let spin1 = &comps[1].1;
    assert!(spin1.norm() < 1e-9, "spin-1 norm {:.3e}", spin1.norm());
    let target = Ket::from_vec(vec![
        Complex64::new(-(2.0f64.sqrt()) / 3.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(5.0f64.sqrt() / 3.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(2.0f64.sqrt() / 3.0, 0.0),
    ]);
    let overlap = target.dotc(spin3).norm();
    assert!(
        (overlap - 1.0).abs() < 1e-9 && (spin3.norm() - 1.0).abs() < 1e-9,
        "spin-3 component misaligned: |<target|c>| = {overlap}"
    );
    println!("criterion 6 PASS: spin-3 component matches (-sqrt2,0,0,sqrt5,0,0,sqrt2)/3, spin-1 = 0");
}

#[test]
fn criterion_07_stellar_geometry() {
    let cat = catalog();
    // chi: regular tetrahedron with a vertex at (1,0,0)
    let chi_stars = majorana_constellation(&cat.chi).unwrap().expanded();
    assert_eq!(chi_stars.len(), 4);
    let side = (8.0f64 / 3.0).sqrt();
    for i in 0..4 {
        for j in i + 1..4 {
            let d = (chi_stars[i] - chi_stars[j]).norm();
            assert!((d - side).abs() < 1e-7, "tetrahedron edge {d} vs {side}");
        }
    }
    assert!(chi_stars.iter().any(|p| (p - Vector3::x()).norm() < 1e-7), "no vertex at (1,0,0)");
    // Pi_NOT: regular octahedron, spectator single north star
    let mc = multiconstellation(&cat.plane_not).unwrap();
    let oct = mc.multiplets[0].constellation.as_ref().unwrap().expanded();
    assert_eq!(oct.len(), 6);
    for p in &oct {
        let antipodes = oct.iter().filter(|q| (p + *q).norm() < 1e-7).count();
        let orthogonal = oct.iter().filter(|q| p.dot(q).abs() < 1e-7).count();
        assert_eq!((antipodes, orthogonal), (1, 4), "not an octahedron at {p:?}");
    }
    let spec = mc.spectator.as_ref().unwrap();
    assert_eq!(spec.stars().len(), 1);
    assert!((spec.stars()[0].0 - Vector3::z()).norm() < 1e-9);
    // Pi_CNOT principal constellation: quadruple stars at both poles
    let mc = multiconstellation(&cat.plane_cnot).unwrap();
    let principal = mc
        .multiplets
        .iter()
        .filter(|m| m.weight.norm() > 1e-9)
        .find_map(|m| m.constellation.as_ref())
        .unwrap();
    let north = principal.stars().iter().find(|(p, _)| (p - Vector3::z()).norm() < 1e-7);
    let south = principal.stars().iter().find(|(p, _)| (p + Vector3::z()).norm() < 1e-7);
    assert_eq!(north.map(|s| s.1), Some(4), "north pole not quadruple");
    assert_eq!(south.map(|s| s.1), Some(4), "south pole not quadruple");
    println!(
        "criterion 7 PASS: chi tetrahedron with +x vertex, Pi_NOT octahedron + north spectator, \
         Pi_CNOT quadruple poles"
    );
}

#[test]
fn criterion_08_symmetry_bridge() {
    let cat = catalog();
    let s2 = SpinQuantum::from_int(2);
    let r = Rotation::from_axis_angle(&Vector3::x(), 2.0 * PI / 3.0);
    let rotated = wigner_d(s2, &r) * &cat.chi;
    let overlap = cat.chi.dotc(&rotated).norm();
    assert!((overlap - 1.0).abs() < 1e-10, "chi not an eigenstate: |overlap| = {overlap}");
    let checks = [
        (&cat.plane_not, Rotation::from_axis_angle(&Vector3::y(), PI), "R_y(pi) on Pi_NOT"),
        (&cat.plane_cnot, Rotation::from_axis_angle(&Vector3::x(), PI), "R_x(pi) on Pi_CNOT"),
        (
            &cat.plane_cnot,
            Rotation::from_axis_angle(&Vector3::z(), 2.0 * PI / 5.0),
            "R_z(2pi/5) on Pi_CNOT",
        ),
    ];
    for (plane, rot, label) in checks {
        let (ok, angle) = spin_holonomy::is_symmetry_rotation(plane, &rot, 1e-8);
        assert!(ok, "{label}: residual angle {angle:.3e}");
    }
    println!("criterion 8 PASS: chi fixed by R_x(2pi/3); all documented plane symmetries verified");
}

fn random_gr25_curve(rng: &mut ChaCha8Rng, steps: usize) -> holonomy::FrameCurve {
    let s = SpinQuantum::from_int(2);
    let plane = plane_from_kets(s, &[random_ket(rng, 5), random_ket(rng, 5)]).unwrap();
    let axis = {
        let v = Vector3::new(
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        if v.norm() < 1e-3 {
            Vector3::x()
        } else {
            v.normalize()
        }
    };
    let angle = rng.gen_range(0.5..2.0);
    let wobble = rng.gen_range(0.1..0.3);
    let curve = RotationCurve::from_fn(
        move |t| Rotation::from_axis_angle(&axis, angle * (t + wobble * (2.0 * PI * t).sin())),
        1.0,
        steps,
    );
    frame_curve_from_rotations(&plane, &curve, steps).unwrap()
}

#[test]
fn criterion_09_oracle_equivalence() {
    let cat = catalog();
    let mut worst: f64 = 0.0;
    // catalog curves at 1e4 steps
    for name in ["not", "cnot1", "cnot2"] {
        let entry = cat.gate(name).unwrap();
        let fc = frame_curve_from_rotations(&entry.plane, &entry.curve(10001), 10001).unwrap();
        let u = wz_holonomy(&fc).unwrap().u;
        let oracle = parallel_transport_oracle(&fc).unwrap();
        let dev = maxabs(&(u - oracle));
        assert!(dev < 1e-5, "{name}: oracle deviation {dev:.3e}");
        worst = worst.max(dev);
    }
    // random smooth curves with nonvanishing connection
    let mut rng = ChaCha8Rng::seed_from_u64(900);
    for trial in 0..10 {
        let fc = random_gr25_curve(&mut rng, 10001);
        let (max_a, _) = holonomy::max_connection_norm(&fc, Stencil::Central2);
        assert!(max_a > 1e-3, "trial {trial}: connection unexpectedly small ({max_a:.3e})");
        let u = wz_holonomy(&fc).unwrap().u;
        let oracle = parallel_transport_oracle(&fc).unwrap();
        let dev = maxabs(&(u - oracle));
        assert!(dev < 1e-5, "trial {trial}: oracle deviation {dev:.3e}");
        worst = worst.max(dev);
    }
    // gauge covariance: frames phi(t) B(t) with B(0) = B(T) = B0
    let mut rng = ChaCha8Rng::seed_from_u64(901);
    let fc = random_gr25_curve(&mut rng, 2001);
    let u = wz_holonomy(&fc).unwrap().u;
    let b0 = {
        let m = CMat::from_fn(2, 2, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        m.qr().q()
    };
    let n = fc.steps();
    let times = fc.times().to_vec();
    let gauged: Vec<CMat> = fc
        .frames()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let t = i as f64 / (n - 1) as f64;
            // interpolate B0 -> I -> B0 through a smooth Hermitian phase
            let theta = (PI * t).sin().powi(2);
            let rot = CMat::from_fn(2, 2, |r, c| {
                let delta = if r == c { 1.0 } else { 0.0 };
                Complex64::new(delta, 0.0) * Complex64::from_polar(1.0, theta * (r as f64 + 0.7))
            });
            f * (&b0 * rot)
        })
        .collect();
    let gauged = holonomy::FrameCurve::from_samples(SpinQuantum::from_int(2), times, gauged).unwrap();
    let u_gauged = wz_holonomy(&gauged).unwrap().u;
    let expected = b0.adjoint() * &u * &b0;
    let gauge_dev = maxabs(&(u_gauged - expected));
    assert!(gauge_dev < 1e-8, "gauge covariance violated by {gauge_dev:.3e}");
    // reparametrization invariance
    let mut rng = ChaCha8Rng::seed_from_u64(902);
    let s = SpinQuantum::from_int(2);
    let plane = plane_from_kets(s, &[random_ket(&mut rng, 5), random_ket(&mut rng, 5)]).unwrap();
    let base = move |t: f64| Rotation::from_axis_angle(&Vector3::new(0.3, 0.5, 0.8).normalize(), 1.7 * t);
    let straight = RotationCurve::from_fn(base, 1.0, 4001);
    let warped = RotationCurve::from_fn(
        move |t| base(t - 0.15 * (2.0 * PI * t).sin() / (2.0 * PI)),
        1.0,
        4001,
    );
    let u1 = wz_holonomy(&frame_curve_from_rotations(&plane, &straight, 4001).unwrap()).unwrap().u;
    let u2 = wz_holonomy(&frame_curve_from_rotations(&plane, &warped, 4001).unwrap()).unwrap().u;
    let reparam_dev = maxabs(&(u1 - u2));
    assert!(reparam_dev < 1e-8, "reparametrization changed the holonomy by {reparam_dev:.3e}");
    println!(
        "criterion 9 PASS: oracle within {worst:.2e}; gauge covariance {gauge_dev:.2e}; \
         reparametrization {reparam_dev:.2e}"
    );
}

#[test]
fn criterion_10_abelian_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut worst: f64 = 0.0;
    for trial in 0..10 {
        let n = 2 + (rng.gen_range(0u32..5) as usize);
        let s = SpinQuantum::from_twice((n - 1) as u32);
        let plane = plane_from_kets(s, &[random_ket(&mut rng, n)]).unwrap();
        let axis = Vector3::new(
            rng.gen_range(-1.0f64..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalize();
        let angle = rng.gen_range(0.5..1.5);
        let curve =
            RotationCurve::from_fn(move |t| Rotation::from_axis_angle(&axis, angle * t), 1.0, 2001);
        let fc = frame_curve_from_rotations(&plane, &curve, 2001).unwrap();
        let u_phase = wz_holonomy(&fc).unwrap().u[(0, 0)].arg();
        let phase = abelian_geometric_phase(&fc).unwrap();
        let mut diff = (u_phase - phase).abs();
        diff = diff.min((2.0 * PI - diff).abs());
        assert!(diff < 1e-9, "trial {trial}: phase mismatch {diff:.3e}");
        worst = worst.max(diff);
    }
    // octant loop for spin 1/2: |phase| = pi/4
    let s = SpinQuantum::from_twice(1);
    let mut up = Ket::zeros(2);
    up[0] = Complex64::new(1.0, 0.0);
    let plane = plane_from_kets(s, &[up]).unwrap();
    let octant = RotationCurve::from_fn(
        |t| {
            let quarter = PI / 2.0;
            if t <= 1.0 / 3.0 {
                Rotation::from_axis_angle(&Vector3::y(), quarter * 3.0 * t)
            } else if t <= 2.0 / 3.0 {
                Rotation::from_axis_angle(&Vector3::z(), quarter * 3.0 * (t - 1.0 / 3.0))
                    .compose(&Rotation::from_axis_angle(&Vector3::y(), quarter))
            } else {
                Rotation::from_axis_angle(&Vector3::x(), quarter * 3.0 * (t - 2.0 / 3.0))
                    .compose(&Rotation::from_axis_angle(&Vector3::z(), quarter))
                    .compose(&Rotation::from_axis_angle(&Vector3::y(), quarter))
            }
        },
        1.0,
        3001,
    );
    let fc = frame_curve_from_rotations(&plane, &octant, 3001).unwrap();
    let phase = abelian_geometric_phase(&fc).unwrap();
    assert!((phase.abs() - PI / 4.0).abs() < 1e-6, "octant phase {phase} vs +-pi/4");
    let f = path_ordered_exponential(&fc);
    assert!((f[(0, 0)].norm() - 1.0).abs() < 1e-6);
    println!(
        "criterion 10 PASS: k = 1 holonomy phase matches the geometric phase (worst {worst:.2e}); \
         octant loop gives |phase| = pi/4 ({phase:.8})"
    );
}
