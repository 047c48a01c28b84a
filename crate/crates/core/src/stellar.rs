//! Majorana constellations of spin states, the Plücker embedding of
//! k-planes, its decomposition into spin multiplets, and the resulting
//! multiconstellation picture (one weighted constellation per multiplet
//! plus a rotation-invariant spectator constellation). Also a brute-force
//! symmetry finder working directly on constellations.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::spin::{self, Rotation, SpinQuantum};
use crate::{CMat, Error, Ket, Result};

/// Default chordal tolerance for merging roots into one star.
pub const STAR_TOL: f64 = 1e-6;
/// Relative threshold below which leading/trailing polynomial coefficients
/// are treated as exact zeros (pole stars).
const COEFF_TOL: f64 = 1e-9;

fn binom(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc *= (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// A multiset of unit vectors ("stars") on the sphere.
#[derive(Debug, Clone)]
pub struct Constellation {
    stars: Vec<(Vector3<f64>, usize)>,
}

impl Constellation {
    /// Cluster a list of unit vectors into stars with multiplicities.
    pub fn from_points(points: &[Vector3<f64>], tol: f64) -> Result<Self> {
        let mut stars: Vec<(Vector3<f64>, usize)> = Vec::new();
        for p in points {
            if (p.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("star of norm {} is not on the sphere", p.norm())));
            }
            match stars.iter_mut().find(|(q, _)| (q - p).norm() < tol) {
                Some((_, m)) => *m += 1,
                None => stars.push((*p, 1)),
            }
        }
        // deterministic order: by z, then x, then y
        stars.sort_by(|a, b| {
            let ka = (a.0.z, a.0.x, a.0.y);
            let kb = (b.0.z, b.0.x, b.0.y);
            kb.partial_cmp(&ka).unwrap()
        });
        Ok(Self { stars })
    }

    pub fn stars(&self) -> &[(Vector3<f64>, usize)] {
        &self.stars
    }

    /// Total number of stars counted with multiplicity (2j for spin j).
    pub fn total(&self) -> usize {
        self.stars.iter().map(|(_, m)| m).sum()
    }

    /// All stars expanded with multiplicity.
    pub fn expanded(&self) -> Vec<Vector3<f64>> {
        self.stars
            .iter()
            .flat_map(|(p, m)| std::iter::repeat(*p).take(*m))
            .collect()
    }

    pub fn rotate(&self, r: &Rotation) -> Self {
        Self { stars: self.stars.iter().map(|(p, m)| (r.apply(p), *m)).collect() }
    }
}

// ---------------------------------------------------------------------------
// Majorana constellation of a single state
// ---------------------------------------------------------------------------

/// Aberth-Ehrlich simultaneous root iteration for a polynomial with
/// nonvanishing leading and trailing coefficients, given in ascending
/// order `c[0] + c[1] z + ...`.
fn aberth_roots(c: &[Complex64]) -> Vec<Complex64> {
    let deg = c.len() - 1;
    match deg {
        0 => return Vec::new(),
        1 => return vec![-c[0] / c[1]],
        2 => {
            // stable quadratic formula
            let (a, b, c0) = (c[2], c[1], c[0]);
            let disc = (b * b - 4.0 * a * c0).sqrt();
            let q = if (b + disc).norm() > (b - disc).norm() { b + disc } else { b - disc };
            let q = -0.5 * q;
            return vec![q / a, c0 / q];
        }
        _ => {}
    }
    // initial guesses on a circle inside the Cauchy root bound
    let an = c[deg].norm();
    let r = 1.0 + c[..deg].iter().map(|x| x.norm() / an).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..deg)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.37) / deg as f64 + 0.5;
            Complex64::from_polar(0.6 * r, th)
        })
        .collect();
    let eval = |x: Complex64| -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &ck in c.iter().rev() {
            dp = dp * x + p;
            p = p * x + ck;
        }
        (p, dp)
    };
    for _ in 0..300 {
        let mut moved: f64 = 0.0;
        for i in 0..deg {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let newton = if dp.norm() > 0.0 { p / dp } else { Complex64::new(1e-8, 0.0) };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..deg {
                if j != i {
                    sum += 1.0 / (z[i] - z[j]);
                }
            }
            let w = newton / (1.0 - newton * sum);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-14 {
            break;
        }
    }
    z
}

fn stereographic_to_sphere(z: Complex64) -> Vector3<f64> {
    let d = 1.0 + z.norm_sqr();
    Vector3::new(2.0 * z.re / d, 2.0 * z.im / d, (1.0 - z.norm_sqr()) / d).normalize()
}

/// Majorana constellation of a spin-s state (dimension 2s+1).
///
/// Convention: p(z) = sum_m (-1)^(s-m) sqrt(C(2s, s-m)) psi_m z^(s+m); each
/// root maps to the sphere by inverse stereographic projection from the
/// south pole (z = 0 is the north pole), and a degree deficit of d puts d
/// stars at the south pole. With this choice the constellation of D(R) psi
/// is the rotation R applied to the constellation of psi.
pub fn majorana_constellation(psi: &Ket) -> Result<Constellation> {
    let n = psi.len();
    if n < 2 {
        return Err(Error::Domain("need a spin >= 1/2 state".into()));
    }
    let norm = psi.norm();
    if norm < 1e-14 {
        return Err(Error::Domain("zero state has no constellation".into()));
    }
    let two_s = n - 1;
    // ascending coefficients: c[s + m] with psi[i] at m = s - i
    let mut c: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); n];
    for i in 0..n {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        c[two_s - i] = sign * binom(two_s, i).sqrt() * psi[i] / norm;
    }
    let maxc = c.iter().map(|x| x.norm()).fold(0.0, f64::max);
    // trailing zeros: roots at z = 0 (north pole)
    let mut north = 0;
    while north < two_s && c[north].norm() <= COEFF_TOL * maxc {
        north += 1;
    }
    // leading zeros: degree deficit (south pole)
    let mut hi = two_s;
    while hi > north && c[hi].norm() <= COEFF_TOL * maxc {
        hi -= 1;
    }
    let south = two_s - hi;
    let roots = aberth_roots(&c[north..=hi]);
    let mut points: Vec<Vector3<f64>> = roots.into_iter().map(stereographic_to_sphere).collect();
    points.extend(std::iter::repeat(Vector3::new(0.0, 0.0, 1.0)).take(north));
    points.extend(std::iter::repeat(Vector3::new(0.0, 0.0, -1.0)).take(south));
    Constellation::from_points(&points, STAR_TOL)
}

// ---------------------------------------------------------------------------
// Plücker embedding and multiplets
// ---------------------------------------------------------------------------

/// Normalized Plücker coordinates of a k-plane in Gr(k, 2s+1), indexed by
/// ascending k-subsets of row indices (i.e. descending magnetic numbers)
/// in lexicographic order.
#[derive(Debug, Clone)]
pub struct PluckerVector {
    pub s: SpinQuantum,
    pub k: usize,
    pub components: Ket,
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // next lexicographic combination
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

fn det_in_place(mut m: CMat) -> Complex64 {
    // LU with partial pivoting
    let n = m.nrows();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[(a, col)].norm().total_cmp(&m[(b, col)].norm())).unwrap();
        if m[(piv, col)].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if piv != col {
            m.swap_rows(piv, col);
            det = -det;
        }
        det *= m[(col, col)];
        for row in col + 1..n {
            let f = m[(row, col)] / m[(col, col)];
            for c2 in col..n {
                let v = m[(col, c2)];
                m[(row, c2)] -= f * v;
            }
        }
    }
    det
}

/// Plücker coordinates: the k x k minors of the frame, normalized, with the
/// global phase fixed by making the first significant entry real positive.
pub fn plucker_coordinates(p: &crate::grassmann::KPlane) -> PluckerVector {
    let frame = p.frame();
    let n = p.dimension();
    let k = p.k();
    let subs = subsets(n, k);
    let mut v = Ket::zeros(subs.len());
    for (idx, sub) in subs.iter().enumerate() {
        let mut minor = CMat::zeros(k, k);
        for (r, &row) in sub.iter().enumerate() {
            for c in 0..k {
                minor[(r, c)] = frame[(row, c)];
            }
        }
        v[idx] = det_in_place(minor);
    }
    let norm = v.norm();
    let mut v = v / Complex64::new(norm, 0.0);
    if let Some(first) = v.iter().find(|c| c.norm() > 1e-9) {
        let phase = first / first.norm();
        v /= phase;
    }
    PluckerVector { s: p.s, k, components: v }
}

/// One irreducible block of the Plücker space in its canonical |j, m> basis
/// (columns, m descending).
#[derive(Debug, Clone)]
struct CanonicalMultiplet {
    j: SpinQuantum,
    basis: CMat,
}

#[derive(Debug)]
struct WedgeData {
    subsets: Vec<Vec<usize>>,
    multiplets: Vec<CanonicalMultiplet>,
}

static WEDGE_CACHE: RwLock<Option<HashMap<(u32, usize), Arc<WedgeData>>>> = RwLock::new(None);

fn lift_operator(op: &CMat, subs: &[Vec<usize>], index: &HashMap<Vec<usize>, usize>) -> CMat {
    let d = subs.len();
    let mut out = CMat::zeros(d, d);
    for (col, sub) in subs.iter().enumerate() {
        for (pos, &orig) in sub.iter().enumerate() {
            for r in 0..op.nrows() {
                let amp = op[(r, orig)];
                if amp.norm() == 0.0 || (r != orig && sub.contains(&r)) {
                    continue;
                }
                let mut new = sub.clone();
                new[pos] = r;
                // sort and track permutation sign
                let mut sign = 1.0;
                let mut i = pos;
                while i > 0 && new[i] < new[i - 1] {
                    new.swap(i, i - 1);
                    sign = -sign;
                    i -= 1;
                }
                let mut i = pos.min(new.len() - 1);
                while i + 1 < new.len() && new[i] > new[i + 1] {
                    new.swap(i, i + 1);
                    sign = -sign;
                    i += 1;
                }
                let row = index[&new];
                out[(row, col)] += amp * sign;
            }
        }
    }
    out
}

/// The three generators of the rotation action on the wedge space Λᵏℂᴺ.
pub fn induced_spin_operators(s: SpinQuantum, k: usize) -> (CMat, CMat, CMat) {
    let ops = spin::spin_operators(s);
    let n = s.dimension();
    let subs = subsets(n, k);
    let index: HashMap<Vec<usize>, usize> =
        subs.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    (
        lift_operator(&ops.sx, &subs, &index),
        lift_operator(&ops.sy, &subs, &index),
        lift_operator(&ops.sz, &subs, &index),
    )
}

fn build_wedge(s: SpinQuantum, k: usize) -> Result<WedgeData> {
    let n = s.dimension();
    let subs = subsets(n, k);
    let index: HashMap<Vec<usize>, usize> =
        subs.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
    let ops = spin::spin_operators(s);
    let sx = lift_operator(&ops.sx, &subs, &index);
    let sy = lift_operator(&ops.sy, &subs, &index);
    let sz = lift_operator(&ops.sz, &subs, &index);
    let casimir = &sx * &sx + &sy * &sy + &sz * &sz;
    let eig = nalgebra::SymmetricEigen::new(casimir);
    let d = subs.len();

    // group eigenvalues lambda = j(j+1) by twice_j
    let mut blocks: HashMap<u32, Vec<usize>> = HashMap::new();
    for i in 0..d {
        let lam = eig.eigenvalues[i].max(0.0);
        let j = 0.5 * ((1.0 + 4.0 * lam).sqrt() - 1.0);
        let twice_j = (2.0 * j).round() as u32;
        let ideal = 0.25 * twice_j as f64 * (twice_j as f64 + 2.0);
        if (lam - ideal).abs() > 1e-6 * (1.0 + ideal) {
            return Err(Error::Degeneracy(format!("Casimir eigenvalue {lam} is not of the form j(j+1)")));
        }
        blocks.entry(twice_j).or_default().push(i);
    }

    let sminus = {
        let i = Complex64::new(0.0, 1.0);
        &sx - &sy * i
    };
    let mut multiplets = Vec::new();
    let mut twice_js: Vec<u32> = blocks.keys().copied().collect();
    twice_js.sort_unstable_by(|a, b| b.cmp(a));
    for twice_j in twice_js {
        let cols = &blocks[&twice_j];
        let jq = SpinQuantum::from_twice(twice_j);
        let dim_j = twice_j as usize + 1;
        if cols.len() % dim_j != 0 {
            return Err(Error::Degeneracy(format!(
                "Casimir block for 2j = {twice_j} has size {} not divisible by {dim_j}",
                cols.len()
            )));
        }
        let mult = cols.len() / dim_j;
        // eigenspace basis (columns)
        let mut espace = CMat::zeros(d, cols.len());
        for (c, &src) in cols.iter().enumerate() {
            espace.set_column(c, &eig.eigenvectors.column(src));
        }
        // highest-weight subspace: kernel of (Sz - j) restricted to the block
        let j = 0.5 * twice_j as f64;
        let restricted = espace.adjoint() * &sz * &espace;
        let shifted = restricted - CMat::identity(cols.len(), cols.len()) * Complex64::new(j, 0.0);
        let svd = shifted.svd(true, true);
        let vt = svd.v_t.as_ref().unwrap();
        let mut hw_cols: Vec<usize> = (0..cols.len())
            .filter(|&i| svd.singular_values[i] < 1e-8)
            .collect();
        if hw_cols.len() != mult {
            return Err(Error::Degeneracy(format!(
                "expected {mult} highest-weight vectors for 2j = {twice_j}, found {}",
                hw_cols.len()
            )));
        }
        // deterministic tie-break for mult > 1: project the standard basis
        // vectors of the wedge space onto the highest-weight subspace and
        // Gram-Schmidt them in index order
        let mut hw_basis = CMat::zeros(d, mult);
        if mult == 1 {
            let col = vt.row(hw_cols.pop().unwrap()).adjoint();
            hw_basis.set_column(0, &(&espace * col));
        } else {
            let mut hw_span = CMat::zeros(d, mult);
            for (c, &r) in hw_cols.iter().enumerate() {
                hw_span.set_column(c, &(&espace * vt.row(r).adjoint()));
            }
            let proj = &hw_span * hw_span.adjoint();
            let mut picked = 0;
            let mut gs: Vec<Ket> = Vec::new();
            for e in 0..d {
                if picked == mult {
                    break;
                }
                let mut v: Ket = proj.column(e).into();
                for g in &gs {
                    let ov = g.dotc(&v);
                    v -= g * ov;
                }
                let nv = v.norm();
                if nv > 1e-6 {
                    gs.push(v / Complex64::new(nv, 0.0));
                    picked += 1;
                }
            }
            if picked != mult {
                return Err(Error::Degeneracy("tie-break Gram-Schmidt ran out of directions".into()));
            }
            for (c, g) in gs.into_iter().enumerate() {
                hw_basis.set_column(c, &g);
            }
        }
        // each highest-weight vector generates one canonical multiplet
        for c in 0..mult {
            let mut top: Ket = hw_basis.column(c).into();
            // fix phase: first significant entry real positive
            if let Some(first) = top.iter().find(|x| x.norm() > 1e-8) {
                let phase = first / first.norm();
                top /= phase;
            }
            let mut basis = CMat::zeros(d, dim_j);
            basis.set_column(0, &top);
            let mut cur = top;
            let mut m = j;
            for row in 1..dim_j {
                cur = &sminus * cur;
                let fac = (j * (j + 1.0) - m * (m - 1.0)).sqrt();
                cur /= Complex64::new(fac, 0.0);
                m -= 1.0;
                basis.set_column(row, &cur);
            }
            multiplets.push(CanonicalMultiplet { j: jq, basis });
        }
    }
    Ok(WedgeData { subsets: subs, multiplets })
}

fn wedge_data(s: SpinQuantum, k: usize) -> Result<Arc<WedgeData>> {
    let key = (s.twice(), k);
    if let Some(map) = WEDGE_CACHE.read().unwrap().as_ref() {
        if let Some(d) = map.get(&key) {
            return Ok(d.clone());
        }
    }
    let data = Arc::new(build_wedge(s, k)?);
    WEDGE_CACHE
        .write()
        .unwrap()
        .get_or_insert_with(HashMap::new)
        .insert(key, data.clone());
    Ok(data)
}

/// Project a Plücker vector onto the canonical spin multiplets of Λᵏℂᴺ.
/// Returns (j, component in the |j, m> basis, m descending) ordered by
/// decreasing j; the squared norms of the components sum to 1.
pub fn multiplet_decomposition(v: &PluckerVector) -> Result<Vec<(SpinQuantum, Ket)>> {
    let data = wedge_data(v.s, v.k)?;
    if v.components.len() != data.subsets.len() {
        return Err(Error::Domain("Plücker vector has the wrong dimension".into()));
    }
    Ok(data
        .multiplets
        .iter()
        .map(|m| (m.j, m.basis.adjoint() * &v.components))
        .collect())
}

/// One weighted multiplet of a multiconstellation.
#[derive(Debug, Clone)]
pub struct Multiplet {
    pub j: SpinQuantum,
    pub weight: Complex64,
    /// None when the weight vanishes (no constellation to draw).
    pub constellation: Option<Constellation>,
}

/// The full visual fingerprint of a k-plane: one weighted constellation per
/// spin multiplet of Λᵏℂᴺ (ordered by decreasing j) plus the spectator
/// constellation of the weight pseudo-spinor, which is invariant under
/// rotations of the plane.
#[derive(Debug, Clone)]
pub struct MultiConstellation {
    pub multiplets: Vec<Multiplet>,
    pub spectator: Option<Constellation>,
}

/// Weight threshold below which a multiplet component counts as absent.
const WEIGHT_TOL: f64 = 1e-9;

pub fn multiconstellation(p: &crate::grassmann::KPlane) -> Result<MultiConstellation> {
    let v = plucker_coordinates(p);
    let comps = multiplet_decomposition(&v)?;
    let mut multiplets = Vec::with_capacity(comps.len());
    let mut weights = Ket::zeros(comps.len());
    for (i, (j, comp)) in comps.into_iter().enumerate() {
        let norm = comp.norm();
        if norm < WEIGHT_TOL {
            multiplets.push(Multiplet { j, weight: Complex64::new(0.0, 0.0), constellation: None });
            continue;
        }
        // phase convention: first nonzero entry of the normalized component
        // is real positive; the weight carries the removed phase
        let first = comp.iter().find(|c| c.norm() > 1e-9 * norm).unwrap();
        let phase = first / first.norm();
        let weight = phase * norm;
        weights[i] = weight;
        let normalized = comp / weight;
        let constellation = if j.twice() == 0 { None } else { Some(majorana_constellation(&normalized)?) };
        multiplets.push(Multiplet { j, weight, constellation });
    }
    let spectator = if weights.len() >= 2 { Some(majorana_constellation(&weights)?) } else { None };
    Ok(MultiConstellation { multiplets, spectator })
}

// ---------------------------------------------------------------------------
// Symmetry discovery
// ---------------------------------------------------------------------------

/// Result of the constellation symmetry search.
#[derive(Debug, Clone)]
pub enum SymmetryCandidates {
    /// Every rotation about this axis (plus the validated discrete list)
    /// fixes the constellation: all stars are on one axis.
    ContinuousAxis(Vector3<f64>),
    /// The validated discrete rotations, identity included.
    Discrete(Vec<Rotation>),
}

/// True iff R maps c1 onto c2 as a multiset of stars within tol.
/// Stars are matched greedily; with tol far below the minimal star
/// separation this is the optimal assignment.
pub fn check_congruence(c1: &Constellation, c2: &Constellation, r: &Rotation, tol: f64) -> bool {
    if c1.total() != c2.total() {
        return false;
    }
    let rotated = c1.rotate(r);
    let mut remaining: Vec<(Vector3<f64>, usize)> = c2.stars().to_vec();
    for (p, m) in rotated.stars() {
        match remaining.iter_mut().find(|(q, mq)| *mq >= *m && (q - p).norm() < tol) {
            Some((_, mq)) => *mq -= m,
            None => return false,
        }
    }
    remaining.iter().all(|(_, m)| *m == 0)
}

fn rotation_between_pairs(
    a1: &Vector3<f64>,
    a2: &Vector3<f64>,
    b1: &Vector3<f64>,
    b2: &Vector3<f64>,
) -> Option<Rotation> {
    let frame = |u1: &Vector3<f64>, u2: &Vector3<f64>| -> Option<nalgebra::Matrix3<f64>> {
        let e1 = u1.normalize();
        let mut e2 = u2 - e1 * e1.dot(u2);
        if e2.norm() < 1e-8 {
            return None;
        }
        e2 = e2.normalize();
        let e3 = e1.cross(&e2);
        Some(nalgebra::Matrix3::from_columns(&[e1, e2, e3]))
    };
    let fa = frame(a1, a2)?;
    let fb = frame(b1, b2)?;
    let m = fb * fa.transpose();
    Some(Rotation::from_matrix(&m))
}

/// Exhaustive pair-of-pairs symmetry search: candidate rotations map one
/// ordered star pair onto another with matching multiplicities and angle;
/// survivors are validated with `check_congruence` and deduplicated.
pub fn symmetry_candidates(c: &Constellation, tol: f64) -> Result<SymmetryCandidates> {
    let stars = c.stars();
    if stars.is_empty() {
        return Err(Error::Domain("empty constellation".into()));
    }
    if stars.len() > 50 {
        return Err(Error::Domain("symmetry search is limited to 50 distinct stars".into()));
    }
    // collinear constellation (includes the single-star case): continuous axis
    let axis = stars[0].0;
    if stars.iter().all(|(p, _)| p.cross(&axis).norm() < 1e-8) {
        return Ok(SymmetryCandidates::ContinuousAxis(axis));
    }
    let n = stars.len();
    let mut found: Vec<Rotation> = vec![Rotation::identity()];
    for i1 in 0..n {
        for i2 in 0..n {
            if i1 == i2 {
                continue;
            }
            let ang_a = stars[i1].0.dot(&stars[i2].0);
            for j1 in 0..n {
                if stars[j1].1 != stars[i1].1 {
                    continue;
                }
                for j2 in 0..n {
                    if j1 == j2 || stars[j2].1 != stars[i2].1 {
                        continue;
                    }
                    if (stars[j1].0.dot(&stars[j2].0) - ang_a).abs() > 1e-6 {
                        continue;
                    }
                    let Some(r) =
                        rotation_between_pairs(&stars[i1].0, &stars[i2].0, &stars[j1].0, &stars[j2].0)
                    else {
                        continue;
                    };
                    if found.iter().any(|f| f.compose(&r.inverse()).angle() < 1e-6) {
                        continue;
                    }
                    if check_congruence(c, c, &r, tol) {
                        found.push(r);
                    }
                }
            }
        }
    }
    Ok(SymmetryCandidates::Discrete(found))
}
