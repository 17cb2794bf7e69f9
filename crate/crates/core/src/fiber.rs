//! Harmonic analysis on fibers and on data space.
//!
//! The basis `phi_{k,l}(beta, alpha) = e^{i(k beta + 2 l alpha)} / (pi sqrt 2)` of
//! `L2` on the influx boundary, its twisted copy `phi'_{k,l} = e^{i alpha} phi_{k,l}`,
//! and the symmetric/antisymmetric families
//!
//! * `u_{p,q}  = phi_{p,q}  + (-1)^p phi_{p,p-q}`
//! * `v_{p,q}  = phi_{p,q}  - (-1)^p phi_{p,p-q}`
//! * `u'_{p,q} = phi'_{p,q} + (-1)^p phi'_{p,p-q-1}`
//! * `v'_{p,q} = phi'_{p,q} - (-1)^p phi'_{p,p-q-1}`
//!
//! On the midpoint grid the `phi` are exactly orthonormal inside the band
//! `|p| <= nbeta/2 - 1`, `|q| <= nalpha/2 - 1`, which the analysis relies on.

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{Basis, BoundaryField, CoeffTable, SinoGrid, Sinogram};
use crate::C64;
use rayon::prelude::*;
use std::f64::consts::{PI, SQRT_2};

const NORM: f64 = PI * SQRT_2;

fn sign_pow(p: i32) -> f64 {
    if p.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn phi(p: i32, q: i32, beta: f64, alpha: f64) -> C64 {
    C64::from_polar(1.0 / NORM, p as f64 * beta + 2.0 * q as f64 * alpha)
}

/// The two `phi` terms `(q, q2, sign)` making up a family element.
fn terms(family: Basis, p: i32, q: i32) -> [(i32, f64); 2] {
    let s = sign_pow(p);
    match family {
        Basis::B | Basis::BPrime => [(q, 1.0), (q, 0.0)],
        Basis::U => [(q, 1.0), (p - q, s)],
        Basis::V => [(q, 1.0), (p - q, -s)],
        Basis::UPrime => [(q, 1.0), (p - q - 1, s)],
        Basis::VPrime => [(q, 1.0), (p - q - 1, -s)],
    }
}

/// Evaluates a family element for any `(p, q)`, reduced or not.
pub fn eval_family(family: Basis, p: i32, q: i32, beta: f64, alpha: f64) -> C64 {
    let [(q1, s1), (q2, s2)] = terms(family, p, q);
    let mut v = phi(p, q1, beta, alpha) * s1;
    if s2 != 0.0 {
        v += phi(p, q2, beta, alpha) * s2;
    }
    if family.is_primed() {
        v *= C64::from_polar(1.0, alpha);
    }
    v
}

/// A basis element with a reduced index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BasisElement {
    family: Basis,
    p: i32,
    q: i32,
}

impl BasisElement {
    pub fn new(family: Basis, p: i32, q: i32) -> Result<Self> {
        if !family.is_valid(p, q) {
            return Err(Error::OutOfRange(format!(
                "({p},{q}) is not a reduced index for family {}",
                family.name()
            )));
        }
        Ok(Self { family, p, q })
    }

    pub fn family(&self) -> Basis {
        self.family
    }

    pub fn p(&self) -> i32 {
        self.p
    }

    pub fn q(&self) -> i32 {
        self.q
    }

    pub fn eval(&self, beta: f64, alpha: f64) -> C64 {
        eval_family(self.family, self.p, self.q, beta, alpha)
    }

    pub fn sample(&self, grid: SinoGrid) -> Sinogram {
        Sinogram::from_fn(grid, |b, a| self.eval(b, a))
    }

    /// Squared norm on the grid, computed from the samples.
    pub fn grid_norm_sq(&self, grid: SinoGrid) -> f64 {
        self.sample(grid).norm().powi(2)
    }

    /// The element divided by its numerical grid norm.
    pub fn hat(&self, grid: SinoGrid) -> Sinogram {
        let s = self.sample(grid);
        let n = s.norm();
        s.scale(C64::new(1.0 / n, 0.0))
    }

    /// Squared norm implied by orthonormality of the `phi`: 2, or 4 where the two
    /// terms coincide.
    pub fn norm_sq(&self) -> f64 {
        family_norm_sq(self.family, self.p, self.q)
    }
}

/// Squared norm of a family element from its `phi` expansion (`0` when the two
/// terms cancel).
pub fn family_norm_sq(family: Basis, p: i32, q: i32) -> f64 {
    let [(q1, s1), (q2, s2)] = terms(family, p, q);
    if s2 == 0.0 {
        1.0
    } else if q1 == q2 {
        (s1 + s2).powi(2)
    } else {
        s1 * s1 + s2 * s2
    }
}

/// Band limits `(P, Q)` of a grid: `|p| <= P`, `|q| <= Q`.
pub fn band(grid: SinoGrid) -> (i32, i32) {
    (grid.nbeta as i32 / 2 - 1, grid.nalpha as i32 / 2 - 1)
}

/// Dense table of `<D, phi_{p,q}>` (or `phi'`) over the band.
#[derive(Clone, Debug)]
pub struct PhiCoeffs {
    pmax: i32,
    qmax: i32,
    data: Vec<C64>,
}

impl PhiCoeffs {
    fn zeros(pmax: i32, qmax: i32) -> Self {
        let n = ((2 * pmax + 1) * (2 * qmax + 1)) as usize;
        Self {
            pmax,
            qmax,
            data: vec![C64::new(0.0, 0.0); n],
        }
    }

    fn offset(&self, p: i32, q: i32) -> Option<usize> {
        if p.abs() > self.pmax || q.abs() > self.qmax {
            return None;
        }
        Some(((p + self.pmax) * (2 * self.qmax + 1) + q + self.qmax) as usize)
    }

    pub fn get(&self, p: i32, q: i32) -> Option<C64> {
        self.offset(p, q).map(|o| self.data[o])
    }

    pub fn pmax(&self) -> i32 {
        self.pmax
    }

    pub fn qmax(&self) -> i32 {
        self.qmax
    }
}

fn theta0(nalpha: usize) -> f64 {
    -PI + PI / nalpha as f64
}

/// Grid inner products with `phi` (`primed = false`) or `phi'`, via 2-D DFT.
pub fn phi_coefficients(d: &Sinogram, primed: bool) -> PhiCoeffs {
    let g = d.grid();
    let (nb, na) = (g.nbeta, g.nalpha);
    let mut buf: Vec<C64> = if primed {
        d.map_indexed(|_, a, v| v * C64::from_polar(1.0, -a))
            .into_values()
    } else {
        d.values().to_vec()
    };
    fft::rows(&mut buf, na, false);
    fft::cols(&mut buf, na, false);
    let (pmax, qmax) = band(g);
    let mut out = PhiCoeffs::zeros(pmax, qmax);
    let t0 = theta0(na);
    let scale = g.cell() / NORM;
    for p in -pmax..=pmax {
        for q in -qmax..=qmax {
            let v = buf[fft::bin(p as i64, nb) * na + fft::bin(q as i64, na)];
            let o = out.offset(p, q).unwrap();
            out.data[o] = v * C64::from_polar(scale, -(q as f64) * t0);
        }
    }
    out
}

fn from_phi(c: &PhiCoeffs, grid: SinoGrid, primed: bool) -> Sinogram {
    let (nb, na) = (grid.nbeta, grid.nalpha);
    let t0 = theta0(na);
    let mut buf = vec![C64::new(0.0, 0.0); nb * na];
    for p in -c.pmax..=c.pmax {
        for q in -c.qmax..=c.qmax {
            let v = c.get(p, q).unwrap();
            buf[fft::bin(p as i64, nb) * na + fft::bin(q as i64, na)] +=
                v * C64::from_polar(1.0 / NORM, q as f64 * t0);
        }
    }
    fft::cols(&mut buf, na, true);
    fft::rows(&mut buf, na, true);
    let s = Sinogram::from_values(grid, buf).expect("grid size");
    if primed {
        s.map_indexed(|_, a, v| v * C64::from_polar(1.0, a))
    } else {
        s
    }
}

/// Expansion coefficients of `d` in the given basis, truncated to the band.
///
/// For the `u/v/u'/v'` families the coefficient of an element `e` is
/// `<d, e> / ||e||^2`; entries whose partner index leaves the band are omitted.
pub fn analyze(d: &Sinogram, basis: Basis) -> CoeffTable {
    let c = phi_coefficients(d, basis.is_primed());
    let mut table = CoeffTable::new(basis);
    for p in -c.pmax..=c.pmax {
        for q in -c.qmax..=c.qmax {
            if !basis.is_valid(p, q) {
                continue;
            }
            let [(q1, s1), (q2, s2)] = terms(basis, p, q);
            let v = if s2 == 0.0 {
                c.get(p, q1).unwrap()
            } else {
                let Some(partner) = c.get(p, q2) else {
                    continue;
                };
                (c.get(p, q1).unwrap() * s1 + partner * s2) / family_norm_sq(basis, p, q)
            };
            table.insert(p, q, v).expect("valid index");
        }
    }
    table
}

/// Pointwise sum of coefficient times basis element on the given grid.
pub fn synthesize(table: &CoeffTable, grid: SinoGrid) -> Result<Sinogram> {
    let basis = table.basis();
    let (pmax, qmax) = band(grid);
    let mut c = PhiCoeffs::zeros(pmax, qmax);
    for (&(p, q), &v) in table.iter() {
        for (qq, s) in terms(basis, p, q) {
            if s == 0.0 {
                continue;
            }
            let Some(o) = c.offset(p, qq) else {
                return Err(Error::OutOfRange(format!(
                    "coefficient ({p},{q}) of family {} is outside the band of a {}x{} grid",
                    basis.name(),
                    grid.nbeta,
                    grid.nalpha
                )));
            };
            c.data[o] += v * s;
        }
    }
    Ok(from_phi(&c, grid, basis.is_primed()))
}

/// Applies a multiplier to every fiber (fixed `beta`) of a boundary field.
fn fiber_multiplier(f: &BoundaryField, m: impl Fn(Option<i64>) -> C64 + Sync) -> BoundaryField {
    let n = f.nalphafull();
    let mut buf = f.values().to_vec();
    let fwd = fft::plan(n, false);
    let inv = fft::plan(n, true);
    let mult: Vec<C64> = (0..n)
        .map(|j| m(fft::signed_freq(j, n)) / n as f64)
        .collect();
    buf.par_chunks_mut(n).for_each(|row| {
        fwd.process(row);
        for (v, w) in row.iter_mut().zip(&mult) {
            *v *= w;
        }
        inv.process(row);
    });
    BoundaryField::from_values(f.grid(), buf).expect("same size")
}

fn hilbert_symbol(k: Option<i64>, keep: impl Fn(i64) -> bool) -> C64 {
    match k {
        Some(k) if keep(k) => C64::new(0.0, -(k.signum() as f64)),
        _ => C64::new(0.0, 0.0),
    }
}

/// Fiberwise Hilbert transform: mode `k` times `-i sgn(k)`.
pub fn hilbert_fiber(f: &BoundaryField) -> BoundaryField {
    fiber_multiplier(f, |k| hilbert_symbol(k, |_| true))
}

/// Hilbert transform restricted to even fiber modes.
pub fn hilbert_even(f: &BoundaryField) -> BoundaryField {
    fiber_multiplier(f, |k| hilbert_symbol(k, |k| k % 2 == 0))
}

/// Hilbert transform restricted to odd fiber modes.
pub fn hilbert_odd(f: &BoundaryField) -> BoundaryField {
    fiber_multiplier(f, |k| hilbert_symbol(k, |k| k % 2 != 0))
}

/// `(H+ f, H- f)`.
pub fn hilbert_split(f: &BoundaryField) -> (BoundaryField, BoundaryField) {
    (hilbert_even(f), hilbert_odd(f))
}

/// Result of checking the complex-conjugation identities of the families.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugationCheck {
    pub p: i32,
    pub q: i32,
    /// Families whose identities were evaluated (those for which `(p,q)` is reduced).
    pub families: Vec<Basis>,
    pub max_deviation: f64,
}

/// Verifies on the grid
///
/// * `conj(u_{p,q})  =  u_{-p,-q}    = (-1)^p u_{-p,-p+q}`
/// * `conj(v_{p,q})  =  v_{-p,-q}    = -(-1)^p v_{-p,-p+q}`
/// * `conj(u'_{p,q}) =  u'_{-p,-q-1} = (-1)^p u'_{-p,-p+q}`
/// * `conj(v'_{p,q}) =  v'_{-p,-q-1} = -(-1)^p v'_{-p,-p+q}`
pub fn conjugate_identities_check(p: i32, q: i32, grid: SinoGrid) -> Result<ConjugationCheck> {
    let s = sign_pow(p);
    let fams: Vec<Basis> = [Basis::U, Basis::V, Basis::UPrime, Basis::VPrime]
        .into_iter()
        .filter(|f| f.is_valid(p, q))
        .collect();
    if fams.is_empty() {
        return Err(Error::OutOfRange(format!(
            "({p},{q}) is not reduced for any family"
        )));
    }
    let mut dev: f64 = 0.0;
    for b in 0..grid.nbeta {
        for a in 0..grid.nalpha {
            let (be, al) = (grid.beta(b), grid.alpha(a));
            let ev = |f, p, q| eval_family(f, p, q, be, al);
            for &f in &fams {
                let lhs = ev(f, p, q).conj();
                let (r1, r2) = match f {
                    Basis::U => (ev(f, -p, -q), ev(f, -p, q - p) * s),
                    Basis::V => (ev(f, -p, -q), ev(f, -p, q - p) * -s),
                    Basis::UPrime => (ev(f, -p, -q - 1), ev(f, -p, q - p) * s),
                    _ => (ev(f, -p, -q - 1), ev(f, -p, q - p) * -s),
                };
                dev = dev.max((lhs - r1).norm()).max((lhs - r2).norm());
            }
        }
    }
    Ok(ConjugationCheck {
        p,
        q,
        families: fams,
        max_deviation: dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid() -> SinoGrid {
        SinoGrid::new(32, 16).unwrap()
    }

    fn random_table(basis: Basis, grid: SinoGrid, seed: u64) -> CoeffTable {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (pm, qm) = band(grid);
        let mut t = CoeffTable::new(basis);
        for p in -pm..=pm {
            for q in -qm..=qm {
                if basis.is_valid(p, q) {
                    let [_, (q2, s2)] = terms(basis, p, q);
                    if s2 != 0.0 && q2.abs() > qm {
                        continue;
                    }
                    let c = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    t.insert(p, q, c).unwrap();
                }
            }
        }
        t
    }

    #[test]
    fn element_examples() {
        let e = BasisElement::new(Basis::B, 0, 0).unwrap();
        assert!((e.eval(1.3, -0.4) - C64::new(1.0 / NORM, 0.0)).norm() < 1e-15);
        let e = BasisElement::new(Basis::UPrime, 0, 0).unwrap();
        for &(b, a) in &[(0.3, 0.2), (2.0, -1.1)] {
            let want = 2.0 * f64::cos(a) / NORM;
            assert!((e.eval(b, a) - want).norm() < 1e-15);
        }
        let e = BasisElement::new(Basis::V, 0, 1).unwrap();
        let a: f64 = 0.37;
        assert!((e.eval(0.1, a) - C64::new(0.0, 2.0 * (2.0 * a).sin() / NORM)).norm() < 1e-15);
        assert!(BasisElement::new(Basis::V, 2, 1).is_err());
        assert!(BasisElement::new(Basis::U, 2, 1).is_ok());
    }

    #[test]
    fn gram_matrix_is_identity() {
        let g = SinoGrid::new(64, 32).unwrap();
        let els: Vec<Sinogram> = (-8..=8)
            .flat_map(|p| (-8..=8).map(move |q| (p, q)))
            .map(|(p, q)| BasisElement::new(Basis::B, p, q).unwrap().sample(g))
            .collect();
        let mut worst: f64 = 0.0;
        for (i, x) in els.iter().enumerate() {
            for (j, y) in els.iter().enumerate().skip(i) {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((x.inner(y) - want).norm());
            }
        }
        assert!(worst < 1e-10, "gram deviation {worst}");
    }

    #[test]
    fn analyze_single_element() {
        let g = grid();
        let d = BasisElement::new(Basis::B, 2, 1).unwrap().sample(g);
        let t = analyze(&d, Basis::B);
        for (&(p, q), c) in t.iter() {
            let want = if (p, q) == (2, 1) { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-12, "({p},{q}) -> {c}");
        }
    }

    #[test]
    fn analyze_cos_in_uprime() {
        let g = grid();
        let d = Sinogram::from_fn(g, |_, a| C64::new(2.0 * a.cos() / NORM, 0.0));
        let t = analyze(&d, Basis::UPrime);
        // oracle: direct quadrature of <D, u'_00> / ||u'_00||^2 on a finer grid
        let fine = SinoGrid::new(64, 400).unwrap();
        let e = BasisElement::new(Basis::UPrime, 0, 0).unwrap();
        let df = Sinogram::from_fn(fine, |_, a| C64::new(2.0 * a.cos() / NORM, 0.0));
        let oracle = df.inner(&e.sample(fine)) / e.grid_norm_sq(fine);
        assert!((oracle - 1.0).norm() < 1e-12);
        assert!((t.at(0, 0) - oracle).norm() < 1e-12);
        for (&(p, q), c) in t.iter() {
            if (p, q) != (0, 0) {
                assert!(c.norm() < 1e-12, "({p},{q}) -> {c}");
            }
        }
    }

    #[test]
    fn analysis_synthesis_inverse_pair() {
        let g = grid();
        for (i, basis) in Basis::ALL.into_iter().enumerate() {
            let t = random_table(basis, g, i as u64);
            let back = analyze(&synthesize(&t, g).unwrap(), basis);
            for (&(p, q), c) in t.iter() {
                assert!((back.at(p, q) - c).norm() < 1e-12, "{basis:?} ({p},{q})");
            }
        }
    }

    #[test]
    fn synthesize_rejects_out_of_band() {
        let mut t = CoeffTable::new(Basis::B);
        t.insert(16, 0, C64::new(1.0, 0.0)).unwrap();
        assert!(synthesize(&t, grid()).is_err());
        let mut t = CoeffTable::new(Basis::U);
        t.insert(10, 5, C64::new(1.0, 0.0)).unwrap();
        assert!(synthesize(&t, grid()).is_ok());
        // partner index p - q = -8 leaves the band |q| <= 7
        let mut t = CoeffTable::new(Basis::U);
        t.insert(-9, -1, C64::new(1.0, 0.0)).unwrap();
        assert!(synthesize(&t, grid()).is_err());
    }

    #[test]
    fn numerical_norms_match_combinatorial() {
        let g = SinoGrid::new(32, 32).unwrap();
        for basis in [Basis::U, Basis::V, Basis::UPrime, Basis::VPrime] {
            for p in -5..=5 {
                for q in -3..=3 {
                    let Ok(e) = BasisElement::new(basis, p, q) else {
                        continue;
                    };
                    let (num, comb) = (e.grid_norm_sq(g), e.norm_sq());
                    assert!(
                        (num - comb).abs() < 1e-12,
                        "{basis:?} ({p},{q}) {num} {comb}"
                    );
                }
            }
        }
        assert_eq!(family_norm_sq(Basis::U, 4, 2), 4.0);
        assert_eq!(family_norm_sq(Basis::VPrime, 5, 2), 4.0);
        assert_eq!(family_norm_sq(Basis::UPrime, 2, 1), 2.0);
        assert_eq!(family_norm_sq(Basis::UPrime, 3, 1), 0.0);
    }

    #[test]
    fn redundancy_identities() {
        let g = grid();
        for p in -4..=4 {
            for q in -3..=3 {
                let s = sign_pow(p);
                for b in 0..g.nbeta {
                    for a in 0..g.nalpha {
                        let (be, al) = (g.beta(b), g.alpha(a));
                        let ev = |f, p, q| eval_family(f, p, q, be, al);
                        assert!((ev(Basis::U, p, p - q) - ev(Basis::U, p, q) * s).norm() < 1e-12);
                        assert!((ev(Basis::V, p, p - q) + ev(Basis::V, p, q) * s).norm() < 1e-12);
                        let (u1, u2) = (ev(Basis::UPrime, p, p - q - 1), ev(Basis::UPrime, p, q));
                        assert!((u1 - u2 * s).norm() < 1e-12);
                        let (v1, v2) = (ev(Basis::VPrime, p, p - q - 1), ev(Basis::VPrime, p, q));
                        assert!((v1 + v2 * s).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn conjugation_identities() {
        let g = grid();
        let c = conjugate_identities_check(1, 1, g).unwrap();
        assert!(c.max_deviation < 1e-12);
        // the sign (-1)^p = -1 at p = 1
        let (be, al) = (0.4, 0.3);
        let lhs = eval_family(Basis::U, 1, 1, be, al).conj();
        assert!((lhs + eval_family(Basis::U, -1, 0, be, al)).norm() < 1e-15);
        assert!(conjugate_identities_check(0, 1, g).unwrap().max_deviation < 1e-12);
        assert!(conjugate_identities_check(2, 2, g).unwrap().max_deviation < 1e-12);
        assert!(conjugate_identities_check(5, 1, g).is_err());
    }

    #[test]
    fn hilbert_examples() {
        let g = grid();
        let e1 = BoundaryField::from_fn(g, |_, a| C64::from_polar(1.0, a));
        let h = hilbert_fiber(&e1);
        let want = BoundaryField::from_fn(g, |_, a| C64::new(0.0, -1.0) * C64::from_polar(1.0, a));
        assert!(h.max_diff(&want) < 1e-13);
        let cos = BoundaryField::from_fn(g, |_, a| C64::new(a.cos(), 0.0));
        let sin = BoundaryField::from_fn(g, |_, a| C64::new(a.sin(), 0.0));
        assert!(hilbert_fiber(&cos).max_diff(&sin) < 1e-13);
        let one = BoundaryField::from_fn(g, |_, _| C64::new(1.0, 0.0));
        assert!(hilbert_fiber(&one).max_diff(&BoundaryField::zeros(g)) < 1e-14);
        let e2 = BoundaryField::from_fn(g, |_, a| C64::from_polar(1.0, 2.0 * a));
        let (hp, hm) = hilbert_split(&e2);
        assert!(hp.max_diff(&hilbert_fiber(&e2)) < 1e-13);
        assert!((hp.get(3, 5) - C64::new(0.0, -1.0) * e2.get(3, 5)).norm() < 1e-13);
        assert!(hm.max_diff(&BoundaryField::zeros(g)) < 1e-13);
        let em1 = BoundaryField::from_fn(g, |_, a| C64::from_polar(1.0, -a));
        let want = BoundaryField::from_fn(g, |_, a| C64::new(0.0, 1.0) * C64::from_polar(1.0, -a));
        assert!(hilbert_odd(&em1).max_diff(&want) < 1e-13);
    }

    #[test]
    fn hilbert_squared_removes_mean() {
        let g = grid();
        let f = BoundaryField::from_fn(g, |b, a| {
            C64::new(
                1.5 + (3.0 * a).cos() - (a + b).sin(),
                (2.0 * a).sin() * b.cos(),
            )
        });
        let hh = hilbert_fiber(&hilbert_fiber(&f));
        let n = f.nalphafull();
        for b in 0..g.nbeta {
            let mean: C64 = (0..n).map(|a| f.get(b, a)).sum::<C64>() / n as f64;
            for a in 0..n {
                assert!((hh.get(b, a) + f.get(b, a) - mean).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn change_of_basis_series_converges() {
        // phi'_{p,q} = sum_l 2 sqrt2 (-1)^l / (1 - 2l) phi_{p,q+l} / (pi sqrt2), truncated at |l| <= L
        let g = SinoGrid::new(16, 512).unwrap();
        let (p, q) = (1, 0);
        let target = BasisElement::new(Basis::BPrime, p, q).unwrap().sample(g);
        let mut errs = Vec::new();
        for l_max in [4, 16, 64] {
            let mut t = CoeffTable::new(Basis::B);
            for l in -l_max..=l_max {
                let c = 2.0 * SQRT_2 * sign_pow(l) / ((1 - 2 * l) as f64) / NORM;
                t.insert(p, l + q, C64::new(c, 0.0)).unwrap();
            }
            let approx = synthesize(&t, g).unwrap();
            errs.push(approx.sub(&target).unwrap().norm());
        }
        assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
        assert!(errs[2] < 0.1);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn hilbert_split_sums_to_hilbert(seed in 0u64..1000) {
            let g = SinoGrid::new(8, 8).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let vals = (0..2 * g.len())
                .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let f = BoundaryField::from_values(g, vals).unwrap();
            let (hp, hm) = hilbert_split(&f);
            let sum = BoundaryField::from_values(
                g,
                hp.values().iter().zip(hm.values()).map(|(a, b)| a + b).collect(),
            ).unwrap();
            prop_assert!(sum.max_diff(&hilbert_fiber(&f)) < 1e-12);
        }
    }
}
