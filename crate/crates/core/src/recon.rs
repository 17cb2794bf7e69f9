//! Reconstruction of the distinguished representative `g` with `I g = D`:
//! filtered backprojection for the central harmonic and boundary (Cauchy-type)
//! integrals for the holomorphic and antiholomorphic side harmonics.

use crate::boundary::{a_plus_h_a_minus, project_range_iperp_core, project_vpm, Sign};
use crate::consistency::Side;
use crate::error::{invalid, Result};
use crate::fiber::{analyze, band};
use crate::forward::{
    backproject_i0, backproject_iperp, xperp_tensor, xray, Derivative, QuadratureSpec,
    QualityReport,
};
use crate::grid::{Basis, DiskImage, ImageGrid, Sinogram, TensorField};
use crate::C64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

/// How the boundary integrals of the side harmonics are evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideMethod {
    /// Direct trapezoid sum of the kernel over the `beta` grid, for `|z| <= r_cut`,
    /// tapered linearly to zero on `r_cut < |z| <= 1`.
    Cauchy,
    /// The same integral expanded in powers of `z` (or `z bar`), truncated; valid up to the circle.
    PowerSeries,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReconstructionConfig {
    pub output: ImageGrid,
    pub r_cut: f64,
    pub method: SideMethod,
    /// Number of power-series terms; `None` uses `nalpha / 2`.
    pub series_terms: Option<usize>,
    /// Symmetrize the demodulated data before the side-harmonic integrals.
    pub half_sum: bool,
    /// Quadrature used when re-simulating data from a reconstruction.
    pub quadrature: QuadratureSpec,
}

impl ReconstructionConfig {
    pub fn new(output: ImageGrid) -> Self {
        Self {
            output,
            r_cut: 0.97,
            method: SideMethod::PowerSeries,
            series_terms: None,
            half_sum: false,
            quadrature: QuadratureSpec::default_for(output),
        }
    }

    pub fn with_r_cut(mut self, r_cut: f64) -> Result<Self> {
        if !(r_cut > 0.0 && r_cut < 1.0) {
            return invalid(format!("r_cut must lie in (0, 1), got {r_cut}"));
        }
        self.r_cut = r_cut;
        Ok(self)
    }

    pub fn with_method(mut self, method: SideMethod) -> Self {
        self.method = method;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shape {
    /// `(1 - t)^{-2} = sum (k+1) t^k`
    Square,
    /// `t / (1 - t) = sum_{k >= 1} t^k`
    Geometric,
}

impl Shape {
    fn eval(self, t: C64) -> C64 {
        let one = C64::new(1.0, 0.0);
        match self {
            Shape::Square => one / ((one - t) * (one - t)),
            Shape::Geometric => t / (one - t),
        }
    }

    fn series(self, k: usize) -> f64 {
        match self {
            Shape::Square => (k + 1) as f64,
            Shape::Geometric => (k >= 1) as u8 as f64,
        }
    }
}

/// `g(z) = sum_b w_b K(zeta e^{-+i beta_b})` with `zeta = z` (holomorphic, minus sign)
/// or `zeta = z bar` (antiholomorphic, plus sign).
struct BoundaryIntegral {
    side: Side,
    shape: Shape,
    betas: Vec<f64>,
    weights: Vec<C64>,
}

impl BoundaryIntegral {
    /// Weights `scale * d_beta * e^{-i m beta} * int D e^{i w alpha} d alpha`.
    fn new(d: &Sinogram, side: Side, shape: Shape, scale: C64, m: i32, w: i32) -> Self {
        let g = d.grid();
        let rows: Vec<C64> = (0..g.nbeta)
            .into_par_iter()
            .map(|b| {
                let row: C64 = (0..g.nalpha)
                    .map(|a| d.get(b, a) * C64::from_polar(1.0, w as f64 * g.alpha(a)))
                    .sum();
                row * g.d_alpha()
                    * g.d_beta()
                    * scale
                    * C64::from_polar(1.0, -(m as f64) * g.beta(b))
            })
            .collect();
        Self {
            side,
            shape,
            betas: (0..g.nbeta).map(|b| g.beta(b)).collect(),
            weights: rows,
        }
    }

    fn unit(&self, beta: f64) -> C64 {
        match self.side {
            Side::Holomorphic => C64::from_polar(1.0, -beta),
            Side::Antiholomorphic => C64::from_polar(1.0, beta),
        }
    }

    fn zeta(&self, z: C64) -> C64 {
        match self.side {
            Side::Holomorphic => z,
            Side::Antiholomorphic => z.conj(),
        }
    }

    fn cauchy(&self, z: C64) -> C64 {
        let zeta = self.zeta(z);
        self.betas
            .iter()
            .zip(&self.weights)
            .map(|(&b, &w)| w * self.shape.eval(zeta * self.unit(b)))
            .sum()
    }

    /// Coefficients of `zeta^k`, `k < terms`.
    fn coefficients(&self, terms: usize) -> Vec<C64> {
        (0..terms)
            .into_par_iter()
            .map(|k| {
                let c = self.shape.series(k);
                if c == 0.0 {
                    return C64::new(0.0, 0.0);
                }
                let s: C64 = self
                    .betas
                    .iter()
                    .zip(&self.weights)
                    .map(|(&b, &w)| w * self.unit(b).powi(k as i32))
                    .sum();
                s * c
            })
            .collect()
    }

    fn evaluate(&self, cfg: &ReconstructionConfig, terms: usize) -> DiskImage {
        match cfg.method {
            SideMethod::Cauchy => {
                let rc = cfg.r_cut;
                DiskImage::from_fn(cfg.output, |x, y| {
                    let z = C64::new(x, y);
                    let r = z.norm();
                    if r <= rc {
                        self.cauchy(z)
                    } else if r < 1.0 {
                        self.cauchy(z * (rc / r)) * ((1.0 - r) / (1.0 - rc))
                    } else {
                        C64::new(0.0, 0.0)
                    }
                })
            }
            SideMethod::PowerSeries => {
                let c = self.coefficients(terms);
                DiskImage::from_fn(cfg.output, |x, y| horner(&c, self.zeta(C64::new(x, y))))
            }
        }
    }
}

fn horner(c: &[C64], z: C64) -> C64 {
    c.iter()
        .rev()
        .fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

fn parity(m: i32) -> f64 {
    if m.rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

fn series_terms(d: &Sinogram, cfg: &ReconstructionConfig) -> usize {
    cfg.series_terms.unwrap_or(d.nalpha() / 2).max(1)
}

/// `(-1)^m e^{-i m (beta + alpha)} D`: turns `I[f e^{i m theta}]` into `I0 f`.
pub fn demodulate(d: &Sinogram, m: i32) -> Sinogram {
    let s = parity(m);
    d.map_indexed(|b, a, v| v * C64::from_polar(s, -(m as f64) * (b + a)))
}

/// The (anti)holomorphic function `f` with `I[f e^{i m theta}]` the
/// corresponding range component of `D`.
pub fn reconstruct_harmonic(
    d: &Sinogram,
    m: i32,
    side: Side,
    cfg: &ReconstructionConfig,
) -> DiskImage {
    let scale = C64::new(1.0 / (2.0 * PI * PI), 0.0);
    let terms = series_terms(d, cfg);
    let bi = if cfg.half_sum {
        let d0 = project_vpm(&demodulate(d, m), Sign::Plus);
        let w = if side == Side::Holomorphic { 1 } else { -1 };
        BoundaryIntegral::new(&d0, side, Shape::Square, scale, 0, w)
    } else {
        let w = match side {
            Side::Holomorphic => 1 - m,
            Side::Antiholomorphic => -1 - m,
        };
        BoundaryIntegral::new(d, side, Shape::Square, scale * parity(m), m, w)
    };
    bi.evaluate(cfg, terms)
}

/// Holomorphic `f` from `I0 f`.
pub fn invert_holo(d: &Sinogram, cfg: &ReconstructionConfig) -> DiskImage {
    reconstruct_harmonic(d, 0, Side::Holomorphic, cfg)
}

/// Antiholomorphic `f` from `I0 f`.
pub fn invert_antiholo(d: &Sinogram, cfg: &ReconstructionConfig) -> DiskImage {
    reconstruct_harmonic(d, 0, Side::Antiholomorphic, cfg)
}

/// Taylor coefficients `a_k`, `k <= k_max`, of a holomorphic `f` from the `u'_{k,k}`
/// coefficients of `I0 f`. Indices beyond the data band are returned as zero.
pub fn coefficient_recovery_holo(d: &Sinogram, k_max: usize) -> Vec<C64> {
    let t = analyze(d, Basis::UPrime);
    let (pm, qm) = band(d.grid());
    (0..=k_max as i32)
        .map(|k| {
            if k > pm.min(qm) {
                return C64::new(0.0, 0.0);
            }
            t.at(k, k) * (parity(k) * (k + 1) as f64 / (PI * SQRT_2))
        })
        .collect()
}

/// Coefficients `b_k` of `f = sum b_k z bar^k` from the `u'_{-k,0}` coefficients of `I0 f`.
pub fn coefficient_recovery_antiholo(d: &Sinogram, k_max: usize) -> Vec<C64> {
    let t = analyze(d, Basis::UPrime);
    let (pm, _) = band(d.grid());
    (0..=k_max as i32)
        .map(|k| {
            if k > pm {
                C64::new(0.0, 0.0)
            } else {
                t.at(-k, 0) * ((k + 1) as f64 / (PI * SQRT_2))
            }
        })
        .collect()
}

/// Evaluates `sum c_k z^k` (holomorphic) or `sum c_k z bar^k` on the grid.
pub fn eval_power_series(coeffs: &[C64], side: Side, grid: ImageGrid) -> DiskImage {
    DiskImage::from_fn(grid, |x, y| {
        let z = C64::new(x, y);
        horner(
            coeffs,
            if side == Side::Holomorphic {
                z
            } else {
                z.conj()
            },
        )
    })
}

/// Constant of both central formulas, fixed by round trips on smooth compact
/// phantoms: the backprojections here carry a `1/2pi` factor.
const CENTRAL_SCALE: f64 = -0.25;

/// Central harmonic of an even tensor: `c I_perp# A+* H A- D` with `c = -1/4`.
pub fn reconstruct_g0_even(d: &Sinogram, output: ImageGrid) -> DiskImage {
    let (img, _) = backproject_iperp(&a_plus_h_a_minus(d), output);
    img.scale(C64::new(CENTRAL_SCALE, 0.0))
}

/// `g_{+-2k}` for `k >= 1`: `Plus` gives the holomorphic `g_{2k}`, `Minus` the antiholomorphic `g_{-2k}`.
pub fn reconstruct_sidek_even(
    d: &Sinogram,
    k: u32,
    sign: Sign,
    cfg: &ReconstructionConfig,
) -> Result<DiskImage> {
    side_k(d, 2 * k as i32, k, sign, cfg)
}

/// `g_{+-(2k+1)}` for `k >= 1`.
pub fn reconstruct_sidek_odd(
    d: &Sinogram,
    k: u32,
    sign: Sign,
    cfg: &ReconstructionConfig,
) -> Result<DiskImage> {
    side_k(d, 2 * k as i32 + 1, k, sign, cfg)
}

fn side_k(
    d: &Sinogram,
    m: i32,
    k: u32,
    sign: Sign,
    cfg: &ReconstructionConfig,
) -> Result<DiskImage> {
    if k == 0 {
        return invalid("side harmonics start at k = 1");
    }
    Ok(match sign {
        Sign::Plus => reconstruct_harmonic(d, m, Side::Holomorphic, cfg),
        Sign::Minus => reconstruct_harmonic(d, -m, Side::Antiholomorphic, cfg),
    })
}

/// Replaces the components by an exactly conjugation-symmetric set when the data
/// are real and the reconstruction is symmetric to within `1e-8`.
fn finish_tensor(
    order: u32,
    grid: ImageGrid,
    mut comps: BTreeMap<i32, DiskImage>,
    real_data: bool,
) -> TensorField {
    if real_data {
        let t = TensorField::new(order, grid, comps.clone(), false).expect("valid keys");
        let scale = comps
            .values()
            .map(|c| c.max_abs())
            .fold(0.0, f64::max)
            .max(1e-300);
        if t.realness_deviation() <= 1e-8 * scale {
            let keys: Vec<i32> = comps.keys().copied().filter(|&k| k >= 0).collect();
            for k in keys {
                if k == 0 {
                    let re = comps[&0].map(|v| C64::new(v.re, 0.0));
                    comps.insert(0, re);
                } else if let Some(pos) = comps.get(&k).cloned() {
                    let neg = comps
                        .get(&-k)
                        .cloned()
                        .unwrap_or_else(|| DiskImage::zeros(grid));
                    let avg = pos
                        .add(&neg.conj())
                        .expect("same grid")
                        .scale(C64::new(0.5, 0.0));
                    comps.insert(-k, avg.conj());
                    comps.insert(k, avg);
                }
            }
            return TensorField::new(order, grid, comps, true).expect("symmetric");
        }
    }
    TensorField::new(order, grid, comps, false).expect("valid keys")
}

fn is_real(d: &Sinogram) -> bool {
    d.values().iter().all(|v| v.im == 0.0)
}

/// Even tensor of order `2n`: `g_0` by filtered backprojection, `g_{+-2k}` by boundary integrals.
pub fn reconstruct_even(d: &Sinogram, n: u32, cfg: &ReconstructionConfig) -> TensorField {
    let mut comps = BTreeMap::new();
    comps.insert(0, reconstruct_g0_even(d, cfg.output));
    for k in 1..=n {
        let m = 2 * k as i32;
        comps.insert(m, reconstruct_harmonic(d, m, Side::Holomorphic, cfg));
        comps.insert(-m, reconstruct_harmonic(d, -m, Side::Antiholomorphic, cfg));
    }
    finish_tensor(2 * n, cfg.output, comps, is_real(d))
}

/// The three parts of the potential of the odd central harmonic.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterOdd {
    /// Part vanishing on the boundary, `-(1/4) I0# A+* H A- (Id + (A-* H A-)^2) D`.
    pub g_center: DiskImage,
    /// Holomorphic part with `g(0) = 0`.
    pub g_minus: DiskImage,
    /// Antiholomorphic part with `g(0) = 0`.
    pub g_plus: DiskImage,
}

impl CenterOdd {
    pub fn potential(&self) -> DiskImage {
        self.g_center
            .add(&self.g_minus)
            .and_then(|s| s.add(&self.g_plus))
            .expect("same grid")
    }
}

pub fn reconstruct_g_center_odd(d: &Sinogram, cfg: &ReconstructionConfig) -> CenterOdd {
    let core = project_range_iperp_core(d);
    let g_center =
        backproject_i0(&a_plus_h_a_minus(&core), cfg.output).scale(C64::new(CENTRAL_SCALE, 0.0));
    let terms = series_terms(d, cfg);
    let src = if cfg.half_sum {
        project_vpm(d, Sign::Minus)
    } else {
        d.clone()
    };
    let i = C64::new(0.0, 1.0);
    let scale = 1.0 / (2.0 * PI * PI);
    let minus = BoundaryIntegral::new(&src, Side::Holomorphic, Shape::Geometric, -i * scale, 0, 0);
    let plus = BoundaryIntegral::new(
        &src,
        Side::Antiholomorphic,
        Shape::Geometric,
        i * scale,
        0,
        0,
    );
    CenterOdd {
        g_center,
        g_minus: minus.evaluate(cfg, terms),
        g_plus: plus.evaluate(cfg, terms),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OddReconstruction {
    /// Order `2n+1` tensor; harmonics `+-1` are `X_perp` of the potential.
    pub tensor: TensorField,
    pub center: CenterOdd,
    pub quality: QualityReport,
}

impl OddReconstruction {
    pub fn potential(&self) -> DiskImage {
        self.center.potential()
    }
}

/// Odd tensor of order `2n+1`.
pub fn reconstruct_odd(d: &Sinogram, n: u32, cfg: &ReconstructionConfig) -> OddReconstruction {
    let center = reconstruct_g_center_odd(d, cfg);
    let (xp, quality) = xperp_tensor(&center.potential(), Derivative::FiniteDifference);
    let mut comps: BTreeMap<i32, DiskImage> = xp.components().clone();
    for k in 1..=n {
        let m = 2 * k as i32 + 1;
        comps.insert(m, reconstruct_harmonic(d, m, Side::Holomorphic, cfg));
        comps.insert(-m, reconstruct_harmonic(d, -m, Side::Antiholomorphic, cfg));
    }
    let tensor = finish_tensor(2 * n + 1, cfg.output, comps, is_real(d));
    OddReconstruction {
        tensor,
        center,
        quality,
    }
}

/// `||I g - D|| / ||D||` (zero when both vanish).
pub fn data_match(d: &Sinogram, g: &TensorField, quad: &QuadratureSpec) -> f64 {
    let ig = xray(g, d.grid(), quad);
    let num = ig.sub(d).expect("same grid").norm();
    let den = d.norm();
    if den == 0.0 {
        if num == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{i0, i_m, iperp};
    use crate::grid::SinoGrid;
    use crate::phantoms::{gaussian, harmonic_re, monomial};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn setup(n: usize, nb: usize, na: usize) -> (ImageGrid, SinoGrid, QuadratureSpec) {
        let g = ImageGrid::square(n).unwrap();
        (
            g,
            SinoGrid::new(nb, na).unwrap(),
            QuadratureSpec::default_for(g),
        )
    }

    fn max_err_within(a: &DiskImage, b: &DiskImage, r: f64) -> f64 {
        let g = a.grid();
        let mut m: f64 = 0.0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                if g.x(i).hypot(g.y(j)) <= r {
                    m = m.max((a.get(i, j) - b.get(i, j)).norm());
                }
            }
        }
        m
    }

    fn rel_l2_within(a: &DiskImage, truth: &DiskImage, r: f64) -> f64 {
        (a.sub(truth).unwrap().norm_sq_within(r) / truth.norm_sq_within(r)).sqrt()
    }

    #[test]
    fn holo_inversion_examples() {
        let (g, sg, q) = setup(128, 256, 128);
        for method in [SideMethod::Cauchy, SideMethod::PowerSeries] {
            let cfg = ReconstructionConfig::new(g).with_method(method);
            let f = monomial(g, 3);
            let rec = invert_holo(&i0(&f, sg, &q), &cfg);
            assert!(max_err_within(&rec, &f, 0.9) < 1e-2, "{method:?}");
            let one = Sinogram::from_fn(sg, |_, a| c(2.0 * a.cos(), 0.0));
            let rec = invert_holo(&one, &cfg);
            assert!(max_err_within(&rec, &monomial(g, 0), 0.9) < 1e-3);
            let rec = invert_antiholo(&i0(&monomial(g, -2), sg, &q), &cfg);
            assert!(max_err_within(&rec, &monomial(g, -2), 0.9) < 1e-2);
            assert_eq!(invert_holo(&Sinogram::zeros(sg), &cfg).max_abs(), 0.0);
        }
    }

    #[test]
    fn holo_inversion_at_origin() {
        let sg = SinoGrid::new(64, 32).unwrap();
        let g = ImageGrid::square(3).unwrap();
        let one = Sinogram::from_fn(sg, |_, a| c(2.0 * a.cos(), 0.0));
        let rec = invert_holo(
            &one,
            &ReconstructionConfig::new(g).with_method(SideMethod::Cauchy),
        );
        assert!((rec.get(1, 1) - c(1.0, 0.0)).norm() < 1e-3);
    }

    #[test]
    fn coefficient_recovery() {
        let (g, sg, q) = setup(128, 128, 64);
        let a = coefficient_recovery_holo(&i0(&monomial(g, 3), sg, &q), 6);
        for (k, v) in a.iter().enumerate() {
            let want = if k == 3 { 1.0 } else { 0.0 };
            assert!((v - c(want, 0.0)).norm() < 1e-4, "a_{k} = {v}");
        }
        let one = Sinogram::from_fn(sg, |_, a| c(2.0 * a.cos(), 0.0));
        assert!((coefficient_recovery_holo(&one, 2)[0] - c(1.0, 0.0)).norm() < 1e-6);
        assert!(coefficient_recovery_holo(&Sinogram::zeros(sg), 4)
            .iter()
            .all(|v| v.norm() == 0.0));
        let b = coefficient_recovery_antiholo(&i0(&monomial(g, -2), sg, &q), 4);
        assert!((b[2] - c(1.0, 0.0)).norm() < 1e-4, "{}", b[2]);
        assert!(b[1].norm() < 1e-4 && b[3].norm() < 1e-4);
    }

    #[test]
    fn side_harmonics() {
        let (g, sg, q) = setup(128, 256, 128);
        let cfg = ReconstructionConfig::new(g);
        let z2 = monomial(g, 2);
        let d = i_m(&z2, 2, sg, &q);
        let rec = reconstruct_sidek_even(&d, 1, Sign::Plus, &cfg).unwrap();
        assert!(max_err_within(&rec, &z2, 0.9) < 1e-2);
        let z = monomial(g, 1);
        let d = i_m(&z, 3, sg, &q);
        let rec = reconstruct_sidek_odd(&d, 1, Sign::Plus, &cfg).unwrap();
        assert!(max_err_within(&rec, &z, 0.9) < 1e-2);
        let zb = monomial(g, -1);
        let d = i_m(&zb, -3, sg, &q);
        let rec = reconstruct_sidek_odd(&d, 1, Sign::Minus, &cfg).unwrap();
        assert!(max_err_within(&rec, &zb, 0.9) < 1e-2);
        let radial = gaussian(g, (0.0, 0.0), 0.2, 1.0).unwrap();
        let rec = reconstruct_sidek_even(&i0(&radial, sg, &q), 1, Sign::Plus, &cfg).unwrap();
        assert!(rec.max_abs() < 1e-3, "{}", rec.max_abs());
        assert!(reconstruct_sidek_even(&d, 0, Sign::Plus, &cfg).is_err());
        assert_eq!(
            reconstruct_sidek_even(&Sinogram::zeros(sg), 2, Sign::Minus, &cfg)
                .unwrap()
                .max_abs(),
            0.0
        );
    }

    #[test]
    fn half_sum_matches_single_term_on_consistent_data() {
        let (g, sg, q) = setup(96, 128, 64);
        let cfg = ReconstructionConfig::new(g);
        let mut hs = cfg;
        hs.half_sum = true;
        let d = i_m(&monomial(g, 2), 2, sg, &q);
        let a = reconstruct_harmonic(&d, 2, Side::Holomorphic, &cfg);
        let b = reconstruct_harmonic(&d, 2, Side::Holomorphic, &hs);
        assert!(max_err_within(&a, &b, 0.9) < 1e-3);
    }

    #[test]
    fn central_even() {
        let (g, sg, q) = setup(128, 256, 128);
        let f = gaussian(g, (0.1, -0.2), 0.12, 1.0).unwrap();
        let rec = reconstruct_g0_even(&i0(&f, sg, &q), g);
        assert!(
            rel_l2_within(&rec, &f, 0.9) < 2e-2,
            "{}",
            rel_l2_within(&rec, &f, 0.9)
        );
        let d = i_m(&monomial(g, 2), 2, sg, &q);
        let rec = reconstruct_g0_even(&d, g);
        let mut inner = 0.0f64;
        for i in 0..g.nx {
            for j in 0..g.ny {
                if g.x(i).hypot(g.y(j)) <= 0.9 {
                    inner = inner.max(rec.get(i, j).norm());
                }
            }
        }
        assert!(inner < 1e-2, "{inner}");
        assert_eq!(reconstruct_g0_even(&Sinogram::zeros(sg), g).max_abs(), 0.0);
    }

    #[test]
    fn central_odd() {
        let (g, sg, q) = setup(128, 256, 128);
        let cfg = ReconstructionConfig::new(g);
        let h = gaussian(g, (-0.1, 0.15), 0.12, 1.0).unwrap();
        let (d, _) = iperp(&h, sg, &q, Derivative::FiniteDifference);
        let r = reconstruct_g_center_odd(&d, &cfg);
        assert!(
            rel_l2_within(&r.g_center, &h, 0.9) < 2e-2,
            "{}",
            rel_l2_within(&r.g_center, &h, 0.9)
        );
        assert!(r.g_minus.max_abs() < 1e-3 && r.g_plus.max_abs() < 1e-3);
        let re3 = harmonic_re(g, 3);
        let grad = |x: f64, y: f64| (c(3.0 * (x * x - y * y), 0.0), c(-6.0 * x * y, 0.0));
        let (d, _) = iperp(&re3, sg, &q, Derivative::Analytic(&grad));
        let r = reconstruct_g_center_odd(&d, &cfg);
        let half = |k: i32| monomial(g, k).scale(c(0.5, 0.0));
        assert!(max_err_within(&r.g_minus, &half(3), 0.95) < 2e-2);
        assert!(max_err_within(&r.g_plus, &half(-3), 0.95) < 2e-2);
        let z = reconstruct_g_center_odd(&Sinogram::zeros(sg), &cfg);
        assert_eq!(z.potential().max_abs(), 0.0);
    }

    #[test]
    fn realness_and_data_match() {
        let (g, sg, q) = setup(64, 128, 64);
        let cfg = ReconstructionConfig::new(g);
        let p = crate::phantoms::experiment_preset(1, g).unwrap();
        let d = xray(&p.tensor, sg, &q);
        let rec = reconstruct_even(&d, 1, &cfg);
        assert!(rec.is_real());
        assert!(rec.realness_deviation() == 0.0);
        assert_eq!(
            rec.components().keys().copied().collect::<Vec<_>>(),
            vec![-2, 0, 2]
        );
        assert!(data_match(&d, &rec, &q) < 0.1);
        let z = Sinogram::zeros(sg);
        assert_eq!(data_match(&z, &reconstruct_even(&z, 1, &cfg), &q), 0.0);
        assert!(ReconstructionConfig::new(g).with_r_cut(1.0).is_err());
    }
}
