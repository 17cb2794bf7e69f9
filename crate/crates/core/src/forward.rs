//! X-ray transforms of tensor fields and the backprojections `I0#`, `Iperp#`.
//!
//! Chord integrals use the composite midpoint rule with `ceil(L * spu)` nodes.
//! Images are interpolated bilinearly. Near the mask edge, where a bilinear
//! stencil would reach masked-out pixels, the value is extrapolated radially by
//! a quadratic through three interior samples, so functions that do not vanish
//! on the circle keep second-order accuracy up to the boundary.

use crate::error::{invalid, Result};
use crate::grid::{DiskImage, ImageGrid, SinoGrid, Sinogram, TensorField};
use crate::C64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Chord quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    samples_per_unit: f64,
}

impl QuadratureSpec {
    pub fn new(samples_per_unit: f64, grid: ImageGrid) -> Result<Self> {
        if !(samples_per_unit >= grid.nx as f64) {
            return invalid(format!(
                "samples per unit length must be at least nx = {}, got {samples_per_unit}",
                grid.nx
            ));
        }
        Ok(Self { samples_per_unit })
    }

    /// `2 max(nx, ny)` samples per unit length.
    pub fn default_for(grid: ImageGrid) -> Self {
        Self {
            samples_per_unit: 2.0 * grid.nx.max(grid.ny) as f64,
        }
    }

    pub fn samples_per_unit(&self) -> f64 {
        self.samples_per_unit
    }

    fn nodes(&self, length: f64) -> usize {
        ((length * self.samples_per_unit).ceil() as usize).max(1)
    }
}

/// Interpolation weights at one point, shared by all components of a tensor.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    idx: [usize; 12],
    w: [f64; 12],
    n: usize,
}

impl Stencil {
    fn new() -> Self {
        Self {
            idx: [0; 12],
            w: [0.0; 12],
            n: 0,
        }
    }

    fn push(&mut self, idx: usize, w: f64) {
        self.idx[self.n] = idx;
        self.w[self.n] = w;
        self.n += 1;
    }

    #[inline]
    pub(crate) fn apply(&self, values: &[C64]) -> C64 {
        let mut s = C64::new(0.0, 0.0);
        for m in 0..self.n {
            s += values[self.idx[m]] * self.w[m];
        }
        s
    }
}

/// Boundary-aware bilinear interpolation on a masked pixel grid.
pub(crate) struct Sampler {
    grid: ImageGrid,
    /// Cell `(i, j)` (corners `i..=i+1`, `j..=j+1`) has all corners in the mask.
    interior: Vec<bool>,
    in_mask: Vec<bool>,
    r_safe: f64,
    h: f64,
    radial: bool,
}

impl Sampler {
    pub(crate) fn new(grid: ImageGrid) -> Self {
        let in_mask: Vec<bool> = (0..grid.len())
            .map(|k| grid.in_mask(k / grid.ny, k % grid.ny))
            .collect();
        let mut interior = vec![false; grid.len()];
        for i in 0..grid.nx - 1 {
            for j in 0..grid.ny - 1 {
                interior[grid.index(i, j)] = in_mask[grid.index(i, j)]
                    && in_mask[grid.index(i + 1, j)]
                    && in_mask[grid.index(i, j + 1)]
                    && in_mask[grid.index(i + 1, j + 1)];
            }
        }
        let (hx, hy) = (grid.hx(), grid.hy());
        let h = hx.max(hy);
        let r_safe = grid.r_mask - hx.hypot(hy) - 1e-12;
        Self {
            grid,
            interior,
            in_mask,
            r_safe,
            h,
            radial: r_safe - 2.0 * h > h,
        }
    }

    fn cell(&self, x: f64, y: f64) -> (i64, i64, f64, f64) {
        let fi = (x + 1.0) * self.grid.nx as f64 / 2.0 - 0.5;
        let fj = (y + 1.0) * self.grid.ny as f64 / 2.0 - 0.5;
        let (i0, j0) = (fi.floor(), fj.floor());
        (i0 as i64, j0 as i64, fi - i0, fj - j0)
    }

    fn is_interior(&self, i0: i64, j0: i64) -> bool {
        i0 >= 0
            && j0 >= 0
            && (i0 as usize) < self.grid.nx - 1
            && (j0 as usize) < self.grid.ny - 1
            && self.interior[self.grid.index(i0 as usize, j0 as usize)]
    }

    fn push_bilinear(&self, st: &mut Stencil, i0: i64, j0: i64, tx: f64, ty: f64, scale: f64) {
        let (i, j) = (i0 as usize, j0 as usize);
        let g = self.grid;
        st.push(g.index(i, j), scale * (1.0 - tx) * (1.0 - ty));
        st.push(g.index(i + 1, j), scale * tx * (1.0 - ty));
        st.push(g.index(i, j + 1), scale * (1.0 - tx) * ty);
        st.push(g.index(i + 1, j + 1), scale * tx * ty);
    }

    pub(crate) fn stencil(&self, x: f64, y: f64) -> Stencil {
        let mut st = Stencil::new();
        let (i0, j0, tx, ty) = self.cell(x, y);
        if self.is_interior(i0, j0) {
            self.push_bilinear(&mut st, i0, j0, tx, ty, 1.0);
            return st;
        }
        let r = x.hypot(y);
        if r > self.grid.r_mask {
            return st;
        }
        if self.radial && r > self.r_safe {
            let (ux, uy) = (x / r, y / r);
            let s = (r - self.r_safe) / self.h;
            let lag = [
                (s + 1.0) * (s + 2.0) / 2.0,
                -s * (s + 2.0),
                s * (s + 1.0) / 2.0,
            ];
            for (m, l) in lag.iter().enumerate() {
                let rm = self.r_safe - m as f64 * self.h;
                let (i0, j0, tx, ty) = self.cell(rm * ux, rm * uy);
                debug_assert!(self.is_interior(i0, j0));
                self.push_bilinear(&mut st, i0, j0, tx, ty, *l);
            }
            return st;
        }
        // tiny masks: renormalized bilinear over the corners inside the mask
        let g = self.grid;
        let mut total = 0.0;
        let corners = [
            (0, 0, (1.0 - tx) * (1.0 - ty)),
            (1, 0, tx * (1.0 - ty)),
            (0, 1, (1.0 - tx) * ty),
            (1, 1, tx * ty),
        ];
        for (di, dj, w) in corners {
            let (i, j) = (i0 + di, j0 + dj);
            if i < 0 || j < 0 || i as usize >= g.nx || j as usize >= g.ny {
                continue;
            }
            let k = g.index(i as usize, j as usize);
            if self.in_mask[k] && w > 0.0 {
                st.push(k, w);
                total += w;
            }
        }
        if total > 0.0 {
            for m in 0..st.n {
                st.w[m] /= total;
            }
        }
        st
    }
}

/// Interpolated value of an image at an arbitrary point of the disk.
pub fn sample_image(img: &DiskImage, x: f64, y: f64) -> C64 {
    Sampler::new(img.grid()).stencil(x, y).apply(img.values())
}

/// Chord integrals of all components for the ray `(beta, alpha)`.
fn ray_integrals(
    sampler: &Sampler,
    comps: &[&[C64]],
    beta: f64,
    alpha: f64,
    quad: &QuadratureSpec,
    out: &mut [C64],
) {
    let len = 2.0 * alpha.cos();
    let n = quad.nodes(len);
    let dt = len / n as f64;
    let th = beta + PI + alpha;
    let (x0, y0) = (beta.cos(), beta.sin());
    let (dx, dy) = (th.cos(), th.sin());
    out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
    for s in 0..n {
        let t = (s as f64 + 0.5) * dt;
        let st = sampler.stencil(x0 + t * dx, y0 + t * dy);
        for (o, c) in out.iter_mut().zip(comps) {
            *o += st.apply(c);
        }
    }
    out.iter_mut().for_each(|v| *v *= dt);
}

/// X-ray transform of a tensor field on the given data grid. Real tensors give real data.
pub fn xray(tensor: &TensorField, grid: SinoGrid, quad: &QuadratureSpec) -> Sinogram {
    let keys: Vec<i32> = tensor.components().keys().copied().collect();
    if keys.is_empty() {
        return Sinogram::zeros(grid);
    }
    let comps: Vec<&[C64]> = tensor.components().values().map(|c| c.values()).collect();
    let sampler = Sampler::new(tensor.grid());
    let real = tensor.is_real();
    let values = (0..grid.len())
        .into_par_iter()
        .map_init(
            || vec![C64::new(0.0, 0.0); keys.len()],
            |buf, idx| {
                let (beta, alpha) = (grid.beta(idx / grid.nalpha), grid.alpha(idx % grid.nalpha));
                ray_integrals(&sampler, &comps, beta, alpha, quad, buf);
                let th = beta + PI + alpha;
                let v: C64 = keys
                    .iter()
                    .zip(buf.iter())
                    .map(|(&k, &v)| v * C64::from_polar(1.0, k as f64 * th))
                    .sum();
                if real {
                    C64::new(v.re, 0.0)
                } else {
                    v
                }
            },
        )
        .collect();
    Sinogram::from_values(grid, values).expect("grid size")
}

/// X-ray transform along a single influx chord.
pub fn xray_ray(tensor: &TensorField, beta: f64, alpha: f64, quad: &QuadratureSpec) -> Result<C64> {
    if !(alpha.abs() < FRAC_PI_2) {
        return invalid(format!("ray needs |alpha| < pi/2, got {alpha}"));
    }
    let keys: Vec<i32> = tensor.components().keys().copied().collect();
    let comps: Vec<&[C64]> = tensor.components().values().map(|c| c.values()).collect();
    let sampler = Sampler::new(tensor.grid());
    let mut buf = vec![C64::new(0.0, 0.0); keys.len()];
    ray_integrals(&sampler, &comps, beta, alpha, quad, &mut buf);
    let th = beta + PI + alpha;
    Ok(keys
        .iter()
        .zip(&buf)
        .map(|(&k, &v)| v * C64::from_polar(1.0, k as f64 * th))
        .sum())
}

/// `I0 f`, the transform of the scalar `f`.
pub fn i0(f: &DiskImage, grid: SinoGrid, quad: &QuadratureSpec) -> Sinogram {
    xray(&TensorField::scalar(f.clone()), grid, quad)
}

/// `I[f e^{i m theta}]` computed as `(-1)^m e^{i m (beta + alpha)} I0 f`.
pub fn i_m(f: &DiskImage, m: i32, grid: SinoGrid, quad: &QuadratureSpec) -> Sinogram {
    let s = if m.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    i0(f, grid, quad).map_indexed(|b, a, v| v * C64::from_polar(s, m as f64 * (b + a)))
}

/// Gradient of an analytic potential, `(x, y) -> (h_x, h_y)`.
pub type GradientFn<'a> = &'a (dyn Fn(f64, f64) -> (C64, C64) + Sync);

/// How `X_perp h` obtains the gradient of `h`.
#[derive(Clone, Copy)]
pub enum Derivative<'a> {
    Analytic(GradientFn<'a>),
    FiniteDifference,
}

/// Diagnostics of finite-difference derivatives.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct QualityReport {
    /// Number of derivative evaluations that fell back to one-sided stencils.
    pub one_sided: usize,
}

fn fd_along(
    ok: &dyn Fn(i64) -> bool,
    at: &dyn Fn(i64) -> C64,
    h: f64,
    one_sided: &mut usize,
) -> C64 {
    if ok(1) && ok(-1) {
        return (at(1) - at(-1)) / (2.0 * h);
    }
    *one_sided += 1;
    if ok(1) && ok(2) {
        (at(0) * -3.0 + at(1) * 4.0 - at(2)) / (2.0 * h)
    } else if ok(-1) && ok(-2) {
        (at(0) * 3.0 - at(-1) * 4.0 + at(-2)) / (2.0 * h)
    } else if ok(1) {
        (at(1) - at(0)) / h
    } else if ok(-1) {
        (at(0) - at(-1)) / h
    } else {
        C64::new(0.0, 0.0)
    }
}

fn fd_partial(img: &DiskImage, axis: usize, report: &mut QualityReport) -> DiskImage {
    let g = img.grid();
    let v = img.values();
    let h = if axis == 0 { g.hx() } else { g.hy() };
    let mut out = vec![C64::new(0.0, 0.0); g.len()];
    for i in 0..g.nx {
        for j in 0..g.ny {
            if !g.in_mask(i, j) {
                continue;
            }
            let pos = |d: i64| -> Option<(usize, usize)> {
                let (ii, jj) = if axis == 0 {
                    (i as i64 + d, j as i64)
                } else {
                    (i as i64, j as i64 + d)
                };
                if ii < 0 || jj < 0 || ii as usize >= g.nx || jj as usize >= g.ny {
                    return None;
                }
                let (ii, jj) = (ii as usize, jj as usize);
                g.in_mask(ii, jj).then_some((ii, jj))
            };
            let ok = |d: i64| pos(d).is_some();
            let at = |d: i64| pos(d).map(|(a, b)| v[g.index(a, b)]).unwrap_or_default();
            out[g.index(i, j)] = fd_along(&ok, &at, h, &mut report.one_sided);
        }
    }
    DiskImage::from_values(g, out).expect("masked")
}

/// Finite-difference gradient: centered inside, second-order one-sided at the mask edge.
pub fn gradient_fd(img: &DiskImage) -> (DiskImage, DiskImage, QualityReport) {
    let mut rep = QualityReport::default();
    let gx = fd_partial(img, 0, &mut rep);
    let gy = fd_partial(img, 1, &mut rep);
    (gx, gy, rep)
}

/// Finite-difference divergence of the vector field `(vx, vy)`.
pub fn divergence_fd(vx: &DiskImage, vy: &DiskImage) -> (DiskImage, QualityReport) {
    let mut rep = QualityReport::default();
    let dx = fd_partial(vx, 0, &mut rep);
    let dy = fd_partial(vy, 1, &mut rep);
    (dx.add(&dy).expect("same grid"), rep)
}

/// The order-1 tensor `X_perp h = sin(theta) h_x - cos(theta) h_y` with harmonics
/// `k = 1: -(h_y + i h_x)/2` and `k = -1: -(h_y - i h_x)/2`.
pub fn xperp_tensor(h: &DiskImage, derivative: Derivative) -> (TensorField, QualityReport) {
    let g = h.grid();
    let (hx, hy, rep) = match derivative {
        Derivative::Analytic(grad) => {
            let hx = DiskImage::from_fn(g, |x, y| grad(x, y).0);
            let hy = DiskImage::from_fn(g, |x, y| grad(x, y).1);
            (hx, hy, QualityReport::default())
        }
        Derivative::FiniteDifference => gradient_fd(h),
    };
    let i = C64::new(0.0, 1.0);
    let zip = |s: f64| {
        let vals = hx
            .values()
            .iter()
            .zip(hy.values())
            .map(|(&a, &b)| -(b + s * i * a) * 0.5)
            .collect();
        DiskImage::from_values(g, vals).expect("masked")
    };
    let mut c = BTreeMap::new();
    c.insert(1, zip(1.0));
    c.insert(-1, zip(-1.0));
    let real = hx.values().iter().chain(hy.values()).all(|v| v.im == 0.0);
    (TensorField::new(1, g, c, real).expect("valid keys"), rep)
}

/// `I_perp h = I[X_perp h]`.
pub fn iperp(
    h: &DiskImage,
    grid: SinoGrid,
    quad: &QuadratureSpec,
    derivative: Derivative,
) -> (Sinogram, QualityReport) {
    let (t, rep) = xperp_tensor(h, derivative);
    (xray(&t, grid, quad), rep)
}

/// Bilinear interpolation of data at `(beta, alpha)`: periodic in `beta`,
/// clamped at the ends of the `alpha` range.
pub fn interpolate_sinogram(d: &Sinogram, beta: f64, alpha: f64) -> C64 {
    let g = d.grid();
    let fb = beta.rem_euclid(TAU) / g.d_beta();
    let b0 = fb.floor();
    let tb = fb - b0;
    let b0 = (b0 as usize) % g.nbeta;
    let b1 = (b0 + 1) % g.nbeta;
    let fa = ((alpha + FRAC_PI_2) / g.d_alpha() - 0.5).clamp(0.0, (g.nalpha - 1) as f64);
    let a0 = (fa.floor() as usize).min(g.nalpha - 2);
    let ta = fa - a0 as f64;
    let v = d.values();
    let at = |b: usize, a: usize| v[b * g.nalpha + a];
    (at(b0, a0) * (1.0 - ta) + at(b0, a0 + 1) * ta) * (1.0 - tb)
        + (at(b1, a0) * (1.0 - ta) + at(b1, a0 + 1) * ta) * tb
}

/// `(1/2pi) int_0^{2pi} w(theta) D(theta + asin(x.theta_perp), -asin(x.theta_perp)) dtheta`
/// for `w = 1, -sin theta, cos theta`, by the trapezoid rule on `nbeta` angles.
fn smear(d: &Sinogram, out: ImageGrid, vector: bool) -> Vec<[C64; 3]> {
    let n = d.nbeta();
    let trig: Vec<(f64, f64)> = (0..n)
        .map(|j| (TAU * j as f64 / n as f64).sin_cos())
        .collect();
    (0..out.len())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / out.ny, idx % out.ny);
            let zero = C64::new(0.0, 0.0);
            if !out.in_mask(i, j) {
                return [zero; 3];
            }
            let (x, y) = (out.x(i), out.y(j));
            let mut acc = [zero; 3];
            for (jj, &(s, c)) in trig.iter().enumerate() {
                let th = TAU * jj as f64 / n as f64;
                let a = (-x * s + y * c).clamp(-1.0, 1.0).asin();
                let v = interpolate_sinogram(d, th + a, -a);
                acc[0] += v;
                if vector {
                    acc[1] += v * -s;
                    acc[2] += v * c;
                }
            }
            acc.map(|v| v / n as f64)
        })
        .collect()
}

/// `I0# D(x) = (1/2pi) int D(theta + asin(x.theta_perp), -asin(x.theta_perp)) dtheta`.
pub fn backproject_i0(d: &Sinogram, out: ImageGrid) -> DiskImage {
    let vals = smear(d, out, false).into_iter().map(|v| v[0]).collect();
    DiskImage::from_values(out, vals).expect("masked")
}

/// `Iperp# D = (1/2pi) div int theta_perp D(...) dtheta`, divergence by finite differences.
pub fn backproject_iperp(d: &Sinogram, out: ImageGrid) -> (DiskImage, QualityReport) {
    let s = smear(d, out, true);
    let vx = DiskImage::from_values(out, s.iter().map(|v| v[1]).collect()).expect("masked");
    let vy = DiskImage::from_values(out, s.iter().map(|v| v[2]).collect()).expect("masked");
    divergence_fd(&vx, &vy)
}
