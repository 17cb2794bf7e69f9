//! Analytic phantoms and the fixed presets used by the experiments.
//!
//! Presets are blends of isotropic gaussians whose tails are below `1e-12` on
//! the unit circle, so they count as compactly supported.

use crate::error::{invalid, Result};
use crate::forward::{xperp_tensor, Derivative};
use crate::grid::{DiskImage, ImageGrid, TensorField};
use crate::C64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// `amplitude * exp(-|z - c|^2 / (2 width^2))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gaussian {
    pub cx: f64,
    pub cy: f64,
    pub width: f64,
    pub amplitude: f64,
}

impl Gaussian {
    pub fn new(cx: f64, cy: f64, width: f64, amplitude: f64) -> Result<Self> {
        if !(width > 0.0) {
            return invalid(format!("gaussian width must be positive, got {width}"));
        }
        if !(cx.hypot(cy) < 1.0) {
            return invalid(format!(
                "gaussian center ({cx}, {cy}) must lie inside the disk"
            ));
        }
        Ok(Self {
            cx,
            cy,
            width,
            amplitude,
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let d2 = (x - self.cx).powi(2) + (y - self.cy).powi(2);
        self.amplitude * (-d2 / (2.0 * self.width * self.width)).exp()
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        let v = self.eval(x, y) / (self.width * self.width);
        (-(x - self.cx) * v, -(y - self.cy) * v)
    }

    /// Largest value on the unit circle.
    pub fn boundary_max(&self) -> f64 {
        let d = 1.0 - self.cx.hypot(self.cy);
        self.amplitude.abs() * (-d * d / (2.0 * self.width * self.width)).exp()
    }
}

/// Sum of gaussians.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GaussianBlend(pub Vec<Gaussian>);

impl GaussianBlend {
    fn from_params(params: &[(f64, f64, f64, f64)]) -> Self {
        Self(
            params
                .iter()
                .map(|&(x, y, w, a)| Gaussian::new(x, y, w, a).expect("preset"))
                .collect(),
        )
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.0.iter().map(|g| g.eval(x, y)).sum()
    }

    pub fn gradient(&self, x: f64, y: f64) -> (f64, f64) {
        self.0.iter().fold((0.0, 0.0), |(a, b), g| {
            let (gx, gy) = g.gradient(x, y);
            (a + gx, b + gy)
        })
    }

    pub fn boundary_max(&self) -> f64 {
        self.0.iter().map(|g| g.boundary_max()).sum()
    }

    pub fn sample(&self, grid: ImageGrid) -> DiskImage {
        DiskImage::from_fn(grid, |x, y| C64::new(self.eval(x, y), 0.0))
    }
}

pub fn gaussian(
    grid: ImageGrid,
    center: (f64, f64),
    width: f64,
    amplitude: f64,
) -> Result<DiskImage> {
    let g = Gaussian::new(center.0, center.1, width, amplitude)?;
    Ok(DiskImage::from_fn(grid, |x, y| C64::new(g.eval(x, y), 0.0)))
}

/// `z^k` for `k >= 0`, `conj(z)^|k|` for `k < 0`.
pub fn monomial(grid: ImageGrid, k: i32) -> DiskImage {
    DiskImage::from_fn(grid, move |x, y| {
        let z = C64::new(x, y);
        if k >= 0 {
            z.powi(k)
        } else {
            z.conj().powi(-k)
        }
    })
}

/// `Re z^n`.
pub fn harmonic_re(grid: ImageGrid, n: u32) -> DiskImage {
    DiskImage::from_fn(grid, move |x, y| {
        C64::new(C64::new(x, y).powi(n as i32).re, 0.0)
    })
}

/// A preset phantom with the ingredients it was built from.
#[derive(Clone, Debug)]
pub struct Preset {
    pub id: u32,
    pub tensor: TensorField,
    /// Scalar potential `f` with `tensor = X_perp f` (preset 2 only).
    pub potential: Option<DiskImage>,
    /// Compactly supported part of the potential (preset 2 only).
    pub compact_part: Option<DiskImage>,
    /// Harmonic part `Re z^3` of the potential (preset 2 only).
    pub harmonic_part: Option<DiskImage>,
}

/// Gaussian parameters `(cx, cy, width, amplitude)` of the presets.
pub mod blends {
    pub const P1_F0: [(f64, f64, f64, f64); 3] = [
        (0.25, 0.1, 0.08, 1.0),
        (-0.3, 0.15, 0.06, 0.8),
        (0.0, -0.3, 0.07, 0.6),
    ];
    pub const P1_F2_RE: [(f64, f64, f64, f64); 1] = [(-0.1, -0.1, 0.08, 0.5)];
    pub const P1_F2_IM: [(f64, f64, f64, f64); 1] = [(0.2, 0.25, 0.06, 0.4)];
    pub const P2_COMPACT: [(f64, f64, f64, f64); 3] = [
        (0.2, 0.2, 0.07, 1.0),
        (-0.25, -0.1, 0.06, 0.8),
        (0.05, -0.3, 0.05, 0.6),
    ];
    pub const P3_F1_RE: [(f64, f64, f64, f64); 1] = [(0.2, 0.0, 0.07, 0.8)];
    pub const P3_F1_IM: [(f64, f64, f64, f64); 1] = [(-0.2, 0.2, 0.06, 0.5)];
    pub const P3_F3_RE: [(f64, f64, f64, f64); 1] = [(0.0, 0.25, 0.07, 0.6)];
    pub const P3_F3_IM: [(f64, f64, f64, f64); 1] = [(-0.15, -0.25, 0.06, 0.4)];
}

/// Blend used for the compact part of preset 2.
pub fn preset2_compact_blend() -> GaussianBlend {
    GaussianBlend::from_params(&blends::P2_COMPACT)
}

fn complex_pair(grid: ImageGrid, re: &GaussianBlend, im: &GaussianBlend) -> DiskImage {
    DiskImage::from_fn(grid, |x, y| C64::new(re.eval(x, y), im.eval(x, y)))
}

fn real_tensor(
    order: u32,
    grid: ImageGrid,
    positive: &[(i32, DiskImage)],
    center: Option<DiskImage>,
) -> TensorField {
    let mut c = BTreeMap::new();
    for (k, img) in positive {
        c.insert(-k, img.conj());
        c.insert(*k, img.clone());
    }
    if let Some(f0) = center {
        c.insert(0, f0);
    }
    TensorField::new(order, grid, c, true).expect("preset is real")
}

/// The three experiment presets.
///
/// * 1: real 2-tensor `f0 + f2 e^{2i theta} + conj(f2) e^{-2i theta}`.
/// * 2: `X_perp f` for the potential `f = (compact gaussians) + Re z^3`.
/// * 3: real 3-tensor with harmonics `+-1, +-3`.
pub fn experiment_preset(id: u32, grid: ImageGrid) -> Result<Preset> {
    let b = GaussianBlend::from_params;
    match id {
        1 => {
            let f0 = b(&blends::P1_F0).sample(grid);
            let f2 = complex_pair(grid, &b(&blends::P1_F2_RE), &b(&blends::P1_F2_IM));
            let tensor = real_tensor(2, grid, &[(2, f2)], Some(f0));
            Ok(Preset {
                id,
                tensor,
                potential: None,
                compact_part: None,
                harmonic_part: None,
            })
        }
        2 => {
            let compact = preset2_compact_blend();
            let value = |x: f64, y: f64| compact.eval(x, y) + C64::new(x, y).powi(3).re;
            // circle average, zero up to the gaussian tails
            let n = 4096;
            let mean = (0..n)
                .map(|k| {
                    let t = TAU * k as f64 / n as f64;
                    value(t.cos(), t.sin())
                })
                .sum::<f64>()
                / n as f64;
            let potential = DiskImage::from_fn(grid, |x, y| C64::new(value(x, y) - mean, 0.0));
            let grad = |x: f64, y: f64| {
                let (gx, gy) = compact.gradient(x, y);
                // d/dx Re z^3 = 3(x^2 - y^2), d/dy Re z^3 = -6xy
                (
                    C64::new(gx + 3.0 * (x * x - y * y), 0.0),
                    C64::new(gy - 6.0 * x * y, 0.0),
                )
            };
            let (tensor, _) = xperp_tensor(&potential, Derivative::Analytic(&grad));
            Ok(Preset {
                id,
                tensor,
                compact_part: Some(compact.sample(grid)),
                harmonic_part: Some(harmonic_re(grid, 3)),
                potential: Some(potential),
            })
        }
        3 => {
            let f1 = complex_pair(grid, &b(&blends::P3_F1_RE), &b(&blends::P3_F1_IM));
            let f3 = complex_pair(grid, &b(&blends::P3_F3_RE), &b(&blends::P3_F3_IM));
            let tensor = real_tensor(3, grid, &[(1, f1), (3, f3)], None);
            Ok(Preset {
                id,
                tensor,
                potential: None,
                compact_part: None,
                harmonic_part: None,
            })
        }
        _ => invalid(format!("unknown preset {id}; expected 1, 2 or 3")),
    }
}
