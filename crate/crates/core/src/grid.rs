//! Grid containers: disk images, sinograms, boundary fields, tensor fields and
//! coefficient tables.

use crate::error::{invalid, Error, Result};
use crate::C64;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Cartesian pixel grid on `[-1,1]^2` with a disk mask.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageGrid {
    pub nx: usize,
    pub ny: usize,
    pub r_mask: f64,
}

impl ImageGrid {
    pub fn new(nx: usize, ny: usize, r_mask: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid(format!("image grid must be at least 2x2, got {nx}x{ny}"));
        }
        if !(r_mask > 0.0 && r_mask <= 1.0) {
            return invalid(format!("mask radius must lie in (0, 1], got {r_mask}"));
        }
        Ok(Self { nx, ny, r_mask })
    }

    /// Square grid masked to the unit disk.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, n, 1.0)
    }

    pub fn x(&self, i: usize) -> f64 {
        -1.0 + (2 * i + 1) as f64 / self.nx as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        -1.0 + (2 * j + 1) as f64 / self.ny as f64
    }

    pub fn hx(&self) -> f64 {
        2.0 / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        2.0 / self.ny as f64
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    pub fn in_mask(&self, i: usize, j: usize) -> bool {
        let (x, y) = (self.x(i), self.y(j));
        x * x + y * y <= self.r_mask * self.r_mask
    }

    pub fn pixel_area(&self) -> f64 {
        self.hx() * self.hy()
    }
}

/// Complex scalar field on pixel centers, exactly zero outside the mask.
#[derive(Clone, Debug, PartialEq)]
pub struct DiskImage {
    grid: ImageGrid,
    values: Vec<C64>,
}

impl DiskImage {
    pub fn zeros(grid: ImageGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(x, y)` on pixel centers inside the mask.
    pub fn from_fn<F>(grid: ImageGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let (i, j) = (idx / grid.ny, idx % grid.ny);
                if grid.in_mask(i, j) {
                    f(grid.x(i), grid.y(j))
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        Self { grid, values }
    }

    /// Builds an image from raw values, rejecting nonzero entries outside the mask.
    pub fn from_values(grid: ImageGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} image values, got {}",
                grid.len(),
                values.len()
            )));
        }
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                let v = values[grid.index(i, j)];
                if !grid.in_mask(i, j) && (v.re != 0.0 || v.im != 0.0) {
                    return Err(Error::Validation(format!(
                        "nonzero value at pixel ({i},{j}) outside the mask radius {}",
                        grid.r_mask
                    )));
                }
            }
        }
        Ok(Self { grid, values })
    }

    /// Builds an image and zeroes everything outside the mask.
    pub fn masked(grid: ImageGrid, mut values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} image values, got {}",
                grid.len(),
                values.len()
            )));
        }
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                if !grid.in_mask(i, j) {
                    values[grid.index(i, j)] = C64::new(0.0, 0.0);
                }
            }
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> ImageGrid {
        self.grid
    }

    pub fn nx(&self) -> usize {
        self.grid.nx
    }

    pub fn ny(&self) -> usize {
        self.grid.ny
    }

    pub fn r_mask(&self) -> f64 {
        self.grid.r_mask
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let zero = C64::new(0.0, 0.0);
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| {
                if self.grid.in_mask(idx / self.grid.ny, idx % self.grid.ny) {
                    f(v)
                } else {
                    zero
                }
            })
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return invalid("image grids differ");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// Squared L2 norm with pixel-area weights.
    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.pixel_area()
    }

    /// Squared L2 norm restricted to pixels with `|z| <= radius`.
    pub fn norm_sq_within(&self, radius: f64) -> f64 {
        let g = self.grid;
        let mut s = 0.0;
        for i in 0..g.nx {
            for j in 0..g.ny {
                let (x, y) = (g.x(i), g.y(j));
                if x * x + y * y <= radius * radius {
                    s += self.values[g.index(i, j)].norm_sqr();
                }
            }
        }
        s * g.pixel_area()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Dimensions of an influx data grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SinoGrid {
    pub nbeta: usize,
    pub nalpha: usize,
}

impl SinoGrid {
    pub fn new(nbeta: usize, nalpha: usize) -> Result<Self> {
        if nbeta < 4 || !nbeta.is_multiple_of(2) {
            return invalid(format!("nbeta must be even and at least 4, got {nbeta}"));
        }
        if nalpha < 2 {
            return invalid(format!("nalpha must be at least 2, got {nalpha}"));
        }
        Ok(Self { nbeta, nalpha })
    }

    pub fn beta(&self, b: usize) -> f64 {
        TAU * b as f64 / self.nbeta as f64
    }

    pub fn alpha(&self, a: usize) -> f64 {
        -FRAC_PI_2 + PI * (a as f64 + 0.5) / self.nalpha as f64
    }

    pub fn d_beta(&self) -> f64 {
        TAU / self.nbeta as f64
    }

    pub fn d_alpha(&self) -> f64 {
        PI / self.nalpha as f64
    }

    pub fn cell(&self) -> f64 {
        self.d_beta() * self.d_alpha()
    }

    pub fn len(&self) -> usize {
        self.nbeta * self.nalpha
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, b: usize, a: usize) -> usize {
        b * self.nalpha + a
    }
}

/// Complex function on the influx boundary sampled on a `(beta, alpha)` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct Sinogram {
    grid: SinoGrid,
    values: Vec<C64>,
}

impl Sinogram {
    pub fn zeros(grid: SinoGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_fn<F>(grid: SinoGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|idx| f(grid.beta(idx / grid.nalpha), grid.alpha(idx % grid.nalpha)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: SinoGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} sinogram values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> SinoGrid {
        self.grid
    }

    pub fn nbeta(&self) -> usize {
        self.grid.nbeta
    }

    pub fn nalpha(&self) -> usize {
        self.grid.nalpha
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn get(&self, b: usize, a: usize) -> C64 {
        self.values[self.grid.index(b, a)]
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise map with access to the sample angles.
    pub fn map_indexed(&self, f: impl Fn(f64, f64, C64) -> C64) -> Self {
        let g = self.grid;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(idx, &v)| f(g.beta(idx / g.nalpha), g.alpha(idx % g.nalpha), v))
            .collect();
        Self { grid: g, values }
    }

    pub fn conj(&self) -> Self {
        self.map(|v| v.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|v| v * s)
    }

    fn zip(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Result<Self> {
        if self.grid != other.grid {
            return invalid("sinogram grids differ");
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(Self {
            grid: self.grid,
            values,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a - b)
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: C64, other: &Self) -> Result<Self> {
        self.zip(other, |a, b| a + s * b)
    }

    /// Discrete `L2` inner product `sum self * conj(other) dbeta dalpha`.
    pub fn inner(&self, other: &Self) -> C64 {
        assert_eq!(self.grid, other.grid, "sinogram grids differ");
        let s: C64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        s * self.grid.cell()
    }

    pub fn norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise deviation from another sinogram.
    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "sinogram grids differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Complex function on the whole boundary `dSM`, full fiber circle in `alpha`.
///
/// Sample `a` sits at `alpha = -pi/2 + pi (a + 1/2) / nalpha` for `a < 2 nalpha`;
/// the first `nalpha` samples are the influx grid of the matching [`Sinogram`].
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryField {
    grid: SinoGrid,
    values: Vec<C64>,
}

impl BoundaryField {
    pub fn zeros(grid: SinoGrid) -> Self {
        Self {
            grid,
            values: vec![C64::new(0.0, 0.0); 2 * grid.len()],
        }
    }

    pub fn from_fn<F>(grid: SinoGrid, f: F) -> Self
    where
        F: Fn(f64, f64) -> C64 + Sync,
    {
        let nf = 2 * grid.nalpha;
        let values = (0..2 * grid.len())
            .into_par_iter()
            .map(|idx| f(grid.beta(idx / nf), grid.alpha(idx % nf)))
            .collect();
        Self { grid, values }
    }

    pub fn from_values(grid: SinoGrid, values: Vec<C64>) -> Result<Self> {
        if values.len() != 2 * grid.len() {
            return Err(Error::Validation(format!(
                "expected {} boundary values, got {}",
                2 * grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    /// Influx grid this field extends.
    pub fn grid(&self) -> SinoGrid {
        self.grid
    }

    pub fn nbeta(&self) -> usize {
        self.grid.nbeta
    }

    pub fn nalphafull(&self) -> usize {
        2 * self.grid.nalpha
    }

    pub fn alpha(&self, a: usize) -> f64 {
        self.grid.alpha(a)
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn get(&self, b: usize, a: usize) -> C64 {
        self.values[b * self.nalphafull() + a]
    }

    /// Restriction to the influx samples.
    pub fn restrict_influx(&self) -> Sinogram {
        let (nf, na) = (self.nalphafull(), self.grid.nalpha);
        let values = self
            .values
            .chunks(nf)
            .flat_map(|row| row[..na].iter().copied())
            .collect::<Vec<_>>();
        Sinogram {
            grid: self.grid,
            values,
        }
    }

    pub fn max_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "boundary grids differ");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Harmonic indices allowed for a symmetric tensor of order `m`.
pub fn allowed_harmonics(order: u32) -> Vec<i32> {
    let m = order as i32;
    (-m..=m).step_by(2).collect()
}

/// Symmetric `m`-tensor stored as fiberwise harmonic components.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    order: u32,
    grid: ImageGrid,
    components: BTreeMap<i32, DiskImage>,
    real: bool,
}

impl TensorField {
    /// Validates harmonic keys, grids and, when `real` is set, conjugation symmetry.
    pub fn new(
        order: u32,
        grid: ImageGrid,
        components: BTreeMap<i32, DiskImage>,
        real: bool,
    ) -> Result<Self> {
        let allowed = allowed_harmonics(order);
        for (k, img) in &components {
            if !allowed.contains(k) {
                return Err(Error::Validation(format!(
                    "harmonic {k} not allowed for a tensor of order {order}"
                )));
            }
            if img.grid() != grid {
                return Err(Error::Validation(format!(
                    "component {k} has a different grid"
                )));
            }
        }
        let t = Self {
            order,
            grid,
            components,
            real,
        };
        if real {
            let dev = t.realness_deviation();
            if dev > 1e-12 {
                return Err(Error::Validation(format!(
                    "realness flag set but conjugation symmetry fails by {dev:e}"
                )));
            }
        }
        Ok(t)
    }

    /// Order-0 tensor `{0: f}`.
    pub fn scalar(f: DiskImage) -> Self {
        let grid = f.grid();
        let mut c = BTreeMap::new();
        c.insert(0, f);
        Self {
            order: 0,
            grid,
            components: c,
            real: false,
        }
    }

    /// Single-harmonic tensor `{k: f}` of minimal order `|k|`.
    pub fn single(k: i32, f: DiskImage) -> Self {
        let grid = f.grid();
        let mut c = BTreeMap::new();
        c.insert(k, f);
        Self {
            order: k.unsigned_abs(),
            grid,
            components: c,
            real: false,
        }
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn grid(&self) -> ImageGrid {
        self.grid
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn components(&self) -> &BTreeMap<i32, DiskImage> {
        &self.components
    }

    pub fn component(&self, k: i32) -> Option<&DiskImage> {
        self.components.get(&k)
    }

    /// Component `k`, zero when absent.
    pub fn component_or_zero(&self, k: i32) -> DiskImage {
        self.components
            .get(&k)
            .cloned()
            .unwrap_or_else(|| DiskImage::zeros(self.grid))
    }

    /// Largest pointwise `|f_{-k} - conj(f_k)|` over all harmonics.
    pub fn realness_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for k in allowed_harmonics(self.order) {
            if k < 0 {
                continue;
            }
            let a = self.component_or_zero(k);
            let b = self.component_or_zero(-k);
            for (x, y) in a.values().iter().zip(b.values()) {
                dev = dev.max((y - x.conj()).norm());
            }
        }
        dev
    }

    /// `||f||^2 = 2 pi sum_k ||f_k||^2`, the `L2(SM)` norm.
    pub fn norm_sq(&self) -> f64 {
        TAU * self.components.values().map(|c| c.norm_sq()).sum::<f64>()
    }
}

/// Basis and family tags for coefficient tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Basis {
    B,
    BPrime,
    U,
    V,
    UPrime,
    VPrime,
}

impl Basis {
    pub const ALL: [Basis; 6] = [
        Basis::B,
        Basis::BPrime,
        Basis::U,
        Basis::V,
        Basis::UPrime,
        Basis::VPrime,
    ];

    /// Reduced index range of each family.
    pub fn is_valid(self, p: i32, q: i32) -> bool {
        match self {
            Basis::B | Basis::BPrime => true,
            Basis::U => p <= 2 * q,
            Basis::V => p < 2 * q,
            Basis::UPrime => p < 2 * q + 1,
            Basis::VPrime => p <= 2 * q + 1,
        }
    }

    pub fn is_primed(self) -> bool {
        matches!(self, Basis::BPrime | Basis::UPrime | Basis::VPrime)
    }

    pub fn name(self) -> &'static str {
        match self {
            Basis::B => "B",
            Basis::BPrime => "B'",
            Basis::U => "u",
            Basis::V => "v",
            Basis::UPrime => "u'",
            Basis::VPrime => "v'",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "B" | "phi" => Ok(Basis::B),
            "B'" | "Bprime" | "phiprime" => Ok(Basis::BPrime),
            "u" | "U" => Ok(Basis::U),
            "v" | "V" => Ok(Basis::V),
            "u'" | "Uprime" | "uprime" => Ok(Basis::UPrime),
            "v'" | "Vprime" | "vprime" => Ok(Basis::VPrime),
            _ => invalid(format!("unknown basis '{s}'")),
        }
    }
}

/// `(p, q)`-indexed expansion coefficients in a given basis.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffTable {
    basis: Basis,
    coeffs: BTreeMap<(i32, i32), C64>,
}

impl CoeffTable {
    pub fn new(basis: Basis) -> Self {
        Self {
            basis,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn insert(&mut self, p: i32, q: i32, c: C64) -> Result<()> {
        if !self.basis.is_valid(p, q) {
            return Err(Error::OutOfRange(format!(
                "index ({p},{q}) is not a reduced index of family {}",
                self.basis.name()
            )));
        }
        self.coeffs.insert((p, q), c);
        Ok(())
    }

    pub fn get(&self, p: i32, q: i32) -> Option<C64> {
        self.coeffs.get(&(p, q)).copied()
    }

    /// Coefficient at `(p, q)`, zero when absent.
    pub fn at(&self, p: i32, q: i32) -> C64 {
        self.get(p, q).unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i32, i32), &C64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }
}
