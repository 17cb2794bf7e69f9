//! Operator algebra on data space: extensions, adjoint restrictions, pullbacks
//! by the scattering maps, the operators `P = A-* H A+` and `C = A-* H A- / 2`,
//! and the projectors built from them.
//!
//! Both scattering maps shift `beta` by `pi + 2 alpha_a = 2 pi (a + 1/2) / nalpha`
//! and reflect the `alpha` index. The shift is an exact grid shift when `nbeta` is
//! a multiple of `2 nalpha`; otherwise it is a Fourier (trigonometric) shift in `beta`.

use crate::fft;
use crate::fiber::{hilbert_even, hilbert_fiber, hilbert_odd};
use crate::grid::{BoundaryField, SinoGrid, Sinogram};
use crate::C64;
use rayon::prelude::*;
use std::f64::consts::TAU;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// Which part of the fiber Hilbert transform to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Full,
    Even,
    Odd,
}

fn hilbert_part(f: &BoundaryField, part: Part) -> BoundaryField {
    match part {
        Part::Full => hilbert_fiber(f),
        Part::Even => hilbert_even(f),
        Part::Odd => hilbert_odd(f),
    }
}

/// Shift `2 pi (a + 1/2) / nalpha` applied to column `a` (mod `2 nalpha` columns).
fn shift_of(grid: SinoGrid, a: usize) -> f64 {
    TAU * (a as f64 + 0.5) / grid.nalpha as f64
}

/// Column `col` of a row-major `nbeta x ncols` array, evaluated at `beta_b + shift`.
fn shifted_column(values: &[C64], nbeta: usize, ncols: usize, col: usize, shift: f64) -> Vec<C64> {
    let steps = shift * nbeta as f64 / TAU;
    let m = steps.round();
    if (steps - m).abs() < 1e-9 {
        let m = m as i64;
        return (0..nbeta)
            .map(|b| values[fft::bin(b as i64 + m, nbeta) * ncols + col])
            .collect();
    }
    let mut c: Vec<C64> = (0..nbeta).map(|b| values[b * ncols + col]).collect();
    fft::plan(nbeta, false).process(&mut c);
    for (j, v) in c.iter_mut().enumerate() {
        let w = match fft::signed_freq(j, nbeta) {
            Some(k) => C64::from_polar(1.0, k as f64 * shift),
            None => C64::new((nbeta as f64 / 2.0 * shift).cos(), 0.0),
        };
        *v *= w / nbeta as f64;
    }
    fft::plan(nbeta, true).process(&mut c);
    c
}

/// Builds a row-major array column by column.
fn assemble(nbeta: usize, ncols: usize, col: impl Fn(usize) -> Vec<C64> + Sync + Send) -> Vec<C64> {
    let cols: Vec<Vec<C64>> = (0..ncols).into_par_iter().map(col).collect();
    let mut out = vec![C64::new(0.0, 0.0); nbeta * ncols];
    for (a, c) in cols.iter().enumerate() {
        for (b, v) in c.iter().enumerate() {
            out[b * ncols + a] = *v;
        }
    }
    out
}

/// `(S_A* D)(beta, alpha) = D(beta + pi + 2 alpha, -alpha)`.
pub fn pullback_sa(d: &Sinogram) -> Sinogram {
    let g = d.grid();
    let na = g.nalpha;
    let vals = assemble(g.nbeta, na, |a| {
        shifted_column(d.values(), g.nbeta, na, na - 1 - a, shift_of(g, a))
    });
    Sinogram::from_values(g, vals).expect("same size")
}

/// `(S* f)(beta, alpha) = f(beta + pi + 2 alpha, pi - alpha)` on the whole boundary.
pub fn pullback_s(f: &BoundaryField) -> BoundaryField {
    let g = f.grid();
    let nf = f.nalphafull();
    let vals = assemble(g.nbeta, nf, |a| {
        shifted_column(f.values(), g.nbeta, nf, nf - 1 - a, shift_of(g, a))
    });
    BoundaryField::from_values(g, vals).expect("same size")
}

/// `A+-`: influx samples copied, outflux samples set to `+-D(S(beta, alpha))`.
pub fn extend_a(d: &Sinogram, sign: Sign) -> BoundaryField {
    let g = d.grid();
    let (na, nf) = (g.nalpha, 2 * g.nalpha);
    let s = sign.value();
    let vals = assemble(g.nbeta, nf, |a| {
        if a < na {
            (0..g.nbeta).map(|b| d.get(b, a)).collect()
        } else {
            let mut c = shifted_column(d.values(), g.nbeta, na, nf - 1 - a, shift_of(g, a));
            c.iter_mut().for_each(|v| *v *= s);
            c
        }
    });
    BoundaryField::from_values(g, vals).expect("same size")
}

/// `A+-* f = f +- f o S` on influx samples.
pub fn restrict_astar(f: &BoundaryField, sign: Sign) -> Sinogram {
    let g = f.grid();
    let (na, nf) = (g.nalpha, 2 * g.nalpha);
    let s = sign.value();
    let vals = assemble(g.nbeta, na, |a| {
        let mut c = shifted_column(f.values(), g.nbeta, nf, nf - 1 - a, shift_of(g, a));
        for (b, v) in c.iter_mut().enumerate() {
            *v = f.get(b, a) + s * *v;
        }
        c
    });
    Sinogram::from_values(g, vals).expect("same size")
}

/// `E+-`: outflux sample at `(beta, alpha + pi)` set to `+-D(beta, alpha)`.
pub fn extend_e(d: &Sinogram, sign: Sign) -> BoundaryField {
    let g = d.grid();
    let s = sign.value();
    let mut vals = Vec::with_capacity(2 * g.len());
    for b in 0..g.nbeta {
        let row = &d.values()[b * g.nalpha..(b + 1) * g.nalpha];
        vals.extend_from_slice(row);
        vals.extend(row.iter().map(|v| v * s));
    }
    BoundaryField::from_values(g, vals).expect("same size")
}

/// `P = A-* H A+`, or its even/odd part `P+-  = A-* H+- A+`.
pub fn op_p(d: &Sinogram, part: Part) -> Sinogram {
    restrict_astar(&hilbert_part(&extend_a(d, Sign::Plus), part), Sign::Minus)
}

/// `C = A-* H A- / 2`, or its even/odd part.
pub fn op_c(d: &Sinogram, part: Part) -> Sinogram {
    restrict_astar(&hilbert_part(&extend_a(d, Sign::Minus), part), Sign::Minus)
        .scale(C64::new(0.5, 0.0))
}

/// `A-* H A-`.
pub fn a_minus_h_a_minus(d: &Sinogram) -> Sinogram {
    restrict_astar(&hilbert_fiber(&extend_a(d, Sign::Minus)), Sign::Minus)
}

/// `A+* H A-`, the filter shared by the central reconstruction formulas.
pub fn a_plus_h_a_minus(d: &Sinogram) -> Sinogram {
    restrict_astar(&hilbert_fiber(&extend_a(d, Sign::Minus)), Sign::Plus)
}

/// `(Id +- S_A*) / 2`.
pub fn project_vpm(d: &Sinogram, sign: Sign) -> Sinogram {
    let s = sign.value() * 0.5;
    let sa = pullback_sa(d);
    d.scale(C64::new(0.5, 0.0))
        .axpy(C64::new(s, 0.0), &sa)
        .expect("same grid")
}

/// Projection onto the range of `I_0`: `(Id + C-^2)` applied to the `V+` part.
pub fn project_range_i0(d: &Sinogram) -> Sinogram {
    let v = project_vpm(d, Sign::Plus);
    let cc = op_c(&op_c(&v, Part::Odd), Part::Odd);
    v.add(&cc).expect("same grid")
}

/// `Id + (A-* H A-)^2`; on `I_perp` data it keeps the compactly supported part.
pub fn project_range_iperp_core(d: &Sinogram) -> Sinogram {
    let t = a_minus_h_a_minus(&a_minus_h_a_minus(d));
    d.add(&t).expect("same grid")
}

/// `-(A-* H A-)^2`, the complement of [`project_range_iperp_core`].
pub fn iperp_boundary_part(d: &Sinogram) -> Sinogram {
    a_minus_h_a_minus(&a_minus_h_a_minus(d)).scale(C64::new(-1.0, 0.0))
}
