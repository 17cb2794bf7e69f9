//! Range tests for data: moment conditions, coefficient-space membership in the
//! range of `P-`, the `I_perp` range structure and the ranges of single
//! (anti)holomorphic harmonics.

use crate::boundary::pullback_sa;
use crate::error::{invalid, Result};
use crate::fiber::{analyze, band, family_norm_sq};
use crate::forward::{i0, QuadratureSpec};
use crate::grid::{Basis, DiskImage, SinoGrid, Sinogram};
use crate::C64;
use rayon::prelude::*;
use std::fmt::Write as _;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TestTag {
    Moments,
    PMinusRange,
    IperpRange,
    KerMRange,
}

impl TestTag {
    pub fn name(self) -> &'static str {
        match self {
            TestTag::Moments => "moments",
            TestTag::PMinusRange => "p-minus-range",
            TestTag::IperpRange => "iperp-range",
            TestTag::KerMRange => "ker-m-range",
        }
    }
}

/// One residual, indexed by `(n, k)` for moments and `(p, q)` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualEntry {
    pub i: i32,
    pub j: i32,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub tag: TestTag,
    pub entries: Vec<ResidualEntry>,
    /// Relative size of the part of the data with the wrong `S_A` parity.
    pub symmetry_residual: Option<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl ConsistencyReport {
    fn new(tag: TestTag, entries: Vec<ResidualEntry>, sym: Option<f64>, tolerance: f64) -> Self {
        let max_residual = entries
            .iter()
            .map(|e| e.residual)
            .chain(sym)
            .fold(0.0, f64::max);
        Self {
            tag,
            entries,
            symmetry_residual: sym,
            max_residual,
            tolerance,
            pass: max_residual < tolerance,
        }
    }

    /// CSV lines `tag,p_or_n,q_or_k,residual`; the symmetry residual uses the
    /// tag suffix `:symmetry`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("tag,p_or_n,q_or_k,residual\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e}",
                self.tag.name(),
                e.i,
                e.j,
                e.residual
            );
        }
        if let Some(s) = self.symmetry_residual {
            let _ = writeln!(out, "{}:symmetry,0,0,{s:.16e}", self.tag.name());
        }
        out
    }

    /// Entry with the largest residual.
    pub fn worst(&self) -> Option<ResidualEntry> {
        self.entries
            .iter()
            .copied()
            .max_by(|a, b| a.residual.total_cmp(&b.residual))
    }
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// `||D - s S_A* D|| / (2 ||D||)`: the `V-` part for `s = +1`, the `V+` part for `s = -1`.
pub fn parity_residual(d: &Sinogram, s: f64) -> f64 {
    let sa = pullback_sa(d);
    ratio(
        d.axpy(C64::new(-s, 0.0), &sa).expect("same grid").norm(),
        2.0 * d.norm(),
    )
}

/// Moment conditions: data orthogonal to `cos(a) sin^n(a) e^{+-ik(b+a)}` for
/// `0 <= n <= n_max`, `n < k <= k_max`, `k - n` even, plus `V+` symmetry.
///
/// For each `(k, sign)` the weights are orthonormalized on the grid in order of
/// `n`, and the residual of `(n, +-k)` is `|<D, w_hat>| / ||D||`.
pub fn moment_conditions(
    d: &Sinogram,
    n_max: u32,
    k_max: u32,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    moment_conditions_order(d, 0, n_max, k_max, tolerance)
}

/// Moment conditions for data of a tensor of order `m`: since harmonic `j` data are
/// `e^{ij(b+a)}` times `I0` data, the conditions with `k > n + m`, `k - n - m` even,
/// survive, and the data lie in `V+` (`m` even) or `V-` (`m` odd).
pub fn moment_conditions_order(
    d: &Sinogram,
    order: u32,
    n_max: u32,
    k_max: u32,
    tolerance: f64,
) -> Result<ConsistencyReport> {
    if k_max <= n_max + order {
        return invalid(format!(
            "k_max ({k_max}) must exceed n_max + order ({})",
            n_max + order
        ));
    }
    let g = d.grid();
    let dn = d.norm();
    let mut jobs = Vec::new();
    for k in 1..=k_max as i32 {
        for sign in [1, -1] {
            jobs.push(k * sign);
        }
    }
    let entries: Vec<Vec<ResidualEntry>> = jobs
        .par_iter()
        .map(|&ks| {
            let k = ks.unsigned_abs();
            let mut basis: Vec<Sinogram> = Vec::new();
            let mut out = Vec::new();
            let admissible = |n: &u32| n + order < k && (k - n - order).is_multiple_of(2);
            for n in (0..=n_max).filter(admissible) {
                let mut w = Sinogram::from_fn(g, |b, a| {
                    C64::from_polar(a.cos() * a.sin().powi(n as i32), ks as f64 * (b + a))
                });
                for _ in 0..2 {
                    for e in &basis {
                        let c = w.inner(e);
                        w = w.axpy(-c, e).expect("same grid");
                    }
                }
                let wn = w.norm();
                if wn < 1e-12 {
                    continue;
                }
                let w = w.scale(C64::new(1.0 / wn, 0.0));
                out.push(ResidualEntry {
                    i: n as i32,
                    j: ks,
                    residual: ratio(d.inner(&w).norm(), dn),
                });
                basis.push(w);
            }
            out
        })
        .collect();
    let sym = parity_residual(d, if order.is_multiple_of(2) { 1.0 } else { -1.0 });
    Ok(ConsistencyReport::new(
        TestTag::Moments,
        entries.concat(),
        Some(sym),
        tolerance,
    ))
}

/// Indices of the orthocomplement of the range of `P-` (and of `I0`) in `V+`:
/// `{q <= -1} U {q >= 1, q < p <= 2q}`, reduced `u'` indices only.
pub fn p_minus_orthocomplement(p: i32, q: i32) -> bool {
    Basis::UPrime.is_valid(p, q) && (q <= -1 || (q >= 1 && q < p && p <= 2 * q))
}

/// Indices of the orthocomplement of the range of `P+` (and of `I_perp`) in `V-`:
/// `{q <= -1} U {q >= 1, q < p < 2q}`, reduced `v` indices only.
pub fn p_plus_orthocomplement(p: i32, q: i32) -> bool {
    Basis::V.is_valid(p, q) && (q <= -1 || (q >= 1 && q < p))
}

/// `|<D, e_hat>| / ||D||` over the selected reduced indices with `|p|, |q| <= limit`.
fn coefficient_residuals(
    d: &Sinogram,
    basis: Basis,
    limit: i32,
    select: impl Fn(i32, i32) -> bool,
) -> Vec<ResidualEntry> {
    let dn = d.norm();
    let (pm, qm) = band(d.grid());
    analyze(d, basis)
        .iter()
        .filter(|(&(p, q), _)| p.abs() <= limit.min(pm) && q.abs() <= limit.min(qm) && select(p, q))
        .map(|(&(p, q), c)| ResidualEntry {
            i: p,
            j: q,
            residual: ratio(c.norm() * family_norm_sq(basis, p, q).sqrt(), dn),
        })
        .collect()
}

/// Coefficient test for the range of `P-`: the `u'` coefficients on the
/// orthocomplement index set must vanish and the data must lie in `V+`.
pub fn p_minus_range_test(d: &Sinogram, limit: i32, tolerance: f64) -> ConsistencyReport {
    let entries = coefficient_residuals(d, Basis::UPrime, limit, p_minus_orthocomplement);
    ConsistencyReport::new(
        TestTag::PMinusRange,
        entries,
        Some(parity_residual(d, 1.0)),
        tolerance,
    )
}

/// Coefficient test for `I_perp` data: `v` coefficients on the orthocomplement of
/// the range of `P+` must vanish and the data must lie in `V-`. With `compact`
/// set, the potential is assumed to vanish on the boundary, which additionally
/// kills the `v_{k,k}` and `v_{-k,0}` coefficients (`k >= 1`).
pub fn iperp_range_test(
    d: &Sinogram,
    limit: i32,
    compact: bool,
    tolerance: f64,
) -> ConsistencyReport {
    let select = |p: i32, q: i32| {
        p_plus_orthocomplement(p, q) || (compact && ((p == q && q >= 1) || (q == 0 && p <= -1)))
    };
    let entries = coefficient_residuals(d, Basis::V, limit, select);
    ConsistencyReport::new(
        TestTag::IperpRange,
        entries,
        Some(parity_residual(d, -1.0)),
        tolerance,
    )
}

/// Holomorphic (`eta-`, `dbar f = 0`) or antiholomorphic (`eta+`, `d f = 0`) side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Holomorphic,
    Antiholomorphic,
}

/// Basis family and index sequence spanning `I` of a single harmonic class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KerRangeBasis {
    pub harmonic: i32,
    pub side: Side,
    pub family: Basis,
}

impl KerRangeBasis {
    /// Index of the `k`-th element, `k >= 0`.
    pub fn index(&self, k: i32) -> (i32, i32) {
        let h = self.harmonic;
        let m = h.div_euclid(2);
        match (h.rem_euclid(2), self.side) {
            (0, Side::Holomorphic) => (2 * m + k, m + k),
            (0, Side::Antiholomorphic) => (2 * m - k, m),
            (_, Side::Holomorphic) => (2 * m + 1 + k, m + k + 1),
            (_, Side::Antiholomorphic) => (2 * m + 1 - k, m + 1),
        }
    }

    /// Indices that fit in the band `|p| <= pmax`, `|q| <= qmax`.
    pub fn indices_within(&self, pmax: i32, qmax: i32) -> Vec<(i32, i32)> {
        (0..)
            .map(|k| self.index(k))
            .take_while(|&(p, q)| p.abs() <= pmax.max(qmax) * 4 || q.abs() <= qmax)
            .take(4 * (pmax + qmax + 2) as usize)
            .filter(|&(p, q)| p.abs() <= pmax && q.abs() <= qmax)
            .collect()
    }
}

/// `I(ker^h eta)`: even `h = 2m` gives `u'_{2m+k, m+k}` (holomorphic) or
/// `u'_{2m-k, m}`; odd `h = 2m+1` gives `v_{2m+1+k, m+k+1}` or `v_{2m+1-k, m+1}`.
pub fn ker_m_range_basis(harmonic: i32, side: Side) -> KerRangeBasis {
    let family = if harmonic.rem_euclid(2) == 0 {
        Basis::UPrime
    } else {
        Basis::V
    };
    KerRangeBasis {
        harmonic,
        side,
        family,
    }
}

/// Relative norm of the part of `D` outside the span of the range basis.
pub fn ker_m_range_test(
    d: &Sinogram,
    harmonic: i32,
    side: Side,
    tolerance: f64,
) -> ConsistencyReport {
    let basis = ker_m_range_basis(harmonic, side);
    let (pm, qm) = band(d.grid());
    let table = analyze(d, basis.family);
    let captured: f64 = basis
        .indices_within(pm, qm)
        .iter()
        .map(|&(p, q)| table.at(p, q).norm_sqr() * family_norm_sq(basis.family, p, q))
        .sum();
    let dn2 = d.norm().powi(2);
    let outside = ratio((dn2 - captured).max(0.0).sqrt(), dn2.sqrt());
    let sign = if side == Side::Holomorphic { -1 } else { 1 };
    let entries = vec![ResidualEntry {
        i: harmonic,
        j: sign,
        residual: outside,
    }];
    ConsistencyReport::new(TestTag::KerMRange, entries, None, tolerance)
}

/// Tolerances and orders shared by the two tests of the equivalence audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AuditConfig {
    pub n_max: u32,
    pub k_max: u32,
    /// Index limit of the coefficient test.
    pub limit: i32,
    /// Residuals below this pass.
    pub tolerance: f64,
    /// Residuals above this fail; anything in between is ambiguous.
    pub threshold: f64,
}

impl Default for AuditConfig {
    fn default() -> Self {
        Self {
            n_max: 7,
            k_max: 8,
            limit: 8,
            tolerance: 1e-4,
            threshold: 1e-2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Ambiguous,
}

fn verdict(r: &ConsistencyReport, cfg: &AuditConfig) -> Verdict {
    if r.max_residual < cfg.tolerance {
        Verdict::Pass
    } else if r.max_residual > cfg.threshold {
        Verdict::Fail
    } else {
        Verdict::Ambiguous
    }
}

/// Both tests applied to one data set.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditOutcome {
    pub moments: ConsistencyReport,
    pub p_minus: ConsistencyReport,
    pub moments_verdict: Verdict,
    pub p_minus_verdict: Verdict,
}

impl AuditOutcome {
    pub fn agree(&self) -> bool {
        self.moments_verdict == self.p_minus_verdict && self.moments_verdict != Verdict::Ambiguous
    }
}

pub fn audit_data(d: &Sinogram, cfg: &AuditConfig) -> Result<AuditOutcome> {
    let moments = moment_conditions(d, cfg.n_max, cfg.k_max, cfg.tolerance)?;
    let p_minus = p_minus_range_test(d, cfg.limit, cfg.tolerance);
    Ok(AuditOutcome {
        moments_verdict: verdict(&moments, cfg),
        p_minus_verdict: verdict(&p_minus, cfg),
        moments,
        p_minus,
    })
}

/// Paired outcomes on clean data `I0 f` and on `I0 f + spike`.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceAudit {
    pub clean: AuditOutcome,
    pub spiked: Option<AuditOutcome>,
}

impl EquivalenceAudit {
    /// Both tests agree, passing on clean data and failing on spiked data.
    pub fn consistent(&self) -> bool {
        self.clean.agree()
            && self.clean.moments_verdict == Verdict::Pass
            && self
                .spiked
                .as_ref()
                .is_none_or(|s| s.agree() && s.moments_verdict == Verdict::Fail)
    }
}

/// Runs both range tests on `I0 f` and, if given, on `I0 f + amplitude * u'_hat_{p,q}`.
pub fn equivalence_audit(
    f: &DiskImage,
    grid: SinoGrid,
    quad: &QuadratureSpec,
    spike: Option<((i32, i32), C64)>,
    cfg: &AuditConfig,
) -> Result<EquivalenceAudit> {
    let g = f.grid();
    let rim = 1.0 - 2.0 * g.hx().max(g.hy());
    let peak = f.max_abs();
    for i in 0..g.nx {
        for j in 0..g.ny {
            if g.x(i).hypot(g.y(j)) > rim && f.get(i, j).norm() > 1e-10 * peak.max(1e-300) {
                return invalid("the audit needs a phantom that vanishes near the unit circle");
            }
        }
    }
    let d = i0(f, grid, quad);
    let clean = audit_data(&d, cfg)?;
    let spiked = match spike {
        None => None,
        Some(((p, q), amp)) => {
            if !p_minus_orthocomplement(p, q) {
                return invalid(format!("u'_{{{p},{q}}} is not an orthocomplement element"));
            }
            let e = crate::fiber::BasisElement::new(Basis::UPrime, p, q)?.hat(grid);
            Some(audit_data(&d.axpy(amp, &e)?, cfg)?)
        }
    };
    Ok(EquivalenceAudit { clean, spiked })
}
