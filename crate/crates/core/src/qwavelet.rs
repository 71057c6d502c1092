//! Generalized q-Bessel wavelets: admissibility, dilation, atoms, the
//! continuous wavelet transform, the Plancherel pairing and reconstruction.
//!
//! Scales `a = q^{ka}` and positions `b = q^{kb}` both run over lattice
//! exponents. Since `F(Psi_a)(t) = F(Psi)(a t)`, a whole scale row of the
//! transform is one Fourier evaluation:
//! `C(a, .) = sqrt(a) F[F f . F Psi(a .)]`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::qlattice::{LatticeFn, QGrid};
use crate::qspecial::{kernel_sup_bound, VParams};
use crate::qtransform::{
    fourier_condition, fourier_fast, fourier_qv, inner_product_qv, norm2, translate_spectrum, TransformPlan,
};
use crate::sum::CompensatedSum;

/// Relative energy of a dilated function lost off the window above which
/// the dilation counts as clipped.
pub const CLIP_ENERGY_TOL: f64 = 1e-24;

/// An admissible wavelet with its cached transform.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavelet {
    /// `Psi` on the lattice.
    pub psi: LatticeFn,
    /// `F Psi` recomputed from `psi`.
    pub psi_hat: LatticeFn,
    /// `C_{v,Psi}`.
    pub c_admis: f64,
    pub v: VParams,
    /// Heights the wavelet was built from, when constructed in the Fourier domain.
    pub spec: Option<Vec<(i32, f64)>>,
}

impl Wavelet {
    /// Wraps a spatial `Psi`; the admissibility constant comes from `F Psi`.
    pub fn from_spatial(psi: LatticeFn, plan: &TransformPlan) -> Result<Self> {
        let psi_hat = fourier_qv(&psi, plan)?.output;
        let c_admis = admissibility_constant(&psi_hat, plan.grid())?;
        Ok(Self {
            psi,
            psi_hat,
            c_admis,
            v: *plan.v(),
            spec: None,
        })
    }

    /// Smallest and largest index carrying a nonzero Fourier height.
    pub fn spec_support(&self) -> Option<(i32, i32)> {
        let spec = self.spec.as_ref()?;
        let nz = spec.iter().filter(|(_, h)| *h != 0.0).map(|(k, _)| *k);
        let lo = nz.clone().min()?;
        Some((lo, nz.max()?))
    }

    /// `||F Psi - spec|| / ||spec||` in the transform norm.
    pub fn spec_residual(&self, plan: &TransformPlan) -> Option<f64> {
        let spec = self.spec.as_ref()?;
        let target = spec_function(spec, plan.grid()).ok()?;
        let diff = self.psi_hat.lin_comb(1.0, &target, -1.0).ok()?;
        Some(norm2(&diff, &self.v).ok()? / norm2(&target, &self.v).ok()?)
    }
}

/// `C_{v,Psi} = int |F Psi(a)|^2 d_q a / a = (1-q) sum_k |F Psi(q^k)|^2`.
pub fn admissibility_constant(psi_hat: &LatticeFn, grid: &QGrid) -> Result<f64> {
    if !grid.same_lattice(psi_hat.grid()) {
        return Err(Error::GridMismatch("wavelet spectrum lives on another grid".into()));
    }
    let mut acc = CompensatedSum::new();
    for k in grid.summation_indices() {
        let h = psi_hat.at_or_zero(k);
        acc.add(h * h);
    }
    let c = (1.0 - grid.q()) * acc.value();
    if c > 0.0 && c.is_finite() {
        Ok(c)
    } else {
        Err(Error::Admissibility(format!(
            "admissibility constant {c} is not in (0, inf)"
        )))
    }
}

fn spec_function(spec: &[(i32, f64)], grid: &QGrid) -> Result<LatticeFn> {
    if spec.is_empty() {
        return Err(Error::Validation("wavelet spec is empty".into()));
    }
    let mut values = vec![0.0; grid.len()];
    for &(k, h) in spec {
        let Some(i) = grid.offset(k) else {
            return Err(Error::Index {
                index: k as i64,
                n_min: grid.n_min(),
                n_max: grid.n_max(),
            });
        };
        if !h.is_finite() {
            return Err(Error::Validation(format!("wavelet height at k = {k} is not finite")));
        }
        if values[i] != 0.0 {
            return Err(Error::Validation(format!("wavelet spec repeats k = {k}")));
        }
        values[i] = h;
    }
    LatticeFn::new(grid.clone(), values)
}

/// Builds `Psi = F[g]` from Fourier-domain heights `g`, so that `F Psi = g`
/// up to the involution residual. `C_{v,Psi}` is taken from the heights.
pub fn make_wavelet_from_fourier(spec: &[(i32, f64)], plan: &TransformPlan) -> Result<Wavelet> {
    let g = spec_function(spec, plan.grid())?;
    let c_admis = admissibility_constant(&g, plan.grid())?;
    let psi = fourier_qv(&g, plan)?.output;
    let psi_hat = fourier_qv(&psi, plan)?.output;
    let mut spec = spec.to_vec();
    spec.sort_by_key(|(k, _)| *k);
    Ok(Wavelet {
        psi,
        psi_hat,
        c_admis,
        v: *plan.v(),
        spec: Some(spec),
    })
}

/// A dilated function and the share of its weighted energy pushed off the window.
#[derive(Debug, Clone, PartialEq)]
pub struct Dilated {
    pub output: LatticeFn,
    pub clipped_energy: f64,
}

impl Dilated {
    pub fn is_clipped(&self) -> bool {
        self.clipped_energy > CLIP_ENERGY_TOL
    }
}

/// `Psi_a(q^k) = a^{-(2|v|+2)} Psi(q^{k-ka})` with `a = q^{ka}`; samples that
/// would come from outside the window are zero.
pub fn dilate(psi: &LatticeFn, ka: i32, v: &VParams) -> Result<Dilated> {
    let grid = psi.grid();
    let q = grid.q();
    let scale = q.powi(ka).powf(-v.measure_exponent());
    let values: Vec<f64> = grid.indices().map(|k| scale * psi.at_or_zero(k - ka)).collect();
    if let Some(i) = values.iter().position(|x| !x.is_finite()) {
        return Err(Error::Overflow(format!(
            "dilation by q^{ka} overflows at k = {}",
            grid.n_min() + i as i32
        )));
    }
    let weights = grid.jackson_weights(2.0 * v.abs_v() + 1.0);
    let mut lost = CompensatedSum::new();
    let mut total = CompensatedSum::new();
    for ((k, x), w) in psi.iter().zip(&weights) {
        let e = x * x * w;
        total.add(e);
        if !grid.contains(k + ka) {
            lost.add(e);
        }
    }
    let clipped_energy = if total.value() > 0.0 {
        lost.value() / total.value()
    } else {
        0.0
    };
    Ok(Dilated {
        output: LatticeFn::new(grid.clone(), values)?,
        clipped_energy,
    })
}

/// `F(Psi_a)(q^t) = F Psi(q^{t+ka})`, zero past the window.
pub fn dilated_spectrum(psi_hat: &LatticeFn, ka: i32) -> LatticeFn {
    let grid = psi_hat.grid();
    LatticeFn::from_fn(grid, |t, _| psi_hat.at_or_zero(t + ka)).expect("shifted samples are finite")
}

/// `Psi_{(a,b),v} = sqrt(a) T_b(Psi_a)` evaluated literally: dilate `Psi`,
/// transform, translate.
pub fn wavelet_atom(w: &Wavelet, ka: i32, kb: i32, plan: &TransformPlan) -> Result<Atom> {
    let d = dilate(&w.psi, ka, &w.v)?;
    let spectrum = fourier_qv(&d.output, plan)?;
    atom_from_spectrum(&spectrum.output, ka, kb, plan).map(|mut atom| {
        atom.clipped |= d.is_clipped();
        atom.warnings += spectrum.warning_count();
        atom
    })
}

/// An atom with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub output: LatticeFn,
    pub clipped: bool,
    pub warnings: usize,
}

fn atom_from_spectrum(spectrum: &LatticeFn, ka: i32, kb: i32, plan: &TransformPlan) -> Result<Atom> {
    let t = translate_spectrum(spectrum, kb, plan)?;
    let root_a = plan.q().powi(ka).sqrt();
    Ok(Atom {
        warnings: t.warning_count(),
        output: t.output.scaled(root_a),
        clipped: false,
    })
}

/// Wavelet coefficients over a rectangle of scale and position exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct Scalogram {
    pub q: f64,
    pub alpha: f64,
    pub n_index: u32,
    pub n_min: i32,
    pub n_max: i32,
    pub ka_lo: i32,
    pub ka_hi: i32,
    pub kb_lo: i32,
    pub kb_hi: i32,
    /// Row-major over `ka`, then `kb`.
    pub coeffs: Vec<f64>,
    /// Cells whose evaluation touched flagged kernel entries or clipped dilations.
    pub warnings: usize,
}

impl Scalogram {
    pub fn zeros(plan: &TransformPlan, ka: RangeInclusive<i32>, kb: RangeInclusive<i32>) -> Result<Self> {
        check_ranges(plan.grid(), &ka, &kb)?;
        let g = plan.grid();
        let rows = (ka.end() - ka.start() + 1) as usize;
        let cols = (kb.end() - kb.start() + 1) as usize;
        Ok(Self {
            q: g.q(),
            alpha: plan.v().alpha(),
            n_index: plan.v().n_index(),
            n_min: g.n_min(),
            n_max: g.n_max(),
            ka_lo: *ka.start(),
            ka_hi: *ka.end(),
            kb_lo: *kb.start(),
            kb_hi: *kb.end(),
            coeffs: vec![0.0; rows * cols],
            warnings: 0,
        })
    }

    pub fn ka_range(&self) -> RangeInclusive<i32> {
        self.ka_lo..=self.ka_hi
    }

    pub fn kb_range(&self) -> RangeInclusive<i32> {
        self.kb_lo..=self.kb_hi
    }

    pub fn cols(&self) -> usize {
        (self.kb_hi - self.kb_lo + 1) as usize
    }

    fn cell(&self, ka: i32, kb: i32) -> usize {
        (ka - self.ka_lo) as usize * self.cols() + (kb - self.kb_lo) as usize
    }

    pub fn get(&self, ka: i32, kb: i32) -> Option<f64> {
        if self.ka_range().contains(&ka) && self.kb_range().contains(&kb) {
            Some(self.coeffs[self.cell(ka, kb)])
        } else {
            None
        }
    }

    pub fn set(&mut self, ka: i32, kb: i32, value: f64) {
        let i = self.cell(ka, kb);
        self.coeffs[i] = value;
    }

    pub fn row(&self, ka: i32) -> &[f64] {
        let start = (ka - self.ka_lo) as usize * self.cols();
        &self.coeffs[start..start + self.cols()]
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Same provenance and ranges.
    pub fn same_layout(&self, other: &Scalogram) -> bool {
        self.q.to_bits() == other.q.to_bits()
            && self.alpha.to_bits() == other.alpha.to_bits()
            && self.n_index == other.n_index
            && (self.n_min, self.n_max) == (other.n_min, other.n_max)
            && (self.ka_lo, self.ka_hi, self.kb_lo, self.kb_hi) == (other.ka_lo, other.ka_hi, other.kb_lo, other.kb_hi)
    }

    /// Does the provenance match this plan?
    pub fn matches_plan(&self, plan: &TransformPlan) -> bool {
        let g = plan.grid();
        self.q.to_bits() == g.q().to_bits()
            && self.alpha.to_bits() == plan.v().alpha().to_bits()
            && self.n_index == plan.v().n_index()
            && (self.n_min, self.n_max) == (g.n_min(), g.n_max())
    }

    pub fn lin_comb(&self, a: f64, other: &Scalogram, b: f64) -> Result<Self> {
        if !self.same_layout(other) {
            return Err(Error::GridMismatch("scalograms have different layouts".into()));
        }
        let mut out = self.clone();
        for (o, x) in out.coeffs.iter_mut().zip(&other.coeffs) {
            *o = a * *o + b * x;
        }
        out.warnings = self.warnings + other.warnings;
        Ok(out)
    }
}

fn check_ranges(grid: &QGrid, ka: &RangeInclusive<i32>, kb: &RangeInclusive<i32>) -> Result<()> {
    if ka.is_empty() || kb.is_empty() {
        return Err(Error::Validation("scale and position ranges must be nonempty".into()));
    }
    for k in [*kb.start(), *kb.end()] {
        if !grid.contains(k) {
            return Err(Error::Index {
                index: k as i64,
                n_min: grid.n_min(),
                n_max: grid.n_max(),
            });
        }
    }
    let span = grid.n_max() - grid.n_min();
    for k in [*ka.start(), *ka.end()] {
        if k.abs() > span {
            return Err(Error::Validation(format!(
                "scale exponent {k} moves the wavelet entirely off the window (|ka| <= {span})"
            )));
        }
    }
    Ok(())
}

fn check_wavelet(w: &Wavelet, plan: &TransformPlan) -> Result<()> {
    if w.v != *plan.v() || !w.psi.grid().same_lattice(plan.grid()) {
        return Err(Error::GridMismatch("wavelet was built for another plan".into()));
    }
    Ok(())
}

/// Direct path: `C(a,b) = c_v int f(x) Psi_{(a,b)}(x) x^{2|v|+1} d_q x`
/// with each atom built literally.
pub fn cwt(
    f: &LatticeFn,
    w: &Wavelet,
    ka: RangeInclusive<i32>,
    kb: RangeInclusive<i32>,
    plan: &TransformPlan,
) -> Result<Scalogram> {
    Ok(cwt_with_scales(f, w, ka, kb, plan)?.0)
}

/// [`cwt`] plus, per cell, the rounding scale of the direct sum
/// `c_v sqrt(a) sum_t A_a(t) |J[b+t]| w_t B(t)`, where `A_a` and `B` are the
/// [`fourier_condition`] scales of `Psi_a` and `f` (same layout as the
/// coefficients). It bounds the rounding of [`cwt_fast`] as well.
pub fn cwt_with_scales(
    f: &LatticeFn,
    w: &Wavelet,
    ka: RangeInclusive<i32>,
    kb: RangeInclusive<i32>,
    plan: &TransformPlan,
) -> Result<(Scalogram, Vec<f64>)> {
    check_wavelet(w, plan)?;
    let mut out = Scalogram::zeros(plan, ka.clone(), kb.clone())?;
    let mut scales = vec![0.0; out.coeffs.len()];
    let f_cond = fourier_condition(f, plan)?;
    for a in ka {
        let d = dilate(&w.psi, a, &w.v)?;
        let spectrum = fourier_qv(&d.output, plan)?;
        let psi_cond = fourier_condition(&d.output, plan)?;
        for b in kb.clone() {
            let atom = atom_from_spectrum(&spectrum.output, a, b, plan)?;
            let value = plan.c_v() * inner_product_qv(f, &atom.output, plan.v())?;
            out.set(a, b, value);
            scales[out.cell(a, b)] = direct_condition(&f_cond, &psi_cond, a, b, plan);
            if atom.warnings > 0 || d.is_clipped() || spectrum.warning_count() > 0 {
                out.warnings += 1;
            }
        }
    }
    Ok((out, scales))
}

fn direct_condition(f_cond: &[f64], psi_cond: &[f64], ka: i32, kb: i32, plan: &TransformPlan) -> f64 {
    let mut acc = CompensatedSum::new();
    for ((t, pc), fc) in plan.grid().indices().zip(psi_cond).zip(f_cond) {
        acc.add(pc * plan.j(kb + t).abs() * plan.weight(t) * fc);
    }
    plan.c_v() * plan.q().powi(ka).sqrt() * acc.value()
}

/// One cell by the direct path, with the rounding scale it is measured
/// against (see [`cwt_with_scales`]).
pub fn cwt_cell(f: &LatticeFn, w: &Wavelet, ka: i32, kb: i32, plan: &TransformPlan) -> Result<(f64, f64)> {
    check_wavelet(w, plan)?;
    let d = dilate(&w.psi, ka, &w.v)?;
    let spectrum = fourier_qv(&d.output, plan)?;
    let atom = atom_from_spectrum(&spectrum.output, ka, kb, plan)?;
    let value = plan.c_v() * inner_product_qv(f, &atom.output, plan.v())?;
    let psi_cond = fourier_condition(&d.output, plan)?;
    let scale = direct_condition(&fourier_condition(f, plan)?, &psi_cond, ka, kb, plan);
    Ok((value, scale))
}

/// Fast path: `C(a, .) = sqrt(a) F[F f . F Psi(a .)]`, one Fourier evaluation per scale.
pub fn cwt_fast(
    f: &LatticeFn,
    w: &Wavelet,
    ka: RangeInclusive<i32>,
    kb: RangeInclusive<i32>,
    plan: &TransformPlan,
) -> Result<Scalogram> {
    check_wavelet(w, plan)?;
    let mut out = Scalogram::zeros(plan, ka.clone(), kb.clone())?;
    let spectrum = fourier_fast(f, plan)?;
    for a in ka {
        let product = spectrum.output.mul(&dilated_spectrum(&w.psi_hat, a))?;
        let row = fourier_fast(&product, plan)?;
        let root_a = plan.q().powi(a).sqrt();
        for b in kb.clone() {
            out.set(a, b, root_a * row.output.at_or_zero(b));
            if row.warnings[(b - plan.grid().n_min()) as usize] {
                out.warnings += 1;
            }
        }
    }
    Ok(out)
}

/// `(1 / C_{v,Psi}) sum_a sum_b Cf Cg b^{2|v|+1} d_q b d_q a / a^2`.
pub fn parseval_pairing(sf: &Scalogram, sg: &Scalogram, w: &Wavelet, plan: &TransformPlan) -> Result<f64> {
    if !sf.same_layout(sg) || !sf.matches_plan(plan) {
        return Err(Error::GridMismatch("scalograms must share layout and plan".into()));
    }
    let q = plan.q();
    let mut acc = CompensatedSum::new();
    for a in sf.ka_range() {
        let scale_mass = (1.0 - q) / q.powi(a);
        for (b, (x, y)) in sf.kb_range().zip(sf.row(a).iter().zip(sg.row(a))) {
            acc.add(x * y * plan.weight(b) * scale_mass);
        }
    }
    Ok(acc.value() / w.c_admis)
}

/// A reconstruction with its coverage diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub output: LatticeFn,
    /// Set when the scalogram's ranges are narrower than [`recommended_scales`]
    /// or do not span every position of the window.
    pub coverage_warning: bool,
}

/// `f(x) = (c_v / C) sum_a sum_b C(a,b) Psi_{(a,b)}(x) b^{2|v|+1} d_q b d_q a / a^2`,
/// evaluated per scale as `(1 - q) a^{-1/2} F[F Psi_a . F C(a, .)] / C`.
pub fn reconstruct(s: &Scalogram, w: &Wavelet, plan: &TransformPlan) -> Result<Reconstruction> {
    check_wavelet(w, plan)?;
    if !s.matches_plan(plan) {
        return Err(Error::GridMismatch("scalogram provenance differs from the plan".into()));
    }
    let grid = plan.grid();
    let q = plan.q();
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); grid.len()];
    for a in s.ka_range() {
        let row = LatticeFn::from_fn(grid, |b, _| s.get(a, b).unwrap_or(0.0))?;
        let row_hat = fourier_fast(&row, plan)?.output;
        let product = row_hat.mul(&dilated_spectrum(&w.psi_hat, a))?;
        let back = fourier_fast(&product, plan)?.output;
        let factor = (1.0 - q) / q.powi(a).sqrt();
        for (sum, x) in acc.iter_mut().zip(back.values()) {
            sum.add(factor * x);
        }
    }
    let values = acc.iter().map(|s| s.value() / w.c_admis).collect();
    Ok(Reconstruction {
        output: LatticeFn::new(grid.clone(), values)?,
        coverage_warning: coverage_short(s, w, plan),
    })
}

/// Reconstruction summing literal atoms, `O(N^3)` per scale; a reference for
/// [`reconstruct`].
pub fn reconstruct_direct(s: &Scalogram, w: &Wavelet, plan: &TransformPlan) -> Result<Reconstruction> {
    check_wavelet(w, plan)?;
    if !s.matches_plan(plan) {
        return Err(Error::GridMismatch("scalogram provenance differs from the plan".into()));
    }
    let grid = plan.grid();
    let q = plan.q();
    let mut acc: Vec<CompensatedSum> = vec![CompensatedSum::new(); grid.len()];
    for a in s.ka_range() {
        let d = dilate(&w.psi, a, &w.v)?;
        let spectrum = fourier_qv(&d.output, plan)?.output;
        let scale_mass = (1.0 - q) / q.powi(a);
        for b in s.kb_range() {
            let coeff = s.get(a, b).unwrap_or(0.0) * plan.weight(b) * scale_mass;
            if coeff == 0.0 {
                continue;
            }
            let atom = atom_from_spectrum(&spectrum, a, b, plan)?;
            for (sum, x) in acc.iter_mut().zip(atom.output.values()) {
                sum.add(coeff * x);
            }
        }
    }
    let c = plan.c_v() / w.c_admis;
    let values = acc.iter().map(|s| c * s.value()).collect();
    Ok(Reconstruction {
        output: LatticeFn::new(grid.clone(), values)?,
        coverage_warning: coverage_short(s, w, plan),
    })
}

fn coverage_short(s: &Scalogram, w: &Wavelet, plan: &TransformPlan) -> bool {
    let g = plan.grid();
    if s.kb_lo > g.n_min() || s.kb_hi < g.n_max() {
        return true;
    }
    match recommended_scales(w, plan) {
        Some(r) => s.ka_lo > *r.start() || s.ka_hi < *r.end(),
        None => false,
    }
}

/// Scale exponents for which `F Psi(a t)` sweeps every safe-core frequency `t`
/// across the wavelet's Fourier support.
pub fn recommended_scales(w: &Wavelet, plan: &TransformPlan) -> Option<RangeInclusive<i32>> {
    let (k0, k1) = w.spec_support()?;
    let (lo, hi) = plan.safe_core()?;
    Some(k0 - hi..=k1 - lo)
}

/// Theorem-4 envelope `c_v ||Psi|| ||f|| / ((q; q^2)_inf^2 a^{|v|+1/2})`.
pub fn coefficient_bound(f_norm: f64, psi_norm: f64, ka: i32, plan: &TransformPlan) -> Result<f64> {
    let q = plan.q();
    let k = kernel_sup_bound(q)?;
    let a = q.powi(ka);
    Ok(plan.c_v() * k * psi_norm * f_norm / a.powf(plan.v().abs_v() + 0.5))
}
