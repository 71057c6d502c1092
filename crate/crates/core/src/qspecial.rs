//! q-Pochhammer products, the normalized q-Bessel function, the generalized
//! `(q, v)` kernel and its normalization, the q-Bessel difference operator and
//! the `(q, v)` delta.
//!
//! Two evaluation routes exist for `j_alpha(x; q^2)`:
//!
//! - [`j_alpha`] sums the power series directly. It is exact in spirit for
//!   `x <= 1` but at `x = q^{-m}` the alternating terms grow like `q^{-m^2}`
//!   while the sum decays like `q^{m^2}`, so the result is flagged once the
//!   largest term dwarfs it.
//! - [`j_alpha_lattice`] evaluates on lattice points `q^s`. For `s >= 0` it uses
//!   the series; for `s < 0` it runs the three-term q-difference equation
//!   upwards from deep in the decaying region (Miller's algorithm for the
//!   minimal solution) and normalizes against the series at `s = -1, 0`.

use crate::error::{Error, Result};
use crate::qlattice::{LatticeFn, QGrid};
use crate::sum::CompensatedSum;

pub const DEFAULT_SERIES_TOL: f64 = 1e-17;
pub const SERIES_TERM_CAP: usize = 500;
/// Largest-term / result ratio above which a series value is flagged.
pub const CANCELLATION_LIMIT: f64 = 1e13;

const POCHHAMMER_CUTOFF: f64 = 1e-18;
const POCHHAMMER_CAP: usize = 1_000_000;

/// `v = (alpha, beta)` with `beta = -n_index`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VParams {
    alpha: f64,
    n_index: u32,
}

impl VParams {
    pub fn new(alpha: f64, n_index: u32) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
        }
        let abs_v = alpha - n_index as f64;
        if !(abs_v > -1.0) {
            return Err(Error::Domain(format!(
                "alpha + beta = {abs_v} must exceed -1 (alpha = {alpha}, n = {n_index})"
            )));
        }
        Ok(Self { alpha, n_index })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_index(&self) -> u32 {
        self.n_index
    }

    pub fn beta(&self) -> f64 {
        -(self.n_index as f64)
    }

    /// `|v| = alpha + beta`.
    pub fn abs_v(&self) -> f64 {
        self.alpha + self.beta()
    }

    /// Order of the q-Bessel function inside the generalized kernel, `alpha + n`.
    pub fn kernel_order(&self) -> f64 {
        self.alpha + self.n_index as f64
    }

    /// Exponent `2|v| + 2` of the transform measure `t^{2|v|+1} d_q t` on the lattice.
    pub fn measure_exponent(&self) -> f64 {
        2.0 * self.abs_v() + 2.0
    }
}

fn check_q(q: f64) -> Result<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("q must lie in (0, 1), got {q}")))
    }
}

/// `(a; q)_m = prod_{k<m} (1 - a q^k)`.
pub fn q_pochhammer(a: f64, q: f64, m: u32) -> f64 {
    let mut prod = 1.0;
    let mut qk = 1.0;
    for _ in 0..m {
        prod *= 1.0 - a * qk;
        qk *= q;
    }
    prod
}

/// `(a; q)_inf`, truncated once `|a| q^k < 1e-18`.
pub fn q_pochhammer_inf(a: f64, q: f64) -> Result<f64> {
    check_q(q)?;
    if !a.is_finite() {
        return Err(Error::Domain(format!("a must be finite, got {a}")));
    }
    let mut prod = 1.0;
    let mut term = a;
    for _ in 0..POCHHAMMER_CAP {
        if term.abs() < POCHHAMMER_CUTOFF {
            return Ok(prod);
        }
        prod *= 1.0 - term;
        term *= q;
    }
    Err(Error::Convergence(format!(
        "({a}; {q})_inf needs more than {POCHHAMMER_CAP} factors"
    )))
}

/// `c_{q,alpha} = (q^{2alpha+2}; q^2)_inf / ((1-q) (q^2; q^2)_inf)`.
pub fn c_q_alpha(q: f64, alpha: f64) -> Result<f64> {
    check_q(q)?;
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
    }
    let q2 = q * q;
    let num = q_pochhammer_inf(q.powf(2.0 * alpha + 2.0), q2)?;
    let den = q_pochhammer_inf(q2, q2)?;
    Ok(num / ((1.0 - q) * den))
}

/// Normalization of the generalized transform, `q^{n(alpha+n+1)} c_{q, alpha+n}`.
///
/// This is the constant for which `c^2 int j~(tx) j~(ty) t^{2|v|+1} d_q t`
/// reproduces the delta: shifting `u = q^n t` in the Jackson integral costs
/// `q^{-n}` from the measure on top of `q^{-n(2alpha+2n+1)}` from the weight.
/// It equals `q^n` times [`c_q_v_printed`] and coincides with [`c_q_alpha`]
/// when `n = 0`.
pub fn c_q_v(q: f64, v: &VParams) -> Result<f64> {
    c_q_v_raw(q, v.alpha(), v.n_index())
}

/// [`c_q_v`] from the raw parameters, without the `alpha - n > -1` check.
pub fn c_q_v_raw(q: f64, alpha: f64, n_index: u32) -> Result<f64> {
    let shifted = c_q_alpha(q, alpha + n_index as f64)?;
    if n_index == 0 {
        return Ok(shifted);
    }
    let n = n_index as f64;
    Ok(q.powf(n * (alpha + n + 1.0)) * shifted)
}

/// The constant as typeset,
/// `q^{n(alpha+n)} (q^{2alpha+2}; q^2)_inf / ((1-q) (q^2; q^2)_inf (q^{2alpha+2}; q^2)_n)`.
///
/// Kept for comparison; with it the orthogonality relation is off by `q^{-2n}`.
pub fn c_q_v_printed(q: f64, v: &VParams) -> Result<f64> {
    c_q_v_printed_raw(q, v.alpha(), v.n_index())
}

/// Both routes to the typeset constant: the literal display and
/// `q^{n(alpha+n)} c_{q,alpha+n}`. Requires `alpha > -1`.
pub fn c_q_v_printed_routes(q: f64, alpha: f64, n_index: u32) -> Result<(f64, f64)> {
    check_q(q)?;
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
    }
    let q2 = q * q;
    let base = q.powf(2.0 * alpha + 2.0);
    let inf = q_pochhammer_inf(base, q2)?;
    let den = (1.0 - q) * q_pochhammer_inf(q2, q2)? * q_pochhammer(base, q2, n_index);
    let n = n_index as f64;
    let lead = q.powf(n * (alpha + n));
    let literal = lead * inf / den;
    let shifted = lead * c_q_alpha(q, alpha + n)?;
    Ok((literal, shifted))
}

pub fn c_q_v_printed_raw(q: f64, alpha: f64, n_index: u32) -> Result<f64> {
    let (literal, shifted) = c_q_v_printed_routes(q, alpha, n_index)?;
    if (literal - shifted).abs() > 1e-13 * shifted.abs() {
        return Err(Error::Convergence(format!(
            "normalization routes disagree: {literal} vs {shifted}"
        )));
    }
    Ok(literal)
}

/// `1 / (q; q^2)_inf^2`, the uniform kernel bound used for the translation
/// and coefficient estimates.
pub fn kernel_sup_bound(q: f64) -> Result<f64> {
    let p = q_pochhammer_inf(q, q * q)?;
    Ok(1.0 / (p * p))
}

/// Largest `m` with `m^2 ln(1/q) <= 30`: arguments `q^{-m}` up to this depth
/// keep the direct series inside double precision.
pub fn series_envelope(q: f64) -> i32 {
    (30.0 / (1.0 / q).ln()).sqrt().floor() as i32
}

/// Result of a series evaluation with its cancellation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval {
    pub value: f64,
    /// Largest absolute term encountered.
    pub max_term: f64,
    pub terms: usize,
    /// Set when `max_term > CANCELLATION_LIMIT * |value|`.
    pub cancellation_warning: bool,
}

impl SeriesEval {
    fn scaled(self, c: f64) -> Self {
        Self {
            value: c * self.value,
            max_term: c.abs() * self.max_term,
            ..self
        }
    }
}

/// Normalized q-Bessel function `j_alpha(x; q^2)` by direct summation.
pub fn j_alpha(x: f64, q: f64, alpha: f64) -> Result<SeriesEval> {
    j_alpha_with_tol(x, q, alpha, DEFAULT_SERIES_TOL)
}

pub fn j_alpha_with_tol(x: f64, q: f64, alpha: f64, tol: f64) -> Result<SeriesEval> {
    check_q(q)?;
    if !(alpha > -1.0) {
        return Err(Error::Domain(format!("alpha must exceed -1, got {alpha}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("argument must be finite and >= 0, got {x}")));
    }
    let x2 = x * x;
    let q2 = q * q;
    let a_base = q.powf(2.0 * alpha + 2.0);
    let mut sum = CompensatedSum::new();
    let mut term = 1.0f64;
    let mut max_term = 0.0f64;
    // q^{2k+2}, q^{2alpha+2+2k} and q^{2+2k} at step k
    let mut q_step = q2;
    let mut a_k = a_base;
    for k in 0..SERIES_TERM_CAP {
        sum.add(term);
        max_term = max_term.max(term.abs());
        let next = term * (-q_step * x2) / ((1.0 - a_k) * (1.0 - q_step));
        if !next.is_finite() {
            return Err(Error::Overflow(format!("j_alpha term overflow at x = {x}")));
        }
        let partial = sum.value();
        if next == 0.0 || next.abs() <= tol * partial.abs() {
            return Ok(SeriesEval {
                value: partial,
                max_term,
                terms: k + 1,
                cancellation_warning: max_term > CANCELLATION_LIMIT * partial.abs(),
            });
        }
        term = next;
        q_step *= q2;
        a_k *= q2;
    }
    Err(Error::Convergence(format!(
        "j_alpha series at x = {x} did not settle within {SERIES_TERM_CAP} terms"
    )))
}

/// `j_alpha(q^s; q^2)` for `s` in `[s_lo, s_hi]`, with per-entry flags.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBessel {
    pub s_lo: i32,
    pub values: Vec<f64>,
    pub flags: Vec<bool>,
}

/// Relative agreement required between the recurrence and the series at the
/// normalization points before recurrence values are trusted unflagged.
const NORMALIZATION_TOL: f64 = 1e-12;

/// Evaluates `j_alpha` on the lattice points `q^s`, `s_lo <= s <= s_hi`.
pub fn j_alpha_lattice(q: f64, alpha: f64, s_lo: i32, s_hi: i32, tol: f64) -> Result<LatticeBessel> {
    check_q(q)?;
    if s_lo > s_hi {
        return Err(Error::Domain(format!("empty range [{s_lo}, {s_hi}]")));
    }
    let len = (s_hi - s_lo + 1) as usize;
    let mut values = vec![0.0; len];
    let mut flags = vec![false; len];

    for s in s_lo.max(0)..=s_hi {
        let e = j_alpha_with_tol(q.powi(s), q, alpha, tol)?;
        let i = (s - s_lo) as usize;
        values[i] = e.value;
        flags[i] = e.cancellation_warning;
    }

    if s_lo < 0 {
        let (rec_lo, rec) = minimal_solution(q, alpha, s_lo)?;
        let anchor_m1 = j_alpha_with_tol(q.powi(-1), q, alpha, tol)?.value;
        let anchor_0 = j_alpha_with_tol(1.0, q, alpha, tol)?.value;
        let r_m1 = rec[(-1 - rec_lo) as usize];
        let r_0 = rec[(-rec_lo) as usize];
        let scale = (anchor_m1 * r_m1 + anchor_0 * r_0) / (r_m1 * r_m1 + r_0 * r_0);
        let misfit =
            ((scale * r_m1 - anchor_m1).abs() + (scale * r_0 - anchor_0).abs()) / (anchor_m1.abs() + anchor_0.abs());
        let suspect = !(misfit <= NORMALIZATION_TOL) || !scale.is_finite();
        for s in s_lo..=s_hi.min(-1) {
            let i = (s - s_lo) as usize;
            values[i] = scale * rec[(s - rec_lo) as usize];
            flags[i] = suspect;
        }
    }
    Ok(LatticeBessel { s_lo, values, flags })
}

/// Unnormalized minimal solution of
/// `u_{s-1} - (1 + q^{2alpha} - q^{2s}) u_s + q^{2alpha} u_{s+1} = 0`
/// on `s in [start, 0]`, returned as `(start, values)`.
fn minimal_solution(q: f64, alpha: f64, s_lo: i32) -> Result<(i32, Vec<f64>)> {
    // Start well inside the region where q^{2s} dominates the coefficients, so
    // the recessive solution is resolved to full precision long before s_lo.
    let dominance = -((1e4f64).ln() / (2.0 * (1.0 / q).ln())).ceil() as i32;
    let start = s_lo.min(-1).min(dominance) - 12;
    let q2a = q.powf(2.0 * alpha);
    let len = (-start + 1) as usize;
    let mut u = vec![0.0f64; len];
    u[0] = 1e-200;
    let mut prev = 0.0f64;
    for i in 0..len - 1 {
        let s = start + i as i32;
        let coef = 1.0 + q2a - q.powi(2 * s);
        let next = (coef * u[i] - prev) / q2a;
        prev = u[i];
        u[i + 1] = next;
        if next.abs() > 1e200 {
            for x in u.iter_mut().take(i + 2) {
                *x *= 1e-200;
            }
            prev *= 1e-200;
        }
        if !u[i + 1].is_finite() {
            return Err(Error::Overflow("q-Bessel recurrence overflowed".into()));
        }
    }
    Ok((start, u))
}

/// Generalized kernel `j~_{q,v}(x) = x^{2n} j_{alpha+n}(q^n x; q^2)` by series.
///
/// At `x = 0` this is the continuity limit: 1 for `n = 0`, else 0.
pub fn kernel_jtilde(x: f64, q: f64, v: &VParams) -> Result<SeriesEval> {
    let n = v.n_index() as i32;
    let inner = j_alpha(q.powi(n) * x, q, v.kernel_order())?;
    Ok(inner.scaled(x.powi(2 * n)))
}

/// The kernel as literally written, `x^{-2beta} j_{alpha-beta}(q^{-beta} x)`,
/// with real-valued exponents. Agrees with [`kernel_jtilde`] to rounding.
pub fn kernel_jtilde_literal(x: f64, q: f64, v: &VParams) -> Result<f64> {
    let beta = v.beta();
    let inner = j_alpha(q.powf(-beta) * x, q, v.alpha() - beta)?;
    Ok(x.powf(-2.0 * beta) * inner.value)
}

/// Kernel values `J[s] = j~_{q,v}(q^s)` on a contiguous range of exponents.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    s_lo: i32,
    values: Vec<f64>,
    flags: Vec<bool>,
}

impl KernelTable {
    pub fn new(q: f64, v: &VParams, s_lo: i32, s_hi: i32, tol: f64) -> Result<Self> {
        let n = v.n_index() as i32;
        let inner = j_alpha_lattice(q, v.kernel_order(), s_lo + n, s_hi + n, tol)?;
        let values = (s_lo..=s_hi)
            .zip(&inner.values)
            .map(|(s, &j)| if n == 0 { j } else { q.powi(2 * n * s) * j })
            .collect::<Vec<_>>();
        if let Some(i) = values.iter().position(|x: &f64| !x.is_finite()) {
            return Err(Error::Overflow(format!(
                "kernel value at s = {} is not finite",
                s_lo + i as i32
            )));
        }
        Ok(Self {
            s_lo,
            values,
            flags: inner.flags,
        })
    }

    pub fn s_lo(&self) -> i32 {
        self.s_lo
    }

    pub fn s_hi(&self) -> i32 {
        self.s_lo + self.values.len() as i32 - 1
    }

    /// `J[s]`; panics outside the tabulated range.
    #[inline]
    pub fn get(&self, s: i32) -> f64 {
        self.values[(s - self.s_lo) as usize]
    }

    pub fn flagged(&self, s: i32) -> bool {
        self.flags[(s - self.s_lo) as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn any_flagged(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }

    /// `max |J[s]|` over `[lo, hi]` (clamped to the table).
    pub fn max_abs(&self, lo: i32, hi: i32) -> f64 {
        (lo.max(self.s_lo)..=hi.min(self.s_hi()))
            .map(|s| self.get(s).abs())
            .fold(0.0, f64::max)
    }
}

/// q-Bessel operator
/// `[f(x/q) - (1 + q^{2alpha}) f(x) + q^{2alpha} f(qx)] / x^2` at `x = q^k`.
pub fn q_bessel_operator(f: &LatticeFn, k: i32, alpha: f64) -> Result<f64> {
    let grid = f.grid();
    let (Some(up), Some(here), Some(down)) = (f.at(k - 1), f.at(k), f.at(k + 1)) else {
        return Err(Error::Index {
            index: k as i64,
            n_min: grid.n_min() + 1,
            n_max: grid.n_max() - 1,
        });
    };
    let q2a = grid.q().powf(2.0 * alpha);
    let x = grid.point(k).expect("k checked above");
    Ok((up - (1.0 + q2a) * here + q2a * down) / (x * x))
}

/// `(1-q) x^{2|v|+2}` at `x = q^k`: the Jackson mass of one lattice point
/// under the measure `x^{2|v|+1} d_q x`.
pub fn lattice_mass(k: i32, q: f64, v: &VParams) -> f64 {
    (1.0 - q) * q.powi(k).powf(v.measure_exponent())
}

/// `delta_{q,v}(q^{k_x}, q^{k_y})`: `1 / ((1-q) x^{2|v|+2})` on the diagonal, else 0.
pub fn delta_qv(k_x: i32, k_y: i32, q: f64, v: &VParams) -> f64 {
    if k_x == k_y {
        1.0 / lattice_mass(k_x, q, v)
    } else {
        0.0
    }
}

/// `int_0^inf f(x) delta(x, t) x^{2|v|+1} d_q x` at `t = q^{k_t}`.
///
/// Only `x = t` survives, with `delta = 1 / D(t)` for `D = lattice_mass`; the
/// term is evaluated as `f * (mass / D)`, which is exactly `f(t)` for any `q`.
pub fn delta_reproduce(f: &LatticeFn, k_t: i32, v: &VParams) -> Result<f64> {
    let grid = f.grid();
    if !grid.contains(k_t) {
        return Err(Error::Index {
            index: k_t as i64,
            n_min: grid.n_min(),
            n_max: grid.n_max(),
        });
    }
    let q = grid.q();
    let mut acc = CompensatedSum::new();
    for (k, fk) in f.iter() {
        if k != k_t || !grid.summation_indices().contains(&k) {
            continue;
        }
        let mass = lattice_mass(k, q, v);
        let denom = lattice_mass(k_t, q, v);
        acc.add(fk * (mass / denom));
    }
    Ok(acc.value())
}

/// `c_v^2 int_0^inf j~(t x_i) j~(t x_j) t^{2|v|+1} d_q t`, with `t` running over
/// the summation indices of `lattice`.
pub fn orthogonality_integral(i: i32, j: i32, q: f64, v: &VParams, lattice: &QGrid) -> Result<f64> {
    orthogonality_integral_with(i, j, q, v, lattice, c_q_v(q, v)?)
}

/// As [`orthogonality_integral`] with an explicit normalization constant.
pub fn orthogonality_integral_with(i: i32, j: i32, q: f64, v: &VParams, lattice: &QGrid, c: f64) -> Result<f64> {
    let range = lattice.summation_indices();
    let (lo, hi) = (*range.start(), *range.end());
    let table = KernelTable::new(q, v, lo + i.min(j), hi + i.max(j), DEFAULT_SERIES_TOL)?;
    let mut acc = CompensatedSum::new();
    for m in range {
        acc.add(table.get(m + i) * table.get(m + j) * lattice_mass(m, q, v));
    }
    Ok(c * c * acc.value())
}

#[cfg(test)]
#[allow(clippy::excessive_precision)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn pochhammer_examples() {
        assert_eq!(q_pochhammer(3.7, 0.4, 0), 1.0);
        assert_eq!(q_pochhammer(0.0, 0.4, 9), 1.0);
        assert_eq!(q_pochhammer(0.5, 0.5, 2), 0.375);
    }

    #[test]
    fn pochhammer_inf_examples() {
        assert_eq!(q_pochhammer_inf(0.0, 0.3).unwrap(), 1.0);
        assert_eq!(q_pochhammer_inf(1.0, 0.5).unwrap(), 0.0);
        // frozen from a 300-digit product
        let oracle = 0.288_788_095_086_602_42;
        assert!(rel(q_pochhammer_inf(0.5, 0.5).unwrap(), oracle) < 1e-15);
        assert!(q_pochhammer_inf(0.5, 1.0).is_err());
    }

    #[test]
    fn pochhammer_inf_matches_longer_product() {
        let mut long = 1.0;
        let mut t = 0.5f64;
        while t.abs() >= 1e-30 {
            long *= 1.0 - t;
            t *= 0.5;
        }
        assert!(rel(q_pochhammer_inf(0.5, 0.5).unwrap(), long) < 1e-15);
    }

    #[test]
    fn c_alpha_examples() {
        assert!(rel(c_q_alpha(0.5, 0.0).unwrap(), 2.0) < 1e-15);
        assert!(rel(c_q_alpha(0.5, 1.0).unwrap(), 8.0 / 3.0) < 1e-15);
        assert!(matches!(c_q_alpha(0.5, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn c_v_reduces_to_c_alpha() {
        for &alpha in &[-0.5, 0.0, 0.5, 1.5] {
            let v = VParams::new(alpha, 0).unwrap();
            assert_eq!(c_q_v(0.7, &v).unwrap(), c_q_alpha(0.7, alpha).unwrap());
        }
    }

    #[test]
    fn printed_constant_two_routes_agree() {
        for &(q, alpha, n) in &[(0.5, 0.0, 1), (0.5, 1.5, 2), (0.8, 0.5, 1), (0.9, 2.0, 3)] {
            let (literal, shifted) = c_q_v_printed_routes(q, alpha, n).unwrap();
            assert!(rel(literal, shifted) < 1e-14, "{q} {alpha} {n}");
        }
    }

    #[test]
    fn c_v_examples() {
        // alpha = 0, n = 1 sits on the |v| = -1 boundary, so only the raw formula accepts it
        assert!(rel(c_q_v_printed_raw(0.5, 0.0, 1).unwrap(), 4.0 / 3.0) < 1e-14);
        assert!(rel(c_q_v_raw(0.5, 0.0, 1).unwrap(), 2.0 / 3.0) < 1e-14);
        let v = VParams::new(1.5, 1).unwrap();
        let ratio = c_q_v(0.5, &v).unwrap() / c_q_v_printed(0.5, &v).unwrap();
        assert!(rel(ratio, 0.5) < 1e-14);
    }

    #[test]
    fn vparams_validation() {
        assert!(VParams::new(0.0, 1).is_err());
        assert!(VParams::new(-1.0, 0).is_err());
        let v = VParams::new(1.5, 2).unwrap();
        assert_eq!(v.beta(), -2.0);
        assert_eq!(v.abs_v(), -0.5);
        assert_eq!(v.kernel_order(), 3.5);
    }

    #[test]
    fn j_alpha_at_zero_is_one() {
        for &alpha in &[-0.5, 0.0, 2.5] {
            let e = j_alpha(0.0, 0.6, alpha).unwrap();
            assert_eq!(e.value, 1.0);
            assert_eq!(e.terms, 1);
        }
    }

    /// Terms from the closed form, summed from the smallest upwards.
    fn reverse_order_oracle(x: f64, q: f64, alpha: f64) -> f64 {
        let mut terms = Vec::new();
        for k in 0..60u32 {
            let num = q.powi((k * (k + 1)) as i32) * x.powi(2 * k as i32);
            let den = q_pochhammer(q.powf(2.0 * alpha + 2.0), q * q, k) * q_pochhammer(q * q, q * q, k);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * num / den);
        }
        terms.iter().rev().sum()
    }

    #[test]
    fn j_alpha_matches_reverse_order_sum() {
        let got = j_alpha(1.0, 0.5, 0.0).unwrap().value;
        assert!((got - reverse_order_oracle(1.0, 0.5, 0.0)).abs() < 1e-15);
        // 300-digit reference
        assert!(rel(got, 0.586_652_869_611_279_68) < 1e-15);
        for &(x, q, a) in &[(0.3, 0.5, 1.5), (2.0, 0.8, 0.5), (1.7, 0.9, -0.5)] {
            let got = j_alpha(x, q, a).unwrap();
            let err = (got.value - reverse_order_oracle(x, q, a)).abs();
            assert!(err < 1e-15 * got.max_term.max(1.0) * 4.0, "{x} {q} {a}: {err:e}");
        }
    }

    #[test]
    fn j_alpha_flags_cancellation() {
        let deep = j_alpha(0.5f64.powi(-9), 0.5, 0.0).unwrap();
        assert!(deep.cancellation_warning);
        let mild = j_alpha(2.0, 0.5, 0.0).unwrap();
        assert!(!mild.cancellation_warning);
    }

    #[test]
    fn j_alpha_domain_errors() {
        assert!(j_alpha(-1.0, 0.5, 0.0).is_err());
        assert!(j_alpha(1.0, 0.5, -1.0).is_err());
        assert!(j_alpha(1.0, 1.5, 0.0).is_err());
    }

    #[test]
    fn lattice_values_match_high_precision_reference() {
        // (q, alpha, s, j_alpha(q^s; q^2)) from 300-digit explicit-term sums
        let cases: &[(f64, f64, i32, f64)] = &[
            (0.5, 0.0, -3, -3.508_912_495_325_959_5e-4),
            (0.5, 0.0, -6, 3.301_732_392_668_857e-13),
            (0.5, 0.0, -10, 1.118_851_836_586_201_7e-33),
            (0.5, 0.0, -14, 8.826_190_315_795_857e-64),
            (0.5, 1.5, -3, -4.944_781_232_030_327e-7),
            (0.5, 1.5, -6, 9.046_631_309_217_635e-19),
            (0.5, 1.5, -10, 7.483_880_509_808_001e-43),
            (0.5, 3.5, -4, 3.557_311_834_477_928e-15),
            (0.5, 3.5, -8, 2.946_389_707_173_767_4e-39),
            (0.5, 3.5, -12, 5.674_569_139_065_151e-73),
            (0.8, 0.5, -5, -1.607_171_582_808_458_9e-3),
            (0.8, 0.5, -12, 2.936_465_461_691_484e-16),
            (0.8, 0.5, -20, 1.302_248_522_948_126_5e-42),
            (0.8, 0.5, -26, 1.602_441_458_345_510_4e-70),
            (0.8, 3.5, -8, 5.471_202_648_693_362e-13),
            (0.8, 3.5, -16, 9.013_193_024_705_068e-38),
            (0.8, 3.5, -26, 3.166_677_147_341_869_4e-86),
            (0.9, 0.0, -10, 1.333_833_524_516_907_4e-3),
            (0.9, 0.0, -20, 2.375_479_996_519_337e-17),
            (0.9, 0.0, -34, 1.566_275_697_313_086e-52),
        ];
        for &(q, alpha, s, oracle) in cases {
            let t = j_alpha_lattice(q, alpha, s, 2, DEFAULT_SERIES_TOL).unwrap();
            assert!(!t.flags[0]);
            let got = t.values[0];
            assert!(
                rel(got, oracle) < 1e-11,
                "q={q} alpha={alpha} s={s}: {got:e} vs {oracle:e}"
            );
        }
    }

    #[test]
    fn lattice_agrees_with_series_inside_envelope() {
        for &(q, alpha) in &[(0.5, 0.0), (0.5, 1.5), (0.8, 0.5), (0.9, 2.0)] {
            let env = series_envelope(q);
            let t = j_alpha_lattice(q, alpha, -env, 3, DEFAULT_SERIES_TOL).unwrap();
            for s in -env..=3 {
                let series = j_alpha(q.powi(s), q, alpha).unwrap();
                let got = t.values[(s + env) as usize];
                let scale = series.max_term.max(got.abs());
                assert!((got - series.value).abs() <= 1e-12 * scale, "q={q} alpha={alpha} s={s}");
            }
        }
    }

    #[test]
    fn envelope_depths() {
        assert_eq!(series_envelope(0.5), 6);
        assert_eq!(series_envelope(0.9), 16);
    }

    #[test]
    fn kernel_examples() {
        let v0 = VParams::new(0.7, 0).unwrap();
        for k in -3..6 {
            let x = 0.5f64.powi(k);
            assert_eq!(
                kernel_jtilde(x, 0.5, &v0).unwrap().value,
                j_alpha(x, 0.5, 0.7).unwrap().value
            );
        }
        let v1 = VParams::new(0.5, 1).unwrap();
        assert_eq!(kernel_jtilde(0.0, 0.5, &v1).unwrap().value, 0.0);
        assert_eq!(kernel_jtilde(0.0, 0.5, &v0).unwrap().value, 1.0);
        let got = kernel_jtilde(0.5, 0.5, &v1).unwrap().value;
        let expect = 0.25 * j_alpha(0.25, 0.5, 1.5).unwrap().value;
        assert!(rel(got, expect) < 1e-15);
        let literal = kernel_jtilde_literal(0.5, 0.5, &v1).unwrap();
        assert!(rel(got, literal) < 1e-14);
    }

    #[test]
    fn kernel_table_matches_series_route() {
        let v = VParams::new(0.5, 1).unwrap();
        let t = KernelTable::new(0.5, &v, -4, 20, DEFAULT_SERIES_TOL).unwrap();
        for s in -4..=20 {
            let e = kernel_jtilde(0.5f64.powi(s), 0.5, &v).unwrap();
            assert!((t.get(s) - e.value).abs() <= 1e-13 * e.max_term, "s={s}");
        }
    }

    #[test]
    fn operator_examples() {
        let g = QGrid::new(0.5, -4, 8).unwrap();
        let c = LatticeFn::from_fn(&g, |_, _| 3.0).unwrap();
        assert!(q_bessel_operator(&c, 2, 0.8).unwrap().abs() < 1e-13);
        let id = LatticeFn::from_fn(&g, |_, x| x).unwrap();
        assert!((q_bessel_operator(&id, 0, 0.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(q_bessel_operator(&id, 8, 0.0).is_err());
        assert!(q_bessel_operator(&id, -4, 0.0).is_err());
    }

    #[test]
    fn eigenvalue_relation_on_lattice() {
        // Delta_{q,alpha} [t -> j_alpha(lambda t)] = -lambda^2 j_alpha(lambda t)
        let q = 0.5;
        let g = QGrid::new(q, -3, 20).unwrap();
        for &alpha in &[0.0, 0.5, 1.5] {
            for ell in 0..3 {
                let lambda = q.powi(ell);
                let u = LatticeFn::from_fn(&g, |_, t| j_alpha(lambda * t, q, alpha).unwrap().value).unwrap();
                for k in -2..=10 {
                    let lhs = q_bessel_operator(&u, k, alpha).unwrap();
                    let rhs = -lambda * lambda * u.at(k).unwrap();
                    let x = g.point(k).unwrap();
                    let scale =
                        (u.at(k - 1).unwrap().abs() + 2.0 * u.at(k).unwrap().abs() + u.at(k + 1).unwrap().abs())
                            / (x * x);
                    assert!((lhs - rhs).abs() <= 1e-12 * scale, "alpha={alpha} l={ell} k={k}");
                }
            }
        }
    }

    #[test]
    fn delta_examples() {
        let v = VParams::new(0.5, 0).unwrap();
        assert_eq!(delta_qv(2, 3, 0.5, &v), 0.0);
        assert!(rel(delta_qv(0, 0, 0.5, &v), 2.0) < 1e-15);
        assert!(rel(delta_qv(1, 1, 0.5, &v), 16.0) < 1e-15);
    }

    #[test]
    fn delta_reproduces_bit_exactly() {
        for q in [0.5, 0.8, 0.9] {
            let g = QGrid::new(q, -5, 30).unwrap();
            let v = VParams::new(1.5, 2).unwrap();
            let f = LatticeFn::from_fn(&g, |k, x| (k as f64 * 0.37).cos() / (1.0 + x)).unwrap();
            for k in g.indices() {
                assert_eq!(
                    delta_reproduce(&f, k, &v).unwrap().to_bits(),
                    f.at(k).unwrap().to_bits()
                );
            }
        }
    }

    #[test]
    fn orthogonality_with_corrected_constant() {
        let q = 0.5;
        let lattice = QGrid::new(q, -10, 60).unwrap();
        for &(alpha, n) in &[(0.0, 0), (0.5, 1), (1.5, 2)] {
            let v = VParams::new(alpha, n).unwrap();
            for i in -3..=5 {
                for j in -3..=5 {
                    let got = orthogonality_integral(i, j, q, &v, &lattice).unwrap();
                    let diag = delta_qv(i, i, q, &v);
                    if i == j {
                        assert!(rel(got, diag) < 1e-10, "alpha={alpha} n={n} i={i}");
                    } else {
                        assert!(got.abs() < 1e-10 * diag, "alpha={alpha} n={n} i={i} j={j}");
                    }
                }
            }
        }
    }

    #[test]
    fn printed_constant_misses_by_q_power() {
        let q = 0.5;
        let lattice = QGrid::new(q, -10, 60).unwrap();
        let v = VParams::new(0.5, 1).unwrap();
        let c = c_q_v_printed(q, &v).unwrap();
        let got = orthogonality_integral_with(0, 0, q, &v, &lattice, c).unwrap();
        assert!(rel(got, delta_qv(0, 0, q, &v) * q.powi(-2)) < 1e-10);
    }

    #[test]
    fn kernel_bound_holds_for_bessel_case() {
        let q = 0.5;
        let bound = kernel_sup_bound(q).unwrap();
        assert!(rel(bound, 5.684_557_599_795_994) < 1e-14);
        let v = VParams::new(0.5, 0).unwrap();
        let t = KernelTable::new(q, &v, -20, 60, DEFAULT_SERIES_TOL).unwrap();
        assert!(t.max_abs(-20, 60) <= bound);
    }
}
