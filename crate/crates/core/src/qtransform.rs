//! Generalized q-Bessel Fourier transform and translation on a truncated lattice.
//!
//! On the lattice the kernel depends on `x t = q^{k+m}` only, so the transform is
//! the correlation `Ff[k] = c sum_m g[m] J[k+m]` with `g[m] = f(q^m) w[m]`.
//! [`fourier_qv`] evaluates the sum directly; [`fourier_fast`] splits it into a
//! short near band (`k + m < 0`) and a far field where `J[s]` is the finite
//! exponential sum `sum_j beta_j rho_j^s`, each term of which collapses to a
//! suffix recurrence over `m`.

use crate::error::{Error, Result};
use crate::qlattice::{LatticeFn, QGrid};
use crate::qspecial::{c_q_alpha, c_q_v, j_alpha_lattice, KernelTable, VParams, DEFAULT_SERIES_TOL};
use crate::sum::CompensatedSum;

/// Involution error below which a lattice index counts as part of the safe core.
pub const SAFE_CORE_TOL: f64 = 1e-9;

/// Truncation threshold for the far-field exponential sum.
const FAR_FIELD_CUTOFF: f64 = 0.5e-17;
const FAR_FIELD_CAP: usize = 400;

/// `J[s] = sum_j beta_j rho_j^s` for `s >= 0`.
#[derive(Debug, Clone, PartialEq)]
struct FarField {
    betas: Vec<f64>,
    rhos: Vec<f64>,
}

impl FarField {
    fn new(q: f64, v: &VParams) -> Result<Self> {
        let q2 = q * q;
        let n = v.n_index() as i32;
        let a_base = q.powf(2.0 * v.kernel_order() + 2.0);
        let lift = q.powi(2 * n);
        let mut betas = Vec::new();
        let mut rhos = Vec::new();
        let mut b = 1.0f64;
        let mut lift_j = 1.0f64;
        let mut q_step = q2;
        let mut a_k = a_base;
        let mut past_peak = false;
        for j in 0..FAR_FIELD_CAP {
            let beta = b * lift_j;
            if past_peak && beta.abs() < FAR_FIELD_CUTOFF {
                return Ok(Self { betas, rhos });
            }
            betas.push(beta);
            rhos.push(q.powi(2 * (n + j as i32)));
            let next = b * (-q_step) / ((1.0 - a_k) * (1.0 - q_step));
            past_peak = past_peak || next.abs() * lift <= b.abs();
            b = next;
            lift_j *= lift;
            q_step *= q2;
            a_k *= q2;
        }
        Err(Error::Convergence("far-field kernel expansion did not settle".into()))
    }

    fn len(&self) -> usize {
        self.betas.len()
    }
}

/// Everything needed to transform functions on one grid for one `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformPlan {
    grid: QGrid,
    v: VParams,
    kernel: KernelTable,
    c_v: f64,
    weights: Vec<f64>,
    far: FarField,
    leakage: Vec<f64>,
}

/// A transform output with the per-index mask of outputs whose accumulation
/// touched a flagged kernel entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub output: LatticeFn,
    pub warnings: Vec<bool>,
}

impl Transformed {
    pub fn warning_count(&self) -> usize {
        self.warnings.iter().filter(|&&w| w).count()
    }
}

impl TransformPlan {
    pub fn new(grid: &QGrid, v: VParams) -> Result<Self> {
        Self::with_tol(grid, v, DEFAULT_SERIES_TOL)
    }

    pub fn with_tol(grid: &QGrid, v: VParams, series_tol: f64) -> Result<Self> {
        if !(series_tol > 0.0) {
            return Err(Error::Domain(format!(
                "series tolerance must be positive, got {series_tol}"
            )));
        }
        let q = grid.q();
        let kernel = KernelTable::new(q, &v, 2 * grid.n_min(), 2 * grid.n_max(), series_tol)?;
        let mut plan = Self {
            grid: grid.clone(),
            c_v: c_q_v(q, &v)?,
            weights: grid.jackson_weights(2.0 * v.abs_v() + 1.0),
            far: FarField::new(q, &v)?,
            kernel,
            v,
            leakage: Vec::new(),
        };
        plan.leakage = plan.involution_errors();
        Ok(plan)
    }

    pub fn grid(&self) -> &QGrid {
        &self.grid
    }

    pub fn v(&self) -> &VParams {
        &self.v
    }

    pub fn q(&self) -> f64 {
        self.grid.q()
    }

    pub fn c_v(&self) -> f64 {
        self.c_v
    }

    pub fn kernel(&self) -> &KernelTable {
        &self.kernel
    }

    /// `J[s]` for `s` in `[2 n_min, 2 n_max]`.
    #[inline]
    pub fn j(&self, s: i32) -> f64 {
        self.kernel.get(s)
    }

    /// Transform-measure weights `(1-q) x^{2|v|+2}`, zero off the summation domain.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, k: i32) -> f64 {
        self.weights[(k - self.grid.n_min()) as usize]
    }

    /// Number of exponential terms in the far-field kernel expansion.
    pub fn far_field_terms(&self) -> usize {
        self.far.len()
    }

    fn check(&self, f: &LatticeFn) -> Result<()> {
        if self.grid.same_lattice(f.grid()) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "function lives on q={} [{}, {}], plan on q={} [{}, {}]",
                f.grid().q(),
                f.grid().n_min(),
                f.grid().n_max(),
                self.q(),
                self.grid.n_min(),
                self.grid.n_max()
            )))
        }
    }

    /// `||FF e_m - e_m|| / ||e_m||` in the weighted norm, for the point mass `e_m`
    /// at each index; infinite where the weight vanishes.
    fn involution_errors(&self) -> Vec<f64> {
        let n = self.grid.len();
        let lo = self.grid.n_min();
        // gram[k][m] = sum_t J[k+t] J[t+m] w_t
        let mut gram = vec![0.0; n * n];
        let mut column = vec![0.0; n];
        for t in self.grid.indices() {
            let w = self.weight(t);
            if w == 0.0 {
                continue;
            }
            for (i, c) in column.iter_mut().enumerate() {
                *c = self.j(lo + i as i32 + t);
            }
            for (i, row) in gram.chunks_exact_mut(n).enumerate() {
                let a = w * column[i];
                for (g, b) in row.iter_mut().zip(&column) {
                    *g += a * b;
                }
            }
        }
        let c2 = self.c_v * self.c_v;
        (0..n)
            .map(|m| {
                let wm = self.weights[m];
                if wm == 0.0 {
                    return f64::INFINITY;
                }
                let mut acc = CompensatedSum::new();
                for k in 0..n {
                    let target = if k == m { 1.0 } else { 0.0 };
                    let e = c2 * wm * gram[k * n + m] - target;
                    acc.add(self.weights[k] * e * e);
                }
                (acc.value() / wm).sqrt()
            })
            .collect()
    }

    /// Per-index involution error of the truncated transform (see [`Self::safe_core`]).
    pub fn leakage(&self) -> &[f64] {
        &self.leakage
    }

    /// Longest contiguous index run whose point masses come back through `F F`
    /// within [`SAFE_CORE_TOL`]. Ties go to the run with the smaller indices.
    pub fn safe_core(&self) -> Option<(i32, i32)> {
        let leak = &self.leakage;
        let mut best: Option<(i32, i32)> = None;
        let mut start: Option<i32> = None;
        let n_min = self.grid.n_min();
        for (i, l) in leak.iter().chain(std::iter::once(&f64::INFINITY)).enumerate() {
            let k = n_min + i as i32;
            if *l < SAFE_CORE_TOL {
                start.get_or_insert(k);
            } else if let Some(s) = start.take() {
                let run = (s, k - 1);
                if best.is_none_or(|(a, b)| run.1 - run.0 > b - a) {
                    best = Some(run);
                }
            }
        }
        best
    }

    /// Output mask: does `sum_m g[m] J[k+m]` touch a flagged kernel entry?
    fn warning_mask(&self, g: &[f64]) -> Vec<bool> {
        if !self.kernel.any_flagged() {
            return vec![false; g.len()];
        }
        self.grid
            .indices()
            .map(|k| {
                self.grid
                    .indices()
                    .zip(g)
                    .any(|(m, &gm)| gm != 0.0 && self.kernel.flagged(k + m))
            })
            .collect()
    }

    fn weighted(&self, f: &LatticeFn) -> Vec<f64> {
        f.values().iter().zip(&self.weights).map(|(a, w)| a * w).collect()
    }

    fn wrap(&self, values: Vec<f64>, warnings: Vec<bool>) -> Result<Transformed> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Overflow(format!(
                "transform output at k = {} is not finite",
                self.grid.n_min() + i as i32
            )));
        }
        Ok(Transformed {
            output: LatticeFn::new(self.grid.clone(), values)?,
            warnings,
        })
    }
}

/// `(F f)(q^k) = c_v sum_m f(q^m) w_m J[k+m]`, ascending `m`, compensated.
pub fn fourier_qv(f: &LatticeFn, plan: &TransformPlan) -> Result<Transformed> {
    plan.check(f)?;
    let g = plan.weighted(f);
    let values = correlate_direct(&g, plan);
    let warnings = plan.warning_mask(&g);
    plan.wrap(values, warnings)
}

fn correlate_direct(g: &[f64], plan: &TransformPlan) -> Vec<f64> {
    let grid = plan.grid();
    grid.indices()
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (m, &gm) in grid.indices().zip(g) {
                acc.add(gm * plan.j(k + m));
            }
            plan.c_v * acc.value()
        })
        .collect()
}

/// `c_v sum_m |f(q^m) w_m J[k+m]|`: the scale against which rounding in the
/// correlation sum is measured.
pub fn fourier_condition(f: &LatticeFn, plan: &TransformPlan) -> Result<Vec<f64>> {
    plan.check(f)?;
    let g = plan.weighted(f);
    let grid = plan.grid();
    Ok(grid
        .indices()
        .map(|k| {
            let mut acc = CompensatedSum::new();
            for (m, &gm) in grid.indices().zip(&g) {
                acc.add((gm * plan.j(k + m)).abs());
            }
            plan.c_v * acc.value()
        })
        .collect())
}

/// Same contract as [`fourier_qv`] in `O(N (R + B))` operations, where `R` is
/// the number of far-field terms and `B` the width of the near band.
pub fn fourier_fast(f: &LatticeFn, plan: &TransformPlan) -> Result<Transformed> {
    plan.check(f)?;
    let g = plan.weighted(f);
    let values = correlate_fast(&g, plan);
    let warnings = plan.warning_mask(&g);
    plan.wrap(values, warnings)
}

fn correlate_fast(g: &[f64], plan: &TransformPlan) -> Vec<f64> {
    let grid = plan.grid();
    let (n_min, n_max) = (grid.n_min(), grid.n_max());
    let len = g.len();
    let far = &plan.far;
    // suffix[j][i] = sum_{m >= n_min+i} g[m] rho_j^{m - (n_min+i)}
    let suffix: Vec<Vec<f64>> = far
        .rhos
        .iter()
        .map(|&rho| {
            let mut s = vec![0.0; len + 1];
            for i in (0..len).rev() {
                s[i] = g[i] + rho * s[i + 1];
            }
            s
        })
        .collect();
    // the far field starts at e = k + split, which lies in [0, n_min + n_max]
    let top = (n_min + n_max).max(0) as usize;
    let powers: Vec<Vec<f64>> = far
        .rhos
        .iter()
        .map(|&rho| {
            let mut p = Vec::with_capacity(top + 1);
            let mut x = 1.0;
            for _ in 0..=top {
                p.push(x);
                x *= rho;
            }
            p
        })
        .collect();
    grid.indices()
        .map(|k| {
            let split = (-k).clamp(n_min, n_max + 1);
            let mut acc = CompensatedSum::new();
            for m in n_min..split {
                acc.add(g[(m - n_min) as usize] * plan.j(k + m));
            }
            if split <= n_max {
                let i = (split - n_min) as usize;
                let e = k + split;
                for (j, &beta) in far.betas.iter().enumerate() {
                    acc.add(beta * powers[j][e as usize] * suffix[j][i]);
                }
            }
            plan.c_v * acc.value()
        })
        .collect()
}

/// `T_x f(y) = c_v sum_t (F f)(t) J[y+t] J[x+t] w_t` for every lattice `y`,
/// with `x = q^{k_x}`.
pub fn translate_qv(f: &LatticeFn, k_x: i32, plan: &TransformPlan) -> Result<Transformed> {
    let spectrum = fourier_qv(f, plan)?;
    let mut out = translate_spectrum(&spectrum.output, k_x, plan)?;
    for (o, w) in out.warnings.iter_mut().zip(&spectrum.warnings) {
        *o |= *w;
    }
    Ok(out)
}

/// Translation from a precomputed spectrum `F f`.
pub fn translate_spectrum(spectrum: &LatticeFn, k_x: i32, plan: &TransformPlan) -> Result<Transformed> {
    plan.check(spectrum)?;
    let grid = plan.grid();
    if !grid.contains(k_x) {
        return Err(Error::Index {
            index: k_x as i64,
            n_min: grid.n_min(),
            n_max: grid.n_max(),
        });
    }
    let g: Vec<f64> = grid
        .indices()
        .zip(plan.weighted(spectrum))
        .map(|(t, gt)| gt * plan.j(k_x + t))
        .collect();
    let values = correlate_direct(&g, plan);
    let mut warnings = plan.warning_mask(&g);
    if plan.kernel.any_flagged() {
        for (w, t) in warnings.iter_mut().zip(grid.indices()) {
            *w |= plan.kernel.flagged(k_x + t);
        }
    }
    plan.wrap(values, warnings)
}

/// `int_0^inf f g x^{2|v|+1} d_q x`.
pub fn inner_product_qv(f: &LatticeFn, g: &LatticeFn, v: &VParams) -> Result<f64> {
    f.check_same_grid(g)?;
    let weights = f.grid().jackson_weights(2.0 * v.abs_v() + 1.0);
    let mut acc = CompensatedSum::new();
    for ((a, b), w) in f.values().iter().zip(g.values()).zip(&weights) {
        if *w != 0.0 {
            acc.add(a * b * w);
        }
    }
    let value = acc.value();
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Overflow("inner product".into()))
    }
}

/// `||f||_{q,2,v}` through [`inner_product_qv`].
pub fn norm2(f: &LatticeFn, v: &VParams) -> Result<f64> {
    Ok(inner_product_qv(f, f, v)?.sqrt())
}

/// The q-Bessel transform of order `alpha` written from its own ingredients:
/// `c_{q,alpha} sum_m f(q^m) j_alpha(q^{k+m}) (1-q) q^{m(2alpha+2)}`.
pub fn fourier_alpha(f: &LatticeFn, alpha: f64) -> Result<LatticeFn> {
    let table = AlphaTable::new(f.grid(), alpha)?;
    let g: Vec<f64> = f.values().iter().zip(&table.weights).map(|(a, w)| a * w).collect();
    table.correlate(&g, f.grid())
}

/// The order-`alpha` translation `T_x f(y) = c_{q,alpha} int F f(t) j(yt) j(xt) t^{2alpha+1} d_q t`.
pub fn translate_alpha(f: &LatticeFn, k_x: i32, alpha: f64) -> Result<LatticeFn> {
    let grid = f.grid();
    if !grid.contains(k_x) {
        return Err(Error::Index {
            index: k_x as i64,
            n_min: grid.n_min(),
            n_max: grid.n_max(),
        });
    }
    let table = AlphaTable::new(grid, alpha)?;
    let spectrum = fourier_alpha(f, alpha)?;
    let g: Vec<f64> = grid
        .indices()
        .zip(spectrum.values().iter().zip(&table.weights))
        .map(|(t, (s, w))| s * w * table.get(k_x + t))
        .collect();
    table.correlate(&g, grid)
}

struct AlphaTable {
    s_lo: i32,
    values: Vec<f64>,
    c: f64,
    weights: Vec<f64>,
}

impl AlphaTable {
    fn new(grid: &QGrid, alpha: f64) -> Result<Self> {
        let q = grid.q();
        let table = j_alpha_lattice(q, alpha, 2 * grid.n_min(), 2 * grid.n_max(), DEFAULT_SERIES_TOL)?;
        Ok(Self {
            s_lo: table.s_lo,
            values: table.values,
            c: c_q_alpha(q, alpha)?,
            weights: grid.jackson_weights(2.0 * alpha + 1.0),
        })
    }

    fn get(&self, s: i32) -> f64 {
        self.values[(s - self.s_lo) as usize]
    }

    fn correlate(&self, g: &[f64], grid: &QGrid) -> Result<LatticeFn> {
        let values = grid
            .indices()
            .map(|k| {
                let mut acc = CompensatedSum::new();
                for (m, &gm) in grid.indices().zip(g) {
                    acc.add(gm * self.get(k + m));
                }
                self.c * acc.value()
            })
            .collect();
        LatticeFn::new(grid.clone(), values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qspecial::kernel_jtilde;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn plan(q: f64, lo: i32, hi: i32, alpha: f64, n: u32) -> TransformPlan {
        TransformPlan::new(&QGrid::new(q, lo, hi).unwrap(), VParams::new(alpha, n).unwrap()).unwrap()
    }

    fn random_on(grid: &QGrid, lo: i32, hi: i32, rng: &mut ChaCha8Rng) -> LatticeFn {
        LatticeFn::from_fn(grid, |k, _| {
            if (lo..=hi).contains(&k) {
                rng.gen_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .unwrap()
    }

    #[test]
    fn zero_maps_to_zero() {
        let p = plan(0.5, -5, 30, 0.5, 1);
        let z = LatticeFn::zeros(p.grid());
        assert!(fourier_qv(&z, &p).unwrap().output.values().iter().all(|&x| x == 0.0));
        assert!(fourier_fast(&z, &p).unwrap().output.values().iter().all(|&x| x == 0.0));
        assert!(translate_qv(&z, 2, &p)
            .unwrap()
            .output
            .values()
            .iter()
            .all(|&x| x == 0.0));
    }

    #[test]
    fn point_mass_gives_scaled_kernel() {
        let p = plan(0.5, -5, 30, 0.5, 1);
        let delta = LatticeFn::point_mass(p.grid(), 0, 1.0).unwrap();
        let out = fourier_qv(&delta, &p).unwrap().output;
        for (k, x) in p.grid().indices().zip(p.grid().points()) {
            let series = kernel_jtilde(*x, 0.5, p.v()).unwrap();
            let expect = p.c_v() * 0.5 * series.value;
            let got = out.at(k).unwrap();
            let tol = 1e-13 * p.c_v() * 0.5 * series.max_term;
            assert!((got - expect).abs() <= tol, "k={k}");
        }
    }

    #[test]
    fn linearity() {
        let p = plan(0.8, -12, 60, 1.5, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = random_on(p.grid(), -12, 60, &mut rng);
        let g = random_on(p.grid(), -12, 60, &mut rng);
        let lhs = fourier_qv(&f.lin_comb(2.0, &g, 3.0).unwrap(), &p).unwrap().output;
        let ff = fourier_qv(&f, &p).unwrap().output;
        let fg = fourier_qv(&g, &p).unwrap().output;
        let rhs = ff.lin_comb(2.0, &fg, 3.0).unwrap();
        let scale = fourier_condition(&f, &p).unwrap();
        let scale_g = fourier_condition(&g, &p).unwrap();
        for (i, k) in p.grid().indices().enumerate() {
            let s = 2.0 * scale[i] + 3.0 * scale_g[i];
            assert!((lhs.at(k).unwrap() - rhs.at(k).unwrap()).abs() <= 1e-13 * s, "k={k}");
        }
    }

    #[test]
    fn fast_matches_direct() {
        for &(q, lo, hi, alpha, n) in &[
            (0.5, -5, 60, 0.0, 0),
            (0.5, -5, 60, 1.5, 2),
            (0.8, -12, 150, 0.5, 1),
            (0.9, -16, 200, 0.5, 0),
        ] {
            let p = plan(q, lo, hi, alpha, n);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let f = random_on(p.grid(), lo, hi, &mut rng);
            let direct = fourier_qv(&f, &p).unwrap().output;
            let fast = fourier_fast(&f, &p).unwrap().output;
            let scale = fourier_condition(&f, &p).unwrap();
            for (i, k) in p.grid().indices().enumerate() {
                let dev = (direct.at(k).unwrap() - fast.at(k).unwrap()).abs() / scale[i];
                assert!(dev < 1e-10, "q={q} alpha={alpha} n={n} k={k}: {dev:e}");
            }
        }
    }

    #[test]
    fn safe_core_examples() {
        assert_eq!(plan(0.5, -5, 60, 0.5, 1).safe_core(), Some((-5, 0)));
        assert_eq!(plan(0.5, -5, 60, 1.5, 2).safe_core(), Some((-5, -1)));
        assert_eq!(plan(0.8, -12, 150, 0.0, 0).safe_core(), Some((-12, 2)));
    }

    #[test]
    fn isometry_and_involution_on_core() {
        for &(alpha, n) in &[(0.0, 0), (0.5, 1), (1.5, 2)] {
            let p = plan(0.5, -5, 60, alpha, n);
            let (lo, hi) = p.safe_core().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let f = random_on(p.grid(), lo, hi, &mut rng);
            let ff = fourier_qv(&f, &p).unwrap().output;
            let ratio = norm2(&ff, p.v()).unwrap() / norm2(&f, p.v()).unwrap();
            assert!((ratio - 1.0).abs() < 1e-10, "alpha={alpha} n={n}: {ratio}");
            let back = fourier_qv(&ff, &p).unwrap().output;
            let diff = back.lin_comb(1.0, &f, -1.0).unwrap();
            let rel = norm2(&diff, p.v()).unwrap() / norm2(&f, p.v()).unwrap();
            assert!(rel < 1e-6, "alpha={alpha} n={n}: {rel:e}");
        }
    }

    #[test]
    fn translation_symmetry() {
        let p = plan(0.5, -5, 60, 0.5, 1);
        let (lo, hi) = p.safe_core().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = random_on(p.grid(), lo, hi, &mut rng);
        let rows: Vec<LatticeFn> = (lo..=hi).map(|x| translate_qv(&f, x, &p).unwrap().output).collect();
        let scale = rows.iter().map(|r| r.max_abs()).fold(0.0, f64::max);
        for (i, x) in (lo..=hi).enumerate() {
            for (j, y) in (lo..=hi).enumerate() {
                let a = rows[i].at(y).unwrap();
                let b = rows[j].at(x).unwrap();
                assert!((a - b).abs() <= 1e-10 * scale, "x={x} y={y}");
            }
        }
    }

    #[test]
    fn translation_of_kernel_is_kernel_product() {
        let q = 0.5;
        let alpha = 0.5;
        let p = plan(q, -5, 60, alpha, 0);
        let (lo, hi) = p.safe_core().unwrap();
        // t -> j(lambda t) translated by x and read at y gives j(lambda x) j(lambda y)
        for ell in lo..=hi {
            let g = LatticeFn::from_fn(p.grid(), |t, _| p.j(t + ell)).unwrap();
            for x in lo..=hi {
                let tg = translate_qv(&g, x, &p).unwrap().output;
                for y in lo..=hi {
                    let expect = p.j(ell + x) * p.j(ell + y);
                    assert!((tg.at(y).unwrap() - expect).abs() < 1e-8, "l={ell} x={x} y={y}");
                }
            }
        }
    }

    #[test]
    fn inner_product_is_symmetric_and_matches_norm() {
        let g = QGrid::new(0.5, -5, 40).unwrap();
        let v = VParams::new(0.5, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_on(&g, -5, 40, &mut rng);
        let b = random_on(&g, -5, 40, &mut rng);
        assert_eq!(
            inner_product_qv(&a, &b, &v).unwrap().to_bits(),
            inner_product_qv(&b, &a, &v).unwrap().to_bits()
        );
        let norm = crate::qlattice::norm_qpv(&a, 2.0, &v).unwrap();
        assert!((inner_product_qv(&a, &a, &v).unwrap() - norm * norm).abs() < 1e-15 * norm * norm);
        let m1 = LatticeFn::point_mass(&g, 1, 1.0).unwrap();
        let m2 = LatticeFn::point_mass(&g, 2, 1.0).unwrap();
        assert_eq!(inner_product_qv(&m1, &m2, &v).unwrap(), 0.0);
    }

    #[test]
    fn order_alpha_path_matches_general_path_at_n_zero() {
        let p = plan(0.8, -12, 80, 1.5, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = random_on(p.grid(), -12, 10, &mut rng);
        let general = fourier_qv(&f, &p).unwrap().output;
        let special = fourier_alpha(&f, 1.5).unwrap();
        assert_eq!(general, special);
        let tg = translate_qv(&f, 3, &p).unwrap().output;
        let ts = translate_alpha(&f, 3, 1.5).unwrap();
        assert_eq!(tg, ts);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let p = plan(0.5, -5, 30, 0.5, 1);
        let other = LatticeFn::zeros(&QGrid::new(0.5, -5, 31).unwrap());
        assert!(matches!(fourier_qv(&other, &p), Err(Error::GridMismatch(_))));
        assert!(matches!(
            translate_qv(&LatticeFn::zeros(p.grid()), 31, &p),
            Err(Error::Index { .. })
        ));
    }
}
