//! The truncated q-lattice, functions sampled on it, Jackson integrals, the
//! q-derivative and the weighted norms `||f||_{q,p,v}`.
//!
//! A [`QGrid`] is the window `{q^k : n_min <= k <= n_max}`. Index `k` always
//! means the lattice exponent, never an array offset; points are stored in
//! ascending `k`, i.e. descending `x`.

use std::ops::RangeInclusive;

use crate::error::{Error, Result};
use crate::qspecial::VParams;
use crate::sum::CompensatedSum;

/// Which lattice indices a Jackson integral over `(0, inf)` sums.
///
/// `Lattice` sums every index of the window (the full `Z` lattice, truncated).
/// `NonNegative` keeps only `k >= 0`, the literal sum over `n in N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SumDomain {
    #[default]
    Lattice,
    NonNegative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QGrid {
    q: f64,
    n_min: i32,
    n_max: i32,
    domain: SumDomain,
    points: Vec<f64>,
}

impl QGrid {
    pub fn new(q: f64, n_min: i32, n_max: i32) -> Result<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::Domain(format!("q must lie in (0, 1), got {q}")));
        }
        if n_min >= n_max {
            return Err(Error::Domain(format!(
                "empty window: n_min = {n_min} must be below n_max = {n_max}"
            )));
        }
        let points: Vec<f64> = (n_min..=n_max).map(|k| q.powi(k)).collect();
        for (k, x) in (n_min..=n_max).zip(&points) {
            if !x.is_normal() {
                return Err(Error::Domain(format!(
                    "lattice point q^{k} = {x:e} is not a normal positive float"
                )));
            }
        }
        Ok(Self {
            q,
            n_min,
            n_max,
            domain: SumDomain::Lattice,
            points,
        })
    }

    pub fn with_domain(mut self, domain: SumDomain) -> Self {
        self.domain = domain;
        self
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn n_min(&self) -> i32 {
        self.n_min
    }

    pub fn n_max(&self) -> i32 {
        self.n_max
    }

    pub fn domain(&self) -> SumDomain {
        self.domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn indices(&self) -> RangeInclusive<i32> {
        self.n_min..=self.n_max
    }

    pub fn contains(&self, k: i32) -> bool {
        k >= self.n_min && k <= self.n_max
    }

    /// Array offset of lattice index `k`.
    pub fn offset(&self, k: i32) -> Option<usize> {
        self.contains(k).then(|| (k - self.n_min) as usize)
    }

    pub fn point(&self, k: i32) -> Option<f64> {
        self.offset(k).map(|i| self.points[i])
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Indices summed by Jackson integrals over `(0, inf)`.
    pub fn summation_indices(&self) -> RangeInclusive<i32> {
        match self.domain {
            SumDomain::Lattice => self.n_min..=self.n_max,
            SumDomain::NonNegative => self.n_min.max(0)..=self.n_max,
        }
    }

    /// Same `q` (bitwise), same window, same summation domain.
    pub fn same_lattice(&self, other: &QGrid) -> bool {
        self.q.to_bits() == other.q.to_bits()
            && self.n_min == other.n_min
            && self.n_max == other.n_max
            && self.domain == other.domain
    }

    pub(crate) fn index_error(&self, k: i64) -> Error {
        Error::Index {
            index: k,
            n_min: self.n_min,
            n_max: self.n_max,
        }
    }

    /// Jackson measure weights `(1-q) x_k^{power+1}` so that
    /// `int_0^inf f(x) x^power d_q x = sum_k f(x_k) w_k`. Indices outside the
    /// summation domain get weight zero.
    pub fn jackson_weights(&self, power: f64) -> Vec<f64> {
        let sum_range = self.summation_indices();
        self.indices()
            .zip(&self.points)
            .map(|(k, &x)| {
                if sum_range.contains(&k) {
                    (1.0 - self.q) * x.powf(power + 1.0)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

pub fn build_grid(q: f64, n_min: i32, n_max: i32) -> Result<QGrid> {
    QGrid::new(q, n_min, n_max)
}

/// A real function sampled at every point of a [`QGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeFn {
    grid: QGrid,
    values: Vec<f64>,
}

impl LatticeFn {
    pub fn new(grid: QGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Validation(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!(
                "non-finite sample at index {}",
                grid.n_min() + i as i32
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: &QGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
        }
    }

    /// Samples `f(k, x_k)` over the window.
    pub fn from_fn(grid: &QGrid, mut f: impl FnMut(i32, f64) -> f64) -> Result<Self> {
        let values = grid.indices().zip(grid.points()).map(|(k, &x)| f(k, x)).collect();
        Self::new(grid.clone(), values)
    }

    pub fn point_mass(grid: &QGrid, k: i32, height: f64) -> Result<Self> {
        let i = grid.offset(k).ok_or_else(|| grid.index_error(k as i64))?;
        let mut values = vec![0.0; grid.len()];
        values[i] = height;
        Self::new(grid.clone(), values)
    }

    pub fn grid(&self) -> &QGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn at(&self, k: i32) -> Option<f64> {
        self.grid.offset(k).map(|i| self.values[i])
    }

    /// Value at `k`, or zero off the window.
    pub fn at_or_zero(&self, k: i32) -> f64 {
        self.at(k).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i32, f64)> + '_ {
        self.grid.indices().zip(self.values.iter().copied())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// `a*self + b*other`.
    pub fn lin_comb(&self, a: f64, other: &LatticeFn, b: f64) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Self::new(self.grid.clone(), values)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &LatticeFn) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(x, y)| x * y).collect();
        Self::new(self.grid.clone(), values)
    }

    pub(crate) fn check_same_grid(&self, other: &LatticeFn) -> Result<()> {
        if self.grid.same_lattice(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch(
                "functions are sampled on different lattices".into(),
            ))
        }
    }
}

fn finite_or_overflow(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow(what.into()))
    }
}

/// `(1-q) * sum_k f(q^k) q^k` over the summation indices, ascending `k`.
pub fn jackson_integral_0_to_inf(f: &LatticeFn) -> Result<f64> {
    jackson_weighted(f, 0.0)
}

/// `int_0^inf f(x) x^power d_q x`.
pub fn jackson_weighted(f: &LatticeFn, power: f64) -> Result<f64> {
    let weights = f.grid.jackson_weights(power);
    let mut acc = CompensatedSum::new();
    for (v, w) in f.values.iter().zip(&weights) {
        if *w != 0.0 {
            acc.add(v * w);
        }
    }
    finite_or_overflow(acc.value(), "Jackson integral")
}

/// `int_0^a f d_q x = (1-q) a sum_{m>=0} f(a q^m) q^m` for `a = q^j`,
/// truncated at the end of the window.
pub fn jackson_integral_0_to_a(f: &LatticeFn, j: i32) -> Result<f64> {
    let grid = &f.grid;
    let a = grid.point(j).ok_or_else(|| grid.index_error(j as i64))?;
    let q = grid.q;
    let mut acc = CompensatedSum::new();
    for k in j..=grid.n_max {
        let m = k - j;
        acc.add(f.values[(k - grid.n_min) as usize] * q.powi(m));
    }
    finite_or_overflow((1.0 - q) * a * acc.value(), "Jackson integral")
}

/// `int_a^b = int_0^b - int_0^a` with `a = q^{j_a}`, `b = q^{j_b}`.
pub fn jackson_integral_a_to_b(f: &LatticeFn, j_a: i32, j_b: i32) -> Result<f64> {
    let upper = jackson_integral_0_to_a(f, j_b)?;
    let lower = jackson_integral_0_to_a(f, j_a)?;
    finite_or_overflow(upper - lower, "Jackson integral")
}

/// `D_q f(x) = (f(x) - f(qx)) / ((1-q) x)` at `x = q^k`.
pub fn q_derivative(f: &LatticeFn, k: i32) -> Result<f64> {
    let grid = &f.grid;
    let (Some(here), Some(next)) = (f.at(k), f.at(k + 1)) else {
        return Err(grid.index_error(if grid.contains(k) { k as i64 + 1 } else { k as i64 }));
    };
    let x = grid.points[(k - grid.n_min) as usize];
    Ok((here - next) / ((1.0 - grid.q) * x))
}

/// `||f||_{q,p,v} = [ int_0^inf |f|^p x^{2|v|+1} d_q x ]^{1/p}`.
pub fn norm_qpv(f: &LatticeFn, p: f64, v: &VParams) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("norm exponent must be >= 1, got {p}")));
    }
    let abs_p = LatticeFn {
        grid: f.grid.clone(),
        values: f.values.iter().map(|x| x.abs().powf(p)).collect(),
    };
    let integral = jackson_weighted(&abs_p, 2.0 * v.abs_v() + 1.0)?;
    Ok(integral.powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(q: f64, lo: i32, hi: i32) -> QGrid {
        QGrid::new(q, lo, hi).unwrap()
    }

    #[test]
    fn powers_of_one_half() {
        let g = grid(0.5, -2, 2);
        assert_eq!(g.points(), &[4.0, 2.0, 1.0, 0.5, 0.25]);
    }

    #[test]
    fn powers_of_nine_tenths() {
        let g = grid(0.9, 0, 3);
        for (k, x) in g.indices().zip(g.points()) {
            let oracle = (k as f64 * 0.9f64.ln()).exp();
            assert!((x - oracle).abs() <= 4.0 * f64::EPSILON * oracle, "k={k}");
        }
        assert_eq!(g.points()[1], 0.9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(QGrid::new(1.0, -1, 1), Err(Error::Domain(_))));
        assert!(matches!(QGrid::new(0.0, -1, 1), Err(Error::Domain(_))));
        assert!(matches!(QGrid::new(0.5, 3, 3), Err(Error::Domain(_))));
        assert!(matches!(QGrid::new(0.5, -2000, 0), Err(Error::Domain(_))));
        assert!(matches!(QGrid::new(0.5, 0, 1100), Err(Error::Domain(_))));
    }

    #[test]
    fn point_lookup() {
        let g = grid(0.5, -2, 2);
        assert_eq!(g.point(-2), Some(4.0));
        assert_eq!(g.point(3), None);
        assert_eq!(g.offset(0), Some(2));
    }

    #[test]
    fn lattice_fn_validation() {
        let g = grid(0.5, 0, 3);
        assert!(LatticeFn::new(g.clone(), vec![0.0; 3]).is_err());
        assert!(LatticeFn::new(g.clone(), vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
        assert!(LatticeFn::point_mass(&g, 4, 1.0).is_err());
    }

    #[test]
    fn integral_of_zero() {
        let g = grid(0.5, -5, 60);
        assert_eq!(jackson_integral_0_to_inf(&LatticeFn::zeros(&g)).unwrap(), 0.0);
    }

    #[test]
    fn integral_of_point_mass() {
        let g = grid(0.3, -4, 10);
        let f = LatticeFn::point_mass(&g, 0, 2.5).unwrap();
        assert_eq!(jackson_integral_0_to_inf(&f).unwrap(), (1.0 - 0.3) * 2.5);
    }

    #[test]
    fn integral_of_identity_on_unit_interval() {
        // (1-q) sum_{k>=0} q^{2k} = 1/(1+q)
        let g = grid(0.5, 0, 60);
        let f = LatticeFn::from_fn(&g, |_, x| x).unwrap();
        let got = jackson_integral_0_to_inf(&f).unwrap();
        assert!((got - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn non_negative_domain_drops_negative_indices() {
        let g = grid(0.5, -3, 60).with_domain(SumDomain::NonNegative);
        let f = LatticeFn::from_fn(&g, |_, x| x).unwrap();
        let got = jackson_integral_0_to_inf(&f).unwrap();
        assert!((got - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_to_a() {
        let g = grid(0.5, -5, 60);
        let one = LatticeFn::from_fn(&g, |_, _| 1.0).unwrap();
        assert!((jackson_integral_0_to_a(&one, 0).unwrap() - 1.0).abs() < 1e-14);
        let id = LatticeFn::from_fn(&g, |_, x| x).unwrap();
        assert!((jackson_integral_0_to_a(&id, 0).unwrap() - 2.0 / 3.0).abs() < 1e-14);
        assert_eq!(jackson_integral_0_to_a(&LatticeFn::zeros(&g), 3).unwrap(), 0.0);
        assert!(matches!(jackson_integral_0_to_a(&one, 61), Err(Error::Index { .. })));
    }

    #[test]
    fn a_to_b() {
        let g = grid(0.5, -5, 60);
        let one = LatticeFn::from_fn(&g, |_, _| 1.0).unwrap();
        assert_eq!(jackson_integral_a_to_b(&one, 2, 2).unwrap(), 0.0);
        let got = jackson_integral_a_to_b(&one, 1, 0).unwrap();
        assert!((got - 0.5).abs() < 1e-15);
        assert_eq!(jackson_integral_a_to_b(&LatticeFn::zeros(&g), 4, -1).unwrap(), 0.0);
    }

    #[test]
    fn q_derivative_examples() {
        let g = grid(0.5, -3, 10);
        let id = LatticeFn::from_fn(&g, |_, x| x).unwrap();
        for k in -3..10 {
            assert!((q_derivative(&id, k).unwrap() - 1.0).abs() < 1e-15);
        }
        let c = LatticeFn::from_fn(&g, |_, _| 7.0).unwrap();
        assert_eq!(q_derivative(&c, 2).unwrap(), 0.0);
        let sq = LatticeFn::from_fn(&g, |_, x| x * x).unwrap();
        assert!((q_derivative(&sq, 0).unwrap() - 1.5).abs() < 1e-15);
        assert!(matches!(q_derivative(&sq, 10), Err(Error::Index { .. })));
    }

    #[test]
    fn norm_examples() {
        let g = grid(0.5, -5, 60);
        let v = VParams::new(0.5, 0).unwrap();
        assert_eq!(norm_qpv(&LatticeFn::zeros(&g), 2.0, &v).unwrap(), 0.0);
        let delta = LatticeFn::point_mass(&g, 0, 1.0).unwrap();
        let got = norm_qpv(&delta, 2.0, &v).unwrap();
        assert!((got - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(norm_qpv(&delta, 0.5, &v).is_err());
    }

    #[test]
    fn determinism() {
        let g = grid(0.7, -8, 40);
        let f = LatticeFn::from_fn(&g, |k, x| (k as f64).sin() * x.sqrt()).unwrap();
        let a = jackson_weighted(&f, 1.3).unwrap();
        let b = jackson_weighted(&f, 1.3).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
