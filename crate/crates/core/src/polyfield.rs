//! Complex polynomials and simultaneous root finding.
//!
//! A [`ComplexPoly`] stores coefficients in ascending degree. Roots are located
//! with the Aberth–Ehrlich iteration, polished with Newton steps on the
//! original polynomial, and then merged into clusters of multiplicity `m` when
//! they sit within `tol^(1/m)` of a common center.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Ratio between the second-best and best candidate distance below which a
/// greedy root match is rejected.
pub const MATCH_GUARD: f64 = 2.0;

/// Polynomial with complex coefficients, lowest degree first.
#[derive(Clone, PartialEq, Default)]
pub struct ComplexPoly {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for ComplexPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("ComplexPoly").field(&self.coeffs).finish()
    }
}

impl ComplexPoly {
    /// Builds a polynomial from ascending coefficients, trimming zero leading terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = ComplexPoly { coeffs };
        p.trim();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        ComplexPoly { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c])
    }

    pub fn monomial(k: usize) -> Self {
        let mut coeffs = vec![ZERO; k + 1];
        coeffs[k] = ONE;
        ComplexPoly { coeffs }
    }

    /// `lead * prod (z - r)` over the given roots (repeated roots allowed).
    pub fn from_roots(lead: Complex64, roots: &[Complex64]) -> Self {
        let mut coeffs = vec![lead];
        for &r in roots {
            let mut next = vec![ZERO; coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        Self::new(coeffs)
    }

    fn trim(&mut self) {
        while matches!(self.coeffs.last(), Some(c) if *c == ZERO) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Complex64 {
        self.coeffs.last().copied().unwrap_or(ZERO)
    }

    /// Horner evaluation.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// Sum of `|c_k| |z|^k`, the natural scale for a backward-error residual.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// Synthetic division by `(z - r)`; returns quotient and remainder.
    pub fn deflate(&self, r: Complex64) -> (Self, Complex64) {
        let n = self.coeffs.len();
        if n == 0 {
            return (Self::zero(), ZERO);
        }
        let mut q = vec![ZERO; n - 1];
        let mut carry = ZERO;
        for k in (0..n).rev() {
            let v = self.coeffs[k] + carry * r;
            if k == 0 {
                return (Self::new(q), v);
            }
            q[k - 1] = v;
            carry = v;
        }
        unreachable!()
    }

    /// Largest relative coefficient deviation from `other`, measured against
    /// the largest coefficient modulus of `self`.
    pub fn relative_distance(&self, other: &ComplexPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        let scale = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE);
        (0..n)
            .map(|k| {
                let a = self.coeffs.get(k).copied().unwrap_or(ZERO);
                let b = other.coeffs.get(k).copied().unwrap_or(ZERO);
                (a - b).norm()
            })
            .fold(0.0, f64::max)
            / scale
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, rhs: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ComplexPoly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(ZERO)
                        + rhs.coeffs.get(k).copied().unwrap_or(ZERO)
                })
                .collect(),
        )
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, rhs: &ComplexPoly) -> ComplexPoly {
        self + &(-rhs)
    }
}

impl Neg for &ComplexPoly {
    type Output = ComplexPoly;
    fn neg(self) -> ComplexPoly {
        self.scale(-ONE)
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, rhs: &ComplexPoly) -> ComplexPoly {
        if self.is_zero() || rhs.is_zero() {
            return ComplexPoly::zero();
        }
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        ComplexPoly::new(out)
    }
}

/// A located root with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
}

/// Roots of a polynomial with multiplicities and the worst backward-error
/// residual `|p(r)| / sum |c_k||r|^k` over the returned roots.
#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub roots: Vec<Root>,
    pub residual: f64,
}

impl RootSet {
    /// Root set from explicitly known simple roots.
    pub fn simple(values: &[Complex64]) -> Self {
        RootSet {
            roots: values
                .iter()
                .map(|&value| Root {
                    value,
                    multiplicity: 1,
                })
                .collect(),
            residual: 0.0,
        }
    }

    /// Total count with multiplicity.
    pub fn count(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Roots repeated according to multiplicity.
    pub fn flat(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }

    /// `lead * prod (z - r)^m`.
    pub fn expand(&self, lead: Complex64) -> ComplexPoly {
        ComplexPoly::from_roots(lead, &self.flat())
    }
}

/// Locates all roots of `p` (degree >= 1) to backward-error tolerance `tol`.
pub fn roots(p: &ComplexPoly, tol: f64) -> Result<RootSet> {
    let deg = match p.degree() {
        Some(d) if d >= 1 => d,
        Some(d) => return Err(Error::ConstantPolynomial(d)),
        None => return Err(Error::ConstantPolynomial(0)),
    };
    let raw = if deg == 1 {
        vec![-p.coeffs[0] / p.coeffs[1]]
    } else {
        let mut z = aberth_ehrlich(p, deg, 500);
        for r in z.iter_mut() {
            *r = newton_polish(p, *r, 8);
        }
        z
    };
    let mut roots = cluster(&raw, tol);
    for r in roots.iter_mut().filter(|r| r.multiplicity > 1) {
        // a root of multiplicity m is a simple root of the (m-1)-th derivative
        let mut d = p.clone();
        for _ in 1..r.multiplicity {
            d = d.derivative();
        }
        let polished = newton_polish(&d, r.value, 8);
        if (polished - r.value).norm() <= tol.powf(1.0 / r.multiplicity as f64) {
            r.value = polished;
        }
    }
    let residual = roots
        .iter()
        .map(|r| p.eval(r.value).norm() / p.abs_scale(r.value).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max);
    if residual > tol || !residual.is_finite() {
        return Err(Error::NonConvergence { residual, tol });
    }
    Ok(RootSet { roots, residual })
}

fn initial_guesses(p: &ComplexPoly, deg: usize) -> Vec<Complex64> {
    // Cauchy bound on the root moduli, circle of guesses with an irrational
    // phase offset so symmetric inputs do not land on a symmetric start.
    let lead = p.leading().norm();
    let bound = 1.0
        + p.coeffs[..deg]
            .iter()
            .map(|c| c.norm() / lead)
            .fold(0.0, f64::max);
    let radius = 0.5 * bound;
    (0..deg)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / deg as f64 + 0.4))
        .collect()
}

fn aberth_ehrlich(p: &ComplexPoly, deg: usize, max_iter: usize) -> Vec<Complex64> {
    let mut z = initial_guesses(p, deg);
    for _ in 0..max_iter {
        let mut max_step = 0.0_f64;
        for k in 0..deg {
            let (v, dv) = p.eval_with_derivative(z[k]);
            if v == ZERO {
                continue;
            }
            let ratio = v / dv;
            let repulsion: Complex64 = (0..deg)
                .filter(|&j| j != k)
                .map(|j| ONE / (z[k] - z[j]))
                .sum();
            let step = ratio / (ONE - ratio * repulsion);
            if step.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if max_step < 1e-16 {
            break;
        }
    }
    z
}

fn newton_polish(p: &ComplexPoly, mut z: Complex64, steps: usize) -> Complex64 {
    let mut best = (p.eval(z).norm(), z);
    for _ in 0..steps {
        let (v, dv) = p.eval_with_derivative(z);
        if dv == ZERO {
            break;
        }
        let next = z - v / dv;
        if !next.is_finite() {
            break;
        }
        z = next;
        let res = p.eval(z).norm();
        if res < best.0 {
            best = (res, z);
        }
    }
    best.1
}

/// Merges numerically coincident roots: `m` roots within `tol^(1/m)` of their
/// centroid become one root of multiplicity `m`.
fn cluster(raw: &[Complex64], tol: f64) -> Vec<Root> {
    let n = raw.len();
    let mut used = vec![false; n];
    let mut out = Vec::new();
    for i in 0..n {
        if used[i] {
            continue;
        }
        let mut near: Vec<usize> = (0..n).filter(|&j| !used[j]).collect();
        near.sort_by(|&a, &b| {
            (raw[a] - raw[i])
                .norm()
                .total_cmp(&(raw[b] - raw[i]).norm())
        });
        let mut chosen = vec![i];
        for m in (2..=near.len()).rev() {
            let group = &near[..m];
            let center: Complex64 = group.iter().map(|&j| raw[j]).sum::<Complex64>() / m as f64;
            let spread = group
                .iter()
                .map(|&j| (raw[j] - center).norm())
                .fold(0.0, f64::max);
            if spread <= tol.powf(1.0 / m as f64) {
                chosen = group.to_vec();
                break;
            }
        }
        let center = chosen.iter().map(|&j| raw[j]).sum::<Complex64>() / chosen.len() as f64;
        for &j in &chosen {
            used[j] = true;
        }
        out.push(Root {
            value: center,
            multiplicity: chosen.len(),
        });
    }
    out.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    out
}

/// Greedy nearest-neighbour bijection between the flattened root lists.
///
/// Returns `perm` with `perm[i]` the index in `next.flat()` matched to
/// `prev.flat()[i]`. Rejects the step when the second-closest candidate is
/// within [`MATCH_GUARD`] times the closest one.
pub fn match_roots(prev: &RootSet, next: &RootSet) -> Result<Vec<usize>> {
    match_points(&prev.flat(), &next.flat())
}

pub fn match_points(prev: &[Complex64], next: &[Complex64]) -> Result<Vec<usize>> {
    if prev.len() != next.len() {
        return Err(Error::CardinalityMismatch(prev.len(), next.len()));
    }
    let n = prev.len();
    let mut perm = vec![usize::MAX; n];
    let mut taken = vec![false; n];
    // most confident assignments first
    let mut order: Vec<(f64, usize)> = (0..n)
        .map(|i| {
            let d = next
                .iter()
                .map(|&w| (w - prev[i]).norm())
                .fold(f64::INFINITY, f64::min);
            (d, i)
        })
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    for &(_, i) in &order {
        let mut cands: Vec<(f64, usize)> = (0..n)
            .filter(|&j| !taken[j])
            .map(|j| ((next[j] - prev[i]).norm(), j))
            .collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (d1, j1) = cands[0];
        if let Some(&(d2, j2)) = cands.get(1) {
            let same_point = next[j1] == next[j2];
            if !same_point && d2 < MATCH_GUARD * d1 {
                return Err(Error::AmbiguousMatching {
                    ratio: d2 / d1,
                    guard: MATCH_GUARD,
                });
            }
        }
        perm[i] = j1;
        taken[j1] = true;
    }
    Ok(perm)
}

/// Composes step-by-step matchings along a sequence of point sets; the result
/// maps indices of the first set to indices of the last.
pub fn continue_points(steps: &[Vec<Complex64>]) -> Result<Vec<usize>> {
    let n = steps.first().map_or(0, |s| s.len());
    let mut total: Vec<usize> = (0..n).collect();
    for w in steps.windows(2) {
        let perm = match_points(&w[0], &w[1])?;
        total = total.iter().map(|&k| perm[k]).collect();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        assert!(p.eval(c(0.0, 1.0)).norm() < 1e-15);
        let one = ComplexPoly::constant(ONE);
        assert_eq!(one.eval(c(5.0, 2.0)), ONE);
        let quartic =
            ComplexPoly::from_roots(ONE, &[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(quartic.eval(ZERO), c(24.0, 0.0));
        // linear polynomials evaluate exactly
        let lin = ComplexPoly::new(vec![c(0.25, -1.5), c(2.0, 0.5)]);
        assert_eq!(lin.eval(c(3.0, 1.0)), c(0.25, -1.5) + c(2.0, 0.5) * c(3.0, 1.0));
    }

    #[test]
    fn trims_leading_zeros() {
        let p = ComplexPoly::from_real(&[1.0, 2.0, 0.0, 0.0]);
        assert_eq!(p.degree(), Some(1));
        assert!(ComplexPoly::from_real(&[0.0]).is_zero());
        assert_eq!(ComplexPoly::zero().degree(), None);
    }

    #[test]
    fn deflate_is_exact_division() {
        let p = ComplexPoly::from_roots(c(2.0, 1.0), &[c(1.0, 0.0), c(-0.5, 2.0), c(3.0, -1.0)]);
        let (q, rem) = p.deflate(c(-0.5, 2.0));
        assert!(rem.norm() < 1e-13);
        let back = &q * &ComplexPoly::new(vec![c(0.5, -2.0), ONE]);
        assert!(p.relative_distance(&back) < 1e-14);
    }

    #[test]
    fn roots_of_z2_plus_1() {
        let p = ComplexPoly::from_real(&[1.0, 0.0, 1.0]);
        let rs = roots(&p, 1e-12).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!(rs.roots.iter().all(|r| r.multiplicity == 1));
        let mut vals: Vec<_> = rs.roots.iter().map(|r| r.value).collect();
        vals.sort_by(|a, b| a.im.total_cmp(&b.im));
        assert!((vals[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((vals[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn exact_double_root_is_merged() {
        let p = ComplexPoly::from_real(&[1.0, -2.0, 1.0]);
        let rs = roots(&p, 1e-12).unwrap();
        assert_eq!(rs.roots.len(), 1);
        assert_eq!(rs.roots[0].multiplicity, 2);
        assert!((rs.roots[0].value - ONE).norm() < 1e-10);
    }

    #[test]
    fn close_simple_roots_stay_distinct() {
        let eps = 1e-3;
        let p = ComplexPoly::from_real(&[-eps * eps, 0.0, 1.0]);
        let rs = roots(&p, 1e-12).unwrap();
        assert_eq!(rs.roots.len(), 2);
        assert!((rs.roots[0].value - c(-eps, 0.0)).norm() < 1e-14);
        assert!((rs.roots[1].value - c(eps, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn constant_is_rejected() {
        assert!(matches!(
            roots(&ComplexPoly::constant(ONE), 1e-12),
            Err(Error::ConstantPolynomial(0))
        ));
    }

    #[test]
    fn sextic_re_expansion() {
        let eps = 0.1;
        let rts = [-eps, eps, 1.0, 2.0, 3.0, 4.0].map(|x| c(x, 0.0));
        let p = ComplexPoly::from_roots(ONE, &rts);
        let tol = 1e-12;
        let rs = roots(&p, tol).unwrap();
        assert_eq!(rs.count(), 6);
        assert!(p.relative_distance(&rs.expand(ONE)) <= 10.0 * tol);
    }

    #[test]
    fn matching_examples() {
        let prev = RootSet::simple(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let next = RootSet::simple(&[c(1.01, 0.0), c(2.02, 0.0)]);
        assert_eq!(match_roots(&prev, &next).unwrap(), vec![0, 1]);
        assert_eq!(match_roots(&prev, &prev).unwrap(), vec![0, 1]);
    }

    #[test]
    fn half_loop_swaps_pair() {
        let eps = 0.01;
        let steps: Vec<Vec<Complex64>> = (0..=16)
            .map(|k| {
                let e = Complex64::from_polar(eps, PI * k as f64 / 16.0);
                vec![e, -e]
            })
            .collect();
        let perm = continue_points(&steps).unwrap();
        // the final set is {-eps, eps} in that order, so each root ends on the
        // slot that started with its partner
        assert_eq!(perm, vec![0, 1]);
        let last = &steps[16];
        assert!((last[perm[0]] + c(eps, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ambiguous_step_is_rejected() {
        let prev = [c(0.0, 0.0), c(1.0, 0.0)];
        let next = [c(0.5, 0.0), c(0.55, 0.0)];
        assert!(matches!(
            match_points(&prev, &next),
            Err(Error::AmbiguousMatching { .. })
        ));
    }
}
