//! Special coordinates, metric blocks and the Kähler potential.
//!
//! Coordinates are the periods of `theta = y dz`: `z^i` over the a-cycles and
//! `w_i` over the b-cycles, oriented so that `tau_ij = dw_j / dz^i`. The
//! metric is `Im tau`, split into tangential (A), mixed (B) and transverse
//! (D) blocks by the vanishing tags of the basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use rayon::prelude::*;

use crate::contour::{build_cycle_basis, CycleBasis};
use crate::error::{Error, Result};
use crate::family::{Family, Param};
use crate::periods::{analyze, Analysis, PeriodMatrix, QuadConfig, TauMatrix};
use crate::scans::ols;
use crate::surface::HyperellipticCurve;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, PartialEq)]
pub struct SKCoordinates {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub z_err: Vec<f64>,
    pub w_err: Vec<f64>,
    /// Hash of the continuation history of the basis.
    pub branch_tag: u64,
}

impl SKCoordinates {
    pub fn from_periods(pm: &PeriodMatrix, basis: &CycleBasis) -> Self {
        SKCoordinates {
            z: pm.theta_a.iter().map(|e| e.value).collect(),
            w: pm.theta_b.iter().map(|e| e.value).collect(),
            z_err: pm.theta_a.iter().map(|e| e.error).collect(),
            w_err: pm.theta_b.iter().map(|e| e.error).collect(),
            branch_tag: basis.branch_tag,
        }
    }
}

pub fn coordinates(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    cfg: &QuadConfig,
) -> Result<SKCoordinates> {
    let pm = crate::periods::period_matrices(c, basis, cfg)?;
    Ok(SKCoordinates::from_periods(&pm, basis))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SKMetricSample {
    /// Symmetrized `Im tau`.
    pub gram: DMatrix<f64>,
    pub tangential: Vec<usize>,
    pub vanishing: Vec<usize>,
    pub a_block: DMatrix<f64>,
    pub b_block: DMatrix<f64>,
    pub d_block: DMatrix<f64>,
    /// Smallest eigenvalue of the A-block (infinite when it is empty).
    pub min_eig_a: f64,
    pub min_eig: f64,
    pub symmetry_defect: f64,
}

fn sub(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

impl SKMetricSample {
    pub fn from_tau(tau: &TauMatrix, basis: &CycleBasis) -> Self {
        let gram = tau.imag();
        let tangential = basis.tangential_indices();
        let vanishing = basis.vanishing_indices();
        let a_block = sub(&gram, &tangential, &tangential);
        SKMetricSample {
            b_block: sub(&gram, &tangential, &vanishing),
            d_block: sub(&gram, &vanishing, &vanishing),
            min_eig_a: min_eigenvalue(&a_block),
            a_block,
            min_eig: tau.min_imag_eigenvalue,
            symmetry_defect: tau.symmetry_defect,
            gram,
            tangential,
            vanishing,
        }
    }
}

pub fn metric(c: &HyperellipticCurve, basis: &CycleBasis, cfg: &QuadConfig) -> Result<SKMetricSample> {
    let an = analyze(c, basis, cfg)?;
    Ok(SKMetricSample::from_tau(&an.tau, basis))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub k: f64,
    /// Imaginary part of the period sum, zero up to rounding.
    pub imag_residue: f64,
}

/// `K = (i/4) sum (z^i conj(w_i) - w_i conj(z^i))`.
pub fn potential(coords: &SKCoordinates) -> PotentialSample {
    let s: Complex64 = coords
        .z
        .iter()
        .zip(&coords.w)
        .map(|(z, w)| z * w.conj() - w * z.conj())
        .sum();
    let k = I * s / 4.0;
    PotentialSample {
        k: k.re,
        imag_residue: k.im,
    }
}

/// `dK/dz^j = (i/4)(conj(w_j) - sum_i tau_ij conj(z^i))`.
pub fn potential_gradient(coords: &SKCoordinates, tau: &DMatrix<Complex64>) -> Vec<Complex64> {
    let g = coords.z.len();
    (0..g)
        .map(|j| {
            let mut s = coords.w[j].conj();
            for i in 0..g {
                s -= tau[(i, j)] * coords.z[i].conj();
            }
            I * s / 4.0
        })
        .collect()
}

/// Everything known about one parameter point.
#[derive(Debug, Clone)]
pub struct Sample {
    pub analysis: Analysis,
    pub coords: SKCoordinates,
    pub metric: SKMetricSample,
    pub potential: PotentialSample,
    pub gradient: Vec<Complex64>,
}

pub fn sample(c: &HyperellipticCurve, basis: &CycleBasis, cfg: &QuadConfig) -> Result<Sample> {
    let analysis = analyze(c, basis, cfg)?;
    let coords = SKCoordinates::from_periods(&analysis.periods, basis);
    let metric = SKMetricSample::from_tau(&analysis.tau, basis);
    let potential = potential(&coords);
    let gradient = potential_gradient(&coords, &analysis.tau.tau);
    Ok(Sample {
        analysis,
        coords,
        metric,
        potential,
        gradient,
    })
}

/// Diagonal weights of the local model metric: 1 on tangential directions,
/// `-log|z^k|` on the transverse ones listed in `vanishing` (or 1 everywhere
/// when `log_weight` is off).
pub fn model_weights(
    vanishing: &[usize],
    coords: &SKCoordinates,
    log_weight: bool,
) -> Result<Vec<f64>> {
    let mut w = vec![1.0; coords.z.len()];
    if log_weight {
        for &k in vanishing {
            let a = coords.z[k].norm();
            if a >= 1.0 {
                return Err(Error::ModelSingular(a));
            }
            w[k] = -a.ln();
        }
    }
    Ok(w)
}

/// Range `(min, max)` of the generalized eigenvalues of the gram matrix
/// against the diagonal model metric.
pub fn compare_model(sample: &SKMetricSample, coords: &SKCoordinates) -> Result<(f64, f64)> {
    let w = model_weights(&sample.vanishing, coords, true)?;
    Ok(compare_weights(&sample.gram, &w))
}

pub fn compare_weights(gram: &DMatrix<f64>, weights: &[f64]) -> (f64, f64) {
    let g = weights.len();
    let s: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let m = DMatrix::from_fn(g, g, |i, j| gram[(i, j)] * s[i] * s[j]);
    let ev = m.symmetric_eigenvalues();
    (
        ev.iter().cloned().fold(f64::INFINITY, f64::min),
        ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    )
}

/// Sample on the nodal curve of the family (moving pairs merged), with the
/// reduced cycle set that leaves the nodes out.
pub fn stratum_sample(family: &Family, scale: Complex64, cfg: &QuadConfig) -> Result<Sample> {
    let (curve, plan) = family.nodal(scale)?;
    let basis = build_cycle_basis(&curve, &plan)?;
    sample(&curve, &basis, cfg)
}

#[derive(Debug, Clone)]
pub struct RadialRow {
    pub l: Complex64,
    pub tau: DMatrix<Complex64>,
    pub z: Vec<Complex64>,
    pub potential: f64,
    pub symmetry_defect: f64,
    pub min_eig: f64,
    pub dual_residual: f64,
}

#[derive(Debug, Clone)]
pub struct RadialReport {
    pub rows: Vec<RadialRow>,
    /// `K(1) / 2`.
    pub c0: f64,
    /// `z(1)^* Im(tau) z(1) / 4`, the coefficient of `|l|^-1 |dl|^2` in the
    /// restriction of the metric to the line.
    pub c0_metric: f64,
    /// `max |tau(l) - tau(1)|` over the grid.
    pub tau_dev: f64,
    /// Fitted exponent of `|z^i(l)|` against `|l|`, per index.
    pub exponents: Vec<f64>,
    /// `max |K(l)/|l| - K(1)| / |K(1)|`.
    pub potential_ratio_dev: f64,
    /// `2 pi` times the mean fitted exponent.
    pub cone_angle: f64,
}

/// Evaluates the family at `eps = base` on the line `l * Q`, `l` over the
/// grid (which must contain 1).
pub fn radial_scan(family: &Family, grid: &[Complex64], cfg: &QuadConfig) -> Result<RadialReport> {
    let one = Complex64::new(1.0, 0.0);
    if !grid.iter().any(|&l| l == one) {
        return Err(Error::InvalidConfig("radial grid must contain l = 1".into()));
    }
    let start = family.start()?;
    let rows: Vec<RadialRow> = grid
        .par_iter()
        .map(|&l| {
            let t = family.transport_to(
                &start,
                Param {
                    scale: l,
                    ..family.base
                },
            )?;
            let s = sample(&t.curve, &t.basis, cfg)?;
            Ok(RadialRow {
                l,
                tau: s.analysis.tau.tau.clone(),
                z: s.coords.z.clone(),
                potential: s.potential.k,
                symmetry_defect: s.metric.symmetry_defect,
                min_eig: s.metric.min_eig,
                dual_residual: s.analysis.dual.residual,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let base = rows.iter().find(|r| r.l == one).expect("grid contains 1");
    let g = base.z.len();
    let tau_dev = rows
        .iter()
        .flat_map(|r| (&r.tau - &base.tau).iter().map(|v| v.norm()).collect::<Vec<_>>())
        .fold(0.0, f64::max);
    let xs: Vec<f64> = rows.iter().map(|r| r.l.norm().ln()).collect();
    let exponents: Vec<f64> = (0..g)
        .map(|i| {
            let ys: Vec<f64> = rows.iter().map(|r| r.z[i].norm().ln()).collect();
            ols(&xs, &ys).slope
        })
        .collect();
    let k1 = base.potential;
    let potential_ratio_dev = rows
        .iter()
        .map(|r| (r.potential / r.l.norm() - k1).abs() / k1.abs())
        .fold(0.0, f64::max);
    let im = base.tau.map(|v| v.im);
    let mut c0_metric = 0.0;
    for i in 0..g {
        for j in 0..g {
            c0_metric += (base.z[i].conj() * im[(i, j)] * base.z[j]).re;
        }
    }
    let mean_exp = exponents.iter().sum::<f64>() / g as f64;
    Ok(RadialReport {
        c0: 0.5 * k1,
        c0_metric: 0.25 * c0_metric,
        tau_dev,
        exponents,
        potential_ratio_dev,
        cone_angle: 2.0 * std::f64::consts::PI * mean_exp,
        rows,
    })
}

/// Moduli `{1/4, 1/2, 1, 2, 4}` times phases `{-pi/2, -pi/4, 0, pi/4, pi/2}`.
pub fn default_radial_grid() -> Vec<Complex64> {
    let mut out = Vec::new();
    for m in [0.25, 0.5, 1.0, 2.0, 4.0] {
        for k in -2..=2 {
            out.push(Complex64::from_polar(m, k as f64 * std::f64::consts::FRAC_PI_4));
        }
    }
    // exact 1 so the base row is found by equality
    for v in out.iter_mut() {
        if (*v - Complex64::new(1.0, 0.0)).norm() < 1e-15 {
            *v = Complex64::new(1.0, 0.0);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coords(z: Vec<Complex64>, w: Vec<Complex64>) -> SKCoordinates {
        let n = z.len();
        SKCoordinates {
            z,
            w,
            z_err: vec![0.0; n],
            w_err: vec![0.0; n],
            branch_tag: 0,
        }
    }

    #[test]
    fn zero_coordinates_have_zero_potential() {
        let p = potential(&coords(vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0); 2]));
        assert_eq!(p.k, 0.0);
        assert_eq!(p.imag_residue, 0.0);
    }

    #[test]
    fn homogeneous_potential_is_half_the_quadratic_form() {
        // w = tau z gives K = z^* Im(tau) z / 2
        let tau = DMatrix::from_row_slice(2, 2, &[c(0.3, 1.2), c(0.1, 0.2), c(0.1, 0.2), c(-0.4, 0.9)]);
        let z = vec![c(0.7, -0.2), c(0.1, 0.5)];
        let w: Vec<Complex64> = (0..2)
            .map(|j| (0..2).map(|i| tau[(i, j)] * z[i]).sum())
            .collect();
        let p = potential(&coords(z.clone(), w));
        let mut q = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                q += (z[i].conj() * tau[(i, j)].im * z[j]).re;
            }
        }
        assert!((p.k - 0.5 * q).abs() < 1e-15);
        assert!(p.imag_residue.abs() < 1e-16);
    }

    #[test]
    fn gradient_of_homogeneous_potential() {
        // with w = tau z the closed form reduces to (1/2) Im(tau) conj(z) ... times i/4 factors
        let tau = DMatrix::from_row_slice(1, 1, &[c(0.2, 1.5)]);
        let z = c(0.3, 0.4);
        let cs = coords(vec![z], vec![tau[(0, 0)] * z]);
        let g = potential_gradient(&cs, &tau);
        // K = Im(tau) |z|^2 / 2 has dK/dz = Im(tau) conj(z) / 2
        let want = z.conj() * 1.5 / 2.0;
        assert!((g[0] - want).norm() < 1e-15);
    }

    #[test]
    fn model_ratio_identity() {
        let gram = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 3.0]);
        let s = SKMetricSample {
            a_block: DMatrix::identity(1, 1),
            b_block: DMatrix::zeros(1, 1),
            d_block: DMatrix::from_element(1, 1, 3.0),
            min_eig_a: 1.0,
            min_eig: 1.0,
            symmetry_defect: 0.0,
            gram,
            tangential: vec![0],
            vanishing: vec![1],
        };
        let z = (-3.0f64).exp();
        let cs = coords(vec![c(1.0, 0.0), c(z, 0.0)], vec![c(0.0, 0.0); 2]);
        let (lo, hi) = compare_model(&s, &cs).unwrap();
        assert!((lo - 1.0).abs() < 1e-12 && (hi - 1.0).abs() < 1e-12);
        let big = coords(vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0); 2]);
        assert!(matches!(compare_model(&s, &big), Err(Error::ModelSingular(_))));
    }
}
