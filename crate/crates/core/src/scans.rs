//! Parameter ladders, regressions, monodromy loops and Jacobian checks.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::contour::{deform_basis, CycleBasis};
use crate::error::{Error, Result};
use crate::family::{eps_loop, Family, Param, Transported};
use crate::periods::QuadConfig;
use crate::polyfield::{match_points, roots, ComplexPoly};
use crate::skgeom::{potential, SKCoordinates, Sample};
use crate::surface::HyperellipticCurve;

/// Ordinary least squares fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ols {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Slope over its standard error.
    pub t_stat: f64,
}

pub fn ols(xs: &[f64], ys: &[f64]) -> Ols {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    let se = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let t_stat = if se == 0.0 {
        if slope == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        slope / se
    };
    Ols {
        slope,
        intercept,
        r2,
        t_stat,
    }
}

/// Minimum number of rows for a rate fit.
pub const MIN_FIT_ROWS: usize = 6;

/// `n` points from `start` to `end` spaced by `10^(1/per_decade)`, inclusive.
pub fn geometric_ladder(start: f64, end: f64, per_decade: usize) -> Vec<f64> {
    let decades = (start / end).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n)
        .map(|k| start * 10f64.powf(-(k as f64) / per_decade as f64))
        .collect()
}

/// Least-squares fit of an entry against a log regressor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub t_stat: f64,
    pub divergent: bool,
}

/// Fits `ys` against `xs` (already `-log` of the small quantity); divergent
/// means slope t-statistic above 10 with `R^2 >= 0.999`.
pub fn fit_log_rate(xs: &[f64], ys: &[f64]) -> Result<LogFit> {
    if xs.len() < MIN_FIT_ROWS || ys.len() != xs.len() {
        return Err(Error::InsufficientRows {
            need: MIN_FIT_ROWS,
            got: xs.len().min(ys.len()),
        });
    }
    let f = ols(xs, ys);
    Ok(LogFit {
        slope: f.slope,
        intercept: f.intercept,
        r2: f.r2,
        t_stat: f.t_stat,
        divergent: f.t_stat.abs() > 10.0 && f.r2 >= 0.999,
    })
}

/// One point of a degeneration ladder.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub eps: Complex64,
    /// `|z^k|` for every vanishing index `k` of the basis.
    pub z_van_abs: Vec<f64>,
    pub tau: DMatrix<Complex64>,
    pub gram: DMatrix<f64>,
    /// Largest quadrature error estimate in the row.
    pub err_est: f64,
    pub symmetry_defect: f64,
    pub min_eig: f64,
    pub dual_residual: f64,
    pub coords: SKCoordinates,
    pub potential: f64,
    pub potential_imag: f64,
    pub gradient: Vec<Complex64>,
}

impl ScanRow {
    fn from_sample(eps: Complex64, s: &Sample) -> Self {
        ScanRow {
            eps,
            z_van_abs: s.metric.vanishing.iter().map(|&k| s.coords.z[k].norm()).collect(),
            tau: s.analysis.tau.tau.clone(),
            gram: s.metric.gram.clone(),
            err_est: s.analysis.max_error(),
            symmetry_defect: s.metric.symmetry_defect,
            min_eig: s.metric.min_eig,
            dual_residual: s.analysis.dual.residual,
            coords: s.coords.clone(),
            potential: s.potential.k,
            potential_imag: s.potential.imag_residue,
            gradient: s.gradient.clone(),
        }
    }

    /// Riemann relations and dual normalization within the fixed bounds.
    pub fn riemann_ok(&self) -> bool {
        self.symmetry_defect <= 1e-6 && self.min_eig > 0.0 && self.dual_residual <= 1e-8
    }
}

#[derive(Debug, Clone)]
pub struct DegenerationReport {
    pub rows: Vec<ScanRow>,
    pub tangential: Vec<usize>,
    pub vanishing: Vec<usize>,
    /// Rows that could not be evaluated, with the reason.
    pub aborted: Vec<(f64, String)>,
}

impl DegenerationReport {
    pub fn entry(&self, i: usize, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r.gram[(i, j)]).collect()
    }

    /// `-log|z^k|` for the `v`-th vanishing index.
    pub fn log_z_van(&self, v: usize) -> Vec<f64> {
        self.rows.iter().map(|r| -r.z_van_abs[v].ln()).collect()
    }

    pub fn log_eps(&self) -> Vec<f64> {
        self.rows.iter().map(|r| -r.eps.norm().ln()).collect()
    }

    /// Fit of gram entry `(i, j)` against `-log|z_van|` of the first
    /// vanishing index.
    pub fn fit_entry(&self, i: usize, j: usize) -> Result<LogFit> {
        fit_log_rate(&self.log_z_van(0), &self.entry(i, j))
    }

    pub fn fit_entry_eps(&self, i: usize, j: usize) -> Result<LogFit> {
        fit_log_rate(&self.log_eps(), &self.entry(i, j))
    }

    /// `(max - min) / |mean|` of an entry over the rows.
    pub fn drift(&self, i: usize, j: usize) -> f64 {
        relative_spread(&self.entry(i, j))
    }

    pub fn all_riemann_ok(&self) -> bool {
        self.rows.iter().all(ScanRow::riemann_ok)
    }
}

pub fn relative_spread(v: &[f64]) -> f64 {
    let max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (max - min) / mean.abs()
}

/// Carries the family basis to every `eps` in turn (sequentially), then
/// evaluates the rows in parallel. Rows whose dual normalization is refused
/// are listed in `aborted`.
pub fn degeneration_scan(
    family: &Family,
    ladder: &[f64],
    cfg: &QuadConfig,
) -> Result<DegenerationReport> {
    cfg.validate()?;
    let states = transport_ladder(family, ladder)?;
    let evaluated: Vec<Result<Sample>> = states
        .par_iter()
        .map(|t| crate::skgeom::sample(&t.curve, &t.basis, cfg))
        .collect();
    let mut rows = Vec::new();
    let mut aborted = Vec::new();
    for (t, s) in states.iter().zip(evaluated) {
        match s {
            Ok(s) => rows.push(ScanRow::from_sample(t.param.eps, &s)),
            Err(e @ Error::IllConditioned(_)) => aborted.push((t.param.eps.norm(), e.to_string())),
            Err(e) => return Err(e),
        }
    }
    let basis = &states
        .first()
        .map(|t| t.basis.clone())
        .ok_or_else(|| Error::InvalidConfig("empty ladder".into()))?;
    Ok(DegenerationReport {
        rows,
        tangential: basis.tangential_indices(),
        vanishing: basis.vanishing_indices(),
        aborted,
    })
}

/// Transported states at each ladder point, in ladder order.
pub fn transport_ladder(family: &Family, ladder: &[f64]) -> Result<Vec<Transported>> {
    let mut cur = family.start()?;
    let mut out = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let to = Param {
            eps: Complex64::new(eps, 0.0),
            ..family.base
        };
        cur = family.transport_to(&cur, to)?;
        out.push(cur.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct MonodromyResult {
    pub eps0: f64,
    pub turns: f64,
    pub steps: usize,
    /// `n_k = (w_k' - w_k) / z^k` for every index.
    pub shifts: Vec<f64>,
    /// `|n_k - round(n_k)|` including the imaginary part of `n_k`.
    pub rounding_defect: Vec<f64>,
    /// Largest change of an a-period after the loop.
    pub a_return: f64,
    pub vanishing: Vec<usize>,
    pub before: SKCoordinates,
    pub after: SKCoordinates,
    pub tag_changed: bool,
}

impl MonodromyResult {
    pub fn integer_shifts(&self) -> Vec<i64> {
        self.shifts.iter().map(|n| n.round() as i64).collect()
    }
}

/// Transports the basis of the family around `eps0 * exp(2 pi i turns t)`
/// in `steps` steps per turn and compares the coordinates.
pub fn monodromy(
    family: &Family,
    eps0: f64,
    turns: u32,
    steps: usize,
    cfg: &QuadConfig,
) -> Result<MonodromyResult> {
    let start = family.start()?;
    let base = Param {
        eps: Complex64::new(eps0, 0.0),
        ..family.base
    };
    let at = family.transport_to(&start, base)?;
    let looped = if turns == 0 {
        at.clone()
    } else {
        let path = eps_loop(base, turns as f64);
        family.transport_along(&at, &path, steps * turns as usize)?
    };
    let before = crate::skgeom::coordinates(&at.curve, &at.basis, cfg)?;
    let after = crate::skgeom::coordinates(&looped.curve, &looped.basis, cfg)?;
    let g = before.z.len();
    let mut shifts = Vec::with_capacity(g);
    let mut defect = Vec::with_capacity(g);
    let mut a_return: f64 = 0.0;
    for k in 0..g {
        let n = (after.w[k] - before.w[k]) / before.z[k];
        shifts.push(n.re);
        defect.push((n.re - n.re.round()).abs().max(n.im.abs()));
        a_return = a_return.max((after.z[k] - before.z[k]).norm());
    }
    Ok(MonodromyResult {
        eps0,
        turns: turns as f64,
        steps,
        shifts,
        rounding_defect: defect,
        a_return,
        vanishing: at.basis.vanishing_indices(),
        tag_changed: before.branch_tag != after.branch_tag,
        before,
        after,
    })
}

/// Moves the curve to `Q + t z^k`, keeping root labels and the basis.
fn perturbed(
    curve: &HyperellipticCurve,
    basis: &CycleBasis,
    k: usize,
    t: Complex64,
) -> Result<(HyperellipticCurve, CycleBasis)> {
    let q = curve.q() + &ComplexPoly::monomial(k).scale(t);
    let found = roots(&q, 1e-12)?.flat();
    let old = curve.root_values();
    let m = match_points(&old, &found)?;
    let ordered: Vec<Complex64> = m.iter().map(|&j| found[j]).collect();
    let new = HyperellipticCurve::from_simple_roots(curve.lead(), &ordered)?;
    let ident: Vec<usize> = (0..old.len()).collect();
    let b = deform_basis(basis, curve, &new, &ident)?;
    Ok((new, b))
}

/// Finite-difference check of `tau_ij = dw_j / dz^i` and of the closed-form
/// potential gradient.
#[derive(Debug, Clone)]
pub struct JacobianReport {
    pub tau: DMatrix<Complex64>,
    pub tau_fd: DMatrix<Complex64>,
    /// `max |tau_fd - tau| / max |tau|`.
    pub max_rel_dev: f64,
    pub gradient: Vec<Complex64>,
    pub gradient_fd: Vec<Complex64>,
    pub gradient_rel_dev: f64,
    pub step: f64,
}

/// Differentiates `(z, w, K)` along the holomorphic directions
/// `Q + t z^k`, `k < g`, with centered differences at steps `h` and `h/2`
/// combined by Richardson extrapolation. Along these directions the
/// variation of `y dz` is a holomorphic form, which is what makes
/// `dw = tau^T dz` hold on a planar curve.
pub fn jacobian_check(
    curve: &HyperellipticCurve,
    basis: &CycleBasis,
    cfg: &QuadConfig,
) -> Result<JacobianReport> {
    let g = basis.size();
    if !curve.is_smooth() {
        return Err(Error::InvalidConfig("Jacobian check needs a smooth curve".into()));
    }
    let s0 = crate::skgeom::sample(curve, basis, cfg)?;
    let tau = s0.analysis.tau.tau.clone();
    let h = jacobian_step(curve, g);
    let eval = |k: usize, t: Complex64| -> Result<(Vec<Complex64>, Vec<Complex64>, f64)> {
        let (c, b) = perturbed(curve, basis, k, t)?;
        let co = crate::skgeom::coordinates(&c, &b, cfg)?;
        let kk = potential(&co).k;
        Ok((co.z, co.w, kk))
    };
    let mut jz = DMatrix::zeros(g, g);
    let mut jw = DMatrix::zeros(g, g);
    let mut dk = vec![Complex64::new(0.0, 0.0); g];
    let jobs: Vec<(usize, Complex64)> = (0..g)
        .flat_map(|k| {
            [1.0, -1.0, 0.5, -0.5]
                .into_iter()
                .flat_map(move |s| {
                    [Complex64::new(s * h, 0.0), Complex64::new(0.0, s * h)]
                        .into_iter()
                        .map(move |t| (k, t))
                })
        })
        .collect();
    let values: Vec<_> = jobs
        .par_iter()
        .map(|&(k, t)| eval(k, t))
        .collect::<Result<Vec<_>>>()?;
    let get = |k: usize, t: Complex64| {
        let idx = jobs.iter().position(|&(kk, tt)| kk == k && tt == t).unwrap();
        &values[idx]
    };
    let rich = |fp: Complex64, fm: Complex64, hp: Complex64, hm: Complex64, hh: f64| {
        let d1 = (fp - fm) / (2.0 * hh);
        let d2 = (hp - hm) / hh;
        (4.0 * d2 - d1) / 3.0
    };
    for k in 0..g {
        let re = |s: f64| get(k, Complex64::new(s * h, 0.0));
        let im = |s: f64| get(k, Complex64::new(0.0, s * h));
        for i in 0..g {
            jz[(i, k)] = rich(re(1.0).0[i], re(-1.0).0[i], re(0.5).0[i], re(-0.5).0[i], h);
            jw[(i, k)] = rich(re(1.0).1[i], re(-1.0).1[i], re(0.5).1[i], re(-0.5).1[i], h);
        }
        let c = |x: f64| Complex64::new(x, 0.0);
        let dre = rich(c(re(1.0).2), c(re(-1.0).2), c(re(0.5).2), c(re(-0.5).2), h).re;
        let dim = rich(c(im(1.0).2), c(im(-1.0).2), c(im(0.5).2), c(im(-0.5).2), h).re;
        // Wirtinger derivative of the real function K
        dk[k] = Complex64::new(0.5 * dre, -0.5 * dim);
    }
    let jz_inv = jz
        .clone()
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let tau_fd = (&jw * &jz_inv).transpose();
    let scale = tau.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let max_rel_dev = (&tau_fd - &tau).iter().map(|v| v.norm()).fold(0.0, f64::max) / scale;
    let dkv = DMatrix::from_row_slice(1, g, &dk);
    let gfd = &dkv * &jz_inv;
    let gradient_fd: Vec<Complex64> = gfd.iter().cloned().collect();
    let gscale = s0.gradient.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let gradient_rel_dev = s0
        .gradient
        .iter()
        .zip(&gradient_fd)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
        / gscale;
    Ok(JacobianReport {
        tau,
        tau_fd,
        max_rel_dev,
        gradient: s0.gradient,
        gradient_fd,
        gradient_rel_dev,
        step: h,
    })
}

/// Step for which the fastest root moves about `1e-3` of the smallest root
/// separation in every direction `z^k`, `k < g`.
fn jacobian_step(curve: &HyperellipticCurve, g: usize) -> f64 {
    let dq = curve.q().derivative();
    let mut speed: f64 = 0.0;
    for r in curve.roots() {
        let d = dq.eval(r.value).norm();
        for k in 0..g {
            speed = speed.max(r.value.norm().powi(k as i32) / d);
        }
    }
    1e-3 * curve.min_separation() / speed
}

/// Convenience: analysis of a fixed family point without scanning.
pub fn evaluate(family: &Family, eps: f64, cfg: &QuadConfig) -> Result<(Transported, Sample)> {
    let start = family.start()?;
    let t = family.transport_to(
        &start,
        Param {
            eps: Complex64::new(eps, 0.0),
            ..family.base
        },
    )?;
    let s = crate::skgeom::sample(&t.curve, &t.basis, cfg)?;
    Ok((t, s))
}
