//! Adaptive contour quadrature, period matrices, dual bases and residues.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::contour::{Cycle, CycleBasis, Path};
use crate::error::{Error, Result};
use crate::polyfield::ComplexPoly;
use crate::surface::{Differential, HyperellipticCurve, LiftedPath, MeromorphicForm};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Condition number of the a-period matrix above which dual normalization is refused.
pub const CONDITION_CAP: f64 = 1e10;

/// Interval budget per path integral.
const MAX_INTERVALS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndpointRule {
    /// Integrate in `u` with `z = r + (z_o - r) u^2` next to simple-root endpoints.
    Substitution,
    /// Reject paths that end on branch points.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: usize,
    pub endpoint_rule: EndpointRule,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            rel_tol: 1e-12,
            abs_tol: 0.0,
            max_depth: 40,
            endpoint_rule: EndpointRule::Substitution,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        QuadConfig {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol >= 1e-13) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol {:e} is below 1e-13",
                self.rel_tol
            )));
        }
        if self.max_depth > 40 {
            return Err(Error::InvalidConfig(format!(
                "max_depth {} exceeds 40",
                self.max_depth
            )));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(Error::InvalidConfig("abs_tol must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A value with its quadrature error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

// 21-point Kronrod nodes on [0, 1] half-interval and the embedded 10-point Gauss rule.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
// Gauss weights for XGK[1], XGK[3], .., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// Kronrod value, Gauss value and Kronrod estimate of `int |f|` of a
/// vector-valued integrand on `[a, b]`.
pub(crate) fn gk21<F>(f: &F, a: f64, b: f64, n: usize) -> (Vec<Complex64>, Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &mut [Complex64]),
{
    let m = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut k = vec![ZERO; n];
    let mut g = vec![ZERO; n];
    let mut l1 = vec![0.0; n];
    let mut buf = vec![ZERO; n];
    for (i, &x) in XGK.iter().enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &sgn in nodes {
            f(m + sgn * h * x, &mut buf);
            for c in 0..n {
                k[c] += buf[c] * WGK[i];
                l1[c] += buf[c].norm() * WGK[i];
                if i % 2 == 1 {
                    g[c] += buf[c] * WG[i / 2];
                }
            }
        }
    }
    let err = k.iter().zip(&g).map(|(kk, gg)| ((kk - gg) * h).norm()).collect();
    (
        k.into_iter().map(|v| v * h).collect(),
        err,
        l1.into_iter().map(|v| v * h.abs()).collect(),
    )
}

struct Interval {
    sub: usize,
    a: f64,
    b: f64,
    depth: usize,
    val: Vec<Complex64>,
    err: Vec<f64>,
    l1: Vec<f64>,
}

fn check_endpoints(
    c: &HyperellipticCurve,
    path: &Path,
    diffs: &[Differential],
    cfg: &QuadConfig,
) -> Result<()> {
    for root in [path.start_root, path.end_root].into_iter().flatten() {
        let r = c.roots()[root];
        if r.multiplicity % 2 == 1 {
            if cfg.endpoint_rule == EndpointRule::None {
                return Err(Error::InvalidConfig(
                    "path ends on a branch point but the endpoint substitution is disabled".into(),
                ));
            }
            if r.multiplicity > 1 {
                return Err(Error::PoleOnPath(r.value));
            }
        } else {
            for d in diffs {
                if let Differential::Form(f) = d {
                    let v = f.numerator.eval(r.value).norm();
                    let scale = f.numerator.abs_scale(r.value).max(f64::MIN_POSITIVE);
                    if v > 1e-12 * scale {
                        return Err(Error::PoleOnPath(r.value));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Integrates several differentials along one lifted path with a globally
/// adaptive Gauss–Kronrod rule. Each component stops at
/// `max(abs_tol, rel_tol |I|, 64 eps int|f|)`.
pub fn integrate_many(
    c: &HyperellipticCurve,
    lifted: &LiftedPath,
    diffs: &[Differential],
    cfg: &QuadConfig,
) -> Result<Vec<Estimate>> {
    cfg.validate()?;
    check_endpoints(c, &lifted.path, diffs, cfg)?;
    let n = diffs.len();
    let nums: Vec<Option<&ComplexPoly>> = diffs
        .iter()
        .map(|d| match d {
            Differential::Theta => None,
            Differential::Form(f) => Some(&f.numerator),
        })
        .collect();
    let eval = |sub: usize| {
        let nums = &nums;
        move |u: f64, out: &mut [Complex64]| {
            let s = lifted.sample(sub, u);
            for (k, p) in nums.iter().enumerate() {
                out[k] = match p {
                    None => s.y_jac,
                    Some(p) => p.eval(s.z) * s.jac_over_2y,
                };
            }
        }
    };
    let mut intervals: Vec<Interval> = (0..lifted.sub_count())
        .map(|sub| {
            let (val, err, l1) = gk21(&eval(sub), 0.0, 1.0, n);
            Interval {
                sub,
                a: 0.0,
                b: 1.0,
                depth: 0,
                val,
                err,
                l1,
            }
        })
        .collect();
    loop {
        let mut total = vec![ZERO; n];
        let mut err = vec![0.0; n];
        let mut l1 = vec![0.0; n];
        for iv in &intervals {
            for k in 0..n {
                total[k] += iv.val[k];
                err[k] += iv.err[k];
                l1[k] += iv.l1[k];
            }
        }
        let target: Vec<f64> = (0..n)
            .map(|k| {
                cfg.abs_tol
                    .max(cfg.rel_tol * total[k].norm())
                    .max(64.0 * f64::EPSILON * l1[k])
            })
            .collect();
        let worst = (0..n)
            .map(|k| err[k] / target[k].max(f64::MIN_POSITIVE))
            .fold(0.0, f64::max);
        if worst <= 1.0 || (0..n).all(|k| err[k] <= target[k]) {
            return Ok((0..n)
                .map(|k| Estimate {
                    value: total[k],
                    error: err[k],
                })
                .collect());
        }
        let score = |iv: &Interval| {
            (0..n)
                .map(|k| iv.err[k] / target[k].max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max)
        };
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .map(|(i, iv)| (i, score(iv)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (kw, _) = (0..n)
            .map(|k| (k, err[k] / target[k].max(f64::MIN_POSITIVE)))
            .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if intervals[idx].depth >= cfg.max_depth || intervals.len() >= MAX_INTERVALS {
            return Err(Error::ToleranceNotMet {
                error: err[kw],
                target: target[kw],
            });
        }
        let iv = intervals.swap_remove(idx);
        let mid = 0.5 * (iv.a + iv.b);
        for (a, b) in [(iv.a, mid), (mid, iv.b)] {
            let (val, err, l1) = gk21(&eval(iv.sub), a, b, n);
            intervals.push(Interval {
                sub: iv.sub,
                a,
                b,
                depth: iv.depth + 1,
                val,
                err,
                l1,
            });
        }
    }
}

/// Integrates one differential along a lifted path.
pub fn integrate_form(
    c: &HyperellipticCurve,
    lifted: &LiftedPath,
    form: &Differential,
    cfg: &QuadConfig,
) -> Result<Estimate> {
    Ok(integrate_many(c, lifted, std::slice::from_ref(form), cfg)?[0])
}

/// Integrals of `diffs` over every primitive of the basis (cycle values,
/// i.e. double arcs already doubled).
pub fn primitive_periods(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    diffs: &[Differential],
    cfg: &QuadConfig,
) -> Result<Vec<Vec<Estimate>>> {
    basis
        .primitives
        .iter()
        .map(|p| {
            let m = p.multiplier();
            Ok(integrate_many(c, &p.lifted, diffs, cfg)?
                .into_iter()
                .map(|e| Estimate {
                    value: e.value * m,
                    error: e.error * m,
                })
                .collect())
        })
        .collect()
}

/// Combines primitive integrals over a cycle.
pub fn cycle_period(prim: &[Vec<Estimate>], cycle: &Cycle, k: usize) -> Estimate {
    let mut value = ZERO;
    let mut error = 0.0;
    for &(i, w) in &cycle.terms {
        value += prim[i][k].value * w as f64;
        error += prim[i][k].error * (w as f64).abs();
    }
    Estimate { value, error }
}

/// Numerators `p_k` of the forms `p_k dz / (2y)` whose periods make up the
/// period matrix: monomials on curves fully covered by the plan, otherwise
/// monomials times the factor of the nodes left out of the plan.
pub fn basis_numerators(c: &HyperellipticCurve, basis: &CycleBasis) -> Vec<ComplexPoly> {
    let mut used = vec![false; c.roots().len()];
    for p in &basis.plan.pairs {
        for &r in &p.roots {
            used[r] = true;
        }
    }
    let mut node_roots = Vec::new();
    for (i, r) in c.roots().iter().enumerate() {
        if !used[i] {
            node_roots.extend(std::iter::repeat_n(r.value, r.multiplicity / 2));
        }
    }
    let s = ComplexPoly::from_roots(Complex64::new(1.0, 0.0), &node_roots);
    (0..basis.size())
        .map(|k| &ComplexPoly::monomial(k) * &s)
        .collect()
}

/// a- and b-periods of the form basis and of `theta`.
#[derive(Debug, Clone)]
pub struct PeriodMatrix {
    /// `A[i][j] = int_{a_i} p_j dz / (2y)`.
    pub a: DMatrix<Complex64>,
    pub b: DMatrix<Complex64>,
    pub a_err: DMatrix<f64>,
    pub b_err: DMatrix<f64>,
    /// `int_{a_i} y dz`.
    pub theta_a: Vec<Estimate>,
    /// `int_{b_i} y dz`.
    pub theta_b: Vec<Estimate>,
    pub numerators: Vec<ComplexPoly>,
    /// 2-norm condition number of `A`.
    pub condition: f64,
}

pub fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn period_matrices(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    cfg: &QuadConfig,
) -> Result<PeriodMatrix> {
    let numerators = basis_numerators(c, basis);
    let g = basis.size();
    let mut diffs: Vec<Differential> = numerators
        .iter()
        .map(|p| Differential::Form(MeromorphicForm { numerator: p.clone() }))
        .collect();
    diffs.push(Differential::Theta);
    let prim = primitive_periods(c, basis, &diffs, cfg)?;
    Ok(assemble_periods(basis, &prim, numerators, g))
}

fn assemble_periods(
    basis: &CycleBasis,
    prim: &[Vec<Estimate>],
    numerators: Vec<ComplexPoly>,
    g: usize,
) -> PeriodMatrix {
    let mut a = DMatrix::zeros(g, g);
    let mut b = DMatrix::zeros(g, g);
    let mut a_err = DMatrix::zeros(g, g);
    let mut b_err = DMatrix::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            let ea = cycle_period(prim, &basis.a_cycles[i], j);
            let eb = cycle_period(prim, &basis.b_cycles[i], j);
            a[(i, j)] = ea.value;
            a_err[(i, j)] = ea.error;
            b[(i, j)] = eb.value;
            b_err[(i, j)] = eb.error;
        }
    }
    let theta_a = (0..g).map(|i| cycle_period(prim, &basis.a_cycles[i], g)).collect();
    let theta_b = (0..g).map(|i| cycle_period(prim, &basis.b_cycles[i], g)).collect();
    let condition = condition_number(&a);
    PeriodMatrix {
        a,
        b,
        a_err,
        b_err,
        theta_a,
        theta_b,
        numerators,
        condition,
    }
}

/// Forms `omega_j` with `int_{a_i} omega_j = delta_ij`.
#[derive(Debug, Clone)]
pub struct DifferentialBasis {
    pub numerators: Vec<ComplexPoly>,
    /// Max deviation of the re-integrated a-periods from the identity.
    pub residual: f64,
}

/// Coefficients `X = A^{-1}`; column `j` gives `omega_j = sum_k X[k][j] p_k`.
pub fn dual_coefficients(pm: &PeriodMatrix) -> Result<DMatrix<Complex64>> {
    if !(pm.condition <= CONDITION_CAP) {
        return Err(Error::IllConditioned(pm.condition));
    }
    let g = pm.a.nrows();
    pm.a
        .clone()
        .lu()
        .solve(&DMatrix::identity(g, g))
        .ok_or(Error::IllConditioned(f64::INFINITY))
}

fn combine(numerators: &[ComplexPoly], x: &DMatrix<Complex64>) -> Vec<ComplexPoly> {
    let g = numerators.len();
    (0..g)
        .map(|j| {
            let mut p = ComplexPoly::zero();
            for (k, num) in numerators.iter().enumerate() {
                p = &p + &num.scale(x[(k, j)]);
            }
            p
        })
        .collect()
}

fn dual_diffs(numerators: &[ComplexPoly]) -> Vec<Differential> {
    numerators
        .iter()
        .map(|p| Differential::Form(MeromorphicForm { numerator: p.clone() }))
        .collect()
}

/// Dual-normalized forms, with the residual from re-integrating them over the
/// a-cycles.
pub fn dual_basis(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    pm: &PeriodMatrix,
    cfg: &QuadConfig,
) -> Result<DifferentialBasis> {
    let x = dual_coefficients(pm)?;
    let numerators = combine(&pm.numerators, &x);
    let diffs = dual_diffs(&numerators);
    let mut residual: f64 = 0.0;
    let prims: Vec<usize> = loop_primitives(basis);
    let prim = periods_on(c, basis, &prims, &diffs, cfg)?;
    for (i, cyc) in basis.a_cycles.iter().enumerate() {
        for j in 0..numerators.len() {
            let v = cycle_period(&prim, cyc, j).value;
            let want = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((v - want).norm());
        }
    }
    Ok(DifferentialBasis {
        numerators,
        residual,
    })
}

fn loop_primitives(basis: &CycleBasis) -> Vec<usize> {
    let mut v: Vec<usize> = basis
        .a_cycles
        .iter()
        .flat_map(|c| c.terms.iter().map(|t| t.0))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

fn arc_primitives(basis: &CycleBasis) -> Vec<usize> {
    let mut v: Vec<usize> = basis
        .b_cycles
        .iter()
        .flat_map(|c| c.terms.iter().map(|t| t.0))
        .collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Integrates over the listed primitives only; the others are left empty.
fn periods_on(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    which: &[usize],
    diffs: &[Differential],
    cfg: &QuadConfig,
) -> Result<Vec<Vec<Estimate>>> {
    let mut out = vec![Vec::new(); basis.primitives.len()];
    for &i in which {
        let p = &basis.primitives[i];
        let m = p.multiplier();
        out[i] = integrate_many(c, &p.lifted, diffs, cfg)?
            .into_iter()
            .map(|e| Estimate {
                value: e.value * m,
                error: e.error * m,
            })
            .collect();
    }
    Ok(out)
}

/// a-periods of the form basis alone; usable on nodal curves whose
/// b-cycles run into a node.
pub fn a_periods(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    cfg: &QuadConfig,
) -> Result<(DMatrix<Complex64>, Vec<ComplexPoly>)> {
    let numerators = basis_numerators(c, basis);
    let g = numerators.len();
    let diffs = dual_diffs(&numerators);
    let prim = periods_on(c, basis, &loop_primitives(basis), &diffs, cfg)?;
    let a = DMatrix::from_fn(g, g, |i, j| cycle_period(&prim, &basis.a_cycles[i], j).value);
    Ok((a, numerators))
}

/// Numerators of the a-normalized forms from an a-period matrix.
pub fn normalize(a: &DMatrix<Complex64>, numerators: &[ComplexPoly]) -> Result<Vec<ComplexPoly>> {
    let cond = condition_number(a);
    if !(cond <= CONDITION_CAP) {
        return Err(Error::IllConditioned(cond));
    }
    let g = a.nrows();
    let x = a
        .clone()
        .lu()
        .solve(&DMatrix::identity(g, g))
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    Ok(combine(numerators, &x))
}

/// Normalized period matrix `tau_ij = int_{b_j} omega_i`.
#[derive(Debug, Clone)]
pub struct TauMatrix {
    pub tau: DMatrix<Complex64>,
    pub errors: DMatrix<f64>,
    pub symmetry_defect: f64,
    /// Smallest eigenvalue of the symmetrized `Im tau`.
    pub min_imag_eigenvalue: f64,
}

impl TauMatrix {
    fn from_parts(tau: DMatrix<Complex64>, errors: DMatrix<f64>) -> Self {
        let g = tau.nrows();
        let mut defect: f64 = 0.0;
        for i in 0..g {
            for j in 0..g {
                defect = defect.max((tau[(i, j)] - tau[(j, i)]).norm());
            }
        }
        let im = imag_sym(&tau);
        let min_imag_eigenvalue = im
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        TauMatrix {
            tau,
            errors,
            symmetry_defect: defect,
            min_imag_eigenvalue,
        }
    }

    /// Symmetrized imaginary part.
    pub fn imag(&self) -> DMatrix<f64> {
        imag_sym(&self.tau)
    }
}

fn imag_sym(tau: &DMatrix<Complex64>) -> DMatrix<f64> {
    let g = tau.nrows();
    DMatrix::from_fn(g, g, |i, j| 0.5 * (tau[(i, j)].im + tau[(j, i)].im))
}

pub fn tau(
    c: &HyperellipticCurve,
    basis: &CycleBasis,
    dual: &DifferentialBasis,
    cfg: &QuadConfig,
) -> Result<TauMatrix> {
    let diffs = dual_diffs(&dual.numerators);
    let prim = periods_on(c, basis, &arc_primitives(basis), &diffs, cfg)?;
    Ok(tau_from(basis, &prim, dual.numerators.len()))
}

fn tau_from(basis: &CycleBasis, prim: &[Vec<Estimate>], g: usize) -> TauMatrix {
    let mut t = DMatrix::zeros(g, g);
    let mut e = DMatrix::zeros(g, g);
    for i in 0..g {
        for j in 0..g {
            let est = cycle_period(prim, &basis.b_cycles[j], i);
            t[(i, j)] = est.value;
            e[(i, j)] = est.error;
        }
    }
    TauMatrix::from_parts(t, e)
}

/// Everything computed from one curve and basis.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub periods: PeriodMatrix,
    pub dual: DifferentialBasis,
    pub tau: TauMatrix,
}

impl Analysis {
    /// Largest quadrature error estimate over all reported quantities.
    pub fn max_error(&self) -> f64 {
        let pm = &self.periods;
        pm.a_err
            .iter()
            .chain(pm.b_err.iter())
            .chain(self.tau.errors.iter())
            .cloned()
            .chain(pm.theta_a.iter().chain(&pm.theta_b).map(|e| e.error))
            .fold(0.0, f64::max)
    }
}

/// Periods, dual basis and `tau` in two quadrature passes.
pub fn analyze(c: &HyperellipticCurve, basis: &CycleBasis, cfg: &QuadConfig) -> Result<Analysis> {
    let periods = period_matrices(c, basis, cfg)?;
    let x = dual_coefficients(&periods)?;
    let numerators = combine(&periods.numerators, &x);
    let diffs = dual_diffs(&numerators);
    let prim = primitive_periods(c, basis, &diffs, cfg)?;
    let g = numerators.len();
    let mut residual: f64 = 0.0;
    for (i, cyc) in basis.a_cycles.iter().enumerate() {
        for j in 0..g {
            let v = cycle_period(&prim, cyc, j).value;
            let want = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((v - want).norm());
        }
    }
    let tau = tau_from(basis, &prim, g);
    Ok(Analysis {
        periods,
        dual: DifferentialBasis {
            numerators,
            residual,
        },
        tau,
    })
}

/// `(1 / 2 pi i) * contour integral` of `form` around `point` on the sheet
/// where `y = sheet * y_principal` at the circle's start. Circles of radius
/// half and a quarter of the distance to the nearest other root are combined
/// by Richardson extrapolation.
pub fn residue(
    c: &HyperellipticCurve,
    form: &MeromorphicForm,
    point: Complex64,
    sheet: i8,
    cfg: &QuadConfig,
) -> Result<Complex64> {
    let near = c
        .roots()
        .iter()
        .map(|r| (r.value - point).norm())
        .filter(|&d| d > 1e-12 * c.diameter())
        .fold(f64::INFINITY, f64::min);
    let rho = 0.5 * near;
    let diff = Differential::Form(form.clone());
    let around = |radius: f64| -> Result<Complex64> {
        let path = Path::circle(point, radius, crate::contour::LOOP_START_ANGLE);
        let y0 = c.y_principal(path.start()) * sheet as f64;
        let lifted = LiftedPath::new(c, &path, 0, y0)?;
        let v = integrate_form(c, &lifted, &diff, cfg)?.value;
        Ok(v / Complex64::new(0.0, 2.0 * std::f64::consts::PI))
    };
    let r1 = around(rho)?;
    let r2 = around(0.5 * rho)?;
    Ok((4.0 * r2 - r1) / 3.0)
}
