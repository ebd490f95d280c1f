//! One function per subcommand. Each returns a report whose verdicts decide
//! the exit code.

use std::collections::BTreeMap;

use num_complex::Complex64;
use periodlab::contour::{build_cycle_basis, BasisMode, PairingPlan, PlanPair};
use periodlab::family::{Family, FamilyPair, Param};
use periodlab::periods::QuadConfig;
use periodlab::scans::{degeneration_scan, jacobian_check, monodromy, DegenerationReport, LogFit};
use periodlab::skgeom::{radial_scan, sample, Sample};
use periodlab::surface::HyperellipticCurve;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{bundled, FamilyConfig, Kind};
use crate::report::{cjson, complex_columns, push_complex, Report, Table};
use crate::CliError;

pub const SYMMETRY_BOUND: f64 = 1e-6;
pub const DUAL_RESIDUAL_BOUND: f64 = 1e-8;
pub const AB_DRIFT_BOUND: f64 = 0.02;
pub const FAR_DRIFT_BOUND: f64 = 0.05;
pub const JACOBIAN_BOUND: f64 = 1e-4;
pub const GENUS_ONE_JACOBIAN_BOUND: f64 = 1e-6;
pub const MONODROMY_DEFECT_BOUND: f64 = 1e-6;
pub const A_RETURN_BOUND: f64 = 1e-8;
pub const RADIAL_BOUND: f64 = 1e-6;
pub const EXPONENT_BOUND: f64 = 1e-3;
pub const CAUCHY_BOUND: f64 = 1e-3;

/// Runtime options shared by all subcommands.
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub tol: Option<f64>,
    pub seed: u64,
}

fn quad(cfg: &FamilyConfig, opts: &Options) -> Result<QuadConfig, CliError> {
    let mut q = cfg.quad_config()?;
    if let Some(t) = opts.tol {
        q.rel_tol = t;
        q.validate()
            .map_err(|e| CliError::Config(format!("flag `--tol`: {e}")))?;
    }
    Ok(q)
}

fn tau_columns(g: usize, prefix: &str) -> Vec<(usize, usize, String)> {
    let mut out = Vec::new();
    for i in 0..g {
        for j in i..g {
            out.push((i, j, format!("{prefix}_{}{}", i + 1, j + 1)));
        }
    }
    out
}

fn riemann_verdicts(report: &mut Report, label: &str, s: &Sample) {
    let t = &s.analysis.tau;
    report.verdict(
        &format!("{label}symmetry"),
        t.symmetry_defect <= SYMMETRY_BOUND,
        format!("symmetry defect {:.3e} (bound {SYMMETRY_BOUND:e})", t.symmetry_defect),
    );
    report.verdict(
        &format!("{label}positive_imaginary_part"),
        t.min_imag_eigenvalue > 0.0,
        format!("min eigenvalue of Im tau {:.6e}", t.min_imag_eigenvalue),
    );
    report.verdict(
        &format!("{label}dual_residual"),
        s.analysis.dual.residual <= DUAL_RESIDUAL_BOUND,
        format!("residual {:.3e} (bound {DUAL_RESIDUAL_BOUND:e})", s.analysis.dual.residual),
    );
}

fn sample_json(s: &Sample) -> Value {
    let t = &s.analysis.tau;
    let g = t.tau.nrows();
    let tau: Vec<Vec<Value>> = (0..g)
        .map(|i| (0..g).map(|j| cjson(t.tau[(i, j)])).collect())
        .collect();
    json!({
        "genus": g,
        "tau": tau,
        "z": s.coords.z.iter().map(|&v| cjson(v)).collect::<Vec<_>>(),
        "w": s.coords.w.iter().map(|&v| cjson(v)).collect::<Vec<_>>(),
        "vanishing": s.metric.vanishing,
        "potential": s.potential.k,
        "potential_gradient": s.gradient.iter().map(|&v| cjson(v)).collect::<Vec<_>>(),
        "condition": s.analysis.periods.condition,
        "max_error": s.analysis.max_error(),
        "symmetry_defect": t.symmetry_defect,
        "min_imag_eigenvalue": t.min_imag_eigenvalue,
        "dual_residual": s.analysis.dual.residual,
        "branch_tag": format!("{:016x}", s.coords.branch_tag),
    })
}

/// Curve and basis for a raw config: roots of `Q` in the order the root
/// finder reports them, paired consecutively.
fn raw_point(cfg: &FamilyConfig) -> Result<(HyperellipticCurve, periodlab::contour::CycleBasis), CliError> {
    let curve = HyperellipticCurve::from_poly(&cfg.polynomial(), 1e-12)?;
    let n = curve.roots().len();
    if n % 2 != 0 || !curve.is_smooth() {
        return Err(CliError::Config(
            "field `coefficients`: raw curves must have simple roots".into(),
        ));
    }
    let plan = PairingPlan {
        pairs: (0..n / 2)
            .map(|k| PlanPair {
                roots: vec![2 * k, 2 * k + 1],
                collision: false,
                vanishing: false,
            })
            .collect(),
        mode: BasisMode::LoopChain,
    };
    let basis = build_cycle_basis(&curve, &plan)?;
    Ok((curve, basis))
}

/// Period matrix, coordinates and potential at the base point.
pub fn periods(cfg: &FamilyConfig, opts: &Options) -> Result<Report, CliError> {
    let q = quad(cfg, opts)?;
    let (curve, basis) = if cfg.kind == Kind::Raw {
        raw_point(cfg)?
    } else {
        let t = cfg.family()?.start()?;
        (t.curve, t.basis)
    };
    let s = sample(&curve, &basis, &q)?;
    let mut report = Report::new("periods", Some(cfg.clone()));
    let g = basis.size();

    let mut tau = Table::new("tau", vec!["i".into(), "j".into()]);
    complex_columns(&mut tau.columns, "tau");
    tau.columns.push("err_est".into());
    for i in 0..g {
        for j in 0..g {
            let mut row = vec![(i + 1) as f64, (j + 1) as f64];
            push_complex(&mut row, s.analysis.tau.tau[(i, j)]);
            row.push(s.analysis.tau.errors[(i, j)]);
            tau.push(row);
        }
    }
    let mut coords = Table::new("coords", vec!["index".into(), "vanishing".into()]);
    complex_columns(&mut coords.columns, "z");
    complex_columns(&mut coords.columns, "w");
    coords.columns.extend(["z_err".into(), "w_err".into()]);
    for k in 0..g {
        let mut row = vec![(k + 1) as f64, if basis.vanishing[k] { 1.0 } else { 0.0 }];
        push_complex(&mut row, s.coords.z[k]);
        push_complex(&mut row, s.coords.w[k]);
        row.extend([s.coords.z_err[k], s.coords.w_err[k]]);
        coords.push(row);
    }
    report.tables.extend([tau, coords]);
    report.result("sample", sample_json(&s));
    report.result(
        "roots",
        json!(curve.root_values().iter().map(|&v| cjson(v)).collect::<Vec<_>>()),
    );
    riemann_verdicts(&mut report, "", &s);
    Ok(report)
}

fn fit_json(f: &periodlab::Result<LogFit>) -> Value {
    match f {
        Ok(f) => json!({
            "slope": f.slope,
            "intercept": f.intercept,
            "r2": f.r2,
            "t_stat": f.t_stat,
            "divergent": f.divergent,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Expected behaviour of gram entry `(i, j)` given the vanishing tags and
/// the way a-cycles are assembled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expect {
    Divergent { positive: bool },
    Bounded { drift: f64 },
}

pub fn expected_pattern(mode: BasisMode, vanishing: &[usize], i: usize, j: usize) -> Expect {
    let (vi, vj) = (vanishing.contains(&i), vanishing.contains(&j));
    if !(vi && vj) {
        return Expect::Bounded { drift: AB_DRIFT_BOUND };
    }
    let d = i.abs_diff(j);
    match (mode, d) {
        (_, 0) => Expect::Divergent { positive: true },
        (BasisMode::SummedLoops, 1) => Expect::Divergent { positive: false },
        _ => Expect::Bounded { drift: FAR_DRIFT_BOUND },
    }
}

fn check_pattern(report: &mut Report, label: &str, mode: BasisMode, scan: &DegenerationReport) {
    let g = scan.rows[0].gram.nrows();
    let mut fits = serde_json::Map::new();
    for i in 0..g {
        for j in i..g {
            let fz = scan.fit_entry(i, j);
            let fe = scan.fit_entry_eps(i, j);
            let drift = scan.drift(i, j);
            let name = format!("imtau_{}{}", i + 1, j + 1);
            fits.insert(
                name.clone(),
                json!({
                    "vs_log_z_van": fit_json(&fz),
                    "vs_log_eps": fit_json(&fe),
                    "drift": drift,
                }),
            );
            match expected_pattern(mode, &scan.vanishing, i, j) {
                Expect::Divergent { positive } => {
                    let (ok, detail) = match &fz {
                        Ok(f) => (
                            f.divergent && (f.slope > 0.0) == positive,
                            format!("slope {:.6} r2 {:.6} t {:.3e}", f.slope, f.r2, f.t_stat),
                        ),
                        Err(e) => (false, e.to_string()),
                    };
                    let sign = if positive { "positive" } else { "negative" };
                    report.verdict(&format!("{label}{name}_divergent_{sign}"), ok, detail);
                }
                Expect::Bounded { drift: bound } => report.verdict(
                    &format!("{label}{name}_bounded"),
                    drift < bound,
                    format!("drift {drift:.3e} (bound {bound})"),
                ),
            }
        }
    }
    report.result(&format!("{label}fits"), Value::Object(fits));
    let worst = |f: fn(&periodlab::scans::ScanRow) -> f64| {
        scan.rows.iter().map(f).fold(0.0, f64::max)
    };
    let min_eig = scan.rows.iter().map(|r| r.min_eig).fold(f64::INFINITY, f64::min);
    report.verdict(
        &format!("{label}riemann_relations"),
        scan.all_riemann_ok(),
        format!(
            "max symmetry defect {:.3e}, min eigenvalue {:.6e}, max dual residual {:.3e}",
            worst(|r| r.symmetry_defect),
            min_eig,
            worst(|r| r.dual_residual)
        ),
    );
}

fn run_scan(cfg: &FamilyConfig, q: &QuadConfig, report: &mut Report) -> Result<(Family, DegenerationReport), CliError> {
    let family = cfg.family()?;
    let ladder = cfg
        .ladder()
        .ok_or_else(|| CliError::Config("field `ladder`: required by this command".into()))?;
    let scan = degeneration_scan(&family, &ladder, q)?;
    for (eps, why) in &scan.aborted {
        report.aborted.push(format!("eps = {eps:e}: {why}"));
    }
    if scan.rows.is_empty() {
        return Err(CliError::Numeric(periodlab::Error::InsufficientRows { need: 1, got: 0 }));
    }
    Ok((family, scan))
}

/// Ladder scan of the metric towards the stratum.
pub fn degenerate(cfg: &FamilyConfig, opts: &Options) -> Result<Report, CliError> {
    let q = quad(cfg, opts)?;
    let mut report = Report::new("degenerate", Some(cfg.clone()));
    let (family, scan) = run_scan(cfg, &q, &mut report)?;
    let g = scan.rows[0].gram.nrows();
    let nv = scan.vanishing.len();

    let mut cols = vec!["eps_abs".to_string()];
    if nv == 1 {
        cols.push("z_van_abs".into());
    } else {
        cols.extend((1..=nv).map(|k| format!("z_van_abs_{k}")));
    }
    let entries = tau_columns(g, "imtau");
    cols.extend(entries.iter().map(|(_, _, n)| n.clone()));
    cols.push("err_est".into());
    let mut rows = Table::new("rows", cols);
    for r in &scan.rows {
        let mut row = vec![r.eps.norm()];
        row.extend(&r.z_van_abs);
        row.extend(entries.iter().map(|&(i, j, _)| r.gram[(i, j)]));
        row.push(r.err_est);
        rows.push(row);
    }
    report.tables.push(rows);
    report.result("tangential", json!(scan.tangential));
    report.result("vanishing", json!(scan.vanishing));
    check_pattern(&mut report, "", family.mode, &scan);
    Ok(report)
}

/// Shifts of the b-periods after one, two and zero loops around the stratum.
pub fn monodromy_cmd(cfg: &FamilyConfig, opts: &Options) -> Result<Report, CliError> {
    let q = quad(cfg, opts)?;
    let spec = cfg
        .monodromy
        .clone()
        .ok_or_else(|| CliError::Config("field `monodromy`: required by this command".into()))?;
    let family = cfg.family()?;
    let mut report = Report::new("monodromy", Some(cfg.clone()));
    let runs = [0, spec.turns, 2 * spec.turns]
        .iter()
        .map(|&t| monodromy(&family, spec.eps, t, spec.steps, &q).map(|m| (t, m)))
        .collect::<periodlab::Result<Vec<_>>>()?;

    let mut table = Table::new(
        "monodromy",
        ["turns", "index", "shift", "rounding_defect", "a_return"]
            .map(String::from)
            .to_vec(),
    );
    let mut shifts = BTreeMap::new();
    for (t, m) in &runs {
        for k in 0..m.shifts.len() {
            table.push(vec![*t as f64, (k + 1) as f64, m.shifts[k], m.rounding_defect[k], m.a_return]);
        }
        shifts.insert(t.to_string(), json!(m.integer_shifts()));
    }
    report.tables.push(table);
    report.result("integer_shifts", json!(shifts));
    report.result("vanishing", json!(runs[0].1.vanishing));

    let defect = runs
        .iter()
        .flat_map(|(_, m)| m.rounding_defect.iter().cloned())
        .fold(0.0, f64::max);
    report.verdict(
        "integer_shift",
        defect <= MONODROMY_DEFECT_BOUND,
        format!("max rounding defect {defect:.3e} (bound {MONODROMY_DEFECT_BOUND:e})"),
    );
    let a_return = runs.iter().map(|(_, m)| m.a_return).fold(0.0, f64::max);
    report.verdict(
        "a_periods_return",
        a_return <= A_RETURN_BOUND,
        format!("max a-period change {a_return:.3e} (bound {A_RETURN_BOUND:e})"),
    );
    let zero = runs[0].1.integer_shifts();
    report.verdict(
        "trivial_loop",
        zero.iter().all(|&n| n == 0),
        format!("shifts {zero:?}"),
    );
    let one = runs[1].1.integer_shifts();
    let two = runs[2].1.integer_shifts();
    report.verdict(
        "composition",
        one.iter().zip(&two).all(|(a, b)| 2 * a == *b),
        format!("single {one:?}, double {two:?}"),
    );
    Ok(report)
}

/// Metric on the line `l * Q`.
pub fn radial(cfg: &FamilyConfig, opts: &Options) -> Result<Report, CliError> {
    let q = quad(cfg, opts)?;
    let grid = cfg
        .radial_grid()
        .ok_or_else(|| CliError::Config("field `radial`: required by this command".into()))?;
    let family = cfg.family()?;
    let r = radial_scan(&family, &grid, &q)?;
    let mut report = Report::new("radial", Some(cfg.clone()));
    let g = r.exponents.len();

    let mut cols = vec!["abs_l".to_string()];
    complex_columns(&mut cols, "l");
    cols.push("potential".into());
    let entries = tau_columns(g, "tau");
    for (_, _, n) in &entries {
        complex_columns(&mut cols, n);
    }
    for k in 1..=g {
        complex_columns(&mut cols, &format!("z_{k}"));
    }
    let mut table = Table::new("radial", cols);
    for row in &r.rows {
        let mut v = vec![row.l.norm()];
        push_complex(&mut v, row.l);
        v.push(row.potential);
        for &(i, j, _) in &entries {
            push_complex(&mut v, row.tau[(i, j)]);
        }
        for &z in &row.z {
            push_complex(&mut v, z);
        }
        table.push(v);
    }
    report.tables.push(table);
    report.result("c0", json!(r.c0));
    report.result("c0_metric", json!(r.c0_metric));
    report.result("cone_angle", json!(r.cone_angle));
    report.result("exponents", json!(r.exponents));
    report.result("tau_dev", json!(r.tau_dev));
    report.result("potential_ratio_dev", json!(r.potential_ratio_dev));

    report.verdict(
        "tau_constant",
        r.tau_dev <= RADIAL_BOUND,
        format!("max |tau(l) - tau(1)| {:.3e} (bound {RADIAL_BOUND:e})", r.tau_dev),
    );
    let worst = r.exponents.iter().map(|e| (e - 0.5).abs()).fold(0.0, f64::max);
    report.verdict(
        "exponent_one_half",
        worst <= EXPONENT_BOUND,
        format!("exponents {:?}", r.exponents),
    );
    report.verdict(
        "potential_homogeneous",
        r.potential_ratio_dev <= RADIAL_BOUND,
        format!("max relative deviation of K(l)/|l| {:.3e}", r.potential_ratio_dev),
    );
    Ok(report)
}

/// Kähler potential and its gradient along the ladder, with a
/// finite-difference check of the gradient at the base point.
pub fn potential_cmd(cfg: &FamilyConfig, opts: &Options) -> Result<Report, CliError> {
    let q = quad(cfg, opts)?;
    let mut report = Report::new("potential", Some(cfg.clone()));
    let (family, scan) = run_scan(cfg, &q, &mut report)?;
    let g = scan.rows[0].gram.nrows();

    let mut cols = ["eps_abs", "potential", "potential_imag"].map(String::from).to_vec();
    for k in 1..=g {
        complex_columns(&mut cols, &format!("grad_{k}"));
    }
    cols.push("transverse_product".into());
    let mut table = Table::new("potential", cols);
    let v0 = scan.vanishing[0];
    let product = |r: &periodlab::scans::ScanRow| (r.tau[(v0, v0)] * r.coords.z[v0].conj()).norm();
    for r in &scan.rows {
        let mut row = vec![r.eps.norm(), r.potential, r.potential_imag];
        for &d in &r.gradient {
            push_complex(&mut row, d);
        }
        row.push(product(r));
        table.push(row);
    }
    report.tables.push(table);

    let imag = scan
        .rows
        .iter()
        .map(|r| r.potential_imag.abs() / r.potential.abs().max(1.0))
        .fold(0.0, f64::max);
    report.verdict(
        "potential_real",
        imag <= 1e-10,
        format!("max relative imaginary residue {imag:.3e}"),
    );

    let products: Vec<f64> = scan.rows.iter().map(product).collect();
    let decreasing = products.windows(2).all(|w| w[1] < w[0]);
    let c = scan
        .rows
        .iter()
        .map(|r| r.tau[(v0, v0)].norm() / -r.z_van_abs[0].ln())
        .fold(0.0, f64::max);
    report.result("transverse_constant", json!(c));
    report.verdict(
        "transverse_product_vanishes",
        decreasing,
        format!("|tau_vv conj(z_van)| from {:.3e} to {:.3e}", products[0], products[products.len() - 1]),
    );

    let last = scan.rows.last().expect("rows").eps.norm();
    let tail: Vec<&periodlab::scans::ScanRow> = scan
        .rows
        .iter()
        .filter(|r| r.eps.norm() <= 10.0 * last * (1.0 + 1e-12))
        .collect();
    let mut cauchy: f64 = 0.0;
    for w in tail.windows(2) {
        for &k in &scan.tangential {
            cauchy = cauchy.max((w[1].gradient[k] - w[0].gradient[k]).norm());
        }
    }
    report.result("tangential_cauchy", json!(cauchy));
    report.verdict(
        "tangential_gradient_converges",
        cauchy < CAUCHY_BOUND,
        format!("max Cauchy difference over the last decade {cauchy:.3e} (bound {CAUCHY_BOUND:e})"),
    );

    let start = family.start()?;
    let jac = jacobian_check(&start.curve, &start.basis, &q)?;
    report.result("gradient_fd_dev", json!(jac.gradient_rel_dev));
    report.verdict(
        "gradient_matches_finite_differences",
        jac.gradient_rel_dev <= JACOBIAN_BOUND,
        format!("relative deviation {:.3e} at eps0", jac.gradient_rel_dev),
    );
    Ok(report)
}

/// `genus + 1` spectator pairs near `2.5 k` with random half-separation and
/// direction.
pub fn random_family(rng: &mut impl Rng, genus: usize) -> Family {
    let pairs = (0..=genus)
        .map(|k| {
            let center = Complex64::new(
                2.5 * k as f64 + rng.random_range(-0.3..0.3),
                rng.random_range(-0.3..0.3),
            );
            let half = Complex64::from_polar(rng.random_range(0.2..0.6), rng.random_range(-0.6..0.6));
            FamilyPair::Spectator {
                roots: [center + half, center - half],
            }
        })
        .collect();
    let lead = Complex64::from_polar(rng.random_range(0.5..2.0), rng.random_range(-1.0..1.0));
    Family {
        pairs,
        lead,
        mode: BasisMode::LoopChain,
        base: Param::eps(0.1),
    }
}

fn merge(into: &mut Report, prefix: &str, from: Report) {
    for v in from.verdicts {
        into.verdict(&format!("{prefix}/{}", v.name), v.pass, v.detail);
    }
    for a in from.aborted {
        into.aborted.push(format!("{prefix}: {a}"));
    }
}

/// The invariant suite over the bundled configurations plus randomized
/// Jacobian checks.
pub fn check(opts: &Options) -> Result<Report, CliError> {
    let mut report = Report::new("check", None);
    let f1 = bundled("f1");
    let f3 = bundled("f3");
    let r1 = bundled("r1");
    merge(&mut report, "f1/periods", periods(&f1, opts)?);
    merge(&mut report, "f1/degenerate", degenerate(&f1, opts)?);
    merge(&mut report, "f1/monodromy", monodromy_cmd(&f1, opts)?);
    merge(&mut report, "f1/potential", potential_cmd(&f1, opts)?);
    merge(&mut report, "f3/periods", periods(&f3, opts)?);
    merge(&mut report, "f3/degenerate", degenerate(&f3, opts)?);
    merge(&mut report, "r1/radial", radial(&r1, opts)?);

    let q = quad(&f1, opts)?;
    let start = f1.family()?.start()?;
    let jac = jacobian_check(&start.curve, &start.basis, &q)?;
    report.verdict(
        "f1/jacobian",
        jac.max_rel_dev <= JACOBIAN_BOUND,
        format!("relative deviation {:.3e}", jac.max_rel_dev),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for (genus, bound) in [(1, GENUS_ONE_JACOBIAN_BOUND), (2, JACOBIAN_BOUND)] {
        let fam = random_family(&mut rng, genus);
        let t = fam.start()?;
        let s = sample(&t.curve, &t.basis, &q)?;
        riemann_verdicts(&mut report, &format!("random_genus_{genus}/"), &s);
        let jac = jacobian_check(&t.curve, &t.basis, &q)?;
        report.verdict(
            &format!("random_genus_{genus}/jacobian"),
            jac.max_rel_dev <= bound,
            format!("relative deviation {:.3e} (bound {bound:e})", jac.max_rel_dev),
        );
    }
    report.result("seed", json!(opts.seed));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summed_loop_pattern_is_tridiagonal() {
        let v = [0, 1, 2];
        let m = BasisMode::SummedLoops;
        assert_eq!(expected_pattern(m, &v, 1, 1), Expect::Divergent { positive: true });
        assert_eq!(expected_pattern(m, &v, 0, 1), Expect::Divergent { positive: false });
        assert_eq!(expected_pattern(m, &v, 0, 2), Expect::Bounded { drift: FAR_DRIFT_BOUND });
    }

    #[test]
    fn single_collision_pattern() {
        let v = [1];
        let m = BasisMode::LoopChain;
        assert_eq!(expected_pattern(m, &v, 1, 1), Expect::Divergent { positive: true });
        assert_eq!(expected_pattern(m, &v, 0, 1), Expect::Bounded { drift: AB_DRIFT_BOUND });
        assert_eq!(expected_pattern(m, &v, 0, 0), Expect::Bounded { drift: AB_DRIFT_BOUND });
    }

    #[test]
    fn random_family_is_reproducible() {
        let a = random_family(&mut ChaCha8Rng::seed_from_u64(7), 2);
        let b = random_family(&mut ChaCha8Rng::seed_from_u64(7), 2);
        assert_eq!(a, b);
        assert!(a.start().is_ok());
    }

    #[test]
    fn tol_flag_is_validated() {
        let opts = Options {
            tol: Some(1e-20),
            seed: 0,
        };
        let err = quad(&bundled("f1"), &opts).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
    }
}
