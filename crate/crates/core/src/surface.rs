//! The planar double cover `y^2 = Q(z)`.
//!
//! Square roots are never continued point by point. A path is cut into
//! sub-pieces small enough that every factor `sqrt(z - r)` has an analytic
//! branch on the whole sub-piece, and a single sign per sub-piece is fixed by
//! matching values at the junctions. Sub-pieces that end on a simple root are
//! integrated in the local parameter `u` with `z - r = (z_o - r) u^2`, so the
//! square root there is exactly linear in `u`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{Path, Piece};
use crate::error::{Error, Result};
use crate::polyfield::{self, ComplexPoly, Root, RootSet};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Subdivision depth cap for sheet tracking.
pub const MAX_TRACK_DEPTH: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Odd,
    Even,
}

/// Roots lying within the clustering radius of each other.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub center: Complex64,
    pub members: Vec<Root>,
    pub parity: Parity,
}

impl Cluster {
    pub fn multiplicity(&self) -> usize {
        self.members.iter().map(|r| r.multiplicity).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BranchData {
    pub clusters: Vec<Cluster>,
    pub r_odd: usize,
}

/// Groups roots by single linkage at distance `cluster_tol` and records the
/// parity of each cluster's total multiplicity.
pub fn classify_branch_points(rs: &RootSet, cluster_tol: f64) -> Result<BranchData> {
    let n = rs.roots.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (rs.roots[i].value - rs.roots[j].value).norm() <= cluster_tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[b.max(a)] = a.min(b);
                }
            }
        }
    }
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut owner: Vec<Option<usize>> = vec![None; n];
    for i in 0..n {
        let root = find(&mut label, i);
        let k = match owner[root] {
            Some(k) => k,
            None => {
                clusters.push(Cluster {
                    center: Complex64::new(0.0, 0.0),
                    members: Vec::new(),
                    parity: Parity::Even,
                });
                owner[root] = Some(clusters.len() - 1);
                clusters.len() - 1
            }
        };
        clusters[k].members.push(rs.roots[i]);
    }
    for cl in clusters.iter_mut() {
        let m = cl.multiplicity();
        cl.center = cl
            .members
            .iter()
            .map(|r| r.value * r.multiplicity as f64)
            .sum::<Complex64>()
            / m as f64;
        cl.parity = if m % 2 == 1 { Parity::Odd } else { Parity::Even };
    }
    let r_odd = clusters.iter().filter(|c| c.parity == Parity::Odd).count();
    if r_odd % 2 == 1 {
        return Err(Error::OddTotalParity(r_odd));
    }
    Ok(BranchData { clusters, r_odd })
}

/// Genus `r_odd / 2 - 1` of the planar double cover.
pub fn genus(b: &BranchData) -> Result<usize> {
    if b.r_odd == 0 {
        return Err(Error::DegenerateCover);
    }
    Ok(b.r_odd / 2 - 1)
}

/// The form `p(z) dz / (2y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeromorphicForm {
    pub numerator: ComplexPoly,
}

/// Pulls a quadratic differential `f(z) dz^2` back to the anti-invariant form
/// `f(z) dz / (2y)`.
pub fn pullback_quadratic(f: &ComplexPoly) -> MeromorphicForm {
    MeromorphicForm {
        numerator: f.clone(),
    }
}

/// Something that can be integrated along a lifted path.
#[derive(Debug, Clone, PartialEq)]
pub enum Differential {
    /// The tautological form `y dz`.
    Theta,
    Form(MeromorphicForm),
}

impl Differential {
    pub fn monomial(k: usize) -> Self {
        Differential::Form(MeromorphicForm {
            numerator: ComplexPoly::monomial(k),
        })
    }
}

/// `y^2 = Q(z)` with `Q = lead * prod (z - r)^m` of even degree.
#[derive(Debug, Clone)]
pub struct HyperellipticCurve {
    q: ComplexPoly,
    lead: Complex64,
    sqrt_lead: Complex64,
    roots: Vec<Root>,
    branch: BranchData,
    genus: usize,
    odd: Vec<Complex64>,
    odd_index: Vec<Option<usize>>,
    even_part: ComplexPoly,
    diameter: f64,
}

impl HyperellipticCurve {
    /// Builds the curve from exactly known roots; coincident roots must be
    /// given once with their multiplicity.
    pub fn from_roots(lead: Complex64, roots: Vec<Root>) -> Result<Self> {
        let deg: usize = roots.iter().map(|r| r.multiplicity).sum();
        if deg % 2 == 1 {
            return Err(Error::OddDegree(deg));
        }
        let rs = RootSet {
            roots: roots.clone(),
            residual: 0.0,
        };
        let branch = classify_branch_points(&rs, 0.0)?;
        let genus = genus(&branch)?;
        let q = rs.expand(lead);
        let mut odd = Vec::new();
        let mut odd_index = Vec::with_capacity(roots.len());
        let mut even_roots = Vec::new();
        for r in &roots {
            if r.multiplicity % 2 == 1 {
                odd_index.push(Some(odd.len()));
                odd.push(r.value);
            } else {
                odd_index.push(None);
            }
            even_roots.extend(std::iter::repeat_n(r.value, r.multiplicity / 2));
        }
        let even_part = ComplexPoly::from_roots(ONE, &even_roots);
        let mut diameter: f64 = 0.0;
        for a in &roots {
            for b in &roots {
                diameter = diameter.max((a.value - b.value).norm());
            }
        }
        Ok(HyperellipticCurve {
            q,
            lead,
            sqrt_lead: lead.sqrt(),
            roots,
            branch,
            genus,
            odd,
            odd_index,
            even_part,
            diameter: diameter.max(1.0),
        })
    }

    pub fn from_simple_roots(lead: Complex64, roots: &[Complex64]) -> Result<Self> {
        Self::from_roots(lead, RootSet::simple(roots).roots)
    }

    /// Locates the roots of `q` numerically (backward error `tol`).
    pub fn from_poly(q: &ComplexPoly, tol: f64) -> Result<Self> {
        if let Some(d) = q.degree() {
            if d % 2 == 1 {
                return Err(Error::OddDegree(d));
            }
        }
        let rs = polyfield::roots(q, tol)?;
        Self::from_roots(q.leading(), rs.roots)
    }

    pub fn q(&self) -> &ComplexPoly {
        &self.q
    }

    pub fn lead(&self) -> Complex64 {
        self.lead
    }

    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn root_values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }

    pub fn branch(&self) -> &BranchData {
        &self.branch
    }

    /// Geometric genus `r_odd / 2 - 1`.
    pub fn genus(&self) -> usize {
        self.genus
    }

    /// Number of forms `z^k dz / (2y)` holomorphic at infinity, `deg / 2 - 1`.
    pub fn form_count(&self) -> usize {
        self.q.degree().unwrap_or(0) / 2 - 1
    }

    pub fn is_smooth(&self) -> bool {
        self.roots.iter().all(|r| r.multiplicity == 1)
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    /// Global clearance margin for paths, `1e-3` times the root-set diameter.
    pub fn margin(&self) -> f64 {
        1e-3 * self.diameter
    }

    /// Clearance required from root `i`: the global margin, shrunk to a quarter
    /// of the distance to the nearest other root inside tight clusters.
    pub fn clearance(&self, i: usize) -> f64 {
        let near = self
            .roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, r)| (r.value - self.roots[i].value).norm())
            .fold(f64::INFINITY, f64::min);
        self.margin().min(0.25 * near)
    }

    /// Smallest distance between distinct roots.
    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.roots.iter().enumerate() {
            for b in &self.roots[i + 1..] {
                d = d.min((a.value - b.value).norm());
            }
        }
        d
    }

    /// `prod (z - c)^(m/2)` over the even part of the divisor; equals 1 on
    /// smooth curves.
    pub fn node_factor(&self) -> ComplexPoly {
        let mut roots = Vec::new();
        for r in &self.roots {
            if r.multiplicity >= 2 {
                roots.extend(std::iter::repeat_n(r.value, r.multiplicity / 2));
            }
        }
        ComplexPoly::from_roots(ONE, &roots)
    }

    /// Numerators `z^k s(z)` of the holomorphic forms of the normalization,
    /// `s` being the node factor; `k < genus`.
    pub fn normalization_numerators(&self) -> Vec<ComplexPoly> {
        let s = self.node_factor();
        (0..self.genus)
            .map(|k| &ComplexPoly::monomial(k) * &s)
            .collect()
    }

    /// One branch of `sqrt(Q(z))`, built from principal square roots of the
    /// linear factors. Discontinuous across rays; used only to seed anchors.
    pub fn y_principal(&self, z: Complex64) -> Complex64 {
        let mut y = self.sqrt_lead * self.even_part.eval(z);
        for &r in &self.odd {
            y *= (z - r).sqrt();
        }
        y
    }

    pub(crate) fn odd_roots(&self) -> &[Complex64] {
        &self.odd
    }

    pub(crate) fn odd_index(&self, root: usize) -> Option<usize> {
        self.odd_index[root]
    }

    pub(crate) fn even_part(&self) -> &ComplexPoly {
        &self.even_part
    }

    pub(crate) fn sqrt_lead(&self) -> Complex64 {
        self.sqrt_lead
    }
}

/// Which end of a sub-piece sits on a simple root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Singular {
    /// Root at the sub-piece start (path direction) rather than its end.
    pub at_start: bool,
    pub odd: usize,
    /// Principal `sqrt(z_o - r)`, `z_o` the regular end.
    pub c: Complex64,
    /// `z_o - r`.
    pub delta: Complex64,
    pub s_root: f64,
    pub s_other: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct SubPiece {
    pub piece: usize,
    pub s0: f64,
    pub s1: f64,
    /// Principal `sqrt(zm - r)` and `1 / (zm - r)` per odd root.
    pub mids: Vec<(Complex64, Complex64)>,
    pub sing: Option<Singular>,
    pub sign: f64,
}

/// Value of the integrand ingredients at one quadrature node.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Sample {
    pub z: Complex64,
    /// `y * dz/du`.
    pub y_jac: Complex64,
    /// `(dz/du) / (2 y)`.
    pub jac_over_2y: Complex64,
}

/// A path lifted to the cover by fixing `y` at the start of one piece.
#[derive(Debug, Clone)]
pub struct LiftedPath {
    pub path: Path,
    pub anchor_piece: usize,
    pub y_anchor: Complex64,
    pub(crate) subs: Vec<SubPiece>,
    sqrt_lead: Complex64,
    even_part: ComplexPoly,
    odd: Vec<Complex64>,
}

impl LiftedPath {
    /// Splits the path into analytic sub-pieces and fixes their signs from the
    /// anchor value.
    pub fn new(
        curve: &HyperellipticCurve,
        path: &Path,
        anchor_piece: usize,
        y_anchor: Complex64,
    ) -> Result<Self> {
        path.validate()?;
        check_clearance(curve, path)?;
        let n = path.pieces.len();
        let start_odd = path.start_root.and_then(|i| curve.odd_index(i));
        let end_odd = path.end_root.and_then(|i| curve.odd_index(i));
        let mut subs = Vec::new();
        for (k, piece) in path.pieces.iter().enumerate() {
            let sing_start = if k == 0 { start_odd } else { None };
            let sing_end = if k + 1 == n { end_odd } else { None };
            if (sing_start.is_some() || sing_end.is_some())
                && !matches!(piece, Piece::Segment { .. })
            {
                return Err(Error::PlanInconsistent(
                    "paths must leave a branch point along a segment".into(),
                ));
            }
            split(curve, piece, k, 0.0, 1.0, sing_start, sing_end, 0, &mut subs)?;
        }
        let mut lifted = LiftedPath {
            path: path.clone(),
            anchor_piece,
            y_anchor,
            subs,
            sqrt_lead: curve.sqrt_lead(),
            even_part: curve.even_part().clone(),
            odd: curve.odd_roots().to_vec(),
        };
        lifted.fix_signs()?;
        Ok(lifted)
    }

    fn fix_signs(&mut self) -> Result<()> {
        let a = self
            .subs
            .iter()
            .position(|s| s.piece == self.anchor_piece && s.s0 == 0.0)
            .ok_or_else(|| Error::PlanInconsistent("anchor piece missing".into()))?;
        let ya = self.end_value(a, true);
        if ya.norm() == 0.0 || self.y_anchor.norm() == 0.0 {
            return Err(Error::PlanInconsistent("anchor sits on a zero of y".into()));
        }
        self.subs[a].sign = same_sheet(ya, self.y_anchor);
        for i in a + 1..self.subs.len() {
            let prev = self.end_value(i - 1, false) * self.subs[i - 1].sign;
            let cur = self.end_value(i, true);
            self.subs[i].sign = same_sheet(cur, prev);
        }
        for i in (0..a).rev() {
            let next = self.end_value(i + 1, true) * self.subs[i + 1].sign;
            let cur = self.end_value(i, false);
            self.subs[i].sign = same_sheet(cur, next);
        }
        Ok(())
    }

    /// Unsigned value at the start (`start = true`) or end of sub-piece `i`
    /// in path direction.
    fn end_value(&self, i: usize, start: bool) -> Complex64 {
        let sp = &self.subs[i];
        match sp.sing {
            Some(sg) => {
                // path-direction start is u = 0 iff the root is at the start
                let u = if sg.at_start == start { 0.0 } else { 1.0 };
                self.eval(sp, u).0
            }
            None => self.eval(sp, if start { 0.0 } else { 1.0 }).0,
        }
    }

    /// Unsigned `(y, z, dz/du, regular part)` at local parameter `u`.
    fn eval(&self, sp: &SubPiece, u: f64) -> (Complex64, Complex64, Complex64, Complex64) {
        let piece = &self.path.pieces[sp.piece];
        match sp.sing {
            None => {
                let s = sp.s0 + (sp.s1 - sp.s0) * u;
                let z = piece.at(s);
                let dz = piece.deriv(s) * (sp.s1 - sp.s0);
                let mut y = self.sqrt_lead * self.even_part.eval(z);
                for (k, &r) in self.odd.iter().enumerate() {
                    let (sq, inv) = sp.mids[k];
                    y *= sq * ((z - r) * inv).sqrt();
                }
                (y, z, dz, y)
            }
            Some(sg) => {
                let s = sg.s_root + (sg.s_other - sg.s_root) * u * u;
                let z = piece.at(s);
                let dz = 2.0 * sg.delta * u;
                let mut rest = self.sqrt_lead * self.even_part.eval(z);
                for (k, &r) in self.odd.iter().enumerate() {
                    if k == sg.odd {
                        continue;
                    }
                    let (sq, inv) = sp.mids[k];
                    rest *= sq * ((z - r) * inv).sqrt();
                }
                (rest * sg.c * u, z, dz, rest)
            }
        }
    }

    /// Integrand ingredients at `u` in `[0, 1]`; the orientation factor of
    /// sub-pieces that run into a root is folded into the Jacobian.
    pub(crate) fn sample(&self, i: usize, u: f64) -> Sample {
        let sp = &self.subs[i];
        let (y, z, dz, rest) = self.eval(sp, u);
        let sign = sp.sign;
        match sp.sing {
            None => Sample {
                z,
                y_jac: y * dz * sign,
                jac_over_2y: dz / (2.0 * y) * sign,
            },
            Some(sg) => {
                let orient = if sg.at_start { 1.0 } else { -1.0 };
                Sample {
                    z,
                    y_jac: y * dz * sign * orient,
                    // 2 delta u / (2 rest c u) = c / rest
                    jac_over_2y: sg.c / rest * sign * orient,
                }
            }
        }
    }

    pub(crate) fn sub_count(&self) -> usize {
        self.subs.len()
    }

    /// Sheet-tracked `y` at parameter `s` of piece `piece`.
    pub fn y_at(&self, piece: usize, s: f64) -> Complex64 {
        let sp = self
            .subs
            .iter()
            .find(|sp| sp.piece == piece && s >= sp.s0 && s <= sp.s1)
            .expect("parameter outside the path");
        let u = match sp.sing {
            None => (s - sp.s0) / (sp.s1 - sp.s0),
            Some(sg) => ((s - sg.s_root) / (sg.s_other - sg.s_root)).max(0.0).sqrt(),
        };
        self.eval(sp, u).0 * sp.sign
    }

    /// `(z, y)` at evenly spaced points of every sub-piece, in path order.
    pub fn samples(&self) -> Vec<(Complex64, Complex64)> {
        const PER_SUB: usize = 16;
        let mut out = Vec::with_capacity(self.subs.len() * PER_SUB + 1);
        for (i, sp) in self.subs.iter().enumerate() {
            let first = if i == 0 { 0 } else { 1 };
            for k in first..=PER_SUB {
                let t = k as f64 / PER_SUB as f64;
                // u runs from the root for singular sub-pieces
                let u = match sp.sing {
                    Some(sg) if !sg.at_start => 1.0 - t,
                    _ => t,
                };
                let (y, z, _, _) = self.eval(sp, u);
                out.push((z, y * sp.sign));
            }
        }
        out
    }

    pub fn y_start(&self) -> Complex64 {
        self.end_value(0, true) * self.subs[0].sign
    }

    pub fn y_end(&self) -> Complex64 {
        let last = self.subs.len() - 1;
        self.end_value(last, false) * self.subs[last].sign
    }
}

fn same_sheet(value: Complex64, reference: Complex64) -> f64 {
    if (value * reference.conj()).re >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

fn check_clearance(curve: &HyperellipticCurve, path: &Path) -> Result<()> {
    let n = path.pieces.len();
    for (i, r) in curve.roots().iter().enumerate() {
        let need = curve.clearance(i) * (1.0 - 1e-9);
        for (k, piece) in path.pieces.iter().enumerate() {
            let declared =
                (k == 0 && path.start_root == Some(i)) || (k + 1 == n && path.end_root == Some(i));
            if declared {
                continue;
            }
            let d = piece.distance_to(r.value);
            if d < need {
                return Err(Error::PathThroughBranchPoint {
                    point: r.value,
                    distance: d,
                });
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn split(
    curve: &HyperellipticCurve,
    piece: &Piece,
    index: usize,
    s0: f64,
    s1: f64,
    sing_start: Option<usize>,
    sing_end: Option<usize>,
    depth: usize,
    out: &mut Vec<SubPiece>,
) -> Result<()> {
    if depth > MAX_TRACK_DEPTH {
        return Err(Error::StepLimitExceeded);
    }
    let za = piece.at(s0);
    let zb = piece.at(s1);
    let zm = piece.at(0.5 * (s0 + s1));
    let h = (za - zm).norm().max((zb - zm).norm());
    let sweep_ok = match *piece {
        Piece::Arc { sweep, .. } => (sweep * (s1 - s0)).abs() <= 0.5 * PI,
        Piece::Segment { .. } => true,
    };
    let sing_here = sing_start.or(sing_end);
    let odd = curve.odd_roots();
    let roots_ok = odd
        .iter()
        .enumerate()
        .filter(|&(k, _)| Some(k) != sing_here)
        .all(|(_, &r)| (zm - r).norm() >= 2.0 * h);
    // a singular sub-piece must keep only one root end
    let both = sing_start.is_some() && sing_end.is_some();
    if sweep_ok && roots_ok && !both {
        let mids = odd
            .iter()
            .map(|&r| {
                let d = zm - r;
                (d.sqrt(), 1.0 / d)
            })
            .collect();
        let sing = sing_here.map(|k| {
            let at_start = sing_start.is_some();
            let (s_root, s_other) = if at_start { (s0, s1) } else { (s1, s0) };
            let delta = piece.at(s_other) - odd[k];
            Singular {
                at_start,
                odd: k,
                c: delta.sqrt(),
                delta,
                s_root,
                s_other,
            }
        });
        out.push(SubPiece {
            piece: index,
            s0,
            s1,
            mids,
            sing,
            sign: 1.0,
        });
        return Ok(());
    }
    let mid = 0.5 * (s0 + s1);
    split(curve, piece, index, s0, mid, sing_start, None, depth + 1, out)?;
    split(curve, piece, index, mid, s1, None, sing_end, depth + 1, out)
}

/// Result of continuing `sqrt(Q)` along a path.
#[derive(Debug, Clone)]
pub struct SheetTrack {
    pub samples: Vec<(Complex64, Complex64)>,
    /// For closed paths, `+1` when the lift closes up and `-1` when it ends on
    /// the other sheet.
    pub final_sign: Option<i8>,
}

/// Continues `y` along `path` from `y0` at its start.
pub fn continue_sqrt(c: &HyperellipticCurve, path: &Path, y0: Complex64) -> Result<SheetTrack> {
    let q0 = c.q().eval(path.start());
    if (y0 * y0 - q0).norm() > 1e-8 * (1.0 + q0.norm()) {
        return Err(Error::InvalidConfig(
            "initial value is not a square root of Q at the path start".into(),
        ));
    }
    let lifted = LiftedPath::new(c, path, 0, y0)?;
    let final_sign = if path.is_closed() {
        Some(same_sheet(lifted.y_end(), lifted.y_start()) as i8)
    } else {
        None
    };
    Ok(SheetTrack {
        samples: lifted.samples(),
        final_sign,
    })
}

/// Outcome of a local order estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub order: i32,
    pub slope: f64,
    pub r2: f64,
}

/// Order of a differential at a branch cluster in the local parameter `t`
/// (`z = c + t^2` at odd clusters, `z = c + t` at even ones), from a log-log
/// fit of its modulus over `|t|` in `1e-2 .. 1e-5`.
pub fn vanishing_order(
    c: &HyperellipticCurve,
    form: &Differential,
    cluster: &Cluster,
) -> Result<OrderFit> {
    let dir = Complex64::from_polar(1.0, 0.7);
    let odd = cluster.parity == Parity::Odd;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 0..=12 {
        let t = 10f64.powf(-2.0 - 0.25 * k as f64);
        let (z, dzdt) = if odd {
            (cluster.center + dir * t * t, 2.0 * t)
        } else {
            (cluster.center + dir * t, 1.0)
        };
        let ymod = c.q().eval(z).norm().sqrt();
        let value = match form {
            Differential::Theta => ymod * dzdt,
            Differential::Form(f) => f.numerator.eval(z).norm() / (2.0 * ymod) * dzdt,
        };
        xs.push(t.ln());
        ys.push(value.ln());
    }
    let fit = crate::scans::ols(&xs, &ys);
    if fit.r2 < 0.999 || !fit.slope.is_finite() {
        return Err(Error::FitUnstable { r2: fit.r2 });
    }
    Ok(OrderFit {
        order: fit.slope.round() as i32,
        slope: fit.slope,
        r2: fit.r2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real_roots(v: &[f64]) -> Vec<Complex64> {
        v.iter().map(|&x| c(x, 0.0)).collect()
    }

    fn f1(eps: f64) -> HyperellipticCurve {
        HyperellipticCurve::from_simple_roots(
            c(1.0, 0.0),
            &real_roots(&[-eps, eps, 1.0, 2.0, 3.0, 4.0]),
        )
        .unwrap()
    }

    #[test]
    fn classification_examples() {
        let rs = RootSet::simple(&real_roots(&[-0.1, 0.1, 1.0, 2.0, 3.0, 4.0]));
        let b = classify_branch_points(&rs, 1e-9).unwrap();
        assert_eq!(b.clusters.len(), 6);
        assert_eq!(b.r_odd, 6);
        assert_eq!(genus(&b).unwrap(), 2);

        let mut rs = RootSet::simple(&real_roots(&[1.0, 2.0, 3.0, 4.0]));
        rs.roots.push(Root {
            value: c(0.0, 0.0),
            multiplicity: 2,
        });
        let b = classify_branch_points(&rs, 1e-9).unwrap();
        assert_eq!(b.r_odd, 4);
        assert_eq!(
            b.clusters
                .iter()
                .filter(|c| c.parity == Parity::Even)
                .count(),
            1
        );

        let doubles = RootSet {
            roots: (1..=4)
                .map(|k| Root {
                    value: c(2.0 * k as f64, 0.0),
                    multiplicity: 2,
                })
                .collect(),
            residual: 0.0,
        };
        let b = classify_branch_points(&doubles, 1e-9).unwrap();
        assert_eq!(b.r_odd, 0);
        assert!(matches!(genus(&b), Err(Error::DegenerateCover)));
    }

    #[test]
    fn genus_examples() {
        let mk = |r_odd| BranchData {
            clusters: Vec::new(),
            r_odd,
        };
        assert_eq!(genus(&mk(6)).unwrap(), 2);
        assert_eq!(genus(&mk(8)).unwrap(), 3);
        assert_eq!(genus(&mk(2)).unwrap(), 0);
    }

    #[test]
    fn odd_parity_rejected() {
        let rs = RootSet::simple(&real_roots(&[0.0, 1.0, 2.0]));
        assert!(matches!(
            classify_branch_points(&rs, 0.0),
            Err(Error::OddTotalParity(3))
        ));
        assert!(matches!(
            HyperellipticCurve::from_simple_roots(c(1.0, 0.0), &real_roots(&[0.0, 1.0, 2.0])),
            Err(Error::OddDegree(3))
        ));
    }

    #[test]
    fn loop_sheet_signs() {
        let curve = f1(0.1);
        // around nothing
        let p = Path::circle(c(0.5, 0.0), 0.2, 0.3);
        let y0 = curve.y_principal(p.start());
        assert_eq!(continue_sqrt(&curve, &p, y0).unwrap().final_sign, Some(1));
        // around the single root at 1
        let p = Path::circle(c(1.0, 0.0), 0.3, 0.3);
        let y0 = curve.y_principal(p.start());
        assert_eq!(continue_sqrt(&curve, &p, y0).unwrap().final_sign, Some(-1));
        // around the pair +-0.1
        let p = Path::circle(c(0.0, 0.0), 0.45, 0.3);
        let y0 = curve.y_principal(p.start());
        assert_eq!(continue_sqrt(&curve, &p, y0).unwrap().final_sign, Some(1));
    }

    #[test]
    fn double_root_loop_closes() {
        let mut roots = RootSet::simple(&real_roots(&[1.0, 2.0, 3.0, 4.0])).roots;
        roots.push(Root {
            value: c(0.0, 0.0),
            multiplicity: 2,
        });
        let curve = HyperellipticCurve::from_roots(c(1.0, 0.0), roots).unwrap();
        assert_eq!(curve.genus(), 1);
        assert_eq!(curve.form_count(), 2);
        let p = Path::circle(c(0.0, 0.0), 0.45, 0.3);
        let y0 = curve.y_principal(p.start());
        assert_eq!(continue_sqrt(&curve, &p, y0).unwrap().final_sign, Some(1));
    }

    #[test]
    fn samples_satisfy_curve_equation_and_continuity() {
        let curve = f1(0.1);
        let p = Path::circle(c(0.0, 0.0), 2.5, 1.0);
        let y0 = curve.y_principal(p.start());
        let track = continue_sqrt(&curve, &p, y0).unwrap();
        for w in track.samples.windows(2) {
            let (z, y) = w[1];
            let q = curve.q().eval(z);
            assert!((y * y - q).norm() <= 1e-10 * (1.0 + q.norm()));
            assert!((w[1].1 - w[0].1).norm() < (w[1].1 + w[0].1).norm());
        }
        // encloses 0.1, -0.1, 1, 2: an even number
        assert_eq!(track.final_sign, Some(1));
    }

    #[test]
    fn reversal_returns_to_start() {
        let curve = f1(0.1);
        let p = Path::new(vec![
            Piece::Segment {
                from: c(0.5, 0.5),
                to: c(2.5, 0.5),
            },
            Piece::Arc {
                center: c(2.5, 0.25),
                radius: 0.25,
                start: PI / 2.0,
                sweep: -PI,
            },
        ]);
        let y0 = curve.y_principal(p.start());
        let fwd = continue_sqrt(&curve, &p, y0).unwrap();
        let yend = fwd.samples.last().unwrap().1;
        let back = continue_sqrt(&curve, &p.reversed(), yend).unwrap();
        let ylast = back.samples.last().unwrap().1;
        assert!((ylast - y0).norm() < 1e-12 * y0.norm());
    }

    #[test]
    fn path_through_root_rejected() {
        let curve = f1(0.1);
        let p = Path::new(vec![Piece::Segment {
            from: c(0.5, 0.0),
            to: c(1.5, 0.0),
        }]);
        assert!(matches!(
            continue_sqrt(&curve, &p, curve.y_principal(c(0.5, 0.0))),
            Err(Error::PathThroughBranchPoint { .. })
        ));
    }

    #[test]
    fn pullback_examples() {
        assert!(pullback_quadratic(&ComplexPoly::zero()).numerator.is_zero());
        let q = ComplexPoly::from_real(&[-0.01, 0.0, 1.0]);
        let theta_num = q.scale(c(2.0, 0.0));
        let z = c(0.3, 0.4);
        let y = q.eval(z).sqrt();
        assert!((theta_num.eval(z) / (2.0 * y) - y).norm() < 1e-15);
    }

    #[test]
    fn local_orders() {
        let mut roots = RootSet::simple(&real_roots(&[1.0, 2.0, 3.0, 4.0])).roots;
        roots.push(Root {
            value: c(0.0, 0.0),
            multiplicity: 2,
        });
        let curve = HyperellipticCurve::from_roots(c(1.0, 0.0), roots).unwrap();
        let simple = curve
            .branch()
            .clusters
            .iter()
            .find(|c| c.parity == Parity::Odd)
            .unwrap()
            .clone();
        let node = curve
            .branch()
            .clusters
            .iter()
            .find(|c| c.parity == Parity::Even)
            .unwrap()
            .clone();
        assert_eq!(
            vanishing_order(&curve, &Differential::Theta, &simple)
                .unwrap()
                .order,
            2
        );
        assert_eq!(
            vanishing_order(&curve, &Differential::Theta, &node)
                .unwrap()
                .order,
            1
        );
        assert_eq!(
            vanishing_order(&curve, &Differential::monomial(0), &node)
                .unwrap()
                .order,
            -1
        );
        let _ = TAU;
    }
}
