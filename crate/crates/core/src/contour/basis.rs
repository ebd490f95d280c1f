use std::f64::consts::PI;

use num_complex::Complex64;

use super::intersect::piece_crossings;
use super::path::{angle_diff, Path, Piece};
use crate::error::{Error, Result};
use crate::surface::{HyperellipticCurve, LiftedPath};

/// Polar angle at which loops start; chosen away from the real axis so loop
/// junctions never coincide with crossings of axis-aligned arcs.
pub const LOOP_START_ANGLE: f64 = PI / 2.0 + 0.3;

/// Largest change of a tracked angle accepted in one transport step.
const MAX_ANGLE_STEP: f64 = PI / 2.0;

/// How primitive loops and arcs are combined into a symplectic basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMode {
    /// `a_i` are the primitive loops, `b_i = sum_{k >= i} arc_k`.
    LoopChain,
    /// `a_i = sum_{j <= i} loop_j`, `b_i` are the primitive arcs.
    SummedLoops,
}

/// One link of the chain: a pair of roots (or a single double root).
#[derive(Debug, Clone, PartialEq)]
pub struct PlanPair {
    pub roots: Vec<usize>,
    /// Collision pairs get a circular loop and radial exits; the others a stadium.
    pub collision: bool,
    /// Tags the loop around this pair as a vanishing cycle.
    pub vanishing: bool,
}

/// Ordered chain of pairs `P_1 .. P_{g+1}`. Loops surround `P_1 .. P_g`; arcs
/// run from `P_j` to `P_{j+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingPlan {
    pub pairs: Vec<PlanPair>,
    pub mode: BasisMode,
}

impl PairingPlan {
    pub fn size(&self) -> usize {
        self.pairs.len().saturating_sub(1)
    }

    fn remap(&self, perm: &[usize]) -> PairingPlan {
        PairingPlan {
            pairs: self
                .pairs
                .iter()
                .map(|p| PlanPair {
                    roots: p.roots.iter().map(|&r| perm[r]).collect(),
                    ..p.clone()
                })
                .collect(),
            mode: self.mode,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrimitiveKind {
    /// Closed planar loop lifted to one sheet.
    Loop,
    /// Arc between two branch points, traversed on the anchor sheet and back
    /// on the other; anti-invariant forms integrate to twice the one-sheet value.
    DoubleArc,
}

#[derive(Debug, Clone)]
pub struct Primitive {
    pub kind: PrimitiveKind,
    pub lifted: LiftedPath,
}

impl Primitive {
    pub fn path(&self) -> &Path {
        &self.lifted.path
    }

    /// Factor between the cycle integral and the one-sheet path integral.
    pub fn multiplier(&self) -> f64 {
        match self.kind {
            PrimitiveKind::Loop => 1.0,
            PrimitiveKind::DoubleArc => 2.0,
        }
    }
}

/// Integer combination of primitives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    pub terms: Vec<(usize, i32)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct PairState {
    dep: Option<usize>,
    entry: Option<usize>,
    phi_dep: f64,
    phi_exit: f64,
    phi_entry: f64,
    psi_entry: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct State {
    pairs: Vec<PairState>,
    flip_a: Vec<i32>,
    flip_b: Vec<i32>,
    order: Vec<usize>,
}

/// Symplectic cycle basis on a fixed curve, with the continuous state needed
/// to transport it to nearby curves.
#[derive(Debug, Clone)]
pub struct CycleBasis {
    /// Loops `0..g` followed by arcs `g..2g`.
    pub primitives: Vec<Primitive>,
    pub a_cycles: Vec<Cycle>,
    pub b_cycles: Vec<Cycle>,
    /// Intersection form on `(a_1..a_g, b_1..b_g)`.
    pub intersection: Vec<Vec<i32>>,
    /// Per a-cycle: is it a vanishing loop.
    pub vanishing: Vec<bool>,
    pub plan: PairingPlan,
    /// Hash of the continuation history.
    pub branch_tag: u64,
    state: State,
}

impl CycleBasis {
    pub fn size(&self) -> usize {
        self.a_cycles.len()
    }

    /// Indices of vanishing a-cycles.
    pub fn vanishing_indices(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| self.vanishing[i]).collect()
    }

    pub fn tangential_indices(&self) -> Vec<usize> {
        (0..self.size()).filter(|&i| !self.vanishing[i]).collect()
    }
}

fn centroid(curve: &HyperellipticCurve, roots: &[usize]) -> Complex64 {
    roots
        .iter()
        .map(|&i| curve.roots()[i].value)
        .sum::<Complex64>()
        / roots.len() as f64
}

fn cluster_radius(curve: &HyperellipticCurve, roots: &[usize]) -> f64 {
    let c = centroid(curve, roots);
    roots
        .iter()
        .map(|&i| (curve.roots()[i].value - c).norm())
        .fold(0.0, f64::max)
}

fn foreign(curve: &HyperellipticCurve, roots: &[usize]) -> Vec<Complex64> {
    (0..curve.roots().len())
        .filter(|i| !roots.contains(i))
        .map(|i| curve.roots()[i].value)
        .collect()
}

/// Radius of the vanishing loop: half the gap between the cluster and the
/// nearest foreign root, measured from the centroid.
fn loop_radius(curve: &HyperellipticCurve, roots: &[usize]) -> Result<f64> {
    let c = centroid(curve, roots);
    let diam = 2.0 * cluster_radius(curve, roots);
    let others = foreign(curve, roots);
    let separation = others
        .iter()
        .map(|&f| {
            roots
                .iter()
                .map(|&i| (curve.roots()[i].value - f).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::INFINITY, f64::min);
    if separation < 3.0 * diam {
        return Err(Error::ClusterCrowded {
            center: c,
            separation,
            required: 3.0 * diam,
        });
    }
    let nearest = others
        .iter()
        .map(|&f| (f - c).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(0.5 * (nearest - cluster_radius(curve, roots)))
}

/// Counterclockwise circle around a root cluster, centered at its centroid.
pub fn vanishing_loop(curve: &HyperellipticCurve, roots: &[usize]) -> Result<Path> {
    let r = loop_radius(curve, roots)?;
    Ok(Path::circle(centroid(curve, roots), r, LOOP_START_ANGLE))
}

/// Counterclockwise stadium around the segment between two roots, starting
/// at the lower left.
pub fn stadium(curve: &HyperellipticCurve, roots: [usize; 2]) -> Result<Path> {
    let p1 = curve.roots()[roots[0]].value;
    let p2 = curve.roots()[roots[1]].value;
    let seg = Piece::Segment { from: p1, to: p2 };
    let dist = foreign(curve, &roots)
        .iter()
        .map(|&f| seg.distance_to(f))
        .fold(f64::INFINITY, f64::min);
    let rho = 0.4 * dist;
    let d = (p2 - p1) / (p2 - p1).norm();
    let n = Complex64::new(0.0, 1.0) * d;
    let back = (-n).arg();
    Ok(Path::new(vec![
        Piece::Segment {
            from: p1 - n * rho,
            to: p2 - n * rho,
        },
        Piece::Arc {
            center: p2,
            radius: rho,
            start: back,
            sweep: PI,
        },
        Piece::Segment {
            from: p2 + n * rho,
            to: p1 + n * rho,
        },
        Piece::Arc {
            center: p1,
            radius: rho,
            start: back + PI,
            sweep: PI,
        },
    ]))
}

/// Polyline from `from` to `to` that passes every obstacle root closer than
/// its clearance on a left half-arc centered at the obstacle's projection.
fn detoured(
    curve: &HyperellipticCurve,
    from: Complex64,
    to: Complex64,
    skip: &[usize],
) -> Result<Vec<Piece>> {
    let len = (to - from).norm();
    let d = (to - from) / len;
    let mut detours: Vec<(f64, f64)> = Vec::new();
    for (i, r) in curve.roots().iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        let rel = (r.value - from) * d.conj();
        let need = curve.clearance(i);
        if rel.im.abs() < need && rel.re > 0.0 && rel.re < len {
            detours.push((rel.re, need + rel.im.max(0.0)));
        }
    }
    detours.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pieces = Vec::new();
    let mut cursor = 0.0;
    for &(t, rho) in &detours {
        if t - rho <= cursor || t + rho >= len {
            return Err(Error::NoRoute { from, to });
        }
        let c = from + d * t;
        pieces.push(Piece::Segment {
            from: from + d * cursor,
            to: c - d * rho,
        });
        pieces.push(Piece::Arc {
            center: c,
            radius: rho,
            start: (-d).arg(),
            sweep: -PI,
        });
        cursor = t + rho;
    }
    pieces.push(Piece::Segment {
        from: from + d * cursor,
        to,
    });
    Ok(pieces)
}

/// Path between two roots with obstacle detours; the endpoints are declared
/// branch points.
pub fn connecting_path(curve: &HyperellipticCurve, from: usize, to: usize) -> Result<Path> {
    let a = curve.roots()[from].value;
    let b = curve.roots()[to].value;
    Ok(Path::new(detoured(curve, a, b, &[from, to])?).with_roots(Some(from), Some(to)))
}

fn principal_arg(z: Complex64) -> f64 {
    z.arg()
}

/// Continues a tracked angle to the principal value `fresh`.
fn unwrap(old: f64, fresh: f64) -> Result<f64> {
    let step = angle_diff(fresh, old);
    if step.abs() > MAX_ANGLE_STEP {
        return Err(Error::StepTooLarge(format!(
            "tracked angle moved by {step:.3} rad"
        )));
    }
    Ok(old + step)
}

fn has_arcs(pair: &PlanPair) -> bool {
    pair.collision && pair.roots.len() == 2
}

/// Point of pair `j` that arcs aim at.
fn aim_point(curve: &HyperellipticCurve, pair: &PlanPair, st: &PairState, arriving: bool) -> Complex64 {
    if has_arcs(pair) {
        centroid(curve, &pair.roots)
    } else {
        let r = if arriving { st.entry } else { st.dep };
        curve.roots()[r.expect("endpoint assigned")].value
    }
}

fn initial_state(curve: &HyperellipticCurve, plan: &PairingPlan) -> Vec<PairState> {
    let n = plan.pairs.len();
    let mut states = vec![PairState::default(); n];
    for (j, pair) in plan.pairs.iter().enumerate() {
        let st = &mut states[j];
        if pair.roots.len() == 1 {
            st.dep = (j + 1 < n).then_some(pair.roots[0]);
            st.entry = (j > 0).then_some(pair.roots[0]);
            continue;
        }
        let c = centroid(curve, &pair.roots);
        let (r0, r1) = (pair.roots[0], pair.roots[1]);
        let v = |i: usize| curve.roots()[i].value;
        let (dep, entry) = if pair.collision {
            // representative: smaller principal argument about the centroid
            if principal_arg(v(r0) - c) <= principal_arg(v(r1) - c) {
                (r0, r1)
            } else {
                (r1, r0)
            }
        } else if j > 0 {
            let prev = centroid(curve, &plan.pairs[j - 1].roots);
            if (v(r0) - prev).norm() <= (v(r1) - prev).norm() {
                (r1, r0)
            } else {
                (r0, r1)
            }
        } else {
            let next = centroid(curve, &plan.pairs[j + 1].roots);
            if (v(r0) - next).norm() <= (v(r1) - next).norm() {
                (r0, r1)
            } else {
                (r1, r0)
            }
        };
        st.dep = (j + 1 < n).then_some(dep);
        st.entry = (j > 0).then_some(entry);
        if pair.collision {
            st.phi_dep = principal_arg(v(dep) - c);
            st.phi_entry = principal_arg(v(entry) - c);
        }
    }
    for j in 0..n {
        let pair = &plan.pairs[j];
        if !has_arcs(pair) {
            continue;
        }
        let c = centroid(curve, &pair.roots);
        if j + 1 < n {
            let target = aim_point(curve, &plan.pairs[j + 1], &states[j + 1], true);
            let phi = states[j].phi_dep;
            states[j].phi_exit = phi + angle_diff((target - c).arg(), phi);
        }
        if j > 0 {
            let source = aim_point(curve, &plan.pairs[j - 1], &states[j - 1], false);
            let phi = states[j].phi_entry;
            states[j].psi_entry = phi + angle_diff((source - c).arg(), phi);
        }
    }
    states
}

fn transported_state(
    curve: &HyperellipticCurve,
    plan: &PairingPlan,
    old: &[PairState],
) -> Result<Vec<PairState>> {
    let n = plan.pairs.len();
    let mut states = old.to_vec();
    for j in 0..n {
        let pair = &plan.pairs[j];
        if !has_arcs(pair) {
            continue;
        }
        let c = centroid(curve, &pair.roots);
        let st = &mut states[j];
        if let Some(d) = st.dep {
            st.phi_dep = unwrap(st.phi_dep, (curve.roots()[d].value - c).arg())?;
        }
        if let Some(e) = st.entry {
            st.phi_entry = unwrap(st.phi_entry, (curve.roots()[e].value - c).arg())?;
        }
    }
    for j in 0..n {
        let pair = &plan.pairs[j];
        if !has_arcs(pair) {
            continue;
        }
        let c = centroid(curve, &pair.roots);
        if j + 1 < n {
            let target = aim_point(curve, &plan.pairs[j + 1], &states[j + 1], true);
            states[j].phi_exit = unwrap(states[j].phi_exit, (target - c).arg())?;
        }
        if j > 0 {
            let source = aim_point(curve, &plan.pairs[j - 1], &states[j - 1], false);
            states[j].psi_entry = unwrap(states[j].psi_entry, (source - c).arg())?;
        }
    }
    Ok(states)
}

fn arc_radius(curve: &HyperellipticCurve, pair: &PlanPair) -> Result<f64> {
    Ok(0.5 * (cluster_radius(curve, &pair.roots) + loop_radius(curve, &pair.roots)?))
}

fn push_arc(pieces: &mut Vec<Piece>, center: Complex64, radius: f64, from: f64, to: f64) {
    if (to - from).abs() > 1e-14 {
        pieces.push(Piece::Arc {
            center,
            radius,
            start: from,
            sweep: to - from,
        });
    }
}

/// Geometry of the arc from pair `j` to pair `j + 1`, with the anchor piece.
fn arc_path(
    curve: &HyperellipticCurve,
    plan: &PairingPlan,
    states: &[PairState],
    j: usize,
) -> Result<(Path, usize)> {
    let (src, dst) = (&plan.pairs[j], &plan.pairs[j + 1]);
    let (ss, ds) = (&states[j], &states[j + 1]);
    let dep = ss.dep.expect("departure root");
    let entry = ds.entry.expect("entry root");
    let mut pieces = Vec::new();
    let x = if has_arcs(src) {
        let c = centroid(curve, &src.roots);
        let rho = arc_radius(curve, src)?;
        pieces.push(Piece::Segment {
            from: curve.roots()[dep].value,
            to: c + Complex64::from_polar(rho, ss.phi_dep),
        });
        push_arc(&mut pieces, c, rho, ss.phi_dep, ss.phi_exit);
        c + Complex64::from_polar(rho, ss.phi_exit)
    } else {
        curve.roots()[dep].value
    };
    let mut tail = Vec::new();
    let e = if has_arcs(dst) {
        let c = centroid(curve, &dst.roots);
        let rho = arc_radius(curve, dst)?;
        push_arc(&mut tail, c, rho, ds.psi_entry, ds.phi_entry);
        tail.push(Piece::Segment {
            from: c + Complex64::from_polar(rho, ds.phi_entry),
            to: curve.roots()[entry].value,
        });
        c + Complex64::from_polar(rho, ds.psi_entry)
    } else {
        curve.roots()[entry].value
    };
    let mut middle = detoured(curve, x, e, &[dep, entry])?;
    // split the first middle segment so the anchor sits away from any root
    let first = middle.remove(0);
    let (a, b) = match first {
        Piece::Segment { from, to } => (from, to),
        _ => unreachable!(),
    };
    let mid = 0.5 * (a + b);
    middle.insert(0, Piece::Segment { from: mid, to: b });
    middle.insert(0, Piece::Segment { from: a, to: mid });
    let anchor = pieces.len() + 1;
    pieces.extend(middle);
    pieces.extend(tail);
    Ok((Path::new(pieces).with_roots(Some(dep), Some(entry)), anchor))
}

fn loop_path(curve: &HyperellipticCurve, pair: &PlanPair) -> Result<Path> {
    if pair.collision || pair.roots.len() == 1 {
        vanishing_loop(curve, &pair.roots)
    } else {
        stadium(curve, [pair.roots[0], pair.roots[1]])
    }
}

/// Geometry of all primitives: loops `0..g`, arcs `g..2g`, with anchors.
fn realize(
    curve: &HyperellipticCurve,
    plan: &PairingPlan,
    states: &[PairState],
) -> Result<Vec<(PrimitiveKind, Path, usize)>> {
    let g = plan.size();
    let mut out = Vec::with_capacity(2 * g);
    for pair in &plan.pairs[..g] {
        out.push((PrimitiveKind::Loop, loop_path(curve, pair)?, 0));
    }
    for j in 0..g {
        let (p, a) = arc_path(curve, plan, states, j)?;
        out.push((PrimitiveKind::DoubleArc, p, a));
    }
    Ok(out)
}

fn same_sheet(a: Complex64, b: Complex64) -> i32 {
    if (a * b.conj()).re >= 0.0 {
        1
    } else {
        -1
    }
}

/// Intersection number of two lifted primitives from planar crossings.
pub(crate) fn primitive_intersection(p: &Primitive, q: &Primitive) -> i32 {
    let mut total = 0;
    for (ip, pp) in p.path().pieces.iter().enumerate() {
        for (iq, pq) in q.path().pieces.iter().enumerate() {
            for (s, t) in piece_crossings(pp, pq) {
                let t1 = pp.deriv(s);
                let t2 = pq.deriv(t);
                let orient = (t1.conj() * t2).im;
                if orient.abs() <= 1e-12 * t1.norm() * t2.norm() {
                    continue;
                }
                let iota = if orient > 0.0 { 1 } else { -1 };
                let sheet = same_sheet(p.lifted.y_at(ip, s), q.lifted.y_at(iq, t));
                total += match (p.kind, q.kind) {
                    (PrimitiveKind::Loop, PrimitiveKind::Loop) => {
                        if sheet > 0 {
                            iota
                        } else {
                            0
                        }
                    }
                    (PrimitiveKind::DoubleArc, PrimitiveKind::DoubleArc) => 2 * iota * sheet,
                    _ => iota * sheet,
                };
            }
        }
    }
    total
}

fn primitive_matrix(prims: &[Primitive]) -> Vec<Vec<i32>> {
    let n = prims.len();
    let mut m = vec![vec![0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let v = primitive_intersection(&prims[i], &prims[j]);
            m[i][j] = v;
            m[j][i] = -v;
        }
    }
    m
}

/// Sign choices making `<loop_i, arc_j> = delta_ij - delta_{i, j+1}`.
fn normalizing_flips(m: &[Vec<i32>], g: usize) -> Result<(Vec<i32>, Vec<i32>)> {
    let mut fa = vec![1; g];
    let mut fb = vec![1; g];
    for j in 0..g {
        let v = m[j][g + j];
        if v.abs() != 1 {
            return Err(Error::PlanInconsistent(format!(
                "loop {j} meets its arc {v} times"
            )));
        }
        fb[j] = fa[j] * v;
        if j + 1 < g {
            let w = m[j + 1][g + j];
            if w.abs() != 1 {
                return Err(Error::PlanInconsistent(format!(
                    "loop {} meets arc {j} {w} times",
                    j + 1
                )));
            }
            fa[j + 1] = -fb[j] * w;
        }
    }
    Ok((fa, fb))
}

fn expected_primitive(i: usize, j: usize, g: usize) -> i32 {
    // loops 0..g, arcs g..2g
    let (li, lj) = (i < g, j < g);
    match (li, lj) {
        (true, false) => {
            let b = j - g;
            (i == b) as i32 - (i == b + 1) as i32
        }
        (false, true) => -expected_primitive(j, i, g),
        _ => 0,
    }
}

fn cycles_for(mode: BasisMode, g: usize, fa: &[i32], fb: &[i32]) -> (Vec<Cycle>, Vec<Cycle>) {
    match mode {
        BasisMode::LoopChain => (
            (0..g)
                .map(|i| Cycle {
                    terms: vec![(i, fa[i])],
                })
                .collect(),
            (0..g)
                .map(|i| Cycle {
                    terms: (i..g).map(|k| (g + k, fb[k])).collect(),
                })
                .collect(),
        ),
        BasisMode::SummedLoops => (
            (0..g)
                .map(|i| Cycle {
                    terms: (0..=i).map(|k| (k, fa[k])).collect(),
                })
                .collect(),
            (0..g)
                .map(|i| Cycle {
                    terms: vec![(g + i, fb[i])],
                })
                .collect(),
        ),
    }
}

fn pair_form(m: &[Vec<i32>], x: &Cycle, y: &Cycle) -> i32 {
    let mut s = 0;
    for &(i, wi) in &x.terms {
        for &(j, wj) in &y.terms {
            s += wi * wj * m[i][j];
        }
    }
    s
}

fn cycle_matrix(m: &[Vec<i32>], a: &[Cycle], b: &[Cycle]) -> Vec<Vec<i32>> {
    let all: Vec<&Cycle> = a.iter().chain(b.iter()).collect();
    all.iter()
        .map(|x| all.iter().map(|y| pair_form(m, x, y)).collect())
        .collect()
}

fn is_normal_form(m: &[Vec<i32>], g: usize) -> bool {
    (0..2 * g).all(|i| {
        (0..2 * g).all(|j| {
            let want = if i < g && j == i + g {
                1
            } else if i >= g && j + g == i {
                -1
            } else {
                0
            };
            m[i][j] == want
        })
    })
}

fn fnv_mix(mut h: u64, words: impl IntoIterator<Item = u64>) -> u64 {
    for w in words {
        for byte in w.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x100_0000_01b3);
        }
    }
    h
}

fn root_words(curve: &HyperellipticCurve) -> Vec<u64> {
    curve
        .roots()
        .iter()
        .flat_map(|r| [r.value.re.to_bits(), r.value.im.to_bits()])
        .collect()
}

fn check_plan(curve: &HyperellipticCurve, plan: &PairingPlan) -> Result<()> {
    let g = plan.size();
    if plan.pairs.len() < 2 || g == 0 {
        return Err(Error::PlanInconsistent("a basis needs at least two pairs".into()));
    }
    let mut seen = vec![false; curve.roots().len()];
    for p in &plan.pairs {
        if p.roots.is_empty() || p.roots.len() > 2 {
            return Err(Error::PlanInconsistent("pairs hold one or two roots".into()));
        }
        for &r in &p.roots {
            if r >= seen.len() || seen[r] {
                return Err(Error::PlanInconsistent(format!("root {r} used twice or missing")));
            }
            seen[r] = true;
        }
        if p.roots.len() == 1 && curve.roots()[p.roots[0]].multiplicity % 2 == 1 {
            return Err(Error::PlanInconsistent("a single-root pair must be a double root".into()));
        }
    }
    for (i, used) in seen.iter().enumerate() {
        if !used && curve.roots()[i].multiplicity % 2 == 1 {
            return Err(Error::PlanInconsistent(format!(
                "branch point {i} is not covered by the plan"
            )));
        }
    }
    let omitted = seen.iter().filter(|u| !**u).count();
    if g + omitted != curve.form_count() {
        return Err(Error::PlanInconsistent(format!(
            "{g} loops do not match {} forms",
            curve.form_count()
        )));
    }
    Ok(())
}

fn assemble(
    curve: &HyperellipticCurve,
    plan: PairingPlan,
    states: Vec<PairState>,
    anchors: Option<&[Complex64]>,
    flips: Option<(Vec<i32>, Vec<i32>, Vec<usize>)>,
    branch_tag: u64,
) -> Result<CycleBasis> {
    let g = plan.size();
    let geometry = realize(curve, &plan, &states)?;
    let mut primitives = Vec::with_capacity(2 * g);
    for (k, (kind, path, anchor_piece)) in geometry.into_iter().enumerate() {
        let point = path.pieces[anchor_piece].start();
        let fresh = curve.y_principal(point);
        let y = match anchors {
            None => fresh,
            Some(old) => {
                let y = if (fresh * old[k].conj()).re >= 0.0 {
                    fresh
                } else {
                    -fresh
                };
                let cos = (y * old[k].conj()).re / (y.norm() * old[k].norm());
                if !(cos >= std::f64::consts::FRAC_1_SQRT_2) {
                    return Err(Error::StepTooLarge(format!(
                        "sheet anchor {k} turned by more than pi/4"
                    )));
                }
                y
            }
        };
        primitives.push(Primitive {
            kind,
            lifted: LiftedPath::new(curve, &path, anchor_piece, y)?,
        });
    }
    let m = primitive_matrix(&primitives);
    let transported = flips.is_some();
    let (fa, fb, order) = match flips {
        Some(f) => f,
        None => {
            let (fa, fb) = normalizing_flips(&m, g)?;
            let tags = vanishing_tags(&plan);
            let mut order: Vec<usize> = (0..g).filter(|&i| !tags[i]).collect();
            order.extend((0..g).filter(|&i| tags[i]));
            (fa, fb, order)
        }
    };
    for i in 0..2 * g {
        for j in 0..2 * g {
            let want = expected_primitive(i, j, g);
            let have = m[i][j] * flip_of(&fa, &fb, g, i) * flip_of(&fa, &fb, g, j);
            if have != want {
                let msg = format!("primitive intersection ({i},{j}) is {have}, expected {want}");
                return Err(if transported {
                    Error::StepTooLarge(msg)
                } else {
                    Error::PlanInconsistent(msg)
                });
            }
        }
    }
    let (a, b) = cycles_for(plan.mode, g, &fa, &fb);
    let tags = vanishing_tags(&plan);
    let a_cycles: Vec<Cycle> = order.iter().map(|&i| a[i].clone()).collect();
    let b_cycles: Vec<Cycle> = order.iter().map(|&i| b[i].clone()).collect();
    let vanishing = order.iter().map(|&i| tags[i]).collect();
    let intersection = cycle_matrix(&m, &a_cycles, &b_cycles);
    if !is_normal_form(&intersection, g) {
        return Err(Error::PlanInconsistent(
            "cycle intersection matrix is not symplectic".into(),
        ));
    }
    Ok(CycleBasis {
        primitives,
        a_cycles,
        b_cycles,
        intersection,
        vanishing,
        plan,
        branch_tag,
        state: State {
            pairs: states,
            flip_a: fa,
            flip_b: fb,
            order,
        },
    })
}

fn flip_of(fa: &[i32], fb: &[i32], g: usize, i: usize) -> i32 {
    if i < g {
        fa[i]
    } else {
        fb[i - g]
    }
}

fn vanishing_tags(plan: &PairingPlan) -> Vec<bool> {
    let g = plan.size();
    match plan.mode {
        BasisMode::LoopChain => plan.pairs[..g].iter().map(|p| p.vanishing).collect(),
        BasisMode::SummedLoops => (0..g)
            .map(|i| plan.pairs[..=i].iter().all(|p| p.vanishing))
            .collect(),
    }
}

/// Builds loops around `P_1 .. P_g` and arcs `P_j -> P_{j+1}`, normalizes
/// their signs and combines them into a symplectic basis. Tangential a-cycles
/// come first, vanishing ones last.
pub fn build_cycle_basis(c: &HyperellipticCurve, plan: &PairingPlan) -> Result<CycleBasis> {
    check_plan(c, plan)?;
    let states = initial_state(c, plan);
    let tag = fnv_mix(0xcbf2_9ce4_8422_2325, root_words(c));
    assemble(c, plan.clone(), states, None, None, tag)
}

/// Transports a basis from `old` to `new`. `matching[i]` is the index in
/// `new` of root `i` of `old`.
pub fn deform_basis(
    basis: &CycleBasis,
    old: &HyperellipticCurve,
    new: &HyperellipticCurve,
    matching: &[usize],
) -> Result<CycleBasis> {
    if matching.len() != old.roots().len() || new.roots().len() != old.roots().len() {
        return Err(Error::CardinalityMismatch(
            old.roots().len(),
            new.roots().len(),
        ));
    }
    let bound = 0.25 * old.min_separation();
    for (i, r) in old.roots().iter().enumerate() {
        let moved = &new.roots()[matching[i]];
        if moved.multiplicity != r.multiplicity {
            return Err(Error::StepTooLarge("root multiplicity changed".into()));
        }
        let d = (moved.value - r.value).norm();
        if d > bound {
            return Err(Error::StepTooLarge(format!(
                "root {i} moved {d:.3e} > {bound:.3e}"
            )));
        }
    }
    let plan = basis.plan.remap(matching);
    let mut states = basis.state.pairs.clone();
    for st in states.iter_mut() {
        st.dep = st.dep.map(|r| matching[r]);
        st.entry = st.entry.map(|r| matching[r]);
    }
    let states = transported_state(new, &plan, &states)?;
    let anchors: Vec<Complex64> = basis.primitives.iter().map(|p| p.lifted.y_anchor).collect();
    let tag = fnv_mix(basis.branch_tag, root_words(new));
    assemble(
        new,
        plan,
        states,
        Some(&anchors),
        Some((
            basis.state.flip_a.clone(),
            basis.state.flip_b.clone(),
            basis.state.order.clone(),
        )),
        tag,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyfield::Root;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn f1(eps: Complex64) -> HyperellipticCurve {
        HyperellipticCurve::from_simple_roots(
            c(1.0, 0.0),
            &[eps, -eps, c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap()
    }

    fn f1_plan() -> PairingPlan {
        PairingPlan {
            pairs: vec![
                PlanPair {
                    roots: vec![0, 1],
                    collision: true,
                    vanishing: true,
                },
                PlanPair {
                    roots: vec![2, 3],
                    collision: false,
                    vanishing: false,
                },
                PlanPair {
                    roots: vec![4, 5],
                    collision: false,
                    vanishing: false,
                },
            ],
            mode: BasisMode::LoopChain,
        }
    }

    #[test]
    fn vanishing_loop_radius() {
        let curve = f1(c(0.1, 0.0));
        let p = vanishing_loop(&curve, &[0, 1]).unwrap();
        match p.pieces[0] {
            Piece::Arc { center, radius, .. } => {
                assert!(center.norm() < 1e-15);
                assert!((radius - 0.45).abs() < 1e-14);
            }
            _ => panic!("expected a circle"),
        }
    }

    #[test]
    fn crowded_cluster() {
        let curve = HyperellipticCurve::from_simple_roots(
            c(1.0, 0.0),
            &[c(0.1, 0.0), c(-0.1, 0.0), c(0.2, 0.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert!(matches!(
            vanishing_loop(&curve, &[0, 1]),
            Err(Error::ClusterCrowded { .. })
        ));
    }

    #[test]
    fn double_root_loop_uses_same_rule() {
        let mut roots = crate::polyfield::RootSet::simple(&[
            c(1.0, 0.0),
            c(2.0, 0.0),
            c(3.0, 0.0),
            c(4.0, 0.0),
        ])
        .roots;
        roots.insert(
            0,
            Root {
                value: c(0.0, 0.0),
                multiplicity: 2,
            },
        );
        let curve = HyperellipticCurve::from_roots(c(1.0, 0.0), roots).unwrap();
        let p = vanishing_loop(&curve, &[0]).unwrap();
        match p.pieces[0] {
            Piece::Arc { radius, .. } => assert!((radius - 0.5).abs() < 1e-15),
            _ => panic!(),
        }
    }

    #[test]
    fn straight_connection_and_detour() {
        let curve = f1(c(0.1, 0.0));
        let p = connecting_path(&curve, 0, 2).unwrap();
        assert_eq!(p.pieces.len(), 1);
        assert!((p.start() - c(0.1, 0.0)).norm() < 1e-15);
        assert!((p.end() - c(1.0, 0.0)).norm() < 1e-15);

        let curve = HyperellipticCurve::from_simple_roots(
            c(1.0, 0.0),
            &[c(0.1, 0.0), c(-0.1, 0.0), c(0.5, 0.0), c(1.0, 0.0)],
        )
        .unwrap();
        let p = connecting_path(&curve, 0, 3).unwrap();
        assert_eq!(p.pieces.len(), 3);
        match p.pieces[1] {
            Piece::Arc {
                center,
                radius,
                sweep,
                ..
            } => {
                assert!((center - c(0.5, 0.0)).norm() < 1e-15);
                assert!((radius - curve.clearance(2)).abs() < 1e-15);
                assert!((sweep + PI).abs() < 1e-15);
                // passes above: left of a rightward segment
                assert!(p.pieces[1].at(0.5).im > 0.0);
            }
            _ => panic!("expected a detour arc"),
        }
    }

    #[test]
    fn f1_basis_is_symplectic() {
        let curve = f1(c(0.1, 0.0));
        let b = build_cycle_basis(&curve, &f1_plan()).unwrap();
        assert_eq!(b.size(), 2);
        assert_eq!(b.vanishing, vec![false, true]);
        assert!(is_normal_form(&b.intersection, 2));
    }

    #[test]
    fn empty_plan_rejected() {
        let curve = HyperellipticCurve::from_simple_roots(c(1.0, 0.0), &[c(0.0, 0.0), c(1.0, 0.0)])
            .unwrap();
        let plan = PairingPlan {
            pairs: vec![],
            mode: BasisMode::LoopChain,
        };
        assert!(matches!(
            build_cycle_basis(&curve, &plan),
            Err(Error::PlanInconsistent(_))
        ));
    }

    #[test]
    fn f3_chain_pattern() {
        let eps = 0.1;
        let roots: Vec<Complex64> = (1..=4)
            .flat_map(|k| [c(2.0 * k as f64 + eps, 0.0), c(2.0 * k as f64 - eps, 0.0)])
            .collect();
        let curve = HyperellipticCurve::from_simple_roots(c(1.0, 0.0), &roots).unwrap();
        let plan = PairingPlan {
            pairs: (0..4)
                .map(|k| PlanPair {
                    roots: vec![2 * k, 2 * k + 1],
                    collision: true,
                    vanishing: true,
                })
                .collect(),
            mode: BasisMode::SummedLoops,
        };
        let b = build_cycle_basis(&curve, &plan).unwrap();
        assert_eq!(b.size(), 3);
        let m = primitive_matrix(&b.primitives);
        for k in 0..3 {
            let fk = b.state.flip_a[k] * b.state.flip_b[k];
            assert_eq!(m[k][3 + k] * fk, 1);
        }
        for k in 0..2 {
            let f = b.state.flip_a[k + 1] * b.state.flip_b[k];
            assert_eq!(m[k + 1][3 + k] * f, -1);
        }
    }

    #[test]
    fn identity_motion_is_identity() {
        let curve = f1(c(0.1, 0.0));
        let b = build_cycle_basis(&curve, &f1_plan()).unwrap();
        let same = deform_basis(&b, &curve, &curve, &[0, 1, 2, 3, 4, 5]).unwrap();
        for (p, q) in b.primitives.iter().zip(&same.primitives) {
            assert_eq!(p.path(), q.path());
            assert_eq!(p.lifted.y_anchor, q.lifted.y_anchor);
        }
        assert_eq!(b.intersection, same.intersection);
    }

    #[test]
    fn rotation_step_keeps_intersections() {
        let old = f1(c(0.1, 0.0));
        let new = f1(Complex64::from_polar(0.1, PI / 8.0));
        let b = build_cycle_basis(&old, &f1_plan()).unwrap();
        let perm = crate::polyfield::match_points(&old.root_values(), &new.root_values()).unwrap();
        let moved = deform_basis(&b, &old, &new, &perm).unwrap();
        assert_eq!(moved.intersection, b.intersection);
        assert_ne!(moved.branch_tag, b.branch_tag);
    }

    #[test]
    fn large_step_rejected() {
        let old = f1(c(0.1, 0.0));
        let new = f1(c(0.2, 0.0));
        let b = build_cycle_basis(&old, &f1_plan()).unwrap();
        assert!(matches!(
            deform_basis(&b, &old, &new, &[0, 1, 2, 3, 4, 5]),
            Err(Error::StepTooLarge(_))
        ));
    }
}
