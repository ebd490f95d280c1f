use num_complex::Complex64;

use super::path::Piece;

fn cross(a: Complex64, b: Complex64) -> f64 {
    a.re * b.im - a.im * b.re
}

fn in_half_open(s: f64) -> bool {
    (0.0..1.0).contains(&s)
}

/// Transversal crossings of two pieces as parameter pairs in `[0, 1)`.
pub(crate) fn piece_crossings(p: &Piece, q: &Piece) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    match (*p, *q) {
        (Piece::Segment { from: a, to: b }, Piece::Segment { from: c, to: d }) => {
            let (u, v) = (b - a, d - c);
            let den = cross(u, v);
            if den.abs() <= 1e-300 {
                return out;
            }
            let w = c - a;
            let s = cross(w, v) / den;
            let t = cross(w, u) / den;
            if in_half_open(s) && in_half_open(t) {
                out.push((s, t));
            }
        }
        (Piece::Segment { .. }, Piece::Arc { .. }) => {
            for (s, t) in seg_arc(p, q) {
                out.push((s, t));
            }
        }
        (Piece::Arc { .. }, Piece::Segment { .. }) => {
            for (t, s) in seg_arc(q, p) {
                out.push((s, t));
            }
        }
        (
            Piece::Arc {
                center: c1,
                radius: r1,
                ..
            },
            Piece::Arc {
                center: c2,
                radius: r2,
                ..
            },
        ) => {
            let d = (c2 - c1).norm();
            if d <= 1e-300 || d > r1 + r2 || d < (r1 - r2).abs() {
                return out;
            }
            let a = (r1 * r1 - r2 * r2 + d * d) / (2.0 * d);
            let h = (r1 * r1 - a * a).max(0.0).sqrt();
            let u = (c2 - c1) / d;
            let base = c1 + u * a;
            let off = Complex64::new(0.0, h) * u;
            let pts = if h == 0.0 {
                vec![base]
            } else {
                vec![base + off, base - off]
            };
            for z in pts {
                for s in p.arc_params_of(z) {
                    for t in q.arc_params_of(z) {
                        if in_half_open(s) && in_half_open(t) {
                            out.push((s, t));
                        }
                    }
                }
            }
        }
    }
    out
}

fn seg_arc(seg: &Piece, arc: &Piece) -> Vec<(f64, f64)> {
    let (a, b) = match *seg {
        Piece::Segment { from, to } => (from, to),
        _ => unreachable!(),
    };
    let (c, r) = match *arc {
        Piece::Arc { center, radius, .. } => (center, radius),
        _ => unreachable!(),
    };
    let d = b - a;
    let w = a - c;
    let qa = d.norm_sqr();
    if qa == 0.0 {
        return Vec::new();
    }
    let qb = 2.0 * (d.conj() * w).re;
    let qc = w.norm_sqr() - r * r;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return Vec::new();
    }
    let sq = disc.sqrt();
    // numerically stable pair of roots
    let sgn = if qb >= 0.0 { 1.0 } else { -1.0 };
    let t = -0.5 * (qb + sgn * sq);
    let mut ss = Vec::new();
    if t != 0.0 {
        ss.push(t / qa);
        ss.push(qc / t);
    } else {
        ss.push((-qb + sq) / (2.0 * qa));
        ss.push((-qb - sq) / (2.0 * qa));
    }
    if disc == 0.0 {
        ss.truncate(1);
    }
    let mut out = Vec::new();
    for s in ss {
        if !in_half_open(s) {
            continue;
        }
        let z = seg.at(s);
        for t in arc.arc_params_of(z) {
            if in_half_open(t) {
                out.push((s, t));
            }
        }
    }
    out
}
