use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A straight segment or circular arc parameterized by `s` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Piece {
    Segment {
        from: Complex64,
        to: Complex64,
    },
    /// `center + radius * exp(i (start + sweep s))`; positive sweep is counterclockwise.
    Arc {
        center: Complex64,
        radius: f64,
        start: f64,
        sweep: f64,
    },
}

impl Piece {
    pub fn at(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Segment { from, to } => from + (to - from) * s,
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => center + Complex64::from_polar(radius, start + sweep * s),
        }
    }

    /// Derivative with respect to `s`.
    pub fn deriv(&self, s: f64) -> Complex64 {
        match *self {
            Piece::Segment { from, to } => to - from,
            Piece::Arc {
                radius,
                start,
                sweep,
                ..
            } => Complex64::new(0.0, sweep) * Complex64::from_polar(radius, start + sweep * s),
        }
    }

    pub fn start(&self) -> Complex64 {
        self.at(0.0)
    }

    pub fn end(&self) -> Complex64 {
        self.at(1.0)
    }

    pub fn length(&self) -> f64 {
        match *self {
            Piece::Segment { from, to } => (to - from).norm(),
            Piece::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    pub fn reversed(&self) -> Piece {
        match *self {
            Piece::Segment { from, to } => Piece::Segment { from: to, to: from },
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => Piece::Arc {
                center,
                radius,
                start: start + sweep,
                sweep: -sweep,
            },
        }
    }

    /// Parameter of the point closest to `p`.
    pub fn closest_param(&self, p: Complex64) -> f64 {
        match *self {
            Piece::Segment { from, to } => {
                let d = to - from;
                let n2 = d.norm_sqr();
                if n2 == 0.0 {
                    return 0.0;
                }
                ((p - from) * d.conj()).re.clamp(0.0, n2) / n2
            }
            Piece::Arc { sweep, .. } => {
                if sweep.abs() >= TAU {
                    let s = self.arc_params_of(p);
                    return s.first().copied().unwrap_or(0.0);
                }
                let cands = self.arc_params_of(p);
                let mut best = (f64::INFINITY, 0.0);
                for s in cands.into_iter().chain([0.0, 1.0]) {
                    let d = (self.at(s) - p).norm();
                    if d < best.0 {
                        best = (d, s);
                    }
                }
                best.1
            }
        }
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        (self.at(self.closest_param(p)) - p).norm()
    }

    /// Parameters in `[0, 1]` at which an arc passes the polar angle of `p`
    /// about its center (several when the sweep exceeds a full turn).
    pub(crate) fn arc_params_of(&self, p: Complex64) -> Vec<f64> {
        match *self {
            Piece::Segment { .. } => Vec::new(),
            Piece::Arc {
                center,
                start,
                sweep,
                ..
            } => {
                if sweep == 0.0 {
                    return Vec::new();
                }
                let theta = (p - center).arg();
                let base = (theta - start).rem_euclid(TAU);
                let mut out = Vec::new();
                // candidate angles start + base + 2 pi k, for either sweep sign
                let turns = (sweep.abs() / TAU).ceil() as i64 + 1;
                for k in -turns..=turns {
                    let s = (base + TAU * k as f64) / sweep;
                    if (0.0..=1.0).contains(&s) {
                        out.push(s);
                    }
                }
                out.sort_by(f64::total_cmp);
                out
            }
        }
    }
}

/// A piecewise path; `start_root`/`end_root` name curve roots at which the path
/// is allowed to terminate.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub pieces: Vec<Piece>,
    pub start_root: Option<usize>,
    pub end_root: Option<usize>,
}

impl Path {
    pub fn new(pieces: Vec<Piece>) -> Self {
        Path {
            pieces,
            start_root: None,
            end_root: None,
        }
    }

    pub fn with_roots(mut self, start: Option<usize>, end: Option<usize>) -> Self {
        self.start_root = start;
        self.end_root = end;
        self
    }

    pub fn circle(center: Complex64, radius: f64, start_angle: f64) -> Self {
        Path::new(vec![Piece::Arc {
            center,
            radius,
            start: start_angle,
            sweep: TAU,
        }])
    }

    pub fn start(&self) -> Complex64 {
        self.pieces[0].start()
    }

    pub fn end(&self) -> Complex64 {
        self.pieces[self.pieces.len() - 1].end()
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(Piece::length).sum()
    }

    pub fn is_closed(&self) -> bool {
        (self.start() - self.end()).norm() <= 1e-12 * (1.0 + self.length())
    }

    pub fn reversed(&self) -> Path {
        Path {
            pieces: self.pieces.iter().rev().map(Piece::reversed).collect(),
            start_root: self.end_root,
            end_root: self.start_root,
        }
    }

    pub fn distance_to(&self, p: Complex64) -> f64 {
        self.pieces
            .iter()
            .map(|pc| pc.distance_to(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Consecutive pieces must share endpoints.
    pub fn validate(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::PlanInconsistent("empty path".into()));
        }
        let tol = 1e-10 * (1.0 + self.length());
        for w in self.pieces.windows(2) {
            if (w[0].end() - w[1].start()).norm() > tol {
                return Err(Error::PlanInconsistent(format!(
                    "path pieces do not join: {} vs {}",
                    w[0].end(),
                    w[1].start()
                )));
            }
        }
        Ok(())
    }
}

/// Smallest signed angle `a - b` in `(-pi, pi]`.
pub(crate) fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn arc_endpoints_and_derivative() {
        let a = Piece::Arc {
            center: c(1.0, 0.0),
            radius: 2.0,
            start: 0.0,
            sweep: PI,
        };
        assert!((a.start() - c(3.0, 0.0)).norm() < 1e-15);
        assert!((a.end() - c(-1.0, 0.0)).norm() < 1e-15);
        let h = 1e-6;
        let fd = (a.at(0.3 + h) - a.at(0.3 - h)) / (2.0 * h);
        assert!((fd - a.deriv(0.3)).norm() < 1e-8);
        assert!((a.length() - 2.0 * PI).abs() < 1e-15);
    }

    #[test]
    fn reversal_swaps_ends() {
        let p = Path::new(vec![
            Piece::Segment {
                from: c(0.0, 0.0),
                to: c(1.0, 0.0),
            },
            Piece::Arc {
                center: c(1.0, 1.0),
                radius: 1.0,
                start: -PI / 2.0,
                sweep: PI / 2.0,
            },
        ])
        .with_roots(Some(3), None);
        p.validate().unwrap();
        let r = p.reversed();
        r.validate().unwrap();
        assert!((r.start() - p.end()).norm() < 1e-15);
        assert!((r.end() - p.start()).norm() < 1e-15);
        assert_eq!(r.end_root, Some(3));
    }

    #[test]
    fn distances() {
        let s = Piece::Segment {
            from: c(0.0, 0.0),
            to: c(2.0, 0.0),
        };
        assert!((s.distance_to(c(1.0, 0.5)) - 0.5).abs() < 1e-15);
        assert!((s.distance_to(c(3.0, 0.0)) - 1.0).abs() < 1e-15);
        let a = Piece::Arc {
            center: c(0.0, 0.0),
            radius: 1.0,
            start: 0.0,
            sweep: PI / 2.0,
        };
        assert!((a.distance_to(c(0.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((a.distance_to(c(-2.0, 0.0)) - 5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn multi_turn_arc_params() {
        let a = Piece::Arc {
            center: c(0.0, 0.0),
            radius: 1.0,
            start: 0.0,
            sweep: -2.5 * TAU,
        };
        let s = a.arc_params_of(c(0.0, 1.0));
        assert_eq!(s.len(), 2);
        for v in s {
            assert!((a.at(v) - c(0.0, 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn angle_diff_wraps() {
        assert!((angle_diff(0.1, TAU - 0.1) - 0.2).abs() < 1e-12);
        assert!((angle_diff(-3.0, 3.0) - (TAU - 6.0)).abs() < 1e-12);
    }
}
