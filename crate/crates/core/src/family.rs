//! One-parameter root families and transport of cycle bases along them.
//!
//! A family lists its roots pair by pair. Colliding pairs sit at
//! `center ± eps * direction`, spectator pairs stay put, and the whole
//! polynomial carries an extra complex scale `l`. Roots are moved
//! symbolically, so the stratum `eps = 0` is reached exactly with double
//! roots instead of a numerically merged cluster.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::contour::{build_cycle_basis, deform_basis, BasisMode, CycleBasis, PairingPlan, PlanPair};
use crate::error::{Error, Result};
use crate::polyfield::{match_points, Root};
use crate::surface::HyperellipticCurve;

/// Recursion budget when a transport step has to be split.
const MAX_SPLIT_DEPTH: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyPair {
    /// Roots `center ± eps * direction`; `fixed_eps` pins the pair away from
    /// the family parameter.
    Colliding {
        center: Complex64,
        direction: Complex64,
        fixed_eps: Option<f64>,
    },
    Spectator { roots: [Complex64; 2] },
}

impl FamilyPair {
    pub fn colliding(center: f64) -> Self {
        FamilyPair::Colliding {
            center: Complex64::new(center, 0.0),
            direction: Complex64::new(1.0, 0.0),
            fixed_eps: None,
        }
    }

    pub fn spectator(a: f64, b: f64) -> Self {
        FamilyPair::Spectator {
            roots: [Complex64::new(a, 0.0), Complex64::new(b, 0.0)],
        }
    }

    /// Whether the pair follows the family parameter.
    pub fn moves(&self) -> bool {
        matches!(self, FamilyPair::Colliding { fixed_eps: None, .. })
    }

    fn roots(&self, eps: Complex64) -> [Complex64; 2] {
        match *self {
            FamilyPair::Colliding {
                center,
                direction,
                fixed_eps,
            } => {
                let e = fixed_eps.map(|f| Complex64::new(f, 0.0)).unwrap_or(eps);
                [center + e * direction, center - e * direction]
            }
            FamilyPair::Spectator { roots } => roots,
        }
    }
}

/// Point of the two-dimensional parameter space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Param {
    pub eps: Complex64,
    pub scale: Complex64,
}

impl Param {
    pub fn eps(eps: f64) -> Self {
        Param {
            eps: Complex64::new(eps, 0.0),
            scale: Complex64::new(1.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Family {
    pub pairs: Vec<FamilyPair>,
    pub lead: Complex64,
    pub mode: BasisMode,
    /// Parameter at which the cycle basis is first built.
    pub base: Param,
}

/// A basis carried to some parameter value, with the curve it lives on.
#[derive(Debug, Clone)]
pub struct Transported {
    pub param: Param,
    pub curve: HyperellipticCurve,
    pub basis: CycleBasis,
}

impl Family {
    /// `(z^2 - eps^2)(z-1)(z-2)(z-3)(z-4)`: one vanishing pair at the origin
    /// and two spectator pairs, genus 2.
    pub fn f1() -> Self {
        Family {
            pairs: vec![
                FamilyPair::colliding(0.0),
                FamilyPair::spectator(1.0, 2.0),
                FamilyPair::spectator(3.0, 4.0),
            ],
            lead: Complex64::new(1.0, 0.0),
            mode: BasisMode::LoopChain,
            base: Param::eps(0.1),
        }
    }

    /// `prod_k ((z - 2k)^2 - eps^2)`, `k = 1..4`: four pairs colliding at once,
    /// genus 3.
    pub fn f3() -> Self {
        Family {
            pairs: (1..=4).map(|k| FamilyPair::colliding(2.0 * k as f64)).collect(),
            lead: Complex64::new(1.0, 0.0),
            mode: BasisMode::SummedLoops,
            base: Param::eps(0.1),
        }
    }

    /// The family with only pair `moving` following `eps`; the others are
    /// frozen at their base separation.
    pub fn single_pair(&self, moving: usize) -> Self {
        let mut f = self.clone();
        for (i, p) in f.pairs.iter_mut().enumerate() {
            if let FamilyPair::Colliding { fixed_eps, .. } = p {
                *fixed_eps = if i == moving {
                    None
                } else {
                    Some(fixed_eps.unwrap_or(self.base.eps.norm()))
                };
            }
        }
        f
    }

    pub fn root_values(&self, p: Param) -> Vec<Complex64> {
        self.pairs.iter().flat_map(|pair| pair.roots(p.eps)).collect()
    }

    pub fn curve_at(&self, p: Param) -> Result<HyperellipticCurve> {
        HyperellipticCurve::from_simple_roots(self.lead * p.scale, &self.root_values(p))
    }

    /// Cycle plan with roots `2k, 2k+1` forming pair `k`. All colliding pairs,
    /// frozen or not, are tagged as vanishing so that the cycle order does not
    /// depend on which pairs move.
    pub fn plan(&self) -> PairingPlan {
        PairingPlan {
            pairs: self
                .pairs
                .iter()
                .enumerate()
                .map(|(k, p)| {
                    let collision = matches!(p, FamilyPair::Colliding { .. });
                    PlanPair {
                        roots: vec![2 * k, 2 * k + 1],
                        collision,
                        vanishing: collision,
                    }
                })
                .collect(),
            mode: self.mode,
        }
    }

    /// Curve at `eps = 0` with each moving pair merged into a double root,
    /// and a plan over the remaining pairs. Only defined when the moving
    /// pairs form a prefix of a loop chain (their cycles are then exactly the
    /// vanishing ones).
    pub fn nodal(&self, scale: Complex64) -> Result<(HyperellipticCurve, PairingPlan)> {
        let mut roots = Vec::new();
        let mut pairs = Vec::new();
        for p in &self.pairs {
            if p.moves() {
                if let FamilyPair::Colliding { center, .. } = *p {
                    roots.push(Root {
                        value: center,
                        multiplicity: 2,
                    });
                }
            }
        }
        for p in self.pairs.iter().filter(|p| !p.moves()) {
            let first = roots.len();
            for r in p.roots(Complex64::new(0.0, 0.0)) {
                roots.push(Root {
                    value: r,
                    multiplicity: 1,
                });
            }
            pairs.push(PlanPair {
                roots: vec![first, first + 1],
                collision: matches!(p, FamilyPair::Colliding { .. }),
                vanishing: false,
            });
        }
        let curve = HyperellipticCurve::from_roots(self.lead * scale, roots)?;
        Ok((
            curve,
            PairingPlan {
                pairs,
                mode: self.mode,
            },
        ))
    }

    pub fn start(&self) -> Result<Transported> {
        let curve = self.curve_at(self.base)?;
        let basis = build_cycle_basis(&curve, &self.plan())?;
        Ok(Transported {
            param: self.base,
            curve,
            basis,
        })
    }

    /// Carries `from` along `path(t)`, `t` in `[0, 1]`, in `steps` equal
    /// steps; steps the basis cannot follow are split recursively.
    pub fn transport_along(
        &self,
        from: &Transported,
        path: &dyn Fn(f64) -> Param,
        steps: usize,
    ) -> Result<Transported> {
        let mut cur = from.clone();
        for k in 0..steps {
            let t0 = k as f64 / steps as f64;
            let t1 = (k + 1) as f64 / steps as f64;
            cur = self.step(&cur, path, t0, t1, 0)?;
        }
        Ok(cur)
    }

    fn step(
        &self,
        cur: &Transported,
        path: &dyn Fn(f64) -> Param,
        t0: f64,
        t1: f64,
        depth: usize,
    ) -> Result<Transported> {
        let p1 = path(t1);
        let attempt = (|| {
            let curve = self.curve_at(p1)?;
            let matching = match_points(&cur.curve.root_values(), &curve.root_values())?;
            let basis = deform_basis(&cur.basis, &cur.curve, &curve, &matching)?;
            Ok(Transported {
                param: p1,
                curve,
                basis,
            })
        })();
        match attempt {
            Err(Error::StepTooLarge(_)) | Err(Error::AmbiguousMatching { .. })
                if depth < MAX_SPLIT_DEPTH =>
            {
                let tm = 0.5 * (t0 + t1);
                let mid = self.step(cur, path, t0, tm, depth + 1)?;
                self.step(&mid, path, tm, t1, depth + 1)
            }
            other => other,
        }
    }

    /// Carries `from` to `to` along a log-polar path: `eps` first, then the
    /// scale, each rotated by at most `pi/16` and scaled by at most `10^(1/8)`
    /// per step.
    pub fn transport_to(&self, from: &Transported, to: Param) -> Result<Transported> {
        let a = from.param;
        let mid = Param {
            eps: to.eps,
            scale: a.scale,
        };
        let leg1 = log_polar(a.eps, to.eps);
        let cur = match leg1 {
            Some((n, f)) => self.transport_along(from, &|t| Param { eps: f(t), ..a }, n)?,
            None => from.clone(),
        };
        let leg2 = log_polar(mid.scale, to.scale);
        match leg2 {
            Some((n, f)) => self.transport_along(&cur, &|t| Param { scale: f(t), ..mid }, n),
            None => Ok(cur),
        }
    }
}

/// Step count and interpolant of the log-polar path between two nonzero
/// complex numbers, rotating through the shorter angle.
#[allow(clippy::type_complexity)]
fn log_polar(a: Complex64, b: Complex64) -> Option<(usize, Box<dyn Fn(f64) -> Complex64>)> {
    if a == b {
        return None;
    }
    let (ra, pa) = a.to_polar();
    let (rb, pb) = b.to_polar();
    let mut dp = pb - pa;
    while dp > PI {
        dp -= 2.0 * PI;
    }
    while dp <= -PI {
        dp += 2.0 * PI;
    }
    let dl = (rb / ra).ln();
    let n_rot = (dp.abs() / (PI / 16.0)).ceil();
    let n_mag = (dl.abs() / (10f64.ln() / 8.0)).ceil();
    let n = n_rot.max(n_mag).max(1.0) as usize;
    let la = ra.ln();
    Some((
        n,
        Box::new(move |t| {
            if t >= 1.0 {
                b
            } else {
                Complex64::from_polar((la + t * dl).exp(), pa + t * dp)
            }
        }),
    ))
}

/// `eps0 * exp(2 pi i * turns * t)`.
pub fn eps_loop(base: Param, turns: f64) -> impl Fn(f64) -> Param {
    move |t| Param {
        eps: base.eps * Complex64::from_polar(1.0, 2.0 * PI * turns * t),
        ..base
    }
}
