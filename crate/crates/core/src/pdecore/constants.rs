use super::fem::{norm2, Geometry};
use super::field::FeField;
use super::norms::{grad_pow_smooth, lp_pow_smooth, trace_pow_smooth, BoundaryPart, BoundarySegs};
use super::PdeError;
use crate::crackmesh::CrackMesh;
use crate::geomkit::Point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Exponents of the planar Sobolev, trace and Friedrichs inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SobolevExponents {
    pub p: f64,
    pub n: u32,
    /// Interior exponent: `pN/(N-p)` below the dimension, `q` at `p = N`.
    pub pstar: f64,
    /// Optimal boundary exponent.
    pub s: f64,
    /// Gradient exponent of the Friedrichs inequality: `p`, or `Nq/(N+q)`
    /// at `p = N`.
    pub p1: f64,
    pub q: Option<f64>,
}

impl SobolevExponents {
    pub fn new(p: f64, q: Option<f64>) -> Result<Self, PdeError> {
        let n = 2.0;
        if !(p >= 1.0 && p <= n) {
            return Err(PdeError::BadExponent(p));
        }
        if p < n {
            Ok(SobolevExponents { p, n: 2, pstar: p * n / (n - p), s: (n - 1.0) * p / (n - p), p1: p, q })
        } else {
            let q = q.ok_or(PdeError::BadExponent(p))?;
            if !(q.is_finite() && q >= n / (n - 1.0)) {
                return Err(PdeError::BadExponent(q));
            }
            Ok(SobolevExponents { p, n: 2, pstar: q, s: (n - 1.0) * q / n, p1: n * q / (n + q), q: Some(q) })
        }
    }

    pub fn conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "UPPERCASE")]
pub enum ConstantMode {
    /// `||u||_q / ||u||_{W^{1,p}}`
    Sobolev { p: f64, q: f64 },
    /// `|| |u|^+ ||_{L^s(boundary)} / ||u||_{W^{1,p}}`
    Trace { p: f64, s: f64 },
    /// `||u||_{p*} / (||grad u||_{p1} + || |u|^+ ||_{L^s(boundary)})`
    Friedrichs { p: f64, q: Option<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateOptions {
    pub iters: usize,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for EstimateOptions {
    fn default() -> Self {
        EstimateOptions { iters: 200, seed: 0, restarts: 4 }
    }
}

#[derive(Debug, Clone)]
pub struct BestConstant {
    /// Largest ratio found: a lower bound on the discrete constant.
    pub constant: f64,
    pub maximizer: FeField,
    /// Ratio at the constant field.
    pub at_constant: f64,
    /// False when every restart ran out of iterations before stalling.
    pub converged: bool,
}

#[derive(Clone, Copy)]
enum Term {
    Lq(f64),
    Grad(f64),
    W1p(f64),
    Trace(f64),
}

/// A ratio `num(u) / sum(den(u))` of positively homogeneous norms.
pub(crate) struct Ratio {
    geo: Geometry,
    segs: BoundarySegs,
    num: Term,
    den: Vec<Term>,
}

impl Ratio {
    pub fn new(mesh: &CrackMesh, mode: ConstantMode) -> Result<Self, PdeError> {
        let check = |x: f64| if x.is_finite() && x >= 1.0 { Ok(x) } else { Err(PdeError::BadExponent(x)) };
        let (num, den) = match mode {
            ConstantMode::Sobolev { p, q } => (Term::Lq(check(q)?), vec![Term::W1p(check(p)?)]),
            ConstantMode::Trace { p, s } => {
                check(p)?;
                check(s)?;
                // admissible pairs below the dimension stop at the optimal s
                if p < 2.0 && s > p / (2.0 - p) + 1e-12 {
                    return Err(PdeError::BadExponent(s));
                }
                (Term::Trace(s), vec![Term::W1p(p)])
            }
            ConstantMode::Friedrichs { p, q } => {
                let e = SobolevExponents::new(p, q)?;
                (Term::Lq(e.pstar), vec![Term::Grad(e.p1), Term::Trace(e.s)])
            }
        };
        Ok(Ratio { geo: Geometry::new(mesh), segs: BoundarySegs::new(mesh, BoundaryPart::All), num, den })
    }

    /// Value and gradient of a term at smoothing `eta`.
    fn term(&self, t: Term, u: &[f64], eta: f64, grad: &mut [f64]) -> f64 {
        let n = u.len();
        let mut g = vec![0.0; n];
        let (val, e) = match t {
            Term::Lq(q) => (lp_pow_smooth(&self.geo, u, q, eta, &mut g), q),
            Term::Grad(p) => (grad_pow_smooth(&self.geo, u, p, eta, &mut g), p),
            Term::Trace(s) => (trace_pow_smooth(&self.segs, u, s, eta, &mut g), s),
            Term::W1p(p) => {
                let a = lp_pow_smooth(&self.geo, u, p, eta, &mut g);
                (a + grad_pow_smooth(&self.geo, u, p, eta, &mut g), p)
            }
        };
        let norm = val.powf(1.0 / e);
        if val > 0.0 {
            let c = norm / (e * val);
            for i in 0..n {
                grad[i] += c * g[i];
            }
        }
        norm
    }

    /// Ratio at `u`, with the gradient of its logarithm when requested.
    fn eval(&self, u: &[f64], eta: f64, grad: Option<&mut Vec<f64>>) -> f64 {
        let n = u.len();
        let mut gn = vec![0.0; n];
        let mut gd = vec![0.0; n];
        let num = self.term(self.num, u, eta, &mut gn);
        let den: f64 = self.den.iter().map(|&t| self.term(t, u, eta, &mut gd)).sum();
        if let Some(g) = grad {
            for i in 0..n {
                g[i] = gn[i] / num - gd[i] / den;
            }
        }
        num / den
    }

    /// Unsmoothed ratio.
    pub fn exact(&self, u: &[f64]) -> f64 {
        self.eval(u, 0.0, None)
    }
}

fn initial_field(mesh: &CrackMesh, rng: &mut ChaCha8Rng, centers: &[Point]) -> Vec<f64> {
    let r = mesh.tri.radius;
    let bumps = rng.gen_range(1..=3);
    let mut spec = Vec::new();
    for _ in 0..bumps {
        let c = if !centers.is_empty() && rng.gen_bool(0.5) {
            centers[rng.gen_range(0..centers.len())]
        } else {
            mesh.tri.center + Point::new(rng.gen_range(-r..r), rng.gen_range(-r..r))
        };
        let w = r * rng.gen_range(0.02..0.5);
        let a = rng.gen_range(0.5..1.0) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
        spec.push((c, w, a));
    }
    (0..mesh.n_dofs())
        .map(|d| {
            let x = mesh.dof_point(d);
            spec.iter().map(|&(c, w, a)| a * (-(x.dist(c) / w).powi(2)).exp()).sum::<f64>()
        })
        .collect()
}

const MAX_POCKET_CENTRES: usize = 64;

/// Fields supported on the pieces that cracks cut out of small balls around
/// crack vertices, with a sharp or radially ramped edge; the best one per
/// centre, best first. These jump across the crack, which smooth bumps cannot.
fn pocket_fields(mesh: &CrackMesh, ratio: &Ratio, count: usize) -> Vec<Vec<f64>> {
    if count == 0 {
        return Vec::new();
    }
    // polyline ends and junctions first, then a sample of the other vertices
    let polys = mesh.snapped.cracks();
    let mut tips: Vec<Point> = polys.iter().flat_map(|c| [c[0], c[c.len() - 1]]).collect();
    tips.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    tips.dedup();
    tips.truncate(MAX_POCKET_CENTRES);
    let inner: Vec<Point> = polys.iter().flat_map(|c| c[1..c.len().saturating_sub(1)].iter().copied()).collect();
    let room = MAX_POCKET_CENTRES - tips.len();
    if room > 0 && !inner.is_empty() {
        let stride = inner.len().div_ceil(room).max(1);
        tips.extend(inner.iter().step_by(stride).filter(|p| !tips.contains(p)).collect::<Vec<_>>());
    }
    let centroids: Vec<Point> = (0..mesh.n_triangles())
        .map(|k| {
            let [a, b, c] = mesh.corners(k);
            Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
        })
        .collect();
    let radii: Vec<f64> = (1..=8)
        .map(|k| mesh.tri.radius * 0.5f64.powi(k))
        .filter(|&w| w >= 1.5 * mesh.h)
        .collect();
    let Some(&w_max) = radii.first() else { return Vec::new() };
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    for c in &tips {
        let near: Vec<usize> = (0..mesh.n_triangles()).filter(|&t| centroids[t].dist(*c) < w_max).collect();
        let mut at_c: Option<(f64, Vec<f64>)> = None;
        for &w in &radii {
            let subset: Vec<usize> = near.iter().copied().filter(|&t| centroids[t].dist(*c) < w).collect();
            let (n, comp) = mesh.components_of(&subset);
            if n < 2 {
                continue;
            }
            let mut area = vec![0.0; n];
            for (i, &t) in subset.iter().enumerate() {
                area[comp[i]] += mesh.area(t);
            }
            let small = (0..n).min_by(|&i, &j| area[i].total_cmp(&area[j])).unwrap_or(0);
            let mut dofs: Vec<usize> = Vec::new();
            for (i, &t) in subset.iter().enumerate() {
                if comp[i] == small {
                    dofs.extend(mesh.corner_dofs[t]);
                }
            }
            dofs.sort_unstable();
            dofs.dedup();
            // a sharp cut along a jagged arc overstates the gradient
            for ramp in [0.0, 2.0 * mesh.h, 0.5 * w] {
                let mut u = vec![0.0; mesh.n_dofs()];
                for &d in &dofs {
                    u[d] = if ramp == 0.0 { 1.0 } else { ((w - mesh.dof_point(d).dist(*c)) / ramp).clamp(0.0, 1.0) };
                }
                let r = ratio.exact(&u);
                if r.is_finite() && at_c.as_ref().is_none_or(|b| r > b.0) {
                    at_c = Some((r, u));
                }
            }
        }
        best.extend(at_c);
    }
    best.sort_by(|a, b| b.0.total_cmp(&a.0));
    best.into_iter().take(count).map(|c| c.1).collect()
}

/// Lower bound on the best constant of `mode` over the P1 space, by
/// normalized gradient ascent from the constant field, `restarts` seeded
/// random bump fields and the best `restarts` crack pocket fields.
pub fn estimate_best_constant(
    mesh: &Arc<CrackMesh>,
    mode: ConstantMode,
    opts: &EstimateOptions,
) -> Result<BestConstant, PdeError> {
    let ratio = Ratio::new(mesh, mode)?;
    let n = mesh.n_dofs();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let centers: Vec<Point> = mesh.snapped.cracks().iter().flatten().copied().collect();
    let ones = vec![1.0; n];
    let at_constant = ratio.exact(&ones);
    let mut best = (at_constant, ones.clone());
    let mut converged = false;
    for start in 0..=opts.restarts {
        let mut u = if start == 0 { ones.clone() } else { initial_field(mesh, &mut rng, &centers) };
        let (r, stalled) = ascend(&ratio, &mut u, opts.iters);
        converged |= stalled;
        if r > best.0 {
            best = (r, u);
        }
    }
    for mut u in pocket_fields(mesh, &ratio, opts.restarts) {
        let (r, stalled) = ascend(&ratio, &mut u, opts.iters);
        converged |= stalled;
        if r > best.0 {
            best = (r, u);
        }
    }
    let maximizer = FeField::real(mesh.clone(), best.1)?;
    Ok(BestConstant { constant: best.0, maximizer, at_constant, converged })
}

/// Adaptive-step ascent on the log-ratio; returns the best exact ratio and
/// whether the step size collapsed before the iteration budget ran out.
fn ascend(ratio: &Ratio, u: &mut Vec<f64>, iters: usize) -> (f64, bool) {
    let n = u.len();
    let scale = |u: &[f64]| u.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let mut g = vec![0.0; n];
    let mut cur = ratio.eval(u, 1e-6 * scale(u), Some(&mut g));
    let mut best = ratio.exact(u);
    let mut best_u = u.clone();
    let mut tau = 0.05;
    for _ in 0..iters {
        let gn = norm2(&g);
        if gn == 0.0 || tau < 1e-7 {
            *u = best_u;
            return (best, true);
        }
        let un = norm2(u);
        let trial: Vec<f64> = u.iter().zip(&g).map(|(a, b)| a + tau * un * b / gn).collect();
        let teta = 1e-6 * scale(&trial);
        let mut tg = vec![0.0; n];
        let val = ratio.eval(&trial, teta, Some(&mut tg));
        if val > cur {
            *u = trial;
            g = tg;
            cur = val;
            tau *= 1.5;
            let e = ratio.exact(u);
            if e > best {
                best = e;
                best_u = u.clone();
            }
        } else {
            tau *= 0.5;
        }
    }
    *u = best_u;
    (best, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crackmesh::build_cracked_mesh;
    use crate::geomkit::{build_compact_set, SceneSpec};

    fn unit(cracks: Vec<Vec<Point>>, h: f64) -> Arc<CrackMesh> {
        let s = build_compact_set(SceneSpec {
            box_radius: 0.5,
            box_center: Point::new(0.5, 0.5),
            cracks,
            solids: vec![],
            label: String::new(),
        })
        .unwrap();
        Arc::new(build_cracked_mesh(&s, h).unwrap())
    }

    #[test]
    fn exponents() {
        let e = SobolevExponents::new(1.5, None).unwrap();
        assert_eq!((e.pstar, e.s, e.p1), (6.0, 3.0, 1.5));
        assert_eq!(e.conjugate(), 3.0);
        let e = SobolevExponents::new(2.0, Some(4.0)).unwrap();
        assert!((e.p1 - 4.0 / 3.0).abs() < 1e-15 && e.s == 2.0 && e.pstar == 4.0);
        assert!(SobolevExponents::new(2.0, None).is_err());
        assert!(SobolevExponents::new(2.5, None).is_err());
        let e = SobolevExponents::new(1.0, None).unwrap();
        assert_eq!((e.pstar, e.s), (2.0, 1.0));
    }

    #[test]
    fn constant_field_is_a_lower_bound() {
        let m = unit(vec![], 0.125);
        let opts = EstimateOptions { iters: 60, seed: 1, restarts: 2 };
        let r = estimate_best_constant(&m, ConstantMode::Sobolev { p: 1.5, q: 3.0 }, &opts).unwrap();
        // |D| = 1 so the ratio at u = 1 is 1
        assert!((r.at_constant - 1.0).abs() < 1e-12);
        assert!(r.constant >= r.at_constant);
        let ratio = Ratio::new(&m, ConstantMode::Sobolev { p: 1.5, q: 3.0 }).unwrap();
        assert_eq!(ratio.exact(r.maximizer.as_real().unwrap()), r.constant);
    }

    #[test]
    fn deterministic_for_seed() {
        let m = unit(vec![vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)]], 0.125);
        let opts = EstimateOptions { iters: 40, seed: 9, restarts: 2 };
        let mode = ConstantMode::Friedrichs { p: 1.5, q: None };
        let a = estimate_best_constant(&m, mode, &opts).unwrap();
        let b = estimate_best_constant(&m, mode, &opts).unwrap();
        assert_eq!(a.constant.to_bits(), b.constant.to_bits());
        assert!(a.constant.is_finite() && a.constant > 0.0);
    }

    #[test]
    fn log_ratio_gradient() {
        let m = unit(vec![vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)]], 0.25);
        let ratio = Ratio::new(&m, ConstantMode::Friedrichs { p: 1.5, q: None }).unwrap();
        let n = m.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 31) % 7) as f64 / 7.0).collect();
        let d: Vec<f64> = (0..n).map(|i| ((i * 17) % 5) as f64 / 5.0 - 0.4).collect();
        let mut g = vec![0.0; n];
        ratio.eval(&u, 1e-3, Some(&mut g));
        let h = 1e-6;
        let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + h * b).collect();
        let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - h * b).collect();
        let fd = (ratio.eval(&up, 1e-3, None).ln() - ratio.eval(&um, 1e-3, None).ln()) / (2.0 * h);
        let an: f64 = g.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!((fd - an).abs() < 1e-5 * an.abs().max(1e-2), "{fd} vs {an}");
    }

    #[test]
    fn rejects_bad_exponents() {
        let m = unit(vec![], 0.5);
        let o = EstimateOptions::default();
        assert!(estimate_best_constant(&m, ConstantMode::Sobolev { p: 0.5, q: 2.0 }, &o).is_err());
        assert!(estimate_best_constant(&m, ConstantMode::Trace { p: 1.5, s: 4.0 }, &o).is_err());
        assert!(estimate_best_constant(&m, ConstantMode::Friedrichs { p: 2.0, q: None }, &o).is_err());
    }
}
