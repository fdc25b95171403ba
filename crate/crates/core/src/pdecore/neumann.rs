use super::fem::{dot, norm2, pcg, Csr, Geometry, MIDPOINTS};
use super::field::{FeField, SourceData};
use super::PdeError;
use crate::crackmesh::CrackMesh;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeumannOptions {
    /// Starting regularization; divided by 10 per stage down to `eps_floor`.
    pub eps0: f64,
    pub eps_floor: f64,
    /// Bound on the Euclidean norm of the unregularized weak-form residual.
    pub tol: f64,
    /// Newton iterations per stage.
    pub max_iter: usize,
}

impl Default for NeumannOptions {
    fn default() -> Self {
        NeumannOptions { eps0: 1.0, eps_floor: 1e-8, tol: 1e-10, max_iter: 100 }
    }
}

/// Sources sampled at midpoint quadrature nodes, and the load vector.
pub(crate) struct Problem {
    pub geo: Geometry,
    pub p: f64,
    load: Vec<f64>,
}

impl Problem {
    pub fn new(mesh: &CrackMesh, p: f64, src: &SourceData) -> Result<Self, PdeError> {
        let geo = Geometry::new(mesh);
        let mut load = vec![0.0; geo.n_dofs];
        for k in 0..geo.len() {
            let mut fk = [0.0; 3];
            let (mut fx, mut fy) = (0.0, 0.0);
            for (q, b) in MIDPOINTS.points.iter().enumerate() {
                let x = geo.point(k, b);
                fk[q] = src.f.eval(x);
                if src.has_vector_part() {
                    fx += MIDPOINTS.weights[q] * src.fx.eval(x);
                    fy += MIDPOINTS.weights[q] * src.fy.eval(x);
                }
                for i in 0..3 {
                    load[geo.dofs[k][i]] += geo.area[k] * MIDPOINTS.weights[q] * fk[q] * b[i];
                }
            }
            for i in 0..3 {
                let g = geo.grads[k][i];
                load[geo.dofs[k][i]] += geo.area[k] * (fx * g.x + fy * g.y);
            }
            if fk.iter().any(|v| !v.is_finite()) || !fx.is_finite() || !fy.is_finite() {
                return Err(PdeError::NonFinite);
            }
        }
        Ok(Problem { geo, p, load })
    }

    /// Regularized energy; `eps = 0` gives the functional itself.
    pub fn energy(&self, u: &[f64], eps: f64) -> f64 {
        let (p, geo) = (self.p, &self.geo);
        let mut e = 0.0;
        for k in 0..geo.len() {
            let g = geo.gradient(k, u);
            let mut ek = (eps * eps + g.dot(g)).powf(0.5 * p) / p;
            for (q, b) in MIDPOINTS.points.iter().enumerate() {
                let v = geo.value(k, u, b);
                ek += MIDPOINTS.weights[q] * ((eps * eps + v * v).powf(0.5 * p) / p);
            }
            e += geo.area[k] * ek;
        }
        e - dot(&self.load, u)
    }

    /// Gradient of the regularized energy. At `eps = 0` this is the weak-form
    /// residual tested against each basis function.
    pub fn residual(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let (p, geo) = (self.p, &self.geo);
        let mut r: Vec<f64> = self.load.iter().map(|l| -l).collect();
        for k in 0..geo.len() {
            let (d, a) = (geo.dofs[k], geo.area[k]);
            let g = geo.gradient(k, u);
            let c = weight(g.dot(g), eps, p);
            for i in 0..3 {
                r[d[i]] += a * c * g.dot(geo.grads[k][i]);
            }
            for (q, b) in MIDPOINTS.points.iter().enumerate() {
                let v = geo.value(k, u, b);
                let s = MIDPOINTS.weights[q] * weight(v * v, eps, p) * v;
                for i in 0..3 {
                    r[d[i]] += a * s * b[i];
                }
            }
        }
        r
    }

    /// Hessian of the regularized energy.
    fn hessian(&self, u: &[f64], eps: f64) -> Csr {
        let (p, geo) = (self.p, &self.geo);
        let mut t = Vec::with_capacity(geo.len() * 9 * 2);
        for k in 0..geo.len() {
            let (d, a, gr) = (geo.dofs[k], geo.area[k], geo.grads[k]);
            let g = geo.gradient(k, u);
            let s2 = eps * eps + g.dot(g);
            let (c0, c1) = if p == 2.0 { (1.0, 0.0) } else { (s2.powf(0.5 * p - 1.0), (p - 2.0) * s2.powf(0.5 * p - 2.0)) };
            let mut m = [[0.0; 3]; 3];
            for (q, b) in MIDPOINTS.points.iter().enumerate() {
                let v = geo.value(k, u, b);
                let w2 = eps * eps + v * v;
                let c = if p == 2.0 {
                    MIDPOINTS.weights[q]
                } else {
                    MIDPOINTS.weights[q] * w2.powf(0.5 * p - 2.0) * (eps * eps + (p - 1.0) * v * v)
                };
                for i in 0..3 {
                    for j in 0..3 {
                        m[i][j] += c * b[i] * b[j];
                    }
                }
            }
            for i in 0..3 {
                for j in 0..3 {
                    let kij = c0 * gr[i].dot(gr[j]) + c1 * g.dot(gr[i]) * g.dot(gr[j]);
                    t.push((d[i], d[j], a * (kij + m[i][j])));
                }
            }
        }
        Csr::from_triplets(geo.n_dofs, t)
    }

    fn linear_solve(&self, a: &Csr, b: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; b.len()];
        pcg(a, b, &mut x, 1e-14, 20 * b.len() + 100);
        x
    }
}

/// `(eps^2 + s2)^{(p-2)/2}`, with the unregularized value 0 at `s2 = 0`.
fn weight(s2: f64, eps: f64, p: f64) -> f64 {
    let t = eps * eps + s2;
    if t == 0.0 {
        0.0
    } else {
        t.powf(0.5 * p - 1.0)
    }
}

/// Result of a Neumann solve.
#[derive(Debug, Clone)]
pub struct NeumannSolution {
    pub field: FeField,
    /// Euclidean norm of the unregularized residual vector.
    pub residual: f64,
    pub eps: f64,
    pub newton_steps: usize,
}

/// Discrete minimizer of `1/p int |grad v|^p + |v|^p - int f v - int F . grad v`.
pub fn solve_neumann(
    mesh: &Arc<CrackMesh>,
    p: f64,
    src: &SourceData,
    opts: &NeumannOptions,
) -> Result<NeumannSolution, PdeError> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(PdeError::BadExponent(p));
    }
    let prob = Problem::new(mesh, p, src)?;
    if p == 2.0 {
        let h = prob.hessian(&vec![0.0; prob.geo.n_dofs], 0.0);
        let u = prob.linear_solve(&h, &prob.load);
        let residual = norm2(&prob.residual(&u, 0.0));
        let field = FeField::real(mesh.clone(), u)?;
        if residual > opts.tol {
            return Err(PdeError::NoConvergence { residual, field: Box::new(field) });
        }
        return Ok(NeumannSolution { field, residual, eps: 0.0, newton_steps: 1 });
    }
    let mut u = vec![0.0; prob.geo.n_dofs];
    let mut eps = opts.eps0;
    let mut steps = 0;
    loop {
        steps += newton(&prob, &mut u, eps, opts);
        let residual = norm2(&prob.residual(&u, 0.0));
        log::debug!("neumann p={p} eps={eps:e} residual={residual:e}");
        if residual <= opts.tol {
            let (residual, extra) = polish(&prob, &mut u, eps, residual);
            let field = FeField::real(mesh.clone(), u)?;
            return Ok(NeumannSolution { field, residual, eps, newton_steps: steps + extra });
        }
        if eps <= opts.eps_floor {
            let field = FeField::real(mesh.clone(), u)?;
            return Err(PdeError::NoConvergence { residual, field: Box::new(field) });
        }
        eps = (eps / 10.0).max(opts.eps_floor);
    }
}

/// Quasi-Newton steps on the unregularized residual with the regularized
/// Hessian, kept while they reduce the residual.
fn polish(prob: &Problem, u: &mut Vec<f64>, eps: f64, mut residual: f64) -> (f64, usize) {
    let mut steps = 0;
    for _ in 0..3 {
        let g = prob.residual(u, 0.0);
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let du = prob.linear_solve(&prob.hessian(u, eps), &neg);
        let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + b).collect();
        let r = norm2(&prob.residual(&trial, 0.0));
        if !(r < residual) {
            break;
        }
        *u = trial;
        residual = r;
        steps += 1;
    }
    (residual, steps)
}

/// Damped Newton on the regularized energy; returns the step count.
fn newton(prob: &Problem, u: &mut Vec<f64>, eps: f64, opts: &NeumannOptions) -> usize {
    let mut g = prob.residual(u, eps);
    let mut gn = norm2(&g);
    for it in 0..opts.max_iter {
        if gn <= 0.1 * opts.tol {
            return it;
        }
        let h = prob.hessian(u, eps);
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let du = prob.linear_solve(&h, &neg);
        let slope = dot(&g, &du);
        let e0 = prob.energy(u, eps);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + t * b).collect();
            if prob.energy(&trial, eps) <= e0 + 1e-4 * t * slope {
                accepted = Some(trial);
                break;
            }
            t *= 0.5;
        }
        // at round-off level the energy test is blind; fall back on the gradient
        let trial = accepted.unwrap_or_else(|| u.iter().zip(&du).map(|(a, b)| a + b).collect());
        let gt = prob.residual(&trial, eps);
        let gtn = norm2(&gt);
        if gtn >= gn && t < 1e-9 {
            return it;
        }
        *u = trial;
        g = gt;
        gn = gtn;
    }
    opts.max_iter
}
