use super::fem::{Geometry, GAUSS3_T, GAUSS3_W, MIDPOINTS};
use super::field::FeField;
use super::PdeError;
use crate::crackmesh::{build_cracked_mesh_with, BoundaryKind, CrackMesh, MeshOptions};
use crate::geomkit::{point_in_polygon, CompactScene, Point};
use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Symmetric matrix `[[a11, a12], [a12, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sym2 {
    pub a11: f64,
    pub a12: f64,
    pub a22: f64,
}

impl Sym2 {
    pub const IDENTITY: Sym2 = Sym2 { a11: 1.0, a12: 0.0, a22: 1.0 };

    pub fn scaled(s: f64) -> Self {
        Sym2 { a11: s, a12: 0.0, a22: s }
    }

    pub fn apply(&self, v: Point) -> Point {
        Point::new(self.a11 * v.x + self.a12 * v.y, self.a12 * v.x + self.a22 * v.y)
    }

    pub fn eigenvalues(&self) -> (f64, f64) {
        let m = 0.5 * (self.a11 + self.a22);
        let r = (0.25 * (self.a11 - self.a22).powi(2) + self.a12 * self.a12).sqrt();
        (m - r, m + r)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> Sym2 {
        let (l0, l1) = self.eigenvalues();
        let (s0, s1) = (l0.max(0.0).sqrt(), l1.max(0.0).sqrt());
        if (l1 - l0).abs() < 1e-14 * l1.abs().max(1.0) {
            return Sym2::scaled(s0);
        }
        // sqrt(A) = (A + sqrt(l0 l1) I) / (s0 + s1)
        let t = s0 * s1;
        let d = s0 + s1;
        Sym2 { a11: (self.a11 + t) / d, a12: self.a12 / d, a22: (self.a22 + t) / d }
    }
}

/// Polygonal piece of the coefficient partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRegion {
    pub polygon: Vec<Point>,
    pub sigma: Sym2,
    pub q: f64,
}

/// Piecewise-constant `(sigma, q)` on polygons inside `B_{r0}`, identity and
/// one elsewhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientField {
    pub r0: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub c0: f64,
    pub c1: f64,
    pub regions: Vec<CoeffRegion>,
}

impl CoefficientField {
    pub fn identity() -> Self {
        CoefficientField { r0: 0.0, lambda0: 1.0, lambda1: 1.0, c0: 1.0, c1: 1.0, regions: vec![] }
    }

    /// Validates ellipticity and bounds on every region.
    pub fn new(
        r0: f64,
        (lambda0, lambda1): (f64, f64),
        (c0, c1): (f64, f64),
        regions: Vec<CoeffRegion>,
    ) -> Result<Self, PdeError> {
        let bad = |m: String| Err(PdeError::BadCoefficient(m));
        if !(r0 >= 0.0 && lambda0 > 0.0 && lambda0 <= 1.0 && lambda1 >= 1.0 && c0 > 0.0 && c0 <= 1.0 && c1 >= 1.0) {
            return bad("bounds must satisfy 0 < lambda0 <= 1 <= lambda1 and 0 < c0 <= 1 <= c1".into());
        }
        for (i, r) in regions.iter().enumerate() {
            if r.polygon.len() < 3 {
                return bad(format!("region {i} needs at least 3 vertices"));
            }
            if r.polygon.iter().any(|p| p.norm() > r0 + 1e-12) {
                return bad(format!("region {i} leaves the ball of radius {r0}"));
            }
            let (l0, l1) = r.sigma.eigenvalues();
            if l0 < lambda0 - 1e-12 || l1 > lambda1 + 1e-12 {
                return bad(format!("region {i}: eigenvalues ({l0}, {l1}) outside [{lambda0}, {lambda1}]"));
            }
            if r.q < c0 || r.q > c1 {
                return bad(format!("region {i}: q = {} outside [{c0}, {c1}]", r.q));
            }
        }
        Ok(CoefficientField { r0, lambda0, lambda1, c0, c1, regions })
    }

    pub fn eval(&self, p: Point) -> (Sym2, f64) {
        if p.norm() <= self.r0 {
            if let Some(r) = self.regions.iter().find(|r| point_in_polygon(p, &r.polygon)) {
                return (r.sigma, r.q);
            }
        }
        (Sym2::IDENTITY, 1.0)
    }
}

/// Wavenumber, direction and truncation of a scattering problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterConfig {
    pub k: f64,
    pub k_lo: f64,
    pub k_hi: f64,
    pub d: Point,
    pub s_trunc: f64,
    #[serde(default = "CoefficientField::identity")]
    pub coeff: CoefficientField,
}

impl ScatterConfig {
    pub fn new(k: f64, d: Point, s_trunc: f64) -> Self {
        ScatterConfig { k, k_lo: 0.5 * k, k_hi: 2.0 * k, d, s_trunc, coeff: CoefficientField::identity() }
    }

    pub fn validate(&self, scene: &CompactScene) -> Result<(), PdeError> {
        if (self.d.norm() - 1.0).abs() > 1e-12 {
            return Err(PdeError::BadConfig(format!("direction has length {}", self.d.norm())));
        }
        if !(self.k_lo > 0.0 && self.k_lo < self.k && self.k < self.k_hi) {
            return Err(PdeError::BadConfig(format!("need 0 < {} < k = {} < {}", self.k_lo, self.k, self.k_hi)));
        }
        let r = scene_radius(scene).max(self.coeff.r0);
        if self.s_trunc <= r + 1.0 {
            return Err(PdeError::BadTruncation { s_trunc: self.s_trunc, needed: r + 1.0 });
        }
        Ok(())
    }

    pub fn incident(&self, x: Point) -> Complex64 {
        Complex64::from_polar(1.0, self.k * x.dot(self.d))
    }
}

/// Radius of the smallest origin-centred ball containing the scene.
pub fn scene_radius(scene: &CompactScene) -> f64 {
    scene.cracks().iter().chain(scene.solids()).flatten().map(|p| p.norm()).fold(0.0, f64::max)
}

/// Mesh of the truncation box `[-s, s]^2` minus the scene.
pub fn scattering_mesh(scene: &CompactScene, s_trunc: f64, h: f64) -> Result<CrackMesh, PdeError> {
    let opts = MeshOptions { h, box_center: Some(Point::default()), box_radius: Some(s_trunc), ..Default::default() };
    Ok(build_cracked_mesh_with(scene, &opts)?)
}

#[derive(Debug, Clone)]
pub struct ScatterSolution {
    pub u: FeField,
    pub u_s: FeField,
    /// Relative residual of the linear system.
    pub residual: f64,
}

/// Total-field solve with a first-order absorbing condition on the outer
/// boundary of the mesh box.
pub fn solve_scattering(
    mesh: &Arc<CrackMesh>,
    scene: &CompactScene,
    config: &ScatterConfig,
) -> Result<ScatterSolution, PdeError> {
    config.validate(scene)?;
    let tri = &mesh.tri;
    if tri.center.norm() > 1e-12 || (tri.radius - config.s_trunc).abs() > 1e-9 * config.s_trunc {
        return Err(PdeError::BadTruncation { s_trunc: tri.radius, needed: config.s_trunc });
    }
    let k = config.k;
    let geo = Geometry::new(mesh);
    let n = geo.n_dofs;
    let mut trips: Vec<Triplet<usize, usize, Complex64>> = Vec::with_capacity(geo.len() * 9 + 4 * n);
    for t in 0..geo.len() {
        let (d, a, gr) = (geo.dofs[t], geo.area[t], geo.grads[t]);
        let (sigma, _) = config.coeff.eval(geo.centroid(t));
        let mut m = [[0.0; 3]; 3];
        for (b, w) in MIDPOINTS.points.iter().zip(MIDPOINTS.weights) {
            let (_, q) = config.coeff.eval(geo.point(t, b));
            for i in 0..3 {
                for j in 0..3 {
                    m[i][j] += w * q * b[i] * b[j];
                }
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let v = a * (sigma.apply(gr[j]).dot(gr[i]) - k * k * m[i][j]);
                trips.push(Triplet::new(d[i], d[j], Complex64::new(v, 0.0)));
            }
        }
    }
    let mut rhs = vec![Complex64::new(0.0, 0.0); n];
    let ik = Complex64::new(0.0, k);
    let s = config.s_trunc;
    for e in mesh.boundary_edges.iter().filter(|e| e.kind == BoundaryKind::Outer) {
        let (va, vb) = mesh.edges[e.edge];
        let (pa, pb) = (tri.vertices[va], tri.vertices[vb]);
        let len = pa.dist(pb);
        let mid = pa.lerp(pb, 0.5);
        let nu = if (mid.x.abs() - s).abs() < 1e-9 * s {
            Point::new(mid.x.signum(), 0.0)
        } else {
            Point::new(0.0, mid.y.signum())
        };
        let dofs = [e.dofs.0, e.dofs.1];
        let bm = [[len / 3.0, len / 6.0], [len / 6.0, len / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                trips.push(Triplet::new(dofs[i], dofs[j], -ik * bm[i][j]));
            }
        }
        for q in 0..3 {
            let t = GAUSS3_T[q];
            let x = pa.lerp(pb, t);
            let g = ik * (config.d.dot(nu) - 1.0) * config.incident(x);
            rhs[dofs[0]] += g * (len * GAUSS3_W[q] * (1.0 - t));
            rhs[dofs[1]] += g * (len * GAUSS3_W[q] * t);
        }
    }
    let mat = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| PdeError::SingularSystem(format!("{e:?}")))?;
    let lu = mat.sp_lu().map_err(|e| PdeError::SingularSystem(format!("{e:?}")))?;
    let b = Col::from_fn(n, |i| rhs[i]);
    let mut x = lu.solve(&b);
    let rel = |x: &Col<Complex64>| {
        let r = &mat * x - &b;
        r.norm_l2() / b.norm_l2().max(1e-300)
    };
    let mut residual = rel(&x);
    if residual > 1e-10 {
        let r = &b - &mat * &x;
        x += lu.solve(&r);
        residual = rel(&x);
    }
    if !(residual <= 1e-8) {
        return Err(PdeError::SingularSystem(format!("relative residual {residual:e}")));
    }
    let u: Vec<Complex64> = (0..n).map(|i| x[i]).collect();
    let us: Vec<Complex64> = (0..n).map(|i| u[i] - config.incident(mesh.dof_point(i))).collect();
    Ok(ScatterSolution { u: FeField::complex(mesh.clone(), u)?, u_s: FeField::complex(mesh.clone(), us)?, residual })
}
