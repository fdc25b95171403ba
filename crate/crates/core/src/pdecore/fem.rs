//! P1 element geometry, quadrature and a small real CSR matrix with a
//! Jacobi-preconditioned conjugate gradient solver.

use crate::crackmesh::CrackMesh;
use crate::geomkit::Point;

/// Triangle quadrature in barycentric coordinates, weights summing to one.
#[derive(Debug, Clone, Copy)]
pub struct Rule {
    pub points: &'static [[f64; 3]],
    pub weights: &'static [f64],
}

/// Edge midpoints: exact for degree 2.
pub const MIDPOINTS: Rule = Rule {
    points: &[[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]],
    weights: &[1.0 / 3.0; 3],
};

const A4: f64 = 0.445_948_490_915_965;
const B4: f64 = 0.091_576_213_509_771;
const WA4: f64 = 0.223_381_589_678_011;
const WB4: f64 = 0.109_951_743_655_322;

/// Six-point rule exact for degree 4.
pub const DEGREE4: Rule = Rule {
    points: &[
        [A4, A4, 1.0 - 2.0 * A4],
        [A4, 1.0 - 2.0 * A4, A4],
        [1.0 - 2.0 * A4, A4, A4],
        [B4, B4, 1.0 - 2.0 * B4],
        [B4, 1.0 - 2.0 * B4, B4],
        [1.0 - 2.0 * B4, B4, B4],
    ],
    weights: &[WA4, WA4, WA4, WB4, WB4, WB4],
};

const A6: f64 = 0.063_089_014_491_502;
const B6: f64 = 0.249_286_745_170_910;
const C6: [f64; 3] = [0.053_145_049_844_817, 0.310_352_451_033_784, 0.636_502_499_121_399];
const WA6: f64 = 0.050_844_906_370_207;
const WB6: f64 = 0.116_786_275_726_379;
const WC6: f64 = 0.082_851_075_618_374;

/// Twelve-point rule exact for degree 6.
pub const DEGREE6: Rule = Rule {
    points: &[
        [A6, A6, 1.0 - 2.0 * A6],
        [A6, 1.0 - 2.0 * A6, A6],
        [1.0 - 2.0 * A6, A6, A6],
        [B6, B6, 1.0 - 2.0 * B6],
        [B6, 1.0 - 2.0 * B6, B6],
        [1.0 - 2.0 * B6, B6, B6],
        [C6[0], C6[1], C6[2]],
        [C6[0], C6[2], C6[1]],
        [C6[1], C6[0], C6[2]],
        [C6[1], C6[2], C6[0]],
        [C6[2], C6[0], C6[1]],
        [C6[2], C6[1], C6[0]],
    ],
    weights: &[WA6, WA6, WA6, WB6, WB6, WB6, WC6, WC6, WC6, WC6, WC6, WC6],
};

/// Rule for integrating `|u|^p` of a P1 field: exact for even integer
/// `p <= 6`, midpoints for fractional exponents.
pub fn rule_for_power(p: f64) -> Rule {
    let even = p.fract() == 0.0 && (p as i64) % 2 == 0;
    if !even || p <= 2.0 {
        MIDPOINTS
    } else if p <= 4.0 {
        DEGREE4
    } else {
        DEGREE6
    }
}

/// Three-point Gauss-Legendre on [0, 1].
pub const GAUSS3_T: [f64; 3] = [0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7];
pub const GAUSS3_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Per-triangle data of a cracked mesh.
#[derive(Debug, Clone)]
pub struct Geometry {
    pub area: Vec<f64>,
    pub grads: Vec<[Point; 3]>,
    pub dofs: Vec<[usize; 3]>,
    pub corners: Vec<[Point; 3]>,
    pub n_dofs: usize,
}

impl Geometry {
    pub fn new(mesh: &CrackMesh) -> Self {
        let n = mesh.n_triangles();
        let mut area = Vec::with_capacity(n);
        let mut grads = Vec::with_capacity(n);
        let mut corners = Vec::with_capacity(n);
        for k in 0..n {
            let p = mesh.corners(k);
            let a2 = (p[1] - p[0]).cross(p[2] - p[0]);
            let g = |i: usize| {
                let (b, c) = (p[(i + 1) % 3], p[(i + 2) % 3]);
                Point::new((b.y - c.y) / a2, (c.x - b.x) / a2)
            };
            area.push(0.5 * a2);
            grads.push([g(0), g(1), g(2)]);
            corners.push(p);
        }
        Geometry { area, grads, dofs: mesh.corner_dofs.clone(), corners, n_dofs: mesh.n_dofs() }
    }

    pub fn len(&self) -> usize {
        self.area.len()
    }

    pub fn is_empty(&self) -> bool {
        self.area.is_empty()
    }

    pub fn point(&self, k: usize, bary: &[f64; 3]) -> Point {
        let c = &self.corners[k];
        Point::new(
            bary[0] * c[0].x + bary[1] * c[1].x + bary[2] * c[2].x,
            bary[0] * c[0].y + bary[1] * c[1].y + bary[2] * c[2].y,
        )
    }

    pub fn centroid(&self, k: usize) -> Point {
        self.point(k, &[1.0 / 3.0; 3])
    }

    pub fn value(&self, k: usize, u: &[f64], bary: &[f64; 3]) -> f64 {
        let d = self.dofs[k];
        bary[0] * u[d[0]] + bary[1] * u[d[1]] + bary[2] * u[d[2]]
    }

    pub fn gradient(&self, k: usize, u: &[f64]) -> Point {
        let (d, g) = (self.dofs[k], self.grads[k]);
        Point::new(
            u[d[0]] * g[0].x + u[d[1]] * g[1].x + u[d[2]] * g[2].x,
            u[d[0]] * g[0].y + u[d[1]] * g[1].y + u[d[2]] * g[2].y,
        )
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub rowptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl Csr {
    /// Builds from triplets, summing duplicates.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_unstable_by_key(|e| (e.0, e.1));
        let mut rowptr = vec![0usize; n + 1];
        let mut cols = Vec::with_capacity(t.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.len());
        let mut last = None;
        for (i, j, v) in t {
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                rowptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..n {
            rowptr[i + 1] += rowptr[i];
        }
        Csr { n, rowptr, cols, vals }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.rowptr[i]..self.rowptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            y[i] = s;
        }
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.rowptr[i]..self.rowptr[i + 1]).find(|&k| self.cols[k] == i).map_or(0.0, |k| self.vals[k])
            })
            .collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, Copy)]
pub struct CgInfo {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// Jacobi-preconditioned CG for SPD `a`; stops at `||r|| <= rtol ||b||`.
pub fn pcg(a: &Csr, b: &[f64], x: &mut [f64], rtol: f64, max_iter: usize) -> CgInfo {
    let n = a.n;
    let dinv: Vec<f64> = a.diag().iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let target = rtol * norm2(b);
    let mut z: Vec<f64> = r.iter().zip(&dinv).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut res = norm2(&r);
    for it in 0..max_iter {
        if res <= target {
            return CgInfo { iterations: it, residual: res, converged: true };
        }
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = norm2(&r);
        for i in 0..n {
            z[i] = r[i] * dinv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    CgInfo { iterations: max_iter, residual: res, converged: res <= target }
}
