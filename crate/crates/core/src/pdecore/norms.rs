use super::fem::{rule_for_power, Geometry, Rule, GAUSS3_T, GAUSS3_W};
use super::field::FeField;
use super::PdeError;
use crate::crackmesh::{BoundaryKind, CrackMesh};
use crate::geomkit::Point;
use serde::{Deserialize, Serialize};

/// Triangles entering a volume norm, selected by centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum Region {
    #[default]
    All,
    Disk { center: Point, radius: f64 },
}

impl Region {
    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Region::All => true,
            Region::Disk { center, radius } => p.dist(center) <= radius,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum BoundaryPart {
    #[default]
    All,
    Cracks,
    Outer,
    Solids,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum NormKind {
    Lp { p: f64, region: Region },
    /// `||grad u||_{L^p}`
    GradLp { p: f64, region: Region },
    /// `(||u||_p^p + ||grad u||_p^p)^{1/p}`
    W1p { p: f64, region: Region },
    /// `|| |u|^+ ||_{L^s}` on a part of the boundary.
    TraceLs { s: f64, part: BoundaryPart },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TraceKind {
    Crack,
    Outer,
    Solid,
}

/// One boundary edge with the nodal values of `|u|^+` at its ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSegment {
    pub edge: usize,
    pub kind: TraceKind,
    pub a: Point,
    pub b: Point,
    pub values: (f64, f64),
}

/// Boundary edges with the DOFs seen from each side; `other` is set only on
/// cracks.
#[derive(Debug, Clone)]
pub(crate) struct BoundarySegs {
    pub segs: Vec<(usize, TraceKind, Point, Point, [usize; 2], Option<[usize; 2]>)>,
}

impl BoundarySegs {
    pub fn new(mesh: &CrackMesh, part: BoundaryPart) -> Self {
        let mut segs = Vec::new();
        if matches!(part, BoundaryPart::All | BoundaryPart::Cracks) {
            for c in &mesh.crack_edges {
                let (a, b) = (mesh.tri.vertices[c.from], mesh.tri.vertices[c.to]);
                segs.push((c.edge, TraceKind::Crack, a, b, [c.side_a.0, c.side_a.1], Some([c.side_b.0, c.side_b.1])));
            }
        }
        for e in &mesh.boundary_edges {
            let kind = match e.kind {
                BoundaryKind::Outer => TraceKind::Outer,
                BoundaryKind::Solid => TraceKind::Solid,
            };
            let keep = match part {
                BoundaryPart::All => true,
                BoundaryPart::Cracks => false,
                BoundaryPart::Outer => kind == TraceKind::Outer,
                BoundaryPart::Solids => kind == TraceKind::Solid,
            };
            if keep {
                let (va, vb) = mesh.edges[e.edge];
                segs.push((e.edge, kind, mesh.tri.vertices[va], mesh.tri.vertices[vb], [e.dofs.0, e.dofs.1], None));
            }
        }
        segs.sort_by_key(|s| s.0);
        BoundarySegs { segs }
    }
}

fn modulus(re: &[f64], im: &[f64], d: usize) -> f64 {
    re[d].hypot(im[d])
}

/// Nodal `|u|^+` on every edge of `part`: the larger one-sided modulus on
/// cracks, the inner modulus elsewhere.
pub fn trace_plus(field: &FeField, part: BoundaryPart) -> Vec<TraceSegment> {
    let (re, im) = field.parts();
    BoundarySegs::new(&field.mesh, part)
        .segs
        .iter()
        .map(|&(edge, kind, a, b, inner, other)| {
            let v = |i: usize| {
                let m = modulus(&re, &im, inner[i]);
                other.map_or(m, |o| m.max(modulus(&re, &im, o[i])))
            };
            TraceSegment { edge, kind, a, b, values: (v(0), v(1)) }
        })
        .collect()
}

fn check_exponent(p: f64) -> Result<(), PdeError> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(PdeError::BadExponent(p))
    }
}

/// `int |u|^p` over the region, with the quadrature of `rule_for_power`.
pub(crate) fn lp_pow(geo: &Geometry, re: &[f64], im: &[f64], p: f64, region: Region) -> f64 {
    let rule = rule_for_power(p);
    let mut s = 0.0;
    for k in 0..geo.len() {
        if !region.contains(geo.centroid(k)) {
            continue;
        }
        let mut sk = 0.0;
        for (b, w) in rule.points.iter().zip(rule.weights) {
            sk += w * geo.value(k, re, b).hypot(geo.value(k, im, b)).powf(p);
        }
        s += geo.area[k] * sk;
    }
    s
}

pub(crate) fn grad_pow(geo: &Geometry, re: &[f64], im: &[f64], p: f64, region: Region) -> f64 {
    let mut s = 0.0;
    for k in 0..geo.len() {
        if region.contains(geo.centroid(k)) {
            let (gr, gi) = (geo.gradient(k, re), geo.gradient(k, im));
            s += geo.area[k] * (gr.dot(gr) + gi.dot(gi)).powf(0.5 * p);
        }
    }
    s
}

pub(crate) fn trace_pow(segs: &[TraceSegment], s: f64) -> f64 {
    segs.iter()
        .map(|t| {
            let len = t.a.dist(t.b);
            len * (0..3)
                .map(|q| GAUSS3_W[q] * ((1.0 - GAUSS3_T[q]) * t.values.0 + GAUSS3_T[q] * t.values.1).powf(s))
                .sum::<f64>()
        })
        .sum()
}

/// Discrete norms of a P1 field. Exact for P1 data whenever the integrand
/// is a polynomial of degree at most six.
pub fn norm(field: &FeField, kind: NormKind) -> Result<f64, PdeError> {
    let geo = Geometry::new(&field.mesh);
    let (re, im) = field.parts();
    Ok(match kind {
        NormKind::Lp { p, region } => {
            check_exponent(p)?;
            lp_pow(&geo, &re, &im, p, region).powf(1.0 / p)
        }
        NormKind::GradLp { p, region } => {
            check_exponent(p)?;
            grad_pow(&geo, &re, &im, p, region).powf(1.0 / p)
        }
        NormKind::W1p { p, region } => {
            check_exponent(p)?;
            (lp_pow(&geo, &re, &im, p, region) + grad_pow(&geo, &re, &im, p, region)).powf(1.0 / p)
        }
        NormKind::TraceLs { s, part } => {
            check_exponent(s)?;
            trace_pow(&trace_plus(field, part), s).powf(1.0 / s)
        }
    })
}

/// Smoothed `int (u^2 + eta^2)^{p/2}` of a real field and its gradient.
pub(crate) fn lp_pow_smooth(geo: &Geometry, u: &[f64], p: f64, eta: f64, out: &mut [f64]) -> f64 {
    let rule: Rule = rule_for_power(p);
    let mut s = 0.0;
    for k in 0..geo.len() {
        let (d, a) = (geo.dofs[k], geo.area[k]);
        for (b, w) in rule.points.iter().zip(rule.weights) {
            let v = geo.value(k, u, b);
            let t = v * v + eta * eta;
            s += a * w * t.powf(0.5 * p);
            let dv = a * w * p * t.powf(0.5 * p - 1.0) * v;
            for i in 0..3 {
                out[d[i]] += dv * b[i];
            }
        }
    }
    s
}

pub(crate) fn grad_pow_smooth(geo: &Geometry, u: &[f64], p: f64, eta: f64, out: &mut [f64]) -> f64 {
    let mut s = 0.0;
    for k in 0..geo.len() {
        let (d, a) = (geo.dofs[k], geo.area[k]);
        let g = geo.gradient(k, u);
        let t = g.dot(g) + eta * eta;
        s += a * t.powf(0.5 * p);
        let c = a * p * t.powf(0.5 * p - 1.0);
        for i in 0..3 {
            out[d[i]] += c * g.dot(geo.grads[k][i]);
        }
    }
    s
}

pub(crate) fn trace_pow_smooth(bs: &BoundarySegs, u: &[f64], s: f64, eta: f64, out: &mut [f64]) -> f64 {
    let sabs = |x: f64| (x * x + eta * eta).sqrt();
    let mut total = 0.0;
    for &(_, _, a, b, inner, other) in &bs.segs {
        let len = a.dist(b);
        let mut m = [0.0; 2];
        let mut arg = [inner[0], inner[1]];
        for i in 0..2 {
            m[i] = sabs(u[inner[i]]);
            if let Some(o) = other {
                let mo = sabs(u[o[i]]);
                if mo > m[i] {
                    m[i] = mo;
                    arg[i] = o[i];
                }
            }
        }
        for q in 0..3 {
            let t = GAUSS3_T[q];
            let v = (1.0 - t) * m[0] + t * m[1];
            total += len * GAUSS3_W[q] * v.powf(s);
            let c = len * GAUSS3_W[q] * s * v.powf(s - 1.0);
            for (i, wt) in [(0usize, 1.0 - t), (1, t)] {
                let x = u[arg[i]];
                out[arg[i]] += c * wt * x / sabs(x);
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crackmesh::build_cracked_mesh;
    use crate::geomkit::{build_compact_set, SceneSpec};
    use std::sync::Arc;

    fn mesh(cracks: Vec<Vec<Point>>, solids: Vec<Vec<Point>>, h: f64) -> Arc<CrackMesh> {
        let s = build_compact_set(SceneSpec {
            box_radius: 0.5,
            box_center: Point::new(0.5, 0.5),
            cracks,
            solids,
            label: String::new(),
        })
        .unwrap();
        Arc::new(build_cracked_mesh(&s, h).unwrap())
    }

    #[test]
    fn constant_field_norms() {
        let m = mesh(vec![vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)]], vec![], 0.125);
        let one = FeField::interpolate(m.clone(), |_| 1.0);
        for p in [1.0, 1.5, 2.0, 6.0] {
            let v = norm(&one, NormKind::Lp { p, region: Region::All }).unwrap();
            assert!((v - 1.0).abs() < 1e-12);
        }
        // outer boundary 4 plus both crack sides counted once: 4.5
        for s in [1.0, 3.0] {
            let v = norm(&one, NormKind::TraceLs { s, part: BoundaryPart::All }).unwrap();
            assert!((v - 4.5f64.powf(1.0 / s)).abs() < 1e-12, "{v}");
        }
        assert!(norm(&one, NormKind::Lp { p: 0.5, region: Region::All }).is_err());
    }

    #[test]
    fn linear_field_gradient() {
        let m = mesh(vec![], vec![], 0.125);
        let u = FeField::interpolate(m.clone(), |p| p.x);
        let g = norm(&u, NormKind::GradLp { p: 2.0, region: Region::All }).unwrap();
        assert!((g - 1.0).abs() < 1e-12);
        let l2 = norm(&u, NormKind::Lp { p: 2.0, region: Region::All }).unwrap();
        assert!((l2 - (1.0f64 / 3.0).sqrt()).abs() < 1e-12);
        let l4 = norm(&u, NormKind::Lp { p: 4.0, region: Region::All }).unwrap();
        assert!((l4 - 0.2f64.powf(0.25)).abs() < 1e-12);
        let w = norm(&u, NormKind::W1p { p: 2.0, region: Region::All }).unwrap();
        assert!((w - (1.0f64 + 1.0 / 3.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn trace_plus_takes_larger_side() {
        let m = mesh(vec![vec![Point::new(0.0, 0.5), Point::new(1.0, 0.5)]], vec![], 0.25);
        let geo = Geometry::new(&m);
        let mut v = vec![0.0; m.n_dofs()];
        for k in 0..geo.len() {
            if geo.centroid(k).y > 0.5 {
                for d in geo.dofs[k] {
                    v[d] = 1.0;
                }
            }
        }
        let u = FeField::real(m.clone(), v).unwrap();
        let t = trace_plus(&u, BoundaryPart::Cracks);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|s| s.values == (1.0, 1.0)));
        let full = trace_plus(&FeField::interpolate(m.clone(), |p| p.x + 2.0), BoundaryPart::All);
        for s in &full {
            assert!((s.values.0 - (s.a.x + 2.0)).abs() < 1e-15 && (s.values.1 - (s.b.x + 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn solid_trace_is_inner_value() {
        let sq = vec![Point::new(0.25, 0.25), Point::new(0.75, 0.25), Point::new(0.75, 0.75), Point::new(0.25, 0.75)];
        let m = mesh(vec![], vec![sq], 0.125);
        let u = FeField::interpolate(m.clone(), |_| -3.0);
        let t = trace_plus(&u, BoundaryPart::Solids);
        assert_eq!(t.len(), 16);
        assert!(t.iter().all(|s| s.values == (3.0, 3.0)));
    }

    #[test]
    fn smooth_gradients_match_differences() {
        let m = mesh(vec![vec![Point::new(0.25, 0.5), Point::new(0.75, 0.5)]], vec![], 0.25);
        let geo = Geometry::new(&m);
        let bs = BoundarySegs::new(&m, BoundaryPart::All);
        let n = m.n_dofs();
        let u: Vec<f64> = (0..n).map(|i| ((i * 7919) % 13) as f64 / 13.0 - 0.4).collect();
        let d: Vec<f64> = (0..n).map(|i| ((i * 104729) % 17) as f64 / 17.0 - 0.5).collect();
        type F = fn(&Geometry, &BoundarySegs, &[f64], &mut [f64]) -> f64;
        let fs: [F; 3] = [
            |g, _, u, o| lp_pow_smooth(g, u, 3.0, 1e-3, o),
            |g, _, u, o| grad_pow_smooth(g, u, 1.5, 1e-3, o),
            |_, b, u, o| trace_pow_smooth(b, u, 2.5, 1e-3, o),
        ];
        for f in fs {
            let mut grad = vec![0.0; n];
            f(&geo, &bs, &u, &mut grad);
            let h = 1e-7;
            let up: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + h * b).collect();
            let um: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a - h * b).collect();
            let mut sink = vec![0.0; n];
            let fd = (f(&geo, &bs, &up, &mut sink) - f(&geo, &bs, &um, &mut sink)) / (2.0 * h);
            let an: f64 = grad.iter().zip(&d).map(|(a, b)| a * b).sum();
            assert!((fd - an).abs() < 1e-5 * an.abs().max(1.0), "{fd} vs {an}");
        }
    }
}
