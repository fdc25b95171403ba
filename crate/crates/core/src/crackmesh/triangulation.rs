use super::MeshError;
use crate::geomkit::Point;
use std::collections::HashMap;

/// Conforming triangulation of a square box by right isosceles triangles.
///
/// Triangles are stored counter-clockwise as `[apex, b, c]` with the
/// hypotenuse `b c` as refinement edge, which newest-vertex bisection keeps
/// invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub center: Point,
    pub radius: f64,
    /// Base grid spacing.
    pub h: f64,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Triangulation {
    /// Criss-cross grid of spacing `h` on `[c - R, c + R]²`. Diagonals follow
    /// the quadrant around the centre, so the mesh is symmetric under both
    /// axis reflections through `c`.
    pub fn criss_cross(center: Point, radius: f64, h: f64) -> Result<Self, MeshError> {
        if !(h > 0.0 && radius > 0.0 && h.is_finite()) {
            return Err(MeshError::InvalidSpacing(h));
        }
        let n = (2.0 * radius / h).round().max(1.0) as usize;
        let h = 2.0 * radius / n as f64;
        let x0 = Point::new(center.x - radius, center.y - radius);
        let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Point::new(x0.x + i as f64 * h, x0.y + j as f64 * h));
            }
        }
        let id = |i: usize, j: usize| j * (n + 1) + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (p00, p10, p11, p01) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                let mid = Point::new(x0.x + (i as f64 + 0.5) * h, x0.y + (j as f64 + 0.5) * h);
                if (mid.x - center.x) * (mid.y - center.y) >= 0.0 {
                    triangles.push([p10, p11, p00]);
                    triangles.push([p01, p00, p11]);
                } else {
                    triangles.push([p00, p10, p01]);
                    triangles.push([p11, p01, p10]);
                }
            }
        }
        Ok(Triangulation { vertices, triangles, center, radius, h })
    }

    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn centroid(&self, t: usize) -> Point {
        let [a, b, c] = self.corners(t);
        Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Longest edge.
    pub fn diam(&self, t: usize) -> f64 {
        let [a, b, c] = self.corners(t);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    /// Newest-vertex bisection until every triangle satisfies
    /// `diam <= size(centroid)`; the closure keeps the mesh conforming.
    pub fn refine_where(&mut self, size: impl Fn(Point, f64) -> bool) {
        let mut nvb = Nvb::new(self);
        loop {
            let marked: Vec<usize> = (0..nvb.tris.len())
                .filter(|&t| nvb.alive[t] && {
                    let [a, b, c] = nvb.tris[t].map(|v| nvb.verts[v]);
                    let cen = Point::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
                    size(cen, b.dist(c))
                })
                .collect();
            if marked.is_empty() {
                break;
            }
            for t in marked {
                if nvb.alive[t] {
                    nvb.refine(t);
                }
            }
        }
        self.vertices = nvb.verts;
        self.triangles = nvb.tris.into_iter().zip(nvb.alive).filter(|(_, a)| *a).map(|(t, _)| t).collect();
    }

    /// Graded refinement towards `points`: triangles are bisected while their
    /// diameter exceeds `max(hmin, grade * (distance to the points - diam))`.
    pub fn refine_graded(&mut self, points: &[Point], hmin: f64, grade: f64) {
        if points.is_empty() {
            return;
        }
        self.refine_where(|c, d| {
            let dist = points.iter().fold(f64::INFINITY, |m, p| m.min(p.dist(c)));
            d > hmin.max(grade * (dist - d)) * (1.0 + 1e-9)
        });
    }

    /// Map from sorted vertex pairs to incident triangles.
    pub fn edge_map(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::with_capacity(3 * self.triangles.len() / 2);
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                m.entry(key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
            }
        }
        m
    }

    pub fn locator(&self) -> Locator<'_> {
        Locator::new(self)
    }
}

struct Nvb {
    verts: Vec<Point>,
    tris: Vec<[usize; 3]>,
    alive: Vec<bool>,
    edges: HashMap<(usize, usize), Vec<usize>>,
    mids: HashMap<(usize, usize), usize>,
}

impl Nvb {
    fn new(t: &Triangulation) -> Self {
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, tri) in t.triangles.iter().enumerate() {
            for k in 0..3 {
                edges.entry(key(tri[k], tri[(k + 1) % 3])).or_default().push(i);
            }
        }
        Nvb {
            verts: t.vertices.clone(),
            tris: t.triangles.clone(),
            alive: vec![true; t.triangles.len()],
            edges,
            mids: HashMap::new(),
        }
    }

    fn neighbour(&self, t: usize, a: usize, b: usize) -> Option<usize> {
        self.edges.get(&key(a, b))?.iter().copied().find(|&s| s != t)
    }

    fn refine(&mut self, t: usize) {
        loop {
            let [_, b, c] = self.tris[t];
            match self.neighbour(t, b, c) {
                None => {
                    self.split(t);
                    return;
                }
                Some(n) => {
                    let [_, nb, nc] = self.tris[n];
                    if key(nb, nc) == key(b, c) {
                        self.split(t);
                        self.split(n);
                        return;
                    }
                    self.refine(n);
                }
            }
        }
    }

    fn split(&mut self, t: usize) {
        let [a, b, c] = self.tris[t];
        let m = *self.mids.entry(key(b, c)).or_insert_with(|| {
            self.verts.push(self.verts[b].lerp(self.verts[c], 0.5));
            self.verts.len() - 1
        });
        self.alive[t] = false;
        for (u, v) in [(a, b), (b, c), (c, a)] {
            if let Some(list) = self.edges.get_mut(&key(u, v)) {
                list.retain(|&s| s != t);
                if list.is_empty() {
                    self.edges.remove(&key(u, v));
                }
            }
        }
        for child in [[m, a, b], [m, c, a]] {
            let id = self.tris.len();
            self.tris.push(child);
            self.alive.push(true);
            for k in 0..3 {
                self.edges.entry(key(child[k], child[(k + 1) % 3])).or_default().push(id);
            }
        }
    }
}

/// Bucketed point location.
pub struct Locator<'a> {
    tri: &'a Triangulation,
    origin: Point,
    cell: f64,
    n: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> Locator<'a> {
    fn new(tri: &'a Triangulation) -> Self {
        let n = ((2.0 * tri.radius / tri.h).round() as usize).max(1);
        let cell = 2.0 * tri.radius / n as f64;
        let origin = Point::new(tri.center.x - tri.radius, tri.center.y - tri.radius);
        let mut buckets = vec![Vec::new(); n * n];
        for t in 0..tri.triangles.len() {
            let c = tri.corners(t);
            let (x0, x1) = (c.iter().map(|p| p.x).fold(f64::MAX, f64::min), c.iter().map(|p| p.x).fold(f64::MIN, f64::max));
            let (y0, y1) = (c.iter().map(|p| p.y).fold(f64::MAX, f64::min), c.iter().map(|p| p.y).fold(f64::MIN, f64::max));
            let idx = |v: f64, o: f64| (((v - o) / cell).floor().max(0.0) as usize).min(n - 1);
            for j in idx(y0 + 1e-12, origin.y)..=idx(y1 - 1e-12, origin.y) {
                for i in idx(x0 + 1e-12, origin.x)..=idx(x1 - 1e-12, origin.x) {
                    buckets[j * n + i].push(t);
                }
            }
        }
        Locator { tri, origin, cell, n, buckets }
    }

    /// Triangles containing `p` (closed, with a relative tolerance).
    pub fn containing(&self, p: Point) -> Vec<usize> {
        let i = (((p.x - self.origin.x) / self.cell).floor() as isize).clamp(0, self.n as isize - 1) as usize;
        let j = (((p.y - self.origin.y) / self.cell).floor() as isize).clamp(0, self.n as isize - 1) as usize;
        let mut out = Vec::new();
        for jj in j.saturating_sub(1)..=(j + 1).min(self.n - 1) {
            for ii in i.saturating_sub(1)..=(i + 1).min(self.n - 1) {
                for &t in &self.buckets[jj * self.n + ii] {
                    if !out.contains(&t) && barycentric(self.tri, t, p).iter().all(|&l| l >= -1e-10) {
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}

pub fn barycentric(tri: &Triangulation, t: usize, p: Point) -> [f64; 3] {
    let [a, b, c] = tri.corners(t);
    let det = (b - a).cross(c - a);
    let l1 = (p - a).cross(c - a) / det;
    let l2 = (b - a).cross(p - a) / det;
    [1.0 - l1 - l2, l1, l2]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts_and_orientation() {
        let t = Triangulation::criss_cross(Point::new(0.5, 0.5), 0.5, 0.5).unwrap();
        assert_eq!(t.vertices.len(), 9);
        assert_eq!(t.triangles.len(), 8);
        for k in 0..8 {
            assert!((t.area(k) - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn graded_refinement_is_conforming() {
        let mut t = Triangulation::criss_cross(Point::default(), 1.0, 0.25).unwrap();
        let p = Point::new(0.123, 0.0);
        t.refine_graded(&[p], 1e-3, 0.5);
        let area: f64 = (0..t.triangles.len()).map(|k| t.area(k)).sum();
        assert!((area - 4.0).abs() < 1e-12);
        assert!(t.triangles.iter().enumerate().all(|(k, _)| t.area(k) > 0.0));
        // conforming: every interior edge has exactly two triangles, no hanging nodes
        for ((a, b), tris) in t.edge_map() {
            let (pa, pb) = (t.vertices[a], t.vertices[b]);
            let on_box = |q: Point| (q.x.abs() - 1.0).abs() < 1e-12 || (q.y.abs() - 1.0).abs() < 1e-12;
            let boundary = on_box(pa) && on_box(pb) && (pa.x == pb.x || pa.y == pb.y) && on_box(pa.lerp(pb, 0.5));
            assert_eq!(tris.len(), if boundary { 1 } else { 2 }, "{pa:?} {pb:?}");
        }
        let loc = t.locator();
        let near = loc.containing(p);
        assert!(!near.is_empty());
        assert!(near.iter().all(|&k| t.diam(k) <= 2e-3));
    }
}
