use super::point::{closest_point_on_segment, dist_point_segment, point_in_polygon, segments_cross_properly, Point};
use super::scene::{polygon_edges, CompactScene};
use super::GeomError;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// A value with a certified enclosure `[value - error_bound, value + error_bound]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifiedScalar {
    pub value: f64,
    pub error_bound: f64,
}

impl CertifiedScalar {
    pub fn exact(value: f64) -> Self {
        CertifiedScalar { value, error_bound: 0.0 }
    }

    pub fn from_bounds(lo: f64, hi: f64) -> Self {
        CertifiedScalar { value: 0.5 * (lo + hi), error_bound: 0.5 * (hi - lo).max(0.0) }
    }

    pub fn lo(&self) -> f64 {
        self.value - self.error_bound
    }

    pub fn hi(&self) -> f64 {
        self.value + self.error_bound
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo() - 1e-15 && x <= self.hi() + 1e-15
    }
}

/// Distance from `x` to the scene without the emptiness check.
pub(crate) fn dist_raw(scene: &CompactScene, x: Point) -> f64 {
    let mut best = f64::INFINITY;
    for poly in scene.cracks() {
        if poly.len() == 1 {
            best = best.min(x.dist(poly[0]));
        }
        for w in poly.windows(2) {
            best = best.min(dist_point_segment(x, w[0], w[1]));
        }
    }
    for ring in scene.solids() {
        if point_in_polygon(x, ring) {
            return 0.0;
        }
        for (a, b) in polygon_edges(ring) {
            best = best.min(dist_point_segment(x, a, b));
        }
    }
    best
}

/// Euclidean distance from a point to the compact set.
pub fn distance_to_set(x: Point, scene: &CompactScene) -> Result<f64, GeomError> {
    if scene.is_empty() {
        return Err(GeomError::EmptyScene);
    }
    Ok(dist_raw(scene, x))
}

/// Upper bound of the distance to `to` over the convex hull of `corners`:
/// the distance to each primitive is convex, so its maximum over the hull is
/// attained at a corner.
fn convex_ub(to: &CompactScene, corners: &[Point]) -> f64 {
    let worst = |f: &dyn Fn(Point) -> f64| corners.iter().fold(0.0f64, |m, &p| m.max(f(p)));
    let mut best = f64::INFINITY;
    for poly in to.cracks() {
        if poly.len() == 1 {
            best = best.min(worst(&|x| x.dist(poly[0])));
        }
        for w in poly.windows(2) {
            best = best.min(worst(&|x| dist_point_segment(x, w[0], w[1])));
        }
    }
    for ring in to.solids() {
        for (a, b) in polygon_edges(ring) {
            best = best.min(worst(&|x| dist_point_segment(x, a, b)));
        }
    }
    best
}

fn seg_inside_solid(to: &CompactScene, a: Point, b: Point) -> bool {
    to.solids().iter().any(|ring| {
        point_in_polygon(a, ring)
            && point_in_polygon(b, ring)
            && point_in_polygon(a.lerp(b, 0.5), ring)
            && !polygon_edges(ring).any(|(c, d)| segments_cross_properly(a, b, c, d))
            && !ring.iter().any(|&v| dist_point_segment(v, a, b) <= 1e-14 && v.dist(a) > 1e-14 && v.dist(b) > 1e-14)
    })
}

/// Whether the segment `p q` meets the open square of centre `c`.
fn meets_open_cell(p: Point, q: Point, c: Point, half: f64) -> bool {
    let h = half * (1.0 - 1e-12);
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    let d = q - p;
    for (dp, lo, hi) in [(d.x, c.x - h - p.x, c.x + h - p.x), (d.y, c.y - h - p.y, c.y + h - p.y)] {
        if dp.abs() < 1e-300 {
            if lo >= 0.0 || hi <= 0.0 {
                return false;
            }
        } else {
            let (a, b) = if dp > 0.0 { (lo / dp, hi / dp) } else { (hi / dp, lo / dp) };
            t0 = t0.max(a);
            t1 = t1.min(b);
        }
    }
    t0 < t1
}

fn cell_inside_solid(to: &CompactScene, c: Point, half: f64) -> bool {
    to.solids()
        .iter()
        .any(|ring| point_in_polygon(c, ring) && !polygon_edges(ring).any(|(p, q)| meets_open_cell(p, q, c, half)))
}

/// Sutherland-Hodgman clip of a ring to an axis-aligned square.
fn clip_ring_to_cell(ring: &[Point], c: Point, half: f64) -> Vec<Point> {
    let mut poly = ring.to_vec();
    let planes: [(Point, f64); 4] = [
        (Point::new(1.0, 0.0), c.x + half),
        (Point::new(-1.0, 0.0), -(c.x - half)),
        (Point::new(0.0, 1.0), c.y + half),
        (Point::new(0.0, -1.0), -(c.y - half)),
    ];
    for (n, off) in planes {
        if poly.is_empty() {
            break;
        }
        let inside = |p: Point| p.dot(n) <= off;
        let mut out = Vec::with_capacity(poly.len() + 2);
        for i in 0..poly.len() {
            let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
            let (ip, iq) = (inside(p), inside(q));
            if ip {
                out.push(p);
            }
            if ip != iq {
                let t = (off - p.dot(n)) / (q - p).dot(n);
                out.push(p.lerp(q, t));
            }
        }
        poly = out;
    }
    poly
}

/// Sufficient test for `region ⊂ ring` with both closed polygons: region
/// vertices and edge midpoints inside, no transversal edge crossing and no
/// ring vertex strictly inside the region.
fn region_inside(region: &[Point], ring: &[Point]) -> bool {
    let n = region.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a, b) = (region[i], region[(i + 1) % n]);
        if !point_in_polygon(a, ring) || !point_in_polygon(a.lerp(b, 0.5), ring) {
            return false;
        }
        if polygon_edges(ring).any(|(c, d)| segments_cross_properly(a, b, c, d)) {
            return false;
        }
    }
    !ring.iter().any(|&v| {
        point_in_polygon(v, region) && (0..n).all(|i| dist_point_segment(v, region[i], region[(i + 1) % n]) > 1e-12)
    })
}

#[derive(Clone, Copy)]
enum Piece {
    Seg { a: Point, b: Point },
    Cell { c: Point, half: f64, solid: usize },
}

struct Item {
    ub: f64,
    piece: Piece,
}

impl PartialEq for Item {
    fn eq(&self, o: &Self) -> bool {
        self.ub == o.ub
    }
}
impl Eq for Item {}
impl PartialOrd for Item {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Item {
    fn cmp(&self, o: &Self) -> Ordering {
        self.ub.total_cmp(&o.ub)
    }
}

fn project_to_polygon(c: Point, ring: &[Point]) -> Point {
    if point_in_polygon(c, ring) {
        return c;
    }
    let mut best = ring[0];
    let mut bd = f64::INFINITY;
    for (a, b) in polygon_edges(ring) {
        let q = closest_point_on_segment(c, a, b);
        let d = c.dist(q);
        if d < bd {
            bd = d;
            best = q;
        }
    }
    best
}

/// Certified enclosure of `sup_{x in from} dist(x, to)`, using that the
/// distance function is 1-Lipschitz.
pub fn directed_hausdorff(
    from: &CompactScene,
    to: &CompactScene,
    tol: f64,
) -> Result<CertifiedScalar, GeomError> {
    if from.is_empty() || to.is_empty() {
        return Err(GeomError::EmptyScene);
    }
    if !(tol > 0.0) {
        return Err(GeomError::InvalidTolerance(tol));
    }
    let d = |x: Point| dist_raw(to, x);
    let mut lo = 0.0f64;
    let mut heap = BinaryHeap::new();
    let push = |piece: Piece, lo: &mut f64, heap: &mut BinaryHeap<Item>| match piece {
        Piece::Seg { a, b } => {
            let m = a.lerp(b, 0.5);
            let dm = d(m);
            *lo = lo.max(dm);
            let ub = if seg_inside_solid(to, a, b) { 0.0 } else { (dm + 0.5 * a.dist(b)).min(convex_ub(to, &[a, b])) };
            heap.push(Item { ub, piece });
        }
        Piece::Cell { c, half, solid } => {
            let ring = &from.solids()[solid];
            let rad = half * std::f64::consts::SQRT_2;
            let q = project_to_polygon(c, ring);
            if q.dist(c) > rad {
                return;
            }
            *lo = lo.max(d(q));
            let region = clip_ring_to_cell(ring, c, half);
            let ub = if cell_inside_solid(to, c, half) || to.solids().iter().any(|t| region_inside(&region, t)) {
                0.0
            } else if region.is_empty() {
                return;
            } else {
                (d(c) + rad).min(convex_ub(to, &region))
            };
            heap.push(Item { ub, piece });
        }
    };
    for p in from.isolated_points() {
        lo = lo.max(d(p));
    }
    for (a, b) in from.segments() {
        push(Piece::Seg { a, b }, &mut lo, &mut heap);
    }
    for (i, ring) in from.solids().iter().enumerate() {
        let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
        for p in ring {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let half = 0.5 * (x1 - x0).max(y1 - y0);
        let c = Point::new(0.5 * (x0 + x1), 0.5 * (y0 + y1));
        push(Piece::Cell { c, half, solid: i }, &mut lo, &mut heap);
    }
    loop {
        let Some(top) = heap.pop() else {
            return Ok(CertifiedScalar::from_bounds(lo, lo));
        };
        if top.ub - lo <= 2.0 * tol {
            return Ok(CertifiedScalar::from_bounds(lo, top.ub.max(lo)));
        }
        match top.piece {
            Piece::Seg { a, b } => {
                let m = a.lerp(b, 0.5);
                push(Piece::Seg { a, b: m }, &mut lo, &mut heap);
                push(Piece::Seg { a: m, b }, &mut lo, &mut heap);
            }
            Piece::Cell { c, half, solid } => {
                let h = 0.5 * half;
                for (sx, sy) in [(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
                    let cc = Point::new(c.x + sx * h, c.y + sy * h);
                    push(Piece::Cell { c: cc, half: h, solid }, &mut lo, &mut heap);
                }
            }
        }
    }
}

/// Certified Hausdorff distance between two compact scenes.
pub fn hausdorff_distance(
    k: &CompactScene,
    kt: &CompactScene,
    tol: f64,
) -> Result<CertifiedScalar, GeomError> {
    let a = directed_hausdorff(k, kt, tol)?;
    let b = directed_hausdorff(kt, k, tol)?;
    Ok(CertifiedScalar::from_bounds(a.lo().max(b.lo()), a.hi().max(b.hi())))
}

/// Hausdorff distance between the complements `closed box \ D` of the open
/// sets `D = box \ scene`, i.e. between the scenes augmented with the boundary
/// of the closed outer box of half-width `outer_radius`.
pub fn hausdorff_complementary_distance(
    d: &CompactScene,
    dt: &CompactScene,
    outer_radius: f64,
    tol: f64,
) -> Result<CertifiedScalar, GeomError> {
    if !(outer_radius > 0.0) {
        return Err(GeomError::MalformedSpec("outer radius must be positive".into()));
    }
    let mut dt_moved = dt.clone();
    if dt.box_center() != d.box_center() {
        // both complements live in the same outer box
        let spec: super::SceneSpec = dt.clone().into();
        dt_moved = super::build_compact_set(super::SceneSpec { box_center: d.box_center(), ..spec })?;
    }
    let a = d.with_box_boundary(outer_radius)?;
    let b = dt_moved.with_box_boundary(outer_radius)?;
    hausdorff_distance(&a, &b, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seg(a: (f64, f64), b: (f64, f64)) -> CompactScene {
        CompactScene::from_cracks(3.0, vec![vec![Point::new(a.0, a.1), Point::new(b.0, b.1)]]).unwrap()
    }

    #[test]
    fn two_points() {
        let a = CompactScene::from_cracks(5.0, vec![vec![Point::new(0.0, 0.0)]]).unwrap();
        let b = CompactScene::from_cracks(5.0, vec![vec![Point::new(3.0, 4.0)]]).unwrap();
        let d = hausdorff_distance(&a, &b, 1e-9).unwrap();
        assert!(d.contains(5.0) && d.error_bound <= 1e-9);
    }

    #[test]
    fn identity_and_parallel_offset() {
        let a = seg((0.0, 0.0), (1.0, 0.0));
        assert!(hausdorff_distance(&a, &a, 1e-9).unwrap().hi() <= 1e-9);
        let b = seg((0.0, 1.0), (1.0, 1.0));
        let d = hausdorff_distance(&a, &b, 1e-9).unwrap();
        assert!(d.contains(1.0));
    }

    #[test]
    fn empty_scene_error() {
        let e = CompactScene::from_cracks(1.0, vec![]).unwrap();
        let a = seg((0.0, 0.0), (1.0, 0.0));
        assert!(matches!(hausdorff_distance(&e, &a, 1e-3), Err(GeomError::EmptyScene)));
        assert!(matches!(distance_to_set(Point::default(), &e), Err(GeomError::EmptyScene)));
    }

    #[test]
    fn solid_interior_sup() {
        // from a filled square to its own boundary the sup is the inradius
        let sq = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 1.0), Point::new(0.0, 1.0)];
        let solid = super::super::build_compact_set(super::super::SceneSpec {
            box_radius: 2.0,
            box_center: Point::default(),
            cracks: vec![],
            solids: vec![sq.clone()],
            label: String::new(),
        })
        .unwrap();
        let mut ring = sq.clone();
        ring.push(sq[0]);
        let outline = CompactScene::from_cracks(2.0, vec![ring]).unwrap();
        let d = directed_hausdorff(&solid, &outline, 1e-6).unwrap();
        assert!(d.contains(0.5), "{d:?}");
        assert!(directed_hausdorff(&outline, &solid, 1e-6).unwrap().hi() <= 1e-6);
        // an L-shaped solid against itself certifies zero quickly
        let l_ring = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 0.4),
            Point::new(0.4, 0.4),
            Point::new(0.4, 1.0),
            Point::new(0.0, 1.0),
        ];
        let l_solid = super::super::build_compact_set(super::super::SceneSpec {
            box_radius: 2.0,
            box_center: Point::default(),
            cracks: vec![vec![Point::new(-1.0, -1.0), Point::new(1.5, -0.5)]],
            solids: vec![l_ring],
            label: String::new(),
        })
        .unwrap();
        let d = hausdorff_distance(&l_solid, &l_solid, 1e-9).unwrap();
        assert!(d.hi() <= 2e-9, "{d:?}");
        let d = hausdorff_complementary_distance(&l_solid, &l_solid, 2.0, 1e-9).unwrap();
        assert!(d.hi() <= 2e-9, "{d:?}");
    }

    #[test]
    fn distance_examples() {
        let a = seg((0.0, 0.0), (1.0, 0.0));
        assert_eq!(distance_to_set(Point::new(2.0, 0.0), &a).unwrap(), 1.0);
        assert_eq!(distance_to_set(Point::new(0.3, 0.0), &a).unwrap(), 0.0);
        let n = 360;
        let mut circle: Vec<Point> = (0..n)
            .map(|i| Point::new(1.0, 0.0).rotate(2.0 * std::f64::consts::PI * i as f64 / n as f64))
            .collect();
        circle.push(circle[0]);
        let c = CompactScene::from_cracks(2.0, vec![circle]).unwrap();
        let d = distance_to_set(Point::default(), &c).unwrap();
        assert!((d - (std::f64::consts::PI / 360.0).cos()).abs() < 1e-12);
        assert!((d - 1.0).abs() <= 4e-5);
    }
}
