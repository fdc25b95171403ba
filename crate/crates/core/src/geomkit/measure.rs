use super::hausdorff::CertifiedScalar;
use super::point::{Point, GEOM_EPS};
use super::scene::{polygon_edges, CompactScene};
use super::GeomError;

/// Area of `D1 Δ D2` with `D_i = box \ scene_i`, by counting pixel centers.
///
/// Cracks have measure zero; only solids contribute. The reported bound is
/// `resolution` times the total solid perimeter of both scenes.
pub fn symmetric_difference_area(
    d1: &CompactScene,
    d2: &CompactScene,
    resolution: f64,
) -> Result<CertifiedScalar, GeomError> {
    if !(resolution > 0.0) {
        return Err(GeomError::InvalidTolerance(resolution));
    }
    if (d1.box_radius() - d2.box_radius()).abs() > GEOM_EPS || d1.box_center() != d2.box_center() {
        return Err(GeomError::MalformedSpec("scenes must share the same box".into()));
    }
    if d1.solids().is_empty() && d2.solids().is_empty() {
        return Ok(CertifiedScalar::exact(0.0));
    }
    let perimeter: f64 = d1
        .solids()
        .iter()
        .chain(d2.solids())
        .map(|r| polygon_edges(r).map(|(a, b)| a.dist(b)).sum::<f64>())
        .sum();
    let (lo, hi) = d1.box_corners();
    let n = ((hi.x - lo.x) / resolution).ceil() as usize;
    let step = (hi.x - lo.x) / n as f64;
    // only pixels inside the bounding box of all solids can differ
    let (mut bx0, mut by0, mut bx1, mut by1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in d1.solids().iter().chain(d2.solids()).flatten() {
        bx0 = bx0.min(p.x);
        by0 = by0.min(p.y);
        bx1 = bx1.max(p.x);
        by1 = by1.max(p.y);
    }
    let idx = |v: f64, o: f64| (((v - o) / step).floor().max(0.0) as usize).min(n - 1);
    let (i0, i1) = (idx(bx0, lo.x), idx(bx1, lo.x));
    let (j0, j1) = (idx(by0, lo.y), idx(by1, lo.y));
    let mut count = 0usize;
    for j in j0..=j1 {
        let y = lo.y + (j as f64 + 0.5) * step;
        for i in i0..=i1 {
            let p = Point::new(lo.x + (i as f64 + 0.5) * step, y);
            if d1.inside_solid(p) != d2.inside_solid(p) {
                count += 1;
            }
        }
    }
    Ok(CertifiedScalar { value: count as f64 * step * step, error_bound: resolution * perimeter })
}

/// One-dimensional Hausdorff measure of the scene: crack length with collinear
/// overlaps counted once, plus solid perimeters.
pub fn length_measure(scene: &CompactScene) -> f64 {
    struct Line {
        origin: Point,
        dir: Point,
        intervals: Vec<(f64, f64)>,
    }
    let mut lines: Vec<Line> = Vec::new();
    for (a, b) in scene.crack_segments() {
        let len = a.dist(b);
        let tol = GEOM_EPS * (1.0 + a.norm().max(b.norm()));
        let found = lines.iter_mut().find(|l| {
            (a - l.origin).cross(l.dir).abs() <= tol && (b - l.origin).cross(l.dir).abs() <= tol
        });
        let line = match found {
            Some(l) => l,
            None => {
                lines.push(Line { origin: a, dir: (b - a) * (1.0 / len), intervals: vec![] });
                lines.last_mut().unwrap()
            }
        };
        let (s, t) = ((a - line.origin).dot(line.dir), (b - line.origin).dot(line.dir));
        line.intervals.push((s.min(t), s.max(t)));
    }
    let mut total = 0.0;
    for mut l in lines {
        l.intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
        let (mut cs, mut ce) = l.intervals[0];
        for &(s, e) in &l.intervals[1..] {
            if s <= ce {
                ce = ce.max(e);
            } else {
                total += ce - cs;
                cs = s;
                ce = e;
            }
        }
        total += ce - cs;
    }
    for ring in scene.solids() {
        total += polygon_edges(ring).map(|(a, b)| a.dist(b)).sum::<f64>();
    }
    total
}
