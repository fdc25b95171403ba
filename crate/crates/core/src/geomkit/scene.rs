use super::point::{
    dist_point_segment, point_in_polygon, segments_intersect, signed_area2, Point, GEOM_EPS,
};
use super::GeomError;
use serde::{Deserialize, Serialize};

/// Raw scene description as read from a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub box_radius: f64,
    #[serde(default)]
    pub box_center: Point,
    #[serde(default)]
    pub cracks: Vec<Vec<Point>>,
    #[serde(default)]
    pub solids: Vec<Vec<Point>>,
    #[serde(default)]
    pub label: String,
}

/// A validated compact set: crack polylines plus filled simple polygons inside
/// the closed square of half-width `box_radius` around `box_center`.
///
/// A polyline whose first vertex equals its last is a closed loop. A polyline
/// with a single vertex is an isolated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SceneSpec", into = "SceneSpec")]
pub struct CompactScene {
    box_radius: f64,
    box_center: Point,
    cracks: Vec<Vec<Point>>,
    solids: Vec<Vec<Point>>,
    label: String,
}

impl TryFrom<SceneSpec> for CompactScene {
    type Error = GeomError;
    fn try_from(spec: SceneSpec) -> Result<Self, GeomError> {
        build_compact_set(spec)
    }
}

impl From<CompactScene> for SceneSpec {
    fn from(s: CompactScene) -> Self {
        SceneSpec {
            box_radius: s.box_radius,
            box_center: s.box_center,
            cracks: s.cracks,
            solids: s.solids,
            label: s.label,
        }
    }
}

pub fn is_closed(poly: &[Point]) -> bool {
    poly.len() >= 4 && poly[0].dist(poly[poly.len() - 1]) <= GEOM_EPS
}

/// Segments of a polyline as consecutive vertex pairs.
pub fn polyline_segments(poly: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    poly.windows(2).map(|w| (w[0], w[1]))
}

pub fn polygon_edges(ring: &[Point]) -> impl Iterator<Item = (Point, Point)> + '_ {
    let n = ring.len();
    (0..n).map(move |i| (ring[i], ring[(i + 1) % n]))
}

pub fn polyline_length(poly: &[Point]) -> f64 {
    polyline_segments(poly).map(|(a, b)| a.dist(b)).sum()
}

fn check_simple(pts: &[Point], closed: bool, what: &str) -> Result<(), GeomError> {
    let segs: Vec<(Point, Point)> = if closed {
        polygon_edges(pts).collect()
    } else {
        polyline_segments(pts).collect()
    };
    let n = segs.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (closed && i == 0 && j == n - 1);
            let (a, b) = segs[i];
            let (c, d) = segs[j];
            if adjacent {
                // adjacent segments may only share their common vertex
                let (far_i, far_j) = if j == i + 1 { (a, d) } else { (b, c) };
                if dist_point_segment(far_j, a, b) <= GEOM_EPS
                    || dist_point_segment(far_i, c, d) <= GEOM_EPS
                {
                    return Err(GeomError::MalformedSpec(format!(
                        "{what}: segments {i} and {j} overlap"
                    )));
                }
            } else if segments_intersect(a, b, c, d) {
                return Err(GeomError::MalformedSpec(format!(
                    "{what}: segments {i} and {j} cross"
                )));
            }
        }
    }
    Ok(())
}

/// Validates a scene description.
pub fn build_compact_set(spec: SceneSpec) -> Result<CompactScene, GeomError> {
    let SceneSpec { box_radius, box_center, cracks, mut solids, label } = spec;
    if !(box_radius.is_finite() && box_radius > 0.0) || !box_center.is_finite() {
        return Err(GeomError::MalformedSpec("box must be finite with positive radius".into()));
    }
    let in_box = |p: Point| {
        (p.x - box_center.x).abs() <= box_radius + GEOM_EPS
            && (p.y - box_center.y).abs() <= box_radius + GEOM_EPS
    };
    for (ci, poly) in cracks.iter().enumerate() {
        if poly.is_empty() {
            return Err(GeomError::MalformedSpec(format!("crack {ci} has no vertices")));
        }
        for &p in poly {
            if !p.is_finite() {
                return Err(GeomError::MalformedSpec(format!("crack {ci} has a non-finite vertex")));
            }
            if !in_box(p) {
                return Err(GeomError::OutOfBox { x: p.x, y: p.y, radius: box_radius });
            }
        }
        for (si, (a, b)) in polyline_segments(poly).enumerate() {
            if a.dist(b) <= GEOM_EPS {
                return Err(GeomError::DegenerateSegment { polyline: ci, segment: si });
            }
        }
        if is_closed(poly) {
            check_simple(&poly[..poly.len() - 1], true, &format!("crack {ci}"))?;
        } else if poly.len() == 3 && poly[0].dist(poly[2]) <= GEOM_EPS {
            return Err(GeomError::MalformedSpec(format!("crack {ci} folds back on itself")));
        } else {
            check_simple(poly, false, &format!("crack {ci}"))?;
        }
    }
    for (pi, ring) in solids.iter_mut().enumerate() {
        if ring.len() >= 2 && ring[0].dist(ring[ring.len() - 1]) <= GEOM_EPS {
            ring.pop();
        }
        if ring.len() < 3 {
            return Err(GeomError::MalformedSpec(format!("solid {pi} needs at least 3 vertices")));
        }
        for &p in ring.iter() {
            if !p.is_finite() {
                return Err(GeomError::MalformedSpec(format!("solid {pi} has a non-finite vertex")));
            }
            if !in_box(p) {
                return Err(GeomError::OutOfBox { x: p.x, y: p.y, radius: box_radius });
            }
        }
        for (si, (a, b)) in polygon_edges(ring).enumerate() {
            if a.dist(b) <= GEOM_EPS {
                return Err(GeomError::DegenerateSegment { polyline: pi, segment: si });
            }
        }
        check_simple(ring, true, &format!("solid {pi}"))?;
        let a2 = signed_area2(ring);
        if a2.abs() <= GEOM_EPS {
            return Err(GeomError::MalformedSpec(format!("solid {pi} has zero area")));
        }
        if a2 < 0.0 {
            ring.reverse();
        }
    }
    Ok(CompactScene { box_radius, box_center, cracks, solids, label })
}

impl CompactScene {
    /// Convenience constructor for crack-only scenes.
    pub fn from_cracks(box_radius: f64, cracks: Vec<Vec<Point>>) -> Result<Self, GeomError> {
        build_compact_set(SceneSpec {
            box_radius,
            box_center: Point::default(),
            cracks,
            solids: vec![],
            label: String::new(),
        })
    }

    pub fn box_radius(&self) -> f64 {
        self.box_radius
    }

    pub fn box_center(&self) -> Point {
        self.box_center
    }

    pub fn cracks(&self) -> &[Vec<Point>] {
        &self.cracks
    }

    pub fn solids(&self) -> &[Vec<Point>] {
        &self.solids
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_empty(&self) -> bool {
        self.cracks.is_empty() && self.solids.is_empty()
    }

    /// Lower-left and upper-right corners of the box.
    pub fn box_corners(&self) -> (Point, Point) {
        let r = self.box_radius;
        let c = self.box_center;
        (Point::new(c.x - r, c.y - r), Point::new(c.x + r, c.y + r))
    }

    /// All one-dimensional pieces: crack segments and solid boundary edges.
    pub fn segments(&self) -> Vec<(Point, Point)> {
        let mut out: Vec<(Point, Point)> = Vec::new();
        for poly in &self.cracks {
            out.extend(polyline_segments(poly));
        }
        for ring in &self.solids {
            out.extend(polygon_edges(ring));
        }
        out
    }

    pub fn crack_segments(&self) -> Vec<(Point, Point)> {
        self.cracks.iter().flat_map(|p| polyline_segments(p)).collect()
    }

    /// Single-vertex crack polylines.
    pub fn isolated_points(&self) -> Vec<Point> {
        self.cracks.iter().filter(|p| p.len() == 1).map(|p| p[0]).collect()
    }

    pub fn inside_solid(&self, p: Point) -> bool {
        self.solids.iter().any(|ring| point_in_polygon(p, ring))
    }

    /// Same scene with the closed box boundary added as a closed polyline.
    pub fn with_box_boundary(&self, radius: f64) -> Result<CompactScene, GeomError> {
        let c = self.box_center;
        let r = radius;
        let mut cracks = self.cracks.clone();
        cracks.push(vec![
            Point::new(c.x - r, c.y - r),
            Point::new(c.x + r, c.y - r),
            Point::new(c.x + r, c.y + r),
            Point::new(c.x - r, c.y + r),
            Point::new(c.x - r, c.y - r),
        ]);
        build_compact_set(SceneSpec {
            box_radius: radius.max(self.box_radius),
            box_center: c,
            cracks,
            solids: self.solids.clone(),
            label: self.label.clone(),
        })
    }

    /// Transformed copy (rotation about `center`, then translation).
    pub fn transformed(&self, center: Point, angle: f64, shift: Point) -> Result<Self, GeomError> {
        let map = |p: &Point| center + (*p - center).rotate(angle) + shift;
        build_compact_set(SceneSpec {
            box_radius: self.box_radius,
            box_center: self.box_center,
            cracks: self.cracks.iter().map(|c| c.iter().map(map).collect()).collect(),
            solids: self.solids.iter().map(|s| s.iter().map(map).collect()).collect(),
            label: self.label.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn unit_segment_scene() {
        let s = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0), p(1.0, 0.0)]]).unwrap();
        assert_eq!(s.cracks().len(), 1);
        assert_eq!(s.solids().len(), 0);
    }

    #[test]
    fn out_of_box_rejected() {
        let e = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0), p(5.0, 0.0)]]).unwrap_err();
        assert!(matches!(e, GeomError::OutOfBox { .. }));
    }

    #[test]
    fn self_crossing_rejected() {
        let e = CompactScene::from_cracks(
            2.0,
            vec![vec![p(0.0, 0.0), p(1.0, 0.0), p(0.5, 1.0), p(0.5, -1.0)]],
        )
        .unwrap_err();
        assert!(matches!(e, GeomError::MalformedSpec(_)));
    }

    #[test]
    fn degenerate_and_empty_rejected() {
        let e = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0), p(0.0, 0.0)]]).unwrap_err();
        assert!(matches!(e, GeomError::DegenerateSegment { .. }));
        let e = CompactScene::from_cracks(2.0, vec![vec![]]).unwrap_err();
        assert!(matches!(e, GeomError::MalformedSpec(_)));
    }

    #[test]
    fn closed_loop_accepted_and_solids_oriented() {
        let sq = vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)];
        let s = build_compact_set(SceneSpec {
            box_radius: 2.0,
            box_center: Point::default(),
            cracks: vec![vec![p(0.0, 0.0), p(1.0, 0.0), p(1.0, 1.0), p(0.0, 0.0)]],
            solids: vec![sq],
            label: "t".into(),
        })
        .unwrap();
        assert!(is_closed(&s.cracks()[0]));
        assert!(signed_area2(&s.solids()[0]) > 0.0);
    }

    #[test]
    fn json_round_trip() {
        let s = CompactScene::from_cracks(1.0, vec![vec![p(0.0, 0.0), p(0.5, 0.25)]]).unwrap();
        let txt = serde_json::to_string(&s).unwrap();
        let back: CompactScene = serde_json::from_str(&txt).unwrap();
        assert_eq!(s, back);
        assert!(serde_json::from_str::<CompactScene>(r#"{"box_radius":1,"cracks":[[[3,0],[0,0]]]}"#).is_err());
    }
}
