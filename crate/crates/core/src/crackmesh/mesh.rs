use super::snap::{snap_polyline, Graph};
use super::triangulation::Triangulation;
use super::MeshError;
use crate::geomkit::{
    hausdorff_distance, point_in_polygon, CompactScene, Point, SceneSpec,
};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryKind {
    Outer,
    Solid,
}

/// Mesh edge on a snapped crack, oriented along the polyline traversal.
/// `side_a` sees the edge from the left, `side_b` from the right; each pair
/// holds the DOFs at `(from, to)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrackEdge {
    pub edge: usize,
    pub polyline: usize,
    pub from: usize,
    pub to: usize,
    pub side_a: (usize, usize),
    pub side_b: (usize, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub edge: usize,
    pub dofs: (usize, usize),
    pub kind: BoundaryKind,
}

/// Triangulation of `box \ scene` with DOFs duplicated across cracks.
#[derive(Debug, Clone)]
pub struct CrackMesh {
    pub tri: Arc<Triangulation>,
    /// Kept triangles, as indices into `tri.triangles`.
    pub triangles: Vec<usize>,
    /// DOF of each corner of each kept triangle.
    pub corner_dofs: Vec<[usize; 3]>,
    pub dof_vertex: Vec<usize>,
    /// Vertex to DOFs, one per fan component.
    pub dof_map: Vec<Vec<usize>>,
    /// Edges of kept triangles as sorted vertex pairs.
    pub edges: Vec<(usize, usize)>,
    pub crack_edges: Vec<CrackEdge>,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub h: f64,
    /// Upper bound of the Hausdorff distance between requested and meshed
    /// scene.
    pub snap_error: f64,
    /// Meshed scene: snapped cracks, original solids.
    pub snapped: CompactScene,
    edge_index: HashMap<(usize, usize), usize>,
    crack_edge_set: std::collections::HashSet<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeshQuality {
    pub min_angle: f64,
    pub max_aspect: f64,
    pub area_total: f64,
    pub component_count: usize,
}

/// Meshing options: spacing, optional box override and graded refinement
/// towards a point set.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeshOptions {
    pub h: f64,
    pub box_center: Option<Point>,
    pub box_radius: Option<f64>,
    pub refine_points: Vec<Point>,
    pub hmin: f64,
}

impl MeshOptions {
    pub fn uniform(h: f64) -> Self {
        MeshOptions { h, ..Default::default() }
    }
}

struct Dsu(Vec<usize>);

impl Dsu {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut c = x;
        while self.0[c] != r {
            let n = self.0[c];
            self.0[c] = r;
            c = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Structured mesh of the scene box with spacing `h`.
pub fn build_cracked_mesh(scene: &CompactScene, h: f64) -> Result<CrackMesh, MeshError> {
    build_cracked_mesh_with(scene, &MeshOptions::uniform(h))
}

pub fn build_cracked_mesh_with(scene: &CompactScene, opts: &MeshOptions) -> Result<CrackMesh, MeshError> {
    let tri = build_triangulation(scene, opts)?;
    mesh_on(&Arc::new(tri), scene)
}

/// Background triangulation for `opts`, shareable by several scenes.
pub fn build_triangulation(scene: &CompactScene, opts: &MeshOptions) -> Result<Triangulation, MeshError> {
    let center = opts.box_center.unwrap_or(scene.box_center());
    let radius = opts.box_radius.unwrap_or(scene.box_radius());
    let mut tri = Triangulation::criss_cross(center, radius, opts.h)?;
    if !opts.refine_points.is_empty() {
        let hmin = if opts.hmin > 0.0 { opts.hmin } else { opts.h / 16.0 };
        tri.refine_graded(&opts.refine_points, hmin, 0.5);
    }
    Ok(tri)
}

fn closest_pair(p: &[Point], q: &[Point]) -> (f64, Point, Point) {
    let segs = |v: &[Point]| -> Vec<(Point, Point)> {
        if v.len() == 1 {
            vec![(v[0], v[0])]
        } else {
            v.windows(2).map(|w| (w[0], w[1])).collect()
        }
    };
    let mut best = (f64::INFINITY, p[0], q[0]);
    for &(a, b) in &segs(p) {
        for &(c, d) in &segs(q) {
            for (x, s, t, flip) in [(a, c, d, false), (b, c, d, false), (c, a, b, true), (d, a, b, true)] {
                let y = crate::geomkit::closest_point_on_segment(x, s, t);
                let dd = x.dist(y);
                if dd < best.0 {
                    best = if flip { (dd, y, x) } else { (dd, x, y) };
                }
            }
            if crate::geomkit::segments_intersect(a, b, c, d) {
                return (0.0, a, a);
            }
        }
    }
    best
}

/// Meshes `scene` on a given background triangulation.
pub fn mesh_on(tri: &Arc<Triangulation>, scene: &CompactScene) -> Result<CrackMesh, MeshError> {
    let kept: Vec<usize> = (0..tri.triangles.len())
        .filter(|&t| !scene.solids().iter().any(|ring| point_in_polygon(tri.centroid(t), ring)))
        .collect();
    let loc = tri.locator();
    let local_h = |p: Point| loc.containing(p).iter().map(|&t| tri.diam(t)).fold(0.0f64, f64::max).max(1e-300);
    let cracks = scene.cracks();
    for i in 0..cracks.len() {
        for j in i + 1..cracks.len() {
            let (d, p, q) = closest_pair(&cracks[i], &cracks[j]);
            if d > 1e-12 && d < 2.0 * local_h(p).max(local_h(q)) {
                return Err(MeshError::SceneTooFine { first: i, second: j, separation: d });
            }
        }
    }
    let graph = Graph::new(tri, &kept);
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(cracks.len());
    for (i, poly) in cracks.iter().enumerate() {
        let tube = poly.iter().map(|&p| local_h(p)).fold(tri.h, f64::max) * 1.01;
        let path = snap_polyline(tri, &graph, poly, tube).ok_or(MeshError::SnapFailed { polyline: i })?;
        paths.push(path);
    }
    for i in 0..paths.len() {
        for j in i + 1..paths.len() {
            let touching = closest_pair(&cracks[i], &cracks[j]).0 <= 1e-12;
            if !touching && paths[i].iter().any(|v| paths[j].contains(v)) {
                let d = closest_pair(&cracks[i], &cracks[j]).0;
                return Err(MeshError::SceneTooFine { first: i, second: j, separation: d });
            }
        }
    }
    // oriented crack edges: (from, to, polyline)
    let mut crack_set: HashMap<(usize, usize), (usize, usize, usize)> = HashMap::new();
    for (i, path) in paths.iter().enumerate() {
        for w in path.windows(2) {
            crack_set.entry(key(w[0], w[1])).or_insert((w[0], w[1], i));
        }
    }

    let mut edge_tris: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (k, &t) in kept.iter().enumerate() {
        let v = tri.triangles[t];
        for e in 0..3 {
            edge_tris.entry(key(v[e], v[(e + 1) % 3])).or_default().push(k);
        }
    }
    let mut dsu = Dsu((0..3 * kept.len()).collect());
    let slot = |k: usize, v: usize| 3 * k + tri.triangles[kept[k]].iter().position(|&u| u == v).unwrap();
    let mut edges: Vec<(usize, usize)> = edge_tris.keys().copied().collect();
    edges.sort_unstable();
    for e in &edges {
        let ts = &edge_tris[e];
        if ts.len() == 2 && !crack_set.contains_key(e) {
            dsu.union(slot(ts[0], e.0), slot(ts[1], e.0));
            dsu.union(slot(ts[0], e.1), slot(ts[1], e.1));
        }
    }
    let nv = tri.vertices.len();
    let mut vertex_slots: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for k in 0..kept.len() {
        for (c, &v) in tri.triangles[kept[k]].iter().enumerate() {
            vertex_slots[v].push(3 * k + c);
        }
    }
    let mut root_dof: HashMap<usize, usize> = HashMap::new();
    let mut dof_vertex = Vec::new();
    let mut dof_map: Vec<Vec<usize>> = vec![Vec::new(); nv];
    for v in 0..nv {
        let mut slots = vertex_slots[v].clone();
        slots.sort_unstable();
        for s in slots {
            let r = dsu.find(s);
            if !root_dof.contains_key(&r) {
                root_dof.insert(r, dof_vertex.len());
                dof_map[v].push(dof_vertex.len());
                dof_vertex.push(v);
            }
        }
    }
    let mut corner_dofs = vec![[0usize; 3]; kept.len()];
    for k in 0..kept.len() {
        for c in 0..3 {
            let r = dsu.find(3 * k + c);
            corner_dofs[k][c] = root_dof[&r];
        }
    }
    let edge_index: HashMap<(usize, usize), usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let dof_at = |k: usize, v: usize| corner_dofs[k][tri.triangles[kept[k]].iter().position(|&u| u == v).unwrap()];

    let mut crack_edges = Vec::new();
    let mut boundary_edges = Vec::new();
    let on_box = |p: Point| {
        let r = tri.radius * 1e-12;
        (p.x - (tri.center.x - tri.radius)).abs() <= r
            || (p.x - (tri.center.x + tri.radius)).abs() <= r
            || (p.y - (tri.center.y - tri.radius)).abs() <= r
            || (p.y - (tri.center.y + tri.radius)).abs() <= r
    };
    for (id, e) in edges.iter().enumerate() {
        let ts = &edge_tris[e];
        if ts.len() == 2 {
            if let Some(&(from, to, polyline)) = crack_set.get(e) {
                let (pf, pt) = (tri.vertices[from], tri.vertices[to]);
                let third = |k: usize| {
                    let v = tri.triangles[kept[k]];
                    tri.vertices[*v.iter().find(|&&u| u != from && u != to).unwrap()]
                };
                let (left, right) = if (pt - pf).cross(third(ts[0]) - pf) > 0.0 { (ts[0], ts[1]) } else { (ts[1], ts[0]) };
                crack_edges.push(CrackEdge {
                    edge: id,
                    polyline,
                    from,
                    to,
                    side_a: (dof_at(left, from), dof_at(left, to)),
                    side_b: (dof_at(right, from), dof_at(right, to)),
                });
            }
        } else {
            let k = ts[0];
            let (pa, pb) = (tri.vertices[e.0], tri.vertices[e.1]);
            let outer = on_box(pa) && on_box(pb) && on_box(pa.lerp(pb, 0.5)) && (pa.x == pb.x || pa.y == pb.y);
            boundary_edges.push(BoundaryEdge {
                edge: id,
                dofs: (dof_at(k, e.0), dof_at(k, e.1)),
                kind: if outer { BoundaryKind::Outer } else { BoundaryKind::Solid },
            });
        }
    }

    let snapped_cracks: Vec<Vec<Point>> =
        paths.iter().map(|p| p.iter().map(|&v| tri.vertices[v]).collect()).collect();
    let snapped = crate::geomkit::build_compact_set(SceneSpec {
        box_radius: tri.radius.max(scene.box_radius()),
        box_center: tri.center,
        cracks: snapped_cracks.iter().map(|c| if c.len() == 2 && c[0] == c[1] { vec![c[0]] } else { c.clone() }).collect(),
        solids: scene.solids().to_vec(),
        label: scene.label().to_string(),
    })?;
    let mut snap_error = 0.0f64;
    if !cracks.is_empty() {
        let req = cracks_only(scene, cracks.to_vec())?;
        let got = cracks_only(scene, snapped.cracks().to_vec())?;
        snap_error = hausdorff_distance(&req, &got, tri.h * 1e-4)?.hi();
    }
    if !scene.solids().is_empty() {
        let worst = kept.iter().map(|&t| tri.diam(t)).fold(tri.h * std::f64::consts::SQRT_2, f64::max);
        snap_error = snap_error.max(worst);
    }
    let h = kept.iter().map(|&t| tri.diam(t)).fold(0.0, f64::max) / std::f64::consts::SQRT_2;
    let crack_edge_set = crack_edges.iter().map(|c| c.edge).collect();
    Ok(CrackMesh {
        tri: tri.clone(),
        triangles: kept,
        corner_dofs,
        dof_vertex,
        dof_map,
        edges,
        crack_edges,
        boundary_edges,
        h,
        snap_error,
        snapped,
        edge_index,
        crack_edge_set,
    })
}

/// Crack-only scene in a box large enough for the snapped copy.
fn cracks_only(like: &CompactScene, cracks: Vec<Vec<Point>>) -> Result<CompactScene, MeshError> {
    Ok(crate::geomkit::build_compact_set(SceneSpec {
        box_radius: like.box_radius() * 4.0 + 1.0,
        box_center: like.box_center(),
        cracks,
        solids: vec![],
        label: String::new(),
    })?)
}

impl CrackMesh {
    pub fn n_dofs(&self) -> usize {
        self.dof_vertex.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn dof_point(&self, d: usize) -> Point {
        self.tri.vertices[self.dof_vertex[d]]
    }

    /// Corner coordinates of kept triangle `k`.
    pub fn corners(&self, k: usize) -> [Point; 3] {
        self.tri.corners(self.triangles[k])
    }

    pub fn area(&self, k: usize) -> f64 {
        self.tri.area(self.triangles[k])
    }

    /// Id of the edge between two vertices, if it is a mesh edge.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_index.get(&key(a, b)).copied()
    }

    pub fn vertex_at(&self, p: Point) -> Option<usize> {
        self.tri.vertices.iter().position(|q| q.dist(p) <= 1e-12 * (1.0 + p.norm()))
    }

    /// Kept-triangle index of each background triangle.
    pub fn kept_index(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.tri.triangles.len()];
        for (k, &t) in self.triangles.iter().enumerate() {
            out[t] = Some(k);
        }
        out
    }

    /// Connected components of the triangles under adjacency that does not
    /// cross crack edges; returns the component of each kept triangle.
    pub fn triangle_components(&self) -> (usize, Vec<usize>) {
        let all: Vec<usize> = (0..self.triangles.len()).collect();
        let (n, local) = self.components_of(&all);
        (n, local)
    }

    /// Components of the kept triangles listed in `subset`, in its order.
    pub fn components_of(&self, subset: &[usize]) -> (usize, Vec<usize>) {
        let mut dsu = Dsu((0..subset.len()).collect());
        let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, &k) in subset.iter().enumerate() {
            let v = self.tri.triangles[self.triangles[k]];
            for e in 0..3 {
                let kk = key(v[e], v[(e + 1) % 3]);
                if self.crack_edge_set.contains(&self.edge_index[&kk]) {
                    continue;
                }
                if let Some(&o) = by_edge.get(&kk) {
                    dsu.union(o, i);
                } else {
                    by_edge.insert(kk, i);
                }
            }
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let comp: Vec<usize> = (0..subset.len())
            .map(|i| {
                let r = dsu.find(i);
                let n = ids.len();
                *ids.entry(r).or_insert(n)
            })
            .collect();
        (ids.len(), comp)
    }

    /// Plain-text dump: vertex, triangle and DOF tables.
    pub fn write_dump(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# vertices {}", self.tri.vertices.len())?;
        for (i, p) in self.tri.vertices.iter().enumerate() {
            writeln!(w, "v {i} {:.17e} {:.17e}", p.x, p.y)?;
        }
        writeln!(w, "# triangles {}", self.triangles.len())?;
        for (k, &t) in self.triangles.iter().enumerate() {
            let v = self.tri.triangles[t];
            let d = self.corner_dofs[k];
            writeln!(w, "t {k} {} {} {} {} {} {}", v[0], v[1], v[2], d[0], d[1], d[2])?;
        }
        writeln!(w, "# dofs {}", self.dof_vertex.len())?;
        for (d, &v) in self.dof_vertex.iter().enumerate() {
            writeln!(w, "d {d} {v}")?;
        }
        writeln!(w, "# crack_edges {}", self.crack_edges.len())?;
        for c in &self.crack_edges {
            writeln!(w, "c {} {} {} {} {} {} {}", c.edge, c.from, c.to, c.side_a.0, c.side_a.1, c.side_b.0, c.side_b.1)?;
        }
        Ok(())
    }
}

/// The two DOF pairs seeing a crack edge from opposite sides.
pub fn crack_side_dofs(mesh: &CrackMesh, edge: usize) -> Result<((usize, usize), (usize, usize)), MeshError> {
    mesh.crack_edges
        .iter()
        .find(|c| c.edge == edge)
        .map(|c| (c.side_a, c.side_b))
        .ok_or(MeshError::NotACrackEdge(edge))
}

pub fn mesh_quality(mesh: &CrackMesh) -> MeshQuality {
    let mut min_angle = f64::INFINITY;
    let mut max_aspect = 0.0f64;
    let mut area_total = 0.0;
    for k in 0..mesh.triangles.len() {
        let p = mesh.corners(k);
        for i in 0..3 {
            let (u, v) = (p[(i + 1) % 3] - p[i], p[(i + 2) % 3] - p[i]);
            let ang = (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos().to_degrees();
            min_angle = min_angle.min(ang);
        }
        let area = mesh.area(k);
        let longest = p[0].dist(p[1]).max(p[1].dist(p[2])).max(p[2].dist(p[0]));
        let perim = p[0].dist(p[1]) + p[1].dist(p[2]) + p[2].dist(p[0]);
        let inradius = 2.0 * area / perim;
        max_aspect = max_aspect.max(longest / (2.0 * inradius));
        area_total += area;
    }
    MeshQuality { min_angle, max_aspect, area_total, component_count: mesh.triangle_components().0 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_box(cracks: Vec<Vec<Point>>, solids: Vec<Vec<Point>>) -> CompactScene {
        crate::geomkit::build_compact_set(SceneSpec {
            box_radius: 0.5,
            box_center: Point::new(0.5, 0.5),
            cracks,
            solids,
            label: String::new(),
        })
        .unwrap()
    }

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn empty_scene_counts() {
        let m = build_cracked_mesh(&unit_box(vec![], vec![]), 0.5).unwrap();
        assert_eq!(m.tri.vertices.len(), 9);
        assert_eq!(m.n_triangles(), 8);
        assert_eq!(m.n_dofs(), 9);
        assert_eq!(m.snap_error, 0.0);
        let q = mesh_quality(&m);
        assert!((q.min_angle - 45.0).abs() < 1e-9);
        assert!((q.area_total - 1.0).abs() < 1e-12);
        assert_eq!(q.component_count, 1);
        assert_eq!(m.boundary_edges.len(), 8);
    }

    #[test]
    fn interior_crack_duplicates_middle_vertex() {
        let m = build_cracked_mesh(&unit_box(vec![vec![p(0.25, 0.5), p(0.75, 0.5)]], vec![]), 0.25).unwrap();
        assert_eq!(m.tri.vertices.len(), 25);
        assert_eq!(m.n_dofs(), 26);
        assert_eq!(m.crack_edges.len(), 2);
        assert!(m.snap_error < 1e-9);
        let mid = m.vertex_at(p(0.5, 0.5)).unwrap();
        let tip = m.vertex_at(p(0.25, 0.5)).unwrap();
        assert_eq!(m.dof_map[mid].len(), 2);
        assert_eq!(m.dof_map[tip].len(), 1);
        let e = m.edge_id(tip, mid).unwrap();
        let (a, b) = crack_side_dofs(&m, e).unwrap();
        let (mid_a, mid_b) = if m.dof_vertex[a.0] == mid { (a.0, b.0) } else { (a.1, b.1) };
        assert_ne!(mid_a, mid_b);
        let (tip_a, tip_b) = if m.dof_vertex[a.0] == tip { (a.0, b.0) } else { (a.1, b.1) };
        assert_eq!(tip_a, tip_b);
        let outer = m.edge_id(m.vertex_at(p(0.0, 0.0)).unwrap(), m.vertex_at(p(0.25, 0.0)).unwrap()).unwrap();
        assert_eq!(crack_side_dofs(&m, outer), Err(MeshError::NotACrackEdge(outer)));
        assert_eq!(mesh_quality(&m).component_count, 1);
    }

    #[test]
    fn side_a_is_left_of_traversal() {
        let m = build_cracked_mesh(&unit_box(vec![vec![p(0.25, 0.5), p(0.75, 0.5)]], vec![]), 0.25).unwrap();
        for c in &m.crack_edges {
            let (f, t) = (m.tri.vertices[c.from], m.tri.vertices[c.to]);
            let k = m
                .corner_dofs
                .iter()
                .position(|d| d.contains(&c.side_a.0) && d.contains(&c.side_a.1))
                .unwrap();
            let cen = m.tri.centroid(m.triangles[k]);
            assert!((t - f).cross(cen - f) > 0.0);
        }
    }

    #[test]
    fn full_width_crack_splits_domain() {
        let m = build_cracked_mesh(&unit_box(vec![vec![p(0.0, 0.5), p(1.0, 0.5)]], vec![]), 0.25).unwrap();
        assert_eq!(mesh_quality(&m).component_count, 2);
        assert_eq!(m.n_dofs(), 30);
    }

    #[test]
    fn close_cracks_rejected() {
        let s = unit_box(vec![vec![p(0.2, 0.5), p(0.8, 0.5)], vec![p(0.2, 0.55), p(0.8, 0.55)]], vec![]);
        assert!(matches!(build_cracked_mesh(&s, 0.25), Err(MeshError::SceneTooFine { .. })));
        assert!(build_cracked_mesh(&s, 0.01).is_ok());
    }

    #[test]
    fn invalid_spacing() {
        let s = unit_box(vec![], vec![]);
        assert_eq!(build_cracked_mesh(&s, 0.0).unwrap_err(), MeshError::InvalidSpacing(0.0));
    }

    #[test]
    fn off_grid_crack_snaps_within_spacing() {
        let s = unit_box(vec![vec![p(0.13, 0.21), p(0.87, 0.66)]], vec![]);
        let m = build_cracked_mesh(&s, 1.0 / 16.0).unwrap();
        assert!(m.snap_error > 0.0 && m.snap_error <= m.h, "{}", m.snap_error);
        assert!(!m.crack_edges.is_empty());
    }

    #[test]
    fn solid_removes_triangles() {
        let sq = vec![p(0.25, 0.25), p(0.75, 0.25), p(0.75, 0.75), p(0.25, 0.75)];
        let m = build_cracked_mesh(&unit_box(vec![], vec![sq]), 0.125).unwrap();
        let q = mesh_quality(&m);
        assert!((q.area_total - 0.75).abs() < 1e-12);
        assert!(m.boundary_edges.iter().any(|b| b.kind == BoundaryKind::Solid));
        assert_eq!(m.boundary_edges.iter().filter(|b| b.kind == BoundaryKind::Outer).count(), 32);
    }

    #[test]
    fn graded_mesh_is_conforming() {
        let s = unit_box(vec![vec![p(0.25, 0.5), p(0.75, 0.5)]], vec![]);
        let opts = MeshOptions { h: 0.125, refine_points: vec![p(0.75, 0.5)], hmin: 0.01, ..Default::default() };
        let m = build_cracked_mesh_with(&s, &opts).unwrap();
        assert!((mesh_quality(&m).area_total - 1.0).abs() < 1e-12);
        assert!(m.n_dofs() > m.tri.vertices.len());
        let mut dump = Vec::new();
        m.write_dump(&mut dump).unwrap();
        assert!(String::from_utf8(dump).unwrap().starts_with("# vertices"));
    }
}
