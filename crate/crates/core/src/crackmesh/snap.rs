use super::triangulation::Triangulation;
use crate::geomkit::{dist_point_segment, Point};
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

pub(crate) struct Graph {
    adj: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(tri: &Triangulation, tris: &[usize]) -> Self {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); tri.vertices.len()];
        for &t in tris {
            let v = tri.triangles[t];
            for k in 0..3 {
                let (a, b) = (v[k], v[(k + 1) % 3]);
                if !adj[a].contains(&b) {
                    adj[a].push(b);
                    adj[b].push(a);
                }
            }
        }
        Graph { adj }
    }

    pub fn is_used(&self, v: usize) -> bool {
        !self.adj[v].is_empty()
    }
}

#[derive(PartialEq)]
struct State(f64, usize);

impl Eq for State {}

impl PartialOrd for State {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for State {
    fn cmp(&self, o: &Self) -> Ordering {
        o.0.total_cmp(&self.0).then(o.1.cmp(&self.1))
    }
}

pub(crate) fn nearest_vertex(tri: &Triangulation, g: &Graph, p: Point) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, v) in tri.vertices.iter().enumerate() {
        if g.is_used(i) {
            let d = v.dist(p);
            if d < best.0 {
                best = (d, i);
            }
        }
    }
    best.1
}

/// Shortest grid path from `s` to `t` inside the tube of radius `tube` around
/// the segment `a b`; edges pay their length weighted by the squared offset of
/// their midpoint.
fn tube_path(tri: &Triangulation, g: &Graph, s: usize, t: usize, a: Point, b: Point, tube: f64) -> Option<Vec<usize>> {
    let vs = &tri.vertices;
    let allowed = |v: usize| dist_point_segment(vs[v], a, b) <= tube || v == s || v == t;
    let mut dist: HashMap<usize, f64> = HashMap::new();
    let mut prev: HashMap<usize, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    dist.insert(s, 0.0);
    heap.push(State(0.0, s));
    while let Some(State(d, v)) = heap.pop() {
        if v == t {
            let mut path = vec![t];
            let mut cur = t;
            while cur != s {
                cur = prev[&cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        if d > *dist.get(&v).unwrap_or(&f64::INFINITY) {
            continue;
        }
        for &w in &g.adj[v] {
            if !allowed(w) {
                continue;
            }
            let len = vs[v].dist(vs[w]);
            let off = dist_point_segment(vs[v].lerp(vs[w], 0.5), a, b) / tube;
            let nd = d + len * (1.0 + 8.0 * off * off);
            if nd < *dist.get(&w).unwrap_or(&f64::INFINITY) {
                dist.insert(w, nd);
                prev.insert(w, v);
                heap.push(State(nd, w));
            }
        }
    }
    None
}

/// Snaps a polyline to a vertex path of the mesh graph. Loops created by the
/// snapping are cut out.
pub(crate) fn snap_polyline(tri: &Triangulation, g: &Graph, poly: &[Point], tube: f64) -> Option<Vec<usize>> {
    let anchors: Vec<usize> = poly.iter().map(|&p| nearest_vertex(tri, g, p)).collect();
    let mut path = vec![anchors[0]];
    for k in 1..anchors.len() {
        if anchors[k] == *path.last().unwrap() {
            continue;
        }
        let seg = tube_path(tri, g, *path.last().unwrap(), anchors[k], poly[k - 1], poly[k], tube)
            .or_else(|| tube_path(tri, g, *path.last().unwrap(), anchors[k], poly[k - 1], poly[k], 3.0 * tube))?;
        path.extend_from_slice(&seg[1..]);
    }
    let closed = poly.len() >= 4 && poly[0] == poly[poly.len() - 1];
    let mut out: Vec<usize> = Vec::with_capacity(path.len());
    for (i, &v) in path.iter().enumerate() {
        let last = closed && i + 1 == path.len();
        if !last {
            if let Some(pos) = out.iter().position(|&u| u == v) {
                out.truncate(pos + 1);
                continue;
            }
        }
        out.push(v);
    }
    Some(out)
}
