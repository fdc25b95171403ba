//! Polyline machinery shared by the class checks: arclength chains, ball
//! clipping, the rotated-graph test and the chord-arc test.

use crate::geomkit::{dist_point_segment, segments_intersect, Point};
use std::collections::HashMap;
use std::f64::consts::PI;

#[derive(Debug, Clone)]
pub(crate) struct Chain {
    pub pts: Vec<Point>,
    pub closed: bool,
    pub cum: Vec<f64>,
}

impl Chain {
    pub fn new(pts: Vec<Point>, closed: bool) -> Self {
        let mut cum = Vec::with_capacity(pts.len());
        let mut s = 0.0;
        for (i, p) in pts.iter().enumerate() {
            if i > 0 {
                s += p.dist(pts[i - 1]);
            }
            cum.push(s);
        }
        Chain { pts, closed, cum }
    }

    pub fn length(&self) -> f64 {
        *self.cum.last().unwrap_or(&0.0)
    }

    pub fn point_at(&self, s: f64) -> Point {
        let n = self.pts.len();
        if n == 1 {
            return self.pts[0];
        }
        let total = self.length();
        let s = if self.closed { s.rem_euclid(total) } else { s.clamp(0.0, total) };
        let i = match self.cum.binary_search_by(|c| c.total_cmp(&s)) {
            Ok(i) => return self.pts[i],
            Err(i) => i.clamp(1, n - 1),
        };
        let (s0, s1) = (self.cum[i - 1], self.cum[i]);
        self.pts[i - 1].lerp(self.pts[i], (s - s0) / (s1 - s0))
    }

    /// Points at arclength spacing at most `ds`, plus all vertices.
    pub fn samples(&self, ds: f64) -> Vec<(f64, Point)> {
        let mut out = Vec::new();
        for i in 0..self.pts.len() {
            out.push((self.cum[i], self.pts[i]));
            if i + 1 < self.pts.len() {
                let l = self.cum[i + 1] - self.cum[i];
                let k = (l / ds).ceil() as usize;
                for j in 1..k {
                    let t = j as f64 / k as f64;
                    out.push((self.cum[i] + t * l, self.pts[i].lerp(self.pts[i + 1], t)));
                }
            }
        }
        out
    }
}

/// A connected piece of `chain ∩ closed ball`, with its arclength range.
/// On closed chains `s1` may exceed the chain length when the piece wraps.
#[derive(Debug, Clone)]
pub(crate) struct ClipPiece {
    pub pts: Vec<Point>,
    pub s0: f64,
    pub s1: f64,
}

fn clip_segment(a: Point, b: Point, c: Point, rad: f64) -> Option<(f64, f64)> {
    let d = b - a;
    let f = a - c;
    let qa = d.dot(d);
    let qb = 2.0 * f.dot(d);
    let qc = f.dot(f) - rad * rad;
    let disc = qb * qb - 4.0 * qa * qc;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let t0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
    let t1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
    if t0 > t1 {
        None
    } else {
        Some((t0, t1))
    }
}

pub(crate) fn clip_chain(chain: &Chain, c: Point, rad: f64) -> Vec<ClipPiece> {
    let n = chain.pts.len();
    if n == 1 {
        return if chain.pts[0].dist(c) <= rad {
            vec![ClipPiece { pts: vec![chain.pts[0]], s0: 0.0, s1: 0.0 }]
        } else {
            vec![]
        };
    }
    let mut pieces: Vec<ClipPiece> = Vec::new();
    let mut open = false;
    for i in 0..n - 1 {
        let (a, b) = (chain.pts[i], chain.pts[i + 1]);
        let l = chain.cum[i + 1] - chain.cum[i];
        match clip_segment(a, b, c, rad) {
            Some((t0, t1)) => {
                let (p0, p1) = (a.lerp(b, t0), a.lerp(b, t1));
                if open && t0 == 0.0 {
                    let cur = pieces.last_mut().unwrap();
                    cur.pts.push(p1);
                    cur.s1 = chain.cum[i] + t1 * l;
                } else {
                    pieces.push(ClipPiece {
                        pts: vec![p0, p1],
                        s0: chain.cum[i] + t0 * l,
                        s1: chain.cum[i] + t1 * l,
                    });
                }
                open = t1 == 1.0;
            }
            None => open = false,
        }
    }
    if chain.closed && pieces.len() >= 2 {
        let total = chain.length();
        let first_starts = pieces[0].s0 == 0.0;
        let last_ends = (pieces[pieces.len() - 1].s1 - total).abs() <= 1e-15 * (1.0 + total);
        if first_starts && last_ends {
            let first = pieces.remove(0);
            let last = pieces.last_mut().unwrap();
            last.pts.extend_from_slice(&first.pts[1..]);
            last.s1 = total + first.s1;
        }
    }
    pieces
}

/// Outcome of the rotated-graph test on a set of clipped pieces.
#[derive(Debug, Clone, Copy)]
pub(crate) struct GraphFit {
    /// Graph direction.
    pub theta: f64,
    /// Smallest slope bound compatible with the chord directions.
    pub slope: f64,
    /// Whether the pieces are a graph over `theta` with slope at most the
    /// requested bound.
    pub ok: bool,
}

/// Tests whether the union of `pieces` is a Lipschitz graph over some
/// direction with slope at most `lambda`.
///
/// All chord directions between clipped vertices must fit in a double cone of
/// half-angle `atan(lambda)`; then every pair of segments must have its four
/// vertex differences in a single nappe, which extends the bound to all
/// points of the segments.
pub(crate) fn graph_test(pieces: &[Vec<Point>], lambda: f64) -> GraphFit {
    let verts: Vec<Point> = pieces.iter().flatten().copied().collect();
    let scale = verts.iter().fold(0.0f64, |m, p| m.max(p.norm())) + 1.0;
    let eps = 1e-12 * scale;
    let mut ang: Vec<f64> = Vec::new();
    for i in 0..verts.len() {
        for j in i + 1..verts.len() {
            let v = verts[j] - verts[i];
            if v.norm() > eps {
                ang.push((2.0 * v.y.atan2(v.x)).rem_euclid(2.0 * PI));
            }
        }
    }
    if ang.is_empty() {
        return GraphFit { theta: 0.0, slope: 0.0, ok: true };
    }
    ang.sort_by(|a, b| a.total_cmp(b));
    let m = ang.len();
    let (mut gap, mut after) = (ang[0] + 2.0 * PI - ang[m - 1], 0usize);
    for k in 1..m {
        let g = ang[k] - ang[k - 1];
        if g > gap {
            gap = g;
            after = k;
        }
    }
    let cover = 2.0 * PI - gap;
    let half = cover / 4.0;
    let slope = if half >= PI / 2.0 - 1e-15 { f64::INFINITY } else { half.tan() };
    let theta = 0.5 * (ang[after] + 0.5 * cover);
    if slope > lambda * (1.0 + 1e-9) + 1e-12 {
        return GraphFit { theta, slope, ok: false };
    }
    let dir = Point::new(theta.cos(), theta.sin());
    let segs: Vec<(Point, Point)> =
        pieces.iter().flat_map(|p| p.windows(2).map(|w| (w[0], w[1]))).collect();
    for i in 0..segs.len() {
        for j in i + 1..segs.len() {
            let (a, b) = segs[i];
            let (c, d) = segs[j];
            let vs = [c - a, c - b, d - a, d - b];
            let (mut pos, mut neg) = (false, false);
            for v in vs {
                let n = v.norm();
                if n <= eps {
                    continue;
                }
                let t = v.dot(dir);
                if t > 1e-14 * n {
                    pos = true;
                } else if t < -1e-14 * n {
                    neg = true;
                }
            }
            if pos && neg {
                let collinear = vs.iter().all(|v| v.cross(b - a).abs() <= eps * (b - a).norm().max(1.0))
                    && (d - c).cross(b - a).abs() <= eps * scale;
                if !collinear {
                    return GraphFit { theta, slope, ok: false };
                }
            }
        }
    }
    GraphFit { theta, slope, ok: true }
}

/// Sharpest chord-arc violation: pairs `p, q` on the chain whose sub-arc stays
/// inside the open ball `B_r(p)` but has `arclength > bound * |p - q|`.
/// Returns the worst point and its ratio `|p - q| / arclength`.
pub(crate) fn chord_arc_violation(chain: &Chain, r: f64, bound: f64, ds: f64) -> Option<(Point, f64)> {
    let total = chain.length();
    if total == 0.0 {
        return None;
    }
    let samples = chain.samples(ds);
    // on a loop the last sample repeats the first
    let n = if chain.closed { samples.len() - 1 } else { samples.len() };
    let mut worst: Option<(Point, f64)> = None;
    for i in 0..n {
        let (s, p) = samples[i];
        for k in 1..n {
            let j = i + k;
            if !chain.closed && j >= n {
                break;
            }
            let (sj, q) = if j >= n { (samples[j - n].0 + total, samples[j - n].1) } else { samples[j] };
            let travelled = sj - s;
            let chord = p.dist(q);
            if chord >= r {
                break;
            }
            if travelled > bound * chord * (1.0 + 1e-9) + 1e-12 {
                let ratio = chord / travelled;
                if worst.map_or(true, |w| ratio < w.1) {
                    worst = Some((p, ratio));
                }
            }
        }
    }
    worst
}

/// Contact point of two closed segments, if they touch.
pub(crate) fn segment_contact(a: Point, b: Point, c: Point, d: Point) -> Option<Point> {
    if !segments_intersect(a, b, c, d) {
        return None;
    }
    let r = b - a;
    let s = d - c;
    let den = r.cross(s);
    if den.abs() > 1e-14 * r.norm() * s.norm() {
        let t = (c - a).cross(s) / den;
        return Some(a.lerp(b, t.clamp(0.0, 1.0)));
    }
    // parallel: report the middle of the overlap
    let pts: Vec<Point> = [a, b, c, d]
        .into_iter()
        .filter(|&p| dist_point_segment(p, a, b) <= 1e-12 && dist_point_segment(p, c, d) <= 1e-12)
        .collect();
    let (p0, p1) = (pts[0], *pts.last().unwrap());
    Some(p0.lerp(p1, 0.5))
}

/// Union of a segment set as a graph: chains through degree-two nodes, end
/// points (degree one) and the first branching or crossing point, if any.
#[derive(Debug, Clone, Default)]
pub(crate) struct UnionCurves {
    pub chains: Vec<Chain>,
    pub ends: Vec<Point>,
    pub branch: Option<Point>,
}

pub(crate) fn build_union(segs: &[(Point, Point)]) -> UnionCurves {
    let cell = 1e-6;
    let mut nodes: Vec<Point> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut node_of = |p: Point, nodes: &mut Vec<Point>| -> usize {
        let (ix, iy) = ((p.x / cell).floor() as i64, (p.y / cell).floor() as i64);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(v) = grid.get(&(ix + dx, iy + dy)) {
                    for &k in v {
                        if nodes[k].dist(p) <= 1e-9 {
                            return k;
                        }
                    }
                }
            }
        }
        nodes.push(p);
        grid.entry((ix, iy)).or_default().push(nodes.len() - 1);
        nodes.len() - 1
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for &(a, b) in segs {
        let (i, j) = (node_of(a, &mut nodes), node_of(b, &mut nodes));
        if i == j {
            continue;
        }
        let key = (i.min(j), i.max(j));
        if !edges.contains(&key) {
            edges.push(key);
        }
    }
    let mut adj: Vec<Vec<usize>> = vec![vec![]; nodes.len()];
    for (e, &(i, j)) in edges.iter().enumerate() {
        adj[i].push(e);
        adj[j].push(e);
    }
    let mut out = UnionCurves::default();
    if let Some(k) = (0..nodes.len()).find(|&k| adj[k].len() >= 3) {
        out.branch = Some(nodes[k]);
    }
    if out.branch.is_none() {
        'outer: for e in 0..edges.len() {
            let (a, b) = (nodes[edges[e].0], nodes[edges[e].1]);
            for f in e + 1..edges.len() {
                let shared = edges[e].0 == edges[f].0
                    || edges[e].0 == edges[f].1
                    || edges[e].1 == edges[f].0
                    || edges[e].1 == edges[f].1;
                let (c, d) = (nodes[edges[f].0], nodes[edges[f].1]);
                if shared {
                    // adjacent edges folding back onto each other
                    let (o, u, v) = if edges[e].0 == edges[f].0 {
                        (a, b, d)
                    } else if edges[e].0 == edges[f].1 {
                        (a, b, c)
                    } else if edges[e].1 == edges[f].0 {
                        (b, a, d)
                    } else {
                        (b, a, c)
                    };
                    let (du, dv) = (u - o, v - o);
                    if du.cross(dv).abs() <= 1e-12 * du.norm() * dv.norm() && du.dot(dv) > 0.0 {
                        out.branch = Some(o);
                        break 'outer;
                    }
                    continue;
                }
                if let Some(p) = segment_contact(a, b, c, d) {
                    out.branch = Some(p);
                    break 'outer;
                }
            }
        }
    }
    for k in 0..nodes.len() {
        if adj[k].len() == 1 {
            out.ends.push(nodes[k]);
        }
    }
    let mut used = vec![false; edges.len()];
    let walk = |start: usize, first_edge: usize, used: &mut Vec<bool>| -> Vec<Point> {
        let mut pts = vec![nodes[start]];
        let (mut cur, mut e) = (start, first_edge);
        loop {
            used[e] = true;
            let next = if edges[e].0 == cur { edges[e].1 } else { edges[e].0 };
            pts.push(nodes[next]);
            cur = next;
            match adj[cur].iter().copied().find(|&f| !used[f]) {
                Some(f) if adj[cur].len() == 2 => e = f,
                _ => break,
            }
        }
        pts
    };
    for k in 0..nodes.len() {
        if adj[k].len() != 2 {
            for &e in &adj[k] {
                if !used[e] {
                    let pts = walk(k, e, &mut used);
                    out.chains.push(Chain::new(pts, false));
                }
            }
        }
    }
    for e in 0..edges.len() {
        if !used[e] {
            let start = edges[e].0;
            let pts = walk(start, e, &mut used);
            let closed = pts.len() > 2 && pts[0].dist(*pts.last().unwrap()) <= 1e-9;
            out.chains.push(Chain::new(pts, closed));
        }
    }
    out
}
