use super::decomposition::{piece_arcs, piece_bdry, piece_segments, piece_sing, Decomposition};
use super::params::Modulus;
use super::verdict::Verdict;
use super::ClassError;
use crate::geomkit::{dist_point_segment, CompactScene, Point};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Which point set of a piece the gluing modulus is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Anchor {
    Sing,
    Bdry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GluingReport {
    pub verdict: Verdict,
    /// Smallest sampled `dist(x, other pieces) / dist(x, anchor)` over points
    /// with anchor distance at most `delta0`; only for linear moduli.
    pub min_ratio: Option<f64>,
}

struct PointSet {
    segs: Vec<(Point, Point)>,
    pts: Vec<Point>,
}

impl PointSet {
    fn dist(&self, x: Point) -> f64 {
        let d = self.segs.iter().fold(f64::INFINITY, |m, &(a, b)| m.min(dist_point_segment(x, a, b)));
        self.pts.iter().fold(d, |m, p| m.min(p.dist(x)))
    }

    fn is_empty(&self) -> bool {
        self.segs.is_empty() && self.pts.is_empty()
    }
}

/// Checks the gluing condition `dist(x, ∪_{j≠i} K^j) >= ω(dist(x, A_i)) - tol`
/// for all `x` on each piece `K^i`, where `A_i` is its singular set or its
/// boundary.
///
/// Certified by branch-and-bound over the piece segments: both distances are
/// 1-Lipschitz, so on a sub-segment of half-length `h` with midpoint `m` the
/// margin is at least `d_o(m) - h - ω(d_a(m) + h)`.
pub fn check_gluing(
    scene: &CompactScene,
    decomposition: &Decomposition,
    anchor: Anchor,
    omega: &Modulus,
    tol: f64,
) -> Result<GluingReport, ClassError> {
    if decomposition.pieces.is_empty() {
        return Err(ClassError::NoOtherPieces);
    }
    if !(tol > 0.0) {
        return Err(ClassError::InvalidParams("tol must be positive".into()));
    }
    omega.validate()?;
    let mut bodies = Vec::new();
    for piece in &decomposition.pieces {
        let arcs = piece_arcs(scene, piece)?;
        let pts: Vec<Point> = arcs.iter().filter(|a| a.pts.len() == 1).map(|a| a.pts[0]).collect();
        bodies.push(PointSet { segs: piece_segments(&arcs), pts });
    }
    let lin = omega.linear_params();
    let mut min_ratio: Option<f64> = None;
    let mut verdicts = Vec::new();
    for (i, piece) in decomposition.pieces.iter().enumerate() {
        let anchor_pts = match anchor {
            Anchor::Sing => piece_sing(scene, piece)?,
            Anchor::Bdry => piece_bdry(scene, piece)?,
        };
        let others = PointSet {
            segs: bodies.iter().enumerate().filter(|&(j, _)| j != i).flat_map(|(_, b)| b.segs.clone()).collect(),
            pts: bodies.iter().enumerate().filter(|&(j, _)| j != i).flat_map(|(_, b)| b.pts.clone()).collect(),
        };
        if anchor_pts.is_empty() || others.is_empty() {
            continue;
        }
        let anchors = PointSet { segs: vec![], pts: anchor_pts };
        if let Some((_, delta0)) = lin {
            for &(a, b) in &bodies[i].segs {
                for k in 0..=64 {
                    let x = a.lerp(b, k as f64 / 64.0);
                    let da = anchors.dist(x);
                    if da > 1e-9 && da <= delta0 {
                        let ratio = others.dist(x) / da;
                        min_ratio = Some(min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
                    }
                }
            }
        }
        for &(a, b) in &bodies[i].segs {
            let v = bisect_segment(a, b, &anchors, &others, omega, tol, &mut |da, d_o| {
                if let Some((_, delta0)) = lin {
                    if da > 1e-9 && da <= delta0 {
                        let ratio = d_o / da;
                        min_ratio = Some(min_ratio.map_or(ratio, |m: f64| m.min(ratio)));
                    }
                }
            });
            verdicts.push(v);
        }
    }
    let verdict = if verdicts.is_empty() {
        Verdict::pass(Point::default(), "gluing.vacuous", 0.0)
    } else {
        let mut v = Verdict::all(verdicts);
        v.witnesses.sort_by(|x, y| x.value.total_cmp(&y.value));
        v
    };
    Ok(GluingReport { verdict, min_ratio })
}

/// Best-first minimization of the margin `d_o - ω(d_a)` over one segment.
fn bisect_segment(
    a: Point,
    b: Point,
    anchors: &PointSet,
    others: &PointSet,
    omega: &Modulus,
    tol: f64,
    observe: &mut impl FnMut(f64, f64),
) -> Verdict {
    let min_h = (tol * 1e-3).max(1e-13);
    let len = a.dist(b);
    let mut heap = BinaryHeap::new();
    let mut worst = (f64::INFINITY, a);
    let mut eval = |t0: f64, t1: f64, worst: &mut (f64, Point)| {
        let m = a.lerp(b, 0.5 * (t0 + t1));
        let h = 0.5 * (t1 - t0) * len;
        let (da, d_o) = (anchors.dist(m), others.dist(m));
        observe(da, d_o);
        let g = d_o - omega.eval(da);
        if g < worst.0 {
            *worst = (g, m);
        }
        Node { lb: d_o - h - omega.eval(da + h), t0, t1, h }
    };
    heap.push(eval(0.0, 1.0, &mut worst));
    while let Some(node) = heap.pop() {
        if node.lb >= -tol {
            break;
        }
        if worst.0 < -tol && worst.0 - node.lb <= tol {
            break;
        }
        if node.h < min_h {
            if worst.0 < -tol {
                break;
            }
            return Verdict::unknown(worst.1, "gluing.modulus", worst.0);
        }
        let tm = 0.5 * (node.t0 + node.t1);
        heap.push(eval(node.t0, tm, &mut worst));
        heap.push(eval(tm, node.t1, &mut worst));
    }
    if worst.0 < -tol {
        Verdict::fail(worst.1, "gluing.modulus", worst.0)
    } else {
        Verdict::pass(worst.1, "gluing.modulus", worst.0)
    }
}

struct Node {
    lb: f64,
    t0: f64,
    t1: f64,
    h: f64,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.lb == o.lb
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Node {
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.total_cmp(&self.lb)
    }
}

#[cfg(test)]
mod tests {
    use super::super::decomposition::{ArcRef, FrPiece};
    use super::super::verdict::Status;
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn plus(theta: f64) -> CompactScene {
        let o = p(0.0, 0.0);
        let u = p(theta.cos(), theta.sin());
        CompactScene::from_cracks(2.0, vec![vec![o, p(1.0, 0.0)], vec![o, u], vec![o, p(-1.0, 0.0)], vec![o, -u]])
            .unwrap()
    }

    #[test]
    fn plus_arms_glue_linearly() {
        for deg in [90.0f64, 60.0, 30.0] {
            let th = deg.to_radians();
            let s = plus(th);
            let d = Decomposition::per_polyline(&s);
            let rep = check_gluing(&s, &d, Anchor::Bdry, &Modulus::linear(th.sin() * 0.999, 0.5), 1e-6).unwrap();
            assert_eq!(rep.verdict.status, Status::Pass, "{deg}");
            let a = rep.min_ratio.unwrap();
            assert!((a - th.sin()).abs() < 1e-6, "{deg}: {a}");
        }
    }

    #[test]
    fn plus_two_pieces_fail_at_center() {
        let s = plus(std::f64::consts::FRAC_PI_2);
        let d = Decomposition {
            pieces: vec![
                FrPiece {
                    arcs: vec![ArcRef { polyline: 0, start: 0, end: 1 }, ArcRef { polyline: 2, start: 0, end: 1 }],
                },
                FrPiece {
                    arcs: vec![ArcRef { polyline: 1, start: 0, end: 1 }, ArcRef { polyline: 3, start: 0, end: 1 }],
                },
            ],
        };
        for omega in [Modulus::identity(), Modulus::Quadratic { a: 1e-3 }] {
            let rep = check_gluing(&s, &d, Anchor::Bdry, &omega, 1e-6).unwrap();
            assert_eq!(rep.verdict.status, Status::Fail);
            assert!(rep.verdict.witnesses[0].point.norm() < 1e-6);
        }
    }

    #[test]
    fn single_piece_is_vacuous_and_empty_is_error() {
        let s = plus(1.0);
        let d = Decomposition::single_piece(&s);
        assert!(check_gluing(&s, &d, Anchor::Sing, &Modulus::identity(), 1e-6).unwrap().verdict.is_pass());
        assert!(matches!(
            check_gluing(&s, &Decomposition::default(), Anchor::Sing, &Modulus::identity(), 1e-6),
            Err(ClassError::NoOtherPieces)
        ));
    }
}
