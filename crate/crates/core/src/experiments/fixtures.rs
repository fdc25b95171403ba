//! Scene families used by the experiments and their tests.

use crate::classlab::{ArcRef, Decomposition, FrPiece};
use crate::geomkit::{build_compact_set, CompactScene, GeomError, Point, SceneSpec};
use std::f64::consts::PI;

pub fn p(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

pub fn scene(box_radius: f64, box_center: Point, cracks: Vec<Vec<Point>>, label: &str) -> Result<CompactScene, GeomError> {
    build_compact_set(SceneSpec { box_radius, box_center, cracks, solids: vec![], label: label.into() })
}

/// Segment of length `len` centred at `c`, at angle `theta`.
pub fn segment(c: Point, len: f64, theta: f64) -> Vec<Point> {
    let u = p(theta.cos(), theta.sin());
    vec![p(c.x - 0.5 * len * u.x, c.y - 0.5 * len * u.y), p(c.x + 0.5 * len * u.x, c.y + 0.5 * len * u.y)]
}

/// Unit crack centred at the origin rotated by `theta`, in the box of
/// half-width 1.
pub fn rotated_crack(theta: f64) -> CompactScene {
    scene(1.0, Point::default(), vec![segment(Point::default(), 1.0, theta)], &format!("crack@{theta:.6}"))
        .expect("valid crack scene")
}

/// Four arms of length `arm` from the origin at angles 0, θ, π, π+θ.
pub fn plus(theta: f64, arm: f64, box_radius: f64) -> CompactScene {
    let o = Point::default();
    let u = p(arm * theta.cos(), arm * theta.sin());
    scene(
        box_radius,
        o,
        vec![vec![o, p(arm, 0.0)], vec![o, u], vec![o, p(-arm, 0.0)], vec![o, -u]],
        &format!("plus{:.0}", theta.to_degrees()),
    )
    .expect("valid plus scene")
}

/// Plus-sign as two straight pieces crossing at the centre.
pub fn plus_two_pieces() -> Decomposition {
    let arc = |i| ArcRef { polyline: i, start: 0, end: 1 };
    Decomposition { pieces: vec![FrPiece { arcs: vec![arc(0), arc(2)] }, FrPiece { arcs: vec![arc(1), arc(3)] }] }
}

/// Right-angle polyline (0,1)-(0,0)-(1,0).
pub fn l_shape() -> CompactScene {
    scene(1.5, Point::default(), vec![vec![p(0.0, 1.0), p(0.0, 0.0), p(1.0, 0.0)]], "l-shape").expect("valid")
}

/// The L-shape as its two legs.
pub fn l_shape_arcs() -> Decomposition {
    Decomposition {
        pieces: vec![FrPiece {
            arcs: vec![ArcRef { polyline: 0, start: 0, end: 1 }, ArcRef { polyline: 0, start: 1, end: 2 }],
        }],
    }
}

/// Parameters of the parabola `t -> (t, t^2 / beta)` on `[0, 1]`: uniform
/// step 1/64 down to 1/64, then geometric towards the tangency point so the
/// polyline keeps the quadratic contact.
pub fn parabola_params() -> Vec<f64> {
    let mut t: Vec<f64> = (1..=64).map(|k| k as f64 / 64.0).collect();
    t.extend((7..=10).map(|k| 0.5f64.powi(k)));
    t.push(0.0);
    t.sort_by(f64::total_cmp);
    t.dedup();
    t
}

/// Segment (0,0)-(1,0) and the parabola `y = x^2 / beta` tangent to it at
/// the origin; the cusp between them sharpens as `beta` grows.
pub fn tangent_parabola(beta: f64) -> CompactScene {
    let par: Vec<Point> = parabola_params().into_iter().map(|t| p(t, t * t / beta)).collect();
    scene(1.0, p(0.5, 0.0), vec![vec![p(0.0, 0.0), p(1.0, 0.0)], par], &format!("parabola{beta}")).expect("valid")
}

/// Unit-circle arc `theta in [1/n, 2 pi]` with `m` segments.
pub fn pacman(n: u32, m: usize) -> CompactScene {
    let a0 = 1.0 / n as f64;
    let pts: Vec<Point> =
        (0..=m).map(|i| p(1.0, 0.0).rotate(a0 + (2.0 * PI - a0) * i as f64 / m as f64)).collect();
    scene(1.5, Point::default(), vec![pts], &format!("pacman{n}")).expect("valid")
}

/// Closed unit circle with `m` segments.
pub fn circle(m: usize) -> CompactScene {
    let mut pts: Vec<Point> = (0..m).map(|i| p(1.0, 0.0).rotate(2.0 * PI * i as f64 / m as f64)).collect();
    pts.push(pts[0]);
    scene(1.5, Point::default(), vec![pts], "circle").expect("valid")
}

/// Named scene with its decomposition witness.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: String,
    pub scene: CompactScene,
    pub decomposition: Decomposition,
}

/// The twelve-scene class fixture suite.
pub fn class_suite() -> Vec<Fixture> {
    let mut out = Vec::new();
    let mut push = |name: &str, scene: CompactScene, d: Option<Decomposition>| {
        let decomposition = d.unwrap_or_else(|| Decomposition::per_polyline(&scene));
        out.push(Fixture { name: name.into(), scene, decomposition });
    };
    push(
        "segment",
        scene(1.0, Point::default(), vec![segment(Point::default(), 1.0, 0.0)], "segment").expect("valid"),
        None,
    );
    push("l-shape", l_shape(), Some(l_shape_arcs()));
    for deg in [90.0f64, 60.0, 30.0] {
        push(&format!("plus{deg}"), plus(deg.to_radians(), 1.0, 1.5), None);
    }
    for beta in [1.0, 4.0, 16.0, 64.0] {
        push(&format!("parabola{beta}"), tangent_parabola(beta), None);
    }
    for n in [4, 16] {
        push(&format!("pacman{n}"), pacman(n, 256), None);
    }
    push("circle", circle(256), None);
    out
}
