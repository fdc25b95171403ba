use super::curves::clip_chain;
use super::curves::Chain;
use super::decomposition::{piece_sing, push_unique, Decomposition};
use super::params::ClassParams;
use super::ClassError;
use crate::geomkit::{dist_point_segment, CompactScene, Point};

/// Constructive radius `r̄ / (4 (64 L²)^M0)` with `r̄` capped at `r/2` and
/// `L >= 1`.
pub fn lemma_sbar(rbar: f64, r: f64, l: f64, m0: u32) -> f64 {
    let rbar = rbar.min(r / 2.0);
    let l = l.max(1.0);
    rbar / (4.0 * (64.0 * l * l).powi(m0 as i32))
}

/// Finds `y ∈ B_{r̄/2}(x) ∩ K` maximizing the distance to the singular set of
/// the decomposition and returns it with the constructive radius `s̄`.
pub fn far_point_from_singular(
    scene: &CompactScene,
    decomposition: &Decomposition,
    x: Point,
    rbar: f64,
    params: &ClassParams,
) -> Result<(Point, f64), ClassError> {
    if !(rbar > 0.0) {
        return Err(ClassError::InvalidParams("rbar must be positive".into()));
    }
    let on_set = scene
        .crack_segments()
        .iter()
        .map(|&(a, b)| dist_point_segment(x, a, b))
        .chain(scene.isolated_points().iter().map(|p| p.dist(x)))
        .fold(f64::INFINITY, f64::min);
    if on_set > 1e-9 {
        return Err(ClassError::NotOnSet);
    }
    let sbar = lemma_sbar(rbar, params.r, params.l, params.m0);
    let mut sing = Vec::new();
    for piece in &decomposition.pieces {
        for q in piece_sing(scene, piece)? {
            push_unique(&mut sing, q);
        }
    }
    let dist_sing = |y: Point| sing.iter().fold(f64::INFINITY, |m, q: &Point| m.min(q.dist(y)));
    let rad = 0.5 * rbar * (1.0 - 1e-9);
    let step = rbar / 512.0;
    let mut best = (dist_sing(x), x);
    for poly in scene.cracks() {
        let chain = Chain::new(poly.clone(), false);
        for piece in clip_chain(&chain, x, rad) {
            let sub = Chain::new(piece.pts, false);
            for (_, y) in sub.samples(step) {
                let d = dist_sing(y);
                if d > best.0 {
                    best = (d, y);
                }
            }
        }
    }
    if best.0 < sbar {
        return Err(ClassError::SearchFailed { best: best.0, sbar });
    }
    Ok((best.1, sbar))
}

/// Packing bound on the number of FR pieces: each piece owns a disjoint disk
/// of radius `ω(s̄)/2` inside the ball of radius `R + 1`, with `s̄` taken at
/// `r̄ = r/2`.
pub fn component_bound(params: &ClassParams, big_r: f64) -> u64 {
    let sbar = lemma_sbar(params.r / 2.0, params.r, params.l, params.m0);
    let w = params.omega.eval(sbar);
    let v = ((big_r + 1.0) * (big_r + 1.0) / (0.25 * w * w)).ceil();
    if v.is_finite() && v < u64::MAX as f64 {
        v as u64
    } else {
        u64::MAX
    }
}
