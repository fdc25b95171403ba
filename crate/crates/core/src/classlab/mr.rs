use super::curves::{build_union, chord_arc_violation, clip_chain, graph_test, Chain};
use super::decomposition::{
    compute_boundary_points, piece_arcs, piece_segments, piece_sing, push_unique, Arc, FrPiece,
};
use super::verdict::Verdict;
use super::ClassError;
use crate::geomkit::{CompactScene, Point};

/// Necessary-condition sampling step for arcs checked at radius `r`.
fn sample_step(r: f64, tol: f64) -> f64 {
    (r / 64.0).min(tol.max(1e-4))
}

/// Sufficient graph test on balls of radius `r + r/16` centred every `r/8`
/// of arclength (and at `extra` centres). Returns the worst ball if it fails.
fn graph_cover(chains: &[Chain], all: &[Chain], r: f64, lambda: f64, extra: &[Point]) -> Result<f64, (Point, f64)> {
    let rad = r + r / 16.0;
    let mut centres: Vec<Point> = chains.iter().flat_map(|c| c.samples(r / 8.0).into_iter().map(|s| s.1)).collect();
    centres.extend_from_slice(extra);
    let mut worst = 0.0f64;
    for x in centres {
        let pieces: Vec<Vec<Point>> =
            all.iter().flat_map(|c| clip_chain(c, x, rad)).map(|p| p.pts).collect();
        let fit = graph_test(&pieces, lambda);
        if !fit.ok {
            return Err((x, fit.slope));
        }
        worst = worst.max(fit.slope);
    }
    Ok(worst)
}

/// Checks membership of a single arc in MR(r, L).
///
/// Sufficient: inside every radius-r ball the arc is a rotated graph with
/// slope λ, `sqrt(1 + λ²) <= L`, and at each boundary point the part of the
/// arc inside `B_r(x)` is one sub-arc leaving the ball. Necessary: no chord
/// shorter than `arclength / L²` inside a ball, no other boundary point
/// inside the open ball around a boundary point, no isolated points.
pub fn check_mr(arc: &Arc, r: f64, l: f64) -> Verdict {
    check_mr_tol(arc, r, l, 1e-4)
}

pub(crate) fn check_mr_tol(arc: &Arc, r: f64, l: f64, tol: f64) -> Verdict {
    let bdry = compute_boundary_points(arc);
    if arc.pts.len() == 1 {
        return Verdict::fail(arc.pts[0], "mr.isolated_point", 0.0);
    }
    for (i, &x) in bdry.iter().enumerate() {
        for &y in &bdry[i + 1..] {
            if x.dist(y) < r {
                return Verdict::fail(x, "mr.boundary_separation", x.dist(y));
            }
        }
    }
    let chain = Chain::new(arc.pts.clone(), arc.closed);
    if let Some((p, ratio)) = chord_arc_violation(&chain, r, l * l, sample_step(r, tol)) {
        return Verdict::fail(p, "mr.chord_arc", ratio);
    }
    let lambda = (l * l - 1.0).max(0.0).sqrt();
    let chains = [chain];
    let slope = match graph_cover(&chains, &chains, r, lambda, &bdry) {
        Ok(s) => s,
        Err((x, s)) => return Verdict::unknown(x, "mr.graph", s),
    };
    for &x in &bdry {
        let pieces = clip_chain(&chains[0], x, r);
        let exits = pieces.len() == 1 && {
            let (p0, p1) = (pieces[0].pts[0], *pieces[0].pts.last().unwrap());
            let on_sphere = |q: Point| (q.dist(x) - r).abs() <= 1e-9 * r.max(1.0);
            (p0.dist(x) <= 1e-12 && on_sphere(p1)) || (p1.dist(x) <= 1e-12 && on_sphere(p0))
        };
        if !exits {
            return Verdict::unknown(x, "mr.half_graph", pieces.len() as f64);
        }
    }
    Verdict::pass(arc.pts[0], "mr.graph", (1.0 + slope * slope).sqrt())
}

/// Result of an FR check: the verdict and the singular set of the piece.
#[derive(Debug, Clone, PartialEq)]
pub struct FrCheck {
    pub verdict: Verdict,
    pub sing: Vec<Point>,
}

/// Checks membership of a piece in FR(r, L, M0): every arc in MR(r, L) and the
/// union a Lipschitz hypersurface.
pub fn check_fr(scene: &CompactScene, piece: &FrPiece, r: f64, l: f64, m0: u32) -> Result<FrCheck, ClassError> {
    check_fr_tol(scene, piece, r, l, m0, 1e-4)
}

pub(crate) fn check_fr_tol(
    scene: &CompactScene,
    piece: &FrPiece,
    r: f64,
    l: f64,
    m0: u32,
    tol: f64,
) -> Result<FrCheck, ClassError> {
    if piece.arcs.len() > m0 as usize {
        return Err(ClassError::TooManyArcs { arcs: piece.arcs.len(), m0 });
    }
    if piece.arcs.is_empty() {
        return Err(ClassError::InvalidDecomposition("piece without arcs".into()));
    }
    let arcs = piece_arcs(scene, piece)?;
    let sing = piece_sing(scene, piece)?;
    let mut verdicts: Vec<Verdict> = arcs.iter().map(|a| check_mr_tol(a, r, l, tol)).collect();
    verdicts.push(check_hypersurface(&arcs, r, l, tol));
    Ok(FrCheck { verdict: Verdict::all(verdicts), sing })
}

/// Conditions (a), (b) of a Lipschitz hypersurface for a union of arcs.
pub(crate) fn check_hypersurface(arcs: &[Arc], r: f64, l: f64, tol: f64) -> Verdict {
    let union = build_union(&piece_segments(arcs));
    if let Some(p) = union.branch {
        return Verdict::fail(p, "fr.branch", 3.0);
    }
    let mut isolated = Vec::new();
    for a in arcs {
        if a.pts.len() == 1 {
            push_unique(&mut isolated, a.pts[0]);
        }
    }
    if let Some(&p) = isolated.first() {
        return Verdict::fail(p, "fr.isolated_point", 0.0);
    }
    for c in &union.chains {
        if let Some((p, ratio)) = chord_arc_violation(c, r, l * l, sample_step(r, tol)) {
            return Verdict::fail(p, "fr.chord_arc", ratio);
        }
    }
    let lambda = (l * l - 1.0).max(0.0).sqrt();
    match graph_cover(&union.chains, &union.chains, r, lambda, &[]) {
        Ok(s) => Verdict::pass(
            union.chains.first().map_or(Point::default(), |c| c.pts[0]),
            "fr.graph",
            (1.0 + s * s).sqrt(),
        ),
        Err((x, s)) => Verdict::unknown(x, "fr.graph", s),
    }
}
