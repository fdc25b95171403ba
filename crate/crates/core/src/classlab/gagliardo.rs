use super::curves::{build_union, chord_arc_violation, clip_chain, graph_test, Chain, ClipPiece};
use super::decomposition::{ArcRef, Decomposition, FrPiece};
use super::params::ConeSpec;
use super::verdict::{Status, Verdict};
use super::ClassError;
use crate::geomkit::{CompactScene, GeomError, Point, SceneSpec};
use serde::{Deserialize, Serialize};

/// Covers a finite union of closed intervals by closed subintervals of
/// diameter at most `rho`, after checking that every point lies in a
/// subinterval of length `cone.length`.
///
/// A maximal interval of length `len > rho` is split into `⌈len/rho⌉`
/// overlapping pieces of length `rho` with evenly spaced starts.
pub fn gagliardo_decompose(set: &[(f64, f64)], cone: &ConeSpec) -> Result<Vec<(f64, f64)>, ClassError> {
    cone.validate()?;
    let mut iv: Vec<(f64, f64)> = set.to_vec();
    if iv.iter().any(|&(a, b)| !(a.is_finite() && b.is_finite() && a <= b)) {
        return Err(ClassError::InvalidParams("intervals must be finite with a <= b".into()));
    }
    iv.sort_by(|x, y| x.0.total_cmp(&y.0));
    if iv.windows(2).any(|w| w[1].0 <= w[0].1) {
        return Err(ClassError::InvalidParams("intervals must be disjoint".into()));
    }
    let (ell, rho) = (cone.length, cone.rho);
    let slack = 1e-12 * (1.0 + ell);
    let mut out = Vec::new();
    for (a, b) in iv {
        let len = b - a;
        if len < ell - slack {
            return Err(ClassError::ConeConditionFails { witness: Point::new(0.5 * (a + b), 0.0) });
        }
        if len <= rho * (1.0 + 1e-12) {
            out.push((a, b));
            continue;
        }
        let m = (len / rho).ceil() as usize;
        let stride = (len - rho) / (m - 1) as f64;
        for k in 0..m {
            let s = if k + 1 == m { b - rho } else { a + k as f64 * stride };
            out.push((s, if k + 1 == m { b } else { s + rho }));
        }
    }
    Ok(out)
}

/// Graph chart of one ball: pieces of `K ∩ B̄_r(x)` projected on the graph
/// direction.
struct BallChart {
    dir: Point,
    ok: bool,
    slope: f64,
    pieces: Vec<(usize, ClipPiece)>,
}

fn ball_chart(chains: &[Chain], x: Point, r: f64, lambda: f64) -> BallChart {
    let pieces: Vec<(usize, ClipPiece)> =
        chains.iter().enumerate().flat_map(|(i, c)| clip_chain(c, x, r).into_iter().map(move |p| (i, p))).collect();
    let pts: Vec<Vec<Point>> = pieces.iter().map(|(_, p)| p.pts.clone()).collect();
    let fit = graph_test(&pts, lambda);
    BallChart { dir: Point::new(fit.theta.cos(), fit.theta.sin()), ok: fit.ok, slope: fit.slope, pieces }
}

fn projection(piece: &ClipPiece, dir: Point) -> (f64, f64) {
    piece.pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        let t = p.dot(dir);
        (lo.min(t), hi.max(t))
    })
}

fn arclength_of(piece: &ClipPiece) -> f64 {
    piece.pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

fn near(piece: &ClipPiece, x: Point, rad: f64) -> bool {
    piece.pts.windows(2).any(|w| crate::geomkit::dist_point_segment(x, w[0], w[1]) < rad)
        || (piece.pts.len() == 1 && piece.pts[0].dist(x) < rad)
}

/// Checks the cone condition in charts: around every sampled centre `x`, each
/// point `y ∈ B_{r/2}(x) ∩ K` must have its chart image inside an interval of
/// length `ℓ` contained in the image of `B̄_r(x) ∩ K`.
///
/// FAIL: isolated points, branch points, chord-arc violations, or a component
/// of `B̄_r(x) ∩ K` meeting `B_{r/2}(x)` with arclength below `ℓ/L`.
/// PASS: every ball is a rotated graph with slope `sqrt(L² - 1)` and every such
/// component projects onto an interval of length at least `ℓ`.
pub fn check_g_class(scene: &CompactScene, r: f64, l: f64, cone: &ConeSpec) -> Verdict {
    if let Some(&p) = scene.isolated_points().first() {
        return Verdict::fail(p, "g.isolated_point", 0.0);
    }
    let union = build_union(&scene.crack_segments());
    if let Some(p) = union.branch {
        return Verdict::fail(p, "g.branch", 3.0);
    }
    let ell = cone.length;
    for c in &union.chains {
        if let Some((p, ratio)) = chord_arc_violation(c, r, l * l, (r / 64.0).min(1e-3)) {
            return Verdict::fail(p, "g.chord_arc", ratio);
        }
    }
    let lambda = (l * l - 1.0).max(0.0).sqrt();
    let centres: Vec<Point> =
        union.chains.iter().flat_map(|c| c.samples(r / 8.0).into_iter().map(|s| s.1)).collect();
    let mut unknown: Option<Verdict> = None;
    let mut worst = f64::INFINITY;
    for &x in &centres {
        let chart = ball_chart(&union.chains, x, r, lambda);
        for (_, piece) in chart.pieces.iter().filter(|(_, p)| near(p, x, 0.5 * r)) {
            let arc = arclength_of(piece);
            if arc < ell / l {
                return Verdict::fail(x, "g.cone_length", arc);
            }
            if unknown.is_none() {
                if !chart.ok {
                    unknown = Some(Verdict::unknown(x, "g.graph", chart.slope));
                    continue;
                }
                let (lo, hi) = projection(piece, chart.dir);
                worst = worst.min(hi - lo);
                if hi - lo < ell * (1.0 - 1e-12) {
                    unknown = Some(Verdict::unknown(x, "g.cone_projection", hi - lo));
                }
            }
        }
    }
    if let Some(v) = unknown {
        return v;
    }
    Verdict::pass(centres.first().copied().unwrap_or_default(), "g.cone_projection", worst)
}

/// Output of the g-class to FR construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GToFr {
    /// Input scene with the arc endpoints inserted as vertices.
    pub scene: CompactScene,
    pub decomposition: Decomposition,
    pub r_prime: f64,
    pub l_prime: f64,
    pub m0: u64,
}

/// Builds an FR witness for a scene passing [`check_g_class`].
///
/// Centres are chosen greedily so that every point of `K` is within `r/3` of
/// one. In each ball the pieces meeting `B̄_{r/3}` are projected onto the graph
/// direction, decomposed by [`gagliardo_decompose`] with `ρ = clamp(cone.rho,
/// ℓ, r/4)` and pulled back along the piece. All arcs form one piece.
pub fn g_to_fr_decompose(scene: &CompactScene, r: f64, l: f64, cone: &ConeSpec) -> Result<GToFr, ClassError> {
    let check = check_g_class(scene, r, l, cone);
    if check.status != Status::Pass {
        return Err(ClassError::PreconditionNotMet(format!(
            "g-class check returned {:?}",
            check.status
        )));
    }
    let ell = cone.length;
    let rho = cone.rho.min(r / 4.0).max(ell);
    let lambda = (l * l - 1.0).max(0.0).sqrt();
    let union = build_union(&scene.crack_segments());
    let chains = &union.chains;

    let mut centres: Vec<Point> = Vec::new();
    for c in chains {
        for (_, p) in c.samples(r / 48.0) {
            if !centres.iter().any(|q| q.dist(p) <= r / 3.0) {
                centres.push(p);
            }
        }
    }
    // Arcs as (chain, s0, s1) in arclength; s1 may exceed the length on loops.
    let mut arcs: Vec<(usize, f64, f64)> = Vec::new();
    for &x in &centres {
        let chart = ball_chart(chains, x, r, lambda);
        for (ci, piece) in chart.pieces.iter().filter(|(_, p)| near(p, x, r / 3.0 + 1e-12)) {
            let proj: Vec<f64> = piece.pts.iter().map(|p| p.dot(chart.dir)).collect();
            let increasing = proj.last().unwrap() >= proj.first().unwrap();
            let (lo, hi) = projection(piece, chart.dir);
            let cover = gagliardo_decompose(&[(lo, hi)], &ConeSpec { length: ell.min(hi - lo), rho })?;
            let mut cum = vec![piece.s0];
            for w in piece.pts.windows(2) {
                cum.push(cum.last().unwrap() + w[0].dist(w[1]));
            }
            let at = |t: f64| -> f64 {
                let t = if increasing { t } else { lo + hi - t };
                let key: Vec<f64> = if increasing { proj.clone() } else { proj.iter().map(|v| lo + hi - v).collect() };
                let k = key.partition_point(|&v| v < t).clamp(1, key.len() - 1);
                let (v0, v1) = (key[k - 1], key[k]);
                let f = if v1 > v0 { ((t - v0) / (v1 - v0)).clamp(0.0, 1.0) } else { 0.0 };
                cum[k - 1] + f * (cum[k] - cum[k - 1])
            };
            for (a, b) in cover {
                let (sa, sb) = (at(a), at(b));
                arcs.push((*ci, sa.min(sb), sa.max(sb)));
            }
        }
    }
    let r_prime = ell.min(rho) / (2.0 * l);
    let m0_centres = ((2.0 * scene.box_radius() + r / 3.0).powi(2) / (std::f64::consts::PI * (r / 6.0).powi(2))).floor();
    let per_ball = ((2.0 * r / ell).floor() + 1.0) * ((2.0 * r / rho).ceil() + 1.0);
    let m0 = (m0_centres * per_ball) as u64;

    let (refined, refs) = refine(scene, chains, &arcs)?;
    if refs.len() as u64 > m0 {
        return Err(ClassError::PreconditionNotMet(format!("{} arcs exceed the bound {m0}", refs.len())));
    }
    Ok(GToFr {
        scene: refined,
        decomposition: Decomposition { pieces: vec![FrPiece { arcs: refs }] },
        r_prime,
        l_prime: l,
        m0,
    })
}

/// Rebuilds the scene from the union chains with the arc endpoints inserted as
/// vertices and resolves every arc into vertex indices.
fn refine(
    scene: &CompactScene,
    chains: &[Chain],
    arcs: &[(usize, f64, f64)],
) -> Result<(CompactScene, Vec<ArcRef>), ClassError> {
    let mut polys = Vec::new();
    let mut cuts_per_chain = Vec::new();
    for (ci, c) in chains.iter().enumerate() {
        let total = c.length();
        let wrap = |s: f64| if c.closed { s.rem_euclid(total) } else { s.clamp(0.0, total) };
        let mut cuts: Vec<f64> = c.cum.clone();
        if c.closed {
            cuts.pop();
        }
        for &(_, s0, s1) in arcs.iter().filter(|a| a.0 == ci) {
            cuts.push(wrap(s0));
            cuts.push(wrap(s1));
        }
        cuts.sort_by(|a, b| a.total_cmp(b));
        let eps = 1e-10 * (1.0 + total);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);
        if c.closed && cuts.len() > 1 && (total - cuts[cuts.len() - 1]) <= eps {
            cuts.pop();
        }
        let mut pts: Vec<Point> = cuts.iter().map(|&s| c.point_at(s)).collect();
        if c.closed {
            pts.push(pts[0]);
        }
        polys.push(pts);
        cuts_per_chain.push((cuts, eps, total));
    }
    let refined = crate::geomkit::build_compact_set(SceneSpec {
        box_radius: scene.box_radius(),
        box_center: scene.box_center(),
        cracks: polys,
        solids: scene.solids().to_vec(),
        label: scene.label().to_string(),
    })
    .map_err(|e: GeomError| ClassError::Geom(e))?;
    let mut refs = Vec::new();
    for &(ci, s0, s1) in arcs {
        let (cuts, eps, total) = &cuts_per_chain[ci];
        let closed = chains[ci].closed;
        let find = |s: f64| {
            let s = if closed { s.rem_euclid(*total) } else { s };
            let k = cuts.partition_point(|&v| v < s - eps);
            if closed && k == cuts.len() {
                0
            } else {
                k.min(cuts.len() - 1)
            }
        };
        let r = ArcRef { polyline: ci, start: find(s0), end: find(s1) };
        if r.start == r.end && !(closed && s1 - s0 >= total - eps) {
            continue;
        }
        if !refs.contains(&r) {
            refs.push(r);
        }
    }
    Ok((refined, refs))
}

#[cfg(test)]
mod tests {
    use super::super::decomposition::arc_points;
    use super::super::mr::check_mr;
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn interval_cover_examples() {
        let cone = ConeSpec { length: 0.4, rho: 0.6 };
        let out = gagliardo_decompose(&[(0.0, 1.0), (2.0, 2.5)], &cone).unwrap();
        assert_eq!(out.len(), 3);
        for (got, want) in out.iter().zip([(0.0, 0.6), (0.4, 1.0), (2.0, 2.5)]) {
            assert!((got.0 - want.0).abs() < 1e-12 && (got.1 - want.1).abs() < 1e-12, "{got:?}");
        }
        assert!(matches!(
            gagliardo_decompose(&[(0.0, 0.2)], &cone),
            Err(ClassError::ConeConditionFails { .. })
        ));
        let out = gagliardo_decompose(&[(0.0, 0.4)], &ConeSpec { length: 0.4, rho: 0.4 }).unwrap();
        assert_eq!(out, vec![(0.0, 0.4)]);
    }

    fn arc_scene(theta0: f64) -> CompactScene {
        let n = 200;
        let pts: Vec<Point> = (0..=n)
            .map(|i| {
                let t = theta0 + (2.0 * std::f64::consts::PI - theta0) * i as f64 / n as f64;
                p(t.cos(), t.sin())
            })
            .collect();
        CompactScene::from_cracks(2.0, vec![pts]).unwrap()
    }

    #[test]
    fn g_class_examples() {
        let cone = ConeSpec { length: 0.05, rho: 0.05 };
        let seg = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0), p(1.0, 0.0)]]).unwrap();
        assert_eq!(check_g_class(&seg, 0.2, 2.0, &cone).status, Status::Pass);
        assert_eq!(check_g_class(&arc_scene(0.25), 0.1, 2.0, &cone).status, Status::Pass);
        let pts = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0)], vec![p(1.0, 0.0)]]).unwrap();
        assert_eq!(check_g_class(&pts, 0.2, 2.0, &cone).status, Status::Fail);
    }

    fn assert_mr_arcs(g: &GToFr) {
        let piece = &g.decomposition.pieces[0];
        assert!(piece.arcs.len() as u64 <= g.m0);
        for a in &piece.arcs {
            let arc = arc_points(&g.scene, a).unwrap();
            let v = check_mr(&arc, g.r_prime, g.l_prime);
            assert_eq!(v.status, Status::Pass, "{a:?} {v:?}");
        }
        super::super::decomposition::validate_decomposition(&g.scene, &g.decomposition).unwrap();
    }

    #[test]
    fn segment_and_circle_decompose() {
        let cone = ConeSpec { length: 0.05, rho: 0.1 };
        let seg = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0), p(1.0, 0.0)]]).unwrap();
        let g = g_to_fr_decompose(&seg, 0.2, 2.0, &cone).unwrap();
        assert!(g.decomposition.pieces[0].arcs.len() > 1);
        assert_mr_arcs(&g);

        let n = 120;
        let mut ring: Vec<Point> =
            (0..n).map(|i| p(1.0, 0.0).rotate(2.0 * std::f64::consts::PI * i as f64 / n as f64)).collect();
        ring.push(ring[0]);
        let circle = CompactScene::from_cracks(2.0, vec![ring]).unwrap();
        let g = g_to_fr_decompose(&circle, 0.2, 2.0, &cone).unwrap();
        assert_mr_arcs(&g);

        let pac = arc_scene(0.25);
        let g = g_to_fr_decompose(&pac, 0.1, 2.0, &ConeSpec { length: 0.05, rho: 0.05 }).unwrap();
        assert_mr_arcs(&g);
        let tip = p(0.25f64.cos(), 0.25f64.sin());
        let sing = super::super::decomposition::piece_sing(&g.scene, &g.decomposition.pieces[0]).unwrap();
        assert!(sing.iter().any(|q| q.dist(tip) < 1e-9));
    }

    #[test]
    fn precondition_is_enforced() {
        let pts = CompactScene::from_cracks(2.0, vec![vec![p(0.0, 0.0)]]).unwrap();
        assert!(matches!(
            g_to_fr_decompose(&pts, 0.2, 2.0, &ConeSpec { length: 0.05, rho: 0.1 }),
            Err(ClassError::PreconditionNotMet(_))
        ));
    }
}
