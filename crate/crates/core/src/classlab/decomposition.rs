use super::ClassError;
use crate::geomkit::{is_closed, CompactScene, Point};
use serde::{Deserialize, Serialize};

/// Reference to a sub-polyline: vertices `start..=end` of crack `polyline`.
/// On a closed polyline `start > end` wraps through the closing vertex, and
/// `start == end` denotes the whole loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcRef {
    pub polyline: usize,
    pub start: usize,
    pub end: usize,
}

/// One FR piece: a union of MR arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrPiece {
    pub arcs: Vec<ArcRef>,
}

/// Decomposition witness: FR pieces made of MR arcs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Decomposition {
    pub pieces: Vec<FrPiece>,
}

/// A materialized arc.
#[derive(Debug, Clone, PartialEq)]
pub struct Arc {
    pub pts: Vec<Point>,
    pub closed: bool,
}

impl Decomposition {
    /// Every crack polyline as its own single-arc piece.
    pub fn per_polyline(scene: &CompactScene) -> Self {
        Decomposition {
            pieces: scene
                .cracks()
                .iter()
                .enumerate()
                .map(|(i, p)| FrPiece { arcs: vec![whole_arc(i, p)] })
                .collect(),
        }
    }

    /// All crack polylines as arcs of one piece.
    pub fn single_piece(scene: &CompactScene) -> Self {
        Decomposition {
            pieces: vec![FrPiece {
                arcs: scene.cracks().iter().enumerate().map(|(i, p)| whole_arc(i, p)).collect(),
            }],
        }
    }

    pub fn arc_count(&self) -> usize {
        self.pieces.iter().map(|p| p.arcs.len()).sum()
    }
}

fn whole_arc(i: usize, poly: &[Point]) -> ArcRef {
    if is_closed(poly) {
        ArcRef { polyline: i, start: 0, end: 0 }
    } else {
        ArcRef { polyline: i, start: 0, end: poly.len() - 1 }
    }
}

/// Resolves an arc reference against the scene.
pub fn arc_points(scene: &CompactScene, arc: &ArcRef) -> Result<Arc, ClassError> {
    let poly = scene.cracks().get(arc.polyline).ok_or_else(|| {
        ClassError::InvalidDecomposition(format!("polyline {} does not exist", arc.polyline))
    })?;
    let n = poly.len();
    if arc.start >= n || arc.end >= n {
        return Err(ClassError::InvalidDecomposition(format!(
            "arc {}..{} out of range for polyline {} with {} vertices",
            arc.start, arc.end, arc.polyline, n
        )));
    }
    if is_closed(poly) {
        let m = n - 1;
        let (s, e) = (arc.start % m, arc.end % m);
        if s == e {
            let mut pts: Vec<Point> = (0..=m).map(|k| poly[(s + k) % m]).collect();
            pts[m] = pts[0];
            return Ok(Arc { pts, closed: true });
        }
        let len = (e + m - s) % m;
        return Ok(Arc { pts: (0..=len).map(|k| poly[(s + k) % m]).collect(), closed: false });
    }
    if arc.start > arc.end {
        return Err(ClassError::InvalidDecomposition(format!(
            "arc start {} after end {} on open polyline {}",
            arc.start, arc.end, arc.polyline
        )));
    }
    Ok(Arc { pts: poly[arc.start..=arc.end].to_vec(), closed: false })
}

/// Boundary points of an arc: its endpoints if open, none for a closed loop.
pub fn compute_boundary_points(arc: &Arc) -> Vec<Point> {
    if arc.closed {
        return vec![];
    }
    match arc.pts.len() {
        0 => vec![],
        1 => vec![arc.pts[0]],
        n => vec![arc.pts[0], arc.pts[n - 1]],
    }
}

pub(crate) fn push_unique(set: &mut Vec<Point>, p: Point) {
    if !set.iter().any(|q| q.dist(p) <= 1e-9) {
        set.push(p);
    }
}

/// Singular set of a piece: union of the boundary points of its arcs.
pub fn piece_sing(scene: &CompactScene, piece: &FrPiece) -> Result<Vec<Point>, ClassError> {
    let mut out = Vec::new();
    for a in &piece.arcs {
        for p in compute_boundary_points(&arc_points(scene, a)?) {
            push_unique(&mut out, p);
        }
    }
    Ok(out)
}

/// Boundary of a piece as a hypersurface: points where the union of its arcs
/// ends (degree-one points of the union graph, plus isolated points).
pub fn piece_bdry(scene: &CompactScene, piece: &FrPiece) -> Result<Vec<Point>, ClassError> {
    let arcs = piece_arcs(scene, piece)?;
    let segs: Vec<(Point, Point)> = arcs.iter().flat_map(|a| a.pts.windows(2).map(|w| (w[0], w[1]))).collect();
    let union = super::curves::build_union(&segs);
    let mut out = union.ends.clone();
    for a in &arcs {
        if a.pts.len() == 1 {
            push_unique(&mut out, a.pts[0]);
        }
    }
    Ok(out)
}

pub fn piece_arcs(scene: &CompactScene, piece: &FrPiece) -> Result<Vec<Arc>, ClassError> {
    piece.arcs.iter().map(|a| arc_points(scene, a)).collect()
}

pub(crate) fn piece_segments(arcs: &[Arc]) -> Vec<(Point, Point)> {
    arcs.iter().flat_map(|a| a.pts.windows(2).map(|w| (w[0], w[1]))).collect()
}

/// Checks the structural invariants of a witness: arcs reference valid
/// sub-polylines, every crack segment is covered, and distinct pieces meet
/// only inside both singular sets.
pub fn validate_decomposition(scene: &CompactScene, d: &Decomposition) -> Result<(), ClassError> {
    let mut covered: Vec<Vec<bool>> =
        scene.cracks().iter().map(|p| vec![false; p.len().max(2) - 1]).collect();
    let mut point_covered: Vec<bool> = vec![false; scene.cracks().len()];
    for piece in &d.pieces {
        for a in &piece.arcs {
            arc_points(scene, a)?;
            let poly = &scene.cracks()[a.polyline];
            if poly.len() == 1 {
                point_covered[a.polyline] = true;
                continue;
            }
            let nseg = poly.len() - 1;
            if is_closed(poly) {
                let (s, e) = (a.start % nseg, a.end % nseg);
                let len = if s == e { nseg } else { (e + nseg - s) % nseg };
                for k in 0..len {
                    covered[a.polyline][(s + k) % nseg] = true;
                }
            } else {
                for k in a.start..a.end {
                    covered[a.polyline][k] = true;
                }
            }
        }
    }
    for (i, poly) in scene.cracks().iter().enumerate() {
        let ok = if poly.len() == 1 { point_covered[i] } else { covered[i].iter().all(|&c| c) };
        if !ok {
            return Err(ClassError::InvalidDecomposition(format!("crack {i} is not fully covered")));
        }
    }
    let sings: Vec<Vec<Point>> =
        d.pieces.iter().map(|p| piece_sing(scene, p)).collect::<Result<_, _>>()?;
    let segs: Vec<Vec<(Point, Point)>> = d
        .pieces
        .iter()
        .map(|p| piece_arcs(scene, p).map(|a| piece_segments(&a)))
        .collect::<Result<_, _>>()?;
    let near = |set: &[Point], p: Point| set.iter().any(|q| q.dist(p) <= 1e-9);
    for i in 0..d.pieces.len() {
        for j in i + 1..d.pieces.len() {
            for &(a, b) in &segs[i] {
                for &(c, e) in &segs[j] {
                    if let Some(p) = super::curves::segment_contact(a, b, c, e) {
                        if !(near(&sings[i], p) && near(&sings[j], p)) {
                            return Err(ClassError::InvalidDecomposition(format!(
                                "pieces {i} and {j} meet at ({}, {}) outside their singular sets",
                                p.x, p.y
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}
