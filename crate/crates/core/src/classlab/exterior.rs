use super::params::Modulus;
use super::verdict::{Verdict, Witness};
use super::ClassError;
use crate::geomkit::{dist_raw, CompactScene, Point};
use rayon::prelude::*;

/// Uniform exterior connectedness on a grid.
///
/// For each `t`, ball centres are taken on a lattice of spacing `t` around the
/// scene, keeping those with `B_t(x) ∩ K = ∅`. Paths are searched on a grid of
/// spacing `s/4`, `s = γ(t)(1 - tol)`, whose open nodes are farther than
/// `s + spacing/2` from `K`; adjacent open nodes are joined by segments that
/// keep distance `> s`. All centres must land in one grid component.
pub fn check_exterior_connectedness(
    scene: &CompactScene,
    gamma: &Modulus,
    t_samples: &[f64],
    tol: f64,
) -> Result<Verdict, ClassError> {
    if scene.is_empty() {
        return Err(ClassError::Geom(crate::geomkit::GeomError::EmptyScene));
    }
    if t_samples.is_empty() || t_samples.iter().any(|t| !(*t > 0.0)) {
        return Err(ClassError::InvalidParams("t_samples must be positive".into()));
    }
    gamma.validate()?;
    let mut worst = f64::INFINITY;
    for &t in t_samples {
        let s = gamma.eval(t) * (1.0 - tol);
        if !(s > 0.0) {
            return Err(ClassError::InvalidParams(format!("gamma({t}) must be positive")));
        }
        match connect_at(scene, t, s)? {
            Ok(()) => worst = worst.min(s),
            Err(v) => return Ok(v),
        }
    }
    Ok(Verdict::pass(scene.box_center(), "exterior.connected", worst))
}

fn connect_at(scene: &CompactScene, t: f64, s: f64) -> Result<Result<(), Verdict>, ClassError> {
    let c = scene.box_center();
    let big = scene.box_radius();
    let spacing = s / 4.0;
    let margin = 2.0 * t + s + 2.0 * spacing;
    let lo = Point::new(c.x - big - margin, c.y - big - margin);
    let n = ((2.0 * (big + margin)) / spacing).ceil() as usize + 1;
    let node = |i: usize, j: usize| Point::new(lo.x + i as f64 * spacing, lo.y + j as f64 * spacing);
    let need = s + 0.5 * spacing;
    let open: Vec<bool> = (0..n * n)
        .into_par_iter()
        .map(|k| dist_raw(scene, node(k % n, k / n)) > need)
        .collect();
    let mut label = vec![usize::MAX; n * n];
    let mut comp = 0;
    let mut stack = Vec::new();
    for start in 0..n * n {
        if !open[start] || label[start] != usize::MAX {
            continue;
        }
        label[start] = comp;
        stack.push(start);
        while let Some(k) = stack.pop() {
            let (i, j) = (k % n, k / n);
            let mut visit = |ii: usize, jj: usize| {
                let q = jj * n + ii;
                if open[q] && label[q] == usize::MAX {
                    label[q] = comp;
                    stack.push(q);
                }
            };
            if i > 0 {
                visit(i - 1, j);
            }
            if i + 1 < n {
                visit(i + 1, j);
            }
            if j > 0 {
                visit(i, j - 1);
            }
            if j + 1 < n {
                visit(i, j + 1);
            }
        }
        comp += 1;
    }
    let m = ((2.0 * (big + t)) / t).floor() as usize + 1;
    let mut first: Option<(Point, usize)> = None;
    let mut any = false;
    for a in 0..m {
        for b in 0..m {
            let x = Point::new(c.x - big - t + a as f64 * t, c.y - big - t + b as f64 * t);
            if dist_raw(scene, x) < t {
                continue;
            }
            any = true;
            let i = (((x.x - lo.x) / spacing).round() as usize).min(n - 1);
            let j = (((x.y - lo.y) / spacing).round() as usize).min(n - 1);
            let l = label[j * n + i];
            match first {
                None => first = Some((x, l)),
                Some((x0, l0)) => {
                    if l != l0 || l == usize::MAX {
                        return Ok(Err(Verdict {
                            status: super::verdict::Status::Fail,
                            witnesses: vec![
                                Witness { point: x0, condition: "exterior.disconnected".into(), value: t },
                                Witness { point: x, condition: "exterior.disconnected".into(), value: s },
                            ],
                        }));
                    }
                }
            }
        }
    }
    if !any {
        return Err(ClassError::NoExteriorBalls { t });
    }
    Ok(Ok(()))
}

#[cfg(test)]
mod tests {
    use super::super::verdict::Status;
    use super::*;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    #[test]
    fn segment_is_connected() {
        let s = CompactScene::from_cracks(1.0, vec![vec![p(-0.5, 0.0), p(0.5, 0.0)]]).unwrap();
        let v = check_exterior_connectedness(&s, &Modulus::linear(0.25, f64::MAX), &[0.1, 0.3], 1e-6).unwrap();
        assert_eq!(v.status, Status::Pass);
    }

    #[test]
    fn circle_separates() {
        let n = 90;
        let mut ring: Vec<Point> =
            (0..n).map(|i| p(0.5, 0.0).rotate(2.0 * std::f64::consts::PI * i as f64 / n as f64)).collect();
        ring.push(ring[0]);
        let s = CompactScene::from_cracks(1.0, vec![ring]).unwrap();
        let v = check_exterior_connectedness(&s, &Modulus::linear(0.25, f64::MAX), &[0.1], 1e-6).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.witnesses.len(), 2);
    }

    #[test]
    fn parallel_segments_and_huge_t() {
        let g = 0.2;
        let s = CompactScene::from_cracks(
            1.0,
            vec![vec![p(-0.5, 0.0), p(0.5, 0.0)], vec![p(-0.5, g), p(0.5, g)]],
        )
        .unwrap();
        let gamma = Modulus::Tabulated { knots: vec![(g / 4.0, g / 16.0)] };
        let v = check_exterior_connectedness(&s, &gamma, &[0.05, 0.2], 1e-6).unwrap();
        assert_eq!(v.status, Status::Pass);
        let err = check_exterior_connectedness(&s, &gamma, &[-1.0], 1e-6);
        assert!(err.is_err());
    }
}
