use super::ExperimentError;
use crate::pdecore::fem::{rule_for_power, Geometry};
use crate::pdecore::{CoefficientField, FeField, Region, Sym2};
use crate::geomkit::Point;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Norms of the difference of two zero-extended fields on a common
/// background triangulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldDiff {
    /// `||a - b||_{L^p}`
    pub value: f64,
    /// `||S_a grad a - S_b grad b||_{L^p}` with `S = sqrt(sigma)` (identity
    /// when no coefficient is given).
    pub grad: f64,
    /// Area of background triangles cut by a crack of either mesh. Cracks
    /// run along mesh edges, so no triangle is cut.
    pub excluded_area: f64,
}

impl FieldDiff {
    /// `L^p` norm of the pair `(a - b, grad a - grad b)`.
    pub fn combined(&self, p: f64) -> f64 {
        (self.value.powf(p) + self.grad.powf(p)).powf(1.0 / p)
    }
}

struct Side<'a> {
    geo: Geometry,
    kept: Vec<Option<usize>>,
    re: Vec<f64>,
    im: Vec<f64>,
    coeff: Option<&'a CoefficientField>,
}

impl<'a> Side<'a> {
    fn new(f: &FeField, coeff: Option<&'a CoefficientField>) -> Self {
        let (re, im) = f.parts();
        Side { geo: Geometry::new(&f.mesh), kept: f.mesh.kept_index(), re, im, coeff }
    }

    fn value(&self, t: usize, b: &[f64; 3]) -> (f64, f64) {
        match self.kept[t] {
            Some(k) => (self.geo.value(k, &self.re, b), self.geo.value(k, &self.im, b)),
            None => (0.0, 0.0),
        }
    }

    fn grad(&self, t: usize, centroid: Point) -> (Point, Point) {
        match self.kept[t] {
            Some(k) => {
                let s = self.coeff.map_or(Sym2::IDENTITY, |c| c.eval(centroid).0.sqrt());
                (s.apply(self.geo.gradient(k, &self.re)), s.apply(self.geo.gradient(k, &self.im)))
            }
            None => (Point::default(), Point::default()),
        }
    }
}

/// Compares two fields living on meshes built over the same background
/// triangulation; each is extended by zero outside its own domain.
pub fn field_difference(
    a: &FeField,
    b: &FeField,
    p: f64,
    region: Region,
    coeff_a: Option<&CoefficientField>,
    coeff_b: Option<&CoefficientField>,
) -> Result<FieldDiff, ExperimentError> {
    if !Arc::ptr_eq(&a.mesh.tri, &b.mesh.tri) && a.mesh.tri.triangles != b.mesh.tri.triangles {
        return Err(ExperimentError::InvalidConfig("fields live on different background grids".into()));
    }
    let tri = &a.mesh.tri;
    let (sa, sb) = (Side::new(a, coeff_a), Side::new(b, coeff_b));
    let rule = rule_for_power(p);
    let (mut v, mut g) = (0.0, 0.0);
    for t in 0..tri.triangles.len() {
        let c = tri.centroid(t);
        if !region.contains(c) || (sa.kept[t].is_none() && sb.kept[t].is_none()) {
            continue;
        }
        let area = tri.area(t);
        // barycentric order follows the background corner order
        let mut vt = 0.0;
        for (bary, w) in rule.points.iter().zip(rule.weights) {
            let (ar, ai) = sa.value(t, bary);
            let (br, bi) = sb.value(t, bary);
            vt += w * (ar - br).hypot(ai - bi).powf(p);
        }
        v += area * vt;
        let ((gar, gai), (gbr, gbi)) = (sa.grad(t, c), sb.grad(t, c));
        let (dr, di) = (gar - gbr, gai - gbi);
        g += area * (dr.dot(dr) + di.dot(di)).powf(0.5 * p);
    }
    Ok(FieldDiff { value: v.powf(1.0 / p), grad: g.powf(1.0 / p), excluded_area: 0.0 })
}
