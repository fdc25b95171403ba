use super::decomposition::{validate_decomposition, Decomposition};
use super::exterior::check_exterior_connectedness;
use super::gagliardo::check_g_class;
use super::gluing::{check_gluing, Anchor};
use super::lemmas::component_bound;
use super::mr::{check_fr_tol, check_mr_tol};
use super::params::ClassParams;
use super::verdict::Verdict;
use super::ClassError;
use crate::geomkit::{CompactScene, Point};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Inputs shared by all class checks.
#[derive(Debug, Clone)]
pub struct CheckInput<'a> {
    pub scene: &'a CompactScene,
    /// Witness; defaults to one piece per crack polyline.
    pub decomposition: Option<&'a Decomposition>,
    pub params: &'a ClassParams,
}

impl CheckInput<'_> {
    fn witness(&self) -> Decomposition {
        self.decomposition.cloned().unwrap_or_else(|| Decomposition::per_polyline(self.scene))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub check: String,
    pub verdict: Verdict,
    pub pieces: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub component_bound: Option<u64>,
}

pub trait ClassCheck: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError>;
}

fn report(check: &str, verdict: Verdict, pieces: usize) -> ClassReport {
    ClassReport { check: check.into(), verdict, pieces, min_ratio: None, component_bound: None }
}

struct Mr;

impl ClassCheck for Mr {
    fn name(&self) -> &'static str {
        "mr"
    }
    fn describe(&self) -> &'static str {
        "every arc of the witness in MR(r, L)"
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        input.params.validate()?;
        let d = input.witness();
        let mut vs = Vec::new();
        for piece in &d.pieces {
            for a in &piece.arcs {
                let arc = super::decomposition::arc_points(input.scene, a)?;
                vs.push(check_mr_tol(&arc, input.params.r, input.params.l, input.params.tol));
            }
        }
        Ok(report(self.name(), Verdict::all(vs), d.pieces.len()))
    }
}

/// Every piece in FR(r, L, M0); too many arcs in a piece is a FAIL.
fn fr_pieces(input: &CheckInput, d: &Decomposition) -> Result<Verdict, ClassError> {
    let p = input.params;
    validate_decomposition(input.scene, d)?;
    let mut vs = Vec::new();
    for (i, piece) in d.pieces.iter().enumerate() {
        match check_fr_tol(input.scene, piece, p.r, p.l, p.m0, p.tol) {
            Ok(fr) => vs.push(fr.verdict),
            Err(ClassError::TooManyArcs { arcs, .. }) => {
                let at = super::decomposition::arc_points(input.scene, &piece.arcs[0])?.pts[0];
                vs.push(Verdict::fail(at, &format!("fr.too_many_arcs.piece{i}"), arcs as f64));
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Verdict::all(vs))
}

struct Fr;

impl ClassCheck for Fr {
    fn name(&self) -> &'static str {
        "fr"
    }
    fn describe(&self) -> &'static str {
        "every piece of the witness in FR(r, L, M0)"
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        input.params.validate()?;
        let d = input.witness();
        Ok(report(self.name(), fr_pieces(input, &d)?, d.pieces.len()))
    }
}

/// FR pieces glued by a modulus measured from `anchor`, with the piece count
/// bounded by the packing bound.
struct Glued {
    name: &'static str,
    anchor: Anchor,
    linear_only: bool,
}

impl ClassCheck for Glued {
    fn name(&self) -> &'static str {
        self.name
    }
    fn describe(&self) -> &'static str {
        if self.anchor == Anchor::Sing {
            "FR(r, L, M0, ω): FR pieces glued along their singular sets"
        } else {
            "linear hat class: FR pieces glued from their boundaries with ω(δ) = a·min(δ, δ0)"
        }
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        let p = input.params;
        p.validate()?;
        if self.linear_only && p.omega.linear_params().is_none() {
            return Err(ClassError::InvalidParams("this check needs a linear omega".into()));
        }
        let d = input.witness();
        let bound = component_bound(p, p.big_r);
        let mut vs = vec![fr_pieces(input, &d)?];
        if d.pieces.len() as u64 > bound {
            vs.push(Verdict::fail(Point::default(), "fr.component_bound", d.pieces.len() as f64));
        }
        let g = check_gluing(input.scene, &d, self.anchor, &p.omega, p.tol)?;
        vs.push(g.verdict);
        Ok(ClassReport {
            check: self.name.into(),
            verdict: Verdict::all(vs),
            pieces: d.pieces.len(),
            min_ratio: g.min_ratio,
            component_bound: Some(bound),
        })
    }
}

struct GClass;

impl ClassCheck for GClass {
    fn name(&self) -> &'static str {
        "g-class"
    }
    fn describe(&self) -> &'static str {
        "cone condition in graph charts of radius r"
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        let p = input.params;
        p.validate()?;
        let cone = p.cone.as_ref().ok_or_else(|| ClassError::InvalidParams("missing cone".into()))?;
        Ok(report(self.name(), check_g_class(input.scene, p.r, p.l, cone), 1))
    }
}

struct Exterior;

impl ClassCheck for Exterior {
    fn name(&self) -> &'static str {
        "exterior"
    }
    fn describe(&self) -> &'static str {
        "uniform exterior connectedness with modulus gamma"
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        let p = input.params;
        p.validate()?;
        let v = check_exterior_connectedness(input.scene, &p.gamma, &p.t_samples, p.tol)?;
        Ok(report(self.name(), v, 0))
    }
}

/// Scatterer class: linear hat class plus exterior connectedness.
struct Scatterer;

impl ClassCheck for Scatterer {
    fn name(&self) -> &'static str {
        "sc"
    }
    fn describe(&self) -> &'static str {
        "scatterer class: linear hat class and exterior connectedness"
    }
    fn run(&self, input: &CheckInput) -> Result<ClassReport, ClassError> {
        let mut rep = Glued { name: "sc", anchor: Anchor::Bdry, linear_only: true }.run(input)?;
        let ext = Exterior.run(input)?;
        rep.verdict = Verdict::all([rep.verdict, ext.verdict]);
        Ok(rep)
    }
}

/// Named class checks selectable at run time.
pub struct CheckRegistry {
    checks: BTreeMap<&'static str, Box<dyn ClassCheck>>,
}

impl Default for CheckRegistry {
    fn default() -> Self {
        let mut r = CheckRegistry { checks: BTreeMap::new() };
        r.register(Box::new(Mr));
        r.register(Box::new(Fr));
        r.register(Box::new(Glued { name: "fr-omega", anchor: Anchor::Sing, linear_only: false }));
        r.register(Box::new(Glued { name: "fr-hat", anchor: Anchor::Bdry, linear_only: true }));
        r.register(Box::new(GClass));
        r.register(Box::new(Exterior));
        r.register(Box::new(Scatterer));
        r
    }
}

impl CheckRegistry {
    pub fn register(&mut self, check: Box<dyn ClassCheck>) {
        self.checks.insert(check.name(), check);
    }

    pub fn get(&self, name: &str) -> Option<&dyn ClassCheck> {
        self.checks.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.checks.keys().copied().collect()
    }

    pub fn run(&self, name: &str, input: &CheckInput) -> Result<ClassReport, ClassError> {
        self.get(name).ok_or_else(|| ClassError::InvalidParams(format!("unknown check '{name}'")))?.run(input)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_lists_and_runs() {
        let reg = CheckRegistry::default();
        assert_eq!(reg.names(), vec!["exterior", "fr", "fr-hat", "fr-omega", "g-class", "mr", "sc"]);
        let s = CompactScene::from_cracks(2.0, vec![vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)]]).unwrap();
        let params = ClassParams::new(0.25, 2.0, 1);
        let input = CheckInput { scene: &s, decomposition: None, params: &params };
        assert!(reg.run("fr", &input).unwrap().verdict.is_pass());
        assert!(reg.run("nope", &input).is_err());
    }
}
