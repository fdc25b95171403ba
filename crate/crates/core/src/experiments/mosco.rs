use super::compare::field_difference;
use super::fixtures;
use super::rate::RateFit;
use super::report::{config_hash, rate_on_common_h, strictly_decreasing, ExperimentReport, NamedVerdict, Step};
use super::ExperimentError;
use crate::classlab::{CheckInput, CheckRegistry, ClassParams, Decomposition, Status};
use crate::crackmesh::{build_triangulation, mesh_on, MeshOptions, Triangulation};
use crate::geomkit::{hausdorff_complementary_distance, symmetric_difference_area, CompactScene};
use crate::pdecore::{norm, solve_neumann, FeField, NeumannOptions, NormKind, Region, ScalarSource, SourceData};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Class check every scene of an experiment must PASS.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassGate {
    pub check: String,
    pub params: ClassParams,
    /// One witness per scene; per-polyline pieces when absent.
    #[serde(default)]
    pub decompositions: Option<Vec<Decomposition>>,
}

impl ClassGate {
    pub fn new(check: &str, params: ClassParams) -> Self {
        ClassGate { check: check.into(), params, decompositions: None }
    }

    /// Runs the check on `scenes[i]` with witness `i`.
    pub fn enforce(&self, scenes: &[&CompactScene]) -> Result<(), ExperimentError> {
        let reg = CheckRegistry::default();
        let results: Vec<Result<Status, ExperimentError>> = scenes
            .par_iter()
            .enumerate()
            .map(|(i, s)| {
                let d = self.decompositions.as_ref().and_then(|ds| ds.get(i));
                let input = CheckInput { scene: s, decomposition: d, params: &self.params };
                Ok(reg.run(&self.check, &input)?.verdict.status)
            })
            .collect();
        for (i, r) in results.into_iter().enumerate() {
            let status = r?;
            if status != Status::Pass {
                return Err(ExperimentError::ClassCheckFailed { scene: i, check: self.check.clone(), status });
            }
        }
        Ok(())
    }
}

fn default_p() -> f64 {
    2.0
}

fn default_tol() -> f64 {
    1e-4
}

fn default_reduction() -> f64 {
    4.0
}

fn default_symdiff_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MoscoConfig {
    pub sequence: Vec<CompactScene>,
    pub limit: CompactScene,
    #[serde(default = "default_p")]
    pub p: f64,
    pub source: SourceData,
    pub mesh_h: f64,
    /// Tolerance of the certified Hausdorff distances.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub gate: Option<ClassGate>,
    #[serde(default)]
    pub solver: NeumannOptions,
    /// Required ratio `e_1 / e_last`.
    #[serde(default = "default_reduction")]
    pub reduction: f64,
    #[serde(default = "default_symdiff_tol")]
    pub symdiff_tol: f64,
}

impl MoscoConfig {
    /// Unit crack rotated about its centre by `pi / (4n)`, `n = 1..=n_max`,
    /// with source `1 + x1`, converging to the horizontal crack.
    pub fn rotating_crack(n_max: usize, mesh_h: f64) -> Self {
        MoscoConfig {
            sequence: (1..=n_max).map(|n| fixtures::rotated_crack(PI / (4.0 * n as f64))).collect(),
            limit: fixtures::rotated_crack(0.0),
            p: 2.0,
            source: SourceData::scalar(ScalarSource::Affine { c: 1.0, gx: 1.0, gy: 0.0 }),
            mesh_h,
            tol: default_tol(),
            gate: Some(ClassGate::new("fr", ClassParams::new(0.1, 2.0, 1))),
            solver: NeumannOptions::default(),
            reduction: default_reduction(),
            symdiff_tol: default_symdiff_tol(),
        }
    }
}

impl Default for MoscoConfig {
    fn default() -> Self {
        Self::rotating_crack(6, 1.0 / 64.0)
    }
}

/// Smallest distance between crack polylines that do not touch.
pub(crate) fn feature_separation(scene: &CompactScene) -> f64 {
    let cracks = scene.cracks();
    let mut best = f64::INFINITY;
    for i in 0..cracks.len() {
        for j in i + 1..cracks.len() {
            let mut d = f64::INFINITY;
            for a in segs(&cracks[i]) {
                for b in segs(&cracks[j]) {
                    d = d.min(crate::geomkit::dist_segment_segment(a.0, a.1, b.0, b.1));
                }
            }
            if d > 1e-12 {
                best = best.min(d);
            }
        }
    }
    best
}

fn segs(v: &[crate::geomkit::Point]) -> Vec<(crate::geomkit::Point, crate::geomkit::Point)> {
    if v.len() == 1 {
        vec![(v[0], v[0])]
    } else {
        v.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Report plus the solved fields, in step order; the limit field comes last.
pub struct MoscoOutcome {
    pub report: ExperimentReport,
    pub fields: Vec<FeField>,
}

pub fn run_mosco(cfg: &MoscoConfig) -> Result<ExperimentReport, ExperimentError> {
    run_mosco_with_fields(cfg).map(|o| o.report)
}

pub fn run_mosco_with_fields(cfg: &MoscoConfig) -> Result<MoscoOutcome, ExperimentError> {
    if cfg.sequence.is_empty() || !(cfg.mesh_h > 0.0) {
        return Err(ExperimentError::InvalidConfig("empty sequence or non-positive mesh_h".into()));
    }
    if let Some(g) = &cfg.gate {
        let mut all: Vec<&CompactScene> = cfg.sequence.iter().collect();
        all.push(&cfg.limit);
        let mut gate = g.clone();
        // the limit is checked with the per-polyline witness
        if let Some(ds) = &mut gate.decompositions {
            ds.truncate(cfg.sequence.len());
        }
        gate.enforce(&all)?;
    }
    let limit_sep = feature_separation(&cfg.limit);
    let hs: Vec<f64> =
        cfg.sequence.iter().map(|s| cfg.mesh_h.min(feature_separation(s).min(limit_sep) / 4.0)).collect();
    let mut tris: BTreeMap<u64, Arc<Triangulation>> = BTreeMap::new();
    for &h in &hs {
        if let std::collections::btree_map::Entry::Vacant(e) = tris.entry(h.to_bits()) {
            e.insert(Arc::new(build_triangulation(&cfg.limit, &MeshOptions::uniform(h))?));
        }
    }
    let limits: BTreeMap<u64, FeField> = tris
        .par_iter()
        .map(|(k, tri)| -> Result<(u64, FeField), ExperimentError> {
            let mesh = Arc::new(mesh_on(tri, &cfg.limit)?);
            Ok((*k, solve_neumann(&mesh, cfg.p, &cfg.source, &cfg.solver)?.field))
        })
        .collect::<Result<_, _>>()?;
    let outer = cfg.limit.box_radius();
    let rows: Vec<(Step, FeField)> = cfg
        .sequence
        .par_iter()
        .enumerate()
        .map(|(i, scene)| -> Result<(Step, FeField), ExperimentError> {
            let key = hs[i].to_bits();
            let mesh = Arc::new(mesh_on(&tris[&key], scene)?);
            let u_n = solve_neumann(&mesh, cfg.p, &cfg.source, &cfg.solver)?.field;
            let diff = field_difference(&u_n, &limits[&key], cfg.p, Region::All, None, None)?;
            let mut step = Step::new("main", i + 1, hs[i]);
            step.hausdorff = hausdorff_complementary_distance(scene, &cfg.limit, outer, cfg.tol)?.hi();
            step.symdiff = symmetric_difference_area(&mesh.snapped, &limits[&key].mesh.snapped, hs[i] / 4.0)?.hi();
            step.error = diff.combined(cfg.p);
            step.norm = norm(&u_n, NormKind::W1p { p: cfg.p, region: Region::All })?;
            Ok((step, u_n))
        })
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("mosco");
    report.params.insert("p".into(), cfg.p);
    report.params.insert("reduction".into(), cfg.reduction);
    report.params.insert("symdiff_tol".into(), cfg.symdiff_tol);
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.mesh_h = hs.clone();
    report.notes.push("error = L^p norm of (u_n - u, grad u_n - grad u) on the common grid".into());
    report.notes.push("hausdorff = complementary distance of the requested scenes".into());
    let mut fields = Vec::with_capacity(rows.len() + limits.len());
    for (step, f) in rows {
        report.steps.push(step);
        fields.push(f);
    }
    fields.extend(limits.into_values());
    let (rate, verdicts) = report.recompute();
    report.fitted_rate = rate;
    report.verdicts = verdicts;
    Ok(MoscoOutcome { report, fields })
}

pub(crate) fn verdicts(steps: &[Step], params: &BTreeMap<String, f64>) -> (Option<RateFit>, Vec<NamedVerdict>) {
    let main: Vec<&Step> = steps.iter().filter(|s| s.series == "main").collect();
    if main.is_empty() {
        return (None, vec![]);
    }
    let e: Vec<f64> = main.iter().map(|s| s.error).collect();
    let dh: Vec<f64> = main.iter().map(|s| s.hausdorff).collect();
    let red = params.get("reduction").copied().unwrap_or(default_reduction());
    let sd_tol = params.get("symdiff_tol").copied().unwrap_or(default_symdiff_tol());
    let first = e[0];
    let last = e[e.len() - 1];
    let max_sd = main.iter().map(|s| s.symdiff).fold(0.0, f64::max);
    let rate = rate_on_common_h(&main);
    let alpha = rate.as_ref().map_or(f64::NAN, |r| r.alpha);
    let v = vec![
        NamedVerdict::new("error_decreasing", "e_n strictly decreasing in n", strictly_decreasing(&e), last),
        NamedVerdict::new("error_reduction", "e_last <= e_1 / reduction", last <= first / red, first / last),
        NamedVerdict::new(
            "hausdorff_decreasing",
            "complementary Hausdorff distance strictly decreasing",
            strictly_decreasing(&dh),
            dh[dh.len() - 1],
        ),
        NamedVerdict::new("symdiff_small", "symmetric difference area <= symdiff_tol", max_sd <= sd_tol, max_sd),
        NamedVerdict::new("rate_positive", "fitted rate of e_n against d_H is positive", alpha > 0.0, alpha),
    ];
    (rate, v)
}
