use super::fixtures;
use super::report::{config_hash, strictly_decreasing, ExperimentReport, NamedVerdict, Step};
use super::ExperimentError;
use crate::classlab::{check_gluing, Anchor, CheckInput, CheckRegistry, ClassParams, Decomposition, Modulus, Status};
use crate::crackmesh::build_cracked_mesh;
use crate::geomkit::CompactScene;
use crate::pdecore::{estimate_best_constant, ConstantMode, EstimateOptions, FeField};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Scene with its witness and the gluing modulus it is expected to satisfy.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyMember {
    pub scene: CompactScene,
    #[serde(default)]
    pub decomposition: Option<Decomposition>,
    pub omega: Modulus,
}

impl FamilyMember {
    fn witness(&self) -> Decomposition {
        self.decomposition.clone().unwrap_or_else(|| Decomposition::per_polyline(&self.scene))
    }
}

fn default_h() -> f64 {
    1.0 / 64.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SobolevConfig {
    /// Members of a linear hat class sharing parameters.
    pub uniform: Vec<FamilyMember>,
    /// Cusp family ordered by sharpening cusp; glued only quadratically.
    #[serde(default)]
    pub contrast: Vec<FamilyMember>,
    pub p: f64,
    pub q: f64,
    #[serde(default)]
    pub opts: EstimateOptions,
    #[serde(default = "default_h")]
    pub h: f64,
    /// FR parameters shared by every member.
    pub class: ClassParams,
    #[serde(default = "default_uniform_ratio")]
    pub uniform_ratio: f64,
    #[serde(default = "default_blowup_ratio")]
    pub blowup_ratio: f64,
}

fn default_uniform_ratio() -> f64 {
    2.0
}

fn default_blowup_ratio() -> f64 {
    4.0
}

pub const PLUS_ANGLES: [f64; 3] = [90.0, 60.0, 30.0];
pub const CUSP_BETAS: [f64; 4] = [1.0, 4.0, 16.0, 64.0];

impl Default for SobolevConfig {
    /// Plus-signs at 90, 60 and 30 degrees glued linearly with `a = sin θ`,
    /// against the tangent-parabola family glued with `δ²/(2β)`.
    fn default() -> Self {
        let uniform = PLUS_ANGLES
            .iter()
            .map(|deg| {
                let th = deg.to_radians();
                FamilyMember {
                    scene: fixtures::plus(th, 1.0, 1.5),
                    decomposition: None,
                    omega: Modulus::linear(th.sin() * (1.0 - 1e-3), 0.5),
                }
            })
            .collect();
        let contrast = CUSP_BETAS
            .iter()
            .map(|&b| FamilyMember {
                scene: fixtures::tangent_parabola(b),
                decomposition: None,
                omega: Modulus::Quadratic { a: 0.5 / b },
            })
            .collect();
        SobolevConfig {
            uniform,
            contrast,
            p: 1.0,
            q: 2.0,
            opts: EstimateOptions::default(),
            h: default_h(),
            class: ClassParams::new(0.25, 2.0, 1),
            uniform_ratio: default_uniform_ratio(),
            blowup_ratio: default_blowup_ratio(),
        }
    }
}

pub struct SobolevOutcome {
    pub report: ExperimentReport,
    /// Maximizers in step order.
    pub fields: Vec<FeField>,
}

fn gate(cfg: &SobolevConfig, members: &[FamilyMember], offset: usize, linear: bool) -> Result<(), ExperimentError> {
    let reg = CheckRegistry::default();
    let statuses: Vec<Result<Status, ExperimentError>> = members
        .par_iter()
        .map(|m| {
            let params = cfg.class.clone().with_omega(m.omega.clone());
            let d = m.witness();
            if linear {
                let input = CheckInput { scene: &m.scene, decomposition: Some(&d), params: &params };
                Ok(reg.run("fr-hat", &input)?.verdict.status)
            } else {
                Ok(check_gluing(&m.scene, &d, Anchor::Bdry, &m.omega, params.tol)?.verdict.status)
            }
        })
        .collect();
    for (i, s) in statuses.into_iter().enumerate() {
        let s = s?;
        if s != Status::Pass {
            let check = if linear { "fr-hat" } else { "gluing" };
            return Err(ExperimentError::ClassCheckFailed { scene: offset + i, check: check.into(), status: s });
        }
    }
    Ok(())
}

pub fn run_sobolev_uniformity(cfg: &SobolevConfig) -> Result<ExperimentReport, ExperimentError> {
    run_sobolev_with_fields(cfg).map(|o| o.report)
}

pub fn run_sobolev_with_fields(cfg: &SobolevConfig) -> Result<SobolevOutcome, ExperimentError> {
    if cfg.uniform.is_empty() {
        return Err(ExperimentError::InvalidConfig("uniform family is empty".into()));
    }
    gate(cfg, &cfg.uniform, 0, true)?;
    gate(cfg, &cfg.contrast, cfg.uniform.len(), false)?;
    let mode = ConstantMode::Sobolev { p: cfg.p, q: cfg.q };
    let jobs: Vec<(&str, usize, &FamilyMember)> = cfg
        .uniform
        .iter()
        .enumerate()
        .map(|(i, m)| ("uniform", i + 1, m))
        .chain(cfg.contrast.iter().enumerate().map(|(i, m)| ("contrast", i + 1, m)))
        .collect();
    let rows: Vec<(Step, FeField)> = jobs
        .par_iter()
        .map(|&(series, n, m)| -> Result<(Step, FeField), ExperimentError> {
            let mesh = Arc::new(build_cracked_mesh(&m.scene, cfg.h)?);
            let best = estimate_best_constant(&mesh, mode, &cfg.opts)?;
            let mut st = Step::new(series, n, mesh.h);
            st.hausdorff = mesh.snap_error;
            st.constant = best.constant;
            Ok((st, best.maximizer))
        })
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("sobolev");
    report.params.insert("p".into(), cfg.p);
    report.params.insert("q".into(), cfg.q);
    report.params.insert("uniform_ratio".into(), cfg.uniform_ratio);
    report.params.insert("blowup_ratio".into(), cfg.blowup_ratio);
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.seeds = vec![cfg.opts.seed];
    report.provenance.mesh_h = vec![cfg.h];
    report.notes.push("constant = estimated best SOBOLEV(p, q) constant; hausdorff = snapping error".into());
    let (steps, fields): (Vec<Step>, Vec<FeField>) = rows.into_iter().unzip();
    report.steps = steps;
    report.verdicts = verdicts(&report.steps, &report.params);
    Ok(SobolevOutcome { report, fields })
}

pub(crate) fn verdicts(steps: &[Step], params: &BTreeMap<String, f64>) -> Vec<NamedVerdict> {
    let col = |name: &str| -> Vec<f64> { steps.iter().filter(|s| s.series == name).map(|s| s.constant).collect() };
    let (u, c) = (col("uniform"), col("contrast"));
    let mut out = Vec::new();
    if !u.is_empty() {
        let ur = params.get("uniform_ratio").copied().unwrap_or(default_uniform_ratio());
        let max = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = u.iter().copied().fold(f64::INFINITY, f64::min);
        out.push(NamedVerdict::new("uniform", "max/min constant over the hat-class family <= uniform_ratio", max / min <= ur, max / min));
    }
    if c.len() >= 2 {
        let br = params.get("blowup_ratio").copied().unwrap_or(default_blowup_ratio());
        let neg: Vec<f64> = c.iter().map(|x| -x).collect();
        let ratio = c[c.len() - 1] / c[0];
        out.push(NamedVerdict::new(
            "blowup",
            "cusp-family constants strictly increasing with last/first >= blowup_ratio",
            strictly_decreasing(&neg) && ratio >= br,
            ratio,
        ));
    }
    out
}
