use super::compare::field_difference;
use super::fixtures::{p, scene};
use super::report::{config_hash, ExperimentReport, NamedVerdict, Step};
use super::ExperimentError;
use crate::classlab::{CheckInput, CheckRegistry, ClassParams, Status};
use crate::crackmesh::{build_triangulation, mesh_on, MeshOptions};
use crate::geomkit::{CompactScene, Point};
use crate::pdecore::{norm, FeField, solve_neumann, NeumannOptions, NormKind, Region, ScalarSource, SourceData};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Gap width as a function of the number of holes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum GapRule {
    /// `1 / (2n)`
    Wide,
    /// `4^-n / n`
    Tiny,
    /// `exp(-c n) / n`
    Critical { c: f64 },
}

impl GapRule {
    pub fn gap(&self, n: usize) -> f64 {
        let nf = n as f64;
        match *self {
            GapRule::Wide => 0.5 / nf,
            GapRule::Tiny => 0.25f64.powi(n as i32) / nf,
            GapRule::Critical { c } => (-c * nf).exp() / nf,
        }
    }

    fn code(&self) -> f64 {
        match self {
            GapRule::Wide => 0.0,
            GapRule::Tiny => 1.0,
            GapRule::Critical { .. } => 2.0,
        }
    }
}

/// Narrowest gap the meshing can resolve.
pub const MIN_GAP: f64 = 1e-8;

/// The line `y = 0` across the box of half-width `box_radius`, with `n`
/// gaps of width `gap` centred in `n` equal sub-intervals.
pub fn sieve_scene(n: usize, gap: f64, box_radius: f64) -> Result<CompactScene, ExperimentError> {
    let cell = 2.0 * box_radius / n as f64;
    if n == 0 || !(gap >= MIN_GAP && gap < cell) {
        return Err(ExperimentError::InvalidConfig(format!("gap {gap:e} does not fit {n} cells")));
    }
    let mut x = -box_radius;
    let mut cracks = Vec::with_capacity(n + 1);
    for i in 0..n {
        let mid = -box_radius + (i as f64 + 0.5) * cell;
        cracks.push(vec![p(x, 0.0), p(mid - 0.5 * gap, 0.0)]);
        x = mid + 0.5 * gap;
    }
    cracks.push(vec![p(x, 0.0), p(box_radius, 0.0)]);
    Ok(scene(box_radius, Point::default(), cracks, &format!("sieve{n}"))?)
}

fn gap_endpoints(s: &CompactScene) -> Vec<Point> {
    let c = s.cracks();
    c.windows(2).flat_map(|w| [w[0][1], w[1][0]]).collect()
}

fn default_n_list() -> Vec<usize> {
    (1..=6).collect()
}

fn default_p() -> f64 {
    2.0
}

fn default_source() -> SourceData {
    SourceData::scalar(ScalarSource::Affine { c: 1.0, gx: 0.0, gy: 2.0 })
}

fn default_h() -> f64 {
    1.0 / 32.0
}

fn default_threshold() -> f64 {
    0.05
}

fn default_reduction() -> f64 {
    2.0
}

fn default_class() -> ClassParams {
    ClassParams::new(1.0, 2.0, 1)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SieveConfig {
    #[serde(default = "default_n_list")]
    pub n_list: Vec<usize>,
    pub rule: GapRule,
    #[serde(default = "default_p")]
    pub p: f64,
    #[serde(default = "default_source")]
    pub source: SourceData,
    /// Base spacing; the mesh is graded towards the gap endpoints.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default = "default_one")]
    pub box_radius: f64,
    /// Parameters of the FR check every sieve scene is expected to fail.
    #[serde(default = "default_class")]
    pub class: ClassParams,
    /// Two-sided gap threshold as a fraction of `||u_full||`.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_reduction")]
    pub reduction: f64,
    #[serde(default)]
    pub solver: NeumannOptions,
}

fn default_one() -> f64 {
    1.0
}

impl SieveConfig {
    pub fn new(rule: GapRule) -> Self {
        SieveConfig {
            n_list: default_n_list(),
            rule,
            p: default_p(),
            source: default_source(),
            h: default_h(),
            box_radius: 1.0,
            class: default_class(),
            threshold: default_threshold(),
            reduction: default_reduction(),
            solver: NeumannOptions::default(),
        }
    }
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self::new(GapRule::Wide)
    }
}

/// Report plus `(u_n, u_full, u_empty)` for every `n`, in `n_list` order.
pub struct SieveOutcome {
    pub report: ExperimentReport,
    pub fields: Vec<FeField>,
}

pub fn run_sieve(cfg: &SieveConfig) -> Result<ExperimentReport, ExperimentError> {
    run_sieve_with_fields(cfg).map(|o| o.report)
}

pub fn run_sieve_with_fields(cfg: &SieveConfig) -> Result<SieveOutcome, ExperimentError> {
    if cfg.n_list.is_empty() || !(cfg.h > 0.0) {
        return Err(ExperimentError::InvalidConfig("empty n_list or non-positive h".into()));
    }
    let r = cfg.box_radius;
    let full = scene(r, Point::default(), vec![vec![p(-r, 0.0), p(r, 0.0)]], "full")?;
    let empty = scene(r, Point::default(), vec![], "empty")?;
    let reg = CheckRegistry::default();
    let rows: Vec<(Vec<Step>, [FeField; 3])> = cfg
        .n_list
        .par_iter()
        .map(|&n| -> Result<(Vec<Step>, [FeField; 3]), ExperimentError> {
            let gap = cfg.rule.gap(n);
            let s = sieve_scene(n, gap, r)?;
            let hmin = (gap / 4.0).min(cfg.h);
            let opts = MeshOptions { h: cfg.h, refine_points: gap_endpoints(&s), hmin, ..Default::default() };
            let tri = Arc::new(build_triangulation(&s, &opts)?);
            let solve = |sc: &CompactScene| -> Result<_, ExperimentError> {
                let mesh = Arc::new(mesh_on(&tri, sc)?);
                Ok(solve_neumann(&mesh, cfg.p, &cfg.source, &cfg.solver)?.field)
            };
            let (u_n, u_full, u_empty) = (solve(&s)?, solve(&full)?, solve(&empty)?);
            let full_norm = norm(&u_full, NormKind::Lp { p: 2.0, region: Region::All })?;
            let g_full = field_difference(&u_n, &u_full, 2.0, Region::All, None, None)?.value;
            let g_empty = field_difference(&u_n, &u_empty, 2.0, Region::All, None, None)?.value;
            let input = CheckInput { scene: &s, decomposition: None, params: &cfg.class };
            let fr = reg.run("fr", &input)?.verdict.status;
            let mut rows = Vec::new();
            for (series, g) in [("g_full", g_full), ("g_empty", g_empty)] {
                let mut st = Step::new(series, n, hmin);
                st.hausdorff = 0.5 * gap;
                st.error = g;
                st.norm = full_norm;
                rows.push(st);
            }
            let mut st = Step::new("fr_check", n, hmin);
            st.error = if fr == Status::Fail { 1.0 } else { 0.0 };
            rows.push(st);
            Ok((rows, [u_n, u_full, u_empty]))
        })
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("sieve");
    let (steps, fields): (Vec<Vec<Step>>, Vec<[FeField; 3]>) = rows.into_iter().unzip();
    report.steps = steps.into_iter().flatten().collect();
    report.steps.sort_by(|a, b| (a.n, series_rank(&a.series)).cmp(&(b.n, series_rank(&b.series))));
    report.params.insert("regime".into(), cfg.rule.code());
    if let GapRule::Critical { c } = cfg.rule {
        report.params.insert("c".into(), c);
    }
    report.params.insert("threshold".into(), cfg.threshold);
    report.params.insert("reduction".into(), cfg.reduction);
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.mesh_h = vec![cfg.h];
    report.notes.push("hausdorff = complementary distance to the full crack (half the gap)".into());
    report.notes.push("norm = ||u_full||_L2; fr_check rows carry error = 1 when the FR check fails".into());
    report.verdicts = verdicts(&report.steps, &report.params);
    Ok(SieveOutcome { report, fields: fields.into_iter().flatten().collect() })
}

fn series_rank(s: &str) -> usize {
    ["g_full", "g_empty", "fr_check"].iter().position(|x| *x == s).unwrap_or(3)
}

pub(crate) fn verdicts(steps: &[Step], params: &BTreeMap<String, f64>) -> Vec<NamedVerdict> {
    let col = |name: &str| -> Vec<&Step> { steps.iter().filter(|s| s.series == name).collect() };
    let (gf, ge, fr) = (col("g_full"), col("g_empty"), col("fr_check"));
    if gf.is_empty() || ge.is_empty() {
        return vec![];
    }
    let red = params.get("reduction").copied().unwrap_or(default_reduction());
    let thr = params.get("threshold").copied().unwrap_or(default_threshold());
    let ratio = |v: &[&Step]| v[0].error / v[v.len() - 1].error;
    let mut out = Vec::new();
    match params.get("regime").copied().unwrap_or(0.0) as i64 {
        0 => {
            let r = ratio(&ge);
            out.push(NamedVerdict::new("wide_to_empty", "g_empty(last) <= g_empty(first) / reduction", r >= red, r));
        }
        1 => {
            let r = ratio(&gf);
            out.push(NamedVerdict::new("tiny_to_full", "g_full(last) <= g_full(first) / reduction", r >= red, r));
        }
        _ => {
            let m = gf
                .iter()
                .zip(&ge)
                .map(|(a, b)| a.error.min(b.error) / a.norm)
                .fold(f64::INFINITY, f64::min);
            out.push(NamedVerdict::new(
                "critical_two_sided",
                "min(g_full, g_empty) >= threshold * ||u_full|| for every n",
                m >= thr,
                m,
            ));
        }
    }
    let all_fail = !fr.is_empty() && fr.iter().all(|s| s.error == 1.0);
    out.push(NamedVerdict::new("fr_fails", "every sieve scene FAILs the FR check", all_fail, fr.len() as f64));
    out
}

/// Sweeps `c` for the critical rule; returns the `c` with the largest
/// two-sided margin and all sweep reports in input order.
pub fn calibrate_critical(
    base: &SieveConfig,
    c_values: &[f64],
) -> Result<(f64, Vec<ExperimentReport>), ExperimentError> {
    let reports: Vec<ExperimentReport> = c_values
        .iter()
        .map(|&c| run_sieve(&SieveConfig { rule: GapRule::Critical { c }, ..base.clone() }))
        .collect::<Result<_, _>>()?;
    let margin = |r: &ExperimentReport| r.verdict("critical_two_sided").map_or(f64::NEG_INFINITY, |v| v.value);
    let best = c_values
        .iter()
        .zip(&reports)
        .max_by(|a, b| margin(a.1).total_cmp(&margin(b.1)))
        .map(|(c, _)| *c)
        .ok_or_else(|| ExperimentError::InvalidConfig("empty sweep".into()))?;
    Ok((best, reports))
}
