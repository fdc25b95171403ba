use super::compare::field_difference;
use super::fixtures::{self, p};
use super::mosco::ClassGate;
use super::rate::{fit_rate, RateFit};
use super::report::{config_hash, rate_on_common_h, strictly_decreasing, ExperimentReport, NamedVerdict, Step};
use super::ExperimentError;
use crate::classlab::ClassParams;
use crate::crackmesh::{build_triangulation, mesh_on, CrackMesh, MeshOptions, Triangulation};
use crate::geomkit::{hausdorff_complementary_distance, CompactScene, Point};
use crate::pdecore::{
    norm, solve_scattering, CoefficientField, FeField, NormKind, Region, ScatterConfig, ScatterSolution,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

fn default_h() -> f64 {
    0.02
}

fn default_s_report() -> f64 {
    1.5
}

fn default_reduction() -> f64 {
    3.0
}

fn default_bound_ratio() -> f64 {
    10.0
}

fn default_tol() -> f64 {
    1e-4
}

fn sc_gate() -> ClassGate {
    let mut params = ClassParams::new(0.1, 2.0, 1);
    params.t_samples = vec![0.05, 0.1];
    ClassGate::new("sc", params)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScatterStabilityConfig {
    pub sequence: Vec<CompactScene>,
    pub limit: CompactScene,
    /// Limit problem: wavenumber, direction, truncation and coefficients.
    pub config: ScatterConfig,
    /// Per-term coefficients; the limit coefficients when empty.
    #[serde(default)]
    pub coeff_sequence: Vec<CoefficientField>,
    /// Per-term wavenumbers; the limit wavenumber when empty.
    #[serde(default)]
    pub k_sequence: Vec<f64>,
    /// Per-term directions; the limit direction when empty.
    #[serde(default)]
    pub d_sequence: Vec<Point>,
    #[serde(default = "default_h")]
    pub h: f64,
    /// Radius of the ball the errors and norms are measured on.
    #[serde(default = "default_s_report")]
    pub s_report: f64,
    #[serde(default)]
    pub gate: Option<ClassGate>,
    #[serde(default = "default_reduction")]
    pub reduction: f64,
    #[serde(default = "default_bound_ratio")]
    pub bound_ratio: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

impl ScatterStabilityConfig {
    /// Unit crack rotated by `1/n` towards the vertical crack, `k = 2`,
    /// incident along `x1`.
    pub fn rotating_crack(n_max: usize, h: f64) -> Self {
        let vertical = std::f64::consts::FRAC_PI_2;
        ScatterStabilityConfig {
            sequence: (1..=n_max).map(|n| fixtures::rotated_crack(vertical + 1.0 / n as f64)).collect(),
            limit: fixtures::rotated_crack(vertical),
            config: ScatterConfig::new(2.0, p(1.0, 0.0), 2.0),
            coeff_sequence: vec![],
            k_sequence: vec![],
            d_sequence: vec![],
            h,
            s_report: default_s_report(),
            gate: Some(sc_gate()),
            reduction: default_reduction(),
            bound_ratio: default_bound_ratio(),
            tol: default_tol(),
        }
    }

    fn term(&self, i: usize) -> ScatterConfig {
        let mut c = self.config.clone();
        if let Some(k) = self.k_sequence.get(i) {
            c.k = *k;
        }
        if let Some(d) = self.d_sequence.get(i) {
            c.d = *d;
        }
        if let Some(q) = self.coeff_sequence.get(i) {
            c.coeff = q.clone();
        }
        c
    }
}

impl Default for ScatterStabilityConfig {
    fn default() -> Self {
        Self::rotating_crack(6, default_h())
    }
}

fn common_grid(scene: &CompactScene, s_trunc: f64, h: f64) -> Result<Arc<Triangulation>, ExperimentError> {
    let opts = MeshOptions { h, box_center: Some(Point::default()), box_radius: Some(s_trunc), ..Default::default() };
    Ok(Arc::new(build_triangulation(scene, &opts)?))
}

fn solve_on(
    tri: &Arc<Triangulation>,
    scene: &CompactScene,
    cfg: &ScatterConfig,
) -> Result<(Arc<CrackMesh>, ScatterSolution), ExperimentError> {
    cfg.validate(scene)?;
    let mesh = Arc::new(mesh_on(tri, scene)?);
    let sol = solve_scattering(&mesh, scene, cfg)?;
    Ok((mesh, sol))
}

/// `||u||_{L2(B_s)} + ||grad u||_{L2(B_s)}`.
fn bound(u: &FeField, s: f64) -> Result<f64, ExperimentError> {
    let region = Region::Disk { center: Point::default(), radius: s };
    Ok(norm(u, NormKind::Lp { p: 2.0, region })? + norm(u, NormKind::GradLp { p: 2.0, region })?)
}

pub fn run_scattering_stability(cfg: &ScatterStabilityConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.sequence.is_empty() || !(cfg.h > 0.0) || !(cfg.s_report > 0.0 && cfg.s_report <= cfg.config.s_trunc) {
        return Err(ExperimentError::InvalidConfig("empty sequence, bad h or bad s_report".into()));
    }
    if let Some(g) = &cfg.gate {
        let mut all: Vec<&CompactScene> = cfg.sequence.iter().collect();
        all.push(&cfg.limit);
        g.enforce(&all)?;
    }
    let s = cfg.config.s_trunc;
    let tri = common_grid(&cfg.limit, s, cfg.h)?;
    let (_, lim) = solve_on(&tri, &cfg.limit, &cfg.config)?;
    let region = Region::Disk { center: Point::default(), radius: cfg.s_report };
    let steps: Vec<Step> = cfg
        .sequence
        .par_iter()
        .enumerate()
        .map(|(i, scene)| -> Result<Step, ExperimentError> {
            let term = cfg.term(i);
            let (_, sol) = solve_on(&tri, scene, &term)?;
            let d = field_difference(&sol.u, &lim.u, 2.0, region, Some(&term.coeff), Some(&cfg.config.coeff))?;
            let mut st = Step::new("main", i + 1, cfg.h);
            st.hausdorff = hausdorff_complementary_distance(scene, &cfg.limit, scene.box_radius(), cfg.tol)?.hi();
            st.error = d.value + d.grad;
            st.norm = bound(&sol.u, cfg.s_report)?;
            Ok(st)
        })
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("scatter-stability");
    report.steps = steps;
    report.params.insert("reduction".into(), cfg.reduction);
    report.params.insert("bound_ratio".into(), cfg.bound_ratio);
    report.params.insert("s_report".into(), cfg.s_report);
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.mesh_h = vec![cfg.h];
    report.notes.push("error = E_n on B_s; norm = ||u_n|| + ||grad u_n|| on B_s".into());
    report.notes.push("unique continuation for the limit equation is assumed, not checked".into());
    let (rate, v) = report.recompute();
    report.fitted_rate = rate;
    report.verdicts = v;
    Ok(report)
}

fn bounded_verdict(b: &[f64], ratio: f64) -> NamedVerdict {
    let max = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = b.iter().copied().fold(f64::INFINITY, f64::min);
    NamedVerdict::new("bounded", "max/min of ||u|| + ||grad u|| on B_s <= bound_ratio", max / min <= ratio, max / min)
}

pub(crate) fn stability_verdicts(
    steps: &[Step],
    params: &BTreeMap<String, f64>,
) -> (Option<RateFit>, Vec<NamedVerdict>) {
    let main: Vec<&Step> = steps.iter().filter(|s| s.series == "main").collect();
    if main.is_empty() {
        return (None, vec![]);
    }
    let e: Vec<f64> = main.iter().map(|s| s.error).collect();
    let b: Vec<f64> = main.iter().map(|s| s.norm).collect();
    let red = params.get("reduction").copied().unwrap_or(default_reduction());
    let ratio = params.get("bound_ratio").copied().unwrap_or(default_bound_ratio());
    let rate = rate_on_common_h(&main);
    let alpha = rate.as_ref().map_or(f64::NAN, |r| r.alpha);
    let (first, last) = (e[0], e[e.len() - 1]);
    let v = vec![
        NamedVerdict::new("error_decreasing", "E_n strictly decreasing in n", strictly_decreasing(&e), last),
        NamedVerdict::new("error_reduction", "E_last <= E_1 / reduction", last <= first / red, first / last),
        NamedVerdict::new("rate_positive", "fitted rate of E_n against d_H is positive", alpha > 0.0, alpha),
        bounded_verdict(&b, ratio),
    ];
    (rate, v)
}

/// One member of a uniform-bounds family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundsMember {
    pub scene: CompactScene,
    #[serde(default = "CoefficientField::identity")]
    pub coeff: CoefficientField,
    pub k: f64,
    pub d: Point,
}

fn default_s_trunc() -> f64 {
    3.0
}

fn default_bounds_h() -> f64 {
    0.04
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniformBoundsConfig {
    pub members: Vec<BoundsMember>,
    #[serde(default = "default_s_trunc")]
    pub s_trunc: f64,
    #[serde(default = "default_s_report")]
    pub s_report: f64,
    #[serde(default = "default_bounds_h")]
    pub h: f64,
    #[serde(default = "default_bound_ratio")]
    pub bound_ratio: f64,
    /// Number of radial bins for the far-field decay fit.
    #[serde(default = "default_bins")]
    pub decay_bins: usize,
}

fn default_bins() -> usize {
    8
}

impl Default for UniformBoundsConfig {
    /// Ten rotated and translated cracks and plus-signs, `k` in `[1, 2]`.
    fn default() -> Self {
        use std::f64::consts::PI;
        let crack = |c: Point, len: f64, th: f64| {
            fixtures::scene(1.5, Point::default(), vec![fixtures::segment(c, len, th)], "crack").expect("valid")
        };
        let o = Point::default();
        let d45 = p(1.0, 1.0) * std::f64::consts::FRAC_1_SQRT_2;
        let m = |scene: CompactScene, k: f64, d: Point| BoundsMember { scene, coeff: CoefficientField::identity(), k, d };
        UniformBoundsConfig {
            members: vec![
                m(crack(o, 1.0, 0.0), 1.0, p(1.0, 0.0)),
                m(crack(o, 1.0, PI / 3.0), 1.25, p(1.0, 0.0)),
                m(crack(p(0.3, 0.2), 1.0, PI / 2.0), 1.5, p(1.0, 0.0)),
                m(crack(p(-0.2, 0.1), 1.5, PI / 4.0), 2.0, p(1.0, 0.0)),
                m(crack(p(0.0, -0.3), 1.0, 2.0 * PI / 3.0), 1.75, p(0.0, 1.0)),
                m(crack(o, 0.5, PI / 6.0), 2.0, d45),
                m(fixtures::plus(PI / 2.0, 0.5, 1.5), 1.0, p(1.0, 0.0)),
                m(fixtures::plus(PI / 3.0, 0.5, 1.5), 1.5, p(1.0, 0.0)),
                m(fixtures::plus(PI / 6.0, 0.5, 1.5), 2.0, p(1.0, 0.0)),
                m(fixtures::plus(PI / 2.0, 0.75, 1.5), 1.25, p(0.0, 1.0)),
            ],
            s_trunc: default_s_trunc(),
            s_report: default_s_report(),
            h: default_bounds_h(),
            bound_ratio: default_bound_ratio(),
            decay_bins: default_bins(),
        }
    }
}

/// Exponent `b` of `max |u_s| ~ C r^-b` over radial bins of the annulus
/// between `r0` and `0.9 s_trunc`.
fn decay_exponent(u_s: &FeField, r0: f64, r1: f64, bins: usize) -> Option<f64> {
    let vals = u_s.as_complex()?;
    let mut max = vec![0.0f64; bins];
    for (d, v) in vals.iter().enumerate() {
        let r = u_s.mesh.dof_point(d).norm();
        if r >= r0 && r < r1 {
            let b = (((r - r0) / (r1 - r0)) * bins as f64) as usize;
            max[b.min(bins - 1)] = max[b.min(bins - 1)].max(v.norm());
        }
    }
    let pairs: Vec<(f64, f64)> = (0..bins)
        .map(|b| (r0 + (b as f64 + 0.5) * (r1 - r0) / bins as f64, max[b]))
        .filter(|&(_, m)| m > 0.0)
        .collect();
    fit_rate(&pairs).ok().map(|f| -f.alpha)
}

pub fn run_uniform_bounds(cfg: &UniformBoundsConfig) -> Result<ExperimentReport, ExperimentError> {
    if cfg.members.is_empty() || !(cfg.s_report > 0.0 && cfg.s_report < cfg.s_trunc) || cfg.decay_bins < 3 {
        return Err(ExperimentError::InvalidConfig("empty family, bad s_report or too few bins".into()));
    }
    let steps: Vec<Step> = cfg
        .members
        .par_iter()
        .enumerate()
        .map(|(i, m)| -> Result<Step, ExperimentError> {
            let mut sc = ScatterConfig::new(m.k, m.d, cfg.s_trunc);
            sc.coeff = m.coeff.clone();
            let tri = common_grid(&m.scene, cfg.s_trunc, cfg.h)?;
            let (_, sol) = solve_on(&tri, &m.scene, &sc)?;
            let mut st = Step::new("bounds", i + 1, cfg.h);
            st.norm = bound(&sol.u, cfg.s_report)?;
            st.constant = decay_exponent(&sol.u_s, cfg.s_report, 0.9 * cfg.s_trunc, cfg.decay_bins).unwrap_or(f64::NAN);
            Ok(st)
        })
        .collect::<Result<_, _>>()?;
    let mut report = ExperimentReport::new("uniform-bounds");
    report.steps = steps;
    report.params.insert("bound_ratio".into(), cfg.bound_ratio);
    report.params.insert("s_report".into(), cfg.s_report);
    report.provenance.config_hash = config_hash(cfg);
    report.provenance.mesh_h = vec![cfg.h];
    report.notes.push("norm = ||u|| + ||grad u|| on B_s minus K".into());
    report.notes.push("constant = fitted decay exponent of max |u_s| on the truncated annulus (indicative)".into());
    let (rate, v) = report.recompute();
    report.fitted_rate = rate;
    report.verdicts = v;
    Ok(report)
}

pub(crate) fn bounds_verdicts(
    steps: &[Step],
    params: &BTreeMap<String, f64>,
) -> (Option<RateFit>, Vec<NamedVerdict>) {
    let b: Vec<f64> = steps.iter().filter(|s| s.series == "bounds").map(|s| s.norm).collect();
    if b.is_empty() {
        return (None, vec![]);
    }
    let ratio = params.get("bound_ratio").copied().unwrap_or(default_bound_ratio());
    (None, vec![bounded_verdict(&b, ratio)])
}
