use crate::output::{emit_plot_data, write_atomic, write_json};
use moscolab::classlab::{CheckInput, CheckRegistry, ClassError, ClassParams, Decomposition, Status};
use moscolab::crackmesh::build_cracked_mesh;
use moscolab::experiments::{ExperimentError, ExperimentRegistry};
use moscolab::geomkit::{hausdorff_complementary_distance, hausdorff_distance, CompactScene, GeomError};
use moscolab::pdecore::{
    norm, scattering_mesh, solve_neumann, solve_scattering, FeField, NeumannOptions, NormKind, PdeError, Region,
    ScatterConfig, SourceData,
};
use serde::de::DeserializeOwned;
use serde::Serialize;

use serde_json::Value;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("solver did not converge: {0}")]
    NoConvergence(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Invalid(_) | CliError::Io(_) => 2,
            CliError::NoConvergence(_) => 3,
        }
    }
}

impl From<PdeError> for CliError {
    fn from(e: PdeError) -> Self {
        match e {
            PdeError::NoConvergence { .. } | PdeError::SingularSystem(_) => CliError::NoConvergence(e.to_string()),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Pde(p) => p.into(),
            e => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<ClassError> for CliError {
    fn from(e: ClassError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl From<GeomError> for CliError {
    fn from(e: GeomError) -> Self {
        CliError::Invalid(e.to_string())
    }
}

/// A parsed run configuration.
pub struct Context {
    pub command: String,
    pub config: Value,
    /// Directory relative paths in the configuration resolve against.
    pub base: PathBuf,
    pub out: PathBuf,
    pub seed: u64,
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
}

impl Context {
    pub fn load(config: &Path, out: &Path, seed: Option<u64>) -> Result<Self, CliError> {
        let value = read_json(config)?;
        let command = value
            .get("command")
            .and_then(Value::as_str)
            .ok_or_else(|| CliError::Invalid("configuration has no 'command'".into()))?
            .to_string();
        let seed = match (seed, value.get("seed")) {
            (Some(s), _) => s,
            (None, Some(v)) => v.as_u64().ok_or_else(|| CliError::Invalid("seed must be a u64".into()))?,
            (None, None) => 0,
        };
        Ok(Context {
            command,
            base: config.parent().map(Path::to_path_buf).unwrap_or_default(),
            config: value,
            out: out.to_path_buf(),
            seed,
        })
    }

    fn field<T: DeserializeOwned>(&self, key: &str) -> Result<T, CliError> {
        let v = self.config.get(key).ok_or_else(|| CliError::Invalid(format!("missing '{key}'")))?;
        parse(key, v)
    }

    fn field_or<T: DeserializeOwned>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.config.get(key) {
            None | Some(Value::Null) => Ok(default),
            Some(v) => parse(key, v),
        }
    }

    /// Like `field`, but a string value names a JSON file relative to the
    /// configuration.
    fn input<T: DeserializeOwned>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.config.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(path)) => parse(key, &read_json(&self.base.join(path))?).map(Some),
            Some(v) => parse(key, v).map(Some),
        }
    }

    fn required_input<T: DeserializeOwned>(&self, key: &str) -> Result<T, CliError> {
        self.input(key)?.ok_or_else(|| CliError::Invalid(format!("missing '{key}'")))
    }
}

fn parse<T: DeserializeOwned>(key: &str, v: &Value) -> Result<T, CliError> {
    T::deserialize(v).map_err(|e| CliError::Invalid(format!("'{key}': {e}")))
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    /// Runs and writes outputs; `Ok(false)` when a verdict failed.
    fn run(&self, ctx: &Context) -> Result<bool, CliError>;
}

fn default_check() -> String {
    "fr-hat".into()
}

struct CheckClass;

#[derive(Serialize)]
struct CheckOutput<'a> {
    scene: &'a str,
    report: moscolab::classlab::ClassReport,
}

impl Command for CheckClass {
    fn name(&self) -> &'static str {
        "check-class"
    }
    fn run(&self, ctx: &Context) -> Result<bool, CliError> {
        let scene: CompactScene = ctx.required_input("scene")?;
        let decomposition: Option<Decomposition> = ctx.input("decomposition")?;
        let params: ClassParams = ctx.field("params")?;
        let check: String = ctx.field_or("check", default_check())?;
        let input = CheckInput { scene: &scene, decomposition: decomposition.as_ref(), params: &params };
        let report = CheckRegistry::default().run(&check, &input)?;
        let passed = report.verdict.status == Status::Pass;
        write_json(&ctx.out, "report.json", &CheckOutput { scene: scene.label(), report })?;
        Ok(passed)
    }
}

struct Hausdorff;

#[derive(Serialize)]
struct HausdorffOutput {
    lo: f64,
    hi: f64,
    complementary: bool,
}

impl Command for Hausdorff {
    fn name(&self) -> &'static str {
        "hausdorff"
    }
    fn run(&self, ctx: &Context) -> Result<bool, CliError> {
        let a: CompactScene = ctx.required_input("a")?;
        let b: CompactScene = ctx.required_input("b")?;
        let tol: f64 = ctx.field_or("tol", 1e-4)?;
        let outer: Option<f64> = ctx.field_or("outer_radius", None)?;
        let c = match outer {
            Some(r) => hausdorff_complementary_distance(&a, &b, r, tol)?,
            None => hausdorff_distance(&a, &b, tol)?,
        };
        write_json(&ctx.out, "report.json", &HausdorffOutput { lo: c.lo(), hi: c.hi(), complementary: outer.is_some() })?;
        Ok(true)
    }
}

fn write_field(ctx: &Context, f: &FeField) -> Result<(), CliError> {
    let mut buf = Vec::new();
    f.write_dump(&mut buf)?;
    write_atomic(&ctx.out, "field.txt", &buf)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveOutput {
    n_dofs: usize,
    h: f64,
    residual: f64,
    norms: BTreeMap<&'static str, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    solver: BTreeMap<&'static str, f64>,
}

fn l2_norms(f: &FeField) -> Result<BTreeMap<&'static str, f64>, CliError> {
    let mut m = BTreeMap::new();
    m.insert("l2", norm(f, NormKind::Lp { p: 2.0, region: Region::All })?);
    m.insert("grad_l2", norm(f, NormKind::GradLp { p: 2.0, region: Region::All })?);
    Ok(m)
}

struct SolveNeumann;

impl Command for SolveNeumann {
    fn name(&self) -> &'static str {
        "solve-neumann"
    }
    fn run(&self, ctx: &Context) -> Result<bool, CliError> {
        let scene: CompactScene = ctx.required_input("scene")?;
        let h: f64 = ctx.field("h")?;
        let p: f64 = ctx.field_or("p", 2.0)?;
        let source: SourceData = ctx.field_or("source", SourceData::constant(1.0))?;
        let opts: NeumannOptions = ctx.field_or("solver", NeumannOptions::default())?;
        let mesh = Arc::new(build_cracked_mesh(&scene, h).map_err(|e| CliError::Invalid(e.to_string()))?);
        let sol = match solve_neumann(&mesh, p, &source, &opts) {
            Ok(s) => s,
            Err(PdeError::NoConvergence { residual, field }) => {
                write_field(ctx, &field)?;
                return Err(CliError::NoConvergence(format!("residual {residual:e}")));
            }
            Err(e) => return Err(e.into()),
        };
        write_field(ctx, &sol.field)?;
        let mut solver = BTreeMap::new();
        solver.insert("eps", sol.eps);
        solver.insert("newton_steps", sol.newton_steps as f64);
        let out = SolveOutput { n_dofs: mesh.n_dofs(), h: mesh.h, residual: sol.residual, norms: l2_norms(&sol.field)?, solver };
        write_json(&ctx.out, "report.json", &out)?;
        Ok(true)
    }
}

struct ScatterSolve;

impl Command for ScatterSolve {
    fn name(&self) -> &'static str {
        "scatter-solve"
    }
    fn run(&self, ctx: &Context) -> Result<bool, CliError> {
        let scene: CompactScene = ctx.required_input("scene")?;
        let h: f64 = ctx.field("h")?;
        let cfg: ScatterConfig = ctx.field("scatter")?;
        cfg.validate(&scene)?;
        let mesh = Arc::new(scattering_mesh(&scene, cfg.s_trunc, h)?);
        let sol = solve_scattering(&mesh, &scene, &cfg)?;
        write_field(ctx, &sol.u)?;
        let mut norms = l2_norms(&sol.u)?;
        norms.insert("scattered_l2", norm(&sol.u_s, NormKind::Lp { p: 2.0, region: Region::All })?);
        let out = SolveOutput { n_dofs: mesh.n_dofs(), h: mesh.h, residual: sol.residual, norms, solver: BTreeMap::new() };
        write_json(&ctx.out, "report.json", &out)?;
        Ok(true)
    }
}

/// Runs a registered experiment on the configuration's `experiment` field.
struct RunExperiment {
    command: &'static str,
    experiment: &'static str,
}

impl Command for RunExperiment {
    fn name(&self) -> &'static str {
        self.command
    }
    fn run(&self, ctx: &Context) -> Result<bool, CliError> {
        let cfg: Value = ctx.input("experiment")?.unwrap_or(Value::Null);
        let report = ExperimentRegistry::default().run(self.experiment, &cfg, Some(ctx.seed))?;
        write_json(&ctx.out, "report.json", &report)?;
        emit_plot_data(&report, &ctx.out)?;
        for v in report.verdicts.iter().filter(|v| !v.passed) {
            log::warn!("verdict {} failed: {} (value {})", v.name, v.criterion, v.value);
        }
        Ok(report.all_passed())
    }
}

pub struct CommandRegistry {
    commands: BTreeMap<&'static str, Box<dyn Command>>,
}

impl Default for CommandRegistry {
    fn default() -> Self {
        let mut r = CommandRegistry { commands: BTreeMap::new() };
        r.register(Box::new(CheckClass));
        r.register(Box::new(Hausdorff));
        r.register(Box::new(SolveNeumann));
        r.register(Box::new(ScatterSolve));
        for (command, experiment) in [
            ("mosco-run", "mosco"),
            ("sieve-run", "sieve"),
            ("sobolev-run", "sobolev"),
            ("scatter-stability", "scatter-stability"),
            ("uniform-bounds", "uniform-bounds"),
        ] {
            r.register(Box::new(RunExperiment { command, experiment }));
        }
        r
    }
}

impl CommandRegistry {
    pub fn register(&mut self, c: Box<dyn Command>) {
        self.commands.insert(c.name(), c);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.commands.keys().copied().collect()
    }
}
