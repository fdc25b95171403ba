use super::mosco::{run_mosco, MoscoConfig};
use super::report::ExperimentReport;
use super::scatter::{run_scattering_stability, run_uniform_bounds, ScatterStabilityConfig, UniformBoundsConfig};
use super::sieve::{run_sieve, SieveConfig};
use super::sobolev::{run_sobolev_uniformity, SobolevConfig};
use super::ExperimentError;
use serde::de::DeserializeOwned;
use serde_json::Value;
use std::collections::BTreeMap;

/// An experiment runnable from a JSON configuration. A `null` or empty
/// object selects the built-in desk configuration.
pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    fn describe(&self) -> &'static str;
    fn run(&self, config: &Value, seed: Option<u64>) -> Result<ExperimentReport, ExperimentError>;
}

fn parse<T: DeserializeOwned + Default>(config: &Value) -> Result<T, ExperimentError> {
    match config {
        Value::Null => Ok(T::default()),
        Value::Object(m) if m.is_empty() => Ok(T::default()),
        v => serde_json::from_value(v.clone()).map_err(|e| ExperimentError::InvalidConfig(e.to_string())),
    }
}

struct Mosco;

impl Experiment for Mosco {
    fn name(&self) -> &'static str {
        "mosco"
    }
    fn describe(&self) -> &'static str {
        "Neumann stability along a converging crack sequence"
    }
    fn run(&self, config: &Value, _seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        run_mosco(&parse::<MoscoConfig>(config)?)
    }
}

struct Sieve;

impl Experiment for Sieve {
    fn name(&self) -> &'static str {
        "sieve"
    }
    fn describe(&self) -> &'static str {
        "Neumann sieve: perforated line with shrinking gaps"
    }
    fn run(&self, config: &Value, _seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        run_sieve(&parse::<SieveConfig>(config)?)
    }
}

struct Sobolev;

impl Experiment for Sobolev {
    fn name(&self) -> &'static str {
        "sobolev"
    }
    fn describe(&self) -> &'static str {
        "Sobolev constants over a hat-class family and a cusp family"
    }
    fn run(&self, config: &Value, seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        let mut cfg = parse::<SobolevConfig>(config)?;
        if let Some(s) = seed {
            cfg.opts.seed = s;
        }
        run_sobolev_uniformity(&cfg)
    }
}

struct ScatterStability;

impl Experiment for ScatterStability {
    fn name(&self) -> &'static str {
        "scatter-stability"
    }
    fn describe(&self) -> &'static str {
        "scattering stability along a converging scatterer sequence"
    }
    fn run(&self, config: &Value, _seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        run_scattering_stability(&parse::<ScatterStabilityConfig>(config)?)
    }
}

struct UniformBounds;

impl Experiment for UniformBounds {
    fn name(&self) -> &'static str {
        "uniform-bounds"
    }
    fn describe(&self) -> &'static str {
        "norm bounds of scattering solutions over a scatterer family"
    }
    fn run(&self, config: &Value, _seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        run_uniform_bounds(&parse::<UniformBoundsConfig>(config)?)
    }
}

pub struct ExperimentRegistry {
    experiments: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        let mut r = ExperimentRegistry { experiments: BTreeMap::new() };
        r.register(Box::new(Mosco));
        r.register(Box::new(Sieve));
        r.register(Box::new(Sobolev));
        r.register(Box::new(ScatterStability));
        r.register(Box::new(UniformBounds));
        r
    }
}

impl ExperimentRegistry {
    pub fn register(&mut self, e: Box<dyn Experiment>) {
        self.experiments.insert(e.name(), e);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Experiment> {
        self.experiments.get(name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.experiments.keys().copied().collect()
    }

    pub fn run(&self, name: &str, config: &Value, seed: Option<u64>) -> Result<ExperimentReport, ExperimentError> {
        self.get(name)
            .ok_or_else(|| ExperimentError::InvalidConfig(format!("unknown experiment '{name}'")))?
            .run(config, seed)
    }
}
