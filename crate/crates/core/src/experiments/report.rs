use super::rate::{fit_rate, RateFit};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt::Write;

/// One row of an experiment: sequence index, geometry distances, solution
/// error, norm and estimated constant. Unused columns are NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub series: String,
    pub n: usize,
    #[serde(with = "nan_null")]
    pub h: f64,
    #[serde(with = "nan_null")]
    pub hausdorff: f64,
    #[serde(with = "nan_null")]
    pub symdiff: f64,
    #[serde(with = "nan_null")]
    pub error: f64,
    #[serde(with = "nan_null")]
    pub norm: f64,
    #[serde(with = "nan_null")]
    pub constant: f64,
}

/// Non-finite values travel as JSON `null` and come back as NaN.
mod nan_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl Step {
    pub fn new(series: &str, n: usize, h: f64) -> Self {
        Step {
            series: series.into(),
            n,
            h,
            hausdorff: f64::NAN,
            symdiff: f64::NAN,
            error: f64::NAN,
            norm: f64::NAN,
            constant: f64::NAN,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedVerdict {
    pub name: String,
    /// The property this verdict tests.
    pub criterion: String,
    pub passed: bool,
    #[serde(with = "nan_null")]
    pub value: f64,
}

impl NamedVerdict {
    pub fn new(name: &str, criterion: &str, passed: bool, value: f64) -> Self {
        NamedVerdict { name: name.into(), criterion: criterion.into(), passed, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Provenance {
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub mesh_h: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub steps: Vec<Step>,
    pub fitted_rate: Option<RateFit>,
    pub verdicts: Vec<NamedVerdict>,
    /// Thresholds the verdicts are computed with.
    pub params: BTreeMap<String, f64>,
    pub provenance: Provenance,
    pub notes: Vec<String>,
}

/// SHA-256 of the canonical JSON form of a configuration.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).unwrap_or_default();
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub const CSV_HEADER: &str = "series,n,h,hausdorff,symdiff,error,norm,constant";

impl ExperimentReport {
    pub fn new(experiment: &str) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            steps: vec![],
            fitted_rate: None,
            verdicts: vec![],
            params: BTreeMap::new(),
            provenance: Provenance::default(),
            notes: vec![],
        }
    }

    pub fn all_passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&NamedVerdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    pub fn series(&self, name: &str) -> Vec<&Step> {
        self.steps.iter().filter(|s| s.series == name).collect()
    }

    /// Verdicts and rate rebuilt from the steps table and `params` only.
    pub fn recompute(&self) -> (Option<RateFit>, Vec<NamedVerdict>) {
        let steps = &self.steps;
        let p = &self.params;
        match self.experiment.as_str() {
            "mosco" => super::mosco::verdicts(steps, p),
            "sieve" => (None, super::sieve::verdicts(steps, p)),
            "sobolev" => (None, super::sobolev::verdicts(steps, p)),
            "scatter-stability" => super::scatter::stability_verdicts(steps, p),
            "uniform-bounds" => super::scatter::bounds_verdicts(steps, p),
            _ => (None, vec![]),
        }
    }

    /// Flat table; first line documents the columns.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# {} report; columns: {}\n{}\n", self.experiment, CSV_HEADER, CSV_HEADER);
        for r in &self.steps {
            let _ = writeln!(
                s,
                "{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                r.series, r.n, r.h, r.hausdorff, r.symdiff, r.error, r.norm, r.constant
            );
        }
        s
    }

    /// Gnuplot script plotting `error` against `n` per series from `csv`.
    pub fn gnuplot_script(&self, csv: &str) -> String {
        let mut series: Vec<&str> = self.steps.iter().map(|s| s.series.as_str()).collect();
        series.dedup();
        let mut seen = Vec::new();
        series.retain(|s| {
            let new = !seen.contains(s);
            seen.push(*s);
            new
        });
        let mut s = String::new();
        let _ = writeln!(s, "set datafile separator ','");
        let _ = writeln!(s, "set datafile commentschars '#'");
        let _ = writeln!(s, "set logscale y");
        let _ = writeln!(s, "set xlabel 'n'");
        let _ = writeln!(s, "set ylabel 'error'");
        let _ = writeln!(s, "set title '{}'", self.experiment);
        if series.is_empty() {
            let _ = writeln!(s, "plot '{csv}' using 2:6 with linespoints title 'error'");
        } else {
            let parts: Vec<String> = series
                .iter()
                .map(|name| {
                    format!("'{csv}' using (strcol(1) eq '{name}' ? $2 : 1/0):6 with linespoints title '{name}'")
                })
                .collect();
            let _ = writeln!(s, "plot {}", parts.join(", \\\n     "));
        }
        s
    }
}

pub(crate) fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

/// Rate of `error` against `hausdorff` over the steps sharing the most
/// common mesh spacing.
pub(crate) fn rate_on_common_h(steps: &[&Step]) -> Option<RateFit> {
    let mut hs: Vec<f64> = steps.iter().map(|s| s.h).collect();
    hs.sort_by(f64::total_cmp);
    hs.dedup();
    let h = hs.iter().copied().max_by_key(|h| steps.iter().filter(|s| s.h == *h).count())?;
    let pairs: Vec<(f64, f64)> =
        steps.iter().filter(|s| s.h == h).map(|s| (s.hausdorff, s.error)).collect();
    fit_rate(&pairs).ok()
}
