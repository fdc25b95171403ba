use moscolab::experiments::ExperimentReport;
use serde::Serialize;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

/// Writes `bytes` to `dir/name` through a temporary file and a rename.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, dir.join(name))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> io::Result<()> {
    let mut s = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    s.push('\n');
    write_atomic(dir, name, s.as_bytes())
}

/// `steps.csv` and the gnuplot script `plot.gp` reading it.
pub fn emit_plot_data(report: &ExperimentReport, dir: &Path) -> io::Result<()> {
    let csv = report.to_csv();
    write_atomic(dir, "steps.csv", csv.as_bytes())?;
    write_atomic(dir, "plot.gp", report.gnuplot_script("steps.csv").as_bytes())
}
