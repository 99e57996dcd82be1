//! Deterministic text artifacts: CSV tables, snapshot files and the run
//! manifest. Every float is written with 17 significant digits so that
//! output files round-trip exactly.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::energy::BudgetSample;
use crate::error::{Error, Result};
use crate::fields::FieldPair;
use crate::potentials::PotentialLevel;
use crate::spacetime::{Grid3, VectorField};

pub const SNAPSHOT_HEADER: &str = "x,y,z,phi,Ax,Ay,Az";
pub const FIELD_HEADER: &str = "x,y,z,Fx,Fy,Fz,Gx,Gy,Gz";
pub const ENERGY_HEADER: &str = "t,total_W,surface_flux,work_on_source";
pub const WAVE_PROFILE_HEADER: &str = "x,W,Sx";

/// 17 significant digits, the shortest width that round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Renders a header line plus one comma-separated line per row.
pub fn csv_text<I, R>(header: &str, rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut out = String::with_capacity(64);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        for (n, v) in row.as_ref().iter().enumerate() {
            if n > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_csv<I, R>(path: &Path, header: &str, rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    write_text(path, &csv_text(header, rows))
}

/// Rows `x, y, z, v0, v1, ...` in storage order (z fastest).
fn nodal_rows<'a>(grid: &'a Grid3, columns: &'a [&'a [f64]]) -> impl Iterator<Item = Vec<f64>> + 'a {
    let [nx, ny, nz] = grid.counts;
    (0..nx).flat_map(move |i| {
        (0..ny).flat_map(move |j| {
            (0..nz).map(move |k| {
                let idx = grid.index(i, j, k);
                let mut row = grid.position(i, j, k).to_vec();
                row.extend(columns.iter().map(|c| c[idx]));
                row
            })
        })
    })
}

fn vector_columns(v: &VectorField) -> [&[f64]; 3] {
    [v.component(0), v.component(1), v.component(2)]
}

pub fn snapshot_text(level: &PotentialLevel) -> String {
    let [ax, ay, az] = vector_columns(&level.a);
    let cols = [level.phi.data(), ax, ay, az];
    csv_text(SNAPSHOT_HEADER, nodal_rows(level.grid(), &cols))
}

pub fn fields_text(fields: &FieldPair) -> String {
    let [fx, fy, fz] = vector_columns(&fields.f);
    let [gx, gy, gz] = vector_columns(&fields.g);
    let cols = [fx, fy, fz, gx, gy, gz];
    csv_text(FIELD_HEADER, nodal_rows(fields.grid(), &cols))
}

pub fn energy_text(samples: &[BudgetSample]) -> String {
    csv_text(
        ENERGY_HEADER,
        samples.iter().map(|s| [s.t, s.total_w, s.surface_flux, s.work_on_source]),
    )
}

pub fn write_snapshot(level: &PotentialLevel, path: &Path) -> Result<()> {
    write_text(path, &snapshot_text(level))
}

pub fn write_fields(fields: &FieldPair, path: &Path) -> Result<()> {
    write_text(path, &fields_text(fields))
}

pub fn write_energy(samples: &[BudgetSample], path: &Path) -> Result<()> {
    write_text(path, &energy_text(samples))
}

/// One manifest line: what the file holds, the simulation time it refers
/// to (if any) and its name relative to the output directory.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub kind: String,
    pub time: Option<f64>,
    pub file: String,
}

/// Plain-text listing of every artifact a run wrote. `complete` is false
/// when the run stopped on an error after writing some files.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifest {
    pub command: String,
    pub entries: Vec<ManifestEntry>,
    pub complete: bool,
    pub error: Option<String>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            entries: Vec::new(),
            complete: true,
            error: None,
        }
    }

    pub fn push(&mut self, kind: &str, time: Option<f64>, file: &str) {
        self.entries.push(ManifestEntry {
            kind: kind.to_string(),
            time,
            file: file.to_string(),
        });
    }

    pub fn mark_partial(&mut self, error: &str) {
        self.complete = false;
        self.error = Some(error.to_string());
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "command {}", self.command);
        let _ = writeln!(out, "status {}", if self.complete { "complete" } else { "partial" });
        if let Some(e) = &self.error {
            let _ = writeln!(out, "error {}", e.replace('\n', " | "));
        }
        for e in &self.entries {
            let t = e.time.map_or_else(|| "-".to_string(), fmt_f64);
            let _ = writeln!(out, "{} {} {}", e.kind, t, e.file);
        }
        out
    }
}

/// Output directory with a manifest that records each file as it is
/// written.
#[derive(Debug)]
pub struct OutputDir {
    root: PathBuf,
    pub manifest: Manifest,
}

impl OutputDir {
    pub fn create(root: &Path, command: &str) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(Self {
            root: root.to_path_buf(),
            manifest: Manifest::new(command),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, kind: &str, time: Option<f64>, name: &str, text: &str) -> Result<()> {
        write_text(&self.root.join(name), text)?;
        self.manifest.push(kind, time, name);
        Ok(())
    }

    pub fn finish(&self) -> Result<()> {
        write_text(&self.root.join("manifest.txt"), &self.manifest.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_snapshot_has_fixed_header_and_one_row_per_node() {
        let g = Grid3::centered(3, 1.0).unwrap();
        let text = snapshot_text(&PotentialLevel::zeros(&g));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], SNAPSHOT_HEADER);
        assert_eq!(lines.len(), 28);
        for l in &lines[1..] {
            let v: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            assert_eq!(v.len(), 7);
            assert!(v[3..].iter().all(|&x| x == 0.0));
        }
        // z varies fastest
        assert_eq!(lines[1].split(',').nth(2), Some(fmt_f64(-1.0).as_str()));
        assert_eq!(lines[2].split(',').nth(2), Some(fmt_f64(0.0).as_str()));
        assert_eq!(lines[2].split(',').next(), lines[1].split(',').next());
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1.0 / 3.0, 6.02214076e23, f64::MIN_POSITIVE, 1.0 - f64::EPSILON] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn manifest_flags_partial_runs() {
        let dir = tempfile::tempdir().unwrap();
        let mut out = OutputDir::create(dir.path(), "run").unwrap();
        out.write("energy", None, "energy.csv", "t\n").unwrap();
        out.manifest.mark_partial("diverged");
        out.finish().unwrap();
        let text = fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
        assert!(text.contains("status partial"));
        assert!(text.contains("energy - energy.csv"));
    }

    #[test]
    fn io_errors_name_the_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = write_text(&blocker.join("sub.csv"), "").unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
