//! CSV persistence of flight logs: `imu.csv`, `fix.csv` and `truth.csv` in one
//! directory, each with a header row. Floats are written in Rust's shortest
//! round-trip form, so a save/load cycle is bit-exact.

use std::fs::{self, File};
use std::path::{Path, PathBuf};

use nalgebra::{Vector3, Vector4};

use super::flight::{FlightLog, TruthSample};
use super::SimError;
use crate::nav::{FixSample, ImuSample};

pub const IMU_FILE: &str = "imu.csv";
pub const FIX_FILE: &str = "fix.csv";
pub const TRUTH_FILE: &str = "truth.csv";

pub const IMU_HEADER: [&str; 7] = ["t", "wx", "wy", "wz", "ax", "ay", "az"];
pub const FIX_HEADER: [&str; 8] = ["t", "pn", "pe", "pd", "vn", "ve", "vd", "held"];
pub const TRUTH_HEADER: [&str; 11] = [
    "t", "q0", "q1", "q2", "q3", "vn", "ve", "vd", "pn", "pe", "pd",
];

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<File>, SimError> {
    let file = File::create(path).map_err(|e| SimError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

pub(crate) fn write_row(w: &mut csv::Writer<File>, path: &Path, row: &[String]) -> Result<(), SimError> {
    w.write_record(row).map_err(|e| SimError::csv(path, 0, e.to_string()))
}

fn flush(mut w: csv::Writer<File>, path: &Path) -> Result<(), SimError> {
    w.flush().map_err(|e| SimError::io(path, e))
}

pub fn save_log(log: &FlightLog, dir: impl AsRef<Path>) -> Result<(), SimError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| SimError::io(dir, e))?;

    let path = dir.join(IMU_FILE);
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, &IMU_HEADER.map(String::from))?;
    for s in &log.imu {
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.omega_m.iter().copied())
            .chain(s.a_m.iter().copied())
            .map(fmt_f64)
            .collect();
        write_row(&mut w, &path, &row)?;
    }
    flush(w, &path)?;

    let path = dir.join(FIX_FILE);
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, &FIX_HEADER.map(String::from))?;
    for f in &log.fixes {
        let mut row: Vec<String> = std::iter::once(f.t)
            .chain(f.pos.iter().copied())
            .chain(f.vel.iter().copied())
            .map(fmt_f64)
            .collect();
        row.push(u8::from(f.held).to_string());
        write_row(&mut w, &path, &row)?;
    }
    flush(w, &path)?;

    let path = dir.join(TRUTH_FILE);
    let mut w = csv_writer(&path)?;
    write_row(&mut w, &path, &TRUTH_HEADER.map(String::from))?;
    for s in &log.truth {
        let row: Vec<String> = std::iter::once(s.t)
            .chain(s.q.iter().copied())
            .chain(s.v.iter().copied())
            .chain(s.p.iter().copied())
            .map(fmt_f64)
            .collect();
        write_row(&mut w, &path, &row)?;
    }
    flush(w, &path)
}

/// Reads every data row of `path` after checking the header, parsing each
/// with `parse`. Timestamps in column 0 must strictly increase.
pub(crate) fn read_rows<T>(
    path: &Path,
    header: &[&str],
    mut parse: impl FnMut(&csv::StringRecord, &dyn Fn(usize) -> Result<f64, String>) -> Result<T, String>,
) -> Result<Vec<T>, SimError> {
    let file = File::open(path).map_err(|e| SimError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
    let found = reader
        .headers()
        .map_err(|e| SimError::csv(path, 1, e.to_string()))?
        .clone();
    if found.iter().map(str::trim).ne(header.iter().copied()) {
        return Err(SimError::csv(
            path,
            1,
            format!("expected header {:?}, found {:?}", header, found.iter().collect::<Vec<_>>()),
        ));
    }
    let mut out = Vec::new();
    let mut last_t = f64::NEG_INFINITY;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            SimError::csv(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(SimError::csv(
                path,
                line,
                format!("expected {} fields, found {}", header.len(), record.len()),
            ));
        }
        let field = |i: usize| -> Result<f64, String> {
            let raw = record[i].trim();
            raw.parse::<f64>()
                .map_err(|_| format!("column {} is not a number: {raw:?}", header[i]))
        };
        let t = field(0).map_err(|m| SimError::csv(path, line, m))?;
        if !(t > last_t) {
            return Err(SimError::csv(path, line, format!("timestamp {t} does not increase")));
        }
        last_t = t;
        out.push(parse(&record, &field).map_err(|m| SimError::csv(path, line, m))?);
    }
    Ok(out)
}

fn vec3(field: &dyn Fn(usize) -> Result<f64, String>, from: usize) -> Result<Vector3<f64>, String> {
    Ok(Vector3::new(field(from)?, field(from + 1)?, field(from + 2)?))
}

pub fn load_imu(path: &Path) -> Result<Vec<ImuSample>, SimError> {
    read_rows(path, &IMU_HEADER, |_, f| {
        Ok(ImuSample::new(f(0)?, vec3(f, 1)?, vec3(f, 4)?))
    })
}

pub fn load_fixes(path: &Path) -> Result<Vec<FixSample>, SimError> {
    read_rows(path, &FIX_HEADER, |rec, f| {
        let held = match rec[7].trim() {
            "0" | "false" => false,
            "1" | "true" => true,
            other => return Err(format!("column held is not a boolean: {other:?}")),
        };
        Ok(FixSample {
            t: f(0)?,
            pos: vec3(f, 1)?,
            vel: vec3(f, 4)?,
            held,
        })
    })
}

pub fn load_truth(path: &Path) -> Result<Vec<TruthSample>, SimError> {
    read_rows(path, &TRUTH_HEADER, |_, f| {
        Ok(TruthSample {
            t: f(0)?,
            q: Vector4::new(f(1)?, f(2)?, f(3)?, f(4)?),
            v: vec3(f, 5)?,
            p: vec3(f, 8)?,
        })
    })
}

pub fn load_log(dir: impl AsRef<Path>) -> Result<FlightLog, SimError> {
    let dir = dir.as_ref();
    let file = |name: &str| -> PathBuf { dir.join(name) };
    Ok(FlightLog {
        imu: load_imu(&file(IMU_FILE))?,
        fixes: load_fixes(&file(FIX_FILE))?,
        truth: load_truth(&file(TRUTH_FILE))?,
    })
}
