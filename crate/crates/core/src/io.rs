//! File formats: dense adjacency CSV, `i j w` edge lists, state columns and JSON.
//!
//! Every writer goes through [`write_atomic`] (temp file in the target
//! directory, then rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{validation, Error, Result};
use crate::graphon::StepGraphon;
use crate::measures::StepFunction;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        msg: msg.into(),
    }
}

/// Writes `bytes` to a sibling temp file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| validation(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path, e));
    }
    Ok(())
}

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = read_to_string(path)?;
    serde_json::from_str(&s).map_err(|e| parse_err(path, e.to_string()))
}

/// CSV text with a header row; fields are written with `Display`, which for
/// `f64` round-trips exactly.
pub fn csv_string(header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| validation(format!("csv: {e}"));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| validation(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    write_atomic(path, csv_string(header, rows)?.as_bytes())
}

/// Reads rows of reals. A first row that does not parse as numbers is taken
/// as a header and skipped.
fn read_real_rows(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(path, e.to_string()))?;
        let parsed: std::result::Result<Vec<f64>, _> = rec.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if k == 0 => continue,
            Err(e) => return Err(parse_err(path, format!("line {}: {e}", k + 1))),
        }
    }
    Ok(rows)
}

/// Dense `n × n` adjacency CSV.
pub fn read_adjacency_csv(path: &Path) -> Result<StepGraphon> {
    let rows = read_real_rows(path)?;
    StepGraphon::from_adjacency(&rows).map_err(|e| parse_err(path, e.to_string()))
}

fn column_header(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("j{j}")).collect()
}

/// Dense CSV with header `j1,…,jn`.
pub fn adjacency_csv_string(w: &StepGraphon) -> Result<String> {
    let header = column_header(w.n());
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows: Vec<Vec<String>> = w.rows().iter().map(|r| r.iter().map(f64::to_string).collect()).collect();
    csv_string(&h, &rows)
}

pub fn write_adjacency_csv(path: &Path, w: &StepGraphon) -> Result<()> {
    write_atomic(path, adjacency_csv_string(w)?.as_bytes())
}

/// Edge list with lines `i j w` (1-based, whitespace separated), symmetrized.
/// Blank lines and `#` comments are skipped; a pair listed twice (in either
/// order) is an error. `n` defaults to the largest index.
pub fn parse_edge_list(text: &str, n: Option<usize>) -> std::result::Result<StepGraphon, String> {
    let mut edges = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(format!("line {}: expected 'i j w', got '{line}'", k + 1));
        }
        let i: usize = f[0].parse().map_err(|e| format!("line {}: {e}", k + 1))?;
        let j: usize = f[1].parse().map_err(|e| format!("line {}: {e}", k + 1))?;
        let w: f64 = f[2].parse().map_err(|e| format!("line {}: {e}", k + 1))?;
        if i == 0 || j == 0 {
            return Err(format!("line {}: indices are 1-based", k + 1));
        }
        if !w.is_finite() || w < 0.0 {
            return Err(format!("line {}: weight {w} must be finite and nonnegative", k + 1));
        }
        edges.push((k + 1, i.min(j), i.max(j), w));
    }
    let max = edges.iter().map(|e| e.2).max().unwrap_or(0);
    let n = n.unwrap_or(max);
    if n == 0 {
        return Err("edge list is empty and no node count was given".into());
    }
    if max > n {
        return Err(format!("node index {max} exceeds n = {n}"));
    }
    let mut a = vec![f64::NAN; n * n];
    for &(line, i, j, w) in &edges {
        let (i, j) = (i - 1, j - 1);
        if !a[i * n + j].is_nan() {
            return Err(format!("line {line}: duplicate edge ({}, {})", i + 1, j + 1));
        }
        a[i * n + j] = w;
        a[j * n + i] = w;
    }
    for x in &mut a {
        if x.is_nan() {
            *x = 0.0;
        }
    }
    StepGraphon::from_flat(n, a).map_err(|e| e.to_string())
}

pub fn read_edge_list(path: &Path, n: Option<usize>) -> Result<StepGraphon> {
    parse_edge_list(&read_to_string(path)?, n).map_err(|m| parse_err(path, m))
}

/// Single-column CSV with header `u`.
pub fn step_function_csv_string(u: &StepFunction) -> Result<String> {
    let rows: Vec<Vec<String>> = u.values().iter().map(|v| vec![v.to_string()]).collect();
    csv_string(&["u"], &rows)
}

pub fn write_step_function_csv(path: &Path, u: &StepFunction) -> Result<()> {
    write_atomic(path, step_function_csv_string(u)?.as_bytes())
}

pub fn read_step_function_csv(path: &Path) -> Result<StepFunction> {
    let rows = read_real_rows(path)?;
    let mut values = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if r.len() != 1 {
            return Err(parse_err(path, format!("row {}: expected one value, got {}", k + 1, r.len())));
        }
        values.push(r[0]);
    }
    StepFunction::new(values).map_err(|e| parse_err(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{sample_step_graphon, AnalyticGraphon};
    use crate::measures::YoungMeasure;

    fn tmpdir(tag: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("graphon-gl-io-{tag}-{}", std::process::id()));
        fs::create_dir_all(&d).unwrap();
        d
    }

    #[test]
    fn adjacency_round_trip_is_bitwise() {
        let d = tmpdir("adj");
        let w = sample_step_graphon(&AnalyticGraphon::PowerKernel { s: 0.3, cap: 50.0 }, 6).unwrap();
        let p = d.join("w.csv");
        write_adjacency_csv(&p, &w).unwrap();
        let back = read_adjacency_csv(&p).unwrap();
        assert_eq!(back.weights(), w.weights());
        assert_eq!(back.content_hash(), w.content_hash());
    }

    #[test]
    fn adjacency_without_header() {
        let d = tmpdir("nohdr");
        let p = d.join("w.csv");
        fs::write(&p, "0,1\n1,0\n").unwrap();
        assert_eq!(read_adjacency_csv(&p).unwrap().weights(), &[0.0, 1.0, 1.0, 0.0]);
        fs::write(&p, "0,1\n2,0\n").unwrap();
        assert!(matches!(read_adjacency_csv(&p), Err(Error::Parse { .. })));
    }

    #[test]
    fn edge_list_symmetrizes() {
        let w = parse_edge_list("# 4-cycle\n1 2 1\n2 3 1\n3 4 1\n4 1 1\n", None).unwrap();
        assert_eq!(w.weights(), crate::graphon::four_cycle().weights());
        let w = parse_edge_list("1 2 0.5", Some(3)).unwrap();
        assert_eq!(w.n(), 3);
        assert_eq!(w.get(1, 0), 0.5);
    }

    #[test]
    fn edge_list_errors() {
        assert!(parse_edge_list("1 2 1\n2 1 1\n", None).unwrap_err().contains("duplicate"));
        assert!(parse_edge_list("0 1 1\n", None).is_err());
        assert!(parse_edge_list("1 2\n", None).is_err());
        assert!(parse_edge_list("1 5 1\n", Some(3)).is_err());
        assert!(parse_edge_list("1 2 -1\n", None).is_err());
        assert!(parse_edge_list("", None).is_err());
    }

    #[test]
    fn step_function_round_trip() {
        let d = tmpdir("u");
        let u = StepFunction::new(vec![0.1, -1.0 / 3.0, 1e-300, 2.5]).unwrap();
        let p = d.join("u.csv");
        write_step_function_csv(&p, &u).unwrap();
        assert!(fs::read_to_string(&p).unwrap().starts_with("u\n"));
        assert_eq!(read_step_function_csv(&p).unwrap(), u);
    }

    #[test]
    fn young_measure_json_round_trip() {
        let d = tmpdir("ym");
        let nu = YoungMeasure::two_atom(3, 0.7, -0.2, 1.0 / 3.0).unwrap();
        let p = d.join("nu.json");
        write_json(&p, &nu).unwrap();
        let back: YoungMeasure = read_json(&p).unwrap();
        assert_eq!(back, nu);
    }

    #[test]
    fn missing_file_names_path() {
        let p = Path::new("/nonexistent/dir/w.csv");
        match read_adjacency_csv(p) {
            Err(Error::Io { path, .. }) => assert_eq!(path, p),
            other => panic!("{other:?}"),
        }
        assert!(matches!(write_atomic(p, b"x"), Err(Error::Io { .. })));
    }
}
