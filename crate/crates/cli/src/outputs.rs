//! Output documents and the writer that re-validates them.
//!
//! Every JSON document carries a `schema` tag. After writing, the file is
//! read back, deserialized into its type, and compared with what was meant
//! to be written. Documents hold no timestamps or absolute paths, so
//! identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use graphon_gl::cutnorm::CutNormEstimate;
use graphon_gl::io;
use graphon_gl::limits::SweepResult;
use graphon_gl::{AnalyticGraphon, EnergyReport, MinimizeProblem, MinimizerResult, Sampling};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::config::KernelFormat;
use crate::CliError;

pub const KERNEL_SCHEMA: &str = "graphon-gl/kernel/v1";
pub const ENERGY_SCHEMA: &str = "graphon-gl/energy/v1";
pub const MINIMIZER_SCHEMA: &str = "graphon-gl/minimizer/v1";
pub const SWEEP_SCHEMA: &str = "graphon-gl/sweep/v1";
pub const CUTNORM_SCHEMA: &str = "graphon-gl/cutnorm/v1";

pub trait Document: Serialize + DeserializeOwned + PartialEq {
    const SCHEMA: &'static str;
    fn schema(&self) -> &str;
}

macro_rules! document {
    ($t:ty, $tag:expr) => {
        impl Document for $t {
            const SCHEMA: &'static str = $tag;
            fn schema(&self) -> &str {
                &self.schema
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSource {
    Analytic { descriptor: AnalyticGraphon, sampling: Sampling },
    File { format: KernelFormat },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelDoc {
    pub schema: String,
    pub n: usize,
    pub source: KernelSource,
    /// SHA-256 of the weights, as reported by `StepGraphon::content_hash`.
    pub hash: String,
    pub simple: bool,
}
document!(KernelDoc, KERNEL_SCHEMA);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyDoc {
    pub schema: String,
    pub functional: String,
    /// Hash of the step graphon the functional saw; absent for analytic
    /// kernels evaluated at graphon level.
    pub kernel_hash: Option<String>,
    pub state_cells: usize,
    pub report: EnergyReport,
}
document!(EnergyDoc, ENERGY_SCHEMA);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinimizerDoc {
    pub schema: String,
    pub method: String,
    pub problem: MinimizeProblem,
    pub result: MinimizerResult,
}
document!(MinimizerDoc, MINIMIZER_SCHEMA);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDoc {
    pub schema: String,
    pub seed: u64,
    pub result: SweepResult,
}
document!(SweepDoc, SWEEP_SCHEMA);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutnormDoc {
    pub schema: String,
    pub n: usize,
    pub kernel_hash: String,
    pub seed: Option<u64>,
    pub estimate: CutNormEstimate,
    /// Value recomputed from the certificate.
    pub certified_value: f64,
    /// 0-based members of `S` for subset-form estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<usize>>,
}
document!(CutnormDoc, CUTNORM_SCHEMA);

/// Output directory plus optional file-name prefix.
#[derive(Debug, Clone)]
pub struct Sink {
    dir: PathBuf,
    prefix: String,
    written: Vec<PathBuf>,
}

impl Sink {
    pub fn new(dir: PathBuf, prefix: Option<&str>) -> Result<Self, CliError> {
        fs::create_dir_all(&dir).map_err(|e| CliError::Io {
            path: dir.clone(),
            msg: e.to_string(),
        })?;
        let prefix = match prefix {
            Some(p) if p.contains(['/', '\\']) => {
                return Err(CliError::Validation(format!("output prefix '{p}' must not contain path separators")))
            }
            Some(p) if !p.is_empty() => format!("{p}_"),
            _ => String::new(),
        };
        Ok(Self {
            dir,
            prefix,
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(format!("{}{name}", self.prefix))
    }

    pub fn written(self) -> Vec<PathBuf> {
        self.written
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let p = self.path(name);
        io::write_atomic(&p, text.as_bytes())?;
        self.written.push(p.clone());
        Ok(p)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf, CliError> {
        self.text(name, &io::csv_string(header, rows)?)
    }

    /// Writes `doc` and checks that the file reads back as the same document.
    pub fn json<D: Document>(&mut self, name: &str, doc: &D) -> Result<PathBuf, CliError> {
        let p = self.text(name, &io::to_json(doc)?)?;
        validate_file::<D>(&p, Some(doc))?;
        Ok(p)
    }
}

/// Reads `path` as a `D` document and checks its schema tag and, when given,
/// equality with `expected`.
pub fn validate_file<D: Document>(path: &Path, expected: Option<&D>) -> Result<D, CliError> {
    let back: D = io::read_json(path)?;
    if back.schema() != D::SCHEMA {
        return Err(CliError::Validation(format!(
            "{}: schema '{}' (expected '{}')",
            path.display(),
            back.schema(),
            D::SCHEMA
        )));
    }
    if let Some(e) = expected {
        if &back != e {
            return Err(CliError::Validation(format!("{}: content changed on round trip", path.display())));
        }
    }
    Ok(back)
}

/// Two whitespace-separated columns with a `#` header line.
pub fn dat_string(x_label: &str, y_label: &str, rows: &[(f64, f64)]) -> String {
    let mut s = format!("# {x_label} {y_label}\n");
    for (x, y) in rows {
        s.push_str(&format!("{x} {y}\n"));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphon_gl::graphon::sample_step_graphon;

    #[test]
    fn json_round_trip_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        let mut sink = Sink::new(dir.path().to_path_buf(), Some("run")).unwrap();
        let w = sample_step_graphon(&AnalyticGraphon::Constant { p: 0.5 }, 3).unwrap();
        let doc = KernelDoc {
            schema: KERNEL_SCHEMA.into(),
            n: 3,
            source: KernelSource::Analytic {
                descriptor: AnalyticGraphon::Constant { p: 0.5 },
                sampling: Sampling::RightEndpoint,
            },
            hash: w.content_hash(),
            simple: false,
        };
        let p = sink.json("kernel.json", &doc).unwrap();
        assert!(p.ends_with("run_kernel.json"));

        let mut bad = doc.clone();
        bad.schema = "other".into();
        std::fs::write(&p, io::to_json(&bad).unwrap()).unwrap();
        assert!(validate_file::<KernelDoc>(&p, None).is_err());
    }

    #[test]
    fn prefix_must_be_a_name() {
        let dir = tempfile::tempdir().unwrap();
        assert!(Sink::new(dir.path().to_path_buf(), Some("a/b")).is_err());
    }

    #[test]
    fn dat_has_header() {
        assert_eq!(dat_string("n", "gap", &[(8.0, 0.5)]), "# n gap\n8 0.5\n");
    }
}
