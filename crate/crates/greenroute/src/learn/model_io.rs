//! Text persistence for fitted models.
//!
//! The format is line-oriented with sections `MEAN`, `EIGENVALUES`,
//! `COMPONENTS` (row-major), `K`, and `WEIGHTS`, plus `TARGET`/`RIDGED`/
//! `DEGENERATE` headers. Floats are written in Rust's shortest round-trip
//! notation, so save/load reproduces every value bit for bit.

use std::fs;
use std::path::Path;

use crate::linalg::Matrix;

use super::{LearnError, PcaModel, RegressionModel, TargetParam};

/// A PCA reduction paired with the regression that consumes it. Conditional
/// targets take the known other parameter as one extra input after the
/// projection.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorModel {
    pub pca: PcaModel,
    pub regression: RegressionModel,
}

impl PredictorModel {
    /// Predicts the target parameter from a raw feature vector. `known` is
    /// the other parameter's value for conditional targets; plain targets
    /// ignore it.
    pub fn predict(&self, features: &[f64], known: Option<f64>) -> Result<f64, LearnError> {
        let mut z = self.pca.project_vector(features)?;
        match self.regression.target {
            TargetParam::UminGivenUmax | TargetParam::UmaxGivenUmin => {
                let extra = known.ok_or(LearnError::DimensionMismatch {
                    expected: z.len() + 1,
                    got: z.len(),
                })?;
                z.push(extra);
            }
            _ => {}
        }
        self.regression.predict(&z)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), LearnError> {
        fs::write(path, self.to_model_string())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LearnError> {
        let content = fs::read_to_string(path)?;
        Self::parse(&content)
    }

    pub fn to_model_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("TARGET {}\n", self.regression.target.as_str()));
        out.push_str(&format!("K {}\n", self.pca.k));
        out.push_str(&format!("RIDGED {}\n", u8::from(self.regression.ridged)));
        out.push_str(&format!("DEGENERATE {}\n", u8::from(self.pca.degenerate)));
        out.push_str("MEAN\n");
        out.push_str(&join_floats(&self.pca.mean));
        out.push('\n');
        out.push_str("EIGENVALUES\n");
        out.push_str(&join_floats(&self.pca.eigenvalues));
        out.push('\n');
        out.push_str("COMPONENTS\n");
        for r in 0..self.pca.components.rows() {
            out.push_str(&join_floats(self.pca.components.row(r)));
            out.push('\n');
        }
        out.push_str("WEIGHTS\n");
        out.push_str(&join_floats(&self.regression.weights));
        out.push('\n');
        out
    }

    pub fn parse(content: &str) -> Result<Self, LearnError> {
        let mut target = None;
        let mut k = None;
        let mut ridged = false;
        let mut degenerate = false;
        let mut mean: Option<Vec<f64>> = None;
        let mut eigenvalues: Option<Vec<f64>> = None;
        let mut component_rows: Vec<Vec<f64>> = Vec::new();
        let mut weights: Option<Vec<f64>> = None;
        let mut section = "";

        for (lineno, raw) in content.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| LearnError::ParseModel {
                line: lineno + 1,
                msg,
            };
            let mut tok = line.split_whitespace();
            let head = tok.next().unwrap();
            match head {
                "TARGET" => {
                    let name = tok.next().ok_or_else(|| err("missing target".into()))?;
                    target = Some(
                        name.parse::<TargetParam>()
                            .map_err(|_| err(format!("unknown target `{name}`")))?,
                    );
                    section = "";
                }
                "K" => {
                    let v = tok.next().ok_or_else(|| err("missing k".into()))?;
                    k = Some(v.parse().map_err(|_| err(format!("bad k `{v}`")))?);
                    section = "";
                }
                "RIDGED" => {
                    ridged = tok.next() == Some("1");
                    section = "";
                }
                "DEGENERATE" => {
                    degenerate = tok.next() == Some("1");
                    section = "";
                }
                "MEAN" | "EIGENVALUES" | "COMPONENTS" | "WEIGHTS" => {
                    section = match head {
                        "MEAN" => "mean",
                        "EIGENVALUES" => "eig",
                        "COMPONENTS" => "comp",
                        _ => "weights",
                    };
                }
                _ => {
                    let values = parse_floats(line).map_err(|bad| err(format!("bad float `{bad}`")))?;
                    match section {
                        "mean" => mean = Some(values),
                        "eig" => eigenvalues = Some(values),
                        "comp" => component_rows.push(values),
                        "weights" => weights = Some(values),
                        _ => return Err(err(format!("unexpected data line `{line}`"))),
                    }
                }
            }
        }

        let missing = |what: &str| LearnError::ParseModel {
            line: 0,
            msg: format!("missing section {what}"),
        };
        let mean = mean.ok_or_else(|| missing("MEAN"))?;
        let eigenvalues = eigenvalues.ok_or_else(|| missing("EIGENVALUES"))?;
        let weights = weights.ok_or_else(|| missing("WEIGHTS"))?;
        let target = target.ok_or_else(|| missing("TARGET"))?;
        let k = k.ok_or_else(|| missing("K"))?;
        let n = mean.len();
        if component_rows.len() != n || component_rows.iter().any(|r| r.len() != n) {
            return Err(LearnError::ParseModel {
                line: 0,
                msg: format!("COMPONENTS must be {n}x{n}"),
            });
        }
        Ok(PredictorModel {
            pca: PcaModel {
                mean,
                eigenvalues,
                components: Matrix::from_rows(&component_rows),
                k,
                degenerate,
            },
            regression: RegressionModel {
                weights,
                target,
                ridged,
            },
        })
    }
}

fn join_floats(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_floats(line: &str) -> Result<Vec<f64>, String> {
    line.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| t.to_string()))
        .collect()
}
