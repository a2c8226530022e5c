//! End-to-end pipeline stages behind the CLI: synthesize snapshots, label
//! them with brute-force-optimal parameters, train the predictors, and
//! evaluate predictions against the oracle with refinement.
//!
//! Every stage reads and writes plain CSV (header row, floats with four
//! decimals) under the configured output directory, in deterministic order:
//! the same configuration and input bytes produce byte-identical reports.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::eeroute::{route_snapshot, RouteError, UtilityInterval};
use crate::learn::{
    cross_validate_k, CvConfig, CvReport, LearnError, PcaModel, PredictorModel, RegressionModel,
    TargetParam,
};
use crate::linalg::Matrix;
use crate::netmodel::{Topology, TopologyError};
use crate::par;
use crate::traffic::{feature_len, synth_snapshots, TrafficError, TrafficSnapshot};
use crate::tune::{brute_force_optimal, refine, EeEvaluator, TuneError};
use crate::{learn, traffic};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("missing input: {0}")]
    MissingInput(String),
    #[error("{file} line {line}: {msg}")]
    Csv { file: String, line: usize, msg: String },
    #[error(
        "model expects {model} features but topology yields {topology}; \
         wrong topology for these models?"
    )]
    FeatureLengthMismatch { model: usize, topology: usize },
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Traffic(#[from] TrafficError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Learn(#[from] LearnError),
    #[error(transparent)]
    Tune(#[from] TuneError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Component-count choice for PCA: cross-validated or pinned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Auto,
    Fixed(usize),
}

/// Everything a pipeline run needs. A text config file (`key = value`, `#`
/// comments) seeds the fields; CLI flags override individual entries.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub topology: PathBuf,
    pub snapshots: PathBuf,
    pub out: PathBuf,
    pub volumes: Vec<f64>,
    pub pca_k: KChoice,
    pub k_grid: Option<Vec<usize>>,
    pub folds: usize,
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub paths_k: usize,
    pub step: f64,
    pub seed: u64,
    pub synth_latent_dim: usize,
    pub synth_count: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            topology: PathBuf::new(),
            snapshots: PathBuf::new(),
            out: PathBuf::from("out"),
            volumes: (1..=9).map(|v| v as f64 * 10.0).collect(),
            pca_k: KChoice::Auto,
            k_grid: None,
            folds: 10,
            alpha: 1.0,
            beta: 0.0,
            epsilon: 3.0,
            paths_k: 4,
            step: 1.0,
            seed: 0,
            synth_latent_dim: 3,
            synth_count: 40,
        }
    }
}

impl PipelineConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let content = fs::read_to_string(path)?;
        let mut cfg = PipelineConfig::default();
        for (lineno, raw) in content.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => raw[..pos].trim(),
                None => raw.trim(),
            };
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(PipelineError::Config {
                line: lineno + 1,
                msg: format!("expected `key = value`, got `{line}`"),
            })?;
            cfg.apply(key.trim(), value.trim())
                .map_err(|msg| PipelineError::Config {
                    line: lineno + 1,
                    msg,
                })?;
        }
        Ok(cfg)
    }

    /// Applies one `key = value` setting; used by both the config file
    /// parser and the flag overrides.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |what: &str| format!("bad {what} `{value}`");
        match key {
            "topology" => self.topology = PathBuf::from(value),
            "snapshots" => self.snapshots = PathBuf::from(value),
            "out" => self.out = PathBuf::from(value),
            "volumes" => {
                self.volumes = value
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|_| bad("volumes"))?;
                if self.volumes.is_empty() {
                    return Err("volumes must be non-empty".into());
                }
            }
            "k" => {
                self.pca_k = if value == "auto" {
                    KChoice::Auto
                } else {
                    KChoice::Fixed(value.parse().map_err(|_| bad("k"))?)
                };
            }
            "k_grid" => {
                self.k_grid = Some(
                    value
                        .split(',')
                        .map(|v| v.trim().parse::<usize>())
                        .collect::<Result<_, _>>()
                        .map_err(|_| bad("k_grid"))?,
                );
            }
            "folds" => self.folds = value.parse().map_err(|_| bad("folds"))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad("alpha"))?,
            "beta" => self.beta = value.parse().map_err(|_| bad("beta"))?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("epsilon"))?,
            "paths_k" => self.paths_k = value.parse().map_err(|_| bad("paths_k"))?,
            "step" => self.step = value.parse().map_err(|_| bad("step"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("seed"))?,
            "latent_dim" => {
                self.synth_latent_dim = value.parse().map_err(|_| bad("latent_dim"))?
            }
            "count" => self.synth_count = value.parse().map_err(|_| bad("count"))?,
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }
}

fn fmt4(v: f64) -> String {
    format!("{v:.4}")
}

/// Snapshot files of a directory in name order.
fn snapshot_paths(dir: &Path) -> Result<Vec<PathBuf>, PipelineError> {
    if !dir.is_dir() {
        return Err(PipelineError::MissingInput(format!(
            "snapshot directory {}",
            dir.display()
        )));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_file())
        .collect();
    paths.sort();
    Ok(paths)
}

fn load_snapshots(dir: &Path, t: &Topology) -> Result<Vec<TrafficSnapshot>, PipelineError> {
    let paths = snapshot_paths(dir)?;
    if paths.is_empty() {
        return Err(PipelineError::MissingInput(format!(
            "no snapshot files in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| TrafficSnapshot::load(p, t).map_err(PipelineError::from))
        .collect()
}

/// Generates synthetic snapshots into the snapshot directory, one file per
/// snapshot, deterministic for the configured seed.
pub fn cmd_synth(cfg: &PipelineConfig) -> Result<Vec<PathBuf>, PipelineError> {
    let t = Topology::load(&cfg.topology)?;
    let snaps = synth_snapshots(&t, cfg.synth_latent_dim, cfg.synth_count, cfg.seed);
    fs::create_dir_all(&cfg.snapshots)?;
    let mut written = Vec::with_capacity(snaps.len());
    for s in &snaps {
        let path = cfg.snapshots.join(format!("{}.snap", s.timestamp));
        fs::write(&path, s.to_file_string(&t))?;
        written.push(path);
    }
    Ok(written)
}

/// One labeled training sample as it appears on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelRow {
    pub timestamp: String,
    pub umin: f64,
    pub umax: f64,
    pub ee: f64,
}

/// Labels every snapshot at every volume with its brute-force-optimal
/// parameters; writes `features.csv` and `labels.csv` side by side.
pub fn cmd_label(cfg: &PipelineConfig) -> Result<Vec<LabelRow>, PipelineError> {
    let t = Topology::load(&cfg.topology)?;
    let snaps = load_snapshots(&cfg.snapshots, &t)?;
    let mut scaled = Vec::with_capacity(snaps.len() * cfg.volumes.len());
    for &volume in &cfg.volumes {
        for s in &snaps {
            scaled.push(s.scale(volume)?);
        }
    }
    let labeled = crate::tune::label_snapshots(&t, &scaled, cfg.step, cfg.paths_k)?;

    fs::create_dir_all(&cfg.out)?;
    let n = feature_len(t.node_count());
    let mut features = String::from("timestamp");
    for i in 0..n {
        features.push_str(&format!(",f{i}"));
    }
    features.push('\n');
    let mut labels = String::from("timestamp,umin_opt,umax_opt,ee_opt\n");
    let mut rows = Vec::with_capacity(labeled.len());
    for l in &labeled {
        features.push_str(&l.timestamp);
        for v in l.features.as_slice() {
            features.push(',');
            features.push_str(&fmt4(*v));
        }
        features.push('\n');
        labels.push_str(&format!(
            "{},{},{},{}\n",
            l.timestamp,
            fmt4(l.umin),
            fmt4(l.umax),
            fmt4(l.ee)
        ));
        rows.push(LabelRow {
            timestamp: l.timestamp.clone(),
            umin: l.umin,
            umax: l.umax,
            ee: l.ee,
        });
    }
    fs::write(cfg.out.join("features.csv"), features)?;
    fs::write(cfg.out.join("labels.csv"), labels)?;
    Ok(rows)
}

fn read_csv(path: &Path) -> Result<Vec<Vec<String>>, PipelineError> {
    let name = path.display().to_string();
    if !path.is_file() {
        return Err(PipelineError::MissingInput(name));
    }
    let content = fs::read_to_string(path)?;
    Ok(content
        .lines()
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect())
}

fn parse_cell<T: std::str::FromStr>(
    file: &str,
    line: usize,
    cell: &str,
) -> Result<T, PipelineError> {
    cell.parse().map_err(|_| PipelineError::Csv {
        file: file.to_string(),
        line,
        msg: format!("bad value `{cell}`"),
    })
}

/// The labeled training set as read back from `features.csv`/`labels.csv`.
pub struct TrainingSet {
    pub features: traffic::FeatureMatrix,
    pub umin: Vec<f64>,
    pub umax: Vec<f64>,
}

pub fn read_training_set(out: &Path) -> Result<TrainingSet, PipelineError> {
    let fpath = out.join("features.csv");
    let lpath = out.join("labels.csv");
    let frows = read_csv(&fpath)?;
    let lrows = read_csv(&lpath)?;
    let fname = fpath.display().to_string();
    let lname = lpath.display().to_string();
    if frows.len() < 2 || lrows.len() != frows.len() {
        return Err(PipelineError::Csv {
            file: lname,
            line: 0,
            msg: "features.csv and labels.csv must align and be non-empty".into(),
        });
    }
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    let mut umin = Vec::new();
    let mut umax = Vec::new();
    for (i, (frow, lrow)) in frows.iter().zip(&lrows).enumerate().skip(1) {
        if frow[0] != lrow[0] {
            return Err(PipelineError::Csv {
                file: lname.clone(),
                line: i + 1,
                msg: format!("timestamp mismatch `{}` vs `{}`", frow[0], lrow[0]),
            });
        }
        labels.push(frow[0].clone());
        let values: Vec<f64> = frow[1..]
            .iter()
            .map(|c| parse_cell(&fname, i + 1, c))
            .collect::<Result<_, _>>()?;
        rows.push(values);
        umin.push(parse_cell(&lname, i + 1, &lrow[1])?);
        umax.push(parse_cell(&lname, i + 1, &lrow[2])?);
    }
    Ok(TrainingSet {
        features: traffic::FeatureMatrix::new(labels, Matrix::from_rows(&rows)),
        umin,
        umax,
    })
}

#[derive(Debug)]
pub struct TrainOutput {
    pub k: usize,
    pub cv: Option<CvReport>,
    pub model_paths: Vec<PathBuf>,
}

fn append_column(m: &Matrix, col: &[f64]) -> Matrix {
    assert_eq!(m.rows(), col.len());
    let mut out = Matrix::zeros(m.rows(), m.cols() + 1);
    for r in 0..m.rows() {
        for c in 0..m.cols() {
            out[(r, c)] = m[(r, c)];
        }
        out[(r, m.cols())] = col[r];
    }
    out
}

fn write_cv_report(path: &Path, report: &CvReport) -> Result<(), PipelineError> {
    let mut out = String::from("k,size_reduction,mean_accuracy,variance_retained,chosen_k\n");
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.k,
            fmt4(row.size_reduction),
            fmt4(row.mean_accuracy),
            fmt4(row.variance_retained),
            report.chosen_k
        ));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Cross-validates the component count on the umin labels, fits PCA at the
/// chosen (or pinned) k, and saves the four regression models plus the CV
/// report.
pub fn cmd_train(cfg: &PipelineConfig) -> Result<TrainOutput, PipelineError> {
    let set = read_training_set(&cfg.out)?;
    let d = set.features.sample_count();
    let n = set.features.feature_count();

    let cv_cfg = CvConfig {
        k_grid: cfg.k_grid.clone().unwrap_or_default(),
        folds: cfg.folds,
        seed: cfg.seed,
        epsilon: cfg.epsilon,
    };
    let cv = match cfg.pca_k {
        KChoice::Auto => Some(cross_validate_k(&set.features, &set.umin, &cv_cfg)?),
        KChoice::Fixed(_) if d >= cfg.folds => {
            Some(cross_validate_k(&set.features, &set.umin, &cv_cfg)?)
        }
        KChoice::Fixed(_) => None,
    };
    let k = match cfg.pca_k {
        KChoice::Auto => cv.as_ref().unwrap().chosen_k,
        KChoice::Fixed(k) => {
            if k == 0 || k > n {
                return Err(PipelineError::Learn(LearnError::KOutOfRange { k, n }));
            }
            k
        }
    };

    let pca = PcaModel::fit(&set.features, k)?;
    let z = pca.project_features(&set.features)?;
    let z_with_umax = append_column(&z, &set.umax);
    let z_with_umin = append_column(&z, &set.umin);
    let models = [
        (
            TargetParam::Umin,
            RegressionModel::fit(&z, &set.umin, TargetParam::Umin)?,
        ),
        (
            TargetParam::Umax,
            RegressionModel::fit(&z, &set.umax, TargetParam::Umax)?,
        ),
        (
            TargetParam::UminGivenUmax,
            RegressionModel::fit(&z_with_umax, &set.umin, TargetParam::UminGivenUmax)?,
        ),
        (
            TargetParam::UmaxGivenUmin,
            RegressionModel::fit(&z_with_umin, &set.umax, TargetParam::UmaxGivenUmin)?,
        ),
    ];

    fs::create_dir_all(&cfg.out)?;
    let mut model_paths = Vec::new();
    for (target, regression) in models {
        let model = PredictorModel {
            pca: pca.clone(),
            regression,
        };
        let path = cfg.out.join(format!("model_{}.txt", target.as_str()));
        model.save(&path)?;
        model_paths.push(path);
    }
    if let Some(report) = &cv {
        write_cv_report(&cfg.out.join("cv_report.csv"), report)?;
    }
    Ok(TrainOutput {
        k,
        cv,
        model_paths,
    })
}

/// Runs cross-validation only and writes `cv_report.csv`.
pub fn cmd_cv(cfg: &PipelineConfig) -> Result<CvReport, PipelineError> {
    let set = read_training_set(&cfg.out)?;
    let cv_cfg = CvConfig {
        k_grid: cfg.k_grid.clone().unwrap_or_default(),
        folds: cfg.folds,
        seed: cfg.seed,
        epsilon: cfg.epsilon,
    };
    let report = cross_validate_k(&set.features, &set.umin, &cv_cfg)?;
    fs::create_dir_all(&cfg.out)?;
    write_cv_report(&cfg.out.join("cv_report.csv"), &report)?;
    Ok(report)
}

/// One evaluation row: predictions, oracle, refinement, and routing metrics
/// for a single (snapshot, volume) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRow {
    pub timestamp: String,
    pub volume: f64,
    pub pred_umin: f64,
    pub pred_umax: f64,
    pub pred_umin_given_umax: f64,
    pub pred_umax_given_umin: f64,
    pub oracle_umin: f64,
    pub oracle_umax: f64,
    pub oracle_ee: f64,
    pub refined_umin: f64,
    pub refined_umax: f64,
    pub refined_ee: f64,
    pub acc_umin: f64,
    pub acc_umax: f64,
    pub acc_umin_given_umax: f64,
    pub acc_umax_given_umin: f64,
    pub evaluations: u64,
    pub speedup: f64,
    pub energy_saving: f64,
    pub avg_path_length: f64,
}

#[derive(Debug)]
pub struct RunReport {
    pub rows: Vec<EvalRow>,
}

fn load_models(out: &Path) -> Result<[PredictorModel; 4], PipelineError> {
    let load = |target: TargetParam| -> Result<PredictorModel, PipelineError> {
        let path = out.join(format!("model_{}.txt", target.as_str()));
        if !path.is_file() {
            return Err(PipelineError::MissingInput(path.display().to_string()));
        }
        Ok(PredictorModel::load(&path)?)
    };
    Ok([
        load(TargetParam::Umin)?,
        load(TargetParam::Umax)?,
        load(TargetParam::UminGivenUmax)?,
        load(TargetParam::UmaxGivenUmin)?,
    ])
}

fn snap_to_grid(v: f64, alpha: f64) -> f64 {
    ((v / alpha).round() * alpha).clamp(0.0, 100.0)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
        .collect()
}

/// Evaluates the saved models on test snapshots: per (snapshot, volume) the
/// predicted pair, the brute-force oracle, the refined pair with its speedup,
/// and the routing metrics at the refined pair. Writes `run_report.csv`, the
/// per-volume plot CSVs, and one routing-outcome CSV per cell.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let t = Topology::load(&cfg.topology)?;
    let models = load_models(&cfg.out)?;
    let n = feature_len(t.node_count());
    for m in &models {
        if m.pca.feature_count() != n {
            return Err(PipelineError::FeatureLengthMismatch {
                model: m.pca.feature_count(),
                topology: n,
            });
        }
    }
    let snaps = load_snapshots(&cfg.snapshots, &t)?;
    let mut cells = Vec::with_capacity(snaps.len() * cfg.volumes.len());
    for &volume in &cfg.volumes {
        for s in &snaps {
            cells.push((volume, s.scale(volume)?));
        }
    }

    let [m_umin, m_umax, m_umin_given, m_umax_given] = &models;
    let results: Vec<Result<(EvalRow, String), PipelineError>> =
        par::map_slice(&cells, |(volume, scaled)| {
            let fv = scaled.to_feature_vector(&t);
            let oracle_eval = EeEvaluator::for_snapshot(&t, scaled, cfg.paths_k)?;
            let oracle = brute_force_optimal(&oracle_eval, cfg.step)?;

            let pred_umin = m_umin.predict(fv.as_slice(), None)?;
            let pred_umax = m_umax.predict(fv.as_slice(), None)?;
            let pred_umin_given = m_umin_given.predict(fv.as_slice(), Some(oracle.umax))?;
            let pred_umax_given = m_umax_given.predict(fv.as_slice(), Some(oracle.umin))?;

            // Refinement starts from the prediction snapped onto the alpha
            // grid, so reported pairs survive the 4-decimal CSV round trip.
            let start_umax = snap_to_grid(pred_umax, cfg.alpha);
            let start_umin = snap_to_grid(pred_umin, cfg.alpha).min(start_umax);
            let fresh_eval = EeEvaluator::for_snapshot(&t, scaled, cfg.paths_k)?;
            let refined = refine(&fresh_eval, start_umin, start_umax, cfg.alpha, cfg.beta)?;

            let u = UtilityInterval::new(refined.umin, refined.umax)?;
            let outcome = route_snapshot(&t, scaled, u, cfg.paths_k)?;
            debug_assert_eq!(outcome.energy_saving, refined.ee);

            let row = EvalRow {
                timestamp: scaled.timestamp.clone(),
                volume: *volume,
                pred_umin,
                pred_umax,
                pred_umin_given_umax: pred_umin_given,
                pred_umax_given_umin: pred_umax_given,
                oracle_umin: oracle.umin,
                oracle_umax: oracle.umax,
                oracle_ee: oracle.ee,
                refined_umin: refined.umin,
                refined_umax: refined.umax,
                refined_ee: refined.ee,
                acc_umin: learn::prediction_accuracy(oracle.umin, pred_umin, cfg.epsilon),
                acc_umax: learn::prediction_accuracy(oracle.umax, pred_umax, cfg.epsilon),
                acc_umin_given_umax: learn::prediction_accuracy(
                    oracle.umin,
                    pred_umin_given,
                    cfg.epsilon,
                ),
                acc_umax_given_umin: learn::prediction_accuracy(
                    oracle.umax,
                    pred_umax_given,
                    cfg.epsilon,
                ),
                evaluations: refined.evaluations,
                speedup: refined.speedup,
                energy_saving: outcome.energy_saving,
                avg_path_length: outcome.avg_path_length,
            };
            Ok((row, outcome.to_csv(&t)))
        });

    fs::create_dir_all(cfg.out.join("outcomes"))?;
    let mut rows = Vec::with_capacity(results.len());
    let mut report = String::from(
        "timestamp,volume,pred_umin,pred_umax,pred_umin_given_umax,pred_umax_given_umin,\
         oracle_umin,oracle_umax,oracle_ee,refined_umin,refined_umax,refined_ee,\
         acc_umin,acc_umax,acc_umin_given_umax,acc_umax_given_umin,\
         evaluations,speedup,energy_saving,avg_path_length\n",
    );
    for result in results {
        let (row, outcome_csv) = result?;
        report.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.timestamp,
            fmt4(row.volume),
            fmt4(row.pred_umin),
            fmt4(row.pred_umax),
            fmt4(row.pred_umin_given_umax),
            fmt4(row.pred_umax_given_umin),
            fmt4(row.oracle_umin),
            fmt4(row.oracle_umax),
            fmt4(row.oracle_ee),
            fmt4(row.refined_umin),
            fmt4(row.refined_umax),
            fmt4(row.refined_ee),
            fmt4(row.acc_umin),
            fmt4(row.acc_umax),
            fmt4(row.acc_umin_given_umax),
            fmt4(row.acc_umax_given_umin),
            row.evaluations,
            fmt4(row.speedup),
            fmt4(row.energy_saving),
            fmt4(row.avg_path_length),
        ));
        fs::write(
            cfg.out
                .join("outcomes")
                .join(format!("{}.csv", sanitize(&row.timestamp))),
            outcome_csv,
        )?;
        rows.push(row);
    }
    fs::write(cfg.out.join("run_report.csv"), report)?;
    write_plot_csvs(cfg, &rows)?;
    Ok(RunReport { rows })
}

fn write_plot_csvs(cfg: &PipelineConfig, rows: &[EvalRow]) -> Result<(), PipelineError> {
    let mut groups: BTreeMap<u64, Vec<&EvalRow>> = BTreeMap::new();
    for row in rows {
        groups.entry(row.volume.to_bits()).or_default().push(row);
    }
    let mut ordered: Vec<(f64, &[&EvalRow])> = groups
        .values()
        .map(|g| (g[0].volume, g.as_slice()))
        .collect();
    ordered.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mean = |g: &[&EvalRow], f: fn(&EvalRow) -> f64| -> f64 {
        g.iter().map(|r| f(r)).sum::<f64>() / g.len() as f64
    };

    let mut acc = String::from(
        "volume,acc_umin,acc_umax,acc_umin_given_umax,acc_umax_given_umin\n",
    );
    let mut energy = String::from("volume,energy_saving\n");
    let mut hops = String::from("volume,avg_path_length\n");
    for (volume, g) in &ordered {
        acc.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt4(*volume),
            fmt4(mean(g, |r| r.acc_umin)),
            fmt4(mean(g, |r| r.acc_umax)),
            fmt4(mean(g, |r| r.acc_umin_given_umax)),
            fmt4(mean(g, |r| r.acc_umax_given_umin)),
        ));
        energy.push_str(&format!(
            "{},{}\n",
            fmt4(*volume),
            fmt4(mean(g, |r| r.energy_saving))
        ));
        hops.push_str(&format!(
            "{},{}\n",
            fmt4(*volume),
            fmt4(mean(g, |r| r.avg_path_length))
        ));
    }
    fs::write(cfg.out.join("plot_accuracy_vs_volume.csv"), acc)?;
    fs::write(cfg.out.join("plot_energy_vs_volume.csv"), energy)?;
    fs::write(cfg.out.join("plot_path_length_vs_volume.csv"), hops)?;
    let cv_path = cfg.out.join("cv_report.csv");
    if cv_path.is_file() {
        fs::copy(&cv_path, cfg.out.join("plot_cv_curves.csv"))?;
    }
    Ok(())
}
