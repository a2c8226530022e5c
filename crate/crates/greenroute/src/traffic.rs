//! Traffic snapshots, volume scaling, and feature extraction.
//!
//! A snapshot is a timestamped set of `(source, destination, rate)` demands.
//! Snapshot files are line-oriented (`demand <src> <dst> <rate>`, `#`
//! comments); the SNDlib native `DEMANDS ( ... )` section is also accepted,
//! taking the demand-value field.
//!
//! Feature vectors lay out all ordered node pairs `(i, j)`, `i != j`, in
//! node-index row-major order, giving the fixed width `N(N-1)` for an
//! `N`-node topology. Absent demands encode as exact `0.0`.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::netmodel::{sndlib_section, Topology};

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("failed to read snapshot file: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("demand endpoint `{0}` is not a topology node")]
    UnknownNode(String),
    #[error("duplicate demand pair {src} -> {dst}")]
    DuplicatePair { src: String, dst: String },
    #[error("negative rate {rate} for demand {src} -> {dst}")]
    NegativeRate { src: String, dst: String, rate: f64 },
    #[error("self demand on node `{0}`")]
    SelfDemand(String),
    #[error("volume percent {0} outside (0, 100]")]
    VolumeOutOfRange(f64),
    #[error("cannot assemble a feature matrix from zero snapshots")]
    EmptySnapshotList,
}

/// One demand: `rate` units from node `src` to node `dst` (node indices).
#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub src: usize,
    pub dst: usize,
    pub rate: f64,
}

/// Timestamped demand set, validated against a companion [`Topology`]:
/// endpoints exist, no self pairs, at most one flow per ordered pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficSnapshot {
    pub timestamp: String,
    flows: Vec<Flow>,
}

/// Fixed-width nonnegative demand vector of length `N(N-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Sample-major feature matrix: one row per snapshot, one column per ordered
/// node pair, with the snapshot timestamps as row labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    labels: Vec<String>,
    values: Matrix,
}

impl FeatureMatrix {
    pub fn new(labels: Vec<String>, values: Matrix) -> Self {
        assert_eq!(labels.len(), values.rows(), "one label per row");
        FeatureMatrix { labels, values }
    }

    pub fn sample_count(&self) -> usize {
        self.values.rows()
    }

    pub fn feature_count(&self) -> usize {
        self.values.cols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }
}

/// Feature width for an `n_nodes` topology: all ordered pairs.
pub fn feature_len(n_nodes: usize) -> usize {
    n_nodes * n_nodes.saturating_sub(1)
}

/// Column index of the ordered pair `(i, j)` in the feature layout.
pub fn pair_index(n_nodes: usize, i: usize, j: usize) -> usize {
    debug_assert!(i != j && i < n_nodes && j < n_nodes);
    i * (n_nodes - 1) + if j > i { j - 1 } else { j }
}

impl TrafficSnapshot {
    /// Validates flows against the topology and builds the snapshot.
    pub fn new(
        timestamp: impl Into<String>,
        flows: Vec<Flow>,
        topology: &Topology,
    ) -> Result<Self, TrafficError> {
        let n = topology.node_count();
        let mut seen = std::collections::HashSet::new();
        for f in &flows {
            if f.src >= n || f.dst >= n {
                return Err(TrafficError::UnknownNode(format!("#{}", f.src.max(f.dst))));
            }
            if f.src == f.dst {
                return Err(TrafficError::SelfDemand(
                    topology.node_name(f.src).to_string(),
                ));
            }
            if f.rate < 0.0 {
                return Err(TrafficError::NegativeRate {
                    src: topology.node_name(f.src).to_string(),
                    dst: topology.node_name(f.dst).to_string(),
                    rate: f.rate,
                });
            }
            if !seen.insert((f.src, f.dst)) {
                return Err(TrafficError::DuplicatePair {
                    src: topology.node_name(f.src).to_string(),
                    dst: topology.node_name(f.dst).to_string(),
                });
            }
        }
        Ok(TrafficSnapshot {
            timestamp: timestamp.into(),
            flows,
        })
    }

    /// Loads a snapshot file; the timestamp label is the file stem.
    pub fn load(path: impl AsRef<Path>, topology: &Topology) -> Result<Self, TrafficError> {
        let path = path.as_ref();
        let content = fs::read_to_string(path)?;
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "snapshot".to_string());
        Self::parse(&content, stem, topology)
    }

    pub fn parse(
        content: &str,
        timestamp: impl Into<String>,
        topology: &Topology,
    ) -> Result<Self, TrafficError> {
        let entries = if content.lines().any(|l| {
            let t = l.trim_start();
            t.starts_with("DEMANDS") && t.contains('(')
        }) {
            parse_sndlib_demands(content)?
        } else {
            parse_simple_demands(content)?
        };
        let mut flows = Vec::with_capacity(entries.len());
        for (line, src, dst, rate) in entries {
            let si = topology
                .node_index(&src)
                .ok_or(TrafficError::UnknownNode(src.clone()))?;
            let di = topology
                .node_index(&dst)
                .ok_or(TrafficError::UnknownNode(dst.clone()))?;
            let _ = line;
            flows.push(Flow {
                src: si,
                dst: di,
                rate,
            });
        }
        Self::new(timestamp, flows, topology)
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    /// Multiplies every rate by `volume_percent / 100` and annotates the
    /// timestamp with the volume.
    pub fn scale(&self, volume_percent: f64) -> Result<Self, TrafficError> {
        if !(volume_percent > 0.0 && volume_percent <= 100.0) {
            return Err(TrafficError::VolumeOutOfRange(volume_percent));
        }
        let factor = volume_percent / 100.0;
        let flows = self
            .flows
            .iter()
            .map(|f| Flow {
                src: f.src,
                dst: f.dst,
                rate: f.rate * factor,
            })
            .collect();
        Ok(TrafficSnapshot {
            timestamp: format!("{}@vol{}", self.timestamp, format_percent(volume_percent)),
            flows,
        })
    }

    /// Demand vector over all ordered node pairs; absent pairs are `0.0`.
    pub fn to_feature_vector(&self, topology: &Topology) -> FeatureVector {
        let n = topology.node_count();
        let mut values = vec![0.0; feature_len(n)];
        for f in &self.flows {
            values[pair_index(n, f.src, f.dst)] = f.rate;
        }
        FeatureVector(values)
    }

    /// Snapshot file body in the simple line format.
    pub fn to_file_string(&self, topology: &Topology) -> String {
        let mut out = String::new();
        for f in &self.flows {
            out.push_str(&format!(
                "demand {} {} {}\n",
                topology.node_name(f.src),
                topology.node_name(f.dst),
                f.rate
            ));
        }
        out
    }
}

pub(crate) fn format_percent(p: f64) -> String {
    if p.fract() == 0.0 {
        format!("{:.0}", p)
    } else {
        format!("{}", p)
    }
}

type DemandEntry = (usize, String, String, f64);

fn parse_simple_demands(content: &str) -> Result<Vec<DemandEntry>, TrafficError> {
    let mut out = Vec::new();
    for (lineno, raw) in content.lines().enumerate() {
        let line = match raw.find('#') {
            Some(pos) => raw[..pos].trim(),
            None => raw.trim(),
        };
        if line.is_empty() {
            continue;
        }
        let tok: Vec<&str> = line.split_whitespace().collect();
        if tok.len() != 4 || tok[0] != "demand" {
            return Err(TrafficError::Parse {
                line: lineno + 1,
                msg: format!("expected `demand <src> <dst> <rate>`, got `{line}`"),
            });
        }
        let rate: f64 = tok[3].parse().map_err(|_| TrafficError::Parse {
            line: lineno + 1,
            msg: format!("bad rate `{}`", tok[3]),
        })?;
        out.push((lineno + 1, tok[1].to_string(), tok[2].to_string(), rate));
    }
    Ok(out)
}

/// `<id> ( <src> <dst> ) <routingUnit> <demandValue> <maxPathLength>`
fn parse_sndlib_demands(content: &str) -> Result<Vec<DemandEntry>, TrafficError> {
    let mut out = Vec::new();
    for (lineno, entry) in sndlib_section(content, "DEMANDS") {
        let spaced = entry.replace('(', " ( ").replace(')', " ) ");
        let tok: Vec<&str> = spaced.split_whitespace().collect();
        let parsed = (|| {
            let open = tok.iter().position(|t| *t == "(")?;
            let close = tok.iter().position(|t| *t == ")")?;
            if close != open + 3 {
                return None;
            }
            let src = tok[open + 1].to_string();
            let dst = tok[open + 2].to_string();
            let value: f64 = tok.get(close + 2)?.parse().ok()?;
            Some((src, dst, value))
        })();
        match parsed {
            Some((src, dst, value)) => out.push((lineno, src, dst, value)),
            None => {
                return Err(TrafficError::Parse {
                    line: lineno,
                    msg: format!("bad DEMANDS entry `{entry}`"),
                })
            }
        }
    }
    Ok(out)
}

/// Stacks snapshot feature vectors into a matrix, preserving order.
pub fn assemble_feature_matrix(
    snapshots: &[TrafficSnapshot],
    topology: &Topology,
) -> Result<FeatureMatrix, TrafficError> {
    if snapshots.is_empty() {
        return Err(TrafficError::EmptySnapshotList);
    }
    let rows: Vec<Vec<f64>> = snapshots
        .iter()
        .map(|s| s.to_feature_vector(topology).into_inner())
        .collect();
    let labels = snapshots.iter().map(|s| s.timestamp.clone()).collect();
    Ok(FeatureMatrix::new(labels, Matrix::from_rows(&rows)))
}

/// Generates deterministic synthetic snapshots whose demand vectors lie, up
/// to small uniform noise, in a `latent_dim`-dimensional subspace:
/// `rate = max(0, A z + noise)` with a factor matrix `A` drawn once from the
/// seed. The controlled rank makes dimensionality-reduction behavior
/// checkable without real traces.
pub fn synth_snapshots(
    topology: &Topology,
    latent_dim: usize,
    count: usize,
    seed: u64,
) -> Vec<TrafficSnapshot> {
    assert!(latent_dim >= 1, "latent_dim must be >= 1");
    assert!(count >= 1, "count must be >= 1");
    let n = topology.node_count();
    let width = feature_len(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Nonnegative factor loadings keep A z >= 0, so the noise clamp below
    // almost never binds and the covariance stays numerically rank latent_dim.
    let factors: Vec<Vec<f64>> = (0..width)
        .map(|_| (0..latent_dim).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect();
    const NOISE: f64 = 0.05;

    let mut snapshots = Vec::with_capacity(count);
    for s in 0..count {
        let z: Vec<f64> = (0..latent_dim)
            .map(|_| rng.random_range(0.0..10.0))
            .collect();
        let mut flows = Vec::with_capacity(width);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let col = pair_index(n, i, j);
                let signal: f64 = factors[col].iter().zip(&z).map(|(a, b)| a * b).sum();
                let noise = rng.random_range(-NOISE..NOISE);
                let rate = (signal + noise).max(0.0);
                flows.push(Flow { src: i, dst: j, rate });
            }
        }
        snapshots.push(
            TrafficSnapshot::new(format!("synth-{s:03}"), flows, topology)
                .expect("generated flows are valid by construction"),
        );
    }
    snapshots
}
