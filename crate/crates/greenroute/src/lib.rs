//! Traffic-aware energy-efficient routing toolkit.
//!
//! The crate routes traffic snapshots over a capacitated directed topology
//! under a link-utility interval `(umin, umax)`, switches idle links off, and
//! learns the interval parameters that maximize energy saving:
//!
//! * [`netmodel`] — the directed capacitated graph and topology file ingestion,
//! * [`traffic`] — demand snapshots, volume scaling, and feature extraction,
//! * [`eeroute`] — utility-interval routing with link deactivation,
//! * [`learn`] — PCA (Jacobi eigensolver) + least-squares regression + k-fold CV,
//! * [`tune`] — brute-force optimal labels and the two-phase refine climb,
//! * [`pipeline`] — the `label`/`train`/`evaluate`/`synth`/`cv` stages behind
//!   the CLI, emitting deterministic CSV reports.
//!
//! Grid sweeps, labeling, and cross-validation fan out over rayon when the
//! default `parallel` feature is enabled; without it the same code runs
//! sequentially with identical results.

pub mod eeroute;
pub mod learn;
pub mod linalg;
pub mod netmodel;
pub(crate) mod par;
pub mod pipeline;
pub mod traffic;
pub mod tune;
