//! Deterministic simulator for communication-censored heavy-ball federated
//! optimization.
//!
//! A single server and `M` workers jointly minimize `f(θ) = Σ_m f_m(θ)` where
//! each worker holds a shard of the training data. Workers self-censor: a
//! worker uploads only the innovation of its gradient (the difference from the
//! last gradient it transmitted), and only when that innovation is large
//! relative to the last parameter step. The server maintains the gradient
//! aggregate recursively and applies a heavy-ball update.
//!
//! The crate is organized as:
//!
//! - [`models`] — loss models (linear, ridge-logistic, lasso, small MLP) with
//!   exact full-batch gradients and smoothness-constant estimation,
//! - [`data`] — LIBSVM parsing, contiguous sharding, and seeded synthetic
//!   datasets with controlled per-worker smoothness constants,
//! - [`engine`] — the server-worker protocol (censoring decision, innovation
//!   aggregation, parameter updates) and the experiment driver,
//! - [`theory`] — descent-condition calculators, convergence-rate constants,
//!   Lyapunov descent audits, and the communication-savings bound audit,
//! - [`trace`] — per-iteration records, stopping rules, and bit-exact CSV
//!   emission.
//!
//! Everything is a pure function of its inputs plus an explicit 64-bit seed;
//! two runs with identical inputs produce byte-identical traces.

pub mod data;
pub mod engine;
mod linalg;
pub mod models;
pub mod theory;
pub mod trace;

pub use data::{FederatedDataset, SeededRng};
pub use engine::{Algorithm, HyperParams};
pub use models::{LossModel, Sample};
pub use trace::{StoppingRule, Trace};
