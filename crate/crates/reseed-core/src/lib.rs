//! Coverage-driven seed reuse for fuzzers.
//!
//! This crate implements a pipeline for recycling tests collected from
//! fuzzing campaigns on earlier processors into effective seeds for a new
//! target:
//!
//! 1. [`coverage`] — coverage points, hit vectors, and the test×point
//!    coverage matrix, parsed from RCDB text databases.
//! 2. [`minimize`] — set-cover corpus distillation: the smallest subset of
//!    tests preserving the union coverage (exact branch-and-bound plus a
//!    greedy approximation).
//! 3. [`bandit`] — contextual-bandit training of per-context test lists,
//!    with ε-greedy selection and an elimination/promotion loop.
//! 4. [`trainer`] — end-to-end model training: context snapshots, reward
//!    environments, automatic threshold tuning, and model (de)serialization.
//! 5. [`runtime`] — the campaign engine that drives a fuzzer from the
//!    trained lists, with per-test drop tracking and native-seed fallback.
//! 6. [`harness`] — a synthetic processor/corpus generator and strategy
//!    benchmark used for evaluation and acceptance testing.
//! 7. [`report`] — CSV/JSON trace and summary emission.
//!
//! Everything is deterministic under a fixed seed. With the default
//! `parallel` feature the data-parallel inner loops (suite generation,
//! strategy fan-out, batch parsing) run on rayon; without it they fall back
//! to equivalent sequential code producing identical results.

pub mod bandit;
pub mod bits;
pub mod coverage;
pub mod error;
pub mod harness;
pub mod level;
pub mod minimize;
pub mod report;
pub mod runtime;
pub mod trainer;

mod par;
mod seed;

pub use error::{Error, Result};
pub use level::Level;
pub use seed::mix_seed;
