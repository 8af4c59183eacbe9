//! Monte Carlo experiment harness for the BPM-ISAC link: configuration,
//! seeded parallel sweeps, beampattern scans, analytic error curves, and a
//! self-check suite. The `bpm-isac` binary exposes all of it as CLI
//! subcommands; everything here is also usable as a library.
//!
//! Reproducibility contract: every trial draws from its own counter-derived
//! random stream, and aggregation is order-fixed, so a given configuration
//! and seed produce byte-identical outputs at any thread count.

pub mod apep_curve;
pub mod beamscan;
pub mod config;
pub mod output;
pub mod runner;
pub mod seeding;
pub mod validate;
