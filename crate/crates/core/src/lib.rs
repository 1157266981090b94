//! Synthesis of terminal "text-video with actions" data from git histories,
//! synthetic sequential-reasoning benchmarks, and sequence-length scaling
//! analysis.

pub mod acttok;
pub mod diff;
pub mod frjt;
pub mod gitsynth;
pub mod manifest;
pub mod seed;
pub mod maze;
pub mod scaling;
pub mod termemu;
pub mod tszx;
