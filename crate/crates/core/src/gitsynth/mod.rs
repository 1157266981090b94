//! Git histories replayed as editor sessions.

mod fixture;
mod history;
mod inflate;
mod plan;
mod synth;

pub use fixture::{build_fixture_repo, FixtureStats};
pub use history::{CommitInfo, FileChange, GitCli, HistoryReader};
pub use inflate::{emit_diff_inflate_cases, file_states, DiffInflateCase};
pub use plan::{plan_actions, EditPlan};
pub use synth::{replayable, synthesize, synthesize_repo, SynthConfig, SynthOutput};

use std::fmt;

use crate::termemu::TermError;
use crate::tszx::TszxError;

/// Where the replayed file system first differs from the repository.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Divergence {
    Missing(String),
    Unexpected(String),
    Content { path: String, offset: usize, expected_len: usize, actual_len: usize },
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Missing(p) => write!(f, "{p}: missing from replay"),
            Divergence::Unexpected(p) => write!(f, "{p}: not in repository"),
            Divergence::Content { path, offset, expected_len, actual_len } => write!(
                f,
                "{path}: first difference at byte {offset} (expected {expected_len} bytes, got {actual_len})"
            ),
        }
    }
}

fn first_difference(a: &[u8], b: &[u8]) -> usize {
    a.iter().zip(b).position(|(x, y)| x != y).unwrap_or(a.len().min(b.len()))
}

#[derive(Debug, thiserror::Error)]
pub enum SynthError {
    #[error("{0}")]
    Git(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Tszx(#[from] TszxError),
    #[error("replay diverged at commit {commit}:\n{}", report.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Mismatch { commit: String, report: Vec<Divergence> },
    #[error("{path}: {states} states, {needed} needed")]
    InsufficientHistory { path: String, states: usize, needed: usize },
    #[error("{0}: not a text file")]
    NotText(String),
}
