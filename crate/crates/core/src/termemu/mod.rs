//! Character frame-buffer terminal: a file browser, a modal editor and a
//! toy shell over an in-memory file system, driven by discrete actions.

mod action;
mod bench;
mod editor;
mod frame;
mod session;
mod shell;
mod vfs;

pub use action::{is_typeable, Action, Control, BACKSPACE, ESC};
pub use bench::{synthetic_workload, throughput_bench, BenchReport};
pub use editor::{Editor, Mode, Touched};
pub use frame::{display_char, Cell, Color, Frame, Style, DEFAULT_HEIGHT, DEFAULT_WIDTH};
pub use session::{is_text, read_action_log, write_action_log, Focus, Layout, Session};
pub use shell::{quote_arg, split_args, CommitRecord, Shell, ShellEffect, PROMPT};
pub use vfs::{tree_entries, TreeEntry, Vfs};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TermError {
    #[error("unsupported geometry {width}x{height}")]
    Geometry { width: u16, height: u16 },
    #[error("unsupported action {0:?}")]
    UnsupportedAction(String),
    #[error("{0}: not a text file")]
    NotText(String),
    #[error("malformed action log: {0}")]
    ActionLog(String),
}
