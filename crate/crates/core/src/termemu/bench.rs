use std::time::Instant;

use rand::Rng as _;

use super::action::{Action, Control};
use super::frame::{DEFAULT_HEIGHT, DEFAULT_WIDTH};
use super::session::Session;
use super::TermError;
use crate::seed::rng_from;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchReport {
    pub actions: usize,
    pub seconds: f64,
    pub actions_per_second: f64,
    /// Checksum of the final frame, so the work cannot be optimized away.
    pub frame_checksum: u64,
}

/// A synthetic editing workload: mostly typed characters, with newlines,
/// deletions and cursor motion mixed in.
pub fn synthetic_workload(count: usize, seed: u64) -> Vec<Action> {
    let mut rng = rng_from(seed);
    let mut out = Vec::with_capacity(count + 2);
    out.push(Action::Control(Control::Open("bench.txt".into())));
    out.push(Action::Control(Control::ToggleMode));
    let mut col = 0usize;
    while out.len() < count {
        let r: f64 = rng.gen();
        let a = if col >= 72 || r < 0.015 {
            col = 0;
            Action::Insert('\n')
        } else if r < 0.06 {
            col = col.saturating_sub(1);
            Action::Backspace
        } else if r < 0.08 {
            Action::Control(if rng.gen_bool(0.5) { Control::Left } else { Control::Right })
        } else if r < 0.085 {
            Action::Control(Control::Save)
        } else {
            col += 1;
            Action::Insert(rng.gen_range(b'a'..=b'z') as char)
        };
        out.push(a);
    }
    out.truncate(count);
    out
}

/// Applies `action_count` synthetic actions to a default-geometry session,
/// keeping the frame current after each one.
pub fn throughput_bench(action_count: usize, seed: u64) -> Result<BenchReport, TermError> {
    let actions = synthetic_workload(action_count, seed);
    let mut session = Session::new(DEFAULT_WIDTH, DEFAULT_HEIGHT)?;
    let start = Instant::now();
    let mut checksum = 0u64;
    for a in &actions {
        session.apply_action(a)?;
        let f = session.frame();
        checksum = checksum.wrapping_add(f.cells()[f.cells().len() - 1].ch as u64);
    }
    let seconds = start.elapsed().as_secs_f64();
    for c in session.frame().cells() {
        checksum = checksum.rotate_left(5) ^ c.ch as u64 ^ ((c.style.0 as u64) << 32);
    }
    Ok(BenchReport {
        actions: actions.len(),
        seconds,
        actions_per_second: actions.len() as f64 / seconds.max(1e-9),
        frame_checksum: checksum,
    })
}
