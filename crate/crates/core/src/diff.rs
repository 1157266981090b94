//! Line and character edit scripts, unified diffs and a strict patch
//! applier.
//!
//! Line scripts work on `text.split('\n')`, the same line model the editor
//! uses, so a trailing newline shows up as a final empty line.

use std::fmt;

use similar::algorithms::{myers, Capture, Replace};
use similar::DiffOp;

/// Replace `old_len` lines at `old_start` with `new_lines`. Pure inserts
/// have `old_len == 0`, pure deletes have empty `new_lines`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineEdit {
    pub old_start: usize,
    pub old_len: usize,
    pub new_start: usize,
    pub new_lines: Vec<String>,
}

/// Replace `old_len` chars at `old_start` with `new`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharEdit {
    pub old_start: usize,
    pub old_len: usize,
    pub new: Vec<char>,
}

// Raw Myers ops. The compacted ops from `capture_diff_slices` can carry
// inconsistent indices for inputs with many repeated lines.
fn myers_ops<T: PartialEq + std::hash::Hash + Eq>(old: &[T], new: &[T]) -> Vec<DiffOp> {
    let mut cap = Replace::new(Capture::new());
    myers::diff(&mut cap, old, 0..old.len(), new, 0..new.len()).expect("capture is infallible");
    cap.into_inner().into_ops()
}

fn edits_from_ops<T, E>(ops: &[DiffOp], new: &[T], mut make: impl FnMut(usize, usize, usize, &[T]) -> E) -> Vec<E> {
    let mut out = Vec::new();
    let mut shift: isize = 0;
    for op in ops {
        let (old_index, old_len, new_len, src) = match *op {
            DiffOp::Equal { .. } => continue,
            DiffOp::Delete { old_index, old_len, .. } => (old_index, old_len, 0, 0),
            DiffOp::Insert { old_index, new_index, new_len } => (old_index, 0, new_len, new_index),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => (old_index, old_len, new_len, new_index),
        };
        let at = (old_index as isize + shift) as usize;
        out.push(make(old_index, old_len, at, &new[src..src + new_len]));
        shift += new_len as isize - old_len as isize;
    }
    out
}

/// Minimal (longest-common-subsequence) line edit script from `old` to `new`.
pub fn diff_lines(old: &str, new: &str) -> Vec<LineEdit> {
    if old == new {
        return Vec::new();
    }
    let a: Vec<&str> = old.split('\n').collect();
    let b: Vec<&str> = new.split('\n').collect();
    let ops = myers_ops(&a, &b);
    edits_from_ops(&ops, &b, |old_start, old_len, new_start, lines| LineEdit {
        old_start,
        old_len,
        new_start,
        new_lines: lines.iter().map(|s| s.to_string()).collect(),
    })
}

/// Minimal character edit script between two single lines.
pub fn diff_chars(old: &[char], new: &[char]) -> Vec<CharEdit> {
    if old == new {
        return Vec::new();
    }
    let ops = myers_ops(old, new);
    edits_from_ops(&ops, new, |old_start, old_len, _, chars| CharEdit {
        old_start,
        old_len,
        new: chars.to_vec(),
    })
}

pub fn apply_line_edits(old: &str, edits: &[LineEdit]) -> String {
    let a: Vec<&str> = old.split('\n').collect();
    let mut out: Vec<&str> = Vec::with_capacity(a.len());
    let mut pos = 0;
    for e in edits {
        out.extend_from_slice(&a[pos..e.old_start]);
        out.extend(e.new_lines.iter().map(String::as_str));
        pos = e.old_start + e.old_len;
    }
    out.extend_from_slice(&a[pos..]);
    out.join("\n")
}

pub fn apply_char_edits(old: &[char], edits: &[CharEdit]) -> Vec<char> {
    let mut out = Vec::with_capacity(old.len());
    let mut pos = 0;
    for e in edits {
        out.extend_from_slice(&old[pos..e.old_start]);
        out.extend_from_slice(&e.new);
        pos = e.old_start + e.old_len;
    }
    out.extend_from_slice(&old[pos..]);
    out
}

/// Context lines around each hunk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Context {
    /// The whole file is context: one hunk per patch.
    Full,
    U1,
    U0,
}

impl Context {
    fn radius(self, old: &str, new: &str) -> usize {
        match self {
            Context::Full => old.len() + new.len() + 1,
            Context::U1 => 1,
            Context::U0 => 0,
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Context::Full => "full",
            Context::U1 => "u1",
            Context::U0 => "u0",
        })
    }
}

impl std::str::FromStr for Context {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(Context::Full),
            "u1" => Ok(Context::U1),
            "u0" => Ok(Context::U0),
            o => Err(format!("unknown context level {o:?} (expected full, u1 or u0)")),
        }
    }
}

fn range(start: usize, len: usize) -> String {
    // Empty ranges name the line before the change.
    match len {
        0 => format!("{start},0"),
        1 => format!("{}", start + 1),
        _ => format!("{},{len}", start + 1),
    }
}

/// A unified diff with `a/`/`b/` headers, or the empty string when the
/// texts are equal.
pub fn unified_diff(old: &str, new: &str, path: &str, context: Context) -> String {
    if old == new {
        return String::new();
    }
    let a: Vec<&str> = old.split_inclusive('\n').collect();
    let b: Vec<&str> = new.split_inclusive('\n').collect();
    // (tag, text, old lines before, new lines before)
    let mut seq: Vec<(char, &str, usize, usize)> = Vec::with_capacity(a.len().max(b.len()));
    for op in myers_ops(&a, &b) {
        let (o, ol, n, nl) = match op {
            DiffOp::Equal { old_index, new_index, len } => {
                for k in 0..len {
                    seq.push((' ', a[old_index + k], old_index + k, new_index + k));
                }
                continue;
            }
            DiffOp::Delete { old_index, old_len, new_index } => (old_index, old_len, new_index, 0),
            DiffOp::Insert { old_index, new_index, new_len } => (old_index, 0, new_index, new_len),
            DiffOp::Replace { old_index, old_len, new_index, new_len } => (old_index, old_len, new_index, new_len),
        };
        for k in 0..ol {
            seq.push(('-', a[o + k], o + k, n));
        }
        for k in 0..nl {
            seq.push(('+', b[n + k], o + ol, n + k));
        }
    }

    let r = context.radius(old, new);
    let changes: Vec<usize> = (0..seq.len()).filter(|&i| seq[i].0 != ' ').collect();
    let mut groups: Vec<(usize, usize)> = Vec::new();
    for &i in &changes {
        match groups.last_mut() {
            Some(g) if i - g.1 <= 2 * r + 1 => g.1 = i,
            _ => groups.push((i, i)),
        }
    }

    let mut out = format!("--- a/{path}\n+++ b/{path}\n");
    for (first, last) in groups {
        let lo = first.saturating_sub(r);
        let hi = (last + r + 1).min(seq.len());
        let body = &seq[lo..hi];
        let old_len = body.iter().filter(|l| l.0 != '+').count();
        let new_len = body.iter().filter(|l| l.0 != '-').count();
        let (_, _, o, n) = body[0];
        out.push_str(&format!("@@ -{} +{} @@\n", range(o, old_len), range(n, new_len)));
        for &(tag, text, _, _) in body {
            out.push(tag);
            out.push_str(text);
            if !text.ends_with('\n') {
                out.push_str("\n\\ No newline at end of file\n");
            }
        }
    }
    out
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PatchError {
    #[error("line {line}: malformed hunk header")]
    BadHeader { line: usize },
    #[error("line {line}: unexpected line in hunk")]
    BadLine { line: usize },
    #[error("hunk at old line {at} does not match the input")]
    Mismatch { at: usize },
    #[error("hunks overlap or run out of order")]
    Order,
}

struct Hunk {
    old_start: usize,
    old_len: usize,
    /// (tag, text with its terminator).
    lines: Vec<(char, String)>,
}

fn parse_range(s: &str) -> Option<(usize, usize)> {
    match s.split_once(',') {
        Some((a, b)) => Some((a.parse().ok()?, b.parse().ok()?)),
        None => Some((s.parse().ok()?, 1)),
    }
}

fn parse_hunks(patch: &str) -> Result<Vec<Hunk>, PatchError> {
    let mut hunks: Vec<Hunk> = Vec::new();
    for (i, line) in patch.split_inclusive('\n').enumerate() {
        let lineno = i + 1;
        if let Some(rest) = line.strip_prefix("@@ ") {
            let bad = || PatchError::BadHeader { line: lineno };
            let mut parts = rest.split(' ');
            let old = parts.next().and_then(|p| p.strip_prefix('-')).ok_or_else(bad)?;
            let new = parts.next().and_then(|p| p.strip_prefix('+')).ok_or_else(bad)?;
            let (old_start, old_len) = parse_range(old).ok_or_else(bad)?;
            parse_range(new).ok_or_else(bad)?;
            hunks.push(Hunk { old_start, old_len, lines: Vec::new() });
            continue;
        }
        let Some(h) = hunks.last_mut() else {
            // File headers and anything else before the first hunk.
            continue;
        };
        let tag = line.chars().next().ok_or(PatchError::BadLine { line: lineno })?;
        match tag {
            ' ' | '-' | '+' => h.lines.push((tag, line[1..].to_string())),
            '\\' => {
                let last = h.lines.last_mut().ok_or(PatchError::BadLine { line: lineno })?;
                if last.1.pop() != Some('\n') {
                    return Err(PatchError::BadLine { line: lineno });
                }
            }
            _ => return Err(PatchError::BadLine { line: lineno }),
        }
    }
    Ok(hunks)
}

/// Applies a unified diff exactly: every context and removed line must
/// match at the stated position.
pub fn apply_unified(old: &str, patch: &str) -> Result<String, PatchError> {
    let src: Vec<&str> = old.split_inclusive('\n').collect();
    let mut out = String::with_capacity(old.len());
    let mut pos = 0;
    for h in parse_hunks(patch)? {
        // Empty old ranges name the line before the insertion point.
        let start = if h.old_len == 0 { h.old_start } else { h.old_start.saturating_sub(1) };
        if start < pos || start > src.len() {
            return Err(PatchError::Order);
        }
        for l in &src[pos..start] {
            out.push_str(l);
        }
        pos = start;
        for (tag, text) in &h.lines {
            match tag {
                ' ' | '-' => {
                    if src.get(pos) != Some(&text.as_str()) {
                        return Err(PatchError::Mismatch { at: pos + 1 });
                    }
                    if *tag == ' ' {
                        out.push_str(text);
                    }
                    pos += 1;
                }
                _ => out.push_str(text),
            }
        }
    }
    for l in &src[pos..] {
        out.push_str(l);
    }
    Ok(out)
}
