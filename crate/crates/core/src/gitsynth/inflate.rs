use std::path::Path;

use super::history::HistoryReader;
use super::SynthError;
use crate::diff::{apply_unified, unified_diff, Context};

/// A file's initial state, `n` sequential patches, and the state they
/// should reconstruct.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffInflateCase {
    pub path: String,
    pub context: Context,
    pub initial: String,
    pub patches: Vec<String>,
    pub truth: String,
    /// Commits that produced each patch.
    pub commits: Vec<String>,
}

impl DiffInflateCase {
    pub fn n(&self) -> usize {
        self.patches.len()
    }

    /// Writes `initial.txt`, `patch_0001.diff`... and `truth.txt`.
    pub fn write_to(&self, dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let mut put = |name: String, body: &str| -> std::io::Result<()> {
            let p = dir.join(name);
            std::fs::write(&p, body)?;
            written.push(p);
            Ok(())
        };
        put("initial.txt".into(), &self.initial)?;
        for (i, p) in self.patches.iter().enumerate() {
            put(format!("patch_{:04}.diff", i + 1), p)?;
        }
        put("truth.txt".into(), &self.truth)?;
        Ok(written)
    }
}

/// Successive contents of `path` along the history, one per commit that
/// changed it. A deletion reads as the empty file.
pub fn file_states(reader: &dyn HistoryReader, path: &str) -> Result<Vec<(String, String)>, SynthError> {
    let mut states = Vec::new();
    for c in reader.commits()? {
        let Some(ch) = reader.changes(&c)?.into_iter().find(|ch| ch.path == path) else {
            continue;
        };
        let text = match &ch.new {
            Some(id) => {
                let blobs = reader.blobs(&[id])?;
                String::from_utf8(blobs[id].clone()).map_err(|_| SynthError::NotText(path.to_string()))?
            }
            None => String::new(),
        };
        states.push((c.id, text));
    }
    Ok(states)
}

/// Builds a case from states `start ..= start + n` of `path`.
pub fn emit_diff_inflate_cases(
    reader: &dyn HistoryReader,
    path: &str,
    n: usize,
    context: Context,
    start: usize,
) -> Result<DiffInflateCase, SynthError> {
    let states = file_states(reader, path)?;
    let needed = start + n + 1;
    if n == 0 || states.len() < needed {
        return Err(SynthError::InsufficientHistory { path: path.to_string(), states: states.len(), needed });
    }
    let window = &states[start..needed];
    let patches: Vec<String> = window.windows(2).map(|w| unified_diff(&w[0].1, &w[1].1, path, context)).collect();
    let case = DiffInflateCase {
        path: path.to_string(),
        context,
        initial: window[0].1.clone(),
        patches,
        truth: window[n].1.clone(),
        commits: window[1..].iter().map(|(c, _)| c.clone()).collect(),
    };
    let mut cur = case.initial.clone();
    for p in &case.patches {
        cur = apply_unified(&cur, p).map_err(|e| SynthError::Git(format!("generated patch does not apply: {e}")))?;
    }
    assert_eq!(cur, case.truth, "sequential application must reach the final state");
    Ok(case)
}
