use std::collections::BTreeMap;
use std::path::Path;

use super::history::{CommitInfo, GitCli, HistoryReader};
use super::plan::plan_actions;
use super::{first_difference, Divergence, SynthError};
use crate::termemu::{is_text, quote_arg, Action, Control, Focus, Session, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use crate::tszx::Encoder;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SynthConfig {
    pub width: u16,
    pub height: u16,
    pub max_commits: Option<usize>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig { width: DEFAULT_WIDTH, height: DEFAULT_HEIGHT, max_commits: None }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SynthOutput {
    pub stream: Vec<u8>,
    pub commits: usize,
    pub frames: usize,
    pub actions: usize,
    pub files_created: usize,
    pub files_edited: usize,
    pub files_deleted: usize,
    /// Paths left out of the replay (binary content or unrepresentable names).
    pub skipped: Vec<String>,
    /// Messages as recorded by the session's shell.
    pub commit_messages: Vec<String>,
    pub last_commit: Option<String>,
}

/// Whether a file can be replayed through the editor.
pub fn replayable(path: &str, content: &[u8]) -> bool {
    let open = Action::Control(Control::Open(path.to_string()));
    is_text(content) && Action::parse(&open.encode()).as_ref() == Ok(&open)
}

struct Recorder {
    session: Session,
    encoder: Encoder,
    actions: usize,
}

impl Recorder {
    fn act(&mut self, a: Action) -> Result<(), SynthError> {
        self.session.apply_action(&a)?;
        self.encoder.push_action(&a);
        self.encoder.push_frame(self.session.frame())?;
        self.actions += 1;
        Ok(())
    }

    fn focus_shell(&mut self) -> Result<(), SynthError> {
        if self.session.focus() != Focus::Shell {
            self.act(Action::Control(Control::ToggleFocus))?;
        }
        Ok(())
    }

    fn type_line(&mut self, line: &str) -> Result<(), SynthError> {
        for ch in line.chars() {
            self.act(Action::Insert(ch))?;
        }
        self.act(Action::Insert('\n'))
    }
}

/// Replays a history and returns the encoded stream.
pub fn synthesize(reader: &dyn HistoryReader, cfg: &SynthConfig) -> Result<SynthOutput, SynthError> {
    let mut commits = reader.commits()?;
    if let Some(max) = cfg.max_commits {
        commits.truncate(max);
    }
    let mut out = SynthOutput::default();
    let mut rec = Recorder {
        session: Session::new(cfg.width, cfg.height)?,
        encoder: Encoder::new(cfg.width, cfg.height)?,
        actions: 0,
    };
    if commits.is_empty() {
        out.stream = rec.encoder.finish()?;
        return Ok(out);
    }
    rec.encoder.push_frame(rec.session.frame())?;

    for commit in &commits {
        replay_commit(reader, commit, &mut rec, &mut out)?;
    }

    let last = commits.last().expect("non-empty");
    verify_tree(reader, &last.id, &rec.session)?;

    out.commits = commits.len();
    out.actions = rec.actions;
    out.frames = rec.encoder.frame_count();
    out.commit_messages = rec.session.shell().commits.iter().map(|c| c.message.clone()).collect();
    out.last_commit = Some(last.id.clone());
    out.stream = rec.encoder.finish()?;
    Ok(out)
}

fn replay_commit(
    reader: &dyn HistoryReader,
    commit: &CommitInfo,
    rec: &mut Recorder,
    out: &mut SynthOutput,
) -> Result<(), SynthError> {
    let changes = reader.changes(commit)?;
    let ids: Vec<&str> = changes.iter().flat_map(|c| c.old.iter().chain(c.new.iter())).map(String::as_str).collect();
    let blobs = reader.blobs(&ids)?;
    let content = |id: &Option<String>| id.as_ref().map(|i| blobs[i].as_slice());

    for ch in &changes {
        let path = ch.path.as_str();
        let old = content(&ch.old).filter(|b| replayable(path, b));
        let new = content(&ch.new).filter(|b| replayable(path, b));
        if content(&ch.new).is_some() && new.is_none() && !out.skipped.iter().any(|s| s == path) {
            out.skipped.push(path.to_string());
        }
        let in_vfs = rec.session.vfs().contains(path);
        debug_assert_eq!(in_vfs, old.is_some());
        match (in_vfs, new) {
            (_, Some(new)) => {
                let new = std::str::from_utf8(new).expect("replayable content is UTF-8");
                rec.act(Action::Control(Control::Open(path.to_string())))?;
                let plan = plan_actions(rec.session.editor(), new);
                for a in plan.actions {
                    rec.act(a)?;
                }
                rec.act(Action::Control(Control::Save))?;
                if in_vfs {
                    out.files_edited += 1;
                } else {
                    out.files_created += 1;
                }
                let got = rec.session.vfs().get(path).unwrap_or_default();
                if got != new.as_bytes() {
                    return Err(SynthError::Mismatch {
                        commit: commit.id.clone(),
                        report: vec![Divergence::Content {
                            path: path.to_string(),
                            offset: first_difference(new.as_bytes(), got),
                            expected_len: new.len(),
                            actual_len: got.len(),
                        }],
                    });
                }
            }
            (true, None) => {
                rec.focus_shell()?;
                rec.type_line(&format!("rm {}", quote_arg(path)))?;
                out.files_deleted += 1;
                if rec.session.vfs().contains(path) {
                    return Err(SynthError::Mismatch {
                        commit: commit.id.clone(),
                        report: vec![Divergence::Unexpected(path.to_string())],
                    });
                }
            }
            (false, None) => {}
        }
    }

    rec.focus_shell()?;
    rec.type_line("git add -A")?;
    rec.type_line(&format!("git commit -m {}", quote_arg(&commit.message)))?;
    rec.act(Action::Control(Control::ToggleFocus))
}

fn verify_tree(reader: &dyn HistoryReader, commit: &str, session: &Session) -> Result<(), SynthError> {
    let tree = reader.tree(commit)?;
    let ids: Vec<&str> = tree.values().map(String::as_str).collect();
    let blobs = reader.blobs(&ids)?;
    let expected: BTreeMap<&str, &[u8]> = tree
        .iter()
        .map(|(p, id)| (p.as_str(), blobs[id].as_slice()))
        .filter(|(p, b)| replayable(p, b))
        .collect();
    let mut report = Vec::new();
    for (path, want) in &expected {
        match session.vfs().get(path) {
            None => report.push(Divergence::Missing(path.to_string())),
            Some(got) if got != *want => report.push(Divergence::Content {
                path: path.to_string(),
                offset: first_difference(want, got),
                expected_len: want.len(),
                actual_len: got.len(),
            }),
            Some(_) => {}
        }
    }
    for path in session.vfs().paths() {
        if !expected.contains_key(path) {
            report.push(Divergence::Unexpected(path.to_string()));
        }
    }
    if report.is_empty() {
        Ok(())
    } else {
        Err(SynthError::Mismatch { commit: commit.to_string(), report })
    }
}

/// Replays the repository at `repo` and writes the stream to `out`.
pub fn synthesize_repo(repo: &Path, out: &Path, cfg: &SynthConfig) -> Result<SynthOutput, SynthError> {
    let reader = GitCli::open(repo)?;
    let result = synthesize(&reader, cfg)?;
    std::fs::write(out, &result.stream)?;
    Ok(result)
}
