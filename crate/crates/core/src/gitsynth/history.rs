//! Read-only access to a linearized commit history.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use super::SynthError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitInfo {
    pub id: String,
    /// First parent, if any.
    pub parent: Option<String>,
    pub message: String,
}

/// One path changed by a commit. Blob ids are `None` where the path is
/// absent or not a regular file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileChange {
    pub path: String,
    pub old: Option<String>,
    pub new: Option<String>,
}

pub trait HistoryReader {
    /// Commits oldest first along the first-parent chain of HEAD.
    fn commits(&self) -> Result<Vec<CommitInfo>, SynthError>;
    /// Regular-file changes against the first parent, sorted by path.
    fn changes(&self, commit: &CommitInfo) -> Result<Vec<FileChange>, SynthError>;
    fn blobs(&self, ids: &[&str]) -> Result<HashMap<String, Vec<u8>>, SynthError>;
    /// Regular files of a commit's tree: path to blob id.
    fn tree(&self, commit: &str) -> Result<BTreeMap<String, String>, SynthError>;
}

/// History through the `git` command-line tool.
#[derive(Debug, Clone)]
pub struct GitCli {
    repo: PathBuf,
}

const REGULAR_MODES: [&str; 2] = ["100644", "100755"];

impl GitCli {
    pub fn open(repo: impl AsRef<Path>) -> Result<GitCli, SynthError> {
        let repo = repo.as_ref().to_path_buf();
        let cli = GitCli { repo };
        cli.run(&["rev-parse", "--git-dir"])?;
        Ok(cli)
    }

    fn command(&self) -> Command {
        let mut c = Command::new("git");
        c.arg("-C").arg(&self.repo).env("GIT_CONFIG_NOSYSTEM", "1").env("LC_ALL", "C");
        c
    }

    fn run(&self, args: &[&str]) -> Result<Vec<u8>, SynthError> {
        let out = self
            .command()
            .args(args)
            .stdin(Stdio::null())
            .output()
            .map_err(|e| SynthError::Git(format!("cannot run git: {e}")))?;
        if !out.status.success() {
            return Err(SynthError::Git(format!(
                "git {} failed: {}",
                args.join(" "),
                String::from_utf8_lossy(&out.stderr).trim()
            )));
        }
        Ok(out.stdout)
    }

    fn has_head(&self) -> Result<bool, SynthError> {
        let status = self
            .command()
            .args(["rev-parse", "--verify", "-q", "HEAD"])
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .status()
            .map_err(|e| SynthError::Git(format!("cannot run git: {e}")))?;
        Ok(status.success())
    }
}

fn utf8(bytes: Vec<u8>) -> Result<String, SynthError> {
    String::from_utf8(bytes).map_err(|_| SynthError::Git("git output is not UTF-8".into()))
}

fn regular(mode: &str, id: &str) -> Option<String> {
    REGULAR_MODES.contains(&mode).then(|| id.to_string())
}

impl HistoryReader for GitCli {
    fn commits(&self) -> Result<Vec<CommitInfo>, SynthError> {
        if !self.has_head()? {
            return Ok(Vec::new());
        }
        let out = utf8(self.run(&["log", "--first-parent", "--reverse", "-z", "--format=%H%n%P%n%B", "HEAD"])?)?;
        let mut commits = Vec::new();
        for rec in out.split('\0').filter(|r| !r.is_empty()) {
            let mut parts = rec.splitn(3, '\n');
            let id = parts.next().unwrap_or_default().to_string();
            let parent = parts.next().unwrap_or_default().split(' ').next().filter(|p| !p.is_empty()).map(str::to_string);
            let message = parts.next().unwrap_or_default().trim_end_matches('\n').to_string();
            commits.push(CommitInfo { id, parent, message });
        }
        Ok(commits)
    }

    fn changes(&self, commit: &CommitInfo) -> Result<Vec<FileChange>, SynthError> {
        let mut args = vec!["diff-tree", "-r", "--no-renames", "--no-commit-id", "-z"];
        match &commit.parent {
            Some(p) => {
                args.push(p);
                args.push(&commit.id);
            }
            None => {
                args.push("--root");
                args.push(&commit.id);
            }
        }
        let out = self.run(&args)?;
        let mut fields = out.split(|&b| b == 0);
        let mut changes = Vec::new();
        while let Some(meta) = fields.next() {
            if meta.is_empty() {
                continue;
            }
            let meta = std::str::from_utf8(meta).map_err(|_| SynthError::Git("bad diff-tree output".into()))?;
            let path = fields.next().ok_or_else(|| SynthError::Git("truncated diff-tree output".into()))?;
            let path = String::from_utf8(path.to_vec()).map_err(|_| SynthError::Git("non-UTF-8 path".into()))?;
            let m: Vec<&str> = meta.trim_start_matches(':').split(' ').collect();
            if m.len() < 5 {
                return Err(SynthError::Git(format!("bad diff-tree line {meta:?}")));
            }
            let old = regular(m[0], m[2]);
            let new = regular(m[1], m[3]);
            if old != new {
                changes.push(FileChange { path, old, new });
            }
        }
        changes.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(changes)
    }

    fn blobs(&self, ids: &[&str]) -> Result<HashMap<String, Vec<u8>>, SynthError> {
        let mut map = HashMap::new();
        if ids.is_empty() {
            return Ok(map);
        }
        let mut child = self
            .command()
            .args(["cat-file", "--batch"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SynthError::Git(format!("cannot run git: {e}")))?;
        let mut stdin = child.stdin.take().expect("piped");
        let input: String = ids.iter().map(|id| format!("{id}\n")).collect();
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let out = child.wait_with_output().map_err(|e| SynthError::Git(e.to_string()))?;
        writer
            .join()
            .expect("writer thread")
            .map_err(|e| SynthError::Git(format!("cat-file: {e}")))?;
        let buf = out.stdout;
        let mut pos = 0;
        for id in ids {
            let nl = buf[pos..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| SynthError::Git("truncated cat-file output".into()))?;
            let header = std::str::from_utf8(&buf[pos..pos + nl]).unwrap_or_default();
            let parts: Vec<&str> = header.split(' ').collect();
            if parts.len() != 3 || parts[1] != "blob" {
                return Err(SynthError::Git(format!("cannot read blob {id}: {header}")));
            }
            let size: usize = parts[2].parse().map_err(|_| SynthError::Git("bad blob size".into()))?;
            let start = pos + nl + 1;
            let end = start + size;
            if end + 1 > buf.len() {
                return Err(SynthError::Git("truncated cat-file output".into()));
            }
            map.insert(id.to_string(), buf[start..end].to_vec());
            pos = end + 1;
        }
        Ok(map)
    }

    fn tree(&self, commit: &str) -> Result<BTreeMap<String, String>, SynthError> {
        let out = self.run(&["ls-tree", "-r", "-z", commit])?;
        let mut map = BTreeMap::new();
        for rec in out.split(|&b| b == 0).filter(|r| !r.is_empty()) {
            let rec = std::str::from_utf8(rec).map_err(|_| SynthError::Git("non-UTF-8 path".into()))?;
            let (meta, path) = rec.split_once('\t').ok_or_else(|| SynthError::Git("bad ls-tree output".into()))?;
            let m: Vec<&str> = meta.split(' ').collect();
            if m.len() == 3 {
                if let Some(id) = regular(m[0], m[2]) {
                    map.insert(path.to_string(), id);
                }
            }
        }
        Ok(map)
    }
}
