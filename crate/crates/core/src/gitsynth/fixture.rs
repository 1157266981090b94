//! Deterministic on-disk repositories for tests and demos.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;
use std::process::Command;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::seed::{rng_from, Rng};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FixtureStats {
    /// Commits on the first-parent chain of the final branch.
    pub commits: usize,
    pub renames: usize,
    pub deletions: usize,
    pub merges: usize,
    pub binary_files: usize,
}

const WORDS: &[&str] = &[
    "value", "count", "index", "buffer", "result", "state", "config", "parse", "render", "update",
    "frame", "cursor", "token", "offset", "length", "reader", "writer", "handle", "node", "entry",
];

const DIRS: &[&str] = &["", "src/", "src/util/", "docs/", "tests/", "my dir/"];
const EXTS: &[&str] = &["rs", "py", "md", "txt", "c"];

const SYLLABLES: &[&str] = &[
    "ka", "lo", "mi", "ter", "zen", "pra", "vu", "sol", "nix", "dor", "ble", "qua", "fen", "gri", "hob", "jul",
    "wex", "tan", "rim", "cho", "sta", "bri", "mon", "pel", "dra", "vik", "lux", "fo", "yar", "esk",
];

/// A common word most of the time, otherwise a made-up one, so longer
/// histories keep introducing new identifiers.
fn word(rng: &mut Rng) -> String {
    if rng.gen_bool(0.75) {
        return WORDS.choose(rng).unwrap().to_string();
    }
    (0..rng.gen_range(2..4)).map(|_| *SYLLABLES.choose(rng).unwrap()).collect()
}

fn ident(rng: &mut Rng) -> String {
    let a = &word(rng);
    match rng.gen_range(0..4) {
        0 => a.to_string(),
        1 => format!("{a}_{}", word(rng)),
        2 => {
            let b = word(rng);
            format!("{a}{}{}", b[..1].to_uppercase(), &b[1..])
        }
        _ => format!("{a}{}", rng.gen_range(0..10)),
    }
}

fn code_line(rng: &mut Rng) -> String {
    let indent = " ".repeat(4 * rng.gen_range(0..3));
    let body = match rng.gen_range(0..9) {
        0 => format!("let {} = {}({});", ident(rng), ident(rng), ident(rng)),
        1 => format!("if {} > {} {{", ident(rng), rng.gen_range(0..100)),
        2 => "}".to_string(),
        3 => format!("// {} the {} before {}", ident(rng), ident(rng), ident(rng)),
        4 => format!("fn {}(&mut self, {}: usize) -> usize {{", ident(rng), ident(rng)),
        5 => format!("return {} + {};", ident(rng), ident(rng)),
        6 => format!("println!(\"{}: {{}}\", {});", ident(rng), ident(rng)),
        7 => String::new(),
        _ => format!("{}.{}({}, \"caf\u{e9} \u{2713}\");", ident(rng), ident(rng), rng.gen_range(0..9)),
    };
    if body.is_empty() {
        body
    } else {
        indent + &body
    }
}

fn new_file(rng: &mut Rng, lines: usize) -> String {
    let mut s: Vec<String> = (0..lines).map(|_| code_line(rng)).collect();
    if rng.gen_bool(0.85) {
        s.push(String::new());
    }
    s.join("\n")
}

fn mutate(rng: &mut Rng, text: &str) -> String {
    let mut lines: Vec<String> = text.split('\n').map(str::to_string).collect();
    for _ in 0..rng.gen_range(1..5) {
        let n = lines.len();
        let at = rng.gen_range(0..n);
        match rng.gen_range(0..6) {
            0 | 1 => {
                // Small in-line tweak.
                let mut chars: Vec<char> = lines[at].chars().collect();
                let pos = rng.gen_range(0..=chars.len());
                let word: Vec<char> = ident(rng).chars().collect();
                let del = rng.gen_range(0..=(chars.len() - pos).min(4));
                chars.splice(pos..pos + del, word);
                lines[at] = chars.into_iter().collect();
            }
            2 => lines[at] = code_line(rng),
            3 => {
                for k in 0..rng.gen_range(1..6) {
                    lines.insert(at + k, code_line(rng));
                }
            }
            4 if n > 2 => {
                let k = rng.gen_range(1..=(n - 1).min(4));
                let start = at.min(n - k);
                lines.drain(start..start + k);
            }
            _ => {
                let k = rng.gen_range(1..4);
                for _ in 0..k {
                    lines.insert(at, code_line(rng));
                }
            }
        }
    }
    lines.join("\n")
}

fn message(rng: &mut Rng, i: usize) -> String {
    let verb = ["Fix", "Add", "Refactor", "Update", "Remove"].choose(rng).unwrap();
    let mut m = format!("{verb} {} handling ({i})", ident(rng));
    match rng.gen_range(0..5) {
        0 => m.push_str("\n\nBody with \"quotes\", a back\\slash and caf\u{e9}.\n- item one\n- item two"),
        1 => m.push_str("\n\nSecond paragraph."),
        _ => {}
    }
    m
}

struct Repo<'a> {
    dir: &'a Path,
    clock: u64,
}

impl Repo<'_> {
    fn git(&mut self, args: &[&str]) -> io::Result<()> {
        self.clock += 60;
        let date = format!("{} +0000", 1_577_836_800 + self.clock);
        let out = Command::new("git")
            .arg("-C")
            .arg(self.dir)
            .args(["-c", "commit.gpgsign=false", "-c", "core.autocrlf=false", "-c", "init.defaultBranch=main"])
            .args(args)
            .env("GIT_CONFIG_NOSYSTEM", "1")
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .env("GIT_AUTHOR_NAME", "Fixture")
            .env("GIT_AUTHOR_EMAIL", "fixture@example.com")
            .env("GIT_COMMITTER_NAME", "Fixture")
            .env("GIT_COMMITTER_EMAIL", "fixture@example.com")
            .env("GIT_AUTHOR_DATE", &date)
            .env("GIT_COMMITTER_DATE", &date)
            .output()?;
        if !out.status.success() {
            return Err(io::Error::other(format!(
                "git {}: {}",
                args.join(" "),
                String::from_utf8_lossy(&out.stderr)
            )));
        }
        Ok(())
    }

    fn sync(&self, files: &BTreeMap<String, Vec<u8>>, removed: &mut Vec<String>) -> io::Result<()> {
        for p in removed.drain(..) {
            let full = self.dir.join(&p);
            if full.exists() {
                std::fs::remove_file(full)?;
            }
        }
        for (p, c) in files {
            let full = self.dir.join(p);
            if let Some(parent) = full.parent() {
                std::fs::create_dir_all(parent)?;
            }
            if std::fs::read(&full).ok().as_deref() != Some(c.as_slice()) {
                std::fs::write(full, c)?;
            }
        }
        Ok(())
    }

    fn commit(&mut self, msg: &str) -> io::Result<()> {
        self.git(&["add", "-A"])?;
        self.git(&["commit", "-q", "--allow-empty", "-m", msg])
    }
}

/// Builds a repository with `commits` first-parent commits of code-like
/// edits, including creations, deletions, renames, a binary file, a file
/// without a trailing newline, CRLF line endings and (for 10 or more
/// commits) one merge.
pub fn build_fixture_repo(dir: &Path, commits: usize, seed: u64) -> io::Result<FixtureStats> {
    std::fs::create_dir_all(dir)?;
    let mut repo = Repo { dir, clock: 0 };
    repo.git(&["init", "-q"])?;
    let mut stats = FixtureStats::default();
    if commits == 0 {
        return Ok(stats);
    }
    let mut rng = rng_from(seed);
    let mut files: BTreeMap<String, Vec<u8>> = BTreeMap::new();
    let mut removed = Vec::new();
    let merge_at = (commits >= 10).then_some(commits / 2);

    for i in 0..commits {
        if i == 0 {
            files.insert("README.md".into(), b"# Fixture\n\nA generated project.\n".to_vec());
            files.insert("src/main.rs".into(), new_file(&mut rng, 80).into_bytes());
            files.insert("notes.txt".into(), b"no trailing newline".to_vec());
            files.insert("win.txt".into(), b"line one\r\nline two\r\n".to_vec());
            files.insert("empty.txt".into(), Vec::new());
            files.insert("assets/logo.bin".into(), vec![0, 159, 146, 150, 255, 0, 1]);
            stats.binary_files += 1;
        } else if Some(i) == merge_at {
            // Side branch touching its own file, merged back without fast-forward.
            repo.sync(&files, &mut removed)?;
            repo.git(&["checkout", "-q", "-b", "side"])?;
            let side_path = "src/side.rs".to_string();
            files.insert(side_path.clone(), new_file(&mut rng, 12).into_bytes());
            repo.sync(&files, &mut removed)?;
            repo.commit("Side branch work")?;
            let t = mutate(&mut rng, std::str::from_utf8(&files[&side_path]).unwrap());
            files.insert(side_path, t.into_bytes());
            repo.sync(&files, &mut removed)?;
            repo.commit("More side work")?;
            repo.git(&["checkout", "-q", "main"])?;
            let readme = format!(
                "{}Merged side branch.\n",
                String::from_utf8_lossy(files.get("README.md").map_or(&[][..], |v| v.as_slice()))
            );
            files.insert("README.md".into(), readme.into_bytes());
            // README is only touched on main, the side file only on side.
            let mut main_files = files.clone();
            main_files.remove("src/side.rs");
            std::fs::remove_file(dir.join("src/side.rs")).ok();
            repo.sync(&main_files, &mut removed)?;
            repo.commit("Prepare merge")?;
            repo.git(&["merge", "-q", "--no-ff", "side", "-m", "Merge branch 'side'"])?;
            stats.merges += 1;
            stats.commits += 2;
            continue;
        } else {
            let text_paths: Vec<String> = files
                .iter()
                .filter(|(p, c)| std::str::from_utf8(c).is_ok() && !p.ends_with(".bin"))
                .map(|(p, _)| p.clone())
                .collect();
            let ops = rng.gen_range(1..4);
            for _ in 0..ops {
                match rng.gen_range(0..12) {
                    0 => {
                        let p = format!(
                            "{}{}.{}",
                            DIRS.choose(&mut rng).unwrap(),
                            ident(&mut rng),
                            EXTS.choose(&mut rng).unwrap()
                        );
                        let n = rng.gen_range(0..30);
                        files.entry(p).or_insert_with(|| new_file(&mut rng, n).into_bytes());
                    }
                    1 if text_paths.len() > 4 => {
                        let p = text_paths.choose(&mut rng).unwrap();
                        if files.remove(p).is_some() {
                            removed.push(p.clone());
                            stats.deletions += 1;
                        }
                    }
                    2 if !text_paths.is_empty() => {
                        let p = text_paths.choose(&mut rng).unwrap().clone();
                        if let Some(c) = files.remove(&p) {
                            let q = format!("{}{}", DIRS.choose(&mut rng).unwrap(), p.rsplit('/').next().unwrap());
                            let q = if q == p || files.contains_key(&q) { format!("{p}.moved") } else { q };
                            files.insert(q, c);
                            removed.push(p);
                            stats.renames += 1;
                        }
                    }
                    3 => {
                        let mut b = files["assets/logo.bin"].clone();
                        b.push(rng.gen());
                        files.insert("assets/logo.bin".into(), b);
                    }
                    _ if !text_paths.is_empty() => {
                        let p = text_paths.choose(&mut rng).unwrap();
                        if let Some(c) = files.get(p) {
                            let t = mutate(&mut rng, std::str::from_utf8(c).unwrap());
                            files.insert(p.clone(), t.into_bytes());
                        }
                    }
                    _ => {}
                }
            }
        }
        repo.sync(&files, &mut removed)?;
        repo.commit(&message(&mut rng, i))?;
        stats.commits += 1;
    }
    Ok(stats)
}
