//! A tiny line shell: enough to remove files and to type version-control
//! commands whose messages are logged.

use super::vfs::Vfs;
use crate::seed::mix64;

pub const PROMPT: &str = "$ ";
const SCROLLBACK: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommitRecord {
    pub id: String,
    pub message: String,
}

/// What a command did besides printing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ShellEffect {
    None,
    Removed(String),
    Committed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Shell {
    pub scrollback: Vec<String>,
    pub input: String,
    pub commits: Vec<CommitRecord>,
    staged: bool,
}

impl Shell {
    pub fn type_char(&mut self, ch: char) {
        self.input.push(ch);
    }

    pub fn backspace(&mut self) {
        self.input.pop();
    }

    /// Runs the current input line.
    pub fn enter(&mut self, vfs: &mut Vfs) -> ShellEffect {
        let line = std::mem::take(&mut self.input);
        self.print(format!("{PROMPT}{line}"));
        let args = match split_args(&line) {
            Ok(a) => a,
            Err(e) => {
                self.print(format!("sh: {e}"));
                return ShellEffect::None;
            }
        };
        let effect = self.run(&args, vfs);
        if self.scrollback.len() > SCROLLBACK {
            let excess = self.scrollback.len() - SCROLLBACK;
            self.scrollback.drain(..excess);
        }
        effect
    }

    fn print(&mut self, line: String) {
        self.scrollback.push(line);
    }

    fn run(&mut self, args: &[String], vfs: &mut Vfs) -> ShellEffect {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        match argv.as_slice() {
            [] => ShellEffect::None,
            ["clear"] => {
                self.scrollback.clear();
                ShellEffect::None
            }
            ["ls"] => {
                let paths: Vec<String> = vfs.paths().map(str::to_string).collect();
                for p in paths {
                    self.print(p);
                }
                ShellEffect::None
            }
            ["rm", path] => {
                if vfs.remove(path).is_some() {
                    self.staged = true;
                    ShellEffect::Removed(path.to_string())
                } else {
                    self.print(format!("rm: cannot remove '{path}': No such file or directory"));
                    ShellEffect::None
                }
            }
            ["git", "add", ..] => {
                self.staged = true;
                ShellEffect::None
            }
            ["git", "commit", rest @ ..] => self.commit(rest, vfs),
            [cmd, ..] => {
                self.print(format!("sh: {cmd}: command not found"));
                ShellEffect::None
            }
        }
    }

    fn commit(&mut self, rest: &[&str], vfs: &Vfs) -> ShellEffect {
        let mut parts = Vec::new();
        let mut it = rest.iter();
        while let Some(a) = it.next() {
            match *a {
                "-m" => match it.next() {
                    Some(m) => parts.push(m.to_string()),
                    None => {
                        self.print("error: switch `m' requires a value".into());
                        return ShellEffect::None;
                    }
                },
                "-a" | "--allow-empty" => {}
                other => {
                    self.print(format!("error: unknown option `{other}'"));
                    return ShellEffect::None;
                }
            }
        }
        if parts.is_empty() {
            self.print("Aborting commit due to empty commit message.".into());
            return ShellEffect::None;
        }
        let message = parts.join("\n\n");
        let n = self.commits.len() as u64;
        let id = format!("{:07x}", mix64(n ^ vfs.fingerprint()) & 0xfff_ffff);
        let subject = message.lines().next().unwrap_or("").to_string();
        self.print(format!("[main {id}] {subject}"));
        self.print(format!(" {} files tracked", vfs.len()));
        self.commits.push(CommitRecord { id, message });
        self.staged = false;
        ShellEffect::Committed
    }
}

/// Splits a command line on spaces; double quotes group, and inside them
/// `\\`, `\"`, `\n` and `\xHH` are escapes.
pub fn split_args(line: &str) -> Result<Vec<String>, String> {
    let mut args = Vec::new();
    let mut cur = String::new();
    let mut in_word = false;
    let mut chars = line.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            ' ' => {
                if in_word {
                    args.push(std::mem::take(&mut cur));
                    in_word = false;
                }
            }
            '"' => {
                in_word = true;
                loop {
                    match chars.next() {
                        None => return Err("unterminated quote".into()),
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some('n') => cur.push('\n'),
                            Some('\\') => cur.push('\\'),
                            Some('"') => cur.push('"'),
                            Some('x') => {
                                let hex: String = chars.by_ref().take(2).collect();
                                let v = u32::from_str_radix(&hex, 16).map_err(|_| "bad \\x escape".to_string())?;
                                cur.push(char::from_u32(v).ok_or("bad \\x escape")?);
                            }
                            Some(o) => {
                                cur.push('\\');
                                cur.push(o);
                            }
                            None => return Err("unterminated quote".into()),
                        },
                        Some(o) => cur.push(o),
                    }
                }
            }
            o => {
                in_word = true;
                cur.push(o);
            }
        }
    }
    if in_word {
        args.push(cur);
    }
    Ok(args)
}

/// Quotes `s` so that [`split_args`] yields it back as one argument and the
/// quoted form contains only typeable, single-line characters.
pub fn quote_arg(s: &str) -> String {
    let mut q = String::with_capacity(s.len() + 2);
    q.push('"');
    for c in s.chars() {
        match c {
            '\\' => q.push_str("\\\\"),
            '"' => q.push_str("\\\""),
            '\n' => q.push_str("\\n"),
            c if (c as u32) < 0x20 && c != '\t' || c == '\u{7f}' => {
                q.push_str(&format!("\\x{:02x}", c as u32));
            }
            c => q.push(c),
        }
    }
    q.push('"');
    q
}
