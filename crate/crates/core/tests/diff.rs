use std::path::Path;
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termforge::diff::*;

fn lcs<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for i in (0..a.len()).rev() {
        for j in (0..b.len()).rev() {
            dp[i][j] = if a[i] == b[j] { dp[i + 1][j + 1] + 1 } else { dp[i + 1][j].max(dp[i][j + 1]) };
        }
    }
    dp[0][0]
}

fn random_text(rng: &mut ChaCha8Rng) -> String {
    let pool = ["alpha", "beta", "", "gamma", "  indented", "x\r", "caf\u{e9}"];
    let n = rng.gen_range(0..25);
    let mut s: Vec<&str> = (0..n).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
    if rng.gen_bool(0.7) {
        s.push("");
    }
    s.join("\n")
}

fn mutate(rng: &mut ChaCha8Rng, text: &str) -> String {
    let mut lines: Vec<String> = text.split('\n').map(str::to_string).collect();
    for _ in 0..rng.gen_range(0..5) {
        let at = rng.gen_range(0..=lines.len());
        match rng.gen_range(0..3) {
            0 => lines.insert(at, format!("new{}", rng.gen_range(0..5))),
            1 if at < lines.len() => {
                lines.remove(at);
            }
            _ if at < lines.len() => lines[at].push('!'),
            _ => {}
        }
    }
    lines.join("\n")
}

fn pairs(n: usize, seed: u64) -> Vec<(String, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let a = random_text(&mut rng);
            let b = if i % 3 == 0 { random_text(&mut rng) } else { mutate(&mut rng, &a) };
            (a, b)
        })
        .collect()
}

#[test]
fn line_scripts_apply_and_are_minimal() {
    for (a, b) in pairs(1000, 1) {
        let e = diff_lines(&a, &b);
        assert_eq!(apply_line_edits(&a, &e), b);
        let la: Vec<&str> = a.split('\n').collect();
        let lb: Vec<&str> = b.split('\n').collect();
        let cost: usize = e.iter().map(|e| e.old_len + e.new_lines.len()).sum();
        assert_eq!(cost, la.len() + lb.len() - 2 * lcs(&la, &lb), "{a:?} -> {b:?}");
    }
}

#[test]
fn char_scripts_apply_and_are_minimal() {
    for (a, b) in pairs(1000, 2) {
        let a: Vec<char> = a.chars().take(60).collect();
        let b: Vec<char> = b.chars().take(60).collect();
        let e = diff_chars(&a, &b);
        assert_eq!(apply_char_edits(&a, &e), b);
        let cost: usize = e.iter().map(|e| e.old_len + e.new.len()).sum();
        assert_eq!(cost, a.len() + b.len() - 2 * lcs(&a, &b));
    }
}

#[test]
fn unified_diffs_apply_at_every_context_level() {
    for (a, b) in pairs(1000, 3) {
        for ctx in [Context::Full, Context::U1, Context::U0] {
            let p = unified_diff(&a, &b, "f.txt", ctx);
            assert_eq!(apply_unified(&a, &p).unwrap(), b, "{ctx}\n{p}");
            if ctx == Context::Full && !p.is_empty() {
                assert_eq!(p.matches("\n@@ -").count(), 1);
            }
        }
    }
}

fn git_apply(dir: &Path, initial: &str, patch: &str, zero: bool) -> String {
    let f = dir.join("f.txt");
    std::fs::write(&f, initial).unwrap();
    std::fs::write(dir.join("p.diff"), patch).unwrap();
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(dir).args(["apply", "--unsafe-paths"]);
    if zero {
        cmd.arg("--unidiff-zero");
    }
    let out = cmd.arg("p.diff").env("GIT_CONFIG_GLOBAL", "/dev/null").output().unwrap();
    assert!(out.status.success(), "{}\n{patch}", String::from_utf8_lossy(&out.stderr));
    std::fs::read_to_string(f).unwrap()
}

#[test]
fn git_accepts_generated_patches() {
    let dir = tempfile::tempdir().unwrap();
    Command::new("git").arg("-C").arg(dir.path()).args(["init", "-q"]).output().unwrap();
    for (a, b) in pairs(120, 4) {
        for ctx in [Context::Full, Context::U1, Context::U0] {
            let p = unified_diff(&a, &b, "f.txt", ctx);
            if p.is_empty() {
                continue;
            }
            assert_eq!(git_apply(dir.path(), &a, &p, ctx == Context::U0), b, "{ctx}\n{p}");
        }
    }
}

#[test]
fn applier_is_strict() {
    let p = unified_diff("a\nb\nc\n", "a\nB\nc\n", "f", Context::U1);
    assert!(matches!(apply_unified("a\nx\nc\n", &p), Err(PatchError::Mismatch { .. })));
    assert!(apply_unified("a\n", "@@ -x +1 @@\n").is_err());
    assert!(apply_unified("a\n", "@@ -1 +1 @@\n?a\n").is_err());
}
