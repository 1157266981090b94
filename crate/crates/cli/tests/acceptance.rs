//! End-to-end acceptance checks, driven through the `termforge` binary.
//! Prints one PASS/FAIL line per criterion and exits nonzero if any fail.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use termforge::acttok::ActionVocab;
use termforge::frjt::Program;
use termforge::gitsynth::{build_fixture_repo, replayable, FixtureStats};
use termforge::maze::{maze_for_seed, Direction, Feedback, MazeRecord, MAZE_SIZE};
use termforge::termemu::{Action, Cell, Control, Frame, Session, Style};
use termforge::tszx;

// Pinned targets and tolerances.
const FLOP_TOTAL: f64 = 2.8767e14;
const FLOP_HEAD_SHARE: f64 = 0.9312;
const FLOP_MAIN_SHARE: f64 = 0.0688;
const FLOP_REL_TOL: f64 = 1e-4;
const FAST_LIMIT: Duration = Duration::from_secs(1);

#[allow(clippy::approx_constant)]
const ALPHA_TARGET: (f64, f64) = (0.318, 0.02);
const A_TARGET: (f64, f64) = (4.96, 0.35);
const R2_MIN: f64 = 0.98;

const ALPHA_INF_BAND: (f64, f64) = (0.28, 0.34);
const TAU_BAND: (f64, f64) = (570.0, 870.0);

const AMORTIZE_LENGTHS: &str = "2,4,16,128,512,1024";
const AMORTIZE_PAIRS: usize = 15;

const CODEC_ROUND_TRIPS: u64 = 1000;
const CODEC_MIN_RATIO: f64 = 100.0;
const CODEC_LIMIT: Duration = Duration::from_secs(60);

const FRJT_MAX_DEPTH: usize = 8;
const FRJT_PER_DEPTH: usize = 8000;
const FRJT_A_BAND: (f64, f64) = (0.47, 0.53);
const FRJT_COVERAGE_BAND: (f64, f64) = (0.40, 0.60);

const MAZE_TRAJECTORIES: usize = 10_000;

const TOK_ROUND_TRIPS: u64 = 10_000;
const TOK_VOCAB: usize = 20_000;

const MIN_ACTIONS_PER_SECOND: f64 = 50_000.0;

/// (commits, seed) of the fixture repositories.
const REPOS: [(usize, u64); 3] = [(50, 1), (120, 2), (120, 3)];

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&Env) -> Check);

fn tf(cwd: &Path, args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_termforge")).current_dir(cwd).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

/// Runs the binary and fails the check on a nonzero exit.
fn tf_ok(cwd: &Path, args: &[&str]) -> Result<String, String> {
    let (code, out, err) = tf(cwd, args);
    if code != 0 {
        return Err(format!("`termforge {}` exited {code}: {}", args.join(" "), err.trim()));
    }
    Ok(out)
}

fn kv(text: &str) -> HashMap<String, String> {
    text.lines().filter_map(|l| l.split_once('=')).map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn num(map: &HashMap<String, String>, key: &str) -> Result<f64, String> {
    map.get(key).ok_or_else(|| format!("missing {key}"))?.parse().map_err(|_| format!("bad {key}"))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel(x: f64, target: f64) -> f64 {
    (x - target).abs() / target.abs()
}

struct Env {
    dir: tempfile::TempDir,
    repos: Vec<(PathBuf, FixtureStats)>,
    streams: Vec<PathBuf>,
}

impl Env {
    fn path(&self) -> &Path {
        self.dir.path()
    }
}

fn flop_table(env: &Env) -> Check {
    let cfg = env.path().join("flops.cfg");
    std::fs::write(&cfg, "B = 512\nD = 768\nN_f = 7680\nP = 2\nL_t = 3\nT_s = 1024\nL_s = 2\nH = 768\n").unwrap();
    let t = Instant::now();
    let out = tf_ok(env.path(), &["scaling", "flops", "--config", cfg.to_str().unwrap(), "--table"])?;
    let took = t.elapsed();
    let m = kv(&out);
    let (total, head, main) = (num(&m, "total")?, num(&m, "frame_head_share")?, num(&m, "main_share")?);
    ensure(rel(total, FLOP_TOTAL) <= FLOP_REL_TOL, || format!("total {total:e}"))?;
    ensure(rel(head, FLOP_HEAD_SHARE) <= FLOP_REL_TOL, || format!("frame-head share {head}"))?;
    ensure(rel(main, FLOP_MAIN_SHARE) <= FLOP_REL_TOL, || format!("main share {main}"))?;
    ensure(out.contains("2.8767e14") && out.contains("93.12%") && out.contains("6.88%"), || "table text".into())?;
    ensure(took < FAST_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("total={total:.4e} frame_head={:.2}% main={:.2}% in {took:.0?}", 100.0 * head, 100.0 * main))
}

fn power_fit(env: &Env) -> Check {
    let pts = env.path().join("loss_4000.txt");
    std::fs::write(&pts, "# L loss\n2 4.69\n4 3.01\n16 1.88\n128 1.01\n512 0.71\n1024 0.61\n").unwrap();
    let t = Instant::now();
    let m = kv(&tf_ok(env.path(), &["scaling", "fit", "--points", pts.to_str().unwrap()])?);
    let took = t.elapsed();
    let (alpha, a, r2) = (num(&m, "alpha")?, num(&m, "a")?, num(&m, "r2")?);
    ensure((alpha - ALPHA_TARGET.0).abs() <= ALPHA_TARGET.1, || format!("alpha {alpha}"))?;
    ensure((a - A_TARGET.0).abs() <= A_TARGET.1, || format!("A {a}"))?;
    ensure(r2 >= R2_MIN, || format!("R2 {r2}"))?;
    ensure(took < FAST_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("alpha={alpha:.4} A={a:.4} R2={r2:.4} in {took:.0?}"))
}

fn alpha_points(env: &Env) -> PathBuf {
    let p = env.path().join("alpha.txt");
    std::fs::write(&p, "400 0.129\n650 0.196\n4000 0.318\n").unwrap();
    p
}

fn alpha_dynamics(env: &Env) -> Check {
    let p = alpha_points(env);
    let m = kv(&tf_ok(env.path(), &["scaling", "fit", "--dynamics", "--points", p.to_str().unwrap()])?);
    let (ai, tau) = (num(&m, "alpha_inf")?, num(&m, "tau")?);
    ensure((ALPHA_INF_BAND.0..=ALPHA_INF_BAND.1).contains(&ai), || format!("alpha_inf {ai}"))?;
    ensure((TAU_BAND.0..=TAU_BAND.1).contains(&tau), || format!("tau {tau}"))?;
    Ok(format!("alpha_inf={ai:.4} tau={tau:.1}"))
}

fn amortization(env: &Env) -> Check {
    let al = alpha_points(env);
    let ap = env.path().join("a.txt");
    std::fs::write(&ap, "400 5.65\n650 5.80\n4000 4.96\n").unwrap();
    let out = tf_ok(
        env.path(),
        &["scaling", "amortize", "--a-points", ap.to_str().unwrap(), "--alpha-points", al.to_str().unwrap(), "--lengths", AMORTIZE_LENGTHS],
    )?;
    let m = kv(&out);
    let (pairs, found, persistent) = (num(&m, "pairs")?, num(&m, "crossovers")?, num(&m, "persistent")?);
    ensure(pairs as usize == AMORTIZE_PAIRS, || format!("{pairs} pairs"))?;
    ensure(found as usize == AMORTIZE_PAIRS && persistent as usize == AMORTIZE_PAIRS, || {
        format!("{found} crossovers, {persistent} persistent")
    })?;
    // Every table row names a finite crossover time.
    let rows: Vec<&str> = out.lines().skip(1).take_while(|l| !l.trim().is_empty()).collect();
    ensure(rows.len() == AMORTIZE_PAIRS, || format!("{} rows", rows.len()))?;
    for r in &rows {
        let cols: Vec<&str> = r.split_whitespace().collect();
        let t: f64 = cols[2].parse().map_err(|_| format!("row {r:?}"))?;
        ensure(t.is_finite() && cols[3] == "true", || format!("row {r:?}"))?;
    }
    Ok(format!("{AMORTIZE_PAIRS}/{AMORTIZE_PAIRS} pairs cross and stay crossed"))
}

fn random_cell(rng: &mut ChaCha8Rng) -> Cell {
    let ch = match rng.gen_range(0..10) {
        0 => char::from_u32(rng.gen_range(0x100..0x3000)).unwrap_or('?'),
        1 => ' ',
        _ => rng.gen_range(b'a'..=b'f') as char,
    };
    let style = if rng.gen_bool(0.7) { Style::PLAIN } else { Style(rng.gen()) };
    Cell::new(ch, style)
}

fn random_stream(seed: u64) -> (Vec<Frame>, Vec<Action>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (rng.gen_range(1..60u16), rng.gen_range(1..20u16));
    let mut frames: Vec<Frame> = Vec::new();
    for _ in 0..rng.gen_range(0..16) {
        let mut f = match frames.last() {
            Some(p) if rng.gen_bool(0.7) => p.clone(),
            _ => Frame::new(w, h).unwrap(),
        };
        for _ in 0..rng.gen_range(0..(w as usize * h as usize / 4) + 2) {
            let (x, y) = (rng.gen_range(0..w as usize), rng.gen_range(0..h as usize));
            let c = random_cell(&mut rng);
            f.fill(x, y, rng.gen_range(1..8), c);
        }
        frames.push(f);
    }
    let actions = (1..frames.len())
        .map(|_| match rng.gen_range(0..4) {
            0 => Action::Backspace,
            1 => Action::Control(Control::Open(format!("dir/f{}.rs", rng.gen_range(0..100)))),
            2 => Action::Control(Control::Save),
            _ => Action::Insert(char::from_u32(rng.gen_range(0x20..0x3000)).unwrap_or('x')),
        })
        .collect();
    (frames, actions)
}

fn codec(env: &Env) -> Check {
    let t = Instant::now();
    for seed in 0..CODEC_ROUND_TRIPS {
        let (frames, actions) = random_stream(seed);
        let bytes = tszx::encode(&frames, &actions).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = tszx::decode(&bytes).map_err(|e| format!("seed {seed}: {e}"))?;
        ensure(back == (frames, actions), || format!("seed {seed} differs after decoding"))?;
    }
    // Through the binary: decode the fixture stream and re-encode its actions.
    let stream = &env.streams[0];
    let m = kv(&tf_ok(env.path(), &["tszx", "inspect", "--input", stream.to_str().unwrap()])?);
    let ratio = num(&m, "ratio")?;
    ensure(ratio >= CODEC_MIN_RATIO, || format!("fixture ratio {ratio}"))?;
    let dec = env.path().join("decoded");
    tf_ok(env.path(), &["tszx", "decode", "--input", stream.to_str().unwrap(), "--out", dec.to_str().unwrap()])?;
    let again = env.path().join("again.tszx");
    tf_ok(env.path(), &["tszx", "encode", "--actions", dec.join("actions.log").to_str().unwrap(), "--out", again.to_str().unwrap()])?;
    ensure(std::fs::read(&again).unwrap() == std::fs::read(stream).unwrap(), || "re-encoded stream differs".into())?;
    let took = t.elapsed();
    ensure(took < CODEC_LIMIT, || format!("took {took:?}"))?;
    Ok(format!("{CODEC_ROUND_TRIPS} round-trips, fixture ratio {ratio:.1}x, re-encode identical, {took:.1?}"))
}

fn git_show(repo: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new("git").arg("-C").arg(repo).args(args).output().unwrap();
    assert!(out.status.success(), "git {args:?}");
    out.stdout
}

fn git_replay(env: &Env) -> Check {
    let mut mismatches = 0usize;
    let mut summary = Vec::new();
    for ((repo, stats), stream) in env.repos.iter().zip(&env.streams) {
        let bytes = std::fs::read(stream).unwrap();
        let actions = tszx::decode_actions(&bytes).map_err(|e| e.to_string())?;
        let mut d = tszx::Decoder::new(&bytes).map_err(|e| e.to_string())?;
        let mut s = Session::new(d.header().width, d.header().height).unwrap();
        let mut k = 0;
        while let Some(cells) = d.next_cells().map_err(|e| e.to_string())? {
            if k > 0 {
                s.apply_action(&actions[k - 1]).map_err(|e| e.to_string())?;
            }
            mismatches += usize::from(s.frame().cells() != cells);
            k += 1;
        }
        ensure(k == actions.len() + 1, || format!("{k} frames for {} actions", actions.len()))?;
        // Final tree straight from git.
        let listing = String::from_utf8(git_show(repo, &["ls-tree", "-r", "-z", "--name-only", "HEAD"])).unwrap();
        let mut want = BTreeMap::new();
        for path in listing.split('\0').filter(|p| !p.is_empty()) {
            let body = git_show(repo, &["show", &format!("HEAD:{path}")]);
            if replayable(path, &body) {
                want.insert(path.to_string(), body);
            }
        }
        let got: BTreeMap<String, Vec<u8>> = s.vfs().iter().map(|(p, b)| (p.to_string(), b.to_vec())).collect();
        mismatches += want.iter().filter(|(p, b)| got.get(*p) != Some(b)).count();
        mismatches += got.keys().filter(|p| !want.contains_key(*p)).count();
        summary.push(format!("{} commits/{} renames/{} files", stats.commits, stats.renames, want.len()));
    }
    ensure(env.repos.iter().any(|(_, s)| s.commits >= 50), || "no 50-commit fixture".into())?;
    ensure(env.repos.iter().any(|(_, s)| s.renames > 0), || "no fixture with renames".into())?;
    ensure(mismatches == 0, || format!("{mismatches} mismatches"))?;
    Ok(format!("0 mismatches over {} repos ({})", env.repos.len(), summary.join("; ")))
}

/// Evaluates a program listing directly: (halt letter, executed mask).
fn frjt_oracle(listing: &str) -> (char, Vec<bool>) {
    let lines: Vec<Vec<&str>> = listing
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().collect())
        .collect();
    let labels: HashMap<&str, usize> =
        lines.iter().enumerate().filter(|(_, l)| l[0] == "LABEL").map(|(i, l)| (l[1], i)).collect();
    let mut regs: HashMap<&str, u8> = HashMap::new();
    let mut ran = vec![false; lines.len()];
    let mut pc = 0;
    loop {
        let l = &lines[pc];
        ran[pc] = true;
        let val = |regs: &HashMap<&str, u8>, r: &str| *regs.get(r).unwrap_or(&0);
        let mut next = pc + 1;
        match l[0] {
            "LOAD" => {
                regs.insert(l[1], l[2].parse().unwrap());
            }
            "ADD" => {
                let v = val(&regs, l[1]).wrapping_add(val(&regs, l[2]));
                regs.insert(l[1], v);
            }
            "SUB" => {
                let v = val(&regs, l[1]).wrapping_sub(val(&regs, l[2]));
                regs.insert(l[1], v);
            }
            "JZ" if val(&regs, l[1]) == 0 => next = labels[l[2]],
            "JNZ" if val(&regs, l[1]) != 0 => next = labels[l[2]],
            "JMP" => next = labels[l[1]],
            "HALT" => return (l[1].chars().next().unwrap(), ran),
            _ => {}
        }
        assert!(next > pc, "backward jump");
        pc = next;
    }
}

fn frjt(env: &Env) -> Check {
    let out = env.path().join("frjt.tsv");
    tf_ok(
        env.path(),
        &["frjt", "gen", "--max-depth", &FRJT_MAX_DEPTH.to_string(), "--per-depth", &FRJT_PER_DEPTH.to_string(), "--seed", "7", "--out", out.to_str().unwrap()],
    )?;
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    ensure(lines.len() == FRJT_MAX_DEPTH * FRJT_PER_DEPTH, || format!("{} records", lines.len()))?;
    let (mut a, mut cov, mut disagree) = (0usize, 0f64, 0usize);
    for line in &lines {
        let (label, tokens) = line.split_once('\t').ok_or("record without a tab")?;
        let p = Program::parse_tokens(tokens, 0).map_err(|e| e.to_string())?;
        let (halt, ran) = frjt_oracle(&p.to_listing());
        disagree += usize::from(label != halt.to_string());
        a += usize::from(halt == 'A');
        cov += ran.iter().filter(|&&r| r).count() as f64 / ran.len() as f64;
    }
    let n = lines.len() as f64;
    let (a_frac, coverage) = (a as f64 / n, cov / n);
    let manifest = kv(&std::fs::read_to_string(termforge::manifest::sidecar_path(&out)).unwrap());
    ensure(manifest.contains_key("seed") && manifest.contains_key("output0.sha256"), || "manifest".into())?;
    ensure(disagree == 0, || format!("{disagree} labels disagree with the oracle"))?;
    ensure((FRJT_A_BAND.0..=FRJT_A_BAND.1).contains(&a_frac), || format!("A fraction {a_frac}"))?;
    ensure((FRJT_COVERAGE_BAND.0..=FRJT_COVERAGE_BAND.1).contains(&coverage), || format!("coverage {coverage}"))?;
    Ok(format!("{} programs, A={a_frac:.4} coverage={coverage:.4}, oracle agreement 100%", lines.len()))
}

fn maze(env: &Env) -> Check {
    let seed = 11u64;
    let maze = maze_for_seed(seed);
    let grid: Vec<Vec<bool>> = maze.render_ascii().lines().map(|l| l.chars().map(|c| c != '#').collect()).collect();
    ensure(grid.len() == MAZE_SIZE, || "grid size".into())?;
    let step = |(x, y): (i64, i64), d: Direction| {
        let (nx, ny) = match d {
            Direction::Left => (x - 1, y),
            Direction::Right => (x + 1, y),
            Direction::Up => (x, y - 1),
            Direction::Down => (x, y + 1),
        };
        let inside = nx >= 0 && ny >= 0 && (ny as usize) < MAZE_SIZE && (nx as usize) < MAZE_SIZE;
        if inside && grid[ny as usize][nx as usize] {
            (nx, ny)
        } else {
            (x, y)
        }
    };

    // Withheld datasets at several depths.
    for depth in [1usize, 8, 32, 64] {
        let out = env.path().join(format!("maze_w{depth}.tsv"));
        let args = ["maze", "gen", "--variant", "withheld", "--p", "0.2", "--depth", &depth.to_string(), "--count", "100", "--seed", &seed.to_string(), "--out", out.to_str().unwrap()];
        tf_ok(env.path(), &args)?;
        for line in std::fs::read_to_string(&out).unwrap().lines() {
            let r = MazeRecord::parse_line(line, maze.start).map_err(|e| e.to_string())?;
            let hidden = r.trajectory.steps.iter().filter(|s| s.feedback == Feedback::Withheld).count();
            ensure(hidden == depth, || format!("depth {depth}: record with {hidden} withheld"))?;
        }
    }

    let out = env.path().join("maze_u.tsv");
    let args = ["maze", "gen", "--variant", "unwithheld", "--depth", "64", "--p", "0.2", "--count", &MAZE_TRAJECTORIES.to_string(), "--seed", &seed.to_string(), "--out", out.to_str().unwrap()];
    tf_ok(env.path(), &args)?;
    let manifest = kv(&std::fs::read_to_string(termforge::manifest::sidecar_path(&out)).unwrap());
    ensure(manifest.get("walls_hex") == Some(&maze.wall_hex()), || "manifest walls differ".into())?;
    let text = std::fs::read_to_string(&out).unwrap();
    let mut count = 0usize;
    for line in text.lines() {
        let r = MazeRecord::parse_line(line, maze.start).map_err(|e| e.to_string())?;
        let mut pos = (maze.start.x as i64, maze.start.y as i64);
        for (k, s) in r.trajectory.steps.iter().enumerate() {
            let next = step(pos, s.intent);
            let p = r.trajectory.positions[k];
            ensure((p.x as i64, p.y as i64) == next, || format!("record {count} step {k}: position"))?;
            let ok = match s.feedback {
                Feedback::Moved(d) => d == s.intent && next != pos,
                Feedback::Unchanged => next == pos,
                Feedback::Withheld => false,
            };
            ensure(ok, || format!("record {count} step {k}: feedback"))?;
            pos = next;
        }
        count += 1;
    }
    ensure(count == MAZE_TRAJECTORIES, || format!("{count} trajectories"))?;
    Ok(format!("withheld depths 1/8/32/64 exact; {count} trajectories match the position oracle"))
}

fn random_string(rng: &mut ChaCha8Rng) -> String {
    let n = rng.gen_range(0..60);
    (0..n)
        .map(|_| match rng.gen_range(0..6) {
            0 => rng.gen_range(b'a'..=b'z') as char,
            1 => rng.gen_range(b'A'..=b'Z') as char,
            2 => [' ', '_', '\n', '(', ';', '\x1b', '\x7f', '\0'][rng.gen_range(0..8)],
            3 => char::from_u32(rng.gen_range(0x80..0x800)).unwrap(),
            4 => loop {
                if let Some(c) = char::from_u32(rng.gen_range(0..0x11_0000)) {
                    break c;
                }
            },
            _ => rng.gen_range(b'0'..=b'9') as char,
        })
        .collect()
}

fn tokenizer(env: &Env) -> Check {
    let vocab = env.path().join("vocab.txt");
    let mut args = vec!["tok", "train", "--vocab-size", "20000", "--out", vocab.to_str().unwrap(), "--corpus"];
    let streams: Vec<String> = env.streams.iter().map(|p| p.display().to_string()).collect();
    args.extend(streams.iter().map(String::as_str));
    let m = kv(&tf_ok(env.path(), &args)?);
    let lines = std::fs::read_to_string(&vocab).unwrap().lines().count();
    ensure(lines == TOK_VOCAB, || format!("vocab file has {lines} lines"))?;
    let v = ActionVocab::load(&vocab).map_err(|e| e.to_string())?;
    ensure(v.len() == TOK_VOCAB, || format!("vocab {}", v.len()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for i in 0..TOK_ROUND_TRIPS {
        let s = random_string(&mut rng);
        let back = v.decode(&v.encode(&s)).map_err(|e| e.to_string())?;
        ensure(back == s, || format!("string {i} {s:?}"))?;
    }
    // Whole stream through the binary.
    let ids = env.path().join("ids.txt");
    let dec = env.path().join("decoded.txt");
    tf_ok(env.path(), &["tok", "encode", "--vocab", vocab.to_str().unwrap(), "--input", &streams[0], "--out", ids.to_str().unwrap()])?;
    tf_ok(env.path(), &["tok", "decode", "--vocab", vocab.to_str().unwrap(), "--input", ids.to_str().unwrap(), "--out", dec.to_str().unwrap()])?;
    let actions = tszx::decode_actions(&std::fs::read(&env.streams[0]).unwrap()).map_err(|e| e.to_string())?;
    ensure(std::fs::read(&dec).unwrap() == termforge::acttok::action_text(&actions).into_bytes(), || "stream round-trip".into())?;
    Ok(format!(
        "vocab {lines}, coverage {}, {TOK_ROUND_TRIPS} random strings and a full stream round-trip",
        m.get("coverage").map_or("?", String::as_str)
    ))
}

fn throughput(env: &Env) -> Check {
    let m = kv(&tf_ok(
        env.path(),
        &["term", "bench", "--actions", "1000000", "--runs", "3", "--min-rate", &MIN_ACTIONS_PER_SECOND.to_string()],
    )?);
    let best = num(&m, "best_actions_per_second")?;
    ensure(best >= MIN_ACTIONS_PER_SECOND, || format!("{best} actions/s"))?;
    // The replay path over a real action log.
    let dec = env.path().join("decoded");
    let log = dec.join("actions.log");
    if !log.exists() {
        tf_ok(env.path(), &["tszx", "decode", "--input", env.streams[0].to_str().unwrap(), "--out", dec.to_str().unwrap()])?;
    }
    let r = kv(&tf_ok(env.path(), &["term", "replay", "--actions", log.to_str().unwrap()])?);
    let replay = num(&r, "actions_per_second")?;
    ensure(replay >= MIN_ACTIONS_PER_SECOND, || format!("replay {replay} actions/s"))?;
    Ok(format!("bench {best:.0} actions/s, fixture replay {replay:.0} actions/s"))
}

fn setup() -> Env {
    let dir = tempfile::tempdir().unwrap();
    let mut repos = Vec::new();
    let mut streams = Vec::new();
    for (commits, seed) in REPOS {
        let repo = dir.path().join(format!("repo{seed}"));
        let stats = build_fixture_repo(&repo, commits, seed).unwrap();
        let stream = dir.path().join(format!("repo{seed}.tszx"));
        let (code, _, err) = tf(dir.path(), &["synth", "--repo", repo.to_str().unwrap(), "--out", stream.to_str().unwrap()]);
        assert_eq!(code, 0, "synth failed: {err}");
        repos.push((repo, stats));
        streams.push(stream);
    }
    Env { dir, repos, streams }
}

fn main() {
    let env = setup();
    let criteria: [Criterion; 10] = [
        ("flop table", flop_table),
        ("power-law fit", power_fit),
        ("alpha dynamics", alpha_dynamics),
        ("amortization", amortization),
        ("codec", codec),
        ("git replay", git_replay),
        ("frjt", frjt),
        ("maze", maze),
        ("tokenizer", tokenizer),
        ("throughput", throughput),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let result = catch_unwind(AssertUnwindSafe(|| check(&env))).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => println!("PASS  {name:<15} {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<15} {why}");
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
