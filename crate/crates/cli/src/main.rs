use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use clap::{Args, Parser, Subcommand};
use sha2::{Digest, Sha256};

use termforge::acttok::{action_text, train_vocab, ActionVocab};
use termforge::diff::Context;
use termforge::frjt::{emit_frjt_dataset, FrjtDatasetConfig};
use termforge::gitsynth::{emit_diff_inflate_cases, synthesize_repo, GitCli, SynthConfig, SynthError};
use termforge::manifest::{sidecar_path, Manifest};
use termforge::maze::{emit_maze_dataset, MazeDatasetConfig, MazeVariant};
use termforge::scaling::{
    equal_time_curves, estimate_flops, fit_alpha_dynamics, fit_power_law, log_grid, parse_points, EqualTimeModel,
    FlopConfig, LogLinear, REFERENCE_LENGTH,
};
use termforge::termemu::{read_action_log, throughput_bench, write_action_log, Session, DEFAULT_HEIGHT, DEFAULT_WIDTH};
use termforge::tszx::{self, Decoder, Encoder};

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_CHECK: u8 = 4;

/// A result that ran but did not meet a requested bound.
#[derive(Debug)]
struct CheckFailed(String);

impl fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

#[derive(Parser, Debug)]
#[command(name = "termforge", version, about = "Synthetic terminal data, codecs and scaling tools")]
struct Cli {
    /// `key = value` defaults for the subcommand's flags (for `scaling flops`, the model shape).
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the output).
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forward-jump halting programs.
    Frjt {
        #[command(subcommand)]
        cmd: FrjtCmd,
    },
    /// Maze trajectories with withheld feedback.
    Maze {
        #[command(subcommand)]
        cmd: MazeCmd,
    },
    /// Terminal session emulator.
    Term {
        #[command(subcommand)]
        cmd: TermCmd,
    },
    /// Replay a git history into a frame/action stream.
    Synth(SynthArgs),
    /// Write sequential unified-diff cases for one file.
    Diffbench(DiffbenchArgs),
    /// Frame stream codec.
    Tszx {
        #[command(subcommand)]
        cmd: TszxCmd,
    },
    /// Action tokenizer.
    Tok {
        #[command(subcommand)]
        cmd: TokCmd,
    },
    /// Scaling-law fits and FLOP accounting.
    Scaling {
        #[command(subcommand)]
        cmd: ScalingCmd,
    },
}

#[derive(Subcommand, Debug)]
enum FrjtCmd {
    Gen {
        #[arg(long)]
        max_depth: usize,
        #[arg(long)]
        per_depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum MazeCmd {
    Gen {
        #[arg(long, default_value = "withheld")]
        variant: MazeVariant,
        #[arg(long, default_value_t = 0.2)]
        p: f64,
        #[arg(long)]
        depth: usize,
        #[arg(long)]
        count: usize,
        /// Steps per trajectory (default: depth / p).
        #[arg(long)]
        length: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args, Debug)]
struct Geometry {
    #[arg(long, default_value_t = DEFAULT_WIDTH)]
    width: u16,
    #[arg(long, default_value_t = DEFAULT_HEIGHT)]
    height: u16,
}

#[derive(Subcommand, Debug)]
enum TermCmd {
    /// Apply a NUL-terminated action log to a fresh session.
    Replay {
        #[arg(long)]
        actions: PathBuf,
        /// Write every frame as `frame_NNNNNN.txt`.
        #[arg(long)]
        dump_frames: Option<PathBuf>,
        /// Summary file (key=value).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        geometry: Geometry,
    },
    /// Synthetic editing workload throughput.
    Bench {
        #[arg(long, default_value_t = 1_000_000)]
        actions: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        /// Exit with the check code if the best run is slower than this.
        #[arg(long)]
        min_rate: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long)]
    repo: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    max_commits: Option<usize>,
    #[command(flatten)]
    geometry: Geometry,
}

#[derive(Args, Debug)]
struct DiffbenchArgs {
    #[arg(long)]
    repo: PathBuf,
    #[arg(long)]
    file: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value = "u1")]
    context: Context,
    /// Index of the first file state used.
    #[arg(long, default_value_t = 0)]
    start: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum TszxCmd {
    /// Replay an action log and encode the frames and actions.
    Encode {
        #[arg(long)]
        actions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        geometry: Geometry,
    },
    /// Write `frame_NNNNNN.txt` files and `actions.log` into a directory.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Validate a stream and report its compression.
    Inspect {
        #[arg(long)]
        input: PathBuf,
        /// Exit with the check code if the ratio is below this.
        #[arg(long)]
        min_ratio: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum TokCmd {
    /// Train a vocabulary on text files or `.tszx` streams.
    Train {
        #[arg(long, num_args = 1.., required = true)]
        corpus: Vec<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        vocab_size: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Token ids, space separated.
    Encode {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    Decode {
        #[arg(long)]
        vocab: PathBuf,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum ScalingCmd {
    /// Fit `loss = A * L^-alpha` to `L loss` rows, or with `--dynamics`
    /// `alpha(s) = alpha_inf * (1 - exp(-s / tau))` to `s alpha` rows.
    Fit {
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        dynamics: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Forward FLOPs per training step for the model in `--config`.
    Flops {
        /// Print the aligned table before the key=value lines.
        #[arg(long)]
        table: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equal wall-time comparison of sequence lengths.
    Amortize {
        /// `s A` rows.
        #[arg(long)]
        a_points: PathBuf,
        /// `s alpha` rows.
        #[arg(long)]
        alpha_points: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,4,16,128,512,1024")]
        lengths: Vec<f64>,
        #[arg(long, default_value_t = 1e-2)]
        t_min: f64,
        #[arg(long, default_value_t = 1e7)]
        t_max: f64,
        #[arg(long, default_value_t = 4000)]
        grid: usize,
        /// Steps per unit time at length 1024.
        #[arg(long, default_value_t = REFERENCE_LENGTH)]
        gamma: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Frjt { .. } => "frjt gen",
            Command::Maze { .. } => "maze gen",
            Command::Term { cmd: TermCmd::Replay { .. } } => "term replay",
            Command::Term { cmd: TermCmd::Bench { .. } } => "term bench",
            Command::Synth(_) => "synth",
            Command::Diffbench(_) => "diffbench",
            Command::Tszx { cmd: TszxCmd::Encode { .. } } => "tszx encode",
            Command::Tszx { cmd: TszxCmd::Decode { .. } } => "tszx decode",
            Command::Tszx { cmd: TszxCmd::Inspect { .. } } => "tszx inspect",
            Command::Tok { cmd: TokCmd::Train { .. } } => "tok train",
            Command::Tok { cmd: TokCmd::Encode { .. } } => "tok encode",
            Command::Tok { cmd: TokCmd::Decode { .. } } => "tok decode",
            Command::Scaling { cmd: ScalingCmd::Fit { .. } } => "scaling fit",
            Command::Scaling { cmd: ScalingCmd::Flops { .. } } => "scaling flops",
            Command::Scaling { cmd: ScalingCmd::Amortize { .. } } => "scaling amortize",
        }
    }
}

fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest over the sorted `(name, sha256)` pairs of a directory's files.
fn sha256_dir(dir: &Path) -> Result<String> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    names.sort();
    let mut h = Sha256::new();
    for p in names.iter().filter(|p| p.is_file()) {
        h.update(p.file_name().unwrap().to_string_lossy().as_bytes());
        h.update([0]);
        h.update(sha256_file(p)?.as_bytes());
        h.update(b"\n");
    }
    Ok(hex::encode(h.finalize()))
}

/// Collects what one invocation read and wrote.
struct Run {
    manifest: Manifest,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_path_buf());
    }

    fn output(&mut self, p: &Path) {
        self.outputs.push(p.to_path_buf());
    }

    fn set(&mut self, k: &str, v: impl fmt::Display) {
        self.manifest.set(k, v);
    }

    fn finish(mut self, path: &Path) -> Result<()> {
        for (i, p) in self.inputs.iter().enumerate() {
            let digest = if p.is_dir() { sha256_dir(p)? } else { sha256_file(p)? };
            self.manifest.set(format!("input{i}.path"), p.display());
            self.manifest.set(format!("input{i}.sha256"), digest);
        }
        for (i, p) in self.outputs.iter().enumerate() {
            let digest = if p.is_dir() { sha256_dir(p)? } else { sha256_file(p)? };
            self.manifest.set(format!("output{i}.path"), p.display());
            self.manifest.set(format!("output{i}.sha256"), digest);
        }
        self.manifest.write(path).with_context(|| format!("writing {}", path.display()))
    }
}

fn write_report(out: Option<&Path>, text: &str, run: &mut Run) -> Result<()> {
    print!("{text}");
    if let Some(p) = out {
        fs::write(p, text).with_context(|| format!("writing {}", p.display()))?;
        run.output(p);
    }
    Ok(())
}

/// Appends `--key value` for every config entry whose flag is not already
/// on the command line.
fn expand_config(args: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let Some(i) = strs.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    if strs.iter().skip(1).find(|a| !a.starts_with('-')).map(String::as_str) == Some("scaling") {
        return Ok(args);
    }
    let path = match strs[i].strip_prefix("--config=") {
        Some(p) => p.to_string(),
        None => match strs.get(i + 1) {
            Some(p) => p.clone(),
            None => return Ok(args),
        },
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let present: BTreeSet<&str> =
        strs.iter().filter_map(|a| a.strip_prefix("--")).map(|a| a.split('=').next().unwrap()).collect();
    let mut extra = Vec::new();
    for (k, v) in Manifest::parse(&text).entries() {
        let flag = k.trim().replace('_', "-");
        if present.contains(flag.as_str()) {
            continue;
        }
        let v = v.trim();
        if v == "true" {
            extra.push(OsString::from(format!("--{flag}")));
        } else if v != "false" {
            extra.push(OsString::from(format!("--{flag}")));
            extra.push(OsString::from(v));
        }
    }
    let mut args = args;
    args.extend(extra);
    Ok(args)
}

fn main() -> ExitCode {
    let argv: Vec<OsString> = std::env::args_os().collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = if e.downcast_ref::<Usage>().is_some() {
                EXIT_USAGE
            } else if e.downcast_ref::<CheckFailed>().is_some()
                || matches!(e.downcast_ref::<SynthError>(), Some(SynthError::Mismatch { .. }))
            {
                EXIT_CHECK
            } else {
                EXIT_DATA
            };
            ExitCode::from(code)
        }
    }
}

fn run(cli: Cli, argv: &[OsString]) -> Result<()> {
    let mut run = Run { manifest: Manifest::new(), inputs: Vec::new(), outputs: Vec::new() };
    run.set("subcommand", cli.command.name());
    run.set(
        "argv",
        argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect::<Vec<_>>().join(" "),
    );
    run.set("tool_version", env!("CARGO_PKG_VERSION"));
    if let Some(c) = &cli.config {
        run.input(c);
    }
    let default_manifest = PathBuf::from(format!("termforge-{}.manifest", cli.command.name().replace(' ', "-")));

    let primary: Option<PathBuf> = match cli.command {
        Command::Frjt { cmd: FrjtCmd::Gen { max_depth, per_depth, seed, out } } => {
            let cfg = FrjtDatasetConfig { max_depth, per_depth, seed };
            let stats = emit_frjt_dataset(&cfg, &out)?;
            // Keep the dataset's own manifest entries.
            run.manifest = Manifest::read(&sidecar_path(&out))?.merged(run.manifest);
            run.set("seed", seed);
            println!("records={}", stats.count);
            println!("a_fraction={:.6}", stats.a_fraction);
            println!("mean_coverage={:.6}", stats.mean_coverage);
            println!("flipped={}", stats.flipped);
            for w in &stats.warnings {
                eprintln!("warning: {w}");
            }
            run.output(&out);
            Some(out)
        }
        Command::Maze { cmd: MazeCmd::Gen { variant, p, depth, count, length, seed, out } } => {
            let cfg = MazeDatasetConfig { variant, p, depth, count, seed, length };
            let records = emit_maze_dataset(&cfg, &out)?;
            run.manifest = Manifest::read(&sidecar_path(&out))?.merged(run.manifest);
            println!("records={}", records.len());
            println!("length={}", cfg.trajectory_len());
            run.output(&out);
            Some(out)
        }
        Command::Term { cmd: TermCmd::Replay { actions, dump_frames, out, geometry } } => {
            let log = fs::read(&actions).with_context(|| format!("reading {}", actions.display()))?;
            run.input(&actions);
            let list = read_action_log(&log)?;
            let mut s = Session::new(geometry.width, geometry.height)?;
            if let Some(dir) = &dump_frames {
                fs::create_dir_all(dir)?;
                fs::write(dir.join(frame_name(0)), s.frame().to_text())?;
            }
            let start = Instant::now();
            for (i, a) in list.iter().enumerate() {
                s.apply_action(a).with_context(|| format!("action {i}"))?;
                if let Some(dir) = &dump_frames {
                    fs::write(dir.join(frame_name(i + 1)), s.frame().to_text())?;
                }
            }
            let secs = start.elapsed().as_secs_f64();
            let report = format!(
                "actions={}\nframes={}\nfiles={}\nvfs_fingerprint={:016x}\nseconds={secs:.6}\nactions_per_second={:.0}\n",
                list.len(),
                list.len() + 1,
                s.vfs().len(),
                s.vfs().fingerprint(),
                list.len() as f64 / secs.max(1e-9)
            );
            write_report(out.as_deref(), &report, &mut run)?;
            if let Some(dir) = &dump_frames {
                run.output(dir);
            }
            out.or(dump_frames)
        }
        Command::Term { cmd: TermCmd::Bench { actions, seed, runs, min_rate, out } } => {
            run.set("seed", seed);
            let mut best = 0f64;
            let mut text = String::new();
            for r in 0..runs.max(1) {
                let rep = throughput_bench(actions, seed)?;
                text.push_str(&format!("run{r}.actions_per_second={:.0}\n", rep.actions_per_second));
                text.push_str(&format!("run{r}.frame_checksum={:016x}\n", rep.frame_checksum));
                best = best.max(rep.actions_per_second);
            }
            text.push_str(&format!("actions={actions}\nbest_actions_per_second={best:.0}\n"));
            write_report(out.as_deref(), &text, &mut run)?;
            run.set("best_actions_per_second", format!("{best:.0}"));
            if let Some(min) = min_rate {
                if best < min {
                    finish(run, cli.manifest, out.as_deref(), &default_manifest)?;
                    return Err(CheckFailed(format!("{best:.0} actions/s is below {min}")).into());
                }
            }
            out
        }
        Command::Synth(SynthArgs { repo, out, max_commits, geometry }) => {
            let cfg = SynthConfig { width: geometry.width, height: geometry.height, max_commits };
            let res = synthesize_repo(&repo, &out, &cfg)?;
            run.set("repo", repo.display());
            run.set("repo.head", res.last_commit.as_deref().unwrap_or("none"));
            let ratio = tszx::inspect(&res.stream)?.ratio;
            println!("commits={}", res.commits);
            println!("frames={}", res.frames);
            println!("actions={}", res.actions);
            println!("files_created={}", res.files_created);
            println!("files_edited={}", res.files_edited);
            println!("files_deleted={}", res.files_deleted);
            println!("skipped={}", res.skipped.join(","));
            println!("mismatches=0");
            println!("ratio={ratio:.2}");
            run.set("commits", res.commits);
            run.output(&out);
            Some(out)
        }
        Command::Diffbench(DiffbenchArgs { repo, file, n, context, start, out }) => {
            let reader = GitCli::open(&repo)?;
            let case = emit_diff_inflate_cases(&reader, &file, n, context, start)?;
            case.write_to(&out)?;
            run.set("repo", repo.display());
            run.set("file", &file);
            run.set("commits", case.commits.join(","));
            println!("patches={}", case.n());
            println!("initial_bytes={}", case.initial.len());
            println!("truth_bytes={}", case.truth.len());
            run.output(&out);
            Some(out)
        }
        Command::Tszx { cmd: TszxCmd::Encode { actions, out, geometry } } => {
            let log = fs::read(&actions).with_context(|| format!("reading {}", actions.display()))?;
            run.input(&actions);
            let list = read_action_log(&log)?;
            let mut s = Session::new(geometry.width, geometry.height)?;
            let mut enc = Encoder::new(geometry.width, geometry.height)?;
            enc.push_frame(s.frame())?;
            for (i, a) in list.iter().enumerate() {
                s.apply_action(a).with_context(|| format!("action {i}"))?;
                enc.push_action(a);
                enc.push_frame(s.frame())?;
            }
            let bytes = enc.finish()?;
            fs::write(&out, &bytes)?;
            let rep = tszx::inspect(&bytes)?;
            println!("frames={}\nactions={}\nbytes={}\nratio={:.2}", rep.frames, rep.actions, rep.file_bytes, rep.ratio);
            run.output(&out);
            Some(out)
        }
        Command::Tszx { cmd: TszxCmd::Decode { input, out } } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            run.input(&input);
            let mut d = Decoder::new(&bytes)?;
            fs::create_dir_all(&out)?;
            let mut frames = 0;
            while let Some(f) = d.next_frame()? {
                fs::write(out.join(frame_name(frames)), f.to_text())?;
                frames += 1;
            }
            let (actions, _, _) = d.finish()?;
            fs::write(out.join("actions.log"), write_action_log(&actions))?;
            println!("frames={frames}\nactions={}", actions.len());
            run.output(&out);
            Some(out)
        }
        Command::Tszx { cmd: TszxCmd::Inspect { input, min_ratio, out } } => {
            let bytes = fs::read(&input).with_context(|| format!("reading {}", input.display()))?;
            run.input(&input);
            let r = tszx::inspect(&bytes)?;
            let c = &r.counts;
            let text = format!(
                "width={}\nheight={}\nframes={}\npalette={}\nactions={}\nfile_bytes={}\nbitstream_bytes={}\nnaive_bytes={}\nratio={:.2}\ncells={}\ntokens={}\n",
                r.width, r.height, r.frames, r.palette_len, r.actions, r.file_bytes, r.bitstream_bytes, r.naive_bytes, r.ratio,
                c.cells(), c.tokens()
            );
            write_report(out.as_deref(), &text, &mut run)?;
            if let Some(min) = min_ratio {
                if r.ratio < min {
                    finish(run, cli.manifest, out.as_deref(), &default_manifest)?;
                    return Err(CheckFailed(format!("ratio {:.2} is below {min}", r.ratio)).into());
                }
            }
            out
        }
        Command::Tok { cmd: TokCmd::Train { corpus, vocab_size, out } } => {
            let mut docs = Vec::new();
            for p in &corpus {
                docs.push(read_corpus_doc(p)?);
                run.input(p);
            }
            let vocab = train_vocab(&docs, vocab_size).map_err(|e| anyhow::Error::new(e).context("training"))?;
            vocab.save(&out)?;
            let (mut tokens, mut covered) = (0usize, 0f64);
            for d in &docs {
                let ids = vocab.encode(d);
                covered += ActionVocab::coverage(&ids) * ids.len() as f64;
                tokens += ids.len();
            }
            println!("vocab_size={}", vocab.len());
            println!("corpus_bytes={}", docs.iter().map(String::len).sum::<usize>());
            println!("tokens={tokens}");
            println!("coverage={:.4}", if tokens > 0 { covered / tokens as f64 } else { 1.0 });
            run.set("vocab_size", vocab.len());
            run.output(&out);
            Some(out)
        }
        Command::Tok { cmd: TokCmd::Encode { vocab, input, out } } => {
            let v = ActionVocab::load(&vocab)?;
            run.input(&vocab);
            run.input(&input);
            let text = read_corpus_bytes(&input)?;
            let ids = v.encode_bytes(&text);
            let line: Vec<String> = ids.iter().map(u32::to_string).collect();
            fs::write(&out, line.join(" ") + "\n")?;
            println!("tokens={}\ncoverage={:.4}", ids.len(), ActionVocab::coverage(&ids));
            run.output(&out);
            Some(out)
        }
        Command::Tok { cmd: TokCmd::Decode { vocab, input, out } } => {
            let v = ActionVocab::load(&vocab)?;
            run.input(&vocab);
            run.input(&input);
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let ids: Vec<u32> = text
                .split_whitespace()
                .map(|t| t.parse().with_context(|| format!("bad token id {t:?}")))
                .collect::<Result<_>>()?;
            let bytes = v.decode_bytes(&ids)?;
            fs::write(&out, &bytes)?;
            println!("bytes={}", bytes.len());
            run.output(&out);
            Some(out)
        }
        Command::Scaling { cmd: ScalingCmd::Fit { points, dynamics, out } } => {
            let pts = read_points(&points)?;
            run.input(&points);
            let text = if dynamics { render_dynamics(&pts)? } else { render_power(&pts)? };
            write_report(out.as_deref(), &text, &mut run)?;
            out
        }
        Command::Scaling { cmd: ScalingCmd::Flops { table, out } } => {
            let Some(path) = &cli.config else {
                return Err(Usage("scaling flops needs --config FILE".into()).into());
            };
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg = FlopConfig::parse(&text)?;
            let t = estimate_flops(&cfg)?;
            let mut report = String::new();
            if table {
                report.push_str(&t.render());
                report.push('\n');
            }
            report.push_str(&t.key_values());
            write_report(out.as_deref(), &report, &mut run)?;
            out
        }
        Command::Scaling { cmd: ScalingCmd::Amortize { a_points, alpha_points, lengths, t_min, t_max, grid, gamma, out } } => {
            let a_pts = read_points(&a_points)?;
            let al_pts = read_points(&alpha_points)?;
            run.input(&a_points);
            run.input(&alpha_points);
            if !(t_min > 0.0 && t_max > t_min && grid >= 2 && gamma > 0.0) {
                return Err(Usage("need 0 < t-min < t-max, grid >= 2 and gamma > 0".into()).into());
            }
            let a = LogLinear::new(a_pts)?;
            let dynamics = fit_alpha_dynamics(&al_pts)?;
            let mut model = EqualTimeModel::new(move |s| a.eval(s), move |s| dynamics.eval(s));
            model.gamma = gamma;
            let curves = equal_time_curves(&model, &lengths, &log_grid(t_min, t_max, grid));
            let mut rows = vec![["shorter".to_string(), "longer".into(), "crossover_t".into(), "persistent".into()]];
            for c in &curves.crossovers {
                rows.push([
                    format!("{}", c.shorter),
                    format!("{}", c.longer),
                    c.t.map_or("none".into(), |t| format!("{t:.4e}")),
                    c.persistent.to_string(),
                ]);
            }
            let mut text = align(&rows);
            let found = curves.crossovers.iter().filter(|c| c.t.is_some()).count();
            let persistent = curves.crossovers.iter().filter(|c| c.persistent).count();
            text.push_str(&format!(
                "\nalpha_inf={:.6}\ntau={:.3}\ngamma={gamma}\npairs={}\ncrossovers={found}\npersistent={persistent}\n",
                dynamics.alpha_inf,
                dynamics.tau,
                curves.crossovers.len()
            ));
            write_report(out.as_deref(), &text, &mut run)?;
            out
        }
    };
    finish(run, cli.manifest, primary.as_deref(), &default_manifest)
}

fn finish(run: Run, explicit: Option<PathBuf>, primary: Option<&Path>, fallback: &Path) -> Result<()> {
    let path = explicit.unwrap_or_else(|| primary.map_or_else(|| fallback.to_path_buf(), sidecar_path));
    run.finish(&path)
}

trait Merge {
    fn merged(self, other: Manifest) -> Manifest;
}

impl Merge for Manifest {
    fn merged(mut self, other: Manifest) -> Manifest {
        for (k, v) in other.entries() {
            self.set(k.clone(), v);
        }
        self
    }
}

fn frame_name(i: usize) -> String {
    format!("frame_{i:06}.txt")
}

fn is_tszx(bytes: &[u8]) -> bool {
    bytes.starts_with(tszx::MAGIC)
}

/// Raw bytes, or the action text of a `.tszx` stream.
fn read_corpus_bytes(p: &Path) -> Result<Vec<u8>> {
    let bytes = fs::read(p).with_context(|| format!("reading {}", p.display()))?;
    if is_tszx(&bytes) {
        return Ok(action_text(&tszx::decode_actions(&bytes)?).into_bytes());
    }
    Ok(bytes)
}

fn read_corpus_doc(p: &Path) -> Result<String> {
    String::from_utf8(read_corpus_bytes(p)?).with_context(|| format!("{}: not UTF-8", p.display()))
}

fn read_points(p: &Path) -> Result<Vec<(f64, f64)>> {
    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
    parse_points(&text).map_err(|e| anyhow::anyhow!("{}: {e}", p.display()))
}

fn align<const N: usize>(rows: &[[String; N]]) -> String {
    let widths: Vec<usize> = (0..N).map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for r in rows {
        let cells: Vec<String> = r.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn render_power(pts: &[(f64, f64)]) -> Result<String> {
    let f = fit_power_law(pts)?;
    let mut rows = vec![["L".to_string(), "loss".into(), "fit".into(), "residual".into()]];
    for &(l, y) in pts {
        let e = f.eval(l);
        rows.push([format!("{l}"), format!("{y:.4}"), format!("{e:.4}"), format!("{:+.4}", y - e)]);
    }
    let mut text = align(&rows);
    text.push_str(&format!(
        "\nalpha={:.6}\na={:.6}\nr2={:.6}\nper_doubling={:.6}\n",
        f.alpha,
        f.a,
        f.r2,
        f.per_doubling()
    ));
    Ok(text)
}

fn render_dynamics(pts: &[(f64, f64)]) -> Result<String> {
    if pts.is_empty() {
        bail!("no points");
    }
    let f = fit_alpha_dynamics(pts)?;
    let mut rows = vec![["s".to_string(), "alpha".into(), "fit".into(), "residual".into()]];
    for &(s, a) in pts {
        let e = f.eval(s);
        rows.push([format!("{s}"), format!("{a:.4}"), format!("{e:.4}"), format!("{:+.4}", a - e)]);
    }
    let mut text = align(&rows);
    text.push_str(&format!("\nalpha_inf={:.6}\ntau={:.3}\n", f.alpha_inf, f.tau));
    Ok(text)
}
