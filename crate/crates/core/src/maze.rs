//! Maze position tracking: a fixed 32x32 maze, random movement intents, and
//! per-step feedback that is optionally withheld.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use thiserror::Error;

use crate::manifest::Manifest;
use crate::seed::{rng_from, Rng, SeedTree};

pub const MAZE_SIZE: usize = 32;
const LATTICE: usize = MAZE_SIZE / 2;
/// Attempts per record before giving up on hitting the exact depth.
const MAX_ATTEMPTS: u64 = 100_000;

#[derive(Debug, Error)]
pub enum MazeError {
    #[error("bad record: {0}")]
    Parse(String),
    #[error("could not reach withheld depth {depth} after {attempts} attempts")]
    DepthUnreachable { depth: usize, attempts: u64 },
    #[error("invalid parameter: {0}")]
    Param(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Direction {
    Left,
    Right,
    Up,
    Down,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Left, Direction::Right, Direction::Up, Direction::Down];

    pub fn inverse(self) -> Direction {
        match self {
            Direction::Left => Direction::Right,
            Direction::Right => Direction::Left,
            Direction::Up => Direction::Down,
            Direction::Down => Direction::Up,
        }
    }

    fn delta(self) -> (isize, isize) {
        match self {
            Direction::Left => (-1, 0),
            Direction::Right => (1, 0),
            Direction::Up => (0, -1),
            Direction::Down => (0, 1),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Left => "LEFT",
            Direction::Right => "RIGHT",
            Direction::Up => "UP",
            Direction::Down => "DOWN",
        })
    }
}

impl FromStr for Direction {
    type Err = MazeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LEFT" => Ok(Direction::Left),
            "RIGHT" => Ok(Direction::Right),
            "UP" => Ok(Direction::Up),
            "DOWN" => Ok(Direction::Down),
            _ => Err(MazeError::Parse(format!("unknown direction {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Feedback {
    Moved(Direction),
    Unchanged,
    Withheld,
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Feedback::Moved(d) => d.fmt(f),
            Feedback::Unchanged => f.write_str("UNCHANGED"),
            Feedback::Withheld => f.write_str("WITHHELD"),
        }
    }
}

impl FromStr for Feedback {
    type Err = MazeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "UNCHANGED" => Ok(Feedback::Unchanged),
            "WITHHELD" => Ok(Feedback::Withheld),
            other => other.parse().map(Feedback::Moved),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub intent: Direction,
    pub feedback: Feedback,
}

impl fmt::Display for Step {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.intent, self.feedback)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pos {
    pub x: usize,
    pub y: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Maze {
    /// Row-major; `true` is a wall.
    walls: Vec<bool>,
    pub start: Pos,
    pub seed: u64,
}

impl Maze {
    /// Carves a maze with a randomized depth-first backtracker over a 16x16
    /// lattice. Lattice cell `(i, j)` maps to grid cell `(2i, 2j)`; the
    /// passage between neighbours opens the grid cell between them. The last
    /// row and column stay solid.
    pub fn generate(seed: u64) -> Maze {
        let mut rng = rng_from(seed);
        let mut walls = vec![true; MAZE_SIZE * MAZE_SIZE];
        let mut visited = vec![false; LATTICE * LATTICE];
        let first = (rng.gen_range(0..LATTICE), rng.gen_range(0..LATTICE));
        let mut stack = vec![first];
        visited[first.1 * LATTICE + first.0] = true;
        walls[(2 * first.1) * MAZE_SIZE + 2 * first.0] = false;
        while let Some(&(cx, cy)) = stack.last() {
            let mut next: Vec<(usize, usize)> = Direction::ALL
                .iter()
                .filter_map(|d| {
                    let (dx, dy) = d.delta();
                    let nx = cx.checked_add_signed(dx)?;
                    let ny = cy.checked_add_signed(dy)?;
                    (nx < LATTICE && ny < LATTICE && !visited[ny * LATTICE + nx]).then_some((nx, ny))
                })
                .collect();
            if next.is_empty() {
                stack.pop();
                continue;
            }
            next.shuffle(&mut rng);
            let (nx, ny) = next[0];
            visited[ny * LATTICE + nx] = true;
            walls[(2 * ny) * MAZE_SIZE + 2 * nx] = false;
            walls[(cy + ny) * MAZE_SIZE + (cx + nx)] = false;
            stack.push((nx, ny));
        }
        let start = Pos {
            x: 2 * rng.gen_range(0..LATTICE),
            y: 2 * rng.gen_range(0..LATTICE),
        };
        Maze { walls, start, seed }
    }

    /// Builds a maze from an explicit wall mask (row-major, 32x32).
    pub fn from_walls(walls: Vec<bool>, start: Pos) -> Result<Maze, MazeError> {
        if walls.len() != MAZE_SIZE * MAZE_SIZE {
            return Err(MazeError::Param(format!("wall mask has {} cells", walls.len())));
        }
        let m = Maze { walls, start, seed: 0 };
        if !m.is_open(start) {
            return Err(MazeError::Param("start cell is a wall".into()));
        }
        Ok(m)
    }

    pub fn is_open(&self, p: Pos) -> bool {
        p.x < MAZE_SIZE && p.y < MAZE_SIZE && !self.walls[p.y * MAZE_SIZE + p.x]
    }

    /// Destination of a move, or `None` when a wall or the border blocks it.
    pub fn step(&self, p: Pos, d: Direction) -> Option<Pos> {
        let (dx, dy) = d.delta();
        let q = Pos {
            x: p.x.checked_add_signed(dx)?,
            y: p.y.checked_add_signed(dy)?,
        };
        self.is_open(q).then_some(q)
    }

    pub fn open_cells(&self) -> impl Iterator<Item = Pos> + '_ {
        (0..MAZE_SIZE * MAZE_SIZE)
            .filter(|&i| !self.walls[i])
            .map(|i| Pos {
                x: i % MAZE_SIZE,
                y: i / MAZE_SIZE,
            })
    }

    /// Wall bitmap as hex, one bit per cell, MSB first, row-major.
    pub fn wall_hex(&self) -> String {
        self.walls
            .chunks(8)
            .map(|c| {
                let byte = c.iter().fold(0u8, |acc, &w| (acc << 1) | w as u8);
                format!("{byte:02x}")
            })
            .collect()
    }

    pub fn render_ascii(&self) -> String {
        let mut s = String::with_capacity((MAZE_SIZE + 1) * MAZE_SIZE);
        for y in 0..MAZE_SIZE {
            for x in 0..MAZE_SIZE {
                let p = Pos { x, y };
                s.push(if p == self.start {
                    'S'
                } else if self.is_open(p) {
                    '.'
                } else {
                    '#'
                });
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trajectory {
    pub start: Pos,
    pub steps: Vec<Step>,
    /// Ground-truth position after each step.
    pub positions: Vec<Pos>,
    pub withheld_depth: usize,
}

impl Trajectory {
    pub fn final_position(&self) -> Pos {
        self.positions.last().copied().unwrap_or(self.start)
    }

    /// Number of tokens in the record (an intent and a feedback per step).
    pub fn token_len(&self) -> usize {
        2 * self.steps.len()
    }
}

pub fn random_intents(rng: &mut Rng, n: usize) -> Vec<Direction> {
    (0..n).map(|_| Direction::ALL[rng.gen_range(0..4)]).collect()
}

/// Walks `intents` from `start`. Blocked moves report `UNCHANGED`.
pub fn simulate(maze: &Maze, start: Pos, intents: &[Direction]) -> Trajectory {
    let mut pos = start;
    let mut steps = Vec::with_capacity(intents.len());
    let mut positions = Vec::with_capacity(intents.len());
    for &intent in intents {
        let feedback = match maze.step(pos, intent) {
            Some(q) => {
                pos = q;
                Feedback::Moved(intent)
            }
            None => Feedback::Unchanged,
        };
        steps.push(Step { intent, feedback });
        positions.push(pos);
    }
    Trajectory {
        start,
        steps,
        positions,
        withheld_depth: 0,
    }
}

/// Replaces each feedback by `WITHHELD` independently with probability `p`.
pub fn withhold(traj: &Trajectory, p: f64, seed: u64) -> Trajectory {
    assert!((0.0..=1.0).contains(&p), "p must be a probability");
    let mut rng = rng_from(seed);
    let mut out = traj.clone();
    for s in &mut out.steps {
        // Draw for every step so the mask depends only on (seed, index).
        let u: f64 = rng.gen();
        if u < p {
            s.feedback = Feedback::Withheld;
        }
    }
    out.withheld_depth = out
        .steps
        .iter()
        .filter(|s| s.feedback == Feedback::Withheld)
        .count();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MazeVariant {
    Unwithheld,
    Withheld,
}

impl FromStr for MazeVariant {
    type Err = MazeError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unwithheld" => Ok(MazeVariant::Unwithheld),
            "withheld" => Ok(MazeVariant::Withheld),
            _ => Err(MazeError::Param(format!("unknown variant {s:?}"))),
        }
    }
}

impl fmt::Display for MazeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MazeVariant::Unwithheld => "unwithheld",
            MazeVariant::Withheld => "withheld",
        })
    }
}

#[derive(Debug, Clone)]
pub struct MazeDatasetConfig {
    pub variant: MazeVariant,
    pub p: f64,
    pub depth: usize,
    pub count: usize,
    pub seed: u64,
    /// Steps per trajectory; defaults to `round(depth / p)`.
    pub length: Option<usize>,
}

impl MazeDatasetConfig {
    pub fn trajectory_len(&self) -> usize {
        self.length.unwrap_or_else(|| {
            if self.p > 0.0 {
                ((self.depth as f64 / self.p).round() as usize).max(self.depth).max(1)
            } else {
                self.depth.max(1)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeRecord {
    pub trajectory: Trajectory,
    /// Seed of the record's intent and withholding streams.
    pub seed: u64,
}

impl MazeRecord {
    pub fn to_line(&self) -> String {
        let pos: Vec<String> = self
            .trajectory
            .positions
            .iter()
            .map(|p| format!("{} {}", p.x, p.y))
            .collect();
        let steps: Vec<String> = self.trajectory.steps.iter().map(|s| s.to_string()).collect();
        format!("{}\t{}\t{}", pos.join(" "), steps.join(" "), self.seed)
    }

    /// Parses a record line. The start position comes from the maze.
    pub fn parse_line(line: &str, start: Pos) -> Result<MazeRecord, MazeError> {
        let mut cols = line.split('\t');
        let (pos, steps, seed) = match (cols.next(), cols.next(), cols.next(), cols.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => return Err(MazeError::Parse("expected three tab-separated fields".into())),
        };
        let nums: Vec<usize> = pos
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| MazeError::Parse(format!("bad coordinate {t:?}"))))
            .collect::<Result<_, _>>()?;
        if !nums.len().is_multiple_of(2) {
            return Err(MazeError::Parse("odd number of coordinates".into()));
        }
        let positions: Vec<Pos> = nums.chunks(2).map(|c| Pos { x: c[0], y: c[1] }).collect();
        let steps: Vec<Step> = steps
            .split_whitespace()
            .map(|t| {
                let (i, f) = t
                    .split_once(':')
                    .ok_or_else(|| MazeError::Parse(format!("bad step {t:?}")))?;
                Ok(Step {
                    intent: i.parse()?,
                    feedback: f.parse()?,
                })
            })
            .collect::<Result<_, MazeError>>()?;
        if steps.len() != positions.len() {
            return Err(MazeError::Parse("step and position counts differ".into()));
        }
        let seed = seed
            .trim()
            .parse()
            .map_err(|_| MazeError::Parse("bad seed".into()))?;
        let withheld_depth = steps.iter().filter(|s| s.feedback == Feedback::Withheld).count();
        Ok(MazeRecord {
            trajectory: Trajectory {
                start,
                steps,
                positions,
                withheld_depth,
            },
            seed,
        })
    }
}

/// Rebuilds a record from its seed: intents from the seed's `intents`
/// stream, feedback by simulation, withholding from its `withhold` stream.
pub fn record_from_seed(maze: &Maze, cfg: &MazeDatasetConfig, seed: u64) -> MazeRecord {
    let tree = SeedTree::new(seed);
    let intents = random_intents(&mut tree.rng("intents"), cfg.trajectory_len());
    let base = simulate(maze, maze.start, &intents);
    let trajectory = match cfg.variant {
        MazeVariant::Unwithheld => base,
        MazeVariant::Withheld => withhold(&base, cfg.p, tree.derive("withhold")),
    };
    MazeRecord { trajectory, seed }
}

/// Replays a parsed record's intents through `simulate` and `withhold`.
pub fn replay_record(maze: &Maze, record: &MazeRecord, variant: MazeVariant, p: f64) -> MazeRecord {
    let intents: Vec<Direction> = record.trajectory.steps.iter().map(|s| s.intent).collect();
    let base = simulate(maze, maze.start, &intents);
    let trajectory = match variant {
        MazeVariant::Unwithheld => base,
        MazeVariant::Withheld => withhold(&base, p, SeedTree::new(record.seed).derive("withhold")),
    };
    MazeRecord {
        trajectory,
        seed: record.seed,
    }
}

/// Generates `count` records. In the withheld variant each record is
/// resampled until its withheld depth equals `depth` exactly.
pub fn generate_maze_records(maze: &Maze, cfg: &MazeDatasetConfig) -> Result<Vec<MazeRecord>, MazeError> {
    if cfg.depth == 0 {
        return Err(MazeError::Param("depth must be >= 1".into()));
    }
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(MazeError::Param("p must be in [0, 1]".into()));
    }
    if cfg.variant == MazeVariant::Withheld && (cfg.p == 0.0 || cfg.trajectory_len() < cfg.depth) {
        return Err(MazeError::DepthUnreachable {
            depth: cfg.depth,
            attempts: 0,
        });
    }
    let tree = SeedTree::new(cfg.seed).child("maze-records");
    (0..cfg.count as u64)
        .into_par_iter()
        .map(|i| {
            let rec_tree = tree.child(&format!("record{i}"));
            for attempt in 0..MAX_ATTEMPTS {
                let rec = record_from_seed(maze, cfg, rec_tree.derive_indexed("attempt", attempt));
                if cfg.variant == MazeVariant::Unwithheld || rec.trajectory.withheld_depth == cfg.depth {
                    return Ok(rec);
                }
            }
            Err(MazeError::DepthUnreachable {
                depth: cfg.depth,
                attempts: MAX_ATTEMPTS,
            })
        })
        .collect()
}

pub fn maze_for_seed(seed: u64) -> Maze {
    Maze::generate(SeedTree::new(seed).derive("maze"))
}

/// Writes the dataset and a `.manifest` sidecar carrying the maze seed and
/// wall bitmap.
pub fn emit_maze_dataset(cfg: &MazeDatasetConfig, path: &Path) -> Result<Vec<MazeRecord>, MazeError> {
    let maze = maze_for_seed(cfg.seed);
    let records = generate_maze_records(&maze, cfg)?;
    let mut out = BufWriter::new(File::create(path)?);
    for r in &records {
        writeln!(out, "{}", r.to_line())?;
    }
    out.flush()?;
    let withheld: usize = records.iter().map(|r| r.trajectory.withheld_depth).sum();
    let steps: usize = records.iter().map(|r| r.trajectory.steps.len()).sum();
    let mut m = Manifest::new();
    m.set("kind", "maze")
        .set("variant", cfg.variant)
        .set("p", cfg.p)
        .set("depth", cfg.depth)
        .set("count", records.len())
        .set("length", cfg.trajectory_len())
        .set("seed", cfg.seed)
        .set("maze_seed", maze.seed)
        .set("start", format!("{} {}", maze.start.x, maze.start.y))
        .set("size", MAZE_SIZE)
        .set("walls_hex", maze.wall_hex())
        .set(
            "withheld_fraction",
            format!("{:.6}", if steps > 0 { withheld as f64 / steps as f64 } else { 0.0 }),
        );
    m.write(&crate::manifest::sidecar_path(path))?;
    Ok(records)
}
