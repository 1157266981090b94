use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::seq::index::sample;
use rayon::prelude::*;

use super::{generate_program, interpret, FrjtError, HaltState, Program};
use crate::manifest::{sidecar_path, Manifest};
use crate::seed::{rng_from, SeedTree};

/// Target band for the halt-A fraction.
pub const A_FRACTION_BAND: (f64, f64) = (0.47, 0.53);
/// Target band for mean code coverage.
pub const COVERAGE_BAND: (f64, f64) = (0.40, 0.60);
/// Outside this band the writer flips halt states to rebalance.
pub const REBALANCE_BAND: (f64, f64) = (0.45, 0.55);

#[derive(Debug, Clone)]
pub struct FrjtDatasetConfig {
    pub max_depth: usize,
    pub per_depth: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrjtRecord {
    pub program: Program,
    pub label: HaltState,
    pub coverage: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub count: usize,
    pub a_fraction: f64,
    pub mean_coverage: f64,
    /// Per depth: (depth, A fraction, mean coverage).
    pub per_depth: Vec<(usize, f64, f64)>,
    pub flipped: usize,
    pub warnings: Vec<String>,
}

fn in_band(x: f64, band: (f64, f64)) -> bool {
    x >= band.0 && x <= band.1
}

/// Generates the records for every depth in `1..=max_depth`, rebalancing the
/// halt states if they drift out of [`REBALANCE_BAND`].
pub fn generate_records(cfg: &FrjtDatasetConfig) -> Result<(Vec<FrjtRecord>, DatasetStats), FrjtError> {
    let tree = SeedTree::new(cfg.seed).child("frjt");
    let jobs: Vec<(usize, usize)> = (1..=cfg.max_depth)
        .flat_map(|d| (0..cfg.per_depth).map(move |i| (d, i)))
        .collect();
    let mut records = jobs
        .par_iter()
        .map(|&(depth, i)| {
            let seed = tree.derive_indexed(&format!("depth{depth}"), i as u64);
            let program = generate_program(depth, seed);
            let run = interpret(&program)?;
            Ok(FrjtRecord {
                label: run.halt_state,
                coverage: run.coverage(),
                steps: run.step_count,
                program,
            })
        })
        .collect::<Result<Vec<_>, FrjtError>>()?;

    let flipped = rebalance(&mut records, tree.derive("rebalance"));
    let stats = compute_stats(&records, cfg.max_depth, flipped);
    Ok((records, stats))
}

fn rebalance(records: &mut [FrjtRecord], seed: u64) -> usize {
    let n = records.len();
    if n == 0 {
        return 0;
    }
    let a = records.iter().filter(|r| r.label == HaltState::A).count();
    if in_band(a as f64 / n as f64, REBALANCE_BAND) {
        return 0;
    }
    let majority = if 2 * a > n { HaltState::A } else { HaltState::B };
    let to_flip = a.max(n - a).saturating_sub(n - n / 2);
    let candidates: Vec<usize> = (0..n).filter(|&i| records[i].label == majority).collect();
    let mut rng = rng_from(seed);
    let picks = sample(&mut rng, candidates.len(), to_flip.min(candidates.len()));
    for p in picks.iter() {
        let rec = &mut records[candidates[p]];
        rec.program.flip_halts();
        rec.label = rec.label.flipped();
    }
    to_flip
}

fn compute_stats(records: &[FrjtRecord], max_depth: usize, flipped: usize) -> DatasetStats {
    let frac = |rs: &[&FrjtRecord]| -> (f64, f64) {
        if rs.is_empty() {
            return (0.0, 0.0);
        }
        let a = rs.iter().filter(|r| r.label == HaltState::A).count() as f64;
        let c: f64 = rs.iter().map(|r| r.coverage).sum();
        (a / rs.len() as f64, c / rs.len() as f64)
    };
    let all: Vec<&FrjtRecord> = records.iter().collect();
    let (a_fraction, mean_coverage) = frac(&all);
    let per_depth: Vec<(usize, f64, f64)> = (1..=max_depth)
        .map(|d| {
            let rs: Vec<&FrjtRecord> = records.iter().filter(|r| r.program.depth == d).collect();
            let (a, c) = frac(&rs);
            (d, a, c)
        })
        .collect();
    let mut warnings = Vec::new();
    if !in_band(a_fraction, A_FRACTION_BAND) {
        warnings.push(format!("a_fraction {a_fraction:.4} outside {A_FRACTION_BAND:?}"));
    }
    if !in_band(mean_coverage, COVERAGE_BAND) {
        warnings.push(format!("mean_coverage {mean_coverage:.4} outside {COVERAGE_BAND:?}"));
    }
    DatasetStats {
        count: records.len(),
        a_fraction,
        mean_coverage,
        per_depth,
        flipped,
        warnings,
    }
}

/// Writes `label<TAB>tokens` records plus a `.manifest` sidecar.
pub fn emit_frjt_dataset(cfg: &FrjtDatasetConfig, path: &Path) -> Result<DatasetStats, FrjtError> {
    if cfg.max_depth == 0 || cfg.per_depth == 0 {
        return Err(FrjtError::Config("max_depth and per_depth must be at least 1".into()));
    }
    let (records, stats) = generate_records(cfg)?;
    let mut out = BufWriter::new(File::create(path)?);
    for r in &records {
        writeln!(out, "{}\t{}", r.label, r.program.to_tokens())?;
    }
    out.flush()?;

    let mut m = Manifest::new();
    m.set("kind", "frjt")
        .set("seed", cfg.seed)
        .set("max_depth", cfg.max_depth)
        .set("per_depth", cfg.per_depth)
        .set("count", stats.count)
        .set("a_fraction", format!("{:.6}", stats.a_fraction))
        .set("coverage_mean", format!("{:.6}", stats.mean_coverage))
        .set("flipped", stats.flipped);
    for (d, a, c) in &stats.per_depth {
        m.set(format!("depth{d}.a_fraction"), format!("{a:.6}"));
        m.set(format!("depth{d}.coverage_mean"), format!("{c:.6}"));
    }
    m.set("vocab", super::token_vocabulary(cfg.max_depth).join(" "));
    m.set("warnings", stats.warnings.join("; "));
    m.write(&sidecar_path(path))?;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rebalance_moves_skewed_labels_to_half() {
        let mut records: Vec<FrjtRecord> = (0..100)
            .map(|i| {
                let mut program = generate_program(2, i);
                let label = interpret(&program).unwrap().halt_state;
                // force 80/20 skew towards A
                let label = if i < 80 && label == HaltState::B {
                    program.flip_halts();
                    HaltState::A
                } else if i >= 80 && label == HaltState::A {
                    program.flip_halts();
                    HaltState::B
                } else {
                    label
                };
                FrjtRecord {
                    program,
                    label,
                    coverage: 0.5,
                    steps: 1,
                }
            })
            .collect();
        let flipped = rebalance(&mut records, 1);
        assert_eq!(flipped, 30);
        let a = records.iter().filter(|r| r.label == HaltState::A).count();
        assert_eq!(a, 50);
        for r in &records {
            assert_eq!(interpret(&r.program).unwrap().halt_state, r.label);
        }
    }

    #[test]
    fn single_record_label_matches_interpreter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("frjt.tsv");
        let cfg = FrjtDatasetConfig {
            max_depth: 1,
            per_depth: 1,
            seed: 5,
        };
        emit_frjt_dataset(&cfg, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1);
        let (label, toks) = lines[0].split_once('\t').unwrap();
        let p = Program::parse_tokens(toks, 0).unwrap();
        assert_eq!(label, interpret(&p).unwrap().halt_state.to_string());
        let m = Manifest::read(&sidecar_path(&path)).unwrap();
        assert_eq!(m.get("count"), Some("1"));
    }
}
