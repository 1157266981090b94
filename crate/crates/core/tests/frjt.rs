use std::collections::HashMap;

use termforge::frjt::*;

/// Independent evaluator over the listing text.
fn oracle(listing: &str) -> (char, Vec<bool>) {
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

#[test]
fn interpreter_agrees_with_oracle_on_every_program() {
    let cfg = FrjtDatasetConfig { max_depth: 8, per_depth: 8000, seed: 20240601 };
    let (records, stats) = generate_records(&cfg).unwrap();
    assert_eq!(records.len(), 64_000);
    assert!((0.47..=0.53).contains(&stats.a_fraction), "{stats:?}");
    assert!((0.40..=0.60).contains(&stats.mean_coverage), "{stats:?}");
    for r in &records {
        r.program.validate().unwrap();
        let (halt, ran) = oracle(&r.program.to_listing());
        let label = if r.label == HaltState::A { 'A' } else { 'B' };
        assert_eq!(halt, label);
        let run = interpret(&r.program).unwrap();
        assert_eq!(run.executed_mask, ran);
        assert_eq!(run.halt_state, r.label);
    }
    for d in 1..=8 {
        assert_eq!(records.iter().filter(|r| r.program.depth == d).count(), 8000);
    }
}

#[test]
fn text_forms_round_trip() {
    for depth in 1..=16 {
        for seed in 0..50 {
            let p = generate_program(depth, seed);
            assert_eq!(Program::parse_listing(&p.to_listing()).unwrap(), p);
            assert_eq!(Program::parse_tokens(&p.to_tokens(), seed).unwrap(), p);
            let vocab = token_vocabulary(depth);
            assert!(p.to_tokens().split(' ').all(|t| vocab.iter().any(|v| v == t)));
        }
    }
}

#[test]
fn flipping_halts_flips_the_label() {
    for seed in 0..200 {
        let mut p = generate_program(6, seed);
        let before = interpret(&p).unwrap();
        p.flip_halts();
        let after = interpret(&p).unwrap();
        assert_eq!(after.halt_state, before.halt_state.flipped());
        assert_eq!(after.executed_mask, before.executed_mask);
    }
}

#[test]
fn dataset_file_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frjt.tsv");
    let cfg = FrjtDatasetConfig { max_depth: 3, per_depth: 50, seed: 5 };
    let stats = emit_frjt_dataset(&cfg, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 150);
    for line in text.lines() {
        let (label, tokens) = line.split_once('\t').unwrap();
        let p = Program::parse_tokens(tokens, 0).unwrap();
        assert_eq!(interpret(&p).unwrap().halt_state.to_string(), label);
    }
    assert_eq!(stats.count, 150);
    assert!(termforge::manifest::sidecar_path(&path).exists());
    let again = dir.path().join("again.tsv");
    emit_frjt_dataset(&cfg, &again).unwrap();
    assert_eq!(std::fs::read(&again).unwrap(), text.as_bytes());
}
