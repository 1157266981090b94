use rand::Rng as _;

use super::{HaltState, Instruction, Label, Program, Reg, NUM_REGISTERS};
use crate::seed::{rng_from, Rng};

/// Knobs of the program generator.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub min_ops: usize,
    pub max_ops: usize,
    /// Success probability of the geometric forward block distance.
    pub distance_p: f64,
    /// Probability that a jump targets a halting label directly.
    pub terminal_p: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_ops: 1,
            max_ops: 3,
            distance_p: 0.5,
            terminal_p: 0.08,
        }
    }
}

#[derive(Clone, Copy)]
enum Target {
    Block(usize),
    Halt(HaltState),
}

pub fn generate_program(depth: usize, seed: u64) -> Program {
    generate_program_with(depth, seed, &GeneratorConfig::default())
}

/// Generates a program with exactly `depth` labels.
///
/// Layout for `depth >= 2`: an unlabeled entry block, `depth - 2` labeled
/// blocks, then `LABEL; HALT A` and `LABEL; HALT B`. Every block is a few
/// register ops followed by `JZ/JNZ` and `JMP`, both forward. For `depth == 1`
/// the single block ends in a conditional jump to the `HALT B` label and
/// falls through to `HALT A`.
pub fn generate_program_with(depth: usize, seed: u64, cfg: &GeneratorConfig) -> Program {
    assert!(depth >= 1, "depth must be positive");
    let mut rng = rng_from(seed);
    let blocks = if depth == 1 { 1 } else { depth - 1 };
    // Labels are numbered in text order: blocks 1.. get L0.., then the halts.
    let block_label = |b: usize| Label(b as u32 - 1);
    let halt_label = |s: HaltState| match s {
        HaltState::A => Label(blocks as u32 - 1),
        HaltState::B => Label(blocks as u32),
    };

    let mut code = Vec::new();
    for b in 0..blocks {
        if b > 0 {
            code.push(Instruction::Label(block_label(b)));
        }
        let n_ops = rng.gen_range(cfg.min_ops..=cfg.max_ops);
        for _ in 0..n_ops {
            code.push(random_op(&mut rng));
        }
        let reg = Reg(rng.gen_range(0..NUM_REGISTERS as u8));
        if depth == 1 {
            let target = Label(0);
            code.push(cond_jump(&mut rng, reg, target));
            code.push(Instruction::Halt(HaltState::A));
            code.push(Instruction::Label(target));
            code.push(Instruction::Halt(HaltState::B));
            return Program::new(code, seed);
        }
        let resolve = |t: Target| match t {
            Target::Block(x) => block_label(x),
            Target::Halt(s) => halt_label(s),
        };
        let cond_target = resolve(pick_target(&mut rng, b, blocks, cfg));
        code.push(cond_jump(&mut rng, reg, cond_target));
        let jmp_target = resolve(pick_target(&mut rng, b, blocks, cfg));
        code.push(Instruction::Jmp { target: jmp_target });
    }
    for state in [HaltState::A, HaltState::B] {
        code.push(Instruction::Label(halt_label(state)));
        code.push(Instruction::Halt(state));
    }
    Program::new(code, seed)
}

fn random_op(rng: &mut Rng) -> Instruction {
    let dst = Reg(rng.gen_range(0..NUM_REGISTERS as u8));
    match rng.gen_range(0..3) {
        0 => Instruction::Load {
            dst,
            imm: rng.gen(),
        },
        1 => Instruction::Add {
            dst,
            src: Reg(rng.gen_range(0..NUM_REGISTERS as u8)),
        },
        _ => Instruction::Sub {
            dst,
            src: Reg(rng.gen_range(0..NUM_REGISTERS as u8)),
        },
    }
}

fn cond_jump(rng: &mut Rng, reg: Reg, target: Label) -> Instruction {
    if rng.gen_bool(0.5) {
        Instruction::Jz { reg, target }
    } else {
        Instruction::Jnz { reg, target }
    }
}

fn random_halt(rng: &mut Rng) -> HaltState {
    if rng.gen_bool(0.5) {
        HaltState::A
    } else {
        HaltState::B
    }
}

/// Geometric forward distance over blocks, with a fixed chance of jumping
/// straight to a halt. Distances past the last block also halt.
fn pick_target(rng: &mut Rng, block: usize, blocks: usize, cfg: &GeneratorConfig) -> Target {
    if rng.gen_bool(cfg.terminal_p) {
        return Target::Halt(random_halt(rng));
    }
    let mut dist = 1;
    while !rng.gen_bool(cfg.distance_p) {
        dist += 1;
        if block + dist >= blocks {
            break;
        }
    }
    if block + dist < blocks {
        Target::Block(block + dist)
    } else {
        Target::Halt(random_halt(rng))
    }
}
